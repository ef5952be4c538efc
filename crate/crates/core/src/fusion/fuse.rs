use std::ops::Range;

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// `Z = [(1-α)·anchor | α·semantic]`, one row per object.
#[derive(Debug, Clone, PartialEq)]
pub struct FusedRepresentation {
    pub matrix: Matrix,
    pub alpha: f64,
    pub anchor_span: Range<usize>,
    pub semantic_span: Range<usize>,
}

pub fn check_alpha(alpha: f64) -> Result<()> {
    if (0.0..=1.0).contains(&alpha) {
        Ok(())
    } else {
        Err(Error::Contract(format!("alpha must lie in [0, 1], got {alpha}")))
    }
}

pub fn fuse(anchor: &Matrix, semantic: &Matrix, alpha: f64) -> Result<FusedRepresentation> {
    check_alpha(alpha)?;
    if anchor.rows() != semantic.rows() {
        return Err(Error::Shape(format!(
            "anchor has {} rows, semantic has {}",
            anchor.rows(),
            semantic.rows()
        )));
    }
    let (ds, dm) = (anchor.cols(), semantic.cols());
    let width = ds + dm;
    let mut data = Vec::with_capacity(anchor.rows() * width);
    for i in 0..anchor.rows() {
        data.extend(anchor.row(i).iter().map(|x| (1.0 - alpha) * x));
        data.extend(semantic.row(i).iter().map(|x| alpha * x));
    }
    Ok(FusedRepresentation {
        matrix: Matrix::from_vec(anchor.rows(), width, data)?,
        alpha,
        anchor_span: 0..ds,
        semantic_span: ds..width,
    })
}
