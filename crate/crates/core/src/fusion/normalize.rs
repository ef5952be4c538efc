use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Columns whose population std falls below this are treated as constant.
pub const CONSTANT_COLUMN_STD: f64 = 1e-12;

/// Column-wise z-score with population standard deviation. Constant columns
/// become all zeros.
pub fn zscore_normalize(m: &Matrix) -> Result<Matrix> {
    let (n, c) = (m.rows(), m.cols());
    if n < 2 {
        return Err(Error::Contract(format!(
            "z-score normalization needs at least 2 rows, got {n}"
        )));
    }
    let mut mean = vec![0.0f64; c];
    for row in m.iter_rows() {
        for (s, &x) in mean.iter_mut().zip(row) {
            *s += x;
        }
    }
    let nf = n as f64;
    mean.iter_mut().for_each(|s| *s /= nf);
    let mut var = vec![0.0f64; c];
    for row in m.iter_rows() {
        for ((v, &x), &mu) in var.iter_mut().zip(row).zip(&mean) {
            *v += (x - mu) * (x - mu);
        }
    }
    let std: Vec<f64> = var.iter().map(|v| (v / nf).sqrt()).collect();
    let mut out = Matrix::zeros(n, c);
    for i in 0..n {
        let src = m.row(i);
        let dst = out.row_mut(i);
        for j in 0..c {
            if std[j] >= CONSTANT_COLUMN_STD {
                dst[j] = (src[j] - mean[j]) / std[j];
            }
        }
    }
    Ok(out)
}
