//! Symmetric in-batch InfoNCE.
//!
//! With logits `S = A·Bᵀ / τ`, the loss is the mean of the row-wise and the
//! column-wise softmax cross-entropy, both with the diagonal as target:
//!
//! ```text
//! L_row = 1/N Σ_i [ logsumexp_j S_ij − S_ii ]
//! L_col = 1/N Σ_j [ logsumexp_i S_ij − S_jj ]
//! L     = (L_row + L_col) / 2
//! ```
//!
//! so `∂L/∂S_ij = (softmax_row(i)_j + softmax_col(j)_i − 2·δ_ij) / 2N`.

use super::{Matrix, Scalar, TrainError};

#[derive(Clone, Debug)]
pub struct InfoNce<T> {
    pub loss: T,
    pub row_loss: T,
    pub col_loss: T,
    pub grad_anchors: Matrix<T>,
    pub grad_positives: Matrix<T>,
}

pub fn infonce_loss<T: Scalar>(
    anchors: &Matrix<T>,
    positives: &Matrix<T>,
    temperature: T,
) -> Result<InfoNce<T>, TrainError> {
    if !(temperature > T::zero()) {
        return Err(TrainError::BadTemperature(temperature.to_f64()));
    }
    let n = anchors.rows();
    let d = anchors.cols();
    if n < 2 {
        return Err(TrainError::BatchTooSmall(n));
    }
    if positives.rows() != n || positives.cols() != d {
        return Err(TrainError::Shape(format!(
            "anchors {}x{} vs positives {}x{}",
            n,
            d,
            positives.rows(),
            positives.cols()
        )));
    }

    let inv_tau = T::one() / temperature;
    let mut logits = Matrix::zeros(n, n);
    for i in 0..n {
        let a = anchors.row(i);
        for j in 0..n {
            let b = positives.row(j);
            let dot = a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y);
            logits[(i, j)] = dot * inv_tau;
        }
    }

    // softmax over each row and each column
    let mut row_soft = Matrix::zeros(n, n);
    let mut row_loss = T::zero();
    for i in 0..n {
        let lse = log_sum_exp((0..n).map(|j| logits[(i, j)]));
        row_loss = row_loss + (lse - logits[(i, i)]);
        for j in 0..n {
            row_soft[(i, j)] = (logits[(i, j)] - lse).exp();
        }
    }
    let mut col_soft = Matrix::zeros(n, n);
    let mut col_loss = T::zero();
    for j in 0..n {
        let lse = log_sum_exp((0..n).map(|i| logits[(i, j)]));
        col_loss = col_loss + (lse - logits[(j, j)]);
        for i in 0..n {
            col_soft[(i, j)] = (logits[(i, j)] - lse).exp();
        }
    }
    let nt = T::from_usize(n);
    let row_loss = row_loss / nt;
    let col_loss = col_loss / nt;
    let half = T::from_f64(0.5);

    // dL/dS
    let scale = half / nt;
    let mut grad_logits = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let delta = if i == j { T::from_f64(2.0) } else { T::zero() };
            grad_logits[(i, j)] = (row_soft[(i, j)] + col_soft[(i, j)] - delta) * scale;
        }
    }

    // dA = dS·B / τ, dB = dSᵀ·A / τ
    let mut grad_anchors = Matrix::zeros(n, d);
    let mut grad_positives = Matrix::zeros(n, d);
    for i in 0..n {
        for j in 0..n {
            let g = grad_logits[(i, j)] * inv_tau;
            if g == T::zero() {
                continue;
            }
            for k in 0..d {
                grad_anchors[(i, k)] = grad_anchors[(i, k)] + g * positives[(j, k)];
                grad_positives[(j, k)] = grad_positives[(j, k)] + g * anchors[(i, k)];
            }
        }
    }

    Ok(InfoNce {
        loss: (row_loss + col_loss) * half,
        row_loss,
        col_loss,
        grad_anchors,
        grad_positives,
    })
}

fn log_sum_exp<T: Scalar>(xs: impl Iterator<Item = T> + Clone) -> T {
    let max = xs.clone().fold(T::neg_infinity(), T::max);
    let sum = xs.fold(T::zero(), |acc, x| acc + (x - max).exp());
    max + sum.ln()
}
