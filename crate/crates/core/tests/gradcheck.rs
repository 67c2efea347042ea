//! Central finite differences against the analytic InfoNCE gradients.

use ontorep::trainer::{
    contrastive_gradients, infonce_loss, Encoder, Gradients, Matrix,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const STEP: f64 = 1e-4;

fn unit_rows(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Matrix<f64> {
    let mut m = Matrix::zeros(n, d);
    for i in 0..n {
        let row = m.row_mut(i);
        for x in row.iter_mut() {
            *x = rng.random_range(-1.0..1.0);
        }
        let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
        for x in row.iter_mut() {
            *x /= norm;
        }
    }
    m
}

fn rel_err(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-8)
}

/// Largest relative error over every input coordinate of one batch.
fn batch_error(a: &Matrix<f64>, b: &Matrix<f64>, tau: f64) -> f64 {
    let out = infonce_loss(a, b, tau).unwrap();
    let mut worst = 0.0f64;
    for (which, grad) in [(0, &out.grad_anchors), (1, &out.grad_positives)] {
        for k in 0..a.as_slice().len() {
            let bump = |delta: f64| {
                let (mut a2, mut b2) = (a.clone(), b.clone());
                let target = if which == 0 { &mut a2 } else { &mut b2 };
                target.as_mut_slice()[k] += delta;
                infonce_loss(&a2, &b2, tau).unwrap().loss
            };
            let numeric = (bump(STEP) - bump(-STEP)) / (2.0 * STEP);
            worst = worst.max(rel_err(grad.as_slice()[k], numeric));
        }
    }
    worst
}

#[test]
fn infonce_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let a = unit_rows(&mut rng, 8, 16);
        let b = unit_rows(&mut rng, 8, 16);
        worst = worst.max(batch_error(&a, &b, 0.05));
    }
    assert!(worst < 1e-4, "max relative error {worst:e}");
}

#[test]
fn loss_value_matches_direct_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (a, b) = (unit_rows(&mut rng, 6, 4), unit_rows(&mut rng, 6, 4));
    let tau = 0.1;
    let s = |i: usize, j: usize| -> f64 {
        a.row(i).iter().zip(b.row(j)).map(|(x, y)| x * y).sum::<f64>() / tau
    };
    let mut total = 0.0;
    for i in 0..6 {
        let row: f64 = (0..6).map(|j| s(i, j).exp()).sum();
        let col: f64 = (0..6).map(|j| s(j, i).exp()).sum();
        total += (row.ln() - s(i, i)) + (col.ln() - s(i, i));
    }
    let direct = total / 12.0;
    let got = infonce_loss(&a, &b, tau).unwrap().loss;
    assert!((got - direct).abs() < 1e-12, "{got} vs {direct}");
}

#[test]
fn encoder_chain_matches_finite_differences() {
    // Gradients with respect to the bucket table and projection, through
    // pooling, projection, normalization and the loss.
    let enc = Encoder::<f32>::new(64, 8, 0.05, 0.5, 3).to_f64();
    let anchors = ["alpha beta", "gamma", "delta epsilon zeta", "eta theta"];
    let positives = ["beta gamma", "gamma iota", "zeta", "theta kappa lambda"];
    let mut grads = Gradients::zeros_like(&enc);
    contrastive_gradients(&enc, &anchors, &positives, &mut grads).unwrap();
    let touched: Vec<usize> = anchors
        .iter()
        .chain(&positives)
        .flat_map(|t| enc.bucket_ids(t).unwrap())
        .collect();
    let mut scratch = Gradients::zeros_like(&enc);
    let mut worst = 0.0f64;
    for tensor in 0..2 {
        let coords: Vec<usize> = if tensor == 0 {
            touched.iter().flat_map(|&b| (0..8).map(move |j| b * 8 + j)).collect()
        } else {
            (0..64).collect()
        };
        for k in coords {
            let mut loss_at = |delta: f64| {
                let mut e = enc.clone();
                e.params_mut()[tensor][k] += delta;
                contrastive_gradients(&e, &anchors, &positives, &mut scratch).unwrap()
            };
            let numeric = (loss_at(1e-6) - loss_at(-1e-6)) / 2e-6;
            let analytic = if tensor == 0 {
                grads.embeddings[k]
            } else {
                grads.projection[k]
            };
            if analytic.abs().max(numeric.abs()) > 1e-7 {
                worst = worst.max(rel_err(analytic, numeric));
            }
        }
    }
    assert!(worst < 1e-4, "max relative error {worst:e}");
}
