//! AdamW with decoupled weight decay and the warmup-linear schedule.

use super::{Scalar, TrainError};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdamW {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,
}

impl Default for AdamW {
    fn default() -> Self {
        AdamW {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            weight_decay: 0.01,
        }
    }
}

/// First/second moments per parameter tensor and a shared step counter.
#[derive(Clone, Debug, PartialEq)]
pub struct OptimState<T> {
    step: u64,
    first: Vec<Vec<T>>,
    second: Vec<Vec<T>>,
}

impl<T: Scalar> OptimState<T> {
    pub fn new(shapes: &[usize]) -> Self {
        OptimState {
            step: 0,
            first: shapes.iter().map(|&n| vec![T::zero(); n]).collect(),
            second: shapes.iter().map(|&n| vec![T::zero(); n]).collect(),
        }
    }

    pub fn step(&self) -> u64 {
        self.step
    }
}

/// One AdamW update of every tensor in `params`.
///
/// Gradients are checked for finiteness before anything is touched, so a bad
/// gradient leaves parameters and state unchanged.
pub fn adamw_step<T: Scalar>(
    params: &mut [&mut [T]],
    grads: &[&[T]],
    state: &mut OptimState<T>,
    lr: f64,
    hp: &AdamW,
) -> Result<(), TrainError> {
    if params.len() != grads.len() || params.len() != state.first.len() {
        return Err(TrainError::Shape(format!(
            "{} parameter tensors, {} gradients, {} moment buffers",
            params.len(),
            grads.len(),
            state.first.len()
        )));
    }
    for (t, (p, g)) in params.iter().zip(grads).enumerate() {
        if p.len() != g.len() || p.len() != state.first[t].len() {
            return Err(TrainError::Shape(format!(
                "tensor {t}: {} parameters, {} gradients, {} moments",
                p.len(),
                g.len(),
                state.first[t].len()
            )));
        }
        if let Some((index, value)) = g.iter().enumerate().find(|(_, x)| !x.is_finite()) {
            return Err(TrainError::NonFiniteGradient {
                tensor: t,
                index,
                value: Scalar::to_f64(*value),
            });
        }
    }

    state.step += 1;
    let t = state.step as i32;
    let bias1 = 1.0 - hp.beta1.powi(t);
    let bias2 = 1.0 - hp.beta2.powi(t);
    let decay = T::from_f64(1.0 - lr * hp.weight_decay);
    let b1 = T::from_f64(hp.beta1);
    let b2 = T::from_f64(hp.beta2);
    let one = T::one();
    let step_size = T::from_f64(lr / bias1);
    let inv_sqrt_bias2 = T::from_f64(1.0 / bias2.sqrt());
    let eps = T::from_f64(hp.eps);

    for (k, (p, g)) in params.iter_mut().zip(grads).enumerate() {
        let m = &mut state.first[k];
        let v = &mut state.second[k];
        for i in 0..p.len() {
            let gi = g[i];
            m[i] = b1 * m[i] + (one - b1) * gi;
            v[i] = b2 * v[i] + (one - b2) * gi * gi;
            let denom = v[i].sqrt() * inv_sqrt_bias2 + eps;
            p[i] = p[i] * decay - step_size * m[i] / denom;
        }
    }
    Ok(())
}

/// Linear warmup from 0 to `base_lr` over `⌈warmup_fraction·total_steps⌉`
/// steps, then linear decay to 0 at `total_steps`.
pub fn lr_at(step: usize, total_steps: usize, base_lr: f64, warmup_fraction: f64) -> f64 {
    let warmup = (warmup_fraction * total_steps as f64).ceil() as usize;
    if step < warmup {
        return base_lr * step as f64 / warmup as f64;
    }
    if total_steps <= warmup {
        return base_lr;
    }
    let remaining = total_steps.saturating_sub(step) as f64;
    base_lr * remaining / (total_steps - warmup) as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_zero_decay_is_identity() {
        let mut p = vec![1.0f64, -2.0, 3.5];
        let g = vec![0.0; 3];
        let mut s = OptimState::new(&[3]);
        let hp = AdamW {
            weight_decay: 0.0,
            ..AdamW::default()
        };
        adamw_step(&mut [&mut p], &[&g], &mut s, 0.1, &hp).unwrap();
        assert_eq!(p, vec![1.0, -2.0, 3.5]);
        assert_eq!(s.step(), 1);
    }

    #[test]
    fn decoupled_decay_scales_params() {
        let mut p = vec![1.0f64, -2.0];
        let mut s = OptimState::new(&[2]);
        adamw_step(&mut [&mut p], &[&[0.0, 0.0]], &mut s, 1.0, &AdamW::default()).unwrap();
        assert!((p[0] - 0.99).abs() < 1e-15);
        assert!((p[1] + 1.98).abs() < 1e-15);
    }

    /// Scalar textbook AdamW, written independently of the vectorised one.
    fn reference_adamw(x0: f64, steps: usize, lr: f64) -> Vec<f64> {
        let (b1, b2, eps) = (0.9f64, 0.999f64, 1e-8);
        let (mut x, mut m, mut v) = (x0, 0.0, 0.0);
        let mut out = Vec::new();
        for t in 1..=steps {
            let g = 2.0 * x;
            m = b1 * m + (1.0 - b1) * g;
            v = b2 * v + (1.0 - b2) * g * g;
            let mhat = m / (1.0 - b1.powi(t as i32));
            let vhat = v / (1.0 - b2.powi(t as i32));
            x -= lr * mhat / (vhat.sqrt() + eps);
            out.push(x);
        }
        out
    }

    #[test]
    fn quadratic_descent_matches_reference() {
        let hp = AdamW {
            weight_decay: 0.0,
            ..AdamW::default()
        };
        let mut x = vec![1.0f64];
        let mut s = OptimState::new(&[1]);
        let reference = reference_adamw(1.0, 200, 0.1);
        for r in &reference {
            let g = vec![2.0 * x[0]];
            adamw_step(&mut [&mut x], &[&g], &mut s, 0.1, &hp).unwrap();
            assert!((x[0] - r).abs() < 1e-9 * r.abs().max(1.0));
        }
        assert!(x[0].abs() < 1e-2);
    }

    #[test]
    fn non_finite_gradient_aborts_untouched() {
        let mut p = vec![1.0f32, 2.0];
        let mut s = OptimState::new(&[2]);
        let before = s.clone();
        let err = adamw_step(&mut [&mut p], &[&[0.5, f32::NAN]], &mut s, 0.1, &AdamW::default())
            .unwrap_err();
        assert!(matches!(err, TrainError::NonFiniteGradient { index: 1, .. }));
        assert_eq!(p, vec![1.0, 2.0]);
        assert_eq!(s, before);
    }

    #[test]
    fn shape_mismatch() {
        let mut p = vec![1.0f32; 2];
        let mut s = OptimState::new(&[2]);
        assert!(adamw_step(&mut [&mut p], &[&[0.0]], &mut s, 0.1, &AdamW::default()).is_err());
    }

    #[test]
    fn schedule_shape() {
        let (total, base) = (100, 2e-5);
        assert_eq!(lr_at(0, total, base, 0.05), 0.0);
        assert_eq!(lr_at(5, total, base, 0.05), base);
        assert_eq!(lr_at(total, total, base, 0.05), 0.0);
        assert!((lr_at(2, total, base, 0.05) - base * 0.4).abs() < 1e-20);
        assert!((lr_at(43, total, base, 0.05) - base * 0.6).abs() < 1e-20);
        // warmup window rounds up
        assert_eq!(lr_at(1, 10, 1.0, 0.05), 1.0);
        assert_eq!(lr_at(0, 10, 1.0, 0.0), 1.0);
    }
}
