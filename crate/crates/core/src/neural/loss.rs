use super::{check_len, NeuralError};

/// Mean squared error and its gradient with respect to `pred`.
pub fn mse(pred: &[f64], target: &[f64]) -> Result<(f64, Vec<f64>), NeuralError> {
    check_len("mse target", pred.len(), target.len())?;
    let n = pred.len().max(1) as f64;
    let mut loss = 0.0;
    let grad = pred
        .iter()
        .zip(target)
        .map(|(p, t)| {
            let d = p - t;
            loss += d * d;
            2.0 * d / n
        })
        .collect();
    Ok((loss / n, grad))
}

/// Mean Huber loss with threshold `delta` and its gradient.
pub fn huber(pred: &[f64], target: &[f64], delta: f64) -> Result<(f64, Vec<f64>), NeuralError> {
    check_len("huber target", pred.len(), target.len())?;
    let n = pred.len().max(1) as f64;
    let mut loss = 0.0;
    let grad = pred
        .iter()
        .zip(target)
        .map(|(p, t)| {
            let d = p - t;
            if d.abs() <= delta {
                loss += 0.5 * d * d;
                d / n
            } else {
                loss += delta * (d.abs() - 0.5 * delta);
                delta * d.signum() / n
            }
        })
        .collect();
    Ok((loss / n, grad))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn mse_hand_values() {
        let (l, g) = mse(&[1.0, 3.0], &[0.0, 1.0]).unwrap();
        assert_eq!(l, 2.5);
        assert_eq!(g, vec![1.0, 2.0]);
        assert_eq!(mse(&[0.5; 4], &[0.5; 4]).unwrap().0, 0.0);
    }

    #[test]
    fn huber_switches_branch_at_delta() {
        let (l, g) = huber(&[0.5], &[0.0], 1.0).unwrap();
        assert_eq!((l, g[0]), (0.125, 0.5));
        let (l, g) = huber(&[-3.0], &[0.0], 1.0).unwrap();
        assert_eq!((l, g[0]), (2.5, -1.0));
    }

    #[test]
    fn length_mismatch_is_an_error() {
        assert!(mse(&[1.0], &[1.0, 2.0]).is_err());
        assert!(huber(&[1.0], &[], 1.0).is_err());
    }

    proptest! {
        #[test]
        fn huber_is_bounded_by_mse_and_continuous(d in -10.0f64..10.0) {
            let (h, _) = huber(&[d], &[0.0], 1.0).unwrap();
            let (m, _) = mse(&[d], &[0.0]).unwrap();
            prop_assert!(h >= 0.0 && h <= 0.5 * m + 1e-12);
            let eps = 1e-9;
            let (a, _) = huber(&[1.0 - eps], &[0.0], 1.0).unwrap();
            let (b, _) = huber(&[1.0 + eps], &[0.0], 1.0).unwrap();
            prop_assert!((a - b).abs() < 1e-8);
        }
    }
}
