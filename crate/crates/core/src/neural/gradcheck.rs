/// Default central-difference step.
pub const FD_STEP: f64 = 1e-5;

/// Magnitudes below this are treated as this size when forming relative errors.
const REL_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    pub worst_index: usize,
    pub checked: usize,
}

/// Compares the analytic gradient returned by `loss_and_grad` with central
/// finite differences at every parameter.
pub fn grad_check<F>(params: &[f64], step: f64, mut loss_and_grad: F) -> GradCheckReport
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    let (_, analytic) = loss_and_grad(params);
    assert_eq!(analytic.len(), params.len(), "gradient length must match parameter count");
    let mut probe = params.to_vec();
    let mut report = GradCheckReport { max_rel_error: 0.0, worst_index: 0, checked: params.len() };
    for k in 0..params.len() {
        probe[k] = params[k] + step;
        let (up, _) = loss_and_grad(&probe);
        probe[k] = params[k] - step;
        let (down, _) = loss_and_grad(&probe);
        probe[k] = params[k];
        let numeric = (up - down) / (2.0 * step);
        let scale = analytic[k].abs().max(numeric.abs()).max(REL_FLOOR);
        let rel = (analytic[k] - numeric).abs() / scale;
        if rel > report.max_rel_error || rel.is_nan() {
            report.max_rel_error = if rel.is_nan() { f64::INFINITY } else { rel };
            report.worst_index = k;
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepts_correct_gradient() {
        let r = grad_check(&[0.3, -1.2], FD_STEP, |p| (p[0].powi(3) + p[0] * p[1], vec![3.0 * p[0] * p[0] + p[1], p[0]]));
        assert!(r.max_rel_error < 1e-6, "{r:?}");
        assert_eq!(r.checked, 2);
    }

    #[test]
    fn degenerate_zero_case_is_finite() {
        let r = grad_check(&[0.0, 0.0], FD_STEP, |p| (0.0 * p[0] * p[1], vec![0.0, 0.0]));
        assert!(r.max_rel_error.is_finite());
        assert_eq!(r.max_rel_error, 0.0);
    }

    #[test]
    fn flags_wrong_gradient() {
        let r = grad_check(&[0.3, -1.2], FD_STEP, |p| (p[0] * p[1], vec![p[1], 2.0 * p[0]]));
        assert!(r.max_rel_error > 0.1);
        assert_eq!(r.worst_index, 1);
    }
}
