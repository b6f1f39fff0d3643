use serde::{Deserialize, Serialize};

/// Weights of the shaping term, in the same ¢ units as the reward.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ShapingConfig {
    /// Bonus for issuing nothing when nothing is required.
    pub idle_bonus: f64,
    /// Per ¢/kWh of incentive issued when nothing is required.
    pub needless_penalty: f64,
    /// Per kW of reduction still missing.
    pub miss_penalty: f64,
    /// Per kW of reduction beyond the requirement.
    pub over_penalty: f64,
}

impl Default for ShapingConfig {
    fn default() -> Self {
        Self { idle_bonus: 5.0, needless_penalty: 5.0, miss_penalty: 15.0, over_penalty: 0.5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Shaping {
    pub r_miss: f64,
    pub r_over: f64,
    pub phi: f64,
}

/// Shaping term for an hour requiring `required` kW of reduction in which
/// `achieved` kW were obtained with the given incentive rates.
///
/// When nothing is required the term only rewards or penalizes the rates
/// themselves; otherwise it penalizes missing (doubly so without any
/// incentive) and excess reduction.
pub fn shaping(cfg: &ShapingConfig, required: f64, achieved: f64, rates: &[f64]) -> Shaping {
    let r_miss = (required - achieved).max(0.0);
    let r_over = (achieved - required).max(0.0);
    let total: f64 = rates.iter().sum();
    let phi = if required <= 0.0 {
        if total == 0.0 {
            cfg.idle_bonus
        } else {
            -cfg.needless_penalty * total
        }
    } else {
        let miss = if total == 0.0 { 2.0 * cfg.miss_penalty } else { cfg.miss_penalty };
        -miss * r_miss - cfg.over_penalty * r_over
    };
    Shaping { r_miss, r_over, phi }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn phi(required: f64, achieved: f64, rates: &[f64]) -> f64 {
        shaping(&ShapingConfig::default(), required, achieved, rates).phi
    }

    #[test]
    fn idle_bonus() {
        assert_eq!(phi(0.0, 0.0, &[0.0, 0.0, 0.0]), 5.0);
    }

    #[test]
    fn needless_incentive_is_penalized() {
        assert!((phi(0.0, 0.4, &[1.0, 0.5, 0.0]) - -7.5).abs() < 1e-12);
    }

    #[test]
    fn unmet_requirement_without_incentive_doubles() {
        assert!((phi(2.0, 0.0, &[0.0; 3]) - -60.0).abs() < 1e-12);
        assert!((phi(2.0, 0.5, &[1.0, 0.0, 0.0]) - -22.5).abs() < 1e-12);
    }

    #[test]
    fn over_reduction() {
        let s = shaping(&ShapingConfig::default(), 1.0, 3.0, &[2.0, 0.0, 0.0]);
        assert_eq!((s.r_miss, s.r_over), (0.0, 2.0));
        assert!((s.phi - -1.0).abs() < 1e-12);
    }
}
