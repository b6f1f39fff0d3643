use super::HouseholdError;

fn check_level(q: u32, m: u32) -> Result<(), HouseholdError> {
    if m == 0 || q > m {
        Err(HouseholdError::Level { q, m })
    } else {
        Ok(())
    }
}

/// Discomfort of curtailing a power-controllable appliance to level `q` of `m`:
/// `beta * ((q / m) * e)^2`.
pub fn pc_cost(beta: f64, q: u32, m: u32, e: f64) -> Result<f64, HouseholdError> {
    let d = pc_delta(q, m, e)?;
    Ok(beta * d * d)
}

/// Energy removed at level `q` of `m`: `(q / m) * e`.
pub fn pc_delta(q: u32, m: u32, e: f64) -> Result<f64, HouseholdError> {
    check_level(q, m)?;
    Ok(f64::from(q) / f64::from(m) * e)
}

/// Level maximizing `lambda * delta - cost`; ties go to the smaller level.
pub fn pc_best_response(lambda: f64, beta: f64, m: u32, e: f64) -> u32 {
    let mut best = (0, 0.0);
    for q in 1..=m {
        let d = f64::from(q) / f64::from(m) * e;
        let utility = lambda * d - beta * d * d;
        if utility > best.1 {
            best = (q, utility);
        }
    }
    best.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn cost_and_delta_hand_values() {
        assert_eq!(pc_cost(3.5, 0, 4, 2.0).unwrap(), 0.0);
        assert_eq!(pc_cost(3.5, 4, 4, 2.0).unwrap(), 14.0);
        assert_eq!(pc_cost(3.5, 2, 4, 2.0).unwrap(), 3.5);
        assert_eq!(pc_delta(0, 4, 2.0).unwrap(), 0.0);
        assert_eq!(pc_delta(4, 4, 2.0).unwrap(), 2.0);
        assert_eq!(pc_delta(1, 4, 2.0).unwrap(), 0.5);
        assert!(pc_delta(5, 4, 2.0).is_err());
        assert!(pc_cost(1.0, 0, 0, 2.0).is_err());
    }

    #[test]
    fn best_response_edge_cases() {
        assert_eq!(pc_best_response(0.0, 3.5, 4, 2.0), 0);
        assert_eq!(pc_best_response(5.0, 1e-9, 4, 2.0), 4);
        // utilities at lambda 7, beta 3.5, E 2: q=0:0, 1:2.625, 2:3.5, 3:2.625, 4:0
        assert_eq!(pc_best_response(7.0, 3.5, 4, 2.0), 2);
    }

    #[test]
    fn exact_tie_goes_to_lower_level() {
        // lambda = beta * E * (q1 + q2) / m makes levels q1 and q2 tie: here levels 1 and 2 with E = 4, m = 4, beta = 1
        assert_eq!(pc_best_response(3.0, 1.0, 4, 4.0), 1);
    }

    proptest! {
        #[test]
        fn level_is_monotone_in_lambda(beta in 0.01f64..8.0, e in 0.0f64..5.0, m in 1u32..8, l1 in 0.0f64..40.0, dl in 0.0f64..40.0) {
            prop_assert!(pc_best_response(l1, beta, m, e) <= pc_best_response(l1 + dl, beta, m, e));
        }
    }
}
