//! Closed-form constants derived from `(alpha, L0, L1)` and the Young-type
//! inequality used to homogenize exponents.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::pow0;
use crate::types::SmoothnessSpec;

/// Constants of the deterministic equivalent bound
/// `||grad f(w') - grad f(w)|| <= ||w'-w|| (K0 + K1 ||grad f(w)||^a + K2 ||w'-w||^(a/(1-a)))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedDetConstants {
    pub k0: f64,
    pub k1: f64,
    pub k2: f64,
}

/// Constants of the expected (mean-square) counterpart of
/// [`DerivedDetConstants`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedStochConstants {
    pub kbar0: f64,
    pub kbar1: f64,
    pub kbar2: f64,
}

// Above this alpha the exponents 1/(1-alpha) blow up quickly, so products are
// accumulated as sums of logarithms.
const LOG_DOMAIN_ALPHA: f64 = 0.9;

fn require_interior(spec: &SmoothnessSpec, what: &str) -> Result<()> {
    if spec.is_interior() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "{what} is defined only for alpha in (0, 1), got alpha = {}; \
             use the exponential (alpha = 1) bounds or the plain L-smooth path instead",
            spec.alpha
        )))
    }
}

pub fn derive_det_constants(spec: &SmoothnessSpec) -> Result<DerivedDetConstants> {
    require_interior(spec, "K0/K1/K2")?;
    let a = spec.alpha;
    let e = a * a / (1.0 - a);
    if a > LOG_DOMAIN_ALPHA {
        let ln2 = std::f64::consts::LN_2;
        let ln3 = 3f64.ln();
        let k0 = spec.l0 * ((e * ln2).exp() + 1.0);
        let k1 = (spec.l1.ln() + e * ln2 + a * ln3).exp();
        let k2 = (spec.l1.ln() / (1.0 - a) + e * ln2 + a * ln3 + a / (1.0 - a) * (1.0 - a).ln())
            .exp();
        Ok(DerivedDetConstants { k0, k1, k2 })
    } else {
        let two_e = 2f64.powf(e);
        let three_a = 3f64.powf(a);
        Ok(DerivedDetConstants {
            k0: spec.l0 * (two_e + 1.0),
            k1: spec.l1 * two_e * three_a,
            k2: spec.l1.powf(1.0 / (1.0 - a)) * two_e * three_a * (1.0 - a).powf(a / (1.0 - a)),
        })
    }
}

pub fn derive_stoch_constants(spec: &SmoothnessSpec) -> Result<DerivedStochConstants> {
    require_interior(spec, "Kbar0/Kbar1/Kbar2")?;
    let a = spec.alpha;
    let e = (2.0 - a) / (1.0 - a);
    let (scale, kbar2) = if a > LOG_DOMAIN_ALPHA {
        (
            (e * std::f64::consts::LN_2).exp(),
            ((5.0 * spec.l1).ln() / (1.0 - a)).exp(),
        )
    } else {
        (2f64.powf(e), (5.0 * spec.l1).powf(1.0 / (1.0 - a)))
    };
    Ok(DerivedStochConstants {
        kbar0: scale * spec.l0,
        kbar1: scale * spec.l1,
        kbar2,
    })
}

/// Checks `C x^omega <= x^omega' + C^(omega'/Delta)`.
///
/// Valid inputs: `x >= 0`, `C in [0,1]`, `Delta > 0`, `0 <= omega <= omega'`
/// and `Delta >= omega' - omega`. `0^0 = 1`.
pub fn young_bound_holds(x: f64, c: f64, delta: f64, omega: f64, omega_p: f64) -> Result<bool> {
    if !(x >= 0.0) || !(0.0..=1.0).contains(&c) || !(delta > 0.0) {
        return Err(Error::Argument(format!(
            "young bound needs x >= 0, C in [0,1], Delta > 0 (got x={x}, C={c}, Delta={delta})"
        )));
    }
    if !(omega >= 0.0 && omega_p >= omega) {
        return Err(Error::Argument(format!(
            "young bound needs 0 <= omega <= omega' (got {omega}, {omega_p})"
        )));
    }
    if delta < omega_p - omega {
        return Err(Error::Argument(format!(
            "young bound needs Delta >= omega' - omega (got Delta={delta}, gap={})",
            omega_p - omega
        )));
    }
    let lhs = c * pow0(x, omega);
    let rhs = pow0(x, omega_p) + pow0(c, omega_p / delta);
    // Both sides are computed with a couple of roundings each.
    Ok(lhs <= rhs * (1.0 + 4.0 * f64::EPSILON))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn spec(a: f64, l0: f64, l1: f64) -> SmoothnessSpec {
        SmoothnessSpec::new(a, l0, l1).unwrap()
    }

    #[test]
    fn det_constants_two_thirds() {
        // 2^(4/3) + 1, 2^(4/3) 3^(2/3), 2^(4/3) 3^(2/3) / 9
        let k = derive_det_constants(&spec(2.0 / 3.0, 1.0, 1.0)).unwrap();
        assert_abs_diff_eq!(k.k0, 3.519842, epsilon = 1e-6);
        assert_abs_diff_eq!(k.k1, 5.241483, epsilon = 1e-6);
        assert_abs_diff_eq!(k.k2, 0.582387, epsilon = 1e-6);
    }

    #[test]
    fn det_constants_small_alpha_limit() {
        let k = derive_det_constants(&spec(1e-4, 1.0, 1.0)).unwrap();
        assert_abs_diff_eq!(k.k0, 2.0, epsilon = 1e-3);
        assert_abs_diff_eq!(k.k1, 1.0, epsilon = 1e-3);
        assert_abs_diff_eq!(k.k2, 1.0, epsilon = 1e-3);
    }

    #[test]
    fn det_constants_reject_endpoints() {
        assert!(matches!(
            derive_det_constants(&spec(1.0, 1.0, 1.0)),
            Err(Error::Domain(_))
        ));
        assert!(derive_det_constants(&spec(0.0, 1.0, 1.0)).is_err());
    }

    #[test]
    fn log_domain_branch_is_continuous() {
        let below = derive_det_constants(&spec(0.9, 1.3, 0.7)).unwrap();
        let above = derive_det_constants(&spec(0.9 + 1e-12, 1.3, 0.7)).unwrap();
        assert!((below.k0 / above.k0 - 1.0).abs() < 1e-9);
        assert!((below.k1 / above.k1 - 1.0).abs() < 1e-9);
        assert!((below.k2 / above.k2 - 1.0).abs() < 1e-9);
        let sb = derive_stoch_constants(&spec(0.9, 1.3, 0.7)).unwrap();
        let sa = derive_stoch_constants(&spec(0.9 + 1e-12, 1.3, 0.7)).unwrap();
        assert!((sb.kbar2 / sa.kbar2 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn stoch_constants() {
        let k = derive_stoch_constants(&spec(2.0 / 3.0, 1.0, 1.0)).unwrap();
        assert_abs_diff_eq!(k.kbar0, 16.0, epsilon = 1e-11);
        assert_abs_diff_eq!(k.kbar1, 16.0, epsilon = 1e-11);
        assert_abs_diff_eq!(k.kbar2, 125.0, epsilon = 1e-9);
        let k = derive_stoch_constants(&spec(0.5, 2.0, 1.0)).unwrap();
        assert_abs_diff_eq!(k.kbar0, 16.0, epsilon = 1e-12);
        assert_abs_diff_eq!(k.kbar1, 8.0, epsilon = 1e-12);
        assert_abs_diff_eq!(k.kbar2, 25.0, epsilon = 1e-12);
        assert!(derive_stoch_constants(&spec(1.0, 1.0, 1.0)).is_err());
    }

    #[test]
    fn constants_are_pure() {
        let s = spec(0.37, 0.2, 3.1);
        assert_eq!(derive_det_constants(&s).unwrap(), derive_det_constants(&s).unwrap());
        assert_eq!(
            derive_stoch_constants(&s).unwrap(),
            derive_stoch_constants(&s).unwrap()
        );
    }

    #[test]
    fn young_examples() {
        assert!(young_bound_holds(0.0, 0.5, 1.0, 0.0, 1.0).unwrap());
        // 0.6 <= 2^1.5 + 0.3^3
        assert!(young_bound_holds(2.0, 0.3, 0.5, 1.0, 1.5).unwrap());
        assert!(young_bound_holds(1.0, 1.0, 1.0, 1.0, 1.0).unwrap());
    }

    #[test]
    fn young_rejects_bad_preconditions() {
        assert!(young_bound_holds(1.0, 0.5, 0.1, 0.0, 1.0).is_err());
        assert!(young_bound_holds(1.0, 1.5, 1.0, 0.0, 1.0).is_err());
        assert!(young_bound_holds(-1.0, 0.5, 1.0, 0.0, 1.0).is_err());
        assert!(young_bound_holds(1.0, 0.5, 1.0, 1.0, 0.5).is_err());
    }
}
