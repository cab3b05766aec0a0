use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::special_fn::{sobolev_constant, Dimension};

/// Lower-branch certificate from the weighted Sobolev inequality with
/// exponent `b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CknBound {
    /// `b = (1/a - (n-2))/2`.
    pub b: f64,
    /// `(n-2+2b)^{-2(n-1)/n} S_n`, equal to `a^{2(n-1)/n} S_n`.
    pub bound: f64,
    /// `(n-2+2b) a - 1`; the angular coefficient `1/((n-2+2b)^2 t^2)` is
    /// at most one for `t ≥ a` exactly when this is `≥ 0`, with equality at `t = a`.
    pub equality_residual: f64,
}

/// For `0 < a < 1/(n-2)`, pick `b > 0` with `(n-2+2b) a = 1` and return the
/// bound it certifies.
pub fn ckn_branch_bound(n: Dimension, a: f64) -> Result<CknBound> {
    let m = n.as_f64() - 2.0;
    if !(a > 0.0 && a < 1.0 / m) {
        return domain(format!("the lower branch needs 0 < a < 1/(n-2) = {}, got {a}", 1.0 / m));
    }
    let b = (1.0 / a - m) / 2.0;
    let c = m + 2.0 * b;
    Ok(CknBound {
        b,
        bound: c.powf(-n.branch_exponent()) * sobolev_constant(n),
        equality_residual: c * a - 1.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{best_constant, upper_branch};
    use approx::assert_relative_eq;

    #[test]
    fn n4_example() {
        let n = Dimension::new(4).unwrap();
        let r = ckn_branch_bound(n, 0.3).unwrap();
        assert_relative_eq!(r.b, 2.0 / 3.0, max_relative = 1e-14);
        assert_relative_eq!(r.bound, 0.3f64.powf(1.5) * sobolev_constant(n), max_relative = 1e-12);
        assert!((r.bound - 1.6860).abs() < 1e-4);
        assert!(r.equality_residual.abs() < 1e-14);
        assert_relative_eq!(r.bound, best_constant(n, 0.3).unwrap().value, max_relative = 1e-12);
    }

    #[test]
    fn approaches_upper_branch_at_threshold() {
        for n in 3..=8 {
            let d = Dimension::new(n).unwrap();
            let a = 1.0 / (f64::from(n) - 2.0) * (1.0 - 1e-9);
            let r = ckn_branch_bound(d, a).unwrap();
            assert!(r.b > 0.0 && r.b < 1e-7);
            assert_relative_eq!(r.bound, upper_branch(d), max_relative = 1e-8);
        }
    }

    #[test]
    fn rejects_upper_branch_offsets() {
        let n = Dimension::new(3).unwrap();
        assert!(ckn_branch_bound(n, 1.0).is_err());
        assert!(ckn_branch_bound(n, 0.0).is_err());
    }
}
