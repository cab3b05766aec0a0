//! Implicit offsets `a_k`, branch thresholds `β_{n,k}` and the piecewise
//! sharp-constant formulas.
//!
//! Both implicit constants are defined through the chain evaluated at
//! `s = 1`. Writing `D_1 = a`, `D_{i+1} = a + ln D_i` for the level
//! denominators (so `X_i(a,1) = 1/D_i`), `a_k` is the root of `D_{k+1}` and
//! `β_{n,k}` the root of `Σ ln D_i + ln(n-2)`. Every `D_i` is increasing in
//! `a`, which is what makes both roots unique.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::special_fn::{chain_from_ln, sobolev_constant, Dimension};

/// Default absolute tolerance on the implicit roots.
pub const ROOT_TOL: f64 = 1e-13;

/// Bracket for a scalar root search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RootBracket {
    pub lo: f64,
    pub hi: f64,
    pub tol: f64,
}

impl RootBracket {
    pub fn new(lo: f64, hi: f64, tol: f64) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return domain(format!("invalid bracket [{lo}, {hi}]"));
        }
        if !(tol > 0.0) {
            return domain(format!("bracket tolerance must be positive, got {tol}"));
        }
        Ok(Self { lo, hi, tol })
    }

    /// Root of `f` in the bracket by bisection refined with secant steps.
    ///
    /// `f` may return `-inf` below the root (undefined chain levels); those
    /// values only ever trigger bisection.
    pub fn solve(&self, f: impl Fn(f64) -> f64) -> Result<f64> {
        let fail = |reason: String| Error::Solver { lo: self.lo, hi: self.hi, reason };
        let (mut lo, mut hi) = (self.lo, self.hi);
        let (mut f_lo, mut f_hi) = (f(lo), f(hi));
        if f_lo.is_nan() || f_hi.is_nan() {
            return Err(fail("NaN at bracket endpoint".into()));
        }
        if f_lo == 0.0 {
            return Ok(lo);
        }
        if f_hi == 0.0 {
            return Ok(hi);
        }
        if f_lo.signum() == f_hi.signum() {
            return Err(fail(format!("no sign change (f(lo) = {f_lo:e}, f(hi) = {f_hi:e})")));
        }
        self.check_single_sign_change(&f).map_err(fail)?;

        for _ in 0..500 {
            if hi - lo <= self.tol {
                break;
            }
            let mid = 0.5 * (lo + hi);
            let secant = if f_lo.is_finite() && f_hi.is_finite() {
                hi - f_hi * (hi - lo) / (f_hi - f_lo)
            } else {
                f64::NAN
            };
            // Take the secant point only if it lies well inside the bracket.
            let width = hi - lo;
            let x = if secant.is_finite() && secant > lo + 0.01 * width && secant < hi - 0.01 * width {
                secant
            } else {
                mid
            };
            let fx = f(x);
            if fx.is_nan() {
                return Err(fail(format!("NaN at x = {x}")));
            }
            if fx == 0.0 {
                return Ok(x);
            }
            if fx.signum() == f_lo.signum() {
                lo = x;
                f_lo = fx;
            } else {
                hi = x;
                f_hi = fx;
            }
            // A bisection after every secant step keeps the bracket shrinking
            // geometrically even when the secant stalls on one side.
            if x != mid {
                let mid = 0.5 * (lo + hi);
                let fm = f(mid);
                if fm == 0.0 {
                    return Ok(mid);
                }
                if fm.signum() == f_lo.signum() {
                    lo = mid;
                    f_lo = fm;
                } else {
                    hi = mid;
                    f_hi = fm;
                }
            }
        }
        if hi - lo > self.tol {
            return Err(fail(format!("did not converge, final width {:e}", hi - lo)));
        }
        // Return the endpoint with the smaller residual.
        if f_lo.is_finite() && f_lo.abs() < f_hi.abs() {
            Ok(lo)
        } else {
            Ok(hi)
        }
    }

    fn check_single_sign_change(&self, f: &impl Fn(f64) -> f64) -> std::result::Result<(), String> {
        const SAMPLES: usize = 64;
        let mut changes = 0;
        let mut prev = f(self.lo).signum();
        for j in 1..=SAMPLES {
            let x = self.lo + (self.hi - self.lo) * j as f64 / SAMPLES as f64;
            let fx = f(x);
            if fx == 0.0 {
                continue;
            }
            if fx.signum() != prev {
                changes += 1;
                prev = fx.signum();
            }
        }
        if changes > 1 {
            Err(format!("{changes} sign changes detected; root is not unique on the bracket"))
        } else {
            Ok(())
        }
    }
}

/// Level denominators `D_1..D_levels` at `s = 1`, or `None` if some level is
/// undefined.
fn denominators_at_one(a: f64, levels: usize) -> Option<Vec<f64>> {
    chain_from_ln(a, levels, 0.0)
        .ok()
        .map(|xs| xs.iter().map(|x| 1.0 / x).collect())
}

/// `D_{k+1}(a, 1) = a + ln D_k(a, 1)`; `-inf` if an earlier level fails.
fn top_denominator(a: f64, k: usize) -> f64 {
    match denominators_at_one(a, k) {
        Some(d) => a + d[k - 1].ln(),
        None => f64::NEG_INFINITY,
    }
}

/// Minimal offset `a_k`: `X_{k+1}(a_k, 1) = ∞`, equivalently
/// `X_k(a_k, 1) = e^{a_k}`. `a_0 = 0` by convention.
pub fn a_min(k: usize) -> Result<f64> {
    if k == 0 {
        return Ok(0.0);
    }
    RootBracket::new(1e-12, 1.0, ROOT_TOL)?.solve(|a| top_denominator(a, k))
}

/// `ln(∏_{i=1}^{k+1} X_i(a,1)) - ln(n-2)`'s negative, increasing in `a`.
fn product_residual(n: Dimension, k: usize, a: f64) -> f64 {
    match denominators_at_one(a, k + 1) {
        Some(d) => d.iter().map(|x| x.ln()).sum::<f64>() + (n.as_f64() - 2.0).ln(),
        None => f64::NEG_INFINITY,
    }
}

/// Branch threshold `β_{n,k}`: `X_1(β,1) ··· X_{k+1}(β,1) = n - 2`.
pub fn beta(n: Dimension, k: usize) -> Result<f64> {
    if k == 0 {
        return domain("beta requires k >= 1; the k = 0 threshold is 1/(n-2)");
    }
    let lo = a_min(k)?;
    // Just above a_k the product blows up; at a = 1 it equals 1 <= n - 2.
    let bracket = RootBracket::new(lo + 1e-9, 1.0, ROOT_TOL)?;
    bracket.solve(|a| product_residual(n, k, a))
}

/// Threshold separating the two branches: `1/(n-2)` for `k = 0`,
/// `β_{n,k}` otherwise.
pub fn branch_threshold(n: Dimension, k: usize) -> Result<f64> {
    if k == 0 {
        Ok(1.0 / (n.as_f64() - 2.0))
    } else {
        beta(n, k)
    }
}

/// The pair `(a_k, β_{n,k})`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImplicitConstants {
    pub a_k: f64,
    pub beta_nk: f64,
}

impl ImplicitConstants {
    pub fn solve(n: Dimension, k: usize) -> Result<Self> {
        let a_k = a_min(k)?;
        let beta_nk = branch_threshold(n, k)?;
        if !(a_k < beta_nk && beta_nk <= 1.0 + 1e-15) {
            return Err(Error::Numeric(format!(
                "implicit constants out of order: a_k = {a_k}, beta = {beta_nk}"
            )));
        }
        Ok(Self { a_k, beta_nk })
    }
}

/// Product `∏_{i=1}^{k+1} X_i(a, 1)`.
pub fn chain_product_at_one(k: usize, a: f64) -> Result<f64> {
    let chain = chain_from_ln(a, k + 1, 0.0)?;
    Ok(chain.iter().map(|x| x.ln()).sum::<f64>().exp())
}

/// Which formula of the piecewise sharp constant is in force.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    AboveThreshold,
    BelowThreshold,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantResult {
    pub value: f64,
    pub branch: Branch,
    pub threshold: f64,
}

/// Upper-branch value `(n-2)^{-2(n-1)/n} S_n`; also the radial constant.
pub fn upper_branch(n: Dimension) -> f64 {
    (n.as_f64() - 2.0).powf(-n.branch_exponent()) * sobolev_constant(n)
}

/// Lower-branch value `(∏ X_i(a,1))^{-2(n-1)/n} S_n`. For `k = 0` this is
/// `a^{2(n-1)/n} S_n`.
pub fn lower_branch(n: Dimension, k: usize, a: f64) -> Result<f64> {
    let prod = chain_product_at_one(k, a)?;
    Ok(prod.powf(-n.branch_exponent()) * sobolev_constant(n))
}

/// Best constant `C_n(a)` of the single-logarithm inequality.
pub fn best_constant(n: Dimension, a: f64) -> Result<ConstantResult> {
    if !(a > 0.0) || !a.is_finite() {
        return domain(format!("best_constant requires a > 0, got {a}"));
    }
    best_constant_k(n, 0, a)
}

/// Best constant restricted to radial functions.
pub fn best_constant_radial(n: Dimension) -> f64 {
    upper_branch(n)
}

/// Best constant `C_{n,k}(a)` for `a > a_k`; `k = 0` gives `C_n(a)`.
pub fn best_constant_k(n: Dimension, k: usize, a: f64) -> Result<ConstantResult> {
    if !(a > 0.0) || !a.is_finite() {
        return domain(format!("offset a must be finite and positive, got {a}"));
    }
    // Validity gate: the chain must be finite at s = 1.
    chain_from_ln(a, k + 1, 0.0)?;
    let threshold = branch_threshold(n, k)?;
    if a >= threshold {
        Ok(ConstantResult { value: upper_branch(n), branch: Branch::AboveThreshold, threshold })
    } else {
        Ok(ConstantResult { value: lower_branch(n, k, a)?, branch: Branch::BelowThreshold, threshold })
    }
}

/// Best constant of the inequality on `B_ρ` with weight `X_1(a, |x|)`,
/// which by scaling equals `C_n(a - ln ρ)`.
pub fn scaled_constant(n: Dimension, a: f64, rho: f64) -> Result<f64> {
    if !(rho > 0.0 && rho < 1.0) {
        return domain(format!("scaled_constant requires 0 < rho < 1, got {rho}"));
    }
    Ok(best_constant(n, a - rho.ln())?.value)
}
