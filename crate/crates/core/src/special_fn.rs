//! Closed-form special functions: the Gamma function, the Sobolev constant,
//! sphere areas and the iterated-logarithm chain
//!
//! ```text
//! X_1(a, s) = 1 / (a - ln s),    X_{i+1}(a, s) = X_1(a, X_i(a, s)),
//! ```
//!
//! together with its inverse chain `f_i` and the composite weights that
//! appear in the logarithmically improved Hardy-Sobolev inequalities.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Space dimension `n >= 3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct Dimension(u32);

impl Dimension {
    pub fn new(n: u32) -> Result<Self> {
        if n < 3 {
            return domain(format!("dimension must be at least 3, got {n}"));
        }
        Ok(Self(n))
    }

    pub fn get(self) -> u32 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        f64::from(self.0)
    }

    /// Critical Sobolev exponent `2n/(n-2)`.
    pub fn critical_exponent(self) -> f64 {
        let n = self.as_f64();
        2.0 * n / (n - 2.0)
    }

    /// Exponent `2(n-1)/(n-2)` carried by the logarithmic weight.
    pub fn weight_exponent(self) -> f64 {
        let n = self.as_f64();
        2.0 * (n - 1.0) / (n - 2.0)
    }

    /// Exponent `2(n-1)/n` appearing in the sharp-constant formulas.
    pub fn branch_exponent(self) -> f64 {
        let n = self.as_f64();
        2.0 * (n - 1.0) / n
    }

    /// Outer exponent `(n-2)/n` of the weighted critical norm.
    pub fn norm_exponent(self) -> f64 {
        let n = self.as_f64();
        (n - 2.0) / n
    }

    /// Hardy constant `((n-2)/2)^2`.
    pub fn hardy_constant(self) -> f64 {
        let h = (self.as_f64() - 2.0) / 2.0;
        h * h
    }
}

impl TryFrom<u32> for Dimension {
    type Error = Error;

    fn try_from(n: u32) -> Result<Self> {
        Self::new(n)
    }
}

impl From<Dimension> for u32 {
    fn from(d: Dimension) -> u32 {
        d.0
    }
}

impl std::fmt::Display for Dimension {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// `ln Γ(x)` for `x > 0`.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return domain(format!("log_gamma requires a finite positive argument, got {x}"));
    }
    Ok(statrs::function::gamma::ln_gamma(x))
}

/// Best constant of the Sobolev inequality on `R^n`,
/// `S_n = π n (n-2) (Γ(n/2)/Γ(n))^{2/n}`.
pub fn sobolev_constant(n: Dimension) -> f64 {
    let nf = n.as_f64();
    let ratio = statrs::function::gamma::ln_gamma(nf / 2.0) - statrs::function::gamma::ln_gamma(nf);
    PI * nf * (nf - 2.0) * (2.0 * ratio / nf).exp()
}

/// Surface area `2π^{n/2}/Γ(n/2)` of the unit sphere `S^{n-1} ⊂ R^n`.
pub fn sphere_area(n: u32) -> Result<f64> {
    if n < 2 {
        return domain(format!("sphere_area requires n >= 2, got {n}"));
    }
    let h = f64::from(n) / 2.0;
    Ok(2.0 * (h * PI.ln() - statrs::function::gamma::ln_gamma(h)).exp())
}

/// `X_1(a, s) = (a - ln s)^{-1}` for `a > 0`, `0 < s <= 1`.
pub fn x1(a: f64, s: f64) -> Result<f64> {
    if !(a > 0.0) || !a.is_finite() {
        return domain(format!("X_1 requires a > 0, got a = {a}"));
    }
    if !(s > 0.0 && s <= 1.0) {
        return domain(format!("X_1 requires 0 < s <= 1, got s = {s}"));
    }
    Ok(1.0 / (a - s.ln()))
}

/// Parameters `(n, k, a)` of the weight family: `k` extra logarithmic
/// levels on top of `X_1` with offset `a`.
///
/// Construction evaluates the chain at `s = 1`. Each `X_i(a, ·)` is
/// increasing, so the level denominators are smallest there and a single
/// check covers the whole of `(0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XChainParams {
    pub n: Dimension,
    pub k: usize,
    pub a: f64,
}

impl XChainParams {
    pub fn new(n: Dimension, k: usize, a: f64) -> Result<Self> {
        if !(a > 0.0) || !a.is_finite() {
            return domain(format!("offset a must be finite and positive, got {a}"));
        }
        chain_from_ln(a, k + 1, 0.0)?;
        Ok(Self { n, k, a })
    }

    /// Number of chain levels `k + 1`.
    pub fn levels(&self) -> usize {
        self.k + 1
    }
}

/// Evaluate `levels` chain entries starting from `ln s`.
///
/// Only the first level touches `s`, and it does so through `ln s`, so
/// arguments far below the smallest positive double remain usable. Deeper
/// levels follow the recursion literally; intermediate arguments may exceed
/// one when `a < 1`.
pub(crate) fn chain_from_ln(a: f64, levels: usize, ln_s: f64) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(levels);
    let mut denominator = a - ln_s;
    for level in 1..=levels {
        if !(denominator > 0.0) || !denominator.is_finite() {
            return Err(Error::ChainUndefined { level, a, denominator });
        }
        let x = 1.0 / denominator;
        out.push(x);
        denominator = a - x.ln();
    }
    Ok(out)
}

/// `[X_1(a,s), ..., X_{k+1}(a,s)]`.
pub fn x_chain(p: &XChainParams, s: f64) -> Result<Vec<f64>> {
    if !(s > 0.0 && s <= 1.0) {
        return domain(format!("chain argument must lie in (0, 1], got {s}"));
    }
    chain_from_ln(p.a, p.levels(), s.ln())
}

/// Chain evaluated from `ln s <= 0`; usable when `s` itself underflows.
pub fn x_chain_ln(p: &XChainParams, ln_s: f64) -> Result<Vec<f64>> {
    if !(ln_s <= 0.0) {
        return domain(format!("ln s must be <= 0, got {ln_s}"));
    }
    chain_from_ln(p.a, p.levels(), ln_s)
}

/// `ln f_i(a, t)`, where `f_1(t) = e^{a - 1/t}` inverts `X_1(a, ·)` and
/// `f_{i+1} = f_1 ∘ f_i`.
pub fn f_inverse_ln(a: f64, i: usize, t: f64) -> Result<f64> {
    if i == 0 {
        return domain("inverse chain index must be at least 1");
    }
    if !(a > 0.0) || !a.is_finite() {
        return domain(format!("offset a must be finite and positive, got {a}"));
    }
    if !(t > 0.0) || !t.is_finite() {
        return domain(format!("f_{i} requires t > 0, got {t}"));
    }
    let top = chain_from_ln(a, i, 0.0)?[i - 1];
    // X_i(a,1) itself is the closure point of the range.
    if t > top * (1.0 + 4.0 * f64::EPSILON) {
        return domain(format!(
            "t = {t} lies outside the range (0, {top}] of X_{i}(a = {a}, ·)"
        ));
    }
    let mut ln_f = a - 1.0 / t;
    for _ in 1..i {
        ln_f = a - (-ln_f).exp();
    }
    Ok(ln_f.min(0.0))
}

/// `f_i(a, t)`, the inverse of `X_i(a, ·)` on `(0, 1]`.
pub fn f_inverse(a: f64, i: usize, t: f64) -> Result<f64> {
    Ok(f_inverse_ln(a, i, t)?.exp())
}

/// `(X_1 ··· X_{k+1})^{2(n-1)/(n-2)}` at `r`.
pub fn weight_rhs(p: &XChainParams, r: f64) -> Result<f64> {
    let chain = x_chain(p, r)?;
    Ok(product_weight(p.n, &chain))
}

pub(crate) fn product_weight(n: Dimension, chain: &[f64]) -> f64 {
    let log_prod: f64 = chain.iter().map(|x| x.ln()).sum();
    (n.weight_exponent() * log_prod).exp()
}

/// `(1/4) Σ_{i=1}^{k} (X_1 ··· X_i)^2 / r^2`; zero when `k = 0`.
pub fn hardy_series_weight(p: &XChainParams, r: f64) -> Result<f64> {
    let chain = x_chain(p, r)?;
    Ok(series_weight(p.k, &chain) / (r * r))
}

/// `(1/4) Σ_{i=1}^{k} (X_1 ··· X_i)^2`, without the `r^{-2}` factor.
pub(crate) fn series_weight(k: usize, chain: &[f64]) -> f64 {
    let mut prod = 1.0;
    let mut sum = 0.0;
    for x in chain.iter().take(k) {
        prod *= x;
        sum += prod * prod;
    }
    0.25 * sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn dim(n: u32) -> Dimension {
        Dimension::new(n).unwrap()
    }

    /// ln((m-1)!) by direct summation.
    fn ln_factorial_oracle(m: u32) -> f64 {
        (1..m).map(|j| f64::from(j).ln()).sum()
    }

    /// ln Γ(m + 1/2) = ln((2m)! √π / (4^m m!)).
    fn ln_gamma_half_oracle(m: u32) -> f64 {
        let ln_2m_fact: f64 = (1..=2 * m).map(|j| f64::from(j).ln()).sum();
        let ln_m_fact: f64 = (1..=m).map(|j| f64::from(j).ln()).sum();
        ln_2m_fact + 0.5 * PI.ln() - f64::from(m) * 4f64.ln() - ln_m_fact
    }

    #[test]
    fn log_gamma_examples() {
        assert!(log_gamma(1.0).unwrap().abs() < 1e-15);
        assert_relative_eq!(log_gamma(0.5).unwrap(), 0.5723649429247001, max_relative = 1e-13);
        assert_relative_eq!(log_gamma(5.0).unwrap(), 24f64.ln(), max_relative = 1e-13);
        assert_relative_eq!(log_gamma(5.0).unwrap(), 3.1780538303479458, max_relative = 1e-13);
    }

    #[test]
    fn log_gamma_matches_factorial_oracles_on_working_range() {
        for m in 3..=200 {
            let exact = ln_factorial_oracle(m);
            assert_relative_eq!(log_gamma(f64::from(m)).unwrap(), exact, max_relative = 1e-13);
        }
        for m in 1..=150 {
            let x = f64::from(m) + 0.5;
            assert_relative_eq!(log_gamma(x).unwrap(), ln_gamma_half_oracle(m), max_relative = 1e-13);
        }
    }

    #[test]
    fn log_gamma_rejects_non_positive() {
        assert!(matches!(log_gamma(0.0), Err(Error::Domain(_))));
        assert!(matches!(log_gamma(-2.5), Err(Error::Domain(_))));
        assert!(log_gamma(f64::NAN).is_err());
    }

    #[test]
    fn sobolev_constant_examples() {
        let s3_closed = 3.0 * (PI / 2.0).powf(4.0 / 3.0);
        assert_relative_eq!(sobolev_constant(dim(3)), s3_closed, max_relative = 1e-12);
        assert_relative_eq!(sobolev_constant(dim(3)), 5.4779, max_relative = 1e-4);
        // Γ(2) = 1, Γ(4) = 6: S_4 = 8π (1/6)^{1/2}.
        assert_relative_eq!(sobolev_constant(dim(4)), 8.0 * PI / 6f64.sqrt(), max_relative = 1e-13);
        assert_relative_eq!(sobolev_constant(dim(4)), 10.2604, max_relative = 1e-5);
        assert!(Dimension::new(2).is_err());
    }

    #[test]
    fn sphere_area_examples() {
        assert_relative_eq!(sphere_area(2).unwrap(), 2.0 * PI, max_relative = 1e-14);
        assert_relative_eq!(sphere_area(3).unwrap(), 4.0 * PI, max_relative = 1e-14);
        assert_relative_eq!(sphere_area(4).unwrap(), 2.0 * PI * PI, max_relative = 1e-14);
        assert!(sphere_area(1).is_err());
    }

    #[test]
    fn x1_examples_and_domain() {
        assert_eq!(x1(1.0, 1.0).unwrap(), 1.0);
        assert_relative_eq!(x1(2.0, (-1f64).exp()).unwrap(), 1.0 / 3.0, max_relative = 1e-15);
        assert_relative_eq!(x1(0.5, 0.1).unwrap(), 1.0 / (0.5 + 10f64.ln()), max_relative = 1e-15);
        assert_relative_eq!(x1(0.5, 0.1).unwrap(), 0.356813, max_relative = 2e-6);
        assert!(x1(1.0, 0.0).is_err());
        assert!(x1(1.0, 1.5).is_err());
        assert!(x1(0.0, 0.5).is_err());
    }

    #[test]
    fn chain_examples() {
        let p = XChainParams::new(dim(3), 1, 1.0).unwrap();
        assert_eq!(x_chain(&p, 1.0).unwrap(), vec![1.0, 1.0]);
        let c = x_chain(&p, (-1f64).exp()).unwrap();
        assert_relative_eq!(c[0], 0.5, max_relative = 1e-15);
        assert_relative_eq!(c[1], 1.0 / (1.0 - 0.5f64.ln()), max_relative = 1e-15);
        assert_relative_eq!(c[1], 0.590616, max_relative = 1e-6);
        let p0 = XChainParams::new(dim(3), 0, 2.0).unwrap();
        assert_eq!(x_chain(&p0, 1.0).unwrap(), vec![0.5]);
    }

    #[test]
    fn chain_validity_gate_names_level() {
        // a_1 ≈ 0.5671: a = 0.5 leaves X_2 undefined at s = 1.
        match XChainParams::new(dim(3), 1, 0.5) {
            Err(Error::ChainUndefined { level, .. }) => assert_eq!(level, 2),
            other => panic!("expected chain error, got {other:?}"),
        }
    }

    #[test]
    fn chain_survives_underflowing_arguments() {
        let p = XChainParams::new(dim(4), 2, 1.0).unwrap();
        let c = x_chain_ln(&p, -1.0e5).unwrap();
        assert!(c.iter().all(|x| x.is_finite() && *x > 0.0));
        assert_relative_eq!(c[0], 1.0 / (1.0 + 1.0e5), max_relative = 1e-15);
    }

    #[test]
    fn f_inverse_examples() {
        assert_relative_eq!(f_inverse(1.0, 1, 1.0).unwrap(), 1.0, max_relative = 1e-15);
        assert_relative_eq!(f_inverse(2.0, 1, 0.5).unwrap(), 1.0, max_relative = 1e-15);
        assert!(f_inverse(2.0, 1, 0.6).is_err());
        let t = 1.0 / (1.0 - 0.5f64.ln());
        assert_relative_eq!(f_inverse(1.0, 2, t).unwrap(), (-1f64).exp(), max_relative = 1e-12);
        assert_relative_eq!(f_inverse(1.0, 2, 0.590616).unwrap(), 0.367879, max_relative = 1e-5);
        assert!(f_inverse(1.0, 1, -0.1).is_err());
    }

    #[test]
    fn weight_examples() {
        let p = XChainParams::new(dim(3), 0, 1.0).unwrap();
        assert_eq!(weight_rhs(&p, 1.0).unwrap(), 1.0);
        let p = XChainParams::new(dim(4), 0, 1.0).unwrap();
        assert_eq!(weight_rhs(&p, 1.0).unwrap(), 1.0);
        let p = XChainParams::new(dim(3), 0, 2.0).unwrap();
        assert_relative_eq!(weight_rhs(&p, (-1f64).exp()).unwrap(), (1.0f64 / 3.0).powi(4), max_relative = 1e-14);
        assert_relative_eq!(weight_rhs(&p, (-1f64).exp()).unwrap(), 0.012346, max_relative = 1e-4);
    }

    #[test]
    fn series_weight_examples() {
        let p = XChainParams::new(dim(3), 0, 0.7).unwrap();
        assert_eq!(hardy_series_weight(&p, 0.5).unwrap(), 0.0);
        let p = XChainParams::new(dim(3), 1, 1.0).unwrap();
        assert_relative_eq!(hardy_series_weight(&p, 1.0 - 1e-12).unwrap(), 0.25, max_relative = 1e-10);
        let p = XChainParams::new(dim(3), 1, 2.0).unwrap();
        let e = 1f64.exp();
        assert_relative_eq!(
            hardy_series_weight(&p, 1.0 / e).unwrap(),
            0.25 * (1.0f64 / 3.0).powi(2) * e * e,
            max_relative = 1e-14
        );
        assert_relative_eq!(hardy_series_weight(&p, 1.0 / e).unwrap(), 0.205252, max_relative = 3e-6);
    }

    #[test]
    fn derivative_identity_against_central_differences() {
        let h = 1e-6;
        for &a in &[0.3, 1.0, 2.5] {
            for &r in &[0.05, 0.3, 0.7, 0.95] {
                let fd = (x1(a, r + h).unwrap() - x1(a, r - h).unwrap()) / (2.0 * h);
                let x = x1(a, r).unwrap();
                assert_relative_eq!(fd, x * x / r, max_relative = 1e-6);
            }
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(1000))]

            #[test]
            fn chain_monotone_in_s_and_a(a in 0.6f64..4.0, k in 0usize..4, s1 in 1e-6f64..1.0, s2 in 1e-6f64..1.0, da in 1e-3f64..1.0) {
                prop_assume!((s1 - s2).abs() > 1e-9);
                let p = XChainParams::new(dim(3), k, a);
                prop_assume!(p.is_ok());
                let p = p.unwrap();
                let (lo, hi) = if s1 < s2 { (s1, s2) } else { (s2, s1) };
                let c_lo = x_chain(&p, lo).unwrap();
                let c_hi = x_chain(&p, hi).unwrap();
                for i in 0..p.levels() {
                    prop_assert!(c_lo[i] < c_hi[i]);
                }
                let q = XChainParams::new(dim(3), k, a + da).unwrap();
                let c_q = x_chain(&q, lo).unwrap();
                for i in 0..p.levels() {
                    prop_assert!(c_q[i] < c_lo[i]);
                }
            }

            #[test]
            fn recursion_consistency(a in 0.6f64..4.0, k in 1usize..5, s in 1e-8f64..1.0) {
                let p = XChainParams::new(dim(4), k, a);
                prop_assume!(p.is_ok());
                let c = x_chain(&p.unwrap(), s).unwrap();
                for i in 1..c.len() {
                    prop_assert_eq!(c[i], 1.0 / (a - c[i - 1].ln()));
                }
            }

            #[test]
            fn inverse_round_trip(a in 0.6f64..4.0, k in 0usize..4, ln_s in -40.0f64..0.0) {
                let p = XChainParams::new(dim(3), k, a);
                prop_assume!(p.is_ok());
                let p = p.unwrap();
                let s = ln_s.exp();
                let c = x_chain(&p, s).unwrap();
                for (i, t) in c.iter().enumerate() {
                    let back = f_inverse(a, i + 1, *t).unwrap();
                    prop_assert!(((back - s) / s).abs() < 1e-10, "level {} got {} want {}", i + 1, back, s);
                }
            }
        }
    }
}
