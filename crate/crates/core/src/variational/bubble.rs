//! Truncated Aubin-Talenti bubbles `(ε + ρ^2)^{-(n-2)/2} φ_δ(ρ)` centred at a
//! point `x₀` of the unit ball, and their Rayleigh quotients.

use std::num::NonZeroUsize;
use std::sync::Arc;

use gauss_quad::legendre::GaussLegendre;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::radial::{Boundary, Frame, RadialGrid, RadialProfile};
use crate::special_fn::{sobolev_constant, sphere_area, x1, Dimension};

/// Smallest concentration scale accepted; the peak `ε^{-(n-2)/2}` must stay
/// well inside double range.
pub const EPS_FLOOR: f64 = 1e-12;

/// Gauss points per radial panel.
const RADIAL_POINTS: usize = 24;
/// Gauss points for the polar angle.
const ANGULAR_POINTS: usize = 256;
/// Panels covering the cutoff transition `[δ/2, δ]`.
const CUTOFF_PANELS: usize = 8;

fn glue(x: f64) -> f64 {
    if x > 0.0 {
        (-1.0 / x).exp()
    } else {
        0.0
    }
}

/// Smooth cutoff equal to one on `[0, δ/2]` and zero on `[δ, ∞)`, glued by
/// `g(1-t) / (g(1-t) + g(t))` with `g(x) = e^{-1/x}` and `t = 2s/δ - 1`.
pub fn cutoff(delta: f64, s: f64) -> f64 {
    let t = 2.0 * s / delta - 1.0;
    if t <= 0.0 {
        return 1.0;
    }
    if t >= 1.0 {
        return 0.0;
    }
    let (a, b) = (glue(1.0 - t), glue(t));
    a / (a + b)
}

/// `d/ds` of [`cutoff`].
pub fn cutoff_slope(delta: f64, s: f64) -> f64 {
    let t = 2.0 * s / delta - 1.0;
    if t <= 0.0 || t >= 1.0 {
        return 0.0;
    }
    let (a, b) = (glue(1.0 - t), glue(t));
    let sum = a + b;
    -a * b * ((1.0 - t).powi(-2) + t.powi(-2)) / (sum * sum) * 2.0 / delta
}

/// Parameters of a concentrating bubble.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BubbleParams {
    pub epsilon: f64,
    pub delta: f64,
    /// `|x₀|`.
    pub center_norm: f64,
    pub n: Dimension,
    pub a: f64,
}

impl BubbleParams {
    pub fn new(n: Dimension, a: f64, center_norm: f64, delta: f64, epsilon: f64) -> Result<Self> {
        if !(delta > 0.0) || !delta.is_finite() {
            return domain(format!("cutoff radius must be positive, got {delta}"));
        }
        if !(0.0..1.0).contains(&center_norm) {
            return domain(format!("|x0| must lie in [0, 1), got {center_norm}"));
        }
        if center_norm + delta >= 1.0 {
            return domain(format!(
                "support |x0| + delta = {} must stay inside the unit ball",
                center_norm + delta
            ));
        }
        if !(a > 0.0) || !a.is_finite() {
            return domain(format!("offset a must be positive, got {a}"));
        }
        let p = Self { epsilon: 1.0, delta, center_norm, n, a };
        p.with_epsilon(epsilon)
    }

    /// Same bubble at another concentration scale.
    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        if !(epsilon >= EPS_FLOOR) || !epsilon.is_finite() {
            return domain(format!("epsilon must be finite and at least {EPS_FLOOR:e}, got {epsilon}"));
        }
        Ok(Self { epsilon, ..*self })
    }

    /// Whether `ε ≤ δ²/100`, the regime where the sweep asymptotics apply.
    pub fn is_concentrated(&self) -> bool {
        self.epsilon <= 1e-2 * self.delta * self.delta
    }

    fn half_exponent(&self) -> f64 {
        (self.n.as_f64() - 2.0) / 2.0
    }

    /// `U(ρ)`.
    pub fn value(&self, rho: f64) -> f64 {
        (self.epsilon + rho * rho).powf(-self.half_exponent()) * cutoff(self.delta, rho)
    }

    /// `U'(ρ)`.
    pub fn slope(&self, rho: f64) -> f64 {
        let m = self.half_exponent();
        let base = self.epsilon + rho * rho;
        -2.0 * m * rho * base.powf(-m - 1.0) * cutoff(self.delta, rho)
            + base.powf(-m) * cutoff_slope(self.delta, rho)
    }
}

/// Samples of the bubble on a ball frame centred at `x₀`.
pub fn bubble_profile(p: &BubbleParams, grid: Arc<RadialGrid>) -> Result<RadialProfile> {
    let Frame::RBall { radius, .. } = grid.frame() else {
        return Err(Error::FrameMismatch { expected: "r_ball about x0".into(), found: grid.frame().kind().to_string() });
    };
    if radius < p.delta {
        return domain(format!("grid radius {radius} does not cover the support radius {}", p.delta));
    }
    let values = grid.nodes().iter().map(|&rho| p.value(rho)).collect();
    RadialProfile::new(grid, values, Boundary::Free, Boundary::DirichletZero)
}

fn gauss(points: usize) -> GaussLegendre {
    GaussLegendre::new(NonZeroUsize::new(points).expect("nonzero rule size"))
}

/// Radial nodes and weights on `(0, δ)`: dyadic panels from `√ε/16` out to
/// `δ/2`, then equal panels over the cutoff transition.
fn radial_rule(p: &BubbleParams) -> Vec<(f64, f64)> {
    let mut breaks = vec![0.0];
    let half = 0.5 * p.delta;
    let mut x = p.epsilon.sqrt() / 16.0;
    while x < half {
        breaks.push(x);
        x *= 2.0;
    }
    breaks.push(half);
    for i in 1..=CUTOFF_PANELS {
        breaks.push(half + half * i as f64 / CUTOFF_PANELS as f64);
    }
    let rule = gauss(RADIAL_POINTS);
    let mut out = Vec::with_capacity((breaks.len() - 1) * RADIAL_POINTS);
    for w in breaks.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let half_width = 0.5 * (hi - lo);
        for &(node, weight) in rule.as_node_weight_pairs() {
            out.push((lo + half_width * (node + 1.0), half_width * weight));
        }
    }
    out
}

/// Kinetic and potential integrals `∫ |∇U|^2` and `∫ |U|^{2n/(n-2)}` over
/// `B_δ(x₀)`, for a bubble multiplied by `amplitude`.
fn plain_integrals(p: &BubbleParams, amplitude: f64) -> Result<(f64, f64)> {
    let n = p.n;
    let q = n.critical_exponent();
    let m = n.as_f64() - 1.0;
    let mut kinetic = 0.0;
    let mut potential = 0.0;
    for (rho, w) in radial_rule(p) {
        let jac = w * rho.powf(m);
        kinetic += jac * (amplitude * p.slope(rho)).powi(2);
        potential += jac * (amplitude * p.value(rho)).abs().powf(q);
    }
    let omega = sphere_area(n.get())?;
    let (kinetic, potential) = (omega * kinetic, omega * potential);
    if !kinetic.is_finite() || !potential.is_finite() {
        return Err(Error::Numeric(format!("bubble integrals overflow at epsilon = {}", p.epsilon)));
    }
    Ok((kinetic, potential))
}

fn ratio(n: Dimension, kinetic: f64, potential: f64) -> Result<f64> {
    if !(potential > 0.0) {
        return Err(Error::Degenerate("bubble has vanishing L^q norm".into()));
    }
    Ok(kinetic / potential.powf(n.norm_exponent()))
}

/// Plain Sobolev quotient `∫|∇U|^2 / (∫|U|^{2n/(n-2)})^{(n-2)/n}` of the bubble.
pub fn sobolev_quotient_bubble(p: &BubbleParams) -> Result<f64> {
    let (k, v) = plain_integrals(p, 1.0)?;
    ratio(p.n, k, v)
}

/// The weighted quotient of an off-centre bubble and the bounds obtained by
/// freezing its weights at `|x₀| ± δ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedBubble {
    pub quotient: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
    /// `X_1^{-2(n-1)/n}(a, |x₀|) S_n`, the value the quotient tends to as
    /// `ε → 0` and then `δ → 0`.
    pub pointwise_limit: f64,
}

/// `s^{-n} X_1^{2(n-1)/(n-2)}(a, s)`.
fn denominator_weight(n: Dimension, a: f64, s: f64) -> f64 {
    s.powf(-n.as_f64()) * (a - s.ln()).powf(-n.weight_exponent())
}

/// Extremes of [`denominator_weight`] on `[lo, hi]`. Its logarithmic
/// derivative is `(p X_1 - n)/s`, so the only interior critical point is at
/// `X_1 = n/p`.
fn weight_range(n: Dimension, a: f64, lo: f64, hi: f64) -> (f64, f64) {
    let mut values = vec![denominator_weight(n, a, lo), denominator_weight(n, a, hi)];
    let critical = (a - n.weight_exponent() / n.as_f64()).exp();
    if critical > lo && critical < hi {
        values.push(denominator_weight(n, a, critical));
    }
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = values.iter().cloned().fold(0.0, f64::max);
    (min, max)
}

fn weighted_parts(p: &BubbleParams, amplitude: f64) -> Result<(f64, f64)> {
    let n = p.n;
    let c = p.center_norm;
    let q = n.critical_exponent();
    let m = n.as_f64() - 1.0;
    let polar = gauss(ANGULAR_POINTS);
    let angles: Vec<(f64, f64)> = polar
        .as_node_weight_pairs()
        .iter()
        .map(|&(x, w)| {
            let theta = 0.5 * std::f64::consts::PI * (x + 1.0);
            let sin = theta.sin();
            (theta.cos(), 0.5 * std::f64::consts::PI * w * sin.powf(n.as_f64() - 2.0))
        })
        .collect();
    let ring = sphere_area(n.get() - 1)?;
    let mut kinetic = 0.0;
    let mut potential = 0.0;
    for (rho, w) in radial_rule(p) {
        let u = amplitude * p.value(rho);
        let du = amplitude * p.slope(rho);
        let mut num_mean = 0.0;
        let mut den_mean = 0.0;
        for &(cos, aw) in &angles {
            let s = (c * c + rho * rho + 2.0 * rho * c * cos).max(0.0).sqrt();
            num_mean += aw * s.powf(2.0 - n.as_f64());
            den_mean += aw * denominator_weight(n, p.a, s);
        }
        let jac = w * rho.powf(m) * ring;
        kinetic += jac * num_mean * du * du;
        potential += jac * den_mean * u.abs().powf(q);
    }
    if !kinetic.is_finite() || !potential.is_finite() {
        return Err(Error::Numeric(format!("weighted bubble integrals overflow at epsilon = {}", p.epsilon)));
    }
    Ok((kinetic, potential))
}

/// Quotient `∫ |x|^{-(n-2)} |∇U|^2 / (∫ |x|^{-n} X_1^{2(n-1)/(n-2)}(a,|x|) |U|^{2n/(n-2)})^{(n-2)/n}`
/// by tensor quadrature in the distance `ρ` to `x₀` and the polar angle,
/// using `|x|^2 = |x₀|^2 + ρ^2 + 2ρ|x₀| cos θ`.
pub fn weighted_quotient_bubble(p: &BubbleParams) -> Result<WeightedBubble> {
    let c = p.center_norm;
    if !(c > p.delta) {
        return domain(format!("the weighted bubble needs |x0| = {c} > delta = {}", p.delta));
    }
    let n = p.n;
    let (kinetic, potential) = weighted_parts(p, 1.0)?;
    let quotient = ratio(n, kinetic, potential)?;
    let (plain_k, plain_v) = plain_integrals(p, 1.0)?;
    let (lo, hi) = (c - p.delta, c + p.delta);
    let (w_min, w_max) = weight_range(n, p.a, lo, hi);
    let e = n.as_f64() - 2.0;
    let lower_bound = hi.powf(-e) * plain_k / (w_max * plain_v).powf(n.norm_exponent());
    let upper_bound = lo.powf(-e) * plain_k / (w_min * plain_v).powf(n.norm_exponent());
    let pointwise_limit = x1(p.a, c)?.powf(-n.branch_exponent()) * sobolev_constant(n);
    Ok(WeightedBubble { quotient, lower_bound, upper_bound, pointwise_limit })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::make_grid;
    use approx::assert_relative_eq;

    fn dim(n: u32) -> Dimension {
        Dimension::new(n).unwrap()
    }

    #[test]
    fn cutoff_shape() {
        let d = 0.2;
        assert_eq!(cutoff(d, d / 4.0), 1.0);
        assert_eq!(cutoff(d, 2.0 * d), 0.0);
        let mid = cutoff(d, 0.75 * d);
        assert!(mid > 0.0 && mid < 1.0);
        let mut prev = 1.0;
        for i in 0..=200 {
            let s = d * (0.5 + 0.5 * i as f64 / 200.0);
            let v = cutoff(d, s);
            assert!(v <= prev);
            prev = v;
        }
    }

    #[test]
    fn cutoff_slope_matches_differences() {
        let d = 0.3;
        for s in [0.16, 0.2, 0.225, 0.27, 0.29] {
            let h = 1e-6;
            let fd = (cutoff(d, s + h) - cutoff(d, s - h)) / (2.0 * h);
            assert!((cutoff_slope(d, s) - fd).abs() < 1e-6, "s = {s}");
        }
    }

    #[test]
    fn params_validation() {
        assert!(BubbleParams::new(dim(3), 1.0, 0.9, 0.2, 1e-4).is_err());
        assert!(BubbleParams::new(dim(3), 1.0, 0.5, 0.2, 1e-13).is_err());
        assert!(BubbleParams::new(dim(3), 0.0, 0.5, 0.2, 1e-4).is_err());
        let p = BubbleParams::new(dim(3), 1.0, 0.5, 0.2, 1e-4).unwrap();
        assert!(p.is_concentrated());
        assert!(!p.with_epsilon(1e-2).unwrap().is_concentrated());
    }

    #[test]
    fn profile_peak_and_support() {
        let p = BubbleParams::new(dim(4), 1.0, 0.5, 0.2, 1e-4).unwrap();
        let g = Arc::new(make_grid(Frame::ball(0.3), 128, 1.05).unwrap());
        let u = bubble_profile(&p, g).unwrap();
        assert_relative_eq!(p.value(0.0), 1e-4f64.powf(-1.0), max_relative = 1e-14);
        for (rho, v) in u.nodes().iter().zip(u.values()) {
            if *rho > 0.2 {
                assert_eq!(*v, 0.0);
            }
        }
        let q = p.with_epsilon(4e-4).unwrap();
        assert_relative_eq!(p.value(0.0) / q.value(0.0), 4.0, max_relative = 1e-14);
        let narrow = Arc::new(make_grid(Frame::ball(0.1), 64, 1.05).unwrap());
        assert!(bubble_profile(&p, narrow).is_err());
    }

    #[test]
    fn plain_quadrature_matches_closed_forms() {
        let p = BubbleParams::new(dim(3), 1.0, 0.0, 0.9, 1e-6).unwrap();
        let (_, v) = plain_integrals(&p, 1.0).unwrap();
        let eps = p.epsilon;
        // ∫_0^∞ (ε + ρ^2)^{-3} ρ^2 dρ = π / (16 ε^{3/2}); the cutoff removes O(δ^{-3}).
        let exact = 4.0 * std::f64::consts::PI * std::f64::consts::PI / (16.0 * eps.powf(1.5));
        assert_relative_eq!(v, exact, max_relative = 1e-6);
    }

    #[test]
    fn quotient_is_homogeneous() {
        let p = BubbleParams::new(dim(3), 1.0, 0.5, 0.2, 1e-4).unwrap();
        let (k1, v1) = plain_integrals(&p, 1.0).unwrap();
        let (k2, v2) = plain_integrals(&p, 3.0).unwrap();
        assert_relative_eq!(ratio(p.n, k1, v1).unwrap(), ratio(p.n, k2, v2).unwrap(), max_relative = 1e-12);
        let (k1, v1) = weighted_parts(&p, 1.0).unwrap();
        let (k2, v2) = weighted_parts(&p, 0.25).unwrap();
        assert_relative_eq!(ratio(p.n, k1, v1).unwrap(), ratio(p.n, k2, v2).unwrap(), max_relative = 1e-12);
    }

    #[test]
    fn angular_mean_of_newtonian_kernel_is_exact() {
        // |x|^{-(n-2)} is harmonic away from the origin, so its mean over a
        // sphere about x0 of radius ρ < |x0| is |x0|^{-(n-2)}.
        let p = BubbleParams::new(dim(4), 1.0, 0.6, 0.3, 1e-3).unwrap();
        let (k, _) = weighted_parts(&p, 1.0).unwrap();
        let (plain, _) = plain_integrals(&p, 1.0).unwrap();
        assert_relative_eq!(k, plain * 0.6f64.powi(-2), max_relative = 1e-10);
    }

    #[test]
    fn sobolev_bubble_is_close_to_sharp_constant() {
        for n in [3u32, 4, 5] {
            let p = BubbleParams::new(dim(n), 1.0, 0.0, 0.5, 1e-10).unwrap();
            let q = sobolev_quotient_bubble(&p).unwrap();
            let s = sobolev_constant(dim(n));
            assert!(q > s && q < s * 1.001, "n = {n}: {q} vs {s}");
        }
    }

    #[test]
    fn weighted_bubble_lies_in_sandwich() {
        let p = BubbleParams::new(dim(4), 0.4, 0.95, 0.04, 1e-6).unwrap();
        let w = weighted_quotient_bubble(&p).unwrap();
        assert!(w.lower_bound <= w.quotient && w.quotient <= w.upper_bound, "{w:?}");
        assert!(weighted_quotient_bubble(&BubbleParams::new(dim(4), 0.4, 0.03, 0.04, 1e-6).unwrap()).is_err());
    }
}
