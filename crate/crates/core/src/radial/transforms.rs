//! Changes of variables between the ball, the half-line frames and the
//! exterior domain, and the one-dimensional quotients they lead to.
//!
//! Every radial quotient here reduces to
//!
//! ```text
//! ω^{2/n} ∫ y'^2 dτ / ( ∫ τ^{-2(n-1)/(n-2)} |y|^{2n/(n-2)} dτ )^{(n-2)/n}
//! ```
//!
//! on a half-line `(start, T)`, with `ω` the area of the unit sphere.

use std::sync::Arc;

use super::functionals::{hs_quotient, integrate_radial};
use super::grid::{Frame, FrameKind, Grading, RadialGrid};
use super::profile::{Boundary, RadialProfile};
use super::report::{QuotientParams, QuotientReport};
use crate::error::{domain, Error, Result};
use crate::special_fn::{chain_from_ln, sphere_area, Dimension, XChainParams};

fn mismatch<T>(expected: &str, found: Frame) -> Result<T> {
    Err(Error::FrameMismatch { expected: expected.into(), found: found.kind().to_string() })
}

fn unit_ball_r_min(u: &RadialProfile) -> Result<f64> {
    match u.frame() {
        Frame::RBall { r_min, radius: 1.0 } => Ok(r_min),
        other => mismatch("r_ball of radius 1", other),
    }
}

/// Reverse the order of mapped nodes and values, building a grid on `frame`.
fn reversed_profile(
    frame: Frame,
    mapped: impl Iterator<Item = (f64, f64)>,
    lower: Boundary,
    upper: Boundary,
) -> Result<RadialProfile> {
    let (mut nodes, mut values): (Vec<f64>, Vec<f64>) = mapped.unzip();
    nodes.reverse();
    values.reverse();
    let grid = RadialGrid::from_nodes(frame, nodes, Grading::Mapped)?;
    RadialProfile::new(Arc::new(grid), values, lower, upper)
}

/// Truncation point beyond which the half-line weight
/// `τ^{-2(n-1)/(n-2)}` has mass below `1e-10`.
pub fn default_truncation(n: Dimension) -> f64 {
    let p = n.weight_exponent();
    (1e-10 * (p - 1.0)).powf(1.0 / (1.0 - p))
}

/// `∫_T^∞ τ^{-2(n-1)/(n-2)} dτ`.
pub fn tail_weight(n: Dimension, end: f64) -> f64 {
    let p = n.weight_exponent();
    end.powf(1.0 - p) / (p - 1.0)
}

/// `v = r^{(n-2)/2} u`.
pub fn substitute_v(n: Dimension, u: &RadialProfile) -> Result<RadialProfile> {
    if u.frame().kind() != FrameKind::RBall {
        return mismatch("r_ball", u.frame());
    }
    let m = (n.as_f64() - 2.0) / 2.0;
    let values = u.values().iter().zip(u.nodes()).map(|(v, r)| r.powf(m) * v).collect();
    RadialProfile::new(u.shared_grid(), values, u.lower(), u.upper())
}

/// Quotient of a ball profile written in the `v` variable:
/// `∫ (v'^2 r - S(r) v^2 / r) dr` over `(∫ W(r) |v|^{2n/(n-2)} dr / r)^{(n-2)/n}`
/// with the sphere factors, where `S` is the logarithmic series and `W` the
/// product weight.
pub fn v_form_quotient(p: &XChainParams, v: &RadialProfile) -> Result<QuotientReport> {
    if v.frame().kind() != FrameKind::RBall {
        return mismatch("r_ball", v.frame());
    }
    let n = p.n;
    let q = n.critical_exponent();
    let dv = v.derivative();
    let mut lhs = Vec::with_capacity(dv.len());
    let mut rhs = Vec::with_capacity(dv.len());
    for ((d, val), r) in dv.iter().zip(v.values()).zip(v.nodes()) {
        let chain = chain_from_ln(p.a, p.levels(), r.ln())?;
        let series = crate::special_fn::series_weight(p.k, &chain);
        lhs.push(d * d * r - series * val * val / r);
        rhs.push(crate::special_fn::product_weight(n, &chain) * val.abs().powf(q) / r);
    }
    let omega = sphere_area(n.get())?;
    let numerator = omega * v.grid().integrate_with(|i, _| lhs[i]);
    let denominator = (omega * v.grid().integrate_with(|i, _| rhs[i])).powf(n.norm_exponent());
    QuotientReport::new(
        numerator,
        denominator,
        FrameKind::RBall,
        QuotientParams::chain(n.get(), p.k, p.a),
        v.grid().meta(),
        None,
    )
}

/// `y(τ) = v(r)` with `τ = a - ln r`; the unit ball becomes `(a, a - ln r_min)`.
pub fn tau_transform(n: Dimension, a: f64, v: &RadialProfile) -> Result<RadialProfile> {
    XChainParams::new(n, 0, a)?;
    let r_min = unit_ball_r_min(v)?;
    let frame = Frame::TauHalfline { start: a, end: a - r_min.ln() };
    let mapped = v.nodes().iter().zip(v.values()).map(|(r, val)| (a - r.ln(), *val));
    reversed_profile(frame, mapped, v.upper(), v.lower())
}

/// `y(τ) = r^{(n-2)/2} (X_1 ··· X_k)^{1/2} u(r)` with `τ = 1/X_{k+1}(a, r)`;
/// the unit ball becomes `(1/X_{k+1}(a,1), 1/X_{k+1}(a, r_min))`.
pub fn k_transform(p: &XChainParams, u: &RadialProfile) -> Result<RadialProfile> {
    let r_min = unit_ball_r_min(u)?;
    let m = (p.n.as_f64() - 2.0) / 2.0;
    let map = |r: f64| -> Result<(f64, f64)> {
        let chain = chain_from_ln(p.a, p.levels(), r.ln())?;
        let partial: f64 = chain[..p.k].iter().product();
        Ok((1.0 / chain[p.k], r.powf(m) * partial.sqrt()))
    };
    let start = map(1.0)?.0;
    let end = map(r_min)?.0;
    let mut mapped = Vec::with_capacity(u.values().len());
    for (r, val) in u.nodes().iter().zip(u.values()) {
        let (tau, factor) = map(*r)?;
        mapped.push((tau, factor * val));
    }
    let frame = Frame::TauHalfline { start, end };
    reversed_profile(frame, mapped.into_iter(), u.upper(), u.lower())
}

/// `z(t) = u(r)` with `t = r^{-(n-2)}`; the ball of radius `R` becomes
/// `(R^{-(n-2)}, r_min^{-(n-2)})`.
pub fn t_transform(n: Dimension, u: &RadialProfile) -> Result<RadialProfile> {
    let Frame::RBall { r_min, radius } = u.frame() else {
        return mismatch("r_ball", u.frame());
    };
    let e = -(n.as_f64() - 2.0);
    let frame = Frame::THalfline { start: radius.powf(e), end: r_min.powf(e) };
    let mapped = u.nodes().iter().zip(u.values()).map(|(r, val)| (r.powf(e), *val));
    reversed_profile(frame, mapped, u.upper(), u.lower())
}

fn half_line_quotient(n: Dimension, y: &RadialProfile, params: QuotientParams) -> Result<QuotientReport> {
    if y.lower() != Boundary::DirichletZero {
        return domain("half-line quotients need a dirichlet_zero start");
    }
    let p = n.weight_exponent();
    let q = n.critical_exponent();
    let dy = y.derivative();
    let grid = y.grid();
    let kinetic = grid.integrate_with(|i, _| dy[i] * dy[i]);
    let mut potential = grid.integrate_with(|i, t| t.powf(-p) * y.values()[i].abs().powf(q));
    let tail = match y.upper() {
        Boundary::Free => {
            let w = tail_weight(n, grid.last());
            potential += w * y.last_value().abs().powf(q);
            Some(w)
        }
        Boundary::DirichletZero => None,
    };
    let omega = sphere_area(n.get())?;
    QuotientReport::new(
        omega * kinetic,
        (omega * potential).powf(n.norm_exponent()),
        grid.frame().kind(),
        params,
        grid.meta(),
        tail,
    )
}

fn check_start(expected_kind: FrameKind, start: f64, y: &RadialProfile) -> Result<()> {
    let frame = y.frame();
    let actual = match frame {
        Frame::TauHalfline { start, .. } if expected_kind == FrameKind::TauHalfline => start,
        Frame::THalfline { start, .. } if expected_kind == FrameKind::THalfline => start,
        other => return mismatch(&expected_kind.to_string(), other),
    };
    if (actual - start).abs() > 1e-12 * start.abs().max(1.0) {
        return Err(Error::FrameMismatch {
            expected: format!("{expected_kind} starting at {start}"),
            found: format!("{} starting at {actual}", frame.kind()),
        });
    }
    Ok(())
}

/// Radial quotient in the `τ = a - ln r` frame. A free end at `T` is closed
/// by extending `y` as the constant `y(T)`.
pub fn tau_quotient(n: Dimension, a: f64, y: &RadialProfile) -> Result<QuotientReport> {
    XChainParams::new(n, 0, a)?;
    check_start(FrameKind::TauHalfline, a, y)?;
    half_line_quotient(n, y, QuotientParams::chain(n.get(), 0, a))
}

/// Radial quotient in the `t = |x|^{-(n-2)}` frame, with `z(t_inner) = 0`.
pub fn t_quotient(n: Dimension, t_inner: f64, z: &RadialProfile) -> Result<QuotientReport> {
    if !(t_inner > 0.0) {
        return domain(format!("inner t must be positive, got {t_inner}"));
    }
    check_start(FrameKind::THalfline, t_inner, z)?;
    half_line_quotient(n, z, QuotientParams::dimension(n.get()))
}

/// Radial quotient in the `τ = 1/X_{k+1}(a, r)` frame, starting at
/// `r_a = 1/X_{k+1}(a, 1)`.
pub fn k_transformed_quotient(p: &XChainParams, y: &RadialProfile) -> Result<QuotientReport> {
    let start = 1.0 / chain_from_ln(p.a, p.levels(), 0.0)?[p.k];
    check_start(FrameKind::TauHalfline, start, y)?;
    half_line_quotient(p.n, y, QuotientParams::chain(p.n.get(), p.k, p.a))
}

/// Weighted Sobolev quotient
/// `∫ |x|^{2b} |∇u|^2 / (∫ |x|^{2bn/(n-2)} |u|^{2n/(n-2)})^{(n-2)/n}`
/// for a ball profile of any radius vanishing at the outer end.
pub fn ckn_quotient(n: Dimension, b: f64, u: &RadialProfile) -> Result<QuotientReport> {
    let nf = n.as_f64();
    if !(b > -(nf - 2.0) / 2.0) || !b.is_finite() {
        return domain(format!("CKN exponent must exceed -(n-2)/2 = {}, got {b}", -(nf - 2.0) / 2.0));
    }
    if u.frame().kind() != FrameKind::RBall {
        return mismatch("r_ball", u.frame());
    }
    let q = n.critical_exponent();
    let du = u.derivative();
    let lhs: Vec<f64> = du.iter().zip(u.nodes()).map(|(d, r)| r.powf(2.0 * b) * d * d).collect();
    let w = 2.0 * b * nf / (nf - 2.0);
    let rhs: Vec<f64> = u.values().iter().zip(u.nodes()).map(|(v, r)| r.powf(w) * v.abs().powf(q)).collect();
    let numerator = integrate_radial(n, u.grid(), &lhs)?;
    let denominator = integrate_radial(n, u.grid(), &rhs)?.powf(n.norm_exponent());
    QuotientReport::new(
        numerator,
        denominator,
        FrameKind::RBall,
        QuotientParams { n: n.get(), k: None, a: None, b: Some(b) },
        u.grid().meta(),
        None,
    )
}

/// Kelvin transform `u*(ρ) = ρ^{-(n-2)} u(1/ρ)` between the unit ball and
/// its exterior. Applying it to an exterior profile maps back to the ball,
/// so the transform is an involution.
pub fn kelvin(n: Dimension, u: &RadialProfile) -> Result<RadialProfile> {
    let e = n.as_f64() - 2.0;
    let frame = match u.frame() {
        Frame::RBall { r_min, radius: 1.0 } => Frame::RhoExterior { end: 1.0 / r_min },
        Frame::RhoExterior { end } => Frame::RBall { r_min: 1.0 / end, radius: 1.0 },
        other => return mismatch("r_ball of radius 1 or rho_exterior", other),
    };
    let mapped = u.nodes().iter().zip(u.values()).map(|(r, val)| (1.0 / r, r.powf(e) * val));
    reversed_profile(frame, mapped, u.upper(), u.lower())
}

/// Evaluate the `(a, B_ρ)` quotient of `v` and the `(a - ln ρ, B_1)`
/// quotient of `w(r) = v(ρ r)` from the same samples.
pub fn scaling_check(
    n: Dimension,
    a: f64,
    rho: f64,
    v: &RadialProfile,
) -> Result<(QuotientReport, QuotientReport)> {
    let Frame::RBall { radius, .. } = v.frame() else {
        return mismatch("r_ball", v.frame());
    };
    if !(rho > 0.0) || (radius - rho).abs() > 1e-12 * rho {
        return Err(Error::FrameMismatch {
            expected: format!("r_ball of radius {rho}"),
            found: format!("r_ball of radius {radius}"),
        });
    }
    if v.upper() != Boundary::DirichletZero {
        return domain("scaling_check needs a profile vanishing at |x| = rho");
    }
    let scaled_a = a - rho.ln();
    let original = hs_quotient(&XChainParams::new(n, 0, a)?, v)?;
    let nodes: Vec<f64> = v.nodes().iter().map(|r| r / rho).collect();
    let frame = Frame::RBall { r_min: nodes[0], radius: nodes[nodes.len() - 1] };
    let grid = RadialGrid::from_nodes(frame, nodes, v.grid().grading())?;
    let w = v.with_grid(Arc::new(grid))?;
    let rescaled = hs_quotient(&XChainParams::new(n, 0, scaled_a)?, &w)?;
    Ok((original, rescaled))
}
