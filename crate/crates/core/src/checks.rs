//! Seeded verification batteries: the inequality itself over random
//! admissible profiles, and the exactness of every change of variables.

use std::sync::Arc;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::best_constant_k;
use crate::error::{Error, Result};
use crate::radial::{
    ckn_quotient, dirichlet_energy, hs_lhs, hs_quotient, k_transformed_quotient, kelvin, log_grid, make_grid,
    scaling_check, t_quotient, tau_quotient, Frame, RadialGrid, RadialProfile, R_MIN,
};
use crate::special_fn::{f_inverse_ln, x_chain, Dimension, XChainParams};

/// Random bounded profiles on the unit ball, all vanishing at `r = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ProfileSpec {
    /// `(1 - r) Σ c_j r^j`.
    Polynomial { coefficients: Vec<f64> },
    /// `(1 - r) exp(-(r - center)^2 / (2 width^2))`.
    Gaussian { center: f64, width: f64 },
    /// Piecewise linear through `(knots[i], values[i])`, ending at `(1, 0)`.
    Hat { knots: Vec<f64>, values: Vec<f64> },
}

impl ProfileSpec {
    pub fn eval(&self, r: f64) -> f64 {
        match self {
            ProfileSpec::Polynomial { coefficients } => {
                (1.0 - r) * coefficients.iter().rev().fold(0.0, |acc, c| acc * r + c)
            }
            ProfileSpec::Gaussian { center, width } => {
                (1.0 - r) * (-(r - center).powi(2) / (2.0 * width * width)).exp()
            }
            ProfileSpec::Hat { knots, values } => {
                let j = knots.partition_point(|k| *k <= r);
                if j == 0 {
                    return values[0];
                }
                if j == knots.len() {
                    return values[values.len() - 1];
                }
                let (x0, x1) = (knots[j - 1], knots[j]);
                let (y0, y1) = (values[j - 1], values[j]);
                y0 + (y1 - y0) * (r - x0) / (x1 - x0)
            }
        }
    }

    pub fn is_smooth(&self) -> bool {
        !matches!(self, ProfileSpec::Hat { .. })
    }

    pub fn sample(&self, grid: Arc<RadialGrid>) -> Result<RadialProfile> {
        RadialProfile::from_fn(grid, |r| self.eval(r))
    }
}

/// Generator for profile `index` of the battery seeded by `seed`. Each index
/// has its own ChaCha stream, so profiles do not depend on evaluation order.
fn rng_for(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn polynomial(rng: &mut ChaCha8Rng) -> ProfileSpec {
    let degree = rng.random_range(0..=4usize);
    let mut coefficients: Vec<f64> = (0..=degree).map(|_| rng.random_range(-1.0..1.0)).collect();
    // Keep the profile away from the zero function.
    coefficients[0] = coefficients[0].signum() * (0.1 + coefficients[0].abs());
    ProfileSpec::Polynomial { coefficients }
}

fn gaussian(rng: &mut ChaCha8Rng) -> ProfileSpec {
    ProfileSpec::Gaussian { center: rng.random_range(0.1..0.9), width: rng.random_range(0.02..0.3) }
}

fn hat(rng: &mut ChaCha8Rng) -> ProfileSpec {
    let interior = rng.random_range(1..=5usize);
    let mut knots: Vec<f64> = (0..interior).map(|_| rng.random_range(0.05..0.95)).collect();
    knots.sort_by(f64::total_cmp);
    knots.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
    knots.insert(0, 0.0);
    knots.push(1.0);
    let mut values: Vec<f64> = (0..knots.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
    values[0] = values[0].signum() * (0.1 + values[0].abs());
    *values.last_mut().expect("knots are nonempty") = 0.0;
    ProfileSpec::Hat { knots, values }
}

/// Profile `index` of the battery: polynomial, Gaussian and hat families in
/// rotation.
pub fn random_profile(seed: u64, index: usize) -> ProfileSpec {
    let mut rng = rng_for(seed, index);
    match index % 3 {
        0 => polynomial(&mut rng),
        1 => gaussian(&mut rng),
        _ => hat(&mut rng),
    }
}

/// Smooth profile `index` (polynomial or Gaussian) for the transform suite.
pub fn random_smooth_profile(seed: u64, index: usize) -> ProfileSpec {
    let mut rng = rng_for(seed, index);
    if index.is_multiple_of(2) {
        polynomial(&mut rng)
    } else {
        gaussian(&mut rng)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BatteryConfig {
    pub n: u32,
    pub k: usize,
    pub a: f64,
    pub profiles: usize,
    pub nodes: usize,
    pub seed: u64,
    /// Accept `quotient ≥ C (1 - slack)`.
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub index: usize,
    pub profile: ProfileSpec,
    pub quotient: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatteryReport {
    pub config: BatteryConfig,
    pub constant: f64,
    pub min_ratio: f64,
    pub worst_index: usize,
    /// Profiles whose Hardy-type left side came out negative.
    pub negative_lhs: usize,
    pub violations: Vec<Violation>,
    pub passed: bool,
}

/// Evaluate the quotient of `cfg.profiles` random profiles against the
/// sharp constant `C_{n,k}(a)`.
pub fn inequality_battery(cfg: &BatteryConfig) -> Result<BatteryReport> {
    let n = Dimension::new(cfg.n)?;
    let params = XChainParams::new(n, cfg.k, cfg.a)?;
    let constant = best_constant_k(n, cfg.k, cfg.a)?.value;
    let grid = Arc::new(make_grid(Frame::unit_ball(), cfg.nodes, 1.05)?);
    let results: Vec<(f64, f64)> = (0..cfg.profiles)
        .into_par_iter()
        .map(|i| {
            let u = random_profile(cfg.seed, i).sample(Arc::clone(&grid))?;
            Ok((hs_quotient(&params, &u)?.quotient, hs_lhs(&params, &u)?))
        })
        .collect::<Result<_>>()?;
    let mut min_ratio = f64::INFINITY;
    let mut worst_index = 0;
    let mut violations = Vec::new();
    let mut negative_lhs = 0;
    for (i, (quotient, lhs)) in results.iter().enumerate() {
        let ratio = quotient / constant;
        if ratio < min_ratio {
            min_ratio = ratio;
            worst_index = i;
        }
        if *lhs < 0.0 {
            negative_lhs += 1;
        }
        if ratio < 1.0 - cfg.slack {
            violations.push(Violation { index: i, profile: random_profile(cfg.seed, i), quotient: *quotient, ratio });
        }
    }
    let passed = violations.is_empty() && negative_lhs == 0;
    Ok(BatteryReport { config: *cfg, constant, min_ratio, worst_index, negative_lhs, violations, passed })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub n: u32,
    pub a: f64,
    pub rho: f64,
    pub profiles: usize,
    pub nodes: usize,
    pub seed: u64,
}

/// Largest relative discrepancy observed for each identity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuiteDiscrepancies {
    /// Ball quotient versus the `τ = a - ln r` frame.
    pub tau_vs_r: f64,
    /// Plain Sobolev quotient versus the `t = r^{-(n-2)}` frame.
    pub t_vs_r: f64,
    /// The same half-line profile read in the `τ` and `t` frames.
    pub tau_vs_t: f64,
    /// `k = 1` ball quotient versus the `τ = 1/X_2(a, r)` frame; `None`
    /// when `a` is too small for a second chain level.
    pub k1_vs_r: Option<f64>,
    pub kelvin_energy: f64,
    pub kelvin_involution: f64,
    pub scaling: f64,
    /// The scaling identity at `ρ = 1`.
    pub scaling_unit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub config: SuiteConfig,
    pub discrepancies: SuiteDiscrepancies,
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

/// Analytic samples of `y(τ) = (r^{(n-2)/2} (X_1 ··· X_k)^{1/2} u)(r(τ))` on an
/// independent half-line grid.
fn half_line_samples(p: &XChainParams, spec: &ProfileSpec, nodes: usize, frame: Frame) -> Result<RadialProfile> {
    let grid = Arc::new(make_grid(frame, nodes, 1.05)?);
    let m = (p.n.as_f64() - 2.0) / 2.0;
    let mut values = Vec::with_capacity(grid.len());
    for (i, &tau) in grid.nodes().iter().enumerate() {
        if i == 0 {
            values.push(0.0);
            continue;
        }
        let ln_r = f_inverse_ln(p.a, p.k + 1, 1.0 / tau)?;
        let r = ln_r.exp();
        let chain = x_chain(p, r)?;
        let partial: f64 = chain[..p.k].iter().product();
        values.push((m * ln_r).exp() * partial.sqrt() * spec.eval(r));
    }
    RadialProfile::with_default_boundary(grid, values)
}

fn one_profile(cfg: &SuiteConfig, n: Dimension, spec: &ProfileSpec) -> Result<SuiteDiscrepancies> {
    let ball = Arc::new(make_grid(Frame::unit_ball(), cfg.nodes, 1.05)?);
    let u = spec.sample(Arc::clone(&ball))?;
    let p0 = XChainParams::new(n, 0, cfg.a)?;

    let r_q = hs_quotient(&p0, &u)?.quotient;
    let tau_frame = Frame::TauHalfline { start: cfg.a, end: cfg.a - R_MIN.ln() };
    let y = half_line_samples(&p0, spec, cfg.nodes, tau_frame)?;
    let tau_q = tau_quotient(n, cfg.a, &y)?;
    let tau_vs_r = rel(r_q, tau_q.quotient);

    let Frame::TauHalfline { start, end } = y.frame() else {
        return Err(Error::Grid("unexpected frame".into()));
    };
    let relabeled = Arc::new(RadialGrid::from_nodes(Frame::THalfline { start, end }, y.nodes().to_vec(), y.grid().grading())?);
    let tau_vs_t = rel(tau_q.quotient, t_quotient(n, start, &y.with_grid(relabeled)?)?.quotient);

    let e = n.as_f64() - 2.0;
    let t_grid = Arc::new(log_grid(Frame::THalfline { start: 1.0, end: R_MIN.powf(-e) }, cfg.nodes)?);
    let z = RadialProfile::from_fn(t_grid, |t| spec.eval(t.powf(-1.0 / e)))?;
    let sob = ckn_quotient(n, 0.0, &u)?.quotient * e.powf(-n.branch_exponent());
    let t_vs_r = rel(sob, t_quotient(n, 1.0, &z)?.quotient);

    let k1_vs_r = match XChainParams::new(n, 1, cfg.a) {
        Ok(p1) => {
            let start = 1.0 / x_chain(&p1, 1.0)?[1];
            let end = 1.0 / x_chain(&p1, R_MIN)?[1];
            let y1 = half_line_samples(&p1, spec, cfg.nodes, Frame::TauHalfline { start, end })?;
            Some(rel(hs_quotient(&p1, &u)?.quotient, k_transformed_quotient(&p1, &y1)?.quotient))
        }
        Err(_) => None,
    };

    let annulus = Arc::new(log_grid(Frame::RBall { r_min: 1e-4, radius: 1.0 }, cfg.nodes)?);
    let w = spec.sample(annulus)?;
    let kw = kelvin(n, &w)?;
    let kelvin_energy = rel(dirichlet_energy(n, &w)?, dirichlet_energy(n, &kw)?);
    let back = kelvin(n, &kw)?;
    let scale = w.values().iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let kelvin_involution = back
        .values()
        .iter()
        .zip(w.values())
        .map(|(a, b)| (a - b).abs() / scale)
        .fold(0.0, f64::max);

    let scaled_grid = Arc::new(make_grid(Frame::ball(cfg.rho), cfg.nodes, 1.05)?);
    let v = RadialProfile::from_fn(scaled_grid, |r| spec.eval(r / cfg.rho))?;
    let (lhs, rhs) = scaling_check(n, cfg.a, cfg.rho, &v)?;
    let scaling = rel(lhs.quotient, rhs.quotient);
    let (lhs, rhs) = scaling_check(n, cfg.a, 1.0, &u)?;
    let scaling_unit = rel(lhs.quotient, rhs.quotient);

    Ok(SuiteDiscrepancies {
        tau_vs_r,
        t_vs_r,
        tau_vs_t,
        k1_vs_r,
        kelvin_energy,
        kelvin_involution,
        scaling,
        scaling_unit,
    })
}

/// Run every coordinate-change identity on `cfg.profiles` random smooth
/// profiles and keep the worst discrepancy of each.
pub fn transform_suite(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let n = Dimension::new(cfg.n)?;
    if !(cfg.rho > 0.0 && cfg.rho <= 1.0) {
        return crate::error::domain(format!("scaling radius must lie in (0, 1], got {}", cfg.rho));
    }
    let all: Vec<SuiteDiscrepancies> = (0..cfg.profiles)
        .into_par_iter()
        .map(|i| one_profile(cfg, n, &random_smooth_profile(cfg.seed, i)))
        .collect::<Result<_>>()?;
    let max = |f: &dyn Fn(&SuiteDiscrepancies) -> f64| all.iter().map(f).fold(0.0, f64::max);
    let k1 = if all.iter().all(|d| d.k1_vs_r.is_some()) {
        Some(max(&|d| d.k1_vs_r.unwrap_or(0.0)))
    } else {
        None
    };
    let discrepancies = SuiteDiscrepancies {
        tau_vs_r: max(&|d| d.tau_vs_r),
        t_vs_r: max(&|d| d.t_vs_r),
        tau_vs_t: max(&|d| d.tau_vs_t),
        k1_vs_r: k1,
        kelvin_energy: max(&|d| d.kelvin_energy),
        kelvin_involution: max(&|d| d.kelvin_involution),
        scaling: max(&|d| d.scaling),
        scaling_unit: max(&|d| d.scaling_unit),
    };
    Ok(SuiteReport { config: *cfg, discrepancies })
}
