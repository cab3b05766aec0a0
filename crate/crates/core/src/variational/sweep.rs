use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bubble::{sobolev_quotient_bubble, weighted_quotient_bubble, BubbleParams};
use crate::constants::RootBracket;
use crate::error::{domain, Result};

/// Which quotient a sweep evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    /// Unweighted Sobolev quotient of the bubble.
    Sobolev,
    /// Weighted quotient with the logarithmic weight, bubble centred off the origin.
    Weighted,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub epsilon: f64,
    pub quotient: f64,
}

/// Quotients along a decreasing sequence of concentration scales and their
/// extrapolation `q(ε) ≈ q_∞ + c ε^p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub kind: SweepKind,
    pub entries: Vec<SweepEntry>,
    pub extrapolated_limit: f64,
    /// `None` when the last three points do not determine a power law.
    pub fit_exponent: Option<f64>,
    /// False when the quotients fail to decrease strictly with `ε`.
    pub monotone: bool,
    pub warnings: Vec<String>,
}

impl SweepRecord {
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for e in &self.entries {
            out.serialize(e)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Fit `q_∞ + c ε^p` through three points with `ε_1 > ε_2 > ε_3`.
/// Returns `(q_∞, p)`.
pub fn fit_power_law(points: [(f64, f64); 3]) -> Option<(f64, f64)> {
    let [(e1, q1), (e2, q2), (e3, q3)] = points;
    let (d12, d23) = (q1 - q2, q2 - q3);
    if d12 == 0.0 || d23 == 0.0 || d12.signum() != d23.signum() {
        return None;
    }
    let target = d12 / d23;
    let residual = |p: f64| (e1.powf(p) - e2.powf(p)) / (e2.powf(p) - e3.powf(p)) - target;
    let p = RootBracket::new(1e-3, 8.0, 1e-12).ok()?.solve(residual).ok()?;
    let c = d12 / (e1.powf(p) - e2.powf(p));
    Some((q3 - c * e3.powf(p), p))
}

/// Evaluate the bubble quotient for every `ε` (in parallel, results kept in
/// input order) and extrapolate to `ε → 0` from the last three entries.
pub fn concentration_sweep(template: &BubbleParams, kind: SweepKind, epsilons: &[f64]) -> Result<SweepRecord> {
    if epsilons.len() < 4 {
        return domain(format!("a sweep needs at least 4 epsilons, got {}", epsilons.len()));
    }
    if epsilons.windows(2).any(|w| !(w[0] > w[1])) {
        return domain("sweep epsilons must be strictly decreasing");
    }
    let params: Vec<BubbleParams> = epsilons.iter().map(|&e| template.with_epsilon(e)).collect::<Result<_>>()?;
    let quotients: Vec<f64> = params
        .par_iter()
        .map(|p| match kind {
            SweepKind::Sobolev => sobolev_quotient_bubble(p),
            SweepKind::Weighted => weighted_quotient_bubble(p).map(|w| w.quotient),
        })
        .collect::<Result<_>>()?;
    let entries: Vec<SweepEntry> =
        epsilons.iter().zip(&quotients).map(|(&epsilon, &quotient)| SweepEntry { epsilon, quotient }).collect();

    let mut warnings = Vec::new();
    let monotone = quotients.windows(2).all(|w| w[1] < w[0]);
    if !monotone {
        warnings.push("quotients are not strictly decreasing in epsilon".to_string());
    }
    if let Some(p) = params.iter().find(|p| !p.is_concentrated()) {
        warnings.push(format!(
            "epsilon = {} is not small against delta^2 = {}",
            p.epsilon,
            p.delta * p.delta
        ));
    }
    let m = entries.len();
    let tail = [
        (entries[m - 3].epsilon, entries[m - 3].quotient),
        (entries[m - 2].epsilon, entries[m - 2].quotient),
        (entries[m - 1].epsilon, entries[m - 1].quotient),
    ];
    let (extrapolated_limit, fit_exponent) = match fit_power_law(tail) {
        Some((limit, p)) => (limit, Some(p)),
        None => {
            warnings.push("power-law fit failed; reporting the last quotient".to_string());
            (entries[m - 1].quotient, None)
        }
    };
    Ok(SweepRecord { kind, entries, extrapolated_limit, fit_exponent, monotone, warnings })
}

/// `count` values halving from `start`.
pub fn halving(start: f64, count: usize) -> Vec<f64> {
    (0..count).map(|i| start * 0.5f64.powi(i as i32)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special_fn::{sobolev_constant, Dimension};
    use approx::assert_relative_eq;

    #[test]
    fn power_law_fit_recovers_exact_data() {
        let f = |e: f64| 2.5 + 0.7 * e.powf(0.5);
        let pts = [(1e-3, f(1e-3)), (4e-4, f(4e-4)), (1e-4, f(1e-4))];
        let (limit, p) = fit_power_law(pts).unwrap();
        assert_relative_eq!(limit, 2.5, max_relative = 1e-9);
        assert_relative_eq!(p, 0.5, max_relative = 1e-9);
        assert!(fit_power_law([(1.0, 1.0), (0.5, 2.0), (0.25, 1.5)]).is_none());
    }

    #[test]
    fn sweep_preconditions() {
        let p = BubbleParams::new(Dimension::new(3).unwrap(), 1.0, 0.5, 0.2, 1e-4).unwrap();
        assert!(concentration_sweep(&p, SweepKind::Sobolev, &[1e-4]).is_err());
        assert!(concentration_sweep(&p, SweepKind::Sobolev, &[1e-4, 1e-5, 2e-5, 1e-6]).is_err());
    }

    #[test]
    fn sobolev_sweep_n3() {
        let n = Dimension::new(3).unwrap();
        let p = BubbleParams::new(n, 1.0, 0.5, 0.2, 1e-2).unwrap();
        let eps = halving(1e-2, 11);
        let rec = concentration_sweep(&p, SweepKind::Sobolev, &eps).unwrap();
        assert!(rec.monotone);
        assert!(rec.fit_exponent.unwrap() > 0.0);
        assert_relative_eq!(rec.extrapolated_limit, sobolev_constant(n), max_relative = 1e-2);
        assert!(!rec.warnings.is_empty());
    }
}
