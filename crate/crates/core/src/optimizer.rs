//! Sum-rate optimal Han-Kobayashi power allocation.
//!
//! Outside the general weak regime the optimal split is a corner of the
//! power box (only one layer per user) and the sum-rate has a closed form.
//! In the weak regime the optimal private powers satisfy a linear relation
//! `p2p = alpha * p1p + beta`; the optimizer searches that line together with
//! the box boundary and keeps the best split under the shared objective.
//!
//! [`brute_force_split`] is an exhaustive grid oracle over the same objective
//! and shares no code with the closed forms.

use log::debug;
use rayon::prelude::*;

use crate::channel::{
    classify_mode, link_budget, sum_rate_unchecked, ChannelGains, InterferenceMode, LinkBudget,
    PowerBudget, PowerSplit,
};
use crate::error::{Error, Result};

/// Default resolution of the grid oracle.
pub const DEFAULT_GRID_N: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AllocationResult {
    pub mode: InterferenceMode,
    pub split: PowerSplit,
    /// bits per channel use
    pub sum_rate: f64,
}

/// Coefficients of the weak-regime linear relation between the private
/// powers, plus the stationary point `rho` for `p1p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakModeCoefficients {
    pub alpha: f64,
    pub beta: f64,
    /// `None` when its square-root argument is negative or a denominator
    /// vanishes.
    pub rho: Option<f64>,
}

impl WeakModeCoefficients {
    pub fn compute(gains: &ChannelGains, budget: &PowerBudget) -> Self {
        let ChannelGains { g11, g12, g21, g22 } = *gains;
        let PowerBudget { p1, p2, n0 } = *budget;

        let det = g11 * g22 - g12 * g21;
        let den = det * p1 + (g22 - g12) * n0;
        let alpha = (det * p2 + (g11 - g21) * n0) / den;
        let beta = ((g22 - g12) * p2 + (g21 - g11) * p1) * n0 / den;

        let rho = if det != 0.0 && alpha != 0.0 && alpha.is_finite() {
            let arg = (g11 * g22 / (g21 * g12)) * (g12 - g22) * (g21 - g11) / alpha;
            if arg.is_finite() && arg >= 0.0 {
                Some(n0 * (arg.sqrt() - (g22 - g12)) / det).filter(|r| r.is_finite())
            } else {
                None
            }
        } else {
            None
        };

        WeakModeCoefficients { alpha, beta, rho }
    }

    pub fn is_degenerate(&self) -> bool {
        !(self.alpha.is_finite() && self.beta.is_finite())
    }

    /// Point on the linear relation at `p1p`, with both powers clamped into
    /// the budget.
    pub fn line_point(&self, p1p: f64, budget: &PowerBudget) -> PowerSplit {
        let p1p = p1p.clamp(0.0, budget.p1);
        let p2p = (self.alpha * p1p + self.beta).clamp(0.0, budget.p2);
        PowerSplit { p1p, p2p }
    }
}

/// Closed-form optimal sum-rate for every regime except `Weak`.
pub fn closed_form_sum_rate(mode: InterferenceMode, lb: &LinkBudget) -> Option<f64> {
    let c = |x: f64| (1.0 + x).log2();
    let LinkBudget {
        snr1,
        snr2,
        inr1,
        inr2,
    } = *lb;
    match mode {
        InterferenceMode::VeryStrong => Some(c(snr1) + c(snr2)),
        InterferenceMode::Strong => Some(c(snr2 + inr2).min(c(snr1 + inr1))),
        InterferenceMode::Mixed1 => Some(c(snr1 + inr1).min(c(snr1) + c(snr2 / (1.0 + inr2)))),
        InterferenceMode::Mixed2 => Some(c(snr2 + inr2).min(c(snr1 / (1.0 + inr1)) + c(snr2))),
        InterferenceMode::VeryWeak => Some(c(snr1 / (1.0 + inr1)) + c(snr2 / (1.0 + inr2))),
        InterferenceMode::Weak => None,
    }
}

/// Optimal split for the regime of the instance and its achievable
/// sum-rate under the shared objective.
pub fn optimize(gains: &ChannelGains, budget: &PowerBudget) -> Result<AllocationResult> {
    let lb = link_budget(gains, budget)?;
    let mode = classify_mode(&lb);
    let split = match mode {
        InterferenceMode::VeryStrong | InterferenceMode::Strong => PowerSplit::all_common(),
        InterferenceMode::Mixed1 => PowerSplit::new(budget.p1, 0.0),
        InterferenceMode::Mixed2 => PowerSplit::new(0.0, budget.p2),
        InterferenceMode::VeryWeak => PowerSplit::all_private(budget),
        InterferenceMode::Weak => weak_split_unchecked(gains, budget),
    };
    Ok(AllocationResult {
        mode,
        split,
        sum_rate: sum_rate_unchecked(gains, budget, &split),
    })
}

/// Weak-regime power split.
///
/// Candidates: the closed-form points `0`, `-beta/alpha`, `rho` and `p1`
/// mapped through the linear relation, the maximum of the objective along
/// the (clamped) linear relation, and the maxima along the four edges of the
/// power box. Degenerate coefficients only remove the line candidates.
pub fn weak_mode_split(gains: &ChannelGains, budget: &PowerBudget) -> Result<PowerSplit> {
    gains.validate()?;
    budget.validate()?;
    Ok(weak_split_unchecked(gains, budget))
}

fn weak_split_unchecked(gains: &ChannelGains, budget: &PowerBudget) -> PowerSplit {
    let objective = |s: &PowerSplit| sum_rate_unchecked(gains, budget, s);
    let coeffs = WeakModeCoefficients::compute(gains, budget);
    let PowerBudget { p1, p2, .. } = *budget;

    let mut candidates: Vec<PowerSplit> = Vec::with_capacity(12);
    if !coeffs.is_degenerate() {
        let mut seeds = vec![0.0, p1];
        if coeffs.alpha != 0.0 {
            seeds.push(-coeffs.beta / coeffs.alpha);
        }
        seeds.extend(coeffs.rho);
        for p1p in seeds.into_iter().filter(|x| x.is_finite()) {
            candidates.push(coeffs.line_point(p1p, budget));
        }
        let (x, _) = maximize_on_segment(p1, |x| objective(&coeffs.line_point(x, budget)));
        candidates.push(coeffs.line_point(x, budget));
    }

    let (y, _) = maximize_on_segment(p2, |y| objective(&PowerSplit::new(0.0, y)));
    candidates.push(PowerSplit::new(0.0, y));
    let (y, _) = maximize_on_segment(p2, |y| objective(&PowerSplit::new(p1, y)));
    candidates.push(PowerSplit::new(p1, y));
    let (x, _) = maximize_on_segment(p1, |x| objective(&PowerSplit::new(x, 0.0)));
    candidates.push(PowerSplit::new(x, 0.0));
    let (x, _) = maximize_on_segment(p1, |x| objective(&PowerSplit::new(x, p2)));
    candidates.push(PowerSplit::new(x, p2));

    let mut best = candidates[0];
    let mut best_value = objective(&best);
    for c in &candidates[1..] {
        let v = objective(c);
        if v > best_value {
            best = *c;
            best_value = v;
        }
    }

    if let Some(rho) = coeffs.rho {
        let raw_p2p = coeffs.alpha * rho + coeffs.beta;
        if !(0.0..=p1).contains(&rho) || !(0.0..=p2).contains(&raw_p2p) {
            debug!(
                "weak split: closed-form point ({rho:.6e}, {raw_p2p:.6e}) outside budget ({p1:.6e}, {p2:.6e}); clamped"
            );
        }
    }
    best
}

/// Maximizes `f` over `[0, hi]`: a mixed log/linear scan (private powers of
/// interest often sit many decades below the budget) followed by
/// golden-section refinement around the best few local maxima.
fn maximize_on_segment(hi: f64, f: impl Fn(f64) -> f64) -> (f64, f64) {
    const LOG_POINTS: usize = 240;
    const LIN_POINTS: usize = 120;
    const DECADES: f64 = 12.0;
    const REFINE: usize = 3;

    let mut xs = Vec::with_capacity(LOG_POINTS + LIN_POINTS + 1);
    xs.push(0.0);
    for k in 0..LOG_POINTS {
        let e = -DECADES + DECADES * k as f64 / (LOG_POINTS - 1) as f64;
        xs.push(hi * 10f64.powf(e));
    }
    for k in 1..=LIN_POINTS {
        xs.push(hi * k as f64 / LIN_POINTS as f64);
    }
    xs.push(hi);
    xs.sort_by(f64::total_cmp);
    xs.dedup();

    let vals: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let mut best = (xs[0], vals[0]);
    for (&x, &v) in xs.iter().zip(&vals) {
        if v > best.1 {
            best = (x, v);
        }
    }

    // local maxima of the scan, best first
    let n = xs.len();
    let mut peaks: Vec<usize> = (0..n)
        .filter(|&i| (i == 0 || vals[i] >= vals[i - 1]) && (i + 1 == n || vals[i] >= vals[i + 1]))
        .collect();
    peaks.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]).then(a.cmp(&b)));

    for &i in peaks.iter().take(REFINE) {
        let lo = xs[i.saturating_sub(1)];
        let up = xs[(i + 1).min(n - 1)];
        let (x, v) = golden_section(lo, up, &f);
        if v > best.1 {
            best = (x, v);
        }
    }
    best
}

fn golden_section(mut a: f64, mut b: f64, f: &impl Fn(f64) -> f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..80 {
        if b - a <= f64::EPSILON * b.abs().max(f64::MIN_POSITIVE) {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc > fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Exhaustive search over the uniform `grid_n x grid_n` grid of private
/// powers. Ties go to the smallest `p1p`, then the smallest `p2p`, so the
/// result does not depend on how rows are distributed across threads.
pub fn brute_force_split(
    gains: &ChannelGains,
    budget: &PowerBudget,
    grid_n: usize,
) -> Result<AllocationResult> {
    if grid_n < 2 {
        return Err(Error::invalid(format!("grid_n must be >= 2, got {grid_n}")));
    }
    let lb = link_budget(gains, budget)?;
    let last = grid_n - 1;
    let level = |i: usize, p: f64| {
        if i == last {
            p
        } else {
            p * i as f64 / last as f64
        }
    };

    // (value, i, j)
    let better = |a: (f64, usize, usize), b: (f64, usize, usize)| {
        if b.0 > a.0 || (b.0 == a.0 && (b.1, b.2) < (a.1, a.2)) {
            b
        } else {
            a
        }
    };

    let best = (0..grid_n)
        .into_par_iter()
        .map(|i| {
            let p1p = level(i, budget.p1);
            let mut row_best = (f64::NEG_INFINITY, i, 0);
            for j in 0..grid_n {
                let split = PowerSplit::new(p1p, level(j, budget.p2));
                let v = sum_rate_unchecked(gains, budget, &split);
                if v > row_best.0 {
                    row_best = (v, i, j);
                }
            }
            row_best
        })
        .reduce(|| (f64::NEG_INFINITY, usize::MAX, usize::MAX), better);

    Ok(AllocationResult {
        mode: classify_mode(&lb),
        split: PowerSplit::new(level(best.1, budget.p1), level(best.2, budget.p2)),
        sum_rate: best.0,
    })
}

/// Private power sized so the private layer arrives at the other receiver
/// at noise level (INR of 1), capped by the budget.
pub fn etw_split(gains: &ChannelGains, budget: &PowerBudget) -> Result<PowerSplit> {
    gains.validate()?;
    budget.validate()?;
    Ok(PowerSplit {
        p1p: budget.p1.min(budget.n0 / gains.g21),
        p2p: budget.p2.min(budget.n0 / gains.g12),
    })
}

/// Single-layer reference schemes, bits per channel use.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineRates {
    /// both users at full power, interference treated as noise
    pub tin: f64,
    /// equal time split, each user alone at full power in its slot
    pub orthogonal: f64,
}

pub fn baseline_rates(gains: &ChannelGains, budget: &PowerBudget) -> Result<BaselineRates> {
    let lb = link_budget(gains, budget)?;
    Ok(baseline_rates_from_budget(&lb))
}

pub fn baseline_rates_from_budget(lb: &LinkBudget) -> BaselineRates {
    let c = |x: f64| (1.0 + x).log2();
    BaselineRates {
        tin: c(lb.snr1 / (1.0 + lb.inr1)) + c(lb.snr2 / (1.0 + lb.inr2)),
        orthogonal: 0.5 * c(lb.snr1) + 0.5 * c(lb.snr2),
    }
}
