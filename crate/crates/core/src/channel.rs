//! Two-user Gaussian interference channel with Han-Kobayashi rate splitting.
//!
//! Transmitter `i` sends a private layer (decoded only at receiver `i`) and a
//! common layer (decoded at both receivers). For a given private/common power
//! split this module computes the achievable sum-rate: the two private rates
//! plus the largest common sum-rate inside the intersection of the two
//! receivers' multiple-access regions.
//!
//! Gains are squared magnitudes, powers are linear milliwatts and all rates
//! are in bits per channel use.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "{name} must be finite and > 0, got {v}"
        )))
    }
}

fn check_nonnegative(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "{name} must be finite and >= 0, got {v}"
        )))
    }
}

/// Squared link gains. `gij` is the gain from transmitter `j` to receiver `i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelGains {
    pub g11: f64,
    pub g12: f64,
    pub g21: f64,
    pub g22: f64,
}

impl ChannelGains {
    pub fn new(g11: f64, g12: f64, g21: f64, g22: f64) -> Result<Self> {
        let gains = ChannelGains { g11, g12, g21, g22 };
        gains.validate()?;
        Ok(gains)
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("g11", self.g11)?;
        check_positive("g12", self.g12)?;
        check_positive("g21", self.g21)?;
        check_positive("g22", self.g22)
    }
}

/// Per-user transmit powers and receiver noise power, linear mW.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerBudget {
    pub p1: f64,
    pub p2: f64,
    pub n0: f64,
}

impl PowerBudget {
    pub fn new(p1: f64, p2: f64, n0: f64) -> Result<Self> {
        let budget = PowerBudget { p1, p2, n0 };
        budget.validate()?;
        Ok(budget)
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("p1", self.p1)?;
        check_positive("p2", self.p2)?;
        check_positive("n0", self.n0)
    }
}

/// Receiver-side SNRs and INRs (linear).
///
/// `inr1` is the interference from transmitter 2 seen at receiver 1,
/// `inr2` the interference from transmitter 1 seen at receiver 2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    pub snr1: f64,
    pub snr2: f64,
    pub inr1: f64,
    pub inr2: f64,
}

impl LinkBudget {
    pub fn new(snr1: f64, snr2: f64, inr1: f64, inr2: f64) -> Result<Self> {
        let lb = LinkBudget {
            snr1,
            snr2,
            inr1,
            inr2,
        };
        lb.validate()?;
        Ok(lb)
    }

    pub fn validate(&self) -> Result<()> {
        check_nonnegative("snr1", self.snr1)?;
        check_nonnegative("snr2", self.snr2)?;
        check_nonnegative("inr1", self.inr1)?;
        check_nonnegative("inr2", self.inr2)
    }

    /// Unit-power, unit-noise channel realizing this budget.
    ///
    /// Only valid for strictly positive ratios since gains must be positive.
    pub fn to_channel(&self) -> Result<(ChannelGains, PowerBudget)> {
        let gains = ChannelGains::new(self.snr1, self.inr1, self.inr2, self.snr2)?;
        Ok((gains, PowerBudget::new(1.0, 1.0, 1.0)?))
    }
}

/// Power given to the private layers. Common powers are the remainders
/// `p1 - p1p` and `p2 - p2p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerSplit {
    pub p1p: f64,
    pub p2p: f64,
}

impl PowerSplit {
    pub fn new(p1p: f64, p2p: f64) -> Self {
        PowerSplit { p1p, p2p }
    }

    /// Everything on the common layer.
    pub fn all_common() -> Self {
        PowerSplit { p1p: 0.0, p2p: 0.0 }
    }

    /// Everything on the private layer.
    pub fn all_private(budget: &PowerBudget) -> Self {
        PowerSplit {
            p1p: budget.p1,
            p2p: budget.p2,
        }
    }

    pub fn validate(&self, budget: &PowerBudget) -> Result<()> {
        if !(self.p1p.is_finite() && (0.0..=budget.p1).contains(&self.p1p)) {
            return Err(Error::invalid(format!(
                "private power p1p = {} outside [0, {}]",
                self.p1p, budget.p1
            )));
        }
        if !(self.p2p.is_finite() && (0.0..=budget.p2).contains(&self.p2p)) {
            return Err(Error::invalid(format!(
                "private power p2p = {} outside [0, {}]",
                self.p2p, budget.p2
            )));
        }
        Ok(())
    }
}

/// Interference regime of a two-user channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum InterferenceMode {
    VeryStrong,
    Strong,
    Mixed1,
    Mixed2,
    Weak,
    VeryWeak,
}

impl InterferenceMode {
    pub const ALL: [InterferenceMode; 6] = [
        InterferenceMode::VeryStrong,
        InterferenceMode::Strong,
        InterferenceMode::Mixed1,
        InterferenceMode::Mixed2,
        InterferenceMode::Weak,
        InterferenceMode::VeryWeak,
    ];

    pub fn label(self) -> &'static str {
        match self {
            InterferenceMode::VeryStrong => "verystrong",
            InterferenceMode::Strong => "strong",
            InterferenceMode::Mixed1 => "mixed1",
            InterferenceMode::Mixed2 => "mixed2",
            InterferenceMode::Weak => "weak",
            InterferenceMode::VeryWeak => "veryweak",
        }
    }

    /// Re-checks the defining inequalities of this regime on `lb`,
    /// independently of classification order.
    pub fn conditions_hold(self, lb: &LinkBudget) -> bool {
        let LinkBudget {
            snr1,
            snr2,
            inr1,
            inr2,
        } = *lb;
        let weak_quadrant = snr1 >= inr2 && snr2 >= inr1;
        match self {
            InterferenceMode::VeryStrong => {
                snr1 < inr2 / (1.0 + snr2) && snr2 < inr1 / (1.0 + snr1)
            }
            InterferenceMode::Strong => snr1 < inr2 && snr2 < inr1,
            InterferenceMode::Mixed1 => snr1 >= inr2 && snr2 < inr1,
            InterferenceMode::Mixed2 => snr1 < inr2 && snr2 >= inr1,
            InterferenceMode::Weak => {
                weak_quadrant
                    && match gamma(lb) {
                        Some(g) => g >= 1.0,
                        None => true,
                    }
            }
            InterferenceMode::VeryWeak => weak_quadrant && gamma(lb).is_some_and(|g| g < 1.0),
        }
    }
}

impl fmt::Display for InterferenceMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for InterferenceMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        InterferenceMode::ALL
            .into_iter()
            .find(|m| m.label().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::invalid(format!("unknown interference mode '{s}'")))
    }
}

pub fn link_budget(gains: &ChannelGains, budget: &PowerBudget) -> Result<LinkBudget> {
    gains.validate()?;
    budget.validate()?;
    Ok(LinkBudget {
        snr1: gains.g11 * budget.p1 / budget.n0,
        snr2: gains.g22 * budget.p2 / budget.n0,
        inr1: gains.g12 * budget.p2 / budget.n0,
        inr2: gains.g21 * budget.p1 / budget.n0,
    })
}

/// Threshold statistic separating the very weak regime (`< 1`) from the
/// general weak regime. `None` when the denominator vanishes.
pub fn gamma(lb: &LinkBudget) -> Option<f64> {
    let LinkBudget {
        snr1,
        snr2,
        inr1,
        inr2,
    } = *lb;
    let den = (inr1 - snr2) * (inr2 - snr1);
    if den == 0.0 {
        return None;
    }
    let num = inr1 * inr2 * (snr1 * snr2 - inr1 * inr2 + snr1 - inr2 + snr2 - inr1);
    Some(num / den)
}

/// First match in regime order, with exact comparisons. Inside the weak
/// quadrant a vanishing `gamma` denominator counts as `Weak`.
pub fn classify_mode(lb: &LinkBudget) -> InterferenceMode {
    let LinkBudget {
        snr1,
        snr2,
        inr1,
        inr2,
    } = *lb;
    if snr1 < inr2 / (1.0 + snr2) && snr2 < inr1 / (1.0 + snr1) {
        InterferenceMode::VeryStrong
    } else if snr1 < inr2 && snr2 < inr1 {
        InterferenceMode::Strong
    } else if snr1 >= inr2 && snr2 < inr1 {
        InterferenceMode::Mixed1
    } else if snr1 < inr2 && snr2 >= inr1 {
        InterferenceMode::Mixed2
    } else {
        match gamma(lb) {
            Some(g) if g < 1.0 => InterferenceMode::VeryWeak,
            _ => InterferenceMode::Weak,
        }
    }
}

/// The six common-layer MAC bounds: `a*`/`s1` at receiver 1, `b*`/`s2` at
/// receiver 2. Index 1/2 refers to the transmitter whose common message is
/// bounded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommonRateBounds {
    pub a1: f64,
    pub a2: f64,
    pub s1: f64,
    pub b1: f64,
    pub b2: f64,
    pub s2: f64,
}

#[inline]
fn log2_1p(x: f64) -> f64 {
    x.ln_1p() / std::f64::consts::LN_2
}

#[inline]
fn private_rates_unchecked(g: &ChannelGains, b: &PowerBudget, split: &PowerSplit) -> (f64, f64) {
    let r1 = log2_1p(g.g11 * split.p1p / (g.g12 * split.p2p + b.n0));
    let r2 = log2_1p(g.g22 * split.p2p / (g.g21 * split.p1p + b.n0));
    (r1, r2)
}

#[inline]
fn common_bounds_unchecked(
    g: &ChannelGains,
    b: &PowerBudget,
    split: &PowerSplit,
) -> CommonRateBounds {
    let c1 = b.p1 - split.p1p;
    let c2 = b.p2 - split.p2p;
    let noise1 = g.g11 * split.p1p + g.g12 * split.p2p + b.n0;
    let noise2 = g.g21 * split.p1p + g.g22 * split.p2p + b.n0;
    CommonRateBounds {
        a1: log2_1p(g.g11 * c1 / noise1),
        a2: log2_1p(g.g12 * c2 / noise1),
        s1: log2_1p((g.g11 * c1 + g.g12 * c2) / noise1),
        b1: log2_1p(g.g21 * c1 / noise2),
        b2: log2_1p(g.g22 * c2 / noise2),
        s2: log2_1p((g.g21 * c1 + g.g22 * c2) / noise2),
    }
}

/// Achievable sum-rate of `split` without input validation. Hot path of the
/// grid oracle and the line searches.
#[inline]
pub(crate) fn sum_rate_unchecked(g: &ChannelGains, b: &PowerBudget, split: &PowerSplit) -> f64 {
    let (r1, r2) = private_rates_unchecked(g, b, split);
    r1 + r2 + max_common_sum(&common_bounds_unchecked(g, b, split))
}

fn validate_all(gains: &ChannelGains, budget: &PowerBudget, split: &PowerSplit) -> Result<()> {
    gains.validate()?;
    budget.validate()?;
    split.validate(budget)
}

/// Private-layer rates, decoded after both common layers are cancelled and
/// with the other user's private layer treated as noise.
pub fn private_rates(
    gains: &ChannelGains,
    budget: &PowerBudget,
    split: &PowerSplit,
) -> Result<(f64, f64)> {
    validate_all(gains, budget, split)?;
    Ok(private_rates_unchecked(gains, budget, split))
}

/// Common-layer MAC bounds at both receivers. Both private layers act as
/// background noise in every bound.
pub fn common_rate_bounds(
    gains: &ChannelGains,
    budget: &PowerBudget,
    split: &PowerSplit,
) -> Result<CommonRateBounds> {
    validate_all(gains, budget, split)?;
    Ok(common_bounds_unchecked(gains, budget, split))
}

/// Largest `R1c + R2c` in the intersection of the two MAC regions.
#[inline]
pub fn max_common_sum(bounds: &CommonRateBounds) -> f64 {
    bounds
        .s1
        .min(bounds.s2)
        .min(bounds.a1 + bounds.b2)
        .min(bounds.b1 + bounds.a2)
}

/// Achievable sum-rate of a power split: private rates plus the maximal
/// common sum-rate. This is the single objective shared by the optimizer,
/// the grid oracle and the baselines.
pub fn split_sum_rate(
    gains: &ChannelGains,
    budget: &PowerBudget,
    split: &PowerSplit,
) -> Result<f64> {
    validate_all(gains, budget, split)?;
    Ok(sum_rate_unchecked(gains, budget, split))
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-12;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    fn lb(snr1: f64, snr2: f64, inr1: f64, inr2: f64) -> LinkBudget {
        LinkBudget::new(snr1, snr2, inr1, inr2).unwrap()
    }

    #[test]
    fn link_budget_substitution() {
        let g = ChannelGains::new(1.0, 0.5, 0.25, 2.0).unwrap();
        let b = PowerBudget::new(4.0, 2.0, 1.0).unwrap();
        let l = link_budget(&g, &b).unwrap();
        assert_eq!(l, lb(4.0, 4.0, 1.0, 1.0));

        let g = ChannelGains::new(1.0, 1.0, 1.0, 1.0).unwrap();
        let b = PowerBudget::new(1.0, 1.0, 1.0).unwrap();
        assert_eq!(link_budget(&g, &b).unwrap(), lb(1.0, 1.0, 1.0, 1.0));

        let g = ChannelGains::new(1.0, 1e-12, 1.0, 1.0).unwrap();
        let l = link_budget(&g, &b).unwrap();
        assert_eq!(l, lb(1.0, 1.0, 1e-12, 1.0));
    }

    #[test]
    fn link_budget_rejects_bad_inputs() {
        let b = PowerBudget {
            p1: 1.0,
            p2: 1.0,
            n0: 1.0,
        };
        for bad in [0.0, -1.0, f64::NAN, f64::INFINITY] {
            let g = ChannelGains {
                g11: 1.0,
                g12: bad,
                g21: 1.0,
                g22: 1.0,
            };
            assert!(matches!(link_budget(&g, &b), Err(Error::InvalidInput(_))));
        }
        let g = ChannelGains {
            g11: 1.0,
            g12: 1.0,
            g21: 1.0,
            g22: 1.0,
        };
        let b = PowerBudget {
            p1: 1.0,
            p2: 1.0,
            n0: 0.0,
        };
        assert!(link_budget(&g, &b).is_err());
        assert!(LinkBudget::new(-1.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn classify_examples() {
        assert_eq!(
            classify_mode(&lb(2.0, 3.0, 20.0, 30.0)),
            InterferenceMode::VeryStrong
        );

        let weak = lb(10.0, 10.0, 1.0, 1.0);
        assert!(close(gamma(&weak).unwrap(), 117.0 / 81.0, TOL));
        assert_eq!(classify_mode(&weak), InterferenceMode::Weak);

        let very_weak = lb(10.0, 10.0, 0.1, 0.1);
        // 0.01 * (100 - 0.01 + 9.9 + 9.9) / 98.01
        assert!(close(
            gamma(&very_weak).unwrap(),
            0.01 * 119.79 / 98.01,
            1e-12
        ));
        assert_eq!(classify_mode(&very_weak), InterferenceMode::VeryWeak);

        assert_eq!(
            classify_mode(&lb(2.0, 2.0, 4.0, 4.0)),
            InterferenceMode::Strong
        );
        assert_eq!(
            classify_mode(&lb(15.0, 8.0, 20.0, 2.0)),
            InterferenceMode::Mixed1
        );
        assert_eq!(
            classify_mode(&lb(8.0, 15.0, 2.0, 20.0)),
            InterferenceMode::Mixed2
        );
    }

    #[test]
    fn gamma_boundary_is_weak() {
        // inr1 == snr2 zeroes the denominator while staying in the weak quadrant.
        let l = lb(5.0, 3.0, 3.0, 1.0);
        assert!(gamma(&l).is_none());
        assert_eq!(classify_mode(&l), InterferenceMode::Weak);
        assert!(InterferenceMode::Weak.conditions_hold(&l));
    }

    #[test]
    fn private_rate_examples() {
        let g = ChannelGains::new(1.0, 0.5, 0.25, 2.0).unwrap();
        let b = PowerBudget::new(4.0, 2.0, 1.0).unwrap();
        let (r1, r2) = private_rates(&g, &b, &PowerSplit::new(4.0, 0.0)).unwrap();
        assert!(close(r1, 5f64.log2(), TOL));
        assert_eq!(r2, 0.0);

        let (r1, r2) = private_rates(&g, &b, &PowerSplit::all_common()).unwrap();
        assert_eq!((r1, r2), (0.0, 0.0));

        let g = ChannelGains::new(1.0, 1.0, 1.0, 1.0).unwrap();
        let b = PowerBudget::new(1.0, 1.0, 1.0).unwrap();
        let (r1, r2) = private_rates(&g, &b, &PowerSplit::new(1.0, 1.0)).unwrap();
        assert!(close(r1, 1.5f64.log2(), TOL));
        assert!(close(r2, 1.5f64.log2(), TOL));
    }

    #[test]
    fn split_outside_budget_is_rejected() {
        let g = ChannelGains::new(1.0, 1.0, 1.0, 1.0).unwrap();
        let b = PowerBudget::new(1.0, 1.0, 1.0).unwrap();
        assert!(split_sum_rate(&g, &b, &PowerSplit::new(1.5, 0.0)).is_err());
        assert!(split_sum_rate(&g, &b, &PowerSplit::new(0.0, -0.1)).is_err());
        assert!(private_rates(&g, &b, &PowerSplit::new(f64::NAN, 0.0)).is_err());
    }

    #[test]
    fn common_bound_examples() {
        let g = ChannelGains::new(1.0, 0.5, 0.25, 2.0).unwrap();
        let b = PowerBudget::new(4.0, 2.0, 1.0).unwrap();
        let full = common_rate_bounds(&g, &b, &PowerSplit::all_private(&b)).unwrap();
        for v in [full.a1, full.a2, full.s1, full.b1, full.b2, full.s2] {
            assert_eq!(v, 0.0);
        }

        let c = common_rate_bounds(&g, &b, &PowerSplit::all_common()).unwrap();
        assert!(close(c.a1, 5f64.log2(), TOL));
        assert!(close(c.a2, 1.0, TOL));
        assert!(close(c.s1, 6f64.log2(), TOL));
        assert!(c.s1 <= c.a1 + c.a2 && c.s2 <= c.b1 + c.b2);

        let g = ChannelGains::new(1.0, 1.0, 1.0, 1.0).unwrap();
        let b = PowerBudget::new(1.0, 1.0, 1.0).unwrap();
        let c = common_rate_bounds(&g, &b, &PowerSplit::all_common()).unwrap();
        for v in [c.a1, c.a2, c.b1, c.b2] {
            assert!(close(v, 1.0, TOL));
        }
        assert!(close(c.s1, 3f64.log2(), TOL));
        assert!(close(c.s2, 3f64.log2(), TOL));
    }

    #[test]
    fn max_common_sum_examples() {
        let b = CommonRateBounds {
            a1: 1.0,
            a2: 2.0,
            s1: 2.5,
            b1: 1.5,
            b2: 1.0,
            s2: 2.2,
        };
        assert_eq!(max_common_sum(&b), 2.0);
        let zero = CommonRateBounds {
            a1: 0.0,
            a2: 0.0,
            s1: 0.0,
            b1: 0.0,
            b2: 0.0,
            s2: 0.0,
        };
        assert_eq!(max_common_sum(&zero), 0.0);
        let l3 = 3f64.log2();
        let sym = CommonRateBounds {
            a1: 1.0,
            a2: 1.0,
            s1: l3,
            b1: 1.0,
            b2: 1.0,
            s2: l3,
        };
        assert_eq!(max_common_sum(&sym), l3);
    }

    #[test]
    fn split_sum_rate_examples() {
        let g = ChannelGains::new(1.0, 1.0, 1.0, 1.0).unwrap();
        let b = PowerBudget::new(1.0, 1.0, 1.0).unwrap();
        let r = split_sum_rate(&g, &b, &PowerSplit::all_common()).unwrap();
        assert!(close(r, 3f64.log2(), TOL));
        let r = split_sum_rate(&g, &b, &PowerSplit::new(1.0, 1.0)).unwrap();
        assert!(close(r, 2.0 * 1.5f64.log2(), TOL));

        let g = ChannelGains::new(3.0, 1e-12, 1e-12, 7.0).unwrap();
        let r = split_sum_rate(&g, &b, &PowerSplit::all_private(&b)).unwrap();
        assert!(close(r, 4f64.log2() + 8f64.log2(), 1e-9));
    }

    #[test]
    fn mode_labels_round_trip() {
        for m in InterferenceMode::ALL {
            assert_eq!(m.label().parse::<InterferenceMode>().unwrap(), m);
        }
        assert!("medium".parse::<InterferenceMode>().is_err());
    }
}
