//! Macro-cell / small-cell network geometry and link budgets.
//!
//! The MBS sits at the origin. Every access point (MBS or SAP) serves one
//! user: the MUE or its SUE. Channel gains are deterministic 3GPP path loss,
//! identical in both directions. With `K` small cells each SAP/SUE pair
//! forms a two-user interference channel with the macro link, where the
//! remaining small cells are folded into the noise floor.

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel::{classify_mode, ChannelGains, InterferenceMode, LinkBudget, PowerBudget};
use crate::error::{Error, Result};

/// Rejection-sampling cap for [`place_sue`].
pub const MAX_PLACEMENT_ATTEMPTS: usize = 10_000;

/// Smallest SAP-SUE separation accepted by [`place_sue`], meters.
pub const MIN_SUE_SAP_DISTANCE_M: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub const ORIGIN: Position = Position { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Position { x, y }
    }

    pub fn polar(r: f64, angle_rad: f64) -> Self {
        Position {
            x: r * angle_rad.cos(),
            y: r * angle_rad.sin(),
        }
    }

    pub fn distance_to(&self, other: &Position) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// Distance to the MBS.
    pub fn radius(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn offset(&self, dx: f64, dy: f64) -> Position {
        Position {
            x: self.x + dx,
            y: self.y + dy,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkKind {
    MbsToUe,
    SapToUe,
}

/// 3GPP path loss in dB for a link of `distance_m` meters.
pub fn path_loss_db(kind: LinkKind, distance_m: f64) -> Result<f64> {
    if !(distance_m.is_finite() && distance_m > 0.0) {
        return Err(Error::invalid(format!(
            "link distance must be finite and > 0, got {distance_m}"
        )));
    }
    Ok(match kind {
        LinkKind::MbsToUe => 15.3 + 37.6 * distance_m.log10(),
        LinkKind::SapToUe => 30.6 + 36.7 * distance_m.log10(),
    })
}

/// Linear power gain of a link.
pub fn channel_gain(kind: LinkKind, distance_m: f64) -> Result<f64> {
    Ok(db_to_linear(-path_loss_db(kind, distance_m)?))
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Downlink,
    Uplink,
}

impl Direction {
    pub fn label(self) -> &'static str {
        match self {
            Direction::Downlink => "downlink",
            Direction::Uplink => "uplink",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "downlink" | "dl" => Ok(Direction::Downlink),
            "uplink" | "ul" => Ok(Direction::Uplink),
            _ => Err(Error::Config(format!("unknown direction '{s}'"))),
        }
    }
}

/// Radio and cell-layout constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkConfig {
    pub mbs_power_dbm: f64,
    pub sap_power_dbm: f64,
    pub ue_power_dbm: f64,
    pub cell_radius_m: f64,
    pub edge_snr_db: f64,
    pub small_cell_radius_m: f64,
    pub min_mbs_distance_m: f64,
    pub grid_spacing_m: f64,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        NetworkConfig {
            mbs_power_dbm: 46.0,
            sap_power_dbm: 30.0,
            ue_power_dbm: 23.0,
            cell_radius_m: 500.0,
            edge_snr_db: 5.0,
            small_cell_radius_m: 60.0,
            min_mbs_distance_m: 35.0,
            grid_spacing_m: 120.0,
        }
    }
}

impl NetworkConfig {
    pub fn validate(&self) -> Result<()> {
        let levels = [
            ("mbs_power_dbm", self.mbs_power_dbm),
            ("sap_power_dbm", self.sap_power_dbm),
            ("ue_power_dbm", self.ue_power_dbm),
            ("edge_snr_db", self.edge_snr_db),
        ];
        for (name, v) in levels {
            if !v.is_finite() {
                return Err(Error::Config(format!("{name} must be finite, got {v}")));
            }
        }
        let fields = [
            ("cell_radius_m", self.cell_radius_m),
            ("small_cell_radius_m", self.small_cell_radius_m),
            ("min_mbs_distance_m", self.min_mbs_distance_m),
            ("grid_spacing_m", self.grid_spacing_m),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!(
                    "{name} must be finite and > 0, got {v}"
                )));
            }
        }
        if self.min_mbs_distance_m >= self.cell_radius_m {
            return Err(Error::Config(format!(
                "min_mbs_distance_m ({}) must be below cell_radius_m ({})",
                self.min_mbs_distance_m, self.cell_radius_m
            )));
        }
        Ok(())
    }

    /// Noise power in dBm such that a user at the cell edge sees
    /// `edge_snr_db` from the MBS.
    pub fn noise_dbm(&self) -> f64 {
        let edge_loss = 15.3 + 37.6 * self.cell_radius_m.log10();
        self.mbs_power_dbm - edge_loss - self.edge_snr_db
    }

    pub fn noise_mw(&self) -> f64 {
        db_to_linear(self.noise_dbm())
    }

    /// Whether a non-MBS node sits inside the usable annulus of the cell.
    pub fn in_annulus(&self, p: &Position) -> bool {
        let r = p.radius();
        r >= self.min_mbs_distance_m && r <= self.cell_radius_m
    }
}

/// Noise power in dBm calibrated from the cell-edge SNR.
pub fn calibrate_noise(config: &NetworkConfig) -> Result<f64> {
    config.validate()?;
    Ok(config.noise_dbm())
}

/// One MUE plus `K` SAP/SUE pairs; `sues[k]` is served by `saps[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkLayout {
    pub mue: Position,
    pub saps: Vec<Position>,
    pub sues: Vec<Position>,
    pub direction: Direction,
}

impl NetworkLayout {
    /// Builds a layout without geometric validation; see [`NetworkLayout::validate`].
    pub fn new(
        mue: Position,
        saps: Vec<Position>,
        sues: Vec<Position>,
        direction: Direction,
    ) -> Result<Self> {
        if saps.is_empty() {
            return Err(Error::invalid("layout needs at least one SAP"));
        }
        if saps.len() != sues.len() {
            return Err(Error::invalid(format!(
                "{} SAPs but {} SUEs",
                saps.len(),
                sues.len()
            )));
        }
        let all_finite = std::iter::once(&mue)
            .chain(&saps)
            .chain(&sues)
            .all(|p| p.x.is_finite() && p.y.is_finite());
        if !all_finite {
            return Err(Error::invalid("non-finite node coordinate"));
        }
        Ok(NetworkLayout {
            mue,
            saps,
            sues,
            direction,
        })
    }

    pub fn num_pairs(&self) -> usize {
        self.saps.len()
    }

    /// Checks the annulus constraint for every user and SAP and that each SUE
    /// lies inside its small cell.
    pub fn validate(&self, config: &NetworkConfig) -> Result<()> {
        let nodes = std::iter::once(("MUE", &self.mue))
            .chain(self.saps.iter().map(|p| ("SAP", p)))
            .chain(self.sues.iter().map(|p| ("SUE", p)));
        for (kind, p) in nodes {
            if !config.in_annulus(p) {
                return Err(Error::invalid(format!(
                    "{kind} at ({}, {}) is {:.3} m from the MBS, outside [{}, {}]",
                    p.x,
                    p.y,
                    p.radius(),
                    config.min_mbs_distance_m,
                    config.cell_radius_m
                )));
            }
        }
        for (k, (sap, sue)) in self.saps.iter().zip(&self.sues).enumerate() {
            let d = sap.distance_to(sue);
            if d > config.small_cell_radius_m {
                return Err(Error::invalid(format!(
                    "SUE {k} is {d:.3} m from its SAP, beyond the {} m small cell",
                    config.small_cell_radius_m
                )));
            }
        }
        Ok(())
    }

    /// Parses the `node_type x_m y_m` layout format. SAP and SUE lines are
    /// paired in order of appearance; `#` starts a comment.
    pub fn parse(text: &str, direction: Direction) -> Result<Self> {
        let mut mue = None;
        let mut saps = Vec::new();
        let mut sues = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parse_err = |msg: String| Error::Parse { line: line_no, msg };
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(parse_err(format!(
                    "expected `node_type x_m y_m`, got {} fields",
                    fields.len()
                )));
            }
            let coord = |s: &str| {
                s.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| parse_err(format!("bad coordinate '{s}'")))
            };
            let p = Position::new(coord(fields[1])?, coord(fields[2])?);
            match fields[0].to_ascii_uppercase().as_str() {
                "MUE" => {
                    if mue.replace(p).is_some() {
                        return Err(parse_err("more than one MUE".into()));
                    }
                }
                "SAP" => saps.push(p),
                "SUE" => sues.push(p),
                other => return Err(parse_err(format!("unknown node type '{other}'"))),
            }
        }
        let mue = mue.ok_or_else(|| Error::invalid("layout has no MUE"))?;
        NetworkLayout::new(mue, saps, sues, direction)
    }

    pub fn to_layout_text(&self) -> String {
        let mut out = format!("MUE {} {}\n", self.mue.x, self.mue.y);
        for (sap, sue) in self.saps.iter().zip(&self.sues) {
            out.push_str(&format!(
                "SAP {} {}\nSUE {} {}\n",
                sap.x, sap.y, sue.x, sue.y
            ));
        }
        out
    }
}

/// Effective SNR/INR of the macro link and small link `k`, with the other
/// small cells counted as noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairBudget {
    pub snr_m: f64,
    pub inr_m: f64,
    pub snr_s: f64,
    pub inr_s: f64,
}

impl PairBudget {
    /// Two-user view with the macro link as user 1.
    pub fn to_link_budget(&self) -> LinkBudget {
        LinkBudget {
            snr1: self.snr_m,
            snr2: self.snr_s,
            inr1: self.inr_m,
            inr2: self.inr_s,
        }
    }

    pub fn mode(&self) -> InterferenceMode {
        classify_mode(&self.to_link_budget())
    }
}

/// Gains (noise-normalized per receiver) and powers of one macro/small pair.
struct PairLinks {
    g11: f64,
    g12: f64,
    g21: f64,
    g22: f64,
    p1: f64,
    p2: f64,
    noise1: f64,
    noise2: f64,
}

fn link_gain(a: &Position, b: &Position, kind: LinkKind) -> Result<f64> {
    channel_gain(kind, a.distance_to(b))
}

fn pair_links(layout: &NetworkLayout, config: &NetworkConfig, k: usize) -> Result<PairLinks> {
    let count = layout.num_pairs();
    if k >= count {
        return Err(Error::PairIndex { index: k, count });
    }
    config.validate()?;
    let n0 = config.noise_mw();
    let mbs = Position::ORIGIN;
    let others = || (0..count).filter(move |&j| j != k);

    match layout.direction {
        Direction::Downlink => {
            let pm = db_to_linear(config.mbs_power_dbm);
            let ps = db_to_linear(config.sap_power_dbm);
            let mut noise1 = n0;
            for j in others() {
                noise1 += link_gain(&layout.saps[j], &layout.mue, LinkKind::SapToUe)? * ps;
            }
            let mut noise2 = n0;
            for j in others() {
                noise2 += link_gain(&layout.saps[j], &layout.sues[k], LinkKind::SapToUe)? * ps;
            }
            Ok(PairLinks {
                g11: link_gain(&mbs, &layout.mue, LinkKind::MbsToUe)?,
                g12: link_gain(&layout.saps[k], &layout.mue, LinkKind::SapToUe)?,
                g21: link_gain(&mbs, &layout.sues[k], LinkKind::MbsToUe)?,
                g22: link_gain(&layout.saps[k], &layout.sues[k], LinkKind::SapToUe)?,
                p1: pm,
                p2: ps,
                noise1,
                noise2,
            })
        }
        Direction::Uplink => {
            let pu = db_to_linear(config.ue_power_dbm);
            let mut noise1 = n0;
            for j in others() {
                noise1 += link_gain(&layout.sues[j], &mbs, LinkKind::MbsToUe)? * pu;
            }
            let mut noise2 = n0;
            for j in others() {
                noise2 += link_gain(&layout.sues[j], &layout.saps[k], LinkKind::SapToUe)? * pu;
            }
            Ok(PairLinks {
                g11: link_gain(&layout.mue, &mbs, LinkKind::MbsToUe)?,
                g12: link_gain(&layout.sues[k], &mbs, LinkKind::MbsToUe)?,
                g21: link_gain(&layout.mue, &layout.saps[k], LinkKind::SapToUe)?,
                g22: link_gain(&layout.sues[k], &layout.saps[k], LinkKind::SapToUe)?,
                p1: pu,
                p2: pu,
                noise1,
                noise2,
            })
        }
    }
}

/// SNR/INR quadruple of pair `k` (0-based).
pub fn pair_budget(layout: &NetworkLayout, config: &NetworkConfig, k: usize) -> Result<PairBudget> {
    let l = pair_links(layout, config, k)?;
    Ok(PairBudget {
        snr_m: l.g11 * l.p1 / l.noise1,
        inr_m: l.g12 * l.p2 / l.noise1,
        snr_s: l.g22 * l.p2 / l.noise2,
        inr_s: l.g21 * l.p1 / l.noise2,
    })
}

/// Two-user channel of pair `k` with the macro link as user 1.
///
/// The noise power is the calibrated `N0`; gains into each receiver are
/// scaled by `N0 / (N0 + other-cell interference)` so that
/// [`crate::channel::link_budget`] reproduces [`pair_budget`]. With a single
/// small cell the gains are the raw path-loss gains.
pub fn pair_channel(
    layout: &NetworkLayout,
    config: &NetworkConfig,
    k: usize,
) -> Result<(ChannelGains, PowerBudget)> {
    let l = pair_links(layout, config, k)?;
    let n0 = config.noise_mw();
    let s1 = n0 / l.noise1;
    let s2 = n0 / l.noise2;
    let gains = ChannelGains::new(l.g11 * s1, l.g12 * s1, l.g21 * s2, l.g22 * s2)?;
    let budget = PowerBudget::new(l.p1, l.p2, n0)?;
    Ok((gains, budget))
}

/// Single-layer rates of a macro/small pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairRates {
    pub mode: InterferenceMode,
    pub r_m: f64,
    pub r_s: f64,
}

/// Per-pair rate rule with one transmit layer per user. Weak pairs fall
/// back to treating interference as noise; strong pairs decode both
/// messages at both receivers, favoring the macro rate.
pub fn pair_rates(pb: &PairBudget) -> PairRates {
    let c = |x: f64| (1.0 + x).log2();
    let PairBudget {
        snr_m,
        inr_m,
        snr_s,
        inr_s,
    } = *pb;
    let mode = pb.mode();
    let (r_m, r_s) = match mode {
        InterferenceMode::VeryStrong => (c(snr_m), c(snr_s)),
        InterferenceMode::Strong => {
            let r_m = c(snr_m).min(c(inr_s));
            let sum = c(snr_m + inr_m).min(c(snr_s + inr_s));
            let cap = c(snr_s).min(c(inr_m));
            (r_m, (sum - r_m).clamp(0.0, cap))
        }
        InterferenceMode::Mixed1 => (
            c(snr_m),
            c(snr_s / (1.0 + inr_s)).min(c(inr_m / (1.0 + snr_m))),
        ),
        InterferenceMode::Mixed2 => (
            c(snr_m / (1.0 + inr_m)).min(c(inr_s / (1.0 + snr_s))),
            c(snr_s),
        ),
        InterferenceMode::Weak | InterferenceMode::VeryWeak => {
            (c(snr_m / (1.0 + inr_m)), c(snr_s / (1.0 + inr_s)))
        }
    };
    PairRates { mode, r_m, r_s }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Throughput {
    /// macro rate: the smallest per-pair macro rate
    pub r_m: f64,
    pub per_sue: Vec<f64>,
    pub total: f64,
}

pub fn network_throughput(layout: &NetworkLayout, config: &NetworkConfig) -> Result<Throughput> {
    let mut r_m = f64::INFINITY;
    let mut per_sue = Vec::with_capacity(layout.num_pairs());
    for k in 0..layout.num_pairs() {
        let rates = pair_rates(&pair_budget(layout, config, k)?);
        r_m = r_m.min(rates.r_m);
        per_sue.push(rates.r_s);
    }
    let total = r_m + per_sue.iter().sum::<f64>();
    Ok(Throughput {
        r_m,
        per_sue,
        total,
    })
}

/// Intersections of the SAP placement grid (anchored at the MBS) that lie
/// in the usable annulus, in row-major order.
pub fn grid_intersections(config: &NetworkConfig) -> Vec<Position> {
    let s = config.grid_spacing_m;
    let n = (config.cell_radius_m / s).floor() as i64;
    let mut points = Vec::new();
    for i in -n..=n {
        for j in -n..=n {
            let p = Position::new(i as f64 * s, j as f64 * s);
            if config.in_annulus(&p) {
                points.push(p);
            }
        }
    }
    points
}

/// `k` distinct grid intersections drawn uniformly without replacement.
pub fn place_saps_grid(config: &NetworkConfig, k: usize, seed: u64) -> Result<Vec<Position>> {
    config.validate()?;
    let points = grid_intersections(config);
    if k > points.len() {
        return Err(Error::Capacity {
            requested: k,
            available: points.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(index::sample(&mut rng, points.len(), k)
        .into_iter()
        .map(|i| points[i])
        .collect())
}

/// Uniform point in the small cell of `sap`, at least 1 m from the SAP and
/// inside the usable annulus of the macro cell.
pub fn place_sue(sap: &Position, config: &NetworkConfig, seed: u64) -> Result<Position> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    place_sue_with(sap, config, &mut rng)
}

pub(crate) fn place_sue_with<R: Rng>(
    sap: &Position,
    config: &NetworkConfig,
    rng: &mut R,
) -> Result<Position> {
    for _ in 0..MAX_PLACEMENT_ATTEMPTS {
        let r = config.small_cell_radius_m * rng.gen::<f64>().sqrt();
        let theta = rng.gen_range(0.0..std::f64::consts::TAU);
        let p = sap.offset(r * theta.cos(), r * theta.sin());
        if r >= MIN_SUE_SAP_DISTANCE_M && config.in_annulus(&p) {
            return Ok(p);
        }
    }
    Err(Error::PlacementExhausted {
        attempts: MAX_PLACEMENT_ATTEMPTS,
    })
}

/// Mixes a base seed with stream indices into an independent 64-bit seed.
pub fn derive_seed(base: u64, streams: &[u64]) -> u64 {
    fn splitmix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
    streams
        .iter()
        .fold(splitmix(base), |acc, &s| splitmix(acc ^ splitmix(s)))
}
