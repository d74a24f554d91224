//! Experiment drivers producing deterministic CSV.
//!
//! Every driver returns typed rows plus a `to_csv` rendering. Work is spread
//! over the current rayon pool, but results are gathered in index order and
//! all randomness is derived from `(seed, indices)`, so the output does not
//! depend on the number of worker threads.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channel::{
    classify_mode, link_budget, split_sum_rate, ChannelGains, InterferenceMode, PowerBudget,
    PowerSplit,
};
use crate::config::{ExperimentConfig, ExperimentKind, Scheme};
use crate::error::{Error, Result};
use crate::geometry::{
    channel_gain, db_to_linear, derive_seed, network_throughput, pair_budget, pair_channel,
    place_saps_grid, place_sue_with, Direction, LinkKind, NetworkLayout, Position,
};
use crate::optimizer::{baseline_rates_from_budget, brute_force_split, etw_split, optimize};

/// Formats `x` with 6 significant digits, `%g` style.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..6).contains(&exp) {
        let m = mantissa.trim_end_matches('0').trim_end_matches('.');
        return format!("{m}e{exp}");
    }
    let decimals = (5 - exp).max(0) as usize;
    let fixed = format!("{x:.decimals$}");
    if fixed.contains('.') {
        fixed
            .trim_end_matches('0')
            .trim_end_matches('.')
            .to_string()
    } else {
        fixed
    }
}

fn csv_header(kind: ExperimentKind, cfg: &ExperimentConfig, extra: &[(&str, String)]) -> String {
    let mut out = format!("# ampshare {kind}\n# resolved-config\n");
    for (k, v) in cfg.resolved_entries(kind) {
        let _ = writeln!(out, "# {k} = {v}");
    }
    for (k, v) in extra {
        let _ = writeln!(out, "# {k} = {v}");
    }
    out
}

/// Input of the `rate` experiment.
#[derive(Debug, Clone)]
pub enum RateInput {
    Channel {
        gains: ChannelGains,
        budget: PowerBudget,
    },
    /// Single-small-cell layout; evaluated as the two-user channel formed
    /// with the macro link.
    Layout(NetworkLayout),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateRow {
    pub scheme: Scheme,
    pub mode: InterferenceMode,
    /// `None` for the orthogonal scheme, which is not a layer split.
    pub split: Option<PowerSplit>,
    pub sum_rate: f64,
}

impl RateRow {
    pub fn csv_line(&self) -> String {
        let (a, b) = match self.split {
            Some(s) => (fmt_sig(s.p1p), fmt_sig(s.p2p)),
            None => (String::new(), String::new()),
        };
        format!("{},{a},{b},{}", self.mode, fmt_sig(self.sum_rate))
    }

    pub fn to_csv(&self, cfg: &ExperimentConfig) -> String {
        let mut out = csv_header(ExperimentKind::Rate, cfg, &[]);
        out.push_str("mode,p1p,p2p,sum_rate\n");
        out.push_str(&self.csv_line());
        out.push('\n');
        out
    }
}

pub fn run_rate(input: &RateInput, scheme: Scheme, cfg: &ExperimentConfig) -> Result<RateRow> {
    let (gains, budget) = match input {
        RateInput::Channel { gains, budget } => (*gains, *budget),
        RateInput::Layout(layout) => {
            if layout.num_pairs() != 1 {
                return Err(Error::invalid(format!(
                    "rate needs a single-small-cell layout, got K = {}",
                    layout.num_pairs()
                )));
            }
            pair_channel(layout, &cfg.network, 0)?
        }
    };
    let lb = link_budget(&gains, &budget)?;
    let mode = classify_mode(&lb);
    let baselines = baseline_rates_from_budget(&lb);
    let (split, sum_rate) = match scheme {
        Scheme::Hk => {
            let r = optimize(&gains, &budget)?;
            (Some(r.split), r.sum_rate)
        }
        Scheme::Oracle => {
            let r = brute_force_split(&gains, &budget, cfg.grid_n)?;
            (Some(r.split), r.sum_rate)
        }
        Scheme::Etw => {
            let s = etw_split(&gains, &budget)?;
            (Some(s), split_sum_rate(&gains, &budget, &s)?)
        }
        Scheme::Tin => (Some(PowerSplit::all_private(&budget)), baselines.tin),
        Scheme::Orthogonal => (None, baselines.orthogonal),
    };
    Ok(RateRow {
        scheme,
        mode,
        split,
        sum_rate,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MapCell {
    pub x: f64,
    pub y: f64,
    /// `None` outside the usable annulus or on top of the SAP/SUE.
    pub mode: Option<InterferenceMode>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeMap {
    pub direction: Direction,
    pub resolution: usize,
    pub sap: Position,
    pub sue: Position,
    /// row-major, `x` varying fastest
    pub cells: Vec<MapCell>,
}

impl ModeMap {
    pub fn distinct_modes(&self) -> Vec<InterferenceMode> {
        let mut modes: Vec<_> = self.cells.iter().filter_map(|c| c.mode).collect();
        modes.sort();
        modes.dedup();
        modes
    }

    pub fn to_csv(&self, cfg: &ExperimentConfig) -> String {
        let extra = [
            ("sap", format!("{} {}", self.sap.x, self.sap.y)),
            ("sue", format!("{} {}", self.sue.x, self.sue.y)),
        ];
        let mut cfg = cfg.clone();
        cfg.direction = Some(self.direction);
        cfg.resolution = self.resolution;
        let mut out = csv_header(ExperimentKind::ModeMap, &cfg, &extra);
        out.push_str("x,y,mode\n");
        for c in &self.cells {
            let label = c.mode.map_or("invalid", |m| m.label());
            let _ = writeln!(out, "{},{},{label}", fmt_sig(c.x), fmt_sig(c.y));
        }
        out
    }
}

/// The SAP/SUE pair of the mode-map and sweep templates.
pub fn template_sue(sap: &Position, cfg: &ExperimentConfig) -> Position {
    let off = Position::polar(cfg.sue_offset_m, cfg.sue_offset_deg.to_radians());
    sap.offset(off.x, off.y)
}

/// Classifies the interference mode with the MUE at every point of a
/// `resolution x resolution` grid over the macro cell. SAP and SUE are taken
/// from `template` (its MUE is ignored) or, without one, from the
/// configured map SAP and SUE offset.
pub fn run_mode_map(
    template: Option<&NetworkLayout>,
    direction: Direction,
    resolution: usize,
    cfg: &ExperimentConfig,
) -> Result<ModeMap> {
    cfg.validate()?;
    if resolution < 2 {
        return Err(Error::Config("resolution must be >= 2".into()));
    }
    let (sap, sue) = match template {
        Some(t) if t.num_pairs() == 1 => (t.saps[0], t.sues[0]),
        Some(t) => {
            return Err(Error::invalid(format!(
                "mode map needs a single-small-cell template, got K = {}",
                t.num_pairs()
            )))
        }
        None => (cfg.map_sap, template_sue(&cfg.map_sap, cfg)),
    };
    let net = cfg.network;
    let radius = net.cell_radius_m;
    let coord = |i: usize| -radius + 2.0 * radius * i as f64 / (resolution - 1) as f64;

    let rows: Vec<Vec<MapCell>> = (0..resolution)
        .into_par_iter()
        .map(|row| -> Result<Vec<MapCell>> {
            let y = coord(row);
            (0..resolution)
                .map(|col| {
                    let x = coord(col);
                    let mue = Position::new(x, y);
                    let usable = net.in_annulus(&mue)
                        && mue.distance_to(&sap) >= 1.0
                        && mue.distance_to(&sue) >= 1.0;
                    let mode = if usable {
                        let layout = NetworkLayout::new(mue, vec![sap], vec![sue], direction)?;
                        Some(pair_budget(&layout, &net, 0)?.mode())
                    } else {
                        None
                    };
                    Ok(MapCell { x, y, mode })
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    Ok(ModeMap {
        direction,
        resolution,
        sap,
        sue,
        cells: rows.into_iter().flatten().collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    /// SAP distance from the MBS, meters
    pub d: f64,
    pub mode: InterferenceMode,
    pub r_hk: f64,
    pub r_etw: f64,
    pub r_tin: f64,
    pub r_orth: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub direction: Direction,
    pub rows: Vec<SweepRow>,
}

impl Sweep {
    /// Consecutive distinct modes along the sweep.
    pub fn mode_segments(&self) -> Vec<InterferenceMode> {
        let mut segs: Vec<InterferenceMode> = Vec::new();
        for r in &self.rows {
            if segs.last() != Some(&r.mode) {
                segs.push(r.mode);
            }
        }
        segs
    }

    pub fn to_csv(&self, cfg: &ExperimentConfig) -> String {
        let mut cfg = cfg.clone();
        cfg.direction = Some(self.direction);
        cfg.steps = self.rows.len();
        let mut out = csv_header(ExperimentKind::Sweep, &cfg, &[]);
        out.push_str("d,mode,r_hk,r_etw,r_tin,r_orth\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                fmt_sig(r.d),
                r.mode,
                fmt_sig(r.r_hk),
                fmt_sig(r.r_etw),
                fmt_sig(r.r_tin),
                fmt_sig(r.r_orth)
            );
        }
        out
    }
}

/// Moves the SAP (with its SUE at a fixed offset) from `d_min_m` to
/// `d_max_m` along the configured bearing and evaluates every scheme on the
/// resulting two-user channel.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<Sweep> {
    cfg.validate()?;
    let direction = cfg.direction_for(ExperimentKind::Sweep);
    let steps = cfg.steps;
    let bearing = cfg.sweep_angle_deg.to_radians();

    let rows = (0..steps)
        .into_par_iter()
        .map(|i| -> Result<SweepRow> {
            let d = if i == steps - 1 {
                cfg.d_max_m
            } else {
                cfg.d_min_m + (cfg.d_max_m - cfg.d_min_m) * i as f64 / (steps - 1) as f64
            };
            let sap = Position::polar(d, bearing);
            let sue = template_sue(&sap, cfg);
            let layout = NetworkLayout::new(cfg.sweep_mue, vec![sap], vec![sue], direction)?;
            let (gains, budget) = pair_channel(&layout, &cfg.network, 0)?;
            let lb = link_budget(&gains, &budget)?;
            let hk = optimize(&gains, &budget)?;
            let etw = split_sum_rate(&gains, &budget, &etw_split(&gains, &budget)?)?;
            let base = baseline_rates_from_budget(&lb);
            Ok(SweepRow {
                d,
                mode: hk.mode,
                r_hk: hk.sum_rate,
                r_etw: etw,
                r_tin: base.tin,
                r_orth: base.orthogonal,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(Sweep { direction, rows })
}

/// Rates of one random multi-cell layout.
#[derive(Debug, Clone, PartialEq)]
pub struct KcellTrial {
    pub layout: NetworkLayout,
    pub r_ass: f64,
    pub r_orth: f64,
    pub r_tin: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KcellRow {
    pub k: usize,
    pub r_ass_mean: f64,
    pub r_orth_mean: f64,
    pub r_tin_mean: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KcellSweep {
    pub direction: Direction,
    pub rows: Vec<KcellRow>,
}

impl KcellSweep {
    pub fn to_csv(&self, cfg: &ExperimentConfig) -> String {
        let mut cfg = cfg.clone();
        cfg.direction = Some(self.direction);
        cfg.kmax = self.rows.len();
        let mut out = csv_header(ExperimentKind::Kcell, &cfg, &[]);
        out.push_str("K,r_ass_mean,r_orth_mean,r_tin_mean\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                r.k,
                fmt_sig(r.r_ass_mean),
                fmt_sig(r.r_orth_mean),
                fmt_sig(r.r_tin_mean)
            );
        }
        out
    }
}

/// Seeded random layout with `k` SAPs on the placement grid, one SUE per
/// small cell and the MUE at the configured fraction of the cell radius.
pub fn random_layout(
    cfg: &ExperimentConfig,
    direction: Direction,
    k: usize,
    seed: u64,
) -> Result<NetworkLayout> {
    let net = &cfg.network;
    let saps = place_saps_grid(net, k, derive_seed(seed, &[0]))?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[1]));
    let angle = rng.gen_range(0.0..std::f64::consts::TAU);
    let mue = Position::polar(cfg.mue_radius_fraction * net.cell_radius_m, angle);
    let sues = saps
        .iter()
        .enumerate()
        .map(|(j, sap)| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[2, j as u64]));
            place_sue_with(sap, net, &mut rng)
        })
        .collect::<Result<Vec<_>>>()?;
    NetworkLayout::new(mue, saps, sues, direction)
}

/// ASS throughput and the two multi-cell baselines on one layout.
///
/// Orthogonal: the macro link alone in one slot, all small cells together in
/// the other, each at full power. TIN: every link at full power with all
/// interference treated as noise.
pub fn evaluate_kcell_layout(layout: &NetworkLayout, cfg: &ExperimentConfig) -> Result<KcellTrial> {
    let net = &cfg.network;
    let r_ass = network_throughput(layout, net)?.total;

    let c = |x: f64| (1.0 + x).log2();
    let macro_power = match layout.direction {
        Direction::Downlink => db_to_linear(net.mbs_power_dbm),
        Direction::Uplink => db_to_linear(net.ue_power_dbm),
    };
    let macro_alone =
        channel_gain(LinkKind::MbsToUe, layout.mue.radius())? * macro_power / net.noise_mw();

    let budgets = (0..layout.num_pairs())
        .map(|k| pair_budget(layout, net, k))
        .collect::<Result<Vec<_>>>()?;
    let small_slot: f64 = budgets.iter().map(|pb| c(pb.snr_s)).sum();
    let r_orth = 0.5 * c(macro_alone) + 0.5 * small_slot;

    // snr_m / (1 + inr_m) of any pair is the macro SINR with every SAP interfering
    let first = &budgets[0];
    let r_tin = c(first.snr_m / (1.0 + first.inr_m))
        + budgets
            .iter()
            .map(|pb| c(pb.snr_s / (1.0 + pb.inr_s)))
            .sum::<f64>();

    Ok(KcellTrial {
        layout: layout.clone(),
        r_ass,
        r_orth,
        r_tin,
    })
}

/// Averages ASS, orthogonal and TIN throughput over `trials` random layouts
/// for every `K` in `1..=kmax`.
pub fn run_kcell(cfg: &ExperimentConfig) -> Result<KcellSweep> {
    cfg.validate()?;
    let direction = cfg.direction_for(ExperimentKind::Kcell);
    let mut rows = Vec::with_capacity(cfg.kmax);
    for k in 1..=cfg.kmax {
        let trials = (0..cfg.trials)
            .into_par_iter()
            .map(|t| {
                let seed = derive_seed(cfg.seed, &[k as u64, t as u64]);
                let layout = random_layout(cfg, direction, k, seed)?;
                evaluate_kcell_layout(&layout, cfg)
            })
            .collect::<Result<Vec<_>>>()?;
        let n = trials.len() as f64;
        let mean = |f: fn(&KcellTrial) -> f64| trials.iter().map(f).sum::<f64>() / n;
        rows.push(KcellRow {
            k,
            r_ass_mean: mean(|t| t.r_ass),
            r_orth_mean: mean(|t| t.r_orth),
            r_tin_mean: mean(|t| t.r_tin),
        });
    }
    Ok(KcellSweep { direction, rows })
}

/// Least-squares slope of `ys` against `xs`.
pub fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig_formatting() {
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(fmt_sig(2.0), "2");
        assert_eq!(fmt_sig(7f64.log2()), "2.80735");
        assert_eq!(fmt_sig(35.0), "35");
        assert_eq!(fmt_sig(-75.78127216), "-75.7813");
        assert_eq!(fmt_sig(123456.7), "123457");
        assert_eq!(fmt_sig(999999.7), "1e6");
        assert_eq!(fmt_sig(1234567.0), "1.23457e6");
        assert_eq!(fmt_sig(0.000123456789), "0.000123457");
        assert_eq!(fmt_sig(1.5e-7), "1.5e-7");
    }

    #[test]
    fn rate_examples() {
        let cfg = ExperimentConfig::default();
        let unit = |s1: f64, s2: f64, i1: f64, i2: f64| {
            let (gains, budget) = crate::channel::LinkBudget::new(s1, s2, i1, i2)
                .unwrap()
                .to_channel()
                .unwrap();
            RateInput::Channel { gains, budget }
        };
        let hk = run_rate(&unit(2.0, 2.0, 4.0, 4.0), Scheme::Hk, &cfg).unwrap();
        assert_eq!(hk.csv_line(), "strong,0,0,2.80735");
        let tin = run_rate(&unit(1.0, 1.0, 1.0, 1.0), Scheme::Tin, &cfg).unwrap();
        assert_eq!(fmt_sig(tin.sum_rate), "1.16993");
        let orth = run_rate(&unit(3.0, 3.0, 0.2, 9.0), Scheme::Orthogonal, &cfg).unwrap();
        assert_eq!(orth.csv_line(), "mixed2,,,2");
    }

    #[test]
    fn rate_rejects_multi_cell_layout() {
        let cfg = ExperimentConfig::default();
        let layout = NetworkLayout::new(
            Position::new(300.0, 0.0),
            vec![Position::new(100.0, 0.0), Position::new(-100.0, 0.0)],
            vec![Position::new(120.0, 0.0), Position::new(-120.0, 0.0)],
            Direction::Downlink,
        )
        .unwrap();
        assert!(run_rate(&RateInput::Layout(layout), Scheme::Hk, &cfg).is_err());
    }

    #[test]
    fn small_mode_map_is_total() {
        let cfg = ExperimentConfig::default();
        let map = run_mode_map(None, Direction::Downlink, 21, &cfg).unwrap();
        assert_eq!(map.cells.len(), 21 * 21);
        let corner = &map.cells[0];
        assert_eq!((corner.x, corner.y), (-500.0, -500.0));
        assert!(corner.mode.is_none());
        let centre = &map.cells[10 * 21 + 10];
        assert_eq!((centre.x, centre.y), (0.0, 0.0));
        assert!(centre.mode.is_none());
    }

    #[test]
    fn kcell_single_trial_is_network_throughput() {
        let cfg = ExperimentConfig {
            kmax: 1,
            trials: 1,
            seed: 42,
            ..ExperimentConfig::default()
        };
        let out = run_kcell(&cfg).unwrap();
        let layout = random_layout(&cfg, Direction::Downlink, 1, derive_seed(42, &[1, 0])).unwrap();
        let t = network_throughput(&layout, &cfg.network).unwrap();
        assert_eq!(out.rows[0].r_ass_mean, t.total);
    }

    #[test]
    fn slope_of_line() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys = [3.0, 5.0, 7.0, 9.0];
        assert!((ls_slope(&xs, &ys) - 2.0).abs() < 1e-12);
    }
}
