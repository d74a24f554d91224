//! Experiment configuration: `key = value` lines with `#` comments.
//!
//! Unset keys keep their defaults; [`ExperimentConfig::resolved_entries`]
//! lists every effective value so outputs can record them.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geometry::{Direction, NetworkConfig, Position};
use crate::optimizer::DEFAULT_GRID_N;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExperimentKind {
    Rate,
    ModeMap,
    Sweep,
    Kcell,
}

impl ExperimentKind {
    pub fn label(self) -> &'static str {
        match self {
            ExperimentKind::Rate => "rate",
            ExperimentKind::ModeMap => "mode-map",
            ExperimentKind::Sweep => "sweep",
            ExperimentKind::Kcell => "kcell",
        }
    }

    /// Link direction used when the configuration does not set one.
    pub fn default_direction(self) -> Direction {
        match self {
            ExperimentKind::Sweep => Direction::Uplink,
            _ => Direction::Downlink,
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rate" => Ok(ExperimentKind::Rate),
            "mode-map" => Ok(ExperimentKind::ModeMap),
            "sweep" => Ok(ExperimentKind::Sweep),
            "kcell" => Ok(ExperimentKind::Kcell),
            _ => Err(Error::Config(format!("unknown experiment '{s}'"))),
        }
    }
}

/// Rate scheme evaluated by the `rate` experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    Hk,
    Etw,
    Tin,
    Orthogonal,
    Oracle,
}

impl Scheme {
    pub fn label(self) -> &'static str {
        match self {
            Scheme::Hk => "hk",
            Scheme::Etw => "etw",
            Scheme::Tin => "tin",
            Scheme::Orthogonal => "orthogonal",
            Scheme::Oracle => "oracle",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hk" => Ok(Scheme::Hk),
            "etw" => Ok(Scheme::Etw),
            "tin" => Ok(Scheme::Tin),
            "orthogonal" | "orth" => Ok(Scheme::Orthogonal),
            "oracle" => Ok(Scheme::Oracle),
            _ => Err(Error::Config(format!("unknown scheme '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub network: NetworkConfig,
    /// `None` selects [`ExperimentKind::default_direction`].
    pub direction: Option<Direction>,
    pub seed: u64,
    pub scheme: Scheme,
    pub grid_n: usize,
    /// SUE offset from its SAP in the mode map and sweep.
    pub sue_offset_m: f64,
    pub sue_offset_deg: f64,
    /// SAP of the mode-map template.
    pub map_sap: Position,
    pub resolution: usize,
    /// Fixed MUE of the sweep.
    pub sweep_mue: Position,
    /// Bearing of the ray the SAP travels along in the sweep.
    pub sweep_angle_deg: f64,
    pub d_min_m: f64,
    pub d_max_m: f64,
    pub steps: usize,
    pub kmax: usize,
    pub trials: usize,
    /// MUE distance from the MBS in the multi-cell experiment, as a
    /// fraction of the cell radius.
    pub mue_radius_fraction: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            network: NetworkConfig::default(),
            direction: None,
            seed: 0,
            scheme: Scheme::Hk,
            grid_n: DEFAULT_GRID_N,
            sue_offset_m: 40.0,
            sue_offset_deg: 0.0,
            map_sap: Position::new(200.0, 200.0),
            resolution: 201,
            sweep_mue: Position::new(70.0, 12.0),
            sweep_angle_deg: 0.0,
            d_min_m: 35.0,
            d_max_m: 500.0,
            steps: 200,
            kmax: 10,
            trials: 100,
            mue_radius_fraction: 2.0 / 3.0,
        }
    }
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse::<T>()
        .map_err(|_| Error::Config(format!("invalid value '{value}' for '{key}'")))
}

impl ExperimentConfig {
    /// Defaults overridden by the `key = value` lines of `text`.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: idx + 1,
                msg: format!("expected `key = value`, got '{line}'"),
            })?;
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let net = &mut self.network;
        match key {
            "mbs_power_dbm" => net.mbs_power_dbm = parse_num(key, value)?,
            "sap_power_dbm" => net.sap_power_dbm = parse_num(key, value)?,
            "ue_power_dbm" => net.ue_power_dbm = parse_num(key, value)?,
            "cell_radius_m" => net.cell_radius_m = parse_num(key, value)?,
            "edge_snr_db" => net.edge_snr_db = parse_num(key, value)?,
            "small_cell_radius_m" => net.small_cell_radius_m = parse_num(key, value)?,
            "min_mbs_distance_m" => net.min_mbs_distance_m = parse_num(key, value)?,
            "grid_spacing_m" => net.grid_spacing_m = parse_num(key, value)?,
            "direction" => self.direction = Some(value.parse()?),
            "seed" => self.seed = parse_num(key, value)?,
            "scheme" => self.scheme = value.parse()?,
            "grid_n" => self.grid_n = parse_num(key, value)?,
            "sue_offset_m" => self.sue_offset_m = parse_num(key, value)?,
            "sue_offset_deg" => self.sue_offset_deg = parse_num(key, value)?,
            "map_sap_x_m" => self.map_sap.x = parse_num(key, value)?,
            "map_sap_y_m" => self.map_sap.y = parse_num(key, value)?,
            "resolution" => self.resolution = parse_num(key, value)?,
            "sweep_mue_x_m" => self.sweep_mue.x = parse_num(key, value)?,
            "sweep_mue_y_m" => self.sweep_mue.y = parse_num(key, value)?,
            "sweep_angle_deg" => self.sweep_angle_deg = parse_num(key, value)?,
            "d_min_m" => self.d_min_m = parse_num(key, value)?,
            "d_max_m" => self.d_max_m = parse_num(key, value)?,
            "steps" => self.steps = parse_num(key, value)?,
            "kmax" => self.kmax = parse_num(key, value)?,
            "trials" => self.trials = parse_num(key, value)?,
            "mue_radius_fraction" => self.mue_radius_fraction = parse_num(key, value)?,
            _ => return Err(Error::Config(format!("unknown configuration key '{key}'"))),
        }
        Ok(())
    }

    pub fn direction_for(&self, kind: ExperimentKind) -> Direction {
        self.direction.unwrap_or_else(|| kind.default_direction())
    }

    pub fn validate(&self) -> Result<()> {
        self.network.validate()?;
        let finite = [
            ("sue_offset_m", self.sue_offset_m),
            ("sue_offset_deg", self.sue_offset_deg),
            ("map_sap_x_m", self.map_sap.x),
            ("map_sap_y_m", self.map_sap.y),
            ("sweep_mue_x_m", self.sweep_mue.x),
            ("sweep_mue_y_m", self.sweep_mue.y),
            ("sweep_angle_deg", self.sweep_angle_deg),
            ("d_min_m", self.d_min_m),
            ("d_max_m", self.d_max_m),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(Error::Config(format!("{name} must be finite")));
            }
        }
        if self.grid_n < 2 {
            return Err(Error::Config("grid_n must be >= 2".into()));
        }
        if self.resolution < 2 {
            return Err(Error::Config("resolution must be >= 2".into()));
        }
        if self.steps < 2 {
            return Err(Error::Config("steps must be >= 2".into()));
        }
        if self.kmax < 1 || self.trials < 1 {
            return Err(Error::Config("kmax and trials must be >= 1".into()));
        }
        if !(self.d_min_m > 0.0 && self.d_min_m < self.d_max_m) {
            return Err(Error::Config("need 0 < d_min_m < d_max_m".into()));
        }
        if self.sue_offset_m <= 0.0 {
            return Err(Error::Config("sue_offset_m must be > 0".into()));
        }
        if !(self.mue_radius_fraction > 0.0 && self.mue_radius_fraction <= 1.0) {
            return Err(Error::Config(
                "mue_radius_fraction must be in (0, 1]".into(),
            ));
        }
        Ok(())
    }

    /// Every effective setting as `(key, value)`, direction resolved for `kind`.
    pub fn resolved_entries(&self, kind: ExperimentKind) -> Vec<(&'static str, String)> {
        let n = &self.network;
        vec![
            ("mbs_power_dbm", n.mbs_power_dbm.to_string()),
            ("sap_power_dbm", n.sap_power_dbm.to_string()),
            ("ue_power_dbm", n.ue_power_dbm.to_string()),
            ("cell_radius_m", n.cell_radius_m.to_string()),
            ("edge_snr_db", n.edge_snr_db.to_string()),
            ("small_cell_radius_m", n.small_cell_radius_m.to_string()),
            ("min_mbs_distance_m", n.min_mbs_distance_m.to_string()),
            ("grid_spacing_m", n.grid_spacing_m.to_string()),
            ("noise_dbm", n.noise_dbm().to_string()),
            ("direction", self.direction_for(kind).to_string()),
            ("seed", self.seed.to_string()),
            ("scheme", self.scheme.to_string()),
            ("grid_n", self.grid_n.to_string()),
            ("sue_offset_m", self.sue_offset_m.to_string()),
            ("sue_offset_deg", self.sue_offset_deg.to_string()),
            ("map_sap_x_m", self.map_sap.x.to_string()),
            ("map_sap_y_m", self.map_sap.y.to_string()),
            ("resolution", self.resolution.to_string()),
            ("sweep_mue_x_m", self.sweep_mue.x.to_string()),
            ("sweep_mue_y_m", self.sweep_mue.y.to_string()),
            ("sweep_angle_deg", self.sweep_angle_deg.to_string()),
            ("d_min_m", self.d_min_m.to_string()),
            ("d_max_m", self.d_max_m.to_string()),
            ("steps", self.steps.to_string()),
            ("kmax", self.kmax.to_string()),
            ("trials", self.trials.to_string()),
            ("mue_radius_fraction", self.mue_radius_fraction.to_string()),
        ]
    }
}
