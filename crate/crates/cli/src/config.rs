//! TOML run configuration.
//!
//! Radio quantities carry their unit in the key (`_dbm`, `_db`, `_ghz`,
//! `_m`, …) and unknown keys are rejected, so a typo never silently falls
//! back to a default.

use std::path::{Path, PathBuf};

use aanet::geo::{self, GeodeticCoord};
use aanet::link::{units, LinkParams, Node, NodeKind, RadioProfile, RateMode};
use aanet::scenario::{Angles, Interval, KindProfiles, Scenario, SyntheticConfig};
use serde::Deserialize;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    #[serde(default)]
    pub link: LinkSection,
    #[serde(default)]
    pub profiles: ProfilesSection,
    #[serde(default)]
    pub synthetic: SyntheticSection,
    /// Explicit nodes; when present they replace the synthetic layout.
    #[serde(default)]
    pub nodes: Vec<NodeSection>,
    pub route: Option<RouteSection>,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub flight: FlightSection,
    /// Directory of the config file; relative paths resolve against it.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LinkSection {
    pub carrier_freq_ghz: f64,
    pub bandwidth_mhz: f64,
    pub noise_power_dbm: f64,
    pub path_loss_exponent: f64,
    pub snr_threshold_db: f64,
    pub df_delay_ms: f64,
    pub file_size_bits: f64,
    /// Fixed per-link rate; omit for the Shannon rate.
    pub fixed_rate_bps: Option<f64>,
}

impl Default for LinkSection {
    fn default() -> Self {
        Self {
            carrier_freq_ghz: 31.0,
            bandwidth_mhz: 200.0,
            noise_power_dbm: -132.0,
            path_loss_exponent: 2.0,
            snr_threshold_db: 0.0,
            df_delay_ms: 20.0,
            file_size_bits: 9000.0,
            fixed_rate_bps: None,
        }
    }
}

impl LinkSection {
    pub fn params(&self) -> Result<LinkParams, ConfigError> {
        let p = LinkParams {
            carrier_freq: self.carrier_freq_ghz * 1e9,
            bandwidth: self.bandwidth_mhz * 1e6,
            noise_power: units::dbm_to_watts(self.noise_power_dbm),
            path_loss_exp: self.path_loss_exponent,
            snr_threshold: units::db_to_linear(self.snr_threshold_db),
            df_delay: self.df_delay_ms * 1e-3,
            file_size: self.file_size_bits,
            rate_mode: self.fixed_rate_bps.map_or(RateMode::Shannon, RateMode::Fixed),
        };
        p.validate().map_err(|e| ConfigError::Invalid(format!("link: {e}")))?;
        Ok(p)
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSection {
    pub tx_power_dbm: f64,
    pub tx_gain_db: f64,
    pub rx_gain_db: f64,
    pub height_m: f64,
}

impl ProfileSection {
    fn reference(kind: NodeKind) -> Self {
        let p = RadioProfile::reference(kind);
        Self {
            tx_power_dbm: units::watts_to_dbm(p.tx_power),
            tx_gain_db: units::linear_to_db(p.tx_gain),
            rx_gain_db: units::linear_to_db(p.rx_gain),
            height_m: p.height,
        }
    }

    pub fn profile(&self) -> RadioProfile {
        RadioProfile {
            tx_power: units::dbm_to_watts(self.tx_power_dbm),
            tx_gain: units::db_to_linear(self.tx_gain_db),
            rx_gain: units::db_to_linear(self.rx_gain_db),
            height: self.height_m,
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProfilesSection {
    pub ground_bs: ProfileSection,
    pub aircraft: ProfileSection,
    pub satellite: ProfileSection,
}

impl Default for ProfilesSection {
    fn default() -> Self {
        Self {
            ground_bs: ProfileSection::reference(NodeKind::GroundBs),
            aircraft: ProfileSection::reference(NodeKind::Aircraft),
            satellite: ProfileSection::reference(NodeKind::Satellite),
        }
    }
}

impl ProfilesSection {
    pub fn kinds(&self) -> KindProfiles {
        KindProfiles {
            ground_bs: self.ground_bs.profile(),
            aircraft: self.aircraft.profile(),
            satellite: self.satellite.profile(),
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnglesDeg {
    pub polar_deg: f64,
    pub azimuth_deg: f64,
}

impl AnglesDeg {
    fn radians(self) -> Angles {
        Angles::new(self.polar_deg.to_radians(), self.azimuth_deg.to_radians())
    }
}

/// A hop count or the keyword `"minimum"`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ChainHops {
    Count(usize),
    Keyword(String),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SyntheticSection {
    pub n_intermediate: usize,
    pub bs: AnglesDeg,
    pub target: AnglesDeg,
    pub include_satellite: bool,
    pub satellite: AnglesDeg,
    pub relay_polar_deg: [f64; 2],
    pub relay_azimuth_deg: [f64; 2],
    pub relay_chain_hops: ChainHops,
}

impl Default for SyntheticSection {
    fn default() -> Self {
        Self {
            n_intermediate: 0,
            bs: AnglesDeg { polar_deg: 0.0, azimuth_deg: 0.0 },
            target: AnglesDeg { polar_deg: 30.0, azimuth_deg: 45.0 },
            include_satellite: true,
            satellite: AnglesDeg { polar_deg: 15.0, azimuth_deg: 22.5 },
            relay_polar_deg: [0.0, 30.0],
            relay_azimuth_deg: [0.0, 45.0],
            relay_chain_hops: ChainHops::Count(6),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeSection {
    pub id: String,
    pub kind: NodeKind,
    pub latitude_deg: f64,
    pub longitude_deg: f64,
    /// Defaults to the kind's profile height.
    pub altitude_m: Option<f64>,
    pub tx_power_dbm: Option<f64>,
    pub tx_gain_db: Option<f64>,
    pub rx_gain_db: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RouteSection {
    pub source: String,
    pub target: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub n_intermediate: Vec<usize>,
    pub file_sizes_bits: Vec<f64>,
    pub realizations: u64,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            n_intermediate: vec![0, 10, 20, 40, 60, 80, 100, 120],
            file_sizes_bits: vec![9000.0],
            realizations: 1000,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FlightSection {
    pub csv: Option<PathBuf>,
    pub flight_id: String,
    /// `LHR` or `JFK`.
    pub bs_site: String,
    pub tolerance_s: i64,
    pub step_s: i64,
}

impl Default for FlightSection {
    fn default() -> Self {
        Self { csv: None, flight_id: "BA117".into(), bs_site: "LHR".into(), tolerance_s: 10, step_s: 60 }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Read { path: path.to_owned(), source })?;
        let mut cfg =
            Self::parse(&text).map_err(|message| ConfigError::Parse { path: path.to_owned(), message })?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    /// Parses TOML; errors name the offending key path.
    pub fn parse(text: &str) -> Result<RunConfig, String> {
        let de = toml::Deserializer::parse(text).map_err(|e| e.to_string())?;
        serde_path_to_error::deserialize(de).map_err(|e| {
            let key = e.path().to_string();
            let inner = e.into_inner().message().to_owned();
            if key == "." {
                inner
            } else {
                format!("at `{key}`: {inner}")
            }
        })
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_owned()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn params(&self) -> Result<LinkParams, ConfigError> {
        self.link.params()
    }

    pub fn synthetic(&self) -> Result<SyntheticConfig, ConfigError> {
        let s = &self.synthetic;
        let relay_chain_hops = match &s.relay_chain_hops {
            ChainHops::Count(0) => {
                return Err(ConfigError::Invalid("synthetic.relay_chain_hops must be >= 1".into()))
            }
            ChainHops::Count(n) => Some(*n),
            ChainHops::Keyword(k) if k == "minimum" => None,
            ChainHops::Keyword(k) => {
                return Err(ConfigError::Invalid(format!(
                    "synthetic.relay_chain_hops: expected a count or \"minimum\", got \"{k}\""
                )))
            }
        };
        let interval = |[lo, hi]: [f64; 2]| Interval::new(lo.to_radians(), hi.to_radians());
        let cfg = SyntheticConfig {
            n_intermediate: s.n_intermediate,
            bs: s.bs.radians(),
            target: s.target.radians(),
            satellite: s.include_satellite.then(|| s.satellite.radians()),
            relay_polar: interval(s.relay_polar_deg),
            relay_azimuth: interval(s.relay_azimuth_deg),
            profiles: self.profiles.kinds(),
            params: self.params()?,
            seed: self.seed,
            relay_chain_hops,
        };
        cfg.validate().map_err(|e| ConfigError::Invalid(format!("synthetic: {e}")))?;
        Ok(cfg)
    }

    /// Scenario from `[[nodes]]`, or `None` if the config lists none.
    pub fn explicit_scenario(&self) -> Result<Option<Scenario>, ConfigError> {
        if self.nodes.is_empty() {
            return Ok(None);
        }
        let kinds = self.profiles.kinds();
        let mut nodes = Vec::with_capacity(self.nodes.len());
        for (i, n) in self.nodes.iter().enumerate() {
            let bad = |e: aanet::Error| ConfigError::Invalid(format!("nodes[{i}] ({}): {e}", n.id));
            let base = *kinds.get(n.kind);
            let height = n.altitude_m.unwrap_or(base.height);
            let profile = RadioProfile {
                tx_power: n.tx_power_dbm.map_or(base.tx_power, units::dbm_to_watts),
                tx_gain: n.tx_gain_db.map_or(base.tx_gain, units::db_to_linear),
                rx_gain: n.rx_gain_db.map_or(base.rx_gain, units::db_to_linear),
                height,
            };
            let at = GeodeticCoord::new(n.latitude_deg, n.longitude_deg, height).map_err(bad)?;
            let node = Node::with_profile(
                n.id.clone(),
                n.kind,
                geo::geodetic_to_ecef(at),
                height.max(0.0),
                &profile,
            );
            node.validate().map_err(bad)?;
            nodes.push(node);
        }
        let (source_id, target_id) = match &self.route {
            Some(r) => (r.source.clone(), r.target.clone()),
            None => (String::new(), String::new()),
        };
        let satellite_ids =
            nodes.iter().filter(|n| n.kind == NodeKind::Satellite).map(|n| n.id.clone()).collect();
        Ok(Some(Scenario { nodes, params: self.params()?, source_id, target_id, satellite_ids }))
    }
}
