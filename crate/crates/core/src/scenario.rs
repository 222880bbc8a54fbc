//! Node sets to route over.
//!
//! Two sources: a synthetic layout in Earth-centered spherical coordinates
//! (one ground BS at the pole, a target aircraft, a GEO satellite and a
//! random swarm of relay aircraft), and flight trajectories read from CSV
//! and cut into snapshots.
//!
//! # Random streams
//!
//! Synthetic draws use ChaCha8 (`rand_chacha::ChaCha8Rng`) created with
//! `seed_from_u64(seed)` and `set_stream(realization)`. A uniform draw on
//! `[lo, hi]` is `lo + (next_u64() >> 11) · 2⁻⁵³ · (hi − lo)`. Relay `k`
//! consumes draws `2k` (polar angle) and `2k + 1` (azimuth), so the first
//! `n` relays are the same whatever the total count.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::io::{Read, Write};
use std::path::Path;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::{self, GeodeticCoord, SphericalCoord};
use crate::link::{LinkParams, Node, NodeKind, RadioProfile};

pub const SOURCE_ID: &str = "BS";
pub const TARGET_ID: &str = "TARGET";
pub const SATELLITE_ID: &str = "GEO";

/// Radio profile (power, gains, height) per node kind.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KindProfiles {
    pub ground_bs: RadioProfile,
    pub aircraft: RadioProfile,
    pub satellite: RadioProfile,
}

impl KindProfiles {
    pub fn get(&self, kind: NodeKind) -> &RadioProfile {
        match kind {
            NodeKind::GroundBs => &self.ground_bs,
            NodeKind::Aircraft => &self.aircraft,
            NodeKind::Satellite => &self.satellite,
        }
    }
}

impl Default for KindProfiles {
    fn default() -> Self {
        Self {
            ground_bs: RadioProfile::reference(NodeKind::GroundBs),
            aircraft: RadioProfile::reference(NodeKind::Aircraft),
            satellite: RadioProfile::reference(NodeKind::Satellite),
        }
    }
}

/// Polar angle and azimuth, radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Angles {
    pub polar: f64,
    pub azimuth: f64,
}

impl Angles {
    pub const fn new(polar: f64, azimuth: f64) -> Self {
        Self { polar, azimuth }
    }
}

/// Closed interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    /// Relay aircraft between the BS and the target.
    pub n_intermediate: usize,
    pub bs: Angles,
    pub target: Angles,
    /// `None` leaves the satellite out.
    pub satellite: Option<Angles>,
    pub relay_polar: Interval,
    pub relay_azimuth: Interval,
    pub profiles: KindProfiles,
    pub params: LinkParams,
    pub seed: u64,
    /// Edge count of the ideal relay-chain baseline; `None` uses the geometric minimum.
    pub relay_chain_hops: Option<usize>,
}

impl SyntheticConfig {
    /// The reference layout: BS at the pole, target 3,300 km away at
    /// (π/6, π/4), GEO over the middle of the region at (π/12, π/8), relays
    /// uniform over polar ∈ [0, π/6] × azimuth ∈ [0, π/4], and a six-hop
    /// relay-chain baseline.
    pub fn reference() -> Self {
        Self {
            n_intermediate: 0,
            bs: Angles::new(0.0, 0.0),
            target: Angles::new(PI / 6.0, PI / 4.0),
            satellite: Some(Angles::new(PI / 12.0, PI / 8.0)),
            relay_polar: Interval::new(0.0, PI / 6.0),
            relay_azimuth: Interval::new(0.0, PI / 4.0),
            profiles: KindProfiles::default(),
            params: LinkParams::reference(),
            seed: 0,
            relay_chain_hops: Some(6),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        for (name, b) in [("relay_polar", self.relay_polar), ("relay_azimuth", self.relay_azimuth)] {
            if !(b.lo <= b.hi) {
                return Err(Error::InvalidArgument(format!("{name}: lo {} > hi {}", b.lo, b.hi)));
            }
        }
        let polar_ok = |a: f64| (0.0..=PI).contains(&a);
        let azimuth_ok = |a: f64| (0.0..2.0 * PI).contains(&a);
        if !(polar_ok(self.relay_polar.lo) && polar_ok(self.relay_polar.hi)) {
            return Err(Error::InvalidArgument("relay_polar must lie in [0, π]".into()));
        }
        if !(azimuth_ok(self.relay_azimuth.lo) && azimuth_ok(self.relay_azimuth.hi)) {
            return Err(Error::InvalidArgument("relay_azimuth must lie in [0, 2π)".into()));
        }
        if self.relay_chain_hops == Some(0) {
            return Err(Error::InvalidArgument("relay_chain_hops must be >= 1".into()));
        }
        Ok(())
    }
}

/// A node set plus the radio constants and the roles of a routing query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub nodes: Vec<Node>,
    pub params: LinkParams,
    pub source_id: String,
    pub target_id: String,
    #[serde(default)]
    pub satellite_ids: Vec<String>,
}

impl Scenario {
    pub fn node(&self, id: &str) -> Result<&Node> {
        self.nodes.iter().find(|n| n.id == id).ok_or_else(|| Error::UnknownNode(id.to_owned()))
    }

    pub fn source(&self) -> Result<&Node> {
        self.node(&self.source_id)
    }

    pub fn target(&self) -> Result<&Node> {
        self.node(&self.target_id)
    }

    pub fn satellites(&self) -> Result<Vec<&Node>> {
        self.satellite_ids.iter().map(|id| self.node(id)).collect()
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        let mut seen = std::collections::HashSet::new();
        for n in &self.nodes {
            n.validate()?;
            if !seen.insert(n.id.as_str()) {
                return Err(Error::DuplicateNode(n.id.clone()));
            }
        }
        if self.source()?.kind != NodeKind::GroundBs {
            return Err(Error::InvalidArgument(format!("source {} is not a ground BS", self.source_id)));
        }
        if self.target()?.kind != NodeKind::Aircraft {
            return Err(Error::InvalidArgument(format!("target {} is not an aircraft", self.target_id)));
        }
        self.satellites()?;
        Ok(())
    }

    pub fn load_json(path: &Path) -> Result<Scenario> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let sc: Scenario =
            serde_json::from_str(&text).map_err(|source| Error::Json { path: path.to_owned(), source })?;
        sc.validate()?;
        Ok(sc)
    }

    pub fn save_json(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)
            .map_err(|source| Error::Json { path: path.to_owned(), source })?;
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }
}

/// Seeded draw source for synthetic scenarios; see the module docs.
pub struct ScenarioRng(ChaCha8Rng);

impl ScenarioRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self(rng)
    }

    /// `[0, 1)` with 53 random bits.
    pub fn unit(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform(&mut self, range: Interval) -> f64 {
        range.lo + self.unit() * (range.hi - range.lo)
    }
}

fn spherical_node(id: String, kind: NodeKind, at: Angles, profile: &RadioProfile) -> Result<Node> {
    let c = SphericalCoord::at_height(profile.height, at.polar, at.azimuth)?;
    Ok(Node::with_profile(id, kind, geo::spherical_to_ecef(c), profile.height, profile))
}

/// Realization 0 of `cfg`.
pub fn generate_synthetic(cfg: &SyntheticConfig) -> Result<Scenario> {
    generate_realization(cfg, 0)
}

/// Node order: BS, target, satellite (if any), then relays `AC0001…`.
pub fn generate_realization(cfg: &SyntheticConfig, realization: u64) -> Result<Scenario> {
    cfg.validate()?;
    let p = &cfg.profiles;
    let mut nodes = Vec::with_capacity(cfg.n_intermediate + 3);
    nodes.push(spherical_node(SOURCE_ID.into(), NodeKind::GroundBs, cfg.bs, &p.ground_bs)?);
    nodes.push(spherical_node(TARGET_ID.into(), NodeKind::Aircraft, cfg.target, &p.aircraft)?);
    let mut satellite_ids = Vec::new();
    if let Some(at) = cfg.satellite {
        nodes.push(spherical_node(SATELLITE_ID.into(), NodeKind::Satellite, at, &p.satellite)?);
        satellite_ids.push(SATELLITE_ID.to_owned());
    }

    let mut rng = ScenarioRng::new(cfg.seed, realization);
    for k in 1..=cfg.n_intermediate {
        let polar = rng.uniform(cfg.relay_polar);
        let azimuth = rng.uniform(cfg.relay_azimuth);
        let at = Angles::new(polar, azimuth);
        nodes.push(spherical_node(format!("AC{k:04}"), NodeKind::Aircraft, at, &p.aircraft)?);
    }

    Ok(Scenario {
        nodes,
        params: cfg.params,
        source_id: SOURCE_ID.into(),
        target_id: TARGET_ID.into(),
        satellite_ids,
    })
}

/// One row of the flight CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    /// Epoch seconds.
    pub timestamp: i64,
    pub flight_id: String,
    /// Degrees.
    pub longitude: f64,
    /// Degrees.
    pub latitude: f64,
    /// Meters above mean sea level.
    pub altitude: f64,
    /// m/s.
    pub speed: f64,
}

impl TrajectoryPoint {
    pub fn geodetic(&self) -> Result<GeodeticCoord> {
        GeodeticCoord::new(self.latitude, self.longitude, self.altitude)
    }
}

/// Samples per flight, ascending by timestamp; flights ordered by id.
pub type Trajectories = BTreeMap<String, Vec<TrajectoryPoint>>;

pub const FLIGHT_CSV_HEADER: [&str; 6] =
    ["timestamp", "flight_id", "longitude", "latitude", "altitude", "speed"];

pub fn load_flight_csv(path: &Path) -> Result<Trajectories> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_flight_csv(file, path)
}

/// Parses flight CSV from `reader`; `path` only labels diagnostics.
pub fn read_flight_csv<R: Read>(reader: R, path: &Path) -> Result<Trajectories> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| Error::csv(path, e))?.clone();
    let missing: Vec<_> = FLIGHT_CSV_HEADER
        .iter()
        .filter(|col| !headers.iter().any(|h| h == **col))
        .map(|col| format!("header: missing column `{col}`"))
        .collect();
    if !missing.is_empty() {
        return Err(Error::Load { path: path.to_owned(), problems: missing });
    }

    let mut problems = Vec::new();
    let mut flights = Trajectories::new();
    for row in rdr.deserialize::<TrajectoryPoint>() {
        match row {
            Ok(point) => match point.geodetic() {
                Ok(_) if point.speed >= 0.0 => {
                    flights.entry(point.flight_id.clone()).or_default().push(point)
                }
                Ok(_) => problems.push(format!("flight {}: negative speed {}", point.flight_id, point.speed)),
                Err(e) => problems.push(format!("flight {} at {}: {e}", point.flight_id, point.timestamp)),
            },
            Err(e) => {
                let line = e.position().map(|p| p.line()).unwrap_or(0);
                problems.push(format!("line {line}: {}", csv_error_text(&e)));
            }
        }
    }
    if !problems.is_empty() {
        return Err(Error::Load { path: path.to_owned(), problems });
    }
    for points in flights.values_mut() {
        points.sort_by_key(|p| p.timestamp);
    }
    Ok(flights)
}

fn csv_error_text(e: &csv::Error) -> String {
    match e.kind() {
        csv::ErrorKind::Deserialize { err, .. } => match err.field() {
            Some(i) => format!("column {}: {}", i + 1, err.kind()),
            None => err.kind().to_string(),
        },
        _ => e.to_string(),
    }
}

/// Writes all samples, flights in id order.
pub fn write_flight_csv<W: Write>(trajectories: &Trajectories, out: W) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(FLIGHT_CSV_HEADER)?;
    for point in trajectories.values().flatten() {
        w.serialize(point)?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_flight_csv(trajectories: &Trajectories, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_flight_csv(trajectories, std::io::BufWriter::new(file)).map_err(|e| Error::csv(path, e))
}

/// Sample of `points` closest to `t` (earlier one on a tie), if within `tolerance`.
pub fn nearest_sample(points: &[TrajectoryPoint], t: i64, tolerance: i64) -> Option<&TrajectoryPoint> {
    let i = points.partition_point(|p| p.timestamp < t);
    let before = i.checked_sub(1).map(|k| &points[k]);
    let after = points.get(i);
    let best = match (before, after) {
        (Some(b), Some(a)) => {
            if t - b.timestamp <= a.timestamp - t {
                b
            } else {
                a
            }
        }
        (Some(b), None) => b,
        (None, Some(a)) => a,
        (None, None) => return None,
    };
    ((best.timestamp - t).abs() <= tolerance).then_some(best)
}

/// Aircraft nodes for every flight with a sample within `tolerance` seconds of `t`.
///
/// Positions are the nearest samples as recorded; nothing is interpolated.
pub fn snapshot(
    trajectories: &Trajectories,
    t: i64,
    tolerance: i64,
    aircraft: &RadioProfile,
) -> Result<Vec<Node>> {
    if tolerance <= 0 {
        return Err(Error::InvalidArgument(format!("snapshot tolerance must be > 0, got {tolerance}")));
    }
    let mut nodes = Vec::new();
    for (id, points) in trajectories {
        if let Some(p) = nearest_sample(points, t, tolerance) {
            let position = geo::geodetic_to_ecef(p.geodetic()?);
            nodes.push(Node::with_profile(
                id.clone(),
                NodeKind::Aircraft,
                position,
                p.altitude.max(0.0),
                aircraft,
            ));
        }
    }
    Ok(nodes)
}

/// A named ground location.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Site {
    pub latitude: f64,
    pub longitude: f64,
}

/// London Heathrow.
pub const LHR: Site = Site { latitude: 51.4700, longitude: -0.4543 };
/// New York JFK.
pub const JFK: Site = Site { latitude: 40.6413, longitude: -73.7781 };

pub fn site_preset(name: &str) -> Option<Site> {
    match name.to_ascii_uppercase().as_str() {
        "LHR" => Some(LHR),
        "JFK" => Some(JFK),
        _ => None,
    }
}

/// Ground BS node standing at `site`.
pub fn ground_station(id: &str, site: Site, profile: &RadioProfile) -> Result<Node> {
    let g = GeodeticCoord::new(site.latitude, site.longitude, profile.height)?;
    Ok(Node::with_profile(id, NodeKind::GroundBs, geo::geodetic_to_ecef(g), profile.height, profile))
}

/// Synthetic trans-Atlantic traffic between two sites.
///
/// Flights follow the great circle, bowed sideways by a random offset that
/// peaks mid-route, climb and descend linearly over `climb_distance`, and
/// depart uniformly in `[start, start + window)`. Flight `k` consumes the
/// same draws whatever `n_flights` is, so a denser corridor contains every
/// flight of a sparser one with the same seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorridorConfig {
    pub n_flights: usize,
    pub seed: u64,
    pub east: Site,
    pub west: Site,
    /// Epoch seconds.
    pub start: i64,
    /// Seconds.
    pub window: i64,
    /// Seconds between samples.
    pub sample_interval: i64,
    /// m/s.
    pub speed: f64,
    /// Meters.
    pub cruise_altitude: f64,
    /// Meters over which flights climb from / descend to the ground.
    pub climb_distance: f64,
    /// Largest sideways offset at mid-route, meters.
    pub max_track_offset: f64,
    /// Flight tracked by the travel analysis, eastern site → western site.
    pub tracked: Option<TrackedFlight>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackedFlight {
    pub flight_id: String,
    /// Departure, epoch seconds.
    pub departure: i64,
}

impl CorridorConfig {
    /// LHR ↔ JFK, one day of departures from 2017-12-24 00:00 UTC,
    /// 10 s sampling, 250 m/s at 10.7 km, BA117 leaving LHR at noon.
    pub fn north_atlantic(n_flights: usize, seed: u64) -> Self {
        let start = 1_514_073_600;
        Self {
            n_flights,
            seed,
            east: LHR,
            west: JFK,
            start,
            window: 86_400,
            sample_interval: 10,
            speed: 250.0,
            cruise_altitude: 10_700.0,
            climb_distance: 200_000.0,
            max_track_offset: 150_000.0,
            tracked: Some(TrackedFlight { flight_id: "BA117".into(), departure: start + 43_200 }),
        }
    }
}

struct Track {
    from: [f64; 3],
    to: [f64; 3],
    normal: [f64; 3],
    angle: f64,
}

fn unit_vector(site: Site) -> [f64; 3] {
    let (sl, cl) = site.latitude.to_radians().sin_cos();
    let (so, co) = site.longitude.to_radians().sin_cos();
    [cl * co, cl * so, sl]
}

fn normalize(v: [f64; 3]) -> [f64; 3] {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

impl Track {
    fn new(from: Site, to: Site) -> Self {
        let (a, b) = (unit_vector(from), unit_vector(to));
        let cross = [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]];
        let dot = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
        let sin = (cross[0] * cross[0] + cross[1] * cross[1] + cross[2] * cross[2]).sqrt();
        Self { from: a, to: b, normal: normalize(cross), angle: sin.atan2(dot) }
    }

    fn length(&self) -> f64 {
        self.angle * geo::EARTH_RADIUS_M
    }

    /// Latitude/longitude at `fraction` of the route, pushed `offset` meters sideways.
    fn position(&self, fraction: f64, offset: f64) -> (f64, f64) {
        let s = self.angle.sin();
        let (wa, wb) = (((1.0 - fraction) * self.angle).sin() / s, (fraction * self.angle).sin() / s);
        let shift = (offset / geo::EARTH_RADIUS_M).tan();
        let p =
            normalize(std::array::from_fn(|i| wa * self.from[i] + wb * self.to[i] + shift * self.normal[i]));
        (p[2].asin().to_degrees(), p[1].atan2(p[0]).to_degrees())
    }
}

/// Generates the corridor's trajectories.
pub fn generate_corridor(cfg: &CorridorConfig) -> Result<Trajectories> {
    if cfg.sample_interval <= 0 || cfg.window <= 0 || !(cfg.speed > 0.0) {
        return Err(Error::InvalidArgument(
            "corridor needs positive sample_interval, window and speed".into(),
        ));
    }
    let eastbound = Track::new(cfg.west, cfg.east);
    let westbound = Track::new(cfg.east, cfg.west);
    let mut rng = ScenarioRng::new(cfg.seed, 0);
    let mut out = Trajectories::new();

    let mut fly = |id: String, track: &Track, departure: i64, offset: f64| {
        let length = track.length();
        let duration = length / cfg.speed;
        let samples = (duration / cfg.sample_interval as f64).floor() as i64;
        let mut points = Vec::with_capacity(samples as usize + 1);
        for k in 0..=samples {
            let elapsed = (k * cfg.sample_interval) as f64;
            let along = (elapsed * cfg.speed).min(length);
            let fraction = along / length;
            let bow = offset * (PI * fraction).sin();
            let (latitude, longitude) = track.position(fraction, bow);
            let ramp = (along.min(length - along) / cfg.climb_distance).min(1.0);
            points.push(TrajectoryPoint {
                timestamp: departure + k * cfg.sample_interval,
                flight_id: id.clone(),
                longitude,
                latitude,
                altitude: cfg.cruise_altitude * ramp,
                speed: cfg.speed,
            });
        }
        out.insert(id, points);
    };

    for k in 1..=cfg.n_flights {
        // fixed four draws per flight keeps corridors nested across n_flights
        let westward = rng.unit() < 0.5;
        let departure = cfg.start + (rng.unit() * cfg.window as f64) as i64;
        let offset = (2.0 * rng.unit() - 1.0) * cfg.max_track_offset;
        let _reserved = rng.unit();
        let track = if westward { &westbound } else { &eastbound };
        fly(format!("NA{k:04}"), track, departure, offset);
    }
    if let Some(tracked) = &cfg.tracked {
        fly(tracked.flight_id.clone(), &westbound, tracked.departure, 0.0);
    }
    Ok(out)
}
