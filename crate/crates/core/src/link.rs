//! Link budget and per-hop delay model.
//!
//! A hop from `i` to `j` costs a file-transfer delay `L / C`, a propagation
//! delay `d / c`, and a decode-and-forward delay when `j` relays the file
//! onwards rather than being its destination. `C` comes from the received
//! SNR through the Shannon bound, or is pinned to a fixed rate.
//!
//! Everything in here is SI and linear; decibels only appear in [`units`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::{self, EcefPoint};

/// Speed of light used throughout, m/s.
pub const SPEED_OF_LIGHT: f64 = 3.0e8;

pub mod units {
    pub fn db_to_linear(db: f64) -> f64 {
        10f64.powf(db / 10.0)
    }

    pub fn linear_to_db(linear: f64) -> f64 {
        10.0 * linear.log10()
    }

    pub fn dbm_to_watts(dbm: f64) -> f64 {
        db_to_linear(dbm) * 1e-3
    }

    pub fn watts_to_dbm(watts: f64) -> f64 {
        linear_to_db(watts * 1e3)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    GroundBs,
    Aircraft,
    Satellite,
}

impl NodeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            NodeKind::GroundBs => "ground_bs",
            NodeKind::Aircraft => "aircraft",
            NodeKind::Satellite => "satellite",
        }
    }
}

impl std::fmt::Display for NodeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Transmit power, antenna gains and nominal height shared by all nodes of a kind.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadioProfile {
    /// Watts.
    pub tx_power: f64,
    /// Linear.
    pub tx_gain: f64,
    /// Linear.
    pub rx_gain: f64,
    /// Meters above the surface.
    pub height: f64,
}

impl RadioProfile {
    /// Ground BS 45 dBm / 25 dB / 50 m, aircraft 30 dBm / 25 dB / 10.7 km,
    /// GEO satellite 50 dBm / 45 dB / 35,768 km.
    pub fn reference(kind: NodeKind) -> Self {
        use units::{db_to_linear, dbm_to_watts};
        let (power_dbm, gain_db, height) = match kind {
            NodeKind::GroundBs => (45.0, 25.0, 50.0),
            NodeKind::Aircraft => (30.0, 25.0, 10_700.0),
            NodeKind::Satellite => (50.0, 45.0, 35_768_000.0),
        };
        Self {
            tx_power: dbm_to_watts(power_dbm),
            tx_gain: db_to_linear(gain_db),
            rx_gain: db_to_linear(gain_db),
            height,
        }
    }
}

/// A ground base station, aircraft or satellite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: String,
    pub kind: NodeKind,
    pub position: EcefPoint,
    /// Meters above the surface; drives the radio horizon.
    pub height: f64,
    /// Watts.
    pub tx_power: f64,
    pub tx_gain: f64,
    pub rx_gain: f64,
}

impl Node {
    pub fn with_profile(
        id: impl Into<String>,
        kind: NodeKind,
        position: EcefPoint,
        height: f64,
        profile: &RadioProfile,
    ) -> Self {
        Self {
            id: id.into(),
            kind,
            position,
            height,
            tx_power: profile.tx_power,
            tx_gain: profile.tx_gain,
            rx_gain: profile.rx_gain,
        }
    }

    pub fn ground_bs(id: impl Into<String>, position: EcefPoint, height: f64) -> Self {
        let kind = NodeKind::GroundBs;
        Self::with_profile(id, kind, position, height, &RadioProfile::reference(kind))
    }

    pub fn aircraft(id: impl Into<String>, position: EcefPoint, height: f64) -> Self {
        let kind = NodeKind::Aircraft;
        Self::with_profile(id, kind, position, height, &RadioProfile::reference(kind))
    }

    pub fn satellite(id: impl Into<String>, position: EcefPoint, height: f64) -> Self {
        let kind = NodeKind::Satellite;
        Self::with_profile(id, kind, position, height, &RadioProfile::reference(kind))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tx_power > 0.0) {
            return Err(Error::domain(format!("node {}: tx_power must be > 0", self.id)));
        }
        if !(self.tx_gain > 0.0 && self.rx_gain > 0.0) {
            return Err(Error::domain(format!("node {}: antenna gains must be > 0", self.id)));
        }
        if !(self.height >= 0.0) {
            return Err(Error::domain(format!("node {}: height must be >= 0", self.id)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateMode {
    /// `B log2(1 + snr)`.
    Shannon,
    /// Every link carries this many bits/s regardless of SNR.
    Fixed(f64),
}

/// Radio constants shared by every link of a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkParams {
    /// Hz.
    pub carrier_freq: f64,
    /// Hz.
    pub bandwidth: f64,
    /// Watts.
    pub noise_power: f64,
    pub path_loss_exp: f64,
    /// Linear SNR a link must reach to exist.
    pub snr_threshold: f64,
    /// Decode-and-forward delay at every relay, seconds.
    pub df_delay: f64,
    /// Bits.
    pub file_size: f64,
    pub rate_mode: RateMode,
}

impl LinkParams {
    /// 31 GHz, 200 MHz, −132 dBm noise, free-space exponent, 0 dB threshold,
    /// 20 ms DF delay, 9000-bit transport block, Shannon rate.
    pub fn reference() -> Self {
        Self {
            carrier_freq: 31e9,
            bandwidth: 200e6,
            noise_power: units::dbm_to_watts(-132.0),
            path_loss_exp: 2.0,
            snr_threshold: units::db_to_linear(0.0),
            df_delay: 0.020,
            file_size: 9000.0,
            rate_mode: RateMode::Shannon,
        }
    }

    pub fn with_file_size(self, bits: f64) -> Self {
        Self { file_size: bits, ..self }
    }

    pub fn with_rate_mode(self, rate_mode: RateMode) -> Self {
        Self { rate_mode, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("carrier_freq", self.carrier_freq),
            ("bandwidth", self.bandwidth),
            ("noise_power", self.noise_power),
            ("df_delay", self.df_delay),
        ];
        for (name, v) in positive {
            if !(v > 0.0) {
                return Err(Error::domain(format!("{name} must be > 0, got {v}")));
            }
        }
        if !(self.file_size >= 0.0) {
            return Err(Error::domain(format!("file_size must be >= 0, got {}", self.file_size)));
        }
        if !(self.path_loss_exp >= 1.0) {
            return Err(Error::domain(format!("path_loss_exp must be >= 1, got {}", self.path_loss_exp)));
        }
        if !(self.snr_threshold >= 0.0) {
            return Err(Error::domain("snr_threshold must be >= 0"));
        }
        if let RateMode::Fixed(rate) = self.rate_mode {
            if !(rate > 0.0) {
                return Err(Error::domain(format!("fixed rate must be > 0, got {rate}")));
            }
        }
        Ok(())
    }
}

/// Quantities of one directed link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    pub distance: f64,
    pub snr: f64,
    /// bits/s
    pub rate: f64,
    pub d_tr: f64,
    pub d_pr: f64,
}

impl LinkBudget {
    pub fn base_delay(&self) -> f64 {
        self.d_tr + self.d_pr
    }
}

/// Free-space-style channel gain `(c / (4π d f_c))^α`.
pub fn path_loss(d: f64, p: &LinkParams) -> Result<f64> {
    if !(d > 0.0) {
        return Err(Error::domain(format!("path loss undefined at distance {d} m")));
    }
    let base = SPEED_OF_LIGHT / (4.0 * std::f64::consts::PI * d * p.carrier_freq);
    Ok(base.powf(p.path_loss_exp))
}

/// Received SNR at `rx` for a transmission from `tx`, linear.
pub fn snr(tx: &Node, rx: &Node, p: &LinkParams) -> Result<f64> {
    snr_at(tx, rx, geo::chord_distance(tx.position, rx.position), p)
}

fn snr_at(tx: &Node, rx: &Node, d: f64, p: &LinkParams) -> Result<f64> {
    if d == 0.0 {
        return Err(Error::domain(format!("nodes {} and {} are co-located", tx.id, rx.id)));
    }
    let gain = path_loss(d, p)?;
    Ok(tx.tx_power * tx.tx_gain * rx.rx_gain * gain / p.noise_power)
}

/// Achievable rate in bits/s.
pub fn capacity(snr: f64, p: &LinkParams) -> f64 {
    match p.rate_mode {
        RateMode::Shannon => p.bandwidth * (1.0 + snr).log2(),
        RateMode::Fixed(rate) => rate,
    }
}

pub fn transmission_delay(bits: f64, rate: f64) -> Result<f64> {
    if !(rate > 0.0) {
        return Err(Error::InfeasibleLink(format!("rate {rate} bit/s cannot carry data")));
    }
    Ok(bits / rate)
}

pub fn propagation_delay(d: f64) -> f64 {
    d / SPEED_OF_LIGHT
}

pub fn link_budget(tx: &Node, rx: &Node, p: &LinkParams) -> Result<LinkBudget> {
    let distance = geo::chord_distance(tx.position, rx.position);
    let snr = snr_at(tx, rx, distance, p)?;
    let rate = capacity(snr, p);
    Ok(LinkBudget {
        distance,
        snr,
        rate,
        d_tr: transmission_delay(p.file_size, rate)?,
        d_pr: propagation_delay(distance),
    })
}

/// Delay of the hop `tx → rx`; relays (`rx_is_target == false`) add the DF delay.
pub fn link_delay(tx: &Node, rx: &Node, p: &LinkParams, rx_is_target: bool) -> Result<f64> {
    let budget = link_budget(tx, rx, p)?;
    Ok(hop_delay(budget.base_delay(), p.df_delay, rx_is_target))
}

/// Applies the destination-dependent branch of the delay model.
#[inline]
pub fn hop_delay(base_delay: f64, df_delay: f64, rx_is_target: bool) -> f64 {
    if rx_is_target {
        base_delay
    } else {
        base_delay + df_delay
    }
}

#[cfg(test)]
mod tests {
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    use super::units::*;
    use super::*;

    const R: f64 = geo::EARTH_RADIUS_M;

    fn unit_params() -> LinkParams {
        LinkParams { noise_power: 1.0, ..LinkParams::reference() }
    }

    fn cruise_pair(d: f64) -> (Node, Node) {
        let a = Node::aircraft("a", EcefPoint::new(0.0, 0.0, R + 10_700.0), 10_700.0);
        let b = Node::aircraft("b", EcefPoint::new(d, 0.0, R + 10_700.0), 10_700.0);
        (a, b)
    }

    #[test]
    fn path_loss_unit_distance() {
        let mut p = LinkParams::reference();
        let d0 = SPEED_OF_LIGHT / (4.0 * std::f64::consts::PI * p.carrier_freq);
        for alpha in [1.0, 2.0, 3.5] {
            p.path_loss_exp = alpha;
            assert_relative_eq!(path_loss(d0, &p).unwrap(), 1.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn path_loss_inverse_square() {
        let p = LinkParams::reference();
        let near = path_loss(50_000.0, &p).unwrap();
        let far = path_loss(100_000.0, &p).unwrap();
        assert_relative_eq!(far, near / 4.0, max_relative = 1e-12);
        // (c / (4π · 1e5 · 31e9))² evaluated separately
        assert_relative_eq!(far, 5.930_610_384_892_3e-17, max_relative = 1e-12);
    }

    #[test]
    fn path_loss_rejects_zero_distance() {
        assert!(matches!(path_loss(0.0, &LinkParams::reference()), Err(Error::Domain(_))));
    }

    #[test]
    fn snr_unit_link() {
        let d0 = SPEED_OF_LIGHT / (4.0 * std::f64::consts::PI * 31e9);
        let profile = RadioProfile { tx_power: 1.0, tx_gain: 1.0, rx_gain: 1.0, height: 0.0 };
        // placed at the origin so the millimetre offset survives in f64
        let a = Node::with_profile("a", NodeKind::Aircraft, EcefPoint::new(0.0, 0.0, 0.0), 0.0, &profile);
        let b = Node { id: "b".into(), position: EcefPoint::new(d0, 0.0, 0.0), ..a.clone() };
        assert_relative_eq!(snr(&a, &b, &unit_params()).unwrap(), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn snr_reference_aircraft_link() {
        let p = LinkParams::reference();
        let (a, b) = cruise_pair(100_000.0);
        // dB-domain oracle: 30 dBm + 25 dB + 25 dB + FSPL(100 km, 31 GHz) + 132 dB
        let fspl_db = 20.0 * (SPEED_OF_LIGHT / (4.0 * std::f64::consts::PI * 1e5 * 31e9)).log10();
        let oracle = db_to_linear(30.0 + 25.0 + 25.0 + fspl_db + 132.0);
        let got = snr(&a, &b, &p).unwrap();
        assert_relative_eq!(got, oracle, max_relative = 1e-9);
        assert_relative_eq!(got, 93_993.840_261_549_47, max_relative = 1e-9);

        let (a2, b2) = cruise_pair(200_000.0);
        assert_relative_eq!(snr(&a2, &b2, &p).unwrap(), got / 4.0, max_relative = 1e-12);
    }

    #[test]
    fn snr_rejects_colocated() {
        let (a, _) = cruise_pair(1.0);
        let b = Node { id: "b".into(), ..a.clone() };
        assert!(matches!(snr(&a, &b, &LinkParams::reference()), Err(Error::Domain(_))));
    }

    #[test]
    fn shannon_capacity() {
        let p = LinkParams::reference();
        assert_relative_eq!(capacity(1.0, &p), 200e6);
        assert_eq!(capacity(0.0, &p), 0.0);
        assert_relative_eq!(capacity(3.0, &p), 400e6);
        let fixed = p.with_rate_mode(RateMode::Fixed(10e6));
        assert_eq!(capacity(0.0, &fixed), 10e6);
        assert_eq!(capacity(1e6, &fixed), 10e6);
    }

    #[test]
    fn transmission_delays() {
        assert_eq!(transmission_delay(9000.0, 9000.0).unwrap(), 1.0);
        assert_relative_eq!(transmission_delay(200e3, 10e6).unwrap(), 0.020);
        assert_relative_eq!(transmission_delay(1e6, 10e6).unwrap(), 0.100);
        assert!(matches!(transmission_delay(1.0, 0.0), Err(Error::InfeasibleLink(_))));
    }

    #[test]
    fn propagation_delays() {
        assert_eq!(propagation_delay(3e8), 1.0);
        assert_relative_eq!(propagation_delay(35_768e3), 0.119_226_666, epsilon = 1e-9);
        assert_relative_eq!(propagation_delay(3300e3), 0.011, epsilon = 1e-12);
    }

    #[test]
    fn link_delay_branches() {
        let p = LinkParams::reference().with_rate_mode(RateMode::Fixed(10e6)).with_file_size(200e3);
        let (a, b) = cruise_pair(700e3);
        let last = link_delay(&a, &b, &p, true).unwrap();
        assert_relative_eq!(last, 0.020 + 700e3 / 3e8, max_relative = 1e-12);
        let relay = link_delay(&a, &b, &p, false).unwrap();
        assert_relative_eq!(relay, last + 0.020, max_relative = 1e-12);

        // L = 0 leaves only propagation (+ DF)
        let zero = LinkParams { file_size: 0.0, ..p };
        assert_relative_eq!(link_delay(&a, &b, &zero, true).unwrap(), 700e3 / 3e8);
        assert_relative_eq!(link_delay(&a, &b, &zero, false).unwrap(), 700e3 / 3e8 + 0.020);
    }

    #[test]
    fn infeasible_link_propagates() {
        let p = LinkParams::reference().with_rate_mode(RateMode::Fixed(0.0));
        let (a, b) = cruise_pair(1000.0);
        assert!(matches!(link_delay(&a, &b, &p, true), Err(Error::InfeasibleLink(_))));
        assert!(p.validate().is_err());
    }

    #[test]
    fn params_validation() {
        assert!(LinkParams::reference().validate().is_ok());
        assert!(LinkParams { path_loss_exp: 0.5, ..LinkParams::reference() }.validate().is_err());
        assert!(LinkParams { bandwidth: 0.0, ..LinkParams::reference() }.validate().is_err());
        assert!(LinkParams { snr_threshold: -1.0, ..LinkParams::reference() }.validate().is_err());
        let (mut a, _) = cruise_pair(0.0);
        a.tx_gain = 0.0;
        assert!(a.validate().is_err());
    }

    #[test]
    fn reference_profiles() {
        let sat = RadioProfile::reference(NodeKind::Satellite);
        assert_relative_eq!(sat.tx_power, 100.0, max_relative = 1e-12);
        assert_relative_eq!(sat.tx_gain, 31_622.776_601_683_8, max_relative = 1e-12);
        let ac = RadioProfile::reference(NodeKind::Aircraft);
        assert_relative_eq!(ac.tx_power, 1.0, max_relative = 1e-12);
        assert_eq!(ac.height, 10_700.0);
    }

    proptest! {
        #[test]
        fn snr_decreases_with_distance(d in 1.0..1e8f64, k in 1.0001..10.0f64) {
            let p = LinkParams::reference();
            let (a, b) = cruise_pair(d);
            let (_, c) = cruise_pair(d * k);
            prop_assert!(path_loss(d * k, &p).unwrap() < path_loss(d, &p).unwrap());
            prop_assert!(snr(&a, &c, &p).unwrap() < snr(&a, &b, &p).unwrap());
        }

        #[test]
        fn capacity_monotone(s in 0.0..1e9f64, ds in 0.0..1e6f64) {
            let p = LinkParams::reference();
            prop_assert!(capacity(s + ds, &p) >= capacity(s, &p));
        }

        #[test]
        fn df_delay_is_the_only_difference(d in 1.0..5e7f64, bits in 0.0..1e8f64) {
            let p = LinkParams::reference().with_file_size(bits);
            let (a, b) = cruise_pair(d);
            let last = link_delay(&a, &b, &p, true).unwrap();
            let relay = link_delay(&a, &b, &p, false).unwrap();
            prop_assert!(last >= 0.0);
            prop_assert!((relay - last - p.df_delay).abs() <= 1e-12 * relay.max(1.0));
        }

        #[test]
        fn decibel_round_trip(db in -200.0..200.0f64) {
            prop_assert!((linear_to_db(db_to_linear(db)) - db).abs() <= 1e-9 * db.abs().max(1.0));
            prop_assert!((watts_to_dbm(dbm_to_watts(db)) - db).abs() <= 1e-9 * db.abs().max(1.0));
        }
    }
}
