//! Earth geometry: coordinate frames, link distances and line-of-sight.
//!
//! The Earth is a sphere of radius [`EARTH_RADIUS_M`]. Every position is
//! carried internally as an [`EcefPoint`]; the spherical and geodetic types
//! only exist to get positions into that frame.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::link::{Node, NodeKind};

/// Mean Earth radius in meters.
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

/// Lowest altitude accepted for a geodetic position (Dead Sea shore is ≈ −430 m).
pub const MIN_ALTITUDE_M: f64 = -500.0;

const HORIZON_KM_PER_SQRT_M: f64 = 3.57;

/// Position in the Earth-centered spherical frame used by the synthetic
/// scenarios. `theta` is the polar angle measured from the +z axis, `phi`
/// the azimuth measured from +x towards +y.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphericalCoord {
    pub r: f64,
    pub theta: f64,
    pub phi: f64,
}

impl SphericalCoord {
    pub fn new(r: f64, theta: f64, phi: f64) -> Result<Self> {
        if !(r >= EARTH_RADIUS_M) {
            return Err(Error::domain(format!("radius {r} m is below the Earth surface")));
        }
        if !(0.0..=std::f64::consts::PI).contains(&theta) {
            return Err(Error::domain(format!("polar angle {theta} rad outside [0, π]")));
        }
        if !(0.0..std::f64::consts::TAU).contains(&phi) {
            return Err(Error::domain(format!("azimuth {phi} rad outside [0, 2π)")));
        }
        Ok(Self { r, theta, phi })
    }

    /// Point at `height` meters above the surface.
    pub fn at_height(height: f64, theta: f64, phi: f64) -> Result<Self> {
        Self::new(EARTH_RADIUS_M + height, theta, phi)
    }

    pub fn height(&self) -> f64 {
        self.r - EARTH_RADIUS_M
    }
}

/// Latitude/longitude in degrees, altitude in meters above mean sea level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeodeticCoord {
    pub latitude: f64,
    pub longitude: f64,
    pub altitude: f64,
}

impl GeodeticCoord {
    pub fn new(latitude: f64, longitude: f64, altitude: f64) -> Result<Self> {
        if !(-90.0..=90.0).contains(&latitude) {
            return Err(Error::domain(format!("latitude {latitude}° outside [-90, 90]")));
        }
        if !(-180.0..=180.0).contains(&longitude) {
            return Err(Error::domain(format!("longitude {longitude}° outside [-180, 180]")));
        }
        if !(altitude >= MIN_ALTITUDE_M) {
            return Err(Error::domain(format!("altitude {altitude} m below {MIN_ALTITUDE_M} m")));
        }
        Ok(Self { latitude, longitude, altitude })
    }
}

/// Earth-centered Earth-fixed Cartesian position, meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EcefPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl EcefPoint {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    /// Height above the spherical surface.
    pub fn height(&self) -> f64 {
        self.norm() - EARTH_RADIUS_M
    }

    /// Inverse of [`geodetic_to_ecef`] on the spherical Earth.
    pub fn to_geodetic(&self) -> GeodeticCoord {
        let r = self.norm();
        let latitude = if r == 0.0 { 0.0 } else { (self.z / r).asin().to_degrees() };
        GeodeticCoord { latitude, longitude: self.y.atan2(self.x).to_degrees(), altitude: r - EARTH_RADIUS_M }
    }
}

pub fn spherical_to_ecef(c: SphericalCoord) -> EcefPoint {
    let (sin_t, cos_t) = c.theta.sin_cos();
    let (sin_p, cos_p) = c.phi.sin_cos();
    EcefPoint::new(c.r * sin_t * cos_p, c.r * sin_t * sin_p, c.r * cos_t)
}

/// Spherical-Earth conversion: radius is `EARTH_RADIUS_M + altitude`.
pub fn geodetic_to_ecef(c: GeodeticCoord) -> EcefPoint {
    let r = EARTH_RADIUS_M + c.altitude;
    let (sin_lat, cos_lat) = c.latitude.to_radians().sin_cos();
    let (sin_lon, cos_lon) = c.longitude.to_radians().sin_cos();
    EcefPoint::new(r * cos_lat * cos_lon, r * cos_lat * sin_lon, r * sin_lat)
}

/// Straight-line distance between two points.
pub fn chord_distance(a: EcefPoint, b: EcefPoint) -> f64 {
    let (dx, dy, dz) = (a.x - b.x, a.y - b.y, a.z - b.z);
    (dx * dx + dy * dy + dz * dz).sqrt()
}

/// Radio horizon in meters for two antennas at `h1`, `h2` meters:
/// `3.57 (√h1 + √h2)` kilometers.
pub fn radio_horizon(h1: f64, h2: f64) -> Result<f64> {
    check_height(h1)?;
    check_height(h2)?;
    Ok(HORIZON_KM_PER_SQRT_M * (h1.sqrt() + h2.sqrt()) * 1000.0)
}

/// Sum of the exact tangent lengths `√(h² + 2Rh)` to the spherical surface.
///
/// Agrees with [`radio_horizon`] to ~0.1% at airliner heights but stays
/// valid when `h` is comparable to the Earth radius.
pub fn tangent_horizon(h1: f64, h2: f64) -> Result<f64> {
    check_height(h1)?;
    check_height(h2)?;
    let tangent = |h: f64| (h * h + 2.0 * EARTH_RADIUS_M * h).sqrt();
    Ok(tangent(h1) + tangent(h2))
}

fn check_height(h: f64) -> Result<()> {
    if h >= 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("negative antenna height {h} m")))
    }
}

/// Maximum line-of-sight distance between two nodes.
///
/// Pairs involving a satellite use [`tangent_horizon`]; the `√h`
/// approximation behind [`radio_horizon`] underestimates a GEO horizon by
/// almost half.
pub fn visibility_range(a: &Node, b: &Node) -> f64 {
    let (ha, hb) = (a.height.max(0.0), b.height.max(0.0));
    let range = if a.kind == NodeKind::Satellite || b.kind == NodeKind::Satellite {
        tangent_horizon(ha, hb)
    } else {
        radio_horizon(ha, hb)
    };
    range.expect("heights clamped to be non-negative")
}

pub fn is_visible(a: &Node, b: &Node) -> bool {
    chord_distance(a.position, b.position) <= visibility_range(a, b)
}
