//! Voters with coordinates and the distance-decay term of the geo graph.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Mean Earth radius in kilometres.
pub const EARTH_RADIUS_KM: f64 = 6371.0;

/// Great-circle distance in kilometres between two `(lat, lon)` points given
/// in degrees.
pub fn haversine_km(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    let (phi1, phi2) = (lat1.to_radians(), lat2.to_radians());
    let dphi = phi2 - phi1;
    let dlambda = (lon2 - lon1).to_radians();
    let a = (dphi / 2.0).sin().powi(2) + phi1.cos() * phi2.cos() * (dlambda / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_KM * a.sqrt().min(1.0).asin()
}

/// A voter with a class and a location.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeoVoter {
    pub class_index: usize,
    pub lat: f64,
    pub lon: f64,
}

impl GeoVoter {
    pub fn new(class_index: usize, lat: f64, lon: f64) -> Result<Self> {
        if !(-90.0..=90.0).contains(&lat) {
            return Err(Error::invalid("lat", format!("{lat} outside [-90, 90]")));
        }
        if !(-180.0..=180.0).contains(&lon) {
            return Err(Error::invalid("lon", format!("{lon} outside [-180, 180]")));
        }
        Ok(Self {
            class_index,
            lat,
            lon,
        })
    }

    pub fn distance_km(&self, other: &GeoVoter) -> f64 {
        haversine_km(self.lat, self.lon, other.lat, other.lon)
    }
}

/// Exponential distance decay `p1(d) = p1_max · exp(−d / λ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeoDecayParams {
    /// Peak of the decay term; `None` uses the same-class probability `p`.
    pub p1_max: Option<f64>,
    pub lambda_km: f64,
}

impl Default for GeoDecayParams {
    fn default() -> Self {
        Self {
            p1_max: None,
            lambda_km: 100.0,
        }
    }
}

impl GeoDecayParams {
    pub fn new(p1_max: Option<f64>, lambda_km: f64) -> Self {
        Self { p1_max, lambda_km }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_km > 0.0 && self.lambda_km.is_finite()) {
            return Err(Error::invalid(
                "lambda_km",
                format!("{} must be positive", self.lambda_km),
            ));
        }
        if let Some(x) = self.p1_max {
            if !(x > 0.0 && x <= 1.0) {
                return Err(Error::invalid("p1_max", format!("{x} outside (0, 1]")));
            }
        }
        Ok(())
    }

    /// Decay term at distance `d_km`, with `p` standing in for an unset peak.
    pub fn p1(&self, d_km: f64, p: f64) -> f64 {
        self.p1_max.unwrap_or(p) * (-d_km / self.lambda_km).exp()
    }
}
