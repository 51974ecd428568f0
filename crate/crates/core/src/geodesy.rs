//! Ground targets, elevation angles and seed access profiles.

use std::io::{self, Write};

use thiserror::Error;

use crate::orbit::{RgtOrbit, Vec3};
use crate::scalar::Real;

/// WGS 84 semi-major axis, km.
pub const WGS84_A_KM: f64 = 6378.137;
/// WGS 84 flattening.
pub const WGS84_F: f64 = 1.0 / 298.257_223_563;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AccessError {
    #[error("latitude {0} rad outside [-π/2, π/2]")]
    Latitude(f64),
    #[error("minimum elevation {0} rad outside [0, π/2)")]
    MinElevation(f64),
    #[error("elevation mask has {got} entries, grid has {expected}")]
    MaskLength { expected: usize, got: usize },
    #[error("satellite coincides with the target; elevation undefined")]
    Degenerate,
    #[error("time grid needs at least one step")]
    EmptyGrid,
    #[error("time step must be positive and finite, got {0}")]
    TimeStep(f64),
    #[error("grid horizon {grid_s} s does not match the period of repetition {orbit_s} s")]
    GridMismatch { grid_s: f64, orbit_s: f64 },
    #[error("access profile is all zero; the satellite never sees the target")]
    NoAccess,
    #[error("target set is empty")]
    EmptyTargetSet,
}

/// Minimum elevation requirement, constant or one value per time step.
#[derive(Debug, Clone, PartialEq)]
pub enum ElevationMask<R> {
    Constant(R),
    PerStep(Vec<R>),
}

impl<R: Real> ElevationMask<R> {
    pub fn at(&self, n: usize) -> R {
        match self {
            ElevationMask::Constant(v) => *v,
            ElevationMask::PerStep(v) => v[n],
        }
    }

    fn validate(&self) -> Result<(), AccessError> {
        let ok = |e: R| e >= R::zero() && e < R::FRAC_PI_2();
        let bad = match self {
            ElevationMask::Constant(e) => (!ok(*e)).then_some(*e),
            ElevationMask::PerStep(v) => v.iter().copied().find(|e| !ok(*e)),
        };
        match bad {
            Some(e) => Err(AccessError::MinElevation(e.as_f64())),
            None => Ok(()),
        }
    }
}

/// A ground target. Latitude is geodetic (WGS 84), altitude zero.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetPoint<R> {
    pub latitude: R,
    pub longitude: R,
    pub min_elevation: ElevationMask<R>,
}

impl<R: Real> TargetPoint<R> {
    pub fn new(latitude: R, longitude: R, min_elevation: ElevationMask<R>) -> Result<Self, AccessError> {
        if !(latitude.abs() <= R::FRAC_PI_2()) {
            return Err(AccessError::Latitude(latitude.as_f64()));
        }
        min_elevation.validate()?;
        Ok(Self {
            latitude,
            longitude,
            min_elevation,
        })
    }

    pub fn from_degrees(lat_deg: R, lon_deg: R, min_elevation_deg: R) -> Result<Self, AccessError> {
        Self::new(
            lat_deg.to_radians(),
            lon_deg.to_radians(),
            ElevationMask::Constant(min_elevation_deg.to_radians()),
        )
    }
}

/// Ordered, non-empty list of targets; the order defines the target index.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetSet<R> {
    points: Vec<TargetPoint<R>>,
}

impl<R: Real> TargetSet<R> {
    pub fn new(points: Vec<TargetPoint<R>>) -> Result<Self, AccessError> {
        if points.is_empty() {
            return Err(AccessError::EmptyTargetSet);
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[TargetPoint<R>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Discretization of one period of repetition into `length` steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub length: usize,
    pub t_step: f64,
    pub t_sim: f64,
}

impl TimeGrid {
    pub fn new(length: usize, t_step: f64) -> Result<Self, AccessError> {
        if length == 0 {
            return Err(AccessError::EmptyGrid);
        }
        if !(t_step > 0.0 && t_step.is_finite()) {
            return Err(AccessError::TimeStep(t_step));
        }
        Ok(Self {
            length,
            t_step,
            t_sim: t_step * length as f64,
        })
    }

    /// Grid whose horizon is exactly the orbit's period of repetition.
    pub fn for_repeat_period(length: usize, t_r: f64) -> Result<Self, AccessError> {
        if length == 0 {
            return Err(AccessError::EmptyGrid);
        }
        let mut grid = Self::new(length, t_r / length as f64)?;
        grid.t_sim = t_r;
        Ok(grid)
    }

    pub fn time(&self, n: usize) -> f64 {
        n as f64 * self.t_step
    }

    /// Whether the horizon matches `t_r` within relative 1e-9.
    pub fn matches_period(&self, t_r: f64) -> bool {
        ((self.t_sim - t_r) / t_r).abs() <= 1e-9
    }
}

/// Binary visibility samples of one satellite over one repeat period.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AccessProfile {
    samples: Vec<bool>,
}

impl AccessProfile {
    pub fn new(samples: Vec<bool>) -> Self {
        Self { samples }
    }

    pub fn from_bits(bits: &[u8]) -> Self {
        Self::new(bits.iter().map(|&b| b != 0).collect())
    }

    pub fn zeros(len: usize) -> Self {
        Self::new(vec![false; len])
    }

    pub fn samples(&self) -> &[bool] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn get(&self, n: usize) -> bool {
        self.samples[n]
    }

    pub fn count(&self) -> usize {
        self.samples.iter().filter(|&&s| s).count()
    }

    pub fn is_all_zero(&self) -> bool {
        !self.samples.iter().any(|&s| s)
    }

    /// Indices with access.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.samples.iter().enumerate().filter(|(_, &s)| s).map(|(n, _)| n)
    }

    pub fn fraction(&self) -> f64 {
        if self.samples.is_empty() {
            0.0
        } else {
            self.count() as f64 / self.samples.len() as f64
        }
    }

    /// Number of maximal runs of access, counted cyclically.
    pub fn arc_count(&self) -> usize {
        let len = self.samples.len();
        if len == 0 || self.is_all_zero() {
            return 0;
        }
        if self.count() == len {
            return 1;
        }
        (0..len)
            .filter(|&n| self.samples[n] && !self.samples[(n + len - 1) % len])
            .count()
    }

    /// CSV with header `n,v`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "n,v")?;
        for (n, &s) in self.samples.iter().enumerate() {
            writeln!(w, "{},{}", n, s as u8)?;
        }
        Ok(())
    }
}

/// Geodetic (WGS 84, zero altitude) to ECEF, km.
pub fn target_ecef<R: Real>(point: &TargetPoint<R>) -> Vec3<R> {
    geodetic_to_ecef(point.latitude, point.longitude)
}

pub fn geodetic_to_ecef<R: Real>(lat: R, lon: R) -> Vec3<R> {
    let a = R::lit(WGS84_A_KM);
    let f = R::lit(WGS84_F);
    let e2 = f * (R::lit(2.0) - f);
    let (sl, cl) = lat.sin_cos();
    let n = a / (R::one() - e2 * sl * sl).sqrt();
    let (so, co) = lon.sin_cos();
    [n * cl * co, n * cl * so, n * (R::one() - e2) * sl]
}

fn dot<R: Real>(a: &Vec3<R>, b: &Vec3<R>) -> R {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Elevation of a satellite above the target's horizon plane, taken as the
/// angle between the relative vector and the target's geocentric radial.
pub fn elevation<R: Real>(sat_ecef: &Vec3<R>, target_ecef: &Vec3<R>) -> Result<R, AccessError> {
    let rho = [
        sat_ecef[0] - target_ecef[0],
        sat_ecef[1] - target_ecef[1],
        sat_ecef[2] - target_ecef[2],
    ];
    let rho_norm = dot(&rho, &rho).sqrt();
    let rg_norm = dot(target_ecef, target_ecef).sqrt();
    if !(rho_norm > R::zero()) || !(rg_norm > R::zero()) {
        return Err(AccessError::Degenerate);
    }
    let s = dot(target_ecef, &rho) / (rg_norm * rho_norm);
    Ok(s.max(-R::one()).min(R::one()).asin())
}

/// Samples visibility of `orbit` from `point` at every grid instant without
/// rejecting an all-zero result.
pub fn sample_access_profile<R: Real>(
    orbit: &RgtOrbit<R>,
    point: &TargetPoint<R>,
    grid: &TimeGrid,
) -> Result<AccessProfile, AccessError> {
    if let ElevationMask::PerStep(v) = &point.min_elevation {
        if v.len() != grid.length {
            return Err(AccessError::MaskLength {
                expected: grid.length,
                got: v.len(),
            });
        }
    }
    let t_r = orbit.periods.t_r.as_f64();
    if !grid.matches_period(t_r) {
        return Err(AccessError::GridMismatch {
            grid_s: grid.t_sim,
            orbit_s: t_r,
        });
    }
    let rg = target_ecef(point);
    let mut samples = Vec::with_capacity(grid.length);
    for n in 0..grid.length {
        let rs = orbit.position_ecef(R::lit(grid.time(n)));
        let eps = elevation(&rs, &rg)?;
        samples.push(eps >= point.min_elevation.at(n));
    }
    Ok(AccessProfile::new(samples))
}

/// Seed-satellite access profile; an all-zero profile is an error because
/// the pattern solvers require at least one access interval.
pub fn seed_access_profile<R: Real>(
    orbit: &RgtOrbit<R>,
    point: &TargetPoint<R>,
    grid: &TimeGrid,
) -> Result<AccessProfile, AccessError> {
    let profile = sample_access_profile(orbit, point, grid)?;
    if profile.is_all_zero() {
        return Err(AccessError::NoAccess);
    }
    Ok(profile)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orbit::{Epoch, PeriodRatio, PhysicalConstants, RgtElements};

    #[test]
    fn equator_and_pole_conversions() {
        let p = geodetic_to_ecef(0.0f64, 0.0);
        assert!((p[0] - 6378.137).abs() < 1e-9 && p[1].abs() < 1e-9 && p[2].abs() < 1e-9);
        let p = geodetic_to_ecef(std::f64::consts::FRAC_PI_2, 1.234);
        assert!(p[0].abs() < 1e-6 && p[1].abs() < 1e-6);
        assert!((p[2] - 6356.752_314_2).abs() < 1e-6);
    }

    #[test]
    fn elevation_basic_geometry() {
        let rg = [6378.0, 0.0, 0.0];
        let above = [2.0 * 6378.0, 0.0, 0.0];
        assert!((elevation(&above, &rg).unwrap() - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
        let horizon = [6378.0, 1000.0, 0.0];
        assert!(elevation(&horizon, &rg).unwrap().abs() < 1e-12);
        let below = [6000.0, 1000.0, 0.0];
        assert!(elevation(&below, &rg).unwrap() < 0.0);
        assert_eq!(elevation(&rg, &rg), Err(AccessError::Degenerate));
    }

    #[test]
    fn target_validation() {
        assert!(TargetPoint::from_degrees(91.0f64, 0.0, 10.0).is_err());
        assert!(TargetPoint::from_degrees(10.0f64, 0.0, 90.0).is_err());
        assert!(TargetPoint::from_degrees(10.0f64, 0.0, -1.0).is_err());
        assert!(TargetSet::<f64>::new(vec![]).is_err());
    }

    fn equatorial_geo_like() -> RgtOrbit<f64> {
        let el =
            RgtElements::from_degrees(PeriodRatio::new(1, 1).unwrap(), 0.0, 0.01, 0.0, 0.0, 0.0, Epoch::J2000).unwrap();
        RgtOrbit::new(el, PhysicalConstants::default()).unwrap()
    }

    #[test]
    fn sub_satellite_target_sees_geo_like_satellite_always() {
        let orbit = equatorial_geo_like();
        let (_, lon) = orbit.ground_point(0.0);
        let target = TargetPoint::new(0.0, lon, ElevationMask::Constant(10f64.to_radians())).unwrap();
        let grid = TimeGrid::for_repeat_period(96, orbit.periods.t_r).unwrap();
        let v = seed_access_profile(&orbit, &target, &grid).unwrap();
        assert_eq!(v.count(), 96);
    }

    #[test]
    fn polar_target_never_sees_equatorial_orbit() {
        let orbit = equatorial_geo_like();
        let target = TargetPoint::from_degrees(90.0, 0.0, 10.0).unwrap();
        let grid = TimeGrid::for_repeat_period(96, orbit.periods.t_r).unwrap();
        assert_eq!(seed_access_profile(&orbit, &target, &grid), Err(AccessError::NoAccess));
        assert!(sample_access_profile(&orbit, &target, &grid).unwrap().is_all_zero());
    }

    #[test]
    fn grid_must_span_the_repeat_period() {
        let orbit = equatorial_geo_like();
        let target = TargetPoint::from_degrees(0.0, 0.0, 10.0).unwrap();
        let grid = TimeGrid::new(96, 900.0).unwrap();
        assert!(matches!(
            sample_access_profile(&orbit, &target, &grid),
            Err(AccessError::GridMismatch { .. })
        ));
    }

    #[test]
    fn arc_count_is_cyclic() {
        let v = AccessProfile::from_bits(&[1, 0, 0, 1, 1, 0, 1]);
        assert_eq!(v.arc_count(), 2);
        assert_eq!(AccessProfile::from_bits(&[1, 1]).arc_count(), 1);
        assert_eq!(AccessProfile::from_bits(&[0, 0]).arc_count(), 0);
    }

    #[test]
    fn profile_csv_has_header() {
        let mut buf = Vec::new();
        AccessProfile::from_bits(&[1, 0]).write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "n,v\n0,1\n1,0\n");
    }
}
