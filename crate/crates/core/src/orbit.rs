//! J2-perturbed repeating ground track orbits.
//!
//! Secular rates, nodal periods and the semi-major axis that realizes a given
//! period ratio `N_P / N_D`, plus a mean-element propagator (two-body motion
//! with secular J2 drift of `Ω`, `ω`, `M`) that produces ECEF positions.

use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use thiserror::Error;

use crate::scalar::{wrap_two_pi, Real};

/// Seconds per day.
pub const SECONDS_PER_DAY: f64 = 86_400.0;

/// Newton iteration cap for the semi-major-axis solve.
pub const SMA_MAX_ITERATIONS: usize = 100;

/// Newton iteration cap for Kepler's equation.
pub const KEPLER_MAX_ITERATIONS: usize = 50;

/// Inclination tolerance (degrees) around the critical inclinations for
/// elliptic orbits.
pub const CRITICAL_INCLINATION_TOLERANCE_DEG: f64 = 0.1;

/// Critical inclination `asin(2/√5)` in degrees.
pub const CRITICAL_INCLINATION_DEG: f64 = 63.434_948_822_922_01;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OrbitError {
    #[error("physical constant `{0}` must be strictly positive")]
    NonPositiveConstant(&'static str),
    #[error("period ratio terms must be positive integers, got {n_p}/{n_d}")]
    InvalidPeriodRatio { n_p: u64, n_d: u64 },
    #[error("cannot parse period ratio `{0}` (expected `NP/ND`)")]
    PeriodRatioSyntax(String),
    #[error("eccentricity {0} outside [0, 1)")]
    Eccentricity(f64),
    #[error("inclination {0} rad outside (0, π)")]
    Inclination(f64),
    #[error("elliptic orbits must be critically inclined (63.4349° or 116.5651° ± {tol}°), got {inclination_deg}°")]
    NonCriticalEllipticInclination { inclination_deg: f64, tol: f64 },
    #[error("semi-latus rectum a(1-e²) = {0} km is not positive")]
    SemiLatusRectum(f64),
    #[error("semi-major axis {a} km lies below the Earth radius {radius} km; period ratio is infeasible")]
    BelowEarthRadius { a: f64, radius: f64 },
    #[error("semi-major axis iteration did not converge after {0} iterations")]
    NoConvergence(usize),
}

/// Earth model constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants<R> {
    /// Mean equatorial radius, km.
    pub earth_radius: R,
    /// Gravitational parameter, km³/s².
    pub mu: R,
    pub j2: R,
    /// Earth rotation rate, rad/s.
    pub earth_rotation_rate: R,
    /// Greenwich sidereal angle at the J2000 epoch, degrees.
    pub gmst_at_j2000_deg: f64,
    /// Sidereal angle rate of the linear GMST model, degrees per day.
    pub gmst_rate_deg_per_day: f64,
}

impl<R: Real> PhysicalConstants<R> {
    pub fn new(earth_radius: R, mu: R, j2: R, earth_rotation_rate: R) -> Result<Self, OrbitError> {
        let positive = |v: R, name| {
            if v > R::zero() && v.is_finite() {
                Ok(())
            } else {
                Err(OrbitError::NonPositiveConstant(name))
            }
        };
        positive(earth_radius, "earth_radius")?;
        positive(mu, "mu")?;
        positive(j2, "j2")?;
        positive(earth_rotation_rate, "earth_rotation_rate")?;
        Ok(Self {
            earth_radius,
            mu,
            j2,
            earth_rotation_rate,
            ..Self::default()
        })
    }
}

impl<R: Real> Default for PhysicalConstants<R> {
    fn default() -> Self {
        Self {
            earth_radius: R::lit(6378.14),
            mu: R::lit(398_600.44),
            j2: R::lit(0.001_082_63),
            earth_rotation_rate: R::lit(7.292_115_9e-5),
            gmst_at_j2000_deg: 280.460_618_37,
            gmst_rate_deg_per_day: 360.985_647_366_29,
        }
    }
}

/// Period ratio `τ = N_P / N_D`, always stored in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PeriodRatio {
    n_p: u32,
    n_d: u32,
}

impl PeriodRatio {
    pub fn new(n_p: u32, n_d: u32) -> Result<Self, OrbitError> {
        if n_p == 0 || n_d == 0 {
            return Err(OrbitError::InvalidPeriodRatio {
                n_p: n_p as u64,
                n_d: n_d as u64,
            });
        }
        let g = n_p.gcd(&n_d);
        Ok(Self {
            n_p: n_p / g,
            n_d: n_d / g,
        })
    }

    /// Revolutions per repeat cycle.
    pub fn n_p(&self) -> u32 {
        self.n_p
    }

    /// Greenwich nodal days per repeat cycle.
    pub fn n_d(&self) -> u32 {
        self.n_d
    }

    pub fn value<R: Real>(&self) -> R {
        R::lit(self.n_p as f64) / R::lit(self.n_d as f64)
    }
}

impl fmt::Display for PeriodRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.n_p, self.n_d)
    }
}

impl FromStr for PeriodRatio {
    type Err = OrbitError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let syntax = || OrbitError::PeriodRatioSyntax(s.to_string());
        let (p, d) = s.split_once('/').ok_or_else(syntax)?;
        let n_p: u32 = p.trim().parse().map_err(|_| syntax())?;
        let n_d: u32 = d.trim().parse().map_err(|_| syntax())?;
        Self::new(n_p, n_d)
    }
}

/// Absolute time, seconds since the J2000 epoch (2000-01-01T12:00:00).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct Epoch {
    pub seconds_since_j2000: f64,
}

impl Epoch {
    pub const J2000: Epoch = Epoch {
        seconds_since_j2000: 0.0,
    };

    pub fn from_seconds_since_j2000(seconds: f64) -> Self {
        Self {
            seconds_since_j2000: seconds,
        }
    }

    pub fn days_since_j2000(&self) -> f64 {
        self.seconds_since_j2000 / SECONDS_PER_DAY
    }
}

/// Greenwich sidereal angle (rad, in `[0, 2π)`) at `epoch`, from the linear
/// GMST model carried by `consts`.
pub fn greenwich_angle_at<R: Real>(epoch: Epoch, consts: &PhysicalConstants<R>) -> R {
    let deg = consts.gmst_at_j2000_deg + consts.gmst_rate_deg_per_day * epoch.days_since_j2000();
    let deg = deg.rem_euclid(360.0);
    wrap_two_pi(R::lit(deg.to_radians()))
}

/// Repeating-ground-track element set `[τ, e, i, ω, Ω, M]` at `epoch`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RgtElements<R> {
    pub tau: PeriodRatio,
    pub eccentricity: R,
    pub inclination: R,
    pub arg_perigee: R,
    pub raan: R,
    pub mean_anomaly: R,
    pub epoch: Epoch,
}

impl<R: Real> RgtElements<R> {
    pub fn new(
        tau: PeriodRatio,
        eccentricity: R,
        inclination: R,
        arg_perigee: R,
        raan: R,
        mean_anomaly: R,
        epoch: Epoch,
    ) -> Result<Self, OrbitError> {
        let elements = Self {
            tau,
            eccentricity,
            inclination,
            arg_perigee,
            raan,
            mean_anomaly,
            epoch,
        };
        elements.validate()?;
        Ok(elements)
    }

    /// Convenience constructor taking angles in degrees.
    pub fn from_degrees(
        tau: PeriodRatio,
        eccentricity: R,
        inclination_deg: R,
        arg_perigee_deg: R,
        raan_deg: R,
        mean_anomaly_deg: R,
        epoch: Epoch,
    ) -> Result<Self, OrbitError> {
        Self::new(
            tau,
            eccentricity,
            inclination_deg.to_radians(),
            arg_perigee_deg.to_radians(),
            raan_deg.to_radians(),
            mean_anomaly_deg.to_radians(),
            epoch,
        )
    }

    pub fn validate(&self) -> Result<(), OrbitError> {
        validate_shape(self.eccentricity, self.inclination)
    }

    pub fn is_retrograde(&self) -> bool {
        self.inclination > R::FRAC_PI_2()
    }
}

fn validate_shape<R: Real>(e: R, i: R) -> Result<(), OrbitError> {
    if !(e >= R::zero() && e < R::one()) {
        return Err(OrbitError::Eccentricity(e.as_f64()));
    }
    if !(i > R::zero() && i < R::PI()) {
        return Err(OrbitError::Inclination(i.as_f64()));
    }
    if e > R::zero() {
        let deg = i.as_f64().to_degrees();
        let tol = CRITICAL_INCLINATION_TOLERANCE_DEG;
        let near = |c: f64| (deg - c).abs() <= tol;
        if !(near(CRITICAL_INCLINATION_DEG) || near(180.0 - CRITICAL_INCLINATION_DEG)) {
            return Err(OrbitError::NonCriticalEllipticInclination {
                inclination_deg: deg,
                tol,
            });
        }
    }
    Ok(())
}

/// Secular J2 rates, rad/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecularRates<R> {
    pub omega_dot: R,
    pub raan_dot: R,
    pub m_dot: R,
}

/// Secular drift of perigee, node and mean anomaly under J2.
pub fn secular_rates<R: Real>(a: R, e: R, i: R, consts: &PhysicalConstants<R>) -> Result<SecularRates<R>, OrbitError> {
    let p = a * (R::one() - e * e);
    if !(p > R::zero()) {
        return Err(OrbitError::SemiLatusRectum(p.as_f64()));
    }
    let n = (consts.mu / (a * a * a)).sqrt();
    let ratio = consts.earth_radius / p;
    let k = R::lit(1.5) * consts.j2 * ratio * ratio;
    let s2 = i.sin().powi(2);
    let omega_dot = k * n * (R::lit(2.0) - R::lit(2.5) * s2);
    let raan_dot = -k * n * i.cos();
    let m_dot = n * (R::one() - k * (R::one() - e * e).sqrt() * (R::lit(1.5) * s2 - R::one()));
    Ok(SecularRates {
        omega_dot,
        raan_dot,
        m_dot,
    })
}

/// Periods and size of a repeating ground track orbit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodSet<R> {
    /// Satellite nodal period, s.
    pub t_s: R,
    /// Greenwich nodal period, s.
    pub t_g: R,
    /// Period of repetition, s.
    pub t_r: R,
    pub semi_major_axis: R,
    pub semi_latus_rectum: R,
}

impl<R: Real> PeriodSet<R> {
    pub fn altitude(&self, consts: &PhysicalConstants<R>) -> R {
        self.semi_major_axis - consts.earth_radius
    }
}

/// Period ratio realized by semi-major axis `a`: `(ω̇ + Ṁ) / (ω⊕ − Ω̇)`.
pub fn period_ratio_at<R: Real>(a: R, e: R, i: R, consts: &PhysicalConstants<R>) -> Result<R, OrbitError> {
    let r = secular_rates(a, e, i, consts)?;
    Ok((r.omega_dot + r.m_dot) / (consts.earth_rotation_rate - r.raan_dot))
}

/// Solves for the semi-major axis whose J2 nodal periods realize `tau`.
///
/// Newton-Raphson on `f(a) = ω̇ + Ṁ − τ (ω⊕ − Ω̇)`, started from the
/// unperturbed Kepler guess for `T = N_D · (2π/ω⊕) / N_P`.
pub fn solve_semi_major_axis<R: Real>(
    tau: PeriodRatio,
    e: R,
    i: R,
    consts: &PhysicalConstants<R>,
) -> Result<PeriodSet<R>, OrbitError> {
    validate_shape(e, i)?;
    let ratio: R = tau.value();
    let two_pi = R::TAU();
    let one_minus_e2 = R::one() - e * e;
    let s2 = i.sin().powi(2);
    // Every J2 term scales with n (R/p)², so f(a) = n (1 + (R/p)² C) − τ ω⊕.
    let c = R::lit(1.5)
        * consts.j2
        * ((R::lit(2.0) - R::lit(2.5) * s2) - one_minus_e2.sqrt() * (R::lit(1.5) * s2 - R::one()) - ratio * i.cos());

    let period_guess = R::lit(tau.n_d() as f64) * (two_pi / consts.earth_rotation_rate) / R::lit(tau.n_p() as f64);
    let mut a = (consts.mu * (period_guess / two_pi).powi(2)).cbrt();
    let step_tol = R::solver_tolerance(1e-13);

    let mut converged = false;
    for _ in 0..SMA_MAX_ITERATIONS {
        let n = (consts.mu / (a * a * a)).sqrt();
        let q = (consts.earth_radius / (a * one_minus_e2)).powi(2);
        let f = n * (R::one() + q * c) - ratio * consts.earth_rotation_rate;
        let df = -(R::lit(1.5) * n + R::lit(3.5) * n * q * c) / a;
        if df == R::zero() || !df.is_finite() {
            break;
        }
        let step = f / df;
        a = a - step;
        if !(a > R::zero()) || !a.is_finite() {
            break;
        }
        if step.abs() <= step_tol * a {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(OrbitError::NoConvergence(SMA_MAX_ITERATIONS));
    }
    if a <= consts.earth_radius {
        return Err(OrbitError::BelowEarthRadius {
            a: a.as_f64(),
            radius: consts.earth_radius.as_f64(),
        });
    }
    let rates = secular_rates(a, e, i, consts)?;
    let t_s = two_pi / (rates.omega_dot + rates.m_dot);
    let t_g = two_pi / (consts.earth_rotation_rate - rates.raan_dot);
    Ok(PeriodSet {
        t_s,
        t_g,
        t_r: R::lit(tau.n_p() as f64) * t_s,
        semi_major_axis: a,
        semi_latus_rectum: a * one_minus_e2,
    })
}

/// Solves Kepler's equation `E − e sin E = M` for the eccentric anomaly.
pub fn eccentric_anomaly<R: Real>(mean_anomaly: R, e: R) -> R {
    if e == R::zero() {
        return mean_anomaly;
    }
    let tol = R::solver_tolerance(1e-12);
    let mut ecc = mean_anomaly;
    for _ in 0..KEPLER_MAX_ITERATIONS {
        let residual = ecc - e * ecc.sin() - mean_anomaly;
        if residual.abs() <= tol {
            break;
        }
        ecc = ecc - residual / (R::one() - e * ecc.cos());
    }
    ecc
}

/// Position vector, km.
pub type Vec3<R> = [R; 3];

/// A repeating ground track orbit with its solved size and rates, ready for
/// propagation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RgtOrbit<R> {
    pub elements: RgtElements<R>,
    pub periods: PeriodSet<R>,
    pub rates: SecularRates<R>,
    pub consts: PhysicalConstants<R>,
    greenwich_at_epoch: R,
}

impl<R: Real> RgtOrbit<R> {
    pub fn new(elements: RgtElements<R>, consts: PhysicalConstants<R>) -> Result<Self, OrbitError> {
        elements.validate()?;
        let periods = solve_semi_major_axis(elements.tau, elements.eccentricity, elements.inclination, &consts)?;
        let rates = secular_rates(
            periods.semi_major_axis,
            elements.eccentricity,
            elements.inclination,
            &consts,
        )?;
        Ok(Self {
            elements,
            periods,
            rates,
            consts,
            greenwich_at_epoch: greenwich_angle_at(elements.epoch, &consts),
        })
    }

    /// Same orbit geometry, different phasing `(Ω, M)` at the same epoch.
    pub fn with_phasing(&self, raan: R, mean_anomaly: R) -> Self {
        let mut out = *self;
        out.elements.raan = raan;
        out.elements.mean_anomaly = mean_anomaly;
        out
    }

    pub fn greenwich_angle(&self, t: R) -> R {
        self.greenwich_at_epoch + self.consts.earth_rotation_rate * t
    }

    /// ECI position `t` seconds after epoch.
    pub fn position_eci(&self, t: R) -> Vec3<R> {
        let el = &self.elements;
        let e = el.eccentricity;
        let a = self.periods.semi_major_axis;
        let raan = el.raan + self.rates.raan_dot * t;
        let argp = el.arg_perigee + self.rates.omega_dot * t;
        let m = wrap_two_pi(el.mean_anomaly + self.rates.m_dot * t);
        let ecc = eccentric_anomaly(m, e);
        let xp = a * (ecc.cos() - e);
        let yp = a * (R::one() - e * e).sqrt() * ecc.sin();

        let (so, co) = argp.sin_cos();
        let (sn, cn) = raan.sin_cos();
        let (si, ci) = el.inclination.sin_cos();
        // Perifocal -> ECI: Rz(Ω) Rx(i) Rz(ω).
        let x1 = co * xp - so * yp;
        let y1 = so * xp + co * yp;
        let y2 = ci * y1;
        let z2 = si * y1;
        [cn * x1 - sn * y2, sn * x1 + cn * y2, z2]
    }

    /// ECEF position `t` seconds after epoch.
    pub fn position_ecef(&self, t: R) -> Vec3<R> {
        let r = self.position_eci(t);
        let (s, c) = self.greenwich_angle(t).sin_cos();
        [c * r[0] + s * r[1], -s * r[0] + c * r[1], r[2]]
    }

    /// Geocentric (latitude, longitude) of the sub-satellite point, radians,
    /// longitude in `(-π, π]`.
    pub fn ground_point(&self, t: R) -> (R, R) {
        let r = self.position_ecef(t);
        let rho = (r[0] * r[0] + r[1] * r[1]).sqrt();
        (r[2].atan2(rho), r[1].atan2(r[0]))
    }
}

/// ECEF position of the orbit described by `elements`, `t` seconds after its
/// epoch. Solves the orbit size on every call; use [`RgtOrbit`] for repeated
/// sampling.
pub fn propagate_ecef<R: Real>(
    elements: &RgtElements<R>,
    t: R,
    consts: &PhysicalConstants<R>,
) -> Result<Vec3<R>, OrbitError> {
    Ok(RgtOrbit::new(*elements, *consts)?.position_ecef(t))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn consts() -> PhysicalConstants<f64> {
        PhysicalConstants::default()
    }

    #[test]
    fn period_ratio_reduces_to_lowest_terms() {
        let t = PeriodRatio::new(10, 2).unwrap();
        assert_eq!((t.n_p(), t.n_d()), (5, 1));
        assert_eq!("83/6".parse::<PeriodRatio>().unwrap(), PeriodRatio::new(83, 6).unwrap());
        assert!(PeriodRatio::new(0, 1).is_err());
        assert!("12".parse::<PeriodRatio>().is_err());
        assert!("a/b".parse::<PeriodRatio>().is_err());
    }

    #[test]
    fn critical_inclination_zeroes_perigee_drift() {
        let r = secular_rates(7000.0, 0.0, CRITICAL_INCLINATION_DEG.to_radians(), &consts()).unwrap();
        assert!(r.omega_dot.abs() < 1e-12);
        // The four-decimal angle sits 5e-5 deg off the root: ~2.5e-12 rad/s.
        let r = secular_rates(7000.0, 0.0, 63.4349f64.to_radians(), &consts()).unwrap();
        assert!(r.omega_dot.abs() < 5e-12);
    }

    #[test]
    fn polar_orbit_has_no_nodal_regression() {
        let r = secular_rates(7000.0, 0.0, std::f64::consts::FRAC_PI_2, &consts()).unwrap();
        // cos(π/2) rounds to ~6e-17 in f64.
        assert!(r.raan_dot.abs() < 1e-20);
        assert!(r.m_dot > 0.0);
    }

    #[test]
    fn rates_reject_degenerate_semi_latus_rectum() {
        assert!(matches!(
            secular_rates(-7000.0, 0.0, 1.0, &consts()),
            Err(OrbitError::SemiLatusRectum(_))
        ));
    }

    #[test]
    fn elliptic_orbits_must_be_critically_inclined() {
        let tau = PeriodRatio::new(5, 1).unwrap();
        assert!(RgtElements::from_degrees(tau, 0.41, 63.435, 90.0, 0.0, 0.0, Epoch::J2000).is_ok());
        assert!(RgtElements::from_degrees(tau, 0.41, 116.6, 90.0, 0.0, 0.0, Epoch::J2000).is_ok());
        assert!(matches!(
            RgtElements::from_degrees(tau, 0.41, 60.0, 90.0, 0.0, 0.0, Epoch::J2000),
            Err(OrbitError::NonCriticalEllipticInclination { .. })
        ));
        assert!(RgtElements::from_degrees(tau, 0.0, 180.0, 0.0, 0.0, 0.0, Epoch::J2000).is_err());
        assert!(RgtElements::from_degrees(tau, 1.0, 63.4, 0.0, 0.0, 0.0, Epoch::J2000).is_err());
    }

    #[test]
    fn solved_axis_reproduces_ratio_and_period_identity() {
        let c = consts();
        for (np, nd, i) in [(12, 1, 102.9), (83, 6, 99.2), (8, 1, 70.0), (1, 1, 10.0), (15, 1, 98.0)] {
            let tau = PeriodRatio::new(np, nd).unwrap();
            let i = f64::to_radians(i);
            let ps = solve_semi_major_axis(tau, 0.0, i, &c).unwrap();
            let got = period_ratio_at(ps.semi_major_axis, 0.0, i, &c).unwrap();
            let want = tau.value::<f64>();
            assert!(((got - want) / want).abs() <= 1e-12, "{np}/{nd}");
            let lhs = np as f64 * ps.t_s;
            let rhs = nd as f64 * ps.t_g;
            assert!(((lhs - rhs) / lhs).abs() <= 1e-9);
        }
    }

    #[test]
    fn infeasible_ratio_is_rejected() {
        // Forty revolutions per day would need an orbit inside the Earth.
        let tau = PeriodRatio::new(40, 1).unwrap();
        assert!(matches!(
            solve_semi_major_axis(tau, 0.0, 1.0f64, &consts()),
            Err(OrbitError::BelowEarthRadius { .. })
        ));
    }

    #[test]
    fn kepler_solution_has_small_residual() {
        for &e in &[0.0, 0.1, 0.41, 0.7, 0.9] {
            for k in 0..64 {
                let m = k as f64 * std::f64::consts::TAU / 64.0;
                let ecc: f64 = eccentric_anomaly(m, e);
                assert!((ecc - e * ecc.sin() - m).abs() <= 1e-12, "e={e} m={m}");
            }
        }
    }

    #[test]
    fn greenwich_angle_at_j2000_matches_model_constant() {
        let g: f64 = greenwich_angle_at(Epoch::J2000, &consts());
        assert!((g.to_degrees() - 280.46061837).abs() < 1e-9);
        // One sidereal day later the angle returns to the same value.
        let sidereal_day = 86_164.0905;
        let g2: f64 = greenwich_angle_at(Epoch::from_seconds_since_j2000(sidereal_day), &consts());
        assert!((g2 - g).abs() < 1e-4);
    }

    #[test]
    fn f32_instantiation_is_usable() {
        let c = PhysicalConstants::<f32>::default();
        let tau = PeriodRatio::new(12, 1).unwrap();
        let ps = solve_semi_major_axis(tau, 0.0f32, 102.9f32.to_radians(), &c).unwrap();
        assert!((ps.t_r - 86_400.0).abs() < 50.0);
    }
}
