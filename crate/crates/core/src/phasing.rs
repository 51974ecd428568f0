//! From pattern vectors back to orbits: member element sets on the common
//! ground track, and the longitude-unwrapped ("expanded") ground track.

use std::io::{self, Write};

use crate::coverage::PatternVector;
use crate::geodesy::TimeGrid;
use crate::orbit::{RgtElements, RgtOrbit};
use crate::scalar::{wrap_two_pi, Real};

/// One member of a common-ground-track constellation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Member<R> {
    /// Time shift (pattern index) relative to the seed.
    pub shift: usize,
    pub elements: RgtElements<R>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MemberElements<R> {
    pub seed: RgtElements<R>,
    pub length: usize,
    pub members: Vec<Member<R>>,
}

/// `(Ω_k, M_k)` for a satellite trailing the seed by `shift` of `length`
/// steps. The node steps by `2π·N_D/L` per index; `M` follows from the
/// phasing condition using the unreduced node offset, so both stay exact
/// before the final reduction to `[0, 2π)`.
pub fn member_phasing<R: Real>(seed: &RgtElements<R>, shift: usize, length: usize) -> (R, R) {
    let frac = R::lit((shift % length) as f64) / R::lit(length as f64);
    let two_pi = R::TAU();
    let n_p = R::lit(seed.tau.n_p() as f64);
    let n_d = R::lit(seed.tau.n_d() as f64);
    let raan = wrap_two_pi(seed.raan + two_pi * n_d * frac);
    let mean_anomaly = wrap_two_pi(seed.mean_anomaly - two_pi * n_p * frac);
    (raan, mean_anomaly)
}

pub fn elements_from_pattern<R: Real>(
    seed: &RgtElements<R>,
    pattern: &PatternVector,
    grid: &TimeGrid,
) -> MemberElements<R> {
    let length = grid.length;
    let members = pattern
        .indices()
        .into_iter()
        .map(|n| {
            let (raan, mean_anomaly) = member_phasing(seed, n, length);
            let mut elements = *seed;
            elements.raan = raan;
            elements.mean_anomaly = mean_anomaly;
            Member { shift: n, elements }
        })
        .collect();
    MemberElements {
        seed: *seed,
        length,
        members,
    }
}

/// `|N_P(Ω_k − Ω₀) + N_D(M_k − M₀)|` reduced to `[0, π]`.
pub fn phasing_residual<R: Real>(seed: &RgtElements<R>, member: &RgtElements<R>) -> R {
    let n_p = R::lit(member.tau.n_p() as f64);
    let n_d = R::lit(member.tau.n_d() as f64);
    let r = n_p * (member.raan - seed.raan) + n_d * (member.mean_anomaly - seed.mean_anomaly);
    let r = wrap_two_pi(r);
    if r > R::PI() {
        R::TAU() - r
    } else {
        r
    }
}

impl<R: Real> MemberElements<R> {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn max_residual(&self) -> R {
        self.members
            .iter()
            .map(|m| phasing_residual(&self.seed, &m.elements))
            .fold(R::zero(), R::max)
    }

    /// Header `k,n_k,tau,e,i_deg,omega_deg,raan_deg,mean_anomaly_deg`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "k,n_k,tau,e,i_deg,omega_deg,raan_deg,mean_anomaly_deg")?;
        for (k, m) in self.members.iter().enumerate() {
            let el = &m.elements;
            writeln!(
                w,
                "{},{},{},{},{},{},{},{}",
                k + 1,
                m.shift,
                el.tau,
                el.eccentricity.as_f64(),
                el.inclination.as_f64().to_degrees(),
                el.arg_perigee.as_f64().to_degrees(),
                el.raan.as_f64().to_degrees(),
                el.mean_anomaly.as_f64().to_degrees(),
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackSample {
    pub t: f64,
    pub lon_deg: f64,
    pub lat_deg: f64,
}

/// One repeat period of the ground track with longitude unwrapped along the
/// direction of motion.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpandedTrack {
    pub samples: Vec<TrackSample>,
    /// `|λ(T_r) − λ(0)|` of the unwrapped longitude, degrees.
    pub span_deg: f64,
}

/// Minimum samples per revolution, so consecutive longitudes never differ by
/// more than half a turn.
const SAMPLES_PER_REV: usize = 72;

pub fn expanded_track<R: Real>(orbit: &RgtOrbit<R>, grid: &TimeGrid) -> ExpandedTrack {
    let revs = orbit.elements.tau.n_p() as usize;
    let sub = (SAMPLES_PER_REV * revs).div_ceil(grid.length.max(1)).max(1);
    let total = grid.length * sub;
    let dt = grid.t_step / sub as f64;
    let mut samples = Vec::with_capacity(total + 1);
    let mut prev: Option<f64> = None;
    let mut offset = 0.0;
    for s in 0..=total {
        let t = dt * s as f64;
        let (lat, lon) = orbit.ground_point(R::lit(t));
        let lon = lon.as_f64().to_degrees();
        if let Some(p) = prev {
            let d = lon + offset - p;
            if d > 180.0 {
                offset -= 360.0;
            } else if d < -180.0 {
                offset += 360.0;
            }
        }
        let unwrapped = lon + offset;
        prev = Some(unwrapped);
        samples.push(TrackSample {
            t,
            lon_deg: unwrapped,
            lat_deg: lat.as_f64().to_degrees(),
        });
    }
    let span_deg = (samples[samples.len() - 1].lon_deg - samples[0].lon_deg).abs();
    ExpandedTrack { samples, span_deg }
}

/// Span an ideal track must have: `360|N_P − N_D|` prograde,
/// `360(N_P + N_D)` retrograde.
pub fn expected_span_deg<R: Real>(elements: &RgtElements<R>) -> f64 {
    let (p, d) = (elements.tau.n_p() as f64, elements.tau.n_d() as f64);
    if elements.is_retrograde() {
        360.0 * (p + d)
    } else {
        360.0 * (p - d).abs()
    }
}

impl ExpandedTrack {
    /// Header `t_s,lon_unwrapped_deg,lat_deg`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t_s,lon_unwrapped_deg,lat_deg")?;
        for s in &self.samples {
            writeln!(w, "{},{},{}", s.t, s.lon_deg, s.lat_deg)?;
        }
        Ok(())
    }
}
