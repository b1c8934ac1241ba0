//! Scenario geometry and the free-space two-path channel.
//!
//! The scene is two-dimensional and measured in carrier wavelengths.  A
//! transmitter and a uniform linear array face each other on the x axis and
//! a passive tag sits somewhere nearby.  The receiver sees the direct path
//! gains â and the two-hop backscatter gains ĥ.  [`channel_state`] reduces
//! the pair to the coordinates the receiver chain actually works with: unit
//! direction `a`, the orthonormal residual direction `c`, the split
//! (η₁, η₂) of the backscatter gain across them, the power ratio Δ and the
//! excess-path phase offset φ.
//!
//! # Example
//!
//! ```
//! use ambc_core::geometry::{build_linear_scenario, channel_state, raw_gains, TagPlacement};
//!
//! let sc = build_linear_scenario(80.0, 8, TagPlacement::polar(2.0)).unwrap();
//! let chan = channel_state(&raw_gains(&sc), &sc);
//! let delta_db = 10.0 * chan.delta.log10();
//! assert!(delta_db < -25.0 && delta_db > -40.0);
//! ```

use crate::linalg::{inner, norm, norm_sqr, project_out, scale};
use crate::{Error, Result, C64};
use std::f64::consts::PI;

/// Neighbouring array elements sit exactly half a wavelength apart.
pub const ELEMENT_SPACING: f64 = 0.5;

/// Minimum node separation accepted when building a scenario.
const COINCIDENCE_TOL: f64 = 1e-9;

/// Tag position specification for [`build_linear_scenario`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TagPlacement {
    /// Explicit coordinates in the scenario frame.
    Xy([f64; 2]),
    /// Distance `d11` from the reference antenna at an incidence angle
    /// (radians) against the transmitter-to-receiver axis.  The tag is
    /// placed on the transmitter side of the array, below the axis:
    /// `(x_ref − d11·cos(angle), −d11·sin(angle))`, which keeps it off the
    /// array extension.
    Polar { d11: f64, angle: f64 },
}

impl TagPlacement {
    /// Polar placement at the default π/4 incidence angle.
    pub fn polar(d11: f64) -> Self {
        TagPlacement::Polar {
            d11,
            angle: PI / 4.0,
        }
    }
}

/// Node coordinates of one scenario: transmitter, array elements (index 0 is
/// the reference element) and tag, all in wavelengths.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioGeometry {
    pub tx: [f64; 2],
    pub antennas: Vec<[f64; 2]>,
    pub tag: [f64; 2],
}

fn dist(p: [f64; 2], q: [f64; 2]) -> f64 {
    ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()
}

impl ScenarioGeometry {
    /// Builds a scenario from explicit coordinates.  The array must be a
    /// uniform line with half-wavelength spacing and no node may coincide
    /// with another; positions are otherwise free, so a rigid translation or
    /// rotation of a valid scenario is again valid.
    pub fn new(tx: [f64; 2], antennas: Vec<[f64; 2]>, tag: [f64; 2]) -> Result<Self> {
        if antennas.len() < 2 {
            return Err(Error::Geometry(format!(
                "need at least 2 antennas, got {}",
                antennas.len()
            )));
        }
        let step = [
            antennas[1][0] - antennas[0][0],
            antennas[1][1] - antennas[0][1],
        ];
        let step_len = (step[0] * step[0] + step[1] * step[1]).sqrt();
        if (step_len - ELEMENT_SPACING).abs() > 1e-9 {
            return Err(Error::Geometry(format!(
                "antenna spacing must be {ELEMENT_SPACING}, got {step_len}"
            )));
        }
        for (l, pair) in antennas.windows(2).enumerate() {
            let d = [pair[1][0] - pair[0][0], pair[1][1] - pair[0][1]];
            if (d[0] - step[0]).abs() > 1e-9 || (d[1] - step[1]).abs() > 1e-9 {
                return Err(Error::Geometry(format!(
                    "array is not uniform at element {}",
                    l + 1
                )));
            }
        }
        let sc = ScenarioGeometry { tx, antennas, tag };
        for (name, node) in sc.nodes() {
            if name != "tag" && dist(sc.tag, node) < COINCIDENCE_TOL {
                return Err(Error::Geometry(format!("tag coincides with {name}")));
            }
        }
        if dist(sc.tx, sc.antennas[0]) < COINCIDENCE_TOL {
            return Err(Error::Geometry(
                "transmitter coincides with the array".into(),
            ));
        }
        Ok(sc)
    }

    fn nodes(&self) -> Vec<(&'static str, [f64; 2])> {
        let mut v = vec![("tx", self.tx)];
        for a in &self.antennas {
            v.push(("antenna", *a));
        }
        v.push(("tag", self.tag));
        v
    }

    pub fn n_r(&self) -> usize {
        self.antennas.len()
    }

    /// Direct-path length from the transmitter to element `l`.
    pub fn d_tx_antenna(&self, l: usize) -> f64 {
        dist(self.tx, self.antennas[l])
    }

    /// Backscatter hop from the tag to element `l`.
    pub fn d_tag_antenna(&self, l: usize) -> f64 {
        dist(self.tag, self.antennas[l])
    }

    /// Forward hop from the transmitter to the tag.
    pub fn d_tx_tag(&self) -> f64 {
        dist(self.tx, self.tag)
    }
}

/// Canonical frame: transmitter at (−d01/2, 0), reference element at
/// (+d01/2, 0), further elements extending in +y at half-wavelength steps.
pub fn build_linear_scenario(d01: f64, n_r: usize, tag: TagPlacement) -> Result<ScenarioGeometry> {
    if !d01.is_finite() || d01 <= 0.0 {
        return Err(Error::Geometry(format!("d01 must be positive, got {d01}")));
    }
    let ref_x = d01 / 2.0;
    let tag = match tag {
        TagPlacement::Xy(p) => p,
        TagPlacement::Polar { d11, angle } => {
            if !d11.is_finite() || d11 <= 0.0 {
                return Err(Error::Geometry(format!("d11 must be positive, got {d11}")));
            }
            [ref_x - d11 * angle.cos(), -d11 * angle.sin()]
        }
    };
    let antennas = (0..n_r)
        .map(|l| [ref_x, ELEMENT_SPACING * l as f64])
        .collect();
    ScenarioGeometry::new([-ref_x, 0.0], antennas, tag)
}

/// Raw per-element channel gains before any normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct RawChannel {
    /// Direct path: â_l = 1/(4π·d_tx,l) · e^{j2π·d_tx,l}.
    pub a_hat: Vec<C64>,
    /// Backscatter path: ĥ_l = 1/(4π·d_tag,l) · 1/(4π·d_tx,tag) ·
    /// e^{j2π(d_tag,l + d_tx,tag)}.
    pub h_hat: Vec<C64>,
}

/// One-way free-space amplitude over a path of `d` wavelengths.
fn amplitude(d: f64) -> f64 {
    1.0 / (4.0 * PI * d)
}

fn phasor(d: f64) -> C64 {
    C64::from_polar(1.0, 2.0 * PI * d)
}

/// Free-space gains of both paths.  Phases advance by 2π per wavelength of
/// path length; the backscatter amplitude is the product of its two hops, so
/// it decays with the product of the hop distances and sits far below the
/// direct path for any tag more than a fraction of a wavelength away.
pub fn raw_gains(geom: &ScenarioGeometry) -> RawChannel {
    let d2 = geom.d_tx_tag();
    let a_hat = (0..geom.n_r())
        .map(|l| {
            let d = geom.d_tx_antenna(l);
            phasor(d) * amplitude(d)
        })
        .collect();
    let h_hat = (0..geom.n_r())
        .map(|l| {
            let d1 = geom.d_tag_antenna(l);
            phasor(d1 + d2) * (amplitude(d1) * amplitude(d2))
        })
        .collect();
    RawChannel { a_hat, h_hat }
}

/// Channel coordinates used by the receiver and the closed-form analysis.
///
/// `a` is the unit direct-path direction and `c` the unit component of the
/// backscatter direction orthogonal to it, phased so that η₂ = cᴴh is real
/// and nonnegative.  Both have the global reference phase stripped: the
/// reference element entry of `a` is real positive, and the backscatter
/// excess phase lives entirely in the scalar `phi` rather than in `h`.
#[derive(Debug, Clone)]
pub struct ChannelState {
    pub a: Vec<C64>,
    /// Normalized backscatter gain: h = η₁·a + η₂·c.
    pub h: Vec<C64>,
    pub c: Vec<C64>,
    /// aᴴh, the backscatter component that leaks along the direct path.
    pub eta1: C64,
    /// cᴴh ≥ 0, the detectable backscatter component.
    pub eta2: f64,
    /// ‖h‖² = |η₁|² + η₂², backscatter-to-direct power ratio.
    pub delta: f64,
    /// Excess-path phase 2π(d_tag,ref + d_tx,tag − d_tx,ref) mod 2π.
    pub phi: f64,
    /// Set when the backscatter direction is parallel to `a` (η₂ ≈ 0), in
    /// which case `c` is an arbitrary unit vector orthogonal to `a`.
    pub degenerate: bool,
}

/// Normalizes the raw gains by ‖â‖ and splits the backscatter direction into
/// components along and orthogonal to the direct path.
pub fn channel_state(raw: &RawChannel, geom: &ScenarioGeometry) -> ChannelState {
    let two_pi = 2.0 * PI;
    let d01 = geom.d_tx_antenna(0);
    let d11 = geom.d_tag_antenna(0);
    let d2 = geom.d_tx_tag();
    let phi0 = (two_pi * d01).rem_euclid(two_pi);
    let phi = (two_pi * (d11 + d2 - d01)).rem_euclid(two_pi);

    let na = norm(&raw.a_hat);
    let inv = C64::new(1.0 / na, 0.0);
    let a_tilde = scale(&raw.a_hat, inv);
    let h_tilde = scale(&raw.h_hat, inv);
    let a = scale(&a_tilde, C64::from_polar(1.0, -phi0));
    let h = scale(&h_tilde, C64::from_polar(1.0, -(phi + phi0)));

    let eta1 = inner(&a, &h);
    let delta = norm_sqr(&h);
    let resid = project_out(&a, &h);
    let resid_norm = norm(&resid);
    let degenerate = resid_norm <= 1e-12 * norm(&h);
    let (c, eta2) = if degenerate {
        (orthonormal_filler(&a), 0.0)
    } else {
        let mut c = scale(&resid, C64::new(1.0 / resid_norm, 0.0));
        // cᴴh is already ≈ ‖resid‖ > 0; rotate away the numerical phase so
        // that η₂ is exactly real.
        let ip = inner(&c, &h);
        c = scale(&c, ip.conj() / ip.norm());
        let eta2 = inner(&c, &h).re;
        (c, eta2)
    };

    ChannelState {
        a,
        h,
        c,
        eta1,
        eta2,
        delta,
        phi,
        degenerate,
    }
}

/// Deterministic unit vector orthogonal to `a`, for the degenerate case.
fn orthonormal_filler(a: &[C64]) -> Vec<C64> {
    for k in 0..a.len() {
        let mut e = vec![C64::new(0.0, 0.0); a.len()];
        e[k] = C64::new(1.0, 0.0);
        let r = project_out(a, &e);
        let n = norm(&r);
        if n > 1e-6 {
            return scale(&r, C64::new(1.0 / n, 0.0));
        }
    }
    unreachable!("a unit vector cannot span every basis direction");
}
