//! The autonomous system `S` and its charts `Q`, `P`, `R`, `R_β`, with exact
//! conversions between them, the profile map and the first-integral functionals.
//!
//! With `τ = ln r`, `w = r^γ y` and `Y = -r^{(1-γ)(p-1)} |w'|^{p-2} w'`:
//!
//! ```text
//! S:   y' = -γ y - Φ(Y)            Y' = -(γ+N) Y + ε(α y - Φ(Y))
//! Q:   ζ = Φ(Y)/y,  σ = Y/y
//! P:   ζ,  ψ = 1/σ
//! R:   g = -1/ζ,  s = -σ,  dτ = g s dν
//! R_β: g,  S = s/β   (ε = -1)
//! ```
//!
//! where `Φ(Y) = sign(Y)|Y|^{1/(p-1)}`.

pub mod oracles;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{signed_pow, ProblemParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Chart {
    S,
    Q,
    P,
    R,
    #[serde(rename = "R_beta")]
    RBeta,
}

/// A point `(τ, y, Y)` of system `S`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseState {
    pub tau: f64,
    pub y: f64,
    #[serde(rename = "Y")]
    pub big_y: f64,
}

impl PhaseState {
    pub fn new(tau: f64, y: f64, big_y: f64) -> Self {
        Self { tau, y, big_y }
    }

    pub fn is_finite(&self) -> bool {
        self.tau.is_finite() && self.y.is_finite() && self.big_y.is_finite()
    }

    pub fn coords(&self) -> [f64; 2] {
        [self.y, self.big_y]
    }
}

/// Coordinates in one chart. `time` is `τ` for `S`, `Q`, `P` and `ν` for `R`, `R_β`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChartState {
    pub chart: Chart,
    pub coords: [f64; 2],
    pub time: f64,
}

/// A point of a radial profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileSample {
    pub r: f64,
    pub w: f64,
    pub dw: f64,
}

/// Stationary points of `S`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointId {
    Origin,
    MEll,
    MinusMEll,
}

/// Right-hand side of `S`.
#[inline]
pub fn s_field(pr: &ProblemParams, y: f64, big_y: f64) -> [f64; 2] {
    let g = pr.gamma();
    let f = pr.phi(big_y);
    [-g * y - f, -(g + pr.nf()) * big_y + pr.e() * (pr.alpha * y - f)]
}

/// Right-hand side of `Q` in `(ζ, σ)`.
pub fn q_field(pr: &ProblemParams, zeta: f64, sigma: f64) -> Result<[f64; 2]> {
    if sigma == 0.0 {
        return Err(Error::Domain("chart Q needs sigma != 0".into()));
    }
    let e = pr.e();
    let a = pr.alpha;
    Ok([
        zeta * (zeta - pr.eta() + e * (a - zeta) / ((pr.p - 1.0) * sigma)),
        e * (a - zeta) + (zeta - pr.nf()) * sigma,
    ])
}

/// Right-hand side of `P` in `(ζ, ψ)`.
#[inline]
pub fn p_field(pr: &ProblemParams, zeta: f64, psi: f64) -> [f64; 2] {
    let e = pr.e();
    let a = pr.alpha;
    [
        zeta * (zeta - pr.eta() + e * (a - zeta) * psi / (pr.p - 1.0)),
        psi * (pr.nf() - zeta + e * (zeta - a) * psi),
    ]
}

/// Right-hand side of `R` in `(g, s)` with respect to `ν`.
#[inline]
pub fn r_field(pr: &ProblemParams, g: f64, s: f64) -> [f64; 2] {
    let e = pr.e();
    let a = pr.alpha;
    [
        g * (s * (1.0 + pr.eta() * g) + e * (1.0 + a * g) / (pr.p - 1.0)),
        -s * (e * (1.0 + a * g) + (1.0 + pr.nf() * g) * s),
    ]
}

/// Right-hand side of `R_β` in `(g, S)` with respect to `ν`; only for `ε = -1`.
pub fn rbeta_field(pr: &ProblemParams, g: f64, big_s: f64) -> Result<[f64; 2]> {
    let b = rbeta_check(pr)?;
    let a = pr.alpha;
    let f = b * big_s * (1.0 + pr.eta() * g) - (1.0 + a * g) / (pr.p - 1.0);
    let gg = 1.0 + a * g - b * (1.0 + pr.nf() * g) * big_s;
    Ok([g * f, big_s * gg])
}

fn rbeta_check(pr: &ProblemParams) -> Result<f64> {
    if pr.e() > 0.0 {
        return Err(Error::Domain("chart R_beta is defined for epsilon = -1".into()));
    }
    let b = pr.beta();
    if b == 0.0 {
        return Err(Error::Domain("chart R_beta needs beta != 0".into()));
    }
    Ok(b)
}

/// Field of any chart.
pub fn field(chart: Chart, coords: [f64; 2], pr: &ProblemParams) -> Result<[f64; 2]> {
    if !(coords[0].is_finite() && coords[1].is_finite()) {
        return Err(Error::Domain("non-finite coordinates".into()));
    }
    match chart {
        Chart::S => Ok(s_field(pr, coords[0], coords[1])),
        Chart::Q => q_field(pr, coords[0], coords[1]),
        Chart::P => Ok(p_field(pr, coords[0], coords[1])),
        Chart::R => Ok(r_field(pr, coords[0], coords[1])),
        Chart::RBeta => rbeta_field(pr, coords[0], coords[1]),
    }
}

/// Jacobian of `S`; the `Y`-derivative is infinite on `Y = 0`.
pub fn s_jacobian(pr: &ProblemParams, y: f64, big_y: f64) -> [[f64; 2]; 2] {
    let _ = y;
    let g = pr.gamma();
    let dphi = if big_y == 0.0 {
        f64::INFINITY
    } else {
        big_y.abs().powf((2.0 - pr.p) / (pr.p - 1.0)) / (pr.p - 1.0)
    };
    [
        [-g, -dphi],
        [pr.e() * pr.alpha, -(g + pr.nf()) - pr.e() * dphi],
    ]
}

/// `(ζ, σ)` from `(y, Y)`.
pub fn to_q(pr: &ProblemParams, y: f64, big_y: f64) -> Result<[f64; 2]> {
    if y == 0.0 {
        return Err(Error::Domain("zeta needs y != 0".into()));
    }
    Ok([pr.phi(big_y) / y, big_y / y])
}

/// `(y, Y)` from `(ζ, σ)`, choosing the sign of `y`.
///
/// Uses `|σ| = |ζ|^{p-1} |y|^{p-2}`; the result may overflow to infinity far out.
pub fn from_q(pr: &ProblemParams, zeta: f64, sigma: f64, y_positive: bool) -> Result<[f64; 2]> {
    if zeta == 0.0 || sigma == 0.0 {
        return Err(Error::Domain("(zeta, sigma) on an axis does not determine y".into()));
    }
    if zeta.signum() != sigma.signum() {
        return Err(Error::Domain("zeta and sigma must share a sign".into()));
    }
    let p = pr.p;
    let ln_y = (sigma.abs().ln() + (1.0 - p) * zeta.abs().ln()) / (p - 2.0);
    let y = if y_positive { ln_y.exp() } else { -ln_y.exp() };
    Ok([y, sigma * y])
}

/// `|y| + |Y|^{1/(p-1)}`, a homogeneous size of a state.
#[inline]
pub fn magnitude(pr: &ProblemParams, y: f64, big_y: f64) -> f64 {
    y.abs() + pr.phi(big_y).abs()
}

pub fn convert(state: &PhaseState, target: Chart, pr: &ProblemParams) -> Result<ChartState> {
    let (y, yy) = (state.y, state.big_y);
    let coords = match target {
        Chart::S => [y, yy],
        Chart::Q => to_q(pr, y, yy)?,
        Chart::P => {
            if yy == 0.0 {
                return Err(Error::Domain("psi needs Y != 0".into()));
            }
            let q = to_q(pr, y, yy)?;
            [q[0], y / yy]
        }
        Chart::R | Chart::RBeta => {
            if yy == 0.0 {
                return Err(Error::Domain("chart R needs Y != 0".into()));
            }
            let q = to_q(pr, y, yy)?;
            let g = -1.0 / q[0];
            let s = -q[1];
            if target == Chart::R {
                [g, s]
            } else {
                [g, s / rbeta_check(pr)?]
            }
        }
    };
    let time = match target {
        Chart::S | Chart::Q | Chart::P => state.tau,
        Chart::R | Chart::RBeta => 0.0,
    };
    Ok(ChartState { chart: target, coords, time })
}

/// Back to `S`. The sign of `y` is not encoded by the ratio charts and must be supplied;
/// `tau` is used for the `ν`-timed charts.
pub fn invert(cs: &ChartState, pr: &ProblemParams, y_positive: bool, tau: f64) -> Result<PhaseState> {
    let [a, b] = cs.coords;
    let (zeta, sigma) = match cs.chart {
        Chart::S => return Ok(PhaseState::new(cs.time, a, b)),
        Chart::Q => (a, b),
        Chart::P => {
            if b == 0.0 {
                return Err(Error::Domain("psi = 0 is at infinity".into()));
            }
            (a, 1.0 / b)
        }
        Chart::R => {
            if a == 0.0 {
                return Err(Error::Domain("g = 0 is the origin".into()));
            }
            (-1.0 / a, -b)
        }
        Chart::RBeta => {
            if a == 0.0 {
                return Err(Error::Domain("g = 0 is the origin".into()));
            }
            (-1.0 / a, -b * rbeta_check(pr)?)
        }
    };
    let [y, yy] = from_q(pr, zeta, sigma, y_positive)?;
    let t = match cs.chart {
        Chart::Q | Chart::P => cs.time,
        _ => tau,
    };
    Ok(PhaseState::new(t, y, yy))
}

/// `|w'|^{p-2} w'`.
#[inline]
pub fn flux(pr: &ProblemParams, dw: f64) -> f64 {
    signed_pow(dw, pr.p - 1.0)
}

pub fn to_profile(state: &PhaseState, pr: &ProblemParams) -> ProfileSample {
    let g = pr.gamma();
    let r = state.tau.exp();
    ProfileSample {
        r,
        w: (g * state.tau).exp() * state.y,
        dw: -((g - 1.0) * state.tau).exp() * pr.phi(state.big_y),
    }
}

pub fn from_profile(sample: &ProfileSample, pr: &ProblemParams) -> PhaseState {
    let g = pr.gamma();
    let tau = sample.r.ln();
    PhaseState {
        tau,
        y: (-g * tau).exp() * sample.w,
        big_y: -((1.0 - g) * (pr.p - 1.0) * tau).exp() * flux(pr, sample.dw),
    }
}

/// `J_N = r^N (w + ε r^{-1} |w'|^{p-2} w')`, constant along `α = N` orbits.
pub fn j_n(sample: &ProfileSample, pr: &ProblemParams) -> f64 {
    sample.r.powf(pr.nf()) * (sample.w + pr.e() * flux(pr, sample.dw) / sample.r)
}

/// `J_α = r^{α-N} J_N`, with `dJ_α/dr = -ε(N-α) r^{α-2} |w'|^{p-2} w'`.
pub fn j_alpha(sample: &ProfileSample, pr: &ProblemParams) -> f64 {
    sample.r.powf(pr.alpha - pr.nf()) * j_n(sample, pr)
}

/// `E = |w'|^p/p' + α w²/2`, non-increasing in `r` when `ε = 1`.
pub fn energy(sample: &ProfileSample, pr: &ProblemParams) -> f64 {
    sample.dw.abs().powf(pr.p) / pr.p_prime() + pr.alpha * sample.w * sample.w / 2.0
}

/// `R = y²/2 + |Y|^{p'}/(p'|α|)`, eventually below `1/(|α|γ)` when `ε = -1`, `α < 0`.
pub fn bound_functional(pr: &ProblemParams, y: f64, big_y: f64) -> f64 {
    let pp = pr.p_prime();
    y * y / 2.0 + big_y.abs().powf(pp) / (pp * pr.alpha.abs())
}

/// Residual of the profile equation given `w`, `w'` and `(|w'|^{p-2}w')'`, scaled by the
/// size of its terms.
pub fn profile_residual(pr: &ProblemParams, r: f64, w: f64, dw: f64, dflux: f64) -> f64 {
    let z = flux(pr, dw);
    let t1 = dflux;
    let t2 = (pr.nf() - 1.0) / r * z;
    let t3 = pr.e() * (r * dw + pr.alpha * w);
    let scale = t1.abs() + t2.abs() + (r * dw).abs() + (pr.alpha * w).abs();
    if scale == 0.0 {
        0.0
    } else {
        (t1 + t2 + t3).abs() / scale
    }
}

/// Stationary points of `S`: always the origin, and `±M_ℓ` when `ℓ` exists.
pub fn stationary_points(pr: &ProblemParams) -> Vec<(PointId, [f64; 2])> {
    let mut v = vec![(PointId::Origin, [0.0, 0.0])];
    if let Some(l) = pr.ell() {
        let yy = -(pr.gamma() * l).powf(pr.p - 1.0);
        v.push((PointId::MEll, [l, yy]));
        v.push((PointId::MinusMEll, [-l, -yy]));
    }
    v
}

/// Location of `M_ℓ`, if it exists.
pub fn m_ell(pr: &ProblemParams) -> Option<[f64; 2]> {
    pr.ell().map(|l| [l, -(pr.gamma() * l).powf(pr.p - 1.0)])
}
