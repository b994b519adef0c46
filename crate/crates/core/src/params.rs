//! Problem parameters `(N, p, α, ε)` and their closed-form derived constants.
//!
//! The profile equation is
//! `(|w'|^{p-2} w')' + (N-1)/r |w'|^{p-2} w' + ε (r w' + α w) = 0`, with `p > 2`.

use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};

/// The sign `ε` in front of the drift term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Deserialize)]
#[serde(try_from = "i32")]
pub enum Eps {
    Plus,
    Minus,
}

impl Eps {
    pub fn value(self) -> f64 {
        match self {
            Eps::Plus => 1.0,
            Eps::Minus => -1.0,
        }
    }

    pub fn from_int(v: i32) -> Result<Self> {
        match v {
            1 => Ok(Eps::Plus),
            -1 => Ok(Eps::Minus),
            _ => Err(Error::InvalidParams(format!(
                "epsilon must be +1 or -1, got {v}"
            ))),
        }
    }
}

impl TryFrom<i32> for Eps {
    type Error = Error;
    fn try_from(v: i32) -> Result<Self> {
        Eps::from_int(v)
    }
}

impl Serialize for Eps {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_i32(self.value() as i32)
    }
}

/// A validated parameter tuple.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProblemParams {
    #[serde(rename = "N")]
    pub n: u32,
    pub p: f64,
    pub alpha: f64,
    #[serde(rename = "epsilon")]
    pub eps: Eps,
}

/// Rejects `p <= 2` and `N < 1`; shared by every constructor.
pub fn check_base(n: u32, p: f64) -> Result<()> {
    if !(p.is_finite() && p > 2.0) {
        return Err(Error::InvalidParams(format!("p must exceed 2 (got {p})")));
    }
    if n < 1 {
        return Err(Error::InvalidParams("N must be at least 1".into()));
    }
    Ok(())
}

impl ProblemParams {
    pub fn new(n: u32, p: f64, alpha: f64, eps: Eps) -> Result<Self> {
        check_base(n, p)?;
        if !alpha.is_finite() {
            return Err(Error::InvalidParams(format!("alpha must be finite (got {alpha})")));
        }
        if alpha == 0.0 {
            return Err(Error::InvalidParams(
                "alpha must be nonzero: the phase-plane analysis assumes α ≠ 0 \
                 (use the alpha_zero oracle for α = 0)"
                    .into(),
            ));
        }
        Ok(Self { n, p, alpha, eps })
    }

    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        Self::new(self.n, self.p, alpha, self.eps)
    }

    pub fn nf(&self) -> f64 {
        self.n as f64
    }

    pub fn e(&self) -> f64 {
        self.eps.value()
    }

    pub fn gamma(&self) -> f64 {
        gamma(self.p)
    }

    pub fn eta(&self) -> f64 {
        eta(self.nf(), self.p)
    }

    pub fn p_prime(&self) -> f64 {
        p_prime(self.p)
    }

    pub fn beta(&self) -> f64 {
        self.alpha * (self.p - 2.0) + self.p
    }

    /// `ℓ`, present iff `ε(α+γ) < 0`.
    pub fn ell(&self) -> Option<f64> {
        let g = self.gamma();
        let apg = self.alpha + g;
        if self.e() * apg < 0.0 {
            Some((apg.abs() / (g.powf(self.p - 1.0) * (g + self.nf()))).powf(1.0 / (self.p - 2.0)))
        } else {
            None
        }
    }

    /// `ν(α)`, present iff `α ≠ -γ`.
    pub fn nu(&self) -> Option<f64> {
        let g = self.gamma();
        let d = g + self.alpha;
        if d == 0.0 {
            None
        } else {
            Some(-g * (self.nf() + g) / ((self.p - 1.0) * d))
        }
    }

    /// `Φ(Y) = sign(Y)|Y|^{1/(p-1)}`, the canonical evaluation of `|Y|^{(2-p)/(p-1)} Y`.
    #[inline]
    pub fn phi(&self, big_y: f64) -> f64 {
        signed_pow(big_y, 1.0 / (self.p - 1.0))
    }

    /// Scale of nontrivial states of the phase plane.
    pub fn scale(&self) -> f64 {
        self.ell().unwrap_or_else(|| c_u(self.nf(), self.p))
    }
}

/// `sign(x)|x|^e`, zero at zero.
#[inline]
pub fn signed_pow(x: f64, e: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x.signum() * x.abs().powf(e)
    }
}

pub fn gamma(p: f64) -> f64 {
    p / (p - 2.0)
}

pub fn eta(n: f64, p: f64) -> f64 {
    (n - p) / (p - 1.0)
}

pub fn p_prime(p: f64) -> f64 {
    p / (p - 1.0)
}

/// The Hopf value `α*`.
pub fn alpha_star(n: f64, p: f64) -> f64 {
    let g = gamma(p);
    -g + g * (n + g) / ((p - 1.0) * (n + 2.0 * g))
}

/// `α_p = -(p-1)/(p-2)`.
pub fn alpha_p(p: f64) -> f64 {
    -(p - 1.0) / (p - 2.0)
}

fn node_root(p: f64, n: f64) -> f64 {
    2.0 * (p_prime(p) * (n + gamma(p))).sqrt()
}

/// Lower node threshold `α_1`.
pub fn alpha_1(n: f64, p: f64) -> f64 {
    let g = gamma(p);
    -g + g * (n + g) / ((p - 1.0) * (2.0 * g + n + node_root(p, n)))
}

/// Upper node threshold `α_2`, absent when its denominator is not positive.
pub fn alpha_2(n: f64, p: f64) -> Option<f64> {
    let g = gamma(p);
    let d = 2.0 * g + n - node_root(p, n);
    if d > 0.0 {
        Some(-g + g * (n + g) / ((p - 1.0) * d))
    } else {
        None
    }
}

/// Coefficient of the flat solution `U`.
pub fn c_u(n: f64, p: f64) -> f64 {
    let g = gamma(p);
    ((p - 2.0) * g.powf(p - 1.0) * (g + n)).powf(1.0 / (2.0 - p))
}

/// Every closed-form constant attached to a parameter tuple.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedConstants {
    pub gamma: f64,
    pub eta: f64,
    pub p_prime: f64,
    pub beta: f64,
    pub ell: Option<f64>,
    pub alpha_star: f64,
    pub alpha_p: f64,
    pub alpha_1: f64,
    pub alpha_2: Option<f64>,
    pub nu_alpha: Option<f64>,
    #[serde(rename = "C_U")]
    pub c_u: f64,
    /// `Δ = (2γ+N+ν)² - 4p'(N+γ)`, present with `ν`.
    #[serde(rename = "discriminant_Delta")]
    pub discriminant: Option<f64>,
}

pub fn derive_constants(params: &ProblemParams) -> DerivedConstants {
    let n = params.nf();
    let p = params.p;
    let g = gamma(p);
    let pp = p_prime(p);
    let nu = params.nu();
    DerivedConstants {
        gamma: g,
        eta: eta(n, p),
        p_prime: pp,
        beta: params.beta(),
        ell: params.ell(),
        alpha_star: alpha_star(n, p),
        alpha_p: alpha_p(p),
        alpha_1: alpha_1(n, p),
        alpha_2: alpha_2(n, p),
        nu_alpha: nu,
        c_u: c_u(n, p),
        discriminant: nu.map(|v| (2.0 * g + n + v).powi(2) - 4.0 * pp * (n + g)),
    }
}
