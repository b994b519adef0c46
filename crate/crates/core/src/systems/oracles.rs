//! Explicit profiles used as ground truth.

use serde::{Deserialize, Serialize};

use super::ProfileSample;
use crate::error::{Error, Result};
use crate::params::{self, check_base, Eps, ProblemParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleKind {
    /// `w = ℓ r^γ` (free constant: sign, ±1).
    UFlat,
    /// `w = (K - ε r^{p'}/γ)_+^{(p-1)/(p-2)}`, `α = N`.
    Barenblatt,
    /// `w = C r^{-η}`, `α = η ≠ 0`.
    PHarmonic,
    /// `w = K (N |K p'|^{p-2} + ε r^{p'})`, `α = -p'`.
    Quadratic,
    /// `α = 0`: `|w'| = r^{-(η+1)} (K - ε r^{N-η}/(γ+N))_+^{1/(p-2)}`, `w(1) = 0`.
    AlphaZero,
    /// `N = 1`, `α = -(p-1)/(p-2)`: `w = (K r + ε |α|^{p-1} |K|^p)_+^{(p-1)/(p-2)}`.
    N1Special,
}

/// A closed-form profile with its free constant fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct Oracle {
    kind: OracleKind,
    n: f64,
    p: f64,
    alpha: f64,
    eps: f64,
    k: f64,
    ell: f64,
    /// For `AlphaZero`: sign of `w'` and the anchor `w(r0) = w0`.
    slope_sign: f64,
    anchor: (f64, f64),
}

const SIMPSON_TOL: f64 = 1e-10;

fn require(ok: bool, what: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParams(what.to_string()))
    }
}

fn near(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * (1.0 + b.abs())
}

impl Oracle {
    /// Builds an oracle for a validated tuple; `free` is the constant `K` (or `C`, or the
    /// sign for `UFlat`).
    pub fn new(kind: OracleKind, pr: &ProblemParams, free: f64) -> Result<Self> {
        let n = pr.nf();
        let p = pr.p;
        let a = pr.alpha;
        let mut o = Oracle {
            kind,
            n,
            p,
            alpha: a,
            eps: pr.e(),
            k: free,
            ell: 0.0,
            slope_sign: 1.0,
            anchor: (1.0, 0.0),
        };
        require(free.is_finite() && free != 0.0, "free constant must be finite and nonzero")?;
        match kind {
            OracleKind::UFlat => {
                o.ell = pr.ell().ok_or_else(|| {
                    Error::InvalidParams("U_flat needs epsilon*(alpha+gamma) < 0".into())
                })?;
                o.k = free.signum();
            }
            OracleKind::Barenblatt => require(
                near(a, n),
                &format!("barenblatt requires alpha = N = {n}"),
            )?,
            OracleKind::PHarmonic => {
                let eta = params::eta(n, p);
                require(
                    eta != 0.0 && near(a, eta),
                    &format!("p_harmonic requires alpha = eta = {eta} (and p != N)"),
                )?
            }
            OracleKind::Quadratic => {
                let pp = params::p_prime(p);
                require(
                    near(a, -pp),
                    &format!("quadratic requires alpha = -p' = {}", -pp),
                )?
            }
            OracleKind::N1Special => {
                let ap = params::alpha_p(p);
                require(
                    pr.n == 1 && near(a, ap),
                    &format!("n1_special requires N = 1 and alpha = -(p-1)/(p-2) = {ap}"),
                )?
            }
            OracleKind::AlphaZero => {
                return Err(Error::InvalidParams(
                    "alpha_zero requires alpha = 0; build it with Oracle::alpha_zero".into(),
                ))
            }
        }
        Ok(o)
    }

    /// The `α = 0` profile, with `w'` of sign `slope_sign` and `w(1) = 0`.
    pub fn alpha_zero(n: u32, p: f64, eps: Eps, k: f64, slope_sign: f64) -> Result<Self> {
        check_base(n, p)?;
        require(k.is_finite() && k != 0.0, "free constant must be finite and nonzero")?;
        Ok(Oracle {
            kind: OracleKind::AlphaZero,
            n: n as f64,
            p,
            alpha: 0.0,
            eps: eps.value(),
            k,
            ell: 0.0,
            slope_sign: if slope_sign < 0.0 { -1.0 } else { 1.0 },
            anchor: (1.0, 0.0),
        })
    }

    /// Overrides the integration constant of the `α = 0` profile: `w(r0) = w0`.
    pub fn with_anchor(mut self, r0: f64, w0: f64) -> Self {
        self.anchor = (r0, w0);
        self
    }

    pub fn kind(&self) -> OracleKind {
        self.kind
    }

    pub fn free_constant(&self) -> f64 {
        self.k
    }

    fn gamma(&self) -> f64 {
        params::gamma(self.p)
    }

    fn eta(&self) -> f64 {
        params::eta(self.n, self.p)
    }

    /// Support edge (`w = 0` beyond) or hole edge (`w = 0` before), where one exists.
    pub fn edge(&self) -> Option<f64> {
        let (p, g, e, k) = (self.p, self.gamma(), self.eps, self.k);
        let pp = params::p_prime(p);
        match self.kind {
            OracleKind::Barenblatt => {
                if e * k > 0.0 {
                    Some((g * k.abs()).powf(1.0 / pp))
                } else {
                    None
                }
            }
            OracleKind::N1Special => {
                if -e * k.signum() > 0.0 {
                    Some(self.alpha.abs().powf(p - 1.0) * k.abs().powf(p - 1.0))
                } else {
                    None
                }
            }
            OracleKind::AlphaZero => {
                if e * k > 0.0 {
                    Some(((g + self.n) * k.abs()).powf(1.0 / (self.n - self.eta())))
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    fn alpha_zero_slope(&self, r: f64) -> f64 {
        let base = self.k - self.eps * r.powf(self.n - self.eta()) / (self.gamma() + self.n);
        if base <= 0.0 {
            0.0
        } else {
            self.slope_sign * r.powf(-(self.eta() + 1.0)) * base.powf(1.0 / (self.p - 2.0))
        }
    }

    pub fn sample(&self, r: f64) -> ProfileSample {
        let (n, p, e, k) = (self.n, self.p, self.eps, self.k);
        let g = self.gamma();
        let pp = params::p_prime(p);
        let (w, dw) = match self.kind {
            OracleKind::UFlat => (k * self.ell * r.powf(g), k * self.ell * g * r.powf(g - 1.0)),
            OracleKind::Barenblatt => {
                let b = k - e * r.powf(pp) / g;
                if b <= 0.0 {
                    (0.0, 0.0)
                } else {
                    (
                        b.powf((p - 1.0) / (p - 2.0)),
                        -e * b.powf(1.0 / (p - 2.0)) * r.powf(pp - 1.0),
                    )
                }
            }
            OracleKind::PHarmonic => {
                let eta = self.eta();
                (k * r.powf(-eta), -eta * k * r.powf(-eta - 1.0))
            }
            OracleKind::Quadratic => (
                k * (n * (k * pp).abs().powf(p - 2.0) + e * r.powf(pp)),
                k * e * pp * r.powf(pp - 1.0),
            ),
            OracleKind::N1Special => {
                let aa = self.alpha.abs();
                let b = k * r + e * aa.powf(p - 1.0) * k.abs().powf(p);
                if b <= 0.0 {
                    (0.0, 0.0)
                } else {
                    (b.powf((p - 1.0) / (p - 2.0)), aa * k * b.powf(1.0 / (p - 2.0)))
                }
            }
            OracleKind::AlphaZero => {
                let (r0, w0) = self.anchor;
                let f = |s: f64| self.alpha_zero_slope(s);
                let integral = if r >= r0 {
                    adaptive_simpson(&f, r0, r, SIMPSON_TOL)
                } else {
                    -adaptive_simpson(&f, r, r0, SIMPSON_TOL)
                };
                (w0 + integral, f(r))
            }
        };
        ProfileSample { r, w, dw }
    }

    /// `count` log-spaced samples on `[r_lo, r_hi]`.
    pub fn samples(&self, r_lo: f64, r_hi: f64, count: usize) -> Vec<ProfileSample> {
        let (a, b) = (r_lo.ln(), r_hi.ln());
        (0..count)
            .map(|i| {
                let t = if count <= 1 { 0.0 } else { i as f64 / (count - 1) as f64 };
                self.sample((a + t * (b - a)).exp())
            })
            .collect()
    }
}

/// Adaptive Simpson quadrature of `f` on `[a, b]`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn rec<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
    }
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = simpson(fa, fm, fb, a, b);
    rec(f, a, b, fa, fm, fb, whole, tol, 48)
}
