//! Dormand–Prince 5(4) with PI step-size control and 4th-order continuous extension.

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const PI_BETA: f64 = 0.04;

/// Absolute and relative error tolerances, and which components enter the error norm.
#[derive(Debug, Clone, Copy)]
pub struct Tolerances<const D: usize> {
    pub abs: [f64; D],
    pub rel: f64,
    pub active: [bool; D],
}

impl<const D: usize> Tolerances<D> {
    pub fn new(abs: f64, rel: f64) -> Self {
        Self { abs: [abs; D], rel, active: [true; D] }
    }
}

/// One accepted step with its continuous extension.
#[derive(Debug, Clone, Copy)]
pub struct Step<const D: usize> {
    pub t0: f64,
    pub h: f64,
    pub x0: [f64; D],
    pub x1: [f64; D],
    pub f1: [f64; D],
    pub cont: [[f64; D]; 5],
}

impl<const D: usize> Step<D> {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    /// Continuous extension at `θ ∈ [0, 1]`.
    pub fn eval_theta(&self, theta: f64) -> [f64; D] {
        let th1 = 1.0 - theta;
        let c = &self.cont;
        let mut out = [0.0; D];
        for i in 0..D {
            out[i] = c[0][i] + theta * (c[1][i] + th1 * (c[2][i] + theta * (c[3][i] + th1 * c[4][i])));
        }
        out
    }

    pub fn eval(&self, t: f64) -> [f64; D] {
        self.eval_theta((t - self.t0) / self.h)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StepFailure {
    /// The step size fell below the representable resolution of `t`.
    Underflow { t: f64, h: f64 },
    /// The right-hand side could not be evaluated at the current point.
    Domain { t: f64 },
}

#[inline]
fn axpy<const D: usize>(x: &[f64; D], h: f64, terms: &[(f64, &[f64; D])]) -> [f64; D] {
    let mut out = *x;
    for (c, k) in terms {
        if *c != 0.0 {
            for i in 0..D {
                out[i] += h * c * k[i];
            }
        }
    }
    out
}

/// Adaptive solver state. `f` returns `None` where the field is undefined.
pub struct Solver<const D: usize> {
    pub t: f64,
    pub x: [f64; D],
    f0: [f64; D],
    h: f64,
    facold: f64,
    pub tol: Tolerances<D>,
    pub h_max: f64,
    pub accepted: usize,
    pub rejected: usize,
}

impl<const D: usize> Solver<D> {
    /// `dir` is the sign of the step; `h_init` of zero selects a starting step automatically.
    pub fn new<F>(f: &F, t0: f64, x0: [f64; D], dir: f64, tol: Tolerances<D>, h_init: f64) -> Result<Self, StepFailure>
    where
        F: Fn(f64, &[f64; D]) -> Option<[f64; D]>,
    {
        let f0 = f(t0, &x0).ok_or(StepFailure::Domain { t: t0 })?;
        let mut s = Solver {
            t: t0,
            x: x0,
            f0,
            h: 0.0,
            facold: 1e-4,
            tol,
            h_max: f64::INFINITY,
            accepted: 0,
            rejected: 0,
        };
        s.h = if h_init > 0.0 {
            dir * h_init
        } else {
            dir * s.initial_step(f, dir)
        };
        Ok(s)
    }

    pub fn derivative(&self) -> [f64; D] {
        self.f0
    }

    pub fn step_size(&self) -> f64 {
        self.h
    }

    pub fn set_step_size(&mut self, h: f64) {
        self.h = h;
    }

    fn scale(&self, a: &[f64; D], b: &[f64; D], i: usize) -> f64 {
        self.tol.abs[i] + self.tol.rel * a[i].abs().max(b[i].abs())
    }

    fn norm(&self, v: &[f64; D], a: &[f64; D], b: &[f64; D]) -> f64 {
        let mut acc = 0.0;
        let mut n = 0usize;
        for i in 0..D {
            if self.tol.active[i] {
                let q = v[i] / self.scale(a, b, i);
                acc += q * q;
                n += 1;
            }
        }
        if n == 0 {
            0.0
        } else {
            (acc / n as f64).sqrt()
        }
    }

    fn initial_step<F>(&self, f: &F, dir: f64) -> f64
    where
        F: Fn(f64, &[f64; D]) -> Option<[f64; D]>,
    {
        let zero = [0.0; D];
        let d0 = self.norm(&self.x, &zero, &self.x);
        let d1 = self.norm(&self.f0, &zero, &self.x);
        let mut h0 = if d0 < 1e-10 || d1 < 1e-10 { 1e-6 } else { 0.01 * d0 / d1 };
        h0 = h0.min(self.h_max);
        let x1 = axpy(&self.x, dir * h0, &[(1.0, &self.f0)]);
        let d2 = match f(self.t + dir * h0, &x1) {
            Some(f1) => {
                let mut diff = [0.0; D];
                for i in 0..D {
                    diff[i] = f1[i] - self.f0[i];
                }
                self.norm(&diff, &zero, &self.x) / h0
            }
            None => return h0 * 1e-3,
        };
        let m = d1.max(d2);
        let h1 = if m <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / m).powf(0.2)
        };
        (100.0 * h0).min(h1).min(self.h_max)
    }

    /// Attempts one step of size `h` from the current point without committing it.
    /// Returns the step and its scaled error estimate.
    pub fn trial<F>(&self, f: &F, h: f64) -> Option<(Step<D>, f64)>
    where
        F: Fn(f64, &[f64; D]) -> Option<[f64; D]>,
    {
        let (t, x, k1) = (self.t, &self.x, &self.f0);
        let k2 = f(t + C2 * h, &axpy(x, h, &[(A21, k1)]))?;
        let k3 = f(t + C3 * h, &axpy(x, h, &[(A31, k1), (A32, &k2)]))?;
        let k4 = f(t + C4 * h, &axpy(x, h, &[(A41, k1), (A42, &k2), (A43, &k3)]))?;
        let k5 = f(
            t + C5 * h,
            &axpy(x, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        )?;
        let k6 = f(
            t + h,
            &axpy(x, h, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
        )?;
        let x1 = axpy(x, h, &[(A71, k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let k7 = f(t + h, &x1)?;
        let mut errv = [0.0; D];
        for i in 0..D {
            errv[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        }
        for v in x1.iter() {
            if !v.is_finite() {
                return None;
            }
        }
        let err = self.norm(&errv, x, &x1);
        let mut cont = [[0.0; D]; 5];
        for i in 0..D {
            let ydiff = x1[i] - x[i];
            let bspl = h * k1[i] - ydiff;
            cont[0][i] = x[i];
            cont[1][i] = ydiff;
            cont[2][i] = bspl;
            cont[3][i] = ydiff - h * k7[i] - bspl;
            cont[4][i] = h
                * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
        }
        Some((
            Step { t0: t, h, x0: *x, x1, f1: k7, cont },
            err,
        ))
    }

    /// Commits a step produced by [`Solver::trial`].
    pub fn commit(&mut self, step: &Step<D>) {
        self.t = step.t1();
        self.x = step.x1;
        self.f0 = step.f1;
        self.accepted += 1;
    }

    /// Restarts from a new point (after an external state change).
    pub fn reset<F>(&mut self, f: &F, t: f64, x: [f64; D]) -> Result<(), StepFailure>
    where
        F: Fn(f64, &[f64; D]) -> Option<[f64; D]>,
    {
        self.t = t;
        self.x = x;
        self.f0 = f(t, &x).ok_or(StepFailure::Domain { t })?;
        self.facold = 1e-4;
        Ok(())
    }

    /// Takes one accepted step, never passing `t_stop` (if finite).
    pub fn advance<F>(&mut self, f: &F, t_stop: f64) -> Result<Step<D>, StepFailure>
    where
        F: Fn(f64, &[f64; D]) -> Option<[f64; D]>,
    {
        let dir = if self.h >= 0.0 { 1.0 } else { -1.0 };
        let mut last_reject = false;
        loop {
            let mut h = self.h.abs().min(self.h_max);
            let mut clipped = false;
            if t_stop.is_finite() {
                let remaining = (t_stop - self.t) * dir;
                if remaining <= h {
                    h = remaining;
                    clipped = true;
                }
            }
            let h_min = 16.0 * f64::EPSILON * self.t.abs().max(1e-300);
            if h <= 0.0 || (h <= h_min && !clipped) {
                return Err(StepFailure::Underflow { t: self.t, h });
            }
            let hs = dir * h;
            match self.trial(f, hs) {
                Some((step, err)) if err <= 1.0 => {
                    let fac11 = err.max(1e-16).powf(0.2 - PI_BETA * 0.75);
                    let mut fac = fac11 / self.facold.powf(PI_BETA);
                    fac = (fac / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
                    let mut hnew = h / fac;
                    if last_reject {
                        hnew = hnew.min(h);
                    }
                    self.facold = err.max(1e-4);
                    if !clipped || hnew < self.h.abs() {
                        self.h = dir * hnew;
                    }
                    self.commit(&step);
                    return Ok(step);
                }
                Some((_, err)) => {
                    let fac11 = err.powf(0.2 - PI_BETA * 0.75);
                    let shrink = (fac11 / SAFETY).min(1.0 / FAC_MIN);
                    self.h = dir * h / shrink;
                    self.rejected += 1;
                    last_reject = true;
                }
                None => {
                    self.h = dir * h * 0.25;
                    self.rejected += 1;
                    last_reject = true;
                }
            }
        }
    }
}

/// Bisection for a sign change of `g` on `[a, b]`; `ga`, `gb` have opposite signs (or one is
/// zero). Stops when the interval is below `tol`.
pub fn bisect<G: Fn(f64) -> f64>(g: G, mut a: f64, mut b: f64, mut ga: f64, tol: f64) -> f64 {
    if ga == 0.0 {
        return a;
    }
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        let m = 0.5 * (a + b);
        let gm = g(m);
        if gm == 0.0 {
            return m;
        }
        if (gm > 0.0) == (ga > 0.0) {
            a = m;
            ga = gm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}
