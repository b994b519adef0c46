//! Special trajectories, each launched from a local expansion at a stationary point of one
//! chart and continued in `S`.
//!
//! | kind      | chart | launch point   | end reached by the launch         |
//! |-----------|-------|----------------|-----------------------------------|
//! | `T_r`     | `Q`   | `(0, εα/N)`    | `r -> 0`, `w(0) = a`              |
//! | `T_eps`   | `R`   | `(0, -ε)`      | double zero at `r̄`               |
//! | `T_alpha` | `R`   | `(-1/α, 0)`    | `w ~ r^{-α}`                      |
//! | `T_eta`   | `P`   | `(η, 0)`       | `w ~ r^{-η}` as `r -> 0`, `p < N` |
//! | `T_u`     | `P`   | `(η, 0)`       | `w ~ r^{|η|}` as `r -> 0`, `p > N`|
//! | `T_±`     | `P`   | `(0, 0)`       | `w(0) = a` with singular slope    |

use serde::{Deserialize, Serialize};

use crate::analysis::{self, Label};
use crate::error::{Error, Result};
use crate::integrate::dopri::{Solver, Tolerances};
use crate::integrate::{
    integrate_chart, integrate_s, ChartStop, Direction, Event, EventKind, IntegrationConfig, Section, Trajectory,
};
use crate::params::ProblemParams;
use crate::systems::{invert, magnitude, Chart, ChartState, PhaseState, PointId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TrajectoryKind {
    #[serde(rename = "T_r")]
    TR,
    #[serde(rename = "T_eps")]
    TEps,
    #[serde(rename = "T_alpha")]
    TAlpha,
    #[serde(rename = "T_eta")]
    TEta,
    #[serde(rename = "T_u")]
    TU,
    #[serde(rename = "T_plus")]
    TPlus,
    #[serde(rename = "T_minus")]
    TMinus,
}

impl TrajectoryKind {
    pub const ALL: [TrajectoryKind; 7] = [
        TrajectoryKind::TR,
        TrajectoryKind::TEps,
        TrajectoryKind::TAlpha,
        TrajectoryKind::TEta,
        TrajectoryKind::TU,
        TrajectoryKind::TPlus,
        TrajectoryKind::TMinus,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TrajectoryKind::TR => "T_r",
            TrajectoryKind::TEps => "T_eps",
            TrajectoryKind::TAlpha => "T_alpha",
            TrajectoryKind::TEta => "T_eta",
            TrajectoryKind::TU => "T_u",
            TrajectoryKind::TPlus => "T_plus",
            TrajectoryKind::TMinus => "T_minus",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name().eq_ignore_ascii_case(s))
    }
}

/// What to shoot: kind, manifold offset `δ` and kind-specific reals.
///
/// `extra` holds `[a]` for `T_r` (default 1), `[r̄]` for `T_eps` (default 1) and `[a, c]`
/// for `T_±` (default `a = 1`, `|c| = 1`; for `p = N` the single entry is `k`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecialTrajectorySpec {
    pub kind: TrajectoryKind,
    pub offset: f64,
    pub extra: Vec<f64>,
}

impl SpecialTrajectorySpec {
    pub fn new(kind: TrajectoryKind) -> Self {
        Self { kind, offset: DEFAULT_OFFSET, extra: Vec::new() }
    }

    pub fn with_extra(mut self, extra: &[f64]) -> Self {
        self.extra = extra.to_vec();
        self
    }

    pub fn with_offset(mut self, offset: f64) -> Self {
        self.offset = offset;
        self
    }
}

pub const DEFAULT_OFFSET: f64 = 1e-7;
/// Launch distance along the center direction at `(-1/α, 0)`; the approach there is
/// algebraic in `ν`, so `δ = 1e-7` would need about `1e7` units of `ν`.
pub const CENTER_OFFSET: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct ShootConfig {
    pub integration: IntegrationConfig,
    pub offset: f64,
    pub center_offset: f64,
    pub sections: Vec<Section>,
    pub section_limit: Option<usize>,
    /// Hand over from a chart leaving the origin once `|y| + |Y|^{1/(p-1)}` exceeds this
    /// multiple of the phase-plane scale.
    pub handoff_low: f64,
    /// Hand over from a chart coming from infinity once the size drops below this multiple.
    pub handoff_high: f64,
}

impl Default for ShootConfig {
    fn default() -> Self {
        Self {
            integration: IntegrationConfig::default(),
            offset: DEFAULT_OFFSET,
            center_offset: CENTER_OFFSET,
            sections: Vec::new(),
            section_limit: None,
            handoff_low: 1e-2,
            handoff_high: 1e3,
        }
    }
}

impl ShootConfig {
    pub fn with_integration(mut self, integration: IntegrationConfig) -> Self {
        self.integration = integration;
        self
    }

    pub fn with_sections(mut self, sections: Vec<Section>, limit: Option<usize>) -> Self {
        self.sections = sections;
        self.section_limit = limit;
        self
    }
}

/// Shoots the trajectory described by `spec`.
pub fn shoot(spec: &SpecialTrajectorySpec, pr: &ProblemParams, cfg: &ShootConfig) -> Result<Trajectory> {
    if !(spec.offset > 0.0 && spec.offset.is_finite()) {
        return Err(Error::InvalidParams("offset must be positive".into()));
    }
    let cfg = ShootConfig { offset: spec.offset, ..cfg.clone() };
    let x = |i: usize, d: f64| spec.extra.get(i).copied().unwrap_or(d);
    match spec.kind {
        TrajectoryKind::TR => shoot_regular(pr, x(0, 1.0), &cfg),
        TrajectoryKind::TEps => shoot_double_zero(pr, x(0, 1.0), &cfg),
        TrajectoryKind::TAlpha => shoot_t_alpha(pr, &cfg),
        TrajectoryKind::TEta | TrajectoryKind::TU => {
            let want_u = spec.kind == TrajectoryKind::TU;
            let is_u = pr.p > pr.nf();
            if want_u != is_u {
                return Err(Error::NotApplicable(if want_u {
                    "T_u exists for p > N; for p < N use T_eta".into()
                } else {
                    "T_eta exists for p < N; for p > N use T_u".into()
                }));
            }
            shoot_t_eta_or_u(pr, &cfg)
        }
        TrajectoryKind::TPlus | TrajectoryKind::TMinus => {
            let sign = if spec.kind == TrajectoryKind::TPlus { 1.0 } else { -1.0 };
            if is_p_equal_n(pr) {
                let k = x(0, 1.0);
                if sign < 0.0 {
                    return Err(Error::NotApplicable("for p = N only the T_plus family exists".into()));
                }
                shoot_t_pm(pr, 1.0, k, &cfg)
            } else {
                let a = x(0, 1.0);
                let c = x(1, sign * a.signum());
                if (c / a).signum() != sign {
                    return Err(Error::InvalidParams(format!(
                        "{} needs c/a of sign {sign}",
                        spec.kind.name()
                    )));
                }
                shoot_t_pm(pr, a, c, &cfg)
            }
        }
    }
}

/// Shoots with `δ` and `δ/2` for consistency checks.
pub fn shoot_pair(
    spec: &SpecialTrajectorySpec,
    pr: &ProblemParams,
    cfg: &ShootConfig,
) -> Result<(Trajectory, Trajectory)> {
    let a = shoot(spec, pr, cfg)?;
    let half = spec.clone().with_offset(spec.offset / 2.0);
    let b = shoot(&half, pr, cfg)?;
    Ok((a, b))
}

fn is_p_equal_n(pr: &ProblemParams) -> bool {
    (pr.p - pr.nf()).abs() <= 1e-12 * pr.p
}

fn chart_state_to_s(pr: &ProblemParams, chart: Chart, coords: [f64; 2], tau: f64, y_positive: bool) -> Option<PhaseState> {
    let cs = ChartState { chart, coords, time: tau };
    invert(&cs, pr, y_positive, tau).ok().filter(|s| s.is_finite())
}

/// Size `|y| + |Y|^{1/(p-1)}` of a chart point; `+∞` where it cannot be mapped back.
fn chart_size(pr: &ProblemParams, chart: Chart, coords: [f64; 2]) -> f64 {
    chart_state_to_s(pr, chart, coords, 0.0, true)
        .map(|s| magnitude(pr, s.y, s.big_y))
        .unwrap_or(f64::INFINITY)
}

struct Launch {
    chart: Chart,
    start: [f64; 2],
    tau0: f64,
    direction: Direction,
    label: Label,
}

/// Runs the chart phase until `leave` holds, converts its samples to `S`, then continues in
/// `S` and assembles one trajectory.
fn launch_and_continue(
    pr: &ProblemParams,
    launch: Launch,
    cfg: &ShootConfig,
    leave: &mut dyn FnMut(&[f64; 2]) -> bool,
) -> Result<Trajectory> {
    let chart_cfg = IntegrationConfig { max_time_span: 1e4, ..cfg.integration };
    let mut stop = |cp: &crate::integrate::ChartPoint| leave(&cp.coords);
    let run = integrate_chart(
        pr,
        launch.chart,
        launch.start,
        launch.tau0,
        launch.direction,
        &chart_cfg,
        chart_cfg.max_time_span,
        None,
        &mut stop,
    )?;
    if matches!(run.stop, ChartStop::Escape | ChartStop::MaxSteps) {
        return Err(Error::NoCrossing(format!(
            "chart {:?} phase ended with {:?} before reaching the hand-over region",
            launch.chart, run.stop
        )));
    }
    let mut chart_states = Vec::with_capacity(run.points.len());
    for cp in &run.points {
        if let Some(s) = chart_state_to_s(pr, launch.chart, cp.coords, cp.tau, true) {
            chart_states.push(s);
        }
    }
    let handoff = *chart_states
        .last()
        .ok_or_else(|| Error::Domain("chart phase produced no convertible state".into()))?;
    let s = integrate_s(
        pr,
        handoff,
        launch.direction,
        &cfg.integration,
        &cfg.sections,
        cfg.section_limit,
    )?;
    Ok(assemble(pr, launch.chart, chart_states, s, launch.label))
}

fn assemble(
    pr: &ProblemParams,
    chart: Chart,
    mut chart_states: Vec<PhaseState>,
    mut s: Trajectory,
    launch_label: Label,
) -> Trajectory {
    chart_states.pop();
    let n = chart_states.len();
    match s.direction {
        Direction::Forward => {
            let mut states = chart_states;
            states.append(&mut s.states);
            let mut div = vec![f64::NAN; n];
            div.append(&mut s.divergence);
            s.states = states;
            s.divergence = div;
            s.label_start = Some(launch_label);
        }
        Direction::Backward => {
            chart_states.reverse();
            s.states.extend(chart_states);
            s.divergence.extend(std::iter::repeat(f64::NAN).take(n));
            s.label_end = Some(launch_label);
        }
    }
    s.launch_chart = Some(chart);
    s.launch_states = n;
    let terminal = analysis::terminal_label(&s, pr);
    match s.direction {
        Direction::Forward => s.label_end = Some(terminal),
        Direction::Backward => s.label_start = Some(terminal),
    }
    s
}

/// `T_r`: the regular profile with `w(0) = a`, `w'(0) = 0`.
///
/// Launched from the `Q` saddle `(0, εα/N)` along the unstable direction (eigenvalue `p'`)
/// with slope `ε(α-N)/(N(N+p'))`; `τ₀` is chosen so that `w(0⁺) = a`.
pub fn shoot_regular(pr: &ProblemParams, a: f64, cfg: &ShootConfig) -> Result<Trajectory> {
    if !(a.is_finite() && a != 0.0) {
        return Err(Error::InvalidParams("a must be finite and nonzero".into()));
    }
    if a < 0.0 {
        return Ok(shoot_regular(pr, -a, cfg)?.mirrored());
    }
    let n = pr.nf();
    let e = pr.e();
    let al = pr.alpha;
    let pp = pr.p_prime();
    let sigma_star = e * al / n;
    let slope = e * (al - n) / (n * (n + pp));
    let zeta0 = (e * al).signum() * cfg.offset;
    let sigma0 = sigma_star + slope * zeta0;
    let c = ((al.abs() / n) / a.powf(pr.p - 2.0)).powf(1.0 / (pr.p - 1.0));
    let tau0 = (zeta0.abs() / c).ln() / pp;
    let high = cfg.handoff_high * pr.scale();
    let zeta_cap = 0.5 * al.abs().min(1.0);
    let sigma_floor = 1e-3 * sigma_star.abs();
    let mut leave = |c: &[f64; 2]| {
        c[0].abs() >= zeta_cap || c[1].abs() <= sigma_floor || chart_size(pr, Chart::Q, *c) <= high
    };
    launch_and_continue(
        pr,
        Launch {
            chart: Chart::Q,
            start: [zeta0, sigma0],
            tau0,
            direction: Direction::Forward,
            label: Label::AR,
        },
        cfg,
        &mut leave,
    )
}

/// `T_eps`: the profile with a double zero at `r̄`.
///
/// Launched from the `R` saddle `(0, -ε)` along the eigenvector `((2p-3)/(p-1), ε(N-α))`
/// of the eigenvalue `-ε(p-2)/(p-1)`, on the side `g ε < 0`. Near the saddle
/// `τ - ln r̄ = g (p-1)/(p-2)`. The profile lives on `r < r̄` for `ε = 1` and on `r > r̄`
/// for `ε = -1`.
pub fn shoot_double_zero(pr: &ProblemParams, r_bar: f64, cfg: &ShootConfig) -> Result<Trajectory> {
    if !(r_bar.is_finite() && r_bar > 0.0) {
        return Err(Error::InvalidParams("r_bar must be positive".into()));
    }
    let p = pr.p;
    let e = pr.e();
    let v = -e * (pr.alpha - pr.nf()) * (p - 1.0) / (2.0 * p - 3.0);
    let g0 = -e * cfg.offset;
    let s0 = -e + v * g0;
    let tau0 = r_bar.ln() + g0 * (p - 1.0) / (p - 2.0);
    let direction = if e > 0.0 { Direction::Backward } else { Direction::Forward };
    let low = cfg.handoff_low * pr.scale();
    let mut leave = |c: &[f64; 2]| {
        c[0].abs() >= 0.3 || (c[1] + e).abs() >= 0.5 || chart_size(pr, Chart::R, *c) >= low
    };
    let mut t = launch_and_continue(
        pr,
        Launch { chart: Chart::R, start: [g0, s0], tau0, direction, label: Label::Origin },
        cfg,
        &mut leave,
    )?;
    // The orbit ends at the double zero; record it as the event at that end.
    let (end, div, at_front) = if e > 0.0 {
        (*t.last(), t.divergence.last().copied(), false)
    } else {
        (*t.first(), t.divergence.first().copied(), true)
    };
    let ev = Event {
        kind: EventKind::DoubleZeroCapture,
        tau: end.tau,
        state: end,
        section: None,
        orientation: 0,
        point: Some(PointId::Origin),
        divergence: div.unwrap_or(f64::NAN),
    };
    if at_front {
        t.events.insert(0, ev);
    } else {
        t.events.push(ev);
    }
    Ok(t)
}

/// Which end of `τ` the trajectory `T_α` reaches `A_α` at: `+1` when `β > 0`, `-1` when
/// `β < 0`, and `ε` when `β = 0`.
pub fn t_alpha_end(pr: &ProblemParams) -> f64 {
    let b = pr.beta();
    if b > 0.0 {
        1.0
    } else if b < 0.0 {
        -1.0
    } else {
        pr.e()
    }
}

/// `T_alpha`: the profile with `r^α w -> 1`.
///
/// Launched from the `R` point `(-1/α, 0)` along its center direction
/// `((p-1)(η-α), εα²)` on the side `s α < 0`, at distance [`ShootConfig::center_offset`],
/// and integrated away from the end where it converges.
pub fn shoot_t_alpha(pr: &ProblemParams, cfg: &ShootConfig) -> Result<Trajectory> {
    let p = pr.p;
    let al = pr.alpha;
    let e = pr.e();
    let g_star = -1.0 / al;
    let s0 = -al.signum() * cfg.center_offset;
    let g0 = g_star + (p - 1.0) * (pr.eta() - al) * s0 / (e * al * al);
    let y0 = (s0.abs() * g0.abs().powf(p - 1.0)).powf(1.0 / (p - 2.0));
    let apg = al + pr.gamma();
    let tau0 = if apg != 0.0 { -y0.ln() / apg } else { 0.0 };
    let direction = if t_alpha_end(pr) > 0.0 { Direction::Backward } else { Direction::Forward };
    let low = cfg.handoff_low * pr.scale();
    let mut leave = |c: &[f64; 2]| {
        let gr = c[0] / g_star;
        c[1].abs() >= 1.0 || !(0.05..=20.0).contains(&gr) || chart_size(pr, Chart::R, *c) >= low
    };
    launch_and_continue(
        pr,
        Launch { chart: Chart::R, start: [g0, s0], tau0, direction, label: Label::AAlpha },
        cfg,
        &mut leave,
    )
}

/// Launch direction at the `P` point `(η, 0)`, unit length.
pub fn eta_launch_direction(pr: &ProblemParams) -> Result<[f64; 2]> {
    if is_p_equal_n(pr) {
        return Err(Error::NotApplicable("the point (eta, 0) is degenerate for p = N".into()));
    }
    let n = pr.nf();
    let eta = pr.eta();
    let gap = n - 2.0 * eta;
    let coupling = eta * pr.e() * (pr.alpha - eta) / (pr.p - 1.0);
    // Eigenvector of the eigenvalue N - η, taken on the side fixed by the sign of Y.
    let unit = |v: [f64; 2]| {
        let h = v[0].hypot(v[1]);
        [v[0] / h, v[1] / h]
    };
    if pr.p > n {
        let v = unit([coupling / gap, 1.0]);
        Ok([-v[0], -v[1]])
    } else {
        let v = if gap.abs() < 1e-12 { [0.0, 1.0] } else { unit([coupling / gap, 1.0]) };
        Ok(unit([1.0 + v[0], v[1]]))
    }
}

/// `T_u` (`p > N`, unique, `r^{-|η|} w -> 1`) or the canonical member of `T_η`
/// (`p < N`, `r^η w -> 1`).
pub fn shoot_t_eta_or_u(pr: &ProblemParams, cfg: &ShootConfig) -> Result<Trajectory> {
    let d = eta_launch_direction(pr)?;
    let eta = pr.eta();
    let start = [eta + cfg.offset * d[0], cfg.offset * d[1]];
    let s0 = chart_state_to_s(pr, Chart::P, start, 0.0, true)
        .ok_or_else(|| Error::Domain("launch point outside chart P".into()))?;
    let tau0 = -s0.y.ln() / (pr.gamma() + eta);
    let high = cfg.handoff_high * pr.scale();
    let zeta_cap = 0.5 * eta.abs().max(1.0);
    let mut leave = |c: &[f64; 2]| {
        c[1].abs() >= 0.5 || (c[0] - eta).abs() >= zeta_cap || chart_size(pr, Chart::P, *c) <= high
    };
    launch_and_continue(
        pr,
        Launch { chart: Chart::P, start, tau0, direction: Direction::Forward, label: Label::LEta },
        cfg,
        &mut leave,
    )
}

/// Radius at which the `T_±` limits are checked: `1e-6`, or smaller when the first
/// correction `r^{|η|}` would exceed `1e-4` there.
pub fn t_pm_check_radius(pr: &ProblemParams) -> f64 {
    if is_p_equal_n(pr) {
        1e-6
    } else {
        1e-6f64.min(1e-4f64.powf(1.0 / pr.eta().abs()))
    }
}

/// Point of the `P` chart on `T_±` near `(0, 0)`, with its `τ`, from the graph functions of
/// the center manifold.
///
/// For `p > N`, with `κ = N/|η|`, the orbit is `ψ = |c|^{1-p-κ} ζ |ζ|^{κ-1} v(ζ)^κ`, `v(0) = 1`,
/// normalized to `w(0) = 1`. For `p = N` it is `ψ = V(ζ) e^{-N/ζ}/ζ`, `V(0) = k^{2-p}`.
pub fn t_pm_launch(pr: &ProblemParams, c: f64, r_launch: f64) -> Result<([f64; 2], f64)> {
    let p = pr.p;
    let n = pr.nf();
    let e = pr.e();
    let al = pr.alpha;
    let tol = Tolerances::<2>::new(1e-14, 1e-12);
    if is_p_equal_n(pr) {
        let k = c;
        let z1 = 1.0 / r_launch.ln().abs();
        let rhs = |z: f64, x: &[f64; 2]| -> Option<[f64; 2]> {
            if z <= 0.0 {
                return Some([0.0, 0.0]);
            }
            let ex = (-n / z).exp();
            if ex == 0.0 {
                return Some([0.0, 0.0]);
            }
            let v = x[0];
            let q = e * (al - z) * v * ex;
            let zdot = z * z + q / (n - 1.0);
            if zdot == 0.0 {
                return None;
            }
            let dv = -e * (al - z) * v * v * (n + (n - 2.0) * z) * ex / (z * z * ((n - 1.0) * z * z + q));
            let dt = -q / ((n - 1.0) * z * z * zdot);
            Some([dv, dt])
        };
        let x = run_graph(&rhs, z1, [k.powf(2.0 - p), 0.0], tol)?;
        let psi = x[0] * (-n / z1).exp() / z1;
        Ok(([z1, psi], -1.0 / z1 + x[1]))
    } else {
        let eta = pr.eta();
        let ae = eta.abs();
        let kappa = n / ae;
        let kk = c.abs().powf(1.0 - p - kappa);
        let z1 = c * r_launch.powf(ae);
        let big_psi = move |z: f64, v: f64| kk * z.abs().powf(kappa - 1.0) * v.powf(kappa);
        let rhs = |z: f64, x: &[f64; 2]| -> Option<[f64; 2]> {
            let v = x[0];
            if !(v > 0.0) {
                return None;
            }
            let ps = big_psi(z, v);
            let den = (p - 1.0) * (z - eta) + e * (al - z) * z * ps;
            if den == 0.0 {
                return None;
            }
            let num = (p - 1.0) * (kappa + 1.0) - e * (z - al) * ps * (p - 1.0 + kappa);
            let dv = -(v / kappa) * num / den;
            let d = den / (p - 1.0);
            let dt = (-1.0 - e * (al - z) * ps / (p - 1.0)) / (d * ae);
            Some([dv, dt])
        };
        let x = run_graph(&rhs, z1, [1.0, 0.0], tol)?;
        let psi = z1 * big_psi(z1, x[0]);
        Ok(([z1, psi], (z1 / c).ln() / ae + x[1]))
    }
}

fn run_graph<F>(rhs: &F, z1: f64, x0: [f64; 2], tol: Tolerances<2>) -> Result<[f64; 2]>
where
    F: Fn(f64, &[f64; 2]) -> Option<[f64; 2]>,
{
    let dir = z1.signum();
    let mut solver = Solver::new(rhs, 0.0, x0, dir, tol, z1.abs() * 1e-3)
        .map_err(|_| Error::Domain("graph function undefined at the origin".into()))?;
    while (z1 - solver.t) * dir > 0.0 {
        solver
            .advance(rhs, z1)
            .map_err(|_| Error::Domain("graph function integration failed".into()))?;
    }
    Ok(solver.x)
}

/// `T_±` for `p ≥ N`.
///
/// For `p > N`: `w(0) = a` and `-r^{(N-1)/(p-1)} w' -> c`; `T_plus` when `c/a > 0`.
/// For `p = N`: `w/|ln r| -> k` and `r w' -> -k` with `k = c`; `a` is unused.
pub fn shoot_t_pm(pr: &ProblemParams, a: f64, c: f64, cfg: &ShootConfig) -> Result<Trajectory> {
    if pr.p < pr.nf() && !is_p_equal_n(pr) {
        return Err(Error::NotApplicable("T_plus/T_minus exist only for p >= N".into()));
    }
    if !(c.is_finite() && c != 0.0) {
        return Err(Error::InvalidParams("c must be finite and nonzero".into()));
    }
    let equal = is_p_equal_n(pr);
    if equal {
        if c < 0.0 {
            return Ok(shoot_t_pm(pr, a, -c, cfg)?.mirrored());
        }
    } else {
        if !(a.is_finite() && a != 0.0) {
            return Err(Error::InvalidParams("a must be finite and nonzero".into()));
        }
        if a < 0.0 {
            return Ok(shoot_t_pm(pr, -a, -c, cfg)?.mirrored());
        }
    }
    let r_launch = 1e-10f64.min(t_pm_check_radius(pr) * 1e-2);
    let (start, tau0) = if equal {
        t_pm_launch(pr, c, r_launch)?
    } else {
        let g = pr.gamma();
        let c1 = c * a.powf(-(g + pr.eta()) / g);
        let (pt, t) = t_pm_launch(pr, c1, r_launch)?;
        (pt, t + a.ln() / g)
    };
    let label = if start[0] > 0.0 { Label::LPlus } else { Label::LMinus };
    let high = cfg.handoff_high * pr.scale();
    let mut leave = |c: &[f64; 2]| c[0].abs() >= 0.5 || c[1].abs() >= 0.5 || chart_size(pr, Chart::P, *c) <= high;
    launch_and_continue(
        pr,
        Launch { chart: Chart::P, start, tau0, direction: Direction::Forward, label },
        cfg,
        &mut leave,
    )
}
