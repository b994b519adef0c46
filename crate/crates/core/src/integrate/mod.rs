//! Adaptive integration of system `S` and of the other charts.
//!
//! Orbits of `S` are advanced with an embedded 5(4) pair. The field is only Hölder
//! continuous on `{Y = 0}`; when an orbit enters the band `|Y| < δ_Y` with `y` away from
//! zero, the crossing is carried out with `u = Φ(Y)` as the independent variable, in which
//! `dy/du`, `dτ/du` and the divergence weight are continuous.

pub mod dopri;

use serde::{Deserialize, Serialize};

use crate::analysis::Label;
use crate::error::{Error, Result};
use crate::params::{signed_pow, ProblemParams};
use crate::systems::{self, magnitude, s_field, Chart, PhaseState, PointId, ProfileSample};
use dopri::{bisect, Solver, Step, StepFailure, Tolerances};

/// Integration settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegrationConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Largest `|τ - τ₀|` covered by one integration.
    pub max_time_span: f64,
    pub max_steps: usize,
    /// `δ_Y = band_rel · (γ|y|)^{p-1}`.
    pub band_rel: f64,
    pub escape_bound: f64,
    /// Relative capture radius around stationary points.
    pub capture_radius: f64,
    /// `|σ|` below which an orbit on an attracting `A_α` cone is captured; `0` disables.
    pub cone_sigma: f64,
    pub max_step: f64,
    pub capture: bool,
    pub track_divergence: bool,
    pub dense: bool,
}

impl Default for IntegrationConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-8,
            max_time_span: 200.0,
            max_steps: 1_000_000,
            band_rel: 1e-6,
            escape_bound: 1e12,
            capture_radius: 1e-6,
            cone_sigma: A_ALPHA_SIGMA,
            max_step: f64::INFINITY,
            capture: true,
            track_divergence: false,
            dense: true,
        }
    }
}

impl IntegrationConfig {
    pub fn with_tolerances(mut self, abs_tol: f64, rel_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_span(mut self, span: f64) -> Self {
        self.max_time_span = span;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.abs_tol > 0.0
            && self.rel_tol > 0.0
            && self.max_time_span > 0.0
            && self.max_steps > 0
            && self.band_rel > 0.0
            && self.escape_bound > 0.0
            && self.capture_radius > 0.0
            && self.cone_sigma >= 0.0
            && self.max_step > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParams("integration settings must be positive".into()))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::Forward => 1.0,
            Direction::Backward => -1.0,
        }
    }

    pub fn reversed(self) -> Self {
        match self {
            Direction::Forward => Direction::Backward,
            Direction::Backward => Direction::Forward,
        }
    }

    pub fn from_sign(s: f64) -> Self {
        if s >= 0.0 {
            Direction::Forward
        } else {
            Direction::Backward
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EventKind {
    #[serde(rename = "y_zero_crossing")]
    YZeroCrossing,
    #[serde(rename = "Y_zero_crossing")]
    BigYZeroCrossing,
    #[serde(rename = "section_crossing")]
    SectionCrossing,
    #[serde(rename = "stationary_capture")]
    StationaryCapture,
    #[serde(rename = "escape_to_infinity")]
    EscapeToInfinity,
    #[serde(rename = "double_zero_capture")]
    DoubleZeroCapture,
}

impl EventKind {
    pub fn name(self) -> &'static str {
        match self {
            EventKind::YZeroCrossing => "y_zero_crossing",
            EventKind::BigYZeroCrossing => "Y_zero_crossing",
            EventKind::SectionCrossing => "section_crossing",
            EventKind::StationaryCapture => "stationary_capture",
            EventKind::EscapeToInfinity => "escape_to_infinity",
            EventKind::DoubleZeroCapture => "double_zero_capture",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub kind: EventKind,
    pub tau: f64,
    pub state: PhaseState,
    /// Index into the section list, for section crossings.
    pub section: Option<usize>,
    /// Sign of the rate of the section function in increasing `τ`.
    pub orientation: i8,
    pub point: Option<PointId>,
    /// Accumulated `∫ div dτ` at the event, when tracked.
    pub divergence: f64,
}

/// A transversal line for return maps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Section {
    /// `{y = 0, Y > 0}`.
    PositiveYAxis,
    /// `{y = y0, Y < y_cap}`.
    VerticalRayBelow { y0: f64, y_cap: f64 },
    /// `{y = y0, Y > y_floor}`.
    VerticalRayAbove { y0: f64, y_floor: f64 },
    /// `{a y + b Y + c = 0}`.
    Line { a: f64, b: f64, c: f64 },
}

impl Section {
    /// The ray below `M_ℓ`, `{y = ℓ, Y < -(γℓ)^{p-1}}`.
    pub fn below_m_ell(pr: &ProblemParams) -> Option<Section> {
        systems::m_ell(pr).map(|m| Section::VerticalRayBelow { y0: m[0], y_cap: m[1] })
    }

    pub fn value(&self, y: f64, big_y: f64) -> f64 {
        match *self {
            Section::PositiveYAxis => y,
            Section::VerticalRayBelow { y0, .. } | Section::VerticalRayAbove { y0, .. } => y - y0,
            Section::Line { a, b, c } => a * y + b * big_y + c,
        }
    }

    pub fn admissible(&self, _y: f64, big_y: f64) -> bool {
        match *self {
            Section::PositiveYAxis => big_y > 0.0,
            Section::VerticalRayBelow { y_cap, .. } => big_y < y_cap,
            Section::VerticalRayAbove { y_floor, .. } => big_y > y_floor,
            Section::Line { .. } => true,
        }
    }

    /// Coordinate along the section used by return maps.
    pub fn coordinate(&self, y: f64, big_y: f64) -> f64 {
        match *self {
            Section::PositiveYAxis | Section::VerticalRayBelow { .. } | Section::VerticalRayAbove { .. } => {
                big_y
            }
            Section::Line { a, b, .. } => {
                let n = (a * a + b * b).sqrt();
                (-b * y + a * big_y) / n
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum Termination {
    SpanExhausted,
    Escape,
    Captured { point: PointId },
    /// Arrival at a double zero; `extended` when the profile continues by zero past the
    /// edge in the integration direction.
    DoubleZero { extended: bool, tau_bar: f64 },
    MaxSteps,
    SectionLimit,
}

/// Stored continuous extension of one `S` step, in `τ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DenseSegment {
    pub tau_a: f64,
    pub tau_b: f64,
    cont: [[f64; 2]; 5],
}

impl DenseSegment {
    fn from_step(step: &Step<3>, tau0: f64, d: f64) -> Self {
        let mut cont = [[0.0; 2]; 5];
        for (k, row) in step.cont.iter().enumerate() {
            cont[k] = [row[0], row[1]];
        }
        DenseSegment {
            tau_a: tau0 + d * step.t0,
            tau_b: tau0 + d * step.t1(),
            cont,
        }
    }

    fn negated(mut self) -> Self {
        for row in self.cont.iter_mut() {
            row[0] = -row[0];
            row[1] = -row[1];
        }
        self
    }

    fn lo(&self) -> f64 {
        self.tau_a.min(self.tau_b)
    }

    fn hi(&self) -> f64 {
        self.tau_a.max(self.tau_b)
    }

    pub fn eval(&self, tau: f64) -> [f64; 2] {
        let theta = (tau - self.tau_a) / (self.tau_b - self.tau_a);
        let th1 = 1.0 - theta;
        let c = &self.cont;
        let mut out = [0.0; 2];
        for i in 0..2 {
            out[i] = c[0][i] + theta * (c[1][i] + th1 * (c[2][i] + theta * (c[3][i] + th1 * c[4][i])));
        }
        out
    }
}

/// A sampled orbit of `S`, stored in increasing `τ`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub params: ProblemParams,
    pub chart: Chart,
    pub direction: Direction,
    pub states: Vec<PhaseState>,
    /// `∫ div dτ` along the orbit, aligned with `states` (NaN where not tracked).
    pub divergence: Vec<f64>,
    pub events: Vec<Event>,
    pub termination: Termination,
    pub label_start: Option<Label>,
    pub label_end: Option<Label>,
    /// Chart used near the launch point, and how many of the states came from it.
    pub launch_chart: Option<Chart>,
    pub launch_states: usize,
    pub dense: Vec<DenseSegment>,
    pub steps: usize,
}

impl Trajectory {
    pub fn first(&self) -> &PhaseState {
        &self.states[0]
    }

    pub fn last(&self) -> &PhaseState {
        self.states.last().expect("trajectory has states")
    }

    /// The state at the end reached by the integration (the low-`τ` end when backward).
    pub fn terminal(&self) -> &PhaseState {
        match self.direction {
            Direction::Forward => self.last(),
            Direction::Backward => self.first(),
        }
    }

    pub fn tau_range(&self) -> (f64, f64) {
        (self.first().tau, self.last().tau)
    }

    pub fn events_of(&self, kind: EventKind) -> impl Iterator<Item = &Event> {
        self.events.iter().filter(move |e| e.kind == kind)
    }

    pub fn profile(&self) -> Vec<ProfileSample> {
        self.states.iter().map(|s| systems::to_profile(s, &self.params)).collect()
    }

    /// State at `τ`: the stored continuous extension where available, cubic Hermite
    /// between samples elsewhere.
    pub fn interpolate(&self, tau: f64) -> Option<[f64; 2]> {
        let (lo, hi) = self.tau_range();
        if !(tau >= lo && tau <= hi) {
            return None;
        }
        if !self.dense.is_empty() {
            let idx = self.dense.partition_point(|s| s.hi() < tau);
            if idx < self.dense.len() {
                let seg = &self.dense[idx];
                if seg.lo() <= tau && tau <= seg.hi() {
                    return Some(seg.eval(tau));
                }
            }
        }
        let i = self.states.partition_point(|s| s.tau < tau);
        if i == 0 {
            return Some(self.states[0].coords());
        }
        let (a, b) = (&self.states[i - 1], &self.states[i]);
        let h = b.tau - a.tau;
        if h <= 0.0 {
            return Some(b.coords());
        }
        let fa = s_field(&self.params, a.y, a.big_y);
        let fb = s_field(&self.params, b.y, b.big_y);
        let t = (tau - a.tau) / h;
        let h00 = (1.0 + 2.0 * t) * (1.0 - t) * (1.0 - t);
        let h10 = t * (1.0 - t) * (1.0 - t);
        let h01 = t * t * (3.0 - 2.0 * t);
        let h11 = t * t * (t - 1.0);
        let ya = a.coords();
        let yb = b.coords();
        let mut out = [0.0; 2];
        for k in 0..2 {
            out[k] = h00 * ya[k] + h10 * h * fa[k] + h01 * yb[k] + h11 * h * fb[k];
        }
        Some(out)
    }

    /// Image under the symmetry `(y, Y) -> (-y, -Y)`.
    pub fn mirrored(mut self) -> Self {
        let swap = |p: PointId| match p {
            PointId::MEll => PointId::MinusMEll,
            PointId::MinusMEll => PointId::MEll,
            PointId::Origin => PointId::Origin,
        };
        for s in self.states.iter_mut() {
            s.y = -s.y;
            s.big_y = -s.big_y;
        }
        for e in self.events.iter_mut() {
            e.state.y = -e.state.y;
            e.state.big_y = -e.state.big_y;
            e.point = e.point.map(swap);
        }
        self.dense = self.dense.into_iter().map(DenseSegment::negated).collect();
        if let Termination::Captured { point } = self.termination {
            self.termination = Termination::Captured { point: swap(point) };
        }
        self
    }

    /// Number of strict sign changes of `y` with `τ` in `[a, b]`.
    pub fn sign_changes_in(&self, a: f64, b: f64) -> usize {
        let mut count = 0;
        let mut last = 0.0f64;
        for s in self.states.iter().filter(|s| s.tau >= a && s.tau <= b) {
            if s.y != 0.0 {
                if last != 0.0 && s.y.signum() != last.signum() {
                    count += 1;
                }
                last = s.y;
            }
        }
        count
    }
}

/// Divergence of `S` at a point with ordinate `Y`.
pub fn divergence_rate(pr: &ProblemParams, big_y: f64) -> f64 {
    let base = -2.0 * pr.gamma() - pr.nf();
    if big_y == 0.0 {
        base
    } else {
        base - pr.e() * big_y.abs().powf((2.0 - pr.p) / (pr.p - 1.0)) / (pr.p - 1.0)
    }
}

fn failure(reason: &str, tau: f64, y: f64, big_y: f64) -> Error {
    Error::Integration { reason: reason.to_string(), tau, y, big_y }
}

/// Whether a stationary point attracts in the given direction.
fn attracts(pr: &ProblemParams, point: PointId, dir: Direction) -> bool {
    match point {
        PointId::Origin => true,
        PointId::MEll | PointId::MinusMEll => {
            let sink = pr.nu().map(|nu| 2.0 * pr.gamma() + pr.nf() + nu > 0.0).unwrap_or(false);
            match dir {
                Direction::Forward => sink,
                Direction::Backward => !sink,
            }
        }
    }
}

/// Outcome of a capture test near the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OriginApproach {
    /// Along the double-zero cone `Y/y ≈ ε`; `tau_bar` estimates the edge.
    DoubleZero { tau_bar: f64 },
    Regular,
}

/// Returns the stationary point whose capture disc contains the state and which attracts in
/// the integration direction.
pub fn capture_test(pr: &ProblemParams, state: &PhaseState, dir: Direction, radius: f64) -> Option<PointId> {
    let (y, yy) = (state.y, state.big_y);
    if let Some(m) = systems::m_ell(pr) {
        let size = m[0].hypot(m[1]);
        for (id, c) in [(PointId::MEll, m), (PointId::MinusMEll, [-m[0], -m[1]])] {
            let dist = (y - c[0]).hypot(yy - c[1]);
            if dist <= radius * size && attracts(pr, id, dir) {
                return Some(id);
            }
        }
    }
    if magnitude(pr, y, yy) <= radius * pr.scale() {
        return Some(PointId::Origin);
    }
    None
}

/// Radius, relative to the phase-plane scale, inside which an orbit on one of the two
/// local cones of the origin is captured without waiting for the generic radius. Below it
/// the remaining approach is governed by the local law and lies under the absolute
/// tolerance.
pub const CONE_CAPTURE_RADIUS: f64 = 1e-3;

/// Whether a state near the origin sits on the double-zero cone or on the `A_α` cone
/// (`ζ ≈ α`, `σ ≈ 0`).
///
/// The double-zero cone is entered forward for `ε = 1` and backward for `ε = -1`; the
/// `A_α` cone forward when `β > 0` and backward when `β < 0`.
///
/// When `ε(α+γ) > 0` the `A_α` end attracts every nearby orbit and the approach in `S` is
/// stiff (steps scale like `σ`), so that cone is also entered at any size once
/// `|σ| ≤ cone_sigma`.
pub fn cone_capture(pr: &ProblemParams, state: &PhaseState, mag: f64, dir: Direction, cone_sigma: f64) -> bool {
    if state.y == 0.0 {
        return false;
    }
    let near = mag <= CONE_CAPTURE_RADIUS * pr.scale();
    let d = dir.sign();
    if near {
        if let OriginApproach::DoubleZero { .. } = origin_approach(pr, state) {
            return pr.e() * d > 0.0;
        }
    }
    let b = pr.beta();
    let b_sign = if b != 0.0 { b.signum() } else { pr.e() };
    let zeta = pr.phi(state.big_y) / state.y;
    let sigma = state.big_y / state.y;
    let on_cone = b_sign * d > 0.0 && (zeta - pr.alpha).abs() <= 1e-2 * pr.alpha.abs().max(1.0);
    let attracting = pr.e() * (pr.alpha + pr.gamma()) > 0.0;
    on_cone && ((near && sigma.abs() <= 1e-2) || (attracting && sigma.abs() <= cone_sigma))
}

/// Default `|σ|` below which an orbit on an attracting `A_α` cone is captured regardless of size.
pub const A_ALPHA_SIGMA: f64 = 1e-4;

/// Classifies an approach to the origin.
pub fn origin_approach(pr: &ProblemParams, state: &PhaseState) -> OriginApproach {
    let (y, yy) = (state.y, state.big_y);
    if y != 0.0 && yy != 0.0 {
        let sigma = yy / y;
        let zeta = pr.phi(yy) / y;
        if (sigma - pr.e()).abs() <= 0.1 && zeta.abs() >= 10.0 * pr.alpha.abs().max(1.0) {
            let g = -1.0 / zeta;
            let tau_bar = state.tau - (pr.p - 1.0) / (pr.p - 2.0) * g;
            return OriginApproach::DoubleZero { tau_bar };
        }
    }
    OriginApproach::Regular
}

struct Recorder {
    states: Vec<PhaseState>,
    divergence: Vec<f64>,
    events: Vec<Event>,
    dense: Vec<DenseSegment>,
}

impl Recorder {
    fn push(&mut self, s: PhaseState, div: f64) {
        self.states.push(s);
        self.divergence.push(div);
    }
}

fn event(kind: EventKind, s: PhaseState, div: f64) -> Event {
    Event {
        kind,
        tau: s.tau,
        state: s,
        section: None,
        orientation: 0,
        point: None,
        divergence: div,
    }
}

/// Integrates system `S` from `start`.
pub fn integrate_s(
    pr: &ProblemParams,
    start: PhaseState,
    dir: Direction,
    cfg: &IntegrationConfig,
    sections: &[Section],
    section_limit: Option<usize>,
) -> Result<Trajectory> {
    cfg.validate()?;
    if !start.is_finite() {
        return Err(failure("non-finite initial state", start.tau, start.y, start.big_y));
    }
    if start.y == 0.0 && start.big_y == 0.0 {
        return Err(failure("the origin is not a valid initial state", start.tau, 0.0, 0.0));
    }
    let d = dir.sign();
    let tau0 = start.tau;
    let track = cfg.track_divergence;
    let f = |_t: f64, x: &[f64; 3]| -> Option<[f64; 3]> {
        let v = s_field(pr, x[0], x[1]);
        let div = if track { divergence_rate(pr, x[1]) } else { 0.0 };
        Some([d * v[0], d * v[1], d * div])
    };
    let mut tol = Tolerances::<3>::new(cfg.abs_tol, cfg.rel_tol);
    tol.active[2] = track;
    let x0 = [start.y, start.big_y, 0.0];
    let mut solver = Solver::new(&f, 0.0, x0, 1.0, tol, 0.0)
        .map_err(|_| failure("field undefined at the initial state", tau0, start.y, start.big_y))?;
    solver.h_max = cfg.max_step;

    let mut rec = Recorder {
        states: Vec::new(),
        divergence: Vec::new(),
        events: Vec::new(),
        dense: Vec::new(),
    };
    let div_of = |x: &[f64; 3]| if track { x[2] } else { f64::NAN };
    rec.push(start, div_of(&x0));

    let span = cfg.max_time_span;
    let mut section_hits = 0usize;
    let mut termination = Termination::SpanExhausted;
    let tau_at = |t: f64| tau0 + d * t;
    let mut prev_mag = magnitude(pr, start.y, start.big_y);
    let scale = pr.scale();

    // An initial state inside the band is carried across first.
    if start.y != 0.0 {
        let delta = band_width(pr, cfg, start.y);
        if start.big_y.abs() < delta && band_eligible(pr, start.y, delta) {
            let (t_x, x_x) = cross_band(pr, cfg, d, tau0, 0.0, x0, &mut rec)?;
            solver
                .reset(&f, t_x, x_x)
                .map_err(|_| failure("field undefined after band crossing", tau_at(t_x), x_x[0], x_x[1]))?;
        }
    }

    loop {
        if solver.accepted >= cfg.max_steps {
            termination = Termination::MaxSteps;
            break;
        }
        if solver.t >= span {
            break;
        }
        // Near the origin the absolute tolerances shrink with the state's size.
        let m = (magnitude(pr, solver.x[0], solver.x[1]) / scale).clamp(1e-30, 1.0);
        solver.tol.abs[0] = cfg.abs_tol * m;
        solver.tol.abs[1] = cfg.abs_tol * m.powf(pr.p - 1.0);
        let mut step = match solver.advance(&f, span) {
            Ok(s) => s,
            Err(StepFailure::Underflow { t, .. }) | Err(StepFailure::Domain { t }) => {
                return Err(failure("step size underflow", tau_at(t), solver.x[0], solver.x[1]));
            }
        };
        let mut banded = false;
        let (ya, yya) = (step.x0[0], step.x0[1]);
        let yyb = step.x1[1];
        if ya != 0.0 {
            let delta = band_width(pr, cfg, ya);
            if yya.abs() >= delta && (yyb.abs() < delta || yyb.signum() != yya.signum()) {
                let s = yya.signum();
                let g = |t: f64| s * step.eval(t)[1] - delta;
                let t_e = bisect(g, step.t0, step.t1(), g(step.t0), 1e-14 * step.t1().abs().max(1.0));
                let x_e = step.eval(t_e);
                if band_eligible(pr, x_e[0], delta) && t_e > step.t0 {
                    solver
                        .reset(&f, step.t0, step.x0)
                        .map_err(|_| failure("field undefined", tau_at(step.t0), ya, yya))?;
                    if let Some((st2, _)) = solver.trial(&f, t_e - step.t0) {
                        solver.commit(&st2);
                        step = st2;
                        banded = true;
                    } else {
                        return Err(failure("band entry step failed", tau_at(t_e), x_e[0], x_e[1]));
                    }
                } else if band_eligible(pr, x_e[0], delta) {
                    banded = true;
                }
            }
        }

        let hits = step_events(pr, &step, tau0, d, sections, track, &mut rec.events);
        section_hits += hits;
        if cfg.dense {
            rec.dense.push(DenseSegment::from_step(&step, tau0, d));
        }
        let x1 = step.x1;
        let s1 = PhaseState::new(tau_at(step.t1()), x1[0], x1[1]);
        if !s1.is_finite() || !x1[2].is_finite() && track {
            return Err(failure("non-finite state", s1.tau, s1.y, s1.big_y));
        }
        rec.push(s1, div_of(&x1));

        if banded {
            let (t_x, x_x) = cross_band(pr, cfg, d, tau0, step.t1(), x1, &mut rec)?;
            solver
                .reset(&f, t_x, x_x)
                .map_err(|_| failure("field undefined after band crossing", tau_at(t_x), x_x[0], x_x[1]))?;
        }
        let cur = *rec.states.last().expect("non-empty");
        let cur_div = *rec.divergence.last().expect("non-empty");

        if cur.y.abs() > cfg.escape_bound || cur.big_y.abs() > cfg.escape_bound {
            rec.events.push(event(EventKind::EscapeToInfinity, cur, cur_div));
            termination = Termination::Escape;
            break;
        }
        if cfg.capture {
            let mag = magnitude(pr, cur.y, cur.big_y);
            let early = mag < prev_mag && cone_capture(pr, &cur, mag, dir, cfg.cone_sigma);
            prev_mag = mag;
            let hit = if early { Some(PointId::Origin) } else { capture_test(pr, &cur, dir, cfg.capture_radius) };
            if let Some(id) = hit {
                if id == PointId::Origin {
                    match origin_approach(pr, &cur) {
                        OriginApproach::DoubleZero { tau_bar } => {
                            let mut ev = event(EventKind::DoubleZeroCapture, cur, cur_div);
                            ev.point = Some(PointId::Origin);
                            rec.events.push(ev);
                            let extended = (pr.e() > 0.0) == (dir == Direction::Forward);
                            termination = Termination::DoubleZero { extended, tau_bar };
                        }
                        OriginApproach::Regular => {
                            let mut ev = event(EventKind::StationaryCapture, cur, cur_div);
                            ev.point = Some(id);
                            rec.events.push(ev);
                            termination = Termination::Captured { point: id };
                        }
                    }
                } else {
                    let mut ev = event(EventKind::StationaryCapture, cur, cur_div);
                    ev.point = Some(id);
                    rec.events.push(ev);
                    termination = Termination::Captured { point: id };
                }
                break;
            }
        }
        if let Some(limit) = section_limit {
            if section_hits >= limit {
                termination = Termination::SectionLimit;
                break;
            }
        }
    }

    let steps = solver.accepted;
    let mut traj = Trajectory {
        params: *pr,
        chart: Chart::S,
        direction: dir,
        states: rec.states,
        divergence: rec.divergence,
        events: rec.events,
        termination,
        label_start: None,
        label_end: None,
        launch_chart: None,
        launch_states: 0,
        dense: rec.dense,
        steps,
    };
    if dir == Direction::Backward {
        traj.states.reverse();
        traj.divergence.reverse();
        traj.events.reverse();
        traj.dense.reverse();
    }
    Ok(traj)
}

fn band_width(pr: &ProblemParams, cfg: &IntegrationConfig, y: f64) -> f64 {
    cfg.band_rel * (pr.gamma() * y.abs()).powf(pr.p - 1.0)
}

/// `Y'` keeps one sign across the band when `|α y|` dominates the other terms.
fn band_eligible(pr: &ProblemParams, y: f64, delta: f64) -> bool {
    y != 0.0 && (pr.alpha * y).abs() >= 10.0 * (pr.phi(delta) + (pr.gamma() + pr.nf()) * delta)
}

/// Events inside one accepted step, appended in step order. Returns the number of section hits.
fn step_events(
    pr: &ProblemParams,
    step: &Step<3>,
    tau0: f64,
    d: f64,
    sections: &[Section],
    track: bool,
    out: &mut Vec<Event>,
) -> usize {
    let _ = pr;
    let (a, b) = (step.x0, step.x1);
    let tol = 1e-12 * (tau0 + d * step.t1()).abs().max(1.0);
    let mut found: Vec<Event> = Vec::new();
    let mk = |t: f64, kind: EventKind| {
        let x = step.eval(t);
        let s = PhaseState::new(tau0 + d * t, x[0], x[1]);
        event(kind, s, if track { x[2] } else { f64::NAN })
    };
    if a[0] * b[0] < 0.0 {
        let g = |t: f64| step.eval(t)[0];
        let t = bisect(g, step.t0, step.t1(), a[0], tol);
        found.push(mk(t, EventKind::YZeroCrossing));
    }
    if a[1] * b[1] < 0.0 {
        let g = |t: f64| step.eval(t)[1];
        let t = bisect(g, step.t0, step.t1(), a[1], tol);
        found.push(mk(t, EventKind::BigYZeroCrossing));
    }
    let mut hits = 0;
    for (k, sec) in sections.iter().enumerate() {
        let va = sec.value(a[0], a[1]);
        let vb = sec.value(b[0], b[1]);
        if va * vb < 0.0 || (vb == 0.0 && va != 0.0) {
            let g = |t: f64| {
                let x = step.eval(t);
                sec.value(x[0], x[1])
            };
            let t = bisect(g, step.t0, step.t1(), va, tol);
            let mut ev = mk(t, EventKind::SectionCrossing);
            if sec.admissible(ev.state.y, ev.state.big_y) {
                ev.section = Some(k);
                ev.orientation = if (vb - va) * d > 0.0 { 1 } else { -1 };
                found.push(ev);
                hits += 1;
            }
        }
    }
    found.sort_by(|x, y| (d * x.tau).partial_cmp(&(d * y.tau)).unwrap_or(std::cmp::Ordering::Equal));
    out.extend(found);
    hits
}

/// Crosses `{Y = 0}` with `u = Φ(Y)` as independent variable. `x` is `[y, Y, I]` at the
/// entry (time `t` along the integration). Returns the exit time and state.
fn cross_band(
    pr: &ProblemParams,
    cfg: &IntegrationConfig,
    d: f64,
    tau0: f64,
    t: f64,
    x: [f64; 3],
    rec: &mut Recorder,
) -> Result<(f64, [f64; 3])> {
    let p = pr.p;
    let g = pr.gamma();
    let n = pr.nf();
    let e = pr.e();
    let a = pr.alpha;
    let track = cfg.track_divergence;
    let delta = band_width(pr, cfg, x[0]);
    // Direction of travel in Y along the integration.
    let ydot = d * (-(g + n) * x[1] + e * (a * x[0] - pr.phi(x[1])));
    let travel = if ydot >= 0.0 { 1.0 } else { -1.0 };
    let u_start = pr.phi(x[1]);
    let u_exit = travel * pr.phi(delta);
    let rhs = |u: f64, z: &[f64; 3]| -> Option<[f64; 3]> {
        let yy = signed_pow(u, p - 1.0);
        let yd = -(g + n) * yy + e * (a * z[0] - u);
        if yd == 0.0 {
            return None;
        }
        let wgt = (p - 1.0) * u.abs().powf(p - 2.0);
        let di = if track { ((-2.0 * g - n) * wgt - e) / yd } else { 0.0 };
        Some([(-g * z[0] - u) * wgt / yd, d * wgt / yd, di])
    };
    let mut tol = Tolerances::<3>::new(cfg.abs_tol, cfg.rel_tol);
    tol.active[2] = track;
    let z0 = [x[0], t, x[2]];
    let mut solver = Solver::new(&rhs, u_start, z0, travel, tol, 0.0)
        .map_err(|_| failure("band crossing undefined", tau0 + d * t, x[0], x[1]))?;
    let stops: Vec<f64> = if u_start * travel < 0.0 { vec![0.0, u_exit] } else { vec![u_exit] };
    for stop in stops {
        while (stop - solver.t) * travel > 0.0 {
            let st = solver
                .advance(&rhs, stop)
                .map_err(|_| failure("band crossing underflow", tau0 + d * solver.x[1], solver.x[0], 0.0))?;
            let z = st.x1;
            let yy = signed_pow(st.t1(), p - 1.0);
            let s = PhaseState::new(tau0 + d * z[1], z[0], if st.t1() == 0.0 { 0.0 } else { yy });
            rec.push(s, if track { z[2] } else { f64::NAN });
        }
        if stop == 0.0 {
            let z = solver.x;
            let s = PhaseState::new(tau0 + d * z[1], z[0], 0.0);
            rec.events.push(event(EventKind::BigYZeroCrossing, s, if track { z[2] } else { f64::NAN }));
        }
    }
    let z = solver.x;
    let yy_exit = signed_pow(u_exit, p - 1.0);
    if let Some(last) = rec.states.last_mut() {
        last.big_y = yy_exit;
    }
    Ok((z[1], [z[0], yy_exit, z[2]]))
}

/// Time variable of a chart integration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChartTime {
    Tau,
    Nu,
}

/// A point of a chart integration: chart time, coordinates and `τ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChartPoint {
    pub time: f64,
    pub coords: [f64; 2],
    pub tau: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChartStop {
    Crossing,
    Predicate,
    SpanExhausted,
    MaxSteps,
    Escape,
}

/// Stop when coordinate `coord` reaches `value`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChartCrossing {
    pub coord: usize,
    pub value: f64,
}

#[derive(Debug, Clone)]
pub struct ChartRun {
    pub chart: Chart,
    pub points: Vec<ChartPoint>,
    pub crossing: Option<ChartPoint>,
    pub stop: ChartStop,
}

impl ChartRun {
    pub fn last(&self) -> &ChartPoint {
        self.points.last().expect("chart run has points")
    }
}

/// Chart-time rate of `τ`.
fn tau_rate(pr: &ProblemParams, chart: Chart, c: &[f64; 2]) -> f64 {
    match chart {
        Chart::S | Chart::Q | Chart::P => 1.0,
        Chart::R => c[0] * c[1],
        Chart::RBeta => c[0] * pr.beta() * c[1],
    }
}

/// Integrates one of the charts in its own time variable, carrying `τ` along.
///
/// `max_time` bounds the elapsed chart time; `stop` is checked after every accepted step.
#[allow(clippy::too_many_arguments)]
pub fn integrate_chart(
    pr: &ProblemParams,
    chart: Chart,
    start: [f64; 2],
    tau0: f64,
    dir: Direction,
    cfg: &IntegrationConfig,
    max_time: f64,
    crossing: Option<ChartCrossing>,
    stop: &mut dyn FnMut(&ChartPoint) -> bool,
) -> Result<ChartRun> {
    cfg.validate()?;
    let d = dir.sign();
    let f = |_t: f64, x: &[f64; 3]| -> Option<[f64; 3]> {
        let c = [x[0], x[1]];
        let v = systems::field(chart, c, pr).ok()?;
        Some([d * v[0], d * v[1], d * tau_rate(pr, chart, &c)])
    };
    // Absolute tolerances follow the launch size so tiny manifold offsets stay resolved.
    let mut tol = Tolerances::<3>::new(cfg.abs_tol, cfg.rel_tol);
    for k in 0..2 {
        if start[k] != 0.0 {
            tol.abs[k] = cfg.abs_tol * start[k].abs().min(1.0);
        }
    }
    let mut solver = Solver::new(&f, 0.0, [start[0], start[1], tau0], 1.0, tol, 0.0).map_err(|_| {
        Error::Domain(format!("chart {chart:?} field undefined at the launch point"))
    })?;
    solver.h_max = cfg.max_step;
    let mut points = vec![ChartPoint { time: 0.0, coords: start, tau: tau0 }];
    let to_point = |t: f64, x: &[f64; 3]| ChartPoint { time: d * t, coords: [x[0], x[1]], tau: x[2] };
    loop {
        if solver.accepted >= cfg.max_steps {
            return Ok(ChartRun { chart, points, crossing: None, stop: ChartStop::MaxSteps });
        }
        if solver.t >= max_time {
            return Ok(ChartRun { chart, points, crossing: None, stop: ChartStop::SpanExhausted });
        }
        let step = solver.advance(&f, max_time).map_err(|e| {
            let t = match e {
                StepFailure::Underflow { t, .. } | StepFailure::Domain { t } => t,
            };
            Error::Integration {
                reason: format!("chart {chart:?} step size underflow"),
                tau: solver.x[2],
                y: solver.x[0],
                big_y: solver.x[1],
            }
            .with_time(t)
        })?;
        if let Some(cr) = crossing {
            let va = step.x0[cr.coord] - cr.value;
            let vb = step.x1[cr.coord] - cr.value;
            if va * vb < 0.0 || (vb == 0.0 && va != 0.0) {
                let g = |t: f64| step.eval(t)[cr.coord] - cr.value;
                let t = bisect(g, step.t0, step.t1(), va, 1e-14 * step.t1().abs().max(1.0));
                let cp = to_point(t, &step.eval(t));
                points.push(cp);
                return Ok(ChartRun { chart, points, crossing: Some(cp), stop: ChartStop::Crossing });
            }
        }
        let cp = to_point(step.t1(), &step.x1);
        points.push(cp);
        if cp.coords[0].abs() > cfg.escape_bound || cp.coords[1].abs() > cfg.escape_bound {
            return Ok(ChartRun { chart, points, crossing: None, stop: ChartStop::Escape });
        }
        if stop(&cp) {
            return Ok(ChartRun { chart, points, crossing: None, stop: ChartStop::Predicate });
        }
    }
}

impl Error {
    fn with_time(self, _t: f64) -> Self {
        self
    }
}
