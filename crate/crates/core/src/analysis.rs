//! Stationary points, asymptotic labels, zero counts, limit cycles, the connection function
//! `φ(α)`, the critical exponent `α_c` and the regime classifier.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::dopri::bisect;
use crate::integrate::{
    divergence_rate, integrate_chart, integrate_s, ChartCrossing, Direction, EventKind, IntegrationConfig,
    Section, Termination, Trajectory,
};
use crate::params::{self, derive_constants, DerivedConstants, Eps, ProblemParams};
use crate::systems::oracles::adaptive_simpson;
use crate::systems::{self, bound_functional, m_ell, s_jacobian, to_profile, Chart, PhaseState, PointId, ProfileSample};
use crate::trajectories::{shoot_double_zero, shoot_regular, shoot_t_alpha, ShootConfig};

/// Asymptotic label of one end of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    #[serde(rename = "A_gamma")]
    AGamma,
    #[serde(rename = "A_r")]
    AR,
    #[serde(rename = "A_alpha")]
    AAlpha,
    #[serde(rename = "L_eta")]
    LEta,
    #[serde(rename = "L_plus")]
    LPlus,
    #[serde(rename = "L_minus")]
    LMinus,
    #[serde(rename = "M_ell")]
    MEll,
    #[serde(rename = "minus_M_ell")]
    MinusMEll,
    #[serde(rename = "origin")]
    Origin,
    #[serde(rename = "cycle")]
    Cycle,
    #[serde(rename = "oscillating_sign")]
    OscillatingSign,
    #[serde(rename = "escape")]
    Escape,
    #[serde(rename = "undetermined")]
    Undetermined,
}

impl Label {
    pub fn name(self) -> &'static str {
        match self {
            Label::AGamma => "A_gamma",
            Label::AR => "A_r",
            Label::AAlpha => "A_alpha",
            Label::LEta => "L_eta",
            Label::LPlus => "L_plus",
            Label::LMinus => "L_minus",
            Label::MEll => "M_ell",
            Label::MinusMEll => "minus_M_ell",
            Label::Origin => "origin",
            Label::Cycle => "cycle",
            Label::OscillatingSign => "oscillating_sign",
            Label::Escape => "escape",
            Label::Undetermined => "undetermined",
        }
    }

    /// Exponent `k` with `|w| ~ C r^k` at the labeled end, where the label fixes one.
    pub fn profile_exponent(self, pr: &ProblemParams) -> Option<f64> {
        match self {
            Label::AGamma => Some(pr.gamma()),
            Label::AAlpha => Some(-pr.alpha),
            Label::LEta => Some(-pr.eta()),
            Label::AR => Some(0.0),
            _ => None,
        }
    }
}

/// Tolerance on `(ζ, σ)` tail limits.
pub const TAIL_MATCH_TOL: f64 = 1e-3;

/// Fraction of the `τ` span forming the tail window.
pub const TAIL_FRACTION: f64 = 0.2;

// ---------------------------------------------------------------------------------------
// Stationary points
// ---------------------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LocalType {
    Saddle,
    SinkNode,
    SinkSpiral,
    SourceNode,
    SourceSpiral,
    WeakSource,
    CenterLike,
}

impl LocalType {
    pub fn name(self) -> &'static str {
        match self {
            LocalType::Saddle => "saddle",
            LocalType::SinkNode => "sink_node",
            LocalType::SinkSpiral => "sink_spiral",
            LocalType::SourceNode => "source_node",
            LocalType::SourceSpiral => "source_spiral",
            LocalType::WeakSource => "weak_source",
            LocalType::CenterLike => "center_like",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StationaryPointInfo {
    pub point: PointId,
    pub location: [f64; 2],
    /// Roots of `λ² + (2γ+N+ν)λ + p'(N+γ) = 0`; absent at the singular origin.
    pub eigenvalues: Option<[Complex64; 2]>,
    pub local_type: LocalType,
    /// Eigenvectors of the Jacobian of `S` in `(y, Y)`.
    pub eigenvectors: Option<[[Complex64; 2]; 2]>,
    /// `max |λ² + bλ + c|` over both roots, relative to the largest term.
    pub residual: Option<f64>,
}

/// Coefficients `(b, c)` of the eigenvalue equation at `M_ℓ`.
pub fn eigen_coefficients(pr: &ProblemParams) -> Option<(f64, f64)> {
    let nu = pr.nu()?;
    pr.ell()?;
    let (g, n) = (pr.gamma(), pr.nf());
    Some((2.0 * g + n + nu, pr.p_prime() * (n + g)))
}

fn quadratic_roots(b: f64, c: f64) -> [Complex64; 2] {
    let disc = b * b - 4.0 * c;
    if disc >= 0.0 {
        let sq = disc.sqrt();
        // Stable form avoids cancellation in the small root.
        let q = -0.5 * (b + b.signum() * sq);
        if q == 0.0 {
            return [Complex64::new(0.0, 0.0); 2];
        }
        let (r1, r2) = (q, c / q);
        let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
        [Complex64::new(lo, 0.0), Complex64::new(hi, 0.0)]
    } else {
        let im = (-disc).sqrt() / 2.0;
        [Complex64::new(-b / 2.0, -im), Complex64::new(-b / 2.0, im)]
    }
}

fn root_residual(b: f64, c: f64, l: Complex64) -> f64 {
    let scale = l.norm_sqr().max((l * b).norm()).max(c.abs()).max(1.0);
    (l * l + l * b + c).norm() / scale
}

/// Classifies the origin and, when present, `±M_ℓ`.
pub fn classify_stationary_points(pr: &ProblemParams) -> Vec<StationaryPointInfo> {
    let mut out = vec![StationaryPointInfo {
        point: PointId::Origin,
        location: [0.0, 0.0],
        eigenvalues: None,
        local_type: LocalType::CenterLike,
        eigenvectors: None,
        residual: None,
    }];
    let (Some(m), Some((b, c))) = (m_ell(pr), eigen_coefficients(pr)) else {
        return out;
    };
    let roots = quadratic_roots(b, c);
    let residual = roots.iter().map(|&l| root_residual(b, c, l)).fold(0.0, f64::max);
    let disc = b * b - 4.0 * c;
    let trace = -b;
    let local_type = if trace.abs() <= 1e-12 * (2.0 * pr.gamma() + pr.nf()) {
        LocalType::WeakSource
    } else if trace < 0.0 {
        if disc >= 0.0 {
            LocalType::SinkNode
        } else {
            LocalType::SinkSpiral
        }
    } else if disc >= 0.0 {
        LocalType::SourceNode
    } else {
        LocalType::SourceSpiral
    };
    let jac = s_jacobian(pr, m[0], m[1]);
    let vecs = roots.map(|l| {
        let v = [Complex64::new(jac[0][1], 0.0), l - jac[0][0]];
        let n = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
        if n > 0.0 {
            [v[0] / n, v[1] / n]
        } else {
            [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]
        }
    });
    for (id, loc) in [(PointId::MEll, m), (PointId::MinusMEll, [-m[0], -m[1]])] {
        out.push(StationaryPointInfo {
            point: id,
            location: loc,
            eigenvalues: Some(roots),
            local_type,
            eigenvectors: Some(vecs),
            residual: Some(residual),
        });
    }
    out
}

/// `max |J v - λ v|` over the reported eigenpairs of `M_ℓ`.
pub fn jacobian_residual(pr: &ProblemParams, info: &StationaryPointInfo) -> Option<f64> {
    let (ls, vs) = (info.eigenvalues?, info.eigenvectors?);
    let j = s_jacobian(pr, info.location[0], info.location[1]);
    let mut worst: f64 = 0.0;
    for (l, v) in ls.iter().zip(vs.iter()) {
        for (row, vi) in j.iter().zip(v.iter()) {
            let jv = v[0] * row[0] + v[1] * row[1];
            worst = worst.max((jv - l * vi).norm());
        }
    }
    Some(worst)
}

// ---------------------------------------------------------------------------------------
// Labels and zero counts
// ---------------------------------------------------------------------------------------

/// `(ζ, σ) = (Φ(Y)/y, Y/y)`.
pub fn q_coords(pr: &ProblemParams, y: f64, big_y: f64) -> Option<(f64, f64)> {
    if y == 0.0 {
        None
    } else {
        Some((pr.phi(big_y) / y, big_y / y))
    }
}

/// Matches `(ζ, ψ)` against the points at infinity.
fn match_at_infinity(pr: &ProblemParams, zeta: f64, psi: f64, tol: f64) -> Option<Label> {
    let eta = pr.eta();
    let near_eta = (zeta - eta).abs() <= tol * eta.abs().max(1.0) && psi.abs() <= tol;
    let near_l = zeta.abs() <= tol && psi.abs() <= tol && zeta != 0.0;
    let l_pm = if zeta > 0.0 { Label::LPlus } else { Label::LMinus };
    if eta.abs() <= tol {
        if near_l {
            return Some(l_pm);
        }
    } else if near_eta {
        return Some(Label::LEta);
    } else if near_l {
        return Some(l_pm);
    }
    let psi_r = pr.nf() / (pr.e() * pr.alpha);
    if zeta.abs() <= tol && (psi - psi_r).abs() <= tol * psi_r.abs().max(1.0) {
        return Some(Label::AR);
    }
    None
}

/// Matches a state against the points at infinity and `A_α` by its `(ζ, σ)` coordinates.
pub fn match_tail_limit(pr: &ProblemParams, state: &PhaseState, tol: f64) -> Option<Label> {
    let (zeta, sigma) = q_coords(pr, state.y, state.big_y)?;
    if (zeta - pr.alpha).abs() <= tol * pr.alpha.abs().max(1.0) && sigma.abs() <= tol {
        return Some(Label::AAlpha);
    }
    if sigma == 0.0 {
        return None;
    }
    match_at_infinity(pr, zeta, 1.0 / sigma, tol)
}

/// `τ` span of the `P`-chart continuation used to identify an escape.
pub const ESCAPE_CONTINUATION: f64 = 1e4;

/// Follows an escaping orbit in the chart `P`, where the points at infinity are finite, until
/// its `(ζ, ψ)` settles within [`TAIL_MATCH_TOL`] of one of them.
pub fn label_at_infinity(t: &Trajectory, pr: &ProblemParams) -> Label {
    let term = t.terminal();
    if let Some(l) = match_tail_limit(pr, term, TAIL_MATCH_TOL) {
        return l;
    }
    let Ok(cs) = systems::convert(term, Chart::P, pr) else {
        return Label::Escape;
    };
    let cfg = IntegrationConfig { max_steps: 200_000, ..IntegrationConfig::default() };
    let mut found = None;
    let mut stop = |cp: &crate::integrate::ChartPoint| {
        found = match_at_infinity(pr, cp.coords[0], cp.coords[1], TAIL_MATCH_TOL);
        found.is_some()
    };
    match integrate_chart(pr, Chart::P, cs.coords, term.tau, t.direction, &cfg, ESCAPE_CONTINUATION, None, &mut stop) {
        Ok(_) => found.unwrap_or(Label::Escape),
        Err(_) => Label::Escape,
    }
}

fn tail_window(t: &Trajectory) -> (f64, f64) {
    let (lo, hi) = t.tau_range();
    let w = TAIL_FRACTION * (hi - lo);
    match t.direction {
        Direction::Forward => (hi - w, hi),
        Direction::Backward => (lo, lo + w),
    }
}

/// Strict sign changes of `y` with `τ` in `[a, b]`, refined through the dense output
/// between samples of equal sign.
pub fn count_sign_changes(t: &Trajectory, window: (f64, f64)) -> usize {
    let (a, b) = (window.0.min(window.1), window.0.max(window.1));
    let mut count = 0;
    let mut last: Option<&PhaseState> = None;
    for s in t.states.iter().filter(|s| s.tau >= a && s.tau <= b && s.y != 0.0) {
        if let Some(prev) = last {
            if prev.y.signum() != s.y.signum() {
                count += 1;
            } else if s.tau > prev.tau {
                let mid = 0.5 * (prev.tau + s.tau);
                if let Some(m) = t.interpolate(mid) {
                    if m[0] != 0.0 && m[0].signum() != s.y.signum() {
                        count += 2;
                    }
                }
            }
        }
        last = Some(s);
    }
    count
}

/// Sign changes over the whole trajectory.
pub fn zero_count(t: &Trajectory) -> usize {
    count_sign_changes(t, t.tau_range())
}

/// Label of the end reached by the integration.
pub fn terminal_label(t: &Trajectory, pr: &ProblemParams) -> Label {
    let term = t.terminal();
    match t.termination {
        Termination::Captured { point: PointId::MEll | PointId::MinusMEll } => Label::AGamma,
        Termination::Captured { point: PointId::Origin } => {
            match match_tail_limit(pr, term, 1e-2) {
                Some(Label::AAlpha) => Label::AAlpha,
                _ => Label::Origin,
            }
        }
        Termination::DoubleZero { .. } => Label::Origin,
        Termination::Escape => label_at_infinity(t, pr),
        Termination::SpanExhausted | Termination::MaxSteps | Termination::SectionLimit => {
            if count_sign_changes(t, tail_window(t)) >= 2 {
                return Label::OscillatingSign;
            }
            if detect_limit_cycle(t, pr).is_some() {
                return Label::Cycle;
            }
            if let Some(m) = m_ell(pr) {
                let size = m[0].hypot(m[1]);
                for c in [m, [-m[0], -m[1]]] {
                    if (term.y - c[0]).hypot(term.big_y - c[1]) <= TAIL_MATCH_TOL * size {
                        return Label::AGamma;
                    }
                }
            }
            match_tail_limit(pr, term, TAIL_MATCH_TOL).unwrap_or(Label::Undetermined)
        }
    }
}

/// Label of the end reached by the integration, recomputed from the samples.
pub fn asymptotic_label(t: &Trajectory, pr: &ProblemParams) -> Label {
    terminal_label(t, pr)
}

/// Label at the end reached by the integration, as stored on the trajectory.
pub fn stored_terminal_label(t: &Trajectory) -> Option<Label> {
    match t.direction {
        Direction::Forward => t.label_end,
        Direction::Backward => t.label_start,
    }
}

/// Least-squares slope of `ln |w|` against `ln r`.
pub fn fit_log_slope(samples: &[ProfileSample]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .filter(|s| s.r > 0.0 && s.w != 0.0 && s.r.is_finite() && s.w.is_finite())
        .map(|s| (s.r.ln(), s.w.abs().ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

/// Profile samples of the trajectory with `τ` in `[a, b]`.
pub fn profile_window(t: &Trajectory, a: f64, b: f64) -> Vec<ProfileSample> {
    t.states
        .iter()
        .filter(|s| s.tau >= a && s.tau <= b)
        .map(|s| to_profile(s, &t.params))
        .collect()
}

// ---------------------------------------------------------------------------------------
// Limit cycles
// ---------------------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stability {
    Attracting,
    Repelling,
    Undetermined,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CycleConfig {
    pub min_crossings: usize,
    pub gap_tol: f64,
    /// Number of final gaps required to be non-increasing (above `gap_tol`).
    pub window: usize,
    pub orbit_samples: usize,
}

impl Default for CycleConfig {
    fn default() -> Self {
        Self { min_crossings: 10, gap_tol: 1e-8, window: 4, orbit_samples: 256 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CycleInfo {
    pub section: Section,
    /// Point the cycle winds around.
    pub center: PointId,
    /// Section coordinate (`Y`) of the last return.
    pub fixed_point: f64,
    pub period_tau: f64,
    pub orbit: Vec<PhaseState>,
    pub stability: Stability,
    /// Mean divergence of `S` over one period.
    pub floquet_mean: f64,
    pub crossings: usize,
    pub final_gap: f64,
    /// Return distances in the order of convergence, last at the end.
    pub gaps: Vec<f64>,
}

impl CycleInfo {
    /// Whether the sampled orbit stays in `{y > 0}`.
    pub fn is_positive(&self) -> bool {
        self.orbit.iter().all(|s| s.y > 0.0)
    }

    pub fn orbit_points(&self) -> Vec<[f64; 2]> {
        self.orbit.iter().map(|s| s.coords()).collect()
    }
}

fn choose_section(t: &Trajectory, pr: &ProblemParams) -> (Section, PointId) {
    let win = tail_window(t);
    if count_sign_changes(t, win) == 0 {
        if let Some(m) = m_ell(pr) {
            let tail_sign = t
                .states
                .iter()
                .filter(|s| s.tau >= win.0 && s.tau <= win.1)
                .map(|s| s.y.signum())
                .next()
                .unwrap_or(1.0);
            return if tail_sign > 0.0 {
                (Section::VerticalRayBelow { y0: m[0], y_cap: m[1] }, PointId::MEll)
            } else {
                (Section::VerticalRayAbove { y0: -m[0], y_floor: -m[1] }, PointId::MinusMEll)
            };
        }
    }
    (Section::PositiveYAxis, PointId::Origin)
}

/// Crossings `(τ, coordinate)` of the section, in increasing `τ`.
pub fn section_crossings(t: &Trajectory, section: &Section) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let st = &t.states;
    for i in 1..st.len() {
        let (a, b) = (&st[i - 1], &st[i]);
        if !(a.is_finite() && b.is_finite()) || b.tau <= a.tau {
            continue;
        }
        let va = section.value(a.y, a.big_y);
        let vb = section.value(b.y, b.big_y);
        if !(va * vb < 0.0 || (vb == 0.0 && va != 0.0)) {
            continue;
        }
        let g = |tau: f64| {
            let x = t.interpolate(tau).unwrap_or([f64::NAN; 2]);
            section.value(x[0], x[1])
        };
        let tau = bisect(g, a.tau, b.tau, va, 1e-15 * a.tau.abs().max(1.0));
        let Some(x) = t.interpolate(tau) else { continue };
        if section.admissible(x[0], x[1]) {
            out.push((tau, section.coordinate(x[0], x[1])));
        }
    }
    out
}

fn divergence_at(t: &Trajectory, tau: f64) -> Option<f64> {
    let i = t.states.partition_point(|s| s.tau < tau);
    if i == 0 || i >= t.states.len() {
        return None;
    }
    let (a, b) = (&t.states[i - 1], &t.states[i]);
    let (da, db) = (t.divergence.get(i - 1)?, t.divergence.get(i)?);
    if !(da.is_finite() && db.is_finite()) {
        return None;
    }
    let h = b.tau - a.tau;
    let w = if h > 0.0 { (tau - a.tau) / h } else { 0.0 };
    Some(da + w * (db - da))
}

/// `∫_a^b f` for `f` with an integrable singularity at `a`, through `τ = a + (b-a)u^k`.
fn singular_left<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, k: f64) -> f64 {
    let h = b - a;
    let g = |u: f64| {
        if u <= 0.0 {
            0.0
        } else {
            f(a + h * u.powf(k)) * h * k * u.powf(k - 1.0)
        }
    };
    adaptive_simpson(&g, 0.0, 1.0, 1e-12)
}

/// `∫_a^b div(Y(τ)) dτ` by quadrature split at the zeros of `Y`.
pub fn divergence_integral(t: &Trajectory, pr: &ProblemParams, a: f64, b: f64) -> f64 {
    let yy = |tau: f64| t.interpolate(tau).map(|x| x[1]).unwrap_or(0.0);
    let f = |tau: f64| {
        let y = yy(tau);
        if y == 0.0 {
            0.0
        } else {
            divergence_rate(pr, y)
        }
    };
    let mut cuts = vec![a];
    let samples: Vec<&PhaseState> = t.states.iter().filter(|s| s.tau > a && s.tau < b).collect();
    let mut prev = (a, yy(a));
    for s in samples.iter().map(|s| (s.tau, s.big_y)).chain(std::iter::once((b, yy(b)))) {
        if prev.1 * s.1 < 0.0 {
            let z = bisect(yy, prev.0, s.0, prev.1, 1e-15 * prev.0.abs().max(1.0));
            cuts.push(z);
        }
        prev = s;
    }
    cuts.push(b);
    let k = ((pr.p - 1.0) / (pr.p - 2.0)).ceil().clamp(2.0, 8.0) + 1.0;
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let (u, v) = (w[0], w[1]);
        if v <= u {
            continue;
        }
        let m = 0.5 * (u + v);
        total += singular_left(&f, u, m, k);
        let mirrored = |s: f64| f(u + v - s);
        total += singular_left(&mirrored, u, m, k);
    }
    total
}

/// Detects convergence to a limit cycle through a return map on the tail.
pub fn detect_limit_cycle(t: &Trajectory, pr: &ProblemParams) -> Option<CycleInfo> {
    detect_limit_cycle_with(t, pr, &CycleConfig::default())
}

pub fn detect_limit_cycle_with(t: &Trajectory, pr: &ProblemParams, cfg: &CycleConfig) -> Option<CycleInfo> {
    if t.states.len() < 3 {
        return None;
    }
    let (section, center) = choose_section(t, pr);
    let mut xs = section_crossings(t, &section);
    if t.direction == Direction::Backward {
        xs.reverse();
    }
    if xs.len() < cfg.min_crossings.max(3) {
        return None;
    }
    let gaps: Vec<f64> = xs.windows(2).map(|w| (w[1].1 - w[0].1).abs()).collect();
    let final_gap = *gaps.last()?;
    if !(final_gap <= cfg.gap_tol) {
        return None;
    }
    let w = cfg.window.min(gaps.len());
    let tail = &gaps[gaps.len() - w..];
    let decreasing = tail.windows(2).all(|g| g[1] <= g[0] || g[1] <= cfg.gap_tol);
    if !decreasing {
        return None;
    }
    let (ta, tb) = {
        let (x, y) = (xs[xs.len() - 2].0, xs[xs.len() - 1].0);
        (x.min(y), x.max(y))
    };
    let period = tb - ta;
    if !(period > 0.0) {
        return None;
    }
    let n = cfg.orbit_samples.max(8);
    let orbit: Vec<PhaseState> = (0..=n)
        .filter_map(|i| {
            let tau = ta + period * i as f64 / n as f64;
            t.interpolate(tau).map(|x| PhaseState::new(tau, x[0], x[1]))
        })
        .collect();
    let integral = match (divergence_at(t, ta), divergence_at(t, tb)) {
        (Some(da), Some(db)) => db - da,
        _ => divergence_integral(t, pr, ta, tb),
    };
    let stability = match t.direction {
        Direction::Forward => Stability::Attracting,
        Direction::Backward => Stability::Repelling,
    };
    Some(CycleInfo {
        section,
        center,
        fixed_point: xs.last()?.1,
        period_tau: period,
        orbit,
        stability,
        floquet_mean: integral / period,
        crossings: xs.len(),
        final_gap,
        gaps,
    })
}

/// Symmetric Hausdorff distance between two sampled curves.
pub fn hausdorff_distance(a: &[[f64; 2]], b: &[[f64; 2]]) -> f64 {
    fn directed(a: &[[f64; 2]], b: &[[f64; 2]]) -> f64 {
        a.iter()
            .map(|p| b.iter().map(|q| (p[0] - q[0]).hypot(p[1] - q[1])).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    }
    if a.is_empty() || b.is_empty() {
        return f64::INFINITY;
    }
    directed(a, b).max(directed(b, a))
}

// ---------------------------------------------------------------------------------------
// φ(α) and α_c
// ---------------------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhiConfig {
    pub integration: IntegrationConfig,
    /// Launch distance from `B' = (0, 1/β)`.
    pub offset: f64,
    /// Launch distance from `A' = (1/|α|, 0)` along the center direction.
    pub center_offset: f64,
    /// `ν`-span allowed for `S₀` and for `S₁`.
    pub max_nu_s0: f64,
    pub max_nu_s1: f64,
}

impl Default for PhiConfig {
    fn default() -> Self {
        Self {
            integration: IntegrationConfig {
                max_steps: 2_000_000,
                ..IntegrationConfig::default().with_tolerances(1e-12, 1e-10)
            },
            offset: 1e-7,
            center_offset: 1e-4,
            max_nu_s0: 500.0,
            max_nu_s1: 1e7,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhiValue {
    pub alpha: f64,
    pub s0: f64,
    pub s1: f64,
    pub phi: f64,
}

fn phi_params(n: u32, p: f64, alpha: f64) -> Result<ProblemParams> {
    let pr = ProblemParams::new(n, p, alpha, Eps::Minus)?;
    let g = pr.gamma();
    if !(alpha > -g && alpha < 0.0) {
        return Err(Error::InvalidParams(format!(
            "phi(alpha) needs -gamma < alpha < 0 (gamma = {g}), got {alpha}"
        )));
    }
    Ok(pr)
}

/// `S₀`, `S₁` and `φ = S₀ - S₁` in the chart `R_β` for `ε = -1`.
pub fn phi_components(n: u32, p: f64, alpha: f64, cfg: &PhiConfig) -> Result<PhiValue> {
    let pr = phi_params(n, p, alpha)?;
    let b = pr.beta();
    let g = pr.gamma();
    let eta = pr.eta();
    let line = ChartCrossing { coord: 0, value: 1.0 / g };
    let mut never = |_: &crate::integrate::ChartPoint| false;

    let lu = (p - 2.0) / (p - 1.0);
    let v = [1.0, (alpha - pr.nf()) / (b * (lu + 1.0))];
    let nv = v[0].hypot(v[1]);
    let start0 = [cfg.offset * v[0] / nv, 1.0 / b + cfg.offset * v[1] / nv];
    let run0 = integrate_chart(
        &pr,
        Chart::RBeta,
        start0,
        0.0,
        Direction::Forward,
        &cfg.integration,
        cfg.max_nu_s0,
        Some(line),
        &mut never,
    )?;
    let s0 = run0
        .crossing
        .ok_or_else(|| Error::NoCrossing(format!("T_eps' did not reach g = 1/gamma ({:?})", run0.stop)))?
        .coords[1];

    let t = [-(p - 1.0) * (eta - alpha), alpha * alpha];
    let nt = t[0].hypot(t[1]);
    let start1 = [
        -1.0 / alpha + cfg.center_offset * t[0] / nt,
        cfg.center_offset * t[1] / nt / b,
    ];
    let run1 = integrate_chart(
        &pr,
        Chart::RBeta,
        start1,
        0.0,
        Direction::Backward,
        &cfg.integration,
        cfg.max_nu_s1,
        Some(line),
        &mut never,
    )?;
    let s1 = run1
        .crossing
        .ok_or_else(|| Error::NoCrossing(format!("T_alpha' did not reach g = 1/gamma ({:?})", run1.stop)))?
        .coords[1];
    Ok(PhiValue { alpha, s0, s1, phi: s0 - s1 })
}

pub fn phi_of_alpha(n: u32, p: f64, alpha: f64, cfg: &PhiConfig) -> Result<f64> {
    phi_components(n, p, alpha, cfg).map(|v| v.phi)
}

/// The open interval known to contain `α_c`: `(max(α*, α_p), min(α₂, -p'))`.
pub fn alpha_c_bounds(n: u32, p: f64) -> (f64, f64) {
    let nf = n as f64;
    let lo = params::alpha_star(nf, p).max(params::alpha_p(p));
    let pp = -params::p_prime(p);
    let hi = params::alpha_2(nf, p).map_or(pp, |a2| a2.min(pp));
    (lo, hi)
}

/// Bisection bracket: the bounds above retreated by `1e-4` of their width. For `N = 1` the
/// lower end is `α*`, since `α_c = α_p` sits on the lower bound itself.
pub fn bisection_bracket(n: u32, p: f64) -> (f64, f64) {
    let (mut lo, hi) = alpha_c_bounds(n, p);
    if n == 1 {
        lo = params::alpha_star(1.0, p);
    }
    let w = hi - lo;
    (lo + 1e-4 * w, hi - 1e-4 * w)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaCMode {
    /// Closed form for `N = 1`, bisection otherwise.
    Auto,
    Bisection,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaC {
    #[serde(rename = "N")]
    pub n: u32,
    pub p: f64,
    pub alpha_c: f64,
    pub method: &'static str,
    /// Final bracket `[lo, hi]` with `φ(lo) > 0 > φ(hi)`.
    pub bracket: [f64; 2],
    pub phi_bracket: Option<[f64; 2]>,
    pub bounds: [f64; 2],
    pub evaluations: usize,
}

/// `α_c` for `ε = -1`, to bracket width `tol` in bisection mode.
pub fn find_alpha_c(n: u32, p: f64, tol: f64, mode: AlphaCMode, cfg: &PhiConfig) -> Result<AlphaC> {
    params::check_base(n, p)?;
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidParams("tol must be positive".into()));
    }
    let (blo, bhi) = alpha_c_bounds(n, p);
    if n == 1 && mode == AlphaCMode::Auto {
        let ap = params::alpha_p(p);
        return Ok(AlphaC {
            n,
            p,
            alpha_c: ap,
            method: "closed_form",
            bracket: [ap, ap],
            phi_bracket: None,
            bounds: [blo, bhi],
            evaluations: 0,
        });
    }
    let (mut lo, mut hi) = bisection_bracket(n, p);
    let mut f_lo = phi_of_alpha(n, p, lo, cfg)?;
    let mut f_hi = phi_of_alpha(n, p, hi, cfg)?;
    let mut evaluations = 2;
    if !(f_lo > 0.0 && f_hi < 0.0) {
        return Err(Error::Bracket { lo, hi, phi_lo: f_lo, phi_hi: f_hi });
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let f = phi_of_alpha(n, p, mid, cfg)?;
        evaluations += 1;
        if f == 0.0 {
            lo = mid;
            hi = mid;
            f_lo = 0.0;
            f_hi = 0.0;
            break;
        }
        if f > 0.0 {
            lo = mid;
            f_lo = f;
        } else {
            hi = mid;
            f_hi = f;
        }
    }
    Ok(AlphaC {
        n,
        p,
        alpha_c: 0.5 * (lo + hi),
        method: "bisection",
        bracket: [lo, hi],
        phi_bracket: Some([f_lo, f_hi]),
        bounds: [blo, bhi],
        evaluations,
    })
}

// ---------------------------------------------------------------------------------------
// Regimes
// ---------------------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegimeTag {
    Pin,
    Osc,
    Mel,
    Int,
    Pom,
    Clin,
    Sou,
    Orb,
    Ent,
    /// `φ` could not be evaluated on the orb/ent split.
    Undetermined,
}

impl RegimeTag {
    pub fn name(self) -> &'static str {
        match self {
            RegimeTag::Pin => "pin",
            RegimeTag::Osc => "osc",
            RegimeTag::Mel => "mel",
            RegimeTag::Int => "int",
            RegimeTag::Pom => "pom",
            RegimeTag::Clin => "clin",
            RegimeTag::Sou => "sou",
            RegimeTag::Orb => "orb",
            RegimeTag::Ent => "ent",
            RegimeTag::Undetermined => "undetermined",
        }
    }
}

/// `|φ|` below which `α` is taken as `α_c`.
pub const PHI_ZERO: f64 = 1e-10;

/// The case split in `(ε, α)`; the orb/ent/clin split uses `φ` unless `α` lies outside the
/// bounds of `α_c`. Returns the tag and the `φ` value when one was computed.
pub fn regime_tag(pr: &ProblemParams, cfg: &PhiConfig) -> (RegimeTag, Option<f64>) {
    let a = pr.alpha;
    let g = pr.gamma();
    if pr.e() > 0.0 {
        return (if a >= -g { RegimeTag::Pin } else { RegimeTag::Mel }, None);
    }
    if a <= -g {
        return (RegimeTag::Osc, None);
    }
    if a > 0.0 {
        return (RegimeTag::Int, None);
    }
    let pp = pr.p_prime();
    if a >= -pp {
        return (RegimeTag::Pom, None);
    }
    let a_star = params::alpha_star(pr.nf(), pr.p);
    if a <= a_star {
        return (RegimeTag::Sou, None);
    }
    if pr.n == 1 {
        let ap = params::alpha_p(pr.p);
        let tag = if a < ap {
            RegimeTag::Orb
        } else if a == ap {
            RegimeTag::Clin
        } else {
            RegimeTag::Ent
        };
        return (tag, phi_of_alpha(pr.n, pr.p, a, cfg).ok());
    }
    let (lo, hi) = alpha_c_bounds(pr.n, pr.p);
    if a <= lo {
        return (RegimeTag::Orb, None);
    }
    if a >= hi {
        return (RegimeTag::Ent, None);
    }
    match phi_of_alpha(pr.n, pr.p, a, cfg) {
        Ok(f) if f.abs() <= PHI_ZERO => (RegimeTag::Clin, Some(f)),
        Ok(f) if f > 0.0 => (RegimeTag::Orb, Some(f)),
        Ok(f) => (RegimeTag::Ent, Some(f)),
        Err(_) => (RegimeTag::Undetermined, None),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    Untested,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub clause: String,
    pub source_theorem: &'static str,
    pub status: CheckStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryDigest {
    pub kind: String,
    pub error: Option<String>,
    pub label_start: Option<Label>,
    pub label_end: Option<Label>,
    pub termination: Option<Termination>,
    pub zero_count: Option<usize>,
    pub tau_range: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CycleReport {
    /// Trajectory the cycle was detected on.
    pub source: String,
    pub cycle: CycleInfo,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimeReport {
    pub schema_version: u32,
    pub params: ProblemParams,
    pub constants: DerivedConstants,
    pub stationary_points: Vec<StationaryPointInfo>,
    pub theorem_tag: RegimeTag,
    pub trajectories: Vec<TrajectoryDigest>,
    pub cycles: Vec<CycleReport>,
    /// Hausdorff distance between the cycles reached by `T_r` and `T_ε`, when both exist.
    pub cycle_distance_r_eps: Option<f64>,
    pub phi_value: Option<f64>,
    pub alpha_c_bracket: Option<[f64; 2]>,
    pub checks: Vec<Check>,
}

impl RegimeReport {
    pub fn check(&self, clause: &str) -> Option<CheckStatus> {
        self.checks.iter().find(|c| c.clause == clause).map(|c| c.status)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifyConfig {
    pub shoot: ShootConfig,
    pub phi: PhiConfig,
    pub cycle: CycleConfig,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        let integration = IntegrationConfig {
            track_divergence: true,
            ..IntegrationConfig::default().with_tolerances(1e-12, 1e-10)
        };
        Self {
            shoot: ShootConfig::default().with_integration(integration),
            phi: PhiConfig::default(),
            cycle: CycleConfig::default(),
        }
    }
}

impl ClassifyConfig {
    /// Sets the `τ` budget of every trajectory.
    pub fn with_budget(mut self, span: f64) -> Self {
        self.shoot.integration.max_time_span = span;
        self
    }
}

struct Run {
    name: &'static str,
    result: Result<Trajectory>,
}

impl Run {
    fn digest(&self) -> TrajectoryDigest {
        match &self.result {
            Ok(t) => TrajectoryDigest {
                kind: self.name.to_string(),
                error: None,
                label_start: t.label_start,
                label_end: t.label_end,
                termination: Some(t.termination),
                zero_count: Some(zero_count(t)),
                tau_range: Some([t.tau_range().0, t.tau_range().1]),
            },
            Err(e) => TrajectoryDigest {
                kind: self.name.to_string(),
                error: Some(e.to_string()),
                label_start: None,
                label_end: None,
                termination: None,
                zero_count: None,
                tau_range: None,
            },
        }
    }

    fn ok(&self) -> Option<&Trajectory> {
        self.result.as_ref().ok()
    }
}

fn converged(t: &Trajectory) -> bool {
    matches!(t.termination, Termination::Captured { .. } | Termination::DoubleZero { .. } | Termination::Escape)
}

fn settled(t: &Trajectory) -> bool {
    converged(t)
        || matches!(
            stored_terminal_label(t),
            Some(Label::AGamma | Label::AAlpha | Label::Cycle | Label::OscillatingSign)
        )
}

fn status(ok: bool, decided: bool) -> CheckStatus {
    match (ok, decided) {
        (true, _) => CheckStatus::Pass,
        (false, true) => CheckStatus::Fail,
        (false, false) => CheckStatus::Untested,
    }
}

fn constant_sign(t: Option<&Trajectory>) -> CheckStatus {
    match t {
        None => CheckStatus::Untested,
        Some(t) => {
            let z = zero_count(t);
            if z > 0 {
                CheckStatus::Fail
            } else {
                status(settled(t), false)
            }
        }
    }
}

fn end_label(t: Option<&Trajectory>, want: &[Label]) -> CheckStatus {
    match t {
        None => CheckStatus::Untested,
        Some(t) => {
            let l = stored_terminal_label(t);
            let hit = l.map_or(false, |l| want.contains(&l));
            status(hit, settled(t) || l.map_or(false, |l| l != Label::Undetermined))
        }
    }
}

fn oscillating(t: Option<&Trajectory>) -> CheckStatus {
    match t {
        None => CheckStatus::Untested,
        Some(t) => {
            let ok = stored_terminal_label(t) == Some(Label::OscillatingSign) || zero_count(t) >= 10;
            status(ok, converged(t))
        }
    }
}

fn zeros_at_least(t: Option<&Trajectory>, k: usize) -> CheckStatus {
    match t {
        None => CheckStatus::Untested,
        Some(t) => status(zero_count(t) >= k, converged(t)),
    }
}

fn zeros_at_most(t: Option<&Trajectory>, k: usize) -> CheckStatus {
    match t {
        None => CheckStatus::Untested,
        Some(t) => {
            if zero_count(t) > k {
                CheckStatus::Fail
            } else {
                CheckStatus::Pass
            }
        }
    }
}

fn zeros_exactly(t: Option<&Trajectory>, k: usize) -> CheckStatus {
    match t {
        None => CheckStatus::Untested,
        Some(t) => {
            let z = zero_count(t);
            if z > k {
                CheckStatus::Fail
            } else {
                status(z == k && settled(t), converged(t))
            }
        }
    }
}

/// Runs the constructions and detectors that apply to the regime and records the
/// machine-checkable clauses of its theorem.
pub fn classify_regime(pr: &ProblemParams, cfg: &ClassifyConfig) -> RegimeReport {
    let (tag, phi_value) = regime_tag(pr, &cfg.phi);
    let points = classify_stationary_points(pr);
    let src = tag.name();
    let mut checks: Vec<Check> = Vec::new();
    let mut push = |clause: &str, status: CheckStatus| {
        checks.push(Check { clause: clause.to_string(), source_theorem: src, status })
    };
    let sc = &cfg.shoot;
    let a = pr.alpha;
    let n = pr.nf();
    let g = pr.gamma();
    let pp = pr.p_prime();

    let t_r = Run { name: "T_r", result: shoot_regular(pr, 1.0, sc) };
    let mut runs = vec![];
    let t_eps = Run { name: "T_eps", result: shoot_double_zero(pr, 1.0, sc) };
    let needs_alpha = matches!(tag, RegimeTag::Sou | RegimeTag::Orb | RegimeTag::Ent | RegimeTag::Clin);
    let t_alpha = needs_alpha.then(|| Run { name: "T_alpha", result: shoot_t_alpha(pr, sc) });

    let mut cycles: Vec<CycleReport> = Vec::new();
    let cyc = |t: Option<&Trajectory>| t.and_then(|t| detect_limit_cycle_with(t, pr, &cfg.cycle));
    let c_r = cyc(t_r.ok());
    let c_eps = cyc(t_eps.ok());
    let m_type = points.get(1).map(|i| i.local_type);

    match tag {
        RegimeTag::Pin => {
            let tr = t_r.ok();
            if a < n {
                push("T_r has a strict constant sign", constant_sign(tr));
                push("T_r has at most one simple zero", zeros_at_most(tr, 1));
            } else if a == n {
                let st = tr.map_or(CheckStatus::Untested, |t| {
                    status(matches!(t.termination, Termination::DoubleZero { .. }), converged(t))
                });
                push("T_r reaches a double zero (compact support)", st);
                push("T_r has at most one simple zero", zeros_at_most(tr, 1));
            } else {
                push("T_r has at least one zero", zeros_at_least(tr, 1));
            }
            if a >= -pp {
                let q4 = [&c_r, &c_eps].iter().any(|c| c.as_ref().map_or(false, |c| c.center != PointId::Origin));
                push("no cycle in Q4 on T_r or T_eps", if q4 { CheckStatus::Fail } else { CheckStatus::Pass });
            }
        }
        RegimeTag::Mel => {
            push("T_r has a strict constant sign", constant_sign(t_r.ok()));
            push("T_r converges to M_ell (gam near infinity)", end_label(t_r.ok(), &[Label::AGamma]));
            push(
                "M_ell is a sink",
                status(matches!(m_type, Some(LocalType::SinkNode | LocalType::SinkSpiral)), true),
            );
        }
        RegimeTag::Osc => {
            push("T_r is oscillating", oscillating(t_r.ok()));
            push("T_r has limit cycle", status(c_r.is_some(), false));
            push("T_eps has limit cycle", status(c_eps.is_some(), false));
            if a < -g {
                let st = t_r.ok().map_or(CheckStatus::Untested, |t| {
                    let (lo, hi) = tail_window(t);
                    let r_max = t
                        .states
                        .iter()
                        .filter(|s| s.tau >= lo && s.tau <= hi)
                        .map(|s| bound_functional(pr, s.y, s.big_y))
                        .fold(0.0, f64::max);
                    status(r_max <= 1.1 / (a.abs() * g), true)
                });
                push("R bound holds on the T_r tail", st);
            }
        }
        RegimeTag::Int => {
            push("T_r has a strict constant sign", constant_sign(t_r.ok()));
            push("T_r satisfies (gam) near infinity", end_label(t_r.ok(), &[Label::AGamma]));
            push("T_eps has no zero besides its hole", zeros_at_most(t_eps.ok(), 0));
            push("T_eps satisfies (gam) near infinity", end_label(t_eps.ok(), &[Label::AGamma]));
        }
        RegimeTag::Pom => {
            push("T_r has exactly one zero", zeros_exactly(t_r.ok(), 1));
            if a == -pp {
                push("T_r satisfies (val) near infinity", end_label(t_r.ok(), &[Label::AAlpha]));
            } else {
                push("|T_r| satisfies (gam) near infinity", end_label(t_r.ok(), &[Label::AGamma]));
            }
            if a < 0.0_f64.min(pr.eta()) {
                push("T_r has at most two simple zeros", zeros_at_most(t_r.ok(), 2));
            }
            push("T_eps has no zero besides its hole", zeros_at_most(t_eps.ok(), 0));
            push("T_eps satisfies (gam) near infinity", end_label(t_eps.ok(), &[Label::AGamma]));
        }
        RegimeTag::Sou => {
            let want = if a == params::alpha_star(n, pr.p) {
                matches!(m_type, Some(LocalType::WeakSource))
            } else {
                matches!(m_type, Some(LocalType::SourceNode | LocalType::SourceSpiral))
            };
            push("M_ell is a source", status(want, true));
            let ta = t_alpha.as_ref().and_then(Run::ok);
            push("T_alpha converges to M_ell backward", end_label(ta, &[Label::AGamma]));
            push("T_r is oscillating", oscillating(t_r.ok()));
        }
        RegimeTag::Orb | RegimeTag::Clin | RegimeTag::Ent => {
            push(
                "M_ell is a sink",
                status(matches!(m_type, Some(LocalType::SinkNode | LocalType::SinkSpiral)), true),
            );
            match tag {
                RegimeTag::Orb => {
                    push("T_r is oscillating", oscillating(t_r.ok()));
                    let hopf = positive_cycle_run(pr, sc);
                    let c = hopf.ok().and_then(|t| detect_limit_cycle_with(t, pr, &cfg.cycle));
                    let positive = c.as_ref().map_or(false, |c| c.is_positive() && c.center == PointId::MEll);
                    push("a positive cycle surrounds M_ell", status(positive, false));
                    if let Some(c) = c {
                        cycles.push(CycleReport { source: hopf.name.to_string(), cycle: c });
                    }
                    runs.push(hopf);
                    let ta = t_alpha.as_ref().and_then(Run::ok);
                    let st = ta.map_or(CheckStatus::Untested, |t| {
                        let z = zero_count(t);
                        let l = stored_terminal_label(t);
                        status(z == 0 && l == Some(Label::Cycle), z > 0 || converged(t))
                    });
                    push("T_alpha is positive and asymptotically periodic backward", st);
                    if let Some(f) = phi_value {
                        push("phi(alpha) > 0", status(f > 0.0, true));
                    }
                }
                RegimeTag::Clin => {
                    if let Some(f) = phi_value {
                        push("phi(alpha) = 0", status(f.abs() <= 1e-5, true));
                    }
                    let ta = t_alpha.as_ref().and_then(Run::ok);
                    let st = ta.map_or(CheckStatus::Untested, |t| {
                        status(matches!(t.termination, Termination::DoubleZero { .. }), converged(t))
                    });
                    push("T_alpha reaches a double zero backward (homoclinic)", st);
                }
                _ => {
                    push("T_r has at least two zeros", zeros_at_least(t_r.ok(), 2));
                    push("T_eps has no zero besides its hole", zeros_at_most(t_eps.ok(), 0));
                    if let Some(f) = phi_value {
                        push("phi(alpha) < 0", status(f < 0.0, true));
                    }
                }
            }
        }
        RegimeTag::Undetermined => {}
    }

    if let Some(c) = c_r.clone() {
        cycles.push(CycleReport { source: "T_r".into(), cycle: c });
    }
    if let Some(c) = c_eps.clone() {
        cycles.push(CycleReport { source: "T_eps".into(), cycle: c });
    }
    let cycle_distance_r_eps = match (&c_r, &c_eps) {
        (Some(a), Some(b)) => Some(hausdorff_distance(&a.orbit_points(), &b.orbit_points())),
        _ => None,
    };
    let mut trajectories = vec![t_r.digest(), t_eps.digest()];
    if let Some(ta) = &t_alpha {
        trajectories.push(ta.digest());
    }
    trajectories.extend(runs.iter().map(Run::digest));
    let alpha_c_bracket = (pr.e() < 0.0 && a > -g && a < -pp).then(|| {
        if pr.n == 1 {
            let ap = params::alpha_p(pr.p);
            [ap, ap]
        } else {
            let (lo, hi) = alpha_c_bounds(pr.n, pr.p);
            [lo, hi]
        }
    });
    RegimeReport {
        schema_version: 1,
        params: *pr,
        constants: derive_constants(pr),
        stationary_points: points,
        theorem_tag: tag,
        trajectories,
        cycles,
        cycle_distance_r_eps,
        phi_value,
        alpha_c_bracket,
        checks,
    }
}

/// Backward orbit from a point next to `M_ℓ`; it reaches the positive cycle around a sink
/// `M_ℓ` when one exists.
fn positive_cycle_run(pr: &ProblemParams, sc: &ShootConfig) -> Run {
    let result = match m_ell(pr) {
        Some(m) => integrate_s(
            pr,
            PhaseState::new(0.0, m[0] * (1.0 + 1e-3), m[1]),
            Direction::Backward,
            &sc.integration,
            &[],
            None,
        ),
        None => Err(Error::NotApplicable("M_ell does not exist".into())),
    };
    Run { name: "M_ell_backward", result }
}

/// Number of `y`-zero events recorded by the integrator.
pub fn recorded_zero_events(t: &Trajectory) -> usize {
    t.events_of(EventKind::YZeroCrossing).count()
}
