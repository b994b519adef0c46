use plap_core::analysis::{fit_log_slope, profile_window, Label};
use plap_core::integrate::{integrate_s, Direction, IntegrationConfig, Termination, Trajectory};
use plap_core::systems::oracles::{Oracle, OracleKind};
use plap_core::systems::{flux, j_n, to_profile};
use plap_core::trajectories::{
    shoot, shoot_double_zero, shoot_regular, shoot_t_alpha, shoot_t_eta_or_u, shoot_t_pm, t_pm_check_radius,
    ShootConfig, SpecialTrajectorySpec, TrajectoryKind,
};
use plap_core::{Eps, Error, PhaseState, ProblemParams, ProfileSample};

fn params(n: u32, p: f64, alpha: f64, eps: i32) -> ProblemParams {
    ProblemParams::new(n, p, alpha, Eps::from_int(eps).unwrap()).unwrap()
}

fn tight() -> ShootConfig {
    ShootConfig::default().with_integration(IntegrationConfig::default().with_tolerances(1e-13, 1e-12))
}

fn profile_at(t: &Trajectory, r: f64) -> Option<ProfileSample> {
    let x = t.interpolate(r.ln())?;
    Some(to_profile(&PhaseState::new(r.ln(), x[0], x[1]), &t.params))
}

/// Distance from a point to the continuous curve `t`, refined by golden-section search on
/// the interpolant around the nearest sample.
fn distance_to_curve(t: &Trajectory, q: [f64; 2]) -> f64 {
    let d = |tau: f64| {
        let x = t.interpolate(tau).unwrap();
        (x[0] - q[0]).hypot(x[1] - q[1])
    };
    let i = (0..t.states.len())
        .min_by(|&a, &b| {
            let da = (t.states[a].y - q[0]).hypot(t.states[a].big_y - q[1]);
            let db = (t.states[b].y - q[0]).hypot(t.states[b].big_y - q[1]);
            da.partial_cmp(&db).unwrap()
        })
        .unwrap();
    let mut lo = t.states[i.saturating_sub(1)].tau;
    let mut hi = t.states[(i + 1).min(t.states.len() - 1)].tau;
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..80 {
        let a = hi - g * (hi - lo);
        let b = lo + g * (hi - lo);
        if d(a) < d(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    d(0.5 * (lo + hi))
}

/// Symmetric Hausdorff distance between two continuous arcs, restricted to the parts of
/// each that lie in the given magnitude window (to skip the launch transient).
fn arc_distance(a: &Trajectory, b: &Trajectory, keep: impl Fn(&PhaseState) -> bool) -> f64 {
    let one = |x: &Trajectory, y: &Trajectory| {
        let kept: Vec<&PhaseState> = x.states.iter().filter(|s| keep(s)).collect();
        let step = (kept.len() / 200).max(1);
        kept.iter()
            .step_by(step)
            .map(|s| distance_to_curve(y, [s.y, s.big_y]))
            .fold(0.0, f64::max)
    };
    one(a, b).max(one(b, a))
}

#[test]
fn regular_trajectory_reproduces_barenblatt() {
    let pr = params(2, 3.0, 2.0, 1);
    let t = shoot_regular(&pr, 1.0, &tight()).unwrap();
    let o = Oracle::new(OracleKind::Barenblatt, &pr, 1.0).unwrap();
    let edge = o.edge().unwrap();
    let mut worst = 0.0f64;
    for k in 0..=400 {
        let r = 0.01 * (0.9 * edge / 0.01f64).powf(k as f64 / 400.0);
        let w = profile_at(&t, r).unwrap().w;
        let want = o.sample(r).w;
        worst = worst.max((w - want).abs() / want);
    }
    assert!(worst <= 1e-6, "sup relative error {worst}");
    assert_eq!(t.label_start, Some(Label::AR));
}

#[test]
fn regular_trajectory_reproduces_the_quadratic_profile() {
    for &n in &[1u32, 2, 4] {
        let p = 3.0;
        let pr = params(n, p, -p / (p - 1.0), 1);
        let o = Oracle::new(OracleKind::Quadratic, &pr, 1.0).unwrap();
        let a = o.sample(0.0).w;
        let t = shoot_regular(&pr, a, &tight()).unwrap();
        for &r in &[0.05, 0.3, 1.0, 2.0, 4.0] {
            let w = profile_at(&t, r).unwrap().w;
            let want = o.sample(r).w;
            assert!((w - want).abs() <= 1e-6 * want.abs(), "N={n} r={r}: {w} vs {want}");
        }
    }
}

#[test]
fn regular_trajectory_limits_at_the_origin() {
    for &(n, p, al, e) in &[(2u32, 3.0, 1.0, 1), (1, 3.0, -4.0, -1), (3, 2.5, 0.7, -1), (2, 4.0, -6.0, 1)] {
        let pr = params(n, p, al, e);
        let a = 1.7;
        let t = shoot_regular(&pr, a, &tight()).unwrap();
        let s = to_profile(t.first(), &pr);
        assert!((s.w - a).abs() <= 1e-6 * a, "w(0+) = {}", s.w);
        let ratio = flux(&pr, s.dw) / (s.r * s.w);
        assert!((ratio + pr.e() * al / pr.nf()).abs() <= 1e-6, "ratio {ratio}");
        // J_N / r^N -> a (1 - α/N).
        let jn = j_n(&s, &pr) / s.r.powf(pr.nf());
        assert!((jn - a * (1.0 - al / pr.nf())).abs() <= 1e-6 * a, "J_N/r^N = {jn}");
    }
}

#[test]
fn regular_trajectory_keeps_its_sign_below_alpha_equal_n() {
    let pr = params(2, 3.0, 1.0, 1);
    let t = shoot_regular(&pr, 1.0, &tight()).unwrap();
    let t0 = t.first().tau;
    assert!(t.last().tau >= t0 + 30.0 || matches!(t.termination, Termination::Captured { .. }));
    assert!(t.states.iter().filter(|s| s.tau <= t0 + 30.0).all(|s| s.y > 0.0));
}

#[test]
fn regular_solutions_obey_the_scaling_law() {
    let pr = params(2, 3.0, 1.0, 1);
    let g = pr.gamma();
    let cfg = ShootConfig::default().with_integration(IntegrationConfig {
        cone_sigma: 1e-6,
        ..IntegrationConfig::default().with_tolerances(1e-13, 1e-12)
    });
    let base = shoot_regular(&pr, 1.0, &cfg).unwrap();
    for &a in &[0.5, 2.0] {
        let t = shoot_regular(&pr, a, &cfg).unwrap();
        for &r in &[0.05, 0.2, 1.0, 3.0, 10.0] {
            let w = profile_at(&t, r).unwrap().w;
            let want = a * profile_at(&base, a.powf(-1.0 / g) * r).unwrap().w;
            assert!((w - want).abs() <= 1e-8 * want.abs(), "a={a} r={r}: {w} vs {want}");
        }
    }
}

#[test]
fn negative_amplitude_is_the_mirror_image() {
    let pr = params(2, 3.0, 1.0, 1);
    let t = shoot_regular(&pr, -1.0, &tight()).unwrap();
    assert!((to_profile(t.first(), &pr).w + 1.0).abs() < 1e-6);
}

/// Fitted contact exponent and amplitude of `w ≈ A r̄ |r̄ - r|^{(p-1)/(p-2)}` on the last decade.
fn contact_law(t: &Trajectory, pr: &ProblemParams, r_bar: f64) -> (f64, f64) {
    let samples: Vec<ProfileSample> = (0..=40)
        .map(|k| {
            let d = r_bar * 1e-3 * 10f64.powf(k as f64 / 40.0);
            let r = if pr.e() > 0.0 { r_bar - d } else { r_bar + d };
            let s = profile_at(t, r).unwrap();
            ProfileSample { r: d, w: s.w, dw: 0.0 }
        })
        .collect();
    let slope = fit_log_slope(&samples).unwrap();
    let d = r_bar * 1e-4;
    let r = if pr.e() > 0.0 { r_bar - d } else { r_bar + d };
    let w = profile_at(t, r).unwrap().w;
    let ex = (pr.p - 1.0) / (pr.p - 2.0);
    (slope, w.abs() / (r_bar.powf(1.0 / (pr.p - 2.0)) * d.powf(ex)))
}

#[test]
fn double_zero_contact_law() {
    for &(n, al, e, r_bar) in &[(2u32, 1.0, 1, 1.0), (1, -4.0, -1, 2.0), (3, 0.5, -1, 0.5)] {
        let pr = params(n, 3.0, al, e);
        let t = shoot_double_zero(&pr, r_bar, &tight()).unwrap();
        let (slope, amp) = contact_law(&t, &pr, r_bar);
        assert!((slope - 2.0).abs() <= 0.02, "exponent {slope}");
        assert!((amp - 0.25).abs() <= 0.01, "amplitude {amp}");
    }
    // p = 4: exponent 3/2, amplitude (2/3)^{3/2}.
    let pr = params(2, 4.0, 1.0, 1);
    let t = shoot_double_zero(&pr, 1.0, &tight()).unwrap();
    let (slope, amp) = contact_law(&t, &pr, 1.0);
    assert!((slope - 1.5).abs() <= 0.015, "exponent {slope}");
    assert!((amp - (2.0f64 / 3.0).powf(1.5)).abs() <= 0.01, "amplitude {amp}");
}

#[test]
fn double_zero_matches_the_barenblatt_edge() {
    let pr = params(2, 3.0, 2.0, 1);
    let o = Oracle::new(OracleKind::Barenblatt, &pr, 1.0).unwrap();
    let edge = o.edge().unwrap();
    let t = shoot_double_zero(&pr, edge, &tight()).unwrap();
    for &f in &[0.2, 0.5, 0.8, 0.95, 0.99] {
        let r = f * edge;
        let w = profile_at(&t, r).unwrap().w;
        let want = o.sample(r).w;
        assert!((w - want).abs() <= 1e-6 * want, "r={r}: {w} vs {want}");
    }
}

/// Log-slope of `w` near the end where `T_alpha` reaches `A_alpha`. When that end attracts
/// nearby orbits the launch point is continued in `S` towards it; otherwise the arc next to
/// the launch point is used.
fn t_alpha_end_slope(t: &Trajectory, pr: &ProblemParams) -> f64 {
    let (a, b) = t.tau_range();
    let backward = t.direction == Direction::Backward;
    if pr.e() * (pr.alpha + pr.gamma()) > 0.0 {
        let (start, dir) = if backward { (*t.last(), Direction::Forward) } else { (*t.first(), Direction::Backward) };
        let cfg = IntegrationConfig { capture: false, ..IntegrationConfig::default().with_tolerances(1e-13, 1e-12).with_span(20.0) };
        let ext = integrate_s(pr, start, dir, &cfg, &[], None).unwrap();
        let (c, d) = ext.tau_range();
        let w = if backward { (c, c + 2.3) } else { (d - 2.3, d) };
        fit_log_slope(&profile_window(&ext, w.0, w.1)).unwrap()
    } else {
        let w = if backward { (b - 0.5, b) } else { (a, a + 0.5) };
        fit_log_slope(&profile_window(t, w.0, w.1)).unwrap()
    }
}

#[test]
fn t_alpha_has_the_power_decay() {
    for &(n, p, al, e) in &[(2u32, 3.0, 1.0, 1), (1, 3.0, -4.0, -1), (3, 3.0, -1.2, -1), (2, 4.0, 0.5, -1), (2, 3.0, -6.0, 1)] {
        let pr = params(n, p, al, e);
        let t = shoot_t_alpha(&pr, &tight()).unwrap();
        assert_eq!(if pr.beta() > 0.0 { t.label_end } else { t.label_start }, Some(Label::AAlpha));
        let slope = t_alpha_end_slope(&t, &pr);
        assert!((slope + al).abs() <= 0.01 * al.abs(), "{pr:?}: slope {slope}");
    }
}

#[test]
fn t_u_grows_like_r_to_abs_eta() {
    let pr = params(2, 3.0, 1.0, 1);
    let t = shoot(&SpecialTrajectorySpec::new(TrajectoryKind::TU), &pr, &tight()).unwrap();
    let a = t.first().tau;
    let slope = fit_log_slope(&profile_window(&t, a, a + 2.3)).unwrap();
    assert!((slope - 0.5).abs() <= 0.005, "slope {slope}");
}

#[test]
fn t_eta_has_the_singular_power() {
    let pr = params(4, 3.0, 1.0, 1);
    let t = shoot(&SpecialTrajectorySpec::new(TrajectoryKind::TEta), &pr, &tight()).unwrap();
    let a = t.first().tau;
    let slope = fit_log_slope(&profile_window(&t, a, a + 2.3)).unwrap();
    assert!((slope + 0.5).abs() <= 0.005, "slope {slope}");
}

#[test]
fn t_u_is_the_p_harmonic_profile_when_alpha_is_eta() {
    let pr = params(2, 3.0, -0.5, 1);
    let t = shoot_t_eta_or_u(&pr, &tight()).unwrap();
    for s in t.states.iter().step_by(7) {
        let zeta = pr.phi(s.big_y) / s.y;
        assert!((zeta - pr.eta()).abs() <= 1e-6, "zeta {zeta}");
    }
}

#[test]
fn inapplicable_kinds_are_rejected() {
    let pr = params(4, 3.0, 1.0, 1);
    let r = shoot(&SpecialTrajectorySpec::new(TrajectoryKind::TU), &pr, &ShootConfig::default());
    assert!(matches!(r, Err(Error::NotApplicable(_))));
    let r = shoot(&SpecialTrajectorySpec::new(TrajectoryKind::TPlus), &pr, &ShootConfig::default());
    assert!(matches!(r, Err(Error::NotApplicable(_))));
    let pr = params(2, 3.0, 1.0, 1);
    let r = shoot(&SpecialTrajectorySpec::new(TrajectoryKind::TEta), &pr, &ShootConfig::default());
    assert!(matches!(r, Err(Error::NotApplicable(_))));
    let pr = params(3, 3.0, 1.0, 1);
    assert!(matches!(shoot_t_eta_or_u(&pr, &ShootConfig::default()), Err(Error::NotApplicable(_))));
    let bad = SpecialTrajectorySpec::new(TrajectoryKind::TR).with_offset(0.0);
    assert!(shoot(&bad, &pr, &ShootConfig::default()).is_err());
}

#[test]
fn t_plus_limits_for_p_above_n() {
    let pr = params(1, 3.0, 1.0, 1);
    let t = shoot_t_pm(&pr, 1.0, 1.0, &tight()).unwrap();
    let s = profile_at(&t, t_pm_check_radius(&pr)).unwrap();
    assert!((s.w - 1.0).abs() <= 1e-3, "w {}", s.w);
    assert!((-s.dw - 1.0).abs() <= 1e-3, "-w' {}", -s.dw);
    assert_eq!(t.label_start, Some(Label::LPlus));
}

#[test]
fn t_minus_limits_for_p_above_n() {
    let pr = params(2, 3.0, 1.0, 1);
    let spec = SpecialTrajectorySpec::new(TrajectoryKind::TMinus).with_extra(&[1.0, -1.0]);
    let t = shoot(&spec, &pr, &tight()).unwrap();
    let r = t_pm_check_radius(&pr);
    let s = profile_at(&t, r).unwrap();
    assert!(s.dw > 0.0);
    assert!((s.w - 1.0).abs() <= 1e-3, "w {}", s.w);
    let c = -r.powf(1.0 / 2.0) * s.dw;
    assert!((c + 1.0).abs() <= 1e-3, "c {c}");
    assert_eq!(t.label_start, Some(Label::LMinus));
}

#[test]
fn t_plus_limits_for_p_equal_n() {
    let pr = params(3, 3.0, 1.0, 1);
    for &k in &[0.5, 2.0] {
        let spec = SpecialTrajectorySpec::new(TrajectoryKind::TPlus).with_extra(&[k]);
        let t = shoot(&spec, &pr, &tight()).unwrap();
        let r = t_pm_check_radius(&pr);
        let s = profile_at(&t, r).unwrap();
        // Corrections are O(1/|ln r|), so the limits are compared through the slope.
        assert!((r * s.dw + k).abs() <= 1e-3 * k, "r w' = {}", r * s.dw);
        let w_ratio = s.w / r.ln().abs();
        assert!((w_ratio - k).abs() <= 0.1 * k, "w/|ln r| = {w_ratio}");
    }
}

#[test]
fn uniqueness_kinds_are_reproducible_under_offset_halving() {
    let cases: Vec<(TrajectoryKind, ProblemParams, f64)> = vec![
        (TrajectoryKind::TR, params(2, 3.0, 1.0, 1), 1.0),
        (TrajectoryKind::TEps, params(2, 3.0, 1.0, 1), 1.0),
        (TrajectoryKind::TU, params(2, 3.0, 1.0, 1), 1.0),
        (TrajectoryKind::TAlpha, params(1, 3.0, -4.0, -1), 1.0),
    ];
    for (kind, pr, _) in cases {
        let spec = SpecialTrajectorySpec::new(kind);
        let (a, b) = plap_core::trajectories::shoot_pair(&spec, &pr, &tight()).unwrap();
        let scale = pr.scale();
        let keep = |s: &PhaseState| {
            let m = plap_core::systems::magnitude(&pr, s.y, s.big_y);
            m >= 1e-2 * scale && m <= 1e2 * scale
        };
        let d = arc_distance(&a, &b, keep);
        assert!(d <= 1e-6 * scale, "{}: Hausdorff distance {d}", kind.name());
    }
}
