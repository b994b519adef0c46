//! Subcommands.

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use plap_core::analysis::{classify_regime, find_alpha_c, AlphaCMode, ClassifyConfig, PhiConfig};
use plap_core::integrate::{integrate_s, Direction, IntegrationConfig, Trajectory};
use plap_core::trajectories::{shoot, ShootConfig, SpecialTrajectorySpec, TrajectoryKind, DEFAULT_OFFSET};
use plap_core::{derive_constants, PhaseState, ProblemParams};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{recipe, KeyValues, Overrides, Settings, RECIPES};
use crate::format::to_json;
use crate::output::{events_csv, sibling, trajectory_csv, Artifacts};
use crate::portrait::{phase_scales, render_svg, Curve};
use crate::UsageError;

#[derive(Debug, Parser)]
#[command(name = "plap", version, about = "Phase-plane analysis of self-similar profiles of the p-Laplace heat equation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the derived constants as JSON.
    Constants(ParamFlags),
    /// Integrate S from a given state and write a trajectory CSV.
    Integrate(IntegrateArgs),
    /// Shoot a special trajectory and write a trajectory CSV.
    Shoot(ShootArgs),
    /// Render a phase portrait as SVG.
    Portrait(PortraitArgs),
    /// Locate the critical exponent alpha_c for eps = -1.
    AlphaC(AlphaCArgs),
    /// Classify the regime and print the report as JSON.
    Classify(ClassifyArgs),
    /// List the figure recipes.
    Recipes,
}

/// Parameter tuple; missing values come from `--recipe`, then `PLAP_CONFIG`.
#[derive(Debug, Clone, Args)]
pub struct ParamFlags {
    #[arg(long = "N")]
    pub n: Option<u32>,
    #[arg(long, allow_hyphen_values = true)]
    pub p: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub eps: Option<i32>,
    /// Figure recipe (fig01 to fig17) supplying defaults.
    #[arg(long)]
    pub recipe: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct RunFlags {
    /// Relative tolerance; the absolute tolerance is a hundredth of it.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Largest tau span of one integration.
    #[arg(long = "tau-max")]
    pub tau_max: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct IntegrateArgs {
    #[command(flatten)]
    pub params: ParamFlags,
    #[command(flatten)]
    pub run: RunFlags,
    #[arg(long, allow_hyphen_values = true)]
    pub y0: f64,
    #[arg(long = "Y0", allow_hyphen_values = true)]
    pub big_y0: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub tau0: f64,
    /// Integrate towards decreasing tau.
    #[arg(long)]
    pub backward: bool,
    /// Do not stop at stationary points.
    #[arg(long)]
    pub no_capture: bool,
    /// Trajectory CSV; events and manifest are written next to it.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ShootArgs {
    #[command(flatten)]
    pub params: ParamFlags,
    #[command(flatten)]
    pub run: RunFlags,
    /// T_r, T_eps, T_alpha, T_eta, T_u, T_plus or T_minus.
    #[arg(long)]
    pub kind: String,
    /// Amplitude for T_r and T_plus/T_minus.
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<f64>,
    /// Contact radius for T_eps.
    #[arg(long = "r-bar")]
    pub r_bar: Option<f64>,
    /// Second coefficient for T_plus/T_minus (k for p = N).
    #[arg(long, allow_hyphen_values = true)]
    pub c: Option<f64>,
    /// Launch offset along the invariant manifold.
    #[arg(long)]
    pub offset: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct PortraitArgs {
    #[command(flatten)]
    pub params: ParamFlags,
    #[command(flatten)]
    pub run: RunFlags,
    /// Seeds, one `y Y` pair per line; replaces the default grid and special trajectories.
    #[arg(long = "seed-file")]
    pub seed_file: Option<PathBuf>,
    /// Default seed grid size per axis.
    #[arg(long, default_value_t = 4)]
    pub grid: usize,
    /// Leave out the special trajectories.
    #[arg(long)]
    pub no_special: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Auto,
    Bisection,
}

#[derive(Debug, Clone, Args)]
pub struct AlphaCArgs {
    #[arg(long = "N")]
    pub n: Option<u32>,
    #[arg(long, allow_hyphen_values = true)]
    pub p: Option<f64>,
    /// Final bracket width.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, value_enum, default_value_t = ModeArg::Auto)]
    pub mode: ModeArg,
    /// Write the report here (with a manifest) instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub params: ParamFlags,
    #[command(flatten)]
    pub run: RunFlags,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Constants(a) => cmd_constants(&a),
        Command::Integrate(a) => cmd_integrate(&a),
        Command::Shoot(a) => cmd_shoot(&a),
        Command::Portrait(a) => cmd_portrait(&a),
        Command::AlphaC(a) => cmd_alpha_c(&a),
        Command::Classify(a) => cmd_classify(&a),
        Command::Recipes => cmd_recipes(),
    }
}

fn settings(p: &ParamFlags, r: Option<&RunFlags>) -> Result<Settings> {
    let flags = Overrides {
        n: p.n,
        p: p.p,
        alpha: p.alpha,
        eps: p.eps,
        tol: r.and_then(|r| r.tol),
        tau_max: r.and_then(|r| r.tau_max),
    };
    Settings::new(flags, p.recipe.as_deref())
}

/// Integration settings from `--tol` and `--tau-max`.
pub fn integration_config(s: &Settings, base: IntegrationConfig) -> Result<IntegrationConfig> {
    let mut cfg = base;
    if let Some(t) = s.tol()? {
        cfg = cfg.with_tolerances(1e-2 * t, t);
    }
    if let Some(t) = s.tau_max()? {
        cfg = cfg.with_span(t);
    }
    Ok(cfg)
}

/// Prints `value`, or writes it with a manifest when `out` is given.
fn emit_json(
    command: &str,
    value: &impl Serialize,
    out: Option<&Path>,
    params: impl Serialize,
    config: impl Serialize,
    start: Instant,
) -> Result<()> {
    let text = to_json(value)?;
    match out {
        None => print!("{text}"),
        Some(path) => {
            let mut art = Artifacts::new(command, params, config)?;
            art.add(path.to_path_buf(), text.into_bytes());
            art.write(&sibling(path, "manifest.json"), start.elapsed())?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct ConstantsReport {
    params: ProblemParams,
    #[serde(flatten)]
    constants: plap_core::DerivedConstants,
    present: Presence,
}

#[derive(Serialize)]
struct Presence {
    ell: bool,
    alpha_2: bool,
    nu_alpha: bool,
    #[serde(rename = "discriminant_Delta")]
    discriminant: bool,
}

pub fn cmd_constants(a: &ParamFlags) -> Result<()> {
    let pr = settings(a, None)?.params()?;
    let c = derive_constants(&pr);
    let report = ConstantsReport {
        params: pr,
        constants: c,
        present: Presence {
            ell: c.ell.is_some(),
            alpha_2: c.alpha_2.is_some(),
            nu_alpha: c.nu_alpha.is_some(),
            discriminant: c.discriminant.is_some(),
        },
    };
    print!("{}", to_json(&report)?);
    Ok(())
}

fn describe(pr: &ProblemParams) -> String {
    format!("N={}, p={}, alpha={}, eps={}", pr.n, pr.p, pr.alpha, pr.e())
}

fn csv_path(out: &Path) -> PathBuf {
    if out.extension().is_some() {
        out.to_path_buf()
    } else {
        out.with_extension("csv")
    }
}

fn write_trajectory(command: &str, t: &Trajectory, out: &Path, config: impl Serialize, start: Instant) -> Result<()> {
    let path = csv_path(out);
    let mut art = Artifacts::new(command, t.params, config)?;
    art.add(path.clone(), trajectory_csv(t)?);
    art.add(sibling(&path, "events.csv"), events_csv(t)?);
    art.write(&sibling(&path, "manifest.json"), start.elapsed())?;
    Ok(())
}

#[derive(Serialize)]
struct IntegrateConfigRecord {
    start: PhaseState,
    direction: Direction,
    integration: IntegrationConfig,
}

pub fn cmd_integrate(a: &IntegrateArgs) -> Result<()> {
    let start = Instant::now();
    let s = settings(&a.params, Some(&a.run))?;
    let pr = s.params()?;
    let mut integ = integration_config(&s, IntegrationConfig::default())?;
    integ.capture = !a.no_capture;
    let state = PhaseState::new(a.tau0, a.y0, a.big_y0);
    let dir = if a.backward { Direction::Backward } else { Direction::Forward };
    let t = integrate_s(&pr, state, dir, &integ, &[], None)?;
    let record = IntegrateConfigRecord { start: state, direction: dir, integration: integ };
    write_trajectory("integrate", &t, &a.out, record, start)
}

#[derive(Serialize)]
struct ShootConfigRecord {
    spec: SpecialTrajectorySpec,
    integration: IntegrationConfig,
}

/// Kind-specific reals in the order `shoot` expects.
fn shoot_extra(kind: TrajectoryKind, a: &ShootArgs) -> Vec<f64> {
    match kind {
        TrajectoryKind::TR => a.a.into_iter().collect(),
        TrajectoryKind::TEps => a.r_bar.into_iter().collect(),
        TrajectoryKind::TPlus | TrajectoryKind::TMinus => match (a.a, a.c) {
            (Some(x), Some(c)) => vec![x, c],
            (Some(x), None) => vec![x],
            (None, Some(c)) => vec![1.0, c],
            (None, None) => Vec::new(),
        },
        _ => Vec::new(),
    }
}

pub fn cmd_shoot(a: &ShootArgs) -> Result<()> {
    let start = Instant::now();
    let kind = TrajectoryKind::parse(&a.kind).ok_or_else(|| {
        UsageError(format!("unknown kind '{}' (expected T_r, T_eps, T_alpha, T_eta, T_u, T_plus or T_minus)", a.kind))
    })?;
    let s = settings(&a.params, Some(&a.run))?;
    let pr = s.params()?;
    let integ = integration_config(&s, IntegrationConfig::default())?;
    let offset = match a.offset {
        Some(o) => o,
        None => s.offset()?.unwrap_or(DEFAULT_OFFSET),
    };
    let spec = SpecialTrajectorySpec::new(kind).with_extra(&shoot_extra(kind, a)).with_offset(offset);
    let cfg = ShootConfig::default().with_integration(integ);
    let t = shoot(&spec, &pr, &cfg).with_context(|| format!("{} is inadmissible or failed for {}", kind.name(), describe(&pr)))?;
    write_trajectory("shoot", &t, &a.out, ShootConfigRecord { spec, integration: integ }, start)
}

/// Seeds from a file with one `y Y` (or `y,Y`) pair per line.
pub fn read_seeds(path: &Path) -> Result<Vec<[f64; 2]>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut seeds = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let v: Vec<f64> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| UsageError(format!("{}:{}: expected two numbers", path.display(), i + 1)))?;
        if v.len() != 2 {
            return Err(UsageError(format!("{}:{}: expected two numbers", path.display(), i + 1)).into());
        }
        seeds.push([v[0], v[1]]);
    }
    Ok(seeds)
}

/// A centered `n × n` grid over twice the phase-plane scales.
pub fn default_seeds(pr: &ProblemParams, n: usize) -> Vec<[f64; 2]> {
    let (sy, sbig) = phase_scales(pr);
    let at = |k: usize| if n <= 1 { 0.5 } else { -1.5 + 3.0 * k as f64 / (n - 1) as f64 };
    (0..n).flat_map(|i| (0..n).map(move |j| [at(i) * sy, at(j) * sbig])).collect()
}

/// Full orbit through `seed`: the backward branch followed by the forward one.
fn orbit(pr: &ProblemParams, seed: [f64; 2], cfg: &IntegrationConfig) -> Option<Vec<[f64; 2]>> {
    let start = PhaseState::new(0.0, seed[0], seed[1]);
    let back = integrate_s(pr, start, Direction::Backward, cfg, &[], None).ok()?;
    let fwd = integrate_s(pr, start, Direction::Forward, cfg, &[], None).ok()?;
    let pts = back.states.iter().chain(fwd.states.iter().skip(1)).map(|s| [s.y, s.big_y]).collect();
    Some(pts)
}

#[derive(Serialize)]
struct PortraitConfigRecord {
    seeds: Vec<[f64; 2]>,
    special: bool,
    integration: IntegrationConfig,
}

pub fn cmd_portrait(a: &PortraitArgs) -> Result<()> {
    let start = Instant::now();
    let s = settings(&a.params, Some(&a.run))?;
    let pr = s.params()?;
    let integ = integration_config(&s, IntegrationConfig::default().with_span(20.0))?;
    let (seeds, special) = match &a.seed_file {
        Some(path) => (read_seeds(path)?, false),
        None => (default_seeds(&pr, a.grid), !a.no_special),
    };
    let mut curves: Vec<Curve> = seeds
        .par_iter()
        .enumerate()
        .filter_map(|(i, seed)| {
            orbit(&pr, *seed, &integ).map(|points| Curve { label: format!("seed {i}"), special: false, points })
        })
        .collect();
    if special {
        let cfg = ShootConfig::default().with_integration(integ);
        let specials: Vec<Curve> = TrajectoryKind::ALL
            .par_iter()
            .filter_map(|&kind| {
                let t = shoot(&SpecialTrajectorySpec::new(kind), &pr, &cfg).ok()?;
                let points = t.states.iter().map(|s| [s.y, s.big_y]).collect();
                Some(Curve { label: kind.name().into(), special: true, points })
            })
            .collect();
        curves.extend(specials);
    }
    let title = match s.caption() {
        Some(c) => format!("{}: {c}", describe(&pr)),
        None => describe(&pr),
    };
    let svg = render_svg(&pr, &curves, &title);
    let mut art = Artifacts::new("portrait", pr, PortraitConfigRecord { seeds, special, integration: integ })?;
    art.add(a.out.clone(), svg.into_bytes());
    art.write(&sibling(&a.out, "manifest.json"), start.elapsed())?;
    Ok(())
}

#[derive(Serialize)]
struct AlphaCConfigRecord {
    tol: f64,
    mode: AlphaCMode,
}

pub fn cmd_alpha_c(a: &AlphaCArgs) -> Result<()> {
    let start = Instant::now();
    let flags = Overrides { n: a.n, p: a.p, tol: a.tol, ..Default::default() };
    let s = Settings { flags, file: KeyValues::from_env()? };
    let (n, p) = (s.n()?, s.p()?);
    let tol = s.tol()?.unwrap_or(1e-6);
    let mode = match a.mode {
        ModeArg::Auto => AlphaCMode::Auto,
        ModeArg::Bisection => AlphaCMode::Bisection,
    };
    let r = find_alpha_c(n, p, tol, mode, &PhiConfig::default())?;
    let params = serde_json::json!({ "N": n, "p": p, "epsilon": -1 });
    emit_json("alpha-c", &r, a.out.as_deref(), params, AlphaCConfigRecord { tol, mode }, start)
}

pub fn cmd_classify(a: &ClassifyArgs) -> Result<()> {
    let start = Instant::now();
    let s = settings(&a.params, Some(&a.run))?;
    let pr = s.params()?;
    let mut cfg = ClassifyConfig::default();
    cfg.shoot.integration = integration_config(&s, cfg.shoot.integration)?;
    let report = classify_regime(&pr, &cfg);
    emit_json("classify", &report, a.out.as_deref(), pr, cfg.shoot.integration, start)
}

#[derive(Serialize)]
struct RecipeEntry {
    name: &'static str,
    caption: Option<String>,
    params: ProblemParams,
}

pub fn cmd_recipes() -> Result<()> {
    let mut list = Vec::new();
    for r in RECIPES {
        let s = Settings { flags: Overrides::default(), file: recipe(r.name)? };
        list.push(RecipeEntry { name: r.name, caption: s.caption().map(String::from), params: s.params()? });
    }
    print!("{}", to_json(&list)?);
    Ok(())
}
