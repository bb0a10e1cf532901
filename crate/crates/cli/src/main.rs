//! Command-line front end for kicked few-level dynamics: declarative
//! scenario configs, figure-reproduction presets, sweep runner, and
//! CSV/pulse-schedule emission.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical-domain error.

use clap::{Parser, Subcommand};
use kickdyn::sim::{self, KickSchedule, KickedModel};
use kickdyn::squarewave;
use kickdyn::threelevel::{linspace, sweep_period, Regime, SweepOptions};
use kickdyn::twolevel::{self, Impulse2, KickParams2, TwoLevelParams};
use kickdyn_cli::config::{self, AutoPeriod, ScenarioConfig};
use kickdyn_cli::presets;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "kickdyn",
    version,
    about = "Kicked few-level quantum dynamics: effective Hamiltonians, sweeps, pulse synthesis"
)]
struct Cli {
    /// Worker threads for sweep grids (default: one per core)
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Intra-period sampling density override
    #[arg(long, global = true)]
    samples_per_period: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Effective-Hamiltonian report or parameter sweep for a kicked
    /// two-level system
    Eff2 {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Period sweep of a kicked three-level system
    Sweep3 {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Regenerate a figure preset, or run/dump its parameter file
    Figure {
        /// Preset id (fig1a..fig1d, fig2a..fig2c, fig3, fig4a, fig4b,
        /// figS4, figS6, fig3sa, fig3sb, fig7a, fig7b, figS1)
        id: Option<String>,
        #[arg(long, default_value = "figures")]
        out_dir: PathBuf,
        /// Write the preset's parameter file instead of running it
        #[arg(long)]
        dump_params: Option<PathBuf>,
        /// Run from a dumped parameter file instead of a preset id
        #[arg(long, conflicts_with = "id")]
        from_params: Option<PathBuf>,
    },
    /// Population inversion (two-level) or selective transition
    /// (three-level) by adding and removing kicks
    Inversion {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Square-wave realization of the kick train, with schedule emission
    Squarewave {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        schedule_out: Option<PathBuf>,
    },
}

enum CliError {
    Config(String),
    Numeric(kickdyn::Error),
    Io(String),
}

impl From<kickdyn::Error> for CliError {
    fn from(e: kickdyn::Error) -> Self {
        CliError::Numeric(e)
    }
}

impl CliError {
    fn report(&self) -> (u8, String) {
        match self {
            CliError::Config(m) => (2, format!("config error: {m}")),
            CliError::Numeric(e) => (3, format!("numerical error: {e}")),
            CliError::Io(m) => (1, format!("io error: {m}")),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = cli.threads;
    match with_pool(threads, || run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let (code, msg) = e.report();
            eprintln!("{msg}");
            ExitCode::from(code)
        }
    }
}

#[cfg(feature = "parallel")]
fn with_pool<T>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> T
where
    T: Send,
{
    match threads {
        Some(n) if n > 0 => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .expect("thread pool")
            .install(f),
        _ => f(),
    }
}

#[cfg(not(feature = "parallel"))]
fn with_pool<T>(_threads: Option<usize>, f: impl FnOnce() -> T + Send) -> T
where
    T: Send,
{
    f()
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Eff2 { config, out } => cmd_eff2(&config, out.as_deref(), cli.samples_per_period),
        Command::Sweep3 { config, out } => {
            cmd_sweep3(&config, out.as_deref(), cli.samples_per_period)
        }
        Command::Figure {
            id,
            out_dir,
            dump_params,
            from_params,
        } => cmd_figure(
            id.as_deref(),
            &out_dir,
            dump_params.as_deref(),
            from_params.as_deref(),
        ),
        Command::Inversion { config, out } => {
            cmd_inversion(&config, out.as_deref(), cli.samples_per_period)
        }
        Command::Squarewave {
            config,
            out,
            schedule_out,
        } => cmd_squarewave(
            &config,
            out.as_deref(),
            schedule_out.as_deref(),
            cli.samples_per_period,
        ),
    }
}

fn load(path: &Path) -> Result<ScenarioConfig, CliError> {
    ScenarioConfig::from_path(path).map_err(CliError::Config)
}

fn write_or_print(path: Option<&Path>, content: &str) -> Result<(), CliError> {
    match path {
        Some(p) => {
            if let Some(parent) = p.parent() {
                if !parent.as_os_str().is_empty() {
                    std::fs::create_dir_all(parent)
                        .map_err(|e| CliError::Io(format!("{}: {e}", parent.display())))?;
                }
            }
            std::fs::write(p, content).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))
        }
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

/// Resolve the kick period for a two-level scenario: fixed value or the
/// smallest resonance period.
fn resolve_period2(
    cfg: &ScenarioConfig,
    sys: &TwoLevelParams,
    imp: &Impulse2,
) -> Result<f64, CliError> {
    let spec = cfg
        .period_spec()
        .ok_or_else(|| CliError::Config("kick.period is required here".into()))?;
    match spec.auto().map_err(CliError::Config)? {
        None => match spec {
            config::PeriodSpec::Fixed(t) => Ok(*t),
            _ => unreachable!(),
        },
        Some(AutoPeriod::Resonance) => twolevel::resonance_periods(sys, imp, 4)
            .first()
            .copied()
            .ok_or_else(|| CliError::Config("auto:resonance found no period".into())),
        Some(_) => Err(CliError::Config(
            "auto:one_photon/auto:two_photon apply to three-level systems".into(),
        )),
    }
}

fn detect_style(sys: &TwoLevelParams, imp: &Impulse2) -> &'static str {
    let d = imp.delta1p != sys.delta1;
    let o = imp.omega1p != sys.omega1;
    let t = imp.theta1p != sys.theta1;
    match (d, o, t) {
        (true, false, false) => "frequency",
        (false, true, false) => "amplitude",
        (false, false, true) => "phase",
        (false, false, false) => "none",
        _ => "custom",
    }
}

fn cmd_eff2(path: &Path, out: Option<&Path>, spp: Option<usize>) -> Result<(), CliError> {
    let cfg = load(path)?;
    let sys = cfg.two_level().map_err(CliError::Config)?;
    let imp = cfg.impulse2(&sys).map_err(CliError::Config)?;
    let _ = spp;
    if let Some(sweep) = &cfg.sweep {
        let vary = sweep.vary.clone();
        let base_period = match cfg.period_spec() {
            Some(_) => Some(resolve_period2(&cfg, &sys, &imp)?),
            None => None,
        };
        if vary != "period" && base_period.is_none() {
            return Err(CliError::Config(
                "sweeping an impulse parameter needs kick.period".into(),
            ));
        }
        let xs = linspace(sweep.from, sweep.to, sweep.points);
        let rows = kickdyn::exec::par_map(&xs, |&x| {
            let (t, i) = match vary.as_str() {
                "period" => (x, imp),
                "omega1p" => (base_period.unwrap(), Impulse2 { omega1p: x, ..imp }),
                "delta1p" => (base_period.unwrap(), Impulse2 { delta1p: x, ..imp }),
                _ => (base_period.unwrap(), Impulse2 { theta1p: x, ..imp }),
            };
            if t <= 0.0 {
                return None;
            }
            let kick = KickParams2 {
                period: t,
                impulse: i,
            };
            let f = twolevel::f_functions(&sys, &kick);
            let eff = twolevel::effective_hamiltonian(&sys, &kick);
            Some((x, eff, f))
        });
        let mut csv = String::new();
        writeln!(csv, "{vary},delta_eff,omega_eff,theta_eff,f1,f2,f3,f4").unwrap();
        for (x, eff, f) in rows.into_iter().flatten() {
            writeln!(
                csv,
                "{},{},{},{},{},{},{},{}",
                x, eff.delta_eff, eff.omega_eff, eff.theta_eff, f.f1, f.f2, f.f3, f.f4
            )
            .unwrap();
        }
        return write_or_print(cfg.output_path(out).as_deref(), &csv);
    }
    let period = resolve_period2(&cfg, &sys, &imp)?;
    let kick = KickParams2::new(period, imp)?;
    let f = twolevel::f_functions(&sys, &kick);
    let eff = twolevel::effective_hamiltonian(&sys, &kick);
    let mut report = String::new();
    writeln!(report, "period = {period}").unwrap();
    writeln!(report, "delta_eff = {}", eff.delta_eff).unwrap();
    writeln!(report, "omega_eff = {}", eff.omega_eff).unwrap();
    writeln!(report, "theta_eff = {}", eff.theta_eff).unwrap();
    writeln!(report, "f = [{}, {}, {}, {}]", f.f1, f.f2, f.f3, f.f4).unwrap();
    let periods = twolevel::resonance_periods(&sys, &imp, 8);
    let list = periods
        .iter()
        .map(|t| t.to_string())
        .collect::<Vec<_>>()
        .join(", ");
    writeln!(report, "resonance_periods = [{list}]").unwrap();
    let cdc = twolevel::cdc_points(imp.omega1p, 12);
    let list = cdc
        .iter()
        .map(|d| d.to_string())
        .collect::<Vec<_>>()
        .join(", ");
    writeln!(report, "cdc_points = [{list}]").unwrap();
    writeln!(report, "kick_style = {}", detect_style(&sys, &imp)).unwrap();
    match twolevel::omega_eff_limit(&sys, &imp) {
        Ok(limit) => writeln!(report, "omega_eff_limit = {limit}").unwrap(),
        Err(e) => writeln!(report, "omega_eff_limit = n/a ({e})").unwrap(),
    }
    writeln!(
        report,
        "cdc = {}",
        if eff.omega_eff < 1e-3 { "yes" } else { "no" }
    )
    .unwrap();
    print!("{report}");
    if let Some(p) = cfg.output_path(out) {
        write_or_print(Some(&p), &report)?;
    }
    Ok(())
}

fn cmd_sweep3(path: &Path, out: Option<&Path>, spp: Option<usize>) -> Result<(), CliError> {
    let cfg = load(path)?;
    let sys = cfg.three_level().map_err(CliError::Config)?;
    let imp = cfg.impulse3(&sys).map_err(CliError::Config)?;
    let sweep = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Config("sweep3 needs a [sweep] block over period".into()))?;
    if sweep.vary != "period" {
        return Err(CliError::Config("sweep3 sweeps the period only".into()));
    }
    let opts = SweepOptions {
        samples_per_period: cfg.samples_per_period(spp),
        horizon_periods: cfg.run.as_ref().and_then(|r| r.horizon_periods),
    };
    let grid = linspace(sweep.from, sweep.to, sweep.points);
    let pts = sweep_period(&sys, &imp, &grid, &opts)?;
    let mut csv = String::from("T,P1_min,P2_max,P3_max,regime\n");
    for p in pts {
        writeln!(
            csv,
            "{},{},{},{},{}",
            p.period,
            p.p1_min,
            p.p2_max,
            p.p3_max,
            p.regime.as_str()
        )
        .unwrap();
    }
    write_or_print(cfg.output_path(out).as_deref(), &csv)
}

fn cmd_figure(
    id: Option<&str>,
    out_dir: &Path,
    dump_params: Option<&Path>,
    from_params: Option<&Path>,
) -> Result<(), CliError> {
    let params = match (id, from_params) {
        (Some(id), None) => presets::preset(id)
            .ok_or_else(|| CliError::Config(format!("unknown figure id {id:?}")))?,
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            toml::from_str(&text).map_err(|e| CliError::Config(format!("params: {e}")))?
        }
        _ => {
            return Err(CliError::Config(
                "give a figure id or --from-params <file>".into(),
            ))
        }
    };
    if let Some(dump) = dump_params {
        let text = toml::to_string(&params)
            .map_err(|e| CliError::Config(format!("cannot serialize params: {e}")))?;
        return write_or_print(Some(dump), &text);
    }
    let files = presets::run_figure(&params)?;
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Io(format!("{}: {e}", out_dir.display())))?;
    for (name, content) in files {
        let path = out_dir.join(&name);
        std::fs::write(&path, content)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_inversion(path: &Path, out: Option<&Path>, spp: Option<usize>) -> Result<(), CliError> {
    let cfg = load(path)?;
    if cfg.system.three_level.is_some() {
        return cmd_selective(&cfg, out, spp);
    }
    let sys = cfg.two_level().map_err(CliError::Config)?;
    let imp = cfg.impulse2(&sys).map_err(CliError::Config)?;
    let period = resolve_period2(&cfg, &sys, &imp)?;
    let kick = KickParams2::new(period, imp)?;
    let eff = twolevel::effective_hamiltonian(&sys, &kick);
    let n_eff = sim::n_eff(eff.omega_eff, period)?;
    let schedule = match cfg.run.as_ref().and_then(|r| r.segments.as_ref()) {
        Some(segments) => {
            let parsed: Result<Vec<_>, _> =
                segments.iter().map(|s| config::parse_segment(s)).collect();
            KickSchedule {
                segments: parsed.map_err(CliError::Config)?,
            }
        }
        None => KickSchedule::inversion(2.0, n_eff.round().max(0.0) as usize, 4.0),
    };
    let kicks: usize = schedule
        .segments
        .iter()
        .map(|s| match s {
            sim::Segment::Kicked { periods } => *periods,
            _ => 0,
        })
        .sum();
    let model = KickedModel::two_level(&sys, &kick)?;
    let traj = sim::evolve(&model, &schedule, cfg.samples_per_period(spp));
    let mut buf = Vec::new();
    traj.write_csv(&mut buf).expect("in-memory write");
    let csv = String::from_utf8(buf).unwrap();
    let dest = cfg.output_path(out);
    let mut summary = String::new();
    writeln!(summary, "period = {period}").unwrap();
    writeln!(summary, "omega_eff = {}", eff.omega_eff).unwrap();
    writeln!(summary, "n_eff = {n_eff}").unwrap();
    writeln!(summary, "kicks = {kicks}").unwrap();
    writeln!(summary, "final_P2 = {}", traj.final_population(1)).unwrap();
    match dest {
        Some(p) => {
            write_or_print(Some(&p), &csv)?;
            print!("{summary}");
        }
        None => {
            print!("{csv}");
            eprint!("{summary}");
        }
    }
    Ok(())
}

fn cmd_selective(
    cfg: &ScenarioConfig,
    out: Option<&Path>,
    spp: Option<usize>,
) -> Result<(), CliError> {
    let sys = cfg.three_level().map_err(CliError::Config)?;
    let imp = cfg.impulse3(&sys).map_err(CliError::Config)?;
    let run = cfg.run.as_ref();
    let target = match run.and_then(|r| r.target.as_deref()) {
        Some("state2") => sim::TargetState::State2,
        Some("state3") => sim::TargetState::State3,
        _ => {
            return Err(CliError::Config(
                "three-level inversion needs run.target = \"state2\" or \"state3\"".into(),
            ))
        }
    };
    let goal = run.and_then(|r| r.amplitude_goal).unwrap_or(0.9);
    let max_kicks = run.and_then(|r| r.max_kicks).unwrap_or(20_000);
    let spec = cfg
        .period_spec()
        .ok_or_else(|| CliError::Config("kick.period is required".into()))?;
    let period = match spec.auto().map_err(CliError::Config)? {
        None => match spec {
            config::PeriodSpec::Fixed(t) => *t,
            _ => unreachable!(),
        },
        Some(auto) => {
            let want = match auto {
                AutoPeriod::OnePhoton => Regime::OnePhoton,
                AutoPeriod::TwoPhoton => Regime::TwoPhoton,
                AutoPeriod::Resonance => Regime::FullResonance,
            };
            let sweep = cfg.sweep.as_ref().ok_or_else(|| {
                CliError::Config("auto period resolution needs a [sweep] grid".into())
            })?;
            let grid = linspace(sweep.from, sweep.to, sweep.points);
            let opts = SweepOptions {
                samples_per_period: cfg.samples_per_period(spp),
                horizon_periods: run.and_then(|r| r.horizon_periods),
            };
            let pts = sweep_period(&sys, &imp, &grid, &opts)?;
            pts.iter()
                .find(|p| p.regime == want)
                .map(|p| p.period)
                .ok_or_else(|| {
                    CliError::Config(format!(
                        "no {} period found in the sweep grid",
                        want.as_str()
                    ))
                })?
        }
    };
    let run_out = sim::selective_transition(&sys, &imp, period, period, target, goal, max_kicks)?;
    let mut buf = Vec::new();
    run_out
        .trajectory
        .write_csv(&mut buf)
        .expect("in-memory write");
    let csv = String::from_utf8(buf).unwrap();
    let (tgt_level, other_level) = match target {
        sim::TargetState::State2 => (1usize, 2usize),
        sim::TargetState::State3 => (2, 1),
    };
    let mut summary = String::new();
    writeln!(summary, "period = {}", run_out.period).unwrap();
    writeln!(summary, "kicks = {}", run_out.kicks).unwrap();
    writeln!(
        summary,
        "target_max = {}",
        run_out.trajectory.max_population(tgt_level)
    )
    .unwrap();
    writeln!(
        summary,
        "other_max = {}",
        run_out.trajectory.max_population(other_level)
    )
    .unwrap();
    match cfg.output_path(out) {
        Some(p) => {
            write_or_print(Some(&p), &csv)?;
            print!("{summary}");
        }
        None => {
            print!("{csv}");
            eprint!("{summary}");
        }
    }
    Ok(())
}

fn cmd_squarewave(
    path: &Path,
    out: Option<&Path>,
    schedule_out: Option<&Path>,
    spp: Option<usize>,
) -> Result<(), CliError> {
    let cfg = load(path)?;
    let sys = cfg.two_level().map_err(CliError::Config)?;
    let imp = cfg.impulse2(&sys).map_err(CliError::Config)?;
    let free_time = resolve_period2(&cfg, &sys, &imp)?;
    let kick = KickParams2::new(free_time, imp)?;
    let eff = twolevel::effective_hamiltonian(&sys, &kick);
    let branch = squarewave::preferred_branch(&imp, free_time)?;
    let om_prime = squarewave::square_effective_coupling(free_time, branch.duration, eff.omega_eff);
    // equivalence residual of the emitted branch
    let target = kickdyn::mat::expm_hermitian2(&imp.matrix(), 1.0)?;
    let got = kickdyn::mat::expm_hermitian2(&branch.pulse.matrix(), branch.duration)?;
    let residual = got.phase_dist(&target);
    let samples = cfg.samples_per_period(spp);
    let deviation = if om_prime > 0.0 {
        squarewave::compare_to_resonance_pulse(
            &sys,
            &branch,
            free_time,
            om_prime,
            std::f64::consts::FRAC_PI_2 / sys.omega1,
            samples,
        )?
    } else {
        f64::NAN
    };
    let mut summary = String::new();
    writeln!(summary, "free_time = {free_time}").unwrap();
    writeln!(summary, "pulse_time = {}", branch.duration).unwrap();
    writeln!(summary, "branch_k = {}", branch.k).unwrap();
    writeln!(
        summary,
        "pulse_params = ({}, {}, {})",
        branch.pulse.delta1p, branch.pulse.omega1p, branch.pulse.theta1p
    )
    .unwrap();
    writeln!(summary, "omega_eff = {}", eff.omega_eff).unwrap();
    writeln!(summary, "omega_eff_prime = {om_prime}").unwrap();
    writeln!(summary, "equivalence_residual = {residual}").unwrap();
    writeln!(summary, "resonance_pulse_deviation = {deviation}").unwrap();
    print!("{summary}");
    if let Some(sched_path) = schedule_out {
        let total = if om_prime > 0.0 {
            std::f64::consts::FRAC_PI_2 / om_prime
        } else {
            10.0 * (free_time + branch.duration)
        };
        let n_periods = (total / (free_time + branch.duration)).ceil() as usize;
        let mut sched = String::from("mode,duration,delta,omega,theta\n");
        for _ in 0..n_periods {
            writeln!(
                sched,
                "free,{},{},{},{}",
                free_time, sys.delta1, sys.omega1, sys.theta1
            )
            .unwrap();
            writeln!(
                sched,
                "pulse,{},{},{},{}",
                branch.duration, branch.pulse.delta1p, branch.pulse.omega1p, branch.pulse.theta1p
            )
            .unwrap();
        }
        write_or_print(Some(sched_path), &sched)?;
    }
    if let Some(csv_path) = cfg.output_path(out) {
        // comparison trajectory against the resonance pulse
        let params = presets::FigureParams {
            name: "squarewave".into(),
            spec: presets::FigureSpec::SquareComparison {
                sys: presets::Sys2 {
                    delta1: sys.delta1,
                    omega1: sys.omega1,
                    theta1: sys.theta1,
                },
                delta1p: imp.delta1p,
                inversions: 1.0,
                samples_per_segment: samples,
            },
        };
        let files = presets::run_figure(&params)?;
        write_or_print(Some(&csv_path), &files[0].1)?;
    }
    Ok(())
}
