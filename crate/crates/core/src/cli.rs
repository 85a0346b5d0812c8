//! Command-line front end.
//!
//! Exit codes: 0 success, 2 input or validation error, 3 value iteration did
//! not converge, 4 oracle mismatch.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::{OutputFormat, Preset, RunConfig};
use crate::error::{Error, Result};
use crate::io;
use crate::oracle;
use crate::simulate::{self, InitialState};
use crate::solver::{self, Action, ModelConfig, SolveResult, StateMatrix};
use crate::trends;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NON_CONVERGENCE: i32 = 3;
pub const EXIT_ORACLE_MISMATCH: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "career-game", version, about = "Field/topic career-switching model and job-ad trend statistics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the Bellman equation and write value, policy and action-value grids.
    Solve(ModelArgs),
    /// Simulate careers under a policy and compare it with simple baselines.
    Simulate {
        #[command(flatten)]
        model: ModelArgs,
        /// Policy grid CSV written by `solve`; solved afresh when omitted.
        #[arg(long)]
        policy: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        horizon: Option<usize>,
    },
    /// Compare value iteration with exhaustive policy enumeration on a tiny grid.
    OracleCheck(ModelArgs),
    /// Yearly topic-proportion matrix and ads-per-issue counts.
    Trends {
        /// CSV with header `year,issue,ad_id,topics`.
        #[arg(long)]
        ads: PathBuf,
        /// Category codes, one per line. Defaults to the built-in 27-code scheme.
        #[arg(long)]
        scheme: Option<PathBuf>,
        /// Issue identifiers in chronological order, one per line.
        #[arg(long)]
        calendar: Option<PathBuf>,
        #[arg(long, default_value = "out/trends")]
        out: PathBuf,
    },
    /// Cohen's kappa for two coders.
    Kappa {
        /// CSV with header `item_id,coder1,coder2`.
        #[arg(long)]
        coders: PathBuf,
        /// Also write `kappa.json` here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print an embedded preset config.
    ShowPreset {
        #[arg(value_enum)]
        preset: Preset,
    },
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    #[arg(long, conflicts_with = "preset")]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Grid points per axis.
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
}

struct Loaded {
    run: RunConfig,
    model: ModelConfig,
    preset: Option<Preset>,
}

impl ModelArgs {
    fn load(&self, fallback: impl FnOnce() -> RunConfig) -> Result<Loaded> {
        let mut run = match (&self.config, self.preset) {
            (Some(path), _) => RunConfig::load(path)?,
            (None, Some(preset)) => preset.config(),
            (None, None) => fallback(),
        };
        if let Some(tol) = self.tolerance {
            run.solver.tolerance = tol;
        }
        if let Some(n) = self.grid {
            run.model.grid_points = n;
            run.model.theta_points = None;
            run.model.epsilon_points = None;
        }
        if let Some(dir) = &self.out {
            run.output.dir = dir.clone();
        }
        if let Some(format) = self.format {
            run.output.format = format;
        }
        let model = run.validate()?;
        Ok(Loaded {
            run,
            model,
            preset: self.preset,
        })
    }
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::NonConvergence { .. } => EXIT_NON_CONVERGENCE,
        Error::NoUniformMaximizer { .. } => EXIT_ORACLE_MISMATCH,
        _ => EXIT_INPUT,
    }
}

pub fn run(cli: Cli) -> i32 {
    let outcome = match cli.command {
        Command::Solve(args) => cmd_solve(&args),
        Command::Simulate {
            model,
            policy,
            seed,
            trials,
            horizon,
        } => cmd_simulate(&model, policy.as_deref(), seed, trials, horizon),
        Command::OracleCheck(args) => cmd_oracle_check(&args),
        Command::Trends {
            ads,
            scheme,
            calendar,
            out,
        } => cmd_trends(&ads, scheme.as_deref(), calendar.as_deref(), &out),
        Command::Kappa { coders, out } => cmd_kappa(&coders, out.as_deref()),
        Command::ShowPreset { preset } => {
            print!("{}", preset.source());
            Ok(EXIT_OK)
        }
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            exit_code(&err)
        }
    }
}

fn solve_loaded(loaded: &Loaded) -> Result<SolveResult> {
    solver::solve(
        &loaded.model,
        loaded.run.solver.tolerance,
        loaded.run.solver.max_iterations,
    )
}

pub fn cmd_solve(args: &ModelArgs) -> Result<i32> {
    let loaded = args.load(|| Preset::Fig4a.config())?;
    let result = solve_loaded(&loaded)?;
    let dir = &loaded.run.output.dir;
    let grid = loaded.model.grid();
    let files: Vec<&str> = match loaded.run.output.format {
        OutputFormat::Csv => {
            io::write_value_grid(&dir.join("value.csv"), grid, &result.value)?;
            io::write_policy_grid(&dir.join("policy.csv"), grid, &result.policy)?;
            io::write_action_values(&dir.join("action_values.csv"), grid, &result)?;
            vec!["value.csv", "policy.csv", "action_values.csv"]
        }
        OutputFormat::Json => {
            io::write_json(&dir.join("solution.json"), &io::SolutionDocument::new(grid, &result))?;
            vec!["solution.json"]
        }
    };
    let shares = io::ActionShares::of(&result);
    let manifest = io::SolveManifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        preset: loaded.preset.map(|p| p.name().to_string()),
        config: loaded.run.clone(),
        tolerance: loaded.run.solver.tolerance,
        max_iterations: loaded.run.solver.max_iterations,
        iterations: result.iterations,
        residual: result.sup_norm_residual,
        theta_points: grid.theta_values.len(),
        epsilon_points: grid.epsilon_values.len(),
        action_shares: shares.clone(),
        files: files.iter().map(|s| s.to_string()).collect(),
    };
    io::write_json(&dir.join("manifest.json"), &manifest)?;
    println!(
        "converged in {} iterations, residual {:e}",
        result.iterations, result.sup_norm_residual
    );
    println!(
        "policy shares: stay {:.4}, new_topic {:.4}, new_field {:.4}",
        shares.stay, shares.new_topic, shares.new_field
    );
    println!("wrote {}", dir.display());
    Ok(EXIT_OK)
}

pub fn cmd_simulate(
    args: &ModelArgs,
    policy_path: Option<&Path>,
    seed: Option<u64>,
    trials: Option<usize>,
    horizon: Option<usize>,
) -> Result<i32> {
    let mut loaded = args.load(|| Preset::Fig4a.config())?;
    if let Some(seed) = seed {
        loaded.run.simulate.seed = seed;
    }
    if let Some(trials) = trials {
        loaded.run.simulate.trials = trials;
    }
    if let Some(horizon) = horizon {
        loaded.run.simulate.horizon = horizon;
    }
    loaded.run.validate()?;
    let model = &loaded.model;
    let (name, policy) = match policy_path {
        Some(path) => {
            let file = io::read_policy_grid(path)?;
            file.check_grid(model.grid())?;
            ("policy", file.policy)
        }
        None => ("optimal", solve_loaded(&loaded)?.policy),
    };
    let (rows, cols) = model.grid().dims();
    let baselines: Vec<(&str, StateMatrix<Action>)> = vec![
        ("always_stay", StateMatrix::filled(rows, cols, Action::Stay)),
        ("always_new_topic", StateMatrix::filled(rows, cols, Action::NewTopic)),
        ("always_new_field", StateMatrix::filled(rows, cols, Action::NewField)),
    ];
    let mut named: Vec<(&str, &StateMatrix<Action>)> = vec![(name, &policy)];
    named.extend(baselines.iter().map(|(n, p)| (*n, p)));

    let sim = &loaded.run.simulate;
    let summary = simulate::compare_policies(model, &named, InitialState::Draw, sim.trials, sim.horizon, sim.seed)?;
    let trajectory = simulate::simulate_career(model, &policy, InitialState::Draw, sim.horizon, sim.seed)?;

    let dir = &loaded.run.output.dir;
    let text = io::comparison_text(&summary);
    match loaded.run.output.format {
        OutputFormat::Csv => io::write_comparison_csv(&dir.join("comparison.csv"), &summary)?,
        OutputFormat::Json => io::write_json(&dir.join("comparison.json"), &summary)?,
    }
    std::fs::write(dir.join("comparison.txt"), &text)?;
    io::write_trajectory(&dir.join("trajectory.csv"), &trajectory)?;
    print!("{text}");
    Ok(EXIT_OK)
}

pub fn cmd_oracle_check(args: &ModelArgs) -> Result<i32> {
    const MATCH_TOLERANCE: f64 = 1e-8;
    let loaded = args.load(RunConfig::oracle_default)?;
    // The solver tolerance bounds the distance to the fixed point, so keep it
    // well inside the match tolerance.
    let tolerance = loaded.run.solver.tolerance.min(MATCH_TOLERANCE / 10.0);
    let report = oracle::compare_with_solver(
        &loaded.model,
        tolerance,
        loaded.run.solver.max_iterations,
        MATCH_TOLERANCE,
    )?;
    if report.matches() {
        println!(
            "oracle match: max |oracle - solver| = {:e} (tolerance {:e})",
            report.max_abs_diff, MATCH_TOLERANCE
        );
        Ok(EXIT_OK)
    } else {
        eprintln!("oracle mismatch (tolerance {MATCH_TOLERANCE:e}):");
        eprintln!("{:>12} {:>12} {:>22} {:>22}", "theta", "epsilon", "oracle", "solver");
        for m in &report.mismatches {
            eprintln!(
                "{:>12} {:>12} {:>22} {:>22}",
                io::fmt_num(m.theta),
                io::fmt_num(m.epsilon),
                io::fmt_num(m.oracle),
                io::fmt_num(m.solver)
            );
        }
        Ok(EXIT_ORACLE_MISMATCH)
    }
}

pub fn cmd_trends(ads_path: &Path, scheme: Option<&Path>, calendar: Option<&Path>, out: &Path) -> Result<i32> {
    let ads = io::read_ads(std::fs::File::open(ads_path)?)?;
    let scheme = match scheme {
        Some(path) => io::parse_code_list(&std::fs::read_to_string(path)?),
        None => trends::default_scheme(),
    };
    let calendar = calendar
        .map(|p| std::fs::read_to_string(p).map(|t| io::parse_code_list(&t)))
        .transpose()?;
    let matrix = trends::trend_matrix(&ads, &scheme)?;
    for year in &matrix.omitted_years {
        eprintln!("warning: year {year} has no topic mentions and was omitted");
    }
    let issues = trends::ads_per_issue(&ads, calendar.as_deref());
    io::write_trend_long(&out.join("trend_long.csv"), &matrix)?;
    io::write_trend_series(&out.join("series"), &matrix)?;
    io::write_issue_counts(&out.join("ads_per_issue.csv"), &issues)?;
    println!(
        "{} ads, {} years, {} categories -> {}",
        ads.len(),
        matrix.years.len(),
        matrix.categories.len(),
        out.display()
    );
    Ok(EXIT_OK)
}

pub fn cmd_kappa(coders: &Path, out: Option<&Path>) -> Result<i32> {
    let table = io::read_coder_table(std::fs::File::open(coders)?)?;
    let report = trends::cohens_kappa(&table)?;
    let json = io::kappa_json(&report)?;
    if let Some(dir) = out {
        io::write_json(&dir.join("kappa.json"), &report)?;
    }
    println!("{json}");
    Ok(EXIT_OK)
}
