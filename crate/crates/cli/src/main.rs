//! `bargain`: solve, optimize, simulate and analyze bargaining treatments.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};

use bargain_core::belief::{convergence_study, optimize_offer, BeliefFamily, ThresholdBelief};
use bargain_core::config::{BeliefConfig, ConfigError, LogitConfig, RunConfig};
use bargain_core::empirics::{
    self, experienced, fit_logit, logit_table_csv, mean_rejection_payoff, optimization_rates, optimization_table_csv,
    payoff_surface, summary_tables, vote_records, write_votes_csv, MeasureTwoPayoff, RateMeasure,
};
use bargain_core::presets;
use bargain_core::rational;
use bargain_core::reproduce::{run_all, Expectations};
use bargain_core::sim::{self, LogitModel, MatchLog, Simulator};
use bargain_core::spe;

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(
    name = "bargain",
    version,
    about = "Three-player majority bargaining: equilibria, optimal offers, simulation and analysis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a treatment by backward induction.
    Solve(Common),
    /// Optimal offer under threshold uncertainty.
    Optimize(OptimizeArgs),
    /// Simulate seeded matches.
    Simulate(SimulateArgs),
    /// Tables, logit fits and optimization rates from match logs.
    Analyze(AnalyzeArgs),
    /// Expected-payoff surface of first offers.
    Surface(SurfaceArgs),
    /// Run the reference checklist.
    Reproduce(ReproduceArgs),
}

#[derive(Args, Clone)]
struct Common {
    /// Named treatment, e.g. 3-partial or 3-partial-shrink.
    #[arg(long)]
    preset: Option<String>,
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    grid_step: Option<f64>,
    /// Output directory.
    #[arg(long, env = "BARGAIN_OUT", default_value = "bargain-out")]
    out: PathBuf,
}

#[derive(Args)]
struct OptimizeArgs {
    #[command(flatten)]
    common: Common,
    /// Belief family: independent_uniform, comonotone, antithetic, gaussian_copula.
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    tau_bar: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    /// Discrete belief atoms as CSV with columns tau_b,tau_c,weight.
    #[arg(long)]
    atoms: Option<PathBuf>,
    /// Proposer payoff after rejection.
    #[arg(long)]
    d: Option<f64>,
    /// Run the ten-step convergence study instead of a single optimization.
    #[arg(long)]
    convergence: bool,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: Common,
}

#[derive(Clone, Copy, ValueEnum)]
enum Measure {
    One,
    Two,
}

#[derive(Clone, Copy, ValueEnum)]
enum ActualPayoff {
    /// The first proposer's final payoff.
    Realized,
    /// The surface value of the first proposer's offer.
    Expected,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    common: Common,
    /// Match log file written by `simulate`.
    #[arg(long, required = true)]
    logs: Vec<PathBuf>,
    /// Keep only the second half of each log file (the default).
    #[arg(long, overrides_with = "all_matches")]
    experienced: bool,
    /// Analyze every match.
    #[arg(long, overrides_with = "experienced")]
    all_matches: bool,
    /// Optimization-rate measure reported per coalition type.
    #[arg(long, value_enum, default_value = "one")]
    measure: Measure,
    /// Payoff entering measure two.
    #[arg(long, value_enum, default_value = "realized")]
    actual_payoff: ActualPayoff,
    /// Coefficient column for the optimization-rate surface.
    #[arg(long)]
    column: Option<usize>,
    #[arg(long)]
    logit: Option<String>,
}

#[derive(Args)]
struct SurfaceArgs {
    #[command(flatten)]
    common: Common,
    /// Published coefficient column 1-7.
    #[arg(long)]
    column: Option<usize>,
    /// Inline coefficients: constant,strong,own_share,gini.
    #[arg(long)]
    logit: Option<String>,
    /// Mean rejection payoff as a fraction of the prize.
    #[arg(long)]
    mrp: Option<f64>,
    /// Strong indicators of the weak and strong slot, e.g. 0,1.
    #[arg(long)]
    strong_flags: Option<String>,
}

#[derive(Args)]
struct ReproduceArgs {
    #[arg(long, env = "BARGAIN_OUT", default_value = "bargain-out")]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(c) => cmd_solve(&c),
        Command::Optimize(a) => cmd_optimize(&a),
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Analyze(a) => cmd_analyze(&a),
        Command::Surface(a) => cmd_surface(&a),
        Command::Reproduce(a) => cmd_reproduce(&a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn load_config(c: &Common) -> Result<RunConfig> {
    let mut cfg = match &c.config {
        Some(path) => RunConfig::from_path(path)?,
        None => RunConfig::default(),
    };
    if let Some(p) = &c.preset {
        cfg.preset = Some(p.clone());
        cfg.treatment = None;
    }
    cfg.seed = c.seed.or(cfg.seed);
    cfg.n = c.n.or(cfg.n);
    cfg.grid_step = c.grid_step.or(cfg.grid_step);
    Ok(cfg)
}

/// Identifies the effective configuration of a run.
struct Provenance {
    command: &'static str,
    digest: String,
}

impl Provenance {
    fn new(command: &'static str, cfg: &impl Serialize) -> Provenance {
        let canonical = serde_json::to_string(cfg).expect("config serializes");
        let digest = hex::encode(Sha256::digest(format!("{command}\n{canonical}").as_bytes()));
        Provenance { command, digest }
    }

    fn header(&self) -> String {
        format!("# bargain {VERSION} {} config-sha256 {}\n", self.command, self.digest)
    }

    fn json<T: Serialize>(&self, data: &T) -> String {
        let wrapped = serde_json::json!({
            "tool": "bargain",
            "version": VERSION,
            "command": self.command,
            "config_sha256": self.digest,
            "data": data,
        });
        serde_json::to_string_pretty(&wrapped).expect("report serializes") + "\n"
    }
}

/// Writes `contents` to `dir/name` through a temporary file and a rename.
fn write_atomic(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("writing into {}", dir.display()))?;
    std::io::Write::write_all(&mut tmp, contents.as_bytes())?;
    tmp.persist(&path).map_err(|e| anyhow!("renaming into {}: {}", path.display(), e.error))?;
    println!("wrote {}", path.display());
    Ok(path)
}

fn cmd_solve(c: &Common) -> Result<ExitCode> {
    let cfg = load_config(c)?;
    let spec = cfg.spec()?;
    let prov = Provenance::new("solve", &bargain_core::config::TreatmentConfig::from_spec(&spec));
    let sol = spe::solve(&spec)?;
    let mut summary = prov.header();
    summary.push_str("round,condition,exact,decimal\n");
    for (round, condition, share) in sol.share_table() {
        summary.push_str(&format!(
            "{round},{condition},{},{:.4}\n",
            rational::display(&share),
            rational::to_f64(&share)
        ));
    }
    write_atomic(&c.out, "summary.csv", &summary)?;
    write_atomic(&c.out, "states.csv", &(prov.header() + &sol.report_csv()))?;
    write_atomic(&c.out, "solution.json", &prov.json(&sol.report_json()))?;
    print!("{}", summary.lines().skip(1).map(|l| format!("{l}\n")).collect::<String>());
    Ok(ExitCode::SUCCESS)
}

fn cmd_optimize(a: &OptimizeArgs) -> Result<ExitCode> {
    let mut cfg = load_config(&a.common)?;
    if a.family.is_some() || a.atoms.is_some() {
        let tau_bar = a.tau_bar.unwrap_or(1.0);
        let family = match (&a.atoms, a.family.as_deref()) {
            (Some(path), _) => BeliefFamily::discrete_from_csv_path(path)?,
            (None, Some("independent_uniform")) => BeliefFamily::IndependentUniform { tau_bar },
            (None, Some("comonotone")) => BeliefFamily::Comonotone { tau_bar },
            (None, Some("antithetic")) => BeliefFamily::Antithetic { tau_bar },
            (None, Some("gaussian_copula")) => {
                BeliefFamily::GaussianCopula { tau_bar, rho: a.rho.ok_or_else(|| anyhow!("--rho is required"))? }
            }
            (None, Some(other)) => return Err(anyhow!("unknown belief family {other:?}")),
            (None, None) => unreachable!(),
        };
        cfg.belief = Some(BeliefConfig { family, d: a.d.unwrap_or(0.0) });
    } else if let (Some(d), Some(b)) = (a.d, cfg.belief.as_mut()) {
        b.d = d;
    }
    if cfg.belief.is_none() && !a.convergence {
        cfg.belief =
            Some(BeliefConfig { family: BeliefFamily::IndependentUniform { tau_bar: 1.0 }, d: a.d.unwrap_or(0.0) });
    }
    let grid = cfg.grid();
    let out = &a.common.out;
    if a.convergence {
        let prov = Provenance::new("optimize-convergence", &cfg);
        let sequence: Vec<ThresholdBelief> = (1..=10)
            .map(|n| {
                let n = n as f64;
                ThresholdBelief::new(BeliefFamily::GaussianCopula { tau_bar: 1.0, rho: 0.5 / n }, 0.1 / n)
            })
            .collect::<Result<_, _>>()?;
        let study = convergence_study(0.0, &sequence, grid)?;
        let mut csv = prov.header();
        csv.push_str("n,rho,d,s_A,s_B,s_C,expected_payoff,distance\n");
        for (i, (opt, dist)) in study.rows.iter().enumerate() {
            let n = (i + 1) as f64;
            let [x, y, z] = opt.offer.shares();
            csv.push_str(&format!(
                "{},{},{},{x:.6},{y:.6},{z:.6},{:.8},{dist:.6}\n",
                i + 1,
                0.5 / n,
                0.1 / n,
                opt.expected_payoff
            ));
        }
        write_atomic(out, "convergence.csv", &csv)?;
        return Ok(ExitCode::SUCCESS);
    }
    let prov = Provenance::new("optimize", &cfg);
    let belief = cfg.belief()?;
    let opt = optimize_offer(&belief, grid)?;
    write_atomic(out, "optimum.json", &prov.json(&opt))?;
    let [x, y, z] = opt.offer.shares();
    println!(
        "offer ({x:.4}, {y:.4}, {z:.4}) payoff {:.6} accept {:.6} mwc {} degenerate {}",
        opt.expected_payoff, opt.accept_prob, opt.is_mwc, opt.degenerate
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_simulate(a: &SimulateArgs) -> Result<ExitCode> {
    let cfg = load_config(&a.common)?;
    let seed = cfg.seed.ok_or_else(|| anyhow!("simulate needs --seed or a seed in the config"))?;
    let n = cfg.n.unwrap_or(100);
    let spec = cfg.spec()?;
    let agents = cfg.agents()?;
    let prov = Provenance::new("simulate", &(&cfg, bargain_core::config::TreatmentConfig::from_spec(&spec)));
    let sim = Simulator::new(&spec, agents)?;
    let (logs, summary) = sim.run_batch(n, seed)?;
    write_atomic(&a.common.out, "logs.jsonl", &(prov.header() + &sim::to_jsonl(&logs)))?;
    write_atomic(&a.common.out, "summary.json", &prov.json(&summary))?;
    println!(
        "{} matches, first-offer rejection rate {:.4}, mean first-proposer payoff {:.4}",
        summary.n_matches, summary.first_offer_rejection_rate, summary.mean_first_proposer_payoff
    );
    Ok(ExitCode::SUCCESS)
}

fn parse_logit(text: &str) -> Result<LogitModel> {
    let v: Vec<f64> = text
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| anyhow!("--logit: {e}"))?;
    match v.as_slice() {
        [c, s, o, g] => Ok(LogitModel::new(*c, *s, *o, *g)),
        _ => Err(anyhow!("--logit needs four comma-separated coefficients")),
    }
}

fn logit_from(cfg: &mut RunConfig, column: Option<usize>, inline: Option<&str>) -> Result<Option<LogitModel>> {
    if let Some(text) = inline {
        cfg.logit = Some(LogitConfig::Inline(parse_logit(text)?));
    } else if let Some(column) = column {
        cfg.logit = Some(LogitConfig::Column { column });
    }
    match &cfg.logit {
        Some(l) => Ok(Some(l.model()?)),
        None => Ok(None),
    }
}

fn parse_flags(text: &str) -> Result<[bool; 2]> {
    let v: Vec<bool> = text
        .split(',')
        .map(|s| match s.trim() {
            "1" | "true" => Ok(true),
            "0" | "false" => Ok(false),
            other => Err(anyhow!("--strong-flags: {other:?} is not 0 or 1")),
        })
        .collect::<Result<_>>()?;
    match v.as_slice() {
        [w, s] => Ok([*w, *s]),
        _ => Err(anyhow!("--strong-flags needs two values")),
    }
}

fn default_flags(column: Option<usize>) -> [bool; 2] {
    column.and_then(presets::logit_column).map_or([false, true], presets::strong_flags)
}

fn cmd_surface(a: &SurfaceArgs) -> Result<ExitCode> {
    let mut cfg = load_config(&a.common)?;
    let model = logit_from(&mut cfg, a.column, a.logit.as_deref())?
        .ok_or_else(|| anyhow!("surface needs --column, --logit or a [logit] table"))?;
    if let Some(m) = a.mrp {
        cfg.mrp = Some(m);
    }
    if let Some(f) = &a.strong_flags {
        cfg.strong_flags = Some(parse_flags(f)?);
    }
    let column = match &cfg.logit {
        Some(LogitConfig::Column { column }) => Some(*column),
        _ => None,
    };
    // a published column brings its own rejection payoff
    let published =
        column.and_then(presets::logit_column).and_then(|c| presets::mrp_row(c.location, c.treatment)).map(|r| r.mrp());
    let mrp = cfg.mrp.or(published).ok_or_else(|| anyhow!("surface needs --mrp or mrp in the config"))?;
    cfg.mrp = Some(mrp);
    let flags = cfg.strong_flags.unwrap_or_else(|| default_flags(column));
    let step = cfg.grid_step.unwrap_or(0.005);
    let prov = Provenance::new("surface", &cfg);
    let surface = payoff_surface(&model, mrp, flags, step)?;
    write_atomic(&a.common.out, "surface.csv", &(prov.header() + &surface.to_csv()))?;
    let o = surface.optimum;
    let mut opt = prov.header();
    opt.push_str("s_A,s_weak,s_strong,pass_prob,expected_payoff,mwc,targets_weak\n");
    opt.push_str(&format!(
        "{:.6},{:.6},{:.6},{:.10},{:.10},{},{}\n",
        o.s_a,
        o.s_weak,
        o.s_strong,
        o.pass_prob,
        o.expected_payoff,
        surface.optimum_is_mwc(),
        surface.optimum_targets_weak()
    ));
    write_atomic(&a.common.out, "surface_optimum.csv", &opt)?;
    println!("optimum keeps {:.3} offers ({:.3}, {:.3}) value {:.4}", o.s_a, o.s_weak, o.s_strong, o.expected_payoff);
    Ok(ExitCode::SUCCESS)
}

fn read_logs(path: &Path) -> Result<Vec<MatchLog>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let logs = sim::from_jsonl(&text).with_context(|| format!("parsing {}", path.display()))?;
    if logs.is_empty() {
        return Err(anyhow!("{} holds no match logs", path.display()));
    }
    Ok(logs)
}

fn cmd_analyze(a: &AnalyzeArgs) -> Result<ExitCode> {
    let mut cfg = load_config(&a.common)?;
    if a.experienced {
        cfg.experienced = Some(true);
    } else if a.all_matches {
        cfg.experienced = Some(false);
    }
    let keep_experienced = cfg.experienced.unwrap_or(true);
    let mut logs = Vec::new();
    for path in &a.logs {
        let file_logs = read_logs(path)?;
        if keep_experienced {
            logs.extend_from_slice(experienced(&file_logs));
        } else {
            logs.extend(file_logs);
        }
    }
    let spec = match cfg.spec() {
        Ok(s) => s,
        Err(ConfigError::MissingTreatment) => {
            let id = &logs[0].spec_id;
            presets::treatment(id).ok_or_else(|| anyhow!("logs come from {id:?}; pass --preset or --config"))?
        }
        Err(e) => return Err(e.into()),
    };
    for log in &logs {
        if log.spec_id != logs[0].spec_id {
            bail!("logs mix treatments {:?} and {:?}", logs[0].spec_id, log.spec_id);
        }
        log.check(&spec).map_err(|e| anyhow!("match seed {}: {e}", log.seed))?;
    }
    let model = logit_from(&mut cfg, a.column, a.logit.as_deref())?;
    let prov = Provenance::new(
        "analyze",
        &(
            &cfg,
            keep_experienced,
            matches!(a.measure, Measure::Two),
            matches!(a.actual_payoff, ActualPayoff::Expected),
            &a.logs.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
        ),
    );
    let sol = spe::solve(&spec)?;
    let out = &a.common.out;

    let report = summary_tables(&logs, Some(&sol))?;
    write_atomic(out, "summary.csv", &(prov.header() + &report.to_csv()))?;
    let mut ecdf = prov.header();
    ecdf.push_str("gini,cdf\n");
    for (x, f) in empirics::ecdf(&report.gini_samples) {
        ecdf.push_str(&format!("{x:.6},{f:.6}\n"));
    }
    write_atomic(out, "gini_ecdf.csv", &ecdf)?;

    let votes = vote_records(&logs, Some(&sol), &spec.id, false);
    let mut votes_csv = Vec::new();
    write_votes_csv(&mut votes_csv, &votes)?;
    write_atomic(out, "votes.csv", &(prov.header() + &String::from_utf8(votes_csv)?))?;
    match fit_logit(&votes) {
        Ok(fit) => {
            write_atomic(out, "logit.csv", &(prov.header() + &logit_table_csv(&[(spec.id.clone(), fit)])))?;
        }
        Err(e) => {
            eprintln!("logit fit skipped: {e}");
            write_atomic(out, "logit.csv", &format!("{}# not estimated: {e}\n", prov.header()))?;
        }
    }
    let mrp = mean_rejection_payoff(&logs);
    write_atomic(out, "mrp.json", &prov.json(&mrp))?;

    if let Some(model) = model {
        let column = match &cfg.logit {
            Some(LogitConfig::Column { column }) => Some(*column),
            _ => None,
        };
        let flags = cfg.strong_flags.unwrap_or_else(|| default_flags(column));
        let mrp_value = cfg.mrp.or(mrp.mrp).unwrap_or(0.0);
        let surface = payoff_surface(&model, mrp_value, flags, cfg.grid_step.unwrap_or(0.005))?;
        let actual = match a.actual_payoff {
            ActualPayoff::Realized => MeasureTwoPayoff::Realized,
            ActualPayoff::Expected => MeasureTwoPayoff::ExpectedOfOffer,
        };
        let measure = match a.measure {
            Measure::One => RateMeasure::One,
            Measure::Two => RateMeasure::Two,
        };
        let rates = optimization_rates(&logs, &surface, Some(&sol), actual)?;
        let table = optimization_table_csv(&[(spec.id.clone(), rates)], measure);
        write_atomic(out, "optimization.csv", &(prov.header() + &table))?;
    }
    println!(
        "{} matches, first-offer rejection rate {:.4}, mean accepted first share {}",
        report.n_matches,
        mrp.rejection_rate,
        report.mean_accepted_first_share.map_or("NA".into(), |x| format!("{x:.4}"))
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_reproduce(a: &ReproduceArgs) -> Result<ExitCode> {
    let report = run_all(&Expectations::default());
    let prov = Provenance::new("reproduce", &VERSION);
    write_atomic(&a.out, "reproduce.txt", &(prov.header() + &report.to_text()))?;
    print!("{}", report.to_text_timed());
    Ok(if report.all_pass() { ExitCode::SUCCESS } else { ExitCode::from(2) })
}
