//! Command-line front end of the `ringbubble` library.

use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use ringbubble::bubble::{inversion_map, residual, w_eval, BubbleParams, Curvatures, ResidualKind, RingConfig};
use ringbubble::coeffs::{compute_constants, lambda0, ExpansionConstants};
use ringbubble::config::{ConfigError, OutputFormat, RunConfig};
use ringbubble::energy::{decay_fit, expansion_check, McSpec, ReducedFunctional, Which};
use ringbubble::error::{CoeffError, EnergyError, ModelError, SolverError};
use ringbubble::model::{mu, regime};
use ringbubble::solver::{construct_report, Objective, ReportOptions, DEFAULT_K0};

pub mod grid;
pub mod output;

use grid::Grid;
use output::{to_json, Cell, Meta, Table};

#[derive(Debug, Parser)]
#[command(name = "ringbubble", version, about = "Ring-shaped multi-bubble numerics on the half-space")]
pub struct Cli {
    /// Run configuration (JSON); the reference parameters when absent.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Monte Carlo seed; overrides `mc.seed` of the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Leave the timestamp line out of the output header.
    #[arg(long, global = true)]
    pub no_timestamp: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Every constant of the energy expansion.
    Constants,
    /// Residuals of randomly placed bubbles.
    CheckBubble {
        #[arg(long, default_value_t = 200)]
        points: usize,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// The reduced functional and its gradient on a grid over the box.
    EnergyScan {
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 21)]
        nr: usize,
        #[arg(long, default_value_t = 21)]
        nl: usize,
    },
    /// Energy of the ring ansatz against the leading-order expansion.
    ExpansionCheck {
        /// Comma-separated `k` values; the config's `k_list` when absent.
        #[arg(long, value_delimiter = ',')]
        k: Vec<usize>,
        #[arg(long, default_value_t = 0.05)]
        tolerance: f64,
        /// Scale; the critical scale of the regime when absent.
        #[arg(long)]
        lambda: Option<f64>,
    },
    /// Weighted norms of the error terms and their decay in `mu`.
    ErrorDecay {
        #[arg(long, value_delimiter = ',')]
        k: Vec<usize>,
        /// Scale; the critical scale of the regime when absent.
        #[arg(long)]
        lambda: Option<f64>,
    },
    /// Critical point of the reduced functional and the existence report.
    CriticalPoint {
        #[arg(long)]
        k: usize,
        /// Attach the expansion check and the decay fits.
        #[arg(long)]
        full: bool,
        /// Add a smooth perturbation of relative amplitude `eps` at the
        /// size of the neglected terms.
        #[arg(long)]
        perturb: Option<f64>,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, default_value_t = DEFAULT_K0)]
        k0: usize,
    },
    /// Values of the ring ansatz on a grid.
    ExportProfile {
        #[arg(long)]
        k: usize,
        /// Ring radius; `mu r0` when absent.
        #[arg(long)]
        r: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        /// Axis list such as `y1:-2:2:41,yN:0:2:21` or `xi1:-1:1:21,xiN=0`.
        #[arg(long)]
        grid: String,
        /// Grid points live in the unit ball and are pulled back by the inversion.
        #[arg(long)]
        ball: bool,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Constants => "constants",
            Command::CheckBubble { .. } => "check-bubble",
            Command::EnergyScan { .. } => "energy-scan",
            Command::ExpansionCheck { .. } => "expansion-check",
            Command::ErrorDecay { .. } => "error-decay",
            Command::CriticalPoint { .. } => "critical-point",
            Command::ExportProfile { .. } => "export-profile",
        }
    }

    fn needs_mc(&self) -> bool {
        matches!(self, Command::CheckBubble { .. } | Command::ExpansionCheck { .. } | Command::CriticalPoint { full: true, .. })
    }

    fn default_format(&self) -> Format {
        match self {
            Command::Constants | Command::CriticalPoint { .. } => Format::Json,
            _ => Format::Csv,
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("inadmissible regime: {0}")]
    Inadmissible(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Numerical(_) => 2,
            CliError::Inadmissible(_) => 3,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<CoeffError> for CliError {
    fn from(e: CoeffError) -> Self {
        match e {
            CoeffError::InadmissibleRegime => CliError::Inadmissible(e.to_string()),
            CoeffError::Model(m) => m.into(),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

impl From<EnergyError> for CliError {
    fn from(e: EnergyError) -> Self {
        match e {
            EnergyError::Coeff(c) => c.into(),
            EnergyError::Model(m) => m.into(),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

impl From<SolverError> for CliError {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::NotAdmissible => CliError::Inadmissible(e.to_string()),
            SolverError::Coeff(c) => c.into(),
            SolverError::Energy(en) => en.into(),
            SolverError::Model(m) => m.into(),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

/// What a subcommand produced.
enum Payload {
    Table(Table),
    Json(serde_json::Value),
}

struct Outcome {
    payload: Payload,
    summary: String,
    /// A run that produced output but failed its own check.
    failure: Option<CliError>,
}

struct Ctx {
    config: RunConfig,
}

impl Ctx {
    fn constants(&self) -> Result<ExpansionConstants, CliError> {
        Ok(compute_constants(&self.config.params, &self.config.quad)?)
    }

    fn lambda0(&self, c: &ExpansionConstants) -> Result<f64, CliError> {
        Ok(lambda0(&regime(&self.config.params), c, &self.config.params)?)
    }

    fn mc(&self) -> Result<McSpec, CliError> {
        Ok(self.config.mc_spec()?)
    }

    fn k_list(&self, k: &[usize]) -> Vec<usize> {
        if k.is_empty() {
            self.config.k_list.clone()
        } else {
            k.to_vec()
        }
    }
}

fn json<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("results serialize")
}

fn cmd_constants(ctx: &Ctx) -> Result<Outcome, CliError> {
    let c = ctx.constants()?;
    let summary = format!("constants: A = {:.6e}, B = {:.6e}, regime {:?}", c.a, c.b, c.regime.tag);
    Ok(Outcome { payload: Payload::Json(json(&c)), summary, failure: None })
}

fn cmd_check_bubble(ctx: &Ctx, points: usize, tol: f64) -> Result<Outcome, CliError> {
    let params = &ctx.config.params;
    let dim = params.dim;
    let mc = ctx.mc()?;
    let mut rng = ChaCha8Rng::seed_from_u64(mc.seed);
    let mut cols: Vec<String> = vec!["index".into(), "lambda".into()];
    cols.extend((1..=dim).map(|i| format!("y_{i}")));
    cols.extend(["interior_rel".to_string(), "boundary_rel".to_string()]);
    let mut table = Table::new(&cols);
    let (mut max_in, mut max_bd) = (0.0f64, 0.0f64);
    for i in 0..points {
        let lambda = (rng.random_range(-0.7f64..0.7)).exp();
        let center: Vec<f64> = (0..dim - 1).map(|_| rng.random_range(-2.0..2.0)).collect();
        let b = BubbleParams::new(center.clone(), lambda, params.dfrak, dim).map_err(|e| CliError::Config(e.to_string()))?;
        let spread = 10f64.powf(rng.random_range(-2.0..1.0)) / lambda;
        let mut y: Vec<f64> = center.iter().map(|c| c + spread * rng.random_range(-1.0..1.0)).collect();
        y.push(spread * rng.random_range(0.0..1.0));
        let rin = residual(&y, &b, ResidualKind::Interior, params.dfrak, Curvatures::Frozen)
            .map_err(|e| CliError::Numerical(e.to_string()))?
            .relative();
        let mut yb = y.clone();
        yb[dim - 1] = 0.0;
        let rbd = residual(&yb, &b, ResidualKind::Boundary, params.dfrak, Curvatures::Frozen)
            .map_err(|e| CliError::Numerical(e.to_string()))?
            .relative();
        max_in = max_in.max(rin);
        max_bd = max_bd.max(rbd);
        let mut row: Vec<Cell> = vec![i.into(), lambda.into()];
        row.extend(y.iter().map(|v| Cell::F(*v)));
        row.extend([rin.into(), rbd.into()]);
        table.push(row);
    }
    table.footer(format!("max_interior_rel: {}", output::fmt_f64(max_in)));
    table.footer(format!("max_boundary_rel: {}", output::fmt_f64(max_bd)));
    let ok = max_in <= tol && max_bd <= tol;
    let summary = format!("check-bubble: {points} points, max relative residual {max_in:.2e} / {max_bd:.2e} (tol {tol:.0e})");
    let failure = (!ok).then(|| CliError::Numerical(format!("bubble residual above {tol:e}")));
    Ok(Outcome { payload: Payload::Table(table), summary, failure })
}

fn cmd_energy_scan(ctx: &Ctx, k: usize, nr: usize, nl: usize) -> Result<Outcome, CliError> {
    if nr < 2 || nl < 2 {
        return Err(CliError::Config("energy-scan needs --nr, --nl >= 2".into()));
    }
    let c = ctx.constants()?;
    let f = ReducedFunctional::new(k, &c)?;
    let d = &f.domain;
    let mut table = Table::new(&["r", "Lambda", "F", "dF_dr", "dF_dLambda"]);
    for i in 0..nr {
        let r = d.r_lo + (d.r_hi - d.r_lo) * i as f64 / (nr - 1) as f64;
        for j in 0..nl {
            let l = d.l_lo + (d.l_hi - d.l_lo) * j as f64 / (nl - 1) as f64;
            let [gr, gl] = f.gradient(r, l);
            table.push(vec![r.into(), l.into(), f.value(r, l).into(), gr.into(), gl.into()]);
        }
    }
    table.footer(format!("k: {k}"));
    table.footer(format!("lambda0: {}", output::fmt_f64(f.lambda0)));
    let summary = format!("energy-scan: k = {k}, {} grid points over the box", nr * nl);
    Ok(Outcome { payload: Payload::Table(table), summary, failure: None })
}

fn cmd_expansion_check(ctx: &Ctx, k: &[usize], tolerance: f64, lambda: Option<f64>) -> Result<Outcome, CliError> {
    let c = ctx.constants()?;
    let l = match lambda {
        Some(l) => l,
        None => ctx.lambda0(&c)?,
    };
    let mc = ctx.mc()?;
    let mut table = Table::new(&["k", "mu", "J_full", "J_err", "leading", "residual", "bound", "pass"]);
    let mut passed = 0;
    let ks = ctx.k_list(k);
    for &kk in &ks {
        let ck = expansion_check(kk, &c, l, tolerance, &ctx.config.quad, &mc)?;
        passed += ck.pass as usize;
        table.push(vec![
            kk.into(),
            ck.mu.into(),
            ck.j_full.into(),
            ck.j_err.into(),
            ck.leading.into(),
            ck.residual.into(),
            ck.bound.into(),
            ck.pass.into(),
        ]);
    }
    table.footer(format!("lambda: {}", output::fmt_f64(l)));
    let summary = format!("expansion-check: {passed}/{} values of k within bound", ks.len());
    Ok(Outcome { payload: Payload::Table(table), summary, failure: None })
}

fn cmd_error_decay(ctx: &Ctx, k: &[usize], lambda: Option<f64>) -> Result<Outcome, CliError> {
    let params = &ctx.config.params;
    let l = match lambda {
        Some(l) => l,
        None => ctx.lambda0(&ctx.constants()?)?,
    };
    let ks = ctx.k_list(k);
    let fin = decay_fit(&ks, params, l, Which::In, &ctx.config.norm)?;
    let fbd = decay_fit(&ks, params, l, Which::Bd, &ctx.config.norm)?;
    let mut table = Table::new(&["k", "mu", "norm_in", "norm_bd"]);
    for (i, &kk) in ks.iter().enumerate() {
        table.push(vec![kk.into(), fin.mu[i].into(), fin.norm[i].into(), fbd.norm[i].into()]);
    }
    table.footer(format!("lambda: {}", output::fmt_f64(l)));
    table.footer(format!(
        "slope_in: {} intercept_in: {} r2_in: {}",
        output::fmt_f64(fin.slope),
        output::fmt_f64(fin.intercept),
        output::fmt_f64(fin.r2)
    ));
    table.footer(format!(
        "slope_bd: {} intercept_bd: {} r2_bd: {}",
        output::fmt_f64(fbd.slope),
        output::fmt_f64(fbd.intercept),
        output::fmt_f64(fbd.r2)
    ));
    let summary = format!("error-decay: slope_in = {:.4}, slope_bd = {:.4}", fin.slope, fbd.slope);
    Ok(Outcome { payload: Payload::Table(table), summary, failure: None })
}

fn cmd_critical_point(ctx: &Ctx, k: usize, full: bool, perturb: Option<f64>, tol: f64, k0: usize) -> Result<Outcome, CliError> {
    let mc = if full { ctx.mc()? } else { McSpec { samples: ctx.config.mc.samples, seed: ctx.config.mc.seed.unwrap_or(0) } };
    let opts = ReportOptions {
        k0,
        tol,
        objective: match perturb {
            Some(amplitude) => Objective::ReducedPlusModeledError { amplitude },
            None => Objective::Reduced,
        },
        quad: ctx.config.quad,
        mc,
        norm: ctx.config.norm,
        decay_k_list: ctx.config.k_list.clone(),
    };
    let report = construct_report(k, &ctx.config.params, full, &opts)?;
    let summary = match report.critical_point {
        Some([r, l]) => format!(
            "critical-point: k = {k}, (r*, Lambda*) = ({r:.10}, {l:.10}), {}",
            report.classification.as_deref().unwrap_or("unclassified")
        ),
        None => format!("critical-point: k = {k}, no solve ({})", report.notes.join("; ")),
    };
    Ok(Outcome { payload: Payload::Json(json(&report)), summary, failure: None })
}

fn cmd_export_profile(ctx: &Ctx, k: usize, r: Option<f64>, lambda: f64, spec: &str, ball: bool) -> Result<Outcome, CliError> {
    let params = &ctx.config.params;
    let dim = params.dim;
    if k == 0 || !(lambda > 0.0) {
        return Err(CliError::Config("export-profile needs k >= 1 and lambda > 0".into()));
    }
    let grid = Grid::parse(spec, dim, ball).map_err(|e| CliError::Config(e.to_string()))?;
    let radius = r.unwrap_or_else(|| mu(k, params) * params.r0);
    let ring = RingConfig::new(k, radius, lambda, params.clone());
    let prefix = if ball { "xi" } else { "y" };
    let mut cols: Vec<String> = (1..=dim).map(|i| format!("{prefix}_{i}")).collect();
    cols.push("W".into());
    let mut table = Table::new(&cols);
    let mut skipped = 0;
    for p in grid.points() {
        let y = if ball {
            if p.iter().map(|v| v * v).sum::<f64>() > 1.0 {
                skipped += 1;
                continue;
            }
            inversion_map(&p)
        } else {
            if p[dim - 1] < 0.0 {
                skipped += 1;
                continue;
            }
            p.clone()
        };
        // the south pole of the ball is the point at infinity
        let w = if y.iter().all(|v| v.is_finite()) { w_eval(&y, &ring) } else { 0.0 };
        let mut row: Vec<Cell> = p.iter().map(|v| Cell::F(*v)).collect();
        row.push(w.into());
        table.push(row);
    }
    table.footer(format!("k: {k}"));
    table.footer(format!("r: {}", output::fmt_f64(radius)));
    table.footer(format!("lambda: {}", output::fmt_f64(lambda)));
    let summary = format!("export-profile: {} points written, {skipped} outside the domain", grid.len() - skipped);
    Ok(Outcome { payload: Payload::Table(table), summary, failure: None })
}

/// A JSON value as `name,value` rows, nested keys joined with `.`.
fn flatten(v: &serde_json::Value) -> Table {
    fn walk(prefix: &str, v: &serde_json::Value, t: &mut Table) {
        use serde_json::Value;
        let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
        match v {
            Value::Object(m) => m.iter().for_each(|(k, x)| walk(&key(k), x, t)),
            Value::Array(a) => a.iter().enumerate().for_each(|(i, x)| walk(&key(&i.to_string()), x, t)),
            Value::Number(n) => t.push(vec![Cell::S(prefix.into()), n.as_f64().map_or(Cell::S(n.to_string()), Cell::F)]),
            Value::Null => t.push(vec![Cell::S(prefix.into()), Cell::S(String::new())]),
            Value::Bool(b) => t.push(vec![Cell::S(prefix.into()), (*b).into()]),
            Value::String(s) => t.push(vec![Cell::S(prefix.into()), Cell::S(s.clone())]),
        }
    }
    let mut t = Table::new(&["name", "value"]);
    walk("", v, &mut t);
    t
}

fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut config = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            RunConfig::from_json(&text)?
        }
        None => RunConfig::new(ringbubble::model::ProblemParams::reference()),
    };
    if cli.seed.is_some() {
        config.mc.seed = cli.seed;
    }
    config.validate(cli.command.needs_mc())?;
    Ok(config)
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let config = load_config(cli)?;
    let format = cli
        .format
        .or(config.output.format.map(|f| match f {
            OutputFormat::Csv => Format::Csv,
            OutputFormat::Json => Format::Json,
        }))
        .unwrap_or(cli.command.default_format());
    let out = cli.out.clone().or(config.output.path.as_ref().map(PathBuf::from));
    let ctx = Ctx { config };
    let outcome = match &cli.command {
        Command::Constants => cmd_constants(&ctx)?,
        Command::CheckBubble { points, tol } => cmd_check_bubble(&ctx, *points, *tol)?,
        Command::EnergyScan { k, nr, nl } => cmd_energy_scan(&ctx, *k, *nr, *nl)?,
        Command::ExpansionCheck { k, tolerance, lambda } => cmd_expansion_check(&ctx, k, *tolerance, *lambda)?,
        Command::ErrorDecay { k, lambda } => cmd_error_decay(&ctx, k, *lambda)?,
        Command::CriticalPoint { k, full, perturb, tol, k0 } => cmd_critical_point(&ctx, *k, *full, *perturb, *tol, *k0)?,
        Command::ExportProfile { k, r, lambda, grid, ball } => cmd_export_profile(&ctx, *k, *r, *lambda, grid, *ball)?,
    };
    let params = &ctx.config.params;
    let nm2 = params.nf() - 2.0;
    let meta = Meta::new(cli.command.name(), &ctx.config, ctx.config.mc.seed, nm2 / (nm2 - params.frak_m()), !cli.no_timestamp);
    let text = match (outcome.payload, format) {
        (Payload::Table(t), Format::Csv) => t.to_csv(&meta),
        (Payload::Table(t), Format::Json) => to_json(&meta, &t.to_json_value()),
        (Payload::Json(v), Format::Json) => to_json(&meta, &v),
        (Payload::Json(v), Format::Csv) => flatten(&v).to_csv(&meta),
    };
    match &out {
        Some(path) => fs::write(path, text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?,
        None => print!("{text}"),
    }
    eprintln!("{}", outcome.summary);
    match outcome.failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

/// Parse `args` (program name first), run the subcommand and return the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
