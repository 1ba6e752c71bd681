//! Command-line front end: model and field selection, energy scans, volume
//! curves, correction checks, orbit dumps and the action-angle
//! counterexample, all with seeded, reproducible output.

mod config;
mod output;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use equipart::dynamics::{integrate_orbit, orbit_period};
use equipart::equipartition::{
    action_angle_counterexample, correction_identity, scan_energies, ScanOutcome,
};
use equipart::fields::field_by_token;
use equipart::microcanonical::volume_curve;
use equipart::models::{build_model, Component, HamiltonianModel};
use equipart::Estimate;
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use config::{energy_grid, parse_params, resolve_seed, FileConfig, McKnobs};
use output::{fmt_float, fmt_opt, json_float, json_opt, open_sink, ObjectDoc, TableDoc};

#[derive(Parser)]
#[command(
    name = "equipart",
    version,
    about = "Microcanonical equipartition diagnostics for Hamiltonian models"
)]
struct Cli {
    #[command(flatten)]
    common: CommonArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Model name (pendulum, ho1d, ho2d)
    #[arg(long, global = true)]
    model: Option<String>,
    /// Model parameter override `name=value`; repeatable
    #[arg(long = "param", global = true, value_delimiter = ',')]
    param: Vec<String>,
    /// Master seed (also: EQUIPART_SEED environment variable)
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Monte Carlo sample count
    #[arg(long, global = true)]
    samples: Option<u64>,
    /// Relative finite-difference step for dVol/dE
    #[arg(long = "fd-step", global = true)]
    fd_step: Option<f64>,
    /// Absolute shell thickness for shell averages
    #[arg(long, global = true)]
    shell: Option<f64>,
    /// Step divisor: h = T / divisor
    #[arg(long = "h-divisor", global = true)]
    h_divisor: Option<f64>,
    /// Averaging length for time averages, in orbit periods
    #[arg(long, global = true)]
    periods: Option<f64>,
    /// JSON config file with the same keys as the flags
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output path; `-` streams to standard output
    #[arg(long, global = true)]
    out: Option<String>,
    /// Output format for tabular commands
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Equipartition reports for fields over an energy grid
    Scan(ScanArgs),
    /// Vol(M_E), Vol(Sigma_E) and kT over an energy grid
    Volumes(GridArgs),
    /// Correction identity above the separatrix
    Correction(CorrectionArgs),
    /// Orbit dump (t, q, p, H) for phase portraits
    Orbit(OrbitArgs),
    /// Action-angle counterexample table on the 2-D oscillator
    Counterexample(CounterexampleArgs),
}

#[derive(Args)]
struct GridSpec {
    /// Grid lower edge
    #[arg(long = "e-min", allow_negative_numbers = true)]
    e_min: Option<f64>,
    /// Grid upper edge
    #[arg(long = "e-max", allow_negative_numbers = true)]
    e_max: Option<f64>,
    /// Number of grid points
    #[arg(long)]
    points: Option<usize>,
    /// Explicit energies (overrides the uniform grid)
    #[arg(long = "e-list", value_delimiter = ',', allow_negative_numbers = true)]
    e_list: Vec<f64>,
}

#[derive(Args)]
struct ScanArgs {
    /// Field tokens: f11, f12, f21, f22, pcubed
    #[arg(long, value_delimiter = ',')]
    fields: Vec<String>,
    #[command(flatten)]
    grid: GridSpec,
}

#[derive(Args)]
struct GridArgs {
    #[command(flatten)]
    grid: GridSpec,
}

#[derive(Args)]
struct CorrectionArgs {
    /// Reference energy (above the separatrix)
    #[arg(long, allow_negative_numbers = true)]
    e: Option<f64>,
    /// Energy increment
    #[arg(long = "delta-e")]
    delta_e: Option<f64>,
}

#[derive(Args)]
struct OrbitArgs {
    /// Orbit energy
    #[arg(long, allow_negative_numbers = true)]
    e: Option<f64>,
    /// Component: oscillation, rotation_pos, rotation_neg
    #[arg(long)]
    component: Option<String>,
    /// Integration span in seconds (default: 3 periods)
    #[arg(long = "t-end")]
    t_end: Option<f64>,
    /// Step size in seconds (default: period / h-divisor)
    #[arg(long)]
    h: Option<f64>,
}

#[derive(Args)]
struct CounterexampleArgs {
    #[arg(long)]
    omega1: Option<f64>,
    #[arg(long)]
    omega2: Option<f64>,
    /// Shell energy
    #[arg(long, allow_negative_numbers = true)]
    e: Option<f64>,
}

/// Everything a command needs after precedence resolution.
struct Ctx {
    file: FileConfig,
    model_name: String,
    model: Arc<dyn HamiltonianModel>,
    knobs: McKnobs,
    format: Format,
    out: String,
}

impl Ctx {
    fn build(common: &CommonArgs) -> Result<Self> {
        let file = match &common.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        let model_name = common
            .model
            .clone()
            .or_else(|| file.model.clone())
            .unwrap_or_else(|| "pendulum".to_string());
        let mut params: BTreeMap<String, f64> = file.params.clone().unwrap_or_default();
        params.extend(parse_params(&common.param)?);
        let model = build_model(&model_name, &params)?;
        let knobs = McKnobs {
            samples: common.samples.or(file.samples).unwrap_or(100_000),
            seed: resolve_seed(common.seed, file.seed)?,
            fd_step: common.fd_step.or(file.fd_step).unwrap_or(1e-3),
            shell: common.shell.or(file.shell),
            h_divisor: common.h_divisor.or(file.h_divisor).unwrap_or(1000.0),
            periods: common.periods.or(file.periods).unwrap_or(2000.0),
        };
        let format = match (common.format, file.format.as_deref()) {
            (Some(f), _) => f,
            (None, Some("csv")) | (None, None) => Format::Csv,
            (None, Some("json")) => Format::Json,
            (None, Some(other)) => {
                bail!("config file format must be `csv` or `json`, got `{other}`")
            }
        };
        let out = common
            .out
            .clone()
            .or_else(|| file.out.clone())
            .unwrap_or_else(|| "-".to_string());
        Ok(Ctx {
            file,
            model_name,
            model,
            knobs,
            format,
            out,
        })
    }

    /// Resolved-config echo shared by every command's output header.
    fn config_json(&self, extras: Value) -> Value {
        let mut object = serde_json::Map::new();
        object.insert("model".into(), json!(self.model_name));
        object.insert(
            "params".into(),
            Value::Object(
                self.model
                    .params()
                    .into_iter()
                    .map(|(k, v)| (k.to_string(), json_float(v)))
                    .collect(),
            ),
        );
        object.insert("samples".into(), json!(self.knobs.samples));
        object.insert("fd_step".into(), json_float(self.knobs.fd_step));
        object.insert("shell".into(), json_opt(self.knobs.shell));
        object.insert("h_divisor".into(), json_float(self.knobs.h_divisor));
        object.insert("periods".into(), json_float(self.knobs.periods));
        object.insert(
            "format".into(),
            json!(match self.format {
                Format::Csv => "csv",
                Format::Json => "json",
            }),
        );
        if let Value::Object(extra) = extras {
            for (k, v) in extra {
                object.insert(k, v);
            }
        }
        Value::Object(object)
    }

    fn write_table(&self, doc: &TableDoc) -> Result<()> {
        let mut sink = open_sink(&self.out)
            .with_context(|| format!("cannot open output path `{}`", self.out))?;
        match self.format {
            Format::Csv => doc.write_csv(&mut sink)?,
            Format::Json => doc.write_json(&mut sink)?,
        }
        sink.flush()?;
        Ok(())
    }

    fn write_object(&self, doc: &ObjectDoc) -> Result<()> {
        let mut sink = open_sink(&self.out)
            .with_context(|| format!("cannot open output path `{}`", self.out))?;
        doc.write_json(&mut sink)?;
        sink.flush()?;
        Ok(())
    }
}

fn estimate_cells(est: &Estimate) -> (String, String) {
    (fmt_float(est.value), fmt_float(est.std_error))
}

fn resolve_grid(ctx: &Ctx, spec: &GridSpec) -> Result<Vec<f64>> {
    let e_list = if spec.e_list.is_empty() {
        ctx.file.e_list.clone().unwrap_or_default()
    } else {
        spec.e_list.clone()
    };
    energy_grid(
        &e_list,
        spec.e_min.or(ctx.file.e_min),
        spec.e_max.or(ctx.file.e_max),
        spec.points.or(ctx.file.points),
    )
}

fn cmd_scan(ctx: &Ctx, args: &ScanArgs) -> Result<i32> {
    let mut fields: Vec<String> = args.fields.clone();
    if fields.is_empty() {
        fields = ctx.file.fields.clone().unwrap_or_default();
    }
    if fields.is_empty() {
        bail!("at least one field token is required (--fields f11,f22,...)");
    }
    let grid = resolve_grid(ctx, &args.grid)?;
    let law = ctx.knobs.law_config();

    // Scan once per field, then interleave rows grid-major.
    let mut per_field = Vec::new();
    for token in &fields {
        let field = field_by_token(ctx.model.as_ref(), token)?;
        let outcomes = scan_energies(ctx.model.as_ref(), field.as_ref(), &grid, &law)?;
        per_field.push(outcomes);
    }

    let config = ctx.config_json(json!({
        "fields": fields,
        "energies": grid.iter().map(|&e| json_float(e)).collect::<Vec<_>>(),
    }));
    let columns = vec![
        "E",
        "field",
        "kT",
        "kT_err",
        "lhs_time",
        "lhs_time_err",
        "lhs_ens",
        "lhs_ens_err",
        "rhs",
        "rhs_err",
        "tolman",
        "resid_intrinsic",
        "resid_tolman",
        "smooth",
    ];
    let mut doc = TableDoc::new("scan", config, ctx.knobs.seed, columns);
    let mut failures = 0usize;
    // Grid-major row order; per_field[fi][gi] lines up with grid[gi].
    for (gi, _e) in grid.iter().enumerate() {
        let mut warned_skip = false;
        for (fi, token) in fields.iter().enumerate() {
            match &per_field[fi][gi] {
                ScanOutcome::Report(report) => {
                    let (kt, kt_err) = estimate_cells(&report.kt);
                    let lhs_time = report.lhs_time.as_ref();
                    let (ens, ens_err) = estimate_cells(&report.lhs_ensemble);
                    let (rhs, rhs_err) = estimate_cells(&report.rhs_intrinsic);
                    doc.push_data(
                        vec![
                            fmt_float(report.e),
                            report.field.clone(),
                            kt,
                            kt_err,
                            fmt_opt(lhs_time.map(|t| t.value)),
                            fmt_opt(lhs_time.map(|t| t.std_error)),
                            ens,
                            ens_err,
                            rhs,
                            rhs_err,
                            fmt_opt(report.tolman_value),
                            fmt_float(report.residual_intrinsic),
                            fmt_opt(report.residual_tolman),
                            report.field_smooth_on_me.to_string(),
                        ],
                        json!({
                            "E": json_float(report.e),
                            "field": report.field,
                            "kT": json_float(report.kt.value),
                            "kT_err": json_float(report.kt.std_error),
                            "lhs_time": json_opt(lhs_time.map(|t| t.value)),
                            "lhs_time_err": json_opt(lhs_time.map(|t| t.std_error)),
                            "lhs_ens": json_float(report.lhs_ensemble.value),
                            "lhs_ens_err": json_float(report.lhs_ensemble.std_error),
                            "rhs": json_float(report.rhs_intrinsic.value),
                            "rhs_err": json_float(report.rhs_intrinsic.std_error),
                            "tolman": json_opt(report.tolman_value),
                            "resid_intrinsic": json_float(report.residual_intrinsic),
                            "resid_tolman": json_opt(report.residual_tolman),
                            "smooth": report.field_smooth_on_me,
                        }),
                    );
                }
                ScanOutcome::Skipped { e, reason } => {
                    // One warning per grid energy, not one per field.
                    if !warned_skip {
                        doc.push_warning(format!("E={} skipped ({reason})", fmt_float(*e)));
                        warned_skip = true;
                    }
                }
                ScanOutcome::Failed { e, reason } => {
                    failures += 1;
                    doc.push_warning(format!(
                        "E={} field={token} failed ({reason})",
                        fmt_float(*e)
                    ));
                }
            }
        }
    }
    ctx.write_table(&doc)?;
    Ok(if failures > 0 { 1 } else { 0 })
}

fn cmd_volumes(ctx: &Ctx, args: &GridArgs) -> Result<i32> {
    let grid = resolve_grid(ctx, &args.grid)?;
    let curve = volume_curve(ctx.model.as_ref(), &grid, &ctx.knobs.mc_config())?;
    let config = ctx.config_json(json!({
        "energies": grid.iter().map(|&e| json_float(e)).collect::<Vec<_>>(),
    }));
    let columns = vec![
        "E",
        "vol_me",
        "vol_me_err",
        "vol_sigma",
        "vol_sigma_err",
        "kT",
        "kT_err",
    ];
    let mut doc = TableDoc::new("volumes", config, ctx.knobs.seed, columns);
    for row in &curve.rows {
        if let Some(warning) = &row.warning {
            doc.push_warning(format!("E={}: {warning}", fmt_float(row.e)));
        }
        doc.push_data(
            vec![
                fmt_float(row.e),
                fmt_float(row.vol_me.value),
                fmt_float(row.vol_me.std_error),
                fmt_opt(row.vol_sigma.as_ref().map(|s| s.value)),
                fmt_opt(row.vol_sigma.as_ref().map(|s| s.std_error)),
                fmt_opt(row.kt.as_ref().map(|t| t.value)),
                fmt_opt(row.kt.as_ref().map(|t| t.std_error)),
            ],
            json!({
                "E": json_float(row.e),
                "vol_me": json_float(row.vol_me.value),
                "vol_me_err": json_float(row.vol_me.std_error),
                "vol_sigma": json_opt(row.vol_sigma.as_ref().map(|s| s.value)),
                "vol_sigma_err": json_opt(row.vol_sigma.as_ref().map(|s| s.std_error)),
                "kT": json_opt(row.kt.as_ref().map(|t| t.value)),
                "kT_err": json_opt(row.kt.as_ref().map(|t| t.std_error)),
                "warning": row.warning.clone().map(Value::String).unwrap_or(Value::Null),
            }),
        );
    }
    ctx.write_table(&doc)?;
    Ok(0)
}

fn cmd_correction(ctx: &Ctx, args: &CorrectionArgs) -> Result<i32> {
    let e = args
        .e
        .or(ctx.file.e)
        .ok_or_else(|| anyhow!("--e is required for the correction check"))?;
    let delta_e = args
        .delta_e
        .or(ctx.file.delta_e)
        .ok_or_else(|| anyhow!("--delta-e is required for the correction check"))?;
    let check = correction_identity(ctx.model.as_ref(), e, delta_e, &ctx.knobs.mc_config())?;
    let config = ctx.config_json(json!({
        "e": json_float(e),
        "delta_e": json_float(delta_e),
    }));
    let doc = ObjectDoc {
        command: "correction".to_string(),
        config,
        seed: ctx.knobs.seed,
        body: json!({
            "e": json_float(check.e),
            "delta_e": json_float(check.delta_e),
            "lhs": json_float(check.lhs),
            "rhs": json_float(check.rhs),
            "delta_p": json_float(check.delta_p),
            "vol_band": json_float(check.vol_band),
            "rel_gap": json_float(check.rel_gap),
            "kT": json_float(check.kt),
        }),
    };
    ctx.write_object(&doc)?;
    Ok(0)
}

fn resolve_orbit_component(
    model: &dyn HamiltonianModel,
    e: f64,
    explicit: Option<&str>,
) -> Result<Component> {
    if let Some(text) = explicit {
        return Ok(text.parse::<Component>()?);
    }
    match model.list_components(e) {
        Ok(components) => Ok(components[0]),
        // Ground state and guard bands still admit the oscillation branch.
        Err(_) => Ok(Component::Oscillation),
    }
}

/// Harmonic estimate of the bottom-of-well period, for orbits where the
/// period quadrature is unavailable (ground state, guard bands).
fn fallback_period(model: &dyn HamiltonianModel) -> Option<f64> {
    let od = model.one_dof()?;
    let delta = 1e-4;
    let v2 = (od.dpotential(delta) - od.dpotential(-delta)) / (2.0 * delta);
    (v2 > 0.0).then(|| 2.0 * std::f64::consts::PI * (od.inertia() / v2).sqrt())
}

fn cmd_orbit(ctx: &Ctx, args: &OrbitArgs) -> Result<i32> {
    let e = args
        .e
        .or(ctx.file.e)
        .ok_or_else(|| anyhow!("--e is required for an orbit dump"))?;
    let component = resolve_orbit_component(
        ctx.model.as_ref(),
        e,
        args.component.as_deref().or(ctx.file.component.as_deref()),
    )?;
    let x0 = ctx.model.initial_state_on_shell(e, component)?;
    let period = orbit_period(ctx.model.as_ref(), e, component)
        .ok()
        .or_else(|| fallback_period(ctx.model.as_ref()));
    let h = match args.h.or(ctx.file.h) {
        Some(h) => h,
        None => {
            period.ok_or_else(|| anyhow!("no period available at E={e}; pass an explicit --h"))?
                / ctx.knobs.h_divisor
        }
    };
    let t_end = match args.t_end.or(ctx.file.t_end) {
        Some(t) => t,
        None => {
            3.0 * period
                .ok_or_else(|| anyhow!("no period available at E={e}; pass an explicit --t-end"))?
        }
    };
    let record = integrate_orbit(ctx.model.as_ref(), &x0, t_end, h)?;

    let config = ctx.config_json(json!({
        "e": json_float(e),
        "component": component.as_str(),
        "t_end": json_float(t_end),
        "h": json_float(h),
    }));
    let columns = vec!["t", "q", "p", "H"];
    let mut doc = TableDoc::new("orbit", config, ctx.knobs.seed, columns);
    for (state, &t) in record.states.iter().zip(&record.times) {
        let energy = ctx.model.energy(state)?;
        doc.push_data(
            vec![
                fmt_float(t),
                fmt_float(state.q()[0]),
                fmt_float(state.p()[0]),
                fmt_float(energy),
            ],
            json!({
                "t": json_float(t),
                "q": json_float(state.q()[0]),
                "p": json_float(state.p()[0]),
                "H": json_float(energy),
            }),
        );
    }
    doc.trailers.push(format!(
        "max_energy_drift: {}",
        fmt_float(record.max_energy_drift)
    ));
    doc.trailers
        .push(format!("drift_warning: {}", record.drift_warning));
    ctx.write_table(&doc)?;
    Ok(0)
}

fn cmd_counterexample(ctx: &Ctx, args: &CounterexampleArgs) -> Result<i32> {
    let omega1 = args.omega1.or(ctx.file.omega1).unwrap_or(1.0);
    let omega2 = args.omega2.or(ctx.file.omega2).unwrap_or(1.0);
    let e = args.e.or(ctx.file.e).unwrap_or(1.0);
    let table = action_angle_counterexample(omega1, omega2, e, &ctx.knobs.mc_config())?;
    let entry = |mu: usize, nu: usize| {
        let est = &table.entries[mu][nu];
        json!({
            "value": json_float(est.value),
            "std_error": json_float(est.std_error),
        })
    };
    let config = ctx.config_json(json!({
        "omega1": json_float(omega1),
        "omega2": json_float(omega2),
        "e": json_float(e),
    }));
    let doc = ObjectDoc {
        command: "counterexample".to_string(),
        config,
        seed: ctx.knobs.seed,
        body: json!({
            "omega1": json_float(table.omega[0]),
            "omega2": json_float(table.omega[1]),
            "e": json_float(table.e),
            "shell_thickness": json_float(table.shell_thickness),
            "entries": [
                [entry(0, 0), entry(0, 1)],
                [entry(1, 0), entry(1, 1)],
            ],
            "kT": {
                "value": json_float(table.kt.value),
                "std_error": json_float(table.kt.std_error),
            },
        }),
    };
    ctx.write_object(&doc)?;
    Ok(0)
}

fn run(cli: &Cli) -> Result<i32> {
    let ctx = Ctx::build(&cli.common)?;
    match &cli.command {
        Command::Scan(args) => cmd_scan(&ctx, args),
        Command::Volumes(args) => cmd_volumes(&ctx, args),
        Command::Correction(args) => cmd_correction(&ctx, args),
        Command::Orbit(args) => cmd_orbit(&ctx, args),
        Command::Counterexample(args) => cmd_counterexample(&ctx, args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(0) => ExitCode::SUCCESS,
        Ok(_) => ExitCode::FAILURE,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
