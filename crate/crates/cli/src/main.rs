use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::{Matrix2, Matrix4};
use serde::Serialize;

use combtangle::constants::to_mhz;
use combtangle::linear::solve_lyapunov;
use combtangle::oracle::{relative_frobenius, simulate_ensemble};
use combtangle::presets::{preset_caption, WignerJob};
use combtangle::readout::{joint_output_covariance, output_covariance};
use combtangle::report::{format_float, matrix_rows};
use combtangle::semiclassical::steady_state;
use combtangle::sweep::{evaluate_scenario, linearize, point_table, run_sweep, OutputGroup, Provenance, TOOL_NAME, TOOL_VERSION};
use combtangle::wigner::{all_marginals, pq_block};
use combtangle::{
    figure_preset, EnsembleSpec, Error, GridSpec, PresetJob, PresetOptions, Scenario, SweepAxis, SweepResult, SweepSpec,
};

const EXIT_SPEC: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser)]
#[command(name = "combtangle", version, about = "Steady-state correlations of a skyrmion-driven magnon frequency comb")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario TOML; the bundled reference scenario when omitted.
    #[arg(long, global = true)]
    scenario: Option<PathBuf>,
    /// Output file (directory for Wigner grids); stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Seed for the Monte Carlo oracle (0 when omitted).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for parallel evaluation.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Output {
    Entanglement,
    Nu,
    Steering,
    Occupation,
    Bogoliubov,
}

impl From<Output> for OutputGroup {
    fn from(o: Output) -> Self {
        match o {
            Output::Entanglement => OutputGroup::Entanglement,
            Output::Nu => OutputGroup::SymplecticEigenvalue,
            Output::Steering => OutputGroup::Steering,
            Output::Occupation => OutputGroup::Occupation,
            Output::Bogoliubov => OutputGroup::Bogoliubov,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Mean-field steady state of the driven comb.
    Steady,
    /// Correlations at the scenario's parameter point.
    Point {
        /// Append homodyne output covariances from the `[readout]` section.
        #[arg(long)]
        readout: bool,
    },
    /// Sweep one or two parameters around the scenario.
    Sweep {
        /// `name:start:stop:points`; repeat for a 2D grid (first axis slowest).
        #[arg(long = "axis", required = true)]
        axes: Vec<String>,
        /// Output groups; all when omitted.
        #[arg(long, value_enum, value_delimiter = ',')]
        outputs: Vec<Output>,
    },
    /// Two-tooth Wigner marginals on a grid.
    Wigner {
        #[arg(long, default_value_t = combtangle::wigner::DEFAULT_POINTS)]
        points: usize,
        /// Grid half-width in standard deviations.
        #[arg(long, default_value_t = combtangle::wigner::DEFAULT_EXTENT_SIGMAS)]
        extent: f64,
    },
    /// Monte Carlo estimate of the stationary covariance, checked against Lyapunov.
    Oracle {
        #[arg(long, default_value_t = 20_000)]
        trajectories: usize,
    },
    /// Reproduce a figure: fig2a..fig2d, fig3a, fig3b, fig4, fig5a, fig5b, fig6a, fig6b, fig7.
    Preset {
        name: String,
        /// `lo:hi` skyrmion damping range in MHz (required by fig4; suggested 1:60).
        #[arg(long)]
        kappa_r_range: Option<String>,
    },
}

/// Outcome of a command that ran to completion.
enum Outcome {
    Ok,
    /// Results were written but some points failed numerically.
    PointFailures(usize),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::PointFailures(n)) => {
            eprintln!("combtangle: numerical failure at {n} point(s); results written");
            ExitCode::from(EXIT_NUMERICAL)
        }
        Err(e) => {
            eprintln!("combtangle: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<SpecError>().is_some() {
        return EXIT_SPEC;
    }
    match e.downcast_ref::<Error>() {
        Some(
            Error::InvalidSpec(_)
            | Error::Domain(_)
            | Error::UnsupportedRegime(_)
            | Error::Adiabaticity { .. }
            | Error::UnknownMode(_),
        ) => EXIT_SPEC,
        Some(
            Error::NoSteadyState { .. } | Error::Divergence { .. } | Error::Solve(_) | Error::NonFiniteTrajectory { .. },
        ) => EXIT_NUMERICAL,
        _ => 1,
    }
}

/// A malformed command line or input that clap cannot catch.
#[derive(Debug)]
struct SpecError(String);

impl std::fmt::Display for SpecError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for SpecError {}

fn spec_error(msg: impl Into<String>) -> anyhow::Error {
    SpecError(msg.into()).into()
}

fn run(cli: Cli) -> anyhow::Result<Outcome> {
    let common = cli.common;
    if let Some(n) = common.threads {
        if n == 0 {
            return Err(spec_error("--threads must be positive"));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring the thread pool")?;
    }
    let scenario = load_scenario(common.scenario.as_deref())?;
    match cli.command {
        Command::Steady => cmd_steady(&common, &scenario),
        Command::Point { readout } => cmd_point(&common, &scenario, readout),
        Command::Sweep { axes, outputs } => cmd_sweep(&common, scenario, &axes, &outputs),
        Command::Wigner { points, extent } => {
            let job = WignerJob {
                name: "wigner".into(),
                scenario,
                grid: GridSpec { points, extent_sigmas: extent },
            };
            cmd_wigner(&common, &job)
        }
        Command::Oracle { trajectories } => cmd_oracle(&common, &scenario, trajectories),
        Command::Preset { name, kappa_r_range } => cmd_preset(&common, &name, kappa_r_range.as_deref()),
    }
}

fn load_scenario(path: Option<&Path>) -> anyhow::Result<Scenario> {
    match path {
        None => Ok(Scenario::paper_defaults()),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| spec_error(format!("reading {}: {e}", p.display())))?;
            Ok(Scenario::from_toml_str(&text).with_context(|| format!("loading {}", p.display()))?)
        }
    }
}

fn write_text(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> anyhow::Result<String> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text)
}

fn provenance(scenario: &Scenario, preset: Option<&str>, seed: Option<u64>) -> Provenance {
    Provenance {
        tool: TOOL_NAME,
        version: TOOL_VERSION,
        scenario_sha256: scenario.hash(),
        preset: preset.map(str::to_string),
        seed,
    }
}

/// Writes a header row and one record per row with the shared float format.
fn csv_text(header: &[&str], rows: &[Vec<String>]) -> anyhow::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| anyhow!("{e}"))?)?)
}

fn opt_float(x: Option<f64>) -> String {
    x.map(format_float).unwrap_or_default()
}

#[allow(non_snake_case)]
#[derive(Serialize)]
struct SteadyDoc {
    provenance: Provenance,
    state: combtangle::SemiclassicalState,
    G_p_mhz: f64,
    G_q_mhz: f64,
}

#[allow(non_snake_case)]
fn cmd_steady(common: &Common, scenario: &Scenario) -> anyhow::Result<Outcome> {
    let params = scenario.params();
    let state = steady_state(&params)?;
    let amp = state.mean_k.norm();
    let (G_p_mhz, G_q_mhz) = (to_mhz(params.g_p * amp), to_mhz(params.g_q * amp));
    let text = match common.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&SteadyDoc { provenance: provenance(scenario, None, None), state, G_p_mhz, G_q_mhz })?,
        Format::Csv => {
            let mut header = vec!["regime", "threshold_mhz", "near_threshold"];
            let mut row = vec![
                state.regime.tag().to_string(),
                opt_float(state.threshold.is_finite().then(|| to_mhz(state.threshold))),
                state.near_threshold.to_string(),
            ];
            let names = [("k", state.mean_k), ("r", state.mean_r), ("p", state.mean_p), ("q", state.mean_q)];
            let labels: Vec<(String, String)> =
                names.iter().map(|(m, _)| (format!("abs_{m}"), format!("arg_{m}"))).collect();
            for ((_, z), (a, b)) in names.iter().zip(&labels) {
                header.push(a);
                header.push(b);
                row.push(format_float(z.norm()));
                row.push(format_float(z.arg()));
            }
            header.extend(["G_p_mhz", "G_q_mhz"]);
            row.extend([format_float(G_p_mhz), format_float(G_q_mhz)]);
            csv_text(&header, &[row])?
        }
    };
    write_text(common.out.as_deref(), &text)?;
    Ok(Outcome::Ok)
}

#[derive(Serialize)]
struct ReadoutDoc {
    channel: combtangle::ReadoutChannel,
    gain: f64,
    warnings: Vec<String>,
    #[serde(serialize_with = "combtangle::report::serialize_rows")]
    output_p: Matrix2<f64>,
    #[serde(serialize_with = "combtangle::report::serialize_rows")]
    output_q: Matrix2<f64>,
    #[serde(serialize_with = "combtangle::report::serialize_rows")]
    output_pq: Matrix4<f64>,
}

/// Linearized dynamics at the point, in rad/s with rows in `mode_order`
/// quadrature order `(X, Y)` per mode.
#[derive(Serialize)]
struct LinearDoc {
    mode_order: Vec<combtangle::Mode>,
    drift: Vec<Vec<f64>>,
    diffusion: Vec<Vec<f64>>,
    /// `[re, im]` pairs, largest real part first.
    eigenvalues: Vec<[f64; 2]>,
    /// Eigenvalues of `V + iΩ/2`; all ≥ 0 for a physical state.
    #[serde(skip_serializing_if = "Option::is_none")]
    physicality_spectrum: Option<Vec<f64>>,
}

#[derive(Serialize)]
struct PointDoc<'a> {
    provenance: Provenance,
    scenario: &'a Scenario,
    result: &'a combtangle::PointResult,
    #[serde(skip_serializing_if = "Option::is_none")]
    linear: Option<LinearDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    readout: Option<ReadoutDoc>,
}

fn cmd_point(common: &Common, scenario: &Scenario, with_readout: bool) -> anyhow::Result<Outcome> {
    let result = evaluate_scenario(scenario);
    for w in &result.warnings {
        eprintln!("combtangle: warning: {w}");
    }
    let readout = if with_readout {
        let section = scenario.readout.clone().unwrap_or_default();
        let channel = section.channel();
        let warnings: Vec<String> = channel.check()?.into_iter().collect();
        let v = result
            .covariance
            .as_ref()
            .ok_or_else(|| spec_error("readout needs a stable below-threshold point"))?;
        let v_pq = pq_block(v)?;
        let block = |i: usize| v_pq.fixed_view::<2, 2>(i, i).into_owned();
        Some(ReadoutDoc {
            channel,
            gain: channel.gain(),
            warnings,
            output_p: output_covariance(&block(0), &channel)?,
            output_q: output_covariance(&block(2), &channel)?,
            output_pq: joint_output_covariance(&v_pq, &channel, &channel)?,
        })
    } else {
        None
    };
    let text = match common.format.unwrap_or(Format::Json) {
        Format::Json => {
            let linear = match linearize(&scenario.params(), scenario.direct_couplings().as_ref()) {
                Ok((_, _, Some(dd))) => Some(LinearDoc {
                    mode_order: dd.mode_order.clone(),
                    drift: matrix_rows(&dd.drift),
                    diffusion: matrix_rows(&dd.diffusion),
                    eigenvalues: dd.eigenvalues().iter().map(|z| [z.re, z.im]).collect(),
                    physicality_spectrum: result.covariance.as_ref().map(|v| v.physicality_spectrum()),
                }),
                _ => None,
            };
            let doc = PointDoc { provenance: provenance(scenario, None, None), scenario, result: &result, linear, readout };
            to_json(&doc)?
        }
        Format::Csv => {
            if with_readout {
                return Err(spec_error("--readout output is only available with --format json"));
            }
            point_table(scenario, &result, &OutputGroup::ALL).to_csv_string()
        }
    };
    write_text(common.out.as_deref(), &text)?;
    Ok(if result.failed() { Outcome::PointFailures(1) } else { Outcome::Ok })
}

fn write_sweep(common: &Common, res: &SweepResult) -> anyhow::Result<Outcome> {
    let text = match common.format.unwrap_or(Format::Csv) {
        Format::Csv => res.to_csv_string(),
        Format::Json => {
            let mut t = res.to_json_string();
            t.push('\n');
            t
        }
    };
    write_text(common.out.as_deref(), &text)?;
    Ok(if res.failures > 0 { Outcome::PointFailures(res.failures) } else { Outcome::Ok })
}

fn cmd_sweep(common: &Common, scenario: Scenario, axes: &[String], outputs: &[Output]) -> anyhow::Result<Outcome> {
    let axes = axes.iter().map(|a| SweepAxis::parse(a)).collect::<Result<Vec<_>, _>>()?;
    let mut spec = SweepSpec::new(scenario, axes);
    if !outputs.is_empty() {
        spec.outputs = outputs.iter().map(|&o| o.into()).collect();
    }
    write_sweep(common, &run_sweep(&spec)?)
}

#[derive(Serialize)]
struct WignerSidecar<'a> {
    provenance: Provenance,
    caption: String,
    grid: GridSpec,
    #[serde(serialize_with = "combtangle::report::serialize_rows")]
    covariance_pq: Matrix4<f64>,
    marginals: Vec<MarginalMeta<'a>>,
}

#[derive(Serialize)]
struct MarginalMeta<'a> {
    file: String,
    axis1: &'a str,
    axis2: &'a str,
    #[serde(serialize_with = "combtangle::report::serialize_rows")]
    covariance: Matrix2<f64>,
    contour_1e: combtangle::wigner::Ellipse,
    vacuum_radius: f64,
    squeezed: bool,
    integral: f64,
}

fn cmd_wigner(common: &Common, job: &WignerJob) -> anyhow::Result<Outcome> {
    let dir = common
        .out
        .as_deref()
        .ok_or_else(|| spec_error("wigner output needs --out <directory>"))?;
    if common.format == Some(Format::Json) {
        return Err(spec_error("wigner grids are written as CSV with a JSON sidecar; --format json is not supported"));
    }
    let point = evaluate_scenario(&job.scenario);
    let v = match (&point.covariance, &point.error) {
        (Some(v), _) => v.clone(),
        (None, Some(e)) => bail!(Error::Solve(e.clone())),
        (None, None) => return Err(spec_error("Wigner marginals need a stable below-threshold point")),
    };
    let v_pq = pq_block(&v)?;
    let grids = all_marginals(&v_pq, job.grid)?;
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut marginals = Vec::new();
    for g in &grids {
        let file = format!("{}_{}_{}.csv", job.name, g.axes.0.label(), g.axes.1.label());
        let mut rows = Vec::with_capacity(g.axis1.len() * g.axis2.len());
        for (i, &x) in g.axis1.iter().enumerate() {
            for (j, &y) in g.axis2.iter().enumerate() {
                rows.push(vec![format_float(x), format_float(y), format_float(g.values[i][j])]);
            }
        }
        fs::write(dir.join(&file), csv_text(&["axis1", "axis2", "density"], &rows)?)?;
        marginals.push(MarginalMeta {
            file,
            axis1: g.axes.0.label(),
            axis2: g.axes.1.label(),
            covariance: g.covariance,
            contour_1e: g.contour_1e,
            vacuum_radius: g.vacuum_radius,
            squeezed: g.squeezed,
            integral: g.integral(),
        });
    }
    let sidecar = WignerSidecar {
        provenance: provenance(&job.scenario, Some(&job.name), None),
        caption: preset_caption(&PresetJob::Wigner(job.clone())),
        grid: job.grid,
        covariance_pq: v_pq,
        marginals,
    };
    fs::write(dir.join(format!("{}.json", job.name)), to_json(&sidecar)?)?;
    Ok(Outcome::Ok)
}

#[derive(Serialize)]
struct OracleDoc {
    provenance: Provenance,
    spec: EnsembleSpec,
    estimate: combtangle::EnsembleEstimate,
    lyapunov: combtangle::CovarianceMatrix,
    relative_frobenius: f64,
}

fn cmd_oracle(common: &Common, scenario: &Scenario, trajectories: usize) -> anyhow::Result<Outcome> {
    let seed = common.seed.unwrap_or(0);
    let (_, _, dd) = linearize(&scenario.params(), scenario.direct_couplings().as_ref())?;
    let dd = dd.ok_or_else(|| spec_error("the oracle needs a below-threshold point"))?;
    let exact = solve_lyapunov(&dd)?.covariance;
    let spec = EnsembleSpec::for_drift(&dd, trajectories, seed)?;
    let estimate = simulate_ensemble(&dd, &spec)?;
    let rel = relative_frobenius(&estimate.covariance.matrix, &exact.matrix);
    let text = match common.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&OracleDoc {
            provenance: provenance(scenario, None, Some(seed)),
            spec,
            estimate,
            lyapunov: exact,
            relative_frobenius: rel,
        })?,
        Format::Csv => {
            let n = exact.matrix.nrows();
            let quad = |k: usize| format!("{}_{}", if k.is_multiple_of(2) { "X" } else { "Y" }, exact.mode_order[k / 2]);
            let mc = matrix_rows(&estimate.covariance.matrix);
            let se = matrix_rows(&estimate.standard_error);
            let ly = matrix_rows(&exact.matrix);
            let mut rows = Vec::new();
            for i in 0..n {
                for j in i..n {
                    rows.push(vec![quad(i), quad(j), format_float(mc[i][j]), format_float(se[i][j]), format_float(ly[i][j])]);
                }
            }
            csv_text(&["row", "col", "monte_carlo", "standard_error", "lyapunov"], &rows)?
        }
    };
    write_text(common.out.as_deref(), &text)?;
    eprintln!("combtangle: relative Frobenius deviation {}", format_float(rel));
    Ok(Outcome::Ok)
}

fn parse_range(text: &str) -> anyhow::Result<(f64, f64)> {
    let bad = || spec_error(format!("expected lo:hi in MHz, got {text:?}"));
    let (lo, hi) = text.split_once(':').ok_or_else(bad)?;
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && hi > lo) {
        return Err(bad());
    }
    Ok((lo, hi))
}

fn cmd_preset(common: &Common, name: &str, kappa_r_range: Option<&str>) -> anyhow::Result<Outcome> {
    if common.scenario.is_some() {
        return Err(spec_error("presets carry their own scenario; drop --scenario"));
    }
    let opts = PresetOptions { kappa_r_range_mhz: kappa_r_range.map(parse_range).transpose()? };
    let job = figure_preset(name, &opts)?;
    eprintln!("combtangle: {name}: {}", preset_caption(&job));
    match job {
        PresetJob::Sweep(spec) => write_sweep(common, &run_sweep(&spec)?),
        PresetJob::Wigner(w) => cmd_wigner(common, &w),
    }
}
