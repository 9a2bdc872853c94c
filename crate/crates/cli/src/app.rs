//! Subcommand definitions and their runners.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use qdp_core::bethe::RingPairPropagator;
use qdp_core::harper::{detector_frames, fidelity_frames, spread_metric, HarperSpec};
use qdp_core::oracle::{build_hamiltonian, evolve, mask_of, DenseState, Ensemble, Sector};
use qdp_core::protocols::{
    fill_grid, fill_grid_with, time_range, ProjectiveQdp, Scenario, UnitaryQdp,
};
use qdp_core::{
    convention_hash, green1, Boundary, ChainSpec, Gate, GreenMethod, InitialState, QdpEvent,
};
use serde_json::{json, Value};

use crate::config::{as_args, parse_config};
use crate::error::CliError;
use crate::grid_csv::write_grid;

pub const FORMAT_VERSION: u32 = 1;
const CALIBRATION_TOL: f64 = 1e-10;
const ORACLE_TOL: f64 = 1e-8;

#[derive(Debug, Parser)]
#[command(
    name = "qdp",
    version,
    about = "Spin-chain state transfer with a local quantum dynamical process"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BoundaryArg {
    Open,
    Closed,
}

impl From<BoundaryArg> for Boundary {
    fn from(b: BoundaryArg) -> Self {
        match b {
            BoundaryArg::Open => Boundary::Open,
            BoundaryArg::Closed => Boundary::Closed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Quantity {
    /// Fidelity with the event minus the free fidelity.
    Difference,
    /// Fidelity with the event.
    Fidelity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    /// Bessel forms from 100 sites up where they exist, mode sums otherwise.
    Auto,
    Bessel,
    MomentumSum,
}

impl MethodArg {
    fn resolve(self, spec: &ChainSpec) -> GreenMethod {
        match self {
            MethodArg::Bessel => GreenMethod::Bessel,
            MethodArg::MomentumSum => GreenMethod::MomentumSum,
            MethodArg::Auto => {
                let has_bessel = spec.boundary() == Boundary::Closed
                    || spec.delta() == 0.0
                    || spec.delta() == 1.0;
                if spec.n() >= 100 && has_bessel {
                    GreenMethod::Bessel
                } else {
                    GreenMethod::MomentumSum
                }
            }
        }
    }
}

fn method_name(m: GreenMethod) -> &'static str {
    match m {
        GreenMethod::Bessel => "bessel",
        GreenMethod::MomentumSum => "momentum_sum",
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PartArg {
    Bound,
    Scattering,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Output CSV; a `.meta.json` sidecar is written next to it. Stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// `key = value` file with long flag names as keys; flags on the command line win.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Worker threads for grid cells (output does not depend on it).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Pass threshold for checks; echoed in metadata elsewhere.
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct ChainArgs {
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    #[arg(long, value_enum, default_value_t = BoundaryArg::Open)]
    pub boundary: BoundaryArg,
    #[arg(long, default_value_t = 0.5)]
    pub j: f64,
    #[arg(long, default_value_t = 1.0)]
    pub delta: f64,
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    #[arg(long, default_value_t = 1)]
    pub l_min: usize,
    /// Defaults to the chain length.
    #[arg(long)]
    pub l_max: Option<usize>,
    #[arg(long, default_value_t = 0.0)]
    pub t_min: f64,
    #[arg(long, alias = "tmax", default_value_t = 100.0)]
    pub t_max: f64,
    #[arg(long, default_value_t = 0.25)]
    pub dt: f64,
}

#[derive(Debug, Clone, Args)]
pub struct EventArgs {
    #[arg(long)]
    pub site: usize,
    #[arg(long)]
    pub t0: f64,
}

#[derive(Debug, Clone, Args)]
pub struct GateArgs {
    #[arg(long, default_value_t = 0.0)]
    pub gamma_abs: f64,
    #[arg(long, default_value_t = 1.0)]
    pub delta_abs: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub delta_phase: f64,
}

#[derive(Debug, Clone, Args)]
pub struct HarperArgs {
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    #[arg(long, value_enum, default_value_t = BoundaryArg::Open)]
    pub boundary: BoundaryArg,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub g: f64,
    #[arg(long, default_value_t = 0.1)]
    pub tau: f64,
    #[arg(long, default_value_t = std::f64::consts::SQRT_2)]
    pub eta: f64,
    #[arg(long, default_value_t = 500)]
    pub kicks: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Bloch-averaged transfer fidelity without any event.
    #[command(args_override_self = true)]
    Fidelity {
        #[command(flatten)]
        chain: ChainArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
        method: MethodArg,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Projective measurement at one site and time.
    #[command(args_override_self = true)]
    QdpDiff {
        #[command(flatten)]
        chain: ChainArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        event: EventArgs,
        #[arg(long, value_enum, default_value_t = Quantity::Difference)]
        quantity: Quantity,
        #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
        method: MethodArg,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Single-site gate at one site and time.
    #[command(args_override_self = true)]
    UnitaryQdp {
        #[command(flatten)]
        chain: ChainArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        event: EventArgs,
        #[command(flatten)]
        gate: GateArgs,
        #[arg(long, value_enum, default_value_t = Quantity::Difference)]
        quantity: Quantity,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Two-magnon fidelity weight from bound or scattering pairs only.
    #[command(args_override_self = true)]
    TwoMagnonSplit {
        #[command(flatten)]
        chain: ChainArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        event: EventArgs,
        #[command(flatten)]
        gate: GateArgs,
        #[arg(long, value_enum)]
        part: PartArg,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Kicked Harper chain: per-state fidelity by site and kick count.
    #[command(args_override_self = true)]
    Harper {
        #[command(flatten)]
        harper: HarperArgs,
        #[arg(long, default_value_t = 0.75)]
        alpha2: f64,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Kicked Harper chain: occupation change caused by a measurement.
    #[command(args_override_self = true)]
    Detector {
        #[command(flatten)]
        harper: HarperArgs,
        #[arg(long, default_value_t = 1)]
        qdp_site: usize,
        #[arg(long, default_value_t = 5)]
        qdp_kick: usize,
        #[arg(long, default_value_t = 0.5)]
        alpha2: f64,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Compares the analytic pipelines with dense evolution on a short chain.
    #[command(args_override_self = true)]
    OracleCheck {
        #[arg(long, default_value_t = 12)]
        n: usize,
        #[arg(long, value_enum, default_value_t = BoundaryArg::Open)]
        boundary: BoundaryArg,
        #[arg(long, default_value_t = 0.5)]
        j: f64,
        #[arg(long, default_value_t = 1.0)]
        delta: f64,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Re-derives the sign and unit conventions against dense evolution.
    #[command(args_override_self = true)]
    Calibrate {
        #[command(flatten)]
        run: RunArgs,
    },
}

impl Command {
    fn run_args(&self) -> &RunArgs {
        match self {
            Command::Fidelity { run, .. }
            | Command::QdpDiff { run, .. }
            | Command::UnitaryQdp { run, .. }
            | Command::TwoMagnonSplit { run, .. }
            | Command::Harper { run, .. }
            | Command::Detector { run, .. }
            | Command::OracleCheck { run, .. }
            | Command::Calibrate { run } => run,
        }
    }
}

/// Artifact of one run: the primary file plus its metadata.
#[derive(Debug, Clone)]
pub struct Output {
    pub body: String,
    pub metadata: Value,
    /// Checks that did not meet their tolerance.
    pub failed: bool,
}

#[derive(Debug)]
pub enum ArgError {
    Clap(clap::Error),
    Run(CliError),
}

/// Parses `argv`, folding in a config file if one is named. Config entries are
/// inserted before the command-line flags so the later flags override them.
pub fn parse_args<I, T>(argv: I) -> Result<Cli, ArgError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    // The config may supply required options, so find it before clap validates anything.
    let Some(path) = config_path(&argv) else {
        return Cli::try_parse_from(&argv).map_err(ArgError::Clap);
    };
    let text = std::fs::read_to_string(&path).map_err(|e| {
        ArgError::Run(CliError::Io(format!(
            "cannot read config {}: {e}",
            path.display()
        )))
    })?;
    let entries = parse_config(&text).map_err(ArgError::Run)?;
    let mut merged: Vec<OsString> = argv[..2].to_vec();
    merged.extend(as_args(&entries).into_iter().map(OsString::from));
    merged.extend(argv[2..].iter().cloned());
    Cli::try_parse_from(merged).map_err(ArgError::Clap)
}

/// Last `--config` value after the subcommand, if any.
fn config_path(argv: &[OsString]) -> Option<PathBuf> {
    let mut found = None;
    let mut rest = argv.iter().skip(2);
    while let Some(arg) = rest.next() {
        let arg = arg.to_string_lossy();
        if arg == "--" {
            break;
        } else if arg == "--config" {
            found = rest.next().map(PathBuf::from);
        } else if let Some(v) = arg.strip_prefix("--config=") {
            found = Some(PathBuf::from(v));
        }
    }
    found
}

fn chain_spec(c: &ChainArgs) -> Result<ChainSpec, CliError> {
    Ok(ChainSpec::new(c.n, c.boundary.into(), c.j, c.delta)?)
}

fn chain_echo(c: &ChainArgs) -> Value {
    json!({"n": c.n, "boundary": Boundary::from(c.boundary).to_string(), "j": c.j, "delta": c.delta})
}

fn lattice(spec: &ChainSpec, g: &GridArgs) -> Result<(Vec<usize>, Vec<f64>), CliError> {
    let l_max = g.l_max.unwrap_or(spec.n());
    if g.l_min == 0 || g.l_min > l_max || l_max > spec.n() {
        return Err(CliError::Config(format!(
            "site range {}..={} outside 1..={}",
            g.l_min,
            l_max,
            spec.n()
        )));
    }
    let times = time_range(g.t_min, g.t_max, g.dt)?;
    Ok(((g.l_min..=l_max).collect(), times))
}

fn grid_echo(g: &GridArgs, sites: &[usize]) -> Value {
    json!({"l_min": sites[0], "l_max": sites[sites.len() - 1], "t_min": g.t_min, "t_max": g.t_max, "dt": g.dt})
}

fn gate(g: &GateArgs) -> Result<Gate, CliError> {
    Ok(Gate::from_abs_phase(
        g.gamma_abs,
        g.delta_abs,
        g.delta_phase,
    )?)
}

fn harper_spec(h: &HarperArgs) -> Result<HarperSpec, CliError> {
    Ok(HarperSpec::new(h.n, h.g, h.eta, h.tau, h.boundary.into())?)
}

fn harper_echo(h: &HarperArgs) -> Value {
    json!({"n": h.n, "boundary": Boundary::from(h.boundary).to_string(), "g": h.g, "tau": h.tau, "eta": h.eta, "kicks": h.kicks})
}

fn metadata(
    command: &str,
    parameters: Value,
    tolerances: Value,
    quadrature: Value,
    summary: Value,
) -> Value {
    json!({
        "tool": "qdp",
        "version": env!("CARGO_PKG_VERSION"),
        "format_version": FORMAT_VERSION,
        "command": command,
        "parameters": parameters,
        "convention_hash": convention_hash(),
        "tolerances": tolerances,
        "quadrature": quadrature,
        "csv": {"header": crate::grid_csv::HEADER, "order": "t outer, l inner", "digits": 12},
        "summary": summary,
    })
}

fn grid_summary(sites: &[usize], times: &[f64], values: &[f64]) -> Value {
    let best = values
        .iter()
        .enumerate()
        .filter(|(_, v)| v.is_finite())
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(
            |(i, &v)| json!({"value": v, "l": sites[i % sites.len()], "t": times[i / sites.len()]}),
        );
    json!({"cells": values.len(), "max": best, "total": values.iter().sum::<f64>()})
}

fn grid_output(
    command: &str,
    params: Value,
    tolerances: Value,
    quadrature: Value,
    sites: &[usize],
    times: &[f64],
    values: &[f64],
) -> Output {
    let summary = grid_summary(sites, times, values);
    Output {
        body: write_grid(sites, times, values),
        metadata: metadata(command, params, tolerances, quadrature, summary),
        failed: false,
    }
}

fn one_magnon_tolerance(method: GreenMethod) -> Value {
    match method {
        GreenMethod::MomentumSum => json!({"one_magnon": "exact mode sum", "unitarity": 1e-10}),
        GreenMethod::Bessel => {
            json!({"one_magnon": "Bessel series, long-chain form", "series_tail": 1e-12})
        }
    }
}

fn unitary_quadrature(spec: &ChainSpec, gate: &Gate, t0: f64, t_max: f64) -> Value {
    if gate.delta == Complex64::new(0.0, 0.0) {
        return Value::Null;
    }
    let res = RingPairPropagator::resolution_for(spec, (t_max - t0).max(0.0));
    serde_json::to_value(res).expect("resolution serializes")
}

pub fn execute(command: &Command) -> Result<Output, CliError> {
    let tol = command.run_args().tol;
    match command {
        Command::Fidelity {
            chain,
            grid,
            method,
            ..
        } => {
            let spec = chain_spec(chain)?;
            let (sites, times) = lattice(&spec, grid)?;
            let method = method.resolve(&spec);
            let g = fill_grid_with(
                &spec,
                Scenario::Free,
                &QdpEvent::none(),
                &sites,
                &times,
                method,
            )?;
            let params = json!({"chain": chain_echo(chain), "grid": grid_echo(grid, &sites), "method": method_name(method)});
            Ok(grid_output(
                "fidelity",
                params,
                one_magnon_tolerance(method),
                Value::Null,
                &sites,
                &times,
                &g.values,
            ))
        }
        Command::QdpDiff {
            chain,
            grid,
            event,
            quantity,
            method,
            ..
        } => {
            let spec = chain_spec(chain)?;
            let method = method.resolve(&spec);
            let (sites, times) = lattice(&spec, grid)?;
            let ev = QdpEvent::projective(event.site, event.t0)?;
            let scenario = match quantity {
                Quantity::Difference => Scenario::Difference,
                Quantity::Fidelity => Scenario::ProjectiveQdp,
            };
            let g = fill_grid_with(&spec, scenario, &ev, &sites, &times, method)?;
            let params = json!({
                "chain": chain_echo(chain),
                "grid": grid_echo(grid, &sites),
                "site": event.site,
                "t0": event.t0,
                "quantity": format!("{quantity:?}").to_lowercase(),
                "method": method_name(method),
            });
            Ok(grid_output(
                "qdp-diff",
                params,
                one_magnon_tolerance(method),
                Value::Null,
                &sites,
                &times,
                &g.values,
            ))
        }
        Command::UnitaryQdp {
            chain,
            grid,
            event,
            gate: gate_args,
            quantity,
            ..
        } => {
            let spec = chain_spec(chain)?;
            let (sites, times) = lattice(&spec, grid)?;
            let gate = gate(gate_args)?;
            let ev = QdpEvent::local_unitary(event.site, event.t0, gate)?;
            let scenario = match quantity {
                Quantity::Difference => Scenario::Difference,
                Quantity::Fidelity => Scenario::UnitaryQdp,
            };
            let g = fill_grid(&spec, scenario, &ev, &sites, &times)?;
            let params = json!({
                "chain": chain_echo(chain),
                "grid": grid_echo(grid, &sites),
                "site": event.site,
                "t0": event.t0,
                "gate": {"gamma_abs": gate_args.gamma_abs, "delta_abs": gate_args.delta_abs, "delta_phase": gate_args.delta_phase},
                "quantity": format!("{quantity:?}").to_lowercase(),
            });
            let quad = unitary_quadrature(&spec, &gate, event.t0, grid.t_max);
            Ok(grid_output(
                "unitary-qdp",
                params,
                json!({"two_magnon": "quadrature, see resolution", "tol": tol}),
                quad,
                &sites,
                &times,
                &g.values,
            ))
        }
        Command::TwoMagnonSplit {
            chain,
            grid,
            event,
            gate: gate_args,
            part,
            ..
        } => {
            let spec = chain_spec(chain)?;
            let (sites, times) = lattice(&spec, grid)?;
            let gate = gate(gate_args)?;
            let ev = QdpEvent::local_unitary(event.site, event.t0, gate)?;
            let scenario = match part {
                PartArg::Bound => Scenario::SplitBound,
                PartArg::Scattering => Scenario::SplitScattering,
            };
            let g = fill_grid(&spec, scenario, &ev, &sites, &times)?;
            let params = json!({
                "chain": chain_echo(chain),
                "grid": grid_echo(grid, &sites),
                "site": event.site,
                "t0": event.t0,
                "gate": {"gamma_abs": gate_args.gamma_abs, "delta_abs": gate_args.delta_abs, "delta_phase": gate_args.delta_phase},
                "part": format!("{part:?}").to_lowercase(),
            });
            let quad = unitary_quadrature(&spec, &gate, event.t0, grid.t_max);
            Ok(grid_output(
                "two-magnon-split",
                params,
                json!({"two_magnon": "quadrature, see resolution", "tol": tol}),
                quad,
                &sites,
                &times,
                &g.values,
            ))
        }
        Command::Harper { harper, alpha2, .. } => {
            let spec = harper_spec(harper)?;
            let initial = InitialState::from_population(*alpha2)?;
            let rows = fidelity_frames(&spec, harper.kicks, &initial)?;
            let sites: Vec<usize> = (1..=spec.n()).collect();
            let kicks: Vec<f64> = (0..=harper.kicks).map(|k| k as f64).collect();
            let values: Vec<f64> = rows.into_iter().flatten().collect();
            let params =
                json!({"harper": harper_echo(harper), "alpha2": alpha2, "time_axis": "kick count"});
            Ok(grid_output(
                "harper",
                params,
                json!({"unitarity": 1e-12}),
                Value::Null,
                &sites,
                &kicks,
                &values,
            ))
        }
        Command::Detector {
            harper,
            qdp_site,
            qdp_kick,
            alpha2,
            ..
        } => {
            let spec = harper_spec(harper)?;
            let initial = InitialState::from_population(*alpha2)?;
            let frames = detector_frames(&spec, *qdp_site, *qdp_kick, harper.kicks, &initial)?;
            let sites: Vec<usize> = (1..=spec.n()).collect();
            let kicks: Vec<f64> = frames.iter().map(|f| f.kicks as f64).collect();
            let values: Vec<f64> = frames.iter().flat_map(|f| f.f.iter().copied()).collect();
            let threshold = tol.unwrap_or(1e-3);
            let passage = frames
                .iter()
                .position(|f| f.f[spec.n() - 1].abs() > threshold);
            let last = frames.last().expect("at least one frame");
            let width = spread_metric(&last.x_tilde).ok();
            let params = json!({
                "harper": harper_echo(harper),
                "qdp_site": qdp_site,
                "qdp_kick": qdp_kick,
                "alpha2": alpha2,
                "time_axis": "kick count",
            });
            let mut out = grid_output(
                "detector",
                params,
                json!({"sum_rule": 1e-10, "passage_threshold": threshold}),
                Value::Null,
                &sites,
                &kicks,
                &values,
            );
            out.metadata["summary"]["first_passage_far_end"] = json!(passage);
            out.metadata["summary"]["final_width"] = json!(width);
            Ok(out)
        }
        Command::OracleCheck {
            n,
            boundary,
            j,
            delta,
            ..
        } => {
            let spec = ChainSpec::new(*n, (*boundary).into(), *j, *delta)?;
            let tol = tol.unwrap_or(ORACLE_TOL);
            let report = oracle_check(&spec)?;
            let failed = report.values().any(|v| *v > tol);
            let params = json!({"chain": {"n": n, "boundary": Boundary::from(*boundary).to_string(), "j": j, "delta": delta}});
            Ok(Output {
                body: report_text(&report, tol),
                metadata: metadata(
                    "oracle-check",
                    params,
                    json!({"pass": tol}),
                    Value::Null,
                    json!(report),
                ),
                failed,
            })
        }
        Command::Calibrate { .. } => {
            let tol = tol.unwrap_or(CALIBRATION_TOL);
            let report = calibrate()?;
            let failed = report.values().any(|v| *v > tol);
            Ok(Output {
                body: report_text(&report, tol),
                metadata: metadata(
                    "calibrate",
                    json!({"n": 12, "boundary": "open", "j": 0.5, "delta": 1.0}),
                    json!({"pass": tol}),
                    Value::Null,
                    json!(report),
                ),
                failed,
            })
        }
    }
}

fn report_text(report: &BTreeMap<String, f64>, tol: f64) -> String {
    let mut s = String::from("check,max_abs_deviation,pass\n");
    for (k, v) in report {
        s.push_str(&format!(
            "{k},{},{}\n",
            crate::grid_csv::format_value(*v),
            *v <= tol
        ));
    }
    s
}

/// Largest deviation between mode sums and dense evolution on the calibration chain.
pub fn calibrate() -> Result<BTreeMap<String, f64>, CliError> {
    let spec = ChainSpec::with_defaults(12, Boundary::Open)?;
    let h = build_hamiltonian(&spec, Sector::Excitations(1))?;
    let mut worst = 0.0f64;
    let mut nearest = 0.0f64;
    for t in [0.5, 1.0, 2.0, 5.0] {
        for x in 1..=12 {
            let s = DenseState::from_amplitudes(
                h.basis(),
                &[(mask_of(&[x]), Complex64::new(1.0, 0.0))],
            )?;
            let s = evolve(&s, &h, t)?;
            for y in 1..=12 {
                let d = (green1(x, y, t, &spec, GreenMethod::MomentumSum)?.value
                    - s.amplitude(mask_of(&[y])))
                .norm();
                worst = worst.max(d);
                if x == 1 && y == 2 && t == 1.0 {
                    nearest = d;
                }
            }
        }
    }
    Ok(BTreeMap::from([
        ("one_magnon_all_pairs".to_string(), worst),
        ("one_magnon_1_to_2_t1".to_string(), nearest),
    ]))
}

fn octahedron() -> Vec<InitialState> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let c = Complex64::new;
    [
        (c(1.0, 0.0), c(0.0, 0.0)),
        (c(0.0, 0.0), c(1.0, 0.0)),
        (c(r, 0.0), c(r, 0.0)),
        (c(r, 0.0), c(-r, 0.0)),
        (c(r, 0.0), c(0.0, r)),
        (c(r, 0.0), c(0.0, -r)),
    ]
    .into_iter()
    .map(|(a, b)| InitialState::new(a, b).expect("unit states"))
    .collect()
}

/// Free, projective and gate-without-flip pipelines against dense evolution.
pub fn oracle_check(spec: &ChainSpec) -> Result<BTreeMap<String, f64>, CliError> {
    let n = spec.n();
    let h = build_hamiltonian(spec, Sector::UpTo(1))?;
    let states = octahedron();
    let encoded = |s: &InitialState| {
        DenseState::from_amplitudes(h.basis(), &[(0, s.alpha), (mask_of(&[1]), s.beta)])
    };
    let fid = |s: &InitialState, x: f64, y: Complex64| {
        s.alpha.norm_sqr() * (1.0 - x)
            + s.beta.norm_sqr() * x
            + 2.0 * (s.alpha.conj() * s.beta * y).re
    };
    let m = n.div_ceil(2);
    let t0 = 1.5;
    let times = [0.0, 1.5, 2.5, 4.0];
    let free = fill_grid(
        spec,
        Scenario::Free,
        &QdpEvent::none(),
        &(1..=n).collect::<Vec<_>>(),
        &times,
    )?;
    let proj = ProjectiveQdp::new(spec, m, t0)?;
    let phase_gate = Gate::new(Complex64::from_polar(1.0, 0.7), Complex64::new(0.0, 0.0))?;
    let unitary = UnitaryQdp::new(spec, &QdpEvent::local_unitary(m, t0, phase_gate)?, 4.0)?;
    let (mut d_free, mut d_proj, mut d_gate) = (0.0f64, 0.0f64, 0.0f64);
    for (k, &t) in times.iter().enumerate() {
        let ens: Vec<(DenseState, Ensemble)> = states
            .iter()
            .map(|s| -> Result<_, CliError> {
                let start = encoded(s)?;
                let at_t = evolve(&start, &h, t)?;
                let measured = if t >= t0 {
                    Ensemble::pure(evolve(&start, &h, t0)?)
                        .measure(m)?
                        .evolve(&h, t - t0)?
                } else {
                    Ensemble::pure(at_t.clone())
                };
                Ok((at_t, measured))
            })
            .collect::<Result<_, _>>()?;
        let proj_row = if t >= t0 {
            Some(proj.fidelity_row(t)?)
        } else {
            None
        };
        let gate_row = if t >= t0 {
            Some(unitary.fidelity_row(t)?)
        } else {
            None
        };
        for l in 1..=n {
            let (mut f0, mut fp) = (0.0, 0.0);
            for (s, (pure, measured)) in states.iter().zip(&ens) {
                let (x, y) = pure.site_rdm(l)?;
                f0 += fid(s, x, y) / 6.0;
                let (x, y) = measured.site_rdm(l)?;
                fp += fid(s, x, y) / 6.0;
            }
            d_free = d_free.max((free.get(l - 1, k) - f0).abs());
            if let Some(row) = &proj_row {
                d_proj = d_proj.max((row[l - 1] - fp).abs());
            }
            if let Some(row) = &gate_row {
                // a diagonal gate only rephases the single magnon, so compare with the free value
                let mut fg = 0.0;
                for (s, pure_t0) in states
                    .iter()
                    .map(|s| (s, encoded(s).and_then(|e| evolve(&e, &h, t0))))
                {
                    let mut psi = pure_t0?;
                    psi = qdp_core::oracle::apply_local(
                        qdp_core::oracle::LocalOp::Gate(phase_gate),
                        m,
                        &psi,
                    )?;
                    let (x, y) = evolve(&psi, &h, t - t0)?.site_rdm(l)?;
                    fg += fid(s, x, y) / 6.0;
                }
                d_gate = d_gate.max((row[l - 1] - fg).abs());
            }
        }
    }
    Ok(BTreeMap::from([
        ("free".to_string(), d_free),
        ("projective".to_string(), d_proj),
        ("diagonal_gate".to_string(), d_gate),
    ]))
}

/// Writes the artifact and its sidecar, or prints the body when no path is given.
pub fn emit(out: &Output, path: Option<&PathBuf>) -> Result<(), CliError> {
    match path {
        None => {
            print!("{}", out.body);
            Ok(())
        }
        Some(p) => {
            std::fs::write(p, &out.body)
                .map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
            let mut side = p.clone().into_os_string();
            side.push(".meta.json");
            let mut meta =
                serde_json::to_string_pretty(&out.metadata).expect("metadata serializes");
            meta.push('\n');
            std::fs::write(&side, meta)
                .map_err(|e| CliError::Io(format!("{}: {e}", PathBuf::from(&side).display())))
        }
    }
}

pub fn configure_threads(threads: Option<usize>) -> Result<(), CliError> {
    if let Some(n) = threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    Ok(())
}

/// Full run from raw arguments to an exit code.
pub fn main_with<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match parse_args(argv) {
        Ok(c) => c,
        Err(ArgError::Clap(e)) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
        Err(ArgError::Run(e)) => {
            eprintln!("qdp: {e}");
            return e.exit_code();
        }
    };
    let run = cli.command.run_args();
    let result = configure_threads(run.threads)
        .and_then(|_| execute(&cli.command))
        .and_then(|out| emit(&out, run.out.as_ref()).map(|_| out));
    match result {
        Ok(out) if out.failed => {
            eprintln!("qdp: a check exceeded its tolerance");
            3
        }
        Ok(_) => 0,
        Err(e) => {
            eprintln!("qdp: {e}");
            e.exit_code()
        }
    }
}
