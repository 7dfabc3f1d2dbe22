//! `unpol`: command-line access to multipole spectra, Majorana constellations,
//! design orders, unpolarized-state search and rotation sensing.
//!
//! Exit codes: 0 success, 2 invalid input, 3 computation or output failure.

mod input;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use unpol::design::{design_report, DEFAULT_EPS};
use unpol::fixtures::{all_fixtures, export_fixtures, verify_fixture};
use unpol::majorana::{constellation_to_state, q_grid, state_constellation};
use unpol::metrology::{orthogonality_angle, rotation_overlap, sensitivity_scan_with, AxisAngle};
use unpol::multipole::{cumulative_route, cumulative_table, max_value, multipoles};
use unpol::search::{max_killable_order, minimize, SearchConfig, SearchReport, SEARCH_EPS};
use unpol::HalfInt;

use input::{load_points, load_state, parse_axis};
use output::Sink;

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Compute(String),
}

impl From<unpol::Error> for CliError {
    fn from(e: unpol::Error) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Compute(_) => 3,
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "unpol",
    version,
    about = "Polarization multipoles and maximally unpolarized spin states"
)]
struct Cli {
    /// Omit the `meta` block (version and timestamp) from JSON output.
    #[arg(long, global = true)]
    no_meta: bool,

    /// Worker threads for parallel sections; 0 lets the runtime decide.
    #[arg(long, global = true, env = "UNPOL_THREADS", default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Multipole coefficients rho_Kq of a state.
    Multipoles {
        /// State file, `-` for stdin, or `fixture:S`.
        #[arg(long)]
        state: String,
        #[arg(long, value_enum, default_value = "json")]
        out: Format,
    },
    /// A_M and its maximum over pure states; the full table when --M is omitted.
    Cumulative {
        #[arg(long)]
        state: String,
        #[arg(long = "M")]
        order: Option<i64>,
        /// Evaluation route: spectrum, double-sum or projector.
        #[arg(long, default_value = "spectrum")]
        method: String,
    },
    /// Majorana constellation of a state.
    Constellation {
        #[arg(long)]
        state: String,
    },
    /// State whose constellation is the given point set.
    Reconstruct {
        /// Constellation file, array of vectors, `fixture:S` or `solid:<name>`.
        #[arg(long)]
        points: String,
    },
    /// Q-function on a theta/phi grid as CSV.
    Qgrid {
        #[arg(long)]
        state: String,
        #[arg(long, default_value_t = 64)]
        nt: usize,
        #[arg(long, default_value_t = 128)]
        np: usize,
        /// CSV destination; `-` for stdout.
        #[arg(long, default_value = "-")]
        out: String,
    },
    /// Spherical design order of a point set.
    DesignOrder {
        #[arg(long)]
        points: String,
        #[arg(long, default_value_t = 10)]
        tmax: usize,
        #[arg(long, default_value_t = DEFAULT_EPS)]
        eps: f64,
    },
    /// Multistart minimization of A_M over pure states.
    Search {
        #[arg(long = "S")]
        spin: HalfInt,
        #[arg(long = "M")]
        order: i64,
        #[arg(long, default_value_t = 64)]
        starts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "lbfgs")]
        optimizer: String,
        #[arg(long, default_value_t = 2000)]
        max_iters: usize,
    },
    /// Largest M for which search drives A_M below the zero threshold.
    MaxOrder {
        #[arg(long = "S")]
        spin: HalfInt,
        #[arg(long, default_value_t = 64)]
        starts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// |<psi| exp(-i angle n.S) |psi>|^2 for an axis n.
    Overlap {
        #[arg(long)]
        state: String,
        /// Rotation axis `x,y,z`; normalized before use.
        #[arg(long, value_parser = parse_axis, allow_hyphen_values = true)]
        axis: [f64; 3],
        #[arg(long, allow_hyphen_values = true)]
        angle: f64,
        /// Also report the first angle where the overlap drops below this value.
        #[arg(long)]
        orthogonality_eps: Option<f64>,
    },
    /// Var(n.S) over a deterministic set of axes.
    Sensitivity {
        #[arg(long)]
        state: String,
        #[arg(long, default_value_t = 120)]
        axes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Include the per-axis table.
        #[arg(long)]
        per_axis: bool,
    },
    /// The tabulated minimal states, or their verification reports.
    Fixtures {
        #[arg(long)]
        verify: bool,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Multipoles { .. } => "multipoles",
            Command::Cumulative { .. } => "cumulative",
            Command::Constellation { .. } => "constellation",
            Command::Reconstruct { .. } => "reconstruct",
            Command::Qgrid { .. } => "qgrid",
            Command::DesignOrder { .. } => "design-order",
            Command::Search { .. } => "search",
            Command::MaxOrder { .. } => "max-order",
            Command::Overlap { .. } => "overlap",
            Command::Sensitivity { .. } => "sensitivity",
            Command::Fixtures { .. } => "fixtures",
        }
    }
}

#[derive(Serialize)]
struct MultipoleRow {
    #[serde(rename = "K")]
    k: i64,
    q: i64,
    re: f64,
    im: f64,
}

#[derive(Serialize)]
struct QRow {
    theta: f64,
    phi: f64,
    q: f64,
}

fn execute(cli: Cli) -> Result<(), CliError> {
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .map_err(|e| CliError::Compute(format!("cannot start thread pool: {e}")))?;
    }
    let sink = Sink {
        meta: !cli.no_meta,
        command: cli.command.name(),
    };
    match cli.command {
        Command::Multipoles { state, out } => {
            let spec = multipoles(&load_state(&state)?);
            match out {
                Format::Json => sink.json(&spec),
                Format::Csv => output::csv(
                    "-",
                    spec.iter().map(|(k, q, v)| MultipoleRow {
                        k,
                        q,
                        re: v.re,
                        im: v.im,
                    }),
                ),
            }
        }
        Command::Cumulative {
            state,
            order,
            method,
        } => {
            let st = load_state(&state)?;
            let route = cumulative_route(&method)?;
            match order {
                Some(m) => {
                    let a = route.cumulative(&st, m)?;
                    let max = max_value(st.spin(), m)?;
                    sink.json(&json!({"S": st.spin(), "M": m, "method": route.name(), "A_M": a, "max_value": max}))
                }
                None => sink.json(&json!({"S": st.spin(), "rows": cumulative_table(&st)})),
            }
        }
        Command::Constellation { state } => sink.json(&state_constellation(&load_state(&state)?)),
        Command::Reconstruct { points } => {
            sink.json(&constellation_to_state(&load_points(&points)?))
        }
        Command::Qgrid { state, nt, np, out } => {
            let grid = q_grid(&load_state(&state)?, nt, np)?;
            let rows = grid
                .thetas
                .iter()
                .zip(&grid.values)
                .flat_map(|(&theta, row)| {
                    grid.phis
                        .iter()
                        .zip(row)
                        .map(move |(&phi, &q)| QRow { theta, phi, q })
                });
            output::csv(&out, rows)
        }
        Command::DesignOrder { points, tmax, eps } => {
            if eps.is_nan() || eps <= 0.0 {
                return Err(CliError::Validation(format!(
                    "eps must be positive, got {eps}"
                )));
            }
            sink.json(&design_report(&load_points(&points)?, tmax, eps))
        }
        Command::Search {
            spin,
            order,
            starts,
            seed,
            optimizer,
            max_iters,
        } => {
            let cfg = SearchConfig {
                multistarts: starts,
                rng_seed: seed,
                optimizer,
                max_iters,
                ..SearchConfig::new(spin, order)
            };
            cfg.validate()?;
            let result = minimize(&cfg).map_err(|e| CliError::Compute(e.to_string()))?;
            sink.json(&SearchReport::new(cfg, result))
        }
        Command::MaxOrder { spin, starts, seed } => {
            let base = SearchConfig {
                multistarts: starts,
                rng_seed: seed,
                ..SearchConfig::new(spin, 1)
            };
            base.validate()?;
            let reached = max_killable_order(spin, &base, SEARCH_EPS)?;
            sink.json(&json!({"S": spin, "max_order": reached, "starts": starts, "seed": seed, "eps": SEARCH_EPS}))
        }
        Command::Overlap {
            state,
            axis,
            angle,
            orthogonality_eps,
        } => {
            let st = load_state(&state)?;
            let r = AxisAngle::from_direction(axis, angle)?;
            let mut report = json!({"S": st.spin(), "axis": r.axis(), "angle": angle, "overlap": rotation_overlap(&st, &r)});
            if let Some(eps) = orthogonality_eps {
                report["orthogonality_angle"] = json!(orthogonality_angle(&st, r.axis(), eps)?);
            }
            sink.json(&report)
        }
        Command::Sensitivity {
            state,
            axes,
            seed,
            per_axis,
        } => {
            let st = load_state(&state)?;
            let scan = sensitivity_scan_with(&st, axes, seed, per_axis)?;
            sink.json(&json!({"S": st.spin(), "seed": seed, "scan": scan}))
        }
        Command::Fixtures { verify: false } => sink.json(&json!({"fixtures": export_fixtures()?})),
        Command::Fixtures { verify: true } => {
            let reports = all_fixtures()
                .iter()
                .map(|r| verify_fixture(r.spin))
                .collect::<Result<Vec<_>, _>>()?;
            let all_passed = reports.iter().all(|r| r.passed);
            sink.json(&json!({"all_passed": all_passed, "reports": reports}))?;
            if all_passed {
                Ok(())
            } else {
                Err(CliError::Compute(
                    "some fixtures failed verification".into(),
                ))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let (CliError::Validation(msg) | CliError::Compute(msg)) = &e;
            eprintln!("unpol: {msg}");
            ExitCode::from(e.exit_code())
        }
    }
}
