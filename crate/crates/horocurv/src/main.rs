//! `horocurv` command line: curvature classification, horospherical data,
//! normal flow, growth diagnostics, the curvature-equation solver, and
//! embeddedness probes over the surface catalog.

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use horocurv::cli::{self, Command, OutputFormat, RunConfig};
use horocurv::tol::Tolerances;

#[derive(Parser)]
#[command(
    name = "horocurv",
    about = "Hypersurfaces in hyperbolic space via the hyperbolic Gauss map",
    version
)]
struct CliArgs {
    #[command(subcommand)]
    command: CliCommand,
    /// Output format.
    #[arg(long, global = true, default_value = "json", value_parser = ["json", "csv"])]
    format: String,
    /// Write the report to a file instead of stdout.
    #[arg(long, global = true)]
    out: Option<String>,
    #[command(flatten)]
    tolerances: TolArgs,
}

#[derive(Args)]
struct TolArgs {
    /// Jet invariant tolerance.
    #[arg(long, global = true, default_value_t = horocurv::tol::TAU_JET)]
    tau_jet: f64,
    /// Eigen-decomposition residual tolerance.
    #[arg(long, global = true, default_value_t = horocurv::tol::TAU_EIG)]
    tau_eig: f64,
    /// Hyperquadric classification tolerance.
    #[arg(long, global = true, default_value_t = horocurv::tol::TAU_QUAD)]
    tau_quad: f64,
    /// Stencil-based curvature comparison tolerance.
    #[arg(long, global = true, default_value_t = horocurv::tol::TAU_CURV)]
    tau_curv: f64,
    /// Newton convergence threshold.
    #[arg(long, global = true, default_value_t = horocurv::tol::TAU_NEWTON)]
    tau_newton: f64,
    /// Coincident-sheet classification tolerance.
    #[arg(long, global = true, default_value_t = horocurv::tol::TAU_COINC)]
    tau_coinc: f64,
    /// Boundary cluster separation (radians).
    #[arg(long, global = true, default_value_t = horocurv::tol::THETA_SEP)]
    theta_sep: f64,
    /// Finite-difference step for chart derivatives.
    #[arg(long, global = true, default_value_t = horocurv::tol::FD_STEP)]
    fd_step: f64,
}

impl TolArgs {
    fn build(&self) -> Tolerances {
        Tolerances {
            quad: self.tau_quad,
            jet: self.tau_jet,
            eig: self.tau_eig,
            curv: self.tau_curv,
            newton: self.tau_newton,
            coinc: self.tau_coinc,
            theta_sep: self.theta_sep,
            fd_step: self.fd_step,
        }
    }
}

#[derive(Subcommand)]
enum CliCommand {
    /// Principal curvatures and convexity flags over a parameter grid.
    Classify {
        /// Surface selector, e.g. equidistant:d=0.5,wraps=2.
        #[arg(long)]
        surface: String,
        /// Samples per parameter axis.
        #[arg(long, default_value_t = 16)]
        grid: usize,
        /// Include i = j pairs in the sectional-curvature test.
        #[arg(long, default_value_t = false)]
        include_diagonal: bool,
    },
    /// Support function, metric-relation residuals, and curvature tensors.
    Horo {
        #[arg(long)]
        surface: String,
        #[arg(long, default_value_t = 12)]
        grid: usize,
    },
    /// Normal-flow curvature evolution and flowed-surface probes.
    Flow {
        #[arg(long)]
        surface: String,
        /// Flow time.
        #[arg(long)]
        t: f64,
        /// Re-derive the flowed curvatures numerically (equidistant only).
        #[arg(long, default_value_t = false)]
        probe: bool,
    },
    /// Growth exponent and total curvature of a conformal metric.
    Growth {
        /// Metric selector: model:m=0.5, flat, or round.
        #[arg(long)]
        metric: String,
        #[arg(long, default_value_t = 0.1)]
        rmin: f64,
        #[arg(long, default_value_t = 1000.0)]
        rmax: f64,
        #[arg(long, default_value_t = 256)]
        nr: usize,
        #[arg(long, default_value_t = 256)]
        ntheta: usize,
    },
    /// Newton solve of the curvature equation with manufactured-solution
    /// error.
    Pde {
        /// Case selector: model:m=0.5, round, or flat.
        #[arg(long)]
        case: String,
        /// Grid size per axis.
        #[arg(long, default_value_t = 128)]
        size: usize,
        /// Outer radius of the solve annulus.
        #[arg(long, default_value_t = 10.0)]
        radius: f64,
        /// Newton iteration cap.
        #[arg(long, default_value_t = 50)]
        max_iter: usize,
    },
    /// Mesh a surface and run the embeddedness probes.
    Probe {
        #[arg(long)]
        surface: String,
        #[arg(long, default_value_t = 64)]
        resolution: usize,
        /// Parameter extent for unbounded axes.
        #[arg(long, default_value_t = 3.0)]
        extent: f64,
        /// Gauss-injectivity sample budget.
        #[arg(long, default_value_t = 400)]
        samples: usize,
        /// Write the mesh as an ASCII OFF file.
        #[arg(long)]
        mesh_out: Option<String>,
    },
    /// List catalog entries and their selectors.
    Catalog,
}

fn main() -> ExitCode {
    let args = CliArgs::parse();
    let format = match args.format.as_str() {
        "csv" => OutputFormat::Csv,
        _ => OutputFormat::Json,
    };
    let command = match args.command {
        CliCommand::Classify { surface, grid, include_diagonal } => {
            Command::Classify { surface, grid, include_diagonal }
        }
        CliCommand::Horo { surface, grid } => Command::Horo { surface, grid },
        CliCommand::Flow { surface, t, probe } => Command::Flow { surface, t, probe },
        CliCommand::Growth { metric, rmin, rmax, nr, ntheta } => Command::Growth {
            metric,
            r_min: rmin,
            r_max: rmax,
            n_r: nr,
            n_theta: ntheta,
        },
        CliCommand::Pde { case, size, radius, max_iter } => {
            Command::Pde { case, size, radius, max_iter }
        }
        CliCommand::Probe { surface, resolution, extent, samples, mesh_out } => {
            Command::Probe { surface, resolution, extent, samples, mesh_out }
        }
        CliCommand::Catalog => Command::Catalog,
    };
    let config = RunConfig {
        command,
        format,
        out_path: args.out,
        tolerances: args.tolerances.build(),
    };
    match cli::run(&config) {
        Ok(output) => {
            for (path, content) in &output.files {
                if let Err(e) = std::fs::write(path, content) {
                    eprintln!("failed to write {path}: {e}");
                    return ExitCode::from(1);
                }
            }
            match &config.out_path {
                Some(path) => {
                    if let Err(e) = std::fs::write(path, &output.text) {
                        eprintln!("failed to write {path}: {e}");
                        return ExitCode::from(1);
                    }
                }
                None => print!("{}", output.text),
            }
            ExitCode::from(output.exit as u8)
        }
        Err(err) => {
            let code = err.exit_code();
            if code == 2 {
                eprintln!("{err}");
            } else {
                print!("{}", cli::diagnostic_json(&err));
            }
            ExitCode::from(code as u8)
        }
    }
}
