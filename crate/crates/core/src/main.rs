use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use polyvem::cli::{self, RunConfig};
use polyvem::curved2d::CurvedStrategy;
use polyvem::discrete::RunOptions;
use polyvem::geometry::io::{write_mesh2d, write_mesh3d, MeshFile};
use polyvem::problems::{BoundaryMode, Domain, Problem};
use polyvem::solver::{SolverKind, SolverOptions};
use polyvem::vem2d::{Consistency, Stabilization, StiffnessOptions};

#[derive(Parser)]
#[command(name = "polyvem", version, about = "Virtual element solver for the Poisson problem on curved polytopal meshes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one problem and report errors
    Solve {
        #[command(flatten)]
        run: RunArgs,
        /// Refinement level of the built-in mesh
        #[arg(long, default_value_t = 0)]
        level: usize,
        /// Include wall-clock timings in the report
        #[arg(long)]
        timings: bool,
    },
    /// Errors and observed rates over a range of levels
    Convergence {
        #[command(flatten)]
        run: RunArgs,
        /// Levels, e.g. l0..l3
        #[arg(long, default_value = "l0..l3")]
        study: String,
        /// Skip the straight-chord comparison on curved planar meshes
        #[arg(long)]
        no_baseline: bool,
    },
    /// Run the patch-test suite on built-in meshes
    Patch {
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        out: Format,
    },
    /// Polynomial-reproduction defects of the projectors per element
    Projectors {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value_t = 0)]
        level: usize,
    },
    /// Write a built-in mesh in the text format
    Mesh {
        #[arg(long)]
        domain: Domain,
        #[arg(long, default_value_t = 0)]
        level: usize,
        #[arg(long, default_value = "dirichlet")]
        bc: BoundaryMode,
        /// Output file (stdout if absent)
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct RunArgs {
    /// <domain>:<solution>, e.g. disk:harmonic2
    #[arg(long)]
    problem: Problem,
    /// Mesh file replacing the built-in mesh of the domain
    #[arg(long)]
    mesh: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    degree: usize,
    /// Boundary conditions; without it a mesh file keeps its own tags
    #[arg(long)]
    bc: Option<BoundaryMode>,
    #[arg(long, default_value = "generators")]
    curved_strategy: CurvedStrategy,
    #[arg(long, default_value = "dofi")]
    stab: Stabilization,
    #[arg(long, default_value_t = 1.0)]
    stab_coeff: f64,
    #[arg(long, default_value = "pinabla")]
    consistency: Consistency,
    #[arg(long, default_value = "cg")]
    solver: SolverKind,
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    #[arg(long, default_value_t = 20000)]
    max_iter: usize,
    /// Which boundary vertex to pin in pure Neumann problems
    #[arg(long, default_value_t = 0)]
    pin: usize,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    out: Format,
}

impl RunArgs {
    fn config(&self, timings: bool) -> RunConfig {
        RunConfig {
            problem: self.problem,
            mesh: self.mesh.clone(),
            degree: self.degree,
            bc: self.bc,
            strategy: self.curved_strategy,
            run: RunOptions {
                stiffness: StiffnessOptions {
                    consistency: self.consistency,
                    stab: self.stab,
                    stab_coeff: self.stab_coeff,
                },
                solver: SolverOptions {
                    kind: self.solver,
                    tol: self.tol,
                    max_iter: self.max_iter,
                },
                pin: self.pin,
                ..RunOptions::default()
            },
            timings,
        }
    }
}

fn run(cmd: Command) -> polyvem::Result<(String, bool)> {
    Ok(match cmd {
        Command::Solve { run, level, timings } => {
            let s = cli::run_solve(&run.config(timings), level)?;
            let ok = s.patch_pass != Some(false);
            let text = match run.out {
                Format::Json => cli::to_json(&s)?,
                Format::Csv => cli::solve_csv(&s),
            };
            (text, ok)
        }
        Command::Convergence { run, study, no_baseline } => {
            let levels = cli::parse_study(&study)?;
            let s = cli::run_convergence(&run.config(false), &levels, !no_baseline)?;
            let text = match run.out {
                Format::Json => cli::to_json(&s)?,
                Format::Csv => cli::convergence_csv(&s),
            };
            (text, true)
        }
        Command::Patch { out } => {
            let cases = cli::patch_suite()?;
            let ok = cases.iter().all(|c| c.pass);
            let text = match out {
                Format::Json => cli::to_json(&cases)?,
                Format::Csv => cli::patch_csv(&cases),
            };
            (text, ok)
        }
        Command::Projectors { run, level } => {
            let rows = cli::projector_defects(&run.config(false), level)?;
            let text = match run.out {
                Format::Json => cli::to_json(&rows)?,
                Format::Csv => cli::projectors_csv(&rows),
            };
            (text, true)
        }
        Command::Mesh { domain, level, bc, output } => {
            let mut mesh = domain.mesh(level)?;
            bc.apply(&mut mesh);
            let text = match &mesh {
                MeshFile::Planar(m) => write_mesh2d(m),
                MeshFile::Solid(m) => write_mesh3d(m),
            };
            match output {
                Some(path) => {
                    std::fs::write(&path, text)?;
                    (String::new(), true)
                }
                None => (text, true),
            }
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok((text, ok)) => {
            print!("{text}");
            if ok {
                ExitCode::SUCCESS
            } else {
                eprintln!("error: patch test failed");
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
