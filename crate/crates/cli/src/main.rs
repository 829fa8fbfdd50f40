use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use bcmortar_core::coupling::Method;
use bcmortar_core::experiments::{
    condition_report, experiment1, experiment2, gen_test_meshes, regression_rate, verify_report, ExperimentConfig,
    ExperimentKind, MeshPair, NormKind, Status,
};
use bcmortar_core::forms::Degree;
use bcmortar_core::mesh::io::write_mesh;
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "bcmortar", version, about = "Transfer of differential forms between nonconforming triangle meshes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check every invariant of the B-C spaces and the coupling operators.
    Verify {
        #[arg(long, default_value_t = 1)]
        level: usize,
    },
    /// Relative error in percent after nu round trips.
    Exp1 {
        #[arg(long, default_value_t = 0)]
        degree: usize,
        #[arg(long, value_delimiter = ',', default_value = "derham,galerkin,bc")]
        methods: Vec<Method>,
        #[arg(long, default_value_t = 2)]
        level: usize,
        #[arg(long, default_value_t = 100)]
        steps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Round-trip error per refinement level and regression rates.
    Exp2 {
        #[arg(long, default_value_t = 0)]
        degree: usize,
        #[arg(long, value_delimiter = ',', default_value = "derham,galerkin,bc")]
        methods: Vec<Method>,
        #[arg(long, default_value_t = 4)]
        max_level: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Condition numbers of the projection systems.
    Cond {
        #[arg(long, default_value_t = 3)]
        max_level: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write one of the test meshes.
    Mesh {
        #[arg(long, default_value_t = 0)]
        level: usize,
        #[arg(long, value_enum)]
        which: Which,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Which {
    I,
    J,
}

type BoxError = Box<dyn std::error::Error>;

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>, BoxError> {
    Ok(match path {
        Some(p) => Box::new(File::create(p)?),
        None => Box::new(io::stdout()),
    })
}

fn csv_writer(path: &Option<PathBuf>) -> Result<csv::Writer<Box<dyn Write>>, BoxError> {
    let mut w = csv::Writer::from_writer(output(path)?);
    w.write_record(["experiment", "method", "degree", "level", "h_or_nu", "value", "norm"])?;
    Ok(w)
}

fn record(w: &mut csv::Writer<Box<dyn Write>>, fields: [String; 7]) -> Result<(), BoxError> {
    w.write_record(&fields)?;
    Ok(())
}

fn config(kind: ExperimentKind, degree: usize, methods: Vec<Method>) -> Result<ExperimentConfig, BoxError> {
    let mut c = ExperimentConfig::new(kind);
    c.degree = Degree::new(degree)?;
    c.methods = methods;
    Ok(c)
}

/// Returns whether every hard invariant held.
fn run(cli: Cli) -> Result<bool, BoxError> {
    match cli.command {
        Command::Verify { level } => {
            let lines = verify_report(level)?;
            println!("status,check,value,tolerance");
            for l in &lines {
                println!("{l}");
            }
            Ok(lines.iter().all(|l| l.status != Status::Fail))
        }
        Command::Exp1 {
            degree,
            methods,
            level,
            steps,
            out,
        } => {
            let mut c = config(ExperimentKind::Exp1, degree, methods)?;
            c.level = level;
            c.steps = steps;
            c.validate()?;
            let pair = MeshPair::new(c.level)?;
            let mut w = csv_writer(&out)?;
            let mut ok = true;
            for &m in &c.methods {
                let s = experiment1(&pair, m, c.degree, c.steps)?;
                for (nu, e) in s.errors.iter().enumerate() {
                    record(
                        &mut w,
                        ["exp1".into(), m.to_string(), c.degree.to_string(), level.to_string(), nu.to_string(), format!("{e:e}"), "L2".into()],
                    )?;
                }
                if !s.errors.windows(2).all(|p| p[1] >= p[0] - 1e-10) {
                    eprintln!("{m}: round-trip error decreased with nu");
                    ok = false;
                }
                eprintln!("{m}: err after {} round trips = {:.4}%", c.steps, s.errors[c.steps]);
            }
            w.flush()?;
            Ok(ok)
        }
        Command::Exp2 {
            degree,
            methods,
            max_level,
            out,
        } => {
            let mut c = config(ExperimentKind::Exp2, degree, methods)?;
            c.max_level = max_level;
            c.validate()?;
            let mut w = csv_writer(&out)?;
            let mut ok = true;
            for &m in &c.methods {
                let (records, _) = experiment2(m, c.degree, 0..=c.max_level)?;
                for r in &records {
                    record(
                        &mut w,
                        ["exp2".into(), m.to_string(), c.degree.to_string(), r.level.to_string(), format!("{:e}", r.h), format!("{:e}", r.error), r.norm.to_string()],
                    )?;
                }
                // level 0 is pre-asymptotic
                let fitted: Vec<_> = records.into_iter().filter(|r| r.level >= 1).collect();
                for norm in [NormKind::L2, NormKind::Hd] {
                    let errs: Vec<f64> = fitted.iter().filter(|r| r.norm == norm).map(|r| r.error).collect();
                    let converging = norm == NormKind::L2 || m != Method::Galerkin || c.degree == Degree::Zero;
                    if converging && !errs.windows(2).all(|p| p[1] < p[0]) {
                        eprintln!("{m} {norm}: error did not decrease with the level");
                        ok = false;
                    }
                    eprintln!("{m} {norm}: rate p = {:.3}", regression_rate(&fitted, norm));
                }
            }
            w.flush()?;
            Ok(ok)
        }
        Command::Cond { max_level, out } => {
            let mut w = csv_writer(&out)?;
            for r in condition_report(max_level)? {
                record(
                    &mut w,
                    ["cond".into(), r.method.to_string(), r.degree.to_string(), r.level.to_string(), format!("{:e}", r.h), format!("{:e}", r.kappa), "kappa".into()],
                )?;
            }
            w.flush()?;
            Ok(true)
        }
        Command::Mesh { level, which, out } => {
            let (i, j) = gen_test_meshes(level);
            let mesh = match which {
                Which::I => i,
                Which::J => j,
            };
            write_mesh(&mesh, output(&out)?)?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
