use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gelfand_core::budget::{cascade, GeometryConstants, Magnitude};
use gelfand_core::harness::{self, io, ExperimentConfig, ARTIFACTS};
use gelfand_core::slicing::BoundaryDistanceFn;
use gelfand_core::{Error, Result};

/// Reconstruct a manifold's boundary distance representation from Neumann
/// boundary spectral data.
#[derive(Parser)]
#[command(name = "gelfand", version)]
struct Cli {
    /// Worker threads for volume solves (GELFAND_THREADS overrides).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Full pipeline: forward, perturb, reconstruct, evaluate.
    Run(ConfigArgs),
    /// Write the exact spectral dataset of the configured model.
    Forward {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long, short)]
        output: PathBuf,
    },
    /// Perturb an exact dataset into a δ-approximation.
    Perturb {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        delta: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, short)]
        output: PathBuf,
    },
    /// Build ℛ* and the metric space X; writes volumes.csv, rstar.json, x.json.
    Reconstruct {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Observed dataset; generated from the config when omitted.
        #[arg(long)]
        dataset: Option<PathBuf>,
    },
    /// Score an rstar.json against the sampled ground truth.
    Evaluate {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        rstar: PathBuf,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Print the parameter cascade for a partition scale.
    Budget {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// GeometryConstants JSON; derived from the model when omitted.
        #[arg(long)]
        geometry: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Diff two evaluation reports.
    Compare {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// List the built-in presets.
    Presets,
}

#[derive(Args, Clone)]
struct ConfigArgs {
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Dotted config override, e.g. `--set volume.eps1=0.1`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long = "J")]
    j: Option<usize>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

impl ConfigArgs {
    fn load(&self) -> Result<ExperimentConfig> {
        let base = match (&self.preset, &self.config) {
            (Some(p), _) => harness::preset(p)?,
            (None, Some(path)) => ExperimentConfig::load(path)?,
            (None, None) => {
                return Err(Error::Config { field: "config".into(), reason: "pass --preset or --config".into() })
            }
        };
        let mut overrides = Vec::new();
        for kv in &self.set {
            let (k, v) = kv.split_once('=').ok_or_else(|| Error::Config {
                field: kv.clone(),
                reason: "expected KEY=VALUE".into(),
            })?;
            overrides.push((k.to_string(), v.to_string()));
        }
        let flags = [
            ("eta", self.eta.map(|v| v.to_string())),
            ("J", self.j.map(|v| v.to_string())),
            ("delta", self.delta.map(|v| v.to_string())),
            ("seed", self.seed.map(|v| v.to_string())),
            ("output_dir", self.output_dir.as_ref().map(|p| p.display().to_string())),
        ];
        overrides.extend(flags.into_iter().filter_map(|(k, v)| v.map(|v| (k.to_string(), v))));
        base.with_overrides(&overrides)
    }
}

fn output_dir(cfg: &ExperimentConfig) -> PathBuf {
    cfg.output_dir.clone().unwrap_or_else(|| PathBuf::from("runs").join(&cfg.name))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    Ok(std::fs::create_dir_all(dir)?)
}

fn thread_count(flag: Option<usize>) -> Result<Option<usize>> {
    match std::env::var("GELFAND_THREADS") {
        Ok(v) => v.trim().parse::<usize>().map(Some).map_err(|_| Error::Config {
            field: "GELFAND_THREADS".into(),
            reason: format!("not a thread count: `{v}`"),
        }),
        Err(_) => Ok(flag),
    }
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    println!("{}", io::to_json_pretty(value)?);
    Ok(())
}

fn short(x: f64) -> String {
    if !x.is_finite() {
        "-".into()
    } else if x.abs() < 1e6 {
        format!("{x:.4}")
    } else {
        format!("{x:.4e}")
    }
}

fn ln_row(name: &str, ln: &Magnitude) -> [String; 4] {
    [name.to_string(), ln.to_string(), short(ln.to_f64() / std::f64::consts::LN_10), short(ln.log10_abs())]
}

fn budget(cfg: &ExperimentConfig, geometry: Option<&Path>, as_json: bool) -> Result<i32> {
    let gc = match geometry {
        Some(path) => io::read_json::<GeometryConstants>(path)?,
        None => match &cfg.geometry {
            Some(g) => g.clone(),
            None => {
                let (model, _) = harness::build_model(cfg)?;
                GeometryConstants::new(model.n, model.diameter, model.volume, model.boundary_volume)?
            }
        },
    };
    let c = cascade(cfg.eta, &gc)?;
    if as_json {
        print_json(&c)?;
        return Ok(0);
    }
    let plain = |name: &str, ln: f64| ln_row(name, &Magnitude::from_f64(ln));
    let rows = [
        plain("eps_star", c.ln.eps_star),
        plain("eps", c.ln.eps),
        plain("gamma", c.ln.gamma),
        plain("eps2(0)", c.ln.eps2_0),
        plain("h", c.ln.h),
        ln_row("eps1", &c.ln.eps1),
        ln_row("lambda_J", &c.ln.lambda_j),
        ln_row("J", &c.ln.j),
        ln_row("delta", &c.ln.delta),
    ];
    println!("eta = {}  N = {}", c.eta, c.n_cells);
    println!("{:<10} {:>32} {:>14} {:>14}", "quantity", "ln(value)", "log10(value)", "log10|ln(value)|");
    for [name, ln, log10, lnln] in rows {
        println!("{name:<10} {ln:>32} {log10:>14} {lnln:>14}");
    }
    if c.underflow {
        println!("some values leave the double range; presets bypass the cascade");
    }
    Ok(0)
}

fn execute(cli: Cli) -> Result<i32> {
    if let Some(n) = thread_count(cli.threads)? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config { field: "threads".into(), reason: e.to_string() })?;
    }
    match cli.command {
        Command::Run(args) => {
            let cfg = args.load()?;
            let dir = output_dir(&cfg);
            ensure_dir(&dir)?;
            let out = harness::run(&cfg, &dir)?;
            print_json(&out.report)?;
            Ok(out.exit_code)
        }
        Command::Forward { cfg, output } => {
            let cfg = harness::effective_config(&cfg.load()?)?;
            let (_, ds) = harness::build_model(&cfg)?;
            io::write_dataset(&output, &ds)?;
            Ok(0)
        }
        Command::Perturb { dataset, delta, seed, output } => {
            let ds = io::read_dataset(&dataset)?;
            let out = gelfand_core::forward::perturb_dataset(&ds, delta, seed)?;
            io::write_dataset(&output, &out)?;
            Ok(0)
        }
        Command::Reconstruct { cfg, dataset } => {
            let cfg = harness::effective_config(&cfg.load()?)?;
            let (model, exact) = harness::build_model(&cfg)?;
            let ds = match dataset {
                Some(p) => io::read_dataset(&p)?,
                None => harness::observed_dataset(&cfg, &exact)?,
            };
            let part = harness::partition(&cfg, &model)?;
            let rec = harness::reconstruct(&cfg, &model, &ds, &part)?;
            let dir = output_dir(&cfg);
            ensure_dir(&dir)?;
            io::write_volumes(&dir.join(ARTIFACTS[1]), &rec.volumes)?;
            io::write_rstar(&dir.join(ARTIFACTS[2]), &rec.rstar.functions)?;
            io::write_metric_space(&dir.join(ARTIFACTS[3]), &rec.x)?;
            print_json(&rec.rstar.stats)?;
            Ok(if rec.rstar.functions.is_empty() { 1 } else { 0 })
        }
        Command::Evaluate { cfg, rstar, output } => {
            let cfg = harness::effective_config(&cfg.load()?)?;
            let (model, _) = harness::build_model(&cfg)?;
            let part = harness::partition(&cfg, &model)?;
            let functions: Vec<BoundaryDistanceFn> = io::read_rstar(&rstar)?;
            let values: Vec<Vec<f64>> = functions.into_iter().map(|f| f.values).collect();
            let report = harness::evaluate(&cfg, &model, &part, &values)?;
            if let Some(path) = output {
                io::write_report(&path, &report)?;
            }
            print_json(&report)?;
            Ok(if report.status == "ok" { 0 } else { 1 })
        }
        Command::Budget { cfg, geometry, json } => budget(&cfg.load()?, geometry.as_deref(), json),
        Command::Compare { a, b, json } => {
            let cmp = harness::compare(&io::read_report(&a)?, &io::read_report(&b)?);
            if json {
                print_json(&cmp)?;
            } else {
                let fmt = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.6}"));
                println!("{:<10} {:>14} {:>14} {:>14}", "metric", "a", "b", "delta");
                for r in &cmp.rows {
                    println!("{:<10} {:>14} {:>14} {:>14}", r.metric, fmt(r.a), fmt(r.b), fmt(r.delta));
                }
                for v in &cmp.verdicts {
                    println!("{}: {}", v.name, v.value);
                }
            }
            Ok(0)
        }
        Command::Presets => {
            for name in harness::PRESETS {
                println!("{name}");
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            println!("{}", harness::error_json(&e));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
