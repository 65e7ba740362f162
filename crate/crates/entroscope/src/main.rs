//! Command-line surface: sweeps, single points, and the validation suite.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use entroscope::config::{GridSection, RunConfig};
use entroscope::error::Error;
use entroscope::lattice::{ModelFamily, Shape};
use entroscope::sweep::{
    self, detect_transitions, derivative, run_sweep, DerivativeCurve, EntropyCurve,
    SweepSettings, TransitionReport,
};
use entroscope::validate;

#[derive(Parser)]
#[command(
    name = "entroscope",
    version,
    about = "Sublattice entanglement entropy scans for locating quantum phase transitions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads for sweep evaluation (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a parameter sweep from a JSON config; writes <prefix>.csv and
    /// <prefix>.report.json into the output directory.
    Sweep {
        /// JSON run configuration.
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overrides the config).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Sublattice override: comma-separated site indices, e.g. "0,2,4".
        #[arg(long)]
        partition: Option<String>,
        /// Grid override as "lo:hi:step".
        #[arg(long)]
        grid: Option<String>,
    },
    /// Evaluate one parameter point; prints single-line JSON to stdout.
    Point {
        /// Model family, e.g. ISING_CHAIN or hubbard-chain.
        #[arg(long)]
        family: String,
        /// Chain length ("10") or square extents ("4x4").
        #[arg(long)]
        size: String,
        /// Transverse field / inter-dimer coupling (Ising, dimer).
        #[arg(long)]
        lambda: Option<f64>,
        /// J2/J1 (frustrated square lattice).
        #[arg(long)]
        j2: Option<f64>,
        /// Jx/J (checkerboard).
        #[arg(long)]
        jcross: Option<f64>,
        /// On-site U (Hubbard).
        #[arg(long)]
        u: Option<f64>,
        /// Nearest-neighbor V (Hubbard; the evaluated parameter).
        #[arg(long)]
        v: Option<f64>,
        /// Sublattice override: comma-separated site indices.
        #[arg(long)]
        partition: Option<String>,
        /// Point cache directory (ENTROSCOPE_CACHE overrides).
        #[arg(long)]
        cache_dir: Option<PathBuf>,
    },
    /// Run the validation oracle suite; exits 0 only if every check passes.
    Validate,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if threads == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(2);
        }
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                Error::Config(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn dispatch(command: Command) -> Result<ExitCode, Error> {
    match command {
        Command::Sweep {
            config,
            out,
            partition,
            grid,
        } => cmd_sweep(&config, out, partition, grid),
        Command::Point {
            family,
            size,
            lambda,
            j2,
            jcross,
            u,
            v,
            partition,
            cache_dir,
        } => cmd_point(&family, &size, lambda, j2, jcross, u, v, partition, cache_dir),
        Command::Validate => Ok(cmd_validate()),
    }
}

fn parse_partition(text: &str) -> Result<Vec<usize>, Error> {
    text.split(',')
        .map(|part| {
            part.trim()
                .parse::<usize>()
                .map_err(|_| Error::Config(format!("invalid partition entry {part:?}")))
        })
        .collect()
}

fn parse_grid(text: &str) -> Result<GridSection, Error> {
    let fields: Vec<&str> = text.split(':').collect();
    if fields.len() != 3 {
        return Err(Error::Config(format!(
            "grid override must be lo:hi:step, got {text:?}"
        )));
    }
    let parse = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| Error::Config(format!("invalid grid number {s:?}")))
    };
    Ok(GridSection {
        start: parse(fields[0])?,
        stop: parse(fields[1])?,
        step: parse(fields[2])?,
    })
}

fn parse_family(text: &str) -> Result<ModelFamily, Error> {
    let normalized = text.to_uppercase().replace('-', "_");
    Ok(match normalized.as_str() {
        "ISING_CHAIN" => ModelFamily::IsingChain,
        "DIMER_2D" => ModelFamily::Dimer2d,
        "J1J2_2D" => ModelFamily::J1j2_2d,
        "CHECKERBOARD_2D" => ModelFamily::Checkerboard2d,
        "HUBBARD_CHAIN" => ModelFamily::HubbardChain,
        _ => {
            return Err(Error::Config(format!(
                "unknown family {text:?}; expected ISING_CHAIN, DIMER_2D, J1J2_2D, CHECKERBOARD_2D, or HUBBARD_CHAIN"
            )))
        }
    })
}

fn parse_size(text: &str) -> Result<Shape, Error> {
    if let Some((lx, ly)) = text.split_once(['x', 'X']) {
        let lx = lx
            .trim()
            .parse::<usize>()
            .map_err(|_| Error::Config(format!("invalid size {text:?}")))?;
        let ly = ly
            .trim()
            .parse::<usize>()
            .map_err(|_| Error::Config(format!("invalid size {text:?}")))?;
        Ok(Shape::Square(lx, ly))
    } else {
        let n = text
            .trim()
            .parse::<usize>()
            .map_err(|_| Error::Config(format!("invalid size {text:?}")))?;
        Ok(Shape::Chain(n))
    }
}

fn write_atomic(path: &Path, contents: &str) -> Result<(), Error> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    std::fs::create_dir_all(dir)?;
    let tmp = dir.join(format!(
        ".tmp-{}",
        path.file_name().and_then(|n| n.to_str()).unwrap_or("out")
    ));
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

fn render_csv(curve: &EntropyCurve, deriv: &DerivativeCurve) -> String {
    let mut out = String::from("param,energy,gap,degenerate,entropy_bits,s_over_n,ds_over_n_dparam\n");
    let last = curve.grid.len() - 1;
    for i in 0..curve.grid.len() {
        let derivative_cell = if i == 0 || i == last {
            String::new()
        } else {
            format!("{:.16e}", deriv.values[i])
        };
        out.push_str(&format!(
            "{:.6},{:.16e},{:.16e},{},{:.16e},{:.16e},{}\n",
            curve.grid[i],
            curve.energy[i],
            curve.gap[i],
            curve.degenerate[i],
            curve.entropy_bits[i],
            curve.s_over_n[i],
            derivative_cell,
        ));
    }
    out
}

fn render_report(
    config: &RunConfig,
    curve: &EntropyCurve,
    report: &TransitionReport,
) -> Result<String, Error> {
    let value = serde_json::json!({
        "schema_version": 1,
        "tool": "entroscope",
        "tool_version": env!("CARGO_PKG_VERSION"),
        "config_fingerprint": config.fingerprint(),
        "model_fingerprint": curve.fingerprint,
        "family": config.model.family.as_str(),
        "param_name": curve.param_name,
        "num_sites": curve.num_sites,
        "grid": {
            "start": config.grid.start,
            "stop": config.grid.stop,
            "step": config.grid.step,
            "count": curve.grid.len(),
        },
        "thresholds": config.detection,
        "candidates": report.candidates,
    });
    Ok(serde_json::to_string_pretty(&value)? + "\n")
}

fn cmd_sweep(
    config_path: &Path,
    out: Option<PathBuf>,
    partition: Option<String>,
    grid: Option<String>,
) -> Result<ExitCode, Error> {
    let mut config = RunConfig::from_file(config_path)?;
    if let Some(partition) = partition {
        config.partition = Some(parse_partition(&partition)?);
    }
    if let Some(grid) = grid {
        config.grid = parse_grid(&grid)?;
    }
    config.validate()?;

    let out_dir = out
        .or_else(|| config.output.as_ref().and_then(|o| o.dir.clone()))
        .unwrap_or_else(|| PathBuf::from("."));
    let prefix = config.output_prefix();

    let settings = config.to_sweep_settings()?;
    let started = Instant::now();
    eprintln!(
        "sweep: {} {} over {} ({} points)",
        config.model.family.as_str(),
        config.model.size.to_shape(),
        sweep::sweep_parameter_name(config.model.family),
        settings.grid.len()
    );
    let curve = run_sweep(&settings)?;
    let deriv = derivative(&curve)?;
    let report = detect_transitions(&curve, &deriv, &config.detection);
    eprintln!(
        "sweep: done in {:.1}s, {} transition candidate(s)",
        started.elapsed().as_secs_f64(),
        report.candidates.len()
    );

    let csv_path = out_dir.join(format!("{prefix}.csv"));
    let report_path = out_dir.join(format!("{prefix}.report.json"));
    write_atomic(&csv_path, &render_csv(&curve, &deriv))?;
    write_atomic(&report_path, &render_report(&config, &curve, &report)?)?;
    println!("{}", csv_path.display());
    println!("{}", report_path.display());
    for candidate in &report.candidates {
        println!(
            "order-{} {:?} at {} = {:.4} (prominence {:.3e})",
            candidate.order,
            candidate.kind,
            curve.param_name,
            candidate.location,
            candidate.prominence
        );
    }
    Ok(ExitCode::SUCCESS)
}

#[allow(clippy::too_many_arguments)]
fn cmd_point(
    family: &str,
    size: &str,
    lambda: Option<f64>,
    j2: Option<f64>,
    jcross: Option<f64>,
    u: Option<f64>,
    v: Option<f64>,
    partition: Option<String>,
    cache_dir: Option<PathBuf>,
) -> Result<ExitCode, Error> {
    let family = parse_family(family)?;
    let shape = parse_size(size)?;
    let missing = |flag: &str| Error::Config(format!("{} requires --{flag}", family.as_str()));
    let (param, hubbard_u) = match family {
        ModelFamily::IsingChain | ModelFamily::Dimer2d => {
            (lambda.ok_or_else(|| missing("lambda"))?, None)
        }
        ModelFamily::J1j2_2d => (j2.ok_or_else(|| missing("j2"))?, None),
        ModelFamily::Checkerboard2d => (jcross.ok_or_else(|| missing("jcross"))?, None),
        ModelFamily::HubbardChain => (
            v.ok_or_else(|| missing("v"))?,
            Some(u.ok_or_else(|| missing("u"))?),
        ),
    };

    let mut settings = SweepSettings::new(family, shape, Vec::new());
    settings.hubbard_u = hubbard_u;
    settings.cache_dir = cache_dir;
    if let Some(partition) = partition {
        let sites = parse_partition(&partition)?;
        if sites.len() != shape.num_sites() / 2 {
            return Err(Error::Config("balanced bipartition required".into()));
        }
        settings.partition_override = Some(sites);
    }

    let record = sweep::eval_single_point(&settings, param)?;
    let line = serde_json::json!({
        "energy": record.energy,
        "gap": record.gap,
        "entropy_bits": record.entropy_bits,
    });
    println!("{line}");
    Ok(ExitCode::SUCCESS)
}

fn cmd_validate() -> ExitCode {
    let results = validate::run_all();
    for result in &results {
        let mark = if result.passed { "ok  " } else { "FAIL" };
        println!("{mark} {} - {}", result.name, result.detail);
    }
    if validate::all_passed(&results) {
        println!("all {} checks passed", results.len());
        ExitCode::SUCCESS
    } else {
        println!("validation failed");
        ExitCode::from(1)
    }
}
