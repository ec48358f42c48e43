//! Command-line frontend: one-shot simulations, parameter sweeps, the
//! verification battery and kernel tables, all driven by flat key-value
//! config files.
//!
//! Exit codes: 0 success, 1 verification failure, 2 configuration error,
//! 3 numerical divergence, 4 I/O failure.

mod config;
mod output;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rayon::prelude::*;

use config::SimSetup;
use output::Format;
use tdscat::propagate::{evolve, DensityRecord};
use tdscat::{Error, KernelTable};

#[derive(Parser)]
#[command(name = "tdscat", version, about = "1D time-dependent quantum scattering simulator")]
struct Cli {
    /// Output directory (overrides output.out_dir from the config)
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads for sweeps (default: all processors)
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Suppress progress messages on stdout
    #[arg(long, global = true)]
    quiet: bool,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one scenario and write density and meta tables
    Simulate {
        /// Path to the config file
        config: PathBuf,
    },
    /// Re-run one scenario for several values of a single config key
    Sweep {
        /// Path to the config file
        config: PathBuf,
        /// Key to vary, e.g. pulse.phi_cep
        #[arg(long)]
        param: String,
        /// Comma-separated numeric values for the key
        #[arg(long)]
        values: String,
    },
    /// Run a named verification suite and report PASS/FAIL per check
    Verify {
        /// One of: all, kernels, transparency, barrier, bigbox, keldysh, gauge
        suite: String,
    },
    /// Tabulate the boundary memory kernel on the run's time grid
    KernelTable {
        /// Path to the config file
        config: PathBuf,
    },
}

fn main() {
    let cli = Cli::parse();
    let code = match &cli.cmd {
        Cmd::Simulate { config } => cmd_simulate(&cli, config),
        Cmd::Sweep { config, param, values } => cmd_sweep(&cli, config, param, values),
        Cmd::Verify { suite } => cmd_verify(suite),
        Cmd::KernelTable { config } => cmd_kernel_table(&cli, config),
    };
    std::process::exit(code);
}

fn code_for(e: &Error) -> i32 {
    match e {
        Error::Diverged { .. } => 3,
        Error::Io(_) => 4,
        _ => 2,
    }
}

fn report(e: &Error) -> i32 {
    eprintln!("error: {e}");
    code_for(e)
}

fn config_dir(path: &Path) -> &Path {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    }
}

fn resolve_out_dir(cli: &Cli, from_config: Option<&Path>) -> PathBuf {
    cli.out
        .clone()
        .or_else(|| from_config.map(Path::to_path_buf))
        .unwrap_or_else(|| PathBuf::from("."))
}

/// Evolves the configured scenario and writes its density and meta tables
/// into `out_dir`.
fn run_into(setup: &SimSetup, out_dir: &Path) -> tdscat::Result<(Vec<PathBuf>, DensityRecord)> {
    let (rec, _) = evolve(&setup.run)?;
    std::fs::create_dir_all(out_dir)?;
    let sep = setup.format.sep();
    let density_path = out_dir.join(setup.format.file_name("density"));
    output::write_atomic(&density_path, &output::density_document(&rec, sep))?;
    let meta_path = out_dir.join(setup.format.file_name("meta"));
    output::write_atomic(&meta_path, &output::meta_document(&setup.meta, sep))?;
    Ok((vec![density_path, meta_path], rec))
}

fn cmd_simulate(cli: &Cli, path: &Path) -> i32 {
    let res = (|| -> tdscat::Result<Vec<PathBuf>> {
        let map = config::parse_file(path)?;
        let setup = config::build_setup(&map, config_dir(path))?;
        let out_dir = resolve_out_dir(cli, setup.out_dir.as_deref());
        Ok(run_into(&setup, &out_dir)?.0)
    })();
    match res {
        Ok(files) => {
            if !cli.quiet {
                for f in &files {
                    println!("wrote {}", f.display());
                }
            }
            0
        }
        Err(e) => report(&e),
    }
}

struct SweepOutcome {
    dir_name: String,
    token: String,
    code: i32,
    message: String,
    max_dev: Option<f64>,
    rec: Option<DensityRecord>,
}

const STRING_KEYS: &[&str] = &[
    "run.mode",
    "potential.variant",
    "potential.table_path",
    "pulse.dipole_mode",
    "output.out_dir",
    "output.format",
];

fn cmd_sweep(cli: &Cli, path: &Path, param: &str, values: &str) -> i32 {
    let prep = (|| -> tdscat::Result<(config::KeyMap, Vec<String>, PathBuf, Format)> {
        let map = config::parse_file(path)?;
        if !config::KNOWN_KEYS.contains(&param) {
            return Err(Error::Config(format!("--param names unknown key '{param}'")));
        }
        if STRING_KEYS.contains(&param) {
            return Err(Error::Config(format!("--param {param} is not a numeric key")));
        }
        let tokens: Vec<String> = values
            .split(',')
            .map(|s| s.trim().to_owned())
            .filter(|s| !s.is_empty())
            .collect();
        if tokens.is_empty() {
            return Err(Error::Config("--values must list at least one number".into()));
        }
        for tok in &tokens {
            tok.parse::<f64>().map_err(|_| {
                Error::Config(format!("--values entry '{tok}' is not a number"))
            })?;
        }
        let (cfg_out, format) = config::output_options(&map)?;
        let out_root = resolve_out_dir(cli, cfg_out.as_deref());
        Ok((map, tokens, out_root, format))
    })();
    let (map, tokens, out_root, format) = match prep {
        Ok(v) => v,
        Err(e) => return report(&e),
    };

    let dir_key = param.rsplit('.').next().unwrap_or(param);
    let jobs: Vec<(usize, String, config::KeyMap)> = tokens
        .iter()
        .enumerate()
        .map(|(i, tok)| {
            let mut m = map.clone();
            m.insert(param.to_owned(), tok.clone());
            // Each run lands in its own subdirectory of the sweep root.
            m.remove("output.out_dir");
            (i, tok.clone(), m)
        })
        .collect();

    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.jobs.unwrap_or(0)).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: could not build the worker pool: {e}");
            return 3;
        }
    };
    let cfg_dir = config_dir(path).to_path_buf();
    let outcomes: Vec<SweepOutcome> = pool.install(|| {
        jobs.par_iter()
            .map(|(i, tok, m)| {
                let dir_name = format!("{i:02}_{dir_key}={tok}");
                let run_dir = out_root.join(&dir_name);
                let res = config::build_setup(m, &cfg_dir)
                    .and_then(|setup| run_into(&setup, &run_dir));
                match res {
                    Ok((_, rec)) => {
                        let max_dev = rec
                            .n
                            .iter()
                            .flatten()
                            .map(|&x| (x - 1.0).abs())
                            .fold(0.0, f64::max);
                        SweepOutcome {
                            dir_name,
                            token: tok.clone(),
                            code: 0,
                            message: "ok".into(),
                            max_dev: Some(max_dev),
                            rec: Some(rec),
                        }
                    }
                    Err(e) => SweepOutcome {
                        dir_name,
                        token: tok.clone(),
                        code: code_for(&e),
                        message: format!("{e}"),
                        max_dev: None,
                        rec: None,
                    },
                }
            })
            .collect()
    });

    let n_runs = outcomes.len();
    let mut diff = vec![vec![None::<f64>; n_runs]; n_runs];
    for i in 0..n_runs {
        for j in 0..n_runs {
            let (Some(a), Some(b)) = (&outcomes[i].rec, &outcomes[j].rec) else { continue };
            if a.times.len() != b.times.len() || a.sites.len() != b.sites.len() {
                continue;
            }
            let mut worst = 0.0f64;
            for (ra, rb) in a.n.iter().zip(&b.n) {
                for (x, y) in ra.iter().zip(rb) {
                    worst = worst.max((x - y).abs());
                }
            }
            diff[i][j] = Some(worst);
        }
    }

    let sep = format.sep();
    let mut doc = format!("run{sep}value{sep}status{sep}exit{sep}max_abs_n_minus_1");
    for i in 0..n_runs {
        doc.push_str(&format!("{sep}diff_{i:02}"));
    }
    doc.push('\n');
    for (i, o) in outcomes.iter().enumerate() {
        let status = if o.code == 0 { "ok" } else { "error" };
        let dev = o.max_dev.map(|v| format!("{v:.16e}")).unwrap_or_default();
        doc.push_str(&format!("{}{sep}{}{sep}{status}{sep}{}{sep}{dev}", o.dir_name, o.token, o.code));
        for pair in &diff[i] {
            let cell = pair.map(|v| format!("{v:.16e}")).unwrap_or_default();
            doc.push_str(&format!("{sep}{cell}"));
        }
        doc.push('\n');
    }
    let summary = out_root.join(format.file_name("sweep_summary"));
    if let Err(e) = std::fs::create_dir_all(&out_root)
        .and_then(|()| output::write_atomic(&summary, &doc))
    {
        eprintln!("error: {e}");
        return 4;
    }

    for o in &outcomes {
        if o.code != 0 {
            eprintln!("run {}: {}", o.dir_name, o.message);
        } else if !cli.quiet {
            println!("run {}: ok", o.dir_name);
        }
    }
    if !cli.quiet {
        println!("wrote {}", summary.display());
    }
    outcomes.iter().map(|o| o.code).max().unwrap_or(0)
}

fn cmd_verify(suite: &str) -> i32 {
    match tdscat::suite(suite) {
        Ok(reports) => {
            let mut all_pass = true;
            for r in &reports {
                println!("[{}] {}: {}", if r.pass { "PASS" } else { "FAIL" }, r.name, r.details);
                all_pass &= r.pass;
            }
            if all_pass {
                0
            } else {
                1
            }
        }
        Err(e) => report(&e),
    }
}

fn cmd_kernel_table(cli: &Cli, path: &Path) -> i32 {
    let res = (|| -> tdscat::Result<PathBuf> {
        let map = config::parse_file(path)?;
        let ks = config::build_kernel_setup(&map)?;
        let table = KernelTable::build(&ks.lat, ks.dt, ks.n_steps)?;
        let out_dir = resolve_out_dir(cli, ks.out_dir.as_deref());
        std::fs::create_dir_all(&out_dir)?;
        let file = out_dir.join(ks.format.file_name("kernel"));
        output::write_atomic(&file, &output::kernel_document(&table, ks.format.sep()))?;
        Ok(file)
    })();
    match res {
        Ok(file) => {
            if !cli.quiet {
                println!("wrote {}", file.display());
            }
            0
        }
        Err(e) => report(&e),
    }
}
