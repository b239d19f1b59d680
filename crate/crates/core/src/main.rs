use std::f64::consts::PI;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use unruh_cavity::cell::{CellConfig, IntegratorConfig, DEFAULT_LAMBDA0, DEFAULT_N_MODES};
use unruh_cavity::oracles::verify_suite;
use unruh_cavity::sweep::{
    log_spaced, mode_convergence, parse_number, physical_units, run_point, run_sweep, slope_table,
    write_json, write_modes_csv, write_points_csv, write_sweep_csv, FileSettings, GridSpec,
    OutputFormat, SweepGrid,
};
use unruh_cavity::{Error, Result};

/// Accelerated oscillator detector crossing a chain of Dirichlet cavities.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    /// TOML settings file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Asymptotic probe state and thermality at one (a0, omega0).
    Point(Common),
    /// 2-D (a0, omega0) sweep.
    Sweep(Common),
    /// dT0/da0 map with the Theta, M and R overlay curves.
    Slope {
        #[command(flatten)]
        common: Common,
        /// Write the overlay curves as JSON to this path.
        #[arg(long)]
        curves: Option<PathBuf>,
    },
    /// Temperature slope for several mode counts against the largest one.
    Modes {
        #[command(flatten)]
        common: Common,
        /// Ascending mode counts, comma separated.
        #[arg(long, value_delimiter = ',')]
        n_list: Option<Vec<usize>>,
    },
    /// Convert dimensionless a0 / omega0 to lab units for a cavity length.
    Units {
        /// Cavity length in metres.
        #[arg(long)]
        length: Option<f64>,
        #[arg(long, value_parser = number)]
        a0: Option<f64>,
        #[arg(long, value_parser = number)]
        omega0: Option<f64>,
        #[arg(long, value_parser = output_format)]
        format: Option<OutputFormat>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare the Gaussian pipeline with the perturbative and Fock-basis oracles.
    Verify,
}

#[derive(Args, Clone, Default)]
struct Common {
    #[arg(long, value_parser = number)]
    a0: Option<f64>,
    /// Probe gap; accepts forms like `pi/16`.
    #[arg(long, value_parser = number)]
    omega0: Option<f64>,
    #[arg(long)]
    lambda0: Option<f64>,
    #[arg(long)]
    n_modes: Option<usize>,
    /// Log-spaced a0 axis, `min:max:count`.
    #[arg(long)]
    grid_a0: Option<String>,
    /// Log-spaced omega0 axis, `min:max:count`.
    #[arg(long)]
    grid_omega0: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_parser = output_format)]
    format: Option<OutputFormat>,
    /// Worker threads (0 = one per core).
    #[arg(long)]
    workers: Option<usize>,
    /// No-op: every computation is deterministic.
    #[arg(long)]
    seedless: bool,
}

fn output_format(s: &str) -> std::result::Result<OutputFormat, String> {
    match s.to_ascii_lowercase().as_str() {
        "csv" => Ok(OutputFormat::Csv),
        "json" => Ok(OutputFormat::Json),
        _ => Err(format!("expected csv or json, got `{s}`")),
    }
}

fn number(s: &str) -> std::result::Result<f64, String> {
    parse_number(s).ok_or_else(|| format!("not a number: `{s}`"))
}

/// Flags merged over the settings file.
struct Resolved {
    a0: Option<f64>,
    omega0: Option<f64>,
    lambda0: f64,
    n_modes: usize,
    grid_a0: Option<Vec<f64>>,
    grid_omega0: Option<Vec<f64>>,
    n_list: Option<Vec<usize>>,
    workers: usize,
    out: Option<PathBuf>,
    format: OutputFormat,
    integrator: IntegratorConfig,
}

fn resolve(file: &FileSettings, c: &Common) -> Result<Resolved> {
    let grid = |flag: &Option<String>,
                file: &Option<unruh_cavity::sweep::GridValues>|
     -> Result<Option<Vec<f64>>> {
        match (flag, file) {
            (Some(s), _) => Ok(Some(s.parse::<GridSpec>()?.values()?)),
            (None, Some(g)) => Ok(Some(g.values()?)),
            (None, None) => Ok(None),
        }
    };
    Ok(Resolved {
        a0: c.a0.or(file.a0.as_ref().map(|n| n.value()).transpose()?),
        omega0: c
            .omega0
            .or(file.omega0.as_ref().map(|n| n.value()).transpose()?),
        lambda0: c.lambda0.or(file.lambda0).unwrap_or(DEFAULT_LAMBDA0),
        n_modes: c.n_modes.or(file.n_modes).unwrap_or(DEFAULT_N_MODES),
        grid_a0: grid(&c.grid_a0, &file.grid_a0)?,
        grid_omega0: grid(&c.grid_omega0, &file.grid_omega0)?,
        n_list: file.n_list.clone(),
        workers: c.workers.or(file.workers).unwrap_or(0),
        out: c.out.clone().or(file.out.clone()),
        format: c.format.or(file.format).unwrap_or_default(),
        integrator: file.integrator.unwrap_or_default(),
    })
}

fn required(v: Option<f64>, name: &'static str) -> Result<f64> {
    v.ok_or_else(|| Error::invalid(name, "missing; pass the flag or set it in the config file"))
}

fn sink(out: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => {
            Box::new(BufWriter::new(File::create(p).map_err(|e| {
                Error::invalid("out", format!("{}: {e}", p.display()))
            })?))
        }
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn sweep_grid(r: &Resolved) -> Result<SweepGrid> {
    let d = SweepGrid::default_map();
    let mut g = SweepGrid {
        a0_values: r.grid_a0.clone().unwrap_or(d.a0_values),
        omega0_values: r.grid_omega0.clone().unwrap_or(d.omega0_values),
        lambda0: r.lambda0,
        n_modes: r.n_modes,
        integrator: r.integrator,
    };
    // A single --a0 / --omega0 pins that axis.
    if r.grid_a0.is_none() {
        if let Some(a) = r.a0 {
            g.a0_values = vec![a];
        }
    }
    if r.grid_omega0.is_none() {
        if let Some(w) = r.omega0 {
            g.omega0_values = vec![w];
        }
    }
    g.validate()?;
    Ok(g)
}

fn run(cli: Cli) -> Result<bool> {
    let file = match &cli.config {
        Some(p) => FileSettings::load(p)?,
        None => FileSettings::default(),
    };
    match cli.command {
        Command::Point(c) => {
            let r = resolve(&file, &c)?;
            let cfg = CellConfig::new(
                required(r.a0, "a0")?,
                required(r.omega0, "omega0")?,
                r.lambda0,
                r.n_modes,
            )?
            .with_integrator(r.integrator)?;
            let res = run_point(&cfg);
            let mut out = sink(&r.out)?;
            match r.format {
                OutputFormat::Csv => write_points_csv(&mut out, &[(&res, None)])?,
                OutputFormat::Json => write_json(&mut out, &res)?,
            }
            out.flush().ok();
            Ok(res.is_ok())
        }
        Command::Sweep(c) => {
            let r = resolve(&file, &c)?;
            let sweep = run_sweep(&sweep_grid(&r)?, r.workers)?;
            let mut out = sink(&r.out)?;
            match r.format {
                OutputFormat::Csv => write_sweep_csv(&mut out, &sweep)?,
                OutputFormat::Json => write_json(&mut out, &sweep)?,
            }
            out.flush().ok();
            Ok(true)
        }
        Command::Slope { common, curves } => {
            let r = resolve(&file, &common)?;
            let sweep = run_sweep(&sweep_grid(&r)?, r.workers)?;
            let table = slope_table(&sweep)?;
            let mut out = sink(&r.out)?;
            match r.format {
                OutputFormat::Csv => write_sweep_csv(&mut out, &sweep)?,
                OutputFormat::Json => write_json(&mut out, &table)?,
            }
            out.flush().ok();
            if let Some(p) = curves {
                write_json(sink(&Some(p))?, &table.curves)?;
            }
            Ok(true)
        }
        Command::Modes { common, n_list } => {
            let r = resolve(&file, &common)?;
            let a0 = match &r.grid_a0 {
                Some(v) => v.clone(),
                None => log_spaced(1e-2, 1e2, 40)?,
            };
            let n_list = n_list
                .or(r.n_list.clone())
                .unwrap_or_else(|| vec![10, 20, 30, 60, 110, 160, 210]);
            let mc = mode_convergence(
                &a0,
                r.omega0.unwrap_or(PI / 16.0),
                r.lambda0,
                &n_list,
                r.integrator,
                r.workers,
            )?;
            let mut out = sink(&r.out)?;
            match r.format {
                OutputFormat::Csv => write_modes_csv(&mut out, &mc)?,
                OutputFormat::Json => write_json(&mut out, &mc)?,
            }
            out.flush().ok();
            for c in &mc.curves {
                eprintln!(
                    "N = {:>4}: slope within 1% of N = {} up to a0 = {}",
                    c.n_modes,
                    mc.reference_n_modes,
                    c.agrees_up_to
                        .map_or("-".to_string(), |a| format!("{a:.4}"))
                );
            }
            Ok(true)
        }
        Command::Units {
            length,
            a0,
            omega0,
            format,
            out,
        } => {
            let length = required(length.or(file.length_m), "length")?;
            let a0 = a0.or(file.a0.as_ref().map(|n| n.value()).transpose()?);
            let omega0 = omega0.or(file.omega0.as_ref().map(|n| n.value()).transpose()?);
            let u = physical_units(length, a0, omega0)?;
            let mut w = sink(&out.or(file.out.clone()))?;
            match format.or(file.format).unwrap_or_default() {
                OutputFormat::Json => write_json(&mut w, &u)?,
                OutputFormat::Csv => {
                    let f = |v: Option<f64>| unruh_cavity::sweep::fmt_f64(v);
                    writeln!(
                        w,
                        "length_m,a0,acceleration_m_s2,acceleration_g,omega0,omega_p_rad_s"
                    )
                    .and_then(|_| {
                        writeln!(
                            w,
                            "{},{},{},{},{},{}",
                            f(Some(u.length_m)),
                            f(u.a0),
                            f(u.acceleration),
                            f(u.acceleration_g),
                            f(u.omega0),
                            f(u.omega_p)
                        )
                    })
                    .map_err(|e| Error::invalid("out", e.to_string()))?;
                }
            }
            w.flush().ok();
            Ok(true)
        }
        Command::Verify => {
            let rows = verify_suite();
            let width = rows.iter().map(|r| r.name.len()).max().unwrap_or(0);
            for r in &rows {
                println!(
                    "{:<4} {:<width$}  {:>12.4e}  {}",
                    if r.passed { "PASS" } else { "FAIL" },
                    r.name,
                    r.value,
                    r.limit
                );
            }
            Ok(rows.iter().all(|r| r.passed))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error [{}]: {e}", e.code());
            ExitCode::from(2)
        }
    }
}
