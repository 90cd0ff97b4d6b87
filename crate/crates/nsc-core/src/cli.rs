//! The `nsc` command line: simulation, deviation tables, sensitivity
//! curves, mismatch compensation, scalar estimates, and budgets.
//!
//! Exit codes: 0 success, 1 computation error, 2 usage error, 3 I/O
//! error. Failures print one machine-parsable line,
//! `error: <category>: <detail>`. Randomized commands print the effective
//! seed, and every output file embeds the tool version, command line, and
//! seeds as comment metadata.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::asynchrony::{compensate, DEFAULT_PROBES};
use crate::error::{Error, Result};
use crate::estimator::{budget, extract_estimate, k_curve, Style, Variant};
use crate::io::{read_budget, read_csv, read_curve, write_csv, write_curve, write_truth};
use crate::noise::NoiseKind;
use crate::series::{block_average, TauGrid};
use crate::sim::{preset_seeded, simulate};
use crate::stats::{adev2, overlap_adev2};

#[derive(Parser)]
#[command(
    name = "nsc",
    version,
    about = "Sensitivity-coefficient estimation from synchronized time series"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Synthesize a preset scenario into CSV records plus a truth file
    Simulate {
        /// Preset name (see `--preset help` for the list)
        #[arg(long)]
        preset: String,
        /// Record-length rescaling in (0, 1]
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        /// Master seed; random when omitted
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory
        #[arg(long)]
        out: PathBuf,
    },
    /// Two-sample deviation table for one column
    Stats {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        col: String,
        /// `overlap` or `normal`
        #[arg(long, default_value = "overlap")]
        style: String,
        /// Base period override (seconds)
        #[arg(long)]
        tau0: Option<f64>,
    },
    /// Sensitivity curve of one column against another
    Kcurve {
        #[arg(long = "in")]
        input: PathBuf,
        /// Frequency column name
        #[arg(long)]
        y: String,
        /// Variable column name
        #[arg(long)]
        x: String,
        /// `nsc` or `nscd`
        #[arg(long, default_value = "nsc")]
        variant: String,
        /// `overlap` or `normal`
        #[arg(long, default_value = "overlap")]
        style: String,
        /// `auto`, `wfn`, `ffn`, or `rwn`
        #[arg(long, default_value = "auto")]
        noise: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        tau0: Option<f64>,
    },
    /// Search for the timing mismatch best aligning x with y
    Compensate {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        y: String,
        #[arg(long)]
        x: String,
        /// Delay search bound: D in [-dmax, dmax]
        #[arg(long, default_value_t = 32)]
        dmax: u32,
        /// Integral-window search bound: I in [1, imax]
        #[arg(long, default_value_t = 32)]
        imax: u32,
        /// Compensated curve output path
        #[arg(long, default_value = "compensated_curve.csv")]
        out: PathBuf,
        #[arg(long)]
        tau0: Option<f64>,
    },
    /// Scalar estimate from a curve file
    Estimate {
        #[arg(long)]
        curve: PathBuf,
    },
    /// Uncertainty budget from a config file
    Budget {
        #[arg(long)]
        spec: PathBuf,
    },
}

fn parse_style(s: &str) -> Result<Style> {
    Style::from_token(s).ok_or_else(|| Error::Usage(format!("style must be overlap or normal, got `{s}`")))
}

fn parse_variant(s: &str) -> Result<Variant> {
    Variant::from_token(s).ok_or_else(|| Error::Usage(format!("variant must be nsc or nscd, got `{s}`")))
}

fn parse_noise(s: &str) -> Result<Option<NoiseKind>> {
    if s == "auto" {
        return Ok(None);
    }
    NoiseKind::from_token(s)
        .map(Some)
        .ok_or_else(|| Error::Usage(format!("noise must be auto, wfn, ffn, or rwn, got `{s}`")))
}

fn base_metadata(command: &str) -> Vec<(String, String)> {
    vec![
        ("version".into(), env!("CARGO_PKG_VERSION").into()),
        ("command".into(), command.into()),
    ]
}

/// Entry point used by the `nsc` binary and by tests; returns the process
/// exit status.
pub fn run_cli<I>(argv: I) -> i32
where
    I: IntoIterator<Item = String>,
{
    let argv: Vec<String> = argv.into_iter().collect();
    let command_line = argv.join(" ");
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let mut report = String::new();
    let status = dispatch(cli.cmd, &command_line, &mut report);
    if let Err(e) = write_stdout(&report) {
        eprintln!("error: {}: {e}", e.category());
        return e.exit_code();
    }
    match status {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}: {e}", e.category());
            e.exit_code()
        }
    }
}

/// Writes command output in one shot; a consumer that closed the pipe
/// early (`head`, a pager) is not an error.
fn write_stdout(text: &str) -> Result<()> {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
        Ok(()) => Ok(()),
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        Err(e) => Err(Error::io("stdout", e)),
    }
}

fn dispatch(cmd: Cmd, command_line: &str, report: &mut String) -> Result<()> {
    match cmd {
        Cmd::Simulate {
            preset,
            scale,
            seed,
            out,
        } => cmd_simulate(&preset, scale, seed, &out, command_line, report),
        Cmd::Stats {
            input,
            col,
            style,
            tau0,
        } => cmd_stats(&input, &col, &style, tau0, report),
        Cmd::Kcurve {
            input,
            y,
            x,
            variant,
            style,
            noise,
            out,
            tau0,
        } => cmd_kcurve(
            &input,
            &y,
            &x,
            &variant,
            &style,
            &noise,
            &out,
            tau0,
            command_line,
            report,
        ),
        Cmd::Compensate {
            input,
            y,
            x,
            dmax,
            imax,
            out,
            tau0,
        } => cmd_compensate(&input, &y, &x, dmax, imax, &out, tau0, command_line, report),
        Cmd::Estimate { curve } => cmd_estimate(&curve, report),
        Cmd::Budget { spec } => cmd_budget(&spec, report),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    preset: &str,
    scale: f64,
    seed: Option<u64>,
    out: &Path,
    command_line: &str,
    report: &mut String,
) -> Result<()> {
    use std::fmt::Write;
    let seed = seed.unwrap_or_else(rand::random::<u64>);
    let _ = writeln!(report, "seed = {seed}");
    let scenario = preset_seeded(preset, scale, seed)?;
    let sim = simulate(&scenario)?;
    std::fs::create_dir_all(out).map_err(|e| Error::io(out.display().to_string(), e))?;

    let mut metadata = base_metadata(command_line);
    metadata.push(("seed".into(), seed.to_string()));
    metadata.push(("preset".into(), preset.into()));
    metadata.push(("scale".into(), scale.to_string()));
    for note in &scenario.notes {
        metadata.push(("note".into(), note.clone()));
    }

    let mut columns: Vec<(&str, &[f64])> = vec![("y", sim.y_com.values())];
    for (name, series) in &sim.measured {
        if name == "y" {
            return Err(Error::Domain("effect name `y` collides with the output column".into()));
        }
        columns.push((name, series.values()));
    }
    let data_path = out.join("data.csv");
    write_csv(&data_path, &columns, scenario.tau0, &metadata)?;
    let truth_path = out.join("truth.cfg");
    write_truth(&sim.truth, &truth_path, &metadata)?;
    let _ = writeln!(report, "wrote {}", data_path.display());
    let _ = writeln!(report, "wrote {}", truth_path.display());
    Ok(())
}

fn cmd_stats(
    input: &Path,
    col: &str,
    style: &str,
    tau0: Option<f64>,
    report: &mut String,
) -> Result<()> {
    use std::fmt::Write;
    let style = parse_style(style)?;
    let ds = read_csv(input, tau0)?;
    let series = ds.series(col)?;
    let grid = TauGrid::default_for(series.len())?;
    let _ = writeln!(report, "m,tau,adev");
    for &m in grid.factors() {
        let var = match style {
            Style::Overlap => {
                if series.len() < 2 * m + 1 {
                    continue;
                }
                overlap_adev2(&series, m)?
            }
            Style::Normal => adev2(&block_average(&series, m)?)?,
        };
        let _ = writeln!(report, "{},{},{}", m, m as f64 * series.tau0(), var.sqrt());
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_kcurve(
    input: &Path,
    y: &str,
    x: &str,
    variant: &str,
    style: &str,
    noise: &str,
    out: &Path,
    tau0: Option<f64>,
    command_line: &str,
    report: &mut String,
) -> Result<()> {
    use std::fmt::Write;
    let style = parse_style(style)?;
    let variant = parse_variant(variant)?;
    let kind = parse_noise(noise)?;
    let ds = read_csv(input, tau0)?;
    let ys = ds.series(y)?;
    let xs = ds.series(x)?;
    let grid = TauGrid::default_for(ys.len())?;
    let mut curve = k_curve(&ys, &xs, &grid, style, variant, kind)?;
    curve.provenance = (y.to_string(), x.to_string());
    write_curve(&curve, out, &base_metadata(command_line))?;
    let _ = writeln!(report, "wrote {} ({} points)", out.display(), curve.points.len());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_compensate(
    input: &Path,
    y: &str,
    x: &str,
    dmax: u32,
    imax: u32,
    out: &Path,
    tau0: Option<f64>,
    command_line: &str,
    report: &mut String,
) -> Result<()> {
    use std::fmt::Write;
    if imax < 1 {
        return Err(Error::Usage("imax must be at least 1".into()));
    }
    let ds = read_csv(input, tau0)?;
    let ys = ds.series(y)?;
    let xs = ds.series(x)?;
    let result = compensate(
        &ys,
        &xs,
        -(dmax as i64)..=dmax as i64,
        1..=imax as usize,
        &DEFAULT_PROBES,
    )?;
    let _ = writeln!(report, "D = {}", result.delay);
    let _ = writeln!(report, "I = {}", result.integral);
    let _ = writeln!(report, "score = {}", result.score);
    let mut curve = result.curve;
    curve.provenance = (y.to_string(), format!("{x}[D={},I={}]", result.delay, result.integral));
    let mut metadata = base_metadata(command_line);
    metadata.push(("delay".into(), result.delay.to_string()));
    metadata.push(("integral".into(), result.integral.to_string()));
    write_curve(&curve, out, &metadata)?;
    let _ = writeln!(report, "wrote {}", out.display());
    Ok(())
}

fn cmd_estimate(curve_path: &Path, report: &mut String) -> Result<()> {
    use std::fmt::Write;
    let curve = read_curve(curve_path)?;
    let est = extract_estimate(&curve)?;
    let _ = writeln!(report, "interval,k_bar,sigma_k_bar,sigma_k_max,sigma_total");
    let _ = writeln!(
        report,
        "{}-{},{},{},{},{}",
        est.m_lo, est.m_hi, est.k_bar, est.sigma_bar, est.sigma_max, est.sigma_total
    );
    Ok(())
}

fn cmd_budget(spec: &Path, report: &mut String) -> Result<()> {
    use std::fmt::Write;
    let entries = read_budget(spec)?;
    let b = budget(entries)?;
    let _ = writeln!(report, "name,k,sigma_x,contribution");
    for e in &b.entries {
        let _ = writeln!(report, "{},{},{},{}", e.name, e.k, e.sigma_x, e.contribution());
    }
    let _ = writeln!(report, "u_B = {}", b.u_b);
    Ok(())
}
