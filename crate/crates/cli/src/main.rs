use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use tmqi_core::eval::{
    evaluate_dataset, per_image_json, to_csv, to_markdown, EvalOptions, EvalReport, MetricKrcc,
};
use tmqi_core::io::{load_ldr, load_manifest_file, read_hdr, read_ldr, save_ldr, write_gray_png};
use tmqi_core::phase::hdr_reference_plane;
use tmqi_core::{
    fidelity_ascent_step, luminance, lwmpa, structural_fidelity, tmqi3, Error, GradientMethod,
    LdrImage, NaturalnessParams, Plane, QualityBreakdown, RangeAlignment, RgbRaster, TmqiParams,
};

const EXIT_USAGE: u8 = 1;
const EXIT_IO: u8 = 2;
const EXIT_DIMENSIONS: u8 = 3;

#[derive(Parser)]
#[command(
    name = "tmqi",
    version,
    about = "Quality scores for tone-mapped images against their HDR source"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score one tone-mapped image against its HDR reference.
    Score {
        hdr: PathBuf,
        ldr: PathBuf,
        #[command(flatten)]
        metric: MetricArgs,
        #[arg(long, value_enum, default_value_t = Format::Plain)]
        format: Format,
    },
    /// Correlate scores with subjective rankings over a dataset manifest.
    Eval {
        manifest: PathBuf,
        #[command(flatten)]
        metric: MetricArgs,
        /// Directory receiving krcc.csv, table.md and scores.json.
        #[arg(long)]
        out: PathBuf,
        /// Skip sets whose files cannot be read or scored.
        #[arg(long)]
        skip_broken: bool,
        #[arg(long, value_enum, default_value_t = Format::Plain)]
        format: Format,
    },
    /// Nudge the LDR luminance toward higher structural fidelity.
    Enhance {
        hdr: PathBuf,
        ldr: PathBuf,
        #[command(flatten)]
        metric: MetricArgs,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 10)]
        steps: usize,
        /// Step size of each ascent update.
        #[arg(long, default_value_t = 5e3, value_parser = non_negative)]
        lambda: f64,
        /// Use the closed-form gradient instead of finite differences.
        #[arg(long)]
        analytic: bool,
    },
    /// Render the local phase map of an image as a grayscale PNG.
    DumpPhase {
        image: PathBuf,
        #[command(flatten)]
        metric: MetricArgs,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args, Clone)]
struct MetricArgs {
    /// Fidelity window size in pixels (odd).
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    c1: Option<f64>,
    #[arg(long)]
    c2: Option<f64>,
    /// Local-contrast visibility threshold in code values.
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    mu_r: Option<f64>,
    #[arg(long)]
    sigma_r: Option<f64>,
    #[arg(long)]
    scales: Option<usize>,
    #[arg(long)]
    orients: Option<usize>,
    #[arg(long)]
    min_wavelength: Option<f64>,
    /// Align HDR luminance logarithmically instead of linearly for fidelity.
    #[arg(long)]
    log_align: bool,
}

impl MetricArgs {
    fn params(&self) -> Result<TmqiParams, Error> {
        let mut p = TmqiParams::default();
        if let Some(w) = self.window {
            p.fidelity.window_size = w;
        }
        if let Some(c1) = self.c1 {
            p.fidelity.c1 = c1;
        }
        if let Some(c2) = self.c2 {
            p.fidelity.c2 = c2;
        }
        if let Some(tau) = self.tau {
            p.fidelity = p.fidelity.with_tau(tau);
        }
        if self.mu_r.is_some() || self.sigma_r.is_some() {
            let d = NaturalnessParams::default();
            p.naturalness = NaturalnessParams::centered(
                self.mu_r.unwrap_or(d.mu_r),
                self.sigma_r.unwrap_or(d.sigma_r),
            );
        }
        if let Some(s) = self.scales {
            p.phase.bank.n_scales = s;
        }
        if let Some(o) = self.orients {
            p.phase.bank.n_orientations = o;
        }
        if let Some(m) = self.min_wavelength {
            p.phase.bank.min_wavelength = m;
        }
        if self.log_align {
            p.hdr_alignment = RangeAlignment::Log;
        }
        p.validate()?;
        Ok(p)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Markdown,
    Plain,
}

fn non_negative(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err(format!("must be a finite non-negative number, got {s}"))
    }
}

/// Six significant digits regardless of magnitude.
fn sig6(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v:.5}");
    }
    let decimals = (5 - v.abs().log10().floor() as i32).max(0) as usize;
    format!("{v:.decimals$}")
}

enum Failure {
    Usage(String),
    Run(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Run(e)
    }
}

fn usage(e: Error) -> Failure {
    Failure::Usage(e.to_string())
}

fn render_breakdown(b: &QualityBreakdown, format: Format) -> String {
    let cols = [
        ("F", b.f),
        ("N", b.n),
        ("L", b.l),
        ("Q", b.q),
        ("tmqi1", b.tmqi1),
    ];
    match format {
        Format::Json => serde_json::to_string_pretty(b).expect("plain numbers serialize"),
        Format::Csv => {
            let head: Vec<&str> = cols.iter().map(|c| c.0).collect();
            let vals: Vec<String> = cols.iter().map(|c| sig6(c.1)).collect();
            format!("{}\n{}", head.join(","), vals.join(","))
        }
        Format::Markdown => {
            let head: Vec<&str> = cols.iter().map(|c| c.0).collect();
            let vals: Vec<String> = cols.iter().map(|c| sig6(c.1)).collect();
            format!(
                "| {} |\n|{}\n| {} |",
                head.join(" | "),
                "---|".repeat(cols.len()),
                vals.join(" | ")
            )
        }
        Format::Plain => cols
            .iter()
            .map(|(k, v)| format!("{k:<6}{}", sig6(*v)))
            .collect::<Vec<_>>()
            .join("\n"),
    }
}

fn render_summary(report: &EvalReport, format: Format) -> String {
    match format {
        Format::Json => serde_json::to_string_pretty(&serde_json::json!({
            "metrics": MetricKrcc::NAMES,
            "summaries": report.summaries,
            "skipped": report.skipped,
        }))
        .expect("plain values serialize"),
        Format::Csv => to_csv(report),
        Format::Markdown => to_markdown(report),
        Format::Plain => {
            let mut lines = vec![format!(
                "{} sets evaluated, {} skipped",
                report.sets.len(),
                report.skipped.len()
            )];
            for (name, s) in MetricKrcc::NAMES.iter().zip(&report.summaries) {
                lines.push(format!(
                    "{name:<7} KRCC average {}  min {}  max {}  std {}",
                    sig6(s.average),
                    sig6(s.min),
                    sig6(s.max),
                    sig6(s.std)
                ));
            }
            for s in &report.skipped {
                lines.push(format!("skipped set {}: {}", s.set_id, s.reason));
            }
            lines.join("\n")
        }
    }
}

fn load_hdr_or_ldr(path: &Path) -> Result<(Plane, bool), Error> {
    let bytes = std::fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let wrap = |e: Error| Error::File {
        path: path.to_path_buf(),
        source: Box::new(e),
    };
    if bytes.starts_with(b"#?") || bytes.starts_with(b"PF") || bytes.starts_with(b"Pf") {
        Ok((luminance(&read_hdr(&bytes).map_err(wrap)?), true))
    } else {
        Ok((luminance(&read_ldr(&bytes).map_err(wrap)?), false))
    }
}

fn write_out(path: &Path, bytes: &[u8]) -> Result<(), Error> {
    std::fs::write(path, bytes).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Rescales each pixel's RGB by the luminance change; black pixels become gray.
fn recolour(ldr: &LdrImage, old_y: &Plane, new_y: &Plane) -> Result<LdrImage, Error> {
    let data = ldr
        .data()
        .chunks_exact(3)
        .zip(old_y.data().iter().zip(new_y.data()))
        .flat_map(|(px, (&yo, &yn))| {
            let to_code = |v: f64| v.round().clamp(0.0, 255.0) as u8;
            if yo > 0.0 {
                let ratio = yn / yo;
                [
                    to_code(px[0] as f64 * ratio),
                    to_code(px[1] as f64 * ratio),
                    to_code(px[2] as f64 * ratio),
                ]
            } else {
                [to_code(yn); 3]
            }
        })
        .collect();
    LdrImage::new(ldr.width(), ldr.height(), data)
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Score {
            hdr,
            ldr,
            metric,
            format,
        } => {
            let params = metric.params().map_err(usage)?;
            let (hdr, ldr) = (tmqi_core::io::load_hdr(&hdr)?, load_ldr(&ldr)?);
            println!("{}", render_breakdown(&tmqi3(&hdr, &ldr, &params)?, format));
        }
        Command::Eval {
            manifest,
            metric,
            out,
            skip_broken,
            format,
        } => {
            let params = metric.params().map_err(usage)?;
            let manifest = load_manifest_file(&manifest)?;
            let report = evaluate_dataset(&manifest, &params, EvalOptions { skip_broken })?;
            std::fs::create_dir_all(&out).map_err(|source| Error::Io {
                path: out.clone(),
                source,
            })?;
            write_out(&out.join("krcc.csv"), to_csv(&report).as_bytes())?;
            write_out(&out.join("table.md"), to_markdown(&report).as_bytes())?;
            write_out(
                &out.join("scores.json"),
                per_image_json(&report)?.as_bytes(),
            )?;
            println!("{}", render_summary(&report, format));
        }
        Command::Enhance {
            hdr,
            ldr,
            metric,
            out,
            steps,
            lambda,
            analytic,
        } => {
            let params = metric.params().map_err(usage)?;
            let (hdr, ldr) = (tmqi_core::io::load_hdr(&hdr)?, load_ldr(&ldr)?);
            if hdr.dims() != ldr.dims() {
                return Err(Failure::Run(Error::DimensionMismatch {
                    left_width: hdr.dims().0,
                    left_height: hdr.dims().1,
                    right_width: ldr.dims().0,
                    right_height: ldr.dims().1,
                }));
            }
            let method = if analytic {
                GradientMethod::Analytic
            } else {
                GradientMethod::FiniteDifference
            };
            let x = params.hdr_alignment.align(&luminance(&hdr));
            let y0 = luminance(&ldr);
            let mut y = y0.clone();
            println!(
                "step 0: S = {}",
                sig6(structural_fidelity(&x, &y, &params.fidelity)?.s)
            );
            for k in 1..=steps {
                y = fidelity_ascent_step(&x, &y, lambda, &params.fidelity, method)?;
                println!(
                    "step {k}: S = {}",
                    sig6(structural_fidelity(&x, &y, &params.fidelity)?.s)
                );
            }
            let result = if steps == 0 || lambda == 0.0 {
                ldr
            } else {
                recolour(&ldr, &y0, &y)?
            };
            save_ldr(&result, &out)?;
        }
        Command::DumpPhase { image, metric, out } => {
            let params = metric.params().map_err(usage)?;
            let (plane, is_hdr) = load_hdr_or_ldr(&image)?;
            let plane = if is_hdr {
                hdr_reference_plane(&plane, &params.phase)
            } else {
                plane
            };
            let map = lwmpa(&plane, &params.phase)?;
            let (w, h) = map.dims();
            write_out(&out, &write_gray_png(w, h, &map.to_gray8())?)?;
        }
    }
    Ok(())
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("TMQI_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("TMQI_THREADS must be a positive integer, got {raw:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(EXIT_USAGE);
    }
    log::debug!("running with {} threads", rayon::current_num_threads());
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e}");
            if e.is_dimension_mismatch() {
                ExitCode::from(EXIT_DIMENSIONS)
            } else {
                ExitCode::from(EXIT_IO)
            }
        }
    }
}
