//! `wkde`: run risk sweeps, certify contamination budgets, validate the
//! invariant suites, and plot rate fits.
//!
//! Exit codes: 0 success, 1 validation-suite or operational failure,
//! 2 usage/config error.

mod plot;
mod suites;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use wkde_core::contamination::{t2_budget_bound, WassersteinBudget};
use wkde_core::density::{bump_field, make_bump, make_gaussian, perturb};
use wkde_core::estimator::Kernel;
use wkde_core::profiles::Profile;
use wkde_core::risk::{
    exponent_table, rate_fit, sweep_to_csv, ExperimentConfig, SweepRow, CSV_HEADER,
};
use wkde_core::transport::{bb_certificate, w_exact_1d_densities};

/// Usage or configuration problem: exit 2.
const EXIT_USAGE: u8 = 2;
/// Operation or validation failure: exit 1.
const EXIT_FAILURE: u8 = 1;

#[derive(Parser)]
#[command(name = "wkde", version, about = "Robust kernel density estimation under Wasserstein-bounded contamination")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo risk sweep from a config file; writes CSV + summary.
    Sweep(SweepArgs),
    /// Certify a bump contamination: dynamic-formulation certificate,
    /// transportation-cost bound, and the exact 1-D distance.
    Certify(CertifyArgs),
    /// Run a named invariant suite (exponents, lemma-1d, interpolation, holder).
    Validate(ValidateArgs),
    /// Render a log-log SVG plot of a sweep CSV with fitted and reference lines.
    Plot(PlotArgs),
    /// List registered densities, bump profiles, and kernels.
    Bank,
}

#[derive(Args)]
struct SweepArgs {
    /// Experiment config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Override the config's base seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for CSV and summary (default: config's directory).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// Override the epsilon grid (comma separated).
    #[arg(long, value_delimiter = ',')]
    epsilon: Option<Vec<f64>>,
    /// Override the n grid (comma separated).
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
}

#[derive(Args)]
struct CertifyArgs {
    /// Gaussian base scale.
    #[arg(long, default_value_t = 3.0)]
    sigma: f64,
    /// Dimension.
    #[arg(long, default_value_t = 1)]
    dim: usize,
    /// Bump center (comma separated).
    #[arg(long, value_delimiter = ',', default_value = "0.0")]
    center: Vec<f64>,
    /// Bump width.
    #[arg(long, default_value_t = 0.5)]
    width: f64,
    /// Bump amplitude.
    #[arg(long, default_value_t = 0.05)]
    tau: f64,
    /// Bump profile name.
    #[arg(long, default_value = "poly4")]
    profile: String,
    /// Norm index q in [1, inf] ("inf" accepted).
    #[arg(long, default_value = "2")]
    q: String,
    /// Power r in [1, inf).
    #[arg(long, default_value = "2")]
    r: String,
}

#[derive(Args)]
struct ValidateArgs {
    /// Suite name.
    suite: String,
    /// Worker threads (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct PlotArgs {
    /// Sweep CSV path.
    csv: PathBuf,
    /// Which grid variable is on the x axis: "n" or "epsilon".
    #[arg(long)]
    kind: String,
    /// Reference slope for the dashed theory line.
    #[arg(long)]
    ref_slope: Option<f64>,
    /// Config file to derive the reference slope from.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output SVG path (default: CSV path with .svg extension).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Sweep(args) => cmd_sweep(args),
        Command::Certify(args) => cmd_certify(args),
        Command::Validate(args) => cmd_validate(args),
        Command::Plot(args) => cmd_plot(args),
        Command::Bank => cmd_bank(),
    };
    match code {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn init_jobs(jobs: Option<usize>) {
    if let Some(jobs) = jobs {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build_global();
    }
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

fn cmd_sweep(args: SweepArgs) -> Result<u8, String> {
    init_jobs(args.jobs);
    if !args.config.exists() {
        return Err(format!("config file not found: {}", args.config.display()));
    }
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| format!("cannot read {}: {e}", args.config.display()))?;
    let mut config: ExperimentConfig = match toml::from_str(&text) {
        Ok(c) => c,
        Err(e) => return Err(format!("{}: {e}", args.config.display())),
    };
    if let Some(seed) = args.seed {
        config.sweep.seed = seed;
    }
    if let Some(eps) = args.epsilon {
        config.sweep.epsilon = eps;
    }
    if let Some(n) = args.n {
        config.sweep.n = n;
    }
    config.validate().map_err(|e| e.to_string())?;

    let out_dir = args
        .out
        .unwrap_or_else(|| args.config.parent().unwrap_or(Path::new(".")).to_path_buf());
    std::fs::create_dir_all(&out_dir).map_err(|e| e.to_string())?;
    let csv_path = out_dir.join(&config.sweep.output);
    let rows = sweep_to_csv(&config, &csv_path).map_err(|e| e.to_string())?;

    let summary_path = csv_path.with_extension("md");
    let summary = render_summary(&config, &rows);
    std::fs::write(&summary_path, &summary).map_err(|e| e.to_string())?;

    println!("wrote {}", csv_path.display());
    println!("wrote {}", summary_path.display());
    let failures: Vec<&SweepRow> = rows.iter().filter(|r| r.error.is_some()).collect();
    for row in &failures {
        eprintln!(
            "grid point (n={}, epsilon={}) failed: {}",
            row.n,
            row.epsilon,
            row.error.as_deref().unwrap_or("unknown")
        );
    }
    for line in summary.lines().filter(|l| l.starts_with("- fitted")) {
        println!("{line}");
    }
    Ok(if failures.is_empty() { 0 } else { EXIT_FAILURE })
}

fn render_summary(config: &ExperimentConfig, rows: &[SweepRow]) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    let _ = writeln!(out, "# Sweep summary\n");
    let _ = writeln!(
        out,
        "- density: {} (sigma={}, dim={})",
        config.density.kind, config.density.sigma, config.density.dim
    );
    let _ = writeln!(
        out,
        "- class: s={}, L={}",
        config.class.s, config.class.constant
    );
    let _ = writeln!(
        out,
        "- contamination: {} (q={}, r={})",
        config.contamination.kind, config.contamination.q, config.contamination.r
    );
    let _ = writeln!(
        out,
        "- estimator: kernel={}, bandwidth={}, c={}",
        config.estimator.kernel, config.estimator.bandwidth, config.estimator.c
    );
    let _ = writeln!(
        out,
        "- replications: {}, base seed: {}\n",
        config.sweep.replications, config.sweep.seed
    );

    if config.contamination.kind != "none" {
        if let Ok(density) = config.density() {
            let _ = writeln!(out, "## Certificates\n");
            let _ = writeln!(out, "| epsilon | certificate | method |");
            let _ = writeln!(out, "|---|---|---|");
            for &eps in &config.effective_epsilon_grid() {
                match config.plan(&density, eps) {
                    Ok(Some(plan)) => {
                        let d = plan.describe();
                        let _ = writeln!(
                            out,
                            "| {eps} | {:.6e} | {:?} |",
                            d.certificate, d.method
                        );
                    }
                    Ok(None) => {}
                    Err(e) => {
                        let _ = writeln!(out, "| {eps} | failed: {e} | - |");
                    }
                }
            }
            let _ = writeln!(out);
        }
    }

    let _ = writeln!(out, "## Rows\n");
    let _ = writeln!(out, "```\n{}", CSV_HEADER);
    for row in rows {
        let _ = writeln!(out, "{}", row.csv_line());
    }
    let _ = writeln!(out, "```\n");

    let _ = writeln!(out, "## Rate fits\n");
    let table = exponent_table(config.class.s, config.density.dim, config.contamination.r)
        .expect("validated config");
    let eps_grid = config.effective_epsilon_grid();
    let ok_rows: Vec<&SweepRow> = rows.iter().filter(|r| r.error.is_none()).collect();
    if config.sweep.n.len() > 1 && eps_grid.len() == 1 {
        let pts: Vec<(f64, f64)> = ok_rows.iter().map(|r| (r.n as f64, r.mse)).collect();
        if let Ok(fit) = rate_fit(&pts) {
            let _ = writeln!(
                out,
                "- fitted mse-vs-n slope: {:.4} (r^2 {:.4}); theoretical -2s/(2s+p) = {:.4}",
                fit.slope, fit.r_squared, -table.classical_n
            );
        }
    }
    if eps_grid.len() > 1 && config.sweep.n.len() == 1 {
        let pts: Vec<(f64, f64)> = ok_rows.iter().map(|r| (r.epsilon, r.mse)).collect();
        if let Ok(fit) = rate_fit(&pts) {
            let _ = writeln!(
                out,
                "- fitted mse-vs-epsilon slope: {:.4} (r^2 {:.4}); theoretical 2s/(s+1+p/r) = {:.4}",
                fit.slope, fit.r_squared, table.theorem_eps
            );
        }
    }
    out
}

// ---------------------------------------------------------------------------
// certify
// ---------------------------------------------------------------------------

fn parse_order(text: &str, name: &str) -> Result<f64, String> {
    if text.eq_ignore_ascii_case("inf") || text.eq_ignore_ascii_case("infinity") {
        return Ok(f64::INFINITY);
    }
    text.parse::<f64>()
        .map_err(|_| format!("cannot parse {name} = '{text}'"))
}

fn cmd_certify(args: CertifyArgs) -> Result<u8, String> {
    let q = parse_order(&args.q, "q")?;
    let r = parse_order(&args.r, "r")?;
    if r.is_infinite() {
        return Err("r must be finite: the transport power lies in [1, inf)".into());
    }
    if !(q >= 1.0) || !(r >= 1.0) {
        return Err(format!("need q >= 1 and r >= 1, got q={q}, r={r}"));
    }
    if args.center.len() != args.dim {
        return Err(format!(
            "center has {} coordinates but dim = {}",
            args.center.len(),
            args.dim
        ));
    }
    let base = make_gaussian(args.sigma, args.dim).map_err(|e| e.to_string())?;
    let bump = make_bump(args.center.clone(), args.width, args.tau, &args.profile)
        .map_err(|e| e.to_string())?;
    let field = bump_field(&bump).map_err(|e| e.to_string())?;

    println!(
        "base: gaussian(sigma={}, dim={}); bump: {}(center={:?}, width={}, tau={})",
        args.sigma, args.dim, args.profile, args.center, args.width, args.tau
    );

    let cert = match bb_certificate(&base, &bump, &field, q, r) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("certificate failed: {e}");
            return Ok(EXIT_FAILURE);
        }
    };
    println!(
        "dynamic-formulation certificate (q={q}, r={r}): {:.8e}  [floor c_I = {:.6e}, divergence residual = {:.2e}]",
        cert.value,
        cert.meta.floor.unwrap_or(f64::NAN),
        cert.meta.divergence_residual.unwrap_or(f64::NAN),
    );

    let perturbed = match perturb(&base, &bump) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("perturbation failed: {e}");
            return Ok(EXIT_FAILURE);
        }
    };

    let mut failed = false;
    if args.dim == 1 {
        match t2_budget_bound(&base, &perturbed) {
            Ok(t2) => println!("transportation-cost budget bound (W2): {t2:.8e}"),
            Err(e) => {
                eprintln!("transportation-cost bound failed: {e}");
                failed = true;
            }
        }
        match w_exact_1d_densities(&base, &perturbed, r) {
            Ok(exact) => {
                println!("exact 1-D distance (r={r}): {:.8e}", exact.value);
                // perturbed quantiles come from the 2^16-point CDF grid, so
                // the comparison carries that grid's resolution
                let dominance = cert.value >= exact.value - 1e-6;
                println!(
                    "dominance certificate >= exact: {}",
                    if dominance { "PASS" } else { "FAIL" }
                );
                if exact.value > 1e-9 {
                    println!("certificate/exact ratio: {:.4}", cert.value / exact.value);
                }
                failed |= !dominance;
            }
            Err(e) => {
                eprintln!("exact distance failed: {e}");
                failed = true;
            }
        }
    }
    Ok(if failed { EXIT_FAILURE } else { 0 })
}

// ---------------------------------------------------------------------------
// validate
// ---------------------------------------------------------------------------

fn cmd_validate(args: ValidateArgs) -> Result<u8, String> {
    init_jobs(args.jobs);
    let checks = match args.suite.as_str() {
        "exponents" => suites::exponents(),
        "lemma-1d" => suites::lemma_1d(),
        "interpolation" => suites::interpolation(),
        "holder" => suites::holder(),
        other => {
            return Err(format!(
                "unknown suite '{other}' (registered: exponents, lemma-1d, interpolation, holder)"
            ))
        }
    };
    let width = checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
    let mut all_pass = true;
    for check in &checks {
        println!(
            "{:width$}  {}  {}",
            check.name,
            if check.pass { "PASS" } else { "FAIL" },
            check.details
        );
        all_pass &= check.pass;
    }
    Ok(if all_pass { 0 } else { EXIT_FAILURE })
}

// ---------------------------------------------------------------------------
// plot
// ---------------------------------------------------------------------------

fn cmd_plot(args: PlotArgs) -> Result<u8, String> {
    if args.kind != "n" && args.kind != "epsilon" {
        return Err(format!("unknown plot kind '{}' (use n or epsilon)", args.kind));
    }
    let text = std::fs::read_to_string(&args.csv)
        .map_err(|e| format!("cannot read {}: {e}", args.csv.display()))?;
    let mut lines = text.lines();
    match lines.next() {
        Some(header) if header.trim() == CSV_HEADER => {}
        other => {
            return Err(format!(
                "{} does not match the sweep CSV schema (expected header '{CSV_HEADER}', got {:?})",
                args.csv.display(),
                other.unwrap_or("")
            ))
        }
    }
    let mut points = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(format!("{}: malformed row {}", args.csv.display(), i + 2));
        }
        let n: f64 = fields[0].parse().map_err(|_| format!("bad n in row {}", i + 2))?;
        let eps: f64 = fields[1]
            .parse()
            .map_err(|_| format!("bad epsilon in row {}", i + 2))?;
        let mse: f64 = match fields[2] {
            "nan" => f64::NAN,
            v => v.parse().map_err(|_| format!("bad mse in row {}", i + 2))?,
        };
        if mse.is_finite() && mse > 0.0 {
            points.push((if args.kind == "n" { n } else { eps }, mse));
        }
    }
    if points.len() < 3 {
        return Err(format!(
            "{} has {} usable rows; need at least 3 to fit a rate",
            args.csv.display(),
            points.len()
        ));
    }
    let fit = rate_fit(&points).map_err(|e| e.to_string())?;

    let ref_slope = match (args.ref_slope, &args.config) {
        (Some(slope), _) => slope,
        (None, Some(path)) => {
            let config = ExperimentConfig::from_path(path).map_err(|e| e.to_string())?;
            let table =
                exponent_table(config.class.s, config.density.dim, config.contamination.r)
                    .map_err(|e| e.to_string())?;
            if args.kind == "n" {
                -table.classical_n
            } else {
                table.theorem_eps
            }
        }
        (None, None) => {
            return Err("provide --ref-slope or --config to draw the reference line".into())
        }
    };

    let out = args
        .out
        .unwrap_or_else(|| args.csv.with_extension("svg"));
    let svg = plot::loglog_svg(&points, &fit, ref_slope, &args.kind);
    std::fs::write(&out, svg).map_err(|e| e.to_string())?;
    println!("wrote {}", out.display());
    println!(
        "fitted slope {:.4} (r^2 {:.4}); reference slope {:.4}",
        fit.slope, fit.r_squared, ref_slope
    );
    Ok(0)
}

// ---------------------------------------------------------------------------
// bank
// ---------------------------------------------------------------------------

fn cmd_bank() -> Result<u8, String> {
    println!("densities:");
    println!("  gaussian(sigma, dim)            isotropic normal, dim <= 3");
    println!("  gaussian+bump                   mean-zero perturbation via perturb()");
    println!();
    println!("bump profiles (unit sup norm, support [-1, 1]):");
    for name in Profile::registry() {
        let p = Profile::by_name(&name).unwrap();
        println!(
            "  {name:10}  {}",
            if p.mean_zero() {
                "mean-zero (derivative of plateau); valid first-axis shape"
            } else {
                "nonnegative plateau; map-shift localization / product factor"
            }
        );
    }
    println!();
    println!("kernels:");
    for name in Kernel::registry() {
        let k = Kernel::by_name(&name, 1).unwrap();
        println!(
            "  {name:10}  order {}, support {}, gradient {}",
            k.order(),
            match k.support_radius() {
                Some(r) => format!("[-{r}, {r}]"),
                None => "unbounded".into(),
            },
            if k.grad_available() { "available" } else { "unavailable" }
        );
    }
    println!();
    println!("bandwidth rules: classical, robust (budget-aware)");
    println!("contamination plans: shift (map), lower-bound (density perturbation)");
    let _ = WassersteinBudget::new(2.0, 2.0, 0.0);
    Ok(0)
}
