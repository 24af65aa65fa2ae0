//! `divisor` — command-line divisibility analysis of probability
//! distributions.
//!
//! Subcommands: `psi` (second-characteristic CSV), `fracpow`
//! (fractional convolution power), `member` (is `t ∈ Λ(μ)`?), `scan`
//! (membership scan with `λ₀`/`λ₁` estimates), `check` (admissibility
//! and invariant suite).
//!
//! Exit codes: 0 success, 1 usage error, 2 computation error, 3 a
//! negative/non-member result where the command's semantics define one.
//!
//! `DIVISOR_THREADS` caps scan parallelism (0 or unset = automatic).

// argument guards use `!(x > 0.0)` deliberately: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod csvout;
pub mod spec;

use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use divisor_core::{
    admissibility_check, cf_eval, frac_power_grid, frac_power_series, has_series_route, is_member,
    lambda_scan, psi_closed_form, scaling_check, second_characteristic, semigroup_spot_check,
    DistExpr, Evidence, FracPowerOutput, GridParams, MembershipMethod,
};

const EXIT_OK: i32 = 0;
const EXIT_USAGE: i32 = 1;
const EXIT_COMPUTE: i32 = 2;
const EXIT_NEGATIVE: i32 = 3;

#[derive(Parser)]
#[command(
    name = "divisor",
    version,
    about = "Convolution-divisibility analysis of probability distributions"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sample the second characteristic ψ and export CSV (y, re, im)
    Psi(PsiArgs),
    /// Compute the fractional convolution power μ^{*t}
    Fracpow(FracArgs),
    /// Decide whether t belongs to Λ(μ)
    Member(MemberArgs),
    /// Scan a t range, estimate λ₀/λ₁, and classify divisibility
    Scan(ScanArgs),
    /// Admissibility check plus semigroup/scaling invariant suite
    Check(CheckArgs),
}

/// Where the distribution comes from: a spec file, or a built-in
/// example family.
#[derive(Args)]
struct Source {
    /// Distribution spec file (JSON subset; see README)
    spec: Option<PathBuf>,
    /// Built-in example family instead of a spec file
    #[arg(long, value_enum)]
    example: Option<Example>,
    /// α parameter for --example (0 < α < 1)
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Example {
    /// ν = (1+α)⁻¹(δ₀ + αδ₁), minimally divisible
    Nu,
    /// μ = γ₁ ∗ ν, partly divisible with a membership ray
    Mu,
}

#[derive(Args)]
struct PsiArgs {
    #[command(flatten)]
    source: Source,
    /// Frequency window half-width
    #[arg(long, default_value_t = 40.0)]
    ymax: f64,
    /// Base grid points per half-axis
    #[arg(long, default_value_t = 2048)]
    samples: usize,
    /// Write CSV here instead of standard output
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FracArgs {
    #[command(flatten)]
    source: Source,
    /// Power exponent t > 0
    #[arg(long)]
    t: f64,
    /// Force a route (default: series when available, else grid)
    #[arg(long, value_enum)]
    route: Option<Route>,
    /// Grid route: frequency window half-width (default: auto)
    #[arg(long)]
    ymax: Option<f64>,
    /// Grid route: number of frequency samples, power of two (default: auto)
    #[arg(long)]
    nfreq: Option<usize>,
    /// Series route: truncation tail tolerance
    #[arg(long, default_value_t = 1e-10)]
    tail_tol: f64,
    /// Write CSV here instead of standard output
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Route {
    Series,
    Grid,
}

#[derive(Args)]
struct MemberArgs {
    #[command(flatten)]
    source: Source,
    /// Membership point t > 0
    #[arg(long)]
    t: f64,
    /// Decision method
    #[arg(long, value_enum, default_value_t = Method::Density)]
    method: Method,
    /// Decision tolerance (default: per-method)
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    /// Signed fractional power, series or grid route as available
    Density,
    /// Gram positive-semidefiniteness (Bochner) test
    Psd,
}

#[derive(Args)]
struct ScanArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long)]
    tmin: f64,
    #[arg(long)]
    tmax: f64,
    /// Number of grid points (integers in range are added automatically)
    #[arg(long)]
    steps: usize,
    /// Decision tolerance (default: per-method)
    #[arg(long)]
    tol: Option<f64>,
    /// Write per-t verdicts as CSV here
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    source: Source,
    /// Frequency window half-width for the admissibility scan
    #[arg(long, default_value_t = 40.0)]
    ymax: f64,
    /// Samples per half-axis for the admissibility scan
    #[arg(long, default_value_t = 4096)]
    samples: usize,
}

enum Failure {
    Usage(String),
    Compute(String),
}

impl Failure {
    fn report(self) -> i32 {
        match self {
            Failure::Usage(msg) => {
                eprintln!("usage error: {msg}");
                EXIT_USAGE
            }
            Failure::Compute(msg) => {
                eprintln!("error: {msg}");
                EXIT_COMPUTE
            }
        }
    }
}

fn compute_err(e: impl std::fmt::Display) -> Failure {
    Failure::Compute(e.to_string())
}

impl Source {
    fn load(&self) -> Result<DistExpr, Failure> {
        match (&self.spec, self.example) {
            (Some(_), Some(_)) => Err(Failure::Usage(
                "give either a spec file or --example, not both".into(),
            )),
            (None, None) => Err(Failure::Usage(
                "a spec file or --example nu|mu is required".into(),
            )),
            (Some(path), None) => {
                let text = fs::read_to_string(path).map_err(|e| {
                    Failure::Compute(format!("cannot read {}: {e}", path.display()))
                })?;
                spec::parse_spec(&text).map_err(compute_err)
            }
            (None, Some(example)) => match example {
                Example::Nu => DistExpr::nu_example(self.alpha).map_err(compute_err),
                Example::Mu => DistExpr::mu_example(self.alpha).map_err(compute_err),
            },
        }
    }
}

/// Entry point; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return code;
        }
    };
    with_thread_cap(|| match dispatch(cli) {
        Ok(code) => code,
        Err(f) => f.report(),
    })
}

/// Honors `DIVISOR_THREADS` (0 or unset = automatic parallelism).
fn with_thread_cap<F: FnOnce() -> i32 + Send>(f: F) -> i32 {
    let cap = std::env::var("DIVISOR_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .unwrap_or(0);
    if cap == 0 {
        return f();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(cap).build() {
        Ok(pool) => pool.install(f),
        Err(e) => {
            eprintln!("warning: cannot build thread pool ({e}); running with defaults");
            f()
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32, Failure> {
    match cli.cmd {
        Cmd::Psi(args) => cmd_psi(args),
        Cmd::Fracpow(args) => cmd_fracpow(args),
        Cmd::Member(args) => cmd_member(args),
        Cmd::Scan(args) => cmd_scan(args),
        Cmd::Check(args) => cmd_check(args),
    }
}

/// Writes `content` to `--out` (summary to stdout) or to stdout
/// (summary to stderr so the CSV stream stays clean).
fn emit(out: &Option<PathBuf>, content: &str, summary: &str) -> Result<(), Failure> {
    match out {
        Some(path) => {
            fs::write(path, content)
                .map_err(|e| Failure::Compute(format!("cannot write {}: {e}", path.display())))?;
            println!("{summary} -> {}", path.display());
        }
        None => {
            print!("{content}");
            eprintln!("{summary}");
        }
    }
    Ok(())
}

fn cmd_psi(args: PsiArgs) -> Result<i32, Failure> {
    let expr = args.source.load()?;
    let trace = second_characteristic(&expr, args.ymax, args.samples).map_err(compute_err)?;
    let summary = format!(
        "psi: {} samples over [-{}, {}], refinement depth {}",
        trace.samples().len(),
        args.ymax,
        args.ymax,
        trace.refinement_depth()
    );
    emit(&args.out, &csvout::psi_csv(&trace), &summary)?;
    Ok(EXIT_OK)
}

fn cmd_fracpow(args: FracArgs) -> Result<i32, Failure> {
    let expr = args.source.load()?;
    if !(args.t > 0.0) {
        return Err(Failure::Usage(format!("--t must be > 0, got {}", args.t)));
    }
    let use_series = match args.route {
        Some(Route::Series) => true,
        Some(Route::Grid) => false,
        None => has_series_route(&expr),
    };
    let (out, route_name, tol) = if use_series {
        let out = frac_power_series(&expr, args.t, args.tail_tol).map_err(compute_err)?;
        (out, "series", MembershipMethod::SeriesDensity.default_tolerance())
    } else {
        let auto = GridParams::suggest(&expr, args.t);
        let y_max = args.ymax.unwrap_or(auto.y_max);
        let n_freq = args.nfreq.unwrap_or(auto.n_freq);
        let d = frac_power_grid(&expr, args.t, y_max, n_freq).map_err(compute_err)?;
        (
            FracPowerOutput::Density(d),
            "grid",
            MembershipMethod::GridDensity.default_tolerance(),
        )
    };
    let (at, min) = out.min_value();
    let nonneg = out.is_nonnegative(tol);
    let (csv, size) = match &out {
        FracPowerOutput::Atoms(m) => (csvout::atoms_csv(m), format!("{} atoms", m.atoms().len())),
        FracPowerOutput::Density(d) => (csvout::density_csv(d), format!("{} samples", d.len())),
    };
    let summary = format!(
        "fracpow t={} route={route_name} {size} min={min:.4e} at={at} mass={:.6} {}",
        args.t,
        out.total_mass(),
        if nonneg { "non-negative" } else { "SIGNED" },
    );
    emit(&args.out, &csv, &summary)?;
    Ok(if nonneg { EXIT_OK } else { EXIT_NEGATIVE })
}

fn cmd_member(args: MemberArgs) -> Result<i32, Failure> {
    let expr = args.source.load()?;
    if !(args.t > 0.0) {
        return Err(Failure::Usage(format!("--t must be > 0, got {}", args.t)));
    }
    let method = match args.method {
        Method::Density => MembershipMethod::preferred_density(&expr),
        Method::Psd => MembershipMethod::GramPsd,
    };
    let tol = args.tol.unwrap_or_else(|| method.default_tolerance());
    let v = is_member(&expr, args.t, tol, method).map_err(compute_err)?;
    let ev_name = match method {
        MembershipMethod::SeriesDensity => "min_weight",
        MembershipMethod::GridDensity => "min_density",
        MembershipMethod::GramPsd => "min_eig",
    };
    if v.member {
        println!("MEMBER t={}", v.t);
        Ok(EXIT_OK)
    } else {
        match v.evidence {
            Evidence::MinValue { value, location } => {
                println!("NON-MEMBER t={} {ev_name}={value:.4e} at={location}", v.t)
            }
            Evidence::MinEigenvalue { value } => {
                println!("NON-MEMBER t={} {ev_name}={value:.4e}", v.t)
            }
        }
        Ok(EXIT_NEGATIVE)
    }
}

fn cmd_scan(args: ScanArgs) -> Result<i32, Failure> {
    let expr = args.source.load()?;
    let method = MembershipMethod::preferred_density(&expr);
    let tol = args.tol.unwrap_or_else(|| method.default_tolerance());
    let report =
        lambda_scan(&expr, args.tmin, args.tmax, args.steps, tol).map_err(compute_err)?;
    println!("{report}");
    if args.out.is_some() {
        let summary = format!(
            "scan: {} grid points, {} members, classification {}",
            report.t_grid.len(),
            report.members().len(),
            report.classification
        );
        emit(&args.out, &csvout::scan_csv(&report), &summary)?;
    }
    Ok(EXIT_OK)
}

fn cmd_check(args: CheckArgs) -> Result<i32, Failure> {
    let expr = args.source.load()?;
    let mut failed = false;
    let mut line = |ok: bool, msg: String| {
        println!("{} {msg}", if ok { "OK  " } else { "FAIL" });
        if !ok {
            failed = true;
        }
    };

    let report = admissibility_check(&expr, args.ymax, args.samples).map_err(compute_err)?;
    line(
        report.is_admissible(),
        format!(
            "admissibility on [-{}, {}]: min |cf| = {:.4e} at y = {:.6}",
            args.ymax, args.ymax, report.min_modulus, report.at_y
        ),
    );
    if !report.is_admissible() {
        println!("inadmissible distribution: remaining checks skipped");
        return Ok(EXIT_NEGATIVE);
    }

    let trace = second_characteristic(&expr, args.ymax, args.samples).map_err(compute_err)?;
    let mut worst_exp = 0.0f64;
    let mut worst_conj = 0.0f64;
    for &(y, psi) in trace.samples() {
        let h = cf_eval(&expr, y);
        worst_exp = worst_exp.max((psi.exp() - h).norm() / h.norm());
        if let Ok(mirror) = trace.psi_at(-y) {
            worst_conj = worst_conj.max((mirror - psi.conj()).norm());
        }
    }
    line(
        worst_exp <= 1e-9,
        format!("exp(psi) consistency: worst relative error {worst_exp:.3e}"),
    );
    line(
        worst_conj <= 1e-9,
        format!("conjugate symmetry: worst deviation {worst_conj:.3e}"),
    );

    if psi_closed_form(&expr, 1.0).is_some() {
        let mut worst = 0.0f64;
        for &(y, psi) in trace.samples() {
            let cf = psi_closed_form(&expr, y).expect("closed form");
            worst = worst.max((cf - psi).norm());
        }
        line(
            worst <= 1e-8,
            format!("closed-form psi agreement: worst deviation {worst:.3e}"),
        );
    }

    for (s, t) in [(1.0, 1.0), (1.0, 2.0)] {
        match semigroup_spot_check(&expr, s, t, 1e-7) {
            Ok(ok) => line(ok, format!("semigroup: mu_{s} * mu_{t} = mu_{}", s + t)),
            Err(e) => line(false, format!("semigroup ({s}, {t}): {e}")),
        }
    }
    for probe in [0.5, 0.75, 1.3] {
        match scaling_check(&expr, 1.0, 2.0, probe, 1e-7) {
            Ok(ok) => line(ok, format!("scaling: probe {probe} over (s, t) = (1, 2)")),
            Err(e) => line(false, format!("scaling probe {probe}: {e}")),
        }
    }

    Ok(if failed { EXIT_NEGATIVE } else { EXIT_OK })
}
