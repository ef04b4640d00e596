//! Command-line surface for the scaled tight wavelet bank pipeline:
//! construct banks from filter files, verify paraunitarity and scaling
//! identities, factor nonnegative polynomials, reproduce the built-in
//! worked constructions, and emit cascade plot data.
//!
//! Exit codes: 0 success, 2 mathematical precondition failure
//! (positivity, factorization, coefficient mismatch), 3 I/O or format
//! failure (unreadable files, invalid filters, bad parameters).

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use lpwave::families;
use lpwave::filterbank::{
    accuracy_order, construct_tight, construct_tight_with_factor, mask_autocorrelation_sum,
    mask_of, polyphase_decompose, simulate_pr, BankFile, Filter, FilterError, FilterFile,
    FilterKind, RefinementMask, WaveletBank,
};
use lpwave::laurent::{LaurentMatrix, LaurentPoly, SamplingGrid};
use lpwave::lp2::{self, build_lp2, canonical_scaling, verify_system, PolyphaseVector};
use lpwave::refinable::{cascade, family_beta, smoothness_bound, CascadeError, Family};
use lpwave::spectral::{certify_positive, fejer_riesz, HermitianLaurentPoly, SpectralError};

// Stdout macros that stay quiet when the pipe closes early (piping a
// report into `head` must not panic). Shadow the std prelude names so
// every call site below picks them up.
macro_rules! println {
    ($($arg:tt)*) => {{
        use std::io::Write;
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}
macro_rules! print {
    ($($arg:tt)*) => {{
        use std::io::Write;
        let _ = write!(std::io::stdout(), $($arg)*);
    }};
}

#[derive(Parser)]
#[command(
    name = "lpwave",
    version,
    about = "Tight wavelet filter banks by polyphase scaling"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a tight wavelet bank from a lowpass filter file.
    Construct {
        /// Filter JSON file.
        #[arg(long)]
        input: PathBuf,
        /// Bank JSON output path (default: stdout summary only).
        #[arg(long)]
        output: Option<PathBuf>,
        /// Scaling factor JSON (Laurent polynomial), required for
        /// multivariate filters.
        #[arg(long)]
        factor: Option<PathBuf>,
        /// Override the univariate dilation factor of the input file.
        #[arg(long)]
        lambda: Option<i64>,
    },
    /// Verify paraunitarity / scaling identities of a polyphase vector,
    /// Laurent matrix, or bank file.
    Verify {
        #[arg(long)]
        input: PathBuf,
        /// Residual tolerance.
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Grid points per dimension for sampled checks.
        #[arg(long, default_value_t = 256)]
        grid: usize,
    },
    /// Spectral factorization of a nonnegative univariate polynomial.
    Factor {
        /// Polynomial JSON file {"offset": k0, "coeffs": [...]}.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Inline alternative: comma-separated coefficients.
        #[arg(long, conflicts_with = "input", allow_hyphen_values = true)]
        coeffs: Option<String>,
        /// Exponent of the first inline coefficient.
        #[arg(
            long,
            default_value_t = 0,
            requires = "coeffs",
            allow_hyphen_values = true
        )]
        offset: i64,
        #[arg(long)]
        output: Option<PathBuf>,
        /// Require strict positivity.
        #[arg(long)]
        strict: bool,
    },
    /// Reproduce a built-in construction end to end and emit its data.
    Examples {
        /// Family: dd, bspline, or hat.
        family: String,
        /// Order (dd, bspline) or dilation factor (hat).
        param: i64,
        /// Directory for the emitted mask/bank/profile files.
        #[arg(long, default_value = ".")]
        output_dir: PathBuf,
        /// Subdivision depth for the emitted profiles.
        #[arg(long, default_value_t = 7)]
        level: u32,
    },
    /// Evaluate the refinable function of a lowpass filter on a dyadic grid.
    Cascade {
        #[arg(long)]
        input: PathBuf,
        /// CSV output path (default: stdout).
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, default_value_t = 7)]
        level: u32,
        #[arg(long)]
        lambda: Option<i64>,
    },
    /// Perfect-reconstruction round trip of a bank on a periodic signal.
    PrSim {
        /// Bank JSON file.
        #[arg(long)]
        input: PathBuf,
        /// Signal CSV (one value per line); generated when omitted.
        #[arg(long)]
        signal: Option<PathBuf>,
        /// Length of the generated signal.
        #[arg(long, default_value_t = 240)]
        length: usize,
        /// Seed for the generated signal.
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Report JSON output path.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

enum CliError {
    /// Mathematical precondition failure: exit 2.
    Math(String),
    /// I/O or format failure: exit 3.
    Input(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Math(_) => 2,
            CliError::Input(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Math(m) | CliError::Input(m) => m,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(format!("i/o error: {e}"))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Input(format!("malformed JSON: {e}"))
    }
}

impl From<FilterError> for CliError {
    fn from(e: FilterError) -> Self {
        match e {
            FilterError::Spectral(s) => s.into(),
            FilterError::FactorMismatch(_) => CliError::Math(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<SpectralError> for CliError {
    fn from(e: SpectralError) -> Self {
        match e {
            SpectralError::NotUnivariate(_)
            | SpectralError::NotSymmetric { .. }
            | SpectralError::Laurent(_) => CliError::Input(e.to_string()),
            _ => CliError::Math(e.to_string()),
        }
    }
}

impl From<CascadeError> for CliError {
    fn from(e: CascadeError) -> Self {
        match e {
            CascadeError::DegenerateMask(_) => CliError::Math(e.to_string()),
            CascadeError::Filter(f) => f.into(),
            _ => CliError::Input(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Construct {
            input,
            output,
            factor,
            lambda,
        } => cmd_construct(&input, output.as_deref(), factor.as_deref(), lambda),
        Command::Verify { input, tol, grid } => cmd_verify(&input, tol, grid),
        Command::Factor {
            input,
            coeffs,
            offset,
            output,
            strict,
        } => cmd_factor(
            input.as_deref(),
            coeffs.as_deref(),
            offset,
            output.as_deref(),
            strict,
        ),
        Command::Examples {
            family,
            param,
            output_dir,
            level,
        } => cmd_examples(&family, param, &output_dir, level),
        Command::Cascade {
            input,
            output,
            level,
            lambda,
        } => cmd_cascade(&input, output.as_deref(), level, lambda),
        Command::PrSim {
            input,
            signal,
            length,
            seed,
            output,
        } => cmd_pr_sim(&input, signal.as_deref(), length, seed, output.as_deref()),
    }
}

fn read_filter(path: &Path, lambda_override: Option<i64>) -> Result<Filter, CliError> {
    let text = std::fs::read_to_string(path)?;
    let file: FilterFile = serde_json::from_str(&text)?;
    let filter = file.into_filter()?;
    match lambda_override {
        None => Ok(filter),
        Some(l) => {
            if filter.dilation().n() != 1 {
                return Err(CliError::Input(
                    "--lambda override applies to univariate filters only".into(),
                ));
            }
            let taps: Vec<(Vec<i64>, f64)> =
                filter.coeffs().map(|(k, v)| (k.to_vec(), v)).collect();
            let d = lpwave::filterbank::DilationSpec::univariate(l)?;
            Ok(Filter::new(d, taps))
        }
    }
}

fn write_or_print(path: Option<&Path>, contents: &str) -> Result<(), CliError> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent() {
                if !dir.as_os_str().is_empty() {
                    std::fs::create_dir_all(dir)?;
                }
            }
            std::fs::write(p, contents)?;
            Ok(())
        }
        None => {
            println!("{contents}");
            Ok(())
        }
    }
}

fn bank_summary(bank: &WaveletBank) -> String {
    let c = &bank.certificate;
    let mut s = String::new();
    let _ = writeln!(s, "tight: {}", bank.tight);
    let _ = writeln!(
        s,
        "paraunitarity residual: polynomial {:.3e}, grid {:.3e} (tol {:.1e})",
        c.poly_residual, c.grid_residual, c.tolerance
    );
    if let (Some(a), Some(b)) = (c.accuracy_in, c.accuracy_out) {
        let _ = writeln!(s, "accuracy order: {a} -> {b}");
    }
    let (lo, hi) = c.lowpass_support[0];
    let _ = writeln!(
        s,
        "lowpass support: [{lo}, {hi}], {} highpass filters",
        bank.highpass.len()
    );
    s
}

fn cmd_construct(
    input: &Path,
    output: Option<&Path>,
    factor: Option<&Path>,
    lambda: Option<i64>,
) -> Result<(), CliError> {
    let filter = read_filter(input, lambda)?;
    let bank = match factor {
        None => {
            if filter.dilation().n() != 1 {
                return Err(CliError::Input(
                    "multivariate construction needs --factor with the scaling polynomial".into(),
                ));
            }
            construct_tight(&filter)?
        }
        Some(fp) => {
            let text = std::fs::read_to_string(fp)?;
            let m_h: LaurentPoly = serde_json::from_str(&text)?;
            construct_tight_with_factor(&filter, &m_h)?
        }
    };
    print!("{}", bank_summary(&bank));
    if let Some(out) = output {
        let json = serde_json::to_string_pretty(&BankFile::from_bank(&bank))?;
        write_or_print(Some(out), &json)?;
        println!("bank written to {}", out.display());
    }
    Ok(())
}

#[derive(Serialize)]
struct VerifyReport {
    paraunitary: bool,
    grid_residual: f64,
    poly_residual: f64,
    canonically_scaled: Option<bool>,
    autocorrelation_discrepancy: Option<f64>,
}

fn cmd_verify(input: &Path, tol: f64, grid_n: usize) -> Result<(), CliError> {
    if tol <= 0.0 {
        return Err(CliError::Input("tolerance must be positive".into()));
    }
    if grid_n < 64 {
        return Err(CliError::Input("grid density must be at least 64".into()));
    }
    let text = std::fs::read_to_string(input)?;
    let value: serde_json::Value = serde_json::from_str(&text)?;

    let (matrix, h_vec, bank): (LaurentMatrix, Option<PolyphaseVector>, Option<WaveletBank>) =
        if value.get("lowpass").is_some() {
            let bank: WaveletBank = serde_json::from_str::<BankFile>(&text)?.into_bank()?;
            (bank.polyphase_matrix()?, None, Some(bank))
        } else if value.get("rows").is_some() {
            let m: LaurentMatrix = serde_json::from_str(&text)?;
            (m, None, None)
        } else {
            let h: PolyphaseVector = serde_json::from_str(&text)?;
            (build_lp2(&h).matrix().clone(), Some(h), None)
        };

    let grid = SamplingGrid::uniform(grid_n);
    let report = lp2::is_paraunitary(&matrix, &grid, tol);
    println!("paraunitary: {}", report.passed);
    println!(
        "  grid residual {:.3e}, polynomial residual {:.3e} (tol {:.1e})",
        report.grid_residual, report.poly_residual, tol
    );

    let mut canonically_scaled = None;
    if let Some(h) = &h_vec {
        let phi = build_lp2(h);
        let b = canonical_scaling(h);
        let ok = verify_system(&phi, &b, tol).map_err(|e| CliError::Input(e.to_string()))?;
        canonically_scaled = Some(ok);
        println!("canonical-scaling identity (Phi B Phi* = I with b0 = 2 - H*H): {ok}");
    }

    let mut auto = None;
    if let Some(bank) = &bank {
        if bank.lowpass.kind() == FilterKind::Lowpass {
            let rep = mask_autocorrelation_sum(&bank.lowpass, &grid)?;
            println!(
                "mask autocorrelation identity: max discrepancy {:.3e} (max H*H value {:.6})",
                rep.max_discrepancy, rep.max_lhs
            );
            auto = Some(rep.max_discrepancy);
        }
    }

    let json = serde_json::to_string_pretty(&VerifyReport {
        paraunitary: report.passed,
        grid_residual: report.grid_residual,
        poly_residual: report.poly_residual,
        canonically_scaled,
        autocorrelation_discrepancy: auto,
    })?;
    println!("{json}");
    Ok(())
}

#[derive(Deserialize)]
struct PolyInput {
    offset: i64,
    coeffs: Vec<f64>,
}

#[derive(Serialize)]
struct FactorOutput {
    offset: i64,
    coeffs: Vec<f64>,
    certified_min: f64,
    roots: Vec<(f64, f64)>,
}

fn cmd_factor(
    input: Option<&Path>,
    coeffs: Option<&str>,
    offset: i64,
    output: Option<&Path>,
    strict: bool,
) -> Result<(), CliError> {
    let p_in = match (input, coeffs) {
        (Some(path), None) => {
            let text = std::fs::read_to_string(path)?;
            serde_json::from_str::<PolyInput>(&text)?
        }
        (None, Some(list)) => {
            let coeffs: Result<Vec<f64>, _> =
                list.split(',').map(|s| s.trim().parse::<f64>()).collect();
            PolyInput {
                offset,
                coeffs: coeffs.map_err(|e| CliError::Input(format!("bad coefficient: {e}")))?,
            }
        }
        _ => {
            return Err(CliError::Input(
                "factor needs either --input or --coeffs".into(),
            ))
        }
    };
    let p = HermitianLaurentPoly::from_coeffs(p_in.offset, &p_in.coeffs)?;
    let cert = certify_positive(&p, strict)?;
    if !cert.passed {
        return Err(CliError::Math(format!(
            "polynomial is not {} on the torus (sampled min {:.6e} at omega = {:.6})",
            if strict {
                "strictly positive"
            } else {
                "nonnegative"
            },
            cert.grid_min,
            cert.grid_argmin
        )));
    }
    let factor = fejer_riesz(&p)?;
    let (lo, hi) = factor.q_poly.exp_range(0).unwrap_or((0, 0));
    let out = FactorOutput {
        offset: lo,
        coeffs: (lo..=hi).map(|k| factor.q_poly.coeff(&[k])).collect(),
        certified_min: factor.certified_min,
        roots: factor.selected_roots.clone(),
    };
    let json = serde_json::to_string_pretty(&out)?;
    write_or_print(output, &json)?;
    if output.is_some() {
        println!(
            "factor with support [{lo}, {hi}] written, certified min {:.6e}",
            factor.certified_min
        );
    }
    Ok(())
}

/// Frozen closed-form mask tables for the three worked constructions.
fn expected_mask(family: &str, param: i64) -> Option<Vec<f64>> {
    match (family, param) {
        ("dd", 1) => {
            let s6 = 6.0f64.sqrt();
            Some(vec![
                (2.0 + s6) / 16.0,
                (2.0 + s6) / 8.0,
                0.25,
                (2.0 - s6) / 8.0,
                (2.0 - s6) / 16.0,
            ])
        }
        ("bspline", 3) => {
            let s7 = 7.0f64.sqrt();
            Some(vec![
                (2.0 + s7) / 32.0,
                (6.0 + 3.0 * s7) / 32.0,
                (8.0 + 2.0 * s7) / 32.0,
                (8.0 - 2.0 * s7) / 32.0,
                (6.0 - 3.0 * s7) / 32.0,
                (2.0 - s7) / 32.0,
            ])
        }
        ("hat", 3) => {
            let s3 = 3.0f64.sqrt();
            let s43 = 43.0f64.sqrt();
            let den = 54.0 * s3;
            Some(vec![
                (3.0 * s3 + s43) / den,
                (6.0 * s3 + 2.0 * s43) / den,
                (9.0 * s3 + 3.0 * s43) / den,
                (9.0 * s3 + s43) / den,
                (9.0 * s3 - s43) / den,
                (9.0 * s3 - 3.0 * s43) / den,
                (6.0 * s3 - 2.0 * s43) / den,
                (3.0 * s3 - s43) / den,
            ])
        }
        _ => None,
    }
}

fn profile_csv(mask: &RefinementMask, level: u32) -> Result<String, CliError> {
    let profile = cascade(mask, level)?;
    let mut csv = String::from("x,value\n");
    for (j, &v) in profile.samples().iter().enumerate() {
        let _ = writeln!(csv, "{},{}", profile.x_of(j), v);
    }
    Ok(csv)
}

fn cmd_examples(family: &str, param: i64, output_dir: &Path, level: u32) -> Result<(), CliError> {
    let (filter, beta, name) = match family {
        "dd" => {
            if !(1..=6).contains(&param) {
                return Err(CliError::Input("dd order must be in 1..=6".into()));
            }
            (
                families::dd_filter(param as u32)?,
                family_beta(Family::Dd(param as u32)),
                format!("dd{param}"),
            )
        }
        "bspline" => {
            if !(1..=8).contains(&param) {
                return Err(CliError::Input("bspline order must be in 1..=8".into()));
            }
            (
                families::bspline_filter(param as u32)?,
                family_beta(Family::Bspline(param as u32)),
                format!("bspline{param}"),
            )
        }
        "hat" => {
            if !(2..=6).contains(&param) {
                return Err(CliError::Input("hat dilation must be in 2..=6".into()));
            }
            (
                families::hat_filter(param)?,
                family_beta(Family::Hat),
                format!("hat{param}"),
            )
        }
        other => {
            return Err(CliError::Input(format!(
                "unknown family '{other}' (expected dd, bspline, or hat)"
            )))
        }
    };
    let lambda = filter.dilation().lambda().get(0, 0);

    // positivity certificate; for the interpolatory family the bound is >= 1
    let hv = polyphase_decompose(&filter)?;
    let b0 = &LaurentPoly::constant(1, 2.0) - &hv.norm_sq();
    let cert = certify_positive(
        &HermitianLaurentPoly::new(b0).map_err(CliError::from)?,
        true,
    )?;
    println!(
        "2 - H*H: certified min {:.9} (sampled min {:.9})",
        cert.lower_bound, cert.grid_min
    );
    if family == "dd" {
        if cert.lower_bound < 1.0 - 1e-6 {
            return Err(CliError::Math(format!(
                "interpolatory positivity bound violated: {:.9} < 1",
                cert.lower_bound
            )));
        }
        println!("interpolatory lower bound 2 - H*H >= 1 holds");
    }

    let bank = construct_tight(&filter)?;
    let tau = mask_of(&bank.lowpass)?;

    if let Some(want) = expected_mask(family, param) {
        for (j, &w) in want.iter().enumerate() {
            let got = tau.tau().coeff(&[j as i64]);
            if (got - w).abs() > 1e-10 {
                return Err(CliError::Math(format!(
                    "mask coefficient {j} mismatch: got {got:.15}, expected {w:.15}"
                )));
            }
        }
        println!("mask coefficients match the closed-form table (<= 1e-10)");
    }

    print!("{}", bank_summary(&bank));
    let (_, m_h) = bank
        .provenance
        .as_ref()
        .expect("constructed bank has provenance");
    let est = smoothness_bound(beta, m_h, lambda, 4096);
    println!(
        "smoothness: beta {:.6}, xi_sup {:.9}, alpha {:.6} (certified {:.6}), L2 {}",
        est.beta,
        est.xi_sup,
        est.alpha,
        est.alpha_certified,
        if est.l2_guaranteed() {
            "guaranteed"
        } else {
            "not guaranteed"
        }
    );

    std::fs::create_dir_all(output_dir)?;
    let smooth_path = output_dir.join(format!("{name}_smoothness.json"));
    std::fs::write(&smooth_path, serde_json::to_string_pretty(&est)?)?;
    let mask_path = output_dir.join(format!("{name}_mask.json"));
    std::fs::write(&mask_path, serde_json::to_string_pretty(tau.tau())?)?;
    let bank_path = output_dir.join(format!("{name}_bank.json"));
    std::fs::write(
        &bank_path,
        serde_json::to_string_pretty(&BankFile::from_bank(&bank))?,
    )?;
    let phi_path = output_dir.join(format!("{name}_phi.csv"));
    std::fs::write(&phi_path, profile_csv(&mask_of(&filter)?, level)?)?;
    let phi_tilde_path = output_dir.join(format!("{name}_phi_tilde.csv"));
    std::fs::write(&phi_tilde_path, profile_csv(&tau, level)?)?;
    println!(
        "wrote {}, {}, {}, {}, {}",
        mask_path.display(),
        bank_path.display(),
        phi_path.display(),
        phi_tilde_path.display(),
        smooth_path.display()
    );
    Ok(())
}

fn cmd_cascade(
    input: &Path,
    output: Option<&Path>,
    level: u32,
    lambda: Option<i64>,
) -> Result<(), CliError> {
    let filter = read_filter(input, lambda)?;
    let mask = mask_of(&filter)?;
    let csv = profile_csv(&mask, level)?;
    write_or_print(output, &csv)?;
    if let Some(p) = output {
        println!("profile written to {}", p.display());
    }
    Ok(())
}

#[derive(Serialize)]
struct PrReport {
    signal_length: usize,
    seed: Option<u64>,
    max_error: f64,
    accuracy_out: Option<usize>,
}

fn cmd_pr_sim(
    input: &Path,
    signal: Option<&Path>,
    length: usize,
    seed: u64,
    output: Option<&Path>,
) -> Result<(), CliError> {
    let text = std::fs::read_to_string(input)?;
    let bank = serde_json::from_str::<BankFile>(&text)?.into_bank()?;
    let lambda = bank.lowpass.dilation().q();

    let (signal, used_seed) = match signal {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            let values: Result<Vec<f64>, _> = text
                .lines()
                .filter(|l| !l.trim().is_empty())
                .map(|l| l.trim().parse::<f64>())
                .collect();
            (
                values.map_err(|e| CliError::Input(format!("bad signal value: {e}")))?,
                None,
            )
        }
        None => {
            let len = length - length % lambda;
            if len == 0 {
                return Err(CliError::Input(format!(
                    "length must be at least the dilation factor {lambda}"
                )));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (
                (0..len).map(|_| rng.random_range(-1.0..1.0)).collect(),
                Some(seed),
            )
        }
    };

    let err = simulate_pr(&bank, &signal)?;
    println!(
        "perfect reconstruction: max error {err:.3e} over {} samples",
        signal.len()
    );
    let accuracy_out =
        if bank.lowpass.kind() == FilterKind::Lowpass && bank.lowpass.dilation().n() == 1 {
            Some(accuracy_order(&mask_of(&bank.lowpass)?)?)
        } else {
            None
        };
    let report = PrReport {
        signal_length: signal.len(),
        seed: used_seed,
        max_error: err,
        accuracy_out,
    };
    if let Some(out) = output {
        write_or_print(Some(out), &serde_json::to_string_pretty(&report)?)?;
    }
    Ok(())
}
