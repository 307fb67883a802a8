//! Command dispatch for the `rcwb` binary.
//!
//! Machine-readable data goes to standard output (or `--out`); diagnostics
//! and human-readable summaries, with decimal approximations clearly
//! marked, go to standard error. Exit codes: 0 success, 1 failed
//! verification, 2 usage error.

use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;
use std::str::FromStr;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};

use rcwb_core::ah_system::{iterate_and_check, DiagonalSystemSpec};
use rcwb_core::certificates::{
    certified_rho_supremum, niu_upper_bound, rc_lower_certificate, verify_certificate,
    RcCertificate, SystemId,
};
use rcwb_core::exact::{approx_f64, format_rational, parse_rational};
use rcwb_core::matrix_model::{averaging_trials, kr_witness_trials, lemma_suite_with_threads};
use rcwb_core::report::Report;
use rcwb_core::sequences::{kappa_interval, rank_recursion_identities, SeqTable};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFICATION_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Parser)]
#[command(
    name = "rcwb",
    about = "Exact workbench for diagonal sphere-product systems: stage tables, \
             comparison certificates, bound reports, and matrix checks",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Exact stage table (d, l, r, s, t, u) up to a stage index.
    Seq {
        /// Largest stage index to tabulate.
        #[arg(long)]
        max: u32,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Certified rational bracket for the limit of the ratio u(n).
    Kappa {
        /// Number of exact factors in the partial product.
        #[arg(long, default_value_t = 40)]
        terms: u32,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rank bookkeeping: recursion identities plus the closed-form
    /// iteration check on both presets.
    Ranks {
        /// Largest stage index to check.
        #[arg(long, default_value_t = 10)]
        max: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Upper bound and certified-rho supremum for one system.
    Bounds {
        /// "paper-a", "paper-b", or a path to a custom system JSON.
        #[arg(long, default_value = "paper-a")]
        system: String,
        #[arg(long, default_value_t = 40)]
        terms: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a replayable lower-bound certificate.
    CertLower {
        /// "paper-a" or "paper-b".
        #[arg(long)]
        system: String,
        /// Comparison level as an exact rational "p/q".
        #[arg(long)]
        rho: String,
        #[arg(long, default_value_t = 40)]
        terms: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Replay a certificate file; exit 0 only if every step passes.
    CertVerify {
        path: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Randomized matrix-algebra checks with reproducible seeding.
    MatrixSuite {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        /// Largest sample dimension.
        #[arg(long, default_value_t = 16)]
        dim: usize,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Usage problems exit 2, failed verifications exit 1.
enum CliError {
    Usage(String),
    Failed(String),
}

impl CliError {
    fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    fn failed(msg: impl Into<String>) -> Self {
        CliError::Failed(msg.into())
    }
}

fn emit(out: &Option<PathBuf>, data: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, data)
            .map_err(|e| CliError::usage(format!("writing {path:?}: {e}"))),
        None => {
            print!("{data}");
            Ok(())
        }
    }
}

fn report_json(report: &Report) -> String {
    let mut text =
        serde_json::to_string_pretty(&report.to_json()).expect("report serializes");
    text.push('\n');
    text
}

/// Parses argv and runs one subcommand, returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(CliError::Failed(msg)) => {
            eprintln!("error: {msg}");
            EXIT_VERIFICATION_FAILED
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32, CliError> {
    match cli.cmd {
        Cmd::Seq { max, format, out } => {
            let table = SeqTable::up_to(max);
            let data = match format {
                Format::Csv => table.to_csv(),
                Format::Json => {
                    let mut text = serde_json::to_string_pretty(&table.to_json())
                        .expect("table serializes");
                    text.push('\n');
                    text
                }
            };
            emit(&out, &data)?;
            eprintln!("stages 0..={max} tabulated");
            Ok(EXIT_OK)
        }
        Cmd::Kappa { terms, format, out } => {
            if terms < 1 {
                return Err(CliError::usage("kappa needs --terms >= 1"));
            }
            let ki = kappa_interval(terms);
            let data = match format {
                Format::Csv => format!(
                    "terms,lower_num,lower_den,upper_num,upper_den\n{},{},{},{},{}\n",
                    ki.terms,
                    ki.lower.numer(),
                    ki.lower.denom(),
                    ki.upper.numer(),
                    ki.upper.denom()
                ),
                Format::Json => {
                    let v = serde_json::json!({
                        "terms": ki.terms,
                        "lower": format_rational(&ki.lower),
                        "upper": format_rational(&ki.upper),
                    });
                    let mut text =
                        serde_json::to_string_pretty(&v).expect("interval serializes");
                    text.push('\n');
                    text
                }
            };
            emit(&out, &data)?;
            eprintln!(
                "ratio limit in [{:.15}, {:.15}] (approximate decimals)",
                approx_f64(&ki.lower),
                approx_f64(&ki.upper)
            );
            Ok(EXIT_OK)
        }
        Cmd::Ranks { max, out } => {
            let mut combined = rank_recursion_identities(max);
            if max >= 1 {
                let iteration = iterate_and_check(max);
                combined.entries.extend(iteration.entries);
            }
            emit(&out, &report_json(&combined))?;
            let failures = combined.entries.iter().filter(|e| !e.pass).count();
            eprintln!(
                "{} checks, {} failed",
                combined.entries.len(),
                failures
            );
            Ok(if combined.passed() {
                EXIT_OK
            } else {
                EXIT_VERIFICATION_FAILED
            })
        }
        Cmd::Bounds { system, terms, out } => {
            let (spec, label, sup) = match system.as_str() {
                "paper-a" => (
                    DiagonalSystemSpec::paper_a(2),
                    "paper-a".to_string(),
                    Some(certified_rho_supremum(SystemId::PaperA, terms)),
                ),
                "paper-b" => (
                    DiagonalSystemSpec::paper_b(2),
                    "paper-b".to_string(),
                    Some(certified_rho_supremum(SystemId::PaperB, terms)),
                ),
                path => {
                    let text = fs::read_to_string(path)
                        .map_err(|e| CliError::usage(format!("reading {path:?}: {e}")))?;
                    let spec = DiagonalSystemSpec::from_json(&text)
                        .map_err(|e| CliError::usage(e.to_string()))?;
                    (spec, path.to_string(), None)
                }
            };
            let rc =
                niu_upper_bound(&spec, terms).map_err(|e| CliError::failed(e.to_string()))?;
            let ki = kappa_interval(terms);
            let v = serde_json::json!({
                "system": label,
                "terms": terms,
                "rc_upper_bound": format_rational(&rc.upper),
                "certified_rho_supremum": sup.as_ref().map(format_rational),
                "kappa": {
                    "lower": format_rational(&ki.lower),
                    "upper": format_rational(&ki.upper),
                },
                "provenance": rc.provenance,
            });
            let mut text = serde_json::to_string_pretty(&v).expect("bounds serialize");
            text.push('\n');
            emit(&out, &text)?;
            eprintln!(
                "rc upper bound ≈ {:.15} (approximate)",
                approx_f64(&rc.upper)
            );
            let squeezed = sup.map(|s| s <= rc.upper).unwrap_or(true);
            Ok(if squeezed { EXIT_OK } else { EXIT_VERIFICATION_FAILED })
        }
        Cmd::CertLower {
            system,
            rho,
            terms,
            out,
        } => {
            let system = SystemId::from_str(&system).map_err(|e| CliError::usage(e.to_string()))?;
            let rho = parse_rational(&rho).map_err(CliError::usage)?;
            if rho < rcwb_core::exact::ratio(0, 1) {
                return Err(CliError::usage("--rho must be nonnegative"));
            }
            let cert = rc_lower_certificate(system, &rho, terms)
                .map_err(|e| CliError::failed(e.to_string()))?;
            let mut text = cert.to_json_string();
            text.push('\n');
            emit(&out, &text)?;
            eprintln!(
                "witness: stage n={} rank M={} for rho={} (≈{:.6}, approximate)",
                cert.n,
                cert.m_rank,
                format_rational(&cert.rho),
                approx_f64(&cert.rho)
            );
            Ok(EXIT_OK)
        }
        Cmd::CertVerify { path, out } => {
            let text = fs::read_to_string(&path)
                .map_err(|e| CliError::usage(format!("reading {path:?}: {e}")))?;
            let report = match RcCertificate::from_json_str(&text) {
                Ok(cert) => verify_certificate(&cert),
                Err(e) => {
                    // an unusable certificate is a failed verification
                    let mut report = Report::new();
                    report.push("parse", false, e.to_string());
                    report
                }
            };
            emit(&out, &report_json(&report))?;
            for entry in &report.entries {
                eprintln!(
                    "{} {}{}",
                    if entry.pass { "PASS" } else { "FAIL" },
                    entry.label,
                    if entry.detail.is_empty() {
                        String::new()
                    } else {
                        format!(" — {}", entry.detail)
                    }
                );
            }
            Ok(if report.passed() {
                EXIT_OK
            } else {
                EXIT_VERIFICATION_FAILED
            })
        }
        Cmd::MatrixSuite {
            seed,
            trials,
            dim,
            tol,
            out,
        } => {
            if trials < 1 || dim < 2 || tol <= 0.0 {
                return Err(CliError::usage(
                    "matrix-suite needs --trials >= 1, --dim >= 2, --tol > 0",
                ));
            }
            let threads = std::env::var("RCWB_THREADS")
                .ok()
                .and_then(|v| v.parse::<usize>().ok())
                .filter(|&n| n >= 1)
                .unwrap_or(1);
            let lemma = lemma_suite_with_threads(seed, trials, dim, tol, threads);
            let kr = kr_witness_trials(seed, trials, dim.min(8), tol);
            let averaging = averaging_trials(seed, (trials / 5).max(1), dim.clamp(2, 6), tol);
            let failures =
                lemma.total_failures() + kr.failures + averaging.failures;
            let v = serde_json::json!({
                "seed": seed,
                "tol": tol,
                "dim_max": dim,
                "threads": threads,
                "lemma_suite": lemma.to_json(),
                "kr_witness": kr,
                "averaging": averaging,
                "failures": failures,
            });
            let mut text = serde_json::to_string_pretty(&v).expect("suite serializes");
            text.push('\n');
            emit(&out, &text)?;
            eprintln!("{failures} failures across all checks");
            Ok(if failures == 0 {
                EXIT_OK
            } else {
                EXIT_VERIFICATION_FAILED
            })
        }
    }
}
