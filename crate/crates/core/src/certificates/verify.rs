//! Independent certificate replay.
//!
//! The verifier re-derives every quantity from the serialized fields: it
//! recomputes the ratio-limit bracket as a direct partial product, checks
//! the stage/rank choices by cross-multiplied integer comparisons (no code
//! shared with the generator's search), replays the trace gap and the
//! comparison refutation through the class and trace modules for every
//! stage in the window, and discharges the tail by ratio monotonicity.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::ah_system::{canonical_p_prime, canonical_q, StageClassPair, SummandClass};
use crate::bundles::{compare, KClass, Verdict, REASON_OBSTRUCTION};
use crate::exact::pow2;
use crate::report::Report;
use crate::sequences::SeqTable;
use crate::traces::{d_tau, extreme_traces};

use super::{RcCertificate, SystemId};

/// Strict `x < y` by cross multiplication; denominators are positive by
/// rational normalization.
fn lt(x: &BigRational, y: &BigRational) -> bool {
    x.numer() * y.denom() < y.numer() * x.denom()
}

/// Replays the certificate and reports one pass/fail entry per step.
pub fn verify_certificate(cert: &RcCertificate) -> Report {
    let mut report = Report::new();

    // Ratio-limit bracket, recomputed as a plain partial product.
    let mut partial = BigRational::one();
    for k in 1..=cert.terms {
        let den = pow2(k + 1);
        partial *= BigRational::new(&den - 1, den);
    }
    let tail_den = pow2(cert.terms + 1);
    let tail = BigRational::new(&tail_den - 1, tail_den);
    let expected_lb = &partial * &tail;
    report.push(
        "interval-recompute",
        cert.kappa_ub == partial && cert.kappa_lb == expected_lb,
        format!("terms={}", cert.terms),
    );
    report.push(
        "interval-sane",
        BigRational::zero() < cert.kappa_lb
            && cert.kappa_lb <= cert.kappa_ub
            && cert.kappa_ub < BigRational::one(),
        String::new(),
    );

    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let bound = match cert.system {
        SystemId::PaperA => cert.kappa_lb.clone(),
        SystemId::PaperB => &cert.kappa_lb * &half,
    };
    report.push(
        "rho-bound",
        !cert.rho.is_negative() && lt(&cert.rho, &bound),
        format!("rho={} bound={}", cert.rho, bound),
    );

    let window_hi = cert.window.iter().copied().max().unwrap_or(cert.n);
    let table_hi = window_hi.max(cert.terms).max(cert.n);
    let table = SeqTable::up_to(table_hi);
    let gap = &bound - &cert.rho;
    let inv_r = |stage: u32| BigRational::new(BigInt::one(), table.row(stage).r.clone());
    report.push(
        "stage-gap",
        cert.n >= 1 && lt(&inv_r(cert.n), &gap),
        format!("1/r({}) vs {}", cert.n, gap),
    );
    report.push(
        "stage-minimal",
        cert.n == 1 || !lt(&inv_r(cert.n - 1), &gap),
        format!("stage {} is the first that fits", cert.n),
    );

    let r_n = table.row(cert.n).r.clone();
    let (lower_edge, upper_edge, scale) = match cert.system {
        SystemId::PaperA => (
            &cert.rho + BigRational::one(),
            &cert.kappa_lb + BigRational::one(),
            r_n.clone(),
        ),
        SystemId::PaperB => (
            &cert.rho + &half,
            &cert.kappa_lb * &half + &half,
            BigInt::from(2) * &r_n,
        ),
    };
    let m_ratio = BigRational::new(cert.m_rank.clone(), scale.clone());
    report.push(
        "rank-window",
        !cert.m_rank.is_negative() && lt(&lower_edge, &m_ratio) && lt(&m_ratio, &upper_edge),
        format!("{lower_edge} < {m_ratio} < {upper_edge}"),
    );
    let m_pred = BigRational::new(&cert.m_rank - 1, scale);
    report.push(
        "rank-minimal",
        !lt(&lower_edge, &m_pred),
        format!("rank {} is the least admissible", cert.m_rank),
    );

    let expected_window: Vec<u32> = (cert.n + 1..=cert.n + super::generate::WINDOW_LEN).collect();
    report.push(
        "window-canonical",
        cert.window == expected_window,
        format!("window {:?}", cert.window),
    );
    report.push("tail-flag", cert.monotone_tail, String::new());

    // Explicit replay at every stage in the window.
    for &m in &cert.window {
        let row_m = table.row(m);
        let scaled = &cert.m_rank * &row_m.r;
        if &scaled % &r_n != BigInt::zero() {
            report.push(
                format!("image-rank m={m}"),
                false,
                "matrix sizes do not divide",
            );
            continue;
        }
        let image_rank = scaled / &r_n;

        let (target, image_pair) = match cert.system {
            SystemId::PaperA => {
                let target = canonical_p_prime(m);
                let image = SummandClass::spanning(
                    vec![
                        KClass::trivial(row_m.s.clone(), image_rank.clone())
                            .expect("trivial class"),
                        KClass::trivial(row_m.s.clone(), image_rank.clone())
                            .expect("trivial class"),
                    ],
                    row_m.r.clone(),
                )
                .expect("trivial pair fits an amplification");
                (target, StageClassPair { stage: m, classes: image })
            }
            SystemId::PaperB => {
                let target = canonical_q(m);
                let image = SummandClass::spanning(
                    vec![KClass::trivial(row_m.s.clone(), image_rank.clone())
                        .expect("trivial class")],
                    BigInt::from(2) * &row_m.r,
                )
                .expect("trivial class fits an amplification");
                (target, StageClassPair { stage: m, classes: image })
            }
        };

        let mut gap_ok = true;
        let mut gap_detail = String::new();
        for tau in extreme_traces(&target) {
            let lhs = d_tau(&image_pair, &tau).expect("stages match");
            let rhs = d_tau(&target, &tau).expect("stages match") + &cert.rho;
            if !lt(&rhs, &lhs) {
                gap_ok = false;
                gap_detail = format!("summand {}: {lhs} vs {rhs}", tau.summand);
                break;
            }
        }
        report.push(format!("dtau-gap m={m}"), gap_ok, gap_detail);

        let mut obstruction_ok = true;
        let mut obstruction_detail = String::new();
        for (i, summand) in target.classes.per_summand.iter().enumerate() {
            let trivial_image = KClass::trivial(row_m.s.clone(), image_rank.clone())
                .expect("trivial class");
            match compare(summand, &trivial_image) {
                Ok(v) if v.verdict == Verdict::No && v.reason == REASON_OBSTRUCTION => {
                    obstruction_detail = format!("reason={}", v.reason);
                }
                Ok(v) => {
                    obstruction_ok = false;
                    obstruction_detail =
                        format!("summand {i}: verdict {:?} reason {}", v.verdict, v.reason);
                    break;
                }
                Err(e) => {
                    obstruction_ok = false;
                    obstruction_detail = format!("summand {i}: {e}");
                    break;
                }
            }
        }
        report.push(format!("obstruction m={m}"), obstruction_ok, obstruction_detail);
    }

    // Tail: ratio strictly decreasing, every computed ratio above the
    // certified lower endpoint, and the rank bounded by it. Together with
    // the recomputed bracket this covers all stages beyond the window.
    let mut monotone = true;
    for k in 0..table_hi {
        if table.row(k + 1).u >= table.row(k).u {
            monotone = false;
            break;
        }
    }
    report.push("u-monotone", monotone, format!("checked up to {table_hi}"));
    let mut above = true;
    for k in 0..=table_hi {
        if !lt(&cert.kappa_lb, &table.row(k).u) {
            above = false;
            break;
        }
    }
    let m_over_r = BigRational::new(cert.m_rank.clone(), r_n);
    let tail_edge = &cert.kappa_lb + BigRational::one();
    let rank_tail = match cert.system {
        SystemId::PaperA => lt(&m_over_r, &tail_edge),
        // M/(2r) < lb/2 + 1/2 is equivalent to M/r < lb + 1
        SystemId::PaperB => lt(&m_over_r, &tail_edge),
    };
    report.push(
        "rank-tail",
        above && rank_tail,
        format!("{m_over_r} below lb+1 and u above lb up to {table_hi}"),
    );

    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certificates::{rc_lower_certificate, CertError, RcCertificate};
    use crate::exact::ratio;

    #[test]
    fn flagship_certificates_verify() {
        for (system, rho) in [
            (SystemId::PaperA, ratio(1, 2)),
            (SystemId::PaperB, ratio(1, 4)),
        ] {
            let cert = rc_lower_certificate(system, &rho, 40).unwrap();
            let report = verify_certificate(&cert);
            assert!(report.passed(), "{report}");
            assert!(report
                .entries
                .iter()
                .any(|e| e.label.starts_with("obstruction") && e.detail.contains("villadsen")));
        }
    }

    #[test]
    fn zero_rho_verifies() {
        let cert = rc_lower_certificate(SystemId::PaperA, &ratio(0, 1), 40).unwrap();
        assert!(verify_certificate(&cert).passed());
    }

    #[test]
    fn tampered_rank_is_rejected() {
        let mut cert = rc_lower_certificate(SystemId::PaperA, &ratio(1, 2), 40).unwrap();
        cert.m_rank = BigInt::from(52);
        let report = verify_certificate(&cert);
        assert!(!report.passed());
        assert!(report
            .failures()
            .any(|e| e.label == "rank-window" || e.label == "rank-minimal"));
    }

    #[test]
    fn malformed_json_is_an_error() {
        assert!(matches!(
            RcCertificate::from_json_str("{"),
            Err(CertError::Json(_))
        ));
        assert!(matches!(
            RcCertificate::from_json_str(r#"{"system":"paper-c"}"#),
            Err(CertError::UnsupportedSystem(_))
        ));
    }
}
