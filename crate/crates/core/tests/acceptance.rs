//! End-to-end acceptance suite. Each test prints one PASS/FAIL line and
//! enforces its runtime budget.

use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rcwb_core::ah_system::{iterate_and_check, canonical_p, canonical_p_prime, canonical_q};
use rcwb_core::ah_system::{DiagonalSystemSpec, StageClassPair, SummandClass};
use rcwb_core::bundles::{compare, no_rule, yes_rule, KClass, Verdict};
use rcwb_core::certificates::{
    certified_rho_supremum, fixed_point_relation, niu_upper_bound, rc_lower_certificate,
    verify_certificate, RcCertificate, RcInterval, SystemId,
};
use rcwb_core::coords::CoordSet;
use rcwb_core::exact::ratio;
use rcwb_core::matrix_model::{averaging_trials, kr_witness_trials, lemma_suite};
use rcwb_core::sequences::{kappa_interval, rank_recursion_identities, SeqTable};
use rcwb_core::traces::{d_tau, d_tau_max, extreme_traces};

fn criterion(name: &str, budget_secs: f64, body: impl FnOnce() -> Result<(), String>) {
    let start = Instant::now();
    let result = body();
    let elapsed = start.elapsed().as_secs_f64();
    let pass = result.is_ok() && elapsed < budget_secs;
    println!(
        "acceptance {name}: {} ({elapsed:.2}s)",
        if pass { "PASS" } else { "FAIL" }
    );
    if let Err(msg) = result {
        panic!("{name}: {msg}");
    }
    assert!(
        elapsed < budget_secs,
        "{name} took {elapsed:.2}s, budget {budget_secs}s"
    );
}

fn ensure(cond: bool, msg: &str) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.to_string())
    }
}

#[test]
fn criterion_1_sequence_exactness() {
    criterion("1 sequence-exactness", 1.0, || {
        let table = SeqTable::up_to(12);
        let t: Vec<i64> = (0..=4)
            .map(|n| i64::try_from(&table.row(n).t).unwrap())
            .collect();
        ensure(t == vec![0, 1, 10, 172, 5672], "hand recursion for t")?;
        ensure(table.row(3).r == BigInt::from(512), "r(3)")?;
        ensure(table.row(3).s == BigInt::from(315), "s(3)")?;
        ensure(table.row(3).u == ratio(315, 512), "u(3)")?;

        let deep = SeqTable::up_to(64);
        for row in deep.rows() {
            ensure(!row.t.is_negative() && row.t < row.r, "0 <= t(n) < r(n)")?;
        }
        for pair in deep.rows().windows(2) {
            ensure(pair[1].u < pair[0].u, "u strictly decreases")?;
        }
        Ok(())
    });
}

#[test]
fn criterion_2_kappa_certification() {
    criterion("2 kappa-certification", 1.0, || {
        let ki = kappa_interval(40);
        let width_cap = BigRational::new(BigInt::one(), BigInt::from(10u64).pow(12));
        ensure(ki.width() < width_cap, "width below 1e-12")?;

        // Independent oracle: direct partial product with tail factor at 60
        // terms, computed here rather than through the library path.
        let mut product = BigRational::one();
        for k in 1..=60u32 {
            let den: BigInt = BigInt::one() << (k + 1) as usize;
            product *= BigRational::new(&den - 1, den);
        }
        let tail_den: BigInt = BigInt::one() << 61usize;
        let oracle_hi = product.clone();
        let oracle_lo = product * BigRational::new(&tail_den - 1, tail_den);
        ensure(oracle_lo <= oracle_hi, "oracle is an interval")?;
        ensure(
            ki.contains(&oracle_lo) && ki.contains(&oracle_hi),
            "interval(40) contains the 60-term oracle bracket",
        )?;

        // The bracketed limit carries exactly the digits 0.5775761901732.
        let digits = BigInt::from(5775761901732u64);
        let scale = BigRational::from_integer(BigInt::from(10u64).pow(13));
        ensure(
            (&oracle_lo * &scale).floor().to_integer() == digits
                && (&oracle_hi * &scale).floor().to_integer() == digits,
            "oracle truncates to 0.5775761901732",
        )?;
        let decimal = BigRational::new(digits, BigInt::from(10u64).pow(13));
        let gap = (&oracle_lo - &decimal).abs();
        ensure(
            gap < BigRational::new(BigInt::one(), BigInt::from(10u64).pow(13)),
            "decimal value within 1e-13 of the limit",
        )?;
        Ok(())
    });
}

#[test]
fn criterion_3_rank_lemmas() {
    criterion("3 rank-lemmas", 5.0, || {
        let iteration = iterate_and_check(10);
        ensure(iteration.passed(), &format!("iteration report:\n{iteration}"))?;
        let identities = rank_recursion_identities(64);
        ensure(identities.passed(), "rank recursion identities to 64")?;
        Ok(())
    });
}

#[test]
fn criterion_4_trace_pairings() {
    criterion("4 trace-pairings", 1.0, || {
        let table = SeqTable::up_to(12);
        for n in 0..=12u32 {
            let pp = canonical_p_prime(n);
            for tau in extreme_traces(&pp) {
                ensure(
                    d_tau(&pp, &tau).unwrap() == ratio(1, 1),
                    "fixed track pairs to 1",
                )?;
            }
            let q = canonical_q(n);
            for tau in extreme_traces(&q) {
                ensure(
                    d_tau(&q, &tau).unwrap() == ratio(1, 2),
                    "merged track pairs to 1/2",
                )?;
            }
            let p = canonical_p(n);
            ensure(d_tau_max(&p) <= ratio(1, 1), "moving track stays below 1")?;
            let taus = extreme_traces(&p);
            let row = table.row(n);
            ensure(
                d_tau(&p, &taus[0]).unwrap()
                    == BigRational::new(&row.r - &row.t, row.r.clone()),
                "first summand pairs to (r-t)/r",
            )?;
            ensure(
                d_tau(&p, &taus[1]).unwrap()
                    == BigRational::new(row.t.clone(), row.r.clone()),
                "second summand pairs to t/r",
            )?;
        }
        Ok(())
    });
}

/// Every ±1-style mutation of a single certificate field must fail
/// verification.
fn mutations(cert: &RcCertificate) -> Vec<(String, RcCertificate)> {
    let mut out = Vec::new();
    let one = BigRational::one();
    for (delta, tag) in [(one.clone(), "+1"), (-one, "-1")] {
        let mut c = cert.clone();
        c.rho = &cert.rho + &delta;
        out.push((format!("rho{tag}"), c));

        let mut c = cert.clone();
        c.kappa_lb = &cert.kappa_lb + &delta;
        out.push((format!("kappa_lb{tag}"), c));

        let mut c = cert.clone();
        c.kappa_ub = &cert.kappa_ub + &delta;
        out.push((format!("kappa_ub{tag}"), c));

        let mut c = cert.clone();
        let int_delta = if tag == "+1" { 1i64 } else { -1 };
        c.m_rank = &cert.m_rank + BigInt::from(int_delta);
        out.push((format!("M{tag}"), c));

        if tag == "+1" || cert.n > 1 {
            let mut c = cert.clone();
            c.n = if tag == "+1" { cert.n + 1 } else { cert.n - 1 };
            out.push((format!("n{tag}"), c));
        }
        let mut c = cert.clone();
        c.terms = if tag == "+1" { cert.terms + 1 } else { cert.terms - 1 };
        out.push((format!("terms{tag}"), c));

        let mut c = cert.clone();
        let last = c.window.len() - 1;
        c.window[last] = if tag == "+1" {
            cert.window[last] + 1
        } else {
            cert.window[last] - 1
        };
        out.push((format!("window{tag}"), c));
    }
    let mut c = cert.clone();
    c.monotone_tail = !cert.monotone_tail;
    out.push(("monotone_tail-flip".into(), c));

    let mut c = cert.clone();
    c.system = match cert.system {
        SystemId::PaperA => SystemId::PaperB,
        SystemId::PaperB => SystemId::PaperA,
    };
    out.push(("system-flip".into(), c));
    out
}

#[test]
fn criterion_5_certificates() {
    criterion("5 certificates", 10.0, || {
        let a = rc_lower_certificate(SystemId::PaperA, &ratio(1, 2), 40)
            .map_err(|e| e.to_string())?;
        ensure(a.n == 2 && a.m_rank == BigInt::from(49), "flagship witness (2, 49)")?;
        ensure(verify_certificate(&a).passed(), "flagship A verifies")?;

        let b = rc_lower_certificate(SystemId::PaperB, &ratio(1, 4), 40)
            .map_err(|e| e.to_string())?;
        ensure(b.n == 2 && b.m_rank == BigInt::from(49), "merged witness (2, 49)")?;
        ensure(verify_certificate(&b).passed(), "flagship B verifies")?;

        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        for system in [SystemId::PaperA, SystemId::PaperB] {
            let bound = certified_rho_supremum(system, 40);
            for i in 0..50 {
                let rho = if i % 10 == 9 {
                    // occasionally probe close under the bound
                    let k = rng.gen_range(10..20u32);
                    &bound - BigRational::new(BigInt::one(), BigInt::one() << k as usize)
                } else {
                    let den = rng.gen_range(1..=512i64);
                    let margin = &bound - ratio(1, 64);
                    let cap: i64 = i64::try_from(
                        &(margin * BigRational::from_integer(BigInt::from(den)))
                            .floor()
                            .to_integer(),
                    )
                    .unwrap();
                    ratio(rng.gen_range(0..=cap.max(0)), den)
                };
                let cert = rc_lower_certificate(system, &rho, 40)
                    .map_err(|e| format!("generation for rho={rho}: {e}"))?;
                let report = verify_certificate(&cert);
                ensure(
                    report.passed(),
                    &format!("random rho={rho} verifies:\n{report}"),
                )?;
                // round trip through the wire format
                let parsed = RcCertificate::from_json_str(&cert.to_json_string())
                    .map_err(|e| e.to_string())?;
                ensure(parsed == cert, "certificate JSON round trip")?;
            }
        }

        for cert in [&a, &b] {
            for (label, mutated) in mutations(cert) {
                ensure(
                    !verify_certificate(&mutated).passed(),
                    &format!("tampering {label} must be detected"),
                )?;
            }
        }
        Ok(())
    });
}

#[test]
fn criterion_6_bound_squeeze() {
    criterion("6 bound-squeeze", 5.0, || {
        let spec_a = DiagonalSystemSpec::paper_a(2);
        let spec_b = DiagonalSystemSpec::paper_b(2);
        let two = ratio(2, 1);
        let mut widths = Vec::new();
        for terms in [10u32, 20, 40] {
            let ki = kappa_interval(terms);
            let sup_a = certified_rho_supremum(SystemId::PaperA, terms);
            let up_a = niu_upper_bound(&spec_a, terms).map_err(|e| e.to_string())?.upper;
            ensure(
                ki.lower <= sup_a && sup_a <= up_a && up_a <= ki.upper,
                "two-summand bracket sits inside the ratio-limit interval",
            )?;

            let sup_b = certified_rho_supremum(SystemId::PaperB, terms);
            let up_b = niu_upper_bound(&spec_b, terms).map_err(|e| e.to_string())?.upper;
            ensure(
                &ki.lower / &two <= sup_b && sup_b <= up_b && up_b <= &ki.upper / &two,
                "merged bracket sits inside half the interval",
            )?;
            ensure(up_b <= &up_a / &two, "crossed upper at most half")?;

            let crossed = RcInterval::new(sup_b.clone(), up_b.clone(), vec![]);
            let fixed = fixed_point_relation(&crossed, 2);
            ensure(
                fixed.lower == sup_a && fixed.upper == up_a,
                "doubling the merged bracket recovers the two-summand bracket",
            )?;
            widths.push(&up_a - &sup_a);
        }
        ensure(
            widths[2] < widths[1] && widths[1] < widths[0],
            "bracket gap shrinks with terms",
        )?;
        Ok(())
    });
}

#[test]
fn criterion_7_matrix_suite() {
    criterion("7 matrix-suite", 30.0, || {
        let report = lemma_suite(0xacce97, 1000, 16, 1e-9);
        ensure(
            report.total_failures() == 0,
            &format!("lemma suite failures: {:?}", report.checks),
        )?;
        ensure(report.checks.len() == 6, "all six checks ran")?;
        for stats in report.checks.values() {
            ensure(stats.trials == stats.passes + stats.failures, "counter sanity")?;
        }

        let kr = kr_witness_trials(0xacce97, 1000, 8, 1e-9);
        ensure(
            kr.failures == 0 && kr.trials == 1000,
            &format!("witness trials: {:?}", kr.failing_seeds),
        )?;

        let avg = averaging_trials(0xacce97, 200, 6, 1e-9);
        ensure(
            avg.failures == 0 && avg.trials == 200,
            &format!("averaging trials: {:?}", avg.failing_seeds),
        )?;
        Ok(())
    });
}

#[test]
fn criterion_8_comparison_oracle_soundness() {
    criterion("8 comparison-oracle-soundness", 5.0, || {
        let mut rng = ChaCha8Rng::seed_from_u64(0x0b57);
        let size = BigInt::from(64);
        for _ in 0..10_000 {
            let coords = rng.gen_range(1..=10u32);
            let mask = |rng: &mut ChaCha8Rng| -> Vec<BigInt> {
                let bits: u16 = rng.gen();
                (1..=coords)
                    .filter(|i| bits & (1 << (i - 1)) != 0)
                    .map(BigInt::from)
                    .collect()
            };
            let e = KClass::new(
                BigInt::from(coords),
                BigInt::from(rng.gen_range(0..=30i64)),
                CoordSet::from_indices(mask(&mut rng)),
            )
            .unwrap();
            let f = KClass::new(
                BigInt::from(coords),
                BigInt::from(rng.gen_range(0..=30i64)),
                CoordSet::from_indices(mask(&mut rng)),
            )
            .unwrap();
            ensure(
                !(yes_rule(&e, &f) && no_rule(&e, &f)),
                "embedding and obstruction rules fired together",
            )?;
            let verdict = compare(&e, &f).unwrap();
            if verdict.verdict == Verdict::Yes {
                ensure(e.rank() <= f.rank(), "embedding implies rank growth")?;
                let pe = StageClassPair {
                    stage: 0,
                    classes: SummandClass::spanning(vec![e.clone()], size.clone()).unwrap(),
                };
                let pf = StageClassPair {
                    stage: 0,
                    classes: SummandClass::spanning(vec![f.clone()], size.clone()).unwrap(),
                };
                for (te, tf) in extreme_traces(&pe).iter().zip(extreme_traces(&pf).iter()) {
                    ensure(
                        d_tau(&pe, te).unwrap() <= d_tau(&pf, tf).unwrap(),
                        "embedding implies trace growth",
                    )?;
                }
            }
        }
        Ok(())
    });
}
