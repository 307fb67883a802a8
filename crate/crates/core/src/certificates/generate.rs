//! Certificate generation: picks the minimal stage whose matrix size beats
//! the gap below the certified ratio limit, then the least admissible
//! trivial rank strictly inside the open window the argument needs.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};

use crate::exact::format_rational;
use crate::sequences::{kappa_interval, SeqTable};

use super::{CertError, RcCertificate, SystemId};

/// Stages replayed explicitly beyond the chosen one; later stages are
/// covered by the monotone tail argument.
pub const WINDOW_LEN: u32 = 10;

/// Exact supremum of the rho values this generator accepts at the given
/// depth: the certified lower endpoint of the ratio-limit bracket, halved
/// for the merged system.
pub fn certified_rho_supremum(system: SystemId, terms: u32) -> BigRational {
    let ki = kappa_interval(terms);
    match system {
        SystemId::PaperA => ki.lower,
        SystemId::PaperB => ki.lower / BigRational::from_integer(BigInt::from(2)),
    }
}

/// Builds a replayable witness that the system fails rho-comparison.
///
/// The stage `n` is minimal with `1/r(n)` below the gap, the rank `M` is the
/// least integer with `rho + 1 < M/r(n)` (at the doubled normalization for
/// the merged system), and the explicit window is `n+1 ..= n+WINDOW_LEN`.
pub fn rc_lower_certificate(
    system: SystemId,
    rho: &BigRational,
    terms: u32,
) -> Result<RcCertificate, CertError> {
    if rho.is_negative() {
        return Err(CertError::NegativeRho(format_rational(rho)));
    }
    let ki = kappa_interval(terms);
    let bound = certified_rho_supremum(system, terms);
    if *rho >= bound {
        return Err(CertError::RhoTooLarge {
            rho: format_rational(rho),
            bound: format_rational(&bound),
        });
    }
    let gap = &bound - rho;

    // Minimal n >= 1 with 1/r(n) < gap. Matrix sizes grow faster than
    // exponentially, so this loop terminates after a handful of stages.
    let mut table = SeqTable::up_to(8);
    let mut n = 1u32;
    loop {
        if n > table.n_max() {
            table = SeqTable::up_to(table.n_max() * 2);
        }
        let inv = BigRational::new(BigInt::one(), table.row(n).r.clone());
        if inv < gap {
            break;
        }
        n += 1;
    }
    let r_n = table.row(n).r.clone();

    let one = BigRational::one();
    let (lower_edge, upper_edge, scale) = match system {
        // rho + 1 < M/r(n) < kappa_lb + 1
        SystemId::PaperA => (rho + &one, &ki.lower + &one, r_n.clone()),
        // rho + 1/2 < M/(2 r(n)) < kappa_lb/2 + 1/2
        SystemId::PaperB => {
            let half = BigRational::new(BigInt::one(), BigInt::from(2));
            (
                rho + &half,
                &ki.lower * &half + &half,
                BigInt::from(2) * &r_n,
            )
        }
    };
    // Least M with lower_edge < M/scale.
    let m_rank: BigInt = (&lower_edge * BigRational::from_integer(scale.clone()))
        .floor()
        .to_integer()
        + 1;
    let m_ratio = BigRational::new(m_rank.clone(), scale);
    assert!(
        m_ratio < upper_edge,
        "no admissible rank below the certified limit; arithmetic bug"
    );

    Ok(RcCertificate {
        system,
        rho: rho.clone(),
        kappa_lb: ki.lower,
        kappa_ub: ki.upper,
        terms,
        n,
        m_rank,
        window: (n + 1..=n + WINDOW_LEN).collect(),
        monotone_tail: true,
    })
}
