//! Exact evaluation of the stage recursions.
//!
//! At stage `n` the systems are described by six quantities:
//! block counts `d(n) = 2^(n+1) - 1` and `l(n) = 2^(n+1)`, matrix sizes
//! `r(n) = r(n-1)·l(n)`, coordinate counts `s(n) = s(n-1)·d(n)`, evaluation
//! ranks `t(n) = d(n)·t(n-1) + (r(n-1) - t(n-1))`, and the ratio
//! `u(n) = s(n)/r(n)`. The ratio decreases strictly to a limit; this module
//! brackets that limit by an exact rational interval whose width shrinks
//! like `2^-(terms+1)`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::exact::pow2;
use crate::report::Report;

/// One row of exact stage data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeqRow {
    pub n: u32,
    pub d: BigInt,
    pub l: BigInt,
    pub r: BigInt,
    pub s: BigInt,
    pub t: BigInt,
    pub u: BigRational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeqTable {
    rows: Vec<SeqRow>,
}

impl SeqTable {
    /// Rows 0..=n_max, computed by the defining recursions in exact
    /// arithmetic.
    pub fn up_to(n_max: u32) -> Self {
        let mut rows = Vec::with_capacity(n_max as usize + 1);
        let mut r = BigInt::one();
        let mut s = BigInt::one();
        let mut t = BigInt::zero();
        for n in 0..=n_max {
            let l = pow2(n + 1);
            let d = &l - 1;
            if n > 0 {
                let prev_r = r.clone();
                r = &r * &l;
                s = &s * &d;
                t = &d * &t + (&prev_r - &t);
            }
            let u = BigRational::new(s.clone(), r.clone());
            debug_assert!(!t.is_negative() && t < r, "0 <= t(n) < r(n) must hold");
            rows.push(SeqRow {
                n,
                d,
                l,
                r: r.clone(),
                s: s.clone(),
                t: t.clone(),
                u,
            });
        }
        SeqTable { rows }
    }

    pub fn n_max(&self) -> u32 {
        (self.rows.len() - 1) as u32
    }

    pub fn row(&self, n: u32) -> &SeqRow {
        &self.rows[n as usize]
    }

    pub fn rows(&self) -> &[SeqRow] {
        &self.rows
    }

    /// CSV with the fixed header `n,d,l,r,s,t,u_num,u_den`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,d,l,r,s,t,u_num,u_den\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                row.n,
                row.d,
                row.l,
                row.r,
                row.s,
                row.t,
                row.u.numer(),
                row.u.denom()
            ));
        }
        out
    }

    /// JSON mirror of the table; big integers are decimal strings so no
    /// consumer silently loses precision.
    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                json!({
                    "n": row.n,
                    "d": row.d.to_string(),
                    "l": row.l.to_string(),
                    "r": row.r.to_string(),
                    "s": row.s.to_string(),
                    "t": row.t.to_string(),
                    "u_num": row.u.numer().to_string(),
                    "u_den": row.u.denom().to_string(),
                })
            })
            .collect();
        json!({ "rows": rows })
    }
}

/// Exact rational bracket `[lower, upper]` certified to contain the limit of
/// the ratio sequence `u`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KappaInterval {
    pub lower: BigRational,
    pub upper: BigRational,
    pub terms: u32,
}

impl KappaInterval {
    pub fn width(&self) -> BigRational {
        &self.upper - &self.lower
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        &self.lower <= x && x <= &self.upper
    }
}

/// Brackets the limit of `u` between the partial product `u(terms)` and the
/// tail-corrected value `u(terms)·(1 - 2^-(terms+1))`.
///
/// The tail factor comes from `(1-β₁)(1-β₂)···  ≥ 1 - Σ βᵢ` applied to the
/// remaining factors, whose deficits sum to exactly `2^-(terms+1)`.
pub fn kappa_interval(terms: u32) -> KappaInterval {
    assert!(terms >= 1, "kappa_interval needs at least one term");
    let table = SeqTable::up_to(terms);
    let upper = table.row(terms).u.clone();
    let denom = pow2(terms + 1);
    let tail = BigRational::new(&denom - 1, denom);
    let lower = &upper * tail;
    KappaInterval { lower, upper, terms }
}

/// Exact verification of the two rank bookkeeping identities used by the
/// closed-form projection classes:
///
/// * `d(n+1)·[r(n)-s(n)-t(n)] + t(n) = r(n+1)-s(n+1)-t(n+1)`
/// * `s(n) + [r(n)-s(n)-t(n)] + d(n+1)·t(n) = t(n+1)`
///
/// A failed entry signals an arithmetic bug, not a usage error.
pub fn rank_recursion_identities(n_max: u32) -> Report {
    let table = SeqTable::up_to(n_max);
    let mut report = Report::new();
    for n in 0..n_max {
        let cur = table.row(n);
        let next = table.row(n + 1);
        let filler = &cur.r - &cur.s - &cur.t;
        let lhs1 = &next.d * &filler + &cur.t;
        let rhs1 = &next.r - &next.s - &next.t;
        report.push(
            format!("pullback-filler n={n}"),
            lhs1 == rhs1,
            format!("{lhs1} vs {rhs1}"),
        );
        let lhs2 = &cur.s + &filler + &next.d * &cur.t;
        report.push(
            format!("evaluation-rank n={n}"),
            lhs2 == next.t,
            format!("{lhs2} vs {}", next.t),
        );
    }
    report
}
