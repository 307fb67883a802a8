//! Symbolic K-classes of projections over finite products of 2-spheres, and
//! a sound three-valued comparison oracle.
//!
//! A class is a trivial rank plus a set of coordinates, each coordinate
//! carrying one copy of the tautological line bundle pulled back through
//! that coordinate projection. Comparison answers the Murray-von Neumann
//! subequivalence question for such classes through exactly two certified
//! rules: a constructive componentwise embedding (each leftover line bundle
//! fits into two trivial dimensions) and the embedding obstruction for a
//! product of line bundles into a trivial bundle of rank below twice the
//! number of factors. Everything outside those rules is `Unknown`.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};
use thiserror::Error;

use crate::coords::CoordSet;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BundleError {
    #[error("classes share a Bott coordinate; the sum leaves the supported fragment")]
    OverlappingBott,
    #[error("classes live over different base spaces: {left} vs {right} coordinates")]
    DimensionMismatch { left: BigInt, right: BigInt },
    #[error("block {block} outside 1..={total_blocks}, or class over {coords} coordinates does not match block size {block_size}")]
    BadBlock {
        block: BigInt,
        total_blocks: BigInt,
        coords: BigInt,
        block_size: BigInt,
    },
    #[error("negative count in class data: {0}")]
    NegativeCount(String),
    #[error("class rank exceeds its matrix amplification: {0}")]
    RankOverflow(String),
    #[error("summand lists do not share a stage shape: {0}")]
    ShapeMismatch(String),
    #[error("Bott coordinates escape 1..=coords")]
    BottOutOfRange,
    #[error("Bott set too large to expand into explicit indices")]
    SerializationOverflow,
    #[error("malformed class JSON: {0}")]
    Json(String),
}

/// K-theory class of a projection over `(S²)^coords`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KClass {
    coords: BigInt,
    trivial_rank: BigInt,
    bott: CoordSet,
}

impl KClass {
    pub fn new(coords: BigInt, trivial_rank: BigInt, bott: CoordSet) -> Result<Self, BundleError> {
        if coords.is_negative() {
            return Err(BundleError::NegativeCount(format!("coords = {coords}")));
        }
        if trivial_rank.is_negative() {
            return Err(BundleError::NegativeCount(format!(
                "trivial_rank = {trivial_rank}"
            )));
        }
        if let (Some(min), Some(max)) = (bott.min(), bott.max()) {
            if *min < BigInt::one() || *max > coords {
                return Err(BundleError::BottOutOfRange);
            }
        }
        Ok(KClass { coords, trivial_rank, bott })
    }

    /// Class with no line-bundle part.
    pub fn trivial(coords: BigInt, rank: BigInt) -> Result<Self, BundleError> {
        KClass::new(coords, rank, CoordSet::empty())
    }

    pub fn zero(coords: BigInt) -> Self {
        KClass {
            coords,
            trivial_rank: BigInt::zero(),
            bott: CoordSet::empty(),
        }
    }

    /// One line bundle on every coordinate, no trivial part.
    pub fn full_bott(coords: BigInt) -> Result<Self, BundleError> {
        let bott = CoordSet::range(BigInt::one(), coords.clone());
        KClass::new(coords, BigInt::zero(), bott)
    }

    pub fn coords(&self) -> &BigInt {
        &self.coords
    }

    pub fn trivial_rank(&self) -> &BigInt {
        &self.trivial_rank
    }

    pub fn bott(&self) -> &CoordSet {
        &self.bott
    }

    /// Fiber rank: trivial part plus one per line bundle.
    pub fn rank(&self) -> BigInt {
        &self.trivial_rank + self.bott.len()
    }

    pub fn is_zero(&self) -> bool {
        self.trivial_rank.is_zero() && self.bott.is_empty()
    }

    /// True when the Bott part covers every coordinate.
    pub fn has_full_bott(&self) -> bool {
        self.bott.len() == self.coords
    }

    /// Whitney sum: trivial ranks add, Bott sets must be disjoint.
    pub fn direct_sum(&self, other: &KClass) -> Result<KClass, BundleError> {
        if self.coords != other.coords {
            return Err(BundleError::DimensionMismatch {
                left: self.coords.clone(),
                right: other.coords.clone(),
            });
        }
        if self.bott.intersects(&other.bott) {
            return Err(BundleError::OverlappingBott);
        }
        Ok(KClass {
            coords: self.coords.clone(),
            trivial_rank: &self.trivial_rank + &other.trivial_rank,
            bott: self.bott.union(&other.bott),
        })
    }

    /// Evaluation at a point: the class becomes constant of the same rank.
    /// The base space is unchanged; callers re-house the constant as needed.
    pub fn point_evaluation(&self) -> KClass {
        KClass {
            coords: self.coords.clone(),
            trivial_rank: self.rank(),
            bott: CoordSet::empty(),
        }
    }

    /// Pullback through the `block`-th coordinate projection of a product of
    /// `total_blocks` copies of the base. Bott coordinate `j` lands at
    /// `(block-1)·block_size + j`.
    pub fn pullback_block(
        &self,
        block: &BigInt,
        block_size: &BigInt,
        total_blocks: &BigInt,
    ) -> Result<KClass, BundleError> {
        if *block < BigInt::one() || block > total_blocks || self.coords != *block_size {
            return Err(BundleError::BadBlock {
                block: block.clone(),
                total_blocks: total_blocks.clone(),
                coords: self.coords.clone(),
                block_size: block_size.clone(),
            });
        }
        let offset = (block - 1) * block_size;
        Ok(KClass {
            coords: block_size * total_blocks,
            trivial_rank: self.trivial_rank.clone(),
            bott: self.bott.shift(&offset),
        })
    }

    /// Least trivial rank the class embeds into: each line bundle needs two
    /// trivial dimensions (the obstruction makes fewer impossible, a
    /// componentwise embedding realizes exactly two).
    pub fn min_dominating_trivial_rank(&self) -> BigInt {
        &self.trivial_rank + BigInt::from(2) * self.bott.len()
    }

    /// JSON form `{"coords": "...", "trivial": "...", "bott": ["..."]}` with
    /// every number a decimal string. Expansion of the Bott set is refused
    /// above one million indices.
    pub fn to_json(&self) -> Result<Value, BundleError> {
        let indices = self
            .bott
            .indices(1_000_000)
            .ok_or(BundleError::SerializationOverflow)?;
        Ok(json!({
            "coords": self.coords.to_string(),
            "trivial": self.trivial_rank.to_string(),
            "bott": indices.iter().map(|i| i.to_string()).collect::<Vec<_>>(),
        }))
    }

    pub fn from_json(v: &Value) -> Result<KClass, BundleError> {
        let field = |key: &str| -> Result<&Value, BundleError> {
            v.get(key)
                .ok_or_else(|| BundleError::Json(format!("missing field {key:?}")))
        };
        let int_of = |val: &Value, key: &str| -> Result<BigInt, BundleError> {
            val.as_str()
                .ok_or_else(|| BundleError::Json(format!("{key} must be a decimal string")))?
                .parse::<BigInt>()
                .map_err(|e| BundleError::Json(format!("{key}: {e}")))
        };
        let coords = int_of(field("coords")?, "coords")?;
        let trivial = int_of(field("trivial")?, "trivial")?;
        let bott_raw = field("bott")?
            .as_array()
            .ok_or_else(|| BundleError::Json("bott must be an array".into()))?;
        let mut indices = Vec::with_capacity(bott_raw.len());
        for item in bott_raw {
            indices.push(int_of(item, "bott index")?);
        }
        KClass::new(coords, trivial, CoordSet::from_indices(indices))
    }
}

/// One K-class per direct summand of a homogeneous stage, together with the
/// matrix amplification the classes live in: every rank stays within
/// `matrix_size · amplification`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SummandClass {
    pub per_summand: Vec<KClass>,
    pub matrix_size: BigInt,
    pub amplification: BigInt,
}

impl SummandClass {
    pub fn new(
        per_summand: Vec<KClass>,
        matrix_size: BigInt,
        amplification: BigInt,
    ) -> Result<Self, BundleError> {
        if amplification.is_negative() || matrix_size.is_negative() {
            return Err(BundleError::NegativeCount(
                "matrix size or amplification".into(),
            ));
        }
        let cap = &matrix_size * &amplification;
        for (i, class) in per_summand.iter().enumerate() {
            if class.rank() > cap {
                return Err(BundleError::RankOverflow(format!(
                    "summand {i} has rank {} above {cap}",
                    class.rank()
                )));
            }
        }
        Ok(SummandClass {
            per_summand,
            matrix_size,
            amplification,
        })
    }

    /// Builds with the smallest amplification that holds every summand.
    pub fn spanning(per_summand: Vec<KClass>, matrix_size: BigInt) -> Result<Self, BundleError> {
        if matrix_size.is_zero() || matrix_size.is_negative() {
            return Err(BundleError::NegativeCount(format!(
                "matrix size {matrix_size}"
            )));
        }
        let mut amp = BigInt::one();
        for class in &per_summand {
            let rank = class.rank();
            let need = (&rank + &matrix_size - 1) / &matrix_size;
            if need > amp {
                amp = need;
            }
        }
        SummandClass::new(per_summand, matrix_size, amp)
    }

    /// Summandwise Whitney sum; amplifications add.
    pub fn direct_sum(&self, other: &SummandClass) -> Result<SummandClass, BundleError> {
        if self.per_summand.len() != other.per_summand.len()
            || self.matrix_size != other.matrix_size
        {
            return Err(BundleError::ShapeMismatch(
                "direct sum needs identical stage shapes".into(),
            ));
        }
        let per_summand = self
            .per_summand
            .iter()
            .zip(&other.per_summand)
            .map(|(a, b)| a.direct_sum(b))
            .collect::<Result<Vec<_>, _>>()?;
        SummandClass::new(
            per_summand,
            self.matrix_size.clone(),
            &self.amplification + &other.amplification,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Yes,
    No,
    Unknown,
}

/// Extra data attached to a `No`: the rank the target would need versus what
/// it offers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObstructionData {
    pub required_rank: BigInt,
    pub available_rank: BigInt,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompareVerdict {
    pub verdict: Verdict,
    pub reason: &'static str,
    pub obstruction: Option<ObstructionData>,
}

pub const REASON_EMBEDDING: &str = "componentwise-embedding";
pub const REASON_RANK_EXCESS: &str = "rank-excess";
pub const REASON_OBSTRUCTION: &str = "villadsen-obstruction";
pub const REASON_UNKNOWN: &str = "outside-certified-fragment";

/// Constructive rule: match shared Bott coordinates, embed each leftover
/// line bundle of `e` into two trivial dimensions of `f`, trivial into
/// trivial.
pub fn yes_rule(e: &KClass, f: &KClass) -> bool {
    let spare = f.trivial_rank() - e.trivial_rank();
    spare >= BigInt::from(2) * e.bott().difference_len(f.bott())
}

/// Certified refutations: a rank drop, or a fully trivial target below the
/// least dominating trivial rank of the source.
pub fn no_rule(e: &KClass, f: &KClass) -> bool {
    e.rank() > f.rank() || (f.bott().is_empty() && f.rank() < e.min_dominating_trivial_rank())
}

/// Three-valued comparison of `e` against `f` over the same base space.
/// `Yes` is only ever produced by the constructive embedding, `No` only by a
/// certified obstruction; the two rules are mutually exclusive.
pub fn compare(e: &KClass, f: &KClass) -> Result<CompareVerdict, BundleError> {
    if e.coords() != f.coords() {
        return Err(BundleError::DimensionMismatch {
            left: e.coords().clone(),
            right: f.coords().clone(),
        });
    }
    let yes = yes_rule(e, f);
    let no = no_rule(e, f);
    debug_assert!(!(yes && no), "embedding and obstruction cannot both apply");
    if yes {
        return Ok(CompareVerdict {
            verdict: Verdict::Yes,
            reason: REASON_EMBEDDING,
            obstruction: None,
        });
    }
    if e.rank() > f.rank() {
        return Ok(CompareVerdict {
            verdict: Verdict::No,
            reason: REASON_RANK_EXCESS,
            obstruction: Some(ObstructionData {
                required_rank: e.rank(),
                available_rank: f.rank(),
            }),
        });
    }
    if no {
        return Ok(CompareVerdict {
            verdict: Verdict::No,
            reason: REASON_OBSTRUCTION,
            obstruction: Some(ObstructionData {
                required_rank: e.min_dominating_trivial_rank(),
                available_rank: f.rank(),
            }),
        });
    }
    Ok(CompareVerdict {
        verdict: Verdict::Unknown,
        reason: REASON_UNKNOWN,
        obstruction: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn class(coords: i64, trivial: i64, bott: &[i64]) -> KClass {
        KClass::new(
            BigInt::from(coords),
            BigInt::from(trivial),
            CoordSet::from_indices(bott.iter().map(|&i| BigInt::from(i))),
        )
        .unwrap()
    }

    #[test]
    fn direct_sum_examples() {
        let a = class(2, 0, &[1]);
        let b = class(2, 3, &[]);
        let sum = a.direct_sum(&b).unwrap();
        assert_eq!(sum, class(2, 3, &[1]));

        let c = class(2, 0, &[2]);
        assert_eq!(a.direct_sum(&c).unwrap(), class(2, 0, &[1, 2]));

        assert_eq!(
            a.direct_sum(&class(2, 0, &[1])),
            Err(BundleError::OverlappingBott)
        );
    }

    #[test]
    fn min_dominating_examples() {
        // both-summand shape at stage 2: 21 line bundles plus 11 trivial
        let e = class(21, 11, &(1..=21).collect::<Vec<_>>());
        assert_eq!(e.min_dominating_trivial_rank(), BigInt::from(53));
        assert_eq!(class(5, 5, &[]).min_dominating_trivial_rank(), BigInt::from(5));
        assert_eq!(class(3, 0, &[1, 2, 3]).min_dominating_trivial_rank(), BigInt::from(6));
    }

    #[test]
    fn compare_examples() {
        let e = class(21, 11, &(1..=21).collect::<Vec<_>>());
        let f = class(21, 49, &[]);
        let v = compare(&e, &f).unwrap();
        assert_eq!(v.verdict, Verdict::No);
        assert_eq!(v.reason, REASON_OBSTRUCTION);
        let data = v.obstruction.unwrap();
        assert_eq!(data.required_rank, BigInt::from(53));
        assert_eq!(data.available_rank, BigInt::from(49));

        let a = class(1, 3, &[]);
        assert_eq!(compare(&a, &a).unwrap().verdict, Verdict::Yes);

        let line = class(2, 0, &[1]);
        let two_trivial = class(2, 2, &[2]);
        assert_eq!(compare(&line, &two_trivial).unwrap().verdict, Verdict::Yes);
        assert_eq!(line.min_dominating_trivial_rank(), BigInt::from(2));

        assert!(matches!(
            compare(&line, &class(3, 0, &[])),
            Err(BundleError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn unknown_between_the_rules() {
        let e = class(2, 0, &[1]);
        let f = class(2, 1, &[2]);
        assert_eq!(compare(&e, &f).unwrap().verdict, Verdict::Unknown);
    }

    #[test]
    fn pullback_examples() {
        let one = BigInt::from(1);
        let p = class(1, 0, &[1]);
        let moved = p
            .pullback_block(&BigInt::from(3), &one, &BigInt::from(3))
            .unwrap();
        assert_eq!(moved, class(3, 0, &[3]));

        let t = class(1, 2, &[]);
        assert_eq!(
            t.pullback_block(&BigInt::from(2), &one, &BigInt::from(3)).unwrap(),
            class(3, 2, &[])
        );

        let c = class(3, 1, &[1, 3]);
        let shifted = c
            .pullback_block(&BigInt::from(2), &BigInt::from(3), &BigInt::from(7))
            .unwrap();
        assert_eq!(shifted, class(21, 1, &[4, 6]));

        assert!(matches!(
            p.pullback_block(&BigInt::from(4), &one, &BigInt::from(3)),
            Err(BundleError::BadBlock { .. })
        ));
    }

    #[test]
    fn point_evaluation_examples() {
        let big = class(21, 11, &(1..=21).collect::<Vec<_>>());
        assert_eq!(big.point_evaluation(), class(21, 32, &[]));
        let t = class(4, 4, &[]);
        assert_eq!(t.point_evaluation(), t);
        assert_eq!(class(1, 0, &[1]).point_evaluation(), class(1, 1, &[]));
    }

    #[test]
    fn rank_preserved_by_point_evaluation() {
        for coords in 0..6i64 {
            for trivial in 0..4i64 {
                let bott: Vec<i64> = (1..=coords).collect();
                let c = class(coords, trivial, &bott);
                assert_eq!(c.point_evaluation().rank(), c.rank());
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let c = class(21, 11, &[1, 2, 3, 7, 8, 9, 21]);
        let v = c.to_json().unwrap();
        assert_eq!(KClass::from_json(&v).unwrap(), c);
        assert_eq!(v["coords"], "21");
        assert_eq!(v["trivial"], "11");
        assert_eq!(v["bott"][0], "1");
    }

    fn arb_class() -> impl Strategy<Value = KClass> {
        (1i64..=10, 0i64..=30, proptest::collection::btree_set(1i64..=10, 0..=10)).prop_map(
            |(coords, trivial, bott)| {
                let bott: Vec<i64> = bott.into_iter().filter(|&b| b <= coords).collect();
                class(coords, trivial, &bott)
            },
        )
    }

    proptest! {
        #[test]
        fn compare_is_reflexive(c in arb_class()) {
            prop_assert_eq!(compare(&c, &c).unwrap().verdict, Verdict::Yes);
        }

        #[test]
        fn rules_never_overlap(e in arb_class(), f0 in arb_class()) {
            // rebuild f over e's base so comparison is defined
            let bott: Vec<BigInt> = f0.bott().indices(1000).unwrap()
                .into_iter().filter(|b| b <= e.coords()).collect();
            let f = KClass::new(e.coords().clone(), f0.trivial_rank().clone(),
                                CoordSet::from_indices(bott)).unwrap();
            prop_assert!(!(yes_rule(&e, &f) && no_rule(&e, &f)));
            if compare(&e, &f).unwrap().verdict == Verdict::Yes {
                prop_assert!(e.rank() <= f.rank());
            }
        }

        #[test]
        fn min_dominating_is_additive_on_disjoint_sums(
            trivial_a in 0i64..20, trivial_b in 0i64..20,
            split in 0i64..=6
        ) {
            let a = class(6, trivial_a, &(1..=split).collect::<Vec<_>>());
            let b = class(6, trivial_b, &((split+1)..=6).collect::<Vec<_>>());
            let sum = a.direct_sum(&b).unwrap();
            prop_assert_eq!(
                sum.min_dominating_trivial_rank(),
                a.min_dominating_trivial_rank() + b.min_dominating_trivial_rank()
            );
        }

        #[test]
        fn yes_is_monotone_under_disjoint_sums(
            ta in 0i64..6, tb in 0i64..12, tc in 0i64..6, td in 0i64..12
        ) {
            // e, e' use disjoint Bott blocks {1,2} and {3,4}; targets share the split
            let e = class(8, ta, &[1, 2]);
            let f = class(8, tb, &[]);
            let e2 = class(8, tc, &[3, 4]);
            let f2 = class(8, td, &[3]);
            let both_yes = compare(&e, &f).unwrap().verdict == Verdict::Yes
                && compare(&e2, &f2).unwrap().verdict == Verdict::Yes;
            if both_yes {
                let se = e.direct_sum(&e2).unwrap();
                let sf = f.direct_sum(&f2).unwrap();
                prop_assert_eq!(compare(&se, &sf).unwrap().verdict, Verdict::Yes);
            }
        }
    }
}
