//! Stage descriptors and symbolic connecting maps for the two diagonal
//! direct systems, plus closed-form verification of the canonical
//! projection classes.
//!
//! The `paper-a` preset has two summands per stage; one step of its
//! connecting map sends a class pair `(x, y)` to
//! `(⊕ pullbacks of x, eval of y)` in the first summand and symmetrically in
//! the second, with `d(n+1)` pullback blocks and one cross evaluation each
//! way. The `paper-b` preset is the one-summand merger at doubled matrix
//! size; its evaluation is conjugated by a fixed unitary, which does not
//! move a K-class, so both evaluations are modeled identically.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};
use thiserror::Error;

use crate::bundles::{BundleError, KClass};
use crate::report::Report;
use crate::sequences::SeqTable;

pub use crate::bundles::SummandClass;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AhError {
    #[error("class pair is at stage {got}, expected {expected}")]
    StageMismatch { expected: u32, got: u32 },
    #[error("flip needs exactly two summands, found {0}")]
    NotTwoSummand(usize),
    #[error("system description has no stage {0}")]
    MissingStage(u32),
    #[error("class pair does not match the stage shape: {0}")]
    ShapeMismatch(String),
    #[error("connecting map is not unital: {0}")]
    NonUnital(String),
    #[error("pullback too large to materialize: {0}")]
    UnsupportedPullback(String),
    #[error("negative count in system description: {0}")]
    NegativeCount(String),
    #[error(transparent)]
    Bundle(#[from] BundleError),
    #[error("malformed system JSON: {0}")]
    Json(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    PaperA,
    PaperB,
    Custom,
}

impl Preset {
    pub fn as_str(&self) -> &'static str {
        match self {
            Preset::PaperA => "paper-a",
            Preset::PaperB => "paper-b",
            Preset::Custom => "custom",
        }
    }
}

/// Shape of one homogeneous stage.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageSpec {
    pub summand_count: usize,
    pub matrix_size: BigInt,
    pub coords_per_summand: BigInt,
}

/// Multiplicities of one partial map between summands of consecutive stages.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MapEntry {
    pub target: usize,
    pub source: usize,
    pub pullback_count: BigInt,
    pub point_eval_count: BigInt,
}

/// All partial maps from stage `n` into stage `n+1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageMap {
    pub entries: Vec<MapEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiagonalSystemSpec {
    pub preset: Preset,
    pub stages: Vec<StageSpec>,
    pub maps: Vec<StageMap>,
}

impl DiagonalSystemSpec {
    /// Two-summand flip system: matrix sizes `r(n)`, `d(n+1)` pullbacks
    /// within each summand and one cross-summand evaluation each way.
    pub fn paper_a(n_max: u32) -> Self {
        let table = SeqTable::up_to(n_max.max(1));
        let stages = (0..=n_max)
            .map(|n| StageSpec {
                summand_count: 2,
                matrix_size: table.row(n).r.clone(),
                coords_per_summand: table.row(n).s.clone(),
            })
            .collect();
        let maps = (0..n_max)
            .map(|n| {
                let d_next = table.row(n + 1).d.clone();
                StageMap {
                    entries: vec![
                        MapEntry {
                            target: 0,
                            source: 0,
                            pullback_count: d_next.clone(),
                            point_eval_count: BigInt::zero(),
                        },
                        MapEntry {
                            target: 0,
                            source: 1,
                            pullback_count: BigInt::zero(),
                            point_eval_count: BigInt::one(),
                        },
                        MapEntry {
                            target: 1,
                            source: 1,
                            pullback_count: d_next.clone(),
                            point_eval_count: BigInt::zero(),
                        },
                        MapEntry {
                            target: 1,
                            source: 0,
                            pullback_count: BigInt::zero(),
                            point_eval_count: BigInt::one(),
                        },
                    ],
                }
            })
            .collect();
        DiagonalSystemSpec {
            preset: Preset::PaperA,
            stages,
            maps,
        }
    }

    /// One-summand merged system at matrix size `2r(n)`: `d(n+1)` pullbacks
    /// plus one (conjugated) evaluation.
    pub fn paper_b(n_max: u32) -> Self {
        let table = SeqTable::up_to(n_max.max(1));
        let stages = (0..=n_max)
            .map(|n| StageSpec {
                summand_count: 1,
                matrix_size: BigInt::from(2) * &table.row(n).r,
                coords_per_summand: table.row(n).s.clone(),
            })
            .collect();
        let maps = (0..n_max)
            .map(|n| StageMap {
                entries: vec![MapEntry {
                    target: 0,
                    source: 0,
                    pullback_count: table.row(n + 1).d.clone(),
                    point_eval_count: BigInt::one(),
                }],
            })
            .collect();
        DiagonalSystemSpec {
            preset: Preset::PaperB,
            stages,
            maps,
        }
    }

    pub fn n_max(&self) -> u32 {
        (self.stages.len().saturating_sub(1)) as u32
    }

    pub fn stage(&self, n: u32) -> Result<&StageSpec, AhError> {
        self.stages.get(n as usize).ok_or(AhError::MissingStage(n))
    }

    pub fn map(&self, n: u32) -> Result<&StageMap, AhError> {
        self.maps.get(n as usize).ok_or(AhError::MissingStage(n + 1))
    }

    /// Checks that every target summand receives exactly its matrix size:
    /// `Σ over sources of (pullbacks + evals) · size(n) = size(n+1)`.
    pub fn validate_unitality(&self) -> Result<(), AhError> {
        for (n, map) in self.maps.iter().enumerate() {
            let src = &self.stages[n];
            let dst = self
                .stages
                .get(n + 1)
                .ok_or(AhError::MissingStage(n as u32 + 1))?;
            for entry in &map.entries {
                if entry.pullback_count.is_negative() || entry.point_eval_count.is_negative() {
                    return Err(AhError::NegativeCount(format!(
                        "map {n}: target {} source {}",
                        entry.target, entry.source
                    )));
                }
                if entry.target >= dst.summand_count || entry.source >= src.summand_count {
                    return Err(AhError::ShapeMismatch(format!(
                        "map {n}: entry ({}, {}) outside stage shapes",
                        entry.target, entry.source
                    )));
                }
            }
            for target in 0..dst.summand_count {
                let mut total = BigInt::zero();
                for entry in map.entries.iter().filter(|e| e.target == target) {
                    total += (&entry.pullback_count + &entry.point_eval_count) * &src.matrix_size;
                }
                if total != dst.matrix_size {
                    return Err(AhError::NonUnital(format!(
                        "stage {} target {target}: maps {} into size {}",
                        n + 1,
                        total,
                        dst.matrix_size
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        json!({
            "preset": self.preset.as_str(),
            "stages": self.stages.iter().map(|s| json!({
                "summand_count": s.summand_count,
                "matrix_size": s.matrix_size.to_string(),
                "coords_per_summand": s.coords_per_summand.to_string(),
            })).collect::<Vec<_>>(),
            "maps": self.maps.iter().map(|m| json!({
                "entries": m.entries.iter().map(|e| json!({
                    "target": e.target,
                    "source": e.source,
                    "pullback_count": e.pullback_count.to_string(),
                    "point_eval_count": e.point_eval_count.to_string(),
                })).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
        })
    }

    /// Accepts `{"preset": "paper-a", "n_max": N}` (likewise `paper-b`) or a
    /// full custom description with explicit stages and maps. Custom specs
    /// are validated for unitality.
    pub fn from_json(text: &str) -> Result<Self, AhError> {
        let v: Value =
            serde_json::from_str(text).map_err(|e| AhError::Json(e.to_string()))?;
        let preset = v
            .get("preset")
            .and_then(Value::as_str)
            .ok_or_else(|| AhError::Json("missing preset".into()))?;
        match preset {
            "paper-a" | "paper-b" => {
                let n_max = v.get("n_max").and_then(Value::as_u64).unwrap_or(8) as u32;
                Ok(if preset == "paper-a" {
                    DiagonalSystemSpec::paper_a(n_max)
                } else {
                    DiagonalSystemSpec::paper_b(n_max)
                })
            }
            "custom" => {
                let int_of = |val: &Value, key: &str| -> Result<BigInt, AhError> {
                    val.as_str()
                        .ok_or_else(|| AhError::Json(format!("{key} must be a decimal string")))?
                        .parse::<BigInt>()
                        .map_err(|e| AhError::Json(format!("{key}: {e}")))
                };
                let stages_raw = v
                    .get("stages")
                    .and_then(Value::as_array)
                    .ok_or_else(|| AhError::Json("missing stages".into()))?;
                let mut stages = Vec::with_capacity(stages_raw.len());
                for s in stages_raw {
                    stages.push(StageSpec {
                        summand_count: s
                            .get("summand_count")
                            .and_then(Value::as_u64)
                            .ok_or_else(|| AhError::Json("missing summand_count".into()))?
                            as usize,
                        matrix_size: int_of(
                            s.get("matrix_size")
                                .ok_or_else(|| AhError::Json("missing matrix_size".into()))?,
                            "matrix_size",
                        )?,
                        coords_per_summand: int_of(
                            s.get("coords_per_summand")
                                .ok_or_else(|| AhError::Json("missing coords_per_summand".into()))?,
                            "coords_per_summand",
                        )?,
                    });
                }
                let maps_raw = v
                    .get("maps")
                    .and_then(Value::as_array)
                    .ok_or_else(|| AhError::Json("missing maps".into()))?;
                let mut maps = Vec::with_capacity(maps_raw.len());
                for m in maps_raw {
                    let entries_raw = m
                        .get("entries")
                        .and_then(Value::as_array)
                        .ok_or_else(|| AhError::Json("missing map entries".into()))?;
                    let mut entries = Vec::with_capacity(entries_raw.len());
                    for e in entries_raw {
                        entries.push(MapEntry {
                            target: e
                                .get("target")
                                .and_then(Value::as_u64)
                                .ok_or_else(|| AhError::Json("missing target".into()))?
                                as usize,
                            source: e
                                .get("source")
                                .and_then(Value::as_u64)
                                .ok_or_else(|| AhError::Json("missing source".into()))?
                                as usize,
                            pullback_count: int_of(
                                e.get("pullback_count")
                                    .ok_or_else(|| AhError::Json("missing pullback_count".into()))?,
                                "pullback_count",
                            )?,
                            point_eval_count: int_of(
                                e.get("point_eval_count").ok_or_else(|| {
                                    AhError::Json("missing point_eval_count".into())
                                })?,
                                "point_eval_count",
                            )?,
                        });
                    }
                    maps.push(StageMap { entries });
                }
                let spec = DiagonalSystemSpec {
                    preset: Preset::Custom,
                    stages,
                    maps,
                };
                spec.validate_unitality()?;
                Ok(spec)
            }
            other => Err(AhError::Json(format!("unknown preset {other:?}"))),
        }
    }
}

/// A summand class pinned to a stage index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageClassPair {
    pub stage: u32,
    pub classes: SummandClass,
}

/// One step of the connecting map on K-classes. For each target summand the
/// image is the direct sum of the pulled-back source classes on consecutive
/// coordinate blocks followed by constant classes of the evaluated ranks.
pub fn apply_connecting(
    x: &StageClassPair,
    spec: &DiagonalSystemSpec,
) -> Result<StageClassPair, AhError> {
    let n = x.stage;
    let src_spec = spec.stage(n)?;
    let dst_spec = spec.stage(n + 1)?;
    let map = spec.map(n)?;

    if x.classes.per_summand.len() != src_spec.summand_count {
        return Err(AhError::ShapeMismatch(format!(
            "stage {n} has {} summands, class pair has {}",
            src_spec.summand_count,
            x.classes.per_summand.len()
        )));
    }
    for class in &x.classes.per_summand {
        if *class.coords() != src_spec.coords_per_summand {
            return Err(AhError::ShapeMismatch(format!(
                "class over {} coordinates at a stage with {}",
                class.coords(),
                src_spec.coords_per_summand
            )));
        }
    }

    let src_coords = &src_spec.coords_per_summand;
    let dst_coords = &dst_spec.coords_per_summand;
    let mut images = Vec::with_capacity(dst_spec.summand_count);
    for target in 0..dst_spec.summand_count {
        let mut acc = KClass::zero(dst_coords.clone());
        let mut block_cursor = BigInt::one();
        for entry in map.entries.iter().filter(|e| e.target == target) {
            let src = &x.classes.per_summand[entry.source];
            if entry.pullback_count > BigInt::zero() {
                acc = acc.direct_sum(&pullback_sum(
                    src,
                    &entry.pullback_count,
                    &block_cursor,
                    src_coords,
                    dst_coords,
                )?)?;
                block_cursor += &entry.pullback_count;
            }
            if entry.point_eval_count > BigInt::zero() {
                let eval_rank = &entry.point_eval_count * src.rank();
                acc = acc.direct_sum(&KClass::trivial(dst_coords.clone(), eval_rank)?)?;
            }
        }
        images.push(acc);
    }

    Ok(StageClassPair {
        stage: n + 1,
        classes: SummandClass::new(
            images,
            dst_spec.matrix_size.clone(),
            x.classes.amplification.clone(),
        )?,
    })
}

/// `⊕_{ν = cursor .. cursor+count-1} pullback_block(src, ν)`.
///
/// Empty and full Bott parts have closed forms, so the canonical classes
/// never materialize individual blocks even when the block count is huge.
fn pullback_sum(
    src: &KClass,
    count: &BigInt,
    cursor: &BigInt,
    src_coords: &BigInt,
    dst_coords: &BigInt,
) -> Result<KClass, AhError> {
    let trivial_total = count * src.trivial_rank();
    if src.bott().is_empty() || src_coords.is_zero() {
        return Ok(KClass::trivial(dst_coords.clone(), trivial_total)?);
    }
    let total_blocks = dst_coords / src_coords;
    if dst_coords % src_coords != BigInt::zero() {
        return Err(AhError::ShapeMismatch(format!(
            "{src_coords} coordinates do not tile {dst_coords}"
        )));
    }
    let end_block = cursor + count - 1;
    if end_block > total_blocks {
        return Err(AhError::ShapeMismatch(format!(
            "blocks up to {end_block} requested, only {total_blocks} available"
        )));
    }
    if src.has_full_bott() {
        let lo = (cursor - 1) * src_coords + 1;
        let hi = &end_block * src_coords;
        let bott = crate::coords::CoordSet::range(lo, hi);
        return Ok(KClass::new(dst_coords.clone(), trivial_total, bott)?);
    }
    // General case: materialize block by block.
    let count_small = u64::try_from(count).map_err(|_| {
        AhError::UnsupportedPullback(format!("{count} blocks of a partial Bott class"))
    })?;
    if count_small > 1 << 20 {
        return Err(AhError::UnsupportedPullback(format!(
            "{count_small} blocks of a partial Bott class"
        )));
    }
    let mut acc = KClass::zero(dst_coords.clone());
    let mut block = cursor.clone();
    for _ in 0..count_small {
        acc = acc.direct_sum(&src.pullback_block(&block, src_coords, &total_blocks)?)?;
        block += 1;
    }
    Ok(acc)
}

/// Swaps the two summands.
pub fn apply_flip(x: &StageClassPair) -> Result<StageClassPair, AhError> {
    if x.classes.per_summand.len() != 2 {
        return Err(AhError::NotTwoSummand(x.classes.per_summand.len()));
    }
    let mut per_summand = x.classes.per_summand.clone();
    per_summand.swap(0, 1);
    Ok(StageClassPair {
        stage: x.stage,
        classes: SummandClass::new(
            per_summand,
            x.classes.matrix_size.clone(),
            x.classes.amplification.clone(),
        )?,
    })
}

fn expect_class(result: Result<KClass, BundleError>) -> KClass {
    result.expect("closed-form class data is valid")
}

/// Closed form of the image of `(p, 0)` at stage `n`: first summand carries
/// a line bundle on every coordinate plus `r(n)-s(n)-t(n)` trivial
/// dimensions, second summand is constant of rank `t(n)`.
pub fn canonical_p(n: u32) -> StageClassPair {
    let table = SeqTable::up_to(n);
    let row = table.row(n);
    let first = expect_class(KClass::new(
        row.s.clone(),
        &row.r - &row.s - &row.t,
        crate::coords::CoordSet::range(BigInt::one(), row.s.clone()),
    ));
    let second = expect_class(KClass::trivial(row.s.clone(), row.t.clone()));
    StageClassPair {
        stage: n,
        classes: SummandClass::new(vec![first, second], row.r.clone(), BigInt::from(2))
            .expect("closed form fits amplification 2"),
    }
}

/// Closed form of the image of `(p, p)` at stage `n`: both summands carry
/// the full Bott part plus `r(n)-s(n)` trivial dimensions.
pub fn canonical_p_prime(n: u32) -> StageClassPair {
    let table = SeqTable::up_to(n);
    let row = table.row(n);
    let summand = expect_class(KClass::new(
        row.s.clone(),
        &row.r - &row.s,
        crate::coords::CoordSet::range(BigInt::one(), row.s.clone()),
    ));
    StageClassPair {
        stage: n,
        classes: SummandClass::new(
            vec![summand.clone(), summand],
            row.r.clone(),
            BigInt::from(2),
        )
        .expect("closed form fits amplification 2"),
    }
}

/// Closed form of the image of the rank-one line-bundle projection in the
/// merged system: full Bott part plus `r(n)-s(n)` trivial dimensions inside
/// matrix size `2r(n)`.
pub fn canonical_q(n: u32) -> StageClassPair {
    let table = SeqTable::up_to(n);
    let row = table.row(n);
    let summand = expect_class(KClass::new(
        row.s.clone(),
        &row.r - &row.s,
        crate::coords::CoordSet::range(BigInt::one(), row.s.clone()),
    ));
    StageClassPair {
        stage: n,
        classes: SummandClass::new(
            vec![summand],
            BigInt::from(2) * &row.r,
            BigInt::one(),
        )
        .expect("closed form fits the stage"),
    }
}

/// Iterates the connecting maps from the stage-0 classes and checks exact
/// agreement with the closed forms at every stage, on both presets.
pub fn iterate_and_check(n_max: u32) -> Report {
    assert!(n_max >= 1, "iteration needs at least one step");
    let mut report = Report::new();
    let spec_a = DiagonalSystemSpec::paper_a(n_max);
    let spec_b = DiagonalSystemSpec::paper_b(n_max);

    type Track<'a> = (&'a str, StageClassPair, fn(u32) -> StageClassPair, &'a DiagonalSystemSpec);
    let tracks: [Track; 3] = [
        ("paper-a/p", canonical_p(0), canonical_p, &spec_a),
        ("paper-a/p-prime", canonical_p_prime(0), canonical_p_prime, &spec_a),
        ("paper-b/q", canonical_q(0), canonical_q, &spec_b),
    ];

    for (name, start, closed_form, spec) in tracks {
        let mut current = start;
        for n in 1..=n_max {
            match apply_connecting(&current, spec) {
                Ok(next) => {
                    let expected = closed_form(n);
                    report.push(
                        format!("{name} stage={n}"),
                        next == expected,
                        if next == expected {
                            String::new()
                        } else {
                            format!("iterated {next:?} differs from closed form")
                        },
                    );
                    current = next;
                }
                Err(e) => {
                    report.push(format!("{name} stage={n}"), false, e.to_string());
                    break;
                }
            }
        }
    }
    report
}
