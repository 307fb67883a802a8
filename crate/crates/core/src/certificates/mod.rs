//! Radius-of-comparison bounds as exact rational data: the mean-dimension
//! upper bound, replayable lower-bound certificates, and the corner /
//! fixed-point interval arithmetic connecting the two systems.
//!
//! Certificate generation and verification live in separate submodules and
//! share no inequality code; the verifier re-derives every bound from the
//! serialized fields and the table/class/trace primitives.

mod generate;
mod verify;

pub use generate::{certified_rho_supremum, rc_lower_certificate};
pub use verify::verify_certificate;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde_json::{json, Value};
use std::str::FromStr;
use thiserror::Error;

use crate::ah_system::{DiagonalSystemSpec, Preset};
use crate::exact::{format_rational, parse_rational};
use crate::sequences::kappa_interval;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CertError {
    #[error("rho {rho} is not certified below the bound {bound}")]
    RhoTooLarge { rho: String, bound: String },
    #[error("rho must be nonnegative, got {0}")]
    NegativeRho(String),
    #[error("dimension/size ratios do not eventually decrease: {0}")]
    Divergent(String),
    #[error("corner range invalid: {0}")]
    BadRange(String),
    #[error("unknown system {0:?}")]
    UnsupportedSystem(String),
    #[error("malformed certificate JSON: {0}")]
    Json(String),
}

/// Which preset a certificate talks about.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SystemId {
    PaperA,
    PaperB,
}

impl SystemId {
    pub fn as_str(&self) -> &'static str {
        match self {
            SystemId::PaperA => "paper-a",
            SystemId::PaperB => "paper-b",
        }
    }
}

impl FromStr for SystemId {
    type Err = CertError;

    fn from_str(s: &str) -> Result<Self, CertError> {
        match s {
            "paper-a" => Ok(SystemId::PaperA),
            "paper-b" => Ok(SystemId::PaperB),
            other => Err(CertError::UnsupportedSystem(other.to_string())),
        }
    }
}

/// Exact rational bracket for a radius of comparison, with the rule ids
/// that produced each endpoint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RcInterval {
    pub lower: BigRational,
    pub upper: BigRational,
    pub provenance: Vec<String>,
}

impl RcInterval {
    pub fn new(lower: BigRational, upper: BigRational, provenance: Vec<String>) -> Self {
        assert!(lower <= upper, "interval endpoints out of order");
        RcInterval { lower, upper, provenance }
    }
}

/// Replayable witness that a system fails rho-comparison: the certified
/// ratio-limit bracket at a declared depth, the chosen stage and trivial
/// rank, the stages replayed explicitly, and the flag that the monotone
/// tail argument covers all later stages.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RcCertificate {
    pub system: SystemId,
    pub rho: BigRational,
    pub kappa_lb: BigRational,
    pub kappa_ub: BigRational,
    pub terms: u32,
    pub n: u32,
    pub m_rank: BigInt,
    pub window: Vec<u32>,
    pub monotone_tail: bool,
}

impl RcCertificate {
    /// JSON with all rationals as "p/q" strings and the rank as a decimal
    /// string; the verifier consumes exactly this shape.
    pub fn to_json(&self) -> Value {
        json!({
            "system": self.system.as_str(),
            "rho": format_rational(&self.rho),
            "kappa_lb": format_rational(&self.kappa_lb),
            "kappa_ub": format_rational(&self.kappa_ub),
            "terms": self.terms,
            "n": self.n,
            "M": self.m_rank.to_string(),
            "window": self.window,
            "monotone_tail": self.monotone_tail,
        })
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("certificate JSON serializes")
    }

    pub fn from_json(v: &Value) -> Result<Self, CertError> {
        let str_field = |key: &str| -> Result<&str, CertError> {
            v.get(key)
                .and_then(Value::as_str)
                .ok_or_else(|| CertError::Json(format!("missing string field {key:?}")))
        };
        let rational_field = |key: &str| -> Result<BigRational, CertError> {
            parse_rational(str_field(key)?).map_err(CertError::Json)
        };
        let int_field = |key: &str| -> Result<u64, CertError> {
            v.get(key)
                .and_then(Value::as_u64)
                .ok_or_else(|| CertError::Json(format!("missing integer field {key:?}")))
        };
        let system = SystemId::from_str(str_field("system")?)?;
        let m_rank = str_field("M")?
            .parse::<BigInt>()
            .map_err(|e| CertError::Json(format!("M: {e}")))?;
        let window = v
            .get("window")
            .and_then(Value::as_array)
            .ok_or_else(|| CertError::Json("missing window".into()))?
            .iter()
            .map(|x| {
                x.as_u64()
                    .map(|m| m as u32)
                    .ok_or_else(|| CertError::Json("window entries must be stages".into()))
            })
            .collect::<Result<Vec<u32>, _>>()?;
        Ok(RcCertificate {
            system,
            rho: rational_field("rho")?,
            kappa_lb: rational_field("kappa_lb")?,
            kappa_ub: rational_field("kappa_ub")?,
            terms: int_field("terms")? as u32,
            n: int_field("n")? as u32,
            m_rank,
            window,
            monotone_tail: v
                .get("monotone_tail")
                .and_then(Value::as_bool)
                .ok_or_else(|| CertError::Json("missing monotone_tail".into()))?,
        })
    }

    pub fn from_json_str(text: &str) -> Result<Self, CertError> {
        let v: Value = serde_json::from_str(text).map_err(|e| CertError::Json(e.to_string()))?;
        RcCertificate::from_json(&v)
    }
}

/// Mean-dimension upper bound: half the certified limit of the maximal
/// dimension/size ratio of the stages. For the presets the ratio is
/// `2s(n)/r(n)` respectively `s(n)/r(n)`, whose limits are bracketed by the
/// ratio-limit interval; only the upper endpoint is meaningful, the lower
/// endpoint of the result is 0.
pub fn niu_upper_bound(
    spec: &DiagonalSystemSpec,
    terms: u32,
) -> Result<RcInterval, CertError> {
    match spec.preset {
        Preset::PaperA => {
            let ki = kappa_interval(terms);
            Ok(RcInterval::new(
                BigRational::zero(),
                ki.upper,
                vec![
                    "mean-dimension-halved".into(),
                    "dim-ratio-limit:2s/r".into(),
                ],
            ))
        }
        Preset::PaperB => {
            let ki = kappa_interval(terms);
            Ok(RcInterval::new(
                BigRational::zero(),
                ki.upper / BigRational::from_integer(BigInt::from(2)),
                vec![
                    "mean-dimension-halved".into(),
                    "dim-ratio-limit:2s/2r".into(),
                ],
            ))
        }
        Preset::Custom => {
            // Ratio at each declared stage: max over summands of
            // dim/size = 2·coords/size.
            let two = BigRational::from_integer(BigInt::from(2));
            let ratios: Vec<BigRational> = spec
                .stages
                .iter()
                .map(|s| {
                    &two * BigRational::new(s.coords_per_summand.clone(), s.matrix_size.clone())
                })
                .collect();
            if ratios.is_empty() {
                return Err(CertError::Divergent("no stages declared".into()));
            }
            if ratios.len() >= 2 {
                let last_step = ratios.len() - 1;
                if ratios[last_step] > ratios[last_step - 1] {
                    return Err(CertError::Divergent(format!(
                        "ratio rises at the final declared stage ({} -> {})",
                        ratios[last_step - 1], ratios[last_step]
                    )));
                }
            }
            // The declared stages are read as the continuing pattern: with
            // non-increasing ratios the limit is at most the last ratio, and
            // it is 0 when the dimensions freeze while the sizes keep
            // growing.
            let tail_constant_dim = spec.stages.len() >= 2
                && spec.stages.windows(2).all(|w| {
                    w[0].coords_per_summand == w[1].coords_per_summand
                        && w[0].matrix_size < w[1].matrix_size
                });
            let limit = if tail_constant_dim {
                BigRational::zero()
            } else {
                ratios.last().expect("nonempty").clone()
            };
            Ok(RcInterval::new(
                BigRational::zero(),
                limit / two,
                vec!["mean-dimension-halved".into(), "custom-tail".into()],
            ))
        }
    }
}

/// Corner scaling: a corner cut by a projection whose quasitrace values lie
/// in `[lambda, eta]` has its radius of comparison between the original one
/// divided by `eta` and divided by `lambda`.
pub fn corner_rc_interval(
    rc: &RcInterval,
    lambda: &BigRational,
    eta: &BigRational,
) -> Result<RcInterval, CertError> {
    if *lambda <= BigRational::zero() || lambda > eta {
        return Err(CertError::BadRange(format!(
            "need 0 < lambda <= eta, got lambda={lambda}, eta={eta}"
        )));
    }
    let mut provenance = rc.provenance.clone();
    provenance.push("corner-scaling".into());
    Ok(RcInterval::new(
        &rc.lower / eta,
        &rc.upper / lambda,
        provenance,
    ))
}

/// Fixed-point algebra versus crossed product: the fixed-point radius is the
/// group order times the crossed-product radius, realized as the corner by
/// the averaged unitary whose quasitrace value is `1/group_order`.
pub fn fixed_point_relation(rc_crossed: &RcInterval, group_order: u32) -> RcInterval {
    assert!(group_order >= 1, "group order must be positive");
    let inv = BigRational::new(BigInt::one(), BigInt::from(group_order));
    corner_rc_interval(rc_crossed, &inv, &inv).expect("0 < 1/order <= 1/order")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ah_system::StageSpec;
    use crate::exact::ratio;

    #[test]
    fn preset_upper_bounds_match_the_ratio_limit() {
        let ki = kappa_interval(40);
        let a = niu_upper_bound(&DiagonalSystemSpec::paper_a(2), 40).unwrap();
        assert_eq!(a.upper, ki.upper);
        assert_eq!(a.lower, BigRational::zero());

        let b = niu_upper_bound(&DiagonalSystemSpec::paper_b(2), 40).unwrap();
        assert_eq!(b.upper, ki.upper / ratio(2, 1));
    }

    fn custom_spec(stages: Vec<StageSpec>) -> DiagonalSystemSpec {
        DiagonalSystemSpec {
            preset: Preset::Custom,
            stages,
            maps: Vec::new(),
        }
    }

    #[test]
    fn constant_dimension_custom_spec_has_vanishing_bound() {
        let stages = (0..5)
            .map(|n| StageSpec {
                summand_count: 1,
                matrix_size: BigInt::from(1i64 << n),
                coords_per_summand: BigInt::from(3),
            })
            .collect();
        let rc = niu_upper_bound(&custom_spec(stages), 10).unwrap();
        assert_eq!(rc.upper, BigRational::zero());
    }

    #[test]
    fn rising_custom_ratios_are_rejected() {
        let stages = vec![
            StageSpec {
                summand_count: 1,
                matrix_size: BigInt::from(4),
                coords_per_summand: BigInt::from(2),
            },
            StageSpec {
                summand_count: 1,
                matrix_size: BigInt::from(4),
                coords_per_summand: BigInt::from(3),
            },
        ];
        assert!(matches!(
            niu_upper_bound(&custom_spec(stages), 10),
            Err(CertError::Divergent(_))
        ));
    }

    #[test]
    fn corner_examples() {
        let ki = kappa_interval(20);
        let half = ratio(1, 2);
        let rc_b = RcInterval::new(&ki.lower * &half, &ki.upper * &half, vec![]);
        let scaled = corner_rc_interval(&rc_b, &half, &half).unwrap();
        assert_eq!(scaled.lower, ki.lower);
        assert_eq!(scaled.upper, ki.upper);

        let unchanged = corner_rc_interval(&rc_b, &ratio(1, 1), &ratio(1, 1)).unwrap();
        assert_eq!(unchanged.lower, rc_b.lower);
        assert_eq!(unchanged.upper, rc_b.upper);

        let zero = RcInterval::new(ratio(0, 1), ratio(0, 1), vec![]);
        let still_zero = corner_rc_interval(&zero, &ratio(1, 3), &ratio(1, 2)).unwrap();
        assert_eq!(still_zero.lower, ratio(0, 1));
        assert_eq!(still_zero.upper, ratio(0, 1));

        assert!(matches!(
            corner_rc_interval(&zero, &ratio(0, 1), &ratio(1, 2)),
            Err(CertError::BadRange(_))
        ));
        assert!(matches!(
            corner_rc_interval(&zero, &ratio(2, 3), &ratio(1, 2)),
            Err(CertError::BadRange(_))
        ));
    }

    #[test]
    fn fixed_point_examples() {
        let rc = RcInterval::new(ratio(1, 4), ratio(1, 3), vec![]);
        let tripled = fixed_point_relation(&rc, 3);
        assert_eq!(tripled.lower, ratio(3, 4));
        assert_eq!(tripled.upper, ratio(1, 1));

        let same = fixed_point_relation(&rc, 1);
        assert_eq!(same.lower, rc.lower);
        assert_eq!(same.upper, rc.upper);
    }

    #[test]
    fn certificate_json_round_trip() {
        let cert = rc_lower_certificate(SystemId::PaperA, &ratio(1, 2), 40).unwrap();
        let text = cert.to_json_string();
        let parsed = RcCertificate::from_json_str(&text).unwrap();
        assert_eq!(parsed, cert);
    }
}
