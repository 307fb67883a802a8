//! Extreme tracial states on the homogeneous stages and the induced pairing
//! on K-classes.
//!
//! An extreme trace is a point evaluation on one summand composed with the
//! normalized matrix trace. On a projection class the pairing is the fiber
//! rank divided by the stage matrix size; it is independent of the
//! evaluation point because every class here has constant fiber rank.

use num_bigint::BigInt;
use num_rational::BigRational;
use thiserror::Error;

use crate::ah_system::StageClassPair;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TraceError {
    #[error("trace is at stage {trace_stage}, class pair at stage {class_stage}")]
    StageMismatch { trace_stage: u32, class_stage: u32 },
    #[error("summand {summand} outside the stage (has {count})")]
    SummandOutOfRange { summand: usize, count: usize },
}

/// Point evaluation on one summand composed with the normalized trace of
/// the stage matrix algebra.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceFunctional {
    pub stage: u32,
    pub summand: usize,
    pub normalization: BigInt,
}

/// One extreme trace per summand of the stage the pair lives at.
pub fn extreme_traces(x: &StageClassPair) -> Vec<TraceFunctional> {
    (0..x.classes.per_summand.len())
        .map(|summand| TraceFunctional {
            stage: x.stage,
            summand,
            normalization: x.classes.matrix_size.clone(),
        })
        .collect()
}

/// Pairing of a class pair with one extreme trace: fiber rank on the
/// trace's summand divided by the stage matrix size.
pub fn d_tau(x: &StageClassPair, tau: &TraceFunctional) -> Result<BigRational, TraceError> {
    if tau.stage != x.stage {
        return Err(TraceError::StageMismatch {
            trace_stage: tau.stage,
            class_stage: x.stage,
        });
    }
    let class = x
        .classes
        .per_summand
        .get(tau.summand)
        .ok_or(TraceError::SummandOutOfRange {
            summand: tau.summand,
            count: x.classes.per_summand.len(),
        })?;
    Ok(BigRational::new(class.rank(), tau.normalization.clone()))
}

/// Maximum of the pairing over the extreme traces of the stage.
pub fn d_tau_max(x: &StageClassPair) -> BigRational {
    extreme_traces(x)
        .iter()
        .map(|tau| d_tau(x, tau).expect("traces built from the pair always apply"))
        .max()
        .expect("stages have at least one summand")
}

/// Minimum of the pairing over the extreme traces of the stage.
pub fn d_tau_min(x: &StageClassPair) -> BigRational {
    extreme_traces(x)
        .iter()
        .map(|tau| d_tau(x, tau).expect("traces built from the pair always apply"))
        .min()
        .expect("stages have at least one summand")
}
