//! Floating-point checks of the positive-element calculus in matrix
//! algebras, where subequivalence of positive elements reduces to comparing
//! numerical ranks.
//!
//! Samples are dense complex Hermitian matrices with a cached spectral
//! decomposition. Ranks are counted against the threshold
//! `tol · max(1, ‖a‖)`; the randomized suites construct spectra bounded
//! away from every threshold they test, so counts are never ambiguous.

mod suite;

pub use suite::{
    averaging_trials, kr_witness_trials, lemma_suite, lemma_suite_with_threads, CheckStats,
    SuiteReport,
};

use nalgebra::DMatrix;
use num_complex::Complex;
use thiserror::Error;

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;

/// Relative deviation allowed before a matrix stops counting as Hermitian
/// (and a spectrum stops counting as positive).
pub const HERMITIAN_SLACK: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum MatrixError {
    #[error("matrix deviates from Hermitian by {0:e} (relative)")]
    NotHermitian(f64),
    #[error("matrix has eigenvalue {0:e} below the positive cone")]
    NotPsd(f64),
    #[error("dimension mismatch: {left} vs {right}")]
    DimMismatch { left: usize, right: usize },
    #[error("rank {need} does not fit below the cutdown target of rank {have}")]
    RankDeficit { need: usize, have: usize },
    #[error("element moves under the action by {0:e}")]
    NotInvariant(f64),
    #[error("element lies outside the hereditary algebra by {0:e}")]
    NotHereditary(f64),
}

/// Dense complex Hermitian matrix with its eigendecomposition cached,
/// eigenvalues ascending and the frame columns matching them.
#[derive(Debug, Clone)]
pub struct HermitianSample {
    dim: usize,
    entries: CMat,
    eigenvalues: Vec<f64>,
    frame: CMat,
}

impl HermitianSample {
    /// Accepts a matrix Hermitian to within `HERMITIAN_SLACK` relative,
    /// symmetrizes the rounding residue away, and decomposes it.
    pub fn new(entries: CMat) -> Result<Self, MatrixError> {
        let dim = entries.nrows();
        assert_eq!(dim, entries.ncols(), "sample must be square");
        let mut scale: f64 = 1.0;
        let mut deviation: f64 = 0.0;
        for i in 0..dim {
            for j in 0..dim {
                scale = scale.max(entries[(i, j)].norm());
                deviation = deviation.max((entries[(i, j)] - entries[(j, i)].conj()).norm());
            }
        }
        if deviation > HERMITIAN_SLACK * scale {
            return Err(MatrixError::NotHermitian(deviation / scale));
        }
        let herm = (&entries + entries.adjoint()).scale(0.5);
        let eig = herm.clone().symmetric_eigen();
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let mut frame = CMat::zeros(dim, dim);
        for (col, &src) in order.iter().enumerate() {
            frame.set_column(col, &eig.eigenvectors.column(src));
        }
        Ok(HermitianSample {
            dim,
            entries: herm,
            eigenvalues,
            frame,
        })
    }

    /// Rebuilds a sample from a unitary frame and real eigenvalues; the
    /// decomposition is stored as given (sorted), not recomputed.
    pub fn from_spectrum(frame: CMat, eigenvalues: Vec<f64>) -> Self {
        let dim = frame.nrows();
        assert_eq!(dim, eigenvalues.len(), "one eigenvalue per column");
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&a, &b| eigenvalues[a].total_cmp(&eigenvalues[b]));
        let sorted: Vec<f64> = order.iter().map(|&i| eigenvalues[i]).collect();
        let mut sorted_frame = CMat::zeros(dim, dim);
        for (col, &src) in order.iter().enumerate() {
            sorted_frame.set_column(col, &frame.column(src));
        }
        let mut diag = CMat::zeros(dim, dim);
        for (i, &v) in sorted.iter().enumerate() {
            diag[(i, i)] = C64::new(v, 0.0);
        }
        let raw = &sorted_frame * diag * sorted_frame.adjoint();
        let entries = (&raw + raw.adjoint()).scale(0.5);
        HermitianSample {
            dim,
            entries,
            eigenvalues: sorted,
            frame: sorted_frame,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &CMat {
        &self.entries
    }

    /// Ascending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn frame(&self) -> &CMat {
        &self.frame
    }

    /// Spectral norm.
    pub fn norm(&self) -> f64 {
        self.eigenvalues
            .iter()
            .fold(0.0f64, |acc, &v| acc.max(v.abs()))
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    /// PSD up to `HERMITIAN_SLACK` relative to the norm.
    pub fn ensure_psd(&self) -> Result<(), MatrixError> {
        let floor = -HERMITIAN_SLACK * self.norm().max(1.0);
        if self.min_eigenvalue() < floor {
            return Err(MatrixError::NotPsd(self.min_eigenvalue()));
        }
        Ok(())
    }

    /// Count of eigenvalues above `tol · max(1, ‖a‖)`.
    pub fn numerical_rank(&self, tol: f64) -> usize {
        let threshold = tol * self.norm().max(1.0);
        self.eigenvalues.iter().filter(|&&v| v > threshold).count()
    }
}

/// Spectral cutdown: eigenvalues map to `max(0, λ - eps)`, frame unchanged.
pub fn cutdown(a: &HermitianSample, eps: f64) -> Result<HermitianSample, MatrixError> {
    assert!(eps >= 0.0, "cutdown level must be nonnegative");
    a.ensure_psd()?;
    let mapped: Vec<f64> = a
        .eigenvalues
        .iter()
        .map(|&v| (v - eps).max(0.0))
        .collect();
    Ok(HermitianSample::from_spectrum(a.frame.clone(), mapped))
}

/// Subequivalence of positive matrices: rank comparison at the tolerance.
pub fn cuntz_leq(
    a: &HermitianSample,
    b: &HermitianSample,
    tol: f64,
) -> Result<bool, MatrixError> {
    if a.dim != b.dim {
        return Err(MatrixError::DimMismatch {
            left: a.dim,
            right: b.dim,
        });
    }
    a.ensure_psd()?;
    b.ensure_psd()?;
    Ok(a.numerical_rank(tol) <= b.numerical_rank(tol))
}

/// Bounded intertwiner: a partial isometry from the range frame of
/// `(b - delta)₊` onto the range frame of `a`, scaled by `√λᵢ/√μᵢ`. Then
/// `w b w*` reproduces the rank-truncation of `a` and
/// `‖w‖ ≤ ‖a‖^(1/2) · delta^(-1/2)`.
pub fn kr_witness(
    a: &HermitianSample,
    b: &HermitianSample,
    delta: f64,
    tol: f64,
) -> Result<CMat, MatrixError> {
    assert!(delta > 0.0, "delta must be positive");
    if a.dim != b.dim {
        return Err(MatrixError::DimMismatch {
            left: a.dim,
            right: b.dim,
        });
    }
    a.ensure_psd()?;
    b.ensure_psd()?;
    let cut = cutdown(b, delta)?;
    let need = a.numerical_rank(tol);
    let have = cut.numerical_rank(tol);
    if need > have {
        return Err(MatrixError::RankDeficit { need, have });
    }
    let mut w = CMat::zeros(a.dim, a.dim);
    for i in 0..need {
        // descending pairs: the i-th largest of a against the i-th largest
        // of b (all of which exceed delta)
        let lam = a.eigenvalues[a.dim - 1 - i];
        let mu = b.eigenvalues[b.dim - 1 - i];
        let scale = (lam / mu).sqrt();
        let u_col = a.frame.column(a.dim - 1 - i).into_owned();
        let v_row = b.frame.column(b.dim - 1 - i).adjoint();
        w += (u_col * v_row).scale(scale);
    }
    Ok(w)
}

/// Operator norm of an arbitrary complex matrix.
pub fn operator_norm(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    let gram = m.adjoint() * m;
    let herm = (&gram + gram.adjoint()).scale(0.5);
    let eig = herm.symmetric_eigen();
    eig.eigenvalues
        .iter()
        .fold(0.0f64, |acc, &v| acc.max(v.max(0.0)))
        .sqrt()
}

/// Support projection of `b` at the rank tolerance.
fn support_projection(b: &HermitianSample, tol: f64) -> CMat {
    let threshold = tol * b.norm().max(1.0);
    let mut p = CMat::zeros(b.dim, b.dim);
    for i in 0..b.dim {
        if b.eigenvalues[i] > threshold {
            let col = b.frame.column(i).into_owned();
            p += &col * col.adjoint();
        }
    }
    p
}

/// Least-squares solve of `b c b ≈ a` on the support of `b`.
pub fn hereditary_solve(a: &HermitianSample, b: &HermitianSample, tol: f64) -> CMat {
    let threshold = tol * b.norm().max(1.0);
    let mut pinv = CMat::zeros(b.dim, b.dim);
    for i in 0..b.dim {
        if b.eigenvalues[i] > threshold {
            let col = b.frame.column(i).into_owned();
            pinv += (&col * col.adjoint()).scale(1.0 / b.eigenvalues[i]);
        }
    }
    &pinv * a.entries() * &pinv
}

/// Averages the hereditary solve over a finite unitary group so the result
/// is invariant; the averaged residual never exceeds the unaveraged one.
///
/// `actions` lists the unitaries of the whole group, identity included.
/// Both `a` and `b` must be fixed by every conjugation within `tol`, and
/// `a` must live in the hereditary algebra of `b` (checked via the support
/// projection).
pub fn average_intertwiner(
    a: &HermitianSample,
    b: &HermitianSample,
    actions: &[CMat],
    tol: f64,
) -> Result<CMat, MatrixError> {
    assert!(!actions.is_empty(), "the group has at least the identity");
    if a.dim != b.dim {
        return Err(MatrixError::DimMismatch {
            left: a.dim,
            right: b.dim,
        });
    }
    a.ensure_psd()?;
    b.ensure_psd()?;
    for u in actions {
        if u.nrows() != a.dim || u.ncols() != a.dim {
            return Err(MatrixError::DimMismatch {
                left: u.nrows(),
                right: a.dim,
            });
        }
        for sample in [a, b] {
            let moved = u * sample.entries() * u.adjoint();
            let dev = operator_norm(&(moved - sample.entries()));
            if dev > tol * sample.norm().max(1.0) {
                return Err(MatrixError::NotInvariant(dev));
            }
        }
    }
    let p = support_projection(b, tol);
    let squeezed = &p * a.entries() * &p;
    let escape = operator_norm(&(a.entries() - squeezed));
    if escape > tol * a.norm().max(1.0) {
        return Err(MatrixError::NotHereditary(escape));
    }

    let c = hereditary_solve(a, b, tol);
    let mut d = CMat::zeros(a.dim, a.dim);
    for u in actions {
        d += u * &c * u.adjoint();
    }
    d /= C64::new(actions.len() as f64, 0.0);

    let err_avg = operator_norm(&(a.entries() - b.entries() * &d * b.entries()));
    let err_raw = operator_norm(&(a.entries() - b.entries() * &c * b.entries()));
    assert!(
        err_avg <= err_raw + tol,
        "averaging increased the residual: {err_avg} vs {err_raw}"
    );
    Ok(d)
}
