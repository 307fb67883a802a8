//! Randomized lemma replays with reproducible seeding.
//!
//! Every trial derives its own 64-bit seed from the suite seed, the check
//! stream, and the trial index, so a failing instance is replayable from
//! the reported seed alone and the aggregate is independent of thread
//! count. Spectra are sampled away from every threshold a check uses
//! (gap at least ten times the rank tolerance) so rank counts stay
//! unambiguous; kernels are exact zeros.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{
    average_intertwiner, cutdown, cuntz_leq, hereditary_solve, kr_witness, operator_norm,
    C64, CMat, HermitianSample,
};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckStats {
    pub trials: u64,
    pub passes: u64,
    pub failures: u64,
    pub failing_seeds: Vec<u64>,
}

impl CheckStats {
    pub fn record(&mut self, seed: u64, ok: bool) {
        self.trials += 1;
        if ok {
            self.passes += 1;
        } else {
            self.failures += 1;
            self.failing_seeds.push(seed);
        }
    }

    pub fn merge(&mut self, other: CheckStats) {
        self.trials += other.trials;
        self.passes += other.passes;
        self.failures += other.failures;
        self.failing_seeds.extend(other.failing_seeds);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub trials: u64,
    pub dim_max: usize,
    pub tol: f64,
    pub checks: BTreeMap<String, CheckStats>,
}

impl SuiteReport {
    pub fn total_failures(&self) -> u64 {
        self.checks.values().map(|c| c.failures).sum()
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("report serializes")
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E3779B97F4A7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

fn trial_seed(seed: u64, stream: u64, trial: u64) -> u64 {
    splitmix64(
        seed ^ stream.wrapping_mul(0xA0761D6478BD642F) ^ trial.wrapping_mul(0xE7037ED1A0B428DB),
    )
}

fn complex_gaussian<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im)
    })
}

fn haar_like_unitary<R: Rng>(rng: &mut R, dim: usize) -> CMat {
    complex_gaussian(rng, dim, dim).qr().q()
}

fn rotate_frame<R: Rng>(rng: &mut R, frame: &CMat, magnitude: f64) -> CMat {
    let dim = frame.nrows();
    let bump = CMat::identity(dim, dim)
        + complex_gaussian(rng, dim, dim).scale(magnitude / dim as f64);
    frame * bump.qr().q()
}

/// Eigenvalues uniform on [0,1]; half the instances are clipped downward to
/// create a genuine kernel. Positive survivors below ten tolerances are
/// flushed to exact zero so the rank is never threshold-ambiguous.
fn sample_spectrum<R: Rng>(rng: &mut R, dim: usize, tol: f64) -> Vec<f64> {
    let cut = if rng.gen_bool(0.5) {
        rng.gen_range(0.1..0.5)
    } else {
        0.0
    };
    (0..dim)
        .map(|_| {
            let v = (rng.gen_range(0.0..1.0f64) - cut).max(0.0);
            if v > 0.0 && v < 10.0 * tol {
                0.0
            } else {
                v
            }
        })
        .collect()
}

fn psd_sample<R: Rng>(rng: &mut R, dim: usize, tol: f64) -> HermitianSample {
    let frame = haar_like_unitary(rng, dim);
    let eigs = sample_spectrum(rng, dim, tol);
    HermitianSample::from_spectrum(frame, eigs)
}

/// Moves positive eigenvalues out of the band `cut ± halfwidth`.
fn clear_band(eigs: &mut [f64], cut: f64, halfwidth: f64) {
    for e in eigs.iter_mut() {
        if *e > 0.0 && (*e - cut).abs() < halfwidth {
            *e = cut + halfwidth;
        }
    }
}

/// `((a - e1)₊ - e2)₊ = (a - (e1+e2))₊` as matrices.
fn check_cutdown_composition(rng: &mut ChaCha8Rng, dim_max: usize, tol: f64) -> bool {
    let dim = rng.gen_range(2..=dim_max);
    let a = psd_sample(rng, dim, tol);
    let e1 = rng.gen_range(0.02..0.5);
    let e2 = rng.gen_range(0.02..0.5);
    let twice = match cutdown(&a, e1).and_then(|x| cutdown(&x, e2)) {
        Ok(x) => x,
        Err(_) => return false,
    };
    let once = match cutdown(&a, e1 + e2) {
        Ok(x) => x,
        Err(_) => return false,
    };
    operator_norm(&(twice.entries() - once.entries())) <= 1e-10
}

/// Builds a perturbed partner: slightly rotated frame, jittered spectrum
/// with positives kept well above the rank threshold and kernels exact.
fn perturbed_pair(
    rng: &mut ChaCha8Rng,
    dim_max: usize,
    tol: f64,
) -> (HermitianSample, HermitianSample, f64) {
    let dim = rng.gen_range(2..=dim_max);
    let frame_a = haar_like_unitary(rng, dim);
    let eigs_a = sample_spectrum(rng, dim, tol);
    let a = HermitianSample::from_spectrum(frame_a.clone(), eigs_a.clone());
    let frame_b = rotate_frame(rng, &frame_a, 0.1);
    let eigs_b: Vec<f64> = eigs_a
        .iter()
        .map(|&v| {
            if v == 0.0 {
                if rng.gen_bool(0.3) {
                    rng.gen_range(0.01..0.05)
                } else {
                    0.0
                }
            } else {
                (v + rng.gen_range(-0.05..0.05)).clamp(0.01, 1.2)
            }
        })
        .collect();
    let b = HermitianSample::from_spectrum(frame_b, eigs_b);
    let dist = operator_norm(&(a.entries() - b.entries()));
    let eps = dist + (dist * 1e-3).max(50.0 * tol);
    (a, b, eps)
}

/// `‖a - b‖ < eps` forces `(a - eps)₊ ≾ b`.
fn check_norm_perturbation(rng: &mut ChaCha8Rng, dim_max: usize, tol: f64) -> bool {
    let (a, b, eps) = perturbed_pair(rng, dim_max, tol);
    match cutdown(&a, eps) {
        Ok(cut) => cuntz_leq(&cut, &b, tol).unwrap_or(false),
        Err(_) => false,
    }
}

/// The shifted variant: `(a - lam - eps)₊ ≾ (b - lam)₊`.
fn check_shifted_perturbation(rng: &mut ChaCha8Rng, dim_max: usize, tol: f64) -> bool {
    let (a, b, eps) = perturbed_pair(rng, dim_max, tol);
    let mut lam = rng.gen_range(0.05..0.8);
    for _ in 0..100 {
        let blocked = b
            .eigenvalues()
            .iter()
            .any(|&mu| mu > 0.0 && (mu - lam).abs() < 20.0 * tol);
        if !blocked {
            break;
        }
        lam -= 47.0 * tol;
    }
    let lam = lam.max(0.0);
    let lhs = match cutdown(&a, lam + eps) {
        Ok(x) => x,
        Err(_) => return false,
    };
    let rhs = match cutdown(&b, lam) {
        Ok(x) => x,
        Err(_) => return false,
    };
    cuntz_leq(&lhs, &rhs, tol).unwrap_or(false)
}

/// `(c*c - lam)₊` and `(cc* - lam)₊` have equal rank.
fn check_flip_rank(rng: &mut ChaCha8Rng, dim_max: usize, tol: f64) -> bool {
    let dim = rng.gen_range(2..=dim_max);
    let c = complex_gaussian(rng, dim, dim).scale(1.0 / (dim as f64).sqrt());
    let left = match HermitianSample::new(c.adjoint() * &c) {
        Ok(x) => x,
        Err(_) => return false,
    };
    let right = match HermitianSample::new(&c * c.adjoint()) {
        Ok(x) => x,
        Err(_) => return false,
    };
    // cut between two well-separated eigenvalues (or above the top)
    let eigs = left.eigenvalues();
    let mut lam = left.max_eigenvalue() + 0.5;
    for _ in 0..16 {
        let k = rng.gen_range(0..=dim);
        let candidate = if k == dim {
            left.max_eigenvalue() + 0.5
        } else if k == 0 {
            if eigs[0] < 40.0 * tol {
                continue;
            }
            eigs[0] / 2.0
        } else {
            if eigs[k] - eigs[k - 1] < 40.0 * tol {
                continue;
            }
            (eigs[k] + eigs[k - 1]) / 2.0
        };
        lam = candidate.max(0.0);
        break;
    }
    let lcut = match cutdown(&left, lam) {
        Ok(x) => x,
        Err(_) => return false,
    };
    let rcut = match cutdown(&right, lam) {
        Ok(x) => x,
        Err(_) => return false,
    };
    lcut.numerical_rank(tol) == rcut.numerical_rank(tol)
        && cuntz_leq(&lcut, &rcut, tol).unwrap_or(false)
        && cuntz_leq(&rcut, &lcut, tol).unwrap_or(false)
}

/// Two-sided cutdown for contractions `0 ≤ a, g ≤ 1`:
/// `rank((a - e1 - e2)₊) ≤ rank(((1-g)a(1-g) - e1)₊) + rank((g - e2/2)₊)`.
fn check_two_sided_cutdown(rng: &mut ChaCha8Rng, dim_max: usize, tol: f64) -> bool {
    let dim = rng.gen_range(2..=dim_max);
    let e1 = rng.gen_range(0.05..0.35);
    let e2 = rng.gen_range(0.05..0.35);
    let mut eigs_a = sample_spectrum(rng, dim, tol);
    clear_band(&mut eigs_a, e1 + e2, 50.0 * tol);
    let a = HermitianSample::from_spectrum(haar_like_unitary(rng, dim), eigs_a);
    let g = psd_sample(rng, dim, tol);
    let one_minus_g = CMat::identity(dim, dim) - g.entries();
    let squeezed = match HermitianSample::new(&one_minus_g * a.entries() * &one_minus_g) {
        Ok(x) => x,
        Err(_) => return false,
    };
    let lhs = match cutdown(&a, e1 + e2) {
        Ok(x) => x.numerical_rank(tol),
        Err(_) => return false,
    };
    let rhs1 = match cutdown(&squeezed, e1) {
        Ok(x) => x.numerical_rank(tol),
        Err(_) => return false,
    };
    let rhs2 = match cutdown(&g, e2 / 2.0) {
        Ok(x) => x.numerical_rank(tol),
        Err(_) => return false,
    };
    lhs <= rhs1 + rhs2
}

type LemmaCheck = fn(&mut ChaCha8Rng, usize, f64) -> bool;

const LEMMA_CHECKS: [(&str, LemmaCheck); 5] = [
    ("cutdown-composition", check_cutdown_composition),
    ("norm-perturbation", check_norm_perturbation),
    ("shifted-perturbation", check_shifted_perturbation),
    ("flip-rank", check_flip_rank),
    ("two-sided-cutdown", check_two_sided_cutdown),
];

/// Scalar inequalities on the grid s, t ∈ {0, 0.01, ..., 0.99}, evaluated
/// in exact integer arithmetic (the grid contains ten pairs that land
/// exactly on the sign boundary, where floating point could tip either
/// way). Seeds encode the grid position.
fn run_scalar_grid() -> CheckStats {
    let mut stats = CheckStats::default();
    for j in 0..100i64 {
        for k in 0..100i64 {
            // 2t - t² - s > 0  iff  t - 1 + sqrt(1 - s) > 0, at t = j/100,
            // s = k/100; the right side squares to (100-j)² < 100·(100-k).
            let lhs = 200 * j - j * j - 100 * k > 0;
            let rhs = (100 - j) * (100 - j) < 100 * (100 - k);
            stats.record((j * 100 + k) as u64, lhs == rhs);
        }
    }
    for k in 0..100i64 {
        // 1 - sqrt(1 - s) >= s/2  squares to  (200-k)² >= 400·(100-k)
        stats.record((10_000 + k) as u64, (200 - k) * (200 - k) >= 400 * (100 - k));
    }
    stats
}

/// Runs all checks single-threaded.
pub fn lemma_suite(seed: u64, trials: u64, dim_max: usize, tol: f64) -> SuiteReport {
    lemma_suite_with_threads(seed, trials, dim_max, tol, 1)
}

/// Runs the randomized checks across `threads` workers. Each trial is
/// seeded independently, so the aggregate is identical for any thread
/// count.
pub fn lemma_suite_with_threads(
    seed: u64,
    trials: u64,
    dim_max: usize,
    tol: f64,
    threads: usize,
) -> SuiteReport {
    assert!(trials >= 1, "need at least one trial");
    assert!(dim_max >= 2, "need at least 2x2 samples");
    assert!(tol > 0.0, "tolerance must be positive");
    let threads = threads.max(1).min(trials.max(1) as usize);

    let run_range = |lo: u64, hi: u64| -> BTreeMap<String, CheckStats> {
        let mut out: BTreeMap<String, CheckStats> = BTreeMap::new();
        for (idx, (name, check)) in LEMMA_CHECKS.iter().enumerate() {
            let stats = out.entry((*name).to_string()).or_default();
            for trial in lo..hi {
                let tseed = trial_seed(seed, idx as u64, trial);
                let mut rng = ChaCha8Rng::seed_from_u64(tseed);
                stats.record(tseed, check(&mut rng, dim_max, tol));
            }
        }
        out
    };

    let mut checks: BTreeMap<String, CheckStats> = if threads == 1 {
        run_range(0, trials)
    } else {
        let chunk = trials.div_ceil(threads as u64);
        let partials: Vec<BTreeMap<String, CheckStats>> = std::thread::scope(|scope| {
            let handles: Vec<_> = (0..threads as u64)
                .map(|t| {
                    let lo = t * chunk;
                    let hi = ((t + 1) * chunk).min(trials);
                    let run = &run_range;
                    scope.spawn(move || run(lo, hi.max(lo)))
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("suite worker panicked"))
                .collect()
        });
        let mut merged: BTreeMap<String, CheckStats> = BTreeMap::new();
        for partial in partials {
            for (name, stats) in partial {
                merged.entry(name).or_default().merge(stats);
            }
        }
        merged
    };
    checks.insert("scalar-grid".to_string(), run_scalar_grid());
    for stats in checks.values_mut() {
        stats.failing_seeds.sort_unstable();
    }
    SuiteReport {
        seed,
        trials,
        dim_max,
        tol,
        checks,
    }
}

/// Randomized replays of the bounded-intertwiner construction.
pub fn kr_witness_trials(seed: u64, trials: u64, dim: usize, tol: f64) -> CheckStats {
    let mut stats = CheckStats::default();
    for trial in 0..trials {
        let tseed = trial_seed(seed, 16, trial);
        let mut rng = ChaCha8Rng::seed_from_u64(tseed);
        let frame_b = haar_like_unitary(&mut rng, dim);
        let rank_b = rng.gen_range(1..=dim);
        let mut eigs_b = vec![0.0; dim];
        for e in eigs_b.iter_mut().take(rank_b) {
            *e = rng.gen_range(0.2..1.0);
        }
        let b = HermitianSample::from_spectrum(frame_b, eigs_b);
        let delta = rng.gen_range(0.05..0.15);
        let rank_a = rng.gen_range(0..=rank_b);
        let frame_a = haar_like_unitary(&mut rng, dim);
        let mut eigs_a = vec![0.0; dim];
        for e in eigs_a.iter_mut().take(rank_a) {
            *e = rng.gen_range(0.05..1.0);
        }
        let a = HermitianSample::from_spectrum(frame_a, eigs_a);

        let ok = match kr_witness(&a, &b, delta, tol) {
            Ok(w) => {
                let bound = a.norm().sqrt() / delta.sqrt() + 1e-8;
                let rebuilt = &w * b.entries() * w.adjoint();
                operator_norm(&w) <= bound
                    && operator_norm(&(rebuilt - a.entries())) <= tol.max(1e-10)
            }
            Err(_) => false,
        };
        stats.record(tseed, ok);
    }
    stats
}

/// Randomized replays of the averaging argument under a random order-two
/// unitary: the averaged residual never exceeds the unaveraged one.
pub fn averaging_trials(seed: u64, trials: u64, dim: usize, tol: f64) -> CheckStats {
    assert!(dim >= 2, "need a two-block split");
    let mut stats = CheckStats::default();
    for trial in 0..trials {
        let tseed = trial_seed(seed, 17, trial);
        let mut rng = ChaCha8Rng::seed_from_u64(tseed);
        let q = haar_like_unitary(&mut rng, dim);
        let split = rng.gen_range(1..dim);
        let mut sign = CMat::zeros(dim, dim);
        for i in 0..dim {
            sign[(i, i)] = C64::new(if i < split { 1.0 } else { -1.0 }, 0.0);
        }
        let u = &q * sign * q.adjoint();

        // invariant means block-diagonal in the eigenbasis of u
        let mut block_psd = |floor: f64| -> HermitianSample {
            let mut block = CMat::zeros(dim, dim);
            for (lo, hi) in [(0, split), (split, dim)] {
                let size = hi - lo;
                let frame = haar_like_unitary(&mut rng, size);
                let mut diag = CMat::zeros(size, size);
                for i in 0..size {
                    let v = if floor == 0.0 && rng.gen_bool(0.3) {
                        0.0
                    } else {
                        rng.gen_range(floor.max(0.05)..1.0)
                    };
                    diag[(i, i)] = C64::new(v, 0.0);
                }
                let small = &frame * diag * frame.adjoint();
                for i in 0..size {
                    for j in 0..size {
                        block[(lo + i, lo + j)] = small[(i, j)];
                    }
                }
            }
            let full = &q * block * q.adjoint();
            HermitianSample::new((&full + full.adjoint()).scale(0.5))
                .expect("block construction is Hermitian")
        };

        let b = block_psd(0.0);
        let mid = block_psd(0.05);
        let a_raw = b.entries() * mid.entries() * b.entries();
        let a = HermitianSample::new((&a_raw + a_raw.adjoint()).scale(0.5))
            .expect("sandwich is Hermitian");

        let actions = vec![CMat::identity(dim, dim), u.clone()];
        let ok = match average_intertwiner(&a, &b, &actions, tol) {
            Ok(d) => {
                let c = hereditary_solve(&a, &b, tol);
                let err_avg = operator_norm(&(a.entries() - b.entries() * &d * b.entries()));
                let err_raw = operator_norm(&(a.entries() - b.entries() * &c * b.entries()));
                let moved = operator_norm(&(&u * &d * u.adjoint() - &d));
                err_avg <= err_raw + 1e-9 && moved <= tol.max(1e-10)
            }
            Err(_) => false,
        };
        stats.record(tseed, ok);
    }
    stats
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suite_is_clean_and_deterministic() {
        let a = lemma_suite(7, 25, 6, 1e-9);
        assert_eq!(a.total_failures(), 0, "{:?}", a.checks);
        let b = lemma_suite(7, 25, 6, 1e-9);
        assert_eq!(a, b);
        for stats in a.checks.values() {
            assert_eq!(stats.trials, stats.passes + stats.failures);
        }
        assert_eq!(a.checks["scalar-grid"].trials, 10_100);
    }

    #[test]
    fn thread_count_does_not_change_the_outcome() {
        let single = lemma_suite_with_threads(11, 16, 5, 1e-9, 1);
        let multi = lemma_suite_with_threads(11, 16, 5, 1e-9, 3);
        assert_eq!(single, multi);
    }

    #[test]
    fn scalar_grid_hand_value() {
        // s = 0.75: 1 - sqrt(0.25) = 0.5 >= 0.375
        assert!(1.0 - (1.0f64 - 0.75).sqrt() >= 0.75 / 2.0);
        let stats = run_scalar_grid();
        assert_eq!(stats.failures, 0);
    }

    #[test]
    fn degenerate_two_sided_instance() {
        // a = 1, g = 0: ranks 2 <= 2 + 0
        let dim = 2;
        let a = HermitianSample::new(CMat::identity(dim, dim)).unwrap();
        let g = HermitianSample::new(CMat::zeros(dim, dim)).unwrap();
        let tol = 1e-9;
        let lhs = cutdown(&a, 0.2).unwrap().numerical_rank(tol);
        let squeezed = HermitianSample::new(
            (CMat::identity(dim, dim) - g.entries())
                * a.entries()
                * (CMat::identity(dim, dim) - g.entries()),
        )
        .unwrap();
        let rhs1 = cutdown(&squeezed, 0.1).unwrap().numerical_rank(tol);
        let rhs2 = cutdown(&g, 0.05).unwrap().numerical_rank(tol);
        assert_eq!(lhs, 2);
        assert_eq!(rhs1, 2);
        assert_eq!(rhs2, 0);
        assert!(lhs <= rhs1 + rhs2);
    }

    #[test]
    fn witness_trials_small_run() {
        let stats = kr_witness_trials(3, 40, 8, 1e-9);
        assert_eq!(stats.failures, 0, "failing seeds: {:?}", stats.failing_seeds);
    }

    #[test]
    fn averaging_trials_small_run() {
        let stats = averaging_trials(5, 20, 6, 1e-9);
        assert_eq!(stats.failures, 0, "failing seeds: {:?}", stats.failing_seeds);
    }
}
