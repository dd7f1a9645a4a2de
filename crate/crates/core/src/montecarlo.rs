//! Sampling estimates used to cross-check the exact values.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pattern::{Pos, ZeroPattern};

/// Samples per block; block sums are combined in index order, so the result
/// does not depend on how blocks are spread over workers.
const BLOCK: usize = 1024;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SampleError {
    #[error("invalid sampling configuration: {0}")]
    Config(String),
}

#[derive(Clone, Debug)]
pub struct SampleConfig {
    pub m0: usize,
    pub n0: usize,
    pub k: usize,
    pub zeros: ZeroPattern,
    pub samples: usize,
    pub seed: u64,
    pub workers: usize,
}

impl SampleConfig {
    pub fn new(m0: usize, n0: usize, k: usize, zeros: ZeroPattern) -> Self {
        SampleConfig {
            m0,
            n0,
            k,
            zeros,
            samples: 100_000,
            seed: 1,
            workers: 1,
        }
    }

    pub fn validate(&self) -> Result<(), SampleError> {
        let bad = |m: String| Err(SampleError::Config(m));
        if self.samples == 0 {
            return bad("samples must be at least 1".into());
        }
        if self.k > self.m0.min(self.n0) {
            return bad(format!("k = {} exceeds min({}, {})", self.k, self.m0, self.n0));
        }
        if self.zeros.rows() > self.m0 || self.zeros.cols() > self.n0 {
            return bad(format!(
                "zero window {}x{} exceeds the {}x{} matrix",
                self.zeros.rows(),
                self.zeros.cols(),
                self.m0,
                self.n0
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
}

impl Estimate {
    /// `(mean - target) / stderr`, or 0 when both sides agree exactly.
    pub fn z_score(&self, target: f64) -> f64 {
        let d = self.mean - target;
        if self.stderr == 0.0 {
            if d == 0.0 {
                0.0
            } else {
                f64::INFINITY.copysign(d)
            }
        } else {
            d / self.stderr
        }
    }
}

#[derive(Clone, Copy, Default)]
struct Moments {
    n: usize,
    sum: f64,
    sum_sq: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    fn merge(&mut self, o: &Moments) {
        self.n += o.n;
        self.sum += o.sum;
        self.sum_sq += o.sum_sq;
    }

    fn estimate(&self) -> Estimate {
        let n = self.n as f64;
        let mean = self.sum / n;
        let var = if self.n > 1 {
            ((self.sum_sq - n * mean * mean) / (n - 1.0)).max(0.0)
        } else {
            0.0
        };
        Estimate {
            mean,
            stderr: (var / n).sqrt(),
            samples: self.n,
        }
    }
}

/// The generator for one sample: the seed picks the key, the sample index
/// picks the stream.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Exp(1) by inversion, with `U` uniform on (0, 1].
pub fn exp1<R: Rng>(rng: &mut R) -> f64 {
    let u = 1.0 - rng.random::<f64>();
    -u.ln()
}

/// Runs `f` once per sample index and returns per-output moments. Each
/// closure call returns the same number of values.
fn run_blocks<F>(samples: usize, workers: usize, outputs: usize, f: F) -> Vec<Estimate>
where
    F: Fn(u64) -> Vec<f64> + Sync,
{
    let nblocks = samples.div_ceil(BLOCK);
    let workers = workers.clamp(1, nblocks.max(1));
    let block = |b: usize| {
        let mut m = vec![Moments::default(); outputs];
        for i in b * BLOCK..((b + 1) * BLOCK).min(samples) {
            for (acc, x) in m.iter_mut().zip(f(i as u64)) {
                acc.push(x);
            }
        }
        m
    };
    let mut blocks: Vec<Vec<Moments>> = vec![Vec::new(); nblocks];
    std::thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let block = &block;
                s.spawn(move || {
                    (w..nblocks)
                        .step_by(workers)
                        .map(|b| (b, block(b)))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            for (b, m) in h.join().expect("sampling worker panicked") {
                blocks[b] = m;
            }
        }
    });
    let mut total = vec![Moments::default(); outputs];
    for b in &blocks {
        for (t, m) in total.iter_mut().zip(b) {
            t.merge(m);
        }
    }
    total.iter().map(Moments::estimate).collect()
}

/// Minimum-cost set of `k` cells, no two sharing a row or column, by
/// successive shortest augmenting paths with node potentials.
pub fn min_cost_k_assignment(costs: &[Vec<f64>], k: usize) -> (f64, Vec<Pos>) {
    let m = costs.len();
    let n = if m == 0 { 0 } else { costs[0].len() };
    assert!(k <= m.min(n), "k exceeds the matrix size");
    let inf = f64::INFINITY;
    let mut row_match: Vec<Option<usize>> = vec![None; m];
    let mut col_match: Vec<Option<usize>> = vec![None; n];
    let mut pr = vec![0.0f64; m];
    let mut pc = vec![0.0f64; n];
    for _ in 0..k {
        let mut dr: Vec<f64> = row_match.iter().map(|r| if r.is_none() { 0.0 } else { inf }).collect();
        let mut dc = vec![inf; n];
        let mut done_r = vec![false; m];
        let mut done_c = vec![false; n];
        let mut prev = vec![usize::MAX; n];
        let target = loop {
            let mut best = (inf, usize::MAX, false);
            for i in 0..m {
                if !done_r[i] && dr[i] < best.0 {
                    best = (dr[i], i, true);
                }
            }
            for j in 0..n {
                if !done_c[j] && dc[j] < best.0 {
                    best = (dc[j], j, false);
                }
            }
            let (d, x, is_row) = best;
            assert!(x != usize::MAX, "no augmenting path");
            if is_row {
                done_r[x] = true;
                for j in 0..n {
                    if done_c[j] || col_match[j] == Some(x) {
                        continue;
                    }
                    let nd = d + costs[x][j] + pr[x] - pc[j];
                    if nd < dc[j] {
                        dc[j] = nd;
                        prev[j] = x;
                    }
                }
            } else {
                done_c[x] = true;
                match col_match[x] {
                    None => break x,
                    Some(r) => {
                        if d < dr[r] {
                            dr[r] = d;
                        }
                    }
                }
            }
        };
        let dmax = dc[target];
        for i in 0..m {
            pr[i] += dr[i].min(dmax);
        }
        for j in 0..n {
            pc[j] += dc[j].min(dmax);
        }
        let mut j = target;
        loop {
            let i = prev[j];
            let old = row_match[i];
            row_match[i] = Some(j);
            col_match[j] = Some(i);
            match old {
                Some(o) => j = o,
                None => break,
            }
        }
    }
    let mut cells: Vec<Pos> = row_match
        .iter()
        .enumerate()
        .filter_map(|(i, c)| c.map(|c| (i, c)))
        .collect();
    cells.sort();
    let cost = cells.iter().map(|&(i, j)| costs[i][j]).sum();
    (cost, cells)
}

fn draw_matrix(cfg: &SampleConfig, index: u64) -> Vec<Vec<f64>> {
    let mut rng = sample_rng(cfg.seed, index);
    (0..cfg.m0)
        .map(|i| {
            (0..cfg.n0)
                .map(|j| {
                    let x = exp1(&mut rng);
                    if cfg.zeros.is_zero(i, j) {
                        0.0
                    } else {
                        x
                    }
                })
                .collect()
        })
        .collect()
}

/// Mean optimal k-assignment cost over independent draws.
pub fn estimate_f(cfg: &SampleConfig) -> Result<Estimate, SampleError> {
    cfg.validate()?;
    Ok(run_blocks(cfg.samples, cfg.workers, 1, |i| {
        vec![min_cost_k_assignment(&draw_matrix(cfg, i), cfg.k).0]
    })[0])
}

/// Fraction of draws whose computed optimum uses `cell`. When zeros allow
/// several optima this reports the solver's choice.
pub fn estimate_use_probability(cfg: &SampleConfig, cell: Pos) -> Result<Estimate, SampleError> {
    cfg.validate()?;
    if cell.0 >= cfg.m0 || cell.1 >= cfg.n0 {
        return Err(SampleError::Config(format!(
            "cell ({}, {}) outside the matrix",
            cell.0 + 1,
            cell.1 + 1
        )));
    }
    Ok(run_blocks(cfg.samples, cfg.workers, 1, |i| {
        let (_, cells) = min_cost_k_assignment(&draw_matrix(cfg, i), cfg.k);
        vec![if cells.contains(&cell) { 1.0 } else { 0.0 }]
    })[0])
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EbCheck {
    pub lhs: Estimate,
    pub rhs: Estimate,
    /// Mean paired difference over its standard error.
    pub z: f64,
}

/// With `f(x) = min_i (a_i + b_i x)` and `I` its minimizing index, estimates
/// `E(b_I)` and `E(f(X)) - f(0)` from the same draws of `X ~ Exp(1)`.
pub fn check_eb_identity(a: &[f64], b: &[f64], samples: usize, seed: u64) -> Result<EbCheck, SampleError> {
    if a.is_empty() || a.len() != b.len() {
        return Err(SampleError::Config("a and b must be nonempty and of equal length".into()));
    }
    if b.iter().any(|&x| x <= 0.0) {
        return Err(SampleError::Config("b must be positive".into()));
    }
    if samples == 0 {
        return Err(SampleError::Config("samples must be at least 1".into()));
    }
    let amin = a.iter().cloned().fold(f64::INFINITY, f64::min);
    let est = run_blocks(samples, 1, 3, |i| {
        let x = exp1(&mut sample_rng(seed, i));
        let (mut best, mut bi) = (f64::INFINITY, 0.0);
        for (ai, bj) in a.iter().zip(b) {
            let v = ai + bj * x;
            if v < best {
                best = v;
                bi = *bj;
            }
        }
        let r = best - amin;
        vec![bi, r, bi - r]
    });
    let diff = est[2];
    Ok(EbCheck {
        lhs: est[0],
        rhs: est[1],
        z: diff.z_score(0.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::{any, prop_assert, proptest};

    fn brute(costs: &[Vec<f64>], k: usize) -> f64 {
        fn go(costs: &[Vec<f64>], row: usize, k: usize, used: &mut Vec<bool>) -> f64 {
            if k == 0 {
                return 0.0;
            }
            if costs.len() - row < k {
                return f64::INFINITY;
            }
            let mut best = go(costs, row + 1, k, used);
            for j in 0..used.len() {
                if !used[j] {
                    used[j] = true;
                    best = best.min(costs[row][j] + go(costs, row + 1, k - 1, used));
                    used[j] = false;
                }
            }
            best
        }
        go(costs, 0, k, &mut vec![false; costs[0].len()])
    }

    #[test]
    fn tiny_matrices() {
        let c = vec![vec![1.0, 2.0], vec![3.0, 4.0]];
        assert_eq!(min_cost_k_assignment(&c, 2).0, 5.0);
        assert_eq!(min_cost_k_assignment(&c, 1), (1.0, vec![(0, 0)]));
        assert_eq!(min_cost_k_assignment(&c, 0).0, 0.0);
    }

    #[test]
    fn solver_matches_brute_force() {
        let mut rng = sample_rng(7, 0);
        for t in 0..1000 {
            let m = 1 + t % 5;
            let n = 1 + (t / 5) % 5;
            let c: Vec<Vec<f64>> = (0..m)
                .map(|_| (0..n).map(|_| if rng.random::<f64>() < 0.2 { 0.0 } else { exp1(&mut rng) }).collect())
                .collect();
            for k in 0..=m.min(n) {
                let (cost, cells) = min_cost_k_assignment(&c, k);
                assert_eq!(cells.len(), k);
                let mut rows: Vec<usize> = cells.iter().map(|p| p.0).collect();
                let mut cols: Vec<usize> = cells.iter().map(|p| p.1).collect();
                rows.dedup();
                cols.sort();
                cols.dedup();
                assert_eq!((rows.len(), cols.len()), (k, k));
                assert!((cost - brute(&c, k)).abs() < 1e-9, "{c:?} k={k}");
            }
        }
    }

    #[test]
    fn deterministic_across_workers() {
        let mut cfg = SampleConfig::new(3, 3, 2, ZeroPattern::empty());
        cfg.samples = 5000;
        let a = estimate_f(&cfg).unwrap();
        cfg.workers = 3;
        let b = estimate_f(&cfg).unwrap();
        assert_eq!(a.mean.to_bits(), b.mean.to_bits());
        assert_eq!(a.stderr.to_bits(), b.stderr.to_bits());
    }

    #[test]
    fn stderr_shrinks_with_samples() {
        let mut cfg = SampleConfig::new(2, 2, 2, ZeroPattern::empty());
        cfg.samples = 20_000;
        let a = estimate_f(&cfg).unwrap();
        cfg.samples = 40_000;
        let b = estimate_f(&cfg).unwrap();
        let ratio = b.stderr / a.stderr;
        assert!((ratio - std::f64::consts::FRAC_1_SQRT_2).abs() < 0.2 * std::f64::consts::FRAC_1_SQRT_2);
    }

    #[test]
    fn estimates_hit_targets() {
        let mut cfg = SampleConfig::new(2, 2, 2, ZeroPattern::empty());
        cfg.samples = 100_000;
        cfg.workers = 4;
        assert!(estimate_f(&cfg).unwrap().z_score(1.25).abs() < 4.0);
        cfg.k = 1;
        let u = estimate_use_probability(&cfg, (0, 0)).unwrap();
        assert!(u.z_score(0.25).abs() < 4.0);
    }

    #[test]
    fn rejects_bad_config() {
        let mut cfg = SampleConfig::new(2, 2, 3, ZeroPattern::empty());
        assert!(estimate_f(&cfg).is_err());
        cfg.k = 1;
        cfg.samples = 0;
        assert!(estimate_f(&cfg).is_err());
        assert!(check_eb_identity(&[0.0], &[1.0, 2.0], 10, 1).is_err());
    }

    #[test]
    fn eb_identity() {
        let one = check_eb_identity(&[0.0], &[1.0], 1000, 3).unwrap();
        assert_eq!((one.lhs.mean, one.lhs.stderr), (1.0, 0.0));
        assert!(one.rhs.z_score(1.0).abs() < 4.0);
        assert!(one.z.abs() < 4.0);
        // Lines cross at x = 1, so E(b_I) = 2(1 - e^-1) + e^-1.
        let two = check_eb_identity(&[0.0, 1.0], &[2.0, 1.0], 200_000, 5).unwrap();
        let exact = 2.0 - (-1.0f64).exp();
        assert!(two.lhs.z_score(exact).abs() < 4.0);
        assert!(two.z.abs() < 4.0);
        let three = check_eb_identity(&[3.0, 0.0], &[1.0, 5.0], 200_000, 6).unwrap();
        let exact = 5.0 - 4.0 * (-0.75f64).exp();
        assert!(three.lhs.z_score(exact).abs() < 4.0);
        assert!(three.z.abs() < 4.0);
    }

    proptest! {
        #[test]
        fn exp_samples_positive(seed in any::<u64>(), idx in 0u64..1000) {
            let x = exp1(&mut sample_rng(seed, idx));
            prop_assert!(x >= 0.0 && x.is_finite());
        }
    }
}
