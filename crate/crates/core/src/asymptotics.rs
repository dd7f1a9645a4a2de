//! Large-n limits for zero regions bounded by `x^p + y^p = 1`, in 64-bit
//! floating point.

use std::f64::consts::PI;

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::montecarlo::sample_rng;
use crate::pattern::{self, CoverSet, ZeroPattern};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AsymptoticsError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("quadrature stopped at estimated error {0:e} after exhausting its interval budget")]
    Tolerance(f64),
    #[error("n = {0} exceeds the table bound 40")]
    TooLarge(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionKind {
    QuarterCircle,
    Pnorm,
}

/// `K = {x^p + y^p >= 1}` inside the unit square; the quarter circle is `p = 2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionSpec {
    pub kind: RegionKind,
    pub p: f64,
}

impl RegionSpec {
    pub fn quarter_circle() -> Self {
        RegionSpec {
            kind: RegionKind::QuarterCircle,
            p: 2.0,
        }
    }

    pub fn pnorm(p: f64) -> Result<Self, AsymptoticsError> {
        if !(p > 1.0 && p.is_finite()) {
            return Err(AsymptoticsError::Domain(format!("p must exceed 1, got {p}")));
        }
        Ok(RegionSpec { kind: RegionKind::Pnorm, p })
    }

    pub fn exponent(&self) -> f64 {
        match self.kind {
            RegionKind::QuarterCircle => 2.0,
            RegionKind::Pnorm => self.p,
        }
    }

    /// The dual exponent `p / (p - 1)`.
    pub fn dual(&self) -> f64 {
        let p = self.exponent();
        p / (p - 1.0)
    }
}

/// Cheapest weighted strip cover of the region: `a + b - ||(a, b)||_u`.
pub fn m_ab(region: &RegionSpec, a: f64, b: f64) -> Result<f64, AsymptoticsError> {
    if !(a >= 0.0 && b >= 0.0) || (a == 0.0 && b == 0.0) {
        return Err(AsymptoticsError::Domain(format!("need a, b >= 0 not both zero, got ({a}, {b})")));
    }
    Ok(match region.kind {
        RegionKind::QuarterCircle => a + b - a.hypot(b),
        RegionKind::Pnorm => {
            let u = region.dual();
            a + b - (a.powf(u) + b.powf(u)).powf(1.0 / u)
        }
    })
}

pub fn in_region_d(region: &RegionSpec, x: f64, y: f64) -> Result<bool, AsymptoticsError> {
    if !(0.0..=1.0).contains(&x) || !(0.0..=1.0).contains(&y) {
        return Err(AsymptoticsError::Domain(format!("({x}, {y}) outside the unit square")));
    }
    if x == 1.0 && y == 1.0 {
        return Ok(false);
    }
    Ok(m_ab(region, 1.0 - x, 1.0 - y)? < 1.0 - x - y)
}

pub fn closed_form_limit(p: f64) -> Result<f64, AsymptoticsError> {
    if !(p > 1.0) {
        return Err(AsymptoticsError::Domain(format!("p must exceed 1, got {p}")));
    }
    let f = 1.0 - 1.0 / p;
    Ok(f * f * PI * PI / 6.0)
}

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// 15-point Kronrod estimate and its difference from the embedded 7-point
/// Gauss rule.
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let dx = h * XGK[i];
        let s = f(c - dx) + f(c + dx);
        k += WGK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Adaptive Gauss-Kronrod on `[a, b]`, always splitting the interval with
/// the largest error estimate.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64, max_intervals: usize) -> Result<f64, AsymptoticsError> {
    let (v, e) = gk15(&f, a, b);
    let mut parts = vec![(a, b, v, e)];
    loop {
        let total: f64 = parts.iter().map(|p| p.2).sum();
        let err: f64 = parts.iter().map(|p| p.3).sum();
        if err <= tol {
            return Ok(total);
        }
        if parts.len() >= max_intervals {
            return Err(AsymptoticsError::Tolerance(err));
        }
        let (idx, _) = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("nonempty");
        let (lo, hi, _, _) = parts.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        parts.push((lo, mid, v1, e1));
        parts.push((mid, hi, v2, e2));
    }
}

/// `-ln(1 - t) / t`, continuous at 0.
fn dilog_kernel(t: f64) -> f64 {
    if t == 0.0 {
        1.0
    } else {
        -(-t).ln_1p() / t
    }
}

/// The limit integral over `D`, reduced to `(1/u^2) * int_0^1 -ln(1-t)/t dt`.
pub fn limit_integral(region: &RegionSpec, tol: f64) -> Result<f64, AsymptoticsError> {
    if !(tol >= 1e-10) {
        return Err(AsymptoticsError::Domain(format!("tolerance must be at least 1e-10, got {tol}")));
    }
    if region.kind == RegionKind::Pnorm {
        RegionSpec::pnorm(region.p)?;
    }
    let u = region.dual();
    let scale = 1.0 / (u * u);
    Ok(scale * integrate(dilog_kernel, 0.0, 1.0, tol / scale, 4000)?)
}

/// The discretized zero set: cell `(i, j)` is a zero when its outer corner
/// `(i/n, j/n)` lies in the region.
pub fn zero_set(region: &RegionSpec, n: usize) -> Result<ZeroPattern, AsymptoticsError> {
    if n > 40 {
        return Err(AsymptoticsError::TooLarge(n));
    }
    let p = region.exponent();
    let mut z = ZeroPattern::new(n, n);
    for i in 1..=n {
        for j in 1..=n {
            let (x, y) = (i as f64 / n as f64, j as f64 / n as f64);
            if x.powf(p) + y.powf(p) >= 1.0 {
                z.insert(i - 1, j - 1);
            }
        }
    }
    Ok(z)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub f_hat: f64,
    pub limit: f64,
}

fn choose(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        let Some(i) = (0..k).rev().find(|&i| cur[i] < n - k + i) else {
            return out;
        };
        cur[i] += 1;
        for j in i + 1..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// `sum_{i+j<n} p_ij / ((n-i)(n-j))` at `k = m = n`, with each `p_ij` counted
/// exactly when there are at most `subset_samples` line sets and sampled
/// otherwise.
pub fn estimate_fn(region: &RegionSpec, n: usize, subset_samples: usize, seed: u64) -> Result<f64, AsymptoticsError> {
    let z = zero_set(region, n)?;
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n - i {
            let budget = n - 1 - i - j;
            let hit = |rows: &[usize], cols: &[usize]| pattern::is_partial_cover(&z, &CoverSet::from_lines(rows, cols), budget);
            let count = choose(n, i) * choose(n, j);
            let p = if count <= subset_samples as f64 {
                let (rs, cs) = (subsets(n, i), subsets(n, j));
                let good = rs
                    .iter()
                    .map(|r| cs.iter().filter(|c| hit(r, c)).count())
                    .sum::<usize>();
                good as f64 / count
            } else {
                let stream = ((n * 64 + i) * 64 + j) as u64;
                let mut rng = sample_rng(seed, stream);
                let good = (0..subset_samples)
                    .filter(|_| {
                        let r = sample(&mut rng, n, i).into_vec();
                        let c = sample(&mut rng, n, j).into_vec();
                        hit(&r, &c)
                    })
                    .count();
                good as f64 / subset_samples as f64
            };
            total += p / ((n - i) * (n - j)) as f64;
        }
    }
    Ok(total)
}

pub fn convergence_table(
    region: &RegionSpec,
    n_list: &[usize],
    subset_samples: usize,
    seed: u64,
) -> Result<Vec<ConvergenceRow>, AsymptoticsError> {
    let limit = closed_form_limit(region.exponent())?;
    n_list
        .iter()
        .map(|&n| {
            Ok(ConvergenceRow {
                n,
                f_hat: estimate_fn(region, n, subset_samples, seed)?,
                limit,
            })
        })
        .collect()
}

pub fn table_csv(rows: &[ConvergenceRow]) -> String {
    let mut s = String::from("n,F_hat,limit\n");
    for r in rows {
        s.push_str(&format!("{},{:.10},{:.10}\n", r.n, r.f_hat, r.limit));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conjecture::main_conjecture_f;

    fn quarter() -> RegionSpec {
        RegionSpec::quarter_circle()
    }

    #[test]
    fn m_ab_examples() {
        assert!((m_ab(&quarter(), 1.0, 1.0).unwrap() - (2.0 - 2f64.sqrt())).abs() < 1e-15);
        assert_eq!(m_ab(&quarter(), 1.0, 0.0).unwrap(), 0.0);
        assert!((m_ab(&RegionSpec::pnorm(2.0).unwrap(), 3.0, 4.0).unwrap() - 2.0).abs() < 1e-12);
        assert!(m_ab(&quarter(), 0.0, 0.0).is_err());
        assert!(m_ab(&quarter(), -1.0, 1.0).is_err());
    }

    #[test]
    fn quarter_is_p2() {
        let p2 = RegionSpec::pnorm(2.0).unwrap();
        for i in 0..40 {
            for j in 0..25 {
                let (a, b) = (i as f64 * 0.37 + 0.01, j as f64 * 0.53);
                assert!((m_ab(&quarter(), a, b).unwrap() - m_ab(&p2, a, b).unwrap()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn region_d_examples() {
        assert!(in_region_d(&quarter(), 0.0, 0.0).unwrap());
        assert!(!in_region_d(&quarter(), 1.0, 1.0).unwrap());
        let p3 = RegionSpec::pnorm(3.0).unwrap();
        let expect = (2.0 * 0.9f64.powf(1.5)).powf(2.0 / 3.0) > 1.0;
        assert_eq!(in_region_d(&p3, 0.1, 0.1).unwrap(), expect);
        assert!(in_region_d(&quarter(), 1.5, 0.0).is_err());
    }

    #[test]
    fn region_boundary_consistent() {
        for p in [1.5, 2.0, 3.0, 8.0] {
            let r = RegionSpec::pnorm(p).unwrap();
            let u = r.dual();
            for i in 1..50 {
                let x = i as f64 / 50.0;
                // Boundary (1-x)^u + (1-y)^u = 1 solved for y.
                let y = 1.0 - (1.0 - (1.0 - x).powf(u)).powf(1.0 / u);
                if y - 1e-6 > 0.0 {
                    assert!(!in_region_d(&r, x, (y + 1e-6).min(1.0)).unwrap());
                    assert!(in_region_d(&r, x, y - 1e-6).unwrap());
                }
            }
        }
    }

    #[test]
    fn limits() {
        let q = limit_integral(&quarter(), 1e-6).unwrap();
        assert!((q - PI * PI / 24.0).abs() < 1e-6);
        assert!((closed_form_limit(2.0).unwrap() - PI * PI / 24.0).abs() < 1e-15);
        assert!((closed_form_limit(1e6).unwrap() - PI * PI / 6.0).abs() < 1e-5);
        assert!((closed_form_limit(3.0).unwrap() - 2.0 * PI * PI / 27.0).abs() < 1e-15);
        assert!(closed_form_limit(1.0).is_err());
        assert!(limit_integral(&quarter(), 1e-12).is_err());
        for p in [1.5, 2.0, 3.0, 4.0, 8.0] {
            let v = limit_integral(&RegionSpec::pnorm(p).unwrap(), 1e-6).unwrap();
            assert!((v - closed_form_limit(p).unwrap()).abs() < 1e-5, "p={p}");
        }
    }

    #[test]
    fn direct_integral_agrees() {
        // The inner integral eliminated but before substituting t = x^u.
        for p in [1.5, 2.0, 4.0] {
            let u = RegionSpec::pnorm(p).unwrap().dual();
            let g = move |x: f64| if x == 0.0 { 0.0 } else { -(-(x.powf(u))).ln_1p() / (u * x) };
            let v = integrate(g, 0.0, 1.0, 1e-9, 4000).unwrap();
            assert!((v - closed_form_limit(p).unwrap()).abs() < 1e-7);
        }
    }

    #[test]
    fn small_tables() {
        assert_eq!(estimate_fn(&quarter(), 1, 100, 1).unwrap(), 0.0);
        for n in 2..=4 {
            let z = zero_set(&quarter(), n).unwrap();
            let exact = main_conjecture_f(&z, n).unwrap().eval_int(n as i64, n as i64).unwrap();
            let exact: f64 = num_traits::ToPrimitive::to_f64(&exact).unwrap();
            let est = estimate_fn(&quarter(), n, 10_000, 1).unwrap();
            assert!((est - exact).abs() < 1e-12, "n={n}: {est} vs {exact}");
        }
        let rows = convergence_table(&quarter(), &[10, 20], 200, 9).unwrap();
        assert!(rows.iter().all(|r| r.f_hat > 0.0 && r.f_hat < 1.0));
        assert!(table_csv(&rows).starts_with("n,F_hat,limit\n10,"));
        assert!(zero_set(&quarter(), 41).is_err());
    }
}
