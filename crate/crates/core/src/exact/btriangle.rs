//! Decomposition of a value into the coefficients of `1/((m-i)(n-j))`.

use std::collections::BTreeMap;

use num_traits::Zero;

use super::poly::Poly2;
use super::{ExactError, Rat, RatFunc};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BTriangle {
    pub k: usize,
    /// Entries for every `i + j < k`, zeros included.
    pub coeffs: BTreeMap<(usize, usize), Rat>,
    /// Whatever the basis terms do not account for, as one reduced term.
    pub residual: RatFunc,
}

impl BTriangle {
    pub fn zeros(k: usize) -> Self {
        let mut coeffs = BTreeMap::new();
        for i in 0..k {
            for j in 0..k - i {
                coeffs.insert((i, j), Rat::zero());
            }
        }
        BTriangle {
            k,
            coeffs,
            residual: RatFunc::zero(),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> Rat {
        self.coeffs.get(&(i, j)).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn reconstruct(&self) -> RatFunc {
        let mut acc = self.residual.clone();
        for ((i, j), b) in &self.coeffs {
            if !b.is_zero() {
                acc = &acc + &RatFunc::basis(*i as i64, *j as i64).scale(b);
            }
        }
        acc
    }

    pub fn is_integral(&self) -> bool {
        self.coeffs.values().all(|b| b.is_integer())
    }

    /// Row `i` holds `b_{i,0} .. b_{i,k-1-i}`.
    pub fn rows(&self) -> Vec<Vec<Rat>> {
        (0..self.k)
            .map(|i| (0..self.k - i).map(|j| self.get(i, j)).collect())
            .collect()
    }
}

/// Simple-pole residue of `num/den` at `m = a`, as `(num, den)` with `m`
/// substituted; `None` when there is no pole there.
fn residue_m(num: &Poly2, den: &Poly2, a: usize) -> Result<Option<(Poly2, Poly2)>, ExactError> {
    let at = Rat::from_integer(a.into());
    let sub = |p: &Poly2| p.eval_m(&at);
    if !sub(den).is_zero() {
        return Ok(None);
    }
    let rest = Poly2::exact_div(den, &Poly2::linear(true, a as i64));
    let rest_at = sub(&rest);
    if rest_at.is_zero() {
        return Err(ExactError::HigherOrderPole {
            symbol: 'm',
            at: a as i64,
        });
    }
    Ok(Some((sub(num), rest_at)))
}

/// Laurent residue at `n = a` of a function of `n` alone, for a pole of any
/// order.
fn residue_n(num: &Poly2, den: &Poly2, a: usize) -> Option<Rat> {
    let at = Rat::from_integer(a.into());
    if !den.eval_n(&at).is_zero() {
        return None;
    }
    let lin = Poly2::linear(false, a as i64);
    let mut q = den.clone();
    let mut order = 0;
    while q.eval_n(&at).is_zero() {
        q = Poly2::exact_div(&q, &lin);
        order += 1;
    }
    let coeffs = |p: &Poly2| -> Vec<Rat> {
        let s = p.shift(0, a as i64);
        (0..order)
            .map(|d| {
                s.terms()
                    .find(|(e, _)| **e == (0, d as u32))
                    .map(|(_, c)| c.clone())
                    .unwrap_or_else(Rat::zero)
            })
            .collect()
    };
    let (u, v) = (coeffs(num), coeffs(&q));
    let mut w: Vec<Rat> = Vec::with_capacity(order);
    for d in 0..order {
        let mut acc = u[d].clone();
        for e in 0..d {
            acc -= &w[e] * &v[d - e];
        }
        w.push(acc / &v[0]);
    }
    w.pop()
}

pub fn to_btriangle(f: &RatFunc, k: usize) -> Result<BTriangle, ExactError> {
    let mut out = BTriangle::zeros(k);
    for i in 0..k {
        let Some((rn, rd)) = residue_m(f.numer(), f.denom(), i)? else {
            continue;
        };
        let row = RatFunc::new(rn, rd)?;
        for j in 0..k - i {
            if let Some(b) = residue_n(row.numer(), row.denom(), j) {
                out.coeffs.insert((i, j), b);
            }
        }
    }
    let mut resid = f.clone();
    for ((i, j), b) in &out.coeffs {
        if !b.is_zero() {
            resid = &resid - &RatFunc::basis(*i as i64, *j as i64).scale(b);
        }
    }
    out.residual = resid;
    Ok(out)
}
