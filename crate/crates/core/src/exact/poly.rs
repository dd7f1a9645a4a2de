//! Sparse bivariate polynomials in the symbols m and n with rational
//! coefficients.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::upoly::{self, UPoly};
use super::Rat;

/// Exponent pair `(degree in m, degree in n)`.
pub type Exponent = (u32, u32);

#[derive(Clone, PartialEq, Eq, Hash, Default, Debug)]
pub struct Poly2 {
    terms: BTreeMap<Exponent, Rat>,
}

/// Graded-lexicographic order with m before n.
pub fn grlex(a: &Exponent, b: &Exponent) -> Ordering {
    (a.0 + a.1, a.0, a.1).cmp(&(b.0 + b.1, b.0, b.1))
}

impl Poly2 {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(Rat::one())
    }

    pub fn constant(c: Rat) -> Self {
        Self::monomial(c, 0, 0)
    }

    pub fn monomial(c: Rat, dm: u32, dn: u32) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert((dm, dn), c);
        }
        Poly2 { terms }
    }

    pub fn m() -> Self {
        Self::monomial(Rat::one(), 1, 0)
    }

    pub fn n() -> Self {
        Self::monomial(Rat::one(), 0, 1)
    }

    /// `m - a` when `sym_m`, otherwise `n - a`.
    pub fn linear(sym_m: bool, a: i64) -> Self {
        let x = if sym_m { Self::m() } else { Self::n() };
        &x - &Self::constant(Rat::from_integer(a.into()))
    }

    pub fn from_terms<I: IntoIterator<Item = (Exponent, Rat)>>(it: I) -> Self {
        let mut p = Poly2::zero();
        for (e, c) in it {
            p.add_term(e, c);
        }
        p
    }

    fn add_term(&mut self, e: Exponent, c: Rat) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(e).or_insert_with(Rat::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&e);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &Rat)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn as_constant(&self) -> Option<Rat> {
        match self.terms.len() {
            0 => Some(Rat::zero()),
            1 => self.terms.get(&(0, 0)).cloned(),
            _ => None,
        }
    }

    pub fn is_one(&self) -> bool {
        self.as_constant().is_some_and(|c| c.is_one())
    }

    pub fn deg_m(&self) -> u32 {
        self.terms.keys().map(|e| e.0).max().unwrap_or(0)
    }

    pub fn deg_n(&self) -> u32 {
        self.terms.keys().map(|e| e.1).max().unwrap_or(0)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|e| e.0 + e.1).max().unwrap_or(0)
    }

    /// Leading term under graded-lex order.
    pub fn leading(&self) -> Option<(&Exponent, &Rat)> {
        self.terms.iter().max_by(|a, b| grlex(a.0, b.0))
    }

    pub fn scale(&self, c: &Rat) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Poly2 {
            terms: self.terms.iter().map(|(e, v)| (*e, v * c)).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    pub fn eval(&self, m0: &Rat, n0: &Rat) -> Rat {
        let mut acc = Rat::zero();
        for ((i, j), c) in &self.terms {
            acc += c * pow_rat(m0, *i) * pow_rat(n0, *j);
        }
        acc
    }

    /// Substitutes only the m symbol, returning a polynomial in n.
    pub fn eval_m(&self, m0: &Rat) -> Self {
        let mut out = Self::zero();
        for ((i, j), c) in &self.terms {
            out.add_term((0, *j), c * pow_rat(m0, *i));
        }
        out
    }

    /// Substitutes only the n symbol, returning a polynomial in m.
    pub fn eval_n(&self, n0: &Rat) -> Self {
        let mut out = Self::zero();
        for ((i, j), c) in &self.terms {
            out.add_term((*i, 0), c * pow_rat(n0, *j));
        }
        out
    }

    /// `p(m + a, n + b)`.
    pub fn shift(&self, a: i64, b: i64) -> Self {
        if a == 0 && b == 0 {
            return self.clone();
        }
        let a = Rat::from_integer(a.into());
        let b = Rat::from_integer(b.into());
        let mut out = Self::zero();
        for ((i, j), c) in &self.terms {
            for p in 0..=*i {
                let cm = binom_u(*i, p) * pow_rat(&a, i - p);
                if cm.is_zero() {
                    continue;
                }
                for q in 0..=*j {
                    let cn = binom_u(*j, q) * pow_rat(&b, j - q);
                    out.add_term((p, q), c * &cm * cn);
                }
            }
        }
        out
    }

    /// Least common multiple of coefficient denominators.
    pub fn denominator_lcm(&self) -> BigInt {
        self.terms
            .values()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()))
    }

    /// Gcd of coefficient numerators; only meaningful for integer coefficients.
    pub fn integer_content(&self) -> BigInt {
        self.terms
            .values()
            .fold(BigInt::zero(), |acc, c| acc.gcd(c.numer()))
    }

    pub fn has_integer_coeffs(&self) -> bool {
        self.terms.values().all(|c| c.is_integer())
    }

    /// Rescales to an integer primitive polynomial with positive leading
    /// coefficient, returning the factor used.
    pub fn primitive_factor(&self) -> Rat {
        if self.is_zero() {
            return Rat::one();
        }
        let l = self.denominator_lcm();
        let scaled = self.scale(&Rat::from_integer(l.clone()));
        let content = scaled.integer_content();
        let mut f = Rat::new(l, content);
        if self.leading().unwrap().1.is_negative() {
            f = -f;
        }
        f
    }

    fn to_upolys(&self) -> Vec<UPoly> {
        let mut out: Vec<UPoly> = vec![Vec::new(); self.deg_m() as usize + 1];
        for ((i, j), c) in &self.terms {
            let row = &mut out[*i as usize];
            if row.len() <= *j as usize {
                row.resize(*j as usize + 1, Rat::zero());
            }
            row[*j as usize] = c.clone();
        }
        for r in out.iter_mut() {
            upoly::trim(r);
        }
        trim_outer(&mut out);
        out
    }

    fn from_upolys(p: &[UPoly]) -> Self {
        let mut out = Self::zero();
        for (i, row) in p.iter().enumerate() {
            for (j, c) in row.iter().enumerate() {
                out.add_term((i as u32, j as u32), c.clone());
            }
        }
        out
    }

    /// Greatest common divisor up to a rational unit.
    ///
    /// Works on the m-primitive parts: univariate gcds at sample values of n
    /// are scaled by the gcd of the leading coefficients and interpolated,
    /// then confirmed by trial division. A unit gcd at a point where neither
    /// leading coefficient vanishes proves the parts coprime.
    pub fn gcd(a: &Poly2, b: &Poly2) -> Poly2 {
        if a.is_zero() {
            return b.clone();
        }
        if b.is_zero() {
            return a.clone();
        }
        if a.as_constant().is_some() || b.as_constant().is_some() {
            return Poly2::one();
        }
        let pa = a.to_upolys();
        let pb = b.to_upolys();
        let ca = content(&pa);
        let cb = content(&pb);
        let c = upoly::gcd(&ca, &cb);
        let x = primitive_part(&pa, &ca);
        let y = primitive_part(&pb, &cb);
        let g = if x.len() == 1 || y.len() == 1 {
            vec![upoly::one()]
        } else {
            interpolated_gcd(&x, &y).unwrap_or_else(|| prs_gcd(x, y))
        };
        let g: Vec<UPoly> = g.iter().map(|row| upoly::mul(row, &c)).collect();
        Poly2::from_upolys(&g)
    }

    /// Exact quotient `a / b`; panics if `b` does not divide `a`.
    pub fn exact_div(a: &Poly2, b: &Poly2) -> Poly2 {
        Self::checked_div(a, b).expect("polynomial division is not exact")
    }

    /// Quotient `a / b` when the division is exact.
    pub fn checked_div(a: &Poly2, b: &Poly2) -> Option<Poly2> {
        assert!(!b.is_zero(), "division by the zero polynomial");
        if let Some(c) = b.as_constant() {
            return Some(a.scale(&c.recip()));
        }
        let mut r = a.to_upolys();
        let pb = b.to_upolys();
        if r.len() < pb.len() {
            return if r.is_empty() { Some(Poly2::zero()) } else { None };
        }
        let lb = pb.last().unwrap();
        let mut q: Vec<UPoly> = vec![Vec::new(); r.len() - pb.len() + 1];
        while r.len() >= pb.len() {
            let shift = r.len() - pb.len();
            let (c, rem) = upoly::divrem(r.last().unwrap(), lb);
            if !rem.is_empty() {
                return None;
            }
            for (i, y) in pb.iter().enumerate() {
                r[shift + i] = upoly::sub(&r[shift + i], &upoly::mul(&c, y));
            }
            q[shift] = c;
            trim_outer(&mut r);
        }
        if !r.is_empty() {
            return None;
        }
        Some(Poly2::from_upolys(&q))
    }

    pub fn fmt_with(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut keys: Vec<&Exponent> = self.terms.keys().collect();
        keys.sort_by(|a, b| grlex(b, a));
        for (idx, e) in keys.iter().enumerate() {
            let c = &self.terms[*e];
            let neg = c.is_negative();
            let abs = c.abs();
            if idx == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let mut parts: Vec<String> = Vec::new();
            if !abs.is_one() || (e.0 == 0 && e.1 == 0) {
                parts.push(abs.to_string());
            }
            for (sym, d) in [("m", e.0), ("n", e.1)] {
                match d {
                    0 => {}
                    1 => parts.push(sym.to_string()),
                    _ => parts.push(format!("{sym}^{d}")),
                }
            }
            write!(f, "{}", parts.join("*"))?;
        }
        Ok(())
    }
}

impl fmt::Display for Poly2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_with(f)
    }
}

fn trim_outer(p: &mut Vec<UPoly>) {
    while p.last().is_some_and(|r| r.is_empty()) {
        p.pop();
    }
}

fn content(p: &[UPoly]) -> UPoly {
    let mut c: UPoly = Vec::new();
    for row in p {
        c = upoly::gcd(&c, row);
        if c.len() == 1 {
            break;
        }
    }
    c
}

/// Divides out the content in n and then scales to integer coefficients
/// with trivial integer content, which keeps the remainder sequence small.
fn primitive_part(p: &[UPoly], c: &UPoly) -> Vec<UPoly> {
    let mut out: Vec<UPoly> = if c.len() == 1 && c[0].is_one() {
        p.to_vec()
    } else {
        p.iter()
            .map(|row| {
                let (q, r) = upoly::divrem(row, c);
                debug_assert!(r.is_empty());
                q
            })
            .collect()
    };
    let mut l = BigInt::one();
    let mut g = BigInt::zero();
    for c in out.iter().flatten() {
        l = l.lcm(c.denom());
    }
    for c in out.iter().flatten() {
        g = g.gcd(&(c.numer() * (&l / c.denom())));
    }
    let f = Rat::new(l, g);
    if !f.is_one() {
        for c in out.iter_mut().flatten() {
            *c *= &f;
        }
    }
    out
}

fn prs_gcd(mut x: Vec<UPoly>, mut y: Vec<UPoly>) -> Vec<UPoly> {
    if x.len() < y.len() {
        std::mem::swap(&mut x, &mut y);
    }
    loop {
        if y.len() == 1 {
            return vec![upoly::one()];
        }
        let r = prem(&x, &y);
        if r.is_empty() {
            return y;
        }
        let cr = content(&r);
        x = y;
        y = primitive_part(&r, &cr);
    }
}

fn eval_in_n(p: &[UPoly], n0: &Rat) -> UPoly {
    let mut out: UPoly = p.iter().map(|row| upoly::eval(row, n0)).collect();
    upoly::trim(&mut out);
    out
}

/// Gcd of two m-primitive polynomials; `None` when interpolation could not
/// be confirmed and the caller should fall back to the remainder sequence.
fn interpolated_gcd(x: &[UPoly], y: &[UPoly]) -> Option<Vec<UPoly>> {
    let lx = x.last().unwrap();
    let ly = y.last().unwrap();
    let gamma = upoly::gcd(lx, ly);
    let dn = |p: &[UPoly]| p.iter().map(|r| r.len().saturating_sub(1)).max().unwrap_or(0);
    let need = dn(x).min(dn(y)) + gamma.len().saturating_sub(1) + 1;
    let mut best = usize::MAX;
    let mut pts: Vec<(Rat, UPoly)> = Vec::new();
    let mut t: i64 = 0;
    let mut tries = 0;
    while tries < 4 * need + 40 {
        tries += 1;
        let n0 = Rat::from_integer(t.into());
        t = if t > 0 { -t } else { -t + 1 };
        if upoly::eval(lx, &n0).is_zero() || upoly::eval(ly, &n0).is_zero() {
            continue;
        }
        let g = upoly::gcd(&eval_in_n(x, &n0), &eval_in_n(y, &n0));
        let d = g.len() - 1;
        if d == 0 {
            return Some(vec![upoly::one()]);
        }
        if d > best {
            continue;
        }
        if d < best {
            best = d;
            pts.clear();
        }
        let scale = upoly::eval(&gamma, &n0);
        pts.push((n0, g.into_iter().map(|c| c * &scale).collect()));
        if pts.len() < need {
            continue;
        }
        let h = interpolate(&pts, best + 1);
        let ch = content(&h);
        let h = primitive_part(&h, &ch);
        let hp = Poly2::from_upolys(&h);
        let (xp, yp) = (Poly2::from_upolys(x), Poly2::from_upolys(y));
        if Poly2::checked_div(&xp, &hp).is_some() && Poly2::checked_div(&yp, &hp).is_some() {
            return Some(h);
        }
        return None;
    }
    None
}

/// Lagrange interpolation of each m-coefficient across the sample points.
fn interpolate(pts: &[(Rat, UPoly)], width: usize) -> Vec<UPoly> {
    let mut out: Vec<UPoly> = vec![Vec::new(); width];
    for (i, (xi, vi)) in pts.iter().enumerate() {
        let mut basis: UPoly = upoly::one();
        let mut denom = Rat::one();
        for (l, (xl, _)) in pts.iter().enumerate() {
            if l != i {
                basis = upoly::mul(&basis, &vec![-xl.clone(), Rat::one()]);
                denom *= xi - xl;
            }
        }
        for (j, v) in vi.iter().enumerate() {
            if v.is_zero() {
                continue;
            }
            let f = v / &denom;
            let term: UPoly = basis.iter().map(|b| b * &f).collect();
            out[j] = upoly::add(&out[j], &term);
        }
    }
    trim_outer(&mut out);
    out
}

/// Pseudo-remainder in Q[n][m] without the final leading-coefficient power.
fn prem(a: &[UPoly], b: &[UPoly]) -> Vec<UPoly> {
    let mut r = a.to_vec();
    let lb = b.last().unwrap();
    while r.len() >= b.len() {
        let shift = r.len() - b.len();
        let lr = r.last().unwrap().clone();
        for row in r.iter_mut() {
            *row = upoly::mul(row, lb);
        }
        for (i, y) in b.iter().enumerate() {
            r[shift + i] = upoly::sub(&r[shift + i], &upoly::mul(&lr, y));
        }
        trim_outer(&mut r);
    }
    r
}

fn pow_rat(x: &Rat, e: u32) -> Rat {
    num_traits::pow(x.clone(), e as usize)
}

fn binom_u(n: u32, k: u32) -> Rat {
    let mut acc = BigInt::one();
    for t in 0..k {
        acc = acc * BigInt::from(n - t) / BigInt::from(t + 1);
    }
    Rat::from_integer(acc)
}

impl Add for &Poly2 {
    type Output = Poly2;
    fn add(self, rhs: &Poly2) -> Poly2 {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, c.clone());
        }
        out
    }
}

impl Sub for &Poly2 {
    type Output = Poly2;
    fn sub(self, rhs: &Poly2) -> Poly2 {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, -c.clone());
        }
        out
    }
}

impl Mul for &Poly2 {
    type Output = Poly2;
    fn mul(self, rhs: &Poly2) -> Poly2 {
        let mut out = Poly2::zero();
        for ((a, b), x) in &self.terms {
            for ((c, d), y) in &rhs.terms {
                out.add_term((a + c, b + d), x * y);
            }
        }
        out
    }
}

impl Neg for &Poly2 {
    type Output = Poly2;
    fn neg(self) -> Poly2 {
        Poly2 {
            terms: self.terms.iter().map(|(e, c)| (*e, -c.clone())).collect(),
        }
    }
}
