//! Rational functions in m and n kept in a canonical reduced form.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_traits::{One, Zero};

use super::poly::Poly2;
use super::{ExactError, Rat};

/// `num / den` with common factors removed and `den` an integer primitive
/// polynomial whose graded-lex leading coefficient is positive.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct RatFunc {
    num: Poly2,
    den: Poly2,
}

impl Default for RatFunc {
    fn default() -> Self {
        Self::zero()
    }
}

impl RatFunc {
    pub fn zero() -> Self {
        RatFunc {
            num: Poly2::zero(),
            den: Poly2::one(),
        }
    }

    pub fn one() -> Self {
        Self::from_rat(Rat::one())
    }

    pub fn from_int(v: i64) -> Self {
        Self::from_rat(Rat::from_integer(v.into()))
    }

    pub fn from_rat(v: Rat) -> Self {
        RatFunc {
            num: Poly2::constant(v),
            den: Poly2::one(),
        }
    }

    pub fn from_poly(p: Poly2) -> Self {
        RatFunc {
            num: p,
            den: Poly2::one(),
        }
    }

    pub fn m() -> Self {
        Self::from_poly(Poly2::m())
    }

    pub fn n() -> Self {
        Self::from_poly(Poly2::n())
    }

    /// `1 / ((m - i)(n - j))`.
    pub fn basis(i: i64, j: i64) -> Self {
        Self::new(
            Poly2::one(),
            &Poly2::linear(true, i) * &Poly2::linear(false, j),
        )
        .expect("nonzero denominator")
    }

    pub fn new(num: Poly2, den: Poly2) -> Result<Self, ExactError> {
        if den.is_zero() {
            return Err(ExactError::DivisionByZero);
        }
        Ok(Self::reduce(num, den, true))
    }

    fn reduce(mut num: Poly2, mut den: Poly2, with_gcd: bool) -> Self {
        if num.is_zero() {
            return Self::zero();
        }
        if let Some(c) = den.as_constant() {
            return RatFunc {
                num: num.scale(&c.recip()),
                den: Poly2::one(),
            };
        }
        if with_gcd && num.as_constant().is_none() {
            let g = Poly2::gcd(&num, &den);
            if g.as_constant().is_none() {
                num = Poly2::exact_div(&num, &g);
                den = Poly2::exact_div(&den, &g);
            }
        }
        let f = den.primitive_factor();
        if !f.is_one() {
            num = num.scale(&f);
            den = den.scale(&f);
        }
        RatFunc { num, den }
    }

    pub fn numer(&self) -> &Poly2 {
        &self.num
    }

    pub fn denom(&self) -> &Poly2 {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.den.is_one() && self.num.is_one()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    pub fn as_constant(&self) -> Option<Rat> {
        if self.den.is_one() {
            self.num.as_constant()
        } else {
            None
        }
    }

    pub fn recip(&self) -> Result<Self, ExactError> {
        if self.is_zero() {
            return Err(ExactError::DivisionByZero);
        }
        Ok(Self::reduce(self.den.clone(), self.num.clone(), false))
    }

    pub fn checked_div(&self, rhs: &RatFunc) -> Result<Self, ExactError> {
        if rhs.is_zero() {
            return Err(ExactError::DivisionByZero);
        }
        Ok(self * &rhs.recip()?)
    }

    pub fn scale(&self, c: &Rat) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        RatFunc {
            num: self.num.scale(c),
            den: self.den.clone(),
        }
    }

    pub fn pow(&self, e: u32) -> Self {
        RatFunc {
            num: self.num.pow(e),
            den: self.den.pow(e),
        }
    }

    pub fn eval_at(&self, m0: &Rat, n0: &Rat) -> Result<Rat, ExactError> {
        let d = self.den.eval(m0, n0);
        if d.is_zero() {
            return Err(ExactError::Pole {
                m: m0.to_string(),
                n: n0.to_string(),
            });
        }
        Ok(self.num.eval(m0, n0) / d)
    }

    pub fn eval_int(&self, m0: i64, n0: i64) -> Result<Rat, ExactError> {
        self.eval_at(&Rat::from_integer(m0.into()), &Rat::from_integer(n0.into()))
    }

    /// `F(m0, n)` as a function of `n`.
    pub fn at_m(&self, m0: &Rat) -> Result<Self, ExactError> {
        Self::new(self.num.eval_m(m0), self.den.eval_m(m0))
    }

    /// `F(m + a, n + b)`; shifts preserve reducedness.
    pub fn shift(&self, a: i64, b: i64) -> Self {
        if a == 0 && b == 0 {
            return self.clone();
        }
        Self::reduce(self.num.shift(a, b), self.den.shift(a, b), false)
    }

    /// Renders as `N/(D)` with integer coefficients throughout.
    fn render(&self) -> String {
        let l = Rat::from_integer(self.num.denominator_lcm());
        let num = self.num.scale(&l);
        let den = self.den.scale(&l);
        let ns = num.to_string();
        if den.is_one() {
            return ns;
        }
        let ns = if num.len() > 1 { format!("({ns})") } else { ns };
        if let Some(c) = den.as_constant() {
            return format!("{ns}/{c}");
        }
        format!("{ns}/({den})")
    }
}

impl fmt::Display for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl std::str::FromStr for RatFunc {
    type Err = ExactError;
    fn from_str(s: &str) -> Result<Self, ExactError> {
        super::parse::parse(s)
    }
}

impl Add for &RatFunc {
    type Output = RatFunc;
    fn add(self, rhs: &RatFunc) -> RatFunc {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        if self.den == rhs.den {
            return RatFunc::reduce(&self.num + &rhs.num, self.den.clone(), true);
        }
        if rhs.den.is_one() {
            return RatFunc::reduce(&self.num + &(&rhs.num * &self.den), self.den.clone(), false);
        }
        if self.den.is_one() {
            return RatFunc::reduce(&(&self.num * &rhs.den) + &rhs.num, rhs.den.clone(), false);
        }
        let g = Poly2::gcd(&self.den, &rhs.den);
        if g.as_constant().is_some() {
            let num = &(&self.num * &rhs.den) + &(&rhs.num * &self.den);
            return RatFunc::reduce(num, &self.den * &rhs.den, false);
        }
        let d1 = Poly2::exact_div(&self.den, &g);
        let d2 = Poly2::exact_div(&rhs.den, &g);
        let num = &(&self.num * &d2) + &(&rhs.num * &d1);
        if num.is_zero() {
            return RatFunc::zero();
        }
        // Any factor shared by the new numerator and d1*d2*g already divides g.
        let h = Poly2::gcd(&num, &g);
        let (num, g) = if h.as_constant().is_some() {
            (num, g)
        } else {
            (Poly2::exact_div(&num, &h), Poly2::exact_div(&g, &h))
        };
        RatFunc::reduce(num, &(&d1 * &d2) * &g, false)
    }
}

impl Sub for &RatFunc {
    type Output = RatFunc;
    fn sub(self, rhs: &RatFunc) -> RatFunc {
        self + &(-rhs)
    }
}

impl Mul for &RatFunc {
    type Output = RatFunc;
    fn mul(self, rhs: &RatFunc) -> RatFunc {
        if self.is_zero() || rhs.is_zero() {
            return RatFunc::zero();
        }
        if let Some(c) = self.as_constant() {
            return rhs.scale(&c);
        }
        if let Some(c) = rhs.as_constant() {
            return self.scale(&c);
        }
        let (n1, d2) = cancel(&self.num, &rhs.den);
        let (n2, d1) = cancel(&rhs.num, &self.den);
        RatFunc::reduce(&n1 * &n2, &d1 * &d2, false)
    }
}

fn cancel(a: &Poly2, b: &Poly2) -> (Poly2, Poly2) {
    if b.is_one() || a.as_constant().is_some() {
        return (a.clone(), b.clone());
    }
    let g = Poly2::gcd(a, b);
    if g.as_constant().is_some() {
        (a.clone(), b.clone())
    } else {
        (Poly2::exact_div(a, &g), Poly2::exact_div(b, &g))
    }
}

impl Div for &RatFunc {
    type Output = RatFunc;
    fn div(self, rhs: &RatFunc) -> RatFunc {
        self.checked_div(rhs).expect("division by zero rational function")
    }
}

impl Neg for &RatFunc {
    type Output = RatFunc;
    fn neg(self) -> RatFunc {
        RatFunc {
            num: -&self.num,
            den: self.den.clone(),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $f:ident) => {
        impl $tr for RatFunc {
            type Output = RatFunc;
            fn $f(self, rhs: RatFunc) -> RatFunc {
                (&self).$f(&rhs)
            }
        }
        impl $tr<&RatFunc> for RatFunc {
            type Output = RatFunc;
            fn $f(self, rhs: &RatFunc) -> RatFunc {
                (&self).$f(rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl Neg for RatFunc {
    type Output = RatFunc;
    fn neg(self) -> RatFunc {
        -&self
    }
}

impl std::iter::Sum for RatFunc {
    fn sum<I: Iterator<Item = RatFunc>>(iter: I) -> RatFunc {
        iter.fold(RatFunc::zero(), |a, b| &a + &b)
    }
}
