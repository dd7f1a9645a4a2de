//! Exact arithmetic: rationals, polynomials and rational functions in the
//! dimension symbols m and n.

mod btriangle;
mod parse;
mod poly;
mod ratfunc;
mod upoly;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

pub use btriangle::{to_btriangle, BTriangle};
pub use parse::parse;
pub use poly::{grlex, Exponent, Poly2};
pub use ratfunc::RatFunc;

pub type Rat = num_rational::BigRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExactError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("pole at m = {m}, n = {n}")]
    Pole { m: String, n: String },
    #[error("pole of order two or more at {symbol} = {at}")]
    HigherOrderPole { symbol: char, at: i64 },
    #[error("parse error: {0}")]
    Parse(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Symbol {
    M,
    N,
}

pub fn rat(v: i64) -> Rat {
    Rat::from_integer(v.into())
}

pub fn ratio(a: i64, b: i64) -> Rat {
    Rat::new(a.into(), b.into())
}

pub fn to_f64(r: &Rat) -> f64 {
    num_traits::ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
}

/// Integer binomial coefficient, zero outside `0 <= k <= n`.
pub fn binom(n: i64, k: i64) -> BigInt {
    if k < 0 || n < 0 || k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for t in 0..k {
        acc = acc * BigInt::from(n - t) / BigInt::from(t + 1);
    }
    acc
}

/// `x (x-1) ... (x-i+1) / i!` for the symbol x.
pub fn binom_poly(sym: Symbol, i: u32) -> RatFunc {
    let mut p = Poly2::one();
    for t in 0..i {
        p = &p * &Poly2::linear(sym == Symbol::M, t as i64);
    }
    let fact: BigInt = (1..=i).map(BigInt::from).product();
    RatFunc::from_poly(p.scale(&Rat::new(BigInt::one(), fact)))
}

pub fn eval_at(f: &RatFunc, m0: &Rat, n0: &Rat) -> Result<Rat, ExactError> {
    f.eval_at(m0, n0)
}

/// Checks `sum_i (-1)^i C(r,i)/(m0-i) = (-1)^r / (m0 C(m0-1, r))`.
pub fn lemma_sum_check(m0: i64, r: i64) -> bool {
    assert!(1 <= r && r < m0, "requires 1 <= r < m0");
    let lhs: Rat = (0..=r)
        .map(|i| {
            let sign = if i % 2 == 0 { 1 } else { -1 };
            Rat::new(binom(r, i) * sign, BigInt::from(m0 - i))
        })
        .sum();
    let sign = if r % 2 == 0 { 1 } else { -1 };
    let rhs = Rat::new(BigInt::from(sign), binom(m0 - 1, r) * m0);
    lhs == rhs
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(s: &str) -> RatFunc {
        s.parse().unwrap()
    }

    #[test]
    fn like_terms_combine() {
        assert_eq!(&p("1/(m*n)") + &p("1/(m*n)"), p("2/(m*n)"));
    }

    #[test]
    fn cancellation_to_one() {
        assert!(p("(m-1)/(m-1)").is_one());
    }

    #[test]
    fn two_by_one_zero_value() {
        let v = &(&p("1/((m-1)*n)") + &p("1/(m*(n-1))")) - &p("1/(m*n)");
        assert_eq!(v.eval_int(2, 2).unwrap(), ratio(3, 4));
        assert_eq!(v.to_string(), "(m*n - 1)/(m^2*n^2 - m^2*n - m*n^2 + m*n)");
    }

    #[test]
    fn binom_poly_examples() {
        assert!(binom_poly(Symbol::M, 0).is_one());
        assert_eq!(binom_poly(Symbol::M, 2), p("(m^2 - m)/2"));
        assert_eq!(binom_poly(Symbol::N, 3), p("(n^3 - 3*n^2 + 2*n)/6"));
    }

    #[test]
    fn binom_poly_matches_integers() {
        for i in 0..7u32 {
            let b = binom_poly(Symbol::M, i);
            for m0 in i as i64..15 {
                assert_eq!(b.eval_int(m0, 0).unwrap(), Rat::from_integer(binom(m0, i as i64)));
            }
        }
    }

    #[test]
    fn lemma_sum_examples() {
        assert!(lemma_sum_check(3, 1));
        assert!(lemma_sum_check(2, 1));
        assert!(lemma_sum_check(10, 4));
    }

    #[test]
    fn lemma_sum_exhaustive() {
        for m0 in 2..=25 {
            for r in 1..m0 {
                assert!(lemma_sum_check(m0, r), "m0={m0} r={r}");
            }
        }
    }

    #[test]
    fn eval_examples() {
        assert_eq!(p("1/(m*n)").eval_int(3, 4).unwrap(), ratio(1, 12));
        let resid = p("1/((m-2)*(2*m*n-5*n-1))");
        assert_eq!(resid.eval_int(4, 5).unwrap(), ratio(1, 28));
        assert!(matches!(resid.eval_int(2, 5), Err(ExactError::Pole { .. })));
    }

    #[test]
    fn btriangle_two_by_two() {
        let f = &(&p("-1/(m*n)") + &p("1/((m-1)*n)")) + &p("1/(m*(n-1))");
        let t = to_btriangle(&f, 2).unwrap();
        assert_eq!(t.get(0, 0), rat(-1));
        assert_eq!(t.get(0, 1), rat(1));
        assert_eq!(t.get(1, 0), rat(1));
        assert!(t.residual.is_zero());
        assert_eq!(t.reconstruct(), f);
    }

    #[test]
    fn btriangle_of_zero() {
        let t = to_btriangle(&RatFunc::zero(), 3).unwrap();
        assert!(t.coeffs.values().all(|b| b.is_zero()));
        assert!(t.residual.is_zero());
    }

    #[test]
    fn btriangle_keeps_residual_term() {
        let resid = p("1/((m-2)*(2*m*n-5*n-1))");
        let f = &(&p("1/(m*(n-3))") - &p("1/((m-1)*(n-1))")) + &resid;
        let t = to_btriangle(&f, 4).unwrap();
        assert_eq!(t.get(0, 3), rat(1));
        assert_eq!(t.get(1, 1), rat(-1));
        assert_eq!(t.residual, resid);
    }

    #[test]
    fn btriangle_rejects_double_pole() {
        let f = p("1/((m-1)^2*n)");
        assert!(matches!(to_btriangle(&f, 3), Err(ExactError::HigherOrderPole { .. })));
    }

    #[test]
    fn btriangle_double_pole_in_n() {
        let extra = p("1/((m-2)*n*(2*m*n - 2*m - 5*n + 4))");
        let f = &extra + &(&RatFunc::basis(0, 1) - &RatFunc::basis(2, 0));
        let t = to_btriangle(&f, 3).unwrap();
        assert_eq!(t.get(0, 1), rat(1));
        assert_eq!(t.get(2, 0), rat(-1));
        assert_eq!(t.residual, extra);
        assert_eq!(t.reconstruct(), f);
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(parse("m +").is_err());
        assert!(parse("1/(m-m)").is_err());
        assert!(parse("2x").is_err());
    }

    #[test]
    fn unary_minus() {
        assert_eq!(p("-(1/2)*m + -n"), p("(-m - 2*n)/2"));
        assert_eq!(p("-m^2"), -p("m^2"));
    }

    fn small_poly() -> impl Strategy<Value = RatFunc> {
        proptest::collection::vec((-4i64..5, 0u32..3, 0u32..3), 1..4).prop_map(|ts| {
            let p = Poly2::from_terms(ts.into_iter().map(|(c, a, b)| ((a, b), rat(c))));
            RatFunc::from_poly(p)
        })
    }

    fn small_ratfunc() -> impl Strategy<Value = RatFunc> {
        (small_poly(), small_poly()).prop_filter_map("nonzero den", |(a, b)| {
            if b.is_zero() {
                None
            } else {
                Some(&a / &b)
            }
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn add_sub_round_trip(a in small_ratfunc(), b in small_ratfunc()) {
            prop_assert_eq!(&(&a + &b) - &b, a);
        }

        #[test]
        fn mul_div_round_trip(a in small_ratfunc(), b in small_ratfunc()) {
            prop_assume!(!b.is_zero());
            prop_assert_eq!(&(&a * &b) / &b, a);
        }

        #[test]
        fn normalization_is_canonical(a in small_ratfunc(), b in small_ratfunc(), c in small_ratfunc()) {
            let left = &(&a + &b) * &c;
            let right = &(&a * &c) + &(&b * &c);
            prop_assert_eq!(left, right);
        }

        #[test]
        fn print_parse_round_trip(a in small_ratfunc()) {
            prop_assert_eq!(parse(&a.to_string()).unwrap(), a);
        }

        #[test]
        fn shift_agrees_with_evaluation(a in small_ratfunc(), x in -3i64..4, y in -3i64..4) {
            let s = a.shift(x, y);
            let lhs = s.eval_int(7, 11);
            let rhs = a.eval_int(7 + x, 11 + y);
            prop_assert_eq!(lhs.ok(), rhs.ok());
        }
    }
}
