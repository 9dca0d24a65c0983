//! Exact arithmetic: rational scalars, coefficient rings, and sparse
//! multivariate truncated power series in Novikov variables with an
//! auxiliary variable (`y0`/`q0`) and a Laurent variable `z`.

pub mod linalg;
pub mod rational;
mod series;

use std::fmt;

use num_traits::{One, Zero};

pub use rational::{format_rational, parse_rational, ParseRationalError, Rational};
pub use series::{Monomial, SeriesError, Truncation, TruncSeries};

/// A commutative coefficient ring of the form `Q * 1 + (nilpotent ideal)`.
///
/// Both the rationals and the cohomology rings used by the pipeline have
/// this shape, which is what makes geometric-series inversion of units
/// terminate.
pub trait CoeffRing: Clone + fmt::Debug {
    type Elem: Clone + fmt::Debug + PartialEq;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn scale(&self, a: &Self::Elem, r: &Rational) -> Self::Elem;
    /// Coordinate of `a` on the unit.
    fn scalar_part(&self, a: &Self::Elem) -> Rational;
    /// Every element with zero scalar part vanishes at this power.
    fn nilpotency_index(&self) -> usize;
    fn same_ring(&self, other: &Self) -> bool;
    fn describe(&self) -> String;

    fn from_scalar(&self, r: &Rational) -> Self::Elem {
        self.scale(&self.one(), r)
    }

    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        self.add(a, &self.neg(b))
    }

    /// Inverse of `c * (1 + n)` with `n` nilpotent, as `c^-1 * sum (-n)^k`.
    fn inverse(&self, a: &Self::Elem) -> Option<Self::Elem> {
        let c = self.scalar_part(a);
        if c.is_zero() {
            return None;
        }
        let c_inv = c.recip();
        let unit = self.scale(a, &c_inv);
        let minus_n = self.neg(&self.sub(&unit, &self.one()));
        let mut acc = self.one();
        let mut power = self.one();
        for _ in 1..self.nilpotency_index() {
            power = self.mul(&power, &minus_n);
            if self.is_zero(&power) {
                break;
            }
            acc = self.add(&acc, &power);
        }
        Some(self.scale(&acc, &c_inv))
    }
}

/// The field of rationals as a coefficient ring.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Rationals;

impl CoeffRing for Rationals {
    type Elem = Rational;

    fn zero(&self) -> Rational {
        Rational::zero()
    }
    fn one(&self) -> Rational {
        Rational::one()
    }
    fn is_zero(&self, a: &Rational) -> bool {
        a.is_zero()
    }
    fn add(&self, a: &Rational, b: &Rational) -> Rational {
        a + b
    }
    fn neg(&self, a: &Rational) -> Rational {
        -a
    }
    fn mul(&self, a: &Rational, b: &Rational) -> Rational {
        a * b
    }
    fn scale(&self, a: &Rational, r: &Rational) -> Rational {
        a * r
    }
    fn scalar_part(&self, a: &Rational) -> Rational {
        a.clone()
    }
    fn nilpotency_index(&self) -> usize {
        1
    }
    fn same_ring(&self, _other: &Self) -> bool {
        true
    }
    fn describe(&self) -> String {
        "Q".to_string()
    }
}
