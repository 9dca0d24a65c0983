use std::collections::BTreeMap;
use std::fmt;

use num_traits::One;
use thiserror::Error;

use super::{CoeffRing, Rational};

/// Hard cap on the number of terms generated by any power expansion.
const MAX_EXPANSION_STEPS: usize = 10_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SeriesError {
    #[error("incompatible series: {0}")]
    Incompatible(String),
    #[error("z-power {zpow} falls outside the window [{zmin}, {zmax}]")]
    ZWindow { zpow: i32, zmin: i32, zmax: i32 },
    #[error("exp requires zero constant term")]
    NonzeroConstant,
    #[error("log requires constant term 1")]
    ConstantNotOne,
    #[error("leading coefficient is not invertible")]
    NotInvertible,
    #[error("substitution for variable {var} has terms of too low order")]
    OrderLowered { var: usize },
    #[error("expansion did not terminate within {0} steps")]
    NoConvergence(usize),
    #[error("grading weights must be positive")]
    ZeroWeight,
}

/// `y^beta * y0^aux0 * z^zpow`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    pub beta: Vec<u32>,
    pub aux0: u32,
    pub zpow: i32,
}

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial { beta: vec![0; nvars], aux0: 0, zpow: 0 }
    }

    pub fn novikov(beta: Vec<u32>) -> Self {
        Monomial { beta, aux0: 0, zpow: 0 }
    }

    pub fn with_aux(mut self, aux0: u32) -> Self {
        self.aux0 = aux0;
        self
    }

    pub fn with_z(mut self, zpow: i32) -> Self {
        self.zpow = zpow;
        self
    }

    /// Variable-count-agnostic check for `beta == 0`.
    pub fn is_novikov_constant(&self) -> bool {
        self.aux0 == 0 && self.beta.iter().all(|&b| b == 0)
    }

    fn times(&self, other: &Monomial) -> Monomial {
        Monomial {
            beta: self.beta.iter().zip(&other.beta).map(|(a, b)| a + b).collect(),
            aux0: self.aux0 + other.aux0,
            zpow: self.zpow + other.zpow,
        }
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (i, &b) in self.beta.iter().enumerate() {
            match b {
                0 => {}
                1 => parts.push(format!("y{}", i + 1)),
                _ => parts.push(format!("y{}^{}", i + 1, b)),
            }
        }
        match self.aux0 {
            0 => {}
            1 => parts.push("y0".to_string()),
            n => parts.push(format!("y0^{n}")),
        }
        match self.zpow {
            0 => {}
            1 => parts.push("z".to_string()),
            n => parts.push(format!("z^{n}")),
        }
        if parts.is_empty() {
            write!(f, "1")
        } else {
            write!(f, "{}", parts.join("*"))
        }
    }
}

/// Truncation bounds of a series.
///
/// Novikov monomials are kept while `grade(beta) <= max_grade` (grade is a
/// positive weight vector, typically `beta -> D.beta` or total degree) and
/// `aux0 <= max_aux`. The `z` exponent is not truncated: `[zmin, zmax]` is a
/// capacity window and any nonzero term outside it is an error.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Truncation {
    weights: Vec<u32>,
    max_grade: u32,
    max_aux: u32,
    zmin: i32,
    zmax: i32,
}

impl Truncation {
    pub fn novikov(weights: Vec<u32>, max_grade: u32) -> Result<Self, SeriesError> {
        if weights.iter().any(|&w| w == 0) {
            return Err(SeriesError::ZeroWeight);
        }
        Ok(Truncation { weights, max_grade, max_aux: 0, zmin: 0, zmax: 0 })
    }

    pub fn total_degree(nvars: usize, order: u32) -> Self {
        Truncation { weights: vec![1; nvars], max_grade: order, max_aux: 0, zmin: 0, zmax: 0 }
    }

    /// Pure Laurent polynomials in `z` (no Novikov variables).
    pub fn laurent(zmin: i32, zmax: i32) -> Self {
        Truncation { weights: Vec::new(), max_grade: 0, max_aux: 0, zmin, zmax }
    }

    pub fn with_max_aux(mut self, max_aux: u32) -> Self {
        self.max_aux = max_aux;
        self
    }

    pub fn with_zwindow(mut self, zmin: i32, zmax: i32) -> Self {
        self.zmin = zmin;
        self.zmax = zmax;
        self
    }

    pub fn with_max_grade(mut self, max_grade: u32) -> Self {
        self.max_grade = max_grade;
        self
    }

    pub fn nvars(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[u32] {
        &self.weights
    }

    pub fn max_grade(&self) -> u32 {
        self.max_grade
    }

    pub fn max_aux(&self) -> u32 {
        self.max_aux
    }

    pub fn zwindow(&self) -> (i32, i32) {
        (self.zmin, self.zmax)
    }

    pub fn grade(&self, beta: &[u32]) -> u64 {
        beta.iter().zip(&self.weights).map(|(&b, &w)| u64::from(b) * u64::from(w)).sum()
    }

    pub fn admits(&self, m: &Monomial) -> bool {
        m.aux0 <= self.max_aux && self.grade(&m.beta) <= u64::from(self.max_grade)
    }

    fn check_window(&self, m: &Monomial) -> Result<(), SeriesError> {
        if m.zpow < self.zmin || m.zpow > self.zmax {
            Err(SeriesError::ZWindow { zpow: m.zpow, zmin: self.zmin, zmax: self.zmax })
        } else {
            Ok(())
        }
    }

    /// Minimum of the Novikov bounds, hull of the z windows.
    pub fn meet(&self, other: &Truncation) -> Result<Truncation, SeriesError> {
        if self.weights != other.weights {
            return Err(SeriesError::Incompatible(format!(
                "grading weights {:?} vs {:?}",
                self.weights, other.weights
            )));
        }
        Ok(Truncation {
            weights: self.weights.clone(),
            max_grade: self.max_grade.min(other.max_grade),
            max_aux: self.max_aux.min(other.max_aux),
            zmin: self.zmin.min(other.zmin),
            zmax: self.zmax.max(other.zmax),
        })
    }
}

/// Sparse truncated series with coefficients in `R`.
///
/// Invariants: every stored monomial is admitted by the truncation and lies
/// in the z window; no stored coefficient is zero.
#[derive(Clone)]
pub struct TruncSeries<R: CoeffRing> {
    ring: R,
    trunc: Truncation,
    terms: BTreeMap<Monomial, R::Elem>,
}

impl<R: CoeffRing> fmt::Debug for TruncSeries<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TruncSeries")
            .field("ring", &self.ring.describe())
            .field("trunc", &self.trunc)
            .field("terms", &self.terms)
            .finish()
    }
}

impl<R: CoeffRing> PartialEq for TruncSeries<R> {
    fn eq(&self, other: &Self) -> bool {
        self.ring.same_ring(&other.ring) && self.trunc == other.trunc && self.terms == other.terms
    }
}

impl<R: CoeffRing> TruncSeries<R> {
    pub fn zero(ring: R, trunc: Truncation) -> Self {
        TruncSeries { ring, trunc, terms: BTreeMap::new() }
    }

    pub fn one(ring: R, trunc: Truncation) -> Self {
        let one = ring.one();
        Self::constant(ring, trunc, one)
    }

    pub fn constant(ring: R, trunc: Truncation, c: R::Elem) -> Self {
        let mut s = Self::zero(ring, trunc);
        let m = Monomial::one(s.trunc.nvars());
        s.insert_unchecked(m, c);
        s
    }

    /// Builds a series from terms; inadmissible monomials are dropped and
    /// terms outside the z window are an error.
    pub fn from_terms(
        ring: R,
        trunc: Truncation,
        terms: impl IntoIterator<Item = (Monomial, R::Elem)>,
    ) -> Result<Self, SeriesError> {
        let mut acc: BTreeMap<Monomial, R::Elem> = BTreeMap::new();
        for (m, c) in terms {
            if m.beta.len() != trunc.nvars() {
                return Err(SeriesError::Incompatible(format!(
                    "monomial has {} variables, truncation has {}",
                    m.beta.len(),
                    trunc.nvars()
                )));
            }
            if !trunc.admits(&m) {
                continue;
            }
            match acc.get_mut(&m) {
                Some(v) => *v = ring.add(v, &c),
                None => {
                    acc.insert(m, c);
                }
            }
        }
        let mut s = Self::zero(ring, trunc);
        for (m, c) in acc {
            if !s.ring.is_zero(&c) {
                s.trunc.check_window(&m)?;
                s.terms.insert(m, c);
            }
        }
        Ok(s)
    }

    /// `c * y^beta y0^aux z^zpow`, or zero if truncated away.
    pub fn monomial(ring: R, trunc: Truncation, m: Monomial, c: R::Elem) -> Result<Self, SeriesError> {
        Self::from_terms(ring, trunc, [(m, c)])
    }

    /// The Novikov variable `y_var`.
    pub fn variable(ring: R, trunc: Truncation, var: usize) -> Result<Self, SeriesError> {
        let mut beta = vec![0; trunc.nvars()];
        beta[var] = 1;
        let one = ring.one();
        Self::monomial(ring, trunc, Monomial::novikov(beta), one)
    }

    fn insert_unchecked(&mut self, m: Monomial, c: R::Elem) {
        if self.trunc.admits(&m) && !self.ring.is_zero(&c) {
            self.terms.insert(m, c);
        }
    }

    pub fn ring(&self) -> &R {
        &self.ring
    }

    pub fn truncation(&self) -> &Truncation {
        &self.trunc
    }

    pub fn nvars(&self) -> usize {
        self.trunc.nvars()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &R::Elem)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &Monomial) -> R::Elem {
        self.terms.get(m).cloned().unwrap_or_else(|| self.ring.zero())
    }

    /// Coefficient of the Novikov monomial `y^beta` (aux0 = 0, z^0).
    pub fn coeff_beta(&self, beta: &[u32]) -> R::Elem {
        self.coeff(&Monomial::novikov(beta.to_vec()))
    }

    /// Coefficient of `z^zpow` in a series without Novikov dependence.
    pub fn coeff_z(&self, zpow: i32) -> R::Elem {
        self.coeff(&Monomial::one(self.nvars()).with_z(zpow))
    }

    pub fn constant_term(&self) -> R::Elem {
        self.coeff(&Monomial::one(self.nvars()))
    }

    pub fn max_zpow(&self) -> Option<i32> {
        self.terms.keys().map(|m| m.zpow).max()
    }

    pub fn min_zpow(&self) -> Option<i32> {
        self.terms.keys().map(|m| m.zpow).min()
    }

    fn check_compatible(&self, other: &Self) -> Result<Truncation, SeriesError> {
        if !self.ring.same_ring(&other.ring) {
            return Err(SeriesError::Incompatible(format!(
                "coefficient rings {} and {}",
                self.ring.describe(),
                other.ring.describe()
            )));
        }
        self.trunc.meet(&other.trunc)
    }

    fn finish(ring: R, trunc: Truncation, acc: BTreeMap<Monomial, R::Elem>) -> Result<Self, SeriesError> {
        let mut terms = BTreeMap::new();
        for (m, c) in acc {
            if ring.is_zero(&c) || !trunc.admits(&m) {
                continue;
            }
            trunc.check_window(&m)?;
            terms.insert(m, c);
        }
        Ok(TruncSeries { ring, trunc, terms })
    }

    pub fn add(&self, other: &Self) -> Result<Self, SeriesError> {
        let trunc = self.check_compatible(other)?;
        let mut acc = self.terms.clone();
        for (m, c) in &other.terms {
            match acc.get_mut(m) {
                Some(v) => *v = self.ring.add(v, c),
                None => {
                    acc.insert(m.clone(), c.clone());
                }
            }
        }
        Self::finish(self.ring.clone(), trunc, acc)
    }

    pub fn neg(&self) -> Self {
        let terms = self.terms.iter().map(|(m, c)| (m.clone(), self.ring.neg(c))).collect();
        TruncSeries { ring: self.ring.clone(), trunc: self.trunc.clone(), terms }
    }

    pub fn sub(&self, other: &Self) -> Result<Self, SeriesError> {
        self.add(&other.neg())
    }

    pub fn scale(&self, r: &Rational) -> Self {
        self.mul_elem(&self.ring.from_scalar(r))
    }

    pub fn mul_elem(&self, c: &R::Elem) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(m, v)| (m.clone(), self.ring.mul(v, c)))
            .filter(|(_, v)| !self.ring.is_zero(v))
            .collect();
        TruncSeries { ring: self.ring.clone(), trunc: self.trunc.clone(), terms }
    }

    /// Multiplies by `z^shift`.
    pub fn shift_z(&self, shift: i32) -> Result<Self, SeriesError> {
        let terms = self.terms.iter().map(|(m, c)| (m.clone().with_z(m.zpow + shift), c.clone()));
        Self::from_terms(self.ring.clone(), self.trunc.clone(), terms)
    }

    /// Truncated Cauchy product.
    pub fn mul(&self, other: &Self) -> Result<Self, SeriesError> {
        let trunc = self.check_compatible(other)?;
        let mut acc: BTreeMap<Monomial, R::Elem> = BTreeMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let m = ma.times(mb);
                if !trunc.admits(&m) {
                    continue;
                }
                let prod = self.ring.mul(ca, cb);
                match acc.get_mut(&m) {
                    Some(v) => *v = self.ring.add(v, &prod),
                    None => {
                        acc.insert(m, prod);
                    }
                }
            }
        }
        Self::finish(self.ring.clone(), trunc, acc)
    }

    pub fn pow(&self, k: u32) -> Result<Self, SeriesError> {
        let mut acc = Self::one(self.ring.clone(), self.trunc.clone());
        for _ in 0..k {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// Re-truncates to tighter bounds (the z window is kept as is).
    pub fn truncate_to(&self, trunc: &Truncation) -> Result<Self, SeriesError> {
        let target = self.trunc.meet(trunc)?;
        Self::finish(self.ring.clone(), target, self.terms.clone())
    }

    /// Applies `f` to every term; `f` returns the new coefficient or `None`
    /// to drop the term.
    pub fn map_terms(&self, f: impl Fn(&Monomial, &R::Elem) -> Option<R::Elem>) -> Self {
        let terms = self
            .terms
            .iter()
            .filter_map(|(m, c)| f(m, c).map(|v| (m.clone(), v)))
            .filter(|(_, v)| !self.ring.is_zero(v))
            .collect();
        TruncSeries { ring: self.ring.clone(), trunc: self.trunc.clone(), terms }
    }

    /// Moves the series to another coefficient ring via `f`, keeping the
    /// truncation.
    pub fn map_ring<S: CoeffRing>(
        &self,
        ring: S,
        f: impl Fn(&R::Elem) -> S::Elem,
    ) -> TruncSeries<S> {
        let terms = self
            .terms
            .iter()
            .map(|(m, c)| (m.clone(), f(c)))
            .filter(|(_, c)| !ring.is_zero(c))
            .collect();
        TruncSeries { ring, trunc: self.trunc.clone(), terms }
    }

    /// Sums `sum_k coeff_k * a^k` for k >= 1, stopping once `a^k` vanishes.
    /// `next_coeff(k, previous)` yields `coeff_k` from `coeff_{k-1}`.
    fn power_sum(
        &self,
        next_coeff: impl Fn(usize, &Rational) -> Rational,
    ) -> Result<Self, SeriesError> {
        let mut acc = Self::zero(self.ring.clone(), self.trunc.clone());
        let mut power = Self::one(self.ring.clone(), self.trunc.clone());
        let mut coeff = Rational::one();
        for k in 1..=MAX_EXPANSION_STEPS {
            power = power.mul(self)?;
            if power.is_zero() {
                return Ok(acc);
            }
            coeff = next_coeff(k, &coeff);
            acc = acc.add(&power.scale(&coeff))?;
        }
        Err(SeriesError::NoConvergence(MAX_EXPANSION_STEPS))
    }

    pub fn exp(&self) -> Result<Self, SeriesError> {
        if !self.ring.is_zero(&self.constant_term()) {
            return Err(SeriesError::NonzeroConstant);
        }
        let tail = self.power_sum(|k, prev| prev / Rational::from_integer(k.into()))?;
        tail.add(&Self::one(self.ring.clone(), self.trunc.clone()))
    }

    pub fn log(&self) -> Result<Self, SeriesError> {
        if self.constant_term() != self.ring.one() {
            return Err(SeriesError::ConstantNotOne);
        }
        let shifted = self.sub(&Self::one(self.ring.clone(), self.trunc.clone()))?;
        shifted.power_sum(|k, _| {
            let v = Rational::from_integer(k.into()).recip();
            if k % 2 == 1 {
                v
            } else {
                -v
            }
        })
    }

    /// Multiplicative inverse.
    ///
    /// The leading term is the highest z-power among the terms free of
    /// Novikov and auxiliary variables; its coefficient must be a unit.
    /// Writing `a = L z^m (1 + e)`, the result is `L^-1 z^-m sum (-e)^k`.
    pub fn inverse(&self) -> Result<Self, SeriesError> {
        let (lead_m, lead_c) = self
            .terms
            .iter()
            .filter(|(m, _)| m.is_novikov_constant())
            .max_by_key(|(m, _)| m.zpow)
            .ok_or(SeriesError::NotInvertible)?;
        let m = lead_m.zpow;
        let lead_inv = self.ring.inverse(lead_c).ok_or(SeriesError::NotInvertible)?;
        let (zmin, zmax) = self.trunc.zwindow();
        let span = (zmax - zmin).max(0) + m.abs();
        let work = self.trunc.clone().with_zwindow(zmin - span, zmax + span);
        let widened = TruncSeries { trunc: work.clone(), ..self.clone() };
        let normalized = widened.mul_elem(&lead_inv).shift_z(-m)?;
        let eps = normalized.sub(&Self::one(self.ring.clone(), work.clone()))?;
        let neg_eps = eps.neg();
        let mut acc = Self::one(self.ring.clone(), work.clone());
        let mut power = Self::one(self.ring.clone(), work);
        let mut done = false;
        for _ in 0..MAX_EXPANSION_STEPS {
            power = power.mul(&neg_eps)?;
            if power.is_zero() {
                done = true;
                break;
            }
            acc = acc.add(&power)?;
        }
        if !done {
            return Err(SeriesError::NoConvergence(MAX_EXPANSION_STEPS));
        }
        let result = acc.mul_elem(&lead_inv).shift_z(-m)?;
        Self::from_terms(self.ring.clone(), self.trunc.clone(), result.terms)
    }

    /// Formal composition `y_i -> assignment[i]`.
    ///
    /// Each substituted series must contain only terms of grade at least the
    /// weight of the variable it replaces, so truncation stays sound.
    pub fn substitute(&self, assignment: &[Self]) -> Result<Self, SeriesError> {
        if assignment.len() != self.nvars() {
            return Err(SeriesError::Incompatible(format!(
                "substitution for {} variables, series has {}",
                assignment.len(),
                self.nvars()
            )));
        }
        let mut trunc = self.trunc.clone();
        for (var, s) in assignment.iter().enumerate() {
            trunc = self.check_compatible(s).and_then(|t| t.meet(&trunc))?;
            let weight = u64::from(self.trunc.weights()[var]);
            if s.terms.keys().any(|m| m.aux0 == 0 && s.trunc.grade(&m.beta) < weight) {
                return Err(SeriesError::OrderLowered { var });
            }
        }
        let mut powers: Vec<Vec<Self>> = assignment
            .iter()
            .map(|_| vec![Self::one(self.ring.clone(), trunc.clone())])
            .collect();
        let mut acc = Self::zero(self.ring.clone(), trunc.clone());
        for (m, c) in &self.terms {
            let rest = Monomial::one(self.nvars()).with_aux(m.aux0).with_z(m.zpow);
            let mut term = Self::monomial(self.ring.clone(), trunc.clone(), rest, c.clone())?;
            for (var, &e) in m.beta.iter().enumerate() {
                let e = e as usize;
                while powers[var].len() <= e {
                    let next = powers[var].last().expect("nonempty").mul(&assignment[var])?;
                    powers[var].push(next);
                }
                term = term.mul(&powers[var][e])?;
                if term.is_zero() {
                    break;
                }
            }
            acc = acc.add(&term)?;
        }
        Ok(acc)
    }
}

impl<R: CoeffRing> fmt::Display for TruncSeries<R>
where
    R::Elem: fmt::Display,
{
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> =
            self.terms.iter().map(|(m, c)| format!("({c})*{m}")).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactmath::rational::{frac, int};
    use crate::exactmath::Rationals;

    type S = TruncSeries<Rationals>;

    fn poly(order: u32, coeffs: &[i64]) -> S {
        let t = Truncation::total_degree(1, order);
        S::from_terms(
            Rationals,
            t,
            coeffs.iter().enumerate().map(|(k, &c)| (Monomial::novikov(vec![k as u32]), int(c))),
        )
        .unwrap()
    }

    fn coeffs(s: &S, order: u32) -> Vec<Rational> {
        (0..=order).map(|k| s.coeff_beta(&[k])).collect()
    }

    #[test]
    fn add_cancels_and_truncates() {
        let a = poly(3, &[1, 1]);
        let b = poly(3, &[1, -1]);
        assert_eq!(a.add(&b).unwrap(), poly(3, &[2]));
        assert_eq!(S::zero(Rationals, Truncation::total_degree(1, 3)).add(&a).unwrap(), a);
        let two_y = poly(3, &[0, 2]);
        let five_y3 = poly(2, &[0, 0, 0, 5]);
        assert_eq!(two_y.add(&five_y3).unwrap(), poly(2, &[0, 2]));
    }

    #[test]
    fn mul_examples() {
        assert_eq!(poly(4, &[1, 1]).mul(&poly(4, &[1, -1])).unwrap(), poly(4, &[1, 0, -1]));
        let s = poly(4, &[3, 0, 7]);
        assert_eq!(s.mul(&poly(4, &[1])).unwrap(), s);
        let p = poly(2, &[1, 2]).mul(&poly(2, &[1, 2, 2])).unwrap();
        assert_eq!(coeffs(&p, 2), vec![int(1), int(4), int(6)]);
    }

    #[test]
    fn exp_and_log_examples() {
        let zero = poly(3, &[]);
        assert_eq!(zero.exp().unwrap(), poly(3, &[1]));
        assert_eq!(poly(2, &[0, 2]).exp().unwrap(), poly(2, &[1, 2, 2]));
        let one_plus_y = poly(5, &[1, 1]);
        assert_eq!(one_plus_y.log().unwrap().exp().unwrap(), one_plus_y);
        assert_eq!(poly(3, &[1]).log().unwrap(), zero);
        assert_eq!(poly(4, &[0, 3]).exp().unwrap().log().unwrap(), poly(4, &[0, 3]));
        let l = poly(3, &[1, 1]).log().unwrap();
        assert_eq!(coeffs(&l, 3), vec![int(0), int(1), frac(-1, 2), frac(1, 3)]);
        assert_eq!(poly(3, &[1, 1]).exp(), Err(SeriesError::NonzeroConstant));
        assert_eq!(poly(3, &[2, 1]).log(), Err(SeriesError::ConstantNotOne));
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(poly(3, &[1]).inverse().unwrap(), poly(3, &[1]));
        assert_eq!(poly(3, &[1, -1]).inverse().unwrap(), poly(3, &[1, 1, 1, 1]));
        assert_eq!(poly(3, &[0, 1]).inverse(), Err(SeriesError::NotInvertible));
    }

    #[test]
    fn scalar_laurent_inverse_leaves_window() {
        // 1/(z + 1) has infinitely many negative z-powers over Q
        let t = Truncation::laurent(-4, 1);
        let s = S::from_terms(
            Rationals,
            t,
            [(Monomial::one(0).with_z(1), int(1)), (Monomial::one(0), int(1))],
        )
        .unwrap();
        assert!(matches!(s.inverse(), Err(SeriesError::ZWindow { .. })));
    }

    #[test]
    fn substitute_examples() {
        let s = poly(3, &[1, 2, 3]);
        let q = poly(3, &[0, 1]);
        assert_eq!(s.substitute(&[q]).unwrap(), s);
        let two_y = poly(2, &[0, 2]);
        let shifted = poly(2, &[0, 1, -6]);
        assert_eq!(two_y.substitute(&[shifted]).unwrap(), poly(2, &[0, 2, -12]));
        let zero = poly(3, &[]);
        assert_eq!(s.substitute(&[zero]).unwrap(), poly(3, &[1]));
        assert_eq!(
            s.substitute(&[poly(3, &[1, 1])]),
            Err(SeriesError::OrderLowered { var: 0 })
        );
    }

    #[test]
    fn incompatible_gradings_are_rejected() {
        let a = poly(3, &[1]);
        let b = S::one(Rationals, Truncation::novikov(vec![3], 3).unwrap());
        assert!(matches!(a.add(&b), Err(SeriesError::Incompatible(_))));
        assert_eq!(Truncation::novikov(vec![0, 1], 3), Err(SeriesError::ZeroWeight));
    }
}
