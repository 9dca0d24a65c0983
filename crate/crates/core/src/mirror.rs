//! The series `g`, the mirror map and its inverse, the theta potential
//! `x W = exp(g(y(q)))`, and the two-point invariants it encodes.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::Zero;
use thiserror::Error;

use crate::exactmath::rational::{factorial, int, sign};
use crate::exactmath::{Monomial, Rational, Rationals, SeriesError, TruncSeries, Truncation};
use crate::geometry::{CurveClass, TargetGeometry};
use crate::givental::{self, GiventalError};

pub type Series = TruncSeries<Rationals>;

#[derive(Debug, Error)]
pub enum MirrorError {
    #[error("order too small: need order >= 1, got {0}")]
    OrderTooSmall(u32),
    #[error(transparent)]
    Givental(#[from] GiventalError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error("mirror map inversion did not stabilize within {0} iterations")]
    NoConvergence(usize),
    #[error("mirror map round trip failed for variable {var}: {detail}")]
    RoundTrip { var: usize, detail: String },
    #[error("sign conventions disagree at {beta}: display {display} vs substitution {substituted}")]
    SignConvention { beta: CurveClass, display: Rational, substituted: Rational },
}

/// Truncation used by every stage: total curve degree `<= order`.
pub fn novikov_truncation(x: &TargetGeometry, order: u32) -> Truncation {
    Truncation::total_degree(x.rank(), order)
}

fn class_of(m: &Monomial) -> CurveClass {
    CurveClass::from_exponents(&m.beta)
}

/// `g(y) = sum <[pt] psi^{D.beta-2}>_beta (D.beta-1)! y^beta`.
#[derive(Debug, Clone)]
pub struct GSeries {
    pub series: Series,
    pub geometry: Arc<TargetGeometry>,
    pub order: u32,
}

impl GSeries {
    pub fn coeff(&self, beta: &CurveClass) -> Rational {
        beta.exponents().map_or_else(Rational::zero, |e| self.series.coeff_beta(&e))
    }

    /// Nonzero coefficients ordered by class.
    pub fn coefficients(&self) -> BTreeMap<CurveClass, Rational> {
        self.series.terms().map(|(m, c)| (class_of(m), c.clone())).collect()
    }

    /// Rebuilds `g` from stored coefficients (e.g. a cache entry).
    pub fn from_coefficients(
        x: &Arc<TargetGeometry>,
        order: u32,
        coefficients: &BTreeMap<CurveClass, Rational>,
    ) -> Result<Self, MirrorError> {
        let mut terms = Vec::with_capacity(coefficients.len());
        for (beta, c) in coefficients {
            let exps = beta
                .exponents()
                .filter(|e| e.len() == x.rank())
                .ok_or_else(|| SeriesError::Incompatible(format!("class {beta} does not fit the geometry")))?;
            terms.push((Monomial::novikov(exps), c.clone()));
        }
        let series = TruncSeries::from_terms(Rationals, novikov_truncation(x, order), terms)?;
        Ok(GSeries { series, geometry: x.clone(), order })
    }
}

pub fn compute_g(x: &Arc<TargetGeometry>, order: u32) -> Result<GSeries, MirrorError> {
    if order < 1 {
        return Err(MirrorError::OrderTooSmall(order));
    }
    let trunc = novikov_truncation(x, order);
    let mut terms = Vec::new();
    for beta in CurveClass::nonzero_effective_up_to(x.rank(), order) {
        let d = x.d_degree(&beta);
        if d < 2 {
            continue;
        }
        let value = givental::one_point_descendant(x, &beta)? * factorial((d - 1) as u64);
        let exps = beta.exponents().expect("effective");
        terms.push((Monomial::novikov(exps), value));
    }
    let series = TruncSeries::from_terms(Rationals, trunc, terms)?;
    Ok(GSeries { series, geometry: x.clone(), order })
}

/// `y_j -> (-1)^{w_j} y_j`, i.e. `y^beta -> (-1)^{w.beta} y^beta`.
pub fn graded_twist(s: &Series, weights: &[i64]) -> Series {
    s.map_terms(|m, c| {
        let e: i64 = m.beta.iter().zip(weights).map(|(&b, &w)| i64::from(b) * w).sum();
        Some(c * sign(e))
    })
}

/// The displayed form of `g(-y)`: coefficient `(-1)^{D.beta-1} g_beta`.
pub fn g_negated(g: &GSeries) -> Series {
    graded_twist(&g.series, g.geometry.divisor_degrees()).neg()
}

/// Result of reconciling the two readings of `g(-y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SignCheck {
    /// The signed-coefficient display agrees with `-g(y_j -> (-1)^{d_j} y_j)`.
    pub display_matches_substitution: bool,
    /// The literal substitution `y_j -> -y_j` matches the display as well.
    pub literal_matches_display: bool,
}

/// Compares the display `g_negated` with `-g` composed with the substitution
/// `y_j -> (-1)^{d_j} y_j`; any disagreement is a hard error.
pub fn check_sign_conventions(g: &GSeries) -> Result<SignCheck, MirrorError> {
    let display = g_negated(g);
    let trunc = g.series.truncation().clone();
    let dd = g.geometry.divisor_degrees();
    let twisted_vars = (0..g.series.nvars())
        .map(|j| Ok(TruncSeries::variable(Rationals, trunc.clone(), j)?.scale(&sign(dd[j]))))
        .collect::<Result<Vec<_>, SeriesError>>()?;
    let substituted = g.series.substitute(&twisted_vars)?.neg();
    if display != substituted {
        let beta = display
            .terms()
            .map(|(m, _)| m)
            .chain(substituted.terms().map(|(m, _)| m))
            .find(|m| display.coeff(m) != substituted.coeff(m))
            .cloned()
            .expect("differing series have a differing term");
        return Err(MirrorError::SignConvention {
            beta: class_of(&beta),
            display: display.coeff(&beta),
            substituted: substituted.coeff(&beta),
        });
    }
    let ones = vec![1; dd.len()];
    let literal = graded_twist(&g.series, &ones).neg();
    Ok(SignCheck { display_matches_substitution: true, literal_matches_display: literal == display })
}

/// `q_i = y_i exp(d_i c(y))` and its inverse `y_i(q)`.
#[derive(Debug, Clone)]
pub struct MirrorMap {
    pub correction: Series,
    pub weights: Vec<i64>,
    pub forward: Vec<Series>,
    pub inverse: Vec<Series>,
    pub iterations: usize,
}

impl MirrorMap {
    pub fn from_correction(correction: &Series, weights: &[i64]) -> Result<Self, MirrorError> {
        let trunc = correction.truncation().clone();
        let n = trunc.nvars();
        let vars = (0..n)
            .map(|j| TruncSeries::variable(Rationals, trunc.clone(), j))
            .collect::<Result<Vec<_>, _>>()?;
        let mut forward = Vec::with_capacity(n);
        for (j, y) in vars.iter().enumerate() {
            forward.push(y.mul(&correction.scale(&int(weights[j])).exp()?)?);
        }
        // y^{(k+1)}_i = q_i exp(-d_i c(y^{(k)})), starting from y^{(0)} = q
        let limit = trunc.max_grade() as usize + 2;
        let mut current = vars.clone();
        let mut iterations = 0;
        loop {
            if iterations >= limit {
                return Err(MirrorError::NoConvergence(limit));
            }
            iterations += 1;
            let c_at = correction.substitute(&current)?;
            let next = vars
                .iter()
                .enumerate()
                .map(|(j, q)| q.mul(&c_at.scale(&int(-weights[j])).exp()?))
                .collect::<Result<Vec<_>, SeriesError>>()?;
            if next == current {
                break;
            }
            current = next;
        }
        let map = MirrorMap {
            correction: correction.clone(),
            weights: weights.to_vec(),
            forward,
            inverse: current,
            iterations,
        };
        map.verify_round_trip()?;
        Ok(map)
    }

    /// Checks `forward(inverse(q)) = q` and `inverse(forward(y)) = y`.
    pub fn verify_round_trip(&self) -> Result<(), MirrorError> {
        let trunc = self.correction.truncation().clone();
        for (j, (f, i)) in self.forward.iter().zip(&self.inverse).enumerate() {
            let var = TruncSeries::variable(Rationals, trunc.clone(), j)?;
            let fi = f.substitute(&self.inverse)?;
            if fi != var {
                return Err(MirrorError::RoundTrip { var: j, detail: format!("forward(inverse) = {fi}") });
            }
            let inv_f = i.substitute(&self.forward)?;
            if inv_f != var {
                return Err(MirrorError::RoundTrip { var: j, detail: format!("inverse(forward) = {inv_f}") });
            }
        }
        Ok(())
    }

    /// Re-expands a series in `y` as a series in `q`.
    pub fn to_q(&self, s: &Series) -> Result<Series, MirrorError> {
        Ok(s.substitute(&self.inverse)?)
    }
}

/// Mirror map of the theta frame: `q^beta = y^beta exp(D.beta g(y))`.
pub fn build_mirror_map(g: &GSeries) -> Result<MirrorMap, MirrorError> {
    MirrorMap::from_correction(&g.series, g.geometry.divisor_degrees())
}

/// `x W = exp(g(y(q)))` as a series in `q`.
#[derive(Debug, Clone)]
pub struct ThetaPotential {
    pub series: Series,
    pub geometry: Arc<TargetGeometry>,
    pub order: u32,
}

impl ThetaPotential {
    pub fn coeff(&self, beta: &CurveClass) -> Rational {
        beta.exponents().map_or_else(Rational::zero, |e| self.series.coeff_beta(&e))
    }

    /// Every effective class in range with its coefficient (zeros included).
    pub fn rows(&self) -> Vec<(CurveClass, Rational)> {
        CurveClass::effective_up_to(self.geometry.rank(), self.order)
            .into_iter()
            .map(|b| {
                let c = self.coeff(&b);
                (b, c)
            })
            .collect()
    }
}

pub fn theta_from(g: &GSeries, mirror: &MirrorMap) -> Result<ThetaPotential, MirrorError> {
    let series = mirror.to_q(&g.series)?.exp()?;
    Ok(ThetaPotential { series, geometry: g.geometry.clone(), order: g.order })
}

/// Runs `compute_g`, the mirror map and the exponential. Order 0 yields
/// the constant series 1.
pub fn theta_potential(x: &Arc<TargetGeometry>, order: u32) -> Result<ThetaPotential, MirrorError> {
    if order == 0 {
        let series = TruncSeries::one(Rationals, novikov_truncation(x, 0));
        return Ok(ThetaPotential { series, geometry: x.clone(), order });
    }
    let g = compute_g(x, order)?;
    check_sign_conventions(&g)?;
    let mirror = build_mirror_map(&g)?;
    theta_from(&g, &mirror)
}

/// `N_{n,1}^beta = theta_beta / n` with `n = D.beta - 1`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TwoPointInvariants {
    pub values: BTreeMap<CurveClass, Rational>,
    /// Classes with `D.beta < 2`, for which the invariant is undefined.
    pub skipped: Vec<CurveClass>,
}

pub fn two_point_invariants(theta: &ThetaPotential) -> TwoPointInvariants {
    let x = &theta.geometry;
    let mut out = TwoPointInvariants::default();
    for beta in CurveClass::nonzero_effective_up_to(x.rank(), theta.order) {
        let d = x.d_degree(&beta);
        if d < 2 {
            out.skipped.push(beta);
            continue;
        }
        let value = theta.coeff(&beta) / int(d - 1);
        out.values.insert(beta, value);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactmath::rational::frac;
    use crate::geometry::load_builtin;

    fn geo(name: &str) -> Arc<TargetGeometry> {
        Arc::new(load_builtin(name).unwrap())
    }

    fn c1(d: i64) -> CurveClass {
        CurveClass::new(vec![d])
    }

    #[test]
    fn g_for_p2() {
        let g = compute_g(&geo("p2"), 3).unwrap();
        assert_eq!(g.coeff(&c1(1)), int(2));
        assert_eq!(g.coeff(&c1(2)), int(15));
        assert_eq!(g.coeff(&c1(3)), frac(560, 3));
        assert!(matches!(compute_g(&geo("p2"), 0), Err(MirrorError::OrderTooSmall(0))));
        assert!(compute_g(&geo("p2"), 0).unwrap_err().to_string().contains("order too small"));
    }

    #[test]
    fn g_negated_follows_display() {
        let g = compute_g(&geo("p2"), 2).unwrap();
        let neg = g_negated(&g);
        assert_eq!(neg.coeff_beta(&[1]), int(2));
        assert_eq!(neg.coeff_beta(&[2]), int(-15));
        let twice = GSeries { series: neg, ..g.clone() };
        assert_eq!(g_negated(&twice), g.series);
        let zero = GSeries { series: TruncSeries::zero(Rationals, g.series.truncation().clone()), ..g };
        assert!(g_negated(&zero).is_zero());
    }

    #[test]
    fn sign_conventions() {
        let p2 = check_sign_conventions(&compute_g(&geo("p2"), 4).unwrap()).unwrap();
        assert!(p2.literal_matches_display);
        let q = check_sign_conventions(&compute_g(&geo("p1xp1"), 3).unwrap()).unwrap();
        assert!(!q.literal_matches_display);
    }

    #[test]
    fn trivial_mirror_map() {
        let x = geo("p1xp1");
        let zero = TruncSeries::zero(Rationals, novikov_truncation(&x, 3));
        let m = MirrorMap::from_correction(&zero, x.divisor_degrees()).unwrap();
        for j in 0..2 {
            let var = TruncSeries::variable(Rationals, novikov_truncation(&x, 3), j).unwrap();
            assert_eq!(m.forward[j], var);
            assert_eq!(m.inverse[j], var);
        }
    }

    #[test]
    fn p2_mirror_map_low_order() {
        let g = compute_g(&geo("p2"), 3).unwrap();
        let m = build_mirror_map(&g).unwrap();
        assert_eq!(m.forward[0].coeff_beta(&[2]), int(6));
        assert_eq!(m.inverse[0].coeff_beta(&[1]), int(1));
        assert_eq!(m.inverse[0].coeff_beta(&[2]), int(-6));
        assert_eq!(m.inverse[0].coeff_beta(&[3]), int(9));
    }

    #[test]
    fn p2_theta() {
        let theta = theta_potential(&geo("p2"), 6).unwrap();
        let want = [1, 2, 5, 32, 286, 3038, 35870];
        for (d, w) in want.iter().enumerate() {
            assert_eq!(theta.coeff(&c1(d as i64)), int(*w), "q^{d}");
        }
        let inv = two_point_invariants(&theta);
        let n: Vec<Rational> = inv.values.values().cloned().collect();
        assert_eq!(n, [1, 1, 4, 26, 217, 2110].map(int));
        assert!(inv.skipped.is_empty());
    }

    #[test]
    fn p1xp1_theta() {
        let theta = theta_potential(&geo("p1xp1"), 4).unwrap();
        let cases = [([1, 0], 1), ([0, 1], 1), ([1, 1], 3), ([2, 1], 5), ([2, 2], 35), ([3, 1], 7), ([2, 0], 0)];
        for (b, w) in cases {
            assert_eq!(theta.coeff(&CurveClass::new(b.to_vec())), int(w), "{b:?}");
        }
    }

    #[test]
    fn order_zero_theta_is_one() {
        let theta = theta_potential(&geo("p2"), 0).unwrap();
        assert_eq!(theta.series.len(), 1);
        assert_eq!(theta.series.constant_term(), int(1));
        assert_eq!(theta.rows().len(), 1);
    }
}
