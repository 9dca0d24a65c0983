//! Finite-dimensional graded commutative rings given by structure constants,
//! the integration functional, and the projective-bundle extension
//! `H*(X)[h]/(h^2 - D h)`.

use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::exactmath::linalg::{self, Matrix};
use crate::exactmath::{format_rational, CoeffRing, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CohomologyError {
    #[error("elements belong to different rings ({0} vs {1})")]
    MismatchedRings(String, String),
    #[error("element does not live in the bundle ring {0}")]
    NotBundleRing(String),
    #[error("invalid basis: {0}")]
    InvalidBasis(String),
    #[error("ring axiom violated: {0}")]
    RingAxiom(String),
    #[error("Poincare pairing of {0} is degenerate")]
    SingularPairing(String),
    #[error("expected {expected} coordinates, got {got}")]
    Dimension { expected: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasisElement {
    pub name: String,
    pub degree: u32,
}

impl BasisElement {
    pub fn new(name: impl Into<String>, degree: u32) -> Self {
        BasisElement { name: name.into(), degree }
    }
}

/// Even cohomology of a compact target, as a connected graded commutative
/// algebra with a one-dimensional top degree spanned by the point class.
#[derive(Debug, Clone, PartialEq)]
pub struct GradedRing {
    name: String,
    basis: Vec<BasisElement>,
    /// `table[i][j]` lists the nonzero `(k, c_ij^k)`.
    table: Vec<Vec<Vec<(usize, Rational)>>>,
    unit: usize,
    point: usize,
    top_degree: u32,
    pairing_inverse: Matrix,
}

impl GradedRing {
    /// Builds and validates a ring. Products involving the unit are filled
    /// in automatically; products listed for `(i, j)` are mirrored to
    /// `(j, i)` unless given explicitly (in which case they must agree).
    pub fn new(
        name: impl Into<String>,
        basis: Vec<BasisElement>,
        products: impl IntoIterator<Item = (usize, usize, usize, Rational)>,
        unit: usize,
        point: usize,
    ) -> Result<Arc<Self>, CohomologyError> {
        let name = name.into();
        let dim = basis.len();
        if unit >= dim || point >= dim {
            return Err(CohomologyError::InvalidBasis(format!(
                "unit {unit} / point {point} out of range for dimension {dim}"
            )));
        }
        if basis[unit].degree != 0 || basis.iter().filter(|b| b.degree == 0).count() != 1 {
            return Err(CohomologyError::InvalidBasis(
                "the unit must be the only degree-0 basis element".into(),
            ));
        }
        let top_degree = basis.iter().map(|b| b.degree).max().unwrap_or(0);
        if basis[point].degree != top_degree
            || basis.iter().filter(|b| b.degree == top_degree).count() != 1
        {
            return Err(CohomologyError::InvalidBasis(
                "the point class must span the top degree".into(),
            ));
        }

        let mut dense = vec![vec![vec![Rational::zero(); dim]; dim]; dim];
        let mut given = vec![vec![false; dim]; dim];
        for (i, j, k, c) in products {
            if i >= dim || j >= dim || k >= dim {
                return Err(CohomologyError::InvalidBasis(format!(
                    "structure constant index ({i},{j},{k}) out of range"
                )));
            }
            dense[i][j][k] += c;
            given[i][j] = true;
        }
        for i in 0..dim {
            for j in 0..dim {
                if given[i][j] && !given[j][i] {
                    dense[j][i] = dense[i][j].clone();
                    given[j][i] = true;
                }
            }
        }
        for i in 0..dim {
            let mut expected = vec![Rational::zero(); dim];
            expected[i] = Rational::one();
            for (a, b) in [(unit, i), (i, unit)] {
                if given[a][b] && dense[a][b] != expected {
                    return Err(CohomologyError::RingAxiom(format!(
                        "product of the unit with {} is not the identity",
                        basis[i].name
                    )));
                }
                dense[a][b] = expected.clone();
            }
        }

        let table = dense
            .iter()
            .map(|row| {
                row.iter()
                    .map(|prod| {
                        prod.iter()
                            .enumerate()
                            .filter(|(_, c)| !c.is_zero())
                            .map(|(k, c)| (k, c.clone()))
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let mut ring = GradedRing {
            name,
            basis,
            table,
            unit,
            point,
            top_degree,
            pairing_inverse: Vec::new(),
        };
        ring.check_axioms()?;
        let pairing = ring.pairing_matrix();
        ring.pairing_inverse = linalg::inverse(&pairing)
            .ok_or_else(|| CohomologyError::SingularPairing(ring.name.clone()))?;
        Ok(Arc::new(ring))
    }

    fn check_axioms(&self) -> Result<(), CohomologyError> {
        let dim = self.dim();
        for i in 0..dim {
            for j in 0..dim {
                if self.table[i][j] != self.table[j][i] {
                    return Err(CohomologyError::RingAxiom(format!(
                        "{} * {} is not commutative",
                        self.basis[i].name, self.basis[j].name
                    )));
                }
                for (k, _) in &self.table[i][j] {
                    if self.basis[*k].degree != self.basis[i].degree + self.basis[j].degree {
                        return Err(CohomologyError::RingAxiom(format!(
                            "{} * {} has a component on {} of the wrong degree",
                            self.basis[i].name, self.basis[j].name, self.basis[*k].name
                        )));
                    }
                }
            }
        }
        for i in 0..dim {
            for j in 0..dim {
                let ij = self.product_coords(&self.unit_vector(i), &self.unit_vector(j));
                for k in 0..dim {
                    let left = self.product_coords(&ij, &self.unit_vector(k));
                    let jk = self.product_coords(&self.unit_vector(j), &self.unit_vector(k));
                    let right = self.product_coords(&self.unit_vector(i), &jk);
                    if left != right {
                        return Err(CohomologyError::RingAxiom(format!(
                            "({} * {}) * {} differs from {} * ({} * {})",
                            self.basis[i].name,
                            self.basis[j].name,
                            self.basis[k].name,
                            self.basis[i].name,
                            self.basis[j].name,
                            self.basis[k].name
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    fn unit_vector(&self, i: usize) -> Vec<Rational> {
        let mut v = vec![Rational::zero(); self.dim()];
        v[i] = Rational::one();
        v
    }

    fn product_coords(&self, a: &[Rational], b: &[Rational]) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); self.dim()];
        for (i, ai) in a.iter().enumerate() {
            if ai.is_zero() {
                continue;
            }
            for (j, bj) in b.iter().enumerate() {
                if bj.is_zero() {
                    continue;
                }
                let ab = ai * bj;
                for (k, c) in &self.table[i][j] {
                    out[*k] += &ab * c;
                }
            }
        }
        out
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[BasisElement] {
        &self.basis
    }

    pub fn unit_index(&self) -> usize {
        self.unit
    }

    pub fn point_index(&self) -> usize {
        self.point
    }

    pub fn top_degree(&self) -> u32 {
        self.top_degree
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.basis.iter().position(|b| b.name == name)
    }

    /// Nonzero structure constants `(i, j, k, c)` with `i <= j`.
    pub fn structure_constants(&self) -> Vec<(usize, usize, usize, Rational)> {
        let mut out = Vec::new();
        for i in 0..self.dim() {
            for j in i..self.dim() {
                for (k, c) in &self.table[i][j] {
                    out.push((i, j, *k, c.clone()));
                }
            }
        }
        out
    }

    /// `integrate(phi_i * phi_j)`.
    pub fn pairing_matrix(&self) -> Matrix {
        (0..self.dim())
            .map(|i| {
                (0..self.dim())
                    .map(|j| {
                        self.table[i][j]
                            .iter()
                            .find(|(k, _)| *k == self.point)
                            .map_or_else(Rational::zero, |(_, c)| c.clone())
                    })
                    .collect()
            })
            .collect()
    }

    /// Basis dual to the given one under the Poincare pairing.
    pub fn dual_basis(self: &Arc<Self>) -> Vec<RingElement> {
        self.pairing_inverse
            .iter()
            .map(|row| RingElement { ring: self.clone(), coords: row.clone() })
            .collect()
    }
}

fn same_ring(a: &Arc<GradedRing>, b: &Arc<GradedRing>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// Element of a [`GradedRing`], as a coordinate vector over its basis.
#[derive(Clone)]
pub struct RingElement {
    ring: Arc<GradedRing>,
    coords: Vec<Rational>,
}

impl PartialEq for RingElement {
    fn eq(&self, other: &Self) -> bool {
        same_ring(&self.ring, &other.ring) && self.coords == other.coords
    }
}

impl fmt::Debug for RingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for RingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .coords
            .iter()
            .zip(self.ring.basis())
            .filter(|(c, _)| !c.is_zero())
            .map(|(c, b)| format!("{}*{}", format_rational(c), b.name))
            .collect();
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

impl RingElement {
    pub fn zero(ring: &Arc<GradedRing>) -> Self {
        RingElement { ring: ring.clone(), coords: vec![Rational::zero(); ring.dim()] }
    }

    pub fn one(ring: &Arc<GradedRing>) -> Self {
        Self::basis(ring, ring.unit)
    }

    pub fn basis(ring: &Arc<GradedRing>, index: usize) -> Self {
        RingElement { ring: ring.clone(), coords: ring.unit_vector(index) }
    }

    pub fn scalar(ring: &Arc<GradedRing>, value: Rational) -> Self {
        Self::one(ring).scale(&value)
    }

    pub fn from_coords(ring: &Arc<GradedRing>, coords: Vec<Rational>) -> Result<Self, CohomologyError> {
        if coords.len() != ring.dim() {
            return Err(CohomologyError::Dimension { expected: ring.dim(), got: coords.len() });
        }
        Ok(RingElement { ring: ring.clone(), coords })
    }

    pub fn ring(&self) -> &Arc<GradedRing> {
        &self.ring
    }

    pub fn coords(&self) -> &[Rational] {
        &self.coords
    }

    pub fn coord(&self, index: usize) -> &Rational {
        &self.coords[index]
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(Zero::is_zero)
    }

    /// True when every nonzero coordinate sits in the given degree.
    pub fn is_homogeneous_of_degree(&self, degree: u32) -> bool {
        self.coords
            .iter()
            .zip(self.ring.basis())
            .all(|(c, b)| c.is_zero() || b.degree == degree)
    }

    fn check_same(&self, other: &Self) -> Result<(), CohomologyError> {
        if same_ring(&self.ring, &other.ring) {
            Ok(())
        } else {
            Err(CohomologyError::MismatchedRings(
                self.ring.name.clone(),
                other.ring.name.clone(),
            ))
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, CohomologyError> {
        self.check_same(other)?;
        Ok(self.add_unchecked(other))
    }

    pub fn sub(&self, other: &Self) -> Result<Self, CohomologyError> {
        self.add(&other.neg())
    }

    fn add_unchecked(&self, other: &Self) -> Self {
        let coords = self.coords.iter().zip(&other.coords).map(|(a, b)| a + b).collect();
        RingElement { ring: self.ring.clone(), coords }
    }

    pub fn neg(&self) -> Self {
        RingElement { ring: self.ring.clone(), coords: self.coords.iter().map(|c| -c).collect() }
    }

    pub fn scale(&self, r: &Rational) -> Self {
        RingElement { ring: self.ring.clone(), coords: self.coords.iter().map(|c| c * r).collect() }
    }

    /// Cup product.
    pub fn mul(&self, other: &Self) -> Result<Self, CohomologyError> {
        self.check_same(other)?;
        Ok(self.mul_unchecked(other))
    }

    fn mul_unchecked(&self, other: &Self) -> Self {
        RingElement {
            ring: self.ring.clone(),
            coords: self.ring.product_coords(&self.coords, &other.coords),
        }
    }

    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(Self::one(&self.ring), |acc, _| acc.mul_unchecked(self))
    }

    /// Coefficient of the point class.
    pub fn integrate(&self) -> Rational {
        self.coords[self.ring.point].clone()
    }

    /// Coordinate on the unit `[1]`.
    pub fn identity_component(&self) -> Rational {
        self.coords[self.ring.unit].clone()
    }

    /// `integrate(self * other)`.
    pub fn pair(&self, other: &Self) -> Result<Rational, CohomologyError> {
        Ok(self.mul(other)?.integrate())
    }
}

impl CoeffRing for Arc<GradedRing> {
    type Elem = RingElement;

    fn zero(&self) -> RingElement {
        RingElement::zero(self)
    }
    fn one(&self) -> RingElement {
        RingElement::one(self)
    }
    fn is_zero(&self, a: &RingElement) -> bool {
        a.is_zero()
    }
    fn add(&self, a: &RingElement, b: &RingElement) -> RingElement {
        a.add_unchecked(b)
    }
    fn neg(&self, a: &RingElement) -> RingElement {
        a.neg()
    }
    fn mul(&self, a: &RingElement, b: &RingElement) -> RingElement {
        a.mul_unchecked(b)
    }
    fn scale(&self, a: &RingElement, r: &Rational) -> RingElement {
        a.scale(r)
    }
    fn scalar_part(&self, a: &RingElement) -> Rational {
        a.identity_component()
    }
    fn nilpotency_index(&self) -> usize {
        self.top_degree as usize + 1
    }
    fn same_ring(&self, other: &Self) -> bool {
        same_ring(self, other)
    }
    fn describe(&self) -> String {
        format!("H*({})", self.name)
    }
}

/// `H*(X)[h] / (h^2 - D h)` with basis `{phi_a, h phi_a}`.
#[derive(Debug, Clone)]
pub struct BundleRing {
    base: Arc<GradedRing>,
    divisor: RingElement,
    ring: Arc<GradedRing>,
}

impl BundleRing {
    /// `divisor` must be a degree-one class of `base`.
    pub fn build(base: &Arc<GradedRing>, divisor: &RingElement) -> Result<Self, CohomologyError> {
        if !same_ring(base, divisor.ring()) {
            return Err(CohomologyError::MismatchedRings(
                base.name.clone(),
                divisor.ring().name.clone(),
            ));
        }
        if !divisor.is_homogeneous_of_degree(1) {
            return Err(CohomologyError::InvalidBasis("the divisor must have degree 1".into()));
        }
        let n = base.dim();
        let mut basis = base.basis.clone();
        for (i, b) in base.basis.iter().enumerate() {
            let name = if i == base.unit { "h".to_string() } else { format!("h*{}", b.name) };
            basis.push(BasisElement::new(name, b.degree + 1));
        }
        let mut products = Vec::new();
        for i in 0..n {
            for j in 0..n {
                for (k, c) in &base.table[i][j] {
                    products.push((i, j, *k, c.clone()));
                    products.push((i, n + j, n + k, c.clone()));
                }
                // (h phi_i)(h phi_j) = h * (D phi_i phi_j)
                let phi_ij = base.product_coords(&base.unit_vector(i), &base.unit_vector(j));
                let d_phi_ij = base.product_coords(&divisor.coords, &phi_ij);
                for (k, c) in d_phi_ij.into_iter().enumerate() {
                    if !c.is_zero() {
                        products.push((n + i, n + j, n + k, c));
                    }
                }
            }
        }
        let name = format!("P({})", base.name);
        let ring = GradedRing::new(name, basis, products, base.unit, n + base.point)?;
        let bundle = BundleRing { base: base.clone(), divisor: divisor.clone(), ring };
        bundle.check_collapse_homomorphism()?;
        Ok(bundle)
    }

    fn check_collapse_homomorphism(&self) -> Result<(), CohomologyError> {
        let dim = self.ring.dim();
        for i in 0..dim {
            for j in 0..dim {
                let a = RingElement::basis(&self.ring, i);
                let b = RingElement::basis(&self.ring, j);
                let lhs = self.collapse_h(&a.mul_unchecked(&b))?;
                let rhs = self.collapse_h(&a)?.mul_unchecked(&self.collapse_h(&b)?);
                if lhs != rhs {
                    return Err(CohomologyError::RingAxiom(format!(
                        "h -> 0 is not multiplicative on ({}, {})",
                        self.ring.basis[i].name, self.ring.basis[j].name
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn ring(&self) -> &Arc<GradedRing> {
        &self.ring
    }

    pub fn base(&self) -> &Arc<GradedRing> {
        &self.base
    }

    /// `D` as a class of the base.
    pub fn divisor(&self) -> &RingElement {
        &self.divisor
    }

    pub fn h(&self) -> RingElement {
        RingElement::basis(&self.ring, self.base.dim() + self.base.unit)
    }

    /// Pullback of a base class.
    pub fn lift(&self, a: &RingElement) -> Result<RingElement, CohomologyError> {
        if !same_ring(&self.base, a.ring()) {
            return Err(CohomologyError::MismatchedRings(
                self.base.name.clone(),
                a.ring().name.clone(),
            ));
        }
        let mut coords = a.coords.clone();
        coords.resize(self.ring.dim(), Rational::zero());
        Ok(RingElement { ring: self.ring.clone(), coords })
    }

    /// The ring homomorphism `h -> 0` onto the base.
    pub fn collapse_h(&self, a: &RingElement) -> Result<RingElement, CohomologyError> {
        if !same_ring(&self.ring, a.ring()) {
            return Err(CohomologyError::NotBundleRing(self.ring.name.clone()));
        }
        Ok(RingElement { ring: self.base.clone(), coords: a.coords[..self.base.dim()].to_vec() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactmath::rational::int;

    fn p2() -> Arc<GradedRing> {
        GradedRing::new(
            "P2",
            vec![BasisElement::new("1", 0), BasisElement::new("p", 1), BasisElement::new("p^2", 2)],
            [(1, 1, 2, int(1))],
            0,
            2,
        )
        .unwrap()
    }

    #[test]
    fn p2_products_and_integrals() {
        let r = p2();
        let p = RingElement::basis(&r, 1);
        let p2 = RingElement::basis(&r, 2);
        assert_eq!(p.mul(&p).unwrap(), p2);
        assert!(p2.mul(&p).unwrap().is_zero());
        assert_eq!(p2.integrate(), int(1));
        assert_eq!(p.integrate(), int(0));
        let one_plus_3p = RingElement::one(&r).add(&p.scale(&int(3))).unwrap();
        assert_eq!(one_plus_3p.identity_component(), int(1));
        assert_eq!(p2.identity_component(), int(0));
        assert_eq!(RingElement::scalar(&r, int(5)).identity_component(), int(5));
    }

    #[test]
    fn bundle_ring_relation() {
        let r = p2();
        let d = RingElement::basis(&r, 1).scale(&int(3));
        let b = BundleRing::build(&r, &d).unwrap();
        assert_eq!(b.ring().dim(), 6);
        let h = b.h();
        let hp = h.mul(&b.lift(&RingElement::basis(&r, 1)).unwrap()).unwrap();
        assert_eq!(h.mul(&h).unwrap(), hp.scale(&int(3)));
        let hp2 = h.mul(&b.lift(&RingElement::basis(&r, 2)).unwrap()).unwrap();
        assert_eq!(hp2.integrate(), int(1));
        assert!(b.collapse_h(&h).unwrap().is_zero());
        let one_plus_hp = RingElement::one(b.ring()).add(&hp).unwrap();
        assert_eq!(b.collapse_h(&one_plus_hp).unwrap(), RingElement::one(&r));
        let d_lift = b.lift(&d).unwrap();
        let x = d_lift.sub(&h).unwrap().mul(&h).unwrap();
        assert!(b.collapse_h(&x).unwrap().is_zero());
        assert!(matches!(b.collapse_h(&RingElement::one(&r)), Err(CohomologyError::NotBundleRing(_))));
    }

    #[test]
    fn mismatched_rings_error() {
        let a = p2();
        let b = GradedRing::new(
            "P1",
            vec![BasisElement::new("1", 0), BasisElement::new("p", 1)],
            [],
            0,
            1,
        )
        .unwrap();
        let x = RingElement::one(&a);
        let y = RingElement::one(&b);
        assert!(matches!(x.mul(&y), Err(CohomologyError::MismatchedRings(_, _))));
    }

    #[test]
    fn axiom_failures_are_detected() {
        let basis =
            vec![BasisElement::new("1", 0), BasisElement::new("p", 1), BasisElement::new("p^2", 2)];
        let bad_degree = GradedRing::new("bad", basis.clone(), [(1, 1, 1, int(1))], 0, 2);
        assert!(matches!(bad_degree, Err(CohomologyError::RingAxiom(_))));
        let degenerate = GradedRing::new("deg", basis, [], 0, 2);
        assert!(matches!(degenerate, Err(CohomologyError::SingularPairing(_))));
    }

    #[test]
    fn dual_basis_pairs_to_identity() {
        let r = p2();
        let dual = r.dual_basis();
        for i in 0..3 {
            for (j, d) in dual.iter().enumerate() {
                let v = RingElement::basis(&r, i).pair(d).unwrap();
                assert_eq!(v, if i == j { int(1) } else { int(0) });
            }
        }
    }
}
