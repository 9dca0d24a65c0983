//! Target geometries: toric data, the curve-class lattice, the divisor `D`,
//! built-in examples, and the projective bundle `P = P(O(-D) + O)`.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cohomology::{BasisElement, BundleRing, CohomologyError, GradedRing, RingElement};
use crate::exactmath::rational::int;
use crate::exactmath::{format_rational, linalg, parse_rational, Rational};
use crate::givental::{self, GiventalError};

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("geometry config does not match the schema: {0}")]
    Schema(String),
    #[error("unknown built-in geometry {0:?} (available: p2, p1xp1)")]
    UnknownBuiltin(String),
    #[error(transparent)]
    Ring(#[from] CohomologyError),
    #[error("D not nef: D.beta_{generator} = {value}")]
    NotNef { generator: usize, value: Rational },
    #[error("inconsistent toric data: {0}")]
    Inconsistent(String),
}

/// Integer vector in the basis of Mori generators.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CurveClass(Vec<i64>);

impl CurveClass {
    pub fn new(components: Vec<i64>) -> Self {
        CurveClass(components)
    }

    pub fn zero(rank: usize) -> Self {
        CurveClass(vec![0; rank])
    }

    pub fn generator(rank: usize, index: usize) -> Self {
        let mut v = vec![0; rank];
        v[index] = 1;
        CurveClass(v)
    }

    pub fn components(&self) -> &[i64] {
        &self.0
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    /// Effective iff all components are non-negative (free simplicial cone).
    pub fn is_effective(&self) -> bool {
        self.0.iter().all(|&c| c >= 0)
    }

    pub fn total_degree(&self) -> i64 {
        self.0.iter().sum()
    }

    pub fn add(&self, other: &CurveClass) -> CurveClass {
        CurveClass(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &CurveClass) -> CurveClass {
        CurveClass(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, k: i64) -> CurveClass {
        CurveClass(self.0.iter().map(|a| a * k).collect())
    }

    /// Exponent vector of the Novikov monomial `q^beta`; `None` unless
    /// effective.
    pub fn exponents(&self) -> Option<Vec<u32>> {
        self.0.iter().map(|&c| u32::try_from(c).ok()).collect()
    }

    pub fn from_exponents(exponents: &[u32]) -> Self {
        CurveClass(exponents.iter().map(|&e| i64::from(e)).collect())
    }

    /// All effective classes of total degree `<= max_degree`, ordered by
    /// degree then lexicographically (descending first component).
    pub fn effective_up_to(rank: usize, max_degree: u32) -> Vec<CurveClass> {
        let mut out = Vec::new();
        for d in 0..=max_degree {
            compositions(rank, d, &mut Vec::new(), &mut out);
        }
        out
    }

    pub fn nonzero_effective_up_to(rank: usize, max_degree: u32) -> Vec<CurveClass> {
        Self::effective_up_to(rank, max_degree).into_iter().filter(|b| !b.is_zero()).collect()
    }

    /// Parses `"[1,0]"` (brackets optional).
    pub fn parse(text: &str) -> Option<CurveClass> {
        let inner = text.trim().trim_start_matches('[').trim_end_matches(']');
        inner
            .split(',')
            .map(|p| p.trim().parse::<i64>().ok())
            .collect::<Option<Vec<_>>>()
            .map(CurveClass)
    }
}

fn compositions(rank: usize, degree: u32, prefix: &mut Vec<i64>, out: &mut Vec<CurveClass>) {
    if prefix.len() + 1 == rank {
        let mut v = prefix.clone();
        v.push(i64::from(degree));
        out.push(CurveClass(v));
        return;
    }
    if rank == 0 {
        if degree == 0 {
            out.push(CurveClass(Vec::new()));
        }
        return;
    }
    for first in (0..=degree).rev() {
        prefix.push(i64::from(first));
        compositions(rank, degree - first, prefix, out);
        prefix.pop();
    }
}

impl Ord for CurveClass {
    fn cmp(&self, other: &Self) -> Ordering {
        self.total_degree()
            .cmp(&other.total_degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for CurveClass {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for CurveClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(i64::to_string).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisEntry {
    pub name: String,
    pub degree: u32,
}

/// On-disk geometry description. Rationals are `"num/den"` strings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    pub name: String,
    pub basis: Vec<BasisEntry>,
    /// Defaults to the unique degree-0 element.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit: Option<usize>,
    pub point: usize,
    /// `(i, j, k, c)`: `basis_i * basis_j` has coefficient `c` on `basis_k`.
    pub structconst: Vec<(usize, usize, usize, String)>,
    pub toricdivisors: Vec<Vec<String>>,
    /// `moripairings[i][j] = D_i . beta_j`.
    pub moripairings: Vec<Vec<i64>>,
    #[serde(rename = "D")]
    pub divisor: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anticanonical: Option<Vec<String>>,
}

impl GeometryConfig {
    pub fn from_json(text: &str) -> Result<Self, GeometryError> {
        serde_json::from_str(text).map_err(|e| GeometryError::Schema(e.to_string()))
    }

    /// Stable serialization used for hashing and cache keys.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}

fn r(s: &str) -> String {
    s.to_string()
}

/// Built-in configs: `"p2"` with the cubic `D = 3p` and `"p1xp1"` with
/// `D` of bidegree (2,2).
pub fn builtin_config(name: &str) -> Result<GeometryConfig, GeometryError> {
    match name {
        "p2" => Ok(GeometryConfig {
            name: "p2".into(),
            basis: vec![
                BasisEntry { name: "1".into(), degree: 0 },
                BasisEntry { name: "p".into(), degree: 1 },
                BasisEntry { name: "p^2".into(), degree: 2 },
            ],
            unit: Some(0),
            point: 2,
            structconst: vec![(1, 1, 2, r("1/1"))],
            toricdivisors: vec![vec![r("0/1"), r("1/1"), r("0/1")]; 3],
            moripairings: vec![vec![1]; 3],
            divisor: vec![r("0/1"), r("3/1"), r("0/1")],
            anticanonical: None,
        }),
        "p1xp1" => {
            let d1 = vec![r("0/1"), r("1/1"), r("0/1"), r("0/1")];
            let d2 = vec![r("0/1"), r("0/1"), r("1/1"), r("0/1")];
            Ok(GeometryConfig {
                name: "p1xp1".into(),
                basis: vec![
                    BasisEntry { name: "1".into(), degree: 0 },
                    BasisEntry { name: "p1".into(), degree: 1 },
                    BasisEntry { name: "p2".into(), degree: 1 },
                    BasisEntry { name: "p1p2".into(), degree: 2 },
                ],
                unit: Some(0),
                point: 3,
                structconst: vec![(1, 2, 3, r("1/1"))],
                toricdivisors: vec![d1.clone(), d1, d2.clone(), d2],
                moripairings: vec![vec![1, 0], vec![1, 0], vec![0, 1], vec![0, 1]],
                divisor: vec![r("0/1"), r("2/1"), r("2/1"), r("0/1")],
                anticanonical: None,
            })
        }
        other => Err(GeometryError::UnknownBuiltin(other.to_string())),
    }
}

pub const BUILTIN_NAMES: [&str; 2] = ["p2", "p1xp1"];

/// A smooth toric target `X` with a nef divisor `D`.
#[derive(Debug, Clone)]
pub struct TargetGeometry {
    config: GeometryConfig,
    ring: Arc<GradedRing>,
    nef_basis: Vec<usize>,
    /// `nef_pairing[a][j] = p_a . beta_j`
    nef_pairing: Vec<Vec<i64>>,
    toric_divisors: Vec<RingElement>,
    mori_pairings: Vec<Vec<i64>>,
    divisor: RingElement,
    divisor_degrees: Vec<i64>,
    anticanonical: RingElement,
    anticanonical_degrees: Vec<i64>,
    log_cy: bool,
    warnings: Vec<String>,
}

fn parse_coords(ring: &Arc<GradedRing>, what: &str, coords: &[String]) -> Result<RingElement, GeometryError> {
    let values = coords
        .iter()
        .map(|c| parse_rational(c).map_err(|e| GeometryError::Schema(format!("{what}: {e}"))))
        .collect::<Result<Vec<_>, _>>()?;
    let elem = RingElement::from_coords(ring, values)
        .map_err(|e| GeometryError::Schema(format!("{what}: {e}")))?;
    if !elem.is_homogeneous_of_degree(1) {
        return Err(GeometryError::Schema(format!("{what} must be a degree-1 class")));
    }
    Ok(elem)
}

fn to_integer(value: &Rational, what: &str) -> Result<i64, GeometryError> {
    if !value.denom().is_one() {
        return Err(GeometryError::Inconsistent(format!("{what} = {} is not integral", format_rational(value))));
    }
    value
        .numer()
        .to_i64()
        .ok_or_else(|| GeometryError::Inconsistent(format!("{what} overflows")))
}

/// Validates a config and builds the geometry.
pub fn load_geometry(config: GeometryConfig) -> Result<TargetGeometry, GeometryError> {
    let basis: Vec<BasisElement> =
        config.basis.iter().map(|b| BasisElement::new(b.name.clone(), b.degree)).collect();
    let unit = match config.unit {
        Some(u) => u,
        None => basis
            .iter()
            .position(|b| b.degree == 0)
            .ok_or_else(|| GeometryError::Schema("no degree-0 basis element".into()))?,
    };
    let mut products = Vec::with_capacity(config.structconst.len());
    for (i, j, k, c) in &config.structconst {
        let value = parse_rational(c).map_err(|e| GeometryError::Schema(format!("structconst: {e}")))?;
        products.push((*i, *j, *k, value));
    }
    let ring = GradedRing::new(config.name.clone(), basis, products, unit, config.point)?;

    let nef_basis: Vec<usize> =
        (0..ring.dim()).filter(|&i| ring.basis()[i].degree == 1).collect();
    let rank = nef_basis.len();
    if config.toricdivisors.is_empty() {
        return Err(GeometryError::Schema("at least one toric divisor is required".into()));
    }
    if config.moripairings.len() != config.toricdivisors.len() {
        return Err(GeometryError::Schema(format!(
            "moripairings has {} rows for {} toric divisors",
            config.moripairings.len(),
            config.toricdivisors.len()
        )));
    }
    if config.moripairings.iter().any(|row| row.len() != rank) {
        return Err(GeometryError::Schema(format!(
            "each moripairings row needs one entry per Mori generator ({rank})"
        )));
    }
    let toric_divisors = config
        .toricdivisors
        .iter()
        .enumerate()
        .map(|(i, c)| parse_coords(&ring, &format!("toricdivisors[{i}]"), c))
        .collect::<Result<Vec<_>, _>>()?;

    // Solve T * P = M for the pairing P[a][j] = p_a . beta_j.
    let t: linalg::Matrix = toric_divisors
        .iter()
        .map(|d| nef_basis.iter().map(|&a| d.coord(a).clone()).collect())
        .collect();
    let m: linalg::Matrix =
        config.moripairings.iter().map(|row| row.iter().map(|&v| int(v)).collect()).collect();
    let pairing = linalg::solve(&t, &m).ok_or_else(|| {
        GeometryError::Inconsistent("toric divisor classes do not match moripairings".into())
    })?;
    if linalg::rank(&pairing) != rank {
        return Err(GeometryError::Inconsistent("pairing between H^2 and curve classes is degenerate".into()));
    }
    let nef_pairing = pairing
        .iter()
        .map(|row| row.iter().map(|v| to_integer(v, "p.beta")).collect::<Result<Vec<_>, _>>())
        .collect::<Result<Vec<_>, _>>()?;

    let divisor = parse_coords(&ring, "D", &config.divisor)?;
    let degree_vector = |elem: &RingElement, what: &str| -> Result<Vec<i64>, GeometryError> {
        (0..rank)
            .map(|j| {
                let v = nef_basis
                    .iter()
                    .enumerate()
                    .fold(Rational::zero(), |acc, (a, &idx)| acc + elem.coord(idx) * int(nef_pairing[a][j]));
                to_integer(&v, what)
            })
            .collect()
    };
    let divisor_degrees = degree_vector(&divisor, "D.beta")?;
    if let Some((generator, &value)) = divisor_degrees.iter().enumerate().find(|(_, &v)| v < 0) {
        return Err(GeometryError::NotNef { generator, value: int(value) });
    }
    let anticanonical = toric_divisors
        .iter()
        .try_fold(RingElement::zero(&ring), |acc, d| acc.add(d))?;
    if let Some(given) = &config.anticanonical {
        let given = parse_coords(&ring, "anticanonical", given)?;
        if given != anticanonical {
            return Err(GeometryError::Inconsistent(
                "anticanonical class differs from the sum of toric divisors".into(),
            ));
        }
    }
    let anticanonical_degrees = degree_vector(&anticanonical, "c1.beta")?;
    let log_cy = divisor == anticanonical;
    let mut warnings = Vec::new();
    if !log_cy {
        warnings.push(format!(
            "{}: D is not anticanonical; potential and invariants are experimental",
            config.name
        ));
    }
    Ok(TargetGeometry {
        config,
        ring,
        nef_basis,
        nef_pairing,
        toric_divisors,
        mori_pairings: m.iter().map(|row| row.iter().map(|v| v.to_integer().to_i64().unwrap_or(0)).collect()).collect(),
        divisor,
        divisor_degrees,
        anticanonical,
        anticanonical_degrees,
        log_cy,
        warnings,
    })
}

pub fn load_builtin(name: &str) -> Result<TargetGeometry, GeometryError> {
    load_geometry(builtin_config(name)?)
}

impl TargetGeometry {
    pub fn name(&self) -> &str {
        &self.config.name
    }

    pub fn config(&self) -> &GeometryConfig {
        &self.config
    }

    pub fn ring(&self) -> &Arc<GradedRing> {
        &self.ring
    }

    /// Number of Mori generators (= rank of H^2).
    pub fn rank(&self) -> usize {
        self.nef_basis.len()
    }

    pub fn nef_basis(&self) -> Vec<RingElement> {
        self.nef_basis.iter().map(|&i| RingElement::basis(&self.ring, i)).collect()
    }

    pub fn nef_pairing(&self) -> &[Vec<i64>] {
        &self.nef_pairing
    }

    pub fn toric_divisors(&self) -> &[RingElement] {
        &self.toric_divisors
    }

    pub fn mori_pairings(&self) -> &[Vec<i64>] {
        &self.mori_pairings
    }

    pub fn divisor(&self) -> &RingElement {
        &self.divisor
    }

    pub fn anticanonical(&self) -> &RingElement {
        &self.anticanonical
    }

    pub fn is_log_cy(&self) -> bool {
        self.log_cy
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// `D . beta_j` for each Mori generator.
    pub fn divisor_degrees(&self) -> &[i64] {
        &self.divisor_degrees
    }

    pub fn d_degree(&self, beta: &CurveClass) -> i64 {
        dot(&self.divisor_degrees, beta)
    }

    pub fn c1_degree(&self, beta: &CurveClass) -> i64 {
        dot(&self.anticanonical_degrees, beta)
    }

    /// `D_i . beta` for the i-th toric divisor.
    pub fn toric_degree(&self, i: usize, beta: &CurveClass) -> i64 {
        dot(&self.mori_pairings[i], beta)
    }

    /// Intersection of a degree-1 class with a curve class.
    pub fn pairing(&self, class: &RingElement, beta: &CurveClass) -> Result<Rational, GeometryError> {
        if !class.is_homogeneous_of_degree(1) {
            return Err(GeometryError::Inconsistent("only divisor classes pair with curves".into()));
        }
        let mut acc = Rational::zero();
        for (a, &idx) in self.nef_basis.iter().enumerate() {
            acc += class.coord(idx) * int(dot(&self.nef_pairing[a], beta));
        }
        Ok(acc)
    }

    /// Positive `D`-degree weights of the Mori generators, if `D` is ample
    /// on every generator.
    pub fn positive_divisor_weights(&self) -> Option<Vec<u32>> {
        self.divisor_degrees.iter().map(|&d| u32::try_from(d).ok().filter(|&w| w > 0)).collect()
    }

    /// Largest `D . beta` over effective classes of total degree `<= order`.
    pub fn max_d_degree(&self, order: u32) -> i64 {
        self.divisor_degrees.iter().copied().max().unwrap_or(0).max(0) * i64::from(order)
    }
}

fn dot(weights: &[i64], beta: &CurveClass) -> i64 {
    weights.iter().zip(beta.components()).map(|(w, b)| w * b).sum()
}

/// Curve class `beta + n f` on `P`, with `beta` lifted along the zero
/// section so that `h . (beta + n f) = n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BundleClass {
    pub base: CurveClass,
    pub fiber: u32,
}

/// `P = P(O_X(-D) + O_X)` with `h = c_1(O_P(1))`.
#[derive(Debug, Clone)]
pub struct BundleGeometry {
    base: Arc<TargetGeometry>,
    ring: BundleRing,
}

pub fn build_p1_bundle(base: &Arc<TargetGeometry>) -> Result<BundleGeometry, GeometryError> {
    let ring = BundleRing::build(base.ring(), base.divisor())?;
    Ok(BundleGeometry { base: base.clone(), ring })
}

impl BundleGeometry {
    pub fn base(&self) -> &Arc<TargetGeometry> {
        &self.base
    }

    pub fn ring(&self) -> &BundleRing {
        &self.ring
    }

    pub fn h(&self) -> RingElement {
        self.ring.h()
    }

    pub fn fiber_class(&self) -> BundleClass {
        BundleClass { base: CurveClass::zero(self.base.rank()), fiber: 1 }
    }

    pub fn h_degree(&self, class: &BundleClass) -> i64 {
        i64::from(class.fiber)
    }

    /// `D . (beta + n f) = D . beta`, since `D` is pulled back from `X`.
    pub fn d_degree(&self, class: &BundleClass) -> i64 {
        self.base.d_degree(&class.base)
    }
}

/// Result of checking that each `z J_{X,beta}` has no `z^k` terms with
/// `k >= 0` for `beta != 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SmallJReport {
    pub checked: usize,
    /// Offending classes with the non-negative z-powers found.
    pub failures: Vec<(CurveClass, Vec<i32>)>,
}

impl SmallJReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Confirms the stripped toric J-function has the shape `z + O(1/z)` in
/// every degree up to `order` (so the toric mirror map is trivial).
pub fn validate_fano_small_j(x: &TargetGeometry, order: u32) -> Result<SmallJReport, GiventalError> {
    let mut failures = Vec::new();
    let classes = CurveClass::nonzero_effective_up_to(x.rank(), order);
    for beta in &classes {
        let j = givental::toric_j_coefficient(x, beta, givental::ZWindow::for_class(x, beta))?;
        let zj = j.times_z()?;
        let bad: Vec<i32> = zj.terms().map(|(m, _)| m.zpow).filter(|&p| p >= 0).collect();
        if !bad.is_empty() {
            failures.push((beta.clone(), bad));
        }
    }
    Ok(SmallJReport { checked: classes.len(), failures })
}
