//! Hypergeometric factors: stripped toric J-function coefficients, one-point
//! descendants, and the I-function blocks of `E = O_P(-X_inf) + O_P(-X_inf)`.

use std::sync::Arc;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::cohomology::{CohomologyError, GradedRing, RingElement};
use crate::exactmath::rational::int;
use crate::exactmath::{Rational, SeriesError, TruncSeries, Truncation};
use crate::geometry::{BundleGeometry, CurveClass, TargetGeometry};

#[derive(Debug, Error)]
pub enum GiventalError {
    #[error("curve class {0} is not effective")]
    NotEffective(CurveClass),
    #[error("out of range: D.beta = {0} but the descendant needs D.beta >= 2")]
    OutOfRange(i64),
    #[error("z window too small: {0}")]
    Window(SeriesError),
    #[error(transparent)]
    Series(SeriesError),
    #[error(transparent)]
    Ring(#[from] CohomologyError),
    #[error("descendant extraction for {beta}: {detail}")]
    Shape { beta: CurveClass, detail: String },
}

impl From<SeriesError> for GiventalError {
    fn from(e: SeriesError) -> Self {
        match e {
            SeriesError::ZWindow { .. } => GiventalError::Window(e),
            other => GiventalError::Series(other),
        }
    }
}

/// Laurent polynomial in `z` with cohomology-valued coefficients.
pub type Laurent = TruncSeries<Arc<GradedRing>>;

/// Capacity window for the powers of `z`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ZWindow {
    pub zmin: i32,
    pub zmax: i32,
}

impl ZWindow {
    pub fn new(zmin: i32, zmax: i32) -> Self {
        ZWindow { zmin, zmax }
    }

    /// Large enough for every product of factors with the given exponents
    /// in a ring of the given top degree.
    fn covering(exponents: impl IntoIterator<Item = i64>, top_degree: u32) -> Self {
        let (mut down, mut up) = (0i64, 0i64);
        for m in exponents {
            if m > 0 {
                down += m;
            } else {
                up -= m;
            }
        }
        let clamp = |v: i64| i32::try_from(v).unwrap_or(i32::MAX / 4);
        ZWindow { zmin: -clamp(down + i64::from(top_degree) + 1), zmax: clamp(up + 1) }
    }

    /// Window sufficient for `toric_j_coefficient(x, beta)`.
    pub fn for_class(x: &TargetGeometry, beta: &CurveClass) -> Self {
        let exps = (0..x.toric_divisors().len()).map(|i| x.toric_degree(i, beta));
        Self::covering(exps, x.ring().top_degree())
    }

    /// Window sufficient for every I_E block and the extraction product.
    pub fn for_bundle(p: &BundleGeometry, beta: &CurveClass, n: u32) -> Self {
        let x = p.base();
        let n = i64::from(n);
        let d = x.d_degree(beta);
        let exps = (0..x.toric_divisors().len())
            .map(|i| x.toric_degree(i, beta))
            .chain([n, n - d, -n, -n]);
        let w = Self::covering(exps, p.ring().ring().top_degree());
        ZWindow { zmin: w.zmin - 1, zmax: w.zmax + 1 }
    }

    fn truncation(&self) -> Truncation {
        Truncation::laurent(self.zmin, self.zmax)
    }
}

fn laurent_const(ring: &Arc<GradedRing>, window: ZWindow, c: RingElement) -> Laurent {
    TruncSeries::constant(ring.clone(), window.truncation(), c)
}

/// `c + a z`
fn linear(ring: &Arc<GradedRing>, window: ZWindow, c: &RingElement, a: i64) -> Result<Laurent, SeriesError> {
    let zterm = TruncSeries::from_terms(
        ring.clone(),
        window.truncation(),
        [(crate::exactmath::Monomial::one(0).with_z(1), RingElement::scalar(ring, int(a)))],
    )?;
    laurent_const(ring, window, c.clone()).add(&zterm)
}

/// `prod_{a <= 0}(c + az) / prod_{a <= m}(c + az)`: the reciprocal of
/// `prod_{a=1}^{m}` for `m >= 0`, the product over `m < a <= 0` otherwise.
pub fn pochhammer_ratio(c: &RingElement, m: i64, window: ZWindow) -> Result<Laurent, GiventalError> {
    let ring = c.ring();
    let mut acc = laurent_const(ring, window, RingElement::one(ring));
    if m >= 0 {
        for a in 1..=m {
            acc = acc.mul(&linear(ring, window, c, a)?.inverse()?)?;
        }
    } else {
        for a in (m + 1)..=0 {
            acc = acc.mul(&linear(ring, window, c, a)?)?;
        }
    }
    Ok(acc)
}

/// Degree-`beta` factor of the stripped J-function of a toric target.
#[derive(Debug, Clone, PartialEq)]
pub struct JCoefficient {
    pub beta: CurveClass,
    pub laurent: Laurent,
}

impl JCoefficient {
    pub fn coeff(&self, zpow: i32) -> RingElement {
        self.laurent.coeff_z(zpow)
    }

    /// `z * J_beta`, in a window shifted up by one.
    pub fn times_z(&self) -> Result<Laurent, GiventalError> {
        let (zmin, zmax) = self.laurent.truncation().zwindow();
        let wide = self.laurent.truncate_to(&Truncation::laurent(zmin, zmax + 1))?;
        Ok(wide.shift_z(1)?)
    }

    pub fn terms(&self) -> impl Iterator<Item = (i32, &RingElement)> {
        self.laurent.terms().map(|(m, c)| (m.zpow, c))
    }
}

pub fn toric_j_coefficient(
    x: &TargetGeometry,
    beta: &CurveClass,
    window: ZWindow,
) -> Result<JCoefficient, GiventalError> {
    if !beta.is_effective() {
        return Err(GiventalError::NotEffective(beta.clone()));
    }
    let ring = x.ring();
    let mut acc = laurent_const(ring, window, RingElement::one(ring));
    for (i, d) in x.toric_divisors().iter().enumerate() {
        let m = x.toric_degree(i, beta);
        if m != 0 {
            acc = acc.mul(&pochhammer_ratio(d, m, window)?)?;
        }
    }
    Ok(JCoefficient { beta: beta.clone(), laurent: acc })
}

/// `<[pt] psi^{D.beta-2}>_{0,1,beta}`, read off `z J_beta` at
/// `z^{-(D.beta-1)}`.
pub fn one_point_descendant(x: &TargetGeometry, beta: &CurveClass) -> Result<Rational, GiventalError> {
    if !beta.is_effective() {
        return Err(GiventalError::NotEffective(beta.clone()));
    }
    let d = x.d_degree(beta);
    if d < 2 {
        return Err(GiventalError::OutOfRange(d));
    }
    let j = toric_j_coefficient(x, beta, ZWindow::for_class(x, beta))?;
    let zj = j.times_z()?;
    let target = 1 - i32::try_from(d).map_err(|_| GiventalError::OutOfRange(d))?;
    let expected_slot = 1 - x.c1_degree(beta);
    for (m, c) in zj.terms() {
        let id = c.identity_component();
        if !id.is_zero() && i64::from(m.zpow) != expected_slot {
            return Err(GiventalError::Shape {
                beta: beta.clone(),
                detail: format!("identity component at z^{} (expected only z^{expected_slot})", m.zpow),
            });
        }
        // terms of the prefactor exp(sum p_i log q_i / z) carry some p_i
        for p in x.nef_basis() {
            if !p.mul(c)?.identity_component().is_zero() {
                return Err(GiventalError::Shape {
                    beta: beta.clone(),
                    detail: format!("prefactor term reaches the identity slot at z^{}", m.zpow),
                });
            }
        }
    }
    Ok(zj.coeff_z(target).identity_component())
}

/// The three products of the I_E summand of degree `beta + n f`.
#[derive(Debug, Clone, PartialEq)]
pub struct IEFactorization {
    pub beta: CurveClass,
    pub n: u32,
    /// `prod_{a<=0}(h+az) / prod_{a<=n}(h+az)`
    pub block_h: Laurent,
    /// same with `h - D` and upper bound `n - D.beta`
    pub block_hd: Laurent,
    /// one copy of the `-h` factor, upper bound `-n`
    pub block_negh_single: Laurent,
    /// `block_negh_single` squared
    pub block_negh: Laurent,
}

impl IEFactorization {
    pub fn assemble(&self) -> Result<Laurent, GiventalError> {
        Ok(self.block_h.mul(&self.block_hd)?.mul(&self.block_negh)?)
    }
}

pub fn i_function_e(
    p: &BundleGeometry,
    beta: &CurveClass,
    n: u32,
    window: ZWindow,
) -> Result<IEFactorization, GiventalError> {
    if !beta.is_effective() {
        return Err(GiventalError::NotEffective(beta.clone()));
    }
    let bundle = p.ring();
    let h = bundle.h();
    let h_minus_d = h.sub(&bundle.lift(bundle.divisor())?)?;
    let n_i = i64::from(n);
    let block_h = pochhammer_ratio(&h, n_i, window)?;
    let block_hd = pochhammer_ratio(&h_minus_d, n_i - p.base().d_degree(beta), window)?;
    let block_negh_single = pochhammer_ratio(&h.neg(), -n_i, window)?;
    let block_negh = block_negh_single.mul(&block_negh_single)?;
    Ok(IEFactorization { beta: beta.clone(), n, block_h, block_hd, block_negh_single, block_negh })
}

/// Outcome of the vanishing check on the `[1]`-component at `1/z`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtractionReport {
    pub checked: Vec<CurveClass>,
    pub beta_zero_value: Rational,
    /// `(beta, nonzero value found)`
    pub violations: Vec<(CurveClass, Rational)>,
    /// Classes where the closed form of the (h-D)-block disagreed.
    pub block_mismatches: Vec<CurveClass>,
}

impl ExtractionReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty() && self.block_mismatches.is_empty() && self.beta_zero_value.is_one()
    }
}

/// `(-1)^{D.beta-1} prod_{0<=a<=D.beta-2}(D - h + az)`
fn closed_form_hd(p: &BundleGeometry, d: i64, window: ZWindow) -> Result<Laurent, GiventalError> {
    let bundle = p.ring();
    let ring = bundle.ring();
    let d_minus_h = bundle.lift(bundle.divisor())?.sub(&bundle.h())?;
    let mut acc = laurent_const(ring, window, RingElement::one(ring));
    for a in 0..=(d - 2) {
        acc = acc.mul(&linear(ring, window, &d_minus_h, a)?)?;
    }
    Ok(if (d - 1) % 2 == 0 { acc } else { acc.neg() })
}

/// For each effective `beta` with `0 < D.beta <= max_d_degree`, checks that
/// `collapse_h(z J_beta / (h+z) * (h-D)-block)` has no `[1]`-component at
/// `1/z`, and that the `beta = 0` term contributes exactly 1.
pub fn reduced_extraction_check(p: &BundleGeometry, max_d_degree: u32) -> Result<ExtractionReport, GiventalError> {
    let x = p.base();
    let bundle = p.ring();
    let classes = x.positive_divisor_weights().map_or_else(
        || CurveClass::nonzero_effective_up_to(x.rank(), max_d_degree),
        |w| {
            let minw = w.iter().copied().min().unwrap_or(1);
            CurveClass::nonzero_effective_up_to(x.rank(), max_d_degree / minw)
        },
    );
    let mut report = ExtractionReport {
        checked: Vec::new(),
        beta_zero_value: Rational::zero(),
        violations: Vec::new(),
        block_mismatches: Vec::new(),
    };
    let zero = CurveClass::zero(x.rank());
    report.beta_zero_value = extraction_value(p, &zero)?;
    for beta in classes {
        let d = x.d_degree(&beta);
        if d <= 0 || d > i64::from(max_d_degree) {
            continue;
        }
        let window = ZWindow::for_bundle(p, &beta, 1);
        let ie = i_function_e(p, &beta, 1, window)?;
        if ie.block_hd != closed_form_hd(p, d, window)?
            || ie.block_negh.coeff_z(0) != bundle.h().mul(&bundle.h())?
        {
            report.block_mismatches.push(beta.clone());
        }
        let value = extraction_value(p, &beta)?;
        if !value.is_zero() {
            report.violations.push((beta.clone(), value));
        }
        report.checked.push(beta);
    }
    Ok(report)
}

fn extraction_value(p: &BundleGeometry, beta: &CurveClass) -> Result<Rational, GiventalError> {
    let x = p.base();
    let bundle = p.ring();
    let ring = bundle.ring();
    let window = ZWindow::for_bundle(p, beta, 1);
    let jx = toric_j_coefficient(x, beta, ZWindow::for_class(x, beta))?;
    let mut lifted_terms = Vec::new();
    for (m, c) in jx.laurent.terms() {
        lifted_terms.push((m.clone().with_z(m.zpow + 1), bundle.lift(c)?));
    }
    let zj = TruncSeries::from_terms(ring.clone(), window.truncation(), lifted_terms)?;
    let ie = i_function_e(p, beta, 1, window)?;
    let product = zj.mul(&ie.block_h)?.mul(&ie.block_hd)?;
    let slot = bundle.collapse_h(&product.coeff_z(-1))?;
    Ok(slot.identity_component())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactmath::rational::frac;
    use crate::geometry::{build_p1_bundle, load_builtin};

    fn p2() -> Arc<TargetGeometry> {
        Arc::new(load_builtin("p2").unwrap())
    }

    #[test]
    fn j_at_zero_is_one() {
        for name in crate::geometry::BUILTIN_NAMES {
            let x = load_builtin(name).unwrap();
            let beta = CurveClass::zero(x.rank());
            let j = toric_j_coefficient(&x, &beta, ZWindow::for_class(&x, &beta)).unwrap();
            assert_eq!(j.laurent.len(), 1);
            assert_eq!(j.coeff(0), RingElement::one(x.ring()));
        }
    }

    #[test]
    fn j_of_line_in_p2() {
        let x = p2();
        let beta = CurveClass::new(vec![1]);
        let j = toric_j_coefficient(&x, &beta, ZWindow::for_class(&x, &beta)).unwrap();
        let ring = x.ring();
        let p = RingElement::basis(ring, 1);
        let p2 = RingElement::basis(ring, 2);
        assert_eq!(j.coeff(-3), RingElement::one(ring));
        assert_eq!(j.coeff(-4), p.scale(&int(-3)));
        assert_eq!(j.coeff(-5), p2.scale(&int(6)));
        assert_eq!(j.laurent.len(), 3);
        assert_eq!(j.laurent.max_zpow(), Some(-3));
    }

    #[test]
    fn j_of_ruling_in_p1xp1() {
        let x = load_builtin("p1xp1").unwrap();
        let beta = CurveClass::new(vec![1, 0]);
        let j = toric_j_coefficient(&x, &beta, ZWindow::for_class(&x, &beta)).unwrap();
        let p1 = RingElement::basis(x.ring(), 1);
        assert_eq!(j.coeff(-2), RingElement::one(x.ring()));
        assert_eq!(j.coeff(-3), p1.scale(&int(-2)));
        assert_eq!(j.laurent.len(), 2);
    }

    #[test]
    fn window_overflow_is_an_error() {
        let x = p2();
        let beta = CurveClass::new(vec![2]);
        let err = toric_j_coefficient(&x, &beta, ZWindow::new(-4, 0)).unwrap_err();
        assert!(matches!(err, GiventalError::Window(_)));
    }

    #[test]
    fn descendants() {
        let x = p2();
        let expected = [frac(1, 1), frac(1, 8), frac(1, 216)];
        for (d, want) in (1..=3).zip(expected) {
            assert_eq!(one_point_descendant(&x, &CurveClass::new(vec![d])).unwrap(), want);
        }
        let err = one_point_descendant(&x, &CurveClass::new(vec![0])).unwrap_err();
        assert!(err.to_string().contains("out of range"));
        let y = load_builtin("p1xp1").unwrap();
        assert_eq!(one_point_descendant(&y, &CurveClass::new(vec![1, 0])).unwrap(), int(1));
        assert_eq!(one_point_descendant(&y, &CurveClass::new(vec![1, 1])).unwrap(), int(1));
        assert_eq!(one_point_descendant(&y, &CurveClass::new(vec![2, 1])).unwrap(), frac(1, 4));
    }

    #[test]
    fn ie_blocks_at_n_one() {
        let x = p2();
        let p = build_p1_bundle(&x).unwrap();
        let beta = CurveClass::new(vec![1]);
        let window = ZWindow::for_bundle(&p, &beta, 1);
        let ie = i_function_e(&p, &beta, 1, window).unwrap();
        let ring = p.ring().ring();
        let h = p.h();
        let expected = linear(ring, window, &h, 1).unwrap().inverse().unwrap();
        assert_eq!(ie.block_h, expected);
        assert_eq!(ie.block_negh.len(), 1);
        assert_eq!(ie.block_negh.coeff_z(0), h.mul(&h).unwrap());
        assert_eq!(ie.block_negh, ie.block_negh_single.mul(&ie.block_negh_single).unwrap());
    }

    #[test]
    fn ie_blocks_at_n_zero() {
        let x = p2();
        let p = build_p1_bundle(&x).unwrap();
        let beta = CurveClass::new(vec![1]);
        let window = ZWindow::for_bundle(&p, &beta, 0);
        let ie = i_function_e(&p, &beta, 0, window).unwrap();
        let one = RingElement::one(p.ring().ring());
        assert_eq!(ie.block_h.coeff_z(0), one);
        assert_eq!(ie.block_h.len(), 1);
        assert_eq!(ie.block_negh.coeff_z(0), one);
        // (h-D)(h-D-z)(h-D-2z)
        assert_eq!(ie.block_hd.max_zpow(), Some(2));
    }

    #[test]
    fn extraction_over_both_builtins() {
        for name in crate::geometry::BUILTIN_NAMES {
            let x = Arc::new(load_builtin(name).unwrap());
            let p = build_p1_bundle(&x).unwrap();
            let report = reduced_extraction_check(&p, 6).unwrap();
            assert!(report.passed(), "{name}: {report:?}");
            assert_eq!(report.beta_zero_value, int(1));
            assert!(!report.checked.is_empty());
        }
    }
}
