//! Local side: one-point invariants `<[pt]>_{0,1,beta+f}` of
//! `E = O_P(-X_inf) + O_P(-X_inf)` from `exp(-g(-y))`, and their matching
//! against the relative invariants.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::Zero;
use thiserror::Error;

use crate::exactmath::rational::{int, sign};
use crate::exactmath::Rational;
use crate::geometry::{BundleGeometry, CurveClass, TargetGeometry};
use crate::mirror::{self, GSeries, MirrorError, MirrorMap, ThetaPotential};
use crate::wdvv::TwoPointTable;

#[derive(Debug, Error)]
pub enum LocalError {
    #[error(transparent)]
    Mirror(#[from] MirrorError),
    #[error("exponentiate-then-substitute and substitute-then-exponentiate disagree at {0}")]
    RouteMismatch(CurveClass),
}

/// `beta -> <[pt]>_{0,1,beta+f}^E` for effective `beta != 0`.
#[derive(Debug, Clone)]
pub struct LocalTable {
    pub entries: BTreeMap<CurveClass, Rational>,
    pub geometry: Arc<TargetGeometry>,
    pub order: u32,
}

impl LocalTable {
    pub fn get(&self, beta: &CurveClass) -> Rational {
        self.entries.get(beta).cloned().unwrap_or_else(Rational::zero)
    }
}

/// Reads the invariants off `1 + sum q^beta <[pt]>_{beta+f} = exp(-g(-y))`
/// with `y = y(q)` inverting `q^beta = y^beta exp(-D.beta g(-y))`.
pub fn local_one_point(p: &BundleGeometry, order: u32) -> Result<LocalTable, LocalError> {
    let g = mirror::compute_g(p.base(), order)?;
    local_one_point_from(&g)
}

/// Same as [`local_one_point`], starting from an already computed `g`.
pub fn local_one_point_from(g: &GSeries) -> Result<LocalTable, LocalError> {
    let x = g.geometry.clone();
    let order = g.order;
    mirror::check_sign_conventions(g)?;
    let correction = mirror::g_negated(g).neg();
    let map = MirrorMap::from_correction(&correction, x.divisor_degrees())?;
    let in_y = correction.exp().map_err(MirrorError::from)?;
    let series = map.to_q(&in_y)?;
    let other = map.to_q(&correction)?.exp().map_err(MirrorError::from)?;
    let mut entries = BTreeMap::new();
    for beta in CurveClass::nonzero_effective_up_to(x.rank(), order) {
        let e = beta.exponents().expect("effective");
        let value = series.coeff_beta(&e);
        if value != other.coeff_beta(&e) {
            return Err(LocalError::RouteMismatch(beta));
        }
        entries.insert(beta, value);
    }
    Ok(LocalTable { entries, geometry: x, order })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignMismatch {
    pub beta: CurveClass,
    pub theta: Rational,
    pub local: Rational,
    pub expected_theta: Rational,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignReport {
    pub checked: usize,
    pub mismatches: Vec<SignMismatch>,
}

impl SignReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// `theta_beta = (-1)^{n+1} local(beta)` with `n = D.beta - 1`.
pub fn verify_sign_correspondence(local: &LocalTable, theta: &ThetaPotential) -> SignReport {
    let x = &theta.geometry;
    let mut report = SignReport { checked: 0, mismatches: Vec::new() };
    for (beta, value) in &local.entries {
        report.checked += 1;
        let expected_theta = sign(x.d_degree(beta)) * value;
        let actual = theta.coeff(beta);
        if actual != expected_theta {
            report.mismatches.push(SignMismatch {
                beta: beta.clone(),
                theta: actual,
                local: value.clone(),
                expected_theta,
            });
        }
    }
    report
}

#[derive(Debug, Clone, PartialEq)]
pub struct RouteReport {
    pub checked: usize,
    /// `(beta, N_{1,n} from the table, n^2 theta_beta / n)`
    pub failures: Vec<(CurveClass, Rational, Rational)>,
}

impl RouteReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// `N_{1,n}` from the propagated table against `n^2 N_{n,1}` with
/// `N_{n,1}` read from the theta potential.
pub fn verify_wdvv_symmetry_route(theta: &ThetaPotential, table: &TwoPointTable) -> RouteReport {
    let inv = mirror::two_point_invariants(theta);
    let mut report = RouteReport { checked: 0, failures: Vec::new() };
    for (beta, n_n1) in &inv.values {
        let n = theta.geometry.d_degree(beta) - 1;
        let Ok(nu) = u32::try_from(n) else { continue };
        if !table.entries().contains_key(&(beta.clone(), 1, nu)) {
            continue;
        }
        report.checked += 1;
        let lhs = table.get(beta, 1, nu);
        let rhs = int(n * n) * n_n1;
        if lhs != rhs {
            report.failures.push((beta.clone(), lhs, rhs));
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_p1_bundle, load_builtin};
    use crate::wdvv::{propagate_table, Mode};

    fn bundle(name: &str) -> BundleGeometry {
        build_p1_bundle(&Arc::new(load_builtin(name).unwrap())).unwrap()
    }

    #[test]
    fn p2_local_values() {
        let local = local_one_point(&bundle("p2"), 4).unwrap();
        let got: Vec<Rational> = local.entries.values().cloned().collect();
        assert_eq!(got, [-2, 5, -32, 286].map(int).to_vec());
        assert!(!local.entries.contains_key(&CurveClass::new(vec![0])));
    }

    #[test]
    fn order_one_has_single_entry() {
        let local = local_one_point(&bundle("p2"), 1).unwrap();
        assert_eq!(local.entries.len(), 1);
        assert_eq!(local.get(&CurveClass::new(vec![1])), int(-2));
    }

    #[test]
    fn signs_match_theta() {
        for name in crate::geometry::BUILTIN_NAMES {
            let p = bundle(name);
            let local = local_one_point(&p, 4).unwrap();
            let theta = mirror::theta_potential(p.base(), 4).unwrap();
            let report = verify_sign_correspondence(&local, &theta);
            assert!(report.passed(), "{name}: {report:?}");
        }
    }

    #[test]
    fn perturbed_local_table_is_reported() {
        let p = bundle("p2");
        let mut local = local_one_point(&p, 3).unwrap();
        let theta = mirror::theta_potential(p.base(), 3).unwrap();
        let b = CurveClass::new(vec![2]);
        *local.entries.get_mut(&b).unwrap() += int(1);
        let report = verify_sign_correspondence(&local, &theta);
        assert_eq!(report.mismatches.len(), 1);
        assert_eq!(report.mismatches[0].beta, b);
        assert_eq!(report.mismatches[0].local, int(6));
        local.entries.clear();
        assert!(verify_sign_correspondence(&local, &theta).passed());
    }

    #[test]
    fn symmetry_route() {
        let x = Arc::new(load_builtin("p2").unwrap());
        let theta = mirror::theta_potential(&x, 3).unwrap();
        let seeds = mirror::two_point_invariants(&theta).values;
        let table = propagate_table(&x, &seeds, 3, Mode::Strict).unwrap();
        let report = verify_wdvv_symmetry_route(&theta, &table);
        assert_eq!(report.checked, 3);
        assert!(report.passed());
        let mut bad = seeds.clone();
        *bad.get_mut(&CurveClass::new(vec![1])).unwrap() += int(1);
        let table = propagate_table(&x, &bad, 3, Mode::Strict).unwrap();
        let report = verify_wdvv_symmetry_route(&theta, &table);
        assert_eq!(report.failures.len(), 1);
        assert_eq!(report.failures[0].0, CurveClass::new(vec![1]));
        let empty = TwoPointTable::empty(vec![3], 3, Mode::Strict);
        assert_eq!(verify_wdvv_symmetry_route(&theta, &empty).checked, 0);
    }
}
