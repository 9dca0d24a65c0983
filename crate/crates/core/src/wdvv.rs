//! Relative WDVV recursion for the two-point invariants
//! `N_{k,p}^beta = <[pt]_k, [1]_p>_{0,2,beta}`, and the checks built on it.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactmath::rational::int;
use crate::exactmath::Rational;
use crate::geometry::{CurveClass, TargetGeometry};

#[derive(Debug, Error, PartialEq)]
pub enum WdvvError {
    #[error("missing seed N_(n,1) for {0}")]
    MissingSeed(CurveClass),
    #[error("unknown mode {0:?} (expected strict or formal)")]
    UnknownMode(String),
}

/// How the quadratic sums of the recursion are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Factors must satisfy `D.beta' = k' + p' + 1`; stored entries never
    /// do, so the quadratic sums drop out and the recursion is linear.
    #[default]
    Strict,
    /// Factors are read from the stored table, zero when absent.
    Formal,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Strict => "strict",
            Mode::Formal => "formal",
        })
    }
}

impl FromStr for Mode {
    type Err = WdvvError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "strict" => Ok(Mode::Strict),
            "formal" => Ok(Mode::Formal),
            other => Err(WdvvError::UnknownMode(other.to_string())),
        }
    }
}

pub type EntryKey = (CurveClass, u32, u32);

/// Entries `N_{k,p}^beta` with `k + p = D.beta`, `k, p >= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoPointTable {
    entries: BTreeMap<EntryKey, Rational>,
    mode: Mode,
    order: u32,
    divisor_degrees: Vec<i64>,
}

impl TwoPointTable {
    pub fn empty(divisor_degrees: Vec<i64>, order: u32, mode: Mode) -> Self {
        TwoPointTable { entries: BTreeMap::new(), mode, order, divisor_degrees }
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn get(&self, beta: &CurveClass, k: u32, p: u32) -> Rational {
        self.entries.get(&(beta.clone(), k, p)).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn set(&mut self, beta: &CurveClass, k: u32, p: u32, value: Rational) {
        self.entries.insert((beta.clone(), k, p), value);
    }

    pub fn entries(&self) -> &BTreeMap<EntryKey, Rational> {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn d_degree(&self, beta: &CurveClass) -> i64 {
        self.divisor_degrees.iter().zip(beta.components()).map(|(w, b)| w * b).sum()
    }

    /// Classes present in the table.
    pub fn classes(&self) -> Vec<CurveClass> {
        let mut out: Vec<CurveClass> = self.entries.keys().map(|(b, _, _)| b.clone()).collect();
        out.sort();
        out.dedup();
        out
    }

    pub fn scaled(&self, lambda: &Rational) -> Self {
        let entries = self.entries.iter().map(|(k, v)| (k.clone(), v * lambda)).collect();
        TwoPointTable { entries, ..self.clone() }
    }

    /// Stored entry under the mode's factor filter.
    fn factor(&self, beta: &CurveClass, k: u32, p: u32) -> Rational {
        match self.mode {
            Mode::Strict if self.d_degree(beta) != i64::from(k + p + 1) => Rational::zero(),
            _ => self.get(beta, k, p),
        }
    }

    /// Ordered splittings `beta = beta1 + beta2` into nonzero effective parts.
    fn splittings(beta: &CurveClass) -> Vec<(CurveClass, CurveClass)> {
        let max = u32::try_from(beta.total_degree()).unwrap_or(0);
        CurveClass::nonzero_effective_up_to(beta.rank(), max)
            .into_iter()
            .filter_map(|b1| {
                let b2 = beta.sub(&b1);
                (b2.is_effective() && !b2.is_zero()).then_some((b1, b2))
            })
            .collect()
    }

    /// `sum_{a+b=k} sum ab N_{a,1}^{b1} N_{b,p}^{b2}`
    fn quadratic_left(&self, beta: &CurveClass, k: u32, p: u32) -> Rational {
        let mut acc = Rational::zero();
        for (b1, b2) in Self::splittings(beta) {
            for a in 1..k {
                let b = k - a;
                let f = self.factor(&b1, a, 1);
                if f.is_zero() {
                    continue;
                }
                acc += int(i64::from(a * b)) * f * self.factor(&b2, b, p);
            }
        }
        acc
    }

    /// `sum_{r=1}^{p-1} (p-r) sum N_{p-r,1}^{b1} k N_{k,r}^{b2}`
    fn quadratic_right(&self, beta: &CurveClass, k: u32, p: u32) -> Rational {
        let mut acc = Rational::zero();
        for (b1, b2) in Self::splittings(beta) {
            for r in 1..p {
                let f = self.factor(&b1, p - r, 1);
                if f.is_zero() {
                    continue;
                }
                acc += int(i64::from((p - r) * k)) * f * self.factor(&b2, k, r);
            }
        }
        acc
    }

    /// `k N_{k,p+1} - (k+1) N_{k+1,p} - n N_{n,1} - Q_left + Q_right` with
    /// `n = k + p = D.beta - 1`.
    pub fn residual(&self, beta: &CurveClass, k: u32, p: u32) -> Rational {
        let n = k + p;
        int(i64::from(k)) * self.get(beta, k, p + 1)
            - int(i64::from(k + 1)) * self.get(beta, k + 1, p)
            - int(i64::from(n)) * self.get(beta, n, 1)
            - self.quadratic_left(beta, k, p)
            + self.quadratic_right(beta, k, p)
    }
}

/// Seeds `beta -> N_{n,1}^beta` from the theta potential.
pub type Seeds = BTreeMap<CurveClass, Rational>;

/// Classes carrying a two-point row: effective, total degree `<= order`,
/// `D.beta >= 2`, ordered by `D.beta`.
pub fn row_classes(x: &TargetGeometry, order: u32) -> Vec<CurveClass> {
    let mut classes: Vec<CurveClass> = CurveClass::nonzero_effective_up_to(x.rank(), order)
        .into_iter()
        .filter(|b| x.d_degree(b) >= 2)
        .collect();
    classes.sort_by_key(|b| (x.d_degree(b), b.clone()));
    classes
}

/// Solves the recursion downward in `k` for every row class, in order of
/// increasing `D.beta`.
pub fn propagate_table(x: &TargetGeometry, seeds: &Seeds, order: u32, mode: Mode) -> Result<TwoPointTable, WdvvError> {
    let mut table = TwoPointTable::empty(x.divisor_degrees().to_vec(), order, mode);
    for beta in row_classes(x, order) {
        let n = u32::try_from(x.d_degree(&beta) - 1).expect("D.beta >= 2");
        let seed = seeds.get(&beta).ok_or_else(|| WdvvError::MissingSeed(beta.clone()))?;
        table.set(&beta, n, 1, seed.clone());
        for k in (1..n).rev() {
            let p = n - k;
            let rhs = int(i64::from(k + 1)) * table.get(&beta, k + 1, p)
                + int(i64::from(n)) * seed
                + table.quadratic_left(&beta, k, p)
                - table.quadratic_right(&beta, k, p);
            table.set(&beta, k, p + 1, rhs / int(i64::from(k)));
        }
    }
    Ok(table)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    pub equations: usize,
    /// Nonzero residuals with their `(beta, k, p)`.
    pub nonzero: Vec<(EntryKey, Rational)>,
}

impl ResidualReport {
    pub fn passed(&self) -> bool {
        self.nonzero.is_empty()
    }
}

/// Re-evaluates every equation `(beta, k, p)` with `k + p + 1 = D.beta`,
/// `total degree(beta) <= order`.
pub fn check_wdvv_identity(table: &TwoPointTable, x: &TargetGeometry, order: u32) -> ResidualReport {
    let mut report = ResidualReport { equations: 0, nonzero: Vec::new() };
    for beta in row_classes(x, order) {
        let n = u32::try_from(x.d_degree(&beta) - 1).expect("D.beta >= 2");
        for k in 1..n {
            let p = n - k;
            report.equations += 1;
            let r = table.residual(&beta, k, p);
            if !r.is_zero() {
                report.nonzero.push(((beta.clone(), k, p), r));
            }
        }
    }
    report
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryFailure {
    pub beta: CurveClass,
    pub n: u32,
    pub n_1n: Rational,
    pub n_n1: Rational,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryReport {
    pub rows: usize,
    pub failures: Vec<SymmetryFailure>,
}

impl SymmetryReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// `N_{1,n} = n^2 N_{n,1}` on every complete row.
pub fn check_n2_symmetry(table: &TwoPointTable) -> SymmetryReport {
    let mut report = SymmetryReport { rows: 0, failures: Vec::new() };
    for beta in table.classes() {
        let Ok(n) = u32::try_from(table.d_degree(&beta) - 1) else { continue };
        if n == 0 || !(1..=n).all(|k| table.entries.contains_key(&(beta.clone(), k, n + 1 - k))) {
            continue;
        }
        report.rows += 1;
        let n_n1 = table.get(&beta, n, 1);
        let n_1n = table.get(&beta, 1, n);
        if n_1n != int(i64::from(n * n)) * &n_n1 {
            report.failures.push(SymmetryFailure { beta, n, n_1n, n_n1 });
        }
    }
    report
}

/// Comparison of strict and formal propagation from the same seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeComparison {
    /// `N_{1,n}` agrees on every row.
    pub final_rows_agree: bool,
    /// Entries that differ between the modes.
    pub differing_entries: Vec<EntryKey>,
}

pub fn compare_modes(x: &TargetGeometry, seeds: &Seeds, order: u32) -> Result<ModeComparison, WdvvError> {
    let strict = propagate_table(x, seeds, order, Mode::Strict)?;
    let formal = propagate_table(x, seeds, order, Mode::Formal)?;
    let differing_entries: Vec<EntryKey> = strict
        .entries
        .iter()
        .filter(|(key, v)| formal.entries.get(*key) != Some(*v))
        .map(|(key, _)| key.clone())
        .collect();
    let final_rows_agree = differing_entries.iter().all(|(_, k, _)| *k != 1);
    Ok(ModeComparison { final_rows_agree, differing_entries })
}
