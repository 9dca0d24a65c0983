use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use serde_json::{json, Map, Value};

use thetaforge::exactmath::{format_rational, parse_rational, Monomial, Rational};
use thetaforge::geometry::{build_p1_bundle, load_builtin, load_geometry, CurveClass, GeometryConfig, TargetGeometry};
use thetaforge::givental::reduced_extraction_check;
use thetaforge::localgw::{local_one_point_from, verify_sign_correspondence, verify_wdvv_symmetry_route};
use thetaforge::mirror::{
    build_mirror_map, check_sign_conventions, compute_g, theta_from, two_point_invariants, GSeries, Series,
    ThetaPotential,
};
use thetaforge::wdvv::{check_n2_symmetry, check_wdvv_identity, compare_modes, propagate_table, Mode};

use crate::cache::{Cache, CacheKey};
use crate::output::{sha256_hex, Table};

#[derive(Debug)]
pub enum CliError {
    Geometry(String),
    Pipeline(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Geometry(_) => 2,
            CliError::Pipeline(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Geometry(m) | CliError::Pipeline(m) => m,
        }
    }
}

fn pipeline<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Pipeline(e.to_string())
}

/// A built-in name, or a path to a JSON geometry config.
pub fn load_target(target: &str) -> Result<(Arc<TargetGeometry>, String), CliError> {
    let looks_like_path = target.ends_with(".json") || target.contains('/') || Path::new(target).is_file();
    let config = if looks_like_path {
        let text = std::fs::read_to_string(target)
            .map_err(|e| CliError::Geometry(format!("cannot read geometry file {target}: {e}")))?;
        GeometryConfig::from_json(&text).map_err(|e| CliError::Geometry(e.to_string()))?
    } else {
        load_builtin(target).map_err(|e| CliError::Geometry(e.to_string()))?.config().clone()
    };
    let hash = sha256_hex(config.canonical_json().as_bytes());
    let x = load_geometry(config).map_err(|e| CliError::Geometry(e.to_string()))?;
    Ok((Arc::new(x), hash))
}

pub struct Context {
    pub geometry: Arc<TargetGeometry>,
    pub hash: String,
    pub order: u32,
    pub cache: Cache,
    pub stages: Vec<String>,
    pub cache_hits: Vec<String>,
}

fn coefficient_map(entries: impl IntoIterator<Item = (CurveClass, Rational)>) -> Value {
    let mut m = Map::new();
    for (beta, c) in entries {
        m.insert(beta.to_string(), Value::String(format_rational(&c)));
    }
    Value::Object(m)
}

fn series_entries(s: &Series) -> Vec<(CurveClass, Rational)> {
    let mut v: Vec<(CurveClass, Rational)> =
        s.terms().map(|(m, c): (&Monomial, &Rational)| (CurveClass::from_exponents(&m.beta), c.clone())).collect();
    v.sort_by(|a, b| a.0.cmp(&b.0));
    v
}

impl Context {
    pub fn g(&mut self) -> Result<GSeries, CliError> {
        let key = CacheKey { geometry_hash: self.hash.clone(), stage: "g".into(), order: self.order };
        if let Some(stored) = self.cache.load(&key) {
            if let Some(g) = self.g_from_cache(&stored) {
                self.stages.push("g".into());
                self.cache_hits.push("g".into());
                return Ok(g);
            }
            eprintln!("warning: ignoring unusable cache entry {}; recomputing", self.cache.path(&key).display());
        }
        let g = compute_g(&self.geometry, self.order).map_err(pipeline)?;
        let data = g.coefficients().into_iter().map(|(b, c)| (b.to_string(), format_rational(&c))).collect();
        self.cache.store(&key, &data);
        self.stages.push("g".into());
        Ok(g)
    }

    fn g_from_cache(&self, stored: &BTreeMap<String, String>) -> Option<GSeries> {
        let mut coeffs = BTreeMap::new();
        for (b, c) in stored {
            coeffs.insert(CurveClass::parse(b)?, parse_rational(c).ok()?);
        }
        GSeries::from_coefficients(&self.geometry, self.order, &coeffs).ok()
    }

    pub fn theta(&mut self) -> Result<ThetaPotential, CliError> {
        if self.order == 0 {
            return thetaforge::mirror::theta_potential(&self.geometry, 0).map_err(pipeline);
        }
        let g = self.g()?;
        check_sign_conventions(&g).map_err(pipeline)?;
        let mirror = build_mirror_map(&g).map_err(pipeline)?;
        self.stages.push("mirror-map".into());
        let theta = theta_from(&g, &mirror).map_err(pipeline)?;
        self.stages.push("theta".into());
        Ok(theta)
    }

    pub fn compute_g(&mut self) -> Result<Table, CliError> {
        let g = self.g()?;
        let entries: Vec<_> = g.coefficients().into_iter().collect();
        let rows = entries.iter().map(|(b, c)| vec![b.to_string(), format_rational(c)]).collect();
        Ok(Table { json: coefficient_map(entries), header: vec!["beta", "value"], rows })
    }

    pub fn mirror_map(&mut self) -> Result<Table, CliError> {
        let g = self.g()?;
        let m = build_mirror_map(&g).map_err(pipeline)?;
        self.stages.push("mirror-map".into());
        let mut forward = Map::new();
        let mut inverse = Map::new();
        let mut rows = Vec::new();
        for (j, (f, i)) in m.forward.iter().zip(&m.inverse).enumerate() {
            let (qname, yname) = (format!("q{}", j + 1), format!("y{}", j + 1));
            for (b, c) in series_entries(f) {
                rows.push(vec!["forward".into(), qname.clone(), b.to_string(), format_rational(&c)]);
            }
            for (b, c) in series_entries(i) {
                rows.push(vec!["inverse".into(), yname.clone(), b.to_string(), format_rational(&c)]);
            }
            forward.insert(qname, coefficient_map(series_entries(f)));
            inverse.insert(yname, coefficient_map(series_entries(i)));
        }
        Ok(Table {
            json: json!({ "forward": forward, "inverse": inverse, "iterations": m.iterations }),
            header: vec!["direction", "variable", "beta", "value"],
            rows,
        })
    }

    pub fn theta_table(&mut self) -> Result<Table, CliError> {
        let theta = self.theta()?;
        let inv = two_point_invariants(&theta);
        let mut rows = Vec::new();
        let mut json_rows = Vec::new();
        for (beta, c) in theta.rows().into_iter().filter(|(b, _)| !b.is_zero()) {
            let d = self.geometry.d_degree(&beta);
            let n_n1 = inv.values.get(&beta).map(format_rational).unwrap_or_default();
            let row = vec![
                beta.to_string(),
                d.to_string(),
                (d - 1).to_string(),
                format_rational(&c),
                n_n1.clone(),
            ];
            json_rows.push(json!({
                "beta": beta.to_string(),
                "D.beta": d,
                "n": d - 1,
                "theta_coeff": format_rational(&c),
                "N_n1": if n_n1.is_empty() { Value::Null } else { Value::String(n_n1) },
            }));
            rows.push(row);
        }
        Ok(Table {
            json: json!({ "constant_term": format_rational(&theta.series.constant_term()), "rows": json_rows }),
            header: vec!["beta", "D.beta", "n", "theta_coeff", "N_n1"],
            rows,
        })
    }

    fn seeds(&mut self) -> Result<(ThetaPotential, BTreeMap<CurveClass, Rational>), CliError> {
        let theta = self.theta()?;
        let seeds = two_point_invariants(&theta).values;
        Ok((theta, seeds))
    }

    pub fn two_point_table(&mut self, mode: Mode) -> Result<Table, CliError> {
        let (_, seeds) = self.seeds()?;
        let table = propagate_table(&self.geometry, &seeds, self.order, mode).map_err(pipeline)?;
        self.stages.push(format!("wdvv ({mode})"));
        let mut rows = Vec::new();
        let mut json_rows = Vec::new();
        for ((beta, k, p), v) in table.entries() {
            rows.push(vec![beta.to_string(), k.to_string(), p.to_string(), format_rational(v), mode.to_string()]);
            json_rows.push(json!({ "beta": beta.to_string(), "k": k, "p": p, "value": format_rational(v) }));
        }
        Ok(Table {
            json: json!({ "mode": mode.to_string(), "entries": json_rows }),
            header: vec!["beta", "k", "p", "value", "mode"],
            rows,
        })
    }

    pub fn local_invariants(&mut self) -> Result<Table, CliError> {
        let g = self.g()?;
        let local = local_one_point_from(&g).map_err(pipeline)?;
        self.stages.push("local".into());
        let rows = local
            .entries
            .iter()
            .map(|(b, v)| vec![b.to_string(), self.geometry.d_degree(b).to_string(), format_rational(v)])
            .collect();
        Ok(Table {
            json: coefficient_map(local.entries.clone()),
            header: vec!["beta", "D.beta", "value"],
            rows,
        })
    }

    /// Runs every consistency check; the flag is true iff all pass.
    pub fn verify(&mut self, mode: Mode) -> Result<(Table, bool), CliError> {
        let mut checks: Vec<(&'static str, bool, String)> = Vec::new();
        let x = self.geometry.clone();
        let bundle = build_p1_bundle(&x).map_err(|e| CliError::Geometry(e.to_string()))?;
        let max_d = u32::try_from(x.max_d_degree(self.order)).unwrap_or(u32::MAX);
        let extraction = reduced_extraction_check(&bundle, max_d).map_err(pipeline)?;
        checks.push((
            "extraction",
            extraction.passed(),
            format!(
                "{} classes with D.beta <= {max_d}, beta=0 term {}, violations {}",
                extraction.checked.len(),
                format_rational(&extraction.beta_zero_value),
                extraction.violations.len() + extraction.block_mismatches.len()
            ),
        ));
        if self.order == 0 {
            let passed = checks.iter().all(|c| c.1);
            return Ok((checks_table(&checks, passed), passed));
        }
        let g = self.g()?;
        let signs = check_sign_conventions(&g);
        checks.push((
            "sign-conventions",
            signs.is_ok(),
            match &signs {
                Ok(s) => format!("literal y -> -y agrees with display: {}", s.literal_matches_display),
                Err(e) => e.to_string(),
            },
        ));
        let mirror = build_mirror_map(&g).map_err(pipeline)?;
        let trip = mirror.verify_round_trip();
        checks.push((
            "mirror-round-trip",
            trip.is_ok(),
            trip.err().map_or_else(|| format!("{} iterations", mirror.iterations), |e| e.to_string()),
        ));
        let theta = theta_from(&g, &mirror).map_err(pipeline)?;
        let local = local_one_point_from(&g).map_err(pipeline)?;
        let sc = verify_sign_correspondence(&local, &theta);
        checks.push((
            "sign-correspondence",
            sc.passed(),
            format!("{} classes, {} mismatches", sc.checked, sc.mismatches.len()),
        ));
        let seeds = two_point_invariants(&theta).values;
        let table = propagate_table(&x, &seeds, self.order, mode).map_err(pipeline)?;
        let sym = check_n2_symmetry(&table);
        checks.push(("n2-symmetry", sym.passed(), format!("{} rows, {} failures", sym.rows, sym.failures.len())));
        let wdvv = check_wdvv_identity(&table, &x, self.order);
        checks.push((
            "wdvv-identity",
            wdvv.passed(),
            format!("{} equations, {} nonzero residuals", wdvv.equations, wdvv.nonzero.len()),
        ));
        let route = verify_wdvv_symmetry_route(&theta, &table);
        checks.push(("wdvv-route", route.passed(), format!("{} classes", route.checked)));
        let modes = compare_modes(&x, &seeds, self.order).map_err(pipeline)?;
        checks.push((
            "modes-agree",
            modes.final_rows_agree,
            format!("{} intermediate entries differ between strict and formal", modes.differing_entries.len()),
        ));
        self.stages.extend(["mirror-map", "theta", "local", "wdvv", "verify"].map(String::from));
        let passed = checks.iter().all(|c| c.1);
        Ok((checks_table(&checks, passed), passed))
    }
}

fn checks_table(checks: &[(&'static str, bool, String)], passed: bool) -> Table {
    for (name, ok, detail) in checks {
        eprintln!("{} {name}: {detail}", if *ok { "PASS" } else { "FAIL" });
    }
    let json_checks: Vec<Value> =
        checks.iter().map(|(n, ok, d)| json!({ "check": n, "passed": ok, "detail": d })).collect();
    Table {
        json: json!({ "passed": passed, "checks": json_checks }),
        header: vec!["check", "passed", "detail"],
        rows: checks.iter().map(|(n, ok, d)| vec![n.to_string(), ok.to_string(), d.clone()]).collect(),
    }
}
