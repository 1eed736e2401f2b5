use std::path::Path;

use ndarray::Array1;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use statgeo_core::fields::{fisher_finite_family, ChartKind};
use statgeo_core::frobenius::{self, AssociativityReport, IdempotentFrame, RigidityReport, SpectralData};
use statgeo_core::geometry::identity_suite;
use statgeo_core::tensor::{constant_curvature_fit, raise_index, yukawa_term, ConstantCurvatureFit};
use statgeo_core::wdvv::{self, wdvv_matrix_residual, wdvv_residual_hessian, Prepotential, PrepotentialChart};
use statgeo_core::{linalg, BcnParams, ChartField, Error, KOperator};

use crate::args::{BcnArgs, FisherArgs, FrobeniusArgs, IdentitiesArgs, OutputArgs, ParseCheckArgs, WdvvArgs};
use crate::points::resolve;
use crate::report::{CliError, RunReport};

/// Thresholds for the unit law and the idempotent products, relative to the
/// size of the participating vectors and of `K`.
pub const UNIT_LAW_TOLERANCE: f64 = 1e-9;
pub const IDEMPOTENT_TOLERANCE: f64 = 1e-9;
/// Default threshold for the constant sectional K-curvature fit.
pub const CURVATURE_TOLERANCE: f64 = 1e-9;
/// Default WDVV threshold for Hessian charts, whose third derivatives come
/// from finite differences.
pub const HESSIAN_WDVV_TOLERANCE: f64 = 1e-6;

struct Loaded {
    text: String,
    json: Value,
}

fn load(path: &Path) -> Result<Loaded, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    let json: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::config(format!("{}: invalid JSON: {e}", path.display())))?;
    Ok(Loaded { text, json })
}

fn load_chart(path: &Path) -> Result<(Loaded, ChartField), CliError> {
    let loaded = load(path)?;
    let chart = ChartField::from_json(&loaded.text).map_err(CliError::from_core)?;
    Ok((loaded, chart))
}

fn is_prepotential(json: &Value) -> bool {
    matches!(json.get("type").and_then(Value::as_str), Some("bcn" | "prepotential"))
}

fn positive(name: &str, value: f64) -> Result<f64, CliError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(CliError::config(format!("{name} must be positive, got {value}")))
    }
}

/// Explicit override, or the default scaled by `--tol`.
fn tolerance(output: &OutputArgs, name: &str, default: f64, explicit: Option<f64>) -> Result<f64, CliError> {
    let scale = positive("--tol", output.tol)?;
    match explicit {
        Some(v) => positive(name, v),
        None => Ok(default * scale),
    }
}

/// Runs `f` on every point in parallel; results keep the input order and the
/// first failing point in that order decides the error.
fn per_point<T, F>(points: &[Vec<f64>], f: F) -> Result<Vec<T>, CliError>
where
    T: Send,
    F: Fn(&[f64]) -> Result<T, Error> + Sync,
{
    points
        .par_iter()
        .map(|x| f(x).map_err(|e| CliError::at_point(x, e)))
        .collect::<Vec<_>>()
        .into_iter()
        .collect()
}

fn to_values<T: Serialize>(items: &[T]) -> Vec<Value> {
    items.iter().map(|r| serde_json::to_value(r).expect("result serializes")).collect()
}

pub fn identities(args: &IdentitiesArgs) -> Result<RunReport, CliError> {
    let (loaded, chart) = load_chart(&args.chart)?;
    let scale = positive("--tol", args.output.tol)?;
    let explicit = args.identity_tol.map(|v| positive("--identity-tol", v)).transpose()?;
    let (points, source) = resolve(&args.points, chart.dim(), chart.domain(), |_| true)?;
    let reports = per_point(&points, |x| {
        let mut r = identity_suite(&chart, x)?;
        r.tolerance = explicit.unwrap_or(r.tolerance * scale);
        r.pass = r.max_residual() < r.tolerance;
        Ok(r)
    })?;
    let worst = reports.iter().map(|r| r.max_residual()).fold(0.0, f64::max);
    let failed = reports.iter().filter(|r| !r.pass).count();
    let config = json!({
        "chart": loaded.json,
        "points": source,
        "tol": scale,
        "identity_tol": explicit,
    });
    let summary = json!({ "points": reports.len(), "failed": failed, "max_residual": worst });
    Ok(RunReport::new("identities", config, to_values(&reports), summary))
}

#[derive(Debug, Serialize)]
struct UnitResult {
    vector: Vec<f64>,
    /// `max |e∘v - v|` over the coordinate basis, relative to `max(1, max|K|·max|e|)`.
    residual: f64,
}

#[derive(Debug, Serialize)]
struct FrobeniusPoint {
    point: Vec<f64>,
    associativity: AssociativityReport,
    associative: bool,
    curvature_fit: ConstantCurvatureFit,
    /// `A` when the fit holds within the curvature tolerance.
    constant_curvature: Option<f64>,
    yukawa: f64,
    unit: Option<UnitResult>,
    idempotents: Option<IdempotentFrame>,
    /// `IdempotentFrame::product_residual` relative to `max(1, max|K|·max|u|²)`.
    idempotent_residual: Option<f64>,
    spectral: Option<SpectralData>,
    spectral_error: Option<String>,
    rigidity: Option<RigidityReport>,
    rigidity_error: Option<String>,
    pass: bool,
}

struct FrobeniusSettings {
    commuting: f64,
    curvature: f64,
    restarts: usize,
    seed: u64,
    rigidity: bool,
}

fn unit_residual(k: &KOperator, e: &Array1<f64>) -> f64 {
    let n = k.dim();
    let scale = (linalg::max_abs(k.data().iter()) * linalg::max_abs(e.iter())).max(1.0);
    let mut worst = 0.0_f64;
    for i in 0..n {
        let mut v = Array1::<f64>::zeros(n);
        v[i] = 1.0;
        let p = k.apply(e.view(), v.view()) - &v;
        worst = worst.max(linalg::max_abs(p.iter()));
    }
    worst / scale
}

fn frobenius_point(chart: &ChartField, x: &[f64], s: &FrobeniusSettings) -> Result<FrobeniusPoint, Error> {
    let (g, c) = chart.evaluate(x)?;
    let k = raise_index(&c, &g)?;
    let associativity = frobenius::associativity_report(&k);
    let associative = frobenius::bracket_within(&k, s.commuting);
    let curvature_fit = constant_curvature_fit(&k)?;
    let constant_curvature = (curvature_fit.residual <= s.curvature).then_some(curvature_fit.a);
    let yukawa = yukawa_term(&c, &g)?;

    let mut unit = None;
    let mut idempotents = None;
    let mut idempotent_residual = None;
    let (mut spectral, mut spectral_error) = (None, None);
    if associative {
        match frobenius::simultaneous_diagonalize(&k, s.commuting, s.seed) {
            Ok(d) => spectral = Some(d),
            Err(e) => spectral_error = Some(e.to_string()),
        }
        // Unit and idempotents reuse the same seeded diagonalization, so they
        // are only attempted when it succeeded.
        let unit_vector = match spectral {
            Some(_) => frobenius::unit(&k, s.commuting, s.seed)?,
            None => None,
        };
        if let Some(e) = unit_vector {
            let residual = unit_residual(&k, &e);
            unit = Some(UnitResult { vector: e.to_vec(), residual });
        }
        if unit.is_some() {
            let frame = frobenius::canonical_idempotents(&k, s.commuting, s.seed)?;
            let size = frame.vectors.iter().flatten().fold(0.0_f64, |m, v| m.max(v.abs()));
            let scale = (linalg::max_abs(k.data().iter()) * size * size).max(1.0);
            idempotent_residual = Some(frame.product_residual / scale);
            idempotents = Some(frame);
        }
    } else if let Some(a) = constant_curvature {
        match frobenius::opozda_basis(&k, a, s.restarts, s.seed) {
            Ok(d) => spectral = Some(d),
            Err(e) => spectral_error = Some(e.to_string()),
        }
    }

    let (mut rigidity, mut rigidity_error) = (None, None);
    if s.rigidity {
        if unit.is_some() {
            match frobenius::rigidity_diagnostics(chart, x, s.commuting, s.seed) {
                Ok(r) => rigidity = Some(r),
                Err(e) => rigidity_error = Some(e.to_string()),
            }
        } else {
            rigidity_error = Some("no idempotent frame at this point".into());
        }
    }

    let pass = associative
        && unit.as_ref().is_none_or(|u| u.residual <= UNIT_LAW_TOLERANCE)
        && idempotent_residual.is_none_or(|r| r <= IDEMPOTENT_TOLERANCE);
    Ok(FrobeniusPoint {
        point: x.to_vec(),
        associativity,
        associative,
        curvature_fit,
        constant_curvature,
        yukawa,
        unit,
        idempotents,
        idempotent_residual,
        spectral,
        spectral_error,
        rigidity,
        rigidity_error,
        pass,
    })
}

pub fn frobenius(args: &FrobeniusArgs) -> Result<RunReport, CliError> {
    let (loaded, chart) = load_chart(&args.chart)?;
    let seed = args
        .points
        .seed
        .ok_or_else(|| CliError::config("frobenius needs --seed for its randomized basis searches"))?;
    if args.restarts == 0 {
        return Err(CliError::config("--restarts must be positive"));
    }
    let settings = FrobeniusSettings {
        commuting: tolerance(&args.output, "--commuting-tol", frobenius::COMMUTING_TOLERANCE, args.commuting_tol)?,
        curvature: tolerance(&args.output, "--curvature-tol", CURVATURE_TOLERANCE, args.curvature_tol)?,
        restarts: args.restarts,
        seed,
        rigidity: args.rigidity,
    };
    let (points, source) = resolve(&args.points, chart.dim(), chart.domain(), |_| true)?;
    let results = per_point(&points, |x| frobenius_point(&chart, x, &settings))?;
    let config = json!({
        "chart": loaded.json,
        "points": source,
        "seed": seed,
        "tol": args.output.tol,
        "commuting_tol": settings.commuting,
        "curvature_tol": settings.curvature,
        "restarts": settings.restarts,
        "rigidity": settings.rigidity,
    });
    let summary = json!({
        "points": results.len(),
        "associative": results.iter().filter(|r| r.associative).count(),
        "with_unit": results.iter().filter(|r| r.unit.is_some()).count(),
        "constant_curvature": results.iter().filter(|r| r.constant_curvature.is_some()).count(),
        "max_bracket": results.iter().map(|r| r.associativity.bracket_norm).fold(0.0, f64::max),
        "max_abs_yukawa": results.iter().map(|r| r.yukawa.abs()).fold(0.0, f64::max),
    });
    Ok(RunReport::new("frobenius", config, to_values(&results), summary))
}

#[derive(Debug, Serialize)]
struct HessianWdvvPoint {
    point: Vec<f64>,
    /// `max |g^{pq}(φ_ilp φ_jkq - φ_ikp φ_jlq)|`.
    residual: f64,
    tolerance: f64,
    pass: bool,
}

pub fn wdvv(args: &WdvvArgs) -> Result<RunReport, CliError> {
    let loaded = load(&args.chart)?;
    let scale = positive("--tol", args.output.tol)?;
    let explicit = args.wdvv_tol.map(|v| positive("--wdvv-tol", v)).transpose()?;
    if is_prepotential(&loaded.json) {
        let pc = PrepotentialChart::from_json(&loaded.text).map_err(CliError::from_core)?;
        let tol = explicit.unwrap_or(wdvv::DEFAULT_TOLERANCE * scale);
        let accept = |x: &[f64]| match &pc.prepotential {
            Prepotential::Bcn { params, margin } => params.check_generic(x, *margin).is_ok(),
            Prepotential::Expr { .. } => true,
        };
        let (points, source) = resolve(&args.points, pc.prepotential.dim(), &pc.domain, accept)?;
        let reports = per_point(&points, |x| wdvv_matrix_residual(&pc.prepotential, x, tol))?;
        let worst = reports.iter().map(|r| r.max_residual).fold(0.0, f64::max);
        let config = json!({ "chart": loaded.json, "points": source, "tol": scale, "wdvv_tol": tol });
        let summary = json!({ "points": reports.len(), "max_residual": worst, "tolerance": tol });
        return Ok(RunReport::new("wdvv", config, to_values(&reports), summary));
    }
    let chart = ChartField::from_json(&loaded.text).map_err(CliError::from_core)?;
    if !matches!(chart.kind(), ChartKind::Hessian { .. }) {
        return Err(CliError::config(format!(
            "wdvv needs a hessian chart or a prepotential, got a {} chart",
            chart.kind_name()
        )));
    }
    let tol = explicit.unwrap_or(HESSIAN_WDVV_TOLERANCE * scale);
    let (points, source) = resolve(&args.points, chart.dim(), chart.domain(), |_| true)?;
    let results = per_point(&points, |x| {
        let residual = wdvv_residual_hessian(&chart, x)?;
        Ok(HessianWdvvPoint { point: x.to_vec(), residual, tolerance: tol, pass: residual < tol })
    })?;
    let worst = results.iter().map(|r| r.residual).fold(0.0, f64::max);
    let config = json!({ "chart": loaded.json, "points": source, "tol": scale, "wdvv_tol": tol });
    let summary = json!({ "points": results.len(), "max_residual": worst, "tolerance": tol });
    Ok(RunReport::new("wdvv", config, to_values(&results), summary))
}

pub fn bcn(args: &BcnArgs) -> Result<RunReport, CliError> {
    let loaded = load(&args.chart)?;
    if loaded.json.get("type").and_then(Value::as_str) != Some("bcn") {
        return Err(CliError::config("bcn needs a configuration with \"type\": \"bcn\""));
    }
    let pc = PrepotentialChart::from_json(&loaded.text).map_err(CliError::from_core)?;
    let (params, margin) = match pc.prepotential {
        Prepotential::Bcn { params, margin } => (params, margin),
        Prepotential::Expr { .. } => unreachable!("type checked above"),
    };
    let params = match args.r_override {
        Some(r) => BcnParams::with_r(params.n, params.s, params.q, r).map_err(CliError::from_core)?,
        None => params,
    };
    let scale = positive("--tol", args.output.tol)?;
    let tol = args.wdvv_tol.map(|v| positive("--wdvv-tol", v)).transpose()?.unwrap_or(wdvv::DEFAULT_TOLERANCE * scale);
    let (points, source) = resolve(&args.points, params.n, &pc.domain, |x| params.check_generic(x, margin).is_ok())?;
    for x in &points {
        params.check_generic(x, margin).map_err(|e| CliError::at_point(x, e))?;
    }
    let prepotential = Prepotential::Bcn { params, margin };
    let reports = per_point(&points, |x| wdvv_matrix_residual(&prepotential, x, tol))?;
    let worst = |get: &dyn Fn(&wdvv::WdvvReport) -> Option<f64>| reports.iter().filter_map(get).fold(0.0, f64::max);
    let config = json!({
        "chart": loaded.json,
        "points": source,
        "params": params,
        "r_override": args.r_override,
        "margin": margin,
        "tol": scale,
        "wdvv_tol": tol,
    });
    let summary = json!({
        "points": reports.len(),
        "on_constraint": params.on_constraint(),
        "constrained_r": BcnParams::constrained_r(params.n, params.s, params.q),
        "max_residual": worst(&|r| Some(r.max_residual)),
        "max_diagonal_deviation": worst(&|r| r.diagonal_deviation),
        "max_h_agreement": worst(&|r| r.h_agreement),
    });
    Ok(RunReport::new("bcn", config, to_values(&reports), summary))
}

#[derive(Debug, Serialize)]
struct FisherPoint {
    point: Vec<f64>,
    g: Vec<Vec<f64>>,
    /// Amari-Chentsov tensor `T_ijk = E[∂_iℓ ∂_jℓ ∂_kℓ]`.
    t: Vec<Vec<Vec<f64>>>,
    pass: bool,
}

pub fn fisher(args: &FisherArgs) -> Result<RunReport, CliError> {
    let (loaded, chart) = load_chart(&args.chart)?;
    if !matches!(chart.kind(), ChartKind::FiniteFamily { .. }) {
        return Err(CliError::config(format!("fisher needs a finite_family chart, got a {} chart", chart.kind_name())));
    }
    positive("--tol", args.output.tol)?;
    let (points, source) = resolve(&args.points, chart.dim(), chart.domain(), |_| true)?;
    let results = per_point(&points, |x| {
        let (g, t) = fisher_finite_family(&chart, x)?;
        Ok(FisherPoint {
            point: x.to_vec(),
            g: g.matrix().outer_iter().map(|r| r.to_vec()).collect(),
            t: t.outer_iter().map(|m| m.outer_iter().map(|r| r.to_vec()).collect()).collect(),
            pass: true,
        })
    })?;
    let config = json!({ "chart": loaded.json, "points": source });
    let summary = json!({ "points": results.len() });
    Ok(RunReport::new("fisher", config, to_values(&results), summary))
}

pub fn parse_check(args: &ParseCheckArgs) -> Result<RunReport, CliError> {
    let loaded = load(&args.chart)?;
    let (kind, dim, domain) = if is_prepotential(&loaded.json) {
        let pc = PrepotentialChart::from_json(&loaded.text).map_err(CliError::from_core)?;
        let kind = match pc.prepotential {
            Prepotential::Bcn { .. } => "bcn",
            Prepotential::Expr { .. } => "prepotential",
        };
        (kind, pc.prepotential.dim(), pc.domain)
    } else {
        let chart = ChartField::from_json(&loaded.text).map_err(CliError::from_core)?;
        (chart.kind_name(), chart.dim(), chart.domain().to_vec())
    };
    let config = json!({ "chart": loaded.json });
    let summary = json!({ "kind": kind, "dim": dim, "domain": domain, "pass": true });
    Ok(RunReport::new("parse-check", config, Vec::new(), summary))
}
