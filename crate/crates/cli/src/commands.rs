use std::collections::BTreeMap;
use std::path::Path;

use maslov_core::actions::local_index_with;
use maslov_core::bundle::characteristic_number;
use maslov_core::grassmann::maslov_index;
use maslov_core::random::{random_so3, random_sphere_point, seeded};
use maslov_core::sphere::{clutching_degree, measure_r};
use maslov_core::verify::{run_suite, SuiteConfig, DEFAULT_SEED};
use maslov_core::{
    gamma_winding_pair, hamiltonian_of_rotation, isotropy_phase, q_beta, q_vector,
    transitivity_rank, CircleActionSpec, CompatibleTriple, ConnectionForm, QResult,
    SO3Element, SphereBundle, SphereLevel, SpherePoint, SphereRotation,
};
use nalgebra::{DVector, Vector3};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::CliError;
use crate::report::{Conventions, RunReport, SCHEMA_VERSION};
use crate::spec::{read_json, read_points, Action, ActionDto, BundleDto, ConnectionDto, LoopDto};
use crate::Settings;

/// Largest degree residual the engine ever accepts.
pub const MAX_RESIDUAL: f64 = 0.25;
/// Distance to an even integer tolerated at fixed points.
pub const EVEN_TOLERANCE: f64 = 1e-6;
const SPHERE_DEMO_FRAMES: usize = 100;

fn report(settings: &Settings, command: &'static str, seed: Option<u64>) -> RunReport {
    RunReport {
        schema_version: SCHEMA_VERSION,
        command,
        conventions: Conventions::new(settings.orientation),
        seed,
        inputs: Value::Null,
        outputs: Value::Null,
        diagnostics: Value::Null,
    }
}

pub fn write_output(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Io { path: path.to_path_buf(), source }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn index(settings: &Settings, loop_file: &Path, connection: Option<&str>) -> Result<RunReport, CliError> {
    let dto: LoopDto = read_json(&loop_file.to_string_lossy(), "loop file")?;
    let conn: ConnectionDto = match connection {
        Some(c) => read_json(c, "connection spec")?,
        None => ConnectionDto::default(),
    };
    if conn.bundle != BundleDto::Trivial {
        return Err(CliError::Input("plane loops live over R^2n; use a trivial connection".into()));
    }
    let loaded = dto.build()?;
    let intervals = loaded.frames.intervals();
    if intervals < settings.samples {
        return Err(CliError::Ambiguous(format!(
            "loop has {intervals} intervals but at least {} were requested; resample it more finely",
            settings.samples
        )));
    }
    let triple = CompatibleTriple::<f64>::standard(dto.n)?;
    let tau = conn.base_form(2 * dto.n)?;
    if loaded.base.is_none() && !tau.is_zero() {
        return Err(CliError::Input("a nonzero tau needs the loop's base points".into()));
    }
    let d = maslov_index(&loaded.frames, loaded.base.as_ref(), &triple, &tau).map_err(|e| match e {
        maslov_core::MaslovError::UndersampledLoop { .. } => CliError::Ambiguous(e.to_string()),
        maslov_core::MaslovError::AmbiguousDegree { .. } => {
            CliError::Ambiguous(format!("{e}; refine the loop sampling"))
        }
        other => other.into(),
    })?;
    if d.residual >= settings.tolerance {
        return Err(CliError::Ambiguous(format!(
            "degree residual {:.3e} exceeds the tolerance {:.3e}; refine the loop sampling",
            d.residual, settings.tolerance
        )));
    }
    let mut r = report(settings, "index", None);
    r.inputs = json!({ "loop": { "n": dto.n, "samples": dto.times.len(), "has_base": loaded.base.is_some() }, "connection": conn });
    r.outputs = json!({ "index": d.degree, "raw": d.raw, "residual": d.residual, "tolerance": settings.tolerance });
    r.diagnostics = json!({ "samples": d.samples, "max_phase_gap": d.max_gap, "min_samples": settings.samples });
    Ok(r)
}

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn qbeta_row(action: &Action, beta: &ConnectionForm<f64>, p: &[f64]) -> Result<Vec<QResult<f64>>, CliError> {
    let x = DVector::from_column_slice(p);
    Ok(match action {
        Action::Circle(a) => vec![q_beta(a, beta, &x)?],
        Action::Torus(t) => q_vector(t, beta, &x)?,
    })
}

pub fn qbeta(settings: &Settings, action: &str, connection: &str, points: &Path) -> Result<(RunReport, String), CliError> {
    let action_dto: ActionDto = read_json(action, "action spec")?;
    let conn: ConnectionDto = read_json(connection, "connection spec")?;
    let act = action_dto.build()?;
    let dim = act.dim();
    match (act.is_sphere(), conn.bundle) {
        (true, BundleDto::Sphere) if conn.level() == SphereLevel::GammaSquared => {}
        (true, BundleDto::Sphere) => {
            return Err(CliError::Input("Q is defined on the Gamma-squared bundle; drop \"level\" or use gamma_squared".into()))
        }
        (false, BundleDto::Trivial) => {}
        _ => return Err(CliError::Input("sphere actions need a sphere connection, linear actions a trivial one".into())),
    }
    let beta = conn.build(dim, settings.orientation)?;
    let pts = read_points(points)?;
    if let Some(k) = pts.iter().position(|p| p.len() != dim) {
        return Err(CliError::Input(format!("point {} has {} coordinates, the action acts on {dim}", k + 1, pts[k].len())));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(settings.jobs)
        .build()
        .map_err(|e| CliError::Input(format!("cannot start {} workers: {e}", settings.jobs)))?;
    let rows: Vec<Vec<QResult<f64>>> =
        pool.install(|| pts.par_iter().map(|p| qbeta_row(&act, &beta, p)).collect::<Result<_, _>>())?;

    let l = act.rank();
    let mut csv_out = csv::Writer::from_writer(Vec::new());
    if !pts.is_empty() {
        let mut header: Vec<String> = (0..dim).map(|k| format!("x{k}")).collect();
        let suffix = |k: usize| if l == 1 { String::new() } else { format!("_{}", k + 1) };
        header.extend((0..l).map(|k| format!("q_value{}", suffix(k))));
        header.push("is_fixed".into());
        header.extend((0..l).map(|k| format!("nearest_even{}", suffix(k))));
        csv_out.write_record(&header).map_err(|e| CliError::Input(e.to_string()))?;
    }
    let mut fixed = 0usize;
    let mut max_samples = 0usize;
    for (p, qs) in pts.iter().zip(&rows) {
        let is_fixed = qs.iter().all(|q| q.is_fixed);
        fixed += is_fixed as usize;
        max_samples = max_samples.max(qs.iter().map(|q| q.samples).max().unwrap_or(0));
        let mut rec: Vec<String> = p.iter().copied().map(fmt).collect();
        rec.extend(qs.iter().map(|q| fmt(q.value)));
        rec.push(is_fixed.to_string());
        rec.extend(qs.iter().map(|q| q.nearest_integer.map(|k| k.to_string()).unwrap_or_default()));
        csv_out.write_record(&rec).map_err(|e| CliError::Input(e.to_string()))?;
    }
    let bytes = csv_out.into_inner().map_err(|e| CliError::Input(e.to_string()))?;
    let text = String::from_utf8(bytes).expect("csv output is UTF-8");

    let mut r = report(settings, "qbeta", None);
    r.inputs = json!({ "action": action_dto, "connection": conn, "points": pts.len() });
    r.outputs = json!({ "rows": pts.len(), "fixed_points": fixed, "columns": l });
    r.diagnostics = json!({ "even_tolerance": EVEN_TOLERANCE, "max_orbit_samples": max_samples, "jobs": settings.jobs });
    Ok((r, text))
}

fn fit_through_origin(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let c = xs.iter().zip(ys).map(|(x, y)| x * y).sum::<f64>() / xs.iter().map(|x| x * x).sum::<f64>();
    let residual = xs.iter().zip(ys).map(|(x, y)| (y - c * x).abs()).fold(0.0, f64::max);
    (c, residual)
}

pub fn sphere_demo(settings: &Settings, axis: &[f64]) -> Result<RunReport, CliError> {
    if axis.len() != 3 || !axis.iter().all(|x| x.is_finite()) {
        return Err(CliError::Input("axis needs three finite components".into()));
    }
    let a = Vector3::new(axis[0], axis[1], axis[2]);
    if a.norm() == 0.0 {
        return Err(CliError::Input("axis must be nonzero".into()));
    }
    let a = a.normalize();
    let seed = settings.seed.unwrap_or(DEFAULT_SEED);
    let mut rng = seeded(seed);
    let o = settings.orientation;

    let gamma = ConnectionForm::<f64>::sphere_invariant(SphereBundle::gamma(o));
    let frames: Vec<SO3Element<f64>> = (0..SPHERE_DEMO_FRAMES).map(|_| random_so3(&mut rng)).collect();
    let fit = measure_r(&gamma, &frames)?;
    let chi = characteristic_number(&gamma)?;
    let clutch = clutching_degree::<f64>(&SphereBundle::gamma(o), 256)?;

    let rotation = SphereRotation::about(a)?;
    let action = CircleActionSpec::sphere(rotation);
    let gamma2 = ConnectionForm::sphere_invariant(SphereBundle::gamma_squared(o));
    let pole = |sign: f64| DVector::from_column_slice((a * sign).as_slice());
    let (qn, qs) = (q_beta(&action, &gamma2, &pole(1.0))?, q_beta(&action, &gamma2, &pole(-1.0))?);
    let (kn, ks) = (local_index_with(&action, &pole(1.0), o)?, local_index_with(&action, &pole(-1.0), o)?);
    let windings = gamma_winding_pair(&rotation, &SpherePoint::new(a)?, o, 256)?;

    let mut histogram: BTreeMap<usize, usize> = BTreeMap::new();
    let mut min_sv = f64::INFINITY;
    for w in &frames {
        let (rank, s) = transitivity_rank(w);
        *histogram.entry(rank).or_default() += 1;
        min_sv = min_sv.min(s);
    }

    let pts: Vec<SpherePoint<f64>> = (0..SPHERE_DEMO_FRAMES).map(|_| random_sphere_point(&mut rng)).collect();
    let hs = pts.iter().map(|p| hamiltonian_of_rotation(&gamma, fit.r, &a, p)).collect::<Result<Vec<_>, _>>()?;
    let heights: Vec<f64> = pts.iter().map(|p| p.vector().dot(&a)).collect();
    let (c, h_residual) = fit_through_origin(&heights, &hs);

    // isotropy phase against rotation angle, unwrapped from ψ = 0
    let p = random_sphere_point::<f64, _>(&mut rng);
    let angles: Vec<f64> = (0..=12).map(|k| -3.0 + 0.5 * k as f64).collect();
    let bundle = SphereBundle::gamma(o);
    let phases = angles
        .iter()
        .map(|&psi| Ok(isotropy_phase(&bundle, &p, &SO3Element::about(p.vector(), psi))?.arg()))
        .collect::<Result<Vec<f64>, CliError>>()?;
    let unwrapped: Vec<f64> = angles
        .iter()
        .zip(&phases)
        .map(|(psi, ph)| {
            let guess = bundle.sign::<f64>() * psi;
            ph + (2.0 * std::f64::consts::PI) * ((guess - ph) / (2.0 * std::f64::consts::PI)).round()
        })
        .collect();
    let (slope, phi_residual) = fit_through_origin(&angles, &unwrapped);

    let mut r = report(settings, "sphere-demo", Some(seed));
    r.inputs = json!({ "axis": [a.x, a.y, a.z], "frames": SPHERE_DEMO_FRAMES });
    r.outputs = json!({
        "r": { "value": fit.r, "spread": fit.spread },
        "characteristic_number": { "value": chi.value, "nearest": chi.nearest, "residual": chi.residual, "coarse_value": chi.coarse_value },
        "clutching_degree": clutch,
        "k_n": { "index": kn, "q_value": qn.value, "residual": (qn.value - kn as f64).abs() },
        "k_s": { "index": ks, "q_value": qs.value, "residual": (qs.value - ks as f64).abs() },
        "winding_pair": [windings.0, windings.1],
        "transitivity": { "rank_histogram": histogram, "min_singular_value": min_sv },
        "hamiltonian_fit": { "c": c, "residual": h_residual },
        "isotropy_fit": { "slope": slope, "residual": phi_residual },
    });
    r.diagnostics = json!({
        "characteristic_tolerance": 1e-3,
        "r_samples": fit.samples,
        "orbit_samples": [qn.samples, qs.samples],
        "connection": "invariant",
    });
    Ok(r)
}

pub struct VerifyOutcome {
    pub report: RunReport,
    pub failed: Vec<&'static str>,
}

pub fn verify(settings: &Settings) -> VerifyOutcome {
    let seed = settings.seed.unwrap_or(DEFAULT_SEED);
    let config = SuiteConfig { seed, orientation: settings.orientation, mutation: settings.mutation };
    let checks = run_suite(&config);
    let failed: Vec<&'static str> = checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
    let mut r = report(settings, "verify", Some(seed));
    r.inputs = json!({ "mutation": settings.mutation.map(|m| format!("{m:?}")) });
    r.outputs = json!({
        "passed": failed.is_empty(),
        "checks": checks.iter().map(|c| json!({ "name": c.name, "passed": c.passed, "detail": c.detail })).collect::<Vec<_>>(),
    });
    r.diagnostics = json!({ "total": checks.len(), "failed": failed });
    VerifyOutcome { report: r, failed }
}
