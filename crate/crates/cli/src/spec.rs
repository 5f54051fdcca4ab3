//! JSON input schemas and their conversion into library values.

use std::path::Path;

use maslov_core::{
    CircleActionSpec, ConnectionForm, LagrangianFrame, Monomial, OneForm, Orientation, Polynomial,
    SampledLoop, SphereBundle, SphereLevel, SphereRotation, TorusActionSpec,
};
use nalgebra::{DMatrix, DVector, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Reads `arg` as inline JSON when it starts with `{`, otherwise as a path.
pub fn read_json<T: for<'de> Deserialize<'de>>(arg: &str, what: &str) -> Result<T, CliError> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        read_file(Path::new(arg))?
    };
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{what}: {e}")))
}

pub fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

/// `[coefficient, e₁, …, e_d]` per monomial.
pub type PolyTerms = Vec<Vec<f64>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FormDto {
    Zero,
    Liouville {
        #[serde(default = "unit")]
        scale: f64,
    },
    /// `dF` for the polynomial `F`.
    Poly { coeffs: PolyTerms },
    /// `Σ Pᵢ dxᵢ`, one polynomial per coordinate.
    Components { components: Vec<PolyTerms> },
}

fn unit() -> f64 {
    1.0
}

fn polynomial(terms: &PolyTerms, dim: usize) -> Result<Polynomial<f64>, CliError> {
    let monos = terms
        .iter()
        .map(|t| {
            if t.len() != dim + 1 {
                return Err(CliError::Input(format!(
                    "monomial {t:?} needs a coefficient and {dim} exponents"
                )));
            }
            let exps = t[1..]
                .iter()
                .map(|&e| {
                    if e >= 0.0 && e.fract() == 0.0 && e <= 64.0 {
                        Ok(e as u32)
                    } else {
                        Err(CliError::Input(format!("exponent {e} is not a small non-negative integer")))
                    }
                })
                .collect::<Result<Vec<u32>, _>>()?;
            Ok(Monomial::new(t[0], exps))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Polynomial::new(dim, monos)?)
}

impl FormDto {
    pub fn build(&self, dim: usize) -> Result<OneForm<f64>, CliError> {
        Ok(match self {
            FormDto::Zero => OneForm::Zero,
            FormDto::Liouville { scale } => OneForm::liouville(*scale),
            FormDto::Poly { coeffs } => OneForm::exact(polynomial(coeffs, dim)?),
            FormDto::Components { components } => {
                if components.len() != dim {
                    return Err(CliError::Input(format!(
                        "{} component polynomials for dimension {dim}",
                        components.len()
                    )));
                }
                OneForm::Components(components.iter().map(|c| polynomial(c, dim)).collect::<Result<_, _>>()?)
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BundleDto {
    Trivial,
    Sphere,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LevelDto {
    Gamma,
    GammaSquared,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConnectionDto {
    pub bundle: BundleDto,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<FormDto>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturbation: Option<FormDto>,
    /// Sphere bundles only; defaults to `Γ²`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<LevelDto>,
}

impl Default for ConnectionDto {
    fn default() -> Self {
        Self { bundle: BundleDto::Trivial, tau: None, perturbation: None, level: None }
    }
}

impl ConnectionDto {
    /// `τ` plus the perturbation on ℝ^`dim`.
    pub fn base_form(&self, dim: usize) -> Result<OneForm<f64>, CliError> {
        let mut form = OneForm::Zero;
        for part in [&self.tau, &self.perturbation].into_iter().flatten() {
            form = form.plus(part.build(dim)?);
        }
        Ok(form)
    }

    pub fn level(&self) -> SphereLevel {
        match self.level {
            Some(LevelDto::Gamma) => SphereLevel::Gamma,
            _ => SphereLevel::GammaSquared,
        }
    }

    /// The connection for an action on ℝ^`dim` (`dim = 3` with a sphere bundle means S²).
    pub fn build(&self, dim: usize, orientation: Orientation) -> Result<ConnectionForm<f64>, CliError> {
        match self.bundle {
            BundleDto::Trivial => {
                if self.level.is_some() {
                    return Err(CliError::Input("level applies to sphere bundles only".into()));
                }
                Ok(ConnectionForm::trivial(dim, self.base_form(dim)?)?)
            }
            BundleDto::Sphere => {
                let bundle = SphereBundle::new(orientation, self.level());
                let sigma = self.base_form(3)?;
                if sigma.is_zero() {
                    Ok(ConnectionForm::sphere_invariant(bundle))
                } else {
                    Ok(ConnectionForm::sphere_perturbed(bundle, sigma)?)
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ActionDto {
    Linear {
        weights: Vec<i64>,
    },
    Sphere {
        axis: [f64; 3],
        #[serde(default = "unit_speed")]
        speed: i64,
    },
    Torus {
        components: Vec<ActionDto>,
    },
}

fn unit_speed() -> i64 {
    1
}

pub enum Action {
    Circle(CircleActionSpec<f64>),
    Torus(TorusActionSpec<f64>),
}

impl Action {
    pub fn dim(&self) -> usize {
        match self {
            Action::Circle(a) => a.dim(),
            Action::Torus(t) => t.components()[0].dim(),
        }
    }

    pub fn is_sphere(&self) -> bool {
        match self {
            Action::Circle(a) => matches!(a, CircleActionSpec::Sphere(_)),
            Action::Torus(t) => matches!(t.components()[0], CircleActionSpec::Sphere(_)),
        }
    }

    /// Number of `q` columns.
    pub fn rank(&self) -> usize {
        match self {
            Action::Circle(_) => 1,
            Action::Torus(t) => t.components().len(),
        }
    }
}

fn circle(dto: &ActionDto) -> Result<CircleActionSpec<f64>, CliError> {
    match dto {
        ActionDto::Linear { weights } => Ok(CircleActionSpec::linear(weights.clone())?),
        ActionDto::Sphere { axis, speed } => {
            let v = Vector3::from(*axis);
            if v.norm() == 0.0 || !v.iter().all(|x| x.is_finite()) {
                return Err(CliError::Input("sphere axis must be a finite nonzero vector".into()));
            }
            Ok(CircleActionSpec::sphere(SphereRotation::new(v.normalize(), *speed)?))
        }
        ActionDto::Torus { .. } => Err(CliError::Input("torus components must be circle actions".into())),
    }
}

impl ActionDto {
    pub fn build(&self) -> Result<Action, CliError> {
        match self {
            ActionDto::Torus { components } => {
                if components.is_empty() {
                    return Err(CliError::Input("torus needs at least one component".into()));
                }
                let parts = components.iter().map(circle).collect::<Result<Vec<_>, _>>()?;
                Ok(Action::Torus(TorusActionSpec::new(parts)?))
            }
            other => Ok(Action::Circle(circle(other)?)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoopDto {
    pub n: usize,
    pub times: Vec<f64>,
    /// Column-major `2n × n` frames.
    pub frames: Vec<Vec<f64>>,
    /// Optional base loop in ℝ²ⁿ for the section phase.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<Vec<Vec<f64>>>,
}

pub struct LoadedLoop {
    pub frames: SampledLoop<LagrangianFrame<f64>>,
    pub base: Option<SampledLoop<DVector<f64>>>,
}

impl LoopDto {
    pub fn build(&self) -> Result<LoadedLoop, CliError> {
        let (n, rows) = (self.n, 2 * self.n);
        if n == 0 {
            return Err(CliError::Input("n must be positive".into()));
        }
        if self.frames.len() != self.times.len() {
            return Err(CliError::Input(format!(
                "{} frames for {} times",
                self.frames.len(),
                self.times.len()
            )));
        }
        let frames = self
            .frames
            .iter()
            .enumerate()
            .map(|(k, f)| {
                if f.len() != rows * n {
                    return Err(CliError::Input(format!("frame {k} has {} entries, expected {}", f.len(), rows * n)));
                }
                Ok(LagrangianFrame::new(DMatrix::from_column_slice(rows, n, f))?)
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        let frames = SampledLoop::new(self.times.clone(), frames)?;
        let base = match &self.base {
            None => None,
            Some(pts) => {
                if let Some(bad) = pts.iter().position(|p| p.len() != rows) {
                    return Err(CliError::Input(format!("base point {bad} does not have {rows} coordinates")));
                }
                let pts = pts.iter().map(|p| DVector::from_column_slice(p)).collect();
                Some(SampledLoop::new(self.times.clone(), pts)?)
            }
        };
        Ok(LoadedLoop { frames, base })
    }
}

/// Points as a JSON array of arrays, or CSV rows with an optional header.
pub fn read_points(path: &Path) -> Result<Vec<Vec<f64>>, CliError> {
    let text = read_file(path)?;
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    if text.trim_start().starts_with('[') {
        return serde_json::from_str(&text).map_err(|e| CliError::Input(format!("points: {e}")));
    }
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut points = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Input(format!("points: {e}")))?;
        let parsed: Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(p) => points.push(p),
            Err(_) if k == 0 => continue,
            Err(e) => return Err(CliError::Input(format!("points row {}: {e}", k + 1))),
        }
    }
    Ok(points)
}
