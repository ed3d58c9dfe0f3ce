//! Feed-forward ReLU encoders `E: ℝ^{2L+1} → ℝ³`, their Lipschitz bounds,
//! and the sphere map `u ↦ E(ζ(u)) / ‖E(ζ(u))‖`.
//!
//! Weights file:
//!
//! ```json
//! {"format_version": 1, "input_dim": 11,
//!  "layers": [{"weight": [[...], ...], "bias": [...]}, ...]}
//! ```
//!
//! `weight` is row-major with one row per output. Hidden layers apply ReLU,
//! the last layer is affine and has three outputs.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde_json::{json, Value};

use crate::degree::SphereMap;
use crate::error::{Error, Result};
use crate::harmonics::{zeta, zeta_lipschitz};
use crate::sphere::UnitVector;
use crate::triangulation::{build_complex, face_diameter_bound};

pub const FORMAT_VERSION: u64 = 1;

const SVD_MAX_DIM: usize = 16;
const POWER_MAX_ITERS: usize = 10_000;
const POWER_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct Layer {
    pub weight: DMatrix<f64>,
    pub bias: DVector<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MlpWeights {
    input_dim: usize,
    layers: Vec<Layer>,
}

fn schema(field: impl Into<String>, reason: impl Into<String>) -> Error {
    Error::Schema { field: field.into(), reason: reason.into() }
}

impl MlpWeights {
    /// Validates the dimension chain `input_dim → … → 3` and finiteness.
    pub fn new(input_dim: usize, layers: Vec<Layer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(schema("layers", "at least one layer is required"));
        }
        let mut cols = input_dim;
        for (k, layer) in layers.iter().enumerate() {
            let field = |name: &str| format!("layers[{k}].{name}");
            if layer.weight.ncols() != cols {
                return Err(Error::DimensionMismatch {
                    field: field("weight columns"),
                    expected: cols,
                    found: layer.weight.ncols(),
                });
            }
            if layer.weight.nrows() == 0 {
                return Err(schema(field("weight"), "no rows"));
            }
            if layer.bias.len() != layer.weight.nrows() {
                return Err(Error::DimensionMismatch {
                    field: field("bias"),
                    expected: layer.weight.nrows(),
                    found: layer.bias.len(),
                });
            }
            if let Some(idx) = layer.weight.iter().position(|x| !x.is_finite()) {
                let (r, c) = (idx % layer.weight.nrows(), idx / layer.weight.nrows());
                return Err(Error::NonFinite { field: format!("layers[{k}].weight[{r}][{c}]") });
            }
            if let Some(r) = layer.bias.iter().position(|x| !x.is_finite()) {
                return Err(Error::NonFinite { field: format!("layers[{k}].bias[{r}]") });
            }
            cols = layer.weight.nrows();
        }
        if cols != 3 {
            return Err(Error::DimensionMismatch {
                field: format!("layers[{}] outputs", layers.len() - 1),
                expected: 3,
                found: cols,
            });
        }
        Ok(Self { input_dim, layers })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn from_json(value: &Value) -> Result<Self> {
        let obj = value.as_object().ok_or_else(|| schema("<root>", "expected an object"))?;
        match obj.get("format_version").map(Value::as_u64) {
            Some(Some(FORMAT_VERSION)) => {}
            Some(_) => return Err(schema("format_version", format!("expected {FORMAT_VERSION}"))),
            None => return Err(schema("format_version", "missing")),
        }
        let input_dim = obj
            .get("input_dim")
            .ok_or_else(|| schema("input_dim", "missing"))?
            .as_u64()
            .filter(|&d| d > 0)
            .ok_or_else(|| schema("input_dim", "expected a positive integer"))? as usize;
        let layers = obj
            .get("layers")
            .ok_or_else(|| schema("layers", "missing"))?
            .as_array()
            .ok_or_else(|| schema("layers", "expected an array"))?
            .iter()
            .enumerate()
            .map(|(k, v)| parse_layer(k, v))
            .collect::<Result<Vec<_>>>()?;
        Self::new(input_dim, layers)
    }

    pub fn to_json(&self) -> Value {
        let layers: Vec<Value> = self
            .layers
            .iter()
            .map(|l| {
                let rows: Vec<Vec<f64>> =
                    l.weight.row_iter().map(|r| r.iter().copied().collect()).collect();
                json!({ "weight": rows, "bias": l.bias.as_slice() })
            })
            .collect();
        json!({ "format_version": FORMAT_VERSION, "input_dim": self.input_dim, "layers": layers })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, serde_json::to_string(&self.to_json())?)?;
        Ok(())
    }
}

fn number(v: &Value, field: impl Fn() -> String) -> Result<f64> {
    match v {
        Value::Number(n) => n.as_f64().ok_or_else(|| schema(field(), "not representable as f64")),
        Value::String(s) if is_non_finite_token(s) => Err(Error::NonFinite { field: field() }),
        _ => Err(schema(field(), "expected a number")),
    }
}

fn is_non_finite_token(s: &str) -> bool {
    matches!(
        s.trim().to_ascii_lowercase().as_str(),
        "nan" | "-nan" | "inf" | "-inf" | "+inf" | "infinity" | "-infinity" | "+infinity"
    )
}

fn parse_layer(k: usize, v: &Value) -> Result<Layer> {
    let field = |name: &str| format!("layers[{k}].{name}");
    let obj = v.as_object().ok_or_else(|| schema(format!("layers[{k}]"), "expected an object"))?;
    let rows = obj
        .get("weight")
        .ok_or_else(|| schema(field("weight"), "missing"))?
        .as_array()
        .ok_or_else(|| schema(field("weight"), "expected an array of rows"))?;
    let mut data = Vec::new();
    let mut ncols = None;
    for (r, row) in rows.iter().enumerate() {
        let row = row
            .as_array()
            .ok_or_else(|| schema(format!("layers[{k}].weight[{r}]"), "expected an array"))?;
        match ncols {
            None => ncols = Some(row.len()),
            Some(c) if c != row.len() => {
                return Err(Error::DimensionMismatch {
                    field: format!("layers[{k}].weight[{r}]"),
                    expected: c,
                    found: row.len(),
                })
            }
            Some(_) => {}
        }
        for (c, x) in row.iter().enumerate() {
            data.push(number(x, || format!("layers[{k}].weight[{r}][{c}]"))?);
        }
    }
    let bias = obj
        .get("bias")
        .ok_or_else(|| schema(field("bias"), "missing"))?
        .as_array()
        .ok_or_else(|| schema(field("bias"), "expected an array"))?
        .iter()
        .enumerate()
        .map(|(r, x)| number(x, || format!("layers[{k}].bias[{r}]")))
        .collect::<Result<Vec<_>>>()?;
    let ncols = ncols.unwrap_or(0);
    Ok(Layer {
        weight: DMatrix::from_row_slice(rows.len(), ncols, &data),
        bias: DVector::from_vec(bias),
    })
}

/// Quotes bare `NaN`, `Infinity` and `-Infinity` tokens (as written by
/// Python's `json` module) so they parse and can be reported by field.
fn quote_non_finite(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut in_string = false;
    let mut escaped = false;
    let mut rest = text;
    while let Some(c) = rest.chars().next() {
        if in_string {
            out.push(c);
            match (escaped, c) {
                (true, _) => escaped = false,
                (false, '\\') => escaped = true,
                (false, '"') => in_string = false,
                _ => {}
            }
            rest = &rest[c.len_utf8()..];
            continue;
        }
        if c == '"' {
            in_string = true;
        }
        let token = ["-Infinity", "Infinity", "NaN"].into_iter().find(|t| rest.starts_with(t));
        if let Some(t) = token {
            out.push('"');
            out.push_str(t);
            out.push('"');
            rest = &rest[t.len()..];
        } else {
            out.push(c);
            rest = &rest[c.len_utf8()..];
        }
    }
    out
}

pub fn load_weights(path: impl AsRef<Path>) -> Result<MlpWeights> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::NotFound(format!("{}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&quote_non_finite(&text))?;
    MlpWeights::from_json(&value)
}

/// Affine + ReLU on every layer but the last, affine only on the last.
pub fn mlp_forward(w: &MlpWeights, x: &[f64]) -> Result<[f64; 3]> {
    if x.len() != w.input_dim {
        return Err(Error::DimensionMismatch {
            field: "input".into(),
            expected: w.input_dim,
            found: x.len(),
        });
    }
    let mut h = DVector::from_column_slice(x);
    let last = w.layers.len() - 1;
    for (k, layer) in w.layers.iter().enumerate() {
        h = &layer.weight * h + &layer.bias;
        if k < last {
            h.apply(|v| *v = v.max(0.0));
        }
    }
    Ok([h[0], h[1], h[2]])
}

/// Spectral norm `‖W‖₂`, the square root of the largest eigenvalue of `WᵀW`.
///
/// Diagonal matrices use the closed form, small ones a full SVD and larger
/// ones power iteration on the smaller Gram matrix from an all-ones start.
pub fn operator_norm(w: &DMatrix<f64>) -> f64 {
    if w.iter().all(|&x| x == 0.0) {
        return 0.0;
    }
    let diagonal = (0..w.nrows())
        .all(|r| (0..w.ncols()).all(|c| r == c || w[(r, c)] == 0.0));
    if diagonal {
        return w.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    }
    if w.nrows().min(w.ncols()) <= SVD_MAX_DIM {
        return w.singular_values().max();
    }
    let gram = if w.nrows() < w.ncols() { w * w.transpose() } else { w.transpose() * w };
    power_iteration(&gram).sqrt()
}

/// Largest eigenvalue of a symmetric positive semidefinite matrix.
fn power_iteration(gram: &DMatrix<f64>) -> f64 {
    let n = gram.nrows();
    let starts = [
        DVector::from_element(n, 1.0),
        DVector::from_fn(n, |k, _| 1.0 + k as f64 / n as f64),
    ];
    let mut best = 0.0f64;
    for start in starts {
        let mut v = start.normalize();
        let mut lambda = 0.0;
        for _ in 0..POWER_MAX_ITERS {
            let next = gram * &v;
            let norm = next.norm();
            if norm == 0.0 {
                break;
            }
            v = next / norm;
            let rayleigh = v.dot(&(gram * &v));
            let done = (rayleigh - lambda).abs() <= POWER_TOL * rayleigh.abs();
            lambda = rayleigh;
            if done {
                break;
            }
        }
        best = best.max(lambda);
    }
    best
}

/// `Π ‖Wⁱ‖₂`, a Lipschitz constant of `E` in the Euclidean norms.
pub fn network_lipschitz(w: &MlpWeights) -> f64 {
    w.layers.iter().map(|l| operator_norm(&l.weight)).product()
}

/// `‖E(ζ(u))‖` at every vertex of `T(n_probe)`; the minimum is returned.
pub fn probe_min_norm(w: &MlpWeights, l: usize, n_probe: usize) -> Result<f64> {
    let complex = build_complex(n_probe)?;
    let mut min = f64::INFINITY;
    for p in complex.positions() {
        let y = mlp_forward(w, &zeta(l, p)?)?;
        min = min.min(norm3(&y));
    }
    Ok(min)
}

/// Certified lower bound on `‖E(ζ(u))‖` over the whole sphere: the minimum
/// over the vertices of `T(n_probe)` less `L · 2π/n_probe`, with `L` the
/// Lipschitz constant of `E ∘ ζ`. May be negative, meaning no certificate.
pub fn rho_lower_bound(w: &MlpWeights, l: usize, n_probe: usize) -> Result<f64> {
    let lip = network_lipschitz(w) * zeta_lipschitz(l);
    Ok(probe_min_norm(w, l, n_probe)? - lip * face_diameter_bound(n_probe))
}

fn norm3(y: &[f64; 3]) -> f64 {
    (y[0] * y[0] + y[1] * y[1] + y[2] * y[2]).sqrt()
}

/// `u ↦ E(ζ(u)) / ‖E(ζ(u))‖`.
#[derive(Clone, Debug)]
pub struct EncoderMap {
    weights: MlpWeights,
    l: usize,
    rho: f64,
    lipschitz: f64,
}

impl EncoderMap {
    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn degree_l(&self) -> usize {
        self.l
    }

    pub fn weights(&self) -> &MlpWeights {
        &self.weights
    }
}

/// Wraps an encoder as a sphere map with Lipschitz constant
/// `zeta_lipschitz(L) · Π‖Wⁱ‖ / ρ`. Evaluation fails with a degenerate
/// projection wherever `‖E(ζ(u))‖ < ρ/2`.
pub fn encoder_sphere_map(w: MlpWeights, l: usize, rho: f64) -> Result<EncoderMap> {
    if !rho.is_finite() || rho <= 0.0 {
        return Err(Error::InvalidParameter(format!("rho must be positive, got {rho}")));
    }
    if w.input_dim != 2 * l + 1 {
        return Err(Error::DimensionMismatch {
            field: "input_dim".into(),
            expected: 2 * l + 1,
            found: w.input_dim,
        });
    }
    zeta(l, UnitVector::NORTH)?;
    let lipschitz = zeta_lipschitz(l) * network_lipschitz(&w) / rho;
    Ok(EncoderMap { weights: w, l, rho, lipschitz })
}

impl SphereMap for EncoderMap {
    fn eval(&self, p: UnitVector) -> Result<UnitVector> {
        let y = mlp_forward(&self.weights, &zeta(self.l, p)?)?;
        let norm = norm3(&y);
        if norm.is_nan() || norm < self.rho / 2.0 {
            return Err(Error::DegenerateProjection { norm, threshold: self.rho / 2.0 });
        }
        UnitVector::from_array(y)
    }

    fn lipschitz(&self) -> Option<f64> {
        (self.lipschitz > 0.0).then_some(self.lipschitz)
    }
}
