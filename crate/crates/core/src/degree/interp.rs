//! The continuous map `g` that the simplicial degree is computed from: on the
//! 1-skeleton of `T(n)` it follows designated paths between rounded images,
//! inside a face it blends the three edge values by inverse distance.

use std::f64::consts::{PI, TAU};

use crate::degree::codomain::{round_vertex, DesignatedPath};
use crate::degree::maps::SphereMap;
use crate::error::{Error, Result};
use crate::sphere::{geodesic_distance, spherical_point, to_spherical, UnitVector};
use crate::triangulation::{DeltaComplex, VertexId};

const SAMPLES: usize = 33;
const GOLDEN_STEPS: usize = 60;

/// Below this distance `x` counts as lying on the edge.
const ON_EDGE: f64 = 1e-12;

/// Face of `T(n)` containing `x`, as the index into `complex.faces()`.
pub fn locate_face(complex: &DeltaComplex, x: UnitVector) -> usize {
    let n = complex.n() as i32;
    let c = to_spherical(x);
    let u = c.theta() * n as f64 / TAU;
    let v = c.phi() * (n + 1) as f64 / PI - 1.0;
    let i = (u.floor() as i32).clamp(0, n - 1);
    let i1 = (i + 1) % n;
    let face = if v < 0.0 {
        [VertexId::north(), VertexId::new(i, 0), VertexId::new(i1, 0)]
    } else if v >= (n - 1) as f64 {
        [VertexId::new(i, n - 1), VertexId::new(i1, n - 1), VertexId::south(n as usize)]
    } else {
        let j = (v.floor() as i32).clamp(0, n - 2);
        let (s, t) = (u - i as f64, v - j as f64);
        if t <= s {
            [VertexId::new(i, j), VertexId::new(i1, j), VertexId::new(i1, j + 1)]
        } else {
            [VertexId::new(i, j), VertexId::new(i, j + 1), VertexId::new(i1, j + 1)]
        }
    };
    let idx = face.map(|v| complex.vertex_index(&v).expect("grid vertex"));
    complex
        .faces()
        .iter()
        .enumerate()
        .find(|(k, _)| complex.face_vertex_indices(*k) == idx)
        .map(|(k, _)| k)
        .expect("every point lies in a face")
}

/// `(θ, φ)` parameters of the face corners, with θ unwrapped across the
/// seam. A pole takes the θ of whichever corner it is paired with, so its
/// entry here is a placeholder.
fn corner_params(complex: &DeltaComplex, corners: &[VertexId; 3]) -> [(f64, f64); 3] {
    let n = complex.n() as i32;
    let interior = |v: &VertexId| v.j >= 0 && v.j < n;
    let seam = corners.iter().any(|v| interior(v) && v.i == n - 1)
        && corners.iter().any(|v| interior(v) && v.i == 0);
    corners.map(|v| {
        let (theta, phi) = complex.grid_coords(&v);
        (if seam && v.i == 0 && interior(&v) { theta + TAU } else { theta }, phi)
    })
}

fn is_pole(complex: &DeltaComplex, v: &VertexId) -> bool {
    v.j == -1 || v.j == complex.n() as i32
}

/// Straight segment in `(θ, φ)` between two face corners.
fn edge_curve(
    complex: &DeltaComplex,
    (a, pa): (&VertexId, (f64, f64)),
    (b, pb): (&VertexId, (f64, f64)),
) -> impl Fn(f64) -> UnitVector {
    let ta = if is_pole(complex, a) { pb.0 } else { pa.0 };
    let tb = if is_pole(complex, b) { pa.0 } else { pb.0 };
    let (fa, fb) = (pa.1, pb.1);
    move |s: f64| spherical_point(ta + s * (tb - ta), fa + s * (fb - fa))
}

/// Parameter and distance of the closest point of `curve([0, 1])` to `x`.
fn project(x: &UnitVector, curve: &impl Fn(f64) -> UnitVector) -> (f64, f64) {
    let dist = |s: f64| geodesic_distance(x, &curve(s));
    let step = 1.0 / (SAMPLES - 1) as f64;
    let best = (0..SAMPLES)
        .map(|k| k as f64 * step)
        .min_by(|a, b| dist(*a).total_cmp(&dist(*b)))
        .unwrap_or(0.0);
    let (mut lo, mut hi) = ((best - step).max(0.0), (best + step).min(1.0));
    let r = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..GOLDEN_STEPS {
        let m1 = hi - r * (hi - lo);
        let m2 = lo + r * (hi - lo);
        if dist(m1) < dist(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let s = (lo + hi) / 2.0;
    [(s, dist(s)), (best, dist(best)), (0.0, dist(0.0)), (1.0, dist(1.0))]
        .into_iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("non-empty")
}

/// Evaluates `g` at `x` for the map `f` sampled on `complex`.
///
/// On an edge the value is the point of the designated path between the
/// rounded images of the endpoints at the same fraction of the way along.
/// Inside a face it is `Σ g(xᵢ)/αᵢ` normalized, where `xᵢ` is the closest
/// point of edge `i` and `αᵢ` its distance to `x`.
pub fn eval_g<M: SphereMap + ?Sized>(f: &M, complex: &DeltaComplex, x: UnitVector) -> Result<UnitVector> {
    let face = locate_face(complex, x);
    let corners = complex.faces()[face].vertices();
    let params = corner_params(complex, &corners);
    let rounded = corners
        .iter()
        .map(|v| Ok(round_vertex(f.eval(complex.vertex_position(v)?)?)))
        .collect::<Result<Vec<_>>>()?;

    let mut blend = [0.0; 3];
    for (a, b) in [(1, 2), (0, 2), (0, 1)] {
        let curve = edge_curve(complex, (&corners[a], params[a]), (&corners[b], params[b]));
        let (s, alpha) = project(&x, &curve);
        // canonical orientation of the T(n) edge decides which end is the tail
        let (ia, ib) = (complex.vertex_index(&corners[a]), complex.vertex_index(&corners[b]));
        let (_, orient) = ia
            .zip(ib)
            .and_then(|(p, q)| complex.oriented_edge(p, q))
            .ok_or_else(|| Error::Internal("face side is not an edge".into()))?;
        let (tail, head, s) = if orient == 1 {
            (rounded[a], rounded[b], s)
        } else {
            (rounded[b], rounded[a], 1.0 - s)
        };
        let value = DesignatedPath::between(&tail, &head).point_at(&tail, s);
        if alpha < ON_EDGE {
            return Ok(value);
        }
        for (acc, c) in blend.iter_mut().zip(value.to_array()) {
            *acc += c / alpha;
        }
    }
    let [bx, by, bz] = blend;
    let norm = (bx * bx + by * by + bz * bz).sqrt();
    let scale: f64 = blend.iter().map(|c| c.abs()).fold(0.0, f64::max);
    if norm <= 1e-12 * scale {
        return Err(Error::Internal("g blend vanished inside a face".into()));
    }
    UnitVector::new(bx, by, bz)
}
