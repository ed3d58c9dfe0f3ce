//! The Δ-complex `T(n)` on S²: a regular grid in spherical coordinates with
//! the φ = 0 and φ = π rows collapsed to the poles, every grid square cut by
//! its down-left to top-right diagonal.
//!
//! Grid vertex `(i, j)` sits at `θ = 2πi/n`, `φ = (j+1)π/(n+1)`; `(0, -1)` is
//! the north pole and `(0, n)` the south pole.

use std::collections::HashMap;
use std::f64::consts::{PI, TAU};

use serde::Serialize;

use crate::chains::{ChainDim, IntegerChain};
use crate::error::{Error, Result};
use crate::sphere::{spherical_point, UnitVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct VertexId {
    pub i: i32,
    pub j: i32,
}

impl VertexId {
    pub const fn new(i: i32, j: i32) -> Self {
        Self { i, j }
    }

    pub const fn north() -> Self {
        Self { i: 0, j: -1 }
    }

    pub const fn south(n: usize) -> Self {
        Self { i: 0, j: n as i32 }
    }

    pub fn is_member(&self, n: usize) -> bool {
        let n = n as i32;
        (self.i == 0 && (self.j == -1 || self.j == n))
            || ((0..n).contains(&self.i) && (0..n).contains(&self.j))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct EdgeId {
    pub tail: VertexId,
    pub head: VertexId,
}

/// Orientation sign of a face in the fundamental cycle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Orientation {
    Plus,
    Minus,
}

impl Orientation {
    pub fn sign(self) -> i64 {
        match self {
            Orientation::Plus => 1,
            Orientation::Minus => -1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct FaceId {
    pub v0: VertexId,
    pub v1: VertexId,
    pub v2: VertexId,
    pub orientation: Orientation,
}

impl FaceId {
    pub fn vertices(&self) -> [VertexId; 3] {
        [self.v0, self.v1, self.v2]
    }
}

#[derive(Clone, Debug)]
pub struct DeltaComplex {
    n: usize,
    vertices: Vec<VertexId>,
    edges: Vec<EdgeId>,
    faces: Vec<FaceId>,
    vertex_index: HashMap<VertexId, usize>,
    /// (tail index, head index) in canonical order -> edge index.
    edge_index: HashMap<(usize, usize), usize>,
    edge_vertices: Vec<(usize, usize)>,
    face_vertices: Vec<[usize; 3]>,
    face_boundary: Vec<[(usize, i64); 3]>,
}

pub fn build_complex(n: usize) -> Result<DeltaComplex> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!(
            "triangulation needs n >= 3, got {n}"
        )));
    }
    let ni = n as i32;
    let north = VertexId::north();
    let south = VertexId::south(n);
    let v = VertexId::new;
    let next = |i: i32| (i + 1) % ni;

    let mut vertices = vec![north, south];
    for i in 0..ni {
        for j in 0..ni {
            vertices.push(v(i, j));
        }
    }
    vertices.sort();

    // The north-polar family is listed for i = 0..=n in the index set, which
    // repeats ((0,-1),(0,0)); keeping one copy per meridian gives 3n² edges.
    let mut edges = Vec::with_capacity(3 * n * n);
    for i in 0..ni {
        edges.push(EdgeId { tail: north, head: v(i, 0) });
        edges.push(EdgeId { tail: v(i, ni - 1), head: south });
        for j in 0..ni {
            edges.push(EdgeId { tail: v(i, j), head: v(next(i), j) });
        }
        for j in 0..ni - 1 {
            edges.push(EdgeId { tail: v(i, j), head: v(i, j + 1) });
            edges.push(EdgeId { tail: v(i, j), head: v(next(i), j + 1) });
        }
    }
    edges.sort();
    edges.dedup();

    let mut faces = Vec::with_capacity(2 * n * n);
    for i in 0..ni {
        for j in 0..ni - 1 {
            faces.push(FaceId {
                v0: v(i, j),
                v1: v(next(i), j),
                v2: v(next(i), j + 1),
                orientation: Orientation::Plus,
            });
            faces.push(FaceId {
                v0: v(i, j),
                v1: v(i, j + 1),
                v2: v(next(i), j + 1),
                orientation: Orientation::Minus,
            });
        }
        faces.push(FaceId {
            v0: v(i, ni - 1),
            v1: v(next(i), ni - 1),
            v2: south,
            orientation: Orientation::Plus,
        });
        faces.push(FaceId {
            v0: north,
            v1: v(i, 0),
            v2: v(next(i), 0),
            orientation: Orientation::Minus,
        });
    }
    faces.sort();

    let vertex_index: HashMap<VertexId, usize> =
        vertices.iter().enumerate().map(|(k, &v)| (v, k)).collect();
    let edge_vertices: Vec<(usize, usize)> = edges
        .iter()
        .map(|e| (vertex_index[&e.tail], vertex_index[&e.head]))
        .collect();
    let edge_index: HashMap<(usize, usize), usize> = edge_vertices
        .iter()
        .enumerate()
        .map(|(k, &pair)| (pair, k))
        .collect();

    let mut complex = DeltaComplex {
        n,
        vertices,
        edges,
        faces,
        vertex_index,
        edge_index,
        edge_vertices,
        face_vertices: Vec::new(),
        face_boundary: Vec::new(),
    };
    let mut face_vertices = Vec::with_capacity(complex.faces.len());
    let mut face_boundary = Vec::with_capacity(complex.faces.len());
    for face in &complex.faces {
        let [a, b, c] = face.vertices().map(|v| complex.vertex_index[&v]);
        face_vertices.push([a, b, c]);
        // ∂(v0 v1 v2) = (v1 v2) - (v0 v2) + (v0 v1)
        let mut terms = [(0, 0); 3];
        for (slot, (p, q, s)) in [(b, c, 1), (a, c, -1), (a, b, 1)].into_iter().enumerate() {
            let (edge, orient) = complex.oriented_edge(p, q).ok_or_else(|| {
                Error::Internal(format!("face {face:?} has a side missing from the edge set"))
            })?;
            terms[slot] = (edge, s * orient);
        }
        face_boundary.push(terms);
    }
    complex.face_vertices = face_vertices;
    complex.face_boundary = face_boundary;
    Ok(complex)
}

impl DeltaComplex {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn edges(&self) -> &[EdgeId] {
        &self.edges
    }

    pub fn faces(&self) -> &[FaceId] {
        &self.faces
    }

    pub fn num_simplices(&self, dim: ChainDim) -> usize {
        match dim {
            ChainDim::Vertices => self.vertices.len(),
            ChainDim::Edges => self.edges.len(),
            ChainDim::Faces => self.faces.len(),
        }
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.edges.len() as i64 + self.faces.len() as i64
    }

    pub fn vertex_index(&self, v: &VertexId) -> Option<usize> {
        self.vertex_index.get(v).copied()
    }

    pub fn north_index(&self) -> usize {
        self.vertex_index[&VertexId::north()]
    }

    pub fn south_index(&self) -> usize {
        self.vertex_index[&VertexId::south(self.n)]
    }

    /// Edge joining vertex indices `p` and `q`, with `+1` when `p → q` is the
    /// canonical orientation and `-1` when it is reversed.
    pub fn oriented_edge(&self, p: usize, q: usize) -> Option<(usize, i64)> {
        if let Some(&e) = self.edge_index.get(&(p, q)) {
            return Some((e, 1));
        }
        self.edge_index.get(&(q, p)).map(|&e| (e, -1))
    }

    pub fn edge_endpoints(&self, edge: usize) -> (usize, usize) {
        self.edge_vertices[edge]
    }

    pub fn face_vertex_indices(&self, face: usize) -> [usize; 3] {
        self.face_vertices[face]
    }

    /// Signed canonical edges making up the simplicial boundary of `face`.
    pub fn face_boundary(&self, face: usize) -> [(usize, i64); 3] {
        self.face_boundary[face]
    }

    pub fn face_index(&self, face: &FaceId) -> Option<usize> {
        self.faces.binary_search(face).ok()
    }

    /// `(θ, φ)` grid coordinates of a vertex; poles report θ = 0.
    pub fn grid_coords(&self, v: &VertexId) -> (f64, f64) {
        let theta = TAU * v.i as f64 / self.n as f64;
        let phi = (v.j + 1) as f64 * PI / (self.n + 1) as f64;
        (theta, phi)
    }

    pub fn vertex_position(&self, v: &VertexId) -> Result<UnitVector> {
        if !self.vertex_index.contains_key(v) {
            return Err(Error::NotFound(format!("vertex {v:?} not in T({})", self.n)));
        }
        Ok(self.position_unchecked(v))
    }

    pub(crate) fn position_unchecked(&self, v: &VertexId) -> UnitVector {
        if v.j == -1 {
            return UnitVector::NORTH;
        }
        if v.j == self.n as i32 {
            return UnitVector::SOUTH;
        }
        let (theta, phi) = self.grid_coords(v);
        spherical_point(theta, phi)
    }

    /// Positions of all vertices, in vertex order.
    pub fn positions(&self) -> Vec<UnitVector> {
        self.vertices.iter().map(|v| self.position_unchecked(v)).collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "n": self.n,
            "vertices": self.vertices.iter().map(|v| [v.i, v.j]).collect::<Vec<_>>(),
            "edges": self
                .edges
                .iter()
                .map(|e| [[e.tail.i, e.tail.j], [e.head.i, e.head.j]])
                .collect::<Vec<_>>(),
            "faces": self
                .faces
                .iter()
                .map(|f| serde_json::json!({
                    "vertices": f.vertices().map(|v| [v.i, v.j]),
                    "orientation": f.orientation.sign(),
                }))
                .collect::<Vec<_>>(),
        })
    }
}

/// Diameter bound for the faces of `T(n)` used when sizing the mesh.
///
/// This is the `2π/n` figure. The diagonal sides near the equator are
/// longer (up to `sqrt((2π/n)² + (π/(n+1))²)`, see [`face_diameter_sound_bound`]);
/// `2π/n` does bound the distance from any point to its nearest vertex.
pub fn face_diameter_bound(n: usize) -> f64 {
    TAU / n as f64
}

/// Upper bound on the geodesic diameter of every face of `T(n)`: two points
/// of one face differ by at most `2π/n` in θ and `π/(n+1)` in φ, and the
/// straight path in `(θ, φ)` between them is no longer than that hypotenuse.
pub fn face_diameter_sound_bound(n: usize) -> f64 {
    (TAU / n as f64).hypot(PI / (n + 1) as f64)
}

/// `Σ i_τ Δ^τ`: coefficient `+1` on the `Plus` faces, `-1` on the `Minus` faces.
pub fn fundamental_cycle(complex: &DeltaComplex) -> IntegerChain {
    IntegerChain::from_pairs(
        ChainDim::Faces,
        complex
            .faces()
            .iter()
            .enumerate()
            .map(|(k, f)| (k, f.orientation.sign())),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chains::boundary;
    use crate::sphere::geodesic_distance;

    #[test]
    fn counts_for_small_n() {
        let c = build_complex(3).unwrap();
        assert_eq!(
            (c.vertices().len(), c.edges().len(), c.faces().len()),
            (11, 27, 18)
        );
        assert_eq!(c.euler_characteristic(), 2);
        let c = build_complex(5).unwrap();
        assert_eq!(
            (c.vertices().len(), c.edges().len(), c.faces().len()),
            (27, 75, 50)
        );
        assert_eq!(c.euler_characteristic(), 2);
    }

    #[test]
    fn rejects_n_below_three() {
        assert!(matches!(build_complex(2), Err(Error::InvalidParameter(_))));
        assert!(build_complex(0).is_err());
    }

    #[test]
    fn counts_and_euler_characteristic() {
        for n in 3..=12 {
            let c = build_complex(n).unwrap();
            assert_eq!(c.vertices().len(), n * n + 2);
            assert_eq!(c.edges().len(), 3 * n * n);
            assert_eq!(c.faces().len(), 2 * n * n);
            assert_eq!(c.euler_characteristic(), 2);
            assert!(c.vertices().iter().all(|v| v.is_member(n)));
        }
    }

    #[test]
    fn orderings_are_lexicographic() {
        let c = build_complex(4).unwrap();
        assert!(c.vertices().windows(2).all(|w| w[0] < w[1]));
        assert!(c.edges().windows(2).all(|w| w[0] < w[1]));
        assert!(c.faces().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn every_edge_borders_exactly_two_faces() {
        for n in 3..=8 {
            let c = build_complex(n).unwrap();
            let mut incidence = vec![0usize; c.edges().len()];
            for f in 0..c.faces().len() {
                for (e, _) in c.face_boundary(f) {
                    incidence[e] += 1;
                }
            }
            assert!(incidence.iter().all(|&k| k == 2), "n = {n}");
        }
    }

    #[test]
    fn vertex_position_examples() {
        let c = build_complex(3).unwrap();
        let p = c.vertex_position(&VertexId::new(0, -1)).unwrap();
        assert_eq!(p.to_array(), [0.0, 0.0, 1.0]);
        let h = 2f64.sqrt() / 2.0;
        let p = c.vertex_position(&VertexId::new(0, 0)).unwrap().to_array();
        for (a, b) in p.iter().zip([h, 0.0, h]) {
            assert!((a - b).abs() < 1e-12);
        }
        let p = c.vertex_position(&VertexId::new(1, 1)).unwrap().to_array();
        for (a, b) in p.iter().zip([-0.5, 3f64.sqrt() / 2.0, 0.0]) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(matches!(
            c.vertex_position(&VertexId::new(3, 0)),
            Err(Error::NotFound(_))
        ));
    }

    #[test]
    fn vertex_positions_are_distinct() {
        for n in 3..=10 {
            let c = build_complex(n).unwrap();
            let pos = c.positions();
            for a in 0..pos.len() {
                for b in a + 1..pos.len() {
                    assert!(geodesic_distance(&pos[a], &pos[b]) > 1e-6);
                }
            }
        }
    }

    #[test]
    fn face_diameter_bound_values() {
        assert!((face_diameter_bound(3) - 2.0 * PI / 3.0).abs() < 1e-15);
        assert!((face_diameter_bound(10) - PI / 5.0).abs() < 1e-15);
    }

    fn max_vertex_diameter(c: &DeltaComplex) -> f64 {
        let pos = c.positions();
        (0..c.faces().len())
            .map(|f| {
                let [a, b, d] = c.face_vertex_indices(f);
                [(a, b), (b, d), (a, d)]
                    .iter()
                    .map(|&(p, q)| geodesic_distance(&pos[p], &pos[q]))
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn measured_face_diameters() {
        for n in 3..=12 {
            let c = build_complex(n).unwrap();
            let measured = max_vertex_diameter(&c);
            assert!(measured <= face_diameter_sound_bound(n) + 1e-12, "n = {n}");
            // Grid sides alone respect 2π/n.
            let pos = c.positions();
            for (e, edge) in c.edges().iter().enumerate() {
                let (p, q) = c.edge_endpoints(e);
                let diagonal = edge.head.i != edge.tail.i && edge.head.j != edge.tail.j
                    && edge.tail.j >= 0 && edge.head.j < n as i32;
                if !diagonal {
                    assert!(geodesic_distance(&pos[p], &pos[q]) <= face_diameter_bound(n) + 1e-12);
                }
            }
        }
    }

    #[test]
    fn equatorial_diagonal_exceeds_two_pi_over_n() {
        // Documents why face_diameter_sound_bound exists.
        let c = build_complex(11).unwrap();
        assert!(max_vertex_diameter(&c) > face_diameter_bound(11));
    }

    #[test]
    fn fundamental_cycle_is_a_cycle() {
        for n in 3..=12 {
            let c = build_complex(n).unwrap();
            let z = fundamental_cycle(&c);
            assert_eq!(z.len(), 2 * n * n);
            assert!(z.iter().all(|(_, k)| k.abs() == 1));
            for (f, k) in z.iter() {
                if c.faces()[f].orientation == Orientation::Minus {
                    assert_eq!(k, -1);
                }
            }
            assert!(boundary(&c, &z).unwrap().is_zero());
        }
    }

    #[test]
    fn json_export_shape() {
        let c = build_complex(3).unwrap();
        let js = c.to_json();
        assert_eq!(js["n"], 3);
        assert_eq!(js["vertices"].as_array().unwrap().len(), 11);
        assert_eq!(js["edges"].as_array().unwrap().len(), 27);
        assert_eq!(js["faces"].as_array().unwrap().len(), 18);
    }
}
