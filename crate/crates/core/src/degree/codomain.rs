//! The coarse codomain grid `T(3)`: vertex rounding, designated paths, and
//! the face lifts that turn a 1-cycle of paths into a 2-chain.
//!
//! Grid levels run from 0 (north pole) to 4 (south pole); level `l` sits at
//! `φ = lπ/4` and corresponds to row `j = l - 1`.

use std::f64::consts::{FRAC_PI_4, PI, TAU};
use std::sync::OnceLock;

use crate::chains::{boundary, ChainDim, IntegerChain, LiftSolver};
use crate::error::{Error, Result};
use crate::sphere::{spherical_point, to_spherical, SphericalCoord, TimezoneSet, UnitVector};
use crate::triangulation::{build_complex, fundamental_cycle, DeltaComplex, EdgeId, VertexId};

const K: i32 = 3;
const SECTOR: f64 = TAU / 3.0;
const LEVELS: i32 = 4;

/// Nearest integer with exact halves rounded down.
fn round_half_down(x: f64) -> i64 {
    (x - 0.5).ceil() as i64
}

/// Rounds θ and φ independently to the `T(3)` grid. Exact midpoints go to
/// the smaller grid value; φ rounding to 0 or π yields the pole.
pub fn round_coord(c: &SphericalCoord) -> VertexId {
    let level = round_half_down(c.phi() / FRAC_PI_4).clamp(0, LEVELS as i64) as i32;
    match level {
        0 => VertexId::north(),
        LEVELS => VertexId::south(3),
        _ => {
            let i = round_half_down(c.theta() / SECTOR).rem_euclid(K as i64) as i32;
            VertexId::new(i, level - 1)
        }
    }
}

pub fn round_vertex(p: UnitVector) -> VertexId {
    round_coord(&to_spherical(p))
}

fn level(v: &VertexId) -> i32 {
    v.j + 1
}

fn is_north(v: &VertexId) -> bool {
    v.j == -1
}

fn is_pole(v: &VertexId) -> bool {
    v.j == -1 || v.j == LEVELS - 1
}

/// Closed timezones containing a `T(3)` vertex.
pub fn vertex_timezones(v: &VertexId) -> TimezoneSet {
    if is_pole(v) {
        return TimezoneSet::ALL;
    }
    let i = v.i as usize;
    TimezoneSet::single(i).union(TimezoneSet::single((i + 2) % 3))
}

/// Timezone holding a `T(3)` face: the sector between its two meridians.
pub fn face_timezone(face: &crate::triangulation::FaceId) -> usize {
    if is_north(&face.v0) {
        face.v1.i as usize
    } else {
        face.v0.i as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Segment {
    /// Along meridian `i` from level `from` to level `to`.
    Vertical { i: i32, from: i32, to: i32 },
    /// Along row `level` from meridian `from`, one sector in direction `step`.
    Horizontal { level: i32, from: i32, step: i32 },
}

impl Segment {
    /// Length in `(θ, φ)` coordinates.
    fn length(&self) -> f64 {
        match *self {
            Segment::Vertical { from, to, .. } => (to - from).abs() as f64 * FRAC_PI_4,
            Segment::Horizontal { .. } => SECTOR,
        }
    }

    fn point(&self, s: f64) -> (f64, f64) {
        match *self {
            Segment::Vertical { i, from, to } => {
                let phi = (from as f64 + s * (to - from) as f64) * FRAC_PI_4;
                (i as f64 * SECTOR, phi)
            }
            Segment::Horizontal { level, from, step } => {
                let theta = (from as f64 + s * step as f64) * SECTOR;
                (theta, level as f64 * FRAC_PI_4)
            }
        }
    }
}

/// The designated path between two `T(3)` vertices: at most one vertical and
/// one horizontal run, vertical meridian chosen by the latitude rule, the
/// horizontal run at the lower of the two latitudes taken the short way.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DesignatedPath {
    segments: Vec<Segment>,
}

impl DesignatedPath {
    pub fn between(p: &VertexId, q: &VertexId) -> Self {
        let mut segments = Vec::new();
        if p == q {
            return Self { segments };
        }
        let (lp, lq) = (level(p), level(q));
        if lp < lq {
            let meridian = if is_north(p) { 0 } else { p.i };
            segments.push(Segment::Vertical { i: meridian, from: lp, to: lq });
            push_horizontal(&mut segments, lq, meridian, q.i);
        } else {
            let meridian = if is_north(q) { 0 } else { q.i };
            push_horizontal(&mut segments, lp, p.i, meridian);
            if lq != lp {
                segments.push(Segment::Vertical { i: meridian, from: lp, to: lq });
            }
        }
        Self { segments }
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    /// Directed `T(3)` edges making up the path, with `+1` for steps along
    /// the canonical edge orientation.
    pub fn steps(&self) -> Vec<(EdgeId, i64)> {
        let v = VertexId::new;
        let at = |i: i32, l: i32| match l {
            0 => VertexId::north(),
            LEVELS => VertexId::south(3),
            _ => v(i, l - 1),
        };
        let mut out = Vec::new();
        for seg in &self.segments {
            match *seg {
                Segment::Vertical { i, from, to } => {
                    let dir = (to - from).signum();
                    let mut l = from;
                    while l != to {
                        let (upper, lower) = if dir > 0 { (l, l + 1) } else { (l - 1, l) };
                        out.push((EdgeId { tail: at(i, upper), head: at(i, lower) }, dir as i64));
                        l += dir;
                    }
                }
                Segment::Horizontal { level, from, step } => {
                    let j = level - 1;
                    if step > 0 {
                        out.push((EdgeId { tail: v(from, j), head: v((from + 1) % K, j) }, 1));
                    } else {
                        let to = (from + K - 1) % K;
                        out.push((EdgeId { tail: v(to, j), head: v(from, j) }, -1));
                    }
                }
            }
        }
        out
    }

    /// Point at parameter `t ∈ [0, 1]`, moving at constant speed in
    /// spherical coordinates.
    pub fn point_at(&self, start: &VertexId, t: f64) -> UnitVector {
        let total: f64 = self.segments.iter().map(Segment::length).sum();
        if self.segments.is_empty() || total == 0.0 {
            return vertex_position_t3(start);
        }
        let mut remaining = t.clamp(0.0, 1.0) * total;
        for (k, seg) in self.segments.iter().enumerate() {
            let len = seg.length();
            if remaining <= len || k + 1 == self.segments.len() {
                let (theta, phi) = seg.point((remaining / len).min(1.0));
                return spherical_point(theta, phi.clamp(0.0, PI));
            }
            remaining -= len;
        }
        unreachable!()
    }
}

fn push_horizontal(segments: &mut Vec<Segment>, level: i32, from: i32, to: i32) {
    if level == 0 || level == LEVELS {
        return;
    }
    match (to - from).rem_euclid(K) {
        0 => {}
        1 => segments.push(Segment::Horizontal { level, from, step: 1 }),
        _ => segments.push(Segment::Horizontal { level, from, step: -1 }),
    }
}

fn vertex_position_t3(v: &VertexId) -> UnitVector {
    match level(v) {
        0 => UnitVector::NORTH,
        LEVELS => UnitVector::SOUTH,
        l => spherical_point(v.i as f64 * SECTOR, l as f64 * FRAC_PI_4),
    }
}

/// Designated path as ordered `(edge, sign)` steps on `T(3)`.
pub fn designated_path(p: &VertexId, q: &VertexId) -> Vec<(EdgeId, i64)> {
    DesignatedPath::between(p, q).steps()
}

/// `T(3)` together with everything derived from it once: the lift solver,
/// the path chains for all vertex pairs and the lifts of all corner triples.
pub struct Codomain {
    solver: LiftSolver,
    cycle: Vec<i64>,
    paths: Vec<IntegerChain>,
    face_lifts: Vec<Option<Vec<i64>>>,
}

static CODOMAIN: OnceLock<Codomain> = OnceLock::new();

/// Shared codomain tables, built on first use.
pub fn codomain() -> &'static Codomain {
    CODOMAIN.get_or_init(|| Codomain::build().expect("T(3) tables"))
}

impl Codomain {
    fn build() -> Result<Self> {
        let complex = build_complex(3)?;
        let cycle = fundamental_cycle(&complex).to_dense(complex.faces().len());
        let nv = complex.vertices().len();
        let mut paths = Vec::with_capacity(nv * nv);
        for p in complex.vertices() {
            for q in complex.vertices() {
                paths.push(path_chain(&complex, p, q)?);
            }
        }
        let solver = LiftSolver::new(complex)?;
        let mut me = Self { solver, cycle, paths, face_lifts: Vec::new() };
        let mut face_lifts = Vec::with_capacity(nv * nv * nv);
        for a in 0..nv {
            for b in 0..nv {
                for c in 0..nv {
                    let corners = [a, b, c].map(|k| me.complex().vertices()[k]);
                    let bnd = me.corner_boundary([a, b, c]);
                    face_lifts.push(match me.face_chain(&corners, &bnd) {
                        Ok(chain) => Some(chain.to_dense(me.cycle.len())),
                        Err(Error::TimezoneViolation { .. }) => None,
                        Err(e) => return Err(e),
                    });
                }
            }
        }
        me.face_lifts = face_lifts;
        Ok(me)
    }

    pub fn complex(&self) -> &DeltaComplex {
        self.solver.complex()
    }

    pub fn solver(&self) -> &LiftSolver {
        &self.solver
    }

    /// Dense coefficients of the fundamental cycle of `T(3)`.
    pub fn cycle(&self) -> &[i64] {
        &self.cycle
    }

    pub fn vertex_index(&self, v: &VertexId) -> Option<usize> {
        self.complex().vertex_index(v)
    }

    /// Path chain between vertex indices `p` and `q`.
    pub fn path(&self, p: usize, q: usize) -> &IntegerChain {
        &self.paths[p * self.complex().vertices().len() + q]
    }

    /// `path(b,c) - path(a,c) + path(a,b)`
    pub fn corner_boundary(&self, [a, b, c]: [usize; 3]) -> IntegerChain {
        let mut out = self.path(b, c).clone();
        out.add_scaled(self.path(a, c), -1);
        out.add_scaled(self.path(a, b), 1);
        out
    }

    /// Minimal lift of a face-boundary cycle whose corners (the rounded
    /// images of the face's vertices) share a closed timezone.
    ///
    /// Fails with a timezone violation when the corners span all three
    /// timezones, when the minimal lift is not unique, or when the lift
    /// leaves the shared timezone. Faces of the north cap are admitted in
    /// every timezone, since paths from the north pole run down meridian 0.
    pub fn face_chain(&self, corners: &[VertexId; 3], bnd: &IntegerChain) -> Result<IntegerChain> {
        let violation = || Error::TimezoneViolation { face: None, corners: *corners };
        let shared = corners
            .iter()
            .fold(TimezoneSet::ALL, |acc, v| acc.intersection(vertex_timezones(v)));
        if shared.is_empty() {
            return Err(violation());
        }
        let lift = self.solver.minimal_lift(bnd)?;
        if !lift.unique {
            return Err(violation());
        }
        let faces = self.complex().faces();
        let fits = |t: usize| {
            lift.chain
                .support()
                .all(|f| is_north(&faces[f].v0) || face_timezone(&faces[f]) == t)
        };
        if !shared.iter().any(fits) {
            return Err(violation());
        }
        if boundary(self.complex(), &lift.chain)? != *bnd {
            return Err(Error::Internal("lift does not reproduce its boundary".into()));
        }
        Ok(lift.chain)
    }

    /// Precomputed [`Codomain::face_chain`] for corner vertex indices;
    /// `None` marks a timezone violation.
    pub fn face_lift(&self, [a, b, c]: [usize; 3]) -> Option<&[i64]> {
        let nv = self.complex().vertices().len();
        self.face_lifts[(a * nv + b) * nv + c].as_deref()
    }
}

fn path_chain(t3: &DeltaComplex, p: &VertexId, q: &VertexId) -> Result<IntegerChain> {
    let mut chain = IntegerChain::zero(ChainDim::Edges);
    for (edge, s) in designated_path(p, q) {
        let (a, b) = (t3.vertex_index(&edge.tail), t3.vertex_index(&edge.head));
        let (idx, orient) = a
            .zip(b)
            .and_then(|(a, b)| t3.oriented_edge(a, b))
            .ok_or_else(|| Error::Internal(format!("path step {edge:?} is not a T(3) edge")))?;
        if orient != 1 {
            return Err(Error::Internal(format!("path step {edge:?} not canonical")));
        }
        chain.add_term(idx, s);
    }
    Ok(chain)
}
