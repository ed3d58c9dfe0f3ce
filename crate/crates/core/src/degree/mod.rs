//! Exact degree of a map `S² → S²`.
//!
//! The map is sampled at the vertices of `T(n)`, each image is rounded to the
//! coarse grid `T(3)`, edges become designated paths and faces the minimal
//! 2-chains filling their boundaries. Pushing the fundamental cycle of `T(n)`
//! through this chain map gives `d` times the fundamental cycle of `T(3)`.

pub mod codomain;
pub mod interp;
pub mod maps;

use std::collections::HashMap;
use std::f64::consts::{PI, TAU};

use log::debug;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chains::{ChainDim, IntegerChain};
use crate::error::{Error, Result};
use crate::sphere::{signed_solid_angle, UnitVector};
use crate::triangulation::{build_complex, DeltaComplex, EdgeId, VertexId};

pub use codomain::{codomain, designated_path, round_coord, round_vertex, Codomain};
pub use interp::eval_g;
pub use maps::SphereMap;

/// Largest mesh parameter accepted; `T(n)` has `2n²` faces.
pub const MAX_MESH: usize = 4096;

/// `√3 · sin(π/8)`: image faces smaller than this stay inside one timezone.
pub fn epsilon() -> f64 {
    3f64.sqrt() * (PI / 8.0).sin()
}

/// Smallest `n ≥ 3` with `2π/n < ε / L`.
pub fn choose_n(lipschitz: f64) -> Result<usize> {
    if !lipschitz.is_finite() || lipschitz <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "Lipschitz constant must be positive and finite, got {lipschitz}"
        )));
    }
    let n = (TAU * lipschitz / epsilon()).floor() + 1.0;
    if n > MAX_MESH as f64 {
        return Err(Error::InvalidParameter(format!(
            "Lipschitz constant {lipschitz} needs n = {n}, above the limit {MAX_MESH}; pass n explicitly"
        )));
    }
    Ok((n as usize).max(3))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegreeReport {
    pub degree: i64,
    pub n_used: usize,
    pub epsilon: f64,
    pub timezone_checks_passed: bool,
    /// Lipschitz constant the mesh was sized against, if any.
    pub lipschitz_used: Option<f64>,
    /// True when the mesh is not certified by a Lipschitz bound.
    pub heuristic: bool,
    pub oracle_estimate: Option<f64>,
}

#[derive(Clone, Copy, Debug)]
pub struct DegreeOptions {
    /// Mesh parameter; defaults to `choose_n` of the map's Lipschitz constant.
    pub n: Option<usize>,
    pub oracle: bool,
    pub parallel: bool,
}

impl Default for DegreeOptions {
    fn default() -> Self {
        Self { n: None, oracle: false, parallel: true }
    }
}

pub fn compute_degree<M: SphereMap + ?Sized>(f: &M, n: Option<usize>) -> Result<DegreeReport> {
    compute_degree_with(f, &DegreeOptions { n, ..DegreeOptions::default() })
}

pub fn compute_degree_with<M: SphereMap + ?Sized>(f: &M, opts: &DegreeOptions) -> Result<DegreeReport> {
    let lipschitz = f.lipschitz();
    let n = match (opts.n, lipschitz) {
        (Some(n), _) => n,
        (None, Some(l)) => choose_n(l)?,
        (None, None) => {
            return Err(Error::InvalidParameter(
                "either a mesh size or a Lipschitz constant is required".into(),
            ))
        }
    };
    if n > MAX_MESH {
        return Err(Error::InvalidParameter(format!("n = {n} above the limit {MAX_MESH}")));
    }
    let complex = build_complex(n)?;
    let images = evaluate(f, &complex, opts.parallel)?;
    let pushed = push_fundamental_cycle(&complex, &images)?;
    let degree = cycle_multiple(&pushed)?;
    let certified = match lipschitz {
        Some(l) => choose_n(l).is_ok_and(|needed| n >= needed),
        None => false,
    };
    let oracle_estimate = opts.oracle.then(|| oracle_from_images(&complex, &images));
    debug!("n = {n}: degree {degree}, certified {certified}");
    Ok(DegreeReport {
        degree,
        n_used: n,
        epsilon: epsilon(),
        timezone_checks_passed: true,
        lipschitz_used: lipschitz,
        heuristic: !certified,
        oracle_estimate,
    })
}

/// Mesh cap for automatic refinement: `4·10⁶` vertices.
pub const AUTO_MAX_N: usize = 2000;

/// `⌈1.5 n⌉`
pub fn refine(n: usize) -> usize {
    (3 * n).div_ceil(2)
}

/// Like [`compute_degree_with`], but a timezone violation moves on to the
/// next refinement until `cap`. A retried result is marked heuristic since
/// the Lipschitz constant that sized the first mesh was evidently wrong.
pub fn degree_with_retries<M: SphereMap + ?Sized>(
    f: &M,
    opts: &DegreeOptions,
    cap: usize,
) -> Result<DegreeReport> {
    let mut n = match (opts.n, f.lipschitz()) {
        (Some(n), _) => n,
        (None, Some(l)) => choose_n(l)?,
        (None, None) => return compute_degree_with(f, opts),
    };
    let mut retried = false;
    loop {
        match compute_degree_with(f, &DegreeOptions { n: Some(n), ..*opts }) {
            Ok(mut report) => {
                report.heuristic |= retried;
                return Ok(report);
            }
            Err(Error::TimezoneViolation { face, corners }) => {
                let next = refine(n);
                if next > cap {
                    return Err(Error::TimezoneViolation { face, corners });
                }
                debug!("timezone violation at n = {n}, retrying at {next}");
                n = next;
                retried = true;
            }
            Err(e) => return Err(e),
        }
    }
}

/// Refines from `start` by factors of 1.5 until three successive meshes
/// report the same degree, skipping meshes with timezone violations. The
/// returned report is the one at the finest mesh used.
pub fn auto_degree<M: SphereMap + ?Sized>(
    f: &M,
    start: usize,
    cap: usize,
    opts: &DegreeOptions,
) -> Result<DegreeReport> {
    let mut n = start.max(3);
    let mut streak: Option<(i64, usize)> = None;
    while n <= cap {
        match compute_degree_with(f, &DegreeOptions { n: Some(n), ..*opts }) {
            Ok(report) => {
                let count = match streak {
                    Some((d, c)) if d == report.degree => c + 1,
                    _ => 1,
                };
                debug!("auto: n = {n}, degree {} ({count} in a row)", report.degree);
                if count == 3 {
                    return Ok(report);
                }
                streak = Some((report.degree, count));
            }
            Err(Error::TimezoneViolation { .. }) => streak = None,
            Err(e) => return Err(e),
        }
        n = refine(n);
    }
    Err(Error::NoAgreement { n_max: cap })
}

/// Images of all vertices of `complex`, in vertex order.
pub fn evaluate<M: SphereMap + ?Sized>(
    f: &M,
    complex: &DeltaComplex,
    parallel: bool,
) -> Result<Vec<UnitVector>> {
    let positions = complex.positions();
    if parallel {
        positions.into_par_iter().map(|p| f.eval(p)).collect()
    } else {
        positions.into_iter().map(|p| f.eval(p)).collect()
    }
}

/// `ĝ(Z)` as dense face coefficients on `T(3)`, given the vertex images.
pub fn push_fundamental_cycle(complex: &DeltaComplex, images: &[UnitVector]) -> Result<Vec<i64>> {
    let cd = codomain();
    let rounded = rounded_indices(cd, images)?;
    let mut pushed = vec![0i64; cd.cycle().len()];
    for (k, face) in complex.faces().iter().enumerate() {
        let corners = complex.face_vertex_indices(k).map(|v| rounded[v]);
        let lift = cd.face_lift(corners).ok_or_else(|| Error::TimezoneViolation {
            face: Some((k, *face)),
            corners: corners.map(|c| cd.complex().vertices()[c]),
        })?;
        let sign = face.orientation.sign();
        for (acc, &c) in pushed.iter_mut().zip(lift) {
            *acc += sign * c;
        }
    }
    Ok(pushed)
}

fn rounded_indices(cd: &Codomain, images: &[UnitVector]) -> Result<Vec<usize>> {
    images
        .iter()
        .map(|p| {
            let v = round_vertex(*p);
            cd.vertex_index(&v)
                .ok_or_else(|| Error::Internal(format!("rounded vertex {v:?} outside T(3)")))
        })
        .collect()
}

/// `d` with `pushed = d · Z` coefficient-wise.
pub fn cycle_multiple(pushed: &[i64]) -> Result<i64> {
    let z = codomain().cycle();
    let d = pushed[0] * z[0];
    if pushed.iter().zip(z).all(|(&p, &c)| p == d * c) {
        Ok(d)
    } else {
        Err(Error::NonMultiple)
    }
}

/// `ĝ` on one edge of `T(n)`: the designated path between the rounded
/// images of its endpoints, as a 1-chain on `T(3)`.
pub fn edge_chain(
    complex: &DeltaComplex,
    edge: &EdgeId,
    rounded: &HashMap<VertexId, VertexId>,
) -> Result<IntegerChain> {
    let lookup = |v: &VertexId| {
        rounded
            .get(v)
            .ok_or_else(|| Error::NotFound(format!("no rounded image for vertex {v:?}")))
    };
    if !edge.tail.is_member(complex.n()) || !edge.head.is_member(complex.n()) {
        return Err(Error::NotFound(format!("edge {edge:?} not in T({})", complex.n())));
    }
    let (p, q) = (lookup(&edge.tail)?, lookup(&edge.head)?);
    let cd = codomain();
    let (a, b) = cd
        .vertex_index(p)
        .zip(cd.vertex_index(q))
        .ok_or_else(|| Error::NotFound(format!("{p:?} or {q:?} is not a T(3) vertex")))?;
    Ok(cd.path(a, b).clone())
}

/// `ĝ` on every face of `T(n)`, together with `ĝ` of the face boundary
/// assembled from edge chains. Used to check the chain-map law.
pub fn face_chains(
    complex: &DeltaComplex,
    images: &[UnitVector],
) -> Result<Vec<(IntegerChain, IntegerChain)>> {
    let cd = codomain();
    let rounded: HashMap<VertexId, VertexId> = complex
        .vertices()
        .iter()
        .zip(images)
        .map(|(v, p)| (*v, round_vertex(*p)))
        .collect();
    let edges = complex
        .edges()
        .iter()
        .map(|e| edge_chain(complex, e, &rounded))
        .collect::<Result<Vec<_>>>()?;
    complex
        .faces()
        .iter()
        .enumerate()
        .map(|(k, face)| {
            let mut bnd = IntegerChain::zero(ChainDim::Edges);
            for (e, s) in complex.face_boundary(k) {
                bnd.add_scaled(&edges[e], s);
            }
            let corners = face.vertices().map(|v| rounded[&v]);
            let lift = cd.face_chain(&corners, &bnd).map_err(|err| match err {
                Error::TimezoneViolation { corners, .. } => {
                    Error::TimezoneViolation { face: Some((k, *face)), corners }
                }
                other => other,
            })?;
            Ok((lift, bnd))
        })
        .collect()
}

/// Solid-angle estimate of the degree: the signed area swept by the image
/// triangles over `4π`. Degenerate image triangles contribute nothing.
pub fn degree_oracle<M: SphereMap + ?Sized>(f: &M, n: usize) -> Result<f64> {
    let complex = build_complex(n)?;
    let images = evaluate(f, &complex, true)?;
    Ok(oracle_from_images(&complex, &images))
}

pub fn oracle_from_images(complex: &DeltaComplex, images: &[UnitVector]) -> f64 {
    // `Plus` faces are clockwise seen from outside, hence the minus sign
    let total: f64 = complex
        .faces()
        .par_iter()
        .enumerate()
        .map(|(k, face)| {
            let [a, b, c] = complex.face_vertex_indices(k);
            face.orientation.sign() as f64 * signed_solid_angle(&images[a], &images[b], &images[c])
        })
        .sum();
    -total / (4.0 * PI)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chains::boundary;
    use crate::degree::maps::{Antipodal, AzimuthalPower, Constant, Identity};

    #[test]
    fn epsilon_value() {
        assert!((epsilon() - 0.662_827_9).abs() < 1e-6);
        assert!(epsilon() > 0.66);
    }

    #[test]
    fn choose_n_examples() {
        assert_eq!(choose_n(1.0).unwrap(), 10);
        assert_eq!(choose_n(0.1).unwrap(), 3);
        assert_eq!(choose_n(5.0).unwrap(), 48);
        for bad in [0.0, -1.0, f64::NAN, f64::INFINITY] {
            assert!(matches!(choose_n(bad), Err(Error::InvalidParameter(_))));
        }
    }

    #[test]
    fn choose_n_is_minimal() {
        for l in [0.2, 0.5, 1.0, 1.7, 2.0, 3.3, 8.0] {
            let n = choose_n(l).unwrap();
            assert!(TAU / n as f64 * l < epsilon());
            if n > 3 {
                assert!(TAU / (n - 1) as f64 * l >= epsilon());
            }
        }
    }

    #[test]
    fn known_degrees() {
        assert_eq!(compute_degree(&Identity, None).unwrap().degree, 1);
        assert_eq!(compute_degree(&Antipodal, None).unwrap().degree, -1);
        let c = Constant(UnitVector::new(0.3, 0.1, 0.9).unwrap());
        assert_eq!(compute_degree(&c, None).unwrap().degree, 0);
        assert_eq!(compute_degree(&AzimuthalPower { k: 2 }, None).unwrap().degree, 2);
        assert_eq!(compute_degree(&AzimuthalPower { k: -3 }, None).unwrap().degree, -3);
    }

    #[test]
    fn report_fields() {
        let r = compute_degree_with(&Identity, &DegreeOptions { oracle: true, ..Default::default() })
            .unwrap();
        assert_eq!(r.n_used, 10);
        assert!(!r.heuristic);
        assert_eq!(r.lipschitz_used, Some(1.0));
        assert!((r.oracle_estimate.unwrap() - 1.0).abs() < 1e-9);
        let r = compute_degree(&Identity, Some(4)).unwrap();
        assert!(r.heuristic);
        assert_eq!(r.degree, 1);
    }

    #[test]
    fn identity_on_coarse_grid_is_the_fundamental_cycle() {
        let t3 = build_complex(3).unwrap();
        let pushed = push_fundamental_cycle(&t3, &t3.positions()).unwrap();
        assert_eq!(pushed, codomain().cycle());
    }

    #[test]
    fn missing_mesh_information_is_rejected() {
        let f = maps::FnMap::new(Ok, None);
        assert!(matches!(compute_degree(&f, None), Err(Error::InvalidParameter(_))));
        assert_eq!(compute_degree(&f, Some(6)).unwrap().degree, 1);
    }

    #[test]
    fn coarse_mesh_reports_timezone_violation() {
        // θ ↦ θ + 3φ twists each face across all three timezones at n = 4
        let twist = maps::FnMap::new(
            |p| {
                let c = crate::sphere::to_spherical(p);
                Ok(crate::sphere::spherical_point(c.theta() + 3.0 * c.phi(), c.phi()))
            },
            None,
        );
        let err = compute_degree(&twist, Some(4)).unwrap_err();
        assert!(matches!(err, Error::TimezoneViolation { face: Some(_), .. }), "{err}");
    }

    #[test]
    fn edge_chain_cases() {
        let complex = build_complex(4).unwrap();
        let mut rounded = HashMap::new();
        let (a, b) = (VertexId::new(0, 0), VertexId::new(1, 0));
        rounded.insert(a, VertexId::new(2, 1));
        rounded.insert(b, VertexId::new(2, 1));
        let e = EdgeId { tail: a, head: b };
        assert!(edge_chain(&complex, &e, &rounded).unwrap().is_zero());

        rounded.insert(b, VertexId::new(0, 1));
        let chain = edge_chain(&complex, &e, &rounded).unwrap();
        assert_eq!(chain.len(), 1);
        assert_eq!(chain.iter().next().unwrap().1.abs(), 1);
        let back = edge_chain(&complex, &EdgeId { tail: b, head: a }, &rounded).unwrap();
        assert_eq!(back, chain.scaled(-1));

        let c = VertexId::new(0, 1);
        assert!(matches!(
            edge_chain(&complex, &EdgeId { tail: a, head: c }, &rounded),
            Err(Error::NotFound(_))
        ));
    }

    #[test]
    fn chain_map_law_on_a_power_map() {
        let complex = build_complex(20).unwrap();
        let images = evaluate(&AzimuthalPower { k: 2 }, &complex, false).unwrap();
        let cd = codomain();
        for (lift, bnd) in face_chains(&complex, &images).unwrap() {
            assert_eq!(boundary(cd.complex(), &lift).unwrap(), bnd);
        }
    }

    #[test]
    fn retries_and_auto_refinement() {
        assert_eq!(refine(10), 15);
        assert_eq!(refine(15), 23);
        let twist = maps::FnMap::new(
            |p| {
                let c = crate::sphere::to_spherical(p);
                Ok(crate::sphere::spherical_point(c.theta() + 3.0 * c.phi(), c.phi()))
            },
            Some(0.5),
        );
        let r = degree_with_retries(&twist, &DegreeOptions::default(), AUTO_MAX_N).unwrap();
        assert_eq!(r.degree, 1);
        assert!(r.heuristic);
        assert!(r.n_used > 4);
        assert!(matches!(
            degree_with_retries(&twist, &DegreeOptions { n: Some(4), ..Default::default() }, 5),
            Err(Error::TimezoneViolation { .. })
        ));
        let r = auto_degree(&AzimuthalPower { k: 2 }, 3, AUTO_MAX_N, &DegreeOptions::default()).unwrap();
        assert_eq!(r.degree, 2);
    }

    #[test]
    fn oracle_examples() {
        assert!((degree_oracle(&Identity, 30).unwrap() - 1.0).abs() < 1e-6);
        assert!((degree_oracle(&Antipodal, 12).unwrap() + 1.0).abs() < 1e-6);
        assert!((degree_oracle(&AzimuthalPower { k: 3 }, 60).unwrap() - 3.0).abs() < 0.05);
    }
}
