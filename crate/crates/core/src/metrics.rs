//! LSBD upper bound with the identity representation of SO(3) on ℝ³:
//! `min_p (1/N) Σ ‖zᵢ − Rᵢ p‖²` over base points `p ∈ S²`.

use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rotation::Rotation;
use crate::sphere::UnitVector;

/// Below this norm `Σ Rᵢᵀ zᵢ` is treated as zero.
const DEGENERATE_NORM: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatentPair {
    #[serde(rename = "quaternion")]
    pub rotation: Rotation,
    pub z: UnitVector,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LsbdReport {
    pub score: f64,
    pub base_point: UnitVector,
    pub n_pairs: usize,
    pub degenerate: bool,
    /// Score with the base point fixed at the north pole.
    pub score_at_north: f64,
}

/// `(1/N) Σ ‖zᵢ − Rᵢ p‖² = 2 − (2/N) Σ zᵢ·(Rᵢ p)`.
pub fn lsbd_score_at(pairs: &[LatentPair], p: &UnitVector) -> f64 {
    let n = pairs.len() as f64;
    let total: f64 = pairs.iter().map(|q| q.z.dot(&q.rotation.apply(p))).sum();
    2.0 - 2.0 * total / n
}

/// Optimal base point `p* = normalize(Σ Rᵢᵀ zᵢ)` and its score. If the sum
/// vanishes every base point scores 2; `ẑ` is returned and flagged.
pub fn lsbd_identity_score(pairs: &[LatentPair]) -> Result<LsbdReport> {
    if pairs.is_empty() {
        return Err(Error::InvalidParameter("at least one latent pair is required".into()));
    }
    let mut sum = [0.0; 3];
    for q in pairs {
        let back = q.rotation.apply_inverse_array(q.z.to_array());
        for (s, c) in sum.iter_mut().zip(back) {
            *s += c;
        }
    }
    let norm = sum.iter().map(|c| c * c).sum::<f64>().sqrt();
    let n = pairs.len() as f64;
    let (base_point, score, degenerate) = if norm / n < DEGENERATE_NORM {
        (UnitVector::NORTH, 2.0, true)
    } else {
        // Σ zᵢ·Rᵢp* = p*·Σ Rᵢᵀzᵢ = ‖Σ Rᵢᵀzᵢ‖
        let p = UnitVector::from_array(sum)?;
        (p, (2.0 - 2.0 * norm / n).max(0.0), false)
    };
    Ok(LsbdReport {
        score,
        base_point,
        n_pairs: pairs.len(),
        degenerate,
        score_at_north: lsbd_score_at(pairs, &UnitVector::NORTH),
    })
}

/// One `{"quaternion": [w,x,y,z], "z": [x,y,z]}` object per line; blank
/// lines are skipped.
pub fn read_latents<R: BufRead>(input: R) -> Result<Vec<LatentPair>> {
    let mut out = Vec::new();
    for (k, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let pair = serde_json::from_str(&line).map_err(|e| Error::Schema {
            field: format!("line {}", k + 1),
            reason: e.to_string(),
        })?;
        out.push(pair);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rotation::sample_so3_uniform;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn random_unit(rng: &mut ChaCha8Rng) -> UnitVector {
        let v: [f64; 3] = std::array::from_fn(|_| StandardNormal.sample(rng));
        UnitVector::from_array(v).unwrap()
    }

    fn equivariant(rng: &mut ChaCha8Rng, p: UnitVector, n: usize) -> Vec<LatentPair> {
        (0..n)
            .map(|_| {
                let rotation = sample_so3_uniform(rng);
                LatentPair { rotation, z: rotation.apply(&p) }
            })
            .collect()
    }

    #[test]
    fn perfect_latents_score_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let pairs = equivariant(&mut rng, UnitVector::NORTH, 500);
        let r = lsbd_identity_score(&pairs).unwrap();
        assert!(r.score < 1e-12);
        assert!(r.score_at_north < 1e-12);
        assert!(crate::sphere::geodesic_distance(&r.base_point, &UnitVector::NORTH) < 1e-9);

        let p = random_unit(&mut rng);
        let pairs = equivariant(&mut rng, p, 500);
        let r = lsbd_identity_score(&pairs).unwrap();
        assert!(r.score < 1e-12);
        assert!(crate::sphere::geodesic_distance(&r.base_point, &p) < 1e-9);
        assert!(!r.degenerate);
    }

    #[test]
    fn optimum_beats_probe_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let pairs: Vec<LatentPair> = (0..300)
            .map(|_| {
                let rotation = sample_so3_uniform(&mut rng);
                // noisy equivariance
                let z = rotation.apply(&UnitVector::new(0.1, 0.2, 1.0).unwrap()).to_array();
                let noise: [f64; 3] = std::array::from_fn(|_| 0.3 * Distribution::<f64>::sample(&StandardNormal, &mut rng));
                let z = UnitVector::from_array([z[0] + noise[0], z[1] + noise[1], z[2] + noise[2]]).unwrap();
                LatentPair { rotation, z }
            })
            .collect();
        let r = lsbd_identity_score(&pairs).unwrap();
        assert!((r.score - lsbd_score_at(&pairs, &r.base_point)).abs() < 1e-12);
        for _ in 0..1000 {
            let p = random_unit(&mut rng);
            let s = lsbd_score_at(&pairs, &p);
            assert!(r.score <= s + 1e-12);
            assert!((0.0..=4.0).contains(&s));
        }
    }

    #[test]
    fn degenerate_sum() {
        let pairs = [
            LatentPair { rotation: Rotation::IDENTITY, z: UnitVector::NORTH },
            LatentPair { rotation: Rotation::IDENTITY, z: UnitVector::SOUTH },
        ];
        let r = lsbd_identity_score(&pairs).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.score, 2.0);
        assert_eq!(r.base_point, UnitVector::NORTH);
        assert!(matches!(lsbd_identity_score(&[]), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn latents_parse_line_by_line() {
        let text = "{\"quaternion\":[1,0,0,0],\"z\":[0,0,1]}\n\n{\"quaternion\":[0,1,0,0],\"z\":[0,0,-1]}\n";
        let pairs = read_latents(text.as_bytes()).unwrap();
        assert_eq!(pairs.len(), 2);
        assert!(lsbd_identity_score(&pairs).unwrap().score < 1e-12);
        let err = read_latents("{\"z\":[0,0,1]}\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Schema { .. }));
    }
}
