//! Rotations of S² stored as unit quaternions `(w, x, y, z)`.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sphere::UnitVector;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "[f64; 4]", try_from = "[f64; 4]")]
pub struct Rotation {
    q: [f64; 4],
}

impl Rotation {
    pub const IDENTITY: Rotation = Rotation { q: [1.0, 0.0, 0.0, 0.0] };

    /// Normalizes `(w, x, y, z)`; a zero quaternion is rejected.
    pub fn from_quaternion(q: [f64; 4]) -> Result<Self> {
        let norm = q.iter().map(|c| c * c).sum::<f64>().sqrt();
        if !norm.is_finite() || norm < 1e-12 {
            return Err(Error::InvalidParameter(format!("not a rotation quaternion: {q:?}")));
        }
        Ok(Self { q: q.map(|c| c / norm) })
    }

    pub fn from_axis_angle(axis: [f64; 3], angle: f64) -> Result<Self> {
        let axis = UnitVector::from_array(axis)?;
        let (s, c) = (angle / 2.0).sin_cos();
        Ok(Self { q: [c, s * axis.x(), s * axis.y(), s * axis.z()] })
    }

    pub fn about_z(angle: f64) -> Self {
        let (s, c) = (angle / 2.0).sin_cos();
        Self { q: [c, 0.0, 0.0, s] }
    }

    pub fn quaternion(&self) -> [f64; 4] {
        self.q
    }

    pub fn matrix(&self) -> [[f64; 3]; 3] {
        let [w, x, y, z] = self.q;
        [
            [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
            [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
            [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)],
        ]
    }

    pub fn apply_array(&self, v: [f64; 3]) -> [f64; 3] {
        let m = self.matrix();
        [0, 1, 2].map(|r| m[r][0] * v[0] + m[r][1] * v[1] + m[r][2] * v[2])
    }

    pub fn apply(&self, p: &UnitVector) -> UnitVector {
        let [x, y, z] = self.apply_array(p.to_array());
        // renormalize away rounding drift; a rotation never produces zero
        UnitVector::new(x, y, z).expect("rotation of a unit vector")
    }

    /// `Rᵀ v`
    pub fn apply_inverse_array(&self, v: [f64; 3]) -> [f64; 3] {
        self.inverse().apply_array(v)
    }

    pub fn inverse(&self) -> Rotation {
        let [w, x, y, z] = self.q;
        Rotation { q: [w, -x, -y, -z] }
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Rotation) -> Rotation {
        let [a1, b1, c1, d1] = self.q;
        let [a2, b2, c2, d2] = other.q;
        let q = [
            a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
            a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
            a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
            a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
        ];
        Rotation::from_quaternion(q).expect("product of unit quaternions")
    }
}

impl From<Rotation> for [f64; 4] {
    fn from(r: Rotation) -> Self {
        r.q
    }
}

impl TryFrom<[f64; 4]> for Rotation {
    type Error = Error;

    fn try_from(q: [f64; 4]) -> Result<Self> {
        Rotation::from_quaternion(q)
    }
}

/// Haar-uniform rotation: four standard normals, normalized, with `w ≥ 0`.
pub fn sample_so3_uniform<R: Rng + ?Sized>(rng: &mut R) -> Rotation {
    loop {
        let mut q: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
        let norm = q.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm < 1e-12 {
            continue;
        }
        if q[0] < 0.0 {
            q = q.map(|c| -c);
        }
        return Rotation { q: q.map(|c| c / norm) };
    }
}
