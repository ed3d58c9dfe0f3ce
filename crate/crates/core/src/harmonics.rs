//! Real spherical harmonics, the zonal embedding `ζ: S² → ℝ^{2L+1}` and the
//! rotated-zonal-harmonic dataset.
//!
//! Harmonics are orthonormal on the sphere and carry no Condon–Shortley
//! phase. Order `m > 0` uses `cos(mθ)`, `m < 0` uses `sin(|m|θ)`.

use std::f64::consts::PI;
use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sphere::UnitVector;

pub use crate::rotation::{sample_so3_uniform, Rotation};

pub const FORMAT_VERSION: u32 = 1;

/// Fully normalized associated Legendre values `P̄_l^m(x)` for `l = m..=lmax`,
/// with `sinφ = s`; `P̄_0^0 = 1/√(4π)`.
fn normalized_legendre(lmax: usize, m: usize, x: f64, s: f64) -> Vec<f64> {
    let mut pmm = (1.0 / (4.0 * PI)).sqrt();
    for k in 1..=m {
        pmm *= ((2 * k + 1) as f64 / (2 * k) as f64).sqrt() * s;
    }
    let mut out = vec![pmm];
    if lmax == m {
        return out;
    }
    out.push((2.0 * m as f64 + 3.0).sqrt() * x * pmm);
    for l in m + 2..=lmax {
        let (lf, mf) = (l as f64, m as f64);
        let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
        let b = (((lf - 1.0).powi(2) - mf * mf) / (4.0 * (lf - 1.0).powi(2) - 1.0)).sqrt();
        let k = l - m;
        out.push(a * (x * out[k - 1] - b * out[k - 2]));
    }
    out
}

/// Real spherical harmonic `Y_m^L(u)`.
pub fn real_sph_harm(l: usize, m: i64, u: UnitVector) -> Result<f64> {
    if m.unsigned_abs() as usize > l {
        return Err(Error::InvalidParameter(format!("|m| = {} exceeds L = {l}", m.abs())));
    }
    let am = m.unsigned_abs() as usize;
    let s = u.x().hypot(u.y());
    let p = normalized_legendre(l, am, u.z(), s)[l - am];
    let theta = u.y().atan2(u.x());
    Ok(match m {
        0 => p,
        m if m > 0 => 2f64.sqrt() * p * (am as f64 * theta).cos(),
        _ => 2f64.sqrt() * p * (am as f64 * theta).sin(),
    })
}

fn check_degree(l: usize) -> Result<()> {
    if l < 3 || l.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!("L must be odd and at least 3, got {l}")));
    }
    Ok(())
}

/// `ζ(u)_m = √(4π/(2L+1)) · Y_m^L(u)`, stored at index `m + L`. This is the
/// coefficient vector of the zonal harmonic rotated so its axis points at `u`.
pub fn zeta(l: usize, u: UnitVector) -> Result<Vec<f64>> {
    check_degree(l)?;
    let scale = (4.0 * PI / (2 * l + 1) as f64).sqrt();
    let s = u.x().hypot(u.y());
    let theta = u.y().atan2(u.x());
    let mut out = vec![0.0; 2 * l + 1];
    for am in 0..=l {
        let p = normalized_legendre(l, am, u.z(), s)[l - am] * scale;
        if am == 0 {
            out[l] = p;
        } else {
            let (sin, cos) = (am as f64 * theta).sin_cos();
            out[l + am] = 2f64.sqrt() * p * cos;
            out[l - am] = 2f64.sqrt() * p * sin;
        }
    }
    Ok(out)
}

/// Lipschitz constant of `ζ` from geodesic distance on S² to Euclidean
/// distance: `‖ζ(u) − ζ(v)‖² = 2 − 2P_L(u·v) ≤ (L(L+1)/2)·d(u, v)²`.
pub fn zeta_lipschitz(l: usize) -> f64 {
    ((l * (l + 1)) as f64 / 2.0).sqrt()
}

/// Legendre polynomial `P_L(x)` by Bonnet's recurrence.
pub fn legendre(l: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, x);
    if l == 0 {
        return prev;
    }
    for k in 1..l {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0) * x * cur - kf * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DataRecord {
    pub coeffs: Vec<f64>,
    pub u: UnitVector,
    #[serde(rename = "quaternion")]
    pub rotation: Rotation,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetHeader {
    #[serde(rename = "L")]
    pub l: usize,
    pub count: usize,
    pub seed: u64,
    pub format_version: u32,
}

/// `count` Haar-random rotations `R` with `u = R·ẑ` and `coeffs = ζ(u)`, in
/// sampling order.
pub fn generate_dataset(l: usize, count: usize, seed: u64) -> Result<Vec<DataRecord>> {
    check_degree(l)?;
    if count == 0 {
        return Err(Error::InvalidParameter("count must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let rotation = sample_so3_uniform(&mut rng);
            let u = rotation.apply(&UnitVector::NORTH);
            Ok(DataRecord { coeffs: zeta(l, u)?, u, rotation })
        })
        .collect()
}

/// Header line followed by one JSON record per line.
pub fn write_dataset<W: Write>(mut out: W, l: usize, seed: u64, records: &[DataRecord]) -> Result<()> {
    let header = DatasetHeader { l, count: records.len(), seed, format_version: FORMAT_VERSION };
    serde_json::to_writer(&mut out, &header)?;
    out.write_all(b"\n")?;
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}
