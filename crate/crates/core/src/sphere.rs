//! Points on the unit sphere and the handful of geometric primitives every
//! other module builds on.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::ops::Neg;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of S², stored as a normalized Cartesian triple.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "[f64; 3]", try_from = "[f64; 3]")]
pub struct UnitVector {
    x: f64,
    y: f64,
    z: f64,
}

const MIN_NORM: f64 = 1e-12;

impl UnitVector {
    pub const NORTH: UnitVector = UnitVector { x: 0.0, y: 0.0, z: 1.0 };
    pub const SOUTH: UnitVector = UnitVector { x: 0.0, y: 0.0, z: -1.0 };

    /// Normalizes `(x, y, z)`; rejects non-finite or near-zero input.
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let norm = (x * x + y * y + z * z).sqrt();
        if !norm.is_finite() || norm < MIN_NORM {
            return Err(Error::InvalidParameter(format!(
                "cannot normalize ({x}, {y}, {z})"
            )));
        }
        Ok(Self::from_normalized(x / norm, y / norm, z / norm))
    }

    pub fn from_array(v: [f64; 3]) -> Result<Self> {
        Self::new(v[0], v[1], v[2])
    }

    /// Caller guarantees the triple already has unit length.
    pub(crate) const fn from_normalized(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn dot(&self, other: &UnitVector) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(&self, other: &UnitVector) -> [f64; 3] {
        [
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        ]
    }
}

impl Neg for UnitVector {
    type Output = UnitVector;

    fn neg(self) -> UnitVector {
        UnitVector::from_normalized(-self.x, -self.y, -self.z)
    }
}

impl From<UnitVector> for [f64; 3] {
    fn from(v: UnitVector) -> Self {
        v.to_array()
    }
}

impl TryFrom<[f64; 3]> for UnitVector {
    type Error = Error;

    fn try_from(v: [f64; 3]) -> Result<Self> {
        UnitVector::from_array(v)
    }
}

impl fmt::Display for UnitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

/// Azimuth `theta` in [0, 2π) and polar angle `phi` in [0, π].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SphericalCoord {
    theta: f64,
    phi: f64,
}

impl SphericalCoord {
    /// Wraps `theta` into [0, 2π); `phi` must lie in [0, π].
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !theta.is_finite() || !(0.0..=PI).contains(&phi) {
            return Err(Error::InvalidParameter(format!(
                "spherical coordinate out of range: theta={theta}, phi={phi}"
            )));
        }
        Ok(Self::canonical(theta, phi))
    }

    fn canonical(theta: f64, phi: f64) -> Self {
        if phi == 0.0 || phi == PI {
            return Self { theta: 0.0, phi };
        }
        let mut theta = theta.rem_euclid(TAU);
        if theta >= TAU {
            theta = 0.0;
        }
        Self { theta, phi }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn is_pole(&self) -> bool {
        self.phi == 0.0 || self.phi == PI
    }
}

pub fn to_spherical(p: UnitVector) -> SphericalCoord {
    let rho = p.x.hypot(p.y);
    let phi = rho.atan2(p.z);
    if rho == 0.0 {
        return SphericalCoord { theta: 0.0, phi };
    }
    SphericalCoord::canonical(p.y.atan2(p.x), phi)
}

pub fn from_spherical(c: SphericalCoord) -> UnitVector {
    spherical_point(c.theta, c.phi)
}

/// `(sin φ cos θ, sin φ sin θ, cos φ)` for arbitrary real angles.
pub fn spherical_point(theta: f64, phi: f64) -> UnitVector {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    UnitVector::from_normalized(sp * ct, sp * st, cp)
}

/// Great-circle distance in [0, π].
pub fn geodesic_distance(p: &UnitVector, q: &UnitVector) -> f64 {
    let [x, y, z] = p.cross(q);
    (x * x + y * y + z * z).sqrt().atan2(p.dot(q))
}

/// Subset of the three azimuthal bands `2tπ/3 ≤ θ ≤ 2(t+1)π/3`, `t ∈ {0,1,2}`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct TimezoneSet(u8);

impl TimezoneSet {
    pub const ALL: TimezoneSet = TimezoneSet(0b111);
    pub const EMPTY: TimezoneSet = TimezoneSet(0);

    pub fn single(t: usize) -> Self {
        assert!(t < 3, "timezone index {t} out of range");
        TimezoneSet(1 << t)
    }

    pub fn contains(&self, t: usize) -> bool {
        t < 3 && self.0 & (1 << t) != 0
    }

    pub fn insert(&mut self, t: usize) {
        *self = self.union(TimezoneSet::single(t));
    }

    pub fn union(self, other: TimezoneSet) -> TimezoneSet {
        TimezoneSet(self.0 | other.0)
    }

    pub fn intersection(self, other: TimezoneSet) -> TimezoneSet {
        TimezoneSet(self.0 & other.0)
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..3).filter(move |&t| self.contains(t))
    }
}

/// Closed timezones containing `c`; poles belong to all three.
pub fn timezone_of(c: &SphericalCoord) -> TimezoneSet {
    if c.is_pole() {
        return TimezoneSet::ALL;
    }
    let mut set = TimezoneSet::EMPTY;
    for t in 0..3 {
        let lo = 2.0 * t as f64 * PI / 3.0;
        let hi = 2.0 * (t + 1) as f64 * PI / 3.0;
        if (lo..=hi).contains(&c.theta) {
            set.insert(t);
        }
    }
    // θ = 0 is the same meridian as θ = 2π
    if c.theta == 0.0 {
        set.insert(2);
    }
    set
}

/// Signed solid angle of the geodesic triangle `(a, b, c)` via the
/// two-argument arctangent form; positive for counter-clockwise triangles
/// seen from outside. A degenerate triangle contributes 0.
pub fn signed_solid_angle(a: &UnitVector, b: &UnitVector, c: &UnitVector) -> f64 {
    let bc = b.cross(c);
    let triple = a.x * bc[0] + a.y * bc[1] + a.z * bc[2];
    let denom = 1.0 + a.dot(b) + b.dot(c) + c.dot(a);
    if triple == 0.0 {
        return 0.0;
    }
    2.0 * triple.atan2(denom)
}
