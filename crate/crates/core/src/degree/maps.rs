//! Maps S² → S² with an optional geodesic Lipschitz constant.

use std::f64::consts::TAU;
use std::sync::Arc;

use crate::error::Result;
use crate::rotation::Rotation;
use crate::sphere::{spherical_point, to_spherical, UnitVector};

/// A map of the sphere to itself. Implementations must be deterministic
/// and safe to call from several threads at once.
pub trait SphereMap: Send + Sync {
    fn eval(&self, p: UnitVector) -> Result<UnitVector>;

    /// Upper bound on the geodesic-to-geodesic Lipschitz constant, if known.
    fn lipschitz(&self) -> Option<f64> {
        None
    }
}

impl<M: SphereMap + ?Sized> SphereMap for &M {
    fn eval(&self, p: UnitVector) -> Result<UnitVector> {
        (**self).eval(p)
    }

    fn lipschitz(&self) -> Option<f64> {
        (**self).lipschitz()
    }
}

impl<M: SphereMap + ?Sized> SphereMap for Box<M> {
    fn eval(&self, p: UnitVector) -> Result<UnitVector> {
        (**self).eval(p)
    }

    fn lipschitz(&self) -> Option<f64> {
        (**self).lipschitz()
    }
}

impl<M: SphereMap + ?Sized> SphereMap for Arc<M> {
    fn eval(&self, p: UnitVector) -> Result<UnitVector> {
        (**self).eval(p)
    }

    fn lipschitz(&self) -> Option<f64> {
        (**self).lipschitz()
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Identity;

impl SphereMap for Identity {
    fn eval(&self, p: UnitVector) -> Result<UnitVector> {
        Ok(p)
    }

    fn lipschitz(&self) -> Option<f64> {
        Some(1.0)
    }
}

/// `x ↦ -x`
#[derive(Clone, Copy, Debug, Default)]
pub struct Antipodal;

impl SphereMap for Antipodal {
    fn eval(&self, p: UnitVector) -> Result<UnitVector> {
        Ok(-p)
    }

    fn lipschitz(&self) -> Option<f64> {
        Some(1.0)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Constant(pub UnitVector);

impl SphereMap for Constant {
    fn eval(&self, _: UnitVector) -> Result<UnitVector> {
        Ok(self.0)
    }

    // any positive value bounds a constant map; the smallest keeps the mesh at n = 3
    fn lipschitz(&self) -> Option<f64> {
        Some(f64::EPSILON)
    }
}

/// `(θ, φ) ↦ (kθ mod 2π, φ)`, a map of degree `k`.
#[derive(Clone, Copy, Debug)]
pub struct AzimuthalPower {
    pub k: i32,
}

impl SphereMap for AzimuthalPower {
    fn eval(&self, p: UnitVector) -> Result<UnitVector> {
        let c = to_spherical(p);
        let theta = (self.k as f64 * c.theta()).rem_euclid(TAU);
        Ok(spherical_point(theta, c.phi()))
    }

    fn lipschitz(&self) -> Option<f64> {
        Some((self.k.unsigned_abs() as f64).max(1.0))
    }
}

/// `rotation ∘ inner`
#[derive(Clone, Debug)]
pub struct Rotated<M> {
    pub rotation: Rotation,
    pub inner: M,
}

impl<M: SphereMap> SphereMap for Rotated<M> {
    fn eval(&self, p: UnitVector) -> Result<UnitVector> {
        Ok(self.rotation.apply(&self.inner.eval(p)?))
    }

    fn lipschitz(&self) -> Option<f64> {
        self.inner.lipschitz()
    }
}

/// `-inner`
#[derive(Clone, Debug)]
pub struct AntipodalOf<M>(pub M);

impl<M: SphereMap> SphereMap for AntipodalOf<M> {
    fn eval(&self, p: UnitVector) -> Result<UnitVector> {
        Ok(-self.0.eval(p)?)
    }

    fn lipschitz(&self) -> Option<f64> {
        self.0.lipschitz()
    }
}

/// `inner ∘ rotation` (precomposition with a rotation of the domain).
#[derive(Clone, Debug)]
pub struct Precomposed<M> {
    pub rotation: Rotation,
    pub inner: M,
}

impl<M: SphereMap> SphereMap for Precomposed<M> {
    fn eval(&self, p: UnitVector) -> Result<UnitVector> {
        self.inner.eval(self.rotation.apply(&p))
    }

    fn lipschitz(&self) -> Option<f64> {
        self.inner.lipschitz()
    }
}

/// Wraps a closure.
pub struct FnMap<F> {
    f: F,
    lipschitz: Option<f64>,
}

impl<F> FnMap<F>
where
    F: Fn(UnitVector) -> Result<UnitVector> + Send + Sync,
{
    pub fn new(f: F, lipschitz: Option<f64>) -> Self {
        Self { f, lipschitz }
    }
}

impl<F> SphereMap for FnMap<F>
where
    F: Fn(UnitVector) -> Result<UnitVector> + Send + Sync,
{
    fn eval(&self, p: UnitVector) -> Result<UnitVector> {
        (self.f)(p)
    }

    fn lipschitz(&self) -> Option<f64> {
        self.lipschitz
    }
}
