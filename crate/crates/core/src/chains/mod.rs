//! Integer simplicial chains on `T(n)`: boundary operators and the
//! minimal-word-norm lift of 1-cycles through `∂₂`.

pub mod snf;

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::triangulation::{fundamental_cycle, DeltaComplex};

pub use snf::{smith_normal_form, IntMatrix, SmithForm};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ChainDim {
    Vertices = 0,
    Edges = 1,
    Faces = 2,
}

impl ChainDim {
    pub fn lower(self) -> Option<ChainDim> {
        match self {
            ChainDim::Vertices => None,
            ChainDim::Edges => Some(ChainDim::Vertices),
            ChainDim::Faces => Some(ChainDim::Edges),
        }
    }
}

/// Sparse integer combination of simplices of one dimension. Zero
/// coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntegerChain {
    dim: ChainDim,
    coeffs: BTreeMap<usize, i64>,
}

impl IntegerChain {
    pub fn zero(dim: ChainDim) -> Self {
        Self { dim, coeffs: BTreeMap::new() }
    }

    /// Sums repeated indices.
    pub fn from_pairs(dim: ChainDim, pairs: impl IntoIterator<Item = (usize, i64)>) -> Self {
        let mut chain = Self::zero(dim);
        for (idx, k) in pairs {
            chain.add_term(idx, k);
        }
        chain
    }

    pub fn from_dense(dim: ChainDim, dense: &[i64]) -> Self {
        Self::from_pairs(dim, dense.iter().copied().enumerate())
    }

    pub fn to_dense(&self, len: usize) -> Vec<i64> {
        let mut out = vec![0; len];
        for (&idx, &k) in &self.coeffs {
            out[idx] = k;
        }
        out
    }

    pub fn dim(&self) -> ChainDim {
        self.dim
    }

    /// Panics on i64 overflow.
    pub fn add_term(&mut self, idx: usize, k: i64) {
        if k == 0 {
            return;
        }
        let entry = self.coeffs.entry(idx).or_insert(0);
        *entry = entry.checked_add(k).expect("chain coefficient overflow");
        if *entry == 0 {
            self.coeffs.remove(&idx);
        }
    }

    pub fn get(&self, idx: usize) -> i64 {
        self.coeffs.get(&idx).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, i64)> + '_ {
        self.coeffs.iter().map(|(&i, &k)| (i, k))
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.coeffs.keys().copied()
    }

    /// Number of simplices with a nonzero coefficient.
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add_scaled(&mut self, other: &IntegerChain, factor: i64) {
        assert_eq!(self.dim, other.dim, "adding chains of different dimension");
        for (idx, k) in other.iter() {
            self.add_term(idx, k.checked_mul(factor).expect("chain coefficient overflow"));
        }
    }

    pub fn scaled(&self, factor: i64) -> IntegerChain {
        let mut out = IntegerChain::zero(self.dim);
        out.add_scaled(self, factor);
        out
    }

    pub fn max_abs(&self) -> i64 {
        self.coeffs.values().map(|k| k.abs()).max().unwrap_or(0)
    }
}

/// Sum of absolute coefficients.
pub fn word_norm(chain: &IntegerChain) -> i64 {
    chain.coeffs.values().map(|k| k.abs()).sum()
}

/// Simplicial boundary `∂₁` or `∂₂`.
pub fn boundary(complex: &DeltaComplex, chain: &IntegerChain) -> Result<IntegerChain> {
    let lower = chain
        .dim
        .lower()
        .ok_or_else(|| Error::InvalidParameter("boundary of a 0-chain".into()))?;
    let count = complex.num_simplices(chain.dim);
    let mut out = IntegerChain::zero(lower);
    for (idx, k) in chain.iter() {
        if idx >= count {
            return Err(Error::NotFound(format!(
                "simplex {idx} of dimension {:?} in T({})",
                chain.dim,
                complex.n()
            )));
        }
        match chain.dim {
            ChainDim::Faces => {
                for (edge, s) in complex.face_boundary(idx) {
                    out.add_term(edge, s * k);
                }
            }
            ChainDim::Edges => {
                let (tail, head) = complex.edge_endpoints(idx);
                out.add_term(head, k);
                out.add_term(tail, -k);
            }
            ChainDim::Vertices => unreachable!(),
        }
    }
    Ok(out)
}

/// Dense `∂₂` as an `|E| × |F|` integer matrix.
pub fn face_boundary_matrix(complex: &DeltaComplex) -> IntMatrix {
    let mut m = IntMatrix::zeros(complex.edges().len(), complex.faces().len());
    for f in 0..complex.faces().len() {
        for (e, s) in complex.face_boundary(f) {
            m.set(e, f, m.get(e, f) + s);
        }
    }
    m
}

/// Result of [`LiftSolver::minimal_lift`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lift {
    pub chain: IntegerChain,
    pub word_norm: i64,
    /// Multiple of the fundamental cycle added to the particular solution.
    pub shift: i64,
    /// False when another shift reaches the same word norm.
    pub unique: bool,
}

/// Solves `∂₂ c = b` on a sphere triangulation and picks the solution of
/// least word norm. The integer kernel of `∂₂` on S² is spanned by the
/// fundamental cycle, so every solution is `c₀ + k·Z`.
#[derive(Clone, Debug)]
pub struct LiftSolver {
    complex: DeltaComplex,
    smith: SmithForm,
    cycle: Vec<i64>,
}

impl LiftSolver {
    pub fn new(complex: DeltaComplex) -> Result<Self> {
        let matrix = face_boundary_matrix(&complex);
        let smith = smith_normal_form(&matrix)?;
        let faces = complex.faces().len();
        if smith.rank + 1 != faces {
            return Err(Error::Internal(format!(
                "rank of boundary map is {}, expected {}",
                smith.rank,
                faces - 1
            )));
        }
        let cycle = fundamental_cycle(&complex).to_dense(faces);
        Ok(Self { complex, smith, cycle })
    }

    pub fn complex(&self) -> &DeltaComplex {
        &self.complex
    }

    pub fn rank(&self) -> usize {
        self.smith.rank
    }

    pub fn smith_form(&self) -> &SmithForm {
        &self.smith
    }

    pub fn minimal_lift(&self, b: &IntegerChain) -> Result<Lift> {
        if b.dim() != ChainDim::Edges {
            return Err(Error::InvalidParameter(format!(
                "lift expects a 1-chain, got {:?}",
                b.dim()
            )));
        }
        let db = boundary(&self.complex, b)?;
        if !db.is_zero() {
            return Err(Error::NonCycle(word_norm(&db)));
        }
        let rhs = b.to_dense(self.complex.edges().len());
        let c0 = self
            .smith
            .solve(&rhs)?
            .ok_or_else(|| Error::Internal("1-cycle with no 2-chain filling".into()))?;

        let reach = c0.iter().map(|k| k.abs()).max().unwrap_or(0) + 1;
        let norm_at = |k: i64| -> i64 {
            c0.iter()
                .zip(&self.cycle)
                .map(|(&c, &z)| (c + k * z).abs())
                .sum()
        };
        let mut best = (i64::MAX, 0i64);
        let mut ties = 0;
        // scan by |k| first so equal norms keep the smaller |k|, then smaller k
        for k in std::iter::once(0).chain((1..=reach).flat_map(|m| [-m, m])) {
            let norm = norm_at(k);
            if norm < best.0 {
                best = (norm, k);
                ties = 0;
            } else if norm == best.0 {
                ties += 1;
            }
        }
        let (norm, shift) = best;
        let dense: Vec<i64> = c0
            .iter()
            .zip(&self.cycle)
            .map(|(&c, &z)| c + shift * z)
            .collect();
        Ok(Lift {
            chain: IntegerChain::from_dense(ChainDim::Faces, &dense),
            word_norm: norm,
            shift,
            unique: ties == 0,
        })
    }
}
