//! Discrete measures on degenerating line chains and the tropical-limit
//! measure on the genus-zero moduli cell complex.
//!
//! A chain of N projective lines meeting in nodes dualizes to a segment
//! subdivided at k/N; the curvature of a degree-one bundle spread along
//! the chain puts trapezoid weights on those vertices, and as N grows the
//! measures converge weakly to Lebesgue on [0,1] at the provable rate
//! 1/(2N). On moduli, the limit measure charges only the top-dimensional
//! (binary) combinatorial types, uniformly across them and uniformly in
//! the edge lengths of each cell up to a cutoff Λ; integration against it
//! is literally a weighted sum over trivalent trees.

use num::{BigInt, BigRational, FromPrimitive, One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::amplitude::pairwise_sum;
use crate::btree::{binary_count, enumerate_comb_types, CombType, TreeError};

#[derive(Debug, Error, PartialEq, Eq, Clone)]
pub enum MeasureError {
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error("a reduction chain needs at least 1 edge")]
    EmptyChain,
    #[error("cell measures support 3 ≤ n ≤ 8, got {0}")]
    BadSize(usize),
    #[error("edge-length cutoff must be positive and finite")]
    BadCutoff,
    #[error("quadrature grid must have at least 1 point per axis")]
    BadGrid,
    #[error("expected {expected} descendent weights, got {got}")]
    WrongWeightCount { expected: usize, got: usize },
    #[error("moduli of genus {g} with {n} markings are empty")]
    EmptyModuli { g: u32, n: usize },
}

/// A chain of N+1 components meeting in N nodes; the dual segment is the
/// unit interval subdivided at k/N.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChainModel {
    n_edges: usize,
}

impl ChainModel {
    pub fn new(n_edges: usize) -> Result<ChainModel, MeasureError> {
        if n_edges == 0 {
            return Err(MeasureError::EmptyChain);
        }
        Ok(ChainModel { n_edges })
    }

    pub fn n_edges(&self) -> usize {
        self.n_edges
    }

    /// Vertex positions k/N, strictly increasing through [0,1].
    pub fn positions(&self) -> Vec<BigRational> {
        let n = BigInt::from(self.n_edges);
        (0..=self.n_edges)
            .map(|k| BigRational::new(BigInt::from(k), n.clone()))
            .collect()
    }

    pub fn measure(&self) -> DiscreteMeasure {
        let n = self.n_edges;
        let half = BigRational::new(BigInt::one(), BigInt::from(2 * n));
        let interior = BigRational::new(BigInt::one(), BigInt::from(n));
        let atoms = self
            .positions()
            .into_iter()
            .enumerate()
            .map(|(k, x)| {
                let mass = if k == 0 || k == n { half.clone() } else { interior.clone() };
                (x, mass)
            })
            .collect();
        DiscreteMeasure { atoms }
    }
}

/// Atoms (position, mass) on [0,1], positions strictly increasing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscreteMeasure {
    pub atoms: Vec<(BigRational, BigRational)>,
}

impl DiscreteMeasure {
    pub fn total_mass(&self) -> BigRational {
        self.atoms.iter().map(|(_, m)| m).sum()
    }

    /// Exact sup over t ∈ [0,1] of |CDF(t) − t|. The supremum of a step
    /// function against the identity is approached at atom positions,
    /// from the left (cumulative mass excluding the atom) or attained at
    /// the atom (mass included), so it suffices to scan those candidates.
    pub fn sup_cdf_deviation(&self) -> BigRational {
        let mut best = BigRational::zero();
        let mut cumulative = BigRational::zero();
        for (x, mass) in &self.atoms {
            let before = (&cumulative - x).abs();
            cumulative += mass;
            let after = (&cumulative - x).abs();
            best = best.max(before).max(after);
        }
        // after the last atom the CDF is total_mass, |total − t| peaks at
        // t = 1 for a normalized measure, giving 0; and at t = x_last,
        // which the loop already covered.
        best
    }
}

/// Trapezoid weights on the chain's dual segment: 1/(2N) at the two
/// endpoints, 1/N at each interior vertex; total mass exactly 1.
pub fn cl_chain_measure(n_edges: usize) -> Result<DiscreteMeasure, MeasureError> {
    Ok(ChainModel::new(n_edges)?.measure())
}

/// Exact Kolmogorov distance between the N-edge chain measure and
/// Lebesgue on [0,1]; equals 1/(2N).
pub fn weak_convergence_error(n_edges: usize) -> Result<BigRational, MeasureError> {
    Ok(cl_chain_measure(n_edges)?.sup_cdf_deviation())
}

/// The tropical-limit measure on the genus-zero moduli cell complex with
/// n markings: each binary (top-dimensional) combinatorial type carries
/// the same weight, uniformly spread over its edge-length cube [0,Λ]^{n−3};
/// every non-binary type carries zero mass.
#[derive(Debug, Clone, PartialEq)]
pub struct CellMeasure {
    n: usize,
    lambda: f64,
    cells: Vec<(CombType, BigRational)>,
}

impl CellMeasure {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn cells(&self) -> &[(CombType, BigRational)] {
        &self.cells
    }

    pub fn weight_of(&self, t: &CombType) -> BigRational {
        self.cells
            .iter()
            .find(|(c, _)| c == t)
            .map(|(_, w)| w.clone())
            .unwrap_or_else(BigRational::zero)
    }

    pub fn total_mass(&self) -> BigRational {
        self.cells.iter().map(|(_, w)| w).sum()
    }
}

pub fn moduli_cell_measure(n: usize, lambda: f64) -> Result<CellMeasure, MeasureError> {
    if !(3..=8).contains(&n) {
        return Err(MeasureError::BadSize(n));
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(MeasureError::BadCutoff);
    }
    let weight = BigRational::new(BigInt::one(), binary_count(n)?);
    let cells = enumerate_comb_types(n)?
        .into_iter()
        .map(|t| {
            let w = if t.is_binary() { weight.clone() } else { BigRational::zero() };
            (t, w)
        })
        .collect();
    Ok(CellMeasure { n, lambda, cells })
}

/// Integrate f(type, edge lengths) against the cell measure: the weighted
/// sum over binary types of the midpoint-rule average of f over each
/// cell's length cube. Zero-weight cells contribute exactly 0 (they are
/// never evaluated), and the weighted accumulation is exact rational
/// arithmetic on the (dyadic) cell averages, so f ≡ 1 integrates to
/// exactly 1. Deterministic: cells and grid points are visited in a fixed
/// order and each cell average uses a fixed-tree pairwise sum.
pub fn integrate_cells<F>(measure: &CellMeasure, f: F, grid: usize) -> Result<f64, MeasureError>
where
    F: Fn(&CombType, &[f64]) -> f64,
{
    if grid == 0 {
        return Err(MeasureError::BadGrid);
    }
    let step = measure.lambda / grid as f64;
    let mut total = BigRational::zero();
    let mut values = Vec::new();
    for (t, weight) in &measure.cells {
        if weight.is_zero() {
            continue;
        }
        let dim = t.dimension();
        values.clear();
        let mut index = vec![0usize; dim];
        let mut lengths = vec![0.0f64; dim];
        loop {
            for (l, &i) in lengths.iter_mut().zip(&index) {
                *l = (i as f64 + 0.5) * step;
            }
            values.push(f(t, &lengths));
            // odometer increment over the dim-dimensional grid
            let mut axis = 0;
            loop {
                if axis == dim {
                    break;
                }
                index[axis] += 1;
                if index[axis] < grid {
                    break;
                }
                index[axis] = 0;
                axis += 1;
            }
            if axis == dim {
                break;
            }
        }
        let average = pairwise_sum(&values) / values.len() as f64;
        if !average.is_finite() {
            return Ok(f64::NAN);
        }
        total += weight * BigRational::from_f64(average).expect("finite average");
    }
    Ok(total.to_f64().unwrap_or(f64::NAN))
}

/// Dimension check for descendent correlators: non-zero needs
/// Σ k_i = 3g − 3 + n. Errors when the moduli space is empty.
pub fn correlator_dimension_predicate(
    g: u32,
    n: usize,
    ks: &[u32],
) -> Result<bool, MeasureError> {
    let dim = 3 * g as i64 - 3 + n as i64;
    if n == 0 || dim < 0 {
        return Err(MeasureError::EmptyModuli { g, n });
    }
    if ks.len() != n {
        return Err(MeasureError::WrongWeightCount {
            expected: n,
            got: ks.len(),
        });
    }
    Ok(ks.iter().map(|&k| k as i64).sum::<i64>() == dim)
}
