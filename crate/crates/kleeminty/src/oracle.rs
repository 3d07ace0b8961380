//! Ground-truth checks that do not rely on any solver: exhaustive vertex
//! sweeps of the recursive cube, a feasible-interior sampler, and a
//! certification report combining both with the algebraic identities the
//! instance must satisfy.

use nalgebra::DMatrix;
use rand::RngExt;
use rand_chacha::ChaCha8Rng;
#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::problem::ProblemInstance;

/// Vertex sweeps materialize all 2^N vertices; beyond this the sweep is refused.
pub const MAX_SWEEP_DIMENSION: usize = 20;

/// Certification thresholds. `certify` fails an instance that misses any of
/// them; the acceptance suite pins the same numbers.
pub const ORTHOGONALITY_TOL: f64 = 1e-12;
pub const DETERMINANT_TOL: f64 = 1e-10;
pub const OPTIMUM_GAP_TOL: f64 = 1e-9;

/// All 2^N vertices of `{x : A x <= b}`, stored row-flat.
///
/// The cube is recursive: `x_1` is 0 or 1 and each later coordinate is either
/// `eps * x_{i-1}` or `1 - eps * x_{i-1}`, one choice per bit of the vertex
/// index.
#[derive(Debug, Clone)]
pub struct VertexSet {
    dimension: usize,
    epsilon: f64,
    data: Vec<f64>,
}

impl VertexSet {
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dimension
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn vertex(&self, index: usize) -> &[f64] {
        &self.data[index * self.dimension..(index + 1) * self.dimension]
    }

    pub fn iter(&self) -> std::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.dimension)
    }
}

fn fill_vertex(out: &mut [f64], index: usize, epsilon: f64) {
    let mut prev = 0.0;
    for (i, slot) in out.iter_mut().enumerate() {
        let low = epsilon * prev;
        *slot = if index >> i & 1 == 1 { 1.0 - low } else { low };
        prev = *slot;
    }
    // x_1 has no predecessor: the branch above yields exactly {0, 1} for i = 0.
}

/// Enumerates every vertex of the cube for `n <= MAX_SWEEP_DIMENSION`.
pub fn enumerate_vertices(n: usize, epsilon: f64) -> Result<VertexSet> {
    if n == 0 {
        return Err(Error::InvalidConfig("dimension must be at least 1".into()));
    }
    if n > MAX_SWEEP_DIMENSION {
        return Err(Error::TooManyVertices {
            max: MAX_SWEEP_DIMENSION,
            got: n,
        });
    }
    let count = 1usize << n;
    let mut data = vec![0.0; count * n];
    fill_vertices(&mut data, n, epsilon);
    Ok(VertexSet {
        dimension: n,
        epsilon,
        data,
    })
}

#[cfg(feature = "parallel")]
fn fill_vertices(data: &mut [f64], n: usize, epsilon: f64) {
    data.par_chunks_exact_mut(n)
        .enumerate()
        .for_each(|(index, chunk)| fill_vertex(chunk, index, epsilon));
}

#[cfg(not(feature = "parallel"))]
fn fill_vertices(data: &mut [f64], n: usize, epsilon: f64) {
    for (index, chunk) in data.chunks_exact_mut(n).enumerate() {
        fill_vertex(chunk, index, epsilon);
    }
}

/// Sequential twin of [`enumerate_vertices`]; the parallel build must match
/// it bit for bit (vertices are pure functions of their index).
pub fn enumerate_vertices_sequential(n: usize, epsilon: f64) -> Result<VertexSet> {
    if n == 0 {
        return Err(Error::InvalidConfig("dimension must be at least 1".into()));
    }
    if n > MAX_SWEEP_DIMENSION {
        return Err(Error::TooManyVertices {
            max: MAX_SWEEP_DIMENSION,
            got: n,
        });
    }
    let count = 1usize << n;
    let mut data = vec![0.0; count * n];
    for (index, chunk) in data.chunks_exact_mut(n).enumerate() {
        fill_vertex(chunk, index, epsilon);
    }
    Ok(VertexSet {
        dimension: n,
        epsilon,
        data,
    })
}

/// Maps every vertex through `inverse_transform` and returns the one with the
/// smallest objective, together with that objective.
pub fn min_vertex_objective(
    vertices: &VertexSet,
    instance: &ProblemInstance,
) -> Result<(Vec<f64>, f64)> {
    if vertices.dimension() != instance.dimension() {
        return Err(Error::DimensionMismatch {
            expected: instance.dimension(),
            got: vertices.dimension(),
        });
    }
    let objective_of = |vertex: &[f64]| -> f64 {
        let y = instance
            .inverse_transform(vertex)
            .expect("dimension checked above");
        y[y.len() - 1]
    };
    let best = best_vertex(vertices, &objective_of);
    let (index, value) = best.ok_or_else(|| Error::EmptyInput("vertex set".into()))?;
    Ok((vertices.vertex(index).to_vec(), value))
}

#[cfg(feature = "parallel")]
fn best_vertex(
    vertices: &VertexSet,
    objective_of: &(dyn Fn(&[f64]) -> f64 + Sync),
) -> Option<(usize, f64)> {
    (0..vertices.len())
        .into_par_iter()
        .map(|i| (i, objective_of(vertices.vertex(i))))
        // Lowest objective wins; the lower index breaks exact ties so the
        // result does not depend on thread scheduling.
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
}

#[cfg(not(feature = "parallel"))]
fn best_vertex(vertices: &VertexSet, objective_of: &dyn Fn(&[f64]) -> f64) -> Option<(usize, f64)> {
    (0..vertices.len())
        .map(|i| (i, objective_of(vertices.vertex(i))))
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
}

/// Draws strictly feasible cube points: `x_1 ~ U[0, 1]`, then
/// `x_i ~ U[eps * x_{i-1}, 1 - eps * x_{i-1}]`. The interval is never empty
/// because `eps <= 1/3`.
pub fn sample_feasible(
    n: usize,
    epsilon: f64,
    rng: &mut ChaCha8Rng,
    count: usize,
) -> Result<Vec<Vec<f64>>> {
    if n == 0 {
        return Err(Error::InvalidConfig("dimension must be at least 1".into()));
    }
    if !(epsilon > 0.0 && epsilon <= crate::problem::MAX_EPSILON) {
        return Err(Error::InvalidConfig(format!(
            "epsilon must lie in (0, 1/3], got {epsilon}"
        )));
    }
    let mut points = Vec::with_capacity(count);
    for _ in 0..count {
        let mut x = Vec::with_capacity(n);
        let mut prev = 0.0;
        for _ in 0..n {
            let low = epsilon * prev;
            let v = rng.random_range(low..=1.0 - low);
            x.push(v);
            prev = v;
        }
        points.push(x);
    }
    Ok(points)
}

/// How box containment of the rotated polytope was established.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ContainmentCheck {
    /// Every vertex was mapped and checked explicitly.
    ExhaustiveSweep,
    /// `|y_i - t_i| <= ||x||_2 <= sqrt(N)` certified containment without a sweep.
    NormBound,
    /// Some mapped vertices left the box.
    Violated { outside: usize },
}

/// Numeric certificate for one instance.
#[derive(Debug, Clone)]
pub struct CertificationReport {
    pub dimension: usize,
    /// `max |R R^T - I|`.
    pub orthogonality_residual: f64,
    /// `|det R - 1|`.
    pub determinant_deviation: f64,
    /// Violation at the relocated optimum; must be exactly zero.
    pub violation_at_optimum: f64,
    /// Objective gap `|f(t) - t_N|` (zero by construction, kept for the record).
    pub objective_gap_at_optimum: f64,
    /// Vertex sweep outcome for `N <= MAX_SWEEP_DIMENSION`:
    /// (minimizing vertex, min objective, `|min - t_N|`, argmin is the origin).
    pub vertex_sweep: Option<VertexSweep>,
    pub containment: ContainmentCheck,
}

#[derive(Debug, Clone)]
pub struct VertexSweep {
    pub argmin: Vec<f64>,
    pub min_objective: f64,
    pub optimum_gap: f64,
    pub argmin_is_origin: bool,
}

impl CertificationReport {
    /// True iff every measured quantity is within its pinned threshold.
    pub fn passed(&self) -> bool {
        self.orthogonality_residual <= ORTHOGONALITY_TOL
            && self.determinant_deviation <= DETERMINANT_TOL
            && self.violation_at_optimum == 0.0
            && self.objective_gap_at_optimum == 0.0
            && self
                .vertex_sweep
                .as_ref()
                .map(|s| s.optimum_gap <= OPTIMUM_GAP_TOL && s.argmin_is_origin)
                .unwrap_or(true)
            && !matches!(self.containment, ContainmentCheck::Violated { .. })
    }
}

/// Measures the instance against ground truth: rotation orthogonality and
/// determinant, feasibility and objective at the relocated optimum (through
/// the dense reference path), the vertex-sweep optimum where enumerable, and
/// box containment of the rotated polytope.
pub fn certify_instance(instance: &ProblemInstance) -> Result<CertificationReport> {
    let n = instance.dimension();
    let r = instance.rotation_matrix();
    let orthogonality_residual = (r * r.transpose() - DMatrix::identity(n, n)).abs().max();
    let determinant_deviation = (r.clone().lu().determinant() - 1.0).abs();

    let t: Vec<f64> = instance.optimal_point().iter().copied().collect();
    let at_optimum = instance.evaluate_dense(&t)?;
    let violation_at_optimum = at_optimum.violation;
    let objective_gap_at_optimum = (at_optimum.objective - instance.optimal_objective()).abs();

    let (vertex_sweep, containment) = if n <= MAX_SWEEP_DIMENSION {
        let vertices = enumerate_vertices(n, instance.config().epsilon)?;
        let (argmin, min_objective) = min_vertex_objective(&vertices, instance)?;
        let outside = vertices
            .iter()
            .filter(|v| {
                let y = instance.inverse_transform(v).expect("dimensions match");
                !instance.in_box(&y)
            })
            .count();
        let sweep = VertexSweep {
            optimum_gap: (min_objective - instance.optimal_objective()).abs(),
            argmin_is_origin: argmin.iter().all(|&v| v == 0.0),
            argmin,
            min_objective,
        };
        let containment = if outside == 0 {
            ContainmentCheck::ExhaustiveSweep
        } else {
            ContainmentCheck::Violated { outside }
        };
        (Some(sweep), containment)
    } else {
        // Vertex components lie in [0, 1], so ||x|| <= sqrt(N) and the mapped
        // vertex stays within sqrt(N) of t componentwise. The box has margin
        // min(t_i, upper - t_i) around t.
        let (lo, hi) = instance.box_bounds();
        let t_val = instance.optimal_objective();
        let margin = (t_val - lo).min(hi - t_val);
        let reach = (n as f64).sqrt();
        let containment = if reach <= margin {
            ContainmentCheck::NormBound
        } else {
            ContainmentCheck::Violated {
                outside: usize::MAX,
            }
        };
        (None, containment)
    };

    Ok(CertificationReport {
        dimension: n,
        orthogonality_residual,
        determinant_deviation,
        violation_at_optimum,
        objective_gap_at_optimum,
        vertex_sweep,
        containment,
    })
}
