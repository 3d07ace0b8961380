//! Construction and evaluation of the rotated Klee-Minty family.
//!
//! The base polytope `{x : A x <= b}` is the Klee-Minty cube in recursive
//! form; the benchmark rotates it in the plane spanned by `e_N` and the
//! normalized all-ones-but-last direction, then translates it so the optimum
//! sits at `t = N^3 * 1`. Candidates live in the box `[0, 5 N^3]^N`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default subdiagonal coefficient of the recursive cube.
pub const DEFAULT_EPSILON: f64 = 0.1;
/// Largest admissible subdiagonal coefficient.
pub const MAX_EPSILON: f64 = 1.0 / 3.0;
/// Default rotation angle (radians), 350 degrees.
pub const DEFAULT_ROTATION_ANGLE: f64 = 350.0 / 180.0 * std::f64::consts::PI;
/// Rotation angles preserving the optimum lie in this closed interval.
pub const ADMISSIBLE_ANGLE_MIN: f64 = 1.5 * std::f64::consts::PI;
pub const ADMISSIBLE_ANGLE_MAX: f64 = 2.0 * std::f64::consts::PI;
/// Default scale of the optimum translation: `t = scale * N^3 * 1`.
pub const DEFAULT_TRANSLATION_SCALE: f64 = 1.0;
/// Default scale of the upper box bound: `y_hat = scale * N^3 * 1`.
pub const DEFAULT_BOX_UPPER_SCALE: f64 = 5.0;

/// Geometry parameters of one problem instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemConfig {
    pub dimension: usize,
    /// Subdiagonal coefficient, `0 < epsilon <= 1/3`.
    pub epsilon: f64,
    /// Rotation angle in radians.
    pub rotation_angle: f64,
    /// `t = translation_scale * N^3 * 1`.
    pub translation_scale: f64,
    /// Upper box bound `box_upper_scale * N^3` per component.
    pub box_upper_scale: f64,
    /// Skip the admissible-interval check on `rotation_angle`. Off-interval
    /// angles generally move the optimum away from `t`; `certify` measures
    /// the damage instead of assuming it away.
    #[serde(default)]
    pub allow_any_angle: bool,
}

impl ProblemConfig {
    /// Defaults for dimension `n`.
    pub fn new(dimension: usize) -> Self {
        ProblemConfig {
            dimension,
            epsilon: DEFAULT_EPSILON,
            rotation_angle: DEFAULT_ROTATION_ANGLE,
            translation_scale: DEFAULT_TRANSLATION_SCALE,
            box_upper_scale: DEFAULT_BOX_UPPER_SCALE,
            allow_any_angle: false,
        }
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_rotation_angle(mut self, angle: f64) -> Self {
        self.rotation_angle = angle;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.dimension == 0 {
            return Err(Error::InvalidConfig("dimension must be at least 1".into()));
        }
        if !(self.epsilon > 0.0 && self.epsilon <= MAX_EPSILON) {
            return Err(Error::InvalidConfig(format!(
                "epsilon must lie in (0, 1/3], got {}",
                self.epsilon
            )));
        }
        if !self.rotation_angle.is_finite() {
            return Err(Error::InvalidConfig("rotation angle must be finite".into()));
        }
        if !self.allow_any_angle
            && !(ADMISSIBLE_ANGLE_MIN..=ADMISSIBLE_ANGLE_MAX).contains(&self.rotation_angle)
        {
            return Err(Error::ConventionViolated(format!(
                "rotation angle {} outside the optimum-preserving interval [{}, {}]",
                self.rotation_angle, ADMISSIBLE_ANGLE_MIN, ADMISSIBLE_ANGLE_MAX
            )));
        }
        if !(self.translation_scale.is_finite() && self.translation_scale > 0.0) {
            return Err(Error::InvalidConfig(
                "translation scale must be positive".into(),
            ));
        }
        if !(self.box_upper_scale.is_finite() && self.box_upper_scale > 0.0) {
            return Err(Error::InvalidConfig(
                "box upper scale must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Objective value and constraint violation of one candidate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvaluationResult {
    /// `f(y) = c^T y = y_N`.
    pub objective: f64,
    /// Sum of positive parts over all 2N inequality rows; `0` means feasible.
    pub violation: f64,
}

impl EvaluationResult {
    pub fn is_feasible(&self) -> bool {
        self.violation == 0.0
    }

    pub fn is_finite(&self) -> bool {
        self.objective.is_finite() && self.violation.is_finite()
    }
}

/// Stacked constraint system of the recursive cube: rows `1..=N` bound
/// `x_i + eps * x_{i-1}` by 1, rows `N+1..=2N` bound `-x_i + eps * x_{i-1}`
/// by 0.
pub fn build_constraint_matrices(n: usize, epsilon: f64) -> Result<(DMatrix<f64>, DVector<f64>)> {
    if n == 0 {
        return Err(Error::InvalidConfig("dimension must be at least 1".into()));
    }
    if !(epsilon > 0.0 && epsilon <= MAX_EPSILON) {
        return Err(Error::InvalidConfig(format!(
            "epsilon must lie in (0, 1/3], got {epsilon}"
        )));
    }
    let mut a = DMatrix::zeros(2 * n, n);
    for i in 0..n {
        a[(i, i)] = 1.0;
        a[(n + i, i)] = -1.0;
        if i > 0 {
            a[(i, i - 1)] = epsilon;
            a[(n + i, i - 1)] = epsilon;
        }
    }
    let mut b = DVector::zeros(2 * n);
    for i in 0..n {
        b[i] = 1.0;
    }
    Ok((a, b))
}

/// Rotation in the plane spanned by `v1 = e_N` and `v2 = (1,..,1,0)/sqrt(N-1)`:
/// `R = I + (cos - 1)(v1 v1^T + v2 v2^T) - sin (v1 v2^T - v2 v1^T)`.
/// For `N = 1` the plane degenerates and the identity is returned.
pub fn build_rotation_matrix(n: usize, angle: f64) -> Result<DMatrix<f64>> {
    if n == 0 {
        return Err(Error::InvalidConfig("dimension must be at least 1".into()));
    }
    if n == 1 {
        return Ok(DMatrix::identity(1, 1));
    }
    let (sin, cos) = angle.sin_cos();
    let mut v1 = DVector::zeros(n);
    v1[n - 1] = 1.0;
    let mut v2 = DVector::from_element(n, 1.0 / ((n - 1) as f64).sqrt());
    v2[n - 1] = 0.0;
    let r = DMatrix::identity(n, n) + (cos - 1.0) * (&v1 * v1.transpose() + &v2 * v2.transpose())
        - sin * (&v1 * v2.transpose() - &v2 * v1.transpose());
    Ok(r)
}

/// Immutable, shareable instance: validated config plus the assembled
/// constraint system, rotation, translation and box.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    config: ProblemConfig,
    a: DMatrix<f64>,
    b: DVector<f64>,
    c: DVector<f64>,
    r: DMatrix<f64>,
    t: DVector<f64>,
    upper: f64,
    sin: f64,
    cos: f64,
    /// `1 / sqrt(N - 1)`; unused for `N = 1`.
    inv_sqrt: f64,
}

impl ProblemInstance {
    pub fn new(config: ProblemConfig) -> Result<Self> {
        config.validate()?;
        let n = config.dimension;
        let (a, b) = build_constraint_matrices(n, config.epsilon)?;
        let r = build_rotation_matrix(n, config.rotation_angle)?;
        let cube = (n as f64).powi(3);
        let t = DVector::from_element(n, config.translation_scale * cube);
        let mut c = DVector::zeros(n);
        c[n - 1] = 1.0;
        let (sin, cos) = config.rotation_angle.sin_cos();
        let inv_sqrt = if n > 1 {
            1.0 / ((n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Ok(ProblemInstance {
            upper: config.box_upper_scale * cube,
            config,
            a,
            b,
            c,
            r,
            t,
            sin,
            cos,
            inv_sqrt,
        })
    }

    pub fn config(&self) -> &ProblemConfig {
        &self.config
    }

    pub fn dimension(&self) -> usize {
        self.config.dimension
    }

    pub fn constraint_matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn constraint_rhs(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn objective_coefficients(&self) -> &DVector<f64> {
        &self.c
    }

    pub fn rotation_matrix(&self) -> &DMatrix<f64> {
        &self.r
    }

    pub fn translation(&self) -> &DVector<f64> {
        &self.t
    }

    /// Component-wise box bounds `(0, box_upper_scale * N^3)`.
    pub fn box_bounds(&self) -> (f64, f64) {
        (0.0, self.upper)
    }

    /// Where the optimum sits when the angle is admissible: `t`.
    pub fn optimal_point(&self) -> &DVector<f64> {
        &self.t
    }

    /// Objective value at [`Self::optimal_point`], `N^3` at default scale.
    pub fn optimal_objective(&self) -> f64 {
        self.t[self.config.dimension - 1]
    }

    fn check_dimension(&self, len: usize) -> Result<()> {
        if len != self.config.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.config.dimension,
                got: len,
            });
        }
        Ok(())
    }

    /// Search-space point to polytope coordinates: `R^T (y - t)`.
    pub fn transform(&self, y: &[f64]) -> Result<Vec<f64>> {
        self.check_dimension(y.len())?;
        let z: Vec<f64> = y
            .iter()
            .zip(self.t.iter())
            .map(|(yi, ti)| yi - ti)
            .collect();
        Ok(self.rotate(&z, true))
    }

    /// Polytope coordinates back to the search space: `R x + t`.
    pub fn inverse_transform(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dimension(x.len())?;
        let mut y = self.rotate(x, false);
        for (yi, ti) in y.iter_mut().zip(self.t.iter()) {
            *yi += ti;
        }
        Ok(y)
    }

    /// Applies the plane rotation in O(N) through its rank-2 structure.
    /// `transpose = true` applies `R^T`. Matches the stored dense matrix to
    /// rounding error (pinned by tests).
    fn rotate(&self, z: &[f64], transpose: bool) -> Vec<f64> {
        let n = z.len();
        if n == 1 {
            return z.to_vec();
        }
        let sin = if transpose { -self.sin } else { self.sin };
        let d1 = z[n - 1];
        let d2 = neumaier_sum(&z[..n - 1]) * self.inv_sqrt;
        let along_v2 = ((self.cos - 1.0) * d2 + sin * d1) * self.inv_sqrt;
        let mut out = Vec::with_capacity(n);
        for zi in &z[..n - 1] {
            out.push(zi + along_v2);
        }
        out.push(z[n - 1] + (self.cos - 1.0) * d1 - sin * d2);
        out
    }

    /// Objective `y_N` and violation summed over all 2N rows evaluated at the
    /// transformed point. Pure: identical input bits give identical outputs.
    pub fn evaluate(&self, y: &[f64]) -> Result<EvaluationResult> {
        check_finite(y)?;
        let x = self.transform(y)?;
        let eps = self.config.epsilon;
        // Rows of A are bidiagonal; walk them without touching the dense matrix.
        let mut upper_rows = 0.0;
        let mut lower_rows = 0.0;
        let mut prev = 0.0;
        for &xi in &x {
            upper_rows += f64::max(0.0, xi + eps * prev - 1.0);
            lower_rows += f64::max(0.0, -xi + eps * prev);
            prev = xi;
        }
        Ok(EvaluationResult {
            objective: y[y.len() - 1],
            violation: upper_rows + lower_rows,
        })
    }

    /// Same contract as [`Self::evaluate`] through the stored dense matrices;
    /// reference path for the certifier and for tests of the O(N) route.
    pub fn evaluate_dense(&self, y: &[f64]) -> Result<EvaluationResult> {
        check_finite(y)?;
        self.check_dimension(y.len())?;
        let yv = DVector::from_column_slice(y);
        let x = self.r.transpose() * (&yv - &self.t);
        let residual = &self.a * x - &self.b;
        let violation = residual.iter().map(|v| v.max(0.0)).sum();
        Ok(EvaluationResult {
            objective: self.c.dot(&yv),
            violation,
        })
    }

    /// True iff every component lies in `[0, box_upper_scale * N^3]`.
    /// NaN components fail the check.
    pub fn in_box(&self, y: &[f64]) -> bool {
        y.len() == self.config.dimension && y.iter().all(|&v| (0.0..=self.upper).contains(&v))
    }
}

/// Candidates must be finite: `max(0, ·)` in the violation sum would
/// silently swallow a NaN residual, reporting a garbage point as feasible.
fn check_finite(y: &[f64]) -> Result<()> {
    if y.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(
            "candidate contains a non-finite component".into(),
        ))
    }
}

/// Compensated (Neumaier) summation; keeps the v2-projection accurate for
/// box-scale inputs at N = 40.
fn neumaier_sum(values: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for &v in values {
        let t = sum + v;
        comp += if sum.abs() >= v.abs() {
            (sum - t) + v
        } else {
            (v - t) + sum
        };
        sum = t;
    }
    sum + comp
}
