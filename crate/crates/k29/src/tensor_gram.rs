//! Gram-trick tracking of tensor norms and the associated capital process.
//!
//! The quantity of interest is `N_n = ‖Σ_i r_i ⊗ Φ(f_i, x_i)‖²`, where
//! `r_i = y_i − f_i`. The feature map is never materialized: the tensor
//! inner products reduce to `⟨r_i, r_j⟩ · K((f_i,x_i), (f_j,x_j))`, so the
//! accumulator only needs the kernel. Alongside it runs the diagonal sum
//! `D_n = Σ ‖r_i‖² K_ii`, and `N_n − D_n` is a Skeptic capital process: the
//! K29 forecaster keeps it from growing, which is where every √n bound
//! comes from.
//!
//! [`FiniteTensor`] gives the explicit matrix representation used to check
//! the Gram path against outer products when the feature space is a small
//! `R^d`.

use crate::geometry::Vector;
use crate::kernels::{Kernel, Point};
use crate::{Error, Result};

/// Incremental tracker of `N_n`, `D_n` and the round history.
///
/// Each push costs `O(n)` kernel evaluations. Shared read access is safe;
/// pushes require exclusive access.
#[derive(Clone, Debug)]
pub struct TensorAccumulator {
    kernel: Kernel,
    residuals: Vec<Vector>,
    points: Vec<Point>,
    gram_norm_sq: f64,
    diag_sum: f64,
}

impl TensorAccumulator {
    pub fn new(kernel: Kernel) -> Self {
        Self {
            kernel,
            residuals: Vec::new(),
            points: Vec::new(),
            gram_norm_sq: 0.0,
            diag_sum: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.residuals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.residuals.is_empty()
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    /// Raw accumulated `N_n`; may drift marginally negative from rounding.
    pub fn gram_norm_sq(&self) -> f64 {
        self.gram_norm_sq
    }

    /// `D_n = Σ ‖r_i‖² K_ii`, nondecreasing in `n`.
    pub fn diag_sum(&self) -> f64 {
        self.diag_sum
    }

    /// Append a residual/point pair:
    /// `N_n = N_{n−1} + 2 Σ_{i<n} ⟨r_i, r⟩ K(p_i, p) + ‖r‖² K(p, p)`.
    pub fn push(&mut self, residual: Vector, point: Point) -> Result<()> {
        let first = self.residuals.first().map_or(residual.dim(), Vector::dim);
        if residual.dim() != first {
            return Err(Error::DimensionMismatch { expected: first, got: residual.dim() });
        }
        let k_self = self.kernel.eval(&point, &point)?;
        let mut cross = 0.0;
        for (r_i, p_i) in self.residuals.iter().zip(self.points.iter()) {
            cross += r_i.dot(&residual)
                * self.kernel.eval_unchecked(
                    p_i.forecast.coords(),
                    p_i.datum.coords(),
                    point.forecast.coords(),
                    point.datum.coords(),
                );
        }
        let own = residual.norm_sq() * k_self;
        self.gram_norm_sq += 2.0 * cross + own;
        self.diag_sum += own;
        self.residuals.push(residual);
        self.points.push(point);
        Ok(())
    }

    /// The capital process `K_n = N_n − D_n` (with `K_0 = 0`); not
    /// necessarily nonnegative.
    pub fn capital(&self) -> f64 {
        self.gram_norm_sq - self.diag_sum
    }

    /// `‖Σ r_i ⊗ Φ_i‖`, clamping rounding drift at zero.
    pub fn tensor_norm(&self) -> f64 {
        self.gram_norm_sq.max(0.0).sqrt()
    }

    /// Recompute `N_n` from scratch as the full double sum; audit path for
    /// the incremental update.
    pub fn recompute_gram_norm_sq(&self) -> f64 {
        let n = self.len();
        let mut total = 0.0;
        for i in 0..n {
            for j in 0..n {
                total += self.residuals[i].dot(&self.residuals[j])
                    * self
                        .kernel
                        .eval(&self.points[i], &self.points[j])
                        .expect("stored points match the kernel dims");
            }
        }
        total
    }

    pub fn history(&self) -> impl Iterator<Item = (&Vector, &Point)> {
        self.residuals.iter().zip(self.points.iter())
    }
}

/// Explicit element of `L ⊗ H` for finite-dimensional `H = R^d`: the matrix
/// of the bilinear form.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteTensor {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl FiniteTensor {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    /// Rank-one tensor `l ⊗ h`.
    pub fn outer(l: &Vector, h: &Vector) -> Self {
        let (rows, cols) = (l.dim(), h.dim());
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(l.get(i) * h.get(j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn add_assign(&mut self, other: &FiniteTensor) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                expected: self.rows * self.cols,
                got: other.rows * other.cols,
            });
        }
        for (a, b) in self.data.iter_mut().zip(other.data.iter()) {
            *a += b;
        }
        Ok(())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// The product `vh ∈ L`: the matrix-vector product. Satisfies
    /// `(l ⊗ h₁) h₂ = ⟨h₁, h₂⟩ l` and `‖vh‖ ≤ ‖v‖ ‖h‖`.
    pub fn apply(&self, h: &Vector) -> Result<Vector> {
        if h.dim() != self.cols {
            return Err(Error::DimensionMismatch { expected: self.cols, got: h.dim() });
        }
        let mut out = vec![0.0; self.rows];
        for (i, value) in out.iter_mut().enumerate() {
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            *value = row.iter().zip(h.coords().iter()).map(|(a, b)| a * b).sum();
        }
        Ok(Vector::from_raw(out))
    }
}

/// `‖Σ outer(r_i, h_i)‖` computed through the explicit matrices. This is
/// the independent check of the Gram path for feature maps into `R^d`.
pub fn outer_product_norm(residuals: &[Vector], features: &[Vector]) -> Result<f64> {
    if residuals.len() != features.len() {
        return Err(Error::DimensionMismatch {
            expected: residuals.len(),
            got: features.len(),
        });
    }
    let Some(first_r) = residuals.first() else { return Ok(0.0) };
    let mut total = FiniteTensor::zeros(first_r.dim(), features[0].dim());
    for (r, h) in residuals.iter().zip(features.iter()) {
        total.add_assign(&FiniteTensor::outer(r, h))?;
    }
    Ok(total.frobenius_norm())
}
