//! Nyström discretization of Fredholm determinants `det(I - K)` and resolvent
//! traces `tr((I - K)^{-1} P)` for rank-one `P`.
//!
//! On real rules with positive weights the matrix `δ_ij − √w_i K(x_i, x_j) √w_j`
//! is used; on complex contours columns are multiplied by the weights.
//! Both conventions give the same determinant.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, LuFactors};
use crate::quadrature::{ContourRule, QuadratureRule};

/// Rank-one kernel `P(x, y) = u(x) v(y)`.
pub struct RankOneKernel<U, V> {
    pub u: U,
    pub v: V,
}

impl<U, V> RankOneKernel<U, V>
where
    U: Fn(f64) -> Complex64,
    V: Fn(f64) -> Complex64,
{
    pub fn new(u: U, v: V) -> Self {
        Self { u, v }
    }

    pub fn eval(&self, x: f64, y: f64) -> Complex64 {
        (self.u)(x) * (self.v)(y)
    }
}

/// Discretized `I − K` on a quadrature rule.
pub struct NystromSystem {
    /// Left/right scaling applied to node values (`√w` for real rules).
    left: Vec<Complex64>,
    right: Vec<Complex64>,
    matrix: DenseMatrix,
    lu: LuFactors,
}

impl NystromSystem {
    /// `I − √w K √w` for a real rule with positive weights, or the
    /// column-weighted form if any weight is non-positive.
    pub fn new(kernel: impl Fn(f64, f64) -> Complex64, rule: &QuadratureRule) -> Result<Self> {
        let n = rule.len();
        let symmetric = rule.weights.iter().all(|&w| w > 0.0);
        let (left, right): (Vec<Complex64>, Vec<Complex64>) = if symmetric {
            rule.weights
                .iter()
                .map(|&w| {
                    let s = Complex64::new(w.sqrt(), 0.0);
                    (s, s)
                })
                .unzip()
        } else {
            rule.weights
                .iter()
                .map(|&w| (Complex64::new(1.0, 0.0), Complex64::new(w, 0.0)))
                .unzip()
        };
        let mut bad = None;
        let matrix = DenseMatrix::from_fn(n, |i, j| {
            let k = kernel(rule.nodes[i], rule.nodes[j]);
            if bad.is_none() && !(k.re.is_finite() && k.im.is_finite()) {
                bad = Some((i, j));
            }
            let d = if i == j { 1.0 } else { 0.0 };
            Complex64::new(d, 0.0) - left[i] * k * right[j]
        });
        if let Some((i, j)) = bad {
            return Err(Error::NonFiniteEntry { i, j });
        }
        Ok(Self::from_parts(left, right, matrix))
    }

    /// `I − K W` on a complex contour (columns multiplied by weights).
    pub fn on_contour(
        kernel: impl Fn(Complex64, Complex64) -> Complex64,
        rule: &ContourRule,
    ) -> Result<Self> {
        let n = rule.len();
        let mut bad = None;
        let matrix = DenseMatrix::from_fn(n, |i, j| {
            let k = kernel(rule.nodes[i], rule.nodes[j]);
            if bad.is_none() && !(k.re.is_finite() && k.im.is_finite()) {
                bad = Some((i, j));
            }
            let d = if i == j { 1.0 } else { 0.0 };
            Complex64::new(d, 0.0) - k * rule.weights[j]
        });
        if let Some((i, j)) = bad {
            return Err(Error::NonFiniteEntry { i, j });
        }
        let left = vec![Complex64::new(1.0, 0.0); n];
        Ok(Self::from_parts(left, rule.weights.clone(), matrix))
    }

    /// Wraps an already weighted kernel matrix `K̃`; the system is `I − K̃`.
    /// `left`/`right` are the scalings used to build `K̃` from kernel values.
    pub fn from_weighted(
        weighted: &DenseMatrix,
        left: Vec<Complex64>,
        right: Vec<Complex64>,
    ) -> Result<Self> {
        if let Some((i, j)) = weighted.first_non_finite() {
            return Err(Error::NonFiniteEntry { i, j });
        }
        let n = weighted.n();
        let matrix = DenseMatrix::from_fn(n, |i, j| {
            let d = if i == j { 1.0 } else { 0.0 };
            Complex64::new(d, 0.0) - weighted.get(i, j)
        });
        Ok(Self::from_parts(left, right, matrix))
    }

    fn from_parts(left: Vec<Complex64>, right: Vec<Complex64>, matrix: DenseMatrix) -> Self {
        let lu = LuFactors::new(&matrix);
        Self {
            left,
            right,
            matrix,
            lu,
        }
    }

    pub fn len(&self) -> usize {
        self.matrix.n()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn determinant(&self) -> Complex64 {
        self.lu.determinant()
    }

    /// `tr((I − K)^{-1} P)` for `P = u ⊗ v` given node values of `u` and `v`.
    pub fn resolvent_trace_values(&self, u: &[Complex64], v: &[Complex64]) -> Result<Complex64> {
        if self.lu.is_singular() {
            return Err(Error::SingularResolvent);
        }
        // symmetric form: (I − √w K √w) y = √w u, tr = Σ √w_i y_i v_i;
        // column form: (I − K w) f = u, tr = Σ w_i f_i v_i
        let b: Vec<Complex64> = u.iter().zip(&self.left).map(|(a, l)| a * l).collect();
        let y = self.lu.solve(&self.matrix, &b)?;
        Ok(y
            .iter()
            .zip(v)
            .zip(&self.right)
            .map(|((yi, vi), ri)| yi * vi * ri)
            .sum())
    }
}

/// `det(I − K)` on a real rule.
pub fn fredholm_det(
    kernel: impl Fn(f64, f64) -> Complex64,
    rule: &QuadratureRule,
) -> Result<Complex64> {
    Ok(NystromSystem::new(kernel, rule)?.determinant())
}

/// `det(I − K)` on a complex contour.
pub fn fredholm_det_contour(
    kernel: impl Fn(Complex64, Complex64) -> Complex64,
    rule: &ContourRule,
) -> Result<Complex64> {
    Ok(NystromSystem::on_contour(kernel, rule)?.determinant())
}

/// `tr((I − K)^{-1} P)` on a real rule by one linear solve.
pub fn resolvent_trace<U, V>(
    kernel: impl Fn(f64, f64) -> Complex64,
    p: &RankOneKernel<U, V>,
    rule: &QuadratureRule,
) -> Result<Complex64>
where
    U: Fn(f64) -> Complex64,
    V: Fn(f64) -> Complex64,
{
    let sys = NystromSystem::new(kernel, rule)?;
    let u: Vec<Complex64> = rule.nodes.iter().map(|&x| (p.u)(x)).collect();
    let v: Vec<Complex64> = rule.nodes.iter().map(|&x| (p.v)(x)).collect();
    sys.resolvent_trace_values(&u, &v)
}
