//! Dense complex matrices: determinants and linear solves by partially
//! pivoted LU (backed by `faer`), with one step of iterative refinement for
//! solves.

use faer::linalg::solvers::{PartialPivLu, Solve};
use faer::Mat;
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

/// Square complex matrix; real matrices are stored with zero imaginary part.
#[derive(Debug, Clone)]
pub struct DenseMatrix {
    inner: Mat<Complex64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            inner: Mat::zeros(n, n),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            inner: Mat::identity(n, n),
        }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        Self {
            inner: Mat::from_fn(n, n, |i, j| f(i, j)),
        }
    }

    /// Builds from a row-major slice of length `n * n`.
    pub fn from_row_major(n: usize, data: &[Complex64]) -> Result<Self> {
        if data.len() != n * n {
            return Err(invalid(format!(
                "expected {} entries for a {n}x{n} matrix, got {}",
                n * n,
                data.len()
            )));
        }
        Ok(Self::from_fn(n, |i, j| data[i * n + j]))
    }

    pub fn from_real_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        Self::from_fn(n, |i, j| Complex64::new(f(i, j), 0.0))
    }

    pub fn n(&self) -> usize {
        self.inner.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.inner[(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.inner[(i, j)] = v;
    }

    pub fn as_faer(&self) -> &Mat<Complex64> {
        &self.inner
    }

    pub fn from_faer(inner: Mat<Complex64>) -> Result<Self> {
        if inner.nrows() != inner.ncols() {
            return Err(invalid("matrix must be square"));
        }
        Ok(Self { inner })
    }

    /// First non-finite entry, if any.
    pub fn first_non_finite(&self) -> Option<(usize, usize)> {
        let n = self.n();
        for j in 0..n {
            for i in 0..n {
                let z = self.inner[(i, j)];
                if !(z.re.is_finite() && z.im.is_finite()) {
                    return Some((i, j));
                }
            }
        }
        None
    }

    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        DenseMatrix {
            inner: &self.inner * &other.inner,
        }
    }

    /// Trailing principal block `M[k.., k..]`.
    pub fn trailing(&self, k: usize) -> DenseMatrix {
        DenseMatrix {
            inner: self.inner.submatrix(k, k, self.n() - k, self.n() - k).to_owned(),
        }
    }

    pub fn transpose(&self) -> DenseMatrix {
        DenseMatrix {
            inner: self.inner.transpose().to_owned(),
        }
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let n = self.n();
        (0..n)
            .map(|i| (0..n).map(|j| self.inner[(i, j)] * x[j]).sum())
            .collect()
    }
}

/// LU factorization with partial pivoting.
pub struct LuFactors {
    lu: PartialPivLu<Complex64>,
    det: Complex64,
    singular: bool,
}

impl LuFactors {
    pub fn new(m: &DenseMatrix) -> Self {
        let lu = m.inner.partial_piv_lu();
        let u = lu.U();
        let n = u.nrows();
        let mut det = Complex64::new(1.0, 0.0);
        let mut singular = false;
        for i in 0..n {
            let d = u[(i, i)];
            if d == Complex64::new(0.0, 0.0) {
                singular = true;
            }
            det *= d;
        }
        if permutation_is_odd(lu.P().arrays().0) {
            det = -det;
        }
        if singular {
            det = Complex64::new(0.0, 0.0);
        }
        Self { lu, det, singular }
    }

    pub fn determinant(&self) -> Complex64 {
        self.det
    }

    pub fn is_singular(&self) -> bool {
        self.singular
    }

    fn raw_solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let rhs = Mat::from_fn(b.len(), 1, |i, _| b[i]);
        let x = self.lu.solve(&rhs);
        (0..b.len()).map(|i| x[(i, 0)]).collect()
    }

    /// Solves `M x = b` with one step of iterative refinement against `m`.
    pub fn solve(&self, m: &DenseMatrix, b: &[Complex64]) -> Result<Vec<Complex64>> {
        if self.singular {
            return Err(Error::SingularResolvent);
        }
        if b.len() != m.n() {
            return Err(invalid("right-hand side length does not match matrix"));
        }
        let mut x = self.raw_solve(b);
        let mx = m.apply(&x);
        let r: Vec<Complex64> = b.iter().zip(&mx).map(|(bi, mi)| bi - mi).collect();
        let d = self.raw_solve(&r);
        for (xi, di) in x.iter_mut().zip(&d) {
            *xi += di;
        }
        if x.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::SingularResolvent);
        }
        Ok(x)
    }
}

fn permutation_is_odd(perm: &[usize]) -> bool {
    let mut seen = vec![false; perm.len()];
    let mut odd = false;
    for start in 0..perm.len() {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut k = start;
        while !seen[k] {
            seen[k] = true;
            k = perm[k];
            len += 1;
        }
        if len % 2 == 0 {
            odd = !odd;
        }
    }
    odd
}

/// `det(M)` via partially pivoted LU. An exactly singular matrix gives 0.
pub fn lu_determinant(m: &DenseMatrix) -> Complex64 {
    LuFactors::new(m).determinant()
}

/// Solves `M x = b`; fails with "singular resolvent" for singular `M`.
pub fn solve(m: &DenseMatrix, b: &[Complex64]) -> Result<Vec<Complex64>> {
    LuFactors::new(m).solve(m, b)
}
