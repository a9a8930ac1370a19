//! Dense complex linear algebra for the small matrices used throughout the
//! crate: 4x4 density matrices, 16x16 superoperators and process matrices.
//!
//! Everything here is a pure function of its inputs. [`CMatrix`] is a plain
//! row-major buffer of [`C64`] with the handful of operations the rest of the
//! crate needs (products, Kronecker products, exponentials, Hermitian
//! eigendecomposition, trace norm and partial traces).

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Structural tolerance used for Hermiticity and similar checks.
pub const STRUCTURAL_TOL: f64 = 1e-10;
/// Magnitude below which an entry is treated as an exact zero.
pub const EXACT_ZERO_TOL: f64 = 1e-12;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Dense complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![C64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: format!("{} entries for a {rows}x{cols} matrix", rows * cols),
                found: format!("{} entries", data.len()),
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from nested rows of real numbers.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let n = rows.len();
        let m = rows.first().map_or(0, |r| r.len());
        Self::from_fn(n, m, |i, j| C64::new(rows[i][j], 0.0))
    }

    pub fn from_rows(rows: &[&[C64]]) -> Self {
        let n = rows.len();
        let m = rows.first().map_or(0, |r| r.len());
        Self::from_fn(n, m, |i, j| rows[i][j])
    }

    pub fn diag(entries: &[C64]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, &v) in entries.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn diag_real(entries: &[f64]) -> Self {
        let v: Vec<C64> = entries.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::diag(&v)
    }

    /// Column vector.
    pub fn column(entries: &[C64]) -> Self {
        Self { rows: entries.len(), cols: 1, data: entries.to_vec() }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.data
    }

    pub fn iter(&self) -> impl Iterator<Item = &C64> {
        self.data.iter()
    }

    /// Iterates `(row, col, value)` over all entries.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        let cols = self.cols;
        self.data.iter().enumerate().map(move |(k, &v)| (k / cols, k % cols, v))
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&z| f(z)).collect() }
    }

    pub fn scale(&self, s: C64) -> Self {
        self.map(|z| z * s)
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.map(|z| z * s)
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch {
                expected: format!("{} rows on the right operand", self.cols),
                found: format!("{}", rhs.rows),
            });
        }
        Ok(self.mul_unchecked(rhs))
    }

    fn mul_unchecked(&self, rhs: &Self) -> Self {
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                let dst = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (d, &b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch");
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> f64 {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn hermiticity_residual(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square() && self.hermiticity_residual() <= tol
    }

    /// Positive semidefinite test on the Hermitian part: the smallest
    /// eigenvalue must be at least `-tol`.
    pub fn is_psd(&self, tol: f64) -> bool {
        match min_eigenvalue(&self.hermitian_part()) {
            Ok(w) => w >= -tol,
            Err(_) => false,
        }
    }

    pub fn hermitian_part(&self) -> Self {
        let adj = self.adjoint();
        Self::from_fn(self.rows, self.cols, |i, j| (self[(i, j)] + adj[(i, j)]) * 0.5)
    }

    /// Number of entries whose modulus exceeds `tol`.
    pub fn count_nonzero(&self, tol: f64) -> usize {
        self.data.iter().filter(|z| z.norm() > tol).count()
    }

    /// Row-major flattening of a matrix into a column vector.
    pub fn vectorize(&self) -> Self {
        Self { rows: self.rows * self.cols, cols: 1, data: self.data.clone() }
    }

    /// Inverse of [`CMatrix::vectorize`] for a square `d x d` target.
    pub fn unvectorize(v: &Self, d: usize) -> Result<Self> {
        if v.data.len() != d * d {
            return Err(Error::DimensionMismatch {
                expected: format!("{} entries", d * d),
                found: format!("{}", v.data.len()),
            });
        }
        Ok(Self { rows: d, cols: d, data: v.data.clone() })
    }

    fn require_square(&self, what: &str) -> Result<()> {
        if self.is_square() {
            Ok(())
        } else {
            Err(Error::NotSquare { what: what.to_string(), rows: self.rows, cols: self.cols })
        }
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.4e}{:+.4e}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

macro_rules! elementwise {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait<&CMatrix> for &CMatrix {
            type Output = CMatrix;
            fn $method(self, rhs: &CMatrix) -> CMatrix {
                assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch");
                CMatrix {
                    rows: self.rows,
                    cols: self.cols,
                    data: self.data.iter().zip(&rhs.data).map(|(a, b)| a $op b).collect(),
                }
            }
        }
        impl $trait<CMatrix> for CMatrix {
            type Output = CMatrix;
            fn $method(self, rhs: CMatrix) -> CMatrix {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&CMatrix> for CMatrix {
            type Output = CMatrix;
            fn $method(self, rhs: &CMatrix) -> CMatrix {
                (&self).$method(rhs)
            }
        }
    };
}

elementwise!(Add, add, +);
elementwise!(Sub, sub, -);

impl AddAssign<&CMatrix> for CMatrix {
    fn add_assign(&mut self, rhs: &CMatrix) {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch");
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}

impl SubAssign<&CMatrix> for CMatrix {
    fn sub_assign(&mut self, rhs: &CMatrix) {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch");
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a -= b;
        }
    }
}

impl Neg for &CMatrix {
    type Output = CMatrix;
    fn neg(self) -> CMatrix {
        self.map(|z| -z)
    }
}

/// Matrix product. Panics on incompatible shapes; use [`CMatrix::matmul`]
/// for a checked version.
impl Mul<&CMatrix> for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, rhs.rows, "incompatible shapes for product");
        self.mul_unchecked(rhs)
    }
}

impl Mul<CMatrix> for CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: CMatrix) -> CMatrix {
        &self * &rhs
    }
}

impl Mul<&CMatrix> for CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        &self * rhs
    }
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (br, bc) = (b.rows, b.cols);
    CMatrix::from_fn(a.rows * br, a.cols * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

/// Solves `a x = b` by LU decomposition with partial pivoting.
pub fn solve(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    a.require_square("coefficient matrix")?;
    if b.rows != a.rows {
        return Err(Error::DimensionMismatch {
            expected: format!("{} rows on the right-hand side", a.rows),
            found: format!("{}", b.rows),
        });
    }
    let n = a.rows;
    let mut lu = a.clone();
    let mut x = b.clone();
    let scale = a.max_abs().max(f64::MIN_POSITIVE);
    for k in 0..n {
        let (piv, pmax) = (k..n)
            .map(|i| (i, lu[(i, k)].norm()))
            .fold((k, -1.0), |acc, v| if v.1 > acc.1 { v } else { acc });
        if pmax <= scale * 1e-14 {
            return Err(Error::Singular);
        }
        if piv != k {
            for j in 0..n {
                lu.data.swap(k * n + j, piv * n + j);
            }
            for j in 0..x.cols {
                x.data.swap(k * x.cols + j, piv * x.cols + j);
            }
        }
        let pivot = lu[(k, k)];
        for i in k + 1..n {
            let f = lu[(i, k)] / pivot;
            if f.re == 0.0 && f.im == 0.0 {
                continue;
            }
            for j in k..n {
                let v = lu[(k, j)];
                lu[(i, j)] -= f * v;
            }
            for j in 0..x.cols {
                let v = x[(k, j)];
                x[(i, j)] -= f * v;
            }
        }
    }
    for k in (0..n).rev() {
        let pivot = lu[(k, k)];
        for j in 0..x.cols {
            let mut acc = x[(k, j)];
            for m in k + 1..n {
                acc -= lu[(k, m)] * x[(m, j)];
            }
            x[(k, j)] = acc / pivot;
        }
    }
    Ok(x)
}

pub fn inverse(a: &CMatrix) -> Result<CMatrix> {
    a.require_square("matrix to invert")?;
    solve(a, &CMatrix::identity(a.rows))
}

// Degree-13 Padé coefficients and the matching scaling threshold.
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

/// Matrix exponential by scaling and squaring with a degree-13 Padé
/// approximant.
pub fn expm(a: &CMatrix) -> Result<CMatrix> {
    a.require_square("matrix exponent")?;
    let n = a.rows;
    if a.data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    let norm = a.norm_one();
    let squarings = if norm > THETA13 { (norm / THETA13).log2().ceil() as i32 } else { 0 };
    let a = a.scale_real(0.5f64.powi(squarings));

    let id = CMatrix::identity(n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let b = &PADE13;

    let lincomb = |terms: &[(f64, &CMatrix)]| {
        let mut out = CMatrix::zeros(n, n);
        for &(coef, m) in terms {
            for (o, v) in out.data.iter_mut().zip(&m.data) {
                *o += v * coef;
            }
        }
        out
    };

    let u_inner = &a6 * &lincomb(&[(b[13], &a6), (b[11], &a4), (b[9], &a2)]);
    let u_poly = u_inner + lincomb(&[(b[7], &a6), (b[5], &a4), (b[3], &a2), (b[1], &id)]);
    let u = &a * &u_poly;
    let v_inner = &a6 * &lincomb(&[(b[12], &a6), (b[10], &a4), (b[8], &a2)]);
    let v = v_inner + lincomb(&[(b[6], &a6), (b[4], &a4), (b[2], &a2), (b[0], &id)]);

    let mut r = solve(&(&v - &u), &(&v + &u))?;
    for _ in 0..squarings {
        r = &r * &r;
    }
    Ok(r)
}

/// Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.
///
/// Eigenvalues are returned in ascending order; column `k` of the returned
/// matrix is the eigenvector for eigenvalue `k`.
pub fn hermitian_eig(a: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    hermitian_eig_tol(a, STRUCTURAL_TOL)
}

pub fn hermitian_eig_tol(a: &CMatrix, herm_tol: f64) -> Result<(Vec<f64>, CMatrix)> {
    a.require_square("Hermitian eigenproblem input")?;
    let scale = a.max_abs().max(1.0);
    let residual = a.hermiticity_residual();
    if residual > herm_tol * scale {
        return Err(Error::NotHermitian { residual });
    }
    let n = a.rows;
    let mut m = a.hermitian_part();
    for i in 0..n {
        m[(i, i)] = C64::new(m[(i, i)].re, 0.0);
    }
    let mut v = CMatrix::identity(n);

    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)].norm_sqr())
            .sum();
        let diag: f64 = (0..n).map(|i| m[(i, i)].re * m[(i, i)].re).sum();
        if off <= f64::EPSILON * f64::EPSILON * diag.max(f64::MIN_POSITIVE) || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                let mag = apq.norm();
                if mag == 0.0 {
                    continue;
                }
                let phase = apq / mag;
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                let tau = (aqq - app) / (2.0 * mag);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = t * cs;
                // Rotation G acting on columns p and q:
                // G_pp = c, G_pq = s, G_qp = -s e^{-iφ}, G_qq = c e^{-iφ}.
                let gpp = C64::new(cs, 0.0);
                let gpq = C64::new(sn, 0.0);
                let gqp = -phase.conj() * sn;
                let gqq = phase.conj() * cs;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = mkp * gpp + mkq * gqp;
                    m[(k, q)] = mkp * gpq + mkq * gqq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = gpp.conj() * mpk + gqp.conj() * mqk;
                    m[(q, k)] = gpq.conj() * mpk + gqq.conj() * mqk;
                }
                m[(p, q)] = C64::new(0.0, 0.0);
                m[(q, p)] = C64::new(0.0, 0.0);
                m[(p, p)] = C64::new(m[(p, p)].re, 0.0);
                m[(q, q)] = C64::new(m[(q, q)].re, 0.0);
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * gpp + vkq * gqp;
                    v[(k, q)] = vkp * gpq + vkq * gqq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].re.total_cmp(&m[(j, j)].re));
    let values = order.iter().map(|&i| m[(i, i)].re).collect();
    let vectors = CMatrix::from_fn(n, n, |r, k| v[(r, order[k])]);
    Ok((values, vectors))
}

pub fn min_eigenvalue(a: &CMatrix) -> Result<f64> {
    let (w, _) = hermitian_eig(a)?;
    Ok(w.first().copied().unwrap_or(0.0))
}

/// Trace norm `Tr sqrt(A†A)`, the sum of singular values.
///
/// Hermitian inputs use their eigenvalues directly. Other inputs go through
/// the Hermitian dilation `[[0, A], [A†, 0]]`, whose eigenvalues are `±σ_k`,
/// which keeps small singular values accurate.
pub fn trace_norm(a: &CMatrix) -> Result<f64> {
    a.require_square("trace-norm input")?;
    let n = a.rows;
    let scale = a.max_abs();
    if scale == 0.0 {
        return Ok(0.0);
    }
    if a.hermiticity_residual() <= 1e-14 * scale {
        let (w, _) = hermitian_eig_tol(a, f64::INFINITY)?;
        return Ok(w.iter().map(|x| x.abs()).sum());
    }
    let dil = CMatrix::from_fn(2 * n, 2 * n, |i, j| match (i < n, j < n) {
        (true, false) => a[(i, j - n)],
        (false, true) => a[(j, i - n)].conj(),
        _ => C64::new(0.0, 0.0),
    });
    let (w, _) = hermitian_eig_tol(&dil, f64::INFINITY)?;
    Ok(w.iter().map(|x| x.abs()).sum::<f64>() / 2.0)
}

/// Which tensor factor a partial trace removes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subsystem {
    First,
    Second,
}

/// Partial trace of a matrix indexed by pairs `⟨m1 m2⟩ = m1·n2 + m2`.
///
/// `dims = (n1, n2)` are the index ranges of the two factors (for a process
/// matrix of two qudits these are `d1²` and `d2²`). Tracing out
/// [`Subsystem::Second`] gives `Σ_{m2} A_{⟨m1 m2⟩⟨n1 m2⟩}`.
pub fn partial_trace(a: &CMatrix, traced: Subsystem, dims: (usize, usize)) -> Result<CMatrix> {
    let (n1, n2) = dims;
    if a.rows != n1 * n2 || a.cols != n1 * n2 {
        return Err(Error::DimensionMismatch {
            expected: format!("{0}x{0} matrix for factor sizes ({n1}, {n2})", n1 * n2),
            found: format!("{}x{}", a.rows, a.cols),
        });
    }
    Ok(match traced {
        Subsystem::Second => CMatrix::from_fn(n1, n1, |m1, k1| {
            (0..n2).map(|m2| a[(m1 * n2 + m2, k1 * n2 + m2)]).sum()
        }),
        Subsystem::First => CMatrix::from_fn(n2, n2, |m2, k2| {
            (0..n1).map(|m1| a[(m1 * n2 + m2, m1 * n2 + k2)]).sum()
        }),
    })
}

/// Single-qubit Pauli matrices `[I, X, Y, Z]`.
pub fn paulis() -> [CMatrix; 4] {
    let o = C64::new(0.0, 0.0);
    let l = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    [
        CMatrix::from_rows(&[&[l, o], &[o, l]]),
        CMatrix::from_rows(&[&[o, l], &[l, o]]),
        CMatrix::from_rows(&[&[o, -i], &[i, o]]),
        CMatrix::from_rows(&[&[l, o], &[o, -l]]),
    ]
}
