//! Dense complex linear algebra: LU, Hessenberg reduction, Schur form via shifted QR,
//! triangular eigenvectors, Hessenberg and tridiagonal solves.
//!
//! Matrices are row-major. Sizes here are at most a few thousand, so everything is
//! unblocked and written for contiguous row access in the inner loops.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::C64;
use num_traits::Float;


const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

#[inline]
fn abs1(z: C64) -> f64 {
    z.re.abs() + z.im.abs()
}

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
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

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [C64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn add_to_diagonal(&mut self, shift: C64) {
        let n = self.rows.min(self.cols);
        for i in 0..n {
            self[(i, i)] += shift;
        }
    }

    pub fn scale(&mut self, factor: C64) {
        for v in &mut self.data {
            *v *= factor;
        }
    }

    /// Elementwise `self + other·factor`.
    pub fn axpy(&mut self, factor: C64, other: &CMatrix) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += factor * b;
        }
    }

    pub fn conj_transpose(&self) -> CMatrix {
        CMatrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `A^H x`.
    pub fn matvec_adjoint(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.rows);
        let mut out = vec![ZERO; self.cols];
        for (i, &xi) in x.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += a.conj() * xi;
            }
        }
        out
    }

    pub fn matmul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, other.rows);
        let mut out = CMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                let (orow, brow) = (i * out.cols, other.row(k));
                for (o, b) in out.data[orow..orow + other.cols].iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Power-iteration estimate of the spectral norm.
    pub fn norm2_estimate(&self, iterations: usize) -> f64 {
        let mut x: Vec<C64> = (0..self.cols)
            .map(|j| C64::new(1.0 + 0.1 * (j as f64).sin(), 0.05 * (j as f64 * 0.7).cos()))
            .collect();
        let mut sigma = 0.0;
        for _ in 0..iterations.max(1) {
            let nx = vec_norm(&x);
            if nx == 0.0 {
                return 0.0;
            }
            x.iter_mut().for_each(|v| *v /= nx);
            let y = self.matvec(&x);
            sigma = vec_norm(&y);
            x = self.matvec_adjoint(&y);
        }
        sigma
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

pub fn vec_norm(x: &[C64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `Σ conj(a_i) b_i`.
pub fn vdot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// LU factorization with partial pivoting, `P A = L U`.
#[derive(Debug, Clone)]
pub struct Lu {
    lu: CMatrix,
    perm: Vec<usize>,
}

impl Lu {
    pub fn factor(mut a: CMatrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::InvalidArgument(format!(
                "LU needs a square matrix, got {}×{}",
                a.rows, a.cols
            )));
        }
        let n = a.rows;
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (mut p, mut best) = (k, abs1(a[(k, k)]));
            for i in k + 1..n {
                let v = abs1(a[(i, k)]);
                if v > best {
                    p = i;
                    best = v;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(Error::Singular(format!("zero pivot in column {k}")));
            }
            if p != k {
                perm.swap(p, k);
                for j in 0..n {
                    a.data.swap(k * n + j, p * n + j);
                }
            }
            let pivot = a[(k, k)];
            let (top, bottom) = a.data.split_at_mut((k + 1) * n);
            let pivot_row = &top[k * n + k + 1..k * n + n];
            for i in 0..n - k - 1 {
                let row = &mut bottom[i * n..(i + 1) * n];
                let l = row[k] / pivot;
                row[k] = l;
                if l != ZERO {
                    for (x, u) in row[k + 1..].iter_mut().zip(pivot_row) {
                        *x -= l * u;
                    }
                }
            }
        }
        Ok(Self { lu: a, perm })
    }

    pub fn dim(&self) -> usize {
        self.lu.rows
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        let n = self.dim();
        let mut x: Vec<C64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = self.lu.row(i);
            let s: C64 = row[..i].iter().zip(&x[..i]).map(|(l, v)| l * v).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let row = self.lu.row(i);
            let s: C64 = row[i + 1..].iter().zip(&x[i + 1..]).map(|(u, v)| u * v).sum();
            x[i] = (x[i] - s) / row[i];
        }
        x
    }

    /// Solves `A^H x = b`.
    pub fn solve_adjoint(&self, b: &[C64]) -> Vec<C64> {
        let n = self.dim();
        let mut y = b.to_vec();
        for j in 0..n {
            let row = self.lu.row(j);
            y[j] /= row[j].conj();
            let yj = y[j];
            for (yi, u) in y[j + 1..].iter_mut().zip(&row[j + 1..]) {
                *yi -= u.conj() * yj;
            }
        }
        for j in (0..n).rev() {
            let row = self.lu.row(j);
            let yj = y[j];
            for (yi, l) in y[..j].iter_mut().zip(&row[..j]) {
                *yi -= l.conj() * yj;
            }
        }
        let mut x = vec![ZERO; n];
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = y[i];
        }
        x
    }

    /// Estimate of the smallest singular value, `1/‖A^{-1}‖₂`, by power iteration.
    pub fn min_singular_estimate(&self, iterations: usize) -> f64 {
        let n = self.dim();
        let mut x: Vec<C64> = (0..n)
            .map(|j| C64::new(1.0 + 0.3 * (j as f64 * 1.3).sin(), 0.2 * (j as f64 * 0.4).cos()))
            .collect();
        let mut inv_norm = 0.0;
        for _ in 0..iterations.max(1) {
            let nx = vec_norm(&x);
            x.iter_mut().for_each(|v| *v /= nx);
            let y = self.solve(&x);
            inv_norm = vec_norm(&y);
            x = self.solve_adjoint(&y);
        }
        if inv_norm > 0.0 && inv_norm.is_finite() {
            1.0 / inv_norm
        } else {
            0.0
        }
    }
}

/// Unitary Hessenberg reduction `A = Q H Q^H`.
#[derive(Debug, Clone)]
pub struct Hessenberg {
    pub h: CMatrix,
    pub q: CMatrix,
}

impl Hessenberg {
    pub fn reduce(mut a: CMatrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::InvalidArgument("Hessenberg reduction needs a square matrix".into()));
        }
        let n = a.rows;
        let mut q = CMatrix::identity(n);
        let mut v = vec![ZERO; n];
        let mut w = vec![ZERO; n];
        for k in 0..n.saturating_sub(2) {
            let m = n - k - 1;
            let norm_x = (k + 1..n).map(|i| a[(i, k)].norm_sqr()).sum::<f64>().sqrt();
            if norm_x == 0.0 {
                continue;
            }
            let x0 = a[(k + 1, k)];
            let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { ONE };
            let alpha = -phase * norm_x;
            for i in 0..m {
                v[i] = a[(k + 1 + i, k)];
            }
            v[0] -= alpha;
            let nv = vec_norm(&v[..m]);
            if nv == 0.0 {
                continue;
            }
            v[..m].iter_mut().for_each(|z| *z /= nv);

            // Left: rows k+1.., columns k..
            w[k..n].iter_mut().for_each(|z| *z = ZERO);
            for i in 0..m {
                let vi = v[i].conj();
                let row = a.row(k + 1 + i);
                for j in k..n {
                    w[j] += vi * row[j];
                }
            }
            for i in 0..m {
                let vi = v[i] * 2.0;
                let row = a.row_mut(k + 1 + i);
                for j in k..n {
                    row[j] -= vi * w[j];
                }
            }
            // Right: all rows, columns k+1..
            for r in 0..n {
                let row = &mut a.row_mut(r)[k + 1..];
                let s: C64 = row.iter().zip(&v[..m]).map(|(x, vi)| x * vi).sum::<C64>() * 2.0;
                for (x, vi) in row.iter_mut().zip(&v[..m]) {
                    *x -= s * vi.conj();
                }
            }
            for r in 0..n {
                let row = &mut q.row_mut(r)[k + 1..];
                let s: C64 = row.iter().zip(&v[..m]).map(|(x, vi)| x * vi).sum::<C64>() * 2.0;
                for (x, vi) in row.iter_mut().zip(&v[..m]) {
                    *x -= s * vi.conj();
                }
            }
            for i in k + 2..n {
                a[(i, k)] = ZERO;
            }
        }
        Ok(Self { h: a, q })
    }

    /// Solves `(H + shift·I) x = Q^H b` and returns `Q x`, i.e. `(A + shift·I)^{-1} b`.
    pub fn solve_shifted(&self, shift: C64, b: &[C64]) -> Result<Vec<C64>> {
        let rhs = self.q.matvec_adjoint(b);
        let x = hessenberg_solve(&self.h, shift, &rhs)?;
        Ok(self.q.matvec(&x))
    }
}

/// Solves `(H + shift·I) x = b` for upper Hessenberg `H` by Gaussian elimination with
/// adjacent-row pivoting, O(n²).
pub fn hessenberg_solve(h: &CMatrix, shift: C64, b: &[C64]) -> Result<Vec<C64>> {
    let n = h.rows;
    // Work on the upper-Hessenberg band only: row i holds columns i-1..n.
    let mut work: Vec<Vec<C64>> = (0..n)
        .map(|i| {
            let start = i.saturating_sub(1);
            let mut row = h.row(i)[start..].to_vec();
            row[i - start] += shift;
            row
        })
        .collect();
    let mut x = b.to_vec();
    // Row i stores column j at offset j - (i-1) for i ≥ 1, j at offset j for i = 0.
    let off = |i: usize, j: usize| j - i.saturating_sub(1);
    for k in 0..n {
        if k + 1 < n {
            let a_kk = work[k][off(k, k)];
            let a_k1k = work[k + 1][off(k + 1, k)];
            if abs1(a_k1k) > abs1(a_kk) {
                // Swap rows k and k+1 over columns k..n.
                for j in k..n {
                    let (ok, ok1) = (off(k, j), off(k + 1, j));
                    let t = work[k][ok];
                    work[k][ok] = work[k + 1][ok1];
                    work[k + 1][ok1] = t;
                }
                x.swap(k, k + 1);
            }
            let pivot = work[k][off(k, k)];
            if pivot == ZERO {
                return Err(Error::Singular(format!("Hessenberg pivot {k} vanished")));
            }
            let l = work[k + 1][off(k + 1, k)] / pivot;
            work[k + 1][off(k + 1, k)] = ZERO;
            if l != ZERO {
                for j in k + 1..n {
                    let u = work[k][off(k, j)];
                    work[k + 1][off(k + 1, j)] -= l * u;
                }
                let xk = x[k];
                x[k + 1] -= l * xk;
            }
        }
    }
    for i in (0..n).rev() {
        let mut s = x[i];
        for j in i + 1..n {
            s -= work[i][off(i, j)] * x[j];
        }
        let d = work[i][off(i, i)];
        if d == ZERO {
            return Err(Error::Singular(format!("Hessenberg diagonal {i} vanished")));
        }
        x[i] = s / d;
    }
    Ok(x)
}

/// Complex Schur form `A = Z T Z^H` computed from a Hessenberg reduction.
#[derive(Debug, Clone)]
pub struct Schur {
    pub t: CMatrix,
    pub z: CMatrix,
}

#[inline]
fn givens(a: C64, b: C64) -> (f64, C64) {
    let na = a.norm();
    let nb = b.norm();
    if nb == 0.0 {
        return (1.0, ZERO);
    }
    if na == 0.0 {
        return (0.0, ONE);
    }
    let norm = na.hypot(nb);
    (na / norm, (a / na) * b.conj() / norm)
}

impl Schur {
    pub fn from_hessenberg(hess: Hessenberg, max_sweeps: usize) -> Result<Self> {
        let Hessenberg { h: mut t, q } = hess;
        let n = t.rows;
        // Rows of zt are columns of Z.
        let mut zt = q.conj_transpose();
        zt.data.iter_mut().for_each(|v| *v = v.conj());
        let ulp = f64::EPSILON;
        let small = f64::MIN_POSITIVE * (n as f64) / ulp;
        let mut sweeps = 0usize;
        let mut hi = n as isize - 1;
        let mut iter_here = 0usize;
        while hi >= 0 {
            let hiu = hi as usize;
            let mut l = hiu;
            while l > 0 {
                let sub = abs1(t[(l, l - 1)]);
                let mut d = abs1(t[(l - 1, l - 1)]) + abs1(t[(l, l)]);
                if d == 0.0 {
                    d = (l.saturating_sub(1)..=hiu.min(n - 1))
                        .map(|i| abs1(t[(i, i)]))
                        .fold(0.0, f64::max);
                }
                if sub <= small.max(ulp * d) {
                    t[(l, l - 1)] = ZERO;
                    break;
                }
                l -= 1;
            }
            if l == hiu {
                hi -= 1;
                iter_here = 0;
                continue;
            }
            sweeps += 1;
            iter_here += 1;
            if sweeps > max_sweeps {
                return Err(Error::NoConvergence(format!(
                    "Schur QR exceeded {max_sweeps} sweeps with {} eigenvalues left",
                    hiu + 1
                )));
            }
            let mu = if iter_here % 11 == 10 {
                t[(hiu, hiu)] + C64::new(0.75 * abs1(t[(hiu, hiu - 1)]), 0.0)
            } else {
                wilkinson_shift(
                    t[(hiu - 1, hiu - 1)],
                    t[(hiu - 1, hiu)],
                    t[(hiu, hiu - 1)],
                    t[(hiu, hiu)],
                )
            };
            let mut x = t[(l, l)] - mu;
            let mut y = t[(l + 1, l)];
            for k in l..hiu {
                let (c, s) = givens(x, y);
                let col_start = if k > l { k - 1 } else { k };
                {
                    let (upper, lower) = t.data.split_at_mut((k + 1) * n);
                    let rk = &mut upper[k * n..];
                    let rk1 = &mut lower[..n];
                    for j in col_start..n {
                        let (h1, h2) = (rk[j], rk1[j]);
                        rk[j] = h1 * c + s * h2;
                        rk1[j] = -s.conj() * h1 + h2 * c;
                    }
                }
                if k > l {
                    t[(k + 1, k - 1)] = ZERO;
                }
                let last = (k + 2).min(hiu);
                for i in 0..=last {
                    let (h1, h2) = (t[(i, k)], t[(i, k + 1)]);
                    t[(i, k)] = h1 * c + h2 * s.conj();
                    t[(i, k + 1)] = -h1 * s + h2 * c;
                }
                {
                    let (upper, lower) = zt.data.split_at_mut((k + 1) * n);
                    let zk = &mut upper[k * n..];
                    let zk1 = &mut lower[..n];
                    for (a, b) in zk.iter_mut().zip(zk1.iter_mut()) {
                        let (z1, z2) = (*a, *b);
                        *a = z1 * c + z2 * s.conj();
                        *b = -z1 * s + z2 * c;
                    }
                }
                if k + 1 < hiu {
                    x = t[(k + 1, k)];
                    y = t[(k + 2, k)];
                }
            }
        }
        // Clean below the diagonal.
        for i in 1..n {
            for j in 0..i {
                t[(i, j)] = ZERO;
            }
        }
        let z = {
            let mut z = zt.conj_transpose();
            z.data.iter_mut().for_each(|v| *v = v.conj());
            z
        };
        Ok(Self { t, z })
    }

    pub fn eigenvalues(&self) -> Vec<C64> {
        (0..self.t.rows).map(|i| self.t[(i, i)]).collect()
    }

    /// Right eigenvectors (columns, unit 2-norm) by back substitution on `T`,
    /// transformed back with `Z`.
    pub fn eigenvectors(&self) -> CMatrix {
        let n = self.t.rows;
        let tnorm = self.t.frobenius_norm().max(f64::MIN_POSITIVE);
        let smallnum = f64::EPSILON * tnorm;
        // zt rows are Z columns for contiguous accumulation.
        let mut zt = self.z.conj_transpose();
        zt.data.iter_mut().for_each(|v| *v = v.conj());
        let mut vecs = CMatrix::zeros(n, n);
        let mut x = vec![ZERO; n];
        let mut acc = vec![ZERO; n];
        for k in 0..n {
            let lam = self.t[(k, k)];
            x[..=k].iter_mut().for_each(|v| *v = ZERO);
            x[k] = ONE;
            for i in (0..k).rev() {
                let row = self.t.row(i);
                let s: C64 = row[i + 1..=k].iter().zip(&x[i + 1..=k]).map(|(a, b)| a * b).sum();
                let mut d = row[i] - lam;
                if abs1(d) < smallnum {
                    d = C64::new(smallnum, 0.0);
                }
                x[i] = -s / d;
                if abs1(x[i]) > 1e150 {
                    let sc = 1.0 / abs1(x[i]);
                    x[i..=k].iter_mut().for_each(|v| *v *= sc);
                }
            }
            acc.iter_mut().for_each(|v| *v = ZERO);
            for j in 0..=k {
                let xj = x[j];
                if xj == ZERO {
                    continue;
                }
                for (a, z) in acc.iter_mut().zip(zt.row(j)) {
                    *a += xj * z;
                }
            }
            let nv = vec_norm(&acc);
            for i in 0..n {
                vecs[(i, k)] = acc[i] / nv;
            }
        }
        vecs
    }
}

fn wilkinson_shift(a: C64, b: C64, c: C64, d: C64) -> C64 {
    let tr_half = (a + d) * 0.5;
    let det = a * d - b * c;
    let disc = (tr_half * tr_half - det).sqrt();
    let l1 = tr_half + disc;
    let l2 = tr_half - disc;
    if (l1 - d).norm() < (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// Solves a tridiagonal system; `sub[i]` couples row i+1 to column i, `sup[i]` row i to
/// column i+1. No pivoting: callers pass diagonally dominant systems.
pub fn solve_tridiagonal(sub: &[C64], diag: &[C64], sup: &[C64], rhs: &[C64]) -> Result<Vec<C64>> {
    let n = diag.len();
    if sub.len() + 1 != n || sup.len() + 1 != n || rhs.len() != n {
        return Err(Error::InvalidArgument("tridiagonal dimension mismatch".into()));
    }
    let mut c = vec![ZERO; n];
    let mut d = vec![ZERO; n];
    let mut denom = diag[0];
    if denom == ZERO {
        return Err(Error::Singular("tridiagonal pivot 0".into()));
    }
    if n > 1 {
        c[0] = sup[0] / denom;
    }
    d[0] = rhs[0] / denom;
    for i in 1..n {
        denom = diag[i] - sub[i - 1] * c[i - 1];
        if denom == ZERO {
            return Err(Error::Singular(format!("tridiagonal pivot {i}")));
        }
        if i + 1 < n {
            c[i] = sup[i] / denom;
        }
        d[i] = (rhs[i] - sub[i - 1] * d[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        let next = d[i + 1];
        d[i] -= c[i] * next;
    }
    Ok(d)
}

/// Eigen-decomposition of a general complex matrix through Hessenberg + shifted QR.
pub fn eigen(a: CMatrix) -> Result<(Vec<C64>, CMatrix)> {
    let n = a.rows;
    let hess = Hessenberg::reduce(a)?;
    let schur = Schur::from_hessenberg(hess, 30 * n * n + 100)?;
    Ok((schur.eigenvalues(), schur.eigenvectors()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn test_matrix(n: usize, seed: u64) -> CMatrix {
        let mut s = seed;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        CMatrix::from_fn(n, n, |_, _| C64::new(next(), next()))
    }

    #[test]
    fn lu_solves_and_adjoint_solves() {
        let a = test_matrix(40, 7);
        let b: Vec<C64> = (0..40).map(|i| C64::new(i as f64, 1.0)).collect();
        let lu = Lu::factor(a.clone()).unwrap();
        let x = lu.solve(&b);
        let r = a.matvec(&x);
        assert!(r.iter().zip(&b).all(|(p, q)| (p - q).norm() < 1e-10));
        let y = lu.solve_adjoint(&b);
        let r = a.matvec_adjoint(&y);
        assert!(r.iter().zip(&b).all(|(p, q)| (p - q).norm() < 1e-10));
    }

    #[test]
    fn singular_matrix_is_reported() {
        let a = CMatrix::zeros(3, 3);
        assert!(matches!(Lu::factor(a), Err(Error::Singular(_))));
    }

    #[test]
    fn hessenberg_is_similarity() {
        let a = test_matrix(30, 3);
        let hs = Hessenberg::reduce(a.clone()).unwrap();
        for i in 2..30 {
            for j in 0..i - 1 {
                assert_eq!(hs.h[(i, j)], ZERO);
            }
        }
        let back = hs.q.matmul(&hs.h).matmul(&hs.q.conj_transpose());
        let mut diff = back.clone();
        diff.axpy(C64::new(-1.0, 0.0), &a);
        assert!(diff.max_abs() < 1e-12);
    }

    #[test]
    fn schur_eigenpairs_have_small_residual() {
        let a = test_matrix(60, 11);
        let (vals, vecs) = eigen(a.clone()).unwrap();
        for k in 0..60 {
            let v = vecs.column(k);
            let av = a.matvec(&v);
            let res: f64 = av
                .iter()
                .zip(&v)
                .map(|(p, q)| (p - vals[k] * q).norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!(res < 1e-11, "residual {res} for eigenvalue {k}");
        }
    }

    #[test]
    fn diagonal_spectrum_is_exact() {
        let d: Vec<C64> = (0..16).map(|i| C64::new(-(i as f64), (i as f64).sin())).collect();
        let (vals, _) = eigen(CMatrix::from_diagonal(&d)).unwrap();
        for v in &d {
            assert!(vals.iter().any(|w| (w - v).norm() < 1e-14));
        }
    }

    #[test]
    fn shifted_hessenberg_solve_matches_lu() {
        let a = test_matrix(25, 5);
        let hs = Hessenberg::reduce(a.clone()).unwrap();
        let shift = C64::new(0.3, -1.2);
        let b: Vec<C64> = (0..25).map(|i| C64::new((i as f64).cos(), 0.5)).collect();
        let x = hs.solve_shifted(shift, &b).unwrap();
        let mut shifted = a;
        shifted.add_to_diagonal(shift);
        let y = Lu::factor(shifted).unwrap().solve(&b);
        assert!(x.iter().zip(&y).all(|(p, q)| (p - q).norm() < 1e-11));
    }

    #[test]
    fn tridiagonal_matches_dense() {
        let n = 12;
        let sub: Vec<C64> = (0..n - 1).map(|i| C64::new(-1.0, 0.1 * i as f64)).collect();
        let sup: Vec<C64> = (0..n - 1).map(|_| C64::new(-1.0, 0.0)).collect();
        let diag: Vec<C64> = (0..n).map(|i| C64::new(4.0, i as f64)).collect();
        let rhs: Vec<C64> = (0..n).map(|i| C64::new(1.0, -(i as f64))).collect();
        let x = solve_tridiagonal(&sub, &diag, &sup, &rhs).unwrap();
        let dense = CMatrix::from_fn(n, n, |i, j| {
            if i == j {
                diag[i]
            } else if i == j + 1 {
                sub[j]
            } else if j == i + 1 {
                sup[i]
            } else {
                ZERO
            }
        });
        let r = dense.matvec(&x);
        assert!(r.iter().zip(&rhs).all(|(p, q)| (p - q).norm() < 1e-12));
    }

    #[test]
    fn min_singular_value_of_diagonal() {
        let d: Vec<C64> = (1..=10).map(|i| C64::new(i as f64, 0.0)).collect();
        let lu = Lu::factor(CMatrix::from_diagonal(&d)).unwrap();
        assert!((lu.min_singular_estimate(50) - 1.0).abs() < 1e-8);
    }
}
