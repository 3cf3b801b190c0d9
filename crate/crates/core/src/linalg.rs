//! Dense complex kernels sized for K- and N-dimensional beamformers.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::math::sqrt;
use crate::{Error, Result};

/// `a^H b`.
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm_sqr(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum()
}

pub fn norm(a: &[Complex64]) -> f64 {
    sqrt(norm_sqr(a))
}

/// Scales `a` to unit Euclidean norm. Fails on the zero vector.
pub fn normalize(a: &mut [Complex64]) -> Result<()> {
    let n = norm(a);
    if !(n > 0.0) || !n.is_finite() {
        return Err(Error::DegenerateChannel("cannot normalize a zero vector"));
    }
    let inv = 1.0 / n;
    a.iter_mut().for_each(|x| *x *= inv);
    Ok(())
}

/// Rotates `a` by a global phase so its first nonzero entry is real positive.
pub fn fix_global_phase(a: &mut [Complex64]) {
    let scale = a.iter().map(|x| x.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return;
    }
    if let Some(pivot) = a.iter().find(|x| x.norm() > 1e-12 * scale) {
        let rot = pivot.conj() / pivot.norm();
        a.iter_mut().for_each(|x| *x *= rot);
    }
}

/// Solves `(c g g^H + sigma2 I) x = rhs` in `O(len)` via Sherman-Morrison.
pub fn solve_rank_one_regularized(
    g: &[Complex64],
    c: f64,
    sigma2: f64,
    rhs: &[Complex64],
) -> Vec<Complex64> {
    debug_assert_eq!(g.len(), rhs.len());
    debug_assert!(sigma2 > 0.0);
    let coupling = c * inner(g, rhs) / (sigma2 + c * norm_sqr(g));
    g.iter()
        .zip(rhs)
        .map(|(gi, ri)| (ri - gi * coupling) / sigma2)
        .collect()
}

/// Row-major square complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    pub fn scaled_identity(n: usize, s: f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(s, 0.0);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// `self += c a a^H`.
    pub fn add_outer(&mut self, c: f64, a: &[Complex64]) {
        assert_eq!(a.len(), self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                self.data[i * self.n + j] += a[i] * a[j].conj() * c;
            }
        }
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.n);
        self.data
            .chunks_exact(self.n)
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `Re(x^H M x)`.
    pub fn quad_form(&self, x: &[Complex64]) -> f64 {
        inner(x, &self.mul_vec(x)).re
    }

    /// Gaussian elimination with partial pivoting.
    pub fn solve(&self, rhs: &[Complex64]) -> Result<Vec<Complex64>> {
        let n = self.n;
        if rhs.len() != n {
            return Err(Error::DimensionMismatch {
                what: "right-hand side",
                expected: n,
                found: rhs.len(),
            });
        }
        let mut a = self.data.clone();
        let mut b = rhs.to_vec();
        let scale = a.iter().map(|z| z.norm()).fold(0.0, f64::max);
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&i, &j| a[i * n + col].norm().total_cmp(&a[j * n + col].norm()))
                .unwrap_or(col);
            if !(a[pivot * n + col].norm() > 1e-14 * scale) {
                return Err(Error::SingularMatrix);
            }
            if pivot != col {
                for j in 0..n {
                    a.swap(pivot * n + j, col * n + j);
                }
                b.swap(pivot, col);
            }
            let diag = a[col * n + col];
            for row in col + 1..n {
                let f = a[row * n + col] / diag;
                if f == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in col..n {
                    let t = a[col * n + j];
                    a[row * n + j] -= f * t;
                }
                let t = b[col];
                b[row] -= f * t;
            }
        }
        for row in (0..n).rev() {
            let mut acc = b[row];
            for j in row + 1..n {
                acc -= a[row * n + j] * b[j];
            }
            b[row] = acc / a[row * n + row];
        }
        Ok(b)
    }
}

impl core::ops::Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.n + j]
    }
}

impl core::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.n + j]
    }
}

/// Dominant generalized eigenpair of `(numer, denom)` by power iteration on
/// `denom^{-1} numer`, with `denom` Hermitian positive definite.
///
/// Returns the generalized Rayleigh quotient and the unit-norm eigenvector
/// (global phase fixed by [`fix_global_phase`]). Independent of the
/// rank-one closed form in [`solve_rank_one_regularized`]; used to
/// cross-check it.
pub fn generalized_power_iteration(
    numer: &CMatrix,
    denom: &CMatrix,
    tol: f64,
    max_iter: usize,
) -> Result<(f64, Vec<Complex64>)> {
    let n = numer.dim();
    if denom.dim() != n {
        return Err(Error::DimensionMismatch {
            what: "generalized eigenproblem",
            expected: n,
            found: denom.dim(),
        });
    }
    // Deterministic start with no special alignment to any axis.
    let mut x: Vec<Complex64> = (0..n)
        .map(|i| Complex64::from_polar(1.0 + i as f64 / n as f64, 0.7 * i as f64 + 0.3))
        .collect();
    normalize(&mut x)?;
    let mut lambda = numer.quad_form(&x) / denom.quad_form(&x);
    for _ in 0..max_iter {
        let mut y = denom.solve(&numer.mul_vec(&x))?;
        if norm(&y) == 0.0 {
            return Err(Error::DegenerateChannel("start vector in the null space"));
        }
        normalize(&mut y)?;
        fix_global_phase(&mut y);
        let next = numer.quad_form(&y) / denom.quad_form(&y);
        let step = y
            .iter()
            .zip(&x)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>();
        x = y;
        let done = (next - lambda).abs() <= tol * next.abs().max(f64::MIN_POSITIVE)
            && sqrt(step) <= sqrt(tol);
        lambda = next;
        if done {
            break;
        }
    }
    Ok((lambda, x))
}
