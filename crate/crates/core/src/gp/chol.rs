//! Dense Cholesky factorization for symmetric positive-definite matrices,
//! with bounded diagonal jitter on failure.
//!
//! Matrices are row-major `n × n` slices; only the lower triangle is read.

use crate::error::{Error, Result};

const JITTER_RETRIES: usize = 3;
const JITTER_REL: f64 = 1e-10;

/// Lower-triangular factor `L` with `A + jitter·I = L·Lᵀ`.
#[derive(Clone, Debug)]
pub struct Cholesky {
    n: usize,
    l: Vec<f64>,
    jitter: f64,
}

impl Cholesky {
    /// Factorizes `a`, escalating jitter `1e-10·trace/n` by ×10 up to three
    /// times when a pivot is not positive.
    pub fn factor(a: &[f64], n: usize) -> Result<Self> {
        debug_assert_eq!(a.len(), n * n);
        let mut l = vec![0.0; n * n];
        if let Ok(()) = factor_into(a, n, 0.0, &mut l) {
            return Ok(Self { n, l, jitter: 0.0 });
        }
        let trace: f64 = (0..n).map(|i| a[i * n + i]).sum();
        let mut jitter = JITTER_REL * (trace / n as f64).abs().max(f64::MIN_POSITIVE);
        let mut last_pivot = f64::NAN;
        for attempt in 0..JITTER_RETRIES {
            if attempt > 0 {
                jitter *= 10.0;
            }
            match factor_into(a, n, jitter, &mut l) {
                Ok(()) => return Ok(Self { n, l, jitter }),
                Err(p) => last_pivot = p,
            }
        }
        let diag = (0..n).map(|i| a[i * n + i]);
        Err(Error::Numerical {
            jitter,
            min_diag: diag.clone().fold(f64::INFINITY, f64::min),
            max_diag: diag.fold(f64::NEG_INFINITY, f64::max),
            pivot: last_pivot,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    #[inline]
    fn row(&self, i: usize) -> &[f64] {
        &self.l[i * self.n..i * self.n + i + 1]
    }

    /// `log det(A) = 2 Σ log L_ii`.
    pub fn log_det(&self) -> f64 {
        2.0 * (0..self.n).map(|i| self.l[i * self.n + i].ln()).sum::<f64>()
    }

    /// Solves `L y = b` in place.
    pub fn solve_lower_in_place(&self, b: &mut [f64]) {
        for i in 0..self.n {
            let row = self.row(i);
            let s = dot(&row[..i], &b[..i]);
            b[i] = (b[i] - s) / row[i];
        }
    }

    /// Solves `Lᵀ x = y` in place.
    pub fn solve_upper_in_place(&self, y: &mut [f64]) {
        for j in (0..self.n).rev() {
            let row = self.row(j);
            y[j] /= row[j];
            let xj = y[j];
            for (yi, lji) in y[..j].iter_mut().zip(&row[..j]) {
                *yi -= lji * xj;
            }
        }
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_lower_in_place(&mut x);
        self.solve_upper_in_place(&mut x);
        x
    }

    /// Full symmetric inverse `A⁻¹`, row-major.
    pub fn inverse(&self) -> Vec<f64> {
        let n = self.n;
        // Rows of L⁻¹ (lower triangular), built by forward substitution.
        let mut linv = vec![0.0; n * n];
        for i in 0..n {
            let lii = self.l[i * n + i];
            let (done, rest) = linv.split_at_mut(i * n);
            let row_i = &mut rest[..n];
            for k in 0..i {
                let lik = self.l[i * n + k];
                if lik != 0.0 {
                    let row_k = &done[k * n..k * n + k + 1];
                    for (dst, src) in row_i[..=k].iter_mut().zip(row_k) {
                        *dst -= lik * src;
                    }
                }
            }
            row_i[i] += 1.0;
            for v in row_i[..=i].iter_mut() {
                *v /= lii;
            }
        }
        // Rows of U = L⁻ᵀ are the columns of L⁻¹; row i is nonzero from i on.
        // Then A⁻¹[i][j] = Σ_k U[i][k]·U[j][k] over k ≥ max(i, j).
        let mut u = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                u[j * n + i] = linv[i * n + j];
            }
        }
        let mut inv = vec![0.0; n * n];
        for i in 0..n {
            let ui = &u[i * n + i..(i + 1) * n];
            for j in 0..=i {
                let v = dot(ui, &u[j * n + i..(j + 1) * n]);
                inv[i * n + j] = v;
                inv[j * n + i] = v;
            }
        }
        inv
    }
}

fn factor_into(a: &[f64], n: usize, jitter: f64, l: &mut [f64]) -> std::result::Result<(), f64> {
    for i in 0..n {
        let (done, rest) = l.split_at_mut(i * n);
        let row_i = &mut rest[..n];
        for j in 0..=i {
            let mut s = a[i * n + j];
            if i == j {
                s += jitter;
                s -= dot(&row_i[..j], &row_i[..j]);
                if !(s > 0.0 && s.is_finite()) {
                    return Err(s);
                }
                row_i[j] = s.sqrt();
            } else {
                let row_j = &done[j * n..j * n + j + 1];
                s -= dot(&row_i[..j], &row_j[..j]);
                row_i[j] = s / row_j[j];
            }
        }
        row_i[i + 1..].iter_mut().for_each(|v| *v = 0.0);
    }
    Ok(())
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    // Independent accumulators let the compiler vectorize without reassociation.
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [0.0; 8];
    let ca = a.chunks_exact(8);
    let cb = b.chunks_exact(8);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for k in 0..8 {
            acc[k] += x[k] * y[k];
        }
    }
    let mut s = ((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7]));
    for (x, y) in ra.iter().zip(rb) {
        s += x * y;
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spd(n: usize) -> Vec<f64> {
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                a[i * n + j] = 1.0 / (1.0 + (i as f64 - j as f64).abs());
            }
            a[i * n + i] += 1.0;
        }
        a
    }

    #[test]
    fn solve_and_inverse_agree() {
        let n = 7;
        let a = spd(n);
        let c = Cholesky::factor(&a, n).unwrap();
        assert_eq!(c.jitter(), 0.0);
        let inv = c.inverse();
        for i in 0..n {
            for j in 0..n {
                let v: f64 = (0..n).map(|k| a[i * n + k] * inv[k * n + j]).sum();
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((v - e).abs() < 1e-12);
            }
        }
        let b: Vec<f64> = (0..n).map(|i| i as f64 - 2.0).collect();
        let x = c.solve(&b);
        for i in 0..n {
            let v: f64 = (0..n).map(|k| a[i * n + k] * x[k]).sum();
            assert!((v - b[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn singular_matrix_recovers_with_jitter() {
        // Rank one: all ones.
        let n = 4;
        let a = vec![1.0; n * n];
        let c = Cholesky::factor(&a, n).unwrap();
        assert!(c.jitter() > 0.0);
    }

    #[test]
    fn indefinite_matrix_fails_with_diagnostic() {
        let a = vec![1.0, 0.0, 0.0, -1.0];
        match Cholesky::factor(&a, 2) {
            Err(Error::Numerical { jitter, .. }) => assert!(jitter > 0.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn log_det_of_diagonal() {
        let a = vec![2.0, 0.0, 0.0, 8.0];
        let c = Cholesky::factor(&a, 2).unwrap();
        assert!((c.log_det() - 16f64.ln()).abs() < 1e-14);
    }
}
