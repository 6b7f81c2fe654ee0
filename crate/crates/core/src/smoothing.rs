//! The periodic Laplacian smoothing operator `A_σ = I − σL`.
//!
//! For `n ≥ 3`, `A_σ` has `1 + 2σ` on the diagonal, `−σ` on the first sub- and
//! super-diagonal and `−σ` in the two periodic corners. For `n = 2` the left
//! and right periodic neighbours coincide; the operator is taken to be
//! `[[1+σ, −σ], [−σ, 1+σ]]` (equivalently `L = [[−1, 1], [1, −1]]`).
//!
//! `A_σ` is circulant and symmetric positive definite with spectrum
//! `1 + σ(2 − 2cos(2πk/n)) ∈ [1, 1 + 4σ]`, so the inverse can be applied
//! either through the DFT or with a Thomas sweep plus a rank-one
//! (Sherman–Morrison) correction for the corners.

use std::cell::RefCell;
use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::linalg::{norm, DenseMatrix, Vector};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// `A_σ = I − σL` on `ℝⁿ` with periodic boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CirculantSmoother {
    n: usize,
    sigma: f64,
}

/// Eigenvalues of `A_σ` in DFT-mode order `k = 0..n−1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SmootherSpectrum {
    pub values: Vec<f64>,
}

impl SmootherSpectrum {
    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

impl CirculantSmoother {
    pub fn new(n: usize, sigma: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::domain(format!(
                "smoother dimension must be at least 2, got {n}"
            )));
        }
        if !(sigma >= 0.0) || !sigma.is_finite() {
            return Err(Error::domain(format!(
                "sigma must be finite and non-negative, got {sigma}"
            )));
        }
        let s = CirculantSmoother { n, sigma };
        // The Thomas sweep runs without pivoting; it relies on strict dominance.
        let (diag, off) = s.tridiagonal_coefficients();
        let neighbours = if n == 2 { 1.0 } else { 2.0 };
        if diag <= neighbours * off.abs() {
            return Err(Error::domain(format!(
                "sigma = {sigma} too large: tridiagonal part is not strictly diagonally dominant in floating point"
            )));
        }
        Ok(s)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Diagonal and off-diagonal entries of the tridiagonal part.
    fn tridiagonal_coefficients(&self) -> (f64, f64) {
        if self.n == 2 {
            (1.0 + self.sigma, -self.sigma)
        } else {
            (1.0 + 2.0 * self.sigma, -self.sigma)
        }
    }

    pub fn dense(&self) -> DenseMatrix {
        let n = self.n;
        let (diag, off) = self.tridiagonal_coefficients();
        let mut m = DenseMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, diag);
            if i + 1 < n {
                m.set(i, i + 1, off);
                m.set(i + 1, i, off);
            }
        }
        if n >= 3 {
            m.set(0, n - 1, off);
            m.set(n - 1, 0, off);
        }
        m
    }

    /// `A_σ x`.
    pub fn apply(&self, x: &[f64]) -> Result<Vector> {
        self.check_dim(x.len())?;
        let n = self.n;
        let s = self.sigma;
        let out = if n == 2 {
            vec![(1.0 + s) * x[0] - s * x[1], (1.0 + s) * x[1] - s * x[0]]
        } else {
            (0..n)
                .map(|i| {
                    let left = x[(i + n - 1) % n];
                    let right = x[(i + 1) % n];
                    (1.0 + 2.0 * s) * x[i] - s * (left + right)
                })
                .collect()
        };
        Ok(Vector::from_vec_unchecked(out))
    }

    pub fn spectrum(&self) -> SmootherSpectrum {
        let n = self.n;
        let values = if n == 2 {
            vec![1.0, 1.0 + 2.0 * self.sigma]
        } else {
            (0..n)
                .map(|k| 1.0 + self.sigma * laplacian_symbol(k, n))
                .collect()
        };
        SmootherSpectrum { values }
    }

    /// `A_σ⁻¹ y` through the DFT: `ifft(fft(y) / spectrum)`.
    ///
    /// `n = 2` has no separate periodic corner, so it is routed to the Thomas path.
    pub fn solve_dft(&self, y: &[f64]) -> Result<Vector> {
        self.check_dim(y.len())?;
        if self.n == 2 {
            return self.solve_thomas(y);
        }
        let spectrum = self.spectrum();
        Ok(self.spectral_apply(y, |k| 1.0 / spectrum.values[k]))
    }

    /// `A_σ^{-1/2} x` through the DFT with per-mode factor `value_k^{-1/2}`.
    pub fn inv_sqrt_apply(&self, x: &[f64]) -> Result<Vector> {
        self.check_dim(x.len())?;
        let spectrum = self.spectrum();
        Ok(self.spectral_apply(x, |k| spectrum.values[k].sqrt().recip()))
    }

    /// Dense `A_σ^{-1/2}`, assembled column by column.
    pub fn inv_sqrt_dense(&self) -> DenseMatrix {
        let columns: Vec<Vector> = (0..self.n)
            .map(|j| {
                self.inv_sqrt_apply(&Vector::unit(self.n, j))
                    .expect("unit vector has matching dimension")
            })
            .collect();
        DenseMatrix::from_columns(&columns)
    }

    /// Multiplies each DFT mode `k` of `y` by the real factor `multiplier(k)`.
    fn spectral_apply(&self, y: &[f64], multiplier: impl Fn(usize) -> f64) -> Vector {
        let n = self.n;
        let mut buf: Vec<Complex<f64>> = y.iter().map(|&v| Complex::new(v, 0.0)).collect();
        PLANNER.with(|planner| {
            let mut planner = planner.borrow_mut();
            let forward = planner.plan_fft_forward(n);
            let inverse = planner.plan_fft_inverse(n);
            forward.process(&mut buf);
            for (k, c) in buf.iter_mut().enumerate() {
                *c *= multiplier(k);
            }
            inverse.process(&mut buf);
        });
        let scale = 1.0 / n as f64;
        let imag = norm(&buf.iter().map(|c| c.im * scale).collect::<Vec<_>>());
        debug_assert!(
            imag <= 1e-10 * norm(y).max(f64::MIN_POSITIVE),
            "discarded imaginary part {imag:e} is not negligible"
        );
        Vector::from_vec_unchecked(buf.iter().map(|c| c.re * scale).collect())
    }

    /// `A_σ⁻¹ y` with a Thomas sweep and a Sherman–Morrison corner correction.
    pub fn solve_thomas(&self, y: &[f64]) -> Result<Vector> {
        self.check_dim(y.len())?;
        let mut out = y.to_vec();
        let mut work = Vec::new();
        self.solve_thomas_in_place(&mut out, &mut work);
        Ok(Vector::from_vec_unchecked(out))
    }

    /// Overwrites `rhs` with `A_σ⁻¹ rhs`. `work` is scratch space and is
    /// resized as needed, so callers in a loop can reuse one buffer.
    ///
    /// # Panics
    /// If `rhs.len() != n`.
    pub fn solve_thomas_in_place(&self, rhs: &mut [f64], work: &mut Vec<f64>) {
        let n = self.n;
        assert_eq!(rhs.len(), n, "right-hand side has wrong dimension");
        let s = self.sigma;
        if n == 2 {
            // Plain 2x2 tridiagonal system; no corners to correct.
            let d = 1.0 + s;
            let off = -s;
            let m = d - off * off / d;
            let x1 = (rhs[1] - off * rhs[0] / d) / m;
            let x0 = (rhs[0] - off * x1) / d;
            rhs[0] = x0;
            rhs[1] = x1;
            return;
        }

        // A = T + u vᵀ with u = [γ, 0, …, 0, α]ᵀ and v = [1, 0, …, 0, β/γ]ᵀ,
        // where α = A[n−1][0], β = A[0][n−1] and γ = −A[0][0].
        let b = 1.0 + 2.0 * s;
        let off = -s;
        let alpha = off;
        let beta = off;
        let gamma = -b;

        work.clear();
        work.resize(2 * n, 0.0);
        let (cprime, z) = work.split_at_mut(n);

        let diag = |i: usize| -> f64 {
            if i == 0 {
                b - gamma
            } else if i == n - 1 {
                b - alpha * beta / gamma
            } else {
                b
            }
        };

        // Forward elimination applied to both right-hand sides at once.
        z[0] = gamma;
        let mut denom = diag(0);
        cprime[0] = off / denom;
        rhs[0] /= denom;
        z[0] /= denom;
        for i in 1..n {
            denom = diag(i) - off * cprime[i - 1];
            cprime[i] = off / denom;
            let u_i = if i == n - 1 { alpha } else { 0.0 };
            rhs[i] = (rhs[i] - off * rhs[i - 1]) / denom;
            z[i] = (u_i - off * z[i - 1]) / denom;
        }
        for i in (0..n - 1).rev() {
            rhs[i] -= cprime[i] * rhs[i + 1];
            z[i] -= cprime[i] * z[i + 1];
        }

        let fact = (rhs[0] + beta * rhs[n - 1] / gamma) / (1.0 + z[0] + beta * z[n - 1] / gamma);
        for (x, zi) in rhs.iter_mut().zip(z.iter()) {
            *x -= fact * zi;
        }
    }

    fn check_dim(&self, len: usize) -> Result<()> {
        if len != self.n {
            return Err(Error::domain(format!(
                "dimension mismatch: smoother has n = {}, vector has {len} entries",
                self.n
            )));
        }
        Ok(())
    }
}

/// Eigenvalue of `−L` for DFT mode `k`: `2 − 2cos(2πk/n)`.
fn laplacian_symbol(k: usize, n: usize) -> f64 {
    2.0 - 2.0 * (2.0 * PI * k as f64 / n as f64).cos()
}

/// Dense periodic Laplacian `L` (`n = 2`: `[[−1, 1], [1, −1]]`).
pub fn laplacian_dense(n: usize) -> Result<DenseMatrix> {
    let a = CirculantSmoother::new(n, 1.0)?.dense();
    let mut l = DenseMatrix::identity(n);
    for i in 0..n {
        for j in 0..n {
            l.set(i, j, l.get(i, j) - a.get(i, j));
        }
    }
    Ok(l)
}

/// Eigenspaces of the periodic Laplacian `L`, as `(eigenvalue, orthonormal basis)`.
///
/// Mode `k` and mode `n − k` share the eigenvalue `−(2 − 2cos(2πk/n))`; the real
/// basis of that eigenspace is spanned by the cosine and sine vectors of mode `k`.
pub fn laplacian_eigenspaces(n: usize) -> Result<Vec<(f64, Vec<Vector>)>> {
    if n < 2 {
        return Err(Error::domain("Laplacian needs n >= 2"));
    }
    if n == 2 {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        return Ok(vec![
            (0.0, vec![Vector::from_vec_unchecked(vec![h, h])]),
            (-2.0, vec![Vector::from_vec_unchecked(vec![h, -h])]),
        ]);
    }
    let spaces = (0..=n / 2)
        .map(|k| {
            let angle = |j: usize| 2.0 * PI * (k * j % n) as f64 / n as f64;
            let cos = Vector::from_vec_unchecked((0..n).map(|j| angle(j).cos()).collect());
            let mut basis = vec![cos.normalized().expect("cosine mode is nonzero")];
            if k != 0 && 2 * k != n {
                let sin = Vector::from_vec_unchecked((0..n).map(|j| angle(j).sin()).collect());
                basis.push(sin.normalized().expect("sine mode is nonzero"));
            }
            (-laplacian_symbol(k, n), basis)
        })
        .collect();
    Ok(spaces)
}
