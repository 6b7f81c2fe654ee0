//! Saddle-point structure of quadratic objectives under modified LSGD.
//!
//! For `f(x) = (c/2) xᵀBx` the modified LSGD update is linear,
//! `x ← (I − ηc A_{σ(k)}⁻¹B) x`, so everything is governed by the
//! eigenstructure of `A_σ⁻¹B`.
//!
//! # Index convention
//!
//! Coordinate patterns are stated with 1-based indices `l = 1..n` and last
//! coordinate `x_n`. In 0-based storage, `x_l` is entry `l − 1`, the partner
//! `x_{n−l}` is entry `n − 2 − (l − 1)`, and `x_n` is entry `n − 1`. The map
//! `R: i ↦ n − 2 − i (i < n − 1), n − 1 ↦ n − 1` is the reflection that
//! commutes with `A_σ` and with the canonical `B = diag(1, …, 1, −1)`:
//!
//! * `W = {x : x_l = −x_{n−l}, l = 1..n−1; x_n = 0}` (`Rx = −x`),
//! * `V = {x : x_l = x_{n−l}, l = 1..n−1}` (`Rx = x`).
//!
//! `W` has dimension `⌊(n−1)/2⌋`, `V` the remaining `n − ⌊(n−1)/2⌋`, and
//! `ℝⁿ = V ⊕ W` orthogonally.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    dot, eig_similar_nonsymmetric, norm, orthonormalize, sym_eigendecompose, DenseMatrix,
    EigenPair, Vector,
};
use crate::optimizers::{step_mlsgd, GradientSource, SigmaSchedule};
use crate::smoothing::{laplacian_dense, laplacian_eigenspaces};

/// Tolerance for symmetry-pattern and span-membership tests.
pub const PATTERN_TOL: f64 = 1e-8;

/// `f(x) = (c/2) xᵀBx` with symmetric `B`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticObjective {
    b: DenseMatrix,
    scale_c: f64,
}

impl QuadraticObjective {
    pub fn new(b: DenseMatrix, scale_c: f64) -> Result<Self> {
        if !b.is_square() {
            return Err(Error::domain("B must be square"));
        }
        if !b.is_symmetric(1e-12) {
            return Err(Error::domain("B must be symmetric"));
        }
        if !(scale_c > 0.0) || !scale_c.is_finite() {
            return Err(Error::domain(format!(
                "scale c must be positive, got {scale_c}"
            )));
        }
        Ok(QuadraticObjective { b, scale_c })
    }

    pub fn b(&self) -> &DenseMatrix {
        &self.b
    }

    pub fn scale_c(&self) -> f64 {
        self.scale_c
    }

    /// The Hessian `cB`.
    pub fn hessian(&self) -> DenseMatrix {
        self.b.scaled(self.scale_c)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let bx = self.b.matvec(x).expect("dimension checked by caller");
        0.5 * self.scale_c * dot(x, &bx)
    }

    /// `B = diag(1, …, 1, −1)` exactly.
    pub fn is_canonical(&self) -> bool {
        let n = self.b.rows();
        (0..n).all(|i| {
            (0..n).all(|j| {
                let expected = match (i == j, i == n - 1) {
                    (true, true) => -1.0,
                    (true, false) => 1.0,
                    _ => 0.0,
                };
                self.b.get(i, j) == expected
            })
        })
    }

    pub fn describe(&self) -> String {
        if self.is_canonical() {
            format!("canonical n={} c={}", self.b.rows(), self.scale_c)
        } else {
            let rows: Vec<String> = self
                .b
                .to_rows()
                .iter()
                .map(|r| {
                    format!(
                        "[{}]",
                        r.iter()
                            .map(|v| v.to_string())
                            .collect::<Vec<_>>()
                            .join(" ")
                    )
                })
                .collect();
            format!("B=[{}] c={}", rows.join(" "), self.scale_c)
        }
    }
}

impl GradientSource for QuadraticObjective {
    fn dim(&self) -> usize {
        self.b.rows()
    }

    fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        let n = self.b.rows();
        for (i, o) in out.iter_mut().enumerate().take(n) {
            *o = self.scale_c * dot(self.b.row(i), x);
        }
    }

    fn value(&self, x: &[f64]) -> Option<f64> {
        Some(self.eval(x))
    }
}

/// `f(x) = (c/2)(x₁² + … + x_{n−1}² − x_n²)`.
pub fn canonical_objective(n: usize, c: f64) -> Result<QuadraticObjective> {
    if n < 2 {
        return Err(Error::domain(format!(
            "canonical objective needs n >= 2, got {n}"
        )));
    }
    let mut diag = vec![1.0; n];
    diag[n - 1] = -1.0;
    QuadraticObjective::new(DenseMatrix::from_diag(&diag), c)
}

/// Orthonormal basis of a subspace of `ℝⁿ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubspaceBasis {
    pub vectors: Vec<Vector>,
    pub ambient: usize,
}

impl SubspaceBasis {
    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    /// Orthogonal projection of `x` onto the subspace.
    pub fn project(&self, x: &[f64]) -> Vector {
        let mut out = vec![0.0; self.ambient];
        for v in &self.vectors {
            let c = dot(v, x);
            out.iter_mut()
                .zip(v.iter())
                .for_each(|(o, vi)| *o += c * vi);
        }
        Vector::from_vec_unchecked(out)
    }

    /// Largest principal angle (radians) to `other`; `π/2` when the dimensions differ.
    pub fn max_principal_angle(&self, other: &SubspaceBasis) -> f64 {
        if self.dim() != other.dim() || self.ambient != other.ambient {
            return std::f64::consts::FRAC_PI_2;
        }
        let k = self.dim();
        if k == 0 {
            return 0.0;
        }
        // Columns of (I − QₒQₒᵀ)Q; its largest singular value is the sine of the largest angle.
        let residuals: Vec<Vector> = self
            .vectors
            .iter()
            .map(|v| v.sub(&other.project(v)))
            .collect();
        let mut gram = DenseMatrix::zeros(k, k);
        for i in 0..k {
            for j in 0..=i {
                let g = dot(&residuals[i], &residuals[j]);
                gram.set(i, j, g);
                gram.set(j, i, g);
            }
        }
        let largest = if gram.frobenius_norm() == 0.0 {
            0.0
        } else {
            sym_eigendecompose(&gram, 1e-14)
                .map(|p| p[0].value)
                .unwrap_or_else(|_| (0..k).map(|i| gram.get(i, i)).sum())
        };
        largest.max(0.0).sqrt().min(1.0).asin()
    }
}

/// How an eigenvector of `A_σ⁻¹B` sits relative to the reflection `R`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    /// Lies in `W`: `x_l = −x_{n−l}`, `x_n = 0`; a sine mode independent of `σ`.
    AntisymmetricSine,
    /// Lies in `V` with a positive eigenvalue.
    Symmetric,
    /// Lies in `V` with the (unique, for canonical `B`) negative eigenvalue.
    NegativeMode,
    /// Fits neither pattern (only possible for non-canonical `B`).
    Unstructured,
}

/// Eigenpairs of `A_σ⁻¹B` with their symmetry classification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenStructure {
    pub sigma: f64,
    pub pairs: Vec<EigenPair>,
    pub classes: Vec<Classification>,
    /// `B` has an eigenvalue that is zero within `1e-10 · ‖B‖`.
    pub degenerate: bool,
}

impl EigenStructure {
    pub fn count(&self, class: Classification) -> usize {
        self.classes.iter().filter(|c| **c == class).count()
    }

    pub fn negative_mode(&self) -> Option<&EigenPair> {
        self.classes
            .iter()
            .position(|c| *c == Classification::NegativeMode)
            .map(|i| &self.pairs[i])
    }

    /// Orthonormalized span of the antisymmetric eigenvectors.
    pub fn antisymmetric_span(&self) -> SubspaceBasis {
        let vs: Vec<Vector> = self
            .pairs
            .iter()
            .zip(&self.classes)
            .filter(|(_, c)| **c == Classification::AntisymmetricSine)
            .map(|(p, _)| p.vector.clone())
            .collect();
        SubspaceBasis {
            vectors: orthonormalize(&vs, PATTERN_TOL),
            ambient: self.pairs.first().map_or(0, |p| p.vector.dim()),
        }
    }
}

/// `max |x_l + x_{n−l}|` over `l = 1..n−1`, together with `|x_n|`.
pub fn antisymmetry_residual(p: &[f64]) -> f64 {
    let n = p.len();
    let pairs = (0..n - 1).map(|i| (p[i] + p[n - 2 - i]).abs());
    pairs.fold(p[n - 1].abs(), f64::max)
}

/// `max |x_l − x_{n−l}|` over `l = 1..n−1`.
pub fn symmetry_residual(p: &[f64]) -> f64 {
    let n = p.len();
    (0..n - 1)
        .map(|i| (p[i] - p[n - 2 - i]).abs())
        .fold(0.0, f64::max)
}

/// `Rx` for the index reflection described in the module docs.
fn reflect(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut out = vec![0.0; n];
    for i in 0..n - 1 {
        out[i] = x[n - 2 - i];
    }
    out[n - 1] = x[n - 1];
    out
}

/// Eigenpairs of `A_σ⁻¹(cB)` and their classification.
///
/// For canonical `B`, tied eigenvalues are resolved into a basis adapted to
/// `V ⊕ W` (the tied eigenspace is invariant under `R`), and any vector
/// matching neither pattern is a [`Error::Structural`] failure.
pub fn eigen_structure(q: &QuadraticObjective, sigma: f64) -> Result<EigenStructure> {
    let n = q.dim();
    let hessian = q.hessian();
    let b_norm = hessian.frobenius_norm();
    let b_pairs = sym_eigendecompose(&hessian, 1e-14)?;
    let degenerate = b_pairs.iter().any(|p| p.value.abs() <= 1e-10 * b_norm);

    let mut pairs = eig_similar_nonsymmetric(sigma, &hessian)?;
    let canonical = q.is_canonical();
    if canonical {
        adapt_tied_blocks(&mut pairs);
    }

    let classes = pairs
        .iter()
        .enumerate()
        .map(|(index, p)| {
            let anti = antisymmetry_residual(&p.vector);
            let sym = symmetry_residual(&p.vector);
            if anti <= PATTERN_TOL {
                Ok(Classification::AntisymmetricSine)
            } else if sym <= PATTERN_TOL {
                Ok(if p.value < 0.0 {
                    Classification::NegativeMode
                } else {
                    Classification::Symmetric
                })
            } else if canonical {
                Err(Error::Structural {
                    index,
                    antisymmetric: anti,
                    symmetric: sym,
                })
            } else {
                Ok(Classification::Unstructured)
            }
        })
        .collect::<Result<Vec<_>>>()?;

    debug_assert_eq!(pairs.len(), n);
    Ok(EigenStructure {
        sigma,
        pairs,
        classes,
        degenerate,
    })
}

/// Replaces each block of tied eigenvectors by an `R`-adapted basis of its span.
fn adapt_tied_blocks(pairs: &mut [EigenPair]) {
    let scale = pairs
        .iter()
        .map(|p| p.value.abs())
        .fold(0.0, f64::max)
        .max(1.0);
    let mut start = 0;
    while start < pairs.len() {
        let mut end = start + 1;
        while end < pairs.len() && (pairs[end - 1].value - pairs[end].value).abs() < 1e-9 * scale {
            end += 1;
        }
        if end - start > 1 {
            let mut w_parts = Vec::new();
            let mut v_parts = Vec::new();
            for p in &pairs[start..end] {
                let r = reflect(&p.vector);
                let anti: Vec<f64> = p
                    .vector
                    .iter()
                    .zip(&r)
                    .map(|(a, b)| 0.5 * (a - b))
                    .collect();
                let sym: Vec<f64> = p
                    .vector
                    .iter()
                    .zip(&r)
                    .map(|(a, b)| 0.5 * (a + b))
                    .collect();
                w_parts.push(Vector::from_vec_unchecked(anti));
                v_parts.push(Vector::from_vec_unchecked(sym));
            }
            let mut adapted = orthonormalize(&w_parts, 1e-6);
            adapted.extend(orthonormalize(&v_parts, 1e-6));
            if adapted.len() == end - start {
                for (p, v) in pairs[start..end].iter_mut().zip(adapted) {
                    p.vector = v.sign_normalized();
                }
            }
        }
        start = end;
    }
}

/// Bases of `W` (antisymmetric, the attraction subspace) and `V` (symmetric).
pub fn canonical_attraction_basis(n: usize) -> Result<(SubspaceBasis, SubspaceBasis)> {
    if n < 2 {
        return Err(Error::domain(format!(
            "attraction basis needs n >= 2, got {n}"
        )));
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut w = Vec::new();
    let mut v = Vec::new();
    // Pair 0-based i with n − 2 − i for i < n − 2 − i.
    for i in 0..n - 1 {
        let j = n - 2 - i;
        if i < j {
            let mut anti = vec![0.0; n];
            anti[i] = h;
            anti[j] = -h;
            w.push(Vector::from_vec_unchecked(anti));
            let mut sym = vec![0.0; n];
            sym[i] = h;
            sym[j] = h;
            v.push(Vector::from_vec_unchecked(sym));
        } else if i == j {
            v.push(Vector::unit(n, i));
        }
    }
    v.push(Vector::unit(n, n - 1));
    Ok((
        SubspaceBasis {
            vectors: w,
            ambient: n,
        },
        SubspaceBasis {
            vectors: v,
            ambient: n,
        },
    ))
}

/// Attraction subspace of modified LSGD for a general symmetric `B`: the span
/// of the positive-eigenvalue eigenvectors `p` of `B` with `Lp ∈ span{p}`.
///
/// Simple eigenvalues test the eigenvector directly. A repeated positive
/// eigenvalue has no preferred basis, so its eigenspace is intersected with
/// every eigenspace of `L` instead.
pub fn general_attraction_basis(q: &QuadraticObjective, tol: f64) -> Result<SubspaceBasis> {
    let n = q.dim();
    if n < 2 {
        return Err(Error::domain("attraction analysis needs n >= 2"));
    }
    let hessian = q.hessian();
    let scale = hessian.frobenius_norm();
    let pairs = sym_eigendecompose(&hessian, 1e-14)?;
    if let Some(p) = pairs.iter().find(|p| p.value.abs() <= tol * scale) {
        return Err(Error::DegenerateHessian {
            eigenvalue: p.value,
        });
    }
    let positive: Vec<&EigenPair> = pairs.iter().filter(|p| p.value > 0.0).collect();
    if positive.is_empty() || positive.len() == n {
        return Err(Error::domain(
            "B needs at least one positive and one negative eigenvalue for a saddle",
        ));
    }

    let l = laplacian_dense(n)?;
    let spaces = laplacian_eigenspaces(n)?;
    let mut found = Vec::new();
    let mut start = 0;
    while start < positive.len() {
        let mut end = start + 1;
        while end < positive.len()
            && (positive[end - 1].value - positive[end].value).abs() < 1e-9 * scale
        {
            end += 1;
        }
        if end - start == 1 {
            let p = &positive[start].vector;
            let lp = l.matvec(p)?;
            let rayleigh = dot(p, &lp);
            if norm(&lp.sub(&p.scaled(rayleigh))) <= tol {
                found.push(p.clone());
            }
        } else {
            let block: Vec<Vector> = positive[start..end]
                .iter()
                .map(|p| p.vector.clone())
                .collect();
            for (_, basis) in &spaces {
                found.extend(intersect(&block, basis, tol)?);
            }
        }
        start = end;
    }
    Ok(SubspaceBasis {
        vectors: orthonormalize(&found, tol)
            .into_iter()
            .map(Vector::sign_normalized)
            .collect(),
        ambient: n,
    })
}

/// Orthonormal basis of `span(u) ∩ span(e)` for orthonormal sets `u`, `e`.
///
/// With `Q` the matrix of `u`, the intersection is spanned by `Qy` for the
/// eigenvectors `y` of `Qᵀ P_e Q` with eigenvalue 1.
fn intersect(u: &[Vector], e: &[Vector], tol: f64) -> Result<Vec<Vector>> {
    let k = u.len();
    let ambient = u[0].dim();
    let projected: Vec<Vector> = u
        .iter()
        .map(|ui| {
            SubspaceBasis {
                vectors: e.to_vec(),
                ambient,
            }
            .project(ui)
        })
        .collect();
    let mut m = DenseMatrix::zeros(k, k);
    for i in 0..k {
        for j in 0..=i {
            let v = 0.5 * (dot(&u[i], &projected[j]) + dot(&u[j], &projected[i]));
            m.set(i, j, v);
            m.set(j, i, v);
        }
    }
    if m.frobenius_norm() == 0.0 {
        return Ok(Vec::new());
    }
    let pairs = sym_eigendecompose(&m, 1e-14)?;
    Ok(pairs
        .into_iter()
        .filter(|p| p.value >= 1.0 - tol)
        .map(|p| {
            let mut v = vec![0.0; ambient];
            for (coef, ui) in p.vector.iter().zip(u) {
                v.iter_mut()
                    .zip(ui.iter())
                    .for_each(|(a, b)| *a += coef * b);
            }
            Vector::from_vec_unchecked(v)
        })
        .collect())
}

/// `ν(σ) = (σ + 1 + √(2σ+1)) / σ`, the slope parameter of the positive
/// eigenvector `[ν(σ), 1]` of `A_σ⁻¹ diag(1, −1)`.
pub fn nu_rotation(sigma: f64) -> Result<f64> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::domain(format!(
            "nu_rotation needs sigma > 0, got {sigma}"
        )));
    }
    Ok((sigma + 1.0 + (2.0 * sigma + 1.0).sqrt()) / sigma)
}

/// Inner product of the sign-normalized negative-mode eigenvectors at two `σ`.
pub fn pn_sign_property(q: &QuadraticObjective, sigma1: f64, sigma2: f64) -> Result<f64> {
    if !q.is_canonical() {
        return Err(Error::domain(
            "pn_sign_property needs the canonical objective",
        ));
    }
    let negative = |sigma: f64| -> Result<Vector> {
        let pairs = eig_similar_nonsymmetric(sigma, &q.hessian())?;
        let last = pairs.last().expect("n >= 2");
        if last.value >= 0.0 {
            return Err(Error::domain("no negative eigenvalue"));
        }
        Ok(last.vector.clone())
    };
    Ok(dot(&negative(sigma1)?, &negative(sigma2)?))
}

/// Runs modified LSGD from `p`, an eigenvector of `B` with eigenvalue zero,
/// and reports whether every iterate stays at `p` (within `1e-10`).
pub fn degenerate_check(
    q: &QuadraticObjective,
    p: &[f64],
    sched: &SigmaSchedule,
    steps: usize,
) -> Result<bool> {
    if p.len() != q.dim() {
        return Err(Error::domain("direction has wrong dimension"));
    }
    let hessian = q.hessian();
    let bp = hessian.matvec(p)?;
    if bp.norm() > 1e-10 * hessian.frobenius_norm() * norm(p) {
        return Err(Error::domain(
            "direction is not in the kernel of B (||Bp|| exceeds 1e-10 ||B|| ||p||)",
        ));
    }
    let tol = 1e-10 * norm(p).max(1.0);
    let mut x = Vector::new(p.to_vec())?;
    for k in 0..steps {
        x = step_mlsgd(q, &x, 0.1, sched, k)?;
        let drift = norm(&x.iter().zip(p).map(|(a, b)| a - b).collect::<Vec<_>>());
        if drift > tol {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn canonical_objective_examples() {
        let q = canonical_objective(2, 2.0).unwrap();
        let g = q.gradient(&[1.5, -0.5]);
        assert_eq!(g.as_slice(), &[3.0, 1.0]);
        assert_eq!(q.eval(&[1.0, 1.0]), 0.0);
        let q3 = canonical_objective(3, 1.0).unwrap();
        assert_abs_diff_eq!(q3.eval(&[1.0, 1.0, 1.0]), 0.5, epsilon = 1e-15);
        assert_eq!(q3.gradient(&[0.0; 3]).as_slice(), &[0.0; 3]);
        assert!(canonical_objective(1, 1.0).is_err());
        assert!(canonical_objective(3, 0.0).is_err());
        assert!(q3.is_canonical());
    }

    #[test]
    fn objective_rejects_asymmetric_b() {
        let b = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![0.0, -1.0]]).unwrap();
        assert!(QuadraticObjective::new(b, 1.0).is_err());
    }

    #[test]
    fn n2_positive_eigenvector_matches_nu() {
        let q = canonical_objective(2, 1.0).unwrap();
        for sigma in [0.1, 1.0, 4.0, 50.0] {
            let es = eigen_structure(&q, sigma).unwrap();
            let p = &es.pairs[0].vector;
            let nu = nu_rotation(sigma).unwrap();
            assert_abs_diff_eq!(p[0] / p[1], nu, epsilon = 1e-10 * nu);
            assert_eq!(es.classes[1], Classification::NegativeMode);
        }
    }

    #[test]
    fn n4_sigma1_antisymmetric_mode() {
        let q = canonical_objective(4, 1.0).unwrap();
        let es = eigen_structure(&q, 1.0).unwrap();
        assert_eq!(es.count(Classification::AntisymmetricSine), 1);
        assert_eq!(es.count(Classification::Symmetric), 2);
        assert_eq!(es.count(Classification::NegativeMode), 1);
        let i = es
            .classes
            .iter()
            .position(|c| *c == Classification::AntisymmetricSine)
            .unwrap();
        assert_abs_diff_eq!(es.pairs[i].value, 1.0 / 3.0, epsilon = 1e-12);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        for (a, b) in es.pairs[i].vector.iter().zip([h, 0.0, -h, 0.0]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-10);
        }
    }

    #[test]
    fn eigenvalue_bounds_for_a_few_sigmas() {
        for n in [3, 6, 9] {
            let q = canonical_objective(n, 1.0).unwrap();
            for sigma in [0.5, 1.0, 10.0] {
                let es = eigen_structure(&q, sigma).unwrap();
                let v: Vec<f64> = es.pairs.iter().map(|p| p.value).collect();
                assert!(v[0] <= 1.0 + 1e-12);
                assert!(v[n - 2] > 0.0);
                assert!(v[n - 1] < 0.0 && v[n - 1] >= -1.0 - 1e-12);
            }
        }
    }

    #[test]
    fn sigma_zero_ties_are_resolved_into_v_and_w() {
        let q = canonical_objective(5, 1.0).unwrap();
        let es = eigen_structure(&q, 0.0).unwrap();
        assert_eq!(es.count(Classification::AntisymmetricSine), 2);
        assert_eq!(es.count(Classification::NegativeMode), 1);
        let neg = es.negative_mode().unwrap().vector.as_slice();
        for (got, want) in neg.iter().zip([0.0, 0.0, 0.0, 0.0, 1.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn attraction_basis_dimensions() {
        let (w, v) = canonical_attraction_basis(2).unwrap();
        assert_eq!((w.dim(), v.dim()), (0, 2));
        let (w, _) = canonical_attraction_basis(5).unwrap();
        assert_eq!(w.dim(), 2);
        let (w, v) = canonical_attraction_basis(4).unwrap();
        assert_eq!((w.dim(), v.dim()), (1, 3));
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(w.vectors[0].as_slice(), &[h, 0.0, -h, 0.0]);
        assert!(canonical_attraction_basis(1).is_err());
    }

    #[test]
    fn general_basis_examples() {
        let swap = DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let w =
            general_attraction_basis(&QuadraticObjective::new(swap, 1.0).unwrap(), 1e-8).unwrap();
        assert_eq!(w.dim(), 1);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(w.vectors[0][0], h, epsilon = 1e-12);
        assert_abs_diff_eq!(w.vectors[0][1], h, epsilon = 1e-12);

        let w = general_attraction_basis(&canonical_objective(2, 1.0).unwrap(), 1e-8).unwrap();
        assert_eq!(w.dim(), 0);

        let ex2 = DenseMatrix::from_rows(&[vec![2.0, 6.0], vec![6.0, 4.0]]).unwrap();
        let w =
            general_attraction_basis(&QuadraticObjective::new(ex2, 1.0).unwrap(), 1e-8).unwrap();
        assert_eq!(w.dim(), 0);
    }

    #[test]
    fn general_basis_on_canonical_b_finds_w() {
        // Positive eigenspace of diag(1,…,1,−1) is repeated; the intersection
        // route must recover exactly the L-invariant directions inside it.
        for n in 3..9 {
            let q = canonical_objective(n, 1.0).unwrap();
            let got = general_attraction_basis(&q, 1e-8).unwrap();
            let (w, _) = canonical_attraction_basis(n).unwrap();
            assert_eq!(got.dim(), w.dim());
            assert!(got.max_principal_angle(&w) < 1e-8);
        }
    }

    #[test]
    fn general_basis_rejects_degenerate_and_definite() {
        let b = DenseMatrix::from_diag(&[1.0, 0.0, -1.0]);
        assert!(matches!(
            general_attraction_basis(&QuadraticObjective::new(b, 1.0).unwrap(), 1e-8),
            Err(Error::DegenerateHessian { .. })
        ));
        let b = DenseMatrix::from_diag(&[1.0, 2.0]);
        assert!(matches!(
            general_attraction_basis(&QuadraticObjective::new(b, 1.0).unwrap(), 1e-8),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn nu_examples() {
        assert_abs_diff_eq!(nu_rotation(4.0).unwrap(), 2.0, epsilon = 1e-15);
        assert!(nu_rotation(1e6).unwrap() - 1.0 < 3e-3);
        assert!(nu_rotation(0.5).unwrap() > nu_rotation(0.6).unwrap());
        assert!(nu_rotation(0.0).is_err());
        assert!(nu_rotation(-1.0).is_err());
    }

    #[test]
    fn negative_mode_overlap() {
        let q = canonical_objective(4, 1.0).unwrap();
        let es0 = eigen_structure(&q, 0.0).unwrap();
        assert_eq!(
            es0.negative_mode().unwrap().vector.as_slice(),
            &[0.0, 0.0, 0.0, 1.0]
        );
        let es1 = eigen_structure(&q, 1.0).unwrap();
        let pn = &es1.negative_mode().unwrap().vector;
        assert!(pn.iter().all(|v| *v > 0.0));
        assert!(pn_sign_property(&q, 0.0, 1.0).unwrap() > 1e-8);
        assert_abs_diff_eq!(
            pn_sign_property(&q, 2.0, 2.0).unwrap(),
            1.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn degenerate_examples() {
        let q = QuadraticObjective::new(DenseMatrix::from_diag(&[0.0, 1.0, -1.0]), 1.0).unwrap();
        for sched in [
            SigmaSchedule::GD,
            SigmaSchedule::RATIO,
            SigmaSchedule::Constant(3.0),
        ] {
            assert!(degenerate_check(&q, &[1.0, 0.0, 0.0], &sched, 50).unwrap());
        }
        assert!(degenerate_check(&q, &[0.0, 0.0, 0.0], &SigmaSchedule::RATIO, 10).unwrap());
        assert!(degenerate_check(&q, &[0.0, 1.0, 0.0], &SigmaSchedule::RATIO, 10).is_err());

        let q2 = QuadraticObjective::new(DenseMatrix::from_diag(&[0.0, -1.0]), 1.0).unwrap();
        assert!(degenerate_check(&q2, &[1.0, 0.0], &SigmaSchedule::RATIO, 100).unwrap());
        let es = eigen_structure(&q2, 1.0).unwrap();
        assert!(es.degenerate);
    }

    #[test]
    fn principal_angle_basics() {
        let (w, v) = canonical_attraction_basis(5).unwrap();
        assert!(w.max_principal_angle(&w) < 1e-12);
        assert_eq!(w.max_principal_angle(&v), std::f64::consts::FRAC_PI_2);
        let rotated = SubspaceBasis {
            vectors: vec![Vector::new(vec![1.0, 0.0]).unwrap()],
            ambient: 2,
        };
        let tilted = SubspaceBasis {
            vectors: vec![Vector::new(vec![0.6, 0.8]).unwrap()],
            ambient: 2,
        };
        assert_abs_diff_eq!(
            rotated.max_principal_angle(&tilted),
            0.8f64.asin(),
            epsilon = 1e-14
        );
    }
}
