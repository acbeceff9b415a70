//! Skew-symmetric block decomposition of `B = J - 2A` and normalized
//! eigenvalue spectra of tournament matrices.
//!
//! `B` is skew-symmetric, so `B = U L U^T` for an orthonormal `U` and a
//! block-diagonal `L` of 2x2 blocks `[[0, lambda_i n], [-lambda_i n, 0]]`
//! (plus a zero row/column when `n` is odd). Rotating each plane so that
//! its second basis vector is orthogonal to the all-ones vector `j`
//! defines the angles `alpha_i = arccos <v_{2i-1}, j/sqrt(n)>`, and the
//! trace identities
//!
//! ```text
//! 8 sigma3(A) = 1 - 3 sum lambda_i^2 cos^2 alpha_i
//! 16 sigma4(A) = 1 - 4 sum lambda_i^2 cos^2 alpha_i + 2 sum lambda_i^4
//! ```
//!
//! recover the trace densities from the profile alone.
//!
//! The block form is computed from the symmetric positive semidefinite
//! matrix `B^T B`: its eigenpairs give `lambda_i n` as singular values
//! and the 2-dimensional invariant planes, and symmetric eigensolvers
//! are far more robust than general complex ones.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::TournamentMatrix;

/// Blocks with `lambda_i * n < ZERO_LAMBDA * n` are reported as exact zeros.
const ZERO_LAMBDA: f64 = 1e-10;
/// A plane whose basis has inner products with `j` below this is left
/// unrotated with `alpha = pi/2`.
const J_COMPONENT_TOL: f64 = 1e-12;

/// One 2x2 block of the decomposition: the scaled block parameter
/// `lambda >= 0` and the angle `alpha` in `[0, pi/2]` between the
/// plane's first basis vector and the normalized all-ones vector.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ProfilePair {
    pub lambda: f64,
    pub alpha: f64,
}

/// The `(lambda_i, alpha_i)` profile of `B = J - 2A`, with an extra
/// angle for the unpaired basis vector when `n` is odd.
#[derive(Debug, Clone, Serialize)]
pub struct SpectralProfile {
    pub n: usize,
    pub pairs: Vec<ProfilePair>,
    pub alpha_extra: Option<f64>,
}

impl SpectralProfile {
    /// `sum cos^2 alpha_i` over all angles (including the odd extra);
    /// equals 1 by the orthonormal expansion of `j`.
    pub fn cos2_sum(&self) -> f64 {
        let mut s: f64 = self.pairs.iter().map(|p| p.alpha.cos().powi(2)).sum();
        if let Some(a) = self.alpha_extra {
            s += a.cos().powi(2);
        }
        s
    }

    pub fn sum_lambda2_cos2(&self) -> f64 {
        self.pairs
            .iter()
            .map(|p| p.lambda * p.lambda * p.alpha.cos().powi(2))
            .sum()
    }

    pub fn sum_lambda4(&self) -> f64 {
        self.pairs.iter().map(|p| p.lambda.powi(4)).sum()
    }
}

/// Trace density reconstructed from a profile via the block-form
/// identities; `ell` in {3, 4}.
pub fn reconstruct_sigma(profile: &SpectralProfile, ell: usize) -> Result<f64> {
    let s2 = profile.sum_lambda2_cos2();
    match ell {
        3 => Ok((1.0 - 3.0 * s2) / 8.0),
        4 => Ok((1.0 - 4.0 * s2 + 2.0 * profile.sum_lambda4()) / 16.0),
        _ => Err(Error::param(format!("sigma exponent {ell} not in {{3, 4}}"))),
    }
}

struct Plane {
    v1: DVector<f64>,
    v2: DVector<f64>,
    mu: f64,
}

fn orthogonalize(v: &mut DVector<f64>, basis: &[DVector<f64>]) {
    // Two Gram-Schmidt passes keep the basis orthonormal to ~1e-15.
    for _ in 0..2 {
        for b in basis {
            let c = v.dot(b);
            v.axpy(-c, b, 1.0);
        }
    }
}

/// Computes the `(lambda_i, alpha_i)` profile of `B = J - 2A`.
///
/// Planes are extracted greedily from the eigenvectors of `B^T B` in
/// descending eigenvalue order: a residual vector `q` is paired with
/// `Bq / |Bq|`, which spans a `B`-invariant plane; eigenvectors already
/// absorbed into a plane are skipped. Within each group of equal
/// `lambda` the component of `j` is concentrated into at most one
/// plane, and each plane is rotated so its second vector is orthogonal
/// to `j` and `cos alpha_i >= 0`.
pub fn skew_decompose(a: &TournamentMatrix) -> Result<SpectralProfile> {
    let n = a.n();
    let nf = n as f64;
    let mut b = DMatrix::from_fn(n, n, |i, j| 1.0 - 2.0 * a.get(i, j));
    // Exact skew-symmetry against input rounding.
    let bt = b.transpose();
    b = (&b - &bt) * 0.5;

    let mut s = b.transpose() * &b;
    let st = s.transpose();
    s = (&s + &st) * 0.5;

    let eig = s.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[y].partial_cmp(&eig.eigenvalues[x]).unwrap());

    let jhat = DVector::from_element(n, 1.0 / nf.sqrt());
    let zero_mu = ZERO_LAMBDA * nf;

    let mut used: Vec<DVector<f64>> = Vec::with_capacity(n);
    let mut planes: Vec<Plane> = Vec::new();
    let mut kernel: Vec<DVector<f64>> = Vec::new();

    for &idx in &order {
        let mut q = eig.eigenvectors.column(idx).into_owned();
        orthogonalize(&mut q, &used);
        let norm = q.norm();
        if norm < 0.5 {
            continue; // consumed as the partner of an earlier plane
        }
        q /= norm;
        let mut p = &b * &q;
        let cq = p.dot(&q);
        p.axpy(-cq, &q, 1.0);
        orthogonalize(&mut p, &used);
        let mu = p.norm();
        if mu < zero_mu {
            used.push(q.clone());
            kernel.push(q);
        } else {
            p /= mu;
            used.push(q.clone());
            used.push(p.clone());
            planes.push(Plane { v1: q, v2: p, mu });
        }
    }

    concentrate_j_in_equal_groups(&b, &jhat, &mut planes);

    // Rotate each plane so v2 is orthogonal to j and <v1, jhat> >= 0.
    let mut pairs = Vec::with_capacity(planes.len() + kernel.len() / 2);
    let mut columns: Vec<DVector<f64>> = Vec::with_capacity(n);
    let mut block_values: Vec<f64> = Vec::with_capacity(n / 2);
    for plane in &mut planes {
        let (cos_alpha, v1, v2) = rotate_to_j(&plane.v1, &plane.v2, &jhat);
        let lambda = plane.mu / nf;
        pairs.push(ProfilePair {
            lambda: if lambda < ZERO_LAMBDA { 0.0 } else { lambda },
            alpha: cos_alpha.clamp(0.0, 1.0).acos(),
        });
        block_values.push(v1.dot(&(&b * &v2)));
        columns.push(v1);
        columns.push(v2);
    }

    // Zero blocks: orthonormalize the kernel, concentrate the j
    // component into its first vector and pair the rest arbitrarily.
    let mut kernel_basis: Vec<DVector<f64>> = Vec::with_capacity(kernel.len());
    let jk = {
        let mut acc = DVector::zeros(n);
        for v in &kernel {
            acc.axpy(v.dot(&jhat), v, 1.0);
        }
        acc
    };
    if jk.norm() > J_COMPONENT_TOL {
        kernel_basis.push(&jk / jk.norm());
    }
    for v in kernel {
        let mut w = v;
        orthogonalize(&mut w, &kernel_basis);
        let norm = w.norm();
        if norm > 0.5 {
            kernel_basis.push(w / norm);
        }
    }
    let mut alpha_extra = None;
    let mut kit = kernel_basis.into_iter().peekable();
    while let Some(v1) = kit.next() {
        match kit.next() {
            Some(v2) => {
                let (cos_alpha, v1, v2) = rotate_to_j(&v1, &v2, &jhat);
                pairs.push(ProfilePair {
                    lambda: 0.0,
                    alpha: cos_alpha.clamp(0.0, 1.0).acos(),
                });
                block_values.push(0.0);
                columns.push(v1);
                columns.push(v2);
            }
            None => {
                alpha_extra = Some(v1.dot(&jhat).abs().clamp(0.0, 1.0).acos());
                columns.push(v1);
            }
        }
    }

    if columns.len() != n {
        return Err(Error::numerical(format!(
            "plane extraction produced {} basis vectors for order {n}",
            columns.len()
        )));
    }

    // Residual check of B = U L U^T with the measured block values.
    let mut u = DMatrix::zeros(n, n);
    for (c, col) in columns.iter().enumerate() {
        u.set_column(c, col);
    }
    let mut l = DMatrix::zeros(n, n);
    for (i, &val) in block_values.iter().enumerate() {
        l[(2 * i, 2 * i + 1)] = val;
        l[(2 * i + 1, 2 * i)] = -val;
    }
    let recon = &u * l * u.transpose();
    let residual = (&b - recon).abs().max();
    if residual > 1e-7 * nf {
        return Err(Error::numerical(format!(
            "block decomposition residual {residual:.3e} exceeds {:.3e}",
            1e-7 * nf
        )));
    }

    Ok(SpectralProfile { n, pairs, alpha_extra })
}

/// In-plane rotation making the second vector orthogonal to `jhat` with
/// a nonnegative first component; returns `(cos alpha, v1', v2')`.
fn rotate_to_j(
    v1: &DVector<f64>,
    v2: &DVector<f64>,
    jhat: &DVector<f64>,
) -> (f64, DVector<f64>, DVector<f64>) {
    let c1 = v1.dot(jhat);
    let c2 = v2.dot(jhat);
    let r = (c1 * c1 + c2 * c2).sqrt();
    if r <= J_COMPONENT_TOL {
        return (0.0, v1.clone(), v2.clone());
    }
    let (cos_b, sin_b) = (c1 / r, c2 / r);
    let w1 = v1 * cos_b + v2 * sin_b;
    let w2 = v2 * cos_b - v1 * sin_b;
    (r, w1, w2)
}

/// For planes sharing a `lambda` value (equal within 1e-8 relative),
/// rebuilds the group so that the `j` component lives in at most one
/// plane: the first plane starts from the normalized projection of `j`
/// onto the group's span.
fn concentrate_j_in_equal_groups(b: &DMatrix<f64>, jhat: &DVector<f64>, planes: &mut [Plane]) {
    if planes.is_empty() {
        return;
    }
    let scale = planes[0].mu.max(1.0);
    let mut start = 0;
    while start < planes.len() {
        let mut end = start + 1;
        while end < planes.len() && (planes[start].mu - planes[end].mu).abs() <= 1e-8 * scale {
            end += 1;
        }
        if end - start >= 2 {
            rebuild_group(b, jhat, &mut planes[start..end]);
        }
        start = end;
    }
}

fn rebuild_group(b: &DMatrix<f64>, jhat: &DVector<f64>, group: &mut [Plane]) {
    let mut span: Vec<DVector<f64>> = Vec::with_capacity(2 * group.len());
    for p in group.iter() {
        span.push(p.v1.clone());
        span.push(p.v2.clone());
    }
    let mut proj = DVector::zeros(jhat.len());
    for v in &span {
        proj.axpy(v.dot(jhat), v, 1.0);
    }
    if proj.norm() <= J_COMPONENT_TOL {
        return;
    }
    let mut rebuilt: Vec<DVector<f64>> = Vec::with_capacity(span.len());
    let mut new_planes: Vec<Plane> = Vec::with_capacity(group.len());
    let mut seed = Some(&proj / proj.norm());
    for _ in 0..group.len() {
        let mut q = match seed.take() {
            Some(q) => q,
            None => {
                // Any span vector with a sizeable residual works.
                let mut best: Option<DVector<f64>> = None;
                for v in &span {
                    let mut w = v.clone();
                    orthogonalize(&mut w, &rebuilt);
                    if w.norm() > 0.5 {
                        best = Some(w);
                        break;
                    }
                }
                match best {
                    Some(w) => w,
                    None => return, // numerical degeneracy: keep originals
                }
            }
        };
        orthogonalize(&mut q, &rebuilt);
        let nq = q.norm();
        if nq < 0.5 {
            return;
        }
        q /= nq;
        let mut p = b * &q;
        let cq = p.dot(&q);
        p.axpy(-cq, &q, 1.0);
        orthogonalize(&mut p, &rebuilt);
        let mu = p.norm();
        if mu <= 0.0 {
            return;
        }
        p /= mu;
        rebuilt.push(q.clone());
        rebuilt.push(p.clone());
        new_planes.push(Plane { v1: q, v2: p, mu });
    }
    for (slot, plane) in group.iter_mut().zip(new_planes) {
        *slot = plane;
    }
}

// ---------------------------------------------------------------------------
// Normalized eigenvalue spectra
// ---------------------------------------------------------------------------

/// Eigenvalues of `A` divided by `n`: the Perron root `rho`, the other
/// real eigenvalues, and one `(a, b)` entry per conjugate pair
/// `a (+/-) i b` with `b > 0`.
#[derive(Debug, Clone, Serialize)]
pub struct EigenSpectrum {
    pub rho: f64,
    pub reals: Vec<f64>,
    pub complex_pairs: Vec<(f64, f64)>,
}

impl EigenSpectrum {
    /// `rho + sum r_i + 2 sum a_i`; equals 1/2.
    pub fn first_moment(&self) -> f64 {
        self.rho
            + self.reals.iter().sum::<f64>()
            + 2.0 * self.complex_pairs.iter().map(|&(a, _)| a).sum::<f64>()
    }

    /// `rho^3 + sum r_i^3 + 2 sum (a_i^3 - 3 a_i b_i^2)`; equals `sigma3`.
    pub fn third_moment(&self) -> f64 {
        self.rho.powi(3)
            + self.reals.iter().map(|r| r.powi(3)).sum::<f64>()
            + 2.0
                * self
                    .complex_pairs
                    .iter()
                    .map(|&(a, b)| a.powi(3) - 3.0 * a * b * b)
                    .sum::<f64>()
    }

    /// `rho^4 + sum r_i^4 + 2 sum (a_i^4 - 6 a_i^2 b_i^2 + b_i^4)`;
    /// equals `sigma4`.
    pub fn fourth_moment(&self) -> f64 {
        self.rho.powi(4)
            + self.reals.iter().map(|r| r.powi(4)).sum::<f64>()
            + 2.0
                * self
                    .complex_pairs
                    .iter()
                    .map(|&(a, b)| a.powi(4) - 6.0 * a * a * b * b + b.powi(4))
                    .sum::<f64>()
    }

    /// Failure messages for the spectrum invariants, empty when all hold.
    pub fn invariant_failures(&self, sigma3: f64) -> Vec<String> {
        let mut out = Vec::new();
        for &r in &self.reals {
            if r < -1e-9 || r > self.rho + 1e-9 {
                out.push(format!("real eigenvalue {r} outside [0, rho = {}]", self.rho));
            }
        }
        for &(a, _) in &self.complex_pairs {
            if a < -1e-9 {
                out.push(format!("complex pair has negative real part {a}"));
            }
        }
        let m1 = self.first_moment();
        if (m1 - 0.5).abs() > 1e-9 {
            out.push(format!("first moment {m1} != 1/2"));
        }
        let m3 = self.third_moment();
        if (m3 - sigma3).abs() > 1e-9 {
            out.push(format!("third moment {m3} != sigma3 = {sigma3}"));
        }
        out
    }
}

/// All eigenvalues of `A` divided by `n`, partitioned into the Perron
/// root, other reals and conjugate pairs. Fails if any eigenvalue has
/// real part below -1e-9, which tournament matrices cannot produce.
pub fn eigs_normalized(a: &TournamentMatrix) -> Result<EigenSpectrum> {
    let n = a.n();
    let nf = n as f64;
    let m = a.to_dmatrix();
    let eigen = m.complex_eigenvalues();
    let tol_im = 1e-9;

    let mut reals: Vec<f64> = Vec::new();
    let mut pairs: Vec<(f64, f64)> = Vec::new();
    let mut negative_pairs = 0usize;
    for ev in eigen.iter() {
        let re = ev.re / nf;
        let im = ev.im / nf;
        if re < -1e-9 {
            return Err(Error::numerical(format!(
                "eigenvalue with negative real part {re}: invalid input or solver failure"
            )));
        }
        if im.abs() <= tol_im {
            reals.push(re);
        } else if im > 0.0 {
            pairs.push((re, im));
        } else {
            negative_pairs += 1;
        }
    }
    if negative_pairs != pairs.len() {
        return Err(Error::numerical(format!(
            "unmatched conjugate pairs: {} with positive, {negative_pairs} with negative imaginary part",
            pairs.len()
        )));
    }
    if reals.is_empty() {
        return Err(Error::numerical("no real eigenvalue found for the Perron root"));
    }
    reals.sort_by(|x, y| y.partial_cmp(x).unwrap());
    let rho = reals.remove(0);
    pairs.sort_by(|x, y| (y.0, y.1).partial_cmp(&(x.0, x.1)).unwrap());
    Ok(EigenSpectrum { rho, reals, complex_pairs: pairs })
}

// ---------------------------------------------------------------------------
// Potential-family membership
// ---------------------------------------------------------------------------

/// Fits `A[i][j] = 1/2 + z_i - z_j` by row means (which recover `z` up
/// to an additive constant), shifts so `min z = 0`, and returns `z`
/// when the fit holds entrywise within `tol`.
pub fn extremality_test(a: &TournamentMatrix, tol: f64) -> Option<Vec<f64>> {
    let n = a.n();
    let mut z: Vec<f64> = (0..n).map(|i| a.row_mean(i) - 0.5).collect();
    let min = z.iter().cloned().fold(f64::INFINITY, f64::min);
    for v in &mut z {
        *v -= min;
    }
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let fit = 0.5 + z[i] - z[j];
            worst = worst.max((a.get(i, j) - fit).abs());
        }
    }
    if worst <= tol {
        Some(z)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::count::sigma;
    use crate::generators;
    use crate::rng::Seed;
    use crate::tournament::Tournament;
    use std::f64::consts::FRAC_PI_2;

    fn cyclic_triangle() -> Tournament {
        Tournament::from_orientation(3, |i, j| (j + 3 - i) % 3 == 1).unwrap()
    }

    fn var(z: &[f64]) -> f64 {
        let n = z.len() as f64;
        let mean = z.iter().sum::<f64>() / n;
        z.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n
    }

    #[test]
    fn triangle_profile_frozen() {
        let p = skew_decompose(&cyclic_triangle().to_matrix()).unwrap();
        assert_eq!(p.pairs.len(), 1);
        assert!((p.pairs[0].lambda - 1.0 / 3.0_f64.sqrt()).abs() < 1e-12);
        assert!((p.pairs[0].alpha - FRAC_PI_2).abs() < 1e-10);
        assert!((p.alpha_extra.unwrap() - 0.0).abs() < 1e-10);
        assert!((p.cos2_sum() - 1.0).abs() < 1e-12);
        assert!((reconstruct_sigma(&p, 3).unwrap() - 0.125).abs() < 1e-12);
        assert!((reconstruct_sigma(&p, 4).unwrap() - 11.0 / 144.0).abs() < 1e-12);
        assert!(reconstruct_sigma(&p, 5).is_err());
    }

    #[test]
    fn constant_half_profile_is_zero() {
        let p = skew_decompose(&TournamentMatrix::constant_half(4).unwrap()).unwrap();
        assert!(p.pairs.iter().all(|q| q.lambda == 0.0));
        assert!((reconstruct_sigma(&p, 3).unwrap() - 0.125).abs() < 1e-14);
        assert!((reconstruct_sigma(&p, 4).unwrap() - 1.0 / 16.0).abs() < 1e-14);
    }

    #[test]
    fn potential_profile_has_one_block_carrying_j() {
        let z = [0.0, 0.1, 0.27, 0.5, 0.33, 0.41];
        let a = generators::potential_matrix(&z).unwrap();
        let p = skew_decompose(&a).unwrap();
        let nonzero: Vec<_> = p.pairs.iter().filter(|q| q.lambda > 0.0).collect();
        assert_eq!(nonzero.len(), 1, "rank-2 skew part has one block");
        let l2c2 = p.sum_lambda2_cos2();
        assert!((l2c2 - 4.0 * var(&z)).abs() < 1e-12, "lambda^2 cos^2 = 4 Var(z)");
        assert!(nonzero[0].alpha < 1e-6, "j lies inside the nonzero plane");
        for ell in [3, 4] {
            let direct = sigma(&a, ell).unwrap();
            let recon = reconstruct_sigma(&p, ell).unwrap();
            assert!((direct - recon).abs() < 1e-10);
        }
    }

    #[test]
    fn random_profiles_reconstruct_sigma() {
        for (seed, n) in [(1u64, 10usize), (2, 23), (3, 40)] {
            let t = generators::uniform(n, Seed(seed)).unwrap();
            let a = t.to_matrix();
            let p = skew_decompose(&a).unwrap();
            assert!((p.cos2_sum() - 1.0).abs() < 1e-10, "n = {n}");
            for ell in [3, 4] {
                let direct = sigma(&a, ell).unwrap();
                let recon = reconstruct_sigma(&p, ell).unwrap();
                assert!((direct - recon).abs() < 1e-9, "n = {n}, ell = {ell}");
            }
            let cs = p.sum_lambda2_cos2();
            assert!(p.sum_lambda4() >= cs * cs - 1e-9);
        }
    }

    #[test]
    fn eigs_triangle_frozen() {
        let e = eigs_normalized(&cyclic_triangle().to_matrix()).unwrap();
        assert!((e.rho - 0.5).abs() < 1e-12);
        assert!(e.reals.is_empty());
        assert_eq!(e.complex_pairs.len(), 1);
        let (a, b) = e.complex_pairs[0];
        assert!(a.abs() < 1e-12);
        assert!((b - 3.0_f64.sqrt() / 6.0).abs() < 1e-12);
    }

    #[test]
    fn eigs_constant_half_and_transitive() {
        let e = eigs_normalized(&TournamentMatrix::constant_half(5).unwrap()).unwrap();
        assert!((e.rho - 0.5).abs() < 1e-12);
        assert!(e.reals.iter().all(|r| r.abs() < 1e-9));
        assert!(e.complex_pairs.is_empty());

        let n = 6;
        let e = eigs_normalized(&generators::transitive(n).unwrap().to_matrix()).unwrap();
        assert!((e.rho - 1.0 / (2.0 * n as f64)).abs() < 1e-9);
        for r in &e.reals {
            assert!((r - 1.0 / (2.0 * n as f64)).abs() < 1e-9);
        }
    }

    #[test]
    fn eigen_moments_hold_on_random() {
        let t = generators::uniform(31, Seed(5)).unwrap();
        let a = t.to_matrix();
        let e = eigs_normalized(&a).unwrap();
        let s3 = sigma(&a, 3).unwrap();
        assert!(e.invariant_failures(s3).is_empty(), "{:?}", e.invariant_failures(s3));
        assert!((e.fourth_moment() - sigma(&a, 4).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn extremality_frozen_cases() {
        let z = vec![0.0, 0.25, 0.5];
        let a = generators::potential_matrix(&z).unwrap();
        let got = extremality_test(&a, 1e-9).unwrap();
        for (g, w) in got.iter().zip(&z) {
            assert!((g - w).abs() < 1e-12);
        }
        assert!(extremality_test(&cyclic_triangle().to_matrix(), 0.4).is_none());
        let flat = extremality_test(&TournamentMatrix::constant_half(4).unwrap(), 1e-12).unwrap();
        assert!(flat.iter().all(|&v| v == 0.0));
    }
}
