//! Dense complex linear algebra primitives shared by the rest of the crate.
//!
//! Everything operates on `DMatrix<Complex<f64>>`. Decompositions are
//! delegated to nalgebra; the wrappers here add the retry and tolerance
//! policies the higher layers rely on. Shifted-QR style iterations can stall
//! on exactly structured inputs (permutation matrices are the classic case),
//! so the wrappers retry under a seeded random unitary change of basis, which
//! leaves singular values and eigenvalues unchanged.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Double-precision complex scalar.
pub type C64 = Complex<f64>;
/// Dense complex matrix, the universal carrier.
pub type CMatrix = DMatrix<C64>;
/// Dense complex column vector.
pub type CVector = DVector<C64>;

/// Relative singular-value cutoff used for every rank decision in the crate.
pub const RANK_TOL: f64 = 1e-10;

/// Relative residual allowed when expressing a vector in a spanning basis.
pub const SPAN_TOL: f64 = 1e-9;

const ITER_EPS: f64 = 1e-14;
const ITER_MAX: usize = 10_000;
const BASIS_RETRIES: usize = 8;
const REDRAW_CAP: usize = 100;
const RETRY_SEED: u64 = 0x5eed_cb5d;

pub(crate) fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

pub(crate) fn one() -> C64 {
    C64::new(1.0, 0.0)
}

pub(crate) fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Largest entrywise modulus, zero for empty matrices.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// All entries finite in both components.
pub fn all_finite(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

fn random_orthonormal(d: usize, rng: &mut impl Rng) -> Option<CMatrix> {
    let raw = CMatrix::from_fn(d, d, |_, _| C64::new(rng.random(), rng.random()));
    orthonormalize_columns(&raw)
}

/// Singular values of a rectangular matrix, descending.
pub fn singular_values(m: &CMatrix) -> Result<Vec<f64>> {
    if let Some(svd) = m.clone().try_svd(false, false, ITER_EPS, ITER_MAX) {
        let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        return Ok(sv);
    }
    // Singular values are invariant under unitary factors on either side.
    let mut rng = ChaCha8Rng::seed_from_u64(RETRY_SEED);
    for _ in 0..BASIS_RETRIES {
        let (Some(q), Some(p)) = (
            random_orthonormal(m.nrows(), &mut rng),
            random_orthonormal(m.ncols(), &mut rng),
        ) else {
            continue;
        };
        let rotated = &q * m * &p;
        if let Some(svd) = rotated.try_svd(false, false, ITER_EPS, ITER_MAX) {
            let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
            sv.sort_by(|a, b| b.total_cmp(a));
            return Ok(sv);
        }
    }
    Err(Error::Numerical(
        "singular value iteration failed to converge".into(),
    ))
}

/// Full SVD `M = U diag(s) Vh` with `s` descending.
pub(crate) fn svd_factor(m: &CMatrix) -> Result<(CMatrix, Vec<f64>, CMatrix)> {
    fn unpack(
        svd: nalgebra::SVD<C64, nalgebra::Dyn, nalgebra::Dyn>,
    ) -> (CMatrix, Vec<f64>, CMatrix) {
        let u = svd.u.expect("svd computed with u");
        let vh = svd.v_t.expect("svd computed with v_t");
        let sv: Vec<f64> = svd.singular_values.iter().copied().collect();
        // nalgebra does not guarantee ordering; sort all three consistently.
        let mut order: Vec<usize> = (0..sv.len()).collect();
        order.sort_by(|&a, &b| sv[b].total_cmp(&sv[a]));
        let u2 = CMatrix::from_fn(u.nrows(), order.len(), |i, j| u[(i, order[j])]);
        let vh2 = CMatrix::from_fn(order.len(), vh.ncols(), |i, j| vh[(order[i], j)]);
        let sv2: Vec<f64> = order.iter().map(|&i| sv[i]).collect();
        (u2, sv2, vh2)
    }

    if let Some(svd) = m.clone().try_svd(true, true, ITER_EPS, ITER_MAX) {
        return Ok(unpack(svd));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(RETRY_SEED);
    for _ in 0..BASIS_RETRIES {
        let (Some(q), Some(p)) = (
            random_orthonormal(m.nrows(), &mut rng),
            random_orthonormal(m.ncols(), &mut rng),
        ) else {
            continue;
        };
        let rotated = &q * m * &p;
        if let Some(svd) = rotated.try_svd(true, true, ITER_EPS, ITER_MAX) {
            let (u, sv, vh) = unpack(svd);
            return Ok((q.adjoint() * u, sv, vh * p.adjoint()));
        }
    }
    Err(Error::Numerical(
        "singular value iteration failed to converge".into(),
    ))
}

/// Operator norm: the largest singular value.
pub fn operator_norm(m: &CMatrix) -> f64 {
    singular_values(m)
        .expect("singular value iteration converges after randomized restarts")
        .first()
        .copied()
        .unwrap_or(0.0)
}

/// Trace norm: the sum of singular values.
pub fn trace_norm(m: &CMatrix) -> f64 {
    singular_values(m)
        .expect("singular value iteration converges after randomized restarts")
        .iter()
        .sum()
}

/// Eigenvalues of the Hermitian part `(M + M†)/2`, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Result<Vec<f64>> {
    let h = (m + m.adjoint()) * re(0.5);
    if let Some(eig) = h.clone().try_symmetric_eigen(ITER_EPS, ITER_MAX) {
        let mut ev: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        return Ok(ev);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(RETRY_SEED);
    for _ in 0..BASIS_RETRIES {
        let Some(q) = random_orthonormal(h.nrows(), &mut rng) else {
            continue;
        };
        let rotated = q.adjoint() * &h * &q;
        if let Some(eig) = rotated.try_symmetric_eigen(ITER_EPS, ITER_MAX) {
            let mut ev: Vec<f64> = eig.eigenvalues.iter().copied().collect();
            ev.sort_by(f64::total_cmp);
            return Ok(ev);
        }
    }
    Err(Error::Numerical(
        "hermitian eigenvalue iteration failed to converge".into(),
    ))
}

/// Operator norm of a Hermitian matrix via its spectrum. Cheaper than an SVD
/// in the minimization inner loop.
pub(crate) fn hermitian_operator_norm(m: &CMatrix) -> Result<f64> {
    let ev = hermitian_eigenvalues(m)?;
    Ok(ev.iter().map(|x| x.abs()).fold(0.0, f64::max))
}

/// Eigenvalues of a general square matrix, via the complex Schur form.
pub fn eigenvalues(m: &CMatrix) -> Result<Vec<C64>> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "eigenvalues requires a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    fn schur_diag(m: &CMatrix) -> Option<Vec<C64>> {
        let t = m.clone().try_schur(ITER_EPS, ITER_MAX)?.unpack().1;
        Some((0..t.nrows()).map(|i| t[(i, i)]).collect())
    }
    if let Some(e) = schur_diag(m) {
        return Ok(e);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(RETRY_SEED);
    for _ in 0..BASIS_RETRIES {
        let Some(q) = random_orthonormal(m.nrows(), &mut rng) else {
            continue;
        };
        let rotated = q.adjoint() * m * &q;
        if let Some(e) = schur_diag(&rotated) {
            return Ok(e);
        }
    }
    Err(Error::Numerical(
        "eigenvalue iteration failed to converge".into(),
    ))
}

/// Hermitian within `tol` (entrywise) and minimum eigenvalue at least `-tol`.
pub fn is_positive_semidefinite(m: &CMatrix, tol: f64) -> Result<bool> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "positivity test requires a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if max_abs(&(m - m.adjoint())) > tol {
        return Ok(false);
    }
    let ev = hermitian_eigenvalues(m)?;
    Ok(ev.first().is_none_or(|&lo| lo >= -tol))
}

/// Modified Gram-Schmidt on the columns, run twice for orthogonality at
/// machine precision. `None` if the columns are numerically dependent.
fn orthonormalize_columns(m: &CMatrix) -> Option<CMatrix> {
    let d = m.ncols();
    let mut q = m.clone();
    for pass in 0..2 {
        for j in 0..d {
            let mut v: CVector = q.column(j).into_owned();
            for i in 0..j {
                let qi: CVector = q.column(i).into_owned();
                let proj = qi.dotc(&v);
                v -= qi * proj;
            }
            let norm = v.norm();
            let scale = m.column(j).norm().max(1.0);
            if pass == 0 && norm <= 1e-12 * scale {
                return None;
            }
            if norm == 0.0 {
                return None;
            }
            q.set_column(j, &(v / re(norm)));
        }
    }
    Some(q)
}

/// Random unitary: a matrix with entries uniform on the unit square of the
/// complex plane, redrawn until full rank, then column-orthonormalized.
/// Deterministic for a fixed `rng` state.
pub fn random_unitary(d: usize, rng: &mut impl Rng) -> Result<CMatrix> {
    assert!(d >= 1, "dimension must be positive");
    for _ in 0..REDRAW_CAP {
        if let Some(q) = random_orthonormal(d, rng) {
            return Ok(q);
        }
    }
    Err(Error::Numerical(format!(
        "failed to draw a full-rank {d}x{d} matrix in {REDRAW_CAP} attempts"
    )))
}

/// Random positive matrix together with its analytic inverse.
///
/// `P = U D U†` with `D` diagonal, entries uniform in `(lo, hi]`, and
/// `Q = U D⁻¹ U†`. Returning the pair avoids a numerical inversion later.
pub fn random_positive_with_inverse(
    d: usize,
    lo: f64,
    hi: f64,
    rng: &mut impl Rng,
) -> Result<(CMatrix, CMatrix)> {
    if !(0.0 <= lo && lo < hi) {
        return Err(Error::InvalidParameter(format!(
            "eigenvalue interval must satisfy 0 <= lo < hi, got ({lo}, {hi}]"
        )));
    }
    let evals: Vec<f64> = (0..d)
        .map(|_| hi - rng.random::<f64>() * (hi - lo))
        .collect();
    let u = random_unitary(d, rng)?;
    let dm = CMatrix::from_fn(d, d, |i, j| if i == j { re(evals[i]) } else { zero() });
    let dm_inv = CMatrix::from_fn(
        d,
        d,
        |i, j| if i == j { re(1.0 / evals[i]) } else { zero() },
    );
    let p = &u * dm * u.adjoint();
    let q = &u * dm_inv * u.adjoint();
    Ok((p, q))
}

/// Orthonormal basis for the span of the given vectors, with the numerical
/// rank. Singular values at or below `tol` times the largest are treated as
/// zero. The basis spans the same subspace as the input but is not a subset
/// of it.
pub fn row_basis(rows: &[CVector], tol: f64) -> Result<(Vec<CVector>, usize)> {
    if rows.is_empty() {
        return Ok((Vec::new(), 0));
    }
    let len = rows[0].len();
    assert!(
        rows.iter().all(|r| r.len() == len),
        "all vectors must have the same length"
    );
    let stack = CMatrix::from_fn(rows.len(), len, |i, j| rows[i][j]);
    let (_, sv, vh) = svd_factor(&stack)?;
    let largest = sv.first().copied().unwrap_or(0.0);
    let rank = sv.iter().filter(|&&s| s > tol * largest).count();
    let basis = (0..rank)
        .map(|i| CVector::from_fn(len, |j, _| vh[(i, j)]))
        .collect();
    Ok((basis, rank))
}

/// Coefficients expressing `v` in `basis`, by least squares.
///
/// The residual must stay below [`SPAN_TOL`] relative to `‖v‖`; a larger
/// residual means `v` was not in the span, which callers treat as an internal
/// logic error.
pub fn coordinates_in_basis(v: &CVector, basis: &[CVector]) -> Result<CVector> {
    let p = basis.len();
    if p == 0 {
        if v.norm() > 0.0 {
            return Err(Error::Numerical(
                "span violation: nonzero vector against an empty basis".into(),
            ));
        }
        return Ok(CVector::zeros(0));
    }
    let len = v.len();
    assert!(
        basis.iter().all(|b| b.len() == len),
        "basis vectors must match the target length"
    );
    let b = CMatrix::from_fn(len, p, |i, j| basis[j][i]);
    let (u, sv, vh) = svd_factor(&b)?;
    let largest = sv.first().copied().unwrap_or(0.0);
    // Pseudo-inverse solve: c = V s⁺ U† v.
    let uv = u.adjoint() * v;
    let mut scaled = CVector::zeros(sv.len());
    for i in 0..sv.len() {
        if sv[i] > RANK_TOL * largest {
            scaled[i] = uv[i] / re(sv[i]);
        }
    }
    let coeffs = vh.adjoint() * scaled;
    let residual = (&b * &coeffs - v).norm();
    if residual > SPAN_TOL * v.norm().max(f64::MIN_POSITIVE) {
        return Err(Error::Numerical(format!(
            "span violation: residual {residual:.3e} exceeds tolerance for |v| = {:.3e}",
            v.norm()
        )));
    }
    Ok(coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn ident(n: usize) -> CMatrix {
        CMatrix::identity(n, n)
    }

    #[test]
    fn operator_norm_identity() {
        assert_abs_diff_eq!(operator_norm(&ident(3)), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn operator_norm_diagonal() {
        let m = CMatrix::from_fn(2, 2, |i, j| match (i, j) {
            (0, 0) => re(2.0),
            (1, 1) => re(-1.0),
            _ => zero(),
        });
        assert_abs_diff_eq!(operator_norm(&m), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn operator_norm_all_ones() {
        let m = CMatrix::from_fn(2, 2, |_, _| one());
        assert_abs_diff_eq!(operator_norm(&m), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn trace_norm_identity() {
        assert_abs_diff_eq!(trace_norm(&ident(4)), 4.0, epsilon = 1e-12);
    }

    #[test]
    fn trace_norm_signature() {
        let m = CMatrix::from_fn(2, 2, |i, j| match (i, j) {
            (0, 0) => one(),
            (1, 1) => re(-1.0),
            _ => zero(),
        });
        assert_abs_diff_eq!(trace_norm(&m), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn trace_norm_rank_one_projector() {
        let v = CVector::from_vec(vec![re(0.6), C64::new(0.0, 0.8)]);
        let m = CMatrix::from_fn(2, 2, |i, j| v[i] * v[j].conj());
        assert_abs_diff_eq!(trace_norm(&m), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn psd_identity() {
        assert!(is_positive_semidefinite(&ident(3), 1e-10).unwrap());
    }

    #[test]
    fn psd_negative_eigenvalue() {
        let m = CMatrix::from_fn(2, 2, |i, j| match (i, j) {
            (0, 0) => one(),
            (1, 1) => re(-0.5),
            _ => zero(),
        });
        assert!(!is_positive_semidefinite(&m, 1e-10).unwrap());
    }

    #[test]
    fn psd_within_tolerance() {
        let m = CMatrix::from_fn(2, 2, |i, j| match (i, j) {
            (0, 0) => one(),
            (1, 1) => re(-1e-12),
            _ => zero(),
        });
        assert!(is_positive_semidefinite(&m, 1e-10).unwrap());
    }

    #[test]
    fn psd_rejects_non_square() {
        let m = CMatrix::zeros(2, 3);
        assert!(matches!(
            is_positive_semidefinite(&m, 1e-10),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn psd_rejects_non_hermitian() {
        let mut m = ident(2);
        m[(0, 1)] = re(0.5);
        assert!(!is_positive_semidefinite(&m, 1e-10).unwrap());
    }

    #[test]
    fn random_unitary_scalar_case() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let u = random_unitary(1, &mut rng).unwrap();
        assert_abs_diff_eq!(u[(0, 0)].norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn random_unitary_is_unitary() {
        for d in [2, 3, 5, 8] {
            let mut rng = ChaCha8Rng::seed_from_u64(d as u64);
            let u = random_unitary(d, &mut rng).unwrap();
            let defect = max_abs(&(u.adjoint() * &u - ident(d)));
            assert!(defect <= 1e-10, "d = {d}: unitarity defect {defect:.3e}");
        }
    }

    #[test]
    fn random_unitary_is_deterministic() {
        let mut a = ChaCha8Rng::seed_from_u64(7);
        let mut b = ChaCha8Rng::seed_from_u64(7);
        let u = random_unitary(3, &mut a).unwrap();
        let v = random_unitary(3, &mut b).unwrap();
        assert_eq!(u, v);
    }

    #[test]
    fn random_positive_scalar_case() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (p, q) = random_positive_with_inverse(1, 0.5, 1.0, &mut rng).unwrap();
        let val = p[(0, 0)].re;
        assert!(val > 0.5 && val <= 1.0);
        assert_abs_diff_eq!((p[(0, 0)] * q[(0, 0)]).re, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn random_positive_construction_properties() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (p, q) = random_positive_with_inverse(4, 1e-3, 1.0, &mut rng).unwrap();
        assert!(max_abs(&(&p - p.adjoint())) <= 1e-12);
        let ev = hermitian_eigenvalues(&p).unwrap();
        assert!(ev.iter().all(|&x| x > 1e-3 - 1e-12 && x <= 1.0 + 1e-12));
        assert!(max_abs(&(&p * &q - ident(4))) <= 1e-8);
    }

    #[test]
    fn random_positive_rejects_bad_interval() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        assert!(matches!(
            random_positive_with_inverse(2, 1.0, 1.0, &mut rng),
            Err(Error::InvalidParameter(_))
        ));
    }

    fn e(n: usize, i: usize) -> CVector {
        CVector::from_fn(n, |j, _| if j == i { one() } else { zero() })
    }

    #[test]
    fn row_basis_rank_two() {
        let rows = vec![e(3, 0), e(3, 1), e(3, 0) + e(3, 1)];
        let (basis, rank) = row_basis(&rows, RANK_TOL).unwrap();
        assert_eq!(rank, 2);
        assert_eq!(basis.len(), 2);
    }

    #[test]
    fn row_basis_collinear() {
        let v = CVector::from_vec(vec![one(), re(2.0), C64::new(0.0, 1.0)]);
        let rows = vec![v.clone(), v * re(2.0)];
        let (_, rank) = row_basis(&rows, RANK_TOL).unwrap();
        assert_eq!(rank, 1);
    }

    #[test]
    fn row_basis_zero_vector() {
        let rows = vec![CVector::zeros(3)];
        let (basis, rank) = row_basis(&rows, RANK_TOL).unwrap();
        assert_eq!(rank, 0);
        assert!(basis.is_empty());
    }

    #[test]
    fn coordinates_unit_cases() {
        let basis = vec![e(4, 0), e(4, 1)];
        let c = coordinates_in_basis(&e(4, 0), &basis).unwrap();
        assert_abs_diff_eq!((c[0] - one()).norm(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c[1].norm(), 0.0, epsilon = 1e-12);

        let v = e(4, 0) * re(2.0) + e(4, 1) * re(3.0);
        let c = coordinates_in_basis(&v, &basis).unwrap();
        assert_abs_diff_eq!(c[0].re, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c[1].re, 3.0, epsilon = 1e-12);

        let c = coordinates_in_basis(&CVector::zeros(4), &basis).unwrap();
        assert!(c.iter().all(|x| x.norm() == 0.0));
    }

    #[test]
    fn coordinates_detects_span_violation() {
        let basis = vec![e(3, 0)];
        assert!(matches!(
            coordinates_in_basis(&e(3, 1), &basis),
            Err(Error::Numerical(_))
        ));
    }

    #[test]
    fn eigenvalues_of_permutation_matrix() {
        // Exact cyclic permutations stall the plain QR iteration; the
        // randomized restart must recover the fourth roots of unity.
        let mut p = CMatrix::zeros(4, 4);
        for i in 0..4 {
            p[(i, (i + 1) % 4)] = one();
        }
        let mut eigs = eigenvalues(&p).unwrap();
        eigs.sort_by(|a, b| a.arg().total_cmp(&b.arg()));
        for (got, want) in eigs.iter().zip([
            C64::new(0.0, -1.0),
            C64::new(1.0, 0.0),
            C64::new(0.0, 1.0),
            C64::new(-1.0, 0.0),
        ]) {
            assert!((got - want).norm() < 1e-9, "got {got}, want {want}");
        }
    }
}
