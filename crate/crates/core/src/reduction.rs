//! Reduction of a generalized Choi-Kraus representation to one whose two
//! operator families are each linearly independent.
//!
//! The pass works B-side first: find a basis `{C_j}` of `span{B_i}` and
//! coefficients `d_{i,j}` with `B_i = Σ_j d_{i,j} C_j`, regroup the map as
//! `Σ_j D_j X C_j` with `D_j = Σ_i d_{i,j} A_i`, then repeat once on the
//! D-side to obtain `φ(X) = Σ E_i X F_i`. One pass in each direction is
//! enough: at that point both families are provably independent, and the
//! term count equals the tensor rank of the map.

use crate::error::Result;
use crate::numerics::{
    coordinates_in_basis, row_basis, singular_values, zero, CMatrix, CVector, RANK_TOL,
};
use crate::superop::GCKRep;

/// A recombined matrix whose norm falls this far below the gross magnitude
/// of its summands is treated as an exact zero.
const CANCEL_TOL: f64 = 1e-12;

/// A representation `φ(X) = Σᵢ EᵢXFᵢ` with both families linearly
/// independent. `p` is the tensor rank of the map; `p = 0` is the zero map.
#[derive(Debug, Clone)]
pub struct ReducedRep {
    n: usize,
    k: usize,
    e: Vec<CMatrix>,
    f: Vec<CMatrix>,
    p: usize,
    conditioning_warning: bool,
    input_mix: Option<CMatrix>,
}

fn flatten(m: &CMatrix) -> CVector {
    let cols = m.ncols();
    CVector::from_fn(m.nrows() * cols, |idx, _| m[(idx / cols, idx % cols)])
}

fn unflatten(v: &CVector, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |i, j| v[i * cols + j])
}

impl ReducedRep {
    /// Build from explicit families, validating shapes and independence.
    pub fn new(n: usize, k: usize, e: Vec<CMatrix>, f: Vec<CMatrix>) -> Result<Self> {
        let p = e.len();
        if f.len() != p {
            return Err(crate::error::Error::DimensionMismatch(format!(
                "family lengths differ: {} vs {}",
                e.len(),
                f.len()
            )));
        }
        GCKRep::new(n, k, e.iter().cloned().zip(f.iter().cloned()).collect())?;
        let e_vecs: Vec<CVector> = e.iter().map(flatten).collect();
        let f_vecs: Vec<CVector> = f.iter().map(flatten).collect();
        let (_, e_rank) = row_basis(&e_vecs, RANK_TOL)?;
        let (_, f_rank) = row_basis(&f_vecs, RANK_TOL)?;
        if e_rank != p || f_rank != p {
            return Err(crate::error::Error::InvalidParameter(format!(
                "families must be linearly independent: ranks {e_rank}/{f_rank} for {p} terms"
            )));
        }
        Ok(Self {
            n,
            k,
            e,
            f,
            p,
            conditioning_warning: false,
            input_mix: None,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn e_family(&self) -> &[CMatrix] {
        &self.e
    }

    pub fn f_family(&self) -> &[CMatrix] {
        &self.f
    }

    /// Set when the reduced families sit within a decade of the rank cutoff,
    /// i.e. the representation is close to a lower-rank one.
    pub fn conditioning_warning(&self) -> bool {
        self.conditioning_warning
    }

    /// The positive mixing matrix that reproduces the norm bound of the
    /// representation this reduction was computed from, available when that
    /// representation was already linearly independent.
    pub fn input_mix(&self) -> Option<&CMatrix> {
        self.input_mix.as_ref()
    }

    /// View the reduced representation as an ordinary term list.
    pub fn to_rep(&self) -> GCKRep {
        GCKRep::new(
            self.n,
            self.k,
            self.e.iter().cloned().zip(self.f.iter().cloned()).collect(),
        )
        .expect("reduced families always have consistent shapes")
    }

    pub fn apply(&self, x: &CMatrix) -> Result<CMatrix> {
        self.to_rep().apply(x)
    }
}

/// Rewrite `rep` with linearly independent operator families. The action
/// of the map is preserved; the zero map comes back with `p = 0`.
pub fn make_lin_indep(rep: &GCKRep) -> Result<ReducedRep> {
    let (n, k) = (rep.n(), rep.k());
    let zero_rep = |warning| ReducedRep {
        n,
        k,
        e: Vec::new(),
        f: Vec::new(),
        p: 0,
        conditioning_warning: warning,
        input_mix: None,
    };
    if rep.num_terms() == 0 {
        return Ok(zero_rep(false));
    }

    // First pass: basis of span{B_i} and coordinates of each B_i in it.
    let b_vecs: Vec<CVector> = rep.terms().iter().map(|(_, b)| flatten(b)).collect();
    let (c_basis, l) = row_basis(&b_vecs, RANK_TOL)?;
    if l == 0 {
        return Ok(zero_rep(false));
    }
    let c_mats: Vec<CMatrix> = c_basis.iter().map(|v| unflatten(v, n, k)).collect();
    let d_coeffs: Vec<CVector> = b_vecs
        .iter()
        .map(|bv| coordinates_in_basis(bv, &c_basis))
        .collect::<Result<_>>()?;

    // Regroup the A side along the new B basis. The sums cancel for
    // maps that act as zero, so "numerically zero" is judged against the
    // gross magnitude of the summed terms rather than the other D_j.
    let a_norms: Vec<f64> = rep.terms().iter().map(|(a, _)| a.norm()).collect();
    let d_mats: Vec<CMatrix> = (0..l)
        .map(|j| {
            let mut d_j = CMatrix::zeros(k, n);
            let mut gross = 0.0;
            for (i, (a, _)) in rep.terms().iter().enumerate() {
                d_j += a * d_coeffs[i][j];
                gross += d_coeffs[i][j].norm() * a_norms[i];
            }
            if d_j.norm() <= CANCEL_TOL * gross {
                d_j.fill(zero());
            }
            d_j
        })
        .collect();

    // Second pass, on the regrouped D side.
    let d_vecs: Vec<CVector> = d_mats.iter().map(flatten).collect();
    let (e_basis, p) = row_basis(&d_vecs, RANK_TOL)?;
    if p == 0 {
        return Ok(zero_rep(false));
    }
    let e_mats: Vec<CMatrix> = e_basis.iter().map(|v| unflatten(v, k, n)).collect();
    let c_coeffs: Vec<CVector> = d_vecs
        .iter()
        .map(|dv| coordinates_in_basis(dv, &e_basis))
        .collect::<Result<_>>()?;
    let f_mats: Vec<CMatrix> = (0..p)
        .map(|t| {
            let mut f_t = CMatrix::zeros(n, k);
            for (j, c_j) in c_mats.iter().enumerate() {
                f_t += c_j * c_coeffs[j][t];
            }
            f_t
        })
        .collect();

    // The F family is independent by the rank theorem; flag it if it sits
    // within a decade of the cutoff.
    let f_vecs: Vec<CVector> = f_mats.iter().map(flatten).collect();
    let f_stack = CMatrix::from_fn(p, n * k, |i, j| f_vecs[i][j]);
    let sv = singular_values(&f_stack)?;
    let largest = sv.first().copied().unwrap_or(0.0);
    let smallest = sv.get(p - 1).copied().unwrap_or(0.0);
    let conditioning_warning = smallest <= 10.0 * RANK_TOL * largest;

    // When the caller's list was already independent (m = p) it corresponds
    // to an explicit positive mixing matrix over the new families; record it
    // so the minimizer can evaluate the caller's own representation bound.
    let input_mix = if rep.num_terms() == p {
        input_mix_matrix(&b_vecs, &f_vecs, p)
    } else {
        None
    };

    Ok(ReducedRep {
        n,
        k,
        e: e_mats,
        f: f_mats,
        p,
        conditioning_warning,
        input_mix,
    })
}

/// The positive part of the coefficient matrix expressing the caller's
/// B family in the reduced F family. Mixing the reduced representation by
/// it reproduces the norm bound of the caller's representation exactly,
/// because the objective depends on a mixing matrix only through `S†S`.
fn input_mix_matrix(b_vecs: &[CVector], f_vecs: &[CVector], p: usize) -> Option<CMatrix> {
    let mut coeffs = CMatrix::zeros(p, p);
    for (i, b) in b_vecs.iter().enumerate() {
        let row = coordinates_in_basis(b, f_vecs).ok()?;
        for j in 0..p {
            coeffs[(i, j)] = row[j];
        }
    }
    let gram = coeffs.adjoint() * &coeffs;
    let eig = gram.try_symmetric_eigen(1e-14, 10_000)?;
    if eig.eigenvalues.iter().any(|&x| x <= 0.0) {
        return None;
    }
    let sqrt_diag = CMatrix::from_fn(p, p, |i, j| {
        if i == j {
            crate::numerics::re(eig.eigenvalues[i].sqrt())
        } else {
            zero()
        }
    });
    Some(&eig.eigenvectors * sqrt_diag * eig.eigenvectors.adjoint())
}

/// The tensor rank of the map: the length of its reduced representation,
/// equal to the rank of its Choi matrix.
pub fn tensor_rank(rep: &GCKRep) -> Result<usize> {
    Ok(make_lin_indep(rep)?.p)
}
