//! Generalized Choi-Kraus representations of linear maps `φ: M_n → M_k`.
//!
//! A map is stored as an ordered list of term pairs `(Aᵢ, Bᵢ)` acting by
//! `φ(X) = Σᵢ AᵢXBᵢ`, with `Aᵢ` of shape `k×n` and `Bᵢ` of shape `n×k`.
//! Nothing relates the two families, so the same structure carries CP maps
//! (`Bᵢ = Aᵢ†`), unitary differences, and arbitrary linear maps. An empty
//! term list is the canonical zero map.

use crate::error::{Error, Result};
use crate::numerics::{
    self, hermitian_eigenvalues, is_positive_semidefinite, max_abs, operator_norm, re, svd_factor,
    CMatrix,
};

/// Tolerance for accepting a matrix as unitary on input surfaces.
pub const UNITARY_TOL: f64 = 1e-8;

/// Default tolerance for the Choi positivity test.
pub const CP_TOL: f64 = 1e-9;

/// Relative singular-value cutoff for the term count in [`GCKRep::from_choi`].
const CHOI_FACTOR_TOL: f64 = 1e-12;

/// The `d×d` matrix unit with a one at `(i, j)`.
pub fn matrix_unit(d: usize, i: usize, j: usize) -> CMatrix {
    let mut m = CMatrix::zeros(d, d);
    m[(i, j)] = numerics::one();
    m
}

/// A generalized Choi-Kraus representation of a map `M_n → M_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct GCKRep {
    n: usize,
    k: usize,
    terms: Vec<(CMatrix, CMatrix)>,
}

/// The Choi matrix of a map `M_n → M_k`: the `nk×nk` block matrix whose
/// `(i, j)` block of shape `k×k` is `φ(E_ij)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiMatrix {
    n: usize,
    k: usize,
    j: CMatrix,
}

impl ChoiMatrix {
    pub fn new(n: usize, k: usize, j: CMatrix) -> Result<Self> {
        if n == 0 || k == 0 {
            return Err(Error::InvalidParameter(
                "dimensions must be positive".into(),
            ));
        }
        if j.nrows() != n * k || j.ncols() != n * k {
            return Err(Error::DimensionMismatch(format!(
                "Choi matrix for an M_{n} -> M_{k} map must be {s}x{s}, got {r}x{c}",
                s = n * k,
                r = j.nrows(),
                c = j.ncols()
            )));
        }
        Ok(Self { n, k, j })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.j
    }

    /// Smallest eigenvalue of the Hermitian part, the quantity the CP
    /// verdict is decided on.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(hermitian_eigenvalues(&self.j)?
            .first()
            .copied()
            .unwrap_or(0.0))
    }
}

impl GCKRep {
    /// Build a representation from explicit term pairs, validating shapes.
    pub fn new(n: usize, k: usize, terms: Vec<(CMatrix, CMatrix)>) -> Result<Self> {
        if n == 0 || k == 0 {
            return Err(Error::InvalidParameter(
                "dimensions must be positive".into(),
            ));
        }
        for (idx, (a, b)) in terms.iter().enumerate() {
            if a.nrows() != k || a.ncols() != n {
                return Err(Error::DimensionMismatch(format!(
                    "term {idx}: A must be {k}x{n}, got {}x{}",
                    a.nrows(),
                    a.ncols()
                )));
            }
            if b.nrows() != n || b.ncols() != k {
                return Err(Error::DimensionMismatch(format!(
                    "term {idx}: B must be {n}x{k}, got {}x{}",
                    b.nrows(),
                    b.ncols()
                )));
            }
        }
        Ok(Self { n, k, terms })
    }

    /// The canonical zero map `M_n → M_k`.
    pub fn zero(n: usize, k: usize) -> Self {
        Self {
            n,
            k,
            terms: Vec::new(),
        }
    }

    /// Kraus form `φ(X) = Σᵢ KᵢXKᵢ†`, always completely positive.
    pub fn from_kraus(kraus: &[CMatrix]) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::InvalidParameter("Kraus list must be nonempty".into()))?;
        let (k, n) = (first.nrows(), first.ncols());
        if n == 0 || k == 0 {
            return Err(Error::InvalidParameter(
                "dimensions must be positive".into(),
            ));
        }
        for (idx, op) in kraus.iter().enumerate() {
            if op.nrows() != k || op.ncols() != n {
                return Err(Error::DimensionMismatch(format!(
                    "Kraus operator {idx} has shape {}x{}, expected {k}x{n}",
                    op.nrows(),
                    op.ncols()
                )));
            }
        }
        let terms = kraus.iter().map(|op| (op.clone(), op.adjoint())).collect();
        Ok(Self { n, k, terms })
    }

    /// The unitary-difference map `X ↦ UXU† − VXV†`.
    pub fn from_unitary_pair(u: &CMatrix, v: &CMatrix) -> Result<Self> {
        let n = u.nrows();
        if v.nrows() != n || v.ncols() != n || u.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "expected two square matrices of equal size, got {}x{} and {}x{}",
                u.nrows(),
                u.ncols(),
                v.nrows(),
                v.ncols()
            )));
        }
        for (name, m) in [("U", u), ("V", v)] {
            let defect = max_abs(&(m.adjoint() * m - CMatrix::identity(n, n)));
            if defect > UNITARY_TOL {
                return Err(Error::NotUnitary(format!(
                    "{name} deviates from unitarity by {defect:.3e}"
                )));
            }
        }
        Ok(Self {
            n,
            k: n,
            terms: vec![(u.clone(), u.adjoint()), (v.clone(), -v.adjoint())],
        })
    }

    /// Recover a representation from a Choi matrix by realigning it into the
    /// matrix `K[(a,i),(b,j)] = J[(i,a),(j,b)]` and rank-factoring `K`.
    pub fn from_choi(choi: &ChoiMatrix) -> Result<Self> {
        let (n, k) = (choi.n, choi.k);
        let realigned = CMatrix::from_fn(n * k, n * k, |row, col| {
            let (a, i) = (row / n, row % n);
            let (b, j) = (col / n, col % n);
            choi.j[(i * k + a, j * k + b)]
        });
        let (u, sv, vh) = svd_factor(&realigned)?;
        let largest = sv.first().copied().unwrap_or(0.0);
        let rank = sv
            .iter()
            .filter(|&&s| s > CHOI_FACTOR_TOL * largest)
            .count();
        let terms = (0..rank)
            .map(|t| {
                let a = CMatrix::from_fn(k, n, |aa, ii| u[(aa * n + ii, t)] * re(sv[t]));
                let b = CMatrix::from_fn(n, k, |jj, bb| vh[(t, bb * n + jj)]);
                (a, b)
            })
            .collect();
        Ok(Self { n, k, terms })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn terms(&self) -> &[(CMatrix, CMatrix)] {
        &self.terms
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Evaluate `φ(X) = Σᵢ AᵢXBᵢ`.
    pub fn apply(&self, x: &CMatrix) -> Result<CMatrix> {
        if x.nrows() != self.n || x.ncols() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "argument must be {n}x{n}, got {}x{}",
                x.nrows(),
                x.ncols(),
                n = self.n
            )));
        }
        let mut out = CMatrix::zeros(self.k, self.k);
        for (a, b) in &self.terms {
            out += a * x * b;
        }
        Ok(out)
    }

    /// The dual map `φ†: M_k → M_n` defined by `Tr(φ(X)Y) = Tr(Xφ†(Y))`,
    /// represented by the swapped term list `{(Bᵢ, Aᵢ)}`.
    pub fn dual(&self) -> GCKRep {
        GCKRep {
            n: self.k,
            k: self.n,
            terms: self
                .terms
                .iter()
                .map(|(a, b)| (b.clone(), a.clone()))
                .collect(),
        }
    }

    /// The star map `φ*(X) = φ(X†)†`, represented by `{(Bᵢ†, Aᵢ†)}`. Unlike
    /// the dual it shares domain, codomain, and CB norm with `φ`.
    pub fn star(&self) -> GCKRep {
        GCKRep {
            n: self.n,
            k: self.k,
            terms: self
                .terms
                .iter()
                .map(|(a, b)| (b.adjoint(), a.adjoint()))
                .collect(),
        }
    }

    /// Assemble the Choi matrix: `J[(i,a),(j,b)] = Σₜ Aₜ[a,i]·Bₜ[j,b]`.
    pub fn choi(&self) -> ChoiMatrix {
        let (n, k) = (self.n, self.k);
        let mut j = CMatrix::zeros(n * k, n * k);
        for (a, b) in &self.terms {
            for i in 0..n {
                for jj in 0..n {
                    for aa in 0..k {
                        for bb in 0..k {
                            j[(i * k + aa, jj * k + bb)] += a[(aa, i)] * b[(jj, bb)];
                        }
                    }
                }
            }
        }
        ChoiMatrix { n, k, j }
    }

    /// Complete positivity: the Choi matrix is positive semidefinite.
    pub fn is_cp(&self, tol: f64) -> Result<bool> {
        is_positive_semidefinite(&self.choi().j, tol)
    }

    /// The difference map `φ − ψ`, by term-list concatenation with the
    /// second B family negated.
    pub fn subtract(&self, other: &GCKRep) -> Result<GCKRep> {
        if self.n != other.n || self.k != other.k {
            return Err(Error::DimensionMismatch(format!(
                "cannot subtract an M_{} -> M_{} map from an M_{} -> M_{} map",
                other.n, other.k, self.n, self.k
            )));
        }
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().map(|(a, b)| (a.clone(), -b.clone())));
        Ok(GCKRep {
            n: self.n,
            k: self.k,
            terms,
        })
    }

    /// The amplified map `id_m ⊗ φ: M_{mn} → M_{mk}`.
    pub fn tensor_with_identity(&self, m: usize) -> GCKRep {
        assert!(m >= 1, "tensor factor must be positive");
        let eye = CMatrix::identity(m, m);
        GCKRep {
            n: m * self.n,
            k: m * self.k,
            terms: self
                .terms
                .iter()
                .map(|(a, b)| (eye.kronecker(a), eye.kronecker(b)))
                .collect(),
        }
    }

    /// CB norm of a completely positive map: `‖φ‖_cb = ‖φ(I)‖`. The caller
    /// is responsible for checking [`GCKRep::is_cp`] first.
    pub fn cp_cb_norm(&self) -> f64 {
        let phi_of_identity = self
            .apply(&CMatrix::identity(self.n, self.n))
            .expect("identity argument always matches the declared dimension");
        operator_norm(&phi_of_identity)
    }
}
