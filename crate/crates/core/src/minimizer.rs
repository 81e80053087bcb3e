//! Minimization of the norm objective over mixing matrices, plus the CP
//! fast path and the stabilized lower bound.
//!
//! For a reduced representation `φ(X) = Σ EᵢXFᵢ` and an invertible `S` with
//! inverse `T`, recombining the families as `Hᵢ = Σⱼ s_{i,j}Fⱼ` and
//! `Gⱼ = Σᵢ t_{i,j}Eᵢ` leaves the map unchanged, so
//! `‖Σ GᵢGᵢ†‖^½ ‖Σ Hᵢ†Hᵢ‖^½` is an upper bound on `‖φ‖_cb` for every `S`,
//! and the infimum over all `S` is exact. Positive matrices suffice, and the
//! objective is invariant under scaling `S`, so the search draws positives
//! with eigenvalues in `(eigen_floor, 1]` together with their analytic
//! inverses. Every iteration derives its own random stream from
//! `(seed, index)`, which keeps results identical under any parallel
//! schedule.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numerics::{
    hermitian_operator_norm, max_abs, operator_norm, random_positive_with_inverse, random_unitary,
    re, CMatrix,
};
use crate::reduction::{make_lin_indep, ReducedRep};
use crate::superop::{GCKRep, CP_TOL};

/// Knobs for the randomized minimization.
#[derive(Debug, Clone)]
pub struct SearchConfig {
    /// Number of random mixing matrices (and of random lower-bound probes).
    pub iterations: usize,
    /// Base seed; every iteration uses the stream `(seed, index)`.
    pub seed: u64,
    /// Smallest eigenvalue drawn for a mixing matrix, in `(0, 1)`.
    pub eigen_floor: f64,
    /// Run derivative-free refinement from the best random draw.
    pub refine: bool,
    /// Budget of objective evaluations for the refinement.
    pub refine_max_evals: usize,
    /// Slack used in internal consistency assertions.
    pub tol: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            iterations: 1000,
            seed: 0,
            eigen_floor: 1e-3,
            refine: false,
            refine_max_evals: 2000,
            tol: 1e-8,
        }
    }
}

impl SearchConfig {
    fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::InvalidParameter(
                "iterations must be positive".into(),
            ));
        }
        if !(self.eigen_floor > 0.0 && self.eigen_floor < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "eigen_floor must lie in (0, 1), got {}",
                self.eigen_floor
            )));
        }
        if self.refine_max_evals == 0 {
            return Err(Error::InvalidParameter(
                "refine_max_evals must be positive".into(),
            ));
        }
        if self.tol < 0.0 {
            return Err(Error::InvalidParameter("tol must be nonnegative".into()));
        }
        Ok(())
    }
}

/// A certified norm value.
///
/// `value` is an upper bound on the CB norm, exact when `exact` is set (fast
/// paths). `trace` lists the best-so-far values by iteration index and is
/// non-increasing; it stays empty for exact results.
#[derive(Debug, Clone)]
pub struct NormEstimate {
    pub value: f64,
    pub exact: bool,
    pub best_s: Option<CMatrix>,
    pub lower_bound: Option<f64>,
    pub trace: Vec<(usize, f64)>,
    pub warning: Option<String>,
}

impl NormEstimate {
    fn exact(value: f64, warning: Option<String>) -> Self {
        Self {
            value,
            exact: true,
            best_s: None,
            lower_bound: None,
            trace: Vec::new(),
            warning,
        }
    }
}

/// Upper and lower bounds for one map, as printed by the `bounds` command.
#[derive(Debug, Clone)]
pub struct BoundsReport {
    /// CB norm upper bound (exact for CP maps).
    pub cb_upper: f64,
    /// Whether `cb_upper` came from a fast path.
    pub exact: bool,
    /// Stabilized lower bound from random unitary probes at the critical
    /// amplification level.
    pub cb_lower: f64,
    /// Lower bound on the plain operator norm `‖φ‖` from random unitary
    /// probes on the unamplified map.
    pub phi_norm_lower: f64,
    /// `min(k, n^{3/2})`; the CB norm never exceeds this factor times `‖φ‖`.
    pub cap_factor: f64,
}

fn stream_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn objective_with_inverse(red: &ReducedRep, s: &CMatrix, t: &CMatrix) -> Result<f64> {
    let p = red.p();
    let (n, k) = (red.n(), red.k());
    let e = red.e_family();
    let f = red.f_family();

    let mut sum_h = CMatrix::zeros(k, k);
    for i in 0..p {
        let mut h_i = CMatrix::zeros(n, k);
        for j in 0..p {
            h_i += f[j].clone() * s[(i, j)];
        }
        sum_h += h_i.adjoint() * h_i;
    }
    let mut sum_g = CMatrix::zeros(k, k);
    for j in 0..p {
        let mut g_j = CMatrix::zeros(k, n);
        for i in 0..p {
            g_j += e[i].clone() * t[(i, j)];
        }
        sum_g += &g_j * g_j.adjoint();
    }
    Ok((hermitian_operator_norm(&sum_g)? * hermitian_operator_norm(&sum_h)?).sqrt())
}

/// The minimization objective for an explicit mixing matrix, inverting `S`
/// numerically. Scale-invariant in `S`; an upper bound on the CB norm for
/// every invertible `S`.
pub fn objective(red: &ReducedRep, s: &CMatrix) -> Result<f64> {
    let p = red.p();
    if p == 0 {
        return Err(Error::InvalidParameter(
            "objective needs at least one term; the zero map has norm 0".into(),
        ));
    }
    if s.nrows() != p || s.ncols() != p {
        return Err(Error::DimensionMismatch(format!(
            "mixing matrix must be {p}x{p}, got {}x{}",
            s.nrows(),
            s.ncols()
        )));
    }
    let t = s
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Numerical("mixing matrix is numerically singular".into()))?;
    objective_with_inverse(red, s, &t)
}

/// Minimize the objective over random positive mixing matrices with
/// eigenvalues in `(eigen_floor, 1]`. Deterministic for a fixed seed,
/// whatever the thread count.
pub fn random_search(red: &ReducedRep, cfg: &SearchConfig) -> Result<NormEstimate> {
    cfg.validate()?;
    if red.p() == 0 {
        return Ok(NormEstimate::exact(0.0, None));
    }
    let p = red.p();

    // Free deterministic candidates before any sampling: every
    // representation of the map yields a sound upper bound, so try the
    // identity mix and, when the reduction recorded one, the mix that
    // reproduces the caller's own representation. For spread-spectrum
    // unitary differences the latter is the exact minimizer, a point the
    // draws alone approach slowly.
    let mut best = f64::INFINITY;
    let mut best_s: Option<CMatrix> = None;
    let mut trace = Vec::new();
    let mut probes = vec![CMatrix::identity(p, p)];
    if let Some(m) = red.input_mix() {
        probes.push(m.clone());
    }
    for s in probes {
        if let Ok(value) = objective(red, &s) {
            if value < best {
                best = value;
                best_s = Some(s);
            }
        }
    }
    if best.is_finite() {
        trace.push((0, best));
    }

    let values: Vec<Result<f64>> = (0..cfg.iterations)
        .into_par_iter()
        .map(|index| {
            let mut rng = stream_rng(cfg.seed, index);
            let (s, t) = random_positive_with_inverse(p, cfg.eigen_floor, 1.0, &mut rng)?;
            objective_with_inverse(red, &s, &t)
        })
        .collect();

    let mut best_index = None;
    for (index, value) in values.into_iter().enumerate() {
        let value = value?;
        if value < best {
            best = value;
            best_index = Some(index);
            trace.push((index + 1, value));
        }
    }
    if let Some(index) = best_index {
        let mut rng = stream_rng(cfg.seed, index);
        let (s, _) = random_positive_with_inverse(p, cfg.eigen_floor, 1.0, &mut rng)?;
        best_s = Some(s);
    }
    Ok(NormEstimate {
        value: best,
        exact: false,
        best_s,
        lower_bound: None,
        trace,
        warning: red
            .conditioning_warning()
            .then(|| "reduced representation is near a lower rank".to_string()),
    })
}

/// Number of real parameters of a `p×p` lower-triangular factor.
fn param_count(p: usize) -> usize {
    p * p
}

fn factor_to_params(l: &CMatrix) -> Vec<f64> {
    let p = l.nrows();
    let mut params = Vec::with_capacity(param_count(p));
    for i in 0..p {
        params.push(l[(i, i)].re);
    }
    for i in 0..p {
        for j in 0..i {
            params.push(l[(i, j)].re);
            params.push(l[(i, j)].im);
        }
    }
    params
}

fn params_to_factor(params: &[f64], p: usize) -> CMatrix {
    let mut l = CMatrix::zeros(p, p);
    for i in 0..p {
        l[(i, i)] = re(params[i]);
    }
    let mut idx = p;
    for i in 0..p {
        for j in 0..i {
            l[(i, j)] = crate::numerics::C64::new(params[idx], params[idx + 1]);
            idx += 2;
        }
    }
    l
}

/// Objective of `S = LL†`, with the inverse obtained by triangular solves.
/// `None` when the factor is too close to singular to evaluate.
fn eval_factor(red: &ReducedRep, params: &[f64], p: usize) -> Option<f64> {
    const DIAG_FLOOR: f64 = 1e-8;
    if params[..p].iter().any(|&d| d <= DIAG_FLOOR) {
        return None;
    }
    let l = params_to_factor(params, p);
    let l_inv = l.clone().solve_lower_triangular(&CMatrix::identity(p, p))?;
    let s = &l * l.adjoint();
    let t = l_inv.adjoint() * &l_inv;
    let value = objective_with_inverse(red, &s, &t).ok()?;
    value.is_finite().then_some(value)
}

/// Derivative-free descent over positive mixing matrices, parameterized by
/// their lower-triangular factors.
///
/// Pattern search over the `p²` real parameters: poll the coordinate
/// directions plus a fresh batch of seeded random directions at each step
/// size, move on the first improvement, halve the step after a failed poll.
/// The random directions matter: the objective is a product of largest
/// eigenvalues and is nonsmooth where eigenvalues coalesce, which is exactly
/// where the minimum tends to sit, and axis-only polling stalls there.
/// Monotone by construction, so the result never exceeds the starting value.
pub fn refine(red: &ReducedRep, s0: &CMatrix, cfg: &SearchConfig) -> Result<NormEstimate> {
    cfg.validate()?;
    let p = red.p();
    if p == 0 {
        return Ok(NormEstimate::exact(0.0, None));
    }
    if s0.nrows() != p || s0.ncols() != p {
        return Err(Error::DimensionMismatch(format!(
            "starting matrix must be {p}x{p}, got {}x{}",
            s0.nrows(),
            s0.ncols()
        )));
    }
    let hermitized = (s0 + s0.adjoint()) * re(0.5);
    let chol = nalgebra::Cholesky::new(hermitized).ok_or_else(|| {
        Error::InvalidParameter("starting matrix must be positive definite".into())
    })?;
    // The objective is scale invariant, so normalize the factor to keep the
    // absolute step sizes meaningful.
    let mut l = chol.l();
    let scale = l.norm() / (p as f64).sqrt();
    l /= re(scale);

    let mut best_params = factor_to_params(&l);
    let dim = param_count(p);
    let mut best = eval_factor(red, &best_params, p)
        .ok_or_else(|| Error::Numerical("starting matrix is numerically singular".into()))?;
    let mut evals = 1usize;
    let mut trace = vec![(0usize, best)];
    let mut poll_rng = stream_rng(cfg.seed, u32::MAX as usize);
    let mut last_success: Option<Vec<f64>> = None;

    let step = |params: &[f64], dir: &[f64], h: f64| -> Vec<f64> {
        params.iter().zip(dir).map(|(x, d)| x + h * d).collect()
    };

    let mut h = 0.25;
    'outer: while h > 1e-9 && evals < cfg.refine_max_evals {
        // Poll set: the last successful direction first, then signed
        // coordinate axes, then a fresh batch of signed random directions.
        let mut directions: Vec<Vec<f64>> = Vec::with_capacity(4 * dim + 1);
        if let Some(d) = &last_success {
            directions.push(d.clone());
        }
        for idx in 0..dim {
            for sign in [1.0, -1.0] {
                let mut d = vec![0.0; dim];
                d[idx] = sign;
                directions.push(d);
            }
        }
        for _ in 0..dim {
            let mut d: Vec<f64> = (0..dim)
                .map(|_| rand::Rng::random::<f64>(&mut poll_rng) * 2.0 - 1.0)
                .collect();
            let norm = d.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-12 {
                d.iter_mut().for_each(|x| *x /= norm);
                let neg = d.iter().map(|x| -x).collect();
                directions.push(d);
                directions.push(neg);
            }
        }

        let mut improved = false;
        for direction in &directions {
            if evals >= cfg.refine_max_evals {
                break 'outer;
            }
            let candidate = step(&best_params, direction, h);
            evals += 1;
            let Some(value) = eval_factor(red, &candidate, p) else {
                continue;
            };
            if value >= best {
                continue;
            }
            best = value;
            best_params = candidate;
            improved = true;
            trace.push((evals, best));
            // Expansion: keep doubling along the winning direction while it
            // pays off, which is what makes curved valleys affordable.
            let mut stride = 2.0 * h;
            while evals < cfg.refine_max_evals {
                let further = step(&best_params, direction, stride);
                evals += 1;
                match eval_factor(red, &further, p) {
                    Some(v) if v < best => {
                        best = v;
                        best_params = further;
                        trace.push((evals, best));
                        stride *= 2.0;
                    }
                    _ => break,
                }
            }
            last_success = Some(direction.clone());
            break;
        }
        if !improved {
            h *= 0.5;
            last_success = None;
        }
    }

    let l = params_to_factor(&best_params, p);
    Ok(NormEstimate {
        value: best,
        exact: false,
        best_s: Some(&l * l.adjoint()),
        lower_bound: None,
        trace,
        warning: None,
    })
}

/// CB norm of an arbitrary map.
///
/// Completely positive maps return `‖φ(I)‖` exactly; everything else is
/// reduced and minimized. The value is a valid upper bound in all cases.
pub fn cb_norm(rep: &GCKRep, cfg: &SearchConfig) -> Result<NormEstimate> {
    cfg.validate()?;
    let choi = rep.choi();
    let hermitian_defect = max_abs(&(choi.matrix() - choi.matrix().adjoint()));
    if hermitian_defect <= CP_TOL {
        let min_eig = choi.min_eigenvalue()?;
        if min_eig >= -CP_TOL {
            let warning = (min_eig < 0.0).then(|| {
                format!("borderline Choi spectrum: taking the CP fast path with min eigenvalue {min_eig:.3e}")
            });
            return Ok(NormEstimate::exact(rep.cp_cb_norm(), warning));
        }
    }

    let red = make_lin_indep(rep)?;
    let mut estimate = random_search(&red, cfg)?;
    if cfg.refine && !estimate.exact {
        if let Some(s0) = estimate.best_s.clone() {
            match refine(&red, &s0, cfg) {
                Ok(refined) => {
                    let mut floor = estimate.value;
                    for (step, value) in &refined.trace {
                        if *value < floor {
                            floor = *value;
                            estimate.trace.push((cfg.iterations + step, *value));
                        }
                    }
                    if refined.value < estimate.value {
                        estimate.value = refined.value;
                        estimate.best_s = refined.best_s;
                    }
                }
                // A start too close to singular for the factorization is no
                // reason to discard the search result.
                Err(err) => {
                    estimate.warning = Some(format!("refinement skipped: {err}"));
                }
            }
        }
    }
    Ok(estimate)
}

/// Diamond norm: the CB norm of the dual map.
pub fn diamond_norm(rep: &GCKRep, cfg: &SearchConfig) -> Result<NormEstimate> {
    cb_norm(&rep.dual(), cfg)
}

/// Lower bound on `‖φ‖_cb = ‖id_k ⊗ φ‖` from random unitary probes.
///
/// Unitaries are the extreme points of the unit ball, so the amplified
/// operator norm is the supremum over them; sampling therefore approaches
/// the CB norm from below and never exceeds it.
pub fn stabilized_lower_bound(rep: &GCKRep, cfg: &SearchConfig) -> Result<f64> {
    cfg.validate()?;
    let amplified = rep.tensor_with_identity(rep.k());
    let d = rep.n() * rep.k();
    let values: Vec<Result<f64>> = (0..cfg.iterations)
        .into_par_iter()
        .map(|index| {
            let mut rng = stream_rng(cfg.seed, index);
            let probe = random_unitary(d, &mut rng)?;
            Ok(operator_norm(&amplified.apply(&probe)?))
        })
        .collect();
    let mut best: f64 = 0.0;
    for value in values {
        best = best.max(value?);
    }
    Ok(best)
}

/// Lower bound on the plain operator norm `‖φ‖` from random unitary probes
/// on the unamplified map.
fn operator_norm_lower_bound(rep: &GCKRep, cfg: &SearchConfig) -> Result<f64> {
    let values: Vec<Result<f64>> = (0..cfg.iterations)
        .into_par_iter()
        .map(|index| {
            let mut rng = stream_rng(cfg.seed, index);
            let probe = random_unitary(rep.n(), &mut rng)?;
            Ok(operator_norm(&rep.apply(&probe)?))
        })
        .collect();
    let mut best: f64 = 0.0;
    for value in values {
        best = best.max(value?);
    }
    Ok(best)
}

/// Compute upper and lower bounds for one map and check they are ordered.
pub fn bounds_report(rep: &GCKRep, cfg: &SearchConfig) -> Result<BoundsReport> {
    let estimate = cb_norm(rep, cfg)?;
    let cb_lower = stabilized_lower_bound(rep, cfg)?;
    let phi_norm_lower = operator_norm_lower_bound(rep, cfg)?;
    if cb_lower > estimate.value + cfg.tol {
        return Err(Error::Numerical(format!(
            "bounds crossed: lower {cb_lower:.12e} exceeds upper {:.12e}",
            estimate.value
        )));
    }
    Ok(BoundsReport {
        cb_upper: estimate.value,
        exact: estimate.exact,
        cb_lower,
        phi_norm_lower,
        cap_factor: (rep.k() as f64).min((rep.n() as f64).powf(1.5)),
    })
}
