//! Property tests for invariants that must hold across random inputs
//! rather than at hand-picked points.

use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use cbnorm::closedform::unitary_diff_norm;
use cbnorm::minimizer::{objective, random_search, SearchConfig};
use cbnorm::numerics::{
    self, coordinates_in_basis, hermitian_eigenvalues, max_abs, operator_norm,
    random_positive_with_inverse, random_unitary, row_basis, singular_values, trace_norm, RANK_TOL,
};
use cbnorm::reduction::{make_lin_indep, tensor_rank};
use cbnorm::superop::{matrix_unit, GCKRep, CP_TOL};
use cbnorm::{CMatrix, CVector, C64};

fn complex_entry() -> impl Strategy<Value = C64> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(re, im)| C64::new(re, im))
}

fn cmatrix(rows: usize, cols: usize) -> impl Strategy<Value = CMatrix> {
    prop::collection::vec(complex_entry(), rows * cols)
        .prop_map(move |v| CMatrix::from_fn(rows, cols, |i, j| v[i * cols + j]))
}

fn gck_rep(n: usize, k: usize, m: usize) -> impl Strategy<Value = GCKRep> {
    (
        prop::collection::vec(cmatrix(k, n), m),
        prop::collection::vec(cmatrix(n, k), m),
    )
        .prop_map(move |(a, b)| {
            GCKRep::new(n, k, a.into_iter().zip(b).collect()).expect("consistent shapes")
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn operator_norm_is_unitarily_invariant(m in cmatrix(3, 4), seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_unitary(3, &mut rng).unwrap();
        let v = random_unitary(4, &mut rng).unwrap();
        let rotated = &u * &m * &v;
        prop_assert!((operator_norm(&rotated) - operator_norm(&m)).abs() <= 1e-10);
    }

    #[test]
    fn trace_norm_dominates_operator_norm(m in cmatrix(3, 3)) {
        prop_assert!(trace_norm(&m) >= operator_norm(&m) - 1e-12);
    }

    #[test]
    fn positive_pair_properties(seed in 0u64..1000, d in 1usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (p, q) = random_positive_with_inverse(d, 1e-3, 1.0, &mut rng).unwrap();
        let eigs = hermitian_eigenvalues(&p).unwrap();
        prop_assert!(eigs.iter().all(|&x| x > 1e-3 - 1e-10 && x <= 1.0 + 1e-10));
        let eye = CMatrix::identity(d, d);
        prop_assert!(max_abs(&(&p * &q - &eye)) <= 1e-8);
        prop_assert!(max_abs(&(&p * &q - &q * &p)) <= 1e-8);
    }

    #[test]
    fn row_basis_reconstructs_inputs(vecs in prop::collection::vec(prop::collection::vec(complex_entry(), 6), 1..5)) {
        let rows: Vec<CVector> = vecs.iter().map(|v| CVector::from_vec(v.clone())).collect();
        let (basis, rank) = row_basis(&rows, RANK_TOL).unwrap();
        prop_assert!(rank <= rows.len());
        for v in &rows {
            if v.norm() == 0.0 { continue; }
            let coeffs = coordinates_in_basis(v, &basis).unwrap();
            let mut recon = CVector::zeros(v.len());
            for (c, b) in coeffs.iter().zip(&basis) {
                recon += b * *c;
            }
            prop_assert!((recon - v).norm() <= 1e-9 * v.norm());
        }
    }

    #[test]
    fn dual_satisfies_trace_pairing(rep in gck_rep(2, 3, 2)) {
        let dual = rep.dual();
        for i in 0..2 {
            for j in 0..2 {
                for a in 0..3 {
                    for b in 0..3 {
                        let x = matrix_unit(2, i, j);
                        let y = matrix_unit(3, a, b);
                        let lhs = (rep.apply(&x).unwrap() * &y).trace();
                        let rhs = (x * dual.apply(&y).unwrap()).trace();
                        prop_assert!((lhs - rhs).norm() <= 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn choi_is_linear_under_subtract(r1 in gck_rep(2, 2, 2), r2 in gck_rep(2, 2, 3)) {
        let diff = r1.subtract(&r2).unwrap();
        let expect = r1.choi().matrix() - r2.choi().matrix();
        prop_assert!(max_abs(&(diff.choi().matrix() - expect)) <= 1e-12);
    }

    #[test]
    fn kraus_maps_are_completely_positive(ops in prop::collection::vec(cmatrix(3, 2), 1..4)) {
        let rep = GCKRep::from_kraus(&ops).unwrap();
        prop_assert!(rep.is_cp(CP_TOL).unwrap());
    }

    #[test]
    fn choi_round_trip_preserves_the_map(rep in gck_rep(2, 3, 2)) {
        let recovered = GCKRep::from_choi(&rep.choi()).unwrap();
        prop_assert!(max_abs(&(recovered.choi().matrix() - rep.choi().matrix())) <= 1e-10);
        for i in 0..2 {
            for j in 0..2 {
                let x = matrix_unit(2, i, j);
                let diff = recovered.apply(&x).unwrap() - rep.apply(&x).unwrap();
                prop_assert!(max_abs(&diff) <= 1e-10);
            }
        }
    }

    #[test]
    fn reduction_preserves_the_map_and_rank(rep in gck_rep(2, 2, 3), dup in 0usize..3) {
        // Inject exact dependencies by appending scaled copies of terms.
        let mut terms = rep.terms().to_vec();
        for idx in 0..dup {
            let (a, b) = terms[idx % terms.len()].clone();
            terms.push((a * C64::new(0.5, 0.25), b));
        }
        let padded = GCKRep::new(2, 2, terms).unwrap();
        let red = make_lin_indep(&padded).unwrap();

        prop_assert!(red.p() <= 4);
        for i in 0..2 {
            for j in 0..2 {
                let x = matrix_unit(2, i, j);
                let diff = red.apply(&x).unwrap() - padded.apply(&x).unwrap();
                prop_assert!(max_abs(&diff) <= 1e-10);
            }
        }

        // Tensor rank equals the numerical rank of the Choi matrix.
        let sv = singular_values(padded.choi().matrix()).unwrap();
        let cutoff = RANK_TOL * sv.first().copied().unwrap_or(0.0);
        let choi_rank = sv.iter().filter(|&&s| s > cutoff).count();
        prop_assert_eq!(red.p(), choi_rank);

        // Idempotence.
        let again = make_lin_indep(&red.to_rep()).unwrap();
        prop_assert_eq!(again.p(), red.p());
    }

    #[test]
    fn objective_is_scale_invariant(rep in gck_rep(2, 2, 2), seed in 0u64..1000) {
        let red = make_lin_indep(&rep).unwrap();
        prop_assume!(red.p() >= 1);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (s, _) = random_positive_with_inverse(red.p(), 0.1, 1.0, &mut rng).unwrap();
        let base = objective(&red, &s).unwrap();
        for c in [0.1, 2.0, 10.0] {
            let scaled = objective(&red, &(&s * C64::new(c, 0.0))).unwrap();
            prop_assert!((scaled - base).abs() <= 1e-12 * base.max(1.0));
        }
    }

    #[test]
    fn closed_form_is_rotation_invariant(seed in 0u64..1000, theta in 0.0..std::f64::consts::TAU) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_unitary(3, &mut rng).unwrap();
        let base = unitary_diff_norm(&u).unwrap();
        let rotated = &u * C64::from_polar(1.0, theta);
        prop_assert!((unitary_diff_norm(&rotated).unwrap() - base).abs() <= 1e-10);
        prop_assert!((0.0..=2.0 + 1e-12).contains(&base));
    }
}

/// Upper-bound soundness of the minimization objective: no mixing matrix may dip
/// below the exact norm. Exercised against both available oracles.
#[test]
fn objective_never_undershoots_the_exact_norm() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x50c4);

    // Closed-form oracle: unitary-difference maps.
    for trial in 0..4 {
        let n = 2 + trial % 3;
        let u = random_unitary(n, &mut rng).unwrap();
        let exact = unitary_diff_norm(&u).unwrap();
        let rep = GCKRep::from_unitary_pair(&u, &CMatrix::identity(n, n)).unwrap();
        let red = make_lin_indep(&rep).unwrap();
        if red.p() == 0 {
            continue;
        }
        for _ in 0..250 {
            let (s, _) = random_positive_with_inverse(red.p(), 1e-3, 1.0, &mut rng).unwrap();
            let value = objective(&red, &s).unwrap();
            assert!(
                value >= exact - 1e-8,
                "objective {value} undercut the exact norm {exact}"
            );
        }
    }

    // CP oracle: the norm of a completely positive map is the norm at I.
    for _ in 0..4 {
        let ops: Vec<CMatrix> = (0..2)
            .map(|_| {
                let mut local = rng.clone();
                let m = CMatrix::from_fn(2, 2, |_, _| {
                    C64::new(
                        rand::Rng::random::<f64>(&mut local) - 0.5,
                        rand::Rng::random::<f64>(&mut local) - 0.5,
                    )
                });
                rng = local;
                m
            })
            .collect();
        let rep = GCKRep::from_kraus(&ops).unwrap();
        let exact = rep.cp_cb_norm();
        let red = make_lin_indep(&rep).unwrap();
        for _ in 0..250 {
            let (s, _) = random_positive_with_inverse(red.p(), 1e-3, 1.0, &mut rng).unwrap();
            let value = objective(&red, &s).unwrap();
            assert!(value >= exact - 1e-8);
        }
    }
}

/// The reduced E-span is a representation invariant: reducing two different
/// term lists for the same map yields families with equal spans.
#[test]
fn reduced_spans_are_representation_invariants() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5a11);
    for _ in 0..8 {
        let base = CMatrix::from_fn(2, 2, |_, _| {
            C64::new(
                rand::Rng::random::<f64>(&mut rng) - 0.5,
                rand::Rng::random::<f64>(&mut rng) - 0.5,
            )
        });
        let other = CMatrix::from_fn(2, 2, |_, _| {
            C64::new(
                rand::Rng::random::<f64>(&mut rng) - 0.5,
                rand::Rng::random::<f64>(&mut rng) - 0.5,
            )
        });
        let b1 = CMatrix::from_fn(2, 2, |_, _| {
            C64::new(
                rand::Rng::random::<f64>(&mut rng) - 0.5,
                rand::Rng::random::<f64>(&mut rng) - 0.5,
            )
        });
        let b2 = CMatrix::from_fn(2, 2, |_, _| {
            C64::new(
                rand::Rng::random::<f64>(&mut rng) - 0.5,
                rand::Rng::random::<f64>(&mut rng) - 0.5,
            )
        });
        let rep1 = GCKRep::new(
            2,
            2,
            vec![(base.clone(), b1.clone()), (other.clone(), b2.clone())],
        )
        .unwrap();
        let rep2 = GCKRep::new(
            2,
            2,
            vec![
                (&base + &other, b1.clone()),
                (other.clone(), &b2 - &b1),
                (base.clone() * C64::new(2.0, 0.0), &b1 * C64::new(0.0, 0.0)),
            ],
        )
        .unwrap();

        let red1 = make_lin_indep(&rep1).unwrap();
        let red2 = make_lin_indep(&rep2).unwrap();
        assert_eq!(red1.p(), red2.p());

        let flatten = |m: &CMatrix| {
            CVector::from_fn(m.nrows() * m.ncols(), |idx, _| {
                m[(idx / m.ncols(), idx % m.ncols())]
            })
        };
        let vecs1: Vec<CVector> = red1.e_family().iter().map(&flatten).collect();
        let (basis1, _) = row_basis(&vecs1, RANK_TOL).unwrap();
        for e in red2.e_family() {
            assert!(coordinates_in_basis(&flatten(e), &basis1).is_ok());
        }
    }
}

/// Star symmetry: the star map shares the CB norm, so both searches must
/// upper-bound the same closed form and refinement lands both within 1%.
#[test]
fn star_map_norm_agrees_with_original() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x57a6);
    let u = random_unitary(3, &mut rng).unwrap();
    let exact = unitary_diff_norm(&u).unwrap();
    let rep = GCKRep::from_unitary_pair(&u, &CMatrix::identity(3, 3)).unwrap();
    let cfg = SearchConfig {
        iterations: 600,
        seed: 2,
        refine: true,
        ..SearchConfig::default()
    };
    let direct = cbnorm::minimizer::cb_norm(&rep, &cfg).unwrap();
    let starred = cbnorm::minimizer::cb_norm(&rep.star(), &cfg).unwrap();
    assert!(direct.value >= exact - 1e-8);
    assert!(starred.value >= exact - 1e-8);
    assert!((direct.value - exact).abs() <= 0.01 * exact);
    assert!((starred.value - exact).abs() <= 0.01 * exact);
}

/// Identity maps stay fixed through every representation conversion.
#[test]
fn representation_conversions_fix_the_identity_map() {
    let rep = GCKRep::new(
        3,
        3,
        vec![(CMatrix::identity(3, 3), CMatrix::identity(3, 3))],
    )
    .unwrap();
    assert_eq!(tensor_rank(&rep).unwrap(), 1);
    let via_choi = GCKRep::from_choi(&rep.choi()).unwrap();
    let x = CMatrix::from_fn(3, 3, |i, j| C64::new(i as f64, j as f64));
    assert_abs_diff_eq!(
        max_abs(&(via_choi.apply(&x).unwrap() - rep.apply(&x).unwrap())),
        0.0,
        epsilon = 1e-10
    );
    let search = random_search(
        &make_lin_indep(&rep).unwrap(),
        &SearchConfig {
            iterations: 32,
            seed: 5,
            ..SearchConfig::default()
        },
    )
    .unwrap();
    assert_abs_diff_eq!(search.value, 1.0, epsilon = 1e-10);
    assert!(numerics::all_finite(rep.choi().matrix()));
}
