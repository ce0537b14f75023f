//! Randomized invariants across modules.

use proptest::prelude::*;

use mzreach::numerics::{orthogonality_residual, random_orthogonal};
use mzreach::projsel::{givens_rotation, l1_svd, retract, project_tangent};
use mzreach::reduction::{box_bound, generator_budget, girard_reduce, projected_reduce};
use mzreach::volume::{exact_volume, DEFAULT_SUBSET_CAP};
use mzreach::{ConstrainedZonotope, Matrix, MatrixZonotope, Rng, Vector, Zonotope};

fn zonotope(rng: &mut Rng, n: usize, p: usize) -> Zonotope {
    Zonotope::new(rng.normal_vector(n), rng.normal_matrix(n, p)).unwrap()
}

fn contains_by_support(outer: &Zonotope, inner: &Zonotope, rng: &mut Rng) -> bool {
    (0..100).all(|_| {
        let d = rng.normal_vector(outer.dim());
        let si = inner.support(&d).unwrap();
        outer.support(&d).unwrap() >= si - 1e-9 * si.abs().max(1.0)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn girard_encloses_and_respects_budget(seed in any::<u64>(), n in 2usize..6, extra in 0usize..12, rho in 1.0f64..4.0) {
        let mut rng = Rng::new(seed);
        let z = zonotope(&mut rng, n, n + extra);
        let (r, report) = girard_reduce(&z, rho).unwrap();
        prop_assert!(r.num_generators() <= z.num_generators().max(generator_budget(n, rho)));
        prop_assert_eq!(report.kept_indices.len() + report.discarded_indices.len(), z.num_generators());
        prop_assert!(contains_by_support(&r, &z, &mut rng));
    }

    #[test]
    fn projected_reduction_encloses(seed in any::<u64>(), n in 2usize..6, extra in 1usize..10) {
        let mut rng = Rng::new(seed);
        let z = zonotope(&mut rng, n, n + extra);
        let p = random_orthogonal(n, &mut rng);
        let (r, _) = projected_reduce(&z, &p, 1.5).unwrap();
        prop_assert!(contains_by_support(&r, &z, &mut rng));
    }

    #[test]
    fn box_volume_never_exceeds_bound(seed in any::<u64>(), n in 1usize..6, m in 1usize..12) {
        let mut rng = Rng::new(seed);
        let g = rng.normal_matrix(n, m);
        let p = random_orthogonal(n, &mut rng);
        let (vol, bound) = box_bound(&g, &p);
        prop_assert!(vol <= bound * (1.0 + 1e-12));
    }

    #[test]
    fn volume_is_rotation_invariant_and_homogeneous(seed in any::<u64>(), n in 1usize..5, extra in 0usize..5, s in 0.1f64..3.0) {
        let mut rng = Rng::new(seed);
        let z = zonotope(&mut rng, n, n + extra);
        let v = exact_volume(&z, DEFAULT_SUBSET_CAP).unwrap().value;
        let q = random_orthogonal(n, &mut rng);
        let vq = exact_volume(&z.linear_map(&q).unwrap(), DEFAULT_SUBSET_CAP).unwrap().value;
        let vs = exact_volume(&z.linear_map(&(Matrix::identity(n, n) * s)).unwrap(), DEFAULT_SUBSET_CAP).unwrap().value;
        prop_assert!((vq - v).abs() <= 1e-9 * v);
        prop_assert!((vs - s.powi(n as i32) * v).abs() <= 1e-9 * vs.max(v));
    }

    #[test]
    fn plane_rotations_are_proper(n in 2usize..7, a in 0usize..6, b in 0usize..6, theta in -4.0f64..4.0) {
        prop_assume!(a < b && b < n);
        let g = givens_rotation(a, b, theta, n).unwrap();
        prop_assert!(orthogonality_residual(&g) <= 1e-12);
        prop_assert!((g.determinant() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn retraction_lands_on_the_group(seed in any::<u64>(), n in 2usize..6, scale in 0.0f64..10.0) {
        let mut rng = Rng::new(seed);
        let p = random_orthogonal(n, &mut rng);
        let xi = project_tangent(&p, &(rng.normal_matrix(n, n) * scale));
        prop_assert!(orthogonality_residual(&retract(&p, &xi).unwrap()) <= 1e-10);
    }

    #[test]
    fn l1_svd_basis_is_orthogonal(seed in any::<u64>(), n in 2usize..6, m in 1usize..3, k in 1usize..6) {
        let mut rng = Rng::new(seed);
        let gens = (0..k).map(|_| rng.normal_matrix(n, n + m)).collect();
        let mz = MatrixZonotope::new(rng.normal_matrix(n, n + m), gens).unwrap();
        prop_assert!(orthogonality_residual(&l1_svd(&mz).unwrap().p) <= 1e-10);
    }

    #[test]
    fn matrix_product_contains_pointwise_products(seed in any::<u64>(), n in 1usize..5, k in 1usize..5) {
        let mut rng = Rng::new(seed);
        let gens = (0..k).map(|_| rng.normal_matrix(n, n)).collect();
        let mz = MatrixZonotope::new(rng.normal_matrix(n, n), gens).unwrap();
        let z = zonotope(&mut rng, n, n + 1);
        let prod = mz.times_zonotope(&z).unwrap();
        for _ in 0..10 {
            let beta: Vec<f64> = (0..k).map(|_| rng.box_coeff()).collect();
            let x = mz.matrix_at(&beta).unwrap() * z.sample(&mut rng);
            prop_assert!(prod.contains_point(&x, 1e-8));
        }
    }

    #[test]
    fn intersection_lies_in_both_operands(seed in any::<u64>(), n in 1usize..4) {
        let mut rng = Rng::new(seed);
        let a = zonotope(&mut rng, n, n + 2);
        let mut b = zonotope(&mut rng, n, n + 2);
        // shift b onto a sampled point of a so the intersection is non-empty
        let shift = a.sample(&mut rng) - b.center();
        b = Zonotope::new(b.center() + shift, b.generators().clone()).unwrap();
        let ca = ConstrainedZonotope::from(a.clone());
        let inter = ca.intersect(&ConstrainedZonotope::from(b.clone()), &Matrix::identity(n, n)).unwrap();
        for _ in 0..20 {
            let d: Vector = rng.normal_vector(n);
            let s = inter.support(&d).unwrap();
            prop_assert!(s <= a.support(&d).unwrap() + 1e-7);
            prop_assert!(s <= b.support(&d).unwrap() + 1e-7);
        }
    }
}
