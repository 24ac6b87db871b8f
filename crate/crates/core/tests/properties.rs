use minpen::functional::{fourier_design_matrix, FourierCoefficients, GridDesign};
use minpen::linear::{chi_square, exact_risk, ModelCollection, ModelSpec, OrthonormalBasis};
use minpen::randomness::{derive_seed, Seed};
use minpen::selection::{select, select_cached, CoefficientCache, PenaltyRule, PenaltyScale};
use minpen::talagrand::{convex_distance, cube_point, FinitePointSet};
use proptest::prelude::*;

fn nested(max_dim: usize) -> ModelCollection {
    ModelCollection::new((1..=max_dim).map(ModelSpec::prefix).collect(), vec![1.0; max_dim]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn selected_dimension_falls_as_kappa_grows(seed in any::<u64>(), n in 16usize..80) {
        let basis = fourier_design_matrix(n, n - 1).unwrap();
        let y: Vec<f64> = derive_seed(Seed(seed), 0).sampler().next_vector(n).into_inner();
        let collection = nested(n - 1);
        let cache = CoefficientCache::new(&y, &basis, n - 1).unwrap();
        let mut last = usize::MAX;
        for k in 0..20 {
            let pen = PenaltyRule::linear_dim(k as f64 * 0.25, 1.0, PenaltyScale::OneOverN(n)).unwrap();
            let d = select_cached(&cache, &collection, &pen).unwrap().chosen_dim;
            prop_assert!(d <= last);
            last = d;
        }
    }

    #[test]
    fn cached_and_direct_selection_agree(seed in any::<u64>(), kappa in 0.0f64..4.0) {
        let n = 40;
        let basis = OrthonormalBasis::random_rotation(n, 20, Seed(seed)).unwrap();
        let y = derive_seed(Seed(seed), 1).sampler().next_vector(n).into_inner();
        let collection = nested(20);
        let pen = PenaltyRule::linear_dim(kappa, 1.0, PenaltyScale::Unit).unwrap();
        let a = select(&y, &basis, &collection, &pen).unwrap();
        let b = select_cached(&CoefficientCache::new(&y, &basis, 20).unwrap(), &collection, &pen).unwrap();
        prop_assert_eq!(a.chosen, b.chosen);
        prop_assert!((a.criterion_min - b.criterion_min).abs() < 1e-12);
    }

    #[test]
    fn chi_square_is_monotone_in_nested_models(seed in any::<u64>()) {
        let basis = OrthonormalBasis::random_rotation(30, 30, Seed(seed)).unwrap();
        let eps = derive_seed(Seed(seed), 2).sampler().next_vector(30).into_inner();
        let mut last = 0.0;
        for d in 1..=30 {
            let c = chi_square(&eps, &basis, &ModelSpec::prefix(d)).unwrap();
            prop_assert!(c >= last - 1e-12);
            last = c;
        }
        prop_assert!((last - 30.0).abs() < 1e-9);
    }

    #[test]
    fn exact_risk_splits_into_bias_and_variance(seed in any::<u64>(), sigma in 0.0f64..3.0, d in 1usize..10) {
        let basis = OrthonormalBasis::random_rotation(12, 10, Seed(seed)).unwrap();
        let f = derive_seed(Seed(seed), 3).sampler().next_vector(12).into_inner();
        let r0 = exact_risk(&f, &basis, &ModelSpec::prefix(d), 0.0).unwrap();
        let r = exact_risk(&f, &basis, &ModelSpec::prefix(d), sigma).unwrap();
        prop_assert!((r - r0 - sigma * sigma * d as f64).abs() < 1e-9);
    }

    #[test]
    fn convex_distance_is_below_hamming_distance(n in 2usize..9, size in 1usize..6, code in any::<u32>(), seed in any::<u64>()) {
        let size = size.min(1 << n);
        let set = FinitePointSet::random_subset(n, size, Seed(seed)).unwrap();
        let x = cube_point(n, code % (1 << n));
        let r = convex_distance(&x, &set, 1e-8).unwrap();
        let nearest = set
            .points()
            .iter()
            .map(|p| p.iter().zip(&x).filter(|(a, b)| a != b).count())
            .min()
            .unwrap();
        prop_assert!(r.primal_value <= r.value + 1e-12);
        prop_assert!(r.value <= (nearest as f64).sqrt() + 1e-9);
        prop_assert!(r.value <= (n as f64).sqrt() + 1e-9);
    }

    #[test]
    fn grid_synthesis_inverts_coefficients(theta in prop::collection::vec(-2.0f64..2.0, 1..15)) {
        let design = GridDesign::new(32).unwrap().fourier();
        let coeffs = FourierCoefficients::new(theta.clone()).unwrap();
        let back = design.coefficients(&coeffs.grid_values(&design), theta.len()).unwrap();
        for (a, b) in back.iter().zip(&theta) {
            prop_assert!((a - b).abs() < 1e-10);
        }
    }
}
