use proptest::prelude::*;
use xqr::data::{digitize, standardize, RawTable, StandardizedTable};
use xqr::encoding::{
    prepare_compact_memory_free, prepare_compact_with_memory, prepare_exact, prepare_one_hot_chain,
    success_probability_report, PreparedState, Scheme,
};
use xqr::measurement::exact_expectation;
use xqr::regression::{analytic_cost, apply_regression_map, PhaseVector};
use xqr::rng::Stream;

fn table(rows: usize, features: usize, seed: u64) -> StandardizedTable {
    let mut rng = Stream::new(seed);
    let v = (0..rows * (features + 1)).map(|_| rng.uniform_in(-1.0, 1.0)).collect();
    standardize(&RawTable::new(rows, features, v).unwrap(), false).unwrap()
}

fn cost(prep: &PreparedState, phases: &PhaseVector) -> f64 {
    let (psi0, _) = apply_regression_map(prep, phases).unwrap();
    exact_expectation(&psi0, &prep.layout).unwrap()
}

#[test]
fn all_exact_routes_agree_with_the_formula() {
    let mut rng = Stream::new(4);
    for rows in 2..=4 {
        for features in 1..=4 {
            let std = table(rows, features, rng.next_u64());
            for _ in 0..3 {
                let phases = PhaseVector::new((0..=features).map(|_| rng.uniform_in(-3.2, 3.2)).collect());
                let reference = analytic_cost(&std, &phases).unwrap();
                let routes = [
                    cost(&prepare_one_hot_chain(&std).unwrap(), &phases),
                    cost(&prepare_exact(&std, Scheme::OneHot).unwrap(), &phases),
                    cost(&prepare_exact(&std, Scheme::CompactBinary).unwrap(), &phases),
                ];
                for c in routes {
                    assert!((c - reference).abs() < 1e-9, "L{rows} M{features}: {c} vs {reference}");
                }
            }
        }
    }
}

#[test]
fn post_selection_probability_matches_closed_form() {
    for (rows, features, bits) in [(2, 1, 3), (3, 2, 5), (4, 3, 8)] {
        let dig = digitize(&table(rows, features, 12), bits).unwrap();
        let prep = prepare_compact_memory_free(&dig).unwrap();
        let report = success_probability_report(&dig);
        assert!((prep.success_probability - report.exact).abs() < 1e-12);
        assert!((prep.state.computed_norm_sqr() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn digitization_error_propagates_boundedly() {
    let mut rng = Stream::new(33);
    for (rows, features) in [(4, 3), (3, 2), (8, 1), (2, 5)] {
        for seed in 0..10 {
            let std = table(rows, features, 100 + seed);
            let phases = PhaseVector::new((0..=features).map(|_| rng.uniform_in(-3.2, 3.2)).collect());
            let exact = analytic_cost(&std, &phases).unwrap();
            let max_x = std.values().iter().fold(0.0f64, |a, v| a.max(v.abs()));

            // amplitudes sin(x) with no digitization at all
            let sines: Vec<f64> = std.values().iter().map(|x| x.sin()).collect();
            let norm = sines.iter().map(|v| v * v).sum::<f64>().sqrt();
            let limit = StandardizedTable::from_normalized(rows, features, sines.iter().map(|v| v / norm).collect())
                .unwrap();
            let limit_cost = analytic_cost(&limit, &phases).unwrap();

            for bits in 1..=12usize {
                let prep = prepare_compact_memory_free(&digitize(&std, bits).unwrap()).unwrap();
                let c = cost(&prep, &phases);
                let step = 0.5f64.powi(bits as i32);
                // constants fitted over these 40 tables: largest observed
                // ratios are 1.81 and 2.91
                let total_bound = 2.5 * (step + max_x.powi(3) / 6.0);
                assert!((c - exact).abs() <= total_bound, "L{rows} M{features} seed {seed} bits {bits}");
                assert!((c - limit_cost).abs() <= 4.0 * step, "L{rows} M{features} seed {seed} bits {bits}");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn memory_register_matches_memory_free(
        values in prop::collection::vec(-1.0f64..1.0, 6),
        bits in 1usize..=3,
    ) {
        let raw = RawTable::new(2, 2, values).unwrap();
        prop_assume!(standardize(&raw, false).is_ok());
        let dig = digitize(&standardize(&raw, false).unwrap(), bits).unwrap();
        let with = prepare_compact_with_memory(&dig).unwrap();
        let without = prepare_compact_memory_free(&dig).unwrap();
        prop_assert!((with.success_probability - without.success_probability).abs() < 1e-12);
        for (a, b) in with.state.amplitudes().iter().zip(without.state.amplitudes()) {
            prop_assert!((a - b).norm() < 1e-12);
        }
    }
}
