use proptest::prelude::*;

use smrelay::dmt::{dmt_theorem1, dmt_theorem2_lower, dmt_upper_bound, lp_oracle_ni, OutageRegionNI};

#[test]
fn closed_form_converges_to_cut_set_line() {
    for k in 1..=4usize {
        for n in [10usize, 100, 1000] {
            let gap = (0..=100)
                .map(|i| {
                    let r = i as f64 / 100.0;
                    dmt_upper_bound(k, r).unwrap() - dmt_theorem1(k, n, r).unwrap()
                })
                .fold(0.0, f64::max);
            let bound = (1.0 / n as f64).max(k as f64 / (n as f64 - 1.0));
            assert!(gap <= bound + 1e-12, "K={k} N={n} gap {gap}");
        }
    }
}

proptest! {
    #[test]
    fn curves_are_sandwiched(k in 2usize..=6, n in 2usize..=50, r in 0.0f64..=1.0) {
        let upper = dmt_upper_bound(k, r).unwrap();
        prop_assert!(dmt_theorem1(k, n, r).unwrap() <= upper + 1e-12);
        prop_assert!(dmt_theorem2_lower(k, n, r).unwrap() <= upper + 1e-12);
    }

    #[test]
    fn lp_minimizer_is_feasible_and_optimal(k in 1usize..=6, n in 2usize..=8, r in 0.0f64..=1.0) {
        let region = OutageRegionNI::new(k, n, r).unwrap();
        let (value, point) = region.minimize_vertices().unwrap();
        prop_assert!(region.contains(&point));
        prop_assert!((region.objective(&point) - value).abs() < 1e-12);
        prop_assert!((value - dmt_theorem1(k, n, r).unwrap()).abs() < 1e-9);
        prop_assert!((lp_oracle_ni(k, n, r).unwrap() - value).abs() < 1e-15);
    }
}
