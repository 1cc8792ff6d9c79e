use smrelay::channel::{sample_channel, StreamKey};
use smrelay::oracle::mutual_information_eigen;
use smrelay::outage::{
    fit_diversity_slope, general_mutual_information, monte_carlo_outage, outage_general, MonteCarloPlan, OutageModel,
    SubchannelRates,
};
use smrelay::scheme::{build_equivalent_channel, AmplificationGains};
use smrelay::topology::InterferenceGraph;

fn db(v: f64) -> f64 {
    10f64.powf(v / 10.0)
}

#[test]
fn log_det_agrees_with_eigen_route() {
    let graph = InterferenceGraph::complete(2);
    for t in 0..500 {
        let re = sample_channel(&graph, StreamKey::new(31, 0, t));
        for power in [db(10.0), db(30.0), db(60.0)] {
            let gains = AmplificationGains::interference_clipped(&re, power);
            let ec = build_equivalent_channel(&re, &gains, 2, 2).unwrap();
            let a = general_mutual_information(&ec, power).unwrap();
            let b = mutual_information_eigen(&ec, power);
            assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0), "{a} vs {b}");
            for r in [0.1, 0.3, 0.5, 0.7] {
                let target = 5.0 * r * power.log2();
                if (b - target).abs() > 1e-6 {
                    assert_eq!(outage_general(&ec, power, r).unwrap(), b <= target);
                }
            }
        }
    }
}

#[test]
fn dead_uplink_is_always_in_outage() {
    let graph = InterferenceGraph::complete(3);
    let mut re = sample_channel(&graph, StreamKey::new(1, 0, 0));
    for h in re.h.iter_mut() {
        *h = num_complex::Complex64::new(0.0, 0.0);
    }
    let power = db(30.0);
    let gains = AmplificationGains::interference_clipped(&re, power);
    let ec = build_equivalent_channel(&re, &gains, 3, 2).unwrap();
    assert_eq!(general_mutual_information(&ec, power).unwrap(), 0.0);
    assert!(outage_general(&ec, power, 0.01).unwrap());
}

#[test]
fn interference_free_log_det_is_sum_of_rates() {
    for (k, n) in [(1, 2), (2, 2), (3, 4), (4, 3)] {
        let graph = InterferenceGraph::empty(k);
        for t in 0..100 {
            let re = sample_channel(&graph, StreamKey::new(8, k as u64, t));
            let power = db(25.0);
            let gains = AmplificationGains::interference_clipped(&re, power);
            let ec = build_equivalent_channel(&re, &gains, k, n).unwrap();
            let mi = general_mutual_information(&ec, power).unwrap();
            let sum: f64 = SubchannelRates::with_gains(&re, &gains, power).rates.iter().sum();
            assert!((mi - n as f64 * sum).abs() <= 1e-9 * mi.max(1.0));
        }
    }
}

#[test]
fn estimates_do_not_depend_on_thread_count() {
    let model = OutageModel::General {
        graph: InterferenceGraph::complete(3),
        subblocks: 2,
    };
    let plan = MonteCarloPlan {
        trials: 150_000,
        min_outages: Some(200),
        seed: 4,
        point: 9,
    };
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| monte_carlo_outage(&model, &plan, db(20.0), 0.4).unwrap())
    };
    let one = run(1);
    assert_eq!(one, run(2));
    assert_eq!(one, run(5));
}

#[test]
fn outage_falls_with_snr() {
    let model = OutageModel::NoInterference {
        relays: 2,
        subblocks: 2,
    };
    let estimates: Vec<_> = [20.0, 25.0, 30.0, 35.0, 40.0, 45.0]
        .iter()
        .enumerate()
        .map(|(i, &d)| {
            let plan = MonteCarloPlan {
                trials: 200_000,
                min_outages: None,
                seed: 12,
                point: i as u64,
            };
            monte_carlo_outage(&model, &plan, db(d), 0.5).unwrap()
        })
        .collect();
    for w in estimates.windows(2) {
        let slack = 3.0 * (w[0].std_error().powi(2) + w[1].std_error().powi(2)).sqrt();
        assert!(w[1].p_hat <= w[0].p_hat + slack);
        assert!(w[0].ci95.0 <= w[0].p_hat && w[0].p_hat <= w[0].ci95.1);
    }
}

#[test]
fn single_path_slope_matches_point_to_point() {
    let model = OutageModel::SingleSubchannel;
    let estimates: Vec<_> = [20.0, 25.0, 30.0, 35.0, 40.0, 45.0]
        .iter()
        .enumerate()
        .map(|(i, &d)| {
            let plan = MonteCarloPlan {
                trials: 300_000,
                min_outages: None,
                seed: 3,
                point: i as u64,
            };
            monte_carlo_outage(&model, &plan, db(d), 0.5).unwrap()
        })
        .collect();
    let fit = fit_diversity_slope(&estimates).unwrap();
    assert!((fit.slope - 0.5).abs() <= 0.15, "slope {}", fit.slope);
}
