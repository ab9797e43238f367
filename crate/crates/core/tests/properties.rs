use proptest::prelude::*;

use roth_core::bohr::{bohr_build, best_translate, dilate_bohr, size_doubling_check, BohrSpec};
use roth_core::constructions::{behrend, exact_sizes, greedy_3ap_free};
use roth_core::fourier::{convolve, count_3aps_set, parseval_residual};
use roth_core::increment::{dispatch, l2_increment};
use roth_core::span::{maximal_dissociated, span_of};
use roth_core::spectrum::{energy_2m, spectrum_at};
use roth_core::{CountMode, CyclicGroup, GroupSet, PipelineConfig, RealFunction, RunConfig, SetFile};

fn set_in(max_n: usize) -> impl Strategy<Value = GroupSet> {
    (2..=max_n).prop_flat_map(|n| {
        prop::collection::vec(any::<bool>(), n)
            .prop_map(move |bits| GroupSet::from_indicator(CyclicGroup::new(n).unwrap(), bits).unwrap())
    })
}

fn proper_set_in(max_n: usize) -> impl Strategy<Value = GroupSet> {
    set_in(max_n).prop_filter("0 < |A| < N", |s| !s.is_empty() && s.len() < s.modulus())
}

fn same_group_pair(max_n: usize) -> impl Strategy<Value = (GroupSet, GroupSet)> {
    (2..=max_n).prop_flat_map(|n| {
        let g = CyclicGroup::new(n).unwrap();
        (prop::collection::vec(any::<bool>(), n), prop::collection::vec(any::<bool>(), n)).prop_map(move |(x, y)| {
            (GroupSet::from_indicator(g, x).unwrap(), GroupSet::from_indicator(g, y).unwrap())
        })
    })
}

fn bohr_case() -> impl Strategy<Value = (CyclicGroup, BohrSpec)> {
    (3usize..400).prop_flat_map(|n| {
        (
            prop::collection::btree_set(1..n, 1..=3),
            0.01f64..0.5,
        )
            .prop_map(move |(freqs, r)| {
                (CyclicGroup::new(n).unwrap(), BohrSpec::new(freqs.into_iter().collect(), r).unwrap())
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn parseval_holds(a in set_in(300)) {
        prop_assert!(parseval_residual(&a) <= 1e-9);
    }

    #[test]
    fn progression_count_is_translation_invariant(a in set_in(150), t in any::<i64>()) {
        let before = count_3aps_set(&a, CountMode::Direct).unwrap();
        let after = count_3aps_set(&a.translate(t), CountMode::Direct).unwrap();
        prop_assert_eq!(before, after);
        prop_assert!(before >= a.len() as f64);
    }

    #[test]
    fn fourier_count_matches_direct_for_odd_n(a in set_in(201).prop_filter("odd N", |s| s.modulus() % 2 == 1)) {
        let direct = count_3aps_set(&a, CountMode::Direct).unwrap();
        let fourier = count_3aps_set(&a, CountMode::Fourier).unwrap();
        prop_assert_eq!(fourier.round(), direct);
    }

    #[test]
    fn convolution_commutes_and_preserves_mass(a in set_in(200), seed in any::<u64>()) {
        let n = a.modulus();
        let g = CyclicGroup::new(n).unwrap();
        let h: Vec<f64> = (0..n as u64).map(|i| ((i.wrapping_mul(seed | 1) % 97) as f64) / 97.0).collect();
        let f = RealFunction::indicator(&a);
        let h = RealFunction::new(g, h).unwrap();
        let fh = convolve(&f, &h).unwrap();
        let hf = convolve(&h, &f).unwrap();
        for (x, y) in fh.values().iter().zip(hf.values()) {
            prop_assert!((x - y).abs() <= 1e-9 * (1.0 + x.abs()));
        }
        let mass = f.sum() * h.sum();
        prop_assert!((fh.sum() - mass).abs() <= 1e-9 * (1.0 + mass.abs()));
    }

    #[test]
    fn energy_modes_agree(a in set_in(80).prop_filter("small", |s| s.len() <= 12 && !s.is_empty()), m in 1u32..=3) {
        let direct = energy_2m(&a, m, CountMode::Direct).unwrap();
        let fourier = energy_2m(&a, m, CountMode::Fourier).unwrap();
        prop_assert_eq!(fourier.round(), direct);
        // diagonal tuples give E_{2m} >= |A|^m
        prop_assert!(direct >= (a.len() as f64).powi(m as i32));
    }

    #[test]
    fn bohr_sets_are_symmetric_and_monotone((g, spec) in bohr_case()) {
        let b = bohr_build(g, &spec).unwrap();
        prop_assert!(b.elements.contains(0));
        prop_assert_eq!(b.elements.negate(), b.elements.clone());
        let half = dilate_bohr(&b, 0.5).unwrap();
        prop_assert!(half.elements.is_subset(&b.elements));
        prop_assert!(size_doubling_check(g, &spec).unwrap().holds);
    }

    #[test]
    fn span_cover_contains_spectrum(a in proper_set_in(200), theta in 0.2f64..0.9) {
        let spec = spectrum_at(&a, theta).unwrap().frequencies;
        let cover = maximal_dissociated(&spec);
        prop_assert!(spec.is_subset(&span_of(&cover.lambda_set())));
        prop_assert!(cover.verify());
    }

    #[test]
    fn best_translate_is_the_maximum((a, b) in same_group_pair(120)) {
        prop_assume!(!a.is_empty() && !b.is_empty());
        let bt = best_translate(&a, &b).unwrap();
        let max = (0..a.modulus() as i64).map(|t| a.translate(t).intersection_size(&b)).max().unwrap();
        prop_assert_eq!(bt.count, max);
    }

    #[test]
    fn l2_factor_at_least_one(a in proper_set_in(150), extra in 1usize..150) {
        let mut gamma = spectrum_at(&a, 0.3).unwrap().frequencies;
        gamma.insert(extra % a.modulus());
        prop_assume!(gamma.iter().any(|r| r != 0));
        let res = l2_increment(&a, &gamma, &PipelineConfig::default()).unwrap();
        prop_assert!(res.factor >= 1.0);
        prop_assert!(res.recount(&a).is_ok());
    }

    #[test]
    fn setfile_text_round_trip(a in set_in(300)) {
        let f = SetFile::from_set(&a);
        prop_assert_eq!(SetFile::parse(&f.to_text()).unwrap(), f.clone());
        prop_assert_eq!(SetFile::parse(&f.to_json()).unwrap().to_group_set().unwrap(), a);
    }

    #[test]
    fn run_config_round_trip(mu in 0.001f64..0.099, extra in 0.0f64..0.5, c in 0.01f64..100.0, seed in any::<u64>(), l in proptest::option::of(1.0f64..50.0)) {
        let mut cfg = RunConfig::default();
        cfg.pipeline.mu = mu;
        cfg.pipeline.f = mu + extra;
        cfg.pipeline.c_omega = c;
        cfg.pipeline.seed = seed;
        cfg.pipeline.large_l = l;
        prop_assert_eq!(RunConfig::parse(&cfg.to_text()).unwrap(), cfg);
    }

    #[test]
    fn constructions_are_progression_free(n in 2usize..400) {
        prop_assert!(greedy_3ap_free(n).unwrap().verified_free);
        let b = behrend(n).unwrap();
        prop_assert!(b.verified_free);
        prop_assert!(b.set.iter().all(|&x| x >= 1 && x <= n as u64));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn dispatch_recounts_and_never_loses_density(a in proper_set_in(160), seed in any::<u64>()) {
        let cfg = PipelineConfig { seed, ..Default::default() };
        let res = dispatch(&a, &cfg).unwrap();
        prop_assert!(res.factor >= 1.0);
        prop_assert!(res.recount(&a).is_ok());
    }
}

#[test]
fn exact_sizes_step_by_at_most_one() {
    let r = exact_sizes(50).unwrap();
    assert!(r.windows(2).all(|w| w[1] == w[0] || w[1] == w[0] + 1));
    for n in 2..=50 {
        assert!(r[n] >= greedy_3ap_free(n).unwrap().size);
        assert!(r[n] >= behrend(n).unwrap().size);
    }
}
