use super::*;

fn pair_chain() -> DetectionChain {
    DetectionChain::paper()
}

fn stream(channels: Vec<Vec<f64>>) -> TagStream {
    TagStream::new(channels, 1e9, 0, 0).unwrap()
}

#[test]
fn efficiencies_of_fiber_chain() {
    let (s, c) = chain_efficiencies(&pair_chain());
    assert!((s - 0.2322).abs() < 1e-12, "{s}");
    assert!((c - 0.059_907_6).abs() < 1e-9, "{c}");
    assert!((s - 0.23).abs() < 0.005 && (c - 0.06).abs() < 0.001);
    let mut ideal = pair_chain();
    (ideal.eta_coup, ideal.eta_inser, ideal.eta_det) = (1.0, 1.0, 1.0);
    assert_eq!(chain_efficiencies(&ideal), (1.0, 1.0));
    ideal.eta_det = 0.0;
    assert_eq!(chain_efficiencies(&ideal), (0.0, 0.0));
}

#[test]
fn chain_validation() {
    let mut c = pair_chain();
    c.eta_inser = 1.2;
    assert!(matches!(
        c.validate(),
        Err(crate::Error::OutOfRange {
            quantity: "eta_inser",
            ..
        })
    ));
    let mut c = pair_chain();
    c.window_ns = 0.0;
    assert!(c.validate().is_err());
    let c = pair_chain().with_dark(vec![1.0; 3]);
    assert!(c.validate().is_err());
    assert!(pair_chain()
        .with_topology(Topology::Heralded)
        .with_dark(vec![1.0; 3])
        .validate()
        .is_ok());
}

#[test]
fn window_edges() {
    let tau = 1.0;
    let s = count_coincidences(&stream(vec![vec![0.0], vec![0.0]]), tau).unwrap();
    assert_eq!(s.coincidences[0].rate.counts, 1);
    let s = count_coincidences(&stream(vec![vec![0.0], vec![tau + 1e-6]]), tau).unwrap();
    assert_eq!(s.coincidences[0].rate.counts, 0);
    let s = count_coincidences(&stream(vec![vec![10.0], vec![10.0 + tau / 2.0]]), tau).unwrap();
    assert_eq!(s.coincidences[0].rate.counts, 1);
    let s = count_coincidences(&stream(vec![vec![10.0], vec![10.0 + tau / 2.0 + 1e-6]]), tau).unwrap();
    assert_eq!(s.coincidences[0].rate.counts, 0);
}

#[test]
fn each_click_used_once() {
    let s = count_coincidences(&stream(vec![vec![0.0, 0.1, 0.2], vec![0.05]]), 1.0).unwrap();
    assert_eq!(s.coincidences[0].rate.counts, 1);
    assert_eq!(match_pairs(&[0.0, 0.1, 0.2], &[0.05], 0.5), vec![(0, 0)]);
}

#[test]
fn unsorted_stream_rejected() {
    let tags = TagStream {
        channels: vec![vec![1.0, 3.0, 2.0], vec![]],
        integration_ns: 10.0,
        seed: 0,
        window: 0,
    };
    assert!(matches!(
        count_coincidences(&tags, 1.0),
        Err(crate::Error::Unsorted { channel: 0, index: 2 })
    ));
}

#[test]
fn zero_rates_give_empty_streams() {
    let tags = simulate_tags(&SourceRates::paper(0.0), &pair_chain(), None, 1, 0).unwrap();
    assert_eq!(tags.total_clicks(), 0);
    assert_eq!(tags.channels.len(), 2);
}

#[test]
fn memory_guard() {
    let err = simulate_tags(&SourceRates::paper(1e4), &pair_chain(), None, 1, 0).unwrap_err();
    assert!(matches!(err, crate::Error::MemoryGuard { .. }), "{err}");
}

#[test]
fn dark_counts_are_poisson() {
    // Index of dispersion over 1000 windows against χ²(999) at the 1 % level.
    let chain = pair_chain().with_dark(vec![1000.0, 0.0]);
    let counts: Vec<f64> = (0..1000)
        .map(|w| {
            simulate_tags(&SourceRates::paper(0.0), &chain, None, 7, w)
                .unwrap()
                .channels[0]
                .len() as f64
        })
        .collect();
    let mean = counts.iter().sum::<f64>() / 1000.0;
    let d = counts.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / mean;
    assert!(
        (mean - 100.0).abs() < 3.0 * (100.0f64 / 1000.0).sqrt() + 1e-9,
        "{mean}"
    );
    assert!((887.6..1117.9).contains(&d), "dispersion {d}");
}

#[test]
fn independent_streams_accidentals() {
    let chain = pair_chain().with_dark(vec![2e5, 3e5]);
    let tags = simulate_tags(&SourceRates::paper(0.0), &chain, None, 3, 0).unwrap();
    let s = count_coincidences(&tags, 1.0).unwrap();
    let c = s.coincidences[0];
    let sigma = (c.accidental_per_s / s.integration_s).sqrt();
    assert!(
        (c.rate.rate_per_s - c.accidental_per_s).abs() < 3.0 * sigma,
        "{c:?}"
    );
}

#[test]
fn simulation_is_deterministic_across_thread_counts() {
    let src = SourceRates::paper(1.0);
    let chain = pair_chain().with_dark(vec![100.0, 100.0]);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| simulate_windows(&src, &chain, None, 99, 8).unwrap())
    };
    assert_eq!(run(1), run(4));
    let a = simulate_tags(&src, &chain, None, 99, 3).unwrap();
    let b = simulate_tags(&src, &chain, None, 99, 3).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, simulate_tags(&src, &chain, None, 100, 3).unwrap());
}

#[test]
fn coincidences_bounded_by_singles() {
    let chain = pair_chain().with_topology(Topology::Heralded);
    let tags = simulate_tags(&SourceRates::paper(5.0), &chain, None, 5, 0).unwrap();
    let s = count_coincidences(&tags, chain.window_ns).unwrap();
    for c in &s.coincidences {
        let [a, b] = c.channels;
        assert!(c.rate.counts <= s.singles[a].counts.min(s.singles[b].counts));
    }
    let t = s.triple.unwrap().counts;
    assert!(t <= s.coincidence(0, 1).unwrap().rate.counts);
    assert!(t <= s.coincidence(0, 2).unwrap().rate.counts);
}

#[test]
fn paper_chain_coincidence_rate() {
    let src = SourceRates::paper(7.0);
    let chain = pair_chain();
    let pooled = CountSummary::pool(&simulate_windows(&src, &chain, None, 11, 10).unwrap()).unwrap();
    let per_uw = pooled.coincidences[0].rate.rate_per_s / 7.0;
    assert!((per_uw / 2.7e4 - 1.0).abs() < 0.05, "{per_uw}");
}

#[test]
fn correction_arithmetic() {
    let raw = CountSummary::from_counts(Topology::Pair, 1.0, 1.0, 1, &[1000, 0], &[([0, 1], 0)], None);
    let c = correct_rates(&raw, &[100.0, 0.0]).unwrap();
    assert_eq!(c.singles[0].rate_per_s, 900.0);
    assert!((c.singles[0].uncertainty_per_s - 1100f64.sqrt()).abs() < 1e-12);
    assert!(!c.clamped);

    let ident = correct_rates(&raw, &[0.0, 0.0]).unwrap();
    assert_eq!(ident.singles, raw.singles);
    assert_eq!(ident.coincidences, raw.coincidences);

    let clamped = correct_rates(&raw, &[2000.0, 0.0]).unwrap();
    assert_eq!(clamped.singles[0].rate_per_s, 0.0);
    assert!(clamped.clamped);
    assert!(correct_rates(&c, &[0.0, 0.0]).is_err());
    assert!(correct_rates(&raw, &[0.0]).is_err());
}

#[test]
fn dark_correction_closure() {
    let src = SourceRates::paper(2.0);
    let chain = pair_chain().with_dark(vec![500.0, 800.0]);
    let (eta_s, eta_c) = chain_efficiencies(&chain);
    let parts = simulate_windows(&src, &chain, None, 21, 30).unwrap();
    let c = correct_rates(&CountSummary::pool(&parts).unwrap(), &chain.dark_rates()).unwrap();
    let r = src.pair_rate();
    for s in &c.singles {
        assert!(
            (s.rate_per_s - eta_s * r).abs() < 3.0 * s.uncertainty_per_s,
            "{s:?}"
        );
    }
    let co = c.coincidences[0].rate;
    assert!(
        (co.rate_per_s - eta_c * r).abs() < 3.0 * co.uncertainty_per_s,
        "{co:?}"
    );
}

#[test]
fn g2_arithmetic_and_errors() {
    let s = CountSummary::from_counts(
        Topology::Heralded,
        1.0,
        1.0,
        1,
        &[1000, 500, 500],
        &[([0, 1], 100), ([0, 2], 100), ([1, 2], 0)],
        Some(10),
    );
    let g = heralded_g2(&s).unwrap();
    assert!((g.value - 1.0).abs() < 1e-12);
    let expected = (1e-3f64 + 1e-1 + 1e-2 + 1e-2).sqrt();
    assert!((g.uncertainty - expected).abs() < 1e-12, "{}", g.uncertainty);

    let zero = CountSummary::from_counts(
        Topology::Heralded,
        1.0,
        1.0,
        1,
        &[1000, 500, 500],
        &[([0, 1], 0), ([0, 2], 100), ([1, 2], 0)],
        Some(0),
    );
    assert!(matches!(
        heralded_g2(&zero),
        Err(crate::Error::UndefinedEstimate {
            r_h: 1000.0,
            r_h1: 0.0,
            ..
        })
    ));
    let pair = CountSummary::from_counts(Topology::Pair, 1.0, 1.0, 1, &[1, 1], &[([0, 1], 1)], None);
    assert!(matches!(heralded_g2(&pair), Err(crate::Error::Topology("pair"))));
}

#[test]
fn coherent_light_g2_is_one() {
    let mut chain = pair_chain()
        .with_topology(Topology::Heralded)
        .with_dark(vec![1e6; 3]);
    chain.window_ns = 10.0;
    chain.integration_ms = 1000.0;
    let parts = simulate_windows(&SourceRates::paper(0.0), &chain, None, 8, 10).unwrap();
    let g = heralded_g2(&CountSummary::pool(&parts).unwrap()).unwrap();
    assert!((g.value - 1.0).abs() < 3.0 * g.uncertainty, "{g:?}");
}

#[test]
fn pair_source_g2_low_and_rising() {
    let chain = pair_chain().with_topology(Topology::Heralded);
    let g: Vec<G2Estimate> = [2.0, 20.0, 80.0]
        .iter()
        .map(|&p| {
            let parts = simulate_windows(&SourceRates::paper(p), &chain, None, 4, 20).unwrap();
            heralded_g2(&CountSummary::pool(&parts).unwrap()).unwrap()
        })
        .collect();
    assert!(g[0].value < 0.1, "{g:?}");
    assert!(g[0].value < g[1].value && g[1].value < g[2].value, "{g:?}");
}

#[test]
fn tag_csv_round_trip() {
    let chain = pair_chain()
        .with_topology(Topology::Heralded)
        .with_dark(vec![50.0; 3]);
    let tags = simulate_tags(&SourceRates::paper(0.01), &chain, None, 17, 2).unwrap();
    let back = TagStream::parse_csv(&tags.to_csv(), "mem").unwrap();
    assert_eq!(back, tags);
    let err =
        TagStream::parse_csv("# integration_ns: 10\nchannel,timestamp_ns\n0,1\n0,x\n", "f.csv").unwrap_err();
    assert!(matches!(err, crate::Error::Parse { line: 4, .. }), "{err}");
}

#[test]
fn summary_json_has_units() {
    let s = CountSummary::from_counts(Topology::Pair, 0.1, 1.0, 1, &[10, 20], &[([0, 1], 3)], None);
    let json = s.to_json();
    for key in [
        "rate_per_s",
        "uncertainty_per_s",
        "accidental_per_s",
        "integration_s",
        "window_ns",
    ] {
        assert!(json.contains(key), "{key}");
    }
    let back: CountSummary = serde_json::from_str(&json).unwrap();
    assert_eq!(back, s);
}
