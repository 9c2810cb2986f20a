use std::collections::HashMap;

use proptest::prelude::*;
use projgrowth_core::em::{corrected_histogram, em_fit, EmConfig};
use projgrowth_core::estimators::{classify_collaborative, fit_size_growth, relative_rates};
use projgrowth_core::gof::bootstrap_pvalue;
use projgrowth_core::rate_eq::iterate_master;
use projgrowth_core::rng::stream_rng;
use projgrowth_core::sim::{SimParams, SimState};
use projgrowth_core::snapshot::{DeveloperId, GapMask, MembershipEventLog, ProjectId, Snapshot};
use projgrowth_core::yule::{pmf, sample};
use projgrowth_core::SizeDistribution;

fn links() -> impl Strategy<Value = Vec<(u32, u32)>> {
    proptest::collection::vec((0u32..30, 0u32..12), 0..150)
}

fn snapshot_of(links: &[(u32, u32)]) -> Snapshot {
    Snapshot::from_links(0, links.iter().map(|&(d, p)| (DeveloperId(d), ProjectId(p))))
}

/// Biadjacency self-product: weight of (a, b) is the number of shared neighbours.
fn product_oracle(pairs: &[(u32, u32)]) -> HashMap<(u32, u32), u32> {
    let mut by_left: HashMap<u32, Vec<u32>> = HashMap::new();
    for &(l, r) in pairs {
        by_left.entry(l).or_default().push(r);
    }
    let rights: Vec<u32> = {
        let mut v: Vec<u32> = pairs.iter().map(|p| p.1).collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    let mut out = HashMap::new();
    for (i, &a) in rights.iter().enumerate() {
        for &b in &rights[i + 1..] {
            let w = by_left.values().filter(|rs| rs.contains(&a) && rs.contains(&b)).count() as u32;
            if w > 0 {
                out.insert((a, b), w);
            }
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn snapshot_mass_identity(links in links()) {
        let s = snapshot_of(&links);
        let n_links = s.summarize().n_links;
        prop_assert_eq!(s.project_size_distribution().total_developers(), n_links);
        prop_assert_eq!(s.developer_degree_distribution().total_links(), n_links);
    }

    #[test]
    fn projections_match_biadjacency_product(links in links()) {
        let s = snapshot_of(&links);
        let mut uniq = links.clone();
        uniq.sort_unstable();
        uniq.dedup();
        let proj = product_oracle(&uniq);
        let got: HashMap<_, _> = s.project_projection().iter().map(|e| ((e.a.0, e.b.0), e.weight)).collect();
        prop_assert_eq!(&got, &proj);
        let flipped: Vec<(u32, u32)> = uniq.iter().map(|&(d, p)| (p, d)).collect();
        let dev = product_oracle(&flipped);
        let got: HashMap<_, _> = s.developer_projection().iter().map(|e| ((e.a.0, e.b.0), e.weight)).collect();
        prop_assert_eq!(&got, &dev);
        prop_assert!(s.project_projection().iter().all(|e| e.a < e.b));
    }

    #[test]
    fn adding_an_event_keeps_active_pairs(
        events in proptest::collection::vec((0u32..8, 0u32..5, 0i32..10, proptest::option::of(1i32..8)), 1..40),
        extra in (0u32..8, 0u32..5, 0i32..10, 1i32..8),
        month in 0i32..20,
    ) {
        let build = |with_extra: bool| {
            let mut b = MembershipEventLog::builder();
            let all = events.iter().copied().chain(with_extra.then_some((extra.0, extra.1, extra.2, Some(extra.3))));
            for (d, p, entry, dur) in all {
                let _ = b.push(format!("d{d}"), format!("p{p}"), entry, dur.map(|k| entry + k));
            }
            b.build()
        };
        let (base, more) = (build(false), build(true));
        if let (Ok(a), Ok(b)) = (base.snapshot_at(month), more.snapshot_at(month)) {
            for &(d, p) in a.links() {
                let d2 = more.developer_id(&base.developer_name(d)).unwrap();
                let p2 = more.project_id(&base.project_name(p)).unwrap();
                prop_assert!(b.contains(d2, p2));
            }
        }
    }

    #[test]
    fn simulation_conserves_developers(p0 in 0.05f64..0.95, alpha in prop_oneof![Just(1.0), 0.5f64..1.5], seed in any::<u64>()) {
        let params = SimParams::new(p0, 400, seed).with_alpha(alpha);
        let mut rng = stream_rng(seed, 0);
        let mut state = SimState::new(&params);
        let mut prev = state.project_sizes().to_vec();
        while state.step() < 400 {
            state.advance(&params, &mut rng);
            let sizes = state.project_sizes();
            prop_assert_eq!(sizes.iter().sum::<u64>(), state.step());
            prop_assert!(prev.iter().zip(sizes).all(|(a, b)| a <= b));
            prev = sizes.to_vec();
        }
    }

    #[test]
    fn recurrence_holds(rho in 0.2f64..20.0, x in 2u64..10_000) {
        let r = pmf(x, rho).unwrap() / pmf(x - 1, rho).unwrap();
        let want = (x - 1) as f64 / (x as f64 + rho);
        prop_assert!((r / want - 1.0).abs() < 1e-12);
    }

    #[test]
    fn master_equation_conserves_mass(p0 in 0.01f64..0.99, n in 1u64..3000) {
        let states = iterate_master(p0, n, &[n]).unwrap();
        let s = &states[0];
        prop_assert!((s.mass() / n as f64 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn em_leaves_block_untouched(extra in 0u64..5000, seed in any::<u64>()) {
        let xs = sample(3.0, 2000, &mut stream_rng(seed, 0)).unwrap();
        let mut d = SizeDistribution::from_sizes(xs);
        prop_assume!(d.restricted_from(2).distinct_classes() >= 2);
        d.add(1, extra);
        let r = em_fit(&d, &EmConfig::default()).unwrap();
        for (x, c) in corrected_histogram(&d, r.latent_singletons).into_iter().skip(1) {
            prop_assert_eq!(c.to_bits(), (d.count(x) as f64).to_bits());
        }
    }

    #[test]
    fn gamma_is_scale_equivariant(c in 0.1f64..50.0, gamma in 0.5f64..2.0) {
        let pairs: Vec<(u64, f64)> = (0..6u32).flat_map(|k| {
            let x = 1u64 << k;
            std::iter::repeat_n((x, (x as f64).powf(gamma)), 20)
        }).collect();
        let scaled: Vec<(u64, f64)> = pairs.iter().map(|&(x, i)| (x, c * i)).collect();
        let (g1, _, b1, _) = fit_size_growth(&pairs, 20).unwrap();
        let (g2, _, b2, _) = fit_size_growth(&scaled, 20).unwrap();
        prop_assert!((g1 - gamma).abs() < 1e-9);
        prop_assert!((g1 - g2).abs() < 1e-9);
        prop_assert!((b2 - b1 - c.ln()).abs() < 1e-9);
    }

    #[test]
    fn classification_is_monotone_in_observation_end(
        events in proptest::collection::vec((0u32..10, 0u32..6, 0i32..24, proptest::option::of(0i32..6)), 1..40),
        end in 0i32..24,
        later in 0i32..12,
    ) {
        let mut b = MembershipEventLog::builder();
        for (d, p, entry, dur) in events {
            let _ = b.push(format!("d{d}"), format!("p{p}"), entry, dur.map(|k| entry + k));
        }
        let log = b.build();
        let early = classify_collaborative(&log, end, 450.0);
        let late = classify_collaborative(&log, end + later, 450.0);
        for l in early.iter().filter(|l| l.collaborative) {
            prop_assert!(late.iter().any(|m| m.project == l.project && m.collaborative));
        }
    }

    #[test]
    fn exponential_series_has_constant_rate(w in 0.001f64..0.2, n0 in 1e6f64..1e9) {
        let s: Vec<(i32, u64)> = (0..24).map(|t| (t, (n0 * (w * t as f64).exp()).round() as u64)).collect();
        let want = 1.0 - (-w).exp();
        for p in relative_rates(&s, &GapMask::new()).unwrap() {
            prop_assert!((p.g.unwrap() - want).abs() < 1e-5);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn pvalue_in_unit_interval(seed in any::<u64>(), rho in 1.5f64..5.0) {
        let d = SizeDistribution::from_sizes(sample(rho, 300, &mut stream_rng(seed, 99)).unwrap());
        let r = bootstrap_pvalue(&d, 100, seed).unwrap();
        prop_assert!((0.0..=1.0).contains(&r.p_value));
        prop_assert!(r.p_value * 100.0 == (r.p_value * 100.0).round());
    }
}
