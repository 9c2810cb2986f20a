use std::collections::{BTreeMap, HashMap, HashSet};

use rand::Rng;

use projgrowth_core::em::{em_fit, predicted_collaborative_entries, EmConfig};
use projgrowth_core::gof::bootstrap_pvalue;
use projgrowth_core::rng::stream_rng;
use projgrowth_core::sim::{run, SimParams};
use projgrowth_core::snapshot::{entry_exit_counts, GapMask, MembershipEventLog};
use projgrowth_core::yule::sample;
use projgrowth_core::SizeDistribution;

/// Ten developers and eight projects in the spirit of the usual bipartite
/// sketch: two clusters bridged by D5 and D6.
fn sketch() -> MembershipEventLog {
    let links = [
        ("D1", "P1"),
        ("D2", "P1"),
        ("D2", "P2"),
        ("D3", "P2"),
        ("D4", "P3"),
        ("D5", "P2"),
        ("D5", "P4"),
        ("D6", "P4"),
        ("D6", "P5"),
        ("D7", "P5"),
        ("D7", "P6"),
        ("D8", "P6"),
        ("D9", "P7"),
        ("D10", "P8"),
        ("D10", "P7"),
    ];
    let mut b = MembershipEventLog::builder();
    for (d, p) in links {
        b.push(d, p, 0, None).unwrap();
    }
    b.build()
}

#[test]
fn bipartite_sketch() {
    let log = sketch();
    let s = log.snapshot_at(0).unwrap();
    assert_eq!((log.n_developers(), log.n_projects()), (10, 8));
    let sizes = s.project_size_distribution();
    assert_eq!(sizes.counts(), &BTreeMap::from([(1, 2), (2, 5), (3, 1)]));
    assert_eq!(sizes.total_developers(), 15);
    let degrees = s.developer_degree_distribution();
    assert_eq!(degrees.counts(), &BTreeMap::from([(1, 5), (2, 5)]));

    let name = |e: &projgrowth_core::snapshot::WeightedEdge<projgrowth_core::snapshot::ProjectId>| {
        let mut v = [log.project_name(e.a).into_owned(), log.project_name(e.b).into_owned()];
        v.sort();
        (v[0].clone(), v[1].clone(), e.weight)
    };
    let mut proj: Vec<_> = s.project_projection().iter().map(name).collect();
    proj.sort();
    let want: Vec<(String, String, u32)> = [("P1", "P2"), ("P2", "P4"), ("P4", "P5"), ("P5", "P6"), ("P7", "P8")]
        .iter()
        .map(|(a, b)| (a.to_string(), b.to_string(), 1))
        .collect();
    assert_eq!(proj, want);
    // P2 has three members, P1 and P5..P7 two each
    let dev_weight: u32 = s.developer_projection().iter().map(|e| e.weight).sum();
    assert_eq!(dev_weight, 3 + 5);
}

#[test]
fn simulated_snapshot_matches_internal_tally() {
    let trace = run(&SimParams::new(2.0 / 3.0, 10_000, 4).with_history()).unwrap();
    let log = trace.to_event_log(10_000).unwrap();
    let s = log.snapshot_at(0).unwrap();
    assert_eq!(&s.project_size_distribution(), trace.final_distribution());
}

#[test]
fn degree_recount_on_random_log() {
    let mut rng = stream_rng(2, 0);
    let mut b = MembershipEventLog::builder();
    let mut set = HashSet::new();
    for _ in 0..1000 {
        let (d, p) = (rng.random_range(0..200u32), rng.random_range(0..150u32));
        let entry = rng.random_range(0..5);
        if b.push(format!("d{d}"), format!("p{p}"), entry, None).is_ok() {
            set.insert((d, p, entry));
        }
    }
    let log = b.build();
    let s = log.snapshot_at(4).unwrap();
    let mut pairs: HashSet<(u32, u32)> = HashSet::new();
    for &(d, p, _) in &set {
        pairs.insert((d, p));
    }
    let mut deg: HashMap<u32, u64> = HashMap::new();
    for &(d, _) in &pairs {
        *deg.entry(d).or_default() += 1;
    }
    let mut want: BTreeMap<u64, u64> = BTreeMap::new();
    for k in deg.values() {
        *want.entry(*k).or_default() += 1;
    }
    assert_eq!(s.developer_degree_distribution().counts(), &want);
}

#[test]
fn entry_exit_follows_birth_schedule() {
    let schedule = [3u64, 0, 5, 1, 7, 2];
    let mut b = MembershipEventLog::builder();
    let mut k = 0;
    for (m, &n) in schedule.iter().enumerate() {
        for _ in 0..n {
            b.push(format!("d{k}"), format!("p{k}"), m as i32, Some(m as i32 + 2)).unwrap();
            k += 1;
        }
    }
    let rows = entry_exit_counts(&b.build(), 0..=7);
    for (m, r) in rows.iter().enumerate() {
        let born = schedule.get(m).copied().unwrap_or(0);
        let removed = if m >= 2 { schedule.get(m - 2).copied().unwrap_or(0) } else { 0 };
        assert_eq!((r.new_projects, r.new_developers), (born, born));
        assert_eq!((r.removed_projects, r.removed_developers), (removed, removed));
    }
}

#[test]
fn null_pvalues_are_roughly_uniform() {
    let trials = 300;
    let ps: Vec<f64> = (0..trials)
        .map(|t| {
            let xs = sample(3.0, 5000, &mut stream_rng(1000 + t, 0)).unwrap();
            bootstrap_pvalue(&SizeDistribution::from_sizes(xs), 200, 5000 + t).unwrap().p_value
        })
        .collect();
    let mut deciles = [0usize; 10];
    for p in ps {
        deciles[((p * 10.0) as usize).min(9)] += 1;
    }
    let expected = trials as f64 / 10.0;
    for (i, &c) in deciles.iter().enumerate() {
        assert!((c as f64 - expected).abs() <= 0.5 * expected, "decile {i}: {deciles:?}");
    }
}

/// 24 months of a p0 = 2/3 process with 10000 arrivals a month, plus a
/// growing stream of developers who found single-member projects.
#[test]
fn predicted_collaborative_entries_track_true_foundings() {
    let per_month = 10_000u64;
    let months = 24;
    let trace = run(&SimParams::new(2.0 / 3.0, per_month * months, 21).with_history()).unwrap();
    let history = trace.history.as_ref().unwrap();

    let mut b = MembershipEventLog::builder();
    let mut true_foundings = vec![0u64; months as usize];
    let mut seen = HashSet::new();
    for (i, &p) in history.iter().enumerate() {
        let m = (i as u64 / per_month) as i32;
        if seen.insert(p) {
            true_foundings[m as usize] += 1;
        }
        b.push(format!("d{i}"), format!("p{p}"), m, None).unwrap();
    }
    for m in 0..months as i32 {
        for j in 0..(1500 + 80 * m) {
            b.push(format!("solo{m}_{j}"), format!("solo{m}_{j}"), m, None).unwrap();
        }
    }
    let log = b.build();

    let month_list: Vec<i32> = (0..months as i32).collect();
    let results: Vec<_> = month_list
        .iter()
        .map(|&m| em_fit(&log.snapshot_at(m).unwrap().project_size_distribution(), &EmConfig::default()).unwrap())
        .collect();
    let entries = entry_exit_counts(&log, 0..=months as i32 - 1);
    let predicted = predicted_collaborative_entries(&month_list, &results, &entries, &GapMask::new(), 0.0).unwrap();
    assert_eq!(predicted.len(), months as usize);
    let total: f64 = predicted.iter().map(|p| p.1).sum();
    let true_total = true_foundings.iter().sum::<u64>() as f64;
    assert!((total / true_total - 1.0).abs() < 0.02, "{total} vs {true_total}");
    for (m, v) in predicted {
        let truth = true_foundings[m as usize] as f64;
        assert!((v / truth - 1.0).abs() < 0.15, "month {m}: predicted {v}, true {truth}");
    }
}
