use proptest::prelude::*;
use srdcv_core::criteria::{borda_from_ranks, preference_ranks, Direction};
use srdcv_core::scenario::ScenarioType;
use srdcv_core::*;

fn permutation(n: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((1..=n).collect::<Vec<usize>>()).prop_shuffle()
}

fn three_perms() -> impl Strategy<Value = (Vec<usize>, Vec<usize>, Vec<usize>)> {
    (4usize..40).prop_flat_map(|n| (permutation(n), permutation(n), permutation(n)))
}

fn rk(p: &[usize]) -> Ranking {
    Ranking::from_permutation(p).unwrap()
}

fn variants(m: usize) -> Vec<(Method, usize)> {
    (0..m).map(|i| (Method::ALL[i % 3], 2 + i / 3)).collect()
}

proptest! {
    #[test]
    fn metric_properties((a, b, c) in three_perms()) {
        let (a, b, c) = (rk(&a), rk(&b), rk(&c));
        let ab = distance(&a, &b).unwrap();
        prop_assert_eq!(ab, distance(&b, &a).unwrap());
        prop_assert!(ab <= distance(&a, &c).unwrap() + distance(&c, &b).unwrap());
        let s = srd(&a, &b).unwrap();
        prop_assert!((0.0..=1.0).contains(&s.normalized()));
        prop_assert_eq!(s.normalized(), ab / max_distance(a.len()).unwrap() as f64);
    }

    #[test]
    fn ranking_ignores_monotone_transforms(values in prop::collection::vec(-1e3f64..1e3, 2..50)) {
        let base = rank_column(&values).unwrap();
        let shifted: Vec<f64> = values.iter().map(|v| 3.0 * v + 7.0).collect();
        let cubed: Vec<f64> = values.iter().map(|v| v.powi(3)).collect();
        prop_assert_eq!(&rank_column(&shifted).unwrap(), &base);
        prop_assert_eq!(&rank_column(&cubed).unwrap(), &base);
        let total: f64 = base.ranks().iter().sum();
        let n = values.len() as f64;
        prop_assert_eq!(total, n * (n + 1.0) / 2.0);
    }

    #[test]
    fn swapping_rankings_mirrors_the_test(
        (a, b, reference) in three_perms(),
        method in prop::sample::select(Method::ALL.to_vec()),
        folds in 2usize..12,
        seed in any::<u64>(),
    ) {
        let config = CvConfig::new(method, folds).with_seed(seed);
        let (a, b, reference) = (rk(&a), rk(&b), rk(&reference));
        let ab = run_cv_test(&a, &b, &reference, &config).unwrap();
        let ba = run_cv_test(&b, &a, &reference, &config).unwrap();
        prop_assert!((ab.p_value - ba.p_value).abs() < 1e-12);
        prop_assert_eq!(ab.reject, ba.reject);
        match method {
            Method::Wilcoxon => {
                let k: f64 = ab.fold_scores.iter().filter(|(f, _)| f.diff != 0.0).count() as f64;
                prop_assert!((ab.statistic + ba.statistic - k * (k + 1.0) / 2.0).abs() < 1e-9);
            }
            Method::Dietterich => prop_assert_eq!(ab.statistic, -ba.statistic),
            Method::Alpaydin => prop_assert!(
                ab.statistic == ba.statistic || (ab.statistic - ba.statistic).abs() <= 1e-12 * ab.statistic.abs()
            ),
        }
        // identical rankings never reject
        let same = run_cv_test(&a, &a, &reference, &config).unwrap();
        prop_assert_eq!(same.p_value, 1.0);
        prop_assert!(!same.reject);
    }

    #[test]
    fn same_seed_same_result((a, b, reference) in three_perms(), seed in any::<u64>()) {
        let (a, b, reference) = (rk(&a), rk(&b), rk(&reference));
        for method in Method::ALL {
            let config = CvConfig::new(method, 6).with_seed(seed);
            prop_assert_eq!(
                run_cv_test(&a, &b, &reference, &config).unwrap(),
                run_cv_test(&a, &b, &reference, &config).unwrap()
            );
        }
    }

    #[test]
    fn borda_score_identity(raw in prop::collection::vec(prop::collection::vec(0u8..6, 7), 1..8)) {
        let m = 7;
        let ranks: Vec<Vec<f64>> = raw
            .iter()
            .map(|c| preference_ranks(&c.iter().map(|&x| f64::from(x)).collect::<Vec<_>>(), Direction::HigherBetter))
            .collect();
        let result = borda_from_ranks(variants(m), &ranks).unwrap();
        let total: f64 = result.scores.iter().sum();
        prop_assert_eq!(total, (raw.len() * m * (m - 1) / 2) as f64);
    }

    #[test]
    fn borda_ignores_monotone_rescaling(raw in prop::collection::vec(prop::collection::vec(-50i32..50, 6), 1..6)) {
        let ranks = |f: &dyn Fn(f64) -> f64| -> Vec<Vec<f64>> {
            raw.iter()
                .map(|c| preference_ranks(&c.iter().map(|&x| f(f64::from(x))).collect::<Vec<_>>(), Direction::LowerBetter))
                .collect()
        };
        let plain = borda_from_ranks(variants(6), &ranks(&|x| x)).unwrap();
        let scaled = borda_from_ranks(variants(6), &ranks(&|x| 0.5 * x.powi(3) + 10.0)).unwrap();
        prop_assert_eq!(plain.scores, scaled.scores);
    }

    #[test]
    fn table_csv_round_trip(rates in prop::collection::vec((0.0f64..=100.0, prop::option::of(0.0f64..5.0)), 1..20)) {
        let mut table = RejectionTable::new();
        for (i, (rate, se)) in rates.iter().enumerate() {
            table
                .push(Cell {
                    n: 13,
                    scenario: format!("s{i}"),
                    kind: if i % 2 == 0 { ScenarioType::I } else { ScenarioType::II },
                    method: Method::ALL[i % 3],
                    folds: 5 + i % 6,
                    alpha: 0.05,
                    runs_per_round: 1000,
                    rounds: 3,
                    rejection_rate_pct: *rate,
                    round_se_pct: *se,
                    master_seed: i as u64,
                })
                .unwrap();
        }
        let back = RejectionTable::from_csv_str(&table.to_csv_string()).unwrap();
        prop_assert_eq!(&back, &table);
        prop_assert_eq!(back.to_csv_string(), table.to_csv_string());
    }
}

#[test]
fn exported_table_reads_back() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    let table = table::published_table(7).unwrap();
    export_table(&table, &path).unwrap();
    assert_eq!(import_table(&path).unwrap(), table);
    assert!(matches!(import_table(&dir.path().join("missing.csv")), Err(SrdError::Io { .. })));
}
