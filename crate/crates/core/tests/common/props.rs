//! Invariants checked with proptest's `TestRunner`, one function per property.

use std::collections::BTreeSet;
use std::fmt::Debug;

use chrono::{Datelike, NaiveDate};
use counterscope_core::calendar::{season_of_month, DayType, Season};
use counterscope_core::cluster::{
    cut_dendrogram, kmeans, silhouette, spearman_distance_matrix, ward_hclust, DistanceMatrix,
};
use counterscope_core::ingest::{
    parse_counts, qc_filter, write_counts, ClassCounts, CounterId, Direction, RawCountRecord,
    VehicleClass, VehicleClassFilter,
};
use counterscope_core::profile::{
    build_profiles, normalize_values, trimmed_mean, AggregationMode, HourlyProfile, Period,
    ProfileKey, SeriesKey, VolumeRow, VolumeSummary, WeeklyShare, HOURS,
};
use counterscope_core::scoring::{
    baseline_of, rank, score_a, score_b, score_c, score_d, score_e, score_series,
    seasonal_score_from_volumes, ScoreCard, ScoreName,
};
use counterscope_core::synth::{
    generate, Archetype, CounterSpec, EventKind, PlantedEvent, ScenarioSpec,
};
use proptest::collection::vec;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};
use rand::seq::SliceRandom;

use super::{golden, Check};

type Outcome = Result<String, String>;

fn runner(cases: u32) -> TestRunner {
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn check<S>(
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Outcome
where
    S: Strategy,
    S::Value: Debug,
{
    runner(cases)
        .run(&strategy, test)
        .map(|()| format!("{cases} cases"))
        .map_err(|e| e.to_string())
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

fn matrix(lo: f64, hi: f64, rows: usize) -> impl Strategy<Value = Vec<[f64; HOURS]>> {
    vec(prop::array::uniform24(lo..hi), rows)
}

pub fn trimmed_mean_bounds_and_equivariance() -> Outcome {
    check(
        256,
        (vec(-1e3..1e3_f64, 1..60), -100.0..100.0_f64, 0.1..10.0_f64),
        |(v, shift, scale)| {
            let m = trimmed_mean(&v).unwrap();
            let (lo, hi) = v
                .iter()
                .fold((f64::MAX, f64::MIN), |(a, b), &x| (a.min(x), b.max(x)));
            prop_assert!(lo <= m && m <= hi);
            let shifted: Vec<f64> = v.iter().map(|x| x + shift).collect();
            prop_assert!(rel_close(trimmed_mean(&shifted).unwrap(), m + shift, 1e-9));
            let scaled: Vec<f64> = v.iter().map(|x| x * scale).collect();
            prop_assert!(rel_close(trimmed_mean(&scaled).unwrap(), m * scale, 1e-9));
            Ok(())
        },
    )
}

pub fn normalization_sums_to_hundred() -> Outcome {
    check(256, prop::array::uniform24(0.0..1e4_f64), |values| {
        prop_assume!(values.iter().sum::<f64>() > 0.0);
        let n = normalize_values(&values).unwrap();
        prop_assert!((n.iter().sum::<f64>() - 100.0).abs() < 1e-9);
        let argmax = |v: &[f64; HOURS]| (0..HOURS).fold(0, |b, h| if v[h] > v[b] { h } else { b });
        prop_assert_eq!(argmax(&n), argmax(&values));
        Ok(())
    })
}

pub fn weekly_shares_sum_to_one() -> Outcome {
    check(256, (0.0..1e5_f64, 0.0..1e5_f64), |(we, wd)| {
        let s = WeeklyShare::from_daily_averages(we, wd);
        prop_assert!((s.weekend + s.workday - 1.0).abs() < 1e-9);
        Ok(())
    })
}

pub fn scores_vanish_on_identical_months() -> Outcome {
    check(128, prop::array::uniform24(0.0..1e3_f64), |row| {
        let m = vec![row; 12];
        let b = baseline_of(&m).unwrap();
        for s in [
            score_a(&m, &b).value,
            score_b(&m, &b).value,
            score_c(&m).unwrap().value,
            score_d(&m, &b).value,
            score_e(&m, &b).unwrap().value,
        ] {
            prop_assert_eq!(s, 0.0);
        }
        Ok(())
    })
}

fn all_scores(m: &[[f64; HOURS]]) -> [f64; 5] {
    let b = baseline_of(m).unwrap();
    [
        score_a(m, &b).value,
        score_b(m, &b).value,
        score_c(m).unwrap().value,
        score_d(m, &b).value,
        score_e(m, &b).unwrap().value,
    ]
}

/// Values stay at or above 1 vehicle/hour so the epsilon guards never engage.
pub fn score_scaling() -> Outcome {
    check(128, (matrix(1.0, 1e3, 12), 1.0..10.0_f64), |(m, alpha)| {
        let s = all_scores(&m);
        let scaled: Vec<[f64; HOURS]> = m.iter().map(|r| r.map(|v| v * alpha)).collect();
        let t = all_scores(&scaled);
        prop_assert!(rel_close(t[0], alpha * s[0], 1e-9), "A not equivariant");
        prop_assert!(rel_close(t[3], alpha * s[3], 1e-9), "D not equivariant");
        for i in [1, 2, 4] {
            prop_assert!(rel_close(t[i], s[i], 1e-9), "score {} not invariant", i);
        }
        Ok(())
    })
}

pub fn score_d_dominates_score_a() -> Outcome {
    check(
        128,
        (1usize..=12).prop_flat_map(|n| matrix(0.0, 1e3, n.max(4))),
        |m| {
            let b = baseline_of(&m).unwrap();
            prop_assert!(score_d(&m, &b).value >= score_a(&m, &b).value);
            Ok(())
        },
    )
}

fn cards_for(corpus: &[Vec<[f64; HOURS]>]) -> Vec<ScoreCard<f64>> {
    corpus
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let key = SeriesKey::new(
                CounterId::new(format!("K{i:02}")),
                Direction::Dir1,
                DayType::Workday,
            );
            let profiles: Vec<HourlyProfile<f64>> = m
                .iter()
                .enumerate()
                .map(|(p, values)| HourlyProfile {
                    key: ProfileKey {
                        series: key.clone(),
                        period: Period::Month(p as u8 + 1),
                    },
                    values: *values,
                })
                .collect();
            score_series(&key, &profiles).unwrap().1
        })
        .collect()
}

pub fn rankings_survive_uniform_rescaling() -> Outcome {
    check(
        48,
        (vec(matrix(1.0, 1e3, 12), 2..7), 1.0..10.0_f64),
        |(corpus, alpha)| {
            let scaled: Vec<Vec<[f64; HOURS]>> = corpus
                .iter()
                .map(|m| m.iter().map(|r| r.map(|v| v * alpha)).collect())
                .collect();
            let (a, b) = (cards_for(&corpus), cards_for(&scaled));
            for name in ScoreName::ALL {
                let ids = |c: &[ScoreCard<f64>]| -> Vec<CounterId> {
                    rank(c, name, c.len())
                        .unwrap()
                        .into_iter()
                        .map(|r| r.counter_id)
                        .collect()
                };
                prop_assert_eq!(ids(&a), ids(&b), "{} ranking changed", name);
            }
            Ok(())
        },
    )
}

pub fn rank_is_deterministic_prefix() -> Outcome {
    check(
        64,
        (vec(matrix(0.0, 1e3, 12), 1..8), 1usize..10),
        |(corpus, k)| {
            let cards = cards_for(&corpus);
            let mut reversed = cards.clone();
            reversed.reverse();
            let input: BTreeSet<CounterId> =
                cards.iter().map(|c| c.key.counter_id.clone()).collect();
            for name in ScoreName::ALL {
                let r = rank(&cards, name, k).unwrap();
                prop_assert_eq!(&r, &rank(&reversed, name, k).unwrap());
                prop_assert_eq!(r.len(), k.min(input.len()));
                let ids: BTreeSet<CounterId> = r.iter().map(|x| x.counter_id.clone()).collect();
                prop_assert_eq!(ids.len(), r.len());
                prop_assert!(ids.is_subset(&input));
                prop_assert!(r.windows(2).all(|w| w[0].score >= w[1].score));
            }
            Ok(())
        },
    )
}

pub fn seasonal_deviations_sum_to_zero() -> Outcome {
    let rows = vec((0usize..4, 1u32..=12, 0u64..100_000, 0u64..100_000), 1..60);
    check(128, rows, |rows| {
        let mut summary = VolumeSummary::default();
        let mut seen = BTreeSet::new();
        for (c, month, wd, we) in rows {
            if !seen.insert((c, month)) {
                continue;
            }
            summary.rows.push(VolumeRow {
                counter_id: CounterId::new(format!("S{c}")),
                direction: Direction::Dir1,
                year: 2016,
                month,
                workday_total: wd,
                workday_days: 20,
                weekend_total: we,
                weekend_days: 8,
            });
        }
        summary.rows.sort();
        for card in seasonal_score_from_volumes::<f64>(&summary) {
            prop_assert!(card.deviations.iter().sum::<f64>().abs() < 1e-12);
            prop_assert!((card.shares.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        Ok(())
    })
}

pub fn seasons_partition_months() -> Outcome {
    let mut seen = [0usize; 13];
    for s in Season::ALL {
        for m in s.months() {
            seen[m as usize] += 1;
            if season_of_month(m).ok() != Some(s) {
                return Err(format!("month {m} maps outside {s}"));
            }
        }
    }
    if seen[1..].iter().all(|&c| c == 1) {
        Ok("12 months, 4 seasons".into())
    } else {
        Err(format!("month coverage {seen:?}"))
    }
}

fn int_points(max_n: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    (1usize..=4).prop_flat_map(move |dim| vec(vec((-50i32..50).prop_map(f64::from), dim), 3..max_n))
}

fn sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn kmeans_descends_to_a_fixpoint() -> Outcome {
    check(
        96,
        (int_points(30), 1usize..=4, any::<u64>()),
        |(points, k, seed)| {
            let k = k.min(points.len());
            let fit = kmeans::<f64, _>(&points, k, seed, 3).unwrap();
            let tr = &fit.wcss_trace;
            prop_assert!(
                tr.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12) + 1e-9),
                "trace {:?}",
                tr
            );
            for (p, &l) in points.iter().zip(&fit.labels) {
                let own = sq(p, &fit.centroids[l]);
                prop_assert!(fit.centroids.iter().all(|c| own <= sq(p, c) + 1e-9));
            }
            Ok(())
        },
    )
}

pub fn kmeans_translation_invariant() -> Outcome {
    let shift = vec((-1000i32..1000).prop_map(f64::from), 4);
    check(
        96,
        (int_points(25), 2usize..=4, shift),
        |(points, k, shift)| {
            let k = k.min(points.len());
            let moved: Vec<Vec<f64>> = points
                .iter()
                .map(|p| p.iter().zip(&shift).map(|(x, s)| x + s).collect())
                .collect();
            let a = kmeans::<f64, _>(&points, k, 42, 5).unwrap();
            let b = kmeans::<f64, _>(&moved, k, 42, 5).unwrap();
            prop_assert_eq!(a.labels, b.labels);
            Ok(())
        },
    )
}

fn distinct_rows() -> impl Strategy<Value = Vec<Vec<f64>>> {
    vec(vec(-100.0..100.0_f64, HOURS), 3..20)
}

pub fn spearman_ignores_monotone_transforms() -> Outcome {
    check(64, distinct_rows(), |rows| {
        let bent: Vec<Vec<f64>> = rows
            .iter()
            .map(|r| r.iter().map(|x| x * x * x + x).collect())
            .collect();
        let (d1, d2) = (
            spearman_distance_matrix::<f64, _>(&rows).unwrap(),
            spearman_distance_matrix::<f64, _>(&bent).unwrap(),
        );
        for i in 0..rows.len() {
            for j in 0..rows.len() {
                prop_assert!((d1.get(i, j) - d2.get(i, j)).abs() < 1e-12);
            }
        }
        let k = 2.min(rows.len());
        let cut = |d: &DistanceMatrix<f64>| cut_dendrogram(&ward_hclust(d).unwrap(), k).unwrap();
        prop_assert_eq!(cut(&d1), cut(&d2));
        Ok(())
    })
}

pub fn ward_heights_monotone_and_cuts_nest() -> Outcome {
    check(96, distinct_rows(), |rows| {
        let tree = ward_hclust(&spearman_distance_matrix::<f64, _>(&rows).unwrap()).unwrap();
        prop_assert!(tree
            .merges
            .windows(2)
            .all(|w| w[1].height >= w[0].height - 1e-12));
        let n = rows.len();
        let mut coarser = cut_dendrogram(&tree, 1).unwrap();
        for k in 2..=n {
            let finer = cut_dendrogram(&tree, k).unwrap();
            let mut parent = vec![None; k];
            for (f, c) in finer.iter().zip(&coarser) {
                match parent[*f] {
                    None => parent[*f] = Some(*c),
                    Some(p) => prop_assert_eq!(p, *c, "cut {} does not refine cut {}", k, k - 1),
                }
            }
            coarser = finer;
        }
        Ok(())
    })
}

pub fn silhouette_is_bounded() -> Outcome {
    let case = int_points(25).prop_flat_map(|p| {
        let n = p.len();
        (Just(p), vec(0usize..3, n))
    });
    check(128, case, |(points, mut labels)| {
        // make labels dense and guarantee two clusters
        labels[0] = 0;
        labels[1] = 1;
        let used: BTreeSet<usize> = labels.iter().copied().collect();
        let dense: Vec<usize> = labels.iter().map(|l| used.range(..l).count()).collect();
        let s: f64 = silhouette(&points, &dense).unwrap();
        prop_assert!((-1.0..=1.0).contains(&s));
        Ok(())
    })
}

fn record(id: &str, direction: Direction, date: NaiveDate, hour: u8, n: u32) -> RawCountRecord {
    RawCountRecord {
        counter_id: CounterId::new(id),
        direction,
        date,
        hour,
        class_counts: ClassCounts::new().with(VehicleClass::Car, n),
    }
}

/// Sparse corpus: per counter, direction and month either nothing, zeros or traffic.
fn sparse_corpus() -> impl Strategy<Value = Vec<RawCountRecord>> {
    vec(vec(0u8..10, 24), 1..4).prop_map(|counters| {
        let mut out = Vec::new();
        for (c, months) in counters.iter().enumerate() {
            for (slot, &state) in months.iter().enumerate() {
                let direction = if slot < 12 {
                    Direction::Dir1
                } else {
                    Direction::Dir2
                };
                let month = (slot % 12) as u32 + 1;
                let n = match state {
                    0 => continue,
                    1 => 0,
                    s => u32::from(s) * 7,
                };
                for day in [3, 17] {
                    let date = NaiveDate::from_ymd_opt(2016, month, day).unwrap();
                    out.push(record(&format!("Q{c}"), direction, date, 8, n));
                }
            }
        }
        out
    })
}

pub fn qc_is_idempotent_and_local() -> Outcome {
    check(128, sparse_corpus(), |records| {
        let once = qc_filter(records.clone());
        let twice = qc_filter(once.records.clone());
        prop_assert_eq!(&once.records, &twice.records);
        let ids: BTreeSet<CounterId> = records.iter().map(|r| r.counter_id.clone()).collect();
        for gone in &ids {
            let without: Vec<RawCountRecord> = records
                .iter()
                .filter(|r| &r.counter_id != gone)
                .cloned()
                .collect();
            let rest = qc_filter(without);
            let expected: Vec<&RawCountRecord> = once
                .records
                .iter()
                .filter(|r| &r.counter_id != gone)
                .collect();
            prop_assert_eq!(rest.records.iter().collect::<Vec<_>>(), expected);
        }
        Ok(())
    })
}

pub fn counts_csv_round_trip() -> Outcome {
    check(128, sparse_corpus(), |records| {
        let mut buf = Vec::new();
        write_counts(&records, &mut buf).unwrap();
        let back = parse_counts(buf.as_slice(), &VehicleClassFilter::all()).unwrap();
        prop_assert_eq!(back, records);
        Ok(())
    })
}

fn small_spec(seed: u64) -> ScenarioSpec {
    ScenarioSpec::new(seed, [2016])
        .noise(0.1)
        .counter(CounterSpec::new("P1", Archetype::Commuter))
        .counter(CounterSpec::new("P2", Archetype::BorderWeekend))
        .counter(CounterSpec::new("P3", Archetype::WinterResort))
}

pub fn profiles_ignore_record_order() -> Outcome {
    let (records, _) = generate(&small_spec(5)).map_err(|e| e.to_string())?;
    let data = qc_filter(records);
    let holidays = small_spec(5).holidays;
    let reference = build_profiles::<f64>(&data, &holidays, AggregationMode::Monthly);
    check(8, any::<u64>(), |seed| {
        let mut shuffled = data.clone();
        shuffled.records.shuffle(&mut super::rng(seed));
        prop_assert!(
            build_profiles::<f64>(&shuffled, &holidays, AggregationMode::Monthly) == reference
        );
        Ok(())
    })
}

/// Every golden output, built in a 1-thread pool, a 4-thread pool and again.
pub fn outputs_independent_of_threads() -> Outcome {
    let in_pool = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| e.to_string())
            .map(|pool| pool.install(golden::outputs))
    };
    let one = in_pool(1)?;
    let four = in_pool(4)?;
    let again = in_pool(4)?;
    for ((name, a), ((_, b), (_, c))) in one.iter().zip(four.iter().zip(&again)) {
        if a != b || b != c {
            return Err(format!("{name} depends on thread count or run"));
        }
    }
    Ok(format!(
        "{} outputs identical across 1/4 threads and reruns",
        one.len()
    ))
}

pub fn synth_is_deterministic() -> Outcome {
    check(6, 0u64..1000, |seed| {
        let (a, ta) = generate(&small_spec(seed)).unwrap();
        let (b, tb) = generate(&small_spec(seed)).unwrap();
        prop_assert!(a == b && ta == tb);
        let (c, tc) = generate(&small_spec(seed + 1)).unwrap();
        prop_assert!(a != c);
        prop_assert_eq!(ta.counters, tc.counters);
        Ok(())
    })
}

/// Noise-free archetypes repeat year over year for the same month, weekday and day type.
pub fn noiseless_synth_is_periodic() -> Outcome {
    let mut spec = ScenarioSpec::new(1, [2015, 2016, 2017]);
    for (i, a) in Archetype::ALL.into_iter().enumerate() {
        spec = spec.counter(CounterSpec::new(format!("Y{i}"), a));
    }
    let (records, _) = generate(&spec).map_err(|e| e.to_string())?;
    let mut signature = std::collections::BTreeMap::new();
    for r in &records {
        let day_type = counterscope_core::calendar::classify_day(r.date, &spec.holidays);
        let key = (
            r.counter_id.clone(),
            r.direction,
            r.date.month(),
            r.date.weekday().num_days_from_monday(),
            day_type,
            r.hour,
        );
        let prev = signature.insert(key.clone(), r.count());
        if prev.is_some_and(|p| p != r.count()) {
            return Err(format!("{key:?} differs between years"));
        }
    }
    Ok(format!("{} archetypes over 3 years", Archetype::ALL.len()))
}

pub fn closure_zeroes_window_only() -> Outcome {
    let base = small_spec(9);
    let closed = small_spec(9).event(PlantedEvent {
        counter_id: CounterId::new("P1"),
        kind: EventKind::RoadClosure,
        start: NaiveDate::from_ymd_opt(2016, 3, 1).unwrap(),
        end: NaiveDate::from_ymd_opt(2016, 3, 28).unwrap(),
        hour_start: 0,
        hour_end: 23,
        magnitude: 0.0,
        direction: None,
    });
    let (a, _) = generate(&base).map_err(|e| e.to_string())?;
    let (b, _) = generate(&closed).map_err(|e| e.to_string())?;
    let (mut inside, mut outside) = (0, 0);
    for (x, y) in a.iter().zip(&b) {
        let covered = y.counter_id.as_str() == "P1" && y.date.month() == 3 && y.date.day() <= 28;
        if covered {
            inside += 1;
            if y.count() != 0 {
                return Err(format!("non-zero count inside the closure on {}", y.date));
            }
        } else {
            outside += 1;
            if x != y {
                return Err(format!("count changed outside the closure on {}", y.date));
            }
        }
    }
    Ok(format!("{inside} zeroed, {outside} unchanged"))
}

pub fn all() -> Vec<(&'static str, Check)> {
    vec![
        (
            "trimmed mean bounds/equivariance",
            trimmed_mean_bounds_and_equivariance as Check,
        ),
        ("normalization sums to 100", normalization_sums_to_hundred),
        ("weekly shares sum to 1", weekly_shares_sum_to_one),
        (
            "scores zero on identical months",
            scores_vanish_on_identical_months,
        ),
        ("score scale in/equivariance", score_scaling),
        ("score D >= score A", score_d_dominates_score_a),
        (
            "rankings invariant under rescaling",
            rankings_survive_uniform_rescaling,
        ),
        ("rank deterministic prefix", rank_is_deterministic_prefix),
        (
            "seasonal deviations sum to 0",
            seasonal_deviations_sum_to_zero,
        ),
        ("seasons partition months", seasons_partition_months),
        (
            "k-means descent and fixpoint",
            kmeans_descends_to_a_fixpoint,
        ),
        (
            "k-means translation invariance",
            kmeans_translation_invariant,
        ),
        (
            "spearman monotone invariance",
            spearman_ignores_monotone_transforms,
        ),
        (
            "ward monotone heights, nested cuts",
            ward_heights_monotone_and_cuts_nest,
        ),
        ("silhouette in [-1, 1]", silhouette_is_bounded),
        ("qc idempotent and local", qc_is_idempotent_and_local),
        ("counts csv round trip", counts_csv_round_trip),
        ("profiles ignore record order", profiles_ignore_record_order),
        (
            "outputs independent of threads",
            outputs_independent_of_threads,
        ),
        ("synth deterministic", synth_is_deterministic),
        ("noiseless synth periodic", noiseless_synth_is_periodic),
        ("closure zeroes its window only", closure_zeroes_window_only),
    ]
}
