//! Property checks shared by the `properties` test target and the
//! acceptance runner. Each runs under a fixed seed and reports the first
//! counterexample as an error string.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;

use hiersynth::experiment::{draw_targets, log_spaced, run_experiment};
use hiersynth::psu2::{
    compose, from_pauli_vector, haar_random_gate, to_pauli_vector, trace_distance,
};
use hiersynth::stats::ols_fit;
use hiersynth::synth::{batch_synthesize, best_candidate, scan_optimum, search_radius, synthesize};
use hiersynth::{
    CostModel, ExperimentSpec, GateElement, GateSet, GateSetSpec, GrowthPolicy, SequenceDatabase,
    SpatialIndex,
};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub type Check = Result<(), String>;

fn runner(cases: u32) -> TestRunner {
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn gate() -> impl Strategy<Value = GateElement> {
    any::<u64>().prop_map(|seed| haar_random_gate(&mut ChaCha8Rng::seed_from_u64(seed)))
}

fn report<T: std::fmt::Debug>(r: Result<(), proptest::test_runner::TestError<T>>) -> Check {
    r.map_err(|e| e.to_string())
}

fn database(k: u8, max_cost: f64) -> SequenceDatabase {
    SequenceDatabase::generate(
        GateSet::new(GateSetSpec::set(k).unwrap()).unwrap(),
        CostModel::catalyst_direct(k + 2).unwrap(),
        max_cost,
    )
    .unwrap()
}

pub fn metric_axioms() -> Check {
    report(
        runner(512).run(&(gate(), gate(), gate(), gate()), |(a, b, c, u)| {
            let d = trace_distance;
            prop_assert_eq!(d(&a, &a), 0.0);
            prop_assert!((d(&a, &b) - d(&b, &a)).abs() <= 1e-15);
            prop_assert!((0.0..=1.0 + 1e-15).contains(&d(&a, &b)));
            prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c) + 1e-12);
            let left = d(&compose(&u, &a), &compose(&u, &b));
            let right = d(&compose(&a, &u), &compose(&b, &u));
            prop_assert!((left - d(&a, &b)).abs() <= 1e-12, "left invariance {left}");
            prop_assert!(
                (right - d(&a, &b)).abs() <= 1e-12,
                "right invariance {right}"
            );
            let neg = a.quaternion().map(|x| -x);
            let a_neg = GateElement::from_quaternion(neg[0], neg[1], neg[2], neg[3]).unwrap();
            prop_assert!(d(&a, &a_neg) <= 1e-15, "sign is a global phase");
            Ok(())
        }),
    )
}

pub fn round_trips() -> Check {
    report(runner(512).run(&gate(), |g| {
        let v = to_pauli_vector(&g);
        prop_assert!(v.norm() <= FRAC_PI_2 + 1e-12);
        let back = from_pauli_vector(&v).map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert!(trace_distance(&g, &back) <= 1e-9);
        prop_assert!(trace_distance(&compose(&g, &g.adjoint()), &GateElement::IDENTITY) <= 1e-12);
        let lit = format!(
            "U({:e},{:e},{:e},{:e})",
            g.quaternion()[0],
            g.quaternion()[1],
            g.quaternion()[2],
            g.quaternion()[3]
        );
        let parsed =
            hiersynth::gates::parse_gate(&lit).map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert!(trace_distance(&g, &parsed) <= 1e-12);
        Ok(())
    }))?;
    let costs = proptest::collection::vec(0.01f64..1000.0, 1..6);
    report(runner(128).run(&costs, |cs| {
        let table: BTreeMap<u8, f64> = cs
            .iter()
            .enumerate()
            .map(|(i, &c)| (i as u8 + 3, c))
            .collect();
        let model = CostModel::custom(table).map_err(|e| TestCaseError::fail(e.to_string()))?;
        let back = CostModel::from_json(&model.to_json())
            .map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert_eq!(&back, &model);
        prop_assert_eq!(back.fingerprint(), model.fingerprint());
        Ok(())
    }))
}

/// Index answers agree with a scan over every accepted node.
pub fn index_matches_scan() -> Check {
    let db = database(2, 5.0);
    let mut index = SpatialIndex::new();
    index.sync(&db);
    report(runner(256).run(&(gate(), 0.005f64..0.14), |(t, eps)| {
        let fast = best_candidate(&db, &index, &t, eps);
        let slow = scan_optimum(&db, &t, eps);
        prop_assert_eq!(fast, slow);
        let r = search_radius(eps);
        if r < index.mirror_radius() {
            let mut hits: Vec<usize> = index
                .within_radius(&to_pauli_vector(&t), r)
                .into_iter()
                .map(|h| h.node_id)
                .filter(|&id| trace_distance(db.node(id).unwrap().combined(), &t) <= eps)
                .collect();
            hits.sort_unstable();
            let all: Vec<usize> = (0..db.len())
                .filter(|&id| trace_distance(db.node(id).unwrap().combined(), &t) <= eps)
                .collect();
            prop_assert_eq!(hits, all);
        }
        Ok(())
    }))
}

pub fn grow_matches_generate() -> Check {
    report(
        runner(12).run(&(1u8..=3, 0.0f64..4.0, 0.0f64..2.5), |(k, a, extra)| {
            let b = a + extra;
            let mut grown = database(k, a);
            grown
                .grow(b)
                .map_err(|e| TestCaseError::fail(e.to_string()))?;
            let direct = database(k, b);
            prop_assert_eq!(grown.watermark(), direct.watermark());
            prop_assert_eq!(grown.frontier_len(), direct.frontier_len());
            prop_assert!(grown.nodes() == direct.nodes(), "node lists differ");
            Ok(())
        }),
    )
}

pub fn save_load_round_trip() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("db.bin");
    report(runner(8).run(&(1u8..=3, 0.0f64..4.0), |(k, c)| {
        let mut db = database(k, c);
        db.save(&path)
            .map_err(|e| TestCaseError::fail(e.to_string()))?;
        let mut back =
            SequenceDatabase::load(&path).map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert!(back.nodes() == db.nodes());
        prop_assert_eq!(back.watermark(), db.watermark());
        prop_assert_eq!(back.to_bytes(), db.to_bytes());
        db.grow(c + 1.5).unwrap();
        back.grow(c + 1.5).unwrap();
        prop_assert!(back.nodes() == db.nodes(), "growth after reload diverged");
        Ok(())
    }))
}

fn cost_at(
    db: &mut SequenceDatabase,
    index: &mut SpatialIndex,
    t: &GateElement,
    eps: f64,
) -> Result<f64, TestCaseError> {
    synthesize(db, index, t, eps, &GrowthPolicy::default())
        .map(|r| r.cost)
        .map_err(|e| TestCaseError::fail(e.to_string()))
}

pub fn epsilon_monotonicity() -> Check {
    let state = RefCell::new((database(1, 0.0), SpatialIndex::new()));
    report(
        runner(48).run(&(gate(), 0.04f64..0.2, 0.04f64..0.2), |(t, e1, e2)| {
            let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
            let (db, index) = &mut *state.borrow_mut();
            let tight = cost_at(db, index, &t, lo)?;
            let loose = cost_at(db, index, &t, hi)?;
            prop_assert!(
                tight >= loose,
                "cost {tight} at ε={lo} below {loose} at ε={hi}"
            );
            Ok(())
        }),
    )
}

/// A larger gate set never needs a more expensive sequence.
pub fn gate_set_dominance() -> Check {
    let state = RefCell::new(
        (1..=3)
            .map(|k| (database(k, 0.0), SpatialIndex::new()))
            .collect::<Vec<_>>(),
    );
    report(runner(32).run(&(gate(), 0.05f64..0.15), |(t, eps)| {
        let mut costs = Vec::new();
        for (db, index) in state.borrow_mut().iter_mut() {
            costs.push(cost_at(db, index, &t, eps)?);
        }
        prop_assert!(
            costs.windows(2).all(|w| w[1] <= w[0] + 1e-12),
            "costs {costs:?}"
        );
        Ok(())
    }))
}

pub fn experiment_determinism() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut spec = ExperimentSpec::new(
        GateSetSpec::set(1).unwrap(),
        CostModel::catalyst_direct(3).unwrap(),
    );
    spec.epsilons = log_spaced(0.15, 0.08, 3);
    spec.targets = 25;
    let run = |s: &ExperimentSpec| run_experiment(s).map_err(|e| e.to_string());
    let first = run(&spec)?;
    let second = run(&spec)?;
    if first.table != second.table || first.results != second.results {
        return Err("identical specs gave different outcomes".into());
    }
    spec.db_cache = Some(dir.path().join("cache.bin"));
    let cold = run(&spec)?;
    let warm = run(&spec)?;
    if cold.table != first.table || warm.table != first.table {
        return Err("database cache changed the outcome".into());
    }
    spec.seed = 1;
    if run(&spec)?.table.targets_hash == first.table.targets_hash {
        return Err("different seeds drew the same targets".into());
    }
    Ok(())
}

pub fn batch_matches_sequential() -> Check {
    let targets = draw_targets(7, 50);
    let eps = 0.06;
    let (mut db, mut index) = (database(1, 0.0), SpatialIndex::new());
    let batch = batch_synthesize(&mut db, &mut index, &targets, eps, &GrowthPolicy::default())
        .map_err(|e| e.to_string())?;
    let (mut db, mut index) = (database(1, 0.0), SpatialIndex::new());
    for (i, (t, b)) in targets.iter().zip(&batch).enumerate() {
        let s = synthesize(&mut db, &mut index, t, eps, &GrowthPolicy::default())
            .map_err(|e| e.to_string())?;
        if (s.cost, s.node_id) != (b.cost, b.node_id) {
            return Err(format!(
                "target {i}: batch {:?} vs sequential {:?}",
                (b.cost, b.node_id),
                (s.cost, s.node_id)
            ));
        }
    }
    Ok(())
}

/// The 95% slope interval covers the true slope in at least 90 of 100
/// synthetic trials.
pub fn ci_calibration() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let noise = Normal::new(0.0, 0.5).unwrap();
    let xs = log_spaced(1.0, 2.0, 8);
    let mut covered = 0;
    for _ in 0..100 {
        let pts: Vec<(f64, f64)> = xs
            .iter()
            .map(|&x| (x, 2.0 + 3.0 * x + noise.sample(&mut rng)))
            .collect();
        let fit = ols_fit(&pts).map_err(|e| e.to_string())?;
        if (fit.slope - 3.0).abs() <= fit.slope_ci_halfwidth {
            covered += 1;
        }
    }
    if covered >= 90 {
        Ok(())
    } else {
        Err(format!(
            "interval covered the true slope in {covered}/100 trials"
        ))
    }
}

pub type Suite = (&'static str, fn() -> Check);

pub const ALL: [Suite; 10] = [
    ("metric axioms", metric_axioms),
    ("round trips", round_trips),
    ("index matches scan", index_matches_scan),
    ("grow matches generate", grow_matches_generate),
    ("save/load round trip", save_load_round_trip),
    ("epsilon monotonicity", epsilon_monotonicity),
    ("gate-set dominance", gate_set_dominance),
    ("experiment determinism", experiment_determinism),
    ("batch matches sequential", batch_matches_sequential),
    ("confidence interval calibration", ci_calibration),
];
