//! Batch synthesis of Haar-random targets over an ε grid.
//!
//! One target list is drawn per experiment and reused at every ε. The grid
//! is processed from the largest ε down, so each step only grows the shared
//! database further.

mod emit;

use std::path::PathBuf;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cost::CostModel;
use crate::gates::{Fnv, GateError, GateSet, GateSetSpec};
use crate::index::SpatialIndex;
use crate::psu2::{haar_random_gate, GateElement};
use crate::seqdb::{DbError, SequenceDatabase};
use crate::stats::{ols_fit, FitError, FitResult};
use crate::synth::{batch_synthesize_partial, GrowthPolicy, SynthError, SynthesisResult};

pub use emit::{
    emit_fit, emit_table, fit_to_csv, parse_fit_csv, parse_table_csv, table_to_csv, EmitError,
    EmitFormat,
};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("epsilon grid must be nonempty with positive finite values")]
    BadEpsilons,
    #[error("target count must be at least 1")]
    NoTargets,
    #[error(transparent)]
    Gate(#[from] GateError),
    #[error(transparent)]
    Db(#[from] DbError),
}

#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub gate_set: GateSetSpec,
    pub cost_model: CostModel,
    pub epsilons: Vec<f64>,
    pub targets: usize,
    pub seed: u64,
    pub growth_ceiling: f64,
    /// Database file reused across runs when its fingerprints match.
    pub db_cache: Option<PathBuf>,
}

impl ExperimentSpec {
    pub fn new(gate_set: GateSetSpec, cost_model: CostModel) -> Self {
        Self {
            gate_set,
            cost_model,
            epsilons: default_epsilon_grid(),
            targets: 500,
            seed: 0,
            growth_ceiling: f64::INFINITY,
            db_cache: None,
        }
    }

    fn validate(&self) -> Result<(), ExperimentError> {
        if self.epsilons.is_empty() || self.epsilons.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
            return Err(ExperimentError::BadEpsilons);
        }
        if self.targets == 0 {
            return Err(ExperimentError::NoTargets);
        }
        Ok(())
    }
}

/// `n` log-spaced values from `hi` down to `lo`, both included.
pub fn log_spaced(hi: f64, lo: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![hi],
        _ => (0..n)
            .map(|i| hi * (lo / hi).powf(i as f64 / (n - 1) as f64))
            .collect(),
    }
}

/// Eight log-spaced points from 0.1 to 0.01.
pub fn default_epsilon_grid() -> Vec<f64> {
    log_spaced(0.1, 0.01, 8)
}

/// `n` Haar-random targets from `seed`.
pub fn draw_targets(seed: u64, n: usize) -> Vec<GateElement> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| haar_random_gate(&mut rng)).collect()
}

/// Stable hash of a target list (exact quaternion bits).
pub fn hash_targets(targets: &[GateElement]) -> u64 {
    let mut h = Fnv::new();
    for t in targets {
        for c in t.quaternion() {
            h.write(&c.to_bits().to_le_bytes());
        }
    }
    h.finish()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub epsilon: f64,
    pub mean_cost: f64,
    /// Standard error of the mean.
    pub stderr_cost: f64,
    /// Number of targets answered at this ε.
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentTable {
    /// Rows in the order of `ExperimentSpec::epsilons`.
    pub rows: Vec<ExperimentRow>,
    pub targets_hash: u64,
    pub final_watermark: f64,
    /// True when growth stopped before every target was answered.
    pub partial: bool,
}

impl ExperimentTable {
    /// `(log10(1/ε), mean cost)` pairs for fitting.
    pub fn fit_points(&self) -> Vec<(f64, f64)> {
        self.rows
            .iter()
            .filter(|r| r.n > 0)
            .map(|r| ((1.0 / r.epsilon).log10(), r.mean_cost))
            .collect()
    }

    pub fn fit(&self) -> Result<FitResult, FitError> {
        ols_fit(&self.fit_points())
    }
}

#[derive(Debug)]
pub struct ExperimentOutcome {
    pub table: ExperimentTable,
    /// Per-ε results in grid order; `None` for unanswered targets.
    pub results: Vec<Vec<Option<SynthesisResult>>>,
    /// The growth error that cut the run short, if any.
    pub error: Option<SynthError>,
}

fn open_database(spec: &ExperimentSpec) -> Result<SequenceDatabase, ExperimentError> {
    let set = GateSet::new(spec.gate_set)?;
    if let Some(path) = spec.db_cache.as_ref().filter(|p| p.exists()) {
        let db = SequenceDatabase::load(path)?;
        if db.gate_set().fingerprint() == set.fingerprint()
            && db.cost_model().fingerprint() == spec.cost_model.fingerprint()
        {
            return Ok(db);
        }
    }
    Ok(SequenceDatabase::new(set, spec.cost_model.clone())?)
}

/// Runs the full experiment on freshly drawn targets.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentOutcome, ExperimentError> {
    spec.validate()?;
    let targets = draw_targets(spec.seed, spec.targets);
    run_experiment_with_targets(spec, &targets)
}

/// Runs the experiment on a caller-supplied target list.
pub fn run_experiment_with_targets(
    spec: &ExperimentSpec,
    targets: &[GateElement],
) -> Result<ExperimentOutcome, ExperimentError> {
    spec.validate()?;
    if targets.is_empty() {
        return Err(ExperimentError::NoTargets);
    }
    let targets_hash = hash_targets(targets);
    let mut db = open_database(spec)?;
    let start_len = db.len();
    let mut index = SpatialIndex::new();
    let policy = GrowthPolicy::with_ceiling(spec.growth_ceiling);

    let mut order: Vec<usize> = (0..spec.epsilons.len()).collect();
    order.sort_by(|&a, &b| {
        spec.epsilons[b]
            .total_cmp(&spec.epsilons[a])
            .then(a.cmp(&b))
    });

    let mut rows = vec![None; spec.epsilons.len()];
    let mut results = vec![Vec::new(); spec.epsilons.len()];
    let mut error = None;
    for i in order {
        let eps = spec.epsilons[i];
        if error.is_some() {
            // Earlier growth failed; answer what the database already holds.
            let out = batch_synthesize_partial(
                &mut db,
                &mut index,
                targets,
                eps,
                &GrowthPolicy::frozen(),
            );
            rows[i] = Some(summarize(eps, &out.results));
            results[i] = out.results;
            continue;
        }
        let out = batch_synthesize_partial(&mut db, &mut index, targets, eps, &policy);
        rows[i] = Some(summarize(eps, &out.results));
        results[i] = out.results;
        error = out.error;
    }

    if let Some(path) = &spec.db_cache {
        if db.len() != start_len || !path.exists() {
            db.save(path)?;
        }
    }

    Ok(ExperimentOutcome {
        table: ExperimentTable {
            rows: rows
                .into_iter()
                .map(|r| r.expect("every row filled"))
                .collect(),
            targets_hash,
            final_watermark: db.watermark(),
            partial: error.is_some(),
        },
        results,
        error,
    })
}

fn summarize(epsilon: f64, results: &[Option<SynthesisResult>]) -> ExperimentRow {
    let costs: Vec<f64> = results.iter().flatten().map(|r| r.cost).collect();
    let n = costs.len();
    if n == 0 {
        return ExperimentRow {
            epsilon,
            mean_cost: f64::NAN,
            stderr_cost: f64::NAN,
            n,
        };
    }
    let mean = costs.iter().sum::<f64>() / n as f64;
    let stderr = if n > 1 {
        let var = costs.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        (var / n as f64).sqrt()
    } else {
        0.0
    };
    ExperimentRow {
        epsilon,
        mean_cost: mean,
        stderr_cost: stderr,
        n,
    }
}
