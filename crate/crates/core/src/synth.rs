//! Cheapest-sequence synthesis against a growing database.
//!
//! Candidates come from a radius query on the spatial index and are then
//! filtered by exact trace distance. When nothing qualifies the database is
//! grown by one cost increment and the query is repeated.

use std::f64::consts::SQRT_2;
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::cost::CostModel;
use crate::gates::BaseGate;
use crate::index::SpatialIndex;
use crate::psu2::{compose, to_pauli_vector, trace_distance, GateElement};
use crate::seqdb::{DbError, SequenceDatabase};

/// Relative slack added on top of the `2√2·ε` search radius.
pub const RADIUS_MARGIN: f64 = 0.25;

/// Tolerance used by [`verify`].
pub const VERIFY_TOLERANCE: f64 = 1e-10;

/// Environment variable capping the worker-thread count.
pub const THREADS_ENV: &str = "HIER_SYNTH_THREADS";

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("epsilon must be positive and finite, got {0}")]
    InvalidEpsilon(f64),
    #[error("growth ceiling {ceiling} reached without a sequence within epsilon (watermark {watermark})")]
    CeilingReached { ceiling: f64, watermark: f64 },
    #[error(transparent)]
    Db(#[from] DbError),
}

impl SynthError {
    /// True for the errors that mean "ran out of budget" rather than misuse.
    pub fn is_resource_limit(&self) -> bool {
        matches!(
            self,
            SynthError::CeilingReached { .. } | SynthError::Db(DbError::ResourceLimit { .. })
        )
    }
}

/// How the database is grown when no sequence is close enough.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthPolicy {
    /// Cost added per retry; `None` uses the cheapest hierarchy-gate cost.
    pub increment: Option<f64>,
    /// The watermark is never raised beyond this.
    pub ceiling: f64,
}

impl Default for GrowthPolicy {
    fn default() -> Self {
        Self {
            increment: None,
            ceiling: f64::INFINITY,
        }
    }
}

impl GrowthPolicy {
    pub fn with_ceiling(ceiling: f64) -> Self {
        Self {
            ceiling,
            ..Self::default()
        }
    }

    /// Never grow; answer from the database as it stands.
    pub fn frozen() -> Self {
        Self {
            increment: None,
            ceiling: f64::NEG_INFINITY,
        }
    }

    fn step(&self, db: &SequenceDatabase) -> f64 {
        self.increment.unwrap_or_else(|| {
            db.gate_costs()
                .iter()
                .copied()
                .filter(|&c| c > 0.0)
                .fold(f64::INFINITY, f64::min)
        })
    }

    /// Raises the watermark by one step.
    fn advance(&self, db: &mut SequenceDatabase) -> Result<(), SynthError> {
        let w = db.watermark();
        let mut next = if w < 0.0 { 0.0 } else { w + self.step(db) };
        if next > self.ceiling {
            if w < self.ceiling {
                next = self.ceiling;
            } else {
                return Err(SynthError::CeilingReached {
                    ceiling: self.ceiling,
                    watermark: w,
                });
            }
        }
        db.grow(next)?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SynthesisResult {
    pub sequence: Vec<BaseGate>,
    pub cost: f64,
    /// Trace distance between the sequence and the target.
    pub achieved_error: f64,
    pub epsilon: f64,
    pub node_id: usize,
    /// Database watermark when the answer was produced.
    pub grew_to: f64,
}

impl SynthesisResult {
    pub fn labels(&self) -> Vec<&str> {
        self.sequence.iter().map(|g| g.label.as_str()).collect()
    }

    /// The product of the sequence, left to right.
    pub fn recompose(&self) -> GateElement {
        self.sequence
            .iter()
            .fold(GateElement::IDENTITY, |acc, g| compose(&acc, &g.element))
    }
}

/// Euclidean search radius in generator space for trace distance `epsilon`.
pub fn search_radius(epsilon: f64) -> f64 {
    2.0 * SQRT_2 * epsilon * (1.0 + RADIUS_MARGIN)
}

/// Cheapest accepted node within trace distance `epsilon` of `target`,
/// by scanning nodes in id order. Costs never decrease with id, so the first
/// hit is optimal and ties go to the lower id.
pub fn scan_optimum(
    db: &SequenceDatabase,
    target: &GateElement,
    epsilon: f64,
) -> Option<(usize, f64)> {
    db.nodes()
        .iter()
        .enumerate()
        .map(|(id, node)| (id, trace_distance(node.combined(), target)))
        .find(|&(_, d)| d <= epsilon)
}

/// Cheapest accepted node within `epsilon`, using the index when its
/// mirror band covers the search radius and a full scan otherwise.
///
/// `index` must be synced with `db`.
pub fn best_candidate(
    db: &SequenceDatabase,
    index: &SpatialIndex,
    target: &GateElement,
    epsilon: f64,
) -> Option<(usize, f64)> {
    let radius = search_radius(epsilon);
    if radius >= index.mirror_radius() {
        return scan_optimum(db, target, epsilon);
    }
    index
        .within_radius(&to_pauli_vector(target), radius)
        .into_iter()
        .map(|hit| {
            let node = db.node(hit.node_id).expect("indexed id exists");
            (hit.node_id, trace_distance(node.combined(), target))
        })
        .filter(|&(_, d)| d <= epsilon)
        .min_by_key(|&(id, _)| id)
}

/// Shared worker pool, sized by `HIER_SYNTH_THREADS` when set.
pub fn thread_pool() -> &'static rayon::ThreadPool {
    static POOL: OnceLock<rayon::ThreadPool> = OnceLock::new();
    POOL.get_or_init(|| {
        let threads = std::env::var(THREADS_ENV)
            .ok()
            .and_then(|s| s.trim().parse::<usize>().ok())
            .unwrap_or(0);
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("thread pool")
    })
}

fn check_epsilon(epsilon: f64) -> Result<(), SynthError> {
    if epsilon > 0.0 && epsilon.is_finite() {
        Ok(())
    } else {
        Err(SynthError::InvalidEpsilon(epsilon))
    }
}

fn make_result(
    db: &SequenceDatabase,
    id: usize,
    d: f64,
    epsilon: f64,
) -> Result<SynthesisResult, SynthError> {
    Ok(SynthesisResult {
        sequence: db.decode_sequence(id)?,
        cost: db.node(id).expect("node exists").cost(),
        achieved_error: d,
        epsilon,
        node_id: id,
        grew_to: db.watermark(),
    })
}

/// Cheapest sequence within trace distance `epsilon` of `target`, growing
/// the database per `policy` until one exists.
pub fn synthesize(
    db: &mut SequenceDatabase,
    index: &mut SpatialIndex,
    target: &GateElement,
    epsilon: f64,
    policy: &GrowthPolicy,
) -> Result<SynthesisResult, SynthError> {
    check_epsilon(epsilon)?;
    if db.watermark() < 0.0 {
        db.grow(0.0)?;
    }
    loop {
        index.sync(db);
        if let Some((id, d)) = best_candidate(db, index, target, epsilon) {
            return make_result(db, id, d, epsilon);
        }
        policy.advance(db)?;
    }
}

/// Results of a batch run that may have stopped early.
#[derive(Debug)]
pub struct BatchOutcome {
    /// One entry per target; `None` where no answer was found.
    pub results: Vec<Option<SynthesisResult>>,
    /// Set when growth stopped before every target was answered.
    pub error: Option<SynthError>,
}

impl BatchOutcome {
    pub fn into_result(self) -> Result<Vec<SynthesisResult>, SynthError> {
        match self.error {
            Some(e) => Err(e),
            None => Ok(self
                .results
                .into_iter()
                .map(|r| r.expect("complete batch"))
                .collect()),
        }
    }
}

/// Synthesizes all targets, keeping whatever was answered if growth stops.
///
/// Growth is serialized; each round queries the still-unanswered targets in
/// parallel. A target answered at an earlier watermark keeps its answer,
/// since every later node costs more than that watermark.
pub fn batch_synthesize_partial(
    db: &mut SequenceDatabase,
    index: &mut SpatialIndex,
    targets: &[GateElement],
    epsilon: f64,
    policy: &GrowthPolicy,
) -> BatchOutcome {
    let mut found: Vec<Option<(usize, f64)>> = vec![None; targets.len()];
    let error = run_batch(db, index, targets, epsilon, policy, &mut found).err();
    let mut results = Vec::with_capacity(targets.len());
    let mut error = error;
    for hit in found {
        results.push(match hit.map(|(id, d)| make_result(db, id, d, epsilon)) {
            Some(Ok(r)) => Some(r),
            Some(Err(e)) => {
                error.get_or_insert(e);
                None
            }
            None => None,
        });
    }
    BatchOutcome { results, error }
}

fn run_batch(
    db: &mut SequenceDatabase,
    index: &mut SpatialIndex,
    targets: &[GateElement],
    epsilon: f64,
    policy: &GrowthPolicy,
    found: &mut [Option<(usize, f64)>],
) -> Result<(), SynthError> {
    check_epsilon(epsilon)?;
    if targets.is_empty() {
        return Ok(());
    }
    if db.watermark() < 0.0 {
        db.grow(0.0)?;
    }
    let mut pending: Vec<usize> = (0..targets.len()).collect();
    loop {
        index.sync(db);
        let (db_ref, index_ref) = (&*db, &*index);
        let answers: Vec<Option<(usize, f64)>> = thread_pool().install(|| {
            pending
                .par_iter()
                .map(|&t| best_candidate(db_ref, index_ref, &targets[t], epsilon))
                .collect()
        });
        let mut still = Vec::new();
        for (&t, a) in pending.iter().zip(answers) {
            match a {
                Some(hit) => found[t] = Some(hit),
                None => still.push(t),
            }
        }
        pending = still;
        if pending.is_empty() {
            return Ok(());
        }
        policy.advance(db)?;
    }
}

/// Synthesizes every target; fails if any target cannot be answered.
/// Every result carries the final watermark.
pub fn batch_synthesize(
    db: &mut SequenceDatabase,
    index: &mut SpatialIndex,
    targets: &[GateElement],
    epsilon: f64,
    policy: &GrowthPolicy,
) -> Result<Vec<SynthesisResult>, SynthError> {
    batch_synthesize_partial(db, index, targets, epsilon, policy).into_result()
}

/// Independent re-check of a stored result.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyReport {
    pub recomputed_error: f64,
    pub recomputed_cost: f64,
    pub error_matches: bool,
    pub cost_matches: bool,
    pub within_epsilon: bool,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.error_matches && self.cost_matches && self.within_epsilon
    }
}

/// Recomposes `result.sequence` and recomputes its cost under `costs`,
/// comparing both against the stored fields at [`VERIFY_TOLERANCE`].
pub fn verify(result: &SynthesisResult, target: &GateElement, costs: &CostModel) -> VerifyReport {
    let recomputed_error = trace_distance(&result.recompose(), target);
    let recomputed_cost = result
        .sequence
        .iter()
        .map(|g| costs.base_gate_cost(g).unwrap_or(f64::NAN))
        .sum::<f64>();
    VerifyReport {
        recomputed_error,
        recomputed_cost,
        error_matches: (recomputed_error - result.achieved_error).abs() <= VERIFY_TOLERANCE,
        cost_matches: (recomputed_cost - result.cost).abs() <= VERIFY_TOLERANCE,
        within_epsilon: recomputed_error <= result.epsilon + VERIFY_TOLERANCE,
    }
}
