//! Cost-optimal sequence database.
//!
//! Generation is a Dijkstra search over the sequence tree. Each tree edge
//! appends one base gate, so a node's cost is the sum of its gates' costs.
//! The first time a combined gate is reached it is accepted, and because
//! nodes leave the queue in non-decreasing cost order that first sequence is
//! cost-optimal. Later arrivals at the same gate are dropped.
//!
//! Children are expanded lazily. Base gates are ranked by cost, and the
//! queue holds, per accepted node, only the cheapest child not yet tried.
//! Popping it materializes that child and enqueues the next sibling. The
//! queue therefore stays as small as the accepted set, instead of holding
//! one entry per base gate for every accepted node.
//!
//! Ties are broken by parent id and then gate rank, so generation is fully
//! deterministic and growing in several steps reproduces a single run.

mod io;
pub mod keys;

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeMap, BinaryHeap};

use thiserror::Error;

use crate::cost::{CostError, CostModel};
use crate::gates::{BaseGate, GateError, GateSet, GateSetSpec};
use crate::psu2::{compose, to_pauli_vector, trace_distance, GateElement};

pub use io::FORMAT_VERSION;
pub use keys::{KeyTable, VectorKey, KEY_RESOLUTION};

/// Default ceiling on the number of accepted nodes.
pub const DEFAULT_NODE_LIMIT: usize = 50_000_000;

/// Parent id of the root's pseudo-entry in the queue.
const NO_PARENT: u32 = u32::MAX;

#[derive(Debug, Error)]
pub enum DbError {
    #[error("maximum cost must be nonnegative, got {0}")]
    NegativeBudget(f64),
    #[error("cannot shrink database: watermark {watermark} exceeds requested {requested}")]
    BudgetBelowWatermark { watermark: f64, requested: f64 },
    #[error("accepted-node limit of {limit} reached at cost {cost}")]
    ResourceLimit { limit: usize, cost: f64 },
    #[error("node {0} does not exist")]
    UnknownNode(usize),
    #[error("zero-cost gates must be Cliffords and hierarchy gates must cost > 0")]
    InvalidCosts,
    #[error(transparent)]
    Cost(#[from] CostError),
    #[error(transparent)]
    Gate(#[from] GateError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("not a sequence database file")]
    BadMagic,
    #[error("unsupported format version {found} (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },
    #[error("checksum mismatch")]
    ChecksumMismatch,
    #[error("{what} fingerprint mismatch")]
    FingerprintMismatch { what: &'static str },
    #[error("malformed database file: {0}")]
    Format(String),
}

/// One accepted sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeqNode {
    combined: GateElement,
    cost: f64,
    parent: u32,
    gate: u16,
    depth: u16,
}

impl SeqNode {
    pub fn combined(&self) -> &GateElement {
        &self.combined
    }

    pub fn cost(&self) -> f64 {
        self.cost
    }

    pub fn parent_id(&self) -> Option<usize> {
        (self.parent != NO_PARENT).then_some(self.parent as usize)
    }

    /// Id of the base gate appended at this node; `None` for the root.
    pub fn base_gate_id(&self) -> Option<u16> {
        self.parent_id().map(|_| self.gate)
    }

    pub fn depth(&self) -> usize {
        usize::from(self.depth)
    }
}

/// The cheapest untried child of `parent`: base gate number `rank` in cost
/// order.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Successor {
    cost: f64,
    parent: u32,
    rank: u16,
}

impl Eq for Successor {}

impl Ord for Successor {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cost
            .total_cmp(&other.cost)
            .then(self.parent.cmp(&other.parent))
            .then(self.rank.cmp(&other.rank))
    }
}

impl PartialOrd for Successor {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Summary counts for a database.
#[derive(Debug, Clone, PartialEq)]
pub struct DbStats {
    pub accepted: usize,
    pub frontier: usize,
    pub watermark: f64,
    pub max_accepted_cost: f64,
    /// Accepted nodes per sequence length.
    pub per_depth: BTreeMap<usize, usize>,
    /// Base gates of each hierarchy order summed over all accepted sequences
    /// (Cliffords counted under order 2).
    pub per_order: BTreeMap<u8, usize>,
}

/// The generated database: accepted nodes, their key table and the queue of
/// pending successors.
#[derive(Debug, Clone)]
pub struct SequenceDatabase {
    gate_set: GateSet,
    cost_model: CostModel,
    gate_costs: Vec<f64>,
    /// Gate ids sorted by (cost, id).
    ranked: Vec<u16>,
    nodes: Vec<SeqNode>,
    keys: KeyTable<u32>,
    frontier: BinaryHeap<Reverse<Successor>>,
    watermark: f64,
    node_limit: usize,
}

impl SequenceDatabase {
    /// An empty database; the first growth step accepts the root.
    pub fn new(gate_set: GateSet, cost_model: CostModel) -> Result<Self, DbError> {
        let gate_costs = cost_model.gate_costs(&gate_set)?;
        for (g, c) in gate_set.gates().iter().zip(&gate_costs) {
            if g.is_clifford() != (*c == 0.0) || *c < 0.0 {
                return Err(DbError::InvalidCosts);
            }
        }
        let mut ranked: Vec<u16> = (0..gate_set.len() as u16).collect();
        ranked.sort_by(|&a, &b| {
            gate_costs[usize::from(a)]
                .total_cmp(&gate_costs[usize::from(b)])
                .then(a.cmp(&b))
        });
        let mut frontier = BinaryHeap::new();
        frontier.push(Reverse(Successor {
            cost: 0.0,
            parent: NO_PARENT,
            rank: 0,
        }));
        Ok(Self {
            gate_set,
            cost_model,
            gate_costs,
            ranked,
            nodes: Vec::new(),
            keys: KeyTable::new(),
            frontier,
            watermark: f64::NEG_INFINITY,
            node_limit: DEFAULT_NODE_LIMIT,
        })
    }

    /// Runs generation from scratch up to `max_cost`.
    pub fn generate(
        gate_set: GateSet,
        cost_model: CostModel,
        max_cost: f64,
    ) -> Result<Self, DbError> {
        if !(max_cost >= 0.0) {
            return Err(DbError::NegativeBudget(max_cost));
        }
        let mut db = Self::new(gate_set, cost_model)?;
        db.grow(max_cost)?;
        Ok(db)
    }

    /// Convenience: resolve a gate-set spec and generate.
    pub fn generate_for(
        spec: GateSetSpec,
        cost_model: CostModel,
        max_cost: f64,
    ) -> Result<Self, DbError> {
        Self::generate(GateSet::new(spec)?, cost_model, max_cost)
    }

    pub fn with_node_limit(mut self, limit: usize) -> Self {
        self.node_limit = limit;
        self
    }

    pub fn set_node_limit(&mut self, limit: usize) {
        self.node_limit = limit;
    }

    pub fn node_limit(&self) -> usize {
        self.node_limit
    }

    /// The node a queue entry would create.
    fn materialize(&self, s: &Successor) -> SeqNode {
        if s.parent == NO_PARENT {
            return SeqNode {
                combined: GateElement::IDENTITY,
                cost: 0.0,
                parent: NO_PARENT,
                gate: u16::MAX,
                depth: 0,
            };
        }
        let parent = &self.nodes[s.parent as usize];
        let gate = self.ranked[usize::from(s.rank)];
        SeqNode {
            combined: compose(
                &parent.combined,
                &self.gate_set.gates()[usize::from(gate)].element,
            ),
            cost: s.cost,
            parent: s.parent,
            gate,
            depth: parent.depth.saturating_add(1),
        }
    }

    fn successor(&self, parent: u32, rank: usize) -> Option<Successor> {
        let gate = *self.ranked.get(rank)?;
        Some(Successor {
            cost: self.nodes[parent as usize].cost + self.gate_costs[usize::from(gate)],
            parent,
            rank: rank as u16,
        })
    }

    /// Continues generation until every sequence of cost ≤ `new_max_cost` has
    /// been resolved. Growing to the current watermark is a no-op.
    ///
    /// On [`DbError::ResourceLimit`] the database stays consistent and can be
    /// grown again after raising the limit; its watermark is left unchanged.
    pub fn grow(&mut self, new_max_cost: f64) -> Result<(), DbError> {
        if !(new_max_cost >= 0.0) {
            return Err(DbError::NegativeBudget(new_max_cost));
        }
        if new_max_cost < self.watermark {
            return Err(DbError::BudgetBelowWatermark {
                watermark: self.watermark,
                requested: new_max_cost,
            });
        }
        while let Some(&Reverse(s)) = self.frontier.peek() {
            if s.cost > new_max_cost {
                break;
            }
            let node = self.materialize(&s);
            let v = to_pauli_vector(&node.combined);
            let fresh = self.keys.find(&v).is_none();
            if fresh && self.nodes.len() >= self.node_limit {
                return Err(DbError::ResourceLimit {
                    limit: self.node_limit,
                    cost: s.cost,
                });
            }
            self.frontier.pop();
            if s.parent != NO_PARENT {
                if let Some(next) = self.successor(s.parent, usize::from(s.rank) + 1) {
                    self.frontier.push(Reverse(next));
                }
            }
            if fresh {
                let id = self.nodes.len() as u32;
                self.nodes.push(node);
                self.keys.insert(&v, id);
                if let Some(first) = self.successor(id, 0) {
                    self.frontier.push(Reverse(first));
                }
            }
        }
        self.watermark = new_max_cost;
        Ok(())
    }

    pub fn gate_set(&self) -> &GateSet {
        &self.gate_set
    }

    pub fn cost_model(&self) -> &CostModel {
        &self.cost_model
    }

    pub fn gate_costs(&self) -> &[f64] {
        &self.gate_costs
    }

    /// Cost bound up to which the database is complete.
    pub fn watermark(&self) -> f64 {
        self.watermark
    }

    /// Number of accepted nodes. Node ids are `0..len()` in acceptance
    /// order, so costs are non-decreasing in id.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[SeqNode] {
        &self.nodes
    }

    pub fn node(&self, id: usize) -> Option<&SeqNode> {
        self.nodes.get(id)
    }

    /// Number of queued successors.
    pub fn frontier_len(&self) -> usize {
        self.frontier.len()
    }

    /// Cost of the next sequence that growth would examine.
    pub fn next_frontier_cost(&self) -> Option<f64> {
        self.frontier.peek().map(|Reverse(s)| s.cost)
    }

    /// Accepted node holding `g` (up to key resolution), if any.
    pub fn find_accepted(&self, g: &GateElement) -> Option<usize> {
        let id = *self.keys.get(&to_pauli_vector(g))? as usize;
        (trace_distance(&self.nodes[id].combined, g) < 1e-6).then_some(id)
    }

    /// Root-to-node base-gate ids.
    pub fn decode_ids(&self, id: usize) -> Result<Vec<u16>, DbError> {
        if id >= self.nodes.len() {
            return Err(DbError::UnknownNode(id));
        }
        let mut out = Vec::with_capacity(self.nodes[id].depth());
        let mut cur = id;
        while let Some(p) = self.nodes[cur].parent_id() {
            out.push(self.nodes[cur].gate);
            cur = p;
        }
        out.reverse();
        Ok(out)
    }

    /// Root-to-node base gates; composing them in order gives the node's
    /// combined gate.
    pub fn decode_sequence(&self, id: usize) -> Result<Vec<BaseGate>, DbError> {
        Ok(self
            .decode_ids(id)?
            .into_iter()
            .map(|g| self.gate_set.gates()[usize::from(g)].clone())
            .collect())
    }

    pub fn stats(&self) -> DbStats {
        let mut per_depth = BTreeMap::new();
        let mut per_order: BTreeMap<u8, usize> = BTreeMap::new();
        per_order.insert(2, 0);
        for l in self.gate_set.orders() {
            per_order.insert(l, 0);
        }
        // Per-node counts of each order along the root path, parent first.
        let width = usize::from(self.gate_set.spec.max_order) - 1;
        let mut along: Vec<u32> = Vec::with_capacity(self.nodes.len() * width);
        let mut max_cost = f64::NEG_INFINITY;
        for node in &self.nodes {
            *per_depth.entry(node.depth()).or_insert(0) += 1;
            max_cost = max_cost.max(node.cost);
            let start = along.len();
            match node.parent_id() {
                Some(p) => {
                    along.extend_from_within(p * width..(p + 1) * width);
                    let order = self.gate_set.gates()[usize::from(node.gate)].order;
                    along[start + usize::from(order) - 2] += 1;
                }
                None => along.extend(std::iter::repeat_n(0, width)),
            }
        }
        for chunk in along.chunks(width) {
            for (i, &c) in chunk.iter().enumerate() {
                *per_order.entry(i as u8 + 2).or_insert(0) += c as usize;
            }
        }
        DbStats {
            accepted: self.nodes.len(),
            frontier: self.frontier.len(),
            watermark: self.watermark,
            max_accepted_cost: max_cost,
            per_depth,
            per_order,
        }
    }
}
