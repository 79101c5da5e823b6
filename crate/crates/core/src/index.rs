//! Radius search over accepted generator vectors.
//!
//! A plain 3-d tree over Pauli vectors. The ball of generators wraps around
//! at its surface (`v` and `−v` on the sphere of radius π/2 name the same
//! gate), so every point within [`SpatialIndex::mirror_radius`] of the
//! surface is stored a second time at `−v`. Queries merge the two copies and
//! report each node once at its smaller distance. The result is exact for
//! query radii up to the mirror radius.
//!
//! Euclidean distance here is only a search heuristic; the synthesizer
//! re-checks every candidate with the exact trace distance.

use std::f64::consts::FRAC_PI_2;

use crate::psu2::{to_pauli_vector, PauliVector, BALL_TOLERANCE};
use crate::seqdb::SequenceDatabase;

pub const DEFAULT_MIRROR_RADIUS: f64 = 0.35;

const NIL: u32 = u32::MAX;

#[derive(Debug, Clone, Copy)]
struct KdNode {
    point: [f64; 3],
    payload: u32,
    axis: u8,
    left: u32,
    right: u32,
}

/// One search hit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub node_id: usize,
    pub distance: f64,
}

#[derive(Debug, Clone)]
pub struct SpatialIndex {
    nodes: Vec<KdNode>,
    root: u32,
    depth: usize,
    primaries: usize,
    mirror_radius: f64,
    /// Number of database accepted ids already inserted.
    synced: usize,
}

impl Default for SpatialIndex {
    fn default() -> Self {
        Self::new()
    }
}

impl SpatialIndex {
    pub fn new() -> Self {
        Self::with_mirror_radius(DEFAULT_MIRROR_RADIUS)
    }

    pub fn with_mirror_radius(mirror_radius: f64) -> Self {
        assert!(mirror_radius >= 0.0, "mirror radius must be nonnegative");
        Self {
            nodes: Vec::new(),
            root: NIL,
            depth: 0,
            primaries: 0,
            mirror_radius,
            synced: 0,
        }
    }

    /// An index over every accepted node of `db`.
    pub fn from_database(db: &SequenceDatabase) -> Self {
        let mut index = Self::new();
        index.sync(db);
        index
    }

    pub fn mirror_radius(&self) -> f64 {
        self.mirror_radius
    }

    /// Number of primary entries (one per inserted node).
    pub fn len(&self) -> usize {
        self.primaries
    }

    pub fn is_empty(&self) -> bool {
        self.primaries == 0
    }

    /// Primary plus mirror entries.
    pub fn entry_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn mirror_count(&self) -> usize {
        self.nodes.len() - self.primaries
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// How many database nodes this index has consumed.
    pub fn synced_len(&self) -> usize {
        self.synced
    }

    /// Adds `point` under `node_id`, plus its mirror when near the surface.
    ///
    /// # Panics
    ///
    /// If `‖point‖ > π/2 + 1e-9`.
    pub fn insert(&mut self, point: &PauliVector, node_id: usize) {
        self.push_entries(point, node_id);
        self.rebalance_if_deep();
    }

    /// Inserts the database's newly accepted nodes. Large batches trigger a
    /// full balanced rebuild instead of one-by-one insertion.
    pub fn sync(&mut self, db: &SequenceDatabase) {
        let fresh = &db.nodes()[self.synced.min(db.len())..];
        if fresh.is_empty() {
            return;
        }
        let bulk = fresh.len() > self.primaries;
        for (offset, node) in fresh.iter().enumerate() {
            let id = self.synced + offset;
            let v = to_pauli_vector(node.combined());
            if bulk {
                self.push_unlinked(&v, id);
            } else {
                self.push_entries(&v, id);
            }
        }
        self.synced = db.len();
        if bulk {
            self.rebuild();
        } else {
            self.rebalance_if_deep();
        }
    }

    /// Every node within Euclidean `radius` of `point`, each reported once
    /// at its smaller primary/mirror distance, sorted by distance then id.
    pub fn within_radius(&self, point: &PauliVector, radius: f64) -> Vec<Neighbor> {
        self.within_radius_counted(point, radius).0
    }

    /// [`SpatialIndex::within_radius`] plus the number of tree nodes visited.
    pub fn within_radius_counted(
        &self,
        point: &PauliVector,
        radius: f64,
    ) -> (Vec<Neighbor>, usize) {
        assert!(radius >= 0.0, "radius must be nonnegative");
        let q = point.as_array();
        let r2 = radius * radius;
        let mut hits = Vec::new();
        let mut visited = 0;
        let mut stack = Vec::with_capacity(64);
        if self.root != NIL {
            stack.push(self.root);
        }
        while let Some(i) = stack.pop() {
            visited += 1;
            let n = &self.nodes[i as usize];
            let d2 = dist2(&n.point, &q);
            if d2 <= r2 {
                hits.push(Neighbor {
                    node_id: n.payload as usize,
                    distance: d2.sqrt(),
                });
            }
            let diff = q[n.axis as usize] - n.point[n.axis as usize];
            let (near, far) = if diff < 0.0 {
                (n.left, n.right)
            } else {
                (n.right, n.left)
            };
            if far != NIL && diff * diff <= r2 {
                stack.push(far);
            }
            if near != NIL {
                stack.push(near);
            }
        }
        hits.sort_by(|a, b| {
            a.node_id
                .cmp(&b.node_id)
                .then(a.distance.total_cmp(&b.distance))
        });
        hits.dedup_by_key(|h| h.node_id);
        hits.sort_by(|a, b| {
            a.distance
                .total_cmp(&b.distance)
                .then(a.node_id.cmp(&b.node_id))
        });
        (hits, visited)
    }

    fn needs_mirror(&self, point: &PauliVector) -> bool {
        point.norm() > FRAC_PI_2 - self.mirror_radius
    }

    fn push_entries(&mut self, point: &PauliVector, node_id: usize) {
        check_point(point);
        self.primaries += 1;
        self.link(point.as_array(), node_id);
        if self.needs_mirror(point) {
            self.link(point.neg().as_array(), node_id);
        }
    }

    fn push_unlinked(&mut self, point: &PauliVector, node_id: usize) {
        check_point(point);
        self.primaries += 1;
        self.nodes.push(leaf(point.as_array(), node_id));
        if self.needs_mirror(point) {
            self.nodes.push(leaf(point.neg().as_array(), node_id));
        }
    }

    fn link(&mut self, point: [f64; 3], node_id: usize) {
        let new = self.nodes.len() as u32;
        let mut node = leaf(point, node_id);
        if self.root == NIL {
            self.nodes.push(node);
            self.root = new;
            self.depth = 1;
            return;
        }
        let mut cur = self.root;
        let mut depth = 1;
        loop {
            depth += 1;
            let n = self.nodes[cur as usize];
            let go_left = point[n.axis as usize] < n.point[n.axis as usize];
            let next = if go_left { n.left } else { n.right };
            if next == NIL {
                node.axis = (n.axis + 1) % 3;
                self.nodes.push(node);
                let parent = &mut self.nodes[cur as usize];
                if go_left {
                    parent.left = new;
                } else {
                    parent.right = new;
                }
                break;
            }
            cur = next;
        }
        self.depth = self.depth.max(depth);
    }

    fn rebalance_if_deep(&mut self) {
        let n = self.nodes.len().max(1) as f64;
        if self.depth as f64 > 2.0 * n.log2() + 8.0 {
            self.rebuild();
        }
    }

    /// Rebuilds a balanced tree over all entries (median splits, cycling axes).
    pub fn rebuild(&mut self) {
        let mut order: Vec<u32> = (0..self.nodes.len() as u32).collect();
        let mut depth = 0;
        self.root = build(&mut self.nodes, &mut order, 0, 1, &mut depth);
        self.depth = depth;
    }
}

fn check_point(point: &PauliVector) {
    assert!(
        point.norm() <= FRAC_PI_2 + BALL_TOLERANCE,
        "point {point:?} lies outside the generator ball"
    );
}

fn leaf(point: [f64; 3], node_id: usize) -> KdNode {
    KdNode {
        point,
        payload: u32::try_from(node_id).expect("node id fits in u32"),
        axis: 0,
        left: NIL,
        right: NIL,
    }
}

fn dist2(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    (0..3).map(|i| (a[i] - b[i]) * (a[i] - b[i])).sum()
}

fn build(
    nodes: &mut [KdNode],
    slice: &mut [u32],
    axis: u8,
    depth: usize,
    max_depth: &mut usize,
) -> u32 {
    if slice.is_empty() {
        return NIL;
    }
    *max_depth = (*max_depth).max(depth);
    let mid = slice.len() / 2;
    let ax = axis as usize;
    slice.select_nth_unstable_by(mid, |&a, &b| {
        nodes[a as usize].point[ax].total_cmp(&nodes[b as usize].point[ax])
    });
    // Pruning only relies on left ≤ split ≤ right, so ties may fall on
    // either side.
    let here = slice[mid];
    let next = (axis + 1) % 3;
    let (left, rest) = slice.split_at_mut(mid);
    let right = &mut rest[1..];
    let l = build(nodes, left, next, depth + 1, max_depth);
    let r = build(nodes, right, next, depth + 1, max_depth);
    let n = &mut nodes[here as usize];
    n.axis = axis;
    n.left = l;
    n.right = r;
    here
}
