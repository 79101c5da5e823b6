//! Quantized generator-vector keys with jitter-tolerant lookup.
//!
//! A point `v` is keyed by `round(v / δ)` per axis. Lookup also probes the
//! neighbouring cell on any axis where `v` sits within [`EDGE_BAND`] cells of
//! a cell face, so two numerically jittered copies of one gate always meet.
//! Points near the ball boundary are additionally probed at `−v`, which
//! names the same PSU(2) element.

use std::f64::consts::FRAC_PI_2;

use rustc_hash::FxHashMap;

use crate::psu2::PauliVector;

/// Cell size δ in radians.
pub const KEY_RESOLUTION: f64 = 1e-6;

/// Distance to a cell face (in cells) below which the adjacent cell is probed.
pub const EDGE_BAND: f64 = 1e-3;

/// Points with norm above `π/2 − ANTIPODE_BAND·δ` are also probed at `−v`.
pub const ANTIPODE_BAND: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VectorKey(pub [i64; 3]);

impl VectorKey {
    pub fn of(v: &PauliVector) -> Self {
        let a = v.as_array();
        VectorKey(std::array::from_fn(|i| {
            (a[i] / KEY_RESOLUTION).round() as i64
        }))
    }
}

fn push_cell_probes(v: [f64; 3], out: &mut ProbeList) {
    let mut axes: [[i64; 2]; 3] = [[0; 2]; 3];
    let mut counts = [1usize; 3];
    for i in 0..3 {
        let s = v[i] / KEY_RESOLUTION;
        let k = s.round();
        axes[i][0] = k as i64;
        let frac = s - k;
        if frac.abs() > 0.5 - EDGE_BAND {
            axes[i][1] = k as i64 + if frac > 0.0 { 1 } else { -1 };
            counts[i] = 2;
        }
    }
    for a in 0..counts[0] {
        for b in 0..counts[1] {
            for c in 0..counts[2] {
                out.push(VectorKey([axes[0][a], axes[1][b], axes[2][c]]));
            }
        }
    }
}

/// Keys to probe for `v`; the first entry is `v`'s own key.
pub fn probe_keys(v: &PauliVector) -> ProbeList {
    let mut out = ProbeList::new();
    push_cell_probes(v.as_array(), &mut out);
    if v.norm() > FRAC_PI_2 - ANTIPODE_BAND * KEY_RESOLUTION {
        push_cell_probes(v.neg().as_array(), &mut out);
    }
    out
}

/// Hash map from keys to values with tolerant lookup.
#[derive(Debug, Clone, Default)]
pub struct KeyTable<V> {
    map: FxHashMap<VectorKey, V>,
}

impl<V> KeyTable<V> {
    pub fn new() -> Self {
        Self {
            map: FxHashMap::default(),
        }
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// The stored key matching `v`, if any.
    pub fn find(&self, v: &PauliVector) -> Option<VectorKey> {
        probe_keys(v)
            .iter()
            .copied()
            .find(|k| self.map.contains_key(k))
    }

    pub fn get(&self, v: &PauliVector) -> Option<&V> {
        self.find(v).and_then(|k| self.map.get(&k))
    }

    pub fn get_mut(&mut self, v: &PauliVector) -> Option<&mut V> {
        let k = self.find(v)?;
        self.map.get_mut(&k)
    }

    /// Inserts under `v`'s own key. Callers check [`KeyTable::find`] first.
    pub fn insert(&mut self, v: &PauliVector, value: V) {
        self.map.insert(VectorKey::of(v), value);
    }

    pub fn values(&self) -> impl Iterator<Item = &V> {
        self.map.values()
    }
}

/// Fixed-capacity probe list; at most 8 cells for `v` plus 8 for `−v`.
#[derive(Debug, Clone)]
pub struct ProbeList {
    keys: [VectorKey; 16],
    len: usize,
}

impl ProbeList {
    fn new() -> Self {
        Self {
            keys: [VectorKey([0; 3]); 16],
            len: 0,
        }
    }

    fn push(&mut self, k: VectorKey) {
        self.keys[self.len] = k;
        self.len += 1;
    }

    pub fn iter(&self) -> std::slice::Iter<'_, VectorKey> {
        self.keys[..self.len].iter()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }
}
