//! Binary database files.
//!
//! Layout (little-endian):
//!
//! ```text
//! "HSDB"  version:u32  gate_set_fp:u64  cost_model_fp:u64
//! max_order:u8  include_cliffords:u8  cost_json_len:u32  cost_json
//! node_limit:u64  nodes:u64  frontier:u64
//! nodes × { parent_id:u64  base_gate_id:u16  q:4×f64  cost:f64 }
//! frontier × { parent_id:u64  gate_rank:u16 }
//! watermark:f64
//! crc64 (XZ) of everything above
//! ```
//!
//! Nodes are stored in acceptance order; a parent id of `u64::MAX` marks the
//! root. Frontier costs are recomputed on load.

use std::cmp::Reverse;
use std::io::Write;
use std::path::Path;

use crc::{Crc, CRC_64_XZ};

use super::{DbError, SeqNode, SequenceDatabase, Successor, NO_PARENT};
use crate::cost::CostModel;
use crate::gates::{GateSet, GateSetSpec};
use crate::psu2::{to_pauli_vector, GateElement};

pub const FORMAT_VERSION: u32 = 2;
const MAGIC: &[u8; 4] = b"HSDB";
const CRC64: Crc<u64> = Crc::<u64>::new(&CRC_64_XZ);
const NODE_RECORD: usize = 8 + 2 + 32 + 8;

impl SequenceDatabase {
    pub fn to_bytes(&self) -> Vec<u8> {
        let cost_json = self.cost_model.to_json();
        let mut buf = Vec::with_capacity(64 + cost_json.len() + self.nodes.len() * NODE_RECORD);
        buf.extend_from_slice(MAGIC);
        buf.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        buf.extend_from_slice(&self.gate_set.fingerprint().to_le_bytes());
        buf.extend_from_slice(&self.cost_model.fingerprint().to_le_bytes());
        buf.push(self.gate_set.spec.max_order);
        buf.push(u8::from(self.gate_set.spec.include_cliffords));
        buf.extend_from_slice(&(cost_json.len() as u32).to_le_bytes());
        buf.extend_from_slice(cost_json.as_bytes());
        buf.extend_from_slice(&(self.node_limit as u64).to_le_bytes());
        buf.extend_from_slice(&(self.nodes.len() as u64).to_le_bytes());
        buf.extend_from_slice(&(self.frontier.len() as u64).to_le_bytes());
        for n in &self.nodes {
            let parent = if n.parent == NO_PARENT {
                u64::MAX
            } else {
                u64::from(n.parent)
            };
            buf.extend_from_slice(&parent.to_le_bytes());
            buf.extend_from_slice(&n.gate.to_le_bytes());
            for c in n.combined.quaternion() {
                buf.extend_from_slice(&c.to_le_bytes());
            }
            buf.extend_from_slice(&n.cost.to_le_bytes());
        }
        let mut frontier: Vec<Successor> = self.frontier.iter().map(|Reverse(x)| *x).collect();
        frontier.sort();
        for x in &frontier {
            let parent = if x.parent == NO_PARENT {
                u64::MAX
            } else {
                u64::from(x.parent)
            };
            buf.extend_from_slice(&parent.to_le_bytes());
            buf.extend_from_slice(&x.rank.to_le_bytes());
        }
        buf.extend_from_slice(&self.watermark.to_le_bytes());
        let crc = CRC64.checksum(&buf);
        buf.extend_from_slice(&crc.to_le_bytes());
        buf
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), DbError> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        f.write_all(&self.to_bytes())?;
        f.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, DbError> {
        Self::from_bytes(&std::fs::read(path)?)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, DbError> {
        if bytes.len() < 16 || &bytes[..4] != MAGIC {
            return Err(DbError::BadMagic);
        }
        let (body, tail) = bytes.split_at(bytes.len() - 8);
        let stored = u64::from_le_bytes(tail.try_into().expect("8 bytes"));
        if CRC64.checksum(body) != stored {
            return Err(DbError::ChecksumMismatch);
        }
        let mut r = Reader { buf: body, pos: 4 };
        let version = r.u32()?;
        if version != FORMAT_VERSION {
            return Err(DbError::VersionMismatch {
                found: version,
                expected: FORMAT_VERSION,
            });
        }
        let gate_fp = r.u64()?;
        let cost_fp = r.u64()?;
        let max_order = r.u8()?;
        let include_cliffords = r.u8()? != 0;
        let json_len = r.u32()? as usize;
        let cost_json = std::str::from_utf8(r.take(json_len)?)
            .map_err(|_| DbError::Format("cost model is not utf-8".into()))?;

        let mut spec = GateSetSpec::new(max_order)?;
        spec.include_cliffords = include_cliffords;
        let gate_set = GateSet::new(spec)?;
        if gate_set.fingerprint() != gate_fp {
            return Err(DbError::FingerprintMismatch { what: "gate-set" });
        }
        let cost_model = CostModel::from_json(cost_json)?;
        if cost_model.fingerprint() != cost_fp {
            return Err(DbError::FingerprintMismatch { what: "cost-model" });
        }

        let node_limit = r.u64()? as usize;
        let n_nodes = r.count()?;
        let n_frontier = r.count()?;
        if n_nodes >= NO_PARENT as usize {
            return Err(DbError::Format(format!("node count {n_nodes}")));
        }

        let mut db = SequenceDatabase::new(gate_set, cost_model)?;
        db.node_limit = node_limit;
        db.frontier.clear();
        db.nodes.reserve(n_nodes);
        for i in 0..n_nodes {
            let parent = r.u64()?;
            let gate = r.u16()?;
            let q = [r.f64()?, r.f64()?, r.f64()?, r.f64()?];
            let cost = r.f64()?;
            let (parent, depth) = match parent {
                u64::MAX if i == 0 => (NO_PARENT, 0),
                p if (p as usize) < i && i > 0 && usize::from(gate) < db.gate_set.len() => {
                    (p as u32, db.nodes[p as usize].depth.saturating_add(1))
                }
                _ => {
                    return Err(DbError::Format(format!(
                        "node {i} has invalid parent or gate"
                    )))
                }
            };
            let node = SeqNode {
                combined: GateElement::from_raw(q),
                cost,
                parent,
                gate,
                depth,
            };
            db.keys.insert(&to_pauli_vector(&node.combined), i as u32);
            db.nodes.push(node);
        }
        for _ in 0..n_frontier {
            let parent = r.u64()?;
            let rank = usize::from(r.u16()?);
            let entry = match parent {
                u64::MAX if n_nodes == 0 => Some(Successor {
                    cost: 0.0,
                    parent: NO_PARENT,
                    rank: 0,
                }),
                p if (p as usize) < n_nodes => db.successor(p as u32, rank),
                _ => None,
            };
            let entry = entry.ok_or_else(|| DbError::Format("invalid frontier entry".into()))?;
            db.frontier.push(Reverse(entry));
        }
        db.watermark = r.f64()?;
        if r.pos != body.len() {
            return Err(DbError::Format("trailing bytes".into()));
        }
        Ok(db)
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], DbError> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| DbError::Format("truncated".into()))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N], DbError> {
        Ok(self.take(N)?.try_into().expect("length checked"))
    }

    fn u8(&mut self) -> Result<u8, DbError> {
        Ok(self.array::<1>()?[0])
    }

    fn u16(&mut self) -> Result<u16, DbError> {
        Ok(u16::from_le_bytes(self.array()?))
    }

    fn u32(&mut self) -> Result<u32, DbError> {
        Ok(u32::from_le_bytes(self.array()?))
    }

    fn u64(&mut self) -> Result<u64, DbError> {
        Ok(u64::from_le_bytes(self.array()?))
    }

    fn f64(&mut self) -> Result<f64, DbError> {
        Ok(f64::from_le_bytes(self.array()?))
    }

    fn count(&mut self) -> Result<usize, DbError> {
        let n = self.u64()?;
        usize::try_from(n).map_err(|_| DbError::Format(format!("count {n}")))
    }
}
