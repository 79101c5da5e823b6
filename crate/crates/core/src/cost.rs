//! Base-gate cost models.
//!
//! Cliffords are free. A hierarchy gate of order `l` costs `c_l`, shared by
//! every member of `T_l`. Three built-in tables are provided:
//!
//! * catalyst, direct application: `c_l = 4 − 3·2^(3−l)` T gates,
//! * catalyst, via intermediate magic states: `c_l = 1 + 2(l − 3)` T gates,
//! * distillation: average raw magic states per gate at a target logical
//!   error rate `mu` (orders 3..=7, `mu` in {1e-5, 1e-10, 1e-15, 1e-20}).

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gates::{BaseGate, Fnv, GateSet};

#[derive(Debug, Error)]
pub enum CostError {
    #[error("hierarchy order {0} has no cost (orders start at 3)")]
    OrderTooLow(u8),
    #[error("no published cost for order {order} at mu = {mu:e}")]
    NoPublishedCost { order: u8, mu: f64 },
    #[error("cost model has no entry for order {0}")]
    MissingEntry(u8),
    #[error("cost for order {order} must be positive and finite, got {cost}")]
    NonPositive { order: u8, cost: f64 },
    #[error("cannot parse cost model `{0}`")]
    BadSpec(String),
    #[error("cost config: {0}")]
    Config(#[from] serde_json::Error),
    #[error("cost config: {0}")]
    Io(#[from] std::io::Error),
}

/// Published error rates of the distillation table.
pub const DISTILLATION_MUS: [f64; 4] = [1e-5, 1e-10, 1e-15, 1e-20];

/// Average raw magic state count per `T_l` gate; rows are `l = 3..=7`,
/// columns follow [`DISTILLATION_MUS`].
const DISTILLATION_TABLE: [[f64; 4]; 5] = [
    [5.1, 36.2, 70.4, 120.1],
    [16.7, 103.1, 186.5, 358.7],
    [34.8, 172.7, 333.2, 635.8],
    [49.0, 255.8, 486.1, 962.2],
    [64.7, 344.8, 671.5, 1351.2],
];

/// Average T-count of a `T_l` gate produced by the catalyst circuit and
/// applied directly: `4 − 3·2^(3−l)`.
pub fn catalyst_direct_cost(order: u8) -> Result<f64, CostError> {
    if order < 3 {
        return Err(CostError::OrderTooLow(order));
    }
    Ok(4.0 - 3.0 * 2f64.powi(3 - i32::from(order)))
}

/// Average T-count when every output goes through an intermediate
/// `|T_l⟩` state: `1 + 2(l − 3)`.
pub fn catalyst_magic_cost(order: u8) -> Result<f64, CostError> {
    if order < 3 {
        return Err(CostError::OrderTooLow(order));
    }
    Ok(1.0 + 2.0 * f64::from(order - 3))
}

/// Exact lookup in the distillation table.
pub fn distillation_cost(order: u8, mu: f64) -> Result<f64, CostError> {
    let col = DISTILLATION_MUS.iter().position(|m| mu_matches(*m, mu));
    match (order, col) {
        (3..=7, Some(c)) => Ok(DISTILLATION_TABLE[usize::from(order - 3)][c]),
        _ => Err(CostError::NoPublishedCost { order, mu }),
    }
}

fn mu_matches(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostKind {
    CatalystDirect,
    CatalystViaMagic,
    Distillation,
    Custom,
}

/// Per-order costs for hierarchy gates; Cliffords always cost zero.
#[derive(Debug, Clone, PartialEq)]
pub struct CostModel {
    pub kind: CostKind,
    pub mu: Option<f64>,
    table: BTreeMap<u8, f64>,
}

/// On-disk form: `{ "kind": "...", "mu": ..., "table": {"3": c3, ...} }`.
#[derive(Debug, Serialize, Deserialize)]
struct CostConfig {
    kind: CostKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mu: Option<f64>,
    #[serde(default)]
    table: BTreeMap<String, f64>,
}

impl CostModel {
    pub fn catalyst_direct(max_order: u8) -> Result<Self, CostError> {
        Self::from_fn(
            CostKind::CatalystDirect,
            None,
            max_order,
            catalyst_direct_cost,
        )
    }

    pub fn catalyst_magic(max_order: u8) -> Result<Self, CostError> {
        Self::from_fn(
            CostKind::CatalystViaMagic,
            None,
            max_order,
            catalyst_magic_cost,
        )
    }

    pub fn distillation(mu: f64, max_order: u8) -> Result<Self, CostError> {
        Self::from_fn(CostKind::Distillation, Some(mu), max_order, |l| {
            distillation_cost(l, mu)
        })
    }

    pub fn custom(table: BTreeMap<u8, f64>) -> Result<Self, CostError> {
        Self::validated(CostKind::Custom, None, table)
    }

    fn from_fn(
        kind: CostKind,
        mu: Option<f64>,
        max_order: u8,
        f: impl Fn(u8) -> Result<f64, CostError>,
    ) -> Result<Self, CostError> {
        let table = (3..=max_order)
            .map(|l| f(l).map(|c| (l, c)))
            .collect::<Result<_, _>>()?;
        Self::validated(kind, mu, table)
    }

    fn validated(
        kind: CostKind,
        mu: Option<f64>,
        table: BTreeMap<u8, f64>,
    ) -> Result<Self, CostError> {
        for (&order, &cost) in &table {
            if order < 3 {
                return Err(CostError::OrderTooLow(order));
            }
            if !(cost > 0.0 && cost.is_finite()) {
                return Err(CostError::NonPositive { order, cost });
            }
        }
        Ok(Self { kind, mu, table })
    }

    /// Cost of one `T_l` gate; orders 1 and 2 are free.
    pub fn order_cost(&self, order: u8) -> Result<f64, CostError> {
        if order <= 2 {
            return Ok(0.0);
        }
        self.table
            .get(&order)
            .copied()
            .ok_or(CostError::MissingEntry(order))
    }

    pub fn base_gate_cost(&self, gate: &BaseGate) -> Result<f64, CostError> {
        self.order_cost(gate.order)
    }

    /// Costs of every gate in `set`, indexed by gate id.
    pub fn gate_costs(&self, set: &GateSet) -> Result<Vec<f64>, CostError> {
        set.gates().iter().map(|g| self.base_gate_cost(g)).collect()
    }

    pub fn table(&self) -> &BTreeMap<u8, f64> {
        &self.table
    }

    /// Restricts the table to orders `3..=max_order`, failing if one is missing.
    pub fn covering(&self, max_order: u8) -> Result<Self, CostError> {
        let table = (3..=max_order)
            .map(|l| self.order_cost(l).map(|c| (l, c)))
            .collect::<Result<_, _>>()?;
        Ok(Self {
            kind: self.kind,
            mu: self.mu,
            table,
        })
    }

    pub fn fingerprint(&self) -> u64 {
        let mut h = Fnv::new();
        h.write(&[self.kind as u8]);
        h.write(&self.mu.unwrap_or(0.0).to_le_bytes());
        for (l, c) in &self.table {
            h.write(&[*l]);
            h.write(&c.to_le_bytes());
        }
        h.finish()
    }

    pub fn to_json(&self) -> String {
        let cfg = CostConfig {
            kind: self.kind,
            mu: self.mu,
            table: self
                .table
                .iter()
                .map(|(l, c)| (l.to_string(), *c))
                .collect(),
        };
        serde_json::to_string(&cfg).expect("cost config serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, CostError> {
        let cfg: CostConfig = serde_json::from_str(text)?;
        let table = cfg
            .table
            .iter()
            .map(|(k, v)| {
                k.parse::<u8>()
                    .map(|l| (l, *v))
                    .map_err(|_| CostError::BadSpec(format!("table key `{k}`")))
            })
            .collect::<Result<BTreeMap<_, _>, _>>()?;
        Self::validated(cfg.kind, cfg.mu, table)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, CostError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), CostError> {
        std::fs::write(path, self.to_json() + "\n")?;
        Ok(())
    }
}

/// Command-line cost model selector:
/// `catalyst-direct | catalyst-magic | distillation:<mu> | custom:<path>`.
#[derive(Debug, Clone, PartialEq)]
pub enum CostModelSpec {
    CatalystDirect,
    CatalystMagic,
    Distillation(f64),
    Custom(String),
}

impl CostModelSpec {
    pub fn resolve(&self, max_order: u8) -> Result<CostModel, CostError> {
        match self {
            Self::CatalystDirect => CostModel::catalyst_direct(max_order),
            Self::CatalystMagic => CostModel::catalyst_magic(max_order),
            Self::Distillation(mu) => CostModel::distillation(*mu, max_order),
            Self::Custom(path) => CostModel::load(path)?.covering(max_order),
        }
    }
}

impl FromStr for CostModelSpec {
    type Err = CostError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || CostError::BadSpec(s.to_string());
        match s.split_once(':') {
            None if s == "catalyst-direct" => Ok(Self::CatalystDirect),
            None if s == "catalyst-magic" => Ok(Self::CatalystMagic),
            Some(("distillation", mu)) => mu.parse().map(Self::Distillation).map_err(|_| bad()),
            Some(("custom", path)) if !path.is_empty() => Ok(Self::Custom(path.to_string())),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for CostModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::CatalystDirect => write!(f, "catalyst-direct"),
            Self::CatalystMagic => write!(f, "catalyst-magic"),
            Self::Distillation(mu) => write!(f, "distillation:{mu:e}"),
            Self::Custom(p) => write!(f, "custom:{p}"),
        }
    }
}
