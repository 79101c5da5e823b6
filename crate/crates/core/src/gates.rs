//! Base gates: the Clifford group plus hierarchy Z-rotations `Rz(πk/2^(l−1))`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::psu2::{clifford_words, compose, GateElement};

/// Highest hierarchy order supported by the gate-set builder.
pub const MAX_ORDER: u8 = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GateError {
    #[error("hierarchy order {0} outside 3..=8")]
    OrderOutOfRange(u8),
    #[error("cannot parse gate literal `{0}`")]
    BadLiteral(String),
    #[error("cannot parse gate set `{0}` (expected set1..set6 or L=<3..8>)")]
    BadSet(String),
}

/// A base gate available to sequence generation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaseGate {
    pub id: u16,
    pub element: GateElement,
    pub label: String,
    /// Clifford-hierarchy order: 2 for every Clifford (Paulis included), `l ≥ 3`
    /// for members of `T_l`.
    pub order: u8,
    /// Odd `k` in `Rz(πk/2^(order−1))` for hierarchy gates.
    pub rotation_index: Option<i32>,
}

impl BaseGate {
    pub fn is_clifford(&self) -> bool {
        self.order <= 2
    }
}

fn rotation_label(order: u8, k: i32) -> String {
    match (order, k) {
        (3, 1) => "T".to_string(),
        (3, -1) => "Tdg".to_string(),
        _ => {
            let denom = 1u32 << (order - 1);
            let num = match k {
                1 => "π".to_string(),
                -1 => "-π".to_string(),
                _ => format!("{k}π"),
            };
            format!("Rz({num}/{denom})")
        }
    }
}

/// `T_l`: the `2^(l−2)` rotations `Rz(πk/2^(l−1))` with odd `|k| < 2^(l−2)`.
/// Ids are assigned from zero; [`build_gate_set`] renumbers them.
pub fn hierarchy_rotations(order: u8) -> Result<Vec<BaseGate>, GateError> {
    if !(3..=MAX_ORDER).contains(&order) {
        return Err(GateError::OrderOutOfRange(order));
    }
    let bound = 1i32 << (order - 2);
    let denom = f64::from(1u32 << (order - 1));
    Ok((-bound + 1..bound)
        .step_by(2)
        .enumerate()
        .map(|(i, k)| BaseGate {
            id: i as u16,
            element: GateElement::rz(PI * f64::from(k) / denom),
            label: rotation_label(order, k),
            order,
            rotation_index: Some(k),
        })
        .collect())
}

fn clifford_label(word: &str) -> String {
    match word {
        "" => "I",
        "H" => "H",
        "S" => "S",
        "SS" => "Z",
        "SSS" => "Sdg",
        "HSSH" => "X",
        "HSSHSS" | "SSHSSH" => "Y",
        other => {
            return other
                .chars()
                .map(String::from)
                .collect::<Vec<_>>()
                .join(".")
        }
    }
    .to_string()
}

/// Parameters selecting one of the nested gate sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GateSetSpec {
    /// Largest hierarchy order `L`; `L = K + 2` gives `Set_K`.
    pub max_order: u8,
    pub include_cliffords: bool,
}

impl GateSetSpec {
    pub fn new(max_order: u8) -> Result<Self, GateError> {
        if !(3..=MAX_ORDER).contains(&max_order) {
            return Err(GateError::OrderOutOfRange(max_order));
        }
        Ok(Self {
            max_order,
            include_cliffords: true,
        })
    }

    /// `Set_k` for `k` in 1..=6.
    pub fn set(k: u8) -> Result<Self, GateError> {
        Self::new(k.saturating_add(2))
    }
}

impl FromStr for GateSetSpec {
    type Err = GateError;

    /// Accepts `set1`..`set6` (case-insensitive) or `L=<n>`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim().to_ascii_lowercase();
        let bad = || GateError::BadSet(s.to_string());
        if let Some(k) = t.strip_prefix("set") {
            let k: u8 = k.trim_start_matches('_').parse().map_err(|_| bad())?;
            Self::set(k).map_err(|_| bad())
        } else if let Some(l) = t.strip_prefix("l=") {
            Self::new(l.parse().map_err(|_| bad())?).map_err(|_| bad())
        } else {
            Err(bad())
        }
    }
}

impl fmt::Display for GateSetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "L={}", self.max_order)
    }
}

/// A resolved gate set with stable ids: Cliffords first (ids 0..24, sorted by
/// quaternion), then `T_3`, `T_4`, ... each in increasing `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct GateSet {
    pub spec: GateSetSpec,
    gates: Vec<BaseGate>,
}

impl GateSet {
    pub fn new(spec: GateSetSpec) -> Result<Self, GateError> {
        Ok(Self {
            spec,
            gates: build_gate_set(spec)?,
        })
    }

    pub fn gates(&self) -> &[BaseGate] {
        &self.gates
    }

    pub fn get(&self, id: u16) -> Option<&BaseGate> {
        self.gates.get(id as usize)
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn orders(&self) -> std::ops::RangeInclusive<u8> {
        3..=self.spec.max_order
    }

    /// FNV-1a over gate ids, orders and quaternion bit patterns.
    pub fn fingerprint(&self) -> u64 {
        let mut h = Fnv::new();
        for g in &self.gates {
            h.write(&g.id.to_le_bytes());
            h.write(&[g.order]);
            for c in g.element.quaternion() {
                h.write(&c.to_le_bytes());
            }
        }
        h.finish()
    }
}

pub fn build_gate_set(spec: GateSetSpec) -> Result<Vec<BaseGate>, GateError> {
    if !(3..=MAX_ORDER).contains(&spec.max_order) {
        return Err(GateError::OrderOutOfRange(spec.max_order));
    }
    let mut gates: Vec<BaseGate> = Vec::new();
    if spec.include_cliffords {
        for (element, word) in clifford_words() {
            gates.push(BaseGate {
                id: 0,
                element,
                label: clifford_label(&word),
                order: 2,
                rotation_index: None,
            });
        }
    }
    for order in 3..=spec.max_order {
        gates.extend(hierarchy_rotations(order)?);
    }
    for (i, g) in gates.iter_mut().enumerate() {
        g.id = i as u16;
    }
    Ok(gates)
}

pub(crate) struct Fnv(u64);

impl Fnv {
    pub(crate) fn new() -> Self {
        Fnv(0xcbf2_9ce4_8422_2325)
    }

    pub(crate) fn write(&mut self, bytes: &[u8]) {
        for b in bytes {
            self.0 ^= u64::from(*b);
            self.0 = self.0.wrapping_mul(0x0100_0000_01b3);
        }
    }

    pub(crate) fn finish(&self) -> u64 {
        self.0
    }
}

/// Parses a gate literal: `I`, `H`, `S`, `Sdg`, `X`, `Y`, `Z`, `T`, `Tdg`,
/// `Rx(θ)`, `Ry(θ)`, `Rz(θ)` (radians, `pi` allowed as a factor), or
/// `U(w,x,y,z)`. Factors joined by `*` are multiplied left to right.
pub fn parse_gate(literal: &str) -> Result<GateElement, GateError> {
    let bad = || GateError::BadLiteral(literal.to_string());
    let mut acc = GateElement::IDENTITY;
    let mut any = false;
    for factor in split_factors(literal) {
        let f = factor.trim();
        if f.is_empty() {
            return Err(bad());
        }
        acc = compose(&acc, &parse_single(f).ok_or_else(bad)?);
        any = true;
    }
    if any {
        Ok(acc)
    } else {
        Err(bad())
    }
}

fn split_factors(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            '*' if depth == 0 => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out
}

fn parse_angle(s: &str) -> Option<f64> {
    let t = s.trim().replace('π', "pi");
    if let Ok(v) = t.parse::<f64>() {
        return Some(v);
    }
    // forms like `pi/4`, `-3*pi/8`, `3pi/8`
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim().parse::<f64>().ok()?),
        None => (t.as_str(), 1.0),
    };
    let num = num.strip_suffix("pi")?.trim_end_matches('*').trim();
    let coeff = match num {
        "" | "+" => 1.0,
        "-" => -1.0,
        n => n.parse::<f64>().ok()?,
    };
    Some(coeff * PI / den)
}

fn parse_single(f: &str) -> Option<GateElement> {
    let simple = match f {
        "I" => Some(GateElement::IDENTITY),
        "H" => Some(GateElement::hadamard()),
        "S" => Some(GateElement::phase_s()),
        "Sdg" => Some(GateElement::phase_s().adjoint()),
        "X" => Some(GateElement::pauli_x()),
        "Y" => Some(GateElement::pauli_y()),
        "Z" => Some(GateElement::pauli_z()),
        "T" => Some(GateElement::t_gate()),
        "Tdg" => Some(GateElement::t_gate().adjoint()),
        _ => None,
    };
    if simple.is_some() {
        return simple;
    }
    let open = f.find('(')?;
    let inner = f[open + 1..].strip_suffix(')')?;
    match &f[..open] {
        "Rz" => Some(GateElement::rz(parse_angle(inner)?)),
        "Rx" => Some(GateElement::rx(parse_angle(inner)?)),
        "Ry" => Some(GateElement::ry(parse_angle(inner)?)),
        "U" => {
            let parts: Vec<f64> = inner
                .split(',')
                .map(|p| p.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .ok()?;
            if parts.len() != 4 {
                return None;
            }
            GateElement::from_quaternion(parts[0], parts[1], parts[2], parts[3]).ok()
        }
        _ => None,
    }
}
