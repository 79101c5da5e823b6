//! Counting model for how often each hierarchy order appears in
//! cost-optimal sequences.
//!
//! A sequence using `k_l` gates from each `T_l` has
//! `Γ(k) = (Σk)! · Π |T_l|^k_l / k_l!` distinct labelings. Summing over every
//! count vector with `Σ c_l k_l ≤ C` gives the expected share of order-`n`
//! gates, `p_n = Σ k_n Γ(k) / Σ (Σ_t k_t) Γ(k)`.
//!
//! Factorials overflow quickly (Σk runs into the hundreds for distillation
//! costs), so every sum is carried in log space.

use std::collections::BTreeMap;

use serde::Serialize;
use statrs::function::factorial::ln_factorial;
use thiserror::Error;

use crate::synth::SynthesisResult;

/// Slack added before flooring the per-order loop bounds.
pub const BOUND_SLACK: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("invalid proportion parameters: {0}")]
    InvalidParams(String),
    #[error("no hierarchy gates to count")]
    Degenerate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProportionParams {
    /// Costs `c_3..c_L`.
    costs: Vec<f64>,
    /// `|T_3|..|T_L|`.
    set_sizes: Vec<u64>,
    max_cost: f64,
}

impl ProportionParams {
    /// Costs for orders `3..3+costs.len()`, default set sizes `2^(l−2)`.
    pub fn new(costs: Vec<f64>, max_cost: f64) -> Result<Self, ModelError> {
        let sizes = (0..costs.len()).map(|i| 1u64 << (i + 1)).collect();
        Self::with_sizes(costs, sizes, max_cost)
    }

    pub fn with_sizes(
        costs: Vec<f64>,
        set_sizes: Vec<u64>,
        max_cost: f64,
    ) -> Result<Self, ModelError> {
        if costs.is_empty() {
            return Err(ModelError::InvalidParams(
                "at least one order is required".into(),
            ));
        }
        if costs.len() != set_sizes.len() {
            return Err(ModelError::InvalidParams(format!(
                "{} costs but {} set sizes",
                costs.len(),
                set_sizes.len()
            )));
        }
        if costs.len() > 62 {
            return Err(ModelError::InvalidParams("too many orders".into()));
        }
        if let Some(c) = costs.iter().find(|c| !(**c > 0.0 && c.is_finite())) {
            return Err(ModelError::InvalidParams(format!(
                "cost {c} is not positive"
            )));
        }
        if set_sizes.contains(&0) {
            return Err(ModelError::InvalidParams(
                "set sizes must be positive".into(),
            ));
        }
        if !(max_cost >= 0.0 && max_cost.is_finite()) {
            return Err(ModelError::InvalidParams(format!(
                "maximum cost {max_cost} is invalid"
            )));
        }
        Ok(Self {
            costs,
            set_sizes,
            max_cost,
        })
    }

    /// Highest order `L`.
    pub fn max_order(&self) -> u8 {
        (self.costs.len() + 2) as u8
    }

    pub fn costs(&self) -> &[f64] {
        &self.costs
    }

    pub fn set_sizes(&self) -> &[u64] {
        &self.set_sizes
    }

    pub fn max_cost(&self) -> f64 {
        self.max_cost
    }

    pub fn with_max_cost(&self, max_cost: f64) -> Result<Self, ModelError> {
        Self::with_sizes(self.costs.clone(), self.set_sizes.clone(), max_cost)
    }

    /// Largest `k_l` allowed once `spent` has been used by lower orders.
    fn bound(&self, l: usize, spent: f64) -> u32 {
        ((self.max_cost - spent) / self.costs[l] + BOUND_SLACK)
            .floor()
            .max(0.0) as u32
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProportionResult {
    /// Order → share of hierarchy gates.
    pub p: BTreeMap<u8, f64>,
    /// `ln Σ Γ(k)` over all admissible `k`, the empty sequence included.
    pub log_total_configs: f64,
}

/// `ln Γ(k)` with `Γ(k) = (Σk)! · Π |T_l|^k_l / k_l!`.
pub fn log_config_count(k: &[u32], set_sizes: &[u64]) -> f64 {
    assert_eq!(k.len(), set_sizes.len(), "one count per order");
    let total: u64 = k.iter().map(|&x| u64::from(x)).sum();
    let mut acc = ln_factorial(total);
    for (&kl, &size) in k.iter().zip(set_sizes) {
        if kl > 0 {
            acc += f64::from(kl) * (size as f64).ln() - ln_factorial(u64::from(kl));
        }
    }
    acc
}

/// Every `k` with `k_l ≤ ⌊(C − Σ_{j<l} c_j k_j)/c_l⌋`, in lexicographic order.
pub fn enumerate_admissible(params: &ProportionParams) -> Admissible<'_> {
    Admissible {
        params,
        current: Some(vec![0; params.costs.len()]),
    }
}

/// Iterator returned by [`enumerate_admissible`].
#[derive(Debug, Clone)]
pub struct Admissible<'a> {
    params: &'a ProportionParams,
    current: Option<Vec<u32>>,
}

impl Iterator for Admissible<'_> {
    type Item = Vec<u32>;

    fn next(&mut self) -> Option<Vec<u32>> {
        let out = self.current.take()?;
        let p = self.params;
        let mut next = out.clone();
        // Spend of each prefix, so bounds can be re-derived per position.
        let mut spent = vec![0.0; next.len() + 1];
        for (i, &k) in next.iter().enumerate() {
            spent[i + 1] = spent[i] + p.costs[i] * f64::from(k);
        }
        for i in (0..next.len()).rev() {
            if next[i] < p.bound(i, spent[i]) {
                next[i] += 1;
                next[i + 1..].iter_mut().for_each(|x| *x = 0);
                self.current = Some(next);
                break;
            }
        }
        Some(out)
    }
}

/// Running `ln Σ exp(x_i)` that rescales by the largest term seen so far.
#[derive(Debug, Clone, Copy)]
pub struct LogSumExp {
    max: f64,
    scaled: f64,
}

impl Default for LogSumExp {
    fn default() -> Self {
        Self {
            max: f64::NEG_INFINITY,
            scaled: 0.0,
        }
    }
}

impl LogSumExp {
    pub fn add(&mut self, x: f64) {
        if x == f64::NEG_INFINITY {
            return;
        }
        if x > self.max {
            self.scaled = self.scaled * (self.max - x).exp() + 1.0;
            self.max = x;
        } else {
            self.scaled += (x - self.max).exp();
        }
    }

    pub fn value(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + self.scaled.ln()
        }
    }
}

/// Model proportions `p_n` for every order of `params`.
pub fn proportions(params: &ProportionParams) -> Result<ProportionResult, ModelError> {
    let orders = params.costs.len();
    let mut numer = vec![LogSumExp::default(); orders];
    let mut denom = LogSumExp::default();
    let mut zeta = LogSumExp::default();
    for k in enumerate_admissible(params) {
        let lg = log_config_count(&k, &params.set_sizes);
        zeta.add(lg);
        let total: u64 = k.iter().map(|&x| u64::from(x)).sum();
        if total == 0 {
            continue;
        }
        denom.add((total as f64).ln() + lg);
        for (acc, &kn) in numer.iter_mut().zip(&k) {
            if kn > 0 {
                acc.add(f64::from(kn).ln() + lg);
            }
        }
    }
    let d = denom.value();
    if d == f64::NEG_INFINITY {
        return Err(ModelError::Degenerate);
    }
    let p = numer
        .iter()
        .enumerate()
        .map(|(i, acc)| ((i + 3) as u8, (acc.value() - d).exp()))
        .collect();
    Ok(ProportionResult {
        p,
        log_total_configs: zeta.value(),
    })
}

/// Share of each hierarchy order among all non-Clifford gates used by
/// `results`.
pub fn empirical_proportions(results: &[SynthesisResult]) -> Result<BTreeMap<u8, f64>, ModelError> {
    let mut counts: BTreeMap<u8, u64> = BTreeMap::new();
    for g in results.iter().flat_map(|r| &r.sequence) {
        if !g.is_clifford() {
            *counts.entry(g.order).or_insert(0) += 1;
        }
    }
    let total: u64 = counts.values().sum();
    if total == 0 {
        return Err(ModelError::Degenerate);
    }
    Ok(counts
        .into_iter()
        .map(|(l, c)| (l, c as f64 / total as f64))
        .collect())
}
