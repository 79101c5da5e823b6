//! Library output compared against the matrix and exact-rational oracles.

use std::collections::HashMap;

use hiersynth::cost::{
    catalyst_direct_cost, catalyst_magic_cost, distillation_cost, DISTILLATION_MUS,
};
use hiersynth::proportion::{enumerate_admissible, log_config_count, proportions};
use hiersynth::psu2::trace_distance;
use hiersynth::{CostModel, GateSet, GateSetSpec, ModelError, ProportionParams, SequenceDatabase};
use num_bigint::BigInt;
use num_rational::BigRational;

use super::oracle::{self, Key};
use super::props::Check;

fn db_keys(db: &SequenceDatabase) -> Result<HashMap<Key, f64>, String> {
    let mut out = HashMap::with_capacity(db.len());
    for id in 0..db.len() {
        let seq = db.decode_sequence(id).map_err(|e| e.to_string())?;
        let cost = db.node(id).unwrap().cost();
        if out
            .insert(oracle::key(&oracle::sequence_matrix(&seq)), cost)
            .is_some()
        {
            return Err(format!("node {id} duplicates an earlier element"));
        }
    }
    Ok(out)
}

/// Every accepted (element, cost) pair of `Set_k` under `model` matches the
/// breadth-first oracle up to `max_cost`. `costs` gives the oracle's own
/// integer weight per order.
pub fn database_matches_bfs(k: u8, model: CostModel, costs: &[(u8, u32)], max_cost: u32) -> Check {
    let set = GateSet::new(GateSetSpec::set(k).unwrap()).unwrap();
    let rotations: Vec<(oracle::Mat, u32)> = set
        .gates()
        .iter()
        .filter(|g| !g.is_clifford())
        .map(|g| {
            let w = costs
                .iter()
                .find(|(l, _)| *l == g.order)
                .expect("cost for every order")
                .1;
            (oracle::base_gate_matrix(g), w)
        })
        .collect();
    let db =
        SequenceDatabase::generate(set, model, f64::from(max_cost)).map_err(|e| e.to_string())?;
    let expected = oracle::bfs_min_costs(&rotations, max_cost);
    let got = db_keys(&db)?;
    if got.len() != expected.len() {
        return Err(format!(
            "{} accepted vs {} from the oracle",
            got.len(),
            expected.len()
        ));
    }
    for (key, cost) in &got {
        match expected.get(key) {
            Some(&c) if f64::from(c) == *cost => {}
            Some(&c) => {
                return Err(format!(
                    "element accepted at cost {cost}, oracle minimum {c}"
                ))
            }
            None => return Err(format!("element at cost {cost} unknown to the oracle")),
        }
    }
    Ok(())
}

/// Exhaustive words of length ≤ 4 for `Set_1` up to one T gate.
pub fn set1_matches_brute_force() -> Check {
    let set = GateSet::new(GateSetSpec::set(1).unwrap()).unwrap();
    let alphabet: Vec<(oracle::Mat, f64)> = set
        .gates()
        .iter()
        .map(|g| {
            (
                oracle::base_gate_matrix(g),
                if g.is_clifford() { 0.0 } else { 1.0 },
            )
        })
        .collect();
    let db = SequenceDatabase::generate(set, CostModel::catalyst_direct(3).unwrap(), 1.0)
        .map_err(|e| e.to_string())?;
    let expected = oracle::brute_force_words(&alphabet, 4, 1.0);
    let got = db_keys(&db)?;
    if got == expected {
        Ok(())
    } else {
        Err(format!(
            "{} accepted vs {} reachable words",
            got.len(),
            expected.len()
        ))
    }
}

/// Generation at budget 0 accepts exactly the `{H, S}` closure.
pub fn clifford_closure_all_sets() -> Check {
    let closure: HashMap<Key, f64> = oracle::clifford_closure()
        .iter()
        .map(|m| (oracle::key(m), 0.0))
        .collect();
    if closure.len() != 24 {
        return Err(format!("oracle closure has {} elements", closure.len()));
    }
    for k in 1..=6 {
        let spec = GateSetSpec::set(k).unwrap();
        let db =
            SequenceDatabase::generate_for(spec, CostModel::catalyst_direct(k + 2).unwrap(), 0.0)
                .map_err(|e| e.to_string())?;
        if db_keys(&db)? != closure {
            return Err(format!(
                "Set_{k}: accepted {} elements, not the Clifford group",
                db.len()
            ));
        }
    }
    Ok(())
}

/// Library trace distances between every pair of base gates agree
/// with the explicit matrix formula.
pub fn base_gates_match_matrices() -> Check {
    let set = GateSet::new(GateSetSpec::set(3).unwrap()).unwrap();
    let gates = set.gates();
    for a in gates {
        for b in gates {
            let lib = trace_distance(&a.element, &b.element);
            let mat =
                oracle::trace_distance(&oracle::base_gate_matrix(a), &oracle::base_gate_matrix(b));
            if (lib - mat).abs() > 1e-7 {
                return Err(format!(
                    "d({}, {}) = {lib}, matrices give {mat}",
                    a.label, b.label
                ));
            }
        }
    }
    let rz = hiersynth::gates::parse_gate("Rz(pi/4)").unwrap();
    let closed = (1.0 - (std::f64::consts::PI / 8.0).cos()).sqrt();
    let lib = trace_distance(&hiersynth::GateElement::IDENTITY, &rz);
    if (lib - closed).abs() > 1e-12 || (lib - 0.275_899).abs() > 1e-6 {
        return Err(format!("d(I, Rz(π/4)) = {lib}, expected {closed}"));
    }
    Ok(())
}

/// Decimal cost tables used for the exact comparison.
pub fn decimal_tables() -> Vec<(String, Vec<&'static str>)> {
    let mut tables = vec![
        (
            "catalyst-direct".to_string(),
            vec!["1", "2.5", "3.25", "3.625", "3.8125"],
        ),
        ("catalyst-magic".to_string(), vec!["1", "3", "5", "7", "9"]),
        ("custom".to_string(), vec!["0.7", "1.1", "2.9"]),
        ("custom-tied".to_string(), vec!["2", "2", "3"]),
    ];
    let columns: [[&str; 5]; 4] = [
        ["5.1", "16.7", "34.8", "49.0", "64.7"],
        ["36.2", "103.1", "172.7", "255.8", "344.8"],
        ["70.4", "186.5", "333.2", "486.1", "671.5"],
        ["120.1", "358.7", "635.8", "962.2", "1351.2"],
    ];
    for (mu, col) in DISTILLATION_MUS.iter().zip(columns) {
        tables.push((format!("distillation mu={mu:e}"), col.to_vec()));
    }
    tables
}

/// Log-space proportions against exact rational evaluation for every
/// table prefix and budgets `C = j·c_3/4` up to `⌊C/c_3⌋ = 8`.
pub fn proportions_match_exact() -> Result<usize, String> {
    let mut compared = 0;
    for (name, table) in decimal_tables() {
        for orders in 1..=table.len() {
            let exact_costs: Vec<BigRational> =
                table[..orders].iter().map(|s| oracle::decimal(s)).collect();
            let costs: Vec<f64> = table[..orders].iter().map(|s| s.parse().unwrap()).collect();
            let sizes: Vec<u64> = (0..orders).map(|i| 1u64 << (i + 1)).collect();
            for j in 0..=35u32 {
                let exact_c = &exact_costs[0] * BigRational::new(BigInt::from(j), BigInt::from(4));
                let c = costs[0] * f64::from(j) / 4.0;
                let params = ProportionParams::new(costs.clone(), c).map_err(|e| e.to_string())?;
                let want = oracle::exact_proportions(&exact_costs, &sizes, &exact_c);
                match (proportions(&params), want) {
                    (Err(ModelError::Degenerate), None) => {}
                    (Ok(got), Some(want)) => {
                        for (n, w) in want.iter().enumerate() {
                            let g = got.p[&(n as u8 + 3)];
                            if (g - w).abs() > 1e-12 * w.abs() {
                                return Err(format!(
                                    "{name}, L={}, C={c}: p_{} = {g}, exact {w}",
                                    orders + 2,
                                    n + 3
                                ));
                            }
                        }
                    }
                    (got, want) => {
                        return Err(format!("{name}, C={c}: library {got:?} vs exact {want:?}"))
                    }
                }
                compared += 1;
            }
        }
    }
    Ok(compared)
}

/// The admissible-vector enumeration equals a brute-force box filter.
pub fn enumeration_matches_box_filter() -> Check {
    for (name, table) in decimal_tables() {
        for orders in 1..=table.len().min(4) {
            let exact_costs: Vec<BigRational> =
                table[..orders].iter().map(|s| oracle::decimal(s)).collect();
            let costs: Vec<f64> = table[..orders].iter().map(|s| s.parse().unwrap()).collect();
            for j in [0u32, 3, 8, 13, 21, 40] {
                let exact_c = &exact_costs[0] * BigRational::new(BigInt::from(j), BigInt::from(2));
                let params =
                    ProportionParams::new(costs.clone(), costs[0] * f64::from(j) / 2.0).unwrap();
                let got: Vec<Vec<u32>> = enumerate_admissible(&params).collect();
                if got != oracle::box_filter(&exact_costs, &exact_c) {
                    return Err(format!(
                        "{name}, L={}, j={j}: enumeration differs",
                        orders + 2
                    ));
                }
            }
        }
    }
    Ok(())
}

pub fn gamma_example() -> Check {
    let exact = oracle::gamma_exact(&[2, 1], &[2, 4]);
    let logged = log_config_count(&[2, 1], &[2, 4]).exp();
    if exact == BigInt::from(48) && (logged - 48.0).abs() < 1e-9 {
        Ok(())
    } else {
        Err(format!("Γ = {exact} exactly, {logged} from logs"))
    }
}

/// The built-in cost tables against the published values.
pub fn published_costs() -> Check {
    let direct = [1.0, 2.5, 3.25, 3.625, 3.8125];
    let magic = [1.0, 3.0, 5.0, 7.0, 9.0];
    let distill = [
        [5.1, 36.2, 70.4, 120.1],
        [16.7, 103.1, 186.5, 358.7],
        [34.8, 172.7, 333.2, 635.8],
        [49.0, 255.8, 486.1, 962.2],
        [64.7, 344.8, 671.5, 1351.2],
    ];
    for l in 3..=7u8 {
        let i = usize::from(l - 3);
        let d = catalyst_direct_cost(l).map_err(|e| e.to_string())?;
        let m = catalyst_magic_cost(l).map_err(|e| e.to_string())?;
        if d != direct[i] || m != magic[i] {
            return Err(format!("order {l}: direct {d}, magic {m}"));
        }
        for (j, mu) in DISTILLATION_MUS.iter().enumerate() {
            let c = distillation_cost(l, *mu).map_err(|e| e.to_string())?;
            if c != distill[i][j] {
                return Err(format!("order {l}, mu {mu:e}: {c} vs {}", distill[i][j]));
            }
        }
    }
    Ok(())
}

/// Closed forms against the recurrences unrolled from `Cost[T_3] = 1`.
pub fn recurrences() -> Check {
    let (mut direct, mut magic) = (1.0f64, 1.0f64);
    for l in 3..=12u8 {
        if l > 3 {
            direct = (4.0 + direct) / 2.0;
            magic += 2.0;
        }
        let d = catalyst_direct_cost(l).map_err(|e| e.to_string())?;
        let m = catalyst_magic_cost(l).map_err(|e| e.to_string())?;
        if (d - direct).abs() > 1e-12 || (m - magic).abs() > 1e-12 {
            return Err(format!(
                "order {l}: closed forms {d}, {m}; recurrences {direct}, {magic}"
            ));
        }
    }
    Ok(())
}
