//! Reference implementations built from explicit 2×2 complex matrices and
//! exact rational arithmetic. Nothing here calls into the quaternion code.

use std::collections::{HashMap, HashSet};
use std::f64::consts::{FRAC_1_SQRT_2, PI};

use hiersynth::BaseGate;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

pub type Mat = [[Complex64; 2]; 2];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub fn identity() -> Mat {
    [[ONE, ZERO], [ZERO, ONE]]
}

pub fn mul(a: &Mat, b: &Mat) -> Mat {
    let mut out = [[ZERO; 2]; 2];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

pub fn dagger(a: &Mat) -> Mat {
    [
        [a[0][0].conj(), a[1][0].conj()],
        [a[0][1].conj(), a[1][1].conj()],
    ]
}

pub fn hadamard() -> Mat {
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    [[h, h], [h, -h]]
}

pub fn phase_s() -> Mat {
    [[ONE, ZERO], [ZERO, Complex64::i()]]
}

/// `diag(1, e^{iθ})`, equal to `Rz(θ)` up to global phase.
pub fn rz(theta: f64) -> Mat {
    [[ONE, ZERO], [ZERO, Complex64::from_polar(1.0, theta)]]
}

/// `sqrt(1 − |tr(A†B)|/2)`.
pub fn trace_distance(a: &Mat, b: &Mat) -> f64 {
    let p = mul(&dagger(a), b);
    let t = (p[0][0] + p[1][1]).norm() / 2.0;
    (1.0 - t.min(1.0)).max(0.0).sqrt()
}

fn word_matrix(word: &str) -> Mat {
    word.chars().fold(identity(), |acc, c| match c {
        'H' => mul(&acc, &hadamard()),
        'S' => mul(&acc, &phase_s()),
        other => panic!("unexpected letter {other} in Clifford word"),
    })
}

/// Matrix for a base gate, rebuilt from its label or rotation index alone.
pub fn base_gate_matrix(g: &BaseGate) -> Mat {
    if let Some(k) = g.rotation_index {
        let denom = f64::from(1u32 << (g.order - 1));
        return rz(PI * f64::from(k) / denom);
    }
    match g.label.as_str() {
        "I" => identity(),
        "Z" => word_matrix("SS"),
        "Sdg" => word_matrix("SSS"),
        "X" => word_matrix("HSSH"),
        "Y" => word_matrix("HSSHSS"),
        other => word_matrix(&other.replace('.', "")),
    }
}

/// Product of a base-gate sequence, left to right.
pub fn sequence_matrix(gates: &[BaseGate]) -> Mat {
    gates
        .iter()
        .fold(identity(), |acc, g| mul(&acc, &base_gate_matrix(g)))
}

/// Key identifying a matrix modulo global phase, on a 1e-7 grid.
pub type Key = [i64; 4];

pub fn key(m: &Mat) -> Key {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let s = det.sqrt();
    let a = m[0][0] / s;
    let b = m[1][0] / s;
    let mut c = [a.re, a.im, b.re, b.im];
    if let Some(lead) = c.iter().find(|x| x.abs() > 1e-9) {
        if *lead < 0.0 {
            c.iter_mut().for_each(|x| *x = -*x);
        }
    }
    c.map(|x| (x * 1e7).round() as i64)
}

/// The single-qubit Clifford group as the closure of `{H, S}`.
pub fn clifford_closure() -> Vec<Mat> {
    let mut seen = HashSet::from([key(&identity())]);
    let mut out = vec![identity()];
    let mut i = 0;
    while i < out.len() {
        for g in [hadamard(), phase_s()] {
            let m = mul(&out[i], &g);
            if seen.insert(key(&m)) {
                out.push(m);
            }
        }
        i += 1;
    }
    out
}

/// Every element reachable with integer cost at most `max_cost`, mapped to
/// its minimal cost. `rotations` lists `(matrix, cost)` for the non-Clifford
/// base gates; Cliffords are free.
///
/// Level `c` is built as `(S_{c−w} · t) · Clifford` over rotations `t` of
/// weight `w`, minus everything already seen at a lower level. Any minimal
/// word ends in a rotation followed by Cliffords, and its prefix before that
/// rotation must itself be minimal, so no element is missed.
pub fn bfs_min_costs(rotations: &[(Mat, u32)], max_cost: u32) -> HashMap<Key, u32> {
    let cliffords = clifford_closure();
    let mut best: HashMap<Key, u32> = HashMap::new();
    let mut levels: Vec<Vec<Mat>> = Vec::new();
    for c in 0..=max_cost {
        let seeds: Vec<Mat> = if c == 0 {
            vec![identity()]
        } else {
            rotations
                .iter()
                .filter(|(_, w)| *w <= c)
                .flat_map(|(t, w)| levels[(c - w) as usize].iter().map(move |x| mul(x, t)))
                .collect()
        };
        let mut level = Vec::new();
        for s in &seeds {
            for cl in &cliffords {
                let m = mul(s, cl);
                if let std::collections::hash_map::Entry::Vacant(slot) = best.entry(key(&m)) {
                    slot.insert(c);
                    level.push(m);
                }
            }
        }
        levels.push(level);
    }
    best
}

/// Every word over `alphabet` of length at most `max_len` whose summed
/// weight is at most `budget`, reduced to element keys with minimal weight.
pub fn brute_force_words(
    alphabet: &[(Mat, f64)],
    max_len: usize,
    budget: f64,
) -> HashMap<Key, f64> {
    let mut best: HashMap<Key, f64> = HashMap::new();
    let mut stack = vec![(identity(), 0.0f64, 0usize)];
    while let Some((m, w, len)) = stack.pop() {
        let k = key(&m);
        let entry = best.entry(k).or_insert(f64::INFINITY);
        if w < *entry {
            *entry = w;
        }
        if len == max_len {
            continue;
        }
        for (g, gw) in alphabet {
            if w + gw <= budget + 1e-12 {
                stack.push((mul(&m, g), w + gw, len + 1));
            }
        }
    }
    best
}

fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

/// `Γ(k) = (Σk)! · Π |T_l|^k_l / k_l!` as an exact integer.
pub fn gamma_exact(k: &[u32], sizes: &[u64]) -> BigInt {
    let total: u64 = k.iter().map(|&x| u64::from(x)).sum();
    let mut num = factorial(total);
    let mut den = BigInt::one();
    for (&kl, &s) in k.iter().zip(sizes) {
        num *= BigInt::from(s).pow(kl);
        den *= factorial(u64::from(kl));
    }
    assert!((&num % &den).is_zero(), "multinomial must be integral");
    num / den
}

/// Parses a decimal literal such as `70.4` into an exact rational.
pub fn decimal(s: &str) -> BigRational {
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    let digits: BigInt = format!("{int}{frac}").parse().expect("decimal literal");
    BigRational::new(digits, BigInt::from(10u32).pow(frac.len() as u32))
}

/// All `k` in the box `0 ≤ k_l ≤ ⌊C/c_l⌋` with `Σ c_l k_l ≤ C`, exactly.
pub fn box_filter(costs: &[BigRational], max_cost: &BigRational) -> Vec<Vec<u32>> {
    let bounds: Vec<u32> = costs
        .iter()
        .map(|c| {
            (max_cost / c)
                .floor()
                .to_integer()
                .to_u32()
                .expect("small bound")
        })
        .collect();
    let mut out = Vec::new();
    let mut k = vec![0u32; costs.len()];
    loop {
        let spent: BigRational = k
            .iter()
            .zip(costs)
            .map(|(&x, c)| c * BigRational::from_integer(BigInt::from(x)))
            .sum();
        if &spent <= max_cost {
            out.push(k.clone());
        }
        // odometer with the last position fastest, giving lexicographic order
        let mut i = k.len();
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if k[i] < bounds[i] {
                k[i] += 1;
                k[i + 1..].iter_mut().for_each(|x| *x = 0);
                break;
            }
        }
    }
}

/// Exact `p_n = Σ k_n Γ / Σ (Σk) Γ`; `None` when no admissible vector uses
/// a hierarchy gate.
pub fn exact_proportions(
    costs: &[BigRational],
    sizes: &[u64],
    max_cost: &BigRational,
) -> Option<Vec<f64>> {
    let mut numer = vec![BigInt::zero(); costs.len()];
    let mut denom = BigInt::zero();
    for k in box_filter(costs, max_cost) {
        let g = gamma_exact(&k, sizes);
        let total: u32 = k.iter().sum();
        denom += &g * BigInt::from(total);
        for (acc, &kn) in numer.iter_mut().zip(&k) {
            *acc += &g * BigInt::from(kn);
        }
    }
    if denom.is_zero() {
        return None;
    }
    Some(
        numer
            .into_iter()
            .map(|n| {
                BigRational::new(n, denom.clone())
                    .to_f64()
                    .expect("finite ratio")
            })
            .collect(),
    )
}
