//! PSU(2) arithmetic on unit quaternions.
//!
//! A gate is stored as `q = (w, x, y, z)` with
//!
//! ```text
//! U = w·I − i·(x·X + y·Y + z·Z)
//! ```
//!
//! so that the quaternion product is the matrix product and `tr(U) = 2w`.
//! Since `q` and `−q` describe the same physical gate, every value is kept in
//! a canonical sign: the first component with magnitude above
//! [`SIGN_TOLERANCE`] is nonnegative.
//!
//! The generator (Pauli) vector of a gate is `v` with `U = exp(−i v·σ)`, a
//! point in the closed ball of radius π/2. `Rz(θ)` has `v = (0, 0, θ/2)`.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};
use std::fmt;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Components below this magnitude are skipped when fixing the sign.
pub const SIGN_TOLERANCE: f64 = 1e-9;

/// Slack allowed on the radius of a generator vector.
pub const BALL_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Psu2Error {
    #[error("generator vector norm {0} exceeds pi/2")]
    OutsideBall(f64),
    #[error("quaternion has zero norm")]
    ZeroNorm,
}

/// An element of PSU(2), stored as a canonical unit quaternion.
#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateElement {
    q: [f64; 4],
}

impl fmt::Debug for GateElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [w, x, y, z] = self.q;
        write!(f, "U({w:.12}, {x:.12}, {y:.12}, {z:.12})")
    }
}

impl GateElement {
    pub const IDENTITY: GateElement = GateElement {
        q: [1.0, 0.0, 0.0, 0.0],
    };

    /// Builds an element from raw quaternion components, normalizing and
    /// fixing the sign.
    pub fn from_quaternion(w: f64, x: f64, y: f64, z: f64) -> Result<Self, Psu2Error> {
        let n = (w * w + x * x + y * y + z * z).sqrt();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Psu2Error::ZeroNorm);
        }
        Ok(Self::canonical([w / n, x / n, y / n, z / n]))
    }

    /// Renormalizes and applies the sign convention.
    fn canonical(mut q: [f64; 4]) -> Self {
        let n = q.iter().map(|c| c * c).sum::<f64>().sqrt();
        if (n - 1.0).abs() > 1e-15 {
            q.iter_mut().for_each(|c| *c /= n);
        }
        if let Some(lead) = q.iter().find(|c| c.abs() > SIGN_TOLERANCE) {
            if *lead < 0.0 {
                q.iter_mut().for_each(|c| *c = -*c);
            }
        }
        Self { q }
    }

    /// Wraps stored components verbatim (already canonical).
    pub(crate) fn from_raw(q: [f64; 4]) -> Self {
        Self { q }
    }

    pub fn quaternion(&self) -> [f64; 4] {
        self.q
    }

    pub fn identity() -> Self {
        Self::IDENTITY
    }

    /// `Rz(θ) = exp(−iθZ/2)`.
    pub fn rz(theta: f64) -> Self {
        let h = theta / 2.0;
        Self::canonical([h.cos(), 0.0, 0.0, h.sin()])
    }

    pub fn rx(theta: f64) -> Self {
        let h = theta / 2.0;
        Self::canonical([h.cos(), h.sin(), 0.0, 0.0])
    }

    pub fn ry(theta: f64) -> Self {
        let h = theta / 2.0;
        Self::canonical([h.cos(), 0.0, h.sin(), 0.0])
    }

    pub fn pauli_x() -> Self {
        Self {
            q: [0.0, 1.0, 0.0, 0.0],
        }
    }

    pub fn pauli_y() -> Self {
        Self {
            q: [0.0, 0.0, 1.0, 0.0],
        }
    }

    pub fn pauli_z() -> Self {
        Self {
            q: [0.0, 0.0, 0.0, 1.0],
        }
    }

    pub fn hadamard() -> Self {
        Self {
            q: [0.0, FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2],
        }
    }

    pub fn phase_s() -> Self {
        Self::rz(FRAC_PI_2)
    }

    pub fn t_gate() -> Self {
        Self::rz(std::f64::consts::FRAC_PI_4)
    }

    /// Matrix product `self · rhs`.
    pub fn compose(&self, rhs: &GateElement) -> GateElement {
        compose(self, rhs)
    }

    pub fn adjoint(&self) -> GateElement {
        adjoint(self)
    }

    /// Absolute quaternion inner product, equal to `|tr(A†B)|/2`.
    pub fn overlap(&self, other: &GateElement) -> f64 {
        let a = &self.q;
        let b = &other.q;
        (a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3]).abs()
    }

    /// Euclidean distance between canonical quaternions.
    pub fn quaternion_distance(&self, other: &GateElement) -> f64 {
        self.q
            .iter()
            .zip(other.q.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// Replaces components lying within `tol` of an exact Clifford value
    /// (0, ±1/2, ±1/√2, ±1) by that value.
    pub(crate) fn snapped(&self, tol: f64) -> GateElement {
        const EXACT: [f64; 4] = [0.0, 0.5, FRAC_1_SQRT_2, 1.0];
        let mut q = self.q;
        for c in q.iter_mut() {
            if let Some(e) = EXACT.iter().find(|e| (c.abs() - **e).abs() < tol) {
                *c = e.copysign(*c);
            }
        }
        Self::canonical(q)
    }
}

/// Quaternion (Hamilton) product, renormalized and re-canonicalized.
pub fn compose(a: &GateElement, b: &GateElement) -> GateElement {
    let [aw, ax, ay, az] = a.q;
    let [bw, bx, by, bz] = b.q;
    GateElement::canonical([
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
    ])
}

pub fn adjoint(a: &GateElement) -> GateElement {
    let [w, x, y, z] = a.q;
    GateElement::canonical([w, -x, -y, -z])
}

/// `sqrt((2 − |tr(S†G)|)/2)`, in `[0, 1]`.
///
/// With `|tr(S†G)| = 2|⟨s, g⟩|` and unit quaternions,
/// `1 − |⟨s, g⟩| = min(‖s − g‖², ‖s + g‖²)/2`; the right-hand side keeps full
/// relative precision for nearby gates.
pub fn trace_distance(s: &GateElement, g: &GateElement) -> f64 {
    let (mut minus, mut plus) = (0.0, 0.0);
    for (a, b) in s.q.iter().zip(g.q.iter()) {
        minus += (a - b) * (a - b);
        plus += (a + b) * (a + b);
    }
    (minus.min(plus) / 2.0).min(1.0).sqrt()
}

/// Generator vector `(α, β, γ)` with `U = exp(−i(αX + βY + γZ))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PauliVector {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl PauliVector {
    pub const ZERO: PauliVector = PauliVector {
        alpha: 0.0,
        beta: 0.0,
        gamma: 0.0,
    };

    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Self {
        Self { alpha, beta, gamma }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.alpha, self.beta, self.gamma]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    pub fn norm(&self) -> f64 {
        (self.alpha * self.alpha + self.beta * self.beta + self.gamma * self.gamma).sqrt()
    }

    pub fn neg(&self) -> Self {
        Self::new(-self.alpha, -self.beta, -self.gamma)
    }

    pub fn distance(&self, other: &PauliVector) -> f64 {
        let d = [
            self.alpha - other.alpha,
            self.beta - other.beta,
            self.gamma - other.gamma,
        ];
        (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
    }
}

pub fn to_pauli_vector(g: &GateElement) -> PauliVector {
    let [w, x, y, z] = g.q;
    let s = (x * x + y * y + z * z).sqrt();
    if s < 1e-300 {
        return PauliVector::ZERO;
    }
    // half-angle in [0, π/2] (w ≥ −SIGN_TOLERANCE after canonicalization)
    let half = s.atan2(w);
    let scale = half / s;
    PauliVector::new(x * scale, y * scale, z * scale)
}

pub fn from_pauli_vector(v: &PauliVector) -> Result<GateElement, Psu2Error> {
    let r = v.norm();
    if !(r <= FRAC_PI_2 + BALL_TOLERANCE) {
        return Err(Psu2Error::OutsideBall(r));
    }
    // sin(r)/r, with the series near zero
    let sinc = if r < 1e-6 {
        1.0 - r * r / 6.0
    } else {
        r.sin() / r
    };
    Ok(GateElement::canonical([
        r.cos(),
        v.alpha * sinc,
        v.beta * sinc,
        v.gamma * sinc,
    ]))
}

/// The 24-element single-qubit Clifford group modulo phase, generated as the
/// closure of `{H, S}` and sorted lexicographically by canonical quaternion.
pub fn clifford_group() -> Vec<GateElement> {
    clifford_words().into_iter().map(|(g, _)| g).collect()
}

/// Clifford elements together with a shortest `H`/`S` word producing them.
pub(crate) fn clifford_words() -> Vec<(GateElement, String)> {
    let generators = [
        (GateElement::hadamard(), 'H'),
        (GateElement::phase_s(), 'S'),
    ];
    let mut found: Vec<(GateElement, String)> = vec![(GateElement::IDENTITY, String::new())];
    let mut head = 0;
    while head < found.len() {
        let (g, word) = found[head].clone();
        head += 1;
        for (gen, c) in &generators {
            let next = compose(&g, gen).snapped(1e-9);
            if found.iter().all(|(f, _)| trace_distance(f, &next) > 1e-6) {
                let mut w = word.clone();
                w.push(*c);
                found.push((next, w));
            }
        }
    }
    found.sort_by(|a, b| {
        a.0.q
            .iter()
            .zip(b.0.q.iter())
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    found
}

/// Haar-random element: four standard normals normalized to a unit quaternion.
pub fn haar_random_gate<R: Rng + ?Sized>(rng: &mut R) -> GateElement {
    loop {
        let q: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
        if let Ok(g) = GateElement::from_quaternion(q[0], q[1], q[2], q[3]) {
            return g;
        }
    }
}
