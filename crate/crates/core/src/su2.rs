//! Exact single-qubit unitary algebra.
//!
//! Rotations follow `R_a(θ) = exp(-i θ σ_a / 2)`, so a rotation closes to the
//! identity only after 4π. A [`GateSequence`] is applied first-gate-first, which
//! makes its composed unitary the product `G_L ··· G_1`.

use std::f64::consts::TAU;
use std::fmt;
use std::ops::Mul;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::{self, Domain};

/// Tolerance for unitarity checks on composed products.
pub const UNITARY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Axis::X => "X",
            Axis::Y => "Y",
            Axis::Z => "Z",
        };
        f.write_str(s)
    }
}

/// One rotation of the base sequence; the angle lives in `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gate {
    axis: Axis,
    angle: f64,
}

impl Gate {
    pub fn new(axis: Axis, angle: f64) -> Result<Self> {
        if !angle.is_finite() || !(0.0..TAU).contains(&angle) {
            return Err(Error::invalid(format!("gate angle {angle} outside [0, 2π)")));
        }
        Ok(Gate { axis, angle })
    }

    pub fn axis(&self) -> Axis {
        self.axis
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }

    pub fn unitary(&self) -> Unitary {
        Unitary::rotation(self.axis, self.angle)
    }

    /// The gate with its angle multiplied by `scale`; the result may leave `[0, 2π)`.
    pub fn scaled_unitary(&self, scale: f64) -> Unitary {
        Unitary::rotation(self.axis, scale * self.angle)
    }
}

/// A 2×2 complex matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Unitary(pub [[Complex64; 2]; 2]);

impl Unitary {
    pub fn identity() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        Unitary([[one, zero], [zero, one]])
    }

    pub fn rotation(axis: Axis, angle: f64) -> Self {
        let c = (angle / 2.0).cos();
        let s = (angle / 2.0).sin();
        let re = |x: f64| Complex64::new(x, 0.0);
        let im = |x: f64| Complex64::new(0.0, x);
        match axis {
            Axis::X => Unitary([[re(c), im(-s)], [im(-s), re(c)]]),
            Axis::Y => Unitary([[re(c), re(-s)], [re(s), re(c)]]),
            Axis::Z => Unitary([[Complex64::new(c, -s), re(0.0)], [re(0.0), Complex64::new(c, s)]]),
        }
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.0[row][col]
    }

    pub fn dagger(&self) -> Self {
        let m = &self.0;
        Unitary([[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]])
    }

    pub fn scale(&self, k: Complex64) -> Self {
        let m = &self.0;
        Unitary([[m[0][0] * k, m[0][1] * k], [m[1][0] * k, m[1][1] * k]])
    }

    pub fn det(&self) -> Complex64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn trace(&self) -> Complex64 {
        self.0[0][0] + self.0[1][1]
    }

    /// Frobenius distance to another matrix.
    pub fn distance(&self, other: &Unitary) -> f64 {
        let mut acc = 0.0;
        for r in 0..2 {
            for c in 0..2 {
                acc += (self.0[r][c] - other.0[r][c]).norm_sqr();
            }
        }
        acc.sqrt()
    }

    /// Largest entrywise deviation of `U†U` from the identity.
    pub fn unitarity_defect(&self) -> f64 {
        let p = self.dagger() * *self;
        let id = Unitary::identity();
        let mut worst: f64 = 0.0;
        for r in 0..2 {
            for c in 0..2 {
                worst = worst.max((p.0[r][c] - id.0[r][c]).norm());
            }
        }
        worst
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_defect() < tol && (self.det().norm() - 1.0).abs() < tol
    }
}

impl Mul for Unitary {
    type Output = Unitary;

    fn mul(self, rhs: Unitary) -> Unitary {
        let a = &self.0;
        let b = &rhs.0;
        let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, cell) in row.iter_mut().enumerate() {
                *cell = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        Unitary(out)
    }
}

/// The seeded base sequence an ancilla accumulates between resets.
#[derive(Debug, Clone, PartialEq)]
pub struct GateSequence {
    seed: u64,
    gates: Vec<Gate>,
}

impl GateSequence {
    /// Wraps an explicit gate list. `seed` is carried only as a label.
    pub fn from_gates(seed: u64, gates: Vec<Gate>) -> Result<Self> {
        if gates.is_empty() {
            return Err(Error::invalid("sequence length must be at least 1"));
        }
        Ok(GateSequence { seed, gates })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }
}

/// Draws `length` gates from the stream keyed by `(seed, length)`.
///
/// Each gate consumes the stream as (axis, angle): the axis uniformly from
/// {X, Y, Z}, then the angle uniformly from `[0, 2π)`.
pub fn generate_sequence(seed: u64, length: usize) -> Result<GateSequence> {
    if length == 0 {
        return Err(Error::invalid("sequence length must be at least 1"));
    }
    let mut stream = rng::stream(Domain::Sequence, &[seed, length as u64]);
    let gates = (0..length)
        .map(|_| {
            let axis = Axis::ALL[stream.gen_range(0..3)];
            let angle = stream.gen_range(0.0..TAU);
            Gate { axis, angle }
        })
        .collect();
    Ok(GateSequence { seed, gates })
}

/// `G_L ··· G_1` for the sequence.
pub fn compose(seq: &GateSequence) -> Unitary {
    scaled_walk(seq, 1.0)
}

fn scaled_walk(seq: &GateSequence, scale: f64) -> Unitary {
    seq.gates
        .iter()
        .fold(Unitary::identity(), |acc, g| g.scaled_unitary(scale) * acc)
}

/// `R(λ)`: the base sequence with every angle scaled by λ, traversed twice.
pub fn scale_and_double(seq: &GateSequence, lambda: f64) -> Result<Unitary> {
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(Error::invalid(format!("scale factor {lambda} must be finite and >= 0")));
    }
    let walk = scaled_walk(seq, lambda);
    Ok(walk * walk)
}

/// How the residual treats a global phase on `R U`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PhaseConvention {
    /// `||R U − I||_F / 2`; `R U = −I` scores √2.
    #[default]
    Sensitive,
    /// Minimum of the above over a global phase on `R U`.
    Invariant,
}

/// Frobenius residual `||R U − I||_F / 2`.
pub fn residual_error(r: &Unitary, u: &Unitary) -> Result<f64> {
    residual_error_with(r, u, PhaseConvention::Sensitive)
}

pub fn residual_error_with(r: &Unitary, u: &Unitary, phase: PhaseConvention) -> Result<f64> {
    for (name, m) in [("R", r), ("U", u)] {
        if !m.is_unitary(UNITARY_TOL) {
            return Err(Error::invalid(format!(
                "{name} is not unitary (defect {:.3e})",
                m.unitarity_defect()
            )));
        }
    }
    Ok(residual_unchecked(&(*r * *u), phase))
}

pub(crate) fn residual_unchecked(product: &Unitary, phase: PhaseConvention) -> f64 {
    match phase {
        PhaseConvention::Sensitive => product.distance(&Unitary::identity()) / 2.0,
        // ||e^{iφ}M − I||² = ||M||² + 2 − 2 Re(e^{iφ} tr M), minimised at |tr M|.
        PhaseConvention::Invariant => {
            let norm_sq: f64 = product.0.iter().flatten().map(|z| z.norm_sqr()).sum();
            ((norm_sq + 2.0 - 2.0 * product.trace().norm()).max(0.0)).sqrt() / 2.0
        }
    }
}
