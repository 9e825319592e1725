//! Gate families: the non-unitary rotation `A_θ`, its cyclic multi-qubit
//! version `A_{m,θ}`, the unitarization `U_{m,θ}`, X rotations, cyclic shifts
//! and a few standard gates.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::statekit::{LinearOp, Matrix, MAX_OP_ARITY};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Smallest admissible value of `1 − sin^{2m}θ` for [`u_unitarized`].
pub const MIN_NORMALIZATION: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum GateFamily {
    ATheta,
    AMulti,
    UUnitarized,
    Xrot,
    Cyclic,
    Standard,
    /// Explicit single-qubit matrix, used by compiled programs.
    Matrix,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StandardGate {
    H,
    X,
    Z,
    Cnot,
}

impl StandardGate {
    pub fn name(self) -> &'static str {
        match self {
            StandardGate::H => "H",
            StandardGate::X => "X",
            StandardGate::Z => "Z",
            StandardGate::Cnot => "CNOT",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            StandardGate::Cnot => 2,
            _ => 1,
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "H" => Ok(StandardGate::H),
            "X" => Ok(StandardGate::X),
            "Z" => Ok(StandardGate::Z),
            "CNOT" => Ok(StandardGate::Cnot),
            other => Err(Error::UnknownGate(other.to_string())),
        }
    }
}

/// Serializable description of a gate. `FANOUT` is a `STANDARD` gate whose
/// first qubit controls an X on each of the remaining `m − 1` qubits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateSpec {
    pub family: GateFamily,
    pub m: usize,
    #[serde(default)]
    pub theta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// Row-major `[re, im]` entries for the `MATRIX` family.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<[f64; 2]>>,
}

impl GateSpec {
    fn plain(family: GateFamily, m: usize, theta: f64) -> Self {
        GateSpec { family, m, theta, name: None, matrix: None }
    }

    pub fn a_theta(theta: f64) -> Self {
        Self::plain(GateFamily::ATheta, 1, theta)
    }

    pub fn a_multi(m: usize, theta: f64) -> Self {
        Self::plain(GateFamily::AMulti, m, theta)
    }

    pub fn u_unitarized(m: usize, theta: f64) -> Self {
        Self::plain(GateFamily::UUnitarized, m, theta)
    }

    pub fn xrot(theta: f64) -> Self {
        Self::plain(GateFamily::Xrot, 1, theta)
    }

    pub fn cyclic(m: usize) -> Self {
        Self::plain(GateFamily::Cyclic, m, 0.0)
    }

    pub fn standard(g: StandardGate) -> Self {
        GateSpec { name: Some(g.name().to_string()), ..Self::plain(GateFamily::Standard, g.arity(), 0.0) }
    }

    pub fn fanout(n_targets: usize) -> Self {
        GateSpec { name: Some("FANOUT".to_string()), ..Self::plain(GateFamily::Standard, n_targets + 1, 0.0) }
    }

    pub fn single_qubit_matrix(m: [[Complex64; 2]; 2]) -> Self {
        let entries = m.iter().flatten().map(|z| [z.re, z.im]).collect();
        GateSpec { matrix: Some(entries), ..Self::plain(GateFamily::Matrix, 1, 0.0) }
    }

    pub fn arity(&self) -> usize {
        self.m
    }

    pub fn validate(&self) -> Result<()> {
        if !self.theta.is_finite() {
            return Err(Error::InvalidParameter("theta must be finite".into()));
        }
        if self.m == 0 {
            return Err(Error::InvalidParameter("m must be at least 1".into()));
        }
        match self.family {
            GateFamily::ATheta | GateFamily::Xrot | GateFamily::Matrix if self.m != 1 => {
                Err(Error::InvalidParameter(format!("{:?} gates act on one qubit", self.family)))
            }
            _ => Ok(()),
        }
    }

    pub fn to_op(&self) -> Result<LinearOp> {
        self.validate()?;
        match self.family {
            GateFamily::ATheta => Ok(a_theta(self.theta)),
            GateFamily::AMulti => a_multi(self.m, self.theta),
            GateFamily::UUnitarized => u_unitarized(self.m, self.theta),
            GateFamily::Xrot => Ok(x_rotation(self.theta)),
            GateFamily::Cyclic => cyclic_shift(self.m),
            GateFamily::Standard => {
                let name = self.name.as_deref().unwrap_or("");
                if name == "FANOUT" {
                    return fanout(self.m - 1);
                }
                let g = StandardGate::parse(name)?;
                if g.arity() != self.m {
                    return Err(Error::ArityMismatch { expected: g.arity(), got: self.m });
                }
                Ok(standard_gate(g))
            }
            GateFamily::Matrix => {
                let e = self
                    .matrix
                    .as_ref()
                    .filter(|e| e.len() == 4)
                    .ok_or_else(|| Error::InvalidParameter("MATRIX gate needs 4 entries".into()))?;
                let m = Matrix::from_row_iterator(2, 2, e.iter().map(|&[re, im]| Complex64::new(re, im)));
                LinearOp::new(1, m)
            }
        }
    }
}

fn op2(m: [[Complex64; 2]; 2]) -> LinearOp {
    LinearOp::new(1, Matrix::from_row_iterator(2, 2, m.iter().flatten().cloned())).expect("2x2")
}

/// `A_θ = [[1, −i sinθ], [0, cosθ]]`: `A|0⟩ = |0⟩`, `A|1⟩ = e^{−iθX}|1⟩`.
pub fn a_theta(theta: f64) -> LinearOp {
    let (s, c) = theta.sin_cos();
    op2([[ONE, Complex64::new(0.0, -s)], [ZERO, Complex64::new(c, 0.0)]])
}

/// `e^{iθX} = cosθ·I + i sinθ·X`.
pub fn x_rotation(theta: f64) -> LinearOp {
    let (s, c) = theta.sin_cos();
    let d = Complex64::new(c, 0.0);
    let o = Complex64::new(0.0, s);
    op2([[d, o], [o, d]])
}

fn check_block_arity(m: usize) -> Result<()> {
    if m < 2 {
        return Err(Error::InvalidParameter(format!("block arity must be at least 2, got {m}")));
    }
    if m > MAX_OP_ARITY {
        return Err(Error::SizeCap { what: "arity", value: m as u128, cap: MAX_OP_ARITY as u128 });
    }
    Ok(())
}

#[inline]
fn bit(x: usize, m: usize, j: usize) -> bool {
    (x >> (m - 1 - j)) & 1 == 1
}

/// Cyclic multi-qubit rotation:
/// `A_{m,θ}|x_1…x_m⟩ = ⊗_j e^{−iθX·x_{j−1}}|x_j⟩` with `x_0 := x_m`.
///
/// At `m = 1` this would coincide with [`a_theta`].
pub fn a_multi(m: usize, theta: f64) -> Result<LinearOp> {
    check_block_arity(m)?;
    Ok(a_multi_unchecked(m, theta))
}

fn a_multi_unchecked(m: usize, theta: f64) -> LinearOp {
    let (s, c) = theta.sin_cos();
    let dim = 1usize << m;
    LinearOp::from_columns(m, |x| {
        (0..dim)
            .map(|y| {
                let mut amp = ONE;
                for j in 0..m {
                    let ctrl = bit(x, m, (j + m - 1) % m);
                    let same = bit(x, m, j) == bit(y, m, j);
                    amp *= match (ctrl, same) {
                        (false, true) => ONE,
                        (false, false) => ZERO,
                        (true, true) => Complex64::new(c, 0.0),
                        (true, false) => Complex64::new(0.0, -s),
                    };
                }
                amp
            })
            .collect()
    })
    .expect("dimensions are consistent")
}

/// `⟨x̄|A_{m,θ}†A_{m,θ}|x⟩ = i^{m+2|x|}·sin^m θ`.
pub fn complement_overlap(m: usize, theta: f64, x: usize) -> Complex64 {
    let w = x.count_ones() as usize;
    i_pow(m + 2 * w) * theta.sin().powi(m as i32)
}

fn i_pow(k: usize) -> Complex64 {
    match k % 4 {
        0 => ONE,
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// Gram–Schmidt unitarization of `A_{m,θ}` over the complement pairs
/// `{x, x̄}` with representatives `x_1 = 0`:
/// `U|x⟩ = A|x⟩` if `x_1 = 0`, else `U|x⟩ = C⁻¹(A|x⟩ − g·A|x̄⟩)` where
/// `g = ⟨x̄|A†A|x⟩` and `C = √(1 − sin^{2m}θ)`.
pub fn u_unitarized(m: usize, theta: f64) -> Result<LinearOp> {
    check_block_arity(m)?;
    if !theta.is_finite() {
        return Err(Error::InvalidParameter("theta must be finite".into()));
    }
    let norm2 = 1.0 - theta.sin().powi(2 * m as i32);
    if norm2 < MIN_NORMALIZATION {
        return Err(Error::DegenerateNormalization(norm2));
    }
    let inv_c = 1.0 / norm2.sqrt();
    let a = a_multi_unchecked(m, theta);
    let dim = 1usize << m;
    let full = dim - 1;
    LinearOp::from_columns(m, |x| {
        if !bit(x, m, 0) {
            return (0..dim).map(|r| a.entry(r, x)).collect();
        }
        let g = complement_overlap(m, theta, x);
        let xb = x ^ full;
        (0..dim).map(|r| (a.entry(r, x) - g * a.entry(r, xb)) * inv_c).collect()
    })
}

/// `C_m|x_1 x_2 … x_m⟩ = |x_2 … x_m x_1⟩`.
pub fn cyclic_shift(m: usize) -> Result<LinearOp> {
    check_block_arity(m)?;
    let dim = 1usize << m;
    LinearOp::from_columns(m, |x| {
        let top = (x >> (m - 1)) & 1;
        let y = ((x << 1) & (dim - 1)) | top;
        (0..dim).map(|r| if r == y { ONE } else { ZERO }).collect()
    })
}

pub fn standard_gate(g: StandardGate) -> LinearOp {
    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    match g {
        StandardGate::H => op2([[h, h], [h, -h]]),
        StandardGate::X => op2([[ZERO, ONE], [ONE, ZERO]]),
        StandardGate::Z => op2([[ONE, ZERO], [ZERO, -ONE]]),
        StandardGate::Cnot => fanout(1).expect("arity 2"),
    }
}

/// Look up a standard gate by name (`H`, `X`, `Z`, `CNOT`).
pub fn standard_gate_by_name(name: &str) -> Result<LinearOp> {
    StandardGate::parse(name).map(standard_gate)
}

/// Control on the first qubit, X on each of the other `n_targets` qubits.
pub fn fanout(n_targets: usize) -> Result<LinearOp> {
    let m = n_targets + 1;
    if n_targets == 0 || m > MAX_OP_ARITY {
        return Err(Error::SizeCap { what: "fanout arity", value: m as u128, cap: MAX_OP_ARITY as u128 });
    }
    let dim = 1usize << m;
    LinearOp::from_columns(m, |x| {
        let y = if bit(x, m, 0) { x ^ (dim / 2 - 1) } else { x };
        (0..dim).map(|r| if r == y { ONE } else { ZERO }).collect()
    })
}
