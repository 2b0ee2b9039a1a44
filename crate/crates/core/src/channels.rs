//! Channel models: generic mixed-unitary channels, the depolarizing channel
//! and the single-Pauli specialization, plus flip sampling and Kraus data.
//!
//! Throughout the crate `theta` is the identity probability: a single-Pauli
//! channel maps `rho` to `theta * rho + (1 - theta) * sigma rho sigma`.

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};

/// 2x2 complex matrix, row major.
pub type Mat2 = [Complex64; 4];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub const IDENTITY_2: Mat2 = [ONE, ZERO, ZERO, ONE];
pub const PAULI_X: Mat2 = [ZERO, ONE, ONE, ZERO];
pub const PAULI_Y: Mat2 = [
    ZERO,
    Complex64::new(0.0, -1.0),
    Complex64::new(0.0, 1.0),
    ZERO,
];
pub const PAULI_Z: Mat2 = [ONE, ZERO, ZERO, Complex64::new(-1.0, 0.0)];

/// One of the three Pauli axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PauliAxis {
    X,
    Y,
    Z,
}

impl PauliAxis {
    pub fn matrix(&self) -> Mat2 {
        match self {
            PauliAxis::X => PAULI_X,
            PauliAxis::Y => PAULI_Y,
            PauliAxis::Z => PAULI_Z,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            PauliAxis::X => "X",
            PauliAxis::Y => "Y",
            PauliAxis::Z => "Z",
        }
    }
}

impl std::str::FromStr for PauliAxis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "X" => Ok(PauliAxis::X),
            "Y" => Ok(PauliAxis::Y),
            "Z" => Ok(PauliAxis::Z),
            other => Err(Error::InvalidParameter(format!("unknown Pauli axis {other:?}"))),
        }
    }
}

impl std::fmt::Display for PauliAxis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [ZERO; 4];
    for i in 0..2 {
        for j in 0..2 {
            out[i * 2 + j] = a[i * 2] * b[j] + a[i * 2 + 1] * b[2 + j];
        }
    }
    out
}

fn mat_dagger(a: &Mat2) -> Mat2 {
    [a[0].conj(), a[2].conj(), a[1].conj(), a[3].conj()]
}

fn is_unitary(a: &Mat2, tol: f64) -> bool {
    let prod = mat_mul(&mat_dagger(a), a);
    (prod[0] - ONE).norm() <= tol
        && prod[1].norm() <= tol
        && prod[2].norm() <= tol
        && (prod[3] - ONE).norm() <= tol
}

/// Mixed-unitary channel: a set of unitaries and a probability vector.
#[derive(Debug, Clone)]
pub struct ChannelModel {
    unitaries: Vec<Mat2>,
    theta: Vec<f64>,
}

impl ChannelModel {
    /// Validates unitarity of every operator (to 1e-12) and that `theta` is
    /// a probability vector (entries in [0,1], sum 1 to 1e-12).
    pub fn new(unitaries: Vec<Mat2>, theta: Vec<f64>) -> Result<Self> {
        if unitaries.is_empty() || unitaries.len() != theta.len() {
            return Err(Error::InvalidParameter(format!(
                "channel needs matching operator and probability counts, got {} and {}",
                unitaries.len(),
                theta.len()
            )));
        }
        for u in &unitaries {
            if !is_unitary(u, 1e-12) {
                return Err(Error::InvalidParameter(
                    "channel operator is not unitary".into(),
                ));
            }
        }
        let mut total = 0.0;
        for &p in &theta {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidParameter(format!(
                    "channel probability {p} outside [0, 1]"
                )));
            }
            total += p;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "channel probabilities sum to {total}, expected 1"
            )));
        }
        Ok(Self { unitaries, theta })
    }

    /// The identity channel.
    pub fn identity() -> Self {
        Self { unitaries: vec![IDENTITY_2], theta: vec![1.0] }
    }

    /// Generic depolarizing channel over the four Paulis, `sigma_0 = I`.
    pub fn depolarizing(theta4: [f64; 4]) -> Result<Self> {
        Self::new(
            vec![IDENTITY_2, PAULI_X, PAULI_Y, PAULI_Z],
            theta4.to_vec(),
        )
    }

    pub fn arity(&self) -> usize {
        self.unitaries.len()
    }

    pub fn unitaries(&self) -> &[Mat2] {
        &self.unitaries
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    /// Kraus operators `K_k = sqrt(theta_k) U_k`.
    pub fn kraus_operators(&self) -> Vec<Mat2> {
        self.unitaries
            .iter()
            .zip(&self.theta)
            .map(|(u, &p)| {
                let w = Complex64::new(p.sqrt(), 0.0);
                [u[0] * w, u[1] * w, u[2] * w, u[3] * w]
            })
            .collect()
    }

    /// Recognize a channel of the form `theta I + (1 - theta) sigma` and
    /// return its axis and identity probability.
    pub fn as_single_pauli(&self) -> Option<SinglePauliChannel> {
        let matches = |a: &Mat2, b: &Mat2| a.iter().zip(b).all(|(x, y)| (x - y).norm() < 1e-12);
        let mut theta_id = 0.0;
        let mut pauli: Option<(PauliAxis, f64)> = None;
        for (u, &p) in self.unitaries.iter().zip(&self.theta) {
            if matches(u, &IDENTITY_2) {
                theta_id += p;
            } else if p == 0.0 {
                continue;
            } else {
                let axis = [PauliAxis::X, PauliAxis::Y, PauliAxis::Z]
                    .into_iter()
                    .find(|axis| matches(u, &axis.matrix()))?;
                match &mut pauli {
                    None => pauli = Some((axis, p)),
                    Some((prev, weight)) if *prev == axis => *weight += p,
                    Some(_) => return None,
                }
            }
        }
        match pauli {
            Some((axis, flip)) if (theta_id + flip - 1.0).abs() < 1e-12 => {
                SinglePauliChannel::new(axis, theta_id).ok()
            }
            None => SinglePauliChannel::new(PauliAxis::X, 1.0).ok(),
            _ => None,
        }
    }
}

/// Channel applying one fixed Pauli with probability `1 - theta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinglePauliChannel {
    axis: PauliAxis,
    theta: f64,
}

impl SinglePauliChannel {
    pub fn new(axis: PauliAxis, theta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&theta) {
            return Err(Error::InvalidParameter(format!(
                "theta {theta} outside [0, 1]"
            )));
        }
        Ok(Self { axis, theta })
    }

    pub fn axis(&self) -> PauliAxis {
        self.axis
    }

    /// Probability that the channel acts as the identity.
    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn flip_probability(&self) -> f64 {
        1.0 - self.theta
    }

    /// One Monte Carlo realization: true when the Pauli is applied.
    pub fn sample_flip(&self, rng: &mut impl Rng) -> bool {
        rng.random::<f64>() >= self.theta
    }

    /// Sequential composition with a channel on the same axis:
    /// `theta = theta_a * theta_b + (1 - theta_a) * (1 - theta_b)`.
    pub fn compose(&self, other: &SinglePauliChannel) -> Result<SinglePauliChannel> {
        if self.axis != other.axis {
            return Err(Error::UnsupportedModel(format!(
                "cannot compose {} and {} channels as a single-Pauli channel",
                self.axis, other.axis
            )));
        }
        let theta = self.theta * other.theta + (1.0 - self.theta) * (1.0 - other.theta);
        SinglePauliChannel::new(self.axis, theta)
    }

    pub fn to_model(&self) -> ChannelModel {
        ChannelModel {
            unitaries: vec![IDENTITY_2, self.axis.matrix()],
            theta: vec![self.theta, 1.0 - self.theta],
        }
    }
}

/// Helper constructor mirroring the channel literature: identity with
/// probability `theta`, the axis Pauli otherwise.
pub fn make_single_pauli(axis: PauliAxis, theta: f64) -> Result<SinglePauliChannel> {
    SinglePauliChannel::new(axis, theta)
}

/// Helper constructor for the depolarizing channel.
pub fn make_depolarizing(theta4: [f64; 4]) -> Result<ChannelModel> {
    ChannelModel::depolarizing(theta4)
}
