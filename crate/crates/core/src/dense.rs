//! Exact density-matrix engine.
//!
//! Dense simulation of up to [`MAX_QUBITS`] qubits used as the ground truth
//! for the fast flip-propagation engine and for the GHZ-algebra checks.
//! Qubit 0 is the leftmost (most significant) tensor factor; the reference
//! qubit of a GHZ state is qubit 0.

use num_complex::Complex64;

use crate::channels::{ChannelModel, Mat2, PauliAxis};
use crate::error::{Error, Result};
use crate::labels::{BasisKind, BitString, DiagonalState, GhzLabel, LabelSpace};
use crate::linalg::hermitian_eigenvalues;

/// Hard cap on the dense engine; it is a validation tool, not a production
/// path.
pub const MAX_QUBITS: usize = 12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Dense 2^K x 2^K density matrix, row major.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    qubits: usize,
    data: Vec<Complex64>,
}

impl DensityMatrix {
    /// All qubits in |0>.
    pub fn zero_state(qubits: usize) -> Result<Self> {
        if qubits == 0 || qubits > MAX_QUBITS {
            return Err(Error::QubitCapacity { qubits, max: MAX_QUBITS });
        }
        let dim = 1 << qubits;
        let mut data = vec![ZERO; dim * dim];
        data[0] = ONE;
        Ok(Self { qubits, data })
    }

    /// Projector onto a (not necessarily normalized) pure state.
    pub fn from_pure(amplitudes: &[Complex64]) -> Result<Self> {
        let dim = amplitudes.len();
        if !dim.is_power_of_two() || dim < 2 {
            return Err(Error::InvalidParameter(format!(
                "pure state length {dim} is not a power of two"
            )));
        }
        let qubits = dim.trailing_zeros() as usize;
        if qubits > MAX_QUBITS {
            return Err(Error::QubitCapacity { qubits, max: MAX_QUBITS });
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if norm <= 0.0 {
            return Err(Error::InvalidParameter("zero pure state".into()));
        }
        let scale = 1.0 / norm;
        let mut data = vec![ZERO; dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                data[i * dim + j] = amplitudes[i] * amplitudes[j].conj() * scale;
            }
        }
        Ok(Self { qubits, data })
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.qubits
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.dim() + j]
    }

    pub fn trace(&self) -> Complex64 {
        let dim = self.dim();
        (0..dim).map(|i| self.data[i * dim + i]).sum()
    }

    pub fn hermiticity_residual(&self) -> f64 {
        let dim = self.dim();
        let mut worst = 0.0_f64;
        for i in 0..dim {
            for j in i..dim {
                let d = (self.data[i * dim + j] - self.data[j * dim + i].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// Smallest eigenvalue; used by positivity checks in tests and the
    /// validation suite (cost grows as the cube of the dimension).
    pub fn min_eigenvalue(&self) -> f64 {
        let vals = hermitian_eigenvalues(&self.data, self.dim());
        vals.into_iter().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        assert_eq!(self.qubits, other.qubits);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    fn target_bit(&self, qubit: usize) -> usize {
        self.qubits - 1 - qubit
    }

    fn check_targets(&self, targets: &[usize]) -> Result<()> {
        for (i, &t) in targets.iter().enumerate() {
            if t >= self.qubits {
                return Err(Error::InvalidCircuit(format!(
                    "target qubit {t} out of range for {} qubits",
                    self.qubits
                )));
            }
            if targets[..i].contains(&t) {
                return Err(Error::InvalidCircuit(format!("duplicate target qubit {t}")));
            }
        }
        Ok(())
    }

    /// Apply a unitary on the given target qubits: rho <- U rho U^dagger.
    ///
    /// `u` is a 2^m x 2^m row-major matrix whose own qubit 0 is `targets[0]`
    /// (most significant within the gate).
    pub fn apply_unitary(&mut self, u: &[Complex64], targets: &[usize]) -> Result<()> {
        let m = targets.len();
        let sub = 1usize << m;
        if u.len() != sub * sub {
            return Err(Error::InvalidCircuit(format!(
                "gate on {m} qubits needs a {sub}x{sub} matrix"
            )));
        }
        self.check_targets(targets)?;
        if !matrix_is_unitary(u, sub, 1e-12) {
            return Err(Error::InvalidCircuit("gate matrix is not unitary".into()));
        }

        let dim = self.dim();
        let offsets = self.subspace_offsets(targets);
        let tmask: usize = targets
            .iter()
            .map(|&t| 1usize << self.target_bit(t))
            .sum();

        let mut scratch = vec![ZERO; sub];
        // Left multiply: transform row indices column by column.
        for base in SubspaceBases::new(dim, tmask) {
            for col in 0..dim {
                for (p, off) in offsets.iter().enumerate() {
                    scratch[p] = self.data[(base + off) * dim + col];
                }
                for (p, off) in offsets.iter().enumerate() {
                    let mut acc = ZERO;
                    for q in 0..sub {
                        acc += u[p * sub + q] * scratch[q];
                    }
                    self.data[(base + off) * dim + col] = acc;
                }
            }
        }
        // Right multiply by U^dagger: transform column indices row by row
        // with conj(U).
        for base in SubspaceBases::new(dim, tmask) {
            for row in 0..dim {
                for (p, off) in offsets.iter().enumerate() {
                    scratch[p] = self.data[row * dim + base + off];
                }
                for (p, off) in offsets.iter().enumerate() {
                    let mut acc = ZERO;
                    for q in 0..sub {
                        acc += u[p * sub + q].conj() * scratch[q];
                    }
                    self.data[row * dim + base + off] = acc;
                }
            }
        }
        Ok(())
    }

    /// Offsets of the 2^m subspace indices produced by setting the target
    /// bits according to the gate's own index ordering.
    fn subspace_offsets(&self, targets: &[usize]) -> Vec<usize> {
        let m = targets.len();
        let sub = 1usize << m;
        (0..sub)
            .map(|p| {
                let mut off = 0usize;
                for (i, &t) in targets.iter().enumerate() {
                    if (p >> (m - 1 - i)) & 1 == 1 {
                        off |= 1 << self.target_bit(t);
                    }
                }
                off
            })
            .collect()
    }

    /// Apply a mixed-unitary channel on one qubit:
    /// rho <- sum_k theta_k U_k rho U_k^dagger.
    pub fn apply_channel(&mut self, channel: &ChannelModel, target: usize) -> Result<()> {
        self.check_targets(&[target])?;
        let original = self.data.clone();
        for value in self.data.iter_mut() {
            *value = ZERO;
        }
        for (u, &p) in channel.unitaries().iter().zip(channel.theta()) {
            if p == 0.0 {
                continue;
            }
            let mut branch = DensityMatrix { qubits: self.qubits, data: original.clone() };
            branch.apply_unitary(u, &[target])?;
            for (acc, v) in self.data.iter_mut().zip(&branch.data) {
                *acc += v * p;
            }
        }
        Ok(())
    }

    /// Reorder qubits so that output position `p` carries what currently is
    /// qubit `order[p]`. `order` must be a permutation of `0..qubits`.
    pub fn reorder_qubits(&self, order: &[usize]) -> Result<DensityMatrix> {
        if order.len() != self.qubits {
            return Err(Error::InvalidCircuit(format!(
                "permutation of length {} for {} qubits",
                order.len(),
                self.qubits
            )));
        }
        let mut seen = vec![false; self.qubits];
        for &q in order {
            if q >= self.qubits || seen[q] {
                return Err(Error::InvalidCircuit("invalid qubit permutation".into()));
            }
            seen[q] = true;
        }
        let dim = self.dim();
        let old_index = |new_idx: usize| -> usize {
            let mut old = 0usize;
            for (new_pos, &old_qubit) in order.iter().enumerate() {
                let bit = (new_idx >> (self.qubits - 1 - new_pos)) & 1;
                old |= bit << (self.qubits - 1 - old_qubit);
            }
            old
        };
        let mut data = vec![ZERO; dim * dim];
        for i in 0..dim {
            let oi = old_index(i);
            for j in 0..dim {
                data[i * dim + j] = self.data[oi * dim + old_index(j)];
            }
        }
        Ok(DensityMatrix { qubits: self.qubits, data })
    }

    /// Born probabilities of the projective measurement in the given basis.
    pub fn born_probabilities(&self, basis: BasisKind) -> Vec<f64> {
        let dim = self.dim();
        match basis {
            BasisKind::Computational => {
                (0..dim).map(|i| self.data[i * dim + i].re).collect()
            }
            BasisKind::Ghz => {
                let n = self.qubits;
                (0..dim)
                    .map(|code| {
                        let label = GhzLabel::from_code(code, n);
                        let (lo, hi) = ghz_support_indices(&label);
                        let sign = if label.b { -1.0 } else { 1.0 };
                        0.5 * (self.data[lo * dim + lo].re
                            + self.data[hi * dim + hi].re
                            + sign
                                * (self.data[lo * dim + hi] + self.data[hi * dim + lo]).re)
                    })
                    .collect()
            }
        }
    }

    /// Extract the eigenvalue map of a state that is diagonal in the given
    /// basis. Off-diagonal mass above `1e-10` signals a scheme bug and is an
    /// error.
    pub fn diagonalize_in_basis(&self, basis: BasisKind) -> Result<DiagonalState> {
        const TOL: f64 = 1e-10;
        let dim = self.dim();
        let probs = self.born_probabilities(basis);
        let residual = match basis {
            BasisKind::Computational => {
                let mut worst = 0.0_f64;
                for i in 0..dim {
                    for j in 0..dim {
                        if i != j {
                            worst = worst.max(self.data[i * dim + j].norm());
                        }
                    }
                }
                worst
            }
            BasisKind::Ghz => {
                // Residual of the reconstruction sum_q q(s,b) * Phi_s^b.
                let mut recon = vec![ZERO; dim * dim];
                for (code, &q) in probs.iter().enumerate() {
                    let label = GhzLabel::from_code(code, self.qubits);
                    let (lo, hi) = ghz_support_indices(&label);
                    let sign = if label.b { -1.0 } else { 1.0 };
                    recon[lo * dim + lo] += 0.5 * q;
                    recon[hi * dim + hi] += 0.5 * q;
                    recon[lo * dim + hi] += 0.5 * sign * q;
                    recon[hi * dim + lo] += 0.5 * sign * q;
                }
                self.data
                    .iter()
                    .zip(&recon)
                    .map(|(a, b)| (a - b).norm())
                    .fold(0.0, f64::max)
            }
        };
        if residual > TOL {
            return Err(Error::NotDiagonal { residual });
        }
        let space = match basis {
            BasisKind::Computational => LabelSpace::z_bits(self.qubits),
            BasisKind::Ghz => LabelSpace::ghz(self.qubits),
        };
        DiagonalState::new_renormalized(space, probs, 1e-10)
    }
}

fn matrix_is_unitary(u: &[Complex64], dim: usize, tol: f64) -> bool {
    for i in 0..dim {
        for j in 0..dim {
            let mut acc = ZERO;
            for k in 0..dim {
                acc += u[k * dim + i].conj() * u[k * dim + j];
            }
            let expected = if i == j { ONE } else { ZERO };
            if (acc - expected).norm() > tol {
                return false;
            }
        }
    }
    true
}

/// Iterator over base indices whose masked bits are zero.
struct SubspaceBases {
    dim: usize,
    mask: usize,
    next: usize,
}

impl SubspaceBases {
    fn new(dim: usize, mask: usize) -> Self {
        Self { dim, mask, next: 0 }
    }
}

impl Iterator for SubspaceBases {
    type Item = usize;
    fn next(&mut self) -> Option<usize> {
        while self.next < self.dim {
            let candidate = self.next;
            self.next += 1;
            if candidate & self.mask == 0 {
                return Some(candidate);
            }
        }
        None
    }
}

/// Basis-state indices carrying the two amplitudes of |Phi_s^b>: the `|0 s>`
/// component and the `|1 s-bar>` component.
fn ghz_support_indices(label: &GhzLabel) -> (usize, usize) {
    let n = label.qubits();
    let lo = label.s.code();
    let hi = (1usize << (n - 1)) | label.s.complement().code();
    (lo, hi)
}

/// Amplitudes of the GHZ basis state |Phi_s^b>.
pub fn ghz_vector(label: &GhzLabel) -> Vec<Complex64> {
    let n = label.qubits();
    let mut amp = vec![ZERO; 1 << n];
    let (lo, hi) = ghz_support_indices(label);
    let w = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    amp[lo] = w;
    amp[hi] = if label.b { -w } else { w };
    amp
}

/// Projector (pure density matrix) of the GHZ basis state.
pub fn ghz_state(label: &GhzLabel) -> Result<DensityMatrix> {
    DensityMatrix::from_pure(&ghz_vector(label))
}

/// Alias kept for symmetry with the projector language of the basis.
pub fn ghz_projector(label: &GhzLabel) -> Result<DensityMatrix> {
    ghz_state(label)
}

/// Label algebra of a Pauli on qubit `j` of |Phi_s^b>, with the exact global
/// phase, so that `sigma_j |Phi_s^b> = phase * |Phi_{s'}^{b'}>` holds as a
/// matrix identity. For `j = 0` the string mask is all ones.
pub fn ghz_pauli_action(label: &GhzLabel, axis: PauliAxis, j: usize) -> Result<(GhzLabel, Complex64)> {
    let n = label.qubits();
    if j >= n {
        return Err(Error::InvalidParameter(format!(
            "qubit index {j} out of range for an {n}-qubit GHZ state"
        )));
    }
    let width = n - 1;
    let mask = if j == 0 {
        BitString::full_mask(width)
    } else {
        BitString::unit_mask(j, width)
    };
    let i = Complex64::new(0.0, 1.0);
    let sign = |neg: bool| if neg { -ONE } else { ONE };
    let (s, b, phase) = match axis {
        PauliAxis::X => {
            let phase = if j == 0 { sign(label.b) } else { ONE };
            (label.s.xor(mask), label.b, phase)
        }
        PauliAxis::Y => {
            let phase = if j == 0 {
                i * sign(!label.b)
            } else {
                i * sign(label.s.bit(j))
            };
            (label.s.xor(mask), !label.b, phase)
        }
        PauliAxis::Z => {
            let phase = if j == 0 { ONE } else { sign(label.s.bit(j)) };
            (label.s, !label.b, phase)
        }
    };
    Ok((GhzLabel::new(s, b), phase))
}

/// Apply a unitary to a pure state vector; same target convention as
/// [`DensityMatrix::apply_unitary`]. Used by the GHZ-algebra checks.
pub fn apply_unitary_to_vector(
    amplitudes: &mut [Complex64],
    u: &[Complex64],
    targets: &[usize],
    qubits: usize,
) {
    let dim = 1usize << qubits;
    assert_eq!(amplitudes.len(), dim);
    let m = targets.len();
    let sub = 1usize << m;
    assert_eq!(u.len(), sub * sub);
    let offsets: Vec<usize> = (0..sub)
        .map(|p| {
            let mut off = 0usize;
            for (idx, &t) in targets.iter().enumerate() {
                if (p >> (m - 1 - idx)) & 1 == 1 {
                    off |= 1 << (qubits - 1 - t);
                }
            }
            off
        })
        .collect();
    let tmask: usize = targets.iter().map(|&t| 1usize << (qubits - 1 - t)).sum();
    let mut scratch = vec![ZERO; sub];
    for base in SubspaceBases::new(dim, tmask) {
        for (p, off) in offsets.iter().enumerate() {
            scratch[p] = amplitudes[base + off];
        }
        for (p, off) in offsets.iter().enumerate() {
            let mut acc = ZERO;
            for q in 0..sub {
                acc += u[p * sub + q] * scratch[q];
            }
            amplitudes[base + off] = acc;
        }
    }
}

/// 2x2 gate as a flat slice for the vector/matrix appliers.
pub fn mat2_slice(m: &Mat2) -> &[Complex64] {
    &m[..]
}
