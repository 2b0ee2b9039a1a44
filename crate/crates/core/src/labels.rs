//! Outcome labels for the two measurement bases and the diagonal-state
//! representation used by the fast engine.
//!
//! A Z-basis label is a bit string over the leaf nodes; a GHZ-basis label is a
//! bit string `s` plus a phase bit `b`. Both are packed into a `usize` code so
//! that histograms and probability tables are flat arrays.

use crate::error::{Error, Result};

/// Bit string of fixed width packed into a `usize`.
///
/// Bit `j` of the string (counting positions from 1, as the leaf labels do) is
/// stored at machine bit `width - j`, so position 1 is the most significant
/// bit and renders leftmost.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BitString {
    code: usize,
    width: usize,
}

impl BitString {
    pub fn new(code: usize, width: usize) -> Self {
        assert!(width < usize::BITS as usize);
        assert!(code < (1 << width), "code out of range for width");
        Self { code, width }
    }

    pub fn zeros(width: usize) -> Self {
        Self::new(0, width)
    }

    pub fn code(&self) -> usize {
        self.code
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Bit at position `pos` in 1..=width (position 1 is leftmost).
    pub fn bit(&self, pos: usize) -> bool {
        assert!(pos >= 1 && pos <= self.width);
        (self.code >> (self.width - pos)) & 1 == 1
    }

    /// Mask with a single 1 at position `pos`.
    pub fn unit_mask(pos: usize, width: usize) -> usize {
        assert!(pos >= 1 && pos <= width);
        1 << (width - pos)
    }

    pub fn xor(&self, mask: usize) -> Self {
        Self::new(self.code ^ (mask & Self::full_mask(self.width)), self.width)
    }

    pub fn complement(&self) -> Self {
        self.xor(Self::full_mask(self.width))
    }

    pub fn full_mask(width: usize) -> usize {
        if width == 0 {
            0
        } else {
            (1 << width) - 1
        }
    }

    pub fn parity(&self) -> bool {
        self.code.count_ones() % 2 == 1
    }

    pub fn ones(&self) -> u32 {
        self.code.count_ones()
    }
}

impl std::fmt::Display for BitString {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for pos in 1..=self.width {
            write!(f, "{}", if self.bit(pos) { '1' } else { '0' })?;
        }
        Ok(())
    }
}

/// Label of an n-qubit GHZ basis state: the (n-1)-bit string `s` and the
/// phase bit `b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GhzLabel {
    pub s: BitString,
    pub b: bool,
}

impl GhzLabel {
    pub fn new(s: BitString, b: bool) -> Self {
        Self { s, b }
    }

    /// Number of qubits of the GHZ state this label indexes.
    pub fn qubits(&self) -> usize {
        self.s.width() + 1
    }

    /// Packed code: `s` bits followed by `b` as the least significant bit.
    pub fn code(&self) -> usize {
        (self.s.code() << 1) | usize::from(self.b)
    }

    pub fn from_code(code: usize, qubits: usize) -> Self {
        assert!(qubits >= 1);
        let b = code & 1 == 1;
        Self::new(BitString::new(code >> 1, qubits - 1), b)
    }
}

impl std::fmt::Display for GhzLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.s, u8::from(self.b))
    }
}

/// Which basis a label code indexes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisKind {
    /// Computational (Z) basis over bit strings.
    Computational,
    /// GHZ basis over (s, b) labels.
    Ghz,
}

/// The label set of a diagonal state: a basis kind plus the number of label
/// bits (for GHZ labels this counts the `s` bits and the phase bit).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LabelSpace {
    pub kind: BasisKind,
    pub bits: usize,
}

impl LabelSpace {
    pub fn z_bits(bits: usize) -> Self {
        Self { kind: BasisKind::Computational, bits }
    }

    pub fn ghz(qubits: usize) -> Self {
        Self { kind: BasisKind::Ghz, bits: qubits }
    }

    pub fn len(&self) -> usize {
        1 << self.bits
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Render a label code the way records serialize it.
    pub fn label_string(&self, code: usize) -> String {
        match self.kind {
            BasisKind::Computational => BitString::new(code, self.bits).to_string(),
            BasisKind::Ghz => GhzLabel::from_code(code, self.bits).to_string(),
        }
    }
}

/// Probability distribution over the labels of a basis: the exact state of
/// the fast engine and the diagonal of a basis-diagonal dense state.
#[derive(Debug, Clone)]
pub struct DiagonalState {
    space: LabelSpace,
    probs: Vec<f64>,
}

impl DiagonalState {
    /// Build from raw probabilities, checking normalization to 1e-12 and
    /// non-negativity (entries above -1e-12 are clamped to zero).
    pub fn new(space: LabelSpace, mut probs: Vec<f64>) -> Result<Self> {
        if probs.len() != space.len() {
            return Err(Error::InvalidParameter(format!(
                "diagonal state needs {} entries, got {}",
                space.len(),
                probs.len()
            )));
        }
        for p in probs.iter_mut() {
            if *p < -1e-12 {
                return Err(Error::InvalidParameter(format!(
                    "negative probability {p:.3e} in diagonal state"
                )));
            }
            if *p < 0.0 {
                *p = 0.0;
            }
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "diagonal state sums to {total}, expected 1"
            )));
        }
        Ok(Self { space, probs })
    }

    /// As `new` but with a caller-supplied normalization tolerance; the
    /// probabilities are rescaled to sum to exactly one.
    pub fn new_renormalized(space: LabelSpace, probs: Vec<f64>, tol: f64) -> Result<Self> {
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > tol {
            return Err(Error::InvalidParameter(format!(
                "diagonal state sums to {total}, expected 1 within {tol:.1e}"
            )));
        }
        let probs = probs.into_iter().map(|p| (p / total).max(0.0)).collect();
        Self::new(space, probs)
    }

    pub fn space(&self) -> LabelSpace {
        self.space
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, code: usize) -> f64 {
        self.probs[code]
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.probs.iter().copied().enumerate()
    }

    /// Largest absolute difference over labels.
    pub fn max_abs_diff(&self, other: &DiagonalState) -> f64 {
        assert_eq!(self.space, other.space);
        self.probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bitstring_positions_render_leftmost_first() {
        let s = BitString::new(0b10, 2);
        assert!(s.bit(1));
        assert!(!s.bit(2));
        assert_eq!(s.to_string(), "10");
    }

    #[test]
    fn unit_mask_targets_position() {
        let width = 3;
        let s = BitString::zeros(width).xor(BitString::unit_mask(2, width));
        assert_eq!(s.to_string(), "010");
    }

    #[test]
    fn ghz_label_code_roundtrip() {
        for code in 0..16 {
            let label = GhzLabel::from_code(code, 4);
            assert_eq!(label.code(), code);
        }
        let label = GhzLabel::new(BitString::new(0b01, 2), true);
        assert_eq!(label.to_string(), "01:1");
    }

    #[test]
    fn diagonal_state_rejects_bad_normalization() {
        let space = LabelSpace::z_bits(1);
        assert!(DiagonalState::new(space, vec![0.5, 0.6]).is_err());
        assert!(DiagonalState::new(space, vec![0.5, 0.5]).is_ok());
        assert!(DiagonalState::new(space, vec![1.5, -0.5]).is_err());
    }
}
