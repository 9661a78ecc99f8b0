//! Feature maps applied to reservoir states before the readout sees them,
//! both at training time and at every prediction step.

use crate::error::{Error, Result};

/// How the raw state vector is combined with the current input.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaseModifier {
    /// z = x
    Default,
    /// z = [x; u]
    Extended,
    /// z = [c; x]
    Padded,
    /// z = [c; x; u]
    PaddedExtended,
}

/// Elementwise product rules applied after the base combination, using
/// 1-based positions. Right-hand sides always read the untransformed vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Nonlinear {
    None,
    /// Squares every odd position.
    T1,
    /// Replaces each even position from 4 on with the product of the two
    /// preceding entries.
    T2,
    /// Replaces each even position up to the second-to-last with the product
    /// of its two neighbors.
    T3,
}

/// Complete state-to-feature map: a base combination, an optional nonlinear
/// rule, and the padding constant used by the padded forms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateModifier {
    pub base: BaseModifier,
    pub nonlinear: Nonlinear,
    pub constant: f64,
}

impl StateModifier {
    pub fn new(base: BaseModifier, nonlinear: Nonlinear, constant: f64) -> Result<Self> {
        if !constant.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "padding constant must be finite, got {constant}"
            )));
        }
        Ok(Self {
            base,
            nonlinear,
            constant,
        })
    }

    /// Identity map: plain state, no nonlinear rule, unit padding constant.
    pub fn plain() -> Self {
        Self {
            base: BaseModifier::Default,
            nonlinear: Nonlinear::None,
            constant: 1.0,
        }
    }

    /// Feature length produced for a state of length `state_len` and an
    /// input of length `input_len`.
    pub fn feature_len(&self, state_len: usize, input_len: usize) -> usize {
        match self.base {
            BaseModifier::Default => state_len,
            BaseModifier::Extended => state_len + input_len,
            BaseModifier::Padded => state_len + 1,
            BaseModifier::PaddedExtended => state_len + 1 + input_len,
        }
    }

    /// Maps a state/input pair to the feature vector the readout consumes.
    pub fn apply(&self, state: &[f64], input: &[f64]) -> Result<Vec<f64>> {
        let mut z = Vec::with_capacity(self.feature_len(state.len(), input.len()));
        match self.base {
            BaseModifier::Default => z.extend_from_slice(state),
            BaseModifier::Extended => {
                z.extend_from_slice(state);
                z.extend_from_slice(input);
            }
            BaseModifier::Padded => {
                z.push(self.constant);
                z.extend_from_slice(state);
            }
            BaseModifier::PaddedExtended => {
                z.push(self.constant);
                z.extend_from_slice(state);
                z.extend_from_slice(input);
            }
        }
        nonlinear_transform(self.nonlinear, &mut z)?;
        Ok(z)
    }
}

impl Default for StateModifier {
    fn default() -> Self {
        Self::plain()
    }
}

/// Applies the chosen product rule in place. Positions are 1-based in the
/// rule statements; products always read the original entries.
pub fn nonlinear_transform(variant: Nonlinear, z: &mut [f64]) -> Result<()> {
    match variant {
        Nonlinear::None => Ok(()),
        Nonlinear::T1 => {
            // odd 1-based positions are even 0-based indices
            for x in z.iter_mut().step_by(2) {
                *x *= *x;
            }
            Ok(())
        }
        Nonlinear::T2 => {
            if z.len() < 3 {
                return Err(Error::InvalidArgument(format!(
                    "nonlinear rule needs at least 3 entries, got {}",
                    z.len()
                )));
            }
            let original = z.to_vec();
            // 1-based even i >= 4 -> 0-based odd k >= 3
            for k in (3..z.len()).step_by(2) {
                z[k] = original[k - 1] * original[k - 2];
            }
            Ok(())
        }
        Nonlinear::T3 => {
            if z.len() < 3 {
                return Err(Error::InvalidArgument(format!(
                    "nonlinear rule needs at least 3 entries, got {}",
                    z.len()
                )));
            }
            let original = z.to_vec();
            // 1-based even i with i <= len-1 -> 0-based odd k with k+1 < len
            for k in (1..z.len() - 1).step_by(2) {
                z[k] = original[k - 1] * original[k + 1];
            }
            Ok(())
        }
    }
}
