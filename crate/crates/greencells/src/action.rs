//! Per-cell ON/OFF assignments.
//!
//! [`ActionVector::new`] enforces the hard operational constraint that
//! coverage-layer (800 MHz) cells are always ON. The simulator re-validates
//! every vector a controller hands it, so even a vector built through
//! [`ActionVector::from_unchecked`] (reward-table math, fault-injection
//! tests) cannot drive a run into an uncovered state.

use std::fmt;

use thiserror::Error;

use crate::network::Network;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ActionError {
    #[error("action vector has {got} entries but the network has {expected} cells")]
    LengthMismatch { expected: usize, got: usize },
    #[error("coverage-layer cell {cell} cannot be switched OFF")]
    CoverageCellOff { cell: usize },
}

/// ON/OFF assignment for every cell at one control period.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ActionVector {
    on: Vec<bool>,
}

impl ActionVector {
    /// Validated constructor: checks the length and the coverage-layer rule.
    pub fn new(net: &Network, on: Vec<bool>) -> Result<Self, ActionError> {
        let av = ActionVector { on };
        av.validate_for(net)?;
        Ok(av)
    }

    /// All cells ON. Always valid for `net`.
    pub fn all_on(net: &Network) -> Self {
        ActionVector {
            on: vec![true; net.nr_cells()],
        }
    }

    /// Bypass validation. The simulator still rejects invalid vectors at the
    /// first step, so this is only useful for raw reward-function evaluation
    /// and for tests that inject violations.
    pub fn from_unchecked(on: Vec<bool>) -> Self {
        ActionVector { on }
    }

    /// In-place toggle for hot enumeration loops. Callers must not turn
    /// coverage cells off.
    pub(crate) fn set_unchecked(&mut self, cell: usize, on: bool) {
        self.on[cell] = on;
    }

    pub fn validate_for(&self, net: &Network) -> Result<(), ActionError> {
        if self.on.len() != net.nr_cells() {
            return Err(ActionError::LengthMismatch {
                expected: net.nr_cells(),
                got: self.on.len(),
            });
        }
        for &cell in net.coverage_cells() {
            if !self.on[cell] {
                return Err(ActionError::CoverageCellOff { cell });
            }
        }
        Ok(())
    }

    pub fn is_on(&self, cell: usize) -> bool {
        self.on[cell]
    }

    pub fn len(&self) -> usize {
        self.on.len()
    }

    pub fn is_empty(&self) -> bool {
        self.on.is_empty()
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.on
    }

    pub fn count_on(&self) -> usize {
        self.on.iter().filter(|&&b| b).count()
    }

    pub fn count_off(&self) -> usize {
        self.on.len() - self.count_on()
    }

    /// `'1'`/`'0'` per cell, ascending cell id; the schedule-log format.
    pub fn bitstring(&self) -> String {
        self.on.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }
}

impl fmt::Display for ActionVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.on {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}
