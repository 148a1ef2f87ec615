use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Ambient, MAX_DIM};

/// The knobs shared by every computation: lattice dimension, interaction
/// strength, optional torus side and walk length.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub dim: usize,
    pub beta: f64,
    /// Torus side; `None` means the walk lives on Z^d.
    pub torus: Option<u32>,
    pub n: usize,
}

impl ModelParams {
    pub fn new(dim: usize, beta: f64, torus: Option<u32>, n: usize) -> Result<Self> {
        let p = ModelParams { dim, beta, torus, n };
        p.validate()?;
        Ok(p)
    }

    pub fn lattice(dim: usize, beta: f64, n: usize) -> Result<Self> {
        Self::new(dim, beta, None, n)
    }

    pub fn torus(dim: usize, beta: f64, r: u32, n: usize) -> Result<Self> {
        Self::new(dim, beta, Some(r), n)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.dim > MAX_DIM {
            return Err(Error::InvalidParameter(format!("dimension must be in 1..={MAX_DIM}, got {}", self.dim)));
        }
        if !(0.0..=1.0).contains(&self.beta) {
            return Err(Error::InvalidParameter(format!("beta must lie in [0, 1], got {}", self.beta)));
        }
        if let Some(r) = self.torus {
            if r < 3 {
                return Err(Error::InvalidParameter(format!("torus side must be at least 3, got {r}")));
            }
        }
        Ok(())
    }

    pub fn ambient(&self) -> Ambient {
        match self.torus {
            Some(r) => Ambient::Torus(r),
            None => Ambient::Lattice,
        }
    }

    pub fn with_n(self, n: usize) -> Self {
        ModelParams { n, ..self }
    }

    pub fn with_beta(self, beta: f64) -> Self {
        ModelParams { beta, ..self }
    }

    pub fn with_torus(self, torus: Option<u32>) -> Self {
        ModelParams { torus, ..self }
    }

    /// Coordination number 2d.
    pub fn coordination(&self) -> usize {
        2 * self.dim
    }

    /// Torus volume r^d, if any.
    pub fn volume(&self) -> Option<f64> {
        self.torus.map(|r| (r as f64).powi(self.dim as i32))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_parameters() {
        assert!(ModelParams::new(0, 0.1, None, 3).is_err());
        assert!(ModelParams::new(2, -0.1, None, 3).is_err());
        assert!(ModelParams::new(2, 1.5, None, 3).is_err());
        assert!(ModelParams::new(2, 0.5, Some(2), 3).is_err());
        assert!(ModelParams::new(2, 1.0, Some(3), 3).is_ok());
        assert!(ModelParams::new(2, 0.0, None, 0).is_ok());
    }
}
