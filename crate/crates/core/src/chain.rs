//! Sample chain produced by the Gibbs drivers.

use crate::error::{Error, Result};

/// An M×k matrix of parameter samples with burn-in metadata.
///
/// All M iterations are recorded; the first `burn_in` rows are flagged as
/// burn-in and excluded from the post-burn-in views used for summaries.
#[derive(Debug, Clone)]
pub struct Chain {
    samples: Vec<f64>, // row-major, total × k
    total: usize,
    burn_in: usize,
    seed: u64,
    param_names: Vec<String>,
}

impl Chain {
    pub fn new(param_names: Vec<String>, total: usize, burn_in: usize, seed: u64) -> Result<Self> {
        if param_names.is_empty() {
            return Err(Error::InvalidParameter("chain needs at least one parameter".into()));
        }
        if burn_in >= total {
            return Err(Error::InvalidParameter(format!(
                "burn-in m={burn_in} must be smaller than total iterations M={total}"
            )));
        }
        Ok(Chain {
            samples: Vec::with_capacity(total * param_names.len()),
            total,
            burn_in,
            seed,
            param_names,
        })
    }

    pub(crate) fn push_row(&mut self, row: &[f64]) {
        debug_assert_eq!(row.len(), self.param_names.len());
        debug_assert!(self.samples.len() < self.total * self.param_names.len());
        self.samples.extend_from_slice(row);
    }

    /// Total number of iterations M.
    pub fn total(&self) -> usize {
        self.total
    }

    /// Burn-in count m.
    pub fn burn_in(&self) -> usize {
        self.burn_in
    }

    /// Number of post-burn-in rows, M − m.
    pub fn kept(&self) -> usize {
        self.total - self.burn_in
    }

    pub fn n_params(&self) -> usize {
        self.param_names.len()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn param_names(&self) -> &[String] {
        &self.param_names
    }

    pub fn param_index(&self, name: &str) -> Option<usize> {
        self.param_names.iter().position(|n| n == name)
    }

    pub fn row(&self, iter: usize) -> &[f64] {
        let k = self.n_params();
        &self.samples[iter * k..(iter + 1) * k]
    }

    pub fn value(&self, iter: usize, param: usize) -> f64 {
        self.samples[iter * self.n_params() + param]
    }

    /// Post-burn-in samples of one parameter, in iteration order.
    pub fn post_burn_in(&self, param: usize) -> Vec<f64> {
        (self.burn_in..self.total)
            .map(|i| self.value(i, param))
            .collect()
    }

    /// Mean of one parameter over the post-burn-in rows.
    pub fn posterior_mean(&self, param: usize) -> f64 {
        let sum: f64 = (self.burn_in..self.total)
            .map(|i| self.value(i, param))
            .sum();
        sum / self.kept() as f64
    }
}
