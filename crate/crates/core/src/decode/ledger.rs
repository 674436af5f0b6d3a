//! Operation accounting for full-rebuild and memory-assisted bubble decoding.

use crate::{CodeParams, Error, Result};

/// Per-node cost model: `f(x) = x (1 + l) + x log2 x`, where `l` is the
/// number of symbol regenerations charged per node and `x log2 x` covers the
/// selection step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpModel {
    pub regenerations: f64,
}

impl Default for OpModel {
    fn default() -> Self {
        Self { regenerations: 1.0 }
    }
}

impl OpModel {
    pub fn unit_cost(&self, x: u64) -> f64 {
        if x == 0 {
            return 0.0;
        }
        let x = x as f64;
        x * (1.0 + self.regenerations) + x * x.log2()
    }
}

/// Children expanded at each layer: `x_i = min(2^{ik}, B 2^k)`.
pub fn layer_widths(params: &CodeParams) -> Vec<u64> {
    let k = params.k() as u32;
    let cap = (params.beam() as u64).saturating_mul(params.branching() as u64);
    (1..=params.segments() as u32)
        .map(|i| match 1u64.checked_shl(i * k) {
            Some(full) if i * k < 64 => full.min(cap),
            _ => cap,
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LedgerMode {
    /// Every received symbol triggers a full rebuild: `sum l_i o_1`.
    Rebuild,
    /// A symbol of segment `i` rebuilds layers `i..`: `sum l_i o_i`.
    Memory,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OpLedger {
    pub widths: Vec<u64>,
    pub unit_costs: Vec<f64>,
    /// `o_i = sum_{j >= i} f(x_j)`.
    pub suffix: Vec<f64>,
    pub total: f64,
}

/// Decoding work for a reception with per-segment symbol counts `counts`.
pub fn ledger_account(counts: &[usize], params: &CodeParams, mode: LedgerMode, model: &OpModel) -> Result<OpLedger> {
    if counts.len() != params.segments() {
        return Err(Error::PlanMismatch {
            expected: params.segments(),
            actual: counts.len(),
        });
    }
    let widths = layer_widths(params);
    let unit_costs: Vec<f64> = widths.iter().map(|&x| model.unit_cost(x)).collect();
    let mut suffix = vec![0.0; unit_costs.len()];
    let mut acc = 0.0;
    for (i, &u) in unit_costs.iter().enumerate().rev() {
        acc += u;
        suffix[i] = acc;
    }
    let total = match mode {
        LedgerMode::Rebuild => counts.iter().sum::<usize>() as f64 * suffix[0],
        LedgerMode::Memory => counts.iter().zip(&suffix).map(|(&l, &o)| l as f64 * o).sum(),
    };
    Ok(OpLedger {
        widths,
        unit_costs,
        suffix,
        total,
    })
}
