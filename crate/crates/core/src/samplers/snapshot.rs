use crate::error::{invalid_arg, invalid_state, Result};
use crate::params::ArmIndex;
use crate::rng::UniformSource;

use super::alias::AliasTable;

/// Hard cap on proposals per call. Unreachable when live weights stay within
/// a constant factor of the snapshot; hitting it means the live weights and
/// the snapshot are on different scales.
pub const MAX_ATTEMPTS: u32 = 1_000_000;

const RATIO_SLACK: f64 = 1e-9;

/// Rejection sampler that proposes from a frozen alias table and accepts
/// arm `k` with probability `live[k] / snapshot[k]`.
///
/// Valid as long as every live weight is at most its snapshot value, which
/// holds between rebuilds because EXP3 weights only decrease.
#[derive(Debug, Clone)]
pub struct SnapshotSampler {
    table: AliasTable,
    snapshot: Vec<f64>,
    total: f64,
}

impl SnapshotSampler {
    pub fn new(snapshot: Vec<f64>) -> Result<Self> {
        let table = AliasTable::build(&snapshot)?;
        let total = snapshot.iter().sum();
        Ok(Self {
            table,
            snapshot,
            total,
        })
    }

    /// Pair an already-built table with the snapshot it was built from.
    pub fn from_table(table: AliasTable, snapshot: Vec<f64>) -> Result<Self> {
        if table.len() != snapshot.len() {
            return invalid_arg("table and snapshot sizes differ");
        }
        let total = snapshot.iter().sum();
        Ok(Self {
            table,
            snapshot,
            total,
        })
    }

    pub fn table(&self) -> &AliasTable {
        &self.table
    }

    pub fn snapshot(&self) -> &[f64] {
        &self.snapshot
    }

    pub fn snapshot_total(&self) -> f64 {
        self.total
    }

    /// Sample from `live / sum(live)`; returns the arm and the number of
    /// proposals used. Three uniforms per proposal.
    pub fn sample(&self, live: &[f64], rng: &mut UniformSource) -> Result<(ArmIndex, u32)> {
        self.sample_scaled(live, 1.0, rng)
    }

    /// Like [`sample`](Self::sample) with live weights expressed on a
    /// different scale: the acceptance ratio is `live[k] * factor / snapshot[k]`.
    pub fn sample_scaled(
        &self,
        live: &[f64],
        factor: f64,
        rng: &mut UniformSource,
    ) -> Result<(ArmIndex, u32)> {
        if live.len() != self.snapshot.len() {
            return invalid_arg("live weight count does not match snapshot");
        }
        for attempt in 1..=MAX_ATTEMPTS {
            let u1 = rng.next_f64();
            let u2 = rng.next_f64();
            let (k, snap) = self.table.propose(u1, u2);
            // accept with probability live * factor / snap, without dividing
            let scaled = live[k] * factor;
            if scaled > snap * (1.0 + RATIO_SLACK) {
                return invalid_state(format!(
                    "acceptance ratio {} > 1 for arm {k}: live weight exceeds snapshot",
                    scaled / snap
                ));
            }
            if rng.next_f64() * snap < scaled {
                return Ok((k, attempt));
            }
        }
        invalid_state(format!("no acceptance after {MAX_ATTEMPTS} proposals"))
    }

    /// Exact probability that a single proposal is accepted, `W_live / W_snapshot`.
    pub fn acceptance_probability(&self, live: &[f64]) -> f64 {
        live.iter().sum::<f64>() / self.total
    }
}
