//! The play loop shared by every algorithm.

use std::time::Instant;

use crate::env::{Environment, RegretLedger};
use crate::error::Result;
use crate::params::{ArmIndex, Loss};

/// Outcome of one selection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Selection {
    pub arm: ArmIndex,
    /// Exact probability with which `arm` was drawn.
    pub prob: f64,
    /// Proposals used; 1 for the non-rejection backends.
    pub attempts: u32,
}

/// One persisted round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundRecord {
    pub t: u64,
    pub arm: ArmIndex,
    pub loss: f64,
    pub prob: f64,
    pub attempts: u32,
    /// Wall time spent in select + update, excluding the environment.
    pub elapsed_ns: u64,
}

/// A bandit algorithm driven round by round.
pub trait Policy {
    fn arms(&self) -> usize;

    /// Index of the next round, starting at 1.
    fn round(&self) -> u64;

    fn select(&mut self) -> Result<Selection>;

    /// Feed back the loss of the arm returned by the preceding `select`.
    fn update(&mut self, selection: &Selection, loss: Loss) -> Result<()>;

    /// select, observe, update.
    fn step(&mut self, env: &mut dyn Environment) -> Result<RoundRecord> {
        let t = self.round();
        let start = Instant::now();
        let selection = self.select()?;
        let select_ns = start.elapsed().as_nanos() as u64;
        let loss = env.observe(t, selection.arm)?;
        let start = Instant::now();
        self.update(&selection, loss)?;
        let update_ns = start.elapsed().as_nanos() as u64;
        env.record(t, selection.arm);
        Ok(RoundRecord {
            t,
            arm: selection.arm,
            loss: loss.value(),
            prob: selection.prob,
            attempts: selection.attempts,
            elapsed_ns: select_ns + update_ns,
        })
    }
}

/// Play `rounds` rounds, optionally charging each to a regret ledger using
/// the environment's full loss vectors.
pub fn run_episode<P: Policy + ?Sized>(
    policy: &mut P,
    env: &mut dyn Environment,
    rounds: u64,
    mut ledger: Option<&mut RegretLedger>,
) -> Result<Vec<RoundRecord>> {
    let mut records = Vec::with_capacity(rounds as usize);
    for _ in 0..rounds {
        let record = policy.step(env)?;
        if let Some(ledger) = ledger.as_deref_mut() {
            let losses = env.loss_vector(record.t)?;
            ledger.record(losses, record.arm);
        }
        records.push(record);
    }
    Ok(records)
}
