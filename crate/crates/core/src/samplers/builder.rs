//! Resumable alias-table construction for double buffering.
//!
//! A build is split into unit-cost steps: copying one weight out of the live
//! array (collect), classifying one element (classify) and filling one bin
//! (place). [`IncrementalBuilder::step`] performs at most `budget` of them.
//! A builder created from an owned snapshot starts directly at the place
//! phase; one created with [`IncrementalBuilder::collecting`] copies the live
//! weights incrementally and uses copy-on-write through
//! [`IncrementalBuilder::preserve`] so the snapshot is consistent with the
//! round the collection started.

use std::collections::VecDeque;

use crate::error::{invalid_arg, invalid_state, Result};
use crate::params::ArmIndex;

use super::alias::{classify, place_one, AliasBin, AliasTable, Slot};
use super::validate_weights;

/// Placement steps performed per call unless configured otherwise.
pub const DEFAULT_WORK_BUDGET: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub enum BuildProgress {
    /// Work remains; `remaining` counts unit steps still to do.
    InProgress {
        remaining: usize,
    },
    Finished(AliasTable),
}

#[derive(Debug, Clone)]
enum Phase {
    Collect { cursor: usize, preserved: Vec<bool> },
    Classify { cursor: usize },
    Place,
    Done,
}

#[derive(Debug, Clone)]
pub struct IncrementalBuilder {
    arms: usize,
    budget: usize,
    phase: Phase,
    snapshot: Vec<f64>,
    residual: Vec<f64>,
    total: f64,
    mean: f64,
    small: VecDeque<usize>,
    large: VecDeque<usize>,
    bins: Vec<AliasBin>,
    slots: Vec<Slot>,
    last_work: usize,
}

impl IncrementalBuilder {
    /// Builder owning `weights`; sums and classifies up front, then places
    /// `budget` bins per step, finishing after `ceil(K / budget)` steps.
    pub fn new(weights: Vec<f64>, budget: usize) -> Result<Self> {
        check_budget(budget)?;
        let total = validate_weights(&weights)?;
        let arms = weights.len();
        let mean = total / arms as f64;
        let mut small = VecDeque::with_capacity(arms);
        let mut large = VecDeque::with_capacity(arms);
        for (i, &w) in weights.iter().enumerate() {
            classify(i, w, mean, &mut small, &mut large);
        }
        Ok(Self {
            arms,
            budget,
            phase: Phase::Place,
            residual: weights.clone(),
            snapshot: weights,
            total,
            mean,
            small,
            large,
            bins: Vec::with_capacity(arms),
            slots: Vec::with_capacity(arms),
            last_work: 0,
        })
    }

    /// Builder that will snapshot a live array of `arms` weights as it steps.
    pub fn collecting(arms: usize, budget: usize) -> Result<Self> {
        check_budget(budget)?;
        if arms < 2 {
            return invalid_arg(format!("need at least 2 arms, got {arms}"));
        }
        Ok(Self {
            arms,
            budget,
            phase: Phase::Collect {
                cursor: 0,
                preserved: vec![false; arms],
            },
            snapshot: vec![0.0; arms],
            residual: vec![0.0; arms],
            total: 0.0,
            mean: 0.0,
            small: VecDeque::with_capacity(arms),
            large: VecDeque::with_capacity(arms),
            bins: Vec::with_capacity(arms),
            slots: Vec::with_capacity(arms),
            last_work: 0,
        })
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn arms(&self) -> usize {
        self.arms
    }

    pub fn is_finished(&self) -> bool {
        matches!(self.phase, Phase::Done)
    }

    pub fn is_collecting(&self) -> bool {
        matches!(self.phase, Phase::Collect { .. })
    }

    /// Unit steps performed by the most recent call to `step`/`step_with`.
    pub fn last_work(&self) -> usize {
        self.last_work
    }

    /// Unit steps left before the table is finished.
    pub fn remaining(&self) -> usize {
        match &self.phase {
            Phase::Collect { cursor, .. } => 3 * self.arms - cursor,
            Phase::Classify { cursor } => 2 * self.arms - cursor,
            Phase::Place => self.arms - self.bins.len(),
            Phase::Done => 0,
        }
    }

    /// Record the pre-update value of `arm` before the live array changes.
    /// Only has an effect while collecting and before the cursor reaches
    /// `arm`; O(1).
    #[inline]
    pub fn preserve(&mut self, arm: ArmIndex, old_value: f64) {
        if let Phase::Collect { cursor, preserved } = &mut self.phase {
            if arm >= *cursor && !preserved[arm] {
                preserved[arm] = true;
                self.snapshot[arm] = old_value;
            }
        }
    }

    /// Advance a builder that owns its snapshot.
    pub fn step(&mut self) -> Result<BuildProgress> {
        if self.is_collecting() {
            return invalid_state("builder is collecting; use step_with(live)");
        }
        self.advance(None)
    }

    /// Advance, reading uncollected weights from `live`.
    pub fn step_with(&mut self, live: &[f64]) -> Result<BuildProgress> {
        if live.len() != self.arms {
            return invalid_arg("live weight count does not match builder");
        }
        self.advance(Some(live))
    }

    fn advance(&mut self, live: Option<&[f64]>) -> Result<BuildProgress> {
        if self.is_finished() {
            return invalid_state("builder already finished");
        }
        let mut work = 0;
        while work < self.budget {
            match &mut self.phase {
                Phase::Collect { cursor, preserved } => {
                    let i = *cursor;
                    let w = if preserved[i] {
                        self.snapshot[i]
                    } else {
                        live.expect("collect phase requires live weights")[i]
                    };
                    if !(w.is_finite() && w >= 0.0) {
                        return invalid_arg(format!("weight {i} is {w}"));
                    }
                    self.snapshot[i] = w;
                    self.residual[i] = w;
                    self.total += w;
                    *cursor += 1;
                    if *cursor == self.arms {
                        if !(self.total > 0.0 && self.total.is_finite()) {
                            return invalid_arg(format!("snapshot total is {}", self.total));
                        }
                        self.mean = self.total / self.arms as f64;
                        self.phase = Phase::Classify { cursor: 0 };
                    }
                }
                Phase::Classify { cursor } => {
                    let i = *cursor;
                    classify(
                        i,
                        self.snapshot[i],
                        self.mean,
                        &mut self.small,
                        &mut self.large,
                    );
                    *cursor += 1;
                    if *cursor == self.arms {
                        self.phase = Phase::Place;
                    }
                }
                Phase::Place => {
                    let bin = place_one(
                        &mut self.residual,
                        &mut self.small,
                        &mut self.large,
                        self.mean,
                    );
                    self.slots.push(Slot::new(&bin, &self.snapshot));
                    self.bins.push(bin);
                    if self.bins.len() == self.arms {
                        self.phase = Phase::Done;
                        work += 1;
                        self.last_work = work;
                        let bins = std::mem::take(&mut self.bins);
                        let slots = std::mem::take(&mut self.slots);
                        return Ok(BuildProgress::Finished(AliasTable::from_parts(
                            self.mean, bins, slots,
                        )));
                    }
                }
                Phase::Done => unreachable!(),
            }
            work += 1;
        }
        self.last_work = work;
        Ok(BuildProgress::InProgress {
            remaining: self.remaining(),
        })
    }

    /// Sum of the snapshot, valid once collection is over.
    pub fn snapshot_total(&self) -> f64 {
        self.total
    }

    pub fn snapshot(&self) -> &[f64] {
        &self.snapshot
    }

    /// Hand over the snapshot the table was built from.
    pub fn into_snapshot(self) -> Vec<f64> {
        self.snapshot
    }
}

fn check_budget(budget: usize) -> Result<()> {
    if budget == 0 {
        return invalid_arg("work budget must be at least 1");
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_to_end(b: &mut IncrementalBuilder) -> (usize, AliasTable) {
        let mut steps = 0;
        loop {
            steps += 1;
            match b.step().unwrap() {
                BuildProgress::InProgress { .. } => assert!(b.last_work() <= b.budget()),
                BuildProgress::Finished(t) => return (steps, t),
            }
        }
    }

    #[test]
    fn budget_covering_k_finishes_in_one_step() {
        let w = vec![1.0, 2.0, 3.0, 4.0];
        let mut b = IncrementalBuilder::new(w.clone(), 4).unwrap();
        let (steps, table) = run_to_end(&mut b);
        assert_eq!(steps, 1);
        assert_eq!(table, AliasTable::build(&w).unwrap());
    }

    #[test]
    fn large_k_matches_monolithic() {
        let w: Vec<f64> = (0..1024).map(|i| ((i * 7919) % 101) as f64 + 0.5).collect();
        let mut b = IncrementalBuilder::new(w.clone(), 4).unwrap();
        let (steps, table) = run_to_end(&mut b);
        assert_eq!(steps, 256);
        assert_eq!(table, AliasTable::build(&w).unwrap());
    }

    #[test]
    fn stepping_finished_builder_fails() {
        let mut b = IncrementalBuilder::new(vec![1.0, 1.0], 4).unwrap();
        run_to_end(&mut b);
        assert!(matches!(b.step(), Err(crate::Error::InvalidState(_))));
    }

    #[test]
    fn owned_snapshot_ignores_later_changes() {
        let mut live = vec![1.0, 2.0, 3.0, 4.0, 5.0];
        let mut b = IncrementalBuilder::new(live.clone(), 1).unwrap();
        let expected = AliasTable::build(&live).unwrap();
        b.step().unwrap();
        live[4] = 0.1;
        let (_, table) = run_to_end(&mut b);
        assert_eq!(table, expected);
    }

    #[test]
    fn collecting_with_copy_on_write_sees_start_state() {
        let start: Vec<f64> = (0..37).map(|i| 1.0 + (i % 5) as f64).collect();
        let expected = AliasTable::build(&start).unwrap();
        let mut live = start.clone();
        let mut b = IncrementalBuilder::collecting(live.len(), 3).unwrap();
        let mut round = 0usize;
        let table = loop {
            // mutate one arm per round, preserving first
            let arm = (round * 11) % live.len();
            b.preserve(arm, live[arm]);
            live[arm] *= 0.5;
            round += 1;
            match b.step_with(&live).unwrap() {
                BuildProgress::InProgress { .. } => assert!(b.last_work() <= 3),
                BuildProgress::Finished(t) => break t,
            }
        };
        assert_eq!(round, (3 * 37usize).div_ceil(3));
        assert_eq!(table, expected);
        assert_eq!(b.into_snapshot(), start);
    }

    #[test]
    fn collecting_requires_live_weights() {
        let mut b = IncrementalBuilder::collecting(4, 2).unwrap();
        assert!(b.step().is_err());
        assert!(b.step_with(&[1.0, 1.0]).is_err());
    }

    #[test]
    fn zero_budget_rejected() {
        assert!(IncrementalBuilder::new(vec![1.0, 1.0], 0).is_err());
        assert!(IncrementalBuilder::collecting(4, 0).is_err());
    }
}
