//! EXP4 over experts, each recommending one arm per round.
//!
//! An expert oracle reports, for round `t` and expert `j`, the recommended
//! arm `e_t(j)` and the group `E_t(j)` of experts recommending that same arm.
//! The engine samples an expert from the expert weights, plays its arm and
//! charges `loss / P(E_t(j))` to every member of the group, so one round
//! costs `|E_t(j)|` weight updates on any backend.
//!
//! The learning rate is `sqrt(2 ln N / (N T))`, the EXP3 rate with experts in
//! place of arms.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::error::{invalid_arg, invalid_state, Error, Result};
use crate::exp3::{Backend, EngineConfig, EngineStats, Exp3Engine};
use crate::params::{ArmIndex, Loss};
use crate::policy::{Policy, Selection};
use crate::rng::UniformSource;
use crate::weights::WeightState;

pub trait ExpertOracle {
    fn experts(&self) -> usize;

    fn arms(&self) -> usize;

    /// Arm recommended by `expert` on round `t`.
    fn recommend(&self, t: u64, expert: usize) -> ArmIndex;

    /// Every expert recommending the same arm as `expert` on round `t`,
    /// including `expert` itself.
    fn group(&self, t: u64, expert: usize) -> &[usize];
}

/// Expert `j` always recommends arm `j`.
#[derive(Debug, Clone)]
pub struct IdentityOracle {
    ids: Vec<usize>,
}

impl IdentityOracle {
    pub fn new(arms: usize) -> Self {
        Self {
            ids: (0..arms).collect(),
        }
    }
}

impl ExpertOracle for IdentityOracle {
    fn experts(&self) -> usize {
        self.ids.len()
    }

    fn arms(&self) -> usize {
        self.ids.len()
    }

    fn recommend(&self, _t: u64, expert: usize) -> ArmIndex {
        expert
    }

    fn group(&self, _t: u64, expert: usize) -> &[usize] {
        &self.ids[expert..expert + 1]
    }
}

/// Fixed assignment of experts to arms, the same every round.
#[derive(Debug, Clone)]
pub struct PartitionOracle {
    arms: usize,
    assignment: Vec<ArmIndex>,
    groups: Vec<Vec<usize>>,
}

impl PartitionOracle {
    pub fn new(assignment: Vec<ArmIndex>, arms: usize) -> Result<Self> {
        if assignment.len() < 2 {
            return invalid_arg("need at least 2 experts");
        }
        if arms < 2 {
            return invalid_arg("need at least 2 arms");
        }
        let mut groups = vec![Vec::new(); arms];
        for (j, &a) in assignment.iter().enumerate() {
            if a >= arms {
                return invalid_arg(format!("expert {j} recommends arm {a} of {arms}"));
            }
            groups[a].push(j);
        }
        Ok(Self {
            arms,
            assignment,
            groups,
        })
    }

    /// Parse `expert_id arm_id` lines. Blank lines and `#` comments are
    /// skipped; every expert from 0 to N-1 must appear exactly once. The arm
    /// count is one more than the largest arm id unless given.
    pub fn parse(text: &str, arms: Option<usize>) -> Result<Self> {
        let mut pairs = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let row = i + 1;
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let load = |message: String| Error::Load { row, message };
            let mut fields = line.split_whitespace();
            let (Some(j), Some(a), None) = (fields.next(), fields.next(), fields.next()) else {
                return Err(load(format!("expected 'expert_id arm_id', got '{line}'")));
            };
            let j: usize = j
                .parse()
                .map_err(|_| load(format!("bad expert id '{j}'")))?;
            let a: usize = a.parse().map_err(|_| load(format!("bad arm id '{a}'")))?;
            if pairs.insert(j, a).is_some() {
                return Err(load(format!("expert {j} listed twice")));
            }
        }
        let n = pairs.len();
        if let Some((&last, _)) = pairs.iter().next_back() {
            if last + 1 != n {
                return invalid_arg(format!("expert ids must cover 0..{n}, found id {last}"));
            }
        }
        let assignment: Vec<ArmIndex> = pairs.into_values().collect();
        let arms = arms.unwrap_or_else(|| assignment.iter().max().map_or(0, |a| a + 1));
        Self::new(assignment, arms)
    }

    pub fn load(path: impl AsRef<Path>, arms: Option<usize>) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?, arms)
    }
}

impl ExpertOracle for PartitionOracle {
    fn experts(&self) -> usize {
        self.assignment.len()
    }

    fn arms(&self) -> usize {
        self.arms
    }

    fn recommend(&self, _t: u64, expert: usize) -> ArmIndex {
        self.assignment[expert]
    }

    fn group(&self, _t: u64, expert: usize) -> &[usize] {
        &self.groups[self.assignment[expert]]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exp4Selection {
    pub expert: usize,
    pub arm: ArmIndex,
    /// Total probability of the experts recommending `arm`.
    pub group_prob: f64,
    pub attempts: u32,
}

/// EXP4 weights and sampler over N experts.
#[derive(Debug, Clone)]
pub struct Exp4Engine {
    inner: Exp3Engine,
}

impl Exp4Engine {
    pub fn new(experts: usize, horizon: u64, backend: Backend, seed: u64) -> Result<Self> {
        Self::with_config(
            experts,
            horizon,
            EngineConfig::new(backend),
            UniformSource::new(seed),
        )
    }

    pub fn with_config(
        experts: usize,
        horizon: u64,
        config: EngineConfig,
        rng: UniformSource,
    ) -> Result<Self> {
        Ok(Self {
            inner: Exp3Engine::with_config(experts, horizon, config, rng)?,
        })
    }

    pub fn experts(&self) -> usize {
        self.inner.arms()
    }

    pub fn round(&self) -> u64 {
        self.inner.round()
    }

    pub fn eta(&self) -> f64 {
        self.inner.eta().value()
    }

    pub fn state(&self) -> &WeightState {
        self.inner.state()
    }

    pub fn stats(&self) -> EngineStats {
        self.inner.stats()
    }

    /// Sample an expert and sum the probability of its group in `O(|E|)`.
    pub fn select(&mut self, oracle: &dyn ExpertOracle) -> Result<Exp4Selection> {
        if oracle.experts() != self.experts() {
            return invalid_arg(format!(
                "oracle has {} experts, engine {}",
                oracle.experts(),
                self.experts()
            ));
        }
        let t = self.round();
        let s = self.inner.select_arm()?;
        let expert = s.arm;
        let arm = oracle.recommend(t, expert);
        let group = oracle.group(t, expert);
        if !group.contains(&expert) {
            return invalid_arg(format!("expert {expert} missing from its own group"));
        }
        let state = self.inner.state();
        let mut group_prob = 0.0;
        for &j in group {
            if j >= self.experts() {
                return invalid_arg(format!("group member {j} out of range"));
            }
            if oracle.recommend(t, j) != arm {
                return invalid_arg(format!(
                    "group member {j} recommends a different arm than expert {expert}"
                ));
            }
            group_prob += state.prob(j);
        }
        if group_prob > 1.0 + 1e-9 {
            return invalid_arg(format!("group probability {group_prob} exceeds 1"));
        }
        Ok(Exp4Selection {
            expert,
            arm,
            group_prob: group_prob.min(1.0),
            attempts: s.attempts,
        })
    }

    /// Multiply every weight in `group` by `exp(-eta * loss / group_prob)`.
    pub fn update(&mut self, group: &[usize], loss: Loss, group_prob: f64) -> Result<()> {
        if !(group_prob > 0.0 && group_prob <= 1.0 + 1e-12) {
            return invalid_state(format!("group probability {group_prob} outside (0, 1]"));
        }
        if let Some(&j) = group.iter().find(|&&j| j >= self.experts()) {
            return invalid_arg(format!("expert {j} out of range"));
        }
        let estimate = loss.value() / group_prob;
        for &j in group {
            self.inner.apply_estimate(j, estimate);
        }
        self.inner.set_touched(group.len());
        self.inner.end_round()
    }
}

/// [`Exp4Engine`] bound to an oracle, playing arms.
#[derive(Debug, Clone)]
pub struct Exp4Policy<O> {
    engine: Exp4Engine,
    oracle: O,
    pending: Option<Exp4Selection>,
}

impl<O: ExpertOracle> Exp4Policy<O> {
    pub fn new(engine: Exp4Engine, oracle: O) -> Result<Self> {
        if engine.experts() != oracle.experts() {
            return invalid_arg("oracle and engine disagree on the number of experts");
        }
        Ok(Self {
            engine,
            oracle,
            pending: None,
        })
    }

    pub fn engine(&self) -> &Exp4Engine {
        &self.engine
    }
}

impl<O: ExpertOracle> Policy for Exp4Policy<O> {
    fn arms(&self) -> usize {
        self.oracle.arms()
    }

    fn round(&self) -> u64 {
        self.engine.round()
    }

    fn select(&mut self) -> Result<Selection> {
        let s = self.engine.select(&self.oracle)?;
        self.pending = Some(s);
        Ok(Selection {
            arm: s.arm,
            prob: s.group_prob,
            attempts: s.attempts,
        })
    }

    fn update(&mut self, _selection: &Selection, loss: Loss) -> Result<()> {
        let Some(s) = self.pending.take() else {
            return invalid_state("update without a preceding select");
        };
        let t = self.engine.round();
        let group = self.oracle.group(t, s.expert);
        self.engine.update(group, loss, s.group_prob)
    }
}
