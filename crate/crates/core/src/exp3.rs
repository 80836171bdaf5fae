//! Fixed-horizon EXP3 over interchangeable sampling backends.
//!
//! Every backend samples exactly from `w_i / W`; they differ only in cost:
//!
//! | backend                 | sample            | update   | periodic work          |
//! |-------------------------|-------------------|----------|------------------------|
//! | `naive`                 | O(K)              | O(1)     | none                   |
//! | `segtree`               | O(log K)          | O(log K) | none                   |
//! | `alias_snapshot`        | O(1) expected     | O(1)     | O(K) every period      |
//! | `alias_double_buffered` | O(1) expected     | O(1)     | `work_budget` per round|
//!
//! The alias backends propose from a table built on a snapshot of the
//! weights and accept arm `k` with probability `w_k / w_snap_k`. Weights only
//! shrink between snapshots, so the ratio never exceeds one.
//!
//! All backends except `alias_double_buffered` rebuild or renormalize in O(K)
//! when the raw total underflows; that event is rare (the total shrinks by at
//! most `e^2` per `K` rounds when `T >= 2 K ln K`) and is counted in
//! [`EngineStats::renormalizations`].

use std::fmt;
use std::str::FromStr;

use crate::error::{invalid_arg, invalid_state, Error, Result};
use crate::params::{fixed_eta, ipw_estimate, ArmIndex, HorizonParams, LearningRate, Loss};
use crate::policy::{Policy, Selection};
use crate::rng::UniformSource;
use crate::samplers::{
    naive_sample, BuildProgress, IncrementalBuilder, SegTree, SnapshotSampler, DEFAULT_WORK_BUDGET,
};
use crate::weights::WeightState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Backend {
    Naive,
    SegTree,
    AliasSnapshot,
    AliasDoubleBuffered,
}

impl Backend {
    pub const ALL: [Backend; 4] = [
        Backend::Naive,
        Backend::SegTree,
        Backend::AliasSnapshot,
        Backend::AliasDoubleBuffered,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Backend::Naive => "naive",
            Backend::SegTree => "segtree",
            Backend::AliasSnapshot => "alias_snapshot",
            Backend::AliasDoubleBuffered => "alias_double_buffered",
        }
    }

    pub fn is_alias(self) -> bool {
        matches!(self, Backend::AliasSnapshot | Backend::AliasDoubleBuffered)
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "naive" | "linear" => Ok(Backend::Naive),
            "segtree" | "tree" | "segment_tree" => Ok(Backend::SegTree),
            "alias_snapshot" | "alias" | "snapshot" => Ok(Backend::AliasSnapshot),
            "alias_double_buffered" | "double_buffered" | "alias_db" => {
                Ok(Backend::AliasDoubleBuffered)
            }
            other => invalid_arg(format!("unknown backend '{other}'")),
        }
    }
}

/// Backend choice plus the knobs the alias backends use.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngineConfig {
    pub backend: Backend,
    /// Rounds between snapshot rebuilds for `alias_snapshot`; defaults to K.
    pub rebuild_period: Option<usize>,
    /// Background unit steps per round for `alias_double_buffered`.
    pub work_budget: usize,
}

impl EngineConfig {
    pub fn new(backend: Backend) -> Self {
        Self {
            backend,
            rebuild_period: None,
            work_budget: DEFAULT_WORK_BUDGET,
        }
    }

    pub fn with_rebuild_period(mut self, period: usize) -> Self {
        self.rebuild_period = Some(period);
        self
    }

    pub fn with_work_budget(mut self, budget: usize) -> Self {
        self.work_budget = budget;
        self
    }
}

/// Instrumentation counters.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EngineStats {
    /// Full O(K) rebuilds of the sampling structure.
    pub rebuilds: u64,
    /// O(K) renormalizations of the raw weights.
    pub renormalizations: u64,
    /// Completed background builds swapped in (double-buffered only).
    pub swaps: u64,
    /// Background unit steps performed in the last finished round.
    pub last_round_work: usize,
    /// Whether the last finished round performed an O(K) renormalization.
    pub last_round_renormalized: bool,
    /// Weights written by the last update.
    pub last_round_touched: usize,
}

#[derive(Debug, Clone)]
struct DoubleBuffer {
    active: SnapshotSampler,
    active_scale: f64,
    factor: f64,
    builder: IncrementalBuilder,
    builder_scale: f64,
    total_at_start: f64,
}

#[derive(Debug, Clone)]
enum Sampler {
    Naive,
    Tree(SegTree),
    Snapshot {
        sampler: SnapshotSampler,
        scale: f64,
        factor: f64,
    },
    DoubleBuffered(Box<DoubleBuffer>),
}

/// EXP3 with a known horizon.
#[derive(Debug, Clone)]
pub struct Exp3Engine {
    state: WeightState,
    sampler: Sampler,
    config: EngineConfig,
    horizon: Option<u64>,
    round: u64,
    rebuild_period: usize,
    since_rebuild: usize,
    rng: UniformSource,
    stats: EngineStats,
    regime_warning: Option<String>,
}

impl Exp3Engine {
    /// Uniform weights, `eta = sqrt(2 ln K / (K T))`.
    pub fn new(arms: usize, horizon: u64, backend: Backend, seed: u64) -> Result<Self> {
        Self::with_config(
            arms,
            horizon,
            EngineConfig::new(backend),
            UniformSource::new(seed),
        )
    }

    pub fn with_config(
        arms: usize,
        horizon: u64,
        config: EngineConfig,
        rng: UniformSource,
    ) -> Result<Self> {
        let params = HorizonParams::fixed(arms, horizon)?;
        let warning = (!params.in_acceptance_regime()).then(|| {
            format!(
                "T = {horizon} < 2 K ln K = {:.1} for K = {arms}: expected rejection-sampling \
                 attempts are no longer bounded by e^2",
                2.0 * arms as f64 * (arms as f64).ln()
            )
        });
        if let Some(w) = &warning {
            log::warn!("{w}");
        }
        let mut engine = Self::with_eta(arms, params.eta, config, rng)?;
        engine.horizon = Some(horizon);
        engine.regime_warning = warning;
        Ok(engine)
    }

    /// Uniform weights with an explicit learning rate and no horizon.
    pub fn with_eta(
        arms: usize,
        eta: LearningRate,
        config: EngineConfig,
        rng: UniformSource,
    ) -> Result<Self> {
        let state = WeightState::uniform(arms, eta)?;
        let rebuild_period = config.rebuild_period.unwrap_or(arms);
        if rebuild_period == 0 {
            return invalid_arg("rebuild period must be at least 1");
        }
        if config.work_budget == 0 {
            return invalid_arg("work budget must be at least 1");
        }
        let mut engine = Self {
            state,
            sampler: Sampler::Naive,
            config,
            horizon: None,
            round: 1,
            rebuild_period,
            since_rebuild: 0,
            rng,
            stats: EngineStats::default(),
            regime_warning: None,
        };
        engine.sampler = engine.fresh_sampler()?;
        Ok(engine)
    }

    fn fresh_sampler(&mut self) -> Result<Sampler> {
        let raw = self.state.raw();
        let scale = self.state.scale();
        Ok(match self.config.backend {
            Backend::Naive => Sampler::Naive,
            Backend::SegTree => {
                let tree = SegTree::build(raw)?;
                self.state.set_total(tree.total());
                Sampler::Tree(tree)
            }
            Backend::AliasSnapshot => Sampler::Snapshot {
                sampler: SnapshotSampler::new(raw.to_vec())?,
                scale,
                factor: 1.0,
            },
            Backend::AliasDoubleBuffered => Sampler::DoubleBuffered(Box::new(DoubleBuffer {
                active: SnapshotSampler::new(raw.to_vec())?,
                active_scale: scale,
                factor: 1.0,
                builder: IncrementalBuilder::collecting(raw.len(), self.config.work_budget)?,
                builder_scale: scale,
                total_at_start: self.state.total(),
            })),
        })
    }

    pub fn arms(&self) -> usize {
        self.state.arms()
    }

    pub fn backend(&self) -> Backend {
        self.config.backend
    }

    pub fn horizon(&self) -> Option<u64> {
        self.horizon
    }

    /// Index of the next round to play, starting at 1.
    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn eta(&self) -> LearningRate {
        self.state.eta()
    }

    pub fn rebuild_period(&self) -> usize {
        self.rebuild_period
    }

    pub fn state(&self) -> &WeightState {
        &self.state
    }

    pub fn stats(&self) -> EngineStats {
        self.stats
    }

    pub fn rng(&self) -> &UniformSource {
        &self.rng
    }

    /// Set when `T < 2 K ln K`; the engine still runs.
    pub fn regime_warning(&self) -> Option<&str> {
        self.regime_warning.as_deref()
    }

    /// `ln W_t` in absolute terms.
    pub fn log_total(&self) -> f64 {
        self.state.log_total()
    }

    /// Exact current distribution (O(K)).
    pub fn probabilities(&self) -> Vec<f64> {
        self.state.probabilities()
    }

    /// Snapshot weights expressed on the live scale, for the alias backends.
    pub fn snapshot_on_live_scale(&self) -> Option<Vec<f64>> {
        let (sampler, factor) = match &self.sampler {
            Sampler::Snapshot {
                sampler, factor, ..
            } => (sampler, *factor),
            Sampler::DoubleBuffered(db) => (&db.active, db.factor),
            _ => return None,
        };
        Some(sampler.snapshot().iter().map(|s| s / factor).collect())
    }

    /// Draw one arm from `w / W`.
    pub fn select_arm(&mut self) -> Result<Selection> {
        let (arm, attempts) = match &self.sampler {
            Sampler::Naive => {
                let u = self.rng.next_f64();
                let (arm, total) = naive_sample(self.state.raw(), u)?;
                self.state.set_total(total);
                (arm, 1)
            }
            Sampler::Tree(tree) => {
                let arm = tree.sample(self.rng.next_f64())?;
                if tree.weight(arm) != self.state.raw_weight(arm) {
                    return invalid_state(format!("segment tree leaf {arm} out of sync"));
                }
                (arm, 1)
            }
            Sampler::Snapshot {
                sampler, factor, ..
            } => sampler.sample_scaled(self.state.raw(), *factor, &mut self.rng)?,
            Sampler::DoubleBuffered(db) => {
                db.active
                    .sample_scaled(self.state.raw(), db.factor, &mut self.rng)?
            }
        };
        let prob = self.state.prob(arm);
        if !(prob > 0.0 && prob.is_finite()) {
            return invalid_state(format!("selected arm {arm} has probability {prob}"));
        }
        Ok(Selection {
            arm,
            prob,
            attempts,
        })
    }

    /// Apply the EXP3 update for `arm` with the probability taken from the
    /// current state and advance one round.
    pub fn update(&mut self, arm: ArmIndex, loss: Loss) -> Result<()> {
        self.check_arm(arm)?;
        let p = self.state.prob(arm);
        let estimate = ipw_estimate(loss, p)
            .map_err(|e| Error::InvalidState(format!("corrupted weight state: {e}")))?;
        self.apply_estimate(arm, estimate);
        self.stats.last_round_touched = 1;
        self.end_round()
    }

    fn check_arm(&self, arm: ArmIndex) -> Result<()> {
        if arm >= self.arms() {
            return invalid_arg(format!("arm {arm} out of range for {} arms", self.arms()));
        }
        Ok(())
    }

    /// Multiply one weight by `exp(-eta * estimate)` and mirror it into the
    /// backend. Does not advance the round.
    pub(crate) fn apply_estimate(&mut self, arm: ArmIndex, estimate: f64) {
        if estimate == 0.0 {
            return;
        }
        if let Sampler::DoubleBuffered(db) = &mut self.sampler {
            db.builder.preserve(arm, self.state.raw_weight(arm));
        }
        let (_, new) = self.state.apply(arm, estimate);
        if let Sampler::Tree(tree) = &mut self.sampler {
            tree.update(arm, new)
                .expect("weights stay finite and nonnegative");
            self.state.set_total(tree.total());
        }
    }

    pub(crate) fn set_touched(&mut self, n: usize) {
        self.stats.last_round_touched = n;
    }

    /// Close the round: renormalize if needed, then run the backend schedule.
    pub(crate) fn end_round(&mut self) -> Result<()> {
        self.round += 1;
        self.since_rebuild += 1;
        self.stats.last_round_work = 0;
        self.stats.last_round_renormalized = false;
        if self.state.needs_renormalization() {
            self.renormalize()?;
        }
        let checkpoint_due = matches!(self.sampler, Sampler::Snapshot { .. })
            && self.since_rebuild >= self.rebuild_period;
        if checkpoint_due {
            return self.rebuild_checkpoint();
        }
        match &mut self.sampler {
            Sampler::DoubleBuffered(db) => {
                let progress = db.builder.step_with(self.state.raw())?;
                self.stats.last_round_work = db.builder.last_work();
                if let BuildProgress::Finished(table) = progress {
                    let total = self.state.total();
                    let exact_start = db.builder.snapshot_total();
                    let builder = std::mem::replace(
                        &mut db.builder,
                        IncrementalBuilder::collecting(self.state.arms(), self.config.work_budget)?,
                    );
                    db.active = SnapshotSampler::from_table(table, builder.into_snapshot())?;
                    db.active_scale = db.builder_scale;
                    db.factor = (self.state.scale() - db.active_scale).exp();
                    // Correct running-total drift against the exact snapshot sum.
                    let corrected = total + (exact_start - db.total_at_start);
                    self.state.set_total(corrected);
                    db.builder_scale = self.state.scale();
                    db.total_at_start = corrected;
                    self.stats.swaps += 1;
                }
            }
            _ => {}
        }
        Ok(())
    }

    fn renormalize(&mut self) -> Result<()> {
        self.state.renormalize();
        self.stats.renormalizations += 1;
        self.stats.last_round_renormalized = true;
        let scale = self.state.scale();
        match &mut self.sampler {
            Sampler::Naive => {}
            Sampler::Tree(tree) => tree.rebuild_from(self.state.raw())?,
            Sampler::Snapshot {
                scale: snap_scale,
                factor,
                ..
            } => *factor = (scale - *snap_scale).exp(),
            Sampler::DoubleBuffered(db) => {
                db.factor = (scale - db.active_scale).exp();
                db.builder =
                    IncrementalBuilder::collecting(self.state.arms(), self.config.work_budget)?;
                db.builder_scale = scale;
                db.total_at_start = self.state.total();
            }
        }
        Ok(())
    }

    /// Renormalize so the largest raw weight is 1 and rebuild the sampling
    /// structure from the current weights in O(K). For the alias backends the
    /// snapshot becomes the current weights.
    pub fn rebuild_checkpoint(&mut self) -> Result<()> {
        self.state.renormalize();
        self.sampler = self.fresh_sampler()?;
        self.since_rebuild = 0;
        self.stats.rebuilds += 1;
        Ok(())
    }

    /// Restart with uniform weights and `eta = fixed_eta(K, horizon)`; the
    /// random stream continues.
    pub fn reset(&mut self, horizon: u64) -> Result<()> {
        let eta = fixed_eta(self.arms(), horizon)?;
        self.state = WeightState::uniform(self.arms(), eta)?;
        self.horizon = Some(horizon);
        self.sampler = self.fresh_sampler()?;
        self.since_rebuild = 0;
        self.stats.rebuilds += 1;
        Ok(())
    }

    /// Replace every log weight, switch the learning rate and rebuild.
    pub(crate) fn reload(
        &mut self,
        log_weights: impl IntoIterator<Item = f64>,
        eta: LearningRate,
    ) -> Result<()> {
        self.state.set_eta(eta);
        self.state.load_log_weights(log_weights);
        self.sampler = self.fresh_sampler()?;
        self.since_rebuild = 0;
        self.stats.rebuilds += 1;
        Ok(())
    }

    /// Close a round with a full reload instead of the usual schedule.
    pub(crate) fn end_round_with_reload(
        &mut self,
        log_weights: impl IntoIterator<Item = f64>,
        eta: LearningRate,
    ) -> Result<()> {
        self.round += 1;
        self.stats.last_round_work = 0;
        self.stats.last_round_renormalized = true;
        self.reload(log_weights, eta)
    }
}

impl Policy for Exp3Engine {
    fn arms(&self) -> usize {
        Exp3Engine::arms(self)
    }

    fn round(&self) -> u64 {
        self.round
    }

    fn select(&mut self) -> Result<Selection> {
        self.select_arm()
    }

    fn update(&mut self, selection: &Selection, loss: Loss) -> Result<()> {
        Exp3Engine::update(self, selection.arm, loss)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fresh_engine_is_uniform() {
        for backend in Backend::ALL {
            let mut e = Exp3Engine::new(4, 1000, backend, 1).unwrap();
            for _ in 0..20 {
                let s = e.select_arm().unwrap();
                assert_eq!(s.prob, 0.25);
            }
            let mut e = Exp3Engine::new(2, 100, backend, 1).unwrap();
            assert_eq!(e.probabilities(), vec![0.5, 0.5]);
            assert_eq!(e.select_arm().unwrap().prob, 0.5);
        }
    }

    #[test]
    fn eta_matches_formula() {
        let e = Exp3Engine::new(10, 20_000, Backend::SegTree, 0).unwrap();
        assert!((e.eta().value() - 0.004798525912188081).abs() < 1e-17);
        assert!(e.regime_warning().is_none());
    }

    #[test]
    fn short_horizon_warns_but_runs() {
        let mut e = Exp3Engine::new(10, 10, Backend::AliasSnapshot, 0).unwrap();
        assert!(e.regime_warning().unwrap().contains("2 K ln K"));
        let s = e.select_arm().unwrap();
        e.update(s.arm, Loss::ONE).unwrap();
    }

    #[test]
    fn rejects_bad_construction() {
        assert!(Exp3Engine::new(1, 10, Backend::Naive, 0).is_err());
        assert!(Exp3Engine::new(3, 0, Backend::Naive, 0).is_err());
        let cfg = EngineConfig::new(Backend::AliasSnapshot).with_rebuild_period(0);
        assert!(Exp3Engine::with_config(3, 10, cfg, UniformSource::new(0)).is_err());
    }

    #[test]
    fn zero_loss_changes_nothing() {
        for backend in Backend::ALL {
            let mut e = Exp3Engine::new(3, 100, backend, 2).unwrap();
            for _ in 0..50 {
                let s = e.select_arm().unwrap();
                e.update(s.arm, Loss::ZERO).unwrap();
            }
            assert_eq!(e.state().raw(), &[1.0, 1.0, 1.0]);
            assert_eq!(e.state().total(), 3.0);
        }
    }

    #[test]
    fn single_update_example() {
        let cfg = EngineConfig::new(Backend::SegTree);
        let eta = LearningRate::new(0.1).unwrap();
        let mut e = Exp3Engine::with_eta(2, eta, cfg, UniformSource::new(0)).unwrap();
        e.update(0, Loss::ONE).unwrap();
        assert!((e.state().raw_weight(0) - 0.8187307530779818).abs() < 1e-15);
        assert!((e.state().total() - 1.8187307530779818).abs() < 1e-15);
        assert_eq!(e.round(), 2);
    }

    #[test]
    fn out_of_range_arm_rejected() {
        let mut e = Exp3Engine::new(3, 100, Backend::Naive, 0).unwrap();
        assert!(matches!(
            e.update(3, Loss::ONE),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn checkpoint_snapshot_equals_live() {
        let mut e = Exp3Engine::new(5, 1000, Backend::AliasSnapshot, 3).unwrap();
        assert_eq!(e.snapshot_on_live_scale().unwrap(), vec![1.0; 5]);
        for _ in 0..5 {
            let s = e.select_arm().unwrap();
            e.update(s.arm, Loss::ONE).unwrap();
        }
        // period K = 5 just elapsed: snapshot rebuilt from live weights
        assert_eq!(e.stats().rebuilds, 1);
        assert_eq!(
            e.snapshot_on_live_scale().unwrap(),
            e.state().raw().to_vec()
        );
        let max = e.state().raw().iter().copied().fold(0.0, f64::max);
        assert_eq!(max, 1.0);
        assert_eq!(e.select_arm().unwrap().attempts, 1);
    }

    #[test]
    fn backend_names_round_trip() {
        for b in Backend::ALL {
            assert_eq!(b.name().parse::<Backend>().unwrap(), b);
        }
        assert!("bogus".parse::<Backend>().is_err());
    }
}
