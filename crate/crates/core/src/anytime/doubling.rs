use crate::error::Result;
use crate::exp3::{EngineConfig, Exp3Engine};
use crate::params::{fixed_eta, Loss};
use crate::policy::{Policy, Selection};
use crate::rng::UniformSource;

/// Block `b` (from 0) covers `2^b` rounds and runs a fresh engine tuned for
/// horizon `2^b`.
#[derive(Debug, Clone)]
pub struct DoublingWrapper {
    inner: Exp3Engine,
    block_index: u32,
    played_in_block: u64,
    round: u64,
}

impl DoublingWrapper {
    pub fn new(arms: usize, config: EngineConfig, rng: UniformSource) -> Result<Self> {
        let inner = Exp3Engine::with_eta(arms, fixed_eta(arms, 1)?, config, rng)?;
        Ok(Self {
            inner,
            block_index: 0,
            played_in_block: 0,
            round: 1,
        })
    }

    pub fn inner(&self) -> &Exp3Engine {
        &self.inner
    }

    pub fn block_index(&self) -> u32 {
        self.block_index
    }

    pub fn block_len(&self) -> u64 {
        1u64 << self.block_index
    }

    /// Block containing global round `t` (1-based): `floor(log2 t)`.
    pub fn block_of(t: u64) -> u32 {
        63 - t.max(1).leading_zeros()
    }
}

impl Policy for DoublingWrapper {
    fn arms(&self) -> usize {
        self.inner.arms()
    }

    fn round(&self) -> u64 {
        self.round
    }

    fn select(&mut self) -> Result<Selection> {
        self.inner.select_arm()
    }

    fn update(&mut self, selection: &Selection, loss: Loss) -> Result<()> {
        self.inner.update(selection.arm, loss)?;
        self.round += 1;
        self.played_in_block += 1;
        if self.played_in_block == self.block_len() {
            self.block_index += 1;
            self.played_in_block = 0;
            self.inner.reset(self.block_len())?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exp3::Backend;

    fn wrapper(k: usize) -> DoublingWrapper {
        DoublingWrapper::new(
            k,
            EngineConfig::new(Backend::SegTree),
            UniformSource::new(4),
        )
        .unwrap()
    }

    #[test]
    fn block_arithmetic() {
        assert_eq!(DoublingWrapper::block_of(1), 0);
        assert_eq!(DoublingWrapper::block_of(2), 1);
        assert_eq!(DoublingWrapper::block_of(3), 1);
        for t in 4..=7 {
            assert_eq!(DoublingWrapper::block_of(t), 2);
        }
        assert_eq!(DoublingWrapper::block_of(8), 3);
    }

    #[test]
    fn resets_after_first_round() {
        let mut w = wrapper(3);
        assert_eq!(w.inner().eta().value(), fixed_eta(3, 1).unwrap().value());
        let s = w.select().unwrap();
        w.update(&s, Loss::ONE).unwrap();
        assert_eq!(w.block_index(), 1);
        assert_eq!(w.inner().state().raw(), &[1.0; 3]);
        assert_eq!(w.inner().eta().value(), fixed_eta(3, 2).unwrap().value());
    }

    #[test]
    fn tracks_block_of_every_round() {
        let mut w = wrapper(4);
        for t in 1..=300u64 {
            assert_eq!(w.round(), t);
            assert_eq!(w.block_index(), DoublingWrapper::block_of(t));
            let s = w.select().unwrap();
            w.update(&s, Loss::new(0.5).unwrap()).unwrap();
        }
    }
}
