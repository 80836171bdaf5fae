use crate::error::{invalid_arg, Result};
use crate::rng::UniformSource;

use super::Environment;

/// Independent Bernoulli losses per arm and round.
///
/// Round `t` draws from its own ChaCha stream of the environment seed, so the
/// loss table is fixed by the seed and independent of the player's stream and
/// of query order.
#[derive(Debug, Clone)]
pub struct StochasticEnv {
    means: Vec<f64>,
    seed: u64,
    cached_round: Option<u64>,
    cache: Vec<f64>,
    generated_rounds: u64,
}

impl StochasticEnv {
    pub fn new(means: Vec<f64>, seed: u64) -> Result<Self> {
        if means.len() < 2 {
            return invalid_arg("need at least 2 arms");
        }
        if let Some(m) = means.iter().find(|m| !(0.0..=1.0).contains(*m)) {
            return invalid_arg(format!("mean {m} outside [0, 1]"));
        }
        let k = means.len();
        Ok(Self {
            means,
            seed,
            cached_round: None,
            cache: vec![0.0; k],
            generated_rounds: 0,
        })
    }

    /// Arm 0 has mean `0.5 - gap`, every other arm 0.5.
    pub fn with_gap(arms: usize, gap: f64, seed: u64) -> Result<Self> {
        if arms < 2 {
            return invalid_arg("need at least 2 arms");
        }
        let mut means = vec![0.5; arms];
        means[0] = 0.5 - gap;
        Self::new(means, seed)
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    /// Number of loss vectors generated so far.
    pub fn generated_rounds(&self) -> u64 {
        self.generated_rounds
    }
}

impl Environment for StochasticEnv {
    fn arms(&self) -> usize {
        self.means.len()
    }

    fn loss_vector(&mut self, t: u64) -> Result<&[f64]> {
        if t == 0 {
            return invalid_arg("rounds start at 1");
        }
        if self.cached_round != Some(t) {
            let mut rng = UniformSource::with_stream(self.seed, t);
            for (slot, &m) in self.cache.iter_mut().zip(&self.means) {
                *slot = if rng.next_f64() < m { 1.0 } else { 0.0 };
            }
            self.cached_round = Some(t);
            self.generated_rounds += 1;
        }
        Ok(&self.cache)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_means_give_zero_losses() {
        let mut env = StochasticEnv::new(vec![0.0; 4], 9).unwrap();
        for t in 1..200 {
            assert!(env.loss_vector(t).unwrap().iter().all(|&x| x == 0.0));
        }
    }

    #[test]
    fn gap_construction() {
        let env = StochasticEnv::with_gap(10, 0.1, 0).unwrap();
        assert!((env.means()[0] - 0.4).abs() < 1e-15);
        assert!(env.means()[1..].iter().all(|&m| m == 0.5));
    }

    #[test]
    fn deterministic_and_order_independent() {
        let mut a = StochasticEnv::with_gap(5, 0.1, 77).unwrap();
        let mut b = StochasticEnv::with_gap(5, 0.1, 77).unwrap();
        let forward: Vec<Vec<f64>> = (1..=50)
            .map(|t| a.loss_vector(t).unwrap().to_vec())
            .collect();
        for t in (1..=50).rev() {
            assert_eq!(
                b.loss_vector(t).unwrap(),
                forward[t as usize - 1].as_slice()
            );
        }
    }

    #[test]
    fn empirical_means() {
        let mut env = StochasticEnv::new(vec![0.2, 0.7], 3).unwrap();
        let n = 20_000;
        let mut sums = [0.0; 2];
        for t in 1..=n {
            let v = env.loss_vector(t).unwrap();
            sums[0] += v[0];
            sums[1] += v[1];
        }
        assert!((sums[0] / n as f64 - 0.2).abs() < 0.015);
        assert!((sums[1] / n as f64 - 0.7).abs() < 0.015);
    }

    #[test]
    fn rejects_bad_means() {
        assert!(StochasticEnv::new(vec![0.5, 1.2], 0).is_err());
        assert!(StochasticEnv::new(vec![0.5], 0).is_err());
    }
}
