use std::collections::VecDeque;

use crate::error::Result;
use crate::params::ArmIndex;

use super::validate_weights;

/// One bin of an alias table: a primary arm plus an optional alias whose
/// masses add up to the table's mean weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AliasBin {
    pub primary: ArmIndex,
    pub primary_mass: f64,
    pub alias: Option<ArmIndex>,
    pub alias_mass: f64,
}

/// Sampling view of a bin: both arms and their source weights in one
/// 32-byte record, so a proposal touches a single cache line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Slot {
    threshold: f64,
    primary: u32,
    alias: u32,
    w_primary: f64,
    w_alias: f64,
}

impl Slot {
    pub(super) fn new(bin: &AliasBin, weights: &[f64]) -> Self {
        let alias = bin.alias.unwrap_or(bin.primary);
        Self {
            threshold: bin.primary_mass,
            primary: bin.primary as u32,
            alias: alias as u32,
            w_primary: weights[bin.primary],
            w_alias: weights[alias],
        }
    }
}

/// Static alias table over `K` weights: `K` bins of capacity `W / K`.
#[derive(Debug, Clone, PartialEq)]
pub struct AliasTable {
    mean: f64,
    bins: Vec<AliasBin>,
    slots: Vec<Slot>,
}

impl AliasTable {
    /// Build in O(K).
    ///
    /// Elements with `w < W/K` start in Small, the rest in Large. Bin `i` is
    /// filled on the `i`-th packing step. When one group runs out before the
    /// other (exact means or rounding drift), each remaining element fills a
    /// bin by itself with the full mean mass.
    pub fn build(weights: &[f64]) -> Result<Self> {
        let total = validate_weights(weights)?;
        let k = weights.len();
        let mean = total / k as f64;
        let mut residual = weights.to_vec();
        let mut small = VecDeque::with_capacity(k);
        let mut large = VecDeque::with_capacity(k);
        for (i, &w) in weights.iter().enumerate() {
            classify(i, w, mean, &mut small, &mut large);
        }
        let bins: Vec<AliasBin> = (0..k)
            .map(|_| place_one(&mut residual, &mut small, &mut large, mean))
            .collect();
        let slots = bins.iter().map(|b| Slot::new(b, weights)).collect();
        Ok(Self { mean, bins, slots })
    }

    pub(crate) fn from_parts(mean: f64, bins: Vec<AliasBin>, slots: Vec<Slot>) -> Self {
        Self { mean, bins, slots }
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn bins(&self) -> &[AliasBin] {
        &self.bins
    }

    /// Bin `floor(u1 * K)`, then primary if `u2 * mean < primary_mass`.
    #[inline]
    pub fn sample(&self, u1: f64, u2: f64) -> ArmIndex {
        self.propose(u1, u2).0
    }

    /// Sampled arm together with the weight it had when the table was built.
    #[inline]
    pub(crate) fn propose(&self, u1: f64, u2: f64) -> (ArmIndex, f64) {
        let k = self.slots.len();
        let idx = ((u1 * k as f64) as usize).min(k - 1);
        let slot = &self.slots[idx];
        if u2 * self.mean < slot.threshold {
            (slot.primary as ArmIndex, slot.w_primary)
        } else {
            (slot.alias as ArmIndex, slot.w_alias)
        }
    }

    /// Total mass assigned to each arm across all bins.
    pub fn arm_masses(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.bins.len()];
        for bin in &self.bins {
            out[bin.primary] += bin.primary_mass;
            if let Some(a) = bin.alias {
                out[a] += bin.alias_mass;
            }
        }
        out
    }
}

#[inline]
pub(super) fn classify(
    i: usize,
    w: f64,
    mean: f64,
    small: &mut VecDeque<usize>,
    large: &mut VecDeque<usize>,
) {
    if w < mean {
        small.push_back(i);
    } else {
        large.push_back(i);
    }
}

/// One packing step. Each call retires exactly one element, so `K` calls
/// fill `K` bins.
#[inline]
pub(super) fn place_one(
    residual: &mut [f64],
    small: &mut VecDeque<usize>,
    large: &mut VecDeque<usize>,
    mean: f64,
) -> AliasBin {
    match (small.pop_front(), large.pop_front()) {
        (Some(s), Some(l)) => {
            let ws = residual[s];
            let fill = mean - ws;
            residual[l] -= fill;
            classify(l, residual[l], mean, small, large);
            AliasBin {
                primary: s,
                primary_mass: ws,
                alias: Some(l),
                alias_mass: fill,
            }
        }
        (Some(only), None) | (None, Some(only)) => AliasBin {
            primary: only,
            primary_mass: mean,
            alias: None,
            alias_mass: 0.0,
        },
        (None, None) => unreachable!("more bins requested than elements"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn assert_reconstructs(w: &[f64], t: &AliasTable) {
        let total: f64 = w.iter().sum();
        for bin in t.bins() {
            assert!((bin.primary_mass + bin.alias_mass - t.mean()).abs() <= 1e-12 * t.mean());
        }
        for (i, (&m, &x)) in t.arm_masses().iter().zip(w).enumerate() {
            assert!(
                (m - x).abs() <= 1e-9 * total,
                "arm {i}: mass {m} vs weight {x}"
            );
        }
    }

    #[test]
    fn uniform_weights_fill_bins_alone() {
        let t = AliasTable::build(&[1.0, 1.0]).unwrap();
        for bin in t.bins() {
            assert_eq!(bin.alias, None);
            assert_eq!(bin.primary_mass, 1.0);
        }
        assert_eq!(t.sample(0.1, 0.9), 0);
        assert_eq!(t.sample(0.6, 0.9), 1);
    }

    #[test]
    fn small_example() {
        let w = [1.0, 1.0, 2.0];
        let t = AliasTable::build(&w).unwrap();
        assert!((t.mean() - 4.0 / 3.0).abs() < 1e-15);
        let (idx, bin) = t
            .bins()
            .iter()
            .enumerate()
            .find(|(_, b)| b.primary == 1)
            .unwrap();
        assert_eq!(bin.primary_mass, 1.0);
        assert_eq!(bin.alias, Some(2));
        assert!((bin.alias_mass - 1.0 / 3.0).abs() < 1e-15);
        // P(arm 1) = (1/3) * (1 / (4/3)) = 1/4 = w_1 / W
        let p1: f64 = t.arm_masses()[1] / (t.mean() * 3.0);
        assert!((p1 - 0.25).abs() < 1e-15);
        // u2 * mean = 1.2 > 1 selects the alias
        let u1 = (idx as f64 + 0.5) / 3.0;
        assert_eq!(t.sample(u1, 1.2 / t.mean()), 2);
        assert_reconstructs(&w, &t);
    }

    #[test]
    fn zero_weight_gets_no_mass() {
        let w = [0.0, 1.0, 1.0];
        let t = AliasTable::build(&w).unwrap();
        assert_eq!(t.arm_masses()[0], 0.0);
        assert_reconstructs(&w, &t);
        let mut u = 0.0;
        while u < 1.0 {
            let mut v = 0.0;
            while v < 1.0 {
                assert_ne!(t.sample(u, v), 0);
                v += 1.0 / 64.0;
            }
            u += 1.0 / 64.0;
        }
    }

    #[test]
    fn dyadic_grid_law_is_exact() {
        let t = AliasTable::build(&[1.0, 3.0]).unwrap();
        let n = 1u32 << 10;
        let mut hits = [0u64; 2];
        for a in 0..n {
            for b in 0..n {
                let arm = t.sample(a as f64 / n as f64, b as f64 / n as f64);
                hits[arm] += 1;
            }
        }
        let all = (n as u64) * (n as u64);
        assert_eq!(hits[0] * 4, all);
        assert_eq!(hits[1] * 4, 3 * all);
    }

    #[test]
    fn rejects_invalid() {
        assert!(AliasTable::build(&[1.0, -2.0]).is_err());
        assert!(AliasTable::build(&[0.0, 0.0]).is_err());
        assert!(AliasTable::build(&[f64::INFINITY, 1.0]).is_err());
    }

    proptest! {
        #[test]
        fn reconstructs_masses(w in prop::collection::vec(0.0f64..100.0, 2..300)) {
            prop_assume!(w.iter().sum::<f64>() > 0.0);
            let t = AliasTable::build(&w).unwrap();
            prop_assert_eq!(t.len(), w.len());
            assert_reconstructs(&w, &t);
        }

        #[test]
        fn reconstructs_skewed(exps in prop::collection::vec(-300.0f64..0.0, 2..200)) {
            let w: Vec<f64> = exps.iter().map(|e| e.exp()).collect();
            let t = AliasTable::build(&w).unwrap();
            assert_reconstructs(&w, &t);
        }
    }
}
