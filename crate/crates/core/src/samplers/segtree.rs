use crate::error::{invalid_arg, invalid_state, Result};
use crate::params::ArmIndex;

use super::validate_weights;

/// Sum tree over arm weights with power-of-two padding.
///
/// `nodes[1]` is the root, the children of `i` are `2i` and `2i + 1`, and arm
/// `j` lives at leaf `M + j`. Padding leaves `M + K .. 2M` hold exactly zero.
#[derive(Debug, Clone, PartialEq)]
pub struct SegTree {
    capacity: usize,
    arms: usize,
    nodes: Vec<f64>,
}

impl SegTree {
    pub fn build(weights: &[f64]) -> Result<Self> {
        validate_weights(weights)?;
        let arms = weights.len();
        let capacity = arms.next_power_of_two();
        let mut nodes = vec![0.0; 2 * capacity];
        nodes[capacity..capacity + arms].copy_from_slice(weights);
        let mut tree = Self {
            capacity,
            arms,
            nodes,
        };
        tree.rebuild_internal();
        Ok(tree)
    }

    /// Overwrite every leaf and recompute internal sums in O(K).
    pub fn rebuild_from(&mut self, weights: &[f64]) -> Result<()> {
        if weights.len() != self.arms {
            return invalid_arg("weight count does not match tree size");
        }
        validate_weights(weights)?;
        self.nodes[self.capacity..self.capacity + self.arms].copy_from_slice(weights);
        self.rebuild_internal();
        Ok(())
    }

    fn rebuild_internal(&mut self) {
        for i in (1..self.capacity).rev() {
            self.nodes[i] = self.nodes[2 * i] + self.nodes[2 * i + 1];
        }
    }

    pub fn arms(&self) -> usize {
        self.arms
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    #[inline]
    pub fn total(&self) -> f64 {
        self.nodes[1]
    }

    #[inline]
    pub fn weight(&self, arm: ArmIndex) -> f64 {
        self.nodes[self.capacity + arm]
    }

    /// Raw node array, index 0 unused.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Descend from the root with `r = u * W`.
    ///
    /// A right child whose subtree sum is zero is never entered, so padding
    /// leaves are unreachable even when rounding pushes `r` to a boundary.
    pub fn sample(&self, u: f64) -> Result<ArmIndex> {
        let total = self.nodes[1];
        if !(total > 0.0) {
            return invalid_state(format!("segment tree root is {total}"));
        }
        let mut r = u * total;
        let mut idx = 1;
        while idx < self.capacity {
            let left = self.nodes[2 * idx];
            if r < left || self.nodes[2 * idx + 1] <= 0.0 {
                idx *= 2;
            } else {
                r -= left;
                idx = 2 * idx + 1;
            }
        }
        Ok(idx - self.capacity)
    }

    /// Set one leaf and recompute its ancestors.
    pub fn update(&mut self, arm: ArmIndex, weight: f64) -> Result<()> {
        if arm >= self.arms {
            return invalid_arg(format!("arm {arm} out of range for {} arms", self.arms));
        }
        if !(weight.is_finite() && weight >= 0.0) {
            return invalid_arg(format!("weight {weight} must be finite and >= 0"));
        }
        let mut idx = self.capacity + arm;
        self.nodes[idx] = weight;
        while idx > 1 {
            idx /= 2;
            self.nodes[idx] = self.nodes[2 * idx] + self.nodes[2 * idx + 1];
        }
        Ok(())
    }

    /// Check every internal node equals the sum of its children exactly and
    /// that padding leaves are zero. Returns the first offending node.
    pub fn audit(&self) -> std::result::Result<(), usize> {
        for i in 1..self.capacity {
            if self.nodes[i] != self.nodes[2 * i] + self.nodes[2 * i + 1] {
                return Err(i);
            }
        }
        for i in self.capacity + self.arms..2 * self.capacity {
            if self.nodes[i] != 0.0 {
                return Err(i);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn build_two_leaves() {
        let t = SegTree::build(&[1.0, 1.0]).unwrap();
        assert_eq!(&t.nodes()[1..], &[2.0, 1.0, 1.0]);
    }

    #[test]
    fn build_four_leaves() {
        let t = SegTree::build(&[1.0, 2.0, 3.0, 2.0]).unwrap();
        assert_eq!(t.total(), 8.0);
        assert_eq!(t.nodes()[2], 3.0);
        assert_eq!(t.nodes()[3], 5.0);
    }

    #[test]
    fn build_with_padding() {
        let t = SegTree::build(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(t.capacity(), 4);
        assert_eq!(t.nodes()[7], 0.0);
        assert_eq!(t.total(), 6.0);
        assert!(t.audit().is_ok());
    }

    #[test]
    fn build_rejects_bad_weights() {
        assert!(SegTree::build(&[1.0, -1.0]).is_err());
        assert!(SegTree::build(&[1.0, f64::NAN]).is_err());
        assert!(SegTree::build(&[0.0, 0.0]).is_err());
        assert!(SegTree::build(&[1.0]).is_err());
    }

    #[test]
    fn sample_examples() {
        let t = SegTree::build(&[1.0, 1.0]).unwrap();
        assert_eq!(t.sample(0.25).unwrap(), 0);
        let t = SegTree::build(&[1.0, 2.0, 3.0, 2.0]).unwrap();
        assert_eq!(t.sample(0.4375).unwrap(), 2);
        assert_eq!(t.sample(0.75).unwrap(), 3);
    }

    #[test]
    fn update_examples() {
        let mut t = SegTree::build(&[1.0, 1.0]).unwrap();
        t.update(0, 3.0).unwrap();
        assert_eq!(t.total(), 4.0);

        let mut t = SegTree::build(&[1.0, 2.0, 3.0, 2.0]).unwrap();
        let original = t.clone();
        t.update(2, 0.5).unwrap();
        assert_eq!(t.total(), 5.5);
        assert_eq!(t.nodes()[3], 2.5);
        t.update(2, 3.0).unwrap();
        assert_eq!(t, original);

        assert!(t.update(1, -0.5).is_err());
        assert!(t.update(1, f64::INFINITY).is_err());
        assert!(t.update(4, 1.0).is_err());
    }

    #[test]
    fn zero_root_is_invalid_state() {
        let mut t = SegTree::build(&[1.0, 1.0]).unwrap();
        t.update(0, 0.0).unwrap();
        t.update(1, 0.0).unwrap();
        assert!(matches!(t.sample(0.5), Err(crate::Error::InvalidState(_))));
    }

    #[test]
    fn padding_never_sampled() {
        // Sizes just above a power of two leave most of the right half empty.
        for k in [3usize, 5, 9, 17, 33, 65, 129] {
            let w: Vec<f64> = (0..k).map(|i| 1.0 + (i % 3) as f64 * 0.1).collect();
            let t = SegTree::build(&w).unwrap();
            let mut u = 0.0;
            while u < 1.0 {
                assert!(t.sample(u).unwrap() < k);
                u += 1.0 / 4099.0;
            }
            let top = 1.0 - f64::EPSILON / 2.0;
            assert_eq!(t.sample(top).unwrap(), k - 1);
        }
    }

    fn linear_oracle(w: &[f64], r: f64) -> usize {
        let mut acc = 0.0;
        for (i, &x) in w.iter().enumerate() {
            acc += x;
            if r < acc {
                return i;
            }
        }
        w.len() - 1
    }

    proptest! {
        #[test]
        fn matches_linear_scan(
            w in prop::collection::vec(0.01f64..10.0, 2..80),
            us in prop::collection::vec(0.0f64..1.0, 1..40),
        ) {
            let t = SegTree::build(&w).unwrap();
            let total = t.total();
            let mut prefix = vec![0.0];
            for &x in &w { prefix.push(prefix.last().unwrap() + x); }
            for u in us {
                let r = u * total;
                if prefix.iter().any(|&p| (p - r).abs() <= 1e-12 * total) { continue; }
                prop_assert_eq!(t.sample(u).unwrap(), linear_oracle(&w, r));
            }
        }

        #[test]
        fn sums_hold_after_updates(
            w in prop::collection::vec(0.0f64..5.0, 2..70),
            ops in prop::collection::vec((0usize..70, 0.0f64..5.0), 0..200),
        ) {
            prop_assume!(w.iter().sum::<f64>() > 0.0);
            let mut t = SegTree::build(&w).unwrap();
            for (arm, x) in ops {
                let arm = arm % w.len();
                let before: Vec<f64> = (0..w.len()).map(|j| t.weight(j)).collect();
                t.update(arm, x).unwrap();
                for (j, &b) in before.iter().enumerate() {
                    if j != arm { prop_assert_eq!(t.weight(j), b); }
                }
            }
            prop_assert!(t.audit().is_ok());
        }
    }
}
