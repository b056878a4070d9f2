//! The five-dimensional search space and its warps.

use alloc::format;
use alloc::string::String;

use crate::math;

/// Decoded hyperparameter assignment.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperPoint {
    pub embed_dim: usize,
    pub hidden_size: usize,
    pub lr: f64,
    pub weight_decay: f64,
    pub eps: f64,
}

impl HyperPoint {
    pub fn describe(&self) -> String {
        format!(
            "d={} H={} lr={:.3e} wd={:.3e} eps={:.3e}",
            self.embed_dim, self.hidden_size, self.lr, self.weight_decay, self.eps
        )
    }
}

/// Fixed warped bounds: embed 8..256 and hidden 8..512 on log2 grids,
/// lr/weight-decay/eps log10-scaled.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SearchSpace;

impl SearchSpace {
    pub const DIMS: usize = 5;

    /// Maps a unit-cube point to concrete hyperparameters. Integer axes
    /// round after unwarping; out-of-cube inputs are clamped first.
    pub fn decode(&self, unit: &[f64]) -> HyperPoint {
        assert_eq!(unit.len(), Self::DIMS, "search space is five-dimensional");
        let u = |i: usize| unit[i].clamp(0.0, 1.0);
        let pow2 = |lo: f64, hi: f64, t: f64| math::powf(2.0, lo + (hi - lo) * t);
        let pow10 = |lo: f64, hi: f64, t: f64| math::powf(10.0, lo + (hi - lo) * t);
        HyperPoint {
            embed_dim: math::floor(pow2(3.0, 8.0, u(0)) + 0.5) as usize,
            hidden_size: math::floor(pow2(3.0, 9.0, u(1)) + 0.5) as usize,
            lr: pow10(-5.0, -1.0, u(2)),
            weight_decay: pow10(-8.0, -2.0, u(3)),
            eps: pow10(-10.0, -4.0, u(4)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;

    #[test]
    fn corners_hit_declared_bounds() {
        let space = SearchSpace;
        let lo = space.decode(&[0.0; 5]);
        assert_eq!(lo.embed_dim, 8);
        assert_eq!(lo.hidden_size, 8);
        assert!((lo.lr - 1e-5).abs() < 1e-18);
        assert!((lo.weight_decay - 1e-8).abs() < 1e-20);
        assert!((lo.eps - 1e-10).abs() < 1e-22);
        let hi = space.decode(&[1.0; 5]);
        assert_eq!(hi.embed_dim, 256);
        assert_eq!(hi.hidden_size, 512);
        assert!((hi.lr - 1e-1).abs() < 1e-14);
    }

    #[test]
    fn decoded_points_stay_in_bounds() {
        let space = SearchSpace;
        let mut rng = Rng::new(77);
        for _ in 0..500 {
            let unit: [f64; 5] = core::array::from_fn(|_| rng.uniform(-0.2, 1.2));
            let p = space.decode(&unit);
            assert!((8..=256).contains(&p.embed_dim));
            assert!((8..=512).contains(&p.hidden_size));
            let within = |v: f64, lo: f64, hi: f64| v >= lo * (1.0 - 1e-12) && v <= hi * (1.0 + 1e-12);
            assert!(within(p.lr, 1e-5, 1e-1));
            assert!(within(p.weight_decay, 1e-8, 1e-2));
            assert!(within(p.eps, 1e-10, 1e-4));
        }
    }

    #[test]
    fn integer_axes_are_log_spaced() {
        let space = SearchSpace;
        // Midpoint of the embed axis: 2^5.5 ~ 45.25 -> 45.
        assert_eq!(space.decode(&[0.5, 0.0, 0.0, 0.0, 0.0]).embed_dim, 45);
        assert_eq!(space.decode(&[0.2, 0.0, 0.0, 0.0, 0.0]).embed_dim, 16);
        assert_eq!(space.decode(&[0.0, 0.5, 0.0, 0.0, 0.0]).hidden_size, 64);
    }
}
