//! Benchmark problems: diffusivity, prescribed motion, initial and boundary
//! data, manufactured sources and exact solutions. All functions take
//! physical coordinates.

use std::f64::consts::PI;

use crate::ale::PrescribedMap;
use crate::Point;

/// Heat-equation benchmark on a moving domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Problem {
    /// Decay of a bump on an oscillating square, `α = 0.01`, `T = 0.4`.
    Stability,
    /// Manufactured solution on a dilating square, `α = 0.1`, error at `t = 0.3`.
    Convergence,
    /// Manufactured solution on the fixed unit square with an interior grid
    /// motion, `α = 0.1`, `T = 2`.
    Accuracy { map: PrescribedMap },
    /// `α = 0`, `f = 0`, constant initial and boundary data.
    Constant { map: PrescribedMap, value: f64 },
}

impl Problem {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Stability => "stability",
            Self::Convergence => "convergence",
            Self::Accuracy { .. } => "accuracy",
            Self::Constant { .. } => "constant",
        }
    }

    pub fn alpha(&self) -> f64 {
        match self {
            Self::Stability => 0.01,
            Self::Convergence | Self::Accuracy { .. } => 0.1,
            Self::Constant { .. } => 0.0,
        }
    }

    pub fn map(&self) -> PrescribedMap {
        match *self {
            Self::Stability => PrescribedMap::stability(),
            Self::Convergence => PrescribedMap::convergence(),
            Self::Accuracy { map } | Self::Constant { map, .. } => map,
        }
    }

    pub fn final_time(&self) -> f64 {
        match self {
            Self::Stability => 0.4,
            Self::Convergence => 0.3,
            Self::Accuracy { .. } | Self::Constant { .. } => 2.0,
        }
    }

    pub fn initial(&self, x: Point) -> f64 {
        match *self {
            Self::Stability => stability_initial(x),
            Self::Convergence => convergence_exact(x, 0.0),
            Self::Accuracy { .. } => accuracy_exact(x, 0.0),
            Self::Constant { value, .. } => value,
        }
    }

    pub fn source(&self, x: Point, t: f64) -> f64 {
        match self {
            Self::Stability | Self::Constant { .. } => 0.0,
            Self::Convergence => convergence_source(x, t),
            Self::Accuracy { .. } => accuracy_source(x, t),
        }
    }

    pub fn has_source(&self) -> bool {
        matches!(self, Self::Convergence | Self::Accuracy { .. })
    }

    pub fn exact(&self, x: Point, t: f64) -> Option<f64> {
        match *self {
            Self::Stability => None,
            Self::Convergence => Some(convergence_exact(x, t)),
            Self::Accuracy { .. } => Some(accuracy_exact(x, t)),
            Self::Constant { value, .. } => Some(value),
        }
    }

    pub fn boundary(&self, x: Point, t: f64) -> f64 {
        match *self {
            Self::Stability | Self::Convergence => 0.0,
            Self::Accuracy { .. } => accuracy_exact(x, t),
            Self::Constant { value, .. } => value,
        }
    }
}

/// `1600 x(1−x) y(1−y)`.
pub fn stability_initial(x: Point) -> f64 {
    1600.0 * x[0] * (1.0 - x[0]) * x[1] * (1.0 - x[1])
}

fn convergence_scale(t: f64) -> (f64, f64) {
    PrescribedMap::convergence().scale_factor(t).expect("uniform scale")
}

fn bubble(x: Point) -> f64 {
    x[0] * (1.0 - x[0]) * x[1] * (1.0 - x[1])
}

/// `u(x, t) = û(x / a(t), t)` with `û = 16 (1 + ½ sin 5πt) x̂(1−x̂)ŷ(1−ŷ)`.
pub fn convergence_exact(x: Point, t: f64) -> f64 {
    let (a, _) = convergence_scale(t);
    16.0 * (1.0 + 0.5 * (5.0 * PI * t).sin()) * bubble([x[0] / a, x[1] / a])
}

/// `∂_t u − α Δu` for [`convergence_exact`], written in referent variables:
/// `∂_t û − (a'/a) x̂·∇̂û − (α/a²) Δ̂û`.
pub fn convergence_source(x: Point, t: f64) -> f64 {
    let (a, da) = convergence_scale(t);
    let xh = [x[0] / a, x[1] / a];
    let s = 1.0 + 0.5 * (5.0 * PI * t).sin();
    let ds = 2.5 * PI * (5.0 * PI * t).cos();
    let (px, py) = (xh[0] * (1.0 - xh[0]), xh[1] * (1.0 - xh[1]));
    let q = px * py;
    let grad = [(1.0 - 2.0 * xh[0]) * py, px * (1.0 - 2.0 * xh[1])];
    let lap = -2.0 * py - 2.0 * px;
    let alpha = Problem::Convergence.alpha();
    16.0 * (ds * q - s * (da / a) * (xh[0] * grad[0] + xh[1] * grad[1]) - s * alpha / (a * a) * lap)
}

fn radial(x: Point) -> f64 {
    2.0 * (x[0] - 0.5).powi(2) + 2.0 * (x[1] - 0.5).powi(2)
}

/// `sin t · cos(2(x−½)² + 2(y−½)²)`.
pub fn accuracy_exact(x: Point, t: f64) -> f64 {
    t.sin() * radial(x).cos()
}

/// `∂_t u − α Δu` for [`accuracy_exact`].
pub fn accuracy_source(x: Point, t: f64) -> f64 {
    let s = radial(x);
    let alpha = Problem::Accuracy {
        map: PrescribedMap::Identity,
    }
    .alpha();
    t.cos() * s.cos() + alpha * t.sin() * (8.0 * s * s.cos() + 8.0 * s.sin())
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn d1(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
        (-f(x + 2.0 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2.0 * h)) / (12.0 * h)
    }

    fn d2(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
        (-f(x + 2.0 * h) + 16.0 * f(x + h) - 30.0 * f(x) + 16.0 * f(x - h) - f(x - 2.0 * h)) / (12.0 * h * h)
    }

    fn fd_source(u: impl Fn(Point, f64) -> f64, alpha: f64, x: Point, t: f64) -> f64 {
        let dt = d1(|s| u(x, s), t, 1e-4);
        let lap = d2(|s| u([s, x[1]], t), x[0], 1e-3) + d2(|s| u([x[0], s], t), x[1], 1e-3);
        dt - alpha * lap
    }

    #[test]
    fn convergence_source_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let t = rng.gen_range(0.01..0.3);
            let (a, _) = PrescribedMap::convergence().scale_factor(t).unwrap();
            let x = [a * rng.gen_range(0.0..1.0), a * rng.gen_range(0.0..1.0)];
            let fd = fd_source(convergence_exact, 0.1, x, t);
            assert!((fd - convergence_source(x, t)).abs() < 1e-6, "{fd} vs {}", convergence_source(x, t));
        }
    }

    #[test]
    fn accuracy_source_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let t = rng.gen_range(0.01..2.0);
            let x = [rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)];
            let fd = fd_source(accuracy_exact, 0.1, x, t);
            assert!((fd - accuracy_source(x, t)).abs() < 1e-6);
        }
    }

    #[test]
    fn initial_and_boundary_data() {
        assert_eq!(Problem::Stability.initial([0.5, 0.5]), 100.0);
        assert_eq!(Problem::Stability.boundary([0.0, 0.3], 0.2), 0.0);
        assert_eq!(Problem::Convergence.initial([0.5, 0.5]), 1.0);
        let (a, _) = PrescribedMap::convergence().scale_factor(0.25).unwrap();
        assert!(convergence_exact([a, 0.3], 0.25).abs() < 1e-15);
        let acc = Problem::Accuracy { map: PrescribedMap::MapB };
        assert_eq!(acc.initial([0.2, 0.7]), 0.0);
        assert!((acc.exact([0.5, 0.5], 1.0).unwrap() - 1f64.sin()).abs() < 1e-15);
        let c = Problem::Constant { map: PrescribedMap::MapB, value: 1.0 };
        assert_eq!((c.alpha(), c.source([0.1, 0.1], 1.0), c.boundary([0.0, 0.0], 1.0)), (0.0, 0.0, 1.0));
    }
}
