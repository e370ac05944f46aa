//! Polynomials in the local interval time `t ∈ [0, Δt]`.
//!
//! Stored as monomial coefficients up to degree 4, which covers every product
//! that appears in the per-element geometry: with a quadratic-in-time
//! displacement the deformation gradient is quadratic, the Jacobian quartic,
//! and the flux `C(t) w(t)` cubic.

use std::ops::{Add, Mul, Neg, Sub};

pub const MAX_DEGREE: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TimePoly {
    coeffs: [f64; MAX_DEGREE + 1],
}

impl TimePoly {
    pub const ZERO: Self = Self {
        coeffs: [0.0; MAX_DEGREE + 1],
    };

    pub fn constant(c: f64) -> Self {
        let mut p = Self::ZERO;
        p.coeffs[0] = c;
        p
    }

    /// `c0 + c1 t + c2 t² + ...`; panics above degree 4.
    pub fn from_coeffs(cs: &[f64]) -> Self {
        assert!(cs.len() <= MAX_DEGREE + 1, "time polynomial degree exceeds {MAX_DEGREE}");
        let mut p = Self::ZERO;
        p.coeffs[..cs.len()].copy_from_slice(cs);
        p
    }

    pub fn coeffs(&self) -> &[f64; MAX_DEGREE + 1] {
        &self.coeffs
    }

    /// Index of the highest nonzero coefficient (0 for the zero polynomial).
    pub fn degree(&self) -> usize {
        self.coeffs.iter().rposition(|&c| c != 0.0).unwrap_or(0)
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
    }

    pub fn derivative(&self) -> Self {
        let mut d = Self::ZERO;
        for k in 1..=MAX_DEGREE {
            d.coeffs[k - 1] = k as f64 * self.coeffs[k];
        }
        d
    }

    /// Exact `∫₀^dt p(t) dt`, termwise.
    pub fn integrate(&self, dt: f64) -> f64 {
        let mut acc = 0.0;
        let mut pow = dt;
        for (k, &c) in self.coeffs.iter().enumerate() {
            acc += c * pow / (k + 1) as f64;
            pow *= dt;
        }
        acc
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut p = *self;
        p.coeffs.iter_mut().for_each(|c| *c *= s);
        p
    }
}

impl Add for TimePoly {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for (a, b) in self.coeffs.iter_mut().zip(rhs.coeffs) {
            *a += b;
        }
        self
    }
}

impl Sub for TimePoly {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        for (a, b) in self.coeffs.iter_mut().zip(rhs.coeffs) {
            *a -= b;
        }
        self
    }
}

impl Neg for TimePoly {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(-1.0)
    }
}

impl Mul for TimePoly {
    type Output = Self;
    /// Panics if the product has a nonzero coefficient above degree 4.
    fn mul(self, rhs: Self) -> Self {
        let mut out = Self::ZERO;
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                if b == 0.0 {
                    continue;
                }
                assert!(i + j <= MAX_DEGREE, "time polynomial product exceeds degree {MAX_DEGREE}");
                out.coeffs[i + j] += a * b;
            }
        }
        out
    }
}

impl Mul<f64> for TimePoly {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        self.scale(s)
    }
}

/// 2×2 matrix whose entries are time polynomials.
pub type PolyMat2 = [[TimePoly; 2]; 2];

pub fn eval_mat(m: &PolyMat2, t: f64) -> [[f64; 2]; 2] {
    [
        [m[0][0].eval(t), m[0][1].eval(t)],
        [m[1][0].eval(t), m[1][1].eval(t)],
    ]
}
