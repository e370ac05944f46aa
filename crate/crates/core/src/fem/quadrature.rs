//! Quadrature on the reference triangle `{(ξ, η) : ξ, η ≥ 0, ξ + η ≤ 1}`.
//!
//! Points are stored in barycentric form `(1 − ξ − η, ξ, η)`; weights sum to
//! the reference area 1/2.

#[derive(Debug, Clone)]
pub struct QuadratureRule {
    points: Vec<([f64; 3], f64)>,
    degree: usize,
}

impl QuadratureRule {
    /// 3-point rule at `(1/6, 1/6)`-type points, exact for degree 2.
    pub fn degree2() -> Self {
        let (a, b) = (1.0 / 6.0, 2.0 / 3.0);
        let w = 1.0 / 6.0;
        Self {
            points: vec![([b, a, a], w), ([a, b, a], w), ([a, a, b], w)],
            degree: 2,
        }
    }

    /// 6-point symmetric rule, exact for degree 4.
    pub fn degree4() -> Self {
        const A: f64 = 0.445_948_490_915_964_886_318_329_253_883;
        const WA: f64 = 0.223_381_589_678_011_465_695_007_008_433;
        const B: f64 = 0.091_576_213_509_770_743_459_571_463_402_2;
        const WB: f64 = 0.109_951_743_655_321_867_638_326_324_9;
        let mut points = Vec::with_capacity(6);
        for (c, w) in [(A, WA), (B, WB)] {
            let d = 1.0 - 2.0 * c;
            for bary in [[d, c, c], [c, d, c], [c, c, d]] {
                points.push((bary, 0.5 * w));
            }
        }
        Self { points, degree: 4 }
    }

    /// Collapsed (Duffy) tensor Gauss–Legendre rule with `n` points per
    /// direction, exact for degree `2n − 2`.
    pub fn collapsed_gauss(n: usize) -> Self {
        assert!(n >= 1);
        let (x, w) = gauss_legendre_unit(n);
        let mut points = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let xi = x[i];
                let eta = (1.0 - xi) * x[j];
                points.push(([1.0 - xi - eta, xi, eta], w[i] * w[j] * (1.0 - xi)));
            }
        }
        Self {
            points,
            degree: 2 * n - 2,
        }
    }

    /// Cheapest available rule exact for polynomials of degree `degree`.
    pub fn for_degree(degree: usize) -> Self {
        match degree {
            0..=2 => Self::degree2(),
            3..=4 => Self::degree4(),
            d => Self::collapsed_gauss(d.div_ceil(2) + 1),
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `(barycentric point, weight)` pairs.
    pub fn points(&self) -> impl Iterator<Item = (&[f64; 3], f64)> + '_ {
        self.points.iter().map(|(p, w)| (p, *w))
    }
}

/// Gauss–Legendre nodes and weights on `[0, 1]`, Newton iteration on `P_n`.
fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pnm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pnm1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = 0.5 * (1.0 - x);
        weights[i] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: usize) -> f64 {
        (1..=n).map(|k| k as f64).product()
    }

    // ∫_T ξ^p η^q = p! q! / (p + q + 2)!
    fn exact_monomial(p: usize, q: usize) -> f64 {
        factorial(p) * factorial(q) / factorial(p + q + 2)
    }

    fn check_exactness(rule: &QuadratureRule) {
        let total: f64 = rule.points().map(|(_, w)| w).sum();
        assert!((total - 0.5).abs() < 1e-14);
        for deg in 0..=rule.degree() {
            for p in 0..=deg {
                let q = deg - p;
                let approx: f64 = rule.points().map(|(b, w)| w * b[1].powi(p as i32) * b[2].powi(q as i32)).sum();
                let exact = exact_monomial(p, q);
                assert!(
                    (approx - exact).abs() < 1e-14,
                    "degree {} rule fails on x^{p} y^{q}: {approx} vs {exact}",
                    rule.degree()
                );
            }
        }
    }

    #[test]
    fn fixed_rules_are_exact() {
        check_exactness(&QuadratureRule::degree2());
        check_exactness(&QuadratureRule::degree4());
    }

    #[test]
    fn collapsed_rules_are_exact() {
        for n in 1..=6 {
            check_exactness(&QuadratureRule::collapsed_gauss(n));
        }
        for d in 0..=10 {
            assert!(QuadratureRule::for_degree(d).degree() >= d);
        }
    }

    #[test]
    fn degree4_rule_misses_degree5() {
        let rule = QuadratureRule::degree4();
        let worst = (0..=5)
            .map(|p| {
                let approx: f64 = rule.points().map(|(b, w)| w * b[1].powi(p) * b[2].powi(5 - p)).sum();
                (approx - exact_monomial(p as usize, 5 - p as usize)).abs()
            })
            .fold(0.0, f64::max);
        assert!(worst > 1e-6);
    }
}
