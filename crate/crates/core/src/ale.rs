//! ALE map, grid velocity, and per-element interval geometry.
//!
//! On each time interval `[t_n, t_n + Δt]` the nodal displacement is a
//! polynomial in the local time `t`: affine for piecewise-constant grid
//! velocity, quadratic for the continuous strategy. Because the displacement
//! is P1 in space, the deformation gradient `G`, its cofactor `C` and the
//! Jacobian `J` are constant in space on every element, and all of their time
//! dependence is captured exactly by [`TimePoly`]s.

use std::f64::consts::PI;

use crate::fem::{FeSpace, QuadratureRule};
use crate::mesh::Mesh;
use crate::poly::{eval_mat, PolyMat2, TimePoly};
use crate::{Error, Point, Result};

pub type Mat2 = [[f64; 2]; 2];

pub const IDENTITY: Mat2 = [[1.0, 0.0], [0.0, 1.0]];

/// Analytic ALE maps used by the benchmarks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PrescribedMap {
    Identity,
    /// `x = a(t) x̂` with `a(t) = c0 − c1 cos(omega t)`.
    UniformScale { c0: f64, c1: f64, omega: f64 },
    /// Boundary-preserving sinusoidal shear along each axis.
    MapA,
    /// Boundary-preserving diagonal bulge.
    MapB,
}

impl PrescribedMap {
    /// `a(t) = 2 − cos 20πt`.
    pub fn stability() -> Self {
        Self::UniformScale {
            c0: 2.0,
            c1: 1.0,
            omega: 20.0 * PI,
        }
    }

    /// `a(t) = 2 − cos 10πt`.
    pub fn convergence() -> Self {
        Self::UniformScale {
            c0: 2.0,
            c1: 1.0,
            omega: 10.0 * PI,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Identity => "identity",
            Self::UniformScale { .. } => "uniform-scale",
            Self::MapA => "A",
            Self::MapB => "B",
        }
    }

    /// Scale factor `a(t)` and its derivative for uniform-scale maps.
    pub fn scale_factor(&self, t: f64) -> Option<(f64, f64)> {
        match *self {
            Self::UniformScale { c0, c1, omega } => {
                Some((c0 - c1 * (omega * t).cos(), c1 * omega * (omega * t).sin()))
            }
            _ => None,
        }
    }

    pub fn displacement(&self, x: Point, t: f64) -> Point {
        match *self {
            Self::Identity => [0.0, 0.0],
            Self::UniformScale { .. } => {
                let (a, _) = self.scale_factor(t).unwrap();
                [(a - 1.0) * x[0], (a - 1.0) * x[1]]
            }
            Self::MapA => {
                let s = 0.5 * (PI * t).sin();
                let bump = |z: f64| (PI * z * (1.0 - z) * (z - 0.5)).sin();
                [s * bump(x[0]), s * bump(x[1])]
            }
            Self::MapB => {
                let d = (PI * t).sin() * x[0] * (1.0 - x[0]) * x[1] * (1.0 - x[1]);
                [d, d]
            }
        }
    }

    pub fn position(&self, x: Point, t: f64) -> Point {
        let d = self.displacement(x, t);
        [x[0] + d[0], x[1] + d[1]]
    }
}

/// Nodal P1 displacement `û_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct DisplacementField(pub Vec<Point>);

impl DisplacementField {
    pub fn zeros(n: usize) -> Self {
        Self(vec![[0.0; 2]; n])
    }

    pub fn values(&self) -> &[Point] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Displaced node positions `x̂_i + û_i`.
    pub fn deformed_nodes(&self, mesh: &Mesh) -> Vec<Point> {
        mesh.nodes()
            .iter()
            .zip(&self.0)
            .map(|(x, u)| [x[0] + u[0], x[1] + u[1]])
            .collect()
    }
}

/// Samples the map at the mesh nodes: `û_i = φ̂(x̂_i, t) − x̂_i`.
pub fn sample_displacement(map: &PrescribedMap, mesh: &Mesh, t: f64) -> DisplacementField {
    DisplacementField(mesh.nodes().iter().map(|&x| map.displacement(x, t)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VelocityStrategy {
    /// `ŵ = (û_{n+1} − û_n)/Δt` on each interval.
    PiecewiseConstant,
    /// `ŵ(t) = ŵ(t_n) + t ω̂`, continuous across intervals.
    Continuous,
}

impl VelocityStrategy {
    /// Short tag used in CSV output and on the command line.
    pub fn tag(&self) -> &'static str {
        match self {
            Self::PiecewiseConstant => "dc",
            Self::Continuous => "c",
        }
    }

    pub fn from_tag(s: &str) -> Option<Self> {
        match s {
            "dc" | "piecewise-constant" => Some(Self::PiecewiseConstant),
            "c" | "continuous" => Some(Self::Continuous),
            _ => None,
        }
    }
}

/// Grid velocity on one interval, `ŵ(t) = start + t·slope` per node.
#[derive(Debug, Clone, PartialEq)]
pub struct GridVelocity {
    pub strategy: VelocityStrategy,
    pub dt: f64,
    pub start: Vec<Point>,
    pub slope: Vec<Point>,
}

impl GridVelocity {
    pub fn at(&self, node: usize, t: f64) -> Point {
        let (w, s) = (self.start[node], self.slope[node]);
        [w[0] + t * s[0], w[1] + t * s[1]]
    }

    /// Nodal velocity at the end of the interval.
    pub fn end_velocity(&self) -> Vec<Point> {
        (0..self.start.len()).map(|i| self.at(i, self.dt)).collect()
    }

    /// `∫₀^Δt ŵ dt` per node.
    pub fn integral(&self) -> Vec<Point> {
        let (dt, h) = (self.dt, 0.5 * self.dt * self.dt);
        self.start
            .iter()
            .zip(&self.slope)
            .map(|(w, s)| [dt * w[0] + h * s[0], dt * w[1] + h * s[1]])
            .collect()
    }
}

fn check_pair(u_n: &DisplacementField, u_np1: &DisplacementField, dt: f64) -> Result<()> {
    if !(dt > 0.0) {
        return Err(Error::NonPositiveTimeStep(dt));
    }
    if u_n.len() != u_np1.len() {
        return Err(Error::LengthMismatch {
            expected: u_n.len(),
            got: u_np1.len(),
        });
    }
    Ok(())
}

pub fn velocity_piecewise_constant(
    u_n: &DisplacementField,
    u_np1: &DisplacementField,
    dt: f64,
) -> Result<GridVelocity> {
    check_pair(u_n, u_np1, dt)?;
    let start = u_n
        .0
        .iter()
        .zip(&u_np1.0)
        .map(|(a, b)| [(b[0] - a[0]) / dt, (b[1] - a[1]) / dt])
        .collect();
    Ok(GridVelocity {
        strategy: VelocityStrategy::PiecewiseConstant,
        dt,
        start,
        slope: vec![[0.0; 2]; u_n.len()],
    })
}

/// Velocity continuous in time: starts at `w_prev_end` and has the constant
/// slope `ω̂ = 2/Δt² (û_{n+1} − û_n − Δt ŵ(t_n))`, so that the nodal
/// displacement still lands exactly on `û_{n+1}`.
pub fn velocity_continuous(
    u_n: &DisplacementField,
    u_np1: &DisplacementField,
    w_prev_end: &[Point],
    dt: f64,
) -> Result<GridVelocity> {
    check_pair(u_n, u_np1, dt)?;
    if w_prev_end.len() != u_n.len() {
        return Err(Error::LengthMismatch {
            expected: u_n.len(),
            got: w_prev_end.len(),
        });
    }
    let c = 2.0 / (dt * dt);
    let slope = u_n
        .0
        .iter()
        .zip(&u_np1.0)
        .zip(w_prev_end)
        .map(|((a, b), w)| {
            [
                c * (b[0] - a[0] - dt * w[0]),
                c * (b[1] - a[1] - dt * w[1]),
            ]
        })
        .collect();
    Ok(GridVelocity {
        strategy: VelocityStrategy::Continuous,
        dt,
        start: w_prev_end.to_vec(),
        slope,
    })
}

/// Motion of the mesh on one interval: start and end displacement plus the
/// grid velocity connecting them.
#[derive(Debug, Clone)]
pub struct IntervalMotion {
    pub u_start: DisplacementField,
    pub u_end: DisplacementField,
    pub velocity: GridVelocity,
}

impl IntervalMotion {
    pub fn new(u_start: DisplacementField, u_end: DisplacementField, velocity: GridVelocity) -> Result<Self> {
        for len in [u_end.len(), velocity.start.len(), velocity.slope.len()] {
            if len != u_start.len() {
                return Err(Error::LengthMismatch {
                    expected: u_start.len(),
                    got: len,
                });
            }
        }
        Ok(Self {
            u_start,
            u_end,
            velocity,
        })
    }

    /// Static grid held at `u` for an interval of length `dt`.
    pub fn stationary(u: DisplacementField, dt: f64) -> Result<Self> {
        let v = velocity_piecewise_constant(&u, &u, dt)?;
        Self::new(u.clone(), u, v)
    }

    pub fn piecewise_constant(u_start: DisplacementField, u_end: DisplacementField, dt: f64) -> Result<Self> {
        let v = velocity_piecewise_constant(&u_start, &u_end, dt)?;
        Self::new(u_start, u_end, v)
    }

    pub fn continuous(
        u_start: DisplacementField,
        u_end: DisplacementField,
        w_prev_end: &[Point],
        dt: f64,
    ) -> Result<Self> {
        let v = velocity_continuous(&u_start, &u_end, w_prev_end, dt)?;
        Self::new(u_start, u_end, v)
    }

    pub fn dt(&self) -> f64 {
        self.velocity.dt
    }

    /// `û_n + t ŵ_start + t²/2 ω̂` as time polynomials, per component.
    pub fn displacement_poly(&self, node: usize) -> [TimePoly; 2] {
        let u = self.u_start.0[node];
        let w = self.velocity.start[node];
        let s = self.velocity.slope[node];
        [
            TimePoly::from_coeffs(&[u[0], w[0], 0.5 * s[0]]),
            TimePoly::from_coeffs(&[u[1], w[1], 0.5 * s[1]]),
        ]
    }

    pub fn displacement_at(&self, node: usize, t: f64) -> Point {
        let [px, py] = self.displacement_poly(node);
        [px.eval(t), py.eval(t)]
    }

    pub fn velocity_poly(&self, node: usize) -> [TimePoly; 2] {
        let w = self.velocity.start[node];
        let s = self.velocity.slope[node];
        [
            TimePoly::from_coeffs(&[w[0], s[0]]),
            TimePoly::from_coeffs(&[w[1], s[1]]),
        ]
    }
}

pub fn cofactor2d(g: &Mat2) -> Mat2 {
    [[g[1][1], -g[0][1]], [-g[1][0], g[0][0]]]
}

pub fn jacobian(g: &Mat2) -> f64 {
    g[0][0] * g[1][1] - g[0][1] * g[1][0]
}

pub fn cofactor_poly(g: &PolyMat2) -> PolyMat2 {
    [[g[1][1], -g[0][1]], [-g[1][0], g[0][0]]]
}

pub fn jacobian_poly(g: &PolyMat2) -> TimePoly {
    g[0][0] * g[1][1] - g[0][1] * g[1][0]
}

pub fn mat_vec(m: &Mat2, v: Point) -> Point {
    [
        m[0][0] * v[0] + m[0][1] * v[1],
        m[1][0] * v[0] + m[1][1] * v[1],
    ]
}

pub fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

/// `I + Σ_k û_k ⊗ ∇̂λ_k` for a P1 displacement given at the element vertices.
pub fn deformation_gradient(vertex_disp: &[Point; 3], grad_lambda: &[Point; 3]) -> Mat2 {
    let mut g = IDENTITY;
    for k in 0..3 {
        for a in 0..2 {
            for b in 0..2 {
                g[a][b] += vertex_disp[k][a] * grad_lambda[k][b];
            }
        }
    }
    g
}

/// Deformation gradient `G(t) = I + ∇̂û(t)` of element `elem` over the
/// interval, with polynomial-in-time entries.
pub fn element_def_gradient(mesh: &Mesh, elem: usize, motion: &IntervalMotion) -> Result<PolyMat2> {
    let grads = mesh.barycentric_gradients(elem)?;
    let tri = mesh.triangles()[elem];
    let mut g = [
        [TimePoly::constant(1.0), TimePoly::ZERO],
        [TimePoly::ZERO, TimePoly::constant(1.0)],
    ];
    for k in 0..3 {
        let u = motion.displacement_poly(tri[k]);
        for a in 0..2 {
            for b in 0..2 {
                g[a][b] = g[a][b] + u[a] * grads[k][b];
            }
        }
    }
    Ok(g)
}

/// `G`, `C` and `J` at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointGeometry {
    pub def_gradient: Mat2,
    pub cofactor: Mat2,
    pub jacobian: f64,
}

impl PointGeometry {
    pub fn from_def_gradient(g: Mat2) -> Self {
        Self {
            def_gradient: g,
            cofactor: cofactor2d(&g),
            jacobian: jacobian(&g),
        }
    }
}

/// Geometry of one element over one interval.
#[derive(Debug, Clone)]
pub struct ElementGeometry {
    pub def_gradient: PolyMat2,
    pub cofactor: PolyMat2,
    pub jacobian: TimePoly,
    /// `C(t) ŵ(t)` at the three vertices; linear in space on the element.
    pub flux: [[TimePoly; 2]; 3],
    /// `∫₀^Δt C(t) ŵ(t) dt` at the three vertices (discontinuous P1 data).
    pub int_flux: [Point; 3],
    pub div_int_flux: f64,
    /// Geometry computed directly from the endpoint displacements.
    pub start: PointGeometry,
    pub end: PointGeometry,
}

impl ElementGeometry {
    /// Endpoint approximation `Δt C(Δt) ŵ(Δt)` of the integrated flux used
    /// by the classical schemes, with its divergence.
    pub fn endpoint_flux(&self, dt: f64, grad_lambda: &[Point; 3]) -> ([Point; 3], f64) {
        let mut out = [[0.0; 2]; 3];
        for (k, f) in self.flux.iter().enumerate() {
            out[k] = [dt * f[0].eval(dt), dt * f[1].eval(dt)];
        }
        let div = divergence_p1(&out, grad_lambda);
        (out, div)
    }
}

/// Divergence of a P1 vector field given by its vertex values.
pub fn divergence_p1(values: &[Point; 3], grad_lambda: &[Point; 3]) -> f64 {
    values
        .iter()
        .zip(grad_lambda)
        .map(|(v, g)| v[0] * g[0] + v[1] * g[1])
        .sum()
}

/// Termwise exact time integral of the element flux and its (constant)
/// divergence.
pub fn integrated_flux_field(mesh: &Mesh, elem: usize, geom: &ElementGeometry, dt: f64) -> Result<([Point; 3], f64)> {
    let grads = mesh.barycentric_gradients(elem)?;
    let mut int_flux = [[0.0; 2]; 3];
    for (k, f) in geom.flux.iter().enumerate() {
        int_flux[k] = [f[0].integrate(dt), f[1].integrate(dt)];
    }
    let div = divergence_p1(&int_flux, &grads);
    Ok((int_flux, div))
}

/// Per-element geometry for one interval.
#[derive(Debug, Clone)]
pub struct IntervalGeometry {
    pub dt: f64,
    pub elements: Vec<ElementGeometry>,
    /// Referent barycentric gradients, cached per element.
    pub grad_lambda: Vec<[Point; 3]>,
}

impl IntervalGeometry {
    pub fn build(mesh: &Mesh, motion: &IntervalMotion) -> Result<Self> {
        if motion.u_start.len() != mesh.n_nodes() {
            return Err(Error::LengthMismatch {
                expected: mesh.n_nodes(),
                got: motion.u_start.len(),
            });
        }
        let dt = motion.dt();
        let mut elements = Vec::with_capacity(mesh.n_elements());
        let mut grad_lambda = Vec::with_capacity(mesh.n_elements());
        for (elem, tri) in mesh.triangles().iter().enumerate() {
            let grads = mesh.barycentric_gradients(elem)?;
            let g = element_def_gradient(mesh, elem, motion)?;
            let c = cofactor_poly(&g);
            let j = jacobian_poly(&g);

            let mut flux = [[TimePoly::ZERO; 2]; 3];
            for k in 0..3 {
                let w = motion.velocity_poly(tri[k]);
                flux[k] = [c[0][0] * w[0] + c[0][1] * w[1], c[1][0] * w[0] + c[1][1] * w[1]];
            }

            let vertex = |field: &DisplacementField| [field.0[tri[0]], field.0[tri[1]], field.0[tri[2]]];
            let start = PointGeometry::from_def_gradient(deformation_gradient(&vertex(&motion.u_start), &grads));
            let end = PointGeometry::from_def_gradient(deformation_gradient(&vertex(&motion.u_end), &grads));

            let mut geom = ElementGeometry {
                def_gradient: g,
                cofactor: c,
                jacobian: j,
                flux,
                int_flux: [[0.0; 2]; 3],
                div_int_flux: 0.0,
                start,
                end,
            };
            let (int_flux, div) = integrated_flux_field(mesh, elem, &geom, dt)?;
            geom.int_flux = int_flux;
            geom.div_int_flux = div;
            elements.push(geom);
            grad_lambda.push(grads);
        }
        Ok(Self {
            dt,
            elements,
            grad_lambda,
        })
    }

    pub fn jacobian_start(&self) -> Vec<f64> {
        self.elements.iter().map(|e| e.start.jacobian).collect()
    }

    pub fn jacobian_end(&self) -> Vec<f64> {
        self.elements.iter().map(|e| e.end.jacobian).collect()
    }

    pub fn cofactor_end(&self) -> Vec<Mat2> {
        self.elements.iter().map(|e| e.end.cofactor).collect()
    }

    pub fn cofactor_start(&self) -> Vec<Mat2> {
        self.elements.iter().map(|e| e.start.cofactor).collect()
    }

    /// Exactly integrated fluxes and divergences, per element.
    pub fn exact_flux(&self) -> Vec<([Point; 3], f64)> {
        self.elements.iter().map(|e| (e.int_flux, e.div_int_flux)).collect()
    }

    /// Endpoint-approximated fluxes `Δt C(Δt) ŵ(Δt)`, per element.
    pub fn endpoint_flux(&self) -> Vec<([Point; 3], f64)> {
        self.elements
            .iter()
            .zip(&self.grad_lambda)
            .map(|(e, g)| e.endpoint_flux(self.dt, g))
            .collect()
    }

    /// Smallest Jacobian over the interval: `samples` equispaced instants
    /// (endpoints included), refined by ternary search around the smallest
    /// sample of each element. Returns `(J_min, element, local t)`.
    pub fn min_jacobian(&self, samples: usize) -> (f64, usize, f64) {
        let samples = samples.max(3);
        let h = self.dt / (samples - 1) as f64;
        let mut best = (f64::INFINITY, 0, 0.0);
        for (elem, g) in self.elements.iter().enumerate() {
            let j = &g.jacobian;
            let (mut s_min, mut j_min) = (0, f64::INFINITY);
            for s in 0..samples {
                let v = j.eval(h * s as f64);
                if v < j_min {
                    (s_min, j_min) = (s, v);
                }
            }
            let (mut lo, mut hi) = ((s_min.max(1) - 1) as f64 * h, ((s_min + 1).min(samples - 1)) as f64 * h);
            for _ in 0..60 {
                let m1 = lo + (hi - lo) / 3.0;
                let m2 = hi - (hi - lo) / 3.0;
                if j.eval(m1) < j.eval(m2) {
                    hi = m2;
                } else {
                    lo = m1;
                }
            }
            let t_ref = 0.5 * (lo + hi);
            let (jm, tm) = if j.eval(t_ref) < j_min {
                (j.eval(t_ref), t_ref)
            } else {
                (j_min, h * s_min as f64)
            };
            if jm < best.0 {
                best = (jm, elem, tm);
            }
        }
        best
    }

    /// Fails with a tangling diagnostic if `J` drops to (numerically) zero or
    /// below anywhere in the interval. `t0` is the absolute start time.
    pub fn check_valid(&self, t0: f64) -> Result<()> {
        let (j, elem, t) = self.min_jacobian(17);
        let g = &self.elements[elem];
        let scale = g.start.jacobian.abs().max(g.end.jacobian.abs());
        if j <= 1e-10 * scale {
            return Err(Error::TangledGrid {
                elem,
                jacobian: j,
                t: t0 + t,
            });
        }
        Ok(())
    }

    /// Cofactor at local time `t`, evaluated from the polynomial.
    pub fn cofactor_at(&self, elem: usize, t: f64) -> Mat2 {
        eval_mat(&self.elements[elem].cofactor, t)
    }
}

/// Weak SCL residual per P1 test function:
/// `r_i = ∫ ψ̂_i (Ĵ_{n+1} − Ĵ_n) − ∫ ψ̂_i div̂(∫ C ŵ dt)`.
///
/// The Jacobians are taken from the endpoint displacements directly, not
/// from the time polynomial, so a vanishing residual is a genuine check of
/// `div̂(C ŵ) = ∂_t Ĵ`.
pub fn scl_residual(space: &FeSpace, geom: &IntervalGeometry) -> Vec<f64> {
    scl_residual_with_flux(space, geom, &geom.exact_flux())
}

/// Same as [`scl_residual`] with caller-supplied flux divergences (e.g. the
/// classical endpoint approximation).
pub fn scl_residual_with_flux(space: &FeSpace, geom: &IntervalGeometry, flux: &[([Point; 3], f64)]) -> Vec<f64> {
    assert_eq!(space.degree(), 1, "SCL residual is tested against P1 functions");
    let rule = QuadratureRule::degree2();
    let mesh = space.mesh();
    let mut r = vec![0.0; space.n_dofs()];
    for (elem, (g, (_, div))) in geom.elements.iter().zip(flux).enumerate() {
        let area = mesh.element_area(elem).expect("validated mesh");
        let data = g.end.jacobian - g.start.jacobian - div;
        let dofs = space.element_dofs(elem);
        for (bary, w) in rule.points() {
            for (k, &dof) in dofs.iter().enumerate() {
                r[dof] += 2.0 * area * w * bary[k] * data;
            }
        }
    }
    r
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}
