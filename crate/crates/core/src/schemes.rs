//! Time steppers for the pulled-back heat equation and the run driver.
//!
//! Each interval `[t_n, t_{n+1}]` contributes a weighted mass `M(Ĵ_{n+1})`,
//! a diffusion operator `A` and a load `b` built with end-of-interval
//! geometry, and a mesh-motion operator `𝓜_{n,n+1}`. The modified schemes
//! build `𝓜` from the exactly integrated flux `∫ C ŵ dt`; the classical
//! comparators use the endpoint product `Δt C(t_{n+1}) ŵ(t_{n+1})`.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::ale::{
    max_abs, sample_displacement, scl_residual, scl_residual_with_flux, DisplacementField, IntervalGeometry,
    IntervalMotion, VelocityStrategy,
};
use crate::fem::{
    apply_dirichlet, assemble_load, assemble_mesh_motion_operator, assemble_pulled_back_stiffness,
    assemble_weighted_mass, l2_error_vs_exact, l2_norm_current_domain, FeSpace, LinearSolver, QuadPoint,
    QuadratureRule, SparseMatrix,
};
use crate::problems::Problem;
use crate::{Error, Point, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SchemeId {
    MIE,
    MCN,
    MBDF2,
    MBDF3,
    CIE,
    CCN,
    CBDF2,
}

impl SchemeId {
    pub const ALL: [SchemeId; 7] = [
        Self::MIE,
        Self::MCN,
        Self::MBDF2,
        Self::MBDF3,
        Self::CIE,
        Self::CCN,
        Self::CBDF2,
    ];
    pub const MODIFIED: [SchemeId; 4] = [Self::MIE, Self::MCN, Self::MBDF2, Self::MBDF3];

    pub fn name(&self) -> &'static str {
        match self {
            Self::MIE => "mIE",
            Self::MCN => "mCN",
            Self::MBDF2 => "mBDF2",
            Self::MBDF3 => "mBDF3",
            Self::CIE => "cIE",
            Self::CCN => "cCN",
            Self::CBDF2 => "cBDF2",
        }
    }

    /// Uses the endpoint flux approximation.
    pub fn is_classical(&self) -> bool {
        matches!(self, Self::CIE | Self::CCN | Self::CBDF2)
    }

    /// Solution levels the scheme reads (`û_n`, `û_{n−1}`, ...).
    pub fn history_depth(&self) -> usize {
        match self {
            Self::MIE | Self::MCN | Self::CIE | Self::CCN => 1,
            Self::MBDF2 | Self::CBDF2 => 2,
            Self::MBDF3 => 3,
        }
    }

    /// Scheme actually used at step `n` while the history fills up.
    pub fn effective(&self, step: usize, startup: Startup) -> SchemeId {
        let depth = self.history_depth();
        if step + 1 >= depth {
            return *self;
        }
        let cn = startup == Startup::CrankNicolson;
        match (self.is_classical(), cn, step) {
            (false, false, 0) => Self::MIE,
            (false, false, _) => Self::MBDF2,
            (false, true, _) => Self::MCN,
            (true, false, _) => Self::CIE,
            (true, true, _) => Self::CCN,
        }
    }
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|id| id.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Config(format!("unknown scheme '{s}'")))
    }
}

/// How the history levels of a BDF scheme are produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Startup {
    /// Implicit Euler, then BDF2 for BDF3.
    Implicit,
    /// Crank–Nicolson for every startup step.
    #[default]
    CrankNicolson,
}

/// Geometry used for the `û_n` and `f_n` halves of Crank–Nicolson.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CnGeometry {
    /// Diffusion and load of both halves use the interval-end geometry.
    IntervalEnd,
    /// The `t_n` halves use the geometry at `t_n`.
    #[default]
    Endpoints,
}

/// Which solution level the lagged BDF motion operators multiply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LaggedMotion {
    /// `𝓜_{n−1,n}` and `𝓜_{n−2,n−1}` act on the unknown `û_{n+1}`.
    #[default]
    Unknown,
    /// They act on the known `û_n` and move to the right-hand side.
    Previous,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeConfig {
    pub scheme: SchemeId,
    pub dt: f64,
    pub final_time: f64,
    pub strategy: VelocityStrategy,
    pub startup: Startup,
    pub cn_geometry: CnGeometry,
    pub lagged_motion: LaggedMotion,
    pub rel_tol: f64,
    /// Abort on `J ≤ 0` anywhere in an interval.
    pub check_tangling: bool,
}

impl SchemeConfig {
    pub fn new(scheme: SchemeId, dt: f64, final_time: f64) -> Self {
        Self {
            scheme,
            dt,
            final_time,
            strategy: VelocityStrategy::PiecewiseConstant,
            startup: Startup::default(),
            cn_geometry: CnGeometry::default(),
            lagged_motion: LaggedMotion::default(),
            rel_tol: 1e-10,
            check_tangling: true,
        }
    }

    pub fn with_strategy(mut self, strategy: VelocityStrategy) -> Self {
        self.strategy = strategy;
        self
    }

    /// Number of steps; `final_time` must be a multiple of `dt`.
    pub fn steps(&self) -> Result<usize> {
        if !(self.dt > 0.0) {
            return Err(Error::NonPositiveTimeStep(self.dt));
        }
        if self.final_time < self.dt {
            return Err(Error::Config(format!(
                "final time {} shorter than one step {}",
                self.final_time, self.dt
            )));
        }
        let n = (self.final_time / self.dt).round();
        if (n * self.dt - self.final_time).abs() > 1e-12 * self.final_time.max(1.0) {
            return Err(Error::Config(format!(
                "final time {} is not a multiple of dt {}",
                self.final_time, self.dt
            )));
        }
        Ok(n as usize)
    }
}

/// Operators of one interval `[t_n, t_{n+1}]`.
#[derive(Debug, Clone)]
pub struct IntervalOperators {
    /// `M(Ĵ_{n+1})`.
    pub mass_end: SparseMatrix,
    /// `A` with the geometry at `t_{n+1}`.
    pub stiffness: SparseMatrix,
    /// `A` with the geometry at `t_n`, used by Crank–Nicolson with
    /// [`CnGeometry::Endpoints`].
    pub stiffness_start: SparseMatrix,
    /// `𝓜_{n,n+1}` (exact or endpoint flux depending on the scheme family).
    pub motion: SparseMatrix,
    /// `b(f̂_{n+1})` with `Ĵ_{n+1}`.
    pub load_end: Vec<f64>,
    /// `b(f̂_n)` with the Jacobian selected by the Crank–Nicolson geometry.
    pub load_start: Vec<f64>,
}

/// `lhs · û_{n+1} = Σ_k history[k] · û_{n−k} + load`.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub lhs: SparseMatrix,
    pub history: Vec<SparseMatrix>,
    pub load: Vec<f64>,
}

impl LinearSystem {
    /// `solutions[k]` is `û_{n−k}`.
    pub fn rhs(&self, solutions: &[&[f64]]) -> Vec<f64> {
        let mut r = self.load.clone();
        for (op, u) in self.history.iter().zip(solutions) {
            for (ri, v) in r.iter_mut().zip(op.mul_vec(u)) {
                *ri += v;
            }
        }
        r
    }
}

/// Builds the linear system of one step.
///
/// The classical BDF2 comparator is the textbook moving-mesh form: BDF2
/// mass differences with a single motion term `𝓜_{n,n+1}` on `û_{n+1}`.
///
/// `masses[k]` is `M(Ĵ_{n−k})`; `motions[k]` is `𝓜_{n−k−1,n−k}`.
pub fn build_system(
    scheme: SchemeId,
    ops: &IntervalOperators,
    masses: &[SparseMatrix],
    motions: &[SparseMatrix],
    lagged: LaggedMotion,
) -> Result<LinearSystem> {
    let need = |masses_needed: usize, motions_needed: usize| -> Result<()> {
        if masses.len() < masses_needed || motions.len() < motions_needed {
            return Err(Error::InsufficientHistory {
                scheme: scheme.name(),
                needed: masses_needed,
                available: masses.len().min(motions.len() + 1),
            });
        }
        Ok(())
    };
    let lc = SparseMatrix::linear_combination;
    let (a, m1, mm) = (&ops.stiffness, &ops.mass_end, &ops.motion);
    match scheme {
        SchemeId::MIE | SchemeId::CIE => {
            need(1, 0)?;
            Ok(LinearSystem {
                lhs: lc(&[(1.0, m1), (1.0, a), (-1.0, mm)]),
                history: vec![masses[0].clone()],
                load: ops.load_end.clone(),
            })
        }
        SchemeId::MCN | SchemeId::CCN => {
            need(1, 0)?;
            let load = ops.load_end.iter().zip(&ops.load_start).map(|(x, y)| 0.5 * (x + y)).collect();
            Ok(LinearSystem {
                lhs: lc(&[(1.0, m1), (0.5, a), (-0.5, mm)]),
                history: vec![lc(&[(1.0, &masses[0]), (-0.5, &ops.stiffness_start), (0.5, mm)])],
                load,
            })
        }
        SchemeId::CBDF2 => {
            need(2, 0)?;
            Ok(LinearSystem {
                lhs: lc(&[(1.5, m1), (1.0, a), (-1.0, mm)]),
                history: vec![masses[0].scaled(2.0), masses[1].scaled(-0.5)],
                load: ops.load_end.clone(),
            })
        }
        SchemeId::MBDF2 => {
            need(2, 1)?;
            let mut lhs_terms = vec![(1.5, m1), (1.0, a), (-1.5, mm)];
            let mut hist0 = vec![(2.0, &masses[0])];
            match lagged {
                LaggedMotion::Unknown => lhs_terms.push((0.5, &motions[0])),
                LaggedMotion::Previous => hist0.push((-0.5, &motions[0])),
            }
            Ok(LinearSystem {
                lhs: lc(&lhs_terms),
                history: vec![lc(&hist0), masses[1].scaled(-0.5)],
                load: ops.load_end.clone(),
            })
        }
        SchemeId::MBDF3 => {
            need(3, 2)?;
            let mut lhs_terms = vec![(11.0 / 6.0, m1), (1.0, a), (-11.0 / 6.0, mm)];
            let mut hist0 = vec![(3.0, &masses[0])];
            let lagged_terms = [(7.0 / 6.0, &motions[0]), (-1.0 / 3.0, &motions[1])];
            match lagged {
                LaggedMotion::Unknown => lhs_terms.extend(lagged_terms),
                LaggedMotion::Previous => hist0.extend(lagged_terms.map(|(c, m)| (-c, m))),
            }
            Ok(LinearSystem {
                lhs: lc(&lhs_terms),
                history: vec![lc(&hist0), masses[1].scaled(-1.5), masses[2].scaled(1.0 / 3.0)],
                load: ops.load_end.clone(),
            })
        }
    }
}

/// Quantities recorded after every step (and at `t = 0`).
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub t: f64,
    /// `‖u‖_{L²(Ω(t))}`.
    pub l2_norm: f64,
    /// `‖u − u_exact‖_{L²(Ω(t))}` when the problem has an exact solution.
    pub l2_error: Option<f64>,
    /// Largest dof deviation from the exact solution at the physical dof
    /// positions.
    pub max_nodal_error: Option<f64>,
    /// `‖r‖_∞` of the weak SCL residual of the interval ending at `t`, with
    /// the flux the scheme actually uses.
    pub scl_residual: f64,
}

#[derive(Debug, Clone)]
pub struct RunRecord {
    pub scheme: SchemeId,
    pub strategy: VelocityStrategy,
    pub dt: f64,
    pub steps: Vec<StepRecord>,
    pub final_solution: Vec<f64>,
}

impl RunRecord {
    pub fn last(&self) -> &StepRecord {
        self.steps.last().expect("records include t = 0")
    }

    pub fn max_scl_residual(&self) -> f64 {
        self.steps.iter().fold(0.0, |m, s| m.max(s.scl_residual))
    }

    pub fn max_nodal_error(&self) -> f64 {
        self.steps.iter().filter_map(|s| s.max_nodal_error).fold(0.0, f64::max)
    }

    /// True if every norm is strictly below its predecessor.
    pub fn norm_strictly_decreasing(&self) -> bool {
        self.steps.windows(2).all(|w| w[1].l2_norm < w[0].l2_norm)
    }
}

/// Solution and operator history carried between steps. Deques hold the
/// newest entry at the front.
#[derive(Debug, Clone)]
pub struct StepperState {
    pub step: usize,
    pub time: f64,
    /// `û_n, û_{n−1}, ...`
    pub solutions: VecDeque<Vec<f64>>,
    /// `M(Ĵ_n), M(Ĵ_{n−1}), ...`
    pub masses: VecDeque<SparseMatrix>,
    /// `𝓜_{n−1,n}, 𝓜_{n−2,n−1}`.
    pub motions: VecDeque<SparseMatrix>,
    pub displacement: DisplacementField,
    /// `ŵ(t_n)` of the previous interval, for the continuous strategy.
    pub end_velocity: Option<Vec<Point>>,
    /// `A` with the geometry at `t_n`, reused as the next start stiffness.
    stiffness: Option<SparseMatrix>,
}

/// Advances one problem on one space with one scheme configuration.
pub struct Stepper {
    space: Arc<FeSpace>,
    p1: FeSpace,
    config: SchemeConfig,
    problem: Problem,
    solver: LinearSolver,
    error_rule: QuadratureRule,
    state: StepperState,
}

/// Physical position of a quadrature point under a P1 displacement.
fn physical_point(space: &FeSpace, disp: &DisplacementField, qp: &QuadPoint) -> Point {
    let tri = space.mesh().triangles()[qp.elem];
    let mut x = qp.xhat;
    for (k, &node) in tri.iter().enumerate() {
        x[0] += qp.bary[k] * disp.0[node][0];
        x[1] += qp.bary[k] * disp.0[node][1];
    }
    x
}

impl Stepper {
    /// Interpolates the initial condition and prepares `t = 0`.
    pub fn new(space: Arc<FeSpace>, problem: Problem, config: SchemeConfig) -> Result<Self> {
        config.steps()?;
        let p1 = FeSpace::new(space.mesh_arc().clone(), 1)?;
        let disp = sample_displacement(&problem.map(), space.mesh(), 0.0);
        let coords = space.deformed_dof_coords(&disp);
        let u0: Vec<f64> = coords.iter().map(|&x| problem.initial(x)).collect();
        let geom = IntervalGeometry::build(space.mesh(), &IntervalMotion::stationary(disp.clone(), config.dt)?)?;
        let mass0 = assemble_weighted_mass(&space, &geom.jacobian_start())?;
        let error_rule = QuadratureRule::for_degree(2 * space.degree() + 2);
        Ok(Self {
            solver: LinearSolver::new(config.rel_tol),
            p1,
            problem,
            error_rule,
            state: StepperState {
                step: 0,
                time: 0.0,
                solutions: VecDeque::from([u0]),
                masses: VecDeque::from([mass0]),
                motions: VecDeque::new(),
                displacement: disp,
                end_velocity: None,
                stiffness: None,
            },
            space,
            config,
        })
    }

    pub fn state(&self) -> &StepperState {
        &self.state
    }

    pub fn space(&self) -> &FeSpace {
        &self.space
    }

    pub fn time_at(&self, step: usize) -> f64 {
        step as f64 * self.config.dt
    }

    /// Diagnostics of the current state, with `scl` the residual of the
    /// interval just completed.
    pub fn record(&self, scl: f64) -> Result<StepRecord> {
        let s = &self.state;
        let u = &s.solutions[0];
        let geom = IntervalGeometry::build(
            self.space.mesh(),
            &IntervalMotion::stationary(s.displacement.clone(), self.config.dt)?,
        )?;
        let jac = geom.jacobian_start();
        let l2_norm = l2_norm_current_domain(&self.space, u, &jac);
        let (mut l2_error, mut max_nodal_error) = (None, None);
        if self.problem.exact([0.0, 0.0], s.time).is_some() {
            let exact = |qp: &QuadPoint| {
                let x = physical_point(&self.space, &s.displacement, qp);
                self.problem.exact(x, s.time).expect("checked")
            };
            l2_error = Some(l2_error_vs_exact(&self.space, u, &jac, &self.error_rule, exact));
            let coords = self.space.deformed_dof_coords(&s.displacement);
            max_nodal_error = Some(
                coords
                    .iter()
                    .zip(u)
                    .map(|(&x, ui)| (ui - self.problem.exact(x, s.time).expect("checked")).abs())
                    .fold(0.0, f64::max),
            );
        }
        Ok(StepRecord {
            step: s.step,
            t: s.time,
            l2_norm,
            l2_error,
            max_nodal_error,
            scl_residual: scl,
        })
    }

    fn load(&self, disp: &DisplacementField, t: f64, jac: &[f64]) -> Result<Vec<f64>> {
        if !self.problem.has_source() {
            return Ok(vec![0.0; self.space.n_dofs()]);
        }
        assemble_load(&self.space, self.config.dt, jac, |qp| {
            self.problem.source(physical_point(&self.space, disp, qp), t)
        })
    }

    /// Operators of the next interval, plus the SCL residual of the flux
    /// the scheme uses.
    pub fn interval_operators(&self, geom: &IntervalGeometry, u_end: &DisplacementField) -> Result<(IntervalOperators, f64)> {
        let cfg = &self.config;
        let (t0, t1) = (self.state.time, self.time_at(self.state.step + 1));
        let alpha = self.problem.alpha();
        let (jac0, jac1) = (geom.jacobian_start(), geom.jacobian_end());
        let flux = if cfg.scheme.is_classical() {
            geom.endpoint_flux()
        } else {
            geom.exact_flux()
        };
        let scl = if cfg.scheme.is_classical() {
            max_abs(&scl_residual_with_flux(&self.p1, geom, &flux))
        } else {
            max_abs(&scl_residual(&self.p1, geom))
        };
        let stiffness = assemble_pulled_back_stiffness(&self.space, alpha, cfg.dt, &geom.cofactor_end(), &jac1)?;
        let uses_cn = matches!(
            cfg.scheme.effective(self.state.step, cfg.startup),
            SchemeId::MCN | SchemeId::CCN
        );
        let (stiffness_start, load_start) = match (uses_cn, cfg.cn_geometry) {
            (false, _) => (stiffness.zeros_like(), vec![0.0; self.space.n_dofs()]),
            (true, CnGeometry::IntervalEnd) => (stiffness.clone(), self.load(&self.state.displacement, t0, &jac1)?),
            (true, CnGeometry::Endpoints) => {
                let a0 = match &self.state.stiffness {
                    Some(a) => a.clone(),
                    None => assemble_pulled_back_stiffness(&self.space, alpha, cfg.dt, &geom.cofactor_start(), &jac0)?,
                };
                (a0, self.load(&self.state.displacement, t0, &jac0)?)
            }
        };
        Ok((
            IntervalOperators {
                mass_end: assemble_weighted_mass(&self.space, &jac1)?,
                motion: assemble_mesh_motion_operator(&self.space, &flux)?,
                load_end: self.load(u_end, t1, &jac1)?,
                stiffness,
                stiffness_start,
                load_start,
            },
            scl,
        ))
    }

    /// Grid motion of the next interval under the configured strategy.
    pub fn next_motion(&self) -> Result<IntervalMotion> {
        let t1 = self.time_at(self.state.step + 1);
        let u0 = self.state.displacement.clone();
        let u1 = sample_displacement(&self.problem.map(), self.space.mesh(), t1);
        match (self.config.strategy, &self.state.end_velocity) {
            (VelocityStrategy::Continuous, Some(w)) => IntervalMotion::continuous(u0, u1, w, self.config.dt),
            _ => IntervalMotion::piecewise_constant(u0, u1, self.config.dt),
        }
    }

    /// Advances one step and returns its record.
    pub fn step(&mut self) -> Result<StepRecord> {
        let step = self.state.step;
        let t1 = self.time_at(step + 1);
        self.advance().map_err(|e| Error::AtStep {
            step: step + 1,
            t: t1,
            source: Box::new(e),
        })
    }

    fn advance(&mut self) -> Result<StepRecord> {
        let scl = self.advance_solution()?;
        self.record(scl)
    }

    fn advance_solution(&mut self) -> Result<f64> {
        let cfg = self.config.clone();
        let motion = self.next_motion()?;
        let geom = IntervalGeometry::build(self.space.mesh(), &motion)?;
        if cfg.check_tangling {
            geom.check_valid(self.state.time)?;
        }
        let (ops, scl) = self.interval_operators(&geom, &motion.u_end)?;
        let scheme = cfg.scheme.effective(self.state.step, cfg.startup);
        let masses: Vec<SparseMatrix> = self.state.masses.iter().cloned().collect();
        let motions: Vec<SparseMatrix> = self.state.motions.iter().cloned().collect();
        let system = build_system(scheme, &ops, &masses, &motions, cfg.lagged_motion)?;
        let sols: Vec<&[f64]> = self.state.solutions.iter().map(|v| v.as_slice()).collect();
        let mut rhs = system.rhs(&sols);
        let mut lhs = system.lhs;

        let t1 = self.time_at(self.state.step + 1);
        let coords = self.space.deformed_dof_coords(&motion.u_end);
        let bdofs = self.space.boundary_dofs();
        let bvals: Vec<f64> = bdofs.iter().map(|&d| self.problem.boundary(coords[d], t1)).collect();
        apply_dirichlet(&mut lhs, &mut rhs, bdofs, &bvals);
        let u = self.solver.solve(&lhs, &rhs)?;

        let depth = cfg.scheme.history_depth();
        let s = &mut self.state;
        s.solutions.push_front(u);
        s.solutions.truncate(depth);
        s.masses.push_front(ops.mass_end);
        s.masses.truncate(depth);
        s.motions.push_front(ops.motion);
        s.motions.truncate(depth.saturating_sub(1));
        s.end_velocity = Some(motion.velocity.end_velocity());
        s.displacement = motion.u_end;
        s.stiffness = Some(ops.stiffness);
        s.step += 1;
        s.time = t1;
        Ok(scl)
    }
}

/// Runs `problem` from `t = 0` to the configured final time.
pub fn run_simulation(space: Arc<FeSpace>, problem: Problem, config: SchemeConfig) -> Result<RunRecord> {
    let n = config.steps()?;
    let mut stepper = Stepper::new(space, problem, config.clone())?;
    let mut steps = Vec::with_capacity(n + 1);
    steps.push(stepper.record(0.0)?);
    for _ in 0..n {
        steps.push(stepper.step()?);
    }
    Ok(RunRecord {
        scheme: config.scheme,
        strategy: config.strategy,
        dt: config.dt,
        steps,
        final_solution: stepper.state.solutions[0].clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ale::PrescribedMap;
    use crate::mesh::build_unit_square_mesh;

    fn space(n: usize, deg: usize) -> Arc<FeSpace> {
        Arc::new(FeSpace::new(Arc::new(build_unit_square_mesh(n, n).unwrap()), deg).unwrap())
    }

    #[test]
    fn names_round_trip() {
        for id in SchemeId::ALL {
            assert_eq!(id.name().parse::<SchemeId>().unwrap(), id);
        }
        assert!("BDF4".parse::<SchemeId>().is_err());
    }

    #[test]
    fn bootstrap_schedule() {
        use SchemeId::*;
        let imp = Startup::Implicit;
        assert_eq!(MIE.effective(0, imp), MIE);
        assert_eq!(MBDF2.effective(0, imp), MIE);
        assert_eq!(MBDF2.effective(1, imp), MBDF2);
        assert_eq!(MBDF3.effective(0, imp), MIE);
        assert_eq!(MBDF3.effective(1, imp), MBDF2);
        assert_eq!(MBDF3.effective(2, imp), MBDF3);
        assert_eq!(MBDF3.effective(1, Startup::CrankNicolson), MCN);
        assert_eq!(CBDF2.effective(0, imp), CIE);
    }

    #[test]
    fn bdf_weights_decompose_into_differences() {
        // (3/2)y₂ − 2y₁ + (1/2)y₀ = (3/2)(y₂−y₁) − (1/2)(y₁−y₀)
        // (11/6)y₃ − 3y₂ + (3/2)y₁ − (1/3)y₀
        //   = (11/6)(y₃−y₂) − (7/6)(y₂−y₁) + (1/3)(y₁−y₀)
        let ys: [f64; 4] = [0.3, -1.7, 2.9, 0.41];
        let bdf2 = 1.5 * ys[2] - 2.0 * ys[1] + 0.5 * ys[0];
        assert!((bdf2 - (1.5 * (ys[2] - ys[1]) - 0.5 * (ys[1] - ys[0]))).abs() < 1e-15);
        let bdf3 = 11.0 / 6.0 * ys[3] - 3.0 * ys[2] + 1.5 * ys[1] - ys[0] / 3.0;
        let diff = 11.0 / 6.0 * (ys[3] - ys[2]) - 7.0 / 6.0 * (ys[2] - ys[1]) + (ys[1] - ys[0]) / 3.0;
        assert!((bdf3 - diff).abs() < 1e-14);
    }

    #[test]
    fn steps_require_a_multiple() {
        assert_eq!(SchemeConfig::new(SchemeId::MIE, 0.001, 0.3).steps().unwrap(), 300);
        assert_eq!(SchemeConfig::new(SchemeId::MIE, 0.05, 2.0).steps().unwrap(), 40);
        assert!(SchemeConfig::new(SchemeId::MIE, 0.07, 0.3).steps().is_err());
        assert!(SchemeConfig::new(SchemeId::MIE, 0.0, 0.3).steps().is_err());
        assert!(SchemeConfig::new(SchemeId::MIE, 0.5, 0.3).steps().is_err());
    }

    #[test]
    fn missing_history_is_reported() {
        let s = space(2, 1);
        let m = s.zero_matrix();
        let ops = IntervalOperators {
            mass_end: m.clone(),
            stiffness: m.clone(),
            stiffness_start: m.clone(),
            motion: m.clone(),
            load_end: vec![0.0; 9],
            load_start: vec![0.0; 9],
        };
        let r = build_system(SchemeId::MBDF3, &ops, &[m.clone(), m.clone()], &[m], LaggedMotion::Unknown);
        assert!(matches!(r, Err(Error::InsufficientHistory { .. })));
    }

    #[test]
    fn zero_data_stays_zero_on_fixed_grid() {
        let p = Problem::Constant {
            map: PrescribedMap::Identity,
            value: 0.0,
        };
        let r = run_simulation(space(4, 1), p, SchemeConfig::new(SchemeId::MIE, 0.1, 0.3)).unwrap();
        assert_eq!(r.steps.len(), 4);
        assert!(r.final_solution.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn constants_preserved_on_moving_grid() {
        for scheme in SchemeId::MODIFIED {
            for strategy in [VelocityStrategy::PiecewiseConstant, VelocityStrategy::Continuous] {
                let p = Problem::Constant {
                    map: PrescribedMap::MapB,
                    value: 1.0,
                };
                let cfg = SchemeConfig::new(scheme, 0.1, 1.0).with_strategy(strategy);
                let r = run_simulation(space(6, 2), p, cfg).unwrap();
                assert!(r.max_nodal_error() < 1e-12, "{scheme} {:e}", r.max_nodal_error());
                assert!(r.max_scl_residual() < 1e-13);
            }
        }
    }

    #[test]
    fn classical_scheme_drifts() {
        let p = Problem::Constant {
            map: PrescribedMap::MapB,
            value: 1.0,
        };
        let r = run_simulation(space(6, 1), p, SchemeConfig::new(SchemeId::CBDF2, 0.1, 1.0)).unwrap();
        assert!(r.max_nodal_error() > 1e-6);
        // MAP_B moves both coordinates by one scalar, so J is affine in t on
        // each interval and the endpoint flux happens to be exact.
        let r = run_simulation(space(6, 1), p, SchemeConfig::new(SchemeId::CIE, 0.1, 1.0)).unwrap();
        assert!(r.max_nodal_error() < 1e-12);
        let p = Problem::Constant {
            map: PrescribedMap::MapA,
            value: 1.0,
        };
        let r = run_simulation(space(6, 1), p, SchemeConfig::new(SchemeId::CIE, 0.1, 1.0)).unwrap();
        assert!(r.max_nodal_error() > 1e-6);
        assert!(r.max_scl_residual() > 1e-6);
    }

    #[test]
    fn implicit_euler_norm_decreases_on_oscillating_domain() {
        let cfg = SchemeConfig::new(SchemeId::MIE, 0.01, 0.4);
        let r = run_simulation(space(8, 1), Problem::Stability, cfg).unwrap();
        assert!(r.norm_strictly_decreasing());
        assert!(r.max_scl_residual() < 1e-12);
    }

    #[test]
    fn tangled_grid_aborts_with_step() {
        let p = Problem::Constant {
            map: PrescribedMap::UniformScale {
                c0: 0.0,
                c1: 1.0,
                omega: std::f64::consts::PI,
            },
            value: 1.0,
        };
        // a(t) = −cos πt collapses the square at t = 0.5
        let err = run_simulation(space(2, 1), p, SchemeConfig::new(SchemeId::MIE, 0.1, 1.0)).unwrap_err();
        assert!(matches!(err, Error::AtStep { step: 5, .. }), "{err}");
    }
}
