//! Executable checks: SCL identity over trajectories, constant
//! preservation, pullback versus direct assembly, fixed-grid reduction,
//! cofactor algebra fuzzing, and log–log rate fitting.

use std::fmt::Write as _;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ale::{
    cofactor2d, jacobian, max_abs, mat_mul, sample_displacement, scl_residual, scl_residual_with_flux,
    IntervalGeometry, IntervalMotion, Mat2, PrescribedMap, VelocityStrategy,
};
use crate::fem::{
    assemble_mass_on_coords, assemble_pulled_back_stiffness, assemble_stiffness_on_coords, assemble_weighted_mass,
    FeSpace, SparseMatrix,
};
use crate::mesh::{build_unit_square_mesh, Mesh};
use crate::problems::Problem;
use crate::schemes::{build_system, run_simulation, IntervalOperators, LaggedMotion, SchemeConfig, SchemeId};
use crate::{Error, Point, Result};

/// Threshold for algebraic and SCL identities.
pub const IDENTITY_TOL: f64 = 1e-12;
/// Threshold for end-to-end constant preservation.
pub const PRESERVATION_TOL: f64 = 1e-10;

/// Least-squares line through `(log Δt, log error)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateEstimate {
    pub slope: f64,
    pub intercept: f64,
    pub points: Vec<(f64, f64)>,
}

pub fn convergence_rate(errors: &[f64], dts: &[f64]) -> Result<RateEstimate> {
    if errors.len() != dts.len() || errors.len() < 3 {
        return Err(Error::InvalidRateData(format!(
            "{} errors for {} time steps",
            errors.len(),
            dts.len()
        )));
    }
    if errors.iter().chain(dts).any(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::InvalidRateData("nonpositive or non-finite entry".into()));
    }
    let xs: Vec<f64> = dts.iter().map(|d| d.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidRateData("all time steps equal".into()));
    }
    let slope = sxy / sxx;
    Ok(RateEstimate {
        slope,
        intercept: my - slope * mx,
        points: dts.iter().copied().zip(errors.iter().copied()).collect(),
    })
}

/// One line of a verification report.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub suite: String,
    pub case: String,
    pub metric: String,
    pub value: f64,
    pub pass: bool,
}

pub fn report_csv(rows: &[ReportRow]) -> String {
    let mut out = String::from("suite,case,metric,value,pass\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{},{:.16e},{}", r.suite, r.case, r.metric, r.value, r.pass);
    }
    out
}

/// Largest per-interval SCL residual along a sampled trajectory of `map`.
/// With `endpoint_flux` the classical approximation replaces the exact
/// flux integral.
pub fn trajectory_scl_residual(
    mesh: &Arc<Mesh>,
    map: PrescribedMap,
    strategy: VelocityStrategy,
    dt: f64,
    final_time: f64,
    endpoint_flux: bool,
) -> Result<f64> {
    let space = FeSpace::new(mesh.clone(), 1)?;
    let steps = SchemeConfig::new(SchemeId::MIE, dt, final_time).steps()?;
    let mut u0 = sample_displacement(&map, mesh, 0.0);
    let mut w_end: Option<Vec<Point>> = None;
    let mut worst: f64 = 0.0;
    for n in 0..steps {
        let u1 = sample_displacement(&map, mesh, (n + 1) as f64 * dt);
        let motion = match (strategy, &w_end) {
            (VelocityStrategy::Continuous, Some(w)) => IntervalMotion::continuous(u0, u1.clone(), w, dt)?,
            _ => IntervalMotion::piecewise_constant(u0, u1.clone(), dt)?,
        };
        let geom = IntervalGeometry::build(mesh, &motion)?;
        let r = if endpoint_flux {
            scl_residual_with_flux(&space, &geom, &geom.endpoint_flux())
        } else {
            scl_residual(&space, &geom)
        };
        worst = worst.max(max_abs(&r));
        w_end = Some(motion.velocity.end_velocity());
        u0 = u1;
    }
    Ok(worst)
}

/// One trajectory of the SCL identity suite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SclCase {
    pub n: usize,
    pub map: PrescribedMap,
    pub strategy: VelocityStrategy,
    pub dt: f64,
    pub final_time: f64,
}

impl SclCase {
    pub fn label(&self) -> String {
        format!("{}x{}/{}/{}/dt={}", self.n, self.n, self.map.name(), self.strategy.tag(), self.dt)
    }
}

/// Cross product of mesh sizes, maps, strategies and time steps.
pub fn scl_cases(
    sizes: &[usize],
    maps: &[PrescribedMap],
    strategies: &[VelocityStrategy],
    dts: &[f64],
    final_time: f64,
) -> Vec<SclCase> {
    let mut out = Vec::new();
    for &n in sizes {
        for &map in maps {
            for &strategy in strategies {
                for &dt in dts {
                    out.push(SclCase {
                        n,
                        map,
                        strategy,
                        dt,
                        final_time,
                    });
                }
            }
        }
    }
    out
}

pub fn scl_identity_suite(cases: &[SclCase]) -> Result<Vec<ReportRow>> {
    let mut rows = Vec::with_capacity(cases.len());
    for c in cases {
        let mesh = Arc::new(build_unit_square_mesh(c.n, c.n)?);
        let r = trajectory_scl_residual(&mesh, c.map, c.strategy, c.dt, c.final_time, false)?;
        rows.push(ReportRow {
            suite: "scl-identity".into(),
            case: c.label(),
            metric: "max_residual".into(),
            value: r,
            pass: r <= IDENTITY_TOL,
        });
    }
    Ok(rows)
}

/// Max `|û − value|` over dofs and time for `α = 0`, `f = 0`, `u_D = value`.
pub fn constant_drift(space: Arc<FeSpace>, map: PrescribedMap, config: SchemeConfig) -> Result<f64> {
    let problem = Problem::Constant { map, value: 1.0 };
    Ok(run_simulation(space, problem, config)?.max_nodal_error())
}

/// Drift of every scheme on every map. Rows pass at [`PRESERVATION_TOL`],
/// or with a drift of at least `1e-6` where [`classical_should_drift`].
pub fn constant_preservation_suite(
    space: Arc<FeSpace>,
    maps: &[PrescribedMap],
    schemes: &[SchemeId],
    strategies: &[VelocityStrategy],
    dt: f64,
    final_time: f64,
) -> Result<Vec<ReportRow>> {
    let mut rows = Vec::new();
    for &map in maps {
        for &scheme in schemes {
            for &strategy in strategies {
                let cfg = SchemeConfig::new(scheme, dt, final_time).with_strategy(strategy);
                let drift = constant_drift(space.clone(), map, cfg)?;
                let pass = if classical_should_drift(&space, map, scheme, strategy, dt, final_time)? {
                    drift >= 1e-6
                } else {
                    drift <= PRESERVATION_TOL
                };
                rows.push(ReportRow {
                    suite: "constant-preservation".into(),
                    case: format!("{}/{}/{}", map.name(), scheme, strategy.tag()),
                    metric: "max_drift".into(),
                    value: drift,
                    pass,
                });
            }
        }
    }
    Ok(rows)
}

/// Whether a classical comparator is expected to lose constants: cBDF2 on
/// any moving grid, cIE and cCN only where the endpoint flux breaks the
/// discrete SCL.
pub fn classical_should_drift(
    space: &FeSpace,
    map: PrescribedMap,
    scheme: SchemeId,
    strategy: VelocityStrategy,
    dt: f64,
    final_time: f64,
) -> Result<bool> {
    if !scheme.is_classical() || map == PrescribedMap::Identity {
        return Ok(false);
    }
    if scheme == SchemeId::CBDF2 {
        return Ok(true);
    }
    let r = trajectory_scl_residual(space.mesh_arc(), map, strategy, dt, final_time, true)?;
    Ok(r > IDENTITY_TOL)
}

/// Largest entrywise difference between pullback and direct assembly of
/// the mass and stiffness matrices at time `t`.
pub fn change_of_variables_oracle(space: &FeSpace, map: PrescribedMap, t: f64) -> Result<f64> {
    let mesh = space.mesh();
    let u = sample_displacement(&map, mesh, t);
    let geom = IntervalGeometry::build(mesh, &IntervalMotion::stationary(u.clone(), 1.0)?)?;
    geom.check_valid(t)?;
    let coords = u.deformed_nodes(mesh);
    let m = assemble_weighted_mass(space, &geom.jacobian_end())?;
    let md = assemble_mass_on_coords(space, &coords)?;
    let a = assemble_pulled_back_stiffness(space, 1.0, 1.0, &geom.cofactor_end(), &geom.jacobian_end())?;
    let ad = assemble_stiffness_on_coords(space, 1.0, 1.0, &coords)?;
    Ok(m.max_abs_diff(&md).max(a.max_abs_diff(&ad)))
}

/// Textbook fixed-domain system matrices `(lhs, history)` for a modified
/// scheme's classical counterpart.
pub fn textbook_system(scheme: SchemeId, mass: &SparseMatrix, stiffness: &SparseMatrix) -> (SparseMatrix, Vec<SparseMatrix>) {
    let lc = SparseMatrix::linear_combination;
    match scheme {
        SchemeId::MIE | SchemeId::CIE => (lc(&[(1.0, mass), (1.0, stiffness)]), vec![mass.clone()]),
        SchemeId::MCN | SchemeId::CCN => (
            lc(&[(1.0, mass), (0.5, stiffness)]),
            vec![lc(&[(1.0, mass), (-0.5, stiffness)])],
        ),
        SchemeId::MBDF2 | SchemeId::CBDF2 => (
            lc(&[(1.5, mass), (1.0, stiffness)]),
            vec![mass.scaled(2.0), mass.scaled(-0.5)],
        ),
        SchemeId::MBDF3 => (
            lc(&[(11.0 / 6.0, mass), (1.0, stiffness)]),
            vec![mass.scaled(3.0), mass.scaled(-1.5), mass.scaled(1.0 / 3.0)],
        ),
    }
}

/// Largest entrywise difference between a scheme's system on the identity
/// map and the textbook fixed-domain system with mass `M` and stiffness
/// `Δt α K` assembled directly.
pub fn fixed_grid_reduction(space: &FeSpace, scheme: SchemeId, dt: f64, alpha: f64) -> Result<f64> {
    let mesh = space.mesh();
    let motion = IntervalMotion::piecewise_constant(
        sample_displacement(&PrescribedMap::Identity, mesh, 0.0),
        sample_displacement(&PrescribedMap::Identity, mesh, dt),
        dt,
    )?;
    let geom = IntervalGeometry::build(mesh, &motion)?;
    let mass = assemble_weighted_mass(space, &geom.jacobian_end())?;
    let stiffness = assemble_pulled_back_stiffness(space, alpha, dt, &geom.cofactor_end(), &geom.jacobian_end())?;
    let stiffness_start =
        assemble_pulled_back_stiffness(space, alpha, dt, &geom.cofactor_start(), &geom.jacobian_start())?;
    let flux = if scheme.is_classical() {
        geom.endpoint_flux()
    } else {
        geom.exact_flux()
    };
    let motion_op = crate::fem::assemble_mesh_motion_operator(space, &flux)?;
    let ops = IntervalOperators {
        mass_end: mass.clone(),
        stiffness,
        stiffness_start,
        motion: motion_op.clone(),
        load_end: vec![0.0; space.n_dofs()],
        load_start: vec![0.0; space.n_dofs()],
    };
    let masses = vec![mass; 3];
    let motions = vec![motion_op; 2];
    let sys = build_system(scheme, &ops, &masses, &motions, LaggedMotion::Unknown)?;

    let m_ref = assemble_mass_on_coords(space, mesh.nodes())?;
    let k_ref = assemble_stiffness_on_coords(space, alpha, dt, mesh.nodes())?;
    let (lhs, history) = textbook_system(scheme, &m_ref, &k_ref);
    let mut worst = sys.lhs.max_abs_diff(&lhs);
    for (a, b) in sys.history.iter().zip(&history) {
        worst = worst.max(a.max_abs_diff(b));
    }
    if sys.history.len() != history.len() {
        return Err(Error::Config(format!("{scheme}: history length mismatch")));
    }
    Ok(worst)
}

/// Largest entry of `G·cof(G) − det(G)·I` over `count` seeded random
/// matrices with determinant in `[0.1, 10]`.
pub fn cofactor_fuzz(count: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    let mut produced = 0;
    while produced < count {
        let g: Mat2 = [
            [rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0)],
            [rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0)],
        ];
        let d = jacobian(&g);
        if !(0.1..=10.0).contains(&d) {
            continue;
        }
        let p = mat_mul(&g, &cofactor2d(&g));
        worst = worst
            .max((p[0][0] - d).abs())
            .max((p[1][1] - d).abs())
            .max(p[0][1].abs())
            .max(p[1][0].abs());
        produced += 1;
    }
    worst
}

fn central_d1(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (-f(x + 2.0 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2.0 * h)) / (12.0 * h)
}

fn central_d2(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (-f(x + 2.0 * h) + 16.0 * f(x + h) - 30.0 * f(x) + 16.0 * f(x - h) - f(x - 2.0 * h)) / (12.0 * h * h)
}

/// Largest gap between a problem's source and `∂_t u − α Δu` of its exact
/// solution by fourth-order central differences, at `samples` seeded
/// random space–time points of the moving domain.
pub fn source_fd_discrepancy(problem: &Problem, samples: usize, seed: u64) -> Result<f64> {
    let exact = |x: crate::Point, t: f64| problem.exact(x, t);
    if exact([0.5, 0.5], 0.0).is_none() {
        return Err(Error::Config(format!("{} has no exact solution", problem.name())));
    }
    let u = |x: crate::Point, t: f64| exact(x, t).expect("checked");
    let (map, alpha) = (problem.map(), problem.alpha());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let t = rng.gen_range(0.01..problem.final_time());
        let x = map.position([rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)], t);
        let dt = central_d1(|s| u(x, s), t, 1e-4);
        let lap = central_d2(|s| u([s, x[1]], t), x[0], 1e-3) + central_d2(|s| u([x[0], s], t), x[1], 1e-3);
        worst = worst.max((dt - alpha * lap - problem.source(x, t)).abs());
    }
    Ok(worst)
}
