//! Experiment drivers. Independent runs execute in parallel; results are
//! collected in job order so output files are deterministic.

use std::fmt::Write as _;
use std::sync::Arc;

use alefem::ale::{PrescribedMap, VelocityStrategy};
use alefem::fem::FeSpace;
use alefem::mesh::build_unit_square_mesh;
use alefem::problems::Problem;
use alefem::schemes::{run_simulation, RunRecord, SchemeConfig, SchemeId};
use alefem::verify::{self, convergence_rate, RateEstimate, ReportRow};
use alefem::{Error, Result};
use rayon::prelude::*;

use crate::config::{map_label, ExperimentConfig};
use crate::svg::{Axes, CsvPlot};

/// Floating-point format used in every CSV (17 significant digits).
pub fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

fn space(cfg: &ExperimentConfig) -> Result<Arc<FeSpace>> {
    let mesh = Arc::new(build_unit_square_mesh(cfg.nx, cfg.ny)?);
    Ok(Arc::new(FeSpace::new(mesh, cfg.degree)?))
}

fn scheme_config(cfg: &ExperimentConfig, scheme: SchemeId, dt: f64, final_time: f64, strategy: VelocityStrategy) -> SchemeConfig {
    let mut c = SchemeConfig::new(scheme, dt, final_time).with_strategy(strategy);
    c.startup = cfg.startup;
    c.cn_geometry = cfg.cn_geometry;
    c.lagged_motion = cfg.lagged_motion;
    c
}

/// A named CSV file with an optional plot description.
#[derive(Debug, Clone)]
pub struct Output {
    pub file: String,
    pub csv: String,
    pub plot: Option<CsvPlot>,
}

/// One run of the stability study; failures are kept as messages.
#[derive(Debug, Clone)]
pub struct StabilitySeries {
    pub scheme: SchemeId,
    pub strategy: VelocityStrategy,
    pub dt: f64,
    pub run: std::result::Result<RunRecord, String>,
}

pub fn run_stability(cfg: &ExperimentConfig) -> Result<Vec<StabilitySeries>> {
    cfg.validate()?;
    let space = space(cfg)?;
    let problem = Problem::Stability;
    let t_end = cfg.final_time.unwrap_or(problem.final_time());
    let mut jobs = Vec::new();
    for &scheme in &cfg.schemes {
        for &strategy in &cfg.strategies {
            for &dt in &cfg.dts {
                jobs.push((scheme, strategy, dt));
            }
        }
    }
    Ok(jobs
        .into_par_iter()
        .map(|(scheme, strategy, dt)| StabilitySeries {
            scheme,
            strategy,
            dt,
            run: run_simulation(space.clone(), problem, scheme_config(cfg, scheme, dt, t_end, strategy))
                .map_err(|e| e.to_string()),
        })
        .collect())
}

pub fn stability_output(series: &[StabilitySeries]) -> Output {
    let mut csv = String::from("scheme,strategy,dt,t,l2_norm,scl_residual\n");
    for s in series {
        match &s.run {
            Ok(run) => {
                for r in &run.steps {
                    let _ = writeln!(
                        csv,
                        "{},{},{},{},{},{}",
                        s.scheme,
                        s.strategy.tag(),
                        fmt(s.dt),
                        fmt(r.t),
                        fmt(r.l2_norm),
                        fmt(r.scl_residual)
                    );
                }
            }
            Err(msg) => eprintln!("stability {} {} dt={}: {msg}", s.scheme, s.strategy.tag(), s.dt),
        }
    }
    Output {
        file: "stability.csv".into(),
        csv,
        plot: Some(CsvPlot {
            x: "t".into(),
            y: "l2_norm".into(),
            group_by: vec!["scheme".into(), "strategy".into(), "dt".into()],
            axes: Axes {
                title: "L2 norm on the moving domain".into(),
                x_label: "t".into(),
                y_label: "||u||".into(),
                ..Axes::default()
            },
        }),
    }
}

#[derive(Debug, Clone)]
pub struct ConvergencePoint {
    pub scheme: SchemeId,
    pub strategy: VelocityStrategy,
    pub dt: f64,
    pub error: f64,
    pub max_scl_residual: f64,
}

#[derive(Debug, Clone)]
pub struct ConvergenceResult {
    pub points: Vec<ConvergencePoint>,
    pub rates: Vec<(SchemeId, VelocityStrategy, RateEstimate)>,
}

impl ConvergenceResult {
    pub fn slope(&self, scheme: SchemeId, strategy: VelocityStrategy) -> Option<f64> {
        self.rates
            .iter()
            .find(|(s, v, _)| *s == scheme && *v == strategy)
            .map(|(_, _, r)| r.slope)
    }
}

pub fn run_convergence(cfg: &ExperimentConfig) -> Result<ConvergenceResult> {
    cfg.validate()?;
    let space = space(cfg)?;
    let problem = Problem::Convergence;
    let t_end = cfg.final_time.unwrap_or(problem.final_time());
    let mut jobs = Vec::new();
    for &scheme in &cfg.schemes {
        for &strategy in &cfg.strategies {
            for &dt in &cfg.dts {
                jobs.push((scheme, strategy, dt));
            }
        }
    }
    let points: Vec<ConvergencePoint> = jobs
        .into_par_iter()
        .map(|(scheme, strategy, dt)| {
            let run = run_simulation(space.clone(), problem, scheme_config(cfg, scheme, dt, t_end, strategy))?;
            Ok(ConvergencePoint {
                scheme,
                strategy,
                dt,
                error: run.last().l2_error.expect("exact solution known"),
                max_scl_residual: run.max_scl_residual(),
            })
        })
        .collect::<Result<_>>()?;
    let mut rates = Vec::new();
    for &scheme in &cfg.schemes {
        for &strategy in &cfg.strategies {
            let (errs, dts): (Vec<f64>, Vec<f64>) = points
                .iter()
                .filter(|p| p.scheme == scheme && p.strategy == strategy)
                .map(|p| (p.error, p.dt))
                .unzip();
            if errs.len() >= 3 {
                rates.push((scheme, strategy, convergence_rate(&errs, &dts)?));
            }
        }
    }
    Ok(ConvergenceResult { points, rates })
}

pub fn convergence_outputs(res: &ConvergenceResult, t_end: f64) -> Vec<Output> {
    let mut csv = String::from("scheme,strategy,dt,error,scl_residual\n");
    for p in &res.points {
        let _ = writeln!(
            csv,
            "{},{},{},{},{}",
            p.scheme,
            p.strategy.tag(),
            fmt(p.dt),
            fmt(p.error),
            fmt(p.max_scl_residual)
        );
    }
    let mut rates = String::from("scheme,strategy,slope,intercept\n");
    for (s, v, r) in &res.rates {
        let _ = writeln!(rates, "{s},{},{},{}", v.tag(), fmt(r.slope), fmt(r.intercept));
    }
    vec![
        Output {
            file: "convergence.csv".into(),
            csv,
            plot: Some(CsvPlot {
                x: "dt".into(),
                y: "error".into(),
                group_by: vec!["scheme".into(), "strategy".into()],
                axes: Axes {
                    title: format!("L2 error at t = {t_end}"),
                    x_label: "dt".into(),
                    y_label: "error".into(),
                    log_x: true,
                    log_y: true,
                    annotate_slopes: true,
                },
            }),
        },
        Output {
            file: "convergence_rates.csv".into(),
            csv: rates,
            plot: None,
        },
    ]
}

/// Grid treatment in the accuracy study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Variant {
    /// Identity map.
    Fixed,
    /// Moving grid, modified scheme, piecewise-constant velocity.
    ModifiedDc,
    /// Moving grid, modified scheme, continuous velocity.
    ModifiedC,
    /// Moving grid, classical endpoint-flux scheme.
    Classical,
}

impl Variant {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Fixed => "fixed",
            Self::ModifiedDc => "mov-nSCL(dc)",
            Self::ModifiedC => "mov-nSCL(c)",
            Self::Classical => "mov-wSCL",
        }
    }
}

pub fn classical_counterpart(scheme: SchemeId) -> Option<SchemeId> {
    match scheme {
        SchemeId::MIE => Some(SchemeId::CIE),
        SchemeId::MCN => Some(SchemeId::CCN),
        SchemeId::MBDF2 => Some(SchemeId::CBDF2),
        _ => None,
    }
}

#[derive(Debug, Clone)]
pub struct AccuracySeries {
    pub map: PrescribedMap,
    /// Modified scheme whose family the run belongs to.
    pub family: SchemeId,
    pub variant: Variant,
    pub run: RunRecord,
}

impl AccuracySeries {
    pub fn errors(&self) -> Vec<f64> {
        self.run.steps.iter().map(|s| s.l2_error.expect("exact solution known")).collect()
    }
}

/// Largest `|e(t) − e_ref(t)| / e_ref(t)` over `t > 0`.
pub fn max_relative_deviation(series: &[f64], reference: &[f64]) -> f64 {
    series
        .iter()
        .zip(reference)
        .skip(1)
        .map(|(e, r)| (e - r).abs() / r.abs())
        .fold(0.0, f64::max)
}

pub fn run_accuracy(cfg: &ExperimentConfig) -> Result<Vec<AccuracySeries>> {
    cfg.validate()?;
    let space = space(cfg)?;
    let dt = cfg.dts[0];
    let mut jobs = Vec::new();
    for &family in &cfg.schemes {
        if family.is_classical() {
            return Err(Error::Config(format!("accuracy families are modified schemes, got {family}")));
        }
        jobs.push((PrescribedMap::Identity, family, Variant::Fixed));
        for &map in &cfg.maps {
            jobs.push((map, family, Variant::ModifiedDc));
            jobs.push((map, family, Variant::ModifiedC));
            if classical_counterpart(family).is_some() {
                jobs.push((map, family, Variant::Classical));
            }
        }
    }
    jobs.into_par_iter()
        .map(|(map, family, variant)| {
            let problem = Problem::Accuracy { map };
            let t_end = cfg.final_time.unwrap_or(problem.final_time());
            let (scheme, strategy) = match variant {
                Variant::Fixed | Variant::ModifiedDc => (family, VelocityStrategy::PiecewiseConstant),
                Variant::ModifiedC => (family, VelocityStrategy::Continuous),
                Variant::Classical => (
                    classical_counterpart(family).expect("filtered"),
                    VelocityStrategy::PiecewiseConstant,
                ),
            };
            let run = run_simulation(space.clone(), problem, scheme_config(cfg, scheme, dt, t_end, strategy))?;
            Ok(AccuracySeries {
                map,
                family,
                variant,
                run,
            })
        })
        .collect()
}

pub fn accuracy_output(series: &[AccuracySeries]) -> Output {
    let mut csv = String::from("map,family,scheme,variant,t,l2_error,scl_residual\n");
    for s in series {
        for r in &s.run.steps {
            let _ = writeln!(
                csv,
                "{},{},{},{},{},{},{}",
                map_label(&s.map),
                s.family,
                s.run.scheme,
                s.variant.name(),
                fmt(r.t),
                fmt(r.l2_error.unwrap_or(f64::NAN)),
                fmt(r.scl_residual)
            );
        }
    }
    Output {
        file: "accuracy.csv".into(),
        csv,
        plot: Some(CsvPlot {
            x: "t".into(),
            y: "l2_error".into(),
            group_by: vec!["map".into(), "scheme".into(), "variant".into()],
            axes: Axes {
                title: "L2 error, fixed versus moving grids".into(),
                x_label: "t".into(),
                y_label: "error".into(),
                ..Axes::default()
            },
        }),
    }
}

/// SCL identity sweep over mesh sizes, maps, strategies and time steps.
pub fn run_scl_check(cfg: &ExperimentConfig) -> Result<Vec<ReportRow>> {
    cfg.validate()?;
    let mut cases = Vec::new();
    for &map in &cfg.maps {
        let t_end = cfg.final_time.unwrap_or(match map {
            m if m == PrescribedMap::stability() => 0.4,
            m if m == PrescribedMap::convergence() => 0.3,
            _ => 2.0,
        });
        cases.extend(verify::scl_cases(&cfg.scl_sizes, &[map], &cfg.strategies, &cfg.dts, t_end));
    }
    let rows: Vec<Vec<ReportRow>> = cases
        .par_iter()
        .map(|c| {
            let mut rows = verify::scl_identity_suite(std::slice::from_ref(c))?;
            rows[0].case = format!("{}x{}/{}/{}/dt={}", c.n, c.n, map_label(&c.map), c.strategy.tag(), c.dt);
            Ok(rows)
        })
        .collect::<Result<_>>()?;
    Ok(rows.into_iter().flatten().collect())
}

/// `count` (map, t) pairs spread over the benchmark maps and `[0, 2]`.
pub fn oracle_samples(count: usize) -> Vec<(PrescribedMap, f64)> {
    let maps = [
        PrescribedMap::stability(),
        PrescribedMap::convergence(),
        PrescribedMap::MapA,
        PrescribedMap::MapB,
        PrescribedMap::Identity,
    ];
    (0..count)
        .map(|k| (maps[k % maps.len()], 0.037 * k as f64 + 0.011))
        .collect()
}

/// All verification suites on the configured mesh.
pub fn run_verify(cfg: &ExperimentConfig) -> Result<Vec<ReportRow>> {
    cfg.validate()?;
    let space = space(cfg)?;
    let mut rows = Vec::new();
    let t_end = cfg.final_time.unwrap_or(2.0);
    for row in verify::constant_preservation_suite(space.clone(), &cfg.maps, &cfg.schemes, &cfg.strategies, cfg.dts[0], t_end)? {
        rows.push(row);
    }
    for (map, t) in oracle_samples(50) {
        let d = verify::change_of_variables_oracle(&space, map, t)?;
        rows.push(ReportRow {
            suite: "change-of-variables".into(),
            case: format!("{}/t={t:.3}", map_label(&map)),
            metric: "max_entry_diff".into(),
            value: d,
            pass: d <= verify::IDENTITY_TOL,
        });
    }
    for scheme in SchemeId::MODIFIED {
        let d = verify::fixed_grid_reduction(&space, scheme, cfg.dts[0], 0.1)?;
        rows.push(ReportRow {
            suite: "fixed-grid-reduction".into(),
            case: scheme.to_string(),
            metric: "max_entry_diff".into(),
            value: d,
            pass: d <= 1e-13,
        });
    }
    let fuzz = verify::cofactor_fuzz(1000, 2024);
    rows.push(ReportRow {
        suite: "cofactor-fuzz".into(),
        case: "1000 matrices".into(),
        metric: "max_entry_err".into(),
        value: fuzz,
        pass: fuzz <= verify::IDENTITY_TOL,
    });
    for problem in [Problem::Convergence, Problem::Accuracy { map: PrescribedMap::Identity }] {
        let d = verify::source_fd_discrepancy(&problem, 100, 99)?;
        rows.push(ReportRow {
            suite: "manufactured-source".into(),
            case: problem.name().into(),
            metric: "max_fd_gap".into(),
            value: d,
            pass: d <= 1e-6,
        });
    }
    Ok(rows)
}

pub fn report_output(file: &str, rows: &[ReportRow]) -> Output {
    Output {
        file: file.into(),
        csv: verify::report_csv(rows),
        plot: None,
    }
}

/// Runs the configured experiment and returns its files.
pub fn run(cfg: &ExperimentConfig) -> Result<Vec<Output>> {
    use crate::config::Experiment::*;
    Ok(match cfg.experiment {
        Stability => vec![stability_output(&run_stability(cfg)?)],
        Convergence => convergence_outputs(
            &run_convergence(cfg)?,
            cfg.final_time.unwrap_or(Problem::Convergence.final_time()),
        ),
        Accuracy => vec![accuracy_output(&run_accuracy(cfg)?)],
        SclCheck => vec![report_output("scl_check.csv", &run_scl_check(cfg)?)],
        Verify => vec![report_output("verify.csv", &run_verify(cfg)?)],
    })
}
