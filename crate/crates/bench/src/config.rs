//! Experiment configuration: a flat `key = value` file plus command-line
//! overrides.

use std::path::PathBuf;
use std::str::FromStr;

use alefem::ale::{PrescribedMap, VelocityStrategy};
use alefem::schemes::{CnGeometry, LaggedMotion, SchemeId, Startup};
use alefem::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Stability,
    Convergence,
    Accuracy,
    SclCheck,
    Verify,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Stability => "stability",
            Self::Convergence => "convergence",
            Self::Accuracy => "accuracy",
            Self::SclCheck => "scl-check",
            Self::Verify => "verify",
        }
    }
}

impl FromStr for Experiment {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "stability" => Ok(Self::Stability),
            "convergence" => Ok(Self::Convergence),
            "accuracy" => Ok(Self::Accuracy),
            "scl-check" | "scl" => Ok(Self::SclCheck),
            "verify" => Ok(Self::Verify),
            other => Err(Error::Config(format!("unknown experiment '{other}'"))),
        }
    }
}

/// Benchmark map names: `stability` (`a = 2 − cos 20πt`), `convergence`
/// (`a = 2 − cos 10πt`), `A`, `B`, `identity`.
pub fn parse_map(s: &str) -> Result<PrescribedMap> {
    match s.trim() {
        "stability" => Ok(PrescribedMap::stability()),
        "convergence" => Ok(PrescribedMap::convergence()),
        "A" | "a" => Ok(PrescribedMap::MapA),
        "B" | "b" => Ok(PrescribedMap::MapB),
        "identity" => Ok(PrescribedMap::Identity),
        other => Err(Error::Config(format!("unknown map '{other}'"))),
    }
}

pub fn map_label(map: &PrescribedMap) -> &'static str {
    match *map {
        PrescribedMap::Identity => "identity",
        PrescribedMap::MapA => "A",
        PrescribedMap::MapB => "B",
        m if m == PrescribedMap::stability() => "stability",
        m if m == PrescribedMap::convergence() => "convergence",
        _ => "uniform-scale",
    }
}

pub fn parse_strategy(s: &str) -> Result<VelocityStrategy> {
    VelocityStrategy::from_tag(s.trim()).ok_or_else(|| Error::Config(format!("unknown velocity strategy '{s}'")))
}

fn parse_list<T>(s: &str, item: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    let v: Vec<T> = s.split(',').filter(|x| !x.trim().is_empty()).map(item).collect::<Result<_>>()?;
    if v.is_empty() {
        return Err(Error::Config(format!("empty list '{s}'")));
    }
    Ok(v)
}

fn parse_num<T: FromStr>(key: &str, s: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| Error::Config(format!("invalid value '{s}' for {key}")))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub nx: usize,
    pub ny: usize,
    pub degree: usize,
    pub schemes: Vec<SchemeId>,
    pub dts: Vec<f64>,
    pub strategies: Vec<VelocityStrategy>,
    pub maps: Vec<PrescribedMap>,
    pub final_time: Option<f64>,
    pub out: PathBuf,
    pub svg: bool,
    pub startup: Startup,
    pub cn_geometry: CnGeometry,
    pub lagged_motion: LaggedMotion,
    /// Mesh sizes of the SCL identity sweep.
    pub scl_sizes: Vec<usize>,
}

impl ExperimentConfig {
    /// Defaults reproducing each benchmark.
    pub fn defaults(experiment: Experiment) -> Self {
        use SchemeId::*;
        let both = vec![VelocityStrategy::PiecewiseConstant, VelocityStrategy::Continuous];
        let mut c = Self {
            experiment,
            nx: 40,
            ny: 40,
            degree: 1,
            schemes: vec![MIE, MCN, MBDF2, MBDF3],
            dts: vec![0.01, 0.005, 0.001, 0.0005, 0.00025],
            strategies: both,
            maps: vec![PrescribedMap::stability()],
            final_time: None,
            out: PathBuf::from("results"),
            svg: true,
            startup: Startup::default(),
            cn_geometry: CnGeometry::default(),
            lagged_motion: LaggedMotion::default(),
            scl_sizes: vec![20, 40],
        };
        match experiment {
            Experiment::Stability => {}
            Experiment::Convergence => {
                c.degree = 2;
                c.dts = vec![0.05, 0.01, 0.005, 0.001];
                c.maps = vec![PrescribedMap::convergence()];
            }
            Experiment::Accuracy => {
                c.schemes = vec![MIE, MCN, MBDF2];
                c.dts = vec![0.05];
                c.maps = vec![PrescribedMap::MapA, PrescribedMap::MapB];
            }
            Experiment::SclCheck => {
                c.dts = vec![0.05, 0.01, 0.001];
                c.maps = vec![PrescribedMap::stability(), PrescribedMap::MapA, PrescribedMap::MapB];
            }
            Experiment::Verify => {
                c.nx = 20;
                c.ny = 20;
                c.schemes = vec![MIE, MCN, MBDF2, MBDF3, CIE, CCN, CBDF2];
                c.dts = vec![0.05];
                c.maps = vec![PrescribedMap::MapA, PrescribedMap::MapB];
            }
        }
        c
    }

    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key.trim() {
            "experiment" => self.experiment = value.parse()?,
            "nx" => self.nx = parse_num(key, value)?,
            "ny" => self.ny = parse_num(key, value)?,
            "degree" => self.degree = parse_num(key, value)?,
            "scheme" | "schemes" => self.schemes = parse_list(value, |s| s.parse())?,
            "dt" | "dts" => self.dts = parse_list(value, |s| parse_num("dt", s))?,
            "strategy" | "strategies" => self.strategies = parse_list(value, parse_strategy)?,
            "map" | "maps" => self.maps = parse_list(value, parse_map)?,
            "final_time" => self.final_time = Some(parse_num(key, value)?),
            "out" => self.out = PathBuf::from(value.trim()),
            "svg" => self.svg = parse_num(key, value)?,
            "scl_sizes" => self.scl_sizes = parse_list(value, |s| parse_num("scl_sizes", s))?,
            "startup" => {
                self.startup = match value.trim() {
                    "implicit" => Startup::Implicit,
                    "cn" => Startup::CrankNicolson,
                    v => return Err(Error::Config(format!("unknown startup '{v}'"))),
                }
            }
            "cn_geometry" => {
                self.cn_geometry = match value.trim() {
                    "interval-end" => CnGeometry::IntervalEnd,
                    "endpoints" => CnGeometry::Endpoints,
                    v => return Err(Error::Config(format!("unknown cn_geometry '{v}'"))),
                }
            }
            "lagged_motion" => {
                self.lagged_motion = match value.trim() {
                    "unknown" => LaggedMotion::Unknown,
                    "previous" => LaggedMotion::Previous,
                    v => return Err(Error::Config(format!("unknown lagged_motion '{v}'"))),
                }
            }
            other => return Err(Error::Config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    /// Parses a config file. The `experiment` key, if present, resets the
    /// defaults, so it should come first.
    pub fn from_text(text: &str, fallback: Experiment) -> Result<Self> {
        let mut cfg = Self::defaults(fallback);
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
            if k.trim() == "experiment" {
                let e: Experiment = v.parse()?;
                if e != cfg.experiment {
                    cfg = Self::defaults(e);
                }
                continue;
            }
            cfg.set(k, v)?;
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx == 0 || self.ny == 0 {
            return Err(Error::InvalidMeshSize { nx: self.nx, ny: self.ny });
        }
        if !(1..=2).contains(&self.degree) {
            return Err(Error::UnsupportedDegree(self.degree));
        }
        if self.schemes.is_empty() || self.dts.is_empty() || self.strategies.is_empty() || self.maps.is_empty() {
            return Err(Error::Config("scheme, dt, strategy and map lists must be nonempty".into()));
        }
        if let Some(&dt) = self.dts.iter().find(|&&d| !(d > 0.0)) {
            return Err(Error::NonPositiveTimeStep(dt));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_with_overrides() {
        let text = "experiment = convergence\n# comment\nnx = 10\nscheme = mIE, mCN\ndt = 0.1,0.05,0.02\nstrategy = c\n";
        let c = ExperimentConfig::from_text(text, Experiment::Stability).unwrap();
        assert_eq!(c.experiment, Experiment::Convergence);
        assert_eq!((c.nx, c.ny, c.degree), (10, 40, 2));
        assert_eq!(c.schemes, vec![SchemeId::MIE, SchemeId::MCN]);
        assert_eq!(c.dts, vec![0.1, 0.05, 0.02]);
        assert_eq!(c.strategies, vec![VelocityStrategy::Continuous]);
        c.validate().unwrap();
    }

    #[test]
    fn bad_entries_rejected() {
        assert!(ExperimentConfig::from_text("nx 3", Experiment::Stability).is_err());
        assert!(ExperimentConfig::from_text("colour = red", Experiment::Stability).is_err());
        assert!(ExperimentConfig::from_text("dt = ", Experiment::Stability).is_err());
        assert!(ExperimentConfig::from_text("scheme = BDF9", Experiment::Stability).is_err());
        let mut c = ExperimentConfig::defaults(Experiment::Stability);
        c.dts = vec![0.0];
        assert!(c.validate().is_err());
    }

    #[test]
    fn map_names_round_trip() {
        for name in ["stability", "convergence", "A", "B", "identity"] {
            assert_eq!(map_label(&parse_map(name).unwrap()), name);
        }
    }
}
