//! Flat `key = value` experiment configuration.
//!
//! The same parser handles config files, command-line overrides and the run
//! manifest, so a manifest can be fed back in as a config. Keys starting with
//! `derived.` are written for the record and skipped on input.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use kinetic_hj::baseline_kinetic::cfl_max_dt;
use kinetic_hj::GridSpec;

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeKind {
    Ap,
    Limit,
    Naive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitPreset {
    TwoWell,
    Equilibrium,
    Dirac,
    TwoDirac,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StudyMode {
    Run,
    EpsSweep,
    ConvDx,
    ConvDv,
    ConvDt,
    Amplitude,
    Kernel,
}

macro_rules! keyword_enum {
    ($ty:ty, $what:literal, $($variant:path => $name:literal),+ $(,)?) => {
        impl FromStr for $ty {
            type Err = HarnessError;
            fn from_str(s: &str) -> Result<Self> {
                match s.trim() {
                    $($name => Ok($variant),)+
                    other => Err(HarnessError::Config(format!(
                        concat!("unknown ", $what, " '{}'"), other
                    ))),
                }
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self { $($variant => $name,)+ })
            }
        }
    };
}

keyword_enum!(SchemeKind, "scheme",
    SchemeKind::Ap => "ap", SchemeKind::Limit => "limit", SchemeKind::Naive => "naive");
keyword_enum!(InitPreset, "initial-data preset",
    InitPreset::TwoWell => "two-well",
    InitPreset::Equilibrium => "equilibrium",
    InitPreset::Dirac => "dirac",
    InitPreset::TwoDirac => "two-dirac");
keyword_enum!(StudyMode, "study mode",
    StudyMode::Run => "run",
    StudyMode::EpsSweep => "eps-sweep",
    StudyMode::ConvDx => "conv-dx",
    StudyMode::ConvDv => "conv-dv",
    StudyMode::ConvDt => "conv-dt",
    StudyMode::Amplitude => "amplitude",
    StudyMode::Kernel => "kernel");

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub mode: StudyMode,
    pub scheme: SchemeKind,
    pub eps: Vec<f64>,
    pub x_star: f64,
    pub v_star: f64,
    pub n_x: usize,
    pub n_v: usize,
    /// `None`: `0.9 dv^2/2` for the HJ schemes, the CFL bound for the naive one.
    pub dt: Option<f64>,
    pub t_final: f64,
    pub init: InitPreset,
    pub out_dir: PathBuf,
    /// Output times for `run` and `eps-sweep`; empty means `{T}`.
    pub times: Vec<f64>,
    /// Candidate resolutions of a convergence study (N_x, N_v or N_t).
    pub levels: Vec<usize>,
    /// Reference resolution of a convergence study.
    pub reference: Option<usize>,
    pub full_scale: bool,
    /// Refuses reference grids with more phase-space cells than this.
    pub max_cells: usize,
    /// Relative radius `r` of the kernel window `|x| <= r T^{3/2}`.
    pub kernel_radius: f64,
    pub dirac_half_width: usize,
    pub dirac_centers: (f64, f64),
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            mode: StudyMode::Run,
            scheme: SchemeKind::Limit,
            eps: vec![1.0],
            x_star: 10.0,
            v_star: 10.0,
            n_x: 64,
            n_v: 61,
            dt: None,
            t_final: 1.5,
            init: InitPreset::TwoWell,
            out_dir: PathBuf::from("out"),
            times: Vec::new(),
            levels: Vec::new(),
            reference: None,
            full_scale: false,
            max_cells: 50_000_000,
            kernel_radius: 0.4,
            dirac_half_width: 0,
            dirac_centers: (-4.0, 4.0),
        }
    }
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| HarnessError::Config(format!("invalid value '{value}' for '{key}'")))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    if value.trim().is_empty() {
        return Ok(Vec::new());
    }
    value.split(',').map(|v| parse_num(key, v)).collect()
}

fn join<T: fmt::Display>(items: &[T]) -> String {
    items.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

impl ExperimentConfig {
    /// Applies one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim();
        match key {
            "mode" => self.mode = value.parse()?,
            "scheme" => self.scheme = value.parse()?,
            "eps" => self.eps = parse_list(key, value)?,
            "x_star" => self.x_star = parse_num(key, value)?,
            "v_star" => self.v_star = parse_num(key, value)?,
            "n_x" => self.n_x = parse_num(key, value)?,
            "n_v" => self.n_v = parse_num(key, value)?,
            "dt" => {
                self.dt = match value.trim() {
                    "" | "auto" => None,
                    v => Some(parse_num(key, v)?),
                }
            }
            "T" => self.t_final = parse_num(key, value)?,
            "init" => self.init = value.parse()?,
            "out" => self.out_dir = PathBuf::from(value.trim()),
            "times" => self.times = parse_list(key, value)?,
            "levels" => self.levels = parse_list(key, value)?,
            "reference" => {
                self.reference = match value.trim() {
                    "" | "auto" => None,
                    v => Some(parse_num(key, v)?),
                }
            }
            "full_scale" => self.full_scale = parse_num(key, value)?,
            "max_cells" => self.max_cells = parse_num(key, value)?,
            "kernel_radius" => self.kernel_radius = parse_num(key, value)?,
            "dirac_half_width" => self.dirac_half_width = parse_num(key, value)?,
            "dirac_centers" => {
                let c: Vec<f64> = parse_list(key, value)?;
                if c.len() != 2 {
                    return Err(HarnessError::Config(format!(
                        "dirac_centers needs two values, got '{value}'"
                    )));
                }
                self.dirac_centers = (c[0], c[1]);
            }
            k if k.starts_with("derived.") => {}
            other => return Err(HarnessError::Config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    /// Applies every assignment of a config text; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                HarnessError::Config(format!("line {}: expected 'key = value', got '{line}'", n + 1))
            })?;
            self.set(key, value)?;
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_text(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.eps.iter().any(|&e| !(e > 0.0 && e <= 1.0)) {
            return Err(HarnessError::Config(format!(
                "eps values must lie in (0, 1], got {:?}",
                self.eps
            )));
        }
        if self.times.iter().any(|&t| !(t >= 0.0) || t > self.t_final * (1.0 + 1e-12)) {
            return Err(HarnessError::Config(format!(
                "output times must lie in [0, T = {}], got {:?}",
                self.t_final, self.times
            )));
        }
        self.grid()?;
        Ok(())
    }

    /// First eps of the list; the scheme's parameter for single runs.
    pub fn primary_eps(&self) -> f64 {
        self.eps.first().copied().unwrap_or(1.0)
    }

    pub fn resolved_dt(&self) -> Result<f64> {
        if let Some(dt) = self.dt {
            return Ok(dt);
        }
        let provisional = GridSpec::new(self.x_star, self.v_star, self.n_x, self.n_v, 1.0, self.t_final)?;
        Ok(match self.scheme {
            SchemeKind::Naive => cfl_max_dt(&provisional, self.primary_eps()),
            _ => 0.9 * provisional.dv() * provisional.dv() / 2.0,
        })
    }

    pub fn grid(&self) -> Result<GridSpec> {
        Ok(GridSpec::new(
            self.x_star,
            self.v_star,
            self.n_x,
            self.n_v,
            self.resolved_dt()?,
            self.t_final,
        )?)
    }

    /// Output times, `{T}` when none were given.
    pub fn output_times(&self) -> Vec<f64> {
        if self.times.is_empty() {
            vec![self.t_final]
        } else {
            self.times.clone()
        }
    }

    /// `key = value` lines that reproduce this config.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut line = |k: &str, v: String| s.push_str(&format!("{k} = {v}\n"));
        line("mode", self.mode.to_string());
        line("scheme", self.scheme.to_string());
        line("eps", join(&self.eps));
        line("x_star", self.x_star.to_string());
        line("v_star", self.v_star.to_string());
        line("n_x", self.n_x.to_string());
        line("n_v", self.n_v.to_string());
        line("dt", self.dt.map_or("auto".into(), |d| d.to_string()));
        line("T", self.t_final.to_string());
        line("init", self.init.to_string());
        line("out", self.out_dir.display().to_string());
        line("times", join(&self.times));
        line("levels", join(&self.levels));
        line("reference", self.reference.map_or("auto".into(), |r| r.to_string()));
        line("full_scale", self.full_scale.to_string());
        line("max_cells", self.max_cells.to_string());
        line("kernel_radius", self.kernel_radius.to_string());
        line("dirac_half_width", self.dirac_half_width.to_string());
        line(
            "dirac_centers",
            format!("{},{}", self.dirac_centers.0, self.dirac_centers.1),
        );
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_round_trips() {
        let cfg = ExperimentConfig::from_text(
            "# comment\nscheme = ap\neps = 1, 0.1 ,0.01\nT = 3\ninit = dirac # trailing\ntimes = 0.5,3\n",
        )
        .unwrap();
        assert_eq!(cfg.scheme, SchemeKind::Ap);
        assert_eq!(cfg.eps, vec![1.0, 0.1, 0.01]);
        assert_eq!(cfg.init, InitPreset::Dirac);
        assert_eq!(cfg.output_times(), vec![0.5, 3.0]);
        let again = ExperimentConfig::from_text(&cfg.to_text()).unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(ExperimentConfig::from_text("init = gaussian").is_err());
        assert!(ExperimentConfig::from_text("nonsense = 1").is_err());
        assert!(ExperimentConfig::from_text("n_v = 60").is_err());
        assert!(ExperimentConfig::from_text("eps = 2").is_err());
        assert!(ExperimentConfig::from_text("just text").is_err());
        assert!(ExperimentConfig::from_text("T = 1\ntimes = 2").is_err());
        assert!(ExperimentConfig::from_text("derived.dx = 0.3").is_ok());
    }

    #[test]
    fn default_dt_depends_on_scheme() {
        let cfg = ExperimentConfig::default();
        let grid = cfg.grid().unwrap();
        assert!((grid.dt() - 0.9 * grid.dv() * grid.dv() / 2.0).abs() < 1e-15);
        let naive = ExperimentConfig {
            scheme: SchemeKind::Naive,
            ..ExperimentConfig::default()
        };
        let g = naive.grid().unwrap();
        assert!((g.dt() - cfl_max_dt(&g, 1.0)).abs() < 1e-15);
    }
}
