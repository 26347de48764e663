//! One TOML document configuring every module; unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::airfoil::AirfoilSection;
use crate::bounds::DesignBounds;
use crate::codesign::{CodesignConfig, Problem};
use crate::dynsim::{AirframeConfig, SimConfig};
use crate::effmap::{EffSurface, EffmapConfig};
use crate::error::{ensure, Error, Result};
use crate::fuse_struct::FuselageLoadCase;
use crate::hydro::{FlowEnv, FoilCoeffs, PowerForm, DEFAULT_ALPHA_RANGE};
use crate::ilc::IlcConfig;
use crate::proxy::BaselineKite;
use crate::wing_struct::{Material, WingLoadCase};

/// Steady-flight power settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HydroConfig {
    pub power_form: PowerForm,
    /// Angle-of-attack search interval for the glide optimum (rad).
    pub alpha_range: [f64; 2],
}

impl Default for HydroConfig {
    fn default() -> Self {
        Self { power_form: PowerForm::default(), alpha_range: [DEFAULT_ALPHA_RANGE.0, DEFAULT_ALPHA_RANGE.1] }
    }
}

/// (s, AR) grid flown to build the efficiency map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleGrid {
    pub s: Vec<f64>,
    pub ar: Vec<f64>,
}

impl Default for SampleGrid {
    fn default() -> Self {
        Self { s: vec![7.0, 8.5, 10.0], ar: vec![4.0, 5.0, 6.0] }
    }
}

impl SampleGrid {
    pub fn points(&self) -> Vec<(f64, f64)> {
        self.s.iter().flat_map(|&s| self.ar.iter().map(move |&ar| (s, ar))).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    /// Directory receiving every output file.
    pub output_dir: PathBuf,
    /// Fitted efficiency surface; the synthetic reference surface is used
    /// when absent. Relative paths resolve against the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta_surface: Option<PathBuf>,
    pub flow: FlowEnv,
    pub foil: FoilCoeffs,
    pub hydro: HydroConfig,
    pub material: Material,
    pub airfoil: AirfoilSection,
    pub bounds: DesignBounds,
    pub wing_load: WingLoadCase,
    pub fuse_load: FuselageLoadCase,
    pub airframe: AirframeConfig,
    pub sim: SimConfig,
    pub ilc: IlcConfig,
    pub effmap: EffmapConfig,
    pub effmap_grid: SampleGrid,
    pub codesign: CodesignConfig,
    pub baseline: BaselineKite,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            output_dir: PathBuf::from("out"),
            eta_surface: None,
            flow: FlowEnv::default(),
            foil: FoilCoeffs::default(),
            hydro: HydroConfig::default(),
            material: Material::default(),
            airfoil: AirfoilSection::default(),
            bounds: DesignBounds::default(),
            wing_load: WingLoadCase::default(),
            fuse_load: FuselageLoadCase::default(),
            airframe: AirframeConfig::default(),
            sim: SimConfig::default(),
            ilc: IlcConfig::default(),
            effmap: EffmapConfig::default(),
            effmap_grid: SampleGrid::default(),
            codesign: CodesignConfig::default(),
            baseline: BaselineKite::default(),
        }
    }
}

fn parse_err(e: impl ToString) -> Error {
    Error::Parse { what: "configuration".into(), msg: e.to_string() }
}

impl SuiteConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(parse_err)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(parse_err)
    }

    /// Reads a config file; a relative `eta_surface` is made relative to the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg = Self::from_toml(&std::fs::read_to_string(path)?)?;
        if let (Some(surface), Some(dir)) = (&cfg.eta_surface, path.parent()) {
            if surface.is_relative() {
                cfg.eta_surface = Some(dir.join(surface));
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.flow.validate()?;
        self.foil.validate()?;
        self.material.validate()?;
        self.bounds.validate()?;
        self.wing_load.validate()?;
        self.fuse_load.validate()?;
        self.sim.validate()?;
        self.ilc.validate()?;
        self.effmap.validate()?;
        self.codesign.validate()?;
        let [lo, hi] = self.hydro.alpha_range;
        ensure(lo < hi, || format!("alpha_range [{lo}, {hi}] is empty"))?;
        ensure(!self.effmap_grid.s.is_empty() && !self.effmap_grid.ar.is_empty(), || {
            "efficiency-map grid is empty".into()
        })
    }

    /// The configured surface, or the synthetic reference surface.
    pub fn surface(&self) -> Result<EffSurface> {
        match &self.eta_surface {
            Some(path) => Ok(EffSurface::load(path)?.with_limits(&self.effmap)),
            None => Ok(EffSurface::reference().with_limits(&self.effmap)),
        }
    }

    pub fn problem(&self) -> Result<Problem> {
        self.problem_with(self.surface()?)
    }

    pub fn problem_with(&self, eta: EffSurface) -> Result<Problem> {
        Problem::new(
            self.flow,
            self.foil,
            self.hydro.power_form,
            (self.hydro.alpha_range[0], self.hydro.alpha_range[1]),
            self.material,
            &self.airfoil,
            self.bounds,
            self.wing_load,
            self.fuse_load,
            self.airframe,
            eta,
        )
    }
}
