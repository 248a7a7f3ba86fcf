//! Scenario configuration (TOML). Every key is optional; missing keys take
//! the albatross / initial-point / controller defaults.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::chen_fliess::Quadrature;
use crate::dynamics::{best_glide_cl, BirdWindParams, FlightState, ForceModel, WindCouplingSign};
use crate::error::{Result, SoaringError};
use crate::esc::EscParams;
use crate::lie::fixtures::Fixture;
use crate::lie::{FdScheme, FormalBracket};
use crate::sim::PhaseDetectionParams;
use crate::windfield::WindParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BirdConfig {
    pub mass: f64,
    pub wing_area: f64,
    pub cd0: f64,
    pub k_induced: f64,
    pub rho: f64,
    pub g: f64,
    /// Defaults to the best-glide value `sqrt(cd0 / k_induced)`.
    pub cl_fixed: Option<f64>,
}

impl Default for BirdConfig {
    fn default() -> Self {
        let p = BirdWindParams::default();
        Self {
            mass: p.mass,
            wing_area: p.wing_area,
            cd0: p.cd0,
            k_induced: p.k_induced,
            rho: p.rho,
            g: p.g,
            cl_fixed: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    pub t_end: f64,
    pub h: f64,
    pub sign: WindCouplingSign,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            t_end: 10.0,
            h: 1e-3,
            sign: WindCouplingSign::Positive,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ForceModelChoice {
    #[default]
    AirspeedDependent,
    /// Lift and drag frozen at their values at the evaluation point.
    Frozen,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ControllabilityConfig {
    pub fixture: Fixture,
    /// Overrides the fixture's default bracket list.
    pub brackets: Option<Vec<FormalBracket>>,
    pub force_model: ForceModelChoice,
    pub tol: f64,
    pub max_depth: usize,
    pub finite_difference: FdScheme,
    /// Relative agreement required between the Taylor and finite-difference
    /// evaluations of every bracket.
    pub agreement_tol: f64,
    pub max_w0: u64,
    pub max_w: u64,
}

impl Default for ControllabilityConfig {
    fn default() -> Self {
        Self {
            fixture: Fixture::Soaring,
            brackets: None,
            force_model: ForceModelChoice::AirspeedDependent,
            tol: 1e-8,
            max_depth: crate::lie::numeric::DEFAULT_MAX_DEPTH,
            finite_difference: FdScheme::default(),
            agreement_tol: 1e-3,
            max_w0: 3,
            max_w: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from("out") }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct CompareConfig {
    /// CSV with at least `t,x,y,z,V,gamma,psi`.
    pub reference: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DemoEscConfig {
    pub x0: f64,
    pub x_star: f64,
    pub omega: f64,
    pub t_end: f64,
    pub h: f64,
}

impl Default for DemoEscConfig {
    fn default() -> Self {
        Self {
            x0: 0.0,
            x_star: 1.0,
            omega: 50.0,
            t_end: 10.0,
            h: 1e-4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DemoChenFliessConfig {
    pub x0: f64,
    pub y0: f64,
    pub t_end: f64,
    pub samples: usize,
    pub u_max: f64,
    pub max_pieces: usize,
    pub seed: u64,
    pub quadrature: Quadrature,
}

impl Default for DemoChenFliessConfig {
    fn default() -> Self {
        Self {
            x0: 0.0,
            y0: 0.0,
            t_end: 5.0,
            samples: 1000,
            u_max: 0.1,
            max_pieces: 5,
            seed: 0,
            quadrature: Quadrature::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct Scenario {
    pub bird: BirdConfig,
    pub wind: WindParams,
    pub esc: EscParams,
    pub initial: FlightState,
    pub sim: SimConfig,
    pub phases: PhaseDetectionParams,
    pub controllability: ControllabilityConfig,
    pub output: OutputConfig,
    pub compare: CompareConfig,
    pub demo_esc: DemoEscConfig,
    pub demo_chenfliess: DemoChenFliessConfig,
}

impl Scenario {
    /// Parses TOML text, fills defaults and validates.
    pub fn from_toml(text: &str) -> Result<Self> {
        let mut s: Scenario = toml::from_str(text).map_err(|e| SoaringError::Format(e.to_string()))?;
        s.resolve();
        s.validate()?;
        Ok(s)
    }

    /// Writes the defaulted lift coefficient back so reports show it.
    pub fn resolve(&mut self) {
        if self.bird.cl_fixed.is_none() {
            self.bird.cl_fixed = Some(best_glide_cl(self.bird.cd0, self.bird.k_induced));
        }
    }

    pub fn params(&self) -> BirdWindParams {
        let b = &self.bird;
        BirdWindParams {
            mass: b.mass,
            wing_area: b.wing_area,
            cd0: b.cd0,
            k_induced: b.k_induced,
            rho: b.rho,
            g: b.g,
            wind: self.wind,
            cl_fixed: b.cl_fixed.unwrap_or_else(|| best_glide_cl(b.cd0, b.k_induced)),
        }
    }

    pub fn force_model(&self) -> Result<ForceModel> {
        match self.controllability.force_model {
            ForceModelChoice::AirspeedDependent => Ok(ForceModel::AirspeedDependent),
            ForceModelChoice::Frozen => ForceModel::frozen_at(self.initial.v, &self.params()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params().validate()?;
        self.esc.validate()?;
        self.initial.validate()?;
        self.phases.validate()?;
        let positive = [
            ("sim.t_end", self.sim.t_end),
            ("sim.h", self.sim.h),
            ("controllability.tol", self.controllability.tol),
            ("controllability.agreement_tol", self.controllability.agreement_tol),
            ("demo_esc.omega", self.demo_esc.omega),
            ("demo_esc.t_end", self.demo_esc.t_end),
            ("demo_esc.h", self.demo_esc.h),
            ("demo_chenfliess.t_end", self.demo_chenfliess.t_end),
        ];
        for (name, v) in positive {
            if !v.is_finite() || v <= 0.0 {
                return Err(SoaringError::invalid(name, "must be finite and > 0"));
            }
        }
        if self.sim.h > self.sim.t_end {
            return Err(SoaringError::invalid("sim.h", "must not exceed sim.t_end"));
        }
        let c = &self.controllability;
        if c.max_w0 == 0 || c.max_w == 0 {
            return Err(SoaringError::invalid("controllability.max_w", "weight bounds must be >= 1"));
        }
        if c.max_depth == 0 {
            return Err(SoaringError::invalid("controllability.max_depth", "must be >= 1"));
        }
        if let Some(list) = &c.brackets {
            if list.is_empty() {
                return Err(SoaringError::invalid("controllability.brackets", "must not be empty"));
            }
        }
        let d = &self.demo_chenfliess;
        if !d.u_max.is_finite() || d.u_max < 0.0 {
            return Err(SoaringError::invalid("demo_chenfliess.u_max", "must be finite and >= 0"));
        }
        if d.samples == 0 || d.max_pieces == 0 {
            return Err(SoaringError::invalid("demo_chenfliess.samples", "counts must be >= 1"));
        }
        Ok(())
    }
}

/// Reads and validates a scenario file.
pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path).map_err(|e| SoaringError::io(path, e))?;
    Scenario::from_toml(&text)
}
