//! Strict JSON configuration with dotted-path overrides.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use qdswitch::lindblad::Stepper;
use qdswitch::params::wavelength_to_thz;
use qdswitch::switching::PumpProbeMode;
use qdswitch::{DeviceParams, DriveSpec, TuningModel};

use crate::CliError;

/// Parameters of the measured device, bundled with the binary.
pub const PAPER_DEFAULTS: &str = include_str!("../paper_defaults.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    /// Free-form notes keyed by the parameter they describe.
    #[serde(default)]
    pub comments: BTreeMap<String, String>,
    pub device: DeviceConfig,
    pub tuning: TuningModel,
    pub drives: Drives,
    pub numerics: Numerics,
    pub scenarios: Scenarios,
}

/// Device rates in GHz; the optical carrier as a wavelength.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceConfig {
    pub g: f64,
    pub kappa: f64,
    pub kappa_par: f64,
    pub gamma: f64,
    pub gamma_d: f64,
    pub eta: f64,
    /// Cavity wavelength, nm.
    pub wavelength_nm: f64,
    /// ω_qd − ω_cav, GHz.
    pub qd_detuning_ghz: f64,
}

impl DeviceConfig {
    pub fn params(&self) -> DeviceParams {
        let omega_cav = wavelength_to_thz(self.wavelength_nm);
        DeviceParams {
            g: self.g,
            kappa: self.kappa,
            kappa_par: self.kappa_par,
            gamma: self.gamma,
            gamma_d: self.gamma_d,
            omega_cav,
            omega_qd: omega_cav + self.qd_detuning_ghz * 1e-3,
            eta: self.eta,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Drives {
    pub signal: DriveSpec,
    pub control: DriveSpec,
    /// Place the control carrier on the lower polariton of the configured
    /// device, overriding its configured carrier.
    pub control_at_lower_polariton: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
pub enum StepperConfig {
    Adaptive { atol: f64, rtol: f64 },
    Fixed { h_ps: f64 },
}

impl StepperConfig {
    pub fn stepper(&self) -> Stepper<f64> {
        match *self {
            StepperConfig::Adaptive { atol, rtol } => Stepper::adaptive(atol, rtol),
            StepperConfig::Fixed { h_ps } => Stepper::Fixed { h: h_ps * 1e-3 },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Numerics {
    pub n_fock_cw: usize,
    pub n_fock_pulsed: usize,
    pub stepper: StepperConfig,
    /// Seed for synthetic measurement noise.
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenarios {
    pub anticrossing: AnticrossingConfig,
    pub doublet: DoubletConfig,
    pub stark_vs_power: StarkConfig,
    pub switching_curves: SwitchingCurvesConfig,
    pub switching_energy_vs_detuning: DetuningScanConfig,
    pub pump_probe: PumpProbeConfig,
    pub fit: FitConfig,
}

/// Inclusive uniform grid `start, start + step, …, ≤ stop`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Grid {
    pub fn points(&self) -> Result<Vec<f64>, CliError> {
        if !(self.step > 0.0 && self.stop >= self.start && self.start.is_finite() && self.stop.is_finite()) {
            return Err(CliError::Config(format!("invalid grid {self:?}")));
        }
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        if n > 1_000_000 {
            return Err(CliError::Config(format!("grid {self:?} has too many points")));
        }
        Ok((0..n).map(|k| self.start + self.step * k as f64).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnticrossingConfig {
    pub temperature_k: Grid,
    pub frequency_ghz: Grid,
    /// Half-width of the Lorentzian fit window around the cavity line, GHz.
    pub fit_half_width_ghz: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DoubletConfig {
    pub frequency_ghz: Grid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StarkConfig {
    /// QD detuning from the cavity during the measurement, GHz.
    pub qd_detuning_ghz: f64,
    pub p_inc_w: Vec<f64>,
    pub check_truncation: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SwitchingCurvesConfig {
    /// Control detunings below the QD, GHz.
    pub detunings_ghz: Vec<f64>,
    pub energy_min_aj: f64,
    pub energy_max_aj: f64,
    pub n_energies: usize,
    /// Also evaluate the adiabatic pump-probe model at zero delay.
    pub adiabatic_comparison: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetuningScanConfig {
    /// Control detuning below the QD, GHz.
    pub detuning_ghz: Grid,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PumpProbeConfig {
    pub delay_ps: Grid,
    pub mode: PumpProbeMode,
    /// Sampling interval of the time grid, ps.
    pub dt_ps: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    /// Relative Gaussian noise added to synthetic data.
    pub noise: f64,
    pub include_eta: bool,
    /// Truncation used inside the η fit.
    pub eta_n_fock: usize,
}

impl Config {
    pub fn paper_defaults() -> Self {
        serde_json::from_str(PAPER_DEFAULTS).expect("bundled defaults parse")
    }

    /// Reads `path` (or the bundled defaults) and applies `key=value`
    /// overrides in order.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self, CliError> {
        let text = match path {
            Some(p) => std::fs::read_to_string(p).map_err(|e| CliError::Fs(format!("{}: {e}", p.display())))?,
            None => PAPER_DEFAULTS.to_string(),
        };
        let mut value: Value =
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("config is not valid JSON: {e}")))?;
        for o in overrides {
            apply_override(&mut value, o)?;
        }
        let cfg: Config = serde_json::from_value(value).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let cfg = |e: qdswitch::Error| CliError::Config(e.to_string());
        self.device.params().validate().map_err(cfg)?;
        self.drives.signal.validate().map_err(cfg)?;
        self.drives.control.validate().map_err(cfg)?;
        if self.numerics.n_fock_cw < 2 || self.numerics.n_fock_pulsed < 2 {
            return Err(CliError::Config("Fock truncation must be at least 2".into()));
        }
        match self.numerics.stepper {
            StepperConfig::Adaptive { atol, rtol } if !(atol > 0.0 && rtol >= 0.0) => {
                return Err(CliError::Config("stepper tolerances must be positive".into()))
            }
            StepperConfig::Fixed { h_ps } if !(h_ps > 0.0) => {
                return Err(CliError::Config("fixed step must be positive".into()))
            }
            _ => {}
        }
        Ok(())
    }
}

/// Sets the dotted `path` in `root` to `raw`, parsed as JSON when possible
/// and as a string otherwise. Only existing keys may be overridden.
pub fn apply_override(root: &mut Value, assignment: &str) -> Result<(), CliError> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("override `{assignment}` is not key=value")))?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = root;
    let keys: Vec<&str> = path.split('.').collect();
    for (i, key) in keys.iter().enumerate() {
        let slot = match node {
            Value::Object(map) => map.get_mut(*key),
            Value::Array(items) => key.parse::<usize>().ok().and_then(|k| items.get_mut(k)),
            _ => None,
        }
        .ok_or_else(|| CliError::Config(format!("unknown config key `{}`", keys[..=i].join("."))))?;
        if i + 1 == keys.len() {
            *slot = value;
            return Ok(());
        }
        node = slot;
    }
    Err(CliError::Config("empty override path".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_defaults_match_reference_device() {
        let c = Config::paper_defaults();
        c.validate().unwrap();
        let p = c.device.params();
        let r = DeviceParams::reference_device();
        assert_eq!((p.g, p.kappa, p.kappa_par, p.gamma, p.eta), (r.g, r.kappa, r.kappa_par, r.gamma, r.eta));
        assert_eq!(p.omega_cav, r.omega_cav);
        assert!(p.is_strongly_coupled());
    }

    #[test]
    fn overrides_follow_dotted_paths() {
        let c = Config::load(None, &["device.g=10.5".into(), "scenarios.stark_vs_power.p_inc_w.0=1e-6".into()]).unwrap();
        assert_eq!(c.device.g, 10.5);
        assert_eq!(c.scenarios.stark_vs_power.p_inc_w[0], 1e-6);
        let c = Config::load(None, &["scenarios.pump_probe.mode=full_mastereq".into()]).unwrap();
        assert_eq!(c.scenarios.pump_probe.mode, PumpProbeMode::FullMasterEq);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(matches!(Config::load(None, &["device.q=1".into()]), Err(CliError::Config(_))));
        assert!(matches!(Config::load(None, &["device.g".into()]), Err(CliError::Config(_))));
        let mut v: Value = serde_json::from_str(PAPER_DEFAULTS).unwrap();
        v["device"]["extra"] = Value::from(1.0);
        assert!(serde_json::from_value::<Config>(v).is_err());
    }

    #[test]
    fn invalid_values_are_config_errors() {
        assert!(matches!(Config::load(None, &["device.eta=2".into()]), Err(CliError::Config(_))));
        assert!(matches!(Config::load(None, &["numerics.n_fock_cw=1".into()]), Err(CliError::Config(_))));
    }

    #[test]
    fn grid_is_inclusive() {
        let g = Grid { start: 0.0, stop: 1.0, step: 0.25 };
        assert_eq!(g.points().unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(Grid { start: 1.0, stop: 0.0, step: 0.1 }.points().is_err());
    }
}
