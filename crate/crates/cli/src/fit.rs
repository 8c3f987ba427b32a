//! The `fit` subcommand: run one fitter on a two-column CSV.

use std::path::Path;

use qdswitch::fitting::{
    estimate_eta, fit_gaussian, fit_lorentzian, fit_switching_curve, fit_vacuum_rabi, read_xy_csv, EtaOptions,
    FitResult,
};
use qdswitch::spectra::{Reference, Spectrum};
use qdswitch::switching::StarkOptions;

use crate::config::Config;
use crate::CliError;

/// Fitter name, expected CSV columns and description.
pub const FITTERS: [(&str, &str, &str); 5] = [
    ("lorentzian", "x,y", "Lorentzian line: center, fwhm, amplitude, offset"),
    ("gaussian", "x,y", "Gaussian line: center, fwhm, amplitude, offset"),
    ("switching_curve", "energy_aj,rho", "E0 of rho = 1/(1 + E/E0)^2, with E_switch and its 90% interval"),
    ("vacuum_rabi", "frequency_ghz,value", "coupling g from a cavity-referenced scatter spectrum; other rates from the config"),
    ("eta", "p_inc_w,shift_ghz", "grating efficiency from Stark shifts; device and stark_vs_power QD detuning from the config"),
];

pub fn run_fit(fitter: &str, data: &Path, cfg: &Config) -> Result<FitResult<f64>, CliError> {
    if !FITTERS.iter().any(|(n, _, _)| *n == fitter) {
        let known: Vec<&str> = FITTERS.iter().map(|(n, _, _)| *n).collect();
        return Err(CliError::Config(format!("unknown fitter `{fitter}` (expected one of {})", known.join(", "))));
    }
    let file = std::fs::File::open(data).map_err(|e| CliError::Fs(format!("{}: {e}", data.display())))?;
    let (x, y) = read_xy_csv(file).map_err(|e| CliError::Config(format!("{}: {e}", data.display())))?;
    let p = cfg.device.params();
    Ok(match fitter {
        "lorentzian" => fit_lorentzian(&x, &y)?,
        "gaussian" => fit_gaussian(&x, &y)?,
        "switching_curve" => fit_switching_curve(&x, &y)?,
        "vacuum_rabi" => fit_vacuum_rabi(&Spectrum::new(x, y, Reference::Cavity)?, &p)?,
        "eta" => {
            let q = p.with_qd_detuning(cfg.scenarios.stark_vs_power.qd_detuning_ghz);
            let opts = EtaOptions {
                stark: StarkOptions { n_fock: cfg.numerics.n_fock_cw, reference_photons: 1e-4, check_truncation: false },
                ..Default::default()
            };
            let measured: Vec<(f64, f64)> = x.into_iter().zip(y).collect();
            estimate_eta(&measured, &q, &opts)?
        }
        _ => unreachable!("checked above"),
    })
}
