//! The registered scenarios. Each writes its raw CSV, a `summary.json` of
//! headline numbers, a `params.json` snapshot and, on request, an SVG.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;
use serde_json::{json, Value};

use qdswitch::fitting::{
    estimate_eta, fit_gaussian, fit_lorentzian, fit_switching_curve, fit_vacuum_rabi, EtaOptions, FitResult,
};
use qdswitch::lindblad::StateDefects;
use qdswitch::params::Carrier;
use qdswitch::spectra::peaks::doublet;
use qdswitch::spectra::{anticrossing_map, format_num, linear_response_scan, polariton_modes, Reference, Spectrum};
use qdswitch::switching::{
    adiabatic_switching_curve, contrast, pump_probe_scan, stark_shift_dispersive, stark_shift_vs_power,
    switching_curve_model, switching_energy_vs_detuning, write_detuning_csv, damped_stark_kernel, PumpProbeMode, PumpProbeOptions,
    SemiclassicalModel, StarkOptions, SwitchingCurve,
};
use qdswitch::{DeviceParams, DriveSpec};

use crate::config::Config;
use crate::manifest::{Manifest, OutputDir};
use crate::svg::{line_plot, Series};
use crate::CliError;

/// Name and one-line description of every scenario, in listing order.
pub const SCENARIOS: [(&str, &str); 7] = [
    ("anticrossing", "cavity scatter versus temperature: polariton anticrossing and far-detuned cavity linewidth"),
    ("doublet", "weak-drive transmission and scatter at QD-cavity resonance, with a vacuum-Rabi fit of g"),
    ("stark_vs_power", "QD Stark shift versus incident CW power from the full master equation"),
    ("switching_curves", "switching contrast versus control pulse energy at several control detunings"),
    ("switching_energy_vs_detuning", "semiclassical switching energy versus control detuning"),
    ("pump_probe", "signal scatter versus signal-control delay"),
    ("fit", "fitting pipeline on self-generated noisy data: g, kappa, E0, response time and eta"),
];

const SEMICLASSICAL_LABEL: &str = "reconstructed semiclassical Stark model (cavity buildup x damped dispersive kernel, one calibration constant)";

pub fn list_scenarios() -> String {
    SCENARIOS.iter().map(|(n, d)| format!("{n:<30} {d}\n")).collect()
}

#[derive(Serialize)]
struct ParamsSnapshot<'a> {
    scenario: &'a str,
    config: &'a Config,
    device: DeviceParams,
}

type Runner = fn(&Config, &mut OutputDir, bool) -> Result<(), CliError>;

/// Runs `name` into `out`. Unknown names fail before anything is written.
pub fn run_scenario(name: &str, cfg: &Config, out: &Path, svg: bool) -> Result<Manifest, CliError> {
    let runner: Runner = match name {
        "anticrossing" => anticrossing,
        "doublet" => doublet_scenario,
        "stark_vs_power" => stark_vs_power,
        "switching_curves" => switching_curves,
        "switching_energy_vs_detuning" => detuning_scan,
        "pump_probe" => pump_probe,
        "fit" => fit_pipeline,
        _ => {
            let known: Vec<&str> = SCENARIOS.iter().map(|(n, _)| *n).collect();
            return Err(CliError::Config(format!("unknown scenario `{name}` (expected one of {})", known.join(", "))));
        }
    };
    cfg.validate()?;
    let mut dir = OutputDir::create(out)?;
    dir.write_json("params.json", &ParamsSnapshot { scenario: name, config: cfg, device: cfg.device.params() })?;
    runner(cfg, &mut dir, svg)?;
    dir.finish(name)
}

fn write_rows(dir: &mut OutputDir, name: &str, header: &[&str], rows: &[Vec<f64>]) -> Result<(), CliError> {
    dir.write_with(name, |w| {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(header)?;
        for r in rows {
            wr.write_record(r.iter().map(|v| format_num(*v)))?;
        }
        wr.flush()?;
        Ok(())
    })
}

fn worst(defects: impl IntoIterator<Item = StateDefects<f64>>) -> Option<StateDefects<f64>> {
    defects.into_iter().reduce(|a, b| StateDefects {
        trace_error: a.trace_error.max(b.trace_error),
        hermiticity_error: a.hermiticity_error.max(b.hermiticity_error),
        min_eigenvalue: a.min_eigenvalue.min(b.min_eigenvalue),
    })
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>, CliError> {
    if !(lo > 0.0 && hi > lo && n >= 2) {
        return Err(CliError::Config("energy grid needs 0 < min < max and at least 2 points".into()));
    }
    Ok((0..n).map(|k| lo * (hi / lo).powf(k as f64 / (n - 1) as f64)).collect())
}

/// The configured control, moved onto the lower polariton when requested.
fn control_drive(cfg: &Config, p: &DeviceParams) -> DriveSpec {
    let mut c = cfg.drives.control;
    if cfg.drives.control_at_lower_polariton {
        let lower = polariton_modes(p, p.qd_detuning())[0].center;
        c.carrier = Carrier::QdDetuning(lower - p.qd_detuning());
    }
    c
}

/// Lower-polariton detuning below the QD, GHz.
fn lower_polariton_detuning(p: &DeviceParams) -> f64 {
    p.qd_detuning() - polariton_modes(p, p.qd_detuning())[0].center
}

fn anticrossing(cfg: &Config, dir: &mut OutputDir, svg: bool) -> Result<(), CliError> {
    let sc = &cfg.scenarios.anticrossing;
    let p = cfg.device.params();
    let temps = sc.temperature_k.points()?;
    let axis = sc.frequency_ghz.points()?;
    let map = anticrossing_map(&p, &cfg.tuning, &temps, &axis)?;
    dir.write_with("anticrossing.csv", |w| map.write_csv(w))?;

    let seps = map.mode_separations();
    let mut rows = Vec::new();
    let mut best: Option<(f64, f64)> = None;
    for ((t, d), s) in temps.iter().zip(&map.detunings).zip(&seps) {
        let m = polariton_modes(&p, *d);
        if let Some(s) = s {
            rows.push(vec![*t, *d, *s, m[1].center - m[0].center]);
            if best.is_none_or(|(_, b)| *s < b) {
                best = Some((*t, *s));
            }
        }
    }
    write_rows(dir, "mode_separation.csv", &["temperature_k", "detuning_ghz", "separation_ghz", "eigen_separation_ghz"], &rows)?;

    // far-detuned rows: the cavity line sits at 0 on each row's axis
    let kappa_fit = |row: &[f64]| -> Result<f64, CliError> {
        let s = Spectrum::new(axis.clone(), row.to_vec(), Reference::Cavity)?.window(-sc.fit_half_width_ghz, sc.fit_half_width_ghz);
        Ok(fit_lorentzian(&s.axis, &s.values)?.get("fwhm").expect("fwhm"))
    };
    let first = kappa_fit(&map.rows[0])?;
    let last = kappa_fit(map.rows.last().expect("non-empty"))?;
    dir.write_json(
        "summary.json",
        &json!({
            "t_resonance_k": cfg.tuning.t_resonance,
            "temperature_step_k": sc.temperature_k.step,
            "t_min_separation_k": best.map(|b| b.0),
            "min_separation_ghz": best.map(|b| b.1),
            "kappa_fit_first_row_ghz": first,
            "kappa_fit_last_row_ghz": last,
            "first_row_detuning_ghz": map.detunings[0],
            "last_row_detuning_ghz": map.detunings.last(),
        }),
    )?;
    if svg {
        let x: Vec<f64> = rows.iter().map(|r| r[0]).collect();
        let y: Vec<f64> = rows.iter().map(|r| r[2]).collect();
        let e: Vec<f64> = rows.iter().map(|r| r[3]).collect();
        let plot = line_plot(
            "Mode separation",
            "temperature (K)",
            "separation (GHz)",
            &[Series { label: "scatter peaks", x: &x, y: &y }, Series { label: "eigenmodes", x: &x, y: &e }],
        );
        dir.write("anticrossing.svg", plot.as_bytes())?;
    }
    Ok(())
}

fn doublet_scenario(cfg: &Config, dir: &mut OutputDir, svg: bool) -> Result<(), CliError> {
    let p = cfg.device.params();
    let axis = cfg.scenarios.doublet.frequency_ghz.points()?;
    let lr = linear_response_scan(&p, &axis)?;
    let rows: Vec<Vec<f64>> = axis
        .iter()
        .zip(&lr.transmission.values)
        .zip(&lr.cavity_scatter.values)
        .map(|((f, t), s)| vec![*f, *t, *s])
        .collect();
    write_rows(dir, "doublet.csv", &["frequency_ghz", "transmission", "scatter"], &rows)?;

    let peaks = doublet(&axis, &lr.cavity_scatter.values, 1e-3);
    let modes = polariton_modes(&p, p.qd_detuning());
    let loss = (p.kappa - p.gamma) / 4.0;
    let fit = fit_vacuum_rabi(&lr.cavity_scatter, &p)?;
    dir.write_json(
        "summary.json",
        &json!({
            "peaks_ghz": peaks.map(|(a, b)| [a, b]),
            "peak_separation_ghz": peaks.map(|(a, b)| b - a),
            "eigen_splitting_ghz": modes[1].center - modes[0].center,
            "closed_form_splitting_ghz": 2.0 * (p.g * p.g - loss * loss).max(0.0).sqrt(),
            "fitted_g_ghz": fit.get("g"),
            "grid_step_ghz": cfg.scenarios.doublet.frequency_ghz.step,
        }),
    )?;
    if svg {
        let plot = line_plot(
            "Weak-drive response",
            "frequency - cavity (GHz)",
            "fraction",
            &[
                Series { label: "transmission", x: &axis, y: &lr.transmission.values },
                Series { label: "scatter", x: &axis, y: &lr.cavity_scatter.values },
            ],
        );
        dir.write("doublet.svg", plot.as_bytes())?;
    }
    Ok(())
}

fn stark_vs_power(cfg: &Config, dir: &mut OutputDir, svg: bool) -> Result<(), CliError> {
    let sc = &cfg.scenarios.stark_vs_power;
    let p = cfg.device.params().with_qd_detuning(sc.qd_detuning_ghz);
    let opts = StarkOptions { n_fock: cfg.numerics.n_fock_cw, reference_photons: 1e-4, check_truncation: sc.check_truncation };
    let curve = stark_shift_vs_power(&p, &sc.p_inc_w, &opts)?;
    let delta = -sc.qd_detuning_ghz;
    let kernel = damped_stark_kernel(&p, delta);
    let mut rows = Vec::new();
    for pt in &curve.points {
        rows.push(vec![pt.p_inc, pt.p_wg, pt.n_cav, pt.shift, stark_shift_dispersive(pt.n_cav, &p, delta)?, kernel * pt.n_cav]);
    }
    write_rows(
        dir,
        "stark_vs_power.csv",
        &["p_inc_w", "p_wg_w", "n_cav", "shift_ghz", "dispersive_shift_ghz", "damped_kernel_shift_ghz"],
        &rows,
    )?;
    dir.write_json(
        "summary.json",
        &json!({
            "qd_detuning_ghz": sc.qd_detuning_ghz,
            "eta": p.eta,
            "n_fock": opts.n_fock,
            "reference_line_ghz": curve.reference_center,
            "state_defects": worst(curve.points.iter().map(|pt| pt.defects)),
        }),
    )?;
    if svg {
        let x: Vec<f64> = rows.iter().map(|r| r[0] * 1e6).collect();
        let y: Vec<f64> = rows.iter().map(|r| r[3]).collect();
        let d: Vec<f64> = rows.iter().map(|r| r[4]).collect();
        let plot = line_plot(
            "Stark shift",
            "incident power (uW)",
            "red shift (GHz)",
            &[Series { label: "master equation", x: &x, y: &y }, Series { label: "2g^2 n / delta", x: &x, y: &d }],
        );
        dir.write("stark_vs_power.svg", plot.as_bytes())?;
    }
    Ok(())
}

fn fit_summary(fit: &FitResult<f64>) -> Value {
    let ci = fit.derived.iter().find(|d| d.name == "e_switch").and_then(|d| d.ci90);
    json!({ "e0_aj": fit.get("e0"), "e_switch_aj": fit.get("e_switch"), "e_switch_ci90_aj": ci, "converged": fit.converged })
}

fn switching_curves(cfg: &Config, dir: &mut OutputDir, svg: bool) -> Result<(), CliError> {
    let sc = &cfg.scenarios.switching_curves;
    let p = cfg.device.params();
    let energies = log_grid(sc.energy_min_aj, sc.energy_max_aj, sc.n_energies)?;
    let model = SemiclassicalModel::paper_calibrated();
    let control = cfg.drives.control;
    let mut entries = Vec::new();
    let mut curves: Vec<(String, SwitchingCurve<f64>)> = Vec::new();
    for det in &sc.detunings_ghz {
        let e0 = model.e0(&p, *det, &control)?;
        let curve = switching_curve_model(&energies, e0)?;
        let fit = fit_switching_curve(&curve.energies, &curve.rho)?;
        let tag = format_num(*det);
        dir.write_with(&format!("switching_curve_{tag}ghz.csv"), |w| curve.write_csv(w))?;
        let mut entry = json!({ "detuning_ghz": det, "model_e0_aj": e0, "fit": fit_summary(&fit) });
        if sc.adiabatic_comparison {
            let mut c = control;
            c.carrier = Carrier::QdDetuning(-*det);
            let adiabatic = adiabatic_switching_curve(&p, &cfg.drives.signal, &c, &energies, cfg.scenarios.pump_probe.dt_ps)?;
            dir.write_with(&format!("switching_curve_adiabatic_{tag}ghz.csv"), |w| adiabatic.write_csv(w))?;
            entry["adiabatic_fit"] = match fit_switching_curve(&adiabatic.energies, &adiabatic.rho) {
                Ok(f) => fit_summary(&f),
                Err(e) => json!({ "error": e.to_string() }),
            };
        }
        entries.push(entry);
        curves.push((format!("{tag} GHz"), curve));
    }
    dir.write_json("summary.json", &json!({ "model": SEMICLASSICAL_LABEL, "curves": entries }))?;
    if svg {
        let x: Vec<f64> = energies.iter().map(|e| e.log10()).collect();
        let series: Vec<Series> = curves.iter().map(|(l, c)| Series { label: l, x: &x, y: &c.rho }).collect();
        dir.write("switching_curves.svg", line_plot("Switching contrast", "log10 energy (aJ)", "rho", &series).as_bytes())?;
    }
    Ok(())
}

fn detuning_scan(cfg: &Config, dir: &mut OutputDir, svg: bool) -> Result<(), CliError> {
    let p = cfg.device.params();
    let grid = cfg.scenarios.switching_energy_vs_detuning.detuning_ghz.points()?;
    let rows = switching_energy_vs_detuning(&p, &grid, &cfg.drives.control)?;
    dir.write_with("switching_energy_vs_detuning.csv", |w| write_detuning_csv(&rows, w))?;
    let (arg, min) = rows.iter().fold((f64::NAN, f64::INFINITY), |(a, m), (d, e)| if *e < m { (*d, *e) } else { (a, m) });
    dir.write_json(
        "summary.json",
        &json!({
            "model": SEMICLASSICAL_LABEL,
            "argmin_detuning_ghz": arg,
            "min_e_switch_aj": min,
            "lower_polariton_detuning_ghz": lower_polariton_detuning(&p),
            "grid_step_ghz": cfg.scenarios.switching_energy_vs_detuning.detuning_ghz.step,
        }),
    )?;
    if svg {
        let x: Vec<f64> = rows.iter().map(|r| r.0).collect();
        let y: Vec<f64> = rows.iter().map(|r| r.1).collect();
        let plot = line_plot("Switching energy", "detuning below QD (GHz)", "E_switch (aJ)", &[Series { label: "model", x: &x, y: &y }]);
        dir.write("switching_energy_vs_detuning.svg", plot.as_bytes())?;
    }
    Ok(())
}

fn pump_probe(cfg: &Config, dir: &mut OutputDir, svg: bool) -> Result<(), CliError> {
    let sc = &cfg.scenarios.pump_probe;
    let p = cfg.device.params();
    let control = control_drive(cfg, &p);
    let delays = sc.delay_ps.points()?;
    let opts = PumpProbeOptions { mode: sc.mode, n_fock: cfg.numerics.n_fock_pulsed, dt_ps: sc.dt_ps, stepper: cfg.numerics.stepper.stepper() };
    let scan = pump_probe_scan(&p, &cfg.drives.signal, &control, &delays, &opts)?;
    dir.write_with("pump_probe.csv", |w| scan.write_csv(w))?;

    let fit = fit_gaussian(&scan.delays, &scan.intensity).ok();
    let i_max = scan.intensity.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let far = if scan.delays.first().map(|d| d.abs()) >= scan.delays.last().map(|d| d.abs()) {
        scan.intensity[0]
    } else {
        *scan.intensity.last().expect("non-empty")
    };
    let peak_delay = scan.delays[scan.intensity.iter().position(|v| *v == i_max).expect("max present")];
    dir.write_json(
        "summary.json",
        &json!({
            "mode": sc.mode,
            "peak_delay_ps": peak_delay,
            "peak_intensity": i_max,
            "far_delay_intensity": far,
            "contrast": contrast(i_max, far).ok(),
            "gaussian_fwhm_ps": fit.as_ref().and_then(|f| f.get("fwhm")),
            "gaussian_center_ps": fit.as_ref().and_then(|f| f.get("center")),
            "baseline": scan.baseline,
            "control_energy_aj": control.pulse_energy_aj(&p)?,
            "state_defects": scan.worst_defects,
        }),
    )?;
    if svg {
        let plot = line_plot("Pump-probe", "delay (ps)", "signal scatter (photons)", &[Series { label: "scan", x: &scan.delays, y: &scan.intensity }]);
        dir.write("pump_probe.svg", plot.as_bytes())?;
    }
    Ok(())
}

fn relative_row(name: &str, truth: f64, fitted: Option<f64>) -> Vec<String> {
    let f = fitted.unwrap_or(f64::NAN);
    vec![name.into(), format_num(truth), format_num(f), format_num((f - truth) / truth)]
}

fn fit_pipeline(cfg: &Config, dir: &mut OutputDir, _svg: bool) -> Result<(), CliError> {
    let sc = &cfg.scenarios.fit;
    let p = cfg.device.params();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.numerics.seed);
    let noise = Normal::new(0.0, sc.noise).map_err(|e| CliError::Config(format!("noise level: {e}")))?;
    let mut noisy = |v: &[f64]| -> Vec<f64> { v.iter().map(|x| x * (1.0 + noise.sample(&mut rng))).collect() };
    let mut results: Vec<FitResult<f64>> = Vec::new();
    let mut table = Vec::new();

    // g from the resonant doublet
    let axis = cfg.scenarios.doublet.frequency_ghz.points()?;
    let resonant = p.with_qd_detuning(0.0);
    let lr = linear_response_scan(&resonant, &axis)?;
    let spec = Spectrum::new(axis.clone(), noisy(&lr.cavity_scatter.values), Reference::Cavity)?;
    let g = fit_vacuum_rabi(&spec, &resonant)?;
    table.push(relative_row("g_ghz", p.g, g.get("g")));
    results.push(g);

    // κ from the bare cavity line
    let mut bare = resonant;
    bare.g = 0.0;
    let lr = linear_response_scan(&bare, &axis)?;
    let k = fit_lorentzian(&axis, &noisy(&lr.cavity_scatter.values))?;
    table.push(relative_row("kappa_ghz", p.kappa, k.get("fwhm")));
    results.push(k);

    // E0 at the calibration detuning
    let e0 = SemiclassicalModel::paper_calibrated().e0(&p, 12.0, &cfg.drives.control)?;
    let sw = &cfg.scenarios.switching_curves;
    let energies = log_grid(sw.energy_min_aj, sw.energy_max_aj, sw.n_energies)?;
    let rho = noisy(&switching_curve_model(&energies, e0)?.rho);
    let s = fit_switching_curve(&energies, &rho)?;
    table.push(relative_row("e0_aj", e0, s.get("e0")));
    results.push(s);

    // response time from the adiabatic delay scan
    let pp = &cfg.scenarios.pump_probe;
    let opts = PumpProbeOptions { dt_ps: pp.dt_ps, ..PumpProbeOptions::new(PumpProbeMode::Adiabatic) };
    let delays = pp.delay_ps.points()?;
    let scan = pump_probe_scan(&p, &cfg.drives.signal, &control_drive(cfg, &p), &delays, &opts)?;
    let clean = fit_gaussian(&delays, &scan.intensity)?.get("fwhm").expect("fwhm");
    let gfit = fit_gaussian(&delays, &noisy(&scan.intensity))?;
    table.push(relative_row("response_fwhm_ps", clean, gfit.get("fwhm")));
    results.push(gfit);

    // η from the Stark curve
    if sc.include_eta {
        let stark = &cfg.scenarios.stark_vs_power;
        let powers: Vec<f64> = stark.p_inc_w.iter().copied().filter(|v| *v > 0.0).step_by(2).collect();
        let q = p.with_qd_detuning(stark.qd_detuning_ghz);
        let eo = EtaOptions {
            stark: StarkOptions { n_fock: sc.eta_n_fock, reference_photons: 1e-4, check_truncation: false },
            ..Default::default()
        };
        let curve = stark_shift_vs_power(&q, &powers, &eo.stark)?;
        let measured: Vec<(f64, f64)> = powers.iter().copied().zip(noisy(&curve.shifts())).collect();
        let e = estimate_eta(&measured, &q, &eo)?;
        table.push(relative_row("eta", p.eta, e.get("eta")));
        results.push(e);
    }

    dir.write_with("fit_summary.csv", |w| {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["quantity", "true_value", "fitted_value", "relative_error"])?;
        for r in &table {
            wr.write_record(r)?;
        }
        wr.flush()?;
        Ok(())
    })?;
    dir.write_json("fit_results.json", &results)?;
    Ok(())
}
