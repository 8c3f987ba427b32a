//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::path::Path;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use qdswitch::fitting::{estimate_eta, fit_gaussian, fit_lorentzian, fit_switching_curve, EtaOptions};
use qdswitch::lindblad::{evolve, liouvillian_for_amplitude, steady_state, DensityMatrix, EvolveOptions, StateDefects, Stepper};
use qdswitch::operators::{HilbertDims, SystemOperators};
use qdswitch::params::{Carrier, DrivePower};
use qdswitch::spectra::{emission_correlation, polariton_modes, power_spectrum};
use qdswitch::switching::{
    contrast, dissipation_bound, paper_pump_probe_drives, pump_probe_scan, stark_shift_dispersive, stark_shift_vs_power,
    switching_curve_model, switching_energy_from_e0, switching_energy_vs_detuning, PumpProbeMode, PumpProbeOptions,
    StarkOptions,
};
use qdswitch::{DeviceParams, DriveSpec};
use qdswitch_cli::{run_scenario, Config, SCENARIOS};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn within(elapsed: Duration, limit_s: u64) -> bool {
    elapsed <= Duration::from_secs(limit_s)
}

fn summary(dir: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(dir.join("summary.json")).expect("summary written")).expect("summary json")
}

fn run(name: &str, overrides: &[&str], dir: &Path) -> Result<(), String> {
    let o: Vec<String> = overrides.iter().map(|s| s.to_string()).collect();
    let cfg = Config::load(None, &o).map_err(|e| e.to_string())?;
    run_scenario(name, &cfg, dir, false).map(|_| ()).map_err(|e| e.to_string())
}

fn device() -> DeviceParams {
    Config::paper_defaults().device.params()
}

fn vacuum_rabi_doublet() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let t0 = Instant::now();
    if let Err(e) = run("doublet", &[], dir.path()) {
        return outcome(false, e);
    }
    let dt = t0.elapsed();
    let s = summary(dir.path());
    let expected = s["closed_form_splitting_ghz"].as_f64().unwrap();
    let Some(sep) = s["peak_separation_ghz"].as_f64() else {
        return outcome(false, "no doublet resolved");
    };
    let rel = (sep - expected) / expected;
    outcome(
        rel.abs() <= 0.02 && within(dt, 10),
        format!("peak separation {sep:.3} GHz vs {expected:.3} GHz ({:+.1}%), {:.2} s", 100.0 * rel, dt.as_secs_f64()),
    )
}

fn anticrossing() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let t0 = Instant::now();
    if let Err(e) = run("anticrossing", &[], dir.path()) {
        return outcome(false, e);
    }
    let dt = t0.elapsed();
    let s = summary(dir.path());
    let f = |k: &str| s[k].as_f64().unwrap();
    let t_ok = (f("t_min_separation_k") - f("t_resonance_k")).abs() <= f("temperature_step_k") + 1e-9;
    let k1 = f("kappa_fit_first_row_ghz");
    let k2 = f("kappa_fit_last_row_ghz");
    let k_ok = [k1, k2].iter().all(|k| ((k - 28.0) / 28.0).abs() <= 0.03);
    outcome(
        t_ok && k_ok && within(dt, 60),
        format!(
            "minimum at {:.1} K (resonance {:.1} K), kappa fits {k1:.3} / {k2:.3} GHz, {:.1} s",
            f("t_min_separation_k"),
            f("t_resonance_k"),
            dt.as_secs_f64()
        ),
    )
}

fn steady_state_oracle() -> Outcome {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let mut p = device().with_qd_detuning(rng.random_range(-40.0..40.0));
        p.g = rng.random_range(2.0..25.0);
        p.kappa = rng.random_range(10.0..50.0);
        p.kappa_par = rng.random_range(0.0..0.5) * p.kappa;
        p.gamma = rng.random_range(1.0..10.0);
        p.gamma_d = rng.random_range(0.0..3.0);
        let w = rng.random_range(-30.0..30.0);
        let drive = DriveSpec::cw(Carrier::CavityDetuning(w), DrivePower::Waveguide(rng.random_range(1e-10..1e-8)));
        let dims = HilbertDims::new(5).unwrap();
        let ops = SystemOperators::<f64>::new(dims);
        let l = liouvillian_for_amplitude(&ops, &p, drive.peak_amplitude(&p).unwrap(), w);
        let (ss, _) = steady_state(&l).unwrap();
        let traj = evolve(
            &DensityMatrix::ground(dims),
            &p,
            &[drive],
            &[0.0, 3000.0],
            &EvolveOptions::new(5).with_stepper(Stepper::adaptive(1e-12, 1e-12)),
        )
        .unwrap();
        worst = worst.max(traj.states[1].trace_distance(&ss));
    }
    let dt = t0.elapsed();
    outcome(worst < 1e-8 && within(dt, 60), format!("worst trace distance {worst:.2e} over 10 draws, {:.1} s", dt.as_secs_f64()))
}

fn quantum_regression() -> Outcome {
    // cavity ring-down from one photon
    let mut p = device();
    p.g = 0.0;
    let dims = HilbertDims::new(3).unwrap();
    let rho0 = DensityMatrix::basis(dims, 1, false);
    let trace = emission_correlation(&p, &rho0, 25.0 / p.angular().kappa, 4096).unwrap();
    let s = power_spectrum(&trace).unwrap().window(-150.0, 150.0);
    let fwhm = fit_lorentzian(&s.axis, &s.values).unwrap().get("fwhm").unwrap();
    let fwhm_ok = ((fwhm - 28.0) / 28.0).abs() <= 0.02;

    // F(0) of the driven stationary correlation
    let drive = DriveSpec::cw(Carrier::CavityDetuning(0.0), DrivePower::Waveguide(5e-9));
    let opts = qdswitch::spectra::CorrelationOptions::auto(&p, 0.0, 6);
    let f = qdswitch::spectra::two_time_correlation(&p, &drive, &opts).unwrap();
    let ops = SystemOperators::<f64>::new(HilbertDims::new(6).unwrap());
    let l = liouvillian_for_amplitude(&ops, &p, drive.peak_amplitude(&p).unwrap(), 0.0);
    let n = steady_state(&l).unwrap().0.expect(&ops.n_cav).unwrap().re;
    let err = (f.values[0].re - n).abs().max(f.values[0].im.abs());
    outcome(fwhm_ok && err < 1e-10, format!("empty-cavity FWHM {fwhm:.3} GHz, |F(0) - n_ss| = {err:.1e}"))
}

fn stark_pipeline() -> (Outcome, Outcome) {
    let t0 = Instant::now();
    let p = device().with_qd_detuning(-55.0);
    let opts = StarkOptions { n_fock: 10, reference_photons: 1e-4, check_truncation: false };
    let weak = [5e-7, 1e-6, 2e-6];
    let curve = stark_shift_vs_power(&p, &weak, &opts).unwrap();
    let mut worst: f64 = 0.0;
    let mut ratios = Vec::new();
    for pt in &curve.points {
        let d = stark_shift_dispersive(pt.n_cav, &p, 55.0).unwrap();
        ratios.push(pt.shift / d);
        worst = worst.max((pt.shift / d - 1.0).abs());
    }
    let shift = outcome(
        worst <= 0.10,
        format!("master-equation / dispersive shift ratios {:?} (worst deviation {:.1}%)", fmt(&ratios), 100.0 * worst),
    );

    let eo = EtaOptions { stark: StarkOptions { n_fock: 6, reference_photons: 1e-4, check_truncation: false }, ..Default::default() };
    let powers = [2e-6, 5e-6, 1e-5];
    let eta = match stark_shift_vs_power(&p, &powers, &eo.stark).and_then(|c| {
        let measured: Vec<(f64, f64)> = powers.iter().copied().zip(c.shifts()).collect();
        estimate_eta(&measured, &p, &eo)
    }) {
        Ok(fit) => {
            let e = fit.get("eta").unwrap();
            let rel = (e - p.eta) / p.eta;
            let dt = t0.elapsed();
            outcome(rel.abs() <= 0.05 && within(dt, 300), format!("eta {e:.4e} vs {:.1e} ({:+.2}%), {:.1} s", p.eta, 100.0 * rel, dt.as_secs_f64()))
        }
        Err(e) => outcome(false, e.to_string()),
    };
    (shift, eta)
}

fn fmt(v: &[f64]) -> Vec<String> {
    v.iter().map(|x| format!("{x:.3}")).collect()
}

fn switching_algebra() -> Outcome {
    let ratio = switching_energy_from_e0(1.0f64);
    let exact = ratio == 10f64.sqrt() - 1.0;
    let energies: Vec<f64> = (0..30).map(|k| 0.5 * 1.2f64.powi(k)).collect();
    let e0 = 6.47;
    let clean = switching_curve_model(&energies, e0).unwrap().rho;
    let noiseless = fit_switching_curve(&energies, &clean).unwrap().get("e0").unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let noise = rand_distr::Normal::new(0.0, 0.05).unwrap();
    let noisy: Vec<f64> = clean.iter().map(|r| r * (1.0 + rng.sample(noise))).collect();
    let noisy_fit = fit_switching_curve(&energies, &noisy).unwrap().get("e0").unwrap();
    let reported = (switching_energy_from_e0(e0) * 10.0).round() / 10.0;
    let ok = exact && ((noiseless - e0) / e0).abs() <= 1e-6 && ((noisy_fit - e0) / e0).abs() <= 0.10 && reported == 14.0;
    outcome(
        ok,
        format!(
            "ratio {ratio:.12}, E0 noiseless {noiseless:.8} / 5% noise {noisy_fit:.3} aJ, E_switch {:.3} -> {reported:.1} aJ",
            switching_energy_from_e0(e0)
        ),
    )
}

fn detuning_dependence() -> Outcome {
    let cfg = Config::paper_defaults();
    let p = cfg.device.params();
    let grid_cfg = cfg.scenarios.switching_energy_vs_detuning.detuning_ghz;
    let grid = grid_cfg.points().unwrap();
    let rows = switching_energy_vs_detuning(&p, &grid, &cfg.drives.control).unwrap();
    let arg = rows.iter().min_by(|a, b| a.1.partial_cmp(&b.1).unwrap()).unwrap().0;
    let lower = p.qd_detuning() - polariton_modes(&p, p.qd_detuning())[0].center;
    outcome(
        (arg - lower).abs() <= grid_cfg.step + 1e-9,
        format!("argmin {arg:.2} GHz, lower polariton {lower:.3} GHz below the QD, step {}", grid_cfg.step),
    )
}

fn dissipation() -> Outcome {
    let b = dissipation_bound(14.0, &device()).unwrap();
    let ok = (b.coupled_fraction - 0.36).abs() <= 0.02 && (b.e_dis - 5.0).abs() <= 0.5;
    outcome(ok, format!("coupled fraction {:.4}, E_dis {:.3} aJ", b.coupled_fraction, b.e_dis))
}

fn pump_probe() -> Outcome {
    let t0 = Instant::now();
    let p = device();
    let (signal, control) = paper_pump_probe_drives(&p, 14.0, 0.01, 76.3);
    let delays: Vec<f64> = (-40..=40).map(|k| 10.0 * k as f64).collect();
    let scan = pump_probe_scan(&p, &signal, &control, &delays, &PumpProbeOptions::new(PumpProbeMode::Adiabatic)).unwrap();
    let dt = t0.elapsed();
    let i_max = scan.intensity.iter().copied().fold(f64::MIN, f64::max);
    let at_zero = scan.intensity[40];
    let far = scan.intensity[0].max(scan.intensity[80]);
    let fwhm = fit_gaussian(&scan.delays, &scan.intensity).ok().and_then(|f| f.get("fwhm")).unwrap_or(f64::NAN);
    let c = contrast(1.0, 0.56).unwrap();
    let ok = at_zero == i_max && at_zero > far && (80.0..=160.0).contains(&fwhm) && c == 1.0 - 0.56 && within(dt, 600);
    outcome(ok, format!("peak at 0 ps ({}), Gaussian FWHM {fwhm:.1} ps, contrast(1, 0.56) = {c}, {:.1} s", at_zero == i_max, dt.as_secs_f64()))
}

fn defects_of(v: &Value) -> Option<StateDefects<f64>> {
    let d = v.get("state_defects")?;
    Some(StateDefects {
        trace_error: d["trace_error"].as_f64()?,
        hermiticity_error: d["hermiticity_error"].as_f64()?,
        min_eigenvalue: d["min_eigenvalue"].as_f64()?,
    })
}

fn state_validity() -> Outcome {
    // every scenario on reduced grids, plus the full master-equation pump-probe;
    // the others never build a density matrix
    let small: &[(&str, &[&str])] = &[
        ("anticrossing", &["scenarios.anticrossing.temperature_k.step=5"]),
        ("doublet", &[]),
        ("stark_vs_power", &["scenarios.stark_vs_power.p_inc_w=[0, 5e-6, 2e-5]", "numerics.n_fock_cw=8"]),
        ("switching_curves", &["scenarios.switching_curves.n_energies=8"]),
        ("switching_energy_vs_detuning", &[]),
        ("pump_probe", &["scenarios.pump_probe.delay_ps.step=100"]),
        ("fit", &["scenarios.fit.include_eta=false"]),
    ];
    let mut checked = 0;
    let mut problems = Vec::new();
    let mut run_one = |name: &str, o: &[&str]| {
        let dir = tempfile::tempdir().unwrap();
        match run(name, o, dir.path()) {
            Err(e) => problems.push(format!("{name}: {e}")),
            Ok(()) => {
                if let Ok(bytes) = std::fs::read(dir.path().join("summary.json")) {
                    let s: Value = serde_json::from_slice(&bytes).unwrap();
                    if let Some(d) = defects_of(&s) {
                        checked += 1;
                        if !d.is_physical() {
                            problems.push(format!("{name}: {d:?}"));
                        }
                    }
                }
            }
        }
    };
    for name in SCENARIOS.iter().map(|s| s.0) {
        let o = small.iter().find(|s| s.0 == name).map(|s| s.1).unwrap_or(&[]);
        run_one(name, o);
    }
    run_one(
        "pump_probe",
        &["scenarios.pump_probe.mode=full_mastereq", "numerics.n_fock_pulsed=6", "scenarios.pump_probe.delay_ps.step=100"],
    );
    outcome(
        problems.is_empty() && checked >= 2,
        if problems.is_empty() { format!("all scenarios ran; {checked} density-matrix sweeps (Stark, full pump-probe) physical") } else { problems.join("; ") },
    )
}

fn determinism() -> Outcome {
    let o = [
        "scenarios.pump_probe.mode=full_mastereq",
        "numerics.n_fock_pulsed=4",
        "numerics.stepper={\"kind\":\"fixed\",\"h_ps\":0.5}",
        "scenarios.pump_probe.delay_ps={\"start\":-100,\"stop\":100,\"step\":50}",
    ];
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    if let Err(e) = run("pump_probe", &o, a.path()).and_then(|_| run("pump_probe", &o, b.path())) {
        return outcome(false, e);
    }
    let read = |d: &Path, f: &str| std::fs::read(d.join(f)).unwrap();
    let same = ["pump_probe.csv", "summary.json", "manifest.json"].iter().all(|f| read(a.path(), f) == read(b.path(), f));
    outcome(same, "two fixed-step full master-equation runs compared byte for byte")
}

fn main() {
    let (c5a, c5b) = stark_pipeline();
    let results = [
        ("1  vacuum-Rabi doublet", vacuum_rabi_doublet()),
        ("2  anticrossing", anticrossing()),
        ("3  steady-state oracle", steady_state_oracle()),
        ("4  quantum regression", quantum_regression()),
        ("5a Stark shift vs dispersive kernel", c5a),
        ("5b eta round trip", c5b),
        ("6  switching algebra", switching_algebra()),
        ("7  detuning dependence", detuning_dependence()),
        ("8  dissipation bound", dissipation()),
        ("9  pump-probe", pump_probe()),
        ("10 state validity", state_validity()),
        ("11 determinism", determinism()),
    ];
    let mut failed = 0;
    for (name, o) in &results {
        println!("{} criterion {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
