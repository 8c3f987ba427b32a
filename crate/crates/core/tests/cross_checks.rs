//! Independent routes to the same physics must agree.

use approx::assert_relative_eq;
use num_complex::Complex64;

use qdswitch::fitting::fit_lorentzian;
use qdswitch::lindblad::{liouvillian_for_amplitude, steady_state, DensityMatrix};
use qdswitch::operators::{HilbertDims, SystemOperators};
use qdswitch::params::{Carrier, DriveSpec};
use qdswitch::spectra::{
    cavity_population, emission_correlation, polariton_modes, power_spectrum, transmission_amplitude,
    two_time_correlation, CorrelationOptions,
};
use qdswitch::DeviceParams;

fn device(detuning: f64) -> DeviceParams {
    DeviceParams::reference_device().with_qd_detuning(detuning)
}

/// Weak-drive steady state ⟨b⟩ times the linear-response denominator is the
/// same complex constant at every drive frequency.
#[test]
fn weak_drive_steady_state_follows_linear_response() {
    let p = device(-20.0);
    let ops = SystemOperators::<f64>::new(HilbertDims::new(4).unwrap());
    let eps = 0.05;
    let kpar = p.angular().kappa_par;
    let mut reference: Option<Complex64> = None;
    for w in [-40.0, -20.0, -9.0, 0.0, 7.5, 30.0] {
        let l = liouvillian_for_amplitude(&ops, &p, eps, w);
        let (rho, _) = steady_state(&l).unwrap();
        let b = rho.expect(&ops.b).unwrap();
        assert_relative_eq!(b.norm_sqr(), cavity_population(&p, w) * eps * eps, max_relative = 1e-4);
        // t = 1 − κ‖/z  ⇒  z = κ‖/(1 − t)
        let z = Complex64::new(kpar, 0.0) / (Complex64::new(1.0, 0.0) - transmission_amplitude(&p, w));
        let c = b * z / (kpar.sqrt() * eps);
        assert_relative_eq!(c.norm(), 1.0, max_relative = 1e-4);
        match reference {
            None => reference = Some(c),
            Some(r) => assert!((c - r).norm() < 1e-4, "{c} vs {r}"),
        }
    }
}

/// The coherence block between |0,g⟩ and the single-excitation manifold of
/// the undriven Liouvillian carries the polariton eigenvalues.
#[test]
fn liouvillian_spectrum_contains_polaritons() {
    for d in [0.0, -15.0, 40.0] {
        let p = device(d);
        let ops = SystemOperators::<f64>::new(HilbertDims::new(3).unwrap());
        let l = liouvillian_for_amplitude(&ops, &p, 0.0, 0.0);
        let ev = l.superoperator().schur().unpack().1.diagonal();
        let two_pi = 2.0 * std::f64::consts::PI;
        for m in polariton_modes(&p, d) {
            // ρ_{1,0} ∝ e^{−i ω t − Γ t/2}: eigenvalue −i2πf − πΓ
            let target = Complex64::new(-std::f64::consts::PI * m.linewidth, -two_pi * m.center);
            let best = ev.iter().map(|z| (z - target).norm()).fold(f64::INFINITY, f64::min);
            assert!(best < 1e-8 * target.norm(), "detuning {d}: mode {m:?} missing ({best})");
        }
    }
}

/// Ring-down of one cavity photon with the QD removed: Lorentzian of width κ.
#[test]
fn empty_cavity_emission_is_lorentzian() {
    let mut p = device(0.0);
    p.g = 0.0;
    let dims = HilbertDims::new(3).unwrap();
    let rho0 = DensityMatrix::basis(dims, 1, false);
    let kappa_ang = p.angular().kappa;
    let trace = emission_correlation(&p, &rho0, 25.0 / kappa_ang, 4096).unwrap();
    let s = power_spectrum(&trace).unwrap().window(-150.0, 150.0);
    let fit = fit_lorentzian(&s.axis, &s.values).unwrap();
    assert_relative_eq!(fit.get("fwhm").unwrap(), p.kappa, max_relative = 0.02);
    assert!(fit.get("center").unwrap().abs() < 0.1);
}

/// F(0) of the full driven correlation is the steady-state photon number,
/// and the spectrum integrates back to it.
#[test]
fn correlation_at_zero_delay_is_population() {
    let p = device(-30.0);
    let drive = DriveSpec::cw_amplitude(Carrier::CavityDetuning(0.0), 3.0, &p);
    let opts = CorrelationOptions::auto(&p, 0.0, 6);
    let trace = two_time_correlation(&p, &drive, &opts).unwrap();
    let ops = SystemOperators::<f64>::new(HilbertDims::new(6).unwrap());
    let l = qdswitch::lindblad::build_liouvillian(&ops, &p, &drive).unwrap();
    let (rho, _) = steady_state(&l).unwrap();
    let n = rho.expect(&ops.n_cav).unwrap().re;
    assert!((trace.values[0].re - n).abs() < 1e-10);
    assert!(trace.values[0].im.abs() < 1e-10);
}
