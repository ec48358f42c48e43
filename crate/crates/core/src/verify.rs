//! End-to-end consistency checks connecting the propagation engine to the
//! independent reference solvers and the analytic kernel identities. Each
//! check is self-contained, returns a pass/fail report with the measured
//! numbers, and is cheap enough to run routinely.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kernels::{free_propagator, sigma_r};
use crate::lattice::{group_velocity, LatticeSpec, PlaneWaveSource};
use crate::oracle::{
    crank_nicolson_bigbox, keldysh_direct, transfer_matrix_transmission, BigBoxConfig,
};
use crate::potentials::{sample_potential, DipoleMode, PotentialSpec, PulseSpec, TabulatedPotential};
use crate::propagate::{evolve, DensityRecord, Mode, RunConfig};

/// Outcome of one verification scenario.
#[derive(Debug, Clone)]
pub struct CheckReport {
    pub name: &'static str,
    pub pass: bool,
    pub details: String,
}

impl CheckReport {
    fn measured(name: &'static str, pass: bool, details: String) -> Self {
        CheckReport { name, pass, details }
    }

    fn failed(name: &'static str, err: &Error) -> Self {
        CheckReport { name, pass: false, details: format!("did not run: {err}") }
    }
}

fn xorshift(state: &mut u64) -> f64 {
    *state ^= *state << 13;
    *state ^= *state >> 7;
    *state ^= *state << 17;
    (*state >> 11) as f64 / (1u64 << 53) as f64
}

fn max_abs_dev_from_unity(rec: &DensityRecord) -> f64 {
    rec.n.iter().flatten().map(|&x| (x - 1.0).abs()).fold(0.0, f64::max)
}

/// A free plane wave must cross the open boundaries without any visible
/// reflection: the scattered part stays identically zero and the density
/// never leaves 1 beyond roundoff.
pub fn check_transparent_boundaries() -> CheckReport {
    const NAME: &str = "transparent-boundaries";
    let run = || -> Result<f64> {
        let lat = LatticeSpec::new(1.0, 1.0, 200)?;
        let src = PlaneWaveSource::new(&lat, 1.0)?;
        let cfg = RunConfig::new(lat, src, PotentialSpec::None, 0.05, 4000, 1, None)?;
        let (rec, _) = evolve(&cfg)?;
        Ok(max_abs_dev_from_unity(&rec))
    };
    match run() {
        Ok(worst) => CheckReport::measured(
            NAME,
            worst <= 1e-13,
            format!("max |n - 1| = {worst:.3e} over 201 sites x 4001 steps (tolerance 1e-13)"),
        ),
        Err(e) => CheckReport::failed(NAME, &e),
    }
}

/// Retarded surface Green function continued to real energies outside the
/// band, on the branch that decays away from the band.
fn surface_gf_continued(d: f64, e: f64) -> Complex64 {
    let c = 1.0 - e / (2.0 * d);
    if c > 1.0 {
        Complex64::new(-(c - (c * c - 1.0).sqrt()) / d, 0.0)
    } else if c < -1.0 {
        Complex64::new(-(c + (c * c - 1.0).sqrt()) / d, 0.0)
    } else {
        Complex64::new(-c / d, -(1.0 - c * c).sqrt() / d)
    }
}

/// The time-domain memory kernel must be the inverse Fourier transform of
/// the energy-domain surface Green function (times d^2). The slowly
/// decaying 1/E part of the spectrum is subtracted and transformed in
/// closed form; the remainder decays like E^-3 and is integrated by a
/// plain trapezoid over a wide window.
pub fn check_kernel_fourier() -> CheckReport {
    const NAME: &str = "kernel-fourier";
    let d: f64 = 0.5;
    let e_cut = 200.0 * d;
    let panels = 1 << 16;
    let de = 2.0 * e_cut / panels as f64;
    let z0 = Complex64::new(2.0 * d, -2.0 * d);

    // Subtracted spectrum samples, with trapezoid end weights folded in.
    let samples: Vec<(f64, Complex64)> = (0..=panels)
        .map(|m| {
            let e = -e_cut + de * m as f64;
            let f = d * d * surface_gf_continued(d, e);
            let h1 = d * d / (Complex64::new(e, 0.0) - z0);
            let h2 = 2.0 * Complex64::i() * d.powi(3) / (Complex64::new(e, 0.0) - z0).powi(2);
            let w = if m == 0 || m == panels { 0.5 } else { 1.0 };
            (e, w * (f - h1 - h2))
        })
        .collect();

    let mut worst = 0.0f64;
    for i in 1..=50 {
        let tau = i as f64 * (20.0 / d) / 50.0;
        let mut acc = Complex64::new(0.0, 0.0);
        for &(e, f) in &samples {
            acc += f * Complex64::from_polar(1.0, -e * tau);
        }
        let numeric = acc * de / (2.0 * PI);
        let decay = Complex64::from_polar(1.0, -2.0 * d * tau) * (-2.0 * d * tau).exp();
        let analytic =
            -Complex64::i() * d * d * decay - 2.0 * Complex64::i() * d.powi(3) * tau * decay;
        let err = (numeric + analytic - sigma_r(d, tau)).norm();
        worst = worst.max(err);
    }
    CheckReport::measured(
        NAME,
        worst <= 1e-4,
        format!("max |kernel - inverse transform| = {worst:.3e} at 50 times (tolerance 1e-4)"),
    )
}

/// A barrier ramped on and then held must settle to the steady state whose
/// transmitted density equals the static transmission coefficient.
pub fn check_barrier_transmission() -> CheckReport {
    const NAME: &str = "barrier-transmission";
    let run = || -> Result<(f64, f64)> {
        let lat = LatticeSpec::new(1.0, 1.0, 200)?;
        let e = 0.4;
        let src = PlaneWaveSource::new(&lat, e)?;
        let u0 = 0.15;
        let pot = PotentialSpec::SquareBarrier {
            u0,
            j_lo: 80,
            j_hi: 120,
            t_on: 0.0,
            t_off: 4200.0,
            ramp: 20.0,
        };
        let mut barrier = vec![0.0; lat.n_sites()];
        for u in barrier.iter_mut().take(121).skip(80) {
            *u = u0;
        }
        let t_exact = transfer_matrix_transmission(&lat, &barrier, e)?;

        // The switch-on rings the band edges; the resulting beat against the
        // transmitted wave dies off slowly (around 2e-3 at three traversals
        // of the region, t = 750, and under 1e-3 only from roughly t = 1500
        // on). The comparison window starts once that ringing has decayed.
        let cfg = RunConfig::new(lat, src, pot, 0.0125, 160_000, 100, None)?;
        let (rec, _) = evolve(&cfg)?;
        let m = rec.sites.len() - 1;
        let worst = rec
            .times
            .iter()
            .zip(&rec.n)
            .filter(|(t, _)| **t >= 1500.0)
            .map(|(_, row)| (row[m] - t_exact).abs())
            .fold(0.0, f64::max);
        Ok((worst, t_exact))
    };
    match run() {
        Ok((worst, t_exact)) => CheckReport::measured(
            NAME,
            worst <= 1e-3,
            format!(
                "max |n_M - T| = {worst:.3e} for t in [1500, 2000], T = {t_exact:.6} \
                 (tolerance 1e-3)"
            ),
        ),
        Err(e) => CheckReport::failed(NAME, &e),
    }
}

fn windowed_barrier_cfg(dt: f64, n_steps: usize, stride: usize) -> Result<RunConfig> {
    let lat = LatticeSpec::new(1.0, 1.0, 120)?;
    let src = PlaneWaveSource::new(&lat, 1.0)?;
    let pot = PotentialSpec::SquareBarrier {
        u0: 0.1,
        j_lo: 40,
        j_hi: 80,
        t_on: 0.0,
        t_off: 15.0,
        ramp: 5.0,
    };
    RunConfig::new(lat, src, pot, dt, n_steps, stride, None)
}

/// The engine must agree with a literal large-box evolution of the same
/// scenario, where the boundaries are far enough away that hard walls act
/// like no boundaries at all.
pub fn check_bigbox_agreement() -> CheckReport {
    const NAME: &str = "bigbox-agreement";
    let run = || -> Result<f64> {
        let cfg = windowed_barrier_cfg(0.01, 3000, 10)?;
        let (rec_e, _) = evolve(&cfg)?;

        let lat = LatticeSpec::new(1.0, 1.0, 120)?;
        let src = PlaneWaveSource::new(&lat, 1.0)?;
        let v = group_velocity(&lat, src.energy())?;
        let t_end = 3000.0 * 0.01;
        let pad = (1.5 * v * t_end / lat.a()).ceil() as usize + 3;
        let big = BigBoxConfig {
            lat,
            src,
            pot: cfg.pot().clone(),
            pad_sites: pad,
            dt: 0.01,
            n_steps: 3000,
            record_stride: 10,
        };
        let rec_b = crank_nicolson_bigbox(&big)?;

        assert_eq!(rec_e.times.len(), rec_b.times.len());
        let mut num = 0.0;
        let mut den = 0.0;
        for (row_e, row_b) in rec_e.n.iter().zip(&rec_b.n) {
            for (a, b) in row_e.iter().zip(row_b) {
                num += (a - b) * (a - b);
                den += b * b;
            }
        }
        Ok((num / den).sqrt())
    };
    match run() {
        Ok(rel) => CheckReport::measured(
            NAME,
            rel <= 1e-3,
            format!("relative L2 density difference = {rel:.3e} (tolerance 1e-3)"),
        ),
        Err(e) => CheckReport::failed(NAME, &e),
    }
}

/// The engine's reduced single-trajectory evolution must coincide with the
/// brute-force two-time assembly on a tiny instance with a random smooth
/// interior potential.
pub fn check_two_time_agreement() -> CheckReport {
    const NAME: &str = "two-time-agreement";
    let run = || -> Result<f64> {
        let m = 6;
        let n_steps = 40;
        let dt = 0.05;
        let lat = LatticeSpec::new(1.0, 1.0, m)?;
        let src = PlaneWaveSource::new(&lat, 1.1)?;

        let mut state = 0x1357_9bdf_2468_ace0u64;
        let rows: Vec<(f64, f64, f64)> = (0..=m)
            .map(|_| {
                (
                    xorshift(&mut state) - 0.5,
                    xorshift(&mut state) - 0.5,
                    2.0 * PI * xorshift(&mut state),
                )
            })
            .collect();
        let values: Vec<Vec<f64>> = (0..=m)
            .map(|j| {
                (0..=n_steps)
                    .map(|k| {
                        if j == 0 || j == m {
                            return 0.0;
                        }
                        let t = k as f64 * dt;
                        let (a, b, phase) = rows[j];
                        a * (2.3 * t + phase).sin() + b * (0.9 * t).cos()
                    })
                    .collect()
            })
            .collect();
        let pot = PotentialSpec::Tabulated(TabulatedPotential::from_samples(m, dt, values)?);

        let oracle = keldysh_direct(&lat, &src, &pot, dt, n_steps)?;
        let cfg = RunConfig::new(lat, src, pot, dt, n_steps, 1, None)?;
        let (rec, _) = evolve(&cfg)?;

        let mut worst = 0.0f64;
        for (row_e, row_o) in rec.n.iter().zip(&oracle) {
            for (a, b) in row_e.iter().zip(row_o) {
                worst = worst.max((a - b).abs());
            }
        }
        Ok(worst)
    };
    match run() {
        Ok(worst) => CheckReport::measured(
            NAME,
            worst <= 1e-8,
            format!("max |n_engine - n_two_time| = {worst:.3e} (tolerance 1e-8)"),
        ),
        Err(e) => CheckReport::failed(NAME, &e),
    }
}

// One carrier cycle per envelope: the phi = 0 waveform then carries a net
// impulse while phi = pi/2 integrates to zero, which is the strongest
// possible carrier-envelope contrast for this envelope. The beam sits well
// below band center: there the dispersion is curved, so the phase profile
// the pulse imprints on the passing wave actually converts into density
// fluctuations (at E = 2d the lattice dispersion is locally antisymmetric
// and the conversion is suppressed to third order).
fn cep_run(eps0: f64, phi: f64) -> Result<DensityRecord> {
    let lat = LatticeSpec::new(1.0, 1.0, 30)?;
    let src = PlaneWaveSource::new(&lat, 0.25)?;
    let pulse = PulseSpec::new(eps0, PI / 4.0, phi, 8.0, 30.0)?;
    let pot = PotentialSpec::LaserPulse { pulse, mode: DipoleMode::LineIntegral };
    let cfg = RunConfig::new(lat, src, pot, 0.02, 5000, 5, None)?;
    Ok(evolve(&cfg)?.0)
}

/// A few-cycle pulse crossing an electron beam must produce density
/// fluctuations that depend on the carrier-envelope phase, leave the
/// illuminated region after the pulse, and vanish with the field.
pub fn check_laser_cep_response() -> CheckReport {
    const NAME: &str = "laser-cep";
    let run = || -> Result<(f64, f64, f64, f64)> {
        // Calibrate the field so the strongest scalar potential is half the
        // beam energy. The potential scales linearly with eps0.
        let lat = LatticeSpec::new(1.0, 1.0, 30)?;
        let probe = PotentialSpec::LaserPulse {
            pulse: PulseSpec::new(1.0, PI / 4.0, 0.0, 8.0, 30.0)?,
            mode: DipoleMode::LineIntegral,
        };
        let mut max_u = 0.0f64;
        for k in 0..=2000 {
            let t = 8.0 * k as f64 / 2000.0;
            for j in 0..=30 {
                max_u = max_u.max(sample_potential(&probe, &lat, j, t).abs());
            }
        }
        let eps0 = 0.5 * 0.25 / max_u;

        let rec_a = cep_run(eps0, 0.0)?;
        let rec_b = cep_run(eps0, PI / 2.0)?;
        let cep_diff = rec_a
            .n
            .iter()
            .flatten()
            .zip(rec_b.n.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);

        let m = rec_a.sites.len() - 1;
        let edge_after_pulse = rec_a
            .times
            .iter()
            .zip(&rec_a.n)
            .filter(|(t, _)| **t > 8.0)
            .map(|(_, row)| (row[0] - 1.0).abs().max((row[m] - 1.0).abs()))
            .fold(0.0, f64::max);

        let rec_off = cep_run(0.0, 0.0)?;
        let dark = max_abs_dev_from_unity(&rec_off);
        Ok((eps0, cep_diff, edge_after_pulse, dark))
    };
    match run() {
        Ok((eps0, cep_diff, edge, dark)) => CheckReport::measured(
            NAME,
            cep_diff > 0.01 && edge > 0.005 && dark <= 1e-13,
            format!(
                "eps0 = {eps0:.4}: phase-flip density difference = {cep_diff:.3e} (> 0.01), \
                 edge |n-1| after pulse = {edge:.3e} (> 0.005), \
                 dark run max |n-1| = {dark:.3e} (<= 1e-13)"
            ),
        ),
        Err(e) => CheckReport::failed(NAME, &e),
    }
}

/// An interior pulsed barrier evolves identically (up to discretization)
/// whether the potential sits in the Hamiltonian or is rotated into bond
/// phases; the two runs must agree at matched steps.
pub fn check_gauge_direct_agreement() -> CheckReport {
    const NAME: &str = "gauge-direct";
    let run = || -> Result<f64> {
        let lat = LatticeSpec::new(1.0, 1.0, 40)?;
        let src = PlaneWaveSource::new(&lat, 1.0)?;
        let pot = PotentialSpec::SquareBarrier {
            u0: 0.05,
            j_lo: 8,
            j_hi: 32,
            t_on: 0.0,
            t_off: 8.0,
            ramp: 3.0,
        };
        let n_steps = 10_000;
        let dt = 0.0008;
        let direct = RunConfig::new(lat, src, pot.clone(), dt, n_steps, 100, Some(Mode::Direct))?;
        let gauge = RunConfig::new(lat, src, pot, dt, n_steps, 100, Some(Mode::Gauge))?;
        let (rec_d, _) = evolve(&direct)?;
        let (rec_g, _) = evolve(&gauge)?;
        let worst = rec_d
            .n
            .iter()
            .flatten()
            .zip(rec_g.n.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        Ok(worst)
    };
    match run() {
        Ok(worst) => CheckReport::measured(
            NAME,
            worst <= 1e-6,
            format!("max |n_direct - n_gauge| = {worst:.3e} at matched steps (tolerance 1e-6)"),
        ),
        Err(e) => CheckReport::failed(NAME, &e),
    }
}

/// Halving dt twice on the windowed-barrier scenario must shrink the
/// solution change by the square of the step ratio.
pub fn check_time_step_order() -> CheckReport {
    const NAME: &str = "time-step-order";
    let run = || -> Result<(f64, f64, f64)> {
        let l2 = |a: &DensityRecord, b: &DensityRecord| -> f64 {
            let mut acc = 0.0;
            for (ra, rb) in a.n.iter().zip(&b.n) {
                for (x, y) in ra.iter().zip(rb) {
                    acc += (x - y) * (x - y);
                }
            }
            acc.sqrt()
        };
        let (coarse, _) = evolve(&windowed_barrier_cfg(0.04, 750, 25)?)?;
        let (mid, _) = evolve(&windowed_barrier_cfg(0.02, 1500, 50)?)?;
        let (fine, _) = evolve(&windowed_barrier_cfg(0.01, 3000, 100)?)?;
        let e1 = l2(&coarse, &mid);
        let e2 = l2(&mid, &fine);
        Ok(((e1 / e2).log2(), e1, e2))
    };
    match run() {
        Ok((order, e1, e2)) => CheckReport::measured(
            NAME,
            (1.7..=2.3).contains(&order),
            format!(
                "observed order = {order:.3} from step-halving distances {e1:.3e} -> {e2:.3e} \
                 (expected 1.7..2.3)"
            ),
        ),
        Err(e) => CheckReport::failed(NAME, &e),
    }
}

/// The free lattice propagator must conserve probability at any time and
/// collapse to -i on the diagonal at zero time separation.
pub fn check_free_propagator() -> CheckReport {
    const NAME: &str = "free-propagator";
    let mut state = 0xfeed_f00d_dead_beefu64;
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let d = 0.1 + 1.9 * xorshift(&mut state);
        let tau = 0.05 + 29.95 * xorshift(&mut state);
        let n_max = (2.0 * tau * d).ceil() as i64 + 80;
        let mut sum = free_propagator(d, 0, tau).norm_sqr();
        for n in 1..=n_max {
            sum += 2.0 * free_propagator(d, n, tau).norm_sqr();
        }
        worst = worst.max((sum - 1.0).abs());

        for n in 0..=3 {
            let limit = if n == 0 { Complex64::new(0.0, -1.0) } else { Complex64::new(0.0, 0.0) };
            worst = worst.max((free_propagator(d, n, 0.0) - limit).norm());
        }
    }
    CheckReport::measured(
        NAME,
        worst <= 1e-10,
        format!(
            "worst probability-sum and zero-time-limit deviation = {worst:.3e} over 20 seeded \
             pairs (tolerance 1e-10)"
        ),
    )
}

/// Names accepted by [`suite`].
pub const SUITE_NAMES: &[&str] =
    &["all", "kernels", "transparency", "barrier", "bigbox", "keldysh", "gauge"];

type CheckFn = fn() -> CheckReport;

const ALL_CHECKS: &[CheckFn] = &[
    check_transparent_boundaries,
    check_kernel_fourier,
    check_barrier_transmission,
    check_bigbox_agreement,
    check_two_time_agreement,
    check_laser_cep_response,
    check_gauge_direct_agreement,
    check_time_step_order,
    check_free_propagator,
];

fn suite_members(name: &str) -> Result<Vec<CheckFn>> {
    match name {
        "all" => Ok(ALL_CHECKS.to_vec()),
        "kernels" => Ok(vec![check_kernel_fourier, check_free_propagator]),
        "transparency" => Ok(vec![check_transparent_boundaries]),
        "barrier" => Ok(vec![check_barrier_transmission]),
        "bigbox" => Ok(vec![check_bigbox_agreement, check_time_step_order]),
        "keldysh" => Ok(vec![check_two_time_agreement]),
        "gauge" => Ok(vec![check_laser_cep_response, check_gauge_direct_agreement]),
        other => Err(Error::Config(format!(
            "unknown verification suite '{other}'; valid names: {}",
            SUITE_NAMES.join(", ")
        ))),
    }
}

/// Runs every check once, in a fixed order.
pub fn all_checks() -> Vec<CheckReport> {
    ALL_CHECKS.iter().map(|f| f()).collect()
}

/// Runs a named group of checks.
pub fn suite(name: &str) -> Result<Vec<CheckReport>> {
    Ok(suite_members(name)?.into_iter().map(|f| f()).collect())
}
