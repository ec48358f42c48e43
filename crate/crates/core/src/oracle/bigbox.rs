use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{group_velocity, LatticeSpec, PlaneWaveSource};
use crate::potentials::{sample_potential, PotentialSpec};
use crate::propagate::DensityRecord;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Reference evolution in a literal large box: the scattering region plus
/// `pad_sites` free sites on each side, terminated by hard walls that the
/// run is too short to feel.
#[derive(Debug, Clone)]
pub struct BigBoxConfig {
    pub lat: LatticeSpec,
    pub src: PlaneWaveSource,
    pub pot: PotentialSpec,
    pub pad_sites: usize,
    pub dt: f64,
    pub n_steps: usize,
    pub record_stride: usize,
}

impl BigBoxConfig {
    fn validate(&self) -> Result<()> {
        if !self.dt.is_finite() || self.dt <= 0.0 {
            return Err(Error::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if self.n_steps == 0 || self.record_stride == 0 {
            return Err(Error::Config("n_steps and record_stride must be positive".into()));
        }
        self.pot.validate(&self.lat)?;
        if !self.pot.vanishes_at_boundaries(&self.lat) {
            return Err(Error::Config(
                "the big-box reference needs a potential supported strictly inside \
                 the scattering region"
                    .into(),
            ));
        }
        let v = group_velocity(&self.lat, self.src.energy())?;
        let t_end = self.n_steps as f64 * self.dt;
        let min_pad = (1.5 * v * t_end / self.lat.a()).ceil() as usize;
        if self.pad_sites < min_pad {
            return Err(Error::Config(format!(
                "pad_sites = {} lets wall reflections reach the scattering region \
                 within the run; need at least {min_pad}",
                self.pad_sites
            )));
        }
        Ok(())
    }
}

/// Solves the tridiagonal system (diag on the diagonal, constant `off` on
/// both off-diagonals) in place, overwriting `rhs` with the solution.
fn thomas_solve(diag: &[Complex64], off: Complex64, rhs: &mut [Complex64]) {
    let n = diag.len();
    let mut c_prime = vec![Complex64::new(0.0, 0.0); n];
    let mut denom = diag[0];
    c_prime[0] = off / denom;
    rhs[0] /= denom;
    for i in 1..n {
        denom = diag[i] - off * c_prime[i - 1];
        c_prime[i] = off / denom;
        rhs[i] = (rhs[i] - off * rhs[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        let next = rhs[i + 1];
        rhs[i] -= c_prime[i] * next;
    }
}

struct Box1D {
    pot_row: Vec<f64>,
    diag: Vec<Complex64>,
    rhs: Vec<Complex64>,
}

impl Box1D {
    fn new(n_tot: usize) -> Self {
        Box1D {
            pot_row: vec![0.0; n_tot],
            diag: vec![Complex64::new(0.0, 0.0); n_tot],
            rhs: vec![Complex64::new(0.0, 0.0); n_tot],
        }
    }

    /// One Crank-Nicolson step with the potential frozen at mid-step:
    /// (1 + i dt/2 H) psi_next = (1 - i dt/2 H) psi. Exactly norm-conserving
    /// and second order in dt.
    fn step(&mut self, cfg: &BigBoxConfig, psi: &mut [Complex64], step: usize) {
        let n_tot = psi.len();
        let d = cfg.lat.d();
        let m = cfg.lat.m_index() as i64;
        let pad = cfg.pad_sites as i64;
        let t_mid = (step as f64 + 0.5) * cfg.dt;
        for (g, u) in self.pot_row.iter_mut().enumerate() {
            let j = g as i64 - pad;
            *u = if (0..=m).contains(&j) {
                sample_potential(&cfg.pot, &cfg.lat, j as usize, t_mid)
            } else {
                0.0
            };
        }
        let half = 0.5 * cfg.dt;
        for g in 0..n_tot {
            let h_diag = 2.0 * d + self.pot_row[g];
            let left = if g > 0 { psi[g - 1] } else { Complex64::new(0.0, 0.0) };
            let right = if g + 1 < n_tot { psi[g + 1] } else { Complex64::new(0.0, 0.0) };
            let h_psi = h_diag * psi[g] - d * left - d * right;
            self.rhs[g] = psi[g] - I * half * h_psi;
            self.diag[g] = 1.0 + I * half * h_diag;
        }
        thomas_solve(&self.diag, -I * (half * d), &mut self.rhs);
        psi.copy_from_slice(&self.rhs);
    }
}

fn initial_wave(cfg: &BigBoxConfig) -> Vec<Complex64> {
    let pad = cfg.pad_sites as i64;
    let n_tot = (cfg.lat.m_index() as i64 + 2 * pad + 1) as usize;
    let ka = cfg.src.k() * cfg.lat.a();
    (0..n_tot)
        .map(|g| Complex64::from_polar(1.0, ka * (g as i64 - pad) as f64))
        .collect()
}

/// Crank-Nicolson evolution of a truncated plane wave on the padded box,
/// reported as densities on the scattering-region sites only.
pub fn crank_nicolson_bigbox(cfg: &BigBoxConfig) -> Result<DensityRecord> {
    cfg.validate()?;
    let m = cfg.lat.m_index();
    let pad = cfg.pad_sites;
    let mut psi = initial_wave(cfg);
    let mut worker = Box1D::new(psi.len());

    let region_density = |psi: &[Complex64]| -> Vec<f64> {
        (0..=m).map(|j| psi[j + pad].norm_sqr()).collect()
    };

    let sites: Vec<f64> = (0..=m).map(|j| cfg.lat.x(j)).collect();
    let mut times = vec![0.0];
    let mut n = vec![region_density(&psi)];

    for step in 0..cfg.n_steps {
        worker.step(cfg, &mut psi, step);
        if (step + 1) % cfg.record_stride == 0 || step + 1 == cfg.n_steps {
            times.push((step + 1) as f64 * cfg.dt);
            n.push(region_density(&psi));
        }
    }
    Ok(DensityRecord { times, sites, n })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base(m: usize, e: f64, pad: usize, dt: f64, n_steps: usize) -> BigBoxConfig {
        let lat = LatticeSpec::new(1.0, 1.0, m).unwrap();
        let src = PlaneWaveSource::new(&lat, e).unwrap();
        BigBoxConfig {
            lat,
            src,
            pot: PotentialSpec::None,
            pad_sites: pad,
            dt,
            n_steps,
            record_stride: n_steps,
        }
    }

    #[test]
    fn pad_invariant_names_the_minimum() {
        // v_g = 1 at E = 1, t_end = 20, so 30 sites of padding are needed.
        let cfg = base(40, 1.0, 10, 0.1, 200);
        let err = crank_nicolson_bigbox(&cfg).unwrap_err();
        let msg = format!("{err}");
        assert!(msg.contains("at least 30"), "message: {msg}");
        assert!(crank_nicolson_bigbox(&base(40, 1.0, 30, 0.1, 200)).is_ok());
    }

    #[test]
    fn laser_potential_is_rejected() {
        use crate::potentials::{DipoleMode, PulseSpec};
        let lat = LatticeSpec::new(1.0, 1.0, 40).unwrap();
        let src = PlaneWaveSource::new(&lat, 1.0).unwrap();
        let pulse = PulseSpec::new(0.01, 1.0, 0.0, 5.0, 40.0).unwrap();
        let cfg = BigBoxConfig {
            lat,
            src,
            pot: PotentialSpec::LaserPulse { pulse, mode: DipoleMode::LineIntegral },
            pad_sites: 200,
            dt: 0.05,
            n_steps: 100,
            record_stride: 100,
        };
        assert!(matches!(crank_nicolson_bigbox(&cfg), Err(Error::Config(_))));
    }

    #[test]
    fn norm_is_conserved_step_by_step() {
        let lat = LatticeSpec::new(1.0, 1.0, 30).unwrap();
        let src = PlaneWaveSource::new(&lat, 0.9).unwrap();
        let pot = PotentialSpec::SquareBarrier {
            u0: 0.4,
            j_lo: 10,
            j_hi: 20,
            t_on: 0.0,
            t_off: 10.0,
            ramp: 2.0,
        };
        let cfg = BigBoxConfig {
            lat,
            src,
            pot,
            pad_sites: 40,
            dt: 0.05,
            n_steps: 200,
            record_stride: 200,
        };
        cfg.validate().unwrap();
        let mut psi = initial_wave(&cfg);
        let mut worker = Box1D::new(psi.len());
        let norm0: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        for step in 0..cfg.n_steps {
            worker.step(&cfg, &mut psi, step);
            let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
            assert!(
                ((norm - norm0) / norm0).abs() < 1e-12,
                "step {step}: relative drift {}",
                (norm - norm0) / norm0
            );
        }
    }

    #[test]
    fn free_region_stays_near_unit_density() {
        // With no potential the only disturbance is the truncation at the
        // walls; the pad must keep it out of the reported region.
        let cfg = base(40, 1.0, 32, 0.05, 400);
        let rec = crank_nicolson_bigbox(&cfg).unwrap();
        let worst =
            rec.n.iter().flatten().map(|&x| (x - 1.0).abs()).fold(0.0f64, f64::max);
        assert!(worst < 1e-3, "free big-box deviation {worst}");
    }
}
