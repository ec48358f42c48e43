use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use crate::error::{Error, Result};
use crate::lattice::LatticeSpec;

/// Few-cycle laser pulse parameters. The field is
///   E(x,t) = eps0 cos(omega0 t + phi_cep) sin^2(pi t / T) sin^2(pi x / L)
/// inside the window [0,L] x [0,T] and zero outside.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseSpec {
    pub eps0: f64,
    pub omega0: f64,
    pub phi_cep: f64,
    pub duration: f64,
    pub length: f64,
}

impl PulseSpec {
    pub fn new(eps0: f64, omega0: f64, phi_cep: f64, duration: f64, length: f64) -> Result<Self> {
        if !eps0.is_finite() || eps0 < 0.0 {
            return Err(Error::Config(format!("pulse amplitude must be >= 0, got {eps0}")));
        }
        if !omega0.is_finite() || omega0 <= 0.0 {
            return Err(Error::Config(format!("carrier frequency must be > 0, got {omega0}")));
        }
        if !phi_cep.is_finite() {
            return Err(Error::Config(format!("carrier-envelope phase must be finite, got {phi_cep}")));
        }
        if !duration.is_finite() || duration <= 0.0 {
            return Err(Error::Config(format!("pulse duration must be > 0, got {duration}")));
        }
        if !length.is_finite() || length <= 0.0 {
            return Err(Error::Config(format!("pulse extent must be > 0, got {length}")));
        }
        Ok(Self { eps0, omega0, phi_cep, duration, length })
    }

    /// eps0 cos(omega0 t + phi) sin^2(pi t / T), zero outside [0, T].
    fn time_factor(&self, t: f64) -> f64 {
        if t <= 0.0 || t >= self.duration {
            return 0.0;
        }
        let env = (std::f64::consts::PI * t / self.duration).sin();
        self.eps0 * (self.omega0 * t + self.phi_cep).cos() * env * env
    }
}

/// How the scalar potential is obtained from the pulse field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DipoleMode {
    /// U(x,t) = -int_0^x E(x',t) dx', the length-gauge line integral.
    #[default]
    LineIntegral,
    /// U(x,t) = -int_0^x x' E(x',t) dx', keeping the extra x' weight.
    PositionWeighted,
}

pub fn laser_field(pulse: &PulseSpec, x: f64, t: f64) -> f64 {
    if x <= 0.0 || x >= pulse.length {
        return 0.0;
    }
    let env = (std::f64::consts::PI * x / pulse.length).sin();
    pulse.time_factor(t) * env * env
}

/// int_0^x sin^2(pi x'/L) dx' for x in [0, L].
fn envelope_antiderivative(l: f64, x: f64) -> f64 {
    x / 2.0 - l * (2.0 * std::f64::consts::PI * x / l).sin() / (4.0 * std::f64::consts::PI)
}

/// int_0^x x' sin^2(pi x'/L) dx' for x in [0, L].
fn weighted_antiderivative(l: f64, x: f64) -> f64 {
    let beta = 2.0 * std::f64::consts::PI / l;
    x * x / 4.0 - 0.5 * (x * (beta * x).sin() / beta + ((beta * x).cos() - 1.0) / (beta * beta))
}

/// Scalar potential of the pulse in dipole approximation. Constant in x
/// beyond the illuminated region (x >= L), where it keeps oscillating in t.
pub fn dipole_potential(pulse: &PulseSpec, mode: DipoleMode, x: f64, t: f64) -> f64 {
    assert!(x >= 0.0, "dipole potential is defined for x >= 0, got {x}");
    let ft = pulse.time_factor(t);
    if ft == 0.0 {
        return 0.0;
    }
    let xc = x.min(pulse.length);
    let integral = match mode {
        DipoleMode::LineIntegral => envelope_antiderivative(pulse.length, xc),
        DipoleMode::PositionWeighted => weighted_antiderivative(pulse.length, xc),
    };
    -ft * integral
}

/// Dense potential samples on the (site, time-step) grid, with linear
/// interpolation in t. Zero before t = 0 and after the last stored step.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedPotential {
    m_index: usize,
    dt: f64,
    /// values[j][k] = U at site j, time k*dt; each row has n_steps+1 entries.
    values: Vec<Vec<f64>>,
}

impl TabulatedPotential {
    pub fn from_samples(m_index: usize, dt: f64, values: Vec<Vec<f64>>) -> Result<Self> {
        if !dt.is_finite() || dt <= 0.0 {
            return Err(Error::Config(format!("tabulated dt must be positive, got {dt}")));
        }
        if values.len() != m_index + 1 {
            return Err(Error::Config(format!(
                "tabulated potential has {} site rows, lattice needs {}",
                values.len(),
                m_index + 1
            )));
        }
        let n_cols = values.first().map_or(0, Vec::len);
        if n_cols < 2 || values.iter().any(|row| row.len() != n_cols) {
            return Err(Error::Config(
                "tabulated potential rows must all have n_steps + 1 >= 2 samples".into(),
            ));
        }
        if values.iter().flatten().any(|u| !u.is_finite()) {
            return Err(Error::Config("tabulated potential contains non-finite values".into()));
        }
        Ok(Self { m_index, dt, values })
    }

    /// Parses the CSV form: a `# M=.. dt=.. n_steps=..` header line, an
    /// optional `j,k,U` column header, then one `j,k,U` row per sample.
    /// Unlisted (j,k) pairs default to zero.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut lines = BufReader::new(reader).lines();
        let header = loop {
            match lines.next() {
                Some(line) => {
                    let line = line?;
                    if !line.trim().is_empty() {
                        break line;
                    }
                }
                None => return Err(Error::Parse("empty potential table".into())),
            }
        };
        let header = header.trim();
        if !header.starts_with('#') {
            return Err(Error::Parse(
                "potential table must start with a '# M=.. dt=.. n_steps=..' header".into(),
            ));
        }
        let mut m_index = None;
        let mut dt = None;
        let mut n_steps = None;
        for token in header.trim_start_matches('#').split_whitespace() {
            let Some((key, value)) = token.split_once('=') else { continue };
            match key {
                "M" => m_index = Some(parse_field::<usize>("M", value)?),
                "dt" => dt = Some(parse_field::<f64>("dt", value)?),
                "n_steps" => n_steps = Some(parse_field::<usize>("n_steps", value)?),
                other => return Err(Error::Parse(format!("unknown header field '{other}'"))),
            }
        }
        let (Some(m_index), Some(dt), Some(n_steps)) = (m_index, dt, n_steps) else {
            return Err(Error::Parse("header must declare M, dt and n_steps".into()));
        };

        let mut values = vec![vec![0.0; n_steps + 1]; m_index + 1];
        for line in lines {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line.eq_ignore_ascii_case("j,k,U") {
                continue;
            }
            let mut parts = line.split(',').map(str::trim);
            let (Some(j), Some(k), Some(u), None) =
                (parts.next(), parts.next(), parts.next(), parts.next())
            else {
                return Err(Error::Parse(format!("expected 'j,k,U' row, got '{line}'")));
            };
            let j = parse_field::<usize>("j", j)?;
            let k = parse_field::<usize>("k", k)?;
            let u = parse_field::<f64>("U", u)?;
            if j > m_index || k > n_steps {
                return Err(Error::Parse(format!(
                    "sample (j={j}, k={k}) outside declared grid (M={m_index}, n_steps={n_steps})"
                )));
            }
            values[j][k] = u;
        }
        Self::from_samples(m_index, dt, values)
    }

    pub fn from_csv_path<P: AsRef<Path>>(path: P) -> Result<Self> {
        Self::from_csv_reader(std::fs::File::open(path)?)
    }

    pub fn m_index(&self) -> usize {
        self.m_index
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn n_steps(&self) -> usize {
        self.values[0].len() - 1
    }

    fn eval(&self, j: usize, t: f64) -> f64 {
        assert!(j <= self.m_index, "site {j} outside tabulated grid");
        if t < 0.0 {
            return 0.0;
        }
        let pos = t / self.dt;
        let k = pos.floor() as usize;
        if k >= self.n_steps() {
            // Allow roundoff at the very end of the table; past it, zero.
            return if pos <= self.n_steps() as f64 + 1e-9 {
                self.values[j][self.n_steps()]
            } else {
                0.0
            };
        }
        let frac = pos - k as f64;
        self.values[j][k] * (1.0 - frac) + self.values[j][k + 1] * frac
    }
}

fn parse_field<T: std::str::FromStr>(name: &str, raw: &str) -> Result<T> {
    raw.parse()
        .map_err(|_| Error::Parse(format!("cannot parse {name} from '{raw}'")))
}

/// The external potential acting on region II.
#[derive(Debug, Clone, PartialEq)]
pub enum PotentialSpec {
    None,
    /// Rectangular barrier over sites j_lo..=j_hi, switched on and off with
    /// sin^2 ramps of the given duration so U stays continuous in time.
    SquareBarrier {
        u0: f64,
        j_lo: usize,
        j_hi: usize,
        t_on: f64,
        t_off: f64,
        ramp: f64,
    },
    LaserPulse { pulse: PulseSpec, mode: DipoleMode },
    Tabulated(TabulatedPotential),
}

impl PotentialSpec {
    pub fn validate(&self, lat: &LatticeSpec) -> Result<()> {
        match self {
            PotentialSpec::None => Ok(()),
            PotentialSpec::SquareBarrier { u0, j_lo, j_hi, t_on, t_off, ramp } => {
                if !u0.is_finite() {
                    return Err(Error::Config(format!("barrier height must be finite, got {u0}")));
                }
                if j_lo > j_hi || *j_hi > lat.m_index() {
                    return Err(Error::Config(format!(
                        "barrier sites {j_lo}..{j_hi} do not fit in 0..{}",
                        lat.m_index()
                    )));
                }
                if !t_on.is_finite() || !t_off.is_finite() || *t_on < 0.0 || t_off < t_on {
                    return Err(Error::Config(format!(
                        "barrier window [{t_on}, {t_off}] must satisfy 0 <= t_on <= t_off"
                    )));
                }
                if !ramp.is_finite() || *ramp < 0.0 || 2.0 * ramp > t_off - t_on {
                    return Err(Error::Config(format!(
                        "ramp {ramp} must satisfy 0 <= 2 ramp <= t_off - t_on = {}",
                        t_off - t_on
                    )));
                }
                Ok(())
            }
            PotentialSpec::LaserPulse { pulse, .. } => {
                let l = lat.x(lat.m_index());
                if (pulse.length - l).abs() > 1e-9 * l.max(1.0) {
                    return Err(Error::Config(format!(
                        "pulse extent {} must equal the lattice length {l}",
                        pulse.length
                    )));
                }
                Ok(())
            }
            PotentialSpec::Tabulated(tab) => {
                if tab.m_index() != lat.m_index() {
                    return Err(Error::Config(format!(
                        "tabulated potential covers sites 0..{}, lattice has 0..{}",
                        tab.m_index(),
                        lat.m_index()
                    )));
                }
                Ok(())
            }
        }
    }

    /// True when U is identically zero at both edge sites, which the
    /// untransformed evolution requires (the boundary kernels are derived
    /// for potential-free leads up to and including the edges).
    pub fn vanishes_at_boundaries(&self, lat: &LatticeSpec) -> bool {
        let m = lat.m_index();
        match self {
            PotentialSpec::None => true,
            PotentialSpec::SquareBarrier { u0, j_lo, j_hi, .. } => {
                *u0 == 0.0 || (*j_lo >= 1 && *j_hi < m)
            }
            PotentialSpec::LaserPulse { pulse, .. } => pulse.eps0 == 0.0,
            PotentialSpec::Tabulated(tab) => {
                let zero_row = |j: usize| tab.values[j].iter().all(|&u| u == 0.0);
                zero_row(0) && zero_row(m.min(tab.m_index()))
            }
        }
    }

    /// True when U is identically zero at site 0; the rotated evolution
    /// needs this (only the right lead's uniform potential can be folded
    /// into a phase).
    pub fn vanishes_at_left_boundary(&self, lat: &LatticeSpec) -> bool {
        let _ = lat;
        match self {
            PotentialSpec::None => true,
            PotentialSpec::SquareBarrier { u0, j_lo, .. } => *u0 == 0.0 || *j_lo >= 1,
            // The dipole potential is an integral from x = 0, so it always
            // vanishes there.
            PotentialSpec::LaserPulse { .. } => true,
            PotentialSpec::Tabulated(tab) => tab.values[0].iter().all(|&u| u == 0.0),
        }
    }

    pub fn is_laser(&self) -> bool {
        matches!(self, PotentialSpec::LaserPulse { .. })
    }
}

/// U at site j, time t, for any variant. Zero for t < 0 (nothing acts
/// before the wave is launched).
pub fn sample_potential(spec: &PotentialSpec, lat: &LatticeSpec, j: usize, t: f64) -> f64 {
    assert!(j <= lat.m_index(), "site {j} outside lattice 0..{}", lat.m_index());
    if t < 0.0 {
        return 0.0;
    }
    match spec {
        PotentialSpec::None => 0.0,
        PotentialSpec::SquareBarrier { u0, j_lo, j_hi, t_on, t_off, ramp } => {
            if j < *j_lo || j > *j_hi || t < *t_on || t > *t_off {
                return 0.0;
            }
            let s = if *ramp > 0.0 && t < t_on + ramp {
                let arg = (t - t_on) * std::f64::consts::FRAC_PI_2 / ramp;
                arg.sin().powi(2)
            } else if *ramp > 0.0 && t > t_off - ramp {
                let arg = (t_off - t) * std::f64::consts::FRAC_PI_2 / ramp;
                arg.sin().powi(2)
            } else {
                1.0
            };
            u0 * s
        }
        PotentialSpec::LaserPulse { pulse, mode } => {
            dipole_potential(pulse, *mode, lat.x(j), t)
        }
        PotentialSpec::Tabulated(tab) => tab.eval(j, t),
    }
}

/// Accumulated phase theta_j(t) = int_0^t U(x_j, t') dt', computed with the
/// trapezoid rule on the propagation step dt (plus one shorter panel when t
/// is not a grid point), so stored phases match the engine's exactly.
pub fn gauge_phase(spec: &PotentialSpec, lat: &LatticeSpec, j: usize, dt: f64, t: f64) -> f64 {
    assert!(dt > 0.0 && dt.is_finite(), "quadrature step must be positive");
    assert!(t >= 0.0, "gauge phase is accumulated from t = 0, got t = {t}");
    let n_full = (t / dt + 1e-12).floor() as usize;
    let mut theta = 0.0;
    let mut prev = sample_potential(spec, lat, j, 0.0);
    for k in 1..=n_full {
        let cur = sample_potential(spec, lat, j, k as f64 * dt);
        theta += 0.5 * dt * (prev + cur);
        prev = cur;
    }
    let rest = t - n_full as f64 * dt;
    if rest > 1e-12 * dt {
        let cur = sample_potential(spec, lat, j, t);
        theta += 0.5 * rest * (prev + cur);
    }
    theta
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pulse() -> PulseSpec {
        PulseSpec::new(0.3, 1.7, 0.0, 12.0, 40.0).unwrap()
    }

    fn lat40() -> LatticeSpec {
        LatticeSpec::new(1.0, 1.0, 40).unwrap()
    }

    #[test]
    fn pulse_spec_rejects_bad_parameters() {
        assert!(PulseSpec::new(-0.1, 1.0, 0.0, 1.0, 1.0).is_err());
        assert!(PulseSpec::new(0.1, 0.0, 0.0, 1.0, 1.0).is_err());
        assert!(PulseSpec::new(0.1, 1.0, f64::NAN, 1.0, 1.0).is_err());
        assert!(PulseSpec::new(0.1, 1.0, 0.0, 0.0, 1.0).is_err());
        assert!(PulseSpec::new(0.1, 1.0, 0.0, 1.0, -2.0).is_err());
    }

    #[test]
    fn field_window_and_peak() {
        let p = pulse();
        assert_eq!(laser_field(&p, 20.0, 0.0), 0.0);
        assert_eq!(laser_field(&p, 20.0, 12.0), 0.0);
        assert_eq!(laser_field(&p, 20.0, -1.0), 0.0);
        assert_eq!(laser_field(&p, 20.0, 13.0), 0.0);
        assert_eq!(laser_field(&p, 0.0, 6.0), 0.0);
        assert_eq!(laser_field(&p, 40.0, 6.0), 0.0);
        assert_eq!(laser_field(&p, -3.0, 6.0), 0.0);
        assert_eq!(laser_field(&p, 55.0, 6.0), 0.0);
        let want = 0.3 * (1.7 * 6.0f64).cos();
        assert!((laser_field(&p, 20.0, 6.0) - want).abs() < 1e-15);
    }

    #[test]
    fn dipole_reference_values() {
        let p = pulse();
        assert_eq!(dipole_potential(&p, DipoleMode::LineIntegral, 0.0, 6.0), 0.0);
        assert_eq!(dipole_potential(&p, DipoleMode::LineIntegral, 20.0, -0.5), 0.0);
        assert_eq!(dipole_potential(&p, DipoleMode::LineIntegral, 20.0, 12.5), 0.0);
        // Full line integral of the spatial envelope is L/2.
        let want = -0.3 * (1.7 * 6.0f64).cos() * 20.0;
        let got = dipole_potential(&p, DipoleMode::LineIntegral, 40.0, 6.0);
        assert!((got - want).abs() < 1e-12);
        // Constant in x past the illuminated region.
        let beyond = dipole_potential(&p, DipoleMode::LineIntegral, 71.3, 6.0);
        assert_eq!(got, beyond);
        let wtd = dipole_potential(&p, DipoleMode::PositionWeighted, 40.0, 6.0);
        let wtd_beyond = dipole_potential(&p, DipoleMode::PositionWeighted, 90.0, 6.0);
        assert_eq!(wtd, wtd_beyond);
        // Weighted integral over the full envelope is L^2/4.
        let want_wtd = -0.3 * (1.7 * 6.0f64).cos() * 400.0;
        assert!((wtd - want_wtd).abs() < 1e-10);
    }

    #[test]
    fn dipole_matches_quadrature() {
        let p = pulse();
        let simpson = |weighted: bool, x: f64, t: f64| {
            let n = 4000;
            let h = x / n as f64;
            let f = |xp: f64| {
                let w = if weighted { xp } else { 1.0 };
                -w * laser_field(&p, xp, t)
            };
            let mut s = f(0.0) + f(x);
            for i in 1..n {
                let w = if i % 2 == 1 { 4.0 } else { 2.0 };
                s += w * f(i as f64 * h);
            }
            s * h / 3.0
        };
        let mut state = 0x2545f4914f6cdd1du64;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..40 {
            let x = 40.0 * next();
            let t = 12.0 * next();
            let line = dipole_potential(&p, DipoleMode::LineIntegral, x, t);
            let wtd = dipole_potential(&p, DipoleMode::PositionWeighted, x, t);
            assert!((line - simpson(false, x, t)).abs() < 1e-10, "line integral at ({x}, {t})");
            assert!((wtd - simpson(true, x, t)).abs() < 1e-8, "weighted integral at ({x}, {t})");
        }
    }

    #[test]
    fn dipole_gradient_recovers_field() {
        let p = pulse();
        let h = 1e-4;
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..1000 {
            let x = 1.0 + 38.0 * next();
            let t = 12.0 * next();
            let grad = (dipole_potential(&p, DipoleMode::LineIntegral, x + h, t)
                - dipole_potential(&p, DipoleMode::LineIntegral, x - h, t))
                / (2.0 * h);
            assert!(
                (grad + laser_field(&p, x, t)).abs() < 1e-7,
                "dU/dx != -E at ({x}, {t})"
            );
            let grad_wtd = (dipole_potential(&p, DipoleMode::PositionWeighted, x + h, t)
                - dipole_potential(&p, DipoleMode::PositionWeighted, x - h, t))
                / (2.0 * h);
            assert!(
                (grad_wtd + x * laser_field(&p, x, t)).abs() < 1e-6,
                "dU/dx != -x E at ({x}, {t})"
            );
        }
    }

    #[test]
    fn barrier_envelope_shape() {
        let lat = lat40();
        let spec = PotentialSpec::SquareBarrier {
            u0: 0.25,
            j_lo: 10,
            j_hi: 20,
            t_on: 5.0,
            t_off: 45.0,
            ramp: 8.0,
        };
        spec.validate(&lat).unwrap();
        assert_eq!(sample_potential(&spec, &lat, 15, 4.9), 0.0);
        assert_eq!(sample_potential(&spec, &lat, 15, 45.1), 0.0);
        assert_eq!(sample_potential(&spec, &lat, 9, 25.0), 0.0);
        assert_eq!(sample_potential(&spec, &lat, 21, 25.0), 0.0);
        assert_eq!(sample_potential(&spec, &lat, 15, 25.0), 0.25);
        assert_eq!(sample_potential(&spec, &lat, 15, 13.0), 0.25);
        let half_up = sample_potential(&spec, &lat, 15, 9.0);
        assert!((half_up - 0.125).abs() < 1e-15);
        let half_down = sample_potential(&spec, &lat, 15, 41.0);
        assert!((half_down - 0.125).abs() < 1e-15);
        // Continuity across the ramp edges.
        let eps = 1e-7;
        let before = sample_potential(&spec, &lat, 15, 13.0 - eps);
        assert!((before - 0.25).abs() < 1e-6);
    }

    #[test]
    fn barrier_hard_step_allowed() {
        let lat = lat40();
        let spec = PotentialSpec::SquareBarrier {
            u0: 1.0,
            j_lo: 0,
            j_hi: 40,
            t_on: 0.0,
            t_off: 10.0,
            ramp: 0.0,
        };
        spec.validate(&lat).unwrap();
        assert_eq!(sample_potential(&spec, &lat, 0, 5.0), 1.0);
        assert!(!spec.vanishes_at_boundaries(&lat));
    }

    #[test]
    fn barrier_validation() {
        let lat = lat40();
        let bad_range = PotentialSpec::SquareBarrier {
            u0: 1.0,
            j_lo: 10,
            j_hi: 60,
            t_on: 0.0,
            t_off: 10.0,
            ramp: 0.0,
        };
        assert!(bad_range.validate(&lat).is_err());
        let bad_ramp = PotentialSpec::SquareBarrier {
            u0: 1.0,
            j_lo: 1,
            j_hi: 2,
            t_on: 0.0,
            t_off: 10.0,
            ramp: 6.0,
        };
        assert!(bad_ramp.validate(&lat).is_err());
    }

    #[test]
    fn causality_over_variants() {
        let lat = lat40();
        let tab = TabulatedPotential::from_samples(40, 0.5, vec![vec![1.0; 5]; 41]).unwrap();
        let variants = [
            PotentialSpec::None,
            PotentialSpec::SquareBarrier {
                u0: 0.7,
                j_lo: 0,
                j_hi: 40,
                t_on: 0.0,
                t_off: 100.0,
                ramp: 0.0,
            },
            PotentialSpec::LaserPulse { pulse: pulse(), mode: DipoleMode::LineIntegral },
            PotentialSpec::Tabulated(tab),
        ];
        for spec in &variants {
            for j in 0..=40 {
                for i in 1..=60 {
                    let t = -0.05 * i as f64;
                    assert_eq!(sample_potential(spec, &lat, j, t), 0.0);
                }
            }
        }
    }

    #[test]
    fn tabulated_interpolation() {
        let mut values = vec![vec![0.0; 3]; 3];
        values[1] = vec![0.0, 2.0, 4.0];
        let tab = TabulatedPotential::from_samples(2, 0.5, values).unwrap();
        let lat = LatticeSpec::new(1.0, 1.0, 2).unwrap();
        let spec = PotentialSpec::Tabulated(tab);
        assert_eq!(sample_potential(&spec, &lat, 1, 0.0), 0.0);
        assert_eq!(sample_potential(&spec, &lat, 1, 0.5), 2.0);
        assert_eq!(sample_potential(&spec, &lat, 1, 0.25), 1.0);
        assert_eq!(sample_potential(&spec, &lat, 1, 0.75), 3.0);
        assert_eq!(sample_potential(&spec, &lat, 1, 1.0), 4.0);
        assert_eq!(sample_potential(&spec, &lat, 1, 1.2), 0.0);
        assert_eq!(sample_potential(&spec, &lat, 0, 0.6), 0.0);
        assert!(spec.vanishes_at_boundaries(&lat));
    }

    #[test]
    fn tabulated_csv_roundtrip() {
        let csv = "\
# M=2 dt=0.5 n_steps=2
j,k,U
1,0,0.0
1,1,2.0
1,2,4.0
";
        let tab = TabulatedPotential::from_csv_reader(csv.as_bytes()).unwrap();
        assert_eq!(tab.m_index(), 2);
        assert_eq!(tab.dt(), 0.5);
        assert_eq!(tab.n_steps(), 2);
        assert_eq!(tab.eval(1, 0.5), 2.0);
        assert_eq!(tab.eval(0, 0.5), 0.0);
    }

    #[test]
    fn tabulated_csv_rejects_malformed_input() {
        assert!(TabulatedPotential::from_csv_reader("".as_bytes()).is_err());
        assert!(TabulatedPotential::from_csv_reader("1,2,3\n".as_bytes()).is_err());
        assert!(
            TabulatedPotential::from_csv_reader("# M=2 dt=0.5\n1,0,1.0\n".as_bytes()).is_err()
        );
        let oob = "# M=2 dt=0.5 n_steps=2\n5,0,1.0\n";
        assert!(TabulatedPotential::from_csv_reader(oob.as_bytes()).is_err());
        let junk = "# M=2 dt=0.5 n_steps=2\n1,0\n";
        assert!(TabulatedPotential::from_csv_reader(junk.as_bytes()).is_err());
        let unknown = "# M=2 dt=0.5 n_steps=2 shape=round\n";
        assert!(TabulatedPotential::from_csv_reader(unknown.as_bytes()).is_err());
    }

    #[test]
    fn pulse_length_must_match_lattice() {
        let lat = lat40();
        let ok = PotentialSpec::LaserPulse { pulse: pulse(), mode: DipoleMode::LineIntegral };
        ok.validate(&lat).unwrap();
        let wrong = PulseSpec::new(0.3, 1.7, 0.0, 12.0, 39.0).unwrap();
        let bad = PotentialSpec::LaserPulse { pulse: wrong, mode: DipoleMode::LineIntegral };
        assert!(bad.validate(&lat).is_err());
    }

    #[test]
    fn gauge_phase_basics() {
        let lat = lat40();
        let laser = PotentialSpec::LaserPulse { pulse: pulse(), mode: DipoleMode::LineIntegral };
        assert_eq!(gauge_phase(&laser, &lat, 20, 0.1, 0.0), 0.0);
        for i in 0..30 {
            let t = 0.4 * i as f64;
            assert_eq!(gauge_phase(&laser, &lat, 0, 0.1, t), 0.0);
        }
        // Constant potential integrates exactly under the trapezoid rule.
        let tab = TabulatedPotential::from_samples(40, 1.0, vec![vec![0.37; 61]; 41]).unwrap();
        let spec = PotentialSpec::Tabulated(tab);
        for i in 1..=50 {
            let t = 0.7 * i as f64;
            let theta = gauge_phase(&spec, &lat, 5, 0.07, t);
            assert!((theta - 0.37 * t).abs() < 1e-10, "t = {t}: {theta}");
        }
    }

    #[test]
    fn gauge_phase_matches_fine_quadrature_through_ramp() {
        let lat = lat40();
        let spec = PotentialSpec::SquareBarrier {
            u0: 0.2,
            j_lo: 5,
            j_hi: 35,
            t_on: 1.0,
            t_off: 9.0,
            ramp: 2.0,
        };
        let coarse = gauge_phase(&spec, &lat, 10, 0.05, 10.0);
        let fine = gauge_phase(&spec, &lat, 10, 0.0005, 10.0);
        assert!((coarse - fine).abs() < 1e-4);
        // Exact value: ramps contribute u0*ramp/2 each, plateau u0*(t_off-t_on-2 ramp).
        let exact = 0.2 * (2.0 / 2.0 + 4.0 + 2.0 / 2.0);
        assert!((fine - exact).abs() < 1e-8);
    }
}
