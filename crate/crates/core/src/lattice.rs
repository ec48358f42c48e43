use num_complex::Complex64;

use crate::error::{Error, Result};

/// Uniform 1D tight-binding lattice covering the scattering region,
/// sites j = 0..=M at positions x_j = j*a.
///
/// The hopping energy d = 1/(2 m a^2) sets every scale: the band spans
/// (0, 4d) and the shortest dynamical period is ~1/d.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeSpec {
    a: f64,
    m: f64,
    m_index: usize,
    d: f64,
}

impl LatticeSpec {
    /// `m_index` is M, the index of the last site (M + 1 sites in total).
    pub fn new(a: f64, m: f64, m_index: usize) -> Result<Self> {
        if !a.is_finite() || a <= 0.0 {
            return Err(Error::Config(format!("lattice spacing a must be positive, got {a}")));
        }
        if !m.is_finite() || m <= 0.0 {
            return Err(Error::Config(format!("mass m must be positive, got {m}")));
        }
        if m_index < 2 {
            return Err(Error::Config(format!(
                "lattice needs at least 3 sites (M >= 2), got M = {m_index}"
            )));
        }
        let d = 1.0 / (2.0 * m * a * a);
        Ok(Self { a, m, m_index, d })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    /// Index of the last site; the lattice has `m_index() + 1` sites.
    pub fn m_index(&self) -> usize {
        self.m_index
    }

    pub fn n_sites(&self) -> usize {
        self.m_index + 1
    }

    /// Hopping energy d = 1/(2 m a^2).
    pub fn d(&self) -> f64 {
        self.d
    }

    /// Top of the energy band, 4d.
    pub fn band_top(&self) -> f64 {
        4.0 * self.d
    }

    pub fn x(&self, j: usize) -> f64 {
        j as f64 * self.a
    }
}

/// E(k) = 2d (1 - cos ka) for k in [0, pi/a].
pub fn dispersion(lat: &LatticeSpec, k: f64) -> Result<f64> {
    let ka = k * lat.a;
    if !(0.0..=std::f64::consts::PI).contains(&ka) {
        return Err(Error::Domain(format!(
            "k*a = {ka} outside [0, pi]; k must lie in the first half Brillouin zone"
        )));
    }
    Ok(2.0 * lat.d * (1.0 - ka.cos()))
}

/// Inverse of `dispersion`: k(E) = arccos(1 - E/(2d)) / a, for E strictly
/// inside the open band (0, 4d).
pub fn wavenumber(lat: &LatticeSpec, e: f64) -> Result<f64> {
    check_band(lat, e)?;
    Ok((1.0 - e / (2.0 * lat.d)).acos() / lat.a)
}

/// Group velocity dE/dk = 2 d a sin(ka) at energy E in the open band.
pub fn group_velocity(lat: &LatticeSpec, e: f64) -> Result<f64> {
    let k = wavenumber(lat, e)?;
    Ok(2.0 * lat.d * lat.a * (k * lat.a).sin())
}

fn check_band(lat: &LatticeSpec, e: f64) -> Result<()> {
    if !e.is_finite() || e <= 0.0 || e >= lat.band_top() {
        return Err(Error::Domain(format!(
            "energy {e} outside the open band (0, {}); propagating states only",
            lat.band_top()
        )));
    }
    Ok(())
}

/// Monoenergetic right-moving source with unit density, characterised by
/// its energy E, wavenumber k(E) and band weight N(E) = sin(ka).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneWaveSource {
    e: f64,
    k: f64,
    n: f64,
}

impl PlaneWaveSource {
    pub fn new(lat: &LatticeSpec, e: f64) -> Result<Self> {
        let k = wavenumber(lat, e)?;
        let n = normalization(lat, e)?;
        Ok(Self { e, k, n })
    }

    pub fn energy(&self) -> f64 {
        self.e
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    /// Band weight N(E) = sin(k a) = sqrt(1 - (1 - E/(2d))^2).
    pub fn normalization(&self) -> f64 {
        self.n
    }
}

/// N(E) = sqrt(1 - (1 - E/(2d))^2), the spectral weight of the injected wave.
pub fn normalization(lat: &LatticeSpec, e: f64) -> Result<f64> {
    check_band(lat, e)?;
    let c = 1.0 - e / (2.0 * lat.d);
    Ok((1.0 - c * c).sqrt())
}

/// Incoming plane wave at site j and time t: exp(i [k j a - E t]).
pub fn source_wave(lat: &LatticeSpec, src: &PlaneWaveSource, j: usize, t: f64) -> Complex64 {
    assert!(j <= lat.m_index(), "site index {j} beyond lattice end {}", lat.m_index());
    Complex64::from_polar(1.0, src.k * lat.x(j) - src.e * t)
}

/// Apply the lattice Hamiltonian with on-site potential row `u` to `psi`:
/// (H psi)_j = (u_j + 2d) psi_j - d psi_{j-1} - d psi_{j+1},
/// with missing neighbours beyond the ends simply absent.
pub fn apply_hamiltonian(lat: &LatticeSpec, u: &[f64], psi: &[Complex64]) -> Vec<Complex64> {
    let n = lat.n_sites();
    assert_eq!(u.len(), n, "potential row length {} != {} sites", u.len(), n);
    assert_eq!(psi.len(), n, "state length {} != {} sites", psi.len(), n);
    let d = lat.d;
    let mut out = Vec::with_capacity(n);
    for j in 0..n {
        let mut v = (u[j] + 2.0 * d) * psi[j];
        if j > 0 {
            v -= d * psi[j - 1];
        }
        if j + 1 < n {
            v -= d * psi[j + 1];
        }
        out.push(v);
    }
    out
}
