use num_complex::Complex64;

use crate::bessel::bessel_j;
use crate::error::{Error, Result};
use crate::lattice::LatticeSpec;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Default cap on kernel table length; a table of this size already costs
/// 160 MB and an O(N^2) convolution over it is out of reach anyway.
pub const KERNEL_TABLE_CAP: usize = 10_000_000;

/// Retarded surface Green function of a semi-infinite ideal lead in the
/// energy domain: g(E) = -(1/d) [c + i sqrt(1 - c^2)], c = 1 - E/(2d),
/// for E in the closed band [0, 4d].
pub fn surface_gf_energy(lat: &LatticeSpec, e: f64) -> Result<Complex64> {
    let d = lat.d();
    if !e.is_finite() || e < 0.0 || e > 4.0 * d {
        return Err(Error::Domain(format!(
            "energy {e} outside the band [0, {}]",
            4.0 * d
        )));
    }
    let c = 1.0 - e / (2.0 * d);
    let s = (1.0 - c * c).max(0.0).sqrt();
    Ok(-(Complex64::new(c, s)) / d)
}

/// J_1(x)/x, stable down to x = 0 where it tends to 1/2.
fn j1_over_x(x: f64) -> f64 {
    if x < 1e-4 {
        // Leading series terms; remainder < 1e-26 here.
        0.5 - x * x / 16.0
    } else if x <= 1e6 {
        bessel_j(1, x).expect("argument checked") / x
    } else {
        jn_asymptotic(1, x) / x
    }
}

/// Two-term Hankel asymptotic expansion, used only beyond the tabulated
/// Bessel range; absolute error ~1e-12 there for the orders we need.
fn jn_asymptotic(n: u32, x: f64) -> f64 {
    let mu = 4.0 * (n as f64) * (n as f64);
    let ix = 1.0 / (8.0 * x);
    let p = 1.0 - (mu - 1.0) * (mu - 9.0) / 2.0 * ix * ix;
    let q = (mu - 1.0) * ix * (1.0 - (mu - 9.0) * (mu - 25.0) / 6.0 * ix * ix);
    let chi = x - (n as f64) * std::f64::consts::FRAC_PI_2 - std::f64::consts::FRAC_PI_4;
    (2.0 / (std::f64::consts::PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// Time-domain lead memory kernel
///   sigma(tau) = -i d J_1(2 tau d) / tau * exp(-2 i tau d)   (tau > 0),
/// with the limit -i d^2 at tau = 0 and zero for tau < 0.
///
/// |sigma(tau)| <= d^2 for all tau; the kernel decays like tau^(-3/2).
pub fn sigma_r(d: f64, tau: f64) -> Complex64 {
    assert!(d > 0.0 && d.is_finite(), "hopping d must be positive");
    if tau < 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    if tau == 0.0 {
        return -I * d * d;
    }
    let x = 2.0 * tau * d;
    // d * J1(x)/tau = 2 d^2 * J1(x)/x
    let amp = 2.0 * d * d * j1_over_x(x);
    -I * amp * Complex64::from_polar(1.0, -x)
}

/// Retarded propagator of the infinite ideal lattice between sites offset
/// by n: -i i^|n| J_|n|(2 tau d) exp(-2 i tau d) for tau > 0; at tau = 0 it
/// reduces to -i delta_{n,0}; zero for tau < 0. Symmetric under n -> -n.
pub fn free_propagator(d: f64, n: i64, tau: f64) -> Complex64 {
    assert!(d > 0.0 && d.is_finite(), "hopping d must be positive");
    if tau < 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let n = n.unsigned_abs();
    if tau == 0.0 {
        return if n == 0 { -I } else { Complex64::new(0.0, 0.0) };
    }
    let x = 2.0 * tau * d;
    let jn = if x <= 1e6 {
        match u32::try_from(n) {
            Ok(n32) => bessel_j(n32, x).expect("argument checked"),
            Err(_) => 0.0,
        }
    } else {
        jn_asymptotic(n as u32, x)
    };
    let i_pow = match n % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => I,
        2 => Complex64::new(-1.0, 0.0),
        _ => -I,
    };
    -I * i_pow * jn * Complex64::from_polar(1.0, -x)
}

/// Precomputed memory-kernel samples sigma(k dt) for k = 0..=n_steps.
#[derive(Debug, Clone)]
pub struct KernelTable {
    dt: f64,
    d: f64,
    samples: Vec<Complex64>,
}

impl KernelTable {
    pub fn build(lat: &LatticeSpec, dt: f64, n_steps: usize) -> Result<Self> {
        if !dt.is_finite() || dt <= 0.0 {
            return Err(Error::Config(format!("dt must be positive, got {dt}")));
        }
        if n_steps > KERNEL_TABLE_CAP {
            return Err(Error::Resource(format!(
                "kernel table length {n_steps} exceeds cap {KERNEL_TABLE_CAP}"
            )));
        }
        let d = lat.d();
        let samples = (0..=n_steps).map(|k| sigma_r(d, k as f64 * dt)).collect();
        Ok(Self { dt, d, samples })
    }

    /// Table with caller-supplied samples; for tests that need stub kernels.
    #[cfg(test)]
    pub(crate) fn from_raw(dt: f64, d: f64, samples: Vec<Complex64>) -> Self {
        Self { dt, d, samples }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    /// Number of time steps covered; there are n_steps() + 1 samples.
    pub fn n_steps(&self) -> usize {
        self.samples.len() - 1
    }

    pub fn sample(&self, k: usize) -> Complex64 {
        self.samples[k]
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::wavenumber;

    fn lat_unit() -> LatticeSpec {
        LatticeSpec::new(1.0, 1.0, 10).unwrap()
    }

    #[test]
    fn surface_gf_reference_points() {
        let lat = lat_unit();
        let d = lat.d();
        let g0 = surface_gf_energy(&lat, 0.0).unwrap();
        assert!((g0 - Complex64::new(-1.0 / d, 0.0)).norm() < 1e-14);
        let gmid = surface_gf_energy(&lat, 2.0 * d).unwrap();
        assert!((gmid - Complex64::new(0.0, -1.0 / d)).norm() < 1e-14);
        let gtop = surface_gf_energy(&lat, 4.0 * d).unwrap();
        assert!((gtop - Complex64::new(1.0 / d, 0.0)).norm() < 1e-14);
        assert!(surface_gf_energy(&lat, -0.1).is_err());
        assert!(surface_gf_energy(&lat, 4.0 * d + 0.1).is_err());
    }

    #[test]
    fn sigma_reference_points() {
        let d = 0.5f64;
        assert_eq!(sigma_r(d, -1.0), Complex64::new(0.0, 0.0));
        let s0 = sigma_r(d, 0.0);
        assert!((s0 - Complex64::new(0.0, -d * d)).norm() < 1e-16);
        // tau = 1/(2d): sigma = -2 i d^2 J_1(1) e^{-i}
        let tau = 1.0 / (2.0 * d);
        let want = -Complex64::new(0.0, 1.0)
            * 2.0
            * d
            * d
            * 0.4400505857449335
            * Complex64::from_polar(1.0, -1.0);
        assert!((sigma_r(d, tau) - want).norm() < 1e-13);
    }

    #[test]
    fn sigma_bound_and_decay() {
        for &d in &[0.2, 0.5, 1.7] {
            for k in 0..2000 {
                let tau = k as f64 * 0.05 / d;
                let s = sigma_r(d, tau);
                assert!(s.norm() <= d * d * (1.0 + 1e-12), "bound at tau*d = {}", tau * d);
                if tau * d > 5.0 {
                    assert!(s.norm() <= d * d / (tau * d), "decay at tau*d = {}", tau * d);
                }
            }
        }
    }

    #[test]
    fn sigma_matches_energy_domain_by_forward_transform() {
        // int_0^inf sigma(tau) e^{i E tau} dtau = d^2 g(E); truncation at
        // tau = 600/d leaves an oscillatory tail bounded well below 1e-3.
        let lat = lat_unit();
        let d = lat.d();
        for &e in &[0.6 * d, 1.0 * d, 2.5 * d, 3.3 * d] {
            let steps = 600_000usize;
            let h = (600.0 / d) / steps as f64;
            let f = |tau: f64| sigma_r(d, tau) * Complex64::from_polar(1.0, e * tau);
            let mut acc = (f(0.0) + f(steps as f64 * h)) * 0.5;
            for k in 1..steps {
                acc += f(k as f64 * h);
            }
            let got = acc * h;
            let want = surface_gf_energy(&lat, e).unwrap() * d * d;
            assert!(
                (got - want).norm() < 1e-3,
                "E = {e}: transform {got}, closed form {want}"
            );
        }
    }

    #[test]
    fn free_propagator_limits_and_symmetry() {
        let d = 0.7;
        assert_eq!(free_propagator(d, 0, -0.5), Complex64::new(0.0, 0.0));
        let g0 = free_propagator(d, 0, 0.0);
        assert!((g0 - Complex64::new(0.0, -1.0)).norm() < 1e-15);
        assert_eq!(free_propagator(d, 3, 0.0), Complex64::new(0.0, 0.0));
        let near0 = free_propagator(d, 0, 1e-12);
        assert!((near0 - Complex64::new(0.0, -1.0)).norm() < 1e-10);
        for n in -5i64..=5 {
            let a = free_propagator(d, n, 3.3);
            let b = free_propagator(d, -n, 3.3);
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn free_propagator_unitarity() {
        for &(d, tau) in &[(0.5f64, 2.0f64), (1.3, 7.7), (0.25, 19.0)] {
            let mut s = 0.0;
            for n in -80i64..=80 {
                s += free_propagator(d, n, tau).norm_sqr();
            }
            assert!((s - 1.0).abs() < 1e-12, "d={d} tau={tau}: {s}");
        }
    }

    #[test]
    fn kernel_table_matches_direct_eval() {
        let lat = lat_unit();
        let table = KernelTable::build(&lat, 0.05, 100).unwrap();
        assert_eq!(table.n_steps(), 100);
        assert_eq!(table.sample(0), -Complex64::new(0.0, 1.0) * lat.d() * lat.d());
        for k in 0..=100 {
            assert_eq!(table.sample(k), sigma_r(lat.d(), k as f64 * 0.05));
        }
        let tiny = KernelTable::build(&lat, 0.1, 1).unwrap();
        assert_eq!(tiny.samples().len(), 2);
    }

    #[test]
    fn kernel_table_cap() {
        let lat = lat_unit();
        let err = KernelTable::build(&lat, 0.05, KERNEL_TABLE_CAP + 1).unwrap_err();
        assert!(matches!(err, Error::Resource(_)));
        assert!(KernelTable::build(&lat, 0.0, 10).is_err());
    }

    #[test]
    fn wavenumber_consistency_of_surface_gf() {
        // g(E) = -(1/d) e^{i k a} inside the band.
        let lat = lat_unit();
        for &e in &[0.3, 0.9, 1.5, 1.9] {
            let k = wavenumber(&lat, e).unwrap();
            let want = -Complex64::from_polar(1.0, k * lat.a()) / lat.d();
            let got = surface_gf_energy(&lat, e).unwrap();
            assert!((got - want).norm() < 1e-13);
        }
    }
}
