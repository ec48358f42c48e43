use num_complex::Complex64;

use crate::error::Result;
use crate::lattice::{wavenumber, LatticeSpec};

/// Transmission and reflection probabilities of a static, compactly
/// supported potential, from the stationary scattering problem
/// (H - E) psi = 0 solved by downward recursion from the transmitted side.
///
/// `barrier[j]` is the potential at site j; sites outside the slice are
/// free. Current conservation guarantees T + R = 1.
pub fn transfer_matrix_coefficients(
    lat: &LatticeSpec,
    barrier: &[f64],
    e: f64,
) -> Result<(f64, f64)> {
    let k = wavenumber(lat, e)?;
    let ka = k * lat.a();
    let d = lat.d();

    // Transmitted wave psi_j = e^{i ka j} for j past the barrier; recurse
    // psi_{j-1} = ((2d + U_j - E)/d) psi_j - psi_{j+1} down to j = -1.
    let n = barrier.len();
    let mut psi_hi = Complex64::from_polar(1.0, ka * (n as f64 + 1.0));
    let mut psi = Complex64::from_polar(1.0, ka * n as f64);
    for j in (0..=n).rev() {
        let u = if j < n { barrier[j] } else { 0.0 };
        let next = ((2.0 * d + u - e) / d) * psi - psi_hi;
        psi_hi = psi;
        psi = next;
    }
    let (psi_m1, psi_0) = (psi, psi_hi);

    // Match psi_j = A e^{i ka j} + B e^{-i ka j} on the incoming side.
    let denom = Complex64::new(0.0, 2.0 * ka.sin());
    let a = (psi_0 * Complex64::from_polar(1.0, ka) - psi_m1) / denom;
    let b = (psi_m1 - psi_0 * Complex64::from_polar(1.0, -ka)) / denom;
    let t = 1.0 / a.norm_sqr();
    let r = b.norm_sqr() / a.norm_sqr();
    Ok((t, r))
}

pub fn transfer_matrix_transmission(lat: &LatticeSpec, barrier: &[f64], e: f64) -> Result<f64> {
    transfer_matrix_coefficients(lat, barrier, e).map(|(t, _)| t)
}
