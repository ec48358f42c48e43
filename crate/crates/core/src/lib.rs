//! Time-dependent scattering of a single particle on a 1D tight-binding
//! lattice, with the two semi-infinite ideal leads folded into exact
//! memory kernels attached at the edge sites. The crate provides the
//! propagation engine, the kernel evaluations it needs, and independent
//! reference solvers used to verify it.

mod bessel;
pub mod error;
pub mod kernels;
pub mod lattice;
pub mod oracle;
pub mod potentials;
pub mod propagate;
pub mod verify;

pub use error::{Error, Result};
pub use oracle::{
    crank_nicolson_bigbox, keldysh_direct, transfer_matrix_coefficients,
    transfer_matrix_transmission, BigBoxConfig,
};
pub use kernels::{free_propagator, sigma_r, surface_gf_energy, KernelTable};
pub use lattice::{
    apply_hamiltonian, dispersion, group_velocity, normalization, source_wave, wavenumber,
    LatticeSpec, PlaneWaveSource,
};
pub use potentials::{
    dipole_potential, gauge_phase, laser_field, sample_potential, DipoleMode, PotentialSpec,
    PulseSpec, TabulatedPotential,
};
pub use propagate::{
    density, evolve, memory_term, rhs_direct, rhs_gauge, step, DensityRecord, Mode, RunConfig,
    WaveState,
};

pub use verify::{all_checks, suite, CheckReport, SUITE_NAMES};

pub use num_complex::Complex64;
