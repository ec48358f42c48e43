//! Shared fixtures for the criterion benchmarks. The crate ships no
//! runtime code of its own.

use tdscat::{LatticeSpec, PlaneWaveSource, PotentialSpec, RunConfig};

pub fn unit_lattice(m_index: usize) -> LatticeSpec {
    LatticeSpec::new(1.0, 1.0, m_index).expect("fixture lattice")
}

/// A mid-band run against a switched square barrier, sized so one full
/// evolution stays in the millisecond range.
pub fn barrier_run(n_steps: usize) -> RunConfig {
    let lat = unit_lattice(60);
    let src = PlaneWaveSource::new(&lat, 1.0).expect("mid-band source");
    let pot = PotentialSpec::SquareBarrier {
        u0: 0.1,
        j_lo: 20,
        j_hi: 40,
        t_on: 0.0,
        t_off: 10.0,
        ramp: 3.0,
    };
    RunConfig::new(lat, src, pot, 0.02, n_steps, n_steps, None).expect("fixture run")
}
