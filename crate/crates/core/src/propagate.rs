use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kernels::{KernelTable, KERNEL_TABLE_CAP};
use crate::lattice::{apply_hamiltonian, source_wave, LatticeSpec, PlaneWaveSource};
use crate::potentials::{sample_potential, PotentialSpec};

const I: Complex64 = Complex64::new(0.0, 1.0);
const CZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Which form of the reduced evolution runs.
///
/// Direct integrates the scattered wave itself and requires the potential
/// to vanish at both edge sites (the boundary kernels assume free leads).
/// Gauge absorbs the potential's accumulated phase into the hopping
/// elements, which tolerates a spatially uniform potential extending into
/// the right lead (the laser case); the left lead must stay potential-free.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Direct,
    Gauge,
}

/// A fully validated description of one propagation run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    lat: LatticeSpec,
    src: PlaneWaveSource,
    pot: PotentialSpec,
    dt: f64,
    n_steps: usize,
    record_stride: usize,
    mode: Mode,
}

impl RunConfig {
    /// Validates the combination and resolves the mode: `None` picks gauge
    /// for a laser potential and direct for everything else.
    pub fn new(
        lat: LatticeSpec,
        src: PlaneWaveSource,
        pot: PotentialSpec,
        dt: f64,
        n_steps: usize,
        record_stride: usize,
        mode: Option<Mode>,
    ) -> Result<Self> {
        if !dt.is_finite() || dt <= 0.0 {
            return Err(Error::Config(format!("dt must be positive, got {dt}")));
        }
        let bound = 0.5 / lat.d();
        if dt > bound * (1.0 + 1e-12) {
            return Err(Error::Config(format!(
                "dt = {dt} violates the explicit-scheme stability bound 0.5/d = {bound}"
            )));
        }
        if n_steps == 0 {
            return Err(Error::Config("n_steps must be at least 1".into()));
        }
        if n_steps > KERNEL_TABLE_CAP {
            return Err(Error::Resource(format!(
                "n_steps = {n_steps} exceeds the run cap {KERNEL_TABLE_CAP}"
            )));
        }
        if record_stride == 0 {
            return Err(Error::Config("record_stride must be at least 1".into()));
        }
        pot.validate(&lat)?;
        let mode = match (mode, pot.is_laser()) {
            (Some(Mode::Direct), true) => {
                return Err(Error::Config(
                    "a laser potential reaches into the right lead; run it in gauge mode".into(),
                ));
            }
            (m, true) => {
                debug_assert!(matches!(m, None | Some(Mode::Gauge)));
                Mode::Gauge
            }
            (Some(Mode::Gauge), false) => Mode::Gauge,
            (Some(Mode::Direct) | None, false) => Mode::Direct,
        };
        match mode {
            Mode::Direct => {
                if !pot.vanishes_at_boundaries(&lat) {
                    return Err(Error::Config(
                        "direct mode needs U = 0 at sites 0 and M for all t; \
                         this potential touches an edge site (gauge mode handles \
                         a right-edge potential)"
                            .into(),
                    ));
                }
            }
            Mode::Gauge => {
                if !pot.vanishes_at_left_boundary(&lat) {
                    return Err(Error::Config(
                        "gauge mode needs U = 0 at site 0 for all t (the left lead \
                         cannot be gauged away)"
                            .into(),
                    ));
                }
            }
        }
        Ok(Self { lat, src, pot, dt, n_steps, record_stride, mode })
    }

    pub fn lat(&self) -> &LatticeSpec {
        &self.lat
    }

    pub fn src(&self) -> &PlaneWaveSource {
        &self.src
    }

    pub fn pot(&self) -> &PotentialSpec {
        &self.pot
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn record_stride(&self) -> usize {
        self.record_stride
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }
}

/// The scattered part of the wave plus the boundary histories the memory
/// integrals need. `psi1` holds the deviation from the incoming plane wave
/// (in gauge mode, in the rotated frame). `hist0[k]` / `hist_m[k]` are the
/// stored boundary values at step k; gauge mode stores u_M(t_k) * psi1[M]
/// on the right so the kernel convolution stays a plain convolution.
#[derive(Debug, Clone)]
pub struct WaveState {
    step_index: usize,
    t: f64,
    psi1: Vec<Complex64>,
    hist0: Vec<Complex64>,
    hist_m: Vec<Complex64>,
    theta: Vec<f64>,
    mode: Mode,
}

impl WaveState {
    /// State at t = 0: nothing has been scattered yet.
    pub fn initial(cfg: &RunConfig) -> Self {
        let n = cfg.lat.n_sites();
        Self {
            step_index: 0,
            t: 0.0,
            psi1: vec![CZERO; n],
            hist0: vec![CZERO],
            hist_m: vec![CZERO],
            theta: vec![0.0; n],
            mode: cfg.mode,
        }
    }

    pub fn step_index(&self) -> usize {
        self.step_index
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn psi1(&self) -> &[Complex64] {
        &self.psi1
    }

    pub fn hist0(&self) -> &[Complex64] {
        &self.hist0
    }

    pub fn hist_m(&self) -> &[Complex64] {
        &self.hist_m
    }

    /// Accumulated gauge phases theta_j(t); all zero in direct mode.
    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }
}

/// Densities on the recording grid: `n[i][j]` is the density at time
/// `times[i]`, site position `sites[j]`.
#[derive(Debug, Clone)]
pub struct DensityRecord {
    pub times: Vec<f64>,
    pub sites: Vec<f64>,
    pub n: Vec<Vec<f64>>,
}

/// Convolution with trapezoid weights (1/2 at both end nodes). The first
/// history entry is always zero in an actual run, so the left end weight
/// is only visible to direct callers.
pub(crate) fn convolve_half_ends(hist: &[Complex64], table: &KernelTable, k: usize) -> Complex64 {
    debug_assert_eq!(hist.len(), k + 1);
    let samples = table.samples();
    let mut acc = CZERO;
    for (m, h) in hist.iter().enumerate() {
        let w = if m == 0 || m == k { 0.5 } else { 1.0 };
        acc += w * samples[k - m] * h;
    }
    acc * table.dt()
}

/// Convolution whose weights depend only on the lag (1/2 at lag zero, 1
/// otherwise), making the discrete evolution translation-invariant in
/// time. Used by the two-time reference solver, where histories start
/// from nonzero values.
pub(crate) fn convolve_flat_left(hist: &[Complex64], table: &KernelTable, k: usize) -> Complex64 {
    debug_assert_eq!(hist.len(), k + 1);
    let samples = table.samples();
    let mut acc = CZERO;
    for (m, h) in hist.iter().enumerate() {
        let w = if m == k { 0.5 } else { 1.0 };
        acc += w * samples[k - m] * h;
    }
    acc * table.dt()
}

/// Trapezoidal memory integrals at the two edge sites after k steps.
pub fn memory_term(
    hist0: &[Complex64],
    hist_m: &[Complex64],
    table: &KernelTable,
    k: usize,
) -> (Complex64, Complex64) {
    assert_eq!(hist0.len(), k + 1, "history covers steps 0..=k");
    assert_eq!(hist_m.len(), k + 1, "history covers steps 0..=k");
    assert!(table.n_steps() >= k, "kernel table too short for step {k}");
    (convolve_half_ends(hist0, table, k), convolve_half_ends(hist_m, table, k))
}

fn rhs_direct_core(
    cfg: &RunConfig,
    table: &KernelTable,
    t: f64,
    psi_eval: &[Complex64],
    hist0: &[Complex64],
    hist_m: &[Complex64],
) -> Vec<Complex64> {
    let lat = &cfg.lat;
    let n = lat.n_sites();
    let m = lat.m_index();
    debug_assert_eq!(psi_eval.len(), n);
    let k = hist0.len() - 1;
    let (mem0, mem_m) = memory_term(hist0, hist_m, table, k);

    let u: Vec<f64> = (0..n).map(|j| sample_potential(&cfg.pot, lat, j, t)).collect();
    let mut out = apply_hamiltonian(lat, &u, psi_eval);
    for j in 0..n {
        if u[j] != 0.0 {
            out[j] += u[j] * source_wave(lat, &cfg.src, j, t);
        }
    }
    out[0] += mem0;
    out[m] += mem_m;
    for z in &mut out {
        *z *= -I;
    }
    out
}

fn rhs_gauge_core(
    cfg: &RunConfig,
    table: &KernelTable,
    t: f64,
    phi_eval: &[Complex64],
    hist0: &[Complex64],
    hist_m: &[Complex64],
    theta: &[f64],
) -> Vec<Complex64> {
    let lat = &cfg.lat;
    let n = lat.n_sites();
    let m = lat.m_index();
    let d = lat.d();
    debug_assert_eq!(phi_eval.len(), n);
    debug_assert_eq!(theta.len(), n);
    let k = hist0.len() - 1;
    let (mem0, mem_m) = memory_term(hist0, hist_m, table, k);

    // Bond phase factors e^{i(theta_j - theta_{j+1})}; the rotated hopping
    // from j to j+1 is -d * bond[j], and its mirror is the conjugate.
    let bond: Vec<Complex64> =
        (0..m).map(|j| Complex64::from_polar(1.0, theta[j] - theta[j + 1])).collect();
    let wave: Vec<Complex64> = (0..n).map(|j| source_wave(lat, &cfg.src, j, t)).collect();

    let mut out = vec![CZERO; n];
    for j in 0..n {
        let mut acc = 2.0 * d * phi_eval[j];
        if j > 0 {
            let hop = bond[j - 1].conj();
            acc -= d * hop * phi_eval[j - 1];
            acc -= d * (hop - 1.0) * wave[j - 1];
        }
        if j < m {
            let hop = bond[j];
            acc -= d * hop * phi_eval[j + 1];
            acc -= d * (hop - 1.0) * wave[j + 1];
        }
        out[j] = acc;
    }
    out[0] += mem0;
    out[m] += Complex64::from_polar(1.0, theta[m]) * mem_m;
    for z in &mut out {
        *z *= -I;
    }
    out
}

/// Time derivative of the scattered wave in direct mode, evaluated at
/// (t, psi1_eval) against the state's stored boundary histories.
pub fn rhs_direct(
    state: &WaveState,
    cfg: &RunConfig,
    table: &KernelTable,
    t: f64,
    psi1_eval: &[Complex64],
) -> Vec<Complex64> {
    assert_eq!(cfg.mode, Mode::Direct);
    rhs_direct_core(cfg, table, t, psi1_eval, &state.hist0, &state.hist_m)
}

/// Time derivative of the rotated scattered wave in gauge mode.
pub fn rhs_gauge(
    state: &WaveState,
    cfg: &RunConfig,
    table: &KernelTable,
    t: f64,
    phi1_eval: &[Complex64],
) -> Vec<Complex64> {
    assert_eq!(cfg.mode, Mode::Gauge);
    rhs_gauge_core(cfg, table, t, phi1_eval, &state.hist0, &state.hist_m, &state.theta)
}

fn advance_theta(cfg: &RunConfig, theta: &[f64], t0: f64, t1: f64) -> Vec<f64> {
    match cfg.mode {
        Mode::Direct => theta.to_vec(),
        Mode::Gauge => {
            let lat = &cfg.lat;
            let half = 0.5 * (t1 - t0);
            theta
                .iter()
                .enumerate()
                .map(|(j, &th)| {
                    th + half
                        * (sample_potential(&cfg.pot, lat, j, t0)
                            + sample_potential(&cfg.pot, lat, j, t1))
                })
                .collect()
        }
    }
}

/// The pair of values the histories store for a given wave and phases.
fn stored_boundary(cfg: &RunConfig, theta: &[f64], psi: &[Complex64]) -> (Complex64, Complex64) {
    let m = cfg.lat.m_index();
    match cfg.mode {
        Mode::Direct => (psi[0], psi[m]),
        Mode::Gauge => (psi[0], Complex64::from_polar(1.0, -theta[m]) * psi[m]),
    }
}

/// Advances one step with Heun's predictor-corrector. The corrector's
/// memory integral sees the predictor's boundary values at t_{k+1}; the
/// corrected values then overwrite that history slot.
pub fn step(mut state: WaveState, cfg: &RunConfig, table: &KernelTable) -> Result<WaveState> {
    assert_eq!(state.mode, cfg.mode, "state and config disagree on mode");
    let k = state.step_index;
    let n = cfg.lat.n_sites();
    let dt = cfg.dt;
    let t0 = k as f64 * dt;
    let t1 = (k + 1) as f64 * dt;

    let eval = |t: f64, psi: &[Complex64], h0: &[Complex64], hm: &[Complex64], th: &[f64]| match cfg
        .mode
    {
        Mode::Direct => rhs_direct_core(cfg, table, t, psi, h0, hm),
        Mode::Gauge => rhs_gauge_core(cfg, table, t, psi, h0, hm, th),
    };

    let r1 = eval(t0, &state.psi1, &state.hist0, &state.hist_m, &state.theta);
    let psi_p: Vec<Complex64> =
        state.psi1.iter().zip(&r1).map(|(&p, &r)| p + dt * r).collect();

    let theta_next = advance_theta(cfg, &state.theta, t0, t1);
    let (b0, bm) = stored_boundary(cfg, &theta_next, &psi_p);
    state.hist0.push(b0);
    state.hist_m.push(bm);

    let r2 = eval(t1, &psi_p, &state.hist0, &state.hist_m, &theta_next);
    for j in 0..n {
        state.psi1[j] += 0.5 * dt * (r1[j] + r2[j]);
    }
    let (b0, bm) = stored_boundary(cfg, &theta_next, &state.psi1);
    *state.hist0.last_mut().expect("pushed above") = b0;
    *state.hist_m.last_mut().expect("pushed above") = bm;

    if state.psi1.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Diverged {
            step: k + 1,
            detail: format!(
                "wave became non-finite at t = {t1}; reduce dt or the potential strength"
            ),
        });
    }

    state.step_index = k + 1;
    state.t = t1;
    state.theta = theta_next;
    Ok(state)
}

/// Physical density n_j = |plane wave + scattered part|^2. The gauge
/// factor has unit modulus, so the same formula serves both modes.
pub fn density(state: &WaveState, cfg: &RunConfig) -> Vec<f64> {
    let lat = &cfg.lat;
    (0..lat.n_sites())
        .map(|j| (source_wave(lat, &cfg.src, j, state.t) + state.psi1[j]).norm_sqr())
        .collect()
}

/// Runs the full time evolution, recording the density at step 0, every
/// `record_stride` steps, and the final step.
pub fn evolve(cfg: &RunConfig) -> Result<(DensityRecord, WaveState)> {
    let table = KernelTable::build(&cfg.lat, cfg.dt, cfg.n_steps)?;
    let mut state = WaveState::initial(cfg);
    let sites: Vec<f64> = (0..cfg.lat.n_sites()).map(|j| cfg.lat.x(j)).collect();
    let mut times = vec![0.0];
    let mut n = vec![density(&state, cfg)];
    for k in 0..cfg.n_steps {
        state = step(state, cfg, &table)?;
        let done = k + 1 == cfg.n_steps;
        if (k + 1) % cfg.record_stride == 0 || done {
            times.push(state.t);
            n.push(density(&state, cfg));
        }
    }
    Ok((DensityRecord { times, sites, n }, state))
}
