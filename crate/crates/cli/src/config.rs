//! Flat `section.key = value` configuration documents.
//!
//! The format is deliberately primitive: one assignment per line, `#`
//! comments, no nesting, no quoting. Every key is checked against the
//! known set so a typo fails loudly instead of being ignored.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use tdscat::lattice::{group_velocity, wavenumber};
use tdscat::potentials::{DipoleMode, PotentialSpec, PulseSpec, TabulatedPotential};
use tdscat::propagate::{Mode, RunConfig};
use tdscat::{Error, LatticeSpec, PlaneWaveSource, Result};

use crate::output::Format;

pub const KNOWN_KEYS: &[&str] = &[
    "lattice.a",
    "lattice.m",
    "lattice.m_index",
    "source.e",
    "run.dt",
    "run.n_steps",
    "run.record_stride",
    "run.mode",
    "potential.variant",
    "potential.u0",
    "potential.j_lo",
    "potential.j_hi",
    "potential.t_on",
    "potential.t_off",
    "potential.ramp",
    "potential.table_path",
    "pulse.eps0",
    "pulse.omega0",
    "pulse.phi_cep",
    "pulse.duration",
    "pulse.length",
    "pulse.dipole_mode",
    "output.out_dir",
    "output.format",
];

const BARRIER_KEYS: &[&str] = &[
    "potential.u0",
    "potential.j_lo",
    "potential.j_hi",
    "potential.t_on",
    "potential.t_off",
    "potential.ramp",
];
const PULSE_KEYS: &[&str] = &[
    "pulse.eps0",
    "pulse.omega0",
    "pulse.phi_cep",
    "pulse.duration",
    "pulse.length",
    "pulse.dipole_mode",
];
const TABLE_KEYS: &[&str] = &["potential.table_path"];

pub type KeyMap = BTreeMap<String, String>;

pub fn parse_document(text: &str) -> Result<KeyMap> {
    let mut map = KeyMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Config(format!(
                "line {}: expected `section.key = value`, got '{line}'",
                idx + 1
            )));
        };
        let key = key.trim();
        let value = value.trim();
        if !KNOWN_KEYS.contains(&key) {
            return Err(Error::Config(format!("line {}: unknown key '{key}'", idx + 1)));
        }
        if value.is_empty() {
            return Err(Error::Config(format!("line {}: key {key} has an empty value", idx + 1)));
        }
        if map.insert(key.to_owned(), value.to_owned()).is_some() {
            return Err(Error::Config(format!("line {}: duplicate key {key}", idx + 1)));
        }
    }
    Ok(map)
}

pub fn parse_file(path: &Path) -> Result<KeyMap> {
    parse_document(&std::fs::read_to_string(path)?)
}

fn require<'m>(map: &'m KeyMap, key: &str) -> Result<&'m str> {
    map.get(key)
        .map(String::as_str)
        .ok_or_else(|| Error::Config(format!("missing required key {key}")))
}

fn parse_as<T: FromStr>(key: &str, raw: &str, what: &str) -> Result<T> {
    raw.parse()
        .map_err(|_| Error::Config(format!("key {key}: cannot parse '{raw}' as {what}")))
}

fn req_f64(map: &KeyMap, key: &str) -> Result<f64> {
    parse_as(key, require(map, key)?, "a number")
}

fn req_usize(map: &KeyMap, key: &str) -> Result<usize> {
    parse_as(key, require(map, key)?, "a non-negative integer")
}

fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Everything a simulation run needs, plus the resolved-config echo that
/// goes into the meta table.
#[derive(Debug)]
pub struct SimSetup {
    pub run: RunConfig,
    pub out_dir: Option<PathBuf>,
    pub format: Format,
    pub meta: Vec<(String, String)>,
}

pub fn output_options(map: &KeyMap) -> Result<(Option<PathBuf>, Format)> {
    let out_dir = map.get("output.out_dir").map(PathBuf::from);
    let format = match map.get("output.format").map(String::as_str) {
        None => Format::Csv,
        Some(tok) => Format::from_token(tok).ok_or_else(|| {
            Error::Config(format!("key output.format: expected csv or tsv, got '{tok}'"))
        })?,
    };
    Ok((out_dir, format))
}

/// Builds a full simulation setup. `config_dir` anchors relative paths
/// (the potential table) to the config file's own directory.
pub fn build_setup(map: &KeyMap, config_dir: &Path) -> Result<SimSetup> {
    let a = req_f64(map, "lattice.a")?;
    let mass = req_f64(map, "lattice.m")?;
    let m_index = req_usize(map, "lattice.m_index")?;
    let lat = LatticeSpec::new(a, mass, m_index)?;
    let e = req_f64(map, "source.e")?;
    let src = PlaneWaveSource::new(&lat, e)?;
    let dt = req_f64(map, "run.dt")?;
    let n_steps = req_usize(map, "run.n_steps")?;
    let record_stride = req_usize(map, "run.record_stride")?;
    let mode = match map.get("run.mode").map(String::as_str) {
        None | Some("auto") => None,
        Some("direct") => Some(Mode::Direct),
        Some("gauge") => Some(Mode::Gauge),
        Some(other) => {
            return Err(Error::Config(format!(
                "key run.mode: expected auto, direct or gauge, got '{other}'"
            )))
        }
    };

    let variant = require(map, "potential.variant")?;
    let allowed: &[&str] = match variant {
        "none" => &[],
        "square_barrier" => BARRIER_KEYS,
        "laser_pulse" => PULSE_KEYS,
        "tabulated" => TABLE_KEYS,
        other => {
            return Err(Error::Config(format!(
                "key potential.variant: expected none, square_barrier, laser_pulse or \
                 tabulated, got '{other}'"
            )))
        }
    };
    for key in BARRIER_KEYS.iter().chain(PULSE_KEYS).chain(TABLE_KEYS) {
        if map.contains_key(*key) && !allowed.contains(key) {
            return Err(Error::Config(format!(
                "key {key} does not apply to potential.variant = {variant}"
            )));
        }
    }

    let mut meta: Vec<(String, String)> = vec![
        ("lattice.a".into(), fmt_f64(a)),
        ("lattice.m".into(), fmt_f64(mass)),
        ("lattice.m_index".into(), m_index.to_string()),
        ("lattice.d".into(), fmt_f64(lat.d())),
        ("lattice.band_top".into(), fmt_f64(lat.band_top())),
        ("source.e".into(), fmt_f64(e)),
        ("source.k".into(), fmt_f64(wavenumber(&lat, e)?)),
        ("source.group_velocity".into(), fmt_f64(group_velocity(&lat, e)?)),
        ("source.normalization".into(), fmt_f64(src.normalization())),
        ("run.dt".into(), fmt_f64(dt)),
        ("run.n_steps".into(), n_steps.to_string()),
        ("run.record_stride".into(), record_stride.to_string()),
        ("run.t_end".into(), fmt_f64(dt * n_steps as f64)),
        ("run.stability_bound".into(), fmt_f64(0.5 / lat.d())),
        ("potential.variant".into(), variant.to_owned()),
    ];

    let pot = match variant {
        "none" => PotentialSpec::None,
        "square_barrier" => {
            let spec = PotentialSpec::SquareBarrier {
                u0: req_f64(map, "potential.u0")?,
                j_lo: req_usize(map, "potential.j_lo")?,
                j_hi: req_usize(map, "potential.j_hi")?,
                t_on: req_f64(map, "potential.t_on")?,
                t_off: req_f64(map, "potential.t_off")?,
                ramp: req_f64(map, "potential.ramp")?,
            };
            for key in BARRIER_KEYS {
                meta.push(((*key).into(), echo_numeric(map, key)?));
            }
            spec
        }
        "laser_pulse" => {
            let dipole = match map.get("pulse.dipole_mode").map(String::as_str) {
                None | Some("line_integral") => DipoleMode::LineIntegral,
                Some("position_weighted") => DipoleMode::PositionWeighted,
                Some(other) => {
                    return Err(Error::Config(format!(
                        "key pulse.dipole_mode: expected line_integral or position_weighted, \
                         got '{other}'"
                    )))
                }
            };
            let pulse = PulseSpec::new(
                req_f64(map, "pulse.eps0")?,
                req_f64(map, "pulse.omega0")?,
                req_f64(map, "pulse.phi_cep")?,
                req_f64(map, "pulse.duration")?,
                req_f64(map, "pulse.length")?,
            )?;
            for key in &PULSE_KEYS[..5] {
                meta.push(((*key).into(), echo_numeric(map, key)?));
            }
            meta.push((
                "pulse.dipole_mode".into(),
                match dipole {
                    DipoleMode::LineIntegral => "line_integral".into(),
                    DipoleMode::PositionWeighted => "position_weighted".into(),
                },
            ));
            PotentialSpec::LaserPulse { pulse, mode: dipole }
        }
        "tabulated" => {
            let rel = require(map, "potential.table_path")?;
            let path = config_dir.join(rel);
            meta.push(("potential.table_path".into(), rel.to_owned()));
            PotentialSpec::Tabulated(TabulatedPotential::from_csv_path(&path)?)
        }
        _ => unreachable!("variant already validated"),
    };

    let run = RunConfig::new(lat, src, pot, dt, n_steps, record_stride, mode)?;
    meta.push((
        "run.mode".into(),
        match run.mode() {
            Mode::Direct => "direct".into(),
            Mode::Gauge => "gauge".into(),
        },
    ));

    let (out_dir, format) = output_options(map)?;
    meta.push(("output.format".into(), format.token().into()));
    Ok(SimSetup { run, out_dir, format, meta })
}

// Echo numeric keys re-formatted (not verbatim) so the meta table is
// canonical regardless of how the config spelled the number.
fn echo_numeric(map: &KeyMap, key: &str) -> Result<String> {
    if key.ends_with("j_lo") || key.ends_with("j_hi") {
        Ok(req_usize(map, key)?.to_string())
    } else {
        Ok(fmt_f64(req_f64(map, key)?))
    }
}

/// The subset needed to tabulate the boundary kernel: lattice, step and
/// output options. Other sections are allowed so a simulation config can
/// be reused as-is.
pub struct KernelSetup {
    pub lat: LatticeSpec,
    pub dt: f64,
    pub n_steps: usize,
    pub out_dir: Option<PathBuf>,
    pub format: Format,
}

pub fn build_kernel_setup(map: &KeyMap) -> Result<KernelSetup> {
    let lat = LatticeSpec::new(
        req_f64(map, "lattice.a")?,
        req_f64(map, "lattice.m")?,
        req_usize(map, "lattice.m_index")?,
    )?;
    let dt = req_f64(map, "run.dt")?;
    let n_steps = req_usize(map, "run.n_steps")?;
    let (out_dir, format) = output_options(map)?;
    Ok(KernelSetup { lat, dt, n_steps, out_dir, format })
}
