//! JSON scenario files.

use std::path::Path;

use serde::Deserialize;

use ris_sim::geometry::{Antenna, Pose, RisPanel, UnitCell, Vec3};
use ris_sim::simulator::{Blocker, GridSpec, Scenario, SoiSpec, Topology, SPEED_OF_LIGHT};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Algo {
    #[default]
    Das,
    Greedy,
    Brute,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TopologyName {
    #[default]
    Parallel,
    Chain,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AntennaSpec {
    pub position: [f64; 3],
    /// Main-lobe direction; omitted means the world `+z` axis.
    pub boresight: Option<[f64; 3]>,
    pub up: Option<[f64; 3]>,
    #[serde(default = "one")]
    pub gain: f64,
    #[serde(default)]
    pub pattern_exponent: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PanelSpec {
    pub center: [f64; 3],
    pub normal: [f64; 3],
    pub up: Option<[f64; 3]>,
    pub rows: usize,
    pub cols: usize,
    #[serde(default = "one_bit")]
    pub bits: u32,
    /// Unit pitch in meters; half a wavelength when omitted.
    pub spacing_m: Option<f64>,
    #[serde(default = "one")]
    pub amplitude: f64,
    /// Explicit reflection phases; `2^bits` equally spaced states otherwise.
    pub phase_states_deg: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockerSpec {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridFile {
    pub origin: [f64; 3],
    pub nx: usize,
    pub ny: usize,
    pub step: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SoiFile {
    pub origin: [f64; 3],
    pub dims: [usize; 3],
    pub step: [f64; 3],
    #[serde(default = "yes")]
    pub subtract_background: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub frequency_hz: f64,
    #[serde(default)]
    pub tx_power_dbm: f64,
    #[serde(default = "default_noise")]
    pub noise_floor_dbm: f64,
    #[serde(default)]
    pub topology: TopologyName,
    #[serde(default)]
    pub seed: u64,
    pub tx: AntennaSpec,
    pub rx: AntennaSpec,
    #[serde(default)]
    pub panels: Vec<PanelSpec>,
    #[serde(default)]
    pub blockers: Vec<BlockerSpec>,
    pub grid: Option<GridFile>,
    pub soi: Option<SoiFile>,
    #[serde(default)]
    pub optimizer: Algo,
    #[serde(default = "default_passes")]
    pub greedy_passes: usize,
}

fn one() -> f64 {
    1.0
}

fn one_bit() -> u32 {
    1
}

fn yes() -> bool {
    true
}

fn default_noise() -> f64 {
    -100.0
}

fn default_passes() -> usize {
    20
}

fn v(a: [f64; 3]) -> Vec3 {
    Vec3::new(a[0], a[1], a[2])
}

/// World `+z`, or `+x` when `normal` is (nearly) vertical.
fn default_up(normal: &Vec3) -> Vec3 {
    if normal.normalize().z.abs() > 0.99 {
        Vec3::x()
    } else {
        Vec3::z()
    }
}

impl ScenarioFile {
    pub fn parse(text: &str, origin: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| {
            CliError::input(
                "schema",
                format!("{origin}:{}:{}: {e}", e.line(), e.column()),
            )
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::input("io", format!("{}: {e}", path.display())))?;
        Self::parse(&text, &path.display().to_string())
    }

    fn antenna(spec: &AntennaSpec, what: &str) -> Result<Antenna, CliError> {
        let position = v(spec.position);
        let pose = match spec.boresight {
            Some(b) => {
                let b = v(b);
                let up = spec.up.map(v).unwrap_or_else(|| default_up(&b));
                Pose::facing(position, b, up)
            }
            None => Ok(Pose::at(position)),
        };
        pose.and_then(|p| Antenna::new(p, spec.gain, spec.pattern_exponent))
            .map_err(|e| CliError::input("schema", format!("{what}: {e}")))
    }

    fn panel(spec: &PanelSpec, wavelength: f64, bits_override: Option<u32>) -> Result<RisPanel, CliError> {
        let bits = bits_override.unwrap_or(spec.bits);
        let normal = v(spec.normal);
        let up = spec.up.map(v).unwrap_or_else(|| default_up(&normal));
        let pitch = spec.spacing_m.unwrap_or(wavelength / 2.0);
        let unit = match (&spec.phase_states_deg, bits_override) {
            (Some(phases), None) => UnitCell::new(
                pitch,
                pitch,
                spec.amplitude,
                phases.iter().map(|d| d.to_radians()).collect(),
            ),
            _ => UnitCell::uniform(bits, pitch, pitch).and_then(|u| {
                UnitCell::new(u.width_a, u.height_b, spec.amplitude, u.phase_states)
            }),
        };
        Pose::facing(v(spec.center), normal, up)
            .and_then(|pose| RisPanel::new(spec.rows, spec.cols, pitch, pitch, unit?, pose))
            .map_err(|e| CliError::input("schema", e.to_string()))
    }

    /// The simulation scenario; `bits` replaces every panel's resolution.
    pub fn scenario(&self, bits: Option<u32>) -> Result<Scenario, CliError> {
        if !(self.frequency_hz > 0.0) {
            return Err(CliError::input("schema", "frequency_hz must be positive"));
        }
        let wavelength = SPEED_OF_LIGHT / self.frequency_hz;
        let tx = Self::antenna(&self.tx, "tx")?;
        let rx = Self::antenna(&self.rx, "rx")?;
        let mut sc = Scenario::new(tx, rx, self.frequency_hz, self.tx_power_dbm)
            .map_err(|e| CliError::input("schema", e.to_string()))?
            .with_noise_floor(self.noise_floor_dbm)
            .with_topology(match self.topology {
                TopologyName::Parallel => Topology::Parallel,
                TopologyName::Chain => Topology::Chain,
            });
        for (i, p) in self.panels.iter().enumerate() {
            let panel = Self::panel(p, wavelength, bits)
                .map_err(|e| CliError::input("schema", format!("panels[{i}]: {}", e.message)))?;
            sc.panels.push(panel);
        }
        for (i, b) in self.blockers.iter().enumerate() {
            let blocker = Blocker::new(v(b.min), v(b.max))
                .map_err(|e| CliError::input("schema", format!("blockers[{i}]: {e}")))?;
            sc.blockers.push(blocker);
        }
        sc.validate().map_err(|e| CliError::input("schema", e.to_string()))?;
        Ok(sc)
    }

    pub fn grid(&self) -> Option<GridSpec> {
        self.grid.as_ref().map(|g| GridSpec {
            origin: v(g.origin),
            nx: g.nx,
            ny: g.ny,
            step: g.step,
        })
    }

    /// SOI from the file, with `dims` replacing the voxel counts.
    pub fn soi(&self, dims: Option<[usize; 3]>) -> Result<SoiSpec, CliError> {
        let s = self
            .soi
            .as_ref()
            .ok_or_else(|| CliError::input("schema", "scenario has no `soi` section"))?;
        let mut spec = SoiSpec::new(v(s.origin), dims.unwrap_or(s.dims), v(s.step))
            .map_err(|e| CliError::input("schema", format!("soi: {e}")))?;
        spec.subtract_background = s.subtract_background;
        Ok(spec)
    }
}
