//! Scenario-level simulation: link budgets, coverage maps, imaging and
//! multi-hop chains.
//!
//! All paths are deterministic fields. A transmitter with power `P_t`, gain
//! `G_t` and pattern `F_t` produces `|E| = √(60·P_t·G_t·F_t)/d` with phase
//! `e^{-jkd}`. Panels re-radiate through the per-unit scattering model. A
//! receiver turns a field into a complex amplitude in `√W` by the factor
//! `√(G_r·F_r·λ²/(8π·η))`, so a bare point-to-point link reproduces Friis.
//! Paths arriving at the same receiver add coherently; noise only enters as
//! a power floor in imaging.

pub mod coverage;
pub mod export;
pub mod imaging;
pub mod link;
pub mod multihop;

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::beamforming::{brute_force_opt, das_opt, greedy_opt, objective_of_states, GainDecomposition, PhaseCodebook};
use crate::em::{codebook_weights, unit_contributions, Illumination, Polarization, ETA0};
use crate::error::{invalid, Result};
use crate::geometry::{local_angles, Antenna, RisPanel, UnitCell, Vec3};
use crate::numeric::{db, pairwise_sum};

pub use coverage::{coverage_map, CodebookPolicy, CoverageGrid, GridSpec};
pub use imaging::{soi_codebooks, soi_image_with_codebooks, soi_imaging, Scatterer, SoiGrid, SoiOptimizer, SoiSpec};
pub use link::{link_budget, LinkReport};
pub use multihop::{multi_hop_experiment, ChainGeometry, HopReport, MultiHopReport};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Axis-aligned box that removes any straight path crossing it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Blocker {
    pub min: Vec3,
    pub max: Vec3,
}

impl Blocker {
    pub fn new(a: Vec3, b: Vec3) -> Result<Self> {
        let min = a.inf(&b);
        let max = a.sup(&b);
        if (0..3).any(|i| !(max[i] > min[i])) {
            return Err(invalid("blocker must have positive extent on every axis"));
        }
        Ok(Self { min, max })
    }

    /// Slab test on the open segment `a → b`.
    pub fn blocks(&self, a: &Vec3, b: &Vec3) -> bool {
        let d = b - a;
        let (mut t0, mut t1) = (0.0f64, 1.0f64);
        for i in 0..3 {
            if d[i].abs() < 1e-15 {
                if a[i] <= self.min[i] || a[i] >= self.max[i] {
                    return false;
                }
            } else {
                let inv = 1.0 / d[i];
                let (mut lo, mut hi) = ((self.min[i] - a[i]) * inv, (self.max[i] - a[i]) * inv);
                if lo > hi {
                    std::mem::swap(&mut lo, &mut hi);
                }
                t0 = t0.max(lo);
                t1 = t1.min(hi);
                if t0 >= t1 {
                    return false;
                }
            }
        }
        true
    }
}

/// How panels are wired together.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Topology {
    /// Every panel is lit by the transmitter and seen by the receiver.
    #[default]
    Parallel,
    /// Panel `k+1` is lit only by panel `k`; the receiver sees the last
    /// panel (and the transmitter if unobstructed).
    Chain,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub tx: Antenna,
    pub rx: Antenna,
    pub panels: Vec<RisPanel>,
    pub frequency_hz: f64,
    pub tx_power_dbm: f64,
    pub noise_floor_dbm: f64,
    pub blockers: Vec<Blocker>,
    pub topology: Topology,
}

impl Scenario {
    pub fn new(tx: Antenna, rx: Antenna, frequency_hz: f64, tx_power_dbm: f64) -> Result<Self> {
        let sc = Self {
            tx,
            rx,
            panels: Vec::new(),
            frequency_hz,
            tx_power_dbm,
            noise_floor_dbm: -100.0,
            blockers: Vec::new(),
            topology: Topology::Parallel,
        };
        sc.validate()?;
        Ok(sc)
    }

    pub fn with_panel(mut self, panel: RisPanel) -> Self {
        self.panels.push(panel);
        self
    }

    pub fn with_blocker(mut self, blocker: Blocker) -> Self {
        self.blockers.push(blocker);
        self
    }

    pub fn with_topology(mut self, topology: Topology) -> Self {
        self.topology = topology;
        self
    }

    pub fn with_noise_floor(mut self, dbm: f64) -> Self {
        self.noise_floor_dbm = dbm;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.frequency_hz > 0.0) || !self.frequency_hz.is_finite() {
            return Err(invalid("frequency must be positive"));
        }
        if !self.tx_power_dbm.is_finite() || !self.noise_floor_dbm.is_finite() {
            return Err(invalid("powers must be finite"));
        }
        Ok(())
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.frequency_hz
    }

    pub fn tx_power_watts(&self) -> f64 {
        1e-3 * 10f64.powf(self.tx_power_dbm / 10.0)
    }

    pub fn line_of_sight(&self, a: &Vec3, b: &Vec3) -> bool {
        !self.blockers.iter().any(|bl| bl.blocks(a, b))
    }

    /// The scenario receiver relocated to `position`.
    pub fn rx_at(&self, position: Vec3) -> Antenna {
        Antenna {
            pose: self.rx.pose.moved_to(position),
            ..self.rx.clone()
        }
    }

    pub(crate) fn check_codebooks(&self, codebooks: &[PhaseCodebook]) -> Result<()> {
        if codebooks.len() != self.panels.len() {
            return Err(invalid(format!(
                "{} codebooks for {} panels",
                codebooks.len(),
                self.panels.len()
            )));
        }
        for (i, (cb, p)) in codebooks.iter().zip(&self.panels).enumerate() {
            if cb.rows() != p.rows || cb.cols() != p.cols || cb.num_states() != p.unit.num_states() {
                return Err(invalid(format!("codebook {i} does not match its panel")));
            }
        }
        Ok(())
    }

    /// Every panel with all units in its strongest-reflecting state.
    pub fn mirror_codebooks(&self) -> Vec<PhaseCodebook> {
        self.panels
            .iter()
            .map(|p| PhaseCodebook::filled(p.rows, p.cols, p.unit.bits(), p.unit.mirror_state()))
            .collect()
    }

    /// Every panel with all units in state 0.
    pub fn off_codebooks(&self) -> Vec<PhaseCodebook> {
        self.panels
            .iter()
            .map(|p| PhaseCodebook::zeros(p.rows, p.cols, p.unit.bits()))
            .collect()
    }
}

/// Received power in dBm of a complex amplitude in `√W`.
pub fn amplitude_to_dbm(v: Complex64) -> f64 {
    db(v.norm_sqr() * 1e3)
}

/// Field radiated by the transmitter at `point`, zero if obstructed.
pub(crate) fn tx_field(sc: &Scenario, point: &Vec3) -> Complex64 {
    let origin = sc.tx.position();
    let d = (point - origin).norm();
    if d < 1e-12 || !sc.line_of_sight(&origin, point) {
        return Complex64::new(0.0, 0.0);
    }
    let k = 2.0 * PI / sc.wavelength();
    let amp = (60.0 * sc.tx_power_watts() * sc.tx.gain * sc.tx.pattern_toward(point)).sqrt() / d;
    Complex64::from_polar(amp, -k * d)
}

/// Field-to-amplitude factor of `antenna` for a wave arriving from `from`.
pub(crate) fn receive_factor(sc: &Scenario, antenna: &Antenna, from: &Vec3) -> f64 {
    let lambda = sc.wavelength();
    (antenna.gain * antenna.pattern_toward(from) * lambda * lambda / (8.0 * PI * ETA0)).sqrt()
}

fn incident_directions(panel: &RisPanel, source: &Vec3) -> Vec<crate::geometry::SphericalDirection> {
    panel
        .unit_positions()
        .iter()
        .map(|p| {
            local_angles(&panel.pose.moved_to(*p), source)
                .unwrap_or(crate::geometry::SphericalDirection { azimuth: 0.0, elevation: PI })
        })
        .collect()
}

pub(crate) fn illumination_from_tx(sc: &Scenario, panel: &RisPanel) -> Illumination {
    let src = sc.tx.position();
    let reachable = sc.line_of_sight(&src, &panel.center());
    let amplitudes = panel
        .unit_positions()
        .iter()
        .map(|p| if reachable { tx_field(sc, p) } else { Complex64::new(0.0, 0.0) })
        .collect();
    Illumination {
        amplitudes,
        directions: incident_directions(panel, &src),
    }
}

/// Field scattered by `src` (illuminated by `illum`, weights `w`) onto the
/// units of `dst`.
pub(crate) fn illumination_from_panel(
    sc: &Scenario,
    src: &RisPanel,
    illum: &Illumination,
    w: &[Complex64],
    dst: &RisPanel,
) -> Result<Illumination> {
    let lambda = sc.wavelength();
    let reachable = sc.line_of_sight(&src.center(), &dst.center());
    let mut amplitudes = Vec::with_capacity(dst.num_units());
    for p in dst.unit_positions() {
        if !reachable {
            amplitudes.push(Complex64::new(0.0, 0.0));
            continue;
        }
        let c = unit_contributions(src, illum, &p, lambda, Polarization::CoPolar)?;
        amplitudes.push(crate::em::superpose(&c, w));
    }
    Ok(Illumination {
        amplitudes,
        directions: incident_directions(dst, &src.center()),
    })
}

/// Per-unit received amplitudes (weight one) of `panel` at `antenna`.
pub(crate) fn contributions_at(
    sc: &Scenario,
    panel: &RisPanel,
    illum: &Illumination,
    antenna: &Antenna,
) -> Result<Vec<Complex64>> {
    let target = antenna.position();
    if !sc.line_of_sight(&panel.center(), &target) {
        return Ok(vec![Complex64::new(0.0, 0.0); panel.num_units()]);
    }
    let f = receive_factor(sc, antenna, &panel.center());
    let c = unit_contributions(panel, illum, &target, sc.wavelength(), Polarization::CoPolar)?;
    Ok(c.into_iter().map(|v| v * f).collect())
}

/// Illumination and weights of every panel for a fixed set of codebooks.
#[derive(Debug, Clone)]
pub struct Propagation {
    pub illuminations: Vec<Illumination>,
    pub weights: Vec<Vec<Complex64>>,
}

impl Propagation {
    pub fn new(sc: &Scenario, codebooks: &[PhaseCodebook]) -> Result<Self> {
        sc.validate()?;
        sc.check_codebooks(codebooks)?;
        let weights: Vec<Vec<Complex64>> = sc
            .panels
            .iter()
            .zip(codebooks)
            .map(|(p, cb)| codebook_weights(&p.unit, cb))
            .collect();
        let mut illuminations: Vec<Illumination> = Vec::with_capacity(sc.panels.len());
        for (i, panel) in sc.panels.iter().enumerate() {
            let ill = match sc.topology {
                Topology::Chain if i > 0 => {
                    illumination_from_panel(sc, &sc.panels[i - 1], &illuminations[i - 1], &weights[i - 1], panel)?
                }
                _ => illumination_from_tx(sc, panel),
            };
            illuminations.push(ill);
        }
        Ok(Self {
            illuminations,
            weights,
        })
    }

    /// Indices of panels whose output reaches the receiver directly.
    pub fn terminal_panels(sc: &Scenario) -> Vec<usize> {
        match sc.topology {
            Topology::Parallel => (0..sc.panels.len()).collect(),
            Topology::Chain => sc.panels.len().checked_sub(1).into_iter().collect(),
        }
    }

    /// Direct-path amplitude at `antenna`.
    pub fn direct_amplitude(sc: &Scenario, antenna: &Antenna) -> Complex64 {
        tx_field(sc, &antenna.position()) * receive_factor(sc, antenna, &sc.tx.position())
    }

    /// Amplitude at `antenna` from panel `i` alone.
    pub fn panel_amplitude(&self, sc: &Scenario, i: usize, antenna: &Antenna) -> Result<Complex64> {
        let c = contributions_at(sc, &sc.panels[i], &self.illuminations[i], antenna)?;
        Ok(crate::em::superpose(&c, &self.weights[i]))
    }

    /// Total amplitude at `antenna`: direct path plus terminal panels.
    pub fn received_amplitude(&self, sc: &Scenario, antenna: &Antenna) -> Result<Complex64> {
        let mut terms = vec![Self::direct_amplitude(sc, antenna)];
        for i in Self::terminal_panels(sc) {
            terms.push(self.panel_amplitude(sc, i, antenna)?);
        }
        Ok(pairwise_sum(&terms))
    }

    /// Decomposition of the amplitude at `antenna` over panel `i`'s states,
    /// with `other` the fixed remainder. The scattering weight of state `s`
    /// is `(1 - A·e^{jφ_s})/2`, so each unit contributes
    /// `c_m/2 - (A·c_m/2)·e^{jφ_s}`.
    pub fn decomposition(
        &self,
        sc: &Scenario,
        i: usize,
        antenna: &Antenna,
        other: Complex64,
    ) -> Result<GainDecomposition> {
        let panel = &sc.panels[i];
        let c = contributions_at(sc, panel, &self.illuminations[i], antenna)?;
        decompose(panel, &c, other)
    }
}

pub(crate) fn decompose(panel: &RisPanel, contributions: &[Complex64], other: Complex64) -> Result<GainDecomposition> {
    let a = panel.unit.amplitude_response;
    let half: Vec<Complex64> = contributions.iter().map(|v| v * 0.5).collect();
    GainDecomposition::new(other + pairwise_sum(&half), half.iter().map(|v| -v * a).collect())
}

/// Discrete solver applied to one panel at a time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Solver {
    #[default]
    Das,
    /// Coordinate ascent from the all-zero codebook.
    Greedy { max_passes: usize },
    BruteForce,
}

impl Solver {
    pub fn solve(&self, g: &GainDecomposition, unit: &UnitCell) -> Result<Vec<u8>> {
        match *self {
            Solver::Das => Ok(das_opt(g, unit.bits(), unit)?.states),
            Solver::BruteForce => Ok(brute_force_opt(g, unit.bits(), unit)?.states),
            Solver::Greedy { max_passes } => {
                let init = PhaseCodebook::zeros(1, g.len(), unit.bits());
                let eval = |cb: &PhaseCodebook| objective_of_states(g, unit, cb.states()).unwrap_or(0.0);
                Ok(greedy_opt(eval, &init, max_passes)?.codebook.states().to_vec())
            }
        }
    }

    fn codebook(&self, panel: &RisPanel, g: &GainDecomposition) -> Result<PhaseCodebook> {
        PhaseCodebook::new(panel.rows, panel.cols, panel.unit.bits(), self.solve(g, &panel.unit)?)
    }
}

/// Optimize panel `i` for the decomposition at `antenna`.
pub(crate) fn optimize_panel(
    sc: &Scenario,
    prop: &Propagation,
    i: usize,
    antenna: &Antenna,
    other: Complex64,
    solver: Solver,
) -> Result<PhaseCodebook> {
    let g = prop.decomposition(sc, i, antenna, other)?;
    solver.codebook(&sc.panels[i], &g)
}

/// Codebooks focusing every panel on the scenario receiver. Chains are
/// optimized hop by hop, parallel panels one after another.
pub fn optimize_codebooks(sc: &Scenario, solver: Solver) -> Result<Vec<PhaseCodebook>> {
    coverage::focus_codebooks(sc, &sc.rx, solver)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Pose;

    #[test]
    fn blocker_slab_test() {
        let b = Blocker::new(Vec3::new(-1.0, -1.0, -1.0), Vec3::new(1.0, 1.0, 1.0)).unwrap();
        assert!(b.blocks(&Vec3::new(-5.0, 0.0, 0.0), &Vec3::new(5.0, 0.0, 0.0)));
        assert!(!b.blocks(&Vec3::new(-5.0, 2.0, 0.0), &Vec3::new(5.0, 2.0, 0.0)));
        assert!(!b.blocks(&Vec3::new(-5.0, 0.0, 0.0), &Vec3::new(-2.0, 0.0, 0.0)));
        assert!(b.blocks(&Vec3::new(-5.0, -5.0, 0.0), &Vec3::new(5.0, 5.0, 0.0)));
        assert!(Blocker::new(Vec3::zeros(), Vec3::new(1.0, 0.0, 1.0)).is_err());
    }

    #[test]
    fn friis_direct_path() {
        let tx = Antenna::isotropic(Vec3::zeros());
        let rx = Antenna::isotropic(Vec3::new(10.0, 0.0, 0.0));
        let sc = Scenario::new(tx, rx, 5.8e9, 0.0).unwrap();
        let v = Propagation::direct_amplitude(&sc, &sc.rx);
        let lambda = sc.wavelength();
        let friis = 1e-3 * (lambda / (4.0 * PI * 10.0)).powi(2);
        assert!((v.norm_sqr() / friis - 1.0).abs() < 1e-12);
    }

    #[test]
    fn decomposition_reproduces_any_codebook() {
        let lambda = SPEED_OF_LIGHT / 5.8e9;
        let pose = Pose::facing(Vec3::zeros(), Vec3::new(0.0, 1.0, 0.0), Vec3::z()).unwrap();
        let panel = RisPanel::half_wavelength(3, 4, 2, lambda, pose).unwrap();
        let tx = Antenna::isotropic(Vec3::new(-1.0, 2.0, 0.3));
        let rx = Antenna::isotropic(Vec3::new(1.5, 2.5, -0.2));
        let sc = Scenario::new(tx, rx, 5.8e9, 10.0).unwrap().with_panel(panel);
        let cb = PhaseCodebook::new(3, 4, 2, vec![0, 1, 2, 3, 3, 2, 1, 0, 1, 1, 2, 2]).unwrap();
        let prop = Propagation::new(&sc, &[cb.clone()]).unwrap();
        let total = prop.received_amplitude(&sc, &sc.rx).unwrap();
        let direct = Propagation::direct_amplitude(&sc, &sc.rx);
        let g = prop.decomposition(&sc, 0, &sc.rx, direct).unwrap();
        let obj = crate::beamforming::objective_of_states(&g, &sc.panels[0].unit, cb.states()).unwrap();
        assert!((obj / total.norm_sqr() - 1.0).abs() < 1e-10);
    }
}
