//! Chains of panels relaying a link hop by hop.
//!
//! Each panel is optimized in order to focus on the center of the next
//! panel; the last one focuses on the receiver. A hop whose target lies
//! close to the specular direction of its incoming wave gains little over a
//! plain reflector: the uniform codebook already steers there. The report
//! flags those hops geometrically.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::beamforming::PhaseCodebook;
use crate::em::{codebook_weights, superpose, Illumination};
use crate::error::{invalid, Error, Result};
use crate::geometry::{local_angles, Antenna, Pose, RisPanel, Vec3};

use super::{
    amplitude_to_dbm, contributions_at, decompose, illumination_from_panel, illumination_from_tx, Propagation, Scenario,
    Solver, Topology,
};

/// Fraction of `λ/D_min` below which a hop counts as specular. `λ/D` is
/// the null-to-null half width of a uniform aperture's main lobe; half of
/// it is roughly the half-power half width.
pub const SPECULAR_LOBE_FRACTION: f64 = 0.5;

/// Angular radius around the specular direction treated as specular.
pub fn specular_threshold(panel: &RisPanel, wavelength: f64) -> f64 {
    SPECULAR_LOBE_FRACTION * wavelength / panel.width().min(panel.height())
}

fn source_position(sc: &Scenario, k: usize) -> Vec3 {
    if k == 0 {
        sc.tx.position()
    } else {
        sc.panels[k - 1].center()
    }
}

fn check_hop(sc: &Scenario, from: &Vec3, panel: usize, to: &Vec3) -> Result<()> {
    let p = &sc.panels[panel];
    for (what, point) in [("source", from), ("target", to)] {
        if !sc.line_of_sight(point, &p.center()) {
            return Err(Error::BlockedLink(format!("{what} of panel {panel} is occluded")));
        }
        match local_angles(&p.pose, point) {
            Ok(d) if d.elevation < std::f64::consts::FRAC_PI_2 => {}
            _ => {
                return Err(Error::BlockedLink(format!("{what} of panel {panel} is behind it")));
            }
        }
    }
    Ok(())
}

struct HopState {
    before: f64,
    after: f64,
}

/// Sequential optimization of a chain scenario; `final_rx` is the last
/// hop's receiver. `on_hop` sees every hop's before/after powers.
fn run_chain(
    sc: &Scenario,
    final_rx: &Antenna,
    solver: Solver,
    mut on_hop: impl FnMut(usize, &HopState),
) -> Result<Vec<PhaseCodebook>> {
    let n = sc.panels.len();
    if n == 0 {
        return Err(invalid("chain must hold at least one panel"));
    }
    let mut codebooks = sc.mirror_codebooks();
    let mut illum: Illumination = illumination_from_tx(sc, &sc.panels[0]);
    for k in 0..n {
        let panel = &sc.panels[k];
        let last = k + 1 == n;
        let target = if last {
            final_rx.clone()
        } else {
            Antenna::isotropic(sc.panels[k + 1].center())
        };
        check_hop(sc, &source_position(sc, k), k, &target.position())?;
        let other = if last {
            Propagation::direct_amplitude(sc, &target)
        } else {
            Default::default()
        };
        let contrib = contributions_at(sc, panel, &illum, &target)?;
        let before = other + superpose(&contrib, &codebook_weights(&panel.unit, &codebooks[k]));

        let g = decompose(panel, &contrib, other)?;
        codebooks[k] = PhaseCodebook::new(panel.rows, panel.cols, panel.unit.bits(), solver.solve(&g, &panel.unit)?)?;
        let w = codebook_weights(&panel.unit, &codebooks[k]);
        let after = other + superpose(&contrib, &w);
        on_hop(
            k,
            &HopState {
                before: amplitude_to_dbm(before),
                after: amplitude_to_dbm(after),
            },
        );
        if !last {
            illum = illumination_from_panel(sc, panel, &illum, &w, &sc.panels[k + 1])?;
        }
    }
    Ok(codebooks)
}

pub(crate) fn optimize_chain(
    sc: &Scenario,
    chain: &[usize],
    final_rx: &Antenna,
    solver: Solver,
) -> Result<Vec<PhaseCodebook>> {
    let ordered = chain.iter().enumerate().all(|(i, &c)| i == c) && chain.len() == sc.panels.len();
    if !ordered {
        return Err(invalid("chain must list every panel in order"));
    }
    run_chain(sc, final_rx, solver, |_, _| {})
}

fn chain_scenario(chain: &[RisPanel], sc: &Scenario) -> Scenario {
    Scenario {
        panels: chain.to_vec(),
        topology: Topology::Chain,
        ..sc.clone()
    }
}

/// Optimize `chain` hop by hop inside the world described by `sc` (its
/// transmitter, receiver and blockers). Returns one codebook per panel.
pub fn multi_hop_optimize(chain: &[RisPanel], sc: &Scenario) -> Result<Vec<PhaseCodebook>> {
    let world = chain_scenario(chain, sc);
    run_chain(&world, &world.rx, Solver::Das, |_, _| {})
}

#[derive(Debug, Clone, PartialEq)]
pub struct HopReport {
    pub panel: usize,
    /// Power at the hop's target with this panel still a plain reflector.
    pub before_dbm: f64,
    pub after_dbm: f64,
    pub gain_db: f64,
    /// Angle between the target and the specular direction of the incoming
    /// wave, radians.
    pub specular_offset: f64,
    pub specular: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiHopReport {
    pub hops: Vec<HopReport>,
    pub codebooks: Vec<PhaseCodebook>,
    /// Receiver power with every panel a plain reflector.
    pub rx_mirror_dbm: f64,
    pub rx_optimized_dbm: f64,
}

/// Sequential chain optimization with per-hop before/after powers and
/// specular flags. Panels of `sc` form the chain in order.
pub fn multi_hop_experiment(sc: &Scenario) -> Result<MultiHopReport> {
    let world = chain_scenario(&sc.panels, sc);
    let lambda = world.wavelength();
    let mut hops = Vec::with_capacity(world.panels.len());
    let codebooks = run_chain(&world, &world.rx, Solver::Das, |k, st| {
        let panel = &world.panels[k];
        let target = if k + 1 == world.panels.len() {
            world.rx.position()
        } else {
            world.panels[k + 1].center()
        };
        let offset = match (
            local_angles(&panel.pose, &source_position(&world, k)),
            local_angles(&panel.pose, &target),
        ) {
            (Ok(inc), Ok(out)) => inc.specular().angle_to(&out),
            _ => std::f64::consts::PI,
        };
        hops.push(HopReport {
            panel: k,
            before_dbm: st.before,
            after_dbm: st.after,
            gain_db: st.after - st.before,
            specular_offset: offset,
            specular: offset < specular_threshold(panel, lambda),
        });
    })?;
    let rx_mirror_dbm = super::link_budget(&world, &world.mirror_codebooks())?.rx_power_dbm;
    let rx_optimized_dbm = super::link_budget(&world, &codebooks)?.rx_power_dbm;
    Ok(MultiHopReport {
        hops,
        codebooks,
        rx_mirror_dbm,
        rx_optimized_dbm,
    })
}

/// Corridor chain: panels alternate between two facing sides, each hop
/// leaving at a given angle from the panel normal.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainGeometry {
    pub frequency_hz: f64,
    pub rows: usize,
    pub cols: usize,
    pub bits: u32,
    pub tx_power_dbm: f64,
    /// Transmitter distance to the first panel, m.
    pub tx_distance: f64,
    /// Transmitter angle from the first panel's normal, degrees.
    pub tx_angle_deg: f64,
    pub hop_lengths: Vec<f64>,
    /// Hop directions from the normal of the panel they leave, degrees.
    pub hop_angles_deg: Vec<f64>,
    /// Receiver distance along the last panel's normal, m.
    pub rx_distance: f64,
    pub horn_gain: f64,
    pub horn_exponent: f64,
}

impl Default for ChainGeometry {
    fn default() -> Self {
        Self {
            frequency_hz: 5.8e9,
            rows: 10,
            cols: 16,
            bits: 1,
            tx_power_dbm: 0.0,
            tx_distance: 0.65,
            tx_angle_deg: 60.0,
            hop_lengths: vec![2.55, 2.70, 2.85],
            hop_angles_deg: vec![54.48, 58.09, 50.30],
            rx_distance: 1.0,
            horn_gain: 30.0,
            horn_exponent: 14.0,
        }
    }
}

impl ChainGeometry {
    pub fn scenario(&self) -> Result<Scenario> {
        if self.hop_lengths.len() != self.hop_angles_deg.len() {
            return Err(invalid("one angle per hop is required"));
        }
        let lambda = super::SPEED_OF_LIGHT / self.frequency_hz;
        let up = Vec3::z();
        let mut centers = vec![Vec3::zeros()];
        let mut normals = vec![Vec3::y()];
        for (i, (&len, &ang)) in self.hop_lengths.iter().zip(&self.hop_angles_deg).enumerate() {
            let n = normals[i];
            let a = ang.to_radians();
            let next = centers[i] + (Vec3::x() * a.sin() + n * a.cos()) * len;
            centers.push(next);
            normals.push(-n);
        }
        let t = self.tx_angle_deg.to_radians();
        let tx_pos = centers[0] + (-Vec3::x() * t.sin() + normals[0] * t.cos()) * self.tx_distance;
        let last = centers.len() - 1;
        let rx_pos = centers[last] + normals[last] * self.rx_distance;
        let tx = Antenna::new(
            Pose::facing(tx_pos, (centers[0] - tx_pos).normalize(), up)?,
            self.horn_gain,
            self.horn_exponent,
        )?;
        let rx = Antenna::new(
            Pose::facing(rx_pos, (centers[last] - rx_pos).normalize(), up)?,
            self.horn_gain,
            self.horn_exponent,
        )?;
        let mut sc = Scenario::new(tx, rx, self.frequency_hz, self.tx_power_dbm)?.with_topology(Topology::Chain);
        for (c, n) in centers.iter().zip(&normals) {
            let pose = Pose::facing(*c, *n, up)?;
            sc.panels.push(RisPanel::half_wavelength(self.rows, self.cols, self.bits, lambda, pose)?);
        }
        Ok(sc)
    }

    /// Distances scaled by up to ±15% and angles moved by up to ±8°.
    pub fn perturbed<R: Rng + ?Sized>(&self, rng: &mut R) -> Self {
        let mut g = self.clone();
        let mut len = |d: f64| d * rng.random_range(0.85..1.15);
        g.tx_distance = len(g.tx_distance);
        g.rx_distance = len(g.rx_distance);
        for d in g.hop_lengths.iter_mut() {
            *d = len(*d);
        }
        let mut ang = |a: f64| (a + rng.random_range(-8.0..8.0)).clamp(15.0, 75.0);
        g.tx_angle_deg = ang(g.tx_angle_deg);
        for a in g.hop_angles_deg.iter_mut() {
            *a = ang(*a);
        }
        g
    }
}

/// Codebooks with independent uniformly random states.
pub fn random_codebooks<R: Rng + ?Sized>(sc: &Scenario, rng: &mut R) -> Vec<PhaseCodebook> {
    sc.panels
        .iter()
        .map(|p| {
            let k = p.unit.num_states() as u8;
            let states = (0..p.num_units()).map(|_| rng.random_range(0..k)).collect();
            PhaseCodebook::new(p.rows, p.cols, p.unit.bits(), states).expect("random states in range")
        })
        .collect()
}

/// [`random_codebooks`] drawn from `ChaCha8Rng::seed_from_u64(seed)`.
pub fn seeded_random_codebooks(sc: &Scenario, seed: u64) -> Vec<PhaseCodebook> {
    random_codebooks(sc, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Receiver power of the optimized chain and of random codebooks, for
/// `count` perturbed geometries. Instance `i` draws from
/// `ChaCha8Rng::seed_from_u64(seed)` on stream `i`.
pub fn chain_ensemble(base: &ChainGeometry, seed: u64, count: usize) -> Result<Vec<(f64, f64)>> {
    (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let sc = base.perturbed(&mut rng).scenario()?;
            let optimized = multi_hop_optimize(&sc.panels, &sc)?;
            let random = random_codebooks(&sc, &mut rng);
            Ok((
                super::link_budget(&sc, &optimized)?.rx_power_dbm,
                super::link_budget(&sc, &random)?.rx_power_dbm,
            ))
        })
        .collect()
}
