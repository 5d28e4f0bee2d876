//! Imaging a space of interest by sweeping focused codebooks.
//!
//! For every voxel the panels are configured to focus on its center. A
//! point scatterer lit by the resulting field re-radiates toward the
//! receiver; the intensity of voxel `n` is the receiver power under its
//! codebook. By default the empty-scene response is subtracted first, so
//! only the scattered field and the noise floor remain.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::beamforming::PhaseCodebook;
#[cfg(test)]
use crate::beamforming::objective_of_states;
use crate::error::{invalid, Result};
use crate::geometry::{local_angles, Antenna, Vec3};
use crate::numeric::from_db;

use super::coverage::focus_codebooks;
use super::{amplitude_to_dbm, receive_factor, Propagation, Scenario, Solver};

/// Voxel `(i, j, l)` is centered at `origin + (i·step.x, j·step.y, l·step.z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SoiSpec {
    pub origin: Vec3,
    pub dims: [usize; 3],
    pub step: Vec3,
    /// Remove the empty-scene response before taking the power.
    pub subtract_background: bool,
}

impl SoiSpec {
    pub fn new(origin: Vec3, dims: [usize; 3], step: Vec3) -> Result<Self> {
        let spec = Self {
            origin,
            dims,
            step,
            subtract_background: true,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dims.contains(&0) {
            return Err(invalid("SOI needs at least one voxel per axis"));
        }
        if (0..3).any(|i| !(self.step[i] > 0.0) || !self.step[i].is_finite()) {
            return Err(invalid("SOI voxel size must be positive"));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, v: [usize; 3]) -> usize {
        (v[0] * self.dims[1] + v[1]) * self.dims[2] + v[2]
    }

    pub fn voxel(&self, idx: usize) -> [usize; 3] {
        let l = idx % self.dims[2];
        let rest = idx / self.dims[2];
        [rest / self.dims[1], rest % self.dims[1], l]
    }

    pub fn center(&self, v: [usize; 3]) -> Vec3 {
        self.origin + Vec3::new(v[0] as f64 * self.step.x, v[1] as f64 * self.step.y, v[2] as f64 * self.step.z)
    }

    fn check_visible(&self, sc: &Scenario) -> Result<()> {
        for idx in 0..self.len() {
            let c = self.center(self.voxel(idx));
            for (p, panel) in sc.panels.iter().enumerate() {
                match local_angles(&panel.pose, &c) {
                    Ok(d) if d.elevation < std::f64::consts::FRAC_PI_2 => {}
                    _ => return Err(invalid(format!("voxel {:?} is behind panel {p}", self.voxel(idx)))),
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SoiOptimizer {
    /// Coordinate ascent, one panel at a time.
    Greedy { max_passes: usize },
    Das,
}

/// Isotropic point re-radiator: field `ρ·E_inc/r` at distance `r` (meters).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scatterer {
    pub position: Vec3,
    pub reflectivity: f64,
}

impl Scatterer {
    pub fn new(position: Vec3, reflectivity: f64) -> Result<Self> {
        if !(reflectivity > 0.0 && reflectivity <= 1.0) {
            return Err(invalid("reflectivity must lie in (0, 1]"));
        }
        Ok(Self { position, reflectivity })
    }

    pub fn at_voxel(spec: &SoiSpec, voxel: [usize; 3], reflectivity: f64) -> Result<Self> {
        if (0..3).any(|i| voxel[i] >= spec.dims[i]) {
            return Err(invalid(format!("voxel {voxel:?} outside the SOI")));
        }
        Self::new(spec.center(voxel), reflectivity)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SoiGrid {
    pub spec: SoiSpec,
    /// Per voxel, one codebook per panel.
    pub voxel_codebooks: Vec<Vec<PhaseCodebook>>,
    /// Per voxel received power, dBm.
    pub intensity_dbm: Vec<f64>,
}

impl SoiGrid {
    pub fn get(&self, v: [usize; 3]) -> f64 {
        self.intensity_dbm[self.spec.index(v)]
    }

    /// Brightest voxel; the first one wins ties.
    pub fn argmax(&self) -> [usize; 3] {
        self.top(1)[0]
    }

    /// The `n` brightest voxels, brightest first, ties broken by index.
    pub fn top(&self, n: usize) -> Vec<[usize; 3]> {
        let mut order: Vec<usize> = (0..self.intensity_dbm.len()).collect();
        order.sort_by(|&a, &b| self.intensity_dbm[b].total_cmp(&self.intensity_dbm[a]).then(a.cmp(&b)));
        order.into_iter().take(n).map(|i| self.spec.voxel(i)).collect()
    }

    /// Spread between the brightest and dimmest voxel, dB.
    pub fn dynamic_range_db(&self) -> f64 {
        let max = self.intensity_dbm.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = self.intensity_dbm.iter().copied().fold(f64::INFINITY, f64::min);
        max - min
    }

    /// Whether the image is flat within `tolerance_db`.
    pub fn is_flat(&self, tolerance_db: f64) -> bool {
        self.dynamic_range_db() < tolerance_db
    }
}

fn voxel_codebooks(sc: &Scenario, target: &Vec3, optimizer: SoiOptimizer) -> Result<Vec<PhaseCodebook>> {
    let solver = match optimizer {
        SoiOptimizer::Das => Solver::Das,
        SoiOptimizer::Greedy { max_passes } => Solver::Greedy { max_passes },
    };
    focus_codebooks(sc, &Antenna::isotropic(*target), solver)
}

/// One focused codebook set per voxel; depends on geometry only.
pub fn soi_codebooks(sc: &Scenario, spec: &SoiSpec, optimizer: SoiOptimizer) -> Result<Vec<Vec<PhaseCodebook>>> {
    spec.validate()?;
    sc.validate()?;
    if sc.panels.is_empty() {
        return Err(invalid("imaging needs at least one panel"));
    }
    spec.check_visible(sc)?;
    (0..spec.len())
        .into_par_iter()
        .map(|idx| voxel_codebooks(sc, &spec.center(spec.voxel(idx)), optimizer))
        .collect()
}

/// Amplitude at the receiver re-radiated by `scatterers` under `prop`.
fn scattered_amplitude(sc: &Scenario, prop: &Propagation, scatterers: &[Scatterer]) -> Result<Complex64> {
    let k = 2.0 * std::f64::consts::PI / sc.wavelength();
    let rx_pos = sc.rx.position();
    let mut total = Complex64::new(0.0, 0.0);
    for s in scatterers {
        let probe = Antenna::isotropic(s.position);
        let incident = prop.received_amplitude(sc, &probe)? / receive_factor(sc, &probe, &rx_pos);
        let r = (rx_pos - s.position).norm();
        if r < 1e-9 || !sc.line_of_sight(&s.position, &rx_pos) {
            continue;
        }
        let field = incident * s.reflectivity / r * Complex64::from_polar(1.0, -k * r);
        total += field * receive_factor(sc, &sc.rx, &s.position);
    }
    Ok(total)
}

pub fn soi_image_with_codebooks(
    sc: &Scenario,
    spec: &SoiSpec,
    codebooks: &[Vec<PhaseCodebook>],
    scatterers: &[Scatterer],
) -> Result<SoiGrid> {
    spec.validate()?;
    if codebooks.len() != spec.len() {
        return Err(invalid(format!("{} codebook sets for {} voxels", codebooks.len(), spec.len())));
    }
    let noise = from_db(sc.noise_floor_dbm) * 1e-3;
    let intensity_dbm = codebooks
        .par_iter()
        .map(|cbs| {
            let prop = Propagation::new(sc, cbs)?;
            let mut amp = scattered_amplitude(sc, &prop, scatterers)?;
            if !spec.subtract_background {
                amp += prop.received_amplitude(sc, &sc.rx)?;
            }
            let watts = amp.norm_sqr() + noise;
            Ok(amplitude_to_dbm(Complex64::new(watts.sqrt(), 0.0)))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(SoiGrid {
        spec: *spec,
        voxel_codebooks: codebooks.to_vec(),
        intensity_dbm,
    })
}

pub fn soi_imaging(sc: &Scenario, spec: &SoiSpec, optimizer: SoiOptimizer, scatterers: &[Scatterer]) -> Result<SoiGrid> {
    let codebooks = soi_codebooks(sc, spec, optimizer)?;
    soi_image_with_codebooks(sc, spec, &codebooks, scatterers)
}

/// Power the first panel's codebook focuses on `target`.
#[cfg(test)]
fn focus_power(sc: &Scenario, cbs: &[PhaseCodebook], target: &Vec3) -> f64 {
    let prop = Propagation::new(sc, cbs).unwrap();
    let probe = Antenna::isotropic(*target);
    let g = super::decompose(
        &sc.panels[0],
        &super::contributions_at(sc, &sc.panels[0], &prop.illuminations[0], &probe).unwrap(),
        Propagation::direct_amplitude(sc, &probe),
    )
    .unwrap();
    objective_of_states(&g, &sc.panels[0].unit, cbs[0].states()).unwrap()
}
