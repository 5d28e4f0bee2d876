//! Received-power heat maps over a horizontal grid.

use rayon::prelude::*;

use crate::beamforming::PhaseCodebook;
use crate::error::{invalid, Result};
use crate::geometry::{Antenna, Vec3};

use super::{amplitude_to_dbm, multihop, optimize_panel, Propagation, Scenario, Solver, Topology};

/// Cell `(i, j)` sits at `origin + (i·step, j·step, 0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub origin: Vec3,
    pub nx: usize,
    pub ny: usize,
    pub step: f64,
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.nx == 0 || self.ny == 0 {
            return Err(invalid("grid must have at least one cell per axis"));
        }
        if !(self.step > 0.0) || !self.step.is_finite() {
            return Err(invalid("grid step must be positive"));
        }
        Ok(())
    }

    pub fn point(&self, i: usize, j: usize) -> Vec3 {
        self.origin + Vec3::new(i as f64 * self.step, j as f64 * self.step, 0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CodebookPolicy {
    /// All units in state 0.
    Off,
    Fixed(Vec<PhaseCodebook>),
    /// Beamform toward a point, then hold the codebooks over the grid.
    OptimizeToPoint(Vec3),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageGrid {
    pub origin: Vec3,
    pub nx: usize,
    pub ny: usize,
    pub step: f64,
    /// Row-major over `i`: cell `(i, j)` at `i·ny + j`. `-∞` where no
    /// path arrives.
    pub values_dbm: Vec<f64>,
}

impl CoverageGrid {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values_dbm[i * self.ny + j]
    }

    pub fn point(&self, i: usize, j: usize) -> Vec3 {
        self.origin + Vec3::new(i as f64 * self.step, j as f64 * self.step, 0.0)
    }

    /// Cell with the highest value; the first one wins ties.
    pub fn argmax(&self) -> (usize, usize) {
        let mut best = 0;
        for (idx, v) in self.values_dbm.iter().enumerate() {
            if *v > self.values_dbm[best] {
                best = idx;
            }
        }
        (best / self.ny, best % self.ny)
    }

    /// Mean in dB over the cells within `radius` of `center` (horizontal
    /// distance). `None` if no cell qualifies.
    pub fn region_mean_db(&self, center: &Vec3, radius: f64) -> Option<f64> {
        let mut acc = 0.0;
        let mut n = 0usize;
        for i in 0..self.nx {
            for j in 0..self.ny {
                let p = self.point(i, j);
                if (p.x - center.x).hypot(p.y - center.y) <= radius {
                    acc += self.get(i, j);
                    n += 1;
                }
            }
        }
        (n > 0).then(|| acc / n as f64)
    }
}

/// Codebooks focusing the scenario on `target`: chained panels use the
/// multi-hop procedure, parallel panels are optimized one after another
/// against everything else already in place.
pub fn optimize_to_point(sc: &Scenario, target: &Vec3) -> Result<Vec<PhaseCodebook>> {
    focus_codebooks(sc, &sc.rx_at(*target), Solver::Das)
}

/// Codebooks maximizing the total amplitude at `rx`.
pub(crate) fn focus_codebooks(sc: &Scenario, rx: &Antenna, solver: Solver) -> Result<Vec<PhaseCodebook>> {
    if sc.panels.is_empty() {
        return Ok(Vec::new());
    }
    let rx = rx.clone();
    match sc.topology {
        Topology::Chain => {
            let chain: Vec<usize> = (0..sc.panels.len()).collect();
            multihop::optimize_chain(sc, &chain, &rx, solver)
        }
        Topology::Parallel => {
            let mut codebooks = sc.off_codebooks();
            for i in 0..sc.panels.len() {
                let prop = Propagation::new(sc, &codebooks)?;
                let total = prop.received_amplitude(sc, &rx)?;
                let own = prop.panel_amplitude(sc, i, &rx)?;
                codebooks[i] = optimize_panel(sc, &prop, i, &rx, total - own, solver)?;
            }
            Ok(codebooks)
        }
    }
}

pub fn coverage_map(sc: &Scenario, grid: &GridSpec, policy: &CodebookPolicy) -> Result<CoverageGrid> {
    grid.validate()?;
    let codebooks = match policy {
        CodebookPolicy::Off => sc.off_codebooks(),
        CodebookPolicy::Fixed(cbs) => cbs.clone(),
        CodebookPolicy::OptimizeToPoint(p) => optimize_to_point(sc, p)?,
    };
    coverage_with_codebooks(sc, grid, &codebooks)
}

pub fn coverage_with_codebooks(sc: &Scenario, grid: &GridSpec, codebooks: &[PhaseCodebook]) -> Result<CoverageGrid> {
    grid.validate()?;
    let prop = Propagation::new(sc, codebooks)?;
    let values_dbm = (0..grid.nx * grid.ny)
        .into_par_iter()
        .map(|idx| {
            let rx = sc.rx_at(grid.point(idx / grid.ny, idx % grid.ny));
            prop.received_amplitude(sc, &rx).map(amplitude_to_dbm)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(CoverageGrid {
        origin: grid.origin,
        nx: grid.nx,
        ny: grid.ny,
        step: grid.step,
        values_dbm,
    })
}
