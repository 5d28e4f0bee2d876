//! Physical response of RIS units and panels.
//!
//! Each unit is a rectangular `a × b` scatterer with reflection coefficient
//! `Γ`. Its far-field scattered components carry the factor
//! `C = -j(1-Γ)/2`, so a unit in the `Γ = 1` state does not scatter and a
//! unit in the `Γ = -1` state scatters at full strength. Panels are the
//! coherent sum of their units with exact per-unit distances, which also
//! covers observation points in the radiating near field.
//!
//! Angles handed to the unit formulas are local-frame [`SphericalDirection`]s.
//! The incident direction points from the unit toward the source; with that
//! convention the specular direction `(φ_i + π, θ_i)` makes both sinc
//! arguments vanish.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::beamforming::PhaseCodebook;
use crate::error::{invalid, Result};
use crate::geometry::{local_angles, RisPanel, SphericalDirection, UnitCell, Vec3};
use crate::numeric::{pairwise_sum, sinc};

/// Free-space wave impedance used for field/power conversions (120π Ω).
pub const ETA0: f64 = 120.0 * PI;

const J: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneWave {
    /// Peak field amplitude, V/m.
    pub amplitude: f64,
    pub wavelength: f64,
    /// Direction toward the source, in the panel's local frame.
    pub incident_dir: SphericalDirection,
}

impl PlaneWave {
    pub fn new(amplitude: f64, wavelength: f64, incident_dir: SphericalDirection) -> Result<Self> {
        if !(amplitude >= 0.0) || !(wavelength > 0.0) {
            return Err(invalid("plane wave needs amplitude >= 0 and wavelength > 0"));
        }
        Ok(Self {
            amplitude,
            wavelength,
            incident_dir,
        })
    }
}

/// Spherical components of a scattered field. `e_theta` runs along the
/// polar (elevation) unit vector and `e_phi` along the azimuthal one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatteredField {
    pub e_r: Complex64,
    pub e_theta: Complex64,
    pub e_phi: Complex64,
}

impl ScatteredField {
    pub fn zero() -> Self {
        let z = Complex64::new(0.0, 0.0);
        Self {
            e_r: z,
            e_theta: z,
            e_phi: z,
        }
    }

    pub fn magnitude(&self) -> f64 {
        (self.e_r.norm_sqr() + self.e_theta.norm_sqr() + self.e_phi.norm_sqr()).sqrt()
    }
}

/// Which scalar a receiver extracts from a scattered field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Polarization {
    Theta,
    Phi,
    /// Projection onto the incident polarization `φ̂_i`, i.e. a receiver
    /// matched to the illuminating wave.
    #[default]
    CoPolar,
}

/// Directivity term of a rectangular `a × b` scatterer: the product of two
/// `sin(x)/x` factors.
pub fn sa_factor(
    a: f64,
    b: f64,
    scatter: &SphericalDirection,
    incident: &SphericalDirection,
    wavelength: f64,
) -> f64 {
    let (ss, si) = (scatter.elevation.sin(), incident.elevation.sin());
    let u = PI * a / wavelength * (ss * scatter.azimuth.cos() + si * incident.azimuth.cos());
    let v = PI * b / wavelength * (ss * scatter.azimuth.sin() + si * incident.azimuth.sin());
    sinc(u) * sinc(v)
}

/// The `(1-Γ)/2` scattering weight; the field prefactor is `-j` times this.
pub fn scatter_weight(gamma: Complex64) -> Complex64 {
    (Complex64::new(1.0, 0.0) - gamma) * 0.5
}

/// Field components for unit incident amplitude and unit scattering weight,
/// before the `-j·w` prefactor.
fn unit_kernel(
    unit: &UnitCell,
    incident: &SphericalDirection,
    scatter: &SphericalDirection,
    r_s: f64,
    wavelength: f64,
) -> (Complex64, Complex64) {
    let k = 2.0 * PI / wavelength;
    let spread = Complex64::from_polar(1.0 / r_s, -k * r_s);
    let sa = sa_factor(unit.width_a, unit.height_b, scatter, incident, wavelength);
    let base = spread * (unit.area() / wavelength * incident.elevation.cos() * sa);
    let (si, ci) = incident.azimuth.sin_cos();
    let (ss, cs) = scatter.azimuth.sin_cos();
    let theta = base * (scatter.elevation.cos() * (ci * ss - si * cs));
    let phi = base * (si * ss + ci * cs);
    (theta, phi)
}

/// Scattered far field of one unit at distance `r_s` in direction `scatter`.
pub fn unit_scattered_field(
    unit: &UnitCell,
    gamma: Complex64,
    wave: &PlaneWave,
    scatter: &SphericalDirection,
    r_s: f64,
) -> Result<ScatteredField> {
    if !(r_s > 0.0) {
        return Err(invalid("scattering distance must be positive"));
    }
    if gamma.norm() > 1.0 + 1e-12 {
        return Err(invalid("|Γ| must not exceed 1"));
    }
    let c = -J * scatter_weight(gamma) * wave.amplitude;
    let (theta, phi) = unit_kernel(unit, &wave.incident_dir, scatter, r_s, wave.wavelength);
    Ok(ScatteredField {
        e_r: Complex64::new(0.0, 0.0),
        e_theta: c * theta,
        e_phi: c * phi,
    })
}

/// Extract the receiver scalar from a field scattered toward `scatter`
/// under illumination from `incident`.
pub fn polarization_component(
    field: &ScatteredField,
    scatter: &SphericalDirection,
    incident: &SphericalDirection,
    pol: Polarization,
) -> Complex64 {
    match pol {
        Polarization::Theta => field.e_theta,
        Polarization::Phi => field.e_phi,
        Polarization::CoPolar => {
            let d = scatter.azimuth - incident.azimuth;
            field.e_theta * (scatter.elevation.cos() * d.sin()) + field.e_phi * d.cos()
        }
    }
}

/// Per-unit incident field on a panel: complex amplitude at each unit
/// center and the local direction toward the source.
#[derive(Debug, Clone, PartialEq)]
pub struct Illumination {
    pub amplitudes: Vec<Complex64>,
    pub directions: Vec<SphericalDirection>,
}

impl Illumination {
    /// Plane wave with phase referenced to the panel center.
    pub fn plane_wave(panel: &RisPanel, wave: &PlaneWave) -> Self {
        let k = 2.0 * PI / wave.wavelength;
        let toward_source = panel.pose.local_to_world_dir(&wave.incident_dir.unit_vector());
        let center = panel.center();
        let amplitudes = panel
            .unit_positions()
            .iter()
            .map(|p| Complex64::from_polar(wave.amplitude, k * toward_source.dot(&(p - center))))
            .collect();
        Self {
            amplitudes,
            directions: vec![wave.incident_dir; panel.num_units()],
        }
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }
}

/// Field at `observation` contributed by each unit when its scattering
/// weight `(1-Γ)/2` equals one. The panel field for any configuration is
/// `Σ_m contribution_m · w_m`. Units that see the source or the observer
/// from behind contribute nothing.
pub fn unit_contributions(
    panel: &RisPanel,
    illumination: &Illumination,
    observation: &Vec3,
    wavelength: f64,
    pol: Polarization,
) -> Result<Vec<Complex64>> {
    if illumination.len() != panel.num_units() {
        return Err(invalid("illumination does not match panel size"));
    }
    let positions = panel.unit_positions();
    let mut out = Vec::with_capacity(positions.len());
    for (m, pos) in positions.iter().enumerate() {
        let incident = &illumination.directions[m];
        let pose = panel.pose.moved_to(*pos);
        let r_s = (observation - pos).norm();
        let scatter = match local_angles(&pose, observation) {
            Ok(d) => d,
            Err(_) => {
                out.push(Complex64::new(0.0, 0.0));
                continue;
            }
        };
        if incident.elevation >= PI / 2.0 || scatter.elevation >= PI / 2.0 {
            out.push(Complex64::new(0.0, 0.0));
            continue;
        }
        let (theta, phi) = unit_kernel(&panel.unit, incident, &scatter, r_s, wavelength);
        let field = ScatteredField {
            e_r: Complex64::new(0.0, 0.0),
            e_theta: -J * theta,
            e_phi: -J * phi,
        };
        out.push(illumination.amplitudes[m] * polarization_component(&field, &scatter, incident, pol));
    }
    Ok(out)
}

/// Coherent sum of weighted unit contributions.
pub fn superpose(contributions: &[Complex64], weights: &[Complex64]) -> Complex64 {
    let terms: Vec<Complex64> = contributions
        .iter()
        .zip(weights)
        .map(|(c, w)| c * w)
        .collect();
    pairwise_sum(&terms)
}

/// Scattering weights `(1-Γ_m)/2` for a codebook on `unit`.
pub fn codebook_weights(unit: &UnitCell, codebook: &PhaseCodebook) -> Vec<Complex64> {
    codebook
        .states()
        .iter()
        .map(|&s| scatter_weight(unit.reflection(s)))
        .collect()
}

/// Field of a panel under plane-wave illumination, at a world point.
pub fn panel_scattered_field(
    panel: &RisPanel,
    codebook: &PhaseCodebook,
    wave: &PlaneWave,
    observation: &Vec3,
    pol: Polarization,
) -> Result<Complex64> {
    if codebook.rows() != panel.rows || codebook.cols() != panel.cols {
        return Err(invalid(format!(
            "codebook is {}x{} but panel is {}x{}",
            codebook.rows(),
            codebook.cols(),
            panel.rows,
            panel.cols
        )));
    }
    if codebook.num_states() > panel.unit.num_states() {
        return Err(invalid("codebook uses more states than the unit provides"));
    }
    let illumination = Illumination::plane_wave(panel, wave);
    let contrib = unit_contributions(panel, &illumination, observation, wave.wavelength, pol)?;
    Ok(superpose(&contrib, &codebook_weights(&panel.unit, codebook)))
}

/// Far-field pattern value of a panel toward a local direction, with the
/// common `e^{-jkR}/R` factor removed. `weights` are per-unit scattering
/// weights (`(1-Γ)/2`, or its harmonic coefficients for time-coded panels).
pub fn panel_far_field(
    panel: &RisPanel,
    illumination: &Illumination,
    weights: &[Complex64],
    direction: &SphericalDirection,
    wavelength: f64,
    pol: Polarization,
) -> Result<Complex64> {
    if weights.len() != panel.num_units() || illumination.len() != panel.num_units() {
        return Err(invalid("weights/illumination do not match panel size"));
    }
    if direction.elevation >= PI / 2.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let k = 2.0 * PI / wavelength;
    let u = direction.unit_vector();
    let mut terms = Vec::with_capacity(weights.len());
    for r in 0..panel.rows {
        for c in 0..panel.cols {
            let m = r * panel.cols + c;
            let incident = &illumination.directions[m];
            if incident.elevation >= PI / 2.0 {
                terms.push(Complex64::new(0.0, 0.0));
                continue;
            }
            let (theta, phi) = unit_kernel(&panel.unit, incident, direction, 1.0, wavelength);
            // unit_kernel includes e^{-jk}; strip it along with the 1/r = 1
            let strip = Complex64::from_polar(1.0, k);
            let field = ScatteredField {
                e_r: Complex64::new(0.0, 0.0),
                e_theta: -J * theta * strip,
                e_phi: -J * phi * strip,
            };
            let path = Complex64::from_polar(1.0, k * u.dot(&panel.unit_local_position(r, c)));
            terms.push(
                illumination.amplitudes[m]
                    * weights[m]
                    * path
                    * polarization_component(&field, direction, incident, pol),
            );
        }
    }
    Ok(pairwise_sum(&terms))
}

/// Inputs of the far-field beamforming path-loss expression.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathLossParams {
    /// Transmitter to panel distance, m.
    pub d1: f64,
    /// Panel to receiver distance, m.
    pub d2: f64,
    pub gain_tx: f64,
    pub gain_rx: f64,
    /// Gain of a single unit.
    pub gain_unit: f64,
    pub rows: usize,
    pub cols: usize,
    pub dx: f64,
    pub dy: f64,
    pub wavelength: f64,
    pub pattern_tx: f64,
    pub pattern_rx: f64,
    /// Amplitude response of the units (not the unit area).
    pub amplitude: f64,
}

impl PathLossParams {
    pub fn validate(&self) -> Result<()> {
        let lengths = [self.d1, self.d2, self.dx, self.dy, self.wavelength];
        if lengths.iter().any(|v| !(*v > 0.0)) {
            return Err(invalid("path-loss lengths must be positive"));
        }
        if [self.gain_tx, self.gain_rx, self.gain_unit].iter().any(|g| !(*g > 0.0)) {
            return Err(invalid("path-loss gains must be positive"));
        }
        if self.rows == 0 || self.cols == 0 {
            return Err(invalid("panel must have rows and columns"));
        }
        if !(0.0..=1.0).contains(&self.pattern_tx) || !(0.0..=1.0).contains(&self.pattern_rx) {
            return Err(invalid("pattern values must lie in [0, 1]"));
        }
        if !(self.amplitude > 0.0 && self.amplitude <= 1.0) {
            return Err(invalid("amplitude response must lie in (0, 1]"));
        }
        Ok(())
    }
}

/// Far-field beamforming path loss in dB (positive). A zero pattern value
/// means the link is blocked and yields `+∞`.
pub fn farfield_beamforming_path_loss(p: &PathLossParams) -> Result<f64> {
    p.validate()?;
    if p.pattern_tx == 0.0 || p.pattern_rx == 0.0 {
        return Ok(f64::INFINITY);
    }
    let n2 = (p.rows as f64).powi(2) * (p.cols as f64).powi(2);
    let num = 64.0 * PI.powi(3) * (p.d1 * p.d2).powi(2);
    let den = p.gain_tx
        * p.gain_rx
        * p.gain_unit
        * n2
        * p.dx
        * p.dy
        * p.wavelength.powi(2)
        * p.pattern_tx
        * p.pattern_rx
        * p.amplitude.powi(2);
    Ok(10.0 * (num / den).log10())
}

/// Unit gain at which the path-loss expression agrees with the field
/// model for a unit of area `a·b` on a `dx × dy` grid: `4π(ab)²/(dx·dy·λ²)`.
pub fn aperture_unit_gain(unit: &UnitCell, dx: f64, dy: f64, wavelength: f64) -> f64 {
    4.0 * PI * unit.area().powi(2) / (dx * dy * wavelength.powi(2))
}

pub fn received_power_dbm(tx_power_dbm: f64, loss_db: f64) -> f64 {
    tx_power_dbm - loss_db
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Pose;
    use proptest::prelude::*;

    fn dir(az_deg: f64, el_deg: f64) -> SphericalDirection {
        SphericalDirection::from_degrees(az_deg, el_deg).unwrap()
    }

    #[test]
    fn sa_removable_singularity() {
        let s = sa_factor(0.01, 0.02, &dir(10.0, 0.0), &dir(-70.0, 0.0), 0.05);
        assert_eq!(s, 1.0);
    }

    #[test]
    fn sa_symmetric_in_scatter_and_incident() {
        let (s, i) = (dir(33.0, 41.0), dir(-120.0, 17.0));
        assert_eq!(sa_factor(0.02, 0.03, &s, &i, 0.05), sa_factor(0.02, 0.03, &i, &s, 0.05));
    }

    #[test]
    fn sa_first_factor_value() {
        // first sinc argument is π/2 and the second vanishes
        let lambda = 0.05;
        let s = sa_factor(lambda, lambda, &dir(0.0, 30.0), &dir(0.0, 0.0), lambda);
        assert!((s - 0.636_619_772_367_581_3).abs() < 1e-12);
    }

    #[test]
    fn specular_direction_has_unit_sa() {
        let inc = dir(25.0, 40.0);
        let s = sa_factor(0.03, 0.02, &inc.specular(), &inc, 0.05);
        assert!((s - 1.0).abs() < 1e-12);
    }

    fn half_wave_unit(lambda: f64) -> UnitCell {
        UnitCell::uniform(1, lambda / 2.0, lambda / 2.0).unwrap()
    }

    #[test]
    fn gamma_one_scatters_nothing() {
        let lambda = 0.05;
        let wave = PlaneWave::new(2.0, lambda, dir(10.0, 20.0)).unwrap();
        let f = unit_scattered_field(&half_wave_unit(lambda), Complex64::new(1.0, 0.0), &wave, &dir(50.0, 30.0), 3.0).unwrap();
        assert_eq!(f.magnitude(), 0.0);
    }

    #[test]
    fn doubling_distance_halves_and_rotates() {
        let lambda = 0.05;
        let unit = half_wave_unit(lambda);
        let wave = PlaneWave::new(1.0, lambda, dir(10.0, 20.0)).unwrap();
        let s = dir(80.0, 25.0);
        let g = Complex64::new(-1.0, 0.0);
        let r = 1.013;
        let a = unit_scattered_field(&unit, g, &wave, &s, r).unwrap();
        let b = unit_scattered_field(&unit, g, &wave, &s, 2.0 * r).unwrap();
        for (x, y) in [(a.e_theta, b.e_theta), (a.e_phi, b.e_phi)] {
            assert!((y.norm() - x.norm() / 2.0).abs() < 1e-15);
            let expected = (x * Complex64::from_polar(0.5, -2.0 * PI * r / lambda) - y).norm();
            assert!(expected < 1e-12 * x.norm().max(1e-300));
        }
        assert_eq!(a.e_r, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn normal_incidence_broadside_magnitude() {
        // Γ = -1 gives |C| = 1; at θ_i = θ_s = 0 both obliquity factors and
        // Sa are one, and the polarization factors are sin(0) and cos(0).
        let lambda = 0.06;
        let unit = half_wave_unit(lambda);
        let wave = PlaneWave::new(3.0, lambda, SphericalDirection::boresight()).unwrap();
        let r_s = 10.0 * lambda;
        let f = unit_scattered_field(&unit, Complex64::new(-1.0, 0.0), &wave, &SphericalDirection::boresight(), r_s).unwrap();
        let expected = 1.0 * (lambda * lambda / 4.0) / (lambda * r_s) * 3.0;
        assert!(f.e_theta.norm() < 1e-15);
        assert!((f.e_phi.norm() - expected).abs() < 1e-12 * expected);
    }

    #[test]
    fn unit_field_rejects_bad_distance() {
        let lambda = 0.05;
        let wave = PlaneWave::new(1.0, lambda, SphericalDirection::boresight()).unwrap();
        assert!(unit_scattered_field(&half_wave_unit(lambda), Complex64::new(-1.0, 0.0), &wave, &SphericalDirection::boresight(), 0.0).is_err());
    }

    fn facing_panel(rows: usize, cols: usize, lambda: f64) -> RisPanel {
        RisPanel::half_wavelength(rows, cols, 1, lambda, Pose::at(Vec3::zeros())).unwrap()
    }

    #[test]
    fn single_unit_panel_matches_unit_field() {
        let lambda = 0.05;
        let panel = facing_panel(1, 1, lambda);
        let wave = PlaneWave::new(1.5, lambda, dir(30.0, 20.0)).unwrap();
        let obs = Vec3::new(0.3, -0.2, 2.0);
        let cb = PhaseCodebook::new(1, 1, 1, vec![1]).unwrap();
        let panel_val = panel_scattered_field(&panel, &cb, &wave, &obs, Polarization::Theta).unwrap();
        let s = local_angles(&panel.pose, &obs).unwrap();
        let unit = unit_scattered_field(&panel.unit, Complex64::new(-1.0, 0.0), &wave, &s, obs.norm()).unwrap();
        assert!((panel_val - unit.e_theta).norm() < 1e-15);
        let phi = panel_scattered_field(&panel, &cb, &wave, &obs, Polarization::Phi).unwrap();
        assert!((phi - unit.e_phi).norm() < 1e-15);
    }

    #[test]
    fn all_gamma_one_gives_zero_field() {
        let lambda = 0.05;
        let panel = facing_panel(3, 4, lambda);
        let wave = PlaneWave::new(1.0, lambda, dir(30.0, 20.0)).unwrap();
        let cb = PhaseCodebook::zeros(3, 4, 1);
        let v = panel_scattered_field(&panel, &cb, &wave, &Vec3::new(0.1, 0.2, 1.0), Polarization::CoPolar).unwrap();
        assert_eq!(v.norm(), 0.0);
    }

    #[test]
    fn two_by_two_coherent_addition() {
        let lambda = 0.05;
        let panel = facing_panel(2, 2, lambda);
        let single = facing_panel(1, 1, lambda);
        let wave = PlaneWave::new(1.0, lambda, SphericalDirection::boresight()).unwrap();
        let obs = Vec3::new(0.0, 0.0, 200.0);
        let all_on = PhaseCodebook::new(2, 2, 1, vec![1; 4]).unwrap();
        let one = PhaseCodebook::new(1, 1, 1, vec![1]).unwrap();
        let sum = panel_scattered_field(&panel, &all_on, &wave, &obs, Polarization::CoPolar).unwrap();
        let unit = panel_scattered_field(&single, &one, &wave, &obs, Polarization::CoPolar).unwrap();
        let ratio = sum.norm() / unit.norm();
        assert!((ratio - 4.0).abs() < 0.04, "ratio {ratio}");
    }

    #[test]
    fn panel_field_dimension_mismatch() {
        let lambda = 0.05;
        let panel = facing_panel(2, 2, lambda);
        let wave = PlaneWave::new(1.0, lambda, SphericalDirection::boresight()).unwrap();
        let cb = PhaseCodebook::zeros(2, 3, 1);
        assert!(panel_scattered_field(&panel, &cb, &wave, &Vec3::new(0.0, 0.0, 1.0), Polarization::CoPolar).is_err());
    }

    fn base_params() -> PathLossParams {
        let lambda = 0.0517;
        PathLossParams {
            d1: 5.0,
            d2: 5.0,
            gain_tx: 1.0,
            gain_rx: 1.0,
            gain_unit: 1.0,
            rows: 10,
            cols: 16,
            dx: lambda / 2.0,
            dy: lambda / 2.0,
            wavelength: lambda,
            pattern_tx: 1.0,
            pattern_rx: 1.0,
            amplitude: 1.0,
        }
    }

    #[test]
    fn path_loss_distance_scaling() {
        let p = base_params();
        let a = farfield_beamforming_path_loss(&p).unwrap();
        let b = farfield_beamforming_path_loss(&PathLossParams { d1: 10.0, ..p }).unwrap();
        assert!((b - a - 20.0 * 2f64.log10()).abs() < 1e-9);
    }

    #[test]
    fn path_loss_size_scaling() {
        let p = base_params();
        let a = farfield_beamforming_path_loss(&p).unwrap();
        let b = farfield_beamforming_path_loss(&PathLossParams { rows: 20, cols: 32, ..p }).unwrap();
        assert!((a - b - 12.041_199_826_559_248).abs() < 1e-9);
    }

    #[test]
    fn path_loss_blocked_and_invalid() {
        let p = base_params();
        assert_eq!(farfield_beamforming_path_loss(&PathLossParams { pattern_rx: 0.0, ..p }).unwrap(), f64::INFINITY);
        assert!(farfield_beamforming_path_loss(&PathLossParams { d2: 0.0, ..p }).is_err());
        assert!(farfield_beamforming_path_loss(&PathLossParams { pattern_tx: 1.5, ..p }).is_err());
    }

    #[test]
    fn received_power_arithmetic() {
        assert_eq!(received_power_dbm(0.0, 0.0), 0.0);
        assert_eq!(received_power_dbm(10.0, 60.0), -50.0);
        assert_eq!(received_power_dbm(-16.0, 80.0), -96.0);
    }

    proptest! {
        #[test]
        fn sa_bounded(
            a in 1e-3..0.2f64, b in 1e-3..0.2f64,
            az_s in -PI..PI, el_s in 0.0..PI, az_i in -PI..PI, el_i in 0.0..PI,
        ) {
            let s = SphericalDirection::new(az_s, el_s).unwrap();
            let i = SphericalDirection::new(az_i, el_i).unwrap();
            prop_assert!(sa_factor(a, b, &s, &i, 0.05).abs() <= 1.0 + 1e-15);
        }

        #[test]
        fn path_loss_reciprocal(
            d1 in 0.5..50.0f64, d2 in 0.5..50.0f64, g1 in 0.5..100.0f64, g2 in 0.5..100.0f64,
            f1 in 0.01..1.0f64, f2 in 0.01..1.0f64,
        ) {
            let p = PathLossParams { d1, d2, gain_tx: g1, gain_rx: g2, pattern_tx: f1, pattern_rx: f2, ..base_params() };
            let q = PathLossParams { d1: d2, d2: d1, gain_tx: g2, gain_rx: g1, pattern_tx: f2, pattern_rx: f1, ..p };
            let a = farfield_beamforming_path_loss(&p).unwrap();
            let b = farfield_beamforming_path_loss(&q).unwrap();
            prop_assert!((a - b).abs() < 1e-9);
        }
    }
}
