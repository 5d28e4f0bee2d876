//! Panels, antennas, poses and array steering vectors.
//!
//! Angles follow one convention everywhere: a [`SphericalDirection`] carries
//! an azimuth measured in the local x–y plane from the local x axis, and an
//! elevation measured from the local z axis (the panel normal or antenna
//! boresight). Elevation 0 is boresight, π/2 is grazing.

use std::f64::consts::{PI, TAU};

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::numeric::wrap_angle;

pub type Vec3 = Vector3<f64>;

const ORTHONORMAL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericalDirection {
    /// Radians in `[-π, π)`.
    pub azimuth: f64,
    /// Radians in `[0, π]`, measured from the local z axis.
    pub elevation: f64,
}

impl SphericalDirection {
    /// Builds a direction, wrapping the azimuth into `[-π, π)`.
    pub fn new(azimuth: f64, elevation: f64) -> Result<Self> {
        if !azimuth.is_finite() || !elevation.is_finite() {
            return Err(invalid("direction angles must be finite"));
        }
        if !(0.0..=PI).contains(&elevation) {
            return Err(invalid(format!("elevation {elevation} outside [0, π]")));
        }
        Ok(Self {
            azimuth: wrap_angle(azimuth),
            elevation,
        })
    }

    pub fn from_degrees(azimuth_deg: f64, elevation_deg: f64) -> Result<Self> {
        Self::new(azimuth_deg.to_radians(), elevation_deg.to_radians())
    }

    /// The boresight direction (elevation zero).
    pub fn boresight() -> Self {
        Self {
            azimuth: 0.0,
            elevation: 0.0,
        }
    }

    /// Direction of a (not necessarily normalized) local-frame vector.
    pub fn from_vector(v: &Vec3) -> Result<Self> {
        let r = v.norm();
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::DegenerateGeometry(
                "direction of a zero-length vector".into(),
            ));
        }
        let elevation = (v.z / r).clamp(-1.0, 1.0).acos();
        let azimuth = if v.x == 0.0 && v.y == 0.0 {
            0.0
        } else {
            wrap_angle(v.y.atan2(v.x))
        };
        Ok(Self { azimuth, elevation })
    }

    /// Unit vector in the local frame.
    pub fn unit_vector(&self) -> Vec3 {
        let (se, ce) = self.elevation.sin_cos();
        let (sa, ca) = self.azimuth.sin_cos();
        Vec3::new(se * ca, se * sa, ce)
    }

    /// Mirror image about the local z axis, the specular partner of an
    /// incoming direction.
    pub fn specular(&self) -> Self {
        Self {
            azimuth: wrap_angle(self.azimuth + PI),
            elevation: self.elevation,
        }
    }

    /// Great-circle angle between two directions.
    pub fn angle_to(&self, other: &Self) -> f64 {
        self.unit_vector()
            .dot(&other.unit_vector())
            .clamp(-1.0, 1.0)
            .acos()
    }
}

/// Rigid placement: a position plus a rotation whose columns are the local
/// x, y and z (normal) axes expressed in world coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub position: Vec3,
    pub orientation: Matrix3<f64>,
}

impl Pose {
    pub fn new(position: Vec3, orientation: Matrix3<f64>) -> Result<Self> {
        let gram = orientation.transpose() * orientation;
        let err = (gram - Matrix3::identity()).abs().max();
        if !(err <= ORTHONORMAL_TOL) {
            return Err(invalid(format!(
                "orientation is not orthonormal (deviation {err:e})"
            )));
        }
        if orientation.determinant() < 0.0 {
            return Err(invalid("orientation must be a proper rotation"));
        }
        Ok(Self {
            position,
            orientation,
        })
    }

    /// World-aligned pose at `position`.
    pub fn at(position: Vec3) -> Self {
        Self {
            position,
            orientation: Matrix3::identity(),
        }
    }

    /// Pose whose local z axis points along `normal`, with the local y axis
    /// as close to `up` as possible.
    pub fn facing(position: Vec3, normal: Vec3, up: Vec3) -> Result<Self> {
        let z = normal
            .try_normalize(1e-15)
            .ok_or_else(|| invalid("zero-length normal"))?;
        let x = up
            .cross(&z)
            .try_normalize(1e-9)
            .ok_or_else(|| invalid("up vector is parallel to the normal"))?;
        let y = z.cross(&x);
        Ok(Self {
            position,
            orientation: Matrix3::from_columns(&[x, y, z]),
        })
    }

    pub fn normal(&self) -> Vec3 {
        self.orientation.column(2).into_owned()
    }

    pub fn to_local(&self, point: &Vec3) -> Vec3 {
        self.orientation.transpose() * (point - self.position)
    }

    pub fn local_to_world_dir(&self, local: &Vec3) -> Vec3 {
        self.orientation * local
    }

    pub fn world_to_local_dir(&self, world: &Vec3) -> Vec3 {
        self.orientation.transpose() * world
    }

    /// Same orientation, different origin.
    pub fn moved_to(&self, position: Vec3) -> Self {
        Self {
            position,
            orientation: self.orientation,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnitCell {
    /// Extent along the panel's local x axis, meters.
    pub width_a: f64,
    /// Extent along the panel's local y axis, meters.
    pub height_b: f64,
    /// Reflection magnitude of every state, in (0, 1].
    pub amplitude_response: f64,
    /// Reflection phase of each state, radians. Length is a power of two.
    pub phase_states: Vec<f64>,
}

impl UnitCell {
    pub fn new(
        width_a: f64,
        height_b: f64,
        amplitude_response: f64,
        phase_states: Vec<f64>,
    ) -> Result<Self> {
        if !(width_a > 0.0) || !(height_b > 0.0) {
            return Err(invalid("unit dimensions must be positive"));
        }
        if !(amplitude_response > 0.0 && amplitude_response <= 1.0) {
            return Err(invalid("amplitude response must lie in (0, 1]"));
        }
        let n = phase_states.len();
        if n < 2 || !n.is_power_of_two() || n > 8 {
            return Err(invalid(format!(
                "need 2, 4 or 8 phase states, got {n}"
            )));
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if crate::numeric::angle_diff(phase_states[i], phase_states[j]).abs() < 1e-9 {
                    return Err(invalid("phase states must be distinct modulo 2π"));
                }
            }
        }
        Ok(Self {
            width_a,
            height_b,
            amplitude_response,
            phase_states,
        })
    }

    /// `2^bits` equally spaced states starting at zero, unit amplitude.
    pub fn uniform(bits: u32, width_a: f64, height_b: f64) -> Result<Self> {
        if !(1..=3).contains(&bits) {
            return Err(invalid(format!("bits must be 1..=3, got {bits}")));
        }
        let k = 1usize << bits;
        let states = (0..k).map(|i| TAU * i as f64 / k as f64).collect();
        Self::new(width_a, height_b, 1.0, states)
    }

    pub fn bits(&self) -> u32 {
        self.phase_states.len().trailing_zeros()
    }

    pub fn num_states(&self) -> usize {
        self.phase_states.len()
    }

    /// Reflection coefficient of a state: `A·e^{jφ}`.
    pub fn reflection(&self, state: u8) -> Complex64 {
        Complex64::from_polar(self.amplitude_response, self.phase_states[state as usize])
    }

    /// Index of the state whose phase is closest to π, i.e. the strongest
    /// reflector under the `(1-Γ)/2` scattering law.
    pub fn mirror_state(&self) -> u8 {
        let mut best = 0u8;
        let mut best_d = f64::INFINITY;
        for (i, &p) in self.phase_states.iter().enumerate() {
            let d = crate::numeric::angle_diff(p, PI).abs();
            if d < best_d - 1e-12 {
                best_d = d;
                best = i as u8;
            }
        }
        best
    }

    /// Geometric area `a·b`.
    pub fn area(&self) -> f64 {
        self.width_a * self.height_b
    }
}

/// A rectangular reflecting surface. Unit (row, col) sits at
/// `(col - (cols-1)/2)·dx` along local x and `((rows-1)/2 - row)·dy` along
/// local y, so row 0 is the top row and indices run row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RisPanel {
    pub rows: usize,
    pub cols: usize,
    pub spacing_dx: f64,
    pub spacing_dy: f64,
    pub unit: UnitCell,
    pub pose: Pose,
}

impl RisPanel {
    pub fn new(
        rows: usize,
        cols: usize,
        spacing_dx: f64,
        spacing_dy: f64,
        unit: UnitCell,
        pose: Pose,
    ) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(invalid("panel needs at least one row and one column"));
        }
        if spacing_dx < unit.width_a || spacing_dy < unit.height_b {
            return Err(invalid("unit spacing smaller than the unit itself"));
        }
        Ok(Self {
            rows,
            cols,
            spacing_dx,
            spacing_dy,
            unit,
            pose,
        })
    }

    /// Panel of `bits`-bit units filling a half-wavelength grid.
    pub fn half_wavelength(
        rows: usize,
        cols: usize,
        bits: u32,
        wavelength: f64,
        pose: Pose,
    ) -> Result<Self> {
        let d = wavelength / 2.0;
        Self::new(rows, cols, d, d, UnitCell::uniform(bits, d, d)?, pose)
    }

    pub fn num_units(&self) -> usize {
        self.rows * self.cols
    }

    pub fn center(&self) -> Vec3 {
        self.pose.position
    }

    pub fn unit_local_position(&self, row: usize, col: usize) -> Vec3 {
        let x = (col as f64 - (self.cols as f64 - 1.0) / 2.0) * self.spacing_dx;
        let y = ((self.rows as f64 - 1.0) / 2.0 - row as f64) * self.spacing_dy;
        Vec3::new(x, y, 0.0)
    }

    /// World positions of all unit centers, row-major.
    pub fn unit_positions(&self) -> Vec<Vec3> {
        let mut out = Vec::with_capacity(self.num_units());
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.push(self.pose.position + self.pose.orientation * self.unit_local_position(r, c));
            }
        }
        out
    }

    pub fn width(&self) -> f64 {
        self.cols as f64 * self.spacing_dx
    }

    pub fn height(&self) -> f64 {
        self.rows as f64 * self.spacing_dy
    }

    pub fn diagonal(&self) -> f64 {
        self.width().hypot(self.height())
    }

    /// Start of the radiating far field, `2D²/λ`.
    pub fn fraunhofer_distance(&self, wavelength: f64) -> f64 {
        2.0 * self.diagonal().powi(2) / wavelength
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Antenna {
    pub pose: Pose,
    /// Peak gain, linear.
    pub gain: f64,
    /// Exponent `q` of the `cos^q` power pattern; zero means isotropic.
    pub pattern_exponent: f64,
}

impl Antenna {
    pub fn new(pose: Pose, gain: f64, pattern_exponent: f64) -> Result<Self> {
        if !(gain > 0.0) {
            return Err(invalid("antenna gain must be positive"));
        }
        if !(pattern_exponent >= 0.0) {
            return Err(invalid("pattern exponent must be non-negative"));
        }
        Ok(Self {
            pose,
            gain,
            pattern_exponent,
        })
    }

    pub fn isotropic(position: Vec3) -> Self {
        Self {
            pose: Pose::at(position),
            gain: 1.0,
            pattern_exponent: 0.0,
        }
    }

    pub fn position(&self) -> Vec3 {
        self.pose.position
    }

    /// Normalized power pattern toward a world point.
    pub fn pattern_toward(&self, point: &Vec3) -> f64 {
        match local_angles(&self.pose, point) {
            Ok(dir) => pattern_gain(self, &dir),
            Err(_) => 1.0,
        }
    }
}

/// UPA steering vector with half-wavelength spacing. Entry `p·n2 + q` has
/// phase `π(p·sinθ·sinφ + q·cosφ)` with θ the azimuth and φ the elevation,
/// and every entry has modulus `1/√(n1·n2)`.
pub fn upa_steering_vector(dir: &SphericalDirection, n1: usize, n2: usize) -> Result<Vec<Complex64>> {
    if n1 == 0 || n2 == 0 {
        return Err(invalid("steering vector dimensions must be nonzero"));
    }
    let scale = 1.0 / ((n1 * n2) as f64).sqrt();
    let u = dir.azimuth.sin() * dir.elevation.sin();
    let v = dir.elevation.cos();
    let mut out = Vec::with_capacity(n1 * n2);
    for p in 0..n1 {
        for q in 0..n2 {
            let phase = PI * (p as f64 * u + q as f64 * v);
            out.push(Complex64::from_polar(scale, phase));
        }
    }
    Ok(out)
}

/// Direction of `point` as seen from `pose`, in the pose's local frame.
pub fn local_angles(pose: &Pose, point: &Vec3) -> Result<SphericalDirection> {
    let local = pose.to_local(point);
    if local.norm() < 1e-12 {
        return Err(Error::DegenerateGeometry(
            "point coincides with the reference origin".into(),
        ));
    }
    SphericalDirection::from_vector(&local)
}

/// `cos^q(elevation)` in the front hemisphere, zero behind. With `q = 0`
/// the pattern is isotropic in every direction.
pub fn pattern_gain(antenna: &Antenna, dir: &SphericalDirection) -> f64 {
    let q = antenna.pattern_exponent;
    if q == 0.0 {
        return 1.0;
    }
    if dir.elevation > PI / 2.0 {
        return 0.0;
    }
    dir.elevation.cos().max(0.0).powf(q)
}
