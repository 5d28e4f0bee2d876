//! Statistical channel models and cascaded-channel estimation.
//!
//! Dimensions: `N` transmit antennas, `K` single-antenna users and `M`
//! surface units. The direct channel `h_d` is `K×N`, the surface-to-user
//! channel `h_r` is `M×K`, the transmitter-to-surface channel `H` is `M×N`
//! and the surface response `Θ` is diagonal, stored as its `M` entries.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::beamforming::GainDecomposition;
use crate::error::{invalid, Result};
use crate::geometry::{upa_steering_vector, SphericalDirection};
use crate::numeric::complex_normal;

pub type CMatrix = DMatrix<Complex64>;

/// Largest Rician K-factor honoured; larger values are clamped.
pub const K_FACTOR_CAP: f64 = 1e12;

/// Hermitian symmetry tolerance for correlation matrices.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Eigenvalues in `[-PSD_CLAMP_TOL, 0)` are treated as zero.
pub const PSD_CLAMP_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub h_d: CMatrix,
    pub h_r: CMatrix,
    pub h: CMatrix,
    pub theta: Vec<Complex64>,
}

impl ChannelRealization {
    pub fn new(h_d: CMatrix, h_r: CMatrix, h: CMatrix, theta: Vec<Complex64>) -> Result<Self> {
        let (k, n) = h_d.shape();
        let m = theta.len();
        if h_r.shape() != (m, k) {
            return Err(invalid(format!("h_r is {:?}, expected ({m}, {k})", h_r.shape())));
        }
        if h.shape() != (m, n) {
            return Err(invalid(format!("H is {:?}, expected ({m}, {n})", h.shape())));
        }
        if theta.iter().any(|t| !(t.norm() <= 1.0 + 1e-12)) {
            return Err(invalid("surface response entries must satisfy |Θ_mm| <= 1"));
        }
        Ok(Self { h_d, h_r, h, theta })
    }

    pub fn users(&self) -> usize {
        self.h_d.nrows()
    }

    pub fn tx_antennas(&self) -> usize {
        self.h_d.ncols()
    }

    pub fn units(&self) -> usize {
        self.theta.len()
    }

    /// Arguments of [`effective_channel_vectorform`] reproducing row `k`
    /// of [`effective_channel`]: `(h_k, u = conj(Θ), conj(h_r[:, k]))`.
    pub fn vector_form_inputs(&self, k: usize) -> Result<(Vec<Complex64>, Vec<Complex64>, Vec<Complex64>)> {
        if k >= self.users() {
            return Err(invalid(format!("user {k} out of range")));
        }
        let h_k = self.h_d.row(k).iter().cloned().collect();
        let u = self.theta.iter().map(|t| t.conj()).collect();
        let col = self.h_r.column(k).iter().map(|c| c.conj()).collect();
        Ok((h_k, u, col))
    }

    /// SISO decomposition for user `k` and transmit antenna `n`, with the
    /// per-unit gain `conj(h_r[m,k])·H[m,n]` multiplying `e^{jφ_m}`.
    pub fn gain_decomposition(&self, k: usize, n: usize) -> Result<GainDecomposition> {
        if k >= self.users() || n >= self.tx_antennas() {
            return Err(invalid("user or antenna index out of range"));
        }
        let per_unit = (0..self.units())
            .map(|m| self.h_r[(m, k)].conj() * self.h[(m, n)])
            .collect();
        GainDecomposition::new(self.h_d[(k, n)], per_unit)
    }
}

/// `h_d + h_r^H · Θ · H`, a `K×N` matrix.
pub fn effective_channel(ch: &ChannelRealization) -> Result<CMatrix> {
    let m = ch.units();
    if ch.h_r.nrows() != m || ch.h.nrows() != m || ch.h_r.ncols() != ch.users() || ch.h.ncols() != ch.tx_antennas() {
        return Err(invalid("inconsistent channel dimensions"));
    }
    let mut scaled = ch.h.clone();
    for (mut row, t) in scaled.row_iter_mut().zip(&ch.theta) {
        row *= *t;
    }
    Ok(&ch.h_d + ch.h_r.adjoint() * scaled)
}

/// `h_k + u^H · diag(h_r_col) · H` for a single user.
pub fn effective_channel_vectorform(
    h_k: &[Complex64],
    u: &[Complex64],
    h_r_col: &[Complex64],
    h: &CMatrix,
) -> Result<Vec<Complex64>> {
    let (m, n) = h.shape();
    if h_k.len() != n || u.len() != m || h_r_col.len() != m {
        return Err(invalid("vector-form dimensions disagree"));
    }
    let coeff: Vec<Complex64> = u.iter().zip(h_r_col).map(|(a, b)| a.conj() * b).collect();
    Ok((0..n)
        .map(|j| {
            let mut acc = h_k[j];
            for (i, c) in coeff.iter().enumerate() {
                acc += c * h[(i, j)];
            }
            acc
        })
        .collect())
}

/// One transmission through a realization: `y = H_eff·s + n`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkSample {
    pub s: Vec<Complex64>,
    pub y: Vec<Complex64>,
    pub noise_sigma: f64,
}

impl LinkSample {
    pub fn transmit<R: Rng + ?Sized>(
        ch: &ChannelRealization,
        s: Vec<Complex64>,
        noise_sigma: f64,
        rng: &mut R,
    ) -> Result<Self> {
        if !(noise_sigma >= 0.0) {
            return Err(invalid("noise_sigma must be non-negative"));
        }
        if s.len() != ch.tx_antennas() {
            return Err(invalid("symbol length must equal the number of transmit antennas"));
        }
        let heff = effective_channel(ch)?;
        let y = (&heff * nalgebra::DVector::from_vec(s.clone()))
            .iter()
            .map(|v| v + complex_normal(rng) * noise_sigma)
            .collect();
        Ok(Self { s, y, noise_sigma })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cluster {
    pub gain: Complex64,
    pub aoa: SphericalDirection,
    pub aod: SphericalDirection,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterSet {
    clusters: Vec<Cluster>,
}

impl ClusterSet {
    pub fn new(clusters: Vec<Cluster>) -> Result<Self> {
        if clusters.is_empty() {
            return Err(invalid("cluster set must not be empty"));
        }
        Ok(Self { clusters })
    }

    pub fn clusters(&self) -> &[Cluster] {
        &self.clusters
    }

    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }
}

/// Clustered geometric channel `scale · Σ_p g_p a_r(aoa_p) a_t(aod_p)^H`.
/// Without an explicit `scale` the prefactor is `√(N_rx·N_tx/P)`.
pub fn sample_geometric(
    clusters: &ClusterSet,
    rx_size: (usize, usize),
    tx_size: (usize, usize),
    scale: Option<f64>,
) -> Result<CMatrix> {
    let n_rx = rx_size.0 * rx_size.1;
    let n_tx = tx_size.0 * tx_size.1;
    if n_rx == 0 || n_tx == 0 {
        return Err(invalid("array sizes must be nonzero"));
    }
    let scale = scale.unwrap_or_else(|| ((n_rx * n_tx) as f64 / clusters.len() as f64).sqrt());
    let mut out = CMatrix::zeros(n_rx, n_tx);
    for c in clusters.clusters() {
        let ar = upa_steering_vector(&c.aoa, rx_size.0, rx_size.1)?;
        let at = upa_steering_vector(&c.aod, tx_size.0, tx_size.1)?;
        for (i, a) in ar.iter().enumerate() {
            for (j, b) in at.iter().enumerate() {
                out[(i, j)] += c.gain * a * b.conj();
            }
        }
    }
    Ok(out * Complex64::new(scale, 0.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RicianSpec {
    pub k_factor: f64,
    pub los: CMatrix,
}

/// `√(K/(1+K))·LOS + √(1/(1+K))·NLOS` with unit-variance complex Gaussian
/// NLOS entries.
pub fn sample_rician<R: Rng + ?Sized>(spec: &RicianSpec, rng: &mut R) -> Result<CMatrix> {
    if !(spec.k_factor >= 0.0) {
        return Err(invalid("Rician K-factor must be non-negative"));
    }
    if spec.los.iter().any(|v| !v.is_finite()) {
        return Err(invalid("LOS component must be finite"));
    }
    let k = spec.k_factor.min(K_FACTOR_CAP);
    let w_los = (k / (1.0 + k)).sqrt();
    let w_nlos = (1.0 / (1.0 + k)).sqrt();
    let (r, c) = spec.los.shape();
    // column-major draw order, matching nalgebra storage
    let mut out = CMatrix::zeros(r, c);
    for j in 0..c {
        for i in 0..r {
            out[(i, j)] = spec.los[(i, j)] * w_los + complex_normal(rng) * w_nlos;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationSpec {
    /// Receive-side correlation, `N_rx×N_rx`.
    pub r: CMatrix,
    /// Transmit-side correlation, `N_tx×N_tx`.
    pub t: CMatrix,
    pub los: CMatrix,
}

/// Hermitian PSD square root via eigendecomposition.
pub fn hermitian_sqrt(a: &CMatrix) -> Result<CMatrix> {
    if !a.is_square() {
        return Err(invalid("correlation matrix must be square"));
    }
    let scale = a.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1.0);
    let asym = (a - a.adjoint()).iter().map(|v| v.norm()).fold(0.0, f64::max);
    if asym > HERMITIAN_TOL * scale {
        return Err(invalid(format!("matrix is not Hermitian (deviation {asym:e})")));
    }
    let sym = (a + a.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = sym.symmetric_eigen();
    let mut roots = Vec::with_capacity(eig.eigenvalues.len());
    for &l in eig.eigenvalues.iter() {
        if l < -PSD_CLAMP_TOL * scale {
            return Err(invalid(format!("matrix is not positive semidefinite (eigenvalue {l:e})")));
        }
        roots.push(Complex64::new(l.max(0.0).sqrt(), 0.0));
    }
    let v = &eig.eigenvectors;
    let d = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(roots));
    Ok(v * d * v.adjoint())
}

/// Sampler for `R^{1/2} G T^{1/2} + H̄` with the square roots computed once.
#[derive(Debug, Clone)]
pub struct CorrelatedSampler {
    r_sqrt: CMatrix,
    t_sqrt: CMatrix,
    los: CMatrix,
}

impl CorrelatedSampler {
    pub fn new(spec: &CorrelationSpec) -> Result<Self> {
        let (nr, nt) = spec.los.shape();
        if spec.r.shape() != (nr, nr) || spec.t.shape() != (nt, nt) {
            return Err(invalid("correlation matrices do not match the LOS shape"));
        }
        Ok(Self {
            r_sqrt: hermitian_sqrt(&spec.r)?,
            t_sqrt: hermitian_sqrt(&spec.t)?,
            los: spec.los.clone(),
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> CMatrix {
        let (nr, nt) = self.los.shape();
        let mut g = CMatrix::zeros(nr, nt);
        for j in 0..nt {
            for i in 0..nr {
                g[(i, j)] = complex_normal(rng);
            }
        }
        &self.r_sqrt * g * &self.t_sqrt + &self.los
    }
}

pub fn sample_correlated<R: Rng + ?Sized>(spec: &CorrelationSpec, rng: &mut R) -> Result<CMatrix> {
    Ok(CorrelatedSampler::new(spec)?.sample(rng))
}

#[derive(Debug, Clone, PartialEq)]
pub struct OnOffEstimate {
    pub direct: Complex64,
    pub cascade: Vec<Complex64>,
}

/// ON-OFF channel estimation. `probe` returns the noiseless received symbol
/// for an ON/OFF pattern over the `m` units; each of the `m + 1` slots
/// (all OFF, then unit `i` alone ON) is observed `pilots` times with
/// complex Gaussian noise of standard deviation `noise_sigma`.
pub fn on_off_estimate<F, R>(
    mut probe: F,
    m: usize,
    pilots: usize,
    noise_sigma: f64,
    rng: &mut R,
) -> Result<OnOffEstimate>
where
    F: FnMut(&[bool]) -> Complex64,
    R: Rng + ?Sized,
{
    if pilots == 0 {
        return Err(invalid("pilots_per_unit must be at least 1"));
    }
    if !(noise_sigma >= 0.0) {
        return Err(invalid("noise_sigma must be non-negative"));
    }
    let mut slot = |pattern: &[bool], rng: &mut R| {
        let clean = probe(pattern);
        let mut acc = Complex64::new(0.0, 0.0);
        for _ in 0..pilots {
            let noise = if noise_sigma > 0.0 {
                complex_normal(rng) * noise_sigma
            } else {
                Complex64::new(0.0, 0.0)
            };
            acc += clean + noise;
        }
        acc / pilots as f64
    };
    let mut pattern = vec![false; m];
    let direct = slot(&pattern, rng);
    let mut cascade = Vec::with_capacity(m);
    for i in 0..m {
        pattern[i] = true;
        cascade.push(slot(&pattern, rng) - direct);
        pattern[i] = false;
    }
    Ok(OnOffEstimate { direct, cascade })
}
