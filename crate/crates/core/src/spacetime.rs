//! Space-time coded surfaces.
//!
//! Each unit cycles through a periodic sequence of states. Its reflection
//! coefficient `Γ(t)` is piecewise constant, so its Fourier coefficients
//! have a closed form:
//!
//! `a_k = Σ_l Γ_l·w_l·e^{-jπk(t_l + t_{l+1})}·sinc(πk·w_l)`
//!
//! with slot `l` spanning `[t_l, t_{l+1})` of a unit-length period and
//! `w_l = t_{l+1} - t_l`. For equal slots this reduces to
//! `(1/L)·Σ_l Γ_l·e^{-jπk(2l+1)/L}·sinc(πk/L)`. The `k`-th harmonic appears
//! at frequency `f_c + k/T`.
//!
//! Slots need not be equal. With four equally spaced states and equal slots
//! the phase of `a_0` is `atan2(n_1 - n_3, n_0 - n_2)` for integer slot
//! counts `n_i`, which can never equal 22.5° because `tan 22.5° = √2 - 1` is
//! irrational. [`designed_four_bit_sequences`] therefore uses three slots of
//! relative length `1 - 1/√2`, `1/√2 - 1/2` and `1/2`.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::codebook::{content_lines, Header};
use crate::em::{panel_far_field, Illumination, PlaneWave, Polarization};
use crate::error::{invalid, Error, Result};
use crate::geometry::{RisPanel, SphericalDirection, UnitCell};
use crate::numeric::{db, wrap_angle};

/// Period assumed when a time codebook does not state one, seconds.
pub const DEFAULT_PERIOD: f64 = 1e-6;

const FRACTION_SUM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HarmonicConvention {
    /// Fourier series of the continuous piecewise-constant waveform.
    #[default]
    Continuous,
    /// Plain DFT of the slot values, `(1/L)·Σ_l Γ_l e^{-j2πkl/L}`.
    Dft,
}

/// Continuous-waveform coefficient for arbitrary slot fractions.
///
/// For `k ≠ 0` the sum is evaluated in its equivalent transition form
/// `Σ_l (Γ_l - Γ_{l-1})·e^{-j2πk·t_l} / (j2πk)`, so slots equal to their
/// predecessor contribute exactly nothing.
pub fn harmonic_coefficient_weighted(gammas: &[Complex64], fractions: &[f64], k: i64) -> Result<Complex64> {
    if gammas.is_empty() {
        return Err(invalid("sequence must hold at least one slot"));
    }
    if fractions.len() != gammas.len() {
        return Err(invalid("one fraction per slot is required"));
    }
    if k == 0 {
        return Ok(gammas.iter().zip(fractions).map(|(g, w)| g * *w).sum());
    }
    let mut starts = Vec::with_capacity(gammas.len());
    let mut t = 0.0;
    for w in fractions {
        starts.push(t);
        t += w;
    }
    Ok(transition_sum(gammas, k, |l| (k as f64 * starts[l]).rem_euclid(1.0)))
}

/// `Σ_l (Γ_l - Γ_{l-1})·e^{-j2π·cycles(l)} / (j2πk)`, cyclic in `l`.
fn transition_sum(gammas: &[Complex64], k: i64, cycles: impl Fn(usize) -> f64) -> Complex64 {
    let l = gammas.len();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..l {
        let jump = gammas[i] - gammas[(i + l - 1) % l];
        if jump != Complex64::new(0.0, 0.0) {
            acc += jump * Complex64::from_polar(1.0, -2.0 * PI * cycles(i));
        }
    }
    acc / Complex64::new(0.0, 2.0 * PI * k as f64)
}

/// `k`-th coefficient of an equal-slot sequence.
pub fn harmonic_coefficients(gammas: &[Complex64], k: i64, convention: HarmonicConvention) -> Result<Complex64> {
    let l = gammas.len();
    if l == 0 {
        return Err(invalid("sequence must hold at least one slot"));
    }
    let lf = l as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    match convention {
        HarmonicConvention::Continuous => {
            if k == 0 {
                return Ok(gammas.iter().sum::<Complex64>() / lf);
            }
            let li = l as i64;
            return Ok(transition_sum(gammas, k, |i| (k.rem_euclid(li) * i as i64 % li) as f64 / lf));
        }
        HarmonicConvention::Dft => {
            for (i, g) in gammas.iter().enumerate() {
                // reduce k·l modulo L so large harmonics keep full precision
                let r = ((k.rem_euclid(l as i64)) as usize * i) % l;
                acc += g * Complex64::from_polar(1.0, -2.0 * PI * r as f64 / lf);
            }
        }
    }
    Ok(acc / lf)
}

/// Harmonic coefficients indexed by order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct HarmonicSpectrum {
    pub coefficients: BTreeMap<i64, Complex64>,
}

impl HarmonicSpectrum {
    /// Orders `-max_order..=max_order` of a weighted sequence.
    pub fn of_sequence(gammas: &[Complex64], fractions: &[f64], max_order: i64) -> Result<Self> {
        let mut coefficients = BTreeMap::new();
        for k in -max_order..=max_order {
            coefficients.insert(k, harmonic_coefficient_weighted(gammas, fractions, k)?);
        }
        Ok(Self { coefficients })
    }

    pub fn get(&self, k: i64) -> Option<Complex64> {
        self.coefficients.get(&k).copied()
    }

    pub fn total_power(&self) -> f64 {
        self.coefficients.values().map(|c| c.norm_sqr()).sum()
    }
}

/// Per-unit periodic state sequences for a panel.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeCodebook {
    rows: usize,
    cols: usize,
    bits: u32,
    slots: usize,
    fractions: Vec<f64>,
    period: f64,
    /// Unit-major: slot `l` of unit `m` lives at `m·slots + l`.
    sequence: Vec<u8>,
}

impl TimeCodebook {
    /// Equal-slot codebook with the default period.
    pub fn new(rows: usize, cols: usize, bits: u32, slots: usize, sequence: Vec<u8>) -> Result<Self> {
        if !(1..=3).contains(&bits) {
            return Err(invalid(format!("bits must be 1..=3, got {bits}")));
        }
        if rows == 0 || cols == 0 || slots == 0 {
            return Err(invalid("time codebook dimensions must be nonzero"));
        }
        if sequence.len() != rows * cols * slots {
            return Err(invalid(format!(
                "time codebook holds {} entries, expected {}",
                sequence.len(),
                rows * cols * slots
            )));
        }
        if sequence.iter().any(|&s| s as usize >= 1 << bits) {
            return Err(invalid(format!("state out of range for {bits}-bit code")));
        }
        Ok(Self {
            rows,
            cols,
            bits,
            slots,
            fractions: vec![1.0 / slots as f64; slots],
            period: DEFAULT_PERIOD,
            sequence,
        })
    }

    /// Every unit runs the same sequence.
    pub fn uniform(rows: usize, cols: usize, bits: u32, pattern: &[u8]) -> Result<Self> {
        let seq = pattern.iter().cycle().take(rows * cols * pattern.len()).copied().collect();
        Self::new(rows, cols, bits, pattern.len(), seq)
    }

    /// Every unit runs `base` cyclically delayed by `column_delays[col]`
    /// slots.
    pub fn column_delayed(rows: usize, bits: u32, base: &[u8], column_delays: &[usize]) -> Result<Self> {
        let l = base.len();
        let cols = column_delays.len();
        let mut seq = Vec::with_capacity(rows * cols * l);
        for _ in 0..rows {
            for &d in column_delays {
                seq.extend((0..l).map(|i| base[(i + l - d % l) % l]));
            }
        }
        Self::new(rows, cols, bits, l, seq)
    }

    pub fn with_fractions(mut self, fractions: Vec<f64>) -> Result<Self> {
        if fractions.len() != self.slots {
            return Err(invalid("one fraction per slot is required"));
        }
        if fractions.iter().any(|w| !(*w > 0.0)) {
            return Err(invalid("slot fractions must be positive"));
        }
        if (fractions.iter().sum::<f64>() - 1.0).abs() > FRACTION_SUM_TOL {
            return Err(invalid("slot fractions must sum to one"));
        }
        self.fractions = fractions;
        Ok(self)
    }

    pub fn with_period(mut self, period: f64) -> Result<Self> {
        if !(period > 0.0) || !period.is_finite() {
            return Err(invalid("period must be positive"));
        }
        self.period = period;
        Ok(self)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn slots(&self) -> usize {
        self.slots
    }

    pub fn units(&self) -> usize {
        self.rows * self.cols
    }

    pub fn fractions(&self) -> &[f64] {
        &self.fractions
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    /// Duration of every slot, seconds.
    pub fn slot_durations(&self) -> Vec<f64> {
        self.fractions.iter().map(|w| w * self.period).collect()
    }

    pub fn is_equal_slot(&self) -> bool {
        let w = 1.0 / self.slots as f64;
        self.fractions.iter().all(|f| (f - w).abs() < 1e-15)
    }

    pub fn unit_sequence(&self, m: usize) -> &[u8] {
        &self.sequence[m * self.slots..(m + 1) * self.slots]
    }

    /// Delay every unit by `by` slots. Fractions rotate along, so this is
    /// a true time shift.
    pub fn shifted(&self, by: usize) -> Self {
        let l = self.slots;
        let rot = |i: usize| (i + l - by % l) % l;
        let mut out = self.clone();
        for m in 0..self.units() {
            for i in 0..l {
                out.sequence[m * l + i] = self.sequence[m * l + rot(i)];
            }
        }
        out.fractions = (0..l).map(|i| self.fractions[rot(i)]).collect();
        out
    }

    /// Reverse the slot order of every unit.
    pub fn reversed(&self) -> Self {
        let mut out = self.clone();
        for m in 0..self.units() {
            out.sequence[m * self.slots..(m + 1) * self.slots].reverse();
        }
        out.fractions.reverse();
        out
    }

    fn check_unit(&self, unit: &UnitCell) -> Result<()> {
        if unit.bits() != self.bits {
            return Err(invalid(format!(
                "time codebook uses {}-bit states but the unit has {} bits",
                self.bits,
                unit.bits()
            )));
        }
        Ok(())
    }

    pub fn unit_gammas(&self, unit: &UnitCell, m: usize) -> Result<Vec<Complex64>> {
        self.check_unit(unit)?;
        Ok(self.unit_sequence(m).iter().map(|&s| unit.reflection(s)).collect())
    }

    /// `k`-th coefficient of unit `m`'s reflection waveform.
    pub fn harmonic(&self, unit: &UnitCell, m: usize, k: i64, convention: HarmonicConvention) -> Result<Complex64> {
        let g = self.unit_gammas(unit, m)?;
        match convention {
            HarmonicConvention::Continuous => harmonic_coefficient_weighted(&g, &self.fractions, k),
            HarmonicConvention::Dft => {
                if !self.is_equal_slot() {
                    return Err(invalid("the DFT convention needs equal slots"));
                }
                harmonic_coefficients(&g, k, convention)
            }
        }
    }

    /// Per-unit scattering weights at harmonic `k`: the Fourier coefficient
    /// of `(1 - Γ(t))/2`, i.e. `(δ_k0 - a_k)/2`.
    pub fn harmonic_weights(&self, unit: &UnitCell, k: i64) -> Result<Vec<Complex64>> {
        (0..self.units())
            .map(|m| {
                let a = self.harmonic(unit, m, k, HarmonicConvention::Continuous)?;
                let dc = if k == 0 { 1.0 } else { 0.0 };
                Ok((Complex64::new(dc, 0.0) - a) * 0.5)
            })
            .collect()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        write!(
            out,
            "bits={} rows={} cols={} slots={}",
            self.bits, self.rows, self.cols, self.slots
        )
        .unwrap();
        if !self.is_equal_slot() {
            let f: Vec<String> = self.fractions.iter().map(|w| format!("{w:?}")).collect();
            write!(out, " fractions={}", f.join(",")).unwrap();
        }
        if self.period != DEFAULT_PERIOD {
            write!(out, " period={:?}", self.period).unwrap();
        }
        out.push('\n');
        for r in 0..self.rows {
            let tokens: Vec<String> = (0..self.cols)
                .map(|c| {
                    self.unit_sequence(r * self.cols + c)
                        .iter()
                        .map(|&s| char::from(b'0' + s))
                        .collect()
                })
                .collect();
            out.push_str(&tokens.join(" "));
            out.push('\n');
        }
        out
    }

    /// Parse one block: a header with `bits`, `rows`, `cols`, `slots` and
    /// optional `fractions` and `period`, then one line per row holding
    /// `cols` whitespace-separated sequences of `slots` digits.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = content_lines(text);
        let (hline, header_text) = lines.next().ok_or_else(|| Error::Parse {
            line: 1,
            message: "empty time codebook".into(),
        })?;
        let header = Header::parse(header_text, hline)?;
        header.check_known(&["bits", "rows", "cols", "slots", "fractions", "period"], hline)?;
        let bits = header.usize("bits", hline)? as u32;
        let rows = header.usize("rows", hline)?;
        let cols = header.usize("cols", hline)?;
        let slots = header.usize("slots", hline)?;
        if !(1..=3).contains(&bits) || rows == 0 || cols == 0 || slots == 0 {
            return Err(Error::Parse {
                line: hline,
                message: "bits must be 1..=3 and dimensions nonzero".into(),
            });
        }
        let parse_err = |message: String| Error::Parse { line: hline, message };
        let mut seq = Vec::with_capacity(rows * cols * slots);
        for r in 0..rows {
            let (n, line) = lines.next().ok_or_else(|| Error::Parse {
                line: hline + r + 1,
                message: format!("missing row {r} of {rows}"),
            })?;
            let tokens: Vec<&str> = line.split_whitespace().collect();
            if tokens.len() != cols {
                return Err(Error::Parse {
                    line: n,
                    message: format!("expected {cols} sequences, found {}", tokens.len()),
                });
            }
            for t in tokens {
                seq.extend(crate::codebook::parse_state_row(t, slots, bits, n)?);
            }
        }
        if let Some((n, _)) = lines.next() {
            return Err(Error::Parse {
                line: n,
                message: "unexpected content after the last row".into(),
            });
        }
        let mut tc = Self::new(rows, cols, bits, slots, seq).map_err(|e| parse_err(e.to_string()))?;
        if let Some(f) = header.get("fractions") {
            let fr: std::result::Result<Vec<f64>, _> = f.split(',').map(str::parse).collect();
            let fr = fr.map_err(|_| parse_err(format!("malformed fractions '{f}'")))?;
            tc = tc.with_fractions(fr).map_err(|e| parse_err(e.to_string()))?;
        }
        if let Some(p) = header.get("period") {
            let p: f64 = p.parse().map_err(|_| parse_err(format!("malformed period '{p}'")))?;
            tc = tc.with_period(p).map_err(|e| parse_err(e.to_string()))?;
        }
        Ok(tc)
    }
}

/// Relative slot lengths used by the designed 16-state sequences.
pub fn four_bit_slot_fractions() -> Vec<f64> {
    vec![1.0 - FRAC_1_SQRT_2, FRAC_1_SQRT_2 - 0.5, 0.5]
}

/// Sixteen 2-bit sequences whose mean reflection phases step through
/// -180°, -157.5°, …, +157.5° on units with states `{0, π/2, π, 3π/2}`.
/// Row `i` of the returned `16×1` codebook targets `-180° + 22.5°·i`.
pub fn designed_four_bit_sequences() -> TimeCodebook {
    let mut seq = Vec::with_capacity(48);
    for i in 0..16u8 {
        // -180° + 22.5°·i ≡ 22.5°·(i + 8) (mod 360°)
        let step = (i + 8) % 16;
        let s = step / 4;
        let n = |d: u8| (s + d) % 4;
        let triple = match step % 4 {
            0 => [n(0), n(0), n(0)],
            1 => [n(1), n(0), n(0)],
            2 => [n(0), n(0), n(1)],
            _ => [n(0), n(1), n(1)],
        };
        seq.extend_from_slice(&triple);
    }
    TimeCodebook::new(16, 1, 2, 3, seq)
        .and_then(|tc| tc.with_fractions(four_bit_slot_fractions()))
        .expect("designed sequences are valid")
}

/// Phase of the DC coefficient of every unit, wrapped into `[-π, π)`.
pub fn equivalent_phase_table(tc: &TimeCodebook, unit: &UnitCell) -> Result<Vec<f64>> {
    (0..tc.units())
        .map(|m| Ok(wrap_angle(tc.harmonic(unit, m, 0, HarmonicConvention::Continuous)?.arg())))
        .collect()
}

/// Complex far-field value of harmonic `k` toward each scan direction.
pub fn harmonic_field(
    panel: &RisPanel,
    tc: &TimeCodebook,
    k: i64,
    scan: &[SphericalDirection],
    wave: &PlaneWave,
    pol: Polarization,
) -> Result<Vec<Complex64>> {
    if tc.rows() != panel.rows || tc.cols() != panel.cols {
        return Err(invalid(format!(
            "time codebook is {}x{} but panel is {}x{}",
            tc.rows(),
            tc.cols(),
            panel.rows,
            panel.cols
        )));
    }
    let weights = tc.harmonic_weights(&panel.unit, k)?;
    let illumination = Illumination::plane_wave(panel, wave);
    scan.par_iter()
        .map(|d| panel_far_field(panel, &illumination, &weights, d, wave.wavelength, pol))
        .collect()
}

/// Harmonic-`k` scattering pattern over `scan`, in dB with the peak at
/// 0 dB. A harmonic with no energy anywhere yields all `-∞`.
pub fn harmonic_pattern(
    panel: &RisPanel,
    tc: &TimeCodebook,
    k: i64,
    scan: &[SphericalDirection],
    wave: &PlaneWave,
    pol: Polarization,
) -> Result<Vec<f64>> {
    let field = harmonic_field(panel, tc, k, scan, wave, pol)?;
    let power: Vec<f64> = field.iter().map(|f| f.norm_sqr()).collect();
    let peak = power.iter().cloned().fold(0.0, f64::max);
    if peak <= 0.0 {
        return Ok(vec![f64::NEG_INFINITY; power.len()]);
    }
    Ok(power.iter().map(|p| db(p / peak)).collect())
}

/// First-harmonic far-field power toward `direction` for the two codebooks
/// of an on-off keyed link, `(low, high)`, linear and relative to a unit
/// distance.
pub fn ook_first_harmonic_power(
    tc_low: &TimeCodebook,
    tc_high: &TimeCodebook,
    panel: &RisPanel,
    wave: &PlaneWave,
    direction: &SphericalDirection,
    pol: Polarization,
) -> Result<(f64, f64)> {
    let p = |tc: &TimeCodebook| -> Result<f64> {
        Ok(harmonic_field(panel, tc, 1, std::slice::from_ref(direction), wave, pol)?[0].norm_sqr())
    };
    Ok((p(tc_low)?, p(tc_high)?))
}

/// Frequency of harmonic `k` for a carrier `f_c` and modulation period.
pub fn harmonic_frequency(carrier_hz: f64, k: i64, period: f64) -> f64 {
    carrier_hz + k as f64 / period
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Pose;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_2_PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn square() -> Vec<Complex64> {
        vec![c(1.0, 0.0), c(-1.0, 0.0)]
    }

    #[test]
    fn constant_sequence_is_dc_only() {
        let g = vec![c(0.3, -0.4); 5];
        for conv in [HarmonicConvention::Continuous, HarmonicConvention::Dft] {
            assert!((harmonic_coefficients(&g, 0, conv).unwrap() - g[0]).norm() < 1e-15);
            for k in [-3, -1, 1, 2, 7] {
                assert!(harmonic_coefficients(&g, k, conv).unwrap().norm() < 1e-15);
            }
        }
        assert!(harmonic_coefficients(&[], 0, HarmonicConvention::Dft).is_err());
    }

    #[test]
    fn square_wave_first_harmonic() {
        let a0 = harmonic_coefficients(&square(), 0, HarmonicConvention::Continuous).unwrap();
        assert!(a0.norm() < 1e-15);
        for k in [-1, 1] {
            let a = harmonic_coefficients(&square(), k, HarmonicConvention::Continuous).unwrap();
            assert!((a.norm() - FRAC_2_PI).abs() < 1e-12);
        }
        let long = [1.0, 1.0, 1.0, -1.0, -1.0, -1.0].map(|v| c(v, 0.0));
        let a = harmonic_coefficients(&long, 1, HarmonicConvention::Continuous).unwrap();
        assert!((a.norm() - FRAC_2_PI).abs() < 1e-12);
        let dft = harmonic_coefficients(&square(), 1, HarmonicConvention::Dft).unwrap();
        assert!((dft - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn weighted_matches_equal_slot_form() {
        let g = [c(0.2, 0.9), c(-1.0, 0.1), c(0.5, -0.5), c(0.0, 1.0)];
        for k in -6..=6 {
            let a = harmonic_coefficients(&g, k, HarmonicConvention::Continuous).unwrap();
            let b = harmonic_coefficient_weighted(&g, &[0.25; 4], k).unwrap();
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn time_reversal_conjugates_real_sequences() {
        let g: Vec<Complex64> = [1.0, 1.0, -1.0, 1.0, -1.0].iter().map(|&v| c(v, 0.0)).collect();
        let rev: Vec<Complex64> = g.iter().rev().cloned().collect();
        for k in -7..=7 {
            let a = harmonic_coefficients(&g, k, HarmonicConvention::Continuous).unwrap();
            let b = harmonic_coefficients(&rev, k, HarmonicConvention::Continuous).unwrap();
            assert!((a.conj() - b).norm() < 1e-14);
        }
    }

    #[test]
    fn designed_table_hits_grid() {
        let unit = UnitCell::uniform(2, 0.01, 0.01).unwrap();
        let tc = designed_four_bit_sequences();
        let phases = equivalent_phase_table(&tc, &unit).unwrap();
        assert_eq!(phases.len(), 16);
        for (i, p) in phases.iter().enumerate() {
            let target = (-180.0 + 22.5 * i as f64).to_radians();
            assert!((p - target).abs() < 1e-9, "row {i}: {} deg", p.to_degrees());
        }
    }

    #[test]
    fn constant_sequences_give_native_phases() {
        let unit = UnitCell::uniform(2, 0.01, 0.01).unwrap();
        let tc = TimeCodebook::new(4, 1, 2, 3, vec![0, 0, 0, 1, 1, 1, 2, 2, 2, 3, 3, 3]).unwrap();
        let phases = equivalent_phase_table(&tc, &unit).unwrap();
        let expect = [0.0, PI / 2.0, -PI, -PI / 2.0];
        for (p, e) in phases.iter().zip(expect) {
            assert!((p - e).abs() < 1e-12);
        }
        let wrong = UnitCell::uniform(1, 0.01, 0.01).unwrap();
        assert!(equivalent_phase_table(&tc, &wrong).is_err());
    }

    #[test]
    fn half_period_shift_flips_first_harmonic() {
        let unit = UnitCell::uniform(2, 0.01, 0.01).unwrap();
        let tc = TimeCodebook::new(1, 1, 2, 4, vec![0, 1, 3, 2]).unwrap();
        let a = tc.harmonic(&unit, 0, 1, HarmonicConvention::Continuous).unwrap();
        let b = tc.shifted(2).harmonic(&unit, 0, 1, HarmonicConvention::Continuous).unwrap();
        assert!((b + a).norm() < 1e-14);
    }

    #[test]
    fn text_round_trip_with_fractions() {
        let tc = designed_four_bit_sequences().with_period(2.5e-6).unwrap();
        let back = TimeCodebook::from_text(&tc.to_text()).unwrap();
        assert_eq!(back, tc);
        let plain = TimeCodebook::column_delayed(2, 1, &[0, 0, 1, 1], &[0, 2, 1]).unwrap();
        let text = plain.to_text();
        assert!(text.starts_with("bits=1 rows=2 cols=3 slots=4\n0011 1100 1001\n"));
        assert_eq!(TimeCodebook::from_text(&text).unwrap(), plain);
    }

    #[test]
    fn text_errors() {
        assert!(TimeCodebook::from_text("bits=1 rows=1 cols=1 slots=2\n012\n").is_err());
        assert!(TimeCodebook::from_text("bits=1 rows=1 cols=2 slots=2\n01\n").is_err());
        assert!(TimeCodebook::from_text("bits=1 rows=1 cols=1 slots=2 fractions=0.3,0.3\n01\n").is_err());
        assert!(TimeCodebook::from_text("bits=1 rows=1 cols=1\n01\n").is_err());
        let e = TimeCodebook::from_text("bits=1 rows=1 cols=1 slots=2\n\n# c\n21\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 4, .. }), "{e}");
    }

    fn test_panel(bits: u32, rows: usize, cols: usize) -> (RisPanel, PlaneWave) {
        let lambda = 0.0517;
        let panel = RisPanel::half_wavelength(rows, cols, bits, lambda, Pose::at(crate::geometry::Vec3::zeros())).unwrap();
        let wave = PlaneWave::new(1.0, lambda, SphericalDirection::boresight()).unwrap();
        (panel, wave)
    }

    fn scan_xz() -> Vec<SphericalDirection> {
        (-80..=80)
            .map(|d| {
                let a = (d as f64).to_radians();
                SphericalDirection::new(if a < 0.0 { PI } else { 0.0 }, a.abs()).unwrap()
            })
            .collect()
    }

    fn peak_angle(pattern: &[f64]) -> f64 {
        let (i, _) = pattern
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap();
        i as f64 - 80.0
    }

    #[test]
    fn uniform_code_matches_static_pattern_shape() {
        let (panel, wave) = test_panel(1, 4, 8);
        let scan = scan_xz();
        let timed = TimeCodebook::uniform(4, 8, 1, &[0, 1]).unwrap();
        let static_code = TimeCodebook::uniform(4, 8, 1, &[1]).unwrap();
        let a = harmonic_pattern(&panel, &timed, 1, &scan, &wave, Polarization::CoPolar).unwrap();
        let b = harmonic_pattern(&panel, &static_code, 0, &scan, &wave, Polarization::CoPolar).unwrap();
        for (x, y) in a.iter().zip(&b) {
            if x.max(*y) > -150.0 {
                assert!((x - y).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn delay_code_steers_first_harmonic() {
        let (panel, wave) = test_panel(1, 8, 8);
        let scan = scan_xz();
        let base = [0u8, 0, 1, 1];
        let flat = TimeCodebook::column_delayed(8, 1, &base, &[0; 8]).unwrap();
        let split = TimeCodebook::column_delayed(8, 1, &base, &[0, 0, 0, 0, 2, 2, 2, 2]).unwrap();
        let a = harmonic_pattern(&panel, &flat, 1, &scan, &wave, Polarization::CoPolar).unwrap();
        let b = harmonic_pattern(&panel, &split, 1, &scan, &wave, Polarization::CoPolar).unwrap();
        assert!((peak_angle(&a) - peak_angle(&b)).abs() > 5.0);
    }

    #[test]
    fn harmonic_pattern_scale_free() {
        let (panel, wave) = test_panel(2, 3, 3);
        let scan = scan_xz();
        let tc = TimeCodebook::uniform(3, 3, 2, &[0, 2, 1, 3]).unwrap();
        let p = harmonic_pattern(&panel, &tc, 1, &scan, &wave, Polarization::CoPolar).unwrap();
        let strong = PlaneWave::new(7.0, wave.wavelength, wave.incident_dir).unwrap();
        let q = harmonic_pattern(&panel, &tc, 1, &scan, &strong, Polarization::CoPolar).unwrap();
        for (x, y) in p.iter().zip(&q) {
            assert!((x - y).abs() < 1e-9 || (x.is_infinite() && y.is_infinite()));
        }
        let wrong = TimeCodebook::uniform(2, 3, 2, &[0]).unwrap();
        assert!(harmonic_pattern(&panel, &wrong, 1, &scan, &wave, Polarization::CoPolar).is_err());
    }

    #[test]
    fn ook_pair_separation() {
        let (panel, wave) = test_panel(1, 4, 4);
        let low = TimeCodebook::uniform(4, 4, 1, &[1, 1]).unwrap();
        let high = TimeCodebook::uniform(4, 4, 1, &[0, 1]).unwrap();
        let (pl, ph) = ook_first_harmonic_power(&low, &high, &panel, &wave, &SphericalDirection::boresight(), Polarization::CoPolar).unwrap();
        assert_eq!(db(pl), f64::NEG_INFINITY);
        assert!(ph > 0.0 && ph.is_finite());
        assert!(db(ph) - db(pl) >= 20.0);
        assert!((harmonic_frequency(5.8e9, 1, 1e-6) - 5.801e9).abs() < 1e-3);
    }

    proptest! {
        #[test]
        fn parseval_bound(values in proptest::collection::vec((0.0..1.0f64, -PI..PI), 1..8)) {
            let g: Vec<Complex64> = values.iter().map(|&(r, p)| Complex64::from_polar(r, p)).collect();
            let l = g.len();
            let bound = g.iter().map(|x| x.norm_sqr()).sum::<f64>() / l as f64;
            let w = vec![1.0 / l as f64; l];
            let spec = HarmonicSpectrum::of_sequence(&g, &w, 5 * l as i64).unwrap();
            prop_assert!(spec.total_power() <= bound + 1e-9);
        }

        #[test]
        fn shift_theorem(values in proptest::collection::vec(-PI..PI, 1..9), shift in 0usize..9, k in -12i64..12) {
            let g: Vec<Complex64> = values.iter().map(|&p| Complex64::from_polar(1.0, p)).collect();
            let l = g.len();
            let s = shift % l;
            let shifted: Vec<Complex64> = (0..l).map(|i| g[(i + l - s) % l]).collect();
            let phase = Complex64::from_polar(1.0, -2.0 * PI * (k * s as i64) as f64 / l as f64);
            for conv in [HarmonicConvention::Continuous, HarmonicConvention::Dft] {
                let a = harmonic_coefficients(&g, k, conv).unwrap();
                let b = harmonic_coefficients(&shifted, k, conv).unwrap();
                prop_assert!((b - a * phase).norm() < 1e-12);
            }
        }
    }
}
