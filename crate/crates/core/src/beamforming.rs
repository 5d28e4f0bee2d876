//! Discrete phase-shift optimization for a single-antenna link.
//!
//! The received field through a panel decomposes into a fixed part and one
//! complex gain per unit: `y = direct + Σ_m g_m·e^{jφ_m}` with `φ_m` drawn
//! from the unit's discrete phase states. Everything here maximizes `|y|²`.
//!
//! [`das_opt`] is the exact low-bit solver. Write `ψ` for the phase of the
//! optimal sum. At the optimum every unit must pick the state maximizing
//! `Re(g_m e^{jφ_m} e^{-jψ})`, otherwise switching it would raise the
//! projection of the sum onto `e^{jψ}` and hence `|y|`. That per-unit choice
//! is piecewise constant in `ψ` and changes at `K` points per unit, so
//! sweeping `ψ` once around the circle visits at most `M·K` candidate
//! codebooks, one of which is optimal. Sorting the breakpoints costs
//! `O(MK log MK)`; the sweep itself updates the running sum in `O(1)` per
//! breakpoint.

use std::cmp::Ordering;
use std::f64::consts::TAU;

use num_complex::Complex64;

pub use crate::codebook::{codebooks_to_text, parse_codebooks, PhaseCodebook};
pub use crate::simulator::multihop::multi_hop_optimize;

use crate::error::{invalid, Error, Result};
use crate::geometry::UnitCell;
use crate::numeric::angle_diff;

/// Relative tolerance under which two objective values count as tied.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Largest `M·bits` the exhaustive search accepts.
pub const BRUTE_FORCE_LIMIT: usize = 24;

/// Fixed part plus per-unit cascade gains of a SISO link.
#[derive(Debug, Clone, PartialEq)]
pub struct GainDecomposition {
    pub direct: Complex64,
    pub per_unit: Vec<Complex64>,
}

impl GainDecomposition {
    pub fn new(direct: Complex64, per_unit: Vec<Complex64>) -> Result<Self> {
        if !direct.is_finite() || per_unit.iter().any(|g| !g.is_finite()) {
            return Err(invalid("gain decomposition must be finite"));
        }
        Ok(Self { direct, per_unit })
    }

    pub fn len(&self) -> usize {
        self.per_unit.len()
    }

    pub fn is_empty(&self) -> bool {
        self.per_unit.is_empty()
    }

    /// Multiply every term by `c`.
    pub fn scaled(&self, c: Complex64) -> Self {
        Self {
            direct: self.direct * c,
            per_unit: self.per_unit.iter().map(|g| g * c).collect(),
        }
    }
}

/// An optimizer result: row-major state indices and the objective `|y|²`.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub states: Vec<u8>,
    pub objective: f64,
}

impl Solution {
    pub fn into_codebook(self, rows: usize, cols: usize, bits: u32) -> Result<PhaseCodebook> {
        PhaseCodebook::new(rows, cols, bits, self.states)
    }
}

/// `|direct + Σ g_m e^{jφ_m}|²` for explicit phases.
pub fn objective_power(g: &GainDecomposition, phases: &[f64]) -> Result<f64> {
    if phases.len() != g.per_unit.len() {
        return Err(invalid(format!(
            "{} phases for {} units",
            phases.len(),
            g.per_unit.len()
        )));
    }
    let mut sum = g.direct;
    for (gm, &p) in g.per_unit.iter().zip(phases) {
        sum += gm * Complex64::from_polar(1.0, p);
    }
    Ok(sum.norm_sqr())
}

/// Objective of a state vector on `unit`.
pub fn objective_of_states(g: &GainDecomposition, unit: &UnitCell, states: &[u8]) -> Result<f64> {
    if states.iter().any(|&s| s as usize >= unit.num_states()) {
        return Err(invalid("state index out of range for unit"));
    }
    let phases: Vec<f64> = states.iter().map(|&s| unit.phase_states[s as usize]).collect();
    objective_power(g, &phases)
}

/// Upper bound reached with unconstrained phases: `(|direct| + Σ|g_m|)²`.
pub fn continuous_optimum(g: &GainDecomposition) -> f64 {
    let total = g.direct.norm() + g.per_unit.iter().map(|x| x.norm()).sum::<f64>();
    total * total
}

fn lexicographic_min<'a>(candidates: impl Iterator<Item = &'a Vec<u8>>) -> Option<&'a Vec<u8>> {
    candidates.min_by(|a, b| a.as_slice().cmp(b.as_slice()))
}

fn check_bits(bits: u32, unit: &UnitCell) -> Result<()> {
    if unit.num_states() != 1usize << bits {
        return Err(invalid(format!(
            "unit has {} states but {bits} bits were requested",
            unit.num_states()
        )));
    }
    Ok(())
}

/// Depth-first in lexicographic order; returns false once `visit` asks to
/// stop. The last unit is unrolled so each leaf costs one addition.
fn walk<F: FnMut(&[u8], f64) -> bool>(
    terms: &[Vec<Complex64>],
    digits: &mut [u8],
    m: usize,
    partial: Complex64,
    visit: &mut F,
) -> bool {
    if m + 1 == terms.len() {
        for (k, t) in terms[m].iter().enumerate() {
            digits[m] = k as u8;
            if !visit(digits, (partial + t).norm_sqr()) {
                return false;
            }
        }
        return true;
    }
    for k in 0..terms[m].len() {
        digits[m] = k as u8;
        if !walk(terms, digits, m + 1, partial + terms[m][k], visit) {
            return false;
        }
    }
    true
}

fn enumerate_all<F: FnMut(&[u8], f64) -> bool>(g: &GainDecomposition, unit: &UnitCell, mut visit: F) {
    let terms: Vec<Vec<Complex64>> = g
        .per_unit
        .iter()
        .map(|gm| {
            unit.phase_states
                .iter()
                .map(|&p| gm * Complex64::from_polar(1.0, p))
                .collect()
        })
        .collect();
    if terms.is_empty() {
        visit(&[], g.direct.norm_sqr());
        return;
    }
    let mut digits = vec![0; terms.len()];
    walk(&terms, &mut digits, 0, g.direct, &mut visit);
}

/// Exact argmax by enumerating all `K^M` codebooks. Ties go to the
/// lexicographically smallest state vector.
pub fn brute_force_opt(g: &GainDecomposition, bits: u32, unit: &UnitCell) -> Result<Solution> {
    check_bits(bits, unit)?;
    let work = g.per_unit.len() * bits as usize;
    if work > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge(format!(
            "exhaustive search over M·bits = {work} exceeds {BRUTE_FORCE_LIMIT}"
        )));
    }
    let mut best = f64::NEG_INFINITY;
    enumerate_all(g, unit, |_, obj| {
        if obj > best {
            best = obj;
        }
        true
    });
    let threshold = best * (1.0 - TIE_TOLERANCE);
    let mut chosen = Vec::new();
    enumerate_all(g, unit, |digits, obj| {
        if obj >= threshold {
            chosen = digits.to_vec();
            false
        } else {
            true
        }
    });
    let objective = objective_of_states(g, unit, &chosen)?;
    Ok(Solution {
        states: chosen,
        objective,
    })
}

fn uniform_offset(unit: &UnitCell) -> Result<f64> {
    let k = unit.num_states();
    let base = unit.phase_states[0];
    for (i, &p) in unit.phase_states.iter().enumerate() {
        if angle_diff(p, base + TAU * i as f64 / k as f64).abs() > 1e-9 {
            return Err(invalid(
                "linear-time solver needs equally spaced phase states in increasing order",
            ));
        }
    }
    Ok(base)
}

#[derive(Clone, Copy)]
struct Breakpoint {
    psi: f64,
    unit: usize,
    state: u8,
}

/// Globally optimal discrete phases in `O(MK log MK)` time for 1-, 2- and
/// 3-bit units with equally spaced states.
pub fn das_opt(g: &GainDecomposition, bits: u32, unit: &UnitCell) -> Result<Solution> {
    if !(1..=3).contains(&bits) {
        return Err(invalid(format!("linear-time solver supports 1..=3 bits, got {bits}")));
    }
    check_bits(bits, unit)?;
    let k = unit.num_states();
    let offset = uniform_offset(unit)?;
    let step = TAU / k as f64;
    let m = g.per_unit.len();

    let mut events = Vec::with_capacity(m * k);
    for (idx, gm) in g.per_unit.iter().enumerate() {
        if gm.norm_sqr() == 0.0 {
            continue;
        }
        let alpha = gm.arg();
        for n in 0..k {
            let psi = (alpha + offset + step * (n as f64 - 0.5)).rem_euclid(TAU);
            events.push(Breakpoint {
                psi,
                unit: idx,
                state: n as u8,
            });
        }
    }
    events.sort_by(|a, b| match a.psi.total_cmp(&b.psi) {
        Ordering::Equal => a.unit.cmp(&b.unit),
        other => other,
    });

    // Before the first breakpoint each unit holds the state it took at its
    // last breakpoint of the cycle.
    let mut states = vec![0u8; m];
    for ev in &events {
        states[ev.unit] = ev.state;
    }
    let rotor: Vec<Complex64> = unit
        .phase_states
        .iter()
        .map(|&p| Complex64::from_polar(1.0, p))
        .collect();

    if events.is_empty() {
        let objective = objective_of_states(g, unit, &states)?;
        return Ok(Solution { states, objective });
    }

    let initial = states.clone();
    let mut sum = g.direct;
    for (gm, &s) in g.per_unit.iter().zip(&states) {
        sum += gm * rotor[s as usize];
    }
    let mut objectives = Vec::with_capacity(events.len());
    for ev in &events {
        let old = states[ev.unit];
        sum += g.per_unit[ev.unit] * (rotor[ev.state as usize] - rotor[old as usize]);
        states[ev.unit] = ev.state;
        objectives.push(sum.norm_sqr());
    }

    let best = objectives.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let threshold = best * (1.0 - TIE_TOLERANCE);
    let mut tied = Vec::new();
    let mut replay = initial;
    for (ev, &obj) in events.iter().zip(&objectives) {
        replay[ev.unit] = ev.state;
        if obj >= threshold {
            tied.push(replay.clone());
        }
    }
    let chosen = lexicographic_min(tied.iter()).cloned().expect("at least one candidate");
    let objective = objective_of_states(g, unit, &chosen)?;
    Ok(Solution {
        states: chosen,
        objective,
    })
}

/// Align each unit with the direct term using unconstrained phases, then
/// round to the nearest available state.
pub fn quantize_continuous(g: &GainDecomposition, unit: &UnitCell) -> Solution {
    let reference = if g.direct.norm_sqr() > 0.0 {
        g.direct.arg()
    } else {
        0.0
    };
    let states: Vec<u8> = g
        .per_unit
        .iter()
        .map(|gm| {
            let target = reference - gm.arg();
            let mut best = 0u8;
            let mut best_d = f64::INFINITY;
            for (i, &p) in unit.phase_states.iter().enumerate() {
                let d = angle_diff(p, target).abs();
                if d < best_d - 1e-12 {
                    best_d = d;
                    best = i as u8;
                }
            }
            best
        })
        .collect();
    let objective = objective_of_states(g, unit, &states).expect("states drawn from unit");
    Solution { states, objective }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GreedyOutcome {
    pub codebook: PhaseCodebook,
    pub objective: f64,
    /// Objective after every single-unit update, starting with the initial
    /// codebook.
    pub trace: Vec<f64>,
    pub passes: usize,
}

/// Coordinate ascent over units in row-major order. A unit only moves when
/// some state beats its current one by more than the tie tolerance; among
/// equally good improvements the smallest state index wins.
pub fn greedy_opt<F>(mut evaluate: F, init: &PhaseCodebook, max_passes: usize) -> Result<GreedyOutcome>
where
    F: FnMut(&PhaseCodebook) -> f64,
{
    if max_passes == 0 {
        return Err(invalid("max_passes must be at least 1"));
    }
    let mut current = init.clone();
    let mut value = evaluate(&current);
    let mut trace = vec![value];
    let k = current.num_states();
    let mut passes = 0;
    while passes < max_passes {
        passes += 1;
        let mut changed = false;
        for idx in 0..current.len() {
            let original = current.states()[idx];
            let mut best_state = original;
            let mut best_value = value;
            for s in 0..k as u8 {
                if s == original {
                    continue;
                }
                current.set(idx, s)?;
                let v = evaluate(&current);
                if v > best_value * (1.0 + TIE_TOLERANCE) + f64::MIN_POSITIVE
                    && (best_state == original || v > best_value)
                {
                    best_value = v;
                    best_state = s;
                }
            }
            current.set(idx, best_state)?;
            if best_state != original {
                changed = true;
                value = best_value;
            }
            trace.push(value);
        }
        if !changed {
            break;
        }
    }
    Ok(GreedyOutcome {
        codebook: current,
        objective: value,
        trace,
        passes,
    })
}
