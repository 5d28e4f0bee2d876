//! `ris spacetime`: harmonic analysis of a time-coded panel.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, ValueEnum};

use ris_sim::em::PlaneWave;
use ris_sim::geometry::{Pose, RisPanel, SphericalDirection, Vec3};
use ris_sim::simulator::SPEED_OF_LIGHT;
use ris_sim::spacetime::{equivalent_phase_table, harmonic_frequency, harmonic_pattern, HarmonicConvention, TimeCodebook};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConventionArg {
    Continuous,
    Dft,
}

/// Elevation cut `AZ,EL0,EL1,STEP` in degrees; negative elevations lie on
/// the opposite azimuth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanArg {
    pub azimuth_deg: f64,
    pub start_deg: f64,
    pub stop_deg: f64,
    pub step_deg: f64,
}

impl ScanArg {
    fn angles(&self) -> Vec<f64> {
        let n = ((self.stop_deg - self.start_deg) / self.step_deg + 1e-9).floor() as usize + 1;
        (0..n).map(|i| self.start_deg + i as f64 * self.step_deg).collect()
    }

    fn direction(&self, el_deg: f64) -> Result<SphericalDirection, CliError> {
        let az = if el_deg < 0.0 { self.azimuth_deg + 180.0 } else { self.azimuth_deg };
        SphericalDirection::from_degrees(az, el_deg.abs()).map_err(|e| CliError::input("usage", e.to_string()))
    }
}

pub fn parse_scan(s: &str) -> Result<ScanArg, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|_| format!("`{p}` is not a number")))
        .collect::<Result<_, _>>()?;
    if v.len() != 4 || v.iter().any(|x| !x.is_finite()) {
        return Err(format!("expected AZ,EL0,EL1,STEP, got `{s}`"));
    }
    let scan = ScanArg {
        azimuth_deg: v[0],
        start_deg: v[1],
        stop_deg: v[2],
        step_deg: v[3],
    };
    if !(scan.step_deg > 0.0) || scan.stop_deg < scan.start_deg {
        return Err("scan needs EL0 <= EL1 and a positive step".into());
    }
    if scan.start_deg < -90.0 || scan.stop_deg > 90.0 {
        return Err("scan elevations must lie in [-90, 90]".into());
    }
    Ok(scan)
}

#[derive(Debug, Args)]
pub struct SpacetimeArgs {
    /// Time-codebook text file.
    pub timecode: PathBuf,
    /// Harmonic order.
    #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
    pub harmonic: i64,
    /// Elevation cut `AZ,EL0,EL1,STEP`, degrees.
    #[arg(long, value_parser = parse_scan, default_value = "0,-90,90,1")]
    pub scan: ScanArg,
    /// Carrier frequency, Hz.
    #[arg(long, default_value_t = 5.8e9)]
    pub frequency: f64,
    #[arg(long, value_enum, default_value = "continuous")]
    pub convention: ConventionArg,
    /// Output prefix; the pattern goes to `<prefix>.csv`.
    #[arg(long)]
    pub out: PathBuf,
}

/// Pattern cut as CSV: a metadata row, a column header, then one row per
/// direction with the power in dB relative to the peak.
pub fn pattern_to_csv(k: i64, frequency_hz: f64, rows: &[(f64, f64, f64)]) -> String {
    let mut s = format!("harmonic,{k},frequency_hz,{frequency_hz}\nazimuth_deg,elevation_deg,power_db\n");
    for (az, el, p) in rows {
        let _ = writeln!(s, "{az:.4},{el:.4},{p:.4}");
    }
    s
}

pub fn parse_pattern_csv(text: &str) -> Result<(i64, f64, Vec<(f64, f64, f64)>), String> {
    let mut lines = text.lines();
    let meta: Vec<&str> = lines.next().ok_or("empty file")?.split(',').collect();
    if meta.len() != 4 || meta[0] != "harmonic" || meta[2] != "frequency_hz" {
        return Err("line 1: bad metadata row".into());
    }
    let k = meta[1].parse().map_err(|_| "line 1: bad harmonic")?;
    let f = meta[3].parse().map_err(|_| "line 1: bad frequency")?;
    if lines.next() != Some("azimuth_deg,elevation_deg,power_db") {
        return Err("line 2: bad column header".into());
    }
    let mut rows = Vec::new();
    for (n, line) in lines.enumerate() {
        let v: Vec<f64> = line
            .split(',')
            .map(|x| x.parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| format!("line {}: bad number", n + 3))?;
        if v.len() != 3 {
            return Err(format!("line {}: expected 3 fields", n + 3));
        }
        rows.push((v[0], v[1], v[2]));
    }
    Ok((k, f, rows))
}

pub fn run(args: &SpacetimeArgs) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&args.timecode)
        .map_err(|e| CliError::input("io", format!("{}: {e}", args.timecode.display())))?;
    let tc = TimeCodebook::from_text(&text)
        .map_err(|e| CliError::input("parse", format!("{}: {e}", args.timecode.display())))?;
    if !(args.frequency > 0.0) {
        return Err(CliError::input("usage", "--frequency must be positive"));
    }
    let convention = match args.convention {
        ConventionArg::Continuous => HarmonicConvention::Continuous,
        ConventionArg::Dft => HarmonicConvention::Dft,
    };
    let lambda = SPEED_OF_LIGHT / args.frequency;
    let pose = Pose::facing(Vec3::zeros(), Vec3::z(), Vec3::y())?;
    let panel = RisPanel::half_wavelength(tc.rows(), tc.cols(), tc.bits(), lambda, pose)?;
    let k = args.harmonic;

    println!("harmonic: {k}");
    println!("frequency_hz: {}", harmonic_frequency(args.frequency, k, tc.period()));
    for m in 0..tc.units() {
        let a = tc.harmonic(&panel.unit, m, k, convention)?;
        println!("a[{m}]: magnitude={} phase_deg={:.4}", a.norm(), a.arg().to_degrees());
    }
    for (m, p) in equivalent_phase_table(&tc, &panel.unit)?.iter().enumerate() {
        println!("equivalent_phase_deg[{m}]: {:.4}", p.to_degrees());
    }

    let angles = args.scan.angles();
    let scan = angles
        .iter()
        .map(|&el| args.scan.direction(el))
        .collect::<Result<Vec<_>, _>>()?;
    let wave = PlaneWave::new(1.0, lambda, SphericalDirection::boresight())?;
    let pattern = harmonic_pattern(&panel, &tc, k, &scan, &wave, Default::default())?;
    if pattern.iter().all(|p| *p == f64::NEG_INFINITY) {
        eprintln!("warning: harmonic {k} carries no energy; the pattern is -inf everywhere");
    }
    let rows: Vec<(f64, f64, f64)> = angles
        .iter()
        .zip(&pattern)
        .map(|(&el, &p)| (args.scan.azimuth_deg, el, p))
        .collect();
    let mut out = args.out.as_os_str().to_owned();
    out.push(".csv");
    let out = PathBuf::from(out);
    std::fs::write(&out, pattern_to_csv(k, args.frequency, &rows))
        .map_err(|e| CliError::input("io", format!("{}: {e}", out.display())))?;
    // first maximum wins
    let peak = rows
        .iter()
        .filter(|r| r.2.is_finite())
        .fold(None::<&(f64, f64, f64)>, |best, r| match best {
            Some(b) if b.2 >= r.2 => Some(b),
            _ => Some(r),
        });
    match peak {
        Some(&(_, el, _)) => println!("peak_elevation_deg: {el:.4}"),
        None => println!("peak_elevation_deg: none"),
    }
    println!("wrote: {}", out.display());
    Ok(())
}
