//! CSV and 16-bit PGM artifacts for coverage maps and SOI images.
//!
//! CSV files open with a metadata row (`origin`, `step`, `dims`) followed by
//! a column header; powers carry four decimals and `-inf` where no path
//! arrives. PGM images are binary `P5` with maxval 65535, big-endian
//! samples, `+y` up. The dB range mapped onto `0..=65535` goes to a sidecar
//! `<name>.pgm.txt`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::geometry::Vec3;

use super::{CoverageGrid, SoiGrid, SoiSpec};

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn num<T: std::str::FromStr>(field: Option<&str>, line: usize, what: &str) -> Result<T> {
    field
        .ok_or_else(|| parse_err(line, format!("missing {what}")))?
        .trim()
        .parse()
        .map_err(|_| parse_err(line, format!("bad {what}")))
}

fn expect(field: Option<&str>, want: &str, line: usize) -> Result<()> {
    match field {
        Some(f) if f == want => Ok(()),
        _ => Err(parse_err(line, format!("expected `{want}`"))),
    }
}

pub fn coverage_to_csv(grid: &CoverageGrid) -> String {
    let o = grid.origin;
    let mut s = format!(
        "origin,{},{},{},step,{},dims,{},{}\ni,j,x_m,y_m,z_m,power_dbm\n",
        o.x, o.y, o.z, grid.step, grid.nx, grid.ny
    );
    for i in 0..grid.nx {
        for j in 0..grid.ny {
            let p = grid.point(i, j);
            let _ = writeln!(s, "{i},{j},{:.4},{:.4},{:.4},{:.4}", p.x, p.y, p.z, grid.get(i, j));
        }
    }
    s
}

fn data_lines<'a>(text: &'a str, header: &str, count: usize) -> Result<Vec<(usize, Vec<&'a str>)>> {
    let mut lines = text.split('\n').enumerate().skip(1);
    match lines.next() {
        Some((_, h)) if h == header => {}
        _ => return Err(parse_err(2, "unexpected column header")),
    }
    let rows: Vec<(usize, Vec<&str>)> = lines
        .filter(|(_, l)| !l.is_empty())
        .map(|(n, l)| (n + 1, l.split(',').collect()))
        .collect();
    if rows.len() != count {
        return Err(parse_err(text.lines().count(), format!("expected {count} rows, found {}", rows.len())));
    }
    Ok(rows)
}

pub fn parse_coverage_csv(text: &str) -> Result<CoverageGrid> {
    let meta = text.lines().next().ok_or_else(|| parse_err(1, "empty file"))?;
    let mut f = meta.split(',');
    expect(f.next(), "origin", 1)?;
    let origin = Vec3::new(num(f.next(), 1, "origin")?, num(f.next(), 1, "origin")?, num(f.next(), 1, "origin")?);
    expect(f.next(), "step", 1)?;
    let step: f64 = num(f.next(), 1, "step")?;
    expect(f.next(), "dims", 1)?;
    let nx: usize = num(f.next(), 1, "dims")?;
    let ny: usize = num(f.next(), 1, "dims")?;
    let mut values_dbm = Vec::with_capacity(nx * ny);
    for (idx, (line, row)) in data_lines(text, "i,j,x_m,y_m,z_m,power_dbm", nx * ny)?.into_iter().enumerate() {
        if row.len() != 6 {
            return Err(parse_err(line, "expected 6 fields"));
        }
        let (i, j): (usize, usize) = (num(Some(row[0]), line, "i")?, num(Some(row[1]), line, "j")?);
        if i * ny + j != idx {
            return Err(parse_err(line, "cells out of order"));
        }
        values_dbm.push(num(Some(row[5]), line, "power")?);
    }
    Ok(CoverageGrid {
        origin,
        nx,
        ny,
        step,
        values_dbm,
    })
}

pub fn soi_to_csv(grid: &SoiGrid) -> String {
    let sp = &grid.spec;
    let (o, st, d) = (sp.origin, sp.step, sp.dims);
    let background = if sp.subtract_background { "subtracted" } else { "kept" };
    let mut s = format!(
        "origin,{},{},{},step,{},{},{},dims,{},{},{},background,{background}\ni,j,k,x_m,y_m,z_m,intensity_dbm\n",
        o.x, o.y, o.z, st.x, st.y, st.z, d[0], d[1], d[2]
    );
    for idx in 0..sp.len() {
        let v = sp.voxel(idx);
        let c = sp.center(v);
        let _ = writeln!(
            s,
            "{},{},{},{:.4},{:.4},{:.4},{:.4}",
            v[0], v[1], v[2], c.x, c.y, c.z, grid.intensity_dbm[idx]
        );
    }
    s
}

/// SOI image from CSV; voxel codebooks are not part of the file.
pub fn parse_soi_csv(text: &str) -> Result<SoiGrid> {
    let meta = text.lines().next().ok_or_else(|| parse_err(1, "empty file"))?;
    let mut f = meta.split(',');
    let mut triple = |key: &str| -> Result<[f64; 3]> {
        expect(f.next(), key, 1)?;
        Ok([num(f.next(), 1, key)?, num(f.next(), 1, key)?, num(f.next(), 1, key)?])
    };
    let o = triple("origin")?;
    let st = triple("step")?;
    let d = triple("dims")?;
    expect(f.next(), "background", 1)?;
    let subtract_background = match f.next() {
        Some("subtracted") => true,
        Some("kept") => false,
        _ => return Err(parse_err(1, "background must be `subtracted` or `kept`")),
    };
    if d.iter().any(|x| x.fract() != 0.0 || *x < 1.0) {
        return Err(parse_err(1, "dims must be positive integers"));
    }
    let mut spec = SoiSpec::new(
        Vec3::from(o),
        [d[0] as usize, d[1] as usize, d[2] as usize],
        Vec3::from(st),
    )
    .map_err(|e| parse_err(1, e.to_string()))?;
    spec.subtract_background = subtract_background;
    let mut intensity_dbm = Vec::with_capacity(spec.len());
    for (idx, (line, row)) in data_lines(text, "i,j,k,x_m,y_m,z_m,intensity_dbm", spec.len())?.into_iter().enumerate() {
        if row.len() != 7 {
            return Err(parse_err(line, "expected 7 fields"));
        }
        let v = [num(Some(row[0]), line, "i")?, num(Some(row[1]), line, "j")?, num(Some(row[2]), line, "k")?];
        if spec.index(v) != idx {
            return Err(parse_err(line, "voxels out of order"));
        }
        intensity_dbm.push(num(Some(row[6]), line, "intensity")?);
    }
    Ok(SoiGrid {
        spec,
        voxel_codebooks: Vec::new(),
        intensity_dbm,
    })
}

/// dB range mapped onto the full 16-bit scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PgmRange {
    pub min_dbm: f64,
    pub max_dbm: f64,
}

impl PgmRange {
    /// Finite extent of `values`; both ends `-inf` when nothing is finite.
    pub fn of(values: &[f64]) -> Self {
        let finite = values.iter().copied().filter(|v| v.is_finite());
        let min = finite.clone().fold(f64::INFINITY, f64::min);
        let max = finite.fold(f64::NEG_INFINITY, f64::max);
        if min > max {
            Self {
                min_dbm: f64::NEG_INFINITY,
                max_dbm: f64::NEG_INFINITY,
            }
        } else {
            Self {
                min_dbm: min,
                max_dbm: max,
            }
        }
    }

    /// `-inf` maps to 0; a constant finite image maps to full scale.
    pub fn encode(&self, v: f64) -> u16 {
        if !v.is_finite() {
            return 0;
        }
        let span = self.max_dbm - self.min_dbm;
        if !(span > 0.0) {
            return u16::MAX;
        }
        (((v - self.min_dbm) / span).clamp(0.0, 1.0) * 65535.0).round() as u16
    }

    pub fn decode(&self, p: u16) -> f64 {
        self.min_dbm + (self.max_dbm - self.min_dbm) * p as f64 / 65535.0
    }

    pub fn to_text(&self) -> String {
        format!("min_dbm={}\nmax_dbm={}\n", self.min_dbm, self.max_dbm)
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut min = None;
        let mut max = None;
        for (n, line) in text.lines().enumerate() {
            let (k, v) = line.split_once('=').ok_or_else(|| parse_err(n + 1, "expected key=value"))?;
            let v: f64 = num(Some(v), n + 1, k)?;
            match k {
                "min_dbm" => min = Some(v),
                "max_dbm" => max = Some(v),
                _ => return Err(parse_err(n + 1, format!("unknown key `{k}`"))),
            }
        }
        match (min, max) {
            (Some(min_dbm), Some(max_dbm)) => Ok(Self { min_dbm, max_dbm }),
            _ => Err(parse_err(text.lines().count().max(1), "min_dbm and max_dbm are required")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PgmImage {
    pub width: usize,
    pub height: usize,
    /// Row-major, top row first.
    pub pixels: Vec<u16>,
}

impl PgmImage {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n65535\n", self.width, self.height).into_bytes();
        out.reserve(self.pixels.len() * 2);
        for p in &self.pixels {
            out.extend_from_slice(&p.to_be_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut pos = 0;
        let mut token = || -> Result<String> {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            let start = pos;
            while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if start == pos {
                return Err(parse_err(1, "truncated PGM header"));
            }
            Ok(String::from_utf8_lossy(&bytes[start..pos]).into_owned())
        };
        if token()? != "P5" {
            return Err(parse_err(1, "not a binary PGM"));
        }
        let width: usize = num(Some(&token()?), 2, "width")?;
        let height: usize = num(Some(&token()?), 2, "height")?;
        let maxval: u32 = num(Some(&token()?), 3, "maxval")?;
        if maxval != 65535 {
            return Err(parse_err(3, "only 16-bit PGM is supported"));
        }
        let data = &bytes[pos + 1..];
        if data.len() != width * height * 2 {
            return Err(parse_err(4, format!("expected {} sample bytes, found {}", width * height * 2, data.len())));
        }
        let pixels = data.chunks_exact(2).map(|c| u16::from_be_bytes([c[0], c[1]])).collect();
        Ok(Self { width, height, pixels })
    }
}

/// Cell `(i, j)` lands in column `i`, row `ny-1-j`.
pub fn coverage_to_pgm(grid: &CoverageGrid) -> (PgmImage, PgmRange) {
    let range = PgmRange::of(&grid.values_dbm);
    let mut pixels = Vec::with_capacity(grid.nx * grid.ny);
    for r in 0..grid.ny {
        for i in 0..grid.nx {
            pixels.push(range.encode(grid.get(i, grid.ny - 1 - r)));
        }
    }
    (
        PgmImage {
            width: grid.nx,
            height: grid.ny,
            pixels,
        },
        range,
    )
}

/// `z` slices side by side: voxel `(i, j, l)` lands in column `l·nx + i`,
/// row `ny-1-j`.
pub fn soi_to_pgm(grid: &SoiGrid) -> (PgmImage, PgmRange) {
    let [nx, ny, nz] = grid.spec.dims;
    let range = PgmRange::of(&grid.intensity_dbm);
    let mut pixels = Vec::with_capacity(nx * ny * nz);
    for r in 0..ny {
        for l in 0..nz {
            for i in 0..nx {
                pixels.push(range.encode(grid.get([i, ny - 1 - r, l])));
            }
        }
    }
    (
        PgmImage {
            width: nx * nz,
            height: ny,
            pixels,
        },
        range,
    )
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn write_all(prefix: &Path, csv: String, (img, range): (PgmImage, PgmRange)) -> Result<Vec<PathBuf>> {
    let paths = vec![
        with_suffix(prefix, ".csv"),
        with_suffix(prefix, ".pgm"),
        with_suffix(prefix, ".pgm.txt"),
    ];
    fs::write(&paths[0], csv)?;
    fs::write(&paths[1], img.to_bytes())?;
    fs::write(&paths[2], range.to_text())?;
    Ok(paths)
}

/// Writes `<prefix>.csv`, `<prefix>.pgm` and `<prefix>.pgm.txt`.
pub fn write_coverage(grid: &CoverageGrid, prefix: &Path) -> Result<Vec<PathBuf>> {
    write_all(prefix, coverage_to_csv(grid), coverage_to_pgm(grid))
}

/// Writes `<prefix>.csv`, `<prefix>.pgm` and `<prefix>.pgm.txt`.
pub fn write_soi(grid: &SoiGrid, prefix: &Path) -> Result<Vec<PathBuf>> {
    write_all(prefix, soi_to_csv(grid), soi_to_pgm(grid))
}
