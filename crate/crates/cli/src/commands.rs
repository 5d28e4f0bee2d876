use std::path::PathBuf;

use clap::Args;

use ris_sim::beamforming::{codebooks_to_text, parse_codebooks, PhaseCodebook};
use ris_sim::geometry::Vec3;
use ris_sim::simulator::export::{write_coverage, write_soi};
use ris_sim::simulator::multihop::seeded_random_codebooks;
use ris_sim::simulator::{
    coverage_map, link_budget, optimize_codebooks, soi_imaging, CodebookPolicy, GridSpec, Scatterer, SoiOptimizer,
    Solver,
};

use crate::error::CliError;
use crate::scenario::{Algo, ScenarioFile};

/// Spread below which an image counts as flat, dB.
pub const FLAT_FIELD_DB: f64 = 6.0;

fn floats(s: &str, n: usize) -> Result<Vec<f64>, String> {
    let v = s
        .split(',')
        .map(|p| {
            let p = p.trim();
            p.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| format!("`{p}` is not a finite number"))
        })
        .collect::<Result<Vec<f64>, String>>()?;
    if v.len() != n {
        return Err(format!("expected {n} comma-separated numbers, got `{s}`"));
    }
    Ok(v)
}

pub fn parse_point(s: &str) -> Result<[f64; 3], String> {
    let v = floats(s, 3)?;
    Ok([v[0], v[1], v[2]])
}

fn count(x: f64, s: &str) -> Result<usize, String> {
    if x >= 1.0 && x.fract() == 0.0 && x < 1e9 {
        Ok(x as usize)
    } else {
        Err(format!("`{s}`: counts must be positive integers"))
    }
}

/// `X0,Y0,Z0,NX,NY,STEP`.
pub fn parse_grid(s: &str) -> Result<GridSpec, String> {
    let v = floats(s, 6)?;
    if !(v[5] > 0.0) {
        return Err("grid step must be positive".into());
    }
    Ok(GridSpec {
        origin: Vec3::new(v[0], v[1], v[2]),
        nx: count(v[3], s)?,
        ny: count(v[4], s)?,
        step: v[5],
    })
}

/// `NX,NY,NZ`.
pub fn parse_dims(s: &str) -> Result<[usize; 3], String> {
    let v = floats(s, 3)?;
    Ok([count(v[0], s)?, count(v[1], s)?, count(v[2], s)?])
}

#[derive(Debug, Clone, PartialEq)]
pub enum PolicyArg {
    Off,
    Mirror,
    Random,
    Point([f64; 3]),
    Fixed(PathBuf),
}

/// `off`, `mirror`, `random`, `point:X,Y,Z` or `fixed:PATH`.
pub fn parse_policy(s: &str) -> Result<PolicyArg, String> {
    match s {
        "off" => Ok(PolicyArg::Off),
        "mirror" => Ok(PolicyArg::Mirror),
        "random" => Ok(PolicyArg::Random),
        _ => {
            if let Some(p) = s.strip_prefix("point:") {
                parse_point(p).map(PolicyArg::Point)
            } else if let Some(p) = s.strip_prefix("fixed:") {
                Ok(PolicyArg::Fixed(PathBuf::from(p)))
            } else {
                Err(format!("unknown policy `{s}`; use off, mirror, random, point:X,Y,Z or fixed:PATH"))
            }
        }
    }
}

fn solver(algo: Algo, passes: usize) -> Solver {
    match algo {
        Algo::Das => Solver::Das,
        Algo::Greedy => Solver::Greedy { max_passes: passes },
        Algo::Brute => Solver::BruteForce,
    }
}

fn algo_name(algo: Algo) -> &'static str {
    match algo {
        Algo::Das => "das",
        Algo::Greedy => "greedy",
        Algo::Brute => "brute",
    }
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    /// Scenario JSON file.
    pub scenario: PathBuf,
    /// Phase resolution for every panel, overriding the file.
    #[arg(long)]
    pub bits: Option<u32>,
    /// Solver; the file's `optimizer` when omitted.
    #[arg(long, value_enum)]
    pub algo: Option<Algo>,
    /// Codebook output file.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn optimize(args: &OptimizeArgs) -> Result<(), CliError> {
    let file = ScenarioFile::load(&args.scenario)?;
    let sc = file.scenario(args.bits)?;
    if sc.panels.is_empty() {
        return Err(CliError::infeasible("invalid-argument", "scenario has no panels to optimize"));
    }
    let algo = args.algo.unwrap_or(file.optimizer);
    let codebooks = optimize_codebooks(&sc, solver(algo, file.greedy_passes))?;
    let report = link_budget(&sc, &codebooks)?;
    std::fs::write(&args.out, codebooks_to_text(&codebooks))
        .map_err(|e| CliError::input("io", format!("{}: {e}", args.out.display())))?;
    println!("algorithm: {}", algo_name(algo));
    println!("panels: {}", sc.panels.len());
    println!("direct_dbm: {:.4}", report.direct_power_dbm);
    println!("objective_dbm: {:.4}", report.rx_power_dbm);
    println!("codebook: {}", args.out.display());
    Ok(())
}

#[derive(Debug, Args)]
pub struct CoverageArgs {
    pub scenario: PathBuf,
    /// `X0,Y0,Z0,NX,NY,STEP`; the file's `grid` when omitted.
    #[arg(long, value_parser = parse_grid)]
    pub grid: Option<GridSpec>,
    /// `off`, `mirror`, `random`, `point:X,Y,Z` or `fixed:PATH`.
    #[arg(long, value_parser = parse_policy, default_value = "off")]
    pub policy: PolicyArg,
    /// Output prefix for `.csv`, `.pgm` and `.pgm.txt`.
    #[arg(long)]
    pub out: PathBuf,
}

fn read_codebooks(path: &PathBuf) -> Result<Vec<PhaseCodebook>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::input("io", format!("{}: {e}", path.display())))?;
    parse_codebooks(&text).map_err(|e| CliError::input("parse", format!("{}: {e}", path.display())))
}

pub fn coverage(args: &CoverageArgs) -> Result<(), CliError> {
    let file = ScenarioFile::load(&args.scenario)?;
    let sc = file.scenario(None)?;
    let grid = args
        .grid
        .or_else(|| file.grid())
        .ok_or_else(|| CliError::input("usage", "no grid: pass --grid or add a `grid` section"))?;
    let policy = match &args.policy {
        PolicyArg::Off => CodebookPolicy::Off,
        PolicyArg::Mirror => CodebookPolicy::Fixed(sc.mirror_codebooks()),
        PolicyArg::Random => CodebookPolicy::Fixed(seeded_random_codebooks(&sc, file.seed)),
        PolicyArg::Point(p) => CodebookPolicy::OptimizeToPoint(Vec3::from(*p)),
        PolicyArg::Fixed(path) => CodebookPolicy::Fixed(read_codebooks(path)?),
    };
    let map = coverage_map(&sc, &grid, &policy)?;
    let files = write_coverage(&map, &args.out)?;
    let (i, j) = map.argmax();
    let p = map.point(i, j);
    println!("cells: {}x{}", map.nx, map.ny);
    println!("argmax: {i} {j} ({:.4}, {:.4}, {:.4})", p.x, p.y, p.z);
    println!("peak_dbm: {:.4}", map.get(i, j));
    for f in files {
        println!("wrote: {}", f.display());
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct ImageArgs {
    pub scenario: PathBuf,
    /// Voxel counts `NX,NY,NZ`, overriding the file's `soi.dims`.
    #[arg(long, value_parser = parse_dims)]
    pub soi: Option<[usize; 3]>,
    /// Point scatterer `X,Y,Z`; repeat for several.
    #[arg(long, value_parser = parse_point)]
    pub scatterer: Vec<[f64; 3]>,
    /// Scatterer reflectivity in (0, 1].
    #[arg(long, default_value_t = 0.5)]
    pub reflectivity: f64,
    /// `das` or `greedy`; the file's `optimizer` when omitted.
    #[arg(long, value_enum)]
    pub algo: Option<Algo>,
    /// Output prefix for `.csv`, `.pgm` and `.pgm.txt`.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn image(args: &ImageArgs) -> Result<(), CliError> {
    let file = ScenarioFile::load(&args.scenario)?;
    let sc = file.scenario(None)?;
    let spec = file.soi(args.soi)?;
    let optimizer = match args.algo.unwrap_or(file.optimizer) {
        Algo::Das => SoiOptimizer::Das,
        Algo::Greedy => SoiOptimizer::Greedy {
            max_passes: file.greedy_passes,
        },
        Algo::Brute => return Err(CliError::input("usage", "imaging supports das or greedy")),
    };
    let scatterers = args
        .scatterer
        .iter()
        .map(|p| Scatterer::new(Vec3::from(*p), args.reflectivity))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::input("usage", e.to_string()))?;
    let img = soi_imaging(&sc, &spec, optimizer, &scatterers)?;
    let files = write_soi(&img, &args.out)?;
    let [nx, ny, nz] = spec.dims;
    let v = img.argmax();
    let c = spec.center(v);
    println!("voxels: {nx}x{ny}x{nz}");
    for s in &scatterers {
        let n = nearest_voxel(&spec, &s.position);
        println!("scatterer_voxel: {} {} {}", n[0], n[1], n[2]);
    }
    println!("argmax: {} {} {} ({:.4}, {:.4}, {:.4})", v[0], v[1], v[2], c.x, c.y, c.z);
    println!("peak_dbm: {:.4}", img.get(v));
    println!("dynamic_range_db: {:.4}", img.dynamic_range_db());
    println!("flat_field: {}", img.is_flat(FLAT_FIELD_DB));
    for f in files {
        println!("wrote: {}", f.display());
    }
    Ok(())
}

fn nearest_voxel(spec: &ris_sim::simulator::SoiSpec, p: &Vec3) -> [usize; 3] {
    let mut out = [0; 3];
    for a in 0..3 {
        let t = ((p[a] - spec.origin[a]) / spec.step[a]).round();
        out[a] = t.clamp(0.0, (spec.dims[a] - 1) as f64) as usize;
    }
    out
}
