//! Command-line front end. Reports go to stdout as JSON (CSV for
//! `watch-degree`, JSON lines for `gen-data`), logs to stderr.
//!
//! Exit codes: 0 success, 2 invalid input, 3 mesh too coarse (timezone
//! violation or no refinement agreement), 4 degenerate projection, 1 other.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{ArgGroup, Args, Parser, Subcommand};
use log::{error, info, warn};
use serde_json::json;

use crate::degree::maps::{Antipodal, AzimuthalPower, Constant, Identity, Rotated};
use crate::degree::{
    auto_degree, choose_n, degree_with_retries, DegreeOptions, DegreeReport, SphereMap, AUTO_MAX_N,
};
use crate::error::{Error, Result};
use crate::harmonics::{generate_dataset, write_dataset, zeta_lipschitz};
use crate::metrics::{lsbd_identity_score, read_latents};
use crate::nn::{
    encoder_sphere_map, load_weights, network_lipschitz, operator_norm, probe_min_norm,
    rho_lower_bound, EncoderMap,
};
use crate::rotation::Rotation;
use crate::sphere::UnitVector;
use crate::triangulation::face_diameter_bound;

#[derive(Debug, Parser)]
#[command(name = "sphere-degree", version, about = "Topological degree of maps S² → S²")]
pub struct Cli {
    /// Worker threads for vertex evaluation (default: all cores).
    #[arg(long, global = true, env = "SPHERE_DEGREE_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Degree of a single map.
    Degree(DegreeArgs),
    /// Degree of every weights file in a directory, as CSV.
    WatchDegree(WatchArgs),
    /// Rotated zonal harmonic dataset as JSON lines.
    GenData(GenDataArgs),
    /// Identity-representation LSBD score of a latents file.
    Lsbd(LsbdArgs),
    /// Lipschitz and ρ bounds of an encoder.
    Lipschitz(LipschitzArgs),
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("mesh").required(true).args(["lipschitz", "n", "auto"])))]
pub struct DegreeArgs {
    /// identity | antipodal | constant[:x,y,z] | power:<k> | rotation:<w,x,y,z> | weights:<file>
    #[arg(long)]
    pub map: MapSpec,
    /// Harmonic degree for weights maps (odd, ≥ 3).
    #[arg(long = "L")]
    pub l: Option<usize>,
    /// Lipschitz constant of the map; sizes the mesh.
    #[arg(long)]
    pub lipschitz: Option<f64>,
    /// Mesh parameter.
    #[arg(long)]
    pub n: Option<usize>,
    /// Refine by 1.5× until three successive meshes agree.
    #[arg(long)]
    pub auto: bool,
    /// Add the solid-angle estimate.
    #[arg(long)]
    pub oracle: bool,
    /// Probe mesh for the ρ certificate of weights maps.
    #[arg(long, default_value_t = 200)]
    pub probe_n: usize,
}

#[derive(Debug, Args)]
pub struct WatchArgs {
    #[arg(long)]
    pub weights_dir: PathBuf,
    #[arg(long = "L")]
    pub l: usize,
    #[arg(long, default_value_t = 200)]
    pub probe_n: usize,
    /// CSV destination (default stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenDataArgs {
    #[arg(long = "L")]
    pub l: usize,
    #[arg(long)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Destination (default stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LsbdArgs {
    #[arg(long)]
    pub latents: PathBuf,
}

#[derive(Debug, Args)]
pub struct LipschitzArgs {
    #[arg(long)]
    pub weights: PathBuf,
    #[arg(long = "L")]
    pub l: usize,
    #[arg(long, default_value_t = 200)]
    pub probe_n: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub enum MapSpec {
    Identity,
    Antipodal,
    Constant([f64; 3]),
    Power(i32),
    Rotation([f64; 4]),
    Weights(PathBuf),
}

fn floats<const N: usize>(s: &str) -> std::result::Result<[f64; N], String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<std::result::Result<_, _>>()?;
    parts.try_into().map_err(|v: Vec<f64>| format!("expected {N} numbers, got {}", v.len()))
}

impl FromStr for MapSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (kind, arg) = match s.split_once(':') {
            Some((k, a)) => (k, Some(a)),
            None => (s, None),
        };
        match (kind, arg) {
            ("identity", None) => Ok(MapSpec::Identity),
            ("antipodal", None) => Ok(MapSpec::Antipodal),
            ("constant", None) => Ok(MapSpec::Constant([0.0, 0.0, 1.0])),
            ("constant", Some(a)) => floats::<3>(a).map(MapSpec::Constant),
            ("power", Some(a)) => a
                .trim()
                .parse()
                .map(MapSpec::Power)
                .map_err(|e| format!("power exponent {a:?}: {e}")),
            ("rotation", Some(a)) => floats::<4>(a).map(MapSpec::Rotation),
            ("weights", Some(a)) if !a.is_empty() => Ok(MapSpec::Weights(PathBuf::from(a))),
            _ => Err(format!("unknown map {s:?}")),
        }
    }
}

/// Parses `args` (including the program name) and runs the subcommand,
/// writing its report to `out`. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if let Some(threads) = cli.threads {
        if threads == 0 {
            error!("--threads must be positive");
            return 2;
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            warn!("thread pool already configured: {e}");
        }
    }
    let result = match &cli.command {
        Command::Degree(a) => cmd_degree(a, out),
        Command::WatchDegree(a) => cmd_watch_degree(a, out),
        Command::GenData(a) => cmd_gen_data(a, out),
        Command::Lsbd(a) => cmd_lsbd(a, out),
        Command::Lipschitz(a) => cmd_lipschitz(a, out),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            error!("{e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidParameter(_)
        | Error::NotFound(_)
        | Error::Schema { .. }
        | Error::DimensionMismatch { .. }
        | Error::NonFinite { .. }
        | Error::Json(_)
        | Error::Io(_) => 2,
        Error::TimezoneViolation { .. } | Error::NoAgreement { .. } => 3,
        Error::DegenerateProjection { .. } => 4,
        Error::NonCycle(_) | Error::NonMultiple | Error::Internal(_) => 1,
    }
}

/// A sphere map with the Lipschitz constant overridden by the user.
struct WithLipschitz<M> {
    inner: M,
    lipschitz: Option<f64>,
}

impl<M: SphereMap> SphereMap for WithLipschitz<M> {
    fn eval(&self, p: UnitVector) -> Result<UnitVector> {
        self.inner.eval(p)
    }

    fn lipschitz(&self) -> Option<f64> {
        self.lipschitz.or_else(|| self.inner.lipschitz())
    }
}

fn require_l(l: Option<usize>) -> Result<usize> {
    l.ok_or_else(|| Error::InvalidParameter("weights maps need --L".into()))
}

/// Loads an encoder and wraps it with the certified ρ when there is one.
/// Without a certificate the smallest probed norm serves as ρ, and the map
/// carries no Lipschitz constant.
pub fn load_encoder(path: &Path, l: usize, probe_n: usize) -> Result<(EncoderMap, bool)> {
    let w = load_weights(path)?;
    let rho = rho_lower_bound(&w, l, probe_n)?;
    if rho > 0.0 {
        info!("{}: certified rho = {rho}", path.display());
        return Ok((encoder_sphere_map(w, l, rho)?, true));
    }
    let probe = probe_min_norm(&w, l, probe_n)?;
    if probe <= 0.0 {
        return Err(Error::DegenerateProjection { norm: probe, threshold: 0.0 });
    }
    warn!("{}: no rho certificate (bound {rho}); degree is heuristic", path.display());
    Ok((encoder_sphere_map(w, l, probe)?, false))
}

fn build_map(args: &DegreeArgs) -> Result<Box<dyn SphereMap>> {
    Ok(match &args.map {
        MapSpec::Identity => Box::new(Identity),
        MapSpec::Antipodal => Box::new(Antipodal),
        MapSpec::Constant(v) => Box::new(Constant(UnitVector::from_array(*v)?)),
        MapSpec::Power(k) => Box::new(AzimuthalPower { k: *k }),
        MapSpec::Rotation(q) => {
            Box::new(Rotated { rotation: Rotation::from_quaternion(*q)?, inner: Identity })
        }
        MapSpec::Weights(path) => {
            let (map, certified) = load_encoder(path, require_l(args.l)?, args.probe_n)?;
            if certified {
                Box::new(map)
            } else {
                Box::new(Uncertified(map))
            }
        }
    })
}

/// Hides the Lipschitz constant of an encoder whose ρ is not certified.
struct Uncertified<M>(M);

impl<M: SphereMap> SphereMap for Uncertified<M> {
    fn eval(&self, p: UnitVector) -> Result<UnitVector> {
        self.0.eval(p)
    }
}

pub fn cmd_degree(args: &DegreeArgs, out: &mut dyn Write) -> Result<()> {
    if let Some(l) = args.lipschitz {
        choose_n(l)?;
    }
    if args.n.is_some_and(|n| n < 3) {
        return Err(Error::InvalidParameter("--n must be at least 3".into()));
    }
    let map = WithLipschitz { inner: build_map(args)?, lipschitz: args.lipschitz };
    let opts = DegreeOptions { n: args.n, oracle: args.oracle, parallel: true };
    let report = if args.auto {
        let start = map.lipschitz().and_then(|l| choose_n(l).ok()).unwrap_or(10);
        let mut report = auto_degree(&map, start.min(AUTO_MAX_N), AUTO_MAX_N, &opts)?;
        report.heuristic = true;
        report
    } else {
        degree_with_retries(&map, &opts, AUTO_MAX_N)?
    };
    write_json(out, &report)
}

fn write_json<T: serde::Serialize>(out: &mut dyn Write, value: &T) -> Result<()> {
    serde_json::to_writer(&mut *out, value)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

/// Degree of one checkpoint: at the certified mesh when ρ is certified,
/// otherwise by automatic refinement.
pub fn checkpoint_degree(path: &Path, l: usize, probe_n: usize) -> Result<DegreeReport> {
    let (map, certified) = load_encoder(path, l, probe_n)?;
    let opts = DegreeOptions::default();
    if certified && map.lipschitz().and_then(|lf| choose_n(lf).ok()).is_some() {
        return degree_with_retries(&map, &opts, AUTO_MAX_N);
    }
    let mut report = auto_degree(&Uncertified(map), 10, AUTO_MAX_N, &opts)?;
    report.heuristic = true;
    Ok(report)
}

pub fn cmd_watch_degree(args: &WatchArgs, out: &mut dyn Write) -> Result<()> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(&args.weights_dir)
        .map_err(|e| Error::NotFound(format!("{}: {e}", args.weights_dir.display())))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.is_file())
        .collect();
    if files.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "no checkpoint files in {}",
            args.weights_dir.display()
        )));
    }
    files.sort();
    let mut sink: Box<dyn Write + '_> = match &args.out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(&mut *out),
    };
    writeln!(sink, "checkpoint,degree,n_used,heuristic")?;
    for path in &files {
        let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        match checkpoint_degree(path, args.l, args.probe_n) {
            Ok(r) => writeln!(sink, "{name},{},{},{}", r.degree, r.n_used, r.heuristic)?,
            Err(e) => {
                warn!("{name}: {e}");
                writeln!(sink, "{name},error,,")?;
            }
        }
    }
    sink.flush()?;
    Ok(())
}

pub fn cmd_gen_data(args: &GenDataArgs, out: &mut dyn Write) -> Result<()> {
    let records = generate_dataset(args.l, args.count, args.seed)?;
    match &args.out {
        Some(path) => write_dataset(BufWriter::new(File::create(path)?), args.l, args.seed, &records),
        None => write_dataset(out, args.l, args.seed, &records),
    }
}

pub fn cmd_lsbd(args: &LsbdArgs, out: &mut dyn Write) -> Result<()> {
    let file = File::open(&args.latents)
        .map_err(|e| Error::NotFound(format!("{}: {e}", args.latents.display())))?;
    let report = lsbd_identity_score(&read_latents(BufReader::new(file))?)?;
    write_json(out, &report)
}

pub fn cmd_lipschitz(args: &LipschitzArgs, out: &mut dyn Write) -> Result<()> {
    let w = load_weights(&args.weights)?;
    if w.input_dim() != 2 * args.l + 1 {
        return Err(Error::DimensionMismatch {
            field: "input_dim".into(),
            expected: 2 * args.l + 1,
            found: w.input_dim(),
        });
    }
    let norms: Vec<f64> = w.layers().iter().map(|l| operator_norm(&l.weight)).collect();
    let net = network_lipschitz(&w);
    let rho = rho_lower_bound(&w, args.l, args.probe_n)?;
    let encoder_lipschitz = (rho > 0.0).then(|| zeta_lipschitz(args.l) * net / rho);
    let report = json!({
        "layer_norms": norms,
        "network_lipschitz": net,
        "zeta_lipschitz": zeta_lipschitz(args.l),
        "probe_n": args.probe_n,
        "probe_min_norm": probe_min_norm(&w, args.l, args.probe_n)?,
        "covering_radius": face_diameter_bound(args.probe_n),
        "rho_lower_bound": rho,
        "encoder_lipschitz": encoder_lipschitz,
        "choose_n": encoder_lipschitz.and_then(|l| choose_n(l).ok()),
    });
    write_json(out, &report)
}
