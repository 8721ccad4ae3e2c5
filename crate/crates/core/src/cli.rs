//! Command-line front end for the `dtqw-zak` binary.
//!
//! Every command builds a [`Report`] (metadata plus a table) and writes it
//! as CSV or JSON. Exit codes: 0 success, 2 usage error, 3 domain error
//! (singular or degenerate parameters), 4 I/O error.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use crate::angles::linspace;
use crate::bands::{
    cos_quasi_energy, dirac_sweep, dispersion, dispersion_surface, distinct_parameter_sets, find_dirac_points,
    is_gapless, min_gap, norm_vector,
};
use crate::bloch::{bloch_argument, bloch_eigenvectors_with, Spinor};
use crate::coin::CoinState;
use crate::landscape::{berry_curvature_check, zak_landscape, zak_vector_2d};
use crate::output::{write_report, Cell, Format, Report, Table, SCHEMA_VERSION};
use crate::protocol::{ParamFamily, ParamSlot, Protocol, ProtocolParams};
use crate::symmetry::{flip_theta1, flipped_argument_walk, n2_sign_preserved, trs_region_mask};
use crate::walk::{
    evolve, evolve_momentum_space, from_time_bins, overlap_phase, sample_shots, to_time_bins, LineState, PlaneState,
    TimeBinConfig, WalkState,
};
use crate::zak::{
    zak_closed_form_ssqw, zak_endpoint_formula, zak_quadrature, zak_wilson_loop, ZakResult, CONVERGENCE_TOLERANCE,
    FULL_ZONE, HALF_ZONE, MAX_NODES, POSITIVE_HALF_ZONE,
};
use crate::{Error, C64};

/// Environment variable naming a directory that relative `--output` paths
/// are resolved against.
pub const OUTPUT_DIR_ENV: &str = "DTQW_OUTPUT_DIR";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Domain(#[from] Error),
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Domain(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Usage(msg.into()))
}

#[derive(Debug, Parser)]
#[command(name = "dtqw-zak", version, about = "Band structure and Zak phases of discrete-time quantum walks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[arg(long, value_enum, default_value_t = Format::Csv, global = true)]
    pub format: Format,
    /// Output file (standard output when omitted). Relative paths are placed
    /// under $DTQW_OUTPUT_DIR when that variable is set.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    /// Read plain-number angles as degrees. `pi` expressions stay radians.
    #[arg(long, global = true)]
    pub deg: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Quasi-energy E(k), optionally swept over one parameter.
    Dispersion(DispersionArgs),
    /// Norm vector n(k), Bloch argument and Bloch eigenvectors.
    Norms(NormsArgs),
    /// 1D Zak phase by Wilson loop, closed-form quadrature and endpoint formula.
    Zak1d(Zak1dArgs),
    /// 2D Zak vector (Zx, Zy) over a parameter grid.
    Landscape(LandscapeArgs),
    /// Gap-closing (Dirac) points for fixed parameters or a parameter grid.
    Dirac(DiracArgs),
    /// Split-step allowed region for breaking time-reversal symmetry.
    Trsregion(TrsRegionArgs),
    /// Position-space walk distribution in 1D or separable 2D.
    Walk(WalkArgs),
    /// Arrival-time histogram of a 2D walk.
    Timebins(TimeBinArgs),
}

/// An angle as typed: a plain number, or a multiple of pi such as `pi/4`,
/// `-3pi/4` or `0.5*pi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleArg {
    value: f64,
    pi_form: bool,
}

impl AngleArg {
    pub fn radians(self, deg: bool) -> f64 {
        if deg && !self.pi_form {
            self.value.to_radians()
        } else {
            self.value
        }
    }
}

pub fn parse_angle(s: &str) -> std::result::Result<AngleArg, String> {
    let t: String = s.trim().to_lowercase().replace('π', "pi").chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || format!("cannot read angle '{s}'; use a number or a form like pi/4, -3pi/4, 0.5*pi");
    let Some(pos) = t.find("pi") else {
        let value: f64 = t.parse().map_err(|_| bad())?;
        return if value.is_finite() { Ok(AngleArg { value, pi_form: false }) } else { Err(bad()) };
    };
    let (head, tail) = (&t[..pos], &t[pos + 2..]);
    let head = head.strip_suffix('*').unwrap_or(head);
    let coef: f64 = match head {
        "" | "+" => 1.0,
        "-" => -1.0,
        h => h.parse().map_err(|_| bad())?,
    };
    let denom: f64 = match tail {
        "" => 1.0,
        d => d.strip_prefix('/').ok_or_else(bad)?.parse().map_err(|_| bad())?,
    };
    let value = coef * std::f64::consts::PI / denom;
    if value.is_finite() {
        Ok(AngleArg { value, pi_form: true })
    } else {
        Err(bad())
    }
}

#[derive(Debug, Clone, Args)]
pub struct ProtocolArgs {
    #[arg(long, value_enum)]
    pub protocol: Protocol,
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true)]
    pub theta: Option<AngleArg>,
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true)]
    pub phi: Option<AngleArg>,
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true)]
    pub theta1: Option<AngleArg>,
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true)]
    pub theta2: Option<AngleArg>,
}

impl ProtocolArgs {
    fn given(&self) -> [(&'static str, Option<AngleArg>); 4] {
        [("theta", self.theta), ("phi", self.phi), ("theta1", self.theta1), ("theta2", self.theta2)]
    }

    /// Checks that exactly the protocol's angles are present, except for
    /// `free`, which must be absent. Returns them in declaration order.
    fn angles(&self, deg: bool, free: Option<&str>) -> CliResult<Vec<f64>> {
        let needed = self.protocol.parameter_names();
        let mut out = Vec::new();
        for (name, value) in self.given() {
            let wanted = needed.contains(&name) && free != Some(name);
            match (wanted, value) {
                (true, Some(v)) => out.push(v.radians(deg)),
                (true, None) => return usage(format!("--{name} is required for {}", self.protocol)),
                (false, Some(_)) if needed.contains(&name) => {
                    return usage(format!("--{name} is swept and must not be given"))
                }
                (false, Some(_)) => return usage(format!("--{name} does not apply to {}", self.protocol)),
                (false, None) => {}
            }
        }
        Ok(out)
    }

    pub fn resolve(&self, deg: bool) -> CliResult<ProtocolParams> {
        let a = self.angles(deg, None)?;
        Ok(ProtocolParams::from_pair(self.protocol, a[0], a.get(1).copied().unwrap_or(0.0)))
    }

    fn any_angle(&self) -> bool {
        self.given().iter().any(|(_, v)| v.is_some())
    }
}

#[derive(Debug, Clone, Args)]
pub struct KGrid {
    #[arg(long, default_value_t = 721)]
    pub k_points: usize,
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true, default_value = "-pi")]
    pub k_min: AngleArg,
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true, default_value = "pi")]
    pub k_max: AngleArg,
}

fn axis(min: AngleArg, max: AngleArg, points: usize, deg: bool, name: &str) -> CliResult<Vec<f64>> {
    let (a, b) = (min.radians(deg), max.radians(deg));
    if points < 2 {
        return usage(format!("{name} needs at least 2 points"));
    }
    if !(b > a) {
        return usage(format!("{name} range is empty: [{a}, {b}]"));
    }
    Ok(linspace(a, b, points))
}

impl KGrid {
    fn axis(&self, deg: bool) -> CliResult<Vec<f64>> {
        axis(self.k_min, self.k_max, self.k_points, deg, "k grid")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepSlot {
    First,
    Second,
}

#[derive(Debug, Clone, Args)]
pub struct DispersionArgs {
    #[command(flatten)]
    pub protocol: ProtocolArgs,
    #[command(flatten)]
    pub k: KGrid,
    /// Sweep one protocol angle; that angle must then be omitted.
    #[arg(long, value_enum)]
    pub sweep: Option<SweepSlot>,
    #[arg(long, default_value_t = 201)]
    pub sweep_points: usize,
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true, default_value = "-pi")]
    pub sweep_min: AngleArg,
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true, default_value = "pi")]
    pub sweep_max: AngleArg,
}

#[derive(Debug, Clone, Args)]
pub struct NormsArgs {
    #[command(flatten)]
    pub protocol: ProtocolArgs,
    #[command(flatten)]
    pub k: KGrid,
    /// Report the walk with the sign-flipped Bloch argument.
    #[arg(long)]
    pub flip: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ZakMethodArg {
    Wilson,
    Quadrature,
    Endpoint,
    /// Wilson loop and quadrature, plus the endpoint formula when n3 vanishes.
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum IntervalChoice {
    /// [-pi/2, pi/2]
    Half,
    /// [0, pi]
    Positive,
    /// [-pi, pi]
    Full,
}

impl IntervalChoice {
    fn bounds(self) -> (f64, f64) {
        match self {
            IntervalChoice::Half => HALF_ZONE,
            IntervalChoice::Positive => POSITIVE_HALF_ZONE,
            IntervalChoice::Full => FULL_ZONE,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct Zak1dArgs {
    #[command(flatten)]
    pub protocol: ProtocolArgs,
    #[arg(long, value_enum, default_value_t = ZakMethodArg::All)]
    pub method: ZakMethodArg,
    /// Path for every method; defaults to half for the Wilson loop and
    /// endpoint formula and positive for quadrature.
    #[arg(long, value_enum)]
    pub interval: Option<IntervalChoice>,
    /// Initial grid intervals; refined by doubling.
    #[arg(long, default_value_t = 64)]
    pub n_k: usize,
    /// Use the sign-flipped Bloch argument for the y walk of the 2D vector.
    #[arg(long)]
    pub flip_y: bool,
    /// Points per axis of the Berry-curvature plaquette grid.
    #[arg(long, default_value_t = 64)]
    pub curvature_points: usize,
}

#[derive(Debug, Clone, Args)]
pub struct LandscapeArgs {
    #[arg(long, value_enum)]
    pub protocol: Protocol,
    #[arg(long, default_value_t = 201)]
    pub points: usize,
    /// Points along the second axis; defaults to --points.
    #[arg(long)]
    pub points2: Option<usize>,
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true, default_value = "-pi")]
    pub p1_min: AngleArg,
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true, default_value = "pi")]
    pub p1_max: AngleArg,
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true, default_value = "-pi")]
    pub p2_min: AngleArg,
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true, default_value = "pi")]
    pub p2_max: AngleArg,
    #[arg(long)]
    pub flip_y: bool,
    #[arg(long, default_value_t = 64)]
    pub n_k: usize,
}

#[derive(Debug, Clone, Args)]
pub struct DiracArgs {
    #[command(flatten)]
    pub protocol: ProtocolArgs,
    /// Sweep both angles over this many points in [-pi, pi] instead of
    /// taking fixed angles.
    #[arg(long)]
    pub grid_points: Option<usize>,
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true, default_value = "-pi")]
    pub k_min: AngleArg,
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true, default_value = "pi")]
    pub k_max: AngleArg,
    /// Threshold on 1 - |cos E|.
    #[arg(long, default_value_t = 1e-12)]
    pub tolerance: f64,
}

#[derive(Debug, Clone, Args)]
pub struct TrsRegionArgs {
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true)]
    pub theta1: AngleArg,
    #[arg(long, default_value_t = 201)]
    pub theta2_points: usize,
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true, default_value = "-pi")]
    pub theta2_min: AngleArg,
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true, default_value = "pi")]
    pub theta2_max: AngleArg,
    #[arg(long, default_value_t = 201)]
    pub k_points: usize,
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true, default_value = "-pi")]
    pub k_min: AngleArg,
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true, default_value = "pi")]
    pub k_max: AngleArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CoinArg {
    H,
    V,
    /// (H + V)/√2
    D,
    /// (H − V)/√2
    A,
    /// (H + iV)/√2
    R,
    /// (H − iV)/√2
    L,
}

impl CoinArg {
    pub fn state(self) -> CoinState {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let (h, v) = match self {
            CoinArg::H => return CoinState::H,
            CoinArg::V => return CoinState::V,
            CoinArg::D => (C64::new(s, 0.0), C64::new(s, 0.0)),
            CoinArg::A => (C64::new(s, 0.0), C64::new(-s, 0.0)),
            CoinArg::R => (C64::new(s, 0.0), C64::new(0.0, s)),
            CoinArg::L => (C64::new(s, 0.0), C64::new(0.0, -s)),
        };
        CoinState::new(h, v)
    }
}

#[derive(Debug, Clone, Args)]
pub struct WalkSetup {
    #[command(flatten)]
    pub protocol: ProtocolArgs,
    #[arg(long)]
    pub steps: usize,
    #[arg(long, value_enum, default_value_t = CoinArg::H)]
    pub coin: CoinArg,
    /// Initial coin of the y walk (2D only).
    #[arg(long, value_enum, default_value_t = CoinArg::H)]
    pub coin_y: CoinArg,
    /// Run the y walk with theta1 negated (split-step walk only).
    #[arg(long)]
    pub flip_y: bool,
}

#[derive(Debug, Clone, Args)]
pub struct WalkArgs {
    #[command(flatten)]
    pub setup: WalkSetup,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub dims: u8,
    /// Evolve a 1D walk in momentum space and transform back.
    #[arg(long)]
    pub momentum: bool,
}

#[derive(Debug, Clone, Args)]
pub struct TimeBinArgs {
    #[command(flatten)]
    pub setup: WalkSetup,
    #[arg(long, default_value_t = 1e-9)]
    pub dt_x: f64,
    #[arg(long, default_value_t = 100e-9)]
    pub dt_y: f64,
    #[arg(long, default_value_t = 90e-12)]
    pub pulse_width: f64,
    #[arg(long, default_value_t = 1.0 / 110e3)]
    pub rep_period: f64,
    #[arg(long, default_value_t = 0.5)]
    pub transmission: f64,
    /// Number of simulated photons; 0 skips sampling.
    #[arg(long, default_value_t = 0)]
    pub shots: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Decode the histogram back to lattice probabilities.
    #[arg(long)]
    pub decode: bool,
}

fn base_metadata(command: &str) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("schema_version".into(), json!(SCHEMA_VERSION));
    m.insert("tool".into(), json!(env!("CARGO_PKG_NAME")));
    m.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
    m.insert("command".into(), json!(command));
    m.insert("seed".into(), Value::Null);
    m
}

fn params_json(p: &ProtocolParams) -> Value {
    serde_json::to_value(p).expect("parameters serialise")
}

fn zak_meta(r: &ZakResult) -> Value {
    json!({"method": r.method.label(), "n_k": r.n_k, "interval": [r.interval.0, r.interval.1],
           "closure": r.closure.map(|c| c.label()), "last_change": r.last_change})
}

fn check_n_k(n_k: usize) -> CliResult<()> {
    if n_k < 16 {
        return usage(format!("--n-k must be at least 16, got {n_k}"));
    }
    Ok(())
}

/// Runs the parsed command and returns its report.
pub fn execute(cli: &Cli) -> CliResult<Report> {
    let deg = cli.deg;
    match &cli.command {
        Command::Dispersion(a) => cmd_dispersion(a, deg),
        Command::Norms(a) => cmd_norms(a, deg),
        Command::Zak1d(a) => cmd_zak1d(a, deg),
        Command::Landscape(a) => cmd_landscape(a, deg),
        Command::Dirac(a) => cmd_dirac(a, deg),
        Command::Trsregion(a) => cmd_trsregion(a, deg),
        Command::Walk(a) => cmd_walk(a, deg),
        Command::Timebins(a) => cmd_timebins(a, deg),
    }
}

fn cmd_dispersion(a: &DispersionArgs, deg: bool) -> CliResult<Report> {
    let ks = a.k.axis(deg)?;
    let mut meta = base_metadata("dispersion");
    meta.insert("k_grid".into(), json!({"points": ks.len(), "min": ks[0], "max": ks[ks.len() - 1]}));
    let Some(slot) = a.sweep else {
        let params = a.protocol.resolve(deg)?;
        let mut t = Table::new(&["k", "E", "cos_E"]);
        for &k in &ks {
            t.push(vec![k.into(), dispersion(&params, k)?.into(), cos_quasi_energy(&params, k).into()]);
        }
        meta.insert("protocol".into(), json!(params.protocol().name()));
        meta.insert("parameters".into(), params_json(&params));
        meta.insert("min_gap".into(), json!(min_gap(&params)));
        meta.insert("gapless".into(), json!(is_gapless(&params)));
        return Ok(Report { metadata: Value::Object(meta), table: t });
    };
    let protocol = a.protocol.protocol;
    let names = protocol.parameter_names();
    let (slot, idx) = match slot {
        SweepSlot::First => (ParamSlot::First, 0),
        SweepSlot::Second if names.len() == 2 => (ParamSlot::Second, 1),
        SweepSlot::Second => return usage(format!("{protocol} has a single parameter")),
    };
    let fixed = a.protocol.angles(deg, Some(names[idx]))?;
    let other = fixed.first().copied().unwrap_or(0.0);
    let base = match slot {
        ParamSlot::First => ProtocolParams::from_pair(protocol, 0.0, other),
        ParamSlot::Second => ProtocolParams::from_pair(protocol, other, 0.0),
    };
    let family = ParamFamily::new(base, slot);
    let sweep = axis(a.sweep_min, a.sweep_max, a.sweep_points, deg, "sweep")?;
    let surface = dispersion_surface(|v| family.at(v), &sweep, &ks)?;
    let mut t = Table::new(&["param", "k", "E"]);
    for (i, &p) in sweep.iter().enumerate() {
        for (j, &k) in ks.iter().enumerate() {
            t.push(vec![p.into(), k.into(), surface.get(i, j).into()]);
        }
    }
    meta.insert("protocol".into(), json!(protocol.name()));
    meta.insert("swept_parameter".into(), json!(names[idx]));
    meta.insert("fixed_parameters".into(), params_json(&base));
    Ok(Report { metadata: Value::Object(meta), table: t })
}

fn spinor_cells(v: Option<&Spinor>) -> Vec<Cell> {
    match v {
        Some(v) => vec![v[0].re.into(), v[0].im.into(), v[1].re.into(), v[1].im.into()],
        None => vec![Cell::Undefined; 4],
    }
}

fn cmd_norms(a: &NormsArgs, deg: bool) -> CliResult<Report> {
    let params = a.protocol.resolve(deg)?;
    let ks = a.k.axis(deg)?;
    let mut t = Table::new(&[
        "k",
        "E",
        "n1",
        "n2",
        "n3",
        "phi",
        "u_plus_h_re",
        "u_plus_h_im",
        "u_plus_v_re",
        "u_plus_v_im",
        "u_minus_h_re",
        "u_minus_h_im",
        "u_minus_v_re",
        "u_minus_v_im",
    ]);
    let mut singular = 0;
    for &k in &ks {
        let mut row = vec![k.into(), dispersion(&params, k)?.into()];
        match norm_vector(&params, k) {
            Ok(n) => {
                let n2 = if a.flip { -n.n2 } else { n.n2 };
                row.extend([n.n1.into(), n2.into(), n.n3.into()]);
            }
            Err(Error::SingularPoint { .. }) => {
                singular += 1;
                row.extend(vec![Cell::Undefined; 3]);
            }
            Err(e) => return Err(e.into()),
        }
        let phi = if a.flip { flipped_argument_walk(&params, k) } else { bloch_argument(&params, k) };
        row.push(Cell::opt(phi.ok()));
        let eig = bloch_eigenvectors_with(&params, k, a.flip).ok();
        row.extend(spinor_cells(eig.as_ref().map(|e| &e.plus)));
        row.extend(spinor_cells(eig.as_ref().map(|e| &e.minus)));
        t.push(row);
    }
    let mut meta = base_metadata("norms");
    meta.insert("protocol".into(), json!(params.protocol().name()));
    meta.insert("parameters".into(), params_json(&params));
    meta.insert("k_grid".into(), json!({"points": ks.len(), "min": ks[0], "max": ks[ks.len() - 1]}));
    meta.insert("flip".into(), json!(a.flip));
    meta.insert("gauge".into(), json!("largest_component_real_positive"));
    meta.insert("singular_points".into(), json!(singular));
    Ok(Report { metadata: Value::Object(meta), table: t })
}

fn zak_row(r: &ZakResult) -> Vec<Cell> {
    vec![
        r.method.label().into(),
        r.interval.0.into(),
        r.interval.1.into(),
        Cell::opt(r.z_plus),
        Cell::opt(r.z_minus),
        Cell::opt(r.z_total),
        Cell::opt(r.raw_total),
        (r.n_k as i64).into(),
        r.closure.map_or(Cell::Undefined, |c| c.label().into()),
    ]
}

fn cmd_zak1d(a: &Zak1dArgs, deg: bool) -> CliResult<Report> {
    let params = a.protocol.resolve(deg)?;
    check_n_k(a.n_k)?;
    if a.curvature_points < 2 {
        return usage("--curvature-points needs at least 2");
    }
    let wilson_interval = a.interval.map_or(HALF_ZONE, IntervalChoice::bounds);
    let quad_interval = a.interval.map_or(POSITIVE_HALF_ZONE, IntervalChoice::bounds);
    let options = crate::zak::WilsonOptions { n_k: a.n_k, ..Default::default() };

    // The split-step ratio is part of every split-step report.
    let ratio = match params {
        ProtocolParams::Ssqw { theta1, theta2 } => Some(zak_closed_form_ssqw(theta1, theta2).map_err(|e| match e {
            Error::DivisionByZero => Error::DegenerateTheta1(theta1),
            other => other,
        })?),
        _ => None,
    };

    let mut results = Vec::new();
    if matches!(a.method, ZakMethodArg::Wilson | ZakMethodArg::All) {
        results.push(zak_wilson_loop(&params, wilson_interval, options)?);
    }
    if matches!(a.method, ZakMethodArg::Quadrature | ZakMethodArg::All) {
        results.push(zak_quadrature(&params, quad_interval, a.n_k)?);
    }
    match a.method {
        ZakMethodArg::Endpoint => results.push(zak_endpoint_formula(&params, wilson_interval, a.n_k)?),
        ZakMethodArg::All => {
            if let Ok(r) = zak_endpoint_formula(&params, wilson_interval, a.n_k) {
                results.push(r);
            }
        }
        _ => {}
    }

    let mut t =
        Table::new(&["method", "k_start", "k_end", "Z_plus", "Z_minus", "Z_total", "raw_total", "n_k", "closure"]);
    for r in &results {
        t.push(zak_row(r));
    }

    let vector = zak_vector_2d(&params, &params, a.flip_y, options)?;
    let ks = linspace(-std::f64::consts::PI, std::f64::consts::PI, a.curvature_points);
    let curvature = berry_curvature_check(&params, &params, &ks, &ks, a.flip_y)?;

    let mut meta = base_metadata("zak1d");
    meta.insert("protocol".into(), json!(params.protocol().name()));
    meta.insert("parameters".into(), params_json(&params));
    meta.insert("runs".into(), Value::Array(results.iter().map(zak_meta).collect()));
    meta.insert(
        "convergence".into(),
        json!({"tolerance": CONVERGENCE_TOLERANCE, "max_nodes": MAX_NODES, "initial_n_k": a.n_k}),
    );
    meta.insert("closed_form_ratio".into(), json!(ratio));
    meta.insert("zak_vector_2d".into(), json!({"Zx": vector.zx, "Zy": vector.zy, "flip_y": a.flip_y}));
    meta.insert("max_berry_curvature".into(), json!({"value": curvature, "grid_points": a.curvature_points}));
    Ok(Report { metadata: Value::Object(meta), table: t })
}

fn cmd_landscape(a: &LandscapeArgs, deg: bool) -> CliResult<Report> {
    check_n_k(a.n_k)?;
    let p1 = axis(a.p1_min, a.p1_max, a.points, deg, "param1")?;
    let p2 = match a.protocol {
        Protocol::Hqw => {
            if a.points2.is_some() {
                return usage("hqw has a single parameter; --points2 does not apply");
            }
            None
        }
        _ => Some(axis(a.p2_min, a.p2_max, a.points2.unwrap_or(a.points), deg, "param2")?),
    };
    let options = crate::zak::WilsonOptions { n_k: a.n_k, ..Default::default() };
    let land = zak_landscape(a.protocol, &p1, p2.as_deref(), a.flip_y, options)?;
    let mut t = Table::new(&["param1", "param2", "Zx", "Zy", "singular_flag"]);
    for c in &land.cells {
        let (first, second) = c.params.pair();
        t.push(vec![first.into(), Cell::opt(second), Cell::opt(c.zx), Cell::opt(c.zy), c.is_singular().into()]);
    }
    let names = a.protocol.parameter_names();
    let mut meta = base_metadata("landscape");
    meta.insert("protocol".into(), json!(a.protocol.name()));
    meta.insert("param1".into(), json!({"name": names[0], "points": p1.len(), "min": p1[0], "max": p1[p1.len() - 1]}));
    meta.insert(
        "param2".into(),
        match &p2 {
            Some(p) => json!({"name": names[1], "points": p.len(), "min": p[0], "max": p[p.len() - 1]}),
            None => Value::Null,
        },
    );
    meta.insert("flip_y".into(), json!(a.flip_y));
    meta.insert("interval".into(), json!([HALF_ZONE.0, HALF_ZONE.1]));
    meta.insert("method".into(), json!("wilson_loop"));
    meta.insert("convergence".into(), json!({"tolerance": CONVERGENCE_TOLERANCE, "initial_n_k": a.n_k}));
    meta.insert("singular_cells".into(), json!(land.singular_count()));
    Ok(Report { metadata: Value::Object(meta), table: t })
}

fn cmd_dirac(a: &DiracArgs, deg: bool) -> CliResult<Report> {
    if !(a.tolerance > 0.0) {
        return usage("--tolerance must be positive");
    }
    let (lo, hi) = (a.k_min.radians(deg), a.k_max.radians(deg));
    if !(hi > lo) {
        return usage("k range is empty");
    }
    let protocol = a.protocol.protocol;
    let family: Vec<ProtocolParams> = match a.grid_points {
        Some(n) => {
            if a.protocol.any_angle() {
                return usage("--grid-points sweeps every angle; do not pass fixed angles");
            }
            if n < 2 {
                return usage("--grid-points needs at least 2");
            }
            let g = linspace(-std::f64::consts::PI, std::f64::consts::PI, n);
            match protocol {
                Protocol::Hqw => g.iter().map(|&t| ProtocolParams::hqw(t)).collect(),
                _ => {
                    g.iter().flat_map(|&p| g.iter().map(move |&q| ProtocolParams::from_pair(protocol, p, q))).collect()
                }
            }
        }
        None => vec![a.protocol.resolve(deg)?],
    };
    let points = if family.len() == 1 {
        find_dirac_points(&family[0], (lo, hi), a.tolerance)?
    } else {
        dirac_sweep(&family, (lo, hi), a.tolerance)?
    };
    let mut t = Table::new(&["param1", "param2", "k", "E", "gap_at"]);
    for p in &points {
        let (first, second) = p.params.pair();
        t.push(vec![
            first.into(),
            Cell::opt(second),
            p.k.into(),
            dispersion(&p.params, p.k)?.into(),
            p.gap_at.label().into(),
        ]);
    }
    let mut meta = base_metadata("dirac");
    meta.insert("protocol".into(), json!(protocol.name()));
    meta.insert("k_window".into(), json!([lo, hi]));
    meta.insert("tolerance".into(), json!(a.tolerance));
    meta.insert("grid_points".into(), json!(a.grid_points));
    if family.len() == 1 {
        meta.insert("parameters".into(), params_json(&family[0]));
    }
    meta.insert("point_count".into(), json!(points.len()));
    meta.insert("gapless_parameter_sets".into(), json!(distinct_parameter_sets(&points)));
    Ok(Report { metadata: Value::Object(meta), table: t })
}

fn cmd_trsregion(a: &TrsRegionArgs, deg: bool) -> CliResult<Report> {
    let theta1 = a.theta1.radians(deg);
    let t2 = axis(a.theta2_min, a.theta2_max, a.theta2_points, deg, "theta2")?;
    let ks = axis(a.k_min, a.k_max, a.k_points, deg, "k grid")?;
    let mask = trs_region_mask(theta1, &t2, &ks)?;
    let mut t = Table::new(&["theta2", "k", "allowed", "n2_sign_preserved"]);
    for (i, &th2) in t2.iter().enumerate() {
        for (j, &k) in ks.iter().enumerate() {
            t.push(vec![th2.into(), k.into(), mask.allowed[i][j].into(), n2_sign_preserved(theta1, th2, k)?.into()]);
        }
    }
    let mut meta = base_metadata("trsregion");
    meta.insert("protocol".into(), json!("ssqw"));
    meta.insert("theta1".into(), json!(theta1));
    meta.insert("theta2_grid".into(), json!({"points": t2.len(), "min": t2[0], "max": t2[t2.len() - 1]}));
    meta.insert("k_grid".into(), json!({"points": ks.len(), "min": ks[0], "max": ks[ks.len() - 1]}));
    meta.insert("allowed_cells".into(), json!(mask.allowed_count()));
    Ok(Report { metadata: Value::Object(meta), table: t })
}

fn y_params(setup: &WalkSetup, params: &ProtocolParams) -> CliResult<ProtocolParams> {
    if setup.flip_y {
        Ok(flip_theta1(params)?)
    } else {
        Ok(*params)
    }
}

fn walk_metadata(
    command: &str,
    setup: &WalkSetup,
    px: &ProtocolParams,
    py: Option<&ProtocolParams>,
) -> Map<String, Value> {
    let mut meta = base_metadata(command);
    meta.insert("protocol".into(), json!(px.protocol().name()));
    meta.insert("parameters".into(), params_json(px));
    meta.insert("parameters_y".into(), py.map_or(Value::Null, params_json));
    meta.insert("steps".into(), json!(setup.steps));
    meta.insert("coin".into(), json!(format!("{:?}", setup.coin).to_lowercase()));
    meta
}

fn plane_walk(setup: &WalkSetup, px: &ProtocolParams, py: &ProtocolParams) -> CliResult<(WalkState, WalkState)> {
    let start = WalkState::Plane(PlaneState::localized(setup.coin.state(), setup.coin_y.state()));
    let end = evolve(&start, px, Some(py), setup.steps)?;
    Ok((start, end))
}

fn cmd_walk(a: &WalkArgs, deg: bool) -> CliResult<Report> {
    let setup = &a.setup;
    let px = setup.protocol.resolve(deg)?;
    let (start, end, py) = if a.dims == 1 {
        if setup.flip_y {
            return usage("--flip-y needs --dims 2");
        }
        let line = LineState::localized(setup.coin.state());
        let end = if a.momentum {
            let radius = px.protocol().shifts_per_step() as usize * setup.steps;
            let m = (2 * radius + 1).next_power_of_two().trailing_zeros();
            WalkState::Line(evolve_momentum_space(&line, &px, setup.steps, m)?)
        } else {
            evolve(&WalkState::Line(line.clone()), &px, None, setup.steps)?
        };
        (WalkState::Line(line), end, None)
    } else {
        if a.momentum {
            return usage("--momentum applies to 1D walks only");
        }
        let py = y_params(setup, &px)?;
        let (s, e) = plane_walk(setup, &px, &py)?;
        (s, e, Some(py))
    };
    let mut t = Table::new(&["x", "y", "pH", "pV", "p_total"]);
    for p in end.distribution() {
        t.push(vec![p.x.into(), p.y.map_or(Cell::Undefined, Cell::Int), p.p_h.into(), p.p_v.into(), p.total().into()]);
    }
    let mut meta = walk_metadata("walk", setup, &px, py.as_ref());
    meta.insert("dims".into(), json!(a.dims));
    meta.insert("representation".into(), json!(if a.momentum { "momentum" } else { "position" }));
    meta.insert(
        "coin_y".into(),
        if a.dims == 2 { json!(format!("{:?}", setup.coin_y).to_lowercase()) } else { Value::Null },
    );
    meta.insert("norm".into(), json!(end.norm_sqr()));
    meta.insert("overlap_phase".into(), json!(overlap_phase(&start, &end).ok()));
    Ok(Report { metadata: Value::Object(meta), table: t })
}

fn cmd_timebins(a: &TimeBinArgs, deg: bool) -> CliResult<Report> {
    let setup = &a.setup;
    let px = setup.protocol.resolve(deg)?;
    let py = y_params(setup, &px)?;
    let cfg = TimeBinConfig::new(a.dt_x, a.dt_y, a.pulse_width, a.rep_period, a.transmission)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let (_, end) = plane_walk(setup, &px, &py)?;
    let WalkState::Plane(plane) = end else { unreachable!("plane walk returns a plane state") };
    let hist = to_time_bins(&plane, &cfg)?;
    let mut meta = walk_metadata("timebins", setup, &px, Some(&py));
    meta.insert("config".into(), serde_json::to_value(cfg).expect("config serialises"));
    meta.insert("detected_probability".into(), json!(hist.detected_probability()));
    meta.insert("transmission_factor".into(), json!(hist.transmission));
    meta.insert("decoded".into(), json!(a.decode));

    let table = if a.decode {
        let sites = from_time_bins(&hist, &cfg)?;
        let mut t = Table::new(&["x", "y", "pH", "pV", "p_total"]);
        for ((x, y), [h, v]) in sites {
            t.push(vec![x.into(), y.into(), h.into(), v.into(), (h + v).into()]);
        }
        t
    } else {
        let shots = (a.shots > 0).then(|| sample_shots(&hist, a.shots, a.seed));
        if let Some(s) = &shots {
            meta.insert("seed".into(), json!(a.seed));
            meta.insert("shots".into(), json!(s.shots));
            meta.insert("lost".into(), json!(s.lost));
        }
        let mut t = Table::new(&["time", "coin", "x", "y", "probability", "counts"]);
        for (i, b) in hist.bins.iter().enumerate() {
            let coin = match b.coin {
                crate::walk::CoinLabel::H => "H",
                crate::walk::CoinLabel::V => "V",
            };
            let counts = shots.as_ref().map_or(Cell::Undefined, |s| Cell::Int(s.counts[i] as i64));
            t.push(vec![b.time.into(), coin.into(), b.site.0.into(), b.site.1.into(), b.probability.into(), counts]);
        }
        t
    };
    Ok(Report { metadata: Value::Object(meta), table })
}

/// Resolves `--output` against the override directory.
pub fn output_path(path: &std::path::Path) -> PathBuf {
    match std::env::var_os(OUTPUT_DIR_ENV) {
        Some(dir) if path.is_relative() && !dir.is_empty() => PathBuf::from(dir).join(path),
        _ => path.to_path_buf(),
    }
}

/// Executes `cli` and writes its report.
pub fn run(cli: &Cli) -> CliResult<()> {
    let report = execute(cli)?;
    match &cli.output {
        Some(path) => {
            let mut w = BufWriter::new(File::create(output_path(path))?);
            write_report(&report, cli.format, &mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = BufWriter::new(stdout.lock());
            write_report(&report, cli.format, &mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
