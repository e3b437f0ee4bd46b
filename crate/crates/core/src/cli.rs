//! The `mxemu` command-line front end.
//!
//! Exit codes: 0 success, 1 data error, 2 I/O error, 3 configuration error
//! (including unparsable command lines).

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::analysis::{error_decomposition, group_stats, stats_summary, ErrorReport, StatsSummary};
use crate::error::{MxError, Result};
use crate::fixtures;
use crate::formats::ELEMENT_FORMAT_NAMES;
use crate::gemm::{matmul_quantized, oracle_matmul, AccumSpec};
use crate::io::{read_tensor, write_quantized, write_tensor, Dtype};
use crate::lloydmax::{reference_quantize, LloydConfig, LloydInit};
use crate::quantizer::{quantize, QuantConfig};
use crate::rotation::{make_rotation, rotate, rotate_transpose};
use crate::scaling::SCALE_MODE_NAMES;
use crate::tensor::{GroupSize, Tensor};

/// Named configurations accepted wherever a format name is: `(name, element
/// format, default scale mode, forced group size)`.
const PRESETS: &[(&str, &str, &str, Option<&str>)] = &[
    ("mxfp4", "fp4_e2m1", "pot_floor", None),
    ("amxfp4", "fp4_e2m1_asym", "fp8e5m2", None),
    ("mxint4", "int4", "pot_floor", None),
    ("amxint4", "int4_asym", "fp8e5m2", None),
    ("mxfp6", "fp6_e2m3", "pot_floor", None),
    ("mxfp8", "fp8_e4m3", "pot_floor", None),
    ("mxint8", "int8", "pot_floor", None),
    ("nvfp4", "fp4_e2m1", "nvfp4_double", Some("16")),
    ("anvfp4", "fp4_e2m1_asym", "nvfp4_double", Some("16")),
];

#[derive(Parser, Debug)]
#[command(name = "mxemu", version, about = "Microscaling format emulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Quantize-dequantize a tensor.
    Quantize(QuantizeArgs),
    /// Error report of several formats on the same tensor.
    Compare(CompareArgs),
    /// Per-group mean and kurtosis summary.
    Stats(StatsArgs),
    /// Randomized Hadamard rotation along one axis.
    Rotate(RotateArgs),
    /// Emulated quantized matrix product.
    Matmul(MatmulArgs),
    /// Cluster-wise Lloyd-Max reference quantization.
    Lloydmax(LloydArgs),
    /// Write a synthetic tensor.
    Fixture(FixtureArgs),
}

#[derive(Args, Debug)]
pub struct GroupArgs {
    /// Elements per group, or "row" for the whole axis.
    #[arg(long, default_value = "32")]
    pub group_size: String,
    /// Quantization axis; negative values count from the end.
    #[arg(long, default_value_t = -1, allow_negative_numbers = true)]
    pub axis: isize,
}

#[derive(Args, Debug)]
pub struct QuantizeArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Element format (e.g. fp4_e2m1, int4_asym, int8_zp) or preset (mxfp4, amxfp4, nvfp4, ...).
    #[arg(long, default_value = "fp4_e2m1")]
    pub format: String,
    /// Scale mode; defaults to the preset's mode, else pot_floor.
    #[arg(long)]
    pub scale: Option<String>,
    #[command(flatten)]
    pub group: GroupArgs,
    /// Print the sorted distinct dequantized values, one per line.
    #[arg(long, conflicts_with = "json")]
    pub dump_unique: bool,
    /// Print the error report as JSON.
    #[arg(long)]
    pub json: bool,
    /// Also write the codes and scales as an MXQ1 file.
    #[arg(long)]
    pub packed: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = DtypeArg::F64)]
    pub dtype: DtypeArg,
}

#[derive(Args, Debug)]
pub struct CompareArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Comma-separated formats or presets; `name:scale` overrides the scale.
    #[arg(long, default_value = "mxfp4,amxfp4")]
    pub format: String,
    #[arg(long)]
    pub scale: Option<String>,
    #[command(flatten)]
    pub group: GroupArgs,
    /// Add a Lloyd-Max reference row.
    #[arg(long)]
    pub lloyd: bool,
    #[command(flatten)]
    pub lloyd_cfg: LloydFlags,
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug)]
pub struct LloydFlags {
    #[arg(long, default_value_t = 16)]
    pub clusters: usize,
    #[arg(long, default_value_t = 100)]
    pub iters: usize,
    #[arg(long, default_value_t = 16)]
    pub levels: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Codebook initialization: "quantile" or a format/preset whose
    /// dequantized values seed each cluster.
    #[arg(long, default_value = "quantile")]
    pub init: String,
}

#[derive(Args, Debug)]
pub struct StatsArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[command(flatten)]
    pub group: GroupArgs,
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug)]
pub struct RotateArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = -1, allow_negative_numbers = true)]
    pub dim_axis: isize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Apply the inverse rotation.
    #[arg(long)]
    pub transpose: bool,
    /// Report the max-abs difference between the result and this tensor.
    #[arg(long)]
    pub diff_against: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
    #[arg(long, value_enum, default_value_t = DtypeArg::F64)]
    pub dtype: DtypeArg,
}

#[derive(Args, Debug)]
pub struct MatmulArgs {
    /// Left operand `[m, k]`, grouped along k.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Right operand `[k, n]`, grouped along k.
    #[arg(long)]
    pub rhs: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value = "fp4_e2m1")]
    pub format: String,
    #[arg(long)]
    pub scale: Option<String>,
    /// Right operand format; defaults to --format.
    #[arg(long)]
    pub rhs_format: Option<String>,
    #[arg(long)]
    pub rhs_scale: Option<String>,
    #[arg(long, default_value = "32")]
    pub group_size: String,
    #[arg(long, value_enum, default_value_t = AccumArg::F64)]
    pub accum: AccumArg,
    /// Compare against the dequantize-then-multiply binary64 oracle.
    #[arg(long)]
    pub oracle_check: bool,
    #[arg(long)]
    pub json: bool,
    #[arg(long, value_enum, default_value_t = DtypeArg::F64)]
    pub dtype: DtypeArg,
}

#[derive(Args, Debug)]
pub struct LloydArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub group: GroupArgs,
    #[command(flatten)]
    pub lloyd: LloydFlags,
    #[arg(long)]
    pub json: bool,
    #[arg(long, value_enum, default_value_t = DtypeArg::F64)]
    pub dtype: DtypeArg,
}

#[derive(Args, Debug)]
pub struct FixtureArgs {
    #[arg(long, value_enum)]
    pub kind: FixtureKind,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 64)]
    pub rows: usize,
    #[arg(long, default_value_t = 256)]
    pub cols: usize,
    /// Shift-group length for `shifted`.
    #[arg(long, default_value_t = 32)]
    pub group_len: usize,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// Spikes per row for `spike`.
    #[arg(long, default_value_t = 2)]
    pub spikes: usize,
    #[arg(long, default_value_t = 50.0)]
    pub magnitude: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = DtypeArg::F64)]
    pub dtype: DtypeArg,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum FixtureKind {
    /// linspace(-4.9, 31, 1024).
    Snippet,
    /// Gaussian groups shifted by ±sigma.
    Shifted,
    /// Gaussian noise with large spikes.
    Spike,
    /// Gaussian with random magnitude, zeros and outliers.
    Random,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum DtypeArg {
    F32,
    F64,
}

impl From<DtypeArg> for Dtype {
    fn from(d: DtypeArg) -> Self {
        match d {
            DtypeArg::F32 => Dtype::F32,
            DtypeArg::F64 => Dtype::F64,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum AccumArg {
    F64,
    F32,
}

/// Builds a config from a format or preset name. The scale comes from, in
/// order: a `name:scale` suffix, `scale`, the preset, `pot_floor`.
pub fn resolve_config(entry: &str, scale: Option<&str>, group_size: &str, axis: isize) -> Result<QuantConfig> {
    let (name, entry_scale) = match entry.split_once(':') {
        Some((n, s)) => (n.trim(), Some(s.trim())),
        None => (entry.trim(), None),
    };
    let preset = PRESETS.iter().find(|p| p.0 == name);
    let (format, preset_scale, forced_gs) = match preset {
        Some(&(_, f, s, gs)) => (f, Some(s), gs),
        None => (name, None, None),
    };
    let scale = entry_scale.or(scale).or(preset_scale).unwrap_or("pot_floor");
    let gs = forced_gs.unwrap_or(group_size);
    QuantConfig::from_names(format, scale, gs)
        .map(|c| c.with_axis(axis))
        .map_err(|e| match e {
            MxError::UnsupportedFormat(msg) => MxError::UnsupportedFormat(format!(
                "{msg}; presets: {}; suffixes: _asym, _zp (int only); scales: {}",
                PRESETS.iter().map(|p| p.0).collect::<Vec<_>>().join(", "),
                SCALE_MODE_NAMES.join(", ")
            )),
            other => other,
        })
}

fn stdout_err(e: std::io::Error) -> MxError {
    MxError::io("<stdout>", e)
}

fn emit_json<W: Write, T: Serialize>(out: &mut W, value: &T) -> Result<()> {
    let s = serde_json::to_string_pretty(value).expect("serializable report");
    writeln!(out, "{s}").map_err(stdout_err)
}

fn load(path: &Path) -> Result<Tensor> {
    Ok(read_tensor(path)?.0)
}

fn lloyd_config(f: &LloydFlags) -> LloydConfig {
    LloydConfig {
        n_clusters: f.clusters,
        n_iters: f.iters,
        n_levels: f.levels,
        seed: f.seed,
    }
}

fn lloyd_init(f: &LloydFlags, group_size: &str, axis: isize) -> Result<LloydInit> {
    if f.init == "quantile" {
        Ok(LloydInit::Quantile)
    } else {
        Ok(LloydInit::FormatGrid(resolve_config(&f.init, None, group_size, axis)?))
    }
}

fn without_groups(mut r: ErrorReport) -> ErrorReport {
    r.per_group.clear();
    r
}

#[derive(Serialize)]
struct CompareRow {
    label: String,
    #[serde(flatten)]
    report: ErrorReport,
}

#[derive(Serialize)]
struct CompareReport {
    element_count: usize,
    input_stats: Option<StatsSummary>,
    rows: Vec<CompareRow>,
}

#[derive(Serialize)]
struct StatsReport {
    group_size: String,
    axis: isize,
    groups: usize,
    summary: StatsSummary,
}

#[derive(Serialize)]
struct RotateReport {
    dim: usize,
    seed: u64,
    transpose: bool,
    max_abs_diff: Option<f64>,
}

#[derive(Serialize)]
struct MatmulReport {
    shape: Vec<usize>,
    lhs: String,
    rhs: String,
    max_abs_diff_vs_oracle: Option<f64>,
}

#[derive(Serialize)]
struct LloydReport {
    #[serde(flatten)]
    report: ErrorReport,
    clusters: usize,
    cluster_sizes: Vec<usize>,
}

/// Runs a parsed command, writing reports to `out`.
pub fn run<W: Write>(cli: Cli, out: &mut W) -> Result<()> {
    match cli.command {
        Command::Quantize(a) => cmd_quantize(a, out),
        Command::Compare(a) => cmd_compare(a, out),
        Command::Stats(a) => cmd_stats(a, out),
        Command::Rotate(a) => cmd_rotate(a, out),
        Command::Matmul(a) => cmd_matmul(a, out),
        Command::Lloydmax(a) => cmd_lloydmax(a, out),
        Command::Fixture(a) => cmd_fixture(a, out),
    }
}

fn cmd_quantize<W: Write>(a: QuantizeArgs, out: &mut W) -> Result<()> {
    let cfg = resolve_config(&a.format, a.scale.as_deref(), &a.group.group_size, a.group.axis)?;
    let x = load(&a.input)?;
    let q = quantize(&x, &cfg)?;
    let y = q.dequantize();
    if let Some(path) = &a.out {
        write_tensor(path, &y, a.dtype.into())?;
    }
    if let Some(path) = &a.packed {
        write_quantized(path, &q)?;
    }
    if a.dump_unique {
        for v in y.unique() {
            writeln!(out, "{v}").map_err(stdout_err)?;
        }
    } else {
        let report = without_groups(error_decomposition(&x, &cfg)?);
        if a.json {
            emit_json(out, &report)?;
        } else {
            writeln!(
                out,
                "{cfg}: mse {} (clamp {}, round {}, clamped {})",
                report.mse, report.clamp_sq_error, report.round_sq_error, report.clamped_count
            )
            .map_err(stdout_err)?;
        }
    }
    Ok(())
}

fn cmd_compare<W: Write>(a: CompareArgs, out: &mut W) -> Result<()> {
    let entries: Vec<&str> = a.format.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    if entries.is_empty() {
        return Err(MxError::Config("--format needs at least one entry".into()));
    }
    let configs = entries
        .iter()
        .map(|e| resolve_config(e, a.scale.as_deref(), &a.group.group_size, a.group.axis))
        .collect::<Result<Vec<_>>>()?;
    let x = load(&a.input)?;
    let mut rows = Vec::new();
    for (entry, cfg) in entries.iter().zip(&configs) {
        rows.push(CompareRow {
            label: entry.to_string(),
            report: without_groups(error_decomposition(&x, cfg)?),
        });
    }
    if a.lloyd {
        let gs: GroupSize = a.group.group_size.parse()?;
        let init = lloyd_init(&a.lloyd_cfg, &a.group.group_size, a.group.axis)?;
        let r = reference_quantize(&x, gs, a.group.axis, &lloyd_config(&a.lloyd_cfg), &init)?;
        rows.push(CompareRow {
            label: "lloyd_max".into(),
            report: without_groups(r.report),
        });
    }
    let gs: GroupSize = a.group.group_size.parse()?;
    let input_stats = group_stats(&x, gs, a.group.axis)
        .ok()
        .and_then(|s| stats_summary(&s).ok());
    if a.json {
        emit_json(
            out,
            &CompareReport {
                element_count: x.len(),
                input_stats,
                rows,
            },
        )
    } else {
        writeln!(out, "{:<24} {:>14} {:>14} {:>14} {:>8}", "format", "mse", "clamp_sq", "round_sq", "clamped")
            .map_err(stdout_err)?;
        for r in &rows {
            writeln!(
                out,
                "{:<24} {:>14.6e} {:>14.6e} {:>14.6e} {:>8}",
                r.label, r.report.mse, r.report.clamp_sq_error, r.report.round_sq_error, r.report.clamped_count
            )
            .map_err(stdout_err)?;
        }
        Ok(())
    }
}

fn cmd_stats<W: Write>(a: StatsArgs, out: &mut W) -> Result<()> {
    let gs: GroupSize = a.group.group_size.parse()?;
    let x = load(&a.input)?;
    let stats = group_stats(&x, gs, a.group.axis)?;
    let summary = stats_summary(&stats)?;
    let report = StatsReport {
        group_size: gs.to_string(),
        axis: a.group.axis,
        groups: stats.len(),
        summary,
    };
    if a.json {
        return emit_json(out, &report);
    }
    let s = &report.summary;
    let line = |name: &str, f: &crate::analysis::FiveNumber| {
        format!(
            "{name:<9} min {} q1 {} median {} q3 {} max {}",
            f.min, f.q1, f.median, f.q3, f.max
        )
    };
    writeln!(
        out,
        "groups {} (undefined kurtosis {})\n{}\n{}",
        report.groups,
        s.undefined_kurtosis,
        line("mean", &s.mean),
        line("kurtosis", &s.kurtosis)
    )
    .map_err(stdout_err)
}

fn cmd_rotate<W: Write>(a: RotateArgs, out: &mut W) -> Result<()> {
    let x = load(&a.input)?;
    let axis = x.normalize_axis(a.dim_axis)?;
    let spec = make_rotation(x.shape()[axis], a.seed)?;
    let y = if a.transpose {
        rotate_transpose(&x, &spec, a.dim_axis)?
    } else {
        rotate(&x, &spec, a.dim_axis)?
    };
    if let Some(path) = &a.out {
        write_tensor(path, &y, a.dtype.into())?;
    }
    let max_abs_diff = match &a.diff_against {
        Some(p) => Some(y.max_abs_diff(&load(p)?)?),
        None => None,
    };
    let report = RotateReport {
        dim: spec.dim,
        seed: a.seed,
        transpose: a.transpose,
        max_abs_diff,
    };
    if a.json {
        emit_json(out, &report)
    } else if let Some(d) = max_abs_diff {
        writeln!(out, "max_abs_diff {d}").map_err(stdout_err)
    } else {
        Ok(())
    }
}

fn cmd_matmul<W: Write>(a: MatmulArgs, out: &mut W) -> Result<()> {
    let cfg_a = resolve_config(&a.format, a.scale.as_deref(), &a.group_size, 1)?;
    let rhs_format = a.rhs_format.as_deref().unwrap_or(&a.format);
    let rhs_scale = a.rhs_scale.as_deref().or(a.scale.as_deref());
    let cfg_b = resolve_config(rhs_format, rhs_scale, &a.group_size, 0)?;
    let (lhs, rhs) = (load(&a.input)?, load(&a.rhs)?);
    if lhs.ndim() != 2 || rhs.ndim() != 2 || lhs.shape()[1] != rhs.shape()[0] {
        return Err(MxError::Shape(format!(
            "cannot multiply {:?} by {:?}",
            lhs.shape(),
            rhs.shape()
        )));
    }
    let qa = quantize(&lhs, &cfg_a)?;
    let qb = quantize(&rhs, &cfg_b)?;
    let spec = match a.accum {
        AccumArg::F64 => AccumSpec::f64(),
        AccumArg::F32 => AccumSpec::f32(),
    };
    let c = matmul_quantized(&qa, &qb, spec)?;
    if let Some(path) = &a.out {
        write_tensor(path, &c, a.dtype.into())?;
    }
    let diff = if a.oracle_check {
        Some(c.max_abs_diff(&oracle_matmul(&qa, &qb)?)?)
    } else {
        None
    };
    if a.json {
        emit_json(
            out,
            &MatmulReport {
                shape: c.shape().to_vec(),
                lhs: cfg_a.to_string(),
                rhs: cfg_b.to_string(),
                max_abs_diff_vs_oracle: diff,
            },
        )
    } else if let Some(d) = diff {
        writeln!(out, "max_abs_diff_vs_oracle {d}").map_err(stdout_err)
    } else {
        Ok(())
    }
}

fn cmd_lloydmax<W: Write>(a: LloydArgs, out: &mut W) -> Result<()> {
    let gs: GroupSize = a.group.group_size.parse()?;
    let cfg = lloyd_config(&a.lloyd);
    let init = lloyd_init(&a.lloyd, &a.group.group_size, a.group.axis)?;
    let x = load(&a.input)?;
    let r = reference_quantize(&x, gs, a.group.axis, &cfg, &init)?;
    if let Some(path) = &a.out {
        write_tensor(path, &r.tensor, a.dtype.into())?;
    }
    let mut cluster_sizes = vec![0; cfg.n_clusters + 1];
    for &c in &r.assignment {
        cluster_sizes[c] += 1;
    }
    let report = LloydReport {
        report: without_groups(r.report),
        clusters: cfg.n_clusters,
        cluster_sizes,
    };
    if a.json {
        emit_json(out, &report)
    } else {
        writeln!(out, "lloyd_max gs={gs} clusters={}: mse {}", cfg.n_clusters, report.report.mse)
            .map_err(stdout_err)
    }
}

fn cmd_fixture<W: Write>(a: FixtureArgs, _out: &mut W) -> Result<()> {
    let positive = |name: &str, v: usize| {
        if v == 0 {
            Err(MxError::Config(format!("--{name} must be positive")))
        } else {
            Ok(v)
        }
    };
    let (rows, cols) = (positive("rows", a.rows)?, positive("cols", a.cols)?);
    let x = match a.kind {
        FixtureKind::Snippet => fixtures::snippet(),
        FixtureKind::Shifted => {
            let gl = positive("group-len", a.group_len)?;
            if cols % gl != 0 {
                return Err(MxError::Config(format!("--cols {cols} is not a multiple of --group-len {gl}")));
            }
            fixtures::shifted_gaussian(rows, cols, gl, a.sigma, a.seed)
        }
        FixtureKind::Spike => fixtures::spike_plus_noise(rows, cols, a.spikes, a.magnitude, a.seed),
        FixtureKind::Random => fixtures::random_tensor(&[rows, cols], a.seed),
    };
    write_tensor(&a.out, &x, a.dtype.into())
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code. Errors go to standard error.
pub fn main_with_args<I, T, W>(args: I, out: &mut W) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
    W: Write,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 3 } else { 0 };
        }
    };
    match run(cli, out) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Names accepted by `--format`.
pub fn format_names() -> Vec<String> {
    let mut names: Vec<String> = PRESETS.iter().map(|p| p.0.to_string()).collect();
    for base in ELEMENT_FORMAT_NAMES {
        names.push(base.to_string());
        names.push(format!("{base}_asym"));
        if base.starts_with("int") {
            names.push(format!("{base}_zp"));
        }
    }
    names
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String) {
        let mut out = Vec::new();
        let code = main_with_args(std::iter::once("mxemu").chain(args.iter().copied()), &mut out);
        (code, String::from_utf8(out).unwrap())
    }

    #[test]
    fn presets_resolve() {
        let c = resolve_config("amxfp4", None, "32", -1).unwrap();
        assert_eq!(c.format_name(), "fp4_e2m1_asym");
        assert_eq!(c.scale_mode.name(), "fp8e5m2");
        let c = resolve_config("amxfp4:pot_round", Some("fp16"), "32", -1).unwrap();
        assert_eq!(c.scale_mode.name(), "pot_round");
        let c = resolve_config("nvfp4", None, "row", -1).unwrap();
        assert_eq!(c.group_size, GroupSize::Fixed(16));
        assert_eq!(resolve_config("int4", Some("fp16"), "row", 0).unwrap().axis, 0);
    }

    #[test]
    fn every_listed_name_resolves() {
        for name in format_names() {
            let scale = if name.ends_with("_zp") { Some("fp32") } else { None };
            assert!(resolve_config(&name, scale, "32", -1).is_ok(), "{name}");
        }
    }

    #[test]
    fn unknown_format_lists_names() {
        let e = resolve_config("fp5", None, "32", -1).unwrap_err();
        assert_eq!(e.exit_code(), 3);
        let msg = e.to_string();
        assert!(msg.contains("fp4_e2m1") && msg.contains("amxfp4"), "{msg}");
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run_args(&["--help"]).0, 0);
        assert_eq!(run_args(&["quantize"]).0, 3);
        assert_eq!(run_args(&["bogus"]).0, 3);
        let (code, _) = run_args(&["quantize", "--in", "/nonexistent/x.mxt"]);
        assert_eq!(code, 2);
        let (code, _) = run_args(&["quantize", "--in", "/nonexistent/x.mxt", "--format", "nope"]);
        assert_eq!(code, 3);
    }
}
