//! Parameter sweeps: a TOML [`ScanSpec`], one classified row per grid point,
//! and a summary of revelation intervals along each swept parameter.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use gtnl_core::bellineq::{FacetInequality, SVETLICHNY_ID};
use gtnl_core::optimize::{violation_threshold, OptimizerConfig};
use gtnl_core::revelation::{classify_point, ClassifyOptions, RevelationReport, Verdict};
use gtnl_core::states::StateFamilyParams;
use gtnl_core::tol::VIOLATION_MARGIN;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::facet_file::{builtin_facets, describe_facet_set, load_facets, FacetFileError};

/// Parameter names in grid order; the last one varies fastest.
pub const PARAMETERS: [&str; 5] = ["theta1", "p1", "p2", "theta3", "p3"];

pub const HEADER: [&str; 19] = [
    "theta1",
    "p1",
    "p2",
    "theta3",
    "p3",
    "B1",
    "B2",
    "B3",
    "B4",
    "cgm1",
    "cgm2",
    "cgm3",
    "cgm4",
    "sel_prob",
    "initial_local",
    "filtered_local",
    "final_svet",
    "facets_violated",
    "verdict",
];

const MAX_AXIS_POINTS: usize = 1_000_000;
const CHUNK: usize = 64;

#[derive(Debug, thiserror::Error)]
pub enum ScanError {
    #[error("invalid scan config: {0}")]
    Config(String),
    #[error("grid for {0} is empty")]
    EmptyGrid(&'static str),
    #[error("grid for {name}: {reason}")]
    BadGrid { name: &'static str, reason: String },
    #[error(transparent)]
    Core(#[from] gtnl_core::Error),
    #[error(transparent)]
    Facets(#[from] FacetFileError),
    #[error("at grid point {index} ({params}): {source}")]
    Point {
        index: usize,
        params: String,
        source: gtnl_core::Error,
    },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("writing CSV: {0}")]
    Csv(#[from] csv::Error),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ScanError + '_ {
    move |source| ScanError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Values of one parameter: a single number, an explicit list, or an
/// inclusive `{start, stop, step}` range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    Fixed(f64),
    List(Vec<f64>),
    Range(RangeGrid),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangeGrid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Grid {
    pub fn values(&self, name: &'static str) -> Result<Vec<f64>, ScanError> {
        let bad = |reason: &str| ScanError::BadGrid {
            name,
            reason: reason.to_string(),
        };
        let out = match self {
            Grid::Fixed(v) => vec![*v],
            Grid::List(v) => v.clone(),
            Grid::Range(RangeGrid { start, stop, step }) => {
                if !(start.is_finite() && stop.is_finite() && step.is_finite()) {
                    return Err(bad("range bounds must be finite"));
                }
                if *step <= 0.0 {
                    return Err(bad("step must be positive"));
                }
                if stop < start {
                    return Err(bad("stop lies below start"));
                }
                // tolerate rounding in (stop - start) / step
                let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
                if n > MAX_AXIS_POINTS {
                    return Err(bad("too many points"));
                }
                (0..n).map(|i| (start + i as f64 * step).min(*stop)).collect()
            }
        };
        if out.is_empty() {
            return Err(ScanError::EmptyGrid(name));
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Jsonl,
}

/// Mirror of [`OptimizerConfig`]; omitted fields take its defaults.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerSpec {
    pub starts: usize,
    pub max_iterations: usize,
    pub step_tol: f64,
    pub f_tol: f64,
    pub seed: u64,
}

impl Default for OptimizerSpec {
    fn default() -> Self {
        let c = OptimizerConfig::default();
        Self {
            starts: c.starts,
            max_iterations: c.max_iterations,
            step_tol: c.step_tol,
            f_tol: c.f_tol,
            seed: c.seed,
        }
    }
}

impl From<OptimizerSpec> for OptimizerConfig {
    fn from(s: OptimizerSpec) -> Self {
        Self {
            starts: s.starts,
            max_iterations: s.max_iterations,
            step_tol: s.step_tol,
            f_tol: s.f_tol,
            seed: s.seed,
        }
    }
}

fn default_filter_grid() -> usize {
    11
}

fn default_refine() -> bool {
    true
}

fn default_refine_width() -> f64 {
    1e-4
}

/// A sweep over the five family parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSpec {
    pub theta1: Grid,
    pub p1: Grid,
    pub p2: Grid,
    pub theta3: Grid,
    pub p3: Grid,
    /// JSON facet file; the built-in facets 3 and 185 when absent.
    #[serde(default)]
    pub facet_file: Option<PathBuf>,
    #[serde(default)]
    pub filter_check: bool,
    #[serde(default = "default_filter_grid")]
    pub filter_grid: usize,
    #[serde(default)]
    pub optimizer: OptimizerSpec,
    pub output: PathBuf,
    #[serde(default)]
    pub format: OutputFormat,
    /// Also write a JSON-lines mirror next to a CSV output.
    #[serde(default)]
    pub jsonl: bool,
    /// Bisect interval edges between grid points.
    #[serde(default = "default_refine")]
    pub refine: bool,
    #[serde(default = "default_refine_width")]
    pub refine_width: f64,
}

impl ScanSpec {
    /// Parses TOML; relative paths are taken relative to `base`.
    pub fn from_toml(text: &str, base: Option<&Path>) -> Result<Self, ScanError> {
        let mut spec: ScanSpec = toml::from_str(text).map_err(|e| ScanError::Config(e.to_string()))?;
        if let Some(base) = base {
            spec.output = base.join(&spec.output);
            spec.facet_file = spec.facet_file.map(|p| base.join(p));
        }
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self, ScanError> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        Self::from_toml(&text, path.parent())
    }

    pub fn axes(&self) -> Result<[Vec<f64>; 5], ScanError> {
        let grids = [&self.theta1, &self.p1, &self.p2, &self.theta3, &self.p3];
        let mut axes: [Vec<f64>; 5] = Default::default();
        for (k, g) in grids.iter().enumerate() {
            axes[k] = g.values(PARAMETERS[k])?;
        }
        // range-check every axis value against the first point of the others
        let first = axes.clone().map(|a| a[0]);
        for (k, axis) in axes.iter().enumerate() {
            for &v in axis {
                let mut p = first;
                p[k] = v;
                params_from(p)?;
            }
        }
        Ok(axes)
    }

    pub fn classify_options(&self) -> Result<ClassifyOptions, ScanError> {
        let optimizer: OptimizerConfig = self.optimizer.into();
        optimizer.validate()?;
        if self.filter_grid < 2 {
            return Err(ScanError::Config("filter_grid must be at least 2".into()));
        }
        if self.refine_width.is_nan() || self.refine_width <= 0.0 {
            return Err(ScanError::Config("refine_width must be positive".into()));
        }
        Ok(ClassifyOptions {
            optimizer,
            filter_check: self.filter_check,
            filter_grid: self.filter_grid,
            ..ClassifyOptions::default()
        })
    }

    pub fn facets(&self) -> Result<Vec<FacetInequality>, ScanError> {
        Ok(match &self.facet_file {
            Some(p) => load_facets(p)?,
            None => builtin_facets(),
        })
    }

    /// Path of the JSON-lines output, if any.
    pub fn jsonl_path(&self) -> Option<PathBuf> {
        match self.format {
            OutputFormat::Jsonl => Some(self.output.clone()),
            OutputFormat::Csv => self.jsonl.then(|| self.output.with_extension("jsonl")),
        }
    }

    pub fn summary_path(&self) -> PathBuf {
        self.output.with_extension("summary.json")
    }
}

fn params_from(p: [f64; 5]) -> Result<StateFamilyParams, gtnl_core::Error> {
    StateFamilyParams::new(p[0], p[1], p[2], p[3], p[4])
}

/// `%.9g`: nine significant digits, trailing zeros dropped.
pub fn fmt_sig9(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    fn trim(s: &str) -> &str {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.')
        } else {
            s
        }
    }
    if (-5..9).contains(&exp) {
        trim(&format!("{x:.*}", (8 - exp) as usize)).to_string()
    } else {
        format!("{}e{exp}", trim(mantissa))
    }
}

fn round9(x: f64) -> f64 {
    fmt_sig9(x).parse().expect("formatted float parses")
}

/// One output row. Reals are stored already rounded to nine significant
/// digits so the CSV and JSON-lines forms carry the same numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanRow {
    pub params: [f64; 5],
    pub b: [f64; 4],
    pub cgm: [f64; 4],
    pub sel_prob: f64,
    pub initial_local: bool,
    pub filtered_local: Option<bool>,
    pub final_svet: f64,
    pub facets_violated: Vec<u32>,
    pub verdict: Verdict,
}

impl ScanRow {
    pub fn from_report(r: &RevelationReport) -> Self {
        let p = r.params;
        let f = &r.final_state;
        let mut violated: Vec<u32> = f.violated_ids().collect();
        if f.svetlichny > 4.0 + VIOLATION_MARGIN {
            violated.push(SVETLICHNY_ID);
        }
        violated.sort_unstable();
        Self {
            params: [p.theta1, p.p1, p.p2, p.theta3, p.p3].map(round9),
            b: [r.initial[0].svetlichny, r.initial[1].svetlichny, r.initial[2].svetlichny, f.b4].map(round9),
            cgm: [r.initial[0].cgm, r.initial[1].cgm, r.initial[2].cgm, f.cgm].map(round9),
            sel_prob: round9(f.probability),
            initial_local: r.initial_local(),
            filtered_local: r.filtered_local(),
            final_svet: round9(f.svetlichny),
            facets_violated: violated,
            verdict: r.verdict,
        }
    }

    fn violated_field(&self) -> String {
        self.facets_violated.iter().map(u32::to_string).collect::<Vec<_>>().join(";")
    }

    fn reals(&self) -> impl Iterator<Item = f64> + '_ {
        self.params.iter().chain(&self.b).chain(&self.cgm).copied().chain([self.sel_prob])
    }

    pub fn csv_record(&self) -> Vec<String> {
        let mut rec: Vec<String> = self.reals().map(fmt_sig9).collect();
        rec.push(self.initial_local.to_string());
        rec.push(self.filtered_local.map_or_else(String::new, |b| b.to_string()));
        rec.push(fmt_sig9(self.final_svet));
        rec.push(self.violated_field());
        rec.push(self.verdict.name().to_string());
        rec
    }

    pub fn json(&self) -> Value {
        let num = |x: f64| if x.is_finite() { json!(x) } else { Value::Null };
        let mut map = serde_json::Map::new();
        for (name, x) in HEADER.iter().zip(self.reals()) {
            map.insert((*name).to_string(), num(x));
        }
        map.insert("initial_local".into(), json!(self.initial_local));
        map.insert("filtered_local".into(), json!(self.filtered_local));
        map.insert("final_svet".into(), num(self.final_svet));
        map.insert("facets_violated".into(), json!(self.violated_field()));
        map.insert("verdict".into(), json!(self.verdict.name()));
        Value::Object(map)
    }

    /// Inverse of [`ScanRow::csv_record`].
    pub fn parse_csv(rec: &[&str]) -> Result<Self, String> {
        if rec.len() != HEADER.len() {
            return Err(format!("expected {} fields, got {}", HEADER.len(), rec.len()));
        }
        let real = |i: usize| rec[i].parse::<f64>().map_err(|e| format!("{}: {e}", HEADER[i]));
        let boolean = |i: usize| rec[i].parse::<bool>().map_err(|e| format!("{}: {e}", HEADER[i]));
        let reals: Vec<f64> = (0..14).map(real).collect::<Result<_, _>>()?;
        Ok(Self {
            params: reals[0..5].try_into().expect("five"),
            b: reals[5..9].try_into().expect("four"),
            cgm: reals[9..13].try_into().expect("four"),
            sel_prob: reals[13],
            initial_local: boolean(14)?,
            filtered_local: if rec[15].is_empty() { None } else { Some(boolean(15)?) },
            final_svet: real(16)?,
            facets_violated: if rec[17].is_empty() {
                Vec::new()
            } else {
                rec[17]
                    .split(';')
                    .map(|s| s.parse().map_err(|e| format!("facets_violated: {e}")))
                    .collect::<Result<_, _>>()?
            },
            verdict: rec[18].parse().map_err(|_| format!("verdict: {}", rec[18]))?,
        })
    }
}

/// One run of consecutive revealing grid points along a parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    /// Refined edges (equal to the grid edges at the ends of the grid or
    /// when refinement is off).
    pub lo: f64,
    pub hi: f64,
    pub grid_lo: f64,
    pub grid_hi: f64,
}

/// Revelation intervals along `parameter` with the other four fixed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntervalLine {
    pub parameter: &'static str,
    pub fixed: BTreeMap<&'static str, f64>,
    pub intervals: Vec<Interval>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanSummary {
    pub points: usize,
    pub verdicts: BTreeMap<&'static str, usize>,
    /// Which facets produced the NS₂ verdicts.
    pub facet_set: String,
    /// Fewer than the 184 non-Svetlichny facets were checked.
    pub partial_coverage: bool,
    pub filter_check: bool,
    pub lines: Vec<IntervalLine>,
    pub outputs: Vec<PathBuf>,
}

struct Grid5 {
    axes: [Vec<f64>; 5],
    strides: [usize; 5],
    len: usize,
}

impl Grid5 {
    fn new(axes: [Vec<f64>; 5]) -> Self {
        let mut strides = [1; 5];
        for k in (0..4).rev() {
            strides[k] = strides[k + 1] * axes[k + 1].len();
        }
        let len = strides[0] * axes[0].len();
        Self { axes, strides, len }
    }

    fn coords(&self, index: usize) -> [usize; 5] {
        core::array::from_fn(|k| (index / self.strides[k]) % self.axes[k].len())
    }

    fn point(&self, index: usize) -> [f64; 5] {
        let c = self.coords(index);
        core::array::from_fn(|k| self.axes[k][c[k]])
    }
}

fn describe(p: &[f64; 5]) -> String {
    PARAMETERS
        .iter()
        .zip(p)
        .map(|(n, v)| format!("{n}={v}"))
        .collect::<Vec<_>>()
        .join(", ")
}

fn classify(p: [f64; 5], facets: &[FacetInequality], opts: &ClassifyOptions) -> Result<RevelationReport, gtnl_core::Error> {
    classify_point(&params_from(p)?, facets, opts)
}

enum Sink {
    Csv(Box<csv::Writer<BufWriter<File>>>),
    Jsonl(BufWriter<File>),
}

impl Sink {
    fn create(path: &Path, format: OutputFormat) -> Result<Self, ScanError> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(io_err(dir))?;
        }
        let file = BufWriter::new(File::create(path).map_err(io_err(path))?);
        Ok(match format {
            OutputFormat::Csv => {
                let mut w = csv::Writer::from_writer(file);
                w.write_record(HEADER)?;
                Sink::Csv(Box::new(w))
            }
            OutputFormat::Jsonl => Sink::Jsonl(file),
        })
    }

    fn write(&mut self, row: &ScanRow, path: &Path) -> Result<(), ScanError> {
        match self {
            Sink::Csv(w) => w.write_record(row.csv_record())?,
            Sink::Jsonl(w) => writeln!(w, "{}", row.json()).map_err(io_err(path))?,
        }
        Ok(())
    }

    fn flush(&mut self, path: &Path) -> Result<(), ScanError> {
        match self {
            Sink::Csv(w) => w.flush(),
            Sink::Jsonl(w) => w.flush(),
        }
        .map_err(io_err(path))
    }
}

/// Classifies every grid point and writes one row per point in grid order
/// (`p3` fastest), then a `<output>.summary.json` with revelation intervals.
///
/// Rows are flushed in chunks, so a failure leaves the completed prefix on
/// disk. The spec is validated before any file is created.
pub fn run_scan(spec: &ScanSpec) -> Result<ScanSummary, ScanError> {
    let grid = Grid5::new(spec.axes()?);
    let opts = spec.classify_options()?;
    let facets = spec.facets()?;

    let mut sinks: Vec<(PathBuf, Sink)> = Vec::new();
    if spec.format == OutputFormat::Csv {
        sinks.push((spec.output.clone(), Sink::create(&spec.output, OutputFormat::Csv)?));
    }
    if let Some(p) = spec.jsonl_path() {
        let sink = Sink::create(&p, OutputFormat::Jsonl)?;
        sinks.push((p, sink));
    }

    let mut revealing = Vec::with_capacity(grid.len);
    let mut verdicts: BTreeMap<&'static str, usize> = BTreeMap::new();
    let mut extra_facets = facets.iter().filter(|f| !f.is_svetlichny()).count();
    for start in (0..grid.len).step_by(CHUNK) {
        let end = (start + CHUNK).min(grid.len);
        let rows: Vec<Result<RevelationReport, ScanError>> = (start..end)
            .into_par_iter()
            .map(|i| {
                let p = grid.point(i);
                classify(p, &facets, &opts).map_err(|source| ScanError::Point {
                    index: i,
                    params: describe(&p),
                    source,
                })
            })
            .collect();
        for r in rows {
            let report = match r {
                Ok(r) => r,
                Err(e) => {
                    for (path, sink) in &mut sinks {
                        sink.flush(path)?;
                    }
                    return Err(e);
                }
            };
            extra_facets = report.extra_facets;
            let row = ScanRow::from_report(&report);
            for (path, sink) in &mut sinks {
                sink.write(&row, path)?;
            }
            revealing.push(report.verdict.is_revelation());
            *verdicts.entry(report.verdict.name()).or_default() += 1;
        }
        for (path, sink) in &mut sinks {
            sink.flush(path)?;
        }
    }
    drop(sinks);

    let lines = revelation_lines(&grid, &revealing, spec, &facets, &opts)?;
    let mut outputs = vec![];
    if spec.format == OutputFormat::Csv {
        outputs.push(spec.output.clone());
    }
    outputs.extend(spec.jsonl_path());
    let summary_path = spec.summary_path();
    outputs.push(summary_path.clone());
    let summary = ScanSummary {
        points: grid.len,
        verdicts,
        facet_set: describe_facet_set(spec.facet_file.as_deref(), &facets),
        partial_coverage: extra_facets < 184,
        filter_check: spec.filter_check,
        lines,
        outputs,
    };
    let text = serde_json::to_string_pretty(&summary).expect("summary serializes");
    fs::write(&summary_path, text + "\n").map_err(io_err(&summary_path))?;
    Ok(summary)
}

struct Edge {
    line: usize,
    interval: usize,
    upper: bool,
    base: [f64; 5],
    axis: usize,
    inside: f64,
    outside: f64,
}

fn revelation_lines(
    grid: &Grid5,
    revealing: &[bool],
    spec: &ScanSpec,
    facets: &[FacetInequality],
    opts: &ClassifyOptions,
) -> Result<Vec<IntervalLine>, ScanError> {
    let mut lines = Vec::new();
    let mut edges = Vec::new();
    for axis in 0..5 {
        let n = grid.axes[axis].len();
        if n < 2 {
            continue;
        }
        for origin in (0..grid.len).filter(|&i| grid.coords(i)[axis] == 0) {
            let mut runs: Vec<(usize, usize)> = Vec::new();
            for j in 0..n {
                if revealing[origin + j * grid.strides[axis]] {
                    match runs.last_mut() {
                        Some(r) if r.1 + 1 == j => r.1 = j,
                        _ => runs.push((j, j)),
                    }
                }
            }
            if runs.is_empty() {
                continue;
            }
            let base = grid.point(origin);
            let values = &grid.axes[axis];
            let line = lines.len();
            let mut intervals = Vec::new();
            for (k, &(a, b)) in runs.iter().enumerate() {
                intervals.push(Interval {
                    lo: values[a],
                    hi: values[b],
                    grid_lo: values[a],
                    grid_hi: values[b],
                });
                if spec.refine {
                    let mut edge = |upper: bool, inside: usize, outside: usize| {
                        if (values[inside] - values[outside]).abs() > spec.refine_width {
                            edges.push(Edge {
                                line,
                                interval: k,
                                upper,
                                base,
                                axis,
                                inside: values[inside],
                                outside: values[outside],
                            });
                        }
                    };
                    if a > 0 {
                        edge(false, a, a - 1);
                    }
                    if b + 1 < n {
                        edge(true, b, b + 1);
                    }
                }
            }
            let fixed = (0..5).filter(|&k| k != axis).map(|k| (PARAMETERS[k], base[k])).collect();
            lines.push(IntervalLine {
                parameter: PARAMETERS[axis],
                fixed,
                intervals,
            });
        }
    }

    let refined: Vec<Result<f64, ScanError>> = edges
        .par_iter()
        .map(|e| {
            let at = |t: f64| {
                let mut p = e.base;
                p[e.axis] = t;
                p
            };
            let indicator = |t: f64| classify(at(t), facets, opts).map(|r| if r.verdict.is_revelation() { 5.0 } else { 3.0 });
            let (lo, hi) = if e.inside < e.outside {
                (e.inside, e.outside)
            } else {
                (e.outside, e.inside)
            };
            let th = violation_threshold(indicator, 4.0, lo, hi, spec.refine_width).map_err(|source| ScanError::Point {
                index: 0,
                params: describe(&at(lo)),
                source,
            })?;
            Ok(th.value)
        })
        .collect();
    for (e, v) in edges.iter().zip(refined) {
        let iv = &mut lines[e.line].intervals[e.interval];
        if e.upper {
            iv.hi = v?;
        } else {
            iv.lo = v?;
        }
    }
    Ok(lines)
}
