//! Parameter sweeps over a 2-D grid, written as `x,y,value` CSV.
//!
//! Rows are emitted row-major: `y` is the outer index, `x` the inner one.
//! Axis coordinates are written as the shortest decimal that round-trips the
//! f64 coordinate. On a `log10` axis the parameter is `10^coordinate`, and
//! integer parameters (`n_users`, `comparisons`) are rounded to the nearest
//! integer. Every parameter reaches the library as the shortest decimal of
//! its f64 value, which is also what a single-shot command would be given.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{BufRead, Write};

use biosec::attack::{critical_fmr_untargeted, critical_population, Population, SecurityLevel};
use biosec::birthday::{birthday_approx, birthday_critical_fmr};
use biosec::numerics::sci;
use biosec::stats::{confidence_interval_with_quantile, t_quantile, FmrEstimate, FmrInput, Sided};
use biosec::{BigReal, Context};
use clap::ValueEnum;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const DEFAULT_STEPS: usize = 100;
pub const FIG3_COMPARISONS: [u64; 6] = [1_000, 10_000, 100_000, 1_000_000, 10_000_000, 100_000_000];

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    Fig1,
    Fig2,
    Fig3,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    Linear,
    Log10,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    /// log10 of the untargeted critical FMR (`n_users`, `security_bits`).
    Log10CriticalFmr,
    /// log10 of the birthday critical FMR (`n_users`, `p_max`).
    Log10BirthdayCriticalFmr,
    /// log10 of the continuous critical-population bound (`fmr`,
    /// `security_bits`; optional `comparisons` and `alpha` for a two-sided
    /// interval).
    Log10CriticalPopulation,
    /// Approximate collision probability (`fmr`, `n_users`).
    BirthdayProbability,
}

impl Quantity {
    fn required(self) -> &'static [&'static str] {
        match self {
            Quantity::Log10CriticalFmr => &["n_users", "security_bits"],
            Quantity::Log10BirthdayCriticalFmr => &["n_users", "p_max"],
            Quantity::Log10CriticalPopulation => &["fmr", "security_bits"],
            Quantity::BirthdayProbability => &["fmr", "n_users"],
        }
    }

    fn optional(self) -> &'static [&'static str] {
        match self {
            Quantity::Log10CriticalPopulation => &["comparisons", "alpha"],
            _ => &[],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub param: String,
    pub min: f64,
    pub max: f64,
    pub scale: Scale,
    pub steps: usize,
}

impl Axis {
    pub fn coordinate(&self, i: usize) -> f64 {
        if i + 1 == self.steps {
            return self.max;
        }
        self.min + (self.max - self.min) * i as f64 / (self.steps - 1) as f64
    }

    pub fn coordinates(&self) -> Vec<f64> {
        (0..self.steps).map(|i| self.coordinate(i)).collect()
    }

    /// Decimal text of the parameter at coordinate `v`.
    pub fn parameter(&self, v: f64) -> String {
        parameter_text(&self.param, v, self.scale)
    }
}

/// Parameter value for a coordinate, as passed to the library.
pub fn parameter_text(param: &str, coordinate: f64, scale: Scale) -> String {
    let v = match scale {
        Scale::Linear => coordinate,
        Scale::Log10 => 10f64.powf(coordinate),
    };
    if is_integer_param(param) {
        format!("{}", v.round() as u64)
    } else {
        format!("{v}")
    }
}

fn is_integer_param(param: &str) -> bool {
    matches!(param, "n_users" | "comparisons")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x_axis: Axis,
    pub y_axis: Axis,
    pub fixed: BTreeMap<String, String>,
    pub output_value: Quantity,
}

impl GridSpec {
    pub fn validate(&self) -> Result<(), CliError> {
        for axis in [&self.x_axis, &self.y_axis] {
            if axis.steps < 2 {
                return Err(CliError::validation(format!("axis {} needs at least 2 steps", axis.param)));
            }
            if !(axis.min.is_finite() && axis.max.is_finite() && axis.min < axis.max) {
                return Err(CliError::validation(format!(
                    "axis {} needs a finite range with min < max",
                    axis.param
                )));
            }
        }
        if self.x_axis.param == self.y_axis.param {
            return Err(CliError::validation("x and y axes must name distinct parameters"));
        }
        let q = self.output_value;
        let known = |p: &str| q.required().contains(&p) || q.optional().contains(&p);
        for p in [&self.x_axis.param, &self.y_axis.param].into_iter().chain(self.fixed.keys()) {
            if !known(p) {
                return Err(CliError::validation(format!(
                    "parameter {p} is not used by {}",
                    q.to_possible_value().expect("no skipped variants").get_name()
                )));
            }
        }
        if self.fixed.contains_key(&self.x_axis.param) || self.fixed.contains_key(&self.y_axis.param) {
            return Err(CliError::validation("a parameter cannot be both an axis and fixed"));
        }
        for p in q.required() {
            if *p != self.x_axis.param && *p != self.y_axis.param && !self.fixed.contains_key(*p) {
                return Err(CliError::validation(format!("missing parameter {p}")));
            }
        }
        Ok(())
    }

    pub fn preset(preset: Preset, steps: usize, comparisons: Option<u64>) -> GridSpec {
        let axis = |param: &str, min, max, scale| Axis {
            param: param.into(),
            min,
            max,
            scale,
            steps,
        };
        match preset {
            Preset::Fig1 => GridSpec {
                x_axis: axis("n_users", 0.0, 10.0, Scale::Log10),
                y_axis: axis("security_bits", 0.0, 256.0, Scale::Linear),
                fixed: BTreeMap::new(),
                output_value: Quantity::Log10CriticalFmr,
            },
            Preset::Fig2 => GridSpec {
                x_axis: axis("n_users", 1.0, 10.0, Scale::Log10),
                y_axis: axis("p_max", 0.01, 0.99, Scale::Linear),
                fixed: BTreeMap::new(),
                output_value: Quantity::Log10BirthdayCriticalFmr,
            },
            Preset::Fig3 => {
                let mut fixed = BTreeMap::new();
                fixed.insert("comparisons".into(), comparisons.unwrap_or(FIG3_COMPARISONS[0]).to_string());
                fixed.insert("alpha".into(), "0.05".into());
                GridSpec {
                    x_axis: axis("fmr", -10.0, -1.0, Scale::Log10),
                    y_axis: axis("security_bits", 0.0, 40.0, Scale::Linear),
                    fixed,
                    output_value: Quantity::Log10CriticalPopulation,
                }
            }
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("grid spec serializes")
    }
}

/// An evaluated grid: formatted cells in row-major order.
#[derive(Clone, Debug, PartialEq)]
pub struct GridData {
    pub spec: GridSpec,
    pub precision_bits: u32,
    pub tool_version: String,
    /// `(x, y, value)` as written.
    pub rows: Vec<[String; 3]>,
}

pub fn evaluate(ctx: &Context, spec: &GridSpec) -> Result<GridData, CliError> {
    spec.validate()?;
    let eval = Evaluator::new(ctx, spec)?;
    let xs = spec.x_axis.coordinates();
    let ys = spec.y_axis.coordinates();
    let cells: Vec<(f64, f64)> = ys.iter().flat_map(|&y| xs.iter().map(move |&x| (x, y))).collect();
    let rows = cells
        .par_iter()
        .map(|&(x, y)| {
            let mut params = spec.fixed.clone();
            params.insert(spec.x_axis.param.clone(), spec.x_axis.parameter(x));
            params.insert(spec.y_axis.param.clone(), spec.y_axis.parameter(y));
            let value = eval.value(&params)?;
            Ok([format!("{x}"), format!("{y}"), sci(&value)])
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(GridData {
        spec: spec.clone(),
        precision_bits: ctx.precision(),
        tool_version: env!("CARGO_PKG_VERSION").into(),
        rows,
    })
}

struct Evaluator<'a> {
    ctx: &'a Context,
    quantity: Quantity,
    alpha: f64,
    /// Student-t quantile shared by every cell when `comparisons` is fixed.
    c_alpha: Option<BigReal>,
}

impl<'a> Evaluator<'a> {
    fn new(ctx: &'a Context, spec: &GridSpec) -> Result<Self, CliError> {
        let alpha = fixed_alpha(spec)?;
        let mut c_alpha = None;
        if let Some(n) = spec.fixed.get("comparisons") {
            c_alpha = Some(quantile_for(ctx, comparisons(n)?, alpha)?);
        }
        Ok(Evaluator {
            ctx,
            quantity: spec.output_value,
            alpha,
            c_alpha,
        })
    }

    fn value(&self, params: &BTreeMap<String, String>) -> Result<BigReal, CliError> {
        let ctx = self.ctx;
        let real = |name: &str| -> Result<BigReal, CliError> { Ok(ctx.parse(&params[name])?) };
        let users = |name: &str| -> Result<Population, CliError> {
            let n: u64 = params[name]
                .parse()
                .map_err(|_| CliError::validation(format!("{name} must be a positive integer")))?;
            Ok(Population::new(n)?)
        };
        let v = match self.quantity {
            Quantity::Log10CriticalFmr => {
                let sec = SecurityLevel::from_bits(real("security_bits")?)?;
                ctx.log10(&critical_fmr_untargeted(ctx, users("n_users")?, &sec))
            }
            Quantity::Log10BirthdayCriticalFmr => {
                ctx.log10(&birthday_critical_fmr(ctx, users("n_users")?, &real("p_max")?)?)
            }
            Quantity::Log10CriticalPopulation => {
                let sec = SecurityLevel::from_bits(real("security_bits")?)?;
                let f = real("fmr")?;
                let input = match params.get("comparisons") {
                    Some(n) => {
                        let n = comparisons(n)?;
                        let c = match &self.c_alpha {
                            Some(c) => c.clone(),
                            None => quantile_for(ctx, n, self.alpha)?,
                        };
                        let est = FmrEstimate::new(f, n, self.alpha)?;
                        FmrInput::Interval(confidence_interval_with_quantile(ctx, &est, Sided::TwoSided, c)?)
                    }
                    None => FmrInput::Point(f),
                };
                ctx.log10(&critical_population(ctx, &input, &sec)?.bound)
            }
            Quantity::BirthdayProbability => {
                birthday_approx(ctx, &FmrInput::Point(real("fmr")?), users("n_users")?)?.probability
            }
        };
        Ok(v)
    }
}

fn comparisons(text: &str) -> Result<u64, CliError> {
    match text.parse::<u64>() {
        Ok(n) if n >= 2 => Ok(n),
        _ => Err(CliError::validation("comparisons must be an integer >= 2")),
    }
}

fn quantile_for(ctx: &Context, n: u64, alpha: f64) -> Result<BigReal, CliError> {
    let tail = Sided::TwoSided.tail_prob(ctx, alpha);
    Ok(t_quantile(ctx, n - 1, &tail)?)
}

fn fixed_alpha(spec: &GridSpec) -> Result<f64, CliError> {
    match spec.fixed.get("alpha") {
        None => Ok(0.05),
        Some(a) => a
            .parse::<f64>()
            .ok()
            .filter(|a| *a > 0.0 && *a < 1.0)
            .ok_or_else(|| CliError::validation("alpha must be in (0, 1)")),
    }
}

pub fn write_csv(out: &mut dyn Write, data: &GridData) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(&mut *out);
    w.write_record(["x", "y", "value"])?;
    for row in &data.rows {
        w.write_record(row)?;
    }
    w.flush()?;
    drop(w);
    let mut trailer = String::new();
    let _ = writeln!(trailer, "# precision_bits={}", data.precision_bits);
    let _ = writeln!(trailer, "# tool_version={}", data.tool_version);
    let _ = writeln!(trailer, "# spec={}", data.spec.to_json());
    out.write_all(trailer.as_bytes())
}

/// Reads a file written by [`write_csv`].
pub fn read_csv(input: impl BufRead) -> Result<GridData, CliError> {
    let mut data_text = String::new();
    let mut meta = BTreeMap::new();
    for line in input.lines() {
        let line = line.map_err(CliError::io)?;
        match line.strip_prefix("# ") {
            Some(comment) => {
                let (k, v) = comment
                    .split_once('=')
                    .ok_or_else(|| CliError::validation(format!("malformed comment line: {line}")))?;
                meta.insert(k.to_string(), v.to_string());
            }
            None => {
                data_text.push_str(&line);
                data_text.push('\n');
            }
        }
    }
    let missing = |k: &str| CliError::validation(format!("grid file lacks the {k} comment"));
    let spec: GridSpec = serde_json::from_str(meta.get("spec").ok_or_else(|| missing("spec"))?)
        .map_err(|e| CliError::validation(format!("bad grid spec: {e}")))?;
    let precision_bits = meta
        .get("precision_bits")
        .ok_or_else(|| missing("precision_bits"))?
        .parse()
        .map_err(|_| CliError::validation("bad precision_bits comment"))?;
    let tool_version = meta.get("tool_version").ok_or_else(|| missing("tool_version"))?.clone();

    let mut reader = csv::Reader::from_reader(data_text.as_bytes());
    let header = reader.headers().map_err(|e| CliError::validation(e.to_string()))?;
    if header != vec!["x", "y", "value"] {
        return Err(CliError::validation("grid header must be x,y,value"));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let r = record.map_err(|e| CliError::validation(e.to_string()))?;
        if r.len() != 3 {
            return Err(CliError::validation("grid rows must have three fields"));
        }
        rows.push([r[0].to_string(), r[1].to_string(), r[2].to_string()]);
    }
    Ok(GridData {
        spec,
        precision_bits,
        tool_version,
        rows,
    })
}
