use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use biosec::attack::{
    confidence_paradox_n, critical_fmr_untargeted, critical_population, geometric_median, success_probability,
    untargeted_bounds, Population, SecurityLevel,
};
use biosec::birthday::{
    birthday_approx, birthday_critical_fmr, birthday_critical_population, birthday_exact, exact_vs_approx_gap,
    reference_interval, CollisionResult, ReferencePool,
};
use biosec::numerics::floor_integer;
use biosec::oracle::{simulate_untargeted, SimConfig};
use biosec::stats::{
    confidence_interval, t_quantile, ConfidenceInterval, FmrEstimate, FmrInput, ScoreVector, Sided,
};
use biosec::{BigReal, Context};
use serde_json::{json, Map, Value};

use crate::args::*;
use crate::grid::{self, GridSpec, Preset, FIG3_COMPARISONS};
use crate::output::{integer, magnitude, real, Record};
use crate::CliError;

type Outcome = Result<Value, CliError>;

fn parse_real(ctx: &Context, flag: &str, text: &str) -> Result<BigReal, CliError> {
    ctx.parse(text)
        .map_err(|_| CliError::validation(format!("--{flag}: {text:?} is not a real number")))
}

fn population(n: u64) -> Result<Population, CliError> {
    Ok(Population::new(n)?)
}

fn security(ctx: &Context, text: &str) -> Result<SecurityLevel, CliError> {
    Ok(SecurityLevel::from_bits(parse_real(ctx, "security-bits", text)?)?)
}

fn inputs(pairs: &[(&str, Value)]) -> Map<String, Value> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

fn check_alpha(alpha: f64) -> Result<(), CliError> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(CliError::validation(format!("--alpha must be in (0, 1), got {alpha}")))
    }
}

fn sig_inputs(sig: &Significance) -> [(&'static str, Value); 2] {
    [("alpha", json!(sig.alpha)), ("sided", json!(Sided::from(sig.sided).as_str()))]
}

fn interval_value(ctx: &Context, ci: &ConfidenceInterval) -> Value {
    json!({
        "point": magnitude(ctx, &ci.point),
        "lower": magnitude(ctx, &ci.lower),
        "upper": magnitude(ctx, &ci.upper),
        "width": magnitude(ctx, &ci.width()),
        "c_alpha": real(&ci.c_alpha),
        "n": ci.n,
        "df": ci.n - 1,
        "alpha": ci.alpha,
        "sided": ci.sided.as_str(),
        "degenerate": ci.degenerate,
    })
}

/// Resolves `--fmr` or `--fmr-hat/--n` and echoes the inputs.
fn fmr_input(ctx: &Context, args: &FmrArgs, echo: &mut Map<String, Value>) -> Result<FmrInput, CliError> {
    match (&args.source.fmr, &args.source.fmr_hat) {
        (Some(f), None) => {
            echo.insert("fmr".into(), json!(f));
            Ok(FmrInput::Point(parse_real(ctx, "fmr", f)?))
        }
        (None, Some(h)) => {
            let n = args.n.ok_or_else(|| CliError::validation("--fmr-hat requires --n"))?;
            check_alpha(args.sig.alpha)?;
            echo.insert("fmr_hat".into(), json!(h));
            echo.insert("n".into(), json!(n));
            for (k, v) in sig_inputs(&args.sig) {
                echo.insert(k.into(), v);
            }
            let est = FmrEstimate::new(parse_real(ctx, "fmr-hat", h)?, n, args.sig.alpha)?;
            Ok(FmrInput::Interval(confidence_interval(ctx, &est, args.sig.sided.into())?))
        }
        _ => Err(CliError::validation("give exactly one of --fmr or --fmr-hat")),
    }
}

fn put_interval(ctx: &Context, rec: &mut Record, fmr: &FmrInput) {
    rec.put("fmr_basis", fmr.basis().as_str());
    if let Some(ci) = fmr.interval() {
        rec.put("interval", interval_value(ctx, ci));
    }
}

pub fn ci(ctx: &Context, a: &CiArgs) -> Outcome {
    check_alpha(a.sig.alpha)?;
    let est = FmrEstimate::new(parse_real(ctx, "fmr-hat", &a.fmr_hat)?, a.n, a.sig.alpha)?;
    let ci = confidence_interval(ctx, &est, a.sig.sided.into())?;
    let mut rec = Record::new("ci", ctx);
    let [alpha, sided] = sig_inputs(&a.sig);
    rec.inputs(inputs(&[("fmr_hat", json!(a.fmr_hat)), ("n", json!(a.n)), alpha, sided]));
    if let Value::Object(fields) = interval_value(ctx, &ci) {
        for (k, v) in fields {
            rec.put(&k, v);
        }
    }
    Ok(rec.into_value())
}

pub fn estimate_fmr(ctx: &Context, a: &EstimateArgs) -> Outcome {
    check_alpha(a.sig.alpha)?;
    let text = std::fs::read_to_string(&a.scores)
        .map_err(|e| CliError::validation(format!("--scores {}: {e}", a.scores.display())))?;
    let scores = ScoreVector::parse_column(&text, a.threshold)?;
    let est = FmrEstimate::from_counts(ctx, scores.false_matches(), scores.scores().len() as u64, a.sig.alpha)?;
    let mut rec = Record::new("estimate-fmr", ctx);
    let [alpha, sided] = sig_inputs(&a.sig);
    rec.inputs(inputs(&[
        ("scores", json!(a.scores.display().to_string())),
        ("threshold", json!(a.threshold)),
        alpha,
        sided,
    ]));
    rec.put("fmr_hat", magnitude(ctx, est.fmr_hat()))
        .put("n", est.n())
        .put("false_matches", scores.false_matches());
    if est.n() >= 2 {
        let ci = confidence_interval(ctx, &est, a.sig.sided.into())?;
        rec.put("interval", interval_value(ctx, &ci));
    } else {
        rec.put("interval", Value::Null);
    }
    Ok(rec.into_value())
}

pub fn t_quantile_cmd(ctx: &Context, a: &TQuantileArgs) -> Outcome {
    let p = parse_real(ctx, "prob", &a.prob)?;
    let q = t_quantile(ctx, a.df, &p)?;
    let mut rec = Record::new("t-quantile", ctx);
    rec.inputs(inputs(&[("df", json!(a.df)), ("prob", json!(a.prob))]));
    rec.put("quantile", real(&q));
    Ok(rec.into_value())
}

pub fn attack(ctx: &Context, cmd: &AttackCommand) -> Outcome {
    match cmd {
        AttackCommand::Bounds { fmr, n_users, model, authentication } => {
            let mut echo = Map::new();
            let input = fmr_input(ctx, fmr, &mut echo)?;
            echo.insert("n_users".into(), json!(n_users));
            echo.insert("model".into(), json!(biosec::attack::DependenceModel::from(*model).as_str()));
            echo.insert("authentication".into(), json!(authentication));
            let pop = population(*n_users)?;
            let b = untargeted_bounds(ctx, &input, pop, (*model).into())?;
            let mut rec = Record::new("attack bounds", ctx);
            rec.inputs(echo);
            put_interval(ctx, &mut rec, &input);
            rec.put("log2_lower", real(&b.log2_lower))
                .put("log2_upper", real(&b.log2_upper))
                .put("lower_rounds", magnitude(ctx, &b.lower_rounds(ctx)))
                .put("upper_rounds", magnitude(ctx, &b.upper_rounds(ctx)))
                .put("fmr_for_lower", magnitude(ctx, &b.fmr_for_lower))
                .put("fmr_for_upper", magnitude(ctx, &b.fmr_for_upper));
            if *authentication {
                let s = b.scaled_for_authentication(ctx, pop);
                rec.put(
                    "authentication",
                    json!({"log2_lower": real(&s.log2_lower), "log2_upper": real(&s.log2_upper)}),
                );
            }
            Ok(rec.into_value())
        }
        AttackCommand::CriticalPopulation { fmr, security_bits } => {
            let mut echo = Map::new();
            let input = fmr_input(ctx, fmr, &mut echo)?;
            echo.insert("security_bits".into(), json!(security_bits));
            let r = critical_population(ctx, &input, &security(ctx, security_bits)?)?;
            let mut rec = Record::new("attack critical-population", ctx);
            rec.inputs(echo);
            put_interval(ctx, &mut rec, &input);
            rec.put("critical_population", integer(&r.count))
                .put("bound", magnitude(ctx, &r.bound))
                .put("log2_bound", real(&r.log2_bound))
                .put("unattainable", r.unattainable);
            Ok(rec.into_value())
        }
        AttackCommand::CriticalFmr { n_users, security_bits } => {
            let f = critical_fmr_untargeted(ctx, population(*n_users)?, &security(ctx, security_bits)?);
            let mut rec = Record::new("attack critical-fmr", ctx);
            rec.inputs(inputs(&[("n_users", json!(n_users)), ("security_bits", json!(security_bits))]));
            rec.put("critical_fmr", magnitude(ctx, &f));
            Ok(rec.into_value())
        }
        AttackCommand::ParadoxN { n_users, security_bits, sig } => {
            check_alpha(sig.alpha)?;
            let r = confidence_paradox_n(
                ctx,
                population(*n_users)?,
                &security(ctx, security_bits)?,
                sig.alpha,
                sig.sided.into(),
            )?;
            let mut rec = Record::new("attack paradox-n", ctx);
            let [alpha, sided] = sig_inputs(sig);
            rec.inputs(inputs(&[("n_users", json!(n_users)), ("security_bits", json!(security_bits)), alpha, sided]));
            rec.put("critical_fmr", magnitude(ctx, &r.critical_fmr))
                .put("gap", magnitude(ctx, &r.gap))
                .put("c", real(&r.c))
                .put("comparisons", magnitude(ctx, &r.comparisons))
                .put("log2_comparisons", real(&r.log2_comparisons));
            Ok(rec.into_value())
        }
        AttackCommand::Median { fmr, n_users } => {
            let f = parse_real(ctx, "fmr", fmr)?;
            let pop = population(*n_users)?;
            let p = success_probability(ctx, &f, pop)?;
            let m = geometric_median(ctx, &p)?;
            let mut rec = Record::new("attack median", ctx);
            rec.inputs(inputs(&[("fmr", json!(fmr)), ("n_users", json!(n_users))]));
            rec.put("success_prob", magnitude(ctx, &p)).put("median_rounds", integer(&m));
            Ok(rec.into_value())
        }
    }
}

fn collision_fields(ctx: &Context, rec: &mut Record, r: &CollisionResult) {
    let opt = |x: &Option<BigReal>| x.as_ref().map_or(Value::Null, |v| magnitude(ctx, v));
    rec.put("method", r.method.as_str())
        .put("probability", magnitude(ctx, &r.probability))
        .put("ln_no_collision", real(&r.ln_no_collision))
        .put("lower", opt(&r.lower))
        .put("upper", opt(&r.upper))
        .put("pairs", integer(&floor_integer(&r.pair_count.n_pairs)));
    if let Some(d) = &r.exact {
        rec.put(
            "exact",
            json!({
                "reference_pairs": integer(&floor_integer(&d.k_pairs)),
                "non_matching_pairs": real(&d.non_matching_pairs),
                "zero_case": d.zero_case,
                "coarse_zero_condition": d.coarse_zero_condition,
                "zero_conditions_disagree": d.zero_conditions_disagree(),
            }),
        );
    }
}

pub fn birthday(ctx: &Context, cmd: &BirthdayCommand) -> Outcome {
    match cmd {
        BirthdayCommand::Approx { fmr, n_users } => {
            let mut echo = Map::new();
            let input = fmr_input(ctx, fmr, &mut echo)?;
            echo.insert("n_users".into(), json!(n_users));
            let r = birthday_approx(ctx, &input, population(*n_users)?)?;
            let mut rec = Record::new("birthday approx", ctx);
            rec.inputs(echo);
            put_interval(ctx, &mut rec, &input);
            collision_fields(ctx, &mut rec, &r);
            Ok(rec.into_value())
        }
        BirthdayCommand::CriticalPopulation { fmr, p_max } => {
            let mut echo = Map::new();
            let input = fmr_input(ctx, fmr, &mut echo)?;
            echo.insert("p_max".into(), json!(p_max));
            let r = birthday_critical_population(ctx, &input, &parse_real(ctx, "p-max", p_max)?)?;
            let mut rec = Record::new("birthday critical-population", ctx);
            rec.inputs(echo);
            put_interval(ctx, &mut rec, &input);
            rec.put("critical_population", integer(&r.count))
                .put("exact_root", magnitude(ctx, &r.exact_root))
                .put("sqrt_approx", magnitude(ctx, &r.sqrt_approx));
            Ok(rec.into_value())
        }
        BirthdayCommand::CriticalFmr { n_users, p_max } => {
            let f = birthday_critical_fmr(ctx, population(*n_users)?, &parse_real(ctx, "p-max", p_max)?)?;
            let mut rec = Record::new("birthday critical-fmr", ctx);
            rec.inputs(inputs(&[("n_users", json!(n_users)), ("p_max", json!(p_max))]));
            rec.put("critical_fmr", magnitude(ctx, &f));
            Ok(rec.into_value())
        }
        BirthdayCommand::Exact { fmr, k_users, n_users, rounding, ci, sig } => {
            let f = parse_real(ctx, "fmr", fmr)?;
            let reference = ReferencePool::new(ctx, *k_users)?;
            let mut echo = inputs(&[
                ("fmr", json!(fmr)),
                ("k_users", json!(k_users)),
                ("n_users", json!(n_users)),
                ("rounding", json!(format!("{rounding:?}").to_lowercase())),
            ]);
            let input = if *ci {
                check_alpha(sig.alpha)?;
                for (k, v) in sig_inputs(sig) {
                    echo.insert(k.into(), v);
                }
                reference_interval(ctx, &f, &reference, sig.alpha, sig.sided.into())?
            } else {
                FmrInput::Point(f)
            };
            let r = birthday_exact(ctx, &input, &reference, population(*n_users)?, (*rounding).into())?;
            let mut rec = Record::new("birthday exact", ctx);
            rec.inputs(echo);
            put_interval(ctx, &mut rec, &input);
            collision_fields(ctx, &mut rec, &r);
            Ok(rec.into_value())
        }
        BirthdayCommand::Gap { fmr, n_users, k_users } => {
            let f = parse_real(ctx, "fmr", fmr)?;
            let pts = exact_vs_approx_gap(ctx, &f, population(*n_users)?, k_users)?;
            let mut rec = Record::new("birthday gap", ctx);
            rec.inputs(inputs(&[("fmr", json!(fmr)), ("n_users", json!(n_users)), ("k_users", json!(k_users))]));
            let rows: Vec<Value> = pts
                .iter()
                .map(|p| {
                    json!({
                        "k_users": p.k_users,
                        "exact": magnitude(ctx, &p.exact),
                        "approx": magnitude(ctx, &p.approx),
                        "gap": magnitude(ctx, &p.gap),
                    })
                })
                .collect();
            rec.put("points", rows);
            Ok(rec.into_value())
        }
    }
}

pub fn grid(ctx: &Context, a: &GridArgs) -> Outcome {
    let steps = a.steps.unwrap_or(grid::DEFAULT_STEPS);
    let jobs: Vec<(GridSpec, PathBuf)> = match a.preset {
        Some(Preset::Fig3) if a.comparisons.is_none() => FIG3_COMPARISONS
            .iter()
            .map(|&n| (GridSpec::preset(Preset::Fig3, steps, Some(n)), suffixed(&a.out, n)))
            .collect(),
        Some(preset) => {
            if a.comparisons.is_some() && preset != Preset::Fig3 {
                return Err(CliError::validation("--comparisons applies to the fig3 preset only"));
            }
            vec![(GridSpec::preset(preset, steps, a.comparisons), a.out.clone())]
        }
        None => vec![(custom_spec(a, steps)?, a.out.clone())],
    };

    let mut files = Vec::new();
    for (spec, path) in jobs {
        let data = grid::evaluate(ctx, &spec)?;
        let file = File::create(&path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let mut w = BufWriter::new(file);
        grid::write_csv(&mut w, &data).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        files.push(json!({"path": path.display().to_string(), "rows": data.rows.len(), "spec": serde_json::to_value(&spec).expect("spec serializes")}));
    }
    let mut rec = Record::new("grid", ctx);
    rec.inputs(inputs(&[
        ("preset", json!(a.preset.map(|p| format!("{p:?}").to_lowercase()))),
        ("out", json!(a.out.display().to_string())),
        ("steps", json!(steps)),
    ]));
    rec.put("files", files);
    Ok(rec.into_value())
}

fn suffixed(out: &Path, comparisons: u64) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let ext = out.extension().map(|e| e.to_string_lossy().into_owned()).unwrap_or_else(|| "csv".into());
    let exp = (comparisons as f64).log10().round() as u32;
    out.with_file_name(format!("{stem}_n1e{exp}.{ext}"))
}

fn custom_spec(a: &GridArgs, steps: usize) -> Result<GridSpec, CliError> {
    let need = |v: Option<f64>, flag: &str| v.ok_or_else(|| CliError::validation(format!("custom grids need --{flag}")));
    let value = a.value.ok_or_else(|| CliError::validation("give --preset or --value with both axes"))?;
    let axis = |param: &Option<String>, min, max, scale, name: &str| -> Result<grid::Axis, CliError> {
        Ok(grid::Axis {
            param: param.clone().ok_or_else(|| CliError::validation(format!("custom grids need --{name}-param")))?,
            min: need(min, &format!("{name}-min"))?,
            max: need(max, &format!("{name}-max"))?,
            scale,
            steps,
        })
    };
    let mut fixed = std::collections::BTreeMap::new();
    for kv in &a.fixed {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| CliError::validation(format!("--fixed expects name=value, got {kv:?}")))?;
        fixed.insert(k.to_string(), v.to_string());
    }
    Ok(GridSpec {
        x_axis: axis(&a.x_param, a.x_min, a.x_max, a.x_scale, "x")?,
        y_axis: axis(&a.y_param, a.y_min, a.y_max, a.y_scale, "y")?,
        fixed,
        output_value: value,
    })
}

pub fn simulate(ctx: &Context, cmd: &SimulateCommand) -> Outcome {
    let SimulateCommand::Attack { fmr, n_users, trials, seed } = cmd;
    let f = parse_real(ctx, "fmr", fmr)?;
    let pop = population(*n_users)?;
    let cfg = SimConfig::new(f.clone(), pop, *trials, *seed)?;
    let report = simulate_untargeted(ctx, &cfg)?;
    let b = untargeted_bounds(ctx, &FmrInput::Point(f), pop, biosec::attack::DependenceModel::Independent)?;
    let lower = b.lower_rounds(ctx);
    let upper = b.upper_rounds(ctx);
    // Outward rounding by one round on each side.
    let lo = floor_integer(&lower) - 1u32;
    let hi = biosec::numerics::ceil_integer(&upper) + 1u32;
    let pass = lo <= report.median_rounds && hi >= report.median_rounds;

    let mut rec = Record::new("simulate attack", ctx);
    rec.inputs(inputs(&[
        ("fmr", json!(fmr)),
        ("n_users", json!(n_users)),
        ("trials", json!(trials)),
        ("seed", json!(seed)),
    ]));
    rec.put("report", serde_json::to_value(&report).expect("report serializes"))
        .put("lower_rounds", magnitude(ctx, &lower))
        .put("upper_rounds", magnitude(ctx, &upper))
        .put("accepted_range", json!([integer(&lo), integer(&hi)]))
        .put("verdict", if pass { "PASS" } else { "FAIL" });
    Ok(rec.into_value())
}
