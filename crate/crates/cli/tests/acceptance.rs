//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Criterion 10 checks every listed attack/birthday invariant literally. Two
//! of them do not hold for the formulas they describe; they are reported as
//! failing with a counterexample. The process exits non-zero on any other
//! failure, or if either of those two unexpectedly starts to hold.

use std::collections::BTreeSet;
use std::process::{Command, ExitCode};
use std::time::Instant;

use biosec::attack::{
    critical_fmr_untargeted, critical_population, geometric_median, success_probability, untargeted_bounds,
    DependenceModel, Population, SecurityLevel,
};
use biosec::birthday::{
    birthday_approx, birthday_critical_fmr, birthday_critical_population, birthday_exact, exact_no_collision,
    exact_vs_approx_gap, FalsePairRounding, ReferencePool,
};
use biosec::oracle::{simulate_untargeted, SimConfig, SubsetCensus};
use biosec::stats::table::{T_TABLE, T_TABLE_SIGNIFICANCE};
use biosec::stats::{confidence_interval_with_quantile, t_quantile, FmrEstimate, FmrInput, Sided};
use biosec::{BigReal, Context};
use biosec_cli::grid::{read_csv, GridData};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rug::{Float, Integer, Rational};

const INFINITE_DF: u64 = 1_000_000_000;
const PROPERTY_CASES: usize = 1000;

/// Listed invariants that are false for the formulas they state.
const KNOWN_FALSE: [&str; 2] = ["independent lower bound <= dependent lower bound", "unshifted hypergeometric identity"];

struct Verdict {
    pass: bool,
    detail: String,
    /// Sub-checks that failed, by name.
    failed: BTreeSet<String>,
}

impl Verdict {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Verdict {
            pass,
            detail: detail.into(),
            failed: BTreeSet::new(),
        }
    }
}

fn ctx() -> Context {
    Context::default()
}

fn log10_f(c: &Context, x: &BigReal) -> f64 {
    c.log10(x).to_f64()
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn table_reproduction() -> Verdict {
    let c = ctx();
    let mut worst = 0.0f64;
    let mut bad = Vec::new();
    let mut count = 0;
    for (df, row) in T_TABLE.iter() {
        let df_eval = df.unwrap_or(INFINITE_DF);
        for (col, expected) in T_TABLE_SIGNIFICANCE.iter().zip(row) {
            let p = Float::with_val(c.precision(), 1 - c.real(*col));
            let q = t_quantile(&c, df_eval, &p).unwrap().to_f64();
            let err = (q - expected).abs();
            worst = worst.max(err);
            count += 1;
            if err > 0.001 + 1e-12 {
                bad.push(format!("df={df:?} col={col}: {q:.4} vs {expected}"));
            }
        }
    }
    let spot = |df: u64, col: f64| {
        let p = Float::with_val(c.precision(), 1 - c.real(col));
        t_quantile(&c, df, &p).unwrap().to_f64()
    };
    let spots = [(spot(10, 0.05), 1.812), (spot(2, 0.025), 4.303), (spot(INFINITE_DF, 0.05), 1.645)];
    let spots_ok = spots.iter().all(|(q, e)| (q - e).abs() <= 0.001);
    Verdict::new(
        bad.is_empty() && count == 192 && spots_ok,
        format!(
            "{}/{count} entries within 0.001 (max |err| {worst:.2e}); df=10/0.05 -> {:.4}, df=2/0.025 -> {:.4}, df=inf/0.05 -> {:.4}{}",
            count - bad.len(),
            spots[0].0,
            spots[1].0,
            spots[2].0,
            if bad.is_empty() { String::new() } else { format!("; off: {}", bad.join(", ")) }
        ),
    )
}

fn critical_fmr_untargeted_check() -> Verdict {
    let c = ctx();
    let sec = |b: u32| SecurityLevel::from_bits(c.int(b as u64)).unwrap();
    let a = critical_fmr_untargeted(&c, Population::new(10).unwrap(), &sec(112));
    let b = critical_fmr_untargeted(&c, Population::new(1_000_000_000).unwrap(), &sec(128));
    let (la, lb) = (log10_f(&c, &a), log10_f(&c, &b));
    let a_ok = rel(a.to_f64(), 1.33e-35) < 0.01 && (la + 35.0).abs() <= 1.0;
    let b_ok = rel(b.to_f64(), 2.04e-48) < 0.01;
    // The formula value sits about three orders below the quoted 1e-45.
    let gap = -45.0 - lb;
    let discrepancy_asserted = gap > 2.5;
    Verdict::new(
        a_ok && b_ok && discrepancy_asserted,
        format!(
            "N=10,S=2^112 -> {:.4e} (log10 {la:.3}, within one order of 1e-35); N=1e9,S=2^128 -> {:.4e}, {gap:.2} orders below the quoted 1e-45 (discrepancy reported, formula value kept)",
            a.to_f64(),
            b.to_f64()
        ),
    )
}

fn birthday_critical_fmr_check() -> Verdict {
    let c = ctx();
    let half = c.real(0.5);
    let a = birthday_critical_fmr(&c, Population::new(1_000_000_000).unwrap(), &half).unwrap();
    let b = birthday_critical_fmr(&c, Population::new(10_000_000_000).unwrap(), &half).unwrap();
    let (la, lb) = (log10_f(&c, &a), log10_f(&c, &b));
    let ok = rel(a.to_f64(), 1.386e-18) < 1e-3
        && (la + 18.0).abs() <= 1.0
        && rel(b.to_f64(), 1.39e-20) < 5e-3
        && (lb + 20.0).abs() <= 1.0;
    Verdict::new(
        ok,
        format!(
            "N=1e9,p=0.5 -> {:.4e} (expected order 1e-18); N=1e10,p=0.5 -> {:.4e} (expected order 1e-20)",
            a.to_f64(),
            b.to_f64()
        ),
    )
}

fn birthday_critical_population_check() -> Verdict {
    let c = ctx();
    let f = FmrInput::Point(c.parse("1e-6").unwrap());
    let p = c.real(0.5);
    let r = birthday_critical_population(&c, &f, &p).unwrap();
    let count = r.count.to_u64().unwrap();
    let mut scan = 1u64;
    while birthday_approx(&c, &f, Population::new(scan + 1).unwrap()).unwrap().probability <= p {
        scan += 1;
    }
    let ok = count.abs_diff(1177) <= 1 && scan == count;
    Verdict::new(
        ok,
        format!(
            "quadratic root {:.3} -> {count}, integer scan -> {scan}; the quoted \"up to 100 users\" is not reproduced by the same formula (off by {:.1}x)",
            r.exact_root.to_f64(),
            count as f64 / 100.0
        ),
    )
}

fn exact_oracle_equivalence() -> Verdict {
    let c = ctx();
    let census = SubsetCensus::build(30).unwrap();
    let mut cases = 0u64;
    let mut worst = 0.0f64;
    let mut bad = Vec::new();
    for k in 1..=30u32 {
        for false_pairs in 0..=k {
            let f = Float::with_val(c.precision(), c.int(false_pairs as u64) / c.int(k as u64));
            for draw in 0..=k {
                cases += 1;
                let counted = census.collision_probability(k, false_pairs, draw).unwrap();
                let p = exact_no_collision(&c, &f, &c.int(k as u64), &c.int(draw as u64), FalsePairRounding::Nearest)
                    .unwrap()
                    .collision_probability(&c);
                let expected = Float::with_val(c.precision(), &counted);
                let diff = Float::with_val(c.precision(), &p - &expected).abs();
                let r = if expected.is_zero() {
                    if diff.is_zero() { 0.0 } else { f64::INFINITY }
                } else {
                    Float::with_val(64, &diff / &expected).to_f64()
                };
                worst = worst.max(r);
                if r > 1e-12 {
                    bad.push(format!("K={k} F={false_pairs} N={draw}"));
                }
            }
        }
    }
    Verdict::new(
        bad.is_empty(),
        format!(
            "{cases} (K,F,N) cases vs census of all 2^30 draws; max relative error {worst:.2e}{}",
            if bad.is_empty() { String::new() } else { format!("; off: {}", bad.join(", ")) }
        ),
    )
}

fn convergence() -> Verdict {
    let c = ctx();
    let sweep = [1_000, 10_000, 100_000, 1_000_000];
    let pts = exact_vs_approx_gap(&c, &c.parse("1e-3").unwrap(), Population::new(10).unwrap(), &sweep).unwrap();
    let gaps: Vec<f64> = pts.iter().map(|p| p.gap.to_f64()).collect();
    let decreasing = pts.windows(2).all(|w| w[1].gap < w[0].gap);
    let last = gaps[3];
    Verdict::new(
        decreasing && last < 1e-6,
        format!("gaps {:.3e} > {:.3e} > {:.3e} > {:.3e}", gaps[0], gaps[1], gaps[2], gaps[3]),
    )
}

fn simulation_containment() -> Verdict {
    let c = ctx();
    let f = c.parse("1e-3").unwrap();
    let pop = Population::new(10).unwrap();
    let cfg = SimConfig::new(f.clone(), pop, 100_000, 42).unwrap();
    let r = simulate_untargeted(&c, &cfg).unwrap();
    let b = untargeted_bounds(&c, &FmrInput::Point(f), pop, DependenceModel::Independent).unwrap();
    let lo = b.lower_rounds(&c).floor().to_f64();
    let hi = b.upper_rounds(&c).ceil().to_f64();
    let m = r.median_rounds as f64;
    let p = r.success_prob;
    let sigma = (p * (1.0 - p) / r.trials as f64).sqrt();
    let z = (r.empirical_success_prob - p) / sigma;
    let ok = r.median_rounds.abs_diff(70) <= 1 && lo <= m && m <= hi && z.abs() <= 4.0;
    Verdict::new(
        ok,
        format!(
            "median {} in [{lo}, {hi}] (bounds [{:.3}, {:.3}] rounded outward); success rate {:.5} vs {p:.5} ({z:+.2} sigma)",
            r.median_rounds,
            b.lower_rounds(&c).to_f64(),
            b.upper_rounds(&c).to_f64(),
            r.empirical_success_prob
        ),
    )
}

fn numerical_stability() -> Verdict {
    let c = ctx();
    let mut worst = 0.0f64;
    let mut cases = 0;
    let mut naive_min_err = f64::INFINITY;
    let mut naive_cases = 0;
    for i in 0..=54 {
        let f = 10f64.powf(-30.0 + i as f64 * 27.0 / 54.0);
        for j in 0..=32 {
            let n = (2.0 * 10f64.powf(j as f64 * (9.0 - 2f64.log10()) / 32.0)).round() as u64;
            let big = birthday_approx(&c, &FmrInput::Point(c.real(f)), Population::new(n).unwrap())
                .unwrap()
                .probability
                .to_f64();
            let pairs = n as f64 * (n - 1) as f64 / 2.0;
            let stable = -(pairs * (-f).ln_1p()).exp_m1();
            worst = worst.max(rel(stable, big));
            cases += 1;
        }
    }
    for k in 16..=30 {
        let f = 10f64.powi(-k);
        for n in [2u64, 1_000, 100_000] {
            let big = birthday_approx(&c, &FmrInput::Point(c.real(f)), Population::new(n).unwrap())
                .unwrap()
                .probability
                .to_f64();
            let pairs = n as f64 * (n - 1) as f64 / 2.0;
            let naive = 1.0 - (1.0 - f).powf(pairs);
            naive_min_err = naive_min_err.min(rel(naive, big));
            naive_cases += 1;
        }
    }
    let ok = worst <= 1e-12 && naive_min_err > 1e-3;
    Verdict::new(
        ok,
        format!(
            "{cases} (f,N) cases: max relative gap to the f64 log1p/expm1 path {worst:.2e}; naive (1-f)^pairs off by at least {:.1}% on all {naive_cases} cases with f = 1e-16..1e-30, N in {{2, 1e3, 1e5}}",
            naive_min_err * 100.0
        ),
    )
}

fn run_single(args: &[String]) -> serde_json::Value {
    let out = Command::new(env!("CARGO_BIN_EXE_biosec"))
        .env_remove("BIOSEC_PRECISION_BITS")
        .args(args)
        .output()
        .expect("spawn biosec");
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json output")
}

fn emit_preset(dir: &std::path::Path, preset: &str) -> GridData {
    let path = dir.join(format!("{preset}.csv"));
    let out = Command::new(env!("CARGO_BIN_EXE_biosec"))
        .env_remove("BIOSEC_PRECISION_BITS")
        .args(["grid", "--preset", preset, "--steps", "100", "--out"])
        .arg(&path)
        .output()
        .expect("spawn biosec");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    read_csv(std::io::BufReader::new(std::fs::File::open(&path).unwrap())).unwrap()
}

/// `value[y][x]` as f64.
fn matrix(data: &GridData) -> Vec<Vec<f64>> {
    let nx = data.spec.x_axis.steps;
    data.rows
        .chunks(nx)
        .map(|row| row.iter().map(|r| r[2].parse::<f64>().unwrap()).collect())
        .collect()
}

fn grid_presets() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let mut notes = Vec::new();
    let mut ok = true;

    for (preset, x_dir, y_dir) in [("fig1", -1.0, -1.0), ("fig2", -1.0, 1.0)] {
        let data = emit_preset(dir.path(), preset);
        let m = matrix(&data);
        let mut violations = 0;
        for row in &m {
            violations += row.windows(2).filter(|w| (w[1] - w[0]) * x_dir < 0.0).count();
        }
        for col in 0..m[0].len() {
            violations += (1..m.len()).filter(|&r| (m[r][col] - m[r - 1][col]) * y_dir < 0.0).count();
        }

        let mut mismatches = 0;
        for _ in 0..10 {
            let row = &data.rows[rng.random_range(0..data.rows.len())];
            let x: f64 = row[0].parse().unwrap();
            let n_users = (10f64.powf(x).round() as u64).to_string();
            let args: Vec<String> = match preset {
                "fig1" => vec!["attack", "critical-fmr", "--n-users", &n_users, "--security-bits", &row[1]],
                _ => vec!["birthday", "critical-fmr", "--n-users", &n_users, "--p-max", &row[1]],
            }
            .into_iter()
            .map(String::from)
            .collect();
            let single = run_single(&args);
            if single["critical_fmr"]["log10"].to_string() != row[2] {
                mismatches += 1;
            }
        }
        ok &= violations == 0 && mismatches == 0 && data.rows.len() == 10_000;
        notes.push(format!(
            "{preset}: {} cells, {violations} monotonicity violations, {}/10 spot cells equal to single-shot output",
            data.rows.len(),
            10 - mismatches
        ));
    }
    Verdict::new(ok, notes.join("; "))
}

struct Tally {
    name: &'static str,
    cases: usize,
    violations: usize,
    example: Option<String>,
}

impl Tally {
    fn new(name: &'static str) -> Self {
        Tally {
            name,
            cases: 0,
            violations: 0,
            example: None,
        }
    }

    fn check(&mut self, holds: bool, example: impl FnOnce() -> String) {
        self.cases += 1;
        if !holds {
            self.violations += 1;
            if self.example.is_none() {
                self.example = Some(example());
            }
        }
    }
}

fn log_uniform(rng: &mut StdRng, lo: f64, hi: f64) -> f64 {
    10f64.powf(rng.random_range(lo..hi))
}

fn property_suites() -> Verdict {
    let c = ctx();
    let prec = c.precision();
    let mut rng = StdRng::seed_from_u64(20_240_601);
    let bits = |b: f64| SecurityLevel::from_bits(c.real(b)).unwrap();
    let point = |f: f64| FmrInput::Point(c.real(f));
    let mut tallies = Vec::new();

    let mut t = Tally::new("bound ordering");
    for _ in 0..PROPERTY_CASES {
        let n = rng.random_range(1..1_000_000_000u64);
        let f = log_uniform(&mut rng, -15.0, -0.31);
        let pop = Population::new(n).unwrap();
        let ind = untargeted_bounds(&c, &point(f), pop, DependenceModel::Independent).unwrap();
        t.check(ind.log2_lower <= ind.log2_upper, || format!("f={f:e} N={n} independent"));
        let f_dep = f.min(0.499 / n as f64);
        let dep = untargeted_bounds(&c, &point(f_dep), pop, DependenceModel::Dependent).unwrap();
        t.check(dep.log2_lower <= dep.log2_upper, || format!("f={f_dep:e} N={n} dependent"));
    }
    tallies.push(t);

    let mut t = Tally::new(KNOWN_FALSE[0]);
    for _ in 0..PROPERTY_CASES {
        let n = rng.random_range(1..1_000_000_000u64);
        let f = log_uniform(&mut rng, -12.0, 0.0) * 0.499 / n as f64;
        let pop = Population::new(n).unwrap();
        let ind = untargeted_bounds(&c, &point(f), pop, DependenceModel::Independent).unwrap();
        let dep = untargeted_bounds(&c, &point(f), pop, DependenceModel::Dependent).unwrap();
        t.check(ind.log2_lower <= dep.log2_lower, || {
            format!(
                "N={n}, f={f:.3e}: independent {:.6} > dependent {:.6} bits",
                ind.log2_lower.to_f64(),
                dep.log2_lower.to_f64()
            )
        });
    }
    tallies.push(t);

    let mut t = Tally::new("critical population nonincreasing in S and f");
    for _ in 0..PROPERTY_CASES {
        let f = log_uniform(&mut rng, -12.0, -0.31);
        let f2 = f * log_uniform(&mut rng, 0.0, 2.0);
        let s = rng.random_range(0.0..60.0);
        let s2 = s + rng.random_range(0.0..20.0);
        let base = critical_population(&c, &point(f), &bits(s)).unwrap();
        let more_s = critical_population(&c, &point(f), &bits(s2)).unwrap();
        let t_cmp = f2.min(0.49);
        let more_f = critical_population(&c, &point(t_cmp.max(f)), &bits(s)).unwrap();
        t.check(more_s.count <= base.count && more_f.count <= base.count, || format!("f={f:e} S={s}"));
    }
    tallies.push(t);

    let mut t = Tally::new("critical FMR strictly decreasing in N*S");
    for _ in 0..PROPERTY_CASES {
        let (n1, n2) = (rng.random_range(1..1_000_000_000u64), rng.random_range(1..1_000_000_000u64));
        let (s1, s2) = (rng.random_range(0.0..200.0), rng.random_range(0.0..200.0));
        let w1 = (n1 as f64).log2() + s1;
        let w2 = (n2 as f64).log2() + s2;
        if (w1 - w2).abs() < 1e-9 {
            continue;
        }
        let a = critical_fmr_untargeted(&c, Population::new(n1).unwrap(), &bits(s1));
        let b = critical_fmr_untargeted(&c, Population::new(n2).unwrap(), &bits(s2));
        t.check((w1 < w2) == (a > b), || format!("N={n1},S={s1} vs N={n2},S={s2}"));
    }
    tallies.push(t);

    let mut t = Tally::new("factor of 2 exchangeable between N and S");
    for _ in 0..PROPERTY_CASES {
        let n = rng.random_range(1..1_000_000_000u64);
        let s = rng.random_range(0..250u32) as f64;
        let a = critical_fmr_untargeted(&c, Population::new(2 * n).unwrap(), &bits(s));
        let b = critical_fmr_untargeted(&c, Population::new(n).unwrap(), &bits(s + 1.0));
        let r = Float::with_val(prec, Float::with_val(prec, &a - &b) / &b).abs();
        t.check(r < 1e-70, || format!("N={n} S={s}"));
    }
    tallies.push(t);

    let mut t = Tally::new("critical population/FMR round trip");
    let mut fixed: Vec<(f64, f64)> = Vec::new();
    for f in [1e-3, 1e-6, 1e-9] {
        for s in [10.0, 20.0] {
            fixed.push((f, s));
        }
    }
    let mut attainable = 0;
    while attainable < PROPERTY_CASES {
        fixed.push((log_uniform(&mut rng, -12.0, -1.0), rng.random_range(0.0..30.0)));
        let (f, s) = *fixed.last().unwrap();
        if !critical_population(&c, &point(f), &bits(s)).unwrap().unattainable {
            attainable += 1;
        }
    }
    for (f, s) in fixed {
        let f_big = c.real(f);
        let crit = critical_population(&c, &FmrInput::Point(f_big.clone()), &bits(s)).unwrap();
        if crit.unattainable {
            continue;
        }
        let n = crit.count.to_u64().unwrap();
        let back = critical_fmr_untargeted(&c, Population::new(n).unwrap(), &bits(s));
        let ratio = Float::with_val(prec, &back / &f_big).to_f64();
        t.check(back >= f_big && ratio <= 1.0 + 10.0 / n as f64, || format!("f={f:e} S={s} N={n}"));
    }
    tallies.push(t);

    let mut t = Tally::new("analytic median inside independent bounds");
    for f in ["1e-2", "1e-3"] {
        for n in [1u64, 10, 100] {
            let fb = c.parse(f).unwrap();
            let pop = Population::new(n).unwrap();
            let p = success_probability(&c, &fb, pop).unwrap();
            let m = Float::with_val(prec, geometric_median(&c, &p).unwrap());
            let b = untargeted_bounds(&c, &FmrInput::Point(fb), pop, DependenceModel::Independent).unwrap();
            let upper = Float::with_val(prec, b.upper_rounds(&c) + 1u32);
            t.check(m >= b.lower_rounds(&c) && m <= upper, || format!("f={f} N={n}"));
        }
    }
    tallies.push(t);

    let mut t = Tally::new(KNOWN_FALSE[1]);
    let binom = |n: u64, k: u64| -> Integer {
        if k > n { Integer::new() } else { Integer::from(Integer::binomial_u(n as u32, k as u32)) }
    };
    for k in 2..=50u64 {
        for m in 1..=k {
            for n in 1..k {
                let literal = Rational::from((m, k)) * Rational::from((binom(m - 1, n), binom(k - 1, n)));
                let target = Rational::from((binom(m, n), binom(k, n)));
                t.check(literal == target, || format!("K={k}, m={m}, N={n}: {literal} vs {target}"));
            }
        }
    }
    tallies.push(t);

    let mut t = Tally::new("approximate probability nondecreasing in N and f");
    for _ in 0..PROPERTY_CASES {
        let f = log_uniform(&mut rng, -30.0, -0.5);
        let n = rng.random_range(1..1_000_000_000u64);
        let n2 = n + rng.random_range(0..1_000_000u64);
        let f2 = (f * log_uniform(&mut rng, 0.0, 3.0)).min(0.9);
        let p = birthday_approx(&c, &point(f), Population::new(n).unwrap()).unwrap().probability;
        let pn = birthday_approx(&c, &point(f), Population::new(n2).unwrap()).unwrap().probability;
        let pf = birthday_approx(&c, &point(f2.max(f)), Population::new(n).unwrap()).unwrap().probability;
        t.check(p <= pn && p <= pf, || format!("f={f:e} N={n}"));
    }
    tallies.push(t);

    let mut t = Tally::new("exact probability nondecreasing in pairs");
    for _ in 0..PROPERTY_CASES {
        let f = c.real(rng.random_range(0.0..1.0));
        let k = rng.random_range(2..5_000_000u64);
        let kp = (k * (k - 1) / 2) as f64;
        let (a, b) = (rng.random_range(0.0..1.0f64), rng.random_range(0.0..1.0f64));
        let n1 = (kp * a.min(b)).floor();
        let n2 = (kp * a.max(b)).floor();
        let kp = c.real(kp);
        let p1 = exact_no_collision(&c, &f, &kp, &c.real(n1), FalsePairRounding::Continuous).unwrap();
        let p2 = exact_no_collision(&c, &f, &kp, &c.real(n2), FalsePairRounding::Continuous).unwrap();
        t.check(p1.collision_probability(&c) <= p2.collision_probability(&c), || {
            format!("f={} K={k} pairs {n1} vs {n2}", f.to_f64())
        });
    }
    tallies.push(t);

    let mut t = Tally::new("interval bounds bracket the point value");
    for _ in 0..PROPERTY_CASES {
        let f = log_uniform(&mut rng, -9.0, -1.0);
        let n = log_uniform(&mut rng, 3.0, 12.0) as u64;
        let users = rng.random_range(2..10_000u64);
        let est = FmrEstimate::new(c.real(f), n, 0.05).unwrap();
        let ci = FmrInput::Interval(confidence_interval_with_quantile(&c, &est, Sided::TwoSided, c.real(1.96)).unwrap());
        let a = birthday_approx(&c, &ci, Population::new(users).unwrap()).unwrap();
        let reference = ReferencePool::new(&c, users + 1000).unwrap();
        let e = birthday_exact(&c, &ci, &reference, Population::new(users).unwrap(), FalsePairRounding::Continuous)
            .unwrap();
        let brackets = |r: &biosec::birthday::CollisionResult| {
            r.lower.as_ref().unwrap() <= &r.probability && r.probability <= *r.upper.as_ref().unwrap()
        };
        t.check(brackets(&a) && brackets(&e), || format!("f={f:e} n={n} N={users}"));
    }
    tallies.push(t);

    let mut t = Tally::new("exact/approximate gap strictly decreasing");
    let pts = exact_vs_approx_gap(&c, &c.parse("1e-3").unwrap(), Population::new(10).unwrap(), &[1_000, 10_000, 100_000, 1_000_000])
        .unwrap();
    for w in pts.windows(2) {
        t.check(w[1].gap < w[0].gap, || format!("K={} -> {}", w[0].k_users, w[1].k_users));
    }
    tallies.push(t);

    let mut failed = BTreeSet::new();
    let mut lines = Vec::new();
    for t in &tallies {
        if t.violations > 0 {
            failed.insert(t.name.to_string());
        }
        let status = if t.violations == 0 { "ok" } else { "VIOLATED" };
        let example = t.example.as_ref().map(|e| format!(", e.g. {e}")).unwrap_or_default();
        lines.push(format!("    {status:>8}  {} ({}/{} cases hold{example})", t.name, t.cases - t.violations, t.cases));
    }
    let mut v = Verdict::new(failed.is_empty(), format!("{} listed invariants\n{}", tallies.len(), lines.join("\n")));
    v.failed = failed;
    v
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Verdict, f64); 10] = [
        ("Table 1 reproduction", table_reproduction, 10.0),
        ("critical FMR (untargeted)", critical_fmr_untargeted_check, f64::INFINITY),
        ("birthday critical FMR", birthday_critical_fmr_check, f64::INFINITY),
        ("birthday critical population", birthday_critical_population_check, f64::INFINITY),
        ("exact birthday vs enumeration", exact_oracle_equivalence, 30.0),
        ("exact to approximate convergence", convergence, f64::INFINITY),
        ("simulation containment", simulation_containment, 5.0),
        ("numerical stability", numerical_stability, f64::INFINITY),
        ("grid presets", grid_presets, 60.0),
        ("attack/birthday property suites", property_suites, f64::INFINITY),
    ];

    let known_false: BTreeSet<String> = KNOWN_FALSE.iter().map(|s| s.to_string()).collect();
    let mut unexplained = 0;
    for (i, (name, check, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let mut v = check();
        let secs = start.elapsed().as_secs_f64();
        if secs > *budget {
            v.pass = false;
            v.detail.push_str(&format!("; exceeded the {budget:.0} s budget"));
        }
        let status = if v.pass { "PASS" } else { "FAIL" };
        println!("criterion {:>2} {status} {name} [{secs:.2} s]: {}", i + 1, v.detail);
        let explained = i + 1 == 10 && v.failed == known_false && secs <= *budget;
        if i + 1 == 10 && v.failed != known_false {
            unexplained += 1;
            if v.failed.is_empty() {
                println!("    invariants previously shown false now hold; re-check the formulas");
            }
        } else if !v.pass && !explained {
            unexplained += 1;
        }
        if explained {
            println!(
                "    the two violated invariants are false for the formulas they state: N(f+f^2) <= Nf+N^2 f^2 for every N >= 1, \
                 and m C(m-1,N) = C(m,N)(m-N); the implemented formulas are verified by the other checks"
            );
        }
    }
    if unexplained == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{unexplained} criterion/criteria failed unexpectedly");
        ExitCode::FAILURE
    }
}
