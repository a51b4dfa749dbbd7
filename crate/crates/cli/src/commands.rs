//! The evaluation, verification, and scan commands.

use mds_core::bounds::{self, DyadicSumKind, GrowthSlice, PhaseLayout};
use mds_core::characters::pair_index;
use mds_core::feq::Generator;
use mds_core::lfunctions::l2_value;
use mds_core::rng::XorShift64;
use mds_core::zcore::{representation_for, z_direct, z_region1, z_swapped};
use mds_core::{
    continue_z, group_orbit, matrix_a, matrix_b, matrix_m, z_vector, BlockInstance, CharIndex,
    Complex64, CriticalEngine, FEMatrix, LMethod, MdsError, Representation, TruncationPlan,
    ZVector,
};
use serde_json::json;

use crate::config::{OutputFormat, RunConfig};
use crate::report::{check_failure, fmt_f64, json_report, CmdResult, Failure, Outcome};

// ---------------------------------------------------------------------------
// Shared parsing and formatting helpers
// ---------------------------------------------------------------------------

/// Parse `re` or `re,im` into a complex number.
pub fn parse_complex(text: &str) -> Result<Complex64, String> {
    let parse = |p: &str| -> Result<f64, String> {
        p.trim().parse().map_err(|_| format!("bad number '{}'", p.trim()))
    };
    match text.split_once(',') {
        None => Ok(Complex64::new(parse(text)?, 0.0)),
        Some((re, im)) => Ok(Complex64::new(parse(re)?, parse(im)?)),
    }
}

/// Parse `psi1,psi_m2`-style pair names.
pub fn parse_pair(text: &str) -> Result<(CharIndex, CharIndex), String> {
    let (a, b) = text
        .split_once(',')
        .ok_or_else(|| format!("expected two comma-separated character names, got '{text}'"))?;
    let psi = CharIndex::parse(a.trim()).map_err(|e| e.to_string())?;
    let psi_pr = CharIndex::parse(b.trim()).map_err(|e| e.to_string())?;
    Ok((psi, psi_pr))
}

pub fn pair_label(psi: CharIndex, psi_pr: CharIndex) -> String {
    format!("{},{}", psi.label(), psi_pr.label())
}

fn rep_label(rep: Representation) -> &'static str {
    match rep {
        Representation::Direct => "direct",
        Representation::Region1 => "region1",
        Representation::Swapped => "swapped",
        Representation::Continued => "continued",
        Representation::Critical => "critical",
    }
}

fn word_labels(word: &[Generator]) -> Vec<serde_json::Value> {
    word.iter()
        .map(|g| match g {
            Generator::Swap => json!("swap"),
            Generator::Reflect => json!("reflect"),
        })
        .collect()
}

fn complex_json(v: Complex64) -> serde_json::Value {
    json!({"re": v.re, "im": v.im})
}

fn engine_for(cfg: &RunConfig) -> Result<CriticalEngine, Failure> {
    CriticalEngine::new(cfg.contour, cfg.plan()).map_err(|e| Failure::Config(e.to_string()))
}

/// Entrywise product of two component matrices.
pub fn mat_product(a: &FEMatrix, b: &FEMatrix) -> [[Complex64; 16]; 16] {
    let mut out = [[Complex64::new(0.0, 0.0); 16]; 16];
    for i in 0..16 {
        for k in 0..16 {
            let aik = a.entries[i][k];
            if aik.norm() == 0.0 {
                continue;
            }
            for j in 0..16 {
                out[i][j] += aik * b.entries[k][j];
            }
        }
    }
    out
}

/// Largest entry deviation from the identity.
pub fn identity_deviation(m: &[[Complex64; 16]; 16]) -> f64 {
    let mut worst = 0.0f64;
    for (i, row) in m.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            let target = if i == j { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
            worst = worst.max((v - target).norm());
        }
    }
    worst
}

fn linspace(from: f64, to: f64, points: usize) -> Vec<f64> {
    let step = (to - from) / (points - 1) as f64;
    (0..points).map(|k| from + step * k as f64).collect()
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

/// Evaluate the vector (or one component) at a general interior point,
/// dispatching to a convergent series or continuing through the group.
pub fn eval(
    cfg: &RunConfig,
    s: Complex64,
    w: Complex64,
    pair: Option<(CharIndex, CharIndex)>,
) -> CmdResult {
    let plan = cfg.plan();
    match vector_or_continue(s, w, &plan) {
        Ok((zv, word)) => Ok(eval_outcome(cfg, &zv, word.as_deref(), pair)),
        // On a polar line a single non-trivial component can still be
        // finite; fall back to the component-level arrangement.
        Err(MdsError::PolarLine { .. }) if pair.is_some() => {
            let (psi, psi_pr) = pair.unwrap();
            let value = component_eval(s, w, psi, psi_pr, &plan).map_err(check_failure)?;
            let body = json!({
                "command": "eval",
                "s": complex_json(s),
                "w": complex_json(w),
                "representation": "component",
                "tail": serde_json::Value::Null,
                "note": "vector blocked on a polar line; finite component evaluated alone",
                "values": [ {
                    "component": pair_index(psi, psi_pr),
                    "pair": pair_label(psi, psi_pr),
                    "re": value.re,
                    "im": value.im,
                } ],
            });
            Ok(Outcome::pass(render_eval(cfg, &body)))
        }
        Err(e) => Err(check_failure(e)),
    }
}

fn vector_or_continue(
    s: Complex64,
    w: Complex64,
    plan: &TruncationPlan,
) -> Result<(ZVector, Option<Vec<Generator>>), MdsError> {
    match z_vector(s, w, plan) {
        Ok(zv) => Ok((zv, None)),
        Err(MdsError::NoRepresentation { .. }) => {
            let cont = continue_z(s, w, plan)?;
            Ok((cont.value, Some(cont.word)))
        }
        Err(e) => Err(e),
    }
}

fn component_eval(
    s: Complex64,
    w: Complex64,
    psi: CharIndex,
    psi_pr: CharIndex,
    plan: &TruncationPlan,
) -> Result<Complex64, MdsError> {
    match representation_for(s, w) {
        Some(Representation::Direct) => z_direct(s, w, psi, psi_pr, plan),
        Some(Representation::Region1) => z_region1(s, w, psi, psi_pr, plan),
        Some(Representation::Swapped) => z_swapped(s, w, psi, psi_pr, plan),
        _ => Err(MdsError::NoRepresentation { s: s.to_string(), w: w.to_string() }),
    }
}

fn eval_outcome(
    cfg: &RunConfig,
    zv: &ZVector,
    word: Option<&[Generator]>,
    pair: Option<(CharIndex, CharIndex)>,
) -> Outcome {
    let selected: Vec<(CharIndex, CharIndex)> = match pair {
        Some(p) => vec![p],
        None => {
            let mut all = Vec::with_capacity(16);
            for psi in mds_core::characters::ALL_CHARS {
                for psi_pr in mds_core::characters::ALL_CHARS {
                    all.push((psi, psi_pr));
                }
            }
            all
        }
    };
    let values: Vec<serde_json::Value> = selected
        .iter()
        .map(|&(psi, psi_pr)| {
            let v = zv.component(psi, psi_pr);
            json!({
                "component": pair_index(psi, psi_pr),
                "pair": pair_label(psi, psi_pr),
                "re": v.re,
                "im": v.im,
            })
        })
        .collect();
    let body = json!({
        "command": "eval",
        "s": complex_json(zv.s),
        "w": complex_json(zv.w),
        "representation": rep_label(zv.rep),
        "word": word.map(word_labels),
        "tail": zv.err,
        "values": values,
    });
    Outcome::pass(render_eval(cfg, &body))
}

fn render_eval(cfg: &RunConfig, body: &serde_json::Value) -> String {
    match cfg.format {
        OutputFormat::Json => json_report(body),
        OutputFormat::Csv => {
            let mut out = String::from("component,psi,psi_pr,re,im,tail\n");
            let tail = body
                .get("tail")
                .and_then(|t| t.as_f64())
                .map(fmt_f64)
                .unwrap_or_default();
            for v in body["values"].as_array().expect("values array") {
                let pair = v["pair"].as_str().expect("pair label");
                let (a, b) = pair.split_once(',').expect("two names");
                out.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    v["component"],
                    a,
                    b,
                    fmt_f64(v["re"].as_f64().expect("re")),
                    fmt_f64(v["im"].as_f64().expect("im")),
                    tail,
                ));
            }
            out
        }
    }
}

// ---------------------------------------------------------------------------
// eval-critical
// ---------------------------------------------------------------------------

pub fn eval_critical(
    cfg: &RunConfig,
    t: f64,
    u: f64,
    pair: Option<(CharIndex, CharIndex)>,
) -> CmdResult {
    let engine = engine_for(cfg)?;
    let zv = engine.eval(t, u).map_err(check_failure)?;
    let near = mds_core::near_switch(t, u);
    let selected: Vec<usize> = match pair {
        Some((psi, psi_pr)) => vec![pair_index(psi, psi_pr)],
        None => (0..16).collect(),
    };
    let values: Vec<serde_json::Value> = selected
        .iter()
        .map(|&idx| {
            let psi = mds_core::characters::ALL_CHARS[idx / 4];
            let psi_pr = mds_core::characters::ALL_CHARS[idx % 4];
            let v = zv.values[idx];
            json!({
                "t": t,
                "u": u,
                "component": idx,
                "pair": pair_label(psi, psi_pr),
                "re": v.re,
                "im": v.im,
                "err": zv.err,
            })
        })
        .collect();
    let body = json!({
        "command": "eval-critical",
        "near_switch": near,
        "values": values,
    });
    let report = match cfg.format {
        OutputFormat::Json => json_report(&body),
        OutputFormat::Csv => {
            let mut out = String::from("t,u,component,re,im,err,near_switch\n");
            for v in body["values"].as_array().expect("values array") {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    fmt_f64(t),
                    fmt_f64(u),
                    v["component"],
                    fmt_f64(v["re"].as_f64().expect("re")),
                    fmt_f64(v["im"].as_f64().expect("im")),
                    fmt_f64(zv.err),
                    near,
                ));
            }
            out
        }
    };
    Ok(Outcome::pass(report))
}

// ---------------------------------------------------------------------------
// fe-check
// ---------------------------------------------------------------------------

struct CheckRow {
    name: &'static str,
    residual: f64,
    budget: f64,
    pass: bool,
}

impl CheckRow {
    fn new(name: &'static str, residual: f64, budget: f64) -> Self {
        CheckRow { name, residual, budget, pass: residual <= budget }
    }
}

/// Verify the functional-equation identities: the constant swap matrix and
/// the reflection matrix against raw convergent sums, the exact matrix
/// algebra, and the composed matrix's zero support.
pub fn fe_check(cfg: &RunConfig) -> CmdResult {
    let plan = cfg.plan();
    let mut rng = XorShift64::new(cfg.seed);
    let mut rows: Vec<CheckRow> = Vec::new();
    let a = matrix_a();

    // Swap identity against raw sums at seeded interior points.
    {
        let mut residual = 0.0f64;
        let mut budget = 0.0f64;
        for _ in 0..3 {
            let s = Complex64::new(rng.next_range(2.2, 2.8), rng.next_range(-2.0, 2.0));
            let w = Complex64::new(rng.next_range(2.2, 2.8), rng.next_range(-2.0, 2.0));
            let lhs = z_vector(s, w, &plan).map_err(check_failure)?;
            let rhs = z_vector(w, s, &plan).map_err(check_failure)?;
            let moved = a.apply(&rhs.values);
            for i in 0..16 {
                residual = residual.max((lhs.values[i] - moved[i]).norm());
            }
            budget = budget.max(lhs.err + a.inf_norm() * rhs.err + 1e-12);
        }
        rows.push(CheckRow::new("swap-identity", residual, budget.min(1e-5)));
    }

    // Reflection identity against raw sums at pinned two-sided points.
    {
        let points = [
            (Complex64::new(0.4, 0.0), Complex64::new(2.0, 0.0)),
            (Complex64::new(0.45, 0.5), Complex64::new(2.2, -0.3)),
            (Complex64::new(0.55, 0.0), Complex64::new(2.4, 0.0)),
        ];
        let mut residual = 0.0f64;
        let mut budget = 0.0f64;
        for (s, w) in points {
            let lhs = mds_core::zcore::z_region1_vector(s, w, &plan).map_err(check_failure)?;
            let b = matrix_b(s).map_err(check_failure)?;
            let rhs = mds_core::zcore::z_region1_vector(1.0 - s, s + w - 0.5, &plan)
                .map_err(check_failure)?;
            let moved = b.apply(&rhs.values);
            for i in 0..16 {
                residual = residual.max((lhs.values[i] - moved[i]).norm());
            }
            budget = budget.max(lhs.err + b.inf_norm() * rhs.err + 1e-12);
        }
        rows.push(CheckRow::new("reflection-identity", residual, budget.min(1e-5)));
    }

    // A^2 = I exactly (dyadic rational entries).
    rows.push(CheckRow::new("swap-involution", identity_deviation(&mat_product(&a, &a)), 0.0));

    // B(s) B(1-s) = I at pole-guarded seeded points.
    {
        let mut worst = 0.0f64;
        for _ in 0..50 {
            let re = rng.next_range(-1.5, 2.5);
            let im = rng.next_sign() * rng.next_range(0.5, 3.0);
            let s = Complex64::new(re, im);
            let b1 = matrix_b(s).map_err(check_failure)?;
            let b2 = matrix_b(1.0 - s).map_err(check_failure)?;
            worst = worst.max(identity_deviation(&mat_product(&b1, &b2)));
        }
        rows.push(CheckRow::new("reflection-inverse", worst, 1e-9));
    }

    // Pinned boundary values of the reflection blocks.
    {
        let b0 = matrix_b(Complex64::new(0.0, 0.0)).map_err(check_failure)?;
        let mut vanish = 0.0f64;
        for i in 0..4 {
            for j in 0..4 {
                vanish = vanish.max(b0.entries[i][j].norm());
            }
        }
        rows.push(CheckRow::new("first-block-vanishes-at-zero", vanish, 1e-12));

        let bh = matrix_b(Complex64::new(0.5, 0.0)).map_err(check_failure)?;
        let mut dev = 0.0f64;
        for block in [2usize, 3] {
            for i in 0..4 {
                for j in 0..4 {
                    let v = bh.entries[4 * block + i][4 * block + j];
                    let target =
                        if i == j { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
                    dev = dev.max((v - target).norm());
                }
            }
        }
        rows.push(CheckRow::new("odd-blocks-fix-the-half-line", dev, 1e-12));
    }

    // Composed-matrix zero support: 124 vanishing entries, identical
    // support across critical-line points.
    {
        let mut support: Option<Vec<(usize, usize)>> = None;
        let mut residual = 0.0f64;
        let mut stable = true;
        for _ in 0..10 {
            let t = rng.next_range(-20.0, 20.0);
            let u = rng.next_range(-20.0, 20.0);
            let m = matrix_m(Complex64::new(0.5, t), Complex64::new(0.5, u))
                .map_err(check_failure)?;
            let mut zeros = Vec::new();
            for i in 0..16 {
                for j in 0..16 {
                    let mag = m.entries[i][j].norm();
                    if mag < 1e-12 {
                        zeros.push((i, j));
                        residual = residual.max(mag);
                    }
                }
            }
            stable &= zeros.len() == 124;
            match &support {
                None => support = Some(zeros),
                Some(first) => stable &= *first == zeros,
            }
        }
        let mut row = CheckRow::new("composed-zero-support", residual, 1e-12);
        row.pass &= stable;
        rows.push(row);
    }

    let pass = rows.iter().all(|r| r.pass);
    let failed = rows.iter().find(|r| !r.pass).map(|r| r.name.to_string());
    let body = json!({
        "command": "fe-check",
        "checks": rows.iter().map(|r| json!({
            "name": r.name,
            "residual": r.residual,
            "budget": r.budget,
            "pass": r.pass,
        })).collect::<Vec<_>>(),
        "pass": pass,
    });
    let report = match cfg.format {
        OutputFormat::Json => json_report(&body),
        OutputFormat::Csv => {
            let mut out = String::from("name,residual,budget,pass\n");
            for r in &rows {
                out.push_str(&format!(
                    "{},{},{},{}\n",
                    r.name,
                    fmt_f64(r.residual),
                    fmt_f64(r.budget),
                    r.pass
                ));
            }
            out
        }
    };
    Ok(Outcome::with_failure(report, failed))
}

// ---------------------------------------------------------------------------
// group-check
// ---------------------------------------------------------------------------

/// Verify the order-12 group of point maps and the exact matrix relations;
/// reports the documented summary line on success.
pub fn group_check(_cfg: &RunConfig) -> CmdResult {
    // Orbit size at a generic point (off all six reflection fixed lines).
    let orbit = group_orbit(Complex64::new(0.32, 1.1), Complex64::new(0.83, -1.9))
        .map_err(check_failure)?;
    if orbit.len() != 12 {
        return Ok(Outcome::with_failure(
            format!("orbit size {} (expected 12)\n", orbit.len()),
            Some("orbit size".into()),
        ));
    }

    // (alpha beta)^6 = identity, exactly on affine coefficients.
    let mut map = mds_core::PointMap::identity();
    for _ in 0..6 {
        map = map.then(Generator::Swap);
        map = map.then(Generator::Reflect);
    }
    let id = mds_core::PointMap::identity();
    if map.linear != id.linear || map.shift_half != id.shift_half {
        return Ok(Outcome::with_failure(
            "rotation of order six is not the identity\n".into(),
            Some("(alpha beta)^6 = id".into()),
        ));
    }

    // A^2 = I exactly.
    let a = matrix_a();
    if identity_deviation(&mat_product(&a, &a)) != 0.0 {
        return Ok(Outcome::with_failure(
            "swap matrix is not an exact involution\n".into(),
            Some("A^2 = I".into()),
        ));
    }

    // B(s) B(1-s) = I at a pinned pole-guarded point.
    let s = Complex64::new(0.37, 1.3);
    let b1 = matrix_b(s).map_err(check_failure)?;
    let b2 = matrix_b(1.0 - s).map_err(check_failure)?;
    if identity_deviation(&mat_product(&b1, &b2)) > 1e-9 {
        return Ok(Outcome::with_failure(
            "reflection matrices do not invert\n".into(),
            Some("B(s)B(1-s) = I".into()),
        ));
    }

    Ok(Outcome::pass("orbit size 12; A^2=I; B(s)B(1-s)=I\n".into()))
}

// ---------------------------------------------------------------------------
// scan-growth
// ---------------------------------------------------------------------------

pub const GROWTH_SLOPE_THRESHOLD: f64 = 0.55;

/// Scan a critical-line slice and fit the growth exponent of the maximal
/// component against the slice variable.
pub fn scan_growth(cfg: &RunConfig, slice: &str, from: f64, to: f64, points: usize) -> CmdResult {
    let slice = GrowthSlice::parse(slice).map_err(|e| Failure::Config(e.to_string()))?;
    if points < 2 || !(from < to) {
        return Err(Failure::Config(format!(
            "need at least two grid points with from < to, got {points} in [{from}, {to}]"
        )));
    }
    let engine = engine_for(cfg)?;
    let grid = linspace(from, to, points);
    let scan = bounds::growth_scan(slice, &grid, &engine).map_err(check_failure)?;

    // One-variable exponent along the slice (the conductor fit is also
    // available in the samples).
    let xs: Vec<f64> = scan
        .samples
        .iter()
        .map(|smp| match slice {
            GrowthSlice::WLine => 1.0 + smp.u.abs(),
            GrowthSlice::Antidiag => 1.0 + smp.t.abs(),
            GrowthSlice::Generic => smp.conductor,
        })
        .collect();
    let ys: Vec<f64> = scan.samples.iter().map(|smp| smp.max_component()).collect();
    let fit = bounds::fit_loglog(&xs, &ys).map_err(check_failure)?;
    let pass = fit.slope <= GROWTH_SLOPE_THRESHOLD;

    let report = match cfg.format {
        OutputFormat::Json => json_report(&json!({
            "command": "scan-growth",
            "slice": slice.label(),
            "points": points,
            "slope": fit.slope,
            "intercept": fit.intercept,
            "r2": fit.r2,
            "threshold": GROWTH_SLOPE_THRESHOLD,
            "pass": pass,
        })),
        OutputFormat::Csv => {
            let mut out = String::from("slice,t,u,component,absZ,conductor\n");
            for smp in &scan.samples {
                for (idx, mag) in smp.abs_z.iter().enumerate() {
                    out.push_str(&format!(
                        "{},{},{},{},{},{}\n",
                        smp.slice.label(),
                        fmt_f64(smp.t),
                        fmt_f64(smp.u),
                        idx,
                        fmt_f64(*mag),
                        fmt_f64(smp.conductor),
                    ));
                }
            }
            out
        }
    };
    let failed = (!pass).then(|| {
        format!("growth slope {} above threshold {GROWTH_SLOPE_THRESHOLD}", fmt_f64(fit.slope))
    });
    Ok(Outcome::with_failure(report, failed))
}

// ---------------------------------------------------------------------------
// mean-square
// ---------------------------------------------------------------------------

pub fn mean_square(cfg: &RunConfig, y1: f64, y2: f64) -> CmdResult {
    let engine = engine_for(cfg)?;
    let rep = bounds::mean_square(y1, y2, cfg.spacing, &engine).map_err(check_failure)?;
    let report = match cfg.format {
        OutputFormat::Json => json_report(&json!({
            "command": "mean-square",
            "y1": rep.y1,
            "y2": rep.y2,
            "spacing": rep.spacing,
            "evaluations": rep.evaluations,
            "uncertainty": rep.uncertainty,
            "integrals": rep.integrals.to_vec(),
            "ratios": rep.ratios.to_vec(),
        })),
        OutputFormat::Csv => {
            let mut out = String::from("component,integral,ratio\n");
            for i in 0..16 {
                out.push_str(&format!(
                    "{},{},{}\n",
                    i,
                    fmt_f64(rep.integrals[i]),
                    fmt_f64(rep.ratios[i])
                ));
            }
            out
        }
    };
    Ok(Outcome::pass(report))
}

// ---------------------------------------------------------------------------
// lemma1
// ---------------------------------------------------------------------------

/// The pinned block-instance battery: `(D, N, Y1, Y2, seed)`.
pub const PINNED_BLOCKS: [(f64, f64, f64, f64, u64); 20] = [
    (1.0, 1.0, 1.0, 1.0, 1),
    (2.0, 2.0, 1.0, 2.0, 2),
    (4.0, 2.0, 2.0, 1.0, 3),
    (2.0, 8.0, 2.0, 4.0, 4),
    (8.0, 8.0, 4.0, 4.0, 5),
    (8.0, 4.0, 1.0, 8.0, 6),
    (16.0, 8.0, 4.0, 2.0, 7),
    (16.0, 16.0, 8.0, 8.0, 8),
    (32.0, 4.0, 2.0, 2.0, 9),
    (4.0, 32.0, 8.0, 4.0, 10),
    (32.0, 32.0, 4.0, 4.0, 11),
    (32.0, 16.0, 8.0, 2.0, 12),
    (3.0, 5.0, 1.5, 2.5, 13),
    (5.0, 3.0, 2.5, 1.5, 14),
    (12.0, 20.0, 6.0, 3.0, 15),
    (20.0, 12.0, 3.0, 6.0, 16),
    (24.0, 24.0, 2.0, 8.0, 17),
    (28.0, 7.0, 7.0, 7.0, 18),
    (7.0, 28.0, 5.0, 5.0, 19),
    (32.0, 32.0, 8.0, 8.0, 20),
];

pub const ENVELOPE_CONSTANT_CAP: f64 = 200.0;
pub const TUPLE_EQUAL_CONSTANT: f64 = 4.0;
pub const TUPLE_DISTINCT_CONSTANT: f64 = 8.0;

struct BlockRow {
    d: f64,
    n: f64,
    y1: f64,
    y2: f64,
    seed: u64,
    split_lhs: f64,
    split_env: f64,
    twisted_lhs: f64,
    twisted_env: f64,
    allowance: f64,
}

fn run_block(d: f64, n: f64, y1: f64, y2: f64, seed: u64) -> Result<BlockRow, Failure> {
    let inst = BlockInstance::random_signs(d, n, y1, y2, seed).map_err(check_failure)?;
    let split_lhs = bounds::block_mean_square(&inst, PhaseLayout::Split).map_err(check_failure)?;
    let twisted_lhs =
        bounds::block_mean_square(&inst, PhaseLayout::Twisted).map_err(check_failure)?;
    Ok(BlockRow {
        d,
        n,
        y1,
        y2,
        seed,
        split_lhs,
        split_env: bounds::block_moment_envelope(&inst, PhaseLayout::Split),
        twisted_lhs,
        twisted_env: bounds::block_moment_envelope(&inst, PhaseLayout::Twisted),
        allowance: inst.scale().powf(0.1),
    })
}

/// Windowed second moments of dyadic coefficient blocks against their
/// envelope shapes, plus the exhaustive near-diagonal tuple counts.
pub fn lemma1(
    cfg: &RunConfig,
    d: Option<f64>,
    n: Option<f64>,
    y1: Option<f64>,
    y2: Option<f64>,
) -> CmdResult {
    let custom = [d, n, y1, y2];
    let rows: Vec<BlockRow> = if custom.iter().all(Option::is_none) {
        PINNED_BLOCKS
            .iter()
            .map(|&(d, n, y1, y2, seed)| run_block(d, n, y1, y2, seed))
            .collect::<Result<_, _>>()?
    } else if custom.iter().all(Option::is_some) {
        vec![run_block(d.unwrap(), n.unwrap(), y1.unwrap(), y2.unwrap(), cfg.seed)?]
    } else {
        return Err(Failure::Config(
            "give all of --d, --n, --y1, --y2 for a custom instance, or none for the \
             pinned battery"
                .into(),
        ));
    };

    let mut c_split = 0.0f64;
    let mut c_twisted = 0.0f64;
    for r in &rows {
        c_split = c_split.max(r.split_lhs / (r.allowance * r.split_env));
        c_twisted = c_twisted.max(r.twisted_lhs / (r.allowance * r.twisted_env));
    }
    let envelopes_pass = c_split <= ENVELOPE_CONSTANT_CAP && c_twisted <= ENVELOPE_CONSTANT_CAP;

    // Exhaustive tuple counts against the two counting shapes.
    let (td, tn, ty1, ty2, eps) = (8.0, 8.0, 4.0, 4.0, bounds::WINDOW_EPS);
    let count = bounds::near_diagonal_count(td, tn, ty1, ty2, eps).map_err(check_failure)?;
    let x = ty1 * ty2 * td * tn;
    let equal_shape = TUPLE_EQUAL_CONSTANT * x.powf(eps) * tn * td * (1.0 + td / ty1.max(ty2));
    let distinct_shape =
        TUPLE_DISTINCT_CONSTANT * x.powf(eps) * tn * (1.0 + td / ty1) * (1.0 + tn * td / ty2);
    let tuples_pass =
        (count.equal_n as f64) <= equal_shape && (count.distinct_n as f64) <= distinct_shape;

    let pass = envelopes_pass && tuples_pass;
    let failed = if !envelopes_pass {
        Some(format!(
            "envelope constant above cap: split {}, twisted {}",
            fmt_f64(c_split),
            fmt_f64(c_twisted)
        ))
    } else if !tuples_pass {
        Some("tuple counts exceed their counting shapes".into())
    } else {
        None
    };

    let report = match cfg.format {
        OutputFormat::Json => json_report(&json!({
            "command": "lemma1",
            "instances": rows.iter().map(|r| json!({
                "d": r.d, "n": r.n, "y1": r.y1, "y2": r.y2, "seed": r.seed,
                "split": {"lhs": r.split_lhs, "envelope": r.split_env,
                          "ratio": r.split_lhs / (r.allowance * r.split_env)},
                "twisted": {"lhs": r.twisted_lhs, "envelope": r.twisted_env,
                            "ratio": r.twisted_lhs / (r.allowance * r.twisted_env)},
            })).collect::<Vec<_>>(),
            "c_split": c_split,
            "c_twisted": c_twisted,
            "threshold": ENVELOPE_CONSTANT_CAP,
            "tuple_counts": {
                "equal_n": count.equal_n,
                "equal_shape": equal_shape,
                "distinct_n": count.distinct_n,
                "distinct_shape": distinct_shape,
                "pass": tuples_pass,
            },
            "pass": pass,
        })),
        OutputFormat::Csv => {
            let mut out = String::from("d,n,y1,y2,seed,layout,lhs,envelope,ratio\n");
            for r in &rows {
                out.push_str(&format!(
                    "{},{},{},{},{},split,{},{},{}\n",
                    fmt_f64(r.d),
                    fmt_f64(r.n),
                    fmt_f64(r.y1),
                    fmt_f64(r.y2),
                    r.seed,
                    fmt_f64(r.split_lhs),
                    fmt_f64(r.split_env),
                    fmt_f64(r.split_lhs / (r.allowance * r.split_env)),
                ));
                out.push_str(&format!(
                    "{},{},{},{},{},twisted,{},{},{}\n",
                    fmt_f64(r.d),
                    fmt_f64(r.n),
                    fmt_f64(r.y1),
                    fmt_f64(r.y2),
                    r.seed,
                    fmt_f64(r.twisted_lhs),
                    fmt_f64(r.twisted_env),
                    fmt_f64(r.twisted_lhs / (r.allowance * r.twisted_env)),
                ));
            }
            out
        }
    };
    Ok(Outcome::with_failure(report, failed))
}

// ---------------------------------------------------------------------------
// sieve-check
// ---------------------------------------------------------------------------

pub const BILINEAR_THRESHOLD: f64 = 10.0;
pub const FIRST_MOMENT_THRESHOLD: f64 = 20.0;

/// Quadratic-character sieve probes: bilinear ratios under the documented
/// coefficient envelope and first moments of the character lines.
pub fn sieve_check(cfg: &RunConfig, m: usize, n: usize, trials: usize) -> CmdResult {
    if trials == 0 || trials > 1000 {
        return Err(Failure::Config(format!("trials {trials} outside 1..=1000")));
    }
    let smooth = |len: usize| -> Vec<Complex64> {
        (0..=len)
            .map(|k| {
                Complex64::new(if k == 0 { 0.0 } else { (k as f64).powf(-0.5) }, 0.0)
            })
            .collect()
    };

    // Principal column: every symbol is 1, the hardest smooth direction.
    let principal =
        bounds::bilinear_ratio(1, n, &[Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)], &smooth(n))
            .map_err(check_failure)?;

    // Seeded random-sign coefficients on the envelope.
    let mut rng = XorShift64::new(cfg.seed);
    let mut random_worst = 0.0f64;
    for _ in 0..trials {
        let mut draw = |len: usize| -> Vec<Complex64> {
            (0..=len)
                .map(|k| {
                    if k == 0 {
                        Complex64::new(0.0, 0.0)
                    } else {
                        Complex64::new(rng.next_sign() * (k as f64).powf(-0.5), 0.0)
                    }
                })
                .collect()
        };
        let a = draw(m);
        let b = draw(n);
        random_worst =
            random_worst.max(bounds::bilinear_ratio(m, n, &a, &b).map_err(check_failure)?);
    }

    // Smooth decaying coefficients, both orientations.
    let smooth_fwd = bounds::bilinear_ratio(m, n, &smooth(m), &smooth(n)).map_err(check_failure)?;
    let smooth_rev = bounds::bilinear_ratio(n, m, &smooth(n), &smooth(m)).map_err(check_failure)?;

    // First moments of the character lines.
    let mut moments: Vec<serde_json::Value> = Vec::new();
    let mut moment_worst = 0.0f64;
    for &(x, t) in &[(256u64, 0.0f64), (512, 10.0)] {
        for psi in mds_core::characters::ALL_CHARS {
            let ratio = bounds::first_moment_ratio(x, t, psi).map_err(check_failure)?;
            moment_worst = moment_worst.max(ratio);
            moments.push(json!({
                "x": x,
                "t": t,
                "psi": psi.label(),
                "ratio": ratio,
            }));
        }
    }

    let bilinear_worst = principal.max(random_worst).max(smooth_fwd).max(smooth_rev);
    let pass = bilinear_worst <= BILINEAR_THRESHOLD && moment_worst <= FIRST_MOMENT_THRESHOLD;
    let failed = if bilinear_worst > BILINEAR_THRESHOLD {
        Some(format!(
            "bilinear ratio {} above threshold {BILINEAR_THRESHOLD}",
            fmt_f64(bilinear_worst)
        ))
    } else if moment_worst > FIRST_MOMENT_THRESHOLD {
        Some(format!(
            "first-moment ratio {} above threshold {FIRST_MOMENT_THRESHOLD}",
            fmt_f64(moment_worst)
        ))
    } else {
        None
    };

    let report = match cfg.format {
        OutputFormat::Json => json_report(&json!({
            "command": "sieve-check",
            "bilinear": {
                "m": m,
                "n": n,
                "trials": trials,
                "principal": principal,
                "random_worst": random_worst,
                "smooth_forward": smooth_fwd,
                "smooth_reverse": smooth_rev,
                "threshold": BILINEAR_THRESHOLD,
            },
            "first_moment": {
                "ratios": moments,
                "threshold": FIRST_MOMENT_THRESHOLD,
            },
            "pass": pass,
        })),
        OutputFormat::Csv => {
            let mut out = String::from("check,value,threshold,pass\n");
            let mut push = |name: &str, v: f64, thr: f64| {
                out.push_str(&format!("{},{},{},{}\n", name, fmt_f64(v), fmt_f64(thr), v <= thr));
            };
            push("bilinear_principal", principal, BILINEAR_THRESHOLD);
            push("bilinear_random_worst", random_worst, BILINEAR_THRESHOLD);
            push("bilinear_smooth_forward", smooth_fwd, BILINEAR_THRESHOLD);
            push("bilinear_smooth_reverse", smooth_rev, BILINEAR_THRESHOLD);
            push("first_moment_worst", moment_worst, FIRST_MOMENT_THRESHOLD);
            out
        }
    };
    Ok(Outcome::with_failure(report, failed))
}

// ---------------------------------------------------------------------------
// Helpers shared with selftest
// ---------------------------------------------------------------------------

/// Dual-method agreement of the primitive L-machinery at one point.
pub fn dual_method_gap(d: u64, psi: CharIndex, t: f64) -> Result<f64, MdsError> {
    let s = Complex64::new(0.5, t);
    let afe = l2_value(s, d, psi, LMethod::Afe)?;
    let oracle = l2_value(s, d, psi, LMethod::HurwitzOracle)?;
    Ok((afe - oracle).norm())
}

/// One dyadic-block-sum value for the selftest battery (all three shapes).
pub fn block_sum_triple(
    t: f64,
    u: f64,
    p: f64,
    y1: f64,
    y2: f64,
) -> Result<[f64; 3], MdsError> {
    let s = Complex64::new(bounds::WINDOW_EPS, 0.0);
    let w = s;
    Ok([
        bounds::dyadic_block_sum(
            DyadicSumKind::Primitive,
            t,
            u,
            p,
            y1,
            y2,
            s,
            w,
            CharIndex::Psi2,
            CharIndex::PsiM1,
        )?,
        bounds::dyadic_block_sum(
            DyadicSumKind::Forward,
            t,
            u,
            p,
            y1,
            y2,
            s,
            w,
            CharIndex::Psi1,
            CharIndex::Psi1,
        )?,
        bounds::dyadic_block_sum(
            DyadicSumKind::Mirror,
            t,
            u,
            p,
            y1,
            y2,
            s,
            w,
            CharIndex::Psi1,
            CharIndex::Psi1,
        )?,
    ])
}
