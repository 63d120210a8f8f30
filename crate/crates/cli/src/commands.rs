use std::fmt;
use std::path::PathBuf;

use num_rational::Rational64;
use radex::exact1d::{Piece, PiecewiseFn1D};
use radex::genderiv::{default_direction_grid, derivative_sweep, DerivativeKind, SweepRow};
use radex::optimize::{radial_descent, DescentParams};
use radex::regularity::{classify_regularity, EqualityFlag};
use radex::registry::{expression_oracle, expression_source, BUILTIN_FUNCTIONS};
use radex::weaksub::{
    construct_l1, construct_l2, estimated_radial, exact_radial, verify_membership, wsub_interval_1d, CLadder, MembershipVerdict,
    SampleSpec, WeakSubgradient, WsubInterval,
};
use radex::{get_function, Direction, Error, ExtendedReal, NormKind, Oracle64, Point64, Schedule64};
use serde_json::{json, Map, Value};

use crate::args::{
    Command, Coords, DeriveArgs, ListArgs, MinimizeArgs, NormArg, OutputArgs, RegularityArgs, ScheduleArgs, SweepArgs, Target,
    WeaksubArgs,
};
use crate::output::{csv_num, csv_vec, document, json_ext, json_num, json_vec, Format, Table};

/// Failure before any result could be produced.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, names, expressions, schedules or dimensions: exit 2.
    Usage(String),
    /// The analysis itself failed: exit 1.
    Analysis(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            Self::Usage(_) => 2,
            Self::Analysis(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Usage(m) | Self::Analysis(m) => f.write_str(m),
        }
    }
}

fn is_usage(e: &Error) -> bool {
    matches!(
        e,
        Error::UnknownFunction(_)
            | Error::Parse(_)
            | Error::InvalidSchedule(_)
            | Error::InvalidArgument(_)
            | Error::DimensionMismatch { .. }
            | Error::ZeroComponent { .. }
    )
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        if is_usage(&e) {
            Self::Usage(e.to_string())
        } else {
            Self::Analysis(e.to_string())
        }
    }
}

/// Rendered output plus whether some cell failed.
pub struct Outcome {
    pub text: String,
    pub path: Option<PathBuf>,
    pub fault: bool,
    pub warnings: Vec<String>,
}

pub fn run(command: &Command) -> Result<Outcome, CliError> {
    match command {
        Command::ListFunctions(a) => list_functions(a),
        Command::Derive(a) => derive(a),
        Command::Sweep(a) => sweep(a),
        Command::Weaksub(a) => weaksub(a),
        Command::Regularity(a) => regularity(a),
        Command::Minimize(a) => minimize(a),
    }
}

struct Context {
    oracle: Oracle64,
    label: String,
    xbar: Point64,
    schedule: Schedule64,
    config: Map<String, Value>,
}

fn schedule_from(args: &ScheduleArgs) -> Result<Schedule64, CliError> {
    let mut s = Schedule64::default();
    if let Some(v) = args.t_min {
        s.t_min = v;
    }
    if let Some(v) = args.t_max {
        s.t_max = v;
    }
    if let Some(v) = args.ppd {
        s.points_per_decade = v;
    }
    if let Some(Coords(v)) = &args.ladder {
        s.shrink_ladder = v.clone();
    }
    if let Some(v) = args.m {
        s.perturbations_per_shell = v;
    }
    if let Some(v) = args.samples {
        s.neighborhood_samples = v;
    }
    if let Some(v) = args.window_ratio {
        s.window_ratio = v;
    }
    if let Some(v) = args.refine {
        s.refine_rounds = v;
    }
    if let Some(v) = args.tol {
        s.tol = v;
    }
    if let Some(v) = args.divergence {
        s.divergence_threshold = v;
    }
    s.validate()?;
    Ok(s)
}

fn context(command: &str, target: &Target, schedule: &ScheduleArgs, output: &OutputArgs) -> Result<Context, CliError> {
    let (oracle, label) = match (&target.selector.name, &target.selector.expr) {
        (Some(name), _) => (get_function::<f64>(name)?, name.clone()),
        (None, Some(src)) => {
            if target.dim == 0 {
                return Err(CliError::Usage("--dim must be at least 1".into()));
            }
            (expression_oracle::<f64>("expr", src, target.dim)?, src.clone())
        }
        (None, None) => unreachable!("clap requires a selector"),
    };
    if target.at.0.len() != oracle.dimension() {
        return Err(Error::DimensionMismatch {
            expected: oracle.dimension(),
            found: target.at.0.len(),
        }
        .into());
    }
    let xbar = Point64::new(target.at.0.clone())?;
    let schedule = schedule_from(schedule)?;
    let mut config = Map::new();
    config.insert("command".into(), command.into());
    config.insert("function".into(), target.selector.name.clone().map_or(Value::Null, Value::from));
    config.insert("expression".into(), target.selector.expr.clone().map_or(Value::Null, Value::from));
    config.insert("dimension".into(), oracle.dimension().into());
    config.insert("xbar".into(), json_vec(xbar.coords()));
    config.insert("format".into(), format_name(output.format).into());
    Ok(Context {
        oracle,
        label,
        xbar,
        schedule,
        config,
    })
}

fn format_name(f: Format) -> &'static str {
    match f {
        Format::Csv => "csv",
        Format::Json => "json",
    }
}

fn directions(dirs: &[Coords], n: usize) -> Result<Vec<Direction<f64>>, CliError> {
    dirs.iter()
        .map(|Coords(h)| {
            if h.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: h.len() }.into());
            }
            Ok(Direction::l2(h.clone())?)
        })
        .collect()
}

fn finish(output: &OutputArgs, text: String, fault: bool, warnings: Vec<String>) -> Outcome {
    Outcome {
        text,
        path: output.out.clone(),
        fault,
        warnings,
    }
}

// ---- list-functions ----

fn ratio(q: &Rational64) -> String {
    if *q.denom() == 1 {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

fn poly(p: &Piece<Rational64>) -> String {
    let zero = Rational64::from_integer(0);
    let one = Rational64::from_integer(1);
    let mut terms: Vec<String> = Vec::new();
    for (coef, var) in [(&p.a, "x^2"), (&p.b, "x"), (&p.c, "")] {
        if *coef == zero {
            continue;
        }
        let mag = if *coef < zero { -*coef } else { *coef };
        let body = match (mag == one, var.is_empty()) {
            (true, false) => var.to_string(),
            (_, true) => ratio(&mag),
            _ => format!("{}*{var}", ratio(&mag)),
        };
        let sign = if *coef < zero { "-" } else { "+" };
        if terms.is_empty() {
            terms.push(if sign == "-" { format!("-{body}") } else { body });
        } else {
            terms.push(format!("{sign} {body}"));
        }
    }
    if terms.is_empty() {
        "0".into()
    } else {
        terms.join(" ")
    }
}

fn describe_piecewise(pw: &PiecewiseFn1D<Rational64>) -> String {
    pw.pieces()
        .iter()
        .map(|p| {
            let lo = p.lo.as_ref().map_or("(-inf".to_string(), |e| format!("{}{}", if e.closed { "[" } else { "(" }, ratio(&e.value)));
            let hi = p.hi.as_ref().map_or("inf)".to_string(), |e| format!("{}{}", ratio(&e.value), if e.closed { "]" } else { ")" }));
            format!("{lo}, {hi}: {}", poly(p))
        })
        .collect::<Vec<_>>()
        .join("; ")
}

fn list_functions(args: &ListArgs) -> Result<Outcome, CliError> {
    let mut table = Table::new(&["name", "dimension", "form", "definition"]);
    let mut results = Vec::new();
    for name in BUILTIN_FUNCTIONS {
        let oracle = get_function::<f64>(name)?;
        let (form, definition) = match oracle.exact_form() {
            Some(pw) => ("piecewise", describe_piecewise(pw)),
            None => ("expression", expression_source(name).unwrap_or_default().to_string()),
        };
        table.push(vec![name.into(), oracle.dimension().to_string(), form.into(), definition.clone()]);
        results.push(json!({
            "name": name,
            "dimension": oracle.dimension(),
            "form": form,
            "definition": definition,
        }));
    }
    let text = match args.output.format {
        Format::Csv => table.render(),
        Format::Json => {
            let mut config = Map::new();
            config.insert("command".into(), "list-functions".into());
            config.insert("format".into(), "json".into());
            document(config, results, &Schedule64::default())
        }
    };
    Ok(finish(&args.output, text, false, Vec::new()))
}

// ---- derive / sweep ----

const SWEEP_HEADER: &[&str] = &["function", "xbar", "h", "kind", "value", "status", "evals"];

fn kind_names(kinds: &[DerivativeKind]) -> Value {
    Value::Array(kinds.iter().map(|k| Value::from(k.name())).collect())
}

fn estimate_table(ctx: &Context, rows: &[SweepRow<f64>], format: Format) -> (String, bool, Vec<String>) {
    let mut warnings = Vec::new();
    let mut table = Table::new(SWEEP_HEADER);
    let mut results = Vec::new();
    let xbar = csv_vec(ctx.xbar.coords());
    for row in rows {
        match &row.outcome {
            Ok(e) => {
                table.push(vec![
                    ctx.label.clone(),
                    xbar.clone(),
                    csv_vec(&row.h),
                    row.kind.name().into(),
                    csv_num(e.value.to_f64()),
                    e.status.name().into(),
                    e.evaluations_used.to_string(),
                ]);
                results.push(json!({
                    "h": json_vec(&row.h),
                    "kind": row.kind.name(),
                    "value": json_ext(e.value),
                    "status": e.status.name(),
                    "evals": e.evaluations_used,
                    "argmin_t": e.diagnostics.argmin_t.map_or(Value::Null, json_num),
                }));
            }
            Err(err) => {
                warnings.push(format!("{} in direction {}: {err}", row.kind.name(), csv_vec(&row.h)));
                table.push(vec![
                    ctx.label.clone(),
                    xbar.clone(),
                    csv_vec(&row.h),
                    row.kind.name().into(),
                    String::new(),
                    "error".into(),
                    "0".into(),
                ]);
                results.push(json!({
                    "h": json_vec(&row.h),
                    "kind": row.kind.name(),
                    "value": Value::Null,
                    "status": "error",
                    "evals": 0,
                    "error": err.to_string(),
                }));
            }
        }
    }
    let fault = !warnings.is_empty();
    let text = match format {
        Format::Csv => table.render(),
        Format::Json => document(ctx.config.clone(), results, &ctx.schedule),
    };
    (text, fault, warnings)
}

fn derive(args: &DeriveArgs) -> Result<Outcome, CliError> {
    let mut ctx = context("derive", &args.target, &args.schedule, &args.output)?;
    let dirs = directions(&args.dirs, ctx.oracle.dimension())?;
    ctx.config.insert("kinds".into(), kind_names(&args.kind.0));
    ctx.config.insert("directions".into(), Value::Array(dirs.iter().map(|d| json_vec(d.coords())).collect()));
    ctx.oracle.eval_finite(ctx.xbar.coords())?;
    let table = derivative_sweep(&ctx.oracle, &ctx.xbar, &dirs, &args.kind.0, &ctx.schedule)?;
    let (text, fault, warnings) = estimate_table(&ctx, &table.rows, args.output.format);
    Ok(finish(&args.output, text, fault, warnings))
}

fn sweep(args: &SweepArgs) -> Result<Outcome, CliError> {
    let mut ctx = context("sweep", &args.target, &args.schedule, &args.output)?;
    let n = ctx.oracle.dimension();
    let dirs = if let Some(grid) = &args.grid {
        if n != 1 {
            return Err(CliError::Usage("--grid takes scalar directions; use --dir in higher dimensions".into()));
        }
        ctx.config.insert("grid".into(), json!({"a": json_num(grid.a), "b": json_num(grid.b), "step": json_num(grid.step)}));
        grid.values().into_iter().map(Direction::scalar).collect()
    } else if args.dirs.is_empty() {
        default_direction_grid::<f64>(n, 32 * n)
            .into_iter()
            .map(Direction::l2)
            .collect::<radex::Result<Vec<_>>>()?
    } else {
        directions(&args.dirs, n)?
    };
    ctx.config.insert("kinds".into(), kind_names(&args.kinds.0));
    ctx.oracle.eval_finite(ctx.xbar.coords())?;
    let table = derivative_sweep(&ctx.oracle, &ctx.xbar, &dirs, &args.kinds.0, &ctx.schedule)?;
    let (text, fault, warnings) = estimate_table(&ctx, &table.rows, args.output.format);
    Ok(finish(&args.output, text, fault, warnings))
}

// ---- weaksub ----

const WEAKSUB_HEADER: &[&str] = &[
    "function", "xbar", "mode", "norm", "h", "eps", "v", "c", "holds", "margin", "witness", "resolution",
];

fn weaksub(args: &WeaksubArgs) -> Result<Outcome, CliError> {
    let mut ctx = context("weaksub", &args.target, &args.schedule, &args.output)?;
    let n = ctx.oracle.dimension();
    let norm = match args.norm {
        NormArg::L2 => NormKind::L2,
        NormArg::L1 => NormKind::L1,
    };
    let spec = SampleSpec {
        box_radius: args.box_radius,
        points: args.points,
        ..SampleSpec::default()
    };
    if !(spec.box_radius > 0.0 && spec.box_radius.is_finite()) || spec.points == 0 {
        return Err(CliError::Usage("--box must be positive and --points nonzero".into()));
    }
    ctx.oracle.eval_finite(ctx.xbar.coords())?;

    // Exact radial epiderivative when the function has a piecewise form.
    let exact = ctx.oracle.exact_form().map(|pw| pw.convert::<f64>());
    let fr = |h: &[f64]| -> radex::Result<ExtendedReal<f64>> {
        match &exact {
            Some(pw) => exact_radial(pw, ctx.xbar.coords()[0])(h),
            None => estimated_radial(&ctx.oracle, &ctx.xbar, &ctx.schedule)(h),
        }
    };

    let (mode, h, w) = match (&args.dir, &args.v) {
        (Some(Coords(h)), _) => {
            let dir = directions(&[Coords(h.clone())], n)?.remove(0);
            let ladder = CLadder {
                c_max: args.c_max,
                ..CLadder::default()
            };
            let w = match norm {
                NormKind::L2 => construct_l2(&ctx.xbar, &dir, args.eps, fr, &ladder)?,
                NormKind::L1 => construct_l1(&ctx.xbar, &dir, args.eps, fr, &ladder)?,
            };
            ("construct", Some(h.clone()), w)
        }
        (None, Some(Coords(v))) => {
            if v.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: v.len() }.into());
            }
            let c = args.c.expect("clap pairs --v with --c");
            ("verify", None, WeakSubgradient::new(v.clone(), c, norm)?)
        }
        (None, None) => unreachable!("clap requires --dir or --v"),
    };
    let verdict = verify_membership(&ctx.oracle, &ctx.xbar, &w, &spec)?;

    let interval = if n == 1 && norm == NormKind::L2 {
        let plus = fr(&[1.0])?.finite();
        let minus = fr(&[-1.0])?.finite();
        match (plus, minus) {
            (Some(p), Some(m)) => Some(wsub_interval_1d(p, m, w.c)),
            _ => None,
        }
    } else {
        None
    };

    ctx.config.insert("mode".into(), mode.into());
    ctx.config.insert("norm".into(), norm_name(norm).into());
    ctx.config.insert("eps".into(), json_num(args.eps));
    ctx.config.insert("h".into(), h.as_deref().map_or(Value::Null, json_vec));
    ctx.config.insert("radial".into(), if exact.is_some() { "exact" } else { "estimated" }.into());
    ctx.config.insert("points".into(), args.points.into());
    ctx.config.insert("box".into(), json_num(args.box_radius));

    let text = match args.output.format {
        Format::Csv => {
            let mut table = Table::new(WEAKSUB_HEADER);
            table.push(vec![
                ctx.label.clone(),
                csv_vec(ctx.xbar.coords()),
                mode.into(),
                norm_name(norm).into(),
                h.as_deref().map_or(String::new(), csv_vec),
                if mode == "construct" { csv_num(args.eps) } else { String::new() },
                csv_vec(&w.v),
                csv_num(w.c),
                verdict.holds.to_string(),
                csv_num(verdict.margin),
                verdict.witness.as_deref().map_or(String::new(), csv_vec),
                verdict.resolution.to_string(),
            ]);
            table.render()
        }
        Format::Json => {
            let result = json!({
                "v": json_vec(&w.v),
                "c": json_num(w.c),
                "norm": norm_name(norm),
                "provenance": format!("{:?}", w.provenance),
                "membership": membership_json(&verdict),
                "interval": interval_json(interval),
            });
            document(ctx.config, vec![result], &ctx.schedule)
        }
    };
    Ok(finish(&args.output, text, false, Vec::new()))
}

fn norm_name(n: NormKind) -> &'static str {
    match n {
        NormKind::L2 => "l2",
        NormKind::L1 => "l1",
    }
}

fn membership_json(v: &MembershipVerdict<f64>) -> Value {
    json!({
        "holds": v.holds,
        "margin": json_num(v.margin),
        "witness": v.witness.as_deref().map_or(Value::Null, json_vec),
        "resolution": v.resolution,
    })
}

fn interval_json(i: Option<WsubInterval<f64>>) -> Value {
    match i {
        None => Value::Null,
        Some(WsubInterval::Empty) => json!({"empty": true}),
        Some(WsubInterval::Closed { lo, hi }) => json!({"empty": false, "lo": json_num(lo), "hi": json_num(hi)}),
    }
}

// ---- regularity ----

const REGULARITY_HEADER: &[&str] = &["function", "xbar", "section", "name", "h", "value", "status", "detail"];

fn regularity(args: &RegularityArgs) -> Result<Outcome, CliError> {
    let mut ctx = context("regularity", &args.target, &args.schedule, &args.output)?;
    if !args.dirs.is_empty() {
        ctx.schedule.direction_grid = directions(&args.dirs, ctx.oracle.dimension())?
            .into_iter()
            .map(|d| d.coords().to_vec())
            .collect();
    }
    ctx.oracle.eval_finite(ctx.xbar.coords())?;
    let report = classify_regularity(&ctx.oracle, &ctx.xbar, &ctx.schedule)?;
    let chain = &report.chain;
    let flag_state = |f: EqualityFlag| {
        if chain.has(f) {
            "set"
        } else if chain.refutes(f) {
            "refuted"
        } else {
            "unchecked"
        }
    };

    let text = match args.output.format {
        Format::Csv => {
            let mut table = Table::new(REGULARITY_HEADER);
            let xbar = csv_vec(ctx.xbar.coords());
            let mut row = |section: &str, name: &str, h: String, value: String, status: String, detail: String| {
                table.push(vec![ctx.label.clone(), xbar.clone(), section.into(), name.into(), h, value, status, detail]);
            };
            for rec in &chain.records {
                for (kind, cell) in DerivativeKind::ALL.iter().zip(&rec.cells) {
                    match cell {
                        Ok(e) => row(
                            "chain",
                            kind.name(),
                            csv_vec(&rec.h),
                            csv_num(e.value.to_f64()),
                            e.status.name().into(),
                            e.evaluations_used.to_string(),
                        ),
                        Err(err) => row("chain", kind.name(), csv_vec(&rec.h), String::new(), "error".into(), err.to_string()),
                    }
                }
            }
            for f in EqualityFlag::ALL {
                row("flag", f.name(), String::new(), String::new(), flag_state(f).into(), String::new());
            }
            for (kind, verdict) in &report.conditions {
                match verdict {
                    Ok(v) => row(
                        "condition",
                        kind.name(),
                        String::new(),
                        String::new(),
                        if v.holds { "holds" } else { "fails" }.into(),
                        v.witness.as_deref().map_or(String::new(), csv_vec),
                    ),
                    Err(err) => row("condition", kind.name(), String::new(), String::new(), "error".into(), err.to_string()),
                }
            }
            row("summary", "ordering_ok", String::new(), String::new(), chain.ordering_ok.to_string(), String::new());
            row("summary", "consistent", String::new(), String::new(), report.consistent.to_string(), String::new());
            table.render()
        }
        Format::Json => {
            let records: Vec<Value> = chain
                .records
                .iter()
                .map(|rec| {
                    let cells: Vec<Value> = DerivativeKind::ALL
                        .iter()
                        .zip(&rec.cells)
                        .map(|(kind, cell)| match cell {
                            Ok(e) => json!({"kind": kind.name(), "value": json_ext(e.value), "status": e.status.name(), "evals": e.evaluations_used}),
                            Err(err) => json!({"kind": kind.name(), "value": Value::Null, "status": "error", "evals": 0, "error": err.to_string()}),
                        })
                        .collect();
                    json!({"h": json_vec(&rec.h), "cells": cells})
                })
                .collect();
            let flags: Map<String, Value> = EqualityFlag::ALL.iter().map(|f| (f.name().to_string(), Value::from(flag_state(*f)))).collect();
            let conditions: Vec<Value> = report
                .conditions
                .iter()
                .map(|(kind, verdict)| match verdict {
                    Ok(v) => json!({
                        "kind": kind.name(),
                        "holds": v.holds,
                        "witness": v.witness.as_deref().map_or(Value::Null, json_vec),
                        "resolution": v.resolution,
                    }),
                    Err(err) => json!({"kind": kind.name(), "holds": Value::Null, "witness": Value::Null, "error": err.to_string()}),
                })
                .collect();
            let result = json!({
                "chain": {"tol": json_num(chain.tol), "ordering_ok": chain.ordering_ok, "records": records},
                "flags": flags,
                "conditions": conditions,
                "consistent": report.consistent,
            });
            document(ctx.config, vec![result], &ctx.schedule)
        }
    };
    Ok(finish(&args.output, text, false, Vec::new()))
}

// ---- minimize ----

const MINIMIZE_HEADER: &[&str] = &["function", "step", "x", "f", "h", "t", "fr", "status", "evals"];

fn minimize(args: &MinimizeArgs) -> Result<Outcome, CliError> {
    let mut ctx = context("minimize", &args.target, &args.schedule, &args.output)?;
    if args.points == 0 {
        return Err(CliError::Usage("--points must be nonzero".into()));
    }
    let params = DescentParams {
        descent_tol: args.descent_tol,
        t_max: args.horizon,
        max_iters: args.max_iters,
        certificate: SampleSpec {
            points: args.points,
            ..SampleSpec::default()
        },
        schedule: ctx.schedule.clone(),
        ..DescentParams::default()
    };
    let trace = radial_descent(&ctx.oracle, &ctx.xbar, &params)?;
    ctx.config.insert("horizon".into(), args.horizon.map_or(Value::Null, json_num));
    ctx.config.insert("max_iters".into(), args.max_iters.into());
    ctx.config.insert("descent_tol".into(), json_num(args.descent_tol));
    ctx.config.insert("points".into(), args.points.into());

    let status = trace.status.name();
    let text = match args.output.format {
        Format::Csv => {
            let mut table = Table::new(MINIMIZE_HEADER);
            for (k, it) in trace.iterates.iter().enumerate() {
                table.push(vec![
                    ctx.label.clone(),
                    k.to_string(),
                    csv_vec(&it.x),
                    csv_num(it.f),
                    it.h.as_deref().map_or(String::new(), csv_vec),
                    it.t.map_or(String::new(), csv_num),
                    it.fr.map_or(String::new(), |v| csv_num(v.to_f64())),
                    status.into(),
                    trace.evaluations_used.to_string(),
                ]);
            }
            table.render()
        }
        Format::Json => {
            let iterates: Vec<Value> = trace
                .iterates
                .iter()
                .enumerate()
                .map(|(k, it)| {
                    json!({
                        "step": k,
                        "x": json_vec(&it.x),
                        "f": json_num(it.f),
                        "h": it.h.as_deref().map_or(Value::Null, json_vec),
                        "t": it.t.map_or(Value::Null, json_num),
                        "fr": it.fr.map_or(Value::Null, json_ext),
                    })
                })
                .collect();
            let result = json!({
                "status": status,
                "steps": trace.steps(),
                "evals": trace.evaluations_used,
                "certificate": trace.certificate.as_ref().map_or(Value::Null, membership_json),
                "iterates": iterates,
            });
            document(ctx.config, vec![result], &ctx.schedule)
        }
    };
    Ok(finish(&args.output, text, false, Vec::new()))
}
