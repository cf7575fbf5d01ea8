use std::sync::Arc;

use serde_json::{json, Map, Value};

use limitop::fredholm::{parametrix, probe, ProbeConfig, Verdict};
use limitop::limit::{
    default_radius, ghost_profile, limit_operator, sample_spectrum, shift_limit, Direction, LimitWindow, SpectrumSample,
    DEFAULT_TAIL,
};
use limitop::lower_norm::{interior_columns, localization_check, nu, nu_s};
use limitop::operator::{decompose, norm2, schur_bound, write_operator, BandOperator};
use limitop::partition::{average, make_partition};
use limitop::space::{Dist, PointId, Space, SpaceFile};
use limitop::sparsify::{sparsify, BlockSparsifier, Sparsifier};
use limitop::{Error, Result};

use crate::config::Params;
use crate::inputs::{load_operator, load_space};
use crate::report::{cell, Csv};

/// What a command produced.
pub struct Outcome {
    /// Report body, or `None` for commands that emit an artifact instead.
    pub result: Option<Value>,
    pub artifact: Option<String>,
    pub csv: Option<String>,
    /// Analysis-level negative result (exit code 2).
    pub negative: bool,
    /// One-line human summary.
    pub summary: Option<String>,
}

impl Outcome {
    fn report(result: Value) -> Self {
        Self { result: Some(result), artifact: None, csv: None, negative: false, summary: None }
    }
}

/// Parameters with defaults filled in as they are consumed, so the echoed
/// record shows every effective value.
pub struct Ctx {
    pub params: Params,
}

fn missing(what: &str) -> Error {
    Error::Parse(format!("missing --{what}"))
}

impl Ctx {
    fn space(&self) -> Result<Arc<Space>> {
        let spec = self.params.space.as_deref().ok_or_else(|| missing("space"))?;
        Ok(Arc::new(load_space(spec)?))
    }

    fn op(&mut self, space: &Arc<Space>) -> Result<BandOperator> {
        let spec = self.params.op.clone().ok_or_else(|| missing("op"))?;
        let seed = *self.params.seed.get_or_insert(0);
        load_operator(&spec, space.clone(), seed)
    }

    fn p(&mut self) -> f64 {
        *self.params.p.get_or_insert(2.0)
    }

    fn tol(&mut self) -> f64 {
        *self.params.tol.get_or_insert(1e-9)
    }

    fn tail(&mut self) -> usize {
        *self.params.tail.get_or_insert(DEFAULT_TAIL)
    }

    fn scale(&mut self) -> u32 {
        *self.params.scale.get_or_insert(10)
    }

    fn radius(&mut self, a: &BandOperator) -> Dist {
        *self.params.radius.get_or_insert(default_radius(a.propagation()))
    }

    fn dirs(&self) -> Result<Vec<Direction>> {
        let d = self.params.dir.as_ref().filter(|d| !d.is_empty()).ok_or_else(|| missing("dir"))?;
        d.iter().map(|s| Direction::parse(s)).collect()
    }

    fn cols(&mut self, a: &BandOperator) -> Result<Vec<PointId>> {
        let spec = self.params.cols.get_or_insert_with(|| "all".into()).clone();
        let space = a.space();
        match spec.as_str() {
            "all" => Ok((0..a.len()).collect()),
            "interior" => Ok(interior_columns(a)),
            other => {
                let r = other
                    .strip_prefix("ball:")
                    .and_then(|r| r.parse::<Dist>().ok())
                    .ok_or_else(|| Error::Parse(format!("bad column set `{other}`")))?;
                space.ball(space.center(), r)
            }
        }
    }
}

fn window_json(w: &LimitWindow, p: f64) -> Result<Value> {
    let t = &w.template;
    let n = t.len();
    let distances: Vec<Vec<Dist>> = (0..n).map(|a| (0..n).map(|b| t.dist(a, b)).collect()).collect();
    let entries: Vec<Value> = w
        .operator
        .entries()
        .map(|(a, b, v)| {
            let mut row = vec![json!(a), json!(b)];
            for z in v {
                row.push(json!(z.re));
                row.push(json!(z.im));
            }
            Value::Array(row)
        })
        .collect();
    let mut m = Map::new();
    m.insert("label".into(), json!(w.label));
    m.insert("method".into(), serde_json::to_value(w.method)?);
    m.insert("radius".into(), json!(w.radius));
    m.insert("base".into(), json!(t.base()));
    if let Some(off) = t.offsets() {
        m.insert("offsets".into(), json!(off));
    }
    m.insert("distances".into(), json!(distances));
    m.insert("block_dim".into(), json!(w.operator.block_dim()));
    m.insert("entries".into(), Value::Array(entries));
    m.insert("cauchy_tail".into(), json!(w.cauchy_tail));
    m.insert("tol".into(), json!(w.tol));
    m.insert("stabilized_from".into(), json!(w.stabilized_from));
    m.insert("tail_basepoints".into(), json!(w.tail));
    m.insert("norm".into(), json!(w.norm));
    m.insert("source_norm_bound".into(), json!(w.source_bound));
    m.insert("contraction_ok".into(), json!(w.contraction_ok()));
    m.insert("propagation".into(), json!(w.propagation()));
    m.insert("source_propagation".into(), json!(w.source_propagation));
    m.insert("window_nu".into(), json!(w.window_nu(p)?));
    if let Some(s) = w.stencil_nu(p) {
        m.insert("stencil_nu".into(), json!(s));
    }
    Ok(Value::Object(m))
}

fn failure_json(label: &str, e: &Error) -> Option<Value> {
    match e {
        Error::CauchyFailure { deviation, tol, profile } => {
            Some(json!({"label": label, "status": "not-cauchy", "deviation": deviation, "tol": tol, "profile": profile}))
        }
        Error::NotStabilized { classes, window } => {
            Some(json!({"label": label, "status": "not-stabilized", "classes": classes, "window": window}))
        }
        _ => None,
    }
}

pub fn space_gen(ctx: &mut Ctx) -> Result<Outcome> {
    let space = ctx.space()?;
    let file = SpaceFile::from_space(&space);
    Ok(Outcome {
        result: None,
        artifact: Some(crate::report::to_json(&serde_json::to_value(&file)?)),
        csv: None,
        negative: false,
        summary: None,
    })
}

pub fn op_gen(ctx: &mut Ctx) -> Result<Outcome> {
    let space = ctx.space()?;
    let a = ctx.op(&space)?;
    let p = ctx.p();
    Ok(Outcome { result: None, artifact: Some(write_operator(&a, p)), csv: None, negative: false, summary: None })
}

pub fn decompose_cmd(ctx: &mut Ctx) -> Result<Outcome> {
    let space = ctx.space()?;
    let a = ctx.op(&space)?;
    let d = decompose(&a);
    let exact = d.reconstruct(space.clone()) == a;
    let translations: Vec<Value> =
        d.translations.iter().map(|t| json!({"pairs": t.len(), "displacement": t.displacement()})).collect();
    Ok(Outcome::report(json!({
        "summands": d.len(),
        "propagation": a.propagation(),
        "growth_bound": space.growth(a.propagation()),
        "reconstruction_exact": exact,
        "multiplier_sup": d.multiplier_sup(),
        "translations": translations,
    })))
}

pub fn nu_cmd(ctx: &mut Ctx) -> Result<Outcome> {
    let space = ctx.space()?;
    let a = ctx.op(&space)?;
    let p = ctx.p();
    let cols = ctx.cols(&a)?;
    let r = nu(&a, &cols, p)?;
    Ok(Outcome::report(json!({
        "value": r.value,
        "method": r.method.as_str(),
        "tolerance": r.tolerance,
        "columns": r.columns,
        "support_diameter": r.support_diameter,
        "witness_ratio": r.witness_ratio(&a, p),
    })))
}

pub fn nu_local(ctx: &mut Ctx) -> Result<Outcome> {
    let space = ctx.space()?;
    let a = ctx.op(&space)?;
    let p = ctx.p();
    let delta = *ctx.params.delta.get_or_insert(0.1);
    let cols = ctx.cols(&a)?;
    let mut result = Map::new();
    let s = match ctx.params.s {
        Some(s) => s,
        None => {
            let rep = localization_check(&a, delta, &BlockSparsifier::default(), std::slice::from_ref(&cols), p, None, false)?;
            result.insert("localization".into(), serde_json::to_value(&rep)?);
            ctx.params.s = Some(rep.s);
            rep.s
        }
    };
    let full = nu(&a, &cols, p)?;
    let local = nu_s(&a, &cols, s, p)?;
    let gap = local.value - full.value;
    result.insert("nu".into(), json!(full.value));
    result.insert("nu_s".into(), json!(local.value));
    result.insert("s".into(), json!(s));
    result.insert("center".into(), json!(local.center));
    result.insert("gap".into(), json!(gap));
    result.insert("within_delta".into(), json!(gap <= delta + 1e-12));
    let mut out = Outcome::report(Value::Object(result));
    out.negative = gap > delta + 1e-12;
    Ok(out)
}

fn measure(spec: &str, space: &Space) -> Result<Vec<f64>> {
    if spec == "uniform" {
        return Ok(vec![1.0; space.len()]);
    }
    if let Some(ids) = spec.strip_prefix("atoms:") {
        let mut mu = vec![0.0; space.len()];
        for t in ids.split(';') {
            let x: PointId = t.trim().parse().map_err(|_| Error::Parse(format!("bad atom `{t}`")))?;
            space.check(x)?;
            mu[x] += 1.0;
        }
        return Ok(mu);
    }
    let text = std::fs::read_to_string(spec)?;
    let mu: Vec<f64> = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad weight `{l}`"))))
        .collect::<Result<_>>()?;
    if mu.len() != space.len() {
        return Err(Error::BadMeasure);
    }
    Ok(mu)
}

pub fn sparsify_cmd(ctx: &mut Ctx) -> Result<Outcome> {
    let space = ctx.space()?;
    let spec = ctx.params.measure.get_or_insert_with(|| "uniform".into()).clone();
    let mu = measure(&spec, &space)?;
    let m = *ctx.params.m.get_or_insert(3);
    let c = *ctx.params.c.get_or_insert(0.5);
    match sparsify(&space, &mu, m, c) {
        Ok(sp) => {
            let sizes: Vec<usize> = sp.parts.iter().map(Vec::len).collect();
            let mut v = serde_json::to_value(&sp)?;
            let obj = v.as_object_mut().unwrap();
            obj.remove("parts");
            obj.insert("status".into(), json!("ok"));
            obj.insert("part_count".into(), json!(sizes.len()));
            obj.insert("part_sizes".into(), json!(sizes));
            obj.insert("verified".into(), json!(sp.verify(&space, c)));
            obj.insert("guaranteed_diameter".into(), json!(BlockSparsifier::default().constants(&space, c, m)));
            Ok(Outcome::report(v))
        }
        Err(Error::Shortfall { best_c, target_c, block_len, m }) => {
            let mut out = Outcome::report(json!({
                "status": "shortfall", "best_c": best_c, "target_c": target_c, "block_len": block_len, "m": m,
            }));
            out.negative = true;
            Ok(out)
        }
        Err(e) => Err(e),
    }
}

pub fn partition_cmd(ctx: &mut Ctx) -> Result<Outcome> {
    let space = ctx.space()?;
    let scale = ctx.scale();
    let p = ctx.p();
    let part = make_partition(&space, scale, p)?;
    let mut csv = Csv::new(&["r", "epsilon"]);
    for (r, e) in &part.variation_table {
        csv.row(&[r.to_string(), cell(*e)]);
    }
    let worst = (0..space.len()).map(|x| (part.power_sum(x) - 1.0).abs()).fold(0.0, f64::max);
    let mut out = Outcome::report(json!({
        "functions": part.len(),
        "multiplicity": part.multiplicity,
        "support_diameter": part.support_diameter,
        "normalization_error": worst,
        "variation": part.variation_table,
    }));
    out.csv = Some(csv.finish());
    Ok(out)
}

fn op_norm(a: &BandOperator, p: f64) -> Result<(f64, &'static str)> {
    if p == 2.0 {
        Ok((norm2(a)?, "lanczos"))
    } else {
        Ok((schur_bound(a, p)?, "schur-bound"))
    }
}

pub fn average_cmd(ctx: &mut Ctx) -> Result<Outcome> {
    let space = ctx.space()?;
    let a = ctx.op(&space)?;
    let scale = ctx.scale();
    let p = ctx.p();
    let part = make_partition(&space, scale, p)?;
    let m = average(&a, &part)?;
    let (diff, kind) = op_norm(&m.sub(&a)?, p)?;
    Ok(Outcome::report(json!({
        "difference_norm": diff,
        "norm_method": kind,
        "averaged_propagation": m.propagation(),
        "averaged_nnz": m.nnz(),
    })))
}

fn limit_like(ctx: &mut Ctx, shift: bool) -> Result<Outcome> {
    let space = ctx.space()?;
    let a = ctx.op(&space)?;
    let p = ctx.p();
    let radius = ctx.radius(&a);
    let tol = ctx.tol();
    let tail = ctx.tail();
    let dirs = ctx.dirs()?;
    let extract = |d: &Direction| if shift { shift_limit(&a, d, radius, tol, tail) } else { limit_operator(&a, d, radius, tol, tail) };
    let results: Vec<Result<LimitWindow>> = {
        use rayon::prelude::*;
        dirs.par_iter().map(extract).collect()
    };
    let mut windows = Vec::new();
    let mut csv = Csv::new(&["direction", "n", "basepoint", "deviation"]);
    let mut negative = false;
    for (d, r) in dirs.iter().zip(results) {
        match r {
            Ok(w) => {
                for dev in &w.deviations {
                    csv.row(&[d.label.replace(',', ";"), dev.n.to_string(), dev.basepoint.to_string(), cell(dev.deviation)]);
                }
                windows.push(window_json(&w, p)?);
            }
            Err(e) => match failure_json(&d.label, &e) {
                Some(v) => {
                    if let Error::CauchyFailure { profile, .. } = &e {
                        for (n, dev) in profile.iter().enumerate() {
                            csv.row(&[d.label.replace(',', ";"), n.to_string(), String::new(), cell(*dev)]);
                        }
                    }
                    negative = true;
                    windows.push(v);
                }
                None => return Err(e),
            },
        }
    }
    let mut out = Outcome::report(json!({ "windows": windows }));
    out.csv = Some(csv.finish());
    out.negative = negative;
    Ok(out)
}

pub fn limit_cmd(ctx: &mut Ctx) -> Result<Outcome> {
    limit_like(ctx, false)
}

pub fn shift_limit_cmd(ctx: &mut Ctx) -> Result<Outcome> {
    limit_like(ctx, true)
}

pub fn spectrum_cmd(ctx: &mut Ctx) -> Result<Outcome> {
    let space = ctx.space()?;
    let a = ctx.op(&space)?;
    let p = ctx.p();
    let radius = ctx.radius(&a);
    let tol = ctx.tol();
    let tail = ctx.tail();
    let dirs = ctx.dirs()?;
    let sp = sample_spectrum(&a, &dirs, radius, tol, tail, p)?;
    let mut csv = Csv::new(&["direction", "n", "basepoint", "deviation"]);
    let mut rows = Vec::new();
    for (w, nu) in sp.windows.iter().zip(&sp.nus) {
        for dev in &w.deviations {
            csv.row(&[w.label.replace(',', ";"), dev.n.to_string(), dev.basepoint.to_string(), cell(dev.deviation)]);
        }
        let mut v = serde_json::to_value(nu)?;
        let obj = v.as_object_mut().unwrap();
        obj.insert("cauchy_tail".into(), json!(w.cauchy_tail));
        obj.insert("norm".into(), json!(w.norm));
        rows.push(v);
    }
    let mut out = Outcome::report(json!({
        "note": SpectrumSample::NOTE,
        "min_nu": sp.min_nu,
        "argmin": sp.nus[sp.argmin].label,
        "max_inverse_norm": (sp.min_nu > 0.0).then(|| 1.0 / sp.min_nu),
        "windows": rows,
    }));
    out.csv = Some(csv.finish());
    Ok(out)
}

pub fn ghost_cmd(ctx: &mut Ctx) -> Result<Outcome> {
    let space = ctx.space()?;
    let a = ctx.op(&space)?;
    let radii = ctx.params.radii.get_or_insert_with(|| (0..=10).collect()).clone();
    let profile = ghost_profile(&a, &radii);
    let mut csv = Csv::new(&["radius", "sup"]);
    for g in &profile {
        csv.row(&[g.radius.to_string(), cell(g.sup)]);
    }
    let tail = profile.last().map_or(0.0, |g| g.sup);
    let mut result = json!({ "profile": profile, "tail": tail });
    if ctx.params.dir.as_ref().is_some_and(|d| !d.is_empty()) {
        let radius = ctx.radius(&a);
        let tol = ctx.tol();
        let t = ctx.tail();
        let mut windows = Vec::new();
        let mut coherent = true;
        for d in ctx.dirs()? {
            let w = limit_operator(&a, &d, radius, tol, t)?;
            // Averaged window entries come from rows and columns outside
            // the ball of radius `nearest − R − 1` around the centre.
            let nearest = w.tail.iter().map(|&x| space.dist(space.center(), x)).min().unwrap_or(0);
            let r = nearest.saturating_sub(radius + 1);
            let bound = ghost_profile(&a, &[r])[0].sup;
            let sup = w.operator.entry_sup();
            coherent &= sup <= bound;
            windows.push(json!({"label": d.label, "entry_sup": sup, "profile_radius": r, "profile_sup": bound, "within_profile": sup <= bound}));
        }
        let obj = result.as_object_mut().unwrap();
        obj.insert("windows".into(), json!(windows));
        obj.insert("coherent".into(), json!(coherent));
    }
    let mut out = Outcome::report(result);
    out.csv = Some(csv.finish());
    Ok(out)
}

pub fn parametrix_cmd(ctx: &mut Ctx) -> Result<Outcome> {
    let space = ctx.space()?;
    let a = ctx.op(&space)?;
    let p = ctx.p();
    let scale = ctx.scale();
    let threshold = *ctx.params.residual_threshold.get_or_insert(1e-3);
    let residual_radius = *ctx.params.residual_radius.get_or_insert(3 * scale);
    let bound = match ctx.params.bound {
        Some(b) => b,
        None => {
            let radius = ctx.radius(&a);
            let tol = ctx.tol();
            let tail = ctx.tail();
            let sp = sample_spectrum(&a, &ctx.dirs().map_err(|_| missing("bound (or --dir to derive it)"))?, radius, tol, tail, p)?;
            if sp.min_nu <= 0.0 {
                return Err(Error::Parse("sampled lower norm is zero; no bound M can be derived".into()));
            }
            *ctx.params.bound.insert(1.2 / sp.min_nu)
        }
    };
    let part = make_partition(&space, scale, p)?;
    match parametrix(&a, &part, bound, residual_radius) {
        Ok(par) => {
            let passes = par.report.norm_ok && par.report.residual <= threshold;
            let mut v = serde_json::to_value(&par.report)?;
            v.as_object_mut().unwrap().insert("accepted".into(), json!(passes));
            let mut out = Outcome::report(v);
            out.negative = !passes;
            Ok(out)
        }
        Err(e @ (Error::CommutatorTooLarge(_) | Error::FailuresCoverInterior { .. })) => {
            let mut out = Outcome::report(json!({"accepted": false, "reason": e.to_string()}));
            out.negative = true;
            Ok(out)
        }
        Err(e) => Err(e),
    }
}

pub fn probe_cmd(ctx: &mut Ctx) -> Result<Outcome> {
    let space = ctx.space()?;
    let a = ctx.op(&space)?;
    let defaults = ProbeConfig::default();
    let cfg = ProbeConfig {
        p: ctx.p(),
        radius: ctx.radius(&a),
        tol: ctx.tol(),
        tail: ctx.tail(),
        scale: ctx.scale(),
        zero_threshold: *ctx.params.zero_threshold.get_or_insert(defaults.zero_threshold),
        residual_threshold: *ctx.params.residual_threshold.get_or_insert(defaults.residual_threshold),
        residual_radius: ctx.params.residual_radius,
        essential_radii: ctx.params.radii.clone(),
        ..defaults
    };
    let dirs = ctx.dirs()?;
    let v = probe(&a, &dirs, &cfg)?;
    let mut csv = Csv::new(&["radius", "nu"]);
    for (r, x) in &v.essential_profile {
        csv.row(&[r.to_string(), cell(*x)]);
    }
    let mut out = Outcome::report(serde_json::to_value(&v)?);
    out.csv = Some(csv.finish());
    out.negative = v.verdict == Verdict::NotFredholm;
    let detail = match &v.witness {
        Some(w) => format!(" (witness {} `{}` = {})", w.kind, w.label, cell(w.value)),
        None => format!(" (min limit nu = {})", cell(v.limit_min_nu)),
    };
    out.summary = Some(format!("verdict: {}{detail}", v.verdict.as_str()));
    Ok(out)
}
