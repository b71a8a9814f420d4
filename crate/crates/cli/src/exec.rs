//! Runs one task against a resolved scenario and collects its evidence.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use valring::ci::{build_presentation, element_reduction_report, morphism};
use valring::poly::{hasse_derivative, pseudo_divide, reduce_mod_tower, reduce_mod_tower_strict, taylor_expand};
use valring::pseudo::{
    check_pseudo_convergent, classify, factor_below_degree, image_sequence, localize_representation, Convergence,
    SearchSpace, Verdict,
};
use valring::threshold::{solve_threshold_1d, solve_threshold_nd, BetaTensor, MonotoneSequence, Rule};
use valring::{Error, GroupElement, Mode, MultiPoly, Series, ThresholdProblem, Value};

use crate::scenario::{group, poly, series, AxisSpec, Resolved, ResolvedSeq, TaskSpec};

pub type Fields = Vec<(String, String)>;

/// Task failure: a core error or an input problem detected while running.
#[derive(Debug)]
pub enum TaskError {
    Core(Error),
    Input(String),
    /// A verification step produced a negative answer.
    Check(String),
}

impl std::fmt::Display for TaskError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TaskError::Core(e) => write!(f, "{}: {e}", error_kind(e)),
            TaskError::Input(m) => write!(f, "Input: {m}"),
            TaskError::Check(m) => write!(f, "Check: {m}"),
        }
    }
}

impl TaskError {
    pub fn kind(&self) -> String {
        match self {
            TaskError::Core(e) => error_kind(e),
            TaskError::Input(_) => "Input".into(),
            TaskError::Check(_) => "Check".into(),
        }
    }
}

impl From<Error> for TaskError {
    fn from(e: Error) -> Self {
        TaskError::Core(e)
    }
}

impl From<crate::scenario::InputError> for TaskError {
    fn from(e: crate::scenario::InputError) -> Self {
        TaskError::Input(e.0)
    }
}

/// Variant name of a core error.
pub fn error_kind(e: &Error) -> String {
    let dbg = format!("{e:?}");
    dbg.split(|c: char| !c.is_alphanumeric()).next().unwrap_or("Error").to_string()
}

struct Out(Fields);

impl Out {
    fn put(&mut self, k: &str, v: impl ToString) {
        self.0.push((k.to_string(), v.to_string()));
    }
}

fn list<T: ToString>(xs: &[T]) -> String {
    let parts: Vec<String> = xs.iter().map(ToString::to_string).collect();
    format!("[{}]", parts.join(", "))
}

fn seq_of<'a>(r: &'a Resolved, name: &str) -> &'a ResolvedSeq {
    &r.sequences[name]
}

fn uni(r: &Resolved, what: &str, text: &str) -> Result<MultiPoly, TaskError> {
    Ok(poly(what, text, &r.field, &["X"])?)
}

fn s_min_of(s: &ResolvedSeq, given: Option<u32>) -> Result<u32, TaskError> {
    given
        .or_else(|| s.witness.as_ref().and_then(MultiPoly::degree))
        .ok_or_else(|| TaskError::Input("s_min is required when the sequence has no witness".into()))
}

fn limit_of(s: &ResolvedSeq) -> Result<&Series, TaskError> {
    s.limit.as_ref().ok_or_else(|| TaskError::Input("sequence has no limit".into()))
}

pub fn run_task(task: &TaskSpec, r: &Resolved, task_index: usize) -> Result<Fields, TaskError> {
    let mut out = Out(Vec::new());
    let prec = &r.precision;
    match task {
        TaskSpec::CheckConvergence { sequence } => {
            let s = seq_of(r, sequence);
            out.put("window", s.seq.len());
            match check_pseudo_convergent(&s.seq)? {
                Convergence::Certified { profile } => {
                    out.put("verdict", "certified");
                    out.put("profile", list(&profile));
                }
                Convergence::Violation { triple } => {
                    out.put("verdict", "violation");
                    out.put("triple", format!("{triple:?}"));
                }
            }
        }
        TaskSpec::Classify { sequence, max_degree, max_support, palette, fundamental_bound, budget } => {
            let s = seq_of(r, sequence);
            let rank = r.field.rank();
            let palette = match palette {
                Some(p) => p.iter().map(|g| group("palette", g, rank)).collect::<Result<Vec<_>, _>>()?,
                None => s.palette.clone(),
            };
            let mut space = SearchSpace::new(*max_degree, *max_support, palette);
            if let Some(b) = budget {
                space.budget = *b;
            }
            let bound = fundamental_bound.as_ref().map(|b| group("fundamental_bound", b, rank)).transpose()?;
            let c = classify(&s.seq, &space, bound.as_ref())?;
            match &c.verdict {
                Verdict::Algebraic { witness, onset } => {
                    out.put("verdict", "algebraic");
                    out.put("witness", witness);
                    out.put("witness_degree", witness.degree().unwrap_or(0));
                    out.put("onset", onset);
                }
                Verdict::TranscendentalUpTo { degree, support } => {
                    out.put("verdict", format!("transcendental-up-to(degree={degree}, support={support})"));
                }
            }
            out.put(
                "fundamental_up_to",
                c.fundamental_up_to.as_ref().map_or("none".to_string(), ToString::to_string),
            );
            out.put("profile", list(&c.profile));
            out.put("candidates_checked", c.candidates_checked);
        }
        TaskSpec::Image { sequence, poly: text } => {
            let s = seq_of(r, sequence);
            let f = uni(r, "poly", text)?;
            let im = image_sequence(&f, &s.seq, s.limit.as_ref())?;
            out.put("onset", im.onset);
            let tail = im.tail()?;
            let profile: Vec<Value> = tail.gamma_profile().iter().map(|v| v.value.clone()).collect();
            out.put("tail_profile", list(&profile));
            out.put("limit_verified", im.limit_verified.map_or("n/a".to_string(), |b| b.to_string()));
        }
        TaskSpec::Factor { sequence, poly: text, s_min } => {
            let s = seq_of(r, sequence);
            let g = uni(r, "poly", text)?;
            let fac = factor_below_degree(&g, limit_of(s)?, &s.seq, s_min_of(s, *s_min)?, prec)?;
            out.put("index", list(&fac.index));
            out.put("d", &fac.d);
            out.put("val_d", fac.d.val().value);
            out.put("val_u", fac.u.val().value);
            out.put("taylor_values", list(&fac.taylor_values));
        }
        TaskSpec::FactorBatch { sequence, count, s_min } => {
            let s = seq_of(r, sequence);
            let s_min = s_min_of(s, *s_min)?;
            let x = limit_of(s)?;
            let mut rng = ChaCha8Rng::seed_from_u64(r.seed ^ (task_index as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
            let mut ok = 0;
            for k in 0..*count {
                let g = random_poly(&mut rng, r, &s.palette, s_min.saturating_sub(1));
                match factor_below_degree(&g, x, &s.seq, s_min, prec) {
                    Ok(fac) => {
                        ok += 1;
                        out.put(&format!("case.{k}"), format!("{g} | index {} | val d {}", list(&fac.index), fac.d.val().value));
                    }
                    Err(e) => out.put(&format!("case.{k}"), format!("{g} | {}", TaskError::Core(e))),
                }
            }
            out.put("succeeded", format!("{ok}/{count}"));
            if ok != *count {
                return Err(TaskError::Check(format!("{} of {count} factorizations failed: {}", count - ok, fields_text(&out.0))));
            }
        }
        TaskSpec::Localize { sequence, poly: text, t, s_min } => {
            let s = seq_of(r, sequence);
            let g = uni(r, "poly", text)?;
            let t = series("t", t, &r.field)?;
            let loc = localize_representation(&g, &t, limit_of(s)?, &s.seq, s_min_of(s, *s_min)?, prec)?;
            out.put("ratio", &loc.ratio);
            out.put("val_ratio", loc.ratio.val().value);
            out.put("val_u", loc.u.val().value);
        }
        TaskSpec::Threshold { mode, shape, betas, multipliers, sequences, bounds, horizons } => {
            let rank = r.field.rank();
            let mode = match mode.as_str() {
                "distinct" => Mode::Distinct,
                "nonzero" => Mode::Nonzero,
                other => return Err(TaskError::Input(format!("mode {other:?} is not distinct or nonzero"))),
            };
            let data = betas
                .iter()
                .map(|b| match b.trim() {
                    "inf" | "none" => Ok(None),
                    t => group("betas", t, rank).map(Some),
                })
                .collect::<Result<Vec<_>, _>>()?;
            let betas = BetaTensor::new(shape.clone(), data)?;
            let seqs = sequences
                .iter()
                .map(|a| -> Result<MonotoneSequence, TaskError> {
                    Ok(match a {
                        AxisSpec::Affine { start, step } => {
                            let start = group("sequences.start", start, rank)?;
                            let step = group("sequences.step", step, rank)?;
                            MonotoneSequence::new(vec![start.clone()], Some(Rule::Affine { start, step }))?
                        }
                        AxisSpec::Table { table } => MonotoneSequence::new(
                            table.iter().map(|g| group("sequences.table", g, rank)).collect::<Result<Vec<_>, _>>()?,
                            None,
                        )?,
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            let mut bs = bounds.iter().map(|b| group("bounds", b, rank).map(Some)).collect::<Result<Vec<_>, _>>()?;
            bs.resize(seqs.len(), None);
            let p = ThresholdProblem { betas, multipliers: multipliers.clone(), sequences: seqs, bounds: bs, mode };
            let hs = horizons.clone().unwrap_or_else(|| vec![r.horizon; p.axes()]);
            let cert = if p.axes() == 1 && mode == Mode::Distinct {
                solve_threshold_1d(&p, hs[0])?
            } else {
                solve_threshold_nd(&p, &hs)?
            };
            out.put("nus", list(&cert.nus));
            out.put("shifts", list(&cert.shifts));
            out.put("verified_horizon", list(&cert.verified_horizon));
            if let Some(d) = &cert.dominant {
                out.put("dominant", format!("form {} from index {}", d.index, d.from));
            }
        }
        TaskSpec::Hasse { poly: text, order } => {
            let f = uni(r, "poly", text)?;
            out.put("result", hasse_derivative(&f, 0, *order));
        }
        TaskSpec::Taylor { poly: text, center } => {
            let f = uni(r, "poly", text)?;
            let c = series("center", center, &r.field)?;
            for (n, coeff) in taylor_expand(&f, 0, &c)? {
                out.put(&format!("coeff.{n}"), coeff);
            }
        }
        TaskSpec::PseudoDivide { f, h } => {
            let f = uni(r, "f", f)?;
            let h = uni(r, "h", h)?;
            let pd = pseudo_divide(&f, &h)?;
            out.put("c", &pd.c);
            out.put("quotient", &pd.g1);
            out.put("remainder", &pd.g0);
        }
        TaskSpec::ReduceTower { f, levels, strict } => {
            let f = uni(r, "f", f)?;
            let hs = levels.iter().map(|h| uni(r, "levels", h)).collect::<Result<Vec<_>, _>>()?;
            let spec = valring::TowerSpec::new(hs)?;
            let red = if *strict { reduce_mod_tower_strict(&f, &spec)? } else { reduce_mod_tower(&f, &spec)? };
            out.put("c", &red.c);
            out.put("top", red.top);
            out.put("reduced", &red.f);
        }
        TaskSpec::Presentation { tower, indices } => {
            let t = &r.towers[tower];
            let pres = build_presentation(t, indices, prec)?;
            out.put("vars", list(&pres.vars));
            for (e, g) in pres.relations.iter().enumerate() {
                out.put(&format!("relation.{e}"), g);
            }
            for (e, w) in pres.witness.iter().enumerate() {
                out.put(&format!("witness.{e}"), w);
            }
            out.put("triangular", pres.is_triangular());
        }
        TaskSpec::Morphism { tower, from, to } => {
            let t = &r.towers[tower];
            let src = build_presentation(t, from, prec)?;
            let dst = build_presentation(t, to, prec)?;
            let m = morphism(t, &src, &dst)?;
            for (e, map) in m.maps.iter().enumerate() {
                let text = match map {
                    Some(tm) => format!("alpha {} | beta {}", tm.alpha, tm.beta),
                    None => "identity".to_string(),
                };
                out.put(&format!("map.{e}"), text);
            }
            for (e, img) in m.images.iter().enumerate() {
                out.put(&format!("image.{e}"), img);
            }
            out.put("compatible", m.is_compatible());
            if !m.is_compatible() {
                return Err(TaskError::Check(format!("relation images do not reduce to zero: {}", fields_text(&out.0))));
            }
        }
        TaskSpec::ElementReduction { tower, poly: text, indices } => {
            let t = &r.towers[tower];
            let f = uni(r, "poly", text)?;
            let rep = element_reduction_report(&f, t, indices.as_deref(), prec)?;
            out.put("c", &rep.reduction.c);
            out.put("reduced", &rep.reduction.f);
            out.put("nus", list(&rep.factorization.nus));
            out.put("index", list(&rep.factorization.factorization.index));
            out.put("d", &rep.factorization.factorization.d);
            out.put("d_prime", &rep.d_prime);
            out.put("val_u", rep.u.val().value);
            out.put("constant_term", &rep.constant);
            out.put("unit_shape", rep.unit_shape);
        }
    }
    Ok(out.0)
}

fn fields_text(f: &Fields) -> String {
    f.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join("; ")
}

/// Random univariate polynomial of exact degree `deg` whose coefficients
/// are single monomials with exponents from the palette.
pub fn random_poly(rng: &mut ChaCha8Rng, r: &Resolved, palette: &[GroupElement], deg: u32) -> MultiPoly {
    let q = r.field.q();
    let mut coeffs = Vec::with_capacity(deg as usize + 1);
    for k in 0..=deg {
        let c = if k == deg || rng.gen_bool(0.7) { rng.gen_range(1..q) as valring::Coeff } else { 0 };
        let e = palette[rng.gen_range(0..palette.len())].clone();
        coeffs.push(Series::monomial(&r.field, c, e));
    }
    MultiPoly::univariate(&r.field, "X", coeffs)
}
