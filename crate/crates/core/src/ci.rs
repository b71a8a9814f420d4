//! Complete-intersection presentations over a tower `x_{n+1} = h_n(x_n)`.
//!
//! Level `n` carries a pseudo-convergent sequence `a_{n,j}` with pseudo limit
//! `x_n`. The fraction variables `x_{n,j} = (x_n - a_{n,j}) / (a_{n,j+1} -
//! a_{n,j})` are units, and `C_J = V[X_{0,j_0}, ..] / (g_{j_0,j_1}, ..)` with
//! `g = h_n(q_{n,j}) - q_{n+1,j'}`, `q_{n,j} = a_{n,j} + (a_{n,j+1} -
//! a_{n,j}) X_{n,j}`.

use crate::error::{Error, Result};
use crate::field::FieldConfig;
use crate::group::{GroupElement, Value};
use crate::poly::{reduce_mod_tower_strict, MultiPoly, TowerReduction, TowerSpec};
use crate::pseudo::{
    check_pseudo_convergent, image_sequence, is_pseudo_limit, scale_and_factor_multivar, MultivarFactorization,
    PlantedTower, PseudoSequence,
};
use crate::series::Series;

#[derive(Clone, Debug)]
pub struct TowerLevel {
    pub x: Series,
    pub seq: PseudoSequence,
    /// Univariate; absent at the final level.
    pub h: Option<MultiPoly>,
}

/// Validated list of levels.
#[derive(Clone, Debug)]
pub struct Tower {
    levels: Vec<TowerLevel>,
}

impl Tower {
    pub fn new(levels: Vec<TowerLevel>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::Precondition("tower needs at least one level".into()));
        }
        for (n, level) in levels.iter().enumerate() {
            if !check_pseudo_convergent(&level.seq)?.is_certified() {
                return Err(Error::InvalidSequence(format!("level {n} is not pseudo-convergent")));
            }
            if !is_pseudo_limit(&level.x, &level.seq)? {
                return Err(Error::InvalidSequence(format!("x_{n} is not a pseudo limit of its sequence")));
            }
            match &level.h {
                Some(h) => {
                    if h.vars().len() != 1 || h.degree().unwrap_or(0) < 2 {
                        return Err(Error::Precondition(format!("h_{n} must be univariate of degree > 1")));
                    }
                    if let Some(next) = levels.get(n + 1) {
                        if !h.eval(std::slice::from_ref(&level.x)).agrees_with(&next.x) {
                            return Err(Error::Precondition(format!("x_{} != h_{n}(x_{n})", n + 1)));
                        }
                    }
                }
                None if n + 1 < levels.len() => {
                    return Err(Error::Precondition(format!("level {n} has no h but is not the last level")));
                }
                None => {}
            }
        }
        Ok(Tower { levels })
    }

    /// Planted tower with every `h` kept, including the last one.
    pub fn from_planted(t: &PlantedTower) -> Result<Self> {
        Tower::new(
            t.levels
                .iter()
                .map(|l| TowerLevel { x: l.x.clone(), seq: l.instance.seq.clone(), h: l.instance.witness.clone() })
                .collect(),
        )
    }

    /// Default choice of later sequences: `a_{n+1,j} = h_n(a_{n,j})` on the
    /// tail past the onset of the image sequence.
    pub fn from_images(x0: Series, seq0: PseudoSequence, hs: Vec<MultiPoly>) -> Result<Self> {
        let mut levels = Vec::with_capacity(hs.len() + 1);
        let mut x = x0;
        let mut seq = seq0;
        for h in hs {
            let im = image_sequence(&h, &seq, Some(&x))?;
            if im.limit_verified != Some(true) {
                return Err(Error::InvalidSequence("h(x) is not a pseudo limit of the image tail".into()));
            }
            let next_x = im.fx.clone().expect("limit was supplied");
            let next_seq = im.tail()?;
            levels.push(TowerLevel { x, seq, h: Some(h) });
            x = next_x;
            seq = next_seq;
        }
        levels.push(TowerLevel { x, seq, h: None });
        Tower::new(levels)
    }

    pub fn levels(&self) -> &[TowerLevel] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn field(&self) -> &FieldConfig {
        self.levels[0].x.field()
    }

    /// `h_0, ..` as a tower of univariate polynomials.
    pub fn spec(&self) -> Result<TowerSpec> {
        TowerSpec::new(self.levels.iter().filter_map(|l| l.h.clone()).collect())
    }
}

fn step(level: &TowerLevel, j: usize) -> Result<(Series, Series)> {
    let w = level.seq.window();
    if j + 1 >= w.len() {
        return Err(Error::IndexOutOfWindow { index: j + 1, len: w.len() });
    }
    let delta = &w[j + 1] - &w[j];
    delta.exact_val()?;
    Ok((w[j].clone(), delta))
}

/// `num / den` to absolute precision `prec` for a quotient of value 0.
fn unit_quotient(num: &Series, den: &Series, prec: &GroupElement) -> Result<Series> {
    let vd = den.exact_val()?;
    let cap = if den.terms().len() == 1 && den.is_exact() { Value::Infinity } else { Value::Finite(prec - &vd) };
    Ok(num * &den.invert(&cap)?)
}

fn need_prec(s: &Series, prec: &GroupElement, what: &str) -> Result<()> {
    if *s.prec() < Value::Finite(prec.clone()) {
        return Err(Error::PrecisionTooLow(format!("{what} is known only to {}; {prec} is required", s.prec())));
    }
    Ok(())
}

/// `x_{n,j}`, checked to be a unit.
pub fn fraction_var(level: &TowerLevel, j: usize, prec: &GroupElement) -> Result<Series> {
    let (a, delta) = step(level, j)?;
    let num = &level.x - &a;
    let vn = num.val();
    if !vn.is_exact() {
        return Err(Error::PrecisionTooLow(format!("x - a_{j} has no term below {}", vn.value)));
    }
    let vd = delta.exact_val()?;
    if vn.value != Value::Finite(vd.clone()) {
        return Err(Error::NotAUnit(format!("val(x - a_{j}) = {} but val(a_{} - a_{j}) = {vd}", vn.value, j + 1)));
    }
    let out = unit_quotient(&num, &delta, prec)?;
    need_prec(&out, prec, &format!("x_{{n,{j}}}"))?;
    Ok(out)
}

/// Variable name of `X_{e,j}`.
pub fn var_name(e: usize, j: usize) -> String {
    format!("X{e}_{j}")
}

/// `q_{n,j} = a_{n,j} + (a_{n,j+1} - a_{n,j}) X` over `vars`, in slot `idx`.
fn q_poly(level: &TowerLevel, j: usize, vars: &[String], idx: usize) -> Result<MultiPoly> {
    let (a, delta) = step(level, j)?;
    let field = a.field().clone();
    let mut p = MultiPoly::with_vars(&field, vars.to_vec());
    let mut e = vec![0u32; vars.len()];
    p.add_term(e.clone(), a);
    e[idx] = 1;
    p.add_term(e, delta);
    Ok(p)
}

/// `g_{j,j'} = h_n(q_{n,j}) - q_{n+1,j'}` over `[X_{n,j}, X_{n+1,j'}]`.
pub fn relation_poly(lower: &TowerLevel, upper: &TowerLevel, j: usize, j2: usize, n: usize) -> Result<MultiPoly> {
    let h = lower.h.as_ref().ok_or_else(|| Error::Precondition(format!("level {n} has no h")))?;
    let vars = vec![var_name(n, j), var_name(n + 1, j2)];
    let q0 = q_poly(lower, j, &vars, 0)?;
    let q1 = q_poly(upper, j2, &vars, 1)?;
    let h = h.rename(vec![vars[0].clone()]).embed(&vars)?;
    Ok(&h.substitute(0, &q0) - &q1)
}

/// `x_{n,j} = alpha + beta x_{n,j'}` for `j < j'`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransitionMap {
    pub alpha: Series,
    pub beta: Series,
    pub from: usize,
    pub to: usize,
}

impl TransitionMap {
    /// `self` followed by `next`: `x_j = alpha + beta (alpha' + beta' x_j'')`.
    pub fn then(&self, next: &TransitionMap) -> Result<TransitionMap> {
        if self.to != next.from {
            return Err(Error::Precondition(format!("cannot compose {}->{} with {}->{}", self.from, self.to, next.from, next.to)));
        }
        Ok(TransitionMap {
            alpha: &self.alpha + &(&self.beta * &next.alpha),
            beta: &self.beta * &next.beta,
            from: self.from,
            to: next.to,
        })
    }
}

pub fn transition(level: &TowerLevel, j: usize, j2: usize, prec: &GroupElement) -> Result<TransitionMap> {
    if j >= j2 {
        return Err(Error::Precondition(format!("transition needs j < j', got {j} and {j2}")));
    }
    let (a, delta) = step(level, j)?;
    let (a2, delta2) = step(level, j2)?;
    let alpha = unit_quotient(&(&a2 - &a), &delta, prec)?;
    let beta = unit_quotient(&delta2, &delta, prec)?;
    let zero = Value::Finite(GroupElement::zero(a.field().rank()));
    let va = alpha.val();
    if !va.is_exact() || va.value != zero {
        return Err(Error::NotAUnit(format!("alpha_{j},{j2} has value {}", va.value)));
    }
    let vb = beta.val();
    if !vb.is_exact() || vb.value <= zero {
        return Err(Error::Precondition(format!("beta_{j},{j2} has value {}, not positive", vb.value)));
    }
    let map = TransitionMap { alpha, beta, from: j, to: j2 };
    let lhs = fraction_var(level, j, prec)?;
    let rhs = &map.alpha + &(&map.beta * &fraction_var(level, j2, prec)?);
    let diff = &lhs - &rhs;
    if !diff.is_zero_to_prec() {
        return Err(Error::WitnessMismatch(format!("x_{j} != alpha + beta x_{j2}: residual {diff}")));
    }
    Ok(map)
}

/// Images of the relations of `C_J` in `C_J'` for `J <= J'`.
#[derive(Clone, Debug)]
pub struct Morphism {
    pub from: Vec<usize>,
    pub to: Vec<usize>,
    /// `None` where `j_e = j'_e`.
    pub maps: Vec<Option<TransitionMap>>,
    /// Relation images over the variables of `C_J'`.
    pub images: Vec<MultiPoly>,
    /// Remainder of each image after pseudo-division by the target relations.
    pub remainders: Vec<MultiPoly>,
}

impl Morphism {
    pub fn is_compatible(&self) -> bool {
        self.remainders.iter().all(MultiPoly::is_zero)
    }
}

#[derive(Clone, Debug)]
pub struct CIPresentation {
    pub indices: Vec<usize>,
    pub vars: Vec<String>,
    pub relations: Vec<MultiPoly>,
    pub witness: Vec<Series>,
    /// Precision the checks were carried out to.
    pub prec: GroupElement,
}

impl CIPresentation {
    /// Relation `e` involves only slots `e-1`, `e` (slots `e`, `e+1` for the
    /// `e`-th relation counted from zero), is affine in the newer one, and the
    /// coefficient there is a constant of exact finite value.
    pub fn is_triangular(&self) -> bool {
        self.relations.iter().enumerate().all(|(e, g)| {
            let used_ok = (0..self.vars.len()).all(|k| k == e || k == e + 1 || g.degree_in(k).is_none());
            let coeffs = g.coeffs_in(e + 1);
            used_ok
                && coeffs.len() == 2
                && coeffs[1].total_degree() == Some(0)
                && coeffs[1].constant_term().exact_val().is_ok()
        })
    }

    /// Residuals of the relations at the witness.
    pub fn residuals(&self) -> Vec<Series> {
        self.relations.iter().map(|g| g.eval(&self.witness)).collect()
    }

    /// Remainder of `p` after eliminating the newest variable of each
    /// relation from the top down: with `g = c X_e + g_0`, every `X_e^k` is
    /// replaced by `(-g_0)^k c^(D-k)`. Zero iff `p` lies in the ideal of the
    /// relations over the fraction field.
    pub fn reduce(&self, p: &MultiPoly) -> Result<MultiPoly> {
        let mut r = p.embed(&self.vars)?;
        for (e, g) in self.relations.iter().enumerate().rev() {
            let idx = e + 1;
            let gc = g.coeffs_in(idx);
            let c = gc[1].constant_term();
            let minus_g0 = gc[0].neg();
            let rk = r.coeffs_in(idx);
            let big_d = rk.len().saturating_sub(1) as u64;
            let field = r.field().clone();
            let mut out = MultiPoly::with_vars(&field, self.vars.clone());
            for (k, ck) in rk.iter().enumerate() {
                let factor = minus_g0.pow(k as u32).scale(&c.pow(big_d - k as u64));
                out = &out + &(&ck.embed(&self.vars)? * &factor);
            }
            r = out;
        }
        Ok(r)
    }
}

pub fn build_presentation(tower: &Tower, indices: &[usize], prec: &GroupElement) -> Result<CIPresentation> {
    if indices.is_empty() || indices.len() > tower.len() {
        return Err(Error::Precondition(format!("{} indices for a tower of {} levels", indices.len(), tower.len())));
    }
    let levels = &tower.levels()[..indices.len()];
    let vars: Vec<String> = indices.iter().enumerate().map(|(e, &j)| var_name(e, j)).collect();
    let witness = levels.iter().zip(indices).map(|(l, &j)| fraction_var(l, j, prec)).collect::<Result<Vec<_>>>()?;
    let mut relations = Vec::with_capacity(indices.len() - 1);
    for e in 0..indices.len() - 1 {
        let g = relation_poly(&levels[e], &levels[e + 1], indices[e], indices[e + 1], e)?;
        relations.push(g.embed(&vars)?);
    }
    let pres = CIPresentation { indices: indices.to_vec(), vars, relations, witness, prec: prec.clone() };
    if !pres.is_triangular() {
        return Err(Error::WitnessMismatch("relations are not triangular".into()));
    }
    for (e, r) in pres.residuals().iter().enumerate() {
        if !r.is_zero_to_prec() {
            return Err(Error::WitnessMismatch(format!("relation {e} does not vanish at the witness: {r}")));
        }
        need_prec(r, prec, &format!("residual of relation {e}"))?;
    }
    Ok(pres)
}

/// Substitutes `X_{e,j_e} -> alpha + beta X_{e,j'_e}` and reduces each image
/// modulo the relations of `target`.
pub fn morphism(tower: &Tower, source: &CIPresentation, target: &CIPresentation) -> Result<Morphism> {
    if source.indices.len() != target.indices.len() {
        return Err(Error::Precondition("presentations have different lengths".into()));
    }
    if source.indices.iter().zip(&target.indices).any(|(a, b)| a > b) {
        return Err(Error::Precondition(format!("{:?} is not below {:?}", source.indices, target.indices)));
    }
    let mut maps = Vec::with_capacity(source.indices.len());
    for (e, (&j, &j2)) in source.indices.iter().zip(&target.indices).enumerate() {
        maps.push(if j == j2 { None } else { Some(transition(&tower.levels()[e], j, j2, &target.prec)?) });
    }
    let field = tower.field();
    let mut images = Vec::with_capacity(source.relations.len());
    let mut remainders = Vec::with_capacity(source.relations.len());
    for g in &source.relations {
        let mut img = g.rename(target.vars.clone());
        for (e, m) in maps.iter().enumerate() {
            if let Some(m) = m {
                let mut repl = MultiPoly::with_vars(field, target.vars.clone());
                let mut ex = vec![0u32; target.vars.len()];
                repl.add_term(ex.clone(), m.alpha.clone());
                ex[e] = 1;
                repl.add_term(ex, m.beta.clone());
                img = img.substitute(e, &repl);
            }
        }
        remainders.push(target.reduce(&img)?);
        images.push(img);
    }
    Ok(Morphism { from: source.indices.clone(), to: target.indices.clone(), maps, images, remainders })
}

#[derive(Clone, Debug)]
pub struct ElementReduction {
    pub reduction: TowerReduction,
    pub factorization: MultivarFactorization,
    /// `d' = d / c`, with `f(x_0) = d' u`.
    pub d_prime: Series,
    pub u: Series,
    pub fx: Series,
    /// Indices `j_e` where `F(q_{0,j_0}, ..)` was expanded.
    pub indices: Vec<usize>,
    /// `F(q_{0,j_0}, ..)` in the fraction variables.
    pub fq: MultiPoly,
    /// `F(a_{0,j_0}, ..)`, the constant term of `fq`.
    pub constant: Series,
    /// Every non-constant coefficient of `fq` has value above the constant.
    pub unit_shape: bool,
}

/// `c f = F(X_0, h_0(X_0), ..)` then `F(x_0, ..) = d u`, so `f(x_0) = (d/c) u`.
pub fn element_reduction_report(
    f: &MultiPoly,
    tower: &Tower,
    indices: Option<&[usize]>,
    prec: &GroupElement,
) -> Result<ElementReduction> {
    let field = tower.field().clone();
    let spec = tower.spec()?;
    let f0 = f.rename(vec!["X".into()]);
    let reduction = reduce_mod_tower_strict(&f0, &spec)?;
    let top = reduction.top;
    let big_f = reduction.f.clone();
    let k = top + 1;
    let names: Vec<String> = (0..k).map(|e| format!("X{e}")).collect();
    let big_f = MultiPoly::from_terms(
        &field,
        names.clone(),
        big_f.terms().iter().map(|(e, c)| {
            debug_assert!(e[k..].iter().all(|&x| x == 0));
            (e[..k].to_vec(), c.clone())
        }),
    );
    let levels = &tower.levels()[..k];
    let ys: Vec<Series> = levels.iter().map(|l| l.x.clone()).collect();
    let seqs: Vec<PseudoSequence> = levels.iter().map(|l| l.seq.clone()).collect();
    let hs: Vec<MultiPoly> = levels.iter().map(|l| l.h.clone().expect("tower has h on these levels")).collect();
    let factorization = scale_and_factor_multivar(&big_f, &ys, &seqs, &hs, &[], prec)?;
    let fac = &factorization.factorization;
    let fx = f0.eval(std::slice::from_ref(&ys[0]));
    let d_prime = unit_quotient(&fac.d, &reduction.c, &(prec + &fac.d.exact_val()?))?;
    if !(&d_prime * &fac.u).agrees_with(&fx) {
        return Err(Error::WitnessMismatch("(d/c) u differs from f(x_0)".into()));
    }
    let chosen: Vec<usize> = match indices {
        Some(js) => {
            if js.len() != k || js.iter().zip(&factorization.nus).any(|(j, nu)| j <= nu) {
                return Err(Error::Precondition(format!("indices {js:?} must lie past thresholds {:?}", factorization.nus)));
            }
            js.to_vec()
        }
        None => fac.index.clone(),
    };
    let mut fq = big_f.clone();
    for (e, &j) in chosen.iter().enumerate() {
        fq = fq.substitute(e, &q_poly(&levels[e], j, &names, e)?);
    }
    let fq = fq.rename(chosen.iter().enumerate().map(|(e, &j)| var_name(e, j)).collect());
    let constant = fq.constant_term();
    let vc = constant.val();
    let unit_shape = vc.is_exact()
        && !vc.value.is_infinite()
        && fq.terms().iter().all(|(e, c)| e.iter().all(|&x| x == 0) || c.val().value > vc.value);
    Ok(ElementReduction {
        reduction,
        u: fac.u.clone(),
        factorization,
        d_prime,
        fx,
        indices: chosen,
        fq,
        constant,
        unit_shape,
    })
}
