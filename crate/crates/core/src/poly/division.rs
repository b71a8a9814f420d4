use crate::error::{Error, Result};
use crate::field::FieldConfig;
use crate::group::GroupElement;
use crate::series::Series;

use super::MultiPoly;

/// `c * f = g1 * h + g0` with `deg g0 < deg h`.
#[derive(Clone, Debug)]
pub struct PseudoDivision {
    pub c: Series,
    pub g1: MultiPoly,
    pub g0: MultiPoly,
}

/// Triangular system `X_{i+1} = h_i(X_i)`, `i = 0..n`.
#[derive(Clone, Debug)]
pub struct TowerSpec {
    levels: Vec<MultiPoly>,
}

impl TowerSpec {
    /// Each level is a univariate polynomial of degree > 1 with coefficients
    /// in the valuation ring and an exactly known leading value.
    pub fn new(levels: Vec<MultiPoly>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::Precondition("tower needs at least one level".into()));
        }
        let field = levels[0].field().clone();
        for (i, h) in levels.iter().enumerate() {
            if h.vars().len() != 1 {
                return Err(Error::Precondition(format!("level {i} is not univariate")));
            }
            if h.field() != &field {
                return Err(Error::ConfigMismatch);
            }
            let d = h.degree().unwrap_or(0);
            if d < 2 {
                return Err(Error::Precondition(format!("level {i} has degree {d}, need > 1")));
            }
            if !h.has_integral_coeffs()? {
                return Err(Error::Precondition(format!("level {i} has a coefficient of negative value")));
            }
            let lc = h.coeff(&[d]).expect("leading coefficient present");
            if !lc.val().is_exact() {
                return Err(Error::PrecisionTooLow(format!("leading coefficient of level {i}")));
            }
        }
        Ok(TowerSpec { levels })
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn field(&self) -> &FieldConfig {
        self.levels[0].field()
    }

    pub fn level(&self, i: usize) -> &MultiPoly {
        &self.levels[i]
    }

    pub fn levels(&self) -> &[MultiPoly] {
        &self.levels
    }

    pub fn degree(&self, i: usize) -> u32 {
        self.levels[i].degree().unwrap_or(0)
    }

    pub fn leading_coeff(&self, i: usize) -> &Series {
        self.levels[i].coeff(&[self.degree(i)]).expect("leading coefficient present")
    }

    /// `X0, ..., Xn` for a tower of `n` levels.
    pub fn vars(&self) -> Vec<String> {
        tower_vars(self.levels.len())
    }

    /// `h_i(X_i)` over [`TowerSpec::vars`].
    pub fn level_in_vars(&self, i: usize) -> MultiPoly {
        let vars = self.vars();
        let mut p = MultiPoly::with_vars(self.field(), vars.clone());
        for (e, c) in self.levels[i].terms() {
            let mut e2 = vec![0; vars.len()];
            e2[i] = e[0];
            p.add_term(e2, c.clone());
        }
        p
    }
}

pub fn tower_vars(n: usize) -> Vec<String> {
    (0..=n).map(|i| format!("X{i}")).collect()
}

fn shift_var(p: &MultiPoly, idx: usize, k: u32) -> MultiPoly {
    MultiPoly::from_terms(
        p.field(),
        p.vars().to_vec(),
        p.terms().iter().map(|(e, c)| {
            let mut e2 = e.clone();
            e2[idx] += k;
            (e2, c.clone())
        }),
    )
}

/// Pseudo-division of univariate polynomials over the same variable.
pub fn pseudo_divide(f: &MultiPoly, h: &MultiPoly) -> Result<PseudoDivision> {
    if f.vars().len() != 1 || f.vars() != h.vars() {
        return Err(Error::Precondition("pseudo_divide expects univariate polynomials in the same variable".into()));
    }
    pseudo_divide_in(f, h, 0)
}

/// Pseudo-division in variable `idx`. `h` may only involve `X_idx`; the
/// other variables of `f` ride along in the coefficients. The multiplier is
/// `lc(h)^(deg f - deg h + 1)`.
pub fn pseudo_divide_in(f: &MultiPoly, h: &MultiPoly, idx: usize) -> Result<PseudoDivision> {
    if !h.only_uses(idx) {
        return Err(Error::Precondition("divisor involves other variables".into()));
    }
    let dh = match h.degree_in(idx) {
        Some(d) if d >= 1 => d,
        _ => return Err(Error::Precondition("divisor must have degree >= 1".into())),
    };
    let field = f.field();
    let zero = MultiPoly::with_vars(field, f.vars().to_vec());
    let df = match f.degree_in(idx) {
        Some(d) if d >= dh => d,
        _ => return Ok(PseudoDivision { c: Series::one(field), g1: zero, g0: f.clone() }),
    };
    let mut lc_exp = vec![0; f.vars().len()];
    lc_exp[idx] = dh;
    let lc = h.coeff(&lc_exp).expect("leading coefficient present").clone();

    let mut q = zero;
    let mut r = f.clone();
    let mut remaining = df - dh + 1;
    while let Some(dr) = r.degree_in(idx) {
        if dr < dh {
            break;
        }
        let lead = r.coeffs_in(idx).swap_remove(dr as usize);
        let s = shift_var(&lead, idx, dr - dh);
        q = &q.scale(&lc) + &s;
        r = &r.scale(&lc) - &(&s * h);
        remaining -= 1;
    }
    let tail = lc.pow(remaining as u64);
    Ok(PseudoDivision {
        c: lc.pow((df - dh + 1) as u64),
        g1: q.scale(&tail),
        g0: r.scale(&tail),
    })
}

#[derive(Clone, Debug)]
pub struct TowerReduction {
    /// Accumulated multiplier with `c * f = F(X_0, h_0(X_0), ...)`.
    pub c: Series,
    /// `F` over `X0..Xn`.
    pub f: MultiPoly,
    /// Highest variable index that `F` may involve.
    pub top: usize,
}

/// Rewrites `f(X_0)` through every level of the tower, left to right.
/// Degree bounds hold for `X_0..X_{n-1}`; `X_n` is unbounded.
pub fn reduce_mod_tower(f: &MultiPoly, tower: &TowerSpec) -> Result<TowerReduction> {
    let (mut c, mut big_f) = start(f, tower)?;
    for i in 0..tower.len() {
        step(&mut c, &mut big_f, tower, i)?;
    }
    Ok(TowerReduction { c, f: big_f, top: tower.len() })
}

/// Like [`reduce_mod_tower`] but stops at the first level `m` where
/// `deg_{X_m} F < deg h_m`, so every variable that occurs is bounded.
/// Fails with `TowerTooShort` when no such level exists.
pub fn reduce_mod_tower_strict(f: &MultiPoly, tower: &TowerSpec) -> Result<TowerReduction> {
    let (mut c, mut big_f) = start(f, tower)?;
    for i in 0..tower.len() {
        if big_f.degree_in(i).unwrap_or(0) < tower.degree(i) {
            return Ok(TowerReduction { c, f: big_f, top: i });
        }
        step(&mut c, &mut big_f, tower, i)?;
    }
    let n = tower.len();
    Err(Error::TowerTooShort { have: n, required: n + 1, top_degree: big_f.degree_in(n).unwrap_or(0) })
}

fn start(f: &MultiPoly, tower: &TowerSpec) -> Result<(Series, MultiPoly)> {
    if f.vars().len() != 1 {
        return Err(Error::Precondition("expected a polynomial in X_0 only".into()));
    }
    if f.field() != tower.field() {
        return Err(Error::ConfigMismatch);
    }
    let vars = tower.vars();
    let f0 = f.rename(vec![vars[0].clone()]).embed(&vars)?;
    Ok((Series::one(f.field()), f0))
}

/// `h_i`-adic expansion in `X_i`, then `h_i(X_i) -> X_{i+1}`.
fn step(c: &mut Series, big_f: &mut MultiPoly, tower: &TowerSpec, i: usize) -> Result<()> {
    let h = tower.level_in_vars(i);
    let dh = tower.degree(i);
    let mut digits: Vec<MultiPoly> = Vec::new();
    let mut mult = Series::one(c.field());
    let mut cur = big_f.clone();
    // Invariant: mult * F = cur * h^len + sum_k digits[k] * h^k.
    while cur.degree_in(i).unwrap_or(0) >= dh {
        let pd = pseudo_divide_in(&cur, &h, i)?;
        for d in &mut digits {
            *d = d.scale(&pd.c);
        }
        digits.push(pd.g0);
        mult = &mult * &pd.c;
        cur = pd.g1;
    }
    digits.push(cur);
    let mut out = MultiPoly::with_vars(c.field(), big_f.vars().to_vec());
    for (k, d) in digits.iter().enumerate() {
        out = &out + &shift_var(d, i + 1, k as u32);
    }
    *c = &*c * &mult;
    *big_f = out;
    Ok(())
}

/// Substitutes `X_{i+1} <- h_i(X_i)` from the top down and returns the
/// result as a polynomial in `X0`. Zero exactly when `P` lies in the ideal
/// generated by the `X_{i+1} - h_i(X_i)`.
pub fn ideal_membership_witness(p: &MultiPoly, tower: &TowerSpec) -> Result<MultiPoly> {
    if p.field() != tower.field() {
        return Err(Error::ConfigMismatch);
    }
    let vars = tower.vars();
    let mut acc = p.embed(&vars)?;
    for i in (0..tower.len()).rev() {
        acc = acc.substitute(i + 1, &tower.level_in_vars(i));
    }
    acc.embed(&vars[..1])
}

/// Divides by the leading monomial of the coefficient of least value, so
/// that the result has integral coefficients and at least one unit
/// coefficient. Returns `(content, normalized)`.
pub fn content_normalize(p: &MultiPoly) -> Result<(Series, MultiPoly)> {
    let field = p.field();
    let mut best: Option<(GroupElement, crate::field::Coeff)> = None;
    for c in p.terms().values() {
        let v = c.exact_val()?;
        if best.as_ref().map_or(true, |(b, _)| v < *b) {
            let lc = c.leading().expect("nonzero coefficient").1;
            best = Some((v, lc));
        }
    }
    let (g, lc) = match best {
        Some(b) => b,
        None => return Ok((Series::one(field), p.clone())),
    };
    let inv = field.inv(lc).expect("nonzero leading coefficient");
    let content = Series::monomial(field, lc, g.clone());
    let normalized = MultiPoly::from_terms(
        field,
        p.vars().to_vec(),
        p.terms().iter().map(|(e, c)| (e.clone(), c.mul_monomial(inv, &-&g))),
    );
    Ok((content, normalized))
}
