//! `g(x) = d u` with `val(u) = 0` for polynomials of degree below the
//! minimal witness degree, in one and several variables.

use crate::error::{Error, Result};
use crate::group::{GroupElement, Value};
use crate::poly::{hasse_derivative, hasse_multi, MultiPoly};
use crate::series::{Series, ValResult};
use crate::threshold::{certify_grid, BetaTensor, Mode};

use super::PseudoSequence;

#[derive(Clone, Debug)]
pub struct UnitFactorization {
    pub d: Series,
    pub u: Series,
    /// The factored element `g(x)`.
    pub target: Series,
    /// Window index (one per variable) where the factorization was read off.
    pub index: Vec<usize>,
    /// Values of the Taylor terms at the chosen index; `inf` for zero terms.
    /// Entry 0 is the constant term `g(v_i)`.
    pub taylor_values: Vec<Value>,
    /// Values of the non-constant coefficients of `u` as a polynomial in the
    /// fraction variables; all positive.
    pub unit_coeff_values: Vec<Value>,
}

fn exact(v: ValResult, what: &str) -> Result<Value> {
    if v.is_exact() {
        Ok(v.value)
    } else {
        Err(Error::PrecisionTooLow(format!("value of {what} is only bounded below by {}", v.value)))
    }
}

fn finite(v: &Value, what: &str) -> Result<GroupElement> {
    v.finite().cloned().ok_or_else(|| Error::Degenerate(format!("{what} is zero")))
}

/// `num / den` correct to relative precision `rel`.
fn quotient(num: &Series, den: &Series, rel: &GroupElement) -> Result<Series> {
    let vd = den.exact_val()?;
    let cap = if den.terms().len() == 1 && den.is_exact() { Value::Infinity } else { Value::Finite(rel - &vd) };
    let inv = den.invert(&cap)?;
    Ok(num * &inv)
}

fn check_product(f: &UnitFactorization) -> Result<()> {
    if f.u.val().value != Value::Finite(GroupElement::zero(f.u.field().rank())) || !f.u.val().is_exact() {
        return Err(Error::WitnessMismatch(format!("val(u) = {} is not 0", f.u.val().value)));
    }
    if !(&f.d * &f.u).agrees_with(&f.target) {
        return Err(Error::WitnessMismatch("d * u differs from the target".into()));
    }
    Ok(())
}

/// Unit factorization for univariate `g` with `deg g < s_min`: picks
/// the first window index where the Taylor terms around `v_i` have pairwise
/// distinct values with the constant term strictly smallest.
pub fn factor_below_degree(
    g: &MultiPoly,
    x: &Series,
    s: &PseudoSequence,
    s_min: u32,
    rel: &GroupElement,
) -> Result<UnitFactorization> {
    if g.vars().len() != 1 {
        return Err(Error::Precondition("factor_below_degree needs a univariate polynomial".into()));
    }
    let deg = g.degree().ok_or_else(|| Error::Degenerate("g is zero".into()))?;
    if deg >= s_min {
        return Err(Error::Precondition(format!("deg g = {deg} is not below the witness degree {s_min}")));
    }
    if s.len() < 2 {
        return Err(Error::TooShort { len: s.len(), min: 2 });
    }
    let derivs: Vec<MultiPoly> = (0..=deg).map(|n| hasse_derivative(g, 0, n)).collect();
    for i in 0..s.len() - 1 {
        let vi = &s.window()[i];
        let gap = exact((x - vi).val(), "x - v_i")?;
        let gap = finite(&gap, "x - v_i")?;
        let mut values = Vec::with_capacity(derivs.len());
        for (n, dn) in derivs.iter().enumerate() {
            let v = exact(dn.eval(std::slice::from_ref(vi)).val(), "a Taylor coefficient")?;
            values.push(v.shift(&gap.times(n as i64)));
        }
        if !separates(&values) {
            continue;
        }
        let d = g.eval(std::slice::from_ref(vi));
        let target = g.eval(std::slice::from_ref(x));
        let u = quotient(&target, &d, rel)?;
        let vd = finite(&values[0], "g(v_i)")?;
        let step = finite(&exact(s.gamma_profile()[i].clone(), "v_{i+1} - v_i")?, "v_{i+1} - v_i")?;
        let unit_coeff_values = (1..derivs.len())
            .map(|n| {
                let base = &values[n];
                match base {
                    Value::Infinity => Value::Infinity,
                    Value::Finite(_) => {
                        let dn = exact(derivs[n].eval(std::slice::from_ref(vi)).val(), "a Taylor coefficient")
                            .expect("checked above");
                        dn.shift(&step.times(n as i64)).shift(&-&vd)
                    }
                }
            })
            .collect();
        let fac = UnitFactorization { d, u, target, index: vec![i], taylor_values: values, unit_coeff_values };
        check_product(&fac)?;
        return Ok(fac);
    }
    Err(Error::NoSeparatingIndex)
}

/// Nonzero values pairwise distinct and entry 0 finite and strictly least.
fn separates(values: &[Value]) -> bool {
    let v0 = &values[0];
    if v0.is_infinite() {
        return false;
    }
    let mut finite: Vec<&Value> = values.iter().filter(|v| !v.is_infinite()).collect();
    if finite.iter().skip(1).any(|v| *v <= v0) {
        return false;
    }
    finite.sort();
    finite.windows(2).all(|w| w[0] != w[1])
}

#[derive(Clone, Debug)]
pub struct Localized {
    /// `d / t`, of value at least zero.
    pub ratio: Series,
    pub u: Series,
    pub factorization: UnitFactorization,
}

/// Writes `g(x)/t` as `(d/t) u` with `val(d/t) >= 0` and `val(u) = 0`.
pub fn localize_representation(
    g: &MultiPoly,
    t: &Series,
    x: &Series,
    s: &PseudoSequence,
    s_min: u32,
    rel: &GroupElement,
) -> Result<Localized> {
    let vt = t.exact_val()?;
    let gx = g.eval(std::slice::from_ref(x));
    let vg = finite(&exact(gx.val(), "g(x)")?, "g(x)")?;
    if vg < vt {
        return Err(Error::ValueObstruction(format!("val(g(x)) = {vg} is below val(t) = {vt}")));
    }
    let fac = factor_below_degree(g, x, s, s_min, rel)?;
    let ratio = quotient(&fac.d, t, rel)?;
    if ratio.exact_val()?.is_negative() {
        return Err(Error::WitnessMismatch("d/t has negative value".into()));
    }
    let tgt = quotient(&gx, t, rel)?;
    if !(&ratio * &fac.u).agrees_with(&tgt) {
        return Err(Error::WitnessMismatch("(d/t) u differs from g(x)/t".into()));
    }
    Ok(Localized { ratio, u: fac.u.clone(), factorization: fac })
}

#[derive(Clone, Debug)]
pub struct MultivarFactorization {
    pub factorization: UnitFactorization,
    pub nus: Vec<usize>,
    /// `r_s = 2 max_{e<=s} deg h_e - 2`.
    pub rs: Vec<u32>,
    pub scaled_ys: Vec<Series>,
    /// Grid points with every `i_e > nu_e` where value equality was checked.
    pub grid_checked: usize,
}

fn odometer(idx: &mut [usize], lo: &[usize], hi: &[usize]) -> bool {
    for a in (0..idx.len()).rev() {
        if idx[a] < hi[a] {
            idx[a] += 1;
            return true;
        }
        idx[a] = lo[a];
    }
    false
}

/// Multivariate version over a tower `y_{e+1} = h_e(y_e)`: scales `y_e` by
/// `b_{e-1}^{r_{e-1}}` for `e >= 2`, certifies threshold indices, checks
/// `val g(y~) = val g(v~_i)` past them and reads off `d`, `u`.
pub fn scale_and_factor_multivar(
    g: &MultiPoly,
    ys: &[Series],
    seqs: &[PseudoSequence],
    hs: &[MultiPoly],
    bs: &[Series],
    rel: &GroupElement,
) -> Result<MultivarFactorization> {
    let k = g.vars().len();
    if ys.len() != k || seqs.len() != k || hs.len() != k {
        return Err(Error::Precondition(format!(
            "{k} variables but {} points, {} sequences, {} tower polynomials",
            ys.len(),
            seqs.len(),
            hs.len()
        )));
    }
    for e in 0..k {
        let dh = hs[e].degree().unwrap_or(0);
        let dg = g.degree_in(e).unwrap_or(0);
        if dg >= dh {
            return Err(Error::Precondition(format!("deg_Y{e} g = {dg} is not below deg h_{e} = {dh}")));
        }
        if seqs[e].len() < 3 {
            return Err(Error::TooShort { len: seqs[e].len(), min: 3 });
        }
        if e + 1 < k && !hs[e].eval(std::slice::from_ref(&ys[e])).agrees_with(&ys[e + 1]) {
            return Err(Error::Precondition(format!("y_{} != h_{e}(y_{e})", e + 1)));
        }
    }
    let max_deg: Vec<u32> = hs
        .iter()
        .scan(0u32, |m, h| {
            *m = (*m).max(h.degree().unwrap_or(0));
            Some(*m)
        })
        .collect();
    let rs: Vec<u32> = max_deg.iter().map(|m| 2 * m - 2).collect();
    let scaling: Vec<Series> = if bs.is_empty() {
        vec![Series::one(g.field()); k]
    } else {
        if bs.len() != k.saturating_sub(2) {
            return Err(Error::Precondition(format!("expected {} scaling elements, got {}", k.saturating_sub(2), bs.len())));
        }
        // b_s must have value above every term of the sequences at levels <= s
        for (idx, b) in bs.iter().enumerate() {
            let s = idx + 1;
            let vb = b.exact_val()?;
            for (e, seq) in seqs.iter().enumerate().take(s + 1) {
                for (i, v) in seq.window().iter().enumerate() {
                    if v.val().exact_finite().map_or(false, |vv| vb <= *vv) {
                        return Err(Error::Precondition(format!("val(b_{s}) is not above val(v_{e},{i})")));
                    }
                }
            }
        }
        (0..k).map(|e| if e >= 2 { bs[e - 2].pow(rs[e - 1] as u64) } else { Series::one(g.field()) }).collect()
    };
    let ty: Vec<Series> = ys.iter().zip(&scaling).map(|(y, c)| y * c).collect();
    let tv: Vec<Vec<Series>> = seqs.iter().zip(&scaling).map(|(s, c)| s.window().iter().map(|v| v * c).collect()).collect();

    // gamma_{e,j} = val(v~_{e,j+1} - v~_{e,j}), j over all but the last term
    let mut gammas: Vec<Vec<GroupElement>> = Vec::with_capacity(k);
    for (e, w) in tv.iter().enumerate() {
        let mut col = Vec::with_capacity(w.len() - 1);
        for j in 0..w.len() - 1 {
            col.push(finite(&exact((&w[j + 1] - &w[j]).val(), "a sequence step")?, &format!("step {j} of sequence {e}"))?);
        }
        gammas.push(col);
    }
    let degs: Vec<u32> = (0..k).map(|e| g.degree_in(e).unwrap_or(0)).collect();
    let shape: Vec<usize> = degs.iter().map(|&d| d as usize + 1).collect();
    let multipliers: Vec<Vec<i64>> = degs.iter().map(|&d| (0..=d as i64).collect()).collect();
    let mut beta_err = None;
    let betas = BetaTensor::from_fn(shape.clone(), |l| {
        let orders: Vec<u32> = l.iter().map(|&x| x as u32).collect();
        let val = hasse_multi(g, &orders).eval(&ty).val();
        match exact(val, "a derivative at y") {
            Ok(v) => v.finite().cloned(),
            Err(err) => {
                beta_err.get_or_insert(err);
                None
            }
        }
    });
    if let Some(err) = beta_err {
        return Err(err);
    }
    let nus = certify_grid(&betas, &multipliers, &gammas, Mode::Distinct)?;

    let target = g.eval(&ty);
    let vt = exact(target.val(), "g(y~)")?;
    let lo: Vec<usize> = nus.iter().map(|n| n + 1).collect();
    let hi: Vec<usize> = gammas.iter().map(|c| c.len() - 1).collect();
    let mut idx = lo.clone();
    let mut grid_checked = 0;
    let mut chosen: Option<(Vec<usize>, Vec<Value>)> = None;
    loop {
        let point: Vec<Series> = idx.iter().enumerate().map(|(e, &i)| tv[e][i].clone()).collect();
        let vp = exact(g.eval(&point).val(), "g(v~)")?;
        if vp != vt {
            // some Taylor term still undercuts the constant one: the window
            // ends before the values settle
            return Err(Error::HorizonExhausted { axis: k - 1, horizon: hi[k - 1] });
        }
        grid_checked += 1;
        if chosen.is_none() {
            let mut values = Vec::new();
            let mut l = vec![0usize; k];
            let top: Vec<usize> = degs.iter().map(|&d| d as usize).collect();
            let zero = vec![0usize; k];
            loop {
                let orders: Vec<u32> = l.iter().map(|&x| x as u32).collect();
                let dv = exact(hasse_multi(g, &orders).eval(&point).val(), "a Taylor coefficient")?;
                let shift = l.iter().enumerate().fold(GroupElement::zero(g.field().rank()), |acc, (e, &le)| {
                    &acc + &gammas[e][idx[e]].times(le as i64)
                });
                values.push(dv.shift(&shift));
                if !odometer(&mut l, &zero, &top) {
                    break;
                }
            }
            if separates_multi(&values) {
                chosen = Some((idx.clone(), values));
            }
        }
        if !odometer(&mut idx, &lo, &hi) {
            break;
        }
    }
    let (index, taylor_values) = chosen.ok_or(Error::NoSeparatingIndex)?;
    let point: Vec<Series> = index.iter().enumerate().map(|(e, &i)| tv[e][i].clone()).collect();
    let d = g.eval(&point);
    let u = quotient(&target, &d, rel)?;
    let vd = finite(&taylor_values[0], "g(v~)")?;
    let unit_coeff_values = taylor_values[1..].iter().map(|v| v.shift(&-&vd)).collect();
    let factorization = UnitFactorization { d, u, target, index, taylor_values, unit_coeff_values };
    check_product(&factorization)?;
    Ok(MultivarFactorization { factorization, nus, rs, scaled_ys: ty, grid_checked })
}

/// Constant term finite and strictly below every other term.
fn separates_multi(values: &[Value]) -> bool {
    !values[0].is_infinite() && values[1..].iter().all(|v| *v > values[0])
}
