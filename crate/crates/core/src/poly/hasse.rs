use crate::error::{Error, Result};
use crate::series::Series;

use super::MultiPoly;

/// `D^(n)` with respect to variable `idx`: `X^m -> binom(m, n) X^(m-n)`.
pub fn hasse_derivative(f: &MultiPoly, idx: usize, n: u32) -> MultiPoly {
    if n == 0 {
        return f.clone();
    }
    let field = f.field();
    let mut out = MultiPoly::with_vars(field, f.vars().to_vec());
    for (e, c) in f.terms() {
        if e[idx] < n {
            continue;
        }
        let b = field.binomial(e[idx] as u64, n as u64);
        if b == 0 {
            continue;
        }
        let mut e2 = e.clone();
        e2[idx] -= n;
        out.add_term(e2, c.scale(b));
    }
    out
}

/// Mixed derivative `D^(l_0) ... D^(l_r)` over all variables.
pub fn hasse_multi(f: &MultiPoly, orders: &[u32]) -> MultiPoly {
    assert_eq!(orders.len(), f.vars().len(), "one order per variable");
    orders.iter().enumerate().fold(f.clone(), |acc, (i, &n)| hasse_derivative(&acc, i, n))
}

/// Taylor coefficients `(n, D^(n) f(center))` for `n = 0..=deg f`, including
/// zero terms. `f` may only involve variable `idx`.
pub fn taylor_expand(f: &MultiPoly, idx: usize, center: &Series) -> Result<Vec<(u32, Series)>> {
    if idx >= f.vars().len() {
        return Err(Error::UnknownVariable(format!("#{idx}")));
    }
    if !f.only_uses(idx) {
        return Err(Error::Precondition("taylor_expand needs a polynomial in one variable".into()));
    }
    let field = f.field();
    let deg = match f.degree_in(idx) {
        Some(d) => d,
        None => return Ok(vec![(0, Series::zero(field))]),
    };
    let mut point = vec![Series::zero(field); f.vars().len()];
    point[idx] = center.clone();
    Ok((0..=deg).map(|n| (n, hasse_derivative(f, idx, n).eval(&point))).collect())
}
