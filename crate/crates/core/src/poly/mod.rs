//! Sparse multivariate polynomials with truncated-series coefficients.

mod division;
mod hasse;

pub use division::{
    content_normalize, ideal_membership_witness, pseudo_divide, pseudo_divide_in, reduce_mod_tower,
    reduce_mod_tower_strict, tower_vars, PseudoDivision, TowerReduction, TowerSpec,
};
pub use hasse::{hasse_derivative, hasse_multi, taylor_expand};

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::field::FieldConfig;
use crate::series::Series;

pub type Exponents = Vec<u32>;

#[derive(Clone, PartialEq, Eq)]
pub struct MultiPoly {
    field: FieldConfig,
    vars: Vec<String>,
    terms: BTreeMap<Exponents, Series>,
}

impl MultiPoly {
    pub fn zero(field: &FieldConfig, vars: &[&str]) -> Self {
        MultiPoly { field: field.clone(), vars: vars.iter().map(|s| s.to_string()).collect(), terms: BTreeMap::new() }
    }

    pub fn with_vars(field: &FieldConfig, vars: Vec<String>) -> Self {
        MultiPoly { field: field.clone(), vars, terms: BTreeMap::new() }
    }

    pub fn constant(field: &FieldConfig, vars: &[&str], c: Series) -> Self {
        let mut p = Self::zero(field, vars);
        p.insert(vec![0; vars.len()], c);
        p
    }

    pub fn var(field: &FieldConfig, vars: &[&str], name: &str) -> Result<Self> {
        let mut p = Self::zero(field, vars);
        let idx = p.var_index(name)?;
        let mut e = vec![0; vars.len()];
        e[idx] = 1;
        p.insert(e, Series::one(field));
        Ok(p)
    }

    /// Univariate polynomial from coefficients in ascending degree order.
    pub fn univariate(field: &FieldConfig, var: &str, coeffs: Vec<Series>) -> Self {
        let mut p = Self::zero(field, &[var]);
        for (k, c) in coeffs.into_iter().enumerate() {
            p.insert(vec![k as u32], c);
        }
        p
    }

    pub fn from_terms(field: &FieldConfig, vars: Vec<String>, terms: impl IntoIterator<Item = (Exponents, Series)>) -> Self {
        let mut p = Self::with_vars(field, vars);
        for (e, c) in terms {
            p.add_term(e, c);
        }
        p
    }

    /// Adds `c * X^e` into the polynomial.
    pub fn add_term(&mut self, e: Exponents, c: Series) {
        assert_eq!(e.len(), self.vars.len(), "exponent arity");
        match self.terms.get(&e) {
            Some(old) => {
                let sum = old + &c;
                self.insert(e, sum);
            }
            None => self.insert(e, c),
        }
    }

    fn insert(&mut self, e: Exponents, c: Series) {
        if c.is_zero_to_prec() {
            self.terms.remove(&e);
        } else {
            self.terms.insert(e, c);
        }
    }

    pub fn field(&self) -> &FieldConfig {
        &self.field
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn terms(&self) -> &BTreeMap<Exponents, Series> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn nterms(&self) -> usize {
        self.terms.len()
    }

    pub fn var_index(&self, name: &str) -> Result<usize> {
        self.vars.iter().position(|v| v == name).ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub fn coeff(&self, e: &[u32]) -> Option<&Series> {
        self.terms.get(e)
    }

    /// Degree in one variable; `None` for the zero polynomial.
    pub fn degree_in(&self, idx: usize) -> Option<u32> {
        self.terms.keys().map(|e| e[idx]).max()
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    /// Degree of a univariate polynomial (first variable).
    pub fn degree(&self) -> Option<u32> {
        self.degree_in(0)
    }

    /// True when no variable other than `idx` occurs.
    pub fn only_uses(&self, idx: usize) -> bool {
        self.terms.keys().all(|e| e.iter().enumerate().all(|(i, &k)| i == idx || k == 0))
    }

    /// Coefficients in ascending degree order; requires a single variable.
    pub fn univariate_coeffs(&self) -> Result<Vec<Series>> {
        if self.vars.len() != 1 {
            return Err(Error::Precondition(format!("expected a univariate polynomial, got variables {:?}", self.vars)));
        }
        let deg = match self.degree() {
            Some(d) => d as usize,
            None => return Ok(Vec::new()),
        };
        let mut out = vec![Series::zero(&self.field); deg + 1];
        for (e, c) in &self.terms {
            out[e[0] as usize] = c.clone();
        }
        Ok(out)
    }

    /// Coefficient polynomials of `X_idx^k`, each with `X_idx` removed
    /// (exponent set to zero), for `k = 0..=deg`.
    pub fn coeffs_in(&self, idx: usize) -> Vec<MultiPoly> {
        let deg = self.degree_in(idx).unwrap_or(0) as usize;
        let mut out = vec![MultiPoly::with_vars(&self.field, self.vars.clone()); deg + 1];
        for (e, c) in &self.terms {
            let mut e2 = e.clone();
            let k = e2[idx] as usize;
            e2[idx] = 0;
            out[k].insert(e2, c.clone());
        }
        out
    }

    /// `sum_k coeffs[k] * X_idx^k`.
    pub fn from_coeffs_in(field: &FieldConfig, vars: Vec<String>, idx: usize, coeffs: &[MultiPoly]) -> Self {
        let mut p = MultiPoly::with_vars(field, vars);
        for (k, ck) in coeffs.iter().enumerate() {
            for (e, c) in &ck.terms {
                let mut e2 = e.clone();
                e2[idx] += k as u32;
                p.add_term(e2, c.clone());
            }
        }
        p
    }

    /// Same polynomial over a different variable list; every used variable
    /// must appear in `vars`.
    pub fn embed(&self, vars: &[String]) -> Result<MultiPoly> {
        let map: Vec<Option<usize>> = self.vars.iter().map(|v| vars.iter().position(|w| w == v)).collect();
        let mut p = MultiPoly::with_vars(&self.field, vars.to_vec());
        for (e, c) in &self.terms {
            let mut e2 = vec![0; vars.len()];
            for (i, &k) in e.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                match map[i] {
                    Some(j) => e2[j] += k,
                    None => return Err(Error::UnknownVariable(self.vars[i].clone())),
                }
            }
            p.add_term(e2, c.clone());
        }
        Ok(p)
    }

    /// Renames variables positionally.
    pub fn rename(&self, vars: Vec<String>) -> MultiPoly {
        assert_eq!(vars.len(), self.vars.len());
        MultiPoly { field: self.field.clone(), vars, terms: self.terms.clone() }
    }

    fn same_vars(&self, other: &MultiPoly) {
        assert_eq!(self.vars, other.vars, "polynomials over different variable lists");
    }

    pub fn neg(&self) -> MultiPoly {
        MultiPoly {
            field: self.field.clone(),
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c.neg())).collect(),
        }
    }

    pub fn scale(&self, s: &Series) -> MultiPoly {
        let mut p = MultiPoly::with_vars(&self.field, self.vars.clone());
        for (e, c) in &self.terms {
            p.insert(e.clone(), c * s);
        }
        p
    }

    pub fn pow(&self, n: u32) -> MultiPoly {
        let mut acc = MultiPoly::constant_like(self, Series::one(&self.field));
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    pub fn constant_like(other: &MultiPoly, c: Series) -> MultiPoly {
        let mut p = MultiPoly::with_vars(&other.field, other.vars.clone());
        p.insert(vec![0; other.vars.len()], c);
        p
    }

    /// Constant term.
    pub fn constant_term(&self) -> Series {
        self.terms.get(&vec![0; self.vars.len()]).cloned().unwrap_or_else(|| Series::zero(&self.field))
    }

    /// Evaluates at a point given as one series per variable.
    pub fn eval(&self, point: &[Series]) -> Series {
        assert_eq!(point.len(), self.vars.len(), "point arity");
        let mut powers: Vec<Vec<Series>> = point.iter().map(|x| vec![Series::one(&self.field), x.clone()]).collect();
        let mut acc = Series::zero(&self.field);
        for (e, c) in &self.terms {
            let mut term = c.clone();
            for (i, &k) in e.iter().enumerate() {
                let cache = &mut powers[i];
                while cache.len() <= k as usize {
                    let next = cache.last().unwrap() * &point[i];
                    cache.push(next);
                }
                if k > 0 {
                    term = &term * &cache[k as usize];
                }
            }
            acc = &acc + &term;
        }
        acc
    }

    /// Substitutes `X_idx <- repl`, where `repl` lives over the same variables.
    pub fn substitute(&self, idx: usize, repl: &MultiPoly) -> MultiPoly {
        self.same_vars(repl);
        let coeffs = self.coeffs_in(idx);
        // Horner in the replaced variable.
        let mut acc = MultiPoly::with_vars(&self.field, self.vars.clone());
        for ck in coeffs.iter().rev() {
            acc = &(&acc * repl) + ck;
        }
        acc
    }

    /// All coefficients lie in the valuation ring.
    pub fn has_integral_coeffs(&self) -> Result<bool> {
        for c in self.terms.values() {
            if !c.is_in_valuation_ring()? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Parses `e1,e2,.. => series; ...` (or `0`).
    pub fn parse(text: &str, field: &FieldConfig, vars: &[&str]) -> Result<MultiPoly> {
        let mut p = MultiPoly::zero(field, vars);
        let t = text.trim();
        if t == "0" || t.is_empty() {
            return Ok(p);
        }
        for part in t.split(';') {
            let (lhs, rhs) = part
                .split_once("=>")
                .ok_or_else(|| Error::parse(text, format!("term `{}` lacks `=>`", part.trim())))?;
            let exps = lhs
                .trim()
                .trim_start_matches('[')
                .trim_end_matches(']')
                .split(',')
                .map(|x| x.trim().parse::<u32>().map_err(|_| Error::parse(text, format!("bad exponent `{x}`"))))
                .collect::<Result<Vec<_>>>()?;
            if exps.len() != vars.len() {
                return Err(Error::parse(text, format!("exponent tuple has {} entries, expected {}", exps.len(), vars.len())));
            }
            p.add_term(exps, Series::parse(rhs, field)?);
        }
        Ok(p)
    }
}

impl std::ops::Add for &MultiPoly {
    type Output = MultiPoly;
    fn add(self, rhs: &MultiPoly) -> MultiPoly {
        self.same_vars(rhs);
        let mut p = self.clone();
        for (e, c) in &rhs.terms {
            p.add_term(e.clone(), c.clone());
        }
        p
    }
}

impl std::ops::Sub for &MultiPoly {
    type Output = MultiPoly;
    fn sub(self, rhs: &MultiPoly) -> MultiPoly {
        self + &rhs.neg()
    }
}

impl std::ops::Mul for &MultiPoly {
    type Output = MultiPoly;
    fn mul(self, rhs: &MultiPoly) -> MultiPoly {
        self.same_vars(rhs);
        let mut acc: BTreeMap<Exponents, Series> = BTreeMap::new();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let e: Exponents = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                let prod = ca * cb;
                match acc.get_mut(&e) {
                    Some(slot) => *slot = &*slot + &prod,
                    None => {
                        acc.insert(e, prod);
                    }
                }
            }
        }
        acc.retain(|_, c| !c.is_zero_to_prec());
        MultiPoly { field: self.field.clone(), vars: self.vars.clone(), terms: acc }
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .rev()
            .map(|(e, c)| {
                let es: Vec<String> = e.iter().map(u32::to_string).collect();
                format!("{} => {}", es.join(","), c)
            })
            .collect();
        write!(f, "{}", parts.join("; "))
    }
}

impl fmt::Debug for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}", self.vars.join(","), self)
    }
}
