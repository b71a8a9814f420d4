//! Truncated Hahn series `sum c_g t^g` over `F_q` with exponents in `Q^n`.
//!
//! A series stores finitely many nonzero terms, all strictly below its
//! precision cap `prec`. Terms at or above the cap are unknown. `prec =
//! Infinity` marks an exact element; the exact zero is the series with no
//! terms and infinite precision.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::field::{Coeff, FieldConfig};
use crate::group::{GroupElement, Value, Q};

/// Iteration cap for [`Series::invert`].
pub const DEFAULT_TERM_BUDGET: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Certainty {
    Exact,
    /// No stored term; the value is only known to be at least the cap.
    BelowPrecOnly,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValResult {
    pub value: Value,
    pub certainty: Certainty,
}

impl ValResult {
    pub fn is_exact(&self) -> bool {
        self.certainty == Certainty::Exact
    }

    /// Finite exact value, if there is one.
    pub fn exact_finite(&self) -> Option<&GroupElement> {
        if self.is_exact() {
            self.value.finite()
        } else {
            None
        }
    }
}

/// Decides `a < b` for two valuation results when the answer is forced by
/// what is known; `None` when precision does not settle it.
pub fn val_lt(a: &ValResult, b: &ValResult) -> Option<bool> {
    use Certainty::*;
    match (a.certainty, b.certainty) {
        (Exact, Exact) => Some(a.value < b.value),
        // b is known to be >= b.value
        (Exact, BelowPrecOnly) => (a.value < b.value).then_some(true),
        // a >= a.value
        (BelowPrecOnly, Exact) => (a.value >= b.value).then_some(false),
        (BelowPrecOnly, BelowPrecOnly) => None,
    }
}

/// Decides `a == b` when forced; `None` when precision does not settle it.
pub fn val_eq(a: &ValResult, b: &ValResult) -> Option<bool> {
    use Certainty::*;
    match (a.certainty, b.certainty) {
        (Exact, Exact) => Some(a.value == b.value),
        (Exact, BelowPrecOnly) => (a.value < b.value).then_some(false),
        (BelowPrecOnly, Exact) => (b.value < a.value).then_some(false),
        (BelowPrecOnly, BelowPrecOnly) => None,
    }
}

#[derive(Clone)]
pub struct Series {
    field: FieldConfig,
    terms: Vec<(GroupElement, Coeff)>,
    prec: Value,
}

impl PartialEq for Series {
    fn eq(&self, other: &Self) -> bool {
        self.field == other.field && self.terms == other.terms && self.prec == other.prec
    }
}

impl Eq for Series {}

impl Series {
    pub fn zero(field: &FieldConfig) -> Self {
        Series { field: field.clone(), terms: Vec::new(), prec: Value::Infinity }
    }

    pub fn one(field: &FieldConfig) -> Self {
        Self::constant(field, 1)
    }

    pub fn constant(field: &FieldConfig, c: Coeff) -> Self {
        Self::monomial(field, c, GroupElement::zero(field.rank()))
    }

    pub fn from_int(field: &FieldConfig, n: i64) -> Self {
        Self::constant(field, field.from_int(n))
    }

    pub fn monomial(field: &FieldConfig, c: Coeff, exp: GroupElement) -> Self {
        assert_eq!(exp.rank(), field.rank(), "exponent rank");
        let terms = if c == 0 { Vec::new() } else { vec![(exp, c)] };
        Series { field: field.clone(), terms, prec: Value::Infinity }
    }

    /// `t^exp` with coefficient one.
    pub fn t_pow(field: &FieldConfig, exp: GroupElement) -> Self {
        Self::monomial(field, 1, exp)
    }

    /// Builds a series from arbitrary terms: merges duplicates, drops zeros
    /// and anything at or above `prec`.
    pub fn from_terms(field: &FieldConfig, terms: impl IntoIterator<Item = (GroupElement, Coeff)>, prec: Value) -> Self {
        let mut acc: BTreeMap<GroupElement, Coeff> = BTreeMap::new();
        for (e, c) in terms {
            assert_eq!(e.rank(), field.rank(), "exponent rank");
            let slot = acc.entry(e).or_insert(0);
            *slot = field.add(*slot, c);
        }
        Self::from_map(field, acc, prec)
    }

    fn from_map(field: &FieldConfig, acc: BTreeMap<GroupElement, Coeff>, prec: Value) -> Self {
        let terms = acc
            .into_iter()
            .filter(|(e, c)| *c != 0 && Value::Finite(e.clone()) < prec)
            .collect();
        Series { field: field.clone(), terms, prec }
    }

    pub fn field(&self) -> &FieldConfig {
        &self.field
    }

    pub fn terms(&self) -> &[(GroupElement, Coeff)] {
        &self.terms
    }

    pub fn prec(&self) -> &Value {
        &self.prec
    }

    pub fn is_exact(&self) -> bool {
        self.prec.is_infinite()
    }

    pub fn is_exact_zero(&self) -> bool {
        self.terms.is_empty() && self.prec.is_infinite()
    }

    /// No term is stored: zero up to the precision cap.
    pub fn is_zero_to_prec(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn leading(&self) -> Option<&(GroupElement, Coeff)> {
        self.terms.first()
    }

    /// Coefficient at an exponent (zero if absent).
    pub fn coeff(&self, e: &GroupElement) -> Coeff {
        self.terms.binary_search_by(|(x, _)| x.cmp(e)).map(|i| self.terms[i].1).unwrap_or(0)
    }

    pub fn val(&self) -> ValResult {
        match self.terms.first() {
            Some((e, _)) => ValResult { value: Value::Finite(e.clone()), certainty: Certainty::Exact },
            None if self.prec.is_infinite() => ValResult { value: Value::Infinity, certainty: Certainty::Exact },
            None => ValResult { value: self.prec.clone(), certainty: Certainty::BelowPrecOnly },
        }
    }

    /// Guaranteed lower bound for the valuation.
    fn val_lower(&self) -> Value {
        match self.terms.first() {
            Some((e, _)) => Value::Finite(e.clone()),
            None => self.prec.clone(),
        }
    }

    /// Exact finite valuation, or `PrecisionTooLow`/`NotInvertible`.
    pub fn exact_val(&self) -> Result<GroupElement> {
        let v = self.val();
        match (v.certainty, v.value) {
            (Certainty::Exact, Value::Finite(g)) => Ok(g),
            (Certainty::Exact, Value::Infinity) => Err(Error::NotInvertible),
            (Certainty::BelowPrecOnly, p) => Err(Error::PrecisionTooLow(format!("no term below cap {p}"))),
        }
    }

    pub fn is_in_valuation_ring(&self) -> Result<bool> {
        let v = self.val();
        let zero = Value::Finite(GroupElement::zero(self.field.rank()));
        match v.certainty {
            Certainty::Exact => Ok(v.value >= zero),
            Certainty::BelowPrecOnly if v.value >= zero => Ok(true),
            Certainty::BelowPrecOnly => Err(Error::PrecisionTooLow(format!("value only known to be >= {}", v.value))),
        }
    }

    pub fn is_unit(&self) -> Result<bool> {
        let v = self.val();
        let zero = Value::Finite(GroupElement::zero(self.field.rank()));
        match v.certainty {
            Certainty::Exact => Ok(v.value == zero),
            Certainty::BelowPrecOnly if v.value > zero => Ok(false),
            Certainty::BelowPrecOnly => Err(Error::PrecisionTooLow(format!("value only known to be >= {}", v.value))),
        }
    }

    /// Lowers the precision cap, dropping terms at or above it.
    pub fn truncate(&self, prec: &Value) -> Series {
        let cap = prec.clone().min(self.prec.clone());
        Series {
            field: self.field.clone(),
            terms: self.terms.iter().filter(|(e, _)| Value::Finite(e.clone()) < cap).cloned().collect(),
            prec: cap,
        }
    }

    fn check_field(&self, other: &Series) -> Result<()> {
        if self.field != other.field {
            Err(Error::ConfigMismatch)
        } else {
            Ok(())
        }
    }

    pub fn try_add(&self, other: &Series) -> Result<Series> {
        self.check_field(other)?;
        Ok(self.add_unchecked(other))
    }

    pub fn try_mul(&self, other: &Series) -> Result<Series> {
        self.check_field(other)?;
        Ok(self.mul_unchecked(other))
    }

    fn add_unchecked(&self, other: &Series) -> Series {
        let prec = self.prec.clone().min(other.prec.clone());
        let f = &self.field;
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        while i < self.terms.len() || j < other.terms.len() {
            let pick = match (self.terms.get(i), other.terms.get(j)) {
                (Some(a), Some(b)) => a.0.cmp(&b.0),
                (Some(_), None) => std::cmp::Ordering::Less,
                _ => std::cmp::Ordering::Greater,
            };
            let (e, c) = match pick {
                std::cmp::Ordering::Less => {
                    i += 1;
                    self.terms[i - 1].clone()
                }
                std::cmp::Ordering::Greater => {
                    j += 1;
                    other.terms[j - 1].clone()
                }
                std::cmp::Ordering::Equal => {
                    i += 1;
                    j += 1;
                    (self.terms[i - 1].0.clone(), f.add(self.terms[i - 1].1, other.terms[j - 1].1))
                }
            };
            if c != 0 && Value::Finite(e.clone()) < prec {
                out.push((e, c));
            }
        }
        Series { field: f.clone(), terms: out, prec }
    }

    fn mul_unchecked(&self, other: &Series) -> Series {
        // Ultrametric propagation: error terms are prec_x * y and x * prec_y.
        let prec = (&self.prec + &other.val_lower()).min(&other.prec + &self.val_lower());
        let f = &self.field;
        let mut acc: BTreeMap<GroupElement, Coeff> = BTreeMap::new();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e = ea + eb;
                if Value::Finite(e.clone()) >= prec {
                    continue;
                }
                let slot = acc.entry(e).or_insert(0);
                *slot = f.add(*slot, f.mul(*ca, *cb));
            }
        }
        Series::from_map(f, acc, prec)
    }

    pub fn neg(&self) -> Series {
        Series {
            field: self.field.clone(),
            terms: self.terms.iter().map(|(e, c)| (e.clone(), self.field.neg(*c))).collect(),
            prec: self.prec.clone(),
        }
    }

    /// Multiplies by a field scalar.
    pub fn scale(&self, c: Coeff) -> Series {
        if c == 0 {
            return Series { field: self.field.clone(), terms: Vec::new(), prec: self.prec.clone() };
        }
        Series {
            field: self.field.clone(),
            terms: self.terms.iter().map(|(e, x)| (e.clone(), self.field.mul(*x, c))).collect(),
            prec: self.prec.clone(),
        }
    }

    /// Multiplies by `c t^g`.
    pub fn mul_monomial(&self, c: Coeff, g: &GroupElement) -> Series {
        let s = self.scale(c);
        Series {
            field: s.field,
            terms: s.terms.into_iter().map(|(e, x)| (&e + g, x)).collect(),
            prec: s.prec.shift(g),
        }
    }

    pub fn pow(&self, n: u64) -> Series {
        let mut acc = Series::one(&self.field);
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Inverse correct below `out_prec` (further capped by the precision the
    /// input supports), computed by repeatedly cancelling the leading term
    /// of the residual `1 - x*y`.
    pub fn invert(&self, out_prec: &Value) -> Result<Series> {
        self.invert_with_budget(out_prec, DEFAULT_TERM_BUDGET)
    }

    pub fn invert_with_budget(&self, out_prec: &Value, budget: usize) -> Result<Series> {
        let v = self.exact_val()?;
        let (_, lc) = self.terms[0].clone();
        let lc_inv = self.field.inv(lc).expect("stored coefficients are nonzero");
        let inherent = match &self.prec {
            Value::Finite(p) => Value::Finite(&(p - &v) - &v),
            Value::Infinity => Value::Infinity,
        };
        let target = out_prec.clone().min(inherent);
        if target.is_infinite() && self.terms.len() > 1 {
            return Err(Error::Precondition("inverse of a non-monomial needs a finite output precision".into()));
        }
        let residual_cap = target.shift(&v);
        let mut residual = Series::one(&self.field).truncate(&residual_cap);
        let mut y_terms: Vec<(GroupElement, Coeff)> = Vec::new();
        let neg_v = -&v;
        let mut steps = 0;
        while let Some((e, c)) = residual.terms.first().cloned() {
            if steps == budget {
                return Err(Error::TermBudgetExceeded(budget));
            }
            steps += 1;
            let coef = self.field.mul(c, lc_inv);
            let exp = &e + &neg_v;
            let delta = self.mul_monomial(coef, &exp).truncate(&residual_cap);
            residual = residual.add_unchecked(&delta.neg());
            residual.prec = residual_cap.clone();
            y_terms.push((exp, coef));
        }
        Ok(Series::from_terms(&self.field, y_terms, target))
    }

    /// Exact-equality up to the smaller of the two caps.
    pub fn agrees_with(&self, other: &Series) -> bool {
        self.add_unchecked(&other.neg()).is_zero_to_prec()
    }
}

impl std::ops::Add for &Series {
    type Output = Series;
    fn add(self, rhs: &Series) -> Series {
        self.try_add(rhs).expect("series over different fields")
    }
}

impl std::ops::Sub for &Series {
    type Output = Series;
    fn sub(self, rhs: &Series) -> Series {
        self.try_add(&rhs.neg()).expect("series over different fields")
    }
}

impl std::ops::Mul for &Series {
    type Output = Series;
    fn mul(self, rhs: &Series) -> Series {
        self.try_mul(rhs).expect("series over different fields")
    }
}

impl std::ops::Neg for &Series {
    type Output = Series;
    fn neg(self) -> Series {
        Series::neg(self)
    }
}

fn fmt_exp(e: &GroupElement) -> String {
    let parts: Vec<String> = e.coords().iter().map(Q::to_string).collect();
    format!("t^({})", parts.join(","))
}

impl fmt::Display for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self
            .terms
            .iter()
            .map(|(e, c)| match (e.is_zero(), *c) {
                (true, c) => c.to_string(),
                (false, 1) => fmt_exp(e),
                (false, c) => format!("{c}*{}", fmt_exp(e)),
            })
            .collect();
        if let Value::Finite(p) = &self.prec {
            parts.push(format!("O({})", fmt_exp(p)));
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

impl fmt::Debug for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

fn parse_t_power(tok: &str, field: &FieldConfig, whole: &str) -> Result<GroupElement> {
    let rest = tok.strip_prefix('t').ok_or_else(|| Error::parse(whole, format!("expected t^(..) in `{tok}`")))?;
    let e = if rest.is_empty() {
        GroupElement::from_ints(&[1])
    } else {
        let rest = rest.strip_prefix('^').ok_or_else(|| Error::parse(whole, "expected `^` after t"))?;
        GroupElement::parse(rest)?
    };
    if e.rank() != field.rank() {
        return Err(Error::parse(whole, format!("exponent {e} has rank {}, field rank is {}", e.rank(), field.rank())));
    }
    Ok(e)
}

impl Series {
    /// Parses the literal syntax produced by `Display`, e.g.
    /// `1 + 2*t^(1/2) + t^(3) + O(t^(5))`.
    pub fn parse(s: &str, field: &FieldConfig) -> Result<Series> {
        let text = s.trim();
        let mut terms = Vec::new();
        let mut prec = Value::Infinity;
        if text == "0" {
            return Ok(Series::zero(field));
        }
        for raw in text.split('+') {
            let tok: String = raw.chars().filter(|c| !c.is_whitespace()).collect();
            if tok.is_empty() {
                return Err(Error::parse(s, "empty term"));
            }
            if let Some(inner) = tok.strip_prefix("O(").and_then(|x| x.strip_suffix(')')) {
                prec = Value::Finite(parse_t_power(inner, field, s)?);
                continue;
            }
            let (coef, mono) = match tok.split_once('*') {
                Some((c, m)) => (c.to_string(), Some(m.to_string())),
                None if tok.starts_with('t') => ("1".to_string(), Some(tok.clone())),
                None => (tok.clone(), None),
            };
            let c: u32 = coef.parse().map_err(|_| Error::parse(s, format!("bad coefficient `{coef}`")))?;
            if !field.contains(c) {
                return Err(Error::parse(s, format!("coefficient {c} not below q = {}", field.q())));
            }
            let e = match mono {
                Some(m) => parse_t_power(&m, field, s)?,
                None => GroupElement::zero(field.rank()),
            };
            terms.push((e, c as Coeff));
        }
        Ok(Series::from_terms(field, terms, prec))
    }
}
