//! Pseudo-convergent sequences over truncated Hahn series: convergence and
//! limit checks, image sequences, witness search and unit factorizations.

mod factor;
mod planted;
mod witness;

pub use factor::{
    factor_below_degree, localize_representation, scale_and_factor_multivar, Localized, MultivarFactorization,
    UnitFactorization,
};
pub use planted::{
    artin_schreier, geometric, ladder, planted_tower, PlantedInstance, PlantedLevel, PlantedParams, PlantedTower, LIMIT_MARGIN,
};
pub use witness::{classify, is_witness, minimal_degree_witness, Classification, SearchSpace, Verdict};

use crate::error::{Error, Result};
use crate::field::{Coeff, FieldConfig};
use crate::group::{GroupElement, Value, Q};
use crate::poly::MultiPoly;
use crate::series::{val_eq, val_lt, Series, ValResult};

/// Exponent of the increment appended at index `i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExponentRule {
    /// `start + i * step`.
    Affine { start: GroupElement, step: GroupElement },
    /// `mu + sigma * (1 - base^(-i))`.
    Ladder { mu: GroupElement, sigma: GroupElement, base: u32 },
}

impl ExponentRule {
    pub fn exponent(&self, i: usize) -> GroupElement {
        match self {
            ExponentRule::Affine { start, step } => start + &step.times(i as i64),
            ExponentRule::Ladder { mu, sigma, base } => {
                let denom = (*base as i128).pow(i as u32);
                mu + &sigma.times_q(&(Q::from_integer(1) - Q::new(1, denom)))
            }
        }
    }
}

/// Generator continuing a window: `v_i = v_{i-1} + coeff * t^(exponent(i))`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeqRule {
    pub coeff: Coeff,
    pub exponents: ExponentRule,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PseudoSequence {
    window: Vec<Series>,
    rule: Option<SeqRule>,
    profile: Vec<ValResult>,
}

impl PseudoSequence {
    /// Wraps a window. Pseudo-convergence is not enforced here; see
    /// [`check_pseudo_convergent`].
    pub fn new(window: Vec<Series>, rule: Option<SeqRule>) -> Result<Self> {
        if window.is_empty() {
            return Err(Error::TooShort { len: 0, min: 1 });
        }
        let field = window[0].field().clone();
        if window.iter().any(|v| v.field() != &field) {
            return Err(Error::ConfigMismatch);
        }
        let profile = window.windows(2).map(|w| (&w[1] - &w[0]).val()).collect();
        Ok(PseudoSequence { window, rule, profile })
    }

    /// `v_0 = start`, extended by the rule to `len` terms.
    pub fn from_rule(start: Series, rule: SeqRule, len: usize) -> Result<Self> {
        let s = PseudoSequence::new(vec![start], Some(rule))?;
        s.extended(len.saturating_sub(1))
    }

    pub fn field(&self) -> &FieldConfig {
        self.window[0].field()
    }

    pub fn len(&self) -> usize {
        self.window.len()
    }

    pub fn is_empty(&self) -> bool {
        self.window.is_empty()
    }

    pub fn window(&self) -> &[Series] {
        &self.window
    }

    pub fn term(&self, i: usize) -> Result<&Series> {
        self.window.get(i).ok_or(Error::IndexOutOfWindow { index: i, len: self.window.len() })
    }

    pub fn rule(&self) -> Option<&SeqRule> {
        self.rule.as_ref()
    }

    /// `val(v_{i+1} - v_i)` for consecutive window terms.
    pub fn gamma_profile(&self) -> &[ValResult] {
        &self.profile
    }

    /// Appends `extra` terms produced by the rule.
    pub fn extended(&self, extra: usize) -> Result<Self> {
        let rule = match &self.rule {
            Some(r) => r.clone(),
            None if extra == 0 => return Ok(self.clone()),
            None => return Err(Error::InvalidSequence("no generator rule to extend the window".into())),
        };
        let mut window = self.window.clone();
        for _ in 0..extra {
            let i = window.len();
            let inc = Series::monomial(self.field(), rule.coeff, rule.exponents.exponent(i));
            let next = window.last().unwrap() + &inc;
            window.push(next);
        }
        PseudoSequence::new(window, Some(rule))
    }

    /// Sub-window `from..`.
    pub fn tail(&self, from: usize) -> Result<Self> {
        if from >= self.window.len() {
            return Err(Error::IndexOutOfWindow { index: from, len: self.window.len() });
        }
        PseudoSequence::new(self.window[from..].to_vec(), None)
    }

    /// Same sequence with every term mapped, rule dropped.
    pub fn map(&self, f: impl Fn(&Series) -> Series) -> Result<Self> {
        PseudoSequence::new(self.window.iter().map(f).collect(), None)
    }
}

/// Outcome of [`check_pseudo_convergent`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Convergence {
    Certified { profile: Vec<Value> },
    /// First triple `(i, i', i'')` found with
    /// `val(v_i - v_i'') >= val(v_i' - v_i'')`.
    Violation { triple: (usize, usize, usize) },
}

impl Convergence {
    pub fn is_certified(&self) -> bool {
        matches!(self, Convergence::Certified { .. })
    }
}

fn diff_values(window: &[Series]) -> Vec<Vec<ValResult>> {
    let n = window.len();
    let mut out = vec![Vec::with_capacity(n); n];
    for a in 0..n {
        for b in 0..n {
            out[a].push(if a == b { Series::zero(window[0].field()).val() } else { (&window[a] - &window[b]).val() });
        }
    }
    out
}

fn lt(a: &ValResult, b: &ValResult) -> Result<bool> {
    val_lt(a, b).ok_or_else(|| Error::PrecisionTooLow(format!("cannot order values {} and {}", a.value, b.value)))
}

/// Violating triples, scanned by `i''` ascending, then `i'` and `i`
/// descending.
fn violations(window: &[Series], first_only: bool) -> Result<Vec<(usize, usize, usize)>> {
    let vals = diff_values(window);
    let mut out = Vec::new();
    for k in 2..window.len() {
        for j in (1..k).rev() {
            for i in (0..j).rev() {
                if !lt(&vals[i][k], &vals[j][k])? {
                    out.push((i, j, k));
                    if first_only {
                        return Ok(out);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Checks `val(v_i - v_i'') < val(v_i' - v_i'')` for all `i < i' < i''` in
/// the window.
pub fn check_pseudo_convergent(s: &PseudoSequence) -> Result<Convergence> {
    if s.len() < 3 {
        return Err(Error::TooShort { len: s.len(), min: 3 });
    }
    match violations(&s.window, true)?.first() {
        Some(&triple) => Ok(Convergence::Violation { triple }),
        None => Ok(Convergence::Certified { profile: s.profile.iter().map(|v| v.value.clone()).collect() }),
    }
}

/// `val(x - v_i) = val(v_{i+1} - v_i)` for every window `i < N`, and
/// `val(x - v_N) > val(v_N - v_{N-1})`.
pub fn is_pseudo_limit(x: &Series, s: &PseudoSequence) -> Result<bool> {
    if s.len() < 2 {
        return Err(Error::TooShort { len: s.len(), min: 2 });
    }
    let n = s.len() - 1;
    for i in 0..n {
        let lhs = (x - &s.window[i]).val();
        let same = val_eq(&lhs, &s.profile[i])
            .ok_or_else(|| Error::PrecisionTooLow(format!("val(x - v_{i}) is not determined")))?;
        if !same {
            return Ok(false);
        }
    }
    let last = (x - &s.window[n]).val();
    lt(&s.profile[n - 1], &last)
}

/// `(f(v_i))` with the least onset after which it is pseudo-convergent.
#[derive(Clone, Debug)]
pub struct ImageSequence {
    pub image: PseudoSequence,
    pub onset: usize,
    /// Whether `f(x)` is a pseudo limit of the tail, when `x` was supplied.
    pub limit_verified: Option<bool>,
    pub fx: Option<Series>,
}

impl ImageSequence {
    pub fn tail(&self) -> Result<PseudoSequence> {
        self.image.tail(self.onset)
    }
}

pub fn image_sequence(f: &MultiPoly, s: &PseudoSequence, limit: Option<&Series>) -> Result<ImageSequence> {
    if f.vars().len() != 1 {
        return Err(Error::Precondition("image_sequence needs a univariate polynomial".into()));
    }
    let image = s.map(|v| f.eval(std::slice::from_ref(v)))?;
    if image.window.windows(2).all(|w| (&w[1] - &w[0]).is_exact_zero()) {
        return Err(Error::Degenerate("image sequence is constant".into()));
    }
    let onset = violations(&image.window, false)?.iter().map(|t| t.0 + 1).max().unwrap_or(0);
    if image.len() < onset + 3 {
        return Err(Error::OnsetNotFound);
    }
    let (limit_verified, fx) = match limit {
        Some(x) => {
            let fx = f.eval(std::slice::from_ref(x));
            let ok = is_pseudo_limit(&fx, &image.tail(onset)?)?;
            (Some(ok), Some(fx))
        }
        None => (None, None),
    };
    Ok(ImageSequence { image, onset, limit_verified, fx })
}
