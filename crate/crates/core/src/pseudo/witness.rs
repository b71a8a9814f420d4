//! Bounded search for polynomials with eventually increasing values along a
//! sequence.

use crate::error::{Error, Result};
use crate::field::Coeff;
use crate::group::{GroupElement, Value};
use crate::poly::MultiPoly;
use crate::series::{val_lt, Series};

use super::{check_pseudo_convergent, Convergence, PseudoSequence};

pub const DEFAULT_SEARCH_BUDGET: u64 = 1_000_000;

/// Candidate space: every coefficient is a sum of at most `max_support`
/// monomials `c t^g` with `g` from the palette; the leading coefficient is
/// nonzero and its first monomial has coefficient one.
#[derive(Clone, Debug)]
pub struct SearchSpace {
    pub max_degree: u32,
    pub max_support: usize,
    pub palette: Vec<GroupElement>,
    pub budget: u64,
    /// Shortest strictly increasing tail accepted as evidence.
    pub min_tail: usize,
}

impl SearchSpace {
    pub fn new(max_degree: u32, max_support: usize, palette: Vec<GroupElement>) -> Self {
        SearchSpace { max_degree, max_support, palette, budget: DEFAULT_SEARCH_BUDGET, min_tail: 3 }
    }

    fn usable_palette(&self) -> Vec<GroupElement> {
        let mut p: Vec<GroupElement> = self.palette.iter().filter(|g| !g.is_negative()).cloned().collect();
        p.sort();
        p.dedup();
        p
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Algebraic { witness: MultiPoly, onset: usize },
    TranscendentalUpTo { degree: u32, support: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Classification {
    pub verdict: Verdict,
    /// Set to the declared bound when the last profile value exceeds it.
    pub fundamental_up_to: Option<GroupElement>,
    pub profile: Vec<Value>,
    pub candidates_checked: u64,
}

/// Least onset `o` with `val f(v_o) < ... < val f(v_N)` and a tail of at
/// least `min_tail` terms; `None` if the tail is shorter.
pub fn is_witness(f: &MultiPoly, s: &PseudoSequence, min_tail: usize) -> Result<Option<usize>> {
    let n = s.len();
    let min_tail = min_tail.max(2);
    if n < min_tail {
        return Err(Error::TooShort { len: n, min: min_tail });
    }
    let mut later = f.eval(std::slice::from_ref(&s.window()[n - 1])).val();
    let mut onset = n - 1;
    for i in (0..n - 1).rev() {
        let here = f.eval(std::slice::from_ref(&s.window()[i])).val();
        match val_lt(&here, &later) {
            Some(true) => {
                onset = i;
                later = here;
            }
            _ => break,
        }
    }
    Ok((n - onset >= min_tail).then_some(onset))
}

/// Monomial choices for one coefficient slot, grouped by support size.
fn slot_options(palette_len: usize, q: u32, max_support: usize) -> Vec<Vec<Vec<(usize, Coeff)>>> {
    let mut by_size: Vec<Vec<Vec<(usize, Coeff)>>> = vec![vec![Vec::new()]];
    for k in 1..=max_support.min(palette_len) {
        let mut out = Vec::new();
        let mut subset: Vec<usize> = (0..k).collect();
        loop {
            let combos = (q as usize - 1).pow(k as u32);
            for code in 0..combos {
                let mut c = code;
                let mut mono = Vec::with_capacity(k);
                for &g in &subset {
                    mono.push((g, (c % (q as usize - 1) + 1) as Coeff));
                    c /= q as usize - 1;
                }
                out.push(mono);
            }
            // next k-subset in lexicographic order
            let mut i = k;
            while i > 0 && subset[i - 1] == palette_len - k + i - 1 {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            subset[i - 1] += 1;
            for j in i..k {
                subset[j] = subset[j - 1] + 1;
            }
        }
        out.sort();
        by_size.push(out);
    }
    by_size
}

fn count_candidates(space: &SearchSpace, palette_len: usize, q: u32) -> u64 {
    let k_max = space.max_support.min(palette_len);
    let size = |k: usize| binom(palette_len as u64, k as u64).saturating_mul(((q - 1) as u64).saturating_pow(k as u32));
    let per_slot: u64 = (0..=k_max).map(size).fold(0u64, u64::saturating_add);
    let lead: u64 = (1..=k_max).map(|k| size(k) / (q - 1) as u64).fold(0u64, u64::saturating_add);
    (1..=space.max_degree)
        .map(|d| lead.saturating_mul(per_slot.saturating_pow(d)))
        .fold(0u64, u64::saturating_add)
}

fn binom(n: u64, k: u64) -> u64 {
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

struct Search<'a> {
    s: &'a PseudoSequence,
    palette: Vec<GroupElement>,
    /// Lower-coefficient choices by support size.
    options: Vec<Vec<Vec<(usize, Coeff)>>>,
    /// Leading-coefficient choices by support size: first coefficient is 1.
    leads: Vec<Vec<Vec<(usize, Coeff)>>>,
}

impl Search<'_> {
    /// `chosen[0]` is the leading coefficient, then `X^{d-1}` down to `X^0`.
    fn build(&self, chosen: &[&Vec<(usize, Coeff)>]) -> MultiPoly {
        let field = self.s.field();
        let coeffs = chosen
            .iter()
            .rev()
            .map(|mono| {
                Series::from_terms(field, mono.iter().map(|&(g, c)| (self.palette[g].clone(), c)), Value::Infinity)
            })
            .collect();
        MultiPoly::univariate(field, "X", coeffs)
    }

    /// Assigns positions `pos..=degree` using total support `remaining`.
    fn walk<'b>(
        &'b self,
        degree: usize,
        pos: usize,
        remaining: usize,
        chosen: &mut Vec<&'b Vec<(usize, Coeff)>>,
        found: &mut dyn FnMut(MultiPoly) -> Result<bool>,
    ) -> Result<bool> {
        if pos > degree {
            if remaining != 0 {
                return Ok(false);
            }
            return found(self.build(chosen));
        }
        let cap = self.options.len() - 1;
        if remaining > cap * (degree + 1 - pos) {
            return Ok(false);
        }
        let table = if pos == 0 { &self.leads } else { &self.options };
        for size in 0..=remaining.min(cap) {
            for opt in &table[size] {
                chosen.push(opt);
                let hit = self.walk(degree, pos + 1, remaining - size, chosen, found)?;
                chosen.pop();
                if hit {
                    return Ok(true);
                }
            }
        }
        Ok(false)
    }
}

fn search(s: &PseudoSequence, space: &SearchSpace) -> Result<(Option<(MultiPoly, usize)>, u64)> {
    let palette = space.usable_palette();
    if palette.is_empty() {
        return Err(Error::Precondition("palette has no nonnegative exponent".into()));
    }
    let q = s.field().q();
    let total = count_candidates(space, palette.len(), q);
    if total > space.budget {
        return Err(Error::SearchBudgetExceeded { candidates: total, budget: space.budget });
    }
    let options = slot_options(palette.len(), q, space.max_support);
    let leads = options
        .iter()
        .map(|group| group.iter().filter(|m| m.first().map_or(false, |&(_, c)| c == 1)).cloned().collect())
        .collect();
    let searcher = Search { s, palette, options, leads };
    let mut result: Option<(MultiPoly, usize)> = None;
    let mut checked = 0u64;
    let mut found = |f: MultiPoly| -> Result<bool> {
        checked += 1;
        match is_witness(&f, s, space.min_tail)? {
            Some(onset) => {
                result = Some((f, onset));
                Ok(true)
            }
            None => Ok(false),
        }
    };
    'outer: for degree in 1..=space.max_degree as usize {
        let max_total = (searcher.options.len() - 1) * (degree + 1);
        for support in 1..=max_total {
            let mut chosen = Vec::new();
            if searcher.walk(degree, 0, support, &mut chosen, &mut found)? {
                break 'outer;
            }
        }
    }
    Ok((result, checked))
}

fn require_convergent(s: &PseudoSequence) -> Result<()> {
    match check_pseudo_convergent(s)? {
        Convergence::Certified { .. } => Ok(()),
        Convergence::Violation { triple } => {
            Err(Error::InvalidSequence(format!("not pseudo-convergent at triple {triple:?}")))
        }
    }
}

/// Witness of least degree in the search space, first in canonical order.
pub fn minimal_degree_witness(s: &PseudoSequence, space: &SearchSpace) -> Result<(MultiPoly, usize)> {
    require_convergent(s)?;
    match search(s, space)?.0 {
        Some(hit) => Ok(hit),
        None => Err(Error::NoWitnessInBounds { max_degree: space.max_degree, max_support: space.max_support }),
    }
}

pub fn classify(s: &PseudoSequence, space: &SearchSpace, fundamental_bound: Option<&GroupElement>) -> Result<Classification> {
    require_convergent(s)?;
    let (hit, checked) = search(s, space)?;
    let verdict = match hit {
        Some((witness, onset)) => Verdict::Algebraic { witness, onset },
        None => Verdict::TranscendentalUpTo { degree: space.max_degree, support: space.max_support },
    };
    let profile: Vec<Value> = s.gamma_profile().iter().map(|v| v.value.clone()).collect();
    let fundamental_up_to = fundamental_bound.and_then(|b| {
        let last = profile.last()?;
        (last > &Value::Finite(b.clone())).then(|| b.clone())
    });
    Ok(Classification { verdict, fundamental_up_to, profile, candidates_checked: checked })
}
