//! Threshold solvers: find indices past which the linear forms
//! `beta_i + t_{i_1} g_{1,j_1} + sum_e t_{i_e} (g_{e,j_e} + r_{e-1} a_{e-1})`
//! are pairwise distinct or all nonzero.
//!
//! Sequences are finite windows, optionally extended by a rule, so every
//! certificate is relative to an explicit horizon.

use crate::error::{Error, Result};
use crate::group::GroupElement;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Distinct,
    Nonzero,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Rule {
    /// `term(i) = start + i * step` for indices past the window.
    Affine { start: GroupElement, step: GroupElement },
    /// Explicit continuation of the window.
    Table(Vec<GroupElement>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonotoneSequence {
    window: Vec<GroupElement>,
    rule: Option<Rule>,
}

impl MonotoneSequence {
    pub fn new(window: Vec<GroupElement>, rule: Option<Rule>) -> Result<Self> {
        if window.is_empty() {
            return Err(Error::InvalidSequence("empty window".into()));
        }
        let rank = window[0].rank();
        let s = MonotoneSequence { window, rule };
        let mut all: Vec<&GroupElement> = s.window.iter().collect();
        match &s.rule {
            Some(Rule::Affine { start, step }) => {
                if !step.is_positive() {
                    return Err(Error::InvalidSequence("affine step must be positive".into()));
                }
                if start.rank() != rank || step.rank() != rank {
                    return Err(Error::RankMismatch { left: rank, right: start.rank().max(step.rank()) });
                }
            }
            Some(Rule::Table(t)) => all.extend(t.iter()),
            None => {}
        }
        for w in all.windows(2) {
            if w[0].rank() != rank || w[1].rank() != rank {
                return Err(Error::RankMismatch { left: rank, right: w[1].rank() });
            }
            if w[0] >= w[1] {
                return Err(Error::InvalidSequence(format!("not strictly increasing at {} >= {}", w[0], w[1])));
            }
        }
        if let Some(Rule::Affine { .. }) = &s.rule {
            let n = s.window.len();
            if s.term(n).expect("affine rule") <= s.window[n - 1] {
                return Err(Error::InvalidSequence("rule does not continue the increase".into()));
            }
        }
        Ok(s)
    }

    /// Integer sequence `start, start + step, ...` of the given length, rank one.
    pub fn arithmetic(start: i64, step: i64, len: usize) -> Result<Self> {
        MonotoneSequence::new(
            (0..len as i64).map(|i| GroupElement::from_ints(&[start + i * step])).collect(),
            None,
        )
    }

    pub fn window(&self) -> &[GroupElement] {
        &self.window
    }

    pub fn rule(&self) -> Option<&Rule> {
        self.rule.as_ref()
    }

    pub fn rank(&self) -> usize {
        self.window[0].rank()
    }

    /// Number of available terms; `None` when unbounded.
    pub fn available(&self) -> Option<usize> {
        match &self.rule {
            None => Some(self.window.len()),
            Some(Rule::Table(t)) => Some(self.window.len() + t.len()),
            Some(Rule::Affine { .. }) => None,
        }
    }

    pub fn term(&self, i: usize) -> Option<GroupElement> {
        if i < self.window.len() {
            return Some(self.window[i].clone());
        }
        match &self.rule {
            None => None,
            Some(Rule::Table(t)) => t.get(i - self.window.len()).cloned(),
            Some(Rule::Affine { start, step }) => Some(start + &step.times(i as i64)),
        }
    }

    /// Terms `0..=last`, clipped to what is available.
    pub fn terms_to(&self, last: usize) -> Vec<GroupElement> {
        let end = self.available().map_or(last + 1, |n| n.min(last + 1));
        (0..end).map(|i| self.term(i).expect("index in range")).collect()
    }

    /// First index whose term is not below `a`, looking at the whole
    /// (possibly unbounded) sequence.
    fn first_not_below(&self, a: &GroupElement) -> Option<usize> {
        let finite = match &self.rule {
            Some(Rule::Affine { start, step }) => {
                if let Some(i) = self.window.iter().position(|x| x >= a) {
                    return Some(i);
                }
                let n = self.window.len();
                // start + i*step < a for all i iff a - start is positive and
                // its leading coordinate comes strictly before that of step.
                let d = a - start;
                let lead = |g: &GroupElement| g.coords().iter().position(|c| *c != num_traits::Zero::zero());
                let bounded = d.is_positive() && lead(&d) < lead(step);
                if bounded {
                    return None;
                }
                let mut i = n;
                loop {
                    if &self.term(i).unwrap() >= a {
                        return Some(i);
                    }
                    i += 1;
                }
            }
            _ => self.terms_to(usize::MAX - 1),
        };
        finite.iter().position(|x| x >= a)
    }
}

/// Dense tensor of optional group elements, row-major over the axes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BetaTensor {
    shape: Vec<usize>,
    data: Vec<Option<GroupElement>>,
}

impl BetaTensor {
    pub fn new(shape: Vec<usize>, data: Vec<Option<GroupElement>>) -> Result<Self> {
        let size: usize = shape.iter().product();
        if shape.is_empty() || size != data.len() {
            return Err(Error::Precondition(format!("tensor shape {shape:?} does not match {} entries", data.len())));
        }
        Ok(BetaTensor { shape, data })
    }

    pub fn from_fn(shape: Vec<usize>, mut f: impl FnMut(&[usize]) -> Option<GroupElement>) -> Self {
        let size: usize = shape.iter().product();
        let mut data = Vec::with_capacity(size);
        let mut idx = vec![0; shape.len()];
        for _ in 0..size {
            data.push(f(&idx));
            advance(&mut idx, &shape);
        }
        BetaTensor { shape, data }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[Option<GroupElement>] {
        &self.data
    }

    pub fn get(&self, idx: &[usize]) -> Option<&GroupElement> {
        self.data[flat(idx, &self.shape)].as_ref()
    }
}

fn flat(idx: &[usize], shape: &[usize]) -> usize {
    idx.iter().zip(shape).fold(0, |acc, (&i, &n)| acc * n + i)
}

/// Odometer increment, last axis fastest.
fn advance(idx: &mut [usize], shape: &[usize]) {
    for a in (0..idx.len()).rev() {
        idx[a] += 1;
        if idx[a] < shape[a] {
            return;
        }
        idx[a] = 0;
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ThresholdProblem {
    pub betas: BetaTensor,
    pub multipliers: Vec<Vec<i64>>,
    pub sequences: Vec<MonotoneSequence>,
    pub bounds: Vec<Option<GroupElement>>,
    pub mode: Mode,
}

/// Which form is eventually the strict minimum, and from which index on.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dominant {
    pub index: usize,
    pub from: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ThresholdCertificate {
    pub nus: Vec<usize>,
    /// `r_{e-1} a_{e-1}` added to axis `e`, for `e >= 1`.
    pub shifts: Vec<GroupElement>,
    pub verified_horizon: Vec<usize>,
    /// One-axis problems only.
    pub dominant: Option<Dominant>,
}

impl ThresholdProblem {
    pub fn axes(&self) -> usize {
        self.multipliers.len()
    }

    fn rank(&self) -> usize {
        self.sequences[0].rank()
    }

    fn validate(&self, nonneg: bool) -> Result<()> {
        let n = self.axes();
        if n == 0 || self.sequences.len() != n || self.bounds.len() != n {
            return Err(Error::Precondition("axes of multipliers, sequences and bounds disagree".into()));
        }
        let shape: Vec<usize> = self.multipliers.iter().map(Vec::len).collect();
        if self.betas.shape() != shape.as_slice() {
            return Err(Error::Precondition(format!("beta shape {:?} vs multiplier lengths {shape:?}", self.betas.shape())));
        }
        let rank = self.rank();
        let ranks = self
            .betas
            .data()
            .iter()
            .flatten()
            .map(GroupElement::rank)
            .chain(self.sequences.iter().map(MonotoneSequence::rank))
            .chain(self.bounds.iter().flatten().map(GroupElement::rank));
        for r in ranks {
            if r != rank {
                return Err(Error::RankMismatch { left: rank, right: r });
            }
        }
        match self.mode {
            Mode::Distinct => {
                for (e, ts) in self.multipliers.iter().enumerate() {
                    let mut s = ts.clone();
                    s.sort_unstable();
                    if s.windows(2).any(|w| w[0] == w[1]) {
                        return Err(Error::Precondition(format!("multipliers on axis {e} are not pairwise different")));
                    }
                }
            }
            Mode::Nonzero => {
                if !self.multipliers.iter().any(|ts| ts.iter().all(|&t| t != 0)) {
                    return Err(Error::Precondition("no axis has only nonzero multipliers".into()));
                }
            }
        }
        if nonneg {
            let zero = GroupElement::zero(rank);
            for (e, s) in self.sequences.iter().enumerate() {
                if s.window[0] < zero || s.rule.as_ref().map_or(false, |r| matches!(r, Rule::Affine { start, .. } if *start < zero)) {
                    return Err(Error::InvalidSequence(format!("axis {e} has negative terms")));
                }
            }
        }
        for e in 0..n.saturating_sub(1) {
            let a = self.bounds[e]
                .as_ref()
                .ok_or_else(|| Error::Precondition(format!("bound a_{e} is required on axis {e}")))?;
            for c in 0..=e {
                if let Some(index) = self.sequences[c].first_not_below(a) {
                    return Err(Error::InvalidBound { axis: e, sequence: c, index });
                }
            }
        }
        Ok(())
    }

    /// `r_e` for `e = 0..n-1`.
    pub fn rs(&self) -> Vec<i64> {
        let factor = if self.mode == Mode::Distinct { 2 } else { 1 };
        let mut running = 0;
        (0..self.axes().saturating_sub(1))
            .map(|e| {
                running = running.max(self.multipliers[e].iter().map(|t| t.abs()).max().unwrap_or(0));
                factor * running
            })
            .collect()
    }

    /// Shifts added to axes `1..n`.
    pub fn shifts(&self) -> Vec<GroupElement> {
        self.rs()
            .iter()
            .enumerate()
            .map(|(e, &r)| self.bounds[e].as_ref().expect("validated bound").times(r))
            .collect()
    }

    /// Shifted sequence values per axis, indices `0..=horizon_e`.
    pub fn shifted_gammas(&self, horizons: &[usize]) -> Vec<Vec<GroupElement>> {
        let shifts = self.shifts();
        (0..self.axes())
            .map(|e| {
                let raw = self.sequences[e].terms_to(horizons[e]);
                if e == 0 {
                    raw
                } else {
                    raw.iter().map(|g| g + &shifts[e - 1]).collect()
                }
            })
            .collect()
    }
}

/// Core engine on explicit (already shifted) sequence values. Returns the
/// lexicographically least `nu` (axis order) such that every grid point with
/// `j_e > nu_e` satisfies the mode predicate.
pub fn certify_grid(
    betas: &BetaTensor,
    multipliers: &[Vec<i64>],
    gammas: &[Vec<GroupElement>],
    mode: Mode,
) -> Result<Vec<usize>> {
    let n = multipliers.len();
    let grid: Vec<usize> = gammas.iter().map(Vec::len).collect();
    if grid.iter().any(|&l| l == 0) {
        return Err(Error::InvalidSequence("empty sequence".into()));
    }
    let bad = bad_points(betas, multipliers, gammas, mode);
    let last: Vec<usize> = grid.iter().map(|l| l - 1).collect();
    let mut nus = vec![0usize; n];
    for e in 0..n {
        let mut nu = 0;
        let mut idx = vec![0; n];
        for &is_bad in &bad {
            if is_bad
                && (0..e).all(|c| idx[c] > nus[c])
                && (e + 1..n).all(|c| idx[c] == last[c])
            {
                nu = nu.max(idx[e]);
            }
            advance(&mut idx, &grid);
        }
        if nu >= last[e] {
            return Err(Error::HorizonExhausted { axis: e, horizon: last[e] });
        }
        nus[e] = nu;
    }
    Ok(nus)
}

fn bad_points(betas: &BetaTensor, multipliers: &[Vec<i64>], gammas: &[Vec<GroupElement>], mode: Mode) -> Vec<bool> {
    let n = multipliers.len();
    let grid: Vec<usize> = gammas.iter().map(Vec::len).collect();
    let shape = betas.shape().to_vec();
    // pre[e][j][i] = t_i * gamma_{e,j}
    let pre: Vec<Vec<Vec<GroupElement>>> = (0..n)
        .map(|e| gammas[e].iter().map(|g| multipliers[e].iter().map(|&t| g.times(t)).collect()).collect())
        .collect();
    let forms: Vec<(Vec<usize>, &GroupElement)> = {
        let mut out = Vec::new();
        let mut idx = vec![0; n];
        for b in betas.data() {
            if let Some(b) = b {
                out.push((idx.clone(), b));
            }
            advance(&mut idx, &shape);
        }
        out
    };
    let total: usize = grid.iter().product();
    let mut bad = Vec::with_capacity(total);
    let mut j = vec![0; n];
    let mut values: Vec<GroupElement> = Vec::with_capacity(forms.len());
    for _ in 0..total {
        values.clear();
        for (i, b) in &forms {
            let mut v = (*b).clone();
            for e in 0..n {
                v = &v + &pre[e][j[e]][i[e]];
            }
            values.push(v);
        }
        let is_bad = match mode {
            Mode::Nonzero => values.iter().any(GroupElement::is_zero),
            Mode::Distinct => {
                values.sort_unstable();
                values.windows(2).any(|w| w[0] == w[1])
            }
        };
        bad.push(is_bad);
        advance(&mut j, &grid);
    }
    bad
}

fn clip_horizons(p: &ThresholdProblem, horizons: &[usize]) -> Result<Vec<usize>> {
    if horizons.len() != p.axes() {
        return Err(Error::Precondition(format!("{} horizons for {} axes", horizons.len(), p.axes())));
    }
    Ok(p.sequences
        .iter()
        .zip(horizons)
        .map(|(s, &h)| s.available().map_or(h, |n| h.min(n - 1)))
        .collect())
}

/// One-axis Distinct problem: least `nu` with `beta_i + t_i g_s` pairwise
/// different for every checked `s > nu`, plus the eventually dominant form.
pub fn solve_threshold_1d(p: &ThresholdProblem, horizon: usize) -> Result<ThresholdCertificate> {
    if p.axes() != 1 {
        return Err(Error::Precondition(format!("expected one axis, got {}", p.axes())));
    }
    if p.mode != Mode::Distinct {
        return Err(Error::Precondition("one-axis solver needs Distinct mode".into()));
    }
    p.validate(false)?;
    let h = clip_horizons(p, &[horizon])?;
    let gammas = vec![p.sequences[0].terms_to(h[0])];
    let nus = certify_grid(&p.betas, &p.multipliers, &gammas, p.mode)?;
    let dominant = dominant_form(p, &gammas[0]);
    Ok(ThresholdCertificate { nus, shifts: Vec::new(), verified_horizon: h, dominant })
}

fn dominant_form(p: &ThresholdProblem, gammas: &[GroupElement]) -> Option<Dominant> {
    let ts = &p.multipliers[0];
    let argmin = |g: &GroupElement| -> Option<usize> {
        let vals: Vec<(usize, GroupElement)> = (0..ts.len())
            .filter_map(|i| p.betas.get(&[i]).map(|b| (i, b + &g.times(ts[i]))))
            .collect();
        let min = vals.iter().map(|(_, v)| v).min()?;
        let hits: Vec<usize> = vals.iter().filter(|(_, v)| v == min).map(|(i, _)| *i).collect();
        (hits.len() == 1).then(|| hits[0])
    };
    let last = gammas.len() - 1;
    let r = argmin(&gammas[last])?;
    let mut from = last;
    while from > 0 && argmin(&gammas[from - 1]) == Some(r) {
        from -= 1;
    }
    Some(Dominant { index: r, from })
}

/// Multi-axis solver for both modes, with the shifts `r_{e-1} a_{e-1}`.
pub fn solve_threshold_nd(p: &ThresholdProblem, horizons: &[usize]) -> Result<ThresholdCertificate> {
    p.validate(true)?;
    let h = clip_horizons(p, horizons)?;
    let gammas = p.shifted_gammas(&h);
    let nus = certify_grid(&p.betas, &p.multipliers, &gammas, p.mode)?;
    let dominant = if p.axes() == 1 && p.mode == Mode::Distinct { dominant_form(p, &gammas[0]) } else { None };
    Ok(ThresholdCertificate { nus, shifts: p.shifts(), verified_horizon: h, dominant })
}
