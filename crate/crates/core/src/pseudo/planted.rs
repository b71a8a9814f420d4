//! Instances with known ground truth.
//!
//! The ladder `s_e = mu + sigma (1 - b^(-e))` with `b` a power of `p` gives
//! `x = sum_{e>=1} t^(s_e)`, a root of `X^b - A X - B` where
//! `A = t^((b-1)(mu+sigma))` and `B = t^(b mu + (b-1) sigma)`. Partial sums
//! form a pseudo-convergent sequence along which that polynomial has
//! strictly increasing values.

use crate::error::{Error, Result};
use crate::field::FieldConfig;
use crate::group::GroupElement;
use crate::poly::MultiPoly;
use crate::series::Series;

use super::{ExponentRule, PseudoSequence, SeqRule};

/// Extra ladder terms kept in the exact pseudo limit beyond the window.
pub const LIMIT_MARGIN: usize = 4;

#[derive(Clone, Debug)]
pub struct PlantedInstance {
    pub seq: PseudoSequence,
    /// Exact truncation of the limit, a pseudo limit on the window.
    pub limit: Series,
    pub witness: Option<MultiPoly>,
    /// Exponents occurring in the witness coefficients, plus zero.
    pub palette: Vec<GroupElement>,
}

impl PlantedInstance {
    pub fn witness_degree(&self) -> Option<u32> {
        self.witness.as_ref().and_then(MultiPoly::degree)
    }
}

#[derive(Clone, Debug)]
pub struct PlantedParams {
    pub field: FieldConfig,
    /// Witness degree; a power of the characteristic.
    pub base: u32,
    pub mu: GroupElement,
    pub sigma: GroupElement,
    /// `v_0`; every term is shifted by it.
    pub offset: Series,
    pub window: usize,
}

fn is_power_of(b: u32, p: u32) -> bool {
    let mut x = b;
    while x > 1 && x % p == 0 {
        x /= p;
    }
    x == 1 && b > 1
}

fn check_params(p: &PlantedParams) -> Result<()> {
    if p.window < 3 {
        return Err(Error::TooShort { len: p.window, min: 3 });
    }
    if !is_power_of(p.base, p.field.p()) {
        return Err(Error::Precondition(format!("base {} is not a power of p = {}", p.base, p.field.p())));
    }
    let rank = p.field.rank();
    if p.mu.rank() != rank || p.sigma.rank() != rank {
        return Err(Error::RankMismatch { left: rank, right: p.mu.rank().max(p.sigma.rank()) });
    }
    if !p.sigma.is_positive() || p.mu.is_negative() {
        return Err(Error::Precondition("ladder needs sigma > 0 and mu >= 0".into()));
    }
    let horizon = (p.window + LIMIT_MARGIN) as u32;
    if (p.base as u128).checked_pow(horizon).map_or(true, |v| v > 1u128 << 40) {
        return Err(Error::Precondition(format!("base {} too large for window {}", p.base, p.window)));
    }
    Ok(())
}

/// Sequence `v_i = offset + sum_{e=1}^{i} t^(s_e)` without a witness.
pub fn ladder(p: &PlantedParams) -> Result<PlantedInstance> {
    check_params(p)?;
    let rule = SeqRule {
        coeff: 1,
        exponents: ExponentRule::Ladder { mu: p.mu.clone(), sigma: p.sigma.clone(), base: p.base },
    };
    let seq = PseudoSequence::from_rule(p.offset.clone(), rule, p.window)?;
    let limit = seq.extended(LIMIT_MARGIN)?.window().last().unwrap().clone();
    Ok(PlantedInstance { seq, limit, witness: None, palette: vec![GroupElement::zero(p.field.rank())] })
}

/// Ladder sequence together with its degree-`base` witness
/// `h(X) = (X - c0)^b - A (X - c0) - B`.
pub fn artin_schreier(p: &PlantedParams) -> Result<PlantedInstance> {
    let mut inst = ladder(p)?;
    let f = &p.field;
    let b = p.base as i64;
    let a = Series::t_pow(f, (&p.mu + &p.sigma).times(b - 1));
    let bb = Series::t_pow(f, &p.mu.times(b) + &p.sigma.times(b - 1));
    let x = MultiPoly::var(f, &["X"], "X")?;
    let shifted = &x - &MultiPoly::constant(f, &["X"], p.offset.clone());
    let h = &(&shifted.pow(p.base) - &shifted.scale(&a)) - &MultiPoly::constant(f, &["X"], bb);
    let mut palette: Vec<GroupElement> = vec![GroupElement::zero(f.rank())];
    for c in h.terms().values() {
        palette.extend(c.terms().iter().map(|(e, _)| e.clone()));
    }
    palette.sort();
    palette.dedup();
    inst.witness = Some(h);
    inst.palette = palette;
    Ok(inst)
}

/// Partial sums `v_i = sum_{j<=i} t^j` (first coordinate), with the linear
/// witness `(1 - t) X - 1`.
pub fn geometric(field: &FieldConfig, window: usize) -> Result<PlantedInstance> {
    if window < 3 {
        return Err(Error::TooShort { len: window, min: 3 });
    }
    let rank = field.rank();
    let mut unit = vec![0i64; rank];
    unit[0] = 1;
    let step = GroupElement::from_ints(&unit);
    let rule = SeqRule { coeff: 1, exponents: ExponentRule::Affine { start: GroupElement::zero(rank), step: step.clone() } };
    let seq = PseudoSequence::from_rule(Series::one(field), rule, window)?;
    let limit = seq.extended(LIMIT_MARGIN)?.window().last().unwrap().clone();
    let one_minus_t = &Series::one(field) - &Series::t_pow(field, step.clone());
    let witness = MultiPoly::univariate(field, "X", vec![Series::from_int(field, -1), one_minus_t]);
    Ok(PlantedInstance { seq, limit, witness: Some(witness), palette: vec![GroupElement::zero(rank), step] })
}

/// One level of a planted tower.
#[derive(Clone, Debug)]
pub struct PlantedLevel {
    pub x: Series,
    pub instance: PlantedInstance,
}

#[derive(Clone, Debug)]
pub struct PlantedTower {
    pub levels: Vec<PlantedLevel>,
    /// `x_n = h_{n-1}(x_{n-1})` after the last level.
    pub top: Series,
}

impl PlantedTower {
    pub fn hs(&self) -> Vec<MultiPoly> {
        self.levels.iter().map(|l| l.instance.witness.clone().expect("planted witness")).collect()
    }
}

/// Tower `x_{n+1} = h_n(x_n)`. Level 0 uses its offset as given; each later
/// level gets the offset `x_n - y` where `y` is its own ladder limit, so
/// that `x_n` is a pseudo limit of its sequence.
pub fn planted_tower(params: &[PlantedParams]) -> Result<PlantedTower> {
    if params.is_empty() {
        return Err(Error::Precondition("tower needs at least one level".into()));
    }
    let mut levels = Vec::with_capacity(params.len());
    let mut prev: Option<Series> = None;
    for p in params {
        let inst = match &prev {
            None => artin_schreier(p)?,
            Some(x) => {
                let bare = ladder(&PlantedParams { offset: Series::zero(&p.field), ..p.clone() })?;
                let offset = x - &bare.limit;
                artin_schreier(&PlantedParams { offset, ..p.clone() })?
            }
        };
        let x = inst.limit.clone();
        prev = Some(inst.witness.as_ref().unwrap().eval(std::slice::from_ref(&x)));
        levels.push(PlantedLevel { x, instance: inst });
    }
    let x = prev.expect("at least one level");
    Ok(PlantedTower { levels, top: x })
}
