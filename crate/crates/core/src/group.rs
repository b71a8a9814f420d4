//! The value group: `Q^n` under the lexicographic order, plus a formal top
//! element for the value of zero.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_rational::Ratio;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};

/// Exact rational used for exponent coordinates.
pub type Q = Ratio<i128>;

/// A finite element of `Q^n`. Ordering is lexicographic on the coordinates.
///
/// The derived `Ord` assumes equal ranks; use [`compare`] when ranks may
/// differ.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupElement {
    coords: Vec<Q>,
}

impl GroupElement {
    pub fn new(coords: Vec<Q>) -> Self {
        assert!(!coords.is_empty(), "rank must be at least 1");
        GroupElement { coords }
    }

    pub fn zero(rank: usize) -> Self {
        GroupElement::new(vec![Q::zero(); rank])
    }

    /// Element with integer coordinates.
    pub fn from_ints(xs: &[i64]) -> Self {
        GroupElement::new(xs.iter().map(|&x| Q::from_integer(x as i128)).collect())
    }

    /// Element from `(numerator, denominator)` pairs.
    pub fn from_fracs(xs: &[(i64, i64)]) -> Self {
        GroupElement::new(xs.iter().map(|&(n, d)| Q::new(n as i128, d as i128)).collect())
    }

    /// Rank-one element.
    pub fn scalar(q: Q) -> Self {
        GroupElement::new(vec![q])
    }

    pub fn rank(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[Q] {
        &self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(Zero::is_zero)
    }

    pub fn is_positive(&self) -> bool {
        self.signum() == Ordering::Greater
    }

    pub fn is_negative(&self) -> bool {
        self.signum() == Ordering::Less
    }

    /// Sign in the lexicographic order.
    pub fn signum(&self) -> Ordering {
        for c in &self.coords {
            if c.is_positive() {
                return Ordering::Greater;
            }
            if c.is_negative() {
                return Ordering::Less;
            }
        }
        Ordering::Equal
    }

    pub fn times(&self, k: i64) -> Self {
        let k = Q::from_integer(k as i128);
        GroupElement { coords: self.coords.iter().map(|c| c * k).collect() }
    }

    pub fn times_q(&self, k: &Q) -> Self {
        GroupElement { coords: self.coords.iter().map(|c| c * k).collect() }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        check_rank(self, other)?;
        Ok(self + other)
    }

    /// Parses `(a, b/c, ...)`; a bare rational is accepted as rank one.
    pub fn parse(s: &str) -> Result<Self> {
        let t = s.trim();
        let inner = match (t.strip_prefix('('), t.strip_suffix(')')) {
            (Some(_), Some(_)) => &t[1..t.len() - 1],
            _ => t,
        };
        let coords = inner
            .split(',')
            .map(|part| parse_rational(part.trim()).ok_or_else(|| Error::parse(s, "bad rational coordinate")))
            .collect::<Result<Vec<_>>>()?;
        if coords.is_empty() {
            return Err(Error::parse(s, "empty group element"));
        }
        Ok(GroupElement { coords })
    }
}

pub fn parse_rational(s: &str) -> Option<Q> {
    if s.is_empty() {
        return None;
    }
    match s.split_once('/') {
        Some((n, d)) => {
            let n: i128 = n.trim().parse().ok()?;
            let d: i128 = d.trim().parse().ok()?;
            if d == 0 {
                None
            } else {
                Some(Q::new(n, d))
            }
        }
        None => s.parse::<i128>().ok().map(Q::from_integer),
    }
}

fn check_rank(x: &GroupElement, y: &GroupElement) -> Result<()> {
    if x.rank() != y.rank() {
        return Err(Error::RankMismatch { left: x.rank(), right: y.rank() });
    }
    Ok(())
}

impl<'a> Add<&'a GroupElement> for &'a GroupElement {
    type Output = GroupElement;
    fn add(self, rhs: &GroupElement) -> GroupElement {
        debug_assert_eq!(self.rank(), rhs.rank());
        GroupElement { coords: self.coords.iter().zip(&rhs.coords).map(|(a, b)| a + b).collect() }
    }
}

impl Add for GroupElement {
    type Output = GroupElement;
    fn add(self, rhs: GroupElement) -> GroupElement {
        &self + &rhs
    }
}

impl<'a> Sub<&'a GroupElement> for &'a GroupElement {
    type Output = GroupElement;
    fn sub(self, rhs: &GroupElement) -> GroupElement {
        debug_assert_eq!(self.rank(), rhs.rank());
        GroupElement { coords: self.coords.iter().zip(&rhs.coords).map(|(a, b)| a - b).collect() }
    }
}

impl Sub for GroupElement {
    type Output = GroupElement;
    fn sub(self, rhs: GroupElement) -> GroupElement {
        &self - &rhs
    }
}

impl Neg for &GroupElement {
    type Output = GroupElement;
    fn neg(self) -> GroupElement {
        GroupElement { coords: self.coords.iter().map(|c| -c).collect() }
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Debug for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A value: a finite group element or the top element `Infinity`.
///
/// Variant order makes the derived `Ord` put `Infinity` above everything.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Finite(GroupElement),
    Infinity,
}

impl Value {
    pub fn is_infinite(&self) -> bool {
        matches!(self, Value::Infinity)
    }

    pub fn finite(&self) -> Option<&GroupElement> {
        match self {
            Value::Finite(g) => Some(g),
            Value::Infinity => None,
        }
    }

    /// `self + g`; infinity absorbs.
    pub fn shift(&self, g: &GroupElement) -> Value {
        match self {
            Value::Finite(x) => Value::Finite(x + g),
            Value::Infinity => Value::Infinity,
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("inf") || t == "∞" {
            Ok(Value::Infinity)
        } else {
            GroupElement::parse(t).map(Value::Finite)
        }
    }
}

impl From<GroupElement> for Value {
    fn from(g: GroupElement) -> Self {
        Value::Finite(g)
    }
}

impl Add for &Value {
    type Output = Value;
    fn add(self, rhs: &Value) -> Value {
        match (self, rhs) {
            (Value::Finite(a), Value::Finite(b)) => Value::Finite(a + b),
            _ => Value::Infinity,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Finite(g) => write!(f, "{g}"),
            Value::Infinity => write!(f, "inf"),
        }
    }
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Total order on values, checking ranks of finite operands.
pub fn compare(x: &Value, y: &Value) -> Result<Ordering> {
    if let (Value::Finite(a), Value::Finite(b)) = (x, y) {
        check_rank(a, b)?;
    }
    Ok(x.cmp(y))
}
