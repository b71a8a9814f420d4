//! Finite coefficient fields `F_q`, `q = p^k <= 256`, with table arithmetic.
//!
//! An element is encoded as the integer `sum_i c_i p^i` where `c_i` is the
//! coefficient of `alpha^i` and `alpha` is a root of the lexicographically
//! first monic irreducible polynomial of degree `k` over `F_p`. For `k = 1`
//! this is just the residue mod `p`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

pub type Coeff = u16;

const MAX_Q: u32 = 256;

struct Tables {
    add: Vec<Coeff>,
    mul: Vec<Coeff>,
    neg: Vec<Coeff>,
    inv: Vec<Coeff>,
    modulus: Vec<u32>,
}

/// Coefficient field together with the rank of the value group.
#[derive(Clone)]
pub struct FieldConfig {
    p: u32,
    k: u32,
    q: u32,
    rank: usize,
    tables: Arc<Tables>,
}

impl PartialEq for FieldConfig {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.q == other.q && self.rank == other.rank
    }
}

impl Eq for FieldConfig {}

impl fmt::Debug for FieldConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{} (p={}, rank={})", self.q, self.p, self.rank)
    }
}

fn is_prime(n: u32) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
}

impl FieldConfig {
    pub fn new(p: u32, q: u32, rank: usize) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::InvalidField { field: "p", reason: format!("= {p} is not prime") });
        }
        if rank == 0 {
            return Err(Error::InvalidField { field: "rank", reason: "must be at least 1".into() });
        }
        if q > MAX_Q {
            return Err(Error::InvalidField { field: "q", reason: format!("= {q} exceeds {MAX_Q}") });
        }
        let mut k = 0;
        let mut r = q;
        while r > 1 && r % p == 0 {
            r /= p;
            k += 1;
        }
        if r != 1 || k == 0 {
            return Err(Error::InvalidField { field: "q", reason: format!("= {q} is not a power of p = {p}") });
        }
        let tables = Arc::new(build_tables(p, k, q));
        Ok(FieldConfig { p, k, q, rank, tables })
    }

    /// Prime field `F_p` with the given rank.
    pub fn prime(p: u32, rank: usize) -> Result<Self> {
        Self::new(p, p, rank)
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn degree(&self) -> u32 {
        self.k
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Coefficients (low to high, monic) of the defining polynomial.
    pub fn modulus(&self) -> &[u32] {
        &self.tables.modulus
    }

    pub fn contains(&self, c: u32) -> bool {
        c < self.q
    }

    #[inline]
    pub fn add(&self, a: Coeff, b: Coeff) -> Coeff {
        self.tables.add[a as usize * self.q as usize + b as usize]
    }

    #[inline]
    pub fn mul(&self, a: Coeff, b: Coeff) -> Coeff {
        self.tables.mul[a as usize * self.q as usize + b as usize]
    }

    #[inline]
    pub fn neg(&self, a: Coeff) -> Coeff {
        self.tables.neg[a as usize]
    }

    #[inline]
    pub fn sub(&self, a: Coeff, b: Coeff) -> Coeff {
        self.add(a, self.neg(b))
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self, a: Coeff) -> Option<Coeff> {
        (a != 0).then(|| self.tables.inv[a as usize])
    }

    /// Image of an integer in the prime subfield.
    pub fn from_int(&self, n: i64) -> Coeff {
        n.rem_euclid(self.p as i64) as Coeff
    }

    pub fn pow(&self, a: Coeff, mut e: u64) -> Coeff {
        let mut base = a;
        let mut acc: Coeff = 1;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// `binom(m, n) mod p` by Lucas' theorem.
    pub fn binomial(&self, m: u64, n: u64) -> Coeff {
        let p = self.p as u64;
        let (mut m, mut n) = (m, n);
        let mut acc: u64 = 1;
        while n > 0 || m > 0 {
            let (mi, ni) = (m % p, n % p);
            if ni > mi {
                return 0;
            }
            acc = acc * small_binomial(mi, ni) % p;
            m /= p;
            n /= p;
        }
        acc as Coeff
    }
}

fn small_binomial(m: u64, n: u64) -> u64 {
    let mut r: u64 = 1;
    for i in 0..n {
        r = r * (m - i) / (i + 1);
    }
    r
}

fn digits(mut x: u32, p: u32, k: u32) -> Vec<u32> {
    (0..k)
        .map(|_| {
            let d = x % p;
            x /= p;
            d
        })
        .collect()
}

fn undigits(ds: &[u32], p: u32) -> u32 {
    ds.iter().rev().fold(0, |acc, &d| acc * p + d)
}

/// Product of two residues mod (modulus), both given as digit vectors.
fn poly_mulmod(a: &[u32], b: &[u32], modulus: &[u32], p: u32) -> Vec<u32> {
    let k = modulus.len() - 1;
    let mut prod = vec![0u32; 2 * k.max(1)];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x * y) % p;
        }
    }
    for deg in (k..prod.len()).rev() {
        let c = prod[deg];
        if c == 0 {
            continue;
        }
        for (i, &m) in modulus.iter().enumerate() {
            let idx = deg - k + i;
            prod[idx] = (prod[idx] + (p - c) * m % p) % p;
        }
    }
    prod.truncate(k);
    prod
}

fn has_factor_of_degree(poly: &[u32], d: usize, p: u32) -> bool {
    // Trial division by every monic polynomial of degree d.
    let count = (p as u64).pow(d as u32);
    (0..count).any(|code| {
        let mut divisor = digits(code as u32, p, d as u32);
        divisor.push(1);
        let mut r = poly.to_vec();
        for deg in (d..r.len()).rev() {
            let c = r[deg];
            if c == 0 {
                continue;
            }
            for (i, &m) in divisor.iter().enumerate() {
                let idx = deg - d + i;
                r[idx] = (r[idx] + (p - c) * m % p) % p;
            }
        }
        r[..d].iter().all(|&x| x == 0)
    })
}

fn first_irreducible(p: u32, k: u32) -> Vec<u32> {
    if k == 1 {
        return vec![0, 1];
    }
    let count = p.pow(k);
    for code in 0..count {
        let mut poly = digits(code, p, k);
        poly.push(1);
        if (1..=(k as usize) / 2).all(|d| !has_factor_of_degree(&poly, d, p)) {
            return poly;
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}

fn build_tables(p: u32, k: u32, q: u32) -> Tables {
    let modulus = first_irreducible(p, k);
    let n = q as usize;
    let mut add = vec![0; n * n];
    let mut mul = vec![0; n * n];
    let mut neg = vec![0; n];
    let mut inv = vec![0; n];
    for a in 0..q {
        let da = digits(a, p, k);
        neg[a as usize] = undigits(&da.iter().map(|&x| (p - x) % p).collect::<Vec<_>>(), p) as Coeff;
        for b in 0..q {
            let db = digits(b, p, k);
            let s: Vec<u32> = da.iter().zip(&db).map(|(x, y)| (x + y) % p).collect();
            add[a as usize * n + b as usize] = undigits(&s, p) as Coeff;
            let m = if k == 1 { vec![a * b % p] } else { poly_mulmod(&da, &db, &modulus, p) };
            mul[a as usize * n + b as usize] = undigits(&m, p) as Coeff;
        }
    }
    for a in 1..n {
        inv[a] = (1..n).find(|&b| mul[a * n + b] == 1).expect("field element has an inverse") as Coeff;
    }
    Tables { add, mul, neg, inv, modulus }
}
