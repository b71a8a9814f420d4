//! Acceptance suite: one PASS/FAIL line per criterion. Oracles here are
//! written from the definitions and do not call the code under test for
//! the quantity being checked.

use std::path::PathBuf;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use valring::ci::{build_presentation, element_reduction_report, fraction_var, morphism, transition, Tower};
use valring::poly::{hasse_derivative, pseudo_divide, reduce_mod_tower};
use valring::pseudo::{
    artin_schreier, check_pseudo_convergent, factor_below_degree, image_sequence, is_pseudo_limit, planted_tower,
    scale_and_factor_multivar, Convergence, PlantedInstance, PlantedParams, PseudoSequence,
};
use valring::threshold::{solve_threshold_1d, solve_threshold_nd, BetaTensor, MonotoneSequence};
use valring::{Error, FieldConfig, GroupElement, Mode, MultiPoly, Series, ThresholdProblem, TowerSpec, Value, Q};
use valring_cli::report::mask_timing;
use valring_cli::{run_text, RunOptions};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn ge(xs: &[(i64, i64)]) -> GroupElement {
    GroupElement::from_fracs(xs)
}

fn zero_value(rank: usize) -> Value {
    Value::Finite(GroupElement::zero(rank))
}

// ---------------------------------------------------------------- criterion 1

fn random_q2(rng: &mut ChaCha8Rng, lo: i64, hi: i64) -> GroupElement {
    let d1 = rng.gen_range(1..=3);
    let d2 = rng.gen_range(1..=3);
    ge(&[(rng.gen_range(lo..=hi), d1), (rng.gen_range(lo..=hi), d2)])
}

/// Strictly increasing nonnegative window in Q^2 lex.
fn random_window(rng: &mut ChaCha8Rng, len: usize) -> Vec<GroupElement> {
    let mut cur = ge(&[(rng.gen_range(0..3), 1), (rng.gen_range(0..4), 1)]);
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        out.push(cur.clone());
        let step = if rng.gen_bool(0.3) {
            ge(&[(0, 1), (rng.gen_range(1..4), rng.gen_range(1..3))])
        } else {
            ge(&[(rng.gen_range(1..3), rng.gen_range(1..3)), (rng.gen_range(-4..5), 1)])
        };
        cur = &cur + &step;
    }
    out
}

fn random_multipliers(rng: &mut ChaCha8Rng, m: usize, distinct: bool) -> Vec<i64> {
    if distinct {
        let mut pool: Vec<i64> = (-7..=7).collect();
        pool.shuffle(rng);
        pool.truncate(m);
        pool
    } else {
        (0..m).map(|_| rng.gen_range(-7..=7)).collect()
    }
}

/// `sum_e t(idx_e) (gamma_e[j_e] + shift_e)` with `r_e = k max_{c<=e} |t|`
/// (`k = 2` for the distinct variant) and axis `e >= 1` shifted by
/// `r_{e-1} a_{e-1}`.
fn linear_part(p: &ThresholdProblem, gammas: &[Vec<GroupElement>], j: &[usize], idx: &[usize]) -> GroupElement {
    let n = p.multipliers.len();
    let k = if p.mode == Mode::Distinct { 2 } else { 1 };
    let mut running = 0i64;
    let mut acc = GroupElement::zero(2);
    for e in 0..n {
        let shift = if e == 0 {
            GroupElement::zero(2)
        } else {
            running = running.max(p.multipliers[e - 1].iter().map(|t| t.abs()).max().unwrap());
            p.bounds[e - 1].as_ref().unwrap().times(k * running)
        };
        acc = &acc + &(&gammas[e][j[e]] + &shift).times(p.multipliers[e][idx[e]]);
    }
    acc
}

fn oracle_values(p: &ThresholdProblem, gammas: &[Vec<GroupElement>], j: &[usize]) -> Vec<GroupElement> {
    let shape: Vec<usize> = p.multipliers.iter().map(Vec::len).collect();
    let mut out = Vec::new();
    let mut idx = vec![0usize; shape.len()];
    loop {
        if let Some(b) = p.betas.get(&idx) {
            out.push(b + &linear_part(p, gammas, j, &idx));
        }
        if !odometer(&mut idx, &shape) {
            break;
        }
    }
    out
}

/// Forces a collision (or a zero) at a random grid point.
fn plant_collision(rng: &mut ChaCha8Rng, p: &mut ThresholdProblem, gammas: &[Vec<GroupElement>]) {
    let shape: Vec<usize> = p.multipliers.iter().map(Vec::len).collect();
    let j: Vec<usize> = gammas.iter().map(|g| rng.gen_range(0..g.len().min(6))).collect();
    let pick = |rng: &mut ChaCha8Rng| shape.iter().map(|&m| rng.gen_range(0..m)).collect::<Vec<usize>>();
    let flat = |idx: &[usize]| idx.iter().zip(&shape).fold(0, |acc, (&i, &m)| acc * m + i);
    let mut data = p.betas.data().to_vec();
    let a = pick(rng);
    match p.mode {
        Mode::Nonzero => data[flat(&a)] = Some(-&linear_part(p, gammas, &j, &a)),
        Mode::Distinct => {
            let b = pick(rng);
            if a == b {
                return;
            }
            let Some(ba) = p.betas.get(&a).cloned() else { return };
            data[flat(&b)] = Some(&(&ba + &linear_part(p, gammas, &j, &a)) - &linear_part(p, gammas, &j, &b));
        }
    }
    p.betas = BetaTensor::new(shape, data).unwrap();
}

fn odometer(idx: &mut [usize], shape: &[usize]) -> bool {
    for a in (0..idx.len()).rev() {
        idx[a] += 1;
        if idx[a] < shape[a] {
            return true;
        }
        idx[a] = 0;
    }
    false
}

fn good(mode: Mode, mut vals: Vec<GroupElement>) -> bool {
    match mode {
        Mode::Nonzero => vals.iter().all(|v| !v.is_zero()),
        Mode::Distinct => {
            vals.sort();
            vals.windows(2).all(|w| w[0] != w[1])
        }
    }
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut problems, mut certified, mut exhausted, mut bad) = (0, 0, 0, Vec::new());
    let (mut minimality_checked, mut nontrivial) = (0, 0);
    while problems < 1200 {
        let n = [1, 1, 2, 2, 3][rng.gen_range(0..5)];
        let mode = if rng.gen_bool(0.6) { Mode::Distinct } else { Mode::Nonzero };
        let lens: Vec<usize> = (0..n)
            .map(|_| match n {
                1 => rng.gen_range(2..=200),
                2 => rng.gen_range(2..=30),
                _ => rng.gen_range(2..=10),
            })
            .collect();
        let ms: Vec<usize> = (0..n).map(|_| rng.gen_range(1..=5)).collect();
        let mut multipliers: Vec<Vec<i64>> = ms.iter().map(|&m| random_multipliers(&mut rng, m, mode == Mode::Distinct)).collect();
        if mode == Mode::Nonzero && !multipliers.iter().any(|ts| ts.iter().all(|&t| t != 0)) {
            let e = rng.gen_range(0..n);
            for t in &mut multipliers[e] {
                if *t == 0 {
                    *t = rng.gen_range(1..=7);
                }
            }
        }
        let windows: Vec<Vec<GroupElement>> = lens.iter().map(|&l| random_window(&mut rng, l)).collect();
        let total: usize = ms.iter().product();
        // betas near the window values so that collisions actually occur
        let data: Vec<Option<GroupElement>> = (0..total)
            .map(|_| {
                if rng.gen_bool(0.1) {
                    None
                } else if rng.gen_bool(0.5) {
                    let w = &windows[0];
                    Some(&w[rng.gen_range(0..w.len())].times(rng.gen_range(-2..=2)) + &random_q2(&mut rng, -1, 1))
                } else {
                    Some(random_q2(&mut rng, -6, 6))
                }
            })
            .collect();
        let mut bounds: Vec<Option<GroupElement>> = vec![None; n];
        let mut top = GroupElement::zero(2);
        for e in 0..n.saturating_sub(1) {
            let m = windows[e].last().unwrap().clone();
            if m > top {
                top = m;
            }
            bounds[e] = Some(&top + &ge(&[(1, 1), (0, 1)]));
        }
        let mut p = ThresholdProblem {
            betas: BetaTensor::new(ms.clone(), data).unwrap(),
            multipliers,
            sequences: windows.iter().map(|w| MonotoneSequence::new(w.clone(), None).unwrap()).collect(),
            bounds,
            mode,
        };
        if rng.gen_bool(0.5) {
            plant_collision(&mut rng, &mut p, &windows);
        }
        problems += 1;
        let horizons: Vec<usize> = lens.iter().map(|l| l - 1).collect();
        let res = if n == 1 && mode == Mode::Distinct { solve_threshold_1d(&p, horizons[0]) } else { solve_threshold_nd(&p, &horizons) };
        let cert = match res {
            Ok(c) => c,
            Err(Error::HorizonExhausted { .. }) => {
                exhausted += 1;
                continue;
            }
            Err(e) => {
                bad.push(format!("problem {problems}: unexpected {e}"));
                continue;
            }
        };
        certified += 1;
        if cert.nus.iter().any(|&v| v > 0) {
            nontrivial += 1;
        }
        // exhaustive re-verification over every j with j_e > nu_e
        let mut j: Vec<usize> = cert.nus.iter().map(|v| v + 1).collect();
        let lo = j.clone();
        let hi: Vec<usize> = cert.verified_horizon.clone();
        'grid: loop {
            if !good(mode, oracle_values(&p, &windows, &j)) {
                bad.push(format!("problem {problems}: certificate {:?} fails at {j:?}", cert.nus));
                break;
            }
            for a in (0..n).rev() {
                if j[a] < hi[a] {
                    j[a] += 1;
                    continue 'grid;
                }
                j[a] = lo[a];
            }
            break;
        }
        if n == 1 && mode == Mode::Distinct {
            minimality_checked += 1;
            let last = lens[0] - 1;
            let ok_from = |nu: usize| (nu + 1..=last).all(|s| good(mode, oracle_values(&p, &windows, &[s])));
            let brute = (0..last).find(|&nu| ok_from(nu));
            if brute != Some(cert.nus[0]) {
                bad.push(format!("problem {problems}: nu {} but brute force {brute:?}", cert.nus[0]));
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = bad.is_empty() && problems >= 1000 && secs < 60.0;
    outcome(
        pass,
        format!(
            "{problems} problems, {certified} certified ({nontrivial} with a positive threshold), {exhausted} horizon-exhausted, {minimality_checked} 1d minimality checks, {:.1}s{}",
            secs,
            bad.first().map(|b| format!("; first failure: {b}")).unwrap_or_default()
        ),
    )
}

// ---------------------------------------------------------------- criterion 2

fn random_series(rng: &mut ChaCha8Rng, f: &FieldConfig, terms: usize) -> Series {
    let q = f.q();
    let mut s = Series::zero(f);
    for _ in 0..terms {
        let e = GroupElement::from_fracs(&[(rng.gen_range(0..7), rng.gen_range(1..4))]);
        s = &s + &Series::monomial(f, rng.gen_range(1..q) as valring::Coeff, e);
    }
    s
}

fn random_univariate(rng: &mut ChaCha8Rng, f: &FieldConfig, deg: u32, var: &str) -> MultiPoly {
    let mut coeffs: Vec<Series> = (0..=deg).map(|_| if rng.gen_bool(0.7) { random_series(rng, f, 2) } else { Series::zero(f) }).collect();
    if coeffs[deg as usize].is_exact_zero() {
        coeffs[deg as usize] = Series::one(f);
    }
    MultiPoly::univariate(f, var, coeffs)
}

fn binom_mod(a: u64, b: u64, p: u64) -> u64 {
    // exact integer binomial; a <= 20 here
    let mut r: u128 = 1;
    for i in 0..b as u128 {
        r = r * (a as u128 - i) / (i + 1);
    }
    (r % p as u128) as u64
}

/// Multiplies a polynomial by an integer constant reduced mod p.
fn times_int(f: &MultiPoly, k: u64) -> MultiPoly {
    f.scale(&Series::from_int(f.field(), k as i64))
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut bad = Vec::new();
    let mut count = 0;
    let mut compositions = 0;
    for &p in &[2u32, 3, 5] {
        let f = FieldConfig::prime(p, 1).unwrap();
        for _ in 0..170 {
            let deg = rng.gen_range(0..=10);
            let g = random_univariate(&mut rng, &f, deg, "X");
            // f(Y + Z) by direct expansion
            let vars = ["Y", "Z"];
            let y = MultiPoly::var(&f, &vars, "Y").unwrap();
            let z = MultiPoly::var(&f, &vars, "Z").unwrap();
            let sum = &y + &z;
            let mut lhs = MultiPoly::zero(&f, &vars);
            let mut power = MultiPoly::constant(&f, &vars, Series::one(&f));
            for k in 0..=deg {
                if let Some(c) = g.coeff(&[k]) {
                    lhs = &lhs + &power.scale(c);
                }
                power = &power * &sum;
            }
            // sum_n D^n f(Y) Z^n
            let mut rhs = MultiPoly::zero(&f, &vars);
            let mut zn = MultiPoly::constant(&f, &vars, Series::one(&f));
            for n in 0..=deg {
                let dn = hasse_derivative(&g, 0, n).rename(vec!["Y".into()]).embed(&["Y".to_string(), "Z".to_string()]).unwrap();
                rhs = &rhs + &(&dn * &zn);
                zn = &zn * &z;
            }
            if lhs != rhs {
                bad.push(format!("Taylor identity fails over F{p} for {g}"));
            }
            count += 1;
            for a in 0..=10u32 {
                for b in 0..=(10 - a) {
                    let left = hasse_derivative(&hasse_derivative(&g, 0, b), 0, a);
                    let right = times_int(&hasse_derivative(&g, 0, a + b), binom_mod((a + b) as u64, a as u64, p as u64));
                    compositions += 1;
                    if left != right {
                        bad.push(format!("D^{a} D^{b} != C({},{a}) D^{} over F{p} for {g}", a + b, a + b));
                    }
                }
            }
        }
    }
    outcome(
        bad.is_empty() && count >= 500,
        format!("{count} Taylor identities, {compositions} composition checks, {} failures{}", bad.len(), first(&bad)),
    )
}

fn first(bad: &[String]) -> String {
    bad.first().map(|b| format!("; first: {b}")).unwrap_or_default()
}

// ---------------------------------------------------------------- criterion 3

/// Integral coefficients, leading coefficient a single monomial.
fn random_integral(rng: &mut ChaCha8Rng, f: &FieldConfig, deg: u32, lead_val: (i64, i64)) -> MultiPoly {
    let q = f.q();
    let mut coeffs: Vec<Series> = (0..deg).map(|_| if rng.gen_bool(0.7) { random_series(rng, f, 2) } else { Series::zero(f) }).collect();
    coeffs.push(Series::monomial(f, rng.gen_range(1..q) as valring::Coeff, ge(&[lead_val])));
    MultiPoly::univariate(f, "X", coeffs)
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut bad = Vec::new();
    let mut pairs = 0;
    let fields: Vec<FieldConfig> = [2u32, 3, 5].iter().map(|&p| FieldConfig::prime(p, 1).unwrap()).collect();
    let mut nonunit = 0;
    while pairs < 600 {
        let f = &fields[rng.gen_range(0..3)];
        let dh = rng.gen_range(1..=5);
        let df = rng.gen_range(0..=9);
        let lv = (rng.gen_range(0..4), rng.gen_range(1..3));
        if lv.0 > 0 {
            nonunit += 1;
        }
        let h = random_integral(&mut rng, f, dh, lv);
        let g = random_univariate(&mut rng, f, df, "X");
        pairs += 1;
        let pd = match pseudo_divide(&g, &h) {
            Ok(pd) => pd,
            Err(e) => {
                bad.push(format!("{g} / {h}: {e}"));
                continue;
            }
        };
        let lc = h.coeff(&[dh]).unwrap().clone();
        let expected_c = lc.pow(df.saturating_sub(dh) as u64 + if df >= dh { 1 } else { 0 });
        if pd.c != expected_c {
            bad.push(format!("c = {} but lc^(df-dh+1) = {expected_c}", pd.c));
        }
        let lhs = g.scale(&pd.c);
        let rhs = &(&pd.g1 * &h) + &pd.g0;
        if lhs != rhs {
            bad.push(format!("c f != g1 h + g0 for {g} / {h}"));
        }
        if pd.g0.degree().map_or(false, |d| d >= dh) {
            bad.push(format!("remainder degree too high for {g} / {h}"));
        }
    }
    // towers of length <= 3, deg h_e <= 4
    let mut towers = 0;
    for _ in 0..150 {
        let f = &fields[rng.gen_range(0..3)];
        let len = rng.gen_range(1..=3);
        let levels: Vec<MultiPoly> = (0..len)
            .map(|_| {
                let lv = (rng.gen_range(0..3), rng.gen_range(1..3));
                let d = rng.gen_range(2..=4);
                random_integral(&mut rng, f, d, lv)
            })
            .collect();
        let spec = TowerSpec::new(levels.clone()).unwrap();
        let d = rng.gen_range(0..=12);
        let g = random_univariate(&mut rng, f, d, "X");
        let red = match reduce_mod_tower(&g, &spec) {
            Ok(r) => r,
            Err(e) => {
                bad.push(format!("tower reduction of {g}: {e}"));
                continue;
            }
        };
        towers += 1;
        // back-substitute X_{i+1} = h_i(X_i) by plain evaluation at a
        // generic point: F(x, h_0(x), h_0(h_0..)) as a polynomial in x
        let mut vals: Vec<MultiPoly> = vec![MultiPoly::var(f, &["X"], "X").unwrap()];
        for h in &levels {
            let prev = vals.last().unwrap().clone();
            let mut acc = MultiPoly::zero(f, &["X"]);
            for k in (0..=h.degree().unwrap()).rev() {
                acc = &acc * &prev;
                if let Some(c) = h.coeff(&[k]) {
                    acc = &acc + &MultiPoly::constant(f, &["X"], c.clone());
                }
            }
            vals.push(acc);
        }
        let mut back = MultiPoly::zero(f, &["X"]);
        for (e, c) in red.f.terms() {
            let mut term = MultiPoly::constant(f, &["X"], c.clone());
            for (i, &k) in e.iter().enumerate() {
                term = &term * &vals[i].pow(k);
            }
            back = &back + &term;
        }
        if back != g.scale(&red.c) {
            bad.push(format!("back-substitution differs from c f for {g}"));
        }
    }
    outcome(
        bad.is_empty() && pairs >= 500,
        format!("{pairs} pairs ({nonunit} with non-unit leading value), {towers} tower reductions, {} failures{}", bad.len(), first(&bad)),
    )
}

// ---------------------------------------------------------------- criterion 4

fn planted(rng: &mut ChaCha8Rng, rank: usize) -> PlantedInstance {
    let (p, q, base) = [(2, 2, 2), (3, 3, 3), (2, 2, 4), (2, 4, 4), (2, 4, 2)][rng.gen_range(0..5)];
    let field = FieldConfig::new(p, q, rank).unwrap();
    let (mu, sigma) = if rank == 1 {
        (ge(&[(rng.gen_range(0..3), rng.gen_range(1..3))]), ge(&[(rng.gen_range(1..4), rng.gen_range(1..3))]))
    } else {
        (
            ge(&[(rng.gen_range(0..2), 1), (rng.gen_range(0..3), 1)]),
            ge(&[(rng.gen_range(1..3), 1), (rng.gen_range(-5..6), rng.gen_range(1..3))]),
        )
    };
    let mut unit = vec![0i64; rank];
    unit[0] = 1;
    let offset = if rng.gen_bool(0.5) {
        Series::one(&field)
    } else {
        &Series::one(&field) + &Series::t_pow(&field, GroupElement::from_fracs(&vec![(1, 5); rank]))
    };
    let params = PlantedParams { field, base, mu, sigma, offset, window: rng.gen_range(8..=10) };
    artin_schreier(&params).unwrap()
}

fn random_below(rng: &mut ChaCha8Rng, inst: &PlantedInstance, deg: u32) -> MultiPoly {
    let f = inst.seq.field();
    let q = f.q();
    let coeffs: Vec<Series> = (0..=deg)
        .map(|k| {
            let c = if k == deg || rng.gen_bool(0.7) { rng.gen_range(1..q) } else { 0 };
            let e = inst.palette[rng.gen_range(0..inst.palette.len())].clone();
            Series::monomial(f, c as valring::Coeff, e)
        })
        .collect();
    MultiPoly::univariate(f, "X", coeffs)
}

/// Values of the Taylor terms `D^n g(v) (x - v)^n`, from the coefficients
/// of `g(v + W)` computed by direct expansion.
fn taylor_term_values(g: &MultiPoly, v: &Series, x: &Series) -> Vec<Value> {
    let f = g.field();
    let w = MultiPoly::var(f, &["W"], "W").unwrap();
    let shifted = &MultiPoly::constant(f, &["W"], v.clone()) + &w;
    let mut acc = MultiPoly::zero(f, &["W"]);
    for k in (0..=g.degree().unwrap_or(0)).rev() {
        acc = &acc * &shifted;
        if let Some(c) = g.coeff(&[k]) {
            acc = &acc + &MultiPoly::constant(f, &["W"], c.clone());
        }
    }
    let gap = (x - v).val().value;
    (0..=g.degree().unwrap_or(0))
        .map(|n| match acc.coeff(&[n]) {
            None => Value::Infinity,
            Some(c) => match (&c.val().value, &gap) {
                (Value::Finite(a), Value::Finite(b)) => Value::Finite(a + &b.times(n as i64)),
                _ => Value::Infinity,
            },
        })
        .collect()
}

fn check_unit_factor(
    d: &Series,
    u: &Series,
    target: &Series,
    rank: usize,
    label: &str,
    bad: &mut Vec<String>,
) {
    let vu = u.val();
    if !vu.is_exact() || vu.value != zero_value(rank) {
        bad.push(format!("{label}: val(u) = {}", vu.value));
    }
    let diff = &(d * u) - target;
    if !diff.is_zero_to_prec() {
        bad.push(format!("{label}: d u - target = {diff}"));
    }
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let prec1 = ge(&[(12, 1)]);
    let mut bad = Vec::new();
    let (mut instances, mut successes, mut multi) = (0, 0, 0);
    for k in 0..120 {
        let rank = if k % 3 == 2 { 2 } else { 1 };
        let inst = planted(&mut rng, rank);
        let prec = if rank == 1 { prec1.clone() } else { ge(&[(12, 1), (0, 1)]) };
        let s_min = inst.witness_degree().unwrap();
        instances += 1;
        let deg = rng.gen_range(1..s_min);
        let g = random_below(&mut rng, &inst, deg);
        let label = format!("instance {k} g = {g}");
        match factor_below_degree(&g, &inst.limit, &inst.seq, s_min, &prec) {
            Ok(fac) => {
                successes += 1;
                let target = g.eval(std::slice::from_ref(&inst.limit));
                check_unit_factor(&fac.d, &fac.u, &target, rank, &label, &mut bad);
                let vals = taylor_term_values(&g, &inst.seq.window()[fac.index[0]], &inst.limit);
                let v0 = &vals[0];
                if v0.is_infinite() || vals[1..].iter().any(|v| v <= v0) {
                    bad.push(format!("{label}: constant term not strictly minimal: {vals:?}"));
                }
                // n = 0 of the multivariate version
                let h = inst.witness.clone().unwrap();
                match scale_and_factor_multivar(&g, &[inst.limit.clone()], &[inst.seq.clone()], &[h], &[], &prec) {
                    Ok(m) => {
                        multi += 1;
                        check_unit_factor(&m.factorization.d, &m.factorization.u, &target, rank, &label, &mut bad);
                    }
                    Err(e) => bad.push(format!("{label}: multivariate: {e}")),
                }
            }
            Err(e) => bad.push(format!("{label}: {e}")),
        }
    }
    // two-variable factorizations over planted towers
    let mut towers = 0;
    for k in 0..20 {
        let f = FieldConfig::prime(2, 1).unwrap();
        let params = |sigma: i64, offset: Series| PlantedParams {
            field: f.clone(),
            base: 2,
            mu: GroupElement::zero(1),
            sigma: ge(&[(sigma, 1)]),
            offset,
            window: 8,
        };
        let t = planted_tower(&[params(1, Series::one(&f)), params(3, Series::zero(&f))]).unwrap();
        let ys: Vec<Series> = t.levels.iter().map(|l| l.x.clone()).collect();
        let seqs: Vec<PseudoSequence> = t.levels.iter().map(|l| l.instance.seq.clone()).collect();
        let mut g = MultiPoly::zero(&f, &["Y0", "Y1"]);
        for a in 0..2u32 {
            for b in 0..2u32 {
                if rng.gen_bool(0.6) || (a, b) == (0, 0) {
                    let e = GroupElement::from_fracs(&[(rng.gen_range(0..3), rng.gen_range(1..3))]);
                    g.add_term(vec![a, b], Series::t_pow(&f, if (a, b) == (0, 0) { GroupElement::zero(1) } else { e }));
                }
            }
        }
        towers += 1;
        match scale_and_factor_multivar(&g, &ys, &seqs, &t.hs(), &[], &prec1) {
            Ok(m) => {
                successes += 1;
                check_unit_factor(&m.factorization.d, &m.factorization.u, &g.eval(&ys), 1, &format!("tower {k} g = {g}"), &mut bad);
            }
            Err(e) => bad.push(format!("tower {k} g = {g}: {e}")),
        }
    }
    outcome(
        bad.is_empty() && instances >= 100,
        format!(
            "{instances} planted instances, {successes} factorizations ({multi} via the multivariate path, {towers} two-level), {} failures{}",
            bad.len(),
            first(&bad)
        ),
    )
}

// ---------------------------------------------------------------- criterion 5

fn random_tower(rng: &mut ChaCha8Rng) -> Tower {
    let f = FieldConfig::prime(2, 1).unwrap();
    let (b0, b1) = [(2, 2), (2, 4), (4, 2)][rng.gen_range(0..3)];
    let s0 = rng.gen_range(1..3);
    let s1 = s0 + rng.gen_range(1..3);
    let params = |base: u32, sigma: i64, offset: Series| PlantedParams {
        field: f.clone(),
        base,
        mu: GroupElement::zero(1),
        sigma: ge(&[(sigma, 1)]),
        offset,
        window: 8,
    };
    let t = planted_tower(&[params(b0, s0, Series::one(&f)), params(b1, s1, Series::zero(&f))]).unwrap();
    Tower::from_planted(&t).unwrap()
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let prec = ge(&[(10, 1)]);
    let mut bad = Vec::new();
    let (mut presentations, mut pairs, mut reductions, mut units, mut short) = (0, 0, 0, 0, 0);
    let zero = zero_value(1);
    for k in 0..6 {
        let t = random_tower(&mut rng);
        for _ in 0..5 {
            let j = vec![rng.gen_range(0..4), rng.gen_range(0..4)];
            let j2 = vec![j[0] + rng.gen_range(0..3), j[1] + rng.gen_range(0..3)];
            let (p, q) = match (build_presentation(&t, &j, &prec), build_presentation(&t, &j2, &prec)) {
                (Ok(p), Ok(q)) => (p, q),
                (Err(e), _) | (_, Err(e)) => {
                    bad.push(format!("tower {k} {j:?}/{j2:?}: {e}"));
                    continue;
                }
            };
            presentations += 2;
            for pres in [&p, &q] {
                // (a) vanishing by direct evaluation
                for (e, g) in pres.relations.iter().enumerate() {
                    let r = g.eval(&pres.witness);
                    if !r.is_zero_to_prec() {
                        bad.push(format!("tower {k} {:?}: relation {e} leaves {r}", pres.indices));
                    }
                }
                // (b) triangular shape, read off the terms
                for (e, g) in pres.relations.iter().enumerate() {
                    let ok = g.terms().iter().all(|(ex, _)| {
                        ex.iter().enumerate().all(|(c, &x)| x == 0 || c == e || c == e + 1) && ex[e + 1] <= 1
                    }) && g.terms().iter().filter(|(ex, _)| ex[e + 1] == 1).all(|(ex, c)| {
                        ex.iter().enumerate().all(|(c2, &x)| c2 == e + 1 || x == 0) && c.exact_val().is_ok()
                    }) && g.terms().keys().any(|ex| ex[e + 1] == 1);
                    if !ok {
                        bad.push(format!("tower {k} {:?}: relation {e} is not triangular", pres.indices));
                    }
                }
                // (d) fraction variables are units
                for (e, &jj) in pres.indices.iter().enumerate() {
                    let x = fraction_var(&t.levels()[e], jj, &prec).unwrap();
                    units += 1;
                    if x.val().value != zero {
                        bad.push(format!("x_{e},{jj} has value {}", x.val().value));
                    }
                }
            }
            // (c) filtered compatibility
            match morphism(&t, &p, &q) {
                Ok(m) => {
                    pairs += 1;
                    if !m.is_compatible() {
                        bad.push(format!("tower {k} {j:?} -> {j2:?}: image not in target ideal"));
                    }
                    for img in &m.images {
                        if !img.eval(&q.witness).is_zero_to_prec() {
                            bad.push(format!("tower {k} {j:?} -> {j2:?}: image does not vanish at the target witness"));
                        }
                    }
                    for tm in m.maps.iter().flatten() {
                        if tm.alpha.val().value != zero || tm.beta.val().value <= zero {
                            bad.push(format!("transition {}->{}: alpha {} beta {}", tm.from, tm.to, tm.alpha, tm.beta));
                        }
                        // affine identity against independently computed fraction variables
                        let lvl = m.maps.iter().position(|x| x.as_ref() == Some(tm)).unwrap();
                        let a = fraction_var(&t.levels()[lvl], tm.from, &prec).unwrap();
                        let b = fraction_var(&t.levels()[lvl], tm.to, &prec).unwrap();
                        if !(&a - &(&tm.alpha + &(&tm.beta * &b))).is_zero_to_prec() {
                            bad.push(format!("transition {}->{} does not relate the fraction variables", tm.from, tm.to));
                        }
                    }
                }
                Err(e) => bad.push(format!("tower {k} {j:?} -> {j2:?}: {e}")),
            }
        }
        // composition of transitions
        let lvl = &t.levels()[0];
        let ab = transition(lvl, 0, 2, &prec).unwrap().then(&transition(lvl, 2, 5, &prec).unwrap()).unwrap();
        let direct = transition(lvl, 0, 5, &prec).unwrap();
        if !(&ab.alpha - &direct.alpha).is_zero_to_prec() || !(&ab.beta - &direct.beta).is_zero_to_prec() {
            bad.push(format!("tower {k}: transition composition mismatch"));
        }
        for _ in 0..8 {
            let f = FieldConfig::prime(2, 1).unwrap();
            let deg = rng.gen_range(0..=6);
            let mut coeffs: Vec<Series> = (0..=deg)
                .map(|_| if rng.gen_bool(0.6) { Series::t_pow(&f, ge(&[(rng.gen_range(0..4), rng.gen_range(1..3))])) } else { Series::zero(&f) })
                .collect();
            coeffs[0] = Series::one(&f);
            coeffs[deg as usize] = Series::one(&f);
            let g = MultiPoly::univariate(&f, "X", coeffs);
            match element_reduction_report(&g, &t, None, &prec) {
                Ok(r) => {
                    reductions += 1;
                    let fx = g.eval(std::slice::from_ref(&t.levels()[0].x));
                    check_unit_factor(&r.d_prime, &r.u, &fx, 1, &format!("reduction of {g}"), &mut bad);
                    if !r.unit_shape {
                        bad.push(format!("reduction of {g}: F(q) is not d times a unit"));
                    }
                    let direct = r.reduction.f.eval(
                        &r.indices
                            .iter()
                            .enumerate()
                            .map(|(e, &j)| t.levels()[e].seq.window()[j].clone())
                            .chain(std::iter::repeat(Series::zero(&f)))
                            .take(r.reduction.f.vars().len())
                            .collect::<Vec<_>>(),
                    );
                    if direct != r.constant {
                        bad.push(format!("reduction of {g}: constant term differs from F(a)"));
                    }
                }
                Err(Error::TowerTooShort { .. } | Error::HorizonExhausted { .. } | Error::NoSeparatingIndex) => short += 1,
                Err(e) => bad.push(format!("reduction of {g} on tower {k}: {e}")),
            }
        }
    }
    let pass = bad.is_empty() && pairs >= 20 && reductions >= 20;
    outcome(
        pass,
        format!(
            "{presentations} presentations, {pairs} morphism pairs, {units} unit checks, {reductions} element reductions ({short} outside the window), {} failures{}",
            bad.len(),
            first(&bad)
        ),
    )
}

// ---------------------------------------------------------------- criterion 6

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut bad = Vec::new();
    let (mut images, mut mutated) = (0, 0);
    for k in 0..80 {
        let rank = if k % 4 == 3 { 2 } else { 1 };
        let inst = planted(&mut rng, rank);
        let f = inst.seq.field().clone();
        let deg = rng.gen_range(1..=3);
        let mut g = random_below(&mut rng, &inst, deg);
        if g.degree() == Some(0) {
            g = MultiPoly::parse("1 => 1", &f, &["X"]).unwrap();
        }
        match image_sequence(&g, &inst.seq, Some(&inst.limit)) {
            Ok(im) => {
                images += 1;
                if im.limit_verified != Some(true) {
                    bad.push(format!("instance {k}: f(x) not verified as pseudo limit for {g}"));
                }
                let tail = im.tail().unwrap();
                if !matches!(check_pseudo_convergent(&tail), Ok(Convergence::Certified { .. })) {
                    bad.push(format!("instance {k}: image tail not pseudo-convergent for {g}"));
                }
                let fx = g.eval(std::slice::from_ref(&inst.limit));
                if !is_pseudo_limit(&fx, &tail).unwrap_or(false) {
                    bad.push(format!("instance {k}: independent pseudo-limit check fails for {g}"));
                }
            }
            Err(e) => bad.push(format!("instance {k}: image of {g}: {e}")),
        }
        // single-term corruptions that provably break pseudo-convergence
        let w = inst.seq.window().to_vec();
        let n = w.len();
        let gamma0 = (&w[1] - &w[0]).val().value.finite().unwrap().clone();
        let low = &gamma0 - &GroupElement::from_fracs(&vec![(1, 2); rank]);
        let kk = rng.gen_range(2..n);
        let mut a = w.clone();
        a[kk] = &a[kk] + &Series::t_pow(&f, low);
        let kd = rng.gen_range(1..n - 1);
        let mut b = w.clone();
        b[kd] = b[kd - 1].clone();
        for (label, win) in [("low-value shift", a), ("duplicate", b)] {
            mutated += 1;
            let s = PseudoSequence::new(win, None).unwrap();
            match check_pseudo_convergent(&s) {
                Ok(Convergence::Violation { .. }) => {}
                other => bad.push(format!("instance {k}: {label} not rejected: {other:?}")),
            }
        }
    }
    outcome(
        bad.is_empty() && images > 0,
        format!("{images} image sequences, {mutated} mutated windows, {} failures{}", bad.len(), first(&bad)),
    )
}

// ---------------------------------------------------------------- criterion 7

fn criterion_7() -> Outcome {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let mut bad = Vec::new();
    let names = ["geometric-F2", "artin-schreier-F3", "threshold", "tower-F2", "hasse-F5"];
    for name in names {
        let text = std::fs::read_to_string(root.join("scenarios").join(format!("{name}.toml"))).unwrap();
        let golden = std::fs::read_to_string(root.join("golden").join(format!("{name}.report"))).unwrap_or_default();
        let runs: Vec<String> =
            (0..2).map(|_| mask_timing(&run_text(&text, &RunOptions::default()).unwrap().to_text())).collect();
        if runs[0] != runs[1] {
            bad.push(format!("{name}: two runs differ"));
        }
        if runs[0] != golden {
            bad.push(format!("{name}: differs from the committed golden report"));
        }
    }
    outcome(bad.is_empty(), format!("{} golden scenarios, {} failures{}", names.len(), bad.len(), first(&bad)))
}

fn main() {
    // libtest flags such as --nocapture are accepted and ignored
    let criteria: [(&str, fn() -> Outcome); 7] = [
        ("1 threshold certificates", criterion_1),
        ("2 Hasse-Schmidt identities", criterion_2),
        ("3 pseudo-division and towers", criterion_3),
        ("4 unit factorizations", criterion_4),
        ("5 presentations", criterion_5),
        ("6 sequence calculus", criterion_6),
        ("7 determinism", criterion_7),
    ];
    let _ = Q::from_integer(0);
    let mut failed = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!(
            "criterion {name}: {} ({}; {:.1}s)",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            start.elapsed().as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
