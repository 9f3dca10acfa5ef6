//! Projection success probabilities, repetition counts and the runtime-base
//! optimization for the Exact Cover solver.
//!
//! A random U of size `tn` is good for a fixed cover when every cover edge
//! meets U in at most two vertices. Counting good subsets is a trinomial sum
//! over how many cover edges are hit once or twice; the solver uses that exact
//! finite-`n` probability to size its repetition count. The asymptotic runtime
//! base `c_k` follows from a single dominant term with `tau12 N` cover edges hit
//! and `tau2 N` of them hit twice (`N = n / k`).

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::oracle::binomial;

/// Published parameter rows for k = 3..8: (k, tau12, tau2, t, I^(1/n), c_k).
pub const REFERENCE_ROWS: [(usize, f64, f64, f64, f64, f64); 6] = [
    (3, 0.961, 0.679, 0.547, 1.092, 1.496),
    (4, 0.936, 0.613, 0.387, 1.073, 1.642),
    (5, 0.921, 0.583, 0.301, 1.060, 1.721),
    (6, 0.912, 0.565, 0.246, 1.050, 1.771),
    (7, 0.905, 0.554, 0.208, 1.043, 1.806),
    (8, 0.900, 0.546, 0.181, 1.038, 1.832),
];

/// Published kDM runtime bases `2^((k-2)/k)` for k = 3..8.
pub const REFERENCE_KDM_BASES: [(usize, f64); 6] = [
    (3, 1.260),
    (4, 1.414),
    (5, 1.516),
    (6, 1.587),
    (7, 1.641),
    (8, 1.682),
];

/// Leading constant of the closed-form bound valid for every k.
pub const GENERAL_BOUND_CONSTANT: f64 = 8.415;

/// Fixed (tau12, tau2) behind the closed-form bound.
pub const GENERAL_TAU12: f64 = 0.9;
pub const GENERAL_TAU2: f64 = 0.6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ParamRow {
    pub k: usize,
    /// Fraction of cover edges meeting U at least once.
    pub tau12: f64,
    /// Fraction of cover edges meeting U exactly twice.
    pub tau2: f64,
    /// `|U| / n`.
    pub t: f64,
    /// Per-vertex base of the repetition count, `c_k / 2^(1-t)`.
    pub i_base: f64,
    pub c_k: f64,
}

fn xlnx(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

fn check_taus(k: usize, tau12: f64, tau2: f64) -> Result<()> {
    let ok = k >= 2
        && tau2.is_finite()
        && tau12.is_finite()
        && 0.0 <= tau2
        && tau2 <= tau12
        && tau12 <= 1.0
        && tau12 + tau2 <= k as f64;
    if ok {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "k = {k}, tau12 = {tau12}, tau2 = {tau2}"
        )))
    }
}

/// Natural log of the bracketed per-`N` runtime expression.
fn ln_runtime_bracket(k: usize, tau12: f64, tau2: f64) -> f64 {
    let kf = k as f64;
    let numerator =
        (kf - tau12) * std::f64::consts::LN_2 + xlnx(tau2) + xlnx(tau12 - tau2) + xlnx(1.0 - tau12);
    let denominator = (tau12 - kf) * kf.ln()
        + tau2 * (kf - 1.0).ln()
        + xlnx(kf - tau12 - tau2)
        + xlnx(tau12 + tau2);
    numerator - denominator
}

/// `c_k`, the k-th root of the per-`N` runtime bracket, so that the total
/// work is `c_k^n` up to polynomial factors.
pub fn runtime_base(k: usize, tau12: f64, tau2: f64) -> Result<f64> {
    check_taus(k, tau12, tau2)?;
    Ok((ln_runtime_bracket(k, tau12, tau2) / k as f64).exp())
}

/// Grid search with successive refinement for the `(tau12, tau2)` minimizing
/// [`runtime_base`].
pub fn optimize(k: usize) -> Result<ParamRow> {
    if k < 3 {
        return Err(Error::Domain(format!("optimization needs k >= 3, got {k}")));
    }
    let objective = |a: f64, b: f64| ln_runtime_bracket(k, a, b);
    let mut best = (f64::INFINITY, 0.0, 0.0);
    let scan = |lo12: f64, hi12: f64, lo2: f64, hi2: f64, step: f64, best: &mut (f64, f64, f64)| {
        let steps12 = ((hi12 - lo12) / step).round() as i64;
        let steps2 = ((hi2 - lo2) / step).round() as i64;
        for i in 0..=steps12 {
            let a = (lo12 + i as f64 * step).clamp(0.0, 1.0);
            for j in 0..=steps2 {
                let b = (lo2 + j as f64 * step).clamp(0.0, a);
                let v = objective(a, b);
                if v < best.0 {
                    *best = (v, a, b);
                }
            }
        }
    };
    let mut step = 0.01;
    scan(0.0, 1.0, 0.0, 1.0, step, &mut best);
    while step > 1e-6 {
        let (_, a, b) = best;
        let window = 2.0 * step;
        step /= 10.0;
        scan(
            (a - window).max(0.0),
            (a + window).min(1.0),
            (b - window).max(0.0),
            (b + window).min(1.0),
            step,
            &mut best,
        );
    }
    let (_, tau12, tau2) = best;
    let c_k = runtime_base(k, tau12, tau2)?;
    let t = (tau12 + tau2) / k as f64;
    Ok(ParamRow {
        k,
        tau12,
        tau2,
        t,
        i_base: c_k / 2f64.powf(1.0 - t),
        c_k,
    })
}

/// Closed-form upper bound on `c_k` valid for all `k >= 3`.
pub fn general_bound(k: usize) -> f64 {
    let kf = k as f64;
    let inner = GENERAL_BOUND_CONSTANT
        * kf.powf(0.9 - kf)
        * (kf - 1.0).powf(0.6)
        * (kf - 1.5).powf(kf - 1.5);
    2.0 * inner.powf(-1.0 / kf)
}

/// The constant `C` obtained by writing [`runtime_base`] at the fixed
/// `(0.9, 0.6)` as `2 (C k^(0.9-k) (k-1)^0.6 (k-1.5)^(k-1.5))^(-1/k)`.
pub fn general_bound_constant(k: usize) -> Result<f64> {
    check_taus(k, GENERAL_TAU12, GENERAL_TAU2)?;
    let kf = k as f64;
    let ln_shape = (0.9 - kf) * kf.ln() + 0.6 * (kf - 1.0).ln() + xlnx(kf - 1.5);
    let ln_c =
        kf * std::f64::consts::LN_2 - ln_runtime_bracket(k, GENERAL_TAU12, GENERAL_TAU2) - ln_shape;
    Ok(ln_c.exp())
}

/// Runtime base `2^((k-2)/k)` of the k-Dimensional Matching sieve.
pub fn kdm_base(k: usize) -> Result<f64> {
    if k < 2 {
        return Err(Error::Domain(format!("kDM base needs k >= 2, got {k}")));
    }
    Ok(2f64.powf((k as f64 - 2.0) / k as f64))
}

/// `|U|` used for an instance of `n` vertices at fraction `t`: nearest
/// integer, clamped to `[min(2, n), n]`.
pub fn u_size_for(n: usize, t: f64) -> usize {
    let raw = (t * n as f64).round() as usize;
    raw.clamp(n.min(2), n)
}

fn ratio_to_f64(num: BigUint, den: BigUint) -> f64 {
    BigRational::new(num.into(), den.into())
        .to_f64()
        .expect("probability is finite")
}

/// Number of `u_size`-subsets of the vertices that meet every edge of a fixed
/// exact cover in at most two vertices.
pub fn good_subset_count(n: usize, k: usize, u_size: usize) -> BigUint {
    let blocks = n / k;
    let pair_ways = BigUint::from(k * (k - 1) / 2);
    let single_ways = BigUint::from(k);
    let mut total = BigUint::zero();
    for twice in 0..=u_size / 2 {
        let once = u_size - 2 * twice;
        if once + twice > blocks {
            continue;
        }
        total += binomial(blocks, once)
            * binomial(blocks - once, twice)
            * pair_ways.pow(twice as u32)
            * single_ways.pow(once as u32);
    }
    total
}

/// Exact probability that a uniform `u_size`-subset keeps a fixed cover's
/// edges at projection size two or less.
pub fn success_probability(n: usize, k: usize, u_size: usize) -> Result<f64> {
    if k < 2 || !n.is_multiple_of(k) || u_size > n {
        return Err(Error::Domain(format!("n = {n}, k = {k}, |U| = {u_size}")));
    }
    if u_size == 0 {
        return Ok(1.0);
    }
    let good = good_subset_count(n, k, u_size);
    if good.is_zero() {
        return Err(Error::InfeasibleProjection { n, k, u_size });
    }
    Ok(ratio_to_f64(good, binomial(n, u_size)))
}

/// [`success_probability`] with `|U| = round(t n)`.
pub fn success_probability_exact(n: usize, k: usize, t: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&t) {
        return Err(Error::Domain(format!("t = {t}")));
    }
    success_probability(n, k, (t * n as f64).round() as usize)
}

/// Single dominant term of the trinomial sum divided by `C(n, |U|)`, with
/// `hit` cover edges meeting U and `hit_twice` of those meeting it twice.
pub fn single_term_bound(n: usize, k: usize, hit: usize, hit_twice: usize) -> Result<f64> {
    let blocks = n / k;
    if k < 2 || !n.is_multiple_of(k) || hit > blocks || hit_twice > hit {
        return Err(Error::Domain(format!(
            "n = {n}, k = {k}, hit = {hit}, twice = {hit_twice}"
        )));
    }
    let num = binomial(blocks, hit)
        * binomial(hit, hit_twice)
        * BigUint::from(k).pow(hit as u32)
        * BigUint::from(k - 1).pow(hit_twice as u32);
    let den = BigUint::from(2u32).pow(hit_twice as u32) * binomial(n, hit + hit_twice);
    // k^hit (k-1)^twice / 2^twice = k^once * C(k,2)^twice is an integer ratio
    Ok(ratio_to_f64(num, den))
}

/// Attempts needed so that a good U shows up with probability `1 - epsilon`:
/// `ceil(ln(1/epsilon) / Pr)`, never below one.
pub fn repetitions(n: usize, k: usize, u_size: usize, epsilon: f64) -> Result<u64> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Epsilon(epsilon));
    }
    let p = success_probability(n, k, u_size)?;
    Ok(((1.0 / epsilon).ln() / p).ceil().max(1.0) as u64)
}

/// Exact big-rational variant of [`repetitions`]'s quotient, for checking.
pub fn success_probability_rational(n: usize, k: usize, u_size: usize) -> BigRational {
    if u_size == 0 {
        return BigRational::one();
    }
    BigRational::new(
        good_subset_count(n, k, u_size).into(),
        binomial(n, u_size).into(),
    )
}

/// Full XkC parameter choice for one instance size.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct XkcPlan {
    pub t: f64,
    pub u_size: usize,
    pub success_probability: f64,
    pub repetitions: u64,
}

/// Picks `t` from the optimized row for `k` (or `(k = 2)` the whole
/// perfect-matching case `t = 1`) and sizes the repetition count.
pub fn plan_xkc(n: usize, k: usize, epsilon: f64) -> Result<XkcPlan> {
    let t = if k == 2 { 1.0 } else { optimize_cached(k)?.t };
    let u_size = u_size_for(n, t);
    Ok(XkcPlan {
        t,
        u_size,
        success_probability: success_probability(n, k, u_size)?,
        repetitions: repetitions(n, k, u_size, epsilon)?,
    })
}

fn optimize_cached(k: usize) -> Result<ParamRow> {
    use std::collections::HashMap;
    use std::sync::Mutex;
    static CACHE: Mutex<Option<HashMap<usize, ParamRow>>> = Mutex::new(None);
    if let Some(row) = CACHE.lock().unwrap().as_ref().and_then(|m| m.get(&k)) {
        return Ok(*row);
    }
    let row = optimize(k)?;
    CACHE
        .lock()
        .unwrap()
        .get_or_insert_with(HashMap::new)
        .insert(k, row);
    Ok(row)
}
