//! Exact bookkeeping for the census of `(𝒢, K)`-extensions: local
//! cohomology sizes, the family sizes `#𝔄_V`, `#𝔅_V`, `#𝒲_Y`, tame
//! discriminants, the family set `M(y)` and the resulting lower bound for
//! the number of extensions with discriminant up to `x`.
//!
//! The unknown positive constants of the lower bounds are carried as the
//! parameters `C_w` and `C_b` (both 1 unless given), so every bound here is
//! only up to that constant.

use std::collections::HashSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::is_prime;
use crate::error::{Error, Result};
use crate::fields::SemidirectDescriptor;
use crate::serial;
use crate::sieve::{bad_prime_set, verify_lemma_te, SieveConfig, TePrimeRecord};

pub const MIN_FIT_POINTS: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CountingParams {
    pub p: u64,
    pub n: u32,
    pub b_order: u64,
    pub r: u64,
    #[serde(serialize_with = "serial::as_string")]
    pub c_w: BigRational,
    #[serde(serialize_with = "serial::as_string")]
    pub c_b: BigRational,
    pub pool: Vec<u64>,
}

impl CountingParams {
    pub fn new(
        p: u64,
        n: u32,
        b_order: u64,
        pool: Vec<u64>,
        c_w: BigRational,
        c_b: BigRational,
    ) -> Result<Self> {
        check_p_n(p, n)?;
        if b_order == 0 || !b_order.is_multiple_of(p - 1) {
            return Err(Error::Config(format!(
                "|B| = {b_order} is not a multiple of p - 1 = {}",
                p - 1
            )));
        }
        if !c_w.is_positive() || !c_b.is_positive() {
            return Err(Error::Config(
                "the constants C_w and C_b must be positive".into(),
            ));
        }
        if pool.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("pool must be strictly increasing".into()));
        }
        let r = p.pow(n - 1) * (p - 1);
        Ok(Self {
            p,
            n,
            b_order,
            r,
            c_w,
            c_b,
            pool,
        })
    }

    pub fn from_descriptor(
        desc: &SemidirectDescriptor,
        pool: Vec<u64>,
        c_w: BigRational,
        c_b: BigRational,
    ) -> Result<Self> {
        Self::new(desc.p(), desc.n(), desc.b_order(), pool, c_w, c_b)
    }

    /// `|B| (p^n - 1)`, the exponent of the tame discriminant.
    pub fn discriminant_exponent(&self) -> u64 {
        self.b_order * (self.p.pow(self.n) - 1)
    }

    /// The density of 𝔗_E. With `μ_p ⊆ K`, `[K : Q(μ_p)] (p - 1) = |B|`.
    pub fn alpha(&self) -> BigRational {
        let p = BigInt::from(self.p);
        BigRational::new(&p * &p - &p - 1, BigInt::from(self.b_order) * (&p * &p - 1))
    }
}

fn check_p_n(p: u64, n: u32) -> Result<()> {
    if p < 3 || !is_prime(p) {
        return Err(Error::Config(format!("p = {p} must be an odd prime")));
    }
    if n == 0 {
        return Err(Error::Config("n must be at least 1".into()));
    }
    Ok(())
}

fn big_pow(base: u64, exp: u64) -> Result<BigInt> {
    let e = u32::try_from(exp).map_err(|_| Error::Config(format!("exponent {exp} too large")))?;
    Ok(BigInt::from(base).pow(e))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LocalH1 {
    /// `#H^1(Q_ℓ, M) = p^{2n}`
    #[serde(serialize_with = "serial::as_string")]
    pub h1: BigInt,
    /// `#H^0(Q_ℓ, M) = p^n`, also the size of the unramified classes
    #[serde(serialize_with = "serial::as_string")]
    pub h0: BigInt,
    /// `#H^1 / #H^0 = p^n`
    #[serde(serialize_with = "serial::as_string")]
    pub ratio: BigInt,
}

/// Local cohomology sizes of `M = Z/p^nZ` twisted by the cyclotomic
/// character at a prime `ℓ ≡ 1 mod p^n`.
pub fn local_h1_sizes(p: u64, n: u32) -> Result<LocalH1> {
    check_p_n(p, n)?;
    let h0 = big_pow(p, n as u64)?;
    let h1 = &h0 * &h0;
    let ratio = &h1 / &h0;
    Ok(LocalH1 { h1, h0, ratio })
}

/// Selmer bookkeeping across `Y = V ∪ Z`: each prime of `V` multiplies the
/// relaxed group by its local ratio.
pub fn h1_relaxed(h1_z: &BigInt, p: u64, n: u32, size_v: u64) -> Result<BigInt> {
    let ratio = local_h1_sizes(p, n)?.ratio;
    let e = u32::try_from(size_v).map_err(|_| Error::Config("|V| too large".into()))?;
    Ok(h1_z * ratio.pow(e))
}

/// `p^{|Y|} / C_w - 1/(p - 1)`.
pub fn wy_lower_bound(p: u64, size_y: u64, c_w: &BigRational) -> Result<BigRational> {
    if !c_w.is_positive() {
        return Err(Error::Config("C_w must be positive".into()));
    }
    if p < 3 || !is_prime(p) {
        return Err(Error::Config(format!("p = {p} must be an odd prime")));
    }
    let main = BigRational::from_integer(big_pow(p, size_y)?) / c_w;
    Ok(main - BigRational::new(BigInt::one(), BigInt::from(p - 1)))
}

/// `#𝔄_V = ((p - 1) p^{n-1})^{|V|}`.
pub fn av_size(p: u64, n: u32, size_v: u64) -> Result<BigInt> {
    check_p_n(p, n)?;
    big_pow(p.pow(n - 1) * (p - 1), size_v)
}

/// `C_b r^{|V|}` for nonempty `V`.
pub fn bv_lower_bound(params: &CountingParams, size_v: u64) -> Result<BigRational> {
    if size_v == 0 {
        return Err(Error::Config("V must be nonempty".into()));
    }
    Ok(&params.c_b * BigRational::from_integer(big_pow(params.r, size_v)?))
}

/// `|Δ_L| = (∏_{ℓ ∈ V} ℓ)^{|B| (p^n - 1)}` for a tamely ramified `L`.
pub fn discriminant_of_extension(v: &[u64], b_order: u64, p: u64, n: u32) -> Result<BigInt> {
    if v.is_empty() {
        return Err(Error::Config("V must be nonempty".into()));
    }
    check_p_n(p, n)?;
    let exp = p
        .checked_pow(n)
        .and_then(|q| b_order.checked_mul(q - 1))
        .ok_or_else(|| Error::Config("discriminant exponent overflows".into()))?;
    let e =
        u32::try_from(exp).map_err(|_| Error::Config("discriminant exponent too large".into()))?;
    let prod: BigInt = v.iter().map(|&l| BigInt::from(l)).product();
    Ok(prod.pow(e))
}

/// All nonempty `V ⊆ pool` with `∏ V ≤ y`, sorted by size and then
/// lexicographically.
pub fn enumerate_my(pool: &[u64], y: &BigInt) -> Result<Vec<Vec<u64>>> {
    if pool.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config("pool must be strictly increasing".into()));
    }
    let mut out: Vec<Vec<u64>> = if let Some(y) = y.to_u128() {
        (0..pool.len())
            .into_par_iter()
            .flat_map_iter(|i| {
                let mut acc = Vec::new();
                if (pool[i] as u128) <= y {
                    let mut stack = vec![pool[i]];
                    dfs_u128(pool, i + 1, pool[i] as u128, y, &mut stack, &mut acc);
                }
                acc
            })
            .collect()
    } else {
        let mut acc = Vec::new();
        dfs_big(pool, 0, &BigInt::one(), y, &mut Vec::new(), &mut acc);
        acc
    };
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    Ok(out)
}

fn dfs_u128(
    pool: &[u64],
    start: usize,
    prod: u128,
    y: u128,
    stack: &mut Vec<u64>,
    acc: &mut Vec<Vec<u64>>,
) {
    acc.push(stack.clone());
    for j in start..pool.len() {
        match prod.checked_mul(pool[j] as u128) {
            Some(next) if next <= y => {
                stack.push(pool[j]);
                dfs_u128(pool, j + 1, next, y, stack, acc);
                stack.pop();
            }
            // pool is increasing, so every later prime overshoots too
            _ => break,
        }
    }
}

fn dfs_big(
    pool: &[u64],
    start: usize,
    prod: &BigInt,
    y: &BigInt,
    stack: &mut Vec<u64>,
    acc: &mut Vec<Vec<u64>>,
) {
    if !stack.is_empty() {
        acc.push(stack.clone());
    }
    for j in start..pool.len() {
        let next = prod * pool[j];
        if &next > y {
            break;
        }
        stack.push(pool[j]);
        dfs_big(pool, j + 1, &next, y, stack, acc);
        stack.pop();
    }
}

/// Largest `y ≥ 0` with `y^k ≤ x`.
pub fn integer_root(x: &BigInt, k: u64) -> Result<BigInt> {
    if x.is_negative() {
        return Err(Error::Domain("root of a negative number".into()));
    }
    let k = u32::try_from(k).map_err(|_| Error::Config("root index too large".into()))?;
    if k == 0 {
        return Err(Error::Domain("zeroth root".into()));
    }
    let mut lo = BigInt::zero();
    let mut hi = BigInt::one() << (x.bits() / k as u64 + 1);
    // invariant: lo^k ≤ x < hi^k
    while &hi - &lo > BigInt::one() {
        let mid: BigInt = (&lo + &hi) >> 1;
        if mid.pow(k) <= *x {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentFit {
    pub slope: f64,
    #[serde(serialize_with = "serial::as_string")]
    pub expected: BigRational,
    pub expected_approx: f64,
    pub relative_error: f64,
    #[serde(serialize_with = "serial::as_string")]
    pub log_exponent_expected: BigRational,
    /// Slope after dividing out `(log x)^{rα - 1}`.
    pub slope_log_corrected: f64,
    pub points: Vec<FitPoint>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FitPoint {
    #[serde(serialize_with = "serial::as_string")]
    pub x: BigInt,
    #[serde(serialize_with = "serial::as_string")]
    pub y: BigInt,
    #[serde(serialize_with = "serial::as_string")]
    pub sum_r_pow: BigInt,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CensusReport {
    #[serde(serialize_with = "serial::as_string")]
    pub x: BigInt,
    #[serde(serialize_with = "serial::as_string")]
    pub y: BigInt,
    pub discriminant_exponent: u64,
    pub family_count: usize,
    pub families: Vec<Vec<u64>>,
    #[serde(serialize_with = "serial::as_string")]
    pub sum_r_pow: BigInt,
    #[serde(serialize_with = "serial::as_string")]
    pub n_lower_bound: BigRational,
    pub fit: Option<ExponentFit>,
}

/// `N(x) ≥ C_b Σ_{V ∈ M(y)} r^{|V|}` with `y = ⌊x^{1/(|B|(p^n - 1))}⌋`.
pub fn n_lower_bound(params: &CountingParams, x: &BigInt) -> Result<CensusReport> {
    if x < &BigInt::one() {
        return Err(Error::Config("x must be at least 1".into()));
    }
    let k = params.discriminant_exponent();
    let y = integer_root(x, k)?;
    let families = enumerate_my(&params.pool, &y)?;
    let r = BigInt::from(params.r);
    let sum_r_pow: BigInt = families.iter().map(|v| r.pow(v.len() as u32)).sum();
    Ok(CensusReport {
        x: x.clone(),
        y,
        discriminant_exponent: k,
        family_count: families.len(),
        families,
        n_lower_bound: &params.c_b * BigRational::from_integer(sum_r_pow.clone()),
        sum_r_pow,
        fit: None,
    })
}

/// Natural log of a positive big integer, through its leading 64 bits.
pub fn big_ln(n: &BigInt) -> f64 {
    let bits = n.bits();
    let shift = bits.saturating_sub(64);
    let top = (n >> shift).to_f64().unwrap_or(f64::NAN);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Least-squares slope of `log N_lb(x)` against `log x` over the grid.
pub fn exponent_fit(params: &CountingParams, x_grid: &[BigInt]) -> Result<ExponentFit> {
    if x_grid.len() < MIN_FIT_POINTS {
        return Err(Error::Config(format!(
            "exponent fit needs at least {MIN_FIT_POINTS} grid points"
        )));
    }
    if x_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config("x grid must be strictly increasing".into()));
    }
    let mut points = Vec::with_capacity(x_grid.len());
    for x in x_grid {
        let rep = n_lower_bound(params, x)?;
        if rep.sum_r_pow.is_zero() {
            return Err(Error::Config(format!(
                "empty census at x = {x}; the grid starts too low for this pool"
            )));
        }
        points.push(FitPoint {
            x: x.clone(),
            y: rep.y,
            sum_r_pow: rep.sum_r_pow,
        });
    }
    let log_exponent_expected =
        BigRational::from_integer(params.r.into()) * params.alpha() - BigRational::one();
    let b = log_exponent_expected.to_f64().unwrap_or(0.0);
    let lx: Vec<f64> = points.iter().map(|pt| big_ln(&pt.x)).collect();
    let ln: Vec<f64> = points.iter().map(|pt| big_ln(&pt.sum_r_pow)).collect();
    let corrected: Vec<f64> = ln.iter().zip(&lx).map(|(v, l)| v - b * l.ln()).collect();
    let slope = ls_slope(&lx, &ln)?;
    let slope_log_corrected = ls_slope(&lx, &corrected)?;
    let expected = BigRational::new(BigInt::one(), BigInt::from(params.discriminant_exponent()));
    let expected_approx = expected.to_f64().unwrap_or(0.0);
    Ok(ExponentFit {
        slope,
        relative_error: (slope - expected_approx).abs() / expected_approx,
        expected,
        expected_approx,
        log_exponent_expected,
        slope_log_corrected,
        points,
    })
}

fn ls_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx <= 0.0 || !sxx.is_finite() {
        return Err(Error::Config("degenerate x grid".into()));
    }
    Ok(sxy / sxx)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "primes", rename_all = "snake_case")]
pub enum FailReason {
    BadPrimeInV(Vec<u64>),
    NotInTe(Vec<u64>),
    SelmerNotAsserted,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", content = "reasons", rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail(Vec<FailReason>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HypothesisReport {
    pub v: Vec<u64>,
    pub selmer_asserted: bool,
    /// Disjointness of `V` from `S_Q`. Complete splitting above `S_Q` is
    /// part of how the families are built, not verified field by field.
    pub sq_split_ok: bool,
    pub ramified_in_te: bool,
    #[serde(flatten)]
    pub verdict: Verdict,
}

/// The three hypotheses of the rank-stability criterion for a ramification
/// set `V`, using records from a sieve run that covers `V`.
pub fn check_prop_2_7(
    config: &SieveConfig,
    records: &[TePrimeRecord],
    v: &[u64],
    selmer_asserted: bool,
) -> Result<HypothesisReport> {
    if v.is_empty() {
        return Err(Error::Config("V must be nonempty".into()));
    }
    let mut seen = HashSet::new();
    let mut rows = Vec::with_capacity(v.len());
    for &l in v {
        if !seen.insert(l) {
            return Err(Error::Config(format!("{l} repeated in V")));
        }
        let rec = records
            .binary_search_by_key(&l, |r| r.ell)
            .map(|i| records[i])
            .map_err(|_| Error::Config(format!("{l} is not a prime covered by the sieve")))?;
        rows.push(rec);
    }
    let s_q = bad_prime_set(config.curve(), config.field())?;
    let bad: Vec<u64> = v.iter().copied().filter(|l| s_q.contains(l)).collect();
    let mut outside = Vec::new();
    for rec in &rows {
        if !rec.member || !verify_lemma_te(rec, config.p())? {
            outside.push(rec.ell);
        }
    }
    let mut reasons = Vec::new();
    if !selmer_asserted {
        reasons.push(FailReason::SelmerNotAsserted);
    }
    if !bad.is_empty() {
        reasons.push(FailReason::BadPrimeInV(bad.clone()));
    }
    if !outside.is_empty() {
        reasons.push(FailReason::NotInTe(outside.clone()));
    }
    Ok(HypothesisReport {
        v: v.to_vec(),
        selmer_asserted,
        sq_split_ok: bad.is_empty(),
        ramified_in_te: outside.is_empty(),
        verdict: if reasons.is_empty() {
            Verdict::Pass
        } else {
            Verdict::Fail(reasons)
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::WeierstrassCurve;
    use crate::fields::AbelianField;
    use crate::sieve::te_sieve;
    use proptest::prelude::*;

    const WORKED_POOL: [u64; 9] = [7, 13, 31, 43, 61, 67, 73, 79, 97];

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn params(p: u64, n: u32, b: u64, pool: &[u64]) -> CountingParams {
        CountingParams::new(p, n, b, pool.to_vec(), q(1, 1), q(1, 1)).unwrap()
    }

    fn brute_force(pool: &[u64], y: u128) -> Vec<Vec<u64>> {
        let mut out = Vec::new();
        for mask in 1u32..(1 << pool.len()) {
            let v: Vec<u64> = (0..pool.len())
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| pool[i])
                .collect();
            let prod = v
                .iter()
                .try_fold(1u128, |acc, &l| acc.checked_mul(l as u128));
            if prod.is_some_and(|p| p <= y) {
                out.push(v);
            }
        }
        out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        out
    }

    #[test]
    fn local_sizes() {
        let s = local_h1_sizes(3, 1).unwrap();
        assert_eq!((s.h1, s.h0, s.ratio), (9.into(), 3.into(), 3.into()));
        let s = local_h1_sizes(5, 2).unwrap();
        assert_eq!((s.h1, s.h0, s.ratio), (625.into(), 25.into(), 25.into()));
        assert!(local_h1_sizes(3, 0).is_err());
    }

    #[test]
    fn relaxed_selmer_ratio() {
        for (p, n) in [(3u64, 1u32), (3, 2), (5, 1), (7, 3)] {
            for size_v in 0..6u64 {
                let h1_z = BigInt::from(p).pow(3);
                let lhs = h1_relaxed(&h1_z, p, n, size_v).unwrap();
                let rhs = &h1_z * BigInt::from(p).pow(n * size_v as u32);
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn wy_examples() {
        assert_eq!(wy_lower_bound(3, 4, &q(9, 1)).unwrap(), q(17, 2));
        assert_eq!(wy_lower_bound(3, 0, &q(1, 1)).unwrap(), q(1, 2));
        assert_eq!(wy_lower_bound(5, 3, &q(25, 1)).unwrap(), q(19, 4));
        assert!(wy_lower_bound(3, 1, &q(0, 1)).is_err());
    }

    #[test]
    fn av_and_bv_examples() {
        assert_eq!(av_size(5, 2, 3).unwrap(), 8000.into());
        assert_eq!(av_size(3, 1, 0).unwrap(), 1.into());
        assert_eq!(av_size(7, 1, 2).unwrap(), 36.into());
        for (p, n) in [(3u64, 1u32), (5, 2), (7, 1)] {
            let r = BigInt::from(p.pow(n - 1) * (p - 1));
            for k in 0..8 {
                assert_eq!(
                    av_size(p, n, k + 1).unwrap(),
                    av_size(p, n, k).unwrap() * &r
                );
            }
        }
        assert_eq!(bv_lower_bound(&params(3, 1, 2, &[]), 2).unwrap(), q(4, 1));
        let half = CountingParams::new(5, 2, 20, vec![], q(1, 1), q(1, 2)).unwrap();
        assert_eq!(bv_lower_bound(&half, 1).unwrap(), q(10, 1));
        assert_eq!(bv_lower_bound(&params(5, 1, 4, &[]), 3).unwrap(), q(64, 1));
        assert!(bv_lower_bound(&params(5, 1, 4, &[]), 0).is_err());
    }

    #[test]
    fn discriminant_examples() {
        assert_eq!(
            discriminant_of_extension(&[7, 13], 2, 3, 1).unwrap(),
            BigInt::from(68_574_961u64)
        );
        assert_eq!(
            discriminant_of_extension(&[7], 2, 3, 1).unwrap(),
            2401.into()
        );
        assert_eq!(
            discriminant_of_extension(&[7], 4, 5, 1).unwrap(),
            BigInt::from(7).pow(16)
        );
        assert!(discriminant_of_extension(&[], 2, 3, 1).is_err());
    }

    #[test]
    fn worked_census() {
        let fams = enumerate_my(&WORKED_POOL, &100.into()).unwrap();
        assert_eq!(fams.len(), 10);
        assert_eq!(fams[9], vec![7, 13]);
        assert_eq!(fams, brute_force(&WORKED_POOL, 100));
        assert!(enumerate_my(&[7], &6.into()).unwrap().is_empty());
        assert!(enumerate_my(&[], &1_000_000.into()).unwrap().is_empty());
        assert!(enumerate_my(&[13, 7], &100.into()).is_err());

        let rep =
            n_lower_bound(&params(3, 1, 2, &WORKED_POOL), &BigInt::from(10u64.pow(8))).unwrap();
        assert_eq!(rep.y, 100.into());
        assert_eq!(rep.family_count, 10);
        assert_eq!(rep.sum_r_pow, 22.into());
        assert_eq!(rep.n_lower_bound, q(22, 1));

        let rep = n_lower_bound(&params(3, 1, 2, &WORKED_POOL), &BigInt::one()).unwrap();
        assert_eq!(rep.y, BigInt::one());
        assert!(rep.families.is_empty());
        assert!(rep.n_lower_bound.is_zero());
    }

    #[test]
    fn single_prime_threshold() {
        let prm = params(3, 1, 2, &[7]);
        let below = n_lower_bound(&prm, &2400.into()).unwrap();
        assert_eq!(below.y, 6.into());
        assert!(below.families.is_empty());
        for x in [2401u64, 3000, 4095] {
            let rep = n_lower_bound(&prm, &x.into()).unwrap();
            assert_eq!(rep.y, 7.into());
            assert_eq!(rep.families, vec![vec![7]]);
        }
    }

    #[test]
    fn big_y_path_matches_small_path() {
        let pool: Vec<u64> = crate::arith::sieve_primes(200)
            .unwrap()
            .iter()
            .filter(|l| l % 3 == 1)
            .collect();
        let small = enumerate_my(&pool, &BigInt::from(10u64.pow(12))).unwrap();
        let mut big = Vec::new();
        dfs_big(
            &pool,
            0,
            &BigInt::one(),
            &BigInt::from(10u64.pow(12)),
            &mut Vec::new(),
            &mut big,
        );
        big.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        assert_eq!(small, big);
    }

    #[test]
    fn integer_roots() {
        assert_eq!(
            integer_root(&BigInt::from(10u64.pow(8)), 4).unwrap(),
            100.into()
        );
        assert_eq!(
            integer_root(&BigInt::from(10u64.pow(8) - 1), 4).unwrap(),
            99.into()
        );
        assert_eq!(integer_root(&BigInt::zero(), 3).unwrap(), 0.into());
        let huge = BigInt::from(12345678901u64).pow(16) + 1;
        assert_eq!(integer_root(&huge, 16).unwrap(), 12345678901u64.into());
    }

    #[test]
    fn fit_expectations() {
        let pool: Vec<u64> = crate::arith::sieve_primes(20_000)
            .unwrap()
            .iter()
            .filter(|l| l % 3 == 1)
            .collect();
        let prm = params(3, 1, 2, &pool);
        let grid: Vec<BigInt> = (0..6)
            .map(|i| BigInt::from(100u64 + 150 * i).pow(4))
            .collect();
        let fit = exponent_fit(&prm, &grid).unwrap();
        assert_eq!(fit.expected, q(1, 4));
        assert_eq!(fit.log_exponent_expected, q(-3, 8));
        assert!(fit.slope > 0.0);

        let prm5 = params(5, 1, 4, &[11, 31, 41, 61, 71]);
        let grid: Vec<BigInt> = (0..5).map(|i| BigInt::from(1000u64 + i).pow(16)).collect();
        let fit = exponent_fit(&prm5, &grid).unwrap();
        assert_eq!(fit.expected, q(1, 16));
        assert_eq!(fit.log_exponent_expected, q(-5, 24));

        assert!(exponent_fit(&prm, &grid[..1]).is_err());
        let flat = vec![BigInt::from(10u64.pow(8)); 5];
        assert!(exponent_fit(&prm, &flat).is_err());
    }

    #[test]
    fn monotone_in_x_and_pool() {
        let prm = params(3, 1, 2, &WORKED_POOL);
        let mut last = BigInt::zero();
        for y in (1u64..300).step_by(7) {
            let s = n_lower_bound(&prm, &BigInt::from(y).pow(4))
                .unwrap()
                .sum_r_pow;
            assert!(s >= last);
            last = s;
        }
        let x = BigInt::from(500u64).pow(4);
        let base = n_lower_bound(&prm, &x).unwrap().sum_r_pow;
        let mut bigger = WORKED_POOL.to_vec();
        bigger.push(103);
        let more = n_lower_bound(&params(3, 1, 2, &bigger), &x)
            .unwrap()
            .sum_r_pow;
        assert!(more >= base);
    }

    #[test]
    fn hypothesis_examples() {
        let e = WeierstrassCurve::new(0, -1, 1, -7820, -263580).unwrap();
        let k = AbelianField::cyclotomic(3).unwrap();
        let desc = SemidirectDescriptor::cyclotomic(3, 1, k).unwrap();
        let cfg = SieveConfig::new(e, desc, 100).unwrap();
        let records = te_sieve(&cfg, 1).unwrap();

        let ok = check_prop_2_7(&cfg, &records, &[7, 13], true).unwrap();
        assert_eq!(ok.verdict, Verdict::Pass);

        let bad = check_prop_2_7(&cfg, &records, &[11], true).unwrap();
        assert!(!bad.sq_split_ok);
        assert_eq!(
            bad.verdict,
            Verdict::Fail(vec![
                FailReason::BadPrimeInV(vec![11]),
                FailReason::NotInTe(vec![11]),
            ])
        );

        let unasserted = check_prop_2_7(&cfg, &records, &[7], false).unwrap();
        assert_eq!(
            unasserted.verdict,
            Verdict::Fail(vec![FailReason::SelmerNotAsserted])
        );

        assert!(check_prop_2_7(&cfg, &records, &[101], true).is_err());
        assert!(check_prop_2_7(&cfg, &records, &[9], true).is_err());

        let json = serde_json::to_string(&unasserted).unwrap();
        assert!(json.contains(r#""verdict":"fail""#), "{json}");
    }

    proptest! {
        #[test]
        fn census_matches_bitmask(
            raw in proptest::collection::btree_set(2u64..400, 0..14),
            y in 1u64..2_000_000,
        ) {
            let pool: Vec<u64> = raw.into_iter().filter(|&l| is_prime(l)).collect();
            prop_assert_eq!(enumerate_my(&pool, &y.into()).unwrap(), brute_force(&pool, y as u128));
        }

        #[test]
        fn discriminant_is_multiplicative(
            raw in proptest::collection::btree_set(2u64..300, 2..10),
            split in 1usize..9,
        ) {
            let all: Vec<u64> = raw.into_iter().filter(|&l| is_prime(l)).collect();
            prop_assume!(all.len() >= 2);
            let k = split.min(all.len() - 1);
            let (a, b) = all.split_at(k);
            let whole = discriminant_of_extension(&all, 2, 3, 1).unwrap();
            let parts = discriminant_of_extension(a, 2, 3, 1).unwrap()
                * discriminant_of_extension(b, 2, 3, 1).unwrap();
            prop_assert_eq!(whole, parts);
        }
    }
}
