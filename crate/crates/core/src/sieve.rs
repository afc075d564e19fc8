//! The prime set 𝔗_E, the local `p`-torsion check on its members, and the
//! comparison of its empirical density with the closed form.
//!
//! For a curve `E`, an odd prime `p` and an abelian field `K ⊇ Q(μ_p)`, a
//! prime `ℓ` is in 𝔗_E when `ℓ ≠ p`, `E` has good reduction at `ℓ`, `ℓ`
//! splits completely in `K(μ_p)`, and `a_ℓ ≢ 2 (mod p)`.

use std::collections::BTreeSet;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{factor, is_prime, sieve_primes, MAX_SIEVE_BOUND};
use crate::curve::{CountStrategy, WeierstrassCurve};
use crate::error::{Error, Result};
use crate::fields::{AbelianField, SemidirectDescriptor};
use crate::galois::count_trace_ne2_sl2;
use crate::serial;

pub const SIEVE_CHUNK: usize = 1024;
pub const MIN_DENSITY_BOUND: u64 = 1_000;

/// Closed forms are cross-checked against the exhaustive `SL_2` census only
/// for small `p`; the census is quartic in `p`.
const ORACLE_CROSS_CHECK_MAX_P: u64 = 31;

const TRIAL_DIVISION_LIMIT: u64 = 1 << 21;

#[derive(Debug, Clone)]
pub struct SieveConfig {
    curve: WeierstrassCurve,
    desc: SemidirectDescriptor,
    bound: u64,
    strategy: CountStrategy,
    seed: u64,
}

impl SieveConfig {
    pub fn new(curve: WeierstrassCurve, desc: SemidirectDescriptor, bound: u64) -> Result<Self> {
        let p = desc.p();
        if !desc.field().contains_cyclotomic(p, 1) {
            return Err(Error::Precondition(format!(
                "K = (m = {}, H) does not contain μ_{p}",
                desc.field().modulus()
            )));
        }
        if !(2..=MAX_SIEVE_BOUND).contains(&bound) {
            return Err(Error::Config(format!(
                "bound {bound} outside [2, {MAX_SIEVE_BOUND}]"
            )));
        }
        Ok(Self {
            curve,
            desc,
            bound,
            strategy: CountStrategy::default(),
            seed: 0,
        })
    }

    pub fn with_strategy(mut self, strategy: CountStrategy) -> Self {
        self.strategy = strategy;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn curve(&self) -> &WeierstrassCurve {
        &self.curve
    }

    pub fn descriptor(&self) -> &SemidirectDescriptor {
        &self.desc
    }

    pub fn field(&self) -> &AbelianField {
        self.desc.field()
    }

    pub fn p(&self) -> u64 {
        self.desc.p()
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    pub fn strategy(&self) -> CountStrategy {
        self.strategy
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TeFlags {
    pub ne_p: bool,
    pub good_reduction: bool,
    pub split_in_k_mu_p: bool,
    pub trace_ne_2_mod_p: bool,
}

impl TeFlags {
    pub fn all(&self) -> bool {
        self.ne_p && self.good_reduction && self.split_in_k_mu_p && self.trace_ne_2_mod_p
    }
}

/// One line of sieve output. `a` and `count` are absent at bad primes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TePrimeRecord {
    #[serde(rename = "l")]
    pub ell: u64,
    pub a: Option<i64>,
    pub count: Option<u64>,
    pub member: bool,
    pub flags: TeFlags,
}

/// `S_Q`: primes dividing the conductor of `K` and primes of bad reduction.
/// The discriminant is factored by trial division; a cofactor that is not a
/// 64-bit prime is reported as an error rather than guessed at.
pub fn bad_prime_set(curve: &WeierstrassCurve, field: &AbelianField) -> Result<Vec<u64>> {
    let mut set: BTreeSet<u64> = factor(field.modulus())
        .into_iter()
        .map(|(q, _)| q)
        .collect();
    for q in prime_divisors(curve.discriminant())? {
        if !curve.reduction_is_good(q) {
            set.insert(q);
        }
    }
    Ok(set.into_iter().collect())
}

fn prime_divisors(n: &BigInt) -> Result<Vec<u64>> {
    let mut rest: BigUint = n.magnitude().clone();
    let mut out = Vec::new();
    for q in sieve_primes(TRIAL_DIVISION_LIMIT)?.iter() {
        let qb = BigUint::from(q);
        if &qb * &qb > rest {
            break;
        }
        if (&rest % &qb).is_zero() {
            out.push(q);
            while (&rest % &qb).is_zero() {
                rest /= &qb;
            }
        }
    }
    if rest > BigUint::one() {
        match rest.to_u64() {
            Some(r) if is_prime(r) => out.push(r),
            _ => {
                return Err(Error::Config(format!(
                    "discriminant cofactor {rest} is beyond trial division"
                )))
            }
        }
    }
    Ok(out)
}

/// Sieve every prime up to the bound. Work is split into chunks of
/// [`SIEVE_CHUNK`] primes and the result is in ascending order whatever the
/// worker count. `jobs = 0` uses the available parallelism.
///
/// Every member is checked against the local torsion condition; a failure
/// is an [`Error::Invariant`].
pub fn te_sieve(config: &SieveConfig, jobs: usize) -> Result<Vec<TePrimeRecord>> {
    let primes = sieve_primes(config.bound)?.into_vec();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let chunks: Vec<Result<Vec<TePrimeRecord>>> = pool.install(|| {
        primes
            .par_chunks(SIEVE_CHUNK)
            .map(|chunk| chunk.iter().map(|&l| sieve_one(config, l)).collect())
            .collect()
    });
    let mut records = Vec::with_capacity(primes.len());
    for chunk in chunks {
        records.extend(chunk?);
    }
    assert_lemma_te(&records, config.p())?;
    Ok(records)
}

fn sieve_one(config: &SieveConfig, ell: u64) -> Result<TePrimeRecord> {
    let p = config.p();
    let field = config.field();
    let good = config.curve.reduction_is_good(ell);
    let split =
        !ell.is_multiple_of(p) && !field.is_ramified(ell) && field.in_subgroup(ell) && ell % p == 1;
    let (a, count) = if good {
        let data = config
            .curve
            .count_points_seeded(ell, config.strategy, config.seed)?;
        (Some(data.trace), Some(data.point_count))
    } else {
        (None, None)
    };
    let flags = TeFlags {
        ne_p: ell != p,
        good_reduction: good,
        split_in_k_mu_p: split,
        trace_ne_2_mod_p: a.is_some_and(|a| (a - 2).rem_euclid(p as i64) != 0),
    };
    Ok(TePrimeRecord {
        ell,
        a,
        count,
        member: flags.all(),
        flags,
    })
}

/// For a member `ℓ`, whether `p ∤ #Ẽ(F_ℓ)`.
pub fn verify_lemma_te(record: &TePrimeRecord, p: u64) -> Result<bool> {
    if !record.member {
        return Err(Error::Precondition(format!(
            "{} is not a member",
            record.ell
        )));
    }
    let count = record
        .count
        .ok_or_else(|| Error::Invariant(format!("member {} has no point count", record.ell)))?;
    Ok(count % p != 0)
}

pub fn assert_lemma_te(records: &[TePrimeRecord], p: u64) -> Result<()> {
    for r in records.iter().filter(|r| r.member) {
        if !verify_lemma_te(r, p)? {
            return Err(Error::Invariant(format!(
                "p = {p} divides #E(F_{}) = {} for a member prime",
                r.ell,
                r.count.unwrap_or_default()
            )));
        }
    }
    Ok(())
}

/// `α = (p^2 - p - 1) / ([K:Q(μ_p)] (p - 1)(p^2 - 1))`, checked against the
/// exhaustive trace census of `SL_2(F_p)` for small `p`.
pub fn density_closed_form(desc: &SemidirectDescriptor) -> Result<BigRational> {
    let p = desc.p();
    let deg = desc.field().degree_over_mu_p(p)?;
    let pb = BigInt::from(p);
    let num = &pb * &pb - &pb - 1;
    let den = BigInt::from(deg) * (&pb - 1) * (&pb * &pb - 1);
    let alpha = BigRational::new(num, den);
    if p <= ORACLE_CROSS_CHECK_MAX_P {
        let census = count_trace_ne2_sl2(p)?;
        let gl2 = (&pb * &pb - 1) * (&pb * &pb - &pb);
        let oracle = BigRational::new(BigInt::from(census.trace_not_two), BigInt::from(deg) * gl2);
        if oracle != alpha {
            return Err(Error::Invariant(format!(
                "closed form {alpha} disagrees with the SL_2 census {oracle}"
            )));
        }
    }
    Ok(alpha)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityReport {
    pub x: u64,
    pub p: u64,
    pub degree_over_mu_p: u64,
    /// Primes up to `x` left out of the denominator: `S_Q ∪ {p}`.
    pub excluded: Vec<u64>,
    pub primes_scanned: u64,
    pub members: u64,
    #[serde(serialize_with = "serial::as_string")]
    pub empirical: BigRational,
    #[serde(serialize_with = "serial::as_string")]
    pub closed_form: BigRational,
    #[serde(serialize_with = "serial::as_string")]
    pub abs_error: BigRational,
    pub empirical_approx: f64,
    pub closed_form_approx: f64,
    pub abs_error_approx: f64,
    pub lemma_te_violations: u64,
}

impl DensityReport {
    pub fn from_records(config: &SieveConfig, records: &[TePrimeRecord]) -> Result<Self> {
        if config.bound < MIN_DENSITY_BOUND {
            return Err(Error::Config(format!(
                "density needs a bound of at least {MIN_DENSITY_BOUND}"
            )));
        }
        let p = config.p();
        let field = config.field();
        let mut excluded = Vec::new();
        let (mut scanned, mut members, mut violations) = (0u64, 0u64, 0u64);
        for r in records {
            if r.ell == p || field.is_ramified(r.ell) || !r.flags.good_reduction {
                excluded.push(r.ell);
                continue;
            }
            scanned += 1;
            if r.member {
                members += 1;
                if !verify_lemma_te(r, p)? {
                    violations += 1;
                }
            }
        }
        if scanned == 0 {
            return Err(Error::Config("no primes left after excluding S_Q".into()));
        }
        let closed_form = density_closed_form(&config.desc)?;
        let empirical = BigRational::new(members.into(), scanned.into());
        let abs_error = (&empirical - &closed_form).abs();
        Ok(Self {
            x: config.bound,
            p,
            degree_over_mu_p: field.degree_over_mu_p(p)?,
            excluded,
            primes_scanned: scanned,
            members,
            empirical_approx: approx(&empirical),
            closed_form_approx: approx(&closed_form),
            abs_error_approx: approx(&abs_error),
            empirical,
            closed_form,
            abs_error,
            lemma_te_violations: violations,
        })
    }
}

pub fn density_empirical(config: &SieveConfig, jobs: usize) -> Result<DensityReport> {
    if config.bound < MIN_DENSITY_BOUND {
        return Err(Error::Config(format!(
            "density needs a bound of at least {MIN_DENSITY_BOUND}"
        )));
    }
    let records = te_sieve(config, jobs)?;
    DensityReport::from_records(config, &records)
}

fn approx(r: &BigRational) -> f64 {
    // Both parts fit comfortably in f64 range here; fall back to a
    // ratio of truncated values if they ever do not.
    r.to_f64().unwrap_or_else(|| {
        let (n, d) = (r.numer(), r.denom());
        let shift = n.bits().max(d.bits()).saturating_sub(900);
        let n = (n >> shift).to_f64().unwrap_or(0.0);
        let d = (d >> shift).to_f64().unwrap_or(1.0);
        n / d
    })
}

/// Members of a sieve run, in order.
pub fn members(records: &[TePrimeRecord]) -> Vec<u64> {
    records.iter().filter(|r| r.member).map(|r| r.ell).collect()
}
