//! Long Weierstrass models over Q, their reductions modulo primes and the
//! trace of Frobenius `a_ℓ = ℓ + 1 - #Ẽ(F_ℓ)`.
//!
//! Two point-counting strategies are provided. The exhaustive one sums
//! Legendre symbols of the completed-square cubic (or enumerates every pair
//! for ℓ ∈ {2, 3}); it is exact and `O(ℓ)`. The baby-step/giant-step one
//! intersects, over a few random points `P`, the set of integers `N` in the
//! Hasse interval with `[N]P = O`. It only answers when a single candidate is
//! left and falls back to exhaustive counting otherwise.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::arith::{inv_mod, isqrt, mul_mod, reduce_i64, sqrt_mod};
use crate::error::{Error, Result};

/// Primes below this use exhaustive counting under [`CountStrategy::Auto`].
pub const DEFAULT_BSGS_THRESHOLD: u64 = 1 << 17;

const BSGS_MAX_POINTS: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeierstrassCurve {
    a: [i64; 5],
    b2: BigInt,
    b4: BigInt,
    b6: BigInt,
    b8: BigInt,
    c4: BigInt,
    c6: BigInt,
    disc: BigInt,
}

impl WeierstrassCurve {
    /// `y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6`.
    pub fn new(a1: i64, a2: i64, a3: i64, a4: i64, a6: i64) -> Result<Self> {
        let [a1b, a2b, a3b, a4b, a6b] = [a1, a2, a3, a4, a6].map(BigInt::from);
        let b2 = &a1b * &a1b + 4 * &a2b;
        let b4 = 2 * &a4b + &a1b * &a3b;
        let b6 = &a3b * &a3b + 4 * &a6b;
        let b8 = &a1b * &a1b * &a6b + 4 * &a2b * &a6b - &a1b * &a3b * &a4b + &a2b * &a3b * &a3b
            - &a4b * &a4b;
        let c4 = &b2 * &b2 - 24 * &b4;
        let b2_cubed: BigInt = &b2 * &b2 * &b2;
        let c6 = -b2_cubed + 36 * &b2 * &b4 - 216 * &b6;
        let b2b2b8: BigInt = &b2 * &b2 * &b8;
        let disc: BigInt = -b2b2b8 - 8 * &b4 * &b4 * &b4 - 27 * &b6 * &b6 + 9 * &b2 * &b4 * &b6;
        if disc.is_zero() {
            return Err(Error::SingularCurve);
        }
        Ok(Self {
            a: [a1, a2, a3, a4, a6],
            b2,
            b4,
            b6,
            b8,
            c4,
            c6,
            disc,
        })
    }

    /// `[a1, a2, a3, a4, a6]`.
    pub fn a_invariants(&self) -> [i64; 5] {
        self.a
    }

    pub fn b2(&self) -> &BigInt {
        &self.b2
    }
    pub fn b4(&self) -> &BigInt {
        &self.b4
    }
    pub fn b6(&self) -> &BigInt {
        &self.b6
    }
    pub fn b8(&self) -> &BigInt {
        &self.b8
    }
    pub fn c4(&self) -> &BigInt {
        &self.c4
    }
    pub fn c6(&self) -> &BigInt {
        &self.c6
    }
    pub fn discriminant(&self) -> &BigInt {
        &self.disc
    }

    /// A model over `F_ℓ` with nonzero discriminant, if one is reachable from
    /// this model by at most one rescaling `u = ℓ` (only attempted for ℓ ≥ 5).
    pub fn reduce(&self, ell: u64) -> Option<ReducedCurve> {
        let l = BigInt::from(ell);
        if !(&self.disc % &l).is_zero() {
            let [a1, a2, a3, a4, a6] = self.a.map(|c| reduce_i64(c, ell));
            return Some(ReducedCurve {
                ell,
                a: [a1, a2, a3, a4, a6],
                rescaled: false,
            });
        }
        if ell < 5 || valuation(&self.disc, &l) < 12 || valuation(&self.c4, &l) < 4 {
            return None;
        }
        let l4 = l.pow(4);
        let l6 = l.pow(6);
        let disc = &self.disc / l.pow(12);
        if (&disc % &l).is_zero() {
            return None;
        }
        let c4 = &self.c4 / &l4;
        let c6 = &self.c6 / &l6;
        // y^2 = x^3 - 27 c4 x - 54 c6 is isomorphic to the rescaled model
        // over Z[1/6].
        let a4 = big_mod(&(-27 * c4), ell);
        let a6 = big_mod(&(-54 * c6), ell);
        Some(ReducedCurve {
            ell,
            a: [0, 0, 0, a4, a6],
            rescaled: true,
        })
    }

    pub fn reduction_is_good(&self, ell: u64) -> bool {
        self.reduce(ell).is_some()
    }

    /// Point count and trace at a good prime, choosing the strategy by size.
    pub fn count_points(&self, ell: u64) -> Result<FrobeniusData> {
        self.count_points_with(ell, CountStrategy::default())
    }

    pub fn count_points_with(&self, ell: u64, strategy: CountStrategy) -> Result<FrobeniusData> {
        self.count_points_seeded(ell, strategy, 0)
    }

    /// As [`count_points_with`](Self::count_points_with), with an extra seed
    /// mixed into the random point sampling of the baby-step/giant-step search.
    pub fn count_points_seeded(
        &self,
        ell: u64,
        strategy: CountStrategy,
        seed: u64,
    ) -> Result<FrobeniusData> {
        let red = self.reduce(ell).ok_or(Error::BadReduction(ell))?;
        let use_bsgs = match strategy {
            CountStrategy::Exhaustive => false,
            CountStrategy::BabyGiant => true,
            CountStrategy::Auto { threshold } => ell >= threshold,
        };
        let (count, method) = if ell < 5 {
            (red.count_by_enumeration(), CountMethod::Enumeration)
        } else if use_bsgs {
            let mut rng = ChaCha8Rng::seed_from_u64(self.sampling_seed(ell, seed));
            match red.group_order_bsgs(&mut rng) {
                Some(n) => (n, CountMethod::BabyGiant),
                None => (red.count_by_legendre_sum(), CountMethod::BabyGiantFallback),
            }
        } else {
            (red.count_by_legendre_sum(), CountMethod::LegendreSum)
        };
        FrobeniusData::new(ell, count, method)
    }

    pub fn trace_of_frobenius(&self, ell: u64) -> Result<i64> {
        Ok(self.count_points(ell)?.trace)
    }

    fn sampling_seed(&self, ell: u64, seed: u64) -> u64 {
        let mut h = splitmix64(seed ^ 0x5eed);
        for c in self.a {
            h = splitmix64(h ^ c as u64);
        }
        splitmix64(h ^ ell)
    }
}

impl fmt::Display for WeierstrassCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a1, a2, a3, a4, a6] = self.a;
        write!(f, "{a1},{a2},{a3},{a4},{a6}")
    }
}

impl FromStr for WeierstrassCurve {
    type Err = Error;

    /// Parses `"a1,a2,a3,a4,a6"`.
    fn from_str(s: &str) -> Result<Self> {
        let coeffs = s
            .split(',')
            .map(|t| t.trim().parse::<i64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Config(format!("bad curve coefficients {s:?}: {e}")))?;
        match coeffs[..] {
            [a1, a2, a3, a4, a6] => Self::new(a1, a2, a3, a4, a6),
            _ => Err(Error::Config(format!(
                "expected five coefficients a1,a2,a3,a4,a6, got {}",
                coeffs.len()
            ))),
        }
    }
}

impl Serialize for WeierstrassCurve {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

fn valuation(n: &BigInt, l: &BigInt) -> u32 {
    if n.is_zero() {
        return u32::MAX;
    }
    let mut n = n.abs();
    let mut v = 0;
    loop {
        let (q, r) = n.div_rem(l);
        if !r.is_zero() {
            return v;
        }
        n = q;
        v += 1;
    }
}

fn big_mod(n: &BigInt, m: u64) -> u64 {
    n.mod_floor(&BigInt::from(m))
        .to_u64()
        .expect("residue fits")
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CountStrategy {
    Exhaustive,
    BabyGiant,
    Auto { threshold: u64 },
}

impl Default for CountStrategy {
    fn default() -> Self {
        CountStrategy::Auto {
            threshold: DEFAULT_BSGS_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CountMethod {
    /// Every pair `(x, y)` in `F_ℓ^2` tested (ℓ ∈ {2, 3}).
    Enumeration,
    LegendreSum,
    BabyGiant,
    /// Baby-step/giant-step left several candidates; counted exhaustively.
    BabyGiantFallback,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FrobeniusData {
    pub ell: u64,
    /// Projective count, point at infinity included.
    pub point_count: u64,
    pub trace: i64,
    pub method: CountMethod,
}

impl FrobeniusData {
    fn new(ell: u64, point_count: u64, method: CountMethod) -> Result<Self> {
        let trace = ell as i64 + 1 - point_count as i64;
        if (trace as i128).pow(2) > 4 * ell as i128 {
            return Err(Error::Invariant(format!(
                "Hasse bound violated at ℓ={ell}: #E={point_count}, a={trace}"
            )));
        }
        Ok(Self {
            ell,
            point_count,
            trace,
            method,
        })
    }
}

/// A nonsingular model over `F_ℓ`; coefficients are least residues.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReducedCurve {
    ell: u64,
    a: [u64; 5],
    rescaled: bool,
}

impl ReducedCurve {
    pub fn ell(&self) -> u64 {
        self.ell
    }

    pub fn a_invariants(&self) -> [u64; 5] {
        self.a
    }

    /// Whether the model had to be rescaled to reach good reduction.
    pub fn rescaled(&self) -> bool {
        self.rescaled
    }

    fn count_by_enumeration(&self) -> u64 {
        let l = self.ell;
        let [a1, a2, a3, a4, a6] = self.a;
        let mut count = 1;
        for x in 0..l {
            let rhs = (((x + a2) % l * x % l + a4) % l * x % l + a6) % l;
            for y in 0..l {
                let lhs = (y * y + a1 * x % l * y + a3 * y) % l;
                if lhs == rhs {
                    count += 1;
                }
            }
        }
        count
    }

    /// `(2y + a1 x + a3)^2 = 4x^3 + b2 x^2 + 2 b4 x + b6`; odd ℓ only.
    fn count_by_legendre_sum(&self) -> u64 {
        let l = self.ell;
        debug_assert!(l % 2 == 1);
        let [a1, a2, a3, a4, a6] = self.a;
        let b2 = (mul_mod(a1, a1, l) + 4 * a2) % l;
        let b4 = (2 * a4 + mul_mod(a1, a3, l)) % l;
        let b6 = (mul_mod(a3, a3, l) + 4 * a6) % l;
        let f = |x: u64| -> u64 {
            let x2 = mul_mod(x, x, l);
            let x3 = mul_mod(x2, x, l);
            (mul_mod(4, x3, l) + mul_mod(b2, x2, l) + mul_mod(2 * b4 % l, x, l) + b6) % l
        };

        let mut chi = vec![-1i8; l as usize];
        chi[0] = 0;
        let mut sq = 0u64;
        for y in 1..=l / 2 {
            // (y)^2 = (y-1)^2 + 2y - 1
            sq = (sq + 2 * y - 1) % l;
            chi[sq as usize] = 1;
        }

        // Forward differences of the cubic: the third difference is 24.
        let (f0, f1, f2, f3) = (f(0), f(1 % l), f(2 % l), f(3 % l));
        let sub = |a: u64, b: u64| (a + l - b) % l;
        let mut v = f0;
        let mut d1 = sub(f1, f0);
        let mut d2 = sub(sub(f2, f1), d1);
        let d3 = sub(sub(sub(f3, f2), sub(f2, f1)), d2);
        let mut sum: i64 = 0;
        for _ in 0..l {
            sum += chi[v as usize] as i64;
            v += d1;
            if v >= l {
                v -= l;
            }
            d1 += d2;
            if d1 >= l {
                d1 -= l;
            }
            d2 += d3;
            if d2 >= l {
                d2 -= l;
            }
        }
        (l as i64 + 1 + sum) as u64
    }

    /// Short model `y^2 = x^3 + A x + B` over `F_ℓ`, ℓ ≥ 5.
    fn short_model(&self) -> ShortCurve {
        let l = self.ell;
        let [a1, a2, a3, a4, a6] = self.a;
        let b2 = (mul_mod(a1, a1, l) + 4 * a2) % l;
        let b4 = (2 * a4 + mul_mod(a1, a3, l)) % l;
        let b6 = (mul_mod(a3, a3, l) + 4 * a6) % l;
        let c4 = (mul_mod(b2, b2, l) + l - mul_mod(24, b4, l)) % l;
        let b2cubed = mul_mod(mul_mod(b2, b2, l), b2, l);
        let c6 = (l - b2cubed + mul_mod(36, mul_mod(b2, b4, l), l) + l - mul_mod(216, b6, l)) % l;
        ShortCurve {
            l,
            a: mul_mod(l - 27 % l, c4, l),
            b: mul_mod(l - 54 % l, c6, l),
        }
    }

    fn group_order_bsgs(&self, rng: &mut impl Rng) -> Option<u64> {
        let curve = self.short_model();
        let l = self.ell;
        let w = isqrt(4 * l);
        let (lo, hi) = (l + 1 - w, l + 1 + w);
        let mut candidates: Vec<u64> = (lo..=hi).collect();
        for _ in 0..BSGS_MAX_POINTS {
            let p = curve.random_point(rng);
            let annihilators = curve.multiples_in_range(p, lo, hi);
            candidates.retain(|n| annihilators.binary_search(n).is_ok());
            if candidates.len() == 1 {
                return Some(candidates[0]);
            }
        }
        None
    }
}

type Point = Option<(u64, u64)>;

struct ShortCurve {
    l: u64,
    a: u64,
    b: u64,
}

impl ShortCurve {
    fn rhs(&self, x: u64) -> u64 {
        let l = self.l;
        (mul_mod(mul_mod(x, x, l), x, l) + mul_mod(self.a, x, l) + self.b) % l
    }

    fn random_point(&self, rng: &mut impl Rng) -> Point {
        loop {
            let x = rng.random_range(0..self.l);
            if let Some(y) = sqrt_mod(self.rhs(x), self.l) {
                let y = if rng.random::<bool>() {
                    y
                } else {
                    (self.l - y) % self.l
                };
                return Some((x, y));
            }
        }
    }

    fn neg(&self, p: Point) -> Point {
        p.map(|(x, y)| (x, (self.l - y) % self.l))
    }

    fn add(&self, p: Point, q: Point) -> Point {
        let l = self.l;
        let ((x1, y1), (x2, y2)) = match (p, q) {
            (None, _) => return q,
            (_, None) => return p,
            (Some(a), Some(b)) => (a, b),
        };
        let lambda = if x1 == x2 {
            if (y1 + y2) % l == 0 {
                return None;
            }
            let num = (mul_mod(3, mul_mod(x1, x1, l), l) + self.a) % l;
            mul_mod(num, inv_mod(2 * y1 % l, l)?, l)
        } else {
            let num = (y2 + l - y1) % l;
            mul_mod(num, inv_mod((x2 + l - x1) % l, l)?, l)
        };
        let x3 = (mul_mod(lambda, lambda, l) + 2 * l - x1 - x2) % l;
        let y3 = (mul_mod(lambda, (x1 + l - x3) % l, l) + l - y1) % l;
        Some((x3, y3))
    }

    fn mul(&self, mut k: u64, p: Point) -> Point {
        let mut acc = None;
        let mut base = p;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.add(acc, base);
            }
            base = self.add(base, base);
            k >>= 1;
        }
        acc
    }

    /// Sorted list of every `N ∈ [lo, hi]` with `[N]P = O`.
    fn multiples_in_range(&self, p: Point, lo: u64, hi: u64) -> Vec<u64> {
        let width = hi - lo + 1;
        let m = isqrt(width - 1) + 1;
        let mut baby = std::collections::HashMap::with_capacity(m as usize);
        let mut jp = None;
        for j in 1..m {
            jp = self.add(jp, p);
            match jp {
                None => {
                    // ord(P) = j is small: its multiples are the answer.
                    return (lo.div_ceil(j) * j..=hi).step_by(j as usize).collect();
                }
                Some(pt) => {
                    baby.insert(pt, j);
                }
            }
        }
        let step = self.mul(m, p);
        let mut giant = self.mul(lo, p);
        let mut out = Vec::new();
        let mut base = lo;
        while base <= hi {
            match self.neg(giant) {
                None => out.push(base),
                Some(pt) => {
                    if let Some(&j) = baby.get(&pt) {
                        if base + j <= hi {
                            out.push(base + j);
                        }
                    }
                }
            }
            giant = self.add(giant, step);
            base += m;
        }
        out
    }
}
