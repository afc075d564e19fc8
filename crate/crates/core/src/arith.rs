//! Word-sized modular arithmetic: prime tables, deterministic primality,
//! quadratic residues and the structure of `(Z/mZ)^×`.

use crate::error::{Error, Result};

pub const MAX_SIEVE_BOUND: u64 = 1 << 40;

/// Above this bound the sieve walks the range in fixed-size segments.
const SEGMENTED_THRESHOLD: u64 = 10_000_000;
const SEGMENT_LEN: u64 = 1 << 18;

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Inverse of `a` modulo `m`, if `gcd(a, m) = 1`.
pub fn inv_mod(a: u64, m: u64) -> Option<u64> {
    let (mut r0, mut r1) = (m as i128, (a % m) as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 != 1 {
        return None;
    }
    Some(t0.rem_euclid(m as i128) as u64)
}

/// Least non-negative residue of a signed integer.
#[inline]
pub fn reduce_i64(a: i64, m: u64) -> u64 {
    (a as i128).rem_euclid(m as i128) as u64
}

/// Integer square root (floor).
pub fn isqrt(n: u64) -> u64 {
    if n < 2 {
        return n;
    }
    let mut x = (n as f64).sqrt() as u64;
    while x.checked_mul(x).is_none_or(|sq| sq > n) {
        x -= 1;
    }
    while (x + 1).checked_mul(x + 1).is_some_and(|sq| sq <= n) {
        x += 1;
    }
    x
}

// Jaeschke / Sinclair: the first twelve primes are a complete witness set
// for every n < 3.3 * 10^24, in particular for all of u64.
const MR_WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &MR_WITNESSES {
        if n == p {
            return true;
        }
        if n.is_multiple_of(p) {
            return false;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &MR_WITNESSES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// All primes up to an inclusive bound, in increasing order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeTable {
    bound: u64,
    primes: Vec<u64>,
}

impl PrimeTable {
    pub fn bound(&self) -> u64 {
        self.bound
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        self.primes.iter().copied()
    }

    pub fn contains(&self, n: u64) -> bool {
        self.primes.binary_search(&n).is_ok()
    }

    /// Number of primes `<= x` (for `x` up to the table bound).
    pub fn pi(&self, x: u64) -> usize {
        self.primes.partition_point(|&q| q <= x)
    }

    pub fn into_vec(self) -> Vec<u64> {
        self.primes
    }
}

pub fn sieve_primes(bound: u64) -> Result<PrimeTable> {
    if !(2..=MAX_SIEVE_BOUND).contains(&bound) {
        return Err(Error::Config(format!(
            "sieve bound {bound} outside [2, 2^40]"
        )));
    }
    let primes = if bound <= SEGMENTED_THRESHOLD {
        simple_sieve(bound)
    } else {
        segmented_sieve(bound)
    };
    Ok(PrimeTable { bound, primes })
}

fn simple_sieve(bound: u64) -> Vec<u64> {
    let n = bound as usize;
    let mut composite = vec![false; n + 1];
    let mut primes = Vec::with_capacity(estimate_pi(bound));
    for i in 2..=n {
        if !composite[i] {
            primes.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    primes
}

fn segmented_sieve(bound: u64) -> Vec<u64> {
    let base = simple_sieve(isqrt(bound));
    let mut primes = Vec::with_capacity(estimate_pi(bound));
    let mut seg = vec![false; SEGMENT_LEN as usize];
    let mut lo = 2u64;
    while lo <= bound {
        let hi = (lo + SEGMENT_LEN - 1).min(bound);
        let len = (hi - lo + 1) as usize;
        seg[..len].fill(false);
        for &q in &base {
            if q * q > hi {
                break;
            }
            let mut start = (q * q).max(lo.div_ceil(q) * q);
            while start <= hi {
                seg[(start - lo) as usize] = true;
                start += q;
            }
        }
        primes.extend(
            seg[..len]
                .iter()
                .enumerate()
                .filter(|(_, &c)| !c)
                .map(|(i, _)| lo + i as u64),
        );
        lo = hi + 1;
    }
    primes
}

fn estimate_pi(x: u64) -> usize {
    if x < 17 {
        return 8;
    }
    let xf = x as f64;
    (1.26 * xf / xf.ln()) as usize
}

/// Prime factorisation by trial division, as `(prime, exponent)` pairs.
pub fn factor(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    if n < 2 {
        return out;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            let mut e = 0;
            while n.is_multiple_of(d) {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn euler_phi(m: u64) -> u64 {
    factor(m)
        .into_iter()
        .fold(m, |acc, (q, _)| acc / q * (q - 1))
}

/// Multiplicative order of a unit `a` modulo `m`.
pub fn multiplicative_order(a: u64, m: u64) -> Option<u64> {
    if m == 1 {
        return Some(1);
    }
    if gcd(a % m, m) != 1 {
        return None;
    }
    let mut ord = euler_phi(m);
    for (q, _) in factor(ord) {
        while ord.is_multiple_of(q) && pow_mod(a, ord / q, m) == 1 {
            ord /= q;
        }
    }
    Some(ord)
}

/// Jacobi symbol `(a/n)` for odd `n`.
pub(crate) fn jacobi(a: u64, n: u64) -> i8 {
    debug_assert!(n % 2 == 1);
    let mut a = a % n;
    let mut n = n;
    let mut sign = 1i8;
    while a != 0 {
        let tz = a.trailing_zeros();
        a >>= tz;
        if tz % 2 == 1 && (n % 8 == 3 || n % 8 == 5) {
            sign = -sign;
        }
        if a % 4 == 3 && n % 4 == 3 {
            sign = -sign;
        }
        (a, n) = (n % a, a);
    }
    if n == 1 {
        sign
    } else {
        0
    }
}

/// Legendre symbol `(a/ℓ)` for an odd prime `ℓ`.
pub fn legendre_symbol(a: i64, ell: u64) -> Result<i8> {
    if ell.is_multiple_of(2) || !is_prime(ell) {
        return Err(Error::Domain(format!("{ell} is not an odd prime")));
    }
    Ok(jacobi(reduce_i64(a, ell), ell))
}

/// Square root of a quadratic residue modulo an odd prime (Tonelli–Shanks).
pub fn sqrt_mod(a: u64, p: u64) -> Option<u64> {
    let a = a % p;
    if a == 0 {
        return Some(0);
    }
    if p == 2 {
        return Some(a);
    }
    if jacobi(a, p) != 1 {
        return None;
    }
    if p % 4 == 3 {
        return Some(pow_mod(a, (p + 1) / 4, p));
    }
    let s = (p - 1).trailing_zeros();
    let q = (p - 1) >> s;
    let mut z = 2;
    while jacobi(z, p) != -1 {
        z += 1;
    }
    let mut m = s;
    let mut c = pow_mod(z, q, p);
    let mut t = pow_mod(a, q, p);
    let mut r = pow_mod(a, q.div_ceil(2), p);
    while t != 1 {
        let mut i = 0;
        let mut t2 = t;
        while t2 != 1 {
            t2 = mul_mod(t2, t2, p);
            i += 1;
        }
        let b = pow_mod(c, 1 << (m - i - 1), p);
        m = i;
        c = mul_mod(b, b, p);
        t = mul_mod(t, c, p);
        r = mul_mod(r, b, p);
    }
    Some(r)
}

/// Solve `x ≡ r_i (mod m_i)` for pairwise coprime moduli.
pub fn crt(residues: &[(u64, u64)]) -> (u64, u64) {
    residues.iter().fold((0u64, 1u64), |(x, m), &(r, mi)| {
        let mm = m * mi;
        // x + m * t ≡ r (mod mi)
        let inv = inv_mod(m % mi, mi).expect("moduli are coprime");
        let diff = (r % mi + mi - x % mi) % mi;
        let t = mul_mod(diff, inv, mi);
        ((x + m * t) % mm, mm)
    })
}

/// One prime-power factor `q^k` of the modulus with its cyclic generators,
/// given as residues modulo `q^k`.
#[derive(Debug, Clone, PartialEq, Eq)]
struct UnitComponent {
    prime: u64,
    modulus: u64,
    gens: Vec<u64>,
    orders: Vec<u64>,
}

impl UnitComponent {
    fn new(prime: u64, exp: u32) -> Self {
        let modulus = prime.pow(exp);
        let (gens, orders) = if prime == 2 {
            match exp {
                1 => (vec![], vec![]),
                2 => (vec![3], vec![2]),
                _ => (vec![modulus - 1, 5], vec![2, modulus / 4]),
            }
        } else {
            let mut g = primitive_root_mod_prime(prime);
            if exp >= 2 && pow_mod(g, prime - 1, prime * prime) == 1 {
                g += prime;
            }
            (vec![g], vec![modulus / prime * (prime - 1)])
        };
        Self {
            prime,
            modulus,
            gens,
            orders,
        }
    }

    /// Exponent vector of `u` with respect to `gens`, by direct search.
    fn exponents(&self, u: u64) -> Vec<u64> {
        let v = u % self.modulus;
        match self.gens.len() {
            0 => vec![],
            1 if self.prime == 2 => vec![u64::from(v == 3)],
            1 => vec![discrete_log(self.gens[0], v, self.modulus, self.orders[0])],
            _ => {
                let minus = v % 4 == 3;
                let w = if minus { self.modulus - v } else { v };
                vec![
                    u64::from(minus),
                    discrete_log(5, w, self.modulus, self.orders[1]),
                ]
            }
        }
    }
}

fn discrete_log(g: u64, target: u64, m: u64, order: u64) -> u64 {
    let mut acc = 1 % m;
    for e in 0..order {
        if acc == target {
            return e;
        }
        acc = mul_mod(acc, g, m);
    }
    unreachable!("{target} is not a power of {g} mod {m}")
}

fn primitive_root_mod_prime(p: u64) -> u64 {
    if p == 2 {
        return 1;
    }
    let qs: Vec<u64> = factor(p - 1).into_iter().map(|(q, _)| q).collect();
    (2..p)
        .find(|&g| qs.iter().all(|&q| pow_mod(g, (p - 1) / q, p) != 1))
        .expect("every prime has a primitive root")
}

/// A decomposition of `(Z/mZ)^×` as a direct product of cyclic groups,
/// one or two factors per prime power of `m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnitGroup {
    modulus: u64,
    generators: Vec<u64>,
    orders: Vec<u64>,
    components: Vec<UnitComponent>,
}

impl UnitGroup {
    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// Generators as residues modulo `m`. Each is trivial on every prime-power
    /// factor but its own.
    pub fn generators(&self) -> &[u64] {
        &self.generators
    }

    pub fn orders(&self) -> &[u64] {
        &self.orders
    }

    pub fn order(&self) -> u64 {
        self.orders.iter().product()
    }

    /// Exponents `e_i` with `u = ∏ g_i^{e_i}`, aligned with `generators()`.
    pub fn exponents(&self, u: u64) -> Result<Vec<u64>> {
        if gcd(u % self.modulus, self.modulus) != 1 {
            return Err(Error::Domain(format!(
                "{u} is not a unit modulo {}",
                self.modulus
            )));
        }
        Ok(self
            .components
            .iter()
            .flat_map(|c| c.exponents(u))
            .collect())
    }

    /// Every unit modulo `m`, reconstructed from the generators.
    pub fn elements(&self) -> Vec<u64> {
        let m = self.modulus;
        let mut out = vec![1 % m];
        for (&g, &ord) in self.generators.iter().zip(&self.orders) {
            let mut next = Vec::with_capacity(out.len() * ord as usize);
            for &x in &out {
                let mut y = x;
                for _ in 0..ord {
                    next.push(y);
                    y = mul_mod(y, g, m);
                }
            }
            out = next;
        }
        out
    }
}

pub fn unit_group(m: u64) -> Result<UnitGroup> {
    if m < 2 {
        return Err(Error::Config(format!("modulus {m} must be at least 2")));
    }
    let components: Vec<UnitComponent> = factor(m)
        .into_iter()
        .map(|(q, e)| UnitComponent::new(q, e))
        .collect();
    let mut generators = Vec::new();
    let mut orders = Vec::new();
    for c in &components {
        let rest = m / c.modulus;
        for (&g, &o) in c.gens.iter().zip(&c.orders) {
            let (x, _) = if rest == 1 {
                (g % m, m)
            } else {
                crt(&[(g, c.modulus), (1, rest)])
            };
            generators.push(x);
            orders.push(o);
        }
    }
    Ok(UnitGroup {
        modulus: m,
        generators,
        orders,
        components,
    })
}
