//! Certifying surjectivity of `ρ_{E,p} : G_Q → GL_2(F_p)` from Frobenius
//! data, and the exhaustive `SL_2(F_p)` trace count.
//!
//! A proper subgroup of `GL_2(F_p)` with surjective determinant lies in a
//! Borel, the normaliser of a split or of a nonsplit Cartan, or has
//! exceptional projective image (`A_4`, `S_4`, `A_5`). Each Frobenius `σ_ℓ`
//! gives a matrix with trace `a_ℓ` and determinant `ℓ` modulo `p`, and some
//! traces are incompatible with some of these classes. Once every class is
//! ruled out the image must be everything.

use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{inv_mod, is_prime, jacobi, mul_mod, reduce_i64};
use crate::curve::WeierstrassCurve;
use crate::error::{Error, Result};

pub const MAX_SL2_ORACLE_P: u64 = 101;

const SCAN_CHUNK: usize = 1024;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ExclusionFlags {
    pub excludes_borel_and_split: bool,
    pub excludes_nonsplit: bool,
    pub excludes_exceptional: bool,
}

impl ExclusionFlags {
    pub fn all(&self) -> bool {
        self.excludes_borel_and_split && self.excludes_nonsplit && self.excludes_exceptional
    }

    pub fn union(self, other: Self) -> Self {
        Self {
            excludes_borel_and_split: self.excludes_borel_and_split
                || other.excludes_borel_and_split,
            excludes_nonsplit: self.excludes_nonsplit || other.excludes_nonsplit,
            excludes_exceptional: self.excludes_exceptional || other.excludes_exceptional,
        }
    }
}

/// Which maximal-subgroup classes a matrix with trace `a` and determinant `d`
/// (mod `p`) cannot belong to.
pub fn classify_witness(a: u64, d: u64, p: u64) -> Result<ExclusionFlags> {
    if p < 3 || !is_prime(p) {
        return Err(Error::Domain(format!("{p} is not an odd prime")));
    }
    let (a, d) = (a % p, d % p);
    if d == 0 {
        return Err(Error::Domain("determinant is zero mod p".into()));
    }
    let disc = (mul_mod(a, a, p) + p - mul_mod(4, d, p)) % p;
    let chi = jacobi(disc, p);

    // Projective order of the matrix is read off u = a^2/d:
    //   u = 0 → 2, u = 1 → 3, u = 2 → 4, u = 4 → 1 or p,
    //   u^2 - 3u + 1 = 0 → 5.
    // A_4, S_4 and A_5 only contain elements of order 1..5, so any other u
    // (projective order ≥ 6) rules them out.
    let u = mul_mod(mul_mod(a, a, p), inv_mod(d, p).expect("d is a unit"), p);
    let order_five = (mul_mod(u, u, p) + 1 + p * 3 - mul_mod(3, u, p)).is_multiple_of(p);
    let small_order = [0, 1, 2, 4].iter().any(|&v| v % p == u);

    Ok(ExclusionFlags {
        excludes_borel_and_split: a != 0 && chi == -1,
        excludes_nonsplit: a != 0 && chi == 1,
        excludes_exceptional: !small_order && !order_five,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct WitnessEntry {
    pub ell: u64,
    pub trace_mod_p: u64,
    pub ell_mod_p: u64,
    pub flags: ExclusionFlags,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct FirstWitnesses {
    pub borel_and_split: Option<u64>,
    pub nonsplit: Option<u64>,
    pub exceptional: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WitnessLedger {
    pub p: u64,
    pub entries: Vec<WitnessEntry>,
    pub flags: ExclusionFlags,
    pub first: FirstWitnesses,
}

impl WitnessLedger {
    pub fn new(p: u64) -> Self {
        // PGL_2(F_3) ≅ S_4: there is no proper exceptional subgroup, and a
        // projective image inside A_4 ≅ PSL_2(F_3) would force det to be a
        // square. So for p = 3 this class is empty from the start.
        let flags = ExclusionFlags {
            excludes_exceptional: p == 3,
            ..Default::default()
        };
        Self {
            p,
            entries: Vec::new(),
            flags,
            first: FirstWitnesses::default(),
        }
    }

    /// Record Frobenius at ℓ (good reduction, ℓ ≠ p) with trace `a_ℓ`.
    pub fn push(&mut self, ell: u64, trace: i64) -> Result<()> {
        let p = self.p;
        if ell.is_multiple_of(p) {
            return Err(Error::Domain(format!("witness prime {ell} equals p")));
        }
        let mut entry = WitnessEntry {
            ell,
            trace_mod_p: reduce_i64(trace, p),
            ell_mod_p: ell % p,
            flags: classify_witness(reduce_i64(trace, p), ell % p, p)?,
        };
        if unipotent_witness(ell, trace, p) {
            entry.flags.excludes_nonsplit = true;
        }
        let before = self.flags;
        self.flags = self.flags.union(entry.flags);
        if !before.excludes_borel_and_split && self.flags.excludes_borel_and_split {
            self.first.borel_and_split = Some(ell);
        }
        if !before.excludes_nonsplit && self.flags.excludes_nonsplit {
            self.first.nonsplit = Some(ell);
        }
        if !before.excludes_exceptional && self.flags.excludes_exceptional {
            self.first.exceptional = Some(ell);
        }
        self.entries.push(entry);
        Ok(())
    }
}

/// Trace and determinant mod p alone never rule out the nonsplit Cartan
/// normaliser when p = 3. This uses the integer trace: if the
/// characteristic polynomial is (x - 1)^2 mod p but p^2 does not divide
/// #E(F_ℓ), then E[p] is not fully rational over F_ℓ, so σ_ℓ is a
/// nontrivial unipotent of order p. Since p ∤ 2(p^2 - 1) it cannot lie in
/// the nonsplit Cartan normaliser.
fn unipotent_witness(ell: u64, trace: i64, p: u64) -> bool {
    if ell % p != 1 || reduce_i64(trace, p) != 2 % p {
        return false;
    }
    let count = ell as i128 + 1 - trace as i128;
    count % (p as i128 * p as i128) != 0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ImageStatus {
    /// Surjectivity is proven.
    Certified,
    /// No proof found up to the bound. Not evidence of non-surjectivity.
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SurjectivityCertificate {
    pub status: ImageStatus,
    pub bound: u64,
    pub ledger: WitnessLedger,
}

/// Scan good primes `ℓ ≤ bound`, `ℓ ≠ p`, until every subgroup class is
/// excluded. The determinant `ℓ mod p` runs over all of `F_p^×` by Dirichlet,
/// so it is not tested.
pub fn certify_surjective(
    curve: &WeierstrassCurve,
    p: u64,
    bound: u64,
) -> Result<SurjectivityCertificate> {
    if p < 3 || !is_prime(p) {
        return Err(Error::Config(format!("p = {p} must be an odd prime")));
    }
    let mut ledger = WitnessLedger::new(p);
    let primes = if bound >= 2 {
        crate::arith::sieve_primes(bound)?.into_vec()
    } else {
        Vec::new()
    };
    let usable: Vec<u64> = primes
        .into_iter()
        .filter(|&l| l != p && curve.reduction_is_good(l))
        .collect();
    'scan: for chunk in usable.chunks(SCAN_CHUNK) {
        let traces: Vec<Result<i64>> = chunk
            .par_iter()
            .map(|&l| curve.trace_of_frobenius(l))
            .collect();
        for (&l, trace) in chunk.iter().zip(traces) {
            ledger.push(l, trace?)?;
            if ledger.flags.all() {
                break 'scan;
            }
        }
    }
    let status = if ledger.flags.all() {
        ImageStatus::Certified
    } else {
        ImageStatus::Inconclusive
    };
    Ok(SurjectivityCertificate {
        status,
        bound,
        ledger,
    })
}

/// Exhaustive census of `SL_2(F_p)` by trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Sl2TraceCount {
    pub p: u64,
    pub sl2_order: u64,
    /// Trace-2 matrices with top-left entry 1.
    pub trace_two_top_left_one: u64,
    /// Trace-2 matrices with top-left entry ≠ 1.
    pub trace_two_top_left_other: u64,
    pub trace_not_two: u64,
}

impl Sl2TraceCount {
    /// `p^3 - p^2 - p`.
    pub fn formula(&self) -> u64 {
        let p = self.p;
        p * p * p - p * p - p
    }

    pub fn matches_formula(&self) -> bool {
        self.trace_not_two == self.formula()
    }
}

/// Walk every `(a, b, c, d) ∈ F_p^4` with `ad - bc = 1`.
pub fn count_trace_ne2_sl2(p: u64) -> Result<Sl2TraceCount> {
    if !(3..=MAX_SL2_ORACLE_P).contains(&p) || !is_prime(p) {
        return Err(Error::Config(format!(
            "p = {p} outside the exhaustive range (odd primes ≤ {MAX_SL2_ORACLE_P})"
        )));
    }
    let mut count = Sl2TraceCount {
        p,
        sl2_order: 0,
        trace_two_top_left_one: 0,
        trace_two_top_left_other: 0,
        trace_not_two: 0,
    };
    for a in 0..p {
        for d in 0..p {
            let ad = a * d % p;
            let trace_two = (a + d) % p == 2 % p;
            for b in 0..p {
                for c in 0..p {
                    if (ad + p * p - b * c) % p != 1 {
                        continue;
                    }
                    count.sl2_order += 1;
                    if !trace_two {
                        count.trace_not_two += 1;
                    } else if a == 1 {
                        count.trace_two_top_left_one += 1;
                    } else {
                        count.trace_two_top_left_other += 1;
                    }
                }
            }
        }
    }
    Ok(count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::legendre_symbol;

    fn curve_11a2() -> WeierstrassCurve {
        WeierstrassCurve::new(0, -1, 1, -7820, -263580).unwrap()
    }

    #[test]
    fn witness_examples() {
        // squares mod 5 are {1, 4}
        let f = classify_witness(1, 1, 5).unwrap();
        assert_eq!(legendre_symbol(1 - 4, 5).unwrap(), -1);
        assert!(f.excludes_borel_and_split);
        assert!(!f.excludes_nonsplit);

        let f = classify_witness(1, 2, 5).unwrap();
        assert_eq!(legendre_symbol(1 - 8, 5).unwrap(), -1);
        assert!(f.excludes_borel_and_split);
        assert!(f.excludes_exceptional); // u = 1/2 = 3

        assert_eq!(
            classify_witness(0, 1, 5).unwrap(),
            ExclusionFlags::default()
        );
        assert!(classify_witness(1, 0, 5).is_err());
        assert!(classify_witness(1, 1, 9).is_err());
    }

    #[test]
    fn exceptional_exclusion_matches_projective_order() {
        // Oracle: projective order of the companion matrix [[0, -d], [1, a]]
        // in PGL_2(F_p) by repeated multiplication.
        fn projective_order(a: u64, d: u64, p: u64) -> u64 {
            let m = [[0, (p - d) % p], [1, a % p]];
            let mul = |x: [[u64; 2]; 2], y: [[u64; 2]; 2]| {
                let mut z = [[0u64; 2]; 2];
                for i in 0..2 {
                    for j in 0..2 {
                        z[i][j] = (x[i][0] * y[0][j] + x[i][1] * y[1][j]) % p;
                    }
                }
                z
            };
            let mut acc = m;
            let mut k = 1;
            while !(acc[0][1] == 0 && acc[1][0] == 0 && acc[0][0] == acc[1][1]) {
                acc = mul(acc, m);
                k += 1;
            }
            k
        }
        for p in [5u64, 7, 11, 13, 29] {
            for a in 0..p {
                for d in 1..p {
                    let ord = projective_order(a, d, p);
                    let flags = classify_witness(a, d, p).unwrap();
                    // Unipotent-times-scalar (order p) is conservatively kept.
                    let expected = ord > 5 && ord != p;
                    assert_eq!(
                        flags.excludes_exceptional, expected,
                        "p={p} a={a} d={d} ord={ord}"
                    );
                }
            }
        }
    }

    #[test]
    fn example_curve_surjective_at_three() {
        let cert = certify_surjective(&curve_11a2(), 3, 100).unwrap();
        assert_eq!(cert.status, ImageStatus::Certified);
        assert!(cert.ledger.first.borel_and_split.unwrap() <= 100);
        assert!(cert.ledger.first.nonsplit.unwrap() <= 100);
    }

    #[test]
    fn nonsplit_is_never_excluded_by_trace_alone_at_three() {
        for a in 0..3 {
            for d in 1..3 {
                assert!(!classify_witness(a, d, 3).unwrap().excludes_nonsplit);
            }
        }
        // 11a2 at 67: a = -7, #E = 75, one rational 3-torsion line only.
        assert!(unipotent_witness(67, -7, 3));
        assert!(!unipotent_witness(7, -2, 3));
        // 9 | #E: could be the identity
        assert!(!unipotent_witness(7, -1, 3));
    }

    #[test]
    fn five_isogeny_blocks_certification() {
        let cert = certify_surjective(&curve_11a2(), 5, 10_000).unwrap();
        assert_eq!(cert.status, ImageStatus::Inconclusive);
        // Reducible characteristic polynomials everywhere: never a nonsquare
        // discriminant.
        assert!(!cert.ledger.flags.excludes_borel_and_split);
        assert!(cert.ledger.entries.len() > 1000);
    }

    #[test]
    fn tiny_bound_is_inconclusive() {
        for curve in [curve_11a2(), WeierstrassCurve::new(0, 0, 1, -1, 0).unwrap()] {
            let cert = certify_surjective(&curve, 3, 2).unwrap();
            assert_eq!(cert.status, ImageStatus::Inconclusive);
        }
    }

    #[test]
    fn certification_is_monotone() {
        let e = WeierstrassCurve::new(0, 0, 1, -1, 0).unwrap(); // 37a1
        let mut seen = false;
        for bound in (10..400).step_by(10) {
            let ok = certify_surjective(&e, 5, bound).unwrap().status == ImageStatus::Certified;
            assert!(!seen || ok, "certified below {bound} but not at {bound}");
            seen |= ok;
        }
        assert!(seen);
    }

    #[test]
    fn sl2_counts_match_formula() {
        for p in [3u64, 5, 7, 11, 13, 17, 19, 23] {
            let c = count_trace_ne2_sl2(p).unwrap();
            assert_eq!(c.sl2_order, p * (p * p - 1));
            assert_eq!(c.trace_two_top_left_one, 2 * p - 1);
            assert_eq!(c.trace_two_top_left_other, (p - 1) * (p - 1));
            assert!(c.matches_formula());
        }
        assert_eq!(count_trace_ne2_sl2(3).unwrap().trace_not_two, 15);
        assert_eq!(count_trace_ne2_sl2(5).unwrap().trace_not_two, 95);
        assert_eq!(count_trace_ne2_sl2(7).unwrap().trace_not_two, 287);
        assert!(count_trace_ne2_sl2(103).is_err());
        assert!(count_trace_ne2_sl2(9).is_err());
        assert!(count_trace_ne2_sl2(2).is_err());
    }
}
