//! Abelian number fields as congruence data and the semidirect product
//! `B ⋉ Z/p^nZ` built from a character `χ0 : B → (Z/p^nZ)^×`.
//!
//! By Kronecker–Weber an abelian `K` is the fixed field of a subgroup
//! `H ≤ (Z/mZ)^×` inside `Q(μ_m)`; then `B = Gal(K/Q) ≅ (Z/mZ)^× / H` and an
//! unramified prime ℓ splits completely in `K` iff `ℓ mod m ∈ H`.

use serde::Serialize;

use crate::arith::{euler_phi, factor, gcd, is_prime, mul_mod, pow_mod, unit_group, UnitGroup};
use crate::error::{Error, Result};

/// Largest modulus for which the subgroup is expanded into a membership table.
pub const MAX_MODULUS: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AbelianField {
    modulus: u64,
    subgroup_gens: Vec<u64>,
    members: Vec<bool>,
    subgroup_order: u64,
}

impl AbelianField {
    /// The fixed field of `<gens>` in `Q(μ_m)`. `m` must be the conductor:
    /// the data is rejected if the same field is cut out at a proper divisor.
    pub fn new(modulus: u64, gens: &[u64]) -> Result<Self> {
        let field = Self::with_modulus(modulus, gens)?;
        if let Some(smaller) = field.reducible_divisor() {
            return Err(Error::Config(format!(
                "modulus {modulus} is not the conductor: the field is already defined modulo {smaller}"
            )));
        }
        Ok(field)
    }

    /// `Q(μ_m)`.
    pub fn cyclotomic(modulus: u64) -> Result<Self> {
        Self::new(modulus, &[])
    }

    /// Like [`new`](Self::new) but accepts a non-minimal modulus. Ramification
    /// at primes dividing `m` is then only an upper bound.
    pub fn with_modulus(modulus: u64, gens: &[u64]) -> Result<Self> {
        if !(3..=MAX_MODULUS).contains(&modulus) {
            return Err(Error::Config(format!(
                "modulus {modulus} outside [3, {MAX_MODULUS}]"
            )));
        }
        let mut subgroup_gens = Vec::new();
        for &g in gens {
            let g = g % modulus;
            if gcd(g, modulus) != 1 {
                return Err(Error::Config(format!(
                    "subgroup generator {g} is not a unit modulo {modulus}"
                )));
            }
            if g != 1 && !subgroup_gens.contains(&g) {
                subgroup_gens.push(g);
            }
        }
        let mut members = vec![false; modulus as usize];
        members[1] = true;
        let mut elems = vec![1u64];
        let mut i = 0;
        while i < elems.len() {
            let x = elems[i];
            for &g in &subgroup_gens {
                let y = mul_mod(x, g, modulus);
                if !members[y as usize] {
                    members[y as usize] = true;
                    elems.push(y);
                }
            }
            i += 1;
        }
        let subgroup_order = elems.len() as u64;
        let phi = euler_phi(modulus);
        if !phi.is_multiple_of(subgroup_order) {
            return Err(Error::Invariant(format!(
                "|H| = {subgroup_order} does not divide φ({modulus}) = {phi}"
            )));
        }
        if subgroup_order == phi {
            return Err(Error::Config("H is the full unit group, so K = Q".into()));
        }
        Ok(Self {
            modulus,
            subgroup_gens,
            members,
            subgroup_order,
        })
    }

    /// The same field presented at its conductor.
    pub fn at_conductor(&self) -> Result<Self> {
        let mut field = self.clone();
        while let Some(m) = field.reducible_divisor() {
            let gens: Vec<u64> = field.subgroup_gens.iter().map(|g| g % m).collect();
            field = Self::with_modulus(m, &gens)?;
        }
        Ok(field)
    }

    /// A divisor `m/q` at which the same field is already defined, i.e. the
    /// kernel of `(Z/mZ)^× → (Z/(m/q)Z)^×` lies in `H`.
    fn reducible_divisor(&self) -> Option<u64> {
        let m = self.modulus;
        factor(m).into_iter().map(|(q, _)| m / q).find(|&d| {
            (0..m / d)
                .map(|k| 1 + k * d)
                .filter(|&u| gcd(u, m) == 1)
                .all(|u| self.members[(u % m) as usize])
        })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn subgroup_generators(&self) -> &[u64] {
        &self.subgroup_gens
    }

    pub fn subgroup_order(&self) -> u64 {
        self.subgroup_order
    }

    /// `[K : Q] = |B| = φ(m) / |H|`.
    pub fn degree(&self) -> u64 {
        euler_phi(self.modulus) / self.subgroup_order
    }

    pub fn in_subgroup(&self, residue: u64) -> bool {
        self.members[(residue % self.modulus) as usize]
    }

    pub fn is_ramified(&self, ell: u64) -> bool {
        self.modulus.is_multiple_of(ell)
    }

    pub fn splits_completely(&self, ell: u64) -> Result<bool> {
        if self.is_ramified(ell) {
            return Err(Error::Ramified(ell));
        }
        Ok(self.in_subgroup(ell))
    }

    /// Whether `Q(μ_{p^n}) ⊆ K`.
    pub fn contains_cyclotomic(&self, p: u64, n: u32) -> bool {
        let Some(q) = p.checked_pow(n) else {
            return false;
        };
        self.modulus.is_multiple_of(q) && self.subgroup_gens.iter().all(|&h| h % q == 1)
    }

    /// `[K : Q(μ_p)]`.
    pub fn degree_over_mu_p(&self, p: u64) -> Result<u64> {
        if !self.contains_cyclotomic(p, 1) {
            return Err(Error::Precondition(format!(
                "K does not contain the {p}-th roots of unity"
            )));
        }
        Ok(self.degree() / (p - 1))
    }
}

impl Serialize for AbelianField {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            modulus: u64,
            subgroup: &'a [u64],
            degree: u64,
        }
        Repr {
            modulus: self.modulus,
            subgroup: &self.subgroup_gens,
            degree: self.degree(),
        }
        .serialize(s)
    }
}

/// `𝒢 = B ⋉ Z/p^nZ` with `x h x^{-1} = χ0(x) h`, where `χ0` is given by the
/// images of the generators of `(Z/mZ)^×` (in [`UnitGroup`] order).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SemidirectDescriptor {
    p: u64,
    n: u32,
    field: AbelianField,
    units: UnitGroup,
    chi0: Vec<u64>,
}

impl SemidirectDescriptor {
    pub fn new(p: u64, n: u32, field: AbelianField, chi0: Vec<u64>) -> Result<Self> {
        if p.is_multiple_of(2) || !is_prime(p) {
            return Err(Error::Config(format!("p = {p} must be an odd prime")));
        }
        if n == 0 {
            return Err(Error::Config("n must be positive".into()));
        }
        let q = p
            .checked_pow(n)
            .filter(|&q| q <= 1 << 32)
            .ok_or_else(|| Error::Config(format!("p^n = {p}^{n} too large")))?;
        let units = unit_group(field.modulus())?;
        if chi0.len() != units.generators().len() {
            return Err(Error::Config(format!(
                "χ0 needs {} generator images (generators {:?} of (Z/{}Z)^×), got {}",
                units.generators().len(),
                units.generators(),
                field.modulus(),
                chi0.len()
            )));
        }
        let chi0: Vec<u64> = chi0.into_iter().map(|v| v % q).collect();
        for ((&img, &g), &ord) in chi0.iter().zip(units.generators()).zip(units.orders()) {
            if gcd(img, q) != 1 {
                return Err(Error::Config(format!(
                    "χ0({g}) = {img} is not a unit modulo {q}"
                )));
            }
            if pow_mod(img, ord, q) != 1 {
                return Err(Error::Config(format!(
                    "χ0 is not well defined: {g} has order {ord} but χ0({g})^{ord} ≠ 1 mod {q}"
                )));
            }
        }
        let desc = Self {
            p,
            n,
            field,
            units,
            chi0,
        };
        for &h in desc.field.subgroup_generators() {
            if desc.chi0_of(h)? != 1 {
                return Err(Error::Config(format!(
                    "χ0 does not factor through B: χ0({h}) ≠ 1 for {h} ∈ H"
                )));
            }
        }
        Ok(desc)
    }

    /// `χ0` = reduction `(Z/mZ)^× → (Z/p^nZ)^×`, the mod-`p^n` cyclotomic
    /// character. Needs `Q(μ_{p^n}) ⊆ K`.
    pub fn cyclotomic(p: u64, n: u32, field: AbelianField) -> Result<Self> {
        let q = p
            .checked_pow(n)
            .ok_or_else(|| Error::Config(format!("p^n = {p}^{n} too large")))?;
        if !field.contains_cyclotomic(p, n) {
            return Err(Error::Precondition(format!(
                "the cyclotomic character needs μ_{q} ⊆ K"
            )));
        }
        let images = unit_group(field.modulus())?
            .generators()
            .iter()
            .map(|g| g % q)
            .collect();
        Self::new(p, n, field, images)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn p_pow_n(&self) -> u64 {
        self.p.pow(self.n)
    }

    pub fn field(&self) -> &AbelianField {
        &self.field
    }

    pub fn chi0_images(&self) -> &[u64] {
        &self.chi0
    }

    /// `|B| = [K : Q]`.
    pub fn b_order(&self) -> u64 {
        self.field.degree()
    }

    /// `r = p^{n-1}(p-1) = #(Z/p^nZ)^×`.
    pub fn r(&self) -> u64 {
        self.p.pow(self.n - 1) * (self.p - 1)
    }

    /// `χ0` evaluated at a unit modulo `m`.
    pub fn chi0_of(&self, u: u64) -> Result<u64> {
        let q = self.p_pow_n();
        let exps = self.units.exponents(u)?;
        Ok(self
            .chi0
            .iter()
            .zip(&exps)
            .fold(1 % q, |acc, (&img, &e)| mul_mod(acc, pow_mod(img, e, q), q)))
    }

    /// Whether `χ0` composed with `(Z/p^nZ)^× → (Z/pZ)^×` is nontrivial.
    pub fn chi_nontrivial_mod_p(&self) -> bool {
        self.chi0.iter().any(|&v| v % self.p != 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::sieve_primes;

    #[test]
    fn splitting_examples() {
        let k3 = AbelianField::cyclotomic(3).unwrap();
        assert!(k3.splits_completely(7).unwrap());
        assert!(!k3.splits_completely(5).unwrap());
        assert_eq!(k3.splits_completely(3), Err(Error::Ramified(3)));

        let real5 = AbelianField::new(5, &[4]).unwrap();
        assert_eq!(real5.degree(), 2);
        assert!(real5.splits_completely(19).unwrap());
        // Q(√5): ℓ splits iff ℓ ≡ ±1 mod 5
        for l in sieve_primes(500).unwrap().iter().filter(|&l| l != 5) {
            assert_eq!(
                real5.splits_completely(l).unwrap(),
                l % 5 == 1 || l % 5 == 4,
                "ℓ={l}"
            );
        }
    }

    #[test]
    fn cyclotomic_containment() {
        let k3 = AbelianField::cyclotomic(3).unwrap();
        assert!(k3.contains_cyclotomic(3, 1));
        assert!(!k3.contains_cyclotomic(3, 2));

        let h: Vec<u64> = (1..45u64)
            .filter(|&u| gcd(u, 45) == 1 && u % 9 == 1)
            .collect();
        assert_eq!(h, vec![1, 19, 28, 37]);
        let k = AbelianField::with_modulus(45, &h).unwrap();
        assert!(k.contains_cyclotomic(3, 2));
        assert!(!k.contains_cyclotomic(3, 3));
        // 45 is not the conductor of this field: it is Q(μ_9).
        assert!(matches!(AbelianField::new(45, &h), Err(Error::Config(_))));
        let reduced = k.at_conductor().unwrap();
        assert_eq!(reduced.modulus(), 9);
        assert_eq!(reduced.subgroup_order(), 1);
        assert!(reduced.contains_cyclotomic(3, 2));
    }

    #[test]
    fn conductor_validation() {
        // m ≡ 2 mod 4 is never a conductor
        assert!(AbelianField::cyclotomic(6).is_err());
        assert!(AbelianField::cyclotomic(10).is_err());
        assert!(AbelianField::cyclotomic(15).is_ok());
        // Q(√-3) inside Q(μ_15) is cut out by the units ≡ 1 mod 3
        assert!(AbelianField::new(15, &[4, 7]).is_err());
        assert_eq!(
            AbelianField::with_modulus(15, &[4, 7])
                .unwrap()
                .at_conductor()
                .unwrap()
                .modulus(),
            3
        );
        assert!(AbelianField::new(15, &[2, 7]).is_err()); // H = everything
        assert!(AbelianField::new(15, &[3]).is_err()); // not a unit
        assert!(AbelianField::cyclotomic(2).is_err());
    }

    #[test]
    fn degrees_over_mu_p() {
        assert_eq!(
            AbelianField::cyclotomic(3)
                .unwrap()
                .degree_over_mu_p(3)
                .unwrap(),
            1
        );
        assert_eq!(
            AbelianField::cyclotomic(25)
                .unwrap()
                .degree_over_mu_p(5)
                .unwrap(),
            5
        );
        assert_eq!(
            AbelianField::cyclotomic(15)
                .unwrap()
                .degree_over_mu_p(3)
                .unwrap(),
            4
        );
        assert!(matches!(
            AbelianField::cyclotomic(7).unwrap().degree_over_mu_p(3),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn split_residues_form_a_subgroup() {
        let fields = [
            AbelianField::new(5, &[4]).unwrap(),
            AbelianField::new(63, &[4]).unwrap(),
            AbelianField::new(13, &[3]).unwrap(),
        ];
        for k in &fields {
            let m = k.modulus();
            let split: Vec<u64> = (1..m)
                .filter(|&u| gcd(u, m) == 1 && k.in_subgroup(u))
                .collect();
            assert_eq!(split.len() as u64, k.subgroup_order());
            for &a in &split {
                for &b in &split {
                    assert!(k.in_subgroup(a * b % m));
                }
            }
        }
    }

    #[test]
    fn splitting_density_matches_degree() {
        let primes = sieve_primes(100_000).unwrap();
        for k in [
            AbelianField::cyclotomic(3).unwrap(),
            AbelianField::cyclotomic(5).unwrap(),
            AbelianField::new(5, &[4]).unwrap(),
            AbelianField::cyclotomic(15).unwrap(),
        ] {
            let unramified: Vec<u64> = primes.iter().filter(|&l| !k.is_ramified(l)).collect();
            let split = unramified
                .iter()
                .filter(|&&l| k.splits_completely(l).unwrap())
                .count();
            let frac = split as f64 / unramified.len() as f64;
            assert!(
                (frac - 1.0 / k.degree() as f64).abs() < 0.01,
                "{k:?}: {frac}"
            );
        }
    }

    #[test]
    fn chi0_examples() {
        let k3 = AbelianField::cyclotomic(3).unwrap();
        let d = SemidirectDescriptor::new(3, 1, k3.clone(), vec![2]).unwrap();
        assert!(d.chi_nontrivial_mod_p());
        assert_eq!(d.r(), 2);
        assert_eq!(d.b_order(), 2);
        assert_eq!(
            d,
            SemidirectDescriptor::cyclotomic(3, 1, k3.clone()).unwrap()
        );

        let trivial = SemidirectDescriptor::new(3, 1, k3, vec![1]).unwrap();
        assert!(!trivial.chi_nontrivial_mod_p());

        // (Z/25)^× is cyclic of order 20 generated by 2; 6 = 1 + 5 has order 5.
        let k25 = AbelianField::cyclotomic(25).unwrap();
        assert_eq!(unit_group(25).unwrap().generators(), &[2]);
        assert_eq!(crate::arith::multiplicative_order(6, 25), Some(5));
        let d = SemidirectDescriptor::new(5, 2, k25, vec![6]).unwrap();
        assert!(!d.chi_nontrivial_mod_p());
        assert_eq!(d.r(), 20);
    }

    #[test]
    fn chi0_validation() {
        let k3 = AbelianField::cyclotomic(3).unwrap();
        // 3 is not a unit modulo 3
        assert!(SemidirectDescriptor::new(3, 1, k3.clone(), vec![3]).is_err());
        assert!(SemidirectDescriptor::new(3, 1, k3.clone(), vec![]).is_err());
        // the generator 2 of (Z/3)^× has order 2, but 2 has order 6 modulo 9
        assert!(SemidirectDescriptor::new(3, 2, k3.clone(), vec![2]).is_err());
        assert!(SemidirectDescriptor::new(3, 2, k3.clone(), vec![8]).is_ok());
        assert!(SemidirectDescriptor::new(4, 1, k3.clone(), vec![1]).is_err());
        assert!(SemidirectDescriptor::new(3, 0, k3, vec![1]).is_err());
        // H must be in the kernel: K = Q(√5), χ0 must kill 4.
        let real5 = AbelianField::new(5, &[4]).unwrap();
        assert!(SemidirectDescriptor::new(3, 1, real5.clone(), vec![2]).is_ok());
        assert!(SemidirectDescriptor::new(5, 1, real5, vec![2]).is_err());
    }

    #[test]
    fn chi0_is_a_homomorphism() {
        let cases = [
            (AbelianField::cyclotomic(9).unwrap(), 3u64, 2u32, vec![2u64]),
            (AbelianField::cyclotomic(25).unwrap(), 5, 2, vec![2]),
            (AbelianField::cyclotomic(75).unwrap(), 5, 1, vec![1, 2]),
            (AbelianField::cyclotomic(63).unwrap(), 3, 1, vec![2, 1]),
            (
                AbelianField::cyclotomic(7 * 11 * 13).unwrap(),
                3,
                1,
                vec![2, 1, 2],
            ),
        ];
        for (k, p, n, images) in cases {
            let m = k.modulus();
            let d = SemidirectDescriptor::new(p, n, k, images).unwrap();
            let q = d.p_pow_n();
            let units: Vec<u64> = (1..m).filter(|&u| gcd(u, m) == 1).collect();
            for &a in &units {
                for &b in units.iter().step_by(7) {
                    let lhs = d.chi0_of(a * b % m).unwrap();
                    let rhs = d.chi0_of(a).unwrap() * d.chi0_of(b).unwrap() % q;
                    assert_eq!(lhs, rhs, "m={m} a={a} b={b}");
                }
            }
        }
    }
}
