//! Which hypotheses of the rank-stability theorem hold for `(E, p, K, χ0)`:
//! the Selmer vanishing over `K` (asserted, never computed), `μ_{p^n} ⊆ K`,
//! `χ0` nontrivial mod `p`, `K ∩ Q(E[p]) = Q(μ_p)` and surjectivity of
//! `ρ_{E,p}`.

use serde::Serialize;

use crate::fields::SemidirectDescriptor;
use crate::galois::{ImageStatus, SurjectivityCertificate};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IntersectionStatus {
    Certified,
    Asserted,
    NotAsserted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct HypothesisCertification {
    pub selmer_asserted: bool,
    pub image_status: ImageStatus,
    pub image_bound: u64,
    pub cyclotomic_ok: bool,
    pub chi_nontrivial: bool,
    pub intersection_condition: IntersectionStatus,
}

impl HypothesisCertification {
    pub fn new(
        desc: &SemidirectDescriptor,
        image: &SurjectivityCertificate,
        selmer_asserted: bool,
        intersection_asserted: bool,
    ) -> Self {
        let (p, n) = (desc.p(), desc.n());
        let field = desc.field();
        let is_mu_pn = field.modulus() == desc.p_pow_n() && field.subgroup_order() == 1;
        // With ρ surjective, Gal(Q(E[p])/Q(μ_p)) = SL_2(F_p), which has no
        // nontrivial abelian quotient for p ≥ 5. For n = 1 nothing beyond
        // Q(μ_p) ⊆ Q(E[p]) is needed.
        let intersection_condition =
            if is_mu_pn && image.status == ImageStatus::Certified && (n == 1 || p >= 5) {
                IntersectionStatus::Certified
            } else if intersection_asserted {
                IntersectionStatus::Asserted
            } else {
                IntersectionStatus::NotAsserted
            };
        Self {
            selmer_asserted,
            image_status: image.status,
            image_bound: image.bound,
            cyclotomic_ok: field.contains_cyclotomic(p, n),
            chi_nontrivial: desc.chi_nontrivial_mod_p(),
            intersection_condition,
        }
    }

    /// Every hypothesis either certified or asserted.
    pub fn all_hold(&self) -> bool {
        self.selmer_asserted
            && self.image_status == ImageStatus::Certified
            && self.cyclotomic_ok
            && self.chi_nontrivial
            && self.intersection_condition != IntersectionStatus::NotAsserted
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::WeierstrassCurve;
    use crate::fields::AbelianField;
    use crate::galois::certify_surjective;

    #[test]
    fn example_scenario() {
        let e = WeierstrassCurve::new(0, -1, 1, -7820, -263580).unwrap();
        let desc =
            SemidirectDescriptor::cyclotomic(3, 1, AbelianField::cyclotomic(3).unwrap()).unwrap();
        let cert = certify_surjective(&e, 3, 100).unwrap();
        let h = HypothesisCertification::new(&desc, &cert, true, false);
        assert_eq!(h.intersection_condition, IntersectionStatus::Certified);
        assert!(h.cyclotomic_ok && h.chi_nontrivial);
        assert!(h.all_hold());
        assert!(!HypothesisCertification::new(&desc, &cert, false, false).all_hold());
    }

    #[test]
    fn intersection_falls_back_to_assertion() {
        let e = WeierstrassCurve::new(0, -1, 1, -7820, -263580).unwrap();
        // 5-isogeny: image never certified at 5
        let desc =
            SemidirectDescriptor::cyclotomic(5, 1, AbelianField::cyclotomic(5).unwrap()).unwrap();
        let cert = certify_surjective(&e, 5, 500).unwrap();
        let h = HypothesisCertification::new(&desc, &cert, true, false);
        assert_eq!(h.intersection_condition, IntersectionStatus::NotAsserted);
        let h = HypothesisCertification::new(&desc, &cert, true, true);
        assert_eq!(h.intersection_condition, IntersectionStatus::Asserted);
        assert!(!h.all_hold());

        // K bigger than Q(μ_5): never auto-certified
        let e = WeierstrassCurve::new(0, 0, 1, -1, 0).unwrap();
        let cert = certify_surjective(&e, 5, 1000).unwrap();
        assert_eq!(cert.status, ImageStatus::Certified);
        let desc =
            SemidirectDescriptor::cyclotomic(5, 1, AbelianField::cyclotomic(15).unwrap()).unwrap();
        let h = HypothesisCertification::new(&desc, &cert, true, false);
        assert_eq!(h.intersection_condition, IntersectionStatus::NotAsserted);
    }

    #[test]
    fn trivial_character_is_reported() {
        // χ0 = 6 on the generator 2 of (Z/25)^×, which is 1 mod 5
        let k = AbelianField::cyclotomic(25).unwrap();
        let desc = SemidirectDescriptor::new(5, 2, k, vec![6]).unwrap();
        let e = WeierstrassCurve::new(0, 0, 1, -1, 0).unwrap();
        let cert = certify_surjective(&e, 5, 1000).unwrap();
        let h = HypothesisCertification::new(&desc, &cert, true, false);
        assert!(!h.chi_nontrivial);
        assert_eq!(h.intersection_condition, IntersectionStatus::Certified);
    }
}
