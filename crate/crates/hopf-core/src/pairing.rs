//! Factorial-delta duality pairing between an enveloping-type presentation
//! and its function-type partner.
//!
//! On normal monomials the pairing matches generator slots: with bases
//! `u_1^{m_1} … u_k^{m_k}` and `f_1^{n_1} … f_k^{n_k}` (in the declared slot
//! orders) it evaluates to `Π_i m_i! · δ_{m_i, n_i}`.  Extended bilinearly and
//! through normal ordering it becomes a Hopf pairing: the product on either
//! side is adjoint to the coproduct on the other,
//!
//! ```text
//! ⟨u u′, f⟩ = Σ ⟨u, f₍₁₎⟩ ⟨u′, f₍₂₎⟩      ⟨u, f f′⟩ = Σ ⟨u₍₁₎, f⟩ ⟨u₍₂₎, f′⟩
//! ```
//!
//! with units dual to counits and antipode dual to antipode.  The suite in
//! [`check_duality`] verifies all five identities on every normal monomial up
//! to a degree window, which is exactly where the deformed structure lives:
//! the twisted coproducts and ordering relations must conspire so the naive
//! factorial rule stays a Hopf duality.

use crate::hopfops::{antipode_word, coproduct_word, counit_word, HopfError};
use crate::ncpoly::{normal_order, NcPoly, Word};
use crate::presentation::{AlgebraPresentation, Bundle, PairingSpec};
use crate::report::AxiomReport;
use crate::scalar::{factorial, GaussianRational, ParamPoly, ScalarError};
use num::{BigInt, BigRational, One};
use std::collections::BTreeSet;

/// Evaluator for one declared duality between two presentations.
///
/// Owns copies of both presentations plus the slot permutations taking each
/// generator to its dual partner, so evaluation needs no further lookups.
#[derive(Debug, Clone)]
pub struct PairingEngine {
    name: String,
    u_pres: AlgebraPresentation,
    f_pres: AlgebraPresentation,
    u_slots: Vec<u8>,
    f_slots: Vec<u8>,
}

impl PairingEngine {
    pub fn new(spec: &PairingSpec, bundle: &Bundle) -> Result<Self, String> {
        let u_pres = bundle
            .algebra(&spec.u_algebra)
            .ok_or_else(|| format!("pairing {}: unknown algebra {}", spec.name, spec.u_algebra))?
            .clone();
        let f_pres = bundle
            .algebra(&spec.f_algebra)
            .ok_or_else(|| format!("pairing {}: unknown algebra {}", spec.name, spec.f_algebra))?
            .clone();
        let u_slots = rank_order(&spec.name, &u_pres, &spec.u_order)?;
        let f_slots = rank_order(&spec.name, &f_pres, &spec.f_order)?;
        if u_slots.len() != f_slots.len() {
            return Err(format!(
                "pairing {}: basis orders pair {} generators against {}",
                spec.name,
                u_slots.len(),
                f_slots.len()
            ));
        }
        Ok(PairingEngine {
            name: spec.name.clone(),
            u_pres,
            f_pres,
            u_slots,
            f_slots,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn u_presentation(&self) -> &AlgebraPresentation {
        &self.u_pres
    }

    pub fn f_presentation(&self) -> &AlgebraPresentation {
        &self.f_pres
    }

    /// Rank of the generator paired against `u_rank` in the dual basis order.
    pub fn dual_rank(&self, u_rank: u8) -> Option<u8> {
        self.u_slots
            .iter()
            .position(|r| *r == u_rank)
            .map(|i| self.f_slots[i])
    }

    /// Paired slot sequences `(u_ranks, f_ranks)` in declaration order.
    pub fn slots(&self) -> (&[u8], &[u8]) {
        (&self.u_slots, &self.f_slots)
    }

    /// Factorial-delta value on a pair of normal monomials.
    pub fn pair_words(&self, uw: &Word, fw: &Word) -> GaussianRational {
        let ue = uw.exponents(self.u_pres.generators().len());
        let fe = fw.exponents(self.f_pres.generators().len());
        let mut acc = BigRational::one();
        for (us, fs) in self.u_slots.iter().zip(&self.f_slots) {
            let m = ue[*us as usize];
            if m != fe[*fs as usize] {
                return GaussianRational::zero();
            }
            acc *= factorial(m);
        }
        GaussianRational::new(acc, BigRational::from_integer(BigInt::from(0)))
    }

    /// Bilinear extension over already-normal polynomials.
    pub fn pair_normal(&self, u: &NcPoly, f: &NcPoly) -> Result<ParamPoly, ScalarError> {
        let mut out = ParamPoly::zero(self.u_pres.param_context());
        for (uw, uc) in u.terms() {
            for (fw, fc) in f.terms() {
                let val = self.pair_words(uw, fw);
                if val.is_zero() {
                    continue;
                }
                out = out.checked_add(&uc.checked_mul(fc)?.scaled(&val))?;
            }
        }
        Ok(out)
    }

    /// Full pairing: normal-order each argument in its own presentation,
    /// then evaluate the factorial-delta form bilinearly.
    pub fn pair(&self, u: &NcPoly, f: &NcPoly) -> Result<ParamPoly, HopfError> {
        let un = normal_order(u, &self.u_pres)?;
        let fnorm = normal_order(f, &self.f_pres)?;
        Ok(self.pair_normal(&un, &fnorm)?)
    }

    fn pair_left_poly(&self, u: &NcPoly, fw: &Word) -> Result<ParamPoly, ScalarError> {
        let mut out = ParamPoly::zero(self.u_pres.param_context());
        for (uw, uc) in u.terms() {
            let val = self.pair_words(uw, fw);
            if !val.is_zero() {
                out = out.checked_add(&uc.scaled(&val))?;
            }
        }
        Ok(out)
    }

    fn pair_right_poly(&self, uw: &Word, f: &NcPoly) -> Result<ParamPoly, ScalarError> {
        let mut out = ParamPoly::zero(self.u_pres.param_context());
        for (fw, fc) in f.terms() {
            let val = self.pair_words(uw, fw);
            if !val.is_zero() {
                out = out.checked_add(&fc.scaled(&val))?;
            }
        }
        Ok(out)
    }
}

fn rank_order(
    name: &str,
    pres: &AlgebraPresentation,
    order: &[String],
) -> Result<Vec<u8>, String> {
    let gens = pres.generators();
    if order.len() != gens.len() {
        return Err(format!(
            "pairing {}: basis order for {} lists {} of {} generators",
            name,
            pres.name(),
            order.len(),
            gens.len()
        ));
    }
    let mut slots = Vec::with_capacity(order.len());
    for g in order {
        let rank = gens
            .rank_of(g)
            .ok_or_else(|| format!("pairing {}: {} has no generator {}", name, pres.name(), g))?;
        slots.push(rank);
    }
    let distinct: BTreeSet<u8> = slots.iter().copied().collect();
    if distinct.len() != slots.len() {
        return Err(format!(
            "pairing {}: basis order for {} repeats a generator",
            name,
            pres.name()
        ));
    }
    Ok(slots)
}

/// Accumulates one verdict across many monomial instances of an identity.
struct Agg {
    checked: usize,
    failures: usize,
    first: Option<String>,
}

impl Agg {
    fn new() -> Self {
        Agg {
            checked: 0,
            failures: 0,
            first: None,
        }
    }

    fn compare(&mut self, lhs: &ParamPoly, rhs: &ParamPoly, describe: impl FnOnce() -> String) {
        self.checked += 1;
        if lhs != rhs {
            self.failures += 1;
            if self.first.is_none() {
                self.first = Some(format!("{}: {} vs {}", describe(), lhs, rhs));
            }
        }
    }
}

fn push(rep: &mut AxiomReport, check: &str, subject: &str, outcome: Result<Agg, HopfError>) {
    match outcome {
        Ok(agg) => match agg.first {
            None => rep.pass("duality", check, subject),
            Some(first) => rep.fail(
                "duality",
                check,
                subject,
                format!(
                    "{} of {} instances deviate; first: {}",
                    agg.failures, agg.checked, first
                ),
            ),
        },
        Err(e) => rep.fail("duality", check, subject, e.to_string()),
    }
}

/// Verify the five Hopf-duality identities on all normal monomials up to
/// `max_degree` on each side.
pub fn check_duality(engine: &PairingEngine, max_degree: usize) -> AxiomReport {
    let mut rep = AxiomReport::new();
    let u_words = engine.u_pres.generators().normal_words_up_to(max_degree);
    let f_words = engine.f_pres.generators().normal_words_up_to(max_degree);
    let subject = engine.name.clone();
    push(
        &mut rep,
        "product-coproduct",
        &subject,
        product_coproduct(engine, &u_words, &f_words, max_degree),
    );
    push(
        &mut rep,
        "coproduct-product",
        &subject,
        coproduct_product(engine, &u_words, &f_words, max_degree),
    );
    push(&mut rep, "pairing-unit", &subject, unit_law(engine, &f_words));
    push(
        &mut rep,
        "pairing-counit",
        &subject,
        counit_law(engine, &u_words),
    );
    push(
        &mut rep,
        "pairing-antipode",
        &subject,
        antipode_law(engine, &u_words, &f_words),
    );
    rep
}

/// `⟨u u′, f⟩ = Σ ⟨u, f₍₁₎⟩⟨u′, f₍₂₎⟩` for nonempty normal `u, u′` with
/// `|u| + |u′| ≤ max_degree` and every normal `f`.
fn product_coproduct(
    engine: &PairingEngine,
    u_words: &[Word],
    f_words: &[Word],
    max_degree: usize,
) -> Result<Agg, HopfError> {
    let mut agg = Agg::new();
    let mut cops = Vec::with_capacity(f_words.len());
    for fw in f_words {
        cops.push(coproduct_word(&engine.f_pres, fw)?);
    }
    let ugens = engine.u_pres.generators();
    let fgens = engine.f_pres.generators();
    for u in u_words.iter().filter(|w| !w.is_empty()) {
        for u2 in u_words.iter().filter(|w| !w.is_empty()) {
            if u.len() + u2.len() > max_degree {
                continue;
            }
            let one = ParamPoly::one(engine.u_pres.param_context());
            let prod = normal_order(
                &NcPoly::from_word(u.concat(u2), one),
                &engine.u_pres,
            )?;
            for (fw, cop) in f_words.iter().zip(&cops) {
                let lhs = engine.pair_left_poly(&prod, fw)?;
                let mut rhs = ParamPoly::zero(engine.u_pres.param_context());
                for ((l, r), c) in cop.terms() {
                    let val = engine.pair_words(u, l).mul(&engine.pair_words(u2, r));
                    if !val.is_zero() {
                        rhs = rhs.checked_add(&c.scaled(&val))?;
                    }
                }
                agg.compare(&lhs, &rhs, || {
                    format!(
                        "⟨{}·{}, {}⟩",
                        u.to_display(ugens),
                        u2.to_display(ugens),
                        fw.to_display(fgens)
                    )
                });
            }
        }
    }
    Ok(agg)
}

/// `⟨u, f f′⟩ = Σ ⟨u₍₁₎, f⟩⟨u₍₂₎, f′⟩` for nonempty normal `f, f′` with
/// `|f| + |f′| ≤ max_degree` and every normal `u`.
fn coproduct_product(
    engine: &PairingEngine,
    u_words: &[Word],
    f_words: &[Word],
    max_degree: usize,
) -> Result<Agg, HopfError> {
    let mut agg = Agg::new();
    let mut cops = Vec::with_capacity(u_words.len());
    for uw in u_words {
        cops.push(coproduct_word(&engine.u_pres, uw)?);
    }
    let ugens = engine.u_pres.generators();
    let fgens = engine.f_pres.generators();
    for f in f_words.iter().filter(|w| !w.is_empty()) {
        for f2 in f_words.iter().filter(|w| !w.is_empty()) {
            if f.len() + f2.len() > max_degree {
                continue;
            }
            let one = ParamPoly::one(engine.f_pres.param_context());
            let prod = normal_order(
                &NcPoly::from_word(f.concat(f2), one),
                &engine.f_pres,
            )?;
            for (uw, cop) in u_words.iter().zip(&cops) {
                let lhs = engine.pair_right_poly(uw, &prod)?;
                let mut rhs = ParamPoly::zero(engine.u_pres.param_context());
                for ((l, r), c) in cop.terms() {
                    let val = engine.pair_words(l, f).mul(&engine.pair_words(r, f2));
                    if !val.is_zero() {
                        rhs = rhs.checked_add(&c.scaled(&val))?;
                    }
                }
                agg.compare(&lhs, &rhs, || {
                    format!(
                        "⟨{}, {}·{}⟩",
                        uw.to_display(ugens),
                        f.to_display(fgens),
                        f2.to_display(fgens)
                    )
                });
            }
        }
    }
    Ok(agg)
}

/// `⟨1, f⟩ = ε(f)` on every normal `f`.
fn unit_law(engine: &PairingEngine, f_words: &[Word]) -> Result<Agg, HopfError> {
    let mut agg = Agg::new();
    let fgens = engine.f_pres.generators();
    let ctx = engine.u_pres.param_context();
    for fw in f_words {
        let lhs = ParamPoly::constant(ctx, engine.pair_words(&Word::empty(), fw));
        let rhs = counit_word(&engine.f_pres, fw)?.retruncate(ctx)?;
        agg.compare(&lhs, &rhs, || format!("⟨1, {}⟩", fw.to_display(fgens)));
    }
    Ok(agg)
}

/// `⟨u, 1⟩ = ε(u)` on every normal `u`.
fn counit_law(engine: &PairingEngine, u_words: &[Word]) -> Result<Agg, HopfError> {
    let mut agg = Agg::new();
    let ugens = engine.u_pres.generators();
    let ctx = engine.u_pres.param_context();
    for uw in u_words {
        let lhs = ParamPoly::constant(ctx, engine.pair_words(uw, &Word::empty()));
        let rhs = counit_word(&engine.u_pres, uw)?;
        agg.compare(&lhs, &rhs, || format!("⟨{}, 1⟩", uw.to_display(ugens)));
    }
    Ok(agg)
}

/// `⟨γ(u), f⟩ = ⟨u, γ(f)⟩` on every normal pair.
fn antipode_law(
    engine: &PairingEngine,
    u_words: &[Word],
    f_words: &[Word],
) -> Result<Agg, HopfError> {
    let mut agg = Agg::new();
    let ugens = engine.u_pres.generators();
    let fgens = engine.f_pres.generators();
    let mut f_antipodes = Vec::with_capacity(f_words.len());
    for fw in f_words {
        f_antipodes.push(antipode_word(&engine.f_pres, fw)?);
    }
    for uw in u_words {
        let gu = antipode_word(&engine.u_pres, uw)?;
        for (fw, gf) in f_words.iter().zip(&f_antipodes) {
            let lhs = engine.pair_left_poly(&gu, fw)?;
            let rhs = engine.pair_right_poly(uw, gf)?;
            agg.compare(&lhs, &rhs, || {
                format!(
                    "⟨γ({}), {}⟩ vs ⟨{}, γ({})⟩",
                    uw.to_display(ugens),
                    fw.to_display(fgens),
                    uw.to_display(ugens),
                    fw.to_display(fgens)
                )
            });
        }
    }
    Ok(agg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presentation::parse_bundle;

    fn standard_engine() -> PairingEngine {
        let bundle = parse_bundle(crate::bundles::GALILEI_STANDARD).unwrap();
        PairingEngine::new(&bundle.pairings[0], &bundle).unwrap()
    }

    fn nonstandard_engine() -> PairingEngine {
        let bundle = parse_bundle(crate::bundles::GALILEI_NONSTANDARD).unwrap();
        PairingEngine::new(&bundle.pairings[0], &bundle).unwrap()
    }

    fn word(pres: &AlgebraPresentation, names: &[&str]) -> Word {
        let ranks: Vec<u8> = names
            .iter()
            .map(|n| pres.generators().rank_of(n).unwrap())
            .collect();
        Word::from_ranks(&ranks)
    }

    #[test]
    fn factorial_delta_on_normal_monomials() {
        let e = standard_engine();
        let u = |names: &[&str]| word(e.u_presentation(), names);
        let f = |names: &[&str]| word(e.f_presentation(), names);
        assert_eq!(
            e.pair_words(&u(&["K", "P"]), &f(&["v", "x"])),
            GaussianRational::one()
        );
        assert_eq!(
            e.pair_words(&u(&["K", "K"]), &f(&["v", "v"])),
            GaussianRational::from_int(2)
        );
        assert_eq!(
            e.pair_words(&u(&["K", "K", "P", "H"]), &f(&["v", "v", "x", "t"])),
            GaussianRational::from_int(2)
        );
        assert!(e.pair_words(&u(&["K"]), &f(&["x"])).is_zero());
        assert!(e.pair_words(&u(&["K", "P"]), &f(&["v"])).is_zero());
    }

    #[test]
    fn pairing_sees_through_normal_ordering() {
        let e = standard_engine();
        let ctx = e.u_presentation().param_context();
        let one = ParamPoly::one(ctx);
        // Reordered product: P·K = K·P + omega·P², so against x² only the
        // correction term survives and picks up the factorial 2!.
        let pk = NcPoly::from_word(word(e.u_presentation(), &["P", "K"]), one.clone());
        let xx = NcPoly::from_word(word(e.f_presentation(), &["x", "x"]), one.clone());
        let omega = ParamPoly::param(ctx, "omega").unwrap();
        assert_eq!(
            e.pair(&pk, &xx).unwrap(),
            omega.scaled(&GaussianRational::from_int(2))
        );
        // Mirror on the function side: t·v = v·t - 2·omega·v.
        let k = NcPoly::from_word(word(e.u_presentation(), &["K"]), one.clone());
        let tv = NcPoly::from_word(word(e.f_presentation(), &["t", "v"]), one);
        assert_eq!(
            e.pair(&k, &tv).unwrap(),
            omega.scaled(&GaussianRational::from_int(-2))
        );
    }

    #[test]
    fn duality_suite_passes_for_both_engines() {
        for engine in [standard_engine(), nonstandard_engine()] {
            let rep = check_duality(&engine, 2);
            assert!(rep.passed(), "{}", rep.to_text());
        }
    }

    #[test]
    fn untwisted_coproduct_breaks_the_duality() {
        let mut bundle = parse_bundle(crate::bundles::GALILEI_STANDARD).unwrap();
        let f_name = bundle.pairings[0].f_algebra.clone();
        let fp = bundle.algebras.get_mut(&f_name).unwrap();
        let x = fp.generators().rank_of("x").unwrap();
        let ctx = fp.param_context().clone();
        // Strip the twist term from Δx, leaving the primitive part only.
        let primitive = crate::ncpoly::TensorNcPoly::from_term(
            Word::single(x),
            Word::empty(),
            ParamPoly::one(&ctx),
        )
        .checked_add(&crate::ncpoly::TensorNcPoly::from_term(
            Word::empty(),
            Word::single(x),
            ParamPoly::one(&ctx),
        ))
        .unwrap();
        fp.set_coproduct(x, primitive);
        let engine = PairingEngine::new(&bundle.pairings[0], &bundle).unwrap();
        let rep = check_duality(&engine, 2);
        assert!(!rep.passed());
        let first = rep.first_failure().unwrap();
        assert_eq!(first.check, "product-coproduct");
    }
}
