//! Noncommutative polynomials over a finite ordered generator list.
//!
//! A [`Word`] is a finite product of generators, stored as the sequence of
//! their ranks in the presentation order `g_0 < g_1 < …`.  A word is *normal*
//! when its ranks are nondecreasing; [`normal_order`] rewrites arbitrary
//! elements onto the normal (PBW-style) basis using the presentation's
//! commutation relations `g_hi · g_lo = g_lo · g_hi + [g_hi, g_lo]`.  An
//! [`NcPoly`] maps normal-or-not words to [`ParamPoly`] coefficients; a
//! [`TensorNcPoly`] does the same for two-sided tensors, which is all the
//! coproduct machinery needs.
//!
//! Rewriting replaces the leftmost out-of-order adjacent pair and repeats on
//! a worklist; coefficients are truncated after every step so deformation
//! tails never accumulate.  A step budget guards against runaway relation
//! sets; the shipped validation accepts only relation shapes for which the
//! rewriting provably terminates.

use crate::presentation::AlgebraPresentation;
use crate::scalar::{ParamContext, ParamPoly, ScalarError};
use smallvec::SmallVec;
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::sync::Arc;
use thiserror::Error;

/// Default ceiling on rewrite steps for one `normal_order` call.
pub const DEFAULT_STEP_BUDGET: u64 = 1_000_000;

/// Errors from noncommutative-polynomial operations.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NcError {
    #[error(transparent)]
    Scalar(#[from] ScalarError),
    #[error("normal ordering exceeded the step budget of {budget} while reducing {word}")]
    StepBudgetExceeded { budget: u64, word: String },
    #[error("exponential argument term {term} has a coefficient of deformation degree 0")]
    NonNilpotentExponent { term: String },
    #[error("exponential argument is not truncatable: context has no truncated deformation parameter")]
    NoDeformationParameter,
}

/// Ordered list of generator names; the index of a name is its rank.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorSet {
    names: Vec<String>,
}

impl GeneratorSet {
    pub fn new(names: Vec<String>) -> Self {
        assert!(names.len() <= u8::MAX as usize, "too many generators");
        GeneratorSet { names }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, rank: u8) -> &str {
        &self.names[rank as usize]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn rank_of(&self, name: &str) -> Option<u8> {
        self.names.iter().position(|n| n == name).map(|i| i as u8)
    }

    /// All normal words of length ≤ `max_len` (nondecreasing rank
    /// sequences), in canonical shortlex order; starts with the empty word.
    pub fn normal_words_up_to(&self, max_len: usize) -> Vec<Word> {
        let mut out = vec![Word::empty()];
        let mut layer: Vec<Word> = vec![Word::empty()];
        for _ in 0..max_len {
            let mut next = Vec::new();
            for w in &layer {
                let lo = w.ranks().last().copied().unwrap_or(0);
                for r in lo..self.names.len() as u8 {
                    let mut v = w.clone();
                    v.0.push(r);
                    next.push(v);
                }
            }
            out.extend(next.iter().cloned());
            layer = next;
        }
        out.sort();
        out
    }
}

/// A product of generators as a rank sequence.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Word(SmallVec<[u8; 16]>);

impl Word {
    pub fn empty() -> Self {
        Word(SmallVec::new())
    }

    pub fn from_ranks(ranks: &[u8]) -> Self {
        Word(SmallVec::from_slice(ranks))
    }

    pub fn single(rank: u8) -> Self {
        Word(SmallVec::from_slice(&[rank]))
    }

    /// `rank^power` as a word.
    pub fn power(rank: u8, power: usize) -> Self {
        Word(std::iter::repeat(rank).take(power).collect())
    }

    pub fn ranks(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    /// True when ranks are nondecreasing.
    pub fn is_rank_sorted(&self) -> bool {
        self.0.windows(2).all(|w| w[0] <= w[1])
    }

    /// Exponent of each rank, for words that are rank-sorted.
    pub fn exponents(&self, n_generators: usize) -> Vec<u32> {
        let mut exps = vec![0u32; n_generators];
        for &r in &self.0 {
            exps[r as usize] += 1;
        }
        exps
    }

    /// Render with powers collapsed, e.g. `K*P^2`; empty word is `1`.
    pub fn to_display(&self, gens: &GeneratorSet) -> String {
        if self.0.is_empty() {
            return "1".to_string();
        }
        let mut parts: Vec<String> = Vec::new();
        let mut i = 0;
        while i < self.0.len() {
            let r = self.0[i];
            let mut run = 1;
            while i + run < self.0.len() && self.0[i + run] == r {
                run += 1;
            }
            if run == 1 {
                parts.push(gens.name(r).to_string());
            } else {
                parts.push(format!("{}^{}", gens.name(r), run));
            }
            i += run;
        }
        parts.join("*")
    }
}

impl Ord for Word {
    /// Shortlex: by length, then lexicographically on rank sequences.
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Noncommutative polynomial: finite sum of words with scalar coefficients.
///
/// Invariant: stored coefficients are nonzero.  Term order in the map is the
/// canonical output order (shortlex on words).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct NcPoly {
    terms: BTreeMap<Word, ParamPoly>,
}

impl NcPoly {
    pub fn zero() -> Self {
        NcPoly::default()
    }

    pub fn one(ctx: &Arc<ParamContext>) -> Self {
        NcPoly::from_word(Word::empty(), ParamPoly::one(ctx))
    }

    pub fn generator(ctx: &Arc<ParamContext>, rank: u8) -> Self {
        NcPoly::from_word(Word::single(rank), ParamPoly::one(ctx))
    }

    pub fn scalar(c: ParamPoly) -> Self {
        NcPoly::from_word(Word::empty(), c)
    }

    pub fn from_word(word: Word, coeff: ParamPoly) -> Self {
        let mut p = NcPoly::zero();
        p.add_term(word, coeff);
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &ParamPoly)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of `word`, if present.
    pub fn coefficient(&self, word: &Word) -> Option<&ParamPoly> {
        self.terms.get(word)
    }

    /// Coefficient of `word` as a value in `ctx` (zero when absent).
    pub fn coefficient_or_zero(&self, word: &Word, ctx: &Arc<ParamContext>) -> ParamPoly {
        self.terms
            .get(word)
            .cloned()
            .unwrap_or_else(|| ParamPoly::zero(ctx))
    }

    pub fn add_term(&mut self, word: Word, coeff: ParamPoly) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.entry(word) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e
                    .get()
                    .checked_add(&coeff)
                    .expect("coefficient contexts agree within one polynomial");
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, ScalarError> {
        let mut out = self.clone();
        for (w, c) in &other.terms {
            // route through checked_add for the context error surface
            match out.terms.get(w) {
                Some(existing) => {
                    let sum = existing.checked_add(c)?;
                    if sum.is_zero() {
                        out.terms.remove(w);
                    } else {
                        out.terms.insert(w.clone(), sum);
                    }
                }
                None => {
                    out.terms.insert(w.clone(), c.clone());
                }
            }
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self, ScalarError> {
        self.checked_add(&other.negated())
    }

    pub fn negated(&self) -> Self {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = c.negated();
        }
        out
    }

    pub fn scaled(&self, c: &ParamPoly) -> Result<Self, ScalarError> {
        let mut out = NcPoly::zero();
        for (w, v) in &self.terms {
            out.add_term(w.clone(), v.checked_mul(c)?);
        }
        Ok(out)
    }

    /// Apply `f` to every coefficient (dropping zero results).
    pub fn map_coefficients(
        &self,
        mut f: impl FnMut(&ParamPoly) -> Result<ParamPoly, ScalarError>,
    ) -> Result<Self, ScalarError> {
        let mut out = NcPoly::zero();
        for (w, c) in &self.terms {
            out.add_term(w.clone(), f(c)?);
        }
        Ok(out)
    }

    /// Free product: bilinear word concatenation, no rewriting.
    pub fn nc_mul(&self, other: &Self) -> Result<Self, ScalarError> {
        let mut out = NcPoly::zero();
        for (wa, ca) in &self.terms {
            for (wb, cb) in &other.terms {
                out.add_term(wa.concat(wb), ca.checked_mul(cb)?);
            }
        }
        Ok(out)
    }

    /// Canonical text: terms in shortlex word order, unit coefficients
    /// omitted, multi-term coefficients parenthesized, sign-aware joins.
    pub fn to_canonical_string(&self, gens: &GeneratorSet) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (idx, (word, coeff)) in self.terms.iter().enumerate() {
            let (body, negative) = render_term(word, coeff, gens);
            if idx == 0 {
                if negative {
                    out.push('-');
                }
                out.push_str(&body);
            } else {
                out.push_str(if negative { " - " } else { " + " });
                out.push_str(&body);
            }
        }
        out
    }
}

/// Render one `coeff * word` with the sign factored out when the whole
/// coefficient is a single negative-presentable term.
fn render_term(word: &Word, coeff: &ParamPoly, gens: &GeneratorSet) -> (String, bool) {
    let coeff_terms = coeff.terms().count();
    let single = coeff_terms == 1;
    let (display_coeff, negative) = if single {
        let neg = coeff.negated();
        let s = coeff.to_canonical_string();
        if s.starts_with('-') {
            (neg.to_canonical_string(), true)
        } else {
            (s, false)
        }
    } else {
        (coeff.to_canonical_string(), false)
    };
    if word.is_empty() {
        return (display_coeff, negative);
    }
    let word_str = word.to_display(gens);
    if single && display_coeff == "1" {
        (word_str, negative)
    } else if single {
        (format!("{display_coeff}*{word_str}"), negative)
    } else {
        (format!("({display_coeff})*{word_str}"), false)
    }
}

/// Rewrite onto the normal basis with the default step budget.
pub fn normal_order(p: &NcPoly, pres: &AlgebraPresentation) -> Result<NcPoly, NcError> {
    normal_order_with_budget(p, pres, pres.step_budget())
}

/// Rewrite onto the normal basis, replacing the leftmost adjacent
/// out-of-order pair that has a declared relation until none remain.
///
/// Words are processed in merged rounds: all pending words are rewritten
/// once per round and like words are combined before the next round, so the
/// work stays proportional to the number of distinct reachable words rather
/// than the number of rewrite paths (which grows combinatorially).
pub fn normal_order_with_budget(
    p: &NcPoly,
    pres: &AlgebraPresentation,
    budget: u64,
) -> Result<NcPoly, NcError> {
    let merge = |map: &mut BTreeMap<Word, ParamPoly>, w: Word, c: ParamPoly| -> Result<(), ScalarError> {
        match map.entry(w) {
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let v = e.get().checked_add(&c)?;
                if v.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = v;
                }
            }
            std::collections::btree_map::Entry::Vacant(e) => {
                if !c.is_zero() {
                    e.insert(c);
                }
            }
        }
        Ok(())
    };
    let mut out = NcPoly::zero();
    let mut pending: BTreeMap<Word, ParamPoly> = BTreeMap::new();
    for (w, c) in p.terms() {
        merge(&mut pending, w.clone(), c.clone()).map_err(NcError::Scalar)?;
    }
    let mut steps: u64 = 0;
    while !pending.is_empty() {
        let mut next: BTreeMap<Word, ParamPoly> = BTreeMap::new();
        for (word, coeff) in std::mem::take(&mut pending) {
            let ranks = word.ranks();
            let pos = ranks
                .windows(2)
                .position(|pair| pair[0] > pair[1] && pres.has_relation(pair[0], pair[1]));
            let Some(i) = pos else {
                out.add_term(word, coeff);
                continue;
            };
            steps += 1;
            if steps > budget {
                return Err(NcError::StepBudgetExceeded {
                    budget,
                    word: word.to_display(pres.generators()),
                });
            }
            let (hi, lo) = (ranks[i], ranks[i + 1]);
            let prefix = &ranks[..i];
            let suffix = &ranks[i + 2..];
            // swapped word A·lo·hi·B
            let mut swapped = SmallVec::<[u8; 16]>::from_slice(prefix);
            swapped.push(lo);
            swapped.push(hi);
            swapped.extend_from_slice(suffix);
            merge(&mut next, Word(swapped), coeff.clone()).map_err(NcError::Scalar)?;
            // commutator terms A·w·B, truncated as they are formed
            let rel = pres.relation(hi, lo).expect("has_relation checked");
            for (rw, rc) in rel.terms() {
                let mut spliced = SmallVec::<[u8; 16]>::from_slice(prefix);
                spliced.extend_from_slice(rw.ranks());
                spliced.extend_from_slice(suffix);
                let c = coeff.checked_mul(rc).map_err(NcError::Scalar)?;
                merge(&mut next, Word(spliced), c).map_err(NcError::Scalar)?;
            }
        }
        pending = next;
    }
    Ok(out)
}

/// Truncated exponential of a normal-ordered argument whose coefficients all
/// carry deformation degree ≥ 1; the series legitimately stops at the
/// truncation order.
pub fn exp_nc(arg: &NcPoly, pres: &AlgebraPresentation) -> Result<NcPoly, NcError> {
    let arg = normal_order(arg, pres)?;
    let ctx = pres.param_context();
    if arg.is_zero() {
        return Ok(NcPoly::one(ctx));
    }
    let order = match ctx.deform_order() {
        Some(n) => n,
        None => return Err(NcError::NoDeformationParameter),
    };
    for (w, c) in arg.terms() {
        if c.terms().any(|(exps, _)| exps[0] == 0) {
            return Err(NcError::NonNilpotentExponent {
                term: NcPoly::from_word(w.clone(), c.clone())
                    .to_canonical_string(pres.generators()),
            });
        }
    }
    let mut acc = NcPoly::one(ctx);
    let mut power = NcPoly::one(ctx);
    for k in 1..=order {
        power = normal_order(&power.nc_mul(&arg)?, pres)?;
        if power.is_zero() {
            break;
        }
        let inv_kfact = crate::scalar::factorial(k).recip();
        acc = acc.checked_add(&power.map_coefficients(|c| Ok(c.scaled_rat(&inv_kfact)))?)?;
    }
    Ok(acc)
}

/// `exp(c · g)` for a single generator.
pub fn exp_generator(
    coeff: &ParamPoly,
    rank: u8,
    pres: &AlgebraPresentation,
) -> Result<NcPoly, NcError> {
    exp_nc(&NcPoly::from_word(Word::single(rank), coeff.clone()), pres)
}

/// Two-legged tensor of noncommutative polynomials.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TensorNcPoly {
    terms: BTreeMap<(Word, Word), ParamPoly>,
}

impl TensorNcPoly {
    pub fn zero() -> Self {
        TensorNcPoly::default()
    }

    /// `1 ⊗ 1` with unit coefficient.
    pub fn unit(ctx: &Arc<ParamContext>) -> Self {
        TensorNcPoly::from_term(Word::empty(), Word::empty(), ParamPoly::one(ctx))
    }

    pub fn from_term(left: Word, right: Word, coeff: ParamPoly) -> Self {
        let mut t = TensorNcPoly::zero();
        t.add_term(left, right, coeff);
        t
    }

    /// Outer product `p ⊗ q`.
    pub fn tensor(p: &NcPoly, q: &NcPoly) -> Result<Self, ScalarError> {
        let mut t = TensorNcPoly::zero();
        for (wl, cl) in p.terms() {
            for (wr, cr) in q.terms() {
                t.add_term(wl.clone(), wr.clone(), cl.checked_mul(cr)?);
            }
        }
        Ok(t)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(Word, Word), &ParamPoly)> {
        self.terms.iter()
    }

    pub fn add_term(&mut self, left: Word, right: Word, coeff: ParamPoly) {
        if coeff.is_zero() {
            return;
        }
        let key = (left, right);
        match self.terms.entry(key) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e
                    .get()
                    .checked_add(&coeff)
                    .expect("coefficient contexts agree within one tensor");
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, ScalarError> {
        let mut out = self.clone();
        for ((l, r), c) in &other.terms {
            match out.terms.get(&(l.clone(), r.clone())) {
                Some(existing) => {
                    let sum = existing.checked_add(c)?;
                    if sum.is_zero() {
                        out.terms.remove(&(l.clone(), r.clone()));
                    } else {
                        out.terms.insert((l.clone(), r.clone()), sum);
                    }
                }
                None => {
                    out.terms.insert((l.clone(), r.clone()), c.clone());
                }
            }
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self, ScalarError> {
        self.checked_add(&other.negated())
    }

    pub fn negated(&self) -> Self {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = c.negated();
        }
        out
    }

    pub fn scaled(&self, c: &ParamPoly) -> Result<Self, ScalarError> {
        let mut out = TensorNcPoly::zero();
        for ((l, r), v) in &self.terms {
            out.add_term(l.clone(), r.clone(), v.checked_mul(c)?);
        }
        Ok(out)
    }

    /// Componentwise product `(a⊗b)(c⊗d) = ac ⊗ bd`, no rewriting.
    pub fn tensor_mul(&self, other: &Self) -> Result<Self, ScalarError> {
        let mut out = TensorNcPoly::zero();
        for ((la, ra), ca) in &self.terms {
            for ((lb, rb), cb) in &other.terms {
                out.add_term(la.concat(lb), ra.concat(rb), ca.checked_mul(cb)?);
            }
        }
        Ok(out)
    }

    /// Normal-order both legs (splitting terms as legs expand).
    pub fn normalize_legs(&self, pres: &AlgebraPresentation) -> Result<Self, NcError> {
        let mut out = TensorNcPoly::zero();
        for ((l, r), c) in &self.terms {
            let ln = normal_order(&NcPoly::from_word(l.clone(), c.clone()), pres)?;
            for (lw, lc) in ln.terms() {
                let rn = normal_order(&NcPoly::from_word(r.clone(), lc.clone()), pres)?;
                for (rw, rc) in rn.terms() {
                    out.add_term(lw.clone(), rw.clone(), rc.clone());
                }
            }
        }
        Ok(out)
    }

    /// Collapse `a ⊗ b ↦ a·b` (free product; caller normal-orders).
    pub fn multiply_out(&self) -> NcPoly {
        let mut out = NcPoly::zero();
        for ((l, r), c) in &self.terms {
            out.add_term(l.concat(r), c.clone());
        }
        out
    }

    /// Canonical text with ` (x) ` separating the legs.
    pub fn to_canonical_string(&self, gens: &GeneratorSet) -> String {
        self.to_canonical_string_pair(gens, gens)
    }

    /// Canonical text for tensors whose legs are indexed over different
    /// generator sets (e.g. kernel ⊗ actor words of a sector split).
    pub fn to_canonical_string_pair(
        &self,
        left_gens: &GeneratorSet,
        right_gens: &GeneratorSet,
    ) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (idx, ((l, r), coeff)) in self.terms.iter().enumerate() {
            let (body, negative) = render_term(l, coeff, left_gens);
            let pair = format!("{body} (x) {}", r.to_display(right_gens));
            if idx == 0 {
                if negative {
                    out.push('-');
                }
                out.push_str(&pair);
            } else {
                out.push_str(if negative { " - " } else { " + " });
                out.push_str(&pair);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presentation::AlgebraPresentation;
    use crate::scalar::{GaussianRational, ParamContext};

    fn free_ctx() -> Arc<ParamContext> {
        ParamContext::with_deformation("omega", 4, &["a", "b"])
    }

    /// Weyl-style toy presentation: A < B with [B, A] = 1.
    fn weyl() -> AlgebraPresentation {
        let ctx = free_ctx();
        let gens = GeneratorSet::new(vec!["A".into(), "B".into()]);
        let mut pres = AlgebraPresentation::new("weyl", &ctx, gens);
        pres.set_relation(1, 0, NcPoly::one(&ctx));
        pres
    }

    /// Fragment of a deformed boost/translation presentation:
    /// K < P < H with [P, K] = omega P^2, [H, K] = -P, [H, P] = 0.
    fn deformed() -> AlgebraPresentation {
        let ctx = free_ctx();
        let gens = GeneratorSet::new(vec!["K".into(), "P".into(), "H".into()]);
        let mut pres = AlgebraPresentation::new("deformed", &ctx, gens);
        let omega = ParamPoly::param(&ctx, "omega").unwrap();
        pres.set_relation(
            1,
            0,
            NcPoly::from_word(Word::from_ranks(&[1, 1]), omega.clone()),
        );
        pres.set_relation(
            2,
            0,
            NcPoly::from_word(Word::single(1), ParamPoly::one(&ctx)).negated(),
        );
        pres.set_relation(2, 1, NcPoly::zero());
        pres
    }

    #[test]
    fn word_order_is_shortlex() {
        let mut words = vec![
            Word::from_ranks(&[1, 0]),
            Word::empty(),
            Word::from_ranks(&[0, 1]),
            Word::single(2),
            Word::from_ranks(&[0, 0, 1]),
        ];
        words.sort();
        let ranks: Vec<&[u8]> = words.iter().map(|w| w.ranks()).collect();
        assert_eq!(
            ranks,
            vec![
                &[][..],
                &[2][..],
                &[0, 1][..],
                &[1, 0][..],
                &[0, 0, 1][..]
            ]
        );
    }

    #[test]
    fn canonical_display() {
        let pres = deformed();
        let ctx = pres.param_context();
        let omega = ParamPoly::param(ctx, "omega").unwrap();
        let mut p = NcPoly::from_word(Word::from_ranks(&[0, 1]), ParamPoly::one(ctx));
        p.add_term(Word::from_ranks(&[1, 1]), omega);
        assert_eq!(p.to_canonical_string(pres.generators()), "K*P + omega*P^2");
        let gens = pres.generators();
        let neg = NcPoly::from_word(Word::single(1), ParamPoly::one(ctx)).negated();
        assert_eq!(neg.to_canonical_string(gens), "-P");
        let mixed = NcPoly::from_word(
            Word::single(0),
            ParamPoly::one(ctx)
                .checked_sub(&ParamPoly::param(ctx, "omega").unwrap())
                .unwrap(),
        );
        assert_eq!(mixed.to_canonical_string(gens), "(1 - omega)*K");
        assert_eq!(NcPoly::zero().to_canonical_string(gens), "0");
    }

    #[test]
    fn weyl_normal_ordering() {
        let pres = weyl();
        let ctx = pres.param_context();
        // B A^2 = A^2 B + 2A
        let p = NcPoly::from_word(Word::from_ranks(&[1, 0, 0]), ParamPoly::one(ctx));
        let n = normal_order(&p, &pres).unwrap();
        assert_eq!(n.to_canonical_string(pres.generators()), "2*A + A^2*B");
    }

    #[test]
    fn deformed_commutators_normalize_to_frozen_forms() {
        let pres = deformed();
        let ctx = pres.param_context();
        let pk = NcPoly::from_word(Word::from_ranks(&[1, 0]), ParamPoly::one(ctx));
        assert_eq!(
            normal_order(&pk, &pres)
                .unwrap()
                .to_canonical_string(pres.generators()),
            "K*P + omega*P^2"
        );
        let hk = NcPoly::from_word(Word::from_ranks(&[2, 0]), ParamPoly::one(ctx));
        assert_eq!(
            normal_order(&hk, &pres)
                .unwrap()
                .to_canonical_string(pres.generators()),
            "-P + K*H"
        );
        let hp = NcPoly::from_word(Word::from_ranks(&[2, 1]), ParamPoly::one(ctx));
        assert_eq!(
            normal_order(&hp, &pres)
                .unwrap()
                .to_canonical_string(pres.generators()),
            "P*H"
        );
    }

    #[test]
    fn normal_order_is_idempotent_on_results() {
        let pres = deformed();
        let ctx = pres.param_context();
        let p = NcPoly::from_word(Word::from_ranks(&[2, 2, 0, 0]), ParamPoly::one(ctx));
        let once = normal_order(&p, &pres).unwrap();
        let twice = normal_order(&once, &pres).unwrap();
        assert_eq!(once, twice);
        assert!(once.terms().all(|(w, _)| w.is_rank_sorted()));
    }

    #[test]
    fn undeclared_pairs_do_not_rewrite() {
        let ctx = free_ctx();
        let gens = GeneratorSet::new(vec!["A".into(), "B".into()]);
        let pres = AlgebraPresentation::new("free", &ctx, gens);
        let p = NcPoly::from_word(Word::from_ranks(&[1, 0]), ParamPoly::one(&ctx));
        let n = normal_order(&p, &pres).unwrap();
        assert_eq!(n, p);
    }

    #[test]
    fn step_budget_is_enforced() {
        let pres = weyl();
        let ctx = pres.param_context();
        let p = NcPoly::from_word(Word::from_ranks(&[1, 1, 0, 0]), ParamPoly::one(ctx));
        let err = normal_order_with_budget(&p, &pres, 2).unwrap_err();
        assert!(matches!(err, NcError::StepBudgetExceeded { budget: 2, .. }));
    }

    #[test]
    fn exp_of_primitive_generator_matches_scalar_series() {
        let pres = deformed();
        let ctx = pres.param_context();
        let omega = ParamPoly::param(ctx, "omega").unwrap();
        let arg = NcPoly::from_word(Word::single(2), omega.scaled(&GaussianRational::from_int(-2)));
        let e = exp_nc(&arg, &pres).unwrap();
        // coefficients of H^k are (-2 omega)^k / k!
        for k in 0..=4usize {
            let w = Word::power(2, k);
            let c = e.coefficient_or_zero(&w, ctx);
            let expected = ParamPoly::monomial(
                ctx,
                GaussianRational::from_int(-2).pow(k as u32),
                smallvec::smallvec![k as u32, 0, 0],
            )
            .scaled_rat(&crate::scalar::factorial(k as u32).recip());
            assert_eq!(c, expected, "coefficient of H^{k}");
        }
    }

    #[test]
    fn exp_rejects_unguarded_arguments() {
        let pres = deformed();
        let ctx = pres.param_context();
        let arg = NcPoly::generator(ctx, 2); // coefficient 1, deformation degree 0
        assert!(matches!(
            exp_nc(&arg, &pres),
            Err(NcError::NonNilpotentExponent { .. })
        ));
    }

    #[test]
    fn tensor_mul_concatenates_componentwise() {
        let pres = deformed();
        let ctx = pres.param_context();
        let t1 = TensorNcPoly::from_term(Word::single(0), Word::empty(), ParamPoly::one(ctx));
        let t2 = TensorNcPoly::from_term(Word::single(1), Word::single(2), ParamPoly::one(ctx));
        let prod = t1.tensor_mul(&t2).unwrap();
        assert_eq!(
            prod.to_canonical_string(pres.generators()),
            "K*P (x) H"
        );
    }

    #[test]
    fn tensor_normalize_legs_rewrites_each_side() {
        let pres = deformed();
        let ctx = pres.param_context();
        let t = TensorNcPoly::from_term(
            Word::from_ranks(&[1, 0]),
            Word::from_ranks(&[2, 0]),
            ParamPoly::one(ctx),
        );
        let n = t.normalize_legs(&pres).unwrap();
        assert_eq!(
            n.to_canonical_string(pres.generators()),
            "-K*P (x) P + K*P (x) K*H - omega*P^2 (x) P + omega*P^2 (x) K*H"
        );
    }

    #[test]
    fn normal_words_enumeration() {
        let gens = GeneratorSet::new(vec!["K".into(), "P".into()]);
        let words = gens.normal_words_up_to(2);
        let shown: Vec<Vec<u8>> = words.iter().map(|w| w.ranks().to_vec()).collect();
        assert_eq!(
            shown,
            vec![
                vec![],
                vec![0],
                vec![1],
                vec![0, 0],
                vec![0, 1],
                vec![1, 1]
            ]
        );
    }
}
