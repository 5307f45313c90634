//! Exact scalar arithmetic for deformed-algebra coefficients.
//!
//! Scalars are polynomials over the Gaussian rationals `ℚ(i)` in a small
//! parameter alphabet, e.g. `{omega, a, b}`.  One parameter may be marked as
//! the *deformation* parameter with a truncation order `N`: every operation
//! discards terms whose deformation exponent exceeds `N`, so values are exact
//! representatives modulo `deform^(N+1)`.  The remaining parameters are never
//! truncated.  Scalars are always polynomials — there is no rational-function
//! arithmetic here; division is only defined where it is exact.

use num::{BigInt, BigRational, One, Signed, Zero};
use smallvec::SmallVec;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

/// Exponent vector parallel to a context's parameter list.
pub type Exponents = SmallVec<[u32; 4]>;

/// Errors from scalar-domain operations.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScalarError {
    #[error("parameter contexts differ: [{left}] vs [{right}]")]
    ContextMismatch { left: String, right: String },
    #[error("unknown parameter `{0}`")]
    UnknownParameter(String),
    #[error("exponential argument has a term of deformation degree 0: {term}")]
    NonNilpotentExponent { term: String },
    #[error("exponential argument is not truncatable: context has no truncated deformation parameter")]
    NoDeformationParameter,
    #[error("term {term} is not divisible by {param}^{power}")]
    NotDivisible {
        term: String,
        param: String,
        power: u32,
    },
    #[error("division by zero scalar")]
    DivisionByZero,
    #[error("truncation order overflow")]
    TruncationOverflow,
}

/// A Gaussian rational `re + im*i` with exact rational parts.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GaussianRational {
    re: BigRational,
    im: BigRational,
}

impl GaussianRational {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        GaussianRational { re, im }
    }

    pub fn zero() -> Self {
        GaussianRational::new(BigRational::zero(), BigRational::zero())
    }

    pub fn one() -> Self {
        GaussianRational::new(BigRational::one(), BigRational::zero())
    }

    /// The imaginary unit `i`.
    pub fn i() -> Self {
        GaussianRational::new(BigRational::zero(), BigRational::one())
    }

    pub fn from_int(n: i64) -> Self {
        GaussianRational::new(BigRational::from_integer(BigInt::from(n)), BigRational::zero())
    }

    /// Exact rational `p/q`.  Panics if `q == 0`.
    pub fn ratio(p: i64, q: i64) -> Self {
        GaussianRational::new(
            BigRational::new(BigInt::from(p), BigInt::from(q)),
            BigRational::zero(),
        )
    }

    pub fn re(&self) -> &BigRational {
        &self.re
    }

    pub fn im(&self) -> &BigRational {
        &self.im
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.re.is_one() && self.im.is_zero()
    }

    pub fn conjugate(&self) -> Self {
        GaussianRational::new(self.re.clone(), -self.im.clone())
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inverse(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let norm = &self.re * &self.re + &self.im * &self.im;
        Some(GaussianRational::new(&self.re / &norm, -(&self.im / &norm)))
    }

    pub fn add(&self, other: &Self) -> Self {
        GaussianRational::new(&self.re + &other.re, &self.im + &other.im)
    }

    pub fn sub(&self, other: &Self) -> Self {
        GaussianRational::new(&self.re - &other.re, &self.im - &other.im)
    }

    pub fn mul(&self, other: &Self) -> Self {
        GaussianRational::new(
            &self.re * &other.re - &self.im * &other.im,
            &self.re * &other.im + &self.im * &other.re,
        )
    }

    pub fn neg(&self) -> Self {
        GaussianRational::new(-self.re.clone(), -self.im.clone())
    }

    pub fn div(&self, other: &Self) -> Result<Self, ScalarError> {
        let inv = other.inverse().ok_or(ScalarError::DivisionByZero)?;
        Ok(self.mul(&inv))
    }

    /// Integer power by repeated multiplication.
    pub fn pow(&self, e: u32) -> Self {
        let mut acc = GaussianRational::one();
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// True when the value prints with a leading minus that can be absorbed
    /// into a ` - ` join: negative real, or negative pure-imaginary.
    fn is_sign_negative(&self) -> bool {
        (self.im.is_zero() && self.re.is_negative())
            || (self.re.is_zero() && self.im.is_negative())
    }
}

impl fmt::Display for GaussianRational {
    /// Canonical form: real values as `p` or `p/q`; anything with an
    /// imaginary part as `(re+im*i)`, e.g. `(0+1*i)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            write!(f, "{}", self.re)
        } else if self.im.is_negative() {
            write!(f, "({}-{}*i)", self.re, -self.im.clone())
        } else {
            write!(f, "({}+{}*i)", self.re, self.im)
        }
    }
}

/// `n!` as an exact rational.
pub fn factorial(n: u32) -> BigRational {
    let mut acc = BigInt::one();
    for k in 2..=n.max(1) {
        acc *= BigInt::from(k);
    }
    BigRational::from_integer(acc)
}

/// One named parameter and its (optional) truncation order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamDef {
    pub name: String,
    pub truncate: Option<u32>,
}

/// Shared parameter alphabet plus truncation policy.
///
/// At most one parameter may carry a truncation order (the deformation
/// parameter), and it must be listed first so that the exponent-vector
/// ordering sorts by deformation degree before anything else.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamContext {
    params: Vec<ParamDef>,
}

impl ParamContext {
    pub fn new(params: Vec<ParamDef>) -> Result<Arc<Self>, ScalarError> {
        let truncated: Vec<usize> = params
            .iter()
            .enumerate()
            .filter(|(_, p)| p.truncate.is_some())
            .map(|(i, _)| i)
            .collect();
        if truncated.len() > 1 || truncated.first().is_some_and(|&i| i != 0) {
            // Exactly one policy shape is supported: the truncated parameter
            // leads the alphabet.  The bundle loader arranges this.
            return Err(ScalarError::ContextMismatch {
                left: params.iter().map(|p| p.name.clone()).collect::<Vec<_>>().join(","),
                right: "single leading truncated parameter".into(),
            });
        }
        Ok(Arc::new(ParamContext { params }))
    }

    /// Context with a leading truncated deformation parameter and untruncated rest.
    pub fn with_deformation(deform: &str, order: u32, rest: &[&str]) -> Arc<Self> {
        let mut params = vec![ParamDef {
            name: deform.to_string(),
            truncate: Some(order),
        }];
        params.extend(rest.iter().map(|&name| ParamDef {
            name: name.to_string(),
            truncate: None,
        }));
        ParamContext::new(params).expect("deformation-led context is always valid")
    }

    pub fn arity(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[ParamDef] {
        &self.params
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.params.iter().position(|p| p.name == name)
    }

    pub fn name_of(&self, idx: usize) -> &str {
        &self.params[idx].name
    }

    /// Index of the truncated deformation parameter, if any.
    pub fn deform_index(&self) -> Option<usize> {
        self.params.first().and_then(|p| p.truncate.map(|_| 0))
    }

    pub fn deform_order(&self) -> Option<u32> {
        self.params.first().and_then(|p| p.truncate)
    }

    /// Same alphabet with the deformation truncation raised by `extra`.
    /// Used internally to keep exact divisions by the deformation parameter.
    pub fn elevated(self: &Arc<Self>, extra: u32) -> Result<Arc<Self>, ScalarError> {
        match self.deform_order() {
            None => Ok(self.clone()),
            Some(n) => {
                let mut params = self.params.clone();
                params[0].truncate =
                    Some(n.checked_add(extra).ok_or(ScalarError::TruncationOverflow)?);
                ParamContext::new(params)
            }
        }
    }

    fn describe(&self) -> String {
        self.params
            .iter()
            .map(|p| match p.truncate {
                Some(n) => format!("{}^≤{}", p.name, n),
                None => p.name.clone(),
            })
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// Multivariate parameter polynomial with Gaussian-rational coefficients.
///
/// Invariants: no stored zero coefficients; no term whose deformation
/// exponent exceeds the context's truncation order; exponent vectors have
/// the context's arity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamPoly {
    ctx: Arc<ParamContext>,
    terms: BTreeMap<Exponents, GaussianRational>,
}

impl ParamPoly {
    pub fn zero(ctx: &Arc<ParamContext>) -> Self {
        ParamPoly {
            ctx: ctx.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn one(ctx: &Arc<ParamContext>) -> Self {
        ParamPoly::constant(ctx, GaussianRational::one())
    }

    pub fn constant(ctx: &Arc<ParamContext>, c: GaussianRational) -> Self {
        let mut p = ParamPoly::zero(ctx);
        if !c.is_zero() {
            p.terms.insert(Exponents::from_elem(0, ctx.arity()), c);
        }
        p
    }

    pub fn param(ctx: &Arc<ParamContext>, name: &str) -> Result<Self, ScalarError> {
        let idx = ctx
            .index_of(name)
            .ok_or_else(|| ScalarError::UnknownParameter(name.to_string()))?;
        let mut exps = Exponents::from_elem(0, ctx.arity());
        exps[idx] = 1;
        Ok(ParamPoly::monomial(ctx, GaussianRational::one(), exps))
    }

    /// Single term `c * params^exps`, already truncation-normalized.
    pub fn monomial(ctx: &Arc<ParamContext>, c: GaussianRational, exps: Exponents) -> Self {
        assert_eq!(exps.len(), ctx.arity(), "exponent arity mismatch");
        let mut p = ParamPoly::zero(ctx);
        p.add_term(exps, c);
        p
    }

    pub fn context(&self) -> &Arc<ParamContext> {
        &self.ctx
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// `Some(c)` when the polynomial is the constant `c` (including zero).
    pub fn as_constant(&self) -> Option<GaussianRational> {
        if self.terms.is_empty() {
            return Some(GaussianRational::zero());
        }
        if self.terms.len() == 1 {
            let (exps, c) = self.terms.iter().next().unwrap();
            if exps.iter().all(|&e| e == 0) {
                return Some(c.clone());
            }
        }
        None
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &GaussianRational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, exps: &[u32]) -> GaussianRational {
        self.terms
            .get(exps)
            .cloned()
            .unwrap_or_else(GaussianRational::zero)
    }

    /// Insert `c` at `exps`, combining and applying the truncation policy.
    fn add_term(&mut self, exps: Exponents, c: GaussianRational) {
        if c.is_zero() {
            return;
        }
        if let Some(n) = self.ctx.deform_order() {
            if exps[0] > n {
                return; // beyond truncation order
            }
        }
        let entry = self
            .terms
            .entry(exps)
            .or_insert_with(GaussianRational::zero);
        *entry = entry.add(&c);
        if entry.is_zero() {
            // re-borrow to remove; key lookup by value clone is avoided by
            // retaining only nonzero entries afterwards
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    fn require_same_context(&self, other: &Self) -> Result<(), ScalarError> {
        if Arc::ptr_eq(&self.ctx, &other.ctx) || self.ctx == other.ctx {
            Ok(())
        } else {
            Err(ScalarError::ContextMismatch {
                left: self.ctx.describe(),
                right: other.ctx.describe(),
            })
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, ScalarError> {
        self.require_same_context(other)?;
        let mut out = self.clone();
        for (exps, c) in &other.terms {
            out.add_term(exps.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self, ScalarError> {
        self.require_same_context(other)?;
        let mut out = self.clone();
        for (exps, c) in &other.terms {
            out.add_term(exps.clone(), c.neg());
        }
        Ok(out)
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self, ScalarError> {
        self.require_same_context(other)?;
        let mut out = ParamPoly::zero(&self.ctx);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let exps: Exponents = ea.iter().zip(eb.iter()).map(|(x, y)| x + y).collect();
                out.add_term(exps, ca.mul(cb));
            }
        }
        Ok(out)
    }

    pub fn negated(&self) -> Self {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = c.neg();
        }
        out
    }

    pub fn scaled(&self, c: &GaussianRational) -> Self {
        let mut out = ParamPoly::zero(&self.ctx);
        for (exps, v) in &self.terms {
            out.add_term(exps.clone(), v.mul(c));
        }
        out
    }

    pub fn scaled_rat(&self, r: &BigRational) -> Self {
        self.scaled(&GaussianRational::new(r.clone(), BigRational::zero()))
    }

    /// Exact division by a nonzero Gaussian rational.
    pub fn div_scalar(&self, c: &GaussianRational) -> Result<Self, ScalarError> {
        let inv = c.inverse().ok_or(ScalarError::DivisionByZero)?;
        Ok(self.scaled(&inv))
    }

    /// Replace `param` by the scalar `value` (context unchanged).
    pub fn substitute(&self, param: &str, value: &GaussianRational) -> Result<Self, ScalarError> {
        let idx = self
            .ctx
            .index_of(param)
            .ok_or_else(|| ScalarError::UnknownParameter(param.to_string()))?;
        let mut out = ParamPoly::zero(&self.ctx);
        for (exps, c) in &self.terms {
            let mut e = exps.clone();
            let power = e[idx];
            e[idx] = 0;
            out.add_term(e, c.mul(&value.pow(power)));
        }
        Ok(out)
    }

    /// Exact division by `param^power`; fails if any term lacks the factor.
    pub fn div_param(&self, param: &str, power: u32) -> Result<Self, ScalarError> {
        let idx = self
            .ctx
            .index_of(param)
            .ok_or_else(|| ScalarError::UnknownParameter(param.to_string()))?;
        let mut out = ParamPoly::zero(&self.ctx);
        for (exps, c) in &self.terms {
            if exps[idx] < power {
                return Err(ScalarError::NotDivisible {
                    term: self.term_string(exps, c),
                    param: param.to_string(),
                    power,
                });
            }
            let mut e = exps.clone();
            e[idx] -= power;
            out.add_term(e, c.clone());
        }
        Ok(out)
    }

    /// Truncated exponential `Σ_{k≤N} self^k / k!`.
    ///
    /// Exact modulo `deform^(N+1)` because every term of the argument must
    /// carry deformation degree ≥ 1, so the series terminates at the
    /// truncation order.  `exp(0) = 1` works in any context.
    pub fn exp_truncated(&self) -> Result<Self, ScalarError> {
        if self.is_zero() {
            return Ok(ParamPoly::one(&self.ctx));
        }
        let n = match self.ctx.deform_order() {
            Some(n) => n,
            None => return Err(ScalarError::NoDeformationParameter),
        };
        for (exps, c) in &self.terms {
            if exps[0] == 0 {
                return Err(ScalarError::NonNilpotentExponent {
                    term: self.term_string(exps, c),
                });
            }
        }
        let mut acc = ParamPoly::one(&self.ctx);
        let mut power = ParamPoly::one(&self.ctx);
        for k in 1..=n {
            power = power.checked_mul(self)?;
            if power.is_zero() {
                break;
            }
            acc = acc.checked_add(&power.scaled_rat(&factorial(k).recip()))?;
        }
        Ok(acc)
    }

    /// Re-normalize into a context with the same alphabet but a different
    /// truncation order (dropping now-excess terms when lowering).
    pub fn retruncate(&self, ctx: &Arc<ParamContext>) -> Result<Self, ScalarError> {
        let same_names = self.ctx.arity() == ctx.arity()
            && self
                .ctx
                .params()
                .iter()
                .zip(ctx.params())
                .all(|(a, b)| a.name == b.name);
        if !same_names {
            return Err(ScalarError::ContextMismatch {
                left: self.ctx.describe(),
                right: ctx.describe(),
            });
        }
        let mut out = ParamPoly::zero(ctx);
        for (exps, c) in &self.terms {
            out.add_term(exps.clone(), c.clone());
        }
        Ok(out)
    }

    /// Terms whose exponent of `param` equals `order`, with that exponent
    /// struck out — the coefficient of `param^order` as a polynomial in the
    /// remaining parameters.
    pub fn coefficient_slice(&self, param: &str, order: u32) -> Result<Self, ScalarError> {
        let idx = self
            .ctx
            .index_of(param)
            .ok_or_else(|| ScalarError::UnknownParameter(param.to_string()))?;
        let mut out = ParamPoly::zero(&self.ctx);
        for (exps, c) in &self.terms {
            if exps[idx] == order {
                let mut e = exps.clone();
                e[idx] = 0;
                out.add_term(e, c.clone());
            }
        }
        Ok(out)
    }

    /// Exact multivariate division: `Some(q)` with `self = q * other` when
    /// `other` divides `self`, `None` otherwise.  Long division on the
    /// lexicographic leading term; every quotient coefficient is produced by
    /// an exact Gaussian-rational division, so the result carries no rounding.
    /// Callers must keep the inputs free of the truncated parameter — a
    /// truncated product is no longer a faithful multiple.
    pub fn div_exact(&self, other: &Self) -> Result<Option<Self>, ScalarError> {
        self.require_same_context(other)?;
        let (lead_exps, lead_coeff) = match other.terms.last_key_value() {
            Some((e, c)) => (e.clone(), c.clone()),
            None => return Err(ScalarError::DivisionByZero),
        };
        let lead_inv = lead_coeff.inverse().expect("stored coefficients are nonzero");
        let mut rem = self.clone();
        let mut quo = ParamPoly::zero(&self.ctx);
        while let Some((rexps, rcoeff)) = rem.terms.last_key_value() {
            let rexps = rexps.clone();
            let rcoeff = rcoeff.clone();
            if !rexps.iter().zip(&lead_exps).all(|(r, l)| r >= l) {
                return Ok(None);
            }
            let qexps: Exponents = rexps.iter().zip(&lead_exps).map(|(r, l)| r - l).collect();
            let qcoeff = rcoeff.mul(&lead_inv);
            // Leading terms cancel exactly, so the remainder strictly shrinks
            // in the lexicographic well-order.
            for (oexps, ocoeff) in &other.terms {
                let mut e = qexps.clone();
                for (ei, oi) in e.iter_mut().zip(oexps) {
                    *ei += oi;
                }
                rem.add_term(e, qcoeff.mul(ocoeff).neg());
            }
            quo.add_term(qexps, qcoeff);
        }
        Ok(Some(quo))
    }

    /// Render one term in canonical form (used for display and error text).
    fn term_string(&self, exps: &Exponents, c: &GaussianRational) -> String {
        let mut factors = Vec::new();
        // untruncated parameters first, deformation parameter last
        let order: Vec<usize> = (0..self.ctx.arity())
            .filter(|&i| Some(i) != self.ctx.deform_index())
            .chain(self.ctx.deform_index())
            .collect();
        for i in order {
            match exps[i] {
                0 => {}
                1 => factors.push(self.ctx.name_of(i).to_string()),
                e => factors.push(format!("{}^{}", self.ctx.name_of(i), e)),
            }
        }
        if factors.is_empty() {
            format!("{c}")
        } else if c.is_one() {
            factors.join("*")
        } else {
            format!("{c}*{}", factors.join("*"))
        }
    }

    /// Canonical text form: terms ascending by exponent vector, joined
    /// sign-aware, e.g. `(0+1*i)*a + 2*a^2*rho`.
    pub fn to_canonical_string(&self) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (idx, (exps, c)) in self.terms.iter().enumerate() {
            if idx == 0 {
                if c.is_sign_negative() {
                    out.push('-');
                    out.push_str(&self.term_string(exps, &c.neg()));
                } else {
                    out.push_str(&self.term_string(exps, c));
                }
            } else if c.is_sign_negative() {
                out.push_str(" - ");
                out.push_str(&self.term_string(exps, &c.neg()));
            } else {
                out.push_str(" + ");
                out.push_str(&self.term_string(exps, c));
            }
        }
        out
    }
}

impl fmt::Display for ParamPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_canonical_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> Arc<ParamContext> {
        ParamContext::with_deformation("rho", 4, &["a", "b"])
    }

    fn ia(ctx: &Arc<ParamContext>) -> ParamPoly {
        ParamPoly::param(ctx, "a")
            .unwrap()
            .scaled(&GaussianRational::i())
    }

    #[test]
    fn gaussian_field_ops() {
        let z = GaussianRational::new(
            BigRational::new(BigInt::from(1), BigInt::from(2)),
            BigRational::from_integer(BigInt::from(-3)),
        );
        let w = GaussianRational::from_int(2).add(&GaussianRational::i());
        let prod = z.mul(&w);
        // (1/2 - 3i)(2 + i) = 1 + i/2 - 6i + 3 = 4 - 11i/2
        assert_eq!(prod.re(), &BigRational::from_integer(BigInt::from(4)));
        assert_eq!(prod.im(), &BigRational::new(BigInt::from(-11), BigInt::from(2)));
        let back = prod.div(&w).unwrap();
        assert_eq!(back, z);
        assert!(GaussianRational::zero().inverse().is_none());
    }

    #[test]
    fn gaussian_display_forms() {
        assert_eq!(GaussianRational::from_int(2).to_string(), "2");
        assert_eq!(GaussianRational::ratio(-3, 4).to_string(), "-3/4");
        assert_eq!(GaussianRational::i().to_string(), "(0+1*i)");
        let z = GaussianRational::new(
            BigRational::new(BigInt::from(1), BigInt::from(2)),
            BigRational::from_integer(BigInt::from(-3)),
        );
        assert_eq!(z.to_string(), "(1/2-3*i)");
    }

    #[test]
    fn canonical_string_matches_frozen_form() {
        let ctx = ctx();
        let rho = ParamPoly::param(&ctx, "rho").unwrap();
        let a = ParamPoly::param(&ctx, "a").unwrap();
        // i*a + 2*a^2*rho
        let p = ia(&ctx)
            .checked_add(
                &a.checked_mul(&a)
                    .unwrap()
                    .checked_mul(&rho)
                    .unwrap()
                    .scaled(&GaussianRational::from_int(2)),
            )
            .unwrap();
        assert_eq!(p.to_canonical_string(), "(0+1*i)*a + 2*a^2*rho");
    }

    #[test]
    fn sign_aware_joining() {
        let ctx = ctx();
        let a = ParamPoly::param(&ctx, "a").unwrap();
        let p = ParamPoly::one(&ctx).checked_sub(&a).unwrap();
        assert_eq!(p.to_canonical_string(), "1 - a");
        let q = a.negated();
        assert_eq!(q.to_canonical_string(), "-a");
        let r = ia(&ctx).negated();
        assert_eq!(r.to_canonical_string(), "-(0+1*i)*a");
    }

    /// Naive dense multiplication oracle over raw term lists.
    fn mul_oracle(
        ctx: &Arc<ParamContext>,
        p: &ParamPoly,
        q: &ParamPoly,
    ) -> Vec<(Vec<u32>, GaussianRational)> {
        let n = ctx.deform_order().unwrap();
        let mut acc: BTreeMap<Vec<u32>, GaussianRational> = BTreeMap::new();
        for (ea, ca) in p.terms() {
            for (eb, cb) in q.terms() {
                let e: Vec<u32> = ea.iter().zip(eb.iter()).map(|(x, y)| x + y).collect();
                if e[0] > n {
                    continue;
                }
                let entry = acc.entry(e).or_insert_with(GaussianRational::zero);
                *entry = entry.add(&ca.mul(cb));
            }
        }
        acc.into_iter().filter(|(_, c)| !c.is_zero()).collect()
    }

    #[test]
    fn mul_against_oracle_with_truncation() {
        let ctx = ctx();
        let rho = ParamPoly::param(&ctx, "rho").unwrap();
        let a = ParamPoly::param(&ctx, "a").unwrap();
        // p = (1 + rho*a + 2*rho^2)^2 computed both ways
        let base = ParamPoly::one(&ctx)
            .checked_add(&rho.checked_mul(&a).unwrap())
            .unwrap()
            .checked_add(&rho.checked_mul(&rho).unwrap().scaled(&GaussianRational::from_int(2)))
            .unwrap();
        let p = base.checked_mul(&base).unwrap();
        let expected = mul_oracle(&ctx, &base, &base);
        let got: Vec<(Vec<u32>, GaussianRational)> = p
            .terms()
            .map(|(e, c)| (e.iter().copied().collect(), c.clone()))
            .collect();
        assert_eq!(got, expected);
        // truncation really bites: rho^5 coefficient is gone
        let rho5 = base.checked_mul(&base).unwrap().checked_mul(&base).unwrap();
        assert!(rho5.terms().all(|(e, _)| e[0] <= 4));
    }

    #[test]
    fn exp_coefficients_are_reciprocal_factorials() {
        let ctx = ctx();
        let rho = ParamPoly::param(&ctx, "rho").unwrap();
        let arg = rho.scaled(&GaussianRational::from_int(-2));
        let e = arg.exp_truncated().unwrap();
        // exp(-2 rho) = 1 - 2 rho + 2 rho^2 - 4/3 rho^3 + 2/3 rho^4
        assert_eq!(
            e.to_canonical_string(),
            "1 - 2*rho + 2*rho^2 - 4/3*rho^3 + 2/3*rho^4"
        );
    }

    #[test]
    fn exp_mixed_argument_against_series_oracle() {
        let ctx = ctx();
        let rho = ParamPoly::param(&ctx, "rho").unwrap();
        let a = ParamPoly::param(&ctx, "a").unwrap();
        let arg = rho
            .checked_mul(&a)
            .unwrap()
            .checked_add(&rho.checked_mul(&rho).unwrap())
            .unwrap();
        let got = arg.exp_truncated().unwrap();
        // independent Horner-free oracle: sum arg^k/k! directly
        let mut oracle = ParamPoly::one(&ctx);
        let mut pw = ParamPoly::one(&ctx);
        for k in 1..=4u32 {
            pw = pw.checked_mul(&arg).unwrap();
            oracle = oracle
                .checked_add(&pw.scaled_rat(&factorial(k).recip()))
                .unwrap();
        }
        assert_eq!(got, oracle);
    }

    #[test]
    fn exp_rejects_deformation_free_terms() {
        let ctx = ctx();
        let bad = ParamPoly::param(&ctx, "a").unwrap();
        match bad.exp_truncated() {
            Err(ScalarError::NonNilpotentExponent { term }) => assert_eq!(term, "a"),
            other => panic!("expected NonNilpotentExponent, got {other:?}"),
        }
    }

    #[test]
    fn exp_of_zero_without_truncation_policy() {
        let free = ParamContext::new(vec![ParamDef {
            name: "a".into(),
            truncate: None,
        }])
        .unwrap();
        let z = ParamPoly::zero(&free);
        assert_eq!(z.exp_truncated().unwrap(), ParamPoly::one(&free));
        let a = ParamPoly::param(&free, "a").unwrap();
        assert_eq!(
            a.exp_truncated().unwrap_err(),
            ScalarError::NoDeformationParameter
        );
    }

    #[test]
    fn div_param_roundtrip_and_failure() {
        let ctx = ctx();
        let rho = ParamPoly::param(&ctx, "rho").unwrap();
        let a = ParamPoly::param(&ctx, "a").unwrap();
        let p = rho
            .checked_mul(&a)
            .unwrap()
            .checked_add(&rho.checked_mul(&rho).unwrap().scaled(&GaussianRational::from_int(3)))
            .unwrap();
        let q = p.div_param("rho", 1).unwrap();
        assert_eq!(q.to_canonical_string(), "a + 3*rho");
        // dividing drops truncation information only at the top order,
        // which div_param is never asked to cross (callers elevate first)
        let err = a.div_param("rho", 1).unwrap_err();
        match err {
            ScalarError::NotDivisible { param, power, .. } => {
                assert_eq!(param, "rho");
                assert_eq!(power, 1);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn substitution_is_evaluation() {
        let ctx = ctx();
        let rho = ParamPoly::param(&ctx, "rho").unwrap();
        let a = ParamPoly::param(&ctx, "a").unwrap();
        let p = ParamPoly::one(&ctx)
            .checked_add(&rho.checked_mul(&a).unwrap().scaled(&GaussianRational::from_int(5)))
            .unwrap();
        let at_zero = p.substitute("rho", &GaussianRational::zero()).unwrap();
        assert_eq!(at_zero, ParamPoly::one(&ctx));
        let at_two = p.substitute("rho", &GaussianRational::from_int(2)).unwrap();
        assert_eq!(at_two.to_canonical_string(), "1 + 10*a");
    }

    #[test]
    fn retruncation_lowers_exactly() {
        let hi = ParamContext::with_deformation("rho", 6, &["a", "b"]);
        let lo = ctx();
        let rho = ParamPoly::param(&hi, "rho").unwrap();
        let mut p = ParamPoly::one(&hi);
        for _ in 0..6 {
            p = p.checked_mul(&ParamPoly::one(&hi).checked_add(&rho).unwrap()).unwrap();
        }
        let dropped = p.retruncate(&lo).unwrap();
        // binomial coefficients C(6,k) for k ≤ 4 survive
        assert_eq!(dropped.to_canonical_string(), "1 + 6*rho + 15*rho^2 + 20*rho^3 + 15*rho^4");
    }

    #[test]
    fn elevated_context_division_pattern() {
        // (1 - exp(-4 rho a)) / (4 rho) at order 2 requires working order 3
        let lo = ParamContext::with_deformation("rho", 2, &["a"]);
        let hi = lo.elevated(1).unwrap();
        let rho = ParamPoly::param(&hi, "rho").unwrap();
        let a = ParamPoly::param(&hi, "a").unwrap();
        let arg = rho.checked_mul(&a).unwrap().scaled(&GaussianRational::from_int(-4));
        let num = ParamPoly::one(&hi)
            .checked_sub(&arg.exp_truncated().unwrap())
            .unwrap();
        let quotient = num
            .div_param("rho", 1)
            .unwrap()
            .div_scalar(&GaussianRational::from_int(4))
            .unwrap()
            .retruncate(&lo)
            .unwrap();
        // a - 2 a^2 rho + (8/3) a^3 rho^2, every order exact
        assert_eq!(
            quotient.to_canonical_string(),
            "a - 2*a^2*rho + 8/3*a^3*rho^2"
        );
    }

    #[test]
    fn context_mismatch_is_reported() {
        let c1 = ctx();
        let c2 = ParamContext::with_deformation("omega", 4, &["a", "b"]);
        let p = ParamPoly::one(&c1);
        let q = ParamPoly::one(&c2);
        assert!(matches!(
            p.checked_add(&q),
            Err(ScalarError::ContextMismatch { .. })
        ));
    }

    #[test]
    fn slicing_by_parameter_order() {
        let ctx = ctx();
        let rho = ParamPoly::param(&ctx, "rho").unwrap();
        let a = ParamPoly::param(&ctx, "a").unwrap();
        // 1 + 3 a rho + a^2 rho
        let p = ParamPoly::one(&ctx)
            .checked_add(&a.checked_mul(&rho).unwrap().scaled(&GaussianRational::from_int(3)))
            .unwrap()
            .checked_add(&a.checked_mul(&a).unwrap().checked_mul(&rho).unwrap())
            .unwrap();
        assert_eq!(
            p.coefficient_slice("rho", 1).unwrap().to_canonical_string(),
            "3*a + a^2"
        );
        assert_eq!(p.coefficient_slice("rho", 0).unwrap().to_canonical_string(), "1");
        assert!(p.coefficient_slice("rho", 2).unwrap().is_zero());
        assert!(matches!(
            p.coefficient_slice("zeta", 0),
            Err(ScalarError::UnknownParameter(_))
        ));
    }

    #[test]
    fn exact_division_recovers_factors() {
        let ctx = ctx();
        let a = ParamPoly::param(&ctx, "a").unwrap();
        let b = ParamPoly::param(&ctx, "b").unwrap();
        // (a + i b)(a - i b) = a^2 + b^2
        let u = a.checked_add(&b.scaled(&GaussianRational::i())).unwrap();
        let v = a.checked_sub(&b.scaled(&GaussianRational::i())).unwrap();
        let prod = u.checked_mul(&v).unwrap();
        let q = prod.div_exact(&v).unwrap().expect("exact factor");
        assert_eq!(q.to_canonical_string(), u.to_canonical_string());
        // a^2 + b^2 is not a multiple of a + b
        let w = a.checked_add(&b).unwrap();
        assert!(prod.div_exact(&w).unwrap().is_none());
        assert!(matches!(
            prod.div_exact(&ParamPoly::zero(&ctx)),
            Err(ScalarError::DivisionByZero)
        ));
        assert_eq!(
            ParamPoly::zero(&ctx)
                .div_exact(&w)
                .unwrap()
                .expect("zero divides")
                .to_canonical_string(),
            "0"
        );
    }
}
