//! Finitely presented deformed Hopf algebras and the `.hopf` bundle format.
//!
//! A *presentation* consists of an ordered generator list, commutation
//! relations `[g_hi, g_lo] = polynomial`, and generator tables for the
//! coproduct, counit and antipode; linear/multiplicative extension of those
//! tables lives in [`crate::hopfops`].  A *bundle* collects presentations
//! together with dual-pairing declarations, bicrossproduct sector splits and
//! characters, in a small text format:
//!
//! ```text
//! algebra U {
//!   param omega truncate 4;        # leading parameter is truncated
//!   param a;  param b;
//!   generators K < P < H;          # ranks in normal-order position
//!   relations { [P, K] = omega*P^2; [H, K] = -P; [H, P] = 0; }
//!   coproduct { H = H (x) 1 + 1 (x) H; ... }
//!   counit    { H = 0; ... }
//!   antipode  { H = -H; ... }
//! }
//! pairing P1 : U, F { basis K*P*H, v*x*t; rule factorial-delta; }
//! bicross S { side right-left; full U;
//!   sectors { actor: K; kernel: P, H; }
//!   action { P <| K = omega*P^2; H <| K = -P; }
//!   coaction { K = exp(-2*omega*H) (x) K; } }
//! character chi on S { P = i*a; H = i*b; }
//! ```
//!
//! `#` starts a comment; `(x)` is the tensor sign; `i` is the imaginary
//! unit.  Expressions admit `+ - * / ^ exp(...)`; a divisor must be a
//! literal product of integers and a single parameter power.  Divisions by
//! the deformation parameter are evaluated at an internally elevated
//! truncation order and re-truncated, so quotients such as
//! `(exp(-4*rho*P) - 1)/(4*rho)` are exact at every kept order.

use crate::ncpoly::{
    exp_nc, normal_order, GeneratorSet, NcError, NcPoly, TensorNcPoly, Word, DEFAULT_STEP_BUDGET,
};
use crate::report::AxiomReport;
use crate::scalar::{GaussianRational, ParamContext, ParamDef, ParamPoly};
use indexmap::IndexMap;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

/// Parse failure with source location.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}, column {col}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

/// Options applied while loading a bundle.
#[derive(Debug, Clone, Default)]
pub struct ParseOptions {
    /// Replace the declared truncation order of the deformation parameter.
    pub truncate_override: Option<u32>,
    /// Replace the default rewrite step budget.
    pub step_budget: Option<u64>,
}

/// A finitely presented algebra with Hopf-structure generator tables.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraPresentation {
    name: String,
    ctx: Arc<ParamContext>,
    gens: GeneratorSet,
    relations: BTreeMap<(u8, u8), NcPoly>,
    coproducts: Vec<Option<TensorNcPoly>>,
    counits: Vec<Option<ParamPoly>>,
    antipodes: Vec<Option<NcPoly>>,
    step_budget: u64,
}

impl AlgebraPresentation {
    pub fn new(name: &str, ctx: &Arc<ParamContext>, gens: GeneratorSet) -> Self {
        let n = gens.len();
        AlgebraPresentation {
            name: name.to_string(),
            ctx: ctx.clone(),
            gens,
            relations: BTreeMap::new(),
            coproducts: vec![None; n],
            counits: vec![None; n],
            antipodes: vec![None; n],
            step_budget: DEFAULT_STEP_BUDGET,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn param_context(&self) -> &Arc<ParamContext> {
        &self.ctx
    }

    pub fn generators(&self) -> &GeneratorSet {
        &self.gens
    }

    pub fn step_budget(&self) -> u64 {
        self.step_budget
    }

    pub fn set_step_budget(&mut self, budget: u64) {
        self.step_budget = budget;
    }

    /// Declared commutator `[g_hi, g_lo]`, if any.
    pub fn relation(&self, hi: u8, lo: u8) -> Option<&NcPoly> {
        self.relations.get(&(hi, lo))
    }

    pub fn has_relation(&self, hi: u8, lo: u8) -> bool {
        self.relations.contains_key(&(hi, lo))
    }

    pub fn relations(&self) -> impl Iterator<Item = (&(u8, u8), &NcPoly)> {
        self.relations.iter()
    }

    pub fn set_relation(&mut self, hi: u8, lo: u8, value: NcPoly) {
        assert!(hi > lo, "relation must order the higher rank first");
        self.relations.insert((hi, lo), value);
    }

    pub fn coproduct_of(&self, rank: u8) -> Option<&TensorNcPoly> {
        self.coproducts[rank as usize].as_ref()
    }

    pub fn counit_of(&self, rank: u8) -> Option<&ParamPoly> {
        self.counits[rank as usize].as_ref()
    }

    pub fn antipode_of(&self, rank: u8) -> Option<&NcPoly> {
        self.antipodes[rank as usize].as_ref()
    }

    pub fn set_coproduct(&mut self, rank: u8, value: TensorNcPoly) {
        self.coproducts[rank as usize] = Some(value);
    }

    pub fn set_counit(&mut self, rank: u8, value: ParamPoly) {
        self.counits[rank as usize] = Some(value);
    }

    pub fn set_antipode(&mut self, rank: u8, value: NcPoly) {
        self.antipodes[rank as usize] = Some(value);
    }

    /// Clone with every stored coefficient carried into `ctx` (same
    /// alphabet, different truncation order).
    pub fn retruncated(&self, ctx: &Arc<ParamContext>) -> Result<Self, NcError> {
        let mut out = AlgebraPresentation::new(&self.name, ctx, self.gens.clone());
        out.step_budget = self.step_budget;
        for (&(hi, lo), v) in &self.relations {
            out.relations
                .insert((hi, lo), v.map_coefficients(|c| c.retruncate(ctx))?);
        }
        for (rank, v) in self.coproducts.iter().enumerate() {
            if let Some(t) = v {
                let mut nt = TensorNcPoly::zero();
                for ((l, r), c) in t.terms() {
                    nt.add_term(l.clone(), r.clone(), c.retruncate(ctx)?);
                }
                out.coproducts[rank] = Some(nt);
            }
        }
        for (rank, v) in self.counits.iter().enumerate() {
            if let Some(p) = v {
                out.counits[rank] = Some(p.retruncate(ctx)?);
            }
        }
        for (rank, v) in self.antipodes.iter().enumerate() {
            if let Some(p) = v {
                out.antipodes[rank] = Some(p.map_coefficients(|c| c.retruncate(ctx))?);
            }
        }
        Ok(out)
    }
}

/// Declared dual pairing between two presentations of a bundle.
///
/// The basis orders pair off the generators slot by slot: the factorial-delta
/// rule evaluates `⟨u, f⟩` on normal monomials by matching the exponent of
/// `u_order[i]` against the exponent of `f_order[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairingSpec {
    pub name: String,
    pub u_algebra: String,
    pub f_algebra: String,
    pub u_order: Vec<String>,
    pub f_order: Vec<String>,
}

/// Which bicrossproduct variant a sector split declares.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BicrossSide {
    /// `K ▷◀ L`: kernel L is a right module algebra, actor K is coacted.
    RightLeft,
    /// `𝒦 ◀▷ 𝒧`: kernel 𝒦 is a left module algebra, actor 𝒧 is coacted.
    LeftRight,
}

impl fmt::Display for BicrossSide {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BicrossSide::RightLeft => "right-left",
            BicrossSide::LeftRight => "left-right",
        })
    }
}

/// Sector split of a presentation into an acted-on commutative kernel and an
/// acting (and coacted) factor, with the action and coaction tables.
///
/// Action keys are `(kernel generator, actor generator)`; values are kernel
/// elements.  Coaction values are tensors whose legs follow the side
/// convention: `(kernel, actor)` legs for right-left, `(actor, kernel)` legs
/// for left-right.  All words are indexed over the full presentation.
#[derive(Debug, Clone, PartialEq)]
pub struct BicrossSpec {
    pub name: String,
    pub side: BicrossSide,
    pub full: String,
    pub actor: Vec<String>,
    pub kernel: Vec<String>,
    pub action: BTreeMap<(String, String), NcPoly>,
    pub coaction: BTreeMap<String, TensorNcPoly>,
}

/// A character: scalar values for the kernel generators of a sector split.
#[derive(Debug, Clone, PartialEq)]
pub struct CharacterSpec {
    pub name: String,
    pub bicross: String,
    pub values: BTreeMap<String, ParamPoly>,
}

/// Parsed bundle: presentations plus the structures declared over them.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Bundle {
    pub algebras: IndexMap<String, AlgebraPresentation>,
    pub pairings: IndexMap<String, PairingSpec>,
    pub bicross: IndexMap<String, BicrossSpec>,
    pub characters: IndexMap<String, CharacterSpec>,
}

impl Bundle {
    pub fn algebra(&self, name: &str) -> Option<&AlgebraPresentation> {
        self.algebras.get(name)
    }
}

/// Map a polynomial onto another generator set by name; fails when a word
/// uses a generator the target does not declare.
pub fn convert_poly(
    p: &NcPoly,
    from: &GeneratorSet,
    to: &GeneratorSet,
) -> Result<NcPoly, String> {
    let mut out = NcPoly::zero();
    for (w, c) in p.terms() {
        out.add_term(convert_word(w, from, to)?, c.clone());
    }
    Ok(out)
}

/// Word analogue of [`convert_poly`].
pub fn convert_word(w: &Word, from: &GeneratorSet, to: &GeneratorSet) -> Result<Word, String> {
    let mut ranks = Vec::with_capacity(w.len());
    for &r in w.ranks() {
        let name = from.name(r);
        let nr = to
            .rank_of(name)
            .ok_or_else(|| format!("generator {name} is not in sector {{{}}}", to.names().join(", ")))?;
        ranks.push(nr);
    }
    Ok(Word::from_ranks(&ranks))
}

/// Tensor analogue of [`convert_poly`] with independent leg targets.
pub fn convert_tensor(
    t: &TensorNcPoly,
    from: &GeneratorSet,
    to_left: &GeneratorSet,
    to_right: &GeneratorSet,
) -> Result<TensorNcPoly, String> {
    let mut out = TensorNcPoly::zero();
    for ((l, r), c) in t.terms() {
        out.add_term(
            convert_word(l, from, to_left)?,
            convert_word(r, from, to_right)?,
            c.clone(),
        );
    }
    Ok(out)
}

impl BicrossSpec {
    /// Kernel generator names in full-presentation rank order.
    pub fn kernel_sorted(&self, full: &AlgebraPresentation) -> Vec<String> {
        let mut v = self.kernel.clone();
        v.sort_by_key(|n| full.generators().rank_of(n));
        v
    }

    /// Actor generator names in full-presentation rank order.
    pub fn actor_sorted(&self, full: &AlgebraPresentation) -> Vec<String> {
        let mut v = self.actor.clone();
        v.sort_by_key(|n| full.generators().rank_of(n));
        v
    }

    /// Derive the kernel-factor presentation: the full structure restricted
    /// to the kernel sector, which must close within it.
    pub fn kernel_presentation(
        &self,
        full: &AlgebraPresentation,
    ) -> Result<AlgebraPresentation, String> {
        let gens = GeneratorSet::new(self.kernel_sorted(full));
        let mut out =
            AlgebraPresentation::new(&format!("{}.kernel", self.name), full.param_context(), gens);
        out.step_budget = full.step_budget();
        self.restrict_into(full, &mut out, true)?;
        Ok(out)
    }

    /// Derive the actor-factor presentation: restricted relations with the
    /// classical Hopf tables (primitive coproducts, counit 0, antipode −g).
    pub fn actor_presentation(
        &self,
        full: &AlgebraPresentation,
    ) -> Result<AlgebraPresentation, String> {
        let gens = GeneratorSet::new(self.actor_sorted(full));
        let mut out =
            AlgebraPresentation::new(&format!("{}.actor", self.name), full.param_context(), gens);
        out.step_budget = full.step_budget();
        self.restrict_into(full, &mut out, false)?;
        let ctx = full.param_context().clone();
        for rank in 0..out.gens.len() as u8 {
            let g = NcPoly::generator(&ctx, rank);
            let mut cop = TensorNcPoly::tensor(&g, &NcPoly::one(&ctx)).expect("same context");
            cop = cop
                .checked_add(&TensorNcPoly::tensor(&NcPoly::one(&ctx), &g).expect("same context"))
                .expect("same context");
            out.set_coproduct(rank, cop);
            out.set_counit(rank, ParamPoly::zero(&ctx));
            out.set_antipode(rank, g.negated());
        }
        Ok(out)
    }

    /// Copy restricted relations (and for the kernel, restricted Hopf
    /// tables) of `full` into the factor presentation `out`.
    fn restrict_into(
        &self,
        full: &AlgebraPresentation,
        out: &mut AlgebraPresentation,
        with_tables: bool,
    ) -> Result<(), String> {
        let fg = full.generators();
        let og = out.generators().clone();
        for (&(hi, lo), value) in &full.relations {
            let hi_name = fg.name(hi);
            let lo_name = fg.name(lo);
            match (og.rank_of(hi_name), og.rank_of(lo_name)) {
                (Some(h), Some(l)) => {
                    let v = convert_poly(value, fg, &og)
                        .map_err(|e| format!("relation [{hi_name}, {lo_name}] leaves the sector: {e}"))?;
                    out.relations.insert((h, l), v);
                }
                _ => continue,
            }
        }
        if with_tables {
            for name in og.names() {
                let frank = fg.rank_of(name).ok_or_else(|| format!("unknown generator {name}"))?;
                let orank = og.rank_of(name).expect("own generator");
                let cop = full
                    .coproduct_of(frank)
                    .ok_or_else(|| format!("coproduct entry missing for {name}"))?;
                let cop = convert_tensor(cop, fg, &og, &og)
                    .map_err(|e| format!("coproduct of {name} leaves the sector: {e}"))?;
                out.set_coproduct(orank, cop);
                let cu = full
                    .counit_of(frank)
                    .ok_or_else(|| format!("counit entry missing for {name}"))?;
                out.set_counit(orank, cu.clone());
                let ap = full
                    .antipode_of(frank)
                    .ok_or_else(|| format!("antipode entry missing for {name}"))?;
                let ap = convert_poly(ap, fg, &og)
                    .map_err(|e| format!("antipode of {name} leaves the sector: {e}"))?;
                out.set_antipode(orank, ap);
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(u64),
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Colon,
    Eq,
    Caret,
    Star,
    Plus,
    Minus,
    Slash,
    Lt,
    Tensor,
    ActLeft,
    ActRight,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Int(n) => write!(f, "`{n}`"),
            Tok::LBrace => write!(f, "`{{`"),
            Tok::RBrace => write!(f, "`}}`"),
            Tok::LParen => write!(f, "`(`"),
            Tok::RParen => write!(f, "`)`"),
            Tok::LBracket => write!(f, "`[`"),
            Tok::RBracket => write!(f, "`]`"),
            Tok::Comma => write!(f, "`,`"),
            Tok::Semi => write!(f, "`;`"),
            Tok::Colon => write!(f, "`:`"),
            Tok::Eq => write!(f, "`=`"),
            Tok::Caret => write!(f, "`^`"),
            Tok::Star => write!(f, "`*`"),
            Tok::Plus => write!(f, "`+`"),
            Tok::Minus => write!(f, "`-`"),
            Tok::Slash => write!(f, "`/`"),
            Tok::Lt => write!(f, "`<`"),
            Tok::Tensor => write!(f, "`(x)`"),
            Tok::ActLeft => write!(f, "`<|`"),
            Tok::ActRight => write!(f, "`|>`"),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(src: &str) -> Result<Vec<Spanned>, ParseError> {
    let bytes: Vec<char> = src.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    let mut line = 1;
    let mut col = 1;
    let n = bytes.len();
    macro_rules! push {
        ($t:expr, $l:expr, $c:expr) => {
            toks.push(Spanned { tok: $t, line: $l, col: $c })
        };
    }
    while i < n {
        let c = bytes[i];
        let (l0, c0) = (line, col);
        match c {
            '\n' => {
                line += 1;
                col = 1;
                i += 1;
            }
            ' ' | '\t' | '\r' => {
                col += 1;
                i += 1;
            }
            '#' => {
                while i < n && bytes[i] != '\n' {
                    i += 1;
                }
            }
            '(' => {
                // `(x)` with no interior spaces is the tensor sign
                if i + 2 < n && bytes[i + 1] == 'x' && bytes[i + 2] == ')' {
                    push!(Tok::Tensor, l0, c0);
                    i += 3;
                    col += 3;
                } else {
                    push!(Tok::LParen, l0, c0);
                    i += 1;
                    col += 1;
                }
            }
            '<' => {
                if i + 1 < n && bytes[i + 1] == '|' {
                    push!(Tok::ActLeft, l0, c0);
                    i += 2;
                    col += 2;
                } else {
                    push!(Tok::Lt, l0, c0);
                    i += 1;
                    col += 1;
                }
            }
            '|' => {
                if i + 1 < n && bytes[i + 1] == '>' {
                    push!(Tok::ActRight, l0, c0);
                    i += 2;
                    col += 2;
                } else {
                    return Err(ParseError {
                        line: l0,
                        col: c0,
                        msg: "stray `|`; expected `|>`".to_string(),
                    });
                }
            }
            ')' => {
                push!(Tok::RParen, l0, c0);
                i += 1;
                col += 1;
            }
            '{' => {
                push!(Tok::LBrace, l0, c0);
                i += 1;
                col += 1;
            }
            '}' => {
                push!(Tok::RBrace, l0, c0);
                i += 1;
                col += 1;
            }
            '[' => {
                push!(Tok::LBracket, l0, c0);
                i += 1;
                col += 1;
            }
            ']' => {
                push!(Tok::RBracket, l0, c0);
                i += 1;
                col += 1;
            }
            ',' => {
                push!(Tok::Comma, l0, c0);
                i += 1;
                col += 1;
            }
            ';' => {
                push!(Tok::Semi, l0, c0);
                i += 1;
                col += 1;
            }
            ':' => {
                push!(Tok::Colon, l0, c0);
                i += 1;
                col += 1;
            }
            '=' => {
                push!(Tok::Eq, l0, c0);
                i += 1;
                col += 1;
            }
            '^' => {
                push!(Tok::Caret, l0, c0);
                i += 1;
                col += 1;
            }
            '*' => {
                push!(Tok::Star, l0, c0);
                i += 1;
                col += 1;
            }
            '+' => {
                push!(Tok::Plus, l0, c0);
                i += 1;
                col += 1;
            }
            '-' => {
                push!(Tok::Minus, l0, c0);
                i += 1;
                col += 1;
            }
            '/' => {
                push!(Tok::Slash, l0, c0);
                i += 1;
                col += 1;
            }
            _ if c.is_ascii_digit() => {
                let mut v: u64 = 0;
                while i < n && bytes[i].is_ascii_digit() {
                    v = v
                        .checked_mul(10)
                        .and_then(|v| v.checked_add(bytes[i] as u64 - '0' as u64))
                        .ok_or(ParseError {
                            line: l0,
                            col: c0,
                            msg: "integer literal too large".to_string(),
                        })?;
                    i += 1;
                    col += 1;
                }
                push!(Tok::Int(v), l0, c0);
            }
            _ if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < n && (bytes[i].is_ascii_alphanumeric() || bytes[i] == '_') {
                    i += 1;
                    col += 1;
                }
                let word: String = bytes[start..i].iter().collect();
                push!(Tok::Ident(word), l0, c0);
            }
            other => {
                return Err(ParseError {
                    line: l0,
                    col: c0,
                    msg: format!("unexpected character `{other}`"),
                });
            }
        }
    }
    toks.push(Spanned { tok: Tok::Eof, line, col });
    Ok(toks)
}

// ---------------------------------------------------------------------------
// Expressions
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum Expr {
    Int(u64),
    ImagUnit,
    Sym(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
    Exp(Box<Expr>),
}

/// Deformation-parameter degree of a divisor literal (products of integers,
/// `i`, and parameter powers only — anything else contributes 0 here and is
/// rejected later during evaluation).
fn divisor_deform_power(e: &Expr, deform: &str) -> u32 {
    match e {
        Expr::Sym(s) if s == deform => 1,
        Expr::Pow(b, k) => k * divisor_deform_power(b, deform),
        Expr::Mul(a, b) => divisor_deform_power(a, deform) + divisor_deform_power(b, deform),
        Expr::Neg(a) => divisor_deform_power(a, deform),
        _ => 0,
    }
}

/// Truncation elevation needed so each division by the deformation
/// parameter stays exact.  Conservative: elevations of subexpressions add.
fn elevation_of(e: &Expr, deform: &str) -> Result<u32, String> {
    Ok(match e {
        Expr::Int(_) | Expr::ImagUnit | Expr::Sym(_) => 0,
        Expr::Neg(a) => elevation_of(a, deform)?,
        Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => {
            elevation_of(a, deform)? + elevation_of(b, deform)?
        }
        Expr::Div(n, d) => elevation_of(n, deform)? + divisor_deform_power(d, deform),
        Expr::Pow(b, k) => k * elevation_of(b, deform)?,
        Expr::Exp(a) => {
            if elevation_of(a, deform)? > 0 {
                return Err("division inside exp(...) is not supported".to_string());
            }
            0
        }
    })
}

/// Divisor literal: a Gaussian-rational constant times parameter powers.
fn literal_divisor(
    e: &Expr,
    ctx: &Arc<ParamContext>,
) -> Result<(GaussianRational, Vec<(String, u32)>), String> {
    match e {
        Expr::Int(n) => Ok((GaussianRational::from_int(*n as i64), Vec::new())),
        Expr::ImagUnit => Ok((GaussianRational::i(), Vec::new())),
        Expr::Sym(s) => {
            if ctx.index_of(s).is_some() {
                Ok((GaussianRational::one(), vec![(s.clone(), 1)]))
            } else {
                Err(format!("divisor must be scalar: `{s}` is not a parameter"))
            }
        }
        Expr::Pow(b, k) => {
            let (c, mut pows) = literal_divisor(b, ctx)?;
            for (_, p) in pows.iter_mut() {
                *p *= k;
            }
            Ok((c.pow(*k), pows))
        }
        Expr::Neg(a) => {
            let (c, pows) = literal_divisor(a, ctx)?;
            Ok((c.neg(), pows))
        }
        Expr::Mul(a, b) => {
            let (ca, mut pa) = literal_divisor(a, ctx)?;
            let (cb, pb) = literal_divisor(b, ctx)?;
            pa.extend(pb);
            Ok((ca.mul(&cb), pa))
        }
        _ => Err(
            "divisor must be a literal product of integers and parameter powers".to_string(),
        ),
    }
}

/// Evaluate an expression over a presentation (parameters, generators, and
/// the imaginary unit `i` are the admissible symbols).
fn eval_expr(e: &Expr, pres: &AlgebraPresentation) -> Result<NcPoly, String> {
    let ctx = pres.param_context();
    Ok(match e {
        Expr::Int(n) => NcPoly::scalar(ParamPoly::constant(
            ctx,
            GaussianRational::from_int(*n as i64),
        )),
        Expr::ImagUnit => NcPoly::scalar(ParamPoly::constant(ctx, GaussianRational::i())),
        Expr::Sym(s) => {
            if ctx.index_of(s).is_some() {
                NcPoly::scalar(ParamPoly::param(ctx, s).map_err(|e| e.to_string())?)
            } else if let Some(rank) = pres.generators().rank_of(s) {
                NcPoly::generator(ctx, rank)
            } else {
                return Err(format!("unknown symbol `{s}`"));
            }
        }
        Expr::Neg(a) => eval_expr(a, pres)?.negated(),
        Expr::Add(a, b) => eval_expr(a, pres)?
            .checked_add(&eval_expr(b, pres)?)
            .map_err(|e| e.to_string())?,
        Expr::Sub(a, b) => eval_expr(a, pres)?
            .checked_sub(&eval_expr(b, pres)?)
            .map_err(|e| e.to_string())?,
        Expr::Mul(a, b) => eval_expr(a, pres)?
            .nc_mul(&eval_expr(b, pres)?)
            .map_err(|e| e.to_string())?,
        Expr::Div(num, den) => {
            let numerator = eval_expr(num, pres)?;
            let (c, pows) = literal_divisor(den, ctx)?;
            let mut out = numerator;
            for (param, power) in pows {
                out = out
                    .map_coefficients(|p| p.div_param(&param, power))
                    .map_err(|e| e.to_string())?;
            }
            out.map_coefficients(|p| p.div_scalar(&c))
                .map_err(|e| e.to_string())?
        }
        Expr::Pow(b, k) => {
            let base = eval_expr(b, pres)?;
            let mut acc = NcPoly::one(ctx);
            for _ in 0..*k {
                acc = acc.nc_mul(&base).map_err(|e| e.to_string())?;
            }
            acc
        }
        Expr::Exp(a) => {
            let arg = eval_expr(a, pres)?;
            exp_nc(&arg, pres).map_err(|e| e.to_string())?
        }
    })
}

/// Evaluate with automatic truncation elevation for exact division, then
/// re-truncate into the base context and normal-order.
fn eval_statement(expr: &Expr, pres: &AlgebraPresentation) -> Result<NcPoly, String> {
    let ctx = pres.param_context();
    let deform = ctx.deform_index().map(|i| ctx.name_of(i).to_string());
    let elevation = match &deform {
        Some(d) => elevation_of(expr, d)?,
        None => 0,
    };
    let value = if elevation == 0 {
        eval_expr(expr, pres)?
    } else {
        let hi_ctx = ctx.elevated(elevation).map_err(|e| e.to_string())?;
        let hi_pres = pres.retruncated(&hi_ctx).map_err(|e| e.to_string())?;
        let v = eval_expr(expr, &hi_pres)?;
        v.map_coefficients(|c| c.retruncate(ctx))
            .map_err(|e| e.to_string())?
    };
    normal_order(&value, pres).map_err(|e| e.to_string())
}

/// Reduce an evaluated expression to a scalar; fails on generator content.
fn expect_scalar(
    value: NcPoly,
    pres: &AlgebraPresentation,
) -> Result<ParamPoly, String> {
    for (w, _) in value.terms() {
        if !w.is_empty() {
            return Err(format!(
                "value must be scalar, found generator term {}",
                w.to_display(pres.generators())
            ));
        }
    }
    Ok(value.coefficient_or_zero(&Word::empty(), pres.param_context()))
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    options: ParseOptions,
}

impl Parser {
    fn peek(&self) -> &Spanned {
        &self.toks[self.pos]
    }

    fn at(&self, t: &Tok) -> bool {
        &self.peek().tok == t
    }

    fn next(&mut self) -> Spanned {
        let s = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        s
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        let s = self.peek();
        Err(ParseError {
            line: s.line,
            col: s.col,
            msg: msg.into(),
        })
    }

    fn err_at<T>(&self, at: &Spanned, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError {
            line: at.line,
            col: at.col,
            msg: msg.into(),
        })
    }

    fn expect(&mut self, t: Tok) -> Result<Spanned, ParseError> {
        if self.peek().tok == t {
            Ok(self.next())
        } else {
            self.err(format!("expected {t}, found {}", self.peek().tok))
        }
    }

    fn expect_ident(&mut self) -> Result<(String, Spanned), ParseError> {
        match self.peek().tok.clone() {
            Tok::Ident(s) => {
                let sp = self.next();
                Ok((s, sp))
            }
            other => self.err(format!("expected identifier, found {other}")),
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        let (word, sp) = self.expect_ident()?;
        if word == kw {
            Ok(())
        } else {
            self.err_at(&sp, format!("expected `{kw}`, found `{word}`"))
        }
    }

    fn expect_int(&mut self) -> Result<u64, ParseError> {
        match self.peek().tok {
            Tok::Int(v) => {
                self.next();
                Ok(v)
            }
            ref other => self.err(format!("expected integer, found {other}")),
        }
    }

    /// `word1-word2` built from ident/minus tokens, e.g. `right-left`.
    fn expect_dashed_pair(&mut self) -> Result<String, ParseError> {
        let (a, _) = self.expect_ident()?;
        self.expect(Tok::Minus)?;
        let (b, _) = self.expect_ident()?;
        Ok(format!("{a}-{b}"))
    }

    // -- expressions --------------------------------------------------------

    fn parse_expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = if self.at(&Tok::Minus) {
            self.next();
            Expr::Neg(Box::new(self.parse_term()?))
        } else {
            self.parse_term()?
        };
        loop {
            match self.peek().tok {
                Tok::Plus => {
                    self.next();
                    let rhs = self.parse_term()?;
                    lhs = Expr::Add(Box::new(lhs), Box::new(rhs));
                }
                Tok::Minus => {
                    self.next();
                    let rhs = self.parse_term()?;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(rhs));
                }
                _ => break,
            }
        }
        Ok(lhs)
    }

    fn parse_term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.parse_factor()?;
        loop {
            match self.peek().tok {
                Tok::Star => {
                    self.next();
                    let rhs = self.parse_factor()?;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(rhs));
                }
                Tok::Slash => {
                    self.next();
                    let rhs = self.parse_factor()?;
                    lhs = Expr::Div(Box::new(lhs), Box::new(rhs));
                }
                _ => break,
            }
        }
        Ok(lhs)
    }

    fn parse_factor(&mut self) -> Result<Expr, ParseError> {
        if self.at(&Tok::Minus) {
            self.next();
            return Ok(Expr::Neg(Box::new(self.parse_factor()?)));
        }
        let mut atom = self.parse_atom()?;
        while self.at(&Tok::Caret) {
            self.next();
            let e = self.expect_int()?;
            let e32 = u32::try_from(e)
                .map_err(|_| ParseError {
                    line: self.peek().line,
                    col: self.peek().col,
                    msg: "exponent too large".to_string(),
                })?;
            atom = Expr::Pow(Box::new(atom), e32);
        }
        Ok(atom)
    }

    fn parse_atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek().tok.clone() {
            Tok::Int(v) => {
                self.next();
                Ok(Expr::Int(v))
            }
            Tok::Ident(s) => {
                self.next();
                if s == "i" {
                    Ok(Expr::ImagUnit)
                } else if s == "exp" && self.at(&Tok::LParen) {
                    self.next();
                    let inner = self.parse_expr()?;
                    self.expect(Tok::RParen)?;
                    Ok(Expr::Exp(Box::new(inner)))
                } else {
                    Ok(Expr::Sym(s))
                }
            }
            Tok::LParen => {
                self.next();
                let inner = self.parse_expr()?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            other => self.err(format!("expected expression, found {other}")),
        }
    }

    /// Sum of `expr (x) expr` terms with sign-aware joins.
    fn parse_texpr(&mut self) -> Result<Vec<(bool, Expr, Expr)>, ParseError> {
        let mut terms = Vec::new();
        let mut negative = if self.at(&Tok::Minus) {
            self.next();
            true
        } else {
            false
        };
        loop {
            // Legs are products: `(x)` binds tighter than the joining sum,
            // so additive legs must be parenthesized.
            let left = self.parse_term()?;
            self.expect(Tok::Tensor)?;
            let right = self.parse_term()?;
            terms.push((negative, left, right));
            match self.peek().tok {
                Tok::Plus => {
                    self.next();
                    negative = false;
                }
                Tok::Minus => {
                    self.next();
                    negative = true;
                }
                _ => break,
            }
        }
        Ok(terms)
    }

    // -- blocks -------------------------------------------------------------

    fn parse_bundle(&mut self) -> Result<Bundle, ParseError> {
        let mut bundle = Bundle::default();
        loop {
            match self.peek().tok.clone() {
                Tok::Eof => break,
                Tok::Ident(kw) if kw == "algebra" => {
                    self.next();
                    let pres = self.parse_algebra(&bundle)?;
                    if bundle.algebras.contains_key(pres.name()) {
                        return self.err(format!("duplicate algebra `{}`", pres.name()));
                    }
                    bundle.algebras.insert(pres.name().to_string(), pres);
                }
                Tok::Ident(kw) if kw == "pairing" => {
                    self.next();
                    let p = self.parse_pairing()?;
                    if bundle.pairings.contains_key(&p.name) {
                        return self.err(format!("duplicate pairing `{}`", p.name));
                    }
                    bundle.pairings.insert(p.name.clone(), p);
                }
                Tok::Ident(kw) if kw == "bicross" => {
                    self.next();
                    let b = self.parse_bicross(&bundle)?;
                    if bundle.bicross.contains_key(&b.name) {
                        return self.err(format!("duplicate bicross `{}`", b.name));
                    }
                    bundle.bicross.insert(b.name.clone(), b);
                }
                Tok::Ident(kw) if kw == "character" => {
                    self.next();
                    let c = self.parse_character(&bundle)?;
                    if bundle.characters.contains_key(&c.name) {
                        return self.err(format!("duplicate character `{}`", c.name));
                    }
                    bundle.characters.insert(c.name.clone(), c);
                }
                other => {
                    return self.err(format!(
                        "expected `algebra`, `pairing`, `bicross`, or `character`, found {other}"
                    ))
                }
            }
        }
        Ok(bundle)
    }

    fn parse_algebra(&mut self, bundle: &Bundle) -> Result<AlgebraPresentation, ParseError> {
        let (name, _) = self.expect_ident()?;
        self.expect(Tok::LBrace)?;
        let mut params: Vec<ParamDef> = Vec::new();
        let mut pres: Option<AlgebraPresentation> = None;
        loop {
            let sp = self.peek().clone();
            match self.peek().tok.clone() {
                Tok::RBrace => {
                    self.next();
                    break;
                }
                Tok::Ident(kw) if kw == "param" => {
                    self.next();
                    if pres.is_some() {
                        return self.err_at(&sp, "param lines must precede `generators`");
                    }
                    let (pname, psp) = self.expect_ident()?;
                    if pname == "i" || pname == "exp" {
                        return self.err_at(&psp, format!("`{pname}` is reserved"));
                    }
                    let truncate = if matches!(&self.peek().tok, Tok::Ident(k) if k == "truncate") {
                        self.next();
                        let declared = self.expect_int()? as u32;
                        Some(self.options.truncate_override.unwrap_or(declared))
                    } else {
                        None
                    };
                    params.push(ParamDef { name: pname, truncate });
                    self.expect(Tok::Semi)?;
                }
                Tok::Ident(kw) if kw == "generators" => {
                    self.next();
                    if pres.is_some() {
                        return self.err_at(&sp, "duplicate `generators` line");
                    }
                    let mut names = Vec::new();
                    let (first, fsp) = self.expect_ident()?;
                    if first == "i" || first == "exp" {
                        return self.err_at(&fsp, format!("`{first}` is reserved"));
                    }
                    names.push(first);
                    while self.at(&Tok::Lt) {
                        self.next();
                        let (g, gsp) = self.expect_ident()?;
                        if g == "i" || g == "exp" {
                            return self.err_at(&gsp, format!("`{g}` is reserved"));
                        }
                        if names.contains(&g) || params.iter().any(|p| p.name == g) {
                            return self.err_at(&gsp, format!("duplicate symbol `{g}`"));
                        }
                        names.push(g);
                    }
                    self.expect(Tok::Semi)?;
                    let ctx = ParamContext::new(params.clone()).map_err(|e| ParseError {
                        line: sp.line,
                        col: sp.col,
                        msg: e.to_string(),
                    })?;
                    // share one context value across algebras with equal alphabets
                    let ctx = bundle
                        .algebras
                        .values()
                        .map(AlgebraPresentation::param_context)
                        .find(|c| ***c == *ctx)
                        .cloned()
                        .unwrap_or(ctx);
                    let mut p =
                        AlgebraPresentation::new(&name, &ctx, GeneratorSet::new(names));
                    if let Some(b) = self.options.step_budget {
                        p.set_step_budget(b);
                    }
                    pres = Some(p);
                }
                Tok::Ident(kw) if kw == "relations" => {
                    self.next();
                    let p = match pres.as_mut() {
                        Some(p) => p,
                        None => return self.err_at(&sp, "`generators` must precede `relations`"),
                    };
                    self.expect(Tok::LBrace)?;
                    while !self.at(&Tok::RBrace) {
                        let stmt = self.peek().clone();
                        self.expect(Tok::LBracket)?;
                        let (a, asp) = self.expect_ident()?;
                        self.expect(Tok::Comma)?;
                        let (b, bsp) = self.expect_ident()?;
                        self.expect(Tok::RBracket)?;
                        self.expect(Tok::Eq)?;
                        let expr = self.parse_expr()?;
                        self.expect(Tok::Semi)?;
                        let hi = match p.generators().rank_of(&a) {
                            Some(r) => r,
                            None => return self.err_at(&asp, format!("unknown generator `{a}`")),
                        };
                        let lo = match p.generators().rank_of(&b) {
                            Some(r) => r,
                            None => return self.err_at(&bsp, format!("unknown generator `{b}`")),
                        };
                        if hi <= lo {
                            return self.err_at(
                                &stmt,
                                format!("relation [{a}, {b}] must list the higher-ranked generator first"),
                            );
                        }
                        let value = eval_statement(&expr, p).map_err(|e| ParseError {
                            line: stmt.line,
                            col: stmt.col,
                            msg: e,
                        })?;
                        p.set_relation(hi, lo, value);
                    }
                    self.next(); // RBrace
                }
                Tok::Ident(kw) if kw == "coproduct" || kw == "counit" || kw == "antipode" => {
                    self.next();
                    let table = kw;
                    let p = match pres.as_mut() {
                        Some(p) => p,
                        None => {
                            return self.err_at(&sp, format!("`generators` must precede `{table}`"))
                        }
                    };
                    self.expect(Tok::LBrace)?;
                    while !self.at(&Tok::RBrace) {
                        let stmt = self.peek().clone();
                        let (g, gsp) = self.expect_ident()?;
                        let rank = match p.generators().rank_of(&g) {
                            Some(r) => r,
                            None => return self.err_at(&gsp, format!("unknown generator `{g}`")),
                        };
                        self.expect(Tok::Eq)?;
                        match table.as_str() {
                            "coproduct" => {
                                let terms = self.parse_texpr()?;
                                self.expect(Tok::Semi)?;
                                let value = eval_tensor_terms(&terms, p).map_err(|e| ParseError {
                                    line: stmt.line,
                                    col: stmt.col,
                                    msg: e,
                                })?;
                                p.set_coproduct(rank, value);
                            }
                            "counit" => {
                                let expr = self.parse_expr()?;
                                self.expect(Tok::Semi)?;
                                let value = eval_statement(&expr, p)
                                    .and_then(|v| expect_scalar(v, p))
                                    .map_err(|e| ParseError {
                                        line: stmt.line,
                                        col: stmt.col,
                                        msg: e,
                                    })?;
                                p.set_counit(rank, value);
                            }
                            _ => {
                                let expr = self.parse_expr()?;
                                self.expect(Tok::Semi)?;
                                let value = eval_statement(&expr, p).map_err(|e| ParseError {
                                    line: stmt.line,
                                    col: stmt.col,
                                    msg: e,
                                })?;
                                p.set_antipode(rank, value);
                            }
                        }
                    }
                    self.next(); // RBrace
                }
                other => return self.err(format!("unexpected {other} in algebra block")),
            }
        }
        match pres {
            Some(p) => Ok(p),
            None => self.err(format!("algebra `{name}` has no `generators` line")),
        }
    }

    fn parse_pairing(&mut self) -> Result<PairingSpec, ParseError> {
        let (name, _) = self.expect_ident()?;
        self.expect(Tok::Colon)?;
        let (u_algebra, _) = self.expect_ident()?;
        self.expect(Tok::Comma)?;
        let (f_algebra, _) = self.expect_ident()?;
        self.expect(Tok::LBrace)?;
        let mut u_order = None;
        let mut f_order = None;
        loop {
            match self.peek().tok.clone() {
                Tok::RBrace => {
                    self.next();
                    break;
                }
                Tok::Ident(kw) if kw == "basis" => {
                    self.next();
                    let u = self.parse_star_names()?;
                    self.expect(Tok::Comma)?;
                    let f = self.parse_star_names()?;
                    self.expect(Tok::Semi)?;
                    u_order = Some(u);
                    f_order = Some(f);
                }
                Tok::Ident(kw) if kw == "rule" => {
                    self.next();
                    let rule = self.expect_dashed_pair()?;
                    if rule != "factorial-delta" {
                        return self.err(format!("unknown pairing rule `{rule}`"));
                    }
                    self.expect(Tok::Semi)?;
                }
                other => return self.err(format!("unexpected {other} in pairing block")),
            }
        }
        match (u_order, f_order) {
            (Some(u_order), Some(f_order)) => Ok(PairingSpec {
                name,
                u_algebra,
                f_algebra,
                u_order,
                f_order,
            }),
            _ => self.err(format!("pairing `{name}` has no `basis` line")),
        }
    }

    fn parse_star_names(&mut self) -> Result<Vec<String>, ParseError> {
        let mut names = vec![self.expect_ident()?.0];
        while self.at(&Tok::Star) {
            self.next();
            names.push(self.expect_ident()?.0);
        }
        Ok(names)
    }

    fn parse_comma_names(&mut self) -> Result<Vec<String>, ParseError> {
        let mut names = vec![self.expect_ident()?.0];
        while self.at(&Tok::Comma) {
            self.next();
            names.push(self.expect_ident()?.0);
        }
        Ok(names)
    }

    fn parse_bicross(&mut self, bundle: &Bundle) -> Result<BicrossSpec, ParseError> {
        let (name, _) = self.expect_ident()?;
        self.expect(Tok::LBrace)?;
        let mut side = None;
        let mut full: Option<String> = None;
        let mut actor = Vec::new();
        let mut kernel = Vec::new();
        let mut action = BTreeMap::new();
        let mut coaction = BTreeMap::new();
        loop {
            let sp = self.peek().clone();
            match self.peek().tok.clone() {
                Tok::RBrace => {
                    self.next();
                    break;
                }
                Tok::Ident(kw) if kw == "side" => {
                    self.next();
                    let s = self.expect_dashed_pair()?;
                    side = Some(match s.as_str() {
                        "right-left" => BicrossSide::RightLeft,
                        "left-right" => BicrossSide::LeftRight,
                        other => {
                            return self.err(format!(
                                "side must be `right-left` or `left-right`, found `{other}`"
                            ))
                        }
                    });
                    self.expect(Tok::Semi)?;
                }
                Tok::Ident(kw) if kw == "full" => {
                    self.next();
                    let (f, fsp) = self.expect_ident()?;
                    if !bundle.algebras.contains_key(&f) {
                        return self.err_at(&fsp, format!("unknown algebra `{f}` (declare it first)"));
                    }
                    full = Some(f);
                    self.expect(Tok::Semi)?;
                }
                Tok::Ident(kw) if kw == "sectors" => {
                    self.next();
                    self.expect(Tok::LBrace)?;
                    while !self.at(&Tok::RBrace) {
                        let (which, wsp) = self.expect_ident()?;
                        self.expect(Tok::Colon)?;
                        let names = self.parse_comma_names()?;
                        self.expect(Tok::Semi)?;
                        match which.as_str() {
                            "actor" => actor = names,
                            "kernel" => kernel = names,
                            other => {
                                return self.err_at(
                                    &wsp,
                                    format!("sector must be `actor` or `kernel`, found `{other}`"),
                                )
                            }
                        }
                    }
                    self.next();
                }
                Tok::Ident(kw) if kw == "action" => {
                    self.next();
                    let pres = self.resolve_full(bundle, &full, &sp)?;
                    self.expect(Tok::LBrace)?;
                    while !self.at(&Tok::RBrace) {
                        let stmt = self.peek().clone();
                        let (first, _) = self.expect_ident()?;
                        let (kernel_gen, actor_gen) = match self.peek().tok {
                            Tok::ActLeft => {
                                // kernel <| actor (right-left notation)
                                self.next();
                                let (second, _) = self.expect_ident()?;
                                if side != Some(BicrossSide::RightLeft) {
                                    return self.err_at(
                                        &stmt,
                                        "`<|` action lines belong to side right-left",
                                    );
                                }
                                (first, second)
                            }
                            Tok::ActRight => {
                                // actor |> kernel (left-right notation)
                                self.next();
                                let (second, _) = self.expect_ident()?;
                                if side != Some(BicrossSide::LeftRight) {
                                    return self.err_at(
                                        &stmt,
                                        "`|>` action lines belong to side left-right",
                                    );
                                }
                                (second, first)
                            }
                            ref other => {
                                return self.err(format!("expected `<|` or `|>`, found {other}"))
                            }
                        };
                        self.expect(Tok::Eq)?;
                        let expr = self.parse_expr()?;
                        self.expect(Tok::Semi)?;
                        let value = eval_statement(&expr, pres).map_err(|e| ParseError {
                            line: stmt.line,
                            col: stmt.col,
                            msg: e,
                        })?;
                        action.insert((kernel_gen, actor_gen), value);
                    }
                    self.next();
                }
                Tok::Ident(kw) if kw == "coaction" => {
                    self.next();
                    let pres = self.resolve_full(bundle, &full, &sp)?;
                    self.expect(Tok::LBrace)?;
                    while !self.at(&Tok::RBrace) {
                        let stmt = self.peek().clone();
                        let (g, _) = self.expect_ident()?;
                        self.expect(Tok::Eq)?;
                        let terms = self.parse_texpr()?;
                        self.expect(Tok::Semi)?;
                        let value = eval_tensor_terms(&terms, pres).map_err(|e| ParseError {
                            line: stmt.line,
                            col: stmt.col,
                            msg: e,
                        })?;
                        coaction.insert(g, value);
                    }
                    self.next();
                }
                other => return self.err(format!("unexpected {other} in bicross block")),
            }
        }
        let side = match side {
            Some(s) => s,
            None => return self.err(format!("bicross `{name}` has no `side` line")),
        };
        let full = match full {
            Some(f) => f,
            None => return self.err(format!("bicross `{name}` has no `full` line")),
        };
        // store sectors sorted by full-presentation rank for determinism
        let pres = &bundle.algebras[&full];
        let sort = |mut v: Vec<String>| {
            v.sort_by_key(|n| pres.generators().rank_of(n));
            v
        };
        Ok(BicrossSpec {
            name,
            side,
            full,
            actor: sort(actor),
            kernel: sort(kernel),
            action,
            coaction,
        })
    }

    fn resolve_full<'b>(
        &self,
        bundle: &'b Bundle,
        full: &Option<String>,
        sp: &Spanned,
    ) -> Result<&'b AlgebraPresentation, ParseError> {
        match full {
            Some(f) => Ok(&bundle.algebras[f]),
            None => self.err_at(sp, "`full` must precede action/coaction blocks"),
        }
    }

    fn parse_character(&mut self, bundle: &Bundle) -> Result<CharacterSpec, ParseError> {
        let (name, _) = self.expect_ident()?;
        self.expect_keyword("on")?;
        let (bicross_name, bsp) = self.expect_ident()?;
        let spec = match bundle.bicross.get(&bicross_name) {
            Some(s) => s,
            None => {
                return self.err_at(
                    &bsp,
                    format!("unknown bicross `{bicross_name}` (declare it first)"),
                )
            }
        };
        let pres = &bundle.algebras[&spec.full];
        self.expect(Tok::LBrace)?;
        let mut values = BTreeMap::new();
        while !self.at(&Tok::RBrace) {
            let stmt = self.peek().clone();
            let (g, _) = self.expect_ident()?;
            self.expect(Tok::Eq)?;
            let expr = self.parse_expr()?;
            self.expect(Tok::Semi)?;
            let value = eval_statement(&expr, pres)
                .and_then(|v| expect_scalar(v, pres))
                .map_err(|e| ParseError {
                    line: stmt.line,
                    col: stmt.col,
                    msg: e,
                })?;
            values.insert(g, value);
        }
        self.next();
        Ok(CharacterSpec {
            name,
            bicross: bicross_name,
            values,
        })
    }
}

fn eval_tensor_terms(
    terms: &[(bool, Expr, Expr)],
    pres: &AlgebraPresentation,
) -> Result<TensorNcPoly, String> {
    let mut out = TensorNcPoly::zero();
    for (negative, left, right) in terms {
        let l = eval_statement(left, pres)?;
        let r = eval_statement(right, pres)?;
        let mut t = TensorNcPoly::tensor(&l, &r).map_err(|e| e.to_string())?;
        if *negative {
            t = t.negated();
        }
        out = out.checked_add(&t).map_err(|e| e.to_string())?;
    }
    Ok(out)
}

/// Parse a bundle from source text.
pub fn parse_bundle(src: &str) -> Result<Bundle, ParseError> {
    parse_bundle_with(src, &ParseOptions::default())
}

/// Parse a bundle, applying load options.
pub fn parse_bundle_with(src: &str, options: &ParseOptions) -> Result<Bundle, ParseError> {
    let toks = lex(src)?;
    let mut parser = Parser {
        toks,
        pos: 0,
        options: options.clone(),
    };
    parser.parse_bundle()
}

/// Parse a standalone expression against one presentation (CLI entry).
pub fn parse_expression(src: &str, pres: &AlgebraPresentation) -> Result<NcPoly, ParseError> {
    let toks = lex(src)?;
    let mut parser = Parser {
        toks,
        pos: 0,
        options: ParseOptions::default(),
    };
    let expr = parser.parse_expr()?;
    let end = parser.peek().clone();
    if end.tok != Tok::Eof {
        return parser.err(format!("unexpected {} after expression", end.tok));
    }
    eval_statement(&expr, pres).map_err(|e| ParseError {
        line: end.line,
        col: end.col,
        msg: e,
    })
}

// ---------------------------------------------------------------------------
// Serializer
// ---------------------------------------------------------------------------

impl Bundle {
    /// Canonical re-emission.  Exponentials appear expanded (the canonical
    /// polynomial forms), so serializing is a fixed point of parsing:
    /// `parse(serialize(parse(s)))` equals `parse(serialize(...))` exactly.
    pub fn to_canonical_text(&self) -> String {
        let mut out = String::new();
        for pres in self.algebras.values() {
            out.push_str(&serialize_algebra(pres));
            out.push('\n');
        }
        for p in self.pairings.values() {
            out.push_str(&format!(
                "pairing {} : {}, {} {{\n  basis {}, {};\n  rule factorial-delta;\n}}\n\n",
                p.name,
                p.u_algebra,
                p.f_algebra,
                p.u_order.join("*"),
                p.f_order.join("*")
            ));
        }
        for b in self.bicross.values() {
            let full = &self.algebras[&b.full];
            let gens = full.generators();
            out.push_str(&format!("bicross {} {{\n  side {};\n  full {};\n", b.name, b.side, b.full));
            out.push_str(&format!(
                "  sectors {{ actor: {}; kernel: {}; }}\n",
                b.actor.join(", "),
                b.kernel.join(", ")
            ));
            out.push_str("  action {\n");
            for ((kernel_gen, actor_gen), value) in &b.action {
                match b.side {
                    BicrossSide::RightLeft => out.push_str(&format!(
                        "    {} <| {} = {};\n",
                        kernel_gen,
                        actor_gen,
                        value.to_canonical_string(gens)
                    )),
                    BicrossSide::LeftRight => out.push_str(&format!(
                        "    {} |> {} = {};\n",
                        actor_gen,
                        kernel_gen,
                        value.to_canonical_string(gens)
                    )),
                }
            }
            out.push_str("  }\n  coaction {\n");
            for (g, value) in &b.coaction {
                out.push_str(&format!(
                    "    {} = {};\n",
                    g,
                    value.to_canonical_string(gens)
                ));
            }
            out.push_str("  }\n}\n\n");
        }
        for c in self.characters.values() {
            out.push_str(&format!("character {} on {} {{\n", c.name, c.bicross));
            for (g, v) in &c.values {
                out.push_str(&format!("  {} = {};\n", g, v.to_canonical_string()));
            }
            out.push_str("}\n\n");
        }
        out
    }
}

fn serialize_algebra(pres: &AlgebraPresentation) -> String {
    let mut out = format!("algebra {} {{\n", pres.name());
    for p in pres.param_context().params() {
        match p.truncate {
            Some(n) => out.push_str(&format!("  param {} truncate {};\n", p.name, n)),
            None => out.push_str(&format!("  param {};\n", p.name)),
        }
    }
    let gens = pres.generators();
    out.push_str(&format!("  generators {};\n", gens.names().join(" < ")));
    out.push_str("  relations {\n");
    for (&(hi, lo), v) in pres.relations() {
        out.push_str(&format!(
            "    [{}, {}] = {};\n",
            gens.name(hi),
            gens.name(lo),
            v.to_canonical_string(gens)
        ));
    }
    out.push_str("  }\n  coproduct {\n");
    for rank in 0..gens.len() as u8 {
        if let Some(t) = pres.coproduct_of(rank) {
            out.push_str(&format!(
                "    {} = {};\n",
                gens.name(rank),
                t.to_canonical_string(gens)
            ));
        }
    }
    out.push_str("  }\n  counit {\n");
    for rank in 0..gens.len() as u8 {
        if let Some(p) = pres.counit_of(rank) {
            out.push_str(&format!(
                "    {} = {};\n",
                gens.name(rank),
                p.to_canonical_string()
            ));
        }
    }
    out.push_str("  }\n  antipode {\n");
    for rank in 0..gens.len() as u8 {
        if let Some(p) = pres.antipode_of(rank) {
            out.push_str(&format!(
                "    {} = {};\n",
                gens.name(rank),
                p.to_canonical_string(gens)
            ));
        }
    }
    out.push_str("  }\n}\n");
    out
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

/// Structural and law-level validation of one presentation.
pub fn validate_presentation(pres: &AlgebraPresentation) -> AxiomReport {
    let suite = "validate";
    let mut rep = AxiomReport::new();
    let gens = pres.generators();
    for rank in 0..gens.len() as u8 {
        let name = gens.name(rank);
        let mut missing = Vec::new();
        if pres.coproduct_of(rank).is_none() {
            missing.push("coproduct");
        }
        if pres.counit_of(rank).is_none() {
            missing.push("counit");
        }
        if pres.antipode_of(rank).is_none() {
            missing.push("antipode");
        }
        if missing.is_empty() {
            rep.pass(suite, "tables-complete", name);
        } else {
            rep.fail(
                suite,
                "tables-complete",
                name,
                format!("missing table entries: {}", missing.join(", ")),
            );
        }
    }
    let deform_idx = pres.param_context().deform_index();
    for (&(hi, lo), value) in pres.relations() {
        let subject = format!("[{}, {}]", gens.name(hi), gens.name(lo));
        // termination shape: deformation-free terms must be single letters
        let deform_free_long = value.terms().find(|(w, c)| {
            w.len() > 1
                && c.terms().any(|(exps, _)| match deform_idx {
                    Some(i) => exps.get(i).copied().unwrap_or(0) == 0,
                    None => true,
                })
        });
        match deform_free_long {
            None => rep.pass(suite, "rewrite-sanity", &subject),
            Some((w, _)) => rep.fail(
                suite,
                "rewrite-sanity",
                &subject,
                format!(
                    "deformation-free term {} has length {} > 1; rewriting may not terminate",
                    w.to_display(gens),
                    w.len()
                ),
            ),
        }
        match normal_order(value, pres) {
            Ok(n) if &n == value => rep.pass(suite, "relation-normal", &subject),
            Ok(n) => rep.fail(
                suite,
                "relation-normal",
                &subject,
                format!(
                    "stored value {} is not normal-ordered (normal form {})",
                    value.to_canonical_string(gens),
                    n.to_canonical_string(gens)
                ),
            ),
            Err(e) => rep.fail(suite, "relation-normal", &subject, e.to_string()),
        }
    }
    if !rep.passed() {
        // law checks below need complete tables; report the structural
        // failures rather than cascading errors
        return rep;
    }
    rep.merge(crate::hopfops::check_presentation_laws(pres));
    rep
}

/// Validate every structure declared in a bundle.
pub fn validate_bundle(bundle: &Bundle) -> AxiomReport {
    let suite = "validate";
    let mut rep = AxiomReport::new();
    let mut ctx_iter = bundle.algebras.values().map(|p| p.param_context());
    if let Some(first) = ctx_iter.next() {
        if ctx_iter.all(|c| **c == **first) {
            rep.pass(suite, "shared-parameters", "bundle");
        } else {
            rep.fail(
                suite,
                "shared-parameters",
                "bundle",
                "presentations declare different parameter alphabets or truncation orders".into(),
            );
        }
    }
    for pres in bundle.algebras.values() {
        rep.merge(validate_presentation(pres));
    }
    for pairing in bundle.pairings.values() {
        rep.merge(validate_pairing(bundle, pairing));
    }
    for spec in bundle.bicross.values() {
        rep.merge(validate_bicross(bundle, spec));
    }
    for ch in bundle.characters.values() {
        rep.merge(validate_character(bundle, ch));
    }
    rep
}

fn validate_pairing(bundle: &Bundle, pairing: &PairingSpec) -> AxiomReport {
    let suite = "validate";
    let mut rep = AxiomReport::new();
    let subject = pairing.name.clone();
    for (algebra, order) in [
        (&pairing.u_algebra, &pairing.u_order),
        (&pairing.f_algebra, &pairing.f_order),
    ] {
        let Some(pres) = bundle.algebra(algebra) else {
            rep.fail(
                suite,
                "pairing-sides",
                &subject,
                format!("unknown algebra `{algebra}`"),
            );
            continue;
        };
        let mut declared: Vec<&str> = pres.generators().names().iter().map(|s| s.as_str()).collect();
        let mut listed: Vec<&str> = order.iter().map(|s| s.as_str()).collect();
        declared.sort_unstable();
        listed.sort_unstable();
        if declared == listed {
            rep.pass(suite, "pairing-sides", format!("{subject}:{algebra}"));
        } else {
            rep.fail(
                suite,
                "pairing-sides",
                format!("{subject}:{algebra}"),
                format!(
                    "basis order [{}] is not a permutation of the generators of {algebra}",
                    order.join(", ")
                ),
            );
        }
    }
    rep
}

fn validate_bicross(bundle: &Bundle, spec: &BicrossSpec) -> AxiomReport {
    let suite = "validate";
    let mut rep = AxiomReport::new();
    let subject = spec.name.clone();
    let Some(full) = bundle.algebra(&spec.full) else {
        rep.fail(
            suite,
            "bicross-structure",
            &subject,
            format!("unknown full algebra `{}`", spec.full),
        );
        return rep;
    };
    let gens = full.generators();
    // sectors partition the generator list
    let mut seen: Vec<&str> = spec
        .actor
        .iter()
        .chain(spec.kernel.iter())
        .map(|s| s.as_str())
        .collect();
    seen.sort_unstable();
    let mut declared: Vec<&str> = gens.names().iter().map(|s| s.as_str()).collect();
    declared.sort_unstable();
    seen.dedup();
    if seen == declared && spec.actor.len() + spec.kernel.len() == gens.len() {
        rep.pass(suite, "sectors-partition", &subject);
    } else {
        rep.fail(
            suite,
            "sectors-partition",
            &subject,
            format!(
                "sectors actor {{{}}} / kernel {{{}}} do not partition the generators of {}",
                spec.actor.join(", "),
                spec.kernel.join(", "),
                spec.full
            ),
        );
        return rep;
    }
    // the kernel must be commutative: every kernel-internal commutator is a
    // declared zero
    for (i, a) in spec.kernel.iter().enumerate() {
        for b in spec.kernel.iter().skip(i + 1) {
            let (ra, rb) = (gens.rank_of(a).unwrap(), gens.rank_of(b).unwrap());
            let (hi, lo) = if ra > rb { (ra, rb) } else { (rb, ra) };
            let pair = format!("[{}, {}]", gens.name(hi), gens.name(lo));
            match full.relation(hi, lo) {
                Some(v) if v.is_zero() => {
                    rep.pass(suite, "kernel-commutative", format!("{subject}:{pair}"))
                }
                Some(v) => rep.fail(
                    suite,
                    "kernel-commutative",
                    format!("{subject}:{pair}"),
                    format!(
                        "kernel commutator is {} (nonzero)",
                        v.to_canonical_string(gens)
                    ),
                ),
                None => rep.fail(
                    suite,
                    "kernel-commutative",
                    format!("{subject}:{pair}"),
                    "kernel pair has no declared (zero) relation".into(),
                ),
            }
        }
    }
    // factor presentations must derive (sector closure)
    match spec.kernel_presentation(full) {
        Ok(_) => rep.pass(suite, "kernel-closure", &subject),
        Err(e) => rep.fail(suite, "kernel-closure", &subject, e),
    }
    match spec.actor_presentation(full) {
        Ok(_) => rep.pass(suite, "actor-closure", &subject),
        Err(e) => rep.fail(suite, "actor-closure", &subject, e),
    }
    // action table: complete over kernel × actor, values inside the kernel
    let kernel_gens = GeneratorSet::new(spec.kernel_sorted(full));
    for kg in &spec.kernel {
        for ag in &spec.actor {
            let key = (kg.clone(), ag.clone());
            let label = format!("{subject}:{kg}◁{ag}");
            match spec.action.get(&key) {
                None => rep.fail(
                    suite,
                    "action-table",
                    &label,
                    "missing action entry".into(),
                ),
                Some(v) => match convert_poly(v, gens, &kernel_gens) {
                    Ok(_) => rep.pass(suite, "action-table", &label),
                    Err(e) => rep.fail(suite, "action-table", &label, e),
                },
            }
        }
    }
    for key in spec.action.keys() {
        if !spec.kernel.contains(&key.0) || !spec.actor.contains(&key.1) {
            rep.fail(
                suite,
                "action-table",
                format!("{subject}:{}◁{}", key.0, key.1),
                "action entry does not map (kernel, actor) generators".into(),
            );
        }
    }
    // coaction table: complete over the actor sector, legs in their sectors
    let actor_gens = GeneratorSet::new(spec.actor_sorted(full));
    let (left_sector, right_sector) = match spec.side {
        BicrossSide::RightLeft => (&kernel_gens, &actor_gens),
        BicrossSide::LeftRight => (&actor_gens, &kernel_gens),
    };
    for ag in &spec.actor {
        let label = format!("{subject}:{ag}");
        match spec.coaction.get(ag) {
            None => rep.fail(
                suite,
                "coaction-table",
                &label,
                "missing coaction entry".into(),
            ),
            Some(t) => match convert_tensor(t, gens, left_sector, right_sector) {
                Ok(_) => rep.pass(suite, "coaction-table", &label),
                Err(e) => rep.fail(suite, "coaction-table", &label, e),
            },
        }
    }
    for key in spec.coaction.keys() {
        if !spec.actor.contains(key) {
            rep.fail(
                suite,
                "coaction-table",
                format!("{subject}:{key}"),
                "coaction entry is not an actor generator".into(),
            );
        }
    }
    rep
}

fn validate_character(bundle: &Bundle, ch: &CharacterSpec) -> AxiomReport {
    let suite = "validate";
    let mut rep = AxiomReport::new();
    let subject = ch.name.clone();
    let Some(spec) = bundle.bicross.get(&ch.bicross) else {
        rep.fail(
            suite,
            "character-target",
            &subject,
            format!("unknown bicross `{}`", ch.bicross),
        );
        return rep;
    };
    let mut covered: Vec<&str> = ch.values.keys().map(|s| s.as_str()).collect();
    let mut kernel: Vec<&str> = spec.kernel.iter().map(|s| s.as_str()).collect();
    covered.sort_unstable();
    kernel.sort_unstable();
    if covered == kernel {
        rep.pass(suite, "character-target", &subject);
    } else {
        rep.fail(
            suite,
            "character-target",
            &subject,
            format!(
                "character values cover {{{}}} but the kernel of {} is {{{}}}",
                covered.join(", "),
                spec.name,
                kernel.join(", ")
            ),
        );
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINI: &str = r#"
# toy deformed presentation
algebra T {
  param omega truncate 3;
  param a;
  generators K < P < H;
  relations {
    [P, K] = omega*P^2;
    [H, K] = 0 - P;
    [H, P] = 0;
  }
  coproduct {
    K = K (x) 1 + exp(-2*omega*H) (x) K;
    P = P (x) 1 + exp(-2*omega*H) (x) P;
    H = H (x) 1 + 1 (x) H;
  }
  counit { K = 0; P = 0; H = 0; }
  antipode {
    K = -exp(2*omega*H)*K;
    P = -exp(2*omega*H)*P;
    H = -H;
  }
}
"#;

    #[test]
    fn parses_relations_and_tables() {
        let bundle = parse_bundle(MINI).unwrap();
        let pres = bundle.algebra("T").unwrap();
        let gens = pres.generators();
        assert_eq!(gens.names(), &["K", "P", "H"]);
        assert_eq!(
            pres.relation(2, 0).unwrap().to_canonical_string(gens),
            "-P"
        );
        assert_eq!(
            pres.relation(1, 0).unwrap().to_canonical_string(gens),
            "omega*P^2"
        );
        assert!(pres.relation(2, 1).unwrap().is_zero());
        // coproduct of H is primitive
        assert_eq!(
            pres.coproduct_of(2).unwrap().to_canonical_string(gens),
            "1 (x) H + H (x) 1"
        );
        // the twisted leg is expanded to its truncated polynomial
        let dk = pres.coproduct_of(0).unwrap().to_canonical_string(gens);
        assert!(dk.starts_with("1 (x) K + K (x) 1 - 2*omega*H (x) K"), "{dk}");
        assert_eq!(pres.counit_of(0).unwrap().to_canonical_string(), "0");
    }

    #[test]
    fn antipode_values_are_normal_ordered() {
        let bundle = parse_bundle(MINI).unwrap();
        let pres = bundle.algebra("T").unwrap();
        let gens = pres.generators();
        // -exp(2wH)K normal-orders into K and P terms times powers of H
        let gk = pres.antipode_of(0).unwrap();
        assert!(gk.terms().all(|(w, _)| w.is_rank_sorted()));
        let s = gk.to_canonical_string(gens);
        assert!(s.starts_with("-K"), "{s}");
    }

    #[test]
    fn division_by_deformation_parameter_is_exact() {
        let src = r#"
algebra N {
  param rho truncate 2;
  generators K < H < P;
  relations {
    [H, K] = (exp(-4*rho*P) - 1) / (4*rho);
    [P, K] = 0;
    [P, H] = 0;
  }
  coproduct { K = K (x) 1 + 1 (x) K; H = H (x) 1 + 1 (x) H; P = P (x) 1 + 1 (x) P; }
  counit { K = 0; H = 0; P = 0; }
  antipode { K = -K; H = -H; P = -P; }
}
"#;
        let bundle = parse_bundle(src).unwrap();
        let pres = bundle.algebra("N").unwrap();
        assert_eq!(
            pres.relation(1, 0).unwrap().to_canonical_string(pres.generators()),
            "-P + 2*rho*P^2 - 8/3*rho^2*P^3"
        );
    }

    #[test]
    fn truncate_override_applies() {
        let opts = ParseOptions {
            truncate_override: Some(1),
            ..Default::default()
        };
        let bundle = parse_bundle_with(MINI, &opts).unwrap();
        let pres = bundle.algebra("T").unwrap();
        assert_eq!(pres.param_context().deform_order(), Some(1));
        let dk = pres.coproduct_of(0).unwrap().to_canonical_string(pres.generators());
        assert_eq!(dk, "1 (x) K + K (x) 1 - 2*omega*H (x) K");
    }

    #[test]
    fn syntax_error_carries_location() {
        let err = parse_bundle("algebra A {\n  param omega truncate 4;\n  generators K @ P;\n}")
            .unwrap_err();
        assert_eq!(err.line, 3);
        assert!(err.msg.contains("unexpected character"), "{}", err.msg);
    }

    #[test]
    fn misordered_relation_is_rejected() {
        let src = "algebra A { param omega truncate 2; generators K < P; relations { [K, P] = 0; } }";
        let err = parse_bundle(src).unwrap_err();
        assert!(err.msg.contains("higher-ranked"), "{}", err.msg);
    }

    #[test]
    fn scalar_context_rejects_generator_values() {
        let src = "algebra A { param omega truncate 2; generators K < P; relations { } counit { K = P; } }";
        let err = parse_bundle(src).unwrap_err();
        assert!(err.msg.contains("must be scalar"), "{}", err.msg);
    }

    #[test]
    fn unknown_symbol_is_reported_with_location() {
        let src = "algebra A { param omega truncate 2; generators K; relations { } antipode { K = -Q; } }";
        let err = parse_bundle(src).unwrap_err();
        assert!(err.msg.contains("unknown symbol `Q`"), "{}", err.msg);
    }

    #[test]
    fn roundtrip_is_a_fixed_point() {
        let bundle = parse_bundle(MINI).unwrap();
        let text = bundle.to_canonical_text();
        let reparsed = parse_bundle(&text).unwrap();
        assert_eq!(bundle, reparsed);
        // and serialization is stable from there on
        assert_eq!(text, reparsed.to_canonical_text());
    }
}
