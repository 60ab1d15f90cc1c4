//! Vertex-algebra calculus on PBW states.
//!
//! An element is stored as a sum of canonical states `x₁ x₂ ⋯ x_r · f`, meaning
//! the right-nested normally ordered product `:x₁ :x₂ ⋯ :x_r f:⋯::` where the
//! `xᵢ` are generator jets `∂ᵏg` sorted by (kind, index, k) and `f` is a
//! coefficient function. Kinds are ordered `b < c < β < γ-jet < abstract`.
//!
//! Products are evaluated through modes: a generator mode `g₍ₙ₎` acts on a
//! canonical state by commuting past the leading factor with the commutator
//! formula, and composite modes reduce to generator modes by the Borcherds
//! identity for `(g₍ₘ₎a)₍ₙ₎`. Coefficient functions act through
//! `f(γ(z)) = Σ_α ∂^αf(γ₊(z)) γ₋(z)^α / α!`.

mod engine;
mod hom;
mod print;

pub use hom::{Derivation, VaHom};
pub use print::ExprPrinter;

use crate::coeff::{CoeffError, CoeffFn, CoordinateSystem};
use crate::scalar::Scalar;
use std::collections::{BTreeMap, HashMap};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use thiserror::Error;

pub type GenId = usize;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VaError {
    #[error("expressions belong to different contexts")]
    ContextMismatch,
    #[error("expression is not weight-homogeneous")]
    NotHomogeneous,
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("inconsistent grading in bracket [{0} λ {1}]: {2}")]
    Grading(String, String, String),
    #[error("invalid bracket table: {0}")]
    BadTable(String),
    #[error("angular coordinate `{0}` has no coordinate function in the ring")]
    AngularCoordinate(String),
    #[error(transparent)]
    Coeff(#[from] CoeffError),
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum GenKind {
    B,
    C,
    Beta,
    Gamma,
    Abstract,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn bit(self) -> u8 {
        match self {
            Parity::Even => 0,
            Parity::Odd => 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Generator {
    pub name: String,
    pub kind: GenKind,
    pub index: usize,
    pub parity: Parity,
    pub weight: u32,
    pub degree: i32,
}

/// Declaration of an abstract generator.
#[derive(Clone, Debug)]
pub struct AbstractGen {
    pub name: String,
    pub parity: Parity,
    pub weight: u32,
    pub degree: i32,
}

/// `∂ᵏ` of generator `gen`. Ordering of jets is the canonical PBW order because
/// generator ids are assigned in (kind, index) order.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Jet {
    pub gen: u16,
    pub k: u16,
}

/// Sorted jets with multiplicities; odd jets have multiplicity one.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct Mono(pub Vec<(Jet, u32)>);

impl Mono {
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn jets(&self) -> impl Iterator<Item = Jet> + '_ {
        self.0
            .iter()
            .flat_map(|(j, e)| std::iter::repeat(*j).take(*e as usize))
    }

    /// Split off one copy of the leading jet.
    pub(crate) fn split_first(&self) -> (Jet, Mono) {
        let (j, e) = self.0[0];
        let mut rest = self.0.clone();
        if e == 1 {
            rest.remove(0);
        } else {
            rest[0].1 = e - 1;
        }
        (j, Mono(rest))
    }

    pub(crate) fn prepend(&self, j: Jet) -> Mono {
        let mut v = self.0.clone();
        if let Some(first) = v.first_mut() {
            if first.0 == j {
                first.1 += 1;
                return Mono(v);
            }
            debug_assert!(j < first.0);
        }
        v.insert(0, (j, 1));
        Mono(v)
    }

    /// Insert an even jet at its sorted position.
    pub(crate) fn insert_even(&self, j: Jet, e: u32) -> Mono {
        let mut v = self.0.clone();
        match v.binary_search_by(|(x, _)| x.cmp(&j)) {
            Ok(p) => v[p].1 += e,
            Err(p) => v.insert(p, (j, e)),
        }
        Mono(v)
    }
}

static NEXT_CTX: AtomicU64 = AtomicU64::new(1);

/// A presented vertex algebra: coordinates, generators and primitive λ-brackets.
#[derive(Debug)]
pub struct VaContext {
    id: u64,
    coords: CoordinateSystem,
    gens: Vec<Generator>,
    gamma: Vec<Option<GenId>>,
    by_name: HashMap<String, GenId>,
    table: HashMap<(GenId, GenId), Vec<FieldExpr>>,
    user_set: Vec<(GenId, GenId)>,
    gamma_coeff: Vec<Vec<Scalar>>,
    weight_graded: bool,
}

/// Which free-field families a context contains for every coordinate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FieldFamilies {
    pub bc: bool,
    pub beta_gamma: bool,
}

impl FieldFamilies {
    pub const ALL: FieldFamilies = FieldFamilies {
        bc: true,
        beta_gamma: true,
    };
}

impl VaContext {
    /// A context with the free fields `bⁱ, cⁱ, βⁱ, γⁱ` for each coordinate
    /// (as selected by `fam`) followed by abstract generators. Brackets start
    /// at the free-field values; override with [`VaContext::set_bracket`] and
    /// call [`VaContext::finalize`].
    pub fn new(coords: CoordinateSystem, fam: FieldFamilies, abstracts: &[AbstractGen]) -> Self {
        let dim = coords.dim();
        let mut gens = Vec::new();
        let mut push = |kind, index, name: String, parity, weight, degree| {
            gens.push(Generator {
                name,
                kind,
                index,
                parity,
                weight,
                degree,
            })
        };
        if fam.bc {
            for i in 0..dim {
                push(GenKind::B, i, format!("b[{}]", i + 1), Parity::Odd, 1, -1);
            }
            for i in 0..dim {
                push(GenKind::C, i, format!("c[{}]", i + 1), Parity::Odd, 0, 1);
            }
        }
        if fam.beta_gamma {
            for i in 0..dim {
                push(GenKind::Beta, i, format!("beta[{}]", i + 1), Parity::Even, 1, 0);
            }
            for i in 0..dim {
                push(GenKind::Gamma, i, format!("gamma[{}]", i + 1), Parity::Even, 0, 0);
            }
        }
        for (t, a) in abstracts.iter().enumerate() {
            push(
                GenKind::Abstract,
                t,
                a.name.clone(),
                a.parity,
                a.weight,
                a.degree,
            );
        }
        let by_name = gens
            .iter()
            .enumerate()
            .map(|(i, g)| (g.name.clone(), i))
            .collect();
        let mut gamma = vec![None; dim];
        for (id, g) in gens.iter().enumerate() {
            if g.kind == GenKind::Gamma {
                gamma[g.index] = Some(id);
            }
        }
        let n_g = gens.len();
        let mut ctx = VaContext {
            id: NEXT_CTX.fetch_add(1, Ordering::Relaxed),
            coords,
            gens,
            gamma,
            by_name,
            table: HashMap::new(),
            user_set: Vec::new(),
            gamma_coeff: vec![vec![Scalar::zero(); dim]; n_g],
            weight_graded: true,
        };
        let ids: Vec<(GenId, GenKind, usize)> = ctx
            .gens
            .iter()
            .enumerate()
            .map(|(i, g)| (i, g.kind, g.index))
            .collect();
        for &(x, kx, ix) in &ids {
            for &(y, ky, iy) in &ids {
                if ix != iy {
                    continue;
                }
                let val = match (kx, ky) {
                    (GenKind::Beta, GenKind::Gamma) => Some(1),
                    (GenKind::Gamma, GenKind::Beta) => Some(-1),
                    (GenKind::B, GenKind::C) | (GenKind::C, GenKind::B) => Some(1),
                    _ => None,
                };
                if let Some(v) = val {
                    let e = FieldExpr::constant(&ctx, Scalar::int(v));
                    ctx.table.insert((x, y), vec![e]);
                }
            }
        }
        ctx
    }

    /// Set `[x λ y]` with entry `j` equal to `x₍ⱼ₎y`. The opposite ordering is
    /// filled in by skew-symmetry at [`VaContext::finalize`] unless also set.
    pub fn set_bracket(&mut self, x: GenId, y: GenId, entries: Vec<FieldExpr>) {
        let mut entries = entries;
        while entries.last().map(|e| e.is_zero()).unwrap_or(false) {
            entries.pop();
        }
        self.table.insert((x, y), entries);
        self.user_set.push((x, y));
        if self.table.contains_key(&(y, x)) && !self.user_set.contains(&(y, x)) {
            self.table.remove(&(y, x));
        }
    }

    /// Grade by `wt + deg/2` instead of `(wt, deg)`. Needed when the table
    /// mixes form degrees, as twisted tables do.
    pub fn use_shifted_grading(&mut self) {
        self.weight_graded = false;
    }

    pub fn is_weight_graded(&self) -> bool {
        self.weight_graded
    }

    /// Twice the grading used for termination bounds.
    pub fn mono_grade2(&self, m: &Mono) -> i64 {
        if self.weight_graded {
            2 * self.mono_weight(m)
        } else {
            2 * self.mono_weight(m) + self.mono_degree(m) as i64
        }
    }

    pub(crate) fn gen_grade2(&self, g: GenId) -> i64 {
        let gen = &self.gens[g];
        if self.weight_graded {
            2 * gen.weight as i64
        } else {
            2 * gen.weight as i64 + gen.degree as i64
        }
    }

    /// Validate gradings and the coefficient-function rule, complete the
    /// table by skew-symmetry, and freeze the context.
    pub fn finalize(mut self) -> Result<Arc<VaContext>, VaError> {
        let user = self.user_set.clone();
        // Reverse entries may depend on each other through ∂, so iterate to a fixed point.
        for _ in 0..4 {
            let mut changed = false;
            for &(x, y) in &user {
                if self.user_set.contains(&(y, x)) || x == y {
                    continue;
                }
                let entries = self.table.get(&(x, y)).cloned().unwrap_or_default();
                let rev = self.skew_entries(x, y, &entries);
                if self.table.get(&(y, x)) != Some(&rev) {
                    self.table.insert((y, x), rev);
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        for ((x, y), entries) in &self.table {
            self.check_entries(*x, *y, entries)?;
        }
        for (&(x, y), entries) in &self.table {
            if self.gens[y].kind == GenKind::Gamma {
                let i = self.gens[y].index;
                self.gamma_coeff[x][i] = entries
                    .first()
                    .and_then(|e| e.as_constant())
                    .unwrap_or_else(Scalar::zero);
            }
        }
        Ok(Arc::new(self))
    }

    fn check_entries(&self, x: GenId, y: GenId, entries: &[FieldExpr]) -> Result<(), VaError> {
        let gx = &self.gens[x];
        let gy = &self.gens[y];
        let err = |msg: String| VaError::Grading(gx.name.clone(), gy.name.clone(), msg);
        if gx.kind == GenKind::Gamma || gy.kind == GenKind::Gamma {
            for (j, e) in entries.iter().enumerate() {
                let ok = if j == 0 {
                    e.as_constant().is_some()
                } else {
                    e.is_zero()
                };
                if !ok {
                    return Err(VaError::BadTable(format!(
                        "bracket of {} with {} must be a constant",
                        gx.name, gy.name
                    )));
                }
            }
        }
        for (j, e) in entries.iter().enumerate() {
            for (mono, _) in e.terms() {
                let p = self.mono_parity(mono);
                if p != (gx.parity.bit() + gy.parity.bit()) % 2 {
                    return Err(err(format!("entry {j} has the wrong parity")));
                }
                if !self.weight_graded {
                    let g = self.mono_grade2(mono);
                    let expect = self.gen_grade2(x) + self.gen_grade2(y) - 2 * j as i64 - 2;
                    if g != expect {
                        return Err(err(format!("entry {j} has shifted weight {g}/2, expected {expect}/2")));
                    }
                    continue;
                }
                let w = self.mono_weight(mono);
                let expect = gx.weight as i64 + gy.weight as i64 - j as i64 - 1;
                if w != expect {
                    return Err(err(format!("entry {j} has weight {w}, expected {expect}")));
                }
                let d = self.mono_degree(mono);
                if d != gx.degree + gy.degree {
                    return Err(err(format!(
                        "entry {j} has degree {d}, expected {}",
                        gx.degree + gy.degree
                    )));
                }
            }
        }
        Ok(())
    }

    /// `y₍ₗ₎x = −(−1)^{|x||y|} Σ_{j≥l} (−1)ʲ ∂^{j−l}(x₍ⱼ₎y)/(j−l)!`.
    fn skew_entries(&self, x: GenId, y: GenId, e: &[FieldExpr]) -> Vec<FieldExpr> {
        let sign = if self.gens[x].parity == Parity::Odd && self.gens[y].parity == Parity::Odd {
            Scalar::one()
        } else {
            Scalar::int(-1)
        };
        let mut derivs: Vec<Vec<FieldExpr>> = Vec::new();
        for ej in e {
            let mut ds = vec![ej.clone()];
            for t in 1..=e.len() {
                let next = self.derivative_u(&ds[t - 1]);
                ds.push(next);
            }
            derivs.push(ds);
        }
        let mut out = Vec::new();
        for l in 0..e.len() {
            let mut acc = FieldExpr::zero(self);
            for j in l..e.len() {
                let c = crate::scalar::factorial((j - l) as u32)
                    .inv()
                    .unwrap();
                let c = if j % 2 == 0 { c } else { -c };
                acc.add_assign(&derivs[j][j - l].scale(&c));
            }
            out.push(acc.scale(&sign));
        }
        while out.last().map(|e| e.is_zero()).unwrap_or(false) {
            out.pop();
        }
        out
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn coords(&self) -> &CoordinateSystem {
        &self.coords
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.coords.n_flat(), self.coords.n_angular())
    }

    pub fn generators(&self) -> &[Generator] {
        &self.gens
    }

    pub fn generator(&self, id: GenId) -> &Generator {
        &self.gens[id]
    }

    pub fn gen_id(&self, name: &str) -> Result<GenId, VaError> {
        self.by_name
            .get(name)
            .copied()
            .ok_or_else(|| VaError::UnknownGenerator(name.to_string()))
    }

    /// Generator id of a free field of `kind` on coordinate `i` (0-based).
    pub fn field_id(&self, kind: GenKind, i: usize) -> Option<GenId> {
        self.gens
            .iter()
            .position(|g| g.kind == kind && g.index == i)
    }

    pub fn gamma_id(&self, i: usize) -> Option<GenId> {
        self.gamma.get(i).copied().flatten()
    }

    pub fn bracket_entries(&self, x: GenId, y: GenId) -> &[FieldExpr] {
        self.table.get(&(x, y)).map(|v| v.as_slice()).unwrap_or(&[])
    }

    pub fn mono_weight(&self, m: &Mono) -> i64 {
        m.0.iter()
            .map(|(j, e)| (*e as i64) * (self.gens[j.gen as usize].weight as i64 + j.k as i64))
            .sum()
    }

    pub fn mono_degree(&self, m: &Mono) -> i32 {
        m.0.iter()
            .map(|(j, e)| (*e as i32) * self.gens[j.gen as usize].degree)
            .sum()
    }

    pub fn mono_parity(&self, m: &Mono) -> u8 {
        (m.0.iter()
            .map(|(j, e)| (*e as u32) * self.gens[j.gen as usize].parity.bit() as u32)
            .sum::<u32>()
            % 2) as u8
    }

    pub(crate) fn check(&self, e: &FieldExpr) -> Result<(), VaError> {
        if e.ctx != self.id {
            Err(VaError::ContextMismatch)
        } else {
            Ok(())
        }
    }

    /// The generator `g` as an element. For `γⁱ` this is the coordinate function.
    pub fn gen(&self, g: GenId) -> Result<FieldExpr, VaError> {
        let gen = &self.gens[g];
        if gen.kind == GenKind::Gamma {
            let (n, m) = self.dims();
            if self.coords.is_angular(gen.index) {
                return Err(VaError::AngularCoordinate(
                    self.coords.name(gen.index).to_string(),
                ));
            }
            return Ok(FieldExpr::function(self, CoeffFn::flat_coord(n, m, gen.index)?));
        }
        Ok(FieldExpr::state(
            self,
            Mono(vec![(Jet { gen: g as u16, k: 0 }, 1)]),
            CoeffFn::one(self.dims().0, self.dims().1),
        ))
    }

    pub fn gen_by_name(&self, name: &str) -> Result<FieldExpr, VaError> {
        self.gen(self.gen_id(name)?)
    }

    /// `∂ᵏ g` as a canonical state (k ≥ 1 allowed for every kind).
    pub fn jet(&self, g: GenId, k: u16) -> Result<FieldExpr, VaError> {
        if k == 0 {
            return self.gen(g);
        }
        Ok(FieldExpr::state(
            self,
            Mono(vec![(Jet { gen: g as u16, k }, 1)]),
            CoeffFn::one(self.dims().0, self.dims().1),
        ))
    }
}

/// A finite sum of canonical states with coefficient functions.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FieldExpr {
    ctx: u64,
    n: u16,
    m: u16,
    terms: BTreeMap<Mono, CoeffFn>,
}

impl FieldExpr {
    pub fn zero(ctx: &VaContext) -> Self {
        let (n, m) = ctx.dims();
        FieldExpr {
            ctx: ctx.id,
            n: n as u16,
            m: m as u16,
            terms: BTreeMap::new(),
        }
    }

    pub(crate) fn zero_like(&self) -> Self {
        FieldExpr {
            ctx: self.ctx,
            n: self.n,
            m: self.m,
            terms: BTreeMap::new(),
        }
    }

    /// The vacuum `1`.
    pub fn one(ctx: &VaContext) -> Self {
        FieldExpr::constant(ctx, Scalar::one())
    }

    pub fn constant(ctx: &VaContext, c: Scalar) -> Self {
        let (n, m) = ctx.dims();
        FieldExpr::function(ctx, CoeffFn::constant(n, m, c))
    }

    pub fn function(ctx: &VaContext, f: CoeffFn) -> Self {
        FieldExpr::state(ctx, Mono::default(), f)
    }

    /// The canonical state `mono · f`.
    pub fn state(ctx: &VaContext, mono: Mono, f: CoeffFn) -> Self {
        let mut e = FieldExpr::zero(ctx);
        e.add_state(mono, f);
        e
    }

    pub(crate) fn state_like(&self, mono: Mono, f: CoeffFn) -> Self {
        let mut e = self.zero_like();
        e.add_state(mono, f);
        e
    }

    pub fn ctx_id(&self) -> u64 {
        self.ctx
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.n as usize, self.m as usize)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Mono, &CoeffFn)> {
        self.terms.iter()
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The constant value if this is a scalar multiple of the vacuum.
    pub fn as_constant(&self) -> Option<Scalar> {
        if self.terms.is_empty() {
            return Some(Scalar::zero());
        }
        if self.terms.len() == 1 {
            let (mono, f) = self.terms.iter().next().unwrap();
            if mono.is_empty() {
                return f.as_constant();
            }
        }
        None
    }

    /// The coefficient function if this lies in the function sector.
    pub fn as_function(&self) -> Option<CoeffFn> {
        if self.terms.is_empty() {
            let (n, m) = self.dims();
            return Some(CoeffFn::zero(n, m));
        }
        if self.terms.len() == 1 {
            let (mono, f) = self.terms.iter().next().unwrap();
            if mono.is_empty() {
                return Some(f.clone());
            }
        }
        None
    }

    pub fn add_state(&mut self, mono: Mono, f: CoeffFn) {
        if f.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(mono) {
            Entry::Vacant(e) => {
                e.insert(f);
            }
            Entry::Occupied(mut e) => {
                e.get_mut().add_assign(&f);
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn add_assign(&mut self, o: &FieldExpr) {
        debug_assert_eq!(self.ctx, o.ctx, "context mismatch");
        for (mono, f) in &o.terms {
            self.add_state(mono.clone(), f.clone());
        }
    }

    pub fn add_scaled(&mut self, o: &FieldExpr, c: &Scalar) {
        if c.is_zero() {
            return;
        }
        for (mono, f) in &o.terms {
            self.add_state(mono.clone(), f.scale(c));
        }
    }

    pub fn add(&self, o: &FieldExpr) -> FieldExpr {
        let mut r = self.clone();
        r.add_assign(o);
        r
    }

    pub fn sub(&self, o: &FieldExpr) -> FieldExpr {
        let mut r = self.clone();
        r.add_scaled(o, &Scalar::int(-1));
        r
    }

    pub fn neg(&self) -> FieldExpr {
        self.scale(&Scalar::int(-1))
    }

    pub fn scale(&self, c: &Scalar) -> FieldExpr {
        let mut r = self.zero_like();
        r.add_scaled(self, c);
        r
    }

    /// Keep only terms with the given predicate on monomials.
    pub fn filter(&self, mut keep: impl FnMut(&Mono) -> bool) -> FieldExpr {
        let mut r = self.zero_like();
        for (mono, f) in &self.terms {
            if keep(mono) {
                r.add_state(mono.clone(), f.clone());
            }
        }
        r
    }
}

/// The singular part `Σ λᵏ/k! · a∘ₖb` of an OPE; entry `k` is `a∘ₖb`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LambdaPoly {
    pub entries: Vec<FieldExpr>,
}

impl LambdaPoly {
    pub fn entry(&self, k: usize) -> Option<&FieldExpr> {
        self.entries.get(k)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| e.is_zero())
    }

    pub fn degree(&self) -> Option<usize> {
        self.entries.iter().rposition(|e| !e.is_zero())
    }

    pub fn sub(&self, o: &LambdaPoly) -> LambdaPoly {
        let len = self.entries.len().max(o.entries.len());
        let mut entries = Vec::new();
        for k in 0..len {
            let a = self.entries.get(k);
            let b = o.entries.get(k);
            let e = match (a, b) {
                (Some(a), Some(b)) => a.sub(b),
                (Some(a), None) => a.clone(),
                (None, Some(b)) => b.neg(),
                (None, None) => unreachable!(),
            };
            entries.push(e);
        }
        while entries.last().map(|e| e.is_zero()).unwrap_or(false) {
            entries.pop();
        }
        LambdaPoly { entries }
    }
}

impl std::fmt::Debug for FieldExpr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(mono, c)| {
                let js: Vec<String> = mono
                    .jets()
                    .map(|j| format!("g{}^({})", j.gen, j.k))
                    .collect();
                format!("[{}]({:?})", js.join(" "), c)
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}
