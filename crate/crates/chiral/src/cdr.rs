//! The chiral de Rham complex of a patch `U × Tᵐ`, its differential `D`, the
//! homotopy `G₀`, the twisted differential `D_H`, coordinate changes and the
//! presented `H`-twisted algebra with its untwisting map.

use crate::coeff::{CoeffError, CoeffFn, CoordinateSystem};
use crate::geom::{DiffForm, VectorField};
use crate::scalar::Scalar;
use crate::va::{
    FieldExpr, FieldFamilies, GenId, GenKind, Jet, Mono, VaContext, VaError, VaHom,
};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CdrError {
    #[error(transparent)]
    Va(#[from] VaError),
    #[error(transparent)]
    Coeff(#[from] CoeffError),
    #[error("twist form must be a closed 3-form: {0}")]
    BadTwist(String),
    #[error("coordinate maps are not mutually inverse")]
    NotInverse,
    #[error("element is not weight-homogeneous of positive weight")]
    BadWeight,
    #[error("element is not closed under the twisted differential")]
    NotClosed,
    #[error("witness iteration did not terminate")]
    NoConvergence,
}

/// Fields generating the topological vertex algebra of the patch.
#[derive(Clone, Debug)]
pub struct StructureFields {
    pub j: FieldExpr,
    pub q: FieldExpr,
    pub g: FieldExpr,
    pub l: FieldExpr,
}

/// Sections of the chiral de Rham complex over a coordinate patch.
#[derive(Clone)]
pub struct Patch {
    ctx: Arc<VaContext>,
    fields: Arc<StructureFields>,
}

/// A closed 3-form with its weight-zero field.
#[derive(Clone, Debug)]
pub struct TwistData {
    h: DiffForm,
    field: FieldExpr,
}

impl TwistData {
    pub fn form(&self) -> &DiffForm {
        &self.h
    }

    pub fn field(&self) -> &FieldExpr {
        &self.field
    }
}

/// `Σ f_I :c^{i₁}⋯c^{i_k}:` for a form on `ctx`, which must contain the `c` fields.
pub fn form_field(ctx: &VaContext, w: &DiffForm) -> Result<FieldExpr, VaError> {
    let mut out = FieldExpr::zero(ctx);
    for (idx, f) in w.terms() {
        let mut jets = Vec::new();
        for &i in idx {
            let g = ctx
                .field_id(GenKind::C, i)
                .ok_or_else(|| VaError::UnknownGenerator(format!("c[{}]", i + 1)))?;
            jets.push((Jet { gen: g as u16, k: 0 }, 1));
        }
        out.add_assign(&FieldExpr::state(ctx, Mono(jets), f.clone()));
    }
    Ok(out)
}

/// Inverse of [`form_field`] on the weight-zero `c`-sector.
pub fn field_form(ctx: &VaContext, e: &FieldExpr) -> Option<DiffForm> {
    let (n, m) = ctx.dims();
    let mut w = DiffForm::zero(n, m);
    for (mono, f) in e.terms() {
        let mut idx = Vec::new();
        for j in mono.jets() {
            let g = ctx.generator(j.gen as usize);
            if g.kind != GenKind::C || j.k != 0 {
                return None;
            }
            idx.push(g.index);
        }
        w.add_term(idx, f.clone());
    }
    Some(w)
}

fn unit_field(n: usize, m: usize, i: usize) -> VectorField {
    VectorField::coord(n, m, i, CoeffFn::one(n, m))
}

impl Patch {
    pub fn new(coords: CoordinateSystem) -> Result<Self, CdrError> {
        let ctx = VaContext::new(coords, FieldFamilies::ALL, &[]).finalize()?;
        let fields = Arc::new(structure_fields_in(&ctx)?);
        Ok(Patch { ctx, fields })
    }

    pub fn standard(n: usize, m: usize) -> Result<Self, CdrError> {
        Patch::new(CoordinateSystem::standard(n, m))
    }

    pub fn ctx(&self) -> &Arc<VaContext> {
        &self.ctx
    }

    pub fn dims(&self) -> (usize, usize) {
        self.ctx.dims()
    }

    pub fn dim(&self) -> usize {
        self.ctx.coords().dim()
    }

    fn field(&self, kind: GenKind, i: usize) -> Result<FieldExpr, CdrError> {
        let id = self
            .ctx
            .field_id(kind, i)
            .ok_or(CoeffError::UnknownCoordinate(i))?;
        Ok(self.ctx.gen(id)?)
    }

    pub fn b(&self, i: usize) -> Result<FieldExpr, CdrError> {
        self.field(GenKind::B, i)
    }

    pub fn c(&self, i: usize) -> Result<FieldExpr, CdrError> {
        self.field(GenKind::C, i)
    }

    pub fn beta(&self, i: usize) -> Result<FieldExpr, CdrError> {
        self.field(GenKind::Beta, i)
    }

    pub fn dgamma(&self, i: usize, k: u16) -> Result<FieldExpr, CdrError> {
        let id = self
            .ctx
            .field_id(GenKind::Gamma, i)
            .ok_or(CoeffError::UnknownCoordinate(i))?;
        Ok(self.ctx.jet(id, k)?)
    }

    pub fn function(&self, f: CoeffFn) -> FieldExpr {
        FieldExpr::function(&self.ctx, f)
    }

    pub fn form(&self, w: &DiffForm) -> Result<FieldExpr, CdrError> {
        Ok(form_field(&self.ctx, w)?)
    }

    pub fn to_form(&self, e: &FieldExpr) -> Option<DiffForm> {
        field_form(&self.ctx, e)
    }

    pub fn unit_vector(&self, i: usize) -> VectorField {
        let (n, m) = self.dims();
        unit_field(n, m, i)
    }

    /// `ι_X = Σ :fᵢ bⁱ:`.
    pub fn iota(&self, x: &VectorField) -> Result<FieldExpr, CdrError> {
        let mut out = FieldExpr::zero(&self.ctx);
        for (i, f) in x.comps.iter().enumerate() {
            if f.is_zero() {
                continue;
            }
            out.add_assign(&self.ctx.wick(&self.function(f.clone()), &self.b(i)?)?);
        }
        Ok(out)
    }

    /// `L_X = Σ :βⁱfᵢ: + Σ :(∂fⱼ/∂γⁱ) cⁱ bʲ:`.
    pub fn lie(&self, x: &VectorField) -> Result<FieldExpr, CdrError> {
        lie_local(&self.ctx, x)
    }

    pub fn structure_fields(&self) -> &StructureFields {
        &self.fields
    }

    /// `D = Q₀`.
    pub fn d(&self, a: &FieldExpr) -> Result<FieldExpr, CdrError> {
        Ok(self.ctx.circle(&self.fields.q, 0, a)?)
    }

    /// `G₀ = G∘₁`.
    pub fn g0(&self, a: &FieldExpr) -> Result<FieldExpr, CdrError> {
        Ok(self.ctx.circle(&self.fields.g, 1, a)?)
    }

    /// `L₀ = L∘₁`.
    pub fn l0(&self, a: &FieldExpr) -> Result<FieldExpr, CdrError> {
        Ok(self.ctx.circle(&self.fields.l, 1, a)?)
    }

    pub fn twist(&self, h: DiffForm) -> Result<TwistData, CdrError> {
        if h.dims() != self.dims() {
            return Err(CdrError::BadTwist("dimension mismatch".into()));
        }
        if !h.is_zero() && h.degree() != Some(3) {
            return Err(CdrError::BadTwist("not homogeneous of degree 3".into()));
        }
        if !h.d().is_zero() {
            return Err(CdrError::BadTwist("dH ≠ 0".into()));
        }
        let field = self.form(&h)?;
        Ok(TwistData { h, field })
    }

    /// `D_H(a) = D(a) + :Ha:`.
    pub fn d_h(&self, t: &TwistData, a: &FieldExpr) -> Result<FieldExpr, CdrError> {
        Ok(self.d(a)?.add(&self.ctx.wick(&t.field, a)?))
    }

    /// `b` with `D_H(b) = a`, cancelling the lowest-degree piece by
    /// `(1/w)·G₀` until nothing is left.
    pub fn vanishing_witness(&self, t: &TwistData, a: &FieldExpr) -> Result<FieldExpr, CdrError> {
        let w = match self.ctx.weight_of(a) {
            Some(w) if w > 0 => w,
            None if a.is_zero() => return Ok(a.clone()),
            _ => return Err(CdrError::BadWeight),
        };
        if !self.d_h(t, a)?.is_zero() {
            return Err(CdrError::NotClosed);
        }
        let inv_w = Scalar::ratio(1, w);
        let mut rest = a.clone();
        let mut b = FieldExpr::zero(&self.ctx);
        for _ in 0..64 {
            let parts = self.ctx.grade(&rest);
            let lowest = match parts.into_iter().min_by_key(|((_, d), _)| *d) {
                Some((_, p)) => p,
                None => return Ok(b),
            };
            let step = self.g0(&lowest)?.scale(&inv_w);
            rest = rest.sub(&self.d_h(t, &step)?);
            b.add_assign(&step);
        }
        Err(CdrError::NoConvergence)
    }

    /// PBW basis states of weight `w` whose coefficients are flat monomials of
    /// degree at most `max_deg` (angular modes are not enumerated).
    pub fn basis(&self, w: i64, max_deg: u32) -> Vec<FieldExpr> {
        let (n, m) = self.dims();
        let monos = self.ctx.pbw_monos(w, &|_| true);
        let coeffs = coeff_monomials(n, m, max_deg);
        let mut out = Vec::new();
        for mono in &monos {
            for f in &coeffs {
                out.push(FieldExpr::state(&self.ctx, mono.clone(), f.clone()));
            }
        }
        out
    }
}

/// Monomials in the flat coordinates of total degree at most `max_deg`.
pub fn coeff_monomials(n: usize, m: usize, max_deg: u32) -> Vec<CoeffFn> {
    let mut out = vec![CoeffFn::one(n, m)];
    let mut layer = vec![(CoeffFn::one(n, m), 0usize)];
    for _ in 0..max_deg {
        let mut next = Vec::new();
        for (f, start) in &layer {
            for i in *start..n {
                let g = f.mul(&CoeffFn::flat_coord(n, m, i).expect("flat index"));
                out.push(g.clone());
                next.push((g, i));
            }
        }
        layer = next;
    }
    out
}

fn structure_fields_in(ctx: &VaContext) -> Result<StructureFields, VaError> {
    let dim = ctx.coords().dim();
    let mut j = FieldExpr::zero(ctx);
    let mut q = FieldExpr::zero(ctx);
    let mut g = FieldExpr::zero(ctx);
    let mut l = FieldExpr::zero(ctx);
    for i in 0..dim {
        let id = |k| ctx.field_id(k, i).expect("free field present");
        let b = ctx.gen(id(GenKind::B))?;
        let c = ctx.gen(id(GenKind::C))?;
        let be = ctx.gen(id(GenKind::Beta))?;
        let dg = ctx.jet(id(GenKind::Gamma), 1)?;
        let dc = ctx.derivative(&c)?;
        j.add_assign(&ctx.wick(&c, &b)?);
        q.add_assign(&ctx.wick(&be, &c)?);
        g.add_assign(&ctx.wick(&b, &dg)?);
        l.add_assign(&ctx.wick(&be, &dg)?);
        l = l.sub(&ctx.wick(&b, &dc)?);
    }
    Ok(StructureFields { j, q, g, l })
}

/// The local formula `Σ :βⁱfᵢ: + Σ :(∂fⱼ/∂γⁱ) cⁱ bʲ:` in any context with free-field names.
pub fn lie_local(ctx: &VaContext, x: &VectorField) -> Result<FieldExpr, CdrError> {
    let mut out = FieldExpr::zero(ctx);
    let gen = |k, i| -> Result<FieldExpr, CdrError> {
        let id = ctx.field_id(k, i).ok_or(CoeffError::UnknownCoordinate(i))?;
        Ok(ctx.gen(id)?)
    };
    for (j, fj) in x.comps.iter().enumerate() {
        if fj.is_zero() {
            continue;
        }
        let f = FieldExpr::function(ctx, fj.clone());
        out.add_assign(&ctx.wick(&gen(GenKind::Beta, j)?, &f)?);
        for i in 0..x.comps.len() {
            let d = fj.partial(i)?;
            if d.is_zero() {
                continue;
            }
            let cb = ctx.wick(&gen(GenKind::C, i)?, &gen(GenKind::B, j)?)?;
            out.add_assign(&ctx.wick(&FieldExpr::function(ctx, d), &cb)?);
        }
    }
    Ok(out)
}

/// `ι_X` by the local formula in any context with free-field names.
pub fn iota_local(ctx: &VaContext, x: &VectorField) -> Result<FieldExpr, CdrError> {
    let mut out = FieldExpr::zero(ctx);
    for (i, f) in x.comps.iter().enumerate() {
        if f.is_zero() {
            continue;
        }
        let id = ctx
            .field_id(GenKind::B, i)
            .ok_or(CoeffError::UnknownCoordinate(i))?;
        out.add_assign(&ctx.wick(&FieldExpr::function(ctx, f.clone()), &ctx.gen(id)?)?);
    }
    Ok(out)
}

/// Compare `[φx λ φy]` with `φ([x λ y])` for every pair of source generators;
/// returns the first mismatch as `(x, y)` names.
pub fn check_hom_brackets(hom: &VaHom, src: &VaContext, dst: &VaContext) -> Result<Option<(String, String)>, VaError> {
    let gens: Vec<GenId> = (0..src.generators().len()).collect();
    for &x in &gens {
        for &y in &gens {
            let gx = src.generator(x);
            let gy = src.generator(y);
            if gx.kind == GenKind::Gamma && gy.kind == GenKind::Gamma {
                continue;
            }
            let fx = src_gen_field(src, x)?;
            let fy = src_gen_field(src, y)?;
            let lhs = dst.lambda_bracket(&hom.apply(&fx)?, &hom.apply(&fy)?)?;
            let rhs = src.lambda_bracket(&fx, &fy)?;
            let mut rhs_img = Vec::new();
            for e in &rhs.entries {
                rhs_img.push(hom.apply(e)?);
            }
            while rhs_img.last().map(|e| e.is_zero()).unwrap_or(false) {
                rhs_img.pop();
            }
            if lhs.entries != rhs_img {
                return Ok(Some((gx.name.clone(), gy.name.clone())));
            }
        }
    }
    Ok(None)
}

/// A generator as a field; for `γⁱ` on an angular coordinate use `∂γⁱ`.
fn src_gen_field(ctx: &VaContext, g: GenId) -> Result<FieldExpr, VaError> {
    let gen = ctx.generator(g);
    if gen.kind == GenKind::Gamma && ctx.coords().is_angular(gen.index) {
        return ctx.jet(g, 1);
    }
    ctx.gen(g)
}

/// A polynomial change of flat coordinates `γ̃ = g(γ)`, `γ = f(γ̃)`.
pub struct CoordinateChange {
    forward: Vec<CoeffFn>,
    inverse: Vec<CoeffFn>,
}

impl CoordinateChange {
    pub fn new(forward: Vec<CoeffFn>, inverse: Vec<CoeffFn>) -> Result<Self, CdrError> {
        let n = forward.len();
        if inverse.len() != n || forward.iter().chain(&inverse).any(|f| f.dims() != (n, 0)) {
            return Err(CdrError::NotInverse);
        }
        for i in 0..n {
            let x = CoeffFn::flat_coord(n, 0, i)?;
            if inverse[i].substitute(&forward)? != x || forward[i].substitute(&inverse)? != x {
                return Err(CdrError::NotInverse);
            }
        }
        Ok(CoordinateChange { forward, inverse })
    }

    pub fn forward(&self) -> &[CoeffFn] {
        &self.forward
    }

    pub fn inverse(&self) -> &[CoeffFn] {
        &self.inverse
    }

    /// `h ∘ self`.
    pub fn then(&self, h: &CoordinateChange) -> Result<CoordinateChange, CdrError> {
        let fwd = h
            .forward
            .iter()
            .map(|p| p.substitute(&self.forward))
            .collect::<Result<Vec<_>, _>>()?;
        let inv = self
            .inverse
            .iter()
            .map(|p| p.substitute(&h.inverse))
            .collect::<Result<Vec<_>, _>>()?;
        CoordinateChange::new(fwd, inv)
    }

    /// The map sending the generators of the `γ̃` patch to their expressions
    /// in the `γ` patch.
    pub fn hom<'a>(&self, tilde: &'a Patch, base: &'a Patch) -> Result<VaHom<'a>, CdrError> {
        let n = self.forward.len();
        let bctx = base.ctx();
        let tctx = tilde.ctx();
        let mut hom = VaHom::new(tctx, bctx)?.with_functions(self.forward.clone(), vec![]);
        let at_g = |p: &CoeffFn| p.substitute(&self.forward);
        for i in 0..n {
            let mut ct = FieldExpr::zero(bctx);
            let mut bt = FieldExpr::zero(bctx);
            let mut bet = FieldExpr::zero(bctx);
            for j in 0..n {
                let dg = self.forward[i].partial(j)?;
                if !dg.is_zero() {
                    ct.add_assign(&bctx.wick(&base.function(dg), &base.c(j)?)?);
                }
                let df = at_g(&self.inverse[j].partial(i)?)?;
                if !df.is_zero() {
                    bt.add_assign(&bctx.wick(&base.function(df.clone()), &base.b(j)?)?);
                    bet.add_assign(&bctx.wick(&base.beta(j)?, &base.function(df))?);
                }
            }
            for k in 0..n {
                for l in 0..n {
                    let d2 = at_g(&self.inverse[k].partial(i)?.partial(l)?)?;
                    if d2.is_zero() {
                        continue;
                    }
                    for r in 0..n {
                        let dg = self.forward[l].partial(r)?;
                        if dg.is_zero() {
                            continue;
                        }
                        let cb = bctx.wick(&base.c(r)?, &base.b(k)?)?;
                        let coef = base.function(d2.mul(&dg));
                        bet.add_assign(&bctx.wick(&coef, &cb)?);
                    }
                }
            }
            let id = |k| tctx.field_id(k, i).expect("free field present");
            hom.set(id(GenKind::C), ct);
            hom.set(id(GenKind::B), bt);
            hom.set(id(GenKind::Beta), bet);
        }
        Ok(hom)
    }
}

/// The presented `H`-twisted algebra: same generators, brackets
/// `[β̃ⁱ λ b̃ʲ] = ι_iι_jH` and `[β̃ⁱ λ β̃ʲ] = d(ι_iι_jH)`.
pub struct TwistedPatch {
    ctx: Arc<VaContext>,
    h: DiffForm,
}

impl TwistedPatch {
    pub fn new(coords: CoordinateSystem, h: &DiffForm) -> Result<Self, CdrError> {
        let (n, m) = (coords.n_flat(), coords.n_angular());
        if h.dims() != (n, m) {
            return Err(CdrError::BadTwist("dimension mismatch".into()));
        }
        if !h.d().is_zero() {
            return Err(CdrError::BadTwist("dH ≠ 0".into()));
        }
        let dim = n + m;
        let mut ctx = VaContext::new(coords, FieldFamilies::ALL, &[]);
        ctx.use_shifted_grading();
        let id = |ctx: &VaContext, k, i| ctx.field_id(k, i).expect("free field present");
        for i in 0..dim {
            for j in 0..dim {
                let w = h
                    .contract(&unit_field(n, m, j))
                    .contract(&unit_field(n, m, i));
                if w.is_zero() {
                    continue;
                }
                let e = form_field(&ctx, &w)?;
                let (bi, bj) = (id(&ctx, GenKind::Beta, i), id(&ctx, GenKind::B, j));
                ctx.set_bracket(bi, bj, vec![e]);
                if i < j {
                    let de = form_field(&ctx, &w.d())?;
                    let bj2 = id(&ctx, GenKind::Beta, j);
                    ctx.set_bracket(bi, bj2, vec![de]);
                }
            }
        }
        Ok(TwistedPatch {
            ctx: ctx.finalize()?,
            h: h.clone(),
        })
    }

    pub fn ctx(&self) -> &Arc<VaContext> {
        &self.ctx
    }

    pub fn h(&self) -> &DiffForm {
        &self.h
    }

    pub fn form(&self, w: &DiffForm) -> Result<FieldExpr, CdrError> {
        Ok(form_field(&self.ctx, w)?)
    }

    /// `(ι_X H)~`.
    pub fn iota_h(&self, x: &VectorField) -> Result<FieldExpr, CdrError> {
        self.form(&self.h.contract(x))
    }

    pub fn iota(&self, x: &VectorField) -> Result<FieldExpr, CdrError> {
        iota_local(&self.ctx, x)
    }

    /// `L̃_X` by the local formula.
    pub fn lie(&self, x: &VectorField) -> Result<FieldExpr, CdrError> {
        lie_local(&self.ctx, x)
    }

    /// `Q̃ = Σ :(β̃ⁱ − (ι_iH)~) c̃ⁱ:`.
    pub fn q(&self) -> Result<FieldExpr, CdrError> {
        let (n, m) = self.ctx.dims();
        let mut q = FieldExpr::zero(&self.ctx);
        for i in 0..n + m {
            let be = self.ctx.gen(self.ctx.field_id(GenKind::Beta, i).expect("beta"))?;
            let c = self.ctx.gen(self.ctx.field_id(GenKind::C, i).expect("c"))?;
            let x = be.sub(&self.iota_h(&unit_field(n, m, i))?);
            q.add_assign(&self.ctx.wick(&x, &c)?);
        }
        Ok(q)
    }

    /// `D̃ = Q̃₀`.
    pub fn d(&self, a: &FieldExpr) -> Result<FieldExpr, CdrError> {
        Ok(self.ctx.circle(&self.q()?, 0, a)?)
    }

    /// The untwisting map from the free patch: `βⁱ ↦ β̃ⁱ − (ι_iH)~`, identity on the rest.
    pub fn untwist<'a>(&'a self, free: &'a Patch) -> Result<VaHom<'a>, CdrError> {
        let (n, m) = self.ctx.dims();
        let mut hom = VaHom::new(free.ctx(), &self.ctx)?;
        for i in 0..n + m {
            for k in [GenKind::B, GenKind::C, GenKind::Beta] {
                let src = free.ctx().field_id(k, i).expect("free field");
                let dst = self.ctx.gen(self.ctx.field_id(k, i).expect("twisted field"))?;
                let img = if k == GenKind::Beta {
                    dst.sub(&self.iota_h(&unit_field(n, m, i))?)
                } else {
                    dst
                };
                hom.set(src, img);
            }
        }
        Ok(hom)
    }

    /// The realization `β̃ⁱ ↦ βⁱ + ι_iH` inside the free patch.
    pub fn realize<'a>(&'a self, free: &'a Patch) -> Result<VaHom<'a>, CdrError> {
        let (n, m) = self.ctx.dims();
        let mut hom = VaHom::new(&self.ctx, free.ctx())?;
        for i in 0..n + m {
            for k in [GenKind::B, GenKind::C, GenKind::Beta] {
                let src = self.ctx.field_id(k, i).expect("twisted field");
                let dst = free.ctx().gen(free.ctx().field_id(k, i).expect("free field"))?;
                let img = if k == GenKind::Beta {
                    dst.add(&free.form(&self.h.contract(&unit_field(n, m, i)))?)
                } else {
                    dst
                };
                hom.set(src, img);
            }
        }
        Ok(hom)
    }
}
