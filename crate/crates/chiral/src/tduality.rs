//! Chiral T-duality on a trivialized circle bundle `W × S¹` over a flat base
//! patch `W`.
//!
//! Two models are used. [`BundlePatch`] is the full chiral de Rham complex of
//! the total patch, with connection `A = dθ + a`; it hosts `Γ^A`, `ξ^A` and the
//! invariance test. [`QuotientContext`] is the presented algebra of invariants
//! modulo `L_A − H⁽²⁾`: generators `bⁱ = ι_{∂ᵢ}`, `βⁱ = L_{∂ᵢ}`, `cⁱ`, `γⁱ` of
//! the base together with abstract odd `A` (weight 0) and `ι_A` (weight 1).
//! Its table is checked against the total patch by realizing every generator
//! there and dropping the ideal generated by `L_A = β_θ`.

use crate::cdr::{form_field, iota_local, lie_local, CdrError, Patch};
use crate::coeff::{CoeffError, CoeffFn, CoordinateSystem};
use crate::courant::{hori_t, CourantError, InvariantForm, ReductionData};
use crate::geom::{DiffForm, VectorField};
use crate::scalar::{binomial, factorial, Scalar};
use crate::va::{
    AbstractGen, Derivation, FieldExpr, FieldFamilies, GenId, GenKind, Parity, VaContext,
    VaError, VaHom,
};
use crate::sample::{self, SampleRng};
use rand::Rng;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TdualityError {
    #[error(transparent)]
    Va(#[from] VaError),
    #[error(transparent)]
    Cdr(#[from] CdrError),
    #[error(transparent)]
    Coeff(#[from] CoeffError),
    #[error(transparent)]
    Courant(#[from] CourantError),
    #[error("base patches must be flat, got {0} angular coordinates")]
    AngularBase(usize),
    #[error("twist data mismatch: {0}")]
    DataMismatch(String),
    #[error("mode word operator is not weight-homogeneous")]
    NotHomogeneous,
}

type Result<T> = std::result::Result<T, TdualityError>;

fn neg() -> Scalar {
    Scalar::int(-1)
}

fn unit(n: usize, m: usize, i: usize) -> VectorField {
    VectorField::coord(n, m, i, CoeffFn::one(n, m))
}

/// The full chiral de Rham complex of `W × S¹` with connection `A = dθ + a`.
pub struct BundlePatch {
    total: Patch,
    a: DiffForm,
    n: usize,
}

impl BundlePatch {
    /// `a` is a 1-form on the flat base `(n, 0)`.
    pub fn new(a: DiffForm) -> Result<Self> {
        let (n, m) = a.dims();
        if m != 0 {
            return Err(TdualityError::AngularBase(m));
        }
        if a.terms().any(|(i, _)| i.len() != 1) {
            return Err(TdualityError::DataMismatch("a must be a 1-form".into()));
        }
        let base = CoordinateSystem::standard(n, 0);
        let coords = CoordinateSystem::new(base.flat_names().to_vec(), vec!["theta".into()])?;
        Ok(BundlePatch {
            total: Patch::new(coords)?,
            a,
            n,
        })
    }

    pub fn patch(&self) -> &Patch {
        &self.total
    }

    pub fn ctx(&self) -> &Arc<VaContext> {
        self.total.ctx()
    }

    pub fn base_dim(&self) -> usize {
        self.n
    }

    /// Index of the fibre coordinate `θ`.
    pub fn theta(&self) -> usize {
        self.n
    }

    pub fn lift_fn(&self, f: &CoeffFn) -> Result<CoeffFn> {
        let imgs = (0..self.n)
            .map(|i| CoeffFn::flat_coord(self.n, 1, i))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(f.transport(&imgs, &[], self.n, 1)?)
    }

    pub fn lift_form(&self, w: &DiffForm) -> Result<DiffForm> {
        let mut r = DiffForm::zero(self.n, 1);
        for (idx, f) in w.terms() {
            r = r.add(&DiffForm::monomial(self.lift_fn(f)?, idx));
        }
        Ok(r)
    }

    /// `A = dθ + a`.
    pub fn connection(&self) -> Result<DiffForm> {
        Ok(DiffForm::dx(self.n, 1, self.n).add(&self.lift_form(&self.a)?))
    }

    /// `F_A = da` on the base.
    pub fn curvature(&self) -> DiffForm {
        self.a.d()
    }

    pub fn base_connection(&self) -> &DiffForm {
        &self.a
    }

    pub fn a_field(&self) -> Result<FieldExpr> {
        Ok(self.total.form(&self.connection()?)?)
    }

    /// `ι_A`, contraction with `X_A = ∂_θ`.
    pub fn iota_a(&self) -> Result<FieldExpr> {
        Ok(self.total.b(self.n)?)
    }

    /// `L_A = L_{∂_θ}`.
    pub fn l_a(&self) -> Result<FieldExpr> {
        Ok(self.total.lie(&unit(self.n, 1, self.n))?)
    }

    /// Horizontal lift `X − a(X)∂_θ` of a base vector field.
    pub fn horizontal(&self, x: &VectorField) -> Result<VectorField> {
        let mut comps = x
            .comps
            .iter()
            .map(|c| self.lift_fn(c))
            .collect::<Result<Vec<_>>>()?;
        let ax = self.a.contract(x).function_part();
        comps.push(self.lift_fn(&ax)?.scale(&neg()));
        Ok(VectorField { comps })
    }

    pub fn iota_hor(&self, x: &VectorField) -> Result<FieldExpr> {
        Ok(self.total.iota(&self.horizontal(x)?)?)
    }

    pub fn lie_hor(&self, x: &VectorField) -> Result<FieldExpr> {
        Ok(self.total.lie(&self.horizontal(x)?)?)
    }

    /// `Γ^A = G₀(∂A)`.
    pub fn gamma_a(&self) -> Result<FieldExpr> {
        let da = self.ctx().derivative(&self.a_field()?)?;
        Ok(self.total.g0(&da)?)
    }

    /// `ξ^A = G₀(∂ dA)`, so that `D ξ^A = ∂ dA`.
    pub fn xi_a(&self) -> Result<FieldExpr> {
        let f = self.total.form(&self.lift_form(&self.curvature())?)?;
        Ok(self.total.g0(&self.ctx().derivative(&f)?)?)
    }

    /// Whether `L_A ∘ₖ e = 0` for all `k ≥ 0`.
    pub fn invariant_check(&self, e: &FieldExpr) -> Result<bool> {
        let la = self.l_a()?;
        let top = self.ctx().max_weight(e).unwrap_or(0).max(0);
        for k in 0..=top + 1 {
            if !self.ctx().circle(&la, k, e)?.is_zero() {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Which member of a dual pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Z,
    Dual,
}

/// The invariant algebra modulo `L_A − H⁽²⁾`, presented by generators and
/// the dimension-reduced twisted table.
pub struct QuotientContext {
    ctx: Arc<VaContext>,
    data: ReductionData,
    a: GenId,
    iota_a: GenId,
}

impl QuotientContext {
    /// `data` holds `F_A`, `H⁽³⁾`, `H⁽²⁾` on the flat base; `names` are the
    /// names of `A` and `ι_A`.
    pub fn new(data: ReductionData, names: (&str, &str)) -> Result<Self> {
        let (n, m) = data.dims();
        if m != 0 {
            return Err(TdualityError::AngularBase(m));
        }
        let abstracts = [
            AbstractGen {
                name: names.0.into(),
                parity: Parity::Odd,
                weight: 0,
                degree: 1,
            },
            AbstractGen {
                name: names.1.into(),
                parity: Parity::Odd,
                weight: 1,
                degree: -1,
            },
        ];
        let mut ctx = VaContext::new(CoordinateSystem::standard(n, 0), FieldFamilies::ALL, &abstracts);
        ctx.use_shifted_grading();
        let a = ctx.gen_id(names.0)?;
        let iota_a = ctx.gen_id(names.1)?;
        let id = |ctx: &VaContext, k, i| ctx.field_id(k, i).expect("base field");
        let one = FieldExpr::one(&ctx);
        ctx.set_bracket(iota_a, a, vec![one]);
        let a_f = ctx.gen(a)?;
        let ia_f = ctx.gen(iota_a)?;
        let (fa, h3, h2) = (data.f_a(), data.h3(), data.h2());
        for i in 0..n {
            let ei = unit(n, 0, i);
            let bi = id(&ctx, GenKind::Beta, i);
            ctx.set_bracket(bi, iota_a, vec![form_field(&ctx, &h2.contract(&ei))?]);
            ctx.set_bracket(bi, a, vec![form_field(&ctx, &fa.contract(&ei))?]);
            for j in 0..n {
                let ej = unit(n, 0, j);
                let ii = |w: &DiffForm| w.contract(&ej).contract(&ei);
                let (h3ij, h2ij, fij) = (ii(h3), ii(h2), ii(fa));
                // [Lᵢ λ ιⱼ] = ιᵢιⱼH⁽³⁾ + :A ιᵢιⱼH⁽²⁾: + :ι_A ιᵢιⱼF_A:
                let e = form_field(&ctx, &h3ij)?
                    .add(&ctx.wick(&a_f, &form_field(&ctx, &h2ij)?)?)
                    .add(&ctx.wick(&ia_f, &form_field(&ctx, &fij)?)?);
                if !e.is_zero() {
                    let bj = id(&ctx, GenKind::B, j);
                    ctx.set_bracket(bi, bj, vec![e]);
                }
                if i < j {
                    // [Lᵢ λ Lⱼ] = d(ιᵢιⱼH) − :ι_A d(ιᵢιⱼF_A): + :H⁽²⁾ ιᵢιⱼF_A:,
                    // with d(:A g:) = :F_A g: − :A dg:.
                    let dh = form_field(&ctx, &h3ij.d())?
                        .add(&form_field(&ctx, &fa.wedge(&h2ij))?)
                        .sub(&ctx.wick(&a_f, &form_field(&ctx, &h2ij.d())?)?);
                    let e = dh
                        .sub(&ctx.wick(&ia_f, &form_field(&ctx, &fij.d())?)?)
                        .add(&form_field(&ctx, &h2.wedge(&fij))?);
                    if !e.is_zero() {
                        let bj2 = id(&ctx, GenKind::Beta, j);
                        ctx.set_bracket(bi, bj2, vec![e]);
                    }
                }
            }
        }
        Ok(QuotientContext {
            ctx: ctx.finalize()?,
            data,
            a,
            iota_a,
        })
    }

    pub fn ctx(&self) -> &Arc<VaContext> {
        &self.ctx
    }

    pub fn data(&self) -> &ReductionData {
        &self.data
    }

    pub fn base_dim(&self) -> usize {
        self.data.dims().0
    }

    pub fn a_id(&self) -> GenId {
        self.a
    }

    pub fn iota_a_id(&self) -> GenId {
        self.iota_a
    }

    pub fn a(&self) -> FieldExpr {
        self.ctx.gen(self.a).expect("generator")
    }

    pub fn iota_a(&self) -> FieldExpr {
        self.ctx.gen(self.iota_a).expect("generator")
    }

    pub fn form(&self, w: &DiffForm) -> Result<FieldExpr> {
        Ok(form_field(&self.ctx, w)?)
    }

    pub fn function(&self, f: CoeffFn) -> FieldExpr {
        FieldExpr::function(&self.ctx, f)
    }

    /// `ι_X` for a horizontal (base) vector field.
    pub fn iota(&self, x: &VectorField) -> Result<FieldExpr> {
        Ok(iota_local(&self.ctx, x)?)
    }

    /// `L_X` for a horizontal (base) vector field.
    pub fn lie(&self, x: &VectorField) -> Result<FieldExpr> {
        Ok(lie_local(&self.ctx, x)?)
    }

    /// `G₀ + A∧G₁` as an element.
    pub fn invariant_form(&self, g: &InvariantForm) -> Result<FieldExpr> {
        Ok(self
            .form(&g.g0)?
            .add(&self.ctx.wick(&self.a(), &self.form(&g.g1)?)?))
    }

    /// `H = H⁽³⁾ + A∧H⁽²⁾`.
    pub fn h_field(&self) -> Result<FieldExpr> {
        self.invariant_form(&InvariantForm::new(self.data.h3().clone(), self.data.h2().clone())?)
    }

    /// `ι_X H = ι_XH⁽³⁾ − A∧ι_XH⁽²⁾` for horizontal `X`.
    pub fn iota_h(&self, x: &VectorField) -> Result<FieldExpr> {
        self.invariant_form(&InvariantForm::new(
            self.data.h3().contract(x),
            self.data.h2().contract(x).scale(&neg()),
        )?)
    }

    /// The differential as a derivation: `f ↦ df`, `cⁱ ↦ 0`, `A ↦ F_A`,
    /// `ι_A ↦ 0`, `ι_X ↦ L_X − ι_XH`, `L_X ↦ d(ι_XH)`.
    pub fn differential(&self) -> Result<Derivation<'_>> {
        let ctx = &self.ctx;
        let n = self.base_dim();
        let mut der = Derivation::new(ctx, true, move |f: &CoeffFn| {
            form_field(ctx, &f.d()).expect("base form")
        });
        for i in 0..n {
            let ei = unit(n, 0, i);
            let b = ctx.field_id(GenKind::B, i).expect("b");
            let be = ctx.field_id(GenKind::Beta, i).expect("beta");
            let c = ctx.field_id(GenKind::C, i).expect("c");
            let ih = self.iota_h(&ei)?;
            der.set(b, ctx.gen(be)?.sub(&ih));
            // d(ι_XH⁽³⁾ − A ι_XH⁽²⁾) = dι_XH⁽³⁾ − F_A ι_XH⁽²⁾ + A dι_XH⁽²⁾
            let h2i = self.data.h2().contract(&ei);
            let dih = self.invariant_form(&InvariantForm::new(
                self.data
                    .h3()
                    .contract(&ei)
                    .d()
                    .sub(&self.data.f_a().wedge(&h2i)),
                h2i.d(),
            )?)?;
            der.set(be, dih);
            der.set(c, FieldExpr::zero(ctx));
        }
        der.set(self.a, self.form(self.data.f_a())?);
        der.set(self.iota_a, FieldExpr::zero(ctx));
        Ok(der)
    }

    pub fn d(&self, e: &FieldExpr) -> Result<FieldExpr> {
        Ok(self.differential()?.apply(e)?)
    }

    /// `D + H₀`.
    pub fn modified_d(&self, e: &FieldExpr) -> Result<FieldExpr> {
        Ok(self.d(e)?.add(&self.ctx.circle(&self.h_field()?, 0, e)?))
    }

    /// All generators as fields (`∂γⁱ` standing in for `γⁱ`).
    pub fn generator_fields(&self) -> Result<Vec<(String, FieldExpr)>> {
        let mut out = Vec::new();
        for (g, gen) in self.ctx.generators().iter().enumerate() {
            let e = if gen.kind == GenKind::Gamma {
                self.ctx.jet(g, 1)?
            } else {
                self.ctx.gen(g)?
            };
            out.push((gen.name.clone(), e));
        }
        Ok(out)
    }

    /// Realization in the total patch: `bⁱ ↦ ι_{∂ᵢʰ}`,
    /// `βⁱ ↦ L_{∂ᵢʰ} + ι_{∂ᵢʰ}H`, `A ↦ dθ + a`, `ι_A ↦ b_θ`, base fields fixed.
    /// The bundle's `a` must satisfy `da = F_A`.
    pub fn realize<'a>(&'a self, bundle: &'a BundlePatch) -> Result<VaHom<'a>> {
        let n = self.base_dim();
        if bundle.base_dim() != n || bundle.curvature() != *self.data.f_a() {
            return Err(TdualityError::DataMismatch("bundle curvature differs from F_A".into()));
        }
        let total = bundle.patch();
        let conn = bundle.connection()?;
        let h = bundle
            .lift_form(self.data.h3())?
            .add(&conn.wedge(&bundle.lift_form(self.data.h2())?));
        let mut hom = VaHom::new(&self.ctx, total.ctx())?;
        for i in 0..n {
            let ei = unit(n, 0, i);
            let xh = bundle.horizontal(&ei)?;
            let id = |k| self.ctx.field_id(k, i).expect("base field");
            hom.set(id(GenKind::B), total.iota(&xh)?);
            hom.set(
                id(GenKind::Beta),
                total.lie(&xh)?.add(&total.form(&h.contract(&xh))?),
            );
            hom.set(id(GenKind::C), total.c(i)?);
        }
        hom.set(self.a, total.form(&conn)?);
        hom.set(self.iota_a, bundle.iota_a()?);
        Ok(hom)
    }
}

/// Drop every state containing a jet of `β_θ`, i.e. pass to the quotient by `⟨L_A⟩`.
pub fn drop_l_a(bundle: &BundlePatch, e: &FieldExpr) -> FieldExpr {
    let ctx = bundle.ctx();
    let bt = ctx.field_id(GenKind::Beta, bundle.theta()).expect("beta_theta") as u16;
    e.filter(|m| m.jets().all(|j| j.gen != bt))
}

/// Compare `[φx λ φy]` with `φ([x λ y])` after `proj`, over all generator pairs
/// (`γ–γ` skipped); returns the first mismatch.
pub fn check_brackets_mod(
    src: &VaContext,
    dst: &VaContext,
    hom: &VaHom,
    gens: &[(String, FieldExpr)],
    proj: &dyn Fn(&FieldExpr) -> FieldExpr,
) -> Result<Option<(String, String)>> {
    for (nx, x) in gens {
        for (ny, y) in gens {
            if nx.starts_with("gamma") && ny.starts_with("gamma") {
                continue;
            }
            let lhs = dst.lambda_bracket(&hom.apply(x)?, &hom.apply(y)?)?;
            let rhs = src.lambda_bracket(x, y)?;
            let len = lhs.entries.len().max(rhs.entries.len());
            for k in 0..len {
                let l = lhs.entries.get(k).map(|e| proj(e)).unwrap_or_else(|| FieldExpr::zero(dst));
                let r = match rhs.entries.get(k) {
                    Some(e) => proj(&hom.apply(e)?),
                    None => FieldExpr::zero(dst),
                };
                if l != r {
                    return Ok(Some((nx.clone(), ny.clone())));
                }
            }
        }
    }
    Ok(None)
}

/// A T-dual pair of quotient contexts over the same flat base.
pub struct DualPairSetup {
    z: QuotientContext,
    zhat: QuotientContext,
}

impl DualPairSetup {
    /// Z-side data; the dual side uses `F_Â = H⁽²⁾`, `Ĥ⁽²⁾ = F_A`, `Ĥ⁽³⁾ = H⁽³⁾`.
    pub fn new(data: ReductionData) -> Result<Self> {
        let dual = data.dual();
        Ok(DualPairSetup {
            z: QuotientContext::new(data, ("A", "iota_A"))?,
            zhat: QuotientContext::new(dual, ("Ahat", "iota_Ahat"))?,
        })
    }

    pub fn side(&self, s: Side) -> &QuotientContext {
        match s {
            Side::Z => &self.z,
            Side::Dual => &self.zhat,
        }
    }

    /// `τ^ch`: `A ↦ ι_Â`, `ι_A ↦ Â`, identity on base generators.
    pub fn tau_ch(&self) -> Result<VaHom<'_>> {
        tau_between(&self.z, &self.zhat)
    }

    /// `τ^ch` in the opposite direction.
    pub fn tau_ch_inverse(&self) -> Result<VaHom<'_>> {
        tau_between(&self.zhat, &self.z)
    }
}

fn tau_between<'a>(src: &'a QuotientContext, dst: &'a QuotientContext) -> Result<VaHom<'a>> {
    if src.data.dual() != dst.data {
        return Err(TdualityError::DataMismatch("sides are not T-dual".into()));
    }
    let mut hom = VaHom::new(&src.ctx, &dst.ctx)?;
    for (g, gen) in src.ctx.generators().iter().enumerate() {
        if matches!(gen.kind, GenKind::B | GenKind::C | GenKind::Beta) {
            hom.set(g, dst.ctx.gen(g)?);
        }
    }
    hom.set(src.a, dst.iota_a());
    hom.set(src.iota_a, dst.a());
    Ok(hom)
}

/// The untwisting map from the quotient with `H = 0` (same `F_A`) to `tw`:
/// `L_X ↦ L_X − ι_XH`, identity on the other generators.
pub fn untwist_quotient<'a>(plain: &'a QuotientContext, tw: &'a QuotientContext) -> Result<VaHom<'a>> {
    if plain.data.f_a() != tw.data.f_a() || !plain.data.h2().is_zero() || !plain.data.h3().is_zero() {
        return Err(TdualityError::DataMismatch("source must be the untwisted quotient".into()));
    }
    let n = plain.base_dim();
    let mut hom = VaHom::new(&plain.ctx, &tw.ctx)?;
    for (g, gen) in plain.ctx.generators().iter().enumerate() {
        match gen.kind {
            GenKind::B | GenKind::C => hom.set(g, tw.ctx.gen(g)?),
            GenKind::Beta => hom.set(
                g,
                tw.ctx.gen(g)?.sub(&tw.iota_h(&unit(n, 0, gen.index))?),
            ),
            _ => {}
        }
    }
    hom.set(plain.a, tw.a());
    hom.set(plain.iota_a, tw.iota_a());
    Ok(hom)
}

/// Outcome of replaying the four basic brackets for horizontal `X`, `Y`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ReplayReport {
    /// `[L_X λ ι_A] = ι_XH⁽²⁾`
    pub lie_iota_a: bool,
    /// `[L_X λ A] = ι_XF_A`
    pub lie_a: bool,
    /// `[L_X λ ι_Y]₀ = ι_{[X,Y]} + ι_Xι_YH + :ι_A ι_Xι_YF_A:`
    pub lie_iota: bool,
    /// `[L_X λ L_Y]₀ = L_{[X,Y]} + d(ι_Xι_YH) − :ι_A d(ι_Xι_YF_A): + :H⁽²⁾ ι_Xι_YF_A:`
    pub lie_lie: bool,
}

impl ReplayReport {
    pub fn all(&self) -> bool {
        self.lie_iota_a && self.lie_a && self.lie_iota && self.lie_lie
    }
}

impl QuotientContext {
    /// `ι_Xι_YH` as the pair `(ι_Xι_YH⁽³⁾, ι_Xι_YH⁽²⁾)`.
    fn iota_iota_h(&self, x: &VectorField, y: &VectorField) -> Result<InvariantForm> {
        let ii = |w: &DiffForm| w.contract(y).contract(x);
        Ok(InvariantForm::new(ii(self.data.h3()), ii(self.data.h2()))?)
    }

    /// Recompute the basic brackets of `L_X` from the table and compare with
    /// their closed forms.
    pub fn replay(&self, x: &VectorField, y: &VectorField) -> Result<ReplayReport> {
        let ctx = &self.ctx;
        let lx = self.lie(x)?;
        let only = |e: FieldExpr| if e.is_zero() { vec![] } else { vec![e] };
        let zeroth = |a: &FieldExpr, b: &FieldExpr| -> Result<FieldExpr> {
            let br = ctx.lambda_bracket(a, b)?;
            Ok(br.entries.into_iter().next().unwrap_or_else(|| FieldExpr::zero(ctx)))
        };
        let full = |a: &FieldExpr, b: &FieldExpr| -> Result<Vec<FieldExpr>> {
            let mut v = ctx.lambda_bracket(a, b)?.entries;
            while v.last().is_some_and(|e| e.is_zero()) {
                v.pop();
            }
            Ok(v)
        };
        let lie_iota_a = full(&lx, &self.iota_a())? == only(self.form(&self.data.h2().contract(x))?);
        let lie_a = full(&lx, &self.a())? == only(self.form(&self.data.f_a().contract(x))?);

        let fxy = self.data.f_a().contract(y).contract(x);
        let ixy = self.iota_iota_h(x, y)?;
        let xy = x.bracket(y);
        let want = self
            .iota(&xy)?
            .add(&self.invariant_form(&ixy)?)
            .add(&ctx.wick(&self.iota_a(), &self.form(&fxy)?)?);
        let lie_iota = zeroth(&lx, &self.iota(y)?)? == want;

        // d(G₀ + A G₁) = dG₀ + F_A G₁ − A dG₁
        let d_ixy = InvariantForm::new(
            ixy.g0.d().add(&self.data.f_a().wedge(&ixy.g1)),
            ixy.g1.d().scale(&neg()),
        )?;
        let want = self
            .lie(&xy)?
            .add(&self.invariant_form(&d_ixy)?)
            .sub(&ctx.wick(&self.iota_a(), &self.form(&fxy.d())?)?)
            .add(&self.form(&self.data.h2().wedge(&fxy))?);
        let lie_lie = zeroth(&lx, &self.lie(y)?)? == want;
        Ok(ReplayReport {
            lie_iota_a,
            lie_a,
            lie_iota,
            lie_lie,
        })
    }
}

/// Per-generator comparison of `τ` against the plain and modified differentials.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntertwiningRow {
    pub generator: String,
    pub naive: bool,
    pub modified: bool,
}

impl DualPairSetup {
    /// Compare `τ∘D` with `D̂∘τ`, and `τ∘(D + H₀)` with `(D̂ + Ĥ₀)∘τ`, on generators.
    pub fn intertwining(&self) -> Result<Vec<IntertwiningRow>> {
        let tau = self.tau_ch()?;
        let mut rows = Vec::new();
        for (name, x) in self.z.generator_fields()? {
            let tx = tau.apply(&x)?;
            let naive = tau.apply(&self.z.d(&x)?)? == self.zhat.d(&tx)?;
            let modified = tau.apply(&self.z.modified_d(&x)?)? == self.zhat.modified_d(&tx)?;
            rows.push(IntertwiningRow {
                generator: name,
                naive,
                modified,
            });
        }
        Ok(rows)
    }
}

/// One letter `νₖ` of a mode word, with modes in the weight convention
/// `νₖ = ν∘₍ₖ₊wt(ν)−1₎`.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeLetter {
    pub field: FieldExpr,
    pub mode: i64,
}

/// `coeff · ν¹ₖ₁ ν²ₖ₂ ⋯ νʳₖᵣ 1`, letters applied right to left.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeWord {
    pub coeff: Scalar,
    pub letters: Vec<ModeLetter>,
}

impl ModeWord {
    pub fn vacuum() -> Self {
        ModeWord {
            coeff: Scalar::one(),
            letters: Vec::new(),
        }
    }

    pub fn new(coeff: Scalar, letters: Vec<(FieldExpr, i64)>) -> Self {
        ModeWord {
            coeff,
            letters: letters
                .into_iter()
                .map(|(field, mode)| ModeLetter { field, mode })
                .collect(),
        }
    }

    /// Prepend `νₖ`.
    pub fn apply(mut self, field: FieldExpr, mode: i64) -> Self {
        self.letters.insert(0, ModeLetter { field, mode });
        self
    }

    pub fn scale(mut self, s: &Scalar) -> Self {
        self.coeff = &self.coeff * s;
        self
    }

    /// Weight of the resulting state: `−Σ kᵢ`.
    pub fn weight(&self) -> i64 {
        -self.letters.iter().map(|l| l.mode).sum::<i64>()
    }

    /// The element this word denotes.
    pub fn eval(&self, ctx: &VaContext) -> Result<FieldExpr> {
        let mut acc = FieldExpr::one(ctx);
        for l in self.letters.iter().rev() {
            acc = ctx.mode(&l.field, l.mode, &acc)?;
        }
        Ok(acc.scale(&self.coeff))
    }
}

pub fn eval_words(ctx: &VaContext, words: &[ModeWord]) -> Result<FieldExpr> {
    let mut acc = FieldExpr::zero(ctx);
    for w in words {
        acc = acc.add(&w.eval(ctx)?);
    }
    Ok(acc)
}

/// Canonical mode words of `e`: each PBW state `:x¹⁽ᵏ¹⁾ ⋯ xʳ⁽ᵏʳ⁾ f:` becomes
/// `Π kᵢ! · x¹₋ₖ₁₋wt₁ ⋯ xʳ₋ₖᵣ₋wtᵣ f₀ 1`. Letters are generators (with `γⁱ` the
/// coordinate function) and coefficient functions.
pub fn canonical_words(ctx: &VaContext, e: &FieldExpr) -> Result<Vec<ModeWord>> {
    let mut out = Vec::new();
    for (mono, f) in e.terms() {
        let mut w = ModeWord::vacuum();
        w = w.apply(FieldExpr::function(ctx, f.clone()), 0);
        for j in mono.jets().collect::<Vec<_>>().iter().rev() {
            let g = j.gen as usize;
            let wt = ctx.generator(g).weight as i64;
            w = w
                .apply(ctx.gen(g)?, -(j.k as i64) - wt)
                .scale(&factorial(j.k as u32));
        }
        out.push(w);
    }
    Ok(out)
}

impl DualPairSetup {
    /// `T^ch` on one word: `T(1) = Â`, `T(νₖμ) = (−1)^{|ν|} (τν)ₖ T(μ)`, with
    /// `(τν)ₖ` summed over the weight components of `τν`.
    pub fn t_ch_word(&self, word: &ModeWord) -> Result<FieldExpr> {
        let (z, zh) = (self.z.ctx(), self.zhat.ctx());
        let tau = self.tau_ch()?;
        let mut acc = self.zhat.a();
        for l in word.letters.iter().rev() {
            if l.field.is_zero() {
                return Ok(FieldExpr::zero(zh));
            }
            let p = z.parity_of(&l.field).ok_or(TdualityError::NotHomogeneous)?;
            // `τν` may mix weights; modes are taken componentwise.
            let mut img = FieldExpr::zero(zh);
            for (_, part) in zh.grade(&tau.apply(&l.field)?) {
                img = img.add(&zh.mode(&part, l.mode, &acc)?);
            }
            if p == 1 {
                img = img.scale(&neg());
            }
            acc = img;
        }
        Ok(acc.scale(&word.coeff))
    }

    pub fn t_ch_words(&self, words: &[ModeWord]) -> Result<FieldExpr> {
        let mut acc = FieldExpr::zero(self.zhat.ctx());
        for w in words {
            acc = acc.add(&self.t_ch_word(w)?);
        }
        Ok(acc)
    }

    /// `T^ch` on an element through its canonical mode words.
    pub fn t_ch(&self, e: &FieldExpr) -> Result<FieldExpr> {
        self.t_ch_words(&canonical_words(self.z.ctx(), e)?)
    }

    /// Weight-zero comparison with the classical map: `T^ch(G₀ + A G₁)`
    /// against `−G₁ + Â G₀`.
    pub fn weight_zero_matches_hori(&self, g: &InvariantForm) -> Result<bool> {
        let lhs = self.t_ch(&self.z.invariant_form(g)?)?;
        let rhs = self.zhat.invariant_form(&hori_t(g))?;
        Ok(lhs == rhs)
    }
}

/// A pair of mode-word sums denoting the same element, with a label for the
/// rewriting rule that produced it.
#[derive(Clone, Debug)]
pub struct Rewriting {
    pub rule: &'static str,
    pub left: Vec<ModeWord>,
    pub right: Vec<ModeWord>,
}

/// The commutator rewriting
/// `νⱼ ρₖ μ = (−1)^{|ν||ρ|} ρₖ νⱼ μ + Σᵢ C(j+wt(ν)−1, i) (ν∘ᵢρ)ⱼ₊ₖ μ`.
pub fn commutator_rewriting(
    ctx: &VaContext,
    nu: (&FieldExpr, i64),
    rho: (&FieldExpr, i64),
    mu: &ModeWord,
) -> Result<Rewriting> {
    let (pn, pr) = (
        ctx.parity_of(nu.0).ok_or(TdualityError::NotHomogeneous)?,
        ctx.parity_of(rho.0).ok_or(TdualityError::NotHomogeneous)?,
    );
    let wn = ctx.weight_of(nu.0).ok_or(TdualityError::NotHomogeneous)?;
    let left = vec![mu.clone().apply(rho.0.clone(), rho.1).apply(nu.0.clone(), nu.1)];
    let sign = if pn * pr == 1 { neg() } else { Scalar::one() };
    let mut right = vec![mu
        .clone()
        .apply(nu.0.clone(), nu.1)
        .apply(rho.0.clone(), rho.1)
        .scale(&sign)];
    let wr = ctx.weight_of(rho.0).ok_or(TdualityError::NotHomogeneous)?;
    // Circle-product indices of the two letters.
    let (p, q) = (nu.1 + wn - 1, rho.1 + wr - 1);
    for (i, e) in ctx.lambda_bracket(nu.0, rho.0)?.entries.into_iter().enumerate() {
        let c = binomial(p, i as u32);
        // The twisted table mixes weights, so each homogeneous piece gets the
        // mode matching the circle index `p + q − i`.
        for ((w, _), part) in ctx.grade(&e) {
            if !c.is_zero() {
                right.push(mu.clone().apply(part, p + q - i as i64 - w + 1).scale(&c));
            }
        }
    }
    Ok(Rewriting {
        rule: "commutator",
        left,
        right,
    })
}

/// The derivative rewriting `(∂ν)ₖ μ = −(k + wt(ν)) νₖ μ`.
pub fn derivative_rewriting(ctx: &VaContext, nu: &FieldExpr, k: i64, mu: &ModeWord) -> Result<Rewriting> {
    let wn = ctx.weight_of(nu).ok_or(TdualityError::NotHomogeneous)?;
    Ok(Rewriting {
        rule: "derivative",
        left: vec![mu.clone().apply(ctx.derivative(nu)?, k)],
        right: vec![mu.clone().apply(nu.clone(), k).scale(&Scalar::int(-(k + wn)))],
    })
}

/// A random mode word of weight at most `max_weight` over the generators of
/// `q` and small polynomial functions. Letters use creation modes `k ≤ −wt`
/// unless `annihilators` is set, in which case some letters use `k = 1 − wt`.
pub fn random_mode_word(
    rng: &mut SampleRng,
    q: &QuotientContext,
    max_weight: i64,
    annihilators: bool,
) -> Result<ModeWord> {
    let ctx = q.ctx();
    let n = q.base_dim();
    let gens = ctx.generators();
    let mut word = ModeWord::vacuum();
    let mut budget = max_weight;
    for _ in 0..rng.gen_range(1..=3) {
        let (field, wt) = if rng.gen_bool(0.2) {
            (FieldExpr::function(ctx, sample::poly(rng, n, 0, 1)), 0)
        } else {
            let g = rng.gen_range(0..gens.len());
            (ctx.gen(g)?, gens[g].weight as i64)
        };
        if wt > budget {
            continue;
        }
        let extra = rng.gen_range(0..=budget - wt);
        let mode = if annihilators && rng.gen_bool(0.15) { 1 - wt } else { -wt - extra };
        budget += mode;
        word = word.apply(field, mode);
    }
    Ok(word)
}
