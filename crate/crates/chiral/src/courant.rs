//! Generalized geometry on a patch: the `H`-twisted Courant bracket on
//! `TZ ⊕ T*Z`, its axioms, the Clifford module of forms, the twisted de Rham
//! differential, dimension reduction along a circle, and the T-duality maps
//! on reduced sections and invariant forms.
//!
//! The induced operator `𝒟` of the axioms is characterised by
//! `⟨𝒟f, A⟩ = ½π(A)f`; with the pairing `½(ι_Xη + ι_Yξ)` this is the
//! ordinary differential `𝒟f = 0 + df`.

use crate::cdr::TwistData;
use crate::coeff::CoeffFn;
use crate::geom::{DiffForm, VectorField};
use crate::scalar::Scalar;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CourantError {
    #[error("patch mismatch: {0:?} vs {1:?}")]
    Mismatch((usize, usize), (usize, usize)),
    #[error("expected a 1-form")]
    NotOneForm,
    #[error("bad flux: {0}")]
    BadFlux(String),
    #[error("bad reduction data: {0}")]
    BadReduction(String),
}

type Result<T> = std::result::Result<T, CourantError>;

fn same(a: (usize, usize), b: (usize, usize)) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(CourantError::Mismatch(a, b))
    }
}

fn half() -> Scalar {
    Scalar::ratio(1, 2)
}

fn neg() -> Scalar {
    Scalar::int(-1)
}

/// A closed 3-form (or zero) used to twist the bracket.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Flux(DiffForm);

impl Flux {
    pub fn new(h: DiffForm) -> Result<Self> {
        if !h.is_zero() && h.degree() != Some(3) {
            return Err(CourantError::BadFlux("not homogeneous of degree 3".into()));
        }
        if !h.d().is_zero() {
            return Err(CourantError::BadFlux("dH ≠ 0".into()));
        }
        Ok(Flux(h))
    }

    pub fn zero(n: usize, m: usize) -> Self {
        Flux(DiffForm::zero(n, m))
    }

    pub fn form(&self) -> &DiffForm {
        &self.0
    }
}

impl From<&TwistData> for Flux {
    fn from(t: &TwistData) -> Self {
        Flux(t.form().clone())
    }
}

/// `X + ξ` with `ξ` a 1-form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CourantSection {
    pub x: VectorField,
    pub xi: DiffForm,
}

impl CourantSection {
    pub fn new(x: VectorField, xi: DiffForm) -> Result<Self> {
        same(x.dims(), xi.dims())?;
        if xi.terms().any(|(i, _)| i.len() != 1) {
            return Err(CourantError::NotOneForm);
        }
        Ok(CourantSection { x, xi })
    }

    pub fn vector(x: VectorField) -> Self {
        let (n, m) = x.dims();
        CourantSection {
            x,
            xi: DiffForm::zero(n, m),
        }
    }

    pub fn covector(xi: DiffForm) -> Result<Self> {
        let (n, m) = xi.dims();
        CourantSection::new(VectorField::zero(n, m), xi)
    }

    pub fn zero(n: usize, m: usize) -> Self {
        CourantSection::vector(VectorField::zero(n, m))
    }

    pub fn dims(&self) -> (usize, usize) {
        self.xi.dims()
    }

    pub fn anchor(&self) -> &VectorField {
        &self.x
    }

    pub fn is_zero(&self) -> bool {
        self.x.is_zero() && self.xi.is_zero()
    }

    pub fn add(&self, o: &Self) -> Self {
        CourantSection {
            x: self.x.add(&o.x),
            xi: self.xi.add(&o.xi),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        CourantSection {
            x: self.x.sub(&o.x),
            xi: self.xi.sub(&o.xi),
        }
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        CourantSection {
            x: self.x.scale(c),
            xi: self.xi.scale(c),
        }
    }

    pub fn mul_fn(&self, f: &CoeffFn) -> Self {
        CourantSection {
            x: self.x.mul_fn(f),
            xi: self.xi.mul_fn(f),
        }
    }
}

/// `⟨X+ξ, Y+η⟩ = ½(ι_Xη + ι_Yξ)`.
pub fn pairing(a: &CourantSection, b: &CourantSection) -> Result<CoeffFn> {
    same(a.dims(), b.dims())?;
    let s = b.xi.contract(&a.x).add(&a.xi.contract(&b.x));
    Ok(s.function_part().scale(&half()))
}

/// The induced operator `𝒟f = 0 + df`.
pub fn induced_d(f: &CoeffFn) -> CourantSection {
    let (n, m) = f.dims();
    CourantSection {
        x: VectorField::zero(n, m),
        xi: f.d(),
    }
}

/// `[X+ξ, Y+η]_H = [X,Y] + L_Xη − L_Yξ − ½d(ι_Xη − ι_Yξ) + ι_Xι_YH`.
pub fn bracket_h(h: &Flux, a: &CourantSection, b: &CourantSection) -> Result<CourantSection> {
    same(a.dims(), b.dims())?;
    same(a.dims(), h.0.dims())?;
    let corr = b.xi.contract(&a.x).sub(&a.xi.contract(&b.x)).d().scale(&half());
    Ok(CourantSection {
        x: a.x.bracket(&b.x),
        xi: b
            .xi
            .lie(&a.x)
            .sub(&a.xi.lie(&b.x))
            .sub(&corr)
            .add(&h.0.contract(&b.x).contract(&a.x)),
    })
}

/// The non-skew Dorfman bracket `[X,Y] + L_Xη − ι_Y dξ + ι_Xι_YH`, equal to
/// `[A,B]_H + 𝒟⟨A,B⟩`.
pub fn dorfman_h(h: &Flux, a: &CourantSection, b: &CourantSection) -> Result<CourantSection> {
    same(a.dims(), b.dims())?;
    same(a.dims(), h.0.dims())?;
    Ok(CourantSection {
        x: a.x.bracket(&b.x),
        xi: b
            .xi
            .lie(&a.x)
            .sub(&a.xi.d().contract(&b.x))
            .add(&h.0.contract(&b.x).contract(&a.x)),
    })
}

/// `(X+ξ)·ω = ι_Xω + ξ∧ω`.
pub fn clifford_act(s: &CourantSection, w: &DiffForm) -> Result<DiffForm> {
    same(s.dims(), w.dims())?;
    Ok(w.contract(&s.x).add(&s.xi.wedge(w)))
}

/// `d_H ω = dω + H∧ω`.
pub fn d_h(h: &Flux, w: &DiffForm) -> Result<DiffForm> {
    same(h.0.dims(), w.dims())?;
    Ok(w.d().add(&h.0.wedge(w)))
}

/// `[[d_H, s₁], s₂]·ω` with graded commutators (`d_H` and sections are odd).
pub fn derived_action(
    h: &Flux,
    s1: &CourantSection,
    s2: &CourantSection,
    w: &DiffForm,
) -> Result<DiffForm> {
    let inner = |v: &DiffForm| -> Result<DiffForm> {
        Ok(d_h(h, &clifford_act(s1, v)?)?.add(&clifford_act(s1, &d_h(h, v)?)?))
    };
    Ok(inner(&clifford_act(s2, w)?)?.sub(&clifford_act(s2, &inner(w)?)?))
}

/// Whether `[s₁, s₂]_H·ω = [[d_H, s₁], s₂]·ω` holds for the skew bracket.
pub fn bracket_compat_check(
    h: &Flux,
    s1: &CourantSection,
    s2: &CourantSection,
    w: &DiffForm,
) -> Result<bool> {
    let lhs = clifford_act(&bracket_h(h, s1, s2)?, w)?;
    Ok(lhs == derived_action(h, s1, s2, w)?)
}

/// Whether `(s₁ ∘ s₂)·ω = [[d_H, s₁], s₂]·ω` holds for the Dorfman bracket.
pub fn dorfman_compat_check(
    h: &Flux,
    s1: &CourantSection,
    s2: &CourantSection,
    w: &DiffForm,
) -> Result<bool> {
    let lhs = clifford_act(&dorfman_h(h, s1, s2)?, w)?;
    Ok(lhs == derived_action(h, s1, s2, w)?)
}

/// The brackets the axiom checker knows about.
#[derive(Clone, Debug)]
pub enum Bracket {
    /// The `H`-twisted Courant bracket.
    Courant(Flux),
    /// Negative control: the twisted bracket without the `½d(…)` term.
    Corrupted(Flux),
}

impl Bracket {
    pub fn apply(&self, a: &CourantSection, b: &CourantSection) -> Result<CourantSection> {
        match self {
            Bracket::Courant(h) => bracket_h(h, a, b),
            Bracket::Corrupted(h) => {
                let mut r = bracket_h(h, a, b)?;
                let corr = b.xi.contract(&a.x).sub(&a.xi.contract(&b.x)).d().scale(&half());
                r.xi = r.xi.add(&corr);
                Ok(r)
            }
        }
    }
}

/// Sections `A, B, C` and a function `f` for one axiom evaluation.
#[derive(Clone, Debug)]
pub struct AxiomSample {
    pub a: CourantSection,
    pub b: CourantSection,
    pub c: CourantSection,
    pub f: CoeffFn,
}

pub const AXIOM_NAMES: [&str; 5] = [
    "anchor is a morphism",
    "Jac = d(Nij)",
    "anchor kills d",
    "Leibniz rule",
    "invariance of the pairing",
];

/// Pass/fail of each axiom on each sample.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AxiomReport {
    pub results: Vec<[bool; 5]>,
}

impl AxiomReport {
    pub fn all_pass(&self) -> bool {
        self.results.iter().all(|r| r.iter().all(|&b| b))
    }

    pub fn axiom_passes(&self, k: usize) -> bool {
        self.results.iter().all(|r| r[k])
    }

    /// Number of samples failing each axiom.
    pub fn failures(&self) -> [usize; 5] {
        let mut out = [0; 5];
        for r in &self.results {
            for (k, &ok) in r.iter().enumerate() {
                if !ok {
                    out[k] += 1;
                }
            }
        }
        out
    }
}

pub fn jacobiator(br: &Bracket, a: &CourantSection, b: &CourantSection, c: &CourantSection) -> Result<CourantSection> {
    let t1 = br.apply(&br.apply(a, b)?, c)?;
    let t2 = br.apply(&br.apply(b, c)?, a)?;
    let t3 = br.apply(&br.apply(c, a)?, b)?;
    Ok(t1.add(&t2).add(&t3))
}

pub fn nijenhuis(br: &Bracket, a: &CourantSection, b: &CourantSection, c: &CourantSection) -> Result<CoeffFn> {
    let s = pairing(&br.apply(a, b)?, c)?
        .add(&pairing(&br.apply(b, c)?, a)?)
        .add(&pairing(&br.apply(c, a)?, b)?);
    Ok(s.scale(&Scalar::ratio(1, 3)))
}

/// Evaluates the five axioms exactly on one sample.
pub fn check_sample(br: &Bracket, s: &AxiomSample) -> Result<[bool; 5]> {
    let (a, b, c, f) = (&s.a, &s.b, &s.c, &s.f);
    let ab = br.apply(a, b)?;
    let ax1 = ab.x == a.x.bracket(&b.x);
    let ax2 = jacobiator(br, a, b, c)? == induced_d(&nijenhuis(br, a, b, c)?);
    let ax3 = induced_d(f).x.is_zero();
    let lhs4 = br.apply(a, &b.mul_fn(f))?;
    let rhs4 = b
        .mul_fn(&a.x.apply(f))
        .add(&ab.mul_fn(f))
        .sub(&induced_d(f).mul_fn(&pairing(a, b)?));
    let ax4 = lhs4 == rhs4;
    let lhs5 = a.x.apply(&pairing(b, c)?);
    let rhs5 = pairing(&ab.add(&induced_d(&pairing(a, b)?)), c)?
        .add(&pairing(b, &br.apply(a, c)?.add(&induced_d(&pairing(a, c)?)))?);
    let ax5 = lhs5 == rhs5;
    Ok([ax1, ax2, ax3, ax4, ax5])
}

pub fn check_axioms(br: &Bracket, samples: &[AxiomSample]) -> Result<AxiomReport> {
    let results = samples
        .iter()
        .map(|s| check_sample(br, s))
        .collect::<Result<Vec<_>>>()?;
    Ok(AxiomReport { results })
}

/// Random sections of coefficient degree at most `max_deg`.
pub fn random_samples(seed: u64, n: usize, count: usize, max_deg: u32) -> Vec<AxiomSample> {
    use crate::sample;
    let mut rng = sample::rng(seed);
    let sec = |rng: &mut sample::SampleRng| CourantSection {
        x: sample::vector_field(rng, n, 0, max_deg),
        xi: sample::form(rng, n, 0, 1, max_deg),
    };
    (0..count)
        .map(|_| AxiomSample {
            a: sec(&mut rng),
            b: sec(&mut rng),
            c: sec(&mut rng),
            f: sample::poly(&mut rng, n, 0, max_deg),
        })
        .collect()
}

/// Twist data of a circle bundle over the base patch: curvature `F_A` and
/// `H = H⁽³⁾ + A∧H⁽²⁾`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionData {
    f_a: DiffForm,
    h3: DiffForm,
    h2: DiffForm,
}

impl ReductionData {
    pub fn new(f_a: DiffForm, h3: DiffForm, h2: DiffForm) -> Result<Self> {
        same(f_a.dims(), h3.dims())?;
        same(f_a.dims(), h2.dims())?;
        for (name, w, k) in [("F_A", &f_a, 2), ("H⁽³⁾", &h3, 3), ("H⁽²⁾", &h2, 2)] {
            if !w.is_zero() && w.degree() != Some(k) {
                return Err(CourantError::BadReduction(format!("{name} is not a {k}-form")));
            }
        }
        if !f_a.d().is_zero() {
            return Err(CourantError::BadReduction("dF_A ≠ 0".into()));
        }
        if !h2.d().is_zero() {
            return Err(CourantError::BadReduction("dH⁽²⁾ ≠ 0".into()));
        }
        if h3.d() != f_a.wedge(&h2).scale(&neg()) {
            return Err(CourantError::BadReduction("dH⁽³⁾ ≠ −F_A∧H⁽²⁾".into()));
        }
        Ok(ReductionData { f_a, h3, h2 })
    }

    pub fn zero(n: usize, m: usize) -> Self {
        let z = DiffForm::zero(n, m);
        ReductionData {
            f_a: z.clone(),
            h3: z.clone(),
            h2: z,
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        self.f_a.dims()
    }

    pub fn f_a(&self) -> &DiffForm {
        &self.f_a
    }

    pub fn h3(&self) -> &DiffForm {
        &self.h3
    }

    pub fn h2(&self) -> &DiffForm {
        &self.h2
    }

    /// The T-dual data: `F_Â = H⁽²⁾`, `Ĥ⁽²⁾ = F_A`, `Ĥ⁽³⁾ = H⁽³⁾`.
    pub fn dual(&self) -> Self {
        ReductionData {
            f_a: self.h2.clone(),
            h3: self.h3.clone(),
            h2: self.f_a.clone(),
        }
    }
}

/// `(X, f) + (ω, g)`, i.e. `X + fX_A + ω + gA` on the total space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReducedSection {
    pub x: VectorField,
    pub f: CoeffFn,
    pub omega: DiffForm,
    pub g: CoeffFn,
}

impl ReducedSection {
    pub fn new(x: VectorField, f: CoeffFn, omega: DiffForm, g: CoeffFn) -> Result<Self> {
        let d = x.dims();
        same(d, f.dims())?;
        same(d, omega.dims())?;
        same(d, g.dims())?;
        if omega.terms().any(|(i, _)| i.len() != 1) {
            return Err(CourantError::NotOneForm);
        }
        Ok(ReducedSection { x, f, omega, g })
    }

    pub fn dims(&self) -> (usize, usize) {
        self.f.dims()
    }
}

/// `½(ι_{X₁}ω₂ + ι_{X₂}ω₁ + f₁g₂ + f₂g₁)`.
pub fn reduced_pairing(a: &ReducedSection, b: &ReducedSection) -> Result<CoeffFn> {
    same(a.dims(), b.dims())?;
    let s = b
        .omega
        .contract(&a.x)
        .add(&a.omega.contract(&b.x))
        .function_part()
        .add(&a.f.mul(&b.g))
        .add(&b.f.mul(&a.g));
    Ok(s.scale(&half()))
}

/// The twisted bracket of reduced sections. The `H⁽²⁾` term of the form
/// component is `f₂ι_{X₁}H⁽²⁾ − f₁ι_{X₂}H⁽²⁾`, as skew-symmetry requires.
pub fn reduced_bracket(
    rd: &ReductionData,
    a: &ReducedSection,
    b: &ReducedSection,
) -> Result<ReducedSection> {
    same(a.dims(), b.dims())?;
    same(a.dims(), rd.dims())?;
    let ii = |w: &DiffForm| w.contract(&b.x).contract(&a.x);
    let x = a.x.bracket(&b.x);
    let f = a
        .x
        .apply(&b.f)
        .sub(&b.x.apply(&a.f))
        .add(&ii(&rd.f_a).function_part());
    let g = a
        .x
        .apply(&b.g)
        .sub(&b.x.apply(&a.g))
        .add(&ii(&rd.h2).function_part());
    let fa1 = rd.f_a.contract(&a.x);
    let fa2 = rd.f_a.contract(&b.x);
    let mixed = a
        .f
        .d()
        .mul_fn(&b.g)
        .add(&a.g.d().mul_fn(&b.f))
        .sub(&b.g.d().mul_fn(&a.f))
        .sub(&b.f.d().mul_fn(&a.g))
        .scale(&half());
    let omega = b
        .omega
        .lie(&a.x)
        .sub(&a.omega.lie(&b.x))
        .add(&fa1.mul_fn(&b.g).sub(&fa2.mul_fn(&a.g)))
        .sub(
            &b.omega
                .contract(&a.x)
                .sub(&a.omega.contract(&b.x))
                .d()
                .scale(&half()),
        )
        .add(&mixed)
        .add(&ii(&rd.h3))
        .add(
            &rd.h2
                .contract(&a.x)
                .mul_fn(&b.f)
                .sub(&rd.h2.contract(&b.x).mul_fn(&a.f)),
        );
    Ok(ReducedSection { x, f, omega, g })
}

/// `τ((X,f) + (ω,g)) = (X,g) + (ω,f)`.
pub fn cg_tau(r: &ReducedSection) -> ReducedSection {
    ReducedSection {
        x: r.x.clone(),
        f: r.g.clone(),
        omega: r.omega.clone(),
        g: r.f.clone(),
    }
}

/// An invariant form `G₀ + A∧G₁` with base forms `G₀`, `G₁`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvariantForm {
    pub g0: DiffForm,
    pub g1: DiffForm,
}

impl InvariantForm {
    pub fn new(g0: DiffForm, g1: DiffForm) -> Result<Self> {
        same(g0.dims(), g1.dims())?;
        Ok(InvariantForm { g0, g1 })
    }

    pub fn base(g0: DiffForm) -> Self {
        let (n, m) = g0.dims();
        InvariantForm {
            g0,
            g1: DiffForm::zero(n, m),
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        self.g0.dims()
    }

    pub fn is_zero(&self) -> bool {
        self.g0.is_zero() && self.g1.is_zero()
    }

    pub fn add(&self, o: &Self) -> Self {
        InvariantForm {
            g0: self.g0.add(&o.g0),
            g1: self.g1.add(&o.g1),
        }
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        InvariantForm {
            g0: self.g0.scale(c),
            g1: self.g1.scale(c),
        }
    }
}

/// Hori's map on the dual side: `T(G₀ + A∧G₁) = −G₁ + Â∧G₀`.
pub fn hori_t(g: &InvariantForm) -> InvariantForm {
    InvariantForm {
        g0: g.g1.scale(&neg()),
        g1: g.g0.clone(),
    }
}

/// `d_H` on invariant forms, using `dA = F_A` and `H = H⁽³⁾ + A∧H⁽²⁾`:
/// `(dG₀ + F_A∧G₁ + H⁽³⁾∧G₀) + A∧(−dG₁ + H⁽²⁾∧G₀ − H⁽³⁾∧G₁)`.
pub fn reduced_d_h(rd: &ReductionData, g: &InvariantForm) -> Result<InvariantForm> {
    same(rd.dims(), g.dims())?;
    Ok(InvariantForm {
        g0: g
            .g0
            .d()
            .add(&rd.f_a.wedge(&g.g1))
            .add(&rd.h3.wedge(&g.g0)),
        g1: g
            .g1
            .d()
            .scale(&neg())
            .add(&rd.h2.wedge(&g.g0))
            .sub(&rd.h3.wedge(&g.g1)),
    })
}

/// Clifford action of a reduced section on an invariant form, with
/// `ι_{X_A}A = 1` and horizontal `X`.
pub fn reduced_clifford_act(s: &ReducedSection, g: &InvariantForm) -> Result<InvariantForm> {
    same(s.dims(), g.dims())?;
    Ok(InvariantForm {
        g0: g
            .g0
            .contract(&s.x)
            .add(&g.g1.mul_fn(&s.f))
            .add(&s.omega.wedge(&g.g0)),
        g1: g
            .g1
            .contract(&s.x)
            .scale(&neg())
            .sub(&s.omega.wedge(&g.g1))
            .add(&g.g0.mul_fn(&s.g)),
    })
}

/// The sign `ε` with `T(s·G) = ε·τ(s)·T(G)` on every pair, or `None` when
/// no single sign fits (pairs with both sides zero are uninformative).
pub fn clifford_sign(pairs: &[(ReducedSection, InvariantForm)]) -> Result<Option<i64>> {
    let mut eps: Option<i64> = None;
    for (s, g) in pairs {
        let lhs = hori_t(&reduced_clifford_act(s, g)?);
        let rhs = reduced_clifford_act(&cg_tau(s), &hori_t(g))?;
        let e = if lhs == rhs && lhs.is_zero() {
            continue;
        } else if lhs == rhs {
            1
        } else if lhs == rhs.scale(&neg()) {
            -1
        } else {
            return Ok(None);
        };
        match eps {
            Some(prev) if prev != e => return Ok(None),
            _ => eps = Some(e),
        }
    }
    Ok(eps)
}
