use chiral::coeff::CoeffFn;
use chiral::courant::*;
use chiral::geom::{DiffForm, VectorField};
use chiral::sample;
use chiral::scalar::Scalar;

fn x(n: usize, i: usize) -> CoeffFn {
    CoeffFn::flat_coord(n, 0, i).unwrap()
}

fn one(n: usize) -> CoeffFn {
    CoeffFn::one(n, 0)
}

fn e(n: usize, i: usize) -> VectorField {
    VectorField::coord(n, 0, i, one(n))
}

fn dx(n: usize, i: usize) -> DiffForm {
    DiffForm::dx(n, 0, i)
}

fn sec(x: VectorField, xi: DiffForm) -> CourantSection {
    CourantSection::new(x, xi).unwrap()
}

fn volume() -> Flux {
    Flux::new(DiffForm::monomial(one(3), &[0, 1, 2])).unwrap()
}

#[test]
fn pairing_examples() {
    let n = 2;
    let d1 = CourantSection::vector(e(n, 0));
    let c1 = CourantSection::covector(dx(n, 0)).unwrap();
    assert_eq!(
        pairing(&d1, &c1).unwrap(),
        CoeffFn::constant(n, 0, Scalar::ratio(1, 2))
    );
    let d2 = CourantSection::vector(e(n, 1));
    assert!(pairing(&d1, &d2).unwrap().is_zero());
    let s = d1.add(&c1);
    assert_eq!(pairing(&s, &s).unwrap(), one(n));
    assert!(pairing(&s, &CourantSection::zero(3, 0)).is_err());
}

#[test]
fn bracket_examples() {
    let n = 1;
    let h0 = Flux::zero(n, 0);
    let dxv = CourantSection::vector(e(n, 0));
    let xdx = CourantSection::vector(VectorField::coord(n, 0, 0, x(n, 0)));
    assert_eq!(bracket_h(&h0, &dxv, &xdx).unwrap(), dxv);
    let form = CourantSection::covector(dx(n, 0).mul_fn(&x(n, 0))).unwrap();
    let r = bracket_h(&h0, &dxv, &form).unwrap();
    assert!(r.x.is_zero());
    assert_eq!(r.xi, dx(n, 0).scale(&Scalar::ratio(1, 2)));

    let h = volume();
    let r = bracket_h(
        &h,
        &CourantSection::vector(e(3, 0)),
        &CourantSection::vector(e(3, 1)),
    )
    .unwrap();
    assert!(r.x.is_zero());
    assert_eq!(r.xi, dx(3, 2).scale(&Scalar::int(-1)));
}

#[test]
fn axioms_on_simple_sections() {
    let n = 1;
    let secs = [
        CourantSection::vector(e(n, 0)),
        CourantSection::vector(VectorField::coord(n, 0, 0, x(n, 0))),
        CourantSection::covector(dx(n, 0)).unwrap(),
    ];
    let mut samples = Vec::new();
    for a in &secs {
        for b in &secs {
            for c in &secs {
                samples.push(AxiomSample {
                    a: a.clone(),
                    b: b.clone(),
                    c: c.clone(),
                    f: x(n, 0).mul(&x(n, 0)),
                });
            }
        }
    }
    let rep = check_axioms(&Bracket::Courant(Flux::zero(n, 0)), &samples).unwrap();
    assert!(rep.all_pass(), "{:?}", rep.failures());
}

#[test]
fn axioms_on_random_sections() {
    let samples = random_samples(11, 3, 25, 2);
    for br in [Bracket::Courant(Flux::zero(3, 0)), Bracket::Courant(volume())] {
        let rep = check_axioms(&br, &samples).unwrap();
        assert!(rep.all_pass(), "{:?}", rep.failures());
    }
    let mut rng = sample::rng(5);
    let h = Flux::new(sample::closed_three_form(&mut rng, 3, 0, 2)).unwrap();
    assert!(!h.form().is_zero());
    let rep = check_axioms(&Bracket::Courant(h), &samples).unwrap();
    assert!(rep.all_pass(), "{:?}", rep.failures());
}

#[test]
fn corrupted_bracket_fails_jacobi() {
    let samples = random_samples(12, 3, 10, 2);
    let rep = check_axioms(&Bracket::Corrupted(volume()), &samples).unwrap();
    assert!(!rep.axiom_passes(1));
}

#[test]
fn halved_differential_breaks_the_axioms() {
    // The operator fixed by ⟨𝒟f, A⟩ = ½π(A)f is the ordinary d; halving it
    // breaks the Leibniz rule.
    let samples = random_samples(13, 3, 5, 2);
    let br = Bracket::Courant(volume());
    let bad = samples.iter().any(|s| {
        let lhs = br.apply(&s.a, &s.b.mul_fn(&s.f)).unwrap();
        let half_d = induced_d(&s.f).scale(&Scalar::ratio(1, 2));
        let rhs = s
            .b
            .mul_fn(&s.a.x.apply(&s.f))
            .add(&br.apply(&s.a, &s.b).unwrap().mul_fn(&s.f))
            .sub(&half_d.mul_fn(&pairing(&s.a, &s.b).unwrap()));
        lhs != rhs
    });
    assert!(bad);
}

#[test]
fn clifford_examples() {
    let n = 2;
    let w12 = dx(n, 0).wedge(&dx(n, 1));
    let d1 = CourantSection::vector(e(n, 0));
    assert_eq!(clifford_act(&d1, &w12).unwrap(), dx(n, 1));
    let c1 = CourantSection::covector(dx(n, 0)).unwrap();
    assert_eq!(clifford_act(&c1, &dx(n, 1)).unwrap(), w12);
    let s = d1.add(&c1);
    let mut rng = sample::rng(3);
    for _ in 0..5 {
        let w = sample::mixed_form(&mut rng, n, 0, 2);
        let twice = clifford_act(&s, &clifford_act(&s, &w).unwrap()).unwrap();
        assert_eq!(twice, w);
    }
    // s·(s·ω) = ⟨s,s⟩ω in general.
    for _ in 0..5 {
        let s = sec(
            sample::vector_field(&mut rng, n, 0, 2),
            sample::form(&mut rng, n, 0, 1, 2),
        );
        let w = sample::mixed_form(&mut rng, n, 0, 2);
        let twice = clifford_act(&s, &clifford_act(&s, &w).unwrap()).unwrap();
        assert_eq!(twice, w.mul_fn(&pairing(&s, &s).unwrap()));
    }
}

#[test]
fn twisted_differential() {
    let h = volume();
    assert_eq!(d_h(&h, &DiffForm::one(3, 0)).unwrap(), *h.form());
    let mut rng = sample::rng(4);
    for _ in 0..5 {
        let w = sample::mixed_form(&mut rng, 3, 0, 2);
        assert!(d_h(&h, &d_h(&h, &w).unwrap()).unwrap().is_zero());
        assert_eq!(d_h(&Flux::zero(3, 0), &w).unwrap(), w.d());
        // Left-module derivation: the sign is (−1)^{|a|}.
        for k in 0..=3 {
            let a = sample::form(&mut rng, 3, 0, k, 2);
            let wk = sample::form(&mut rng, 3, 0, 2, 2);
            let sign = Scalar::int(if k % 2 == 0 { 1 } else { -1 });
            let lhs = d_h(&h, &a.wedge(&wk)).unwrap();
            let rhs = a
                .d()
                .wedge(&wk)
                .add(&a.wedge(&d_h(&h, &wk).unwrap()).scale(&sign));
            assert_eq!(lhs, rhs);
        }
    }
    // With |a| odd and |ω| even the sign (−1)^{|a||ω|} would be wrong.
    let a = dx(3, 0);
    let w = DiffForm::function(x(3, 1));
    let lhs = d_h(&h, &a.wedge(&w)).unwrap();
    let with_product_sign = a.d().wedge(&w).add(&a.wedge(&d_h(&h, &w).unwrap()));
    assert_ne!(lhs, with_product_sign);
}

#[test]
fn compatibility_examples() {
    let n = 3;
    let h0 = Flux::zero(n, 0);
    let a = CourantSection::vector(e(n, 0));
    let b = CourantSection::vector(VectorField::coord(n, 0, 0, x(n, 0)));
    assert!(bracket_compat_check(&h0, &a, &b, &dx(n, 0)).unwrap());
    let h = volume();
    let b = CourantSection::vector(e(n, 1));
    let one = DiffForm::one(n, 0);
    assert!(bracket_compat_check(&h, &a, &b, &one).unwrap());
    assert_eq!(
        derived_action(&h, &a, &b, &one).unwrap(),
        dx(n, 2).scale(&Scalar::int(-1))
    );
    assert!(bracket_compat_check(&h, &a, &a, &one).unwrap());
}

#[test]
fn compatibility_holds_for_the_dorfman_bracket() {
    let h = volume();
    let mut rng = sample::rng(6);
    let mut skew_failures = 0;
    for _ in 0..10 {
        let s1 = sec(
            sample::vector_field(&mut rng, 3, 0, 2),
            sample::form(&mut rng, 3, 0, 1, 2),
        );
        let s2 = sec(
            sample::vector_field(&mut rng, 3, 0, 2),
            sample::form(&mut rng, 3, 0, 1, 2),
        );
        let w = sample::mixed_form(&mut rng, 3, 0, 1);
        assert!(dorfman_compat_check(&h, &s1, &s2, &w).unwrap());
        let skew = bracket_compat_check(&h, &s1, &s2, &w).unwrap();
        let dp = induced_d(&pairing(&s1, &s2).unwrap());
        assert_eq!(skew, clifford_act(&dp, &w).unwrap().is_zero());
        if !skew {
            skew_failures += 1;
        }
        // Pure vector fields: both brackets agree.
        let v1 = CourantSection::vector(s1.x.clone());
        let v2 = CourantSection::vector(s2.x.clone());
        assert!(bracket_compat_check(&h, &v1, &v2, &w).unwrap());
    }
    assert!(skew_failures > 0);
}

// Reduced brackets against the full bracket on the total space, with fibre
// coordinate θ appended and A = dθ + a.

struct Lift {
    n: usize,
    a: DiffForm,
}

impl Lift {
    fn up_fn(&self, f: &CoeffFn) -> CoeffFn {
        let imgs: Vec<_> = (0..self.n).map(|i| x(self.n + 1, i)).collect();
        f.substitute(&imgs).unwrap()
    }

    fn down_fn(&self, f: &CoeffFn) -> CoeffFn {
        assert!(f.partial(self.n).unwrap().is_zero(), "θ-dependence");
        let mut imgs: Vec<_> = (0..self.n).map(|i| x(self.n, i)).collect();
        imgs.push(CoeffFn::zero(self.n, 0));
        f.substitute(&imgs).unwrap()
    }

    fn up_form(&self, w: &DiffForm) -> DiffForm {
        let mut r = DiffForm::zero(self.n + 1, 0);
        for (idx, f) in w.terms() {
            r = r.add(&DiffForm::monomial(self.up_fn(f), idx));
        }
        r
    }

    fn down_form(&self, w: &DiffForm) -> DiffForm {
        let mut r = DiffForm::zero(self.n, 0);
        for (idx, f) in w.terms() {
            assert!(!idx.contains(&self.n));
            r = r.add(&DiffForm::monomial(self.down_fn(f), idx));
        }
        r
    }

    fn conn(&self) -> DiffForm {
        dx(self.n + 1, self.n).add(&self.up_form(&self.a))
    }

    fn flux(&self, rd: &ReductionData) -> Flux {
        let h = self
            .up_form(rd.h3())
            .add(&self.conn().wedge(&self.up_form(rd.h2())));
        Flux::new(h).unwrap()
    }

    fn up(&self, r: &ReducedSection) -> CourantSection {
        let ax = self.a.contract(&r.x).function_part();
        let mut comps: Vec<_> = r.x.comps.iter().map(|c| self.up_fn(c)).collect();
        comps.push(self.up_fn(&r.f.sub(&ax)));
        let xi = self
            .up_form(&r.omega)
            .add(&self.conn().mul_fn(&self.up_fn(&r.g)));
        sec(VectorField { comps }, xi)
    }

    fn down(&self, s: &CourantSection) -> ReducedSection {
        let x = VectorField {
            comps: s.x.comps[..self.n].iter().map(|c| self.down_fn(c)).collect(),
        };
        let f = self
            .down_fn(&s.x.comps[self.n])
            .add(&self.a.contract(&x).function_part());
        let g = self.down_fn(&s.xi.one_form_coeff(self.n));
        let omega = self.down_form(&s.xi.sub(&self.conn().mul_fn(&self.up_fn(&g))));
        ReducedSection::new(x, f, omega, g).unwrap()
    }
}

fn random_reduction(seed: u64, n: usize) -> (Lift, Lift, ReductionData) {
    let mut rng = sample::rng(seed);
    let a = sample::form(&mut rng, n, 0, 1, 2);
    let b = sample::form(&mut rng, n, 0, 1, 2);
    let c = sample::form(&mut rng, n, 0, 2, 2);
    let h3 = a.wedge(&b.d()).scale(&Scalar::int(-1)).add(&c.d());
    let rd = ReductionData::new(a.d(), h3, b.d()).unwrap();
    (Lift { n, a }, Lift { n, a: b }, rd)
}

fn random_reduced(rng: &mut sample::SampleRng, n: usize) -> ReducedSection {
    ReducedSection::new(
        sample::vector_field(rng, n, 0, 2),
        sample::poly(rng, n, 0, 2),
        sample::form(rng, n, 0, 1, 2),
        sample::poly(rng, n, 0, 2),
    )
    .unwrap()
}

#[test]
fn reduced_bracket_matches_total_space() {
    for seed in 0..4 {
        let (lift, _, rd) = random_reduction(seed, 3);
        let h = lift.flux(&rd);
        let mut rng = sample::rng(100 + seed);
        for _ in 0..4 {
            let r1 = random_reduced(&mut rng, 3);
            let r2 = random_reduced(&mut rng, 3);
            assert_eq!(lift.down(&lift.up(&r1)), r1);
            let full = bracket_h(&h, &lift.up(&r1), &lift.up(&r2)).unwrap();
            assert_eq!(lift.down(&full), reduced_bracket(&rd, &r1, &r2).unwrap());
            let p = pairing(&lift.up(&r1), &lift.up(&r2)).unwrap();
            assert_eq!(lift.down_fn(&p), reduced_pairing(&r1, &r2).unwrap());
        }
    }
}

#[test]
fn reduced_bracket_examples() {
    let n = 2;
    let zero = ReductionData::zero(n, 0);
    let r = |xv: VectorField, f: CoeffFn, w: DiffForm, g: CoeffFn| {
        ReducedSection::new(xv, f, w, g).unwrap()
    };
    let z = CoeffFn::zero(n, 0);
    let z1 = DiffForm::zero(n, 0);
    let r1 = r(e(n, 0), x(n, 1), z1.clone(), z.clone());
    let r2 = r(VectorField::coord(n, 0, 1, x(n, 0)), x(n, 0).mul(&x(n, 0)), z1.clone(), z.clone());
    let out = reduced_bracket(&zero, &r1, &r2).unwrap();
    assert_eq!(out.x, r1.x.bracket(&r2.x));
    assert_eq!(out.f, r1.x.apply(&r2.f).sub(&r2.x.apply(&r1.f)));
    let fa = dx(n, 0).wedge(&dx(n, 1));
    let rd = ReductionData::new(fa.clone(), DiffForm::zero(n, 0), z1.clone()).unwrap();
    let v1 = r(e(n, 0), z.clone(), z1.clone(), z.clone());
    let v2 = r(e(n, 1), z.clone(), z1.clone(), z.clone());
    let out = reduced_bracket(&rd, &v1, &v2).unwrap();
    assert_eq!(out.f, CoeffFn::constant(n, 0, Scalar::int(-1)));
    let rd2 = ReductionData::new(z1.clone(), DiffForm::zero(n, 0), fa).unwrap();
    let w1 = r(e(n, 0), z.clone(), z1.clone(), x(n, 1));
    let out = reduced_bracket(&rd2, &w1, &v2).unwrap();
    // X₁(g₂) − X₂(g₁) = −1 and ι_{X₁}ι_{X₂}H⁽²⁾ = −1.
    assert_eq!(out.g, CoeffFn::constant(n, 0, Scalar::int(-2)));
}

#[test]
fn reduction_data_validation() {
    let n = 4;
    let fa = dx(n, 0).wedge(&dx(n, 3));
    let h2 = dx(n, 1).wedge(&dx(n, 2));
    let good = DiffForm::monomial(x(n, 3), &[0, 1, 2]);
    assert_eq!(good.d(), fa.wedge(&h2).scale(&Scalar::int(-1)));
    assert!(ReductionData::new(fa.clone(), good.clone(), h2.clone()).is_ok());
    assert!(ReductionData::new(fa.clone(), good.scale(&Scalar::int(-1)), h2.clone()).is_err());
    assert!(ReductionData::new(fa.mul_fn(&x(n, 1)), DiffForm::zero(n, 0), h2).is_err());
}

#[test]
fn tau_is_an_isomorphism() {
    for seed in 0..4 {
        let (_, _, rd) = random_reduction(seed, 3);
        let dual = rd.dual();
        let mut rng = sample::rng(200 + seed);
        for _ in 0..4 {
            let r1 = random_reduced(&mut rng, 3);
            let r2 = random_reduced(&mut rng, 3);
            assert_eq!(cg_tau(&cg_tau(&r1)), r1);
            assert_eq!(
                reduced_pairing(&cg_tau(&r1), &cg_tau(&r2)).unwrap(),
                reduced_pairing(&r1, &r2).unwrap()
            );
            assert_eq!(
                cg_tau(&reduced_bracket(&rd, &r1, &r2).unwrap()),
                reduced_bracket(&dual, &cg_tau(&r1), &cg_tau(&r2)).unwrap()
            );
        }
    }
    let n = 1;
    let s = ReducedSection::new(e(n, 0), one(n), DiffForm::zero(n, 0), CoeffFn::zero(n, 0)).unwrap();
    let t = cg_tau(&s);
    assert!(t.f.is_zero());
    assert_eq!(t.g, one(n));
}

fn random_invariant(rng: &mut sample::SampleRng, n: usize) -> InvariantForm {
    InvariantForm::new(
        sample::mixed_form(rng, n, 0, 2),
        sample::mixed_form(rng, n, 0, 2),
    )
    .unwrap()
}

#[test]
fn hori_examples_and_intertwining() {
    let n = 3;
    let one_f = InvariantForm::base(DiffForm::one(n, 0));
    let t = hori_t(&one_f);
    assert!(t.g0.is_zero());
    assert_eq!(t.g1, DiffForm::one(n, 0));
    let a = InvariantForm::new(DiffForm::zero(n, 0), DiffForm::one(n, 0)).unwrap();
    assert_eq!(hori_t(&a), InvariantForm::base(DiffForm::one(n, 0).scale(&Scalar::int(-1))));
    for seed in 0..4 {
        let (lift, dual_lift, rd) = random_reduction(seed, n);
        let dual = rd.dual();
        let mut rng = sample::rng(300 + seed);
        for _ in 0..4 {
            let g = random_invariant(&mut rng, n);
            let dg = reduced_d_h(&rd, &g).unwrap();
            // Against the total space.
            let total = lift.up_form(&g.g0).add(&lift.conn().wedge(&lift.up_form(&g.g1)));
            let dtotal = d_h(&lift.flux(&rd), &total).unwrap();
            let expect = lift.up_form(&dg.g0).add(&lift.conn().wedge(&lift.up_form(&dg.g1)));
            assert_eq!(dtotal, expect);
            let _ = &dual_lift;
            // T is odd: T∘d_H = −d_Ĥ∘T.
            let lhs = hori_t(&dg);
            let rhs = reduced_d_h(&dual, &hori_t(&g)).unwrap();
            assert_eq!(lhs, rhs.scale(&Scalar::int(-1)));
            assert!(!lhs.is_zero());
        }
    }
}

#[test]
fn clifford_sign_is_minus_one() {
    let n = 3;
    let mut rng = sample::rng(9);
    let mut pairs = Vec::new();
    for _ in 0..10 {
        pairs.push((random_reduced(&mut rng, n), random_invariant(&mut rng, n)));
    }
    assert_eq!(clifford_sign(&pairs).unwrap(), Some(-1));
}
