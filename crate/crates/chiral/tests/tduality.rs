use chiral::coeff::CoeffFn;
use chiral::courant::{InvariantForm, ReductionData};
use chiral::geom::{DiffForm, VectorField};
use chiral::sample;
use chiral::scalar::Scalar;
use chiral::tduality::{commutator_rewriting, derivative_rewriting, ModeWord, random_mode_word, canonical_words, eval_words, check_brackets_mod, drop_l_a, untwist_quotient, BundlePatch, DualPairSetup, QuotientContext, Side};
use chiral::va::FieldExpr;

/// Random consistent data `F = da`, `H⁽²⁾ = db`, `H⁽³⁾ = −a∧db + dc`.
fn random_data(seed: u64, n: usize, deg: u32) -> (DiffForm, DiffForm, ReductionData) {
    let mut rng = sample::rng(seed);
    let a = sample::form(&mut rng, n, 0, 1, deg);
    let b = sample::form(&mut rng, n, 0, 1, deg);
    let c = sample::form(&mut rng, n, 0, 2, deg);
    let h3 = a.wedge(&b.d()).scale(&Scalar::int(-1)).add(&c.d());
    let rd = ReductionData::new(a.d(), h3, b.d()).unwrap();
    (a, b, rd)
}

#[test]
fn quotient_table_matches_total_space() {
    for (n, seed) in [(2, 0), (2, 1), (2, 2), (3, 3)] {
        let (a, _, rd) = random_data(seed, n, 2);
        let q = QuotientContext::new(rd, ("A", "iota_A")).unwrap();
        let bundle = BundlePatch::new(a).unwrap();
        let hom = q.realize(&bundle).unwrap();
        let gens = q.generator_fields().unwrap();
        let proj = |e: &FieldExpr| drop_l_a(&bundle, e);
        let bad = check_brackets_mod(q.ctx(), bundle.ctx(), &hom, &gens, &proj).unwrap();
        assert_eq!(bad, None, "seed {seed}");
    }
}

#[test]
fn quotient_differential_matches_total_space() {
    for (n, seed) in [(2, 0), (2, 1), (2, 2), (3, 3)] {
        let (a, _, rd) = random_data(seed, n, 2);
        let q = QuotientContext::new(rd, ("A", "iota_A")).unwrap();
        let bundle = BundlePatch::new(a).unwrap();
        let hom = q.realize(&bundle).unwrap();
        for (name, x) in q.generator_fields().unwrap() {
            let lhs = hom.apply(&q.d(&x).unwrap()).unwrap();
            let rhs = bundle.patch().d(&hom.apply(&x).unwrap()).unwrap();
            assert_eq!(drop_l_a(&bundle, &lhs), drop_l_a(&bundle, &rhs), "seed {seed} {name}");
        }
    }
}

#[test]
fn quotient_differential_squares_to_zero() {
    let (_, _, rd) = random_data(7, 3, 2);
    let q = QuotientContext::new(rd, ("A", "iota_A")).unwrap();
    for (name, x) in q.generator_fields().unwrap() {
        assert!(q.d(&q.d(&x).unwrap()).unwrap().is_zero(), "{name}");
    }
}

#[test]
fn tau_preserves_brackets() {
    for seed in 0..3 {
        let (_, _, rd) = random_data(seed, 2, 2);
        let pair = DualPairSetup::new(rd).unwrap();
        let (z, zh) = (pair.side(Side::Z), pair.side(Side::Dual));
        let tau = pair.tau_ch().unwrap();
        let id = |e: &FieldExpr| e.clone();
        let gens = z.generator_fields().unwrap();
        assert_eq!(check_brackets_mod(z.ctx(), zh.ctx(), &tau, &gens, &id).unwrap(), None);
        // Parity and the shifted grade 2·wt + deg are preserved; the ℤ-degree is not.
        for (name, g) in &gens {
            let t = tau.apply(g).unwrap();
            assert_eq!(z.ctx().parity_of(g), zh.ctx().parity_of(&t), "{name}");
            let g2 = |ctx: &chiral::va::VaContext, e: &FieldExpr| {
                e.terms().map(|(m, _)| ctx.mono_grade2(m)).collect::<Vec<_>>()
            };
            assert_eq!(g2(z.ctx(), g), g2(zh.ctx(), &t), "{name}");
        }
        assert_ne!(z.ctx().degree_of(&z.a()), zh.ctx().degree_of(&tau.apply(&z.a()).unwrap()));
        let back = pair.tau_ch_inverse().unwrap();
        for (name, x) in &gens {
            assert_eq!(&back.apply(&tau.apply(x).unwrap()).unwrap(), x, "{name}");
        }
    }
}

fn x(n: usize, i: usize) -> CoeffFn {
    CoeffFn::flat_coord(n, 0, i).unwrap()
}

fn dx(n: usize, i: usize) -> DiffForm {
    DiffForm::dx(n, 0, i)
}

/// `a = x1 dx2`, `b = x2 dx3`, `c = x1 x2 dx2 dx3` on a 3-dimensional base.
fn explicit_data() -> ReductionData {
    let n = 3;
    let a = dx(n, 1).mul_fn(&x(n, 0));
    let b = dx(n, 2).mul_fn(&x(n, 1));
    let c = dx(n, 1).wedge(&dx(n, 2)).mul_fn(&x(n, 0).mul(&x(n, 1)));
    let h3 = a.wedge(&b.d()).scale(&Scalar::int(-1)).add(&c.d());
    ReductionData::new(a.d(), h3, b.d()).unwrap()
}

#[test]
fn naive_tau_fails_and_modified_differentials_intertwine() {
    let pair = DualPairSetup::new(explicit_data()).unwrap();
    let (z, zh) = (pair.side(Side::Z), pair.side(Side::Dual));
    let tau = pair.tau_ch().unwrap();
    // τ(D ι_A) = 0 while D̂(τ ι_A) = D̂ Â = F_Â = H⁽²⁾.
    assert!(z.d(&z.iota_a()).unwrap().is_zero());
    assert_eq!(tau.apply(&z.iota_a()).unwrap(), zh.a());
    assert_eq!(zh.d(&zh.a()).unwrap(), zh.form(z.data().h2()).unwrap());
    assert!(!zh.d(&zh.a()).unwrap().is_zero());
    let rows = pair.intertwining().unwrap();
    assert!(rows.iter().all(|r| r.modified), "{rows:?}");
    let naive_bad: Vec<_> = rows.iter().filter(|r| !r.naive).map(|r| r.generator.as_str()).collect();
    assert!(naive_bad.contains(&"iota_A") && naive_bad.contains(&"A"), "{naive_bad:?}");
    for seed in 0..3 {
        let (_, _, rd) = random_data(seed, 2, 2);
        let rows = DualPairSetup::new(rd).unwrap().intertwining().unwrap();
        assert!(rows.iter().all(|r| r.modified), "seed {seed}");
    }
}

#[test]
fn untwisting_is_a_chain_isomorphism() {
    for seed in 0..3 {
        let (_, _, rd) = random_data(seed, 2, 2);
        let plain_data = ReductionData::new(rd.f_a().clone(), DiffForm::zero(2, 0), DiffForm::zero(2, 0)).unwrap();
        let plain = QuotientContext::new(plain_data, ("A", "iota_A")).unwrap();
        let tw = QuotientContext::new(rd, ("A", "iota_A")).unwrap();
        let phi = untwist_quotient(&plain, &tw).unwrap();
        let gens = plain.generator_fields().unwrap();
        let id = |e: &FieldExpr| e.clone();
        assert_eq!(check_brackets_mod(plain.ctx(), tw.ctx(), &phi, &gens, &id).unwrap(), None);
        for (name, g) in &gens {
            let lhs = phi.apply(&plain.d(g).unwrap()).unwrap();
            let rhs = tw.d(&phi.apply(g).unwrap()).unwrap();
            assert_eq!(lhs, rhs, "seed {seed} {name}");
        }
    }
    assert!(untwist_quotient(
        &QuotientContext::new(explicit_data(), ("A", "iota_A")).unwrap(),
        &QuotientContext::new(explicit_data(), ("A", "iota_A")).unwrap()
    )
    .is_err());
}

#[test]
fn basic_brackets_replay() {
    let pair = DualPairSetup::new(explicit_data()).unwrap();
    let mut rng = sample::rng(5);
    for _ in 0..4 {
        let x = sample::vector_field(&mut rng, 3, 0, 2);
        let y = sample::vector_field(&mut rng, 3, 0, 2);
        for side in [Side::Z, Side::Dual] {
            let r = pair.side(side).replay(&x, &y).unwrap();
            assert!(r.all(), "{side:?} {r:?}");
        }
    }
}

#[test]
fn canonical_words_round_trip() {
    let q = QuotientContext::new(explicit_data(), ("A", "iota_A")).unwrap();
    let ctx = q.ctx();
    for w in 0..=2 {
        for mono in ctx.pbw_monos(w, &|_| true) {
            let f = x(3, 0).mul(&x(3, 1)).add(&CoeffFn::one(3, 0));
            let e = FieldExpr::state(ctx, mono, f);
            let words = canonical_words(ctx, &e).unwrap();
            assert_eq!(eval_words(ctx, &words).unwrap(), e);
        }
    }
}

#[test]
fn t_ch_examples() {
    let pair = DualPairSetup::new(explicit_data()).unwrap();
    let (z, zh) = (pair.side(Side::Z), pair.side(Side::Dual));
    assert_eq!(pair.t_ch(&FieldExpr::one(z.ctx())).unwrap(), zh.a());
    assert_eq!(pair.t_ch(&z.a()).unwrap(), FieldExpr::one(zh.ctx()).scale(&Scalar::int(-1)));
    // ι_A = (ι_A)₋₁1, so T(ι_A) = −Â₋₁Â = −:∂Â Â:.
    let ah = zh.a();
    let want = zh.ctx().wick(&zh.ctx().derivative(&ah).unwrap(), &ah).unwrap();
    assert_eq!(pair.t_ch(&z.iota_a()).unwrap(), want.scale(&Scalar::int(-1)));
}

/// Monomial forms `f dx_I` with `|I| ≤ 2` and `f` in a few fixed polynomials.
fn spanning_forms(n: usize) -> Vec<DiffForm> {
    let fns = [CoeffFn::one(n, 0), x(n, 0), x(n, 1).mul(&x(n, 2))];
    let mut idx: Vec<Vec<usize>> = vec![vec![]];
    for i in 0..n {
        idx.push(vec![i]);
        for j in i + 1..n {
            idx.push(vec![i, j]);
        }
    }
    let mut out = Vec::new();
    for f in &fns {
        for i in &idx {
            out.push(DiffForm::monomial(f.clone(), i));
        }
    }
    out
}

#[test]
fn t_ch_at_weight_zero_is_hori() {
    let pair = DualPairSetup::new(explicit_data()).unwrap();
    let zero = DiffForm::zero(3, 0);
    for w in spanning_forms(3) {
        for g in [
            InvariantForm::new(w.clone(), zero.clone()).unwrap(),
            InvariantForm::new(zero.clone(), w.clone()).unwrap(),
            InvariantForm::new(w.clone(), w.clone()).unwrap(),
        ] {
            assert!(pair.weight_zero_matches_hori(&g).unwrap(), "{g:?}");
        }
    }
}

#[test]
fn t_ch_grading_and_well_definedness() {
    let pair = DualPairSetup::new(explicit_data()).unwrap();
    let (z, zh) = (pair.side(Side::Z), pair.side(Side::Dual));
    let mut rng = sample::rng(17);
    let (mut graded, mut pairs) = (0, 0);
    while graded < 50 {
        let word = random_mode_word(&mut rng, z, 2, false).unwrap();
        let e = word.eval(z.ctx()).unwrap();
        let t = pair.t_ch_word(&word).unwrap();
        if e.is_zero() {
            assert!(t.is_zero(), "{word:?}");
            continue;
        }
        graded += 1;
        // Weight is preserved; the degree shifts by one only modulo 2.
        for ((wt, deg), part) in z.ctx().grade(&e) {
            let tp = pair.t_ch(&part).unwrap();
            for ((wt2, deg2), _) in zh.ctx().grade(&tp) {
                assert_eq!(wt2, wt, "{word:?}");
                assert_eq!((deg2 - deg - 1).rem_euclid(2), 0, "{word:?}");
            }
        }
        // The word and the canonical words of its value denote the same element.
        if word.letters.len() > 1 && pairs < 20 {
            pairs += 1;
            assert_eq!(t, pair.t_ch(&e).unwrap(), "{word:?}");
        }
    }
    assert_eq!(pairs, 20);
}

#[test]
fn t_ch_recursion_is_not_consistent_beyond_canonical_words() {
    let pair = DualPairSetup::new(explicit_data()).unwrap();
    let (z, zh) = (pair.side(Side::Z), pair.side(Side::Dual));
    let ctx = z.ctx();
    // β₀ annihilates the vacuum, but (β)₀ Â = ι F_Â does not vanish.
    let beta = ctx.gen_by_name("beta[1]").unwrap();
    let word = ModeWord::vacuum().apply(beta, 0);
    assert!(word.eval(ctx).unwrap().is_zero());
    let e1 = VectorField::coord(3, 0, 0, CoeffFn::one(3, 0));
    assert_eq!(pair.t_ch_word(&word).unwrap(), zh.form(&zh.data().f_a().contract(&e1)).unwrap());
    // (∂A)₋₁1 = A₋₁1 = ∂A, but τ changes the weight of A, so the two words
    // have different images.
    let rw = derivative_rewriting(ctx, &z.a(), -1, &ModeWord::vacuum()).unwrap();
    assert_eq!(eval_words(ctx, &rw.left).unwrap(), eval_words(ctx, &rw.right).unwrap());
    assert_ne!(pair.t_ch_words(&rw.left).unwrap(), pair.t_ch_words(&rw.right).unwrap());
    // The same rewriting on a base generator is respected.
    let rw = derivative_rewriting(ctx, &ctx.gen_by_name("b[2]").unwrap(), -2, &ModeWord::vacuum()).unwrap();
    assert_eq!(pair.t_ch_words(&rw.left).unwrap(), pair.t_ch_words(&rw.right).unwrap());
}

/// Count commutator rewritings `νⱼρₖμ` on which the two sides have different
/// images under `T^ch`; the rewriting itself is checked to be an identity.
fn commutator_disagreements(pair: &DualPairSetup, seed: u64, count: usize) -> usize {
    use rand::Rng;
    let z = pair.side(Side::Z);
    let ctx = z.ctx();
    let mut rng = sample::rng(seed);
    let gens: Vec<FieldExpr> = z.generator_fields().unwrap().into_iter().map(|(_, e)| e).collect();
    let mut bad = 0;
    for _ in 0..count {
        let nu = &gens[rng.gen_range(0..gens.len())];
        let rho = &gens[rng.gen_range(0..gens.len())];
        let (wn, wr) = (ctx.weight_of(nu).unwrap(), ctx.weight_of(rho).unwrap());
        let mu = random_mode_word(&mut rng, z, 1, false).unwrap();
        let jn = -wn - rng.gen_range(0..2);
        let rw = commutator_rewriting(ctx, (nu, jn), (rho, -wr), &mu).unwrap();
        assert_eq!(eval_words(ctx, &rw.left).unwrap(), eval_words(ctx, &rw.right).unwrap());
        if pair.t_ch_words(&rw.left).unwrap() != pair.t_ch_words(&rw.right).unwrap() {
            bad += 1;
        }
    }
    bad
}

#[test]
fn t_ch_commutator_rewritings() {
    let n = 3;
    let z3 = DiffForm::zero(n, 0);
    let f = dx(n, 0).wedge(&dx(n, 1));
    let h3 = dx(n, 0).wedge(&dx(n, 1)).wedge(&dx(n, 2)).mul_fn(&x(n, 1));
    // Without curvature on either side every rewriting is respected, whatever H⁽³⁾ is.
    for data in [
        ReductionData::zero(n, 0),
        ReductionData::new(z3.clone(), h3, z3.clone()).unwrap(),
    ] {
        assert_eq!(commutator_disagreements(&DualPairSetup::new(data).unwrap(), 23, 40), 0);
    }
    // With F_A ≠ 0 or H⁽²⁾ ≠ 0, τ moves a weight-0 table entry between the
    // weight-0 slot of A and the weight-1 slot of ι_Â, and some rewritings
    // acquire different images.
    for data in [
        ReductionData::new(f.clone(), z3.clone(), z3.clone()).unwrap(),
        ReductionData::new(z3.clone(), z3.clone(), f.clone()).unwrap(),
        explicit_data(),
    ] {
        assert!(commutator_disagreements(&DualPairSetup::new(data).unwrap(), 23, 100) > 0);
    }
}

fn curved_bundle() -> BundlePatch {
    // a = γ¹c², so F_A = c¹c².
    BundlePatch::new(dx(2, 1).mul_fn(&x(2, 0))).unwrap()
}

#[test]
fn heisenberg_lemma() {
    let bp = curved_bundle();
    assert!(!bp.curvature().is_zero());
    let ctx = bp.ctx();
    let (la, ga) = (bp.l_a().unwrap(), bp.gamma_a().unwrap());
    let one = FieldExpr::one(ctx);
    assert_eq!(ctx.lambda_bracket(&la, &ga).unwrap().entries, vec![FieldExpr::zero(ctx), one]);
    assert!(ctx.lambda_bracket(&la, &la).unwrap().entries.iter().all(|e| e.is_zero()));
    assert!(ctx.lambda_bracket(&ga, &ga).unwrap().entries.iter().all(|e| e.is_zero()));
    assert_eq!((ctx.weight_of(&ga), ctx.degree_of(&ga)), (Some(1), Some(0)));
}

#[test]
fn gamma_a_differential() {
    for bp in [BundlePatch::new(DiffForm::zero(2, 0)).unwrap(), curved_bundle()] {
        let ctx = bp.ctx();
        let da = ctx.derivative(&bp.a_field().unwrap()).unwrap();
        let lhs = bp.patch().d(&bp.gamma_a().unwrap()).unwrap();
        assert_eq!(lhs, da.sub(&bp.xi_a().unwrap()));
        // D ξ^A = ∂ dA
        let fa = bp.patch().form(&bp.lift_form(&bp.curvature()).unwrap()).unwrap();
        assert_eq!(bp.patch().d(&bp.xi_a().unwrap()).unwrap(), ctx.derivative(&fa).unwrap());
    }
    assert!(BundlePatch::new(DiffForm::zero(2, 0)).unwrap().xi_a().unwrap().is_zero());
}

#[test]
fn invariance_examples() {
    let bp = curved_bundle();
    let f = FieldExpr::function(bp.ctx(), bp.lift_fn(&x(2, 0).mul(&x(2, 1))).unwrap());
    assert!(bp.invariant_check(&f).unwrap());
    assert!(bp.invariant_check(&bp.iota_a().unwrap()).unwrap());
    assert!(bp.invariant_check(&bp.a_field().unwrap()).unwrap());
    assert!(!bp.invariant_check(&bp.gamma_a().unwrap()).unwrap());
    let e1 = VectorField::coord(2, 0, 0, x(2, 1));
    assert!(bp.invariant_check(&bp.iota_hor(&e1).unwrap()).unwrap());
    assert!(bp.invariant_check(&bp.lie_hor(&e1).unwrap()).unwrap());
}

#[test]
fn point_base_is_a_bc_pair() {
    let pair = DualPairSetup::new(ReductionData::zero(0, 0)).unwrap();
    let (z, zh) = (pair.side(Side::Z), pair.side(Side::Dual));
    assert_eq!(z.ctx().generators().len(), 2);
    let br = z.ctx().lambda_bracket(&z.iota_a(), &z.a()).unwrap();
    assert_eq!(br.entries, vec![FieldExpr::one(z.ctx())]);
    let tau = pair.tau_ch().unwrap();
    assert_eq!(tau.apply(&z.a()).unwrap(), zh.iota_a());
    assert_eq!(tau.apply(&z.iota_a()).unwrap(), zh.a());
    assert!(z.d(&z.a()).unwrap().is_zero());
    assert_eq!(z.modified_d(&z.iota_a()).unwrap(), z.d(&z.iota_a()).unwrap());
}

#[test]
fn modified_differential_properties() {
    let pair = DualPairSetup::new(explicit_data()).unwrap();
    for side in [Side::Z, Side::Dual] {
        let q = pair.side(side);
        for (name, g) in q.generator_fields().unwrap() {
            let dd = q.modified_d(&q.modified_d(&g).unwrap()).unwrap();
            assert!(dd.is_zero(), "{side:?} {name}");
        }
        let mut rng = sample::rng(3);
        let xf = sample::vector_field(&mut rng, 3, 0, 2);
        assert_eq!(q.modified_d(&q.iota(&xf).unwrap()).unwrap(), q.lie(&xf).unwrap());
        let f = sample::poly(&mut rng, 3, 0, 2);
        assert_eq!(q.modified_d(&q.function(f.clone())).unwrap(), q.form(&f.d()).unwrap());
        let w = sample::form(&mut rng, 3, 0, 1, 2);
        assert_eq!(q.modified_d(&q.form(&w).unwrap()).unwrap(), q.form(&w.d()).unwrap());
        // (D + H₀)(ι_A) = H⁽²⁾
        assert_eq!(q.modified_d(&q.iota_a()).unwrap(), q.form(q.data().h2()).unwrap());
    }
    // Zero H-data: the plain differential.
    let q = QuotientContext::new(
        ReductionData::new(dx(2, 0).wedge(&dx(2, 1)), DiffForm::zero(2, 0), DiffForm::zero(2, 0)).unwrap(),
        ("A", "iota_A"),
    )
    .unwrap();
    for (_, g) in q.generator_fields().unwrap() {
        assert_eq!(q.modified_d(&g).unwrap(), q.d(&g).unwrap());
    }
}

#[test]
fn tau_image_bracket_example() {
    let pair = DualPairSetup::new(explicit_data()).unwrap();
    let (z, zh) = (pair.side(Side::Z), pair.side(Side::Dual));
    let tau = pair.tau_ch().unwrap();
    let mut rng = sample::rng(9);
    let xf = sample::vector_field(&mut rng, 3, 0, 1);
    let yf = sample::vector_field(&mut rng, 3, 0, 1);
    let br = zh
        .ctx()
        .lambda_bracket(&tau.apply(&z.lie(&xf).unwrap()).unwrap(), &tau.apply(&z.iota(&yf).unwrap()).unwrap())
        .unwrap();
    // ι_{[X,Y]} + :Â ι_Xι_YĤ⁽²⁾: + ι_Xι_YH⁽³⁾ + :ι_Â ι_Xι_YH⁽²⁾:
    let ii = |w: &DiffForm| w.contract(&yf).contract(&xf);
    let d = z.data();
    let want = zh
        .iota(&xf.bracket(&yf))
        .unwrap()
        .add(&zh.ctx().wick(&zh.a(), &zh.form(&ii(d.f_a())).unwrap()).unwrap())
        .add(&zh.form(&ii(d.h3())).unwrap())
        .add(&zh.ctx().wick(&zh.iota_a(), &zh.form(&ii(d.h2())).unwrap()).unwrap());
    assert_eq!(br.entries[0], want);
}
