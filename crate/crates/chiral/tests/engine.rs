use chiral::coeff::{CoeffFn, CoordinateSystem};
use chiral::scalar::Scalar;
use chiral::va::{FieldExpr, FieldFamilies, GenKind, VaContext};
use std::sync::Arc;

fn ctx(n: usize) -> Arc<VaContext> {
    VaContext::new(CoordinateSystem::standard(n, 0), FieldFamilies::ALL, &[])
        .finalize()
        .unwrap()
}

fn g(c: &VaContext, kind: GenKind, i: usize) -> FieldExpr {
    c.gen(c.field_id(kind, i).unwrap()).unwrap()
}

fn dgamma(c: &VaContext, i: usize) -> FieldExpr {
    c.jet(c.field_id(GenKind::Gamma, i).unwrap(), 1).unwrap()
}

struct Tvo {
    j: FieldExpr,
    q: FieldExpr,
    gg: FieldExpr,
    l: FieldExpr,
}

fn tvo(c: &VaContext, n: usize) -> Tvo {
    let mut j = FieldExpr::zero(c);
    let mut q = FieldExpr::zero(c);
    let mut gg = FieldExpr::zero(c);
    let mut l = FieldExpr::zero(c);
    for i in 0..n {
        let b = g(c, GenKind::B, i);
        let cc = g(c, GenKind::C, i);
        let be = g(c, GenKind::Beta, i);
        let dg = dgamma(c, i);
        j.add_assign(&c.wick(&cc, &b).unwrap());
        q.add_assign(&c.wick(&be, &cc).unwrap());
        gg.add_assign(&c.wick(&b, &dg).unwrap());
        l.add_assign(&c.wick(&be, &dg).unwrap());
        let dc = c.derivative(&cc).unwrap();
        l = l.sub(&c.wick(&b, &dc).unwrap());
    }
    Tvo { j, q, gg, l }
}

fn konst(c: &VaContext, v: i64) -> FieldExpr {
    FieldExpr::constant(c, Scalar::int(v))
}

#[test]
fn free_field_brackets() {
    let c = ctx(2);
    let be = g(&c, GenKind::Beta, 0);
    let ga = g(&c, GenKind::Gamma, 0);
    let lb = c.lambda_bracket(&be, &ga).unwrap();
    assert_eq!(lb.entries, vec![konst(&c, 1)]);
    let b = g(&c, GenKind::B, 0);
    let cc = g(&c, GenKind::C, 0);
    assert_eq!(c.circle(&b, 0, &cc).unwrap(), konst(&c, 1));
    assert_eq!(c.circle(&cc, 0, &b).unwrap(), konst(&c, 1));
    let g2 = c.wick(&ga, &ga).unwrap();
    let x2 = CoeffFn::flat_coord(2, 0, 0).unwrap().pow(2);
    assert_eq!(g2, FieldExpr::function(&c, x2.clone()));
    assert_eq!(
        c.circle(&be, 0, &g2).unwrap(),
        FieldExpr::function(&c, CoeffFn::flat_coord(2, 0, 0).unwrap().scale(&Scalar::int(2)))
    );
    assert!(c.wick(&b, &b).unwrap().is_zero());
    let d = c.derivative(&g2).unwrap();
    assert_eq!(c.show(&d), ":dgamma[1,1] (2*x1):");
}

#[test]
fn tvo_block() {
    for n in 1..=3usize {
        let c = ctx(n);
        let t = tvo(&c, n);
        let nn = n as i64;
        let dl = c.derivative(&t.l).unwrap();
        let lb = c.lambda_bracket(&t.l, &t.l).unwrap();
        assert_eq!(lb.entries, vec![dl, t.l.scale(&Scalar::int(2))], "n={n}");
        let lb = c.lambda_bracket(&t.q, &t.gg).unwrap();
        assert_eq!(lb.entries, vec![t.l.clone(), t.j.clone(), konst(&c, nn)], "n={n}");
        let lb = c.lambda_bracket(&t.j, &t.j).unwrap();
        assert_eq!(lb.entries, vec![FieldExpr::zero(&c), konst(&c, nn)], "JJ");
        let dj = c.derivative(&t.j).unwrap();
        let lb = c.lambda_bracket(&t.l, &t.j).unwrap();
        assert_eq!(lb.entries, vec![dj, t.j.clone(), konst(&c, -nn)], "LJ n={n}");
        let lb = c.lambda_bracket(&t.j, &t.gg).unwrap();
        assert_eq!(lb.entries, vec![t.gg.neg()], "JG");
        let lb = c.lambda_bracket(&t.j, &t.q).unwrap();
        assert_eq!(lb.entries, vec![t.q.clone()], "JQ");
        for (x, w) in [(&t.gg, 2), (&t.q, 1)] {
            let lb = c.lambda_bracket(&t.l, x).unwrap();
            let mut e = vec![c.derivative(x).unwrap(), x.scale(&Scalar::int(w))];
            if w == 1 {
                e[1] = x.clone();
            }
            assert_eq!(lb.entries, e, "L primary");
        }
        assert!(c.lambda_bracket(&t.gg, &t.gg).unwrap().is_zero());
        assert!(c.lambda_bracket(&t.q, &t.q).unwrap().is_zero());
    }
}
