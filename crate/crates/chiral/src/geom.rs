//! Classical calculus on a patch: vector fields and differential forms with
//! coefficients in [`CoeffFn`].

use crate::coeff::{CoeffError, CoeffFn};
use crate::scalar::Scalar;
use std::collections::BTreeMap;

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct VectorField {
    pub comps: Vec<CoeffFn>,
}

impl VectorField {
    pub fn zero(n: usize, m: usize) -> Self {
        VectorField {
            comps: vec![CoeffFn::zero(n, m); n + m],
        }
    }

    /// `f ∂/∂(coordinate i)`.
    pub fn coord(n: usize, m: usize, i: usize, f: CoeffFn) -> Self {
        let mut v = VectorField::zero(n, m);
        v.comps[i] = f;
        v
    }

    pub fn dims(&self) -> (usize, usize) {
        self.comps
            .first()
            .map(|c| c.dims())
            .unwrap_or((0, 0))
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|c| c.is_zero())
    }

    /// `X(f) = Σ Xⁱ ∂ᵢf`.
    pub fn apply(&self, f: &CoeffFn) -> CoeffFn {
        let (n, m) = f.dims();
        let mut r = CoeffFn::zero(n, m);
        for (i, xi) in self.comps.iter().enumerate() {
            if !xi.is_zero() {
                r.add_assign(&xi.mul(&f.partial(i).expect("coordinate in range")));
            }
        }
        r
    }

    pub fn bracket(&self, o: &VectorField) -> VectorField {
        VectorField {
            comps: self
                .comps
                .iter()
                .zip(&o.comps)
                .map(|(a, b)| self.apply(b).sub(&o.apply(a)))
                .collect(),
        }
    }

    pub fn add(&self, o: &VectorField) -> VectorField {
        VectorField {
            comps: self.comps.iter().zip(&o.comps).map(|(a, b)| a.add(b)).collect(),
        }
    }

    pub fn sub(&self, o: &VectorField) -> VectorField {
        self.add(&o.scale(&Scalar::int(-1)))
    }

    pub fn scale(&self, c: &Scalar) -> VectorField {
        VectorField {
            comps: self.comps.iter().map(|a| a.scale(c)).collect(),
        }
    }

    pub fn mul_fn(&self, f: &CoeffFn) -> VectorField {
        VectorField {
            comps: self.comps.iter().map(|a| a.mul(f)).collect(),
        }
    }
}

/// An element of the exterior algebra: `Σ f_I dx^I` with `I` strictly increasing.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct DiffForm {
    n: usize,
    m: usize,
    terms: BTreeMap<Vec<usize>, CoeffFn>,
}

/// Sign of merging two strictly increasing index lists, or `None` on overlap.
pub fn merge_sign(a: &[usize], b: &[usize]) -> Option<(i64, Vec<usize>)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    let mut swaps = 0usize;
    while i < a.len() && j < b.len() {
        if a[i] == b[j] {
            return None;
        }
        if a[i] < b[j] {
            out.push(a[i]);
            i += 1;
        } else {
            swaps += a.len() - i;
            out.push(b[j]);
            j += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    Some((if swaps % 2 == 0 { 1 } else { -1 }, out))
}

impl DiffForm {
    pub fn zero(n: usize, m: usize) -> Self {
        DiffForm {
            n,
            m,
            terms: BTreeMap::new(),
        }
    }

    pub fn function(f: CoeffFn) -> Self {
        let (n, m) = f.dims();
        let mut w = DiffForm::zero(n, m);
        w.add_term(vec![], f);
        w
    }

    pub fn one(n: usize, m: usize) -> Self {
        DiffForm::function(CoeffFn::one(n, m))
    }

    /// `f dx^{i₁} ∧ … ∧ dx^{i_k}` for any index order (sign-normalized).
    pub fn monomial(f: CoeffFn, idx: &[usize]) -> Self {
        let (n, m) = f.dims();
        let mut w = DiffForm::function(f);
        for &i in idx {
            w = w.wedge(&DiffForm::dx(n, m, i));
        }
        w
    }

    pub fn dx(n: usize, m: usize, i: usize) -> Self {
        let mut w = DiffForm::zero(n, m);
        w.add_term(vec![i], CoeffFn::one(n, m));
        w
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.n, self.m)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<usize>, &CoeffFn)> {
        self.terms.iter()
    }

    pub fn add_term(&mut self, idx: Vec<usize>, f: CoeffFn) {
        if f.is_zero() {
            return;
        }
        let e = self
            .terms
            .entry(idx.clone())
            .or_insert_with(|| CoeffFn::zero(f.dims().0, f.dims().1));
        e.add_assign(&f);
        if e.is_zero() {
            self.terms.remove(&idx);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Degree if homogeneous (the zero form reports `Some(0)`).
    pub fn degree(&self) -> Option<usize> {
        let mut it = self.terms.keys().map(|k| k.len());
        let d = match it.next() {
            None => return Some(0),
            Some(d) => d,
        };
        if it.all(|e| e == d) {
            Some(d)
        } else {
            None
        }
    }

    pub fn component(&self, k: usize) -> DiffForm {
        DiffForm {
            n: self.n,
            m: self.m,
            terms: self
                .terms
                .iter()
                .filter(|(i, _)| i.len() == k)
                .map(|(i, f)| (i.clone(), f.clone()))
                .collect(),
        }
    }

    pub fn add(&self, o: &DiffForm) -> DiffForm {
        let mut r = self.clone();
        for (i, f) in &o.terms {
            r.add_term(i.clone(), f.clone());
        }
        r
    }

    pub fn sub(&self, o: &DiffForm) -> DiffForm {
        self.add(&o.scale(&Scalar::int(-1)))
    }

    pub fn scale(&self, c: &Scalar) -> DiffForm {
        let mut r = DiffForm::zero(self.n, self.m);
        for (i, f) in &self.terms {
            r.add_term(i.clone(), f.scale(c));
        }
        r
    }

    pub fn mul_fn(&self, g: &CoeffFn) -> DiffForm {
        let mut r = DiffForm::zero(self.n, self.m);
        for (i, f) in &self.terms {
            r.add_term(i.clone(), f.mul(g));
        }
        r
    }

    pub fn wedge(&self, o: &DiffForm) -> DiffForm {
        let mut r = DiffForm::zero(self.n, self.m);
        for (a, fa) in &self.terms {
            for (b, fb) in &o.terms {
                if let Some((s, idx)) = merge_sign(a, b) {
                    r.add_term(idx, fa.mul(fb).scale(&Scalar::int(s)));
                }
            }
        }
        r
    }

    /// Exterior derivative.
    pub fn d(&self) -> DiffForm {
        let mut r = DiffForm::zero(self.n, self.m);
        for (idx, f) in &self.terms {
            for j in 0..self.n + self.m {
                let df = f.partial(j).expect("coordinate in range");
                if df.is_zero() {
                    continue;
                }
                if let Some((s, out)) = merge_sign(&[j], idx) {
                    r.add_term(out, df.scale(&Scalar::int(s)));
                }
            }
        }
        r
    }

    /// Contraction `ι_X`.
    pub fn contract(&self, x: &VectorField) -> DiffForm {
        let mut r = DiffForm::zero(self.n, self.m);
        for (idx, f) in &self.terms {
            for (pos, &i) in idx.iter().enumerate() {
                if x.comps[i].is_zero() {
                    continue;
                }
                let mut rest = idx.clone();
                rest.remove(pos);
                let s = if pos % 2 == 0 { 1 } else { -1 };
                r.add_term(rest, f.mul(&x.comps[i]).scale(&Scalar::int(s)));
            }
        }
        r
    }

    /// Lie derivative by Cartan's formula.
    pub fn lie(&self, x: &VectorField) -> DiffForm {
        self.contract(x).d().add(&self.d().contract(x))
    }

    /// The 0-form part as a function.
    pub fn function_part(&self) -> CoeffFn {
        self.terms
            .get(&Vec::new())
            .cloned()
            .unwrap_or_else(|| CoeffFn::zero(self.n, self.m))
    }

    /// Coefficient of `dx^i` in a 1-form.
    pub fn one_form_coeff(&self, i: usize) -> CoeffFn {
        self.terms
            .get(&vec![i])
            .cloned()
            .unwrap_or_else(|| CoeffFn::zero(self.n, self.m))
    }

    /// The Poincaré-lemma primitive `Kω` on a flat patch: for closed `ω` of
    /// positive degree, `d(Kω) = ω`. `None` if some coefficient depends on an
    /// angular coordinate.
    pub fn primitive(&self) -> Option<DiffForm> {
        let euler = VectorField {
            comps: (0..self.n + self.m)
                .map(|i| {
                    if i < self.n {
                        CoeffFn::flat_coord(self.n, self.m, i).expect("flat index")
                    } else {
                        CoeffFn::zero(self.n, self.m)
                    }
                })
                .collect(),
        };
        let mut r = DiffForm::zero(self.n, self.m);
        for (idx, f) in &self.terms {
            for (mono, c) in f.terms() {
                if mono.modes.iter().any(|&k| k != 0) || idx.iter().any(|&i| i >= self.n) {
                    return None;
                }
                let weight = (mono.degree() as i64) + idx.len() as i64;
                if weight == 0 {
                    continue;
                }
                let g = CoeffFn::from_term(self.n, self.m, mono.clone(), c * &Scalar::ratio(1, weight));
                let mut piece = DiffForm::zero(self.n, self.m);
                piece.add_term(idx.clone(), g);
                r = r.add(&piece.contract(&euler));
            }
        }
        Some(r)
    }

    pub fn max_coeff_degree(&self) -> u32 {
        self.terms.values().map(|f| f.degree()).max().unwrap_or(0)
    }
}

impl CoeffFn {
    /// `df` as a 1-form.
    pub fn d(&self) -> DiffForm {
        DiffForm::function(self.clone()).d()
    }
}

pub fn check_same_dims(a: (usize, usize), b: (usize, usize)) -> Result<(), CoeffError> {
    if a != b {
        Err(CoeffError::Mismatch(a.0, a.1, b.0, b.1))
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(i: usize) -> CoeffFn {
        CoeffFn::flat_coord(3, 0, i).unwrap()
    }

    #[test]
    fn d_squared_zero() {
        let w = DiffForm::monomial(x(0).mul(&x(1)).mul(&x(2)), &[1]);
        assert!(w.d().d().is_zero());
    }

    #[test]
    fn contraction_sign() {
        let h = DiffForm::monomial(CoeffFn::one(3, 0), &[0, 1, 2]);
        let ex = VectorField::coord(3, 0, 0, CoeffFn::one(3, 0));
        let ey = VectorField::coord(3, 0, 1, CoeffFn::one(3, 0));
        let r = h.contract(&ey).contract(&ex);
        assert_eq!(r, DiffForm::dx(3, 0, 2).scale(&Scalar::int(-1)));
    }

    #[test]
    fn wedge_anticommutes() {
        let a = DiffForm::dx(3, 0, 0);
        let b = DiffForm::dx(3, 0, 2);
        assert_eq!(a.wedge(&b), b.wedge(&a).scale(&Scalar::int(-1)));
        assert!(a.wedge(&a).is_zero());
    }

    #[test]
    fn primitive_inverts_d_on_closed_forms() {
        let mut rng = crate::sample::rng(4);
        for k in 0..3 {
            for _ in 0..5 {
                let w = crate::sample::form(&mut rng, 3, 0, k, 3).d();
                assert_eq!(w.primitive().unwrap().d(), w);
            }
        }
        let f = DiffForm::monomial(x(0), &[0, 1]);
        assert_eq!(f.primitive().unwrap().d(), f);
        let ang = DiffForm::function(CoeffFn::fourier(1, 1, 0, 2).unwrap());
        assert!(ang.primitive().is_none());
    }
}
