use super::{FieldExpr, GenId, GenKind, Jet, LambdaPoly, Mono, Parity, VaContext, VaError};
use crate::coeff::CoeffFn;
use crate::scalar::{binomial, factorial, Scalar};
use std::collections::BTreeMap;

fn sign(odd: bool) -> Scalar {
    if odd {
        Scalar::int(-1)
    } else {
        Scalar::one()
    }
}

impl VaContext {
    /// Largest weight among the states of `e`; `None` for zero.
    pub fn max_weight(&self, e: &FieldExpr) -> Option<i64> {
        e.terms().map(|(m, _)| self.mono_weight(m)).max()
    }

    /// Largest doubled bounding grade among the states of `e`.
    fn max_g2(&self, e: &FieldExpr) -> Option<i64> {
        e.terms().map(|(m, _)| self.mono_grade2(m)).max()
    }

    /// The weight if `e` is nonzero and weight-homogeneous.
    pub fn weight_of(&self, e: &FieldExpr) -> Option<i64> {
        let mut it = e.terms().map(|(m, _)| self.mono_weight(m));
        let w = it.next()?;
        if it.all(|x| x == w) {
            Some(w)
        } else {
            None
        }
    }

    /// The parity bit if `e` is nonzero and parity-homogeneous.
    pub fn parity_of(&self, e: &FieldExpr) -> Option<u8> {
        let mut it = e.terms().map(|(m, _)| self.mono_parity(m));
        let p = it.next()?;
        if it.all(|x| x == p) {
            Some(p)
        } else {
            None
        }
    }

    pub fn degree_of(&self, e: &FieldExpr) -> Option<i32> {
        let mut it = e.terms().map(|(m, _)| self.mono_degree(m));
        let d = it.next()?;
        if it.all(|x| x == d) {
            Some(d)
        } else {
            None
        }
    }

    /// Action of the generator mode `y₍ₙ₎` on `e`.
    pub(crate) fn gen_mode(&self, y: GenId, n: i64, e: &FieldExpr) -> FieldExpr {
        let mut out = e.zero_like();
        for (mono, f) in e.terms() {
            let r = self.gen_mode_state(y, n, mono, f, e);
            out.add_assign(&r);
        }
        out
    }

    fn gen_mode_state(
        &self,
        y: GenId,
        n: i64,
        mono: &Mono,
        f: &CoeffFn,
        proto: &FieldExpr,
    ) -> FieldExpr {
        let g = &self.gens[y];
        if g.kind == GenKind::Gamma && n < 0 {
            if n == -1 {
                assert!(
                    !self.coords.is_angular(g.index),
                    "angular coordinate function requested"
                );
                let (nn, mm) = self.dims();
                let gi = CoeffFn::flat_coord(nn, mm, g.index).unwrap();
                return proto.state_like(mono.clone(), f.mul(&gi));
            }
            let k = (-n - 1) as u16;
            let c = factorial(k as u32).inv().unwrap();
            return proto.state_like(mono.insert_even(Jet { gen: y as u16, k }, 1), f.scale(&c));
        }
        if mono.is_empty() {
            if n >= 0 {
                if n > 0 {
                    return proto.zero_like();
                }
                let mut acc = CoeffFn::zero(f.dims().0, f.dims().1);
                for (i, c) in self.gamma_coeff[y].iter().enumerate() {
                    if !c.is_zero() {
                        acc.add_assign(&f.partial(i).unwrap().scale(c));
                    }
                }
                return proto.state_like(Mono::default(), acc);
            }
            let k = (-n - 1) as u16;
            let c = factorial(k as u32).inv().unwrap();
            return proto.state_like(Mono(vec![(Jet { gen: y as u16, k }, 1)]), f.scale(&c));
        }
        let (x1, rest) = mono.split_first();
        let xg = x1.gen as usize;
        let y_odd = g.parity == Parity::Odd;
        let x_odd = self.gens[xg].parity == Parity::Odd;
        if n < 0 {
            let yj = Jet {
                gen: y as u16,
                k: (-n - 1) as u16,
            };
            if yj < x1 || (yj == x1 && !y_odd) {
                let c = factorial(yj.k as u32).inv().unwrap();
                return proto.state_like(mono.prepend(yj), f.scale(&c));
            }
            if yj == x1 {
                // y₍ₙ₎y₍ₙ₎ = ½[y₍ₙ₎, y₍ₙ₎] for odd y.
                let r = proto.state_like(rest, f.clone());
                let kf = factorial(x1.k as u32);
                let comm = self.commutator_on(y, n, xg, -(x1.k as i64) - 1, &r);
                return comm.scale(&(&kf * &Scalar::ratio(1, 2)));
            }
        }
        let r = proto.state_like(rest, f.clone());
        let inner = self.gen_mode(y, n, &r);
        let mut out = self.apply_jet(x1, &inner);
        if y_odd && x_odd {
            out = out.neg();
        }
        let kf = factorial(x1.k as u32);
        let comm = self.commutator_on(y, n, xg, -(x1.k as i64) - 1, &r);
        out.add_scaled(&comm, &kf);
        out
    }

    /// `[y₍ₙ₎, x₍ₘ₎] r = Σⱼ C(n,j) (y₍ⱼ₎x)₍ₙ₊ₘ₋ⱼ₎ r`.
    fn commutator_on(&self, y: GenId, n: i64, x: GenId, m: i64, r: &FieldExpr) -> FieldExpr {
        let mut out = r.zero_like();
        for (j, e) in self.bracket_entries(y, x).iter().enumerate() {
            if e.is_zero() {
                continue;
            }
            let c = binomial(n, j as u32);
            if c.is_zero() {
                continue;
            }
            let t = self.circle_u(e, n + m - j as i64, r);
            out.add_scaled(&t, &c);
        }
        out
    }

    /// `(∂ᵏg)₍₋₁₎ e = k! g₍₋ₖ₋₁₎ e`.
    fn apply_jet(&self, x: Jet, e: &FieldExpr) -> FieldExpr {
        if e.is_zero() {
            return e.clone();
        }
        let r = self.gen_mode(x.gen as usize, -(x.k as i64) - 1, e);
        if x.k > 1 {
            r.scale(&factorial(x.k as u32))
        } else {
            r
        }
    }

    /// `a∘ₙb` without context checks.
    pub(crate) fn circle_u(&self, a: &FieldExpr, n: i64, b: &FieldExpr) -> FieldExpr {
        let mut out = b.zero_like();
        if b.is_zero() {
            return out;
        }
        for (mono, f) in a.terms() {
            let r = self.circle_state(mono, f, n, b, a);
            out.add_assign(&r);
        }
        out
    }

    fn circle_state(
        &self,
        mono: &Mono,
        f: &CoeffFn,
        n: i64,
        b: &FieldExpr,
        proto: &FieldExpr,
    ) -> FieldExpr {
        if mono.is_empty() {
            return self.function_mode(f, n, b);
        }
        let wb = match self.max_g2(b) {
            Some(w) => w,
            None => return b.zero_like(),
        };
        let (x1, rest) = mono.split_first();
        let g = x1.gen as usize;
        let m = -(x1.k as i64) - 1;
        let a1 = proto.state_like(rest.clone(), f.clone());
        let wa1 = self.mono_grade2(&rest);
        let wg = self.gen_grade2(g);
        let p_swap = self.gens[g].parity == Parity::Odd && self.mono_parity(&rest) == 1;
        let mut out = b.zero_like();
        let top1 = (wa1 + wb).div_euclid(2) - n - 1;
        for j in 0..=top1.max(-1) {
            if j < 0 {
                break;
            }
            let inner = self.circle_u(&a1, n + j, b);
            if inner.is_zero() {
                continue;
            }
            let c = binomial(m, j as u32);
            let c = if j % 2 == 0 { c } else { -c };
            let t = self.gen_mode(g, m - j, &inner);
            out.add_scaled(&t, &c);
        }
        let top2 = (wg + wb).div_euclid(2) - 1;
        for j in 0..=top2.max(-1) {
            if j < 0 {
                break;
            }
            let gb = self.gen_mode(g, j, b);
            if gb.is_zero() {
                continue;
            }
            let c = binomial(m, j as u32);
            let mut c = if j % 2 == 0 { c } else { -c };
            // −(−1)^m (−1)^{p_g p_a'}
            let s_odd = (m.rem_euclid(2) == 1) ^ p_swap;
            c = &c * &sign(!s_odd);
            let t = self.circle_u(&a1, m + n - j, &gb);
            out.add_scaled(&t, &c);
        }
        if x1.k > 1 {
            out.scale(&factorial(x1.k as u32))
        } else {
            out
        }
    }

    /// `f₍ₙ₎b` for a coefficient function `f`.
    fn function_mode(&self, f: &CoeffFn, n: i64, b: &FieldExpr) -> FieldExpr {
        if f.is_zero() || b.is_zero() {
            return b.zero_like();
        }
        if let Some(c) = f.as_constant() {
            return if n == -1 { b.scale(&c) } else { b.zero_like() };
        }
        let mut out = b.zero_like();
        let mut w0 = BTreeMap::new();
        w0.insert(0i64, b.clone());
        let dim = self.coords.dim();
        let mut alpha = vec![0u32; dim];
        self.function_mode_visit(f, n, &mut alpha, &w0, 0, &mut out);
        out
    }

    fn function_mode_visit(
        &self,
        df: &CoeffFn,
        n: i64,
        alpha: &mut Vec<u32>,
        w: &BTreeMap<i64, FieldExpr>,
        start: usize,
        out: &mut FieldExpr,
    ) {
        if df.is_zero() {
            return;
        }
        let afact = alpha
            .iter()
            .fold(Scalar::one(), |acc, &a| &acc * &factorial(a));
        let ainv = afact.inv().unwrap();
        let mmax = w.keys().map(|s| s - n - 1).max().unwrap_or(-1);
        if mmax >= 0 {
            let taylor = self.gamma_taylor(df, mmax as usize, out);
            for (s, ws) in w {
                let mm = s - n - 1;
                if mm < 0 || ws.is_zero() {
                    continue;
                }
                let p = &taylor[mm as usize];
                let prod = mul_gamma_sector(p, ws);
                out.add_scaled(&prod, &ainv);
            }
        }
        for i in start..self.coords.dim() {
            let gid = match self.gamma[i] {
                Some(g) => g,
                None => continue,
            };
            let mut next: BTreeMap<i64, FieldExpr> = BTreeMap::new();
            for (s, ws) in w {
                let top = self.max_g2(ws).map(|w| w.div_euclid(2)).unwrap_or(0) - 1;
                for nn in 0..=top.max(-1) {
                    if nn < 0 {
                        break;
                    }
                    let t = self.gen_mode(gid, nn, ws);
                    if t.is_zero() {
                        continue;
                    }
                    next.entry(s + nn + 1)
                        .or_insert_with(|| t.zero_like())
                        .add_assign(&t);
                }
            }
            next.retain(|_, v| !v.is_zero());
            if next.is_empty() {
                continue;
            }
            let d = df.partial(i).unwrap();
            if d.is_zero() {
                continue;
            }
            alpha[i] += 1;
            self.function_mode_visit(&d, n, alpha, &next, i, out);
            alpha[i] -= 1;
        }
    }

    /// `Tᵐ g / m!` for `m = 0..=mmax`, as γ-jet polynomials.
    fn gamma_taylor(&self, g: &CoeffFn, mmax: usize, proto: &FieldExpr) -> Vec<FieldExpr> {
        let mut out = vec![proto.state_like(Mono::default(), g.clone())];
        for m in 1..=mmax {
            let t = self.gamma_t(&out[m - 1]);
            out.push(t.scale(&Scalar::ratio(1, m as i64)));
        }
        out
    }

    /// Translation on the commutative γ-jet sector.
    fn gamma_t(&self, e: &FieldExpr) -> FieldExpr {
        let mut out = e.zero_like();
        for (mono, f) in e.terms() {
            for i in 0..self.coords.dim() {
                let d = f.partial(i).unwrap();
                if d.is_zero() {
                    continue;
                }
                let gid = self.gamma[i].expect("gamma generator present");
                out.add_state(mono.insert_even(Jet { gen: gid as u16, k: 1 }, 1), d);
            }
            for (pos, (j, e)) in mono.0.iter().enumerate() {
                let mut v = mono.0.clone();
                if *e == 1 {
                    v.remove(pos);
                } else {
                    v[pos].1 -= 1;
                }
                let nm = Mono(v).insert_even(Jet { gen: j.gen, k: j.k + 1 }, 1);
                out.add_state(nm, f.scale(&Scalar::int(*e as i64)));
            }
        }
        out
    }

    /// Translation operator `∂` without context checks.
    pub(crate) fn derivative_u(&self, e: &FieldExpr) -> FieldExpr {
        let mut out = e.zero_like();
        for (mono, f) in e.terms() {
            let r = self.derivative_state(mono, f, e);
            out.add_assign(&r);
        }
        out
    }

    fn derivative_state(&self, mono: &Mono, f: &CoeffFn, proto: &FieldExpr) -> FieldExpr {
        if mono.is_empty() {
            return self.gamma_t(&proto.state_like(Mono::default(), f.clone()));
        }
        let (x1, rest) = mono.split_first();
        let r = proto.state_like(rest, f.clone());
        let g = x1.gen as usize;
        let mut out = self
            .gen_mode(g, -(x1.k as i64) - 2, &r)
            .scale(&factorial(x1.k as u32 + 1));
        let dr = self.derivative_u(&r);
        let t = self.gen_mode(g, -(x1.k as i64) - 1, &dr);
        out.add_scaled(&t, &factorial(x1.k as u32));
        out
    }

    fn lambda_u(&self, a: &FieldExpr, b: &FieldExpr) -> LambdaPoly {
        let top = match (self.max_g2(a), self.max_g2(b)) {
            (Some(x), Some(y)) => (x + y).div_euclid(2) - 1,
            _ => -1,
        };
        let mut entries = Vec::new();
        for k in 0..=top.max(-1) {
            if k < 0 {
                break;
            }
            entries.push(self.circle_u(a, k, b));
        }
        while entries.last().map(|e| e.is_zero()).unwrap_or(false) {
            entries.pop();
        }
        LambdaPoly { entries }
    }

    // ---- public operations -------------------------------------------------

    /// `a∘ₙb` for any integer `n`.
    pub fn circle(&self, a: &FieldExpr, n: i64, b: &FieldExpr) -> Result<FieldExpr, VaError> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.circle_u(a, n, b))
    }

    /// The Wick product `:ab: = a∘₋₁b`.
    pub fn wick(&self, a: &FieldExpr, b: &FieldExpr) -> Result<FieldExpr, VaError> {
        self.circle(a, -1, b)
    }

    /// Right-nested Wick product `:a₁ :a₂ ⋯ a_k::`.
    pub fn wick_all(&self, items: &[FieldExpr]) -> Result<FieldExpr, VaError> {
        let mut it = items.iter().rev();
        let mut acc = match it.next() {
            Some(x) => x.clone(),
            None => return Ok(FieldExpr::one(self)),
        };
        for a in it {
            acc = self.wick(a, &acc)?;
        }
        Ok(acc)
    }

    /// `[a λ b]`: entry k is `a∘ₖb`.
    pub fn lambda_bracket(&self, a: &FieldExpr, b: &FieldExpr) -> Result<LambdaPoly, VaError> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.lambda_u(a, b))
    }

    pub fn derivative(&self, a: &FieldExpr) -> Result<FieldExpr, VaError> {
        self.check(a)?;
        Ok(self.derivative_u(a))
    }

    /// `aₙ b = a∘₍ₙ₊wt(a)−1₎ b` for weight-homogeneous `a`.
    pub fn mode(&self, a: &FieldExpr, n: i64, b: &FieldExpr) -> Result<FieldExpr, VaError> {
        self.check(a)?;
        self.check(b)?;
        if a.is_zero() {
            return Ok(b.zero_like());
        }
        let w = self.weight_of(a).ok_or(VaError::NotHomogeneous)?;
        Ok(self.circle_u(a, n + w - 1, b))
    }

    /// Decomposition into (weight, degree) homogeneous parts.
    pub fn grade(&self, a: &FieldExpr) -> Vec<((i64, i32), FieldExpr)> {
        let mut parts: BTreeMap<(i64, i32), FieldExpr> = BTreeMap::new();
        for (mono, f) in a.terms() {
            let key = (self.mono_weight(mono), self.mono_degree(mono));
            parts
                .entry(key)
                .or_insert_with(|| a.zero_like())
                .add_state(mono.clone(), f.clone());
        }
        parts.into_iter().collect()
    }
}

impl VaContext {
    /// All PBW monomials of conformal weight exactly `weight` built from jets
    /// of generators accepted by `allow`. Even weight-zero jets are excluded.
    pub fn pbw_monos(&self, weight: i64, allow: &dyn Fn(GenId) -> bool) -> Vec<Mono> {
        let mut jets = Vec::new();
        for (g, gen) in self.gens.iter().enumerate() {
            if !allow(g) {
                continue;
            }
            let k0 = if gen.kind == GenKind::Gamma { 1 } else { 0 };
            for k in k0.. {
                let w = gen.weight as i64 + k as i64;
                if w > weight {
                    break;
                }
                if w == 0 && gen.parity == Parity::Even {
                    continue;
                }
                jets.push((Jet { gen: g as u16, k }, w, gen.parity == Parity::Odd));
            }
        }
        let mut out = Vec::new();
        let mut cur = Vec::new();
        pbw_rec(&jets, 0, weight, &mut cur, &mut out);
        out
    }
}

fn pbw_rec(
    jets: &[(Jet, i64, bool)],
    start: usize,
    left: i64,
    cur: &mut Vec<(Jet, u32)>,
    out: &mut Vec<Mono>,
) {
    if start == jets.len() {
        if left == 0 {
            out.push(Mono(cur.clone()));
        }
        return;
    }
    let (j, w, odd) = jets[start];
    pbw_rec(jets, start + 1, left, cur, out);
    let max_e = if odd {
        1
    } else if w == 0 {
        0
    } else {
        (left / w) as u32
    };
    for e in 1..=max_e {
        if w * e as i64 > left {
            break;
        }
        cur.push((j, e));
        pbw_rec(jets, start + 1, left - w * e as i64, cur, out);
        cur.pop();
    }
}

/// Product of a γ-jet polynomial with an arbitrary state (they commute).
fn mul_gamma_sector(p: &FieldExpr, w: &FieldExpr) -> FieldExpr {
    let mut out = w.zero_like();
    for (pm, pf) in p.terms() {
        for (wm, wf) in w.terms() {
            let mut m = wm.clone();
            for (j, e) in &pm.0 {
                m = m.insert_even(*j, *e);
            }
            out.add_state(m, pf.mul(wf));
        }
    }
    out
}
