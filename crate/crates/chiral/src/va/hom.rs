use super::{FieldExpr, GenId, GenKind, Jet, VaContext, VaError};
use crate::coeff::CoeffFn;
use crate::scalar::Scalar;
use std::collections::HashMap;

/// A vertex-algebra map determined by generator images and a pullback of
/// coefficient functions.
pub struct VaHom<'a> {
    src: &'a VaContext,
    dst: &'a VaContext,
    images: Vec<Option<FieldExpr>>,
    flat: Vec<CoeffFn>,
    angular: Vec<usize>,
}

impl<'a> VaHom<'a> {
    /// Identity on coefficient functions (same coordinate system), no generator images yet.
    pub fn new(src: &'a VaContext, dst: &'a VaContext) -> Result<Self, VaError> {
        let (n, m) = src.dims();
        let (n2, m2) = dst.dims();
        let flat = (0..n)
            .map(|i| CoeffFn::flat_coord(n2, m2, i))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(VaHom {
            src,
            dst,
            images: vec![None; src.generators().len()],
            flat,
            angular: (0..m).collect(),
        })
    }

    /// Pull back functions along `γⁱ ↦ flat[i]`, `θʲ ↦ θ^{angular[j]}`.
    pub fn with_functions(mut self, flat: Vec<CoeffFn>, angular: Vec<usize>) -> Self {
        self.flat = flat;
        self.angular = angular;
        self
    }

    pub fn set(&mut self, g: GenId, image: FieldExpr) {
        self.images[g] = Some(image);
    }

    pub fn image(&self, g: GenId) -> Result<FieldExpr, VaError> {
        let gen = self.src.generator(g);
        if gen.kind == GenKind::Gamma {
            return Ok(FieldExpr::function(self.dst, self.flat[gen.index].clone()));
        }
        self.images[g]
            .clone()
            .ok_or_else(|| VaError::UnknownGenerator(gen.name.clone()))
    }

    pub fn map_fn(&self, f: &CoeffFn) -> Result<CoeffFn, VaError> {
        let (n2, m2) = self.dst.dims();
        Ok(f.transport(&self.flat, &self.angular, n2, m2)?)
    }

    pub fn apply(&self, e: &FieldExpr) -> Result<FieldExpr, VaError> {
        self.src.check(e)?;
        let mut cache: HashMap<Jet, FieldExpr> = HashMap::new();
        let mut out = FieldExpr::zero(self.dst);
        for (mono, f) in e.terms() {
            let mut acc = FieldExpr::function(self.dst, self.map_fn(f)?);
            let jets: Vec<Jet> = mono.jets().collect();
            for j in jets.iter().rev() {
                let img = match cache.get(j) {
                    Some(x) => x.clone(),
                    None => {
                        let mut x = self.image(j.gen as usize)?;
                        for _ in 0..j.k {
                            x = self.dst.derivative_u(&x);
                        }
                        cache.insert(*j, x.clone());
                        x
                    }
                };
                acc = self.dst.circle_u(&img, -1, &acc);
            }
            out.add_assign(&acc);
        }
        Ok(out)
    }
}

/// A derivation commuting with `∂`, given on generators and on functions.
pub struct Derivation<'a> {
    ctx: &'a VaContext,
    odd: bool,
    on_gen: Vec<Option<FieldExpr>>,
    on_fn: Box<dyn Fn(&CoeffFn) -> FieldExpr + 'a>,
}

impl<'a> Derivation<'a> {
    pub fn new(
        ctx: &'a VaContext,
        odd: bool,
        on_fn: impl Fn(&CoeffFn) -> FieldExpr + 'a,
    ) -> Self {
        Derivation {
            ctx,
            odd,
            on_gen: vec![None; ctx.generators().len()],
            on_fn: Box::new(on_fn),
        }
    }

    pub fn set(&mut self, g: GenId, image: FieldExpr) {
        self.on_gen[g] = Some(image);
    }

    fn on_jet(&self, j: Jet) -> Result<FieldExpr, VaError> {
        let g = j.gen as usize;
        let gen = self.ctx.generator(g);
        let mut x = if gen.kind == GenKind::Gamma {
            let (n, m) = self.ctx.dims();
            (self.on_fn)(&CoeffFn::flat_coord(n, m, gen.index)?)
        } else {
            self.on_gen[g]
                .clone()
                .ok_or_else(|| VaError::UnknownGenerator(gen.name.clone()))?
        };
        for _ in 0..j.k {
            x = self.ctx.derivative_u(&x);
        }
        Ok(x)
    }

    pub fn apply(&self, e: &FieldExpr) -> Result<FieldExpr, VaError> {
        self.ctx.check(e)?;
        let mut out = FieldExpr::zero(self.ctx);
        for (mono, f) in e.terms() {
            // Right-nested: value and derivative of the tail, built from the inside out.
            let mut val = FieldExpr::function(self.ctx, f.clone());
            let mut dval = (self.on_fn)(f);
            for j in mono.jets().collect::<Vec<_>>().iter().rev() {
                let x = self.ctx.jet(j.gen as usize, j.k)?;
                let dx = self.on_jet(*j)?;
                let px = self.ctx.generator(j.gen as usize).parity.bit() == 1;
                let mut nd = self.ctx.circle_u(&dx, -1, &val);
                let t = self.ctx.circle_u(&x, -1, &dval);
                let s = if self.odd && px { Scalar::int(-1) } else { Scalar::one() };
                nd.add_scaled(&t, &s);
                val = self.ctx.circle_u(&x, -1, &val);
                dval = nd;
            }
            out.add_assign(&dval);
        }
        Ok(out)
    }
}
