use super::{FieldExpr, GenKind, Jet, Mono, VaContext};

/// Prints expressions in the textual syntax accepted by the CLI parser.
pub struct ExprPrinter<'a> {
    ctx: &'a VaContext,
}

impl<'a> ExprPrinter<'a> {
    pub fn new(ctx: &'a VaContext) -> Self {
        ExprPrinter { ctx }
    }

    pub fn jet(&self, j: Jet) -> String {
        let g = self.ctx.generator(j.gen as usize);
        if g.kind == GenKind::Gamma && j.k > 0 {
            return format!("dgamma[{},{}]", g.index + 1, j.k);
        }
        match j.k {
            0 => g.name.clone(),
            k => format!("d^{} {}", k, g.name),
        }
    }

    pub fn mono(&self, m: &Mono) -> Vec<String> {
        m.jets().map(|j| self.jet(j)).collect()
    }

    pub fn print(&self, e: &FieldExpr) -> String {
        if e.is_zero() {
            return "0".into();
        }
        let cs = self.ctx.coords();
        let mut parts = Vec::new();
        for (mono, f) in e.terms() {
            let fs = f.fmt_with(cs);
            let factors = self.mono(mono);
            let s = if factors.is_empty() {
                format!("({fs})")
            } else if f.as_constant().map(|c| c.is_one()).unwrap_or(false) {
                if factors.len() == 1 {
                    factors[0].clone()
                } else {
                    format!(":{}:", factors.join(" "))
                }
            } else {
                format!(":{} ({fs}):", factors.join(" "))
            };
            parts.push(s);
        }
        parts.join(" + ")
    }
}

impl VaContext {
    pub fn show(&self, e: &FieldExpr) -> String {
        ExprPrinter::new(self).print(e)
    }
}
