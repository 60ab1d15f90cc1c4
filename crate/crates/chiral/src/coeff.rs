//! Coefficient rings on a coordinate patch.
//!
//! A patch has `n` flat coordinates `γ¹..γⁿ` and `m` angular coordinates
//! `θ¹..θᵐ`. Coefficient functions are finite sums of
//! `scalar · Π (γⁱ)^{aᵢ} · Π exp(i kⱼ θʲ)`, kept in canonical sorted form.
//! Coordinate ids run over flat coordinates first, then angular ones.

use crate::scalar::Scalar;
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CoeffError {
    #[error("unknown coordinate id {0}")]
    UnknownCoordinate(usize),
    #[error("coordinate system mismatch: ({0},{1}) vs ({2},{3})")]
    Mismatch(usize, usize, usize, usize),
    #[error("duplicate coordinate name `{0}`")]
    DuplicateName(String),
    #[error("substitution needs {expected} images, got {got}")]
    BadSubstitution { expected: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CoordinateSystem {
    flat: Vec<String>,
    angular: Vec<String>,
}

impl CoordinateSystem {
    pub fn new(flat: Vec<String>, angular: Vec<String>) -> Result<Self, CoeffError> {
        let mut seen = std::collections::HashSet::new();
        for name in flat.iter().chain(angular.iter()) {
            if !seen.insert(name.clone()) {
                return Err(CoeffError::DuplicateName(name.clone()));
            }
        }
        Ok(CoordinateSystem { flat, angular })
    }

    /// Flat coordinates named `x1..xn`, angular ones `t1..tm`.
    pub fn standard(n: usize, m: usize) -> Self {
        CoordinateSystem {
            flat: (1..=n).map(|i| format!("x{i}")).collect(),
            angular: (1..=m).map(|j| format!("t{j}")).collect(),
        }
    }

    pub fn n_flat(&self) -> usize {
        self.flat.len()
    }

    pub fn n_angular(&self) -> usize {
        self.angular.len()
    }

    pub fn dim(&self) -> usize {
        self.flat.len() + self.angular.len()
    }

    pub fn name(&self, id: usize) -> &str {
        if id < self.flat.len() {
            &self.flat[id]
        } else {
            &self.angular[id - self.flat.len()]
        }
    }

    pub fn id_of(&self, name: &str) -> Option<usize> {
        self.flat
            .iter()
            .chain(self.angular.iter())
            .position(|s| s == name)
    }

    pub fn is_angular(&self, id: usize) -> bool {
        id >= self.flat.len()
    }

    pub fn flat_names(&self) -> &[String] {
        &self.flat
    }

    pub fn angular_names(&self) -> &[String] {
        &self.angular
    }
}

/// Exponent vector for flat coordinates plus Fourier modes for angular ones.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CoeffMono {
    pub pow: Vec<u32>,
    pub modes: Vec<i64>,
}

impl CoeffMono {
    pub fn one(n: usize, m: usize) -> Self {
        CoeffMono {
            pow: vec![0; n],
            modes: vec![0; m],
        }
    }

    pub fn degree(&self) -> u32 {
        self.pow.iter().sum()
    }

    fn mul(&self, o: &CoeffMono) -> CoeffMono {
        CoeffMono {
            pow: self.pow.iter().zip(&o.pow).map(|(a, b)| a + b).collect(),
            modes: self.modes.iter().zip(&o.modes).map(|(a, b)| a + b).collect(),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CoeffFn {
    n: usize,
    m: usize,
    terms: BTreeMap<CoeffMono, Scalar>,
}

impl CoeffFn {
    pub fn zero(n: usize, m: usize) -> Self {
        CoeffFn {
            n,
            m,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n: usize, m: usize, c: Scalar) -> Self {
        let mut f = CoeffFn::zero(n, m);
        f.add_term(CoeffMono::one(n, m), c);
        f
    }

    pub fn one(n: usize, m: usize) -> Self {
        CoeffFn::constant(n, m, Scalar::one())
    }

    pub fn from_term(n: usize, m: usize, mono: CoeffMono, c: Scalar) -> Self {
        assert_eq!(mono.pow.len(), n);
        assert_eq!(mono.modes.len(), m);
        let mut f = CoeffFn::zero(n, m);
        f.add_term(mono, c);
        f
    }

    /// The flat coordinate function `γⁱ` (0-based id).
    pub fn flat_coord(n: usize, m: usize, i: usize) -> Result<Self, CoeffError> {
        if i >= n {
            return Err(CoeffError::UnknownCoordinate(i));
        }
        let mut mono = CoeffMono::one(n, m);
        mono.pow[i] = 1;
        Ok(CoeffFn::from_term(n, m, mono, Scalar::one()))
    }

    /// `exp(i k θʲ)` for angular index `j` (0-based among angular coordinates).
    pub fn fourier(n: usize, m: usize, j: usize, k: i64) -> Result<Self, CoeffError> {
        if j >= m {
            return Err(CoeffError::UnknownCoordinate(n + j));
        }
        let mut mono = CoeffMono::one(n, m);
        mono.modes[j] = k;
        Ok(CoeffFn::from_term(n, m, mono, Scalar::one()))
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.n, self.m)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&CoeffMono, &Scalar)> {
        self.terms.iter()
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The constant value, if this function is constant.
    pub fn as_constant(&self) -> Option<Scalar> {
        if self.terms.is_empty() {
            return Some(Scalar::zero());
        }
        if self.terms.len() == 1 {
            let (mono, c) = self.terms.iter().next().unwrap();
            if mono.degree() == 0 && mono.modes.iter().all(|&k| k == 0) {
                return Some(c.clone());
            }
        }
        None
    }

    /// Highest total degree in flat coordinates (0 for the zero function).
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|m| m.degree()).max().unwrap_or(0)
    }

    /// Fourier sector: the mode vector, if all terms share it.
    pub fn sector(&self) -> Option<Vec<i64>> {
        let mut it = self.terms.keys();
        let first = it.next()?.modes.clone();
        if it.all(|m| m.modes == first) {
            Some(first)
        } else {
            None
        }
    }

    pub fn add_term(&mut self, mono: CoeffMono, c: Scalar) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(mono) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += &c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    fn check(&self, o: &CoeffFn) -> Result<(), CoeffError> {
        if self.n != o.n || self.m != o.m {
            Err(CoeffError::Mismatch(self.n, self.m, o.n, o.m))
        } else {
            Ok(())
        }
    }

    pub fn add_assign(&mut self, o: &CoeffFn) {
        self.check(o).expect("coefficient ring mismatch");
        for (mono, c) in &o.terms {
            self.add_term(mono.clone(), c.clone());
        }
    }

    pub fn add(&self, o: &CoeffFn) -> CoeffFn {
        let mut r = self.clone();
        r.add_assign(o);
        r
    }

    pub fn sub(&self, o: &CoeffFn) -> CoeffFn {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> CoeffFn {
        self.scale(&Scalar::int(-1))
    }

    pub fn scale(&self, c: &Scalar) -> CoeffFn {
        if c.is_zero() {
            return CoeffFn::zero(self.n, self.m);
        }
        CoeffFn {
            n: self.n,
            m: self.m,
            terms: self
                .terms
                .iter()
                .map(|(k, v)| (k.clone(), v * c))
                .collect(),
        }
    }

    /// Checked ring product.
    pub fn multiply(&self, o: &CoeffFn) -> Result<CoeffFn, CoeffError> {
        self.check(o)?;
        let mut r = CoeffFn::zero(self.n, self.m);
        for (a, ca) in &self.terms {
            for (b, cb) in &o.terms {
                r.add_term(a.mul(b), ca * cb);
            }
        }
        Ok(r)
    }

    pub fn mul(&self, o: &CoeffFn) -> CoeffFn {
        self.multiply(o).expect("coefficient ring mismatch")
    }

    pub fn pow(&self, e: u32) -> CoeffFn {
        let mut r = CoeffFn::one(self.n, self.m);
        for _ in 0..e {
            r = r.mul(self);
        }
        r
    }

    /// Exact partial derivative along coordinate `coord`.
    pub fn partial(&self, coord: usize) -> Result<CoeffFn, CoeffError> {
        if coord >= self.n + self.m {
            return Err(CoeffError::UnknownCoordinate(coord));
        }
        let mut r = CoeffFn::zero(self.n, self.m);
        for (mono, c) in &self.terms {
            if coord < self.n {
                let e = mono.pow[coord];
                if e == 0 {
                    continue;
                }
                let mut d = mono.clone();
                d.pow[coord] = e - 1;
                r.add_term(d, c * &Scalar::int(e as i64));
            } else {
                let k = mono.modes[coord - self.n];
                if k == 0 {
                    continue;
                }
                r.add_term(mono.clone(), c * &(&Scalar::i() * &Scalar::int(k)));
            }
        }
        Ok(r)
    }

    /// Pull back along a map of patches: flat coordinate `i` becomes
    /// `flat_images[i]` and angular coordinate `j` becomes angular coordinate
    /// `angular_targets[j]` of the target `(n2, m2)`.
    pub fn transport(
        &self,
        flat_images: &[CoeffFn],
        angular_targets: &[usize],
        n2: usize,
        m2: usize,
    ) -> Result<CoeffFn, CoeffError> {
        if flat_images.len() != self.n {
            return Err(CoeffError::BadSubstitution {
                expected: self.n,
                got: flat_images.len(),
            });
        }
        if angular_targets.len() != self.m {
            return Err(CoeffError::BadSubstitution {
                expected: self.m,
                got: angular_targets.len(),
            });
        }
        for f in flat_images {
            if f.dims() != (n2, m2) {
                let (a, b) = f.dims();
                return Err(CoeffError::Mismatch(n2, m2, a, b));
            }
        }
        if angular_targets.iter().any(|&t| t >= m2) {
            return Err(CoeffError::UnknownCoordinate(n2 + m2));
        }
        let mut r = CoeffFn::zero(n2, m2);
        for (mono, c) in &self.terms {
            let mut fm = CoeffMono::one(n2, m2);
            for (j, &k) in mono.modes.iter().enumerate() {
                fm.modes[angular_targets[j]] += k;
            }
            let mut t = CoeffFn::from_term(n2, m2, fm, c.clone());
            for (i, &e) in mono.pow.iter().enumerate() {
                if e > 0 {
                    t = t.mul(&flat_images[i].pow(e));
                }
            }
            r.add_assign(&t);
        }
        Ok(r)
    }

    /// Substitute polynomials for the flat coordinates; Fourier factors are kept.
    pub fn substitute(&self, images: &[CoeffFn]) -> Result<CoeffFn, CoeffError> {
        if images.len() != self.n {
            return Err(CoeffError::BadSubstitution {
                expected: self.n,
                got: images.len(),
            });
        }
        let (n2, m2) = images
            .first()
            .map(|f| f.dims())
            .unwrap_or((self.n, self.m));
        if m2 != self.m {
            return Err(CoeffError::Mismatch(self.n, self.m, n2, m2));
        }
        let mut r = CoeffFn::zero(n2, m2);
        for (mono, c) in &self.terms {
            let mut fm = CoeffMono::one(n2, m2);
            fm.modes = mono.modes.clone();
            let mut t = CoeffFn::from_term(n2, m2, fm, c.clone());
            for (i, &e) in mono.pow.iter().enumerate() {
                if e > 0 {
                    t = t.multiply(&images[i].pow(e))?;
                }
            }
            r.add_assign(&t);
        }
        Ok(r)
    }

    pub fn fmt_with(&self, cs: &CoordinateSystem) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut parts: Vec<String> = Vec::new();
        for (mono, c) in &self.terms {
            let mut factors: Vec<String> = Vec::new();
            for (i, &e) in mono.pow.iter().enumerate() {
                match e {
                    0 => {}
                    1 => factors.push(cs.name(i).to_string()),
                    _ => factors.push(format!("{}^{}", cs.name(i), e)),
                }
            }
            for (j, &k) in mono.modes.iter().enumerate() {
                if k != 0 {
                    factors.push(format!("exp(i*{}*{})", k, cs.name(self.n + j)));
                }
            }
            let body = factors.join("*");
            let s = if body.is_empty() {
                c.to_string()
            } else if c.is_one() {
                body
            } else if (-c).is_one() {
                format!("-{body}")
            } else {
                format!("{c}*{body}")
            };
            parts.push(s);
        }
        let mut out = parts[0].clone();
        for p in &parts[1..] {
            if let Some(rest) = p.strip_prefix('-') {
                out.push_str(" - ");
                out.push_str(rest);
            } else {
                out.push_str(" + ");
                out.push_str(p);
            }
        }
        out
    }
}

impl fmt::Debug for CoeffFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cs = CoordinateSystem::standard(self.n, self.m);
        write!(f, "{}", self.fmt_with(&cs))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(i: usize) -> CoeffFn {
        CoeffFn::flat_coord(2, 1, i).unwrap()
    }

    #[test]
    fn partial_examples() {
        let x1sq = x(0).mul(&x(0));
        assert_eq!(x1sq.partial(0).unwrap(), x(0).scale(&Scalar::int(2)));
        assert!(x1sq.partial(1).unwrap().is_zero());
        let e = CoeffFn::fourier(2, 1, 0, 3).unwrap();
        assert_eq!(
            e.partial(2).unwrap(),
            e.scale(&(&Scalar::i() * &Scalar::int(3)))
        );
        assert!(x1sq.partial(3).is_err());
    }

    #[test]
    fn multiply_examples() {
        let e = CoeffFn::fourier(2, 1, 0, 1).unwrap();
        let em = CoeffFn::fourier(2, 1, 0, -1).unwrap();
        assert_eq!(e.mul(&em), CoeffFn::one(2, 1));
        let z = CoeffFn::zero(2, 1);
        assert!(x(0).add(&CoeffFn::one(2, 1)).mul(&z).is_zero());
        assert!(x(0).multiply(&CoeffFn::one(1, 0)).is_err());
    }

    #[test]
    fn is_zero_examples() {
        assert!(CoeffFn::zero(1, 0).is_zero());
        assert!(x(0).sub(&x(0)).is_zero());
        assert!(!CoeffFn::fourier(2, 1, 0, 1).unwrap().is_zero());
    }

    #[test]
    fn substitution() {
        // x1 -> x1 + x2^2, x2 -> x2 applied to x1^2
        let g = vec![x(0).add(&x(1).mul(&x(1))), x(1)];
        let f = x(0).mul(&x(0));
        let r = f.substitute(&g).unwrap();
        assert_eq!(r, g[0].mul(&g[0]));
    }

    #[test]
    fn duplicate_names_rejected() {
        assert!(CoordinateSystem::new(vec!["x".into()], vec!["x".into()]).is_err());
    }
}
