//! Finite-dimensional linear algebra on graded pieces of a vertex algebra:
//! PBW bases, exact differential matrices, cohomology dimensions by
//! rank–nullity, and `(q, z)` characters.
//!
//! A piece is fixed by a [`SectorSpec`]. Coefficient functions are truncated
//! to flat polynomial degree `≤ p` and to a single Fourier mode vector on the
//! angular coordinates; a differential whose image leaves the enumerated span
//! is an error, never a silent truncation.
//!
//! Three gradings are supported. [`Grading::Weight`] fixes the conformal
//! weight and uses the form degree as cohomological degree; this fits `D`.
//! [`Grading::Parity`] fixes the weight and keeps only the degree mod 2, which
//! is all `D_H = D + H` respects. [`Grading::Shifted`] uses the level
//! `2·wt + deg`, which `D + H₀` and the twisted quotient differential raise by
//! exactly one.

use crate::coeff::{CoeffFn, CoeffMono};
use crate::scalar::Scalar;
use crate::va::{FieldExpr, Mono, VaContext, VaError};
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CohomError {
    #[error(transparent)]
    Va(#[from] VaError),
    #[error("unbounded sector: {0}")]
    Unbounded(String),
    #[error("image of basis vector {0} leaves the enumerated span")]
    LeavesSpan(String),
    #[error("consecutive differentials do not compose to zero at level {0}")]
    NotSquareZero(i64),
    #[error("invalid configuration: {0}")]
    Config(String),
}

type Result<T> = std::result::Result<T, CohomError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Grading {
    /// Fixed conformal weight; levels are form degrees.
    Weight,
    /// Fixed conformal weight; levels are degrees mod 2.
    Parity,
    /// Levels are `2·wt + deg`.
    Shifted,
}

/// Which finite piece to enumerate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SectorSpec {
    pub grading: Grading,
    /// The weight for [`Grading::Weight`] and [`Grading::Parity`]; the highest
    /// level for [`Grading::Shifted`].
    pub bound: i64,
    /// Maximal total degree in the flat coordinates.
    pub max_poly_degree: Option<u32>,
    /// Fourier mode vector on the angular coordinates.
    pub modes: Option<Vec<i64>>,
}

impl SectorSpec {
    pub fn weight(w: i64) -> Self {
        SectorSpec {
            grading: Grading::Weight,
            bound: w,
            max_poly_degree: None,
            modes: None,
        }
    }

    pub fn parity(w: i64) -> Self {
        SectorSpec {
            grading: Grading::Parity,
            ..Self::weight(w)
        }
    }

    pub fn shifted(max_level: i64) -> Self {
        SectorSpec {
            grading: Grading::Shifted,
            bound: max_level,
            max_poly_degree: None,
            modes: None,
        }
    }

    pub fn with_poly_degree(mut self, p: u32) -> Self {
        self.max_poly_degree = Some(p);
        self
    }

    pub fn with_modes(mut self, modes: Vec<i64>) -> Self {
        self.modes = Some(modes);
        self
    }
}

/// A PBW state with a monomial coefficient function.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisElement {
    pub mono: Mono,
    pub func: CoeffMono,
}

/// An enumerated finite piece, split into levels.
pub struct GradedBasis<'a> {
    ctx: &'a VaContext,
    spec: SectorSpec,
    levels: BTreeMap<i64, Vec<BasisElement>>,
    index: HashMap<BasisElement, (i64, usize)>,
}

fn coeff_monos(n: usize, max_deg: u32, modes: &[i64]) -> Vec<CoeffMono> {
    let mut out = Vec::new();
    let mut pow = vec![0u32; n];
    fn rec(i: usize, left: u32, pow: &mut Vec<u32>, modes: &[i64], out: &mut Vec<CoeffMono>) {
        if i == pow.len() {
            out.push(CoeffMono {
                pow: pow.clone(),
                modes: modes.to_vec(),
            });
            return;
        }
        for e in 0..=left {
            pow[i] = e;
            rec(i + 1, left - e, pow, modes, out);
        }
        pow[i] = 0;
    }
    rec(0, max_deg, &mut pow, modes, &mut out);
    out
}

impl<'a> GradedBasis<'a> {
    pub fn enumerate(ctx: &'a VaContext, spec: SectorSpec) -> Result<Self> {
        let (n, m) = ctx.dims();
        let max_deg = match (n, spec.max_poly_degree) {
            (0, _) => 0,
            (_, Some(p)) => p,
            (_, None) => {
                return Err(CohomError::Unbounded(
                    "flat coordinates need a polynomial degree bound".into(),
                ))
            }
        };
        let modes = match (m, &spec.modes) {
            (0, _) => Vec::new(),
            (_, Some(v)) if v.len() == m => v.clone(),
            (_, Some(v)) => {
                return Err(CohomError::Config(format!(
                    "expected {m} Fourier modes, got {}",
                    v.len()
                )))
            }
            (_, None) => {
                return Err(CohomError::Unbounded(
                    "angular coordinates need a Fourier sector".into(),
                ))
            }
        };
        let funcs = coeff_monos(n, max_deg, &modes);
        let monos: Vec<Mono> = match spec.grading {
            Grading::Weight | Grading::Parity => ctx.pbw_monos(spec.bound, &|_| true),
            // Every jet has 2·wt + deg ≥ wt, so weights up to the level suffice.
            Grading::Shifted => (0..=spec.bound.max(0))
                .flat_map(|w| ctx.pbw_monos(w, &|_| true))
                .filter(|mo| ctx.mono_grade2(mo) <= spec.bound)
                .collect(),
        };
        let mut levels: BTreeMap<i64, Vec<BasisElement>> = BTreeMap::new();
        for mono in monos {
            let lv = match spec.grading {
                Grading::Weight => ctx.mono_degree(&mono) as i64,
                Grading::Parity => (ctx.mono_degree(&mono) as i64).rem_euclid(2),
                Grading::Shifted => ctx.mono_grade2(&mono),
            };
            for f in &funcs {
                levels.entry(lv).or_default().push(BasisElement {
                    mono: mono.clone(),
                    func: f.clone(),
                });
            }
        }
        let mut index = HashMap::new();
        for (lv, elems) in levels.iter_mut() {
            elems.sort();
            for (i, e) in elems.iter().enumerate() {
                index.insert(e.clone(), (*lv, i));
            }
        }
        Ok(GradedBasis {
            ctx,
            spec,
            levels,
            index,
        })
    }

    pub fn spec(&self) -> &SectorSpec {
        &self.spec
    }

    /// The level a differential maps `lv` into.
    pub fn next_level(&self, lv: i64) -> i64 {
        match self.spec.grading {
            Grading::Parity => (lv + 1).rem_euclid(2),
            _ => lv + 1,
        }
    }

    pub fn prev_level(&self, lv: i64) -> i64 {
        match self.spec.grading {
            Grading::Parity => (lv + 1).rem_euclid(2),
            _ => lv - 1,
        }
    }

    pub fn levels(&self) -> impl Iterator<Item = i64> + '_ {
        self.levels.keys().copied()
    }

    pub fn level(&self, lv: i64) -> &[BasisElement] {
        self.levels.get(&lv).map(|v| v.as_slice()).unwrap_or(&[])
    }

    pub fn dim(&self, lv: i64) -> usize {
        self.level(lv).len()
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn element(&self, e: &BasisElement) -> FieldExpr {
        let (n, m) = self.ctx.dims();
        FieldExpr::state(
            self.ctx,
            e.mono.clone(),
            CoeffFn::from_term(n, m, e.func.clone(), Scalar::one()),
        )
    }

    /// Coordinates of `x` at level `lv`; fails if any term lies outside.
    pub fn coordinates(&self, x: &FieldExpr, lv: i64, label: &dyn Fn() -> String) -> Result<Vec<(usize, Scalar)>> {
        let mut out = Vec::new();
        for (mono, f) in x.terms() {
            for (fm, c) in f.terms() {
                let key = BasisElement {
                    mono: mono.clone(),
                    func: fm.clone(),
                };
                match self.index.get(&key) {
                    Some(&(l, i)) if l == lv => out.push((i, c.clone())),
                    _ => return Err(CohomError::LeavesSpan(label())),
                }
            }
        }
        out.sort_by_key(|(i, _)| *i);
        Ok(out)
    }
}

/// A sparse exact matrix, stored by columns.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    pub rows: usize,
    pub cols: Vec<Vec<(usize, Scalar)>>,
}

impl SparseMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        SparseMatrix {
            rows,
            cols: vec![Vec::new(); cols],
        }
    }

    pub fn ncols(&self) -> usize {
        self.cols.len()
    }

    pub fn is_zero(&self) -> bool {
        self.cols.iter().all(|c| c.is_empty())
    }

    /// `self · other`.
    pub fn compose(&self, other: &SparseMatrix) -> SparseMatrix {
        let mut cols = Vec::with_capacity(other.ncols());
        for col in &other.cols {
            let mut acc: BTreeMap<usize, Scalar> = BTreeMap::new();
            for (j, c) in col {
                for (i, a) in &self.cols[*j] {
                    *acc.entry(*i).or_insert_with(Scalar::zero) += &(a * c);
                }
            }
            cols.push(acc.into_iter().filter(|(_, v)| !v.is_zero()).collect());
        }
        SparseMatrix {
            rows: self.rows,
            cols,
        }
    }

    /// Exact rank by Gaussian elimination on the dense column matrix.
    pub fn rank(&self) -> usize {
        let mut cols: Vec<Vec<Scalar>> = self
            .cols
            .iter()
            .filter(|c| !c.is_empty())
            .map(|c| {
                let mut v = vec![Scalar::zero(); self.rows];
                for (i, s) in c {
                    v[*i] = s.clone();
                }
                v
            })
            .collect();
        let mut rank = 0;
        for row in 0..self.rows {
            let Some(p) = (rank..cols.len()).find(|&j| !cols[j][row].is_zero()) else {
                continue;
            };
            cols.swap(rank, p);
            let inv = cols[rank][row].inv().expect("nonzero pivot");
            let pivot: Vec<Scalar> = cols[rank].iter().map(|x| x * &inv).collect();
            for col in cols.iter_mut().skip(rank + 1) {
                let f = col[row].clone();
                if f.is_zero() {
                    continue;
                }
                for (x, pv) in col.iter_mut().zip(&pivot).skip(row) {
                    *x -= &(&f * pv);
                }
            }
            cols[rank] = pivot;
            rank += 1;
        }
        rank
    }
}

/// The matrix of an operator from level `from` to level `to`.
#[derive(Clone, Debug, PartialEq)]
pub struct DifferentialMatrix {
    pub from: i64,
    pub to: i64,
    pub matrix: SparseMatrix,
}

/// Assemble the matrix of `op` on level `lv` of `basis`, into the next level.
pub fn differential_matrix(
    basis: &GradedBasis,
    op: &dyn Fn(&FieldExpr) -> std::result::Result<FieldExpr, VaError>,
    lv: i64,
) -> Result<DifferentialMatrix> {
    let to = basis.next_level(lv);
    let src = basis.level(lv);
    let mut m = SparseMatrix::zero(basis.dim(to), src.len());
    for (j, e) in src.iter().enumerate() {
        let img = op(&basis.element(e))?;
        let label = || crate::va::ExprPrinter::new(basis.ctx).print(&basis.element(e));
        m.cols[j] = basis.coordinates(&img, to, &label)?;
    }
    Ok(DifferentialMatrix { from: lv, to, matrix: m })
}

/// `dim ker(d_out) − rank(d_in)` at the level between them.
pub fn cohomology_dims(d_in: &DifferentialMatrix, d_out: &DifferentialMatrix) -> Result<usize> {
    if d_in.to != d_out.from {
        return Err(CohomError::Config("differentials are not consecutive".into()));
    }
    if !d_out.matrix.compose(&d_in.matrix).is_zero() {
        return Err(CohomError::NotSquareZero(d_out.from));
    }
    let kernel = d_out.matrix.ncols() - d_out.matrix.rank();
    Ok(kernel - d_in.matrix.rank())
}

/// The full complex on an enumerated piece.
pub struct Complex<'a> {
    pub basis: GradedBasis<'a>,
    maps: BTreeMap<i64, DifferentialMatrix>,
}

impl<'a> Complex<'a> {
    /// Matrices for every level whose target is also enumerated. With the
    /// weight grading the top level must map to zero.
    pub fn assemble(
        ctx: &'a VaContext,
        spec: SectorSpec,
        op: &dyn Fn(&FieldExpr) -> std::result::Result<FieldExpr, VaError>,
    ) -> Result<Self> {
        let basis = GradedBasis::enumerate(ctx, spec)?;
        let mut maps = BTreeMap::new();
        let levels: Vec<i64> = match basis.spec.grading {
            Grading::Parity => vec![0, 1],
            _ => basis.levels().collect(),
        };
        for &lv in &levels {
            if basis.spec.grading == Grading::Shifted && lv + 1 > basis.spec.bound {
                continue;
            }
            maps.insert(lv, differential_matrix(&basis, op, lv)?);
        }
        Ok(Complex { basis, maps })
    }

    fn map(&self, from: i64) -> DifferentialMatrix {
        let to = self.basis.next_level(from);
        self.maps.get(&from).cloned().unwrap_or_else(|| DifferentialMatrix {
            from,
            to,
            matrix: SparseMatrix::zero(self.basis.dim(to), self.basis.dim(from)),
        })
    }

    /// Whether every pair of consecutive matrices composes to zero.
    pub fn squares_to_zero(&self) -> bool {
        self.maps.values().all(|d| match self.maps.get(&d.to) {
            Some(d2) => d2.matrix.compose(&d.matrix).is_zero(),
            None => true,
        })
    }

    /// Levels at which cohomology is determined by the enumerated piece.
    pub fn computable_levels(&self) -> Vec<i64> {
        match self.basis.spec.grading {
            Grading::Weight => self.basis.levels().collect(),
            Grading::Parity => vec![0, 1],
            Grading::Shifted => (0..self.basis.spec.bound).collect(),
        }
    }

    pub fn cohomology(&self) -> Result<BTreeMap<i64, usize>> {
        let mut out = BTreeMap::new();
        for lv in self.computable_levels() {
            if self.basis.dim(lv) == 0 {
                continue;
            }
            out.insert(lv, cohomology_dims(&self.map(self.basis.prev_level(lv)), &self.map(lv))?);
        }
        Ok(out)
    }

    /// `Σ (−1)^level dim` over the computable levels.
    pub fn euler_characteristic(&self) -> i64 {
        self.computable_levels()
            .into_iter()
            .map(|lv| sign(lv) * self.basis.dim(lv) as i64)
            .sum()
    }
}

fn sign(lv: i64) -> i64 {
    if lv.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

/// A truncated series `Σ c(n, d) qⁿ zᵈ` with `n ≤ order`.
#[derive(Clone, PartialEq, Eq)]
pub struct CharacterSeries {
    pub order: u32,
    coeffs: BTreeMap<(u32, i32), i64>,
}

impl CharacterSeries {
    pub fn zero(order: u32) -> Self {
        CharacterSeries {
            order,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn one(order: u32) -> Self {
        let mut s = Self::zero(order);
        s.add_term(0, 0, 1);
        s
    }

    /// A polynomial in `z` alone, e.g. the Poincaré polynomial of a space.
    pub fn z_poly(order: u32, coeffs: &[(i32, i64)]) -> Self {
        let mut s = Self::zero(order);
        for &(d, c) in coeffs {
            s.add_term(0, d, c);
        }
        s
    }

    pub fn add_term(&mut self, q: u32, z: i32, c: i64) {
        if q > self.order || c == 0 {
            return;
        }
        let e = self.coeffs.entry((q, z)).or_insert(0);
        *e += c;
        if *e == 0 {
            self.coeffs.remove(&(q, z));
        }
    }

    pub fn coeff(&self, q: u32, z: i32) -> i64 {
        self.coeffs.get(&(q, z)).copied().unwrap_or(0)
    }

    /// The coefficient of `qⁿ` as a Laurent polynomial in `z`.
    pub fn q_coeff(&self, q: u32) -> BTreeMap<i32, i64> {
        self.coeffs
            .range((q, i32::MIN)..=(q, i32::MAX))
            .map(|(&(_, z), &c)| (z, c))
            .collect()
    }

    pub fn terms(&self) -> impl Iterator<Item = ((u32, i32), i64)> + '_ {
        self.coeffs.iter().map(|(&k, &v)| (k, v))
    }

    pub fn mul(&self, o: &CharacterSeries) -> CharacterSeries {
        let mut out = Self::zero(self.order.min(o.order));
        for (&(q1, z1), &c1) in &self.coeffs {
            for (&(q2, z2), &c2) in &o.coeffs {
                out.add_term(q1 + q2, z1 + z2, c1 * c2);
            }
        }
        out
    }

    pub fn is_symmetric_in_z(&self) -> bool {
        self.coeffs.iter().all(|(&(q, z), &c)| self.coeff(q, -z) == c)
    }
}

impl fmt::Display for CharacterSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .coeffs
            .iter()
            .map(|(&(q, z), &c)| format!("{c}*q^{q}*z^{z}"))
            .collect();
        write!(f, "{} + O(q^{})", parts.join(" + "), self.order + 1)
    }
}

impl fmt::Debug for CharacterSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// `Π_{n≥1} (1 + qⁿz)(1 + qⁿz⁻¹)` through `q^order`.
pub fn fermion_character(order: u32) -> CharacterSeries {
    let mut acc = CharacterSeries::one(order);
    for n in 1..=order {
        for z in [1, -1] {
            let mut f = CharacterSeries::one(order);
            f.add_term(n, z, 1);
            acc = acc.mul(&f);
        }
    }
    acc
}

/// `χ(Z; z) · Π_{n≥1} (1 + qⁿz)(1 + qⁿz⁻¹)`.
pub fn predicted_quotient_character(chi_z: &CharacterSeries, order: u32) -> Result<CharacterSeries> {
    if chi_z.terms().any(|((q, _), _)| q != 0) {
        return Err(CohomError::Config("χ(Z) must be a polynomial in z".into()));
    }
    let mut base = chi_z.clone();
    base.order = order;
    Ok(base.mul(&fermion_character(order)))
}

/// Assemble `Σ dim Hᵈ[w] qʷ zᵈ` for `w = 0..=order` with the weight grading.
pub fn character_of_computed_cohomology(
    ctx: &VaContext,
    op: &dyn Fn(&FieldExpr) -> std::result::Result<FieldExpr, VaError>,
    order: u32,
    template: &SectorSpec,
) -> Result<CharacterSeries> {
    let mut out = CharacterSeries::zero(order);
    for w in 0..=order {
        let spec = SectorSpec {
            grading: Grading::Weight,
            bound: w as i64,
            ..template.clone()
        };
        let cx = Complex::assemble(ctx, spec, op)?;
        for (d, dim) in cx.cohomology()? {
            out.add_term(w, d as i32, dim as i64);
        }
    }
    Ok(out)
}
