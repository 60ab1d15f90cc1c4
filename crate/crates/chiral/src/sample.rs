//! Seeded random polynomial data for property checks and CLI suites.

use crate::coeff::CoeffFn;
use crate::geom::{DiffForm, VectorField};
use crate::scalar::Scalar;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;
pub type SampleRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A polynomial in the flat coordinates with small integer coefficients and
/// total degree at most `max_deg`.
pub fn poly(rng: &mut SampleRng, n: usize, m: usize, max_deg: u32) -> CoeffFn {
    let mut f = CoeffFn::zero(n, m);
    for _ in 0..rng.gen_range(1..=3) {
        let mut t = CoeffFn::constant(n, m, Scalar::int(rng.gen_range(-3..=3)));
        let mut budget = rng.gen_range(0..=max_deg);
        while budget > 0 && n > 0 {
            let i = rng.gen_range(0..n);
            t = t.mul(&CoeffFn::flat_coord(n, m, i).expect("flat index"));
            budget -= 1;
        }
        f.add_assign(&t);
    }
    f
}

pub fn vector_field(rng: &mut SampleRng, n: usize, m: usize, max_deg: u32) -> VectorField {
    VectorField {
        comps: (0..n + m).map(|_| poly(rng, n, m, max_deg)).collect(),
    }
}

/// A random homogeneous form of degree `k`.
pub fn form(rng: &mut SampleRng, n: usize, m: usize, k: usize, max_deg: u32) -> DiffForm {
    let d = n + m;
    let mut w = DiffForm::zero(n, m);
    if k > d {
        return w;
    }
    for _ in 0..rng.gen_range(1..=3) {
        let mut idx: Vec<usize> = (0..d).collect();
        for i in (1..d).rev() {
            idx.swap(i, rng.gen_range(0..=i));
        }
        idx.truncate(k);
        w = w.add(&DiffForm::monomial(poly(rng, n, m, max_deg), &idx));
    }
    w
}

/// A random mixed-degree form with every degree present.
pub fn mixed_form(rng: &mut SampleRng, n: usize, m: usize, max_deg: u32) -> DiffForm {
    let mut w = DiffForm::zero(n, m);
    for k in 0..=n + m {
        w = w.add(&form(rng, n, m, k, max_deg));
    }
    w
}

/// A closed 3-form: `d` of a random 2-form.
pub fn closed_three_form(rng: &mut SampleRng, n: usize, m: usize, max_deg: u32) -> DiffForm {
    form(rng, n, m, 2, max_deg + 1).d()
}
