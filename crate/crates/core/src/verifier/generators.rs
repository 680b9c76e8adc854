//! Random instances and spin functions for fuzzing.

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::function_classes::{check_fq_i, make_family, root_of_unity, FamilyKind, DEFAULT_TOLERANCE};
use crate::model::{PottsModel, Region, SpinFunction};

const TABLE_TRIES: usize = 64;
const TABLE_MOMENT_BOUND: usize = 48;

#[derive(Clone, Copy, Debug)]
pub struct InstanceShape {
    pub q: usize,
    pub n: usize,
    pub edge_density: f64,
    pub j_max: f64,
    pub h_max: f64,
    /// Probability that a coupling or a field is exactly 0; with the same
    /// probability the whole field vector is 0.
    pub boundary_prob: f64,
}

/// Erdos-Renyi graph with uniform couplings and fields.
pub fn random_model<R: Rng + ?Sized>(rng: &mut R, shape: &InstanceShape) -> PottsModel {
    let mut edges = Vec::new();
    for u in 0..shape.n {
        for v in u + 1..shape.n {
            if rng.gen_bool(shape.edge_density) {
                edges.push((u, v, draw_parameter(rng, shape.j_max, shape.boundary_prob)));
            }
        }
    }
    let field_free = rng.gen_bool(shape.boundary_prob);
    let fields = (0..shape.n)
        .map(|_| if field_free { 0.0 } else { draw_parameter(rng, shape.h_max, shape.boundary_prob) })
        .collect();
    PottsModel::anonymous(shape.q, shape.n, &edges, fields).expect("generated model is valid")
}

fn draw_parameter<R: Rng + ?Sized>(rng: &mut R, max: f64, boundary_prob: f64) -> f64 {
    if max <= 0.0 || rng.gen_bool(boundary_prob) {
        0.0
    } else {
        rng.gen_range(0.0..max)
    }
}

/// Each vertex independently with probability 1/2.
pub fn random_region<R: Rng + ?Sized>(rng: &mut R, model: &PottsModel) -> Region {
    let vertices = (0..model.num_vertices()).filter(|_| rng.gen_bool(0.5)).collect();
    Region::new(model, vertices).expect("distinct in-range vertices")
}

/// `g(x) = f(x - k mod q)`, so `g(k) = f(0)`.
pub fn rotated(f: &SpinFunction, k: usize) -> SpinFunction {
    let q = f.q();
    SpinFunction::new((0..q).map(|x| f.at((x + q - k % q) % q)).collect())
}

/// Candidate table from one of three shapes: non-negative with the maximum
/// at 0, sign-symmetric real, or random moduli on random roots of unity.
fn candidate_table<R: Rng + ?Sized>(rng: &mut R, q: usize) -> SpinFunction {
    match rng.gen_range(0..3) {
        0 => {
            let mut values: Vec<f64> = (0..q).map(|_| rng.gen_range(0.0..1.0)).collect();
            values[0] = 1.0;
            SpinFunction::from_real(&values)
        }
        1 => {
            // values come in +-a pairs, plus a 0 when q is odd
            let mut values = Vec::with_capacity(q);
            for i in 0..q / 2 {
                let a = if i == 0 { 1.0 } else { rng.gen_range(0.0..1.0) };
                values.push(a);
                values.push(-a);
            }
            if q % 2 == 1 {
                values.push(0.0);
            }
            values[1..].shuffle(rng);
            SpinFunction::from_real(&values)
        }
        _ => {
            let values = (0..q)
                .map(|x| {
                    let modulus = if x == 0 { 1.0 } else { rng.gen_range(0.0..1.0) };
                    let phase = if x == 0 { Complex64::new(1.0, 0.0) } else { root_of_unity(rng.gen_range(0..q), q) };
                    phase * modulus
                })
                .collect();
            SpinFunction::new(values)
        }
    }
}

/// A random table certified in the class at index 0 by rejection sampling.
/// Falls back to family A if no candidate passes.
pub fn random_certified_table<R: Rng + ?Sized>(rng: &mut R, q: usize) -> SpinFunction {
    for _ in 0..TABLE_TRIES {
        let f = candidate_table(rng, q);
        if check_fq_i(&f, 0, TABLE_MOMENT_BOUND, DEFAULT_TOLERANCE).is_ok_and(|r| r.passed()) {
            return f;
        }
    }
    make_family(FamilyKind::A, q, None).expect("q >= 2")
}

/// A function the verifiers should refuse: complex entries with random
/// phases, or a real table with a negative first power sum.
pub fn random_non_member<R: Rng + ?Sized>(rng: &mut R, q: usize) -> SpinFunction {
    if rng.gen_bool(0.5) {
        let values = (0..q)
            .map(|_| Complex64::from_polar(rng.gen_range(0.1..1.0), rng.gen_range(0.0..std::f64::consts::TAU)))
            .collect();
        SpinFunction::new(values)
    } else {
        let mut values: Vec<f64> = (0..q).map(|_| rng.gen_range(-1.0..0.0)).collect();
        values[0] = 0.1;
        SpinFunction::from_real(&values)
    }
}

/// Draws a function for an inequality check: the three families, a random
/// certified table, and for field-free models also functions whose maximum
/// modulus is not at state 0.
pub fn random_function<R: Rng + ?Sized>(rng: &mut R, q: usize, field_free: bool) -> SpinFunction {
    let choices = if field_free { 5 } else { 4 };
    match rng.gen_range(0..choices) {
        0 => make_family(FamilyKind::A, q, None).expect("q >= 2"),
        1 => make_family(FamilyKind::B, q, None).expect("q >= 2"),
        2 => {
            let mut values: Vec<f64> = (0..q).map(|_| rng.gen_range(0.0..1.0)).collect();
            values[0] = 1.0;
            make_family(FamilyKind::C, q, Some(&values)).expect("values satisfy family C")
        }
        3 => random_certified_table(rng, q),
        _ => {
            let base = if rng.gen_bool(0.5) {
                make_family(FamilyKind::A, q, None).expect("q >= 2")
            } else {
                random_certified_table(rng, q)
            };
            rotated(&base, rng.gen_range(1..q))
        }
    }
}

/// A pair `(f0, f1)` with `f0 f1 = 0`: `f0` non-negative, `f1` non-negative
/// or sign-symmetric on the complement of `f0`'s support. `f0(0)` is the
/// maximum of `f0` unless `field_free`, where the maximum may sit anywhere.
pub fn random_disjoint_pair<R: Rng + ?Sized>(rng: &mut R, q: usize, field_free: bool) -> (SpinFunction, SpinFunction) {
    let relaxed = field_free && rng.gen_bool(0.5);
    // states where f1 may be non-zero
    let mut states: Vec<usize> = if relaxed { (0..q).collect() } else { (1..q).collect() };
    states.shuffle(rng);
    let take = rng.gen_range(1..=states.len().min(q - 1));
    let support1: Vec<usize> = states[..take].to_vec();

    let mut f0 = vec![0.0; q];
    for (x, slot) in f0.iter_mut().enumerate() {
        if !support1.contains(&x) {
            *slot = rng.gen_range(0.0..1.0);
        }
    }
    if !relaxed {
        f0[0] = 1.0;
    }

    let mut f1 = vec![0.0; q];
    if support1.len() >= 2 && rng.gen_bool(0.5) {
        for pair in support1.chunks_exact(2) {
            let a = rng.gen_range(0.0..1.0);
            f1[pair[0]] = a;
            f1[pair[1]] = -a;
        }
    } else {
        for &x in &support1 {
            f1[x] = rng.gen_range(0.0..1.0);
        }
    }
    (SpinFunction::from_real(&f0), SpinFunction::from_real(&f1))
}
