//! The Potts model instance and exact expectations by enumeration of spin
//! configurations.

use std::collections::HashSet;
use std::env;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::sum::{ComplexSum, KahanSum};

pub const DEFAULT_CAP: u64 = 1 << 24;
pub const CAP_ENV: &str = "POTTS_GKS_CAP";

/// Exponent budget above which weights are computed relative to the maximal
/// energy instead of as raw exponentials.
const LOG_SPACE_THRESHOLD: f64 = 600.0;

const CHUNK: u64 = 1 << 12;
const PARALLEL_MIN_STATES: u64 = 1 << 15;

/// Upper bound on the number of configurations an exact enumeration may visit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Cap(pub u64);

impl Default for Cap {
    fn default() -> Self {
        Cap(DEFAULT_CAP)
    }
}

impl Cap {
    /// Default cap, overridden by `POTTS_GKS_CAP` when set.
    pub fn from_env() -> Result<Cap> {
        match env::var(CAP_ENV) {
            Ok(s) => {
                s.trim().parse::<u64>().map(Cap).map_err(|_| Error::Parse(format!("{CAP_ENV}={s:?} is not an integer")))
            }
            Err(_) => Ok(Cap::default()),
        }
    }

    /// Returns `base^exp` if it fits under the cap.
    pub fn admit(self, base: usize, exp: usize) -> Result<u64> {
        let size = (base as f64).powi(exp as i32);
        let mut n: u64 = 1;
        for _ in 0..exp {
            n = match n.checked_mul(base as u64) {
                Some(n) if n <= self.0 => n,
                _ => return Err(Error::EnumerationTooLarge { size, cap: self.0 }),
            };
        }
        if n > self.0 {
            return Err(Error::EnumerationTooLarge { size, cap: self.0 });
        }
        Ok(n)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub coupling: f64,
}

impl Edge {
    pub fn new(u: usize, v: usize, coupling: f64) -> Self {
        Edge { u, v, coupling }
    }
}

/// Finite simple graph with non-negative couplings `J`, non-negative fields
/// `h` and `q` local states. Construction validates every invariant, so a
/// `PottsModel` value is always a legal instance.
#[derive(Clone, Debug, PartialEq)]
pub struct PottsModel {
    q: usize,
    vertices: Vec<String>,
    edges: Vec<Edge>,
    fields: Vec<f64>,
}

/// Checks the raw parts of a model instance.
pub fn validate_model(q: usize, vertices: &[String], edges: &[Edge], fields: &[f64]) -> Result<()> {
    if q < 2 {
        return Err(Error::BadQ(q));
    }
    let mut names = HashSet::new();
    for name in vertices {
        if !names.insert(name.as_str()) {
            return Err(Error::DuplicateVertex(name.clone()));
        }
    }
    if fields.len() != vertices.len() {
        return Err(Error::Parse(format!("{} field values for {} vertices", fields.len(), vertices.len())));
    }
    let n = vertices.len();
    let mut seen = HashSet::new();
    for (i, e) in edges.iter().enumerate() {
        if e.u >= n || e.v >= n {
            return Err(Error::BadEdge(format!("edge {i} references a vertex outside 0..{n}")));
        }
        if e.u == e.v {
            return Err(Error::BadEdge(format!("edge {i} is a loop at {:?}", vertices[e.u])));
        }
        let key = (e.u.min(e.v), e.u.max(e.v));
        if !seen.insert(key) {
            return Err(Error::BadEdge(format!("edge {i} duplicates <{}, {}>", vertices[e.u], vertices[e.v])));
        }
        if !e.coupling.is_finite() {
            return Err(Error::NonFinite(format!("coupling on edge {i}")));
        }
        if e.coupling < 0.0 {
            return Err(Error::NegativeCoupling { edge: i, value: e.coupling });
        }
    }
    for (v, &h) in fields.iter().enumerate() {
        if !h.is_finite() {
            return Err(Error::NonFinite(format!("field on {:?}", vertices[v])));
        }
        if h < 0.0 {
            return Err(Error::NegativeField { vertex: vertices[v].clone(), value: h });
        }
    }
    Ok(())
}

impl PottsModel {
    pub fn new(q: usize, vertices: Vec<String>, edges: Vec<Edge>, fields: Vec<f64>) -> Result<Self> {
        validate_model(q, &vertices, &edges, &fields)?;
        Ok(PottsModel { q, vertices, edges, fields })
    }

    /// Model on vertices named `"0"`, `"1"`, ... given edges as index triples.
    pub fn anonymous(q: usize, n: usize, edges: &[(usize, usize, f64)], fields: Vec<f64>) -> Result<Self> {
        let vertices = (0..n).map(|i| i.to_string()).collect();
        let edges = edges.iter().map(|&(u, v, j)| Edge::new(u, v, j)).collect();
        Self::new(q, vertices, edges, fields)
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn fields(&self) -> &[f64] {
        &self.fields
    }

    pub fn vertex_index(&self, name: &str) -> Result<usize> {
        self.vertices.iter().position(|v| v == name).ok_or_else(|| Error::UnknownVertex(name.to_string()))
    }

    /// True when some vertex carries a positive field.
    pub fn has_field(&self) -> bool {
        self.fields.iter().any(|&h| h > 0.0)
    }

    pub fn with_coupling(&self, edge: usize, coupling: f64) -> Result<Self> {
        let mut edges = self.edges.clone();
        edges.get_mut(edge).ok_or_else(|| Error::BadEdge(format!("no edge with index {edge}")))?.coupling = coupling;
        Self::new(self.q, self.vertices.clone(), edges, self.fields.clone())
    }

    pub fn with_field(&self, vertex: usize, field: f64) -> Result<Self> {
        let mut fields = self.fields.clone();
        *fields.get_mut(vertex).ok_or_else(|| Error::UnknownVertex(format!("#{vertex}")))? = field;
        Self::new(self.q, self.vertices.clone(), self.edges.clone(), fields)
    }

    /// `sum_e J_e delta_e(sigma) + sum_v h_v delta_v(sigma)`.
    #[inline]
    pub fn energy(&self, spins: &[usize]) -> f64 {
        let mut energy = 0.0;
        for e in &self.edges {
            if spins[e.u] == spins[e.v] {
                energy += e.coupling;
            }
        }
        for (s, h) in spins.iter().zip(&self.fields) {
            if *s == 0 {
                energy += h;
            }
        }
        energy
    }

    fn energy_shift(&self) -> f64 {
        let max_j = self.edges.iter().map(|e| e.coupling).fold(0.0, f64::max);
        let max_h = self.fields.iter().copied().fold(0.0, f64::max);
        let budget = self.edges.len() as f64 * max_j + self.vertices.len() as f64 * max_h;
        if budget > LOG_SPACE_THRESHOLD {
            self.edges.iter().map(|e| e.coupling).sum::<f64>() + self.fields.iter().sum::<f64>()
        } else {
            0.0
        }
    }
}

/// A spin assignment `sigma` in `{0..q-1}^V`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SpinConfig(Vec<usize>);

impl SpinConfig {
    pub fn new(spins: Vec<usize>, q: usize) -> Result<Self> {
        if let Some(&bad) = spins.iter().find(|&&s| s >= q) {
            return Err(Error::Parse(format!("spin value {bad} outside 0..{q}")));
        }
        Ok(SpinConfig(spins))
    }

    /// Decodes a lexicographic index; vertex 0 is the most significant digit.
    pub fn from_index(mut index: u64, n: usize, q: usize) -> Self {
        let mut spins = vec![0; n];
        for s in spins.iter_mut().rev() {
            *s = (index % q as u64) as usize;
            index /= q as u64;
        }
        SpinConfig(spins)
    }

    pub fn index(&self, q: usize) -> u64 {
        self.0.iter().fold(0u64, |acc, &s| acc * q as u64 + s as u64)
    }

    pub fn spins(&self) -> &[usize] {
        &self.0
    }

    pub(crate) fn from_raw(spins: Vec<usize>) -> Self {
        SpinConfig(spins)
    }
}

/// A subset of the vertex set, stored as vertex indices in caller order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Region(Vec<usize>);

impl Region {
    pub fn new(model: &PottsModel, vertices: Vec<usize>) -> Result<Self> {
        let mut seen = HashSet::new();
        for &v in &vertices {
            let name = model.vertices().get(v).ok_or_else(|| Error::UnknownVertex(format!("#{v}")))?;
            if !seen.insert(v) {
                return Err(Error::RepeatedRegionVertex(name.clone()));
            }
        }
        Ok(Region(vertices))
    }

    pub fn from_names<S: AsRef<str>>(model: &PottsModel, names: &[S]) -> Result<Self> {
        let indices = names.iter().map(|n| model.vertex_index(n.as_ref())).collect::<Result<Vec<_>>>()?;
        Self::new(model, indices)
    }

    pub fn empty() -> Self {
        Region(Vec::new())
    }

    pub fn all(model: &PottsModel) -> Self {
        Region((0..model.num_vertices()).collect())
    }

    /// Region from a bitmask over vertex indices.
    pub fn from_mask(mask: u64, n: usize) -> Self {
        Region((0..n).filter(|v| mask >> v & 1 == 1).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn vertices(&self) -> &[usize] {
        &self.0
    }

    pub fn contains(&self, v: usize) -> bool {
        self.0.contains(&v)
    }

    pub fn names(&self, model: &PottsModel) -> Vec<String> {
        self.0.iter().map(|&v| model.vertices()[v].clone()).collect()
    }

    fn check_for(&self, model: &PottsModel) -> Result<()> {
        match self.0.iter().find(|&&v| v >= model.num_vertices()) {
            Some(v) => Err(Error::UnknownVertex(format!("#{v}"))),
            None => Ok(()),
        }
    }
}

/// A map `f: {0..q-1} -> C`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinFunction(Vec<Complex64>);

impl SpinFunction {
    pub fn new(values: Vec<Complex64>) -> Self {
        SpinFunction(values)
    }

    pub fn from_real(values: &[f64]) -> Self {
        SpinFunction(values.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn constant(q: usize, c: f64) -> Self {
        SpinFunction(vec![Complex64::new(c, 0.0); q])
    }

    /// `delta_{x,i}`.
    pub fn indicator(q: usize, i: usize) -> Self {
        SpinFunction((0..q).map(|x| Complex64::new(if x == i { 1.0 } else { 0.0 }, 0.0)).collect())
    }

    pub fn q(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.0
    }

    #[inline]
    pub fn at(&self, x: usize) -> Complex64 {
        self.0[x]
    }

    pub fn scaled(&self, c: f64) -> Self {
        SpinFunction(self.0.iter().map(|z| z * c).collect())
    }

    /// `max_x |f(x)|`.
    pub fn sup_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `f(sigma)^R = prod_{v in R} f(sigma_v)`.
    #[inline]
    pub fn region_product(&self, region: &Region, spins: &[usize]) -> Complex64 {
        region.vertices().iter().fold(Complex64::new(1.0, 0.0), |acc, &v| acc * self.0[spins[v]])
    }
}

/// One factor `f(sigma)^R` of a product observable.
pub type Factor = (SpinFunction, Region);

/// `prod_i f_i(sigma)^{R_i}`; the empty product is 1.
#[inline]
pub fn factor_product(factors: &[Factor], spins: &[usize]) -> Complex64 {
    factors.iter().fold(Complex64::new(1.0, 0.0), |acc, (f, r)| acc * f.region_product(r, spins))
}

pub(crate) fn check_factors(model: &PottsModel, factors: &[Factor]) -> Result<()> {
    for (f, r) in factors {
        if f.q() != model.q() {
            return Err(Error::FunctionLength { expected: model.q(), got: f.q() });
        }
        r.check_for(model)?;
    }
    Ok(())
}

/// Unnormalized Gibbs weight `exp{sum_e J_e delta_e + sum_v h_v delta_v}`.
pub fn potts_weight(model: &PottsModel, sigma: &SpinConfig) -> f64 {
    model.energy(sigma.spins()).exp()
}

/// Weighted sums over all spin configurations, with weights relative to
/// `exp(log_shift)`.
struct WeightedSums {
    z: f64,
    log_shift: f64,
    sums: Vec<Complex64>,
}

struct ChunkAcc {
    z: KahanSum,
    sums: Vec<ComplexSum>,
}

fn weighted_sums<F>(model: &PottsModel, cap: Cap, n_obs: usize, obs: F) -> Result<WeightedSums>
where
    F: Fn(&[usize], &mut [Complex64]) + Sync,
{
    let n = model.num_vertices();
    let q = model.q();
    let total = cap.admit(q, n)?;
    let shift = model.energy_shift();
    let n_chunks = total.div_ceil(CHUNK);

    let run_chunk = |c: u64| -> ChunkAcc {
        let start = c * CHUNK;
        let end = (start + CHUNK).min(total);
        let mut spins = SpinConfig::from_index(start, n, q).0;
        let mut acc = ChunkAcc { z: KahanSum::new(), sums: vec![ComplexSum::new(); n_obs] };
        let mut values = vec![Complex64::new(0.0, 0.0); n_obs];
        for _ in start..end {
            let w = (model.energy(&spins) - shift).exp();
            acc.z.add(w);
            obs(&spins, &mut values);
            for (s, v) in acc.sums.iter_mut().zip(&values) {
                s.add(v * w);
            }
            // odometer, last vertex fastest
            for s in spins.iter_mut().rev() {
                *s += 1;
                if *s < q {
                    break;
                }
                *s = 0;
            }
        }
        acc
    };

    let chunks: Vec<ChunkAcc> = if total >= PARALLEL_MIN_STATES {
        (0..n_chunks).into_par_iter().map(run_chunk).collect()
    } else {
        (0..n_chunks).map(run_chunk).collect()
    };

    let mut z = KahanSum::new();
    let mut sums = vec![ComplexSum::new(); n_obs];
    for chunk in &chunks {
        z.merge(&chunk.z);
        for (s, c) in sums.iter_mut().zip(&chunk.sums) {
            s.merge(c);
        }
    }
    Ok(WeightedSums { z: z.value(), log_shift: shift, sums: sums.iter().map(|s| s.value()).collect() })
}

/// `Z = sum_sigma weight(sigma)`. May overflow to infinity for very strong
/// couplings; see [`log_partition_function`].
pub fn partition_function(model: &PottsModel, cap: Cap) -> Result<f64> {
    let ws = weighted_sums(model, cap, 0, |_, _| {})?;
    Ok(ws.z * ws.log_shift.exp())
}

pub fn log_partition_function(model: &PottsModel, cap: Cap) -> Result<f64> {
    let ws = weighted_sums(model, cap, 0, |_, _| {})?;
    Ok(ws.z.ln() + ws.log_shift)
}

/// Exact means of `n_obs` observables evaluated together in one pass over
/// the state space. `obs` writes the observable values for a configuration.
pub fn expectations_with<F>(model: &PottsModel, cap: Cap, n_obs: usize, obs: F) -> Result<Vec<Complex64>>
where
    F: Fn(&[usize], &mut [Complex64]) + Sync,
{
    let ws = weighted_sums(model, cap, n_obs, obs)?;
    Ok(ws.sums.into_iter().map(|s| s / ws.z).collect())
}

/// `<prod_i f_i(sigma)^{R_i}>` under the Potts measure.
pub fn potts_expectation(model: &PottsModel, factors: &[Factor], cap: Cap) -> Result<Complex64> {
    Ok(potts_expectations(model, std::slice::from_ref(&factors.to_vec()), cap)?[0])
}

/// Several product observables in a single enumeration.
pub fn potts_expectations(model: &PottsModel, observables: &[Vec<Factor>], cap: Cap) -> Result<Vec<Complex64>> {
    for factors in observables {
        check_factors(model, factors)?;
    }
    expectations_with(model, cap, observables.len(), |spins, out| {
        for (o, factors) in out.iter_mut().zip(observables) {
            *o = factor_product(factors, spins);
        }
    })
}

/// `pi(sigma)` for every configuration, indexed lexicographically.
pub fn spin_distribution(model: &PottsModel, cap: Cap) -> Result<Vec<f64>> {
    let total = cap.admit(model.q(), model.num_vertices())?;
    let shift = model.energy_shift();
    let n = model.num_vertices();
    let q = model.q();
    let mut weights: Vec<f64> =
        (0..total).map(|i| (model.energy(SpinConfig::from_index(i, n, q).spins()) - shift).exp()).collect();
    let z: KahanSum = weights.iter().copied().collect();
    let z = z.value();
    for w in &mut weights {
        *w /= z;
    }
    Ok(weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    const LN2: f64 = std::f64::consts::LN_2;

    fn ln3() -> f64 {
        3f64.ln()
    }

    fn single_edge(q: usize, j: f64) -> PottsModel {
        PottsModel::anonymous(q, 2, &[(0, 1, j)], vec![0.0, 0.0]).unwrap()
    }

    #[test]
    fn validate_accepts_single_vertex() {
        assert!(PottsModel::anonymous(2, 1, &[], vec![0.0]).is_ok());
    }

    #[test]
    fn validate_rejects_bad_instances() {
        assert!(matches!(PottsModel::anonymous(2, 2, &[(1, 1, 0.5)], vec![0.0, 0.0]), Err(Error::BadEdge(_))));
        assert!(matches!(
            PottsModel::anonymous(2, 2, &[(0, 1, -0.1)], vec![0.0, 0.0]),
            Err(Error::NegativeCoupling { .. })
        ));
        assert!(matches!(PottsModel::anonymous(2, 2, &[], vec![0.0, -1.0]), Err(Error::NegativeField { .. })));
        assert!(matches!(PottsModel::anonymous(1, 1, &[], vec![0.0]), Err(Error::BadQ(1))));
        assert!(matches!(
            PottsModel::anonymous(2, 2, &[(0, 1, 1.0), (1, 0, 1.0)], vec![0.0, 0.0]),
            Err(Error::BadEdge(_))
        ));
        assert!(matches!(PottsModel::anonymous(2, 2, &[(0, 2, 1.0)], vec![0.0, 0.0]), Err(Error::BadEdge(_))));
        assert!(matches!(PottsModel::anonymous(2, 2, &[(0, 1, f64::NAN)], vec![0.0, 0.0]), Err(Error::NonFinite(_))));
    }

    #[test]
    fn weight_examples() {
        let free = PottsModel::anonymous(3, 3, &[(0, 1, 0.0)], vec![0.0; 3]).unwrap();
        let sigma = SpinConfig::new(vec![0, 2, 1], 3).unwrap();
        assert_eq!(potts_weight(&free, &sigma), 1.0);

        let edge = single_edge(2, ln3());
        let same = SpinConfig::new(vec![1, 1], 2).unwrap();
        assert!((potts_weight(&edge, &same) - 3.0).abs() < 1e-12);

        let vertex = PottsModel::anonymous(2, 1, &[], vec![LN2]).unwrap();
        let up = SpinConfig::new(vec![0], 2).unwrap();
        let down = SpinConfig::new(vec![1], 2).unwrap();
        assert!((potts_weight(&vertex, &up) - 2.0).abs() < 1e-12);
        assert_eq!(potts_weight(&vertex, &down), 1.0);
    }

    #[test]
    fn partition_function_examples() {
        let z = partition_function(&single_edge(2, ln3()), Cap::default()).unwrap();
        assert!((z - 8.0).abs() < 1e-12);

        let vertex = PottsModel::anonymous(3, 1, &[], vec![LN2]).unwrap();
        assert!((partition_function(&vertex, Cap::default()).unwrap() - 4.0).abs() < 1e-12);

        let free = PottsModel::anonymous(3, 2, &[], vec![0.0, 0.0]).unwrap();
        assert_eq!(partition_function(&free, Cap::default()).unwrap(), 9.0);
    }

    #[test]
    fn cap_is_enforced() {
        let model = PottsModel::anonymous(2, 10, &[], vec![0.0; 10]).unwrap();
        assert!(matches!(partition_function(&model, Cap(1023)), Err(Error::EnumerationTooLarge { .. })));
        assert!(partition_function(&model, Cap(1024)).is_ok());
        let huge = PottsModel::anonymous(5, 40, &[], vec![0.0; 40]).unwrap();
        assert!(matches!(partition_function(&huge, Cap::default()), Err(Error::EnumerationTooLarge { .. })));
    }

    #[test]
    fn expectation_examples() {
        let model = single_edge(2, ln3());
        let u = Region::new(&model, vec![0]).unwrap();
        let v = Region::new(&model, vec![1]).unwrap();
        let f = SpinFunction::from_real(&[0.5, -0.5]);

        let empty = potts_expectation(&model, &[(f.clone(), Region::empty())], Cap::default()).unwrap();
        assert_eq!(empty, Complex64::new(1.0, 0.0));
        assert_eq!(potts_expectation(&model, &[], Cap::default()).unwrap(), Complex64::new(1.0, 0.0));

        let m = potts_expectation(&model, &[(f.clone(), u.clone()), (f, v.clone())], Cap::default()).unwrap();
        assert!((m.re - 0.125).abs() < 1e-12 && m.im.abs() < 1e-15);

        let schonmann = [(SpinFunction::indicator(2, 0), u), (SpinFunction::indicator(2, 1), v)];
        let m = potts_expectation(&model, &schonmann, Cap::default()).unwrap();
        assert!((m.re - 0.125).abs() < 1e-12);
    }

    #[test]
    fn free_model_factorizes() {
        let model = PottsModel::anonymous(3, 3, &[], vec![0.0; 3]).unwrap();
        let f = SpinFunction::from_real(&[2.0, 0.5, -1.0]);
        let s1 = 1.5 / 3.0;
        let m = potts_expectation(&model, &[(f, Region::all(&model))], Cap::default()).unwrap();
        assert!((m.re - s1 * s1 * s1).abs() < 1e-12);
    }

    #[test]
    fn log_space_weights_keep_ratios() {
        // 20 * 40 = 800 > 600 triggers the shifted weights
        let model = PottsModel::anonymous(2, 2, &[(0, 1, 40.0)], vec![20.0, 20.0]).unwrap();
        let log_z = log_partition_function(&model, Cap::default()).unwrap();
        let exact = (80f64).exp() + 2.0 * (20f64).exp() + 40f64.exp();
        assert!((log_z - exact.ln()).abs() < 1e-12);
        let m =
            potts_expectation(&model, &[(SpinFunction::indicator(2, 0), Region::all(&model))], Cap::default()).unwrap();
        assert!((m.re - (80f64).exp() / exact).abs() < 1e-12);
    }

    #[test]
    fn spin_index_roundtrip() {
        for i in 0..81 {
            let s = SpinConfig::from_index(i, 4, 3);
            assert_eq!(s.index(3), i);
        }
        assert_eq!(SpinConfig::from_index(5, 3, 2).spins(), &[1, 0, 1]);
    }

    #[test]
    fn region_rejects_repeats_and_unknowns() {
        let model = single_edge(2, 1.0);
        assert!(matches!(Region::new(&model, vec![0, 0]), Err(Error::RepeatedRegionVertex(_))));
        assert!(matches!(Region::from_names(&model, &["7"]), Err(Error::UnknownVertex(_))));
    }

    #[test]
    fn parallel_path_matches_serial_sum() {
        // 2^16 states crosses the parallel threshold
        let edges: Vec<_> = (0..15).map(|i| (i, i + 1, 0.3)).collect();
        let model = PottsModel::anonymous(2, 16, &edges, vec![0.1; 16]).unwrap();
        let z = partition_function(&model, Cap::default()).unwrap();
        let direct: KahanSum =
            (0..1u64 << 16).map(|i| potts_weight(&model, &SpinConfig::from_index(i, 16, 2))).collect();
        assert!((z - direct.value()).abs() / z < 1e-13);
    }
}
