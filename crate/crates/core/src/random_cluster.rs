//! Random-cluster representation on the graph augmented by a ghost vertex.
//!
//! Every vertex `v` gets a ghost bond `<g, v>` with open probability
//! `1 - exp(-h_v)`; real edges open with probability `1 - exp(-J_e)`. Bond
//! configurations are weighted by `prod p^w (1-p)^(1-w) * q^k`, where `k`
//! counts the open clusters of the augmented graph including the one that
//! holds the ghost. Given the bonds, the ghost cluster takes spin 0 and every
//! other cluster an independent uniform spin; the resulting spin law is the
//! Potts measure.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use crate::error::Result;
use crate::function_classes::{moments, MomentTable};
use crate::model::{check_factors, Cap, Factor, PottsModel, Region, SpinConfig, SpinFunction};
use crate::sum::{ComplexSum, KahanSum};
use crate::union_find::UnionFind;

const CHUNK: u64 = 1 << 10;
const PARALLEL_MIN_CONFIGS: u64 = 1 << 14;

/// The model graph plus a ghost vertex joined to every vertex. Bonds are
/// indexed with the real edges first, in model order, followed by one ghost
/// bond per vertex, in vertex order. The ghost's own index is `|V|`.
#[derive(Clone, Debug)]
pub struct AugmentedGraph {
    base: PottsModel,
    ends: Vec<(usize, usize)>,
    open: Vec<f64>,
    closed: Vec<f64>,
}

pub fn augment(model: &PottsModel) -> AugmentedGraph {
    let n = model.num_vertices();
    let mut ends = Vec::with_capacity(model.num_edges() + n);
    let mut params = Vec::with_capacity(model.num_edges() + n);
    for e in model.edges() {
        ends.push((e.u, e.v));
        params.push(e.coupling);
    }
    for (v, &h) in model.fields().iter().enumerate() {
        ends.push((n, v));
        params.push(h);
    }
    AugmentedGraph {
        base: model.clone(),
        ends,
        open: params.iter().map(|&x| -(-x).exp_m1()).collect(),
        closed: params.iter().map(|&x| (-x).exp()).collect(),
    }
}

impl AugmentedGraph {
    pub fn base(&self) -> &PottsModel {
        &self.base
    }

    pub fn q(&self) -> usize {
        self.base.q()
    }

    pub fn num_vertices(&self) -> usize {
        self.base.num_vertices()
    }

    /// Index of the ghost vertex in cluster computations.
    pub fn ghost(&self) -> usize {
        self.base.num_vertices()
    }

    /// `|E+| = |E| + |V|`.
    pub fn num_bonds(&self) -> usize {
        self.ends.len()
    }

    pub fn ghost_bond(&self, v: usize) -> usize {
        self.base.num_edges() + v
    }

    pub fn is_ghost_bond(&self, e: usize) -> bool {
        e >= self.base.num_edges()
    }

    pub fn endpoints(&self, e: usize) -> (usize, usize) {
        self.ends[e]
    }

    /// Open probability of bond `e`.
    pub fn probability(&self, e: usize) -> f64 {
        self.open[e]
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.open
    }

    pub(crate) fn closed_probability(&self, e: usize) -> f64 {
        self.closed[e]
    }
}

/// Open/closed state of every bond of the augmented graph.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BondConfig(Vec<bool>);

impl BondConfig {
    pub fn new(open: Vec<bool>) -> Self {
        BondConfig(open)
    }

    pub fn all_closed(aug: &AugmentedGraph) -> Self {
        BondConfig(vec![false; aug.num_bonds()])
    }

    pub fn all_open(aug: &AugmentedGraph) -> Self {
        BondConfig(vec![true; aug.num_bonds()])
    }

    /// Bit `e` of `mask` is the state of bond `e`.
    pub fn from_index(mask: u64, len: usize) -> Self {
        BondConfig((0..len).map(|e| mask >> e & 1 == 1).collect())
    }

    pub fn index(&self) -> u64 {
        self.0.iter().enumerate().fold(0, |acc, (e, &b)| acc | (u64::from(b) << e))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_open(&self, e: usize) -> bool {
        self.0[e]
    }

    pub fn set(&mut self, e: usize, open: bool) {
        self.0[e] = open;
    }

    pub fn with(&self, e: usize, open: bool) -> Self {
        let mut next = self.clone();
        next.0[e] = open;
        next
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }
}

/// Where a vertex sits in a cluster partition.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClusterLabel {
    Ghost,
    Free(usize),
}

/// Vertex sets of the open clusters: the ghost cluster (ghost itself not
/// listed) and the others, ordered by their smallest vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClusterPartition {
    ghost_cluster: Vec<usize>,
    clusters: Vec<Vec<usize>>,
    labels: Vec<ClusterLabel>,
}

impl ClusterPartition {
    pub fn ghost_cluster(&self) -> &[usize] {
        &self.ghost_cluster
    }

    pub fn clusters(&self) -> &[Vec<usize>] {
        &self.clusters
    }

    /// Number of clusters not containing the ghost.
    pub fn k(&self) -> usize {
        self.clusters.len()
    }

    pub fn label(&self, v: usize) -> ClusterLabel {
        self.labels[v]
    }

    fn from_union_find(uf: &mut UnionFind, n: usize) -> Self {
        let ghost = n;
        let mut labels = vec![ClusterLabel::Ghost; n];
        let mut ghost_cluster = Vec::new();
        let mut clusters: Vec<Vec<usize>> = Vec::new();
        // root -> cluster index; roots are minimal members so a cluster's
        // root is met before any other member
        let mut slot = vec![usize::MAX; n + 1];
        let ghost_root = uf.find(ghost);
        for (v, label) in labels.iter_mut().enumerate() {
            let root = uf.find(v);
            if root == ghost_root {
                ghost_cluster.push(v);
                continue;
            }
            if slot[root] == usize::MAX {
                slot[root] = clusters.len();
                clusters.push(Vec::new());
            }
            clusters[slot[root]].push(v);
            *label = ClusterLabel::Free(slot[root]);
        }
        ClusterPartition { ghost_cluster, clusters, labels }
    }
}

/// Open clusters of `omega`, joined in bond-index order.
pub fn clusters(aug: &AugmentedGraph, omega: &BondConfig) -> ClusterPartition {
    let mut uf = UnionFind::new(aug.num_vertices() + 1);
    clusters_with(aug, omega, &mut uf)
}

pub(crate) fn clusters_with(aug: &AugmentedGraph, omega: &BondConfig, uf: &mut UnionFind) -> ClusterPartition {
    assert_eq!(omega.len(), aug.num_bonds(), "bond configuration does not match E+");
    uf.reset();
    for (e, &(a, b)) in aug.ends.iter().enumerate() {
        if omega.is_open(e) {
            uf.union(a, b);
        }
    }
    ClusterPartition::from_union_find(uf, aug.num_vertices())
}

/// Unnormalized random-cluster weight of `omega`.
pub fn rc_weight(aug: &AugmentedGraph, omega: &BondConfig, partition: &ClusterPartition) -> f64 {
    let mut w = 1.0;
    for e in 0..aug.num_bonds() {
        w *= if omega.is_open(e) { aug.probability(e) } else { aug.closed_probability(e) };
        if w == 0.0 {
            return 0.0;
        }
    }
    // ghost cluster counted as one of the clusters of G+
    w * (aug.q() as f64).powi(partition.k() as i32 + 1)
}

struct BondSums {
    z: f64,
    sums: Vec<Complex64>,
}

/// Sums `weight(omega) * obs(omega)` over all bond configurations in index
/// order. Configurations of zero weight are skipped.
fn bond_sums<F>(aug: &AugmentedGraph, cap: Cap, n_obs: usize, obs: F) -> Result<BondSums>
where
    F: Fn(&BondConfig, &ClusterPartition, f64, &mut [Complex64]) + Sync,
{
    let total = cap.admit(2, aug.num_bonds())?;
    let n_chunks = total.div_ceil(CHUNK);
    let run_chunk = |c: u64| -> (KahanSum, Vec<ComplexSum>) {
        let mut uf = UnionFind::new(aug.num_vertices() + 1);
        let mut z = KahanSum::new();
        let mut sums = vec![ComplexSum::new(); n_obs];
        let mut values = vec![Complex64::new(0.0, 0.0); n_obs];
        for mask in c * CHUNK..((c + 1) * CHUNK).min(total) {
            let omega = BondConfig::from_index(mask, aug.num_bonds());
            let partition = clusters_with(aug, &omega, &mut uf);
            let w = rc_weight(aug, &omega, &partition);
            if w == 0.0 {
                continue;
            }
            z.add(w);
            obs(&omega, &partition, w, &mut values);
            for (s, v) in sums.iter_mut().zip(&values) {
                s.add(v * w);
            }
        }
        (z, sums)
    };
    let chunks: Vec<_> = if total >= PARALLEL_MIN_CONFIGS {
        (0..n_chunks).into_par_iter().map(run_chunk).collect()
    } else {
        (0..n_chunks).map(run_chunk).collect()
    };
    let mut z = KahanSum::new();
    let mut sums = vec![ComplexSum::new(); n_obs];
    for (cz, cs) in &chunks {
        z.merge(cz);
        for (s, c) in sums.iter_mut().zip(cs) {
            s.merge(c);
        }
    }
    Ok(BondSums { z: z.value(), sums: sums.iter().map(ComplexSum::value).collect() })
}

/// The random-cluster measure tabulated over all bond configurations.
#[derive(Clone, Debug)]
pub struct RcMeasure {
    probabilities: Vec<f64>,
}

impl RcMeasure {
    pub fn probability(&self, omega: &BondConfig) -> f64 {
        self.probabilities[omega.index() as usize]
    }

    /// Probabilities indexed by [`BondConfig::index`].
    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }
}

pub fn rc_measure(aug: &AugmentedGraph, cap: Cap) -> Result<RcMeasure> {
    let total = cap.admit(2, aug.num_bonds())?;
    let mut uf = UnionFind::new(aug.num_vertices() + 1);
    let mut weights: Vec<f64> = (0..total)
        .map(|mask| {
            let omega = BondConfig::from_index(mask, aug.num_bonds());
            let partition = clusters_with(aug, &omega, &mut uf);
            rc_weight(aug, &omega, &partition)
        })
        .collect();
    let z: KahanSum = weights.iter().copied().collect();
    let z = z.value();
    for w in &mut weights {
        *w /= z;
    }
    Ok(RcMeasure { probabilities: weights })
}

/// `phi(omega)`.
pub fn rc_probability(aug: &AugmentedGraph, omega: &BondConfig, cap: Cap) -> Result<f64> {
    let norm = bond_sums(aug, cap, 0, |_, _, _, _| {})?.z;
    let w = rc_weight(aug, omega, &clusters(aug, omega));
    Ok(w / norm)
}

/// Colors the clusters: ghost cluster spin 0, the others uniform and
/// independent, drawn in cluster order.
pub fn color_clusters<R: Rng + ?Sized>(partition: &ClusterPartition, q: usize, rng: &mut R) -> SpinConfig {
    let n = partition.labels.len();
    let mut spins = vec![0; n];
    for cluster in partition.clusters() {
        let s = rng.gen_range(0..q);
        for &v in cluster {
            spins[v] = s;
        }
    }
    SpinConfig::from_raw(spins)
}

pub fn sample_spins<R: Rng + ?Sized>(aug: &AugmentedGraph, omega: &BondConfig, rng: &mut R) -> SpinConfig {
    color_clusters(&clusters(aug, omega), aug.q(), rng)
}

/// `sum_omega phi(omega) P(sigma | omega)` for every spin configuration,
/// indexed lexicographically as in [`crate::model::spin_distribution`].
pub fn coupled_spin_marginal(aug: &AugmentedGraph, cap: Cap) -> Result<Vec<f64>> {
    let n = aug.num_vertices();
    let q = aug.q();
    let n_states = cap.admit(q, n)? as usize;
    let total = cap.admit(2, aug.num_bonds())?;
    let mut uf = UnionFind::new(n + 1);
    let mut marginal = vec![KahanSum::new(); n_states];
    let mut z = KahanSum::new();
    let mut colors = Vec::new();
    let mut spins = vec![0usize; n];
    for mask in 0..total {
        let omega = BondConfig::from_index(mask, aug.num_bonds());
        let partition = clusters_with(aug, &omega, &mut uf);
        let w = rc_weight(aug, &omega, &partition);
        if w == 0.0 {
            continue;
        }
        z.add(w);
        let k = partition.k();
        let share = w / (q as f64).powi(k as i32);
        colors.clear();
        colors.resize(k, 0usize);
        loop {
            spins.iter_mut().for_each(|s| *s = 0);
            for (cluster, &c) in partition.clusters().iter().zip(&colors) {
                for &v in cluster {
                    spins[v] = c;
                }
            }
            let idx = spins.iter().fold(0usize, |acc, &s| acc * q + s);
            marginal[idx].add(share);
            // next coloring
            let mut r = 0;
            while r < k {
                colors[r] += 1;
                if colors[r] < q {
                    break;
                }
                colors[r] = 0;
                r += 1;
            }
            if r == k {
                break;
            }
        }
    }
    let z = z.value();
    Ok(marginal.iter().map(|m| m.value() / z).collect())
}

/// Evaluates `E(prod_i f_i(sigma)^{R_i} | omega)` for a fixed factor list.
///
/// On a cluster `A` the spin is uniform, so the cluster contributes the
/// mixed moment `(1/q) sum_x prod_i f_i(x)^{|R_i cap A|}`; the ghost cluster
/// contributes `prod_i f_i(0)^{|R_i cap A_g|}`. When every factor uses the
/// same function the mixed moment is `S_m / q` with `m` the total count,
/// read from a precomputed moment table.
pub struct ConditionalEvaluator {
    factors: Vec<Factor>,
    table: Option<MomentTable>,
    q: usize,
}

impl ConditionalEvaluator {
    pub fn new(factors: &[Factor], q: usize) -> Self {
        let table = match factors.split_first() {
            Some((first, rest)) if rest.iter().all(|(f, _)| f == &first.0) => {
                let total = factors.iter().map(|(_, r)| r.len()).sum();
                Some(moments(&first.0, total))
            }
            _ => None,
        };
        ConditionalEvaluator { factors: factors.to_vec(), table, q }
    }

    pub fn eval(&self, partition: &ClusterPartition) -> Complex64 {
        self.eval_inner(partition, true)
    }

    fn eval_inner(&self, partition: &ClusterPartition, with_ghost: bool) -> Complex64 {
        let n_factors = self.factors.len();
        let k = partition.k();
        // counts[r * n_factors + i] = |R_i cap A_r|; ghost counts separately
        let mut counts = vec![0u32; k * n_factors];
        let mut ghost_counts = vec![0u32; n_factors];
        for (i, (_, region)) in self.factors.iter().enumerate() {
            for &v in region.vertices() {
                match partition.label(v) {
                    ClusterLabel::Ghost => ghost_counts[i] += 1,
                    ClusterLabel::Free(r) => counts[r * n_factors + i] += 1,
                }
            }
        }
        let mut value = Complex64::new(1.0, 0.0);
        if with_ghost {
            for ((f, _), &c) in self.factors.iter().zip(&ghost_counts) {
                if c > 0 {
                    value *= f.at(0).powu(c);
                }
            }
        }
        for r in 0..k {
            let cluster_counts = &counts[r * n_factors..(r + 1) * n_factors];
            let total: u32 = cluster_counts.iter().sum();
            if total == 0 {
                continue;
            }
            value *= match &self.table {
                Some(table) => table.mean(total as usize),
                None => self.mixed_mean(cluster_counts),
            };
        }
        value
    }

    fn mixed_mean(&self, counts: &[u32]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for x in 0..self.q {
            let mut term = Complex64::new(1.0, 0.0);
            for ((f, _), &c) in self.factors.iter().zip(counts) {
                if c > 0 {
                    term *= f.at(x).powu(c);
                }
            }
            acc += term;
        }
        acc / self.q as f64
    }
}

/// `E(prod_i f_i(sigma)^{R_i} | omega)`. For a single factor this is
/// `g_R(omega) = f(0)^{|R cap A_g|} prod_r S_{|R cap A_r|} / q`.
pub fn conditional_expectation(aug: &AugmentedGraph, omega: &BondConfig, factors: &[Factor]) -> Complex64 {
    ConditionalEvaluator::new(factors, aug.q()).eval(&clusters(aug, omega))
}

/// `F_0(omega) = f_0(0)^{|R cap A_g|} prod_r E f_0(X)^{|R cap A_r|}`.
pub fn f0_term(aug: &AugmentedGraph, omega: &BondConfig, f0: &SpinFunction, r: &Region) -> Complex64 {
    conditional_expectation(aug, omega, &[(f0.clone(), r.clone())])
}

/// `F_1(omega) = prod_r E f_1(X)^{|S cap A_r|}` over the non-ghost clusters
/// only; no factor for `S cap A_g`.
pub fn f1_term(aug: &AugmentedGraph, omega: &BondConfig, f1: &SpinFunction, s: &Region) -> Complex64 {
    ConditionalEvaluator::new(&[(f1.clone(), s.clone())], aug.q()).eval_inner(&clusters(aug, omega), false)
}

/// `1` iff no open path joins `S` to `R` or to the ghost.
pub fn event_z(aug: &AugmentedGraph, omega: &BondConfig, r: &Region, s: &Region) -> bool {
    let partition = clusters(aug, omega);
    s.vertices().iter().all(|&sv| match partition.label(sv) {
        ClusterLabel::Ghost => false,
        label => r.vertices().iter().all(|&rv| partition.label(rv) != label),
    })
}

/// `phi(E(prod_i f_i^{R_i} | omega))`, the random-cluster side of the
/// coupling identity.
pub fn rc_expectation(aug: &AugmentedGraph, factors: &[Factor], cap: Cap) -> Result<Complex64> {
    check_factors(aug.base(), factors)?;
    let evaluator = ConditionalEvaluator::new(factors, aug.q());
    let sums = bond_sums(aug, cap, 1, |_, partition, _, out| {
        out[0] = evaluator.eval(partition);
    })?;
    Ok(sums.sums[0] / sums.z)
}

/// `(1/2) sum |a - b|`.
pub fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let s: KahanSum = a.iter().zip(b).map(|(x, y)| (x - y).abs()).collect();
    0.5 * s.value()
}
