//! Swendsen-Wang dynamics with ghost bonds.
//!
//! A sweep resamples the bonds given the spins (a real edge opens with
//! probability `p_e` when its endpoints agree, a ghost bond with probability
//! `p_v` when the vertex has spin 0) and then recolors the clusters as in
//! the coupling: the ghost cluster gets spin 0 and every other cluster a
//! uniform spin. Both steps are conditionals of the joint bond-spin measure,
//! so the Potts measure is invariant.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{check_factors, factor_product, Factor, PottsModel, SpinConfig};
use crate::random_cluster::{
    augment, clusters_with, color_clusters, AugmentedGraph, BondConfig, ClusterPartition, ConditionalEvaluator,
};
use crate::sum::{ComplexSum, KahanSum};
use crate::union_find::UnionFind;

pub const BATCHES: usize = 16;

/// Current spins, number of sweeps done, and the chain's random source.
#[derive(Clone, Debug)]
pub struct ChainState {
    spins: Vec<usize>,
    sweeps: u64,
    rng: ChaCha8Rng,
}

impl ChainState {
    /// All spins 0, random stream `stream` of `seed`.
    pub fn new(model: &PottsModel, seed: u64, stream: u64) -> Self {
        Self::from_spins(SpinConfig::from_index(0, model.num_vertices(), model.q()), seed, stream)
    }

    pub fn from_spins(spins: SpinConfig, seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        ChainState { spins: spins.spins().to_vec(), sweeps: 0, rng }
    }

    pub fn spins(&self) -> &[usize] {
        &self.spins
    }

    pub fn sweeps(&self) -> u64 {
        self.sweeps
    }
}

/// A chain together with its scratch buffers.
pub struct SwChain {
    aug: AugmentedGraph,
    state: ChainState,
    uf: UnionFind,
    bonds: BondConfig,
}

impl SwChain {
    pub fn new(model: &PottsModel, seed: u64, stream: u64) -> Self {
        Self::from_state(model, ChainState::new(model, seed, stream))
    }

    pub fn from_state(model: &PottsModel, state: ChainState) -> Self {
        let aug = augment(model);
        let uf = UnionFind::new(aug.num_vertices() + 1);
        let bonds = BondConfig::all_closed(&aug);
        SwChain { aug, state, uf, bonds }
    }

    pub fn state(&self) -> &ChainState {
        &self.state
    }

    /// One bond update followed by one cluster recoloring. Returns the
    /// cluster partition of the sampled bonds.
    pub fn sweep(&mut self) -> ClusterPartition {
        let aug = &self.aug;
        let spins = &self.state.spins;
        let rng = &mut self.state.rng;
        for e in 0..aug.num_bonds() {
            let (a, b) = aug.endpoints(e);
            let agree = if aug.is_ghost_bond(e) { spins[b] == 0 } else { spins[a] == spins[b] };
            let p = aug.probability(e);
            let open = agree && p > 0.0 && rng.gen::<f64>() < p;
            self.bonds.set(e, open);
        }
        let partition = clusters_with(aug, &self.bonds, &mut self.uf);
        let colored = color_clusters(&partition, aug.q(), rng);
        self.state.spins.copy_from_slice(colored.spins());
        self.state.sweeps += 1;
        partition
    }
}

/// One sweep of `state` on `model`.
pub fn sw_sweep(model: &PottsModel, state: ChainState) -> ChainState {
    let mut chain = SwChain::from_state(model, state);
    chain.sweep();
    chain.state
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorMode {
    /// Average the spin observable after each sweep.
    #[default]
    Raw,
    /// Average its conditional expectation given each sweep's bonds.
    RaoBlackwell,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct McConfig {
    pub sweeps: u64,
    pub burn_in: u64,
    pub seed: u64,
    pub mode: EstimatorMode,
}

impl McConfig {
    /// Burn-in of 10% of the sweeps.
    pub fn new(sweeps: u64, seed: u64) -> Self {
        McConfig { sweeps, burn_in: sweeps / 10, seed, mode: EstimatorMode::Raw }
    }

    fn check(&self) -> Result<()> {
        if self.burn_in >= self.sweeps {
            return Err(Error::BadWindow(format!(
                "burn-in {} must be smaller than sweeps {}",
                self.burn_in, self.sweeps
            )));
        }
        if self.sweeps - self.burn_in < BATCHES as u64 {
            return Err(Error::BadWindow(format!(
                "{} recorded sweeps; at least {BATCHES} are needed for batch means",
                self.sweeps - self.burn_in
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: Complex64,
    pub std_error: f64,
    pub effective_samples: f64,
    pub samples: u64,
    pub sweeps: u64,
    pub burn_in: u64,
    pub mode: EstimatorMode,
}

impl Estimate {
    /// Pools chains in the given order: sample-weighted mean, errors added
    /// in quadrature with the same weights.
    pub fn merge(parts: &[Estimate]) -> Option<Estimate> {
        let first = parts.first()?;
        let total: u64 = parts.iter().map(|e| e.samples).sum();
        let n = total as f64;
        let mut mean = ComplexSum::new();
        let mut var = KahanSum::new();
        let mut ess = KahanSum::new();
        for e in parts {
            let w = e.samples as f64 / n;
            mean.add(e.mean * w);
            var.add((w * e.std_error).powi(2));
            ess.add(e.effective_samples);
        }
        Some(Estimate {
            mean: mean.value(),
            std_error: var.value().sqrt(),
            effective_samples: ess.value().min(n),
            samples: total,
            sweeps: parts.iter().map(|e| e.sweeps).sum(),
            burn_in: parts.iter().map(|e| e.burn_in).sum(),
            mode: first.mode,
        })
    }

    /// `|mean - exact| / std_error`, infinite if the error bar is zero and
    /// the mean is off.
    pub fn z_score(&self, exact: Complex64) -> f64 {
        let dev = (self.mean - exact).norm();
        if self.std_error > 0.0 {
            dev / self.std_error
        } else if dev == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

/// Mean with a batch-means standard error over [`BATCHES`] batches.
pub fn batch_means(samples: &[Complex64]) -> (Complex64, f64, f64) {
    let n = samples.len();
    let mut sum = ComplexSum::new();
    for &x in samples {
        sum.add(x);
    }
    let mean = sum.value() / n as f64;

    let naive: KahanSum = samples.iter().map(|x| (x - mean).norm_sqr()).collect();
    let naive_var = naive.value() / (n as f64 - 1.0).max(1.0);

    let size = n / BATCHES;
    let batch: Vec<Complex64> = samples[..size * BATCHES]
        .chunks_exact(size)
        .map(|c| {
            let mut s = ComplexSum::new();
            c.iter().for_each(|&x| s.add(x));
            s.value() / size as f64
        })
        .collect();
    let mut bsum = ComplexSum::new();
    batch.iter().for_each(|&b| bsum.add(b));
    let bmean = bsum.value() / BATCHES as f64;
    let bvar: KahanSum = batch.iter().map(|b| (b - bmean).norm_sqr()).collect();
    let bvar = bvar.value() / (BATCHES as f64 - 1.0);
    let se2 = bvar / BATCHES as f64;
    let ess = if se2 > 0.0 { (naive_var / se2).min(n as f64) } else { n as f64 };
    (mean, se2.sqrt(), ess)
}

/// Time average of `prod_i f_i(sigma)^{R_i}` along one chain started from
/// all spins 0, on random stream 0 of `config.seed`.
pub fn estimate(model: &PottsModel, factors: &[Factor], config: &McConfig) -> Result<Estimate> {
    run_chain(model, factors, config, 0)
}

/// `chains` independent chains on streams `0..chains`, merged in stream
/// order.
pub fn estimate_chains(model: &PottsModel, factors: &[Factor], config: &McConfig, chains: u64) -> Result<Estimate> {
    let parts =
        (0..chains.max(1)).into_par_iter().map(|i| run_chain(model, factors, config, i)).collect::<Result<Vec<_>>>()?;
    Ok(Estimate::merge(&parts).expect("at least one chain"))
}

fn run_chain(model: &PottsModel, factors: &[Factor], config: &McConfig, stream: u64) -> Result<Estimate> {
    config.check()?;
    check_factors(model, factors)?;
    let mut chain = SwChain::new(model, config.seed, stream);
    let evaluator = ConditionalEvaluator::new(factors, model.q());
    let recorded = (config.sweeps - config.burn_in) as usize;
    let mut samples = Vec::with_capacity(recorded);
    for _ in 0..config.burn_in {
        chain.sweep();
    }
    for _ in 0..recorded {
        let partition = chain.sweep();
        samples.push(match config.mode {
            EstimatorMode::Raw => factor_product(factors, chain.state.spins()),
            EstimatorMode::RaoBlackwell => evaluator.eval(&partition),
        });
    }
    let (mean, std_error, effective_samples) = batch_means(&samples);
    Ok(Estimate {
        mean,
        std_error,
        effective_samples,
        samples: recorded as u64,
        sweeps: config.sweeps,
        burn_in: config.burn_in,
        mode: config.mode,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function_classes::{make_family, FamilyKind};
    use crate::model::{Region, SpinFunction};

    #[test]
    fn free_model_sweep_draws_fresh_spins() {
        let model = PottsModel::anonymous(3, 4, &[(0, 1, 0.0)], vec![0.0; 4]).unwrap();
        let mut chain = SwChain::new(&model, 1, 0);
        let mut counts = [0usize; 3];
        for _ in 0..3000 {
            let p = chain.sweep();
            assert_eq!(p.k(), 4);
            counts[chain.state().spins()[0]] += 1;
        }
        assert!(counts.iter().all(|&c| c > 850 && c < 1150), "{counts:?}");
    }

    #[test]
    fn strong_field_pins_all_spins() {
        let model = PottsModel::anonymous(4, 5, &[(0, 1, 0.3)], vec![30.0; 5]).unwrap();
        let mut state = ChainState::new(&model, 3, 0);
        for _ in 0..10 {
            state = sw_sweep(&model, state);
            assert!(state.spins().iter().all(|&s| s == 0));
        }
        assert_eq!(state.sweeps(), 10);

        // a spin away from 0 cannot join the ghost until recolored to 0
        let mut state = ChainState::from_spins(SpinConfig::new(vec![1, 2, 3, 1, 2], 4).unwrap(), 3, 0);
        for _ in 0..200 {
            state = sw_sweep(&model, state);
        }
        assert!(state.spins().iter().all(|&s| s == 0));
    }

    #[test]
    fn frozen_couplings_make_monochrome() {
        let model = PottsModel::anonymous(3, 4, &[(0, 1, 30.0), (1, 2, 30.0), (2, 3, 30.0)], vec![0.0; 4]).unwrap();
        let mut chain = SwChain::new(&model, 5, 0);
        for _ in 0..20 {
            chain.sweep();
            let s = chain.state().spins();
            assert!(s.iter().all(|&x| x == s[0]));
        }
    }

    #[test]
    fn constant_observable_has_zero_error() {
        let model = PottsModel::anonymous(2, 3, &[(0, 1, 0.5), (1, 2, 0.5)], vec![0.1; 3]).unwrap();
        let f = SpinFunction::constant(2, 1.0);
        let est = estimate(&model, &[(f, Region::all(&model))], &McConfig::new(1000, 4)).unwrap();
        assert_eq!(est.mean, Complex64::new(1.0, 0.0));
        assert_eq!(est.std_error, 0.0);
        assert_eq!(est.effective_samples, est.samples as f64);
    }

    #[test]
    fn single_vertex_field() {
        let model = PottsModel::anonymous(3, 1, &[], vec![std::f64::consts::LN_2]).unwrap();
        let factors = [(SpinFunction::indicator(3, 0), Region::all(&model))];
        let est = estimate(&model, &factors, &McConfig::new(100_000, 11)).unwrap();
        assert!(est.z_score(Complex64::new(0.5, 0.0)) < 4.0, "{est:?}");
        assert!(est.effective_samples <= est.samples as f64);
    }

    #[test]
    fn single_edge_family_a() {
        let model = PottsModel::anonymous(2, 2, &[(0, 1, 3f64.ln())], vec![0.0, 0.0]).unwrap();
        let f = make_family(FamilyKind::A, 2, None).unwrap();
        let factors = [(f.clone(), Region::new(&model, vec![0]).unwrap()), (f, Region::new(&model, vec![1]).unwrap())];
        for mode in [EstimatorMode::Raw, EstimatorMode::RaoBlackwell] {
            let config = McConfig { mode, ..McConfig::new(100_000, 2) };
            let est = estimate(&model, &factors, &config).unwrap();
            assert!(est.z_score(Complex64::new(0.125, 0.0)) < 4.0, "{est:?}");
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let model = PottsModel::anonymous(3, 3, &[(0, 1, 0.5), (1, 2, 0.9)], vec![0.2, 0.0, 0.4]).unwrap();
        let f = make_family(FamilyKind::B, 3, None).unwrap();
        let factors = [(f, Region::all(&model))];
        let a = estimate(&model, &factors, &McConfig::new(5000, 77)).unwrap();
        let b = estimate(&model, &factors, &McConfig::new(5000, 77)).unwrap();
        let c = estimate(&model, &factors, &McConfig::new(5000, 78)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.mean, c.mean);
        let pa = estimate_chains(&model, &factors, &McConfig::new(2000, 5), 4).unwrap();
        let pb = estimate_chains(&model, &factors, &McConfig::new(2000, 5), 4).unwrap();
        assert_eq!(pa, pb);
        assert_eq!(pa.samples, 4 * 1800);
    }

    #[test]
    fn bad_windows() {
        let model = PottsModel::anonymous(2, 1, &[], vec![0.0]).unwrap();
        let f = [(SpinFunction::constant(2, 1.0), Region::all(&model))];
        let bad = McConfig { sweeps: 10, burn_in: 10, seed: 0, mode: EstimatorMode::Raw };
        assert!(matches!(estimate(&model, &f, &bad), Err(Error::BadWindow(_))));
        let short = McConfig { sweeps: 20, burn_in: 10, seed: 0, mode: EstimatorMode::Raw };
        assert!(matches!(estimate(&model, &f, &short), Err(Error::BadWindow(_))));
    }

    #[test]
    fn merge_pools_means() {
        let e = |mean: f64, se: f64, n: u64| Estimate {
            mean: Complex64::new(mean, 0.0),
            std_error: se,
            effective_samples: n as f64,
            samples: n,
            sweeps: n,
            burn_in: 0,
            mode: EstimatorMode::Raw,
        };
        let m = Estimate::merge(&[e(1.0, 0.2, 100), e(3.0, 0.2, 300)]).unwrap();
        assert!((m.mean.re - 2.5).abs() < 1e-15);
        assert!((m.std_error - (0.05f64.powi(2) + 0.15f64.powi(2)).sqrt()).abs() < 1e-15);
        assert!(Estimate::merge(&[]).is_none());
    }
}
