//! Random substrate: power-law out-degrees, constant in-degree, stub matching.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Zipf};

use crate::error::{Error, Result};
use crate::graph::DirectedMultigraph;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenConfig {
    pub n: usize,
    pub gamma: f64,
    pub k_in: u64,
    pub seed: u64,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self { n: 1000, gamma: 3.0, k_in: 17, seed: 0 }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidConfig(format!("n must be >= 2, got {}", self.n)));
        }
        if !(self.gamma > 1.0) || !self.gamma.is_finite() {
            return Err(Error::InvalidConfig(format!("gamma must be > 1, got {}", self.gamma)));
        }
        if self.k_in == 0 {
            return Err(Error::InvalidConfig("k_in must be >= 1".into()));
        }
        let n = self.n as u64;
        if n * self.k_in > n * (n - 1) {
            return Err(Error::InfeasibleSequence {
                required: n * self.k_in,
                capacity: n * (n - 1),
            });
        }
        Ok(())
    }

    /// Total edge multiplicity every generated graph carries.
    pub fn edge_total(&self) -> u64 {
        self.n as u64 * self.k_in
    }
}

/// Independent draws from `P(k) ∝ k^-gamma` on `1..=n-1`, before any sum
/// repair.
pub fn sample_raw_outdegrees<R: Rng + ?Sized>(config: &GenConfig, rng: &mut R) -> Result<Vec<u64>> {
    config.validate()?;
    let zipf = Zipf::new((config.n - 1) as f64, config.gamma)
        .map_err(|e| Error::InvalidConfig(format!("power-law sampler: {e}")))?;
    Ok((0..config.n).map(|_| zipf.sample(rng) as u64).collect())
}

/// Nudges single random entries by ±1 until the sequence sums to `target`.
/// Entries stay within `0..=max_degree`.
pub fn repair_degree_sum<R: Rng + ?Sized>(
    degrees: &mut [u64],
    target: u64,
    max_degree: u64,
    rng: &mut R,
) -> Result<()> {
    let n = degrees.len() as u64;
    if target > n * max_degree {
        return Err(Error::InfeasibleSequence { required: target, capacity: n * max_degree });
    }
    let mut sum: u64 = degrees.iter().sum();
    while sum != target {
        let i = rng.random_range(0..degrees.len());
        if sum < target {
            if degrees[i] < max_degree {
                degrees[i] += 1;
                sum += 1;
            }
        } else if degrees[i] > 0 {
            degrees[i] -= 1;
            sum -= 1;
        }
    }
    Ok(())
}

/// Power-law out-degree sequence summing to exactly `n * k_in`.
pub fn sample_outdegrees<R: Rng + ?Sized>(config: &GenConfig, rng: &mut R) -> Result<Vec<u64>> {
    let mut degrees = sample_raw_outdegrees(config, rng)?;
    repair_degree_sum(&mut degrees, config.edge_total(), (config.n - 1) as u64, rng)?;
    Ok(degrees)
}

/// Pairs out-stubs with a random permutation of in-stubs, every node
/// receiving `k_in` in-stubs. Self-loop pairings are broken by swapping the
/// in-stub with a random other position; parallel pairings become weights.
pub fn build_configuration_graph<R: Rng + ?Sized>(
    out_degrees: &[u64],
    k_in: u64,
    rng: &mut R,
) -> Result<DirectedMultigraph> {
    let n = out_degrees.len();
    let out_total: u64 = out_degrees.iter().sum();
    let in_total = n as u64 * k_in;
    if out_total != in_total {
        return Err(Error::StubMismatch { out_stubs: out_total, in_stubs: in_total });
    }
    let mut out_stubs = Vec::with_capacity(out_total as usize);
    for (node, &d) in out_degrees.iter().enumerate() {
        out_stubs.extend(std::iter::repeat_n(node, d as usize));
    }
    let mut in_stubs = Vec::with_capacity(in_total as usize);
    for node in 0..n {
        in_stubs.extend(std::iter::repeat_n(node, k_in as usize));
    }
    in_stubs.shuffle(rng);

    let budget = 100 * n as u64;
    let mut attempts = 0u64;
    let m = in_stubs.len();
    for j in 0..m {
        while out_stubs[j] == in_stubs[j] {
            if attempts >= budget {
                return Err(Error::MatchingStuck { attempts });
            }
            attempts += 1;
            let k = rng.random_range(0..m);
            if k != j && out_stubs[j] != in_stubs[k] && out_stubs[k] != in_stubs[j] {
                in_stubs.swap(j, k);
            }
        }
    }
    DirectedMultigraph::from_instances(n, out_stubs.into_iter().zip(in_stubs))
}

/// Full generation from `config.seed`.
pub fn generate(config: &GenConfig) -> Result<DirectedMultigraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    generate_with(config, &mut rng)
}

pub fn generate_with<R: Rng + ?Sized>(config: &GenConfig, rng: &mut R) -> Result<DirectedMultigraph> {
    let degrees = sample_outdegrees(config, rng)?;
    build_configuration_graph(&degrees, config.k_in, rng)
}
