//! Degree-preserving double edge swaps that steer out/out assortativity.
//!
//! For two directed edge instances `a→b` and `c→d` the only re-pairing that
//! keeps every in- and out-degree is `a→d`, `c→b`. With `k` the out-degree,
//! the swap changes `Σ k_source·k_target` by `(k_a − k_c)(k_d − k_b)` and
//! leaves all marginal sums alone, so the sign of that product is the sign of
//! the change in `r`. Taking the swap only when it points toward the target is
//! the directed counterpart of ordering the four endpoints by degree and
//! pairing ends (assortative) or crossing them (disassortative).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{AssortativitySums, DirectedMultigraph};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewireConfig {
    pub r_target: f64,
    pub tolerance: f64,
    pub max_steps: u64,
    pub seed: u64,
}

impl RewireConfig {
    pub const DEFAULT_TOLERANCE: f64 = 0.005;
    pub const DEFAULT_MAX_STEPS: u64 = 10_000_000;

    pub fn new(r_target: f64, seed: u64) -> Self {
        Self {
            r_target,
            tolerance: Self::DEFAULT_TOLERANCE,
            max_steps: Self::DEFAULT_MAX_STEPS,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r_target > -1.0 && self.r_target < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "r_target must lie in (-1, 1), got {}",
                self.r_target
            )));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidConfig("max_steps must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct RewireOutcome {
    pub graph: DirectedMultigraph,
    pub achieved_r: f64,
    pub steps_used: u64,
}

/// Change in `Σ k_source·k_target` if `a→b`, `c→d` becomes `a→d`, `c→b`.
pub fn swap_delta_degrees(k_a: u64, k_b: u64, k_c: u64, k_d: u64) -> i128 {
    (k_a as i128 - k_c as i128) * (k_d as i128 - k_b as i128)
}

/// [`swap_delta_degrees`] with out-degrees read from `graph`.
pub fn swap_delta(graph: &DirectedMultigraph, e1: (usize, usize), e2: (usize, usize)) -> f64 {
    let (a, b) = e1;
    let (c, d) = e2;
    swap_delta_degrees(
        graph.out_degree(a),
        graph.out_degree(b),
        graph.out_degree(c),
        graph.out_degree(d),
    ) as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepOutcome {
    Accepted { r: f64 },
    Rejected,
}

/// Mutable edge-instance view of a graph under rewiring.
///
/// `r` is held as an exact integer covariance numerator over a fixed
/// denominator; swaps only touch the numerator.
#[derive(Debug, Clone)]
pub struct Rewirer {
    node_count: usize,
    instances: Vec<(usize, usize)>,
    out_degree: Vec<u64>,
    sums: AssortativitySums,
    denom: f64,
    accepted: u64,
}

impl Rewirer {
    pub fn new(graph: &DirectedMultigraph) -> Result<Self> {
        if graph.total_weight() < 2 {
            return Err(Error::InvalidGraph("rewiring needs at least 2 edge instances".into()));
        }
        let sums = AssortativitySums::from_graph(graph);
        sums.coefficient()?;
        let (vx, vy) = sums.variance_numerators();
        Ok(Self {
            node_count: graph.node_count(),
            instances: graph.edge_instances(),
            out_degree: graph.degrees().out_degree.clone(),
            sums,
            denom: (vx as f64).sqrt() * (vy as f64).sqrt(),
            accepted: 0,
        })
    }

    fn r_from_sum_xy(&self, sum_xy: i128) -> f64 {
        let cov = self.sums.m * sum_xy - self.sums.sum_x * self.sums.sum_y;
        (cov as f64 / self.denom).clamp(-1.0, 1.0)
    }

    pub fn current_r(&self) -> f64 {
        self.r_from_sum_xy(self.sums.sum_xy)
    }

    /// Rebuilds the graph and computes `r` from scratch.
    pub fn recompute_r(&self) -> Result<f64> {
        self.to_graph()?.assortativity()
    }

    pub fn accepted_swaps(&self) -> u64 {
        self.accepted
    }

    pub fn instances(&self) -> &[(usize, usize)] {
        &self.instances
    }

    pub fn delta_at(&self, i: usize, j: usize) -> i128 {
        let (a, b) = self.instances[i];
        let (c, d) = self.instances[j];
        let k = &self.out_degree;
        swap_delta_degrees(k[a], k[b], k[c], k[d])
    }

    /// Swaps the targets of instances `i` and `j` unconditionally. Returns
    /// `false` (leaving the state untouched) if that would create a self-loop.
    pub fn apply(&mut self, i: usize, j: usize) -> bool {
        let (a, b) = self.instances[i];
        let (c, d) = self.instances[j];
        if a == d || c == b {
            return false;
        }
        self.sums.sum_xy += self.delta_at(i, j);
        self.instances[i] = (a, d);
        self.instances[j] = (c, b);
        self.accepted += 1;
        true
    }

    /// Draws two distinct instances uniformly and swaps them if that moves `r`
    /// strictly closer to `target` without creating a self-loop.
    pub fn step_toward<R: Rng + ?Sized>(&mut self, target: f64, rng: &mut R) -> StepOutcome {
        let m = self.instances.len();
        let i = rng.random_range(0..m);
        let mut j = rng.random_range(0..m - 1);
        if j >= i {
            j += 1;
        }
        let delta = self.delta_at(i, j);
        let r = self.current_r();
        let wanted = if r < target { delta > 0 } else { delta < 0 };
        if !wanted {
            return StepOutcome::Rejected;
        }
        let r_new = self.r_from_sum_xy(self.sums.sum_xy + delta);
        if (r_new - target).abs() >= (r - target).abs() {
            return StepOutcome::Rejected;
        }
        if self.apply(i, j) {
            StepOutcome::Accepted { r: r_new }
        } else {
            StepOutcome::Rejected
        }
    }

    pub fn to_graph(&self) -> Result<DirectedMultigraph> {
        DirectedMultigraph::from_instances(self.node_count, self.instances.iter().copied())
    }
}

/// Swaps until `|r − r_target| ≤ tolerance` or `max_steps` proposals are
/// spent.
pub fn rewire_to_target<R: Rng + ?Sized>(
    graph: &DirectedMultigraph,
    config: &RewireConfig,
    rng: &mut R,
) -> Result<RewireOutcome> {
    config.validate()?;
    let mut rewirer = Rewirer::new(graph)?;
    let target = config.r_target;
    let mut steps = 0u64;
    loop {
        let r = rewirer.current_r();
        if (r - target).abs() <= config.tolerance {
            let graph = if rewirer.accepted_swaps() == 0 {
                graph.clone()
            } else {
                rewirer.to_graph()?
            };
            return Ok(RewireOutcome { graph, achieved_r: r, steps_used: steps });
        }
        if steps >= config.max_steps {
            return Err(Error::TargetUnreachable { target, best_r: r, steps });
        }
        rewirer.step_toward(target, rng);
        steps += 1;
    }
}

/// [`rewire_to_target`] with an RNG seeded from `config.seed`.
pub fn rewire_seeded(graph: &DirectedMultigraph, config: &RewireConfig) -> Result<RewireOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rewire_to_target(graph, config, &mut rng)
}
