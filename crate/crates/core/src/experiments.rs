//! Monte Carlo sweeps over `(r_target, N_th, p)` cells.
//!
//! Every replicate builds its own network, rewires it, draws thresholds and
//! opinions and runs the threshold dynamics to absorption. All randomness in
//! a replicate comes from one ChaCha stream keyed by a seed derived from the
//! master seed and the cell indices, so any cell can be rerun alone and
//! serial and parallel runs agree row for row.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::str::FromStr;

use ordered_float::OrderedFloat;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{self, DEFAULT_MAX_SWEEPS};
use crate::error::{Error, Result};
use crate::netgen::{self, GenConfig};
use crate::rewire::{self, RewireConfig};

pub const DEFAULT_REPLICATES: usize = 50;
pub const DEFAULT_CONSENSUS_BAND: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub n: usize,
    pub gamma: f64,
    pub k_in: u64,
    pub p_values: Vec<f64>,
    pub n_th_values: Vec<usize>,
    pub r_targets: Vec<f64>,
    pub replicates: usize,
    pub master_seed: u64,
    pub max_sweeps: u64,
    pub rewire_tolerance: f64,
    pub rewire_max_steps: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            n: 1000,
            gamma: 3.0,
            k_in: 17,
            p_values: vec![0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8],
            n_th_values: vec![2, 5, 10, 100],
            r_targets: vec![-0.1, 0.0, 0.1],
            replicates: DEFAULT_REPLICATES,
            master_seed: 0,
            max_sweeps: DEFAULT_MAX_SWEEPS,
            rewire_tolerance: RewireConfig::DEFAULT_TOLERANCE,
            rewire_max_steps: RewireConfig::DEFAULT_MAX_STEPS,
        }
    }
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse()
                .map_err(|_| Error::InvalidConfig(format!("bad value {s:?} for {key}")))
        })
        .collect()
}

fn parse_one<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::InvalidConfig(format!("bad value {value:?} for {key}")))
}

impl SweepConfig {
    /// Parses flat `key = value` text. Lists are comma-separated, `#` starts
    /// a comment, unknown keys are rejected and missing keys keep defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::InvalidConfig(format!("line {}: expected key=value", lineno + 1))
            })?;
            let key = key.trim();
            match key {
                "n" => cfg.n = parse_one(key, value)?,
                "gamma" => cfg.gamma = parse_one(key, value)?,
                "k_in" => cfg.k_in = parse_one(key, value)?,
                "p_values" => cfg.p_values = parse_list(key, value)?,
                "n_th_values" => cfg.n_th_values = parse_list(key, value)?,
                "r_targets" => cfg.r_targets = parse_list(key, value)?,
                "replicates" => cfg.replicates = parse_one(key, value)?,
                "master_seed" => cfg.master_seed = parse_one(key, value)?,
                "max_sweeps" => cfg.max_sweeps = parse_one(key, value)?,
                "rewire_tolerance" => cfg.rewire_tolerance = parse_one(key, value)?,
                "rewire_max_steps" => cfg.rewire_max_steps = parse_one(key, value)?,
                other => {
                    return Err(Error::InvalidConfig(format!(
                        "line {}: unknown key {other:?}",
                        lineno + 1
                    )))
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_text(&self) -> String {
        fn join<T: ToString>(v: &[T]) -> String {
            v.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
        }
        format!(
            "n = {}\ngamma = {}\nk_in = {}\np_values = {}\nn_th_values = {}\nr_targets = {}\n\
             replicates = {}\nmaster_seed = {}\nmax_sweeps = {}\nrewire_tolerance = {}\n\
             rewire_max_steps = {}\n",
            self.n,
            self.gamma,
            self.k_in,
            join(&self.p_values),
            join(&self.n_th_values),
            join(&self.r_targets),
            self.replicates,
            self.master_seed,
            self.max_sweeps,
            self.rewire_tolerance,
            self.rewire_max_steps
        )
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_owned()));
        if self.p_values.is_empty() || self.n_th_values.is_empty() || self.r_targets.is_empty() {
            return bad("p_values, n_th_values and r_targets must be nonempty");
        }
        if self.replicates == 0 {
            return bad("replicates must be >= 1");
        }
        if self.max_sweeps == 0 {
            return bad("max_sweeps must be >= 1");
        }
        if let Some(p) = self.p_values.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::InvalidProbability(*p));
        }
        if let Some(&l) = self.n_th_values.iter().find(|&&l| l < 2) {
            return Err(Error::InvalidLevels(l));
        }
        self.gen_config(0).validate()?;
        for &r in &self.r_targets {
            self.rewire_config(r, 0).validate()?;
        }
        Ok(())
    }

    pub fn cell_count(&self) -> usize {
        self.r_targets.len() * self.n_th_values.len() * self.p_values.len() * self.replicates
    }

    fn gen_config(&self, seed: u64) -> GenConfig {
        GenConfig { n: self.n, gamma: self.gamma, k_in: self.k_in, seed }
    }

    fn rewire_config(&self, r_target: f64, seed: u64) -> RewireConfig {
        RewireConfig {
            r_target,
            tolerance: self.rewire_tolerance,
            max_steps: self.rewire_max_steps,
            seed,
        }
    }

    /// Cells in output order: r_target, then n_th, then p, then replicate.
    pub fn cells(&self) -> Vec<CellIndex> {
        let mut out = Vec::with_capacity(self.cell_count());
        for r in 0..self.r_targets.len() {
            for t in 0..self.n_th_values.len() {
                for p in 0..self.p_values.len() {
                    for replicate in 0..self.replicates {
                        out.push(CellIndex { r, n_th: t, p, replicate });
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CellIndex {
    pub r: usize,
    pub n_th: usize,
    pub p: usize,
    pub replicate: usize,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Counter-based child seed: each index is folded in through a SplitMix64
/// round, so the seed depends only on `(master, cell)`.
pub fn derive_seed(master: u64, cell: CellIndex) -> u64 {
    [cell.r, cell.n_th, cell.p, cell.replicate]
        .iter()
        .fold(splitmix64(master), |acc, &i| splitmix64(acc ^ splitmix64(i as u64)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellStatus {
    Ok,
    TargetUnreachable,
    MatchingStuck,
    Failed,
}

/// One replicate. Observables are empty when the cell failed before the
/// dynamics ran; `r_achieved` then holds the best value rewiring reached, if
/// any.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub replicate_seed: u64,
    pub r_target: f64,
    pub r_achieved: Option<f64>,
    pub p: f64,
    pub n_th: usize,
    pub s_bar: Option<f64>,
    pub t_f_sweeps: Option<u64>,
    pub t_f_picks: Option<u64>,
    pub absorbed: Option<bool>,
    pub status: CellStatus,
}

impl ExperimentResult {
    pub fn is_ok(&self) -> bool {
        self.status == CellStatus::Ok
    }
}

/// Runs one replicate end to end.
pub fn run_cell(config: &SweepConfig, cell: CellIndex) -> ExperimentResult {
    let seed = derive_seed(config.master_seed, cell);
    let r_target = config.r_targets[cell.r];
    let p = config.p_values[cell.p];
    let n_th = config.n_th_values[cell.n_th];
    let mut row = ExperimentResult {
        replicate_seed: seed,
        r_target,
        r_achieved: None,
        p,
        n_th,
        s_bar: None,
        t_f_sweeps: None,
        t_f_picks: None,
        absorbed: None,
        status: CellStatus::Ok,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let outcome = netgen::generate_with(&config.gen_config(seed), &mut rng).and_then(|g| {
        rewire::rewire_to_target(&g, &config.rewire_config(r_target, seed), &mut rng)
    });
    let rewired = match outcome {
        Ok(o) => o,
        Err(e) => {
            row.status = match e {
                Error::TargetUnreachable { best_r, .. } => {
                    row.r_achieved = Some(best_r);
                    CellStatus::TargetUnreachable
                }
                Error::MatchingStuck { .. } => CellStatus::MatchingStuck,
                _ => CellStatus::Failed,
            };
            return row;
        }
    };
    row.r_achieved = Some(rewired.achieved_r);
    let graph = rewired.graph;
    let run = dynamics::assign_thresholds(config.n, n_th, &mut rng).and_then(|th| {
        let mut state = dynamics::init_opinions(config.n, p, &mut rng)?;
        dynamics::run_to_fixation(&graph, &mut state, &th, config.max_sweeps, &mut rng)
    });
    match run {
        Ok(rec) => {
            row.s_bar = Some(rec.s_bar);
            row.t_f_sweeps = Some(rec.t_f_sweeps);
            row.t_f_picks = Some(rec.t_f_picks);
            row.absorbed = Some(rec.absorbed);
        }
        Err(_) => row.status = CellStatus::Failed,
    }
    row
}

/// Runs every cell on the rayon pool. Rows come back in cell order.
pub fn run_sweep(config: &SweepConfig) -> Result<Vec<ExperimentResult>> {
    config.validate()?;
    Ok(config.cells().into_par_iter().map(|c| run_cell(config, c)).collect())
}

/// Single-threaded equivalent of [`run_sweep`].
pub fn run_sweep_serial(config: &SweepConfig) -> Result<Vec<ExperimentResult>> {
    config.validate()?;
    Ok(config.cells().into_iter().map(|c| run_cell(config, c)).collect())
}

pub const RESULT_HEADER: [&str; 10] = [
    "replicate_seed",
    "r_target",
    "r_achieved",
    "p",
    "n_th",
    "s_bar",
    "t_f_sweeps",
    "t_f_picks",
    "absorbed",
    "status",
];

pub fn write_results<W: Write>(rows: &[ExperimentResult], writer: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    w.write_record(RESULT_HEADER)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_results<R: Read>(reader: R) -> Result<Vec<ExperimentResult>> {
    let mut rdr = csv::Reader::from_reader(reader);
    rdr.deserialize().map(|r| r.map_err(Error::from)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GroupField {
    RTarget,
    NTh,
    P,
}

impl GroupField {
    pub fn name(self) -> &'static str {
        match self {
            GroupField::RTarget => "r_target",
            GroupField::NTh => "n_th",
            GroupField::P => "p",
        }
    }

    fn value(self, row: &ExperimentResult) -> f64 {
        match self {
            GroupField::RTarget => row.r_target,
            GroupField::NTh => row.n_th as f64,
            GroupField::P => row.p,
        }
    }

    pub fn parse_list(spec: &str) -> Result<Vec<Self>> {
        spec.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| match s {
                "r_target" => Ok(GroupField::RTarget),
                "n_th" => Ok(GroupField::NTh),
                "p" => Ok(GroupField::P),
                other => Err(Error::InvalidConfig(format!("cannot group by {other:?}"))),
            })
            .collect()
    }
}

/// Five-number summary plus mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxStats {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub mean: f64,
}

/// Quantile of sorted data by linear interpolation between order
/// statistics at position `q·(n−1)`.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

impl BoxStats {
    pub fn from_values(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyInput);
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        Ok(Self {
            min: v[0],
            q1: quantile_sorted(&v, 0.25),
            median: quantile_sorted(&v, 0.5),
            q3: quantile_sorted(&v, 0.75),
            max: v[v.len() - 1],
            mean: v.iter().sum::<f64>() / v.len() as f64,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    /// Group field values in the order requested.
    pub key: Vec<f64>,
    pub count: usize,
    pub s_bar: BoxStats,
    pub t_f_sweeps: BoxStats,
    pub consensus_rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub group_by: Vec<GroupField>,
    pub rows: Vec<SummaryRow>,
}

pub fn is_consensus(s_bar: f64, band: f64) -> bool {
    s_bar <= band || s_bar >= 1.0 - band
}

/// Groups the successful rows and summarises `s_bar` and `t_f_sweeps`.
/// Consensus means `s_bar ≤ band` or `s_bar ≥ 1 − band`. Groups are sorted by
/// key.
pub fn summarize(
    results: &[ExperimentResult],
    group_by: &[GroupField],
    band: f64,
) -> Result<Summary> {
    let mut groups: BTreeMap<Vec<OrderedFloat<f64>>, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for row in results.iter().filter(|r| r.is_ok()) {
        let (Some(s), Some(t)) = (row.s_bar, row.t_f_sweeps) else { continue };
        let key = group_by.iter().map(|g| OrderedFloat(g.value(row))).collect();
        let entry = groups.entry(key).or_default();
        entry.0.push(s);
        entry.1.push(t as f64);
    }
    if groups.is_empty() {
        return Err(Error::EmptyInput);
    }
    let rows = groups
        .into_iter()
        .map(|(key, (s, t))| {
            let hits = s.iter().filter(|&&x| is_consensus(x, band)).count();
            Ok(SummaryRow {
                key: key.into_iter().map(|k| k.0).collect(),
                count: s.len(),
                s_bar: BoxStats::from_values(&s)?,
                t_f_sweeps: BoxStats::from_values(&t)?,
                consensus_rate: hits as f64 / s.len() as f64,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Summary { group_by: group_by.to_vec(), rows })
}

impl Summary {
    pub fn find(&self, key: &[f64]) -> Option<&SummaryRow> {
        self.rows.iter().find(|r| r.key == key)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<String> = self.group_by.iter().map(|g| g.name().to_owned()).collect();
        header.push("count".into());
        for metric in ["s_bar", "t_f_sweeps"] {
            for stat in ["min", "q1", "median", "q3", "max", "mean"] {
                header.push(format!("{metric}_{stat}"));
            }
        }
        header.push("consensus_rate".into());
        w.write_record(&header)?;
        for row in &self.rows {
            let mut rec: Vec<String> = row.key.iter().map(|k| k.to_string()).collect();
            rec.push(row.count.to_string());
            for b in [&row.s_bar, &row.t_f_sweeps] {
                for v in [b.min, b.q1, b.median, b.q3, b.max, b.mean] {
                    rec.push(v.to_string());
                }
            }
            rec.push(row.consensus_rate.to_string());
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}
