//! Confidence intervals and cross-replication summaries.

use std::collections::{BTreeMap, BTreeSet};

use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::behavior::BehaviorKind;
use crate::error::{EvacError, Result};
use crate::grid::ExitId;
use crate::sim::RunResult;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lower: f64,
    pub mean: f64,
    pub upper: f64,
}

impl Interval {
    pub fn half_width(&self) -> f64 {
        self.upper - self.mean
    }

    pub fn overlaps(&self, other: &Interval) -> bool {
        self.lower <= other.upper && other.lower <= self.upper
    }
}

pub fn mean(samples: &[f64]) -> f64 {
    samples.iter().sum::<f64>() / samples.len() as f64
}

/// Sample standard deviation (n - 1 denominator).
pub fn std_dev(samples: &[f64]) -> f64 {
    let m = mean(samples);
    let ss: f64 = samples.iter().map(|x| (x - m).powi(2)).sum();
    (ss / (samples.len() - 1) as f64).sqrt()
}

/// Two-sided Student-t quantile `t(1 - (1 - level) / 2, df)`.
pub fn t_quantile(level: f64, df: usize) -> f64 {
    let t = StudentsT::new(0.0, 1.0, df as f64).expect("df >= 1");
    t.inverse_cdf(1.0 - (1.0 - level) / 2.0)
}

/// Student-t interval `mean ± t · s / √n`.
pub fn ci(samples: &[f64], level: f64) -> Result<Interval> {
    if samples.len() < 2 {
        return Err(EvacError::TooFewSamples(samples.len()));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(EvacError::InvalidLevel(level));
    }
    let n = samples.len();
    let m = mean(samples);
    let s = std_dev(samples);
    let half = if s == 0.0 {
        0.0
    } else {
        t_quantile(level, n - 1) * s / (n as f64).sqrt()
    };
    Ok(Interval {
        lower: m - half,
        mean: m,
        upper: m + half,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricSummary {
    pub mean: f64,
    pub std_dev: f64,
    pub ci: Interval,
}

impl MetricSummary {
    pub fn from_samples(samples: &[f64]) -> Result<Self> {
        let ci = ci(samples, 0.95)?;
        Ok(Self {
            mean: ci.mean,
            std_dev: std_dev(samples),
            ci,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationStats {
    pub name: String,
    pub replications: usize,
    pub population: usize,
    pub tet: MetricSummary,
    pub met: MetricSummary,
    pub md: MetricSummary,
    pub exits: BTreeMap<ExitId, MetricSummary>,
    /// Per configured behavior and exit. Populated only when more than one
    /// behavior is present.
    pub behavior_exits: BTreeMap<(BehaviorKind, ExitId), MetricSummary>,
    pub trapped: MetricSummary,
}

impl ReplicationStats {
    pub fn is_mixed(&self) -> bool {
        !self.behavior_exits.is_empty()
    }

    /// Mean share of the population that left through `exit`.
    pub fn exit_share(&self, exit: ExitId) -> f64 {
        self.exits.get(&exit).map_or(0.0, |m| m.mean) / self.population.max(1) as f64
    }

    pub fn from_runs(name: &str, exits: &[ExitId], runs: &[RunResult]) -> Result<Self> {
        if runs.len() < 2 {
            return Err(EvacError::TooFewSamples(runs.len()));
        }
        let pick = |f: &dyn Fn(&RunResult) -> f64| -> Result<MetricSummary> {
            MetricSummary::from_samples(&runs.iter().map(f).collect::<Vec<_>>())
        };
        let mut exit_stats = BTreeMap::new();
        for &e in exits {
            exit_stats.insert(e, pick(&|r| r.exit_count(e) as f64)?);
        }
        let behaviors: BTreeSet<BehaviorKind> = runs
            .iter()
            .flat_map(|r| r.per_agent.iter().map(|a| a.behavior))
            .collect();
        let mut behavior_exits = BTreeMap::new();
        if behaviors.len() > 1 {
            for &b in &behaviors {
                for &e in exits {
                    behavior_exits.insert((b, e), pick(&|r| r.behavior_exit_count(b, e) as f64)?);
                }
            }
        }
        Ok(Self {
            name: name.to_string(),
            replications: runs.len(),
            population: runs[0].per_agent.len(),
            tet: pick(&|r| r.tet_seconds)?,
            met: pick(&|r| r.met_seconds)?,
            md: pick(&|r| r.md_meters)?,
            exits: exit_stats,
            behavior_exits,
            trapped: pick(&|r| r.trapped_count as f64)?,
        })
    }
}
