//! Monte Carlo ensembles. Run `i` is seeded with `derive_seed(master, i)`,
//! so the summary is the same whichever way the runs are scheduled.

use serde::{Deserialize, Serialize};

use super::{ContactStructure, Intervention, SimError, SimParams, Simulator};

/// SplitMix64 finalizer over the master seed and run index.
pub fn derive_seed(master: u64, run: u64) -> u64 {
    let mut z = master.wrapping_add(run.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunCounts {
    pub infected: u64,
    pub dead: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    pub sum: u64,
    pub mean: f64,
    /// Population variance.
    pub variance: f64,
    pub min: u64,
    pub max: u64,
    pub median: f64,
    pub q05: f64,
    pub q25: f64,
    pub q75: f64,
    pub q95: f64,
}

impl Distribution {
    fn from_values(mut values: Vec<u64>) -> Self {
        values.sort_unstable();
        let n = values.len() as u128;
        let sum: u128 = values.iter().map(|&v| v as u128).sum();
        let sum_sq: u128 = values.iter().map(|&v| (v as u128) * (v as u128)).sum();
        // n * sum_sq - sum^2 is exact and non-negative
        let variance = (n * sum_sq - sum * sum) as f64 / (n * n) as f64;
        Distribution {
            sum: sum as u64,
            mean: sum as f64 / n as f64,
            variance,
            min: values[0],
            max: values[values.len() - 1],
            median: quantile(&values, 0.5),
            q05: quantile(&values, 0.05),
            q25: quantile(&values, 0.25),
            q75: quantile(&values, 0.75),
            q95: quantile(&values, 0.95),
        }
    }
}

/// Linear interpolation between closest ranks.
fn quantile(sorted: &[u64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] as f64 + (h - lo as f64) * (sorted[hi] as f64 - sorted[lo] as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub runs: u64,
    pub master_seed: u64,
    pub total_infected: Distribution,
    pub total_dead: Distribution,
    /// Total deaths over total infections across all runs.
    pub dead_fraction: f64,
}

impl EnsembleSummary {
    fn from_counts(master_seed: u64, counts: &[RunCounts]) -> Self {
        let infected = Distribution::from_values(counts.iter().map(|c| c.infected).collect());
        let dead = Distribution::from_values(counts.iter().map(|c| c.dead).collect());
        EnsembleSummary {
            runs: counts.len() as u64,
            master_seed,
            dead_fraction: dead.sum as f64 / infected.sum as f64,
            total_infected: infected,
            total_dead: dead,
        }
    }
}

fn prepare(
    contacts: &ContactStructure,
    params: &SimParams,
    seed_person: &str,
    interventions: &[Intervention],
    n_runs: usize,
) -> Result<Simulator, SimError> {
    if n_runs == 0 {
        return Err(SimError::InvalidParams("n_runs must be at least 1".into()));
    }
    Simulator::new(contacts, params, seed_person, interventions)
}

fn one(sim: &Simulator, master_seed: u64, run: usize) -> RunCounts {
    let r = sim.run(derive_seed(master_seed, run as u64));
    RunCounts {
        infected: r.total_infected,
        dead: r.total_dead,
    }
}

pub fn ensemble_sequential(
    contacts: &ContactStructure,
    params: &SimParams,
    seed_person: &str,
    interventions: &[Intervention],
    n_runs: usize,
    master_seed: u64,
) -> Result<EnsembleSummary, SimError> {
    let sim = prepare(contacts, params, seed_person, interventions, n_runs)?;
    let counts: Vec<RunCounts> = (0..n_runs).map(|i| one(&sim, master_seed, i)).collect();
    Ok(EnsembleSummary::from_counts(master_seed, &counts))
}

#[cfg(feature = "parallel")]
pub fn ensemble_parallel(
    contacts: &ContactStructure,
    params: &SimParams,
    seed_person: &str,
    interventions: &[Intervention],
    n_runs: usize,
    master_seed: u64,
) -> Result<EnsembleSummary, SimError> {
    use rayon::prelude::*;
    let sim = prepare(contacts, params, seed_person, interventions, n_runs)?;
    let counts: Vec<RunCounts> = (0..n_runs)
        .into_par_iter()
        .map(|i| one(&sim, master_seed, i))
        .collect();
    Ok(EnsembleSummary::from_counts(master_seed, &counts))
}

/// Parallel when the `parallel` feature is on, sequential otherwise.
pub fn ensemble(
    contacts: &ContactStructure,
    params: &SimParams,
    seed_person: &str,
    interventions: &[Intervention],
    n_runs: usize,
    master_seed: u64,
) -> Result<EnsembleSummary, SimError> {
    #[cfg(feature = "parallel")]
    return ensemble_parallel(contacts, params, seed_person, interventions, n_runs, master_seed);
    #[cfg(not(feature = "parallel"))]
    return ensemble_sequential(contacts, params, seed_person, interventions, n_runs, master_seed);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::simulate;

    fn params(prob: f64) -> SimParams {
        SimParams {
            per_contact_transmission_prob: prob,
            cfr: 0.5,
            ..SimParams::default()
        }
    }

    #[test]
    fn single_run_matches_simulate() {
        let c = ContactStructure::complete(5);
        let s = ensemble(&c, &params(0.2), "p000", &[], 1, 99).unwrap();
        let r = simulate(&c, &params(0.2), "p000", &[], derive_seed(99, 0)).unwrap();
        assert_eq!(s.total_infected.mean, r.total_infected as f64);
        assert_eq!(s.total_infected.median, r.total_infected as f64);
        assert_eq!(s.total_dead.sum, r.total_dead);
        assert_eq!(s.total_infected.variance, 0.0);
    }

    #[test]
    fn zero_probability_has_no_spread() {
        let c = ContactStructure::complete(5);
        let s = ensemble(&c, &params(0.0), "p000", &[], 200, 1).unwrap();
        assert_eq!(s.total_infected.mean, 1.0);
        assert_eq!(s.total_infected.variance, 0.0);
    }

    #[test]
    fn zero_runs_rejected() {
        let c = ContactStructure::complete(2);
        assert!(matches!(
            ensemble(&c, &params(0.5), "p000", &[], 0, 1),
            Err(SimError::InvalidParams(_))
        ));
    }

    #[cfg(feature = "parallel")]
    #[test]
    fn parallel_equals_sequential() {
        let c = ContactStructure::complete(8);
        let a = ensemble_sequential(&c, &params(0.05), "p000", &[], 500, 42).unwrap();
        let b = ensemble_parallel(&c, &params(0.05), "p000", &[], 500, 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn quantiles_interpolate() {
        assert_eq!(quantile(&[1, 2, 3, 4], 0.5), 2.5);
        assert_eq!(quantile(&[7], 0.95), 7.0);
        assert_eq!(quantile(&[0, 10], 0.25), 2.5);
    }

    #[test]
    fn seeds_differ_per_run() {
        let seeds: std::collections::HashSet<u64> = (0..1000).map(|i| derive_seed(5, i)).collect();
        assert_eq!(seeds.len(), 1000);
    }
}
