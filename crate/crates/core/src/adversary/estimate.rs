//! Monte-Carlo estimators over independent engine runs.

use serde::{Deserialize, Serialize};

use super::distinguisher::{distinguish_graph, distinguisher_threshold, extract_block_count};
use crate::engine::{run_sequence_with, EngineKind};
use crate::error::{Error, Result};
use crate::graph::{build_access_graph, AccessGraph};
use crate::model::{InputSequence, OramConfig};
use crate::partition::greedy_dense_partition;
use crate::seed::{derive_seed, rng_from_seed, stream};
use crate::server::{AccessSequence, Recording};
use crate::trials::run_trials;
use crate::workload::{gen_alternating_sequence, gen_write_read_blocks};

/// Callback handed every trace an estimator produces, with its graph.
pub type TraceObserver<'a> = &'a (dyn Fn(&AccessSequence, &AccessGraph) + Sync);

fn ignore(_: &AccessSequence, _: &AccessGraph) {}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdvantageEstimate {
    pub trials: usize,
    pub p1_on_y: f64,
    pub p1_on_yprime: f64,
    pub advantage: f64,
    /// 95% normal-approximation half-width, never below `1 / trials`.
    pub half_width: f64,
}

/// Address trace of one engine run.
pub fn simulate_trace(
    engine: EngineKind,
    config: &OramConfig,
    y: &InputSequence,
    seed: u64,
) -> Result<AccessSequence> {
    Ok(
        run_sequence_with(engine, config, y, seed, Recording::AddressesOnly)?
            .server
            .into_adversary_view(),
    )
}

/// Runs `engine` `trials` times on each of `y` and `y_prime` and applies
/// the distinguisher to every trace.
///
/// Trial `t` uses the same engine seed and the same distinguisher coin for
/// both inputs. Each frequency keeps its distribution; pairing them only
/// removes sampling noise that the two inputs would otherwise not share.
pub fn estimate_advantage(
    engine: EngineKind,
    config: &OramConfig,
    y: &InputSequence,
    y_prime: &InputSequence,
    trials: usize,
    seed: u64,
) -> Result<AdvantageEstimate> {
    estimate_advantage_observed(engine, config, y, y_prime, trials, seed, &ignore)
}

/// [`estimate_advantage`], passing every trace to `observe`.
pub fn estimate_advantage_observed(
    engine: EngineKind,
    config: &OramConfig,
    y: &InputSequence,
    y_prime: &InputSequence,
    trials: usize,
    seed: u64,
    observe: TraceObserver<'_>,
) -> Result<AdvantageEstimate> {
    if trials == 0 {
        return Err(Error::Argument("trials must be at least 1".into()));
    }
    let n = y.len();
    if y_prime.len() != n {
        return Err(Error::Argument(format!(
            "inputs differ in length: {n} vs {}",
            y_prime.len()
        )));
    }
    let k = extract_block_count(y_prime)?;
    let ones = run_trials(trials, |t| {
        let engine_seed = derive_seed(seed, t as u64, stream::ENGINE);
        let coin_seed = derive_seed(seed, t as u64, stream::COIN);
        let guess = |input: &InputSequence| -> Result<bool> {
            let trace = simulate_trace(engine, config, input, engine_seed)?;
            let g = build_access_graph(&trace)?;
            observe(&trace, &g);
            let v = distinguish_graph(n, k, &g, &mut rng_from_seed(coin_seed))?;
            Ok(v.guess == 1)
        };
        Ok((guess(y)?, guess(y_prime)?))
    })?;
    let count = |pick: fn(&(bool, bool)) -> bool| ones.iter().filter(|x| pick(x)).count();
    let p1 = count(|x| x.0) as f64 / trials as f64;
    let p2 = count(|x| x.1) as f64 / trials as f64;
    let t = trials as f64;
    let se = (p1 * (1.0 - p1) / t + p2 * (1.0 - p2) / t).sqrt();
    Ok(AdvantageEstimate {
        trials,
        p1_on_y: p1,
        p1_on_yprime: p2,
        advantage: (p1 - p2).abs(),
        half_width: (1.96 * se).max(1.0 / t),
    })
}

/// Which inputs [`dense_partition_frequency_on`] feeds the engine.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrequencyWorkload {
    /// A fresh block workload with `k` pairs per trial.
    Blocks,
    /// The alternating sequence, as a negative control.
    Alternating,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyEstimate {
    pub n: usize,
    pub k: usize,
    pub trials: usize,
    pub hits: usize,
    pub frequency: f64,
    /// Density threshold `n / 5k`, as `numerator/denominator`.
    pub threshold: String,
}

/// Fraction of trials whose access graph has an `(n/5k)`-dense
/// `k`-partition, each trial on a fresh block workload and a fresh engine.
pub fn dense_partition_frequency(
    engine: EngineKind,
    config: &OramConfig,
    n: usize,
    k: usize,
    trials: usize,
    seed: u64,
) -> Result<FrequencyEstimate> {
    dense_partition_frequency_on(
        engine,
        config,
        FrequencyWorkload::Blocks,
        n,
        k,
        trials,
        seed,
    )
}

pub fn dense_partition_frequency_on(
    engine: EngineKind,
    config: &OramConfig,
    workload: FrequencyWorkload,
    n: usize,
    k: usize,
    trials: usize,
    seed: u64,
) -> Result<FrequencyEstimate> {
    dense_partition_frequency_observed(engine, config, workload, n, k, trials, seed, &ignore)
}

/// [`dense_partition_frequency_on`], passing every trace to `observe`.
#[allow(clippy::too_many_arguments)]
pub fn dense_partition_frequency_observed(
    engine: EngineKind,
    config: &OramConfig,
    workload: FrequencyWorkload,
    n: usize,
    k: usize,
    trials: usize,
    seed: u64,
    observe: TraceObserver<'_>,
) -> Result<FrequencyEstimate> {
    if trials == 0 {
        return Err(Error::Argument("trials must be at least 1".into()));
    }
    // validates n and k even for the alternating control
    crate::workload::BlockLayout::new(n, k)?;
    let threshold = distinguisher_threshold(n, k);
    let hits = run_trials(trials, |t| {
        let y = match workload {
            FrequencyWorkload::Blocks => {
                let mut rng = rng_from_seed(derive_seed(seed, t as u64, stream::WORKLOAD));
                gen_write_read_blocks(n, k, config.w, &mut rng)?.0
            }
            FrequencyWorkload::Alternating => gen_alternating_sequence(n)?,
        };
        let trace = simulate_trace(
            engine,
            config,
            &y,
            derive_seed(seed, t as u64, stream::ENGINE),
        )?;
        let g = build_access_graph(&trace)?;
        observe(&trace, &g);
        Ok(greedy_dense_partition(&g, k, &threshold).is_some())
    })?
    .into_iter()
    .filter(|&hit| hit)
    .count();
    Ok(FrequencyEstimate {
        n,
        k,
        trials,
        hits,
        frequency: hits as f64 / trials as f64,
        threshold: threshold.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::brute_force_dense_partition;

    fn cfg(range: u64) -> OramConfig {
        OramConfig::new(1, range, 32).unwrap()
    }

    fn blocks(n: usize, k: usize) -> InputSequence {
        gen_write_read_blocks(n, k, 32, &mut rng_from_seed(17))
            .unwrap()
            .0
    }

    #[test]
    fn zero_trials_rejected() {
        let y = gen_alternating_sequence(8).unwrap();
        assert!(
            estimate_advantage(EngineKind::Passthrough, &cfg(8), &y, &blocks(8, 2), 0, 0).is_err()
        );
        assert!(dense_partition_frequency(EngineKind::Passthrough, &cfg(8), 8, 2, 0, 0).is_err());
    }

    #[test]
    fn identical_inputs_have_no_advantage() {
        let yp = blocks(40, 2);
        for engine in [
            EngineKind::Passthrough,
            EngineKind::TreeOram,
            EngineKind::DummyLengthEncoder,
        ] {
            let est = estimate_advantage(engine, &cfg(40), &yp, &yp, 200, 3).unwrap();
            assert_eq!(est.advantage, 0.0, "{engine}");
        }
    }

    #[test]
    fn passthrough_leaks() {
        let y = gen_alternating_sequence(40).unwrap();
        let est = estimate_advantage(
            EngineKind::Passthrough,
            &cfg(40),
            &y,
            &blocks(40, 2),
            1000,
            1,
        )
        .unwrap();
        assert_eq!(est.p1_on_y, 1.0);
        assert!(est.advantage >= 0.15 - est.half_width, "{est:?}");
    }

    #[test]
    fn linear_scan_does_not_leak() {
        let y = gen_alternating_sequence(40).unwrap();
        let est = estimate_advantage(EngineKind::LinearScan, &cfg(40), &y, &blocks(40, 2), 100, 1)
            .unwrap();
        assert_eq!(est.advantage, 0.0);
        assert!(est.half_width >= 0.01);
    }

    #[test]
    fn frequency_examples() {
        let lin = dense_partition_frequency(EngineKind::LinearScan, &cfg(64), 64, 1, 5, 0).unwrap();
        assert_eq!(lin.frequency, 1.0);
        let pass =
            dense_partition_frequency(EngineKind::Passthrough, &cfg(40), 40, 2, 50, 0).unwrap();
        assert_eq!(pass.frequency, 1.0);
        let control = dense_partition_frequency_on(
            EngineKind::Passthrough,
            &cfg(40),
            FrequencyWorkload::Alternating,
            40,
            2,
            50,
            0,
        )
        .unwrap();
        assert_eq!(control.frequency, 0.0);
        assert_eq!(control.threshold, "4");
    }

    #[test]
    fn linear_scan_single_trial_confirmed_exhaustively() {
        // n = 4 keeps the LinearScan trace at 2 * 4 * 4 = 32 probes; check
        // the unit density on a short prefix the brute force can handle
        let y = blocks(4, 1);
        let trace = simulate_trace(EngineKind::LinearScan, &cfg(4), &y, 0).unwrap();
        let prefix = AccessSequence::new(trace.addrs()[..16].to_vec());
        let g = build_access_graph(&prefix).unwrap();
        let ell = distinguisher_threshold(4, 1);
        assert_eq!(
            brute_force_dense_partition(&g, 1, &ell).unwrap().is_some(),
            greedy_dense_partition(&g, 1, &ell).is_some()
        );
        let full = build_access_graph(&trace).unwrap();
        assert!(greedy_dense_partition(&full, 1, &ell).is_some());
    }
}
