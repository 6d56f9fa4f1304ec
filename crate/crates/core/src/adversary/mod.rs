//! Attacks and estimators run against engine traces.

mod codec;
mod distance;
mod distinguisher;
mod estimate;

pub use codec::{
    alice_encode, bob_decode, payload_checksum, random_payload, CodecContext, TransferMessage,
};
pub use distance::{
    statistical_distance_empirical, statistical_distance_empirical_digests,
    statistical_distance_exact, EmpiricalDistance, ExactDistance, TraceDigest,
};
pub use distinguisher::{
    distinguish, distinguish_graph, distinguish_with_blocks, distinguisher_threshold,
    extract_block_count, DistinguisherVerdict, VerdictReason,
};
pub use estimate::{
    dense_partition_frequency, dense_partition_frequency_observed, dense_partition_frequency_on,
    estimate_advantage, estimate_advantage_observed, simulate_trace, AdvantageEstimate,
    FrequencyEstimate, FrequencyWorkload, TraceObserver,
};
