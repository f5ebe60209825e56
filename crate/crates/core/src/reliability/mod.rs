//! Reliability of judgments and of the system rankings they produce.

mod agreement;
mod distribution;
mod stability;
mod tau;
mod wilcoxon;

pub use agreement::{
    agreement_table, assessor_precision_recall, cohen_kappa, cohen_kappa_weighted,
    kappa_between, kappa_from_pairs, overlap_between, precision_recall_between,
    relevant_overlap, AgreementAverages, AgreementRecord, AgreementTable, KappaOutcome,
    KappaWeighting, OrientationSample, PrecisionRecall, Ratio,
};
pub use distribution::DistributionSummary;
pub use stability::*;
pub use tau::{kendall_tau, tau_counts, TauCounts, TauSample};
pub use wilcoxon::{
    paired_test, signed_rank_test, WilcoxonMethod, WilcoxonOutcome, EXACT_LIMIT, ZERO_TOLERANCE,
};
