//! SVD-STP and HOSVD-STP decompositions, their reconstructions and error bounds,
//! and factor storage accounting.

mod hosvd;
mod storage;
mod svd_stp;

pub use hosvd::{
    hosvd_error_bound, hosvd_stp, hosvd_stp_with, reconstruct_hosvd, truncated_hosvd_stp,
    truncated_hosvd_stp_with, DecompConfig, HosvdStpFactors, ModeDiagnostics,
};
pub use storage::{storage_cost, thosvd_crossover, StorageKind};
pub use svd_stp::{
    materialize_sigma, reconstruct_svd_stp, svd_stp, svd_stp_error_bound, truncated_svd_stp,
    SvdStpFactors,
};
