//! Distributed online anomaly detection for the physical substrate of a sliced network.
//!
//! Each physical node (PN) is watched by the VNs it hosts, which learn a shared one-class
//! SVM boundary on random Fourier features through consensus ADMM. Each physical link (PL)
//! is watched through the canonical correlation between the VNs at either end of the
//! virtual links crossing it. Both detectors roll back any update whose sample they flag.
//!
//! Runnable entry points, one per capability:
//!
//! ```text
//! cargo run --example rff_kernel            # feature map against the exact kernel
//! cargo run --example ocsvm_consensus       # three agents agreeing on one boundary
//! cargo run --example cca_link_monitor      # T2 alarms on a decorrelated link
//! cargo run --example simulate_scenario     # substrate, SFCs, anomalies, trace export
//! cargo run --example ingest_measurements   # CSV in, detectors over it
//! cargo run --example config_and_reports    # TOML + overrides, report round trip
//! cargo run --release --example detection_bench
//! ```

pub mod cca_online;
pub mod config;
pub mod error;
pub mod harness;
pub mod ocsvm_admm;
pub mod rff;
pub mod slicing_sim;
