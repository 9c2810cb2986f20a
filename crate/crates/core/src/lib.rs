pub mod em;
pub mod error;
pub mod estimators;
pub mod gof;
pub mod histogram;
pub mod optimize;
pub mod rate_eq;
pub mod report;
pub mod rng;
pub mod sim;
pub mod snapshot;
pub mod special;
pub mod stats;
pub mod yule;

pub use error::{Error, Result};
pub use histogram::{DegreeDistribution, Histogram, MeanSizeDistribution, SizeDistribution};
pub use snapshot::{GapMask, MembershipEventLog, Month, Snapshot, SnapshotSummary};
pub use yule::{YuleFit, YuleSimon};
