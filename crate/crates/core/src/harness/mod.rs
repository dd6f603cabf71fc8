//! Experiment orchestration: corpus preparation, the backend protocol and
//! fine-tuning sweeps.

pub mod backend;
pub mod dataset;
pub mod emit;
pub mod sweep;

pub use backend::{Backend, BackendSpec, Command, Done, Job, StubKind};
pub use dataset::{rank_and_select, windows_and_split, Class, DatasetManifest, LabeledImage, ManifestEntry, Split};
pub use emit::emit_results;
pub use sweep::{run_sweep, Aggregate, SweepConfig, SweepResult, SweepRow};
