//! Staged annotation pipeline over the `xdoc-core` library: stage
//! configuration, pipeline execution and HTML reports.

pub mod lexicon;
pub mod pipeline;
pub mod report;
pub mod stage;

pub use pipeline::{run_pipeline, DependencyOrderError, PipelineOptions, PipelineSpec, PipelineSummary};
pub use report::{render_report, Audience};
pub use stage::{Processed, Stage, StageKind, StageSpec};
