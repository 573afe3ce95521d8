//! Answer scoring, run reports and error analysis.

mod metric;
mod report;
mod taxonomy;

pub use metric::{answer_f1, best_alignment, example_score, normalize_span, span_f1, Score, EXACT_ALIGNMENT_LIMIT};
pub use report::{score_run, Prediction, RunMetadata, ScoreError, ScoreReport, TypeScore, UNTYPED};
pub use taxonomy::{error_taxonomy, ErrorReport, ErrorTag, TaggedError};
