//! Annotation service: serves instances to annotators in released batches,
//! collects Likert judgments and supports reviewer QC between batches.
//!
//! All state changes are journaled to an append-only JSON-lines log before
//! they are applied, so replaying the log reconstructs the queue exactly.

mod api;
mod clock;
mod error;
mod journal;
mod queue;

pub use api::{router, run_blocking, Shared, SCHEMA_VERSION};
pub use clock::{Clock, ManualClock, SystemClock};
pub use error::ServiceError;
pub use journal::{read_journal, Event, Journal};
pub use queue::{
    AnnotationService, AnnotatorProgress, AnnotatorSnapshot, BatchStatus, LikertOption, Progress,
    QueueSnapshot, Registration, ReviewReport, ReviewRequest, ServedInstance, ServiceConfig,
    StoredRecord, Submission, SubmitAck, TaskQueueEntry, VoidOutcome,
};
