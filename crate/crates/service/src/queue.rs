use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;
use std::sync::Arc;

use chrono::{DateTime, Utc};
use lcp_core::annotations::{
    filter_annotators, AnnotationRecord, InstanceFrequencies, QcConfig, QcReport, LIKERT_SCALE,
};
use lcp_core::corpus::{Genre, Instance, TokenSpan};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::journal::{Event, Journal};
use crate::{Clock, ServiceError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ServiceConfig {
    pub annotations_target: u32,
    pub batch_size: usize,
    pub seed: u64,
    pub qc: QcConfig,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            annotations_target: 20,
            batch_size: 1200,
            seed: 0,
            qc: QcConfig::default(),
        }
    }
}

impl ServiceConfig {
    pub fn validate(&self) -> Result<(), ServiceError> {
        if self.annotations_target == 0 {
            return Err(ServiceError::Validation(
                "annotations_target must be positive".into(),
            ));
        }
        if self.batch_size == 0 {
            return Err(ServiceError::Validation(
                "batch_size must be positive".into(),
            ));
        }
        self.qc
            .validate()
            .map_err(|e| ServiceError::Validation(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskQueueEntry {
    pub instance_id: String,
    pub annotations_collected: u32,
    pub annotations_target: u32,
    pub batch: u32,
    pub open: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Registration {
    pub annotator_id: String,
    pub token: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LikertOption {
    pub value: u8,
    pub label: String,
    pub descriptor: String,
}

impl LikertOption {
    pub fn all() -> Vec<LikertOption> {
        LIKERT_SCALE
            .iter()
            .map(|(value, label, descriptor)| LikertOption {
                value: *value,
                label: label.to_string(),
                descriptor: descriptor.to_string(),
            })
            .collect()
    }
}

/// What an annotator sees: the sentence split around the target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServedInstance {
    pub instance_id: String,
    pub batch: u32,
    pub genre: Genre,
    pub sentence: String,
    pub target: String,
    pub span: TokenSpan,
    /// Byte offsets of the target inside `sentence`.
    pub char_start: usize,
    pub char_end: usize,
    pub before: String,
    pub after: String,
    pub served_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Submission {
    pub token: String,
    pub instance_id: String,
    pub likert: i64,
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubmitAck {
    pub instance_id: String,
    pub annotations_collected: u32,
    pub annotations_target: u32,
    pub closed: bool,
    /// Seconds stored: the smaller of the reported and the measured time.
    pub elapsed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReviewRequest {
    pub force: bool,
    /// Annotator ids to reject in addition to any flagged ones.
    pub reject: Vec<String>,
    /// Reject every annotator the QC screen flags.
    pub reject_flagged: bool,
    pub release_next: bool,
}

impl Default for ReviewRequest {
    fn default() -> Self {
        ReviewRequest {
            force: false,
            reject: Vec::new(),
            reject_flagged: false,
            release_next: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoidOutcome {
    pub annotator_id: String,
    pub records_voided: usize,
    pub entries_reopened: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReviewReport {
    pub batch: u32,
    pub forced: bool,
    pub qc: QcReport,
    pub voided: Vec<VoidOutcome>,
    pub released: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchStatus {
    pub batch: u32,
    pub released: bool,
    pub closed: bool,
    pub n_instances: usize,
    pub n_complete: usize,
    pub n_annotations: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotatorProgress {
    pub annotator_id: String,
    pub submitted: usize,
    pub rejected: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Progress {
    pub annotations_target: u32,
    pub batch_size: usize,
    pub n_instances: usize,
    pub n_complete: usize,
    pub n_annotators: usize,
    pub n_records: usize,
    pub n_voided: usize,
    pub batches: Vec<BatchStatus>,
    pub annotator: Option<AnnotatorProgress>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredRecord {
    pub record: AnnotationRecord,
    pub voided: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotatorSnapshot {
    pub annotator_id: String,
    pub rejected: bool,
    pub served: Vec<String>,
    pub submitted: Vec<String>,
}

/// Complete queue state, used to check that replay is exact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueueSnapshot {
    pub entries: Vec<TaskQueueEntry>,
    pub batches: Vec<BatchStatus>,
    pub annotators: Vec<AnnotatorSnapshot>,
    pub records: Vec<StoredRecord>,
    pub n_serves: u64,
}

#[derive(Debug, Clone, Default)]
struct BatchState {
    released: bool,
    closed: bool,
}

#[derive(Debug, Clone)]
struct AnnotatorState {
    token: String,
    rejected: bool,
    served: BTreeMap<usize, DateTime<Utc>>,
    submitted: BTreeSet<usize>,
}

pub struct AnnotationService {
    config: ServiceConfig,
    instances: Vec<Instance>,
    ranges: Vec<(usize, usize)>,
    index: HashMap<String, usize>,
    collected: Vec<u32>,
    batches: Vec<BatchState>,
    annotators: BTreeMap<String, AnnotatorState>,
    tokens: HashMap<String, String>,
    records: Vec<StoredRecord>,
    n_serves: u64,
    frequencies: Option<InstanceFrequencies>,
    journal: Journal,
    clock: Arc<dyn Clock>,
}

impl std::fmt::Debug for AnnotationService {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AnnotationService")
            .field("instances", &self.instances.len())
            .field("annotators", &self.annotators.len())
            .field("records", &self.records.len())
            .finish()
    }
}

impl AnnotationService {
    /// Fresh in-memory service with the first batch released.
    pub fn new(
        instances: Vec<Instance>,
        config: ServiceConfig,
        frequencies: Option<InstanceFrequencies>,
        clock: Arc<dyn Clock>,
    ) -> Result<Self, ServiceError> {
        Self::with_journal(
            instances,
            config,
            frequencies,
            clock,
            Journal::in_memory(),
            Vec::new(),
        )
    }

    /// Opens or creates a log-backed service, replaying any existing events.
    pub fn open(
        instances: Vec<Instance>,
        config: ServiceConfig,
        frequencies: Option<InstanceFrequencies>,
        clock: Arc<dyn Clock>,
        path: &Path,
    ) -> Result<Self, ServiceError> {
        let (journal, existing) = Journal::open(path)?;
        Self::with_journal(instances, config, frequencies, clock, journal, existing)
    }

    /// Rebuilds a service from an event list without persisting anything.
    pub fn replay(
        instances: Vec<Instance>,
        config: ServiceConfig,
        frequencies: Option<InstanceFrequencies>,
        clock: Arc<dyn Clock>,
        events: &[Event],
    ) -> Result<Self, ServiceError> {
        Self::with_journal(
            instances,
            config,
            frequencies,
            clock,
            Journal::in_memory(),
            events.to_vec(),
        )
    }

    fn with_journal(
        instances: Vec<Instance>,
        config: ServiceConfig,
        frequencies: Option<InstanceFrequencies>,
        clock: Arc<dyn Clock>,
        journal: Journal,
        existing: Vec<Event>,
    ) -> Result<Self, ServiceError> {
        config.validate()?;
        if instances.is_empty() {
            return Err(ServiceError::Validation("no instances to serve".into()));
        }
        let mut index = HashMap::new();
        let mut ranges = Vec::with_capacity(instances.len());
        for (i, inst) in instances.iter().enumerate() {
            if index.insert(inst.id.clone(), i).is_some() {
                return Err(ServiceError::Validation(format!(
                    "duplicate instance id `{}`",
                    inst.id
                )));
            }
            let range = inst.char_range().ok_or_else(|| {
                ServiceError::Validation(format!(
                    "instance `{}` span lies outside its sentence",
                    inst.id
                ))
            })?;
            ranges.push(range);
        }
        let n_batches = instances.len().div_ceil(config.batch_size);
        let mut service = AnnotationService {
            collected: vec![0; instances.len()],
            batches: vec![BatchState::default(); n_batches],
            config,
            instances,
            ranges,
            index,
            annotators: BTreeMap::new(),
            tokens: HashMap::new(),
            records: Vec::new(),
            n_serves: 0,
            frequencies,
            journal,
            clock,
        };
        let source = service
            .journal
            .path()
            .map(Path::to_path_buf)
            .unwrap_or_default();
        let fresh = existing.is_empty();
        for (i, event) in existing.into_iter().enumerate() {
            service
                .apply(&event)
                .map_err(|message| ServiceError::Replay {
                    path: source.clone(),
                    line: i + 1,
                    message,
                })?;
            service.journal.remember(event);
        }
        if fresh {
            let at = service.clock.now();
            service.commit(Event::BatchReleased { batch: 0, at })?;
        }
        Ok(service)
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.config
    }

    pub fn events(&self) -> &[Event] {
        self.journal.events()
    }

    fn batch_of(&self, index: usize) -> u32 {
        (index / self.config.batch_size) as u32
    }

    fn batch_range(&self, batch: u32) -> std::ops::Range<usize> {
        let start = batch as usize * self.config.batch_size;
        start..(start + self.config.batch_size).min(self.instances.len())
    }

    fn is_open(&self, index: usize) -> bool {
        let b = &self.batches[self.batch_of(index) as usize];
        b.released && !b.closed && self.collected[index] < self.config.annotations_target
    }

    fn instance_index(&self, id: &str) -> Result<usize, String> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| format!("unknown instance `{id}`"))
    }

    /// Journals, then applies. The append is the linearization point.
    fn commit(&mut self, event: Event) -> Result<(), ServiceError> {
        self.journal.append(&event)?;
        self.apply(&event)
            .map_err(|m| ServiceError::Validation(format!("inconsistent event: {m}")))
    }

    fn apply(&mut self, event: &Event) -> Result<(), String> {
        match event {
            Event::BatchReleased { batch, .. } => {
                let b = self
                    .batches
                    .get_mut(*batch as usize)
                    .ok_or(format!("unknown batch {batch}"))?;
                b.released = true;
            }
            Event::BatchClosed { batch, .. } => {
                let b = self
                    .batches
                    .get_mut(*batch as usize)
                    .ok_or(format!("unknown batch {batch}"))?;
                b.closed = true;
            }
            Event::Registered {
                annotator_id,
                token,
                ..
            } => {
                if self.annotators.contains_key(annotator_id) || self.tokens.contains_key(token) {
                    return Err(format!("annotator `{annotator_id}` registered twice"));
                }
                self.tokens.insert(token.clone(), annotator_id.clone());
                self.annotators.insert(
                    annotator_id.clone(),
                    AnnotatorState {
                        token: token.clone(),
                        rejected: false,
                        served: BTreeMap::new(),
                        submitted: BTreeSet::new(),
                    },
                );
            }
            Event::Served {
                annotator_id,
                instance_id,
                at,
            } => {
                let idx = self.instance_index(instance_id)?;
                let open = self.is_open(idx);
                let a = self
                    .annotators
                    .get_mut(annotator_id)
                    .ok_or(format!("unknown annotator `{annotator_id}`"))?;
                if a.served.contains_key(&idx) {
                    return Err(format!("`{instance_id}` served twice to `{annotator_id}`"));
                }
                if !open {
                    return Err(format!("`{instance_id}` served while closed"));
                }
                a.served.insert(idx, *at);
                self.n_serves += 1;
            }
            Event::Submitted(rec) => {
                let idx = self.instance_index(&rec.instance_id)?;
                let open = self.is_open(idx);
                let a = self
                    .annotators
                    .get_mut(&rec.annotator_id)
                    .ok_or(format!("unknown annotator `{}`", rec.annotator_id))?;
                if !a.served.contains_key(&idx) || a.submitted.contains(&idx) || !open || a.rejected
                {
                    return Err(format!(
                        "submission of `{}` by `{}` is not allowed",
                        rec.instance_id, rec.annotator_id
                    ));
                }
                a.submitted.insert(idx);
                self.collected[idx] += 1;
                self.records.push(StoredRecord {
                    record: rec.clone(),
                    voided: false,
                });
            }
            Event::Rejected { annotator_id, .. } => {
                let a = self
                    .annotators
                    .get_mut(annotator_id)
                    .ok_or(format!("unknown annotator `{annotator_id}`"))?;
                a.rejected = true;
                for stored in self
                    .records
                    .iter_mut()
                    .filter(|r| !r.voided && r.record.annotator_id == *annotator_id)
                {
                    stored.voided = true;
                    let idx = self.index[&stored.record.instance_id];
                    self.collected[idx] -= 1;
                    let b = idx / self.config.batch_size;
                    self.batches[b].closed = false;
                }
            }
        }
        Ok(())
    }

    fn authenticate(&self, token: &str) -> Result<String, ServiceError> {
        let id = self.tokens.get(token).ok_or(ServiceError::Unauthorized)?;
        if self.annotators[id].rejected {
            return Err(ServiceError::Forbidden(id.clone()));
        }
        Ok(id.clone())
    }

    pub fn register(&mut self) -> Result<Registration, ServiceError> {
        let annotator_id = format!("ann{:05}", self.annotators.len() + 1);
        let token = uuid::Uuid::new_v4().simple().to_string();
        let at = self.clock.now();
        self.commit(Event::Registered {
            annotator_id: annotator_id.clone(),
            token: token.clone(),
            at,
        })?;
        Ok(Registration {
            annotator_id,
            token,
        })
    }

    fn payload(&self, idx: usize, served_at: DateTime<Utc>) -> ServedInstance {
        let inst = &self.instances[idx];
        let (start, end) = self.ranges[idx];
        ServedInstance {
            instance_id: inst.id.clone(),
            batch: self.batch_of(idx),
            genre: inst.genre.clone(),
            sentence: inst.sentence.clone(),
            target: inst.sentence[start..end].to_string(),
            span: inst.span,
            char_start: start,
            char_end: end,
            before: inst.sentence[..start].to_string(),
            after: inst.sentence[end..].to_string(),
            served_at,
        }
    }

    /// Returns the annotator's outstanding instance if it is still open,
    /// otherwise a uniformly random open instance they have not yet seen.
    pub fn next_instance(&mut self, token: &str) -> Result<Option<ServedInstance>, ServiceError> {
        let annotator_id = self.authenticate(token)?;
        let a = &self.annotators[&annotator_id];
        let pending = a
            .served
            .iter()
            .find(|(idx, _)| !a.submitted.contains(idx) && self.is_open(**idx))
            .map(|(idx, at)| (*idx, *at));
        if let Some((idx, at)) = pending {
            return Ok(Some(self.payload(idx, at)));
        }
        let candidates: Vec<usize> = (0..self.instances.len())
            .filter(|i| self.is_open(*i) && !a.served.contains_key(i))
            .collect();
        if candidates.is_empty() {
            return Ok(None);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        rng.set_stream(self.n_serves);
        let idx = candidates[rng.gen_range(0..candidates.len())];
        let at = self.clock.now();
        self.commit(Event::Served {
            annotator_id,
            instance_id: self.instances[idx].id.clone(),
            at,
        })?;
        Ok(Some(self.payload(idx, at)))
    }

    pub fn submit(&mut self, submission: &Submission) -> Result<SubmitAck, ServiceError> {
        let annotator_id = self.authenticate(&submission.token)?;
        if !(1..=5).contains(&submission.likert) {
            return Err(ServiceError::Validation(format!(
                "likert label {} outside 1-5",
                submission.likert
            )));
        }
        if !submission.elapsed_ms.is_finite() || submission.elapsed_ms < 0.0 {
            return Err(ServiceError::Validation(
                "elapsed_ms must be a non-negative number".into(),
            ));
        }
        let idx = *self.index.get(&submission.instance_id).ok_or_else(|| {
            ServiceError::Validation(format!("unknown instance `{}`", submission.instance_id))
        })?;
        let a = &self.annotators[&annotator_id];
        if a.submitted.contains(&idx) {
            return Err(ServiceError::Conflict(format!(
                "`{}` already annotated `{}`",
                annotator_id, submission.instance_id
            )));
        }
        let served_at = *a.served.get(&idx).ok_or_else(|| {
            ServiceError::Validation(format!(
                "`{}` was not served to this annotator",
                submission.instance_id
            ))
        })?;
        if !self.is_open(idx) {
            return Err(ServiceError::Conflict(format!(
                "`{}` is no longer open",
                submission.instance_id
            )));
        }
        let now = self.clock.now();
        let measured = ((now - served_at).num_milliseconds().max(0) as f64) / 1000.0;
        let elapsed = (submission.elapsed_ms / 1000.0).min(measured);
        let batch = self.batch_of(idx);
        self.commit(Event::Submitted(AnnotationRecord {
            instance_id: submission.instance_id.clone(),
            annotator_id,
            likert: submission.likert as u8,
            elapsed,
            batch,
            timestamp: now,
        }))?;
        Ok(SubmitAck {
            instance_id: submission.instance_id.clone(),
            annotations_collected: self.collected[idx],
            annotations_target: self.config.annotations_target,
            closed: self.collected[idx] >= self.config.annotations_target,
            elapsed,
        })
    }

    fn batch_is_open(&self, batch: u32) -> bool {
        let b = &self.batches[batch as usize];
        !b.closed
            && self
                .batch_range(batch)
                .any(|i| self.collected[i] < self.config.annotations_target)
    }

    /// Screens the batch's live records; optionally rejects annotators and
    /// releases the next batch.
    pub fn review_batch(
        &mut self,
        batch: u32,
        request: &ReviewRequest,
    ) -> Result<ReviewReport, ServiceError> {
        if batch as usize >= self.batches.len() {
            return Err(ServiceError::NotFound(format!("batch {batch}")));
        }
        for id in &request.reject {
            if !self.annotators.contains_key(id) {
                return Err(ServiceError::NotFound(format!("annotator `{id}`")));
            }
        }
        let open = self.batch_is_open(batch);
        if open && !request.force {
            return Err(ServiceError::BatchOpen(batch));
        }
        if open {
            let at = self.clock.now();
            self.commit(Event::BatchClosed { batch, at })?;
        }
        let live: Vec<AnnotationRecord> = self
            .records
            .iter()
            .filter(|r| !r.voided && r.record.batch == batch)
            .map(|r| r.record.clone())
            .collect();
        let (_, qc) = filter_annotators(&live, &self.config.qc, self.frequencies.as_ref());
        let mut targets: BTreeSet<String> = request.reject.iter().cloned().collect();
        if request.reject_flagged {
            targets.extend(qc.rejected.iter().map(|r| r.annotator_id.clone()));
        }
        let mut voided = Vec::new();
        for annotator_id in targets {
            if self.annotators[&annotator_id].rejected {
                continue;
            }
            let affected: Vec<usize> = self
                .records
                .iter()
                .filter(|r| !r.voided && r.record.annotator_id == annotator_id)
                .map(|r| self.index[&r.record.instance_id])
                .collect();
            let reopened = affected
                .iter()
                .filter(|i| {
                    self.collected[**i] >= self.config.annotations_target || !self.is_open(**i)
                })
                .count();
            let at = self.clock.now();
            self.commit(Event::Rejected {
                annotator_id: annotator_id.clone(),
                batch,
                at,
            })?;
            voided.push(VoidOutcome {
                annotator_id,
                records_voided: affected.len(),
                entries_reopened: reopened,
            });
        }
        let next = batch + 1;
        let mut released = None;
        if request.release_next
            && (next as usize) < self.batches.len()
            && !self.batches[next as usize].released
        {
            let at = self.clock.now();
            self.commit(Event::BatchReleased { batch: next, at })?;
            released = Some(next);
        }
        Ok(ReviewReport {
            batch,
            forced: open,
            qc,
            voided,
            released,
        })
    }

    pub fn entries(&self) -> Vec<TaskQueueEntry> {
        self.instances
            .iter()
            .enumerate()
            .map(|(i, inst)| TaskQueueEntry {
                instance_id: inst.id.clone(),
                annotations_collected: self.collected[i],
                annotations_target: self.config.annotations_target,
                batch: self.batch_of(i),
                open: self.is_open(i),
            })
            .collect()
    }

    fn batch_statuses(&self) -> Vec<BatchStatus> {
        (0..self.batches.len() as u32)
            .map(|b| {
                let range = self.batch_range(b);
                BatchStatus {
                    batch: b,
                    released: self.batches[b as usize].released,
                    closed: self.batches[b as usize].closed,
                    n_instances: range.len(),
                    n_complete: range
                        .clone()
                        .filter(|i| self.collected[*i] >= self.config.annotations_target)
                        .count(),
                    n_annotations: range.map(|i| u64::from(self.collected[i])).sum(),
                }
            })
            .collect()
    }

    pub fn progress(&self, token: Option<&str>) -> Result<Progress, ServiceError> {
        let annotator = match token {
            Some(t) => {
                let id = self.tokens.get(t).ok_or(ServiceError::Unauthorized)?;
                let a = &self.annotators[id];
                Some(AnnotatorProgress {
                    annotator_id: id.clone(),
                    submitted: a.submitted.len(),
                    rejected: a.rejected,
                })
            }
            None => None,
        };
        let batches = self.batch_statuses();
        Ok(Progress {
            annotations_target: self.config.annotations_target,
            batch_size: self.config.batch_size,
            n_instances: self.instances.len(),
            n_complete: batches.iter().map(|b| b.n_complete).sum(),
            n_annotators: self.annotators.len(),
            n_records: self.records.len(),
            n_voided: self.records.iter().filter(|r| r.voided).count(),
            batches,
            annotator,
        })
    }

    /// Non-voided records in log order.
    pub fn export(&self) -> Vec<AnnotationRecord> {
        self.records
            .iter()
            .filter(|r| !r.voided)
            .map(|r| r.record.clone())
            .collect()
    }

    pub fn snapshot(&self) -> QueueSnapshot {
        let ids = |set: &mut dyn Iterator<Item = usize>| {
            set.map(|i| self.instances[i].id.clone()).collect()
        };
        QueueSnapshot {
            entries: self.entries(),
            batches: self.batch_statuses(),
            annotators: self
                .annotators
                .iter()
                .map(|(id, a)| AnnotatorSnapshot {
                    annotator_id: id.clone(),
                    rejected: a.rejected,
                    served: ids(&mut a.served.keys().copied()),
                    submitted: ids(&mut a.submitted.iter().copied()),
                })
                .collect(),
            records: self.records.clone(),
            n_serves: self.n_serves,
        }
    }

    /// Token lookup for tests and tooling.
    pub fn token_of(&self, annotator_id: &str) -> Option<&str> {
        self.annotators.get(annotator_id).map(|a| a.token.as_str())
    }
}
