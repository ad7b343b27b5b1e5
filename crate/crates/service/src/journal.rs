use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use lcp_core::annotations::AnnotationRecord;
use serde::{Deserialize, Serialize};

use crate::ServiceError;

/// One line of the service log. `Submitted` lines carry every field of an
/// [`AnnotationRecord`] plus the `event` tag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Event {
    BatchReleased {
        batch: u32,
        at: DateTime<Utc>,
    },
    BatchClosed {
        batch: u32,
        at: DateTime<Utc>,
    },
    Registered {
        annotator_id: String,
        token: String,
        at: DateTime<Utc>,
    },
    Served {
        annotator_id: String,
        instance_id: String,
        at: DateTime<Utc>,
    },
    Submitted(AnnotationRecord),
    /// Voids every record of the annotator and blocks further work.
    Rejected {
        annotator_id: String,
        batch: u32,
        at: DateTime<Utc>,
    },
}

/// Append-only event log, optionally backed by a file.
#[derive(Debug)]
pub struct Journal {
    path: Option<PathBuf>,
    file: Option<File>,
    events: Vec<Event>,
}

impl Journal {
    pub fn in_memory() -> Self {
        Journal {
            path: None,
            file: None,
            events: Vec::new(),
        }
    }

    /// Opens `path` for appending; existing lines are returned for replay.
    pub fn open(path: &Path) -> Result<(Self, Vec<Event>), ServiceError> {
        let existing = if path.exists() {
            read_journal(path)?
        } else {
            Vec::new()
        };
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|source| ServiceError::Io {
                path: path.to_path_buf(),
                source,
            })?;
        Ok((
            Journal {
                path: Some(path.to_path_buf()),
                file: Some(file),
                events: Vec::new(),
            },
            existing,
        ))
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    /// Events appended or replayed through this journal, in order.
    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub(crate) fn remember(&mut self, event: Event) {
        self.events.push(event);
    }

    pub(crate) fn append(&mut self, event: &Event) -> Result<(), ServiceError> {
        if let (Some(file), Some(path)) = (self.file.as_mut(), self.path.as_ref()) {
            let mut line = serde_json::to_string(event).expect("event serializes");
            line.push('\n');
            file.write_all(line.as_bytes())
                .and_then(|_| file.flush())
                .map_err(|source| ServiceError::Io {
                    path: path.clone(),
                    source,
                })?;
        }
        self.events.push(event.clone());
        Ok(())
    }
}

pub fn read_journal(path: &Path) -> Result<Vec<Event>, ServiceError> {
    let io = |source| ServiceError::Io {
        path: path.to_path_buf(),
        source,
    };
    let reader = BufReader::new(File::open(path).map_err(io)?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(io)?;
        if line.trim().is_empty() {
            continue;
        }
        let event = serde_json::from_str(&line).map_err(|e| ServiceError::Replay {
            path: path.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(event);
    }
    Ok(out)
}
