//! Append-only label file: `frame_id,label,timestamp` per line.
//!
//! Replaying the file keeps the last record for each frame id, at the
//! position where that frame id first appeared.

use std::fs::{File, OpenOptions};
use std::io::{self, Write};
use std::path::Path;

use indexmap::IndexMap;

use crate::error::{Error, Result};
use crate::features::BehaviorLabel;

#[derive(Debug, Clone, PartialEq)]
pub struct LabelRecord {
    pub frame_id: String,
    pub label: BehaviorLabel,
    /// Seconds.
    pub timestamp: f64,
}

impl LabelRecord {
    pub fn new(frame_id: impl Into<String>, label: BehaviorLabel, timestamp: f64) -> Result<Self> {
        let frame_id = frame_id.into();
        validate_frame_id(&frame_id)?;
        if !timestamp.is_finite() {
            return Err(Error::param(format!("timestamp {timestamp} is not finite")));
        }
        Ok(Self {
            frame_id,
            label,
            timestamp,
        })
    }

    pub fn to_line(&self) -> String {
        format!("{},{},{}\n", self.frame_id, self.label.name(), self.timestamp)
    }
}

pub fn validate_frame_id(id: &str) -> Result<()> {
    if id.is_empty() || id.contains([',', '\n', '\r', '/', '\\']) {
        return Err(Error::param(format!("invalid frame id {id:?}")));
    }
    Ok(())
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LabelStore {
    records: IndexMap<String, LabelRecord>,
}

impl LabelStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut store = Self::new();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.splitn(3, ',');
            let (Some(id), Some(label), Some(ts)) = (parts.next(), parts.next(), parts.next())
            else {
                return Err(Error::parse(line_no, 1, "expected `frame_id,label,timestamp`"));
            };
            let label: BehaviorLabel = label
                .parse()
                .map_err(|_| Error::parse(line_no, id.len() + 2, format!("unknown label {label:?}")))?;
            let timestamp: f64 = ts.trim().parse().map_err(|_| {
                Error::parse(line_no, id.len() + label.name().len() + 3, format!("bad timestamp {ts:?}"))
            })?;
            let record = LabelRecord::new(id, label, timestamp)
                .map_err(|e| Error::parse(line_no, 1, e.to_string()))?;
            store.insert(record);
        }
        Ok(store)
    }

    /// Reads the whole file at once; a missing file is an empty store.
    pub fn load(path: &Path) -> Result<Self> {
        match std::fs::read_to_string(path) {
            Ok(text) => Self::parse(&text),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(Self::new()),
            Err(e) => Err(e.into()),
        }
    }

    /// Last write wins.
    pub fn insert(&mut self, record: LabelRecord) {
        self.records.insert(record.frame_id.clone(), record);
    }

    pub fn get(&self, frame_id: &str) -> Option<&LabelRecord> {
        self.records.get(frame_id)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &LabelRecord> {
        self.records.values()
    }

    pub fn to_text(&self) -> String {
        self.iter().map(LabelRecord::to_line).collect()
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut f = File::create(path)?;
        f.write_all(self.to_text().as_bytes())?;
        f.sync_all()?;
        Ok(())
    }
}

/// Appends one record and syncs it to disk before returning.
pub fn append_record(path: &Path, record: &LabelRecord) -> Result<()> {
    let mut f = OpenOptions::new().create(true).append(true).open(path)?;
    f.write_all(record.to_line().as_bytes())?;
    f.sync_data()?;
    Ok(())
}
