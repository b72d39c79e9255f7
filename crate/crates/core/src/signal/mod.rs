//! Multichannel recordings: ingestion, preprocessing, epoching, labeling,
//! and synthetic dataset generation.

pub mod filter;
pub mod io;
mod synth;

pub use filter::{butter_bandpass, filtfilt, Sos};
pub use io::{load_dataset, save_recordings, DatasetManifest, ManifestSubject, Preprocess};
pub use synth::{synth_dataset, synth_recordings, SynthSpec};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Binary attention label derived from probe ratings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    NonMw,
    Mw,
}

impl Label {
    /// Class index used by classifiers: NonMw = 0, Mw = 1 (positive class).
    pub fn index(self) -> usize {
        match self {
            Label::NonMw => 0,
            Label::Mw => 1,
        }
    }
}

/// Rating-to-label map: 1..=3 is mind-wandering, 5..=7 is focused, 4 is
/// dropped as uncategorizable.
pub fn label_for_rating(rating: u8) -> Option<Label> {
    match rating {
        1..=3 => Some(Label::Mw),
        4 => None,
        5..=7 => Some(Label::NonMw),
        _ => unreachable!("ratings validated on construction"),
    }
}

/// A probe event: onset time and the participant's 1..=7 focus rating
/// (1 = completely wandering, 7 = very focused).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeEvent {
    pub time_s: f64,
    pub rating: u8,
}

/// A multichannel, uniformly sampled recording with probe annotations.
#[derive(Debug, Clone, PartialEq)]
pub struct Recording {
    pub subject_id: String,
    pub fs: f64,
    pub channels: Vec<String>,
    /// channels x N sample matrix, microvolts.
    pub samples: Vec<Vec<f64>>,
    pub events: Vec<ProbeEvent>,
}

impl Recording {
    pub fn new(
        subject_id: impl Into<String>,
        fs: f64,
        channels: Vec<String>,
        samples: Vec<Vec<f64>>,
        events: Vec<ProbeEvent>,
    ) -> Result<Self> {
        let rec = Self {
            subject_id: subject_id.into(),
            fs,
            channels,
            samples,
            events,
        };
        rec.validate()?;
        Ok(rec)
    }

    pub fn n_samples(&self) -> usize {
        self.samples.first().map_or(0, Vec::len)
    }

    pub fn duration_s(&self) -> f64 {
        self.n_samples() as f64 / self.fs
    }

    pub fn channel_index(&self, name: &str) -> Result<usize> {
        self.channels
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::MissingChannel(name.to_string()))
    }

    fn validate(&self) -> Result<()> {
        if !(self.fs > 0.0) {
            return Err(Error::InvalidArgument("sampling rate must be > 0".into()));
        }
        if self.channels.len() != self.samples.len() {
            return Err(Error::LengthMismatch {
                left: self.channels.len(),
                right: self.samples.len(),
            });
        }
        let n = self.n_samples();
        if n == 0 {
            return Err(Error::InvalidArgument("recording has no samples".into()));
        }
        for (name, row) in self.channels.iter().zip(&self.samples) {
            if row.len() != n {
                return Err(Error::LengthMismatch {
                    left: n,
                    right: row.len(),
                });
            }
            if name.contains('_') {
                return Err(Error::InvalidArgument(format!(
                    "channel name `{name}` may not contain '_' (reserved by the feature-name grammar)"
                )));
            }
        }
        let mut seen = std::collections::HashSet::new();
        for name in &self.channels {
            if !seen.insert(name) {
                return Err(Error::DuplicateChannel(name.clone()));
            }
        }
        let max_t = n as f64 / self.fs;
        let mut prev = f64::NEG_INFINITY;
        for ev in &self.events {
            if !(1..=7).contains(&(ev.rating as i64)) {
                return Err(Error::InvalidRating(ev.rating as i64));
            }
            if ev.time_s <= prev {
                return Err(Error::NonMonotoneEvents {
                    prev,
                    t: ev.time_s,
                });
            }
            if ev.time_s < 0.0 || ev.time_s > max_t {
                return Err(Error::EventOutOfRange {
                    t: ev.time_s,
                    max: max_t,
                });
            }
            prev = ev.time_s;
        }
        Ok(())
    }
}

/// A fixed-length pre-probe window with its binary label.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledEpoch {
    pub subject_id: String,
    pub channels: Vec<String>,
    /// channels x W window, W = round(window_s * fs).
    pub window: Vec<Vec<f64>>,
    pub label: Label,
    pub source_probe_time_s: f64,
}

/// Where a dataset came from, with enough detail to regenerate it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub source: String,
    pub seed: Option<u64>,
    pub fs: f64,
    pub window_s: f64,
    pub notes: Vec<String>,
}

/// Epochs grouped by subject.
#[derive(Debug, Clone, PartialEq)]
pub struct SubjectDataset {
    pub subjects: Vec<(String, Vec<LabeledEpoch>)>,
    pub provenance: Provenance,
}

impl SubjectDataset {
    pub fn n_epochs(&self) -> usize {
        self.subjects.iter().map(|(_, e)| e.len()).sum()
    }

    /// Channel names shared by all epochs (taken from the first).
    pub fn channels(&self) -> Vec<String> {
        self.subjects
            .iter()
            .flat_map(|(_, e)| e.first())
            .next()
            .map(|e| e.channels.clone())
            .unwrap_or_default()
    }

    pub fn epochs(&self) -> impl Iterator<Item = &LabeledEpoch> {
        self.subjects.iter().flat_map(|(_, e)| e.iter())
    }
}

/// Band-pass every channel identically with the zero-phase Butterworth
/// cascade (prototype order 4). Output length equals input length.
pub fn bandpass(rec: &Recording, lo_hz: f64, hi_hz: f64) -> Result<Recording> {
    let sos = butter_bandpass(4, lo_hz, hi_hz, rec.fs)?;
    let samples = rec
        .samples
        .iter()
        .map(|row| filtfilt(&sos, row))
        .collect();
    Ok(Recording {
        samples,
        ..rec.clone()
    })
}

/// Re-reference every channel to the average of `ref_a` and `ref_b`
/// samplewise; the two reference channels are removed from the output.
pub fn rereference(rec: &Recording, ref_a: &str, ref_b: &str) -> Result<Recording> {
    let ia = rec.channel_index(ref_a)?;
    let ib = rec.channel_index(ref_b)?;
    let n = rec.n_samples();
    let mut avg = vec![0.0f64; n];
    for t in 0..n {
        avg[t] = 0.5 * (rec.samples[ia][t] + rec.samples[ib][t]);
    }
    let mut channels = Vec::new();
    let mut samples = Vec::new();
    for (ci, name) in rec.channels.iter().enumerate() {
        if ci == ia || ci == ib {
            continue;
        }
        channels.push(name.clone());
        samples.push(
            rec.samples[ci]
                .iter()
                .zip(&avg)
                .map(|(x, r)| x - r)
                .collect(),
        );
    }
    Ok(Recording {
        subject_id: rec.subject_id.clone(),
        fs: rec.fs,
        channels,
        samples,
        events: rec.events.clone(),
    })
}

/// Cut one epoch per probe covering the `window_s` seconds immediately
/// before the probe onset. Ratings of 4 are skipped; probes with
/// insufficient history are skipped with a warning.
pub fn epoch_and_label(rec: &Recording, window_s: f64) -> Result<Vec<LabeledEpoch>> {
    if !(window_s > 0.0) {
        return Err(Error::InvalidArgument("window length must be > 0".into()));
    }
    let w = (window_s * rec.fs).round() as usize;
    if w == 0 {
        return Err(Error::InvalidArgument("window shorter than one sample".into()));
    }
    let mut epochs = Vec::new();
    for ev in &rec.events {
        let Some(label) = label_for_rating(ev.rating) else {
            continue;
        };
        let end = (ev.time_s * rec.fs).round() as i64;
        let start = end - w as i64;
        if start < 0 || end as usize > rec.n_samples() {
            log::warn!(
                "subject {}: probe at {:.3}s skipped, needs {:.3}s of history",
                rec.subject_id,
                ev.time_s,
                window_s
            );
            continue;
        }
        let (start, end) = (start as usize, end as usize);
        epochs.push(LabeledEpoch {
            subject_id: rec.subject_id.clone(),
            channels: rec.channels.clone(),
            window: rec.samples.iter().map(|row| row[start..end].to_vec()).collect(),
            label,
            source_probe_time_s: ev.time_s,
        });
    }
    Ok(epochs)
}

/// Remove subjects whose epochs all share one class; errors if nothing
/// remains (the F1 score would be undefined for such subjects under
/// leave-one-subject-out evaluation).
pub fn drop_single_class_subjects(ds: &SubjectDataset) -> Result<SubjectDataset> {
    let subjects: Vec<(String, Vec<LabeledEpoch>)> = ds
        .subjects
        .iter()
        .filter(|(_, epochs)| {
            let has_mw = epochs.iter().any(|e| e.label == Label::Mw);
            let has_non = epochs.iter().any(|e| e.label == Label::NonMw);
            has_mw && has_non
        })
        .cloned()
        .collect();
    if subjects.is_empty() {
        return Err(Error::EmptyDataset("removing single-class subjects"));
    }
    Ok(SubjectDataset {
        subjects,
        provenance: ds.provenance.clone(),
    })
}
