//! On-disk dataset layout.
//!
//! A TOML manifest lists dataset-level metadata and per-subject file pairs:
//! a delimited-text signal file (header row = channel names, one row per
//! sample) and a delimited-text event file (columns `time_s,rating`).
//! Numbers are serialized with 18 significant digits so a save/load round
//! trip is bit-stable.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{bandpass, epoch_and_label, rereference, ProbeEvent, Provenance, Recording, SubjectDataset};

pub const MANIFEST_FILE: &str = "manifest.toml";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub schema: u32,
    pub fs: f64,
    pub window_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preprocess: Option<Preprocess>,
    pub subjects: Vec<ManifestSubject>,
}

/// Optional preprocessing applied on load, in this order: band-pass, then
/// re-referencing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct Preprocess {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub band: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<[String; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestSubject {
    pub id: String,
    pub signal: String,
    pub events: String,
}

fn fmt_f64(v: f64) -> String {
    format!("{v:.17e}")
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Write `recordings` plus a manifest into `dir`; returns the manifest path.
pub fn save_recordings(
    recordings: &[Recording],
    window_s: f64,
    preprocess: Option<Preprocess>,
    dir: &Path,
) -> Result<PathBuf> {
    let Some(first) = recordings.first() else {
        return Err(Error::EmptyDataset("saving zero recordings"));
    };
    fs::create_dir_all(dir).map_err(io_err(dir))?;

    let mut subjects = Vec::with_capacity(recordings.len());
    for rec in recordings {
        if rec.fs != first.fs {
            return Err(Error::InvalidArgument(
                "all recordings in a dataset must share one sampling rate".into(),
            ));
        }
        let signal_name = format!("{}_signal.csv", rec.subject_id);
        let events_name = format!("{}_events.csv", rec.subject_id);
        write_signal_csv(&dir.join(&signal_name), rec)?;
        write_events_csv(&dir.join(&events_name), &rec.events)?;
        subjects.push(ManifestSubject {
            id: rec.subject_id.clone(),
            signal: signal_name,
            events: events_name,
        });
    }

    let manifest = DatasetManifest {
        schema: 1,
        fs: first.fs,
        window_s,
        preprocess,
        subjects,
    };
    let path = dir.join(MANIFEST_FILE);
    let text = toml::to_string_pretty(&manifest)
        .map_err(|e| Error::Config(format!("manifest serialization failed: {e}")))?;
    fs::write(&path, text).map_err(io_err(&path))?;
    Ok(path)
}

fn write_signal_csv(path: &Path, rec: &Recording) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        msg: e.to_string(),
    })?;
    w.write_record(&rec.channels).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        msg: e.to_string(),
    })?;
    let n = rec.n_samples();
    for t in 0..n {
        let row: Vec<String> = rec.samples.iter().map(|ch| fmt_f64(ch[t])).collect();
        w.write_record(&row).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            msg: e.to_string(),
        })?;
    }
    w.flush().map_err(io_err(path))?;
    Ok(())
}

fn write_events_csv(path: &Path, events: &[ProbeEvent]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        msg: e.to_string(),
    })?;
    w.write_record(["time_s", "rating"]).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        msg: e.to_string(),
    })?;
    for ev in events {
        w.write_record([fmt_f64(ev.time_s), ev.rating.to_string()])
            .map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                msg: e.to_string(),
            })?;
    }
    w.flush().map_err(io_err(path))?;
    Ok(())
}

fn read_signal_csv(path: &Path, subject_id: &str, fs: f64, events: Vec<ProbeEvent>) -> Result<Recording> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => Error::Io {
                path: path.to_path_buf(),
                source: std::io::Error::new(std::io::ErrorKind::NotFound, e.to_string()),
            },
            _ => Error::Parse {
                path: path.to_path_buf(),
                msg: e.to_string(),
            },
        })?;
    let channels: Vec<String> = rdr
        .headers()
        .map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            msg: e.to_string(),
        })?
        .iter()
        .map(str::to_string)
        .collect();
    let n_channels = channels.len();
    let mut samples: Vec<Vec<f64>> = vec![Vec::new(); n_channels];
    for (row_idx, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            msg: e.to_string(),
        })?;
        if record.len() != n_channels {
            return Err(Error::ChannelCountMismatch {
                path: path.to_path_buf(),
                expected: n_channels,
                found: record.len(),
                row: row_idx + 2,
            });
        }
        for (ci, field) in record.iter().enumerate() {
            let v: f64 = field.trim().parse().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                msg: format!("row {}: `{field}` is not a number", row_idx + 2),
            })?;
            if !v.is_finite() {
                return Err(Error::NonFiniteSample {
                    path: path.to_path_buf(),
                    row: row_idx + 2,
                    channel: channels[ci].clone(),
                });
            }
            samples[ci].push(v);
        }
    }
    Recording::new(subject_id, fs, channels, samples, events)
}

fn read_events_csv(path: &Path) -> Result<Vec<ProbeEvent>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => Error::Io {
                path: path.to_path_buf(),
                source: std::io::Error::new(std::io::ErrorKind::NotFound, e.to_string()),
            },
            _ => Error::Parse {
                path: path.to_path_buf(),
                msg: e.to_string(),
            },
        })?;
    let mut events = Vec::new();
    for (row_idx, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            msg: e.to_string(),
        })?;
        if record.len() != 2 {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                msg: format!("row {}: expected `time_s,rating`", row_idx + 2),
            });
        }
        let time_s: f64 = record[0].trim().parse().map_err(|_| Error::Parse {
            path: path.to_path_buf(),
            msg: format!("row {}: bad time `{}`", row_idx + 2, &record[0]),
        })?;
        let rating: i64 = record[1].trim().parse().map_err(|_| Error::Parse {
            path: path.to_path_buf(),
            msg: format!("row {}: bad rating `{}`", row_idx + 2, &record[1]),
        })?;
        if !(1..=7).contains(&rating) {
            return Err(Error::InvalidRating(rating));
        }
        events.push(ProbeEvent {
            time_s,
            rating: rating as u8,
        });
    }
    Ok(events)
}

/// Read the manifest alone.
pub fn load_manifest(manifest_path: &Path) -> Result<DatasetManifest> {
    let text = fs::read_to_string(manifest_path).map_err(io_err(manifest_path))?;
    toml::from_str(&text).map_err(|e| Error::Parse {
        path: manifest_path.to_path_buf(),
        msg: e.to_string(),
    })
}

/// Load a dataset: read every subject's files, apply the configured
/// preprocessing, and cut labeled pre-probe epochs. Deterministic for fixed
/// files.
pub fn load_dataset(manifest_path: &Path) -> Result<SubjectDataset> {
    let manifest = load_manifest(manifest_path)?;
    let base = manifest_path.parent().unwrap_or_else(|| Path::new("."));
    let mut subjects = Vec::with_capacity(manifest.subjects.len());
    for subj in &manifest.subjects {
        let events = read_events_csv(&base.join(&subj.events))?;
        let mut rec = read_signal_csv(&base.join(&subj.signal), &subj.id, manifest.fs, events)?;
        if let Some(pp) = &manifest.preprocess {
            if let Some([lo, hi]) = pp.band {
                rec = bandpass(&rec, lo, hi)?;
            }
            if let Some([a, b]) = &pp.reference {
                rec = rereference(&rec, a, b)?;
            }
        }
        let epochs = epoch_and_label(&rec, manifest.window_s)?;
        subjects.push((subj.id.clone(), epochs));
    }
    Ok(SubjectDataset {
        subjects,
        provenance: Provenance {
            source: format!("files:{}", manifest_path.display()),
            seed: None,
            fs: manifest.fs,
            window_s: manifest.window_s,
            notes: vec![],
        },
    })
}
