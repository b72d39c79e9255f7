//! The per-channel feature bank: 424 features per channel (404 with MSE
//! excluded), assembled from time statistics, band powers, spectral
//! entropies, time-domain multiscale entropies, and wavelet sub-band
//! statistics and entropies.
//!
//! Individual estimators can be undefined on degenerate input (sample
//! entropy without template matches, sub-band series too short for a scale,
//! zero-variance channels). Such values are carried as explicit markers and
//! substituted at matrix-assembly time with the largest finite value
//! observed in the same column across the dataset; every substitution is
//! recorded.

pub mod dwt;
pub mod names;
pub mod stats;

pub use dwt::{dwt_decompose, WaveletDecomposition};
pub use names::{feature_kinds, Band, FeatureKind, FeatureName, ScaledEstimator, SubBand, WaveletStat};
pub use stats::{band_power_features, time_stat_features, wavelet_stat_features, SubBandStats, TimeStats};

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::entropy::spectral::{band_slice, normalized_shannon, welch_psd, WelchConfig};
use crate::entropy::{multiscale_lenient, wavelet_log_energy_entropy, EntropyParams, Estimator};
use crate::error::{Error, Result};
use crate::signal::{Label, SubjectDataset};

/// Data-independent entropy settings; the sample-entropy tolerance is a
/// factor applied to each epoch channel's scale-1 standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyConfig {
    pub sampen_m: usize,
    pub sampen_r_factor: f64,
    pub perm_m: usize,
    pub disp_m: usize,
    pub classes: usize,
    pub delay: usize,
    pub max_scale: u32,
}

impl Default for EntropyConfig {
    fn default() -> Self {
        Self {
            sampen_m: 2,
            sampen_r_factor: 0.15,
            perm_m: 4,
            disp_m: 3,
            classes: 6,
            delay: 1,
            max_scale: 20,
        }
    }
}

impl EntropyConfig {
    fn resolve(&self, series: &[f64]) -> EntropyParams {
        let sd = population_sd(series);
        EntropyParams {
            sampen_m: self.sampen_m,
            // Fall back to 1.0 on flat series; the sample-entropy path is
            // skipped separately in that case.
            sampen_r: if sd > 0.0 { self.sampen_r_factor * sd } else { 1.0 },
            perm_m: self.perm_m,
            disp_m: self.disp_m,
            classes: self.classes,
            delay: self.delay,
            scales: (1..=self.max_scale as usize).collect(),
        }
    }
}

fn population_sd(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    let mu = x.iter().sum::<f64>() / x.len() as f64;
    (x.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / x.len() as f64).sqrt()
}

fn multiscale_values(
    est: Estimator,
    series: &[f64],
    params: &EntropyParams,
    out: &mut Vec<Option<f64>>,
) -> Result<()> {
    if est == Estimator::Sample && !(population_sd(series) > 0.0) {
        out.extend(std::iter::repeat(None).take(params.scales.len()));
        return Ok(());
    }
    for sv in multiscale_lenient(est, series, params)? {
        out.push(sv.value);
    }
    Ok(())
}

/// Extract the full feature inventory for one preprocessed epoch channel.
/// Values are aligned with `feature_kinds(include_mse, cfg.max_scale)`;
/// `None` marks an undefined value awaiting dataset-level substitution.
pub fn extract_channel_features(
    y: &[f64],
    fs: f64,
    include_mse: bool,
    cfg: &EntropyConfig,
) -> Result<Vec<Option<f64>>> {
    let min_len = dwt::MIN_LEN.max(fs.round() as usize).max(16);
    if y.len() < min_len {
        return Err(Error::SeriesTooShort {
            len: y.len(),
            min: min_len,
        });
    }

    let mut values: Vec<Option<f64>> = Vec::with_capacity(424);

    // Time statistics.
    let ts = stats::time_stat_features(y)?;
    values.push(Some(ts.mean));
    values.push(Some(ts.mean_power));
    values.push(Some(ts.first_diff));
    values.push(Some(ts.second_diff));
    values.push(ts.hjorth_complexity);

    // One Welch pass serves the band powers and the spectral entropies.
    let (freqs, psd) = welch_psd(y, fs, &WelchConfig::one_second(fs, y.len()))?;
    for (_, power) in stats::band_power_from_psd(&freqs, &psd)? {
        values.push(Some(power));
    }
    for band in Band::ALL {
        let bins = band_slice(&freqs, &psd, Some(band.range_hz()));
        if bins.is_empty() {
            let (lo, hi) = band.range_hz();
            return Err(Error::EmptyBand { lo, hi });
        }
        values.push(Some(normalized_shannon(&bins)));
    }
    values.push(Some(normalized_shannon(&band_slice(&freqs, &psd, None))));

    // Time-domain multiscale entropies.
    let params = cfg.resolve(y);
    for est in [
        Estimator::Sample,
        Estimator::Permutation,
        Estimator::Dispersion,
        Estimator::FluctuationDispersion,
    ] {
        if est == Estimator::Sample && !include_mse {
            continue;
        }
        multiscale_values(est, y, &params, &mut values)?;
    }

    // Wavelet domain.
    let w = dwt_decompose(y)?;
    let wstats = stats::wavelet_stat_features(&w);
    for (sb, s) in wstats {
        values.push(Some(s.mean_power));
        values.push(Some(s.mean));
        values.push(Some(s.std));
        values.push(s.ram);
        let coeffs = w.band(sb);
        values.push(match wavelet_log_energy_entropy(coeffs) {
            Ok(v) => Some(v),
            Err(Error::AllZeroCoefficients) => None,
            Err(e) => return Err(e),
        });
        // Coefficients live at the decimated rate of their level.
        let sub_fs = fs / (1u64 << sb.level()) as f64;
        values.push(if coeffs.len() >= 16 {
            let cfg_w = WelchConfig::one_second(sub_fs, coeffs.len());
            let (f_sb, p_sb) = welch_psd(coeffs, sub_fs, &cfg_w)?;
            Some(normalized_shannon(&band_slice(&f_sb, &p_sb, None)))
        } else {
            None
        });
        let sub_params = cfg.resolve(coeffs);
        for est in [Estimator::Permutation, Estimator::Dispersion, Estimator::FluctuationDispersion] {
            multiscale_values(est, coeffs, &sub_params, &mut values)?;
        }
    }

    debug_assert_eq!(values.len(), feature_kinds(include_mse, cfg.max_scale).len());
    Ok(values)
}

/// Epochs x features with aligned labels, subject ids, and a channel-aware
/// name header. All values are finite.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    names: Vec<String>,
    data: Vec<f64>,
    labels: Vec<Label>,
    subject_ids: Vec<String>,
}

impl FeatureMatrix {
    pub fn from_rows(
        names: Vec<String>,
        rows: Vec<Vec<f64>>,
        labels: Vec<Label>,
        subject_ids: Vec<String>,
    ) -> Result<Self> {
        let n_cols = names.len();
        if rows.len() != labels.len() || rows.len() != subject_ids.len() {
            return Err(Error::LengthMismatch {
                left: rows.len(),
                right: labels.len().min(subject_ids.len()),
            });
        }
        let mut data = Vec::with_capacity(rows.len() * n_cols);
        for row in &rows {
            if row.len() != n_cols {
                return Err(Error::LengthMismatch {
                    left: row.len(),
                    right: n_cols,
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Self {
            names,
            data,
            labels,
            subject_ids,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn n_cols(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn subject_ids(&self) -> &[String] {
        &self.subject_ids
    }

    pub fn value(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.n_cols() + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        let w = self.n_cols();
        &self.data[row * w..(row + 1) * w]
    }

    pub fn column(&self, col: usize) -> Vec<f64> {
        (0..self.n_rows()).map(|r| self.value(r, col)).collect()
    }

    /// Channel of every column, parsed from the name prefix.
    pub fn column_channel(&self, col: usize) -> Result<String> {
        Ok(FeatureName::parse(&self.names[col])?.channel)
    }

    /// Distinct channels in column order.
    pub fn channels(&self) -> Result<Vec<String>> {
        let mut out: Vec<String> = Vec::new();
        for c in 0..self.n_cols() {
            let ch = self.column_channel(c)?;
            if !out.contains(&ch) {
                out.push(ch);
            }
        }
        Ok(out)
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownFeature(name.to_string()))
    }

    /// New matrix restricted to `names`, in the given order.
    pub fn select_columns(&self, names: &[String]) -> Result<FeatureMatrix> {
        let idx: Vec<usize> = names
            .iter()
            .map(|n| self.column_index(n))
            .collect::<Result<_>>()?;
        let mut data = Vec::with_capacity(self.n_rows() * idx.len());
        for r in 0..self.n_rows() {
            for &c in &idx {
                data.push(self.value(r, c));
            }
        }
        Ok(FeatureMatrix {
            names: names.to_vec(),
            data,
            labels: self.labels.clone(),
            subject_ids: self.subject_ids.clone(),
        })
    }

    /// New matrix keeping only columns of the given channels.
    pub fn select_channels(&self, channels: &[String]) -> Result<FeatureMatrix> {
        if channels.is_empty() {
            return Err(Error::InvalidArgument("empty channel subset".into()));
        }
        let names: Vec<String> = self
            .names
            .iter()
            .filter(|n| {
                FeatureName::parse(n)
                    .map(|f| channels.contains(&f.channel))
                    .unwrap_or(false)
            })
            .cloned()
            .collect();
        if names.is_empty() {
            return Err(Error::UnknownFeature(format!(
                "no columns for channels {channels:?}"
            )));
        }
        self.select_columns(&names)
    }

    /// Row indices per distinct subject, in dataset order.
    pub fn subject_groups(&self) -> Vec<(String, Vec<usize>)> {
        let mut groups: Vec<(String, Vec<usize>)> = Vec::new();
        for (r, id) in self.subject_ids.iter().enumerate() {
            match groups.iter_mut().find(|(g, _)| g == id) {
                Some((_, rows)) => rows.push(r),
                None => groups.push((id.clone(), vec![r])),
            }
        }
        groups
    }
}

/// One substituted column: how many undefined entries it had and what value
/// they received.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Substitution {
    pub column: String,
    pub count: usize,
    pub value: f64,
}

/// Assembly record: parameters and every undefined-value substitution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractionReport {
    pub include_mse: bool,
    pub entropy: EntropyConfig,
    pub channels: Vec<String>,
    pub n_rows: usize,
    pub n_cols: usize,
    pub substitutions: Vec<Substitution>,
    pub undefined_total: usize,
}

/// Extract the feature matrix for a whole dataset. Rows follow dataset
/// order; columns are `<CHANNEL>_<kind>` for each channel in `channel_subset`
/// (default: all dataset channels) crossed with the canonical inventory.
/// Extraction parallelizes over epochs; results are identical for any
/// thread count.
pub fn extract_matrix(
    ds: &SubjectDataset,
    channel_subset: Option<&[String]>,
    include_mse: bool,
    cfg: &EntropyConfig,
) -> Result<(FeatureMatrix, ExtractionReport)> {
    let all_channels = ds.channels();
    let channels: Vec<String> = match channel_subset {
        Some(subset) => {
            if subset.is_empty() {
                return Err(Error::InvalidArgument("empty channel subset".into()));
            }
            for ch in subset {
                if !all_channels.contains(ch) {
                    return Err(Error::MissingChannel(ch.clone()));
                }
            }
            subset.to_vec()
        }
        None => all_channels,
    };
    if ds.n_epochs() == 0 {
        return Err(Error::EmptyDataset("feature extraction"));
    }

    let kinds = feature_kinds(include_mse, cfg.max_scale);
    let names: Vec<String> = channels
        .iter()
        .flat_map(|ch| {
            kinds.iter().map(move |k| {
                FeatureName {
                    channel: ch.clone(),
                    kind: *k,
                }
                .to_string()
            })
        })
        .collect();

    let epochs: Vec<_> = ds.epochs().collect();
    let fs = ds.provenance.fs;
    let raw_rows: Vec<Result<Vec<Option<f64>>>> = epochs
        .par_iter()
        .map(|epoch| {
            let mut row = Vec::with_capacity(names.len());
            for ch in &channels {
                let ci = epoch
                    .channels
                    .iter()
                    .position(|c| c == ch)
                    .ok_or_else(|| Error::MissingChannel(ch.clone()))?;
                row.extend(extract_channel_features(&epoch.window[ci], fs, include_mse, cfg)?);
            }
            Ok(row)
        })
        .collect();

    let mut rows = Vec::with_capacity(raw_rows.len());
    for r in raw_rows {
        rows.push(r?);
    }

    // Undefined values take the column's largest finite value (0.0 when a
    // column is undefined everywhere).
    let mut substitutions = Vec::new();
    let mut undefined_total = 0usize;
    for col in 0..names.len() {
        let mut max_finite = f64::NEG_INFINITY;
        let mut missing = 0usize;
        for row in &rows {
            match row[col] {
                Some(v) if v.is_finite() => max_finite = max_finite.max(v),
                _ => missing += 1,
            }
        }
        if missing > 0 {
            let value = if max_finite.is_finite() { max_finite } else { 0.0 };
            for row in &mut rows {
                if !matches!(row[col], Some(v) if v.is_finite()) {
                    row[col] = Some(value);
                }
            }
            substitutions.push(Substitution {
                column: names[col].clone(),
                count: missing,
                value,
            });
            undefined_total += missing;
        }
    }

    let dense: Vec<Vec<f64>> = rows
        .into_iter()
        .map(|r| r.into_iter().map(Option::unwrap).collect())
        .collect();
    let labels: Vec<Label> = epochs.iter().map(|e| e.label).collect();
    let subject_ids: Vec<String> = epochs.iter().map(|e| e.subject_id.clone()).collect();
    let matrix = FeatureMatrix::from_rows(names, dense, labels, subject_ids)?;
    let report = ExtractionReport {
        include_mse,
        entropy: cfg.clone(),
        channels,
        n_rows: matrix.n_rows(),
        n_cols: matrix.n_cols(),
        substitutions,
        undefined_total,
    };
    Ok((matrix, report))
}

/// Write a matrix as delimited text: `subject,label,<feature names...>`.
pub fn save_matrix(matrix: &FeatureMatrix, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        msg: e.to_string(),
    })?;
    let mut header = vec!["subject".to_string(), "label".to_string()];
    header.extend(matrix.names.iter().cloned());
    w.write_record(&header).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        msg: e.to_string(),
    })?;
    for r in 0..matrix.n_rows() {
        let mut record = Vec::with_capacity(matrix.n_cols() + 2);
        record.push(matrix.subject_ids[r].clone());
        record.push(
            match matrix.labels[r] {
                Label::Mw => "MW",
                Label::NonMw => "nonMW",
            }
            .to_string(),
        );
        record.extend(matrix.row(r).iter().map(|v| format!("{v:.17e}")));
        w.write_record(&record).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            msg: e.to_string(),
        })?;
    }
    w.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(())
}

/// Read a matrix written by [`save_matrix`].
pub fn load_matrix(path: &Path) -> Result<FeatureMatrix> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            msg: e.to_string(),
        })?;
    let header = rdr
        .headers()
        .map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            msg: e.to_string(),
        })?
        .clone();
    if header.len() < 3 || &header[0] != "subject" || &header[1] != "label" {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            msg: "expected header `subject,label,<features...>`".into(),
        });
    }
    let names: Vec<String> = header.iter().skip(2).map(str::to_string).collect();
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    let mut subjects = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            msg: e.to_string(),
        })?;
        if record.len() != names.len() + 2 {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                msg: format!("row {}: wrong field count", i + 2),
            });
        }
        subjects.push(record[0].to_string());
        labels.push(match &record[1] {
            "MW" => Label::Mw,
            "nonMW" => Label::NonMw,
            other => {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    msg: format!("row {}: unknown label `{other}`", i + 2),
                })
            }
        });
        let row: Vec<f64> = record
            .iter()
            .skip(2)
            .map(|f| {
                f.trim().parse().map_err(|_| Error::Parse {
                    path: path.to_path_buf(),
                    msg: format!("row {}: `{f}` is not a number", i + 2),
                })
            })
            .collect::<Result<_>>()?;
        rows.push(row);
    }
    FeatureMatrix::from_rows(names, rows, labels, subjects)
}
