//! Canonical feature-name grammar.
//!
//! Every feature name has the form `<CH>_<descriptor>` where `<CH>` is a
//! channel name (channel names may not contain `_`). Descriptors:
//!
//! ```text
//! Mean | MeanPower | FirstDiff | SecondDiff | HjComp
//! PSD_<band>                      band in {theta, alpha, beta, gamma}
//! SpecEnt_<band> | SpecEnt_full
//! <SB>-WL-<stat>                  SB in {cA7, cD7, cD6, cD5, cD4},
//!                                 stat in {MeanPower, Mean, STD, RAM, Ent, SpecEnt}
//! <E>-<s>                         E in {MSE, MPE, MDE, MFDE}, s a scale >= 1
//! WL-<E>-<SB>-<s>                 E in {MPE, MDE, MFDE}
//! ```
//!
//! Formatting and parsing are mutually inverse, so the grammar is a
//! bijection between names and (channel, kind) pairs.

use std::fmt;

use crate::error::{Error, Result};

/// EEG frequency band with half-open range [lo, hi) in Hz.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Band {
    Theta,
    Alpha,
    Beta,
    Gamma,
}

impl Band {
    pub const ALL: [Band; 4] = [Band::Theta, Band::Alpha, Band::Beta, Band::Gamma];

    pub fn range_hz(self) -> (f64, f64) {
        match self {
            Band::Theta => (4.0, 8.0),
            Band::Alpha => (8.0, 13.0),
            Band::Beta => (13.0, 30.0),
            Band::Gamma => (30.0, 45.0),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Band::Theta => "theta",
            Band::Alpha => "alpha",
            Band::Beta => "beta",
            Band::Gamma => "gamma",
        }
    }

    fn parse(s: &str) -> Option<Band> {
        Band::ALL.into_iter().find(|b| b.as_str() == s)
    }
}

/// Retained wavelet sub-bands, coarsest first. `RAM_ORDER` adjacency follows
/// this order; the finest band pairs back with its predecessor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SubBand {
    CA7,
    CD7,
    CD6,
    CD5,
    CD4,
}

impl SubBand {
    pub const ALL: [SubBand; 5] = [SubBand::CA7, SubBand::CD7, SubBand::CD6, SubBand::CD5, SubBand::CD4];

    pub fn as_str(self) -> &'static str {
        match self {
            SubBand::CA7 => "cA7",
            SubBand::CD7 => "cD7",
            SubBand::CD6 => "cD6",
            SubBand::CD5 => "cD5",
            SubBand::CD4 => "cD4",
        }
    }

    /// Decomposition level the coefficients live at.
    pub fn level(self) -> usize {
        match self {
            SubBand::CA7 | SubBand::CD7 => 7,
            SubBand::CD6 => 6,
            SubBand::CD5 => 5,
            SubBand::CD4 => 4,
        }
    }

    /// Partner band for the ratio of absolute means.
    pub fn ram_partner(self) -> SubBand {
        match self {
            SubBand::CA7 => SubBand::CD7,
            SubBand::CD7 => SubBand::CD6,
            SubBand::CD6 => SubBand::CD5,
            SubBand::CD5 => SubBand::CD4,
            SubBand::CD4 => SubBand::CD5,
        }
    }

    fn parse(s: &str) -> Option<SubBand> {
        SubBand::ALL.into_iter().find(|b| b.as_str() == s)
    }
}

/// Per-sub-band statistic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WaveletStat {
    MeanPower,
    Mean,
    Std,
    Ram,
    Ent,
    SpecEnt,
}

impl WaveletStat {
    pub const ALL: [WaveletStat; 6] = [
        WaveletStat::MeanPower,
        WaveletStat::Mean,
        WaveletStat::Std,
        WaveletStat::Ram,
        WaveletStat::Ent,
        WaveletStat::SpecEnt,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            WaveletStat::MeanPower => "MeanPower",
            WaveletStat::Mean => "Mean",
            WaveletStat::Std => "STD",
            WaveletStat::Ram => "RAM",
            WaveletStat::Ent => "Ent",
            WaveletStat::SpecEnt => "SpecEnt",
        }
    }

    fn parse(s: &str) -> Option<WaveletStat> {
        WaveletStat::ALL.into_iter().find(|w| w.as_str() == s)
    }
}

/// Multiscale estimator tags as they appear in feature names.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScaledEstimator {
    Mse,
    Mpe,
    Mde,
    Mfde,
}

impl ScaledEstimator {
    /// Time-domain inventory (MSE first so the no-MSE variant is a prefix cut).
    pub const TIME: [ScaledEstimator; 4] = [
        ScaledEstimator::Mse,
        ScaledEstimator::Mpe,
        ScaledEstimator::Mde,
        ScaledEstimator::Mfde,
    ];
    /// Wavelet-domain inventory (MSE excluded per the feature bank layout).
    pub const WAVELET: [ScaledEstimator; 3] =
        [ScaledEstimator::Mpe, ScaledEstimator::Mde, ScaledEstimator::Mfde];

    pub fn as_str(self) -> &'static str {
        match self {
            ScaledEstimator::Mse => "MSE",
            ScaledEstimator::Mpe => "MPE",
            ScaledEstimator::Mde => "MDE",
            ScaledEstimator::Mfde => "MFDE",
        }
    }

    fn parse(s: &str) -> Option<ScaledEstimator> {
        ScaledEstimator::TIME.into_iter().find(|e| e.as_str() == s)
    }
}

/// A feature kind within one channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FeatureKind {
    Mean,
    MeanPower,
    FirstDiff,
    SecondDiff,
    HjorthComplexity,
    BandPower(Band),
    /// `None` is the full pass band.
    SpectralEntropy(Option<Band>),
    WaveletStat(SubBand, WaveletStat),
    TimeEntropy(ScaledEstimator, u32),
    WaveletEntropy(ScaledEstimator, SubBand, u32),
}

impl fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeatureKind::Mean => write!(f, "Mean"),
            FeatureKind::MeanPower => write!(f, "MeanPower"),
            FeatureKind::FirstDiff => write!(f, "FirstDiff"),
            FeatureKind::SecondDiff => write!(f, "SecondDiff"),
            FeatureKind::HjorthComplexity => write!(f, "HjComp"),
            FeatureKind::BandPower(b) => write!(f, "PSD_{}", b.as_str()),
            FeatureKind::SpectralEntropy(Some(b)) => write!(f, "SpecEnt_{}", b.as_str()),
            FeatureKind::SpectralEntropy(None) => write!(f, "SpecEnt_full"),
            FeatureKind::WaveletStat(sb, st) => write!(f, "{}-WL-{}", sb.as_str(), st.as_str()),
            FeatureKind::TimeEntropy(e, s) => write!(f, "{}-{}", e.as_str(), s),
            FeatureKind::WaveletEntropy(e, sb, s) => {
                write!(f, "WL-{}-{}-{}", e.as_str(), sb.as_str(), s)
            }
        }
    }
}

/// A fully qualified feature name.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FeatureName {
    pub channel: String,
    pub kind: FeatureKind,
}

impl fmt::Display for FeatureName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}", self.channel, self.kind)
    }
}

impl FeatureName {
    pub fn parse(name: &str) -> Result<FeatureName> {
        let (channel, rest) = name
            .split_once('_')
            .ok_or_else(|| Error::UnknownFeature(name.to_string()))?;
        if channel.is_empty() {
            return Err(Error::UnknownFeature(name.to_string()));
        }
        let kind = parse_kind(rest).ok_or_else(|| Error::UnknownFeature(name.to_string()))?;
        Ok(FeatureName {
            channel: channel.to_string(),
            kind,
        })
    }
}

fn parse_kind(rest: &str) -> Option<FeatureKind> {
    match rest {
        "Mean" => return Some(FeatureKind::Mean),
        "MeanPower" => return Some(FeatureKind::MeanPower),
        "FirstDiff" => return Some(FeatureKind::FirstDiff),
        "SecondDiff" => return Some(FeatureKind::SecondDiff),
        "HjComp" => return Some(FeatureKind::HjorthComplexity),
        "SpecEnt_full" => return Some(FeatureKind::SpectralEntropy(None)),
        _ => {}
    }
    if let Some(band) = rest.strip_prefix("PSD_") {
        return Band::parse(band).map(FeatureKind::BandPower);
    }
    if let Some(band) = rest.strip_prefix("SpecEnt_") {
        return Band::parse(band).map(|b| FeatureKind::SpectralEntropy(Some(b)));
    }
    if let Some(tail) = rest.strip_prefix("WL-") {
        // WL-<E>-<SB>-<s>
        let mut it = tail.splitn(3, '-');
        let est = ScaledEstimator::parse(it.next()?)?;
        let sb = SubBand::parse(it.next()?)?;
        let scale: u32 = it.next()?.parse().ok()?;
        if scale == 0 {
            return None;
        }
        return Some(FeatureKind::WaveletEntropy(est, sb, scale));
    }
    if let Some((sb, stat)) = rest.split_once("-WL-") {
        let sb = SubBand::parse(sb)?;
        let stat = WaveletStat::parse(stat)?;
        return Some(FeatureKind::WaveletStat(sb, stat));
    }
    if let Some((est, scale)) = rest.split_once('-') {
        let est = ScaledEstimator::parse(est)?;
        let scale: u32 = scale.parse().ok()?;
        if scale == 0 {
            return None;
        }
        return Some(FeatureKind::TimeEntropy(est, scale));
    }
    None
}

/// The canonical per-channel feature inventory, in column order: time
/// statistics, band powers, spectral entropies, time-domain multiscale
/// entropies, then per sub-band statistics and multiscale entropies.
pub fn feature_kinds(include_mse: bool, max_scale: u32) -> Vec<FeatureKind> {
    let mut kinds = vec![
        FeatureKind::Mean,
        FeatureKind::MeanPower,
        FeatureKind::FirstDiff,
        FeatureKind::SecondDiff,
        FeatureKind::HjorthComplexity,
    ];
    for b in Band::ALL {
        kinds.push(FeatureKind::BandPower(b));
    }
    for b in Band::ALL {
        kinds.push(FeatureKind::SpectralEntropy(Some(b)));
    }
    kinds.push(FeatureKind::SpectralEntropy(None));
    for est in ScaledEstimator::TIME {
        if est == ScaledEstimator::Mse && !include_mse {
            continue;
        }
        for s in 1..=max_scale {
            kinds.push(FeatureKind::TimeEntropy(est, s));
        }
    }
    for sb in SubBand::ALL {
        for st in WaveletStat::ALL {
            kinds.push(FeatureKind::WaveletStat(sb, st));
        }
        for est in ScaledEstimator::WAVELET {
            for s in 1..=max_scale {
                kinds.push(FeatureKind::WaveletEntropy(est, sb, s));
            }
        }
    }
    kinds
}
