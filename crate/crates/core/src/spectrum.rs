//! Mode spectra and search-problem configuration.
//!
//! Every mode frequency is stored as `base_frequency * index` with an integer
//! index, so coincidences between frequency differences are decided by exact
//! integer comparison rather than by floating-point equality.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};

/// Index law used to build a search set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SpectrumKind {
    /// Indices `1, 2, ..., N`.
    Linear,
    /// Indices `1, 4, 9, ..., N^2`.
    Quadratic,
    /// Arbitrary strictly increasing positive indices.
    Custom(Vec<u64>),
}

impl SpectrumKind {
    pub fn build(&self, n: usize, base_frequency: f64) -> Result<ModeSpectrum> {
        match self {
            SpectrumKind::Linear => linear_spectrum(n, base_frequency),
            SpectrumKind::Quadratic => quadratic_spectrum(n, base_frequency),
            SpectrumKind::Custom(indices) => {
                if indices.len() != n {
                    return Err(Error::InvalidSpectrum(format!(
                        "custom index list has {} entries but N = {n}",
                        indices.len()
                    )));
                }
                ModeSpectrum::new(base_frequency, indices.clone())
            }
        }
    }

    /// Initial-mode index used when none is given: the next index of the
    /// law beyond the search set, which can never collide with it.
    pub fn default_initial_index(&self, n: usize) -> u64 {
        let next = n as u64 + 1;
        match self {
            SpectrumKind::Linear => next,
            SpectrumKind::Quadratic => next * next,
            SpectrumKind::Custom(indices) => indices.last().copied().unwrap_or(0) + 1,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SpectrumKind::Linear => "linear",
            SpectrumKind::Quadratic => "quadratic",
            SpectrumKind::Custom(_) => "custom",
        }
    }
}

impl fmt::Display for SpectrumKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Ordered, nondegenerate set of mode frequencies `omega_n = omega_0 * n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSpectrum {
    base_frequency: f64,
    indices: Vec<u64>,
    frequencies: Vec<f64>,
}

impl ModeSpectrum {
    /// Builds a spectrum from an explicit index list.
    ///
    /// Indices must be positive and strictly increasing; the base frequency
    /// must be finite and positive.
    pub fn new(base_frequency: f64, indices: Vec<u64>) -> Result<Self> {
        if !(base_frequency.is_finite() && base_frequency > 0.0) {
            return Err(Error::InvalidSpectrum(format!(
                "base frequency must be positive and finite, got {base_frequency}"
            )));
        }
        if indices.is_empty() {
            return Err(Error::InvalidSpectrum("no modes".into()));
        }
        if indices[0] == 0 {
            return Err(Error::InvalidSpectrum("mode index 0 is not allowed".into()));
        }
        if let Some(w) = indices.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::InvalidSpectrum(format!(
                "indices must be strictly increasing ({} followed by {})",
                w[0], w[1]
            )));
        }
        // Indices feed exact f64 products and signed differences.
        if *indices.last().unwrap() > (1u64 << 52) {
            return Err(Error::InvalidSpectrum("mode index too large".into()));
        }
        let frequencies = indices.iter().map(|&i| base_frequency * i as f64).collect();
        Ok(Self {
            base_frequency,
            indices,
            frequencies,
        })
    }

    pub fn base_frequency(&self) -> f64 {
        self.base_frequency
    }

    pub fn indices(&self) -> &[u64] {
        &self.indices
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn index(&self, position: usize) -> u64 {
        self.indices[position]
    }

    pub fn frequency(&self, position: usize) -> f64 {
        self.frequencies[position]
    }

    pub fn max_index(&self) -> u64 {
        *self.indices.last().expect("spectrum is never empty")
    }

    pub fn position_of_index(&self, index: u64) -> Option<usize> {
        self.indices.binary_search(&index).ok()
    }

    /// Multiplicity of each index difference `b - a` over ordered pairs of
    /// distinct modes of this set alone.
    pub fn difference_histogram(&self) -> BTreeMap<i64, usize> {
        pair_differences(&self.indices)
    }
}

fn check_size(n: usize, base_frequency: f64) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidSpectrum(format!(
            "a search needs at least 2 modes, got N = {n}"
        )));
    }
    if !(base_frequency.is_finite() && base_frequency > 0.0) {
        return Err(Error::InvalidSpectrum(format!(
            "base frequency must be positive and finite, got {base_frequency}"
        )));
    }
    Ok(())
}

/// Search set with indices `1..=n`.
pub fn linear_spectrum(n: usize, base_frequency: f64) -> Result<ModeSpectrum> {
    check_size(n, base_frequency)?;
    ModeSpectrum::new(base_frequency, (1..=n as u64).collect())
}

/// Search set with indices `1, 4, ..., n^2`.
pub fn quadratic_spectrum(n: usize, base_frequency: f64) -> Result<ModeSpectrum> {
    check_size(n, base_frequency)?;
    ModeSpectrum::new(base_frequency, (1..=n as u64).map(|i| i * i).collect())
}

/// A search set together with the initially excited mode `j` (outside the
/// set) and the position of the searched mode `s` inside it.
///
/// Frequency differences follow `omega_ab = omega_b - omega_a`, so the drive
/// frequency is `omega_sj = omega_j - omega_s`.
///
/// The state vector used by the dynamics has `N + 1` slots: slots `0..N`
/// follow the spectrum order and slot `N` holds mode `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchProblem {
    spectrum: ModeSpectrum,
    initial_index: u64,
    searched_position: usize,
}

impl SearchProblem {
    pub fn spectrum(&self) -> &ModeSpectrum {
        &self.spectrum
    }

    /// Size of the search set.
    pub fn n(&self) -> usize {
        self.spectrum.len()
    }

    /// Number of amplitude slots, `N + 1`.
    pub fn mode_count(&self) -> usize {
        self.spectrum.len() + 1
    }

    pub fn base_frequency(&self) -> f64 {
        self.spectrum.base_frequency
    }

    pub fn initial_index(&self) -> u64 {
        self.initial_index
    }

    pub fn searched_position(&self) -> usize {
        self.searched_position
    }

    pub fn searched_index(&self) -> u64 {
        self.spectrum.index(self.searched_position)
    }

    pub fn initial_slot(&self) -> usize {
        self.spectrum.len()
    }

    pub fn searched_slot(&self) -> usize {
        self.searched_position
    }

    pub fn omega_j(&self) -> f64 {
        self.spectrum.base_frequency * self.initial_index as f64
    }

    pub fn omega_s(&self) -> f64 {
        self.spectrum.frequency(self.searched_position)
    }

    /// `omega_sj = omega_j - omega_s`, evaluated from the integer indices.
    pub fn drive_frequency(&self) -> f64 {
        self.spectrum.base_frequency * self.drive_index_difference() as f64
    }

    pub fn drive_index_difference(&self) -> i64 {
        self.initial_index as i64 - self.searched_index() as i64
    }

    /// Mode index of every slot, `j` last.
    pub fn slot_indices(&self) -> Vec<u64> {
        let mut out = self.spectrum.indices.clone();
        out.push(self.initial_index);
        out
    }

    /// Frequency of every slot, `j` last.
    pub fn slot_frequencies(&self) -> Vec<f64> {
        let mut out = self.spectrum.frequencies.clone();
        out.push(self.omega_j());
        out
    }

    /// Largest frequency over the search set and `j`.
    pub fn max_frequency(&self) -> f64 {
        self.spectrum.base_frequency * self.spectrum.max_index().max(self.initial_index) as f64
    }

    /// Smallest frequency over the search set and `j`.
    pub fn min_frequency(&self) -> f64 {
        self.spectrum.base_frequency * self.spectrum.indices[0].min(self.initial_index) as f64
    }

    /// Same problem on a spectrum with a different base frequency.
    pub fn with_base_frequency(&self, base_frequency: f64) -> Result<Self> {
        let spectrum = ModeSpectrum::new(base_frequency, self.spectrum.indices.clone())?;
        make_problem(spectrum, self.initial_index, self.searched_position)
    }
}

/// Validates and assembles a search problem.
pub fn make_problem(
    spectrum: ModeSpectrum,
    initial_index: u64,
    searched_position: usize,
) -> Result<SearchProblem> {
    if initial_index == 0 {
        return Err(Error::InvalidProblem(
            "initial mode index must be positive".into(),
        ));
    }
    if initial_index > (1u64 << 52) {
        return Err(Error::InvalidProblem("initial mode index too large".into()));
    }
    if spectrum.position_of_index(initial_index).is_some() {
        return Err(Error::InvalidProblem(format!(
            "initial mode index {initial_index} belongs to the search set"
        )));
    }
    if searched_position >= spectrum.len() {
        return Err(Error::InvalidProblem(format!(
            "searched position {searched_position} out of range for N = {}",
            spectrum.len()
        )));
    }
    // Unreachable after the collision check, kept for custom callers.
    if spectrum.index(searched_position) == initial_index {
        return Err(Error::InvalidProblem("drive frequency is zero".into()));
    }
    Ok(SearchProblem {
        spectrum,
        initial_index,
        searched_position,
    })
}

/// Multiplicity of every index difference `b - a` over ordered pairs of
/// distinct modes in the search set together with `j`.
///
/// Keys are differences in units of the base frequency.
pub fn degeneracy_histogram(problem: &SearchProblem) -> BTreeMap<i64, usize> {
    pair_differences(&problem.slot_indices())
}

fn pair_differences(indices: &[u64]) -> BTreeMap<i64, usize> {
    let mut hist = BTreeMap::new();
    for (ia, &a) in indices.iter().enumerate() {
        for (ib, &b) in indices.iter().enumerate() {
            if ia != ib {
                *hist.entry(b as i64 - a as i64).or_insert(0) += 1;
            }
        }
    }
    hist
}
