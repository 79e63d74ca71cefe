//! Fixed-particle-number Fock basis and state vectors.

use std::sync::{Arc, OnceLock};

use crate::combinatorics::{binomial_small, rank, subset_masks};
use crate::error::{Error, Result};
use crate::gates::TwoBodyGate;
use crate::opstrings::{Letter, OperatorString};
use crate::C64;

/// Default cap on the number of basis configurations.
pub const DEFAULT_HILBERT_CAP: usize = 2_000_000;

/// Index pairs `(|..1_i..0_j..⟩, |..0_i..1_j..⟩)` mixed by a gate on sites `(i, j)`.
type MixedPairs = Vec<(u32, u32)>;

/// All `N`-particle configurations of `V` sites, in colexicographic (numeric) order.
#[derive(Debug)]
pub struct FockBasis {
    volume: usize,
    particles: usize,
    states: Vec<u64>,
    mixed: Vec<OnceLock<Arc<MixedPairs>>>,
}

impl FockBasis {
    pub fn new(volume: usize, particles: usize) -> Result<Self> {
        Self::with_cap(volume, particles, DEFAULT_HILBERT_CAP)
    }

    pub fn with_cap(volume: usize, particles: usize, cap: usize) -> Result<Self> {
        if volume >= 64 {
            return Err(Error::CapExceeded {
                what: "simulator volume",
                value: volume,
                cap: 63,
            });
        }
        if particles > volume {
            return Err(Error::InvalidArgument(format!(
                "{particles} particles do not fit on {volume} sites"
            )));
        }
        let dim = binomial_small(volume, particles) as usize;
        if dim > cap {
            return Err(Error::CapExceeded {
                what: "Hilbert space dimension",
                value: dim,
                cap,
            });
        }
        let states: Vec<u64> = subset_masks(volume, particles).collect();
        debug_assert_eq!(states.len(), dim);
        Ok(Self {
            volume,
            particles,
            states,
            mixed: (0..volume * volume).map(|_| OnceLock::new()).collect(),
        })
    }

    pub fn volume(&self) -> usize {
        self.volume
    }

    pub fn particles(&self) -> usize {
        self.particles
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[u64] {
        &self.states
    }

    pub fn state(&self, index: usize) -> u64 {
        self.states[index]
    }

    /// Index of a configuration, or `None` if it has the wrong particle number.
    pub fn index_of(&self, bits: u64) -> Option<usize> {
        if bits.count_ones() as usize != self.particles || (bits >> self.volume) != 0 {
            return None;
        }
        Some(rank(bits) as usize)
    }

    /// Cached index pairs swapped by a hop between `i` and `j`, `i != j`.
    ///
    /// The first entry of each pair has site `i` occupied and `j` empty.
    pub(crate) fn mixed_pairs(&self, i: usize, j: usize) -> Arc<MixedPairs> {
        let cell = &self.mixed[i * self.volume + j];
        Arc::clone(cell.get_or_init(|| {
            let mask = (1u64 << i) | (1u64 << j);
            let list = self
                .states
                .iter()
                .enumerate()
                .filter(|(_, s)| (*s >> i) & 1 == 1 && (*s >> j) & 1 == 0)
                .map(|(k, s)| (k as u32, rank(s ^ mask) as u32))
                .collect();
            Arc::new(list)
        }))
    }
}

/// Normalised state vector in a [`FockBasis`].
#[derive(Debug, Clone)]
pub struct FockState {
    basis: Arc<FockBasis>,
    amps: Vec<C64>,
}

impl FockState {
    /// Wrap amplitudes, normalising them.
    pub fn new(basis: Arc<FockBasis>, mut amps: Vec<C64>) -> Result<Self> {
        if amps.len() != basis.dim() {
            return Err(Error::InvalidArgument(format!(
                "expected {} amplitudes, got {}",
                basis.dim(),
                amps.len()
            )));
        }
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidArgument("state has zero or non-finite norm".into()));
        }
        for a in amps.iter_mut() {
            *a /= norm;
        }
        Ok(Self { basis, amps })
    }

    /// A single occupation configuration.
    pub fn basis_state(basis: Arc<FockBasis>, bits: u64) -> Result<Self> {
        let k = basis.index_of(bits).ok_or_else(|| {
            Error::InvalidArgument(format!("configuration {bits:b} is not in the basis"))
        })?;
        let mut amps = vec![C64::new(0.0, 0.0); basis.dim()];
        amps[k] = C64::new(1.0, 0.0);
        Ok(Self { basis, amps })
    }

    /// Superposition of configurations given as `(bits, amplitude)`.
    pub fn from_configurations(
        basis: Arc<FockBasis>,
        terms: impl IntoIterator<Item = (u64, C64)>,
    ) -> Result<Self> {
        let mut amps = vec![C64::new(0.0, 0.0); basis.dim()];
        for (bits, a) in terms {
            let k = basis.index_of(bits).ok_or_else(|| {
                Error::InvalidArgument(format!("configuration {bits:b} is not in the basis"))
            })?;
            amps[k] += a;
        }
        Self::new(basis, amps)
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn volume(&self) -> usize {
        self.basis.volume
    }

    pub fn particles(&self) -> usize {
        self.basis.particles
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Apply a gate to sites `(i, j)`, including its sector phases.
    pub fn apply_gate(&mut self, gate: &TwoBodyGate, i: usize, j: usize) {
        assert!(i != j && i < self.volume() && j < self.volume());
        self.apply_block(gate, i, j);
        if gate.phase0 != C64::new(1.0, 0.0) || gate.phase2 != C64::new(1.0, 0.0) {
            for (a, s) in self.amps.iter_mut().zip(&self.basis.states) {
                match ((s >> i) & 1, (s >> j) & 1) {
                    (0, 0) => *a *= gate.phase0,
                    (1, 1) => *a *= gate.phase2,
                    _ => {}
                }
            }
        }
    }

    /// Apply only the one-particle block of a gate.
    ///
    /// The sector phases are diagonal in the occupation basis, so dropping them
    /// leaves the outcome distribution of a single layer of disjoint gates unchanged.
    pub fn apply_block(&mut self, gate: &TwoBodyGate, i: usize, j: usize) {
        let b = &gate.block;
        for &(k10, k01) in self.basis.mixed_pairs(i, j).iter() {
            let (k10, k01) = (k10 as usize, k01 as usize);
            let (x01, x10) = (self.amps[k01], self.amps[k10]);
            // block rows/cols ordered (|0_i 1_j⟩, |1_i 0_j⟩)
            self.amps[k01] = b[0][0] * x01 + b[0][1] * x10;
            self.amps[k10] = b[1][0] * x01 + b[1][1] * x10;
        }
    }

    /// Sample a configuration index with probability `|amp|²`, given `u ∈ [0, 1)`.
    pub fn sample_index(&self, u: f64) -> usize {
        let mut acc = 0.0;
        let target = u * self.norm().powi(2);
        for (k, a) in self.amps.iter().enumerate() {
            acc += a.norm_sqr();
            if acc > target {
                return k;
            }
        }
        // rounding left the target just past the end; take the last populated entry
        self.amps
            .iter()
            .rposition(|a| a.norm_sqr() > 0.0)
            .unwrap_or(self.amps.len() - 1)
    }

    /// `⟨ψ|S|ψ⟩` by direct application of the string.
    pub fn expectation(&self, s: &OperatorString) -> Result<C64> {
        if s.volume() != self.volume() {
            return Err(Error::VolumeMismatch(s.volume(), self.volume()));
        }
        if !s.is_conserving() {
            return Err(Error::NonConserving {
                raise: s.n_plus(),
                lower: s.n_minus(),
            });
        }
        let mut z_mask = 0u64;
        let mut need_empty = 0u64;
        let mut need_full = 0u64;
        for (site, letter) in s.iter() {
            match letter {
                Letter::Identity => {}
                Letter::Z => z_mask |= 1 << site,
                Letter::Raise => need_empty |= 1 << site,
                Letter::Lower => need_full |= 1 << site,
            }
        }
        let flip = need_empty | need_full;
        let mut acc = C64::new(0.0, 0.0);
        for (k, &x) in self.basis.states.iter().enumerate() {
            if x & need_empty != 0 || x & need_full != need_full {
                continue;
            }
            let y = x ^ flip;
            let sign = if (x & z_mask).count_ones().is_multiple_of(2) { 1.0 } else { -1.0 };
            let ky = rank(y) as usize;
            acc += self.amps[ky].conj() * self.amps[k] * sign;
        }
        Ok(acc)
    }

    /// `⟨n_site⟩`.
    pub fn density(&self, site: usize) -> f64 {
        self.amps
            .iter()
            .zip(&self.basis.states)
            .filter(|(_, s)| (*s >> site) & 1 == 1)
            .map(|(a, _)| a.norm_sqr())
            .sum()
    }
}
