//! Single-row estimators for one operator string.

use crate::channel::{pairing_fraction, SpectrumCache};
use crate::combinatorics::subset_masks;
use crate::error::{Error, Result};
use crate::estimator::hfunc::{h_function, ColumnCensus};
use crate::gates::{column_value, pair_expectation, TwoBodyGate};
use crate::opstrings::{canonicalize, region_a_strings, CanonicalForm, Letter, OperatorString};
use crate::simulator::ShadowSample;
use crate::C64;

/// Largest `V'` the naive estimator enumerates.
pub const NAIVE_MAX_VOLUME: usize = 12;

/// A row with its pairing indexed by site and its gates resolved.
#[derive(Debug, Clone)]
pub struct SampleView<'a> {
    pub sample: &'a ShadowSample,
    partner: Vec<usize>,
    slot: Vec<usize>,
    gates: Vec<TwoBodyGate>,
    census: ColumnCensus,
}

impl<'a> SampleView<'a> {
    pub fn new(sample: &'a ShadowSample) -> Self {
        let (partner, slot) = sample.pairing.partners();
        let gates = sample.gates.iter().map(|g| g.gate()).collect();
        let mut census = ColumnCensus::default();
        for &(i, j) in &sample.pairing.pairs {
            census.add(sample.bits[i], sample.bits[j]);
        }
        Self {
            sample,
            partner,
            slot,
            gates,
            census,
        }
    }

    /// Value of the column holding `site`, with `letter_of` giving the letter on each of its sites.
    fn column(&self, site: usize, letter_of: impl Fn(usize) -> Letter) -> C64 {
        let (i, j) = self.sample.pairing.pairs[self.slot[site]];
        let b = &self.sample.bits;
        column_value(&self.gates[self.slot[site]], b[i], b[j], letter_of(i), letter_of(j))
    }

    fn outcome(&self, site: usize) -> (bool, bool) {
        let (i, j) = self.sample.pairing.pairs[self.slot[site]];
        (self.sample.bits[i], self.sample.bits[j])
    }
}

/// One region-A column: per-pattern values and the string slots it holds.
#[derive(Debug, Clone)]
struct ColumnA {
    /// Value indexed by `2·[Z on first site] + [Z on second site]`.
    values: [C64; 4],
    /// Z slots (into the effective Z list) on the first and second site.
    z_slot: [Option<usize>; 2],
    /// Identity slot of a single-Z column.
    id_slot: Option<usize>,
    /// Which site holds the identity for `id_slot`.
    id_side: usize,
}

/// Per-string data shared across all rows.
#[derive(Debug, Clone)]
pub struct StringEstimator {
    canon: CanonicalForm,
    letters: Vec<Letter>,
    /// `3^{n+} / f`.
    prefactor: f64,
    /// Whether Z and I were exchanged on the non-ladder sites.
    mirrored: bool,
    /// Effective Z sites after mirroring, ascending.
    z_sites: Vec<usize>,
    beta: Vec<f64>,
}

impl StringEstimator {
    pub fn new(s: &OperatorString, cache: &SpectrumCache) -> Result<Self> {
        let canon = canonicalize(s)?;
        let v = s.volume();
        if v % 2 == 1 {
            return Err(Error::OddVolume(v));
        }
        let v_prime = canon.v_prime();
        let spectrum = cache.get(v_prime, canon.n_z)?;
        let letters = s.to_letters();
        let mirrored = canon.n_z > v_prime - canon.n_z;
        let is_z: Vec<bool> = letters
            .iter()
            .map(|l| match l {
                Letter::Z => !mirrored,
                Letter::Identity => mirrored,
                _ => false,
            })
            .collect();
        let z_sites = (0..v).filter(|s| is_z[*s]).collect();
        let prefactor = 3f64.powi(canon.n_plus as i32) / pairing_fraction(v, canon.n_plus);
        Ok(Self {
            canon,
            letters,
            prefactor,
            mirrored,
            z_sites,
            beta: spectrum.beta.clone(),
        })
    }

    pub fn canonical(&self) -> &CanonicalForm {
        &self.canon
    }

    pub fn volume(&self) -> usize {
        self.letters.len()
    }

    /// Estimate on one row.
    pub fn evaluate(&self, view: &SampleView) -> C64 {
        let bits = &view.sample.bits;
        let mut census = view.census;
        let mut value = C64::new(self.prefactor, 0.0);
        let mut ladder_particles = 0;
        for r in self.canon.raise_sites() {
            let p = view.partner[r];
            if self.letters[p] != Letter::Lower {
                return C64::new(0.0, 0.0);
            }
            value *= view.column(r, |s| self.letters[s]);
            let (b_i, b_j) = view.outcome(r);
            census.remove(b_i, b_j);
            ladder_particles += b_i as usize + b_j as usize;
        }
        if value == C64::new(0.0, 0.0) {
            return value;
        }
        if self.mirrored {
            let particles = bits.iter().filter(|b| **b).count() - ladder_particles;
            if particles % 2 == 1 {
                value = -value;
            }
        }
        let n_z = self.z_sites.len();
        if n_z == 0 {
            return value * self.beta[0];
        }

        let mut columns: Vec<ColumnA> = Vec::with_capacity(n_z);
        let mut column_of_slot = Vec::with_capacity(n_z);
        let mut id_slots = 0;
        for (z_slot, &z) in self.z_sites.iter().enumerate() {
            let k = view.slot[z];
            if let Some(pos) = column_of_slot.iter().position(|c: &(usize, usize)| c.0 == k) {
                let c = &mut columns[column_of_slot[pos].1];
                let side = usize::from(view.sample.pairing.pairs[k].1 == z);
                c.z_slot[side] = Some(z_slot);
                // the column turned out to hold two Zs
                c.id_slot = None;
                id_slots -= 1;
                continue;
            }
            let (i, j) = view.sample.pairing.pairs[k];
            let (b_i, b_j) = (bits[i], bits[j]);
            census.remove(b_i, b_j);
            let gate = &view.gates[k];
            let letter = |z: bool| if z { Letter::Z } else { Letter::Identity };
            let mut values = [C64::new(0.0, 0.0); 4];
            for (p, v) in values.iter_mut().enumerate() {
                *v = column_value(gate, b_i, b_j, letter(p >= 2), letter(p % 2 == 1));
            }
            let side = usize::from(j == z);
            let mut z_slot_pair = [None, None];
            z_slot_pair[side] = Some(z_slot);
            column_of_slot.push((k, columns.len()));
            columns.push(ColumnA {
                values,
                z_slot: z_slot_pair,
                id_slot: Some(id_slots),
                id_side: 1 - side,
            });
            id_slots += 1;
        }
        // identity slots are numbered in column order once all pairs are known
        let mut next = 0;
        for c in columns.iter_mut() {
            if c.id_slot.is_some() {
                c.id_slot = Some(next);
                next += 1;
            }
        }
        debug_assert_eq!(next, id_slots);

        let h: Vec<f64> = (0..=n_z).map(|k_b| h_function(&census, k_b)).collect();
        let mut sum = C64::new(0.0, 0.0);
        for d in 0..=n_z {
            if self.beta[d] == 0.0 {
                continue;
            }
            let mut shell = C64::new(0.0, 0.0);
            for k_a in 0..=d.min(id_slots) {
                let hb = h[d - k_a];
                if hb == 0.0 {
                    continue;
                }
                let mut a_sum = C64::new(0.0, 0.0);
                for sa in region_a_strings(n_z, id_slots, d, k_a) {
                    let mut prod = C64::new(1.0, 0.0);
                    for c in &columns {
                        let mut z = [false; 2];
                        for side in 0..2 {
                            if let Some(s) = c.z_slot[side] {
                                z[side] = (sa.z_removed >> s) & 1 == 0;
                            }
                        }
                        if let Some(t) = c.id_slot {
                            z[c.id_side] = (sa.z_added >> t) & 1 == 1;
                        }
                        prod *= c.values[2 * z[0] as usize + z[1] as usize];
                    }
                    a_sum += prod;
                }
                shell += a_sum * hb;
            }
            sum += shell * self.beta[d];
        }
        value * sum
    }
}

/// Estimate of `s` from one row.
pub fn estimate_sample(sample: &ShadowSample, s: &OperatorString, cache: &SpectrumCache) -> Result<C64> {
    if s.volume() != sample.volume() {
        return Err(Error::VolumeMismatch(s.volume(), sample.volume()));
    }
    Ok(StringEstimator::new(s, cache)?.evaluate(&SampleView::new(sample)))
}

/// Reference estimator: sums every string of the inverse-channel expansion
/// explicitly, each evaluated from the full two-site matrices.
pub fn naive_estimate_sample(sample: &ShadowSample, s: &OperatorString, cache: &SpectrumCache) -> Result<C64> {
    let v = s.volume();
    if v != sample.volume() {
        return Err(Error::VolumeMismatch(v, sample.volume()));
    }
    let canon = canonicalize(s)?;
    let v_prime = canon.v_prime();
    if v_prime > NAIVE_MAX_VOLUME {
        return Err(Error::CapExceeded {
            what: "naive estimator volume",
            value: v_prime,
            cap: NAIVE_MAX_VOLUME,
        });
    }
    let spectrum = cache.get(v_prime, canon.n_z)?;
    let base = s.to_letters();
    let free: Vec<usize> = (0..v)
        .filter(|s| matches!(base[*s], Letter::Identity | Letter::Z))
        .collect();
    let target: u64 = free
        .iter()
        .enumerate()
        .filter(|(_, s)| base[**s] == Letter::Z)
        .map(|(k, _)| 1u64 << k)
        .sum();
    let gates: Vec<TwoBodyGate> = sample.gates.iter().map(|g| g.gate()).collect();
    let prefactor = 3f64.powi(canon.n_plus as i32) / pairing_fraction(v, canon.n_plus);
    let mut total = C64::new(0.0, 0.0);
    for t in subset_masks(v_prime, canon.n_z) {
        let d = (target & !t).count_ones() as usize;
        let mut letters = base.clone();
        for (k, &site) in free.iter().enumerate() {
            letters[site] = if (t >> k) & 1 == 1 { Letter::Z } else { Letter::Identity };
        }
        let mut prod = C64::new(1.0, 0.0);
        for (&(i, j), g) in sample.pairing.pairs.iter().zip(&gates) {
            prod *= pair_expectation(g, sample.bits[i], sample.bits[j], letters[i], letters[j]);
        }
        total += prod * spectrum.beta[d];
    }
    Ok(total * prefactor)
}
