//! One round of the protocol: random pairing, one gate per pair, occupation measurement.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::table::{ShadowTable, TableHeader};
use crate::gates::{sample_gate, GateEnsemble, SampledGate};
use crate::simulator::basis::FockState;

/// Perfect matching of the sites, pairs stored as `(i, j)` with `i < j`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Pairing {
    pub pairs: Vec<(usize, usize)>,
}

impl Pairing {
    /// Validate that `pairs` covers `0..volume` exactly once with `i < j`.
    pub fn new(volume: usize, pairs: Vec<(usize, usize)>) -> Result<Self> {
        if volume % 2 == 1 {
            return Err(Error::OddVolume(volume));
        }
        let mut seen = vec![false; volume];
        for &(i, j) in &pairs {
            if i >= j || j >= volume || seen[i] || seen[j] {
                return Err(Error::InvalidArgument(format!(
                    "pair ({i}, {j}) is not a valid part of a pairing of {volume} sites"
                )));
            }
            seen[i] = true;
            seen[j] = true;
        }
        if pairs.len() * 2 != volume {
            return Err(Error::InvalidArgument(format!(
                "{} pairs do not cover {volume} sites",
                pairs.len()
            )));
        }
        Ok(Self { pairs })
    }

    pub fn volume(&self) -> usize {
        2 * self.pairs.len()
    }

    /// `partner[s]` is the site paired with `s`; `slot[s]` the index of its pair.
    pub fn partners(&self) -> (Vec<usize>, Vec<usize>) {
        let v = self.volume();
        let mut partner = vec![0; v];
        let mut slot = vec![0; v];
        for (k, &(i, j)) in self.pairs.iter().enumerate() {
            partner[i] = j;
            partner[j] = i;
            slot[i] = k;
            slot[j] = k;
        }
        (partner, slot)
    }
}

/// Uniform random pairing: match the lowest unpaired site with a uniformly chosen other.
pub fn sample_pairing<R: Rng + ?Sized>(volume: usize, rng: &mut R) -> Result<Pairing> {
    if volume % 2 == 1 {
        return Err(Error::OddVolume(volume));
    }
    let mut free: Vec<usize> = (0..volume).collect();
    let mut pairs = Vec::with_capacity(volume / 2);
    while !free.is_empty() {
        let i = free.remove(0);
        let k = rng.random_range(0..free.len());
        let j = free.remove(k);
        pairs.push((i, j));
    }
    Ok(Pairing { pairs })
}

/// One row of a shadow table.
#[derive(Debug, Clone, PartialEq)]
pub struct ShadowSample {
    pub pairing: Pairing,
    /// Aligned with `pairing.pairs`; each gate's first site is the smaller index.
    pub gates: Vec<SampledGate>,
    /// Occupation of every site after the gates.
    pub bits: Vec<bool>,
}

impl ShadowSample {
    pub fn volume(&self) -> usize {
        self.bits.len()
    }

    pub fn particles(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    pub fn bit_string(&self) -> String {
        self.bits.iter().map(|b| if *b { '1' } else { '0' }).collect()
    }
}

/// Sample occupations from `|amp|²`.
pub fn measure<R: Rng + ?Sized>(state: &FockState, rng: &mut R) -> Vec<bool> {
    let k = state.sample_index(rng.random::<f64>());
    let bits = state.basis().state(k);
    (0..state.volume()).map(|s| (bits >> s) & 1 == 1).collect()
}

/// Stream for row `index` of a table generated with `seed`.
pub fn row_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Run the protocol once on a copy of `state`.
pub fn run_protocol<R: Rng + ?Sized>(
    state: &FockState,
    ensemble: GateEnsemble,
    rng: &mut R,
) -> Result<ShadowSample> {
    let pairing = sample_pairing(state.volume(), rng)?;
    let gates: Vec<SampledGate> = pairing
        .pairs
        .iter()
        .map(|_| sample_gate(ensemble, rng))
        .collect();
    let mut evolved = state.clone();
    for (&(i, j), g) in pairing.pairs.iter().zip(&gates) {
        evolved.apply_block(&g.gate(), i, j);
    }
    let bits = measure(&evolved, rng);
    Ok(ShadowSample {
        pairing,
        gates,
        bits,
    })
}

/// Collect `samples` rows; row `k` uses [`row_rng`]`(seed, k)`, so the table
/// does not depend on scheduling.
pub fn collect_shadow(
    state: &FockState,
    ensemble: GateEnsemble,
    samples: usize,
    seed: u64,
) -> Result<ShadowTable> {
    let rows: Result<Vec<ShadowSample>> = (0..samples)
        .into_par_iter()
        .map(|k| run_protocol(state, ensemble, &mut row_rng(seed, k as u64)))
        .collect();
    let header = TableHeader::new(state.volume(), state.particles(), ensemble, seed, samples);
    ShadowTable::new(header, rows?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::all_pairings;
    use crate::simulator::basis::FockBasis;
    use crate::C64;
    use std::collections::HashMap;
    use std::sync::Arc;

    #[test]
    fn two_sites_always_pair() {
        let mut rng = row_rng(1, 0);
        for _ in 0..10 {
            assert_eq!(sample_pairing(2, &mut rng).unwrap().pairs, vec![(0, 1)]);
        }
        assert!(matches!(sample_pairing(5, &mut rng), Err(Error::OddVolume(5))));
    }

    #[test]
    fn pairings_are_uniform() {
        let mut rng = row_rng(2, 0);
        let n = 300_000;
        let mut counts: HashMap<Vec<(usize, usize)>, usize> = HashMap::new();
        for _ in 0..n {
            *counts.entry(sample_pairing(4, &mut rng).unwrap().pairs).or_default() += 1;
        }
        assert_eq!(counts.len(), 3);
        let sigma = (n as f64 * (1.0 / 3.0) * (2.0 / 3.0)).sqrt();
        for p in all_pairings(4).unwrap() {
            let c = counts[&p] as f64;
            assert!((c - n as f64 / 3.0).abs() < 3.0 * sigma, "{p:?}: {c}");
        }
    }

    #[test]
    fn pairing_validation() {
        assert!(Pairing::new(4, vec![(0, 1), (2, 3)]).is_ok());
        assert!(Pairing::new(4, vec![(0, 1), (1, 3)]).is_err());
        assert!(Pairing::new(4, vec![(1, 0), (2, 3)]).is_err());
        assert!(Pairing::new(4, vec![(0, 1)]).is_err());
    }

    #[test]
    fn bell_outcomes_are_balanced() {
        let basis = Arc::new(FockBasis::new(2, 1).unwrap());
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bell =
            FockState::from_configurations(basis, [(0b01, C64::new(s, 0.0)), (0b10, C64::new(s, 0.0))])
                .unwrap();
        let mut rng = row_rng(3, 0);
        let n = 10_000;
        let first = (0..n).filter(|_| measure(&bell, &mut rng)[0]).count() as f64;
        let sigma = (n as f64 * 0.25).sqrt();
        assert!((first - n as f64 / 2.0).abs() < 3.0 * sigma);
    }

    #[test]
    fn rows_conserve_number_and_replay() {
        let basis = Arc::new(FockBasis::new(8, 3).unwrap());
        let amps = (0..basis.dim()).map(|k| C64::new(1.0 + k as f64, 0.5)).collect();
        let psi = FockState::new(basis, amps).unwrap();
        for ensemble in [GateEnsemble::Discrete3, GateEnsemble::HaarBlock] {
            let a = collect_shadow(&psi, ensemble, 200, 17).unwrap();
            let b = collect_shadow(&psi, ensemble, 200, 17).unwrap();
            assert_eq!(a.rows, b.rows);
            assert!(a.rows.iter().all(|r| r.particles() == 3));
        }
        let empty = collect_shadow(&psi, GateEnsemble::Discrete3, 0, 1).unwrap();
        assert!(empty.rows.is_empty());
        assert_eq!(empty.header.samples, 0);
    }
}
