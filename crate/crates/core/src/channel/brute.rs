//! Brute-force channel superoperator on `{I, Z}^{⊗V}`, averaged over every pairing.

use nalgebra::DMatrix;

use crate::combinatorics::{all_pairings, rank, subset_masks};
use crate::error::{Error, Result};

/// Largest volume the dense superoperator is built for.
pub const MAX_BRUTE_VOLUME: usize = 10;

/// Dense channel on diagonal strings. Index `s` is the Z mask; `matrix[(out, in)]`.
#[derive(Debug, Clone)]
pub struct BruteChannel {
    pub volume: usize,
    pub matrix: DMatrix<f64>,
}

/// Build the channel by averaging the two-site rule over every pairing.
///
/// On a pair, `II` and `ZZ` are fixed while `ZI` goes to `(2/3) ZI + (1/3) IZ`.
pub fn brute_force_channel(volume: usize) -> Result<BruteChannel> {
    if volume % 2 == 1 {
        return Err(Error::OddVolume(volume));
    }
    if volume > MAX_BRUTE_VOLUME {
        return Err(Error::CapExceeded {
            what: "brute-force channel volume",
            value: volume,
            cap: MAX_BRUTE_VOLUME,
        });
    }
    let dim = 1usize << volume;
    let pairings = all_pairings(volume)?;
    let weight = 1.0 / pairings.len() as f64;
    let mut matrix = DMatrix::zeros(dim, dim);
    for pairing in &pairings {
        for s in 0..dim as u64 {
            let mixed: Vec<(usize, usize)> = pairing
                .iter()
                .copied()
                .filter(|(i, j)| (s >> i) & 1 != (s >> j) & 1)
                .collect();
            for flips in 0..1u64 << mixed.len() {
                let mut out = s;
                let mut p = weight;
                for (k, (i, j)) in mixed.iter().enumerate() {
                    if (flips >> k) & 1 == 1 {
                        out ^= (1 << i) | (1 << j);
                        p /= 3.0;
                    } else {
                        p *= 2.0 / 3.0;
                    }
                }
                matrix[(out as usize, s as usize)] += p;
            }
        }
    }
    Ok(BruteChannel { volume, matrix })
}

/// Z masks of the sector with `n_z` Z letters, in colex order.
pub fn sector_strings(volume: usize, n_z: usize) -> Vec<u64> {
    subset_masks(volume, n_z).collect()
}

impl BruteChannel {
    /// Restriction to one `n_z` sector, rows and columns in [`sector_strings`] order.
    pub fn sector(&self, n_z: usize) -> DMatrix<f64> {
        let strings = sector_strings(self.volume, n_z);
        DMatrix::from_fn(strings.len(), strings.len(), |r, c| {
            self.matrix[(strings[r] as usize, strings[c] as usize)]
        })
    }

    /// Sorted eigenvalues of one sector.
    pub fn sector_eigenvalues(&self, n_z: usize) -> Vec<f64> {
        let mut e: Vec<f64> = self.sector(n_z).symmetric_eigen().eigenvalues.iter().copied().collect();
        e.sort_by(|a, b| b.total_cmp(a));
        e
    }
}

/// `D[s, t] = weights[dist(s, t)]` on one `n_z` sector; zero past the end of `weights`.
pub fn delocalization_matrix(volume: usize, n_z: usize, weights: &[f64]) -> DMatrix<f64> {
    let strings = sector_strings(volume, n_z);
    debug_assert!(strings.iter().enumerate().all(|(i, s)| rank(*s) == i as u64));
    DMatrix::from_fn(strings.len(), strings.len(), |r, c| {
        let d = (strings[r] & !strings[c]).count_ones() as usize;
        weights.get(d).copied().unwrap_or(0.0)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{alpha_vec, beta_vec, eigenvalues, irrep_dimension, reduced_sector};
    use approx::assert_relative_eq;

    #[test]
    fn two_sites() {
        let ch = brute_force_channel(2).unwrap();
        // Z on site 0 -> 2/3 Z0 + 1/3 Z1
        assert_relative_eq!(ch.matrix[(0b01, 0b01)], 2.0 / 3.0);
        assert_relative_eq!(ch.matrix[(0b10, 0b01)], 1.0 / 3.0);
        assert_relative_eq!(ch.matrix[(0b11, 0b11)], 1.0);
        assert_relative_eq!(ch.matrix[(0, 0)], 1.0);
    }

    #[test]
    fn columns_are_stochastic_and_symmetric() {
        let ch = brute_force_channel(6).unwrap();
        for c in 0..64 {
            let sum: f64 = ch.matrix.column(c).sum();
            assert_relative_eq!(sum, 1.0, epsilon = 1e-12);
        }
        assert!((&ch.matrix - ch.matrix.transpose()).amax() < 1e-14);
    }

    #[test]
    fn sector_matches_alpha_delocalization() {
        for v in [2usize, 4, 6, 8] {
            let ch = brute_force_channel(v).unwrap();
            for n_z in 0..=v {
                let d = delocalization_matrix(v, n_z, &alpha_vec(v, n_z));
                assert!((ch.sector(n_z) - d).amax() < 1e-13, "v={v} n_z={n_z}");
            }
        }
    }

    #[test]
    fn spectrum_matches_irreps() {
        for v in [4usize, 6, 8] {
            let ch = brute_force_channel(v).unwrap();
            for n_z in 0..=v {
                let c = eigenvalues(v, n_z);
                let mut want = Vec::new();
                for l2 in 0..=reduced_sector(v, n_z) {
                    want.extend(std::iter::repeat_n(c[l2], irrep_dimension(v, l2)));
                }
                want.sort_by(|a, b| b.total_cmp(a));
                let got = ch.sector_eigenvalues(n_z);
                assert_eq!(got.len(), want.len());
                for (g, w) in got.iter().zip(&want) {
                    assert_relative_eq!(*g, *w, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn beta_inverts_alpha() {
        for v in [2usize, 4, 6, 8] {
            for n_z in 0..=v {
                let a = delocalization_matrix(v, n_z, &alpha_vec(v, n_z));
                let b = delocalization_matrix(v, n_z, &beta_vec(v, n_z).unwrap());
                let id = DMatrix::identity(a.nrows(), a.ncols());
                assert!((&b * &a - &id).amax() < 1e-11, "v={v} n_z={n_z}");
            }
        }
    }

    #[test]
    fn permutation_covariant() {
        let ch = brute_force_channel(4).unwrap();
        // relabel 0<->2 on every mask
        let perm = |s: usize| {
            let b0 = s & 1;
            let b2 = (s >> 2) & 1;
            (s & !0b101) | (b0 << 2) | b2
        };
        for r in 0..16 {
            for c in 0..16 {
                assert_relative_eq!(ch.matrix[(r, c)], ch.matrix[(perm(r), perm(c))]);
            }
        }
    }

    #[test]
    fn rejects_large_or_odd() {
        assert!(matches!(brute_force_channel(3), Err(Error::OddVolume(3))));
        assert!(brute_force_channel(12).is_err());
    }
}
