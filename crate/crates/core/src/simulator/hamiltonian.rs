//! Two-leg ladder of hardcore bosons with an attractive rung interaction.
//!
//! `H = -t Σ_i [a†_i a_{i+1} + b†_i b_{i+1} + a†_i b_i + h.c.] - U Σ_i n^a_i n^b_i`
//! with periodic boundaries along the legs. Leg `a` site `i` is site `2i`, leg `b`
//! site `i` is `2i + 1`.

use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simulator::basis::{FockBasis, DEFAULT_HILBERT_CAP};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LadderModel {
    pub rungs: usize,
    pub hopping: f64,
    pub interaction: f64,
    /// Particles per site as `(numerator, denominator)`.
    pub filling: (usize, usize),
}

impl LadderModel {
    /// Quarter filling.
    pub fn new(rungs: usize, hopping: f64, interaction: f64) -> Self {
        Self {
            rungs,
            hopping,
            interaction,
            filling: (1, 4),
        }
    }

    pub fn with_filling(mut self, num: usize, den: usize) -> Self {
        self.filling = (num, den);
        self
    }

    pub fn volume(&self) -> usize {
        2 * self.rungs
    }

    pub fn particles(&self) -> Result<usize> {
        let (num, den) = self.filling;
        let v = self.volume();
        if den == 0 || !(num * v).is_multiple_of(den) || num * v / den > v {
            return Err(Error::NonIntegerFilling {
                num,
                den,
                volume: v,
            });
        }
        Ok(num * v / den)
    }

    pub fn site_a(&self, rung: usize) -> usize {
        2 * (rung % self.rungs)
    }

    pub fn site_b(&self, rung: usize) -> usize {
        2 * (rung % self.rungs) + 1
    }

    /// Hopping bonds, one entry per term of the sum.
    ///
    /// With two rungs the periodic leg bond appears twice; with one rung the
    /// leg bonds are self-loops and are dropped.
    pub fn bonds(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.rungs {
            for (p, q) in [
                (self.site_a(i), self.site_a(i + 1)),
                (self.site_b(i), self.site_b(i + 1)),
                (self.site_a(i), self.site_b(i)),
            ] {
                if p != q {
                    out.push((p, q));
                }
            }
        }
        out
    }

    pub fn basis(&self) -> Result<FockBasis> {
        self.basis_with_cap(DEFAULT_HILBERT_CAP)
    }

    pub fn basis_with_cap(&self, cap: usize) -> Result<FockBasis> {
        if self.rungs == 0 {
            return Err(Error::InvalidArgument("ladder needs at least one rung".into()));
        }
        FockBasis::with_cap(self.volume(), self.particles()?, cap)
    }
}

/// Real symmetric sparse matrix in compressed-row form.
#[derive(Debug, Clone)]
pub struct Hamiltonian {
    basis: Arc<FockBasis>,
    row_start: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
}

pub fn build_hamiltonian(model: &LadderModel, basis: Arc<FockBasis>) -> Result<Hamiltonian> {
    if basis.volume() != model.volume() || basis.particles() != model.particles()? {
        return Err(Error::InvalidArgument("basis does not match model".into()));
    }
    let bonds = model.bonds();
    let (t, u) = (model.hopping, model.interaction);
    let mut row_start = Vec::with_capacity(basis.dim() + 1);
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    let mut row: Vec<(u32, f64)> = Vec::new();
    row_start.push(0);
    for (k, &x) in basis.states().iter().enumerate() {
        row.clear();
        let pairs = (0..model.rungs)
            .filter(|&i| (x >> model.site_a(i)) & 1 == 1 && (x >> model.site_b(i)) & 1 == 1)
            .count();
        if pairs > 0 {
            row.push((k as u32, -u * pairs as f64));
        }
        for &(p, q) in &bonds {
            if (x >> p) & 1 != (x >> q) & 1 {
                let y = x ^ ((1 << p) | (1 << q));
                row.push((basis.index_of(y).expect("hop stays in sector") as u32, -t));
            }
        }
        row.sort_by_key(|e| e.0);
        let mut last: Option<u32> = None;
        for &(c, v) in &row {
            if last == Some(c) {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(c);
                vals.push(v);
                last = Some(c);
            }
        }
        row_start.push(cols.len());
    }
    Ok(Hamiltonian {
        basis,
        row_start,
        cols,
        vals,
    })
}

impl Hamiltonian {
    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// `out = H x`.
    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        for (r, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for e in self.row_start[r]..self.row_start[r + 1] {
                acc += self.vals[e] * x[self.cols[e] as usize];
            }
            *o = acc;
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for r in 0..n {
            for e in self.row_start[r]..self.row_start[r + 1] {
                m[(r, self.cols[e] as usize)] += self.vals[e];
            }
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spectrum(model: LadderModel) -> Vec<f64> {
        let basis = Arc::new(model.basis().unwrap());
        let h = build_hamiltonian(&model, basis).unwrap();
        let mut e: Vec<f64> = h.to_dense().symmetric_eigen().eigenvalues.iter().copied().collect();
        e.sort_by(f64::total_cmp);
        e
    }

    #[test]
    fn single_rung_single_particle() {
        let e = spectrum(LadderModel::new(1, 1.0, 0.0).with_filling(1, 2));
        assert_eq!(e.len(), 2);
        assert!((e[0] + 1.0).abs() < 1e-14 && (e[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn two_rungs_single_particle_matches_hand_matrix() {
        // sites a0=0 b0=1 a1=2 b1=3; leg bonds doubled by periodicity
        let e = spectrum(LadderModel::new(2, 1.0, 0.0).with_filling(1, 4));
        let mut hand = DMatrix::<f64>::zeros(4, 4);
        for (p, q, w) in [(0, 2, 2.0), (1, 3, 2.0), (0, 1, 1.0), (2, 3, 1.0)] {
            hand[(p, q)] = -w;
            hand[(q, p)] = -w;
        }
        let mut want: Vec<f64> = hand.symmetric_eigen().eigenvalues.iter().copied().collect();
        want.sort_by(f64::total_cmp);
        for (a, b) in e.iter().zip(&want) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn interaction_is_diagonal_on_rung_pairs() {
        let model = LadderModel::new(2, 0.0, 3.0).with_filling(1, 2);
        let basis = Arc::new(model.basis().unwrap());
        let h = build_hamiltonian(&model, Arc::clone(&basis)).unwrap().to_dense();
        let k = basis.index_of(0b0011).unwrap();
        assert_eq!(h[(k, k)], -3.0);
        let k = basis.index_of(0b0101).unwrap();
        assert_eq!(h[(k, k)], 0.0);
    }

    #[test]
    fn hamiltonian_is_symmetric() {
        let model = LadderModel::new(4, 1.0, 2.0);
        let basis = Arc::new(model.basis().unwrap());
        let h = build_hamiltonian(&model, basis).unwrap().to_dense();
        assert_eq!(h.clone(), h.transpose());
    }

    #[test]
    fn filling_must_be_integer() {
        let model = LadderModel::new(3, 1.0, 0.0);
        assert!(matches!(model.particles(), Err(Error::NonIntegerFilling { .. })));
        assert_eq!(LadderModel::new(8, 1.0, 0.0).particles().unwrap(), 4);
        assert_eq!(LadderModel::new(12, 1.0, 0.0).particles().unwrap(), 6);
    }
}
