//! Number-conserving two-site gates and their single-pair expectation values.
//!
//! Two-site basis order is `|n_i n_j⟩ = |00⟩, |01⟩, |10⟩, |11⟩`, with site `i` the
//! high bit. A gate is block diagonal: a phase on `|00⟩`, a 2×2 unitary on
//! `(|01⟩, |10⟩)` and a phase on `|11⟩`.

use std::f64::consts::{FRAC_1_SQRT_2, TAU};
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::opstrings::Letter;
use crate::C64;

const UNITARY_TOL: f64 = 1e-12;

/// Block-diagonal number-conserving gate on one pair of sites.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoBodyGate {
    pub phase0: C64,
    /// Rows and columns ordered `(|01⟩, |10⟩)`.
    pub block: [[C64; 2]; 2],
    pub phase2: C64,
}

impl TwoBodyGate {
    pub fn identity() -> Self {
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        Self {
            phase0: one,
            block: [[one, zero], [zero, one]],
            phase2: one,
        }
    }

    /// Build a gate, checking unitarity to `tol`.
    pub fn new(phase0: C64, block: [[C64; 2]; 2], phase2: C64, tol: f64) -> Result<Self> {
        let g = Self {
            phase0,
            block,
            phase2,
        };
        if g.unitarity_error() > tol {
            return Err(Error::InvalidArgument(format!(
                "gate is not unitary (error {:.2e})",
                g.unitarity_error()
            )));
        }
        Ok(g)
    }

    /// Largest deviation of `block† block` from identity and of the phases from unit modulus.
    pub fn unitarity_error(&self) -> f64 {
        let b = &self.block;
        let mut err: f64 = (self.phase0.norm() - 1.0).abs().max((self.phase2.norm() - 1.0).abs());
        for r in 0..2 {
            for c in 0..2 {
                let dot = b[0][r].conj() * b[0][c] + b[1][r].conj() * b[1][c];
                let want = if r == c { 1.0 } else { 0.0 };
                err = err.max((dot - want).norm());
            }
        }
        err
    }

    pub fn is_unitary(&self) -> bool {
        self.unitarity_error() <= UNITARY_TOL
    }

    /// Full 4×4 matrix in the `|00⟩, |01⟩, |10⟩, |11⟩` basis.
    pub fn matrix(&self) -> [[C64; 4]; 4] {
        let mut m = [[C64::new(0.0, 0.0); 4]; 4];
        m[0][0] = self.phase0;
        m[3][3] = self.phase2;
        for r in 0..2 {
            for c in 0..2 {
                m[r + 1][c + 1] = self.block[r][c];
            }
        }
        m
    }

    pub fn compose(&self, other: &TwoBodyGate) -> TwoBodyGate {
        let a = &self.block;
        let b = &other.block;
        let mut block = [[C64::new(0.0, 0.0); 2]; 2];
        for r in 0..2 {
            for c in 0..2 {
                block[r][c] = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        TwoBodyGate {
            phase0: self.phase0 * other.phase0,
            block,
            phase2: self.phase2 * other.phase2,
        }
    }
}

/// The three fixed gates: identity, `√iSWAP` and `√iSWAP·(S⊗I)`.
pub fn discrete_gates() -> [TwoBodyGate; 3] {
    let s = FRAC_1_SQRT_2;
    let re = |x: f64| C64::new(x, 0.0);
    let im = |x: f64| C64::new(0.0, x);
    let sqrt_iswap = TwoBodyGate {
        phase0: re(1.0),
        block: [[re(s), im(s)], [im(s), re(s)]],
        phase2: re(1.0),
    };
    // S⊗I puts phase i on |10⟩ and |11⟩
    let with_phase = TwoBodyGate {
        phase0: re(1.0),
        block: [[re(s), re(-s)], [im(s), im(s)]],
        phase2: im(1.0),
    };
    [TwoBodyGate::identity(), sqrt_iswap, with_phase]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateEnsemble {
    #[serde(rename = "discrete3")]
    Discrete3,
    #[serde(rename = "haar")]
    HaarBlock,
}

impl GateEnsemble {
    pub fn name(self) -> &'static str {
        match self {
            GateEnsemble::Discrete3 => "discrete3",
            GateEnsemble::HaarBlock => "haar",
        }
    }
}

impl fmt::Display for GateEnsemble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GateEnsemble {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "discrete3" => Ok(GateEnsemble::Discrete3),
            "haar" => Ok(GateEnsemble::HaarBlock),
            other => Err(Error::Parse(format!(
                "unknown ensemble `{other}` (expected discrete3 or haar)"
            ))),
        }
    }
}

/// A gate as recorded in a shadow table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GateRepr", into = "GateRepr")]
pub enum SampledGate {
    /// Index into [`discrete_gates`].
    Discrete(u8),
    Haar(TwoBodyGate),
}

impl SampledGate {
    pub fn gate(&self) -> TwoBodyGate {
        match self {
            SampledGate::Discrete(k) => discrete_gates()[*k as usize],
            SampledGate::Haar(g) => *g,
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum GateRepr {
    Index(u8),
    Full {
        p0: [f64; 2],
        p2: [f64; 2],
        b: [[f64; 2]; 4],
    },
}

impl TryFrom<GateRepr> for SampledGate {
    type Error = Error;

    fn try_from(r: GateRepr) -> Result<Self> {
        match r {
            GateRepr::Index(k) if k < 3 => Ok(SampledGate::Discrete(k)),
            GateRepr::Index(k) => Err(Error::Parse(format!("gate index {k} out of range 0..3"))),
            GateRepr::Full { p0, p2, b } => {
                let c = |x: [f64; 2]| C64::new(x[0], x[1]);
                let block = [[c(b[0]), c(b[1])], [c(b[2]), c(b[3])]];
                // serialized floats round-trip exactly, but accept hand-written gates too
                TwoBodyGate::new(c(p0), block, c(p2), 1e-9)
                    .map(SampledGate::Haar)
                    .map_err(|e| Error::Parse(e.to_string()))
            }
        }
    }
}

impl From<SampledGate> for GateRepr {
    fn from(g: SampledGate) -> Self {
        match g {
            SampledGate::Discrete(k) => GateRepr::Index(k),
            SampledGate::Haar(g) => {
                let p = |z: C64| [z.re, z.im];
                GateRepr::Full {
                    p0: p(g.phase0),
                    p2: p(g.phase2),
                    b: [
                        p(g.block[0][0]),
                        p(g.block[0][1]),
                        p(g.block[1][0]),
                        p(g.block[1][1]),
                    ],
                }
            }
        }
    }
}

/// Draw one gate.
pub fn sample_gate<R: Rng + ?Sized>(ensemble: GateEnsemble, rng: &mut R) -> SampledGate {
    match ensemble {
        GateEnsemble::Discrete3 => SampledGate::Discrete(rng.random_range(0..3u8)),
        GateEnsemble::HaarBlock => SampledGate::Haar(haar_gate(rng)),
    }
}

/// Haar-random block via Gram-Schmidt on a complex Gaussian matrix, with uniform sector phases.
pub fn haar_gate<R: Rng + ?Sized>(rng: &mut R) -> TwoBodyGate {
    let mut gauss = || C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
    let mut c0 = [gauss(), gauss()];
    let mut c1 = [gauss(), gauss()];
    let n0 = (c0[0].norm_sqr() + c0[1].norm_sqr()).sqrt();
    c0 = [c0[0] / n0, c0[1] / n0];
    let proj = c0[0].conj() * c1[0] + c0[1].conj() * c1[1];
    c1 = [c1[0] - proj * c0[0], c1[1] - proj * c0[1]];
    let n1 = (c1[0].norm_sqr() + c1[1].norm_sqr()).sqrt();
    c1 = [c1[0] / n1, c1[1] / n1];
    let phase0 = C64::from_polar(1.0, TAU * rng.random::<f64>());
    let phase2 = C64::from_polar(1.0, TAU * rng.random::<f64>());
    TwoBodyGate {
        phase0,
        block: [[c0[0], c1[0]], [c0[1], c1[1]]],
        phase2,
    }
}

fn kron(a: Letter, b: Letter) -> [[C64; 4]; 4] {
    let (ma, mb) = (a.matrix(), b.matrix());
    let mut m = [[C64::new(0.0, 0.0); 4]; 4];
    for r in 0..4 {
        for c in 0..4 {
            m[r][c] = ma[r >> 1][c >> 1] * mb[r & 1][c & 1];
        }
    }
    m
}

/// `⟨b_i b_j| U (op_i ⊗ op_j) U† |b_i b_j⟩` from the full 4×4 matrices.
pub fn pair_expectation(gate: &TwoBodyGate, b_i: bool, b_j: bool, op_i: Letter, op_j: Letter) -> C64 {
    let u = gate.matrix();
    let o = kron(op_i, op_j);
    let b = 2 * b_i as usize + b_j as usize;
    let mut acc = C64::new(0.0, 0.0);
    for k in 0..4 {
        for l in 0..4 {
            acc += u[b][k] * o[k][l] * u[b][l].conj();
        }
    }
    acc
}

/// Same value as [`pair_expectation`], read directly off the gate block.
#[inline]
pub fn column_value(gate: &TwoBodyGate, b_i: bool, b_j: bool, op_i: Letter, op_j: Letter) -> C64 {
    use Letter::*;
    let one = C64::new(1.0, 0.0);
    if b_i == b_j {
        let z = if b_i { -1.0 } else { 1.0 };
        return match (op_i, op_j) {
            (Identity, Identity) | (Z, Z) => one,
            (Z, Identity) | (Identity, Z) => C64::new(z, 0.0),
            _ => C64::new(0.0, 0.0),
        };
    }
    let row = &gate.block[b_i as usize];
    match (op_i, op_j) {
        (Identity, Identity) => one,
        (Z, Z) => -one,
        (Z, Identity) => C64::new(row[0].norm_sqr() - row[1].norm_sqr(), 0.0),
        (Identity, Z) => C64::new(row[1].norm_sqr() - row[0].norm_sqr(), 0.0),
        (Raise, Lower) => row[1] * row[0].conj(),
        (Lower, Raise) => row[0] * row[1].conj(),
        _ => C64::new(0.0, 0.0),
    }
}

/// Coefficients of the single-pair measurement channel on letter pairs.
///
/// `coeff[p][q]` is the weight of output pair `q` in the image of input pair `p`,
/// with pairs indexed `4·index(op_i) + index(op_j)` in [`Letter::ALL`] order.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoSiteChannel {
    pub coeff: [[C64; 16]; 16],
}

fn pair_index(a: Letter, b: Letter) -> usize {
    4 * letter_index(a) + letter_index(b)
}

fn letter_index(l: Letter) -> usize {
    Letter::ALL.iter().position(|x| *x == l).unwrap()
}

fn pair_letters(p: usize) -> (Letter, Letter) {
    (Letter::ALL[p / 4], Letter::ALL[p % 4])
}

impl TwoSiteChannel {
    pub fn get(&self, input: (Letter, Letter), output: (Letter, Letter)) -> C64 {
        self.coeff[pair_index(input.0, input.1)][pair_index(output.0, output.1)]
    }

    /// Largest entrywise difference.
    pub fn max_difference(&self, other: &TwoSiteChannel) -> f64 {
        let mut m: f64 = 0.0;
        for p in 0..16 {
            for q in 0..16 {
                m = m.max((self.coeff[p][q] - other.coeff[p][q]).norm());
            }
        }
        m
    }

    /// Non-zero entries as `(input, output, coefficient)`.
    pub fn entries(&self) -> Vec<((Letter, Letter), (Letter, Letter), C64)> {
        let mut out = Vec::new();
        for p in 0..16 {
            for q in 0..16 {
                if self.coeff[p][q].norm() > 1e-15 {
                    out.push((pair_letters(p), pair_letters(q), self.coeff[p][q]));
                }
            }
        }
        out
    }

    /// The expected table: `II`, `ZZ` fixed; `ZI → (2/3) ZI + (1/3) IZ`;
    /// `a†a → (1/3) a†a`; everything else vanishes.
    pub fn expected() -> Self {
        use Letter::*;
        let mut coeff = [[C64::new(0.0, 0.0); 16]; 16];
        let mut set = |p: (Letter, Letter), q: (Letter, Letter), x: f64| {
            coeff[pair_index(p.0, p.1)][pair_index(q.0, q.1)] = C64::new(x, 0.0);
        };
        set((Identity, Identity), (Identity, Identity), 1.0);
        set((Z, Z), (Z, Z), 1.0);
        set((Z, Identity), (Z, Identity), 2.0 / 3.0);
        set((Z, Identity), (Identity, Z), 1.0 / 3.0);
        set((Identity, Z), (Identity, Z), 2.0 / 3.0);
        set((Identity, Z), (Z, Identity), 1.0 / 3.0);
        set((Raise, Lower), (Raise, Lower), 1.0 / 3.0);
        set((Lower, Raise), (Lower, Raise), 1.0 / 3.0);
        Self { coeff }
    }
}

/// The single-pair channel averaged over an ensemble.
///
/// The discrete ensemble is summed exactly over its three gates and four
/// outcomes. The Haar ensemble uses the twirl of a unitary 2-design on the
/// one-particle block, `X ↦ (X + Tr X · 1)/3`, with the other sectors dephased.
pub fn two_site_channel(ensemble: GateEnsemble) -> TwoSiteChannel {
    let mut coeff = [[C64::new(0.0, 0.0); 16]; 16];
    match ensemble {
        GateEnsemble::Discrete3 => {
            let gates = discrete_gates();
            for p in 0..16 {
                let (pi, pj) = pair_letters(p);
                for q in 0..16 {
                    let (qi, qj) = pair_letters(q);
                    let norm = qi.hs_norm() * qj.hs_norm();
                    let mut acc = C64::new(0.0, 0.0);
                    for g in &gates {
                        for b in 0..4 {
                            let (bi, bj) = (b >= 2, b % 2 == 1);
                            acc += pair_expectation(g, bi, bj, pi, pj)
                                * pair_expectation(g, bi, bj, qi.adjoint(), qj.adjoint());
                        }
                    }
                    coeff[p][q] = acc / (3.0 * norm);
                }
            }
        }
        GateEnsemble::HaarBlock => {
            for p in 0..16 {
                let (pi, pj) = pair_letters(p);
                let x = kron(pi, pj);
                let mut y = [[C64::new(0.0, 0.0); 4]; 4];
                y[0][0] = x[0][0];
                y[3][3] = x[3][3];
                let tr = x[1][1] + x[2][2];
                for r in 1..3 {
                    for c in 1..3 {
                        y[r][c] = x[r][c] / 3.0;
                    }
                    y[r][r] += tr / 3.0;
                }
                for q in 0..16 {
                    let (qi, qj) = pair_letters(q);
                    let qm = kron(qi, qj);
                    // Tr[Q† Y] / Tr[Q† Q]
                    let mut acc = C64::new(0.0, 0.0);
                    for r in 0..4 {
                        for c in 0..4 {
                            acc += qm[r][c].conj() * y[r][c];
                        }
                    }
                    coeff[p][q] = acc / (qi.hs_norm() * qj.hs_norm());
                }
            }
        }
    }
    TwoSiteChannel { coeff }
}

/// Monte-Carlo estimate of the single-pair channel from `draws` sampled gates.
pub fn two_site_channel_sampled<R: Rng + ?Sized>(
    ensemble: GateEnsemble,
    draws: usize,
    rng: &mut R,
) -> TwoSiteChannel {
    let mut coeff = [[C64::new(0.0, 0.0); 16]; 16];
    for _ in 0..draws {
        let g = sample_gate(ensemble, rng).gate();
        let mut vals = [[C64::new(0.0, 0.0); 16]; 4];
        for (b, row) in vals.iter_mut().enumerate() {
            for (p, v) in row.iter_mut().enumerate() {
                let (pi, pj) = pair_letters(p);
                *v = column_value(&g, b >= 2, b % 2 == 1, pi, pj);
            }
        }
        for p in 0..16 {
            for q in 0..16 {
                let (qi, qj) = pair_letters(q);
                let norm = qi.hs_norm() * qj.hs_norm();
                let q_adj = pair_index(qi.adjoint(), qj.adjoint());
                for row in &vals {
                    coeff[p][q] += row[p] * row[q_adj] / norm;
                }
            }
        }
    }
    for row in coeff.iter_mut() {
        for x in row.iter_mut() {
            *x /= draws as f64;
        }
    }
    TwoSiteChannel { coeff }
}
