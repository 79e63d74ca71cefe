//! Number-conserving operator strings over `{I, Z, a†, a}`.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::combinatorics::subset_masks;
use crate::error::{Error, Result};
use crate::C64;

/// Single-site operator. `Raise` is `a†`, `Lower` is `a`, and `Z = 1 - 2 a†a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Letter {
    #[serde(rename = "I")]
    Identity,
    #[serde(rename = "Z")]
    Z,
    #[serde(rename = "a+")]
    Raise,
    #[serde(rename = "a-")]
    Lower,
}

impl Letter {
    pub const ALL: [Letter; 4] = [Letter::Identity, Letter::Z, Letter::Raise, Letter::Lower];

    pub fn symbol(self) -> &'static str {
        match self {
            Letter::Identity => "I",
            Letter::Z => "Z",
            Letter::Raise => "a+",
            Letter::Lower => "a-",
        }
    }

    pub fn parse(s: &str) -> Option<Letter> {
        match s {
            "I" => Some(Letter::Identity),
            "Z" => Some(Letter::Z),
            "a+" => Some(Letter::Raise),
            "a-" => Some(Letter::Lower),
            _ => None,
        }
    }

    pub fn adjoint(self) -> Letter {
        match self {
            Letter::Raise => Letter::Lower,
            Letter::Lower => Letter::Raise,
            x => x,
        }
    }

    pub fn is_diagonal(self) -> bool {
        matches!(self, Letter::Identity | Letter::Z)
    }

    /// 2×2 matrix in the `(|0⟩, |1⟩)` occupation basis.
    pub fn matrix(self) -> [[C64; 2]; 2] {
        let o = C64::new(1.0, 0.0);
        let z = C64::new(0.0, 0.0);
        match self {
            Letter::Identity => [[o, z], [z, o]],
            Letter::Z => [[o, z], [z, -o]],
            Letter::Raise => [[z, z], [o, z]],
            Letter::Lower => [[z, o], [z, z]],
        }
    }

    /// `Tr[L† L]`.
    pub fn hs_norm(self) -> f64 {
        if self.is_diagonal() {
            2.0
        } else {
            1.0
        }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// A tensor product of letters on `volume` sites; unlisted sites carry identity.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OperatorString {
    volume: usize,
    letters: BTreeMap<usize, Letter>,
}

impl OperatorString {
    pub fn identity(volume: usize) -> Self {
        Self {
            volume,
            letters: BTreeMap::new(),
        }
    }

    /// Build from `(site, letter)` pairs. Later entries for the same site win.
    pub fn new(volume: usize, letters: impl IntoIterator<Item = (usize, Letter)>) -> Result<Self> {
        let mut out = Self::identity(volume);
        for (site, letter) in letters {
            out.set(site, letter)?;
        }
        Ok(out)
    }

    /// One letter per site.
    pub fn from_letters(letters: &[Letter]) -> Self {
        Self {
            volume: letters.len(),
            letters: letters
                .iter()
                .enumerate()
                .filter(|(_, l)| **l != Letter::Identity)
                .map(|(i, l)| (i, *l))
                .collect(),
        }
    }

    pub fn set(&mut self, site: usize, letter: Letter) -> Result<()> {
        if site >= self.volume {
            return Err(Error::SiteOutOfRange {
                site,
                volume: self.volume,
            });
        }
        if letter == Letter::Identity {
            self.letters.remove(&site);
        } else {
            self.letters.insert(site, letter);
        }
        Ok(())
    }

    pub fn volume(&self) -> usize {
        self.volume
    }

    pub fn get(&self, site: usize) -> Letter {
        self.letters.get(&site).copied().unwrap_or(Letter::Identity)
    }

    /// Non-identity letters in ascending site order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, Letter)> + '_ {
        self.letters.iter().map(|(s, l)| (*s, *l))
    }

    pub fn to_letters(&self) -> Vec<Letter> {
        (0..self.volume).map(|s| self.get(s)).collect()
    }

    fn count(&self, letter: Letter) -> usize {
        self.letters.values().filter(|l| **l == letter).count()
    }

    pub fn n_plus(&self) -> usize {
        self.count(Letter::Raise)
    }

    pub fn n_minus(&self) -> usize {
        self.count(Letter::Lower)
    }

    pub fn n_z(&self) -> usize {
        self.count(Letter::Z)
    }

    pub fn weight(&self) -> usize {
        self.letters.len()
    }

    pub fn is_conserving(&self) -> bool {
        self.n_plus() == self.n_minus()
    }

    pub fn is_diagonal(&self) -> bool {
        self.letters.values().all(|l| l.is_diagonal())
    }

    pub fn adjoint(&self) -> Self {
        Self {
            volume: self.volume,
            letters: self.letters.iter().map(|(s, l)| (*s, l.adjoint())).collect(),
        }
    }

    /// Sites carrying `Z`, ascending.
    pub fn z_sites(&self) -> Vec<usize> {
        self.sites_with(Letter::Z)
    }

    pub fn sites_with(&self, letter: Letter) -> Vec<usize> {
        self.letters
            .iter()
            .filter(|(_, l)| **l == letter)
            .map(|(s, _)| *s)
            .collect()
    }

    /// Relabel sites: the letter on site `s` moves to `perm[s]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.volume);
        Self {
            volume: self.volume,
            letters: self.letters.iter().map(|(s, l)| (perm[*s], *l)).collect(),
        }
    }

    /// `{"<site>": "I|Z|a+|a-"}` map used in observable files.
    pub fn to_ops_map(&self) -> BTreeMap<String, String> {
        self.letters
            .iter()
            .map(|(s, l)| (s.to_string(), l.symbol().to_string()))
            .collect()
    }

    pub fn from_ops_map(volume: usize, ops: &BTreeMap<String, String>) -> Result<Self> {
        let mut out = Self::identity(volume);
        for (key, value) in ops {
            let site: usize = key
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("invalid site key {key:?}")))?;
            let letter = Letter::parse(value.trim())
                .ok_or_else(|| Error::Parse(format!("invalid letter {value:?} at site {site}")))?;
            out.set(site, letter)?;
        }
        Ok(out)
    }
}

impl fmt::Display for OperatorString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "I");
        }
        let mut first = true;
        for (s, l) in &self.letters {
            if !first {
                f.write_str(" ")?;
            }
            write!(f, "{l}{s}")?;
            first = false;
        }
        Ok(())
    }
}

/// Relabelling of a string into `(a†⊗a)^{⊗n+} ⊗ Z^{⊗n_z} ⊗ I^{⊗(V-w)}`.
///
/// Raise letters sit at even slots `0, 2, ...`, their matched Lower letters at
/// the following odd slot. The `k`-th Raise (by site index) is matched with the
/// `k`-th Lower. Z letters and identities follow, each group in ascending site order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanonicalForm {
    pub volume: usize,
    pub n_plus: usize,
    pub n_z: usize,
    /// `site_map[site]` is the canonical slot of `site`.
    pub site_map: Vec<usize>,
    /// Inverse of `site_map`.
    pub slots: Vec<usize>,
}

impl CanonicalForm {
    pub fn weight(&self) -> usize {
        2 * self.n_plus + self.n_z
    }

    /// Volume left for the `{I, Z}` part once ladder pairs are removed.
    pub fn v_prime(&self) -> usize {
        self.volume - 2 * self.n_plus
    }

    pub fn raise_sites(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n_plus).map(|k| self.slots[2 * k])
    }

    pub fn lower_sites(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n_plus).map(|k| self.slots[2 * k + 1])
    }

    pub fn z_sites(&self) -> &[usize] {
        &self.slots[2 * self.n_plus..self.weight()]
    }

    pub fn identity_sites(&self) -> &[usize] {
        &self.slots[self.weight()..]
    }

    pub fn letter_at_slot(&self, slot: usize) -> Letter {
        if slot < 2 * self.n_plus {
            if slot.is_multiple_of(2) {
                Letter::Raise
            } else {
                Letter::Lower
            }
        } else if slot < self.weight() {
            Letter::Z
        } else {
            Letter::Identity
        }
    }

    /// Per-site letters of the original string.
    pub fn letters(&self) -> Vec<Letter> {
        (0..self.volume)
            .map(|s| self.letter_at_slot(self.site_map[s]))
            .collect()
    }

    /// The string after relabelling, `S∘`.
    pub fn canonical_string(&self) -> OperatorString {
        let letters: Vec<Letter> = (0..self.volume).map(|s| self.letter_at_slot(s)).collect();
        OperatorString::from_letters(&letters)
    }

    pub fn original_string(&self) -> OperatorString {
        OperatorString::from_letters(&self.letters())
    }
}

/// Canonicalise a number-conserving string.
pub fn canonicalize(s: &OperatorString) -> Result<CanonicalForm> {
    let raise = s.sites_with(Letter::Raise);
    let lower = s.sites_with(Letter::Lower);
    if raise.len() != lower.len() {
        return Err(Error::NonConserving {
            raise: raise.len(),
            lower: lower.len(),
        });
    }
    let z = s.z_sites();
    let mut slots = Vec::with_capacity(s.volume());
    for (r, l) in raise.iter().zip(&lower) {
        slots.push(*r);
        slots.push(*l);
    }
    slots.extend_from_slice(&z);
    slots.extend((0..s.volume()).filter(|site| s.get(*site) == Letter::Identity));
    let mut site_map = vec![0; s.volume()];
    for (slot, site) in slots.iter().enumerate() {
        site_map[*site] = slot;
    }
    Ok(CanonicalForm {
        volume: s.volume(),
        n_plus: raise.len(),
        n_z: z.len(),
        site_map,
        slots,
    })
}

/// Number of Z positions in `a` that are not Z in `b`.
pub fn swap_distance(a: &OperatorString, b: &OperatorString) -> Result<usize> {
    if a.volume() != b.volume() {
        return Err(Error::VolumeMismatch(a.volume(), b.volume()));
    }
    if !a.is_diagonal() || !b.is_diagonal() {
        return Err(Error::NotDiagonal);
    }
    if a.n_z() != b.n_z() {
        return Err(Error::MismatchedZCount(a.n_z(), b.n_z()));
    }
    Ok(a.iter().filter(|(s, _)| b.get(*s) != Letter::Z).count())
}

/// One region-A modification: bit `k` of `z_removed` turns the `k`-th Z slot
/// into an identity, bit `k` of `z_added` turns the `k`-th identity slot into a Z.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RegionAString {
    pub z_removed: u64,
    pub z_added: u64,
}

/// Every way to remove `d` of the `n_z_in_a` Z letters and add `k_a` Z letters
/// on the `identity_slots_in_a` identity slots.
///
/// Ordered by removal mask, then addition mask, both ascending.
pub fn region_a_strings(
    n_z_in_a: usize,
    identity_slots_in_a: usize,
    d: usize,
    k_a: usize,
) -> impl Iterator<Item = RegionAString> {
    let feasible = d <= n_z_in_a && k_a <= identity_slots_in_a && k_a <= d;
    let (nr, na) = if feasible {
        (n_z_in_a, identity_slots_in_a)
    } else {
        (0, 0)
    };
    let (d, k_a) = if feasible { (d, k_a) } else { (1, 1) };
    subset_masks(nr, d).flat_map(move |removed| {
        subset_masks(na, k_a).map(move |added| RegionAString {
            z_removed: removed,
            z_added: added,
        })
    })
}
