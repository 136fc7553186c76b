//! Index sets of polyhomogeneous expansions, truncated to a window.
//!
//! An index set `E` collects pairs `(z, k)` for terms `rho^{iz} (log rho)^k`.
//! It is closed downward in `k` and under `z -> z - i`. Only entries with
//! `Im z > -A` are stored; every operation here lowers imaginary parts, so
//! truncating before or after an operation gives the same result.

mod exponent;

pub use exponent::{Exponent, PartValue, EXPONENT_TOL};

use std::fmt;

use serde::Serialize;

use crate::{Error, Result};

/// A single pair `(z, k)`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct IndexEntry {
    pub z: Exponent,
    pub k: u32,
}

impl IndexEntry {
    pub fn new(z: Exponent, k: u32) -> Self {
        IndexEntry { z, k }
    }
}

/// Finite map `z -> max k`; no closure is implied.
#[derive(Clone, Debug, Default)]
struct LogMap {
    items: Vec<(Exponent, u32)>,
}

impl LogMap {
    fn get(&self, z: &Exponent) -> Option<u32> {
        self.items.iter().find(|(w, _)| w.same(z)).map(|&(_, k)| k)
    }

    fn raise(&mut self, z: Exponent, k: u32) {
        match self.items.iter_mut().find(|(w, _)| w.same(&z)) {
            Some(slot) => slot.1 = slot.1.max(k),
            None => self.items.push((z, k)),
        }
    }

    fn sort(&mut self) {
        self.items.sort_by(|a, b| a.0.order(&b.0));
    }

    fn truncate(&mut self, depth: f64) {
        self.items.retain(|(z, _)| in_window(z, depth));
    }

    /// `E ∪̄ F` without closure.
    fn extended_union(&self, other: &LogMap) -> LogMap {
        let mut out = self.clone();
        for &(z, k) in &other.items {
            match self.get(&z) {
                Some(l) => out.raise(z, l + k + 1),
                None => out.raise(z, k),
            }
        }
        out
    }
}

fn in_window(z: &Exponent, depth: f64) -> bool {
    z.im() > -depth + EXPONENT_TOL
}

/// Index set truncated to `Im z > -depth`, stored as `z -> max k`.
#[derive(Clone, Debug)]
pub struct IndexSet {
    map: LogMap,
    depth: f64,
}

impl IndexSet {
    pub fn empty(depth: f64) -> Self {
        IndexSet { map: LogMap::default(), depth }
    }

    /// Smallest closed set containing the given pairs.
    pub fn from_entries<I: IntoIterator<Item = IndexEntry>>(entries: I, depth: f64) -> Self {
        let mut map = LogMap::default();
        for e in entries {
            map.raise(e.z, e.k);
        }
        Self::closed(map, depth)
    }

    /// The set of a function smooth in `rho`: `{(-j i, 0)}`.
    pub fn smooth(depth: f64) -> Self {
        Self::from_entries([IndexEntry::new(Exponent::neg_imag(0), 0)], depth)
    }

    fn closed(mut map: LogMap, depth: f64) -> Self {
        map.truncate(depth);
        map.sort();
        // Propagating in order of decreasing Im z makes the shift closure
        // transitive in one pass.
        let mut i = 0;
        while i < map.items.len() {
            let (z, k) = map.items[i];
            let next = z.shift_down(1);
            if in_window(&next, depth) {
                map.raise(next, k);
                map.sort();
            }
            i += 1;
        }
        IndexSet { map, depth }
    }

    pub fn depth(&self) -> f64 {
        self.depth
    }

    /// Distinct exponents with their maximal log powers.
    pub fn exponents(&self) -> impl Iterator<Item = (Exponent, u32)> + '_ {
        self.map.items.iter().copied()
    }

    pub fn max_log(&self, z: &Exponent) -> Option<u32> {
        self.map.get(z)
    }

    pub fn contains(&self, z: &Exponent, k: u32) -> bool {
        self.max_log(z).is_some_and(|m| k <= m)
    }

    /// All pairs, each exponent expanded to `k = 0..=max`.
    pub fn entries(&self) -> Vec<IndexEntry> {
        self.map.items.iter().flat_map(|&(z, m)| (0..=m).map(move |k| IndexEntry::new(z, k))).collect()
    }

    pub fn len(&self) -> usize {
        self.map.items.iter().map(|&(_, m)| m as usize + 1).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.map.items.is_empty()
    }

    pub fn is_subset(&self, other: &IndexSet) -> bool {
        self.exponents().all(|(z, k)| other.contains(&z, k))
    }

    pub fn same_as(&self, other: &IndexSet) -> bool {
        self.is_subset(other) && other.is_subset(self)
    }

    /// Closure self-check: window, downward log closure (implicit in the
    /// representation) and shift closure.
    pub fn is_closed(&self) -> bool {
        self.exponents().all(|(z, k)| {
            let next = z.shift_down(1);
            in_window(&z, self.depth) && (!in_window(&next, self.depth) || self.contains(&next, k))
        })
    }

    fn check_depth(&self, other: &IndexSet) -> Result<()> {
        if (self.depth - other.depth).abs() > EXPONENT_TOL {
            return Err(Error::DepthMismatch(self.depth, other.depth));
        }
        Ok(())
    }

    pub fn union(&self, other: &IndexSet) -> Result<IndexSet> {
        self.check_depth(other)?;
        let mut map = self.map.clone();
        for &(z, k) in &other.map.items {
            map.raise(z, k);
        }
        Ok(Self::closed(map, self.depth))
    }

    /// `E ∪̄ F = E ∪ F ∪ {(z, l1 + l2 + 1) : (z, l1) ∈ E, (z, l2) ∈ F}`.
    pub fn extended_union(&self, other: &IndexSet) -> Result<IndexSet> {
        self.check_depth(other)?;
        Ok(Self::closed(self.map.extended_union(&other.map), self.depth))
    }

    /// `S(G) = {(z - i, k + 1) : (z, k) ∈ G}`.
    pub fn shift_s(&self) -> IndexSet {
        let mut map = LogMap::default();
        for &(z, k) in &self.map.items {
            map.raise(z.shift_down(1), k + 1);
        }
        Self::closed(map, self.depth)
    }

    /// Index set after the logarithmic coordinate change:
    /// the union over `j` of `{(z - j i, l) : (z, k) ∈ E, l <= k + j}`.
    pub fn logify(&self) -> IndexSet {
        let mut map = LogMap::default();
        for &(z, k) in &self.map.items {
            let mut j = 0i64;
            loop {
                let w = z.shift_down(j);
                if !in_window(&w, self.depth) {
                    break;
                }
                map.raise(w, k + j as u32);
                j += 1;
            }
        }
        Self::closed(map, self.depth)
    }

    /// One `z_re,z_im,k` line per pair.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for e in self.entries() {
            s.push_str(&format!("{},{}\n", e.z, e.k));
        }
        s
    }

    /// Parse `z_re,z_im,k` lines (blank lines and `#` comments ignored) and
    /// close the result.
    pub fn from_text(text: &str, depth: f64) -> Result<IndexSet> {
        Ok(Self::from_entries(parse_entries(text)?, depth))
    }
}

impl fmt::Display for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Parse `z_re,z_im,k` lines without closing.
pub fn parse_entries(text: &str) -> Result<Vec<IndexEntry>> {
    let mut out = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("z_re") {
            continue;
        }
        out.push(parse_entry(line)?);
    }
    Ok(out)
}

pub fn parse_entry(line: &str) -> Result<IndexEntry> {
    let parts: Vec<&str> = line.split(',').collect();
    if parts.len() != 3 {
        return Err(Error::Parse(format!("expected 'z_re,z_im,k', got '{line}'")));
    }
    let re = Exponent::parse_part(parts[0])?;
    let im = Exponent::parse_part(parts[1])?;
    let k: u32 = parts[2].trim().parse().map_err(|_| Error::Parse(format!("bad log power in '{line}'")))?;
    Ok(IndexEntry::new(Exponent::from_parts(re, im), k))
}

/// The sets attached to a family of resonances `E0`.
#[derive(Clone, Debug)]
pub struct ResonanceSets {
    /// `E0 ∪̄ E1 ∪̄ E2 ∪̄ ...` with `Ej` the copy of `E0` shifted by `-j i`.
    pub e_res0: IndexSet,
    /// `E_res0`, with log powers raised along shifts when `m != 0`.
    pub e_res: IndexSet,
    /// Index set at null infinity.
    pub e_scri: IndexSet,
}

impl ResonanceSets {
    /// The pair `(E_res, E_scri)`.
    pub fn e_tot(&self) -> (&IndexSet, &IndexSet) {
        (&self.e_res, &self.e_scri)
    }
}

/// Build `E_res0`, `E_res`, `E_scri` from raw poles `(sigma, k)` where a pole
/// of order `k + 1` at `sigma` is listed as `(sigma, k)`.
///
/// The raw list is not shift-closed. The iterated extended union is taken on
/// the raw shifted copies and the result is closed once at the end.
pub fn resonance_sets(e0: &[IndexEntry], m_nonzero: bool, depth: f64) -> ResonanceSets {
    let mut raw = LogMap::default();
    for e in e0 {
        raw.raise(e.z, e.k);
    }
    raw.truncate(depth);
    let mut acc = LogMap::default();
    let mut j = 0i64;
    loop {
        let mut shifted = LogMap::default();
        for &(z, k) in &raw.items {
            let w = z.shift_down(j);
            if in_window(&w, depth) {
                shifted.raise(w, k);
            }
        }
        if shifted.items.is_empty() {
            break;
        }
        acc = if j == 0 { shifted } else { acc.extended_union(&shifted) };
        j += 1;
    }
    let e_res0 = IndexSet::closed(acc, depth);

    let e_res = if m_nonzero { e_res0.logify() } else { e_res0.clone() };

    let e_scri = if m_nonzero {
        let mut map = LogMap::default();
        let mut j = 0i64;
        while in_window(&Exponent::neg_imag(j), depth) {
            map.raise(Exponent::neg_imag(j), 2 * j as u32);
            j += 1;
        }
        IndexSet::closed(map, depth)
    } else {
        IndexSet::smooth(depth)
    };

    ResonanceSets { e_res0, e_res, e_scri }
}
