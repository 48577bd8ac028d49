//! Irrep multiplicities `K^j_{NL}` by recursion on the number of channel uses.
//!
//! Layer `N` is obtained from layer `N − 1` alone: `K^j_{NL}` is the sum of
//! `K^{j'}_{N−1,L'}` over the lattice rectangle spanned by
//! `μ = L'/2 + j' ∈ [L/2 − j, L/2 + j]` and `ν = L'/2 − j' ∈ [0, L/2 − j]`.
//! The single-use layer is `K^j_{1,L} = δ_{L,2j}`.

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::error::{invalid, DfsError, Result};
use crate::types::{IrrepMultiset, Multiplicity, SectorIndex, SpinLabel};

/// Default bound on the number of stored table entries.
pub const DEFAULT_TABLE_ENTRY_CAP: u64 = 10_000_000;

/// Multiplicity of the single-use block: 1 iff `2j = L`.
pub fn k_initial(l: u32, spin: SpinLabel) -> Multiplicity {
    if spin.two_j() == l {
        BigUint::one()
    } else {
        BigUint::zero()
    }
}

/// Lattice points `(L', 2j')` feeding `K^j_{NL}`, ordered by `μ` then `ν`.
fn support_points(l: u32, two_j: u32) -> impl Iterator<Item = (u32, u32)> {
    let lo = (l - two_j) / 2;
    let hi = (l + two_j) / 2;
    (lo..=hi).flat_map(move |mu| (0..=lo).map(move |nu| (mu + nu, mu - nu)))
}

/// The `(L', 2j')` pairs summed over when computing `K^j_{NL}`.
///
/// Independent of `N`. Fails if `spin` is not admissible in the sector.
pub fn recursion_support(sector: SectorIndex, spin: SpinLabel) -> Result<Vec<(u32, u32)>> {
    let l = sector.total_excitations();
    if spin.two_j() > l {
        return invalid(format!("2j = {} exceeds L = {l}", spin.two_j()));
    }
    if (l - spin.two_j()) % 2 != 0 {
        return invalid(format!("2j = {} and L = {l} differ in parity", spin.two_j()));
    }
    Ok(support_points(l, spin.two_j()).collect())
}

fn entries_per_layer(l_max: u32) -> u64 {
    (0..=u64::from(l_max)).map(|l| l / 2 + 1).sum()
}

fn slot(l: u32, two_j: u32) -> usize {
    ((two_j - l % 2) / 2) as usize
}

/// Dense triangular store of `K^j_{NL}` for `1 ≤ N ≤ n_max`, `0 ≤ L ≤ l_max`.
///
/// Row `[N−1][L]` holds the admissible spins of sector `(N, L)` in ascending order.
/// Lookups outside the stored range or parity class read as zero.
#[derive(Debug, Clone)]
pub struct MultiplicityTable {
    layers: Vec<Vec<Vec<Multiplicity>>>,
    l_max: u32,
    entry_cap: u64,
}

impl Default for MultiplicityTable {
    fn default() -> Self {
        Self::empty()
    }
}

impl MultiplicityTable {
    pub fn empty() -> Self {
        MultiplicityTable {
            layers: Vec::new(),
            l_max: 0,
            entry_cap: DEFAULT_TABLE_ENTRY_CAP,
        }
    }

    pub fn with_entry_cap(mut self, cap: u64) -> Self {
        self.entry_cap = cap;
        self
    }

    pub fn n_max(&self) -> u32 {
        self.layers.len() as u32
    }

    pub fn l_max(&self) -> u32 {
        self.l_max
    }

    pub fn covers(&self, sector: SectorIndex) -> bool {
        sector.n_uses() <= self.n_max() && sector.total_excitations() <= self.l_max
    }

    /// Stored entry, `None` outside the table or the parity class.
    pub fn get(&self, n: u32, l: u32, two_j: u32) -> Option<&Multiplicity> {
        if n == 0 || two_j > l || (l - two_j) % 2 != 0 {
            return None;
        }
        self.layers
            .get(n as usize - 1)?
            .get(l as usize)?
            .get(slot(l, two_j))
    }

    /// Stored entry or zero.
    pub fn lookup(&self, n: u32, l: u32, two_j: u32) -> Multiplicity {
        self.get(n, l, two_j).cloned().unwrap_or_default()
    }

    /// Grow the table so it covers `n_max × l_max`, computing only missing entries.
    pub fn extend_to(&mut self, n_max: u32, l_max: u32) -> Result<()> {
        let n_max = n_max.max(self.n_max());
        let l_max = if self.layers.is_empty() { l_max } else { l_max.max(self.l_max) };
        let requested = u128::from(n_max) * u128::from(entries_per_layer(l_max));
        if requested > u128::from(self.entry_cap) {
            return Err(DfsError::ResourceCap {
                cap: "table entries",
                requested: BigUint::from(requested),
                limit: self.entry_cap,
            });
        }
        for n in 1..=n_max {
            if self.layers.len() < n as usize {
                self.layers.push(Vec::new());
            }
            let start = self.layers[n as usize - 1].len() as u32;
            for l in start..=l_max {
                let row = self.compute_row(n, l);
                self.layers[n as usize - 1].push(row);
            }
        }
        self.l_max = l_max;
        Ok(())
    }

    fn compute_row(&self, n: u32, l: u32) -> Vec<Multiplicity> {
        (l % 2..=l)
            .step_by(2)
            .map(|two_j| {
                if n == 1 {
                    return k_initial(l, SpinLabel::new(two_j));
                }
                let below = &self.layers[n as usize - 2];
                support_points(l, two_j)
                    .filter_map(|(lp, tjp)| below.get(lp as usize).and_then(|row| row.get(slot(lp, tjp))))
                    .sum()
            })
            .collect()
    }

    /// `K^j_{NL}`, extending the table first if the sector is not yet covered.
    ///
    /// Spins outside the sector's admissible range give zero.
    pub fn k_value(&mut self, sector: SectorIndex, spin: SpinLabel) -> Result<Multiplicity> {
        if !sector.admits(spin) {
            return Ok(BigUint::zero());
        }
        if !self.covers(sector) {
            self.extend_to(sector.n_uses(), sector.total_excitations())?;
        }
        Ok(self.lookup(sector.n_uses(), sector.total_excitations(), spin.two_j()))
    }

    /// All multiplicities of a covered sector as a multiset (zero counts dropped).
    pub fn spectrum(&self, sector: SectorIndex) -> Option<IrrepMultiset> {
        let row = self
            .layers
            .get(sector.n_uses() as usize - 1)?
            .get(sector.total_excitations() as usize)?;
        Some(
            sector
                .valid_spins()
                .into_iter()
                .zip(row.iter().cloned())
                .collect(),
        )
    }

    /// Every stored entry, ordered by `N`, then `L`, then `2j`.
    pub fn entries(&self) -> impl Iterator<Item = (SectorIndex, SpinLabel, &Multiplicity)> + '_ {
        self.layers.iter().enumerate().flat_map(|(ni, layer)| {
            layer.iter().enumerate().flat_map(move |(l, row)| {
                let l = l as u32;
                let sector = SectorIndex::new(ni as u32 + 1, l).expect("n ≥ 1");
                row.iter()
                    .enumerate()
                    .map(move |(k, value)| (sector, SpinLabel::new(l % 2 + 2 * k as u32), value))
            })
        })
    }
}

/// Table of `K^j_{NL}` for `1 ≤ N ≤ n_max`, `0 ≤ L ≤ l_max`.
pub fn build_table(n_max: u32, l_max: u32) -> Result<MultiplicityTable> {
    build_table_capped(n_max, l_max, DEFAULT_TABLE_ENTRY_CAP)
}

pub fn build_table_capped(n_max: u32, l_max: u32, entry_cap: u64) -> Result<MultiplicityTable> {
    if n_max == 0 {
        return invalid("n_max must be at least 1");
    }
    let mut table = MultiplicityTable::empty().with_entry_cap(entry_cap);
    table.extend_to(n_max, l_max)?;
    Ok(table)
}

/// Convenience wrapper over [`MultiplicityTable::k_value`].
pub fn k_value(table: &mut MultiplicityTable, sector: SectorIndex, spin: SpinLabel) -> Result<Multiplicity> {
    table.k_value(sector, spin)
}

/// The spin with the largest multiplicity in the sector; ties go to the smaller `2j`.
pub fn best_multiplicity(table: &MultiplicityTable, sector: SectorIndex) -> Result<(SpinLabel, Multiplicity)> {
    if !table.covers(sector) {
        return invalid(format!(
            "sector {sector} outside table bounds N ≤ {}, L ≤ {}",
            table.n_max(),
            table.l_max()
        ));
    }
    let (n, l) = (sector.n_uses(), sector.total_excitations());
    let mut best: Option<(SpinLabel, Multiplicity)> = None;
    for spin in sector.valid_spins() {
        let k = table.lookup(n, l, spin.two_j());
        if best.as_ref().is_none_or(|(_, b)| k > *b) {
            best = Some((spin, k));
        }
    }
    Ok(best.expect("every sector has at least one admissible spin"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sector(n: u32, l: u32) -> SectorIndex {
        SectorIndex::new(n, l).unwrap()
    }

    fn big(v: u64) -> BigUint {
        BigUint::from(v)
    }

    #[test]
    fn initial_condition_is_delta() {
        assert_eq!(k_initial(2, SpinLabel::new(2)), big(1));
        assert_eq!(k_initial(2, SpinLabel::new(0)), big(0));
        assert_eq!(k_initial(0, SpinLabel::new(0)), big(1));
    }

    #[test]
    fn support_examples() {
        let s = |l, t| recursion_support(sector(3, l), SpinLabel::new(t)).unwrap();
        assert_eq!(s(2, 2), vec![(0, 0), (1, 1), (2, 2)]);
        assert_eq!(s(2, 0), vec![(1, 1), (2, 0)]);
        assert_eq!(s(0, 0), vec![(0, 0)]);
    }

    #[test]
    fn support_rejects_bad_spins() {
        assert!(recursion_support(sector(1, 2), SpinLabel::new(1)).is_err());
        assert!(recursion_support(sector(1, 2), SpinLabel::new(4)).is_err());
    }

    #[test]
    fn k_value_examples() {
        let mut table = MultiplicityTable::empty();
        assert_eq!(table.k_value(sector(2, 2), SpinLabel::new(2)).unwrap(), big(3));
        assert_eq!(table.k_value(sector(2, 2), SpinLabel::new(0)).unwrap(), big(1));
        assert_eq!(table.k_value(sector(1, 7), SpinLabel::new(7)).unwrap(), big(1));
        // Out of range or parity: zero, not an error.
        assert_eq!(table.k_value(sector(2, 2), SpinLabel::new(1)).unwrap(), big(0));
        assert_eq!(table.k_value(sector(2, 2), SpinLabel::new(6)).unwrap(), big(0));
    }

    #[test]
    fn k_value_is_stable_under_extension() {
        let mut table = build_table(2, 3).unwrap();
        let before = table.lookup(2, 3, 1);
        table.extend_to(5, 9).unwrap();
        assert_eq!(table.lookup(2, 3, 1), before);
        let fresh = build_table(5, 9).unwrap();
        for (s, spin, v) in fresh.entries() {
            assert_eq!(table.get(s.n_uses(), s.total_excitations(), spin.two_j()), Some(v));
        }
    }

    #[test]
    fn build_table_examples() {
        let t = build_table(1, 3).unwrap();
        let nonzero: Vec<_> = t
            .entries()
            .filter(|(_, _, v)| !v.is_zero())
            .map(|(s, j, v)| (s.total_excitations(), j.two_j(), v.clone()))
            .collect();
        assert_eq!(nonzero, vec![(0, 0, big(1)), (1, 1, big(1)), (2, 2, big(1)), (3, 3, big(1))]);

        let t = build_table(2, 2).unwrap();
        assert_eq!(t.lookup(2, 2, 2), big(3));
        assert_eq!(t.lookup(2, 2, 0), big(1));
        assert_eq!(t.lookup(2, 1, 1), big(2));

        let t = build_table(3, 0).unwrap();
        let all: Vec<_> = t.entries().filter(|(s, _, _)| s.n_uses() == 3).collect();
        assert_eq!(all.len(), 1);
        assert_eq!(*all[0].2, big(1));
    }

    #[test]
    fn build_table_rejects_zero_uses_and_oversize() {
        assert!(matches!(build_table(0, 3), Err(DfsError::InvalidArgument(_))));
        assert!(matches!(build_table_capped(10, 100, 50), Err(DfsError::ResourceCap { .. })));
    }

    #[test]
    fn best_multiplicity_examples() {
        let t = build_table(2, 4).unwrap();
        assert_eq!(best_multiplicity(&t, sector(2, 2)).unwrap(), (SpinLabel::new(2), big(3)));
        assert_eq!(best_multiplicity(&t, sector(1, 4)).unwrap(), (SpinLabel::new(4), big(1)));
        assert_eq!(best_multiplicity(&t, sector(2, 1)).unwrap(), (SpinLabel::new(1), big(2)));
        assert!(best_multiplicity(&t, sector(3, 1)).is_err());
        assert!(best_multiplicity(&t, sector(2, 5)).is_err());
    }

    #[test]
    fn best_multiplicity_ties_pick_smallest_spin() {
        let t = build_table(5, 6).unwrap();
        // (N=4, L=3): K^{1/2} = K^{3/2} = 20.
        assert_eq!(t.lookup(4, 3, 1), big(20));
        assert_eq!(t.lookup(4, 3, 3), big(20));
        assert_eq!(best_multiplicity(&t, sector(4, 3)).unwrap(), (SpinLabel::new(1), big(20)));
        // (N=3, L=4): K^1 = K^2 = 15 beat K^0 = 6.
        assert_eq!(best_multiplicity(&t, sector(3, 4)).unwrap(), (SpinLabel::new(2), big(15)));
        // (N=5, L=6): K^1 = K^2 = 420.
        assert_eq!(best_multiplicity(&t, sector(5, 6)).unwrap(), (SpinLabel::new(2), big(420)));
    }

    #[test]
    fn dimension_identity_holds() {
        let t = build_table(8, 16).unwrap();
        for n in 1..=8 {
            for l in 0..=16 {
                let s = sector(n, l);
                assert_eq!(t.spectrum(s).unwrap().total_dimension(), s.dimension(), "{s}");
            }
        }
    }

    #[test]
    fn totals_increase_with_uses() {
        let t = build_table(8, 12).unwrap();
        for l in 1..=12 {
            let total = |n: u32| -> BigUint { (0..=l).map(|tj| t.lookup(n, l, tj)).sum() };
            for n in 2..=8 {
                assert!(total(n) > total(n - 1), "L={l} N={n}");
            }
        }
    }
}
