//! Brute-force cross-checks for the multiplicity recursion.
//!
//! Two routes, neither of which touches [`crate::multiplicity`]:
//!
//! * the Clebsch–Gordan oracle enumerates every split `l_1 + … + l_N = L` of the
//!   excitations over the uses and folds `D^{l_1/2} ⊗ … ⊗ D^{l_N/2}` into irreps;
//! * the weight oracle counts sector states by their total number `M` of H
//!   excitations. Under a diagonal rotation such a state picks up the phase of
//!   weight `(2M − L)/2`, so `K^j = w(L/2 + j) − w(L/2 + j + 1)`. This is derived
//!   machinery; it is trusted at large sizes only because it agrees with the
//!   Clebsch–Gordan route wherever both are run.

use num_bigint::BigUint;
use num_traits::Zero;

use crate::error::{invalid, DfsError, Result};
use crate::types::{binomial, IrrepMultiset, Multiplicity, SectorIndex, SpinLabel};

/// Default bound on the number of compositions the oracle will enumerate.
pub const DEFAULT_COMPOSITION_CAP: u64 = 1_000_000;

/// Excitations per use `(l_1, …, l_N)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Composition(Vec<u32>);

impl Composition {
    pub fn new(parts: Vec<u32>) -> Result<Self> {
        if parts.is_empty() {
            return invalid("a composition needs at least one part");
        }
        Ok(Composition(parts))
    }

    pub fn parts(&self) -> &[u32] {
        &self.0
    }

    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    /// Dimension of `D^{l_1/2} ⊗ … ⊗ D^{l_N/2}`.
    pub fn product_dimension(&self) -> Multiplicity {
        self.0.iter().map(|&l| BigUint::from(l + 1)).product()
    }
}

/// Lexicographic enumeration of all compositions of `total` into `n` parts.
pub struct Compositions {
    next: Option<Vec<u32>>,
}

impl Compositions {
    pub fn new(n: usize, total: u32) -> Self {
        let next = (n > 0).then(|| {
            let mut first = vec![0; n];
            first[n - 1] = total;
            first
        });
        Compositions { next }
    }
}

impl Iterator for Compositions {
    type Item = Composition;

    fn next(&mut self) -> Option<Composition> {
        let current = self.next.take()?;
        let n = current.len();
        // Successor: bump the rightmost part that still has mass to its right,
        // then put all remaining mass in the last slot.
        let mut succ = current.clone();
        let mut tail = 0;
        for i in (0..n.saturating_sub(1)).rev() {
            tail += succ[i + 1];
            if tail > 0 {
                succ[i] += 1;
                succ[i + 1..].iter_mut().for_each(|p| *p = 0);
                succ[n - 1] = tail - 1;
                self.next = Some(succ);
                break;
            }
        }
        Some(Composition(current))
    }
}

/// Tensor every irrep in `acc` with `D^{j2}` and collect the Clebsch–Gordan series.
pub fn cg_pair(acc: &IrrepMultiset, spin2: SpinLabel) -> IrrepMultiset {
    let t2 = spin2.two_j();
    let mut out = IrrepMultiset::new();
    for (spin1, count) in acc.iter() {
        let t1 = spin1.two_j();
        for t in (t1.abs_diff(t2)..=t1 + t2).step_by(2) {
            out.add(SpinLabel::new(t), count.clone());
        }
    }
    out
}

/// Irreps of `D^{l_1/2} ⊗ … ⊗ D^{l_N/2}`, folded left to right.
pub fn decompose_composition(comp: &Composition) -> IrrepMultiset {
    let (first, rest) = comp.parts().split_first().expect("compositions are nonempty");
    rest.iter().fold(IrrepMultiset::singleton(SpinLabel::new(*first)), |acc, &l| {
        cg_pair(&acc, SpinLabel::new(l))
    })
}

/// Number of compositions of `L` into `N` parts.
pub fn composition_count(sector: SectorIndex) -> BigUint {
    let n = u64::from(sector.n_uses());
    binomial(u64::from(sector.total_excitations()) + n - 1, n - 1)
}

/// `K^j_{NL}` for every `j`, by enumerating and decomposing every composition.
pub fn oracle_multiplicities(sector: SectorIndex, composition_cap: u64) -> Result<IrrepMultiset> {
    let count = composition_count(sector);
    if count > BigUint::from(composition_cap) {
        return Err(DfsError::ResourceCap {
            cap: "DFS_CAP_COMPOSITIONS",
            requested: count,
            limit: composition_cap,
        });
    }
    let mut total = IrrepMultiset::new();
    for comp in Compositions::new(sector.n_uses() as usize, sector.total_excitations()) {
        total.merge(&decompose_composition(&comp));
    }
    Ok(total)
}

/// Number of sector states with exactly `m` H excitations: `C(M+N−1, N−1)·C(L−M+N−1, N−1)`.
pub fn weight_count(sector: SectorIndex, m: u32) -> Multiplicity {
    let l = sector.total_excitations();
    if m > l {
        return BigUint::zero();
    }
    let n = u64::from(sector.n_uses());
    binomial(u64::from(m) + n - 1, n - 1) * binomial(u64::from(l - m) + n - 1, n - 1)
}

/// `K^j_{NL}` as a difference of neighbouring weight counts. Zero for inadmissible spins.
pub fn weight_multiplicity(sector: SectorIndex, spin: SpinLabel) -> Multiplicity {
    if !sector.admits(spin) {
        return BigUint::zero();
    }
    let m = (sector.total_excitations() + spin.two_j()) / 2;
    let top = weight_count(sector, m);
    let above = weight_count(sector, m + 1);
    // Weight counts are unimodal about L/2, so the difference is nonnegative.
    top - above
}
