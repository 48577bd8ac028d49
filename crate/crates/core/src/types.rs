//! Shared exact and numeric domain types.
//!
//! Half-integer spins are stored doubled (`two_j`), so every label and every
//! recursion index is an ordinary integer. Multiplicities are arbitrary
//! precision; they outgrow 64 bits at modest sector sizes.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::Matrix2;
use num_bigint::BigUint;
use num_complex::Complex64;
use num_traits::{One, Zero};

use crate::error::{invalid, Result};

/// Tolerance on `max |Ω†Ω − I|` (and `|det − 1|` for SU(2)) accepted at construction.
pub const UNITARITY_TOL: f64 = 1e-10;

/// Number of copies of an irrep. Always nonnegative.
pub type Multiplicity = BigUint;

/// An SU(2) irrep label `j`, stored as the integer `2j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SpinLabel(u32);

impl SpinLabel {
    pub const fn new(two_j: u32) -> Self {
        SpinLabel(two_j)
    }

    pub const fn two_j(self) -> u32 {
        self.0
    }

    /// Dimension `2j + 1` of the irrep.
    pub const fn dim(self) -> u32 {
        self.0 + 1
    }

    pub fn j(self) -> f64 {
        f64::from(self.0) / 2.0
    }
}

impl fmt::Display for SpinLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

/// Sector `(N, L)`: `N` channel uses carrying `L` excitations in total.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SectorIndex {
    n_uses: u32,
    total_excitations: u32,
}

impl SectorIndex {
    pub fn new(n_uses: u32, total_excitations: u32) -> Result<Self> {
        if n_uses == 0 {
            return invalid("number of channel uses must be at least 1");
        }
        Ok(SectorIndex {
            n_uses,
            total_excitations,
        })
    }

    pub const fn n_uses(self) -> u32 {
        self.n_uses
    }

    pub const fn total_excitations(self) -> u32 {
        self.total_excitations
    }

    /// Whether `spin` can occur in this sector: `2j ≤ L` and `2j ≡ L (mod 2)`.
    pub fn admits(self, spin: SpinLabel) -> bool {
        spin.two_j() <= self.total_excitations && (self.total_excitations - spin.two_j()) % 2 == 0
    }

    /// Spins occurring in the sector, ascending: `L mod 2, L mod 2 + 2, …, L`.
    pub fn valid_spins(self) -> Vec<SpinLabel> {
        let l = self.total_excitations;
        (l % 2..=l).step_by(2).map(SpinLabel::new).collect()
    }

    /// Number of Fock states with `L` excitations over `2N` modes: `C(L + 2N − 1, 2N − 1)`.
    pub fn dimension(self) -> Multiplicity {
        let modes = 2 * u64::from(self.n_uses);
        binomial(u64::from(self.total_excitations) + modes - 1, modes - 1)
    }
}

impl fmt::Display for SectorIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(N={}, L={})", self.n_uses, self.total_excitations)
    }
}

/// Free-function form of [`SectorIndex::valid_spins`].
pub fn valid_spins(sector: SectorIndex) -> Vec<SpinLabel> {
    sector.valid_spins()
}

/// Free-function form of [`SectorIndex::dimension`].
pub fn sector_dimension(sector: SectorIndex) -> Multiplicity {
    sector.dimension()
}

/// Exact binomial coefficient by the multiplicative formula; every partial
/// product `C(n−k+i, i)` is an integer, so the division is exact.
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 1..=k {
        acc *= n - k + i;
        acc /= i;
    }
    acc
}

/// Multiset of SU(2) irreps: `two_j → count`, with no zero counts stored.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IrrepMultiset {
    counts: BTreeMap<u32, Multiplicity>,
}

impl IrrepMultiset {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn singleton(spin: SpinLabel) -> Self {
        let mut set = Self::new();
        set.add(spin, BigUint::one());
        set
    }

    pub fn add(&mut self, spin: SpinLabel, count: Multiplicity) {
        if count.is_zero() {
            return;
        }
        *self.counts.entry(spin.two_j()).or_default() += count;
    }

    /// Count of `spin`, zero when absent.
    pub fn count(&self, spin: SpinLabel) -> Multiplicity {
        self.counts.get(&spin.two_j()).cloned().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (SpinLabel, &Multiplicity)> {
        self.counts.iter().map(|(&t, c)| (SpinLabel::new(t), c))
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    /// `Σ (2j + 1)·count`.
    pub fn total_dimension(&self) -> Multiplicity {
        self.iter().map(|(s, c)| c * s.dim()).sum()
    }

    pub fn merge(&mut self, other: &IrrepMultiset) {
        for (spin, count) in other.iter() {
            self.add(spin, count.clone());
        }
    }
}

impl FromIterator<(SpinLabel, Multiplicity)> for IrrepMultiset {
    fn from_iter<I: IntoIterator<Item = (SpinLabel, Multiplicity)>>(iter: I) -> Self {
        let mut set = Self::new();
        for (spin, count) in iter {
            set.add(spin, count);
        }
        set
    }
}

pub(crate) fn max_abs(m: &Matrix2<Complex64>) -> f64 {
    m.iter()
        .map(|z| z.norm())
        .fold(0.0, |acc, x| if x.is_nan() || x > acc { x } else { acc })
}

fn unitarity_residual(m: &Matrix2<Complex64>) -> f64 {
    max_abs(&(m.adjoint() * m - Matrix2::identity()))
}

/// A 2×2 unitary mode transformation, rows and columns ordered (H, V).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitaryU2(Matrix2<Complex64>);

impl UnitaryU2 {
    pub fn new(matrix: Matrix2<Complex64>) -> Result<Self> {
        let residual = unitarity_residual(&matrix);
        // NaN entries must not slip through the comparison.
        if residual.is_nan() || residual >= UNITARITY_TOL {
            return invalid(format!("matrix is not unitary (residual {residual:e})"));
        }
        Ok(UnitaryU2(matrix))
    }

    pub fn from_elements(hh: Complex64, hv: Complex64, vh: Complex64, vv: Complex64) -> Result<Self> {
        Self::new(Matrix2::new(hh, hv, vh, vv))
    }

    pub fn identity() -> Self {
        UnitaryU2(Matrix2::identity())
    }

    pub fn matrix(&self) -> &Matrix2<Complex64> {
        &self.0
    }

    pub fn hh(&self) -> Complex64 {
        self.0[(0, 0)]
    }

    pub fn hv(&self) -> Complex64 {
        self.0[(0, 1)]
    }

    pub fn vh(&self) -> Complex64 {
        self.0[(1, 0)]
    }

    pub fn vv(&self) -> Complex64 {
        self.0[(1, 1)]
    }

    pub fn determinant(&self) -> Complex64 {
        self.0.determinant()
    }

    pub fn adjoint(&self) -> Self {
        UnitaryU2(self.0.adjoint())
    }

    /// Matrix product `self · rhs`. Rounding drift is not re-validated.
    pub fn compose(&self, rhs: &UnitaryU2) -> Self {
        UnitaryU2(self.0 * rhs.0)
    }

    pub fn unitarity_residual(&self) -> f64 {
        unitarity_residual(&self.0)
    }
}

/// A 2×2 special unitary matrix: unitary with unit determinant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpecialUnitarySU2(UnitaryU2);

impl SpecialUnitarySU2 {
    pub fn new(matrix: Matrix2<Complex64>) -> Result<Self> {
        let u = UnitaryU2::new(matrix)?;
        let det_err = (u.determinant() - Complex64::one()).norm();
        if det_err.is_nan() || det_err >= UNITARITY_TOL {
            return invalid(format!("determinant differs from 1 by {det_err:e}"));
        }
        Ok(SpecialUnitarySU2(u))
    }

    pub fn identity() -> Self {
        SpecialUnitarySU2(UnitaryU2::identity())
    }

    /// `diag(e^{−iθ/2}, e^{iθ/2})`: rotation by `θ` about the H/V axis.
    pub fn diagonal_rotation(theta: f64) -> Self {
        let phase = Complex64::from_polar(1.0, -theta / 2.0);
        SpecialUnitarySU2(UnitaryU2(Matrix2::new(
            phase,
            Complex64::zero(),
            Complex64::zero(),
            phase.conj(),
        )))
    }

    pub fn as_unitary(&self) -> &UnitaryU2 {
        &self.0
    }

    pub fn matrix(&self) -> &Matrix2<Complex64> {
        self.0.matrix()
    }

    /// The other branch of the U(1)×SU(2) factorization.
    pub fn negated(&self) -> Self {
        SpecialUnitarySU2(UnitaryU2(-self.0 .0))
    }

    pub fn compose(&self, rhs: &SpecialUnitarySU2) -> Self {
        SpecialUnitarySU2(self.0.compose(&rhs.0))
    }

    pub fn adjoint(&self) -> Self {
        SpecialUnitarySU2(self.0.adjoint())
    }

    /// Rotation angle `θ ∈ [0, 2π]`, where the eigenvalues are `e^{∓iθ/2}`.
    pub fn rotation_angle(&self) -> f64 {
        let half_trace = (self.matrix().trace().re / 2.0).clamp(-1.0, 1.0);
        2.0 * half_trace.acos()
    }
}
