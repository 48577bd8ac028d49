//! The collective channel `U(Ω)^{⊗N}` restricted to one excitation sector,
//! and numerical checks of its isotypic structure.

use std::collections::HashMap;

use faer::Mat;
use nalgebra::{DMatrix, Matrix2, SymmetricEigen};
use num_bigint::BigUint;
use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::cg_oracle::Compositions;
use crate::error::{invalid, DfsError, Result};
use crate::multiplicity::MultiplicityTable;
use crate::types::{SectorIndex, SpecialUnitarySU2, UnitaryU2};
use crate::wigner::{character, decompose_u2, BlockBuilder};

/// Default bound on the sector dimension for basis enumeration.
pub const DEFAULT_SECTOR_DIM_CAP: u64 = 5000;
/// Default bound on the sector dimension for commutant computations.
pub const DEFAULT_COMMUTANT_DIM_CAP: u64 = 60;
/// Singular values below this fraction of the largest count as zero.
pub const RANK_REL_TOL: f64 = 1e-7;
pub const DEFAULT_COMMUTANT_SAMPLES: usize = 3;

/// Occupations `(m_k, v_k)` of the H and V modes of every use.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FockTuple(Vec<(u32, u32)>);

impl FockTuple {
    pub fn new(occupations: Vec<(u32, u32)>) -> Self {
        FockTuple(occupations)
    }

    pub fn occupations(&self) -> &[(u32, u32)] {
        &self.0
    }

    pub fn total(&self) -> u32 {
        self.0.iter().map(|(m, v)| m + v).sum()
    }

    /// Total number `M` of H excitations.
    pub fn h_excitations(&self) -> u32 {
        self.0.iter().map(|(m, _)| m).sum()
    }

    /// Excitations per use `(l_1, …, l_N)`.
    pub fn composition(&self) -> Vec<u32> {
        self.0.iter().map(|(m, v)| m + v).collect()
    }
}

/// Fock states of one sector in lexicographic order over `(m_1, v_1, …, m_N, v_N)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SectorBasis {
    sector: SectorIndex,
    states: Vec<FockTuple>,
}

impl SectorBasis {
    pub fn sector(&self) -> SectorIndex {
        self.sector
    }

    pub fn states(&self) -> &[FockTuple] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Basis positions grouped by composition, groups in order of first appearance.
    fn composition_groups(&self) -> Vec<Vec<usize>> {
        let mut index: HashMap<Vec<u32>, usize> = HashMap::new();
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for (i, state) in self.states.iter().enumerate() {
            let g = *index.entry(state.composition()).or_insert_with(|| {
                groups.push(Vec::new());
                groups.len() - 1
            });
            groups[g].push(i);
        }
        groups
    }
}

fn check_dim(sector: SectorIndex, cap: u64, cap_name: &'static str) -> Result<usize> {
    let dim = sector.dimension();
    if dim > BigUint::from(cap) {
        return Err(DfsError::ResourceCap {
            cap: cap_name,
            requested: dim,
            limit: cap,
        });
    }
    Ok(dim.to_usize().expect("bounded by cap"))
}

/// Enumerate the sector's Fock basis, refusing sectors larger than `dim_cap`.
pub fn sector_basis(sector: SectorIndex, dim_cap: u64) -> Result<SectorBasis> {
    let dim = check_dim(sector, dim_cap, "DFS_CAP_SECTOR_DIM")?;
    let modes = 2 * sector.n_uses() as usize;
    let states: Vec<FockTuple> = Compositions::new(modes, sector.total_excitations())
        .map(|c| FockTuple(c.parts().chunks(2).map(|p| (p[0], p[1])).collect()))
        .collect();
    debug_assert_eq!(states.len(), dim);
    Ok(SectorBasis { sector, states })
}

/// Dense matrix on a sector basis.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorMatrix {
    pub basis: SectorBasis,
    pub matrix: DMatrix<Complex64>,
}

/// Matrix of `U(Ω)^{⊗N}` on an already enumerated basis.
///
/// Entry `(s, t)` is `Π_k B_{l_k}[m_k(s), m_k(t)]` when `s` and `t` share the
/// composition `(l_1, …, l_N)`, and zero otherwise; `B_l` is the `l`-excitation
/// block of one use, phase included.
pub fn sector_matrix_on(basis: &SectorBasis, omega: &UnitaryU2) -> Result<DMatrix<Complex64>> {
    let builder = BlockBuilder::new(basis.sector.total_excitations());
    let blocks = builder.blocks(omega)?;
    let d = basis.len();
    let mut matrix = DMatrix::zeros(d, d);
    for group in basis.composition_groups() {
        for &s in &group {
            let row = basis.states[s].occupations();
            for &t in &group {
                let col = basis.states[t].occupations();
                matrix[(s, t)] = row
                    .iter()
                    .zip(col)
                    .map(|(&(ms, vs), &(mt, _))| blocks[(ms + vs) as usize][(ms as usize, mt as usize)])
                    .product();
            }
        }
    }
    Ok(matrix)
}

/// `U(Ω)^{⊗N}` restricted to the sector.
pub fn sector_unitary(sector: SectorIndex, omega: &UnitaryU2, dim_cap: u64) -> Result<SectorMatrix> {
    let basis = sector_basis(sector, dim_cap)?;
    let matrix = sector_matrix_on(&basis, omega)?;
    Ok(SectorMatrix { basis, matrix })
}

/// `|Tr U(Ω')^{⊗N}|_{NL} − Σ_j K^j_{NL} χ_j(θ)|` for a table covering the sector.
pub fn character_check(
    sector: SectorIndex,
    table: &MultiplicityTable,
    omega_prime: &SpecialUnitarySU2,
    dim_cap: u64,
) -> Result<f64> {
    let spectrum = match table.spectrum(sector) {
        Some(s) if table.covers(sector) => s,
        _ => return invalid(format!("table does not cover sector {sector}")),
    };
    let m = sector_unitary(sector, omega_prime.as_unitary(), dim_cap)?;
    let theta = omega_prime.rotation_angle();
    let predicted: f64 = spectrum
        .iter()
        .map(|(spin, k)| k.to_f64().expect("finite") * character(spin, theta))
        .sum();
    Ok((m.matrix.trace() - Complex64::from(predicted)).norm())
}

/// Haar-random element of U(2) drawn from `rng`.
///
/// Gram–Schmidt on a complex Gaussian matrix. Gram–Schmidt leaves `R` with a
/// positive diagonal, which is the phase fix that makes `Q` Haar distributed.
pub fn haar_u2<R: Rng + ?Sized>(rng: &mut R) -> UnitaryU2 {
    let mut gaussian = || Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
    loop {
        let z = Matrix2::new(gaussian(), gaussian(), gaussian(), gaussian());
        let c1 = z.column(0).into_owned();
        let n1 = c1.norm();
        if n1 < 1e-12 {
            continue;
        }
        let q1 = c1 / Complex64::from(n1);
        let c2 = z.column(1).into_owned();
        let r = q1.dotc(&c2);
        let c2 = c2 - q1 * r;
        let n2 = c2.norm();
        if n2 < 1e-12 {
            continue;
        }
        let q2 = c2 / Complex64::from(n2);
        let q = Matrix2::from_columns(&[q1, q2]);
        if let Ok(u) = UnitaryU2::new(q) {
            return u;
        }
    }
}

/// Deterministic Haar sample for a seed.
pub fn haar_sample_u2(seed: u64) -> UnitaryU2 {
    haar_u2(&mut ChaCha8Rng::seed_from_u64(seed))
}

/// SU(2) part of a Haar sample.
pub fn haar_sample_su2(seed: u64) -> SpecialUnitarySU2 {
    su2_part(&haar_sample_u2(seed))
}

fn su2_part(u: &UnitaryU2) -> SpecialUnitarySU2 {
    decompose_u2(u).expect("Haar samples are unitary").1
}

/// Unitary `W` with `W† g W` diagonal, and that diagonal `(μ_H, μ_V)`.
fn eigenbasis(g: &SpecialUnitarySU2) -> (UnitaryU2, Complex64, Complex64) {
    let m = g.matrix();
    // The anti-Hermitian part is Hermitian up to i and shares g's eigenvectors.
    let h = (m - m.adjoint()) * Complex64::new(0.0, -0.5);
    let eig = SymmetricEigen::new(h);
    let w = eig.eigenvectors;
    // Re-orthonormalise so W passes the unitarity check exactly.
    let c1 = w.column(0).normalize();
    let c2 = w.column(1) - c1 * c1.dotc(&w.column(1));
    let w = Matrix2::from_columns(&[c1, c2.normalize()]);
    let w = UnitaryU2::new(w).expect("orthonormalised eigenvectors");
    let diag = w.adjoint().compose(g.as_unitary()).compose(&w);
    (w, diag.hh(), diag.vv())
}

/// Dimension of `{X : X U_i = U_i X for all i}` over `n_samples` Haar SU(2) samples.
///
/// The first sample is diagonalised through its 2×2 eigenbasis `W`: conjugating
/// every sector matrix by `U(W)` makes `U_1` diagonal with eigenvalue
/// `μ_H^M μ_V^{L−M}` on a state with `M` H excitations, so its commutation
/// constraint reads `(λ_a − λ_b) X_ab = 0`. The surviving entries `X_ab` are the
/// unknowns of a stacked linear system for the remaining samples, whose nullity is
/// read off the singular values. Both stages use the relative threshold
/// [`RANK_REL_TOL`].
pub fn commutant_dimension(sector: SectorIndex, n_samples: usize, seed: u64, dim_cap: u64) -> Result<usize> {
    if n_samples < 2 {
        return invalid("commutant dimension needs at least 2 samples");
    }
    let d = check_dim(sector, dim_cap, "DFS_CAP_SECTOR_DIM")?;
    let basis = sector_basis(sector, u64::MAX)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples: Vec<SpecialUnitarySU2> = (0..n_samples).map(|_| su2_part(&haar_u2(&mut rng))).collect();

    let (w, mu_h, mu_v) = eigenbasis(&samples[0]);
    let l = sector.total_excitations();
    let lambda: Vec<Complex64> = basis
        .states()
        .iter()
        .map(|s| {
            let m = s.h_excitations();
            mu_h.powu(m) * mu_v.powu(l - m)
        })
        .collect();

    let mut max_gap = 0.0f64;
    for a in &lambda {
        for b in &lambda {
            max_gap = max_gap.max((a - b).norm());
        }
    }
    let unknowns: Vec<(usize, usize)> = (0..d)
        .flat_map(|a| (0..d).map(move |b| (a, b)))
        .filter(|&(a, b)| (lambda[a] - lambda[b]).norm() <= RANK_REL_TOL * max_gap)
        .collect();

    let rotated: Vec<DMatrix<Complex64>> = samples[1..]
        .iter()
        .map(|g| {
            let conj = w.adjoint().compose(g.as_unitary()).compose(&w);
            sector_matrix_on(&basis, &conj)
        })
        .collect::<Result<_>>()?;

    // Column (a, b) holds vec(E_ab U − U E_ab) for every remaining sample U.
    let rows = rotated.len() * d * d;
    let mut system = Mat::<Complex64>::zeros(rows, unknowns.len());
    for (col, &(a, b)) in unknowns.iter().enumerate() {
        for (i, u) in rotated.iter().enumerate() {
            let offset = i * d * d;
            for q in 0..d {
                system[(offset + a * d + q, col)] += u[(b, q)];
            }
            for p in 0..d {
                system[(offset + p * d + b, col)] -= u[(p, a)];
            }
        }
    }
    // R from a thin QR has the singular values of the tall system at a fraction of the cost.
    let reduced = if rows > unknowns.len() {
        system.qr().thin_R().to_owned()
    } else {
        system
    };
    let singular = reduced
        .singular_values()
        .map_err(|e| DfsError::InvalidArgument(format!("SVD did not converge: {e:?}")))?;
    let largest = singular.iter().cloned().fold(0.0, f64::max);
    let rank = if largest.is_zero() {
        0
    } else {
        singular.iter().filter(|&&s| s > RANK_REL_TOL * largest).count()
    };
    Ok(unknowns.len() - rank)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multiplicity::build_table;
    use crate::wigner::{block_unitary, max_abs};

    fn sector(n: u32, l: u32) -> SectorIndex {
        SectorIndex::new(n, l).unwrap()
    }

    #[test]
    fn basis_examples() {
        let b = sector_basis(sector(1, 1), 100).unwrap();
        let got: Vec<_> = b.states().iter().map(|s| s.occupations().to_vec()).collect();
        assert_eq!(got, vec![vec![(0, 1)], vec![(1, 0)]]);
        assert_eq!(sector_basis(sector(2, 2), 100).unwrap().len(), 10);
        let vac = sector_basis(sector(3, 0), 100).unwrap();
        assert_eq!(vac.states(), &[FockTuple::new(vec![(0, 0); 3])]);
    }

    #[test]
    fn basis_is_sorted_and_unique() {
        let b = sector_basis(sector(3, 4), 1000).unwrap();
        assert!(b.states().windows(2).all(|w| w[0] < w[1]));
        assert!(b.states().iter().all(|s| s.total() == 4));
        assert_eq!(BigUint::from(b.len()), sector(3, 4).dimension());
    }

    #[test]
    fn basis_cap_enforced() {
        assert!(matches!(
            sector_basis(sector(4, 6), 100),
            Err(DfsError::ResourceCap { cap: "DFS_CAP_SECTOR_DIM", .. })
        ));
    }

    #[test]
    fn single_use_sector_is_the_block() {
        let omega = haar_sample_u2(11);
        for l in 0..5 {
            let m = sector_unitary(sector(1, l), &omega, 100).unwrap();
            let b = block_unitary(l, &omega).unwrap();
            assert!(max_abs(&(m.matrix - b.matrix())) < 1e-14);
        }
    }

    #[test]
    fn identity_gives_identity() {
        let m = sector_unitary(sector(2, 1), &UnitaryU2::identity(), 100).unwrap();
        assert!(max_abs(&(m.matrix - DMatrix::identity(4, 4))) < 1e-15);
    }

    #[test]
    fn sector_matrix_is_block_diagonal_over_compositions() {
        let m = sector_unitary(sector(2, 2), &haar_sample_u2(5), 100).unwrap();
        assert!(m.matrix.nrows() == 10);
        let d = m.matrix.nrows();
        let resid = max_abs(&(m.matrix.adjoint() * &m.matrix - DMatrix::identity(d, d)));
        assert!(resid < 1e-12);
        let states = m.basis.states();
        let mut sizes: HashMap<Vec<u32>, usize> = HashMap::new();
        for s in 0..d {
            *sizes.entry(states[s].composition()).or_default() += 1;
            for t in 0..d {
                if states[s].composition() != states[t].composition() {
                    assert_eq!(m.matrix[(s, t)], Complex64::zero());
                }
            }
        }
        assert_eq!(sizes[&vec![0, 2]], 3);
        assert_eq!(sizes[&vec![1, 1]], 4);
        assert_eq!(sizes[&vec![2, 0]], 3);
    }

    #[test]
    fn haar_is_deterministic_and_unitary() {
        assert_eq!(haar_sample_u2(0), haar_sample_u2(0));
        assert_ne!(haar_sample_u2(0), haar_sample_u2(1));
        for seed in 0..200 {
            assert!(haar_sample_u2(seed).unitarity_residual() < 1e-10);
        }
    }

    #[test]
    fn character_check_small_sectors() {
        let table = build_table(3, 3).unwrap();
        let rot = SpecialUnitarySU2::diagonal_rotation(std::f64::consts::PI / 3.0);
        assert!(character_check(sector(2, 2), &table, &rot, 100).unwrap() < 1e-8);
        assert!(character_check(sector(3, 3), &table, &haar_sample_su2(3), 100).unwrap() < 1e-8);
        let id = SpecialUnitarySU2::identity();
        assert!(character_check(sector(3, 2), &table, &id, 100).unwrap() < 1e-12);
        assert!(character_check(sector(4, 2), &table, &id, 100).is_err());
    }

    #[test]
    fn commutant_examples() {
        assert_eq!(commutant_dimension(sector(2, 2), 3, 0, 60).unwrap(), 10);
        assert_eq!(commutant_dimension(sector(1, 3), 3, 0, 60).unwrap(), 1);
        assert_eq!(commutant_dimension(sector(2, 1), 3, 0, 60).unwrap(), 4);
    }

    #[test]
    fn commutant_rejects_bad_inputs() {
        assert!(commutant_dimension(sector(2, 2), 1, 0, 60).is_err());
        assert!(matches!(
            commutant_dimension(sector(3, 4), 3, 0, 60),
            Err(DfsError::ResourceCap { .. })
        ));
    }
}
