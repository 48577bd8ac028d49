//! Irreducible SU(2) blocks from the monomial construction.
//!
//! The Fock state `|m_H (l−m)_V⟩ ∝ (a_H†)^m (a_V†)^{l−m}|vac⟩` is sent to
//! `(Ω_HH a_H† + Ω_HV a_V†)^m (Ω_VH a_H† + Ω_VV a_V†)^{l−m}|vac⟩`. Expanding both
//! binomials and collecting the coefficient of `|n_H (l−n)_V⟩` gives
//!
//! ```text
//! D_{mn} = √(n!(l−n)! / (m!(l−m)!)) · Σ_k C(m,k) C(l−m,n−k)
//!          · Ω_HH^k Ω_HV^{m−k} Ω_VH^{n−k} Ω_VV^{l−m−n+k}
//! ```
//!
//! with `k` running over `max(0, n+m−l) ..= min(m, n)`. Rows and columns are
//! indexed by `m` ascending. With this convention `D(AB) = D(A)·D(B)`.

use nalgebra::{DMatrix, Matrix2};
use num_bigint::BigUint;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};

use crate::error::{invalid, Result};
use crate::types::{binomial, SpecialUnitarySU2, SpinLabel, UnitaryU2, UNITARITY_TOL};

/// Below this rotation angle the character falls back to `2j + 1`.
pub const SMALL_ANGLE: f64 = 1e-6;

/// `D^j` evaluated at one group element, indexed by H-excitation number `m = 0..=2j`.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerBlock {
    spin: SpinLabel,
    matrix: DMatrix<Complex64>,
}

impl WignerBlock {
    pub fn spin(&self) -> SpinLabel {
        self.spin
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.matrix
    }

    /// Entry `D_{mn}`: amplitude of `|n_H (l−n)_V⟩` in the image of `|m_H (l−m)_V⟩`.
    pub fn element(&self, m: usize, n: usize) -> Complex64 {
        self.matrix[(m, n)]
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    pub fn unitarity_residual(&self) -> f64 {
        let d = self.matrix.nrows();
        max_abs(&(self.matrix.adjoint() * &self.matrix - DMatrix::identity(d, d)))
    }
}

pub fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter()
        .map(|z| z.norm())
        .fold(0.0, |acc, x| if x.is_nan() || x > acc { x } else { acc })
}

/// Split `Ω = e^{−iα} Ω'` with `det Ω' = 1`.
///
/// Uses `α = −arg(det Ω)/2` with `arg ∈ (−π, π]`. The pair `(α + π, −Ω')` is the
/// other valid split; only quantities invariant under the swap are meaningful.
pub fn decompose_u2(omega: &UnitaryU2) -> Result<(f64, SpecialUnitarySU2)> {
    let residual = omega.unitarity_residual();
    if residual.is_nan() || residual >= UNITARITY_TOL {
        return invalid(format!("matrix is not unitary (residual {residual:e})"));
    }
    let det = omega.determinant();
    let mut arg = det.arg();
    if arg <= -std::f64::consts::PI {
        arg = std::f64::consts::PI;
    }
    let alpha = -arg / 2.0;
    let rescaled = omega.matrix() * Complex64::from_polar(1.0, alpha);
    // Normalising out |det| keeps det Ω' = 1 to rounding even for inputs at the tolerance edge.
    let rescaled = rescaled / Complex64::from(det.norm().sqrt());
    Ok((alpha, SpecialUnitarySU2::new(rescaled)?))
}

/// Exact-integer prefactors for one block size, converted to `f64` once per entry.
struct MonomialCoefficients {
    l: u32,
    /// `√(n!(l−n)!/(m!(l−m)!))`, row-major over `(m, n)`.
    norm: Vec<f64>,
    /// `C(a, b)` for `a, b ≤ l`.
    choose: Vec<Vec<f64>>,
}

impl MonomialCoefficients {
    fn new(l: u32) -> Self {
        let size = l as usize + 1;
        let mut fact = vec![BigUint::one()];
        for i in 1..=u64::from(l) {
            let next = fact.last().unwrap() * i;
            fact.push(next);
        }
        let weight = |m: usize| &fact[m] * &fact[size - 1 - m];
        let mut norm = Vec::with_capacity(size * size);
        for m in 0..size {
            for n in 0..size {
                let ratio = BigRational::new(weight(n).into(), weight(m).into());
                norm.push(ratio.to_f64().expect("finite ratio").sqrt());
            }
        }
        let choose = (0..size as u64)
            .map(|a| (0..size as u64).map(|b| binomial(a, b).to_f64().expect("finite")).collect())
            .collect();
        MonomialCoefficients { l, norm, choose }
    }
}

/// Degree-`l` monomial representation of an arbitrary 2×2 matrix.
fn monomial_block(coeffs: &MonomialCoefficients, g: &Matrix2<Complex64>) -> DMatrix<Complex64> {
    let l = coeffs.l as usize;
    let (hh, hv, vh, vv) = (g[(0, 0)], g[(0, 1)], g[(1, 0)], g[(1, 1)]);
    let powers = |z: Complex64| -> Vec<Complex64> {
        std::iter::successors(Some(Complex64::one()), |p| Some(p * z)).take(l + 1).collect()
    };
    let (phh, phv, pvh, pvv) = (powers(hh), powers(hv), powers(vh), powers(vv));
    DMatrix::from_fn(l + 1, l + 1, |m, n| {
        let k_lo = (n + m).saturating_sub(l);
        let k_hi = m.min(n);
        let sum: Complex64 = (k_lo..=k_hi)
            .map(|k| {
                let c = coeffs.choose[m][k] * coeffs.choose[l - m][n - k];
                phh[k] * phv[m - k] * pvh[n - k] * pvv[l + k - m - n] * c
            })
            .sum();
        sum * coeffs.norm[m * (l + 1) + n]
    })
}

/// `D^j(Ω')` for `2j = spin.two_j()`.
pub fn wigner_d(spin: SpinLabel, omega_prime: &SpecialUnitarySU2) -> WignerBlock {
    let coeffs = MonomialCoefficients::new(spin.two_j());
    WignerBlock {
        spin,
        matrix: monomial_block(&coeffs, omega_prime.matrix()),
    }
}

/// `e^{−ilα} D^{l/2}(Ω')` for an explicit factorization `Ω = e^{−iα} Ω'`.
pub fn block_unitary_from_parts(l: u32, alpha: f64, omega_prime: &SpecialUnitarySU2) -> WignerBlock {
    let mut block = wigner_d(SpinLabel::new(l), omega_prime);
    block.matrix *= Complex64::from_polar(1.0, -f64::from(l) * alpha);
    block
}

/// Action of `Ω` on the `l`-excitation subspace: `e^{−ilα} D^{l/2}(Ω')`.
pub fn block_unitary(l: u32, omega: &UnitaryU2) -> Result<WignerBlock> {
    let (alpha, omega_prime) = decompose_u2(omega)?;
    Ok(block_unitary_from_parts(l, alpha, &omega_prime))
}

/// Reusable per-`l` coefficient cache for building many blocks of one size.
pub(crate) struct BlockBuilder {
    coeffs: Vec<MonomialCoefficients>,
}

impl BlockBuilder {
    pub(crate) fn new(l_max: u32) -> Self {
        BlockBuilder {
            coeffs: (0..=l_max).map(MonomialCoefficients::new).collect(),
        }
    }

    /// Blocks for `l = 0..=l_max` of the full U(2) action (phases included).
    pub(crate) fn blocks(&self, omega: &UnitaryU2) -> Result<Vec<DMatrix<Complex64>>> {
        let (alpha, omega_prime) = decompose_u2(omega)?;
        Ok(self
            .coeffs
            .iter()
            .map(|c| monomial_block(c, omega_prime.matrix()) * Complex64::from_polar(1.0, -f64::from(c.l) * alpha))
            .collect())
    }
}

/// `χ_j(θ) = sin((2j+1)θ/2) / sin(θ/2)`, with the removable singularities at
/// `θ = 0` and `θ = 2π` filled in.
pub fn character(spin: SpinLabel, theta: f64) -> f64 {
    let dim = f64::from(spin.dim());
    if theta < SMALL_ANGLE {
        return dim;
    }
    if 2.0 * std::f64::consts::PI - theta < SMALL_ANGLE {
        return if spin.two_j() % 2 == 0 { dim } else { -dim };
    }
    (dim * theta / 2.0).sin() / (theta / 2.0).sin()
}
