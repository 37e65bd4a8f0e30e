//! Exact complex linear algebra for one polarization qubit (dimension 2) and
//! the clock ⊗ rest ququart (dimension 4).
//!
//! Basis order is fixed once for the whole crate: `|H⟩, |V⟩` for a single
//! qubit and `|HH⟩, |HV⟩, |VH⟩, |VV⟩` for the pair, clock letter first.

use nalgebra::{Complex, DMatrix, DVector};
use thiserror::Error;

pub type C64 = Complex<f64>;

/// Tolerance for exact-algebra identities.
pub const EXACT_TOL: f64 = 1e-12;
/// Hermiticity/trace tolerance of a density matrix.
pub const DENSITY_TOL: f64 = 1e-10;
/// Most negative eigenvalue still accepted as positive semidefinite.
pub const PSD_TOL: f64 = 1e-8;
/// Probabilities below this are treated as impossible events.
pub const NULL_PROB: f64 = 1e-14;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QError {
    #[error("unsupported dimension {0} (expected 2 or 4)")]
    InvalidDimension(usize),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("non-finite entry")]
    NonFinite,
    #[error("ket is not normalized (norm² = {0})")]
    NotNormalized(f64),
    #[error("operator is not a Hermitian idempotent projector")]
    NotProjector,
    #[error("not a density matrix: {0}")]
    NotDensityMatrix(String),
}

/// Which tensor factor to keep in a partial trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Factor {
    Clock,
    Rest,
}

fn check_dim(dim: usize) -> Result<(), QError> {
    match dim {
        2 | 4 => Ok(()),
        d => Err(QError::InvalidDimension(d)),
    }
}

fn all_finite<'a>(it: impl IntoIterator<Item = &'a C64>) -> bool {
    it.into_iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Kronecker product with the left operand as the slow index.
pub(crate) fn kron(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    DMatrix::from_fn(ar * br, ac * bc, |i, j| {
        a[(i / br, j / bc)] * b[(i % br, j % bc)]
    })
}

/// Combine two factors into a dimension-4 object, clock factor first.
pub trait Tensor: Sized {
    fn tensor(&self, rest: &Self) -> Result<Self, QError>;
}

// ── Ket ─────────────────────────────────────────────────────────────────────

/// A pure state, possibly subnormalized (projection residues).
#[derive(Debug, Clone, PartialEq)]
pub struct Ket {
    amps: DVector<C64>,
    normalized: bool,
}

impl Ket {
    pub fn new(amps: Vec<C64>) -> Result<Self, QError> {
        check_dim(amps.len())?;
        if !all_finite(&amps) {
            return Err(QError::NonFinite);
        }
        Ok(Self::from_vector(DVector::from_vec(amps)))
    }

    pub fn from_real(amps: &[f64]) -> Result<Self, QError> {
        Self::new(amps.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub(crate) fn from_vector(amps: DVector<C64>) -> Self {
        let normalized = (amps.norm_squared() - 1.0).abs() < EXACT_TOL;
        Self { amps, normalized }
    }

    pub fn basis(dim: usize, index: usize) -> Result<Self, QError> {
        check_dim(dim)?;
        if index >= dim {
            return Err(QError::DimensionMismatch {
                expected: dim,
                found: index,
            });
        }
        let mut amps = DVector::from_element(dim, ZERO);
        amps[index] = ONE;
        Ok(Self::from_vector(amps))
    }

    pub fn h() -> Self {
        Self::from_vector(DVector::from_vec(vec![ONE, ZERO]))
    }

    pub fn v() -> Self {
        Self::from_vector(DVector::from_vec(vec![ZERO, ONE]))
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amps
    }

    pub fn amplitude(&self, index: usize) -> C64 {
        self.amps[index]
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn norm_squared(&self) -> f64 {
        self.amps.norm_squared()
    }

    pub fn normalize(&self) -> Result<Self, QError> {
        let n = self.amps.norm();
        if n * n < NULL_PROB {
            return Err(QError::NotNormalized(n * n));
        }
        Ok(Self::from_vector(self.amps.unscale(n)))
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Ket) -> Result<C64, QError> {
        self.same_dim(other)?;
        Ok(self.amps.dotc(&other.amps))
    }

    /// `min_χ ‖self − e^{iχ} other‖`, the distance with global phase quotiented.
    pub fn distance_up_to_phase(&self, other: &Ket) -> Result<f64, QError> {
        let overlap = other.inner(self)?;
        let phase = if overlap.norm() > 0.0 {
            overlap / overlap.norm()
        } else {
            ONE
        };
        Ok((&self.amps - &other.amps * phase).norm())
    }

    /// Plain Euclidean distance, phase included.
    pub fn distance(&self, other: &Ket) -> Result<f64, QError> {
        self.same_dim(other)?;
        Ok((&self.amps - &other.amps).norm())
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self::from_vector(&self.amps * factor)
    }

    fn same_dim(&self, other: &Ket) -> Result<(), QError> {
        if self.dim() != other.dim() {
            return Err(QError::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }
}

impl Tensor for Ket {
    fn tensor(&self, rest: &Self) -> Result<Self, QError> {
        for k in [self, rest] {
            if k.dim() != 2 {
                return Err(QError::DimensionMismatch {
                    expected: 2,
                    found: k.dim(),
                });
            }
        }
        let amps = DVector::from_fn(4, |i, _| self.amps[i / 2] * rest.amps[i % 2]);
        Ok(Self::from_vector(amps))
    }
}

// ── Operator ────────────────────────────────────────────────────────────────

/// A square complex matrix acting on dimension 2 or 4.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    m: DMatrix<C64>,
}

impl Operator {
    /// Build from row-major entries.
    pub fn from_rows(dim: usize, entries: &[C64]) -> Result<Self, QError> {
        check_dim(dim)?;
        if entries.len() != dim * dim {
            return Err(QError::DimensionMismatch {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        if !all_finite(entries) {
            return Err(QError::NonFinite);
        }
        Ok(Self {
            m: DMatrix::from_row_slice(dim, dim, entries),
        })
    }

    pub fn from_matrix(m: DMatrix<C64>) -> Result<Self, QError> {
        if !m.is_square() {
            return Err(QError::DimensionMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        check_dim(m.nrows())?;
        if !all_finite(m.iter()) {
            return Err(QError::NonFinite);
        }
        Ok(Self { m })
    }

    pub fn identity(dim: usize) -> Result<Self, QError> {
        check_dim(dim)?;
        Ok(Self {
            m: DMatrix::identity(dim, dim),
        })
    }

    /// `|k⟩⟨k|` for a normalized ket.
    pub fn projector(k: &Ket) -> Result<Self, QError> {
        if !k.is_normalized() {
            return Err(QError::NotNormalized(k.norm_squared()));
        }
        Ok(Self {
            m: &k.amps * k.amps.adjoint(),
        })
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.m
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        self.m[(row, col)]
    }

    pub fn adjoint(&self) -> Self {
        Self {
            m: self.m.adjoint(),
        }
    }

    pub fn compose(&self, rhs: &Operator) -> Result<Self, QError> {
        self.same_dim(rhs.dim())?;
        Ok(Self {
            m: &self.m * &rhs.m,
        })
    }

    pub fn add(&self, rhs: &Operator) -> Result<Self, QError> {
        self.same_dim(rhs.dim())?;
        Ok(Self {
            m: &self.m + &rhs.m,
        })
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            m: &self.m * factor,
        }
    }

    pub fn apply(&self, k: &Ket) -> Result<Ket, QError> {
        self.same_dim(k.dim())?;
        Ok(Ket::from_vector(&self.m * &k.amps))
    }

    pub fn determinant(&self) -> C64 {
        self.m.determinant()
    }

    /// Frobenius norm of `[self, other]`.
    pub fn commutator_norm(&self, other: &Operator) -> Result<f64, QError> {
        self.same_dim(other.dim())?;
        Ok((&self.m * &other.m - &other.m * &self.m).norm())
    }

    pub fn unitarity_residual(&self) -> f64 {
        let n = self.dim();
        (self.m.adjoint() * &self.m - DMatrix::<C64>::identity(n, n)).norm()
    }

    pub fn hermiticity_residual(&self) -> f64 {
        (&self.m - self.m.adjoint()).norm()
    }

    pub fn is_unitary(&self) -> bool {
        self.unitarity_residual() < EXACT_TOL
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_residual() < EXACT_TOL
    }

    pub fn is_projector(&self) -> bool {
        self.is_hermitian() && (&self.m * &self.m - &self.m).norm() < EXACT_TOL
    }

    /// Eigenvalues of a Hermitian operator in ascending order.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        sorted_eigenvalues(&self.m)
    }

    fn same_dim(&self, dim: usize) -> Result<(), QError> {
        if self.dim() != dim {
            return Err(QError::DimensionMismatch {
                expected: self.dim(),
                found: dim,
            });
        }
        Ok(())
    }
}

impl Tensor for Operator {
    fn tensor(&self, rest: &Self) -> Result<Self, QError> {
        for op in [self, rest] {
            if op.dim() != 2 {
                return Err(QError::DimensionMismatch {
                    expected: 2,
                    found: op.dim(),
                });
            }
        }
        Ok(Self {
            m: kron(&self.m, &rest.m),
        })
    }
}

fn sorted_eigenvalues(m: &DMatrix<C64>) -> Vec<f64> {
    let herm = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let mut ev: Vec<f64> = herm.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// `exp(−iℋt)` for the single-photon generator `ℋ = iω(|H⟩⟨V| − |V⟩⟨H|)` at
/// angle `θ = ωt`: `|H⟩ → cosθ|H⟩ − sinθ|V⟩`, `|V⟩ → sinθ|H⟩ + cosθ|V⟩`.
pub fn rotation_unitary(theta: f64) -> Operator {
    let (s, c) = theta.sin_cos();
    Operator {
        m: DMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(c, 0.0),
                C64::new(s, 0.0),
                C64::new(-s, 0.0),
                C64::new(c, 0.0),
            ],
        ),
    }
}

/// Birefringent plate of optical thickness `δ`: `cosδ·1 + i sinδ·X`, so that
/// `|V⟩ → cosδ|V⟩ + i sinδ|H⟩`.
pub fn waveplate_unitary(delta: f64) -> Operator {
    let (s, c) = delta.sin_cos();
    Operator {
        m: DMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(c, 0.0),
                C64::new(0.0, s),
                C64::new(0.0, s),
                C64::new(c, 0.0),
            ],
        ),
    }
}

/// Result of conditioning a ket on a projector.
#[derive(Debug, Clone, PartialEq)]
pub enum Projection {
    Outcome {
        ket: Ket,
        probability: f64,
    },
    /// The conditioning event has probability below [`NULL_PROB`].
    Null {
        probability: f64,
    },
}

impl Projection {
    pub fn probability(&self) -> f64 {
        match self {
            Projection::Outcome { probability, .. } | Projection::Null { probability } => {
                *probability
            }
        }
    }

    pub fn ket(&self) -> Option<&Ket> {
        match self {
            Projection::Outcome { ket, .. } => Some(ket),
            Projection::Null { .. } => None,
        }
    }
}

/// Returns `P|ψ⟩/‖P|ψ⟩‖` together with `‖P|ψ⟩‖²`.
pub fn project_and_renorm(p: &Operator, psi: &Ket) -> Result<Projection, QError> {
    if !p.is_projector() {
        return Err(QError::NotProjector);
    }
    let projected = p.apply(psi)?;
    let probability = projected.norm_squared();
    if probability < NULL_PROB {
        return Ok(Projection::Null { probability });
    }
    Ok(Projection::Outcome {
        ket: projected.normalize()?,
        probability,
    })
}

// ── DensityMatrix ───────────────────────────────────────────────────────────

/// Hermitian, unit-trace state. Positivity is tracked, not always enforced:
/// see [`DensityMatrix::from_hermitian`].
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    m: DMatrix<C64>,
}

impl DensityMatrix {
    /// Validated constructor: Hermitian, trace one, PSD within tolerance.
    pub fn new(m: DMatrix<C64>) -> Result<Self, QError> {
        let rho = Self::from_hermitian(m)?;
        let min = rho.min_eigenvalue();
        if min < -PSD_TOL {
            return Err(QError::NotDensityMatrix(format!(
                "negative eigenvalue {min:e}"
            )));
        }
        Ok(rho)
    }

    /// Accepts Hermitian unit-trace matrices that may fail positivity, such
    /// as linear-inversion estimates. Check with [`DensityMatrix::is_physical`].
    pub fn from_hermitian(m: DMatrix<C64>) -> Result<Self, QError> {
        if !m.is_square() {
            return Err(QError::DimensionMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        check_dim(m.nrows())?;
        if !all_finite(m.iter()) {
            return Err(QError::NonFinite);
        }
        let herm = (&m - m.adjoint()).norm();
        if herm > DENSITY_TOL {
            return Err(QError::NotDensityMatrix(format!(
                "hermiticity residual {herm:e}"
            )));
        }
        let tr = m.trace();
        if (tr - ONE).norm() > DENSITY_TOL {
            return Err(QError::NotDensityMatrix(format!("trace {tr}")));
        }
        Ok(Self { m })
    }

    pub fn from_ket(k: &Ket) -> Result<Self, QError> {
        let k = k.normalize()?;
        Ok(Self {
            m: &k.amps * k.amps.adjoint(),
        })
    }

    pub fn maximally_mixed(dim: usize) -> Result<Self, QError> {
        check_dim(dim)?;
        Ok(Self {
            m: DMatrix::identity(dim, dim).unscale(dim as f64),
        })
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.m
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        self.m[(row, col)]
    }

    pub fn trace(&self) -> C64 {
        self.m.trace()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        sorted_eigenvalues(&self.m)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    pub fn is_physical(&self) -> bool {
        self.min_eigenvalue() >= -PSD_TOL
    }

    /// `Re Tr[A ρ]`.
    pub fn expectation(&self, a: &Operator) -> Result<f64, QError> {
        if a.dim() != self.dim() {
            return Err(QError::DimensionMismatch {
                expected: self.dim(),
                found: a.dim(),
            });
        }
        Ok((a.matrix() * &self.m).trace().re)
    }

    /// `U ρ U†`.
    pub fn evolve(&self, u: &Operator) -> Result<Self, QError> {
        if u.dim() != self.dim() {
            return Err(QError::DimensionMismatch {
                expected: self.dim(),
                found: u.dim(),
            });
        }
        Ok(Self {
            m: u.matrix() * &self.m * u.matrix().adjoint(),
        })
    }

    /// Nearest physical state in the eigenbasis: negative eigenvalues are
    /// clipped to zero and the trace restored.
    pub fn project_to_physical(&self) -> Result<Self, QError> {
        let herm = (&self.m + self.m.adjoint()) * C64::new(0.5, 0.0);
        let eig = herm.symmetric_eigen();
        let clipped: Vec<f64> = eig.eigenvalues.iter().map(|&l| l.max(0.0)).collect();
        let total: f64 = clipped.iter().sum();
        if total < NULL_PROB {
            return Err(QError::NotDensityMatrix("no positive spectrum".into()));
        }
        let n = self.dim();
        let mut out = DMatrix::from_element(n, n, ZERO);
        for (k, &l) in clipped.iter().enumerate() {
            if l > 0.0 {
                let v = eig.eigenvectors.column(k);
                out += (v * v.adjoint()) * C64::new(l / total, 0.0);
            }
        }
        Ok(Self { m: out })
    }
}

/// `⟨ψ|ρ|ψ⟩`, clipped to `[0, 1]`.
pub fn fidelity_pure(rho: &DensityMatrix, psi: &Ket) -> Result<f64, QError> {
    if rho.dim() != psi.dim() {
        return Err(QError::DimensionMismatch {
            expected: rho.dim(),
            found: psi.dim(),
        });
    }
    if !psi.is_normalized() {
        return Err(QError::NotNormalized(psi.norm_squared()));
    }
    let f = psi.amps.dotc(&(&rho.m * &psi.amps)).re;
    Ok(f.clamp(0.0, 1.0))
}

/// Reduced 2×2 state of one factor of a dimension-4 density matrix.
pub fn partial_trace(rho: &DensityMatrix, keep: Factor) -> Result<DensityMatrix, QError> {
    if rho.dim() != 4 {
        return Err(QError::DimensionMismatch {
            expected: 4,
            found: rho.dim(),
        });
    }
    let m = &rho.m;
    let reduced = DMatrix::from_fn(2, 2, |i, j| match keep {
        Factor::Clock => m[(2 * i, 2 * j)] + m[(2 * i + 1, 2 * j + 1)],
        Factor::Rest => m[(i, j)] + m[(2 + i, 2 + j)],
    });
    Ok(DensityMatrix { m: reduced })
}
