use nalgebra::{DVector, SymmetricEigen};
use num_complex::Complex64;

use super::operators::{
    hermitian_defect, max_abs, singlet_triplet_basis, total_operator, Axis, CMatrix, Observable,
    SpinPair, MAX_SPINS,
};
use crate::error::{require_non_negative, Error, Result};
use crate::relaxation::RelaxationParams;

/// Relative Hermiticity tolerance for a valid state.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Absolute tolerance on Tr ρ = 1.
pub const TRACE_TOL: f64 = 1e-12;
/// Most negative eigenvalue accepted as numerical noise.
pub const EIGEN_FLOOR: f64 = -1e-10;

/// Density matrix of a spin-1/2 ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityState {
    n_spins: usize,
    matrix: CMatrix,
}

fn spins_for_dim(dim: usize) -> Result<usize> {
    (1..=MAX_SPINS)
        .find(|&n| 1usize << n == dim)
        .ok_or_else(|| Error::InvalidState(format!("dimension {dim} is not 2^n for n ≤ {MAX_SPINS}")))
}

fn hermitian_part(m: CMatrix) -> CMatrix {
    let adj = m.adjoint();
    (m + adj) * Complex64::new(0.5, 0.0)
}

impl DensityState {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::InvalidState("matrix is not square".into()));
        }
        let state = Self { n_spins: spins_for_dim(matrix.nrows())?, matrix };
        state.validate()?;
        Ok(state)
    }

    pub fn maximally_mixed(n_spins: usize) -> Result<Self> {
        let dim = 1usize << n_spins;
        spins_for_dim(dim)?;
        Ok(Self {
            n_spins,
            matrix: CMatrix::identity(dim, dim) * Complex64::new(1.0 / dim as f64, 0.0),
        })
    }

    /// High-temperature equilibrium 1/2^n + ε·Σ I_kz.
    pub fn thermal(n_spins: usize, polarization: f64) -> Result<Self> {
        let fz = total_operator(n_spins, Axis::Z)?;
        Self::from_deviation(n_spins, &fz, polarization)
    }

    /// 1/2^n + scale·deviation, with the deviation made traceless.
    pub fn from_deviation(n_spins: usize, deviation: &CMatrix, scale: f64) -> Result<Self> {
        let dim = 1usize << n_spins;
        if deviation.nrows() != dim || deviation.ncols() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: deviation.nrows() });
        }
        let trace = deviation.trace() / Complex64::new(dim as f64, 0.0);
        let traceless = deviation - CMatrix::identity(dim, dim) * trace;
        let matrix = CMatrix::identity(dim, dim) * Complex64::new(1.0 / dim as f64, 0.0)
            + traceless * Complex64::new(scale, 0.0);
        Self::new(matrix)
    }

    /// |ψ⟩⟨ψ| for a normalized ket.
    pub fn pure(ket: &DVector<Complex64>) -> Result<Self> {
        let norm = ket.norm();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidState(format!("ket norm {norm} is not 1")));
        }
        Self::new(ket * ket.adjoint())
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// ρ − 1/2^n.
    pub fn deviation(&self) -> CMatrix {
        let dim = self.dim();
        &self.matrix - CMatrix::identity(dim, dim) * Complex64::new(1.0 / dim as f64, 0.0)
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    /// Tr ρ².
    pub fn purity(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut values: Vec<f64> = self.matrix.symmetric_eigenvalues().iter().copied().collect();
        values.sort_by(|a, b| a.total_cmp(b));
        values
    }

    pub fn validate(&self) -> Result<()> {
        let scale = max_abs(&self.matrix).max(f64::MIN_POSITIVE);
        let defect = hermitian_defect(&self.matrix);
        if defect > HERMITIAN_TOL * scale {
            return Err(Error::InvalidState(format!("not Hermitian (defect {defect:e})")));
        }
        let tr = self.trace();
        if (tr - Complex64::new(1.0, 0.0)).norm() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        if let Some(&min) = self.eigenvalues().first() {
            if min < EIGEN_FLOOR {
                return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
            }
        }
        Ok(())
    }

    fn check_dim(&self, dim: usize) -> Result<()> {
        if dim != self.dim() {
            Err(Error::DimensionMismatch { expected: self.dim(), found: dim })
        } else {
            Ok(())
        }
    }

    fn with_matrix(&self, matrix: CMatrix) -> Self {
        Self { n_spins: self.n_spins, matrix: hermitian_part(matrix) }
    }

    /// U ρ U† with U = exp(−iHt); `h` in rad/s.
    pub fn propagate(&self, h: &CMatrix, t: f64) -> Result<Self> {
        self.check_dim(h.nrows())?;
        Propagator::new(h)?.evolve(self, t)
    }

    /// Instantaneous rotation of every spin by `flip` about the in-plane axis
    /// at azimuth `phase` (0 = +x, π/2 = +y).
    pub fn apply_hard_pulse(&self, flip: f64, phase: f64) -> Result<Self> {
        if !flip.is_finite() || !phase.is_finite() {
            return Err(Error::InvalidParameter {
                name: "flip/phase",
                reason: "must be finite".into(),
            });
        }
        let generator = total_operator(self.n_spins, Axis::X)? * Complex64::new(phase.cos(), 0.0)
            + total_operator(self.n_spins, Axis::Y)? * Complex64::new(phase.sin(), 0.0);
        let rotation = Propagator::new(&generator)?.unitary(flip);
        Ok(self.with_matrix(&rotation * &self.matrix * rotation.adjoint()))
    }

    /// Tr(ρ O).
    pub fn expectation(&self, obs: &Observable) -> Result<f64> {
        self.check_dim(obs.dim())?;
        trace_product(&self.matrix, obs.matrix())
    }

    /// Tr((ρ − 1/2^n) O).
    pub fn deviation_expectation(&self, obs: &Observable) -> Result<f64> {
        self.check_dim(obs.dim())?;
        trace_product(&self.deviation(), obs.matrix())
    }

    /// Multiplies the deviation from the identity by `factor`.
    pub fn scale_deviation(&self, factor: f64) -> Self {
        let dim = self.dim();
        let id = CMatrix::identity(dim, dim) * Complex64::new(1.0 / dim as f64, 0.0);
        self.with_matrix(&id + self.deviation() * Complex64::new(factor, 0.0))
    }

    /// Storage-period relaxation in the singlet/triplet basis of `pair`.
    ///
    /// Singlet-block deviation populations decay with T_S, the traceless part
    /// of the triplet populations with T₁, and every coherence with the
    /// singlet–triplet coherence lifetime. The triplet block absorbs the
    /// compensating shift that keeps Tr ρ = 1.
    pub fn apply_evolve_relaxation(
        &self,
        params: &RelaxationParams,
        pair: SpinPair,
        t: f64,
    ) -> Result<Self> {
        require_non_negative("t", t)?;
        self.relax_channels(
            pair,
            (-t / params.ts).exp(),
            (-t / params.t1).exp(),
            (-t / params.t_coherence).exp(),
        )
    }

    /// Keeps only the singlet-block populations (the long-storage limit of
    /// [`apply_evolve_relaxation`](Self::apply_evolve_relaxation) with
    /// T_S → ∞).
    pub fn singlet_filter(&self, pair: SpinPair) -> Result<Self> {
        self.relax_channels(pair, 1.0, 0.0, 0.0)
    }

    fn relax_channels(&self, pair: SpinPair, e_s: f64, e_t: f64, e_c: f64) -> Result<Self> {
        let basis = singlet_triplet_basis(self.n_spins, pair)?;
        let dim = self.dim();
        let block = dim / 4;
        let singlet_start = 3 * block;
        let mut sigma = basis.adjoint() * self.deviation() * &basis;

        let singlet_sum: f64 = (singlet_start..dim).map(|k| sigma[(k, k)].re).sum();
        let triplet_count = singlet_start as f64;
        let shift = singlet_sum / triplet_count;
        for k in 0..dim {
            for l in 0..dim {
                if k != l {
                    sigma[(k, l)] *= e_c;
                }
            }
            let d = sigma[(k, k)].re;
            let relaxed = if k >= singlet_start {
                d * e_s
            } else {
                -shift * e_s + (d + shift) * e_t
            };
            sigma[(k, k)] = Complex64::new(relaxed, 0.0);
        }
        let id = CMatrix::identity(dim, dim) * Complex64::new(1.0 / dim as f64, 0.0);
        Ok(self.with_matrix(id + &basis * sigma * basis.adjoint()))
    }

    /// Frobenius norm of the singlet–triplet off-diagonal blocks of the deviation.
    pub fn st_coherence_norm(&self, pair: SpinPair) -> Result<f64> {
        let basis = singlet_triplet_basis(self.n_spins, pair)?;
        let sigma = basis.adjoint() * self.deviation() * &basis;
        let dim = self.dim();
        let singlet_start = 3 * dim / 4;
        let mut sum = 0.0;
        for k in singlet_start..dim {
            for l in 0..singlet_start {
                sum += sigma[(k, l)].norm_sqr() + sigma[(l, k)].norm_sqr();
            }
        }
        Ok(sum.sqrt())
    }
}

fn trace_product(a: &CMatrix, b: &CMatrix) -> Result<f64> {
    let dim = a.nrows();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..dim {
        for k in 0..dim {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    if acc.im.abs() > 1e-10 * acc.re.abs().max(1.0) {
        return Err(Error::ComplexExpectation(acc.im));
    }
    Ok(acc.re)
}

/// exp(−iHt) from the eigendecomposition of a Hermitian H.
#[derive(Debug, Clone)]
pub struct Propagator {
    eigenvalues: DVector<f64>,
    eigenvectors: CMatrix,
}

impl Propagator {
    pub fn new(h: &CMatrix) -> Result<Self> {
        if h.nrows() != h.ncols() {
            return Err(Error::DimensionMismatch { expected: h.nrows(), found: h.ncols() });
        }
        let defect = hermitian_defect(h);
        if defect > 1e-10 * max_abs(h).max(1.0) {
            return Err(Error::NotHermitian(defect));
        }
        let SymmetricEigen { eigenvalues, eigenvectors } = SymmetricEigen::new(hermitian_part(h.clone()));
        Ok(Self { eigenvalues, eigenvectors })
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    pub fn unitary(&self, t: f64) -> CMatrix {
        let phases = self.eigenvalues.map(|e| Complex64::from_polar(1.0, -e * t));
        let mut scaled = self.eigenvectors.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= phases[j];
        }
        scaled * self.eigenvectors.adjoint()
    }

    pub fn evolve(&self, state: &DensityState, t: f64) -> Result<DensityState> {
        require_non_negative("t", t)?;
        state.check_dim(self.eigenvectors.nrows())?;
        if t == 0.0 {
            return Ok(state.clone());
        }
        let u = self.unitary(t);
        Ok(state.with_matrix(&u * state.matrix() * u.adjoint()))
    }
}
