//! Spin-1/2 angular momentum operators in the Zeeman product basis and the
//! singlet/triplet basis of a designated spin pair.
//!
//! Basis ordering: spin 0 is the most significant bit of the basis index and
//! a cleared bit means spin-up, so index 0 is |↑↑…⟩ and, for two spins,
//! the product basis is |↑↑⟩, |↑↓⟩, |↓↑⟩, |↓↓⟩.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Largest supported spin count for operator construction.
pub const MAX_SPINS: usize = 3;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

/// 2×2 matrix of the spin-1/2 operator (σ/2) along `axis`.
fn half_pauli(axis: Axis) -> [[Complex64; 2]; 2] {
    let h = 0.5;
    match axis {
        Axis::X => [[ZERO, Complex64::new(h, 0.0)], [Complex64::new(h, 0.0), ZERO]],
        Axis::Y => [[ZERO, Complex64::new(0.0, -h)], [Complex64::new(0.0, h), ZERO]],
        Axis::Z => [[Complex64::new(h, 0.0), ZERO], [ZERO, Complex64::new(-h, 0.0)]],
    }
}

#[inline]
fn bit(index: usize, spin: usize, n_spins: usize) -> usize {
    (index >> (n_spins - 1 - spin)) & 1
}

fn check_spin_count(n_spins: usize) -> Result<()> {
    if (1..=MAX_SPINS).contains(&n_spins) {
        Ok(())
    } else {
        Err(Error::InvalidSystem(format!(
            "spin count must be between 1 and {MAX_SPINS}, got {n_spins}"
        )))
    }
}

/// Angular momentum operator I_kα of spin `k` (zero-based) embedded in the
/// 2^n dimensional product space.
pub fn spin_operator(n_spins: usize, k: usize, axis: Axis) -> Result<CMatrix> {
    check_spin_count(n_spins)?;
    if k >= n_spins {
        return Err(Error::SpinIndex { index: k, n_spins });
    }
    let dim = 1usize << n_spins;
    let s = half_pauli(axis);
    let others = (dim - 1) ^ (1 << (n_spins - 1 - k));
    Ok(CMatrix::from_fn(dim, dim, |a, b| {
        if (a & others) != (b & others) {
            ZERO
        } else {
            s[bit(a, k, n_spins)][bit(b, k, n_spins)]
        }
    }))
}

/// Sum of I_kα over all spins.
pub fn total_operator(n_spins: usize, axis: Axis) -> Result<CMatrix> {
    let dim = 1usize << n_spins;
    (0..n_spins).try_fold(CMatrix::zeros(dim, dim), |acc, k| {
        Ok(acc + spin_operator(n_spins, k, axis)?)
    })
}

/// Scalar product I_i·I_j.
pub fn scalar_coupling(n_spins: usize, i: usize, j: usize) -> Result<CMatrix> {
    [Axis::X, Axis::Y, Axis::Z]
        .into_iter()
        .try_fold(CMatrix::zeros(1 << n_spins, 1 << n_spins), |acc, axis| {
            Ok(acc + spin_operator(n_spins, i, axis)? * spin_operator(n_spins, j, axis)?)
        })
}

/// Designated pair of spins (zero-based indices) whose singlet is tracked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "[usize; 2]", into = "[usize; 2]")]
pub struct SpinPair {
    first: usize,
    second: usize,
}

impl SpinPair {
    pub fn new(first: usize, second: usize) -> Result<Self> {
        if first == second {
            return Err(Error::InvalidPair(first, second));
        }
        Ok(Self { first, second })
    }

    pub fn first(&self) -> usize {
        self.first
    }

    pub fn second(&self) -> usize {
        self.second
    }

    pub fn check(&self, n_spins: usize) -> Result<()> {
        if self.first >= n_spins || self.second >= n_spins {
            Err(Error::InvalidPair(self.first, self.second))
        } else {
            Ok(())
        }
    }

    /// Spins not belonging to the pair, in ascending order.
    pub fn spectators(&self, n_spins: usize) -> Vec<usize> {
        (0..n_spins)
            .filter(|&k| k != self.first && k != self.second)
            .collect()
    }
}

impl Default for SpinPair {
    fn default() -> Self {
        Self { first: 0, second: 1 }
    }
}

impl TryFrom<[usize; 2]> for SpinPair {
    type Error = Error;

    fn try_from(value: [usize; 2]) -> Result<Self> {
        Self::new(value[0], value[1])
    }
}

impl From<SpinPair> for [usize; 2] {
    fn from(pair: SpinPair) -> Self {
        [pair.first, pair.second]
    }
}

/// Pair states in the column order of [`singlet_triplet_basis`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairState {
    TPlus,
    T0,
    TMinus,
    S0,
}

impl PairState {
    pub const ALL: [PairState; 4] = [PairState::TPlus, PairState::T0, PairState::TMinus, PairState::S0];

    /// Amplitude of the pair state on |b_first b_second⟩ (bit 0 = up).
    fn amplitude(self, b_first: usize, b_second: usize) -> f64 {
        match (self, b_first, b_second) {
            (PairState::TPlus, 0, 0) => 1.0,
            (PairState::TMinus, 1, 1) => 1.0,
            (PairState::T0, 0, 1) | (PairState::T0, 1, 0) => FRAC_1_SQRT_2,
            (PairState::S0, 0, 1) => FRAC_1_SQRT_2,
            (PairState::S0, 1, 0) => -FRAC_1_SQRT_2,
            _ => 0.0,
        }
    }

    fn column_block(self) -> usize {
        match self {
            PairState::TPlus => 0,
            PairState::T0 => 1,
            PairState::TMinus => 2,
            PairState::S0 => 3,
        }
    }
}

/// Unitary whose columns are |T+⟩, |T0⟩, |T−⟩, |S0⟩ of `pair`, each tensored
/// with the product states of the spectator spins. Column index is
/// `block * 2^(n-2) + spectator_index` with blocks ordered as [`PairState::ALL`].
pub fn singlet_triplet_basis(n_spins: usize, pair: SpinPair) -> Result<CMatrix> {
    check_spin_count(n_spins)?;
    if n_spins < 2 {
        return Err(Error::InvalidPair(pair.first, pair.second));
    }
    pair.check(n_spins)?;
    let dim = 1usize << n_spins;
    let spectators = pair.spectators(n_spins);
    let n_rest = spectators.len();
    let mut basis = CMatrix::zeros(dim, dim);
    for state in PairState::ALL {
        for rest in 0..(1usize << n_rest) {
            let col = state.column_block() * (1 << n_rest) + rest;
            for row in 0..dim {
                let rest_matches = spectators
                    .iter()
                    .enumerate()
                    .all(|(m, &spin)| bit(row, spin, n_spins) == (rest >> (n_rest - 1 - m)) & 1);
                if rest_matches {
                    let amp = state.amplitude(
                        bit(row, pair.first, n_spins),
                        bit(row, pair.second, n_spins),
                    );
                    basis[(row, col)] = Complex64::new(amp, 0.0);
                }
            }
        }
    }
    Ok(basis)
}

/// Projector onto `state` of the pair, identity on the spectators.
pub fn pair_state_projector(n_spins: usize, pair: SpinPair, state: PairState) -> Result<CMatrix> {
    let basis = singlet_triplet_basis(n_spins, pair)?;
    let block = 1usize << (n_spins - 2);
    let cols = basis.columns(state.column_block() * block, block);
    Ok(cols * cols.adjoint())
}

/// Linear observables reported by the simulator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ObservableKind {
    Mx,
    My,
    Mz,
    #[serde(rename = "P_S0")]
    SingletPopulation,
    #[serde(rename = "P_T0")]
    T0Population,
    #[serde(rename = "P_T+")]
    TPlusPopulation,
    #[serde(rename = "P_T-")]
    TMinusPopulation,
}

impl ObservableKind {
    pub const ALL: [ObservableKind; 7] = [
        ObservableKind::Mx,
        ObservableKind::My,
        ObservableKind::Mz,
        ObservableKind::SingletPopulation,
        ObservableKind::T0Population,
        ObservableKind::TPlusPopulation,
        ObservableKind::TMinusPopulation,
    ];

    pub fn label(self) -> &'static str {
        match self {
            ObservableKind::Mx => "Mx",
            ObservableKind::My => "My",
            ObservableKind::Mz => "Mz",
            ObservableKind::SingletPopulation => "P_S0",
            ObservableKind::T0Population => "P_T0",
            ObservableKind::TPlusPopulation => "P_T+",
            ObservableKind::TMinusPopulation => "P_T-",
        }
    }

    pub fn is_population(self) -> bool {
        !matches!(self, ObservableKind::Mx | ObservableKind::My | ObservableKind::Mz)
    }
}

/// A Hermitian operator with its label.
#[derive(Debug, Clone)]
pub struct Observable {
    kind: ObservableKind,
    matrix: CMatrix,
}

impl Observable {
    pub fn new(kind: ObservableKind, n_spins: usize, pair: SpinPair) -> Result<Self> {
        let matrix = match kind {
            ObservableKind::Mx => total_operator(n_spins, Axis::X)?,
            ObservableKind::My => total_operator(n_spins, Axis::Y)?,
            ObservableKind::Mz => total_operator(n_spins, Axis::Z)?,
            ObservableKind::SingletPopulation => pair_state_projector(n_spins, pair, PairState::S0)?,
            ObservableKind::T0Population => pair_state_projector(n_spins, pair, PairState::T0)?,
            ObservableKind::TPlusPopulation => pair_state_projector(n_spins, pair, PairState::TPlus)?,
            ObservableKind::TMinusPopulation => pair_state_projector(n_spins, pair, PairState::TMinus)?,
        };
        Ok(Self { kind, matrix })
    }

    pub fn kind(&self) -> ObservableKind {
        self.kind
    }

    pub fn label(&self) -> &'static str {
        self.kind.label()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Largest elementwise |A − A†|.
pub fn hermitian_defect(m: &CMatrix) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub(crate) fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}
