//! Level-crossing diagnostics for a spin-locked pair.
//!
//! In the basis of triplets quantized along the lock axis (|T+φ⟩, |T0φ⟩,
//! |T−φ⟩) plus |S0⟩, the drive is diagonal and the chemical-shift
//! difference appears as an off-diagonal coupling of magnitude Δν/(2√2)
//! between |S0⟩ and |T±φ⟩. At ν_n = J the |T−φ⟩ and |S0⟩ levels cross.

use std::f64::consts::{FRAC_PI_2, TAU};

use nalgebra::Matrix2;
use num_complex::Complex64;

use super::operators::{singlet_triplet_basis, total_operator, Axis, CMatrix, SpinPair};
use super::state::Propagator;
use super::system::{hamiltonian, SpinSystem};
use crate::error::{Error, Result};

/// Column indices in [`dressed_basis`].
pub const DRESSED_T_PLUS: usize = 0;
pub const DRESSED_T_ZERO: usize = 1;
pub const DRESSED_T_MINUS: usize = 2;
pub const DRESSED_SINGLET: usize = 3;

fn require_pair_system(system: &SpinSystem) -> Result<()> {
    if system.n_spins() != 2 {
        return Err(Error::InvalidSystem(
            "crossing diagnostics are defined for two-spin systems".into(),
        ));
    }
    Ok(())
}

/// Unitary with columns |T+φ⟩, |T0φ⟩, |T−φ⟩, |S0⟩ for a lock at azimuth `phase`.
pub fn dressed_basis(phase: f64) -> Result<CMatrix> {
    // exp(−iφFz)·exp(−i(π/2)Fy) carries the z axis onto the lock axis.
    let fy = total_operator(2, Axis::Y)?;
    let fz = total_operator(2, Axis::Z)?;
    let tilt = Propagator::new(&fy)?.unitary(FRAC_PI_2);
    let turn = Propagator::new(&fz)?.unitary(phase);
    Ok(turn * tilt * singlet_triplet_basis(2, SpinPair::default())?)
}

/// Rotating-frame Hamiltonian expressed in the dressed basis, in Hz.
pub fn dressed_hamiltonian(system: &SpinSystem, nutation_hz: f64, phase: f64) -> Result<CMatrix> {
    require_pair_system(system)?;
    let basis = dressed_basis(phase)?;
    let h = hamiltonian(system, nutation_hz, phase)? / Complex64::new(TAU, 0.0);
    Ok(basis.adjoint() * h * &basis)
}

/// |⟨S0|H|T−φ⟩| in Hz.
pub fn crossing_coupling(system: &SpinSystem, nutation_hz: f64, phase: f64) -> Result<f64> {
    Ok(dressed_hamiltonian(system, nutation_hz, phase)?[(DRESSED_SINGLET, DRESSED_T_MINUS)].norm())
}

/// Splitting of the {|T−φ⟩, |S0⟩} block of the dressed Hamiltonian, in Hz.
///
/// This is the two-level crossing model: couplings to the far-detuned
/// |T+φ⟩ level are dropped.
pub fn crossing_block_gap(system: &SpinSystem, nutation_hz: f64) -> Result<f64> {
    let h = dressed_hamiltonian(system, nutation_hz, 0.0)?;
    let idx = [DRESSED_T_MINUS, DRESSED_SINGLET];
    let block = Matrix2::from_fn(|r, c| h[(idx[r], idx[c])]);
    let eig = block.symmetric_eigenvalues();
    Ok((eig[0] - eig[1]).abs())
}

/// Gap between the two lowest eigenvalues of the full Hamiltonian, in Hz.
pub fn lowest_pair_gap(system: &SpinSystem, nutation_hz: f64) -> Result<f64> {
    require_pair_system(system)?;
    let h = hamiltonian(system, nutation_hz, 0.0)? / Complex64::new(TAU, 0.0);
    let mut eig: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    eig.sort_by(|a, b| a.total_cmp(b));
    Ok(eig[1] - eig[0])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GapModel {
    /// [`crossing_block_gap`]
    CrossingBlock,
    /// [`lowest_pair_gap`]
    FullHamiltonian,
}

/// Grid point and value of the minimal gap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapMinimum {
    pub nutation_hz: f64,
    pub gap_hz: f64,
}

pub fn scan_gap_minimum(system: &SpinSystem, grid: &[f64], model: GapModel) -> Result<GapMinimum> {
    let mut best: Option<GapMinimum> = None;
    for &nu in grid {
        let gap = match model {
            GapModel::CrossingBlock => crossing_block_gap(system, nu)?,
            GapModel::FullHamiltonian => lowest_pair_gap(system, nu)?,
        };
        if best.is_none_or(|b| gap < b.gap_hz) {
            best = Some(GapMinimum { nutation_hz: nu, gap_hz: gap });
        }
    }
    best.ok_or_else(|| Error::InvalidParameter { name: "grid", reason: "empty".into() })
}
