//! Brute-force ground truth on the truncated product space
//! `isospin ⊗ [field isospin] ⊗ chain{0..=nmax}`.
//!
//! The dense Hamiltonian is assembled term by term from the raising and
//! lowering operators, never from the block formulas, and is diagonalized with
//! nalgebra's symmetric eigensolver rather than the Jacobi sweep used for the
//! blocks. Chain levels above `nmax` are dropped, so couplings out of the top
//! level vanish; a state with weight on the top two levels is flagged.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::blocks::{dmo_block, eig_block, extended_block, HermitianBlock};
use crate::dynamics::{LabeledState, Propagator};
use crate::error::{usage, Result};
use crate::qnums::{invariant_of, ladder_coefficient, BasisKet, ModelSpec, Sign};

pub const STATE_TOL: f64 = 1e-10;
pub const SPECTRAL_TOL: f64 = 1e-10;
pub const INVARIANT_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct FullSpace {
    pub spec: ModelSpec,
    pub nmax: u32,
    kets: Vec<BasisKet>,
}

impl FullSpace {
    pub fn new(spec: &ModelSpec, nmax: u32) -> Result<Self> {
        spec.validate()?;
        if nmax < 1 {
            return usage("nmax must be at least 1");
        }
        let signs = [Sign::Minus, Sign::Plus];
        let mut kets = Vec::new();
        for s1 in signs {
            let second: Vec<Option<Sign>> = if spec.extended {
                signs.iter().copied().map(Some).collect()
            } else {
                vec![None]
            };
            for s2 in second {
                for osc in 0..=nmax {
                    kets.push(BasisKet { iso1: s1, iso2: s2, osc });
                }
            }
        }
        Ok(FullSpace { spec: *spec, nmax, kets })
    }

    pub fn dimension(&self) -> usize {
        self.kets.len()
    }

    pub fn ket(&self, index: usize) -> BasisKet {
        self.kets[index]
    }

    pub fn kets(&self) -> &[BasisKet] {
        &self.kets
    }

    pub fn index_of(&self, ket: &BasisKet) -> Option<usize> {
        if ket.osc > self.nmax || ket.iso2.is_some() != self.spec.extended {
            return None;
        }
        let bit = |s: Sign| (s == Sign::Plus) as usize;
        let isospin = match ket.iso2 {
            Some(s2) => 2 * bit(ket.iso1) + bit(s2),
            None => bit(ket.iso1),
        };
        Some(isospin * (self.nmax as usize + 1) + ket.osc as usize)
    }

    /// Eigenvalue of `I` for every basis index.
    pub fn invariant_diagonal(&self) -> Vec<f64> {
        self.kets.iter().map(|k| invariant_of(k).value()).collect()
    }

    pub fn embed(&self, state: &LabeledState) -> Result<DVector<C64>> {
        let mut psi = DVector::zeros(self.dimension());
        for (ket, amp) in state.basis.kets.iter().zip(state.amplitudes.iter()) {
            match self.index_of(ket) {
                Some(i) => psi[i] = *amp,
                None => return usage(format!("ket {ket} lies outside the truncated space")),
            }
        }
        Ok(psi)
    }

    /// Whether `psi` has weight on the top two chain levels.
    pub fn touches_edge(&self, psi: &DVector<C64>) -> bool {
        self.kets
            .iter()
            .zip(psi.iter())
            .any(|(k, a)| k.osc + 1 >= self.nmax && a.norm() > 0.0)
    }
}

/// Dense Hamiltonian of `spec` on the truncated space.
pub fn build_full(spec: &ModelSpec, nmax: u32) -> Result<(FullSpace, DMatrix<f64>)> {
    let space = FullSpace::new(spec, nmax)?;
    let n = space.dimension();
    let mut h = DMatrix::zeros(n, n);
    let chi = if spec.extended { spec.chi } else { 0.0 };
    let gamma = if spec.extended { spec.gamma } else { 0.0 };

    for (src, ket) in space.kets.iter().enumerate() {
        h[(src, src)] += spec.mc2 * ket.iso1.sz() as f64
            + gamma * ket.iso2.map_or(0.0, |s| s.sz() as f64);

        // σ₊A and σ₋A† on the oscillator isospin
        let mut targets: Vec<(BasisKet, f64)> = Vec::with_capacity(4);
        match ket.iso1 {
            Sign::Minus if ket.osc >= 1 => targets.push((
                BasisKet { iso1: Sign::Plus, osc: ket.osc - 1, ..*ket },
                spec.eta * ladder_coefficient(spec, ket.osc)?,
            )),
            Sign::Plus if ket.osc < nmax => targets.push((
                BasisKet { iso1: Sign::Minus, osc: ket.osc + 1, ..*ket },
                spec.eta * ladder_coefficient(spec, ket.osc + 1)?,
            )),
            _ => {}
        }
        // σ′₊A and σ′₋A† on the field isospin
        match ket.iso2 {
            Some(Sign::Minus) if ket.osc >= 1 => targets.push((
                BasisKet { iso2: Some(Sign::Plus), osc: ket.osc - 1, ..*ket },
                chi * ladder_coefficient(spec, ket.osc)?,
            )),
            Some(Sign::Plus) if ket.osc < nmax => targets.push((
                BasisKet { iso2: Some(Sign::Minus), osc: ket.osc + 1, ..*ket },
                chi * ladder_coefficient(spec, ket.osc + 1)?,
            )),
            _ => {}
        }
        for (target, amp) in targets {
            let dst = space.index_of(&target).expect("target inside truncation");
            h[(dst, src)] += amp;
        }
    }
    Ok((space, h))
}

/// `σ₊A† + σ₋A` on the oscillator isospin: Hermitian, but it does not conserve
/// `I`. Only used to perturb the oracle in negative controls.
pub fn counter_rotating_term(space: &FullSpace) -> Result<DMatrix<f64>> {
    let n = space.dimension();
    let mut v = DMatrix::zeros(n, n);
    for (src, ket) in space.kets.iter().enumerate() {
        if ket.iso1 == Sign::Minus && ket.osc < space.nmax {
            let t = BasisKet { iso1: Sign::Plus, osc: ket.osc + 1, ..*ket };
            let dst = space.index_of(&t).expect("inside truncation");
            let amp = ladder_coefficient(&space.spec, ket.osc + 1)?;
            v[(dst, src)] += amp;
            v[(src, dst)] += amp;
        }
    }
    Ok(v)
}

/// `e^{−iHt}` on the full space from one symmetric eigendecomposition.
#[derive(Clone, Debug)]
pub struct FullPropagator {
    values: DVector<f64>,
    vectors: DMatrix<f64>,
}

impl FullPropagator {
    pub fn new(h: &DMatrix<f64>) -> Self {
        let eig = SymmetricEigen::new(h.clone());
        FullPropagator {
            values: eig.eigenvalues,
            vectors: eig.eigenvectors,
        }
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.values.iter().copied().collect();
        v.sort_by(f64::total_cmp);
        v
    }

    /// Eigenbasis components `Vᵀψ₀` of an initial state.
    pub fn overlaps(&self, psi0: &DVector<C64>) -> DVector<C64> {
        let re = self.vectors.tr_mul(&psi0.map(|z| z.re));
        let im = self.vectors.tr_mul(&psi0.map(|z| z.im));
        re.zip_map(&im, C64::new)
    }

    /// `e^{−iHt}ψ₀` from precomputed [`overlaps`](Self::overlaps).
    pub fn apply_overlaps(&self, overlaps: &DVector<C64>, t: f64) -> DVector<C64> {
        let phased = overlaps.zip_map(&self.values, |o, e| o * C64::from_polar(1.0, -e * t));
        let re = &self.vectors * phased.map(|z| z.re);
        let im = &self.vectors * phased.map(|z| z.im);
        re.zip_map(&im, C64::new)
    }

    pub fn apply(&self, psi0: &DVector<C64>, t: f64) -> DVector<C64> {
        self.apply_overlaps(&self.overlaps(psi0), t)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FullState {
    pub amplitudes: DVector<C64>,
    /// Initial weight sat on the top two chain levels, so truncation may matter.
    pub edge_warning: bool,
}

pub fn evolve_full(space: &FullSpace, h: &DMatrix<f64>, psi0: &DVector<C64>, t: f64) -> FullState {
    FullState {
        amplitudes: FullPropagator::new(h).apply(psi0, t),
        edge_warning: space.touches_edge(psi0),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct InvariantDrift {
    /// `max_t |⟨I⟩(t) − ⟨I⟩(0)|`
    pub mean: f64,
    /// `max_t |Var I(t) − Var I(0)|`
    pub variance: f64,
}

pub fn check_invariant(space: &FullSpace, trajectory: &[DVector<C64>]) -> InvariantDrift {
    let inv = space.invariant_diagonal();
    let moments = |psi: &DVector<C64>| {
        let (mut m1, mut m2) = (0.0, 0.0);
        for (p, i) in psi.iter().zip(&inv) {
            let w = p.norm_sqr();
            m1 += w * i;
            m2 += w * i * i;
        }
        (m1, m2 - m1 * m1)
    };
    let Some(first) = trajectory.first() else {
        return InvariantDrift { mean: 0.0, variance: 0.0 };
    };
    let (m0, v0) = moments(first);
    trajectory.iter().fold(InvariantDrift { mean: 0.0, variance: 0.0 }, |acc, psi| {
        let (m, v) = moments(psi);
        InvariantDrift {
            mean: acc.mean.max((m - m0).abs()),
            variance: acc.variance.max((v - v0).abs()),
        }
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    /// Passes when `value ≤ tolerance`.
    pub fn at_most(name: &str, value: f64, tolerance: f64) -> Self {
        Check {
            name: name.to_string(),
            value,
            tolerance,
            passed: value <= tolerance,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub max_state_error: f64,
    pub max_spectral_error: f64,
    pub invariant_drift: f64,
    pub variance_drift: f64,
    pub edge_warning: bool,
    pub checks: Vec<Check>,
    pub pass: bool,
}

/// The block the dynamics module would use for `initial`'s subspace.
pub fn block_for(spec: &ModelSpec, initial: &LabeledState) -> Result<HermitianBlock> {
    let twice = initial.basis.invariant_value.twice();
    if spec.extended {
        extended_block(spec, twice / 2)
    } else {
        dmo_block(spec, spec.chain_bottom() + ((twice + 1) / 2) as u32)
    }
}

/// Invariant subspaces whose kets all stay at `osc ≤ nmax − 2`.
pub fn interior_blocks(spec: &ModelSpec, nmax: u32) -> Result<Vec<HermitianBlock>> {
    let mut blocks = Vec::new();
    if spec.extended {
        // subspace 𝒩 reaches osc = 𝒩 + 1
        let top = nmax as i64 - 3;
        for inv in -1..=top {
            blocks.push(extended_block(spec, inv)?);
        }
    } else {
        for k in 0..=nmax.saturating_sub(2) {
            blocks.push(dmo_block(spec, spec.chain_bottom() + k)?);
        }
    }
    Ok(blocks)
}

/// Largest distance from each block eigenvalue to a distinct full-space
/// eigenvalue, matching greedily in ascending order.
pub fn spectral_mismatch(block_values: &[f64], full_values: &[f64]) -> f64 {
    let mut want = block_values.to_vec();
    want.sort_by(f64::total_cmp);
    let mut used = vec![false; full_values.len()];
    let mut worst = 0.0f64;
    for b in want {
        let best = full_values
            .iter()
            .enumerate()
            .filter(|(i, _)| !used[*i])
            .min_by(|x, y| (x.1 - b).abs().total_cmp(&(y.1 - b).abs()));
        match best {
            Some((i, f)) => {
                used[i] = true;
                worst = worst.max((f - b).abs());
            }
            None => return f64::INFINITY,
        }
    }
    worst
}

/// Block propagation against dense propagation, plus spectra and invariant
/// checks. Failures are report entries, not errors.
pub fn compare_block_vs_full(
    spec: &ModelSpec,
    initial: &LabeledState,
    t_grid: &[f64],
    nmax: u32,
) -> Result<ValidationReport> {
    let block = block_for(spec, initial)?;
    compare_with_block(spec, &block, initial, t_grid, nmax)
}

/// As [`compare_block_vs_full`], with the block supplied by the caller.
pub fn compare_with_block(
    spec: &ModelSpec,
    block: &HermitianBlock,
    initial: &LabeledState,
    t_grid: &[f64],
    nmax: u32,
) -> Result<ValidationReport> {
    let (space, h) = build_full(spec, nmax)?;
    let full = FullPropagator::new(&h);
    let block_prop = Propagator::new(block)?;
    let psi0 = space.embed(initial)?;
    let overlaps = full.overlaps(&psi0);

    let pairs: Vec<(f64, DVector<C64>)> = t_grid
        .par_iter()
        .map(|&t| {
            let b = space.embed(&block_prop.apply(initial, t)?)?;
            let f = full.apply_overlaps(&overlaps, t);
            let err = (&b - &f).iter().map(|z| z.norm()).fold(0.0, f64::max);
            Ok((err, f))
        })
        .collect::<Result<_>>()?;
    let max_state_error = pairs.iter().map(|p| p.0).fold(0.0, f64::max);
    let trajectory: Vec<DVector<C64>> = pairs.into_iter().map(|p| p.1).collect();
    let drift = check_invariant(&space, &trajectory);

    let mut block_values = Vec::new();
    for b in interior_blocks(spec, nmax)? {
        block_values.extend(eig_block(&b)?.values);
    }
    let max_spectral_error = spectral_mismatch(&block_values, &full.eigenvalues());

    let inv = space.invariant_diagonal();
    let mut commutator = 0.0f64;
    for i in 0..space.dimension() {
        for j in 0..space.dimension() {
            commutator = commutator.max((h[(i, j)] * (inv[i] - inv[j])).abs());
        }
    }

    let checks = vec![
        Check::at_most("state-agreement", max_state_error, STATE_TOL),
        Check::at_most("spectrum-agreement", max_spectral_error, SPECTRAL_TOL),
        Check::at_most("commutes-with-invariant", commutator, 0.0),
        Check::at_most("invariant-drift", drift.mean, INVARIANT_TOL),
        Check::at_most("invariant-variance-drift", drift.variance, INVARIANT_TOL),
    ];
    let pass = checks.iter().all(|c| c.passed);
    Ok(ValidationReport {
        max_state_error,
        max_spectral_error,
        invariant_drift: drift.mean,
        variance_drift: drift.variance,
        edge_warning: space.touches_edge(&psi0),
        checks,
        pass,
    })
}
