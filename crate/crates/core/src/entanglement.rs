//! Partial traces, purity, Wootters concurrence and the concurrence–purity
//! (CP) plane.
//!
//! Orderings: the field isospin is `(+′, −′)`; the two-isospin space is
//! `(−−, +−, −+, ++)` with the oscillator isospin written first.

use nalgebra::{DMatrix, SVD};
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::blocks::extended_block;
use crate::dynamics::{atomic_initial_state, AnalyticKernel, LabeledState, Propagator};
use crate::eigen::{eigh, hermiticity_defect};
use crate::error::{domain, usage, Error, Result};
use crate::qnums::{BasisKet, ModelSpec, Sign};

pub const DENSITY_TOL: f64 = 1e-12;

/// Eigenvalues of `ρ` at or below this are treated as zero in the Wootters
/// construction.
pub const SPECTRAL_FLOOR: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct ReducedDensity {
    pub entries: DMatrix<C64>,
}

impl ReducedDensity {
    /// Checks Hermiticity, unit trace and positivity to [`DENSITY_TOL`].
    pub fn new(entries: DMatrix<C64>) -> Result<Self> {
        if entries.nrows() != entries.ncols() || entries.nrows() == 0 {
            return Err(Error::Validation("density matrix must be square".into()));
        }
        let defect = hermiticity_defect(&entries);
        if defect > DENSITY_TOL {
            return Err(Error::Validation(format!("density matrix not Hermitian ({defect:.3e})")));
        }
        let trace = entries.trace();
        if (trace.re - 1.0).abs() > DENSITY_TOL || trace.im.abs() > DENSITY_TOL {
            return Err(Error::Validation(format!("density matrix trace is {trace}")));
        }
        let min = eigh(&entries)?.values[0];
        if min < -DENSITY_TOL {
            return Err(Error::Validation(format!(
                "density matrix has negative eigenvalue {min:.3e}"
            )));
        }
        Ok(ReducedDensity { entries })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CPPoint {
    pub t: f64,
    pub purity: f64,
    pub concurrence: f64,
}

/// `ρ[a][b] = Σ c_i c_j*` over ket pairs that agree on the traced labels.
fn trace_out<T: PartialEq>(
    state: &LabeledState,
    dim: usize,
    kept: impl Fn(&BasisKet) -> usize,
    traced: impl Fn(&BasisKet) -> T,
) -> DMatrix<C64> {
    let kets = &state.basis.kets;
    let amps = &state.amplitudes;
    let mut rho = DMatrix::zeros(dim, dim);
    for (i, ki) in kets.iter().enumerate() {
        for (j, kj) in kets.iter().enumerate() {
            if traced(ki) == traced(kj) {
                rho[(kept(ki), kept(kj))] += amps[i] * amps[j].conj();
            }
        }
    }
    rho
}

fn require_extended(state: &LabeledState) -> Result<()> {
    if state.basis.kets.iter().any(|k| k.iso2.is_none()) {
        return usage("reduction needs a state of the extended model");
    }
    Ok(())
}

fn bit(s: Sign) -> usize {
    match s {
        Sign::Minus => 0,
        Sign::Plus => 1,
    }
}

/// Field isospin after tracing out the oscillator and its isospin; ordering
/// `(+′, −′)`.
pub fn reduce_to_field(state: &LabeledState) -> Result<ReducedDensity> {
    require_extended(state)?;
    let rho = trace_out(
        state,
        2,
        |k| 1 - bit(k.iso2.unwrap_or(Sign::Minus)),
        |k| (k.iso1, k.osc),
    );
    ReducedDensity::new(rho)
}

/// Oscillator isospin after tracing out the field isospin and the oscillator;
/// ordering `(+, −)`.
pub fn reduce_to_dmo_isospin(state: &LabeledState) -> Result<ReducedDensity> {
    require_extended(state)?;
    let rho = trace_out(state, 2, |k| 1 - bit(k.iso1), |k| (k.iso2, k.osc));
    ReducedDensity::new(rho)
}

/// Both isospins (the two atoms) after tracing out the oscillator; ordering
/// `(−−, +−, −+, ++)`.
pub fn reduce_to_atoms(state: &LabeledState) -> Result<ReducedDensity> {
    require_extended(state)?;
    let rho = trace_out(
        state,
        4,
        |k| bit(k.iso1) + 2 * bit(k.iso2.unwrap_or(Sign::Minus)),
        |k| k.osc,
    );
    ReducedDensity::new(rho)
}

/// Oscillator after tracing out both isospins, over `osc = 0..=max`.
pub fn reduce_to_oscillator(state: &LabeledState) -> Result<ReducedDensity> {
    let dim = state.basis.max_osc() as usize + 1;
    let rho = trace_out(state, dim, |k| k.osc as usize, |k| (k.iso1, k.iso2));
    ReducedDensity::new(rho)
}

/// `Tr ρ²`.
pub fn purity(rho: &ReducedDensity) -> f64 {
    // ρ is Hermitian, so Tr ρ² = Σ|ρ_ij|²
    rho.entries.iter().map(|z| z.norm_sqr()).sum()
}

/// `σ_y ⊗ σ_y` in the `(−−, +−, −+, ++)` ordering.
fn sigma_yy() -> DMatrix<C64> {
    // σ_y|−⟩ = −i|+⟩, σ_y|+⟩ = i|−⟩; index bit 1 means "+"
    let i = C64::new(0.0, 1.0);
    let sy = DMatrix::from_row_slice(2, 2, &[C64::new(0.0, 0.0), i, -i, C64::new(0.0, 0.0)]);
    DMatrix::from_fn(4, 4, |r, c| sy[(r & 1, c & 1)] * sy[(r >> 1, c >> 1)])
}

/// Wootters concurrence `max{0, λ₁ − λ₂ − λ₃ − λ₄}` of a two-qubit state.
///
/// With `ρ = W W†` the `λ` are the singular values of `Wᵀ (σ_y⊗σ_y) W`, which
/// equal the square roots of the eigenvalues of `ρ (σ_y⊗σ_y) ρ* (σ_y⊗σ_y)`.
/// Taking singular values directly keeps the small `λ` at rounding level
/// instead of the square root of rounding.
pub fn concurrence(rho: &ReducedDensity) -> Result<f64> {
    if rho.dim() != 4 {
        return usage(format!("concurrence needs a 4x4 density matrix, got {}", rho.dim()));
    }
    let es = eigh(&rho.entries)?;
    let kept: Vec<usize> = (0..4).filter(|&i| es.values[i] > SPECTRAL_FLOOR).collect();
    if kept.is_empty() {
        return Err(Error::Validation("density matrix has no positive eigenvalue".into()));
    }
    let w = DMatrix::from_fn(4, kept.len(), |r, c| {
        es.vectors[(r, kept[c])] * es.values[kept[c]].sqrt()
    });
    let tau = w.transpose() * sigma_yy() * &w;
    let mut lambda: Vec<f64> = SVD::new(tau, false, false).singular_values.iter().copied().collect();
    lambda.sort_by(|a, b| b.total_cmp(a));
    lambda.resize(4, 0.0);
    Ok((lambda[0] - lambda[1] - lambda[2] - lambda[3]).max(0.0))
}

/// `√((1 − f_α)² − g² cos² 2α)`, evaluated as `½|(1 + sin 2α)A² − (1 − sin 2α)|`
/// with `A` the [symmetric survival amplitude](AnalyticKernel::symmetric_amplitude).
///
/// The two are algebraically equal (both are `2|c2||c3|`), but the radical form
/// subtracts populations and loses half the digits where the concurrence
/// nearly vanishes; the amplitude form keeps rounding-level absolute error.
pub fn closed_form_concurrence(kernel: &AnalyticKernel, alpha: f64, t: f64) -> f64 {
    let s = (2.0 * alpha).sin();
    let a = kernel.symmetric_amplitude(t);
    0.5 * ((1.0 + s) * a * a - (1.0 - s)).norm()
}

/// The radical form `√((1 − f_α)² − g² cos² 2α)`, clamped at zero.
pub fn closed_form_concurrence_radical(kernel: &AnalyticKernel, alpha: f64, t: f64) -> f64 {
    let f = kernel.f_alpha(t, alpha);
    let gc = kernel.g(t) * (2.0 * alpha).cos();
    ((1.0 - f) * (1.0 - f) - gc * gc).max(0.0).sqrt()
}

/// `(C₊, C₋) = ½|1 ± √(2P − 1) − 2 sin 2α|`, the zero-detuning CP curves.
pub fn cp_frontier(purity_value: f64, alpha: f64) -> Result<(f64, f64)> {
    if !(purity_value >= 0.5 - DENSITY_TOL) {
        return domain(format!("purity {purity_value} is below 1/2"));
    }
    let x = (2.0 * purity_value - 1.0).max(0.0).sqrt();
    let s = 2.0 * (2.0 * alpha).sin();
    Ok((0.5 * (1.0 + x - s).abs(), 0.5 * (1.0 - x - s).abs()))
}

/// Distance from a CP point to the nearer of the two zero-detuning curves.
pub fn frontier_distance(point: &CPPoint, alpha: f64) -> Result<f64> {
    let (cp, cm) = cp_frontier(point.purity, alpha)?;
    Ok((point.concurrence - cp).abs().min((point.concurrence - cm).abs()))
}

/// `(lower, upper)` concurrence bounds at purity `P` for trajectories started
/// with angle `α`: the lower curve is `min(C₊, C₋)` at `α`; the upper one is the
/// largest of the `α` and `α = π/4` curves, the latter being `½(1 + √(2P − 1))`.
pub fn cp_envelope(purity_value: f64, alpha: f64) -> Result<(f64, f64)> {
    let (ap, am) = cp_frontier(purity_value, alpha)?;
    let (bp, bm) = cp_frontier(purity_value, std::f64::consts::FRAC_PI_4)?;
    Ok((ap.min(am), ap.max(am).max(bp).max(bm)))
}

/// Purity and concurrence of the two-isospin reduction along the `𝒩 = 0`
/// evolution of `cos α|−,+′,0⟩ + sin α|+,−′,0⟩`.
pub fn cp_trajectory(spec: &ModelSpec, alpha: f64, t_grid: &[f64]) -> Result<Vec<CPPoint>> {
    use rayon::prelude::*;
    if !spec.extended {
        return usage("cp_trajectory needs the extended model");
    }
    let prop = Propagator::new(&extended_block(spec, 0)?)?;
    let psi0 = atomic_initial_state(alpha);
    t_grid
        .par_iter()
        .map(|&t| {
            let rho = reduce_to_atoms(&prop.apply(&psi0, t)?)?;
            Ok(CPPoint {
                t,
                purity: purity(&rho),
                concurrence: concurrence(&rho)?,
            })
        })
        .collect()
}
