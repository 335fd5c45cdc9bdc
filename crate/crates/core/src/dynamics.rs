//! Exact evolution inside an invariant subspace, and the closed-form
//! coefficient functions of the resonant two-isospin problem.
//!
//! In the `𝒩 = 0` subspace with `η = χ = 1`, `mc² = γ`, the block is
//! `[[−2γ, 1, 1], [1, 0, 0], [1, 0, 0]]`. The antisymmetric combination of the
//! last two kets has eigenvalue 0; the rest is the 2×2 `[[−2γ, √2], [√2, 0]]`
//! with eigenvalues `−γ ± γ̃`, `γ̃ = √(γ² + 2)`. From there, for the initial
//! state `cos α|−,+′,0⟩ + sin α|+,−′,0⟩`:
//!
//! * `|c1|² = f_α = (1 + sin 2α) sin²(γ̃t)/γ̃²`
//! * `|c2|² = ½(1 − f_α − g cos 2α)`, `|c3|² = ½(1 − f_α + g cos 2α)`
//! * `g(t) = cos(γ̃t)cos(γt) + (γ/γ̃) sin(γ̃t) sin(γt)`
//!
//! The closed forms are populations, not amplitudes.

use nalgebra::DVector;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::blocks::{eig_block, extended_block, HermitianBlock};
use crate::eigen::EigenSystem;
use crate::error::{usage, Error, Result};
use crate::qnums::{ladder_coefficient, ModelSpec, SubspaceBasis};

pub const NORM_TOL: f64 = 1e-12;

/// Normalized amplitudes over the kets of one subspace.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledState {
    pub basis: SubspaceBasis,
    pub amplitudes: DVector<C64>,
}

impl LabeledState {
    pub fn new(basis: SubspaceBasis, amplitudes: DVector<C64>) -> Result<Self> {
        if basis.len() != amplitudes.len() {
            return usage(format!(
                "{} amplitudes for a {}-ket basis",
                amplitudes.len(),
                basis.len()
            ));
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::Validation(format!("state norm is {norm}, expected 1")));
        }
        Ok(LabeledState { basis, amplitudes })
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }
}

/// Amplitudes over the extended basis of subspace `invariant_value` at time `t`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoefficientSet {
    pub t: f64,
    pub invariant_value: i64,
    pub amplitudes: Vec<C64>,
}

impl CoefficientSet {
    /// `c_i`, one-based to follow the usual labelling.
    pub fn c(&self, i: usize) -> C64 {
        self.amplitudes[i - 1]
    }

    pub fn populations(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|z| z.norm_sqr()).collect()
    }

    pub fn to_state(&self) -> Result<LabeledState> {
        let basis = SubspaceBasis::extended(self.invariant_value)?;
        LabeledState::new(basis, DVector::from_vec(self.amplitudes.clone()))
    }
}

/// Spectral propagator `e^{−iHt}` of one block, diagonalized once.
#[derive(Clone, Debug)]
pub struct Propagator {
    basis: SubspaceBasis,
    eigen: EigenSystem,
}

impl Propagator {
    pub fn new(block: &HermitianBlock) -> Result<Self> {
        Ok(Propagator {
            basis: block.basis.clone(),
            eigen: eig_block(block)?,
        })
    }

    pub fn eigen(&self) -> &EigenSystem {
        &self.eigen
    }

    pub fn apply(&self, initial: &LabeledState, t: f64) -> Result<LabeledState> {
        if initial.basis != self.basis {
            return usage("initial state lives in a different subspace than the block");
        }
        if !t.is_finite() {
            return usage(format!("time must be finite, got {t}"));
        }
        if t == 0.0 {
            return Ok(initial.clone());
        }
        let v = &self.eigen.vectors;
        let overlaps = v.adjoint() * &initial.amplitudes;
        let phased = DVector::from_iterator(
            overlaps.len(),
            overlaps
                .iter()
                .zip(&self.eigen.values)
                .map(|(o, &lam)| o * C64::from_polar(1.0, -lam * t)),
        );
        Ok(LabeledState {
            basis: self.basis.clone(),
            amplitudes: v * phased,
        })
    }
}

/// `ψ(t) = Σ_k e^{−iλ_k t} v_k ⟨v_k|ψ₀⟩`.
pub fn propagate(block: &HermitianBlock, initial: &LabeledState, t: f64) -> Result<LabeledState> {
    Propagator::new(block)?.apply(initial, t)
}

/// `cos α|−,+′,0⟩ + sin α|+,−′,0⟩` over the `𝒩 = 0` basis.
pub fn atomic_initial_state(alpha: f64) -> LabeledState {
    let basis = SubspaceBasis::extended(0).expect("I = 0 subspace exists");
    let (s, c) = alpha.sin_cos();
    let amps = DVector::from_vec(vec![C64::new(0.0, 0.0), C64::new(s, 0.0), C64::new(c, 0.0)]);
    LabeledState { basis, amplitudes: amps }
}

/// Coefficients `(c1, c2, c3)` of the `𝒩 = 0` evolution on every grid time.
pub fn evolve_extended(spec: &ModelSpec, alpha: f64, t_grid: &[f64]) -> Result<Vec<CoefficientSet>> {
    if !spec.extended {
        return usage("evolve_extended needs the extended model");
    }
    let prop = Propagator::new(&extended_block(spec, 0)?)?;
    let psi0 = atomic_initial_state(alpha);
    t_grid
        .par_iter()
        .map(|&t| {
            let psi = prop.apply(&psi0, t)?;
            Ok(CoefficientSet {
                t,
                invariant_value: 0,
                amplitudes: psi.amplitudes.iter().copied().collect(),
            })
        })
        .collect()
}

/// Closed-form functions of the resonant problem (`η = χ = 1`, `mc² = γ`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AnalyticKernel {
    pub gamma: f64,
    pub gamma_tilde: f64,
}

pub fn analytic_kernel(gamma: f64) -> AnalyticKernel {
    AnalyticKernel {
        gamma,
        gamma_tilde: (gamma * gamma + 2.0).sqrt(),
    }
}

impl AnalyticKernel {
    /// Kernel for a spec, checking the normalization the closed forms assume:
    /// unit effective couplings `η·f(1) = χ·f(1) = 1` and `mc² = γ`.
    pub fn for_spec(spec: &ModelSpec) -> Result<Self> {
        if !spec.extended {
            return usage("closed forms describe the extended model");
        }
        spec.validate()?;
        let f1 = ladder_coefficient(spec, 1)?;
        let tol = 1e-12;
        if (spec.eta * f1 - 1.0).abs() > tol || (spec.chi * f1 - 1.0).abs() > tol {
            return usage(format!(
                "closed forms need eta*f(1) = chi*f(1) = 1, got {} and {}",
                spec.eta * f1,
                spec.chi * f1
            ));
        }
        if (spec.mc2 - spec.gamma).abs() > tol {
            return usage(format!(
                "closed forms need mc2 = gamma, got {} and {}",
                spec.mc2, spec.gamma
            ));
        }
        Ok(analytic_kernel(spec.gamma))
    }

    /// `sin²(γ̃t)/γ̃²`.
    pub fn f0(&self, t: f64) -> f64 {
        let gt = self.gamma_tilde;
        (gt * t).sin().powi(2) / (gt * gt)
    }

    pub fn g(&self, t: f64) -> f64 {
        let (g, gt) = (self.gamma, self.gamma_tilde);
        (g + gt) / (2.0 * gt) * ((gt - g) * t).cos() + 1.0 / (gt * (g + gt)) * ((gt + g) * t).cos()
    }

    /// Survival amplitude of `(|+,−′,0⟩ + |−,+′,0⟩)/√2`,
    /// `A = e^{iγt}(cos γ̃t − i(γ/γ̃) sin γ̃t)`; `Re A = g` and `|A|² = 1 − 2f₀`.
    pub fn symmetric_amplitude(&self, t: f64) -> C64 {
        let (g, gt) = (self.gamma, self.gamma_tilde);
        let (s, c) = (gt * t).sin_cos();
        C64::from_polar(1.0, g * t) * C64::new(c, -g / gt * s)
    }

    pub fn f_alpha(&self, t: f64, alpha: f64) -> f64 {
        (1.0 + (2.0 * alpha).sin()) * self.f0(t)
    }

    /// Purity of the field isospin, `½ + ½(f_α − g cos 2α)²`; only `|−,+′,0⟩`
    /// carries the field's upper state, so `1 − 2|c3|² = f_α − g cos 2α`.
    pub fn field_purity(&self, t: f64, alpha: f64) -> f64 {
        let x = self.f_alpha(t, alpha) - self.g(t) * (2.0 * alpha).cos();
        0.5 + 0.5 * x * x
    }

    /// Purity of the two-isospin reduction, `1 − 2f_α + 2f_α²`.
    pub fn atoms_purity(&self, t: f64, alpha: f64) -> f64 {
        let f = self.f_alpha(t, alpha);
        1.0 - 2.0 * f + 2.0 * f * f
    }
}

/// `(|c1|², |c2|², |c3|²) = (f_α, ½(1 − f_α − g cos 2α), ½(1 − f_α + g cos 2α))`.
pub fn coefficient_formulas(kernel: &AnalyticKernel, alpha: f64, t: f64) -> (f64, f64, f64) {
    let f = kernel.f_alpha(t, alpha);
    let gc = kernel.g(t) * (2.0 * alpha).cos();
    (f, 0.5 * (1.0 - f - gc), 0.5 * (1.0 - f + gc))
}

/// `n` evenly spaced times on `[0, t_max]`, endpoints included.
pub fn time_grid(t_max: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n)
            .map(|i| t_max * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blocks::jc_block;
    use crate::qnums::Dimensionality;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn resonant(gamma: f64) -> ModelSpec {
        ModelSpec::extended(Dimensionality::D1, 1.0, 1.0, gamma, gamma)
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn identity_at_zero() {
        let block = extended_block(&resonant(1.0), 0).unwrap();
        let psi = atomic_initial_state(0.3);
        assert_eq!(propagate(&block, &psi, 0.0).unwrap(), psi);
    }

    #[test]
    fn resonant_rabi_flop() {
        let block = jc_block(1.0, 0.0, 1);
        let psi = LabeledState::new(block.basis.clone(), DVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)])).unwrap();
        let out = propagate(&block, &psi, FRAC_PI_2).unwrap();
        assert!((out.amplitudes[0] - c(0.0, 0.0)).norm() < 1e-15);
        assert!((out.amplitudes[1] - c(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn basis_mismatch_is_usage_error() {
        let block = jc_block(1.0, 0.0, 2);
        let psi = atomic_initial_state(0.0);
        assert!(matches!(propagate(&block, &psi, 1.0), Err(Error::Usage(_))));
        assert!(LabeledState::new(block.basis.clone(), DVector::from_vec(vec![c(1.0, 0.0), c(1.0, 0.0)])).is_err());
    }

    #[test]
    fn evolve_initial_rows() {
        let rows = evolve_extended(&resonant(1.0), 0.0, &[0.0]).unwrap();
        assert_eq!(rows[0].amplitudes, vec![c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        let rows = evolve_extended(&resonant(1.0), FRAC_PI_4, &[0.0]).unwrap();
        let h = 0.5f64.sqrt();
        assert!((rows[0].c(2).re - h).abs() < 1e-15 && (rows[0].c(3).re - h).abs() < 1e-15);
    }

    #[test]
    fn c1_at_unit_time() {
        // |c1|² = sin²(√3)/3 at γ = 1, t = 1
        let want = 3f64.sqrt().sin().powi(2) / 3.0;
        let rows = evolve_extended(&resonant(1.0), 0.0, &[1.0]).unwrap();
        assert!((rows[0].c(1).norm_sqr() - want).abs() < 1e-13);
        assert!((analytic_kernel(1.0).f0(1.0) - want).abs() < 1e-15);
        assert!((want - 0.32474).abs() < 1e-5);
    }

    #[test]
    fn kernel_identities() {
        for gamma in [0.0, 0.5, 1.0, 2.0, 4.0] {
            assert!((analytic_kernel(gamma).g(0.0) - 1.0).abs() < 1e-15);
            assert_eq!(analytic_kernel(gamma).f0(0.0), 0.0);
        }
        for gamma in [0.0, 0.5, 1.0, 2.0, 4.0] {
            let k = analytic_kernel(gamma);
            for t in [0.0, 0.37, 2.0, 11.9, 29.5] {
                let a = k.symmetric_amplitude(t);
                assert!((a.re - k.g(t)).abs() < 1e-12);
                assert!((a.norm_sqr() - (1.0 - 2.0 * k.f0(t))).abs() < 1e-12);
            }
        }
        let k = analytic_kernel(0.0);
        for t in [0.1, 1.0, 7.3] {
            assert!((k.g(t) - (2f64.sqrt() * t).cos()).abs() < 1e-15);
        }
    }

    #[test]
    fn formulas_examples() {
        let k = analytic_kernel(1.0);
        assert_eq!(coefficient_formulas(&k, 0.0, 0.0), (0.0, 0.0, 1.0));
        let (_, b, cc) = coefficient_formulas(&k, FRAC_PI_4, 2.3);
        assert!((b - cc).abs() < 1e-15);
        let (a, b, cc) = coefficient_formulas(&k, 0.0, 1.0);
        assert!((a - 0.324_74).abs() < 1e-5);
        assert!((a + b + cc - 1.0).abs() < 1e-15);
    }

    #[test]
    fn kernel_contract() {
        assert!(AnalyticKernel::for_spec(&resonant(0.5)).is_ok());
        let off = ModelSpec::extended(Dimensionality::D1, 1.0, 1.0, 1.0, 0.5);
        assert!(matches!(AnalyticKernel::for_spec(&off), Err(Error::Usage(_))));
        let d2 = ModelSpec::extended(Dimensionality::D2, 1.0, 1.0, 1.0, 1.0);
        assert!(AnalyticKernel::for_spec(&d2).is_err());
        let d2 = ModelSpec::extended(Dimensionality::D2, 0.5f64.sqrt(), 0.5f64.sqrt(), 1.0, 1.0);
        assert!(AnalyticKernel::for_spec(&d2).is_ok());
    }

    #[test]
    fn time_grid_endpoints() {
        let g = time_grid(30.0, 3001);
        assert_eq!(g.len(), 3001);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[3000], 30.0);
        assert!((g[1] - 0.01).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn norm_and_composition(gamma in 0.0f64..4.0, alpha in 0.0f64..PI, t1 in 0.0f64..30.0, t2 in 0.0f64..30.0, inv in 0i64..6, eta in 0.1f64..2.0, chi in 0.1f64..2.0) {
            let spec = ModelSpec::extended(Dimensionality::D1, eta, chi, 0.7, gamma);
            let block = extended_block(&spec, inv).unwrap();
            let k = block.dim();
            let mut amps: Vec<C64> = (0..k).map(|i| C64::from_polar(1.0, alpha * (i as f64 + 1.0))).collect();
            let nrm = (k as f64).sqrt();
            amps.iter_mut().for_each(|z| *z /= nrm);
            let psi = LabeledState::new(block.basis.clone(), DVector::from_vec(amps)).unwrap();
            let prop = Propagator::new(&block).unwrap();
            let a = prop.apply(&psi, t1 + t2).unwrap();
            let b = prop.apply(&prop.apply(&psi, t1).unwrap(), t2).unwrap();
            prop_assert!((a.norm() - 1.0).abs() < 1e-12);
            prop_assert!((&a.amplitudes - &b.amplitudes).norm() < 1e-11);
        }

        #[test]
        fn g_trig_identity(gamma in 0.0f64..4.0, t in 0.0f64..30.0) {
            let k = analytic_kernel(gamma);
            let gt = k.gamma_tilde;
            let alt = (gt * t).cos() * (gamma * t).cos() + gamma / gt * (gt * t).sin() * (gamma * t).sin();
            prop_assert!((k.g(t) - alt).abs() < 1e-12);
        }

        #[test]
        fn closed_form_populations(gamma in 0.0f64..4.0, alpha in 0.0f64..PI, t in 0.0f64..30.0) {
            let rows = evolve_extended(&resonant(gamma), alpha, &[t]).unwrap();
            let p = rows[0].populations();
            let (a, b, cc) = coefficient_formulas(&analytic_kernel(gamma), alpha, t);
            prop_assert!((p[0] - a).abs() < 1e-10);
            prop_assert!((p[1] - b).abs() < 1e-10);
            prop_assert!((p[2] - cc).abs() < 1e-10);
        }
    }
}
