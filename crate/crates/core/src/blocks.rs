//! Invariant-subspace Hamiltonians: Jaynes-Cummings 2×2 blocks, the
//! Dirac-Moshinsky blocks for each dimensionality, and the up-to-4×4 blocks of
//! the oscillator coupled to the isospin field.
//!
//! Simple subspaces are ordered `[|+, n−1⟩, |−, n⟩]`, which puts `+δ` (or
//! `+mc²`) in the top-left corner. Extended subspaces are ordered
//! `[|−,−′,𝒩+1⟩, |+,−′,𝒩⟩, |−,+′,𝒩⟩, |+,+′,𝒩−1⟩]`.

use std::f64::consts::SQRT_2;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::dynamics::LabeledState;
use crate::eigen::{eigh, EigenSystem};
use crate::error::{domain, usage, Error, Result};
use crate::qnums::{
    chain_class, invariant_of, ladder_coefficient, mu, BasisKet, BranchD3, Dimensionality,
    ModelSpec, Sign, SubspaceBasis,
};

#[derive(Clone, Debug, PartialEq)]
pub struct HermitianBlock {
    pub basis: SubspaceBasis,
    pub entries: DMatrix<C64>,
}

impl HermitianBlock {
    fn from_real(basis: SubspaceBasis, rows: Vec<Vec<f64>>) -> Self {
        let k = rows.len();
        debug_assert_eq!(k, basis.len());
        let entries = DMatrix::from_fn(k, k, |i, j| C64::new(rows[i][j], 0.0));
        HermitianBlock { basis, entries }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Real part of entry `(i, j)`; construction only produces real entries.
    pub fn re(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)].re
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MappingReport {
    pub dim: Dimensionality,
    pub omega_equivalent: f64,
    pub delta_equivalent: f64,
    pub exact: bool,
    pub notes: String,
}

/// `[[δ, Ω√n], [Ω√n, −δ]]`, or `[−δ]` for `n = 0`.
pub fn jc_block(omega: f64, delta: f64, n_excitations: u32) -> HermitianBlock {
    let basis = SubspaceBasis::simple(n_excitations);
    if n_excitations == 0 {
        return HermitianBlock::from_real(basis, vec![vec![-delta]]);
    }
    let g = omega * (n_excitations as f64).sqrt();
    HermitianBlock::from_real(basis, vec![vec![delta, g], vec![g, -delta]])
}

/// Coupling `η·f(k)` written so that 1+1 and 2+1 reproduce `Ω·√k` bit for bit
/// under the mapping `Ω = η·prefactor`.
fn oscillator_coupling(spec: &ModelSpec, strength: f64, k: u32) -> Result<f64> {
    match spec.dim.ladder_prefactor() {
        Some(pre) => Ok((strength * pre) * (k as f64).sqrt()),
        None => Ok(strength * ladder_coefficient(spec, k)?),
    }
}

/// Block of the single-isospin oscillator at oscillator level `level`
/// (`n`, `n_r`, or the 3+1 level `N ≥ j − ½`).
pub fn dmo_block(spec: &ModelSpec, level: u32) -> Result<HermitianBlock> {
    if spec.extended {
        return usage("dmo_block called on an extended model");
    }
    spec.validate()?;
    let bottom = spec.chain_bottom();
    if level < bottom {
        return domain(format!("level {level} lies below the chain bottom {bottom}"));
    }
    let k = level - bottom;
    let basis = SubspaceBasis::simple(k);
    if k == 0 {
        return Ok(HermitianBlock::from_real(basis, vec![vec![-spec.mc2]]));
    }
    let g = oscillator_coupling(spec, spec.eta, k)?;
    Ok(HermitianBlock::from_real(
        basis,
        vec![vec![spec.mc2, g], vec![g, -spec.mc2]],
    ))
}

/// Block of the oscillator coupled to the isospin field in the subspace
/// `I = 𝒩`.
///
/// Entries follow from `η(σ₋A† + σ₊A) + χ(σ′₋A† + σ′₊A) + mc²σ_z + γσ′_z`
/// acting on the extended kets: `|+,−′⟩` couples to `|−,−′⟩` through η and
/// to `|+,+′⟩` through χ, `|−,+′⟩` the other way round.
pub fn extended_block(spec: &ModelSpec, invariant_value: i64) -> Result<HermitianBlock> {
    if !spec.extended {
        return usage("extended_block called on a single-isospin model");
    }
    spec.validate()?;
    let basis = SubspaceBasis::extended(invariant_value)?;
    let k = basis.len();
    let mut rows = vec![vec![0.0; k]; k];
    for (i, ket) in basis.kets.iter().enumerate() {
        let s2 = ket.iso2.unwrap_or(Sign::Minus);
        rows[i][i] = spec.mc2 * ket.iso1.sz() as f64 + spec.gamma * s2.sz() as f64;
    }
    for (i, a) in basis.kets.iter().enumerate() {
        for (j, b) in basis.kets.iter().enumerate().skip(i + 1) {
            if let Some(v) = raising_element(spec, a, b)? {
                rows[i][j] = v;
                rows[j][i] = v;
            }
        }
    }
    Ok(HermitianBlock::from_real(basis, rows))
}

/// `⟨b| η σ₊A + χ σ′₊A + h.c. |a⟩` for two kets of the same subspace.
fn raising_element(spec: &ModelSpec, a: &BasisKet, b: &BasisKet) -> Result<Option<f64>> {
    // order so that `lo` has one more oscillator quantum
    let (hi, lo) = if a.osc == b.osc + 1 {
        (a, b)
    } else if b.osc == a.osc + 1 {
        (b, a)
    } else {
        return Ok(None);
    };
    let first_flips = hi.iso1 == Sign::Minus && lo.iso1 == Sign::Plus && hi.iso2 == lo.iso2;
    let second_flips = hi.iso2 == Some(Sign::Minus) && lo.iso2 == Some(Sign::Plus) && hi.iso1 == lo.iso1;
    let strength = if first_flips {
        spec.eta
    } else if second_flips {
        spec.chi
    } else {
        return Ok(None);
    };
    Ok(Some(oscillator_coupling(spec, strength, hi.osc)?))
}

pub fn eig_block(block: &HermitianBlock) -> Result<EigenSystem> {
    eigh(&block.entries)
}

/// `(−E, +E)` with `E = √(m²c⁴ + η²μ)` for the block at oscillator `level`.
///
/// `μ` comes from the closed-form level structure (`n`, `2n_r`, or the 3+1
/// branch formula), not from the ladder coefficients used to build blocks.
/// At the chain bottom the block is 1×1 with the single eigenvalue `−mc²`.
pub fn analytic_energies(spec: &ModelSpec, level: u32) -> Result<(f64, f64)> {
    if spec.extended {
        return usage("analytic_energies applies to the single-isospin model");
    }
    spec.validate()?;
    let bottom = spec.chain_bottom();
    if level < bottom {
        return domain(format!("level {level} lies below the chain bottom {bottom}"));
    }
    let mu_value = match spec.dim {
        Dimensionality::D1 => level as f64,
        Dimensionality::D2 => 2.0 * level as f64,
        Dimensionality::D3 { j, .. } => {
            let (branch, n) = chain_class(level - bottom);
            mu(n, j, branch)?
        }
    };
    let e = (spec.mc2 * spec.mc2 + spec.eta * spec.eta * mu_value).sqrt();
    Ok((-e, e))
}

/// `±√(δ² + Ω²n)` of a Jaynes-Cummings block.
pub fn jc_energies(omega: f64, delta: f64, n_excitations: u32) -> (f64, f64) {
    let e = (delta * delta + omega * omega * n_excitations as f64).sqrt();
    (-e, e)
}

/// Mixing angle `θ_n = arctan √((E − δ)/(E + δ))`.
pub fn mixing_angle(omega: f64, delta: f64, n_excitations: u32) -> f64 {
    let (_, e) = jc_energies(omega, delta, n_excitations);
    (e - delta).max(0.0).sqrt().atan2((e + delta).max(0.0).sqrt())
}

/// Dressed states `(|φ₊⟩, |φ₋⟩)` of the Jaynes-Cummings block with
/// `n ≥ 1` excitations, expressed over `[|+, n−1⟩, |−, n⟩]`.
pub fn dressed_states(
    omega: f64,
    delta: f64,
    n_excitations: u32,
) -> Result<(LabeledState, LabeledState)> {
    if n_excitations == 0 {
        return domain("dressed states need at least one excitation");
    }
    if omega < 0.0 {
        return domain("dressed-state angle assumes a non-negative coupling");
    }
    let (_, e) = jc_energies(omega, delta, n_excitations);
    if e == 0.0 {
        return Err(Error::Degenerate(
            "zero detuning and zero coupling leave the dressed states undefined".into(),
        ));
    }
    let theta = mixing_angle(omega, delta, n_excitations);
    let (s, c) = theta.sin_cos();
    let basis = SubspaceBasis::simple(n_excitations);
    let plus = DVector::from_vec(vec![C64::new(c, 0.0), C64::new(s, 0.0)]);
    let minus = DVector::from_vec(vec![C64::new(-s, 0.0), C64::new(c, 0.0)]);
    Ok((
        LabeledState::new(basis.clone(), plus)?,
        LabeledState::new(basis, minus)?,
    ))
}

/// Jaynes-Cummings parameters reproducing the oscillator blocks.
pub fn parameter_mapping(spec: &ModelSpec) -> Result<MappingReport> {
    if spec.extended {
        return usage("parameter_mapping applies to the single-isospin model");
    }
    let delta = spec.mc2;
    let report = match spec.dim {
        Dimensionality::D1 => MappingReport {
            dim: spec.dim,
            omega_equivalent: spec.eta,
            delta_equivalent: delta,
            exact: true,
            notes: "Omega = eta = sqrt(2 mc^2 hbar omega); every block is a JCM block with n photons".into(),
        },
        Dimensionality::D2 => MappingReport {
            dim: spec.dim,
            omega_equivalent: spec.eta * SQRT_2,
            delta_equivalent: delta,
            exact: true,
            notes: "Omega = sqrt(2) eta = 2 sqrt(mc^2 hbar omega); n = n_r; left-chiral sector inert (n_l never enters, infinite degeneracy)".into(),
        },
        Dimensionality::D3 { j, branch: BranchD3::InfiniteDeg } => MappingReport {
            dim: spec.dim,
            omega_equivalent: spec.eta * SQRT_2,
            delta_equivalent: delta,
            exact: true,
            notes: format!(
                "Omega = sqrt(2) eta with n = radial quantum number; levels N = 2n + j - 1/2 (j = {j}) have j-independent energies"
            ),
        },
        Dimensionality::D3 { j, branch: BranchD3::FiniteDeg } => MappingReport {
            dim: spec.dim,
            omega_equivalent: spec.eta * (j.twice() as f64 + 2.0).sqrt(),
            delta_equivalent: delta,
            exact: false,
            notes: format!(
                "mu = 2n + 2j + 2 (j = {j}) is not linear in a photon number; only one block at a time matches, via eta sqrt(2n+2j+2) = Omega sqrt(n_photons); Omega shown for n = 0, n_photons = 1"
            ),
        },
    };
    Ok(report)
}

/// Kets of a block all share one value of `I`.
pub fn block_is_invariant(block: &HermitianBlock) -> bool {
    block
        .basis
        .kets
        .iter()
        .all(|k| invariant_of(k) == block.basis.invariant_value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qnums::HalfInt;
    use proptest::prelude::*;

    fn d3(twice_j: i64, branch: BranchD3) -> Dimensionality {
        Dimensionality::D3 {
            j: HalfInt::from_twice(twice_j),
            branch,
        }
    }

    fn rows(b: &HermitianBlock) -> Vec<Vec<f64>> {
        (0..b.dim()).map(|i| (0..b.dim()).map(|j| b.re(i, j)).collect()).collect()
    }

    /// closed-form spectrum of a real symmetric 2×2, kept only as an oracle
    fn two_by_two(a: f64, b: f64, d: f64) -> (f64, f64) {
        let m = 0.5 * (a + d);
        let r = (0.25 * (a - d) * (a - d) + b * b).sqrt();
        (m - r, m + r)
    }

    #[test]
    fn jc_examples() {
        assert_eq!(rows(&jc_block(1.0, 0.0, 1)), vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        assert_eq!(rows(&jc_block(1.0, 2.0, 0)), vec![vec![-2.0]]);
        let es = eig_block(&jc_block(2.0, 1.0, 4)).unwrap();
        assert!((es.values[0] + 17f64.sqrt()).abs() < 1e-14);
        assert!((es.values[1] - 17f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn dmo_examples() {
        let s = ModelSpec::dmo(Dimensionality::D1, 1.0, 1.0);
        assert_eq!(rows(&dmo_block(&s, 0).unwrap()), vec![vec![-1.0]]);

        let s = ModelSpec::dmo(d3(1, BranchD3::InfiniteDeg), 1.0, 0.0);
        // n = 2 on the infinite branch: N = 2n + j - 1/2 = 4, mu = 4
        let es = eig_block(&dmo_block(&s, 4).unwrap()).unwrap();
        assert!((es.values[0] + 2.0).abs() < 1e-14 && (es.values[1] - 2.0).abs() < 1e-14);

        let s = ModelSpec::dmo(Dimensionality::D1, 3.0, 4.0);
        let es = eig_block(&dmo_block(&s, 1).unwrap()).unwrap();
        assert!((es.values[0] + 5.0).abs() < 1e-14 && (es.values[1] - 5.0).abs() < 1e-14);

        let s = ModelSpec::dmo(d3(3, BranchD3::FiniteDeg), 1.0, 0.0);
        assert!(matches!(dmo_block(&s, 0), Err(Error::Domain(_))));
        let ext = ModelSpec::extended(Dimensionality::D1, 1.0, 1.0, 0.0, 0.0);
        assert!(matches!(dmo_block(&ext, 1), Err(Error::Usage(_))));
    }

    #[test]
    fn extended_examples() {
        for gamma in [0.0, 0.5, 1.0, 2.0] {
            let s = ModelSpec::extended(Dimensionality::D1, 1.0, 1.0, gamma, gamma);
            let b = extended_block(&s, 0).unwrap();
            assert_eq!(
                rows(&b),
                vec![vec![-2.0 * gamma, 1.0, 1.0], vec![1.0, 0.0, 0.0], vec![1.0, 0.0, 0.0]]
            );
        }
        let s = ModelSpec::extended(Dimensionality::D1, 0.3, 0.7, 1.5, 0.25);
        assert_eq!(rows(&extended_block(&s, -1).unwrap()), vec![vec![-1.75]]);
        assert!(matches!(extended_block(&s, -2), Err(Error::Domain(_))));

        let s = ModelSpec::extended(Dimensionality::D1, 1.0, 1.0, 1.0, 1.0);
        let es = eig_block(&extended_block(&s, 0).unwrap()).unwrap();
        let s3 = 3f64.sqrt();
        for (g, w) in es.values.iter().zip([-1.0 - s3, 0.0, -1.0 + s3]) {
            assert!((g - w).abs() < 1e-14);
        }
    }

    #[test]
    fn extended_general_layout() {
        // distinct couplings and detunings make every slot identifiable
        let (eta, chi, m, g) = (0.3, 0.7, 1.5, 0.25);
        let s = ModelSpec::extended(Dimensionality::D1, eta, chi, m, g);
        let b = extended_block(&s, 2).unwrap();
        let f3 = 3f64.sqrt();
        let f2 = 2f64.sqrt();
        let want = [
            [-m - g, eta * f3, chi * f3, 0.0],
            [eta * f3, m - g, 0.0, chi * f2],
            [chi * f3, 0.0, g - m, eta * f2],
            [0.0, chi * f2, eta * f2, m + g],
        ];
        for i in 0..4 {
            for j in 0..4 {
                assert!((b.re(i, j) - want[i][j]).abs() < 1e-15, "({i},{j})");
            }
        }
    }

    #[test]
    fn analytic_examples() {
        let s = ModelSpec::dmo(d3(1, BranchD3::InfiniteDeg), 1.0, 0.0);
        assert_eq!(analytic_energies(&s, 4).unwrap(), (-2.0, 2.0));
        let s = ModelSpec::dmo(Dimensionality::D1, 0.0, 3.0);
        for n in 0..5 {
            assert_eq!(analytic_energies(&s, n).unwrap(), (-3.0, 3.0));
        }
        assert_eq!(jc_energies(2.0, 1.0, 2), (-3.0, 3.0));
        let s = ModelSpec::dmo(d3(5, BranchD3::InfiniteDeg), 1.0, 0.0);
        assert!(analytic_energies(&s, 1).is_err());
    }

    #[test]
    fn dressed_resonance_and_limits() {
        let (p, m) = dressed_states(1.0, 0.0, 3).unwrap();
        let h = 0.5f64.sqrt();
        for z in p.amplitudes.iter().chain(m.amplitudes.iter()) {
            assert!((z.norm() - h).abs() < 1e-15);
        }
        assert!((mixing_angle(1.0, 0.0, 3) - std::f64::consts::FRAC_PI_4).abs() < 1e-15);

        let (p, _) = dressed_states(1e-9, 1.0, 2).unwrap();
        assert!((p.amplitudes[0].re - 1.0).abs() < 1e-12);
        assert!(mixing_angle(1e-9, 1.0, 2) < 1e-8);

        assert!(matches!(dressed_states(0.0, 0.0, 1), Err(Error::Degenerate(_))));
        assert!(dressed_states(1.0, 1.0, 0).is_err());
    }

    #[test]
    fn mapping_examples() {
        let r = parameter_mapping(&ModelSpec::dmo(Dimensionality::D1, 0.7, 1.0)).unwrap();
        assert!(r.exact && r.omega_equivalent == 0.7);
        let r = parameter_mapping(&ModelSpec::dmo(d3(1, BranchD3::InfiniteDeg), 0.7, 1.0)).unwrap();
        assert!(r.exact && r.omega_equivalent == 0.7 * SQRT_2);
        let r = parameter_mapping(&ModelSpec::dmo(d3(1, BranchD3::FiniteDeg), 0.7, 1.0)).unwrap();
        assert!(!r.exact);
    }

    #[test]
    fn decoupled_extended_is_direct_sum() {
        // χ = γ = 0: |·,−′⟩ and |·,+′⟩ pairs decouple into two oscillator blocks
        for dim in [Dimensionality::D1, Dimensionality::D2, d3(3, BranchD3::FiniteDeg)] {
            for inv in 0..6i64 {
                let ext = ModelSpec::extended(dim, 0.8, 0.0, 1.3, 0.0);
                let mut got = eig_block(&extended_block(&ext, inv).unwrap()).unwrap().values;
                let single = ModelSpec::dmo(dim, 0.8, 1.3);
                let bottom = single.chain_bottom();
                let mut want = Vec::new();
                // field isospin down: sector with inv+1 excitations; up: inv
                for k in [inv + 1, inv] {
                    want.extend(eig_block(&dmo_block(&single, bottom + k as u32).unwrap()).unwrap().values);
                }
                got.sort_by(f64::total_cmp);
                want.sort_by(f64::total_cmp);
                for (g, w) in got.iter().zip(&want) {
                    assert!((g - w).abs() < 1e-12, "{dim:?} {inv}: {got:?} vs {want:?}");
                }
            }
        }
    }

    proptest! {
        #[test]
        fn dmo_spectrum_matches_closed_form(eta in 0.0f64..3.0, mc2 in -2.0f64..2.0, level in 0u32..40, twice_j in (0i64..5).prop_map(|x| 2 * x + 1), fin in any::<bool>()) {
            let branch = if fin { BranchD3::FiniteDeg } else { BranchD3::InfiniteDeg };
            for dim in [Dimensionality::D1, Dimensionality::D2, d3(twice_j, branch)] {
                let spec = ModelSpec::dmo(dim, eta, mc2);
                let level = level + spec.chain_bottom();
                let block = dmo_block(&spec, level).unwrap();
                prop_assert!(block_is_invariant(&block));
                let es = eig_block(&block).unwrap();
                let (lo, hi) = analytic_energies(&spec, level).unwrap();
                if block.dim() == 2 {
                    let (a, b) = two_by_two(block.re(0, 0), block.re(0, 1), block.re(1, 1));
                    prop_assert!((es.values[0] - a).abs() <= 1e-12 * hi.max(1.0));
                    prop_assert!((es.values[1] - b).abs() <= 1e-12 * hi.max(1.0));
                    prop_assert!((es.values[0] - lo).abs() <= 1e-12 * hi.max(1e-300));
                    prop_assert!((es.values[1] - hi).abs() <= 1e-12 * hi.max(1e-300));
                } else {
                    prop_assert_eq!(es.values[0], -mc2);
                }
            }
        }

        #[test]
        fn dressed_states_are_eigenvectors(omega in 0.01f64..3.0, delta in -3.0f64..3.0, n in 1u32..30) {
            let (p, m) = dressed_states(omega, delta, n).unwrap();
            let block = jc_block(omega, delta, n);
            let (lo, hi) = jc_energies(omega, delta, n);
            let hp = &block.entries * &p.amplitudes;
            let hm = &block.entries * &m.amplitudes;
            prop_assert!((hp - &p.amplitudes * C64::new(hi, 0.0)).norm() < 1e-12 * hi.max(1.0));
            prop_assert!((hm - &m.amplitudes * C64::new(lo, 0.0)).norm() < 1e-12 * hi.max(1.0));
            prop_assert!(p.amplitudes.dotc(&m.amplitudes).norm() < 1e-14);
            let th = mixing_angle(omega, delta, n);
            prop_assert!((th.sin().powi(2) + th.cos().powi(2) - 1.0).abs() < 1e-14);
            // eig_block as an independent route
            let es = eig_block(&block).unwrap();
            prop_assert!((es.values[1] - hi).abs() < 1e-12 * hi.max(1.0));
            prop_assert!((es.vector(1).dotc(&p.amplitudes).norm() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn mapping_reproduces_jc_blocks(eta in 0.0f64..3.0, mc2 in -2.0f64..2.0, n in 0u32..50) {
            for dim in [Dimensionality::D1, Dimensionality::D2] {
                let spec = ModelSpec::dmo(dim, eta, mc2);
                let map = parameter_mapping(&spec).unwrap();
                let jc = jc_block(map.omega_equivalent, map.delta_equivalent, n);
                prop_assert_eq!(dmo_block(&spec, n).unwrap(), jc);
            }
        }
    }
}
