//! The acceptance grid: every quantitative claim the library makes, checked
//! against independent routes and collected into one deterministic report.
//!
//! Reports contain no timings or environment data, so identical options give
//! byte-identical serialized reports.

use std::f64::consts::{FRAC_PI_4, FRAC_PI_8, PI, SQRT_2};

use rayon::prelude::*;
use serde::Serialize;

use crate::blocks::{dmo_block, eig_block, extended_block, jc_block, jc_energies};
use crate::dynamics::{analytic_kernel, atomic_initial_state, coefficient_formulas, time_grid, Propagator};
use crate::entanglement::{
    closed_form_concurrence, concurrence, cp_envelope, cp_frontier, cp_trajectory, frontier_distance, purity,
    reduce_to_atoms, reduce_to_field, ReducedDensity,
};
use crate::error::{usage, Result};
use crate::oracle::{compare_with_block, Check};
use crate::qnums::{chain_index, BranchD3, Dimensionality, HalfInt, ModelSpec};

pub const GRID_GAMMAS: [f64; 4] = [0.0, 0.5, 1.0, 2.0];
pub const GRID_ALPHAS: [f64; 4] = [0.0, PI / 40.0, FRAC_PI_8, FRAC_PI_4];
pub const FIGURE_GAMMAS: [f64; 4] = [0.5, 1.0, 2.0, 4.0];
pub const CP_ALPHAS: [f64; 3] = [0.0, PI / 40.0, FRAC_PI_4];
pub const FRONTIER_SAMPLES: usize = 512;

/// First purity minimum: the first grid-local minimum at or below this value.
pub const DEEP_MINIMUM: f64 = 0.52;

/// Deliberate defects for negative controls.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fault {
    /// Flip the sign of the first diagonal entry of the `𝒩 = 0` block before
    /// comparing it with the oracle.
    FlipExtendedDiagonal,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AcceptanceOptions {
    pub t_max: f64,
    pub steps: usize,
    pub nmax: u32,
    pub fault: Option<Fault>,
}

impl Default for AcceptanceOptions {
    fn default() -> Self {
        AcceptanceOptions {
            t_max: 30.0,
            steps: 3001,
            nmax: 24,
            fault: None,
        }
    }
}

impl AcceptanceOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_max.is_finite() && self.t_max > 0.0) {
            return usage(format!("t_max must be positive and finite, got {}", self.t_max));
        }
        if self.steps < 2 {
            return usage("steps must be at least 2");
        }
        if self.nmax < 4 {
            return usage("nmax must be at least 4 for the oracle grid");
        }
        Ok(())
    }

    pub fn grid(&self) -> Vec<f64> {
        time_grid(self.t_max, self.steps)
    }
}

/// Oracle and reconciliation results for one `(γ, α)` of the resonant grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridRow {
    pub gamma: f64,
    pub alpha: f64,
    pub max_state_error: f64,
    pub max_spectral_error: f64,
    pub invariant_drift: f64,
    pub variance_drift: f64,
    pub edge_warning: bool,
    /// Populations against `(f_α, ½(1−f_α−g cos2α), ½(1−f_α+g cos2α))`.
    pub population_residual: f64,
    pub field_purity_residual: f64,
    pub atoms_purity_residual: f64,
    /// Wootters concurrence against the closed form.
    pub concurrence_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AcceptanceReport {
    pub options: AcceptanceOptions,
    pub max_state_error: f64,
    pub max_spectral_error: f64,
    pub invariant_drift: f64,
    pub variance_drift: f64,
    pub edge_warning: bool,
    pub rows: Vec<GridRow>,
    pub checks: Vec<Check>,
    pub pass: bool,
}

impl AcceptanceReport {
    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn resonant(gamma: f64) -> ModelSpec {
    ModelSpec::extended(Dimensionality::D1, 1.0, 1.0, gamma, gamma)
}

fn max_of(it: impl IntoIterator<Item = f64>) -> f64 {
    it.into_iter().fold(0.0, f64::max)
}

/// Every `(dimensionality, η, mc², family index)` of the spectral grid.
pub fn spectral_grid() -> Vec<(ModelSpec, u32)> {
    let mut dims = vec![Dimensionality::D1, Dimensionality::D2];
    for twice_j in [1, 3, 5] {
        for branch in [BranchD3::FiniteDeg, BranchD3::InfiniteDeg] {
            dims.push(Dimensionality::D3 { j: HalfInt::from_twice(twice_j), branch });
        }
    }
    let mut grid = Vec::new();
    for dim in dims {
        for eta in [0.25, 1.0, 2.5] {
            for mc2 in [0.0, 0.5, 2.0] {
                for n in 1..=5 {
                    grid.push((ModelSpec::dmo(dim, eta, mc2), n));
                }
            }
        }
    }
    grid
}

/// Closed-form `μ` written out per dimensionality.
fn expected_mu(dim: Dimensionality, n: u32) -> f64 {
    match dim {
        Dimensionality::D1 => n as f64,
        Dimensionality::D2 => 2.0 * n as f64,
        Dimensionality::D3 { branch: BranchD3::InfiniteDeg, .. } => 2.0 * n as f64,
        Dimensionality::D3 { j, branch: BranchD3::FiniteDeg } => 2.0 * n as f64 + 2.0 * j.value() + 2.0,
    }
}

fn family_level(spec: &ModelSpec, n: u32) -> u32 {
    match spec.dim {
        Dimensionality::D3 { branch, .. } => spec.chain_bottom() + chain_index(n, branch),
        _ => n,
    }
}

/// Largest relative deviation of block eigenvalues from `±√(m²c⁴ + η²μ)`,
/// and the number of grid points.
pub fn spectral_exactness() -> Result<(usize, f64)> {
    let grid = spectral_grid();
    let errors: Vec<f64> = grid
        .iter()
        .map(|(spec, n)| {
            let block = dmo_block(spec, family_level(spec, *n))?;
            let values = eig_block(&block)?.values;
            let e = (spec.mc2 * spec.mc2 + spec.eta * spec.eta * expected_mu(spec.dim, *n)).sqrt();
            Ok(((values[0] + e).abs() / e).max((values[1] - e).abs() / e))
        })
        .collect::<Result<_>>()?;
    Ok((grid.len(), max_of(errors)))
}

/// `(entrywise block difference for D1/D2, spectral difference for the
/// infinite 3+1 branch)` against the Jaynes-Cummings identifications.
pub fn mapping_identity() -> Result<(f64, f64)> {
    let mut block_diff = 0.0f64;
    let mut spectral_diff = 0.0f64;
    for eta in [0.3, 1.0, 1.7] {
        for mc2 in [0.0, 0.4, 1.5] {
            for n in 1..=8 {
                for (dim, omega) in [(Dimensionality::D1, eta), (Dimensionality::D2, eta * SQRT_2)] {
                    let ours = dmo_block(&ModelSpec::dmo(dim, eta, mc2), n)?;
                    let jc = jc_block(omega, mc2, n);
                    block_diff = block_diff.max(max_of((&ours.entries - &jc.entries).iter().map(|z| z.norm())));
                    if ours.basis != jc.basis {
                        block_diff = f64::INFINITY;
                    }
                }
                for twice_j in [1, 3, 5] {
                    let dim = Dimensionality::D3 {
                        j: HalfInt::from_twice(twice_j),
                        branch: BranchD3::InfiniteDeg,
                    };
                    let spec = ModelSpec::dmo(dim, eta, mc2);
                    let values = eig_block(&dmo_block(&spec, family_level(&spec, n))?)?.values;
                    let (lo, hi) = jc_energies(SQRT_2 * eta, mc2, n);
                    spectral_diff = spectral_diff.max((values[0] - lo).abs()).max((values[1] - hi).abs());
                }
            }
        }
    }
    Ok((block_diff, spectral_diff))
}

/// Oracle comparison and closed-form reconciliation on the resonant grid.
pub fn resonant_grid(opts: &AcceptanceOptions) -> Result<Vec<GridRow>> {
    opts.validate()?;
    let grid = opts.grid();
    let cells: Vec<(f64, f64)> = GRID_GAMMAS
        .iter()
        .flat_map(|&g| GRID_ALPHAS.iter().map(move |&a| (g, a)))
        .collect();
    cells
        .par_iter()
        .map(|&(gamma, alpha)| grid_row(opts, &grid, gamma, alpha))
        .collect()
}

fn grid_row(opts: &AcceptanceOptions, grid: &[f64], gamma: f64, alpha: f64) -> Result<GridRow> {
    let spec = resonant(gamma);
    let psi0 = atomic_initial_state(alpha);
    let mut block = extended_block(&spec, 0)?;
    if opts.fault == Some(Fault::FlipExtendedDiagonal) {
        block.entries[(0, 0)] = -block.entries[(0, 0)];
    }
    let report = compare_with_block(&spec, &block, &psi0, grid, opts.nmax)?;

    let kernel = analytic_kernel(gamma);
    let prop = Propagator::new(&extended_block(&spec, 0)?)?;
    let (mut pop, mut pf, mut pa, mut conc) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for &t in grid {
        let psi = prop.apply(&psi0, t)?;
        let p: Vec<f64> = psi.amplitudes.iter().map(|z| z.norm_sqr()).collect();
        let (a, b, c) = coefficient_formulas(&kernel, alpha, t);
        pop = pop.max((p[0] - a).abs()).max((p[1] - b).abs()).max((p[2] - c).abs());
        pf = pf.max((purity(&reduce_to_field(&psi)?) - kernel.field_purity(t, alpha)).abs());
        let atoms = reduce_to_atoms(&psi)?;
        pa = pa.max((purity(&atoms) - kernel.atoms_purity(t, alpha)).abs());
        conc = conc.max((concurrence(&atoms)? - closed_form_concurrence(&kernel, alpha, t)).abs());
    }
    Ok(GridRow {
        gamma,
        alpha,
        max_state_error: report.max_state_error,
        max_spectral_error: report.max_spectral_error,
        invariant_drift: report.invariant_drift,
        variance_drift: report.variance_drift,
        edge_warning: report.edge_warning,
        population_residual: pop,
        field_purity_residual: pf,
        atoms_purity_residual: pa,
        concurrence_residual: conc,
    })
}

/// Field purity along the resonant `α = 0` evolution.
pub struct FieldPurityCurve {
    prop: Propagator,
}

impl FieldPurityCurve {
    pub fn new(gamma: f64) -> Result<Self> {
        Ok(FieldPurityCurve {
            prop: Propagator::new(&extended_block(&resonant(gamma), 0)?)?,
        })
    }

    pub fn at(&self, t: f64) -> Result<f64> {
        Ok(purity(&reduce_to_field(&self.prop.apply(&atomic_initial_state(0.0), t)?)?))
    }

    /// Time of the first grid-local minimum with value at most
    /// [`DEEP_MINIMUM`], refined by golden-section search between its grid
    /// neighbours.
    pub fn first_deep_minimum(&self, grid: &[f64]) -> Result<Option<f64>> {
        let values: Vec<f64> = grid.iter().map(|&t| self.at(t)).collect::<Result<_>>()?;
        for i in 1..values.len().saturating_sub(1) {
            if values[i] <= values[i - 1] && values[i] <= values[i + 1] && values[i] <= DEEP_MINIMUM {
                return self.golden(grid[i - 1], grid[i + 1]).map(Some);
            }
        }
        Ok(None)
    }

    fn golden(&self, mut a: f64, mut b: f64) -> Result<f64> {
        let r = (5f64.sqrt() - 1.0) / 2.0;
        let mut c = b - r * (b - a);
        let mut d = a + r * (b - a);
        let (mut fc, mut fd) = (self.at(c)?, self.at(d)?);
        for _ in 0..80 {
            if fc < fd {
                b = d;
                d = c;
                fd = fc;
                c = b - r * (b - a);
                fc = self.at(c)?;
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + r * (b - a);
                fd = self.at(d)?;
            }
        }
        Ok(0.5 * (a + b))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PurityFigure {
    /// `|P_F(0) − 1|` over all `γ` examined.
    pub initial_defect: f64,
    /// `(γ, min_t P_F)` for `γ ∈ {0, 1}`.
    pub minima: Vec<(f64, f64)>,
    /// `(γ, t)` of the first deep minimum for each figure `γ`.
    pub first_minimum_times: Vec<(f64, Option<f64>)>,
}

impl PurityFigure {
    pub fn minima_in_band(&self) -> bool {
        self.minima.iter().all(|&(_, m)| (0.5..=DEEP_MINIMUM).contains(&m))
    }

    pub fn times_increasing(&self) -> bool {
        let times: Option<Vec<f64>> = self.first_minimum_times.iter().map(|p| p.1).collect();
        times.is_some_and(|v| v.windows(2).all(|w| w[0] < w[1]))
    }
}

pub fn purity_figure(opts: &AcceptanceOptions) -> Result<PurityFigure> {
    opts.validate()?;
    let grid = opts.grid();
    let minima: Vec<(f64, f64)> = [0.0, 1.0]
        .par_iter()
        .map(|&gamma| {
            let curve = FieldPurityCurve::new(gamma)?;
            let values: Vec<f64> = grid.iter().map(|&t| curve.at(t)).collect::<Result<_>>()?;
            Ok((gamma, values.into_iter().fold(f64::INFINITY, f64::min)))
        })
        .collect::<Result<_>>()?;
    let first_minimum_times: Vec<(f64, Option<f64>)> = FIGURE_GAMMAS
        .par_iter()
        .map(|&gamma| Ok((gamma, FieldPurityCurve::new(gamma)?.first_deep_minimum(&grid)?)))
        .collect::<Result<_>>()?;
    let mut initial_defect = 0.0f64;
    for gamma in [0.0, 1.0].iter().chain(FIGURE_GAMMAS.iter()) {
        initial_defect = initial_defect.max((FieldPurityCurve::new(*gamma)?.at(0.0)? - 1.0).abs());
    }
    Ok(PurityFigure {
        initial_defect,
        minima,
        first_minimum_times,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CpPlaneSummary {
    /// Largest distance of a `γ = 0` point from the nearer frontier curve.
    pub zero_detuning_distance: f64,
    /// Largest excursion of a `γ = 1` point outside the envelope.
    pub envelope_excess: f64,
    /// Largest `|C₊ + C₋ − 1|` at `α = 0` over the frontier samples.
    pub frontier_identity_defect: f64,
}

/// Uniform purity samples on `[½, 1]`.
pub fn frontier_purities(samples: usize) -> Vec<f64> {
    time_grid(0.5, samples).into_iter().map(|x| 0.5 + x).collect()
}

pub fn cp_plane(opts: &AcceptanceOptions) -> Result<CpPlaneSummary> {
    opts.validate()?;
    let grid = opts.grid();
    let mut zero_detuning_distance = 0.0f64;
    let mut envelope_excess = 0.0f64;
    for &alpha in &CP_ALPHAS {
        for p in cp_trajectory(&resonant(0.0), alpha, &grid)? {
            zero_detuning_distance = zero_detuning_distance.max(frontier_distance(&p, alpha)?);
        }
        for p in cp_trajectory(&resonant(1.0), alpha, &grid)? {
            let (lo, hi) = cp_envelope(p.purity, alpha)?;
            envelope_excess = envelope_excess.max(lo - p.concurrence).max(p.concurrence - hi);
        }
    }
    let mut frontier_identity_defect = 0.0f64;
    for p in frontier_purities(FRONTIER_SAMPLES) {
        let (cp, cm) = cp_frontier(p, 0.0)?;
        frontier_identity_defect = frontier_identity_defect.max((cp + cm - 1.0).abs());
    }
    Ok(CpPlaneSummary {
        zero_detuning_distance,
        envelope_excess,
        frontier_identity_defect,
    })
}

/// Largest deviation of the Wootters concurrence from 1 on Bell states and
/// from 0 on product states.
pub fn wootters_reference() -> Result<f64> {
    use nalgebra::DVector;
    use num_complex::Complex64 as C64;
    let h = 0.5f64.sqrt();
    let z = C64::new(0.0, 0.0);
    let r = |x: f64| C64::new(x, 0.0);
    let pure = |v: [C64; 4]| {
        let v = DVector::from_vec(v.to_vec());
        ReducedDensity::new(&v * v.adjoint())
    };
    let bell = [
        [r(h), z, z, r(h)],
        [r(h), z, z, r(-h)],
        [z, r(h), r(h), z],
        [z, r(h), C64::new(0.0, -h), z],
    ];
    let (a, b) = (0.3f64.sin_cos(), 1.1f64.sin_cos());
    let product = [
        [r(1.0), z, z, z],
        [z, z, z, r(1.0)],
        // (cos a|−⟩ + sin a|+⟩) ⊗ (cos b|−⟩ + i sin b|+⟩)
        [r(a.1 * b.1), r(a.0 * b.1), C64::new(0.0, a.1 * b.0), C64::new(0.0, a.0 * b.0)],
    ];
    let mut worst = 0.0f64;
    for v in bell {
        worst = worst.max((concurrence(&pure(v)?)? - 1.0).abs());
    }
    for v in product {
        worst = worst.max(concurrence(&pure(v)?)?.abs());
    }
    Ok(worst)
}

/// `g(0) = 1` and the trigonometric form of `g`, over the figure `γ` values.
pub fn kernel_identities(opts: &AcceptanceOptions) -> f64 {
    let mut worst = 0.0f64;
    for gamma in GRID_GAMMAS.iter().chain(FIGURE_GAMMAS.iter()) {
        let k = analytic_kernel(*gamma);
        worst = worst.max((k.g(0.0) - 1.0).abs());
        for t in opts.grid() {
            let gt = k.gamma_tilde;
            let alt = (gt * t).cos() * (gamma * t).cos() + gamma / gt * (gt * t).sin() * (gamma * t).sin();
            worst = worst.max((k.g(t) - alt).abs());
        }
    }
    worst
}

/// Runs every check. Failures are report entries; `Err` means the run itself
/// could not be carried out.
pub fn run_acceptance(opts: &AcceptanceOptions) -> Result<AcceptanceReport> {
    opts.validate()?;
    let (_, spectral) = spectral_exactness()?;
    let (block_diff, infinite_diff) = mapping_identity()?;
    let rows = resonant_grid(opts)?;
    let figure = purity_figure(opts)?;
    let cp = cp_plane(opts)?;
    let bell = wootters_reference()?;
    let identities = kernel_identities(opts);

    let col = |f: fn(&GridRow) -> f64| max_of(rows.iter().map(f));
    let max_state_error = col(|r| r.max_state_error);
    let max_spectral_error = col(|r| r.max_spectral_error);
    let invariant_drift = col(|r| r.invariant_drift);
    let variance_drift = col(|r| r.variance_drift);
    let flag = |ok: bool| if ok { 0.0 } else { 1.0 };

    let checks = vec![
        Check::at_most("spectral-exactness", spectral, 1e-12),
        Check::at_most("mapping-identity", block_diff, 0.0),
        Check::at_most("mapping-infinite-branch", infinite_diff, 1e-12),
        Check::at_most("extended-block-vs-oracle", max_state_error, 1e-10),
        Check::at_most("oracle-spectrum", max_spectral_error, 1e-10),
        Check::at_most("invariant-conservation", invariant_drift, 1e-12),
        Check::at_most("invariant-variance", variance_drift, 1e-12),
        Check::at_most("field-purity-initial", figure.initial_defect, 0.0),
        Check::at_most("field-purity-minimum", flag(figure.minima_in_band()), 0.0),
        Check::at_most("field-purity-period", flag(figure.times_increasing()), 0.0),
        Check::at_most("kernel-identities", identities, 1e-12),
        Check::at_most("analytic-populations", col(|r| r.population_residual), 1e-9),
        Check::at_most("analytic-field-purity", col(|r| r.field_purity_residual), 1e-9),
        Check::at_most("analytic-atoms-purity", col(|r| r.atoms_purity_residual), 1e-9),
        Check::at_most("concurrence-oracle", col(|r| r.concurrence_residual), 1e-9),
        Check::at_most("concurrence-reference-states", bell, 1e-12),
        Check::at_most("cp-zero-detuning-curves", cp.zero_detuning_distance, 1e-6),
        Check::at_most("cp-envelope", cp.envelope_excess, 1e-9),
        Check::at_most("cp-frontier-identity", cp.frontier_identity_defect, 0.0),
    ];
    let pass = checks.iter().all(|c| c.passed);
    Ok(AcceptanceReport {
        options: *opts,
        max_state_error,
        max_spectral_error,
        invariant_drift,
        variance_drift,
        edge_warning: rows.iter().any(|r| r.edge_warning),
        rows,
        checks,
        pass,
    })
}
