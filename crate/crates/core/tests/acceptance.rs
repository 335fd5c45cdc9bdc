//! End-to-end acceptance checks, one test per criterion. Each prints a single
//! `PASS`/`FAIL` line with the measured value and its tolerance.

use std::f64::consts::{FRAC_PI_4, PI};
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dmojc::dynamics::{analytic_kernel, atomic_initial_state, evolve_extended, time_grid};
use dmojc::entanglement::{closed_form_concurrence, concurrence, reduce_to_atoms, ReducedDensity};
use dmojc::oracle::{build_full, check_invariant, compare_block_vs_full, FullPropagator};
use dmojc::qnums::{Dimensionality, ModelSpec};
use dmojc::validate::{
    cp_plane, kernel_identities, mapping_identity, purity_figure, resonant_grid, run_acceptance,
    spectral_exactness, wootters_reference, AcceptanceOptions, GRID_ALPHAS, GRID_GAMMAS,
};
use dmojc::C64;

fn report(id: u32, label: &str, ok: bool, detail: String) {
    println!("{} criterion {id} ({label}): {detail}", if ok { "PASS" } else { "FAIL" });
}

fn resonant(gamma: f64) -> ModelSpec {
    ModelSpec::extended(Dimensionality::D1, 1.0, 1.0, gamma, gamma)
}

#[test]
fn criterion_1_spectral_exactness() {
    let start = Instant::now();
    let (n, err) = spectral_exactness().unwrap();
    let elapsed = start.elapsed();
    let ok = n >= 200 && err < 1e-12 && elapsed < Duration::from_secs(1);
    report(1, "spectral exactness", ok, format!("{n} blocks, max rel err {err:.3e} (tol 1e-12), {elapsed:?} (< 1 s)"));
    assert!(ok);
}

#[test]
fn criterion_2_mapping_identity() {
    let (blocks, spectra) = mapping_identity().unwrap();
    let ok = blocks == 0.0 && spectra < 1e-12;
    report(2, "mapping identity", ok, format!("block diff {blocks:.3e} (exact), infinite-branch spectra {spectra:.3e} (tol 1e-12)"));
    assert!(ok);
}

#[test]
fn criterion_3_oracle_equivalence() {
    let opts = AcceptanceOptions::default();
    let grid = opts.grid();
    let start = Instant::now();
    let mut worst = 0.0f64;
    for gamma in GRID_GAMMAS {
        for alpha in GRID_ALPHAS {
            let r = compare_block_vs_full(&resonant(gamma), &atomic_initial_state(alpha), &grid, opts.nmax).unwrap();
            worst = worst.max(r.max_state_error);
        }
    }
    let elapsed = start.elapsed();
    let ok = worst < 1e-10 && elapsed < Duration::from_secs(30);
    report(3, "oracle equivalence", ok, format!("sup-norm {worst:.3e} (tol 1e-10), nmax 24, {elapsed:?} (< 30 s)"));
    assert!(ok);
}

#[test]
fn criterion_4_conservation() {
    let opts = AcceptanceOptions::default();
    let grid = opts.grid();
    let (mut mean, mut var) = (0.0f64, 0.0f64);
    for gamma in GRID_GAMMAS {
        let (space, h) = build_full(&resonant(gamma), opts.nmax).unwrap();
        let prop = FullPropagator::new(&h);
        for alpha in GRID_ALPHAS {
            let psi0 = space.embed(&atomic_initial_state(alpha)).unwrap();
            let traj: Vec<DVector<C64>> = grid.iter().map(|&t| prop.apply(&psi0, t)).collect();
            let d = check_invariant(&space, &traj);
            mean = mean.max(d.mean);
            var = var.max(d.variance);
        }
    }
    let ok = mean < 1e-12 && var < 1e-12;
    report(4, "conservation", ok, format!("<I> drift {mean:.3e}, variance drift {var:.3e} (tol 1e-12)"));
    assert!(ok);
}

#[test]
fn criterion_5_field_purity_figure() {
    let fig = purity_figure(&AcceptanceOptions::default()).unwrap();
    let ok = fig.initial_defect == 0.0 && fig.minima_in_band() && fig.times_increasing();
    let times: Vec<String> = fig
        .first_minimum_times
        .iter()
        .map(|(g, t)| format!("{g}:{}", t.map_or("none".into(), |t| format!("{t:.4}"))))
        .collect();
    report(
        5,
        "field purity figure",
        ok,
        format!(
            "P_F(0) defect {:.1e}, minima {:?} in [0.50, 0.52], first-minimum times [{}]",
            fig.initial_defect,
            fig.minima,
            times.join(", ")
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_6_analytic_reconciliation() {
    let opts = AcceptanceOptions::default();
    let rows = resonant_grid(&opts).unwrap();
    let max = |f: fn(&dmojc::validate::GridRow) -> f64| rows.iter().map(f).fold(0.0, f64::max);
    let pops = max(|r| r.population_residual);
    let pf = max(|r| r.field_purity_residual);
    let pa = max(|r| r.atoms_purity_residual);
    let conc = max(|r| r.concurrence_residual);
    let ids = kernel_identities(&opts);
    let ok = pops < 1e-9 && pf < 1e-9 && pa < 1e-9 && conc < 1e-9 && ids < 1e-12;
    report(
        6,
        "analytic reconciliation",
        ok,
        format!("populations {pops:.3e}, field purity {pf:.3e}, atoms purity {pa:.3e}, concurrence {conc:.3e} (tol 1e-9); g identities {ids:.3e} (tol 1e-12)"),
    );
    assert!(ok);
}

fn random_density(rng: &mut ChaCha8Rng) -> ReducedDensity {
    let rank = rng.gen_range(1..=4);
    let g = DMatrix::from_fn(4, rank, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let rho = &g * g.adjoint();
    let tr = rho.trace().re;
    let rho = rho.map(|z| z / tr);
    // exact Hermitian symmetry
    let rho = (&rho + rho.adjoint()).map(|z| z * 0.5);
    ReducedDensity::new(rho).unwrap()
}

#[test]
fn criterion_7_concurrence_oracle() {
    let opts = AcceptanceOptions::default();
    let grid = opts.grid();
    let mut worst = 0.0f64;
    for gamma in GRID_GAMMAS {
        let k = analytic_kernel(gamma);
        for alpha in GRID_ALPHAS {
            for row in evolve_extended(&resonant(gamma), alpha, &grid).unwrap() {
                let c = concurrence(&reduce_to_atoms(&row.to_state().unwrap()).unwrap()).unwrap();
                worst = worst.max((c - closed_form_concurrence(&k, alpha, row.t)).abs());
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut out_of_range = 0;
    for _ in 0..2000 {
        let c = concurrence(&random_density(&mut rng)).unwrap();
        if !(0.0..=1.0).contains(&c) {
            out_of_range += 1;
        }
    }
    let refs = wootters_reference().unwrap();
    let ok = worst < 1e-9 && out_of_range == 0 && refs < 1e-12;
    report(
        7,
        "concurrence oracle",
        ok,
        format!("closed form vs Wootters {worst:.3e} (tol 1e-9); {out_of_range}/2000 random states outside [0,1]; Bell/product {refs:.3e} (tol 1e-12)"),
    );
    assert!(ok);
}

#[test]
fn criterion_8_cp_plane() {
    let s = cp_plane(&AcceptanceOptions::default()).unwrap();
    let ok = s.zero_detuning_distance < 1e-6 && s.envelope_excess <= 1e-9 && s.frontier_identity_defect == 0.0;
    report(
        8,
        "CP plane",
        ok,
        format!(
            "gamma=0 distance {:.3e} (tol 1e-6), gamma=1 envelope excess {:.3e} (tol 1e-9), frontier identity defect {:.1e} (exact)",
            s.zero_detuning_distance, s.envelope_excess, s.frontier_identity_defect
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_9_determinism() {
    let opts = AcceptanceOptions::default();
    let a = serde_json::to_string_pretty(&run_acceptance(&opts).unwrap()).unwrap();
    let b = serde_json::to_string_pretty(&run_acceptance(&opts).unwrap()).unwrap();
    let ok = a == b && !a.is_empty();
    report(9, "determinism", ok, format!("two validate reports, {} bytes, identical: {}", a.len(), a == b));
    assert!(ok);
}

#[test]
fn full_run_passes_and_fault_is_named() {
    let report = run_acceptance(&AcceptanceOptions::default()).unwrap();
    let failed: Vec<_> = report.failures().map(|c| c.name.clone()).collect();
    assert!(report.pass, "{failed:?}");

    let faulty = AcceptanceOptions {
        fault: Some(dmojc::validate::Fault::FlipExtendedDiagonal),
        ..AcceptanceOptions::default()
    };
    let report = run_acceptance(&faulty).unwrap();
    assert!(!report.check("extended-block-vs-oracle").unwrap().passed);
}

#[test]
fn zero_time_row_is_exact() {
    for alpha in [0.0, PI / 40.0, FRAC_PI_4] {
        let rows = evolve_extended(&resonant(1.0), alpha, &time_grid(30.0, 3001)).unwrap();
        assert_eq!(rows[0].t, 0.0);
        assert_eq!(rows[3000].t, 30.0);
        let c = concurrence(&reduce_to_atoms(&rows[0].to_state().unwrap()).unwrap()).unwrap();
        assert!((c - (2.0 * alpha).sin().abs()).abs() < 1e-12);
    }
}
