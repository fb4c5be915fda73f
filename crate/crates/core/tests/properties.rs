use proptest::prelude::*;
use turnpoint::numerics::Tolerances;
use turnpoint::potential::{PotentialSpec, UnitSystem};
use turnpoint::reference::{shoot_bound_states, NumerovConfig};
use turnpoint::report::{self, ComparisonRow, Command, ConfigLayer, ReferenceSource, RunConfig};
use turnpoint::solver::{self, LevelSpec, Variant};

fn grid() -> impl Strategy<Value = f64> {
    prop::sample::select(vec![0.5, 1.0, 2.0])
}

fn well(family: usize, p: f64, q: f64) -> PotentialSpec {
    match family {
        0 => PotentialSpec::InfiniteSquareWell { width: p },
        1 => PotentialSpec::HarmonicOscillator { omega: p },
        2 => PotentialSpec::VWell { u0: p },
        3 => PotentialSpec::ParabolicWell { u0: p, a: q },
        4 => PotentialSpec::QuadraticInverse { a: p, b: q },
        _ => PotentialSpec::TrigWell { u0: p, a: q },
    }
}

fn variant() -> impl Strategy<Value = Variant> {
    prop::sample::select(Variant::ALL.to_vec())
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn closed_forms_agree_with_numeric_solves(
        family in 0usize..5, p in grid(), q in grid(), hbar in grid(), mass in grid(), n in 1i64..=5, v in variant(),
    ) {
        let spec = well(family, p, q);
        let units = UnitSystem { hbar, mass };
        let tol = Tolerances::default();
        let g = solver::ground_state_energy(&spec, &units, &tol).unwrap();
        let exact = solver::closed_form_ground(&spec, &units).unwrap();
        prop_assert!(rel(g.energy, exact) < 1e-8, "{spec} ground {} vs {exact}", g.energy);
        let level = LevelSpec::new(n, v).unwrap();
        let l = solver::excited_energy(&spec, level, &units, &tol).unwrap();
        let exact = solver::closed_form_excited(&spec, level, &units).unwrap();
        prop_assert!(rel(l.energy, exact) < 1e-8, "{spec} {v} n={n}: {} vs {exact}", l.energy);
    }

    #[test]
    fn residuals_and_monotonicity_in_any_units(
        family in 0usize..6, p in grid(), q in grid(), hbar in grid(), mass in grid(), v in variant(),
    ) {
        let spec = well(family, p, q);
        let units = UnitSystem { hbar, mass };
        let tol = Tolerances::default();
        let g = solver::ground_state_energy(&spec, &units, &tol).unwrap();
        let c0 = 2.0 * hbar * hbar / mass;
        prop_assert!((g.energy - c0 / (g.tp.d * g.tp.d)).abs() <= 1e-8 * g.energy);
        let levels = solver::solve_levels(&spec, 5, &[v], &units, &tol).unwrap();
        for l in &levels {
            prop_assert!(l.phase_residual() <= 1e-8, "{spec} {v} n={}", l.level.n);
        }
        for w in levels.windows(2) {
            prop_assert!(w[1].energy > w[0].energy);
        }
    }

    #[test]
    fn reference_levels_count_their_nodes(family in 0usize..6, p in grid(), q in grid()) {
        let spec = well(family, p, q);
        let levels = shoot_bound_states(&spec, 3, &NumerovConfig::default(), &UnitSystem::default()).unwrap();
        prop_assert_eq!(levels.len(), 3);
        for (i, l) in levels.iter().enumerate() {
            prop_assert_eq!(l.n_index, i);
            prop_assert_eq!(l.node_count, i, "{} level {}", spec, i);
        }
        for w in levels.windows(2) {
            prop_assert!(w[1].energy > w[0].energy);
        }
    }

    #[test]
    fn comparison_rel_diff_definition(method in -1e6f64..1e6, reference in -1e6f64..1e6) {
        let row = ComparisonRow::new("x".into(), 1, "general", 0, ReferenceSource::Numerov, method, reference);
        let expected = (method - reference).abs() / reference.abs().max(1e-300);
        prop_assert_eq!(row.rel_diff, expected);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn solve_documents_are_reproducible(family in 0usize..6, p in grid(), q in grid(), n_max in 1u32..=3) {
        let layer = ConfigLayer { potential: Some(well(family, p, q).to_string()), n_max: Some(n_max), ..Default::default() };
        let config = RunConfig::from_layer(&layer, Command::Solve).unwrap();
        let a = report::render_json(&report::run_solve(&config).unwrap());
        let b = report::render_json(&report::run_solve(&config).unwrap());
        prop_assert_eq!(a, b);
    }
}
