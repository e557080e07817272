//! Property tests for the invariants listed per module.

use std::f64::consts::PI;

use graphlap_core::bundle::{random_bundle, scalar_to_bundle, validate_connection, ScalarField, Section};
use graphlap_core::families::{complete_union, line_z, LineMeasure, LinePotential};
use graphlap_core::form::{
    auto_excessive, boundary_capacity, capacity, capacity_alt, excessive_check, FiniteForm, FormMode,
    EXCESSIVE_BETAS,
};
use graphlap_core::linalg::{dot, C64};
use graphlap_core::metric::{
    huang_sigma, intrinsic_from_function, intrinsic_slack, path_metric, strongly_intrinsic_slack,
    EdgeLength, PseudoMetric,
};
use graphlap_core::operator::{
    apply_m, assemble, b_function, form_qc, greens_residual, heart_residual, kato_gap, pairing,
    subsolution_excess,
};
use graphlap_core::random::{aligned_section, random_measured_graph, random_real, random_section, rng};
use graphlap_core::{Exhaustion, MeasuredGraph};
use proptest::prelude::*;
use rand::Rng;

fn nonneg(mg: MeasuredGraph) -> MeasuredGraph {
    let v = mg.potential().iter().map(|v| v.abs()).collect();
    mg.with_potential(v).unwrap()
}

fn random_theta(mg: &MeasuredGraph, seed: u64) -> ScalarField {
    let mut r = rng(seed);
    let entries: Vec<_> = mg
        .graph
        .edges()
        .iter()
        .map(|e| ((e.u, e.v), r.random_range(0.0..2.0 * PI)))
        .collect();
    ScalarField::from_entries(&mg.graph, entries).unwrap()
}

fn form_for(mg: &MeasuredGraph, seed: u64) -> FiniteForm {
    let mut r = rng(seed ^ 0x5eed);
    let subset: Vec<usize> = (0..mg.len()).filter(|_| r.random_bool(0.8)).collect();
    let subset = if subset.is_empty() { vec![0] } else { subset };
    let mode = if seed % 2 == 0 { FormMode::Neumann } else { FormMode::Dirichlet };
    FiniteForm::new(mg, &subset, mode).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    // graph-core

    #[test]
    fn weights_are_symmetric(seed in any::<u64>()) {
        let mg = random_measured_graph(seed, 30).unwrap();
        for x in 0..mg.len() {
            for y in 0..mg.len() {
                prop_assert_eq!(mg.graph.weight(x, y), mg.graph.weight(y, x));
            }
        }
    }

    #[test]
    fn degree_sum_is_twice_total_weight(seed in any::<u64>()) {
        let mg = random_measured_graph(seed, 40).unwrap();
        let deg: f64 = mg.graph.degrees().iter().sum();
        let total: f64 = mg.graph.edges().iter().map(|e| e.weight).sum();
        prop_assert!((deg - 2.0 * total).abs() <= 1e-12 * total.max(1.0));
    }

    #[test]
    fn generated_families_have_expected_components(n in 1usize..40, k in 1usize..15) {
        let line = line_z(n, LineMeasure::NuAlpha(2.0), LinePotential::HalfSquare).unwrap();
        prop_assert!(line.graph.is_connected());
        prop_assert_eq!(complete_union(k, false).unwrap().graph.components().1, k);
        prop_assert_eq!(complete_union(k, true).unwrap().graph.components().1, 1);
    }

    #[test]
    fn ground_state_graph_of_one_round_trips(seed in any::<u64>()) {
        let mg = random_measured_graph(seed, 30).unwrap();
        let g = mg.graph.ground_state_graph(&vec![1.0; mg.len()]).unwrap();
        prop_assert_eq!(g.edges(), mg.graph.edges());
    }

    // bundle

    #[test]
    fn connections_are_isometries(seed in any::<u64>(), dim in 1usize..4) {
        let mg = random_measured_graph(seed, 20).unwrap();
        let bundle = random_bundle(&mg.graph, dim, seed).unwrap();
        let mut r = rng(seed);
        for p in bundle.connections().values() {
            let xi: Vec<C64> = (0..dim).map(|_| C64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0))).collect();
            let v = nalgebra::DVector::from_column_slice(&xi);
            let image = p * &v;
            prop_assert!((image.norm() - v.norm()).abs() <= 1e-10);
        }
    }

    #[test]
    fn scalar_bundle_w_min_is_potential(seed in any::<u64>()) {
        let mg = random_measured_graph(seed, 30).unwrap();
        let bundle = scalar_to_bundle(&mg.graph, &random_theta(&mg, seed), mg.potential()).unwrap();
        prop_assert_eq!(bundle.w_min().unwrap(), mg.potential().to_vec());
    }

    #[test]
    fn validation_is_idempotent(seed in any::<u64>(), dim in 1usize..4) {
        let mg = random_measured_graph(seed, 20).unwrap();
        let bundle = random_bundle(&mg.graph, dim, seed).unwrap();
        let before = bundle.clone();
        let first = validate_connection(&mg.graph, &bundle);
        let second = validate_connection(&mg.graph, &bundle);
        prop_assert!(first.is_empty());
        prop_assert_eq!(first, second);
        prop_assert_eq!(before.connections(), bundle.connections());
    }

    // operator-engine

    #[test]
    fn green_symmetry_and_form_consistency(seed in any::<u64>(), dim in 1usize..4) {
        let mg = random_measured_graph(seed, 30).unwrap();
        let bundle = random_bundle(&mg.graph, dim, seed).unwrap();
        let mut r = rng(seed);
        let phi = random_section(&bundle, &mut r);
        let f = random_section(&bundle, &mut r);
        let res = greens_residual(&mg, &bundle, &phi, &f).unwrap();
        let (mf, mphi) = (apply_m(&mg, &bundle, &f).unwrap(), apply_m(&mg, &bundle, &phi).unwrap());
        let scale = 1.0 + pairing(&mg, &Section::from_real(&phi.abs()), &Section::from_real(&mf.abs())).re
            + pairing(&mg, &Section::from_real(&mphi.abs()), &Section::from_real(&f.abs())).re;
        prop_assert!(res.symmetry_gap <= 1e-10 * scale);
        prop_assert!(res.form_gap <= 1e-10 * scale);

        let op = assemble(&mg, &bundle).unwrap();
        let q = form_qc(&mg, &bundle, &phi, &phi).unwrap().value;
        let weighted = pairing(&mg, &phi, &op.apply(&phi));
        prop_assert!((q - weighted).norm() <= 1e-10 * (1.0 + q.norm()));
    }

    #[test]
    fn kato_and_heart(seed in any::<u64>(), dim in 1usize..4) {
        let mg = random_measured_graph(seed, 30).unwrap();
        let bundle = random_bundle(&mg.graph, dim, seed).unwrap();
        let mut r = rng(seed);
        let f = random_section(&bundle, &mut r);
        let phi = aligned_section(&f, &mut r);
        prop_assert!(kato_gap(&mg, &bundle, &f, &phi).unwrap() >= -1e-9);
        prop_assert!(heart_residual(&mg, &bundle, &random_section(&bundle, &mut r)).unwrap() <= 1e-10);
    }

    #[test]
    fn scalar_b_function(seed in any::<u64>()) {
        let mg = random_measured_graph(seed, 30).unwrap();
        let bundle = scalar_to_bundle(&mg.graph, &random_theta(&mg, seed), mg.potential()).unwrap();
        let b = b_function(&mg, &bundle).unwrap();
        for x in 0..mg.len() {
            prop_assert_eq!(b[x], (mg.normalized_degree(x) + mg.potential()[x]).abs());
        }
    }

    #[test]
    fn eigenpairs_are_subsolutions(seed in any::<u64>(), dim in 1usize..3) {
        let mg = random_measured_graph(seed, 15).unwrap();
        let bundle = random_bundle(&mg.graph, dim, seed).unwrap();
        let op = assemble(&mg, &bundle).unwrap();
        for (lambda, f) in op.eigenpairs() {
            let excess = subsolution_excess(&mg, &bundle, &f, lambda).unwrap();
            prop_assert!(excess.iter().all(|&e| e <= 1e-8));
        }
    }

    // metric-engine

    #[test]
    fn path_metrics_are_metrics(seed in any::<u64>()) {
        let mg = random_measured_graph(seed, 20).unwrap();
        let sigma = huang_sigma(&mg).unwrap();
        let (rho, _) = path_metric(&mg.graph, &sigma).unwrap();
        prop_assert!(rho.axiom_violation() <= 1e-12);
        for (e, s) in mg.graph.edges().iter().zip(sigma.values()) {
            prop_assert!(rho.distance(e.u, e.v) <= s + 1e-12);
        }
        let table: Vec<Vec<f64>> = (0..mg.len()).map(|x| (0..mg.len()).map(|y| rho.distance(x, y)).collect()).collect();
        prop_assert!(PseudoMetric::table(table).unwrap().axiom_violation() <= 1e-12);
    }

    #[test]
    fn huang_is_strongly_intrinsic(seed in any::<u64>()) {
        let mg = random_measured_graph(seed, 30).unwrap();
        let sigma = huang_sigma(&mg).unwrap();
        let strong = strongly_intrinsic_slack(&mg, &sigma);
        prop_assert!(strong.iter().all(|&s| s >= -1e-12));
        let (rho, _) = path_metric(&mg.graph, &sigma).unwrap();
        let (slack, _) = intrinsic_slack(&mg, &rho);
        for x in 0..mg.len() {
            prop_assert!(slack[x] >= strong[x] - 1e-12);
        }
    }

    #[test]
    fn scaled_weights_can_break_strong_intrinsicness(seed in any::<u64>()) {
        let mg = random_measured_graph(seed, 20).unwrap();
        let sigma = EdgeLength::from_weights(&mg.graph).scaled(1e3);
        prop_assert!(strongly_intrinsic_slack(&mg, &sigma).iter().any(|&s| s < 0.0));
    }

    #[test]
    fn function_measure_mass_is_twice_energy(seed in any::<u64>()) {
        let mg = random_measured_graph(seed, 30).unwrap();
        let f = random_real(mg.len(), &mut rng(seed));
        let fm = intrinsic_from_function(&mg.graph, &f).unwrap();
        prop_assert!((fm.total_mass - fm.twice_energy).abs() <= 1e-10 * fm.total_mass.max(1e-300));
    }

    // form-lab

    #[test]
    fn resolvent_identity_and_continuity(seed in any::<u64>()) {
        let mg = nonneg(random_measured_graph(seed, 30).unwrap());
        let form = form_for(&mg, seed);
        let mut r = rng(seed);
        let f = random_real(form.len(), &mut r);
        let (a, b) = (r.random_range(0.05..5.0), r.random_range(0.05..5.0));
        let ga = form.resolvent(a, &f).unwrap();
        let gb = form.resolvent(b, &f).unwrap();
        let gbga = form.resolvent(b, &ga).unwrap();
        let scale = 1.0 + ga.iter().chain(&gb).fold(0.0f64, |m, v| m.max(v.abs()));
        for i in 0..f.len() {
            prop_assert!((ga[i] - gb[i] - (b - a) * gbga[i]).abs() <= 1e-10 * scale);
        }
        let mut prev = f64::INFINITY;
        for al in [10.0, 1e2, 1e3, 1e4] {
            let g = form.resolvent(al, &f).unwrap();
            let d: Vec<f64> = g.iter().zip(&f).map(|(x, y)| al * x - y).collect();
            let dist = form.inner(&d, &d).sqrt();
            prop_assert!(dist <= prev * (1.0 + 1e-12));
            prev = dist;
        }
    }

    #[test]
    fn approximating_forms_increase_to_the_form(seed in any::<u64>()) {
        let mg = nonneg(random_measured_graph(seed, 30).unwrap());
        let form = form_for(&mg, seed);
        let f = random_real(form.len(), &mut rng(seed));
        let q = form.energy(&f);
        let tol = 1e-10 * (q.abs() + form.inner(&f, &f));
        let mut prev = f64::NEG_INFINITY;
        for al in [0.1, 1.0, 10.0, 1e2, 1e3, 1e4] {
            let v = form.approximating_form(al, &f).unwrap();
            prop_assert!(v >= prev - tol && v <= q + tol);
            prev = v;
        }
        prop_assert!((prev - q).abs() <= 1e-2 * (1.0 + q.abs()));
    }

    #[test]
    fn nonnegative_potentials_give_markovian_resolvents(seed in any::<u64>()) {
        let mg = nonneg(random_measured_graph(seed, 20).unwrap());
        let rep = graphlap_core::form::beurling_deny_check(&form_for(&mg, seed), 5, seed).unwrap();
        prop_assert!(rep.positivity_preserving && rep.markovian);
    }

    #[test]
    fn capacity_routes_agree_and_sandwich_holds(seed in any::<u64>()) {
        let mg = nonneg(random_measured_graph(seed, 25).unwrap());
        let form = form_for(&mg, seed);
        let mut r = rng(seed);
        let g: Vec<f64> = (0..form.len()).map(|_| r.random_range(0.0..1.0)).collect();
        let h = auto_excessive(&form, &g).unwrap();
        let cert = excessive_check(&form, &h, &EXCESSIVE_BETAS).unwrap();
        prop_assert!(cert.is_valid());
        let target: Vec<usize> = form.subset().iter().copied().filter(|_| r.random_bool(0.4)).collect();
        let c = capacity(&form, &cert, &target).unwrap();
        let a = capacity_alt(&form, &cert, &target).unwrap();
        prop_assert!((c.value - a).abs() <= 1e-8 * (1.0 + c.value));
        prop_assert!(c.sandwich_ok);
    }

    #[test]
    fn boundary_capacities_do_not_increase(seed in any::<u64>()) {
        let mg = nonneg(random_measured_graph(seed, 30).unwrap());
        let form = FiniteForm::full(&mg).unwrap();
        let h = auto_excessive(&form, &vec![1.0; mg.len()]).unwrap();
        let ecc = mg.graph.bfs_distances(0).into_iter().flatten().max().unwrap();
        let radii: Vec<usize> = (0..=ecc).collect();
        let ex = Exhaustion::bfs_balls(&mg.graph, 0, &radii).unwrap();
        prop_assert!(boundary_capacity(&mg, &h, &ex).unwrap().nonincreasing);
    }

    #[test]
    fn min_max_energy_lemma(seed in any::<u64>()) {
        let mg = nonneg(random_measured_graph(seed, 30).unwrap());
        let form = form_for(&mg, seed);
        let mut r = rng(seed);
        let f = random_real(form.len(), &mut r);
        let g = random_real(form.len(), &mut r);
        let norm = |u: &[f64]| form.form_norm_sq(u).sqrt();
        let meet: Vec<f64> = f.iter().zip(&g).map(|(a, b)| a.min(*b)).collect();
        let join: Vec<f64> = f.iter().zip(&g).map(|(a, b)| a.max(*b)).collect();
        let bound = norm(&f) + norm(&g);
        prop_assert!(norm(&meet) <= bound + 1e-10);
        prop_assert!(norm(&join) <= bound + 1e-10);
    }

    #[test]
    fn positivity_lemma(seed in any::<u64>()) {
        let mg = nonneg(random_measured_graph(seed, 30).unwrap());
        let form = form_for(&mg, seed);
        let mut r = rng(seed);
        let f: Vec<f64> = (0..form.len()).map(|_| if r.random_bool(0.5) { r.random_range(0.0..3.0) } else { 0.0 }).collect();
        let g: Vec<f64> = f.iter().map(|&v| if v > 0.0 { 1.0 } else { r.random_range(0.0..=1.0) }).collect();
        prop_assert!(form.bilinear(&f, &g) >= -1e-10);
    }
}

#[test]
fn real_dot_matches_pairing() {
    let mg = random_measured_graph(3, 10).unwrap();
    let f = random_real(mg.len(), &mut rng(1));
    let weighted: Vec<f64> = f.iter().zip(mg.mu()).map(|(a, m)| a * m).collect();
    let p = pairing(&mg, &Section::from_real(&f), &Section::from_real(&f)).re;
    assert!((p - dot(&f, &weighted)).abs() < 1e-12);
}
