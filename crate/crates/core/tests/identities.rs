use kemeny_core::centrality::{Analyzer, PairSet};
use kemeny_core::generators;
use kemeny_core::linkpred::{score_non_edges, Measure, DEFAULT_ALPHA_C};
use kemeny_core::onepath::{unit_path_mu, OnePathSpec};
use kemeny_core::oracle;
use kemeny_core::sensitivity::{global_sensitivity, sensitivity_curve, Family};
use kemeny_core::solver::SolverOptions;
use kemeny_core::{NodePermutation, WeightedGraph};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

fn analyzer(g: &WeightedGraph) -> Analyzer {
    Analyzer::new(g, SolverOptions::banded()).unwrap()
}

#[test]
fn star_zeta_values() {
    let golden = [
        (10, 0.805),
        (20, 0.90125),
        (30, 0.9338888888888891),
        (40, 0.9503125),
        (50, 0.9602),
        (60, 0.9668055555555559),
        (70, 0.9715306122448967),
        (80, 0.9750781249999987),
        (90, 0.9778395061728394),
        (100, 0.98005),
    ];
    let ns: Vec<usize> = golden.iter().map(|g| g.0).collect();
    let pts = sensitivity_curve(Family::Star, &ns, SolverOptions::default()).unwrap();
    for (pt, (n, z)) in pts.iter().zip(golden) {
        assert_eq!(pt.n, n);
        assert!(close(pt.zeta, z, 1e-10), "star {n}: {} vs {z}", pt.zeta);
        assert!(close(pt.zeta_pair_mean, 2.0 * z, 1e-10));
    }
}

#[test]
fn path_and_cycle_zeta_values() {
    for (family, n, z) in [
        (Family::Path, 10, 18.351666666666667),
        (Family::Path, 20, 161.105),
        (Family::Cycle, 10, 3.0525),
        (Family::Cycle, 20, 22.77625),
    ] {
        let g = family.build(n).unwrap();
        let r = global_sensitivity(&analyzer(&g)).unwrap();
        assert!(
            close(r.zeta_formula, z, 1e-10),
            "{} {n}: {}",
            family.name(),
            r.zeta_formula
        );
        let dense = oracle::DenseSpectralData::new(&g)
            .unwrap()
            .global_sensitivity();
        assert!(close(dense, z, 1e-10));
    }
}

#[test]
fn cycle_mu_bar_depends_on_offset() {
    let an = analyzer(&generators::cycle(10));
    let want = [1.65, 4.8, 8.05, 10.4, 11.25];
    for p in 0..10 {
        for q in p + 1..10 {
            let offset = (q - p).min(10 - (q - p));
            let got = an.analyze_pair(p, q).unwrap().mu_bar();
            assert!(close(got, want[offset - 1], 1e-12), "({p}, {q}): {got}");
        }
    }
}

#[test]
fn star_mu_bar_has_two_values() {
    let an = analyzer(&generators::star(10));
    for pa in an.batch_pairs(true).unwrap() {
        let want = if pa.is_edge() {
            0.9444444444444453
        } else {
            2.0
        };
        assert!(close(pa.mu_bar(), want, 1e-12));
    }
}

#[test]
fn derivatives_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let g = generators::random_connected(&mut rng, 15, 0.3, true);
    let an = analyzer(&g);
    let kappa0 = an.kemeny();
    let h = 1e-5;
    for pa in an.batch_edges().unwrap() {
        for weighted in [false, true] {
            let curve = pa.curve(kappa0, weighted);
            let t = 0.2 * curve.pole().unwrap().min(1.0);
            for order in 1..=3 {
                let fd = (curve.derivative(t + h, order - 1).unwrap()
                    - curve.derivative(t - h, order - 1).unwrap())
                    / (2.0 * h);
                let exact = curve.derivative(t, order).unwrap();
                assert!(close(fd, exact, 1e-5), "order {order}: {fd} vs {exact}");
            }
            assert!(close(
                pa.mu_derivative(1, weighted).unwrap(),
                curve.derivative(0.0, 1).unwrap(),
                1e-14
            ));
        }
    }
}

#[test]
fn removal_measure_matches_deletion() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let g = generators::random_connected(&mut rng, 14, 0.35, true);
    let an = analyzer(&g);
    let kappa0 = an.kemeny();
    for pa in an.batch_edges().unwrap() {
        let c = pa.removal_measure().unwrap();
        if pa.is_bridge {
            assert!(!c.is_finite());
            continue;
        }
        let rest = g
            .edges()
            .filter(|&(u, v, _)| (u.min(v), u.max(v)) != (pa.p, pa.q));
        let h = WeightedGraph::from_edges(g.node_count(), rest).unwrap();
        // Deleting the edge moves its weight onto the two loops.
        let mut with_loops: Vec<_> = h.edges().collect();
        with_loops.push((pa.p, pa.p, pa.a));
        with_loops.push((pa.q, pa.q, pa.a));
        let h = WeightedGraph::from_edges(g.node_count(), with_loops).unwrap();
        let direct = oracle::kemeny_via_s(&h).unwrap() - kappa0;
        assert!(close(c.finite().unwrap(), direct, 1e-9));
    }
}

#[test]
fn regularized_measures_converge() {
    let g = generators::grid(4, 5);
    let an = analyzer(&g);
    for pa in an.batch_edges().unwrap() {
        let c = pa.removal_measure().unwrap().finite().unwrap();
        let gap = |r: f64| {
            let reg = an.regularized(pa.p, pa.q, r).unwrap();
            assert!(reg.mu_r < pa.mu());
            ((pa.mu() - reg.mu_r).abs(), (c - reg.c_r.unwrap()).abs())
        };
        let (mu1, c1) = gap(1e-3);
        let (mu2, c2) = gap(1e-4);
        // Both errors shrink linearly in r.
        assert!(mu2 < 0.2 * mu1 && c2 < 0.2 * c1);
    }
}

#[test]
fn cut_edge_limit_matches_shifted_gap() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..5 {
        let n = rng.random_range(4..12);
        let g = generators::random_tree(&mut rng, n, true);
        let an = analyzer(&g);
        for pa in an.batch_edges().unwrap() {
            let limit = an.filtered_cf_limit(pa.p, pa.q).unwrap();
            let r = 1e-6;
            let gap = 1.0 / r - an.regularized(pa.p, pa.q, r).unwrap().c_r.unwrap();
            assert!(close(gap, limit, 1e-3), "{gap} vs {limit}");
        }
    }
    let k2 = analyzer(&generators::path(2));
    assert!(close(k2.filtered_cf_limit(0, 1).unwrap(), 0.5, 1e-14));
    assert!(k2.filtered_cf(0, 1).is_ok());
    assert!(analyzer(&generators::cycle(5)).filtered_cf(0, 1).is_err());
}

#[test]
fn onepath_matches_pipeline() {
    let weights: Vec<f64> = (0..12)
        .map(|i| if i % 2 == 0 { 2.0 } else { 1.0 })
        .collect();
    let g = generators::weighted_path(&weights);
    let spec = OnePathSpec::from_graph(&g).unwrap();
    let an = analyzer(&g);
    assert!(close(spec.kemeny(), an.kemeny(), 1e-12));
    for pa in an.batch_edges().unwrap() {
        assert!(close(spec.mu(pa.q).unwrap(), pa.mu(), 1e-10));
    }
}

#[test]
fn unit_path_parabola_peaks_in_the_middle() {
    for n in [7, 10, 31] {
        let spec = OnePathSpec::unit_path(n).unwrap();
        let mu = spec.mu_all();
        for (k, m) in mu.iter().enumerate() {
            assert!(close(*m, unit_path_mu(n, k + 1), 1e-12));
        }
        let top = mu.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let argmax: Vec<usize> = (1..n).filter(|&q| mu[q - 1] == top).collect();
        let mid = n / 2;
        assert!(argmax.iter().all(|&q| q == mid || q == n - mid));
    }
}

#[test]
fn onepath_kemeny_matches_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for _ in 0..20 {
        let n = rng.random_range(3..30);
        let lambda: Vec<f64> = (0..n - 1).map(|_| rng.random_range(0.05..0.6)).collect();
        let nu: Vec<f64> = (0..n - 1).map(|_| rng.random_range(0.05..0.4)).collect();
        let spec = OnePathSpec::new(lambda, nu).unwrap();
        let g = spec.to_graph().unwrap();
        assert!(close(
            spec.kemeny(),
            oracle::kemeny_via_eigs(&g).unwrap(),
            1e-9
        ));
    }
}

#[test]
fn link_scores_follow_relabelling() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let g = generators::random_connected(&mut rng, 16, 0.2, false);
    let mut forward: Vec<usize> = (0..16).collect();
    forward.shuffle(&mut rng);
    let perm = NodePermutation::from_forward(forward).unwrap();
    let h = g.permute(&perm);
    let (a, b) = (analyzer(&g), analyzer(&h));
    for m in Measure::all(DEFAULT_ALPHA_C) {
        let ta = score_non_edges(&a, m).unwrap();
        let tb = score_non_edges(&b, m).unwrap();
        assert_eq!(ta.len(), tb.len());
        for e in &ta.entries {
            let (p, q) = (perm.new_index(e.p), perm.new_index(e.q));
            let other = tb
                .entries
                .iter()
                .find(|f| (f.p, f.q) == (p.min(q), p.max(q)))
                .unwrap();
            assert!(close(e.score, other.score, 1e-10), "{}", m.id());
        }
    }
    assert_eq!(
        a.pairs(PairSet::NonEdges).len(),
        score_non_edges(&a, Measure::Jaccard).unwrap().len()
    );
}
