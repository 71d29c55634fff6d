use dproute_core::{EnumerationLimits, Path, WeightedGraph};
use proptest::prelude::*;

/// Random connected graph: a random spanning tree plus extra edges.
fn connected_graph(max_nodes: usize) -> impl Strategy<Value = WeightedGraph> {
    (2..=max_nodes)
        .prop_flat_map(|n| {
            let parents: Vec<_> = (1..n).map(|i| 0..i).collect();
            let extra = prop::collection::vec((0..n, 0..n), 0..2 * n);
            let weights = prop::collection::vec(0.0..10.0f64, n * n);
            (Just(n), parents, extra, weights)
        })
        .prop_map(|(n, parents, extra, weights)| {
            let mut pairs: Vec<(usize, usize)> = parents
                .into_iter()
                .enumerate()
                .map(|(i, p)| (p, i + 1))
                .collect();
            pairs.extend(extra.into_iter().filter(|(a, b)| a != b));
            let mut seen = std::collections::BTreeSet::new();
            let edges: Vec<_> = pairs
                .into_iter()
                .filter(|&(a, b)| seen.insert((a.min(b), a.max(b))))
                .enumerate()
                .map(|(k, (a, b))| (a, b, weights[k % weights.len()]))
                .collect();
            WeightedGraph::new(n, edges).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn dijkstra_matches_brute_force(g in connected_graph(8)) {
        let n = g.node_count();
        for s in 0..n {
            let tree = g.shortest_path_tree(s).unwrap();
            for t in (0..n).filter(|&t| t != s) {
                let all = g.enumerate_paths(s, t, EnumerationLimits { max_paths: 1_000_000, max_hops: usize::MAX }).unwrap();
                prop_assert!(all.is_complete());
                let brute = all
                    .paths
                    .iter()
                    .map(|p| g.path_weight(p).unwrap())
                    .fold(f64::INFINITY, f64::min);
                let got = tree.distance(t).unwrap();
                prop_assert!((got - brute).abs() <= 1e-9, "{s}->{t}: {got} vs {brute}");
                let path = tree.path_to(t).unwrap();
                prop_assert!((g.path_weight(&path).unwrap() - got).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn sym_diff_is_symmetric_and_bounded(g in connected_graph(7), s in 0usize..7, t in 0usize..7) {
        let n = g.node_count();
        let (s, t) = (s % n, t % n);
        prop_assume!(s != t);
        let ens = g.enumerate_paths(s, t, EnumerationLimits::default()).unwrap();
        for a in ens.paths.iter().take(12) {
            prop_assert_eq!(a.sym_diff_size(a), 0);
            for b in ens.paths.iter().take(12) {
                let d = a.sym_diff_size(b);
                prop_assert_eq!(d, b.sym_diff_size(a));
                prop_assert!(d <= a.edge_count() + b.edge_count());
                prop_assert_eq!(d == 0, a == b);
            }
        }
    }

    #[test]
    fn paths_are_simple_and_ordered(g in connected_graph(7)) {
        let n = g.node_count();
        let ens = g.enumerate_paths(0, n - 1, EnumerationLimits::default()).unwrap();
        prop_assert!(!ens.is_empty());
        for w in ens.paths.windows(2) {
            prop_assert!(w[0].nodes() < w[1].nodes());
        }
        for p in &ens.paths {
            let mut nodes = p.nodes().to_vec();
            nodes.sort_unstable();
            nodes.dedup();
            prop_assert_eq!(nodes.len(), p.nodes().len());
            prop_assert!(g.path_weight(p).is_ok());
        }
    }

    #[test]
    fn text_format_round_trips(g in connected_graph(10)) {
        let text = g.to_text();
        let back = WeightedGraph::from_text(&text).unwrap();
        prop_assert_eq!(&back, &g);
        prop_assert_eq!(back.to_text(), text);
    }

    #[test]
    fn shortest_path_is_deterministic(g in connected_graph(10)) {
        let n = g.node_count();
        let a = g.shortest_path(0, n - 1).unwrap();
        let b = g.clone().shortest_path(0, n - 1).unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn reversed_path_has_same_weight() {
    let g = WeightedGraph::new(4, [(0, 1, 0.5), (1, 2, 1.5), (2, 3, 2.0)]).unwrap();
    let p = Path::new(vec![0, 1, 2, 3]).unwrap();
    assert_eq!(
        g.path_weight(&p).unwrap(),
        g.path_weight(&p.reversed()).unwrap()
    );
    assert_eq!(p.sym_diff_size(&p.reversed()), 0);
}
