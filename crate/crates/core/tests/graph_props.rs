use proptest::prelude::*;

use coopbandit::graph::{
    exact_small, generate, greedy_clique_cover, greedy_dominating_set, is_clique_partition, is_dominating_set,
    turan_alpha_star, Graph, GraphSpec,
};

fn connected_graph() -> impl Strategy<Value = Graph> {
    (2usize..=10, 0.2f64..1.0, any::<u64>(), any::<bool>()).prop_map(|(n, p, seed, tree)| {
        let spec = if tree { GraphSpec::RandomTree { n } } else { GraphSpec::ErdosRenyi { n, p } };
        generate(&spec, seed).unwrap()
    })
}

fn larger_graph() -> impl Strategy<Value = Graph> {
    (10usize..=40, 0.25f64..0.7, any::<u64>())
        .prop_map(|(n, p, seed)| generate(&GraphSpec::ErdosRenyi { n, p }, seed).unwrap())
}

proptest! {
    #[test]
    fn greedy_outputs_valid_and_no_smaller_than_exact(g in connected_graph()) {
        let cover = greedy_clique_cover(&g);
        let dom = greedy_dominating_set(&g);
        prop_assert!(is_clique_partition(&g, &cover));
        prop_assert!(is_dominating_set(&g, &dom));
        let ex = exact_small(&g).unwrap();
        prop_assert!(cover.len() >= ex.chi_bar);
        prop_assert!(dom.len() >= ex.psi);
        prop_assert!(ex.psi <= ex.alpha && ex.alpha <= ex.chi_bar);
        prop_assert!(turan_alpha_star(&g) <= num_rational::Ratio::from_integer(ex.alpha as u64));
    }

    #[test]
    fn greedy_valid_on_larger_graphs(g in larger_graph()) {
        prop_assert!(g.is_connected());
        prop_assert!(is_clique_partition(&g, &greedy_clique_cover(&g)));
        prop_assert!(is_dominating_set(&g, &greedy_dominating_set(&g)));
    }

    #[test]
    fn distances_form_a_metric(g in larger_graph()) {
        let d = g.distances().unwrap();
        let n = g.n();
        for i in 0..n {
            prop_assert_eq!(d.get(i, i), 0);
            for j in 0..n {
                prop_assert_eq!(d.get(i, j), d.get(j, i));
                prop_assert_eq!(d.get(i, j) == 1, g.has_edge(i, j));
                for k in 0..n {
                    prop_assert!(d.get(i, k) <= d.get(i, j) + d.get(j, k));
                }
            }
        }
    }

    #[test]
    fn power_links_exactly_the_gamma_ball(g in larger_graph(), gamma in 1u32..5) {
        let d = g.distances().unwrap();
        let p = g.power(gamma);
        for i in 0..g.n() {
            for j in 0..g.n() {
                if i != j {
                    prop_assert_eq!(p.has_edge(i, j), d.get(i, j) <= gamma);
                }
            }
        }
        prop_assert!(g.power(g.diameter().unwrap()).is_complete());
    }

    #[test]
    fn truncated_bfs_agrees_with_distances(g in larger_graph(), src in 0usize..10, depth in 0u32..4) {
        let d = g.distances().unwrap();
        for (v, got) in g.bfs(src, Some(depth)).into_iter().enumerate() {
            let want = d.get(src, v);
            prop_assert_eq!(got, (want <= depth).then_some(want));
        }
    }
}

#[test]
fn named_families_have_expected_shape() {
    let star = generate(&"star(9)".parse().unwrap(), 0).unwrap();
    assert_eq!((star.n(), star.edge_count(), greedy_dominating_set(&star).len()), (9, 8, 1));
    let ms = generate(&"multi_star(5,9)".parse().unwrap(), 0).unwrap();
    assert_eq!(ms.n(), 50);
    assert_eq!(greedy_dominating_set(&ms).len(), 5);
    let cyc = generate(&"cycle(7)".parse().unwrap(), 0).unwrap();
    assert!(cyc.degrees().iter().all(|&d| d == 2));
    assert_eq!(cyc.diameter().unwrap(), 3);
    let tree = generate(&"random_tree(30)".parse().unwrap(), 5).unwrap();
    assert_eq!(tree.edge_count(), 29);
    assert!(tree.is_connected());
}
