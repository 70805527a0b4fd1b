use std::sync::Arc;

use proptest::prelude::*;
use torus_route::algorithms::generate;
use torus_route::metrics::{channel_loads, deviation};
use torus_route::oracle::compare_with_graph;
use torus_route::routes::{check_table, decode_rg_path, encode_rg_path, validate_route};
use torus_route::*;

fn dims_strategy(max_n: usize, max_d: usize) -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(2..=max_d, 1..=max_n)
}

/// A torus with at most one failed link, picked by index among existing links.
fn topology(dims: &[usize], fault: Option<(usize, usize)>) -> Arc<Topology> {
    let healthy = Topology::torus(dims).unwrap();
    let links = fault.map(|(node, pick)| {
        let u = NodeId((node % healthy.node_count()) as u32);
        let dirs: Vec<Direction> = Direction::all(dims.len())
            .filter(|&d| healthy.neighbor(u, d).is_some())
            .collect();
        (u, dirs[pick % dirs.len()])
    });
    Arc::new(Topology::new(dims, [], links).unwrap())
}

fn fast_options(seed: u64) -> Options {
    let mut opts = Options::default();
    opts.genetic.population = 16;
    opts.genetic.stagnation = 3;
    opts.genetic.seed = seed;
    opts
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn neighbor_round_trip(dims in dims_strategy(4, 5), node in any::<usize>(), dir in any::<usize>()) {
        let topo = Topology::torus(&dims).unwrap();
        let u = NodeId((node % topo.node_count()) as u32);
        let d = Direction::from_index(dir % (2 * dims.len()), dims.len());
        let v = topo.neighbor(u, d);
        prop_assume!(v.is_some());
        let v = v.unwrap();
        prop_assert_eq!(topo.neighbor(v, d.opposite()), Some(u));
        prop_assert_eq!(topo.torus_distance(u, v), Some(1));
    }

    #[test]
    fn random_graph_walks_decode_and_encode(
        dims in dims_strategy(3, 4),
        node in any::<usize>(),
        choices in prop::collection::vec(any::<usize>(), 24),
    ) {
        let topo = Arc::new(Topology::torus(&dims).unwrap());
        let p = Prepared::new(&topo).unwrap();
        let rg = &p.rg;
        let src = NodeId((node % topo.node_count()) as u32);
        let mut path = vec![rg.begin(src)];
        for c in &choices {
            let edges = rg.out_edges(*path.last().unwrap());
            if edges.is_empty() {
                break;
            }
            path.push(edges[c % edges.len()].to);
            if rg.is_end(*path.last().unwrap()) {
                break;
            }
        }
        let last = *path.last().unwrap();
        prop_assume!(rg.is_end(last) && rg.node_of(last) != src);
        let route = decode_rg_path(rg, &path).unwrap();
        prop_assert!(validate_route(&topo, &route, p.added()).is_ok());
        prop_assert_eq!(encode_rg_path(rg, &route).unwrap(), path);
    }

    #[test]
    fn augmented_cdg_is_deadlock_free(
        dims in dims_strategy(4, 4),
        fault in prop::option::of((any::<usize>(), any::<usize>())),
    ) {
        let topo = topology(&dims, fault);
        let p = Prepared::new(&topo).unwrap();
        prop_assert!(p.cdg.assert_deadlock_free().is_ok());
        for &e in p.added() {
            prop_assert!(p.cdg.admissible(e) || p.cdg.has_edge(e));
        }
    }

    #[test]
    fn uniform_loads_have_zero_deviation(load in 0u32..1000, count in 1usize..200, k in 1u32..6) {
        let loads = vec![load; count];
        prop_assert_eq!(deviation(&loads, load as f64, k).unwrap(), 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn generated_tables_are_sound(
        dims in dims_strategy(3, 4),
        fault in prop::option::of((any::<usize>(), any::<usize>())),
        seed in any::<u64>(),
    ) {
        let topo = topology(&dims, fault);
        let p = Prepared::new(&topo).unwrap();
        let opts = fast_options(seed);
        for algo in Algorithm::ALL {
            let g = match generate(algo, &p.rg, &opts) {
                Err(Error::Unroutable(_)) => return Ok(()),
                other => other.unwrap(),
            };
            let check = check_table(&g.table, &p.rg);
            prop_assert!(check.passed(), "{algo} on {dims:?}: {check:?}");
            let loads = channel_loads(&g.table).unwrap();
            prop_assert_eq!(&loads[..], g.weights.as_slice());
            let total: u64 = loads.iter().map(|&l| u64::from(l)).sum();
            let lengths: u64 = g.table.iter().map(|r| r.len() as u64).sum();
            prop_assert_eq!(total, lengths);
            let again = generate(algo, &p.rg, &opts).unwrap();
            prop_assert_eq!(again.table.to_text(), g.table.to_text());
        }
    }

    #[test]
    fn oracle_agrees_with_graph_under_faults(
        dims in dims_strategy(2, 4),
        fault in (any::<usize>(), any::<usize>()),
    ) {
        let topo = topology(&dims, Some(fault));
        let p = Prepared::new(&topo).unwrap();
        let report = compare_with_graph(&p.rg, &RuleConfig::augmented(p.added())).unwrap();
        prop_assert!(report.is_clean(), "{dims:?} {fault:?}: {report:?}");
    }
}
