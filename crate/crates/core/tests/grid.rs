use isingsis_core::sampler::trial_rng;
use isingsis_core::{parse_table, t1, t2, u_prime_stat, u_stat, BinaryTable, PartialTable, Shape};
use proptest::prelude::*;
use rand::Rng;

/// Statistics from a plain four-fold loop over cell pairs and windows.
fn reference(t: &BinaryTable) -> (usize, usize, usize, usize) {
    let (m, n) = (t.rows(), t.cols());
    let mut ones = 0;
    let mut discord = 0;
    for r1 in 0..m {
        for c1 in 0..n {
            ones += t.get(r1, c1) as usize;
            for r2 in 0..m {
                for c2 in 0..n {
                    let adjacent = r1.abs_diff(r2) + c1.abs_diff(c2) == 1;
                    if adjacent && (r1, c1) < (r2, c2) && t.get(r1, c1) != t.get(r2, c2) {
                        discord += 1;
                    }
                }
            }
        }
    }
    let (mut u, mut up) = (0, 0);
    for r in 0..m.saturating_sub(1) {
        for c in 0..n.saturating_sub(1) {
            let w = [
                t.get(r, c),
                t.get(r, c + 1),
                t.get(r + 1, c),
                t.get(r + 1, c + 1),
            ];
            u += usize::from(w == [1, 0, 0, 1] || w == [0, 1, 1, 0]);
            up += usize::from(w == [0, 0, 1, 1]);
        }
    }
    (ones, discord, u, up)
}

fn column_scan_t2(t: &BinaryTable) -> usize {
    let mut d = 0;
    for c in 0..t.cols() {
        for r in 0..t.rows() {
            if r + 1 < t.rows() && t.get(r, c) != t.get(r + 1, c) {
                d += 1;
            }
            if c + 1 < t.cols() && t.get(r, c) != t.get(r, c + 1) {
                d += 1;
            }
        }
    }
    d
}

fn stats(t: &BinaryTable) -> (usize, usize, usize, usize) {
    (t1(t), t2(t), u_stat(t), u_prime_stat(t))
}

#[test]
fn statistics_match_reference_on_every_3x3_table() {
    let shape = Shape::new(3, 3);
    for x in 0u32..512 {
        let t = BinaryTable::from_cells(shape, (0..9).map(|i| (x >> i & 1) as u8).collect());
        assert_eq!(stats(&t), reference(&t), "{t}");
    }
}

#[test]
fn statistics_match_reference_on_random_4x4_tables() {
    let shape = Shape::new(4, 4);
    let mut rng = trial_rng(4, 4);
    for _ in 0..100_000 {
        let x: u32 = rng.gen_range(0..1 << 16);
        let t = BinaryTable::from_cells(shape, (0..16).map(|i| (x >> i & 1) as u8).collect());
        assert_eq!(stats(&t), reference(&t), "{t}");
    }
}

fn table() -> impl Strategy<Value = BinaryTable> {
    (1usize..8, 1usize..8).prop_flat_map(|(m, n)| {
        proptest::collection::vec(0u8..2, m * n)
            .prop_map(move |cells| BinaryTable::from_cells(Shape::new(m, n), cells))
    })
}

proptest! {
    #[test]
    fn t2_is_bounded_and_scan_order_free(t in table()) {
        prop_assert!(t2(&t) <= t.shape().edges());
        prop_assert_eq!(t2(&t), column_scan_t2(&t));
    }

    #[test]
    fn complement_symmetry(t in table()) {
        let c = t.complement();
        prop_assert_eq!(t2(&c), t2(&t));
        prop_assert_eq!(u_stat(&c), u_stat(&t));
        prop_assert_eq!(t1(&c), t.shape().cells() - t1(&t));
    }

    #[test]
    fn transpose_symmetry(t in table()) {
        let tr = t.transpose();
        prop_assert_eq!(u_stat(&tr), u_stat(&t));
        prop_assert_eq!(t2(&tr), t2(&t));
        prop_assert_eq!(tr.transpose(), t);
    }

    #[test]
    fn text_round_trip(t in table()) {
        prop_assert_eq!(parse_table(&t.to_string()).unwrap(), t);
    }

    #[test]
    fn partial_counts_track_the_prefix(t in table(), cut in 0usize..64) {
        let shape = t.shape();
        let k = cut % (shape.cells() + 1);
        let mut p = PartialTable::new(shape);
        for &v in &t.cells()[..k] {
            p.push(v);
        }
        prop_assert_eq!(&p, &PartialTable::from_prefix(shape, &t.cells()[..k]));
        prop_assert_eq!(p.next_index(), k);
        prop_assert_eq!(p.placed_ones(), t.cells()[..k].iter().filter(|&&v| v == 1).count());
        let mut discord = 0;
        let mut open = 0;
        let mut frontier = 0;
        for (a, b) in shape.edge_list() {
            match (a < k, b < k) {
                (true, true) => discord += usize::from(t.cells()[a] != t.cells()[b]),
                (true, false) => {
                    open += 1;
                    frontier += t.cells()[a] as usize;
                }
                _ => open += 1,
            }
        }
        prop_assert_eq!(p.discord(), discord);
        prop_assert_eq!(p.undetermined_edges(), open);
        prop_assert_eq!(p.frontier_ones(), frontier);
        prop_assert_eq!(p.is_complete(), k == shape.cells());
        if k == shape.cells() {
            prop_assert_eq!(p.to_table().unwrap(), t);
        }
    }
}
