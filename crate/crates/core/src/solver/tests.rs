use alloc::vec;
use alloc::vec::Vec;

use proptest::prelude::*;

use super::*;
use crate::tileset::{canonical_sub_complete, carcassonne, Axis, EdgeSet, Tile};

fn tiles_of(ts: &Tileset, edges: &[[u16; 4]]) -> Vec<TileId> {
    edges.iter().map(|&[n, s, w, e]| ts.find(n, s, w, e).unwrap()).collect()
}

fn small_tileset(edges: &[[u16; 4]], k: usize) -> Tileset {
    let names: Vec<alloc::string::String> = (0..k).map(|i| alloc::format!("e{i}")).collect();
    let ens = EdgeSet::new(Axis::NorthSouth, names.iter().cloned()).unwrap();
    let ewe = EdgeSet::new(Axis::WestEast, names).unwrap();
    Tileset::new("small", ens, ewe, edges.iter().map(|&[n, s, w, e]| Tile::new(n, s, w, e)).collect()).unwrap()
}

/// Arc consistency by definition: drop a neighbour tile while some adjacent
/// cell offers no candidate with the matching edge, until nothing changes.
fn naive_arc_consistency(ts: &Tileset, width: usize, height: usize, domains: &mut [Vec<TileId>]) {
    loop {
        let mut changed = false;
        for cell in 0..width * height {
            let (r, c) = (cell / width, cell % width);
            let neighbours = [
                (r > 0).then(|| (cell - width, 0)),
                (r + 1 < height).then(|| (cell + width, 1)),
                (c > 0).then(|| (cell - 1, 2)),
                (c + 1 < width).then(|| (cell + 1, 3)),
            ];
            for (nb, dir) in neighbours.into_iter().flatten() {
                let source = domains[cell].clone();
                let before = domains[nb].len();
                domains[nb].retain(|&t| {
                    let t = ts.tile(t);
                    source.iter().any(|&u| {
                        let u = ts.tile(u);
                        match dir {
                            0 => u.n == t.s,
                            1 => u.s == t.n,
                            2 => u.w == t.e,
                            _ => u.e == t.w,
                        }
                    })
                });
                changed |= domains[nb].len() != before;
            }
        }
        if !changed {
            return;
        }
    }
}

/// Tries all `d^(w*h)` assignments, each checked with `Tiling::verify`.
fn brute_force_satisfiable(ts: &Tileset, width: usize, height: usize) -> bool {
    let d = ts.len();
    let cells = width * height;
    let mut assign = vec![0usize; cells];
    loop {
        let t = Tiling {
            width,
            height,
            cells: assign.iter().map(|&i| TileId(i as u32)).collect(),
            tileset_hash: Default::default(),
            seed: 0,
        };
        if t.verify(ts).is_ok() {
            return true;
        }
        let mut i = 0;
        loop {
            if i == cells {
                return false;
            }
            assign[i] += 1;
            if assign[i] < d {
                break;
            }
            assign[i] = 0;
            i += 1;
        }
    }
}

#[test]
fn new_wave_examples() {
    let ts = carcassonne();
    let rules = Rules::new(&ts);
    let wave = Wave::new(3, 2, &rules).unwrap();
    for r in 1..=2 {
        for c in 1..=3 {
            assert_eq!(wave.domain_len(CellPos::new(r, c)), 28);
        }
    }
    let wave = Wave::new(1, 1, &rules).unwrap();
    assert_eq!(wave.domain(CellPos::new(1, 1)).len(), 28);
    assert_eq!(Wave::new(0, 5, &rules).unwrap_err(), SolveError::EmptyGrid { width: 0, height: 5 });
}

#[test]
fn domains_span_multiple_words() {
    let ts = canonical_sub_complete(9, 0, 0).unwrap(); // 81 tiles
    let rules = Rules::new(&ts);
    let wave = Wave::new(2, 2, &rules).unwrap();
    assert_eq!(wave.domain_len(CellPos::new(2, 2)), 81);
    assert_eq!(wave.domain(CellPos::new(1, 1)).last(), Some(&TileId(80)));
}

#[test]
fn empty_boundary_is_identity() {
    let ts = carcassonne();
    let rules = Rules::new(&ts);
    let mut wave = Wave::new(3, 3, &rules).unwrap();
    let before = wave.snapshot();
    wave.apply_boundary(&BoundarySpec::none()).unwrap();
    assert_eq!(wave.snapshot(), before);
}

#[test]
fn boundary_pins_interior_corner() {
    let ts = canonical_sub_complete(2, 0, 0).unwrap();
    let rules = Rules::new(&ts);
    let zero = ts.find(0, 0, 0, 0).unwrap();
    let mut wave = Wave::new(2, 2, &rules).unwrap();
    wave.apply_boundary(&BoundarySpec { north_row: Some(vec![zero, zero]), west_col: Some(vec![zero, zero]) }).unwrap();
    // n must equal s(1,2) = 0 and w must equal e(2,1) = 0
    let expected: Vec<TileId> = ts.ids().filter(|&t| ts.tile(t).n.0 == 0 && ts.tile(t).w.0 == 0).collect();
    assert_eq!(wave.domain(CellPos::new(2, 2)), expected);
    assert_eq!(expected, vec![zero]);
}

#[test]
fn boundary_errors() {
    let ts = canonical_sub_complete(2, 0, 0).unwrap();
    let rules = Rules::new(&ts);
    let mut wave = Wave::new(2, 2, &rules).unwrap();
    let corner =
        BoundarySpec { north_row: Some(vec![TileId(0), TileId(1)]), west_col: Some(vec![TileId(2), TileId(0)]) };
    assert_eq!(wave.apply_boundary(&corner), Err(BoundaryError::CornerConflict { north: TileId(0), west: TileId(2) }));
    let short = BoundarySpec { north_row: Some(vec![TileId(0)]), west_col: None };
    assert_eq!(wave.apply_boundary(&short), Err(BoundaryError::NorthLength { expected: 2, got: 1 }));
    let unknown = BoundarySpec { north_row: None, west_col: Some(vec![TileId(0), TileId(9)]) };
    assert_eq!(wave.apply_boundary(&unknown), Err(BoundaryError::UnknownTile(TileId(9))));
    // (0,0,0,0) then (1,1,1,1) along the north row: e=0 meets w=1
    let clash = BoundarySpec { north_row: Some(vec![TileId(0), TileId(3)]), west_col: None };
    assert!(matches!(wave.apply_boundary(&clash), Err(BoundaryError::Contradiction(_))));
}

#[test]
fn observe_examples() {
    let ts = carcassonne();
    let rules = Rules::new(&ts);
    let mut wave = Wave::new(4, 3, &rules).unwrap();
    let five: Vec<TileId> = (0..5).map(TileId).collect();
    for r in 1..=3 {
        for c in 1..=4 {
            wave.force_domain(CellPos::new(r, c), &five);
        }
    }
    wave.force_domain(CellPos::new(2, 3), &[TileId(0), TileId(1)]);
    assert_eq!(wave.observe(), Some(CellPos::new(2, 3)));

    for r in 1..=3 {
        for c in 1..=4 {
            wave.force_domain(CellPos::new(r, c), &[TileId(0)]);
        }
    }
    assert_eq!(wave.observe(), None);
    wave.force_domain(CellPos::new(2, 1), &[TileId(3), TileId(4), TileId(5)]);
    wave.force_domain(CellPos::new(1, 4), &[TileId(0), TileId(1), TileId(2)]);
    assert_eq!(wave.observe(), Some(CellPos::new(1, 4)));
}

#[test]
fn collapse_singleton_and_determinism() {
    let ts = carcassonne();
    let rules = Rules::new(&ts);
    let mut wave = Wave::new(2, 2, &rules).unwrap();
    wave.force_domain(CellPos::new(1, 1), &[TileId(7)]);
    let mut rng = crate::rng::seeded(0);
    assert_eq!(wave.collapse(CellPos::new(1, 1), &mut rng), Ok(TileId(7)));

    let pick = |seed| {
        let mut w = Wave::new(2, 2, &rules).unwrap();
        w.collapse(CellPos::new(2, 2), &mut crate::rng::seeded(seed)).unwrap()
    };
    assert_eq!(pick(42), pick(42));
}

#[test]
fn collapse_samples_by_weight() {
    let ens = EdgeSet::new(Axis::NorthSouth, ["x"]).unwrap();
    let ewe = EdgeSet::new(Axis::WestEast, ["x"]).unwrap();
    let ts = Tileset::new(
        "w",
        ens,
        ewe,
        vec![Tile::new(0, 0, 0, 0).with_tags(["a"]), Tile::new(0, 0, 0, 0).with_weight(3.0).with_tags(["b"])],
    )
    .unwrap();
    let rules = Rules::new(&ts);
    let mut rng = crate::rng::seeded(2024);
    let trials = 10_000;
    let mut hits = 0;
    for _ in 0..trials {
        let mut wave = Wave::new(1, 1, &rules).unwrap();
        if wave.collapse(CellPos::new(1, 1), &mut rng).unwrap() == TileId(1) {
            hits += 1;
        }
    }
    let freq = hits as f64 / trials as f64;
    assert!((freq - 0.75).abs() <= 0.02, "frequency {freq}");
}

#[test]
fn propagate_example_on_canonical_k2() {
    let ts = canonical_sub_complete(2, 0, 0).unwrap();
    let rules = Rules::new(&ts);
    let mut wave = Wave::new(2, 2, &rules).unwrap();
    let t = tiles_of(&ts, &[[0, 1, 1, 0]]);
    wave.force_domain(CellPos::new(1, 1), &t);
    wave.propagate(CellPos::new(1, 1)).unwrap();
    assert_eq!(wave.domain(CellPos::new(1, 2)), tiles_of(&ts, &[[0, 0, 0, 0], [1, 0, 0, 1]]));
    assert_eq!(wave.domain(CellPos::new(2, 1)), tiles_of(&ts, &[[1, 0, 0, 1], [1, 1, 1, 1]]));
    assert_eq!(wave.domain(CellPos::new(2, 2)), tiles_of(&ts, &[[0, 1, 1, 0]]));

    // already consistent: nothing moves
    let before = wave.snapshot();
    wave.propagate(CellPos::new(2, 2)).unwrap();
    assert_eq!(wave.snapshot(), before);
}

#[test]
fn propagate_reports_contradiction() {
    let ts = small_tileset(&[[0, 0, 0, 0], [0, 0, 0, 1]], 2);
    let rules = Rules::new(&ts);
    let mut wave = Wave::new(2, 1, &rules).unwrap();
    wave.force_domain(CellPos::new(1, 1), &[TileId(1)]);
    wave.force_domain(CellPos::new(1, 2), &[TileId(0)]);
    assert_eq!(wave.propagate(CellPos::new(1, 1)), Err(Contradiction { cell: CellPos::new(1, 2) }));
}

#[test]
fn solve_single_cell() {
    let ts = carcassonne();
    let out = solve(&ts, 1, 1, &BoundarySpec::none(), &WeightField::neutral(), 3, DEFAULT_BUDGET).unwrap();
    let t = out.tiling().unwrap();
    assert_eq!(t.cells.len(), 1);
    assert!(t.cells[0].0 < 28);
    assert!(t.verify(&ts).is_ok());
}

#[test]
fn solve_two_by_two_with_boundary_has_unique_completion() {
    let ts = canonical_sub_complete(2, 0, 0).unwrap();
    for north in ts.ids() {
        for east in ts.ids() {
            for south in ts.ids() {
                // boundary must itself be edge-consistent
                let (tn, te, ts_) = (ts.tile(north), ts.tile(east), ts.tile(south));
                if tn.e != te.w || tn.s != ts_.n {
                    continue;
                }
                let boundary = BoundarySpec { north_row: Some(vec![north, east]), west_col: Some(vec![north, south]) };
                let completions: Vec<TileId> = ts
                    .ids()
                    .filter(|&x| {
                        let t = Tiling {
                            width: 2,
                            height: 2,
                            cells: vec![north, east, south, x],
                            tileset_hash: Default::default(),
                            seed: 0,
                        };
                        t.verify(&ts).is_ok()
                    })
                    .collect();
                assert_eq!(completions.len(), 1);
                let out = solve(&ts, 2, 2, &boundary, &WeightField::neutral(), 5, DEFAULT_BUDGET).unwrap();
                let t = out.tiling().unwrap();
                assert_eq!(t.get(2, 2), completions[0]);
                let tile = ts.tile(completions[0]);
                // (i, j, j, i): n = s of the tile above, w = e of the tile to the left
                assert_eq!((tile.n, tile.w), (te.s, ts_.e));
                assert_eq!((tile.s, tile.e), (tile.w, tile.n));
            }
        }
    }
}

#[test]
fn solve_errors() {
    let ts = carcassonne();
    assert!(matches!(
        solve(&ts, 0, 3, &BoundarySpec::none(), &WeightField::neutral(), 0, 10),
        Err(SolveError::EmptyGrid { .. })
    ));
    let bad = BoundarySpec { north_row: Some(vec![TileId(0); 2]), west_col: None };
    assert!(matches!(
        solve(&ts, 3, 3, &bad, &WeightField::neutral(), 0, 10),
        Err(SolveError::Boundary(BoundaryError::NorthLength { .. }))
    ));
}

#[test]
fn unsat_and_budget_outcomes() {
    // only tile (0,1,0,0): vertical neighbours can never match
    let ts = small_tileset(&[[0, 1, 0, 0]], 2);
    let out = solve(&ts, 1, 2, &BoundarySpec::none(), &WeightField::neutral(), 0, DEFAULT_BUDGET).unwrap();
    assert!(matches!(out, SolveOutcome::Unsat(_)));

    let ts = carcassonne();
    let out = solve(&ts, 8, 8, &BoundarySpec::none(), &WeightField::neutral(), 0, 3).unwrap();
    assert!(matches!(out, SolveOutcome::BudgetExceeded(_)));
}

#[test]
fn unsat_requires_backtracking_to_prove() {
    // a 2x2 grid where every single-cell choice looks fine but no full
    // tiling exists
    let ts = small_tileset(&[[0, 1, 0, 1], [1, 0, 1, 0], [0, 0, 1, 1]], 2);
    let sat = brute_force_satisfiable(&ts, 2, 2);
    let out = solve(&ts, 2, 2, &BoundarySpec::none(), &WeightField::neutral(), 1, DEFAULT_BUDGET).unwrap();
    assert_eq!(matches!(out, SolveOutcome::Solved(..)), sat);
}

#[test]
fn verify_examples() {
    let ts = canonical_sub_complete(2, 0, 0).unwrap();
    let zero = ts.find(0, 0, 0, 0).unwrap();
    let one = ts.find(1, 1, 1, 1).unwrap();
    let t = Tiling { width: 2, height: 1, cells: vec![zero, one], tileset_hash: Default::default(), seed: 0 };
    assert_eq!(t.verify(&ts), Err(Violation::WestEast { west: CellPos::new(1, 1), east: CellPos::new(1, 2) }));
    let single = Tiling { width: 1, height: 1, cells: vec![one], tileset_hash: Default::default(), seed: 0 };
    assert!(single.verify(&ts).is_ok());
    let vertical = Tiling { width: 1, height: 2, cells: vec![zero, one], tileset_hash: Default::default(), seed: 0 };
    assert_eq!(
        vertical.verify(&ts),
        Err(Violation::NorthSouth { north: CellPos::new(1, 1), south: CellPos::new(2, 1) })
    );
}

#[test]
fn periodicity_examples() {
    let constant =
        Tiling { width: 6, height: 4, cells: vec![TileId(0); 24], tileset_hash: Default::default(), seed: 0 };
    for a in 0..4 {
        for b in 0..6 {
            if (a, b) != (0, 0) {
                assert_eq!(constant.is_periodic(a, b), Ok(true));
            }
        }
    }
    // columns x x y y x x y y
    let cells: Vec<TileId> = (0..3 * 8).map(|i| TileId(((i % 8) / 2 % 2) as u32)).collect();
    let stripes = Tiling { width: 8, height: 3, cells, tileset_hash: Default::default(), seed: 0 };
    assert_eq!(stripes.is_periodic(0, 4), Ok(true));
    assert_eq!(stripes.is_periodic(0, 2), Ok(false));
    assert_eq!(stripes.is_periodic(0, 1), Ok(false));
    assert!(stripes.is_periodic(0, 0).is_err());
    assert!(stripes.is_periodic(3, 1).is_err());
}

#[test]
fn carcassonne_three_by_three_never_backtracks() {
    let ts = carcassonne();
    let rules = Rules::new(&ts);
    let mut rng = crate::rng::seeded(77);
    for trial in 0..10_000u64 {
        let boundary = random_boundary(&ts, 3, 3, &mut rng);
        let job = SolveJob {
            width: 3,
            height: 3,
            boundary: &boundary,
            weights: &WeightField::neutral(),
            origin: (0, 0),
            seed: trial,
            budget: DEFAULT_BUDGET,
        };
        match solve_with(&rules, &job, &crate::monitor::Unmonitored).unwrap() {
            SolveOutcome::Solved(t, stats) => {
                assert_eq!(stats.backtracks, 0, "trial {trial}");
                assert!(t.verify(&ts).is_ok());
            }
            other => panic!("trial {trial}: {other:?}"),
        }
    }
}

/// An edge-consistent north row and west column sharing their corner.
pub(crate) fn random_boundary(
    ts: &Tileset,
    width: usize,
    height: usize,
    rng: &mut crate::rng::SolverRng,
) -> BoundarySpec {
    let pick = |rng: &mut crate::rng::SolverRng, pred: &dyn Fn(&Tile) -> bool| -> TileId {
        let options: Vec<TileId> = ts.ids().filter(|&t| pred(ts.tile(t))).collect();
        options[crate::rng::below(rng, options.len() as u64) as usize]
    };
    let corner = pick(rng, &|_| true);
    let mut row = vec![corner];
    for _ in 1..width {
        let e = ts.tile(*row.last().unwrap()).e;
        row.push(pick(rng, &|t| t.w == e));
    }
    let mut col = vec![corner];
    for _ in 1..height {
        let s = ts.tile(*col.last().unwrap()).s;
        col.push(pick(rng, &|t| t.n == s));
    }
    BoundarySpec { north_row: Some(row), west_col: Some(col) }
}

#[test]
fn trail_rewinds_exactly() {
    let ts = carcassonne();
    let rules = Rules::new(&ts);
    let mut wave = Wave::new(4, 4, &rules).unwrap();
    let mut rng = crate::rng::seeded(5);
    let mut snapshots = vec![wave.snapshot()];
    while let Some(cell) = wave.observe() {
        wave.collapse(cell, &mut rng).unwrap();
        if wave.propagate(cell).is_err() {
            break;
        }
        let snap = wave.snapshot();
        // domains only shrink between decisions
        for (now, before) in snap.iter().zip(snapshots.last().unwrap()) {
            assert!(now.iter().all(|t| before.contains(t)));
        }
        snapshots.push(snap);
    }
    snapshots.pop();
    while wave.undo_decision().is_some() {
        assert_eq!(wave.snapshot(), snapshots.pop().unwrap());
    }
    assert!(snapshots.is_empty());
}

#[test]
fn neutral_entropy_matches_mrv() {
    let ts = carcassonne();
    let rules = Rules::new(&ts);
    let mut rng = crate::rng::seeded(13);
    for _ in 0..200 {
        let mut wave = Wave::new(5, 4, &rules).unwrap();
        for r in 1..=4 {
            for c in 1..=5 {
                let keep = 1 + crate::rng::below(&mut rng, 28) as u32;
                let tiles: Vec<TileId> = (0..keep).map(TileId).collect();
                wave.force_domain(CellPos::new(r, c), &tiles);
            }
        }
        // minimum remaining values, first in row-major order
        let mut mrv: Option<(CellPos, usize)> = None;
        for r in 1..=4 {
            for c in 1..=5 {
                let p = CellPos::new(r, c);
                let n = wave.domain_len(p);
                if n > 1 && mrv.is_none_or(|(_, best)| n < best) {
                    mrv = Some((p, n));
                }
            }
        }
        assert_eq!(wave.observe(), mrv.map(|(p, _)| p));
    }
}

#[test]
fn scaling_weights_keeps_choices() {
    let base = carcassonne();
    let scaled_tiles: Vec<Tile> = base
        .tiles()
        .iter()
        .cloned()
        .map(|t| {
            let w = t.weight * 7.5;
            t.with_weight(w)
        })
        .collect();
    let scaled = Tileset::new("s", base.ens().clone(), base.ewe().clone(), scaled_tiles).unwrap();
    for seed in 0..20 {
        let a = solve(&base, 6, 6, &BoundarySpec::none(), &WeightField::neutral(), seed, DEFAULT_BUDGET).unwrap();
        let b = solve(&scaled, 6, 6, &BoundarySpec::none(), &WeightField::neutral(), seed, DEFAULT_BUDGET).unwrap();
        assert_eq!(a.tiling().unwrap().cells, b.tiling().unwrap().cells);
    }
}

fn arb_small_tileset(max_tiles: usize) -> impl Strategy<Value = Tileset> {
    proptest::collection::btree_set((0u16..2, 0u16..2, 0u16..2, 0u16..2), 1..=max_tiles).prop_map(|set| {
        let edges: Vec<[u16; 4]> = set.into_iter().map(|(n, s, w, e)| [n, s, w, e]).collect();
        small_tileset(&edges, 2)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn solve_agrees_with_brute_force(ts in arb_small_tileset(6), width in 1usize..=3, height in 1usize..=2, seed in any::<u64>()) {
        let expected = brute_force_satisfiable(&ts, width, height);
        let out = solve(&ts, width, height, &BoundarySpec::none(), &WeightField::neutral(), seed, DEFAULT_BUDGET).unwrap();
        match &out {
            SolveOutcome::Solved(t, _) => {
                prop_assert!(expected);
                prop_assert!(t.verify(&ts).is_ok());
            }
            SolveOutcome::Unsat(_) => prop_assert!(!expected),
            SolveOutcome::BudgetExceeded(_) => prop_assert!(false, "budget exceeded on a tiny grid"),
        }
    }

    #[test]
    fn propagation_reaches_the_arc_consistent_fixed_point(
        ts in arb_small_tileset(8),
        width in 1usize..=3,
        height in 1usize..=3,
        seed in any::<u64>(),
    ) {
        let rules = Rules::new(&ts);
        let mut wave = Wave::new(width, height, &rules).unwrap();
        let mut rng = crate::rng::seeded(seed);
        let mut initial = wave.snapshot();
        naive_arc_consistency(&ts, width, height, &mut initial);
        let settled = wave.settle();
        if initial.iter().any(|d| d.is_empty()) {
            prop_assert!(settled.is_err());
            return Ok(());
        }
        prop_assert!(settled.is_ok());
        prop_assert_eq!(wave.snapshot(), initial);
        while let Some(cell) = wave.observe() {
            let mut expected = wave.snapshot();
            let tile = wave.collapse(cell, &mut rng).unwrap();
            expected[(cell.row as usize - 1) * width + cell.col as usize - 1] = vec![tile];
            naive_arc_consistency(&ts, width, height, &mut expected);
            let result = wave.propagate(cell);
            if expected.iter().any(|d| d.is_empty()) {
                prop_assert!(result.is_err());
                break;
            }
            prop_assert!(result.is_ok());
            prop_assert_eq!(wave.snapshot(), expected);
        }
    }

    #[test]
    fn solving_is_deterministic(seed in any::<u64>(), width in 1usize..=7, height in 1usize..=7) {
        let ts = carcassonne();
        let a = solve(&ts, width, height, &BoundarySpec::none(), &WeightField::neutral(), seed, DEFAULT_BUDGET).unwrap();
        let b = solve(&ts, width, height, &BoundarySpec::none(), &WeightField::neutral(), seed, DEFAULT_BUDGET).unwrap();
        prop_assert_eq!(a.tiling(), b.tiling());
        prop_assert_eq!(a.stats().backtracks, b.stats().backtracks);
        prop_assert_eq!(a.stats().collapses, b.stats().collapses);
    }

    #[test]
    fn sub_complete_boundaries_are_always_solvable(k in 2usize..=5, extra in 0usize..=10, seed in any::<u64>()) {
        let ts = canonical_sub_complete(k, extra, seed).unwrap();
        let mut rng = crate::rng::seeded(seed ^ 0x55);
        let boundary = random_boundary(&ts, 5, 5, &mut rng);
        let out = solve(&ts, 5, 5, &boundary, &WeightField::neutral(), seed, DEFAULT_BUDGET).unwrap();
        prop_assert!(matches!(out, SolveOutcome::Solved(..)), "{:?}", out);
    }
}
