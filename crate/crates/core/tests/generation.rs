use nwfc_core::nwfc::{self, SubgridPlan};
use nwfc_core::solver::{Rules, DEFAULT_BUDGET};
use nwfc_core::tileset::{canonical_sub_complete, carcassonne};
use nwfc_core::{
    BrushLayer, CellRect, ChunkStore, GenerateError, Tileset, Tiling, WeightField, WorldConfig, WorldError,
};
use proptest::prelude::*;

fn tagged(t: &Tiling, ts: &Tileset, tag: &str, area: &CellRect) -> usize {
    let mut count = 0;
    for row in 1..=t.height {
        for col in 1..=t.width {
            if area.contains(row as u32, col as u32) && ts.tile(t.get(row, col)).has_tag(tag) {
                count += 1;
            }
        }
    }
    count
}

#[test]
fn city_brush_raises_city_share() {
    let ts = carcassonne();
    let plan = SubgridPlan::new(17, 17, 5).unwrap();
    let all = CellRect::new(1, 1, 17, 17).unwrap();
    let mut brushed = WeightField::neutral();
    brushed.paint("city", all, 8.0).unwrap();
    let (mut base, mut painted) = (0, 0);
    for seed in 0..20 {
        let (t, _) = nwfc::generate(&plan, &ts, &WeightField::neutral(), seed, DEFAULT_BUDGET).unwrap();
        base += tagged(&t, &ts, "city", &all);
        let (t, _) = nwfc::generate(&plan, &ts, &brushed, seed, DEFAULT_BUDGET).unwrap();
        t.verify(&ts).unwrap();
        painted += tagged(&t, &ts, "city", &all);
    }
    assert!(painted as f64 >= 1.5 * base as f64, "painted {painted} vs baseline {base}");
}

#[test]
fn brush_stroke_acts_locally() {
    let ts = carcassonne();
    let plan = SubgridPlan::new(33, 33, 5).unwrap();
    let inside = CellRect::new(1, 1, 16, 16).unwrap();
    let outside = CellRect::new(18, 18, 33, 33).unwrap();
    let mut layer = BrushLayer::new("grass", 1.0).unwrap();
    layer.paint(inside, 0.1).unwrap();
    let brushed = WeightField::from_layers(vec![layer]).unwrap();
    let (mut grass_in, mut grass_out) = (0, 0);
    for seed in 0..10 {
        let (t, _) = nwfc::generate(&plan, &ts, &brushed, seed, DEFAULT_BUDGET).unwrap();
        grass_in += tagged(&t, &ts, "grass", &inside);
        grass_out += tagged(&t, &ts, "grass", &outside);
    }
    assert!(grass_in < grass_out, "inside {grass_in} outside {grass_out}");
}

#[test]
fn generation_stops_when_the_budget_runs_out() {
    let ts = carcassonne();
    let plan = SubgridPlan::new(9, 9, 5).unwrap();
    let err = nwfc::generate(&plan, &ts, &WeightField::neutral(), 1, 3).unwrap_err();
    assert!(matches!(err, GenerateError::BudgetExceeded { a: 1, b: 1 }), "{err:?}");
}

#[test]
fn world_chunks_share_their_borders() {
    let ts = carcassonne();
    let rules = Rules::new(&ts);
    let cfg = WorldConfig { world_seed: 77, chunk_size: 6, tileset_hash: ts.content_hash() };
    let mut world = ChunkStore::new(cfg).unwrap();
    world.ensure_chunk(&rules, &WeightField::neutral(), 3, 4).unwrap();
    assert_eq!(world.len(), 12);
    for chunk in world.chunks() {
        chunk.tiling.verify(&ts).unwrap();
        if let Some(south) = world.get(chunk.a + 1, chunk.b) {
            for col in 1..=6 {
                assert_eq!(chunk.tiling.get(6, col), south.tiling.get(1, col));
            }
        }
        if let Some(east) = world.get(chunk.a, chunk.b + 1) {
            for row in 1..=6 {
                assert_eq!(chunk.tiling.get(row, 6), east.tiling.get(row, 1));
            }
        }
    }
}

#[test]
fn world_matches_finite_generation_with_the_same_chunks() {
    // A world and a finite map agree when every chunk is seeded the same
    // way, which holds because both derive chunk seeds from (seed, a, b).
    let ts = carcassonne();
    let rules = Rules::new(&ts);
    let cfg = WorldConfig { world_seed: 5, chunk_size: 5, tileset_hash: ts.content_hash() };
    let mut world = ChunkStore::new(cfg).unwrap();
    world.ensure_chunk(&rules, &WeightField::neutral(), 3, 3).unwrap();
    let plan = SubgridPlan::new(13, 13, 5).unwrap();
    let (_, results, _) =
        nwfc::generate_with(&plan, &rules, &WeightField::neutral(), 5, DEFAULT_BUDGET, &nwfc_core::Unmonitored)
            .unwrap();
    for r in results {
        assert_eq!(world.get(r.a as u32, r.b as u32).unwrap().tiling.cells, r.tiling.cells);
    }
}

#[test]
fn visible_region_returns_the_neighbourhood() {
    let ts = carcassonne();
    let rules = Rules::new(&ts);
    let cfg = WorldConfig { world_seed: 1, chunk_size: 5, tileset_hash: ts.content_hash() };
    let mut world = ChunkStore::new(cfg.clone()).unwrap();
    let nine = world.visible_region(&rules, &WeightField::neutral(), (4, 4)).unwrap();
    assert_eq!(nine.len(), 9);
    assert_eq!((nine[0].a, nine[0].b), (3, 3));
    assert_eq!((nine[8].a, nine[8].b), (5, 5));
    assert_eq!(world.len(), 25);

    let mut corner = ChunkStore::new(cfg).unwrap();
    assert_eq!(corner.visible_region(&rules, &WeightField::neutral(), (1, 1)).unwrap().len(), 4);
}

#[test]
fn foreign_tileset_is_refused() {
    let ts = carcassonne();
    let other = canonical_sub_complete(3, 0, 0).unwrap();
    let cfg = WorldConfig { world_seed: 1, chunk_size: 5, tileset_hash: ts.content_hash() };
    let mut world = ChunkStore::new(cfg).unwrap();
    let err = world.ensure_chunk(&Rules::new(&other), &WeightField::neutral(), 1, 1).unwrap_err();
    assert!(matches!(err, WorldError::HashMismatch { .. }));
    assert!(world.is_empty());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn canonical_maps_are_valid_and_reproducible(
        k in 2usize..=6,
        extra in 0usize..20,
        chunk in 2usize..=7,
        ga in 1usize..=5,
        gb in 1usize..=5,
        seed in any::<u64>(),
    ) {
        let ts = canonical_sub_complete(k, extra.min(k.pow(4) - k * k), seed).unwrap();
        let plan = SubgridPlan::new(ga * (chunk - 1) + 1, gb * (chunk - 1) + 1, chunk).unwrap();
        let (a, stats) = nwfc::generate(&plan, &ts, &WeightField::neutral(), seed, DEFAULT_BUDGET).unwrap();
        prop_assert!(a.verify(&ts).is_ok());
        prop_assert_eq!(stats.subgrids as usize, ga * gb);
        prop_assert_eq!(stats.exterior_retries, 0);
        let (b, _) = nwfc::generate(&plan, &ts, &WeightField::neutral(), seed, DEFAULT_BUDGET).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn worlds_do_not_depend_on_request_order(
        requests in proptest::collection::vec((1u32..=4, 1u32..=4), 1..8),
        seed in any::<u64>(),
    ) {
        let ts = carcassonne();
        let rules = Rules::new(&ts);
        let cfg = WorldConfig { world_seed: seed, chunk_size: 4, tileset_hash: ts.content_hash() };
        let mut walked = ChunkStore::new(cfg.clone()).unwrap();
        for &(a, b) in &requests {
            walked.ensure_chunk(&rules, &WeightField::neutral(), a, b).unwrap();
        }
        let mut direct = ChunkStore::new(cfg).unwrap();
        direct.ensure_chunk(&rules, &WeightField::neutral(), 4, 4).unwrap();
        for chunk in walked.chunks() {
            prop_assert_eq!(&chunk.tiling, &direct.get(chunk.a, chunk.b).unwrap().tiling);
        }
        prop_assert_eq!(walked.chunks_regenerated(), 0);
    }
}
