use super::*;
use crate::harness::{generate_scenario, GeneratorConfig};
use crate::network::{Cell, LayerCode, Pixel};
use crate::sim::{run, SimConfig};
use crate::synthesis::{OptimizerKind, RecedingHorizonController};
use crate::traffic::{DemandModel, DemandTrace};

fn pixel_row(n: usize) -> Vec<Pixel> {
    (0..n)
        .map(|id| Pixel {
            id,
            grid_x: id as i64,
            grid_y: 0,
        })
        .collect()
}

fn cell(
    id: usize,
    station_id: usize,
    layer: LayerCode,
    base_power: f64,
    contributions: Vec<(usize, f64)>,
) -> Cell {
    Cell {
        id,
        station_id,
        layer,
        base_power,
        cost_per_mb: 0.1,
        contributions,
    }
}

/// Two stations with fully disjoint coverage: station 0 serves pixels 0..4,
/// station 1 serves pixels 4..8. Day demand needs both layers, night only E.
fn disjoint_instance() -> (Network, DemandModel) {
    let cover = |pixels: std::ops::Range<usize>, cap: f64| -> Vec<(usize, f64)> {
        pixels.map(|p| (p, cap)).collect()
    };
    let net = Network::new(
        vec![
            cell(0, 0, LayerCode::E, 100.0, cover(0..4, 6.0)),
            cell(1, 0, LayerCode::T, 80.0, cover(0..4, 5.0)),
            cell(2, 1, LayerCode::E, 100.0, cover(4..8, 6.0)),
            cell(3, 1, LayerCode::T, 80.0, cover(4..8, 5.0)),
        ],
        pixel_row(8),
    )
    .unwrap();
    let day: Vec<f64> = (0..24)
        .map(|t| if (8..20).contains(&t) { 14.0 } else { 2.0 })
        .collect();
    let model = DemandModel::deterministic(
        DemandTrace::from_samples(60, vec![day.clone(); 4], &net).unwrap(),
    );
    (net, model)
}

/// Left half of [`disjoint_instance`] as its own network (cells 0..2,
/// pixels 0..4, identical values).
fn left_subnetwork() -> (Network, DemandModel) {
    let cover = |cap: f64| -> Vec<(usize, f64)> { (0..4).map(|p| (p, cap)).collect() };
    let net = Network::new(
        vec![
            cell(0, 0, LayerCode::E, 100.0, cover(6.0)),
            cell(1, 0, LayerCode::T, 80.0, cover(5.0)),
        ],
        pixel_row(4),
    )
    .unwrap();
    let day: Vec<f64> = (0..24)
        .map(|t| if (8..20).contains(&t) { 14.0 } else { 2.0 })
        .collect();
    let model = DemandModel::deterministic(
        DemandTrace::from_samples(60, vec![day.clone(); 2], &net).unwrap(),
    );
    (net, model)
}

fn assert_partitions_valid(net: &Network, parts: &[Partition], max_cells: usize) {
    let mut cell_seen = vec![false; net.nr_cells()];
    let mut pixel_seen = vec![false; net.nr_pixels()];
    for p in parts {
        assert!(p.cell_ids.len() <= max_cells, "partition {} too large", p.id);
        assert!(!p.cell_ids.is_empty());
        for &c in &p.cell_ids {
            assert!(!cell_seen[c], "cell {c} in two partitions");
            cell_seen[c] = true;
        }
        for &px in &p.owned_pixel_ids {
            assert!(!pixel_seen[px], "pixel {px} owned twice");
            pixel_seen[px] = true;
        }
    }
    assert!(cell_seen.iter().all(|&s| s), "every cell assigned");
    assert!(pixel_seen.iter().all(|&s| s), "every pixel owned");
}

#[test]
fn everything_fits_in_one_partition() {
    let (net, _) = disjoint_instance();
    let parts = partition_network(&net, 8).unwrap();
    assert_eq!(parts.len(), 1);
    assert_eq!(parts[0].cell_ids, vec![0, 1, 2, 3]);
    assert_eq!(parts[0].owned_pixel_ids.len(), 8);
    assert_partitions_valid(&net, &parts, 8);
}

#[test]
fn capacity_bound_forces_station_split() {
    let (net, _) = disjoint_instance();
    let parts = partition_network(&net, 2).unwrap();
    assert_eq!(parts.len(), 2);
    assert_eq!(parts[0].cell_ids, vec![0, 1]);
    assert_eq!(parts[1].cell_ids, vec![2, 3]);
    assert_eq!(parts[0].owned_pixel_ids, vec![0, 1, 2, 3]);
    assert_eq!(parts[1].owned_pixel_ids, vec![4, 5, 6, 7]);
    assert_partitions_valid(&net, &parts, 2);
}

#[test]
fn oversized_station_is_an_error() {
    let (net, _) = disjoint_instance();
    let err = partition_network(&net, 1).unwrap_err();
    assert!(matches!(
        err,
        PartitionError::StationTooLarge {
            cells: 2,
            max_cells: 1,
            ..
        }
    ));
    assert!(matches!(
        partition_network(&net, 0).unwrap_err(),
        PartitionError::ZeroMaxCells
    ));
}

#[test]
fn city_scale_partitioning_respects_bounds() {
    let doc = generate_scenario(&GeneratorConfig::default()).unwrap();
    let net = Network::from_document(&doc).unwrap();
    let parts = partition_network(&net, 8).unwrap();
    // 39 cells in partitions of at most 8: at least ceil(39/8) = 5 parts.
    assert!(parts.len() >= 5, "only {} partitions", parts.len());
    assert_partitions_valid(&net, &parts, 8);
}

#[test]
fn pixel_ownership_follows_dominant_contribution() {
    // Pixel 1 gets 5.0 from station 0 but 7.0 from station 1.
    let net = Network::new(
        vec![
            cell(0, 0, LayerCode::E, 10.0, vec![(0, 5.0), (1, 5.0)]),
            cell(1, 1, LayerCode::E, 10.0, vec![(1, 7.0), (2, 7.0)]),
        ],
        pixel_row(3),
    )
    .unwrap();
    let parts = partition_network(&net, 1).unwrap();
    assert_eq!(parts[0].owned_pixel_ids, vec![0]);
    assert_eq!(parts[1].owned_pixel_ids, vec![1, 2]);

    // Exact tie goes to the lower partition id.
    let net = Network::new(
        vec![
            cell(0, 0, LayerCode::E, 10.0, vec![(0, 5.0), (1, 5.0)]),
            cell(1, 1, LayerCode::E, 10.0, vec![(1, 5.0), (2, 7.0)]),
        ],
        pixel_row(3),
    )
    .unwrap();
    let parts = partition_network(&net, 1).unwrap();
    assert_eq!(parts[0].owned_pixel_ids, vec![0, 1]);
    assert_eq!(parts[1].owned_pixel_ids, vec![2]);
}

#[test]
fn assignment_exports_are_row_per_member() {
    let (net, _) = disjoint_instance();
    let parts = partition_network(&net, 2).unwrap();
    let mut cells = Vec::new();
    write_cell_assignments(&mut cells, &parts).unwrap();
    let text = String::from_utf8(cells).unwrap();
    assert_eq!(
        text.lines().collect::<Vec<_>>(),
        vec!["partition_id,cell_id", "0,0", "0,1", "1,2", "1,3"]
    );
    let mut pixels = Vec::new();
    write_pixel_assignments(&mut pixels, &parts).unwrap();
    assert_eq!(String::from_utf8(pixels).unwrap().lines().count(), 1 + 8);
}

fn synth_cfg(seed: u64) -> SynthesisConfig {
    SynthesisConfig {
        candidate_budget: 64,
        optimizer: OptimizerKind::HillClimb,
        seed,
        ..SynthesisConfig::default()
    }
}

#[test]
fn single_partition_matches_monolithic_controller() {
    let (net, model) = disjoint_instance();
    let sim_cfg = SimConfig::default();
    let parts = partition_network(&net, 8).unwrap();
    assert_eq!(parts.len(), 1);

    let mut distributed = DistributedController::new(&net, synth_cfg(21), &parts).unwrap();
    let mut monolithic = RecedingHorizonController::new(synth_cfg(21)).unwrap();
    let a = run(&net, &model, &mut distributed, &sim_cfg).unwrap();
    let b = run(&net, &model, &mut monolithic, &sim_cfg).unwrap();
    assert_eq!(a.schedule, b.schedule);
    assert_eq!(a.breakdown, b.breakdown);
}

#[test]
fn disjoint_partitions_rewards_are_additive() {
    let (net, model) = disjoint_instance();
    let sim_cfg = SimConfig::default();
    let parts = partition_network(&net, 2).unwrap();
    let mut distributed = DistributedController::new(&net, synth_cfg(5), &parts).unwrap();
    let merged = run(&net, &model, &mut distributed, &sim_cfg).unwrap();

    // Both halves are identical, so one independent sub-run serves as both.
    let (left_net, left_model) = left_subnetwork();
    let mut left_rh = RecedingHorizonController::new(synth_cfg(5)).unwrap();
    let left = run(&left_net, &left_model, &mut left_rh, &sim_cfg).unwrap();

    let sum = 2.0 * left.breakdown.reward();
    let merged_reward = merged.breakdown.reward();
    assert!(
        (merged_reward - sum).abs() <= 1e-9 * sum.abs().max(1.0),
        "merged {merged_reward} vs independent sum {sum}"
    );
    assert_eq!(merged.breakdown.penalty, 0.0);
}

#[test]
fn merged_actions_respect_coverage() {
    let (net, model) = disjoint_instance();
    let parts = partition_network(&net, 2).unwrap();
    for seed in 0..20 {
        let mut controller = DistributedController::new(&net, synth_cfg(seed), &parts).unwrap();
        let out = run(&net, &model, &mut controller, &SimConfig::default()).unwrap();
        for record in &out.schedule {
            assert!(record.action.validate_for(&net).is_ok());
        }
    }
}
