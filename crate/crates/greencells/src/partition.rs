//! Distributed online synthesis: bounded geographic subgames.
//!
//! Large networks are split into partitions of at most `max_cells` cells
//! (default 8). Cells are grouped by base station and stations are merged by
//! greedy nearest-centroid agglomeration. Every pixel is owned by exactly one
//! partition, the one contributing the most capacity to it under all-ON,
//! so network-wide penalties are counted exactly once.
//!
//! [`DistributedController`] synthesizes each partition's subgame
//! independently (in parallel) every control period and concatenates the
//! first actions. During a partition's synthesis all out-of-partition cells
//! are assumed ON for contribution purposes; that assumption is the known
//! approximation of the distributed scheme.

use std::io;

use rayon::prelude::*;
use thiserror::Error;

use crate::action::ActionVector;
use crate::network::Network;
use crate::rng::derive_seed;
use crate::sim::{ControlContext, Controller};
use crate::synthesis::{synthesize_scoped, Scope, SynthesisConfig, SynthesisError};

pub const DEFAULT_MAX_CELLS: usize = 8;

#[derive(Debug, Error)]
pub enum PartitionError {
    #[error("max_cells must be >= 1")]
    ZeroMaxCells,
    #[error("station {station} has {cells} cells, more than max_cells = {max_cells}; raise max_cells")]
    StationTooLarge {
        station: usize,
        cells: usize,
        max_cells: usize,
    },
}

/// One subgame: its member cells and the pixels whose penalty it owns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub id: usize,
    pub cell_ids: Vec<usize>,
    pub owned_pixel_ids: Vec<usize>,
}

struct StationGroup {
    cells: Vec<usize>,
    /// Contribution-weighted centroid of covered pixels and its total weight.
    centroid: (f64, f64),
    weight: f64,
}

fn station_centroid(net: &Network, cells: &[usize]) -> ((f64, f64), f64) {
    let mut wx = 0.0;
    let mut wy = 0.0;
    let mut w = 0.0;
    for &c in cells {
        for &(p, v) in &net.cell(c).contributions {
            let pixel = net.pixels()[p];
            wx += pixel.grid_x as f64 * v;
            wy += pixel.grid_y as f64 * v;
            w += v;
        }
    }
    if w > 0.0 {
        ((wx / w, wy / w), w)
    } else {
        ((0.0, 0.0), 0.0)
    }
}

fn squared_distance(a: (f64, f64), b: (f64, f64)) -> f64 {
    let dx = a.0 - b.0;
    let dy = a.1 - b.1;
    dx * dx + dy * dy
}

/// Split the network into partitions of at most `max_cells` cells.
///
/// Stations are never split (a station larger than `max_cells` is an error);
/// groups merge greedily by nearest centroid while the size bound allows.
/// Pixel ownership goes to the partition with the largest all-ON
/// contribution, ties to the lowest partition id.
pub fn partition_network(net: &Network, max_cells: usize) -> Result<Vec<Partition>, PartitionError> {
    if max_cells == 0 {
        return Err(PartitionError::ZeroMaxCells);
    }

    // Group cells by station, stations ordered by id.
    let mut stations: Vec<(usize, Vec<usize>)> = Vec::new();
    for cell in net.cells() {
        match stations.binary_search_by_key(&cell.station_id, |&(s, _)| s) {
            Ok(i) => stations[i].1.push(cell.id),
            Err(i) => stations.insert(i, (cell.station_id, vec![cell.id])),
        }
    }
    for (station, cells) in &stations {
        if cells.len() > max_cells {
            return Err(PartitionError::StationTooLarge {
                station: *station,
                cells: cells.len(),
                max_cells,
            });
        }
    }

    let mut groups: Vec<StationGroup> = stations
        .into_iter()
        .map(|(_, cells)| {
            let (centroid, weight) = station_centroid(net, &cells);
            StationGroup {
                cells,
                centroid,
                weight,
            }
        })
        .collect();

    // Greedy agglomeration: repeatedly merge the closest pair that still
    // fits. Ties break toward the smallest (i, j) for determinism.
    loop {
        let mut best: Option<(f64, usize, usize)> = None;
        for i in 0..groups.len() {
            for j in (i + 1)..groups.len() {
                if groups[i].cells.len() + groups[j].cells.len() > max_cells {
                    continue;
                }
                let d = squared_distance(groups[i].centroid, groups[j].centroid);
                let better = match best {
                    None => true,
                    Some((bd, _, _)) => d < bd,
                };
                if better {
                    best = Some((d, i, j));
                }
            }
        }
        let Some((_, i, j)) = best else { break };
        let absorbed = groups.remove(j);
        let target = &mut groups[i];
        target.cells.extend(absorbed.cells);
        let w = target.weight + absorbed.weight;
        if w > 0.0 {
            target.centroid = (
                (target.centroid.0 * target.weight + absorbed.centroid.0 * absorbed.weight) / w,
                (target.centroid.1 * target.weight + absorbed.centroid.1 * absorbed.weight) / w,
            );
        }
        target.weight = w;
    }

    // Stable partition ids: order groups by their smallest cell id.
    let mut cell_sets: Vec<Vec<usize>> = groups
        .into_iter()
        .map(|mut g| {
            g.cells.sort_unstable();
            g.cells
        })
        .collect();
    cell_sets.sort_by_key(|cells| cells[0]);

    let mut cell_to_partition = vec![usize::MAX; net.nr_cells()];
    for (pid, cells) in cell_sets.iter().enumerate() {
        for &c in cells {
            cell_to_partition[c] = pid;
        }
    }

    // Pixel ownership by dominant all-ON contribution.
    let mut owned: Vec<Vec<usize>> = vec![Vec::new(); cell_sets.len()];
    let mut acc = vec![0.0f64; cell_sets.len()];
    for p in 0..net.nr_pixels() {
        acc.iter_mut().for_each(|a| *a = 0.0);
        for &(c, v) in net.covering(p) {
            acc[cell_to_partition[c]] += v;
        }
        let mut owner = 0;
        for (pid, &a) in acc.iter().enumerate() {
            if a > acc[owner] {
                owner = pid;
            }
        }
        owned[owner].push(p);
    }

    Ok(cell_sets
        .into_iter()
        .zip(owned)
        .enumerate()
        .map(|(id, (cell_ids, owned_pixel_ids))| Partition {
            id,
            cell_ids,
            owned_pixel_ids,
        })
        .collect())
}

/// `partition_id,cell_id` rows.
pub fn write_cell_assignments<W: io::Write>(w: &mut W, partitions: &[Partition]) -> io::Result<()> {
    writeln!(w, "partition_id,cell_id")?;
    for part in partitions {
        for &c in &part.cell_ids {
            writeln!(w, "{},{}", part.id, c)?;
        }
    }
    Ok(())
}

/// `partition_id,pixel_id` rows.
pub fn write_pixel_assignments<W: io::Write>(w: &mut W, partitions: &[Partition]) -> io::Result<()> {
    writeln!(w, "partition_id,pixel_id")?;
    for part in partitions {
        for &p in &part.owned_pixel_ids {
            writeln!(w, "{},{}", part.id, p)?;
        }
    }
    Ok(())
}

/// Receding-horizon control with per-partition synthesis.
///
/// Every period each partition's subgame is planned independently (shared
/// per-period rollout seeds, concurrent execution) and the first actions are
/// concatenated into one full action vector.
pub struct DistributedController {
    cfg: SynthesisConfig,
    scopes: Vec<Scope>,
    nr_cells: usize,
}

impl DistributedController {
    pub fn new(
        net: &Network,
        cfg: SynthesisConfig,
        partitions: &[Partition],
    ) -> Result<Self, SynthesisError> {
        cfg.validate(&crate::reward::RewardParams {
            penalty_per_pixel: 1000.0,
            step_minutes: cfg.control_period_minutes,
        })?;
        let scopes = partitions
            .iter()
            .map(|part| Scope {
                controllable: part
                    .cell_ids
                    .iter()
                    .copied()
                    .filter(|&c| !net.cell(c).is_coverage_layer())
                    .collect(),
                energy_cells: part.cell_ids.clone(),
                pixels: part.owned_pixel_ids.clone(),
            })
            .collect();
        Ok(DistributedController {
            cfg,
            scopes,
            nr_cells: net.nr_cells(),
        })
    }
}

impl Controller for DistributedController {
    fn name(&self) -> &str {
        "rh-distributed"
    }

    fn decide(&mut self, ctx: &ControlContext<'_>) -> ActionVector {
        let period = self.cfg.control_period_minutes as u64;
        assert!(
            ctx.t_minutes % period == 0,
            "distributed controller is configured for {}-minute periods but was invoked at t = {} min",
            period,
            ctx.t_minutes
        );
        let available = ctx.model.trace().total_minutes().saturating_sub(ctx.t_minutes) / period;
        let periods_ahead = (self.cfg.periods() as u64).min(available);
        if periods_ahead == 0 {
            return ActionVector::all_on(ctx.net);
        }
        let t0_period = (ctx.t_minutes / period) as usize;
        let cfg = SynthesisConfig {
            short_horizon_minutes: periods_ahead as u32 * self.cfg.control_period_minutes,
            seed: derive_seed(self.cfg.seed, ctx.period_index as u64),
            ..self.cfg
        };

        let firsts: Vec<Vec<bool>> = self
            .scopes
            .par_iter()
            .map(|scope| {
                let out = synthesize_scoped(ctx.net, ctx.model, ctx.params, t0_period, &cfg, scope)
                    .unwrap_or_else(|e| panic!("distributed synthesis failed: {e}"));
                out.bits[..scope.controllable.len()].to_vec()
            })
            .collect();

        let mut on = vec![true; self.nr_cells];
        for (scope, bits) in self.scopes.iter().zip(&firsts) {
            for (j, &c) in scope.controllable.iter().enumerate() {
                on[c] = bits[j];
            }
        }
        ActionVector::new(ctx.net, on).expect("coverage cells stay ON in merged action")
    }
}

#[cfg(test)]
mod tests;
