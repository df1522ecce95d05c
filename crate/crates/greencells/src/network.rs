//! Immutable radio-network topology.
//!
//! A [`Network`] is a validated set of [`Cell`]s and [`Pixel`]s plus the
//! sparse cell→pixel capacity contributions. Cells live on one of five
//! frequency layers; the 800 MHz layer ([`LayerCode::E`]) is the coverage
//! layer and can never be switched off, so load-time validation requires
//! every pixel to be reachable from at least one E-layer cell. After
//! construction a `Network` is immutable and safe to share across any number
//! of concurrent rollout evaluators.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::action::ActionVector;

/// 4G (LTE) frequency layers. `E` (800 MHz) is the coverage layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LayerCode {
    E,
    V,
    T,
    A,
    L,
}

impl LayerCode {
    /// Carrier frequency of the layer in MHz.
    pub fn frequency_mhz(self) -> u32 {
        match self {
            LayerCode::E => 800,
            LayerCode::V => 900,
            LayerCode::T => 1800,
            LayerCode::A => 2100,
            LayerCode::L => 2600,
        }
    }

    /// Whether this layer guarantees coverage (exactly the 800 MHz layer).
    pub fn is_coverage(self) -> bool {
        matches!(self, LayerCode::E)
    }

    pub fn all() -> [LayerCode; 5] {
        [
            LayerCode::E,
            LayerCode::V,
            LayerCode::T,
            LayerCode::A,
            LayerCode::L,
        ]
    }
}

impl fmt::Display for LayerCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            LayerCode::E => 'E',
            LayerCode::V => 'V',
            LayerCode::T => 'T',
            LayerCode::A => 'A',
            LayerCode::L => 'L',
        };
        write!(f, "{c}")
    }
}

/// One radio cell: a transmitter on one frequency layer at a base station.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub id: usize,
    pub station_id: usize,
    pub layer: LayerCode,
    /// Energy units per hour while the cell is ON.
    pub base_power: f64,
    /// Energy units per megabit carried while ON.
    pub cost_per_mb: f64,
    /// Sparse capacity contribution per pixel (megabits/hour when ON),
    /// sorted by pixel id. Entries are strictly positive.
    pub contributions: Vec<(usize, f64)>,
}

impl Cell {
    /// True exactly when the cell sits on the coverage (800 MHz) layer.
    pub fn is_coverage_layer(&self) -> bool {
        self.layer.is_coverage()
    }

    /// Capacity this cell supplies to `pixel` when ON, if any.
    pub fn contribution_to(&self, pixel: usize) -> Option<f64> {
        self.contributions
            .binary_search_by_key(&pixel, |&(p, _)| p)
            .ok()
            .map(|i| self.contributions[i].1)
    }
}

/// One grid element of the served geographic area.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pixel {
    pub id: usize,
    #[serde(rename = "x")]
    pub grid_x: i64,
    #[serde(rename = "y")]
    pub grid_y: i64,
}

/// Scenario document: the on-disk form of a network (JSON).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioDoc {
    pub cells: Vec<CellDoc>,
    pub pixels: Vec<Pixel>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellDoc {
    pub id: usize,
    pub station_id: usize,
    pub layer: LayerCode,
    pub base_power: f64,
    pub cost_per_mb: f64,
    pub contributions: Vec<Contribution>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Contribution {
    pub pixel: usize,
    pub capacity: f64,
}

/// Validation and parsing failures when loading a scenario.
#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("scenario document does not conform to the schema: {0}")]
    Schema(#[from] serde_json::Error),
    #[error("failed to read scenario: {0}")]
    Io(#[from] std::io::Error),
    #[error("duplicate cell id {0}")]
    DuplicateCellId(usize),
    #[error("cell ids are not dense 0..{expected}: missing id {missing}")]
    NonDenseCellIds { expected: usize, missing: usize },
    #[error("duplicate pixel id {0}")]
    DuplicatePixelId(usize),
    #[error("pixel ids are not dense 0..{expected}: missing id {missing}")]
    NonDensePixelIds { expected: usize, missing: usize },
    #[error("pixels {a} and {b} share grid coordinates ({x}, {y})")]
    DuplicatePixelCoords { a: usize, b: usize, x: i64, y: i64 },
    #[error("cell {cell}: base_power must be >= 0 and finite, got {value}")]
    InvalidBasePower { cell: usize, value: f64 },
    #[error("cell {cell}: cost_per_mb must be >= 0 and finite, got {value}")]
    InvalidCostPerMb { cell: usize, value: f64 },
    #[error("cell {cell}: contribution to pixel {pixel} must be > 0 and finite, got {value}")]
    NonPositiveContribution { cell: usize, pixel: usize, value: f64 },
    #[error("cell {cell}: contribution references unknown pixel {pixel}")]
    UnknownContributionPixel { cell: usize, pixel: usize },
    #[error("cell {cell}: duplicate contribution entry for pixel {pixel}")]
    DuplicateContributionPixel { cell: usize, pixel: usize },
    #[error("uncovered pixel under coverage constraint: pixel {0} is not reached by any 800 MHz cell")]
    UncoveredPixel(usize),
}

/// Validated, immutable network topology.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    cells: Vec<Cell>,
    pixels: Vec<Pixel>,
    /// Per pixel: (cell id, capacity) pairs sorted by cell id. Exactly the
    /// transpose of the cells' contribution maps.
    covering: Vec<Vec<(usize, f64)>>,
    /// Cell ids on the coverage layer, ascending.
    coverage_cells: Vec<usize>,
    /// Cell ids not on the coverage layer (the controllable ones), ascending.
    capacity_cells: Vec<usize>,
}

impl Network {
    /// Validate raw cells and pixels into a `Network`.
    ///
    /// Checks dense ids, unique pixel coordinates, non-negative power terms,
    /// strictly positive contributions to known pixels, and that every pixel
    /// is covered by at least one coverage-layer cell.
    pub fn new(mut cells: Vec<Cell>, mut pixels: Vec<Pixel>) -> Result<Self, ScenarioError> {
        pixels.sort_by_key(|p| p.id);
        for (idx, p) in pixels.iter().enumerate() {
            if p.id < idx {
                return Err(ScenarioError::DuplicatePixelId(p.id));
            }
            if p.id > idx {
                return Err(ScenarioError::NonDensePixelIds {
                    expected: pixels.len(),
                    missing: idx,
                });
            }
        }
        let mut coord_owner: HashMap<(i64, i64), usize> = HashMap::with_capacity(pixels.len());
        for p in &pixels {
            if let Some(&other) = coord_owner.get(&(p.grid_x, p.grid_y)) {
                return Err(ScenarioError::DuplicatePixelCoords {
                    a: other,
                    b: p.id,
                    x: p.grid_x,
                    y: p.grid_y,
                });
            }
            coord_owner.insert((p.grid_x, p.grid_y), p.id);
        }

        cells.sort_by_key(|c| c.id);
        for (idx, c) in cells.iter().enumerate() {
            if c.id < idx {
                return Err(ScenarioError::DuplicateCellId(c.id));
            }
            if c.id > idx {
                return Err(ScenarioError::NonDenseCellIds {
                    expected: cells.len(),
                    missing: idx,
                });
            }
        }

        for c in &mut cells {
            if !(c.base_power.is_finite() && c.base_power >= 0.0) {
                return Err(ScenarioError::InvalidBasePower {
                    cell: c.id,
                    value: c.base_power,
                });
            }
            if !(c.cost_per_mb.is_finite() && c.cost_per_mb >= 0.0) {
                return Err(ScenarioError::InvalidCostPerMb {
                    cell: c.id,
                    value: c.cost_per_mb,
                });
            }
            c.contributions.sort_by_key(|&(p, _)| p);
            for w in c.contributions.windows(2) {
                if w[0].0 == w[1].0 {
                    return Err(ScenarioError::DuplicateContributionPixel {
                        cell: c.id,
                        pixel: w[0].0,
                    });
                }
            }
            for &(p, v) in &c.contributions {
                if p >= pixels.len() {
                    return Err(ScenarioError::UnknownContributionPixel { cell: c.id, pixel: p });
                }
                if !(v.is_finite() && v > 0.0) {
                    return Err(ScenarioError::NonPositiveContribution {
                        cell: c.id,
                        pixel: p,
                        value: v,
                    });
                }
            }
        }

        let mut covering: Vec<Vec<(usize, f64)>> = vec![Vec::new(); pixels.len()];
        for c in &cells {
            for &(p, v) in &c.contributions {
                covering[p].push((c.id, v));
            }
        }
        // Cells were visited in ascending id order, so each list is sorted.

        let coverage_cells: Vec<usize> = cells
            .iter()
            .filter(|c| c.is_coverage_layer())
            .map(|c| c.id)
            .collect();
        let capacity_cells: Vec<usize> = cells
            .iter()
            .filter(|c| !c.is_coverage_layer())
            .map(|c| c.id)
            .collect();

        let net = Network {
            cells,
            pixels,
            covering,
            coverage_cells,
            capacity_cells,
        };
        for p in 0..net.pixels.len() {
            let covered = net.covering[p]
                .iter()
                .any(|&(c, _)| net.cells[c].is_coverage_layer());
            if !covered {
                return Err(ScenarioError::UncoveredPixel(p));
            }
        }
        Ok(net)
    }

    /// Build a network from a scenario document.
    pub fn from_document(doc: &ScenarioDoc) -> Result<Self, ScenarioError> {
        let cells = doc
            .cells
            .iter()
            .map(|c| Cell {
                id: c.id,
                station_id: c.station_id,
                layer: c.layer,
                base_power: c.base_power,
                cost_per_mb: c.cost_per_mb,
                contributions: c.contributions.iter().map(|e| (e.pixel, e.capacity)).collect(),
            })
            .collect();
        Network::new(cells, doc.pixels.clone())
    }

    /// Parse and validate a scenario from JSON text.
    pub fn from_json_str(json: &str) -> Result<Self, ScenarioError> {
        let doc: ScenarioDoc = serde_json::from_str(json)?;
        Network::from_document(&doc)
    }

    /// Load a scenario file (JSON).
    pub fn load_json(path: impl AsRef<Path>) -> Result<Self, ScenarioError> {
        let text = fs::read_to_string(path)?;
        Network::from_json_str(&text)
    }

    /// Serialize back into the scenario document form (contributions sorted
    /// by pixel id, cells and pixels by id).
    pub fn to_document(&self) -> ScenarioDoc {
        ScenarioDoc {
            cells: self
                .cells
                .iter()
                .map(|c| CellDoc {
                    id: c.id,
                    station_id: c.station_id,
                    layer: c.layer,
                    base_power: c.base_power,
                    cost_per_mb: c.cost_per_mb,
                    contributions: c
                        .contributions
                        .iter()
                        .map(|&(pixel, capacity)| Contribution { pixel, capacity })
                        .collect(),
                })
                .collect(),
            pixels: self.pixels.clone(),
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("scenario serialization")
    }

    pub fn nr_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn nr_pixels(&self) -> usize {
        self.pixels.len()
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn cell(&self, id: usize) -> &Cell {
        &self.cells[id]
    }

    pub fn pixels(&self) -> &[Pixel] {
        &self.pixels
    }

    /// (cell id, capacity) pairs contributing to `pixel`, sorted by cell id.
    pub fn covering(&self, pixel: usize) -> &[(usize, f64)] {
        &self.covering[pixel]
    }

    /// Ids of coverage-layer (800 MHz) cells, ascending.
    pub fn coverage_cells(&self) -> &[usize] {
        &self.coverage_cells
    }

    /// Ids of capacity-layer cells (the ones a controller may switch),
    /// ascending.
    pub fn capacity_cells(&self) -> &[usize] {
        &self.capacity_cells
    }

    /// Total capacity reaching `pixel` under `action`, in megabits/hour.
    ///
    /// Sum over the contributing cells that are ON; 0 if none are.
    pub fn total_contribution(&self, action: &ActionVector, pixel: usize) -> f64 {
        assert_eq!(
            action.len(),
            self.cells.len(),
            "action vector length must equal the number of cells"
        );
        self.contribution_where(pixel, |c| action.is_on(c))
    }

    /// Contribution kernel shared by the simulator and the rollout
    /// evaluators. Always iterates the covering list in ascending cell id
    /// order so that every evaluation path accumulates bit-identically.
    pub fn contribution_where<F: Fn(usize) -> bool>(&self, pixel: usize, is_on: F) -> f64 {
        let mut total = 0.0;
        for &(c, v) in &self.covering[pixel] {
            if is_on(c) {
                total += v;
            }
        }
        total
    }
}
