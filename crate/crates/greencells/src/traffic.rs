//! Time-indexed traffic demand.
//!
//! A [`DemandTrace`] holds one demand sample per cell per time step
//! (megabits/hour). A cell's demand is spread uniformly over the pixels it
//! covers, and a pixel covered by several cells receives the sum of its
//! shares. [`DemandModel`] optionally perturbs the spread demand with
//! mean-one multiplicative uniform noise for Monte-Carlo rollouts.
//!
//! Real operator data is proprietary, so [`generate_diurnal_trace`] provides
//! a synthetic stand-in: a sinusoidal daily pattern with its minimum at 03:00
//! and a configurable trough level.

use std::fs;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::network::Network;
use crate::rng::SimRng;

#[derive(Debug, Error)]
pub enum TrafficError {
    #[error("trace document does not conform to the schema: {0}")]
    Schema(#[from] serde_json::Error),
    #[error("failed to read trace: {0}")]
    Io(#[from] std::io::Error),
    #[error("unknown cell {cell} in trace (network has {nr_cells} cells)")]
    UnknownCell { cell: usize, nr_cells: usize },
    #[error("duplicate trace entry for cell {cell}")]
    DuplicateCell { cell: usize },
    #[error("trace is missing samples for cell {cell}")]
    MissingCell { cell: usize },
    #[error("ragged trace: cell {cell} has {got} samples, expected {expected}")]
    Ragged {
        cell: usize,
        got: usize,
        expected: usize,
    },
    #[error("cell {cell} step {step}: demand must be >= 0 and finite, got {value}")]
    NegativeDemand { cell: usize, step: usize, value: f64 },
    #[error("step {t} is outside the trace horizon of {horizon} steps")]
    StepOutOfRange { t: usize, horizon: usize },
    #[error("step_minutes must be positive, got {0}")]
    InvalidStepMinutes(u32),
    #[error("step_minutes must divide 1440, got {0}")]
    StepDoesNotDivideDay(u32),
    #[error("{name} must lie in {range}, got {value}")]
    InvalidFraction {
        name: &'static str,
        range: &'static str,
        value: f64,
    },
    #[error("days must be >= 1")]
    InvalidDays,
    #[error("peak demand must be >= 0 and finite, got {0}")]
    InvalidPeak(f64),
}

/// Per-cell demand samples on a fixed time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DemandTrace {
    step_minutes: u32,
    /// `samples[cell][step]`, megabits per hour.
    samples: Vec<Vec<f64>>,
    horizon_steps: usize,
}

/// Trace document: the on-disk form of a demand trace (JSON).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceDoc {
    pub step_minutes: u32,
    pub samples: Vec<CellSamples>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSamples {
    pub cell: usize,
    pub values: Vec<f64>,
}

impl DemandTrace {
    /// Validate per-cell samples (indexed by cell id) against `net`.
    pub fn from_samples(
        step_minutes: u32,
        samples: Vec<Vec<f64>>,
        net: &Network,
    ) -> Result<Self, TrafficError> {
        if step_minutes == 0 {
            return Err(TrafficError::InvalidStepMinutes(0));
        }
        if samples.len() != net.nr_cells() {
            // Report the first id that is off either way.
            if samples.len() > net.nr_cells() {
                return Err(TrafficError::UnknownCell {
                    cell: net.nr_cells(),
                    nr_cells: net.nr_cells(),
                });
            }
            return Err(TrafficError::MissingCell { cell: samples.len() });
        }
        let horizon_steps = samples.first().map_or(0, Vec::len);
        for (cell, values) in samples.iter().enumerate() {
            if values.len() != horizon_steps {
                return Err(TrafficError::Ragged {
                    cell,
                    got: values.len(),
                    expected: horizon_steps,
                });
            }
            for (step, &v) in values.iter().enumerate() {
                if !(v.is_finite() && v >= 0.0) {
                    return Err(TrafficError::NegativeDemand { cell, step, value: v });
                }
            }
        }
        Ok(DemandTrace {
            step_minutes,
            samples,
            horizon_steps,
        })
    }

    /// Build a trace from its document form, validated against `net`.
    pub fn from_document(doc: &TraceDoc, net: &Network) -> Result<Self, TrafficError> {
        let mut samples: Vec<Option<Vec<f64>>> = vec![None; net.nr_cells()];
        for entry in &doc.samples {
            if entry.cell >= net.nr_cells() {
                return Err(TrafficError::UnknownCell {
                    cell: entry.cell,
                    nr_cells: net.nr_cells(),
                });
            }
            if samples[entry.cell].is_some() {
                return Err(TrafficError::DuplicateCell { cell: entry.cell });
            }
            samples[entry.cell] = Some(entry.values.clone());
        }
        let mut dense = Vec::with_capacity(net.nr_cells());
        for (cell, values) in samples.into_iter().enumerate() {
            dense.push(values.ok_or(TrafficError::MissingCell { cell })?);
        }
        DemandTrace::from_samples(doc.step_minutes, dense, net)
    }

    pub fn from_json_str(json: &str, net: &Network) -> Result<Self, TrafficError> {
        let doc: TraceDoc = serde_json::from_str(json)?;
        DemandTrace::from_document(&doc, net)
    }

    pub fn load_json(path: impl AsRef<Path>, net: &Network) -> Result<Self, TrafficError> {
        let text = fs::read_to_string(path)?;
        DemandTrace::from_json_str(&text, net)
    }

    pub fn to_document(&self) -> TraceDoc {
        TraceDoc {
            step_minutes: self.step_minutes,
            samples: self
                .samples
                .iter()
                .enumerate()
                .map(|(cell, values)| CellSamples {
                    cell,
                    values: values.clone(),
                })
                .collect(),
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("trace serialization")
    }

    pub fn step_minutes(&self) -> u32 {
        self.step_minutes
    }

    pub fn horizon_steps(&self) -> usize {
        self.horizon_steps
    }

    /// Total covered time in minutes.
    pub fn total_minutes(&self) -> u64 {
        self.horizon_steps as u64 * self.step_minutes as u64
    }

    /// Demand of `cell` at trace step `t` (megabits/hour).
    pub fn sample(&self, cell: usize, t: usize) -> f64 {
        self.samples[cell][t]
    }

    /// Trace step holding at absolute time `t_minutes` (zero-order hold).
    pub fn step_at_minute(&self, t_minutes: u64) -> Result<usize, TrafficError> {
        let t = (t_minutes / self.step_minutes as u64) as usize;
        if t >= self.horizon_steps {
            return Err(TrafficError::StepOutOfRange {
                t,
                horizon: self.horizon_steps,
            });
        }
        Ok(t)
    }
}

/// How spread demand is perturbed per pixel draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseKind {
    None,
    MultiplicativeUniform,
}

/// A demand trace plus its stochastic perturbation model.
#[derive(Debug, Clone, PartialEq)]
pub struct DemandModel {
    trace: DemandTrace,
    noise_kind: NoiseKind,
    noise_halfwidth: f64,
}

impl DemandModel {
    /// Demand exactly as traced; `pixel_demand` never touches the RNG.
    pub fn deterministic(trace: DemandTrace) -> Self {
        DemandModel {
            trace,
            noise_kind: NoiseKind::None,
            noise_halfwidth: 0.0,
        }
    }

    /// Each pixel draw is scaled by a factor uniform on
    /// `[1 - halfwidth, 1 + halfwidth]` (mean one).
    pub fn with_uniform_noise(trace: DemandTrace, halfwidth: f64) -> Result<Self, TrafficError> {
        if !(halfwidth.is_finite() && (0.0..1.0).contains(&halfwidth)) {
            return Err(TrafficError::InvalidFraction {
                name: "noise_halfwidth",
                range: "[0, 1)",
                value: halfwidth,
            });
        }
        Ok(DemandModel {
            trace,
            noise_kind: if halfwidth == 0.0 {
                NoiseKind::None
            } else {
                NoiseKind::MultiplicativeUniform
            },
            noise_halfwidth: halfwidth,
        })
    }

    pub fn trace(&self) -> &DemandTrace {
        &self.trace
    }

    pub fn noise_kind(&self) -> NoiseKind {
        self.noise_kind
    }

    pub fn noise_halfwidth(&self) -> f64 {
        self.noise_halfwidth
    }

    pub fn is_deterministic(&self) -> bool {
        self.noise_kind == NoiseKind::None
    }

    /// Demand at `pixel` during trace step `t` (megabits/hour).
    ///
    /// Each covering cell contributes its sample split uniformly over the
    /// pixels it covers; with noise enabled the summed value is scaled by one
    /// uniform draw from `rng` (drawn for every pixel, even zero-demand ones,
    /// so the stream stays aligned across evaluation paths).
    pub fn pixel_demand(
        &self,
        net: &Network,
        t: usize,
        pixel: usize,
        rng: &mut SimRng,
    ) -> Result<f64, TrafficError> {
        if t >= self.trace.horizon_steps {
            return Err(TrafficError::StepOutOfRange {
                t,
                horizon: self.trace.horizon_steps,
            });
        }
        let mut demand = 0.0;
        for &(c, _) in net.covering(pixel) {
            let covered = net.cell(c).contributions.len();
            demand += self.trace.samples[c][t] / covered as f64;
        }
        match self.noise_kind {
            NoiseKind::None => Ok(demand),
            NoiseKind::MultiplicativeUniform => {
                let factor = rng
                    .random_range(1.0 - self.noise_halfwidth..=1.0 + self.noise_halfwidth);
                Ok(demand * factor)
            }
        }
    }
}

/// Daily demand factor at `minute_of_day`: 1 at the 15:00 peak, falling to
/// `trough_fraction` at the 03:00 trough.
pub fn diurnal_factor(minute_of_day: u32, trough_fraction: f64) -> f64 {
    let phase = 2.0 * std::f64::consts::PI * (minute_of_day as f64 - 180.0) / 1440.0;
    trough_fraction + (1.0 - trough_fraction) * 0.5 * (1.0 - phase.cos())
}

/// Synthesize a per-cell diurnal trace: sinusoid between `peak_demand` and
/// `trough_fraction * peak_demand`, optionally jittered per sample by a
/// mean-one multiplicative factor of halfwidth `noise_fraction`.
pub fn generate_diurnal_trace(
    net: &Network,
    days: u32,
    peak_demand: f64,
    trough_fraction: f64,
    step_minutes: u32,
    noise_fraction: f64,
    rng: &mut SimRng,
) -> Result<DemandTrace, TrafficError> {
    if days == 0 {
        return Err(TrafficError::InvalidDays);
    }
    if !(peak_demand.is_finite() && peak_demand >= 0.0) {
        return Err(TrafficError::InvalidPeak(peak_demand));
    }
    if !(trough_fraction.is_finite() && (0.0..=1.0).contains(&trough_fraction)) {
        return Err(TrafficError::InvalidFraction {
            name: "trough_fraction",
            range: "[0, 1]",
            value: trough_fraction,
        });
    }
    if !(noise_fraction.is_finite() && (0.0..1.0).contains(&noise_fraction)) {
        return Err(TrafficError::InvalidFraction {
            name: "noise_fraction",
            range: "[0, 1)",
            value: noise_fraction,
        });
    }
    if step_minutes == 0 {
        return Err(TrafficError::InvalidStepMinutes(0));
    }
    if 1440 % step_minutes != 0 {
        return Err(TrafficError::StepDoesNotDivideDay(step_minutes));
    }

    let steps = (days as usize) * (1440 / step_minutes) as usize;
    let mut samples = Vec::with_capacity(net.nr_cells());
    for _cell in 0..net.nr_cells() {
        let mut values = Vec::with_capacity(steps);
        for i in 0..steps {
            let minute_of_day = (i as u32 * step_minutes) % 1440;
            let mut v = peak_demand * diurnal_factor(minute_of_day, trough_fraction);
            if noise_fraction > 0.0 {
                v *= rng.random_range(1.0 - noise_fraction..=1.0 + noise_fraction);
            }
            values.push(v.max(0.0));
        }
        samples.push(values);
    }
    DemandTrace::from_samples(step_minutes, samples, net)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{Cell, LayerCode, Pixel};
    use crate::rng::rng_from_seed;

    /// One E cell covering `n` pixels plus optional capacity cells.
    fn net_with(cells: Vec<(LayerCode, Vec<usize>)>, nr_pixels: usize) -> Network {
        let cells = cells
            .into_iter()
            .enumerate()
            .map(|(id, (layer, pixels))| Cell {
                id,
                station_id: 0,
                layer,
                base_power: 10.0,
                cost_per_mb: 0.1,
                contributions: pixels.into_iter().map(|p| (p, 1.0)).collect(),
            })
            .collect();
        let pixels = (0..nr_pixels)
            .map(|id| Pixel {
                id,
                grid_x: id as i64,
                grid_y: 0,
            })
            .collect();
        Network::new(cells, pixels).unwrap()
    }

    #[test]
    fn uniform_split_over_covered_pixels() {
        let net = net_with(vec![(LayerCode::E, vec![0, 1, 2, 3])], 4);
        let trace = DemandTrace::from_samples(60, vec![vec![100.0]], &net).unwrap();
        let model = DemandModel::deterministic(trace);
        let mut rng = rng_from_seed(0);
        for p in 0..4 {
            assert_eq!(model.pixel_demand(&net, 0, p, &mut rng).unwrap(), 25.0);
        }
    }

    #[test]
    fn shares_from_multiple_cells_add() {
        // Cell 0 (E): demand 40 over 2 pixels; cell 1: demand 90 over 3 pixels.
        let net = net_with(
            vec![
                (LayerCode::E, vec![0, 1]),
                (LayerCode::T, vec![0, 2, 3]),
                (LayerCode::E, vec![2, 3]),
            ],
            4,
        );
        let trace =
            DemandTrace::from_samples(60, vec![vec![40.0], vec![90.0], vec![0.0]], &net).unwrap();
        let model = DemandModel::deterministic(trace);
        let mut rng = rng_from_seed(0);
        assert_eq!(model.pixel_demand(&net, 0, 0, &mut rng).unwrap(), 50.0);
        assert_eq!(model.pixel_demand(&net, 0, 1, &mut rng).unwrap(), 20.0);
        assert_eq!(model.pixel_demand(&net, 0, 2, &mut rng).unwrap(), 30.0);
    }

    #[test]
    fn zero_traced_cells_give_zero_demand() {
        let net = net_with(vec![(LayerCode::E, vec![0])], 1);
        let trace = DemandTrace::from_samples(60, vec![vec![0.0, 0.0]], &net).unwrap();
        let model = DemandModel::deterministic(trace);
        let mut rng = rng_from_seed(9);
        assert_eq!(model.pixel_demand(&net, 1, 0, &mut rng).unwrap(), 0.0);
    }

    #[test]
    fn step_out_of_range_is_reported() {
        let net = net_with(vec![(LayerCode::E, vec![0])], 1);
        let trace = DemandTrace::from_samples(60, vec![vec![1.0]], &net).unwrap();
        let model = DemandModel::deterministic(trace);
        let mut rng = rng_from_seed(0);
        assert!(matches!(
            model.pixel_demand(&net, 1, 0, &mut rng),
            Err(TrafficError::StepOutOfRange { t: 1, horizon: 1 })
        ));
    }

    #[test]
    fn load_rejects_unknown_cell() {
        let net = net_with(vec![(LayerCode::E, vec![0])], 1);
        let json = r#"{"step_minutes":60,"samples":[{"cell":0,"values":[1.0]},{"cell":7,"values":[1.0]}]}"#;
        assert!(matches!(
            DemandTrace::from_json_str(json, &net),
            Err(TrafficError::UnknownCell { cell: 7, .. })
        ));
    }

    #[test]
    fn load_rejects_ragged_trace() {
        let net = net_with(vec![(LayerCode::E, vec![0]), (LayerCode::T, vec![0])], 1);
        let json = r#"{"step_minutes":60,"samples":[{"cell":0,"values":[1.0,2.0]},{"cell":1,"values":[]}]}"#;
        assert!(matches!(
            DemandTrace::from_json_str(json, &net),
            Err(TrafficError::Ragged { cell: 1, got: 0, expected: 2 })
        ));
    }

    #[test]
    fn load_rejects_negative_demand() {
        let net = net_with(vec![(LayerCode::E, vec![0])], 1);
        let json = r#"{"step_minutes":60,"samples":[{"cell":0,"values":[-1.0]}]}"#;
        assert!(matches!(
            DemandTrace::from_json_str(json, &net),
            Err(TrafficError::NegativeDemand { cell: 0, step: 0, .. })
        ));
    }

    #[test]
    fn hourly_trace_parses_to_24_steps() {
        let net = net_with(vec![(LayerCode::E, vec![0])], 1);
        let values: Vec<f64> = (0..24).map(|i| i as f64).collect();
        let doc = TraceDoc {
            step_minutes: 60,
            samples: vec![CellSamples { cell: 0, values }],
        };
        let trace = DemandTrace::from_document(&doc, &net).unwrap();
        assert_eq!(trace.horizon_steps(), 24);
        assert_eq!(trace.total_minutes(), 1440);
        let reloaded = DemandTrace::from_json_str(&trace.to_json_string(), &net).unwrap();
        assert_eq!(trace, reloaded);
    }

    #[test]
    fn diurnal_trough_one_is_constant_at_peak() {
        let net = net_with(vec![(LayerCode::E, vec![0])], 1);
        let mut rng = rng_from_seed(1);
        let trace = generate_diurnal_trace(&net, 1, 120.0, 1.0, 60, 0.0, &mut rng).unwrap();
        for t in 0..24 {
            assert_eq!(trace.sample(0, t), 120.0);
        }
    }

    #[test]
    fn diurnal_zero_peak_is_all_zero() {
        let net = net_with(vec![(LayerCode::E, vec![0])], 1);
        let mut rng = rng_from_seed(1);
        let trace = generate_diurnal_trace(&net, 2, 0.0, 0.3, 60, 0.2, &mut rng).unwrap();
        for t in 0..trace.horizon_steps() {
            assert_eq!(trace.sample(0, t), 0.0);
        }
    }

    #[test]
    fn diurnal_minimum_hits_trough_fraction() {
        let net = net_with(vec![(LayerCode::E, vec![0])], 1);
        let mut rng = rng_from_seed(1);
        let trace = generate_diurnal_trace(&net, 1, 200.0, 0.1, 60, 0.0, &mut rng).unwrap();
        let min = (0..24)
            .map(|t| trace.sample(0, t))
            .fold(f64::INFINITY, f64::min);
        assert!((min - 0.1 * 200.0).abs() < 1e-9, "min was {min}");
    }

    #[test]
    fn diurnal_rejects_bad_fractions() {
        let net = net_with(vec![(LayerCode::E, vec![0])], 1);
        let mut rng = rng_from_seed(1);
        assert!(generate_diurnal_trace(&net, 1, 1.0, 1.5, 60, 0.0, &mut rng).is_err());
        assert!(generate_diurnal_trace(&net, 1, 1.0, 0.5, 60, 1.0, &mut rng).is_err());
        assert!(generate_diurnal_trace(&net, 0, 1.0, 0.5, 60, 0.0, &mut rng).is_err());
        assert!(generate_diurnal_trace(&net, 1, 1.0, 0.5, 7, 0.0, &mut rng).is_err());
    }

    #[test]
    fn same_seed_same_noisy_values() {
        let net = net_with(vec![(LayerCode::E, vec![0, 1])], 2);
        let trace = DemandTrace::from_samples(60, vec![vec![10.0, 20.0]], &net).unwrap();
        let model = DemandModel::with_uniform_noise(trace, 0.3).unwrap();
        let draw = |seed: u64| {
            let mut rng = rng_from_seed(seed);
            (0..8)
                .map(|i| model.pixel_demand(&net, i % 2, i / 4, &mut rng).unwrap())
                .collect::<Vec<_>>()
        };
        assert_eq!(draw(5), draw(5));
        assert_ne!(draw(5), draw(6));
    }

    #[test]
    fn noise_is_mean_preserving_empirically() {
        let net = net_with(vec![(LayerCode::E, vec![0])], 1);
        let trace = DemandTrace::from_samples(60, vec![vec![50.0]], &net).unwrap();
        let model = DemandModel::with_uniform_noise(trace, 0.4).unwrap();
        let mut rng = rng_from_seed(13);
        let n = 100_000;
        let mut sum = 0.0;
        for _ in 0..n {
            sum += model.pixel_demand(&net, 0, 0, &mut rng).unwrap();
        }
        let mean = sum / n as f64;
        assert!(
            (mean - 50.0).abs() / 50.0 < 0.01,
            "empirical mean {mean} deviates more than 1% from 50"
        );
    }

    #[test]
    fn mass_conservation_without_noise() {
        // Three cells with overlapping coverage; E cell 0 covers everything.
        let net = net_with(
            vec![
                (LayerCode::E, vec![0, 1, 2, 3, 4]),
                (LayerCode::T, vec![1, 2]),
                (LayerCode::A, vec![2, 3, 4]),
            ],
            5,
        );
        let samples = vec![vec![33.0, 7.5], vec![10.0, 0.0], vec![81.25, 12.0]];
        let trace = DemandTrace::from_samples(60, samples.clone(), &net).unwrap();
        let model = DemandModel::deterministic(trace);
        let mut rng = rng_from_seed(0);
        for t in 0..2 {
            let spread: f64 = (0..5)
                .map(|p| model.pixel_demand(&net, t, p, &mut rng).unwrap())
                .sum();
            let traced: f64 = samples.iter().map(|s| s[t]).sum();
            assert!(
                (spread - traced).abs() <= 1e-9 * traced.max(1.0),
                "step {t}: spread {spread} vs traced {traced}"
            );
        }
    }
}
