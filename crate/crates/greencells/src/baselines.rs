//! Reference controllers the synthesized strategies are measured against.

use thiserror::Error;

use crate::action::ActionVector;
use crate::sim::{ControlContext, Controller};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BaselineError {
    #[error("night window must satisfy 0 <= start < end <= 1440, got [{start}, {end})")]
    InvalidWindow { start: u32, end: u32 },
}

/// Keeps every cell ON at every period.
#[derive(Debug, Clone, Copy, Default)]
pub struct AllOnController;

impl Controller for AllOnController {
    fn name(&self) -> &str {
        "allon"
    }

    fn decide(&mut self, ctx: &ControlContext<'_>) -> ActionVector {
        ActionVector::all_on(ctx.net)
    }
}

/// Fixed nightly OFF window for capacity cells, minutes since midnight.
/// Defaults to 01:00–06:00.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NightScheduleConfig {
    pub off_start_minute: u32,
    pub off_end_minute: u32,
}

impl Default for NightScheduleConfig {
    fn default() -> Self {
        NightScheduleConfig {
            off_start_minute: 60,
            off_end_minute: 360,
        }
    }
}

impl NightScheduleConfig {
    pub fn new(off_start_minute: u32, off_end_minute: u32) -> Result<Self, BaselineError> {
        if off_start_minute >= off_end_minute || off_end_minute > 1440 {
            return Err(BaselineError::InvalidWindow {
                start: off_start_minute,
                end: off_end_minute,
            });
        }
        Ok(NightScheduleConfig {
            off_start_minute,
            off_end_minute,
        })
    }

    /// Half-open test on a period's start time.
    pub fn is_off_window(&self, minute_of_day: u32) -> bool {
        (self.off_start_minute..self.off_end_minute).contains(&minute_of_day)
    }
}

/// Switches capacity cells OFF for periods starting inside the configured
/// night window; coverage cells stay ON always.
#[derive(Debug, Clone, Copy)]
pub struct NightScheduleController {
    cfg: NightScheduleConfig,
}

impl NightScheduleController {
    pub fn new(cfg: NightScheduleConfig) -> Self {
        NightScheduleController { cfg }
    }
}

impl Controller for NightScheduleController {
    fn name(&self) -> &str {
        "night"
    }

    fn decide(&mut self, ctx: &ControlContext<'_>) -> ActionVector {
        let minute_of_day = (ctx.t_minutes % 1440) as u32;
        if self.cfg.is_off_window(minute_of_day) {
            let on: Vec<bool> = (0..ctx.net.nr_cells())
                .map(|c| ctx.net.cell(c).is_coverage_layer())
                .collect();
            ActionVector::new(ctx.net, on).expect("coverage cells are on")
        } else {
            ActionVector::all_on(ctx.net)
        }
    }
}
