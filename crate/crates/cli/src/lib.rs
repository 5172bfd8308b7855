//! File formats, CSV handling, configuration parsing, and command
//! implementations for the `fedids` command-line tool.
//!
//! Everything numeric round-trips bit-exactly: CSV cells use Rust's
//! shortest-round-trip float formatting, and model/threshold documents use
//! 17 significant digits.

pub mod commands;
pub mod config;
pub mod csvio;
pub mod error;
pub mod formats;

use std::time::Instant;

use fedids_core::fedavg::Clock;

/// Monotonic wall clock anchored at construction.
#[derive(Debug)]
pub struct SystemClock {
    origin: Instant,
}

impl SystemClock {
    pub fn new() -> Self {
        SystemClock {
            origin: Instant::now(),
        }
    }
}

impl Default for SystemClock {
    fn default() -> Self {
        SystemClock::new()
    }
}

impl Clock for SystemClock {
    fn now_seconds(&self) -> f64 {
        self.origin.elapsed().as_secs_f64()
    }
}

/// Formats a float with 17 significant digits, enough to reproduce the exact
/// bit pattern on parse.
pub fn format_f64_exact(value: f64) -> String {
    format!("{value:.16e}")
}
