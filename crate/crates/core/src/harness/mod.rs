//! Reproducible sweeps: known closed-form values, the inequality and
//! identity checks over domains, radii and random members, report
//! emission and plot data.

pub mod config;
pub mod known;
pub mod plot;
pub mod report;
pub mod sweep;

pub use config::SweepConfig;
pub use known::known_values;
pub use plot::emit_plot_data;
pub use report::{EqualityCandidate, Report, Row, Summary};
pub use sweep::{verify_all, verify_function};
