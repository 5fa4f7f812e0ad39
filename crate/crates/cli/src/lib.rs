//! Noise-budget tooling on top of `qnl-core`: sweep configuration, budget
//! tables, the spin-meter figure series and a verification suite.

pub mod budget;
pub mod config;
pub mod figure;
pub mod output;
pub mod verify;

pub use budget::{run_budget, BudgetError, BudgetRow, BudgetTable};
pub use config::SweepConfig;
pub use figure::{spin_figure, FigureTable};
pub use verify::{verify, VerifyOptions, VerifyReport};
