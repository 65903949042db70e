//! Training runs, test-set evaluation, grid sweeps and result emission.

mod config;
mod emit;
mod train;

pub use config::{
    named_grid, table1_grid, Overrides, Preset, RunConfig, Table1Row, DEFAULT_WIDTH, TABLE1,
};
pub use emit::{emit, emit_csv, emit_plotdata, format_accuracy, EmitFormat, CSV_HEADER};
pub use train::{
    evaluate, sweep, sweep_with_progress, train, train_with_progress, SweepRecord, TrainOutcome,
    TrainReport,
};
