//! Tuning sessions, gain ladders, evaluation experiments and the file
//! plumbing behind the command-line tool.

mod commands;
mod config;
mod experiments;
mod ladder;
mod session;

pub use commands::{Artifact, Manifest};
pub use config::{BlockOptim, PriorTable, RepeatConfig, SessionConfig};
pub use experiments::{
    auto_beats_not, evaluate_tuning, hand_proxy, repeatability_experiment, write_crops,
    write_repeat_csv, BlockComparison, Evaluation, Flow, RepeatRow, AUTO_TUNED, HAND_TUNED,
    NOT_TUNED,
};
pub use ladder::{transition_smoothness, tune_ladder, TransitionTable, TuningLadder};
pub use session::{
    derive_seed, tune_block, tune_pipeline, BlockRecord, BlockTuning, GainData, GainTuning, Start,
};

pub mod cli {
    //! Implementations of the command-line subcommands.
    pub use super::commands::{
        run_calibrate, run_evaluate, run_make_ref, run_repeat, run_smoothness, run_synth, run_tune,
        FlatInput, TuneMode,
    };
}
