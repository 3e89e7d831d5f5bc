//! The graph construction `E_n`, `F_n` and the baseline sets.

pub mod baselines;
pub mod family;
pub mod growth;
pub mod schedule;
pub mod serialize;

pub use baselines::{build_four_corner, build_ifs, build_random_four_corner, IfsParams};
pub use family::{
    build_box_family, build_segment_family, nestedness_check, BoxFamily, FamilyKind, Rect, Segment,
    SegmentFamily,
};
pub use growth::{GrowthPreset, GrowthSequence};
pub use schedule::{
    derive_increments, derive_schedule, eval_base_step, eval_base_step_exact, eval_fn, eval_fn_f64,
    ScheduleParams, DEFAULT_SEPARATION,
};
pub use serialize::{box_family_to_json, family_from_json, segment_family_to_json, Family};
