//! Self-consistency guidelines as executable comparisons of two measured cases.

mod checks;
mod verdict;

pub use checks::{
    alt_description_cases, check_alternatives, check_g1, check_g2_g3, check_g4, g1_case,
    g2_g3_case, g4_case, same_measurement, write_verdict_csv, CheckOptions, GuidelineCase,
    GuidelineVerdict,
};
pub use verdict::{judge, GuidelineId, Judgement, Relation, DEFAULT_THRESHOLD};
