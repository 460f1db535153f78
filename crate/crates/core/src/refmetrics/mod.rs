//! Reference metrics used alongside EBLEU: NIST, TER, METEOR, LEPOR and RIBES.
//!
//! These follow the standard definitions of each metric; they are not
//! bit-compatible ports of the original evaluation scripts.

mod lepor;
mod meteor;
mod nist;
mod ribes;
mod ter;

pub use lepor::{length_penalty, lepor_score, LeporConfig};
pub use meteor::{align_unigrams, count_chunks, meteor_score, meteor_sentence, MeteorResult};
pub use nist::{nist_brevity_factor, nist_score, NIST_DEFAULT_ORDER};
pub use ribes::{kendall_tau, ribes_alignment, ribes_score, spearman_rho, RankCorrelation, RibesConfig};
pub use ter::{apply_shift, edit_distance, ter_edits, ter_score, TerConfig, TerEdits};
