//! Motif extraction: cycle bases, cycle merging, bridge edges and the
//! corpus-frequency dictionary.

mod cycles;
mod dictionary;
mod extract;

pub use cycles::{bridges, canonical_cycle, cycle_edges, enumerate_simple_cycles, find_cycles, Cycle};
pub use dictionary::{
    build_motif_dictionary, motif_key, unit_motifs, MotifDictionary, MotifKey, DEFAULT_MIN_SUPPORT,
};
pub(crate) use dictionary::dictionary_from_units;
pub use extract::{extract_motifs, merge_cycles, CycleGroup, Motif, MotifKind};
