pub mod episodes;
pub mod invariants;
