pub mod analysis;
pub mod code;
pub mod codes;
pub mod decoder;
pub mod gf2;
pub mod lattice;
pub mod matching;
pub mod pauli;
pub mod thermal;
