pub mod corpus;
pub mod driftgen;
pub mod evaluate;
pub mod experiment;
pub mod lexswap;
pub mod synth;
pub mod detect;
pub mod learners;
pub mod vectorize;
