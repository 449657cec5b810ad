pub mod eval;
pub mod fit;
pub mod gradcheck;
pub mod sensitivity;
pub mod synth;
