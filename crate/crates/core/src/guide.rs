//! The book chapters from `book/src`, attached here so that every code
//! snippet in the guide is compiled and run by `cargo test --doc`.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/wave-packets.md")]
pub mod wave_packets {}

#[doc = include_str!("../../../book/src/quadrature.md")]
pub mod quadrature {}

#[doc = include_str!("../../../book/src/entanglement-coefficient.md")]
pub mod entanglement_coefficient {}

#[doc = include_str!("../../../book/src/scattering-length.md")]
pub mod scattering_length {}

#[doc = include_str!("../../../book/src/s-matrix.md")]
pub mod s_matrix {}

#[doc = include_str!("../../../book/src/purity.md")]
pub mod purity {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
