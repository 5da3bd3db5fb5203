// The guide's listings run as doctests: each chapter becomes the docs of an
// empty module, so `cargo test` compiles and runs every ```rust block. One
// module per chapter keeps failures traceable to a file.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/polygons.md")]
pub mod polygons {}
#[doc = include_str!("../../../book/src/closed-forms.md")]
pub mod closed_forms {}
#[doc = include_str!("../../../book/src/oracles.md")]
pub mod oracles {}
#[doc = include_str!("../../../book/src/monte-carlo.md")]
pub mod monte_carlo {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
