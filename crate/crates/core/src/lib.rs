pub mod chain;
pub mod diagnostics;
pub mod error;
pub mod families;
pub mod io;
pub mod learner;
pub mod lemmas;
pub mod risk;
pub mod sampler;
pub mod spectral;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/chains.md")]
    mod chains {}
    #[doc = include_str!("../../../book/src/spectral.md")]
    mod spectral {}
    #[doc = include_str!("../../../book/src/learner.md")]
    mod learner {}
    #[doc = include_str!("../../../book/src/families.md")]
    mod families {}
    #[doc = include_str!("../../../book/src/risk.md")]
    mod risk {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
