//! Deterministic identification codes built from nested spherical
//! arrangements.
//!
//! A codebook is a tree of sphere arrangements: each layer places points on
//! a sphere inside the orthogonal complement of the directions above it, and
//! codewords are the leaves. The receiver tests one hypothesized id at a
//! time by projecting its output onto each layer direction of that id.
//!
//! ```
//! use di_forge::channels::ChannelModel;
//! use di_forge::codebook::{CodebookParams, PrimitiveCodebook};
//! use di_forge::decoder::{identify, DecoderParams};
//!
//! let n = 64;
//! let t = (n as f64).ln();
//! let cb = PrimitiveCodebook::build(CodebookParams::separated(n, t, vec![4, 4], 7))?;
//! let ids = cb.leaf_ids();
//! let word = cb.codeword_vector(&ids[3])?;
//!
//! let decoder = DecoderParams::capacity(n);
//! assert!(identify(&word, &cb, &ids[3], &decoder)?.accepted);
//! assert!(!identify(&word, &cb, &ids[4], &decoder)?.accepted);
//! # let _ = ChannelModel::bernoulli(n);
//! # Ok::<(), di_forge::Error>(())
//! ```

pub mod channels;
pub mod codebook;
pub mod decoder;
pub mod error;
pub mod experiments;
pub mod geometry;
pub(crate) mod linalg;
pub mod rng;

// the guide's snippets run as doc-tests
#[cfg(doctest)]
mod guide {
    #[doc = include_str!("../../../README.md")]
    struct Readme;
    #[doc = include_str!("../../../book/src/introduction.md")]
    struct Introduction;
    #[doc = include_str!("../../../book/src/geometry.md")]
    struct Geometry;
    #[doc = include_str!("../../../book/src/codebooks.md")]
    struct Codebooks;
    #[doc = include_str!("../../../book/src/channels.md")]
    struct Channels;
    #[doc = include_str!("../../../book/src/decoding.md")]
    struct Decoding;
    #[doc = include_str!("../../../book/src/experiments.md")]
    struct Experiments;
    #[doc = include_str!("../../../book/src/cli.md")]
    struct CommandLine;
}

pub use codebook::{CodebookParams, CodewordId, PrimitiveCodebook};
pub use error::{Error, Result};
