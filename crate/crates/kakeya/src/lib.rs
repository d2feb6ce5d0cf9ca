//! Kakeya needle constructions for polyline scenes.
//!
//! A scene `E` is swept along a polygonal path of translations or intrinsic
//! rotations. At each path segment a thin slab of `E` (by tangent direction,
//! or by where the normal line meets a fixed line `ℓ`) is deleted, and the
//! area covered by the rest is measured on a raster grid.
//!
//! Modules:
//!
//! * [`geom`]: directions, projective points and lines, scenes.
//! * [`se2`]: rigid motions in `(w, φ)` coordinates and the `⋆` product.
//! * [`blind`]: Venetian blinds, the index tree, and motion plans.
//! * [`sweep`]: the raster area oracle and ratio checks.
//! * [`limits`]: finite-depth Besicovitch and Nikodym approximants.
//! * [`report`]: PGM, SVG and CSV writers.
//!
//! The guide in `book/` walks through each of these; its code blocks are
//! compiled as doc-tests of the [`guide`] module.

pub mod blind;
pub mod geom;
pub mod limits;
pub mod report;
pub mod se2;
pub mod sweep;

/// Errors from every fallible operation in the crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Malformed input: bad scene, non-finite numbers, inconsistent arguments.
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// The requested budget cannot be met within the depth, fineness or size caps.
    #[error("infeasible: {0}")]
    Infeasible(String),
    /// A geometric precondition failed, e.g. `ℓ` misses the projective center.
    #[error("precondition failed: {0}")]
    Precondition(String),
}

/// Chapters of the guide, included so their snippets run under `cargo test`.
pub mod guide {
    #[doc = include_str!("../../../book/src/intro.md")]
    pub mod intro {}
    #[doc = include_str!("../../../book/src/directions.md")]
    pub mod directions {}
    #[doc = include_str!("../../../book/src/motions.md")]
    pub mod motions {}
    #[doc = include_str!("../../../book/src/blinds.md")]
    pub mod blinds {}
    #[doc = include_str!("../../../book/src/raster.md")]
    pub mod raster {}
    #[doc = include_str!("../../../book/src/limits.md")]
    pub mod limits {}
}
