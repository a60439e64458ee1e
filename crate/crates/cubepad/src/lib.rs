//! Toolkit for saliency-style processing of 360° video in cubemap space.
//!
//! The core idea: project an equirectangular frame onto the six faces of a
//! cube, run convolutional layers over the face stack, and replace zero
//! padding with *cube padding* — each face borrows its border rows and
//! columns from the geometrically adjacent faces, so features stay
//! continuous across the whole viewing sphere.
//!
//! The crate provides:
//!
//! * [`tensor`] — a dense f32 tensor, equirectangular/cubemap wrappers, and
//!   bit-exact `CPT1` file I/O plus PNG/PFM import/export,
//! * [`sphere`] — equirect ↔ cubemap projections, gnomonic NFoV rendering,
//!   and whole-sphere rotation,
//! * [`padding`] — the face adjacency table, cube padding, zero padding, and
//!   the overlapping-face baseline,
//! * [`nn`] — forward CNN primitives over face stacks, the weakly-supervised
//!   saliency head, a ConvLSTM cell, and the four pipeline variants,
//! * [`loss`] — flow-warped temporal losses and their analytic gradients,
//! * [`eval`] — ground-truth heatmap synthesis and the AUC-Judd, AUC-Borji
//!   and CC saliency metrics,
//! * [`pilot`] — NFoV viewpoint scoring and trajectory linking,
//! * [`bench`] — a throughput harness comparing the padding strategies.
//!
//! Runnable demos live under `examples/`; the `cubepad` binary exposes the
//! same machinery as subcommands.

pub mod bench;
pub mod cli;
pub mod error;
pub mod eval;
pub mod image_io;
pub mod loss;
pub mod nn;
pub mod padding;
pub mod pilot;
pub mod sphere;
pub mod tensor;

pub use error::{Error, Result};
pub use tensor::{CubeMap, EquirectMap, Tensor};
