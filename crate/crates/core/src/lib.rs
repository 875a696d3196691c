//! Augmented Krylov subspace solvers for dense real linear systems.
//!
//! The crate provides
//!
//! * GMRES and range-restricted GMRES with progressive Givens QR ([`gmres`]),
//! * GCRO-style augmented GMRES over a projected Krylov space ([`projected`]),
//! * unprojected augmented (range-restricted) GMRES, solved through a small
//!   projected system with a progressively updated residual bound
//!   ([`r3gmres`]), together with a coupled least-squares reference,
//! * a single flexible-GMRES augmentation cycle ([`flexible`]),
//! * discrete ill-posed test problems and augmentation bases ([`problems`]).
//!
//! Everything is `no_std` with `alloc`; file formats and the experiment
//! runner live in the `augkrylov-harness` crate.

#![no_std]
#![allow(clippy::needless_range_loop)]

extern crate alloc;

pub mod arnoldi;
pub mod augment;
mod error;
pub mod flexible;
pub mod gmres;
pub mod linalg;
mod operator;
pub mod problems;
pub mod projected;
pub mod r3gmres;
mod report;

pub use arnoldi::{ArnoldiConfig, ArnoldiState, Step};
pub use augment::AugmentationSpace;
pub use error::Error;
pub use flexible::fgmres_augmented_cycle;
pub use gmres::{gmres_solve, ProgressiveQr};
pub use linalg::{DenseMatrix, GivensPair};
pub use operator::{CountingOperator, LinearOperator};
pub use problems::TestProblem;
pub use projected::{gcro_solve, GcroState};
pub use r3gmres::{r3gmres_reference, r3gmres_solve, R3State, ReferenceReport};
pub use report::{IterationRecord, OpCounts, SolveReport, SolverConfig, StopReason};
