//! Numerical toolkit for de Branges spaces `H(E)` under majorization.
//!
//! The library works with a parametric Hermite–Biehler model class
//! `E(z) = κ e^{-iaz} Π_k (z - z_k)` and provides:
//!
//! - evaluation of `E`, `E♯`, the inner function `Θ = E♯/E`, the reproducing
//!   kernel `K(w, z)`, the norming function `∇` and the canonical majorant
//!   `m_E` ([`hb`]);
//! - exact Hilbert-space algebra on finite spans of reproducing kernels with
//!   an independent quadrature oracle for `∫ |F/E|²` ([`space`]);
//! - majorant-generated Banach norms `‖·‖_m`, unit-ball certificates, the
//!   sharp majorant `m♭` as a small convex program, the `≼` preorder and
//!   minimal-majorant detection ([`majorant`], [`mflat`]);
//! - sequence-space machinery: the block-difference operator on the `l³`
//!   schedule, the partial-sum norm, and validated sparse point plans
//!   ([`seq`]);
//! - the explicit `ℓ∞` embeddings built from weighted unit kernels along
//!   sparse plans, with certified upper/lower norm constants, plus
//!   Riesz-sequence extraction ([`embed`]);
//! - classification of structure functions into the norm-equivalent and
//!   `ℓ∞`-embedding regimes ([`classify`]).

pub mod classify;
pub mod embed;
pub mod fixtures;
pub mod hb;
pub mod io;
pub mod majorant;
pub mod mflat;
pub mod quadrature;
pub mod seq;
pub mod space;
pub mod suite;

pub use hb::{HbError, InnerFunctionView, KernelValue, StructureFunction};
pub use majorant::{BallCertificate, DomainSpec, Majorant, MajorantForm};
pub use seq::{PlanMode, SparsePointPlan, TruncatedSequence};
pub use space::{GramMatrix, KernelSpan};




/// Shared reference to a structure function; spans, majorants and reports
/// hold one of these.
pub type FixtureRef = std::sync::Arc<hb::StructureFunction>;
