//! Exact-arithmetic kernel for a graded Batalin-Vilkovisky calculus on
//! cyclic words and its supermatrix trace realizations.
//!
//! The crate is organized in layers:
//!
//! * [`scalar`], [`graded`], [`linalg`]: exact rationals, parities, the
//!   Koszul sign engine, graded spaces and pairings, exact rank and
//!   inversion.
//! * [`cyclic`]: cyclic words in two flavors and the graded-commutative
//!   algebra they generate.
//! * [`bv`]: the second-order operator that contracts letter pairs with the
//!   pairing, the odd bracket it generates, master-equation residuals and
//!   cohomology rank checks.
//! * [`spoly`], [`matrix`]: supercommutative polynomials in matrix entries,
//!   trace expansions of cyclic words into them, the matrix-side Laplacian
//!   and bracket, and the exact correspondence harness between the two
//!   pictures.
//! * [`derham`]: the odd Fourier transform to differential forms and the
//!   de Rham intertwining checks.
//! * [`operads`]: permutation tensors, their invariant-tensor realizations,
//!   and flag-pair contractions defined by the trace two-tensor.
//! * [`morita`]: tensoring the letter space by a matrix algebra with its
//!   trace pairing, and transport of master-equation solutions.
//! * [`equivariant`]: quadratic hamiltonians of adjoint actions, the Cartan
//!   homotopy identity, equivariantly closed combinations and lagrangian
//!   assembly.
//!
//! All arithmetic is exact over the rationals; every sign in the crate is
//! produced by [`graded::koszul_sign`].

pub mod bv;
pub mod cyclic;
pub mod error;
pub mod graded;
pub mod linalg;
pub mod matrix;
pub mod scalar;
pub mod spoly;

pub use error::Error;
