//! Classification of self-dual skew-Hermitian modules over the dyadic
//! quadratic order Z_2[X]/(X^2 + p) for primes p = 3 mod 4, where the order
//! is not maximal.
//!
//! A module is a Z_2-lattice with an action of omega = X - 1 and a
//! unimodular alternating pairing compatible with the ring involution. The
//! crate computes the complete isometry invariant (r, s, form class): s
//! counts hyperbolic standard summands, r the rank of the free part, and the
//! form class is a symmetric-bilinear congruence class over F_2 (read over
//! F_4 when 2 stays inert). All arithmetic is exact at a fixed, explicitly
//! tracked 2-adic precision.
//!
//! Module map:
//! - [`padic`]: linear algebra over Z/p^k (Smith form, kernels, saturation);
//! - [`orders`]: the rings Z_2[omega] and Z_2[alpha], Hensel root lifting,
//!   and the principal-unit norm solver;
//! - [`rmodule`]: classification of the underlying omega-modules;
//! - [`skewmod`]: the central (action, pairing) data type, standard modules,
//!   disguises, serialization, and the Hermitian lift;
//! - [`split`] / [`inert`]: the two complete classifiers (p = 7 mod 8 and
//!   p = 3 mod 8);
//! - [`forms`]: symmetric forms over F_2 and the unitary double-coset
//!   verification machinery over F_4;
//! - [`hermlat`]: the companion toolkit for Hermitian lattices over local
//!   maximal orders at odd primes (Jordan splittings and isometry);
//! - [`catalog`]: case-dispatching helpers and class enumeration.

pub mod catalog;
pub mod error;
pub mod forms;
pub mod hermlat;
pub mod inert;
pub mod orders;
pub mod padic;
pub mod rmodule;
pub mod rng;
pub mod skewmod;
pub mod split;

pub use error::{Error, Result};
