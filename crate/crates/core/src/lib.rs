//! Poisson summation on lattices and noncommutative tori.
//!
//! Lattice arithmetic and radial transforms on `L_τ = Z + τZ`, pseudo-lattice
//! arithmetic on `μ(Z + θZ)`, finite clock/shift models of the rotation
//! algebra with trace elements realising lattice sums, lattice-point counting
//! in ellipses, and the Gauss–Kuzmin–Wirsing transfer operator.

pub mod bessel;
pub mod contfrac;
pub mod error;
pub mod gauss_circle;
pub mod lattice;
pub mod nc_torus;
pub mod numeric;
pub mod pseudo_lattice;
pub mod radial;
pub mod selftest;
pub mod transfer;

pub use error::{Error, Result};
pub use lattice::{ComplexModulus, Form, LatticePoint, RadialProfile, Support, TailModel};
pub use radial::{KfSpectrum, PoissonReport};
pub use pseudo_lattice::{Approximant, Direction, IndexBijection, PseudoLattice};
pub use contfrac::{CfExpansion, CfTermination, Convergent, RealInterval};
pub use gauss_circle::{CMModulus, SmoothStep};
pub use nc_torus::{Fidelity, TraceElement};
pub use transfer::{SpectrumReport, TransferTruncation};
