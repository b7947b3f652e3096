//! Finite models of the rotation algebra `A_θ` at rational approximants
//! `p/q`, trace elements realising values `f(β)` on the pseudo-lattice, and
//! the assembled operator `A_f` with `Tr(A_f) = Σ f(L_τ)`.

pub mod algebra;
pub mod elements;
pub mod rieffel;
pub mod theorem;

pub use algebra::{build_rep, SampledCircleFunction, ShiftPoly, TorusRep};
pub use elements::{decompose, lemma2_element, trace_element, trace_element_at, Construction, Fidelity, TraceElement};
pub use rieffel::{b0_build, phi_solve, rieffel_projection, rieffel_report, B0Report, PhiSolution, RieffelFunction, RieffelReport};
pub use theorem::{
    assemble_af, commutator_defect, faithful_gap_bound, theorem1_verify, AfOperator, Theorem1Report, FAITHFUL_GAP_CONSTANT,
};
