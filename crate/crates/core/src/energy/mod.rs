//! Error terms, weighted norms, the energy functional and the reduced
//! functional of the ring ansatz.

pub mod appendix;
mod fields;
mod functional;
mod norms;
mod reduced;

pub use fields::{error_field, power_excess, ErrorField, Which};
pub use functional::{
    expansion_check, pairing_Z, ExpansionCheck, JParts, J_direct_mc, J_full, J_full_parts, KernelMode, McSpec,
    PhiSymmetry, DEFAULT_EXPANSION_TOLERANCE,
};
pub use norms::{
    decay_fit, decay_fit_with, loglog_fit, norm_on_grid, sector_grid, weight, weighted_norm, DecayFit, GridSpec,
    NormEstimate, NormKind, WeightedNormSpec,
};
pub use reduced::{F_reduced, F_reduced_grad, ReducedFunctional};

#[cfg(test)]
pub(crate) mod test_support {
    use std::sync::OnceLock;

    use crate::coeffs::{compute_constants, ExpansionConstants};
    use crate::model::ProblemParams;
    use crate::quad::QuadratureSpec;

    /// Constants of the reference parameters, computed once per test binary.
    pub fn reference_constants() -> &'static ExpansionConstants {
        static CONSTANTS: OnceLock<ExpansionConstants> = OnceLock::new();
        CONSTANTS.get_or_init(|| {
            compute_constants(&ProblemParams::reference(), &QuadratureSpec::default()).expect("reference constants")
        })
    }
}
