//! Maslov indices and Maslov data of loops of Lagrangian planes and of
//! symplectic circle and torus actions, on trivial circle bundles over ℝ²ⁿ
//! and on the frame bundle of the round sphere.
//!
//! Every routine is generic over a [`Real`] scalar; `f64` aliases are
//! re-exported at the crate root.

// `!(x < tol)` guards are written to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod actions;
pub mod bundle;
pub mod error;
pub mod forms;
pub mod grassmann;
pub mod quadrature;
pub mod random;
pub mod scalar;
pub mod sphere;
pub mod symplin;
pub mod verify;

pub use actions::{
    check_conservation, equal_indices_at, equal_indices_flat, flow, generator, is_fixed_point,
    lifted_flow_gamma2, local_index, momentum_map, q_beta, q_vector, resonance_type,
    CircleActionSpec, EqualIndices, MomentumAction, MomentumMap, QResult, SymplecticPotential,
    TorusActionSpec,
};
pub use bundle::{
    characteristic_number, connection_eval, curvature, holonomy, maslov_data, BundleKind,
    CharacteristicNumber, ConnectionForm, CurvatureSample, HolonomySign, MaslovDataResult,
    TangentVector, TotalSpacePoint,
};
pub use error::{MaslovError, Result};
pub use forms::{Monomial, OneForm, Polynomial};
pub use grassmann::{
    concat, det_squared, loop_degree, maslov_index, unitary_of_frame, DegreeResult,
    LagrangianFrame, LoopPayload, Phase, SampledLoop, UnitaryFrame,
};
pub use scalar::Real;
pub use sphere::{
    frame_to_so3, gamma_winding_pair, hamiltonian_of_rotation, isotropy_phase, j_s2,
    lifted_action, omega_s2, so3_to_frame, transitivity_rank, Orientation, SO3Element,
    So3Vector, SphereBundle, SphereLevel, SpherePoint, SphereRotation,
};
pub use symplin::{
    average_metric, build_compatible_j, linear_action_matrix, sqrt_spd, standard_symplectic,
    CompatibleTriple, GroupKind, GroupSampler, Metric, SymplecticForm,
};

pub type SymplecticForm64 = SymplecticForm<f64>;
pub type Metric64 = Metric<f64>;
pub type CompatibleTriple64 = CompatibleTriple<f64>;
pub type GroupSampler64 = GroupSampler<f64>;
pub type OneForm64 = OneForm<f64>;
pub type Phase64 = Phase<f64>;
pub type LagrangianFrame64 = LagrangianFrame<f64>;
pub type UnitaryFrame64 = UnitaryFrame<f64>;
pub type ConnectionForm64 = ConnectionForm<f64>;
pub type TotalSpacePoint64 = TotalSpacePoint<f64>;
pub type SO3Element64 = SO3Element<f64>;
pub type SpherePoint64 = SpherePoint<f64>;
pub type CircleActionSpec64 = CircleActionSpec<f64>;
pub type TorusActionSpec64 = TorusActionSpec<f64>;
pub type QResult64 = QResult<f64>;
