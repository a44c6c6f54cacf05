//! Discrete paradifferential calculus on the Fourier modes `[-K, K]`.

pub mod cutoff;
pub mod flow;
pub mod operator;
pub mod symbol;

pub use cutoff::{CutoffChi, CutoffPsi};
pub use flow::{flow_smoothing, flow_transport, matrix_exp, SmoothingOperator, TransportFlow, TAU_STEPS};
pub use operator::{
    action_bound_probe, bony_weyl, commutator_order_check, hs_norm_modes, mode_unit, modes_of,
    random_unit_modes, CommutatorReport, ModeOperator, ModeVector,
};
pub use symbol::{
    real_multiplier, BracketPrincipal, GeneralSymbol, HomogeneousSymbol, Multiplier, SeparableSymbol,
    Symbol,
};
