//! Two-party quantum correlations: classical membership, semidefinite bounds on Bell
//! violations, and explicit state/observable realizations.
//!
//! Each capability has a runnable example:
//!
//! ```bash
//! cargo run --example classical_membership   # Bell polytope, enumeration, no-signalling
//! cargo run --example elliptope_bounds       # Tsirelson and elliptope bounds
//! cargo run --example npa_hierarchy          # moment-matrix levels 1, 1ab, 2
//! cargo run --example realize_chsh           # state and ±1 observables from unit vectors
//! cargo run --example clifford_generators    # anticommuting Pauli generators
//! cargo run --example stabilizer_pipeline    # GF(2) local Clifford equivalence
//! cargo run --example jl_reduction           # random projection before realizing
//! cargo run --example custom_sdp             # the SDP solver on its own
//! ```

pub mod cli;
pub mod clifford;
pub mod correlation;
pub mod lp;
pub mod npa;
pub mod numerics;
pub mod pauli;
pub mod realization;
pub mod sdp;
pub mod stabilizer;
