//! Variational subset sampling for one-dimensional bin packing.
//!
//! Each bin is a binary selection over items. A family of single-bin
//! Hamiltonians, one per target load `k * dw`, is minimized with a
//! parameterized circuit on an exact statevector simulator; the bitstrings
//! that carry probability become candidate bins, and an exact-cover search
//! assembles them into packings with the fewest bins.
//!
//! ```
//! use dcbpp::{run_experiment, AnsatzKind, BppInstance, ExperimentConfig, OptConfig};
//!
//! let inst = BppInstance::new(vec![2, 3, 4], 5).unwrap();
//! let cfg = ExperimentConfig {
//!     kind: AnsatzKind::CdMixer,
//!     opt: OptConfig { iterations: 20, trials: 1, ..OptConfig::default() },
//!     ..ExperimentConfig::default()
//! };
//! let report = run_experiment(&inst, &cfg).unwrap();
//! assert!(report.metrics.fr <= 1.0);
//! ```

pub mod ansatz;
pub mod cli;
pub mod encoding;
pub mod error;
pub mod optimizer;
pub mod oracle;
pub mod pauli;
pub mod pipeline;
pub mod seed;
pub mod simulator;

pub use ansatz::{build_circuit, decompose, gate_counts, AnsatzKind, Circuit, GateCounts};
pub use encoding::{
    build_cd_pool, build_cost_hamiltonian, build_mixer, delta_omega, k_schedule, Bitstring, BppInstance,
    CostHamiltonian, EncodingParams,
};
pub use error::{Error, Result};
pub use optimizer::{optimize, OptConfig, OptResult};
pub use oracle::{brute_force_pack, brute_force_partial, exact_ground_states, oracle, OracleResult};
pub use pauli::{nc_first_order, Pauli, PauliString, PauliSum, PauliTerm};
pub use pipeline::{
    combine_bins, feasibility_ratio, filter_feasible, run_experiment, subset_sampling, ExperimentConfig, Metrics,
    PartialSolutionSet, RunReport, RunStatus,
};
pub use simulator::{SampleSet, StateVector};
