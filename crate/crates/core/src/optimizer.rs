//! Adam minimization of a circuit's cost with seeded restarts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ansatz::Circuit;
use crate::error::{Error, Result};
use crate::pauli::PauliSum;
use crate::seed::derive_seed;
use crate::simulator::{value_and_gradient, Observable, SampleSet, StateVector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptConfig {
    pub iterations: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub trials: usize,
    pub seed: u64,
    /// Initial parameters are drawn uniformly from `[lo, hi)`.
    pub init_range: (f64, f64),
    /// Iterations after which the distribution of every trial is recorded.
    /// Iteration 0 is the initial state.
    pub snapshots: Vec<usize>,
}

impl Default for OptConfig {
    fn default() -> Self {
        Self {
            iterations: 100,
            learning_rate: 0.05,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            trials: 5,
            seed: 0,
            init_range: (0.0, std::f64::consts::TAU),
            snapshots: Vec::new(),
        }
    }
}

impl OptConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::Config("iterations must be at least 1".into()));
        }
        if self.learning_rate.is_nan() || self.learning_rate <= 0.0 {
            return Err(Error::Config("learning rate must be positive".into()));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        let (lo, hi) = self.init_range;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::Config(format!("bad init range [{lo}, {hi})")));
        }
        if let Some(s) = self.snapshots.iter().find(|&&s| s > self.iterations) {
            return Err(Error::Config(format!("snapshot {s} beyond {} iterations", self.iterations)));
        }
        Ok(())
    }
}

/// Bias-corrected Adam state for one parameter vector.
#[derive(Debug, Clone)]
pub struct Adam {
    lr: f64,
    beta1: f64,
    beta2: f64,
    epsilon: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    pub fn new(dim: usize, cfg: &OptConfig) -> Self {
        Self {
            lr: cfg.learning_rate,
            beta1: cfg.beta1,
            beta2: cfg.beta2,
            epsilon: cfg.epsilon,
            m: vec![0.0; dim],
            v: vec![0.0; dim],
            t: 0,
        }
    }

    /// One update of `params` against `grad`.
    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        assert_eq!(params.len(), grad.len(), "gradient length");
        self.t += 1;
        let c1 = 1.0 - self.beta1.powi(self.t);
        let c2 = 1.0 - self.beta2.powi(self.t);
        for i in 0..params.len() {
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * grad[i];
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * grad[i] * grad[i];
            let m_hat = self.m[i] / c1;
            let v_hat = self.v[i] / c2;
            params[i] -= self.lr * m_hat / (v_hat.sqrt() + self.epsilon);
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrialResult {
    pub seed: u64,
    pub initial_params: Vec<f64>,
    pub params: Vec<f64>,
    pub final_cost: f64,
    /// Cost before every step plus the final cost (`iterations + 1` entries).
    pub history: Vec<f64>,
    pub final_state: StateVector,
    pub snapshots: Vec<(usize, SampleSet)>,
}

#[derive(Debug, Clone)]
pub struct OptResult {
    pub best_trial: usize,
    pub trials: Vec<TrialResult>,
}

impl OptResult {
    pub fn best(&self) -> &TrialResult {
        &self.trials[self.best_trial]
    }

    pub fn best_cost(&self) -> f64 {
        self.best().final_cost
    }

    pub fn best_params(&self) -> &[f64] {
        &self.best().params
    }
}

/// Minimizes `<H>` over the circuit parameters. Each trial starts from its
/// own uniform draw, seeded by `derive_seed(cfg.seed, [trial])`, and always
/// runs the full iteration budget.
pub fn optimize(circuit: &Circuit, h: &PauliSum, cfg: &OptConfig) -> Result<OptResult> {
    cfg.validate()?;
    if h.num_qubits() != circuit.num_qubits() {
        return Err(Error::QubitMismatch { left: circuit.num_qubits(), right: h.num_qubits() });
    }
    let obs = Observable::new(h)?;
    let trials = (0..cfg.trials)
        .map(|t| run_trial(circuit, &obs, cfg, derive_seed(cfg.seed, &[t as u64])))
        .collect::<Result<Vec<_>>>()?;
    // First trial wins ties.
    let best_trial =
        trials.iter().enumerate().fold(0, |best, (i, t)| if t.final_cost < trials[best].final_cost { i } else { best });
    Ok(OptResult { best_trial, trials })
}

fn run_trial(circuit: &Circuit, obs: &Observable, cfg: &OptConfig, seed: u64) -> Result<TrialResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = cfg.init_range;
    let initial_params: Vec<f64> = (0..circuit.num_params()).map(|_| rng.random_range(lo..hi)).collect();
    let mut params = initial_params.clone();
    let mut adam = Adam::new(params.len(), cfg);
    let mut history = Vec::with_capacity(cfg.iterations + 1);
    let mut snapshots = Vec::new();
    for it in 0..cfg.iterations {
        let (value, grad, state) = value_and_gradient(circuit, &params, obs)?;
        history.push(value);
        if cfg.snapshots.contains(&it) {
            snapshots.push((it, state.full_distribution()));
        }
        adam.step(&mut params, &grad);
    }
    let final_state = circuit.evaluate(&params)?;
    let final_cost = obs.expectation(&final_state);
    history.push(final_cost);
    if cfg.snapshots.contains(&cfg.iterations) {
        snapshots.push((cfg.iterations, final_state.full_distribution()));
    }
    Ok(TrialResult { seed, initial_params, params, final_cost, history, final_state, snapshots })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::{build_circuit, AnsatzKind};
    use crate::encoding::{build_cd_pool, build_mixer};
    use crate::pauli::PauliTerm;

    fn cfg() -> OptConfig {
        OptConfig { iterations: 100, trials: 5, seed: 3, ..OptConfig::default() }
    }

    #[test]
    fn adam_first_step_moves_by_learning_rate() {
        let c = cfg();
        let mut adam = Adam::new(1, &c);
        let mut p = [0.0];
        adam.step(&mut p, &[1.0]);
        assert!((p[0] + 0.05).abs() < 1e-9);

        let mut adam = Adam::new(2, &c);
        let mut p = [0.3, -0.7];
        adam.step(&mut p, &[0.0, 0.0]);
        assert_eq!(p, [0.3, -0.7]);

        let (mut a, mut b) = (Adam::new(1, &c), Adam::new(1, &c));
        let (mut pa, mut pb) = ([1.0], [1.0]);
        a.step(&mut pa, &[2.5]);
        b.step(&mut pb, &[-2.5]);
        assert_eq!(pa[0] - 1.0, -(pb[0] - 1.0));
    }

    fn single_qubit_cd_mixer() -> (Circuit, PauliSum) {
        let hc = PauliSum::from_terms(1, [PauliTerm::real(1.0, "Z".parse().unwrap())]).unwrap();
        let c = build_circuit(AnsatzKind::CdMixer, &hc, &build_mixer(1).unwrap(), &build_cd_pool(1, None).unwrap(), 1)
            .unwrap();
        (c, hc)
    }

    #[test]
    fn reaches_single_qubit_ground_state() {
        let (c, hc) = single_qubit_cd_mixer();
        let r = optimize(&c, &hc, &cfg()).unwrap();
        assert!(r.best_cost() <= -0.9, "{}", r.best_cost());
        let min = r.trials.iter().map(|t| t.final_cost).fold(f64::INFINITY, f64::min);
        assert_eq!(r.best_cost(), min);
    }

    #[test]
    fn history_and_snapshots() {
        let (c, hc) = single_qubit_cd_mixer();
        let one = OptConfig { iterations: 1, trials: 2, snapshots: vec![0, 1], ..cfg() };
        let r = optimize(&c, &hc, &one).unwrap();
        for t in &r.trials {
            assert_eq!(t.history.len(), 2);
            assert_eq!(t.snapshots.iter().map(|s| s.0).collect::<Vec<_>>(), [0, 1]);
            assert_eq!(*t.history.last().unwrap(), t.final_cost);
        }
        assert!(optimize(&c, &hc, &OptConfig { iterations: 0, ..cfg() }).is_err());
        assert!(optimize(&c, &hc, &OptConfig { snapshots: vec![101], ..cfg() }).is_err());
        assert!(optimize(&c, &hc, &OptConfig { trials: 0, ..cfg() }).is_err());
    }

    #[test]
    fn deterministic_and_trial_independent() {
        let (c, hc) = single_qubit_cd_mixer();
        let a = optimize(&c, &hc, &cfg()).unwrap();
        let b = optimize(&c, &hc, &cfg()).unwrap();
        for (x, y) in a.trials.iter().zip(&b.trials) {
            assert_eq!(x.history, y.history);
            assert_eq!(x.params, y.params);
        }
        // A trial's stream only depends on its own index.
        let fewer = optimize(&c, &hc, &OptConfig { trials: 2, ..cfg() }).unwrap();
        assert_eq!(fewer.trials[1].history, a.trials[1].history);
    }
}
