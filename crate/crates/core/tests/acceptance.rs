//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

mod common;

use std::collections::BTreeSet;
use std::f64::consts::TAU;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::time::Instant;

use common::*;
use dcbpp::ansatz::evaluate_decomposed;
use dcbpp::cli::generate_instance;
use dcbpp::encoding::binary_objective;
use dcbpp::oracle::minimizers;
use dcbpp::simulator::{gradient, StateVector};
use dcbpp::{
    build_cd_pool, build_circuit, build_cost_hamiltonian, build_mixer, decompose, delta_omega, exact_ground_states,
    gate_counts, k_schedule, nc_first_order, oracle, run_experiment, AnsatzKind, Bitstring, BppInstance,
    EncodingParams, ExperimentConfig, OptConfig, Pauli, PauliSum, RunStatus,
};
use num_complex::Complex64;
use rand::Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// 50 instances, n <= 10, weights in [20, 80], C = 120.
fn corpus() -> Vec<BppInstance> {
    let mut r = rng(1);
    (0..50)
        .map(|i| {
            let n = 2 + i % 9;
            random_instance(&mut r, n, 20, 80, 120)
        })
        .collect()
}

fn encoding_exactness() -> Outcome {
    let mut checked = 0usize;
    for inst in corpus() {
        let n = inst.num_items();
        let dw = delta_omega(&inst);
        for k in k_schedule(120.0, dw, 1.0).map_err(|e| e.to_string())? {
            let p = EncodingParams::new(120, 1.0, k, dw).map_err(|e| e.to_string())?;
            let h = build_cost_hamiltonian(&inst, &p).map_err(|e| e.to_string())?;
            for b in 0..1u64 << n {
                let diag = h.hamiltonian.diagonal_entry(b).map_err(|e| e.to_string())?.re + h.constant;
                let want = binary_objective(&inst, &p, &Bitstring::from_index(n, b));
                ensure((diag - want).abs() <= 1e-9 * want.abs().max(1.0), || {
                    format!("{inst:?} k={k} b={b}: {diag} vs {want}")
                })?;
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} (instance, k, bitstring) triples agree"))
}

fn ground_state_targeting() -> Outcome {
    let mut checked = 0usize;
    for inst in corpus() {
        let n = inst.num_items();
        let dw = delta_omega(&inst);
        for k in k_schedule(120.0, dw, 1.0).map_err(|e| e.to_string())? {
            let p = EncodingParams::new(120, 1.0, k, dw).map_err(|e| e.to_string())?;
            let h = build_cost_hamiltonian(&inst, &p).map_err(|e| e.to_string())?;
            let values: Vec<f64> =
                (0..1u64 << n).map(|b| h.hamiltonian.diagonal_entry(b).unwrap().re + h.constant).collect();
            let scan = minimizers(n, &values);
            let exact = exact_ground_states(&inst, &p).map_err(|e| e.to_string())?;
            ensure(scan == exact, || format!("{inst:?} k={k}: {scan:?} vs {exact:?}"))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} sub-Hamiltonians have identical ground-state sets"))
}

fn circuit_for(
    kind: AnsatzKind,
    inst: &BppInstance,
    k: f64,
    layers: usize,
    normalize: bool,
) -> (dcbpp::Circuit, PauliSum) {
    let n = inst.num_items();
    let dw = delta_omega(inst);
    let p = EncodingParams::new(inst.capacity(), 1.0, k, dw).unwrap();
    let mut h = build_cost_hamiltonian(inst, &p).unwrap().hamiltonian;
    if normalize {
        let max = h.terms().iter().map(|t| t.coeff.norm()).fold(0.0, f64::max);
        h = h.scale(Complex64::new(1.0 / max, 0.0));
    }
    let c = build_circuit(kind, &h, &build_mixer(n).unwrap(), &build_cd_pool(n, None).unwrap(), layers).unwrap();
    (c, h)
}

fn simulator_fidelity() -> Outcome {
    let mut r = rng(3);

    // Single rotations against the dense exponential.
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let n = r.random_range(1..=4);
        let p = random_string(&mut r, n);
        let theta = r.random_range(-4.0..4.0);
        let mut s = StateVector::init_plus(n).unwrap();
        s.apply_pauli_rotation(&random_string(&mut r, n), 0.7).unwrap();
        let before = vector(&s);
        s.apply_pauli_rotation(&p, theta).unwrap();
        worst = worst.max(max_abs(&(vector(&s) - rotation(&p, theta) * before)));
    }
    ensure(worst < 1e-10, || format!("rotation error {worst:e}"))?;

    // Whole circuits, and their gate-level lowering, against the dense product.
    let mut evo: f64 = 0.0;
    for kind in AnsatzKind::ALL {
        for n in 2..=4 {
            let inst = random_instance(&mut r, n, 1, 9, 12);
            let (c, _) = circuit_for(kind, &inst, 2.0, 2, false);
            let params: Vec<f64> = (0..c.num_params()).map(|_| r.random_range(0.0..TAU)).collect();
            let mut u = vector(&StateVector::init_plus(n).unwrap());
            for g in c.gates() {
                u = rotation(&g.generator, params[g.slot] * g.coeff) * u;
            }
            evo = evo.max(max_abs(&(vector(&c.evaluate(&params).unwrap()) - &u)));
            let lowered = evaluate_decomposed(n, &decompose(&c).unwrap(), &params).unwrap();
            evo = evo.max(max_abs(&(vector(&lowered) - &u)));
        }
    }
    ensure(evo < 1e-10, || format!("evolution error {evo:e}"))?;

    // Norm drift.
    let mut s = StateVector::init_plus(6).unwrap();
    for _ in 0..10_000 {
        let p = random_string(&mut r, 6);
        s.apply_pauli_rotation(&p, r.random_range(-3.2..3.2)).unwrap();
    }
    let drift = (s.norm() - 1.0).abs();
    ensure(drift < 1e-10, || format!("norm drift {drift:e}"))?;

    // Gradients against central differences. The cost Hamiltonian is scaled to
    // unit largest coefficient so the finite-difference error stays small.
    let h_step = 1e-5;
    let mut grad_err: f64 = 0.0;
    let mut vectors = 0;
    for kind in AnsatzKind::ALL {
        for layers in [1, 2] {
            let inst = random_instance(&mut r, 6, 20, 80, 120);
            let (c, h) = circuit_for(kind, &inst, 1.0, layers, true);
            for _ in 0..20 {
                let params: Vec<f64> = (0..c.num_params()).map(|_| r.random_range(0.0..TAU)).collect();
                let g = gradient(&c, &params, &h).unwrap();
                for j in 0..params.len() {
                    let mut plus = params.clone();
                    let mut minus = params.clone();
                    plus[j] += h_step;
                    minus[j] -= h_step;
                    let fd = (c.cost(&plus, &h).unwrap() - c.cost(&minus, &h).unwrap()) / (2.0 * h_step);
                    grad_err = grad_err.max((g[j] - fd).abs());
                }
                vectors += 1;
            }
        }
    }
    ensure(grad_err < 1e-6, || format!("gradient error {grad_err:e}"))?;
    Ok(format!(
        "rotation {worst:.1e}, evolution {evo:.1e}, drift {drift:.1e}, gradient {grad_err:.1e} over {vectors} vectors"
    ))
}

fn cd_structure() -> Outcome {
    let mut r = rng(4);
    let mut checked = 0;
    for _ in 0..30 {
        let n = r.random_range(2..=8);
        let inst = random_instance(&mut r, n, 20, 80, 120);
        let dw = delta_omega(&inst);
        let k = r.random_range(1..=(120.0 / dw) as u64) as f64;
        let p = EncodingParams::new(120, 1.0, k, dw).unwrap();
        let hc = build_cost_hamiltonian(&inst, &p).unwrap().hamiltonian;
        let cd = nc_first_order(&build_mixer(n).unwrap(), &hc).map_err(|e| e.to_string())?;
        let mut pairs = BTreeSet::new();
        for t in cd.terms() {
            let s = &t.string;
            let ok = match s.weight() {
                1 => s.count(Pauli::Y) == 1,
                2 => s.count(Pauli::Y) == 1 && s.count(Pauli::Z) == 1,
                _ => false,
            };
            ensure(ok, || format!("unexpected term {s}"))?;
            ensure(t.coeff.im.abs() < 1e-12, || format!("complex coefficient on {s}"))?;
            // Coefficient equals twice the matching cost coefficient.
            let zs: Vec<(usize, Pauli)> = s.ops().into_iter().map(|(q, _)| (q, Pauli::Z)).collect();
            let zstring = dcbpp::PauliString::from_ops(n, &zs).unwrap();
            let hz = hc.terms().iter().find(|h| h.string == zstring).map_or(0.0, |h| h.coeff.re);
            ensure((t.coeff.re - 2.0 * hz).abs() <= 1e-9 * hz.abs().max(1.0), || {
                format!("{s}: {} vs 2 * {hz}", t.coeff.re)
            })?;
            if s.weight() == 2 {
                pairs.insert(s.to_string());
            }
        }
        ensure(pairs.len() == n * (n - 1), || format!("{} of {} YZ/ZY terms", pairs.len(), n * (n - 1)))?;
        checked += 1;
    }
    Ok(format!("{checked} random instances give only Y, YZ and ZY terms"))
}

fn gate_count_check() -> Outcome {
    for n in 2..=12 {
        let pairs = n * (n - 1) / 2;
        for kind in AnsatzKind::ALL {
            let g = gate_counts(kind, n).map_err(|e| e.to_string())?;
            let want = if kind == AnsatzKind::DcQaoa { 4 * pairs } else { 2 * pairs };
            ensure(g.cnot == want, || format!("{kind} n={n}: {} CNOTs, want {want}", g.cnot))?;
            ensure(g.cnot == g.reference_cnot, || format!("{kind} n={n}: reference mismatch"))?;
        }
    }
    let mut notes = Vec::new();
    for kind in AnsatzKind::ALL {
        let g = gate_counts(kind, 10).unwrap();
        notes.push(format!(
            "{kind} cnot {} param {}/{} total {}/{}",
            g.cnot, g.parameterized, g.reference_parameterized, g.total, g.reference_total
        ));
    }
    Ok(format!("n=10 measured/reference: {}", notes.join("; ")))
}

fn schedule_counts() -> Outcome {
    let a = k_schedule(120.0, 1.0, 4.0).map_err(|e| e.to_string())?.len();
    let b = k_schedule(120.0, 1.0, 0.5).map_err(|e| e.to_string())?.len();
    ensure(a == 30 && b == 240, || format!("lengths {a} and {b}"))?;
    Ok(format!("stepsize 4 -> {a}, stepsize 0.5 -> {b}"))
}

fn pipeline_soundness() -> Outcome {
    let mut r = rng(7);
    let mut full = 0;
    for i in 0..20 {
        let n = r.random_range(2..=8);
        let inst = random_instance(&mut r, n, 20, 80, 120);
        let kind = AnsatzKind::ALL[i % 4];
        let cfg = ExperimentConfig {
            kind,
            stepsize: 1.0,
            threshold: Some(0.0),
            opt: OptConfig { iterations: 20, trials: 2, seed: i as u64, ..OptConfig::default() },
            ..ExperimentConfig::default()
        };
        let report = run_experiment(&inst, &cfg).map_err(|e| e.to_string())?;
        let truth = oracle(&inst, None).map_err(|e| e.to_string())?;
        let exact: BTreeSet<_> = truth.fps_set.iter().copied().collect();
        for p in &report.partial_solutions.feasible {
            ensure(exact.contains(&p.bitstring), || format!("{inst:?}: {} is not feasible", p.bitstring))?;
        }
        let m = &report.metrics;
        ensure(m.fr <= 1.0, || format!("{inst:?}: FR {}", m.fr))?;
        if m.fr == 1.0 {
            full += 1;
            ensure(report.status == RunStatus::Ok, || format!("{inst:?}: FR 1 without a cover"))?;
            ensure(m.m_opt == Some(truth.m_opt) && m.fs_unordered == Some(truth.fs_unordered), || {
                format!(
                    "{inst:?}: m_opt {:?} fs {:?} vs oracle {} {}",
                    m.m_opt, m.fs_unordered, truth.m_opt, truth.fs_unordered
                )
            })?;
            let fact: u128 = (1..=truth.m_opt as u128).product();
            ensure(m.fs_ordered == Some(m.fs_unordered.unwrap() as u128 * fact), || {
                format!("{inst:?}: ordered count")
            })?;
        }
    }
    Ok(format!("20 runs sound, {full} reached FR = 1 and matched the oracle"))
}

fn fig3_reproduction() -> Outcome {
    let base = |kind, stepsize, seed| ExperimentConfig {
        kind,
        layers: 1,
        stepsize,
        opt: OptConfig { iterations: 100, learning_rate: 0.05, trials: 5, seed, ..OptConfig::default() },
        ..ExperimentConfig::default()
    };
    let mut passing = 0;
    let mut lines = Vec::new();
    for i in 0..5u64 {
        let inst = generate_instance(10, 21, 49, 120, 100 + i).map_err(|e| e.to_string())?;
        let fine = run_experiment(&inst, &base(AnsatzKind::CdMixer, 1.0, i)).map_err(|e| e.to_string())?;
        let cd4 = run_experiment(&inst, &base(AnsatzKind::CdMixer, 4.0, i)).map_err(|e| e.to_string())?;
        let qa4 = run_experiment(&inst, &base(AnsatzKind::Qaoa, 4.0, i)).map_err(|e| e.to_string())?;
        let (a, b, c) = (fine.metrics.fr_mean, cd4.metrics.fr_mean, qa4.metrics.fr_mean);
        if a >= 0.9 && b >= c {
            passing += 1;
        }
        lines.push(format!(
            "[{a:.3} | {b:.3} vs {c:.3}; best-trial {:.3} | {:.3} vs {:.3}]",
            fine.metrics.fr, cd4.metrics.fr, qa4.metrics.fr
        ));
    }
    // Trial-mean FR: CD-mixer at stepsize 1 | CD-mixer vs QAOA at stepsize 4.
    ensure(passing >= 4, || format!("{passing}/5 instances hold: {}", lines.join(" ")))?;
    Ok(format!("{passing}/5 instances hold: {}", lines.join(" ")))
}

fn cli_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let d = dir.path();
    let bin = env!("CARGO_BIN_EXE_dcbpp");
    let inst = d.join("inst.json");
    let run = |args: &[&str]| -> Result<Vec<u8>, String> {
        let out = Command::new(bin).args(args).output().map_err(|e| e.to_string())?;
        ensure(out.status.success(), || format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr)))?;
        Ok(out.stdout)
    };
    let read = |p: &std::path::Path| std::fs::read(p).map_err(|e| format!("{}: {e}", p.display()));
    let i = inst.to_str().unwrap();
    let mut compared = 0;

    let g1 = run(&["generate", "--n", "5", "--lo", "21", "--hi", "49", "--capacity", "120", "--seed", "3"])?;
    let g2 = run(&["generate", "--n", "5", "--lo", "21", "--hi", "49", "--capacity", "120", "--seed", "3"])?;
    ensure(g1 == g2, || "generate differs".into())?;
    std::fs::write(&inst, &g1).map_err(|e| e.to_string())?;
    compared += 1;

    let run_args = |out: &str, hist: &str| {
        vec![
            "run",
            "--instance",
            i,
            "--ansatz",
            "dcqaoa",
            "--iterations",
            "15",
            "--trials",
            "2",
            "--stepsize",
            "4",
            "--seed",
            "11",
            "--snapshots",
            "5,15",
            "--shots",
            "500",
            "--with-oracle",
            "--out",
            out,
            "--history",
            hist,
        ]
        .into_iter()
        .map(String::from)
        .collect::<Vec<_>>()
    };
    for tag in ["a", "b"] {
        let out = d.join(format!("run_{tag}.json"));
        let hist = d.join(format!("hist_{tag}.csv"));
        let args = run_args(out.to_str().unwrap(), hist.to_str().unwrap());
        run(&args.iter().map(String::as_str).collect::<Vec<_>>())?;
    }
    ensure(read(&d.join("run_a.json"))? == read(&d.join("run_b.json"))?, || "run report differs".into())?;
    ensure(read(&d.join("hist_a.csv"))? == read(&d.join("hist_b.csv"))?, || "history differs".into())?;
    compared += 2;

    for tag in ["a", "b"] {
        let out = d.join(format!("sweep_{tag}"));
        run(&[
            "sweep",
            "--instance",
            i,
            "--ansatz",
            "qaoa,cdmixer",
            "--iterations",
            "5,10",
            "--stepsize",
            "6",
            "--trials",
            "2",
            "--out",
            out.to_str().unwrap(),
        ])?;
    }
    let names: Vec<_> =
        std::fs::read_dir(d.join("sweep_a")).map_err(|e| e.to_string())?.flatten().map(|e| e.file_name()).collect();
    ensure(names.len() == 5, || format!("sweep wrote {} files", names.len()))?;
    for name in names {
        ensure(read(&d.join("sweep_a").join(&name))? == read(&d.join("sweep_b").join(&name))?, || {
            format!("sweep file {name:?} differs")
        })?;
        compared += 1;
    }

    let o1 = run(&["oracle", "--instance", i, "--stepsize", "8"])?;
    let o2 = run(&["oracle", "--instance", i, "--stepsize", "8"])?;
    ensure(o1 == o2, || "oracle differs".into())?;
    let c1 = run(&["gates", "--n", "4,10"])?;
    let c2 = run(&["gates", "--n", "4,10"])?;
    ensure(c1 == c2, || "gates differs".into())?;
    compared += 2;
    Ok(format!("{compared} outputs byte-identical across repeated commands"))
}

fn main() -> ExitCode {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 9] = [
        ("encoding exactness", encoding_exactness),
        ("ground-state targeting", ground_state_targeting),
        ("simulator fidelity", simulator_fidelity),
        ("CD structure", cd_structure),
        ("gate counts", gate_count_check),
        ("schedule counts", schedule_counts),
        ("pipeline soundness", pipeline_soundness),
        ("mean FR reproduction", fig3_reproduction),
        ("CLI determinism", cli_determinism),
    ];
    let only: Option<usize> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|s| s.parse().ok());
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let id = i + 1;
        if only.is_some_and(|o| o != id) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            Err(e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {id} ({name}): PASS [{secs:.1}s] {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {id} ({name}): FAIL [{secs:.1}s] {detail}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
