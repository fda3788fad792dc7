//! Acceptance suite: one PASS/FAIL line per criterion, run sequentially so
//! the runtime bounds are measured without competing tests.

use std::io::Write;
use std::process::Command;
use std::time::{Duration, Instant};

use qve_core::linalg::{dist_inf, Matrix};
use qve_core::solver::{perron_iteration_step, perron_jacobian};
use qve_core::{
    back_substitute, certify_minimal, classify, estimate_extinction, generate_block_triangular,
    generate_random_mbt, generate_scalar, random_mbt_critical_lambda, solve, split_reducible,
    Criticality, McConfig, MmatrixClass, QveProblem, SolverConfig, SolverKind, SolverReport,
    VariantKind,
};

type Outcome = Result<String, String>;

fn check(ok: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what())
    }
}

fn run(p: &QveProblem, kind: SolverKind, cfg: &SolverConfig) -> Result<SolverReport, String> {
    let r = solve(p, kind, cfg).map_err(|e| format!("{kind}: {e}"))?;
    check(r.converged(), || format!("{kind} stopped with status {}", r.status))?;
    Ok(r)
}

fn within(elapsed: Duration, limit_s: f64) -> Result<(), String> {
    check(elapsed.as_secs_f64() < limit_s, || {
        format!("runtime {:.2} s exceeds {limit_s} s", elapsed.as_secs_f64())
    })
}

fn random_at(n: usize, frac: f64, seed: u64) -> QveProblem {
    let crit = random_mbt_critical_lambda(n, seed).expect("critical lambda");
    generate_random_mbt(n, frac * crit, seed).expect("instance")
}

/// The cross-solver grid shared by several criteria.
fn grid() -> Vec<(u64, f64, QveProblem)> {
    let mut cases = Vec::new();
    for seed in 0..10 {
        for frac in [0.5, 0.99] {
            cases.push((seed, frac, random_at(20, frac, seed)));
        }
    }
    cases
}

fn scalar_exactness() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for lambda in [0.1, 0.25, 0.4] {
        let p = generate_scalar(lambda).unwrap();
        let exact = lambda / (1.0 - lambda);
        for kind in SolverKind::METHODS {
            let err = (run(&p, kind, &SolverConfig::default())?.solution[0] - exact).abs();
            check(err <= 1e-10, || format!("{kind} at λ={lambda}: error {err:e}"))?;
            worst = worst.max(err);
        }
    }
    let elapsed = start.elapsed();
    within(elapsed, 1.0)?;
    Ok(format!("max error {worst:.1e}, {:.3} s", elapsed.as_secs_f64()))
}

fn ones_and_criticality() -> Outcome {
    for (lambda, expected) in [(0.5, Criticality::Critical), (0.6, Criticality::Subcritical)] {
        let p = generate_scalar(lambda).unwrap();
        let s = classify(&p).map_err(|e| e.to_string())?;
        check(s.criticality == expected, || {
            format!("λ={lambda} classified {} (rho {})", s.criticality, s.rho_r)
        })?;
        for kind in SolverKind::METHODS {
            let x = run(&p, kind, &SolverConfig::default())?.solution[0];
            check((x - 1.0).abs() <= 1e-10, || format!("{kind} at λ={lambda}: x = {x}"))?;
        }
    }
    Ok("λ=0.5 critical, λ=0.6 subcritical, all solvers return 1".into())
}

fn cross_solver_agreement(cases: &[(u64, f64, QveProblem)]) -> Outcome {
    let start = Instant::now();
    let cfg = SolverConfig::default();
    let (mut gap, mut resid): (f64, f64) = (0.0, 0.0);
    for (seed, frac, p) in cases {
        let sols: Vec<Vec<f64>> = SolverKind::METHODS
            .into_iter()
            .map(|k| run(p, k, &cfg).map(|r| r.solution))
            .collect::<Result<_, _>>()?;
        for (i, x) in sols.iter().enumerate() {
            for y in &sols[i + 1..] {
                gap = gap.max(dist_inf(x, y));
            }
            let r = p.residual_norm(x).unwrap();
            resid = resid.max(r);
            let v = certify_minimal(p, x).map_err(|e| format!("seed {seed} frac {frac}: {e}"))?;
            check(v.class != MmatrixClass::NotM, || {
                format!("seed {seed} frac {frac}: {} certified not_M", SolverKind::METHODS[i])
            })?;
        }
        check(gap <= 1e-8, || format!("seed {seed} frac {frac}: pair gap {gap:e}"))?;
        check(resid <= 1e-11, || format!("seed {seed} frac {frac}: residual {resid:e}"))?;
    }
    let elapsed = start.elapsed();
    within(elapsed, 30.0)?;
    Ok(format!(
        "max pair gap {gap:.1e}, max residual {resid:.1e}, {:.2} s",
        elapsed.as_secs_f64()
    ))
}

fn minimality_theorem() -> Outcome {
    for i in 0..20 {
        let lambda = 0.01 + 0.024 * i as f64;
        let p = generate_scalar(lambda).unwrap();
        let minimal = certify_minimal(&p, &[lambda / (1.0 - lambda)]).map_err(|e| e.to_string())?;
        let ones = certify_minimal(&p, &[1.0]).map_err(|e| e.to_string())?;
        check(minimal.class == MmatrixClass::NonsingularM, || {
            format!("λ={lambda}: minimal solution certified {}", minimal.class.as_str())
        })?;
        check(ones.class == MmatrixClass::NotM, || {
            format!("λ={lambda}: x = 1 certified {}", ones.class.as_str())
        })?;
    }
    Ok("20 values of λ in [0.01, 0.466]".into())
}

fn perron_limits(cases: &[(u64, f64, QveProblem)]) -> Outcome {
    let mut count = 0;
    let (mut rho_dev, mut orth): (f64, f64) = (0.0, 0.0);
    for (seed, frac, p) in cases {
        for kind in [SolverKind::Perron, SolverKind::PerronNewton] {
            let r = run(p, kind, &SolverConfig::default())?;
            let info = r.perron.ok_or_else(|| format!("{kind} seed {seed}: no diagnostics"))?;
            let w1: f64 = info.w.iter().map(|v| v.abs()).sum();
            check(info.y.iter().all(|v| (0.0..=1.0).contains(v)), || {
                format!("{kind} seed {seed} frac {frac}: y outside [0, e]")
            })?;
            check((info.rho_h - 1.0).abs() <= 1e-8, || {
                format!("{kind} seed {seed} frac {frac}: rho(H) = {}", info.rho_h)
            })?;
            check(info.max_orthogonality <= 1e-12 * w1, || {
                format!("{kind} seed {seed} frac {frac}: orthogonality {:e}", info.max_orthogonality)
            })?;
            rho_dev = rho_dev.max((info.rho_h - 1.0).abs());
            orth = orth.max(info.max_orthogonality / w1);
            count += 1;
        }
    }
    Ok(format!(
        "{count} runs, max |rho(H)-1| {rho_dev:.1e}, max orthogonality/|w|_1 {orth:.1e}"
    ))
}

fn jacobian_fidelity() -> Outcome {
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for seed in 0..5 {
        let p = random_at(5, 0.5, seed);
        let info = run(&p, SolverKind::Perron, &SolverConfig::default())?
            .perron
            .ok_or("missing diagnostics")?;
        for t in [0.5, 0.75, 0.9] {
            let y: Vec<f64> = info.y.iter().map(|v| t * v).collect();
            let jac = perron_jacobian(&p, &info.w, &y).map_err(|e| e.to_string())?;
            let g = |z: &[f64]| perron_iteration_step(&p, &info.w, z).map(|s| s.y_next);
            let mut cols = Vec::new();
            for j in 0..5 {
                let (mut plus, mut minus) = (y.clone(), y.clone());
                plus[j] += h;
                minus[j] -= h;
                let (gp, gm) = (g(&plus).map_err(|e| e.to_string())?, g(&minus).map_err(|e| e.to_string())?);
                cols.push((0..5).map(|i| (gp[i] - gm[i]) / (2.0 * h)).collect::<Vec<_>>());
            }
            let fd = Matrix::from_fn(5, 5, |i, j| cols[j][i]);
            let err = jac.sub(&fd).max_abs();
            check(err <= 1e-5, || format!("seed {seed} t {t}: error {err:e}"))?;
            worst = worst.max(err);
        }
    }
    Ok(format!("15 points, max abs error {worst:.1e}"))
}

fn near_critical() -> Outcome {
    let cfg = SolverConfig::default();
    let iters = |frac: f64, kind: SolverKind| run(&random_at(20, frac, 0), kind, &cfg).map(|r| r.iterations);
    let (newton_lo, newton_hi) = (iters(0.5, SolverKind::Newton)?, iters(0.999, SolverKind::Newton)?);
    let (perron_lo, perron_hi) = (iters(0.5, SolverKind::Perron)?, iters(0.999, SolverKind::Perron)?);
    let pn_hi = iters(0.999, SolverKind::PerronNewton)?;
    let summary = format!(
        "newton {newton_lo} -> {newton_hi}, perron {perron_lo} -> {perron_hi}, perron-newton {pn_hi} at 0.999"
    );
    check(newton_hi > newton_lo, || format!("newton did not slow down: {summary}"))?;
    check(perron_hi <= perron_lo + 1, || format!("perron slowed down: {summary}"))?;
    check(pn_hi <= perron_hi, || format!("perron-newton slower than perron: {summary}"))?;
    Ok(summary)
}

fn variant_invariance(cases: &[(u64, f64, QveProblem)]) -> Outcome {
    let recording = SolverConfig::default().recording();
    let (mut sol_gap, mut seq_gap, mut dual_gap): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for (seed, frac, p) in cases {
        for kind in SolverKind::METHODS {
            let base = run(p, kind, &SolverConfig::default())?.solution;
            for v in VariantKind::ALL {
                let x = run(p, kind, &SolverConfig::default().with_variant(v))?.solution;
                sol_gap = sol_gap.max(dist_inf(&x, &base));
            }
        }
        check(sol_gap <= 1e-10, || format!("seed {seed} frac {frac}: solution gap {sol_gap:e}"))?;

        let newton = run(p, SolverKind::Newton, &recording)?;
        for v in VariantKind::ALL {
            let r = run(p, SolverKind::Newton, &recording.with_variant(v))?;
            check(r.iterates.len() == newton.iterates.len(), || {
                format!("seed {seed} frac {frac}: newton under {v} took {} steps", r.iterations)
            })?;
            for (a, b) in r.iterates.iter().zip(&newton.iterates) {
                seq_gap = seq_gap.max(dist_inf(a, b));
            }
        }
        check(seq_gap <= 1e-14, || format!("seed {seed} frac {frac}: newton sequence gap {seq_gap:e}"))?;

        let order = run(p, SolverKind::Order, &recording)?;
        let depth_t = run(p, SolverKind::Depth, &recording.with_variant(VariantKind::Transpose))?;
        check(order.iterates.len() == depth_t.iterates.len(), || {
            format!("seed {seed} frac {frac}: order {} vs depth on transpose {}", order.iterations, depth_t.iterations)
        })?;
        for (a, b) in order.iterates.iter().zip(&depth_t.iterates) {
            dual_gap = dual_gap.max(dist_inf(a, b));
        }
        check(dual_gap <= 1e-14, || format!("seed {seed} frac {frac}: duality gap {dual_gap:e}"))?;
    }
    Ok(format!(
        "solution gap {sol_gap:.1e}, newton sequence gap {seq_gap:.1e}, depth/order duality gap {dual_gap:.1e}"
    ))
}

fn reduction_theorem() -> Outcome {
    let cfg = SolverConfig::default();
    let mut worst: f64 = 0.0;
    let mut mixed = false;
    for (seed, lambda) in [(0, 0.0), (1, 0.0), (2, 0.0), (3, 0.0), (4, 5.0)] {
        let p = generate_block_triangular(6, lambda, seed).unwrap();
        let red = split_reducible(&p).map_err(|e| e.to_string())?;
        let tail = classify(&red.tail).map_err(|e| e.to_string())?.criticality;
        let full = classify(&p).map_err(|e| e.to_string())?.criticality;
        mixed |= tail == Criticality::Subcritical && full == Criticality::Supercritical;
        let direct = run(&p, SolverKind::Newton, &cfg)?.solution;
        let x2 = run(&red.tail, SolverKind::Newton, &cfg)?.solution;
        let x = back_substitute(&red, &x2, |head| Ok(run(head, SolverKind::Newton, &cfg).map_err(qve_core::QveError::Numeric)?.solution))
            .map_err(|e| e.to_string())?;
        let auto = run(&p, SolverKind::Auto, &cfg)?.solution;
        let gap = dist_inf(&x, &direct).max(dist_inf(&auto, &direct));
        check(gap <= 1e-10, || format!("seed {seed}: gap {gap:e}"))?;
        worst = worst.max(gap);
    }
    check(mixed, || "no instance with a subcritical tail under a supercritical head".into())?;
    Ok(format!("5 instances, max gap {worst:.1e}, seed 4 has a subcritical tail"))
}

fn monte_carlo() -> Outcome {
    let start = Instant::now();
    let instances = [
        ("scalar λ=0.25", generate_scalar(0.25).unwrap()),
        ("random_mbt n=5 λ=0 seed 5", generate_random_mbt(5, 0.0, 5).unwrap()),
    ];
    let mut worst: f64 = 0.0;
    for (name, p) in &instances {
        check(classify(p).unwrap().criticality == Criticality::Supercritical, || {
            format!("{name} is not supercritical")
        })?;
        let x = run(p, SolverKind::Newton, &SolverConfig::default())?.solution;
        for (state, &xs) in x.iter().enumerate() {
            let cfg = McConfig {
                trials: 100_000,
                max_population: 10_000,
                seed: 0,
                start_state: state,
            };
            let est = estimate_extinction(p, &cfg).map_err(|e| e.to_string())?;
            let band = 3.0 * est.stderr + 0.005;
            let dev = (est.estimate - xs).abs();
            check(dev <= band, || {
                format!("{name} state {state}: estimate {} vs {xs}, band {band}", est.estimate)
            })?;
            worst = worst.max(dev / band);
        }
    }
    let elapsed = start.elapsed();
    within(elapsed, 60.0)?;
    Ok(format!(
        "6 start states, worst deviation {:.0}% of band, {:.1} s",
        100.0 * worst,
        elapsed.as_secs_f64()
    ))
}

fn qve(args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_qve"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    check(out.status.success(), || {
        format!("qve {}: {}", args.join(" "), String::from_utf8_lossy(&out.stderr))
    })?;
    Ok(out.stdout)
}

fn determinism() -> Outcome {
    let commands: [&[&str]; 5] = [
        &["generate", "--spec", "random_mbt,8,0.5,3"],
        &["solve", "--generate", "random_mbt,8,0.5,3", "--solver", "perron-newton"],
        &["solve", "--generate", "block_triangular,6,0,1", "--solver", "auto", "--variant", "symmetrize"],
        &["solve", "--generate", "scalar,1,0.25,0", "--solver", "thicknesses"],
        &[
            "bench", "--n", "10", "--seeds", "0,1", "--lambda-grid", "0.5,0.99", "--solvers",
            "newton,perron,depth", "--variants", "original,desym1", "--no-timing",
        ],
    ];
    for args in commands {
        let first = qve(args)?;
        let second = qve(args)?;
        check(!first.is_empty() && first == second, || format!("qve {} differs between runs", args.join(" ")))?;
    }
    // With timing on, only the wall_time column may change.
    let timed = ["bench", "--n", "10", "--seeds", "0", "--lambda-grid", "0.5,0.9"];
    let strip = |csv: Vec<u8>| -> Vec<String> {
        String::from_utf8_lossy(&csv)
            .lines()
            .map(|l| {
                let mut f: Vec<&str> = l.split(',').collect();
                f.remove(7);
                f.join(",")
            })
            .collect()
    };
    check(strip(qve(&timed)?) == strip(qve(&timed)?), || "timed bench differs outside wall_time".into())?;
    Ok("generate, solve and bench output byte-identical across runs".into())
}

fn main() {
    let mut stderr = std::io::stderr().lock();
    let cases = grid();
    let criteria: [(&str, &dyn Fn() -> Outcome); 11] = [
        ("scalar exactness", &scalar_exactness),
        ("e-solution and criticality", &ones_and_criticality),
        ("cross-solver agreement", &|| cross_solver_agreement(&cases)),
        ("minimality certificate", &minimality_theorem),
        ("perron limit properties", &|| perron_limits(&cases)),
        ("perron jacobian fidelity", &jacobian_fidelity),
        ("near-critical behavior", &near_critical),
        ("variant invariance", &|| variant_invariance(&cases)),
        ("reduction and back-substitution", &reduction_theorem),
        ("monte carlo oracle", &monte_carlo),
        ("determinism", &determinism),
    ];
    let mut failures = 0;
    for (i, (name, criterion)) in criteria.iter().enumerate() {
        let line = match criterion() {
            Ok(detail) => format!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failures += 1;
                format!("criterion {:>2} FAIL  {name}: {why}", i + 1)
            }
        };
        writeln!(stderr, "{line}").unwrap();
    }
    writeln!(stderr, "acceptance: {} of 11 criteria passed", 11 - failures).unwrap();
    if failures > 0 {
        std::process::exit(1);
    }
}
