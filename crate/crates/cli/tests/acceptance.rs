//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero when any criterion fails.

use std::time::{Duration, Instant};

use purent_cli::commands::{
    complementarity_check, horodecki_sweep, random_eps_benchmark, ComplementarityConfig, EpsConfig,
    SweepConfig,
};
use purent_core::bounds::{f_arrow_upper, fmax_ppt_upper, fmax_sandwich, BoundOptions};
use purent_core::protocols::{conditional_states, steer_ensemble, swap_purity_protocol};
use purent_core::sdp::SolverOptions;
use purent_core::states::{
    haar_isometry, haar_pure_from, horodecki_state, purify, random_mixed_state, rng_for, Ensemble,
    RANK_TOL,
};
use purent_core::variational::{f_arrow_seesaw, fmax_product_seesaw};
use purent_core::{c64, DimList, HermitianOp, PureState};
use rand::Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, u64, fn() -> Outcome);

fn dl(v: &[usize]) -> DimList {
    DimList::new(v.to_vec()).unwrap()
}

fn ppt_exactness() -> Outcome {
    let opts = BoundOptions::default();
    let mut worst = 0.0f64;
    for dims in [[2, 2], [2, 3]] {
        for i in 0..100 {
            let psi = haar_pure_from(dl(&dims), &mut rng_for(11, i));
            let sol =
                fmax_ppt_upper(&psi.projector(), psi.dims(), &opts).map_err(|e| e.to_string())?;
            let want = psi.reduced(&[0]).unwrap().lambda_max();
            worst = worst.max((sol.objective_value - want).abs());
        }
    }
    let msg = format!("max |F_max - λ_max(ρ^A)| = {worst:.2e} over 200 states");
    if worst <= 1e-6 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn one_way_consistency() -> Outcome {
    let opts = BoundOptions::default();
    let solver = SolverOptions::default();
    let (mut above, mut equal, mut worst) = (0, 0, f64::NEG_INFINITY);
    for i in 0..50u64 {
        let mut rng = rng_for(21, i);
        let rank = rng.gen_range(1..=4);
        let rho = random_mixed_state(dl(&[2, 2]), rank, &mut rng);
        let up = f_arrow_upper(&rho, &opts).map_err(|e| e.to_string())?;
        let ss = f_arrow_seesaw(&rho, None, 4, i, &solver).map_err(|e| e.to_string())?;
        let diff = ss.value - up.objective;
        worst = worst.max(diff);
        if diff > 1e-6 {
            above += 1;
        }
        if diff.abs() <= 1e-4 {
            equal += 1;
        }
    }
    let msg =
        format!("{above} violations, {equal}/50 equal within 1e-4, max seesaw - sdp = {worst:.2e}");
    if above == 0 && equal >= 45 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn complementarity() -> Outcome {
    let cfg = ComplementarityConfig {
        n: 25,
        dims: dl(&[2, 3, 4]),
        seed: 31,
        jobs: 0,
        bound: BoundOptions::default(),
    };
    let rep = complementarity_check(&cfg).map_err(|e| e.to_string())?;
    let msg = format!("max residual {:.2e} over 25 samples", rep.max_residual);
    if rep.max_residual <= 1e-6 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn horodecki() -> Outcome {
    let rows = horodecki_sweep(&SweepConfig::default()).map_err(|e| e.to_string())?;
    let mut bad = Vec::new();
    let mut max_gap = f64::NEG_INFINITY;
    let mut min_interior = f64::INFINITY;
    for (n, r) in rows.iter().enumerate() {
        if n == 0 || n == 100 {
            if r.eg_lower_three_sys > 1e-6 {
                bad.push(format!(
                    "endpoint a={} lower {:.2e}",
                    r.a, r.eg_lower_three_sys
                ));
            }
        } else if n % 5 == 0 {
            min_interior = min_interior.min(r.eg_lower_three_sys);
            if r.eg_lower_three_sys < 1e-8 {
                bad.push(format!(
                    "a={} not detected ({:.2e})",
                    r.a, r.eg_lower_three_sys
                ));
            }
        }
        max_gap = max_gap.max(r.gap);
        if r.gap > 1e-3 {
            bad.push(format!("a={} gap {:.2e}", r.a, r.gap));
        }
    }
    let msg = format!(
        "{} rows, min interior lower {min_interior:.2e}, max gap {max_gap:.2e}",
        rows.len()
    );
    if bad.is_empty() && rows.len() == 101 {
        Ok(msg)
    } else {
        Err(format!("{msg}; {}", bad.join("; ")))
    }
}

fn eps_benchmark() -> Outcome {
    let cfg = EpsConfig {
        n: 50,
        dims: dl(&[3, 3, 3]),
        seed: 41,
        jobs: 0,
        bound: BoundOptions::default(),
    };
    let rows = random_eps_benchmark(&cfg).map_err(|e| e.to_string())?;
    let max_eps = rows.iter().map(|r| r.epsilon).fold(0.0, f64::max);
    let wide = rows.iter().filter(|r| r.width > r.allowed_width).count();
    let msg = format!("max ε {max_eps:.2e}, {wide} rows wider than 8√ε + 2δ");
    if max_eps < 1e-6 && wide == 0 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn corpus() -> Vec<(String, HermitianOp)> {
    let s = 0.5f64.sqrt();
    let ket = |dims: &[usize], amps: &[f64]| {
        PureState::from_unnormalized(amps.iter().map(|&x| c64::new(x, 0.0)).collect(), dl(dims))
            .unwrap()
    };
    let mut out = vec![
        (
            "bell".to_string(),
            ket(&[2, 2], &[s, 0.0, 0.0, s]).projector(),
        ),
        (
            "product".to_string(),
            PureState::basis(dl(&[2, 3]), 4).unwrap().projector(),
        ),
        (
            "ghz".to_string(),
            ket(&[2, 2, 2], &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0]).projector(),
        ),
        (
            "w".to_string(),
            ket(&[2, 2, 2], &[0.0, 1.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0]).projector(),
        ),
        (
            "mixed-2x2".to_string(),
            HermitianOp::maximally_mixed(dl(&[2, 2])),
        ),
    ];
    for p in [0.2, 0.5, 0.9] {
        let bell = ket(&[2, 2], &[s, 0.0, 0.0, s]).projector();
        let werner = bell
            .scaled(p)
            .add(&HermitianOp::maximally_mixed(dl(&[2, 2])).scaled(1.0 - p))
            .unwrap();
        out.push((format!("werner-{p}"), werner));
    }
    for a in [0.0, 0.3, 0.7, 1.0] {
        out.push((format!("horodecki-{a}"), horodecki_state(a).unwrap()));
    }
    for (k, dims) in [vec![2, 2], vec![2, 3], vec![2, 2, 2]]
        .into_iter()
        .enumerate()
    {
        for i in 0..8u64 {
            let mut rng = rng_for(51 + k as u64, i);
            let total: usize = dims.iter().product();
            let rank = rng.gen_range(1..=total);
            out.push((
                format!("random-{dims:?}-{i}"),
                random_mixed_state(dl(&dims), rank, &mut rng),
            ));
        }
    }
    out
}

fn sandwich_validity() -> Outcome {
    let opts = BoundOptions::default();
    let mut bad = Vec::new();
    let states = corpus();
    for (i, (name, rho)) in states.iter().enumerate() {
        let parties = rho.dims().clone();
        let rep = fmax_sandwich(rho, &parties, &opts).map_err(|e| format!("{name}: {e}"))?;
        let ss =
            fmax_product_seesaw(rho, &parties, 10, i as u64).map_err(|e| format!("{name}: {e}"))?;
        if ss.value < rep.lower - 1e-9 || ss.value > rep.upper + 1e-9 || rep.lower > rep.upper {
            bad.push(format!(
                "{name}: {} not in [{}, {}]",
                ss.value, rep.lower, rep.upper
            ));
        }
    }
    let msg = format!(
        "{} states, {} outside their bracket",
        states.len(),
        bad.len()
    );
    if bad.is_empty() {
        Ok(msg)
    } else {
        Err(format!("{msg}; {}", bad.join("; ")))
    }
}

fn protocols() -> Outcome {
    let mut worst_map = 0.0f64;
    let mut worst_dual = 0.0f64;
    for d in [2usize, 3] {
        let mut rng = rng_for(61, d as u64);
        let p: Vec<f64> = (0..d).map(|_| rng.gen_range(0.05..1.0)).collect();
        let norm: f64 = p.iter().sum();
        let sigma =
            HermitianOp::diagonal(dl(&[d]), &p.iter().map(|x| x / norm).collect::<Vec<_>>())
                .unwrap();
        let ch = swap_purity_protocol(d, &sigma).map_err(|e| e.to_string())?;
        if !ch.is_unital(1e-9) {
            return Err(format!("swap protocol for d = {d} is not unital"));
        }
        let mixed = HermitianOp::maximally_mixed(dl(&[d]));
        let out = ch.apply(&mixed.tensor(&sigma)).unwrap();
        worst_map = worst_map.max(out.sub(&sigma.tensor(&mixed)).unwrap().max_abs());
        let adj = ch.adjoint().map_err(|e| e.to_string())?;
        for _ in 0..20 {
            let rho = random_mixed_state(dl(&[d, d]), d * d, &mut rng);
            let s = random_mixed_state(dl(&[d, d]), 2, &mut rng);
            let lhs = ch.apply(&rho).unwrap().inner(&s).unwrap();
            let rhs = rho.inner(&adj.apply(&s).unwrap()).unwrap();
            worst_dual = worst_dual.max((lhs - rhs).abs());
        }
    }

    let mut worst_steer = 0.0f64;
    let mut worst_povm = 0.0f64;
    for i in 0..10u64 {
        let mut rng = rng_for(71, i);
        let psi = haar_pure_from(dl(&[3, 2, 2]), &mut rng);
        let marginal = psi.reduced(&[1, 2]).unwrap();
        let e = marginal.eigh();
        let r = e.values.iter().filter(|&&x| x > 1e-12).count();
        let m = rng.gen_range(r..=r + 3);
        let u = haar_isometry(m, r, &mut rng);
        let mut members = Vec::with_capacity(m);
        for row in 0..m {
            let mut v = vec![c64::new(0.0, 0.0); marginal.side()];
            for k in 0..r {
                let w = u[(row, k)] * e.values[k].sqrt();
                for (x, y) in v.iter_mut().zip(&e.vectors[k]) {
                    *x += w * y;
                }
            }
            let q: f64 = v.iter().map(|z| z.norm_sqr()).sum();
            members.push((
                q,
                PureState::from_unnormalized(v, marginal.dims().clone()).unwrap(),
            ));
        }
        let target = Ensemble::pure(members).map_err(|e| e.to_string())?;
        let povm = steer_ensemble(&psi, &target).map_err(|e| e.to_string())?;
        let mut sum = HermitianOp::zeros(dl(&[3]));
        for el in &povm {
            worst_povm = worst_povm.max(-el.lambda_min());
            sum = sum.add(el).unwrap();
        }
        worst_povm = worst_povm.max(sum.sub(&HermitianOp::identity(dl(&[3]))).unwrap().max_abs());
        let cond = conditional_states(&psi, &povm).unwrap();
        for ((q, member), st) in target.members().iter().zip(&cond) {
            worst_steer = worst_steer.max(st.sub(&member.density().scaled(*q)).unwrap().max_abs());
        }
    }
    let msg = format!(
        "swap map {worst_map:.1e}, duality {worst_dual:.1e}, steering {worst_steer:.1e}, povm {worst_povm:.1e}"
    );
    if worst_map <= 1e-12 && worst_dual <= 1e-9 && worst_steer <= 1e-8 && worst_povm <= 1e-9 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn linalg_invariants() -> Outcome {
    let (mut pt, mut schmidt, mut round) = (0.0f64, 0.0f64, 0.0f64);
    for i in 0..100u64 {
        let mut rng = rng_for(81, i);
        let parts = rng.gen_range(2..=3);
        let dims: Vec<usize> = (0..parts).map(|_| rng.gen_range(1..=3)).collect();
        let dims = dl(&dims);
        let x = random_mixed_state(dims.clone(), dims.total(), &mut rng);
        let subs: Vec<usize> = (0..parts).filter(|_| rng.gen_bool(0.5)).collect();
        let back = x
            .partial_transpose(&subs)
            .unwrap()
            .partial_transpose(&subs)
            .unwrap();
        pt = pt.max(back.sub(&x).unwrap().max_abs());

        let psi = haar_pure_from(dl(&[rng.gen_range(1..=4), rng.gen_range(1..=4)]), &mut rng);
        let norm = psi
            .projector()
            .partial_transpose(&[1])
            .unwrap()
            .spectral_norm();
        schmidt = schmidt.max((norm - psi.reduced(&[0]).unwrap().lambda_max()).abs());

        let rank = rng.gen_range(1..=dims.total());
        let rho = random_mixed_state(dims.clone(), rank, &mut rng);
        let pure = purify(&rho, RANK_TOL).map_err(|e| e.to_string())?;
        let keep: Vec<usize> = (1..pure.dims().len()).collect();
        round = round.max(pure.reduced(&keep).unwrap().sub(&rho).unwrap().max_abs());
    }
    let msg = format!("involution {pt:.1e}, Schmidt norm {schmidt:.1e}, purify {round:.1e}");
    if pt == 0.0 && schmidt <= 1e-10 && round <= 1e-9 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn main() {
    let criteria: [Criterion; 8] = [
        (
            "PPT exactness for 2x2 and 2x3 pure states",
            60,
            ppt_exactness,
        ),
        (
            "one-way see-saw below the one-way SDP",
            300,
            one_way_consistency,
        ),
        (
            "purity-entanglement complementarity on [2,3,4]",
            300,
            complementarity,
        ),
        ("Horodecki sweep, grid 101", 1800, horodecki),
        ("three-qutrit ε benchmark, 50 samples", 1200, eps_benchmark),
        (
            "sandwich brackets the product see-saw",
            300,
            sandwich_validity,
        ),
        ("separable protocols and steering", 60, protocols),
        ("linear-algebra invariants", 60, linalg_invariants),
    ];
    let mut failed = 0;
    for (k, (name, limit, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let took = start.elapsed();
        let over = took > Duration::from_secs(*limit);
        let (ok, detail) = match outcome {
            Ok(d) if !over => (true, d),
            Ok(d) => (false, format!("{d}; exceeded {limit} s")),
            Err(d) => (false, d),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "criterion {}: {} - {name} [{detail}] ({:.1} s, limit {limit} s)",
            k + 1,
            if ok { "PASS" } else { "FAIL" },
            took.as_secs_f64()
        );
    }
    println!(
        "acceptance: {}/{} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
