//! Acceptance suite. Each criterion prints one PASS/FAIL line; the process
//! exits non-zero when any criterion fails.

mod common;

use std::time::Instant;

use common::*;
use flatcert::envelope::{extract_multigraph, inf_convolve, inf_convolve_with, verify_sandwich, SurfaceSamples};
use flatcert::grid::GridFunction;
use flatcert::harmonic::{boundary_holder_check, sliding_paraboloid_touch, solve_poisson_ball, PoissonOptions};
use flatcert::hp::{Hp, LogReal};
use flatcert::ledger::{check_threshold_chain, derive_ledger, HarnackParams};
use flatcert::mse::{exact_solution, mse_residual, rounding_floor, solve_mse, ExactKind, SolveOptions};
use flatcert::pipeline::{harnack_decay_audit, improvement_step, loglog_slope, Surface};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = (bool, String);

fn random_params(count: usize) -> Vec<(u32, f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    (0..count)
        .map(|_| {
            let n = rng.gen_range(2..=8);
            // Open at zero, closed at the top.
            let e1 = 0.25 * (1.0 - rng.gen::<f64>());
            let eta = 0.2 * (1.0 - rng.gen::<f64>());
            (n, e1, eta)
        })
        .collect()
}

fn hp_params(n: u32, e1: f64, eta: f64) -> HarnackParams<Hp> {
    HarnackParams::new(n, Hp::from_f64(e1), Hp::from_f64(eta)).unwrap()
}

fn ledger_identity() -> Outcome {
    let t = Instant::now();
    let mut worst = 0.0f64;
    for (n, e1, eta) in random_params(1000) {
        worst = worst.max(derive_ledger(&hp_params(n, e1, eta)).unwrap().identity_gap());
    }
    let secs = t.elapsed().as_secs_f64();
    (worst <= 1e-12 && secs < 5.0, format!("max relative gap {worst:.3e}, {secs:.2} s"))
}

fn threshold_chain() -> Outcome {
    let mut failures = 0;
    for (n, e1, eta) in random_params(1000) {
        if !check_threshold_chain(&derive_ledger(&hp_params(n, e1, eta)).unwrap()).holds {
            failures += 1;
        }
    }
    (failures == 0, format!("{failures} of 1000 chains broken"))
}

fn residual_on_half(u: &GridFunction<f64>) -> f64 {
    let r = mse_residual(u);
    let g = u.grid();
    g.nodes_in_ball([0.0, 0.0], 0.5)
        .into_iter()
        .filter(|&i| g.interior_nodes().binary_search(&i).is_ok())
        .fold(0.0, |m, i| m.max(r.value(i).abs()))
}

fn exact_residuals() -> Outcome {
    let t = Instant::now();
    let g = disk(1.0, 129);
    let affine = exact_solution(ExactKind::Affine { slope: [0.3, -0.7], offset: 0.1 }, g.clone()).unwrap();
    let aff = mse_residual(&affine).sup_norm();
    let floor = rounding_floor(&affine);
    let coarse = residual_on_half(&exact_solution(ExactKind::Scherk { scale: 1.0 }, disk(1.0, 65)).unwrap());
    let fine = residual_on_half(&exact_solution(ExactKind::Scherk { scale: 1.0 }, g).unwrap());
    let ratio = coarse / fine;
    let secs = t.elapsed().as_secs_f64();
    (
        aff <= floor && (3.2..=4.8).contains(&ratio) && secs < 30.0,
        format!("affine residual {aff:.2e} (rounding floor {floor:.2e}), Scherk h/(h/2) ratio {ratio:.3}, {secs:.2} s"),
    )
}

fn solver_correctness() -> Outcome {
    let g = disk(1.0, 129);
    let h2 = g.h() * g.h();
    let ex = exact_solution(ExactKind::Scherk { scale: 1.0 }, g.clone()).unwrap();
    let s = solve_mse(&ex, &SolveOptions::default()).unwrap();
    let scherk = s.u.zip_map(&ex, |a, b| a - b).unwrap().sup_norm();
    let aff = exact_solution(ExactKind::Affine { slope: [0.3, -0.7], offset: 0.1 }, g).unwrap();
    let s = solve_mse(&aff, &SolveOptions::default()).unwrap();
    let affine = s.u.zip_map(&aff, |a, b| a - b).unwrap().sup_norm();
    (
        scherk <= 5.0 * h2 && affine <= 1e-10,
        format!("Scherk error {:.3} h², affine error {affine:.2e}", scherk / h2),
    )
}

struct Run {
    eps: f64,
    surface: Surface<f64>,
}

fn runs() -> Vec<Run> {
    EPS_RUNS
        .iter()
        .map(|&eps| Run {
            eps,
            surface: Surface::from_graph(solved_graph(eps, 129)),
        })
        .collect()
}

fn sandwich_suite(runs: &[Run]) -> Outcome {
    let c = consts();
    let mut ok = true;
    let mut notes = Vec::new();
    for r in runs {
        let mg = extract_multigraph(&r.surface.samples, disk(1.0, 129), r.eps).unwrap();
        let u = inf_convolve(&mg, &c).unwrap().u;
        let s = verify_sandwich(&u, &mg, &c).unwrap();
        let pass = s.lower_margin >= 0.0 && s.upper_margin >= 0.0 && s.a_deviation <= s.a_bound;
        ok &= pass;
        notes.push(format!("eps {:.4}: sup|A-u| {:.2e} <= {:.2e}", r.eps, s.a_deviation, s.a_bound));
    }
    (ok, notes.join("; "))
}

fn closeness_suite(runs: &[Run]) -> Outcome {
    let c = consts();
    let opts = pipeline_options();
    let mut ok = true;
    let mut pts = Vec::new();
    let mut least = f64::INFINITY;
    for r in runs {
        let cert = improvement_step(&r.surface, r.eps, &c, &opts).unwrap();
        let factor = cert.closeness.bound / cert.closeness.measured;
        least = least.min(factor);
        ok &= cert.closeness.verdict && factor >= 1e3;
        pts.push((r.eps, cert.closeness.measured));
    }
    let slope = loglog_slope(&pts);
    (ok && slope >= 1.8, format!("least margin factor {least:.2e}, log-log slope {slope:.4}"))
}

fn certificate_suite(runs: &[Run]) -> Outcome {
    let c = consts();
    let opts = pipeline_options();
    let mut ok = true;
    let mut ratios = Vec::new();
    for r in runs {
        match improvement_step(&r.surface, r.eps, &c, &opts) {
            Ok(cert) => {
                ok &= cert.verdict && cert.inclusion_analytic_margin >= 0.0 && cert.inclusion_empirical_margin >= 0.0;
                ratios.push(format!("{:.2e}", cert.empirical_ratio));
            }
            Err(e) => {
                ok = false;
                ratios.push(e.to_string());
            }
        }
    }
    let a = [0.003, -0.004];
    let plane = exact_solution(ExactKind::Affine { slope: a, offset: 0.0 }, disk(1.0, 129)).unwrap();
    let cert = improvement_step(&Surface::from_graph(plane), 0.01, &c, &opts).unwrap();
    let s = (1.0 + a[0] * a[0] + a[1] * a[1]).sqrt();
    let want = [-a[0] / s, -a[1] / s, 1.0 / s];
    let dev = (0..3).fold(0.0f64, |m, k| m.max((cert.nu[k] - want[k]).abs()));
    (
        ok && cert.verdict && dev <= 1e-8,
        format!("empirical ratios [{}], tilted plane normal error {dev:.2e}", ratios.join(", ")),
    )
}

fn decay_suite(runs: &[Run]) -> Outcome {
    let c = consts();
    let opts = pipeline_options();
    let mut ok = true;
    let mut notes = Vec::new();
    for r in runs {
        // The depth formula needs ε ≤ ε₁/8; the measured flatness qualifies
        // at every run.
        let eps = r.surface.samples.flatness_over_base(1.0);
        match harnack_decay_audit(&r.surface, [0.0, 0.0], eps, &params(), &c, &opts) {
            Ok(a) => {
                ok &= a.verdict && a.truncated_at.is_none() && a.rows.len() as i64 == a.m_tilde - 2;
                notes.push(format!("M~ {} rows held {}/{}", a.m_tilde, a.rows.iter().filter(|x| x.holds).count(), a.rows.len()));
            }
            Err(e) => {
                ok = false;
                notes.push(e.to_string());
            }
        }
    }
    (ok, notes.join("; "))
}

fn oracle_equivalence() -> Outcome {
    let g = disk(1.0, 33);
    let c = consts();
    let eps = 0.01;
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let f = GridFunction::new(g.clone(), (0..g.len()).map(|_| eps * rng.gen_range(-1.0..1.0)).collect()).unwrap();
    let mut mismatches = 0usize;
    let mut checks = 0usize;

    // Hölder seminorm.
    let nodes = f.sampled_in_ball([0.0, 0.0], 1.0);
    for sigma in [0.25, 0.5, 1.0] {
        let est = f.holder_seminorm(sigma, [0.0, 0.0], 1.0).unwrap();
        let (v, pair) = brute_holder(&f, sigma, &nodes);
        checks += 1;
        mismatches += usize::from(est.value.to_bits() != v.to_bits() || est.pair != pair);
    }

    // Inf-convolution values and argmins.
    let mut samples = SurfaceSamples::from_graph(&f);
    for p in &mut samples.points {
        if p.base == [0.0, 0.0] {
            p.height = 0.0;
        }
    }
    let mg = extract_multigraph(&samples, g.clone(), eps).unwrap();
    let fast = inf_convolve_with(&mg, c.holder_cone(), c.alpha).unwrap();
    for (i, v, j) in brute_inf_convolve(&mg, c.holder_cone(), c.alpha) {
        let fi = fast.u.grid().index(g.offset(i)).unwrap();
        checks += 1;
        let arg = fast.argmin[fi].map(|a| fast.u.grid().offset(a));
        mismatches += usize::from(fast.u.value(fi).to_bits() != v.to_bits() || arg != Some(g.offset(j)));
    }

    // Grid argmin and argmax.
    let dn = g.domain_nodes();
    checks += 2;
    mismatches += usize::from(f.argmin() != Some(brute_argmin(|k| f.value(k), &dn)));
    let (bj, bw) = brute_argmin(|k| -f.value(k), &dn);
    mismatches += usize::from(f.argmax() != Some((bj, -bw)));

    // Sliding paraboloid scan on the regularized solved graph.
    let graph = solved_graph(eps, 33);
    let mg = extract_multigraph(&SurfaceSamples::from_graph(&graph), g.clone(), eps).unwrap();
    let u = inf_convolve(&mg, &c).unwrap().u;
    let ug = u.grid().clone();
    let x0 = ug.index([1, -1]).unwrap();
    let p = ug.coord(x0);
    let lift = c.stretched_gap(mg.eps_eff);
    let phi = GridFunction::from_fn(ug.clone(), |x| {
        let d = [x[0] - p[0], x[1] - p[1]];
        u.value(x0) + lift + 6.0 * (d[0] * d[0] + d[1] * d[1]) + 2.0 * (d[0].abs() + d[1].abs())
    });
    let t = sliding_paraboloid_touch(&mg.upper, &u, &phi, x0, &c, mg.eps_eff).unwrap();
    let delta = c.slide_opening(mg.eps_eff);
    let k0 = ug.offset(x0);
    let obj = |i: usize| {
        let k = ug.offset(i);
        let m = ((k[0] - k0[0]).pow(2) + (k[1] - k0[1]).pow(2)) as f64;
        match g.index(k).map(|j| mg.upper.value(j)) {
            Some(up) if up.is_finite() => mg.eps_eff * phi.value(i) + delta / 2.0 * (ug.h() * ug.h() * m) - up,
            _ => f64::INFINITY,
        }
    };
    checks += 1;
    let scan = phi.sampled_in_ball(p, c.regularization_scale(mg.eps_eff));
    mismatches += usize::from(brute_argmin(obj, &scan).0 != t.x1);

    (mismatches == 0, format!("{checks} comparisons, {mismatches} mismatches"))
}

fn boundary_holder() -> Outcome {
    let g = disk(1.0, 129);
    // Square-root cusp at the boundary point (1, 0).
    let cusp = GridFunction::from_fn(g.clone(), |x| ((x[0] - 1.0).powi(2) + x[1] * x[1]).sqrt().sqrt());
    let w = solve_poisson_ball(0.0, &cusp, &PoissonOptions::default()).unwrap().w;
    let chk = boundary_holder_check(&w, &cusp, 0.5).unwrap();
    (chk.verdict, format!("C^(1/4) norm {:.4} <= {:.4}", chk.measured, chk.bound))
}

fn main() {
    let mut all = true;
    let mut report = |k: usize, name: &str, (ok, detail): Outcome| {
        all &= ok;
        println!("{} criterion {k} ({name}): {detail}", if ok { "PASS" } else { "FAIL" });
    };
    report(1, "ledger identity", ledger_identity());
    report(2, "threshold chain", threshold_chain());
    report(3, "exact-solution residuals", exact_residuals());
    report(4, "solver correctness", solver_correctness());
    let runs = runs();
    report(5, "sandwich", sandwich_suite(&runs));
    report(6, "harmonic closeness", closeness_suite(&runs));
    report(7, "certificate", certificate_suite(&runs));
    report(8, "decay audit", decay_suite(&runs));
    report(9, "oracle equivalence", oracle_equivalence());
    report(10, "boundary Hölder estimate", boundary_holder());
    if !all {
        std::process::exit(1);
    }
}
