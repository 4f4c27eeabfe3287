//! End-to-end acceptance checks. Each test prints one PASS/FAIL line to the
//! raw stderr handle (bypassing libtest capture) before asserting.

use std::io::Write;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qfilter::channels::{depolarize, DepolarizingChannel};
use qfilter::crosscheck::{self, CrosscheckConfig};
use qfilter::filtering::{optimal_filter, simulate_outcomes};
use qfilter::linalg::{eig_hermitian, support_projector, trace_product, DEFAULT_REL_TOL};
use qfilter::random::{random_density, random_schmidt};
use qfilter::sensing::*;
use qfilter::states::{DensityOperator, PowerBudget, SchmidtVector};

fn verdict(id: u32, title: &str, pass: bool, detail: &str) {
    let tag = if pass { "PASS" } else { "FAIL" };
    let _ = writeln!(
        std::io::stderr(),
        "[acceptance {id}] {tag} {title}: {detail}"
    );
    assert!(pass, "acceptance {id} ({title}) failed: {detail}");
}

fn half() -> AcceptanceProbability {
    AcceptanceProbability::new(0.5).unwrap()
}

#[test]
fn a1_depolarizing_law_is_state_independent() {
    let d = crosscheck::depolarizing_block(&CrosscheckConfig::default()).unwrap();
    let pass = d.points == 4 * 5 * 11 && d.max_abs <= 1e-12;
    verdict(
        1,
        "depolarizing law",
        pass,
        &format!(
            "{} points (n=2..5, 5 random pure states each, p=0..1), max |dP| = {:.2e} (tol 1e-12)",
            d.points, d.max_abs
        ),
    );
}

#[test]
fn a2_entangled_depolarizing() {
    let d = crosscheck::entangled_block(&CrosscheckConfig::default()).unwrap();
    let mut r = ChaCha8Rng::seed_from_u64(2);
    let mut excess: f64 = f64::NEG_INFINITY;
    for n in 2..=4 {
        let uniform = SchmidtVector::uniform(n);
        for k in 0..=10 {
            let p = k as f64 / 10.0;
            for _ in 0..20 {
                let gap = p_depol_entangled(&random_schmidt(n, &mut r), p)
                    - p_depol_entangled(&uniform, p);
                excess = excess.max(gap);
            }
        }
    }
    let pass = d.max_abs <= 1e-12 && excess <= 1e-12;
    verdict(
        2,
        "entangled depolarizing",
        pass,
        &format!(
        "{} points, max |dP| = {:.2e} (tol 1e-12); max P(random) - P(uniform) = {:.2e} (tol 1e-12)",
        d.points, d.max_abs, excess
    ),
    );
}

#[test]
fn a3_loss_formulas_match_fock_pipeline() {
    let start = Instant::now();
    let block = crosscheck::loss_block(&CrosscheckConfig::default()).unwrap();
    let elapsed = start.elapsed();
    let required = [
        "coherent",
        "squeezed",
        "squeezed_vacuum",
        "tmsv_optimal",
        "tmsv_photodiff",
    ];
    let present = required
        .iter()
        .all(|name| block.iter().any(|d| d.name == *name));
    let worst = block.iter().map(|d| d.max_abs).fold(0.0, f64::max);
    let pass = present && worst <= 1e-6 && elapsed <= Duration::from_secs(120);
    let per: Vec<String> = block
        .iter()
        .map(|d| format!("{} {:.1e}", d.name, d.max_abs))
        .collect();
    verdict(
        3,
        "loss formulas vs truncated Fock oracle",
        pass,
        &format!(
            "max |dP| = {:.2e} (tol 1e-6) [{}], runtime {:.1}s (limit 120s)",
            worst,
            per.join(", "),
            elapsed.as_secs_f64()
        ),
    );
}

#[test]
fn a4_minimum_powers_at_half_acceptance() {
    let cases = [
        (
            "coherent",
            ProbeKind::Coherent,
            Probe::Coherent { n_total: 1.0 },
            2f64.ln(),
        ),
        (
            "squeezed vacuum",
            ProbeKind::SqueezedVacuum,
            Probe::SqueezedVacuum { n_total: 1.0 },
            3.0,
        ),
        (
            "tmsv optimal",
            ProbeKind::TmsvOptimal,
            Probe::TmsvOptimal { n_total: 1.0 },
            2f64.sqrt() - 1.0,
        ),
        (
            "tmsv photodiff",
            ProbeKind::TmsvPhotodiff,
            Probe::TmsvPhotodiff { n_total: 1.0 },
            1.0,
        ),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, kind, probe, expected) in cases {
        let closed = n_min(kind, half());
        let bisected = n_min_by_bisection(&probe, half());
        let ok = (closed - expected).abs() <= 1e-12 && (closed - bisected).abs() <= 1e-9;
        pass &= ok;
        parts.push(format!("{name} {closed:.6} (bisection {bisected:.6})"));
    }
    verdict(
        4,
        "minimum powers",
        pass,
        &format!("{}; closed form vs bisection tol 1e-9", parts.join(", ")),
    );
}

#[test]
fn a5_optimized_squeezing_threshold_and_gain() {
    let n_min_opt = n_min(ProbeKind::OptimizedSqueezed, half());
    let n = 1e3;
    let opt = optimize_power_split(n, half()).unwrap().r_m;
    let sv = r_min(&Probe::SqueezedVacuum { n_total: n }, half())
        .unwrap()
        .r_m;
    let ratio = opt / sv;
    let threshold_ok = (n_min_opt - 0.60).abs() <= 0.01;
    let ratio_ok = (ratio - 0.92).abs() <= 0.02;
    verdict(5, "optimized power split", threshold_ok && ratio_ok, &format!(
        "<n>_min = {n_min_opt:.4} (target 0.60 +- 0.01: {}), R_M^opt/R_M^sv at <n>=1e3 = {ratio:.4} (target 0.92 +- 0.02: {})",
        if threshold_ok { "ok" } else { "out of range" },
        if ratio_ok { "ok" } else { "out of range" },
    ));
}

#[test]
fn a6_zero_false_alarm_and_optimality() {
    let mut r = ChaCha8Rng::seed_from_u64(6);
    let mut worst_alarm: f64 = 0.0;
    let mut worst_excess = f64::NEG_INFINITY;
    let samples_per_pair = 25;
    for _ in 0..200 {
        let dim = r.random_range(2..=8);
        let rho1 = random_density(dim, r.random_range(1..=dim), &mut r);
        let rho0 = random_density(dim, r.random_range(1..=dim), &mut r);
        let res = optimal_filter(&rho0, &rho1, DEFAULT_REL_TOL).unwrap();
        worst_alarm = worst_alarm.max(res.false_alarm.abs());

        let kernel = support_projector(&rho1, DEFAULT_REL_TOL)
            .unwrap()
            .complement();
        for _ in 0..samples_per_pair {
            let g = random_density(dim, dim, &mut r).into_matrix();
            let top = eig_hermitian(&g).unwrap().eigenvalues[0];
            let pi0 = kernel.matrix() * g.unscale(top) * kernel.matrix();
            let rival = trace_product(&pi0, rho0.matrix()).re;
            worst_excess = worst_excess.max(rival - res.detection_probability);
        }
    }
    let pass = worst_alarm <= 1e-10 && worst_excess <= 1e-9;
    verdict(
        6,
        "zero false alarm",
        pass,
        &format!(
            "200 pairs (dims 2-8): max tr[Pi0 rho1] = {worst_alarm:.2e} (tol 1e-10); \
         {} sampled admissible filters, max excess over P = {worst_excess:.2e} (tol 1e-9)",
            200 * samples_per_pair
        ),
    );
}

#[test]
fn a7_large_power_approximations() {
    let mut worst_sv: f64 = 0.0;
    for n in [100.0, 300.0, 1e3, 1e4, 1e5] {
        let exact = r_min(&Probe::SqueezedVacuum { n_total: n }, half())
            .unwrap()
            .r_m;
        let approx = approx_r_min(Asymptotic::SqueezedVacuumLargeN { n_mean: n }, half());
        worst_sv = worst_sv.max((approx / exact - 1.0).abs());
    }
    let mut worst_bright: f64 = 0.0;
    for n_bar in [10.0, 100.0, 1e3, 1e4] {
        for ratio in [100.0, 1000.0] {
            let m_bar = n_bar / ratio;
            let budget = PowerBudget::new(n_bar, m_bar).unwrap();
            let probe = Probe::Squeezed {
                budget,
                theta: 0.0,
                phi: 0.0,
            };
            let exact = r_min(&probe, half()).unwrap().r_m;
            let approx = approx_r_min(
                Asymptotic::BrightSqueezed {
                    n_bar,
                    r: budget.squeezing(),
                },
                half(),
            );
            worst_bright = worst_bright.max((approx / exact - 1.0).abs());
        }
    }
    let pass = worst_sv <= 0.05 && worst_bright <= 0.05;
    verdict(7, "asymptotic forms", pass, &format!(
        "squeezed vacuum <n> >= 100: max rel. error {:.2}% ; bright squeezed n/m >= 100: max rel. error {:.2}% (tol 5%)",
        100.0 * worst_sv, 100.0 * worst_bright
    ));
}

#[test]
fn a8_monte_carlo_outcomes() {
    let mut r = ChaCha8Rng::seed_from_u64(8);
    let trials = 100_000u64;
    let mut cases = vec![{
        let rho1 = DensityOperator::basis(2, 0).unwrap();
        let rho0 = depolarize(&rho1, &DepolarizingChannel::new(2, 0.5).unwrap()).unwrap();
        (rho0, rho1)
    }];
    for dim in [3, 5, 8] {
        let rho1 = random_density(dim, dim / 2, &mut r);
        let rho0 = random_density(dim, dim, &mut r);
        cases.push((rho0, rho1));
    }
    let mut pass = true;
    let mut parts = Vec::new();
    for (k, (rho0, rho1)) in cases.iter().enumerate() {
        let res = optimal_filter(rho0, rho1, DEFAULT_REL_TOL).unwrap();
        let p = res.detection_probability;
        let hits = simulate_outcomes(&res.povm, rho0, trials, 100 + k as u64).unwrap()[0];
        let false_hits = simulate_outcomes(&res.povm, rho1, trials, 200 + k as u64).unwrap()[0];
        let sigma = (p * (1.0 - p) / trials as f64).sqrt();
        let z = (hits as f64 / trials as f64 - p) / sigma;
        pass &= z.abs() <= 3.0 && false_hits == 0;
        parts.push(format!("P={p:.4} z={z:+.2} false={false_hits}"));
    }
    verdict(
        8,
        "Monte Carlo outcomes",
        pass,
        &format!(
            "1e5 trials each: {} (need |z| <= 3, false = 0)",
            parts.join("; ")
        ),
    );
}

fn run_cli(args: &[&str]) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_qfilter"))
        .args(args)
        .output()
        .expect("run qfilter");
    assert!(
        out.status.success(),
        "qfilter {args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out.stdout
}

#[test]
fn a9_cli_runs_are_byte_identical() {
    let dir = std::env::temp_dir().join(format!("qfilter-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let rho1 = dir.join("rho1.json");
    std::fs::write(
        &rho1,
        run_cli(&["state", "coherent", "--re", "0.8", "--im", "-0.3"]),
    )
    .unwrap();
    let rho1 = rho1.to_str().unwrap().to_string();

    let runs: Vec<Vec<&str>> = vec![
        vec!["fig1"],
        vec!["fig2"],
        vec!["fig3", "--pac", "0.3"],
        vec![
            "filter",
            "--rho1",
            &rho1,
            "--channel",
            r#"{"type":"loss","R":0.3}"#,
            "--simulate",
            "5000",
            "--seed",
            "42",
        ],
    ];
    let mut pass = true;
    for args in &runs {
        let a = run_cli(args);
        let b = run_cli(args);
        pass &= !a.is_empty() && a == b;
    }
    std::fs::remove_dir_all(&dir).unwrap();
    verdict(9, "determinism", pass, &format!(
        "{} commands (fig1, fig2, fig3, seeded filter simulation) each run twice, outputs byte-identical",
        runs.len()
    ));
}
