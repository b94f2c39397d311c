//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Runs under `cargo test` with `harness = false`.

use std::f64::consts::{PI, SQRT_2};
use std::fs;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fockline::evolution::{amplitude_oracle, evolve_amplitudes, permanent, permanent_naive, TransitionQuery};
use fockline::experiments::{
    all_coincidences, build_steering, chsh, chsh_sampled, nu1_paths, predicted_nu1_angle_deg,
    run_steering, sweep_c, ChshSettings, SteeringConfig, SweepRow, TagMode, NU1,
};
use fockline::fock::{Amplitudes, DensityMatrix, ModeRegistry, OccupationVector, PureState};
use fockline::measurement::{conditional_state, count_patterns, pattern_probability};
use fockline::optics::{BsConvention, ModeUnitary};
use fockline::{Complex64, Error, Exec};

type Outcome = Result<String, String>;

const FULL_GRID_BUDGET: Duration = Duration::from_secs(60);

fn degrees() -> Vec<f64> {
    (0..180).map(f64::from).collect()
}

fn full_grid(tags: TagMode) -> Grid {
    let start = Instant::now();
    let grid = degrees();
    let mut rows = Vec::with_capacity(grid.len() * grid.len());
    for &a in &grid {
        let cfg = SteeringConfig {
            a_deg: a,
            tags,
            ..SteeringConfig::default()
        };
        for row in sweep_c(&cfg, &grid).map_err(|e| e.to_string())? {
            rows.push((a, row));
        }
    }
    Ok((rows, start.elapsed()))
}

fn steered_state(rows: &[(f64, SweepRow)], elapsed: Duration) -> Outcome {
    let (mut worst, mut at) = (0.0f64, (0.0, 0.0));
    for (a, r) in rows {
        let dev = (r.fidelity_predicted - 1.0).abs();
        if dev > worst {
            worst = dev;
            at = (*a, r.c_deg);
        }
    }
    let detail = format!(
        "{} grid points, max |F - 1| = {worst:.2e} at (a, c) = {at:?}",
        rows.len()
    );
    if rows.len() == 180 * 180 && worst <= 1e-9 && elapsed < FULL_GRID_BUDGET {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn coincidence_probabilities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut points: Vec<(f64, f64)> = Vec::new();
    for a in (0..180).step_by(5) {
        for c in (0..180).step_by(5) {
            points.push((a as f64, c as f64));
        }
    }
    for _ in 0..200 {
        points.push((rng.random_range(-360.0..360.0), rng.random_range(-360.0..360.0)));
    }
    let (mut worst_each, mut worst_total, mut n) = (0.0f64, 0.0f64, 0);
    for tags in [TagMode::Identical, TagMode::Distinct] {
        for &(a, c) in &points {
            let cfg = SteeringConfig {
                a_deg: a,
                c_deg: c,
                tags,
                ..SteeringConfig::default()
            };
            let results = all_coincidences(&cfg).map_err(|e| e.to_string())?;
            let mut total = 0.0;
            for r in &results {
                worst_each = worst_each.max((r.probability - 0.125).abs());
                total += r.probability;
            }
            worst_total = worst_total.max((total - 0.5).abs());
            n += 1;
        }
    }
    let detail = format!(
        "{n} configurations, max |p - 1/8| = {worst_each:.2e}, max |sum - 1/2| = {worst_total:.2e}"
    );
    if worst_each <= 1e-12 && worst_total <= 1e-12 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn indistinguishability_control(rows: &[(f64, SweepRow)]) -> Outcome {
    let mut worst = 0.0f64;
    for (a, r) in rows {
        let g = (r.c_deg - a).to_radians();
        let expected = g.sin().powi(4) + g.cos().powi(4);
        worst = worst.max((r.purity - expected).abs());
    }
    let mut worst_mixed = 0.0f64;
    for a in [0.0, 17.0, 45.0, 90.0, 133.5] {
        let cfg = SteeringConfig {
            a_deg: a,
            c_deg: a + 45.0,
            tags: TagMode::Distinct,
            ..SteeringConfig::default()
        };
        let report = run_steering(&cfg).map_err(|e| e.to_string())?;
        let (_, q) = report.conditional.single_qubit().map_err(|e| e.to_string())?;
        for i in 0..2 {
            for j in 0..2 {
                let target = if i == j { 0.5 } else { 0.0 };
                worst_mixed = worst_mixed.max((q[(i, j)] - Complex64::new(target, 0.0)).norm());
            }
        }
    }
    let detail = format!(
        "{} grid points, max |purity - (sin^4 + cos^4)| = {worst:.2e}; at 45 deg max |rho - I/2| = {worst_mixed:.2e}",
        rows.len()
    );
    if rows.len() == 180 * 180 && worst <= 1e-9 && worst_mixed <= 1e-9 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn occupations(modes: usize, n: usize) -> Vec<OccupationVector> {
    fn rec(from: usize, modes: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<OccupationVector>) {
        if left == 0 {
            out.push(OccupationVector::from_photons(cur.iter().copied()));
            return;
        }
        for m in from..modes {
            cur.push(m);
            rec(m, modes, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, modes, n, &mut Vec::new(), &mut out);
    out
}

fn oracle_equivalence() -> Outcome {
    let reg = std::sync::Arc::new(ModeRegistry::new(["a", "b", "c", "d"], &[0]).map_err(|e| e.to_string())?);
    let mut rng = ChaCha8Rng::seed_from_u64(0xacce55);
    let (mut worst, mut amplitudes) = (0.0f64, 0usize);
    let unitaries = 120;
    for k in 0..unitaries {
        let u = ModeUnitary::haar_random(reg.clone(), &mut rng);
        let n = 2 + k % 2;
        let inputs = occupations(reg.len(), n);
        let input = inputs[rng.random_range(0..inputs.len())].clone();
        let mut terms = Amplitudes::new();
        terms.insert(input.clone(), Complex64::new(1.0, 0.0));
        let out = evolve_amplitudes(&terms, &u, Exec::default());
        for output in occupations(reg.len(), n) {
            let oracle = amplitude_oracle(&TransitionQuery {
                unitary: &u,
                input: input.clone(),
                output: output.clone(),
            })
            .map_err(|e| e.to_string())?;
            let got = out.get(&output).copied().unwrap_or_default();
            worst = worst.max((got - oracle).norm());
            amplitudes += 1;
        }
    }
    let mut worst_perm = 0.0f64;
    let mut matrices = 0;
    for n in 1..=4 {
        for _ in 0..250 {
            let m = random_matrix(n, &mut rng);
            let a = permanent(&m).map_err(|e| e.to_string())?;
            let b = permanent_naive(&m).map_err(|e| e.to_string())?;
            worst_perm = worst_perm.max((a - b).norm());
            matrices += 1;
        }
    }
    let detail = format!(
        "{unitaries} Haar unitaries on 8 modes, {amplitudes} amplitudes, max error {worst:.2e}; \
         {matrices} matrices n <= 4, max permanent gap {worst_perm:.2e}"
    );
    if unitaries >= 100 && worst <= 1e-10 && worst_perm <= 1e-10 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn random_matrix(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<Complex64> {
    DMatrix::from_fn(n, n, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

fn physics_invariants() -> Outcome {
    let mut configs = Vec::new();
    for (a, c) in [(0.0, 45.0), (12.0, 77.0), (90.0, 0.0), (33.3, 151.0)] {
        for tags in [TagMode::Identical, TagMode::Distinct] {
            for convention in [BsConvention::Symmetric, BsConvention::Real] {
                for analyze_nu1 in [false, true] {
                    configs.push(SteeringConfig {
                        a_deg: a,
                        b_deg: a + 30.0,
                        c_deg: c,
                        convention,
                        tags,
                        pol3_axis_deg: None,
                        analyze_nu1,
                    });
                }
            }
        }
    }
    let mut worst_norm = 0.0f64;
    let mut worst_complete = 0.0f64;
    let mut worst_total = 0.0f64;
    for cfg in &configs {
        let setup = build_steering(cfg).map_err(|e| e.to_string())?;
        worst_norm = worst_norm.max((setup.state.norm_sqr() - 1.0).abs());
        let out = setup.evolve().map_err(|e| e.to_string())?;
        worst_norm = worst_norm.max((out.norm_sqr() - 1.0).abs());

        let paths: Vec<&str> = out.registry().paths().iter().map(String::as_str).collect();
        let mut sum = 0.0;
        for p in count_patterns(&paths, 3, &[]) {
            if p.requirements().values().map(|r| r.count).sum::<u32>() == 3 {
                sum += pattern_probability(&out, &p).map_err(|e| e.to_string())?;
            }
        }
        worst_complete = worst_complete.max((sum - 1.0).abs());

        if !cfg.analyze_nu1 {
            worst_total = worst_total.max(total_state_gap(&out)?);
        }
    }
    for (a1, b1) in [(0.0, 22.5), (45.0, 67.5), (10.0, 170.0)] {
        let r = chsh(&ChshSettings {
            a1,
            a2: a1 + 1.0,
            b1,
            b2: b1 + 1.0,
        })
        .map_err(|e| e.to_string())?;
        for c in r.correlations {
            worst_complete = worst_complete.max((c.p_tt + c.p_tr + c.p_rt + c.p_rr - 1.0).abs());
        }
    }
    let detail = format!(
        "{} circuits: max norm drift {worst_norm:.2e}, max |sum P - 1| {worst_complete:.2e}, \
         max law-of-total-state gap {worst_total:.2e}",
        configs.len()
    );
    if worst_norm <= 1e-9 && worst_complete <= 1e-9 && worst_total <= 1e-9 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Entry-wise gap between `sum_k p_k rho_k` over every pattern on the
/// detected paths and the unconditional state of ν1.
fn total_state_gap(out: &PureState) -> Result<f64, String> {
    let detected: Vec<&str> = out
        .registry()
        .paths()
        .iter()
        .map(String::as_str)
        .filter(|p| *p != NU1)
        .collect();
    let mut parts: Vec<(f64, DensityMatrix)> = Vec::new();
    for pat in count_patterns(&detected, 3, &[NU1]) {
        match conditional_state(out, &pat) {
            Ok(r) => parts.push((r.probability, r.conditional)),
            Err(Error::ZeroSupport { .. }) => {}
            Err(e) => return Err(e.to_string()),
        }
    }
    let weighted: Vec<(f64, &DensityMatrix)> = parts.iter().map(|(p, r)| (*p, r)).collect();
    let (basis, matrix) = DensityMatrix::weighted_sum(&weighted);
    let mixed = DensityMatrix::new(basis, matrix).map_err(|e| e.to_string())?;
    let direct = out.reduced_density_matrix(&nu1_paths()).map_err(|e| e.to_string())?;
    Ok(mixed.max_abs_diff(&direct))
}

fn steering_law(rows: &[(f64, SweepRow)]) -> Outcome {
    let mut worst = 0.0f64;
    let mut missing = 0;
    for (a, r) in rows {
        let Some(angle) = r.nu1_angle_deg else {
            missing += 1;
            continue;
        };
        let expected = predicted_nu1_angle_deg(*a, r.c_deg);
        let d = (angle - expected).to_radians().rem_euclid(PI);
        worst = worst.max(d.min(PI - d));
    }
    let detail = format!(
        "{} grid points, max angular error {worst:.2e} rad, {missing} without a linear state",
        rows.len()
    );
    if rows.len() == 180 * 180 && missing == 0 && worst <= 1e-6 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn chsh_criterion() -> Outcome {
    let exact = chsh(&ChshSettings::TSIRELSON).map_err(|e| e.to_string())?;
    let gap = (exact.s - 2.0 * SQRT_2).abs();
    let sampled = chsh_sampled(&ChshSettings::TSIRELSON, 100_000, 2024, Exec::default()).map_err(|e| e.to_string())?;
    let worst_sigma = sampled
        .correlations
        .iter()
        .map(|c| c.deviation_sigmas())
        .fold(0.0f64, f64::max);
    let detail = format!(
        "S = {:.12}, |S - 2 sqrt 2| = {gap:.2e}; 1e5 shots/setting, S_est = {:.4}, worst deviation {worst_sigma:.2} sigma",
        exact.s, sampled.s_estimate
    );
    if gap <= 1e-9 && worst_sigma <= 3.0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn determinism() -> Outcome {
    let dir = std::env::temp_dir().join(format!("fockline-acceptance-{}", std::process::id()));
    fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let specs = [
        ("sample.json", r#"{"experiment":"ryff","angles":{"a":10,"c":55},"task":"sample","samples":50000,"seed":7}"#),
        ("exact.json", r#"{"experiment":"ryff","angles":{"a":0,"c":45},"tags":"distinct"}"#),
        ("chsh.json", r#"{"experiment":"chsh","task":"sample","samples":20000,"seed":3}"#),
        ("sweep.json", r#"{"experiment":"ryff","task":"sweep","format":"csv","sweep":{"param":"c","from":0,"to":180,"step":5}}"#),
    ];
    let mut bytes = 0;
    for (name, text) in specs {
        let path = dir.join(name);
        fs::write(&path, text).map_err(|e| e.to_string())?;
        let run = || {
            Command::new(env!("CARGO_BIN_EXE_fockline"))
                .arg("run")
                .arg(&path)
                .output()
                .map_err(|e| e.to_string())
        };
        let (first, second) = (run()?, run()?);
        if !first.status.success() || !second.status.success() {
            return Err(format!("{name}: {}", String::from_utf8_lossy(&first.stderr)));
        }
        if first.stdout != second.stdout {
            return Err(format!("{name}: outputs differ"));
        }
        bytes += first.stdout.len();
    }
    let _ = fs::remove_dir_all(&dir);
    Ok(format!("{} specs run twice, {bytes} bytes identical", specs.len()))
}

type GridRows = (Vec<(f64, SweepRow)>, Duration);
type Grid = Result<GridRows, String>;

fn grid(g: &Grid) -> Result<&GridRows, String> {
    g.as_ref().map_err(Clone::clone)
}

fn grid_time(g: &Grid) -> Duration {
    g.as_ref().map_or(Duration::ZERO, |(_, t)| *t)
}

fn timed(f: impl FnOnce() -> Outcome) -> (Outcome, Duration) {
    let start = Instant::now();
    let outcome = f();
    (outcome, start.elapsed())
}

fn main() -> ExitCode {
    let identical = full_grid(TagMode::Identical);
    let distinct = full_grid(TagMode::Distinct);

    let results: Vec<(u32, &str, (Outcome, Duration))> = vec![
        (
            1,
            "steered state on the 1 deg grid",
            (grid(&identical).and_then(|(r, t)| steered_state(r, *t)), grid_time(&identical)),
        ),
        (2, "cross-coincidence probabilities", timed(coincidence_probabilities)),
        (
            3,
            "indistinguishability control",
            {
                let (outcome, t) = timed(|| grid(&distinct).and_then(|(r, _)| indistinguishability_control(r)));
                (outcome, t + grid_time(&distinct))
            },
        ),
        (4, "oracle equivalence", timed(oracle_equivalence)),
        (5, "physics invariants", timed(physics_invariants)),
        (6, "steering law", timed(|| grid(&identical).and_then(|(r, _)| steering_law(r)))),
        (7, "CHSH", timed(chsh_criterion)),
        (8, "determinism", timed(determinism)),
    ];

    let mut failed = 0;
    for (n, name, (outcome, elapsed)) in &results {
        let secs = elapsed.as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS [{n}] {name}: {detail} ({secs:.1} s)"),
            Err(detail) => {
                println!("FAIL [{n}] {name}: {detail} ({secs:.1} s)");
                failed += 1;
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
