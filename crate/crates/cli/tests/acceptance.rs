// Copyright 2026 The homjump Authors
// SPDX-License-Identifier: Apache-2.0

//! End-to-end acceptance checks at full ensemble sizes.
//!
//! Prints one PASS/FAIL line per criterion and exits nonzero if any fails.
//! CSVs from the runs are left under the cargo target tmpdir for inspection.

use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::sync::Arc;
use std::time::Instant;

use homjump_cli::commands::{self, independent};
use homjump_cli::ExperimentConfig;
use homjump_core::algebra::{apply, StateVector};
use homjump_core::analytic::two_atom_second_jump_probability_density;
use homjump_core::engine::{
    lindblad_oracle, Propagator, Simulator, TrajectoryEvent, TrajectoryObserver,
};
use homjump_core::sources::{
    build_cavity_qed_model, build_two_atom_model, CavityQEDParams, ChannelLabel, TwoAtomParams,
};
use homjump_core::statistics::{
    coincidence_stats, oracle_expectations, CoincidenceResult, DelayHistogram, Observable,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const N: u64 = 10_000;

struct Report {
    failed: usize,
}

impl Report {
    fn check(&mut self, id: usize, name: &str, pass: bool, detail: String) {
        println!(
            "{} [{id:>2}] {name}: {detail}",
            if pass { "PASS" } else { "FAIL" }
        );
        if !pass {
            self.failed += 1;
        }
    }
}

fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn config(name: &str) -> ExperimentConfig {
    ExperimentConfig::load(&repo_root().join("configs").join(name)).unwrap()
}

fn work_dir() -> PathBuf {
    let d = Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance");
    if d.exists() {
        std::fs::remove_dir_all(&d).unwrap();
    }
    std::fs::create_dir_all(&d).unwrap();
    d
}

fn homjump(args: &[&str]) {
    let out = Command::new(env!("CARGO_BIN_EXE_homjump"))
        .args(args)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "homjump {args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn two_atom_perfect_bunching(rep: &mut Report) {
    let start = Instant::now();
    let sim = Simulator::new(
        Arc::new(build_two_atom_model(&TwoAtomParams::identical(1.0)).unwrap()),
        100.0,
    )
    .unwrap();
    let stats = coincidence_stats(&sim.run_ensemble(0, N).unwrap()).unwrap();
    let secs = start.elapsed().as_secs_f64();
    rep.check(
        1,
        "identical two-atom sources never anticoincide",
        stats.n_diff_detector == 0 && stats.coincidence_fraction == 1.0 && secs < 10.0,
        format!(
            "{} two-click, {} anticoincidences, fraction {}, {secs:.2} s (limit 10 s)",
            stats.n_two_click, stats.n_diff_detector, stats.coincidence_fraction
        ),
    );
}

#[derive(Default)]
struct PostJump(Option<StateVector>);

impl TrajectoryObserver for PostJump {
    fn jump(&mut self, _event: &TrajectoryEvent, _pre: &StateVector, post: &StateVector) {
        if self.0.is_none() {
            self.0 = Some(post.clone());
        }
    }
}

fn bell_state_after_first_click(rep: &mut Report) {
    let m = build_two_atom_model(&TwoAtomParams::identical(1.0)).unwrap();
    let l = m.layout().clone();
    let eg = l.ket(&[1, 0]).unwrap();
    let ge = l.ket(&[0, 1]).unwrap();
    let plus = eg.plus(&ge).unwrap().normalized().unwrap();
    let minus = eg
        .plus(&ge.scaled((-1.0).into()))
        .unwrap()
        .normalized()
        .unwrap();
    let model = Arc::new(m);
    let prop = Propagator::new(model.h_nonhermitian()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 1.0;
    for _ in 0..100 {
        let t1: f64 = rng.gen_range(0.0..5.0);
        let pre = prop.propagate(model.initial_state(), t1).unwrap();
        for (label, target) in [
            (ChannelLabel::DetectorPlus, &plus),
            (ChannelLabel::DetectorMinus, &minus),
        ] {
            let post = apply(model.channel(label).unwrap().operator(), &pre)
                .unwrap()
                .normalized()
                .unwrap();
            worst = worst.min(post.fidelity(target).unwrap());
        }
    }
    // and the states the trajectory engine actually produces
    let sim = Simulator::new(model, 100.0).unwrap();
    for seed in 0..100 {
        let mut obs = PostJump::default();
        sim.run_with(seed, &[], &mut obs).unwrap();
        let post = obs.0.unwrap();
        let f = post
            .fidelity(&plus)
            .unwrap()
            .max(post.fidelity(&minus).unwrap());
        worst = worst.min(f);
    }
    rep.check(
        2,
        "first click leaves a symmetric/antisymmetric one-excitation state",
        worst >= 1.0 - 1e-9,
        format!(
            "min fidelity over 100 sampled t1 and 100 trajectories: 1 - {:.1e} (need >= 1 - 1e-9)",
            1.0 - worst
        ),
    );
}

fn ks_statistic(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

fn waiting_time_law(rep: &mut Report) {
    let p = TwoAtomParams::identical(1.0);
    let sim = Simulator::new(Arc::new(build_two_atom_model(&p).unwrap()), 200.0).unwrap();
    let records = sim.run_ensemble(10_000_000, N).unwrap();
    let delays: Vec<f64> = records
        .iter()
        .filter_map(|r| r.first_two_clicks())
        .map(|(a, b)| b.time - a.time)
        .collect();
    // CDF from the closed-form density, integrated: 1 - e^{-γΔt}
    let rate = two_atom_second_jump_probability_density(0.0, &p, true).unwrap();
    let d = ks_statistic(delays.clone(), |x| 1.0 - (-rate * x).exp());
    let crit = 1.628 / (delays.len() as f64).sqrt();
    rep.check(
        3,
        "second-click delay is exponential",
        delays.len() as u64 == N && d < crit,
        format!(
            "{} delays, KS D = {d:.4}, 1% critical {crit:.4}",
            delays.len()
        ),
    );
}

fn cavity_perfect_bunching(rep: &mut Report) {
    let m = build_cavity_qed_model(&CavityQEDParams::identical(1.0, 1.0, 1.0)).unwrap();
    let ground = m.layout().ground();
    let sim = Simulator::new(Arc::new(m), 100.0).unwrap();
    let records = sim.run_ensemble(20_000_000, N).unwrap();
    let stats = coincidence_stats(&records).unwrap();
    let worst = records
        .iter()
        .filter(|r| r.n_clicks() == 2)
        .map(|r| {
            (1.0 - r.final_state.fidelity(&ground).unwrap())
                .max(0.0)
                .sqrt()
        })
        .fold(0.0, f64::max);
    rep.check(
        4,
        "identical cavity sources never anticoincide and end in the vacuum",
        stats.n_diff_detector == 0 && worst <= 1e-10,
        format!(
            "{} two-click, {} anticoincidences, max distance from |gg;00> {worst:.1e} (limit 1e-10)",
            stats.n_two_click, stats.n_diff_detector
        ),
    );
}

fn local_maxima(xs: &[f64], floor: &[f64]) -> usize {
    (1..xs.len() - 1)
        .filter(|&i| xs[i] > xs[i - 1] && xs[i] >= xs[i + 1] && xs[i] > floor[i])
        .count()
}

fn oracle_equivalence(rep: &mut Report, dir: &Path) {
    let cfg = config("strong_coupling.json");
    let grid = cfg.grid().unwrap();
    let start = Instant::now();
    let series = commands::evolve(&cfg).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let model = cfg.source.build().unwrap();
    let oracle = oracle_expectations(&model, &lindblad_oracle(&model, &grid).unwrap());
    let n = cfg.n_trajectories as f64;
    let mut worst = (0.0, "", 0.0);
    for (k, obs) in Observable::ALL.iter().enumerate().take(4) {
        let s = series.get(*obs);
        for i in 0..grid.len() {
            // a vanishing sample SE (all trajectories agree) is floored at 1/N
            let z = (s.mean[i] - oracle[i][k]).abs() / s.se[i].max(1.0 / n);
            if z > worst.0 {
                worst = (z, obs.name(), grid[i]);
            }
        }
    }
    let e1 = series.get(Observable::E1);
    let floor: Vec<f64> = e1.se.iter().map(|se| 3.0 * se).collect();
    let maxima = local_maxima(&e1.mean, &floor);
    let rows = homjump_cli::output::expectation_rows(&series);
    homjump_cli::output::write_csv(
        dir,
        "expectations.csv",
        &homjump_cli::output::EXPECTATIONS_HEADER,
        &rows,
    )
    .unwrap();
    rep.check(
        5,
        "trajectory averages match the master equation",
        worst.0 <= 5.0 && maxima >= 3 && secs < 60.0,
        format!(
            "{} grid points x 4 observables, worst |z| = {:.2} ({} at t = {}), {maxima} maxima in <e1>, {secs:.2} s (limit 60 s)",
            grid.len(),
            worst.0,
            worst.1,
            worst.2
        ),
    );
}

fn sweep_points(name: &str) -> Vec<(f64, CoincidenceResult)> {
    commands::coincidence(&config(name)).unwrap()
}

fn coincidence_sweep_endpoints(rep: &mut Report, dir: &Path) {
    let jc = sweep_points("sweep_cavity.json");
    let atoms = sweep_points("sweep_two_atom.json");
    for (name, pts) in [
        ("coincidence_cavity.csv", &jc),
        ("coincidence_two_atom.csv", &atoms),
    ] {
        let rows = homjump_cli::output::coincidence_rows(pts);
        homjump_cli::output::write_csv(dir, name, &homjump_cli::output::COINCIDENCE_HEADER, &rows)
            .unwrap();
    }
    let first = &jc[0].1;
    let last = jc.last().unwrap();
    let monotone = jc.windows(2).all(|w| {
        let (a, b) = (&w[0].1, &w[1].1);
        b.coincidence_fraction
            <= a.coincidence_fraction + 3.0 * a.standard_error.hypot(b.standard_error)
    });
    let ordered = jc[1..jc.len() - 1]
        .iter()
        .zip(&atoms[1..atoms.len() - 1])
        .all(|((r1, c), (r2, a))| {
            r1 == r2
                && a.coincidence_fraction
                    <= c.coincidence_fraction + 3.0 * a.standard_error.hypot(c.standard_error)
        });
    let fractions = |pts: &[(f64, CoincidenceResult)]| {
        pts.iter()
            .map(|(r, c)| format!("{r}:{:.3}", c.coincidence_fraction))
            .collect::<Vec<_>>()
            .join(" ")
    };
    rep.check(
        6,
        "coincidence fraction falls from 1 toward 1/2 with mismatch",
        first.coincidence_fraction == 1.0
            && last.0 == 100.0
            && (0.45..=0.55).contains(&last.1.coincidence_fraction)
            && monotone
            && ordered,
        format!(
            "cavity [{}], two-atom [{}], non-increasing within 3 sigma: {monotone}, two-atom <= cavity within 3 sigma: {ordered}",
            fractions(&jc),
            fractions(&atoms)
        ),
    );
}

/// Delay at which the coincidence counts first fall below half their
/// maximum, interpolated linearly between bin centres.
fn delay_to_half_max(h: &DelayHistogram) -> f64 {
    let c = &h.coincidence;
    let centre = |k: usize| (k as f64 + 0.5) * h.bin_width;
    let (mode, &peak) = c
        .iter()
        .enumerate()
        .max_by_key(|&(i, &v)| (v, std::cmp::Reverse(i)))
        .unwrap();
    let half = peak as f64 / 2.0;
    for k in mode + 1..c.len() {
        if (c[k] as f64) < half {
            let (y0, y1) = (c[k - 1] as f64, c[k] as f64);
            return centre(k - 1) + h.bin_width * (y0 - half) / (y0 - y1);
        }
    }
    centre(c.len() - 1)
}

fn delay_histogram_shape(rep: &mut Report, dir: &Path) {
    let (_, same) = commands::delays(&config("delays_identical.json")).unwrap();
    let (_, mismatched) = commands::delays(&config("delays_mismatched.json")).unwrap();
    for (name, h) in [
        ("delays_identical.csv", &same),
        ("delays_mismatched.csv", &mismatched),
    ] {
        let rows = homjump_cli::output::delay_rows(h);
        homjump_cli::output::write_csv(dir, name, &homjump_cli::output::DELAYS_HEADER, &rows)
            .unwrap();
    }
    let mode = same
        .coincidence
        .iter()
        .enumerate()
        .max_by_key(|&(i, &v)| (v, std::cmp::Reverse(i)))
        .unwrap()
        .0;
    let (a, b) = (delay_to_half_max(&same), delay_to_half_max(&mismatched));
    rep.check(
        7,
        "coincidence delays peak at zero and drop faster under mismatch",
        mode == 0 && same.total_anticoincidence() == 0 && b < a,
        format!(
            "identical: mode bin {mode}, half-max delay {a:.3}, {} anticoincidences; mismatched: half-max delay {b:.3}",
            same.total_anticoincidence()
        ),
    );
}

fn independent_control(rep: &mut Report, dir: &Path) {
    let cfg = config("independent.json");
    let h = independent(&cfg).unwrap();
    let rows = homjump_cli::output::delay_rows(&h);
    homjump_cli::output::write_csv(
        dir,
        "delays_independent.csv",
        &homjump_cli::output::DELAYS_HEADER,
        &rows,
    )
    .unwrap();
    // per bin, c ~ Binomial(c + a, 1/2): |c - a| within 3·2·√((c + a)/4)
    let mut worst = (0.0, 0usize);
    for k in 0..h.n_bins() {
        let (c, a) = (h.coincidence[k] as f64, h.anticoincidence[k] as f64);
        if c + a > 0.0 {
            let z = (c - a).abs() / (c + a).sqrt();
            if z > worst.0 {
                worst = (z, k);
            }
        }
    }
    let pairs = h.total_coincidence() + h.total_anticoincidence();
    rep.check(
        8,
        "independent sources split evenly between coincidence and anticoincidence",
        worst.0 <= 3.0,
        format!(
            "{} seed pairs, {pairs} with a click on both sides, worst bin {} at {:.2} sigma (limit 3)",
            cfg.n_trajectories, worst.1, worst.0
        ),
    );
}

fn r_squared(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    sxy * sxy / (sxx * syy)
}

fn read_rows(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

fn scaling_is_linear(rep: &mut Report, dir: &Path) {
    let cfg = repo_root().join("configs/strong_coupling.json");
    // median of three single-threaded runs per N, to damp scheduler noise
    let mut runs = Vec::new();
    for k in 0..3 {
        let out = dir.join(format!("scaling-{k}"));
        homjump(&[
            "scaling",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--threads",
            "1",
        ]);
        runs.push(read_rows(&out.join("scaling.csv")));
    }
    let ns: Vec<f64> = runs[0].iter().map(|r| r[0].parse().unwrap()).collect();
    let times: Vec<f64> = (0..ns.len())
        .map(|i| {
            let mut t: Vec<f64> = runs.iter().map(|r| r[i][1].parse().unwrap()).collect();
            t.sort_by(f64::total_cmp);
            t[1]
        })
        .collect();
    let r2 = r_squared(&ns, &times);
    rep.check(
        9,
        "wall time grows linearly with trajectory count",
        r2 >= 0.99,
        format!(
            "N = {}..{}, {:.3}..{:.3} s, R^2 = {r2:.4} (need >= 0.99)",
            ns[0],
            ns[ns.len() - 1],
            times[0],
            times[times.len() - 1]
        ),
    );
}

fn determinism(rep: &mut Report, dir: &Path) {
    let cases = [
        ("evolve", "strong_coupling.json", "expectations.csv"),
        ("coincidence", "sweep_cavity.json", "coincidence.csv"),
        ("delays", "delays_mismatched.json", "delays.csv"),
        ("independent", "independent.json", "delays.csv"),
    ];
    let mut mismatches = Vec::new();
    for (cmd, cfg, file) in cases {
        let cfg = repo_root().join("configs").join(cfg);
        let mut outputs = Vec::new();
        for (k, threads) in ["1", "4", "1"].iter().enumerate() {
            let out = dir.join(format!("det-{cmd}-{k}"));
            homjump(&[
                cmd,
                "--config",
                cfg.to_str().unwrap(),
                "--out",
                out.to_str().unwrap(),
                "--threads",
                threads,
            ]);
            outputs.push(std::fs::read(out.join(file)).unwrap());
        }
        if outputs.iter().any(|o| o != &outputs[0]) {
            mismatches.push(cmd);
        }
    }
    rep.check(
        10,
        "repeated runs give byte-identical CSVs for any thread count",
        mismatches.is_empty(),
        format!(
            "evolve, coincidence, delays, independent at threads 1/4/1; differing: {mismatches:?}"
        ),
    );
}

fn main() -> ExitCode {
    let dir = work_dir();
    let mut rep = Report { failed: 0 };
    let start = Instant::now();
    two_atom_perfect_bunching(&mut rep);
    bell_state_after_first_click(&mut rep);
    waiting_time_law(&mut rep);
    cavity_perfect_bunching(&mut rep);
    oracle_equivalence(&mut rep, &dir);
    coincidence_sweep_endpoints(&mut rep, &dir);
    delay_histogram_shape(&mut rep, &dir);
    independent_control(&mut rep, &dir);
    scaling_is_linear(&mut rep, &dir);
    determinism(&mut rep, &dir);
    println!(
        "acceptance: {} of 10 passed in {:.1} s; outputs in {}",
        10 - rep.failed,
        start.elapsed().as_secs_f64(),
        dir.display()
    );
    if rep.failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
