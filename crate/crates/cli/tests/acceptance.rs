//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::path::Path;
use std::process::{Command, Output};
use std::time::Instant;

use voronoi_fnn::analysis::{measure_convergence, training_samples, ConvergenceConfig};
use voronoi_fnn::domain::{derive_seed, Stream};
use voronoi_fnn::io::{load_model, save_model, write_samples_csv};
use voronoi_fnn::testfns::{f_g, gauss_grad_sup};
use voronoi_fnn::{
    build_network, check_equivalence, corollary_bound, fit_rate, run_target_convergence,
    theorem_bound, validate, BoxDomain, BuildOptions, NetworkParams, SampleSet, Sampling, Target,
    TieMode,
};

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

const SEED: u64 = 20_240_601;

fn unit(d: usize) -> BoxDomain {
    BoxDomain::unit(d).expect("positive dimension")
}

fn random_samples(d: usize, n: usize, tag: u64) -> SampleSet {
    let domain = unit(d);
    let train = derive_seed(SEED, Stream::Training, tag);
    let points = domain.sample(n, train, Stream::Training, 0);
    let values = points
        .chunks_exact(d)
        .map(|x| {
            x.iter()
                .enumerate()
                .map(|(i, c)| (i + 1) as f64 * c)
                .sum::<f64>()
                .sin()
        })
        .collect();
    SampleSet::new(d, points, values).expect("random samples are distinct")
}

fn ladder() -> impl Iterator<Item = (usize, usize)> {
    (1..=5).flat_map(|d| [8, 64, 256].into_iter().map(move |n| (d, n)))
}

fn oracle_equivalence() -> Outcome {
    let mut near = 0;
    for (d, n) in ladder() {
        let samples = random_samples(d, n, (d * 1000 + n) as u64);
        let net = build_network(&samples, &BuildOptions::default()).map_err(|e| e.to_string())?;
        let flat = unit(d).sample(
            10_000,
            SEED,
            Stream::EquivalenceQueries,
            (d * 1000 + n) as u64,
        );
        let queries: Vec<&[f64]> = flat.chunks_exact(d).collect();
        let report = check_equivalence(
            &samples,
            &net,
            &queries,
            voronoi_fnn::oracle::DEFAULT_NEAR_TIE_TOL,
        )
        .map_err(|e| e.to_string())?;
        if report.hard_mismatches > 0 {
            return Err(format!(
                "d={d} n={n}: {} hard mismatches",
                report.hard_mismatches
            ));
        }
        near += report.near_ties;
    }
    Ok(format!(
        "15 configurations x 10^4 queries, 0 hard mismatches ({near} near ties)"
    ))
}

fn interpolation() -> Outcome {
    for (d, n) in ladder() {
        let samples = random_samples(d, n, (d * 1000 + n) as u64);
        for mode in [TieMode::LowestIndex, TieMode::PaperFaithful] {
            let net = build_network(&samples, &BuildOptions::default().with_tie_mode(mode))
                .map_err(|e| e.to_string())?;
            for k in 0..n {
                let y = net.eval(samples.point(k)).map_err(|e| e.to_string())?;
                if y.to_bits() != samples.value(k).to_bits() {
                    return Err(format!("d={d} n={n} {mode}: sample {k} gave {y}"));
                }
            }
        }
    }
    Ok("every training point reproduced exactly, 15 configurations x 2 tie modes".into())
}

fn boundary_double_count() -> Outcome {
    let samples = SampleSet::new(1, vec![0.0, 1.0], vec![10.0, 20.0]).map_err(|e| e.to_string())?;
    let eval = |mode| -> Result<f64, String> {
        let opts = BuildOptions::default()
            .with_tie_mode(mode)
            .with_epsilon(0.0);
        let net = build_network(&samples, &opts).map_err(|e| e.to_string())?;
        net.eval(&[0.5]).map_err(|e| e.to_string())
    };
    let paper = eval(TieMode::PaperFaithful)?;
    let lowest = eval(TieMode::LowestIndex)?;
    if paper == 30.0 && lowest == 10.0 {
        Ok("paper mode 30, lowest-index mode 10 at x = 0.5".into())
    } else {
        Err(format!("paper mode {paper}, lowest-index mode {lowest}"))
    }
}

fn analytic_linear() -> Outcome {
    let domain = unit(1);
    let mut worst: f64 = 0.0;
    for n in [8, 16, 32, 64] {
        let samples = training_samples(|x: &[f64]| x[0], &domain, n, Sampling::UniformGrid1D, 0)
            .map_err(|e| e.to_string())?;
        let net = build_network(&samples, &BuildOptions::default()).map_err(|e| e.to_string())?;
        let exact = 1.0 / (12f64.sqrt() * n as f64);
        let rms = validate(&net, |x: &[f64]| x[0], &domain, 100_000, SEED)
            .map_err(|e| e.to_string())?
            .rms;
        let thm = theorem_bound(&samples, 1.0, &domain, 100_000, SEED)
            .map_err(|e| e.to_string())?
            .value;
        for (what, v) in [("rms", rms), ("theorem_bound", thm)] {
            let rel = (v - exact).abs() / exact;
            worst = worst.max(rel);
            if rel > 0.05 {
                return Err(format!(
                    "n={n}: {what} {v:.6} vs {exact:.6} ({:.2}%)",
                    100.0 * rel
                ));
            }
        }
    }
    Ok(format!(
        "rms and theorem_bound within {:.2}% of 1/(sqrt(12) n) (limit 5%)",
        100.0 * worst
    ))
}

fn doubling(from: usize, to: usize) -> Vec<usize> {
    std::iter::successors(Some(from), |n| Some(n * 2))
        .take_while(|&n| n <= to)
        .collect()
}

fn convergence_slopes() -> Outcome {
    use std::f64::consts::PI;
    let cases = [
        (
            Target::Cos1d,
            Sampling::UniformGrid1D,
            doubling(32, 4096),
            -1.0,
            0.2,
        ),
        (
            Target::Cos1d,
            Sampling::Random,
            doubling(32, 4096),
            -1.0,
            0.2,
        ),
        (
            Target::Sine {
                dim: 2,
                omega: 2.0 * PI,
            },
            Sampling::Random,
            vec![64, 256, 1024, 4096],
            -0.5,
            0.15,
        ),
        (
            Target::Gauss { dim: 2 },
            Sampling::Random,
            vec![64, 256, 1024, 4096],
            -0.5,
            0.15,
        ),
        (
            Target::Sine { dim: 4, omega: PI },
            Sampling::Random,
            doubling(256, 16384),
            -0.25,
            0.1,
        ),
        (
            Target::Gauss { dim: 4 },
            Sampling::Random,
            doubling(256, 16384),
            -0.25,
            0.1,
        ),
    ];
    let mut parts = Vec::new();
    let mut failed = false;
    for (target, sampling, n_list, expected, tol) in cases {
        let config = ConvergenceConfig {
            m: ConvergenceConfig::default_m(target.dim()),
            n_list,
            sampling,
            seed: SEED,
            repetitions: 3,
            mc_points: 0,
            build: BuildOptions::default(),
        };
        let series = run_target_convergence(&target, &config).map_err(|e| e.to_string())?;
        let ok = (series.fitted_slope - expected).abs() <= tol;
        failed |= !ok;
        let label = if sampling == Sampling::UniformGrid1D {
            format!("{target}/grid")
        } else {
            target.to_string()
        };
        parts.push(format!(
            "{label} {:.3}{}",
            series.fitted_slope,
            if ok { "" } else { " (out of range)" }
        ));
    }
    let msg = parts.join(", ");
    if failed {
        Err(msg)
    } else {
        Ok(msg)
    }
}

fn bound_soundness() -> Outcome {
    let mut trials = 0;
    for d in [1, 2] {
        let target = Target::Gauss { dim: d };
        let domain = target.domain();
        let grad_sup = gauss_grad_sup(&domain);
        for n in [16, 128] {
            for trial in 0..20u64 {
                let seed = derive_seed(
                    SEED,
                    Stream::Repetition,
                    (d as u64) << 32 | (n as u64) << 16 | trial,
                );
                let samples = training_samples(f_g, &domain, n, Sampling::Random, seed)
                    .map_err(|e| e.to_string())?;
                let net =
                    build_network(&samples, &BuildOptions::default()).map_err(|e| e.to_string())?;
                let v = validate(&net, f_g, &domain, 20_000, seed).map_err(|e| e.to_string())?;
                let thm = theorem_bound(&samples, grad_sup, &domain, 100_000, seed)
                    .map_err(|e| e.to_string())?;
                let cor = corollary_bound(&samples, grad_sup, &domain, 100_000, seed)
                    .map_err(|e| e.to_string())?;
                if v.rms > thm.value + 3.0 * v.rms_std_error.hypot(thm.std_error) {
                    return Err(format!(
                        "d={d} n={n} trial {trial}: rms {} > theorem {}",
                        v.rms, thm.value
                    ));
                }
                if thm.value > cor + 3.0 * thm.std_error {
                    return Err(format!(
                        "d={d} n={n} trial {trial}: theorem {} > corollary {cor}",
                        thm.value
                    ));
                }
                trials += 1;
            }
        }
    }
    Ok(format!(
        "{trials} trials: rms <= theorem_bound <= corollary_bound within 3 standard errors"
    ))
}

fn discontinuous() -> Outcome {
    let target = Target::Jump1d;
    let config = ConvergenceConfig {
        n_list: doubling(64, 4096),
        sampling: Sampling::UniformGrid1D,
        m: 500_000,
        seed: SEED,
        repetitions: 3,
        mc_points: 0,
        build: BuildOptions::default(),
    };
    let entries = measure_convergence(|x| target.eval(x), &target.domain(), None, &config)
        .map_err(|e| e.to_string())?;
    let series: Vec<(usize, f64)> = entries.iter().map(|e| (e.n, e.rms)).collect();
    let slope = fit_rate(&series).map_err(|e| e.to_string())?;
    let table = series
        .iter()
        .map(|(n, r)| format!("{n}:{r:.5}"))
        .collect::<Vec<_>>()
        .join(" ");
    let decreasing = series.windows(2).all(|w| w[1].1 < w[0].1);
    if decreasing && slope <= -0.4 {
        Ok(format!(
            "strictly decreasing, slope {slope:.3} (limit -0.4); {table}"
        ))
    } else {
        Err(format!(
            "decreasing={decreasing}, slope {slope:.3}; {table}"
        ))
    }
}

fn persistence(dir: &Path) -> Outcome {
    let configs = [
        (1, 64, TieMode::LowestIndex, 0.5),
        (3, 200, TieMode::PaperFaithful, 0.0),
        (5, 50, TieMode::LowestIndex, 0.875),
    ];
    for (d, n, mode, eps) in configs {
        let samples = random_samples(d, n, 7_000 + d as u64);
        let opts = BuildOptions::default()
            .with_tie_mode(mode)
            .with_epsilon(eps);
        let net = build_network(&samples, &opts).map_err(|e| e.to_string())?;
        let path = dir.join(format!("round_trip_{d}.vfnn"));
        save_model(&net, &path).map_err(|e| e.to_string())?;
        let back: NetworkParams = load_model(&path).map_err(|e| e.to_string())?;
        let flat = unit(d).sample(1000, SEED, Stream::EquivalenceQueries, 7_000 + d as u64);
        let a = net.eval_flat(&flat).map_err(|e| e.to_string())?;
        let b = back.eval_flat(&flat).map_err(|e| e.to_string())?;
        if let Some(i) = (0..a.len()).find(|&i| a[i].to_bits() != b[i].to_bits()) {
            return Err(format!(
                "d={d} n={n}: query {i} gave {} before and {} after",
                a[i], b[i]
            ));
        }
        if back.tie_mode() != mode || back.epsilon().to_bits() != eps.to_bits() {
            return Err(format!("d={d} n={n}: build options not preserved"));
        }
    }
    Ok("3 models saved and reloaded, 1000 queries each bit-identical".into())
}

fn vfnn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vfnn"))
        .args(args)
        .output()
        .expect("run vfnn")
}

fn determinism(dir: &Path) -> Outcome {
    let samples = random_samples(2, 40, 9_000);
    let csv = dir.join("samples.csv");
    write_samples_csv(&samples, &csv).map_err(|e| e.to_string())?;
    let s = csv.to_str().unwrap();
    let queries = dir.join("queries.csv");
    let rows: String = unit(2)
        .sample(500, SEED, Stream::EquivalenceQueries, 9_000)
        .chunks_exact(2)
        .map(|x| format!("{},{}\n", x[0], x[1]))
        .collect();
    std::fs::write(&queries, rows).map_err(|e| e.to_string())?;
    let q = queries.to_str().unwrap();
    let model = dir.join("model.vfnn");
    let m = model.to_str().unwrap();
    let table = dir.join("table.csv");
    let t = table.to_str().unwrap();
    let preds = dir.join("preds.csv");
    let p = preds.to_str().unwrap();
    let runs: Vec<(&str, Vec<&str>, Option<&Path>)> = vec![
        ("build", vec!["build", s, m], Some(model.as_path())),
        (
            "eval",
            vec!["eval", m, "--points", q, "--out", p],
            Some(preds.as_path()),
        ),
        (
            "check",
            vec!["--seed", "5", "check", m, s, "--queries", "2000"],
            None,
        ),
        (
            "convergence",
            vec![
                "--seed",
                "5",
                "convergence",
                "--target",
                "gauss:d=2",
                "--n-list",
                "16,32,64",
                "--m",
                "2000",
                "--mc-points",
                "5000",
            ],
            None,
        ),
        (
            "convergence --out",
            vec![
                "--seed",
                "5",
                "convergence",
                "--target",
                "cos1d",
                "--n-list",
                "32,64,128",
                "--sampling",
                "random",
                "--out",
                t,
            ],
            Some(table.as_path()),
        ),
        (
            "bound",
            vec![
                "--seed",
                "5",
                "bound",
                "--target",
                "sine:d=2",
                "--n",
                "64",
                "--m",
                "2000",
                "--mc-points",
                "5000",
            ],
            None,
        ),
        (
            "bound --samples",
            vec![
                "--seed",
                "5",
                "bound",
                "--samples",
                s,
                "--grad-sup",
                "3",
                "--domain",
                "0:1",
                "--mc-points",
                "5000",
            ],
            None,
        ),
    ];
    for (name, args, file) in &runs {
        let mut seen = Vec::new();
        for _ in 0..2 {
            let out = vfnn(args);
            if !out.status.success() {
                return Err(format!(
                    "{name}: exit {:?}: {}",
                    out.status.code(),
                    String::from_utf8_lossy(&out.stderr)
                ));
            }
            let bytes = file.map(|f| std::fs::read(f).expect("read output"));
            seen.push((out.stdout, bytes));
        }
        if seen[0] != seen[1] {
            return Err(format!("{name}: outputs differ between runs"));
        }
    }
    Ok(format!(
        "{} seeded commands byte-identical across repeated runs",
        runs.len()
    ))
}

fn main() {
    let dir = tempfile::tempdir().expect("temporary directory");
    let criteria: Vec<Criterion> = vec![
        ("oracle equivalence", Box::new(oracle_equivalence)),
        ("interpolation", Box::new(interpolation)),
        ("boundary double count", Box::new(boundary_double_count)),
        ("analytic 1-D error", Box::new(analytic_linear)),
        ("convergence slopes", Box::new(convergence_slopes)),
        ("bound soundness", Box::new(bound_soundness)),
        ("discontinuous target", Box::new(discontinuous)),
        (
            "persistence round trip",
            Box::new(|| persistence(dir.path())),
        ),
        ("determinism", Box::new(|| determinism(dir.path()))),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (tag, detail) = match run() {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failures += 1;
                ("FAIL", d)
            }
        };
        println!(
            "[{tag}] criterion {}: {name}: {detail} ({:.1}s)",
            i + 1,
            start.elapsed().as_secs_f64()
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failures,
        criteria.len()
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
