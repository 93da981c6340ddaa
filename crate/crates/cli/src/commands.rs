use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use voronoi_fnn::analysis::{measure_convergence, training_samples, ConvergenceEntry};
use voronoi_fnn::domain::{derive_seed, Stream};
use voronoi_fnn::io::{load_model, load_points_csv, load_samples_csv, save_model};
use voronoi_fnn::{
    build_network, check_equivalence, corollary_bound, fit_rate, theorem_bound, validate,
    BoxDomain, BuildOptions, ConvergenceConfig, NetworkParams, SampleSet, Sampling, Target,
    TieMode,
};

use crate::{BoundArgs, Cli, Command, ConvergenceArgs, GlobalOpts};

pub const EXIT_USAGE: u8 = 1;
pub const EXIT_DATA: u8 = 2;
pub const EXIT_EQUIVALENCE: u8 = 3;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(voronoi_fnn::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data(_) => EXIT_DATA,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => f.write_str(msg),
            CliError::Data(e) => write!(f, "{e}"),
        }
    }
}

impl From<voronoi_fnn::Error> for CliError {
    fn from(e: voronoi_fnn::Error) -> Self {
        match e {
            voronoi_fnn::Error::UnknownTarget(_) | voronoi_fnn::Error::InvalidEpsilon(_) => {
                CliError::Usage(e.to_string())
            }
            other => CliError::Data(other),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

pub fn run(cli: &Cli) -> CliResult<ExitCode> {
    let g = &cli.global;
    match &cli.command {
        Command::Build {
            samples,
            out,
            header,
        } => build(g, samples, out, *header),
        Command::Eval {
            model,
            points,
            point,
            header,
            out,
        } => eval(g, model, points.as_deref(), point, *header, out.as_deref()),
        Command::Check {
            model,
            samples,
            header,
            queries,
            domain,
            near_tie_tol,
        } => check(
            g,
            model,
            samples,
            *header,
            *queries,
            domain.as_deref(),
            *near_tie_tol,
        ),
        Command::Convergence(args) => convergence(g, args),
        Command::Bound(args) => bound(g, args),
    }
}

fn build_options(g: &GlobalOpts) -> BuildOptions {
    let mut opts = BuildOptions::default();
    if let Some(t) = g.tie_mode {
        opts = opts.with_tie_mode(t.into());
    }
    if let Some(e) = g.epsilon {
        opts = opts.with_epsilon(e);
    }
    opts
}

fn parse_target(name: &str) -> CliResult<Target> {
    Ok(name.parse::<Target>()?)
}

/// `lo:hi` for every axis, or one `lo:hi` per axis separated by commas.
pub fn parse_domain(spec: &str, dim: usize) -> CliResult<BoxDomain> {
    let bad = || {
        CliError::Usage(format!(
            "bad domain `{spec}`; expected lo:hi or lo1:hi1,lo2:hi2,..."
        ))
    };
    let axes = spec
        .split(',')
        .map(|axis| {
            let (lo, hi) = axis.split_once(':').ok_or_else(bad)?;
            Ok((
                lo.trim().parse::<f64>().map_err(|_| bad())?,
                hi.trim().parse::<f64>().map_err(|_| bad())?,
            ))
        })
        .collect::<CliResult<Vec<(f64, f64)>>>()?;
    let axes = match axes.len() {
        1 => vec![axes[0]; dim],
        k if k == dim => axes,
        k => {
            return Err(CliError::Usage(format!(
                "domain has {k} axes but the data has d = {dim}"
            )))
        }
    };
    Ok(BoxDomain::new(
        axes.iter().map(|a| a.0).collect(),
        axes.iter().map(|a| a.1).collect(),
    )?)
}

/// Bounding box of the samples; flat axes are widened by ±0.5.
fn bounding_box(samples: &SampleSet) -> CliResult<BoxDomain> {
    let d = samples.dim();
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for p in samples.points() {
        for (i, &c) in p.iter().enumerate() {
            lo[i] = lo[i].min(c);
            hi[i] = hi[i].max(c);
        }
    }
    for i in 0..d {
        if lo[i] == hi[i] {
            lo[i] -= 0.5;
            hi[i] += 0.5;
        }
    }
    Ok(BoxDomain::new(lo, hi)?)
}

fn fmt_domain(domain: &BoxDomain) -> String {
    domain
        .lo()
        .iter()
        .zip(domain.hi())
        .map(|(a, b)| format!("{a}:{b}"))
        .collect::<Vec<_>>()
        .join(",")
}

fn write_file(path: &Path, body: &str) -> CliResult<()> {
    fs::write(path, body).map_err(|source| {
        CliError::Data(voronoi_fnn::Error::Io {
            path: path.to_path_buf(),
            source,
        })
    })
}

fn build(g: &GlobalOpts, samples: &Path, out: &Path, header: bool) -> CliResult<ExitCode> {
    let s = load_samples_csv(samples, header)?;
    let net = build_network(&s, &build_options(g))?;
    save_model(&net, out)?;
    let n = net.n();
    println!("n: {n}");
    println!("d: {}", net.dim());
    println!("first layer: {} neurons", net.first_layer_len());
    println!("second layer: {n} neurons");
    println!("output layer: 1 neuron");
    println!("tie mode: {}", net.tie_mode());
    println!("epsilon: {}", net.epsilon());
    println!("saved: {}", out.display());
    Ok(ExitCode::SUCCESS)
}

fn parse_point(raw: &str) -> CliResult<Vec<f64>> {
    raw.split(',')
        .map(|c| {
            c.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("bad coordinate `{c}` in --point `{raw}`")))
        })
        .collect()
}

fn eval(
    g: &GlobalOpts,
    model: &Path,
    points: Option<&Path>,
    point: &[String],
    header: bool,
    out: Option<&Path>,
) -> CliResult<ExitCode> {
    let mut net = load_model(model)?;
    if let Some(t) = g.tie_mode {
        net = net.with_tie_mode(t.into());
    }
    let queries = match points {
        Some(path) => load_points_csv(path, header)?,
        None if point.is_empty() => {
            return Err(CliError::Usage(
                "give --points FILE or at least one --point".into(),
            ))
        }
        None => point
            .iter()
            .map(|p| parse_point(p))
            .collect::<CliResult<_>>()?,
    };
    let ys = net.eval_batch(&queries)?;
    let mut body = String::new();
    for y in ys {
        body.push_str(&format!("{y}\n"));
    }
    match out {
        Some(path) => write_file(path, &body)?,
        None => print!("{body}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn check(
    g: &GlobalOpts,
    model: &Path,
    samples: &Path,
    header: bool,
    queries: usize,
    domain: Option<&str>,
    near_tie_tol: f64,
) -> CliResult<ExitCode> {
    let s = load_samples_csv(samples, header)?;
    let net = load_model(model)?;
    if net.dim() != s.dim() {
        return Err(CliError::Data(voronoi_fnn::Error::DimensionMismatch {
            expected: s.dim(),
            found: net.dim(),
            index: None,
        }));
    }
    if net.tie_mode() != TieMode::LowestIndex {
        eprintln!(
            "note: checking with the lowest-index output rule (model uses `{}`)",
            net.tie_mode()
        );
    }
    let net = net.with_tie_mode(TieMode::LowestIndex);
    let domain = match domain {
        Some(spec) => parse_domain(spec, s.dim())?,
        None => bounding_box(&s)?,
    };
    println!(
        "# seed={} queries={queries} domain={} near_tie_tol={near_tie_tol}",
        g.seed,
        fmt_domain(&domain)
    );
    if queries == 0 {
        eprintln!("warning: no queries requested; nothing was checked");
        println!("0/0 match");
        return Ok(ExitCode::SUCCESS);
    }
    let flat = domain.sample(queries, g.seed, Stream::EquivalenceQueries, 0);
    let qs: Vec<&[f64]> = flat.chunks_exact(s.dim()).collect();
    let report = check_equivalence(&s, &net, &qs, near_tie_tol)?;
    println!(
        "{}/{} match ({} exact ties, {} near ties, {} hard mismatches)",
        report.matched,
        report.total(),
        report.ties,
        report.near_ties,
        report.hard_mismatches
    );
    for (i, o) in report.mismatches().take(10) {
        println!(
            "mismatch query {i} at {:?}: network {} oracle {} (nearest sample {}){}",
            qs[i],
            o.network,
            o.oracle,
            o.nearest + 1,
            if o.near_tie { " [near tie]" } else { "" }
        );
    }
    Ok(if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_EQUIVALENCE)
    })
}

fn opt_cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Column order is fixed: `n,eps_inf,eps_2,rms,theorem_bound,corollary_bound`.
pub fn convergence_csv(entries: &[ConvergenceEntry]) -> String {
    let mut body = String::from("n,eps_inf,eps_2,rms,theorem_bound,corollary_bound\n");
    for e in entries {
        body.push_str(&format!(
            "{},{},{},{},{},{}\n",
            e.n,
            e.eps_inf,
            e.eps_2,
            e.rms,
            opt_cell(e.theorem_bound.map(|b| b.value)),
            opt_cell(e.corollary_bound)
        ));
    }
    body
}

fn convergence(g: &GlobalOpts, args: &ConvergenceArgs) -> CliResult<ExitCode> {
    let target = parse_target(&args.target)?;
    let sampling: Sampling = args.sampling.into();
    let config = ConvergenceConfig {
        n_list: args.n_list.clone(),
        sampling,
        m: args
            .m
            .unwrap_or_else(|| ConvergenceConfig::default_m(target.dim())),
        seed: g.seed,
        repetitions: args.reps,
        mc_points: args.mc_points,
        build: build_options(g),
    };
    let entries = measure_convergence(
        |x| target.eval(x),
        &target.domain(),
        target.grad_sup(),
        &config,
    )?;
    let table = convergence_csv(&entries);
    let mut summary = format!(
        "# target={target} d={} sampling={sampling:?} m={} reps={} mc_points={} seed={} tie_mode={} epsilon={}\n",
        target.dim(),
        config.m,
        config.repetitions,
        config.mc_points,
        config.seed,
        config.build.tie_mode,
        config.build.epsilon,
    );
    let fit = fit_rate(&entries.iter().map(|e| (e.n, e.rms)).collect::<Vec<_>>());
    if let Ok(slope) = &fit {
        summary.push_str(&format!(
            "fitted slope: {slope} (reference -1/d = {})\n",
            -1.0 / target.dim() as f64
        ));
    }
    match &args.out {
        Some(path) => {
            write_file(path, &table)?;
            print!("{summary}");
        }
        None => {
            print!("{table}");
            eprint!("{summary}");
        }
    }
    std::io::stdout().flush().ok();
    fit?;
    Ok(ExitCode::SUCCESS)
}

fn bound(g: &GlobalOpts, args: &BoundArgs) -> CliResult<ExitCode> {
    println!("# seed={} mc_points={}", g.seed, args.mc_points);
    let mc_seed = derive_seed(g.seed, Stream::CellMoment, 0);
    let (samples, grad_sup, domain, measured) = match (&args.target, &args.samples) {
        (Some(name), _) => {
            let target = parse_target(name)?;
            let n = args
                .n
                .ok_or_else(|| CliError::Usage("--target needs --n".into()))?;
            let domain = target.domain();
            let train_seed = derive_seed(g.seed, Stream::Training, n as u64);
            let samples = training_samples(
                |x| target.eval(x),
                &domain,
                n,
                args.sampling.into(),
                train_seed,
            )?;
            let net: NetworkParams = build_network(&samples, &build_options(g))?;
            let m = args
                .m
                .unwrap_or_else(|| ConvergenceConfig::default_m(target.dim()));
            let report = validate(&net, |x| target.eval(x), &domain, m, g.seed)?;
            let grad_sup = target.grad_sup().ok_or_else(|| {
                CliError::Usage(format!(
                    "target `{target}` is discontinuous; no gradient bound applies"
                ))
            })?;
            println!("target: {target}");
            (samples, grad_sup, domain, Some(report))
        }
        (None, Some(path)) => {
            let samples = load_samples_csv(path, args.header)?;
            let grad_sup = args
                .grad_sup
                .ok_or_else(|| CliError::Usage("--samples needs --grad-sup".into()))?;
            let spec = args
                .domain
                .as_deref()
                .ok_or_else(|| CliError::Usage("--samples needs --domain".into()))?;
            let domain = parse_domain(spec, samples.dim())?;
            (samples, grad_sup, domain, None)
        }
        (None, None) => return Err(CliError::Usage("give --target or --samples".into())),
    };
    let thm = theorem_bound(&samples, grad_sup, &domain, args.mc_points, mc_seed)?;
    let cor = corollary_bound(&samples, grad_sup, &domain, args.mc_points, mc_seed)?;
    println!("n: {}", samples.len());
    println!("d: {}", samples.dim());
    println!("grad_sup: {grad_sup}");
    if let Some(r) = measured {
        println!("eps_inf: {}", r.eps_inf);
        println!("eps_2: {}", r.eps_2);
        println!("rms: {} (std error {})", r.rms, r.rms_std_error);
    }
    println!("theorem_bound: {} (std error {})", thm.value, thm.std_error);
    println!("corollary_bound: {cor}");
    Ok(ExitCode::SUCCESS)
}
