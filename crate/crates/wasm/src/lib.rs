//! Browser bindings: an editable 2-D network rendered as a raster, per-point
//! activation traces, and small convergence studies.

use serde::Serialize;
use voronoi_fnn::analysis::{measure_convergence, ConvergenceConfig};
use voronoi_fnn::domain::{derive_seed, Stream};
use voronoi_fnn::{
    build_network, fit_rate, nearest, BoxDomain, BuildOptions, NetworkParams, SampleSet, Sampling,
    Target, TieMode,
};
use wasm_bindgen::prelude::*;

/// Label for points placed in the demo square.
fn label(x: &[f64]) -> f64 {
    voronoi_fnn::testfns::f_s(x, 2.0 * std::f64::consts::PI)
}

/// Samples on `[0,1]^2` labelled by `sin(2π(x + y))`, and their network.
#[wasm_bindgen]
pub struct Demo {
    points: Vec<f64>,
    net: NetworkParams,
}

#[wasm_bindgen]
impl Demo {
    /// `n` uniform random samples drawn from `seed`.
    #[wasm_bindgen(constructor)]
    pub fn new(n: usize, seed: u32) -> Result<Demo, String> {
        let domain = BoxDomain::unit(2).map_err(|e| e.to_string())?;
        let points = domain.sample(
            n,
            derive_seed(seed.into(), Stream::Training, n as u64),
            Stream::Training,
            0,
        );
        Demo::from_points(points, TieMode::default())
    }

    fn from_points(points: Vec<f64>, tie_mode: TieMode) -> Result<Demo, String> {
        let values = points.chunks_exact(2).map(label).collect();
        let samples = SampleSet::new(2, points.clone(), values).map_err(|e| e.to_string())?;
        let opts = BuildOptions::default().with_tie_mode(tie_mode);
        let net = build_network(&samples, &opts).map_err(|e| e.to_string())?;
        Ok(Demo { points, net })
    }

    /// Adds a generator and rebuilds; rejects duplicates.
    pub fn add_point(&mut self, x: f64, y: f64) -> Result<(), String> {
        let mut points = self.points.clone();
        points.extend([x, y]);
        *self = Demo::from_points(points, self.net.tie_mode())?;
        Ok(())
    }

    /// `"paper"` or `"lowest"`.
    pub fn set_tie_mode(&mut self, mode: &str) -> Result<(), String> {
        let mode: TieMode = mode
            .parse()
            .map_err(|e: voronoi_fnn::Error| e.to_string())?;
        self.net = self.net.with_tie_mode(mode);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.net.n()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn first_layer_len(&self) -> usize {
        self.net.first_layer_len()
    }

    /// Generators as `[x0, y0, x1, y1, ...]`.
    pub fn points(&self) -> Vec<f64> {
        self.points.clone()
    }

    /// RGBA raster of the network output over the unit square, row 0 at
    /// `y = 1`. Pixels whose right or lower neighbour has a different
    /// output are drawn dark, which traces the cell boundaries.
    pub fn render(&self, width: usize, height: usize) -> Result<Vec<u8>, String> {
        let queries: Vec<[f64; 2]> = (0..height)
            .flat_map(|r| {
                (0..width).map(move |c| {
                    [
                        (c as f64 + 0.5) / width as f64,
                        1.0 - (r as f64 + 0.5) / height as f64,
                    ]
                })
            })
            .collect();
        let ys = self.net.eval_batch(&queries).map_err(|e| e.to_string())?;
        let (lo, hi) = ys
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &y| {
                (a.min(y), b.max(y))
            });
        let span = if hi > lo { hi - lo } else { 1.0 };
        let mut rgba = Vec::with_capacity(width * height * 4);
        for r in 0..height {
            for c in 0..width {
                let i = r * width + c;
                let edge = (c + 1 < width && ys[i + 1] != ys[i])
                    || (r + 1 < height && ys[i + width] != ys[i]);
                let [red, green, blue] = if edge {
                    [30, 30, 30]
                } else {
                    palette((ys[i] - lo) / span)
                };
                rgba.extend([red, green, blue, 255]);
            }
        }
        Ok(rgba)
    }

    /// JSON description of the full forward pass at `(x, y)`.
    pub fn trace(&self, x: f64, y: f64) -> Result<String, String> {
        let q = [x, y];
        let trace = self.net.eval_trace(&q).map_err(|e| e.to_string())?;
        let near = nearest(self.net.samples(), &q).map_err(|e| e.to_string())?;
        let n = self.net.n();
        let mut groups: Vec<Group> = (0..n)
            .map(|k| Group {
                k,
                on: trace.group(k).iter().filter(|&&z| z == 1).count(),
                fired: trace.z2[k] == 1,
            })
            .collect();
        groups.sort_by(|a, b| b.on.cmp(&a.on).then(a.k.cmp(&b.k)));
        groups.truncate(5);
        let report = Trace {
            x,
            y,
            output: trace.output,
            firing: trace.firing().collect(),
            nearest: near.index,
            nearest_value: self.net.samples().value(near.index),
            tied: near.tied,
            first_layer: self.net.first_layer_len(),
            first_layer_on: trace.z1_flat().iter().filter(|&&z| z == 1).count(),
            second_layer_threshold: self.net.second_layer_threshold(),
            top_groups: groups,
            tie_mode: self.net.tie_mode().to_string(),
        };
        serde_json::to_string(&report).map_err(|e| e.to_string())
    }
}

#[derive(Serialize)]
struct Group {
    k: usize,
    on: usize,
    fired: bool,
}

#[derive(Serialize)]
struct Trace {
    x: f64,
    y: f64,
    output: f64,
    firing: Vec<usize>,
    nearest: usize,
    nearest_value: f64,
    tied: bool,
    first_layer: usize,
    first_layer_on: usize,
    second_layer_threshold: f64,
    top_groups: Vec<Group>,
    tie_mode: String,
}

// blue -> white -> red
fn palette(t: f64) -> [u8; 3] {
    let t = t.clamp(0.0, 1.0);
    let mix = |a: f64, b: f64, s: f64| (a + (b - a) * s).round() as u8;
    if t < 0.5 {
        let s = 2.0 * t;
        [
            mix(40.0, 245.0, s),
            mix(90.0, 245.0, s),
            mix(200.0, 245.0, s),
        ]
    } else {
        let s = 2.0 * t - 1.0;
        [
            mix(245.0, 200.0, s),
            mix(245.0, 50.0, s),
            mix(245.0, 40.0, s),
        ]
    }
}

#[derive(Serialize)]
struct Row {
    n: usize,
    rms: f64,
    eps_inf: f64,
    theorem_bound: Option<f64>,
}

#[derive(Serialize)]
struct Curve {
    target: String,
    rows: Vec<Row>,
    slope: Option<f64>,
    reference_slope: f64,
}

/// Error-versus-n curve as JSON. `n_list` is comma separated; `sampling`
/// is `"grid"` (1-D only) or `"random"`.
#[wasm_bindgen]
pub fn convergence(
    target: &str,
    n_list: &str,
    sampling: &str,
    m: usize,
    seed: u32,
) -> Result<String, String> {
    let target: Target = target
        .parse()
        .map_err(|e: voronoi_fnn::Error| e.to_string())?;
    let n_list = n_list
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| format!("bad training size `{s}`"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let sampling = match sampling {
        "grid" => Sampling::UniformGrid1D,
        "random" => Sampling::Random,
        other => return Err(format!("unknown sampling `{other}`")),
    };
    let config = ConvergenceConfig {
        n_list,
        sampling,
        m,
        seed: seed.into(),
        repetitions: 1,
        mc_points: 4 * m,
        build: BuildOptions::default(),
    };
    let entries = measure_convergence(
        |x| target.eval(x),
        &target.domain(),
        target.grad_sup(),
        &config,
    )
    .map_err(|e| e.to_string())?;
    let slope = fit_rate(&entries.iter().map(|e| (e.n, e.rms)).collect::<Vec<_>>()).ok();
    let curve = Curve {
        target: target.to_string(),
        reference_slope: -1.0 / target.dim() as f64,
        rows: entries
            .iter()
            .map(|e| Row {
                n: e.n,
                rms: e.rms,
                eps_inf: e.eps_inf,
                theorem_bound: e.theorem_bound.map(|b| b.value),
            })
            .collect(),
        slope,
    };
    serde_json::to_string(&curve).map_err(|e| e.to_string())
}
