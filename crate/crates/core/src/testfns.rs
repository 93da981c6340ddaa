//! Benchmark target functions with their analytic gradient bounds.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::str::FromStr;

use crate::domain::BoxDomain;
use crate::error::{Error, Result};

#[inline]
fn s(x: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        0.0
    }
}

/// `cos(4πx)` on `[0, 1]`.
pub fn smooth_1d(x: f64) -> f64 {
    (4.0 * PI * x).cos()
}

/// `sin(4πx)` on `[0, 1]`.
pub fn sine_1d(x: f64) -> f64 {
    (4.0 * PI * x).sin()
}

/// `3 s(x - 0.313) + s(x - 0.747) + 2 cos(4πx)` on `[0, 1]`, with `s(0) = 1`.
pub fn discontinuous_1d(x: f64) -> f64 {
    3.0 * s(x - 0.313) + s(x - 0.747) + 2.0 * smooth_1d(x)
}

/// `sin(ω Σ x_i)`.
pub fn f_s(x: &[f64], omega: f64) -> f64 {
    (omega * x.iter().sum::<f64>()).sin()
}

/// `exp(-Σ (x_i / 2)²)`.
pub fn f_g(x: &[f64]) -> f64 {
    (-x.iter().map(|v| (0.5 * v) * (0.5 * v)).sum::<f64>()).exp()
}

/// `sup ‖∇f_G‖₂` over a box.
///
/// `‖∇f_G(x)‖ = (r/2) exp(-r²/4)` with `r = ‖x‖` rises to its peak at
/// `r = √2` and then decays, so the supremum is attained at the radius in
/// `[r_min, r_max]` closest to `√2`.
pub fn gauss_grad_sup(domain: &BoxDomain) -> f64 {
    let (mut rmin2, mut rmax2) = (0.0, 0.0);
    for (&a, &b) in domain.lo().iter().zip(domain.hi()) {
        let near = 0.0_f64.clamp(a, b);
        rmin2 += near * near;
        rmax2 += (a * a).max(b * b);
    }
    let r = SQRT_2.clamp(rmin2.sqrt(), rmax2.sqrt());
    0.5 * r * (-0.25 * r * r).exp()
}

#[derive(Debug, Clone, PartialEq)]
pub enum Target {
    /// `cos(4πx)` on `[0,1]`.
    Cos1d,
    /// `sin(4πx)` on `[0,1]`.
    Sin1d,
    /// Two jumps plus `2cos(4πx)` on `[0,1]`.
    Jump1d,
    /// `f(x) = x` on `[0,1]`.
    Linear1d,
    /// `f_S` on `[0,1]^d`.
    Sine {
        dim: usize,
        omega: f64,
    },
    /// `f_G` on `[-1,1]^d`.
    Gauss {
        dim: usize,
    },
    Constant {
        dim: usize,
        value: f64,
    },
}

impl Target {
    pub fn dim(&self) -> usize {
        match *self {
            Target::Cos1d | Target::Sin1d | Target::Jump1d | Target::Linear1d => 1,
            Target::Sine { dim, .. } | Target::Gauss { dim } | Target::Constant { dim, .. } => dim,
        }
    }

    pub fn domain(&self) -> BoxDomain {
        let d = self.dim();
        let (lo, hi) = match self {
            Target::Gauss { .. } => (-1.0, 1.0),
            _ => (0.0, 1.0),
        };
        BoxDomain::cube(d, lo, hi).expect("target dimension is positive")
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match *self {
            Target::Cos1d => smooth_1d(x[0]),
            Target::Sin1d => sine_1d(x[0]),
            Target::Jump1d => discontinuous_1d(x[0]),
            Target::Linear1d => x[0],
            Target::Sine { omega, .. } => f_s(x, omega),
            Target::Gauss { .. } => f_g(x),
            Target::Constant { value, .. } => value,
        }
    }

    /// `sup ‖∇f‖₂` over [`domain`](Self::domain); `None` for discontinuous targets.
    pub fn grad_sup(&self) -> Option<f64> {
        match *self {
            Target::Cos1d | Target::Sin1d => Some(4.0 * PI),
            Target::Jump1d => None,
            Target::Linear1d => Some(1.0),
            Target::Sine { dim, omega } => Some(omega.abs() * (dim as f64).sqrt()),
            Target::Gauss { .. } => Some(gauss_grad_sup(&self.domain())),
            Target::Constant { .. } => Some(0.0),
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::Cos1d => f.write_str("cos1d"),
            Target::Sin1d => f.write_str("sin1d"),
            Target::Jump1d => f.write_str("jump1d"),
            Target::Linear1d => f.write_str("linear1d"),
            Target::Sine { dim, omega } => write!(f, "sine:d={dim}:omega={omega}"),
            Target::Gauss { dim } => write!(f, "gauss:d={dim}"),
            Target::Constant { dim, value } => write!(f, "const:d={dim}:value={value}"),
        }
    }
}

/// Parses names like `cos1d`, `jump1d`, `gauss:d=4`,
/// `sine:d=2:omega=6.283185307179586` or `const:d=2:value=1.5`.
/// `sine` without `omega` uses `2π`.
impl FromStr for Target {
    type Err = Error;

    fn from_str(spec: &str) -> Result<Self> {
        let unknown = || Error::UnknownTarget(spec.to_string());
        let mut parts = spec.split(':');
        let head = parts.next().unwrap_or_default();
        let mut dim = None;
        let mut omega = None;
        let mut value = None;
        for part in parts {
            let (key, raw) = part.split_once('=').ok_or_else(unknown)?;
            match key {
                "d" => dim = Some(raw.parse::<usize>().map_err(|_| unknown())?),
                "omega" => omega = Some(parse_real(raw).ok_or_else(unknown)?),
                "value" => value = Some(parse_real(raw).ok_or_else(unknown)?),
                _ => return Err(unknown()),
            }
        }
        let dim_or = |default: usize| match dim.unwrap_or(default) {
            0 => Err(unknown()),
            d => Ok(d),
        };
        let plain = |t: Target| match (dim, omega, value) {
            (None | Some(1), None, None) => Ok(t),
            _ => Err(unknown()),
        };
        match head {
            "cos1d" => plain(Target::Cos1d),
            "sin1d" => plain(Target::Sin1d),
            "jump1d" => plain(Target::Jump1d),
            "linear1d" => plain(Target::Linear1d),
            "sine" if value.is_none() => Ok(Target::Sine {
                dim: dim_or(2)?,
                omega: omega.unwrap_or(2.0 * PI),
            }),
            "gauss" if omega.is_none() && value.is_none() => Ok(Target::Gauss { dim: dim_or(2)? }),
            "const" if omega.is_none() => Ok(Target::Constant {
                dim: dim_or(1)?,
                value: value.unwrap_or(1.0),
            }),
            _ => Err(unknown()),
        }
    }
}

fn parse_real(raw: &str) -> Option<f64> {
    match raw {
        "pi" => Some(PI),
        "2pi" => Some(2.0 * PI),
        _ => raw.parse().ok().filter(|v: &f64| v.is_finite()),
    }
}
