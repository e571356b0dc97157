//! Single-site rate functions `eta` of zero-range processes.
//!
//! Every family is strictly increasing with `eta(0) = 0`, and keeps its
//! family under the rescaling `z -> c eta(s z)`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Eta {
    /// `eta(z) = coef z^exponent` with `0 < exponent < 2`.
    Power { coef: f64, exponent: f64 },
    /// `eta(z) = slope z` up to `knee`, then continuing with `tail_slope`.
    AffineCapped {
        slope: f64,
        knee: f64,
        tail_slope: f64,
    },
    /// Piecewise-linear interpolation of `(z, eta)` knots starting at `(0, 0)`,
    /// extended linearly beyond the last knot.
    Table { z: Vec<f64>, values: Vec<f64> },
}

struct Pwl<'a> {
    z: std::borrow::Cow<'a, [f64]>,
    v: std::borrow::Cow<'a, [f64]>,
    tail: f64,
}

impl Pwl<'_> {
    fn slope(&self, k: usize) -> f64 {
        if k + 1 < self.z.len() {
            (self.v[k + 1] - self.v[k]) / (self.z[k + 1] - self.z[k])
        } else {
            self.tail
        }
    }

    fn segment_end(&self, k: usize) -> f64 {
        self.z.get(k + 1).copied().unwrap_or(f64::INFINITY)
    }

    fn eval(&self, u: f64) -> f64 {
        let k = self.z.partition_point(|&zk| zk <= u).saturating_sub(1);
        self.v[k] + self.slope(k) * (u - self.z[k])
    }

    fn inverse(&self, w: f64) -> f64 {
        let k = self.v.partition_point(|&vk| vk <= w).saturating_sub(1);
        self.z[k] + (w - self.v[k]) / self.slope(k)
    }

    /// `sum over segments of int_{z_k}^{min(u, z_{k+1})} F(eta(s)) ds` where
    /// `prim(w) / slope` is an antiderivative in `w = eta(s)`.
    fn integrate(&self, u: f64, prim: impl Fn(f64) -> f64) -> f64 {
        let mut acc = 0.0;
        for k in 0..self.z.len() {
            if self.z[k] >= u {
                break;
            }
            let hi = self.segment_end(k).min(u);
            let beta = self.slope(k);
            let w0 = self.v[k];
            let w1 = w0 + beta * (hi - self.z[k]);
            acc += (prim(w1) - prim(w0)) / beta;
        }
        acc
    }
}

fn xlogx_minus_x(w: f64) -> f64 {
    if w == 0.0 {
        0.0
    } else {
        w * w.ln() - w
    }
}

impl Eta {
    pub fn identity() -> Self {
        Eta::Power {
            coef: 1.0,
            exponent: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |d: String| {
            Err(Error::ModelInvalid {
                invariant: "eta",
                detail: d,
            })
        };
        match self {
            Eta::Power { coef, exponent } => {
                if !(*coef > 0.0 && coef.is_finite()) {
                    return bad(format!("power coefficient {coef} must be positive"));
                }
                if !(*exponent > 0.0 && *exponent < 2.0) {
                    return bad(format!(
                        "power exponent {exponent} outside (0, 2): energy integral diverges or eta is not increasing"
                    ));
                }
            }
            Eta::AffineCapped {
                slope,
                knee,
                tail_slope,
            } => {
                if !(*slope > 0.0 && *knee > 0.0 && *tail_slope > 0.0) {
                    return bad("affine-capped parameters must be positive".into());
                }
            }
            Eta::Table { z, values } => {
                if z.len() < 2 || z.len() != values.len() {
                    return bad("table needs at least two knots of equal length".into());
                }
                if z[0] != 0.0 || values[0] != 0.0 {
                    return bad("table must start at (0, 0)".into());
                }
                if z.windows(2).any(|w| !(w[1] > w[0])) || values.windows(2).any(|w| !(w[1] > w[0])) {
                    return bad("table knots must be strictly increasing".into());
                }
            }
        }
        Ok(())
    }

    fn pwl(&self) -> Option<Pwl<'_>> {
        match self {
            Eta::Power { .. } => None,
            Eta::AffineCapped {
                slope,
                knee,
                tail_slope,
            } => Some(Pwl {
                z: vec![0.0, *knee].into(),
                v: vec![0.0, slope * knee].into(),
                tail: *tail_slope,
            }),
            Eta::Table { z, values } => {
                let n = z.len();
                let tail = (values[n - 1] - values[n - 2]) / (z[n - 1] - z[n - 2]);
                Some(Pwl {
                    z: z.as_slice().into(),
                    v: values.as_slice().into(),
                    tail,
                })
            }
        }
    }

    pub fn eval(&self, u: f64) -> f64 {
        match self {
            Eta::Power { coef, exponent } => coef * u.powf(*exponent),
            _ => self.pwl().map(|p| p.eval(u)).unwrap_or(f64::NAN),
        }
    }

    pub fn inverse(&self, w: f64) -> f64 {
        match self {
            Eta::Power { coef, exponent } => (w / coef).powf(1.0 / exponent),
            _ => self.pwl().map(|p| p.inverse(w)).unwrap_or(f64::NAN),
        }
    }

    /// `int_0^u log eta(s) ds`.
    pub fn log_integral(&self, u: f64) -> f64 {
        match self {
            Eta::Power { coef, exponent } => u * coef.ln() + exponent * xlogx_minus_x(u),
            _ => self.pwl().map(|p| p.integrate(u, xlogx_minus_x)).unwrap_or(f64::NAN),
        }
    }

    /// `int_0^u eta(s)^{-1/2} ds`.
    pub fn inv_sqrt_integral(&self, u: f64) -> f64 {
        match self {
            Eta::Power { coef, exponent } => {
                let q = 1.0 - 0.5 * exponent;
                u.powf(q) / (q * coef.sqrt())
            }
            _ => self.pwl().map(|p| p.integrate(u, |w| 2.0 * w.sqrt())).unwrap_or(f64::NAN),
        }
    }

    /// The function `z -> out * eta(scale * z)`.
    pub fn rescaled(&self, scale: f64, out: f64) -> Eta {
        match self {
            Eta::Power { coef, exponent } => Eta::Power {
                coef: coef * out * scale.powf(*exponent),
                exponent: *exponent,
            },
            Eta::AffineCapped {
                slope,
                knee,
                tail_slope,
            } => Eta::AffineCapped {
                slope: slope * out * scale,
                knee: knee / scale,
                tail_slope: tail_slope * out * scale,
            },
            Eta::Table { z, values } => Eta::Table {
                z: z.iter().map(|v| v / scale).collect(),
                values: values.iter().map(|v| v * out).collect(),
            },
        }
    }
}
