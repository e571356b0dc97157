//! Adaptive Dormand–Prince 5(4) integrator with first-same-as-last stages.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rtol: 1e-8,
            atol: 1e-10,
        }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Right-hand side `y' = f(t, y)` written into the output slice.
pub trait Rhs {
    fn eval(&mut self, t: f64, y: &[f64], out: &mut [f64]) -> Result<()>;
}

impl<F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>> Rhs for F {
    fn eval(&mut self, t: f64, y: &[f64], out: &mut [f64]) -> Result<()> {
        self(t, y, out)
    }
}

/// Integrator state that can be advanced to successive target times.
pub struct Dopri5 {
    pub t: f64,
    pub y: Vec<f64>,
    h: f64,
    k1: Vec<f64>,
    fresh: bool,
    tol: Tolerances,
    pub steps: usize,
    pub max_steps: usize,
}

impl Dopri5 {
    pub fn new(t0: f64, y0: Vec<f64>, tol: Tolerances) -> Self {
        let n = y0.len();
        Self {
            t: t0,
            y: y0,
            h: 0.0,
            k1: vec![0.0; n],
            fresh: true,
            tol,
            steps: 0,
            max_steps: 10_000_000,
        }
    }

    fn initial_step<R: Rhs>(&mut self, f: &mut R, span: f64) -> Result<f64> {
        let n = self.y.len();
        let sc: Vec<f64> = self
            .y
            .iter()
            .map(|v| self.tol.atol + self.tol.rtol * v.abs())
            .collect();
        let norm = |v: &[f64]| -> f64 {
            (v.iter().zip(&sc).map(|(a, s)| (a / s).powi(2)).sum::<f64>() / n as f64).sqrt()
        };
        let d0 = norm(&self.y);
        let d1 = norm(&self.k1);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let h0 = h0.min(span.abs());
        let y1: Vec<f64> = self.y.iter().zip(&self.k1).map(|(y, k)| y + h0 * k).collect();
        let mut f1 = vec![0.0; n];
        f.eval(self.t + h0, &y1, &mut f1)?;
        let diff: Vec<f64> = f1.iter().zip(&self.k1).map(|(a, b)| a - b).collect();
        let d2 = norm(&diff) / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        Ok((100.0 * h0).min(h1).min(span.abs()))
    }

    /// Advances to `t_target`. After every accepted step `stop(t, y)` is
    /// consulted; when it returns `true` integration halts early and
    /// `Ok(false)` is returned.
    pub fn advance_to<R: Rhs, S: FnMut(f64, &[f64]) -> bool>(
        &mut self,
        f: &mut R,
        t_target: f64,
        mut stop: S,
    ) -> Result<bool> {
        let n = self.y.len();
        if self.fresh {
            let (t, y) = (self.t, self.y.clone());
            f.eval(t, &y, &mut self.k1)?;
            self.h = self.initial_step(f, t_target - self.t)?;
            self.fresh = false;
        }
        let mut k2 = vec![0.0; n];
        let mut k3 = vec![0.0; n];
        let mut k4 = vec![0.0; n];
        let mut k5 = vec![0.0; n];
        let mut k6 = vec![0.0; n];
        let mut k7 = vec![0.0; n];
        let mut tmp = vec![0.0; n];
        let mut ynew = vec![0.0; n];
        while self.t < t_target {
            let remaining = t_target - self.t;
            let last = self.h >= remaining;
            let h = if last { remaining } else { self.h };
            let h_min = 1e-14 * self.t.abs().max(1.0);
            if h < h_min && !last {
                return Err(Error::Stiffness { t: self.t, h });
            }
            if self.steps >= self.max_steps {
                return Err(Error::Convergence(format!("step limit {} reached", self.max_steps)));
            }
            let (t, y) = (self.t, &self.y);
            let stage = |tmp: &mut [f64], parts: &[(f64, &[f64])]| {
                for i in 0..n {
                    tmp[i] = y[i] + h * parts.iter().map(|(c, k)| c * k[i]).sum::<f64>();
                }
            };
            stage(&mut tmp, &[(A21, &self.k1)]);
            f.eval(t + C2 * h, &tmp, &mut k2)?;
            stage(&mut tmp, &[(A31, &self.k1), (A32, &k2)]);
            f.eval(t + C3 * h, &tmp, &mut k3)?;
            stage(&mut tmp, &[(A41, &self.k1), (A42, &k2), (A43, &k3)]);
            f.eval(t + C4 * h, &tmp, &mut k4)?;
            stage(&mut tmp, &[(A51, &self.k1), (A52, &k2), (A53, &k3), (A54, &k4)]);
            f.eval(t + C5 * h, &tmp, &mut k5)?;
            stage(&mut tmp, &[(A61, &self.k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]);
            f.eval(t + h, &tmp, &mut k6)?;
            stage(&mut ynew, &[(B1, &self.k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
            f.eval(t + h, &ynew, &mut k7)?;
            let mut err = 0.0;
            for i in 0..n {
                let e = h
                    * (E1 * self.k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i]
                        + E7 * k7[i]);
                let sc = self.tol.atol + self.tol.rtol * y[i].abs().max(ynew[i].abs());
                err += (e / sc).powi(2);
            }
            let err = (err / n as f64).sqrt();
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if err.is_finite() && err <= 1.0 {
                self.t = if last { t_target } else { t + h };
                std::mem::swap(&mut self.y, &mut ynew);
                std::mem::swap(&mut self.k1, &mut k7);
                self.steps += 1;
                if !last {
                    self.h = h * factor;
                }
                if stop(self.t, &self.y) {
                    return Ok(false);
                }
            } else {
                let shrink = if err.is_finite() { factor.min(1.0) } else { 0.2 };
                self.h = h * shrink;
                if self.h < h_min {
                    return Err(Error::Stiffness { t: self.t, h: self.h });
                }
            }
        }
        Ok(true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_over_ten_periods() {
        let mut f = |_t: f64, y: &[f64], out: &mut [f64]| {
            out[0] = y[1];
            out[1] = -y[0];
            Ok(())
        };
        let tol = Tolerances { rtol: 1e-11, atol: 1e-12 };
        let mut s = Dopri5::new(0.0, vec![1.0, 0.0], tol);
        let t_end = 20.0 * std::f64::consts::PI;
        assert!(s.advance_to(&mut f, t_end, |_, _| false).unwrap());
        assert!((s.y[0] - 1.0).abs() < 1e-8 && s.y[1].abs() < 1e-8);
        assert_eq!(s.t, t_end);
    }

    #[test]
    fn exponential_decay_and_early_stop() {
        let mut f = |_t: f64, y: &[f64], out: &mut [f64]| {
            out[0] = -y[0];
            Ok(())
        };
        let mut s = Dopri5::new(0.0, vec![1.0], Tolerances::default());
        s.advance_to(&mut f, 1.0, |_, _| false).unwrap();
        assert!((s.y[0] - (-1f64).exp()).abs() < 1e-8);
        let finished = s.advance_to(&mut f, 10.0, |_, y| y[0] < 0.1).unwrap();
        assert!(!finished && s.y[0] < 0.1 && s.t < 10.0);
    }
}
