//! Explicit Runge-Kutta integration with dense sampling.
//!
//! Second-order systems are integrated through their first-order reduction
//! `[pos, vel]`. Samples between steps come from the continuous extension of
//! each accepted step (cubic Hermite for RK4, the fourth-order Dormand-Prince
//! interpolant for RK45), so the sample schedule never constrains the step size.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `ẏ = f(t, y)`.
pub trait OdeSystem {
    fn dim(&self) -> usize;
    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]);
}

/// `q̈ = g(t, q, q̇)`.
pub trait SecondOrderSystem {
    fn n_pos(&self) -> usize;
    fn accel(&self, t: f64, pos: &[f64], vel: &[f64], acc: &mut [f64]);
}

/// First-order reduction of a [`SecondOrderSystem`] with state `[pos, vel]`.
#[derive(Debug, Clone, Copy)]
pub struct SecondOrder<S>(pub S);

impl<S: SecondOrderSystem> OdeSystem for SecondOrder<S> {
    fn dim(&self) -> usize {
        2 * self.0.n_pos()
    }

    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]) {
        let n = self.0.n_pos();
        let (pos, vel) = y.split_at(n);
        let (dpos, dvel) = dy.split_at_mut(n);
        dpos.copy_from_slice(vel);
        self.0.accel(t, pos, vel, dvel);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase", deny_unknown_fields)]
pub enum Method {
    /// Classical fourth-order Runge-Kutta with a fixed step.
    Rk4 { step: f64 },
    /// Dormand-Prince 5(4) with error control.
    Rk45 {
        abs_tol: f64,
        rel_tol: f64,
        min_step: f64,
        max_step: f64,
    },
}

impl Default for Method {
    fn default() -> Self {
        Method::Rk45 {
            abs_tol: 1e-8,
            rel_tol: 1e-8,
            min_step: 1e-12,
            max_step: f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SampleSchedule {
    /// Every `k`-th step, plus the final time.
    Stride(usize),
    /// Explicit times inside `[t0, t_end]`.
    Times(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorConfig {
    pub method: Method,
    pub t_end: f64,
    pub schedule: SampleSchedule,
}

impl IntegratorConfig {
    pub fn validate(&self, t0: f64) -> Result<()> {
        if !(t0 > 0.0) || !(self.t_end > t0) || !self.t_end.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "need t_end > t0 > 0, got t0 = {t0}, t_end = {}",
                self.t_end
            )));
        }
        match self.method {
            Method::Rk4 { step } if !(step > 0.0) => {
                return Err(Error::InvalidArgument(format!("step must be positive, got {step}")))
            }
            Method::Rk45 {
                abs_tol,
                rel_tol,
                min_step,
                max_step,
            } if !(abs_tol > 0.0 && rel_tol > 0.0 && min_step > 0.0 && max_step >= min_step) => {
                return Err(Error::InvalidArgument(
                    "tolerances and step bounds must be positive with max_step >= min_step".into(),
                ))
            }
            _ => {}
        }
        match &self.schedule {
            SampleSchedule::Stride(0) => {
                return Err(Error::InvalidArgument("sample stride must be positive".into()))
            }
            SampleSchedule::Times(ts) => {
                if ts.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(Error::InvalidArgument("sample times must be strictly increasing".into()));
                }
                if ts.iter().any(|&s| s < t0 || s > self.t_end) {
                    return Err(Error::InvalidArgument("sample times must lie in [t0, t_end]".into()));
                }
            }
            SampleSchedule::Stride(_) => {}
        }
        Ok(())
    }
}

/// Sampled states of an integration run.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

/// `n` geometrically spaced times from `t0` to `t_end` inclusive.
pub fn log_sample_schedule(t0: f64, t_end: f64, n: usize) -> Result<Vec<f64>> {
    if !(t0 > 0.0) || !(t_end > t0) || n < 2 || !t_end.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "log schedule needs t_end > t0 > 0 and n >= 2, got ({t0}, {t_end}, {n})"
        )));
    }
    let (l0, l1) = (t0.ln(), t_end.ln());
    let mut ts: Vec<f64> = (0..n)
        .map(|k| (l0 + (l1 - l0) * k as f64 / (n - 1) as f64).exp())
        .collect();
    ts[0] = t0;
    ts[n - 1] = t_end;
    Ok(ts)
}

struct Sampler<'a> {
    schedule: &'a SampleSchedule,
    next: usize,
    steps: usize,
    out: Solution,
}

impl<'a> Sampler<'a> {
    fn new(schedule: &'a SampleSchedule, t0: f64, y0: &[f64]) -> Self {
        let mut next = 0;
        if let SampleSchedule::Times(ts) = schedule {
            while next < ts.len() && ts[next] <= t0 {
                next += 1;
            }
        }
        Self {
            schedule,
            next,
            steps: 0,
            out: Solution {
                times: vec![t0],
                states: vec![y0.to_vec()],
                accepted_steps: 0,
                rejected_steps: 0,
            },
        }
    }

    /// Records samples falling in `(ta, tb]` after an accepted step.
    fn step(&mut self, tb: f64, yb: &[f64], last: bool, interp: impl Fn(f64) -> Vec<f64>) {
        self.steps += 1;
        match self.schedule {
            SampleSchedule::Stride(k) => {
                if self.steps.is_multiple_of(*k) || last {
                    self.push(tb, yb.to_vec());
                }
            }
            SampleSchedule::Times(ts) => {
                while self.next < ts.len() && (ts[self.next] <= tb || last) {
                    let s = ts[self.next];
                    let y = if s >= tb { yb.to_vec() } else { interp(s) };
                    self.push(s, y);
                    self.next += 1;
                }
            }
        }
    }

    fn push(&mut self, t: f64, y: Vec<f64>) {
        if self.out.times.last().is_some_and(|&last| t <= last) {
            return;
        }
        self.out.times.push(t);
        self.out.states.push(y);
    }
}

fn hermite(ta: f64, ya: &[f64], fa: &[f64], tb: f64, yb: &[f64], fb: &[f64], t: f64) -> Vec<f64> {
    let h = tb - ta;
    let s = (t - ta) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    (0..ya.len())
        .map(|i| h00 * ya[i] + h10 * h * fa[i] + h01 * yb[i] + h11 * h * fb[i])
        .collect()
}

fn all_finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// Integrates `sys` from `(t0, y0)` to `cfg.t_end`.
pub fn integrate<S: OdeSystem + ?Sized>(sys: &S, t0: f64, y0: &[f64], cfg: &IntegratorConfig) -> Result<Solution> {
    cfg.validate(t0)?;
    if y0.len() != sys.dim() {
        return Err(Error::DimensionMismatch {
            what: "initial state",
            expected: sys.dim(),
            got: y0.len(),
        });
    }
    let mut f0 = vec![0.0; y0.len()];
    sys.rhs(t0, y0, &mut f0);
    if !all_finite(y0) || !all_finite(&f0) {
        return Err(Error::Diverged { t: t0, last_finite: t0 });
    }
    match cfg.method {
        Method::Rk4 { step } => rk4(sys, t0, y0, f0, step, cfg),
        Method::Rk45 {
            abs_tol,
            rel_tol,
            min_step,
            max_step,
        } => dopri5(sys, t0, y0, f0, Tolerances { abs_tol, rel_tol, min_step, max_step }, cfg),
    }
}

fn rk4<S: OdeSystem + ?Sized>(
    sys: &S,
    t0: f64,
    y0: &[f64],
    f0: Vec<f64>,
    step: f64,
    cfg: &IntegratorConfig,
) -> Result<Solution> {
    let n = y0.len();
    let mut sampler = Sampler::new(&cfg.schedule, t0, y0);
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k1 = f0;
    let (mut k2, mut k3, mut k4) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut tmp = vec![0.0; n];
    let mut y_new = vec![0.0; n];
    let mut f_new = vec![0.0; n];
    let total = ((cfg.t_end - t0) / step).ceil() as usize;

    for k in 1..=total {
        let t_next = if k == total { cfg.t_end } else { t0 + k as f64 * step };
        let h = t_next - t;
        for i in 0..n {
            tmp[i] = y[i] + 0.5 * h * k1[i];
        }
        sys.rhs(t + 0.5 * h, &tmp, &mut k2);
        for i in 0..n {
            tmp[i] = y[i] + 0.5 * h * k2[i];
        }
        sys.rhs(t + 0.5 * h, &tmp, &mut k3);
        for i in 0..n {
            tmp[i] = y[i] + h * k3[i];
        }
        sys.rhs(t + h, &tmp, &mut k4);
        for i in 0..n {
            y_new[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        sys.rhs(t_next, &y_new, &mut f_new);
        if !all_finite(&y_new) || !all_finite(&f_new) {
            return Err(Error::Diverged { t: t_next, last_finite: t });
        }
        sampler.step(t_next, &y_new, k == total, |s| hermite(t, &y, &k1, t_next, &y_new, &f_new, s));
        t = t_next;
        std::mem::swap(&mut y, &mut y_new);
        std::mem::swap(&mut k1, &mut f_new);
    }
    sampler.out.accepted_steps = total;
    Ok(sampler.out)
}

#[derive(Debug, Clone, Copy)]
struct Tolerances {
    abs_tol: f64,
    rel_tol: f64,
    min_step: f64,
    max_step: f64,
}

// Dormand-Prince 5(4) tableau
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

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Fourth-order continuous extension of one Dormand-Prince step.
struct DenseStep {
    r: [Vec<f64>; 5],
}

impl DenseStep {
    #[allow(clippy::too_many_arguments)]
    fn new(h: f64, y: &[f64], y_new: &[f64], k1: &[f64], k3: &[f64], k4: &[f64], k5: &[f64], k6: &[f64], k7: &[f64]) -> Self {
        let n = y.len();
        let mut r = [y.to_vec(), vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        for i in 0..n {
            let diff = y_new[i] - y[i];
            let bspl = h * k1[i] - diff;
            r[1][i] = diff;
            r[2][i] = bspl;
            r[3][i] = diff - h * k7[i] - bspl;
            r[4][i] = h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
        }
        Self { r }
    }

    fn eval(&self, theta: f64) -> Vec<f64> {
        let s1 = 1.0 - theta;
        (0..self.r[0].len())
            .map(|i| {
                self.r[0][i]
                    + theta * (self.r[1][i] + s1 * (self.r[2][i] + theta * (self.r[3][i] + s1 * self.r[4][i])))
            })
            .collect()
    }
}

fn dopri5<S: OdeSystem + ?Sized>(
    sys: &S,
    t0: f64,
    y0: &[f64],
    f0: Vec<f64>,
    tol: Tolerances,
    cfg: &IntegratorConfig,
) -> Result<Solution> {
    let n = y0.len();
    let t_end = cfg.t_end;
    let mut sampler = Sampler::new(&cfg.schedule, t0, y0);
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k1 = f0;
    let mut k = vec![vec![0.0; n]; 6]; // k2..k7
    let mut tmp = vec![0.0; n];
    let mut y_new = vec![0.0; n];
    let mut rejected = 0usize;
    let mut accepted = 0usize;

    let scale = |y: &[f64], i: usize, yn: &[f64]| tol.abs_tol + tol.rel_tol * y[i].abs().max(yn[i].abs());
    let mut h = initial_step(sys, t0, y0, &k1, tol, t_end);
    let mut last_rejected = false;

    loop {
        let remaining = t_end - t;
        let mut last = false;
        if h >= remaining {
            h = remaining;
            last = true;
        }

        let [k2, k3, k4, k5, k6, k7] = &mut k[..] else { unreachable!() };
        for i in 0..n {
            tmp[i] = y[i] + h * A21 * k1[i];
        }
        sys.rhs(t + C2 * h, &tmp, k2);
        for i in 0..n {
            tmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        sys.rhs(t + C3 * h, &tmp, k3);
        for i in 0..n {
            tmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        sys.rhs(t + C4 * h, &tmp, k4);
        for i in 0..n {
            tmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        sys.rhs(t + C5 * h, &tmp, k5);
        for i in 0..n {
            tmp[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        let t_new = if last { t_end } else { t + h };
        sys.rhs(t_new, &tmp, k6);
        for i in 0..n {
            y_new[i] = y[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]);
        }
        sys.rhs(t_new, &y_new, k7);

        let mut err = 0.0;
        for i in 0..n {
            let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let r = e / scale(&y, i, &y_new);
            err += r * r;
        }
        err = (err / n.max(1) as f64).sqrt();

        if !err.is_finite() || !all_finite(&y_new) || !all_finite(k7) {
            // a blown-up trial step; shrink hard before concluding divergence
            rejected += 1;
            h *= 0.1;
            if h < tol.min_step {
                return Err(Error::Diverged { t: t + h, last_finite: t });
            }
            last_rejected = true;
            continue;
        }

        if err <= 1.0 {
            accepted += 1;
            sampler.step(t_new, &y_new, last, |s| {
                DenseStep::new(h, &y, &y_new, &k1, k3, k4, k5, k6, k7).eval((s - t) / h)
            });
            t = t_new;
            std::mem::swap(&mut y, &mut y_new);
            std::mem::swap(&mut k1, k7);
            if last {
                break;
            }
            let mut factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if last_rejected {
                factor = factor.min(1.0);
            }
            h = (h * factor).min(tol.max_step);
            last_rejected = false;
        } else {
            rejected += 1;
            h *= (0.9 * err.powf(-0.2)).max(0.2);
            last_rejected = true;
            if h < tol.min_step {
                return Err(Error::StepUnderflow { t, h });
            }
        }
    }
    sampler.out.accepted_steps = accepted;
    sampler.out.rejected_steps = rejected;
    Ok(sampler.out)
}

fn initial_step<S: OdeSystem + ?Sized>(sys: &S, t0: f64, y0: &[f64], f0: &[f64], tol: Tolerances, t_end: f64) -> f64 {
    let n = y0.len();
    let rms = |v: &[f64]| {
        let s: f64 = v
            .iter()
            .zip(y0)
            .map(|(a, y)| (a / (tol.abs_tol + tol.rel_tol * y.abs())).powi(2))
            .sum();
        (s / n.max(1) as f64).sqrt()
    };
    let d0 = rms(y0);
    let d1 = rms(f0);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let y1: Vec<f64> = y0.iter().zip(f0).map(|(y, f)| y + h0 * f).collect();
    let mut f1 = vec![0.0; n];
    sys.rhs(t0 + h0, &y1, &mut f1);
    let diff: Vec<f64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
    let d2 = rms(&diff) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0)
        .min(h1)
        .min(tol.max_step)
        .min(t_end - t0)
        .max(tol.min_step)
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Decay;
    impl OdeSystem for Decay {
        fn dim(&self) -> usize {
            1
        }
        fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) {
            dy[0] = -y[0];
        }
    }

    struct Oscillator;
    impl SecondOrderSystem for Oscillator {
        fn n_pos(&self) -> usize {
            1
        }
        fn accel(&self, _t: f64, pos: &[f64], _vel: &[f64], acc: &mut [f64]) {
            acc[0] = -pos[0];
        }
    }

    struct Blowup;
    impl OdeSystem for Blowup {
        fn dim(&self) -> usize {
            1
        }
        fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) {
            dy[0] = y[0] * y[0];
        }
    }

    fn fixed(step: f64, t_end: f64) -> IntegratorConfig {
        IntegratorConfig {
            method: Method::Rk4 { step },
            t_end,
            schedule: SampleSchedule::Stride(1),
        }
    }

    #[test]
    fn log_schedule_examples() {
        let ts = log_sample_schedule(1.0, 100.0, 3).unwrap();
        assert_eq!(ts[0], 1.0);
        assert!((ts[1] - 10.0).abs() < 1e-12);
        assert_eq!(ts[2], 100.0);
        let ts = log_sample_schedule(2.0, 32.0, 5).unwrap();
        for (a, b) in ts.iter().zip([2.0, 4.0, 8.0, 16.0, 32.0]) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(log_sample_schedule(1.0, 1.0, 2).is_err());
        assert!(log_sample_schedule(0.0, 1.0, 2).is_err());
        assert!(log_sample_schedule(1.0, 2.0, 1).is_err());
    }

    #[test]
    fn zero_field_is_constant() {
        struct Zero;
        impl OdeSystem for Zero {
            fn dim(&self) -> usize {
                3
            }
            fn rhs(&self, _t: f64, _y: &[f64], dy: &mut [f64]) {
                dy.iter_mut().for_each(|d| *d = 0.0);
            }
        }
        let y0 = [1.0, -2.0, 3.5];
        for method in [Method::Rk4 { step: 0.1 }, Method::default()] {
            let cfg = IntegratorConfig {
                method,
                t_end: 5.0,
                schedule: SampleSchedule::Times(log_sample_schedule(1.0, 5.0, 7).unwrap()),
            };
            let sol = integrate(&Zero, 1.0, &y0, &cfg).unwrap();
            assert_eq!(sol.times.len(), 7);
            assert!(sol.states.iter().all(|s| s == &y0));
        }
    }

    #[test]
    fn rk4_exponential_decay() {
        let sol = integrate(&Decay, 1.0, &[1.0], &fixed(1e-3, 2.0)).unwrap();
        let y = sol.states.last().unwrap()[0];
        assert!((y - (-1f64).exp()).abs() < 1e-7);
        assert_eq!(*sol.times.last().unwrap(), 2.0);
    }

    #[test]
    fn rk4_order_is_four() {
        let exact = (-1f64).exp();
        let e1 = (integrate(&Decay, 1.0, &[1.0], &fixed(0.1, 2.0)).unwrap().states.last().unwrap()[0] - exact).abs();
        let e2 = (integrate(&Decay, 1.0, &[1.0], &fixed(0.05, 2.0)).unwrap().states.last().unwrap()[0] - exact).abs();
        let ratio = e1 / e2;
        assert!((8.0..=32.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn harmonic_oscillator_full_period() {
        let t_end = 1.0 + 2.0 * std::f64::consts::PI;
        let sys = SecondOrder(Oscillator);
        let sol = integrate(&sys, 1.0, &[1.0, 0.0], &fixed(1e-3, t_end)).unwrap();
        assert!((sol.states.last().unwrap()[0] - 1.0).abs() < 1e-6);
        let adaptive = IntegratorConfig {
            method: Method::default(),
            t_end,
            schedule: SampleSchedule::Stride(1),
        };
        let sol = integrate(&sys, 1.0, &[1.0, 0.0], &adaptive).unwrap();
        assert!((sol.states.last().unwrap()[0] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn dense_samples_match_closed_form() {
        let ts = log_sample_schedule(1.0, 10.0, 40).unwrap();
        let cfg = IntegratorConfig {
            method: Method::default(),
            t_end: 10.0,
            schedule: SampleSchedule::Times(ts.clone()),
        };
        let sol = integrate(&Decay, 1.0, &[1.0], &cfg).unwrap();
        assert_eq!(sol.times, ts);
        for (t, y) in sol.times.iter().zip(&sol.states) {
            assert!((y[0] - (-(t - 1.0)).exp()).abs() < 1e-7, "t = {t}");
        }
    }

    #[test]
    fn blowup_is_reported_as_divergence() {
        let err = integrate(&Blowup, 1.0, &[1.0], &fixed(1e-2, 3.0)).unwrap_err();
        assert!(matches!(err, Error::Diverged { .. }), "{err:?}");
        let cfg = IntegratorConfig {
            method: Method::default(),
            t_end: 3.0,
            schedule: SampleSchedule::Stride(1),
        };
        let err = integrate(&Blowup, 1.0, &[1.0], &cfg).unwrap_err();
        assert!(matches!(err, Error::Diverged { .. } | Error::StepUnderflow { .. }), "{err:?}");
    }

    #[test]
    fn config_validation() {
        assert!(integrate(&Decay, 1.0, &[1.0], &fixed(1e-2, 0.5)).is_err());
        assert!(integrate(&Decay, 1.0, &[1.0], &fixed(0.0, 2.0)).is_err());
        assert!(integrate(&Decay, 1.0, &[1.0, 2.0], &fixed(1e-2, 2.0)).is_err());
        let cfg = IntegratorConfig {
            method: Method::default(),
            t_end: 2.0,
            schedule: SampleSchedule::Times(vec![1.5, 1.2]),
        };
        assert!(integrate(&Decay, 1.0, &[1.0], &cfg).is_err());
    }
}
