//! Continuous-time dynamics on the one-hot weighted problem.
//!
//! With basis-vector inputs and class weights `π_k`, column `k` of `W` only
//! sees sample `k`. Starting from `W = 0` the column keeps the form
//! `(b, …, a, …, b)` with `a` on the diagonal, so each class reduces to the
//! two-dimensional system
//!
//! ```text
//! da/dt =  π (1 − e^a / (e^a + z e^b))
//! db/dt = −π e^b / (e^a + z e^b)          z = c − 1
//! ```
//!
//! whose solution is `a(t) = (f − z·W₀(e^{f/z} / z)) / c`, `b = −a/z` with
//! `f(t) = 1 + cπt`.

use alloc::vec::Vec;

use super::lambert::lambert_w0_exp;
use crate::error::{invalid, Error, Result};
use crate::math;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowParams {
    c: usize,
    pi: f64,
}

impl FlowParams {
    pub fn new(c: usize, pi: f64) -> Result<Self> {
        if c < 2 {
            return Err(invalid("c", "need at least 2 classes"));
        }
        if !(pi > 0.0 && pi <= 1.0) {
            return Err(invalid("pi", "must lie in (0, 1]"));
        }
        Ok(FlowParams { c, pi })
    }

    pub fn c(&self) -> usize {
        self.c
    }

    pub fn pi(&self) -> f64 {
        self.pi
    }

    pub fn z(&self) -> f64 {
        (self.c - 1) as f64
    }

    pub fn f(&self, t: f64) -> f64 {
        1.0 + self.c as f64 * self.pi * t
    }

    /// Time unit `1/(cπ)` over which the dynamics evolve.
    pub fn time_scale(&self) -> f64 {
        1.0 / (self.c as f64 * self.pi)
    }
}

/// Diagonal weight `a`, off-diagonal weight `b` at time `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowState {
    pub a: f64,
    pub b: f64,
    pub t: f64,
}

impl FlowState {
    pub const ORIGIN: FlowState = FlowState { a: 0.0, b: 0.0, t: 0.0 };
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(invalid("t", "must be finite and non-negative"));
    }
    Ok(())
}

pub fn gflow_closed_form(p: &FlowParams, t: f64) -> Result<FlowState> {
    check_time(t)?;
    if t == 0.0 {
        return Ok(FlowState::ORIGIN);
    }
    let z = p.z();
    let f = p.f(t);
    let w = lambert_w0_exp(f / z - math::ln(z))?;
    let a = (f - z * w) / p.c as f64;
    Ok(FlowState { a, b: -a / z, t })
}

/// `(da/dt, db/dt)`.
pub fn gflow_ode_rhs(p: &FlowParams, s: &FlowState) -> (f64, f64) {
    let z = p.z();
    let m = s.a.max(s.b);
    let ea = math::exp(s.a - m);
    let eb = math::exp(s.b - m);
    let den = ea + z * eb;
    (p.pi * (1.0 - ea / den), -p.pi * eb / den)
}

/// One classic fourth-order Runge–Kutta step of size `h`.
pub fn rk4_step(p: &FlowParams, s: &FlowState, h: f64) -> FlowState {
    let at = |a: f64, b: f64| FlowState { a, b, t: s.t };
    let k1 = gflow_ode_rhs(p, s);
    let k2 = gflow_ode_rhs(p, &at(s.a + 0.5 * h * k1.0, s.b + 0.5 * h * k1.1));
    let k3 = gflow_ode_rhs(p, &at(s.a + 0.5 * h * k2.0, s.b + 0.5 * h * k2.1));
    let k4 = gflow_ode_rhs(p, &at(s.a + h * k3.0, s.b + h * k3.1));
    FlowState {
        a: s.a + h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
        b: s.b + h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
        t: s.t + h,
    }
}

/// Integrate from the origin to `t_end` in `⌈t_end/dt⌉` equal steps of at
/// most `dt`; returns every state including the initial one.
pub fn integrate_gflow(p: &FlowParams, t_end: f64, dt: f64) -> Result<Vec<FlowState>> {
    integrate_from(p, FlowState::ORIGIN, t_end, dt)
}

/// As [`integrate_gflow`] but starting from an arbitrary state.
pub fn integrate_from(p: &FlowParams, start: FlowState, t_end: f64, dt: f64) -> Result<Vec<FlowState>> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(invalid("dt", "must be positive and finite"));
    }
    check_time(t_end)?;
    if t_end < start.t {
        return Err(invalid("t_end", "precedes the start time"));
    }
    let span = t_end - start.t;
    let steps = math::ceil(span / dt) as usize;
    let mut out = Vec::with_capacity(steps + 1);
    out.push(start);
    if steps == 0 {
        return Ok(out);
    }
    let h = span / steps as f64;
    let mut s = start;
    for i in 1..=steps {
        s = rk4_step(p, &s, h);
        s.t = start.t + i as f64 * h;
        if !(s.a.is_finite() && s.b.is_finite()) {
            return Err(Error::NonFinite("gradient-flow state"));
        }
        out.push(s);
    }
    Ok(out)
}

/// Per-class loss `log(1 + z·e^{c·b(t)})` along the exact flow.
pub fn gflow_loss(p: &FlowParams, t: f64) -> Result<f64> {
    let s = gflow_closed_form(p, t)?;
    Ok(math::ln_1p(p.z() * math::exp(p.c as f64 * s.b)))
}

/// Per-class loss `log(1 + (c−1)·e^{−ct})` stated for continuous sign
/// descent; independent of the class frequency.
pub fn sign_descent_loss(c: usize, t: f64) -> Result<f64> {
    if c < 2 {
        return Err(invalid("c", "need at least 2 classes"));
    }
    check_time(t)?;
    let cf = c as f64;
    Ok(math::ln_1p((cf - 1.0) * math::exp(-cf * t)))
}

/// Time at which the gradient-flow loss reaches `target < log c`.
///
/// Uses `ℓ = log(1 + 1/W)`, which follows from the closed form, so the
/// threshold is hit when `W = 1/(e^ℓ − 1)`.
pub fn gflow_time_to_loss(p: &FlowParams, target: f64) -> Result<f64> {
    let z = p.z();
    let start = math::ln(p.c as f64);
    if !(target > 0.0 && target < start) {
        return Err(invalid("target", "must lie strictly between 0 and log c"));
    }
    let w = 1.0 / math::exp_m1(target);
    let u = w + math::ln(w);
    let f = z * (u + math::ln(z));
    Ok((f - 1.0) / (p.c as f64 * p.pi))
}

/// Lower and upper bounds on the loss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossBounds {
    pub lower: f64,
    pub upper: f64,
}

/// Writing `x = e^{f/z}/z`, `L₁ = log x = (f − z log z)/z` and
/// `h = W₀(x) − L₁ + log L₁`, the loss is `log(1 + z e^h/(f − z log z))`;
/// bounding `log(1+y)` between `y/(1+y)` and `y` gives the sandwich
/// `z e^h/(f − z log z + z e^h) ≤ ℓ ≤ z e^h/(f − z log z)`.
///
/// `None` below `f ≥ z log z + 1`.
pub fn rate_sandwich(p: &FlowParams, t: f64) -> Result<Option<LossBounds>> {
    check_time(t)?;
    let z = p.z();
    let f = p.f(t);
    let gap = f - z * math::ln(z);
    if f < z * math::ln(z) + 1.0 {
        return Ok(None);
    }
    let l1 = gap / z;
    let w = lambert_w0_exp(l1)?;
    let h = w - l1 + math::ln(l1);
    Ok(Some(sandwich(z, gap, h, h)))
}

/// The same sandwich with `h` replaced by its enclosure
/// `[½, e/(e−1)]·log L₁ / L₁`, valid when `x > e` (`L₁ > 1`). `None`
/// otherwise.
pub fn rate_sandwich_interval(p: &FlowParams, t: f64) -> Result<Option<LossBounds>> {
    check_time(t)?;
    let z = p.z();
    let f = p.f(t);
    let gap = f - z * math::ln(z);
    let l1 = gap / z;
    if l1 <= 1.0 {
        return Ok(None);
    }
    let e = core::f64::consts::E;
    let r = math::ln(l1) / l1;
    Ok(Some(sandwich(z, gap, 0.5 * r, e / (e - 1.0) * r)))
}

fn sandwich(z: f64, gap: f64, h_lo: f64, h_hi: f64) -> LossBounds {
    let lo = z * math::exp(h_lo);
    let hi = z * math::exp(h_hi);
    LossBounds {
        lower: lo / (gap + lo),
        upper: hi / gap,
    }
}

/// `ℓ(t)·(f − z log z)/z`, which tends to 1 as `t → ∞`.
pub fn rate_ratio(p: &FlowParams, t: f64) -> Result<f64> {
    let z = p.z();
    Ok(gflow_loss(p, t)? * (p.f(t) - z * math::ln(z)) / z)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(c: usize, pi: f64) -> FlowParams {
        FlowParams::new(c, pi).unwrap()
    }

    #[test]
    fn starts_at_origin() {
        for c in [2, 3, 10, 100, 1000] {
            for pi in [1.0, 0.5 / c as f64] {
                let s = gflow_closed_form(&params(c, pi), 0.0).unwrap();
                assert!(s.a.abs() < 1e-12 && s.b.abs() < 1e-12, "c={c}: {s:?}");
                let l = gflow_loss(&params(c, pi), 0.0).unwrap();
                assert!((l - math::ln(c as f64)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn conservation_closed_form() {
        for c in [2, 10, 100] {
            let p = params(c, 0.3);
            for t in [0.0, 0.1, 1.0, 10.0, 1e3] {
                let s = gflow_closed_form(&p, t).unwrap();
                assert!((s.a + p.z() * s.b).abs() <= 1e-10 * s.a.abs().max(1.0));
            }
        }
    }

    #[test]
    fn field_examples() {
        let p = params(5, 0.4);
        let (da, db) = gflow_ode_rhs(&p, &FlowState { a: 0.7, b: 0.7, t: 0.0 });
        assert!((da - 0.4 * (1.0 - 0.2)).abs() < 1e-15);
        assert!((db + 0.4 / 5.0).abs() < 1e-15);
        for (a, b) in [(0.0, 0.0), (3.0, -1.0), (-2.0, 5.0), (800.0, -800.0)] {
            let (da, db) = gflow_ode_rhs(&p, &FlowState { a, b, t: 0.0 });
            assert!((da + p.z() * db).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_frequency_field_vanishes() {
        // FlowParams requires π > 0; the field is linear in π.
        let p = FlowParams { c: 4, pi: 0.0 };
        assert_eq!(
            gflow_ode_rhs(
                &p,
                &FlowState {
                    a: 1.0,
                    b: -0.5,
                    t: 0.0
                }
            ),
            (0.0, 0.0)
        );
    }

    #[test]
    fn binary_case_matches_rk4() {
        let p = params(2, 1.0);
        let traj = integrate_gflow(&p, 5.0, 1e-3).unwrap();
        let last = traj.last().unwrap();
        let exact = gflow_closed_form(&p, 5.0).unwrap();
        assert!((last.t - 5.0).abs() < 1e-12);
        assert!((last.a - exact.a).abs() < 1e-8);
        assert!((last.b - exact.b).abs() < 1e-8);
    }

    #[test]
    fn rk4_fourth_order() {
        let p = params(10, 0.05);
        let t_end = 20.0 * p.time_scale();
        let exact = gflow_closed_form(&p, t_end).unwrap().a;
        let err = |dt: f64| (integrate_gflow(&p, t_end, dt).unwrap().last().unwrap().a - exact).abs();
        let coarse = err(0.5 * p.time_scale());
        let fine = err(0.25 * p.time_scale());
        let ratio = coarse / fine;
        assert!((12.0..20.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn integrate_zero_span() {
        let traj = integrate_gflow(&params(3, 0.2), 0.0, 0.1).unwrap();
        assert_eq!(traj, vec![FlowState::ORIGIN]);
        assert!(integrate_gflow(&params(3, 0.2), 1.0, 0.0).is_err());
    }

    #[test]
    fn loss_monotone() {
        let p = params(100, 0.001);
        let mut prev = f64::INFINITY;
        for i in 0..=200 {
            let t = 1e5 * i as f64 / 200.0;
            let l = gflow_loss(&p, t).unwrap();
            assert!(l <= prev);
            prev = l;
        }
    }

    #[test]
    fn large_time_rate() {
        for c in [2, 10, 100] {
            let p = params(c, 1.0 / c as f64);
            let r = rate_ratio(&p, 1e7).unwrap();
            assert!((r - 1.0).abs() < 0.01, "c={c}: {r}");
        }
    }

    #[test]
    fn no_overflow_far_out() {
        let p = params(10, 1.0);
        // f/z = 1e6
        let t = (9e6 - 1.0) / 10.0;
        let s = gflow_closed_form(&p, t).unwrap();
        assert!(s.a.is_finite() && s.a > 0.0);
        assert!(gflow_loss(&p, t).unwrap() > 0.0);
    }

    #[test]
    fn sign_loss_examples() {
        assert!((sign_descent_loss(7, 0.0).unwrap() - math::ln(7.0)).abs() < 1e-15);
        for t in [0.1, 1.0, 3.0] {
            let l = sign_descent_loss(2, t).unwrap();
            assert!((l - math::ln_1p(math::exp(-2.0 * t))).abs() < 1e-15);
        }
        let c = 10;
        let t = 5.0;
        let r = sign_descent_loss(c, t).unwrap() / (9.0 * math::exp(-50.0));
        assert!((r - 1.0).abs() < 1e-15);
    }

    #[test]
    fn time_to_loss_inverts() {
        let p = params(50, 0.01);
        let target = 0.5 * math::ln(50.0);
        let t = gflow_time_to_loss(&p, target).unwrap();
        assert!((gflow_loss(&p, t).unwrap() - target).abs() < 1e-12);
    }

    #[test]
    fn time_to_half_loss_scales_inversely_with_frequency() {
        let c = 100;
        let target = 0.5 * math::ln(c as f64);
        let base = gflow_time_to_loss(&params(c, 1.0), target).unwrap();
        for pi in [1e-1, 1e-2, 1e-3, 1e-4] {
            let t = gflow_time_to_loss(&params(c, pi), target).unwrap();
            let ratio = t * pi / base;
            assert!((0.5..=2.0).contains(&ratio), "pi={pi}: ratio {ratio}");
        }
    }

    #[test]
    fn sandwich_holds() {
        for c in [2, 10, 100, 1000] {
            for pi in [1.0, 1.0 / c as f64] {
                let p = params(c, pi);
                let z = p.z();
                let f0 = z * math::ln(z) + 1.0;
                for i in 0..200 {
                    let f = f0 * math::pow(10.0, 6.0 * i as f64 / 199.0);
                    let t = (f - 1.0) / (c as f64 * pi);
                    let l = gflow_loss(&p, t).unwrap();
                    let b = rate_sandwich(&p, t).unwrap().unwrap();
                    let tol = 1e-12 * l;
                    assert!(b.lower - tol <= l && l <= b.upper + tol, "c={c} f={f}");
                    if let Some(bi) = rate_sandwich_interval(&p, t).unwrap() {
                        assert!(bi.lower - tol <= l && l <= bi.upper + tol, "interval c={c} f={f}");
                    }
                }
            }
        }
    }
}
