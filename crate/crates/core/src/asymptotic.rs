//! Optimal cooling when the low frequency is much smaller than the high
//! one, `epsilon = alpha beta omega1 -> 0`.
//!
//! In this regime the optimal permutation is approximated by refilling
//! the ladder `y^{k alpha}` into blocks of sizes 1, 2, 3, ..., so block
//! `a` holds `exp(-epsilon (a(a+1)/2 + b))`, `b = 0..=a`, with `n1 = b`.
//! The resulting sums are evaluated three ways:
//!
//! - [`AsymptoticMethod::DirectSum`]: the block sums term by term.
//! - [`AsymptoticMethod::HsQuadrature`]: after writing the Gaussian factor
//!   as a Fourier integral, the geometric sums close and a single
//!   oscillatory integral over `v` remains.
//! - [`AsymptoticMethod::EulerMaclaurin`]: the block sums replaced by
//!   integrals over a continuous block index, boundary corrections dropped.

use crate::cooling::CoolingReport;
use crate::quad::{integrate, integrate_with_breaks};
use crate::{Error, Result, C64};
use serde::Serialize;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AsymptoticMethod {
    DirectSum,
    HsQuadrature,
    EulerMaclaurin,
}

impl AsymptoticMethod {
    pub const ALL: [AsymptoticMethod; 3] = [
        AsymptoticMethod::DirectSum,
        AsymptoticMethod::HsQuadrature,
        AsymptoticMethod::EulerMaclaurin,
    ];
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoticReport {
    pub method: AsymptoticMethod,
    pub beta_omega1: f64,
    pub epsilon: f64,
    pub report: CoolingReport,
    /// Quadrature error estimate, zero for the direct sum.
    pub error_estimate: f64,
}

/// Thermal quantities shared by all methods.
struct Setup {
    eps: f64,
    alpha: f64,
    xi: f64,
    n1i: f64,
    n2i: f64,
}

fn setup(beta_omega1: f64, eps: f64) -> Result<Setup> {
    if !(beta_omega1 > 0.0 && beta_omega1.is_finite()) {
        return Err(Error::Domain {
            what: "beta omega1",
            value: beta_omega1,
        });
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::Domain {
            what: "epsilon",
            value: eps,
        });
    }
    Ok(Setup {
        eps,
        alpha: eps / beta_omega1,
        xi: -(-beta_omega1).exp_m1() * -(-eps).exp_m1(),
        n1i: 1.0 / beta_omega1.exp_m1(),
        n2i: 1.0 / eps.exp_m1(),
    })
}

pub fn asymptotic_small_alpha(beta_omega1: f64, epsilon: f64, method: AsymptoticMethod) -> Result<AsymptoticReport> {
    let s = setup(beta_omega1, epsilon)?;
    let (dn1, dn2, error_estimate) = match method {
        AsymptoticMethod::DirectSum => {
            let (a, b) = direct_sums(s.eps);
            (s.xi * a - s.n1i, s.xi * b - s.n2i, 0.0)
        }
        AsymptoticMethod::HsQuadrature => {
            let (t1, e1) = hs_integral(s.eps, 1)?;
            let (t2, e2) = hs_integral(s.eps, 2)?;
            let em1 = s.eps.exp_m1();
            let p1 = (2.0 * s.eps).exp() / (em1 * em1);
            let p2 = s.eps.exp() / (em1 * em1);
            (
                s.xi * p1 * t1 - s.n1i,
                s.xi * p2 * t2 - s.n2i,
                s.xi * (p1 * e1 + p2 * e2),
            )
        }
        AsymptoticMethod::EulerMaclaurin => {
            let (s1, e1) = em_integral(s.eps, 1)?;
            let (s2, e2) = em_integral(s.eps, 2)?;
            (s.xi * s1 - s.n1i, s.xi * s2 - s.n2i, s.xi * (e1 + e2))
        }
    };
    Ok(AsymptoticReport {
        method,
        beta_omega1,
        epsilon,
        report: CoolingReport::from_changes(s.alpha, dn1, dn2),
        error_estimate,
    })
}

/// `sum_a e^{-eps a(a+1)/2} sum_{b<=a} b e^{-eps b}` and the same with
/// `e^{-eps (a-b)}`, summed until the Gaussian factor is negligible.
fn direct_sums(eps: f64) -> (f64, f64) {
    let decay = (-eps).exp();
    let (mut inner1, mut inner2) = (0.0_f64, 0.0_f64);
    let (mut s1, mut s2) = (0.0_f64, 0.0_f64);
    let mut a = 0usize;
    loop {
        let af = a as f64;
        inner1 += af * (-eps * af).exp();
        inner2 = decay * inner2 + af;
        let g = (-eps * af * (af + 1.0) / 2.0).exp();
        let (t1, t2) = (g * inner1, g * inner2);
        s1 += t1;
        s2 += t2;
        // past the Gaussian peak and below double precision
        if eps * af * af > 2.0 && t1 <= 1e-18 * s1 && t2 <= 1e-18 * s2 {
            break;
        }
        a += 1;
    }
    (s1, s2)
}

/// The two Fourier-space integrals; `which` selects the first- or
/// second-mode sum. Returns the value and the error estimate.
fn hs_integral(eps: f64, which: u8) -> Result<(f64, f64)> {
    let z = |v: f64, k: f64| C64::new(-k * eps / 2.0, -v).exp();
    let bracket = move |v: f64| -> f64 {
        let z1 = z(v, 1.0);
        let z3 = z(v, 3.0);
        let one = C64::new(1.0, 0.0);
        let val = if which == 1 {
            (-eps).exp_m1() * z3 / ((one - z3) * (one - z3)) + one / (one - z1) - one / (one - z3)
        } else {
            eps.exp_m1() * z1 / ((one - z1) * (one - z1)) + one / (one - z3) - one / (one - z1)
        };
        (-v * v / (2.0 * eps)).exp() * val.re
    };
    let l = 12.0 * eps.sqrt();
    // the integrand has narrow peaks at multiples of 2 pi
    let mut breaks = vec![0.0];
    let peak = eps.max(1e-3);
    let mut c = 0.0;
    while c < l {
        for x in [c - 8.0 * peak, c + 8.0 * peak] {
            if x > 0.0 && x < l {
                breaks.push(x);
            }
        }
        c += 2.0 * PI;
    }
    breaks.push(l);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let r = integrate_with_breaks(bracket, &breaks, 1e-300, 1e-13)?;
    let norm = 2.0 / (2.0 * PI * eps).sqrt();
    let pre = if which == 1 { (-eps).exp() } else { 1.0 };
    Ok((pre * norm * r.value, pre * norm * r.error))
}

/// Continuous-index integrands of the block sums.
fn em_summand(eps: f64, which: u8, x: f64) -> f64 {
    let em1 = eps.exp_m1();
    if which == 1 {
        (2.0 * eps).exp() / (em1 * em1)
            * (-(x / 2.0 + 1.0) * (x + 1.0) * eps).exp()
            * (x * (-eps).exp_m1() + (x * eps).exp_m1())
    } else {
        eps.exp() / (em1 * em1)
            * (-x * (x + 1.0) / 2.0 * eps).exp()
            * (x * em1 + (-x * eps).exp_m1())
    }
}

fn em_integral(eps: f64, which: u8) -> Result<(f64, f64)> {
    // exponent below -80 beyond this point
    let upper = (160.0 / eps).sqrt() + 4.0;
    let width = (1.0 / eps).sqrt();
    let mut breaks = vec![0.0];
    let mut x = width;
    while x < upper {
        breaks.push(x);
        x += width;
    }
    breaks.push(upper);
    let r = integrate_with_breaks(|x| em_summand(eps, which, x), &breaks, 1e-300, 1e-13)?;
    Ok((r.value, r.error))
}

/// `xi S_1 / n_2i` and `xi S_2 / n_2i` with `S_k` the Euler-Maclaurin
/// integrals; both vanish as `epsilon -> 0`.
pub fn em_ratios(beta_omega1: f64, epsilon: f64) -> Result<(f64, f64)> {
    let s = setup(beta_omega1, epsilon)?;
    let (s1, _) = em_integral(epsilon, 1)?;
    let (s2, _) = em_integral(epsilon, 2)?;
    Ok((s.xi * s1 / s.n2i, s.xi * s2 / s.n2i))
}

/// Largest relative difference of `dn1`, `dn2` between the direct sum and
/// the Fourier-space quadrature.
pub fn method_agreement(beta_omega1: f64, epsilon: f64) -> Result<f64> {
    let d = asymptotic_small_alpha(beta_omega1, epsilon, AsymptoticMethod::DirectSum)?.report;
    let h = asymptotic_small_alpha(beta_omega1, epsilon, AsymptoticMethod::HsQuadrature)?.report;
    let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs());
    Ok(rel(d.dn1, h.dn1).max(rel(d.dn2, h.dn2)))
}

/// Block sums in closed form per block, used as a cross-check of the
/// running sums.
#[doc(hidden)]
pub fn closed_form_block_sums(eps: f64) -> (f64, f64) {
    let (mut s1, mut s2) = (0.0, 0.0);
    for a in 0..100_000usize {
        let x = a as f64;
        let t1 = em_summand(eps, 1, x);
        let t2 = em_summand(eps, 2, x);
        s1 += t1;
        s2 += t2;
        if eps * x * x > 2.0 && t1.abs() <= 1e-18 * s1.abs() && t2.abs() <= 1e-18 * s2.abs() {
            break;
        }
    }
    (s1, s2)
}

/// Gaussian-integral identity behind the Fourier representation, exposed
/// for testing: `e^{-a^2 eps/2} = (2 pi eps)^{-1/2} int e^{-v^2/(2 eps) - i a v} dv`.
#[doc(hidden)]
pub fn gaussian_fourier(a: f64, eps: f64) -> Result<f64> {
    let l = 12.0 * eps.sqrt();
    let r = integrate(
        |v: f64| (-v * v / (2.0 * eps)).exp() * (a * v).cos(),
        0.0,
        l,
        1e-300,
        1e-14,
    )?;
    Ok(2.0 * r.value / (2.0 * PI * eps).sqrt())
}
