//! Second-order (in `g`) occupation changes for thermal inputs.

use super::{NonlinearConfig, Variant};
use crate::cooling::CoolingReport;
use crate::{Error, Result};
use rayon::prelude::*;
use serde::Serialize;

/// `4 sin^2(x t / 2) / x^2`, equal to `t^2` at `x = 0`.
pub fn phi_kernel(x: f64, t: f64) -> f64 {
    let xt = x * t;
    if xt.abs() < 1e-4 {
        t * t * (1.0 - xt * xt / 12.0)
    } else {
        let s = (0.5 * xt).sin();
        4.0 * s * s / (x * x)
    }
}

/// Which single-photon coefficient `C1` to use. The other coefficients
/// agree between the two sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CoefficientSet {
    /// `C1 = 4 e^w2 / (e^w2 - 1)^2`.
    #[default]
    Printed,
    /// `C1 = <(2 n2 + 1)^2> = (e^2w2 + 6 e^w2 + 1) / (e^w2 - 1)^2`, the
    /// weight of the `x1 (2 n2 + 1)` part of the interaction.
    Derived,
}

/// Coefficients `[A, B, C]` for mode 1 and mode 2 at dimensionless
/// frequencies `(w1, w2)`.
fn abc(w1: f64, w2: f64, set: CoefficientSet) -> [[f64; 3]; 2] {
    let (e1, e2) = (w1.exp(), w2.exp());
    let d = w1.exp_m1() * w2.exp_m1().powi(2);
    let a1 = 2.0 * (w1 + 2.0 * w2).exp_m1() / d;
    let b1 = 2.0 * (e1 - e2 * e2) / d;
    let c1 = match set {
        CoefficientSet::Printed => 4.0 * e2 / w2.exp_m1().powi(2),
        CoefficientSet::Derived => (e2 * e2 + 6.0 * e2 + 1.0) / w2.exp_m1().powi(2),
    };
    [[a1, b1, c1], [2.0 * a1, -2.0 * b1, 0.0]]
}

/// The six `g^2 coefficient * Phi` contributions to each mode, ordered as
/// the kernels `Phi(w1 + 2w2), Phi(w1 - 2w2), Phi(w1), Phi(w2 + 2w1),
/// Phi(w2 - 2w1), Phi(w2)`.
pub fn perturbative_terms(config: &NonlinearConfig, set: CoefficientSet) -> [[f64; 6]; 2] {
    let (w1, w2, g, t) = config.dimensionless();
    let own = abc(w1, w2, set);
    let swapped = abc(w2, w1, set);
    let kernels = [
        phi_kernel(w1 + 2.0 * w2, t),
        phi_kernel(w1 - 2.0 * w2, t),
        phi_kernel(w1, t),
        phi_kernel(w2 + 2.0 * w1, t),
        phi_kernel(w2 - 2.0 * w1, t),
        phi_kernel(w2, t),
    ];
    let mut out = [[0.0; 6]; 2];
    for k in 0..2 {
        // mode k's D, E, F are the other mode's A, B, C with w1 <-> w2
        let coeffs = [own[k][0], own[k][1], own[k][2], swapped[1 - k][0], swapped[1 - k][1], swapped[1 - k][2]];
        for j in 0..6 {
            out[k][j] = g * g * coeffs[j] * kernels[j];
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeChanges {
    pub dn1: f64,
    pub dn2: f64,
    pub dn: f64,
    pub report: CoolingReport,
}

impl ModeChanges {
    fn new(config: &NonlinearConfig, dn1: f64, dn2: f64) -> Self {
        let mut report = CoolingReport::from_changes(config.omega2() / config.omega1(), dn1, dn2);
        report.warning = config.validity_warning();
        Self {
            dn1,
            dn2,
            dn: dn1 + dn2,
            report,
        }
    }
}

/// Second-order changes for the full interaction.
pub fn perturbative_delta_n(config: &NonlinearConfig, set: CoefficientSet) -> Result<ModeChanges> {
    if config.variant != Variant::Full {
        return Err(Error::VariantMismatch {
            expected: "full",
            got: format!("{:?}", config.variant),
        });
    }
    let terms = perturbative_terms(config, set);
    Ok(ModeChanges::new(config, terms[0].iter().sum(), terms[1].iter().sum()))
}

/// Closed-form changes for the rotating-wave interactions. For `Rwa`,
/// `dn2 = -2 dn1`; for `RwaMirrored`, `dn1 = -2 dn2`.
pub fn rwa_delta_n(config: &NonlinearConfig) -> Result<ModeChanges> {
    let (w1, w2, g, t) = config.dimensionless();
    let resonant = |hi: f64, lo: f64| {
        let d = hi.exp_m1() * lo.exp_m1().powi(2);
        2.0 * g * g * phi_kernel(2.0 * lo - hi, t) * (hi.exp() - (2.0 * lo).exp()) / d
    };
    let (dn1, dn2) = match config.variant {
        Variant::Rwa => {
            let x = resonant(w1, w2);
            (x, -2.0 * x)
        }
        Variant::RwaMirrored => {
            let x = resonant(w2, w1);
            (-2.0 * x, x)
        }
        Variant::Full => {
            return Err(Error::VariantMismatch {
                expected: "rotating-wave",
                got: "Full".into(),
            })
        }
    };
    Ok(ModeChanges::new(config, dn1, dn2))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResonanceRow {
    pub alpha: f64,
    pub dn: f64,
    pub dn1: f64,
    pub dn2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResonanceScan {
    pub rows: Vec<ResonanceRow>,
    /// `alpha` values where `dn` changes sign, by linear interpolation.
    pub sign_changes: Vec<f64>,
}

impl ResonanceScan {
    /// Maximal runs `[first, last]` of grid points with `dn < 0`.
    pub fn cooling_windows(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        let mut start: Option<f64> = None;
        let mut last = 0.0;
        for r in &self.rows {
            if r.dn < 0.0 {
                start.get_or_insert(r.alpha);
                last = r.alpha;
            } else if let Some(s) = start.take() {
                out.push((s, last));
            }
        }
        if let Some(s) = start {
            out.push((s, last));
        }
        out
    }
}

/// Full-interaction second-order `dn` over `alpha = omega2 / omega1` in
/// rescaled units.
pub fn resonance_scan(omega1: f64, t: f64, g: f64, alphas: &[f64], set: CoefficientSet) -> Result<ResonanceScan> {
    if alphas.is_empty() {
        return Err(Error::Empty("alpha grid"));
    }
    if let Some(&a) = alphas.iter().find(|a| !(**a > 0.0 && a.is_finite())) {
        return Err(Error::Domain { what: "alpha", value: a });
    }
    let rows = alphas
        .par_iter()
        .map(|&alpha| {
            let c = NonlinearConfig::rescaled(omega1, alpha * omega1, g, t, Variant::Full)?;
            let m = perturbative_delta_n(&c, set)?;
            Ok(ResonanceRow {
                alpha,
                dn: m.dn,
                dn1: m.dn1,
                dn2: m.dn2,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let sign_changes = rows
        .windows(2)
        .filter(|w| (w[0].dn < 0.0) != (w[1].dn < 0.0))
        .map(|w| {
            let (a, b) = (&w[0], &w[1]);
            if a.dn == b.dn {
                a.alpha
            } else {
                a.alpha + (b.alpha - a.alpha) * a.dn / (a.dn - b.dn)
            }
        })
        .collect();
    Ok(ResonanceScan { rows, sign_changes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn phi_limits() {
        assert_eq!(phi_kernel(0.0, 3.0), 9.0);
        assert!(phi_kernel(2.0 * std::f64::consts::PI / 3.0, 3.0) < 1e-28);
        assert_relative_eq!(phi_kernel(1e-8, 3.0), 9.0, max_relative = 1e-12);
        assert_relative_eq!(phi_kernel(-1e-8, 3.0), phi_kernel(1e-8, 3.0), max_relative = 1e-15);
        // both branches agree at the switch
        let t = 2.0;
        let lo = phi_kernel(0.99e-4 / t, t);
        let hi = phi_kernel(1.01e-4 / t, t);
        assert_relative_eq!(lo, hi, max_relative = 1e-8);
    }

    #[test]
    fn quadratic_in_coupling() {
        let a = NonlinearConfig::rescaled(0.7, 0.4, 0.01, 5.0, Variant::Full).unwrap();
        let b = NonlinearConfig::rescaled(0.7, 0.4, 0.002, 5.0, Variant::Full).unwrap();
        let (da, db) = (
            perturbative_delta_n(&a, CoefficientSet::Printed).unwrap(),
            perturbative_delta_n(&b, CoefficientSet::Printed).unwrap(),
        );
        assert_relative_eq!(da.dn / 1e-4, db.dn / 4e-6, max_relative = 1e-12);
    }

    #[test]
    fn swap_exchanges_modes() {
        for set in [CoefficientSet::Printed, CoefficientSet::Derived] {
            let a = NonlinearConfig::rescaled(0.9, 0.35, 0.1, 7.0, Variant::Full).unwrap();
            let b = NonlinearConfig::rescaled(0.35, 0.9, 0.1, 7.0, Variant::Full).unwrap();
            let (da, db) = (perturbative_delta_n(&a, set).unwrap(), perturbative_delta_n(&b, set).unwrap());
            assert_relative_eq!(da.dn1, db.dn2, max_relative = 1e-13);
            assert_relative_eq!(da.dn2, db.dn1, max_relative = 1e-13);
        }
    }

    #[test]
    fn continuous_through_resonance() {
        let at = |w2: f64| {
            let c = NonlinearConfig::rescaled(1.0, w2, 0.1, 10.0, Variant::Full).unwrap();
            perturbative_delta_n(&c, CoefficientSet::Printed).unwrap().dn
        };
        let mid = at(0.5);
        assert!(mid.is_finite());
        assert!((at(0.5 + 1e-9) - mid).abs() < 1e-7);
        assert!((at(0.5 - 1e-9) - mid).abs() < 1e-7);
    }

    #[test]
    fn rwa_closed_form_is_resonant_term() {
        let w2 = 0.5 / 1.05;
        let full = NonlinearConfig::rescaled(1.0, w2, 0.02, 20.0, Variant::Full).unwrap();
        let rwa = NonlinearConfig::rescaled(1.0, w2, 0.02, 20.0, Variant::Rwa).unwrap();
        let b = perturbative_terms(&full, CoefficientSet::Printed);
        let r = rwa_delta_n(&rwa).unwrap();
        assert_relative_eq!(r.dn1, b[0][1], max_relative = 1e-12);
        assert_relative_eq!(r.dn2, b[1][1], max_relative = 1e-12);
        let (w1, g, t) = (1.0f64, 0.02, 20.0);
        let om = 2.0 * w2 - w1;
        let direct = 8.0 * g * g * (om * t / 2.0).sin().powi(2) / (om * om) * (w1.exp() - (2.0 * w2).exp())
            / (w1.exp_m1() * w2.exp_m1().powi(2));
        assert_relative_eq!(r.dn1, direct, max_relative = 1e-12);
    }

    #[test]
    fn rwa_cooling_figures() {
        let c = NonlinearConfig::rescaled(1.0, 0.45, 0.02, 20.0, Variant::Rwa).unwrap();
        let r = rwa_delta_n(&c).unwrap();
        assert!(r.dn1 > 0.0 && r.dn < 0.0);
        assert_eq!(r.dn2, -2.0 * r.dn1);
        assert_relative_eq!(r.report.efficiency, 1.0 / 3.0, max_relative = 1e-14);
        assert_relative_eq!(r.report.cop.value(), 1.0 / (1.0 - 0.9), max_relative = 1e-12);
        let d = NonlinearConfig::rescaled(1.0, 0.5, 0.02, 20.0, Variant::Rwa).unwrap();
        assert_eq!(rwa_delta_n(&d).unwrap().dn, 0.0);
    }

    #[test]
    fn mirrored_rwa_swaps_roles() {
        let a = NonlinearConfig::rescaled(1.0, 0.45, 0.02, 20.0, Variant::Rwa).unwrap();
        let b = NonlinearConfig::rescaled(0.45, 1.0, 0.02, 20.0, Variant::RwaMirrored).unwrap();
        let (ra, rb) = (rwa_delta_n(&a).unwrap(), rwa_delta_n(&b).unwrap());
        assert_relative_eq!(ra.dn1, rb.dn2, max_relative = 1e-14);
        assert_relative_eq!(ra.dn2, rb.dn1, max_relative = 1e-14);
    }

    #[test]
    fn variant_guards() {
        let c = NonlinearConfig::rescaled(1.0, 0.45, 0.02, 20.0, Variant::Rwa).unwrap();
        assert!(matches!(
            perturbative_delta_n(&c, CoefficientSet::Printed),
            Err(Error::VariantMismatch { .. })
        ));
    }
}
