//! Optimal permutation cooling of two thermal modes.
//!
//! The thermal eigenvalues `xi y^{n1} y^{alpha n2}` are listed block by
//! block in total photon number. The unitary minimizing the final total
//! occupation reorders them descending over the eigenvalues of
//! `n1 + n2`, and inside each block puts the larger weights on smaller
//! `n1`.

use crate::fock::ThermalSpec;
use crate::{Error, Result};
use rayon::prelude::*;
use serde::Serialize;

/// Largest accepted block count.
pub const MAX_BLOCKS: usize = 5000;
/// Tail mass above which a report carries a truncation warning.
pub const TAIL_WARNING: f64 = 1e-8;
/// Energy costs below this fraction of `|dn1| + alpha |dn2|` give an
/// infinite COP.
pub const ZERO_COST: f64 = 1e-12;
/// Block count used by the full-scale sweeps.
pub const DEFAULT_BLOCKS: usize = 300;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralEntry {
    pub n1: usize,
    pub n2: usize,
    pub n_total: usize,
    pub weight: f64,
}

/// Complete blocks `n1 + n2 <= block_count`, ordered by
/// `(n_total, n1)` ascending.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralTable {
    pub entries: Vec<SpectralEntry>,
    pub block_count: usize,
    pub spec: ThermalSpec,
    /// Exact probability of the states above the last block.
    pub tail: f64,
}

fn require_two_modes(spec: &ThermalSpec) -> Result<()> {
    if spec.num_modes() != 2 {
        return Err(Error::ShapeMismatch(format!(
            "two modes required, spec has {}",
            spec.num_modes()
        )));
    }
    Ok(())
}

pub fn build_spectral_table(spec: &ThermalSpec, block_count: usize) -> Result<SpectralTable> {
    require_two_modes(spec)?;
    if block_count == 0 {
        return Err(Error::Domain {
            what: "block count",
            value: 0.0,
        });
    }
    if block_count > MAX_BLOCKS {
        return Err(Error::SizeGuard {
            what: "spectral table blocks",
            size: block_count,
            limit: MAX_BLOCKS,
        });
    }
    let b = spec.beta();
    let (l1, l2) = (-b * spec.omegas()[0], -b * spec.omegas()[1]);
    let log_xi = (-l1.exp()).ln_1p() + (-l2.exp()).ln_1p();
    let mut entries = Vec::with_capacity((block_count + 1) * (block_count + 2) / 2);
    for k in 0..=block_count {
        for n1 in 0..=k {
            let n2 = k - n1;
            entries.push(SpectralEntry {
                n1,
                n2,
                n_total: k,
                weight: (log_xi + n1 as f64 * l1 + n2 as f64 * l2).exp(),
            });
        }
    }
    Ok(SpectralTable {
        entries,
        block_count,
        spec: spec.clone(),
        tail: block_tail(spec.y(0), spec.y(1), block_count),
    })
}

/// `P(n1 + n2 > K) = y1^{K+1} + (1 - y1) sum_{n1<=K} y1^{n1} y2^{K+1-n1}`.
fn block_tail(y1: f64, y2: f64, k: usize) -> f64 {
    let (l1, l2) = (y1.ln(), y2.ln());
    let kp = (k + 1) as f64;
    let mut s = 0.0;
    for n1 in 0..=k {
        s += (n1 as f64 * l1 + (kp - n1 as f64) * l2).exp();
    }
    (kp * l1).exp() + (1.0 - y1) * s
}

/// Dimensionless COP, infinite when the energy cost vanishes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Cop {
    Finite(f64),
    Infinite,
}

impl Cop {
    pub fn value(&self) -> f64 {
        match self {
            Cop::Finite(x) => *x,
            Cop::Infinite => f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoolingReport {
    pub alpha: f64,
    pub dn1: f64,
    pub dn2: f64,
    pub dn: f64,
    /// `dn1 + alpha dn2`, energy in units of `omega1`.
    pub energy_cost: f64,
    pub cop: Cop,
    /// `-dn / (|dn1| + |dn2|)`, zero when nothing moved.
    pub efficiency: f64,
    pub otto_bound: f64,
    /// Present when the input was truncated or otherwise approximate.
    pub warning: Option<String>,
}

impl CoolingReport {
    pub fn from_changes(alpha: f64, dn1: f64, dn2: f64) -> Self {
        let dn = dn1 + dn2;
        let energy_cost = dn1 + alpha * dn2;
        let cop = if energy_cost.abs() <= ZERO_COST * (dn1.abs() + alpha * dn2.abs()) {
            Cop::Infinite
        } else {
            Cop::Finite(-dn / energy_cost)
        };
        let moved = dn1.abs() + dn2.abs();
        let efficiency = if moved > 0.0 { -dn / moved } else { 0.0 };
        Self {
            alpha,
            dn1,
            dn2,
            dn,
            energy_cost,
            cop,
            efficiency,
            otto_bound: 1.0 - alpha.min(1.0 / alpha),
            warning: None,
        }
    }

    /// `0 <= alpha (-dn2) <= dn1 <= -dn2` when cooling.
    pub fn chain_holds(&self, tol: f64) -> bool {
        if self.dn >= 0.0 {
            return true;
        }
        let a = self.alpha * -self.dn2;
        -tol <= a && a <= self.dn1 + tol && self.dn1 <= -self.dn2 + tol
    }
}

/// Occupation changes when the table's weights are moved so that slot
/// `i` receives weight `entries[assignment[i]].weight`.
pub fn changes_for_assignment(table: &SpectralTable, assignment: &[usize]) -> (f64, f64) {
    let mut dn1 = 0.0;
    let mut dn2 = 0.0;
    for (slot, &src) in table.entries.iter().zip(assignment) {
        let dw = table.entries[src].weight - slot.weight;
        dn1 += slot.n1 as f64 * dw;
        dn2 += slot.n2 as f64 * dw;
    }
    (dn1, dn2)
}

/// Assignment of the optimal permutation: weights sorted by
/// `(weight desc, n_total asc, n1 asc)` fill the slots in table order.
pub fn optimal_assignment(table: &SpectralTable) -> Vec<usize> {
    let e = &table.entries;
    let mut order: Vec<usize> = (0..e.len()).collect();
    order.sort_by(|&a, &b| {
        e[b].weight
            .total_cmp(&e[a].weight)
            .then(e[a].n_total.cmp(&e[b].n_total))
            .then(e[a].n1.cmp(&e[b].n1))
    });
    order
}

pub fn optimal_permutation_cool(table: &SpectralTable) -> Result<CoolingReport> {
    if table.entries.is_empty() {
        return Err(Error::Empty("spectral table"));
    }
    let (dn1, dn2) = changes_for_assignment(table, &optimal_assignment(table));
    let mut report = CoolingReport::from_changes(table.spec.alpha(), dn1, dn2);
    if table.tail > TAIL_WARNING {
        report.warning = Some(format!("truncated table, tail mass {:.3e}", table.tail));
    }
    Ok(report)
}

fn check_y_alpha(y: f64, alpha: f64) -> Result<()> {
    if !(y > 0.0 && y < 1.0) {
        return Err(Error::Domain { what: "y", value: y });
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain {
            what: "alpha",
            value: alpha,
        });
    }
    Ok(())
}

/// Index of the first block whose largest weight exceeds the smallest
/// weight of the block before it, `ceil(alpha / (1 - alpha))`.
pub fn onset_index(alpha: f64) -> usize {
    (alpha / (1.0 - alpha) - 1e-9).ceil().max(0.0) as usize
}

/// Lower bound on `-dn_opt` from exchanges between neighbouring blocks,
/// `((1-y) y^{alpha(m+1)} - (1-y^alpha) y^m) / (1 - y^{alpha+1})`.
pub fn nn_bound_delta_n(y: f64, alpha: f64) -> Result<f64> {
    check_y_alpha(y, alpha)?;
    let m = onset_index(alpha) as f64;
    let ya = y.powf(alpha);
    Ok(((1.0 - y) * y.powf(alpha * (m + 1.0)) - (1.0 - ya) * y.powf(m)) / (1.0 - y.powf(alpha + 1.0)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NnComponents {
    pub dn1: f64,
    pub dn2: f64,
    pub cop_lower_bound: f64,
}

/// Per-mode changes of the neighbouring-block exchanges and the COP lower
/// bound `1 / ((1-alpha)(q/(1-q) + 1/(1-y^alpha)))`, `q = y^{1+alpha}`.
pub fn nn_approx_components(y: f64, alpha: f64) -> Result<NnComponents> {
    check_y_alpha(y, alpha)?;
    let m = onset_index(alpha);
    let mf = m as f64;
    let ya = y.powf(alpha);
    let q = y.powf(1.0 + alpha);
    let xi = (1.0 - y) * (1.0 - ya);
    // sum_{i>=m} x^i and sum_{i>=m} i x^i
    let geo = |x: f64| x.powf(mf) / (1.0 - x);
    let lin = |x: f64| x.powf(mf) * (mf / (1.0 - x) + x / ((1.0 - x) * (1.0 - x)));
    // d_i = y^{alpha(i+1)} - y^i
    let sum_d = ya * geo(ya) - geo(y);
    let sum_di = ya * lin(ya) - lin(y);
    let inv = 1.0 / (1.0 - q);
    let dn1 = xi * (inv * sum_di + q * inv * inv * sum_d);
    let dn2 = -xi * (inv * sum_di + (q * inv * inv + inv) * sum_d);
    let cop_lower_bound = 1.0 / ((1.0 - alpha) * (q * inv + 1.0 / (1.0 - ya)));
    Ok(NnComponents {
        dn1,
        dn2,
        cop_lower_bound,
    })
}

/// How the thermal spec varies along an alpha sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SpecFamily {
    /// `y^alpha = exp(-beta omega2)` held fixed.
    FixedYAlpha(f64),
    /// `y = exp(-beta omega1)` held fixed.
    FixedY(f64),
}

impl SpecFamily {
    pub fn spec(&self, alpha: f64) -> Result<ThermalSpec> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Domain {
                what: "alpha",
                value: alpha,
            });
        }
        match *self {
            SpecFamily::FixedYAlpha(ya) => {
                if !(ya > 0.0 && ya < 1.0) {
                    return Err(Error::Domain {
                        what: "y^alpha",
                        value: ya,
                    });
                }
                ThermalSpec::from_y(ya.powf(1.0 / alpha), alpha)
            }
            SpecFamily::FixedY(y) => ThermalSpec::from_y(y, alpha),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub alpha: f64,
    pub blocks: usize,
    pub report: CoolingReport,
    /// `dn` changes by less than 1e-9 when the block count doubles.
    pub converged: bool,
}

/// Blocks used at `alpha`: at least `5 m(alpha)`.
pub fn blocks_for(alpha: f64, block_count: usize) -> usize {
    block_count.max(5 * onset_index(alpha)).min(MAX_BLOCKS / 2)
}

pub fn cool_at(family: SpecFamily, alpha: f64, blocks: usize) -> Result<CoolingReport> {
    optimal_permutation_cool(&build_spectral_table(&family.spec(alpha)?, blocks)?)
}

/// Optimal cooling over a grid of frequency ratios, evaluated in parallel.
pub fn sweep_alpha(family: SpecFamily, alphas: &[f64], block_count: usize) -> Result<Vec<SweepRow>> {
    alphas
        .par_iter()
        .map(|&alpha| {
            let blocks = blocks_for(alpha, block_count);
            let report = cool_at(family, alpha, blocks)?;
            let refined = cool_at(family, alpha, 2 * blocks)?;
            Ok(SweepRow {
                alpha,
                blocks,
                converged: (refined.dn - report.dn).abs() < 1e-9,
                report,
            })
        })
        .collect()
}

/// Alphas at which the COP has a strict local minimum along the sweep.
pub fn cop_local_minima(rows: &[SweepRow]) -> Vec<f64> {
    rows.windows(3)
        .filter(|w| {
            let (a, b, c) = (w[0].report.cop.value(), w[1].report.cop.value(), w[2].report.cop.value());
            b < a && b < c
        })
        .map(|w| w[1].alpha)
        .collect()
}

/// Evenly spaced grid with `steps` intervals, endpoints included.
pub fn linspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    if steps == 0 {
        return vec![lo];
    }
    (0..=steps)
        .map(|i| lo + (hi - lo) * i as f64 / steps as f64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn first_block_weights() {
        let spec = ThermalSpec::from_y(0.36, 0.5).unwrap();
        let t = build_spectral_table(&spec, 1).unwrap();
        let xi = spec.xi();
        let w: Vec<f64> = t.entries.iter().map(|e| e.weight).collect();
        assert_eq!(t.entries.len(), 3);
        assert_abs_diff_eq!(w[0], xi, epsilon = 1e-15);
        assert_abs_diff_eq!(w[1], xi * 0.6, epsilon = 1e-15);
        assert_abs_diff_eq!(w[2], xi * 0.36, epsilon = 1e-15);
        assert_eq!((t.entries[1].n1, t.entries[1].n2), (0, 1));
    }

    #[test]
    fn weights_and_tail_sum_to_one() {
        let spec = SpecFamily::FixedYAlpha(0.6).spec(0.7).unwrap();
        let t = build_spectral_table(&spec, 300).unwrap();
        let s: f64 = t.entries.iter().map(|e| e.weight).sum();
        assert_abs_diff_eq!(s + t.tail, 1.0, epsilon = 1e-12);
        let t = build_spectral_table(&spec, 5).unwrap();
        let s: f64 = t.entries.iter().map(|e| e.weight).sum();
        assert_abs_diff_eq!(s + t.tail, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn block_guard() {
        let spec = ThermalSpec::from_y(0.5, 0.5).unwrap();
        assert!(build_spectral_table(&spec, 5001).is_err());
        assert!(build_spectral_table(&spec, 0).is_err());
    }

    #[test]
    fn degenerate_frequencies_do_not_cool() {
        let spec = ThermalSpec::two_mode(1.0, 1.0, 0.5).unwrap();
        let t = build_spectral_table(&spec, 40).unwrap();
        let r = optimal_permutation_cool(&t).unwrap();
        assert_eq!(r.dn, 0.0);
        assert_eq!(r.efficiency, 0.0);
    }

    #[test]
    fn cold_limit() {
        let spec = ThermalSpec::from_y(1e-8, 0.7).unwrap();
        let r = optimal_permutation_cool(&build_spectral_table(&spec, 10).unwrap()).unwrap();
        assert!(r.dn.abs() < 1e-10);
    }

    #[test]
    fn cools_with_chain_and_otto() {
        let r = cool_at(SpecFamily::FixedYAlpha(0.6), 0.7, 300).unwrap();
        assert!(r.dn < 0.0);
        assert!(r.chain_holds(1e-12));
        assert!(r.efficiency <= r.otto_bound + 1e-12);
        assert!(r.warning.is_none());
    }

    #[test]
    fn nn_bound_limits() {
        assert!(nn_bound_delta_n(1e-40, 0.3).unwrap().abs() < 1e-20);
        let a = 0.4;
        let near_one = nn_bound_delta_n(1.0 - 1e-7, a).unwrap();
        assert_abs_diff_eq!(near_one, (1.0 - a) / (1.0 + a), epsilon = 1e-5);
        assert!(nn_bound_delta_n(0.5, 1.0).is_err());
    }

    #[test]
    fn nn_components_consistent() {
        for &(y, a) in &[(0.5, 0.5), (0.3, 0.2), (0.8, 0.9), (0.95, 0.66)] {
            let c = nn_approx_components(y, a).unwrap();
            let b = nn_bound_delta_n(y, a).unwrap();
            assert_abs_diff_eq!(c.dn1 + c.dn2, -b, epsilon = 1e-10);
        }
        let c = nn_approx_components(0.5, 0.5).unwrap();
        assert!(c.dn2 < 0.0 && 0.0 < c.dn1);
        assert!(0.5 * -c.dn2 <= c.dn1);
    }

    #[test]
    fn nn_components_match_direct_sums() {
        let (y, a) = (0.7_f64, 0.6_f64);
        let m = onset_index(a);
        let xi = (1.0 - y) * (1.0 - y.powf(a));
        let q = y.powf(1.0 + a);
        let (mut d1, mut d2) = (0.0, 0.0);
        for i in m..400 {
            let d = y.powf(a * (i as f64 + 1.0)) - y.powi(i as i32);
            for j in 0..400 {
                let w = q.powi(j as i32);
                d1 += xi * d * w * (i + j) as f64;
                d2 -= xi * d * w * (i + j + 1) as f64;
            }
        }
        let c = nn_approx_components(y, a).unwrap();
        assert_abs_diff_eq!(c.dn1, d1, epsilon = 1e-12);
        assert_abs_diff_eq!(c.dn2, d2, epsilon = 1e-12);
    }

    #[test]
    fn cop_bound_diverges_near_one() {
        let lo = nn_approx_components(0.5, 0.9).unwrap().cop_lower_bound;
        let hi = nn_approx_components(0.5, 0.999).unwrap().cop_lower_bound;
        assert!(hi > 50.0 * lo);
    }

    #[test]
    fn onset_index_values() {
        assert_eq!(onset_index(0.5), 1);
        assert_eq!(onset_index(2.0 / 3.0), 2);
        assert_eq!(onset_index(0.7), 3);
        assert_eq!(onset_index(0.1), 1);
    }

    #[test]
    fn infinite_cop_flag() {
        let r = CoolingReport::from_changes(0.5, 0.0, 0.0);
        assert_eq!(r.cop, Cop::Infinite);
        assert_eq!(CoolingReport::from_changes(0.5, 0.1, -0.2).cop, Cop::Infinite);
        // tiny but resolved costs keep a finite COP
        let r = CoolingReport::from_changes(0.98, 4e-12, -4.07e-12);
        assert!(matches!(r.cop, Cop::Finite(k) if k > 0.0));
    }
}
