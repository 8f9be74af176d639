//! Bose entropy of mode occupations and the double-superstochastic
//! certificates that guarantee its growth under linear evolution.

use crate::fock::bose_entropy_scalar;
use crate::linear::{require_diagonal, BogoliubovMap, MomentState};
use crate::{Error, Result};
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

/// Tolerance on row/column sums and on the subset inequality.
pub const SUM_TOL: f64 = 1e-10;
/// Subset enumeration is refused above this many modes.
pub const MAX_HALL_MODES: usize = 20;

/// Transfer matrix `M_ik = |S_ik|^2 + |R_ik|^2` together with the excess of
/// its row and column sums over one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransferMatrix {
    pub m: DMatrix<f64>,
    pub row_excess: Vec<f64>,
    pub col_excess: Vec<f64>,
}

impl TransferMatrix {
    pub fn from_map(map: &BogoliubovMap) -> Self {
        Self::from_entries_unchecked(map.transfer_entries())
    }

    /// Validates non-negativity and that every row and column sums to at
    /// least one.
    pub fn from_entries(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::ShapeMismatch(format!("transfer matrix {:?}", m.shape())));
        }
        if m.nrows() == 0 {
            return Err(Error::Empty("transfer matrix"));
        }
        if let Some((idx, v)) = m.iter().enumerate().find(|(_, v)| **v < 0.0 || v.is_nan()) {
            return Err(Error::Precondition {
                condition: "non-negative entries",
                worst: *v,
                location: format!("({}, {})", idx % m.nrows(), idx / m.nrows()),
            });
        }
        let tm = Self::from_entries_unchecked(m);
        for (kind, ex) in [("row sums >= 1", &tm.row_excess), ("column sums >= 1", &tm.col_excess)] {
            if let Some((i, e)) = ex.iter().enumerate().find(|(_, e)| **e < -SUM_TOL) {
                return Err(Error::Precondition {
                    condition: kind,
                    worst: *e,
                    location: format!("index {i}"),
                });
            }
        }
        Ok(tm)
    }

    fn from_entries_unchecked(m: DMatrix<f64>) -> Self {
        let row_excess = m.row_iter().map(|r| r.sum() - 1.0).collect();
        let col_excess = m.column_iter().map(|c| c.sum() - 1.0).collect();
        Self {
            m,
            row_excess,
            col_excess,
        }
    }

    pub fn size(&self) -> usize {
        self.m.nrows()
    }

    pub fn is_doubly_stochastic(&self) -> bool {
        self.row_excess
            .iter()
            .chain(&self.col_excess)
            .all(|e| e.abs() <= SUM_TOL)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StochasticVerdict {
    Superstochastic,
    NotSuperstochastic,
}

/// Outcome of the subset test. Subsets are 0-based mode indices.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StochasticCertificate {
    pub verdict: StochasticVerdict,
    /// Dominated doubly stochastic matrix, when one was constructed.
    pub theta: Option<DMatrix<f64>>,
    /// First violating pair `(I, J)`, for negative verdicts.
    pub witness: Option<(Vec<usize>, Vec<usize>)>,
    /// `min_{I,J} sum_{I x J} M - (|I| + |J| - N)`; negative iff violated.
    pub min_slack: f64,
}

impl StochasticCertificate {
    pub fn passed(&self) -> bool {
        self.verdict == StochasticVerdict::Superstochastic
    }
}

fn mask_to_set(mask: u32, n: usize) -> Vec<usize> {
    (0..n).filter(|k| mask & (1 << k) != 0).collect()
}

/// For a fixed row subset `I`, the column subset minimizing
/// `sum_{I x J} M - |J|` is `{k : colsum_I(k) < 1}`. Returns the slack of
/// that minimizer and the minimizer itself.
fn best_columns(m: &DMatrix<f64>, rows: u32) -> (f64, u32) {
    let n = m.nrows();
    let size_i = rows.count_ones() as f64;
    let mut slack = n as f64 - size_i;
    let mut cols = 0u32;
    for k in 0..n {
        let c: f64 = (0..n).filter(|i| rows & (1 << i) != 0).map(|i| m[(i, k)]).sum();
        if c < 1.0 {
            slack += c - 1.0;
            cols |= 1 << k;
        }
    }
    (slack, cols)
}

fn guard(tm: &TransferMatrix) -> Result<usize> {
    let n = tm.size();
    if n > MAX_HALL_MODES {
        return Err(Error::SizeGuard {
            what: "subset enumeration",
            size: n,
            limit: MAX_HALL_MODES,
        });
    }
    Ok(n)
}

/// Smallest slack of the subset inequality over all pairs `(I, J)`.
pub fn hall_slack(tm: &TransferMatrix) -> Result<f64> {
    let n = guard(tm)?;
    Ok((0u32..1 << n)
        .into_par_iter()
        .map(|rows| best_columns(&tm.m, rows).0)
        .reduce(|| f64::INFINITY, f64::min))
}

/// Decides whether `M` dominates a doubly stochastic matrix, via
/// `sum_{i in I, k in J} M_ik >= |I| + |J| - N` for all subset pairs.
///
/// For each row subset only the optimal column subset is examined, so the
/// cost is `O(2^N N^2)`. A dominated doubly stochastic matrix is attached
/// for `N = 2` and whenever `M` itself is doubly stochastic.
pub fn check_superstochastic(tm: &TransferMatrix) -> Result<StochasticCertificate> {
    let n = guard(tm)?;
    let slacks: Vec<(f64, u32)> = (0u32..1 << n)
        .into_par_iter()
        .map(|rows| best_columns(&tm.m, rows))
        .collect();
    let min_slack = slacks.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    let violation = slacks
        .iter()
        .enumerate()
        .find(|(_, (s, _))| *s < -SUM_TOL)
        .map(|(rows, (_, cols))| (mask_to_set(rows as u32, n), mask_to_set(*cols, n)));
    if let Some(w) = violation {
        return Ok(StochasticCertificate {
            verdict: StochasticVerdict::NotSuperstochastic,
            theta: None,
            witness: Some(w),
            min_slack,
        });
    }
    let theta = if tm.is_doubly_stochastic() {
        Some(tm.m.clone())
    } else if n == 2 {
        Some(two_by_two_theta(&tm.m))
    } else {
        None
    };
    Ok(StochasticCertificate {
        verdict: StochasticVerdict::Superstochastic,
        theta,
        witness: None,
        min_slack,
    })
}

/// Exhaustive `4^N` version of [`check_superstochastic`], kept as an
/// oracle. Reports the first violating pair in (I, J) mask order.
pub fn check_superstochastic_exhaustive(tm: &TransferMatrix) -> Result<StochasticCertificate> {
    let n = guard(tm)?;
    let mut min_slack = f64::INFINITY;
    let mut witness = None;
    for rows in 0u32..1 << n {
        for cols in 0u32..1 << n {
            let lhs: f64 = mask_to_set(rows, n)
                .iter()
                .flat_map(|&i| mask_to_set(cols, n).into_iter().map(move |k| (i, k)))
                .map(|(i, k)| tm.m[(i, k)])
                .sum();
            let rhs = rows.count_ones() as f64 + cols.count_ones() as f64 - n as f64;
            let slack = lhs - rhs;
            min_slack = min_slack.min(slack);
            if witness.is_none() && slack < -SUM_TOL {
                witness = Some((mask_to_set(rows, n), mask_to_set(cols, n)));
            }
        }
    }
    Ok(StochasticCertificate {
        verdict: if witness.is_some() {
            StochasticVerdict::NotSuperstochastic
        } else {
            StochasticVerdict::Superstochastic
        },
        theta: None,
        witness,
        min_slack,
    })
}

fn two_by_two_theta(m: &DMatrix<f64>) -> DMatrix<f64> {
    let (mut best, mut at) = (f64::INFINITY, (0, 0));
    for i in 0..2 {
        for k in 0..2 {
            if m[(i, k)] < best {
                best = m[(i, k)];
                at = (i, k);
            }
        }
    }
    let c = best.min(1.0);
    if at.0 != at.1 {
        DMatrix::from_row_slice(2, 2, &[1.0 - c, c, c, 1.0 - c])
    } else {
        DMatrix::from_row_slice(2, 2, &[c, 1.0 - c, 1.0 - c, c])
    }
}

/// Occupations after the map for a state with vanishing first, anomalous
/// and off-diagonal normal moments:
/// `n_i' = sum_k (|S_ik|^2 + |R_ik|^2) n_k + sum_k |R_ik|^2 + |f_i|^2`.
pub fn occupation_propagate(map: &BogoliubovMap, state: &MomentState) -> Result<Vec<f64>> {
    if map.num_modes() != state.num_modes() {
        return Err(Error::ShapeMismatch("map and state disagree on modes".into()));
    }
    require_diagonal(state, true)?;
    let n0 = state.occupations();
    let m = map.transfer_entries();
    Ok((0..map.num_modes())
        .map(|i| {
            let transfer: f64 = (0..n0.len()).map(|k| m[(i, k)] * n0[k]).sum();
            let vac: f64 = map.r.row(i).iter().map(|z| z.norm_sqr()).sum();
            transfer + vac + map.f[i].norm_sqr()
        })
        .collect())
}

pub fn bose_entropy_total(n: &[f64]) -> Result<f64> {
    n.iter().map(|&x| bose_entropy_scalar(x)).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NorRow {
    /// `s(n_i')`
    pub lhs: f64,
    /// `sum_k (|S_ik|^2 - |R_ik|^2) s(n_k)`
    pub rhs: f64,
    pub holds: bool,
}

/// Row-wise sufficient condition `s(n_i') >= sum_k (|S_ik|^2 - |R_ik|^2) s(n_k)`.
/// Since the weights' column sums are one, all rows holding implies that
/// the total Bose entropy does not decrease.
pub fn check_sufficient_nor(map: &BogoliubovMap, state: &MomentState) -> Result<Vec<NorRow>> {
    let n_t = occupation_propagate(map, state)?;
    let s0: Vec<f64> = state
        .occupations()
        .iter()
        .map(|&x| bose_entropy_scalar(x.max(0.0)))
        .collect::<Result<_>>()?;
    let n = map.num_modes();
    (0..n)
        .map(|i| {
            let lhs = bose_entropy_scalar(n_t[i])?;
            let rhs: f64 = (0..n)
                .map(|k| (map.s[(i, k)].norm_sqr() - map.r[(i, k)].norm_sqr()) * s0[k])
                .sum();
            Ok(NorRow {
                lhs,
                rhs,
                holds: lhs >= rhs - 1e-12,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Guarantee {
    GuaranteedByDss,
    GuaranteedByNor,
    NoGuarantee,
}

impl Guarantee {
    pub fn label(&self) -> &'static str {
        match self {
            Guarantee::GuaranteedByDss => "dss",
            Guarantee::GuaranteedByNor => "nor",
            Guarantee::NoGuarantee => "none",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SecondLawReport {
    pub guarantee: Guarantee,
    pub entropy_before: f64,
    pub entropy_after: f64,
    pub delta_s: f64,
    pub certificate: StochasticCertificate,
    pub nor: Vec<NorRow>,
}

/// Runs both certificates and measures the entropy change.
pub fn second_law_verdict(map: &BogoliubovMap, state: &MomentState) -> Result<SecondLawReport> {
    let n_t = occupation_propagate(map, state)?;
    let certificate = check_superstochastic(&TransferMatrix::from_map(map))?;
    let nor = check_sufficient_nor(map, state)?;
    let guarantee = if certificate.passed() {
        Guarantee::GuaranteedByDss
    } else if nor.iter().all(|r| r.holds) {
        Guarantee::GuaranteedByNor
    } else {
        Guarantee::NoGuarantee
    };
    let entropy_before = bose_entropy_total(&state.occupations())?;
    let entropy_after = bose_entropy_total(&n_t)?;
    Ok(SecondLawReport {
        guarantee,
        entropy_before,
        entropy_after,
        delta_s: entropy_after - entropy_before,
        certificate,
        nor,
    })
}

/// The 3x3 matrix whose first column vanishes below the diagonal and whose
/// second column has a small lower part, violating the subset inequality
/// at `I = {1, 2}`, `J = {0, 1}` (0-based).
pub fn counterexample_matrix() -> DMatrix<f64> {
    DMatrix::from_row_slice(3, 3, &[1.0, 0.6, 0.6, 0.0, 0.45, 0.6, 0.0, 0.45, 0.6])
}

#[derive(Debug, Clone, PartialEq)]
pub struct HallSearch {
    pub trials: usize,
    /// Smallest subset slack seen over all sampled maps.
    pub min_slack: f64,
    /// First sampled map whose transfer matrix fails the subset test.
    pub violating: Option<BogoliubovMap>,
}

/// Samples random canonical maps looking for one whose transfer matrix is
/// not double superstochastic.
pub fn search_violating_map(n: usize, trials: usize, squeeze_budget: f64, seed: u64) -> Result<HallSearch> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = HallSearch {
        trials,
        min_slack: f64::INFINITY,
        violating: None,
    };
    for _ in 0..trials {
        let map = crate::linear::random_bogoliubov_with(n, squeeze_budget, 0.0, &mut rng)?;
        let tm = TransferMatrix::from_map(&map);
        let slack = hall_slack(&tm)?;
        out.min_slack = out.min_slack.min(slack);
        if slack < -SUM_TOL && out.violating.is_none() {
            out.violating = Some(map);
        }
    }
    Ok(out)
}
