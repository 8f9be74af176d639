//! Counting the nonvanishing traces `tr(L rho R n_k)` built from the eight
//! interaction monomials at a given order.

use super::{MonomialTable, Word};
use crate::fock::{thermal_populations, FockSpace, ThermalSpec};
use crate::{Error, Result};
use serde::Serialize;

/// Relative threshold below which a trace counts as zero.
pub const NONZERO_REL: f64 = 1e-12;
/// Largest order accepted (`8^l (l + 1)` terms).
pub const MAX_ORDER: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnumeratedTerm {
    /// Monomial indices (0-based) of `L = h_a1 ... h_ak`.
    pub left: Vec<usize>,
    /// Monomial indices of the right factor, applied as
    /// `R = h_b(k') ... h_b1`.
    pub right: Vec<usize>,
    pub trace_n1: f64,
    pub trace_n2: f64,
    /// Label of `Theta = L R`.
    pub theta_label: String,
    /// `Theta` is Hermitian on states away from the cutoffs.
    pub hermitian: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Enumeration {
    pub order: usize,
    pub total: usize,
    pub nonzero: usize,
    /// `(k, k', nonzero terms)` per split.
    pub splits: Vec<(usize, usize, usize)>,
    pub all_hermitian: bool,
    pub cutoffs: Vec<usize>,
    /// Cutoffs used for the stability check.
    pub doubled_cutoffs: Vec<usize>,
    pub terms: Vec<EnumeratedTerm>,
}

struct RawTerm {
    k: usize,
    left: Vec<usize>,
    right: Vec<usize>,
    traces: [f64; 2],
}

fn index_tuples(len: usize, base: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..base).map(move |i| {
                    let mut t = t.clone();
                    t.push(i);
                    t
                })
            })
            .collect();
    }
    out
}

fn word_of(table: &MonomialTable, idx: &[usize]) -> Word {
    idx.iter()
        .fold(Word(Vec::new()), |w, &i| w.concat(&table.monomials[i]))
}

/// `sum_n p_n <n| R n_k L |n>` for both modes.
fn traces(left: &Word, right: &Word, space: &FockSpace, pops: &[f64]) -> [f64; 2] {
    let mut out = [0.0; 2];
    for (j, &p) in pops.iter().enumerate() {
        let occ = space.occupations(j);
        let Some((cl, mid)) = left.apply(&occ, space.cutoffs()) else {
            continue;
        };
        let Some((cr, back)) = right.apply(&mid, space.cutoffs()) else {
            continue;
        };
        if back == occ {
            out[0] += p * cl * cr * mid[0] as f64;
            out[1] += p * cl * cr * mid[1] as f64;
        }
    }
    out
}

fn raw_terms(spec: &ThermalSpec, cutoffs: &[usize], order: usize) -> Result<Vec<RawTerm>> {
    let space = FockSpace::new(cutoffs)?;
    let mut pops = thermal_populations(&space, spec);
    let z: f64 = pops.iter().sum();
    pops.iter_mut().for_each(|p| *p /= z);
    let table = MonomialTable::new(spec.omegas()[0], spec.omegas()[1]);
    let mut out = Vec::new();
    for k in 0..=order {
        let kp = order - k;
        for left in index_tuples(k, 8) {
            let lw = word_of(&table, &left);
            for right in index_tuples(kp, 8) {
                // R = h_b(k') ... h_b1
                let rev: Vec<usize> = right.iter().rev().copied().collect();
                let rw = word_of(&table, &rev);
                out.push(RawTerm {
                    k,
                    traces: traces(&lw, &rw, &space, &pops),
                    left: left.clone(),
                    right,
                });
            }
        }
    }
    Ok(out)
}

fn nonzero_mask(terms: &[RawTerm]) -> Vec<bool> {
    let max = terms
        .iter()
        .flat_map(|t| t.traces)
        .fold(0.0_f64, |m, x| m.max(x.abs()));
    terms
        .iter()
        .map(|t| t.traces.iter().any(|x| x.abs() > NONZERO_REL * max))
        .collect()
}

/// Hermiticity of a word on basis states at least `margin` levels below
/// every cutoff: `<i|W|j> = <j|W|i>` for all such pairs.
fn is_hermitian_interior(word: &Word, space: &FockSpace, margin: usize) -> bool {
    let inner = |occ: &[usize]| occ.iter().zip(space.cutoffs()).all(|(&n, &c)| n + margin <= c);
    for j in 0..space.dimension() {
        let occ = space.occupations(j);
        if !inner(&occ) {
            continue;
        }
        if let Some((c, to)) = word.apply(&occ, space.cutoffs()) {
            if !inner(&to) {
                continue;
            }
            let back = word.apply(&to, space.cutoffs());
            match back {
                Some((c2, o2)) if o2 == occ && (c - c2).abs() <= 1e-12 * c.abs().max(1.0) => {}
                _ => return false,
            }
        }
    }
    true
}

/// Enumerates every split `k + k' = order` and every monomial tuple,
/// counts traces above `1e-12` of the largest, and checks that the counts
/// survive doubling the cutoffs.
pub fn enumerate_second_order_terms(spec: &ThermalSpec, cutoffs: &[usize], order: usize) -> Result<Enumeration> {
    if spec.num_modes() != 2 || cutoffs.len() != 2 {
        return Err(Error::ShapeMismatch("term enumeration needs two modes".into()));
    }
    if order == 0 || order > MAX_ORDER {
        return Err(Error::SizeGuard {
            what: "enumeration order",
            size: order,
            limit: MAX_ORDER,
        });
    }
    let terms = raw_terms(spec, cutoffs, order)?;
    let mask = nonzero_mask(&terms);
    let doubled: Vec<usize> = cutoffs.iter().map(|c| 2 * c).collect();
    let fine_mask = nonzero_mask(&raw_terms(spec, &doubled, order)?);
    let changed = mask.iter().zip(&fine_mask).filter(|(a, b)| a != b).count();
    if changed > 0 {
        return Err(Error::Convergence {
            shift: changed as f64,
            tolerance: 0.0,
        });
    }

    let space = FockSpace::new(cutoffs)?;
    let table = MonomialTable::new(spec.omegas()[0], spec.omegas()[1]);
    let mut splits: Vec<(usize, usize, usize)> = (0..=order).map(|k| (k, order - k, 0)).collect();
    let mut kept = Vec::new();
    for (t, _) in terms.into_iter().zip(&mask).filter(|(_, &m)| m) {
        splits[t.k].2 += 1;
        let rev: Vec<usize> = t.right.iter().rev().copied().collect();
        let theta = word_of(&table, &t.left).concat(&word_of(&table, &rev));
        let zero_shift = theta.shift(2).iter().all(|&s| s == 0);
        let hermitian = zero_shift && is_hermitian_interior(&theta, &space, 3 * order);
        kept.push(EnumeratedTerm {
            theta_label: theta.label(),
            hermitian,
            left: t.left,
            right: t.right,
            trace_n1: t.traces[0],
            trace_n2: t.traces[1],
        });
    }
    Ok(Enumeration {
        order,
        total: 8usize.pow(order as u32) * (order + 1),
        nonzero: kept.len(),
        splits,
        all_hermitian: kept.iter().all(|t| t.hermitian),
        cutoffs: cutoffs.to_vec(),
        doubled_cutoffs: doubled,
        terms: kept,
    })
}
