//! Exact evolution of a thermal two-mode state on a truncated Fock space.

use super::hamiltonian::{components, hamiltonian_triplets, polynomial_triplets, Triplets};
use super::{NonlinearConfig, Variant};
use crate::cooling::CoolingReport;
use crate::fock::{tail_mass, thermal_populations, FockSpace, DEFAULT_MAX_ENTRIES};
use crate::{CMatrix, Error, Result, C64};
use nalgebra::SymmetricEigen;
use serde::Serialize;

/// Largest thermal tail accepted as input to exact evolution.
pub const MAX_INPUT_TAIL: f64 = 1e-8;
/// Cutoff refinement may shift the occupation changes by at most this.
pub const CONVERGENCE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Convergence {
    pub refined_cutoffs: Vec<usize>,
    /// Largest change of `dn1`, `dn2` under refinement.
    pub shift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactReport {
    pub cutoffs: Vec<usize>,
    pub tail: f64,
    pub report: CoolingReport,
    /// `w1 dn1 + w2 dn2` for the variant's invariant weights.
    pub invariant_drift: f64,
    /// `omega1 dn1 + omega2 dn2` in the config's units.
    pub energy_change: f64,
    /// Present when a refined space fit under the dimension limit.
    pub convergence: Option<Convergence>,
    pub largest_block: usize,
}

/// Cutoffs with thermal tail below `1e-9` (or `1e-8` when the denser
/// choice would not fit), at least `max(12, 6 <n>)` per mode.
pub fn default_cutoffs(config: &NonlinearConfig) -> Result<Vec<usize>> {
    let spec = &config.spec;
    for target in [1e-9, MAX_INPUT_TAIL] {
        let cut: Vec<usize> = spec
            .cutoffs_for_tail(target)
            .iter()
            .enumerate()
            .map(|(i, &c)| c.max(12).max((6.0 * spec.mean_occupation(i)).ceil() as usize))
            .collect();
        if largest_block(config, &cut)? * largest_block(config, &cut)? <= DEFAULT_MAX_ENTRIES {
            return Ok(cut);
        }
    }
    let cut = spec.cutoffs_for_tail(MAX_INPUT_TAIL);
    let d = largest_block(config, &cut)?;
    Err(Error::DimensionOverflow {
        dimension: d,
        entries: d * d,
        limit: DEFAULT_MAX_ENTRIES,
    })
}

fn largest_block(config: &NonlinearConfig, cutoffs: &[usize]) -> Result<usize> {
    let space = FockSpace::new(cutoffs)?;
    Ok(match config.variant {
        Variant::Full => space.dimension(),
        _ => {
            let t = hamiltonian_triplets(config, &space)?;
            components(space.dimension(), &t)
                .iter()
                .map(Vec::len)
                .max()
                .unwrap_or(1)
        }
    })
}

/// Occupation changes `(dn1, dn2)` after time `t`, and the largest block.
fn evolve_changes(config: &NonlinearConfig, space: &FockSpace) -> Result<(f64, f64, usize)> {
    let triplets = hamiltonian_triplets(config, space)?;
    let mut pops = thermal_populations(space, &config.spec);
    let total: f64 = pops.iter().sum();
    pops.iter_mut().for_each(|p| *p /= total);
    let n: Vec<[f64; 2]> = (0..space.dimension())
        .map(|i| {
            let o = space.occupations(i);
            [o[0] as f64, o[1] as f64]
        })
        .collect();
    let (mut dn1, mut dn2, mut largest) = (0.0, 0.0, 0);
    for comp in components(space.dimension(), &triplets) {
        let d = comp.len();
        largest = largest.max(d);
        if d * d > space.max_entries() {
            return Err(Error::DimensionOverflow {
                dimension: d,
                entries: d * d,
                limit: space.max_entries(),
            });
        }
        if d == 1 {
            continue;
        }
        let u = block_propagator(&comp, &triplets, config.t);
        for (b, &j) in comp.iter().enumerate() {
            for (a, &i) in comp.iter().enumerate() {
                let w = u[(a, b)].norm_sqr() * pops[j];
                dn1 += (n[i][0] - n[j][0]) * w;
                dn2 += (n[i][1] - n[j][1]) * w;
            }
        }
    }
    Ok((dn1, dn2, largest))
}

/// `exp(-i H_B t)` for the block of `H` on the given basis states.
fn block_propagator(comp: &[usize], triplets: &Triplets, t: f64) -> CMatrix {
    let d = comp.len();
    let pos: std::collections::HashMap<usize, usize> = comp.iter().enumerate().map(|(a, &i)| (i, a)).collect();
    let mut h = CMatrix::zeros(d, d);
    for (&(i, j), &v) in triplets {
        if let (Some(&a), Some(&b)) = (pos.get(&i), pos.get(&j)) {
            h[(a, b)] += C64::new(v, 0.0);
        }
    }
    let eig = SymmetricEigen::new(h);
    let v = eig.eigenvectors;
    let phases = CMatrix::from_diagonal(&eig.eigenvalues.map(|e| C64::from_polar(1.0, -e * t)));
    &v * phases * v.adjoint()
}

/// Exact evolution on the given cutoffs, without refinement.
pub fn exact_evolve_at(config: &NonlinearConfig, cutoffs: &[usize]) -> Result<ExactReport> {
    let space = FockSpace::new(cutoffs)?;
    if space.num_modes() != 2 {
        return Err(Error::ShapeMismatch("nonlinear runs need two modes".into()));
    }
    let tail = tail_mass(&config.spec, cutoffs);
    if tail > MAX_INPUT_TAIL {
        return Err(Error::Precondition {
            condition: "thermal tail below 1e-8",
            worst: tail,
            location: format!("cutoffs {cutoffs:?}"),
        });
    }
    let (dn1, dn2, largest_block) = evolve_changes(config, &space)?;
    let (w1, w2) = config.variant.invariant_weights();
    Ok(ExactReport {
        cutoffs: cutoffs.to_vec(),
        tail,
        report: CoolingReport::from_changes(config.omega2() / config.omega1(), dn1, dn2),
        invariant_drift: w1 * dn1 + w2 * dn2,
        energy_change: config.omega1() * dn1 + config.omega2() * dn2,
        convergence: None,
        largest_block,
    })
}

/// Exact evolution with a refinement check. Cutoffs default to
/// [`default_cutoffs`]. The refined space doubles every cutoff, or grows
/// by the largest factor in {1.75, 1.5, 1.25} that fits the dense limit;
/// when none fits, `convergence` stays empty.
pub fn exact_evolve(config: &NonlinearConfig, cutoffs: Option<&[usize]>) -> Result<ExactReport> {
    let base = match cutoffs {
        Some(c) => c.to_vec(),
        None => default_cutoffs(config)?,
    };
    let mut report = exact_evolve_at(config, &base)?;
    for factor in [2.0, 1.75, 1.5, 1.25] {
        let refined: Vec<usize> = base.iter().map(|&c| (c as f64 * factor).ceil() as usize).collect();
        let block = largest_block(config, &refined)?;
        if block * block > DEFAULT_MAX_ENTRIES {
            continue;
        }
        let fine = exact_evolve_at(config, &refined)?;
        let shift = (fine.report.dn1 - report.report.dn1)
            .abs()
            .max((fine.report.dn2 - report.report.dn2).abs());
        if shift > CONVERGENCE_TOL {
            return Err(Error::Convergence {
                shift,
                tolerance: CONVERGENCE_TOL,
            });
        }
        report.convergence = Some(Convergence {
            refined_cutoffs: refined,
            shift,
        });
        break;
    }
    if report.convergence.is_none() {
        report.report.warning = Some("cutoff refinement skipped: dense limit".into());
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvariantResidual {
    pub weights: (f64, f64),
    /// Max-norm of `[w1 n1 + w2 n2, H_I]` on states at least two levels
    /// below both cutoffs.
    pub interior: f64,
    /// The same over the whole truncated space.
    pub unrestricted: f64,
}

/// Commutator of the variant's invariant with its interaction.
pub fn manley_rowe_residual(cutoffs: &[usize], variant: Variant) -> Result<InvariantResidual> {
    invariant_residual(cutoffs, variant, variant.invariant_weights())
}

pub fn invariant_residual(cutoffs: &[usize], variant: Variant, weights: (f64, f64)) -> Result<InvariantResidual> {
    let space = FockSpace::new(cutoffs)?;
    if space.num_modes() != 2 {
        return Err(Error::ShapeMismatch("two modes required".into()));
    }
    let h = polynomial_triplets(&variant.interaction(), &space);
    let q = |i: usize| {
        let o = space.occupations(i);
        weights.0 * o[0] as f64 + weights.1 * o[1] as f64
    };
    let interior = |i: usize| {
        let o = space.occupations(i);
        o[0] + 2 <= cutoffs[0] && o[1] + 2 <= cutoffs[1]
    };
    let (mut inner, mut all) = (0.0_f64, 0.0_f64);
    for (&(i, j), &v) in &h {
        let c = ((q(i) - q(j)) * v).abs();
        all = all.max(c);
        if interior(i) && interior(j) {
            inner = inner.max(c);
        }
    }
    Ok(InvariantResidual {
        weights,
        interior: inner,
        unrestricted: all,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_coupling_changes_nothing() {
        let c = NonlinearConfig::rescaled(1.0, 0.48, 0.0, 20.0, Variant::Full).unwrap();
        let r = exact_evolve_at(&c, &[22, 40]).unwrap();
        assert!(r.report.dn1.abs() < 1e-12 && r.report.dn2.abs() < 1e-12);
    }

    #[test]
    fn rwa_conserves_invariant() {
        let c = NonlinearConfig::rescaled(1.0, 0.48, 0.05, 20.0, Variant::Rwa).unwrap();
        let r = exact_evolve(&c, None).unwrap();
        assert!(r.invariant_drift.abs() < 1e-9);
        assert!(r.convergence.is_some());
        assert!(r.energy_change >= -1e-9);
    }

    #[test]
    fn residuals() {
        let rwa = manley_rowe_residual(&[10, 10], Variant::Rwa).unwrap();
        assert!(rwa.interior <= 1e-12);
        let full = manley_rowe_residual(&[10, 10], Variant::Full).unwrap();
        assert!(full.interior > 0.5);
        let mirrored = manley_rowe_residual(&[10, 10], Variant::RwaMirrored).unwrap();
        assert!(mirrored.interior <= 1e-12);
        assert_eq!(mirrored.weights, (1.0, 2.0));
    }

    #[test]
    fn tail_precondition() {
        let c = NonlinearConfig::rescaled(1.0, 0.48, 0.01, 1.0, Variant::Rwa).unwrap();
        assert!(matches!(exact_evolve_at(&c, &[3, 3]), Err(Error::Precondition { .. })));
    }
}
