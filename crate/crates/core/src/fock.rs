//! Truncated Fock spaces, ladder operators and thermal states.
//!
//! Basis states are laid out row-major over modes with the last mode
//! varying fastest, so for two modes the index of `|n1, n2>` is
//! `n1 * (c2 + 1) + n2`.

use crate::{CMatrix, Error, Result, C64};
use serde::Serialize;

/// Dense operators above this many entries are refused.
pub const DEFAULT_MAX_ENTRIES: usize = 1_000_000;

/// Tail mass targeted when cutoffs are chosen automatically.
pub const DEFAULT_TAIL_TARGET: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FockSpace {
    cutoffs: Vec<usize>,
    max_entries: usize,
}

impl FockSpace {
    /// Space with inclusive per-mode cutoffs and the default dense limit.
    pub fn new(cutoffs: &[usize]) -> Result<Self> {
        Self::with_limit(cutoffs, DEFAULT_MAX_ENTRIES)
    }

    pub fn with_limit(cutoffs: &[usize], max_entries: usize) -> Result<Self> {
        if cutoffs.is_empty() {
            return Err(Error::Empty("cutoffs"));
        }
        if let Some(&c) = cutoffs.iter().find(|&&c| c == 0) {
            return Err(Error::Domain {
                what: "mode cutoff",
                value: c as f64,
            });
        }
        let space = Self {
            cutoffs: cutoffs.to_vec(),
            max_entries,
        };
        // Overflow is reported when a dense operator is requested, not here;
        // the dimension itself must at least fit in a usize.
        cutoffs
            .iter()
            .try_fold(1usize, |acc, &c| acc.checked_mul(c + 1))
            .ok_or(Error::DimensionOverflow {
                dimension: usize::MAX,
                entries: usize::MAX,
                limit: max_entries,
            })?;
        Ok(space)
    }

    pub fn num_modes(&self) -> usize {
        self.cutoffs.len()
    }

    pub fn cutoffs(&self) -> &[usize] {
        &self.cutoffs
    }

    pub fn max_entries(&self) -> usize {
        self.max_entries
    }

    pub fn dimension(&self) -> usize {
        self.cutoffs.iter().map(|c| c + 1).product()
    }

    /// Fails when a dense `dimension x dimension` matrix exceeds the limit.
    pub fn check_dense(&self) -> Result<()> {
        let d = self.dimension();
        match d.checked_mul(d) {
            Some(e) if e <= self.max_entries => Ok(()),
            other => Err(Error::DimensionOverflow {
                dimension: d,
                entries: other.unwrap_or(usize::MAX),
                limit: self.max_entries,
            }),
        }
    }

    fn stride(&self, mode: usize) -> usize {
        self.cutoffs[mode + 1..].iter().map(|c| c + 1).product()
    }

    pub fn index(&self, occupations: &[usize]) -> usize {
        debug_assert_eq!(occupations.len(), self.num_modes());
        occupations
            .iter()
            .zip(&self.cutoffs)
            .fold(0, |acc, (&n, &c)| acc * (c + 1) + n)
    }

    pub fn occupations(&self, mut index: usize) -> Vec<usize> {
        let mut occ = vec![0; self.num_modes()];
        for (slot, &c) in occ.iter_mut().zip(&self.cutoffs).rev() {
            *slot = index % (c + 1);
            index /= c + 1;
        }
        occ
    }

    pub fn check_mode(&self, mode: usize) -> Result<()> {
        if mode < self.num_modes() {
            Ok(())
        } else {
            Err(Error::ModeOutOfRange {
                mode,
                num_modes: self.num_modes(),
            })
        }
    }

    /// Occupation of `mode` for every basis state, as f64.
    pub fn number_diagonal(&self, mode: usize) -> Result<Vec<f64>> {
        self.check_mode(mode)?;
        let stride = self.stride(mode);
        let c = self.cutoffs[mode];
        Ok((0..self.dimension())
            .map(|i| ((i / stride) % (c + 1)) as f64)
            .collect())
    }
}

/// Matrix of `a_mode` embedded in the full tensor-product space.
pub fn annihilation_matrix(space: &FockSpace, mode: usize) -> Result<CMatrix> {
    space.check_mode(mode)?;
    space.check_dense()?;
    let d = space.dimension();
    let stride = space.stride(mode);
    let c = space.cutoffs[mode];
    let mut a = CMatrix::zeros(d, d);
    for j in 0..d {
        let n = (j / stride) % (c + 1);
        if n > 0 {
            a[(j - stride, j)] = C64::new((n as f64).sqrt(), 0.0);
        }
    }
    Ok(a)
}

pub fn creation_matrix(space: &FockSpace, mode: usize) -> Result<CMatrix> {
    annihilation_matrix(space, mode).map(|a| a.adjoint())
}

pub fn number_matrix(space: &FockSpace, mode: usize) -> Result<CMatrix> {
    space.check_dense()?;
    let diag = space.number_diagonal(mode)?;
    Ok(CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        diag.len(),
        diag.into_iter().map(|x| C64::new(x, 0.0)),
    )))
}

/// Frequencies and inverse temperature of a product thermal state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThermalSpec {
    omegas: Vec<f64>,
    beta: f64,
    swapped: bool,
}

impl ThermalSpec {
    /// Modes kept in the given order.
    pub fn new(omegas: &[f64], beta: f64) -> Result<Self> {
        if omegas.is_empty() {
            return Err(Error::Empty("omegas"));
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::Domain {
                what: "beta",
                value: beta,
            });
        }
        if let Some(&w) = omegas.iter().find(|w| !(**w > 0.0 && w.is_finite())) {
            return Err(Error::Domain {
                what: "omega",
                value: w,
            });
        }
        Ok(Self {
            omegas: omegas.to_vec(),
            beta,
            swapped: false,
        })
    }

    /// Two modes normalized so that `omega2 <= omega1`, i.e. `alpha <= 1`.
    pub fn two_mode(omega1: f64, omega2: f64, beta: f64) -> Result<Self> {
        let mut spec = Self::new(&[omega1, omega2], beta)?;
        if omega2 > omega1 {
            spec.omegas.swap(0, 1);
            spec.swapped = true;
        }
        Ok(spec)
    }

    /// Two modes in the given order, `alpha` may exceed 1.
    pub fn two_mode_ordered(omega1: f64, omega2: f64, beta: f64) -> Result<Self> {
        Self::new(&[omega1, omega2], beta)
    }

    /// Two-mode spec from the Boltzmann factors `y = exp(-beta omega1)`
    /// and `y^alpha = exp(-beta omega2)` at `beta = 1`.
    pub fn from_y(y: f64, alpha: f64) -> Result<Self> {
        if !(y > 0.0 && y < 1.0) {
            return Err(Error::Domain {
                what: "y",
                value: y,
            });
        }
        let w1 = -y.ln();
        Self::two_mode(w1, alpha * w1, 1.0)
    }

    pub fn omegas(&self) -> &[f64] {
        &self.omegas
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn num_modes(&self) -> usize {
        self.omegas.len()
    }

    /// True when [`ThermalSpec::two_mode`] exchanged the modes.
    pub fn swapped(&self) -> bool {
        self.swapped
    }

    pub fn y(&self, mode: usize) -> f64 {
        (-self.beta * self.omegas[mode]).exp()
    }

    /// `omega2 / omega1`; only meaningful for two modes.
    pub fn alpha(&self) -> f64 {
        self.omegas[1] / self.omegas[0]
    }

    pub fn xi(&self) -> f64 {
        self.omegas
            .iter()
            .map(|w| -(-self.beta * w).exp_m1())
            .product()
    }

    /// Thermal mean occupation `1 / (e^{beta omega} - 1)`.
    pub fn mean_occupation(&self, mode: usize) -> f64 {
        1.0 / (self.beta * self.omegas[mode]).exp_m1()
    }

    /// Smallest per-mode cutoffs whose analytic tail mass is below `target`.
    pub fn cutoffs_for_tail(&self, target: f64) -> Vec<usize> {
        let per_mode = target / self.num_modes() as f64;
        self.omegas
            .iter()
            .map(|w| {
                // y^{c+1} < per_mode
                let x = self.beta * w;
                let c = (-per_mode.ln() / x).ceil() - 1.0;
                c.max(1.0) as usize
            })
            .collect()
    }
}

/// Exact probability mass of the basis states above the cutoffs.
pub fn tail_mass(spec: &ThermalSpec, cutoffs: &[usize]) -> f64 {
    // 1 - prod_i (1 - y_i^{c_i + 1})
    let log_kept: f64 = spec
        .omegas
        .iter()
        .zip(cutoffs)
        .map(|(w, &c)| (-(-spec.beta * w * (c as f64 + 1.0)).exp()).ln_1p())
        .sum();
    -log_kept.exp_m1()
}

/// Density matrix on a truncated space together with the probability mass
/// the truncation discarded.
///
/// `rho` is stored as truncated, so `trace(rho) + trace_deficit = 1`.
/// [`TruncatedState::normalized`] gives the renormalized matrix.
#[derive(Debug, Clone)]
pub struct TruncatedState {
    pub space: FockSpace,
    pub rho: CMatrix,
    pub trace_deficit: f64,
}

impl TruncatedState {
    pub fn trace(&self) -> f64 {
        self.rho.trace().re
    }

    pub fn normalized(&self) -> CMatrix {
        &self.rho / C64::new(self.trace(), 0.0)
    }

    pub fn hermiticity_residual(&self) -> f64 {
        crate::max_abs(&(&self.rho - self.rho.adjoint()))
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let h = (&self.rho + self.rho.adjoint()) * C64::new(0.5, 0.0);
        h.symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Checks Hermiticity, positivity and trace bookkeeping.
    pub fn validate(&self) -> Result<()> {
        let herm = self.hermiticity_residual();
        if herm > 1e-12 {
            return Err(Error::Precondition {
                condition: "hermiticity",
                worst: herm,
                location: "rho - rho^dagger".into(),
            });
        }
        let lmin = self.min_eigenvalue();
        if lmin < -1e-10 {
            return Err(Error::Precondition {
                condition: "positivity",
                worst: lmin,
                location: "smallest eigenvalue".into(),
            });
        }
        let defect = (self.trace() + self.trace_deficit - 1.0).abs();
        if defect > 1e-10 {
            return Err(Error::Precondition {
                condition: "trace balance",
                worst: defect,
                location: "trace + deficit".into(),
            });
        }
        Ok(())
    }

    /// Normalized diagonal of `rho`.
    pub fn populations(&self) -> Vec<f64> {
        let tr = self.trace();
        self.rho.diagonal().iter().map(|z| z.re / tr).collect()
    }

    /// Normalized `<a_mode^dagger a_mode>`.
    pub fn mean_number(&self, mode: usize) -> Result<f64> {
        let n = self.space.number_diagonal(mode)?;
        let tr = self.trace();
        Ok(self
            .rho
            .diagonal()
            .iter()
            .zip(&n)
            .map(|(p, k)| p.re * k)
            .sum::<f64>()
            / tr)
    }

    /// Normalized expectation value `tr(rho op)`.
    pub fn expectation(&self, op: &CMatrix) -> C64 {
        let tr = self.trace();
        // tr(rho op) = sum_ij rho_ij op_ji
        let mut acc = C64::new(0.0, 0.0);
        for j in 0..op.ncols() {
            for i in 0..op.nrows() {
                acc += self.rho[(j, i)] * op[(i, j)];
            }
        }
        acc / tr
    }
}

/// Diagonal thermal state on `space`, populations `xi * exp(-beta sum omega n)`.
pub fn thermal_state(space: &FockSpace, spec: &ThermalSpec) -> Result<TruncatedState> {
    if space.num_modes() != spec.num_modes() {
        return Err(Error::ShapeMismatch(format!(
            "space has {} modes, spec has {}",
            space.num_modes(),
            spec.num_modes()
        )));
    }
    space.check_dense()?;
    let pops = thermal_populations(space, spec);
    let d = space.dimension();
    let mut rho = CMatrix::zeros(d, d);
    for (i, p) in pops.iter().enumerate() {
        rho[(i, i)] = C64::new(*p, 0.0);
    }
    Ok(TruncatedState {
        space: space.clone(),
        rho,
        trace_deficit: tail_mass(spec, space.cutoffs()),
    })
}

/// Unnormalized thermal populations in basis order.
pub fn thermal_populations(space: &FockSpace, spec: &ThermalSpec) -> Vec<f64> {
    let log_xi: f64 = spec
        .omegas
        .iter()
        .map(|w| (-(-spec.beta * w).exp()).ln_1p())
        .sum();
    (0..space.dimension())
        .map(|i| {
            let e: f64 = space
                .occupations(i)
                .iter()
                .zip(&spec.omegas)
                .map(|(&n, w)| n as f64 * w)
                .sum();
            (log_xi - spec.beta * e).exp()
        })
        .collect()
}

/// `(1 + n) ln(1 + n) - n ln n`, zero at `n = 0`.
pub fn bose_entropy_scalar(n: f64) -> Result<f64> {
    if n < 0.0 || n.is_nan() {
        return Err(Error::Domain {
            what: "bose entropy",
            value: n,
        });
    }
    if n == 0.0 {
        return Ok(0.0);
    }
    Ok((1.0 + n) * n.ln_1p() - n * n.ln())
}
