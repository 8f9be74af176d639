//! Linear (Bogoliubov) evolution of bosonic modes in the Heisenberg picture,
//! `b_i = sum_j (S_ij a_j + R_ij a_j^dagger) + f_i`, acting on first and
//! second moments.

use crate::fock::{annihilation_matrix, FockSpace, ThermalSpec};
use crate::{max_abs, CMatrix, CVector, Error, Result, C64};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

/// Residual below which a map counts as canonical.
pub const SYMPLECTIC_TOL: f64 = 1e-10;
/// Default tolerance for vanishing first and anomalous moments.
pub const DIAGONAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BogoliubovMap {
    pub s: CMatrix,
    pub r: CMatrix,
    pub f: CVector,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SymplecticResiduals {
    /// `S S^dagger - R R^dagger - I`
    pub ss_rr: f64,
    /// `S R^T - R S^T`
    pub sr_rs: f64,
    /// `S^dagger S - R^T R^* - I`
    pub ss_rr_dual: f64,
    /// `S^dagger R - R^T S^*`
    pub sr_rs_dual: f64,
}

impl SymplecticResiduals {
    pub fn max(&self) -> f64 {
        self.ss_rr
            .max(self.sr_rs)
            .max(self.ss_rr_dual)
            .max(self.sr_rs_dual)
    }

    pub fn accepted(&self) -> bool {
        self.max() <= SYMPLECTIC_TOL
    }
}

impl BogoliubovMap {
    pub fn new(s: CMatrix, r: CMatrix, f: CVector) -> Result<Self> {
        let n = s.nrows();
        if s.ncols() != n || r.nrows() != n || r.ncols() != n || f.len() != n {
            return Err(Error::ShapeMismatch(format!(
                "S {}x{}, R {}x{}, f {}",
                s.nrows(),
                s.ncols(),
                r.nrows(),
                r.ncols(),
                f.len()
            )));
        }
        if n == 0 {
            return Err(Error::Empty("modes"));
        }
        Ok(Self { s, r, f })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            s: CMatrix::identity(n, n),
            r: CMatrix::zeros(n, n),
            f: CVector::zeros(n),
        }
    }

    /// Passive map `b = U a`.
    pub fn passive(u: CMatrix) -> Result<Self> {
        let n = u.nrows();
        Self::new(u, CMatrix::zeros(n, n), CVector::zeros(n))
    }

    /// Independent single-mode squeezers, `S = diag(cosh r)`,
    /// `R = diag(e^{i phi} sinh r)`.
    pub fn single_mode_squeezers(r: &[f64], phi: &[f64]) -> Self {
        let n = r.len();
        let mut s = CMatrix::zeros(n, n);
        let mut rm = CMatrix::zeros(n, n);
        for i in 0..n {
            s[(i, i)] = C64::new(r[i].cosh(), 0.0);
            rm[(i, i)] = C64::from_polar(r[i].sinh(), phi[i]);
        }
        Self {
            s,
            r: rm,
            f: CVector::zeros(n),
        }
    }

    /// Two-mode squeezer `S = cosh r I`, `R = sinh r [[0,1],[1,0]]`.
    pub fn two_mode_squeezer(r: f64) -> Self {
        let c = C64::new(r.cosh(), 0.0);
        let s = C64::new(r.sinh(), 0.0);
        let z = C64::new(0.0, 0.0);
        Self {
            s: CMatrix::from_row_slice(2, 2, &[c, z, z, c]),
            r: CMatrix::from_row_slice(2, 2, &[z, s, s, z]),
            f: CVector::zeros(2),
        }
    }

    pub fn displacement(f: CVector) -> Self {
        let mut m = Self::identity(f.len());
        m.f = f;
        m
    }

    pub fn num_modes(&self) -> usize {
        self.s.nrows()
    }

    /// Map obtained by applying `self` to the output modes of `first`.
    pub fn after(&self, first: &BogoliubovMap) -> Result<Self> {
        if self.num_modes() != first.num_modes() {
            return Err(Error::ShapeMismatch(format!(
                "composing {} modes with {}",
                self.num_modes(),
                first.num_modes()
            )));
        }
        let s = &self.s * &first.s + &self.r * first.r.conjugate();
        let r = &self.s * &first.r + &self.r * first.s.conjugate();
        let f = &self.s * &first.f + &self.r * first.f.conjugate() + &self.f;
        Ok(Self { s, r, f })
    }

    /// `|S_ik|^2 + |R_ik|^2`
    pub fn transfer_entries(&self) -> DMatrix<f64> {
        let n = self.num_modes();
        DMatrix::from_fn(n, n, |i, k| {
            self.s[(i, k)].norm_sqr() + self.r[(i, k)].norm_sqr()
        })
    }
}

pub fn validate_symplectic(map: &BogoliubovMap) -> Result<SymplecticResiduals> {
    let BogoliubovMap { s, r, f } = map;
    let n = s.nrows();
    if s.ncols() != n || r.shape() != (n, n) || f.len() != n {
        return Err(Error::ShapeMismatch("S, R and f disagree".into()));
    }
    let id = CMatrix::identity(n, n);
    Ok(SymplecticResiduals {
        ss_rr: max_abs(&(s * s.adjoint() - r * r.adjoint() - &id)),
        sr_rs: max_abs(&(s * r.transpose() - r * s.transpose())),
        ss_rr_dual: max_abs(&(s.adjoint() * s - r.transpose() * r.conjugate() - &id)),
        sr_rs_dual: max_abs(&(s.adjoint() * r - r.transpose() * s.conjugate())),
    })
}

/// Haar-random unitary from the QR decomposition of a complex Ginibre matrix.
pub fn random_unitary<R: Rng>(n: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(n, n, |_, _| {
        C64::new(
            StandardNormal.sample(&mut *rng),
            StandardNormal.sample(&mut *rng),
        )
    });
    let qr = g.qr();
    let mut q = qr.q();
    let rr = qr.r();
    for j in 0..n {
        let d = rr[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Random canonical map composed as passive, squeeze, passive, displace.
///
/// Squeeze magnitudes are uniform on `[0, squeeze_budget]` and displacement
/// magnitudes uniform on `[0, displacement_budget]`. The generator is
/// ChaCha8 seeded with `seed`.
pub fn random_bogoliubov(
    n: usize,
    squeeze_budget: f64,
    displacement_budget: f64,
    seed: u64,
) -> Result<BogoliubovMap> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_bogoliubov_with(n, squeeze_budget, displacement_budget, &mut rng)
}

pub fn random_bogoliubov_with<R: Rng>(
    n: usize,
    squeeze_budget: f64,
    displacement_budget: f64,
    rng: &mut R,
) -> Result<BogoliubovMap> {
    if n == 0 {
        return Err(Error::Empty("modes"));
    }
    for (what, v) in [
        ("squeeze budget", squeeze_budget),
        ("displacement budget", displacement_budget),
    ] {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(Error::Domain { what, value: v });
        }
    }
    let u1 = BogoliubovMap::passive(random_unitary(n, rng))?;
    let r: Vec<f64> = (0..n).map(|_| squeeze_budget * rng.random::<f64>()).collect();
    let phi: Vec<f64> = (0..n)
        .map(|_| std::f64::consts::TAU * rng.random::<f64>())
        .collect();
    let sq = BogoliubovMap::single_mode_squeezers(&r, &phi);
    let u2 = BogoliubovMap::passive(random_unitary(n, rng))?;
    let f = CVector::from_fn(n, |_, _| {
        C64::from_polar(
            displacement_budget * rng.random::<f64>(),
            std::f64::consts::TAU * rng.random::<f64>(),
        )
    });
    let d = BogoliubovMap::displacement(f);
    d.after(&u2.after(&sq.after(&u1)?)?)
}

/// First and second moments of an `N`-mode state: `first_i = <a_i>`,
/// `normal_ij = <a_i^dagger a_j>`, `anomalous_ij = <a_i a_j>`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentState {
    pub first: CVector,
    pub normal: CMatrix,
    pub anomalous: CMatrix,
}

impl MomentState {
    pub fn new(first: CVector, normal: CMatrix, anomalous: CMatrix) -> Result<Self> {
        let n = first.len();
        if normal.shape() != (n, n) || anomalous.shape() != (n, n) {
            return Err(Error::ShapeMismatch(format!(
                "first {}, normal {:?}, anomalous {:?}",
                n,
                normal.shape(),
                anomalous.shape()
            )));
        }
        Ok(Self {
            first,
            normal,
            anomalous,
        })
    }

    pub fn vacuum(n: usize) -> Self {
        Self::diagonal(&vec![0.0; n])
    }

    /// Diagonal state with the given mean occupations.
    pub fn diagonal(occupations: &[f64]) -> Self {
        let n = occupations.len();
        let mut normal = CMatrix::zeros(n, n);
        for (i, &x) in occupations.iter().enumerate() {
            normal[(i, i)] = C64::new(x, 0.0);
        }
        Self {
            first: CVector::zeros(n),
            normal,
            anomalous: CMatrix::zeros(n, n),
        }
    }

    pub fn thermal(spec: &ThermalSpec) -> Self {
        let n: Vec<f64> = (0..spec.num_modes()).map(|i| spec.mean_occupation(i)).collect();
        Self::diagonal(&n)
    }

    pub fn num_modes(&self) -> usize {
        self.first.len()
    }

    pub fn occupations(&self) -> Vec<f64> {
        self.normal.diagonal().iter().map(|z| z.re).collect()
    }

    pub fn total_number(&self) -> f64 {
        self.normal.trace().re
    }

    /// Moment matrix of the centred operators,
    /// `[[N_c, conj(M_c)], [M_c, I + N_c^T]]`, which is positive
    /// semidefinite for every physical state.
    pub fn covariance_block(&self) -> CMatrix {
        let n = self.num_modes();
        let m = &self.first;
        let nc = CMatrix::from_fn(n, n, |i, j| self.normal[(i, j)] - m[i].conj() * m[j]);
        let mc = CMatrix::from_fn(n, n, |i, j| self.anomalous[(i, j)] - m[i] * m[j]);
        let mut g = CMatrix::zeros(2 * n, 2 * n);
        g.view_mut((0, 0), (n, n)).copy_from(&nc);
        g.view_mut((0, n), (n, n)).copy_from(&mc.conjugate());
        g.view_mut((n, 0), (n, n)).copy_from(&mc);
        g.view_mut((n, n), (n, n))
            .copy_from(&(CMatrix::identity(n, n) + nc.transpose()));
        g
    }

    /// Smallest eigenvalue of [`MomentState::covariance_block`].
    pub fn physicality_margin(&self) -> f64 {
        let g = self.covariance_block();
        let h = (&g + g.adjoint()) * C64::new(0.5, 0.0);
        h.symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Hermitian normal part, symmetric anomalous part, non-negative
    /// occupations and a positive semidefinite covariance block.
    pub fn validate(&self) -> Result<()> {
        let herm = max_abs(&(&self.normal - self.normal.adjoint()));
        let sym = max_abs(&(&self.anomalous - self.anomalous.transpose()));
        let checks = [
            ("hermitian normal moments", herm, herm <= 1e-10),
            ("symmetric anomalous moments", sym, sym <= 1e-10),
        ];
        for (condition, worst, ok) in checks {
            if !ok {
                return Err(Error::Precondition {
                    condition,
                    worst,
                    location: "moment matrix".into(),
                });
            }
        }
        let margin = self.physicality_margin();
        if margin < -1e-10 {
            return Err(Error::Precondition {
                condition: "positive covariance block",
                worst: margin,
                location: "smallest eigenvalue".into(),
            });
        }
        Ok(())
    }
}

fn check_dims(map: &BogoliubovMap, state: &MomentState) -> Result<()> {
    if map.num_modes() != state.num_modes() {
        return Err(Error::ShapeMismatch(format!(
            "map on {} modes, state on {}",
            map.num_modes(),
            state.num_modes()
        )));
    }
    Ok(())
}

/// Exact moments of the output modes.
pub fn propagate_moments(map: &BogoliubovMap, state: &MomentState) -> Result<MomentState> {
    check_dims(map, state)?;
    let n = map.num_modes();
    let (s, r, f) = (&map.s, &map.r, &map.f);
    let (m, nn, aa) = (&state.first, &state.normal, &state.anomalous);
    let id = CMatrix::identity(n, n);
    let ipn = &id + nn.transpose();

    let mu = s * m + r * m.conjugate();
    let first = &mu + f;

    let sc = s.conjugate();
    let rc = r.conjugate();
    let mut normal = &sc * nn * s.transpose()
        + &sc * aa.conjugate() * r.transpose()
        + &rc * aa * s.transpose()
        + &rc * &ipn * r.transpose();
    let mut anomalous = s * aa * s.transpose()
        + s * &ipn * r.transpose()
        + r * nn * s.transpose()
        + r * aa.conjugate() * r.transpose();
    for i in 0..n {
        for j in 0..n {
            normal[(i, j)] += f[i].conj() * mu[j] + mu[i].conj() * f[j] + f[i].conj() * f[j];
            anomalous[(i, j)] += f[i] * mu[j] + mu[i] * f[j] + f[i] * f[j];
        }
    }
    MomentState::new(first, normal, anomalous)
}

/// Change of the total mean occupation obtained by full moment propagation,
/// without any precondition on the state.
pub fn delta_n_propagated(map: &BogoliubovMap, state: &MomentState) -> Result<f64> {
    Ok(propagate_moments(map, state)?.total_number() - state.total_number())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeltaNDecomposition {
    /// `sum_i |f_i|^2`
    pub f_term: f64,
    /// `sum_ij |R_ij|^2`
    pub r_term: f64,
    /// `2 sum_i (R N R^dagger)_ii`
    pub y_term: f64,
    pub total: f64,
    /// The same change computed by [`propagate_moments`].
    pub propagated: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagonalVerdict {
    pub ok: bool,
    /// Name of the worst failing condition, or of the largest checked entry.
    pub condition: &'static str,
    pub worst: f64,
    pub location: (usize, usize),
}

/// Checks `<a_i> = 0` and `<a_i a_j> = 0`, and with `entropy_grade` also
/// `<a_i^dagger a_j> = 0` for `i != j`.
pub fn is_generalized_diagonal(state: &MomentState, tol: f64, entropy_grade: bool) -> DiagonalVerdict {
    let n = state.num_modes();
    let mut worst = DiagonalVerdict {
        ok: true,
        condition: "vanishing first moments",
        worst: 0.0,
        location: (0, 0),
    };
    let mut consider = |condition, value: f64, location| {
        let failing = value > tol;
        if (failing && worst.ok) || (failing == !worst.ok && value > worst.worst) {
            worst = DiagonalVerdict {
                ok: !failing,
                condition,
                worst: value,
                location,
            };
        }
    };
    for i in 0..n {
        consider("vanishing first moments", state.first[i].norm(), (i, i));
    }
    for i in 0..n {
        for j in 0..n {
            consider("vanishing anomalous moments", state.anomalous[(i, j)].norm(), (i, j));
        }
    }
    if entropy_grade {
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    consider("diagonal normal moments", state.normal[(i, j)].norm(), (i, j));
                }
            }
        }
    }
    worst
}

pub(crate) fn require_diagonal(state: &MomentState, entropy_grade: bool) -> Result<()> {
    let v = is_generalized_diagonal(state, DIAGONAL_TOL, entropy_grade);
    if v.ok {
        Ok(())
    } else {
        Err(Error::Precondition {
            condition: v.condition,
            worst: v.worst,
            location: format!("{:?}", v.location),
        })
    }
}

/// Decomposition of the total occupation change for states with vanishing
/// first and anomalous moments. Each term is non-negative.
pub fn delta_total_number(map: &BogoliubovMap, state: &MomentState) -> Result<DeltaNDecomposition> {
    check_dims(map, state)?;
    require_diagonal(state, false)?;
    let f_term: f64 = map.f.iter().map(|z| z.norm_sqr()).sum();
    let r_term: f64 = map.r.iter().map(|z| z.norm_sqr()).sum();
    let rnr = &map.r * &state.normal * map.r.adjoint();
    let y_term = 2.0 * rnr.trace().re;
    Ok(DeltaNDecomposition {
        f_term,
        r_term,
        y_term,
        total: f_term + r_term + y_term,
        propagated: delta_n_propagated(map, state)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Dispersion {
    /// `<a^dagger a> + 1/2 - |<a>|^2`
    pub direct: f64,
    /// `<Delta x^2> + <Delta y^2>` with `a = x + i y`.
    pub quadrature: f64,
}

pub fn dispersion(state: &MomentState, mode: usize) -> Result<Dispersion> {
    if mode >= state.num_modes() {
        return Err(Error::ModeOutOfRange {
            mode,
            num_modes: state.num_modes(),
        });
    }
    let m = state.first[mode];
    let nn = state.normal[(mode, mode)].re;
    let aa = state.anomalous[(mode, mode)];
    let direct = nn + 0.5 - m.norm_sqr();
    // x = (a + a^dagger)/2, y = (a - a^dagger)/(2i)
    let x2 = 0.25 * (2.0 * aa.re + 2.0 * nn + 1.0);
    let y2 = 0.25 * (-2.0 * aa.re + 2.0 * nn + 1.0);
    let quadrature = x2 - m.re * m.re + y2 - m.im * m.im;
    Ok(Dispersion { direct, quadrature })
}

pub fn dispersion_sum(state: &MomentState) -> Result<f64> {
    (0..state.num_modes())
        .map(|i| dispersion(state, i).map(|d| d.direct))
        .sum()
}

/// `sum_i omega_i (<b_i^dagger b_i> - <a_i^dagger a_i>)`, in units of the
/// spec's frequencies. No sign is implied.
pub fn energy_change(map: &BogoliubovMap, state: &MomentState, spec: &ThermalSpec) -> Result<f64> {
    check_dims(map, state)?;
    if spec.num_modes() != map.num_modes() {
        return Err(Error::ShapeMismatch("spec and map disagree on modes".into()));
    }
    require_diagonal(state, false)?;
    let out = propagate_moments(map, state)?;
    Ok((0..map.num_modes())
        .map(|i| spec.omegas()[i] * (out.normal[(i, i)].re - state.normal[(i, i)].re))
        .sum())
}

/// Squeezing parameter of the dispersion counterexample.
pub const COUNTEREXAMPLE_SQUEEZE: f64 = 0.1;

/// A map with `f = 0` and a state with `<a> != 0`, `<a a> = 0` for which the
/// total occupation grows while the summed dispersion drops.
///
/// The state is the equal mixture of coherent states with amplitudes
/// `1 + i` and `1 - i`, so `<a> = 1`, `<a a> = 0`, `<a^dagger a> = 2`; the
/// map is a real single-mode squeezer.
pub fn dispersion_counterexample() -> (BogoliubovMap, MomentState) {
    let map = BogoliubovMap::single_mode_squeezers(&[COUNTEREXAMPLE_SQUEEZE], &[0.0]);
    let state = MomentState {
        first: CVector::from_element(1, C64::new(1.0, 0.0)),
        normal: CMatrix::from_element(1, 1, C64::new(2.0, 0.0)),
        anomalous: CMatrix::zeros(1, 1),
    };
    (map, state)
}

/// Matrix of the output mode `b_mode` on a truncated space. Exact on
/// vectors supported at least one level below every cutoff.
pub fn heisenberg_matrix(map: &BogoliubovMap, space: &FockSpace, mode: usize) -> Result<CMatrix> {
    if space.num_modes() != map.num_modes() {
        return Err(Error::ShapeMismatch("space and map disagree on modes".into()));
    }
    space.check_mode(mode)?;
    let d = space.dimension();
    let mut b = CMatrix::identity(d, d) * map.f[mode];
    for k in 0..map.num_modes() {
        let a = annihilation_matrix(space, k)?;
        b += &a * map.s[(mode, k)] + a.adjoint() * map.r[(mode, k)];
    }
    Ok(b)
}

/// Number variance `<(n)^2> - <n>^2` of a single mode before and after a
/// single-mode map, for the diagonal input with the given populations.
///
/// The computation runs on a Fock space four levels above the support of
/// the populations, where all fourth-order products are exact.
pub fn number_variance_pair(map: &BogoliubovMap, populations: &[f64]) -> Result<(f64, f64)> {
    if map.num_modes() != 1 {
        return Err(Error::ShapeMismatch("number variance needs a single mode".into()));
    }
    if populations.is_empty() {
        return Err(Error::Empty("populations"));
    }
    let total: f64 = populations.iter().sum();
    let p: Vec<f64> = populations.iter().map(|x| x / total).collect();
    let cutoff = p.len() - 1 + 4;
    let space = FockSpace::new(&[cutoff])?;
    let b = heisenberg_matrix(map, &space, 0)?;
    let nb = b.adjoint() * &b;
    let nb2 = &nb * &nb;
    let mean = |op: &CMatrix| -> f64 { p.iter().enumerate().map(|(k, w)| w * op[(k, k)].re).sum() };
    let before_mean: f64 = p.iter().enumerate().map(|(k, w)| w * k as f64).sum();
    let before_sq: f64 = p.iter().enumerate().map(|(k, w)| w * (k * k) as f64).sum();
    let after_mean = mean(&nb);
    let after_sq = mean(&nb2);
    Ok((
        before_sq - before_mean * before_mean,
        after_sq - after_mean * after_mean,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn identity_residuals_vanish() {
        let res = validate_symplectic(&BogoliubovMap::identity(3)).unwrap();
        assert_eq!(res.max(), 0.0);
        assert!(res.accepted());
    }

    #[test]
    fn two_mode_squeezer_is_canonical() {
        let res = validate_symplectic(&BogoliubovMap::two_mode_squeezer(0.7)).unwrap();
        assert!(res.max() <= 1e-12);
    }

    #[test]
    fn doubled_identity_is_rejected() {
        let mut m = BogoliubovMap::identity(2);
        m.s *= C64::new(2.0, 0.0);
        let res = validate_symplectic(&m).unwrap();
        assert_abs_diff_eq!(res.ss_rr, 3.0, epsilon = 1e-15);
        assert!(!res.accepted());
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let r = BogoliubovMap::new(CMatrix::identity(2, 2), CMatrix::zeros(3, 3), CVector::zeros(2));
        assert!(matches!(r, Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn passive_budget_gives_unitary() {
        let m = random_bogoliubov(3, 0.0, 0.0, 7).unwrap();
        assert_eq!(max_abs(&m.r), 0.0);
        assert_eq!(m.f.iter().map(|z| z.norm()).sum::<f64>(), 0.0);
        let id = CMatrix::identity(3, 3);
        assert!(max_abs(&(&m.s * m.s.adjoint() - id)) < 1e-13);
    }

    #[test]
    fn single_mode_squeezer_unit_determinant() {
        let m = BogoliubovMap::single_mode_squeezers(&[0.9], &[1.3]);
        assert_abs_diff_eq!(m.s[(0, 0)].norm_sqr() - m.r[(0, 0)].norm_sqr(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn squeezed_vacuum_occupation() {
        let r = 0.8_f64;
        let m = BogoliubovMap::single_mode_squeezers(&[r], &[0.4]);
        let out = propagate_moments(&m, &MomentState::vacuum(1)).unwrap();
        assert_abs_diff_eq!(out.normal[(0, 0)].re, r.sinh().powi(2), epsilon = 1e-14);
    }

    #[test]
    fn decomposition_single_mode_example() {
        // |R|^2 = 1, |f|^2 = 0.5, n = 2
        let r = 1f64.asinh();
        let mut m = BogoliubovMap::single_mode_squeezers(&[r], &[0.0]);
        m.f[0] = C64::new(0.5f64.sqrt(), 0.0);
        let d = delta_total_number(&m, &MomentState::diagonal(&[2.0])).unwrap();
        assert_abs_diff_eq!(d.total, 5.5, epsilon = 1e-13);
        assert_abs_diff_eq!(d.propagated, 5.5, epsilon = 1e-13);
        assert_abs_diff_eq!(d.y_term, 4.0, epsilon = 1e-13);
    }

    #[test]
    fn decomposition_rejects_displaced_state() {
        let mut st = MomentState::diagonal(&[1.0]);
        st.first[0] = C64::new(0.3, 0.0);
        st.normal[(0, 0)] += C64::new(0.09, 0.0);
        let err = delta_total_number(&BogoliubovMap::identity(1), &st).unwrap_err();
        assert!(matches!(err, Error::Precondition { condition: "vanishing first moments", .. }));
    }

    #[test]
    fn dispersion_examples() {
        let v = dispersion(&MomentState::vacuum(1), 0).unwrap();
        assert_abs_diff_eq!(v.direct, 0.5);
        assert_abs_diff_eq!(v.quadrature, 0.5, epsilon = 1e-15);
        let t = dispersion(&MomentState::diagonal(&[1.7]), 0).unwrap();
        assert_abs_diff_eq!(t.direct, 2.2, epsilon = 1e-15);
        let alpha = C64::new(0.6, -1.1);
        let coh = MomentState {
            first: CVector::from_element(1, alpha),
            normal: CMatrix::from_element(1, 1, C64::new(alpha.norm_sqr(), 0.0)),
            anomalous: CMatrix::from_element(1, 1, alpha * alpha),
        };
        let c = dispersion(&coh, 0).unwrap();
        assert_abs_diff_eq!(c.direct, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(c.quadrature, 0.5, epsilon = 1e-14);
    }

    #[test]
    fn swap_energy_change_has_both_signs() {
        let z = C64::new(0.0, 0.0);
        let o = C64::new(1.0, 0.0);
        let swap = BogoliubovMap::passive(CMatrix::from_row_slice(2, 2, &[z, o, o, z])).unwrap();
        let spec = ThermalSpec::new(&[2.0, 1.0], 1.0).unwrap();
        let up = energy_change(&swap, &MomentState::diagonal(&[0.1, 0.9]), &spec).unwrap();
        let down = energy_change(&swap, &MomentState::diagonal(&[0.9, 0.1]), &spec).unwrap();
        assert_abs_diff_eq!(up, 0.8, epsilon = 1e-14);
        assert_abs_diff_eq!(down, -0.8, epsilon = 1e-14);
        let dn = delta_total_number(&swap, &MomentState::diagonal(&[0.9, 0.1])).unwrap();
        assert_abs_diff_eq!(dn.total, 0.0);
    }

    #[test]
    fn squeezing_vacuum_costs_energy() {
        let m = BogoliubovMap::single_mode_squeezers(&[0.3], &[0.0]);
        let spec = ThermalSpec::new(&[1.0], 1.0).unwrap();
        assert!(energy_change(&m, &MomentState::vacuum(1), &spec).unwrap() > 0.0);
    }

    #[test]
    fn diagonal_verdicts() {
        let spec = ThermalSpec::new(&[1.0, 0.5], 2.0).unwrap();
        assert!(is_generalized_diagonal(&MomentState::thermal(&spec), 1e-12, true).ok);

        let mut coh = MomentState::vacuum(1);
        coh.first[0] = C64::new(0.3, 0.0);
        let v = is_generalized_diagonal(&coh, 1e-12, false);
        assert!(!v.ok);
        assert_abs_diff_eq!(v.worst, 0.3);

        let sq = propagate_moments(
            &BogoliubovMap::single_mode_squeezers(&[0.4], &[0.0]),
            &MomentState::vacuum(1),
        )
        .unwrap();
        let v = is_generalized_diagonal(&sq, 1e-12, false);
        assert!(!v.ok);
        assert_eq!(v.condition, "vanishing anomalous moments");
        assert!(sq.first.iter().all(|z| z.norm() <= 1e-12));
    }

    #[test]
    fn counterexample_grows_number_but_drops_dispersion() {
        let (map, state) = dispersion_counterexample();
        state.validate().unwrap();
        let out = propagate_moments(&map, &state).unwrap();
        let dn = out.total_number() - state.total_number();
        let dd = dispersion_sum(&out).unwrap() - dispersion_sum(&state).unwrap();
        let r = COUNTEREXAMPLE_SQUEEZE;
        assert_abs_diff_eq!(dn, 5.0 * r.sinh().powi(2), epsilon = 1e-14);
        assert!(dn >= 0.0);
        assert!(dd < 0.0);
        assert_abs_diff_eq!(dd, dn - (2.0 * r).exp_m1(), epsilon = 1e-14);
    }

    #[test]
    fn composition_matches_sequential_propagation() {
        let a = random_bogoliubov(2, 0.7, 0.5, 1).unwrap();
        let b = random_bogoliubov(2, 0.7, 0.5, 2).unwrap();
        let st = MomentState::diagonal(&[0.3, 1.2]);
        let seq = propagate_moments(&b, &propagate_moments(&a, &st).unwrap()).unwrap();
        let once = propagate_moments(&b.after(&a).unwrap(), &st).unwrap();
        assert!(max_abs(&(&seq.normal - &once.normal)) < 1e-12);
        assert!(max_abs(&(&seq.anomalous - &once.anomalous)) < 1e-12);
    }
}
