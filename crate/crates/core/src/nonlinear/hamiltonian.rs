//! Matrix forms of the nonlinear Hamiltonians on truncated two-mode spaces.

use super::{NonlinearConfig, Polynomial};
use crate::fock::FockSpace;
use crate::{CMatrix, Error, Result, C64};
use std::collections::HashMap;

/// Sparse real matrix as `(row, col) -> value`.
pub type Triplets = HashMap<(usize, usize), f64>;

/// Truncated matrix of a word polynomial: each word acts as the product of
/// the truncated ladder matrices.
pub fn polynomial_triplets(poly: &Polynomial, space: &FockSpace) -> Triplets {
    let mut out = Triplets::new();
    for j in 0..space.dimension() {
        let occ = space.occupations(j);
        for (c, w) in poly.terms() {
            if let Some((v, to)) = w.apply(&occ, space.cutoffs()) {
                *out.entry((space.index(&to), j)).or_insert(0.0) += c * v;
            }
        }
    }
    out.retain(|_, v| *v != 0.0);
    out
}

/// `H0 + g H_I` as triplets, in the config's physical units.
pub fn hamiltonian_triplets(config: &NonlinearConfig, space: &FockSpace) -> Result<Triplets> {
    if space.num_modes() != 2 {
        return Err(Error::ShapeMismatch("nonlinear runs need two modes".into()));
    }
    let mut h: Triplets = polynomial_triplets(&config.variant.interaction(), space)
        .into_iter()
        .map(|(k, v)| (k, config.g * v))
        .collect();
    let (w1, w2) = (config.omega1(), config.omega2());
    for i in 0..space.dimension() {
        let occ = space.occupations(i);
        *h.entry((i, i)).or_insert(0.0) += w1 * occ[0] as f64 + w2 * occ[1] as f64;
    }
    Ok(h)
}

/// Dense Hermitian `H0 + g H_I` (or the rotating-wave interaction).
pub fn build_hamiltonian(config: &NonlinearConfig, space: &FockSpace) -> Result<CMatrix> {
    space.check_dense()?;
    let d = space.dimension();
    let mut m = CMatrix::zeros(d, d);
    for ((i, j), v) in hamiltonian_triplets(config, space)? {
        m[(i, j)] += C64::new(v, 0.0);
    }
    Ok(m)
}

/// Connected components of the sparsity graph, each sorted ascending.
pub fn components(dimension: usize, triplets: &Triplets) -> Vec<Vec<usize>> {
    let mut parent: Vec<usize> = (0..dimension).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for &(i, j) in triplets.keys() {
        let (a, b) = (find(&mut parent, i), find(&mut parent, j));
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut groups: HashMap<usize, Vec<usize>> = HashMap::new();
    for i in 0..dimension {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    let mut out: Vec<Vec<usize>> = groups.into_values().collect();
    out.sort_by_key(|g| g[0]);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{annihilation_matrix, FockSpace};
    use crate::max_abs;
    use crate::nonlinear::{MonomialTable, Variant};

    fn x(space: &FockSpace, mode: usize) -> CMatrix {
        let a = annihilation_matrix(space, mode).unwrap();
        &a + a.adjoint()
    }

    #[test]
    fn zero_coupling_is_diagonal() {
        let space = FockSpace::new(&[3, 4]).unwrap();
        let c = NonlinearConfig::rescaled(0.9, 0.4, 0.0, 1.0, Variant::Full).unwrap();
        let h = build_hamiltonian(&c, &space).unwrap();
        for i in 0..space.dimension() {
            let o = space.occupations(i);
            assert!((h[(i, i)].re - 0.9 * o[0] as f64 - 0.4 * o[1] as f64).abs() < 1e-15);
        }
        assert_eq!(max_abs(&(h.clone() - CMatrix::from_diagonal(&h.diagonal()))), 0.0);
    }

    #[test]
    fn rwa_matrix_element() {
        let space = FockSpace::new(&[5, 6]).unwrap();
        let c = NonlinearConfig::rescaled(1.0, 0.5, 1.0, 1.0, Variant::Rwa).unwrap();
        let h = build_hamiltonian(&c, &space).unwrap();
        let (n1, n2) = (2usize, 3usize);
        let v = h[(space.index(&[n1 + 1, n2 - 2]), space.index(&[n1, n2]))].re;
        let expect = ((n1 + 1) as f64).sqrt() * ((n2 * (n2 - 1)) as f64).sqrt();
        assert!((v - expect).abs() < 1e-14);
    }

    #[test]
    fn full_interaction_matches_matrix_products() {
        let space = FockSpace::new(&[5, 6]).unwrap();
        let c = NonlinearConfig::rescaled(0.0 + 1.0, 0.5, 1.0, 1.0, Variant::Full).unwrap();
        let h = build_hamiltonian(&c, &space).unwrap();
        let (x1, x2) = (x(&space, 0), x(&space, 1));
        let hi = &x1 * &x2 * &x2 + &x1 * &x1 * &x2;
        let h0 = build_hamiltonian(
            &NonlinearConfig::rescaled(1.0, 0.5, 0.0, 1.0, Variant::Full).unwrap(),
            &space,
        )
        .unwrap();
        assert!(max_abs(&(h.clone() - h0 - hi)) < 1e-12);
        assert!(max_abs(&(h.clone() - h.adjoint())) < 1e-12);
    }

    #[test]
    fn monomials_plus_remainder_rebuild_interaction_in_interior() {
        let space = FockSpace::new(&[6, 6]).unwrap();
        let full = polynomial_triplets(&Variant::Full.interaction(), &space);
        let pieces = polynomial_triplets(
            &MonomialTable::new(1.0, 0.5)
                .as_polynomial()
                .add(MonomialTable::linear_remainder()),
            &space,
        );
        let monomials_only = polynomial_triplets(&MonomialTable::new(1.0, 0.5).as_polynomial(), &space);
        let interior = |i: usize| space.occupations(i).iter().all(|&n| n + 3 <= 6);
        let mut worst: f64 = 0.0;
        let mut missing: f64 = 0.0;
        for j in (0..space.dimension()).filter(|&j| interior(j)) {
            for i in 0..space.dimension() {
                let a = full.get(&(i, j)).copied().unwrap_or(0.0);
                let b = pieces.get(&(i, j)).copied().unwrap_or(0.0);
                let m = monomials_only.get(&(i, j)).copied().unwrap_or(0.0);
                worst = worst.max((a - b).abs());
                missing = missing.max((a - m).abs());
            }
        }
        assert!(worst < 1e-12);
        assert!(missing > 0.5);
    }

    #[test]
    fn rwa_components_follow_invariant() {
        let space = FockSpace::new(&[4, 8]).unwrap();
        let c = NonlinearConfig::rescaled(1.0, 0.5, 1.0, 1.0, Variant::Rwa).unwrap();
        let t = hamiltonian_triplets(&c, &space).unwrap();
        for comp in components(space.dimension(), &t) {
            let q: Vec<usize> = comp
                .iter()
                .map(|&i| {
                    let o = space.occupations(i);
                    2 * o[0] + o[1]
                })
                .collect();
            assert!(q.iter().all(|&x| x == q[0]));
        }
        let full = NonlinearConfig::rescaled(1.0, 0.5, 1.0, 1.0, Variant::Full).unwrap();
        let t = hamiltonian_triplets(&full, &space).unwrap();
        assert_eq!(components(space.dimension(), &t).len(), 1);
    }
}
