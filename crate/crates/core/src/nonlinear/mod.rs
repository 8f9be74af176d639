//! Three-wave mixing between two modes,
//! `H = omega1 n1 + omega2 n2 + g H_I` with
//! `H_I = x1 x2^2 + x1^2 x2`, `x_k = a_k + a_k^dagger`,
//! or its rotating-wave reduction `a1 a2^dagger^2 + a1^dagger a2^2`.
//!
//! Operators are kept as sums of ladder words acting on Fock basis
//! states, so truncated matrices are built only where needed.

pub mod enumerate;
pub mod evolve;
pub mod hamiltonian;
pub mod perturbative;

use crate::fock::ThermalSpec;
use crate::{Error, Result};
use serde::Serialize;

pub use enumerate::{enumerate_second_order_terms, EnumeratedTerm, Enumeration};
pub use evolve::{exact_evolve, manley_rowe_residual, ExactReport, InvariantResidual};
pub use hamiltonian::build_hamiltonian;
pub use perturbative::{
    perturbative_delta_n, phi_kernel, resonance_scan, rwa_delta_n, CoefficientSet, ModeChanges,
    ResonanceRow, ResonanceScan,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// `x1 x2^2 + x1^2 x2`
    Full,
    /// `a1 a2^dagger^2 + a1^dagger a2^2`, resonant near `omega1 = 2 omega2`.
    Rwa,
    /// `a2 a1^dagger^2 + a2^dagger a1^2`, resonant near `omega2 = 2 omega1`.
    RwaMirrored,
}

impl Variant {
    /// Weights `(w1, w2)` of the invariant `w1 n1 + w2 n2` conserved by the
    /// rotating-wave interactions.
    pub fn invariant_weights(&self) -> (f64, f64) {
        match self {
            Variant::Full | Variant::Rwa => (2.0, 1.0),
            Variant::RwaMirrored => (1.0, 2.0),
        }
    }

    pub fn interaction(&self) -> Polynomial {
        match self {
            Variant::Full => full_interaction(),
            Variant::Rwa => Polynomial(vec![
                (1.0, Word::parse("a1 a2+ a2+")),
                (1.0, Word::parse("a1+ a2 a2")),
            ]),
            Variant::RwaMirrored => Polynomial(vec![
                (1.0, Word::parse("a2 a1+ a1+")),
                (1.0, Word::parse("a2+ a1 a1")),
            ]),
        }
    }
}

/// Physical parameters of one nonlinear run. `spec` keeps its mode
/// order, so `alpha = omega2 / omega1` may exceed one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NonlinearConfig {
    pub spec: ThermalSpec,
    pub g: f64,
    pub t: f64,
    pub variant: Variant,
}

/// Magnitude estimate above which second-order results carry a warning.
pub const VALIDITY_THRESHOLD: f64 = 0.3;

impl NonlinearConfig {
    pub fn new(spec: ThermalSpec, g: f64, t: f64, variant: Variant) -> Result<Self> {
        if spec.num_modes() != 2 {
            return Err(Error::ShapeMismatch("nonlinear runs need two modes".into()));
        }
        if !(g >= 0.0 && g.is_finite()) {
            return Err(Error::Domain { what: "coupling", value: g });
        }
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::Domain { what: "time", value: t });
        }
        Ok(Self { spec, g, t, variant })
    }

    /// Config in rescaled units (`beta = 1`).
    pub fn rescaled(omega1: f64, omega2: f64, g: f64, t: f64, variant: Variant) -> Result<Self> {
        Self::new(ThermalSpec::two_mode_ordered(omega1, omega2, 1.0)?, g, t, variant)
    }

    pub fn omega1(&self) -> f64 {
        self.spec.omegas()[0]
    }

    pub fn omega2(&self) -> f64 {
        self.spec.omegas()[1]
    }

    /// `(beta omega1, beta omega2, beta g, t / beta)`.
    pub fn dimensionless(&self) -> (f64, f64, f64, f64) {
        let b = self.spec.beta();
        (b * self.omega1(), b * self.omega2(), b * self.g, self.t / b)
    }

    /// Smallest detuning controlling the perturbative expansion.
    pub fn detuning(&self) -> f64 {
        let (w1, w2) = (self.omega1(), self.omega2());
        match self.variant {
            Variant::Full => w1
                .min(w2)
                .min((2.0 * w1 - w2).abs())
                .min((2.0 * w2 - w1).abs()),
            Variant::Rwa => (2.0 * w2 - w1).abs(),
            Variant::RwaMirrored => (2.0 * w1 - w2).abs(),
        }
    }

    /// `g |sin(Omega t / 2)| / Omega`, tending to `g t / 2` on resonance.
    pub fn validity_estimate(&self) -> f64 {
        let om = self.detuning();
        let x = 0.5 * om * self.t;
        if x.abs() < 1e-8 {
            self.g * self.t / 2.0
        } else {
            self.g * (x.sin() / om).abs()
        }
    }

    pub fn validity_warning(&self) -> Option<String> {
        let v = self.validity_estimate();
        (v > VALIDITY_THRESHOLD).then(|| format!("second-order magnitude estimate {v:.3} exceeds {VALIDITY_THRESHOLD}"))
    }
}

/// A single ladder operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Ladder {
    pub mode: usize,
    pub dagger: bool,
}

/// Product of ladder operators in written order; the rightmost acts first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Word(pub Vec<Ladder>);

impl Word {
    /// Parses whitespace separated tokens `a1`, `a2+` (creation), ...
    pub fn parse(s: &str) -> Self {
        Word(
            s.split_whitespace()
                .map(|tok| {
                    let dagger = tok.ends_with('+');
                    let digits = tok.trim_start_matches('a').trim_end_matches('+');
                    let mode: usize = digits.parse().expect("mode index");
                    Ladder {
                        mode: mode - 1,
                        dagger,
                    }
                })
                .collect(),
        )
    }

    pub fn adjoint(&self) -> Self {
        Word(
            self.0
                .iter()
                .rev()
                .map(|l| Ladder {
                    mode: l.mode,
                    dagger: !l.dagger,
                })
                .collect(),
        )
    }

    pub fn concat(&self, other: &Word) -> Self {
        Word(self.0.iter().chain(&other.0).copied().collect())
    }

    /// Net change of each mode's occupation.
    pub fn shift(&self, num_modes: usize) -> Vec<i64> {
        let mut s = vec![0i64; num_modes];
        for l in &self.0 {
            s[l.mode] += if l.dagger { 1 } else { -1 };
        }
        s
    }

    /// Applies the word to `|occ>` in the space with the given inclusive
    /// cutoffs. Returns `None` when the result vanishes or leaves the space.
    pub fn apply(&self, occ: &[usize], cutoffs: &[usize]) -> Option<(f64, Vec<usize>)> {
        let mut state = occ.to_vec();
        let mut coeff = 1.0;
        for l in self.0.iter().rev() {
            let n = state[l.mode];
            if l.dagger {
                if n + 1 > cutoffs[l.mode] {
                    return None;
                }
                coeff *= ((n + 1) as f64).sqrt();
                state[l.mode] = n + 1;
            } else {
                if n == 0 {
                    return None;
                }
                coeff *= (n as f64).sqrt();
                state[l.mode] = n - 1;
            }
        }
        Some((coeff, state))
    }

    pub fn label(&self) -> String {
        let mut out = String::new();
        let mut i = 0;
        while i < self.0.len() {
            let l = self.0[i];
            let mut run = 1;
            while i + run < self.0.len() && self.0[i + run] == l {
                run += 1;
            }
            if !out.is_empty() {
                out.push(' ');
            }
            out.push_str(&format!("a{}", l.mode + 1));
            if l.dagger {
                out.push('\u{2020}');
            }
            if run > 1 {
                out.push_str(&format!("^{run}"));
            }
            i += run;
        }
        if out.is_empty() {
            out.push('1');
        }
        out
    }
}

/// Real linear combination of words.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Polynomial(pub Vec<(f64, Word)>);

impl Polynomial {
    pub fn terms(&self) -> &[(f64, Word)] {
        &self.0
    }

    pub fn add(mut self, other: Polynomial) -> Self {
        self.0.extend(other.0);
        self
    }
}

/// `x1 x2 x2 + x1 x1 x2` expanded into its sixteen ordered words.
fn full_interaction() -> Polynomial {
    let x = |mode: usize| [Ladder { mode, dagger: false }, Ladder { mode, dagger: true }];
    let mut terms = Vec::with_capacity(16);
    for modes in [[0usize, 1, 1], [0, 0, 1]] {
        for a in x(modes[0]) {
            for b in x(modes[1]) {
                for c in x(modes[2]) {
                    terms.push((1.0, Word(vec![a, b, c])));
                }
            }
        }
    }
    Polynomial(terms)
}

/// The eight cubic monomials of the interaction and their free-evolution
/// frequencies: `h_i(s) = h_i exp(-i W_i s)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonomialTable {
    pub monomials: Vec<Word>,
    pub frequencies: Vec<f64>,
}

const MONOMIAL_WORDS: [&str; 8] = [
    "a1 a2 a2",
    "a1+ a2 a2",
    "a1 a2+ a2+",
    "a1+ a2+ a2+",
    "a1 a1 a2",
    "a1+ a1+ a2",
    "a1 a1 a2+",
    "a1+ a1+ a2+",
];

impl MonomialTable {
    pub fn new(omega1: f64, omega2: f64) -> Self {
        let monomials: Vec<Word> = MONOMIAL_WORDS.iter().map(|s| Word::parse(s)).collect();
        let frequencies = monomials
            .iter()
            .map(|w| {
                let s = w.shift(2);
                -(s[0] as f64 * omega1 + s[1] as f64 * omega2)
            })
            .collect();
        Self {
            monomials,
            frequencies,
        }
    }

    pub fn as_polynomial(&self) -> Polynomial {
        Polynomial(self.monomials.iter().map(|w| (1.0, w.clone())).collect())
    }

    /// Part of `H_I` not covered by the eight monomials:
    /// `x1 (2 n2 + 1) + (2 n1 + 1) x2`.
    pub fn linear_remainder() -> Polynomial {
        let words = [
            (2.0, "a1 a2+ a2"),
            (1.0, "a1"),
            (2.0, "a1+ a2+ a2"),
            (1.0, "a1+"),
            (2.0, "a1+ a1 a2"),
            (1.0, "a2"),
            (2.0, "a1+ a1 a2+"),
            (1.0, "a2+"),
        ];
        Polynomial(words.iter().map(|(c, w)| (*c, Word::parse(w))).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn word_application() {
        let w = Word::parse("a1 a2+ a2+");
        let (c, s) = w.apply(&[2, 1], &[5, 5]).unwrap();
        assert_eq!(s, vec![1, 3]);
        assert!((c - (2f64 * 2.0 * 3.0).sqrt()).abs() < 1e-15);
        assert!(w.apply(&[0, 1], &[5, 5]).is_none());
        assert!(w.apply(&[1, 4], &[5, 5]).is_none());
    }

    #[test]
    fn adjoint_and_label() {
        let w = Word::parse("a1 a2 a2");
        assert_eq!(w.adjoint(), Word::parse("a2+ a2+ a1+"));
        assert_eq!(w.label(), "a1 a2^2");
        assert_eq!(w.adjoint().label(), "a2\u{2020}^2 a1\u{2020}");
    }

    #[test]
    fn monomial_frequencies() {
        let t = MonomialTable::new(1.0, 0.3);
        let expect = [1.6, -0.4, 0.4, -1.6, 2.3, -1.7, 1.7, -2.3];
        for (w, e) in t.frequencies.iter().zip(expect) {
            assert!((w - e).abs() < 1e-15);
        }
    }

    #[test]
    fn validity_estimate_limits() {
        let c = NonlinearConfig::rescaled(1.0, 0.5, 0.1, 4.0, Variant::Rwa).unwrap();
        assert!((c.validity_estimate() - 0.2).abs() < 1e-15);
        let c = NonlinearConfig::rescaled(1.0, 0.5, 1.0, 4.0, Variant::Rwa).unwrap();
        assert!(c.validity_warning().is_some());
    }
}
