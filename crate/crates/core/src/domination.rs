//! Heat semigroups of finite forms and the two sides of the domination
//! criterion: entrywise kernel comparison and the order-ideal/positivity
//! test on coefficients.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{FormError, Result};
use crate::form::QuadForm;
use crate::random;
use crate::tol;

/// Times used by the randomized equivalence test.
pub const EQUIVALENCE_TIMES: [f64; 3] = [0.05, 0.5, 2.0];

/// Eigendecomposition of the operator of a form, symmetrized with respect
/// to the measure: `S = M^{-1/2} C M^{-1/2}` on the support.
#[derive(Debug, Clone)]
pub struct Spectral {
    n: usize,
    support: Vec<usize>,
    sqrt_mass: Vec<f64>,
    values: Vec<f64>,
    vectors: DMatrix<f64>,
}

impl Spectral {
    pub fn new(q: &QuadForm) -> Self {
        let support = q.support().to_vec();
        let mass = q.space().mass();
        let sqrt_mass: Vec<f64> = support.iter().map(|&x| mass[x].sqrt()).collect();
        let k = support.len();
        let c = q.coeff();
        let s = DMatrix::from_fn(k, k, |a, b| {
            let (x, y) = (support[a], support[b]);
            0.5 * (c[(x, y)] + c[(y, x)]) / (sqrt_mass[a] * sqrt_mass[b])
        });
        let eig = SymmetricEigen::new(s);
        Self {
            n: q.len(),
            support,
            sqrt_mass,
            values: eig.eigenvalues.iter().copied().collect(),
            vectors: eig.eigenvectors,
        }
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut v = self.values.clone();
        v.sort_by(f64::total_cmp);
        v
    }

    /// `e^{-tL}` on `support × support`, zero elsewhere.
    pub fn semigroup(&self, t: f64) -> Result<DMatrix<f64>> {
        if t.is_nan() || t < 0.0 {
            return Err(FormError::NegativeTime(t));
        }
        let mut out = DMatrix::zeros(self.n, self.n);
        if t == 0.0 {
            for &x in &self.support {
                out[(x, x)] = 1.0;
            }
            return Ok(out);
        }
        let k = self.support.len();
        let decay: Vec<f64> = self.values.iter().map(|l| (-t * l).exp()).collect();
        // rows of V scaled by the decay factors
        let weighted = DMatrix::from_fn(k, k, |a, j| self.vectors[(a, j)] * decay[j]);
        let kernel = &weighted * self.vectors.transpose();
        for a in 0..k {
            for b in 0..k {
                out[(self.support[a], self.support[b])] =
                    kernel[(a, b)] * self.sqrt_mass[b] / self.sqrt_mass[a];
            }
        }
        Ok(out)
    }
}

/// `e^{-tL}` of the operator associated with `q`, padded with zeros off the
/// support.
pub fn semigroup(q: &QuadForm, t: f64) -> Result<DMatrix<f64>> {
    Spectral::new(q).semigroup(t)
}

/// Ascending eigenvalues of the operator associated with `q` on its
/// support.
pub fn spectrum(q: &QuadForm) -> Vec<f64> {
    Spectral::new(q).eigenvalues()
}

/// Outcome of the entrywise kernel comparison `e^{-tL} ≤ e^{-tL'}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SemigroupCheck {
    pub holds: bool,
    /// Largest entry of `e^{-tL} − e^{-tL'}` over all listed times.
    pub max_violation: f64,
    /// First entry `(t, x, y)` whose violation exceeds the tolerance.
    pub witness: Option<(f64, usize, usize)>,
    /// Entries with a positive violation that is within tolerance.
    pub ties: usize,
}

/// Compares precomputed kernels `lower[i] ≤ upper[i]` entrywise.
pub fn compare_kernels(
    times: &[f64],
    lower: &[DMatrix<f64>],
    upper: &[DMatrix<f64>],
    tol: f64,
) -> SemigroupCheck {
    let mut check = SemigroupCheck {
        holds: true,
        max_violation: f64::NEG_INFINITY,
        witness: None,
        ties: 0,
    };
    for ((&t, p), p2) in times.iter().zip(lower).zip(upper) {
        for x in 0..p.nrows() {
            for y in 0..p.ncols() {
                let v = p[(x, y)] - p2[(x, y)];
                check.max_violation = check.max_violation.max(v);
                if v > tol {
                    check.holds = false;
                    check.witness.get_or_insert((t, x, y));
                } else if v > 0.0 {
                    check.ties += 1;
                }
            }
        }
    }
    check
}

fn check_times(times: &[f64]) -> Result<()> {
    match times.iter().find(|t| t.is_nan() || **t < 0.0) {
        Some(&t) => Err(FormError::NegativeTime(t)),
        None => Ok(()),
    }
}

/// Semigroup side of the domination criterion: `e^{-tL_q} ≤ e^{-tL_q2}`
/// entrywise at every listed time.
pub fn dominates_semigroup(
    q: &QuadForm,
    q2: &QuadForm,
    times: &[f64],
    tol: f64,
) -> Result<SemigroupCheck> {
    if !q.same_space(q2) {
        return Err(FormError::SpaceMismatch);
    }
    check_times(times)?;
    let (s, s2) = (Spectral::new(q), Spectral::new(q2));
    let lower = times
        .iter()
        .map(|&t| s.semigroup(t))
        .collect::<Result<Vec<_>>>()?;
    let upper = times
        .iter()
        .map(|&t| s2.semigroup(t))
        .collect::<Result<Vec<_>>>()?;
    Ok(compare_kernels(times, &lower, &upper, tol))
}

/// Form side of the domination criterion.
#[derive(Debug, Clone, PartialEq)]
pub struct FormCheck {
    /// The domain of `q` is an order ideal in that of `q2` (support inclusion).
    pub order_ideal_ok: bool,
    /// `q(f, g) ≥ q2(f, g)` for nonnegative `f`, `g` in the domain of `q`.
    pub positivity_ok: bool,
    pub witness: Option<(usize, usize)>,
    /// Largest entry of `coeff_q2 − coeff_q` on the common support.
    pub max_violation: f64,
}

impl FormCheck {
    pub fn holds(&self) -> bool {
        self.order_ideal_ok && self.positivity_ok
    }
}

/// Coefficient-level domination test. Nonnegative functions are generated
/// by node indicators, so positivity of the difference reduces to
/// entrywise nonnegativity on the support of `q`.
pub fn dominates_form(q: &QuadForm, q2: &QuadForm) -> Result<FormCheck> {
    if !q.same_space(q2) {
        return Err(FormError::SpaceMismatch);
    }
    let outside = q.support().difference(q2.support());
    let order_ideal_ok = outside.is_empty();
    let mut witness = outside.iter().next().map(|x| (x, x));
    let common = q.support().intersection(q2.support());
    let eps = tol::COEFF * q.scale().max(q2.scale()).max(1.0);
    let mut max_violation = f64::NEG_INFINITY;
    let mut positivity_ok = true;
    for x in common.iter() {
        for y in common.iter() {
            let v = q2.coeff()[(x, y)] - q.coeff()[(x, y)];
            max_violation = max_violation.max(v);
            if v > eps {
                positivity_ok = false;
                witness.get_or_insert((x, y));
            }
        }
    }
    Ok(FormCheck {
        order_ideal_ok,
        positivity_ok,
        witness,
        max_violation,
    })
}

/// Both sides of the domination criterion for `q ⪯ q2`.
#[derive(Debug, Clone, PartialEq)]
pub struct DominationReport {
    pub semigroup: SemigroupCheck,
    pub form: FormCheck,
}

impl DominationReport {
    pub fn semigroup_verdict(&self) -> bool {
        self.semigroup.holds
    }

    pub fn form_verdict(&self) -> bool {
        self.form.holds()
    }

    pub fn agree(&self) -> bool {
        self.semigroup_verdict() == self.form_verdict()
    }
}

pub fn dominates(q: &QuadForm, q2: &QuadForm, times: &[f64], tol: f64) -> Result<DominationReport> {
    Ok(DominationReport {
        semigroup: dominates_semigroup(q, q2, times, tol)?,
        form: dominates_form(q, q2)?,
    })
}

/// One randomized trial where the two criteria disagreed.
#[derive(Debug, Clone)]
pub struct Disagreement {
    pub trial: usize,
    pub q: QuadForm,
    pub q2: QuadForm,
    pub report: DominationReport,
}

#[derive(Debug, Clone, Default)]
pub struct EquivalenceReport {
    pub trials: usize,
    /// Trials in which both criteria found domination.
    pub dominating: usize,
    pub disagreements: Vec<Disagreement>,
}

/// Randomized check that the kernel and coefficient criteria agree on
/// pairs of Markovian forms with at most six nodes.
pub fn ouhabaz_equivalence_test(seed: u64, trials: usize) -> Result<EquivalenceReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = EquivalenceReport {
        trials,
        ..Default::default()
    };
    for trial in 0..trials {
        let (q, q2) = random::domination_pair(&mut rng, 6);
        let r = dominates(&q, &q2, &EQUIVALENCE_TIMES, tol::SEMIGROUP)?;
        if r.semigroup_verdict() && r.form_verdict() {
            report.dominating += 1;
        }
        if !r.agree() {
            report.disagreements.push(Disagreement {
                trial,
                q,
                q2,
                report: r,
            });
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::form::GraphForm;
    use crate::nodeset::NodeSet;
    use crate::space::MeasureSpace;
    use approx::assert_abs_diff_eq;

    fn p3() -> QuadForm {
        let space = MeasureSpace::uniform(3).unwrap().into_shared();
        GraphForm::from_edges(space, &[(0, 1, 1.0), (1, 2, 1.0)])
            .unwrap()
            .to_quad_form()
    }

    #[test]
    fn time_zero_is_projection() {
        let q = p3()
            .with_support([0usize, 2].into_iter().collect())
            .unwrap();
        let p = semigroup(&q, 0.0).unwrap();
        assert_eq!(
            p,
            DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&[1.0, 0.0, 1.0]))
        );
        assert!(matches!(
            semigroup(&q, -1.0),
            Err(FormError::NegativeTime(_))
        ));
    }

    #[test]
    fn scalar_semigroup() {
        let space = MeasureSpace::uniform(1).unwrap().into_shared();
        let q = QuadForm::diagonal(space, NodeSet::all(1), &[3.0]).unwrap();
        for t in [0.1, 1.0, 2.5] {
            assert_abs_diff_eq!(
                semigroup(&q, t).unwrap()[(0, 0)],
                (-3.0 * t).exp(),
                epsilon = 1e-15
            );
        }
    }

    #[test]
    fn single_edge_spectrum() {
        let space = MeasureSpace::uniform(2).unwrap().into_shared();
        let q = GraphForm::from_edges(space, &[(0, 1, 1.0)])
            .unwrap()
            .to_quad_form();
        let s = spectrum(&q);
        assert_abs_diff_eq!(s[0], 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s[1], 2.0, epsilon = 1e-14);
    }

    #[test]
    fn diagonal_spectrum_is_sorted_weights() {
        let space = MeasureSpace::uniform(3).unwrap().into_shared();
        let q = QuadForm::diagonal(space, NodeSet::all(3), &[2.0, 0.5, 1.0]).unwrap();
        let s = spectrum(&q);
        for (a, b) in s.iter().zip([0.5, 1.0, 2.0]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }
    }

    #[test]
    fn markov_semigroup_of_p3() {
        let p = semigroup(&p3(), 0.7).unwrap();
        assert!(p.iter().all(|&v| v >= -1e-15));
        for x in 0..3 {
            assert_abs_diff_eq!(p.row(x).sum(), 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn identical_forms_dominate_each_other() {
        let q = p3();
        let r = dominates(&q, &q, &[0.1, 1.0], tol::SEMIGROUP).unwrap();
        assert!(r.semigroup_verdict() && r.form_verdict());
        assert!(r.semigroup.max_violation <= 0.0);
    }

    #[test]
    fn nested_support_domination() {
        let full = p3();
        let inner = full.with_support(NodeSet::singleton(1)).unwrap();
        assert_eq!(inner.block(), DMatrix::from_element(1, 1, 2.0));
        let r = dominates(&inner, &full, &EQUIVALENCE_TIMES, tol::SEMIGROUP).unwrap();
        assert!(r.form.order_ideal_ok && r.form.positivity_ok);
        assert!(r.semigroup_verdict());

        let back = dominates(&full, &inner, &EQUIVALENCE_TIMES, tol::SEMIGROUP).unwrap();
        assert!(!back.form.order_ideal_ok);
        assert!(!back.semigroup_verdict());
        assert!(back.form.witness.is_some() && back.semigroup.witness.is_some());
    }

    #[test]
    fn adversarial_positivity_violation() {
        // q2 has a weaker killing weight at one node than required
        let space = MeasureSpace::uniform(3).unwrap().into_shared();
        let q = GraphForm::from_edges(space.clone(), &[(0, 1, 1.0), (1, 2, 1.0)])
            .unwrap()
            .to_quad_form();
        let q2 = q.plus_diagonal(&[0.0, 0.1, 0.0]).unwrap();
        let r = dominates(&q, &q2, &EQUIVALENCE_TIMES, tol::SEMIGROUP).unwrap();
        assert!(!r.form.positivity_ok);
        assert_eq!(r.form.witness, Some((1, 1)));
        assert!(!r.semigroup_verdict());
        // and the other way round holds
        let r = dominates(&q2, &q, &EQUIVALENCE_TIMES, tol::SEMIGROUP).unwrap();
        assert!(r.semigroup_verdict() && r.form_verdict());
    }

    #[test]
    fn space_mismatch() {
        let q = p3();
        let other = QuadForm::zero(
            MeasureSpace::uniform(2).unwrap().into_shared(),
            NodeSet::all(2),
        );
        assert!(matches!(
            dominates_form(&q, &other),
            Err(FormError::SpaceMismatch)
        ));
        assert!(matches!(
            dominates_semigroup(&q, &other, &[1.0], 1e-12),
            Err(FormError::SpaceMismatch)
        ));
    }

    #[test]
    fn equivalence_with_no_trials_is_empty() {
        let r = ouhabaz_equivalence_test(1, 0).unwrap();
        assert_eq!(r.trials, 0);
        assert!(r.disagreements.is_empty());
    }
}
