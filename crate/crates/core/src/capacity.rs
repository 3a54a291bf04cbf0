//! Capacities and equilibrium potentials.
//!
//! Every node set is both open and compact in a finite space, so the
//! capacity is the single quantity
//! `cap(A) = inf { ‖f‖²_Q : f in the domain, f ≥ 1 on A }`,
//! with `cap(A) = ∞` when no admissible `f` exists.

use nalgebra::{DMatrix, DVector};

use crate::error::{FormError, Result};
use crate::form::QuadForm;
use crate::nodeset::NodeSet;
use crate::tol;

/// `Q + M` on the support, indexed by position in `support.to_vec()`.
fn energy_matrix(q: &QuadForm) -> (Vec<usize>, DMatrix<f64>) {
    let idx = q.support().to_vec();
    let mass = q.space().mass();
    let mut k = q.block();
    for (a, &x) in idx.iter().enumerate() {
        k[(a, a)] += mass[x];
    }
    (idx, k)
}

fn check_target(q: &QuadForm, a: &NodeSet) -> Result<()> {
    match a.iter().find(|&x| !q.support().contains(x)) {
        Some(x) => Err(FormError::Infeasible(x)),
        None => Ok(()),
    }
}

/// Minimizer of `‖f‖²_Q` subject to `f = 1` on `A`.
///
/// For a Dirichlet form the unit contraction lowers the form norm, so the
/// optimum under `f ≥ 1` on `A` already equals 1 there and the problem is a
/// linear solve in the remaining support variables.
pub fn equilibrium_potential(q: &QuadForm, a: &NodeSet) -> Result<DVector<f64>> {
    q.require_markovian()?;
    check_target(q, a)?;
    let n = q.len();
    let (idx, k) = energy_matrix(q);
    let free: Vec<usize> = (0..idx.len()).filter(|&i| !a.contains(idx[i])).collect();
    let fixed: Vec<usize> = (0..idx.len()).filter(|&i| a.contains(idx[i])).collect();
    let mut f = DVector::zeros(n);
    for &i in &fixed {
        f[idx[i]] = 1.0;
    }
    if !free.is_empty() && !fixed.is_empty() {
        let kff = DMatrix::from_fn(free.len(), free.len(), |r, c| k[(free[r], free[c])]);
        let rhs = DVector::from_fn(free.len(), |r, _| {
            -fixed.iter().map(|&c| k[(free[r], c)]).sum::<f64>()
        });
        let sol = kff
            .cholesky()
            .ok_or_else(|| FormError::Numerical("energy matrix is not positive definite".into()))?
            .solve(&rhs);
        for (r, &i) in free.iter().enumerate() {
            f[idx[i]] = sol[r];
        }
    }
    if let Some(x) = (0..n).find(|&x| f[x] < -tol::SAMPLE || f[x] > 1.0 + tol::SAMPLE) {
        return Err(FormError::InternalInvariantViolation(format!(
            "equilibrium potential leaves [0, 1] at node {x}: {}",
            f[x]
        )));
    }
    Ok(f)
}

/// Capacity of `A`; `+∞` when `A` is not contained in the domain.
pub fn capacity(q: &QuadForm, a: &NodeSet) -> Result<f64> {
    if a.is_empty() {
        return Ok(0.0);
    }
    match equilibrium_potential(q, a) {
        Ok(f) => q.form_norm(&f),
        Err(FormError::Infeasible(_)) => Ok(f64::INFINITY),
        Err(e) => Err(e),
    }
}

/// A set is polar iff its capacity vanishes. With strictly positive masses
/// only the empty set is polar.
pub fn is_polar(q: &QuadForm, a: &NodeSet) -> Result<bool> {
    Ok(capacity(q, a)? == 0.0)
}

/// Settings for [`capacity_projected_gradient`].
#[derive(Debug, Clone, Copy)]
pub struct GradientOptions {
    pub max_iter: usize,
    /// Stop once successive iterates differ by less than this.
    pub step_tol: f64,
}

impl Default for GradientOptions {
    fn default() -> Self {
        Self {
            max_iter: 200_000,
            step_tol: 1e-14,
        }
    }
}

/// Capacity computed from the inequality-constrained problem
/// `min ‖f‖²_Q` over `f ≥ 1` on `A` by accelerated projected gradient
/// descent. It does not rely on the unit-contraction reduction and serves
/// as an independent route to [`capacity`].
pub fn capacity_projected_gradient(
    q: &QuadForm,
    a: &NodeSet,
    opts: GradientOptions,
) -> Result<f64> {
    if a.is_empty() {
        return Ok(0.0);
    }
    if check_target(q, a).is_err() {
        return Ok(f64::INFINITY);
    }
    let (idx, k) = energy_matrix(q);
    let m = idx.len();
    let lower: Vec<f64> = idx
        .iter()
        .map(|&x| {
            if a.contains(x) {
                1.0
            } else {
                f64::NEG_INFINITY
            }
        })
        .collect();
    let project = |v: &mut DVector<f64>| {
        for i in 0..m {
            v[i] = v[i].max(lower[i]);
        }
    };
    let eig = k.clone().symmetric_eigenvalues();
    let lmax = eig.max();
    let lmin = eig.min();
    if lmin.is_nan() || lmin <= 0.0 {
        return Err(FormError::Numerical(
            "energy matrix is not positive definite".into(),
        ));
    }
    let step = 1.0 / lmax;
    let kappa = lmax / lmin;
    let momentum = (kappa.sqrt() - 1.0) / (kappa.sqrt() + 1.0);
    let mut x = DVector::from_fn(m, |i, _| if lower[i] > 0.0 { 1.0 } else { 0.0 });
    let mut y = x.clone();
    for _ in 0..opts.max_iter {
        // gradient of f ↦ fᵀKf is 2Kf; the factor is folded into the step
        let mut next = &y - (&k * &y) * step;
        project(&mut next);
        let delta = (&next - &x).amax();
        y = &next + (&next - &x) * momentum;
        x = next;
        if delta < opts.step_tol {
            break;
        }
    }
    Ok(x.dot(&(&k * &x)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::form::GraphForm;
    use crate::space::MeasureSpace;
    use approx::assert_abs_diff_eq;

    fn p3() -> QuadForm {
        let space = MeasureSpace::uniform(3).unwrap().into_shared();
        GraphForm::from_edges(space, &[(0, 1, 1.0), (1, 2, 1.0)])
            .unwrap()
            .to_quad_form()
    }

    fn set(xs: &[usize]) -> NodeSet {
        xs.iter().copied().collect()
    }

    #[test]
    fn p3_fixture() {
        let q = p3();
        let f = equilibrium_potential(&q, &set(&[0])).unwrap();
        assert_abs_diff_eq!(f[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(f[1], 0.4, epsilon = 1e-14);
        assert_abs_diff_eq!(f[2], 0.2, epsilon = 1e-14);
        assert_abs_diff_eq!(capacity(&q, &set(&[0])).unwrap(), 1.6, epsilon = 1e-14);
        assert!(!is_polar(&q, &set(&[0])).unwrap());
    }

    #[test]
    fn trivial_targets() {
        let q = p3();
        assert_eq!(
            equilibrium_potential(&q, &NodeSet::all(3)).unwrap(),
            DVector::from_element(3, 1.0)
        );
        assert_eq!(
            equilibrium_potential(&q, &NodeSet::new()).unwrap(),
            DVector::zeros(3)
        );
        assert_eq!(capacity(&q, &NodeSet::new()).unwrap(), 0.0);
        assert!(is_polar(&q, &NodeSet::new()).unwrap());
    }

    #[test]
    fn outside_domain_is_infinite() {
        let q = p3().with_support(set(&[0, 1])).unwrap();
        assert_eq!(capacity(&q, &set(&[2])).unwrap(), f64::INFINITY);
        assert!(matches!(
            equilibrium_potential(&q, &set(&[2])),
            Err(FormError::Infeasible(2))
        ));
        assert_eq!(
            capacity_projected_gradient(&q, &set(&[2]), GradientOptions::default()).unwrap(),
            f64::INFINITY
        );
    }

    #[test]
    fn gradient_route_agrees_on_p3() {
        let q = p3();
        for a in [set(&[0]), set(&[1]), set(&[0, 2])] {
            let exact = capacity(&q, &a).unwrap();
            let pg = capacity_projected_gradient(&q, &a, GradientOptions::default()).unwrap();
            assert_abs_diff_eq!(exact, pg, epsilon = 1e-10);
        }
    }

    #[test]
    fn non_markovian_rejected() {
        let space = MeasureSpace::uniform(2).unwrap().into_shared();
        let q = QuadForm::new(
            space,
            NodeSet::all(2),
            DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 1.0]),
        )
        .unwrap();
        assert!(matches!(
            capacity(&q, &set(&[0])),
            Err(FormError::NotMarkovian(_))
        ));
    }
}
