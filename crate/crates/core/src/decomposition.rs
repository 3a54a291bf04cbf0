//! Cut-off forms `Q_φ`, the active main part and the killing part.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{FormError, Result};
use crate::form::QuadForm;
use crate::nodeset::NodeSet;
use crate::tol;

/// Nodes reachable from the support through edges of the coefficient array.
///
/// These are the nodes a cut-off function may touch: the support together
/// with the boundary nodes its functions are coupled to.
pub fn edge_closure(q: &QuadForm) -> NodeSet {
    let n = q.len();
    let a = q.coeff();
    let mut seen = q.support().mask(n);
    let mut stack = q.support().to_vec();
    while let Some(x) = stack.pop() {
        for y in 0..n {
            if !seen[y] && y != x && a[(x, y)] != 0.0 {
                seen[y] = true;
                stack.push(y);
            }
        }
    }
    NodeSet::from_mask(&seen)
}

/// Nodes coupled to the domain but outside it.
pub fn form_boundary(q: &QuadForm) -> NodeSet {
    edge_closure(q).difference(q.support())
}

fn check_cutoff(q: &QuadForm, phi: &DVector<f64>, allowed: &NodeSet) -> Result<()> {
    if phi.len() != q.len() {
        return Err(FormError::DimensionMismatch {
            expected: q.len(),
            got: phi.len(),
        });
    }
    for (x, &v) in phi.iter().enumerate() {
        if !(-tol::COEFF..=1.0 + tol::COEFF).contains(&v) {
            return Err(FormError::RangeViolation { node: x, value: v });
        }
        if !allowed.contains(x) && v.abs() > tol::COEFF {
            return Err(FormError::DomainViolation { node: x, value: v });
        }
    }
    Ok(())
}

/// The form `(f, g) ↦ Q(φf, φg) − Q(φfg, φ)`, defined on all nodes.
///
/// The cut-off `φ` takes values in `[0, 1]` and may be nonzero on the edge
/// closure of the domain. Killing weights cancel, leaving
/// `½ Σ φ(x) φ(y) b(x, y) (f(x) − f(y))²`.
pub fn part_form(q: &QuadForm, phi: &DVector<f64>) -> Result<QuadForm> {
    q.require_markovian()?;
    check_cutoff(q, phi, &edge_closure(q))?;
    let n = q.len();
    let a = q.coeff();
    let mut coeff = DMatrix::zeros(n, n);
    for x in 0..n {
        if phi[x] == 0.0 {
            continue;
        }
        // diagonal: φ(x)² a_xx − φ(x) Σ_y a_xy φ(y), with the a_xx terms cancelled
        let mut diag = 0.0;
        for y in 0..n {
            if y != x && phi[y] != 0.0 {
                let w = phi[x] * phi[y] * a[(x, y)];
                coeff[(x, y)] = w;
                diag -= w;
            }
        }
        coeff[(x, x)] = diag;
    }
    QuadForm::new(q.space().clone(), NodeSet::all(n), coeff)
}

/// The active main part: the supremum of `Q_φ` over cut-offs, attained at
/// the indicator of the edge closure. Its domain is the edge closure.
pub fn active_main_part(q: &QuadForm) -> Result<QuadForm> {
    let closure = edge_closure(q);
    let full = part_form(q, &closure.indicator(q.len()))?;
    full.with_support(closure)
}

/// `Q − Q^(M)` on the domain of `Q`; a diagonal form whose entries are the
/// killing weights.
pub fn killing_part(q: &QuadForm) -> Result<QuadForm> {
    let main = active_main_part(q)?;
    let n = q.len();
    let mut coeff = DMatrix::zeros(n, n);
    for x in q.support().iter() {
        for y in q.support().iter() {
            coeff[(x, y)] = q.coeff()[(x, y)] - main.coeff()[(x, y)];
        }
    }
    QuadForm::new(q.space().clone(), q.support().clone(), coeff)
}

/// Diagonal of the killing part, zero off the domain.
pub fn killing_measure(q: &QuadForm) -> Result<DVector<f64>> {
    let k = killing_part(q)?;
    Ok(DVector::from_fn(q.len(), |x, _| {
        if q.support().contains(x) {
            k.coeff()[(x, x)]
        } else {
            0.0
        }
    }))
}

/// Whether the killing part vanishes (up to the coefficient tolerance).
pub fn is_killing_free(q: &QuadForm) -> Result<bool> {
    let c = killing_measure(q)?;
    Ok(c.amax() <= tol::COEFF * q.scale().max(1.0))
}

/// Sampled check of `Q_φ(f) ≤ Q_ψ(f) ≤ Q(f)` for `0 ≤ φ ≤ ψ ≤ 1` and `f` in
/// the domain of `Q`.
///
/// The inequalities are theorems, so a failure signals a bug; debug builds
/// report it as [`FormError::InternalInvariantViolation`].
pub fn part_monotonicity_check<R: Rng>(
    q: &QuadForm,
    phi: &DVector<f64>,
    psi: &DVector<f64>,
    samples: usize,
    rng: &mut R,
) -> Result<bool> {
    if phi.len() != psi.len() {
        return Err(FormError::DimensionMismatch {
            expected: phi.len(),
            got: psi.len(),
        });
    }
    if let Some(x) = (0..phi.len()).find(|&x| phi[x] > psi[x] + tol::COEFF) {
        return Err(FormError::RangeViolation {
            node: x,
            value: phi[x] - psi[x],
        });
    }
    let q_phi = part_form(q, phi)?;
    let q_psi = part_form(q, psi)?;
    let n = q.len();
    for _ in 0..samples {
        let f = DVector::from_fn(n, |x, _| {
            if q.support().contains(x) {
                rng.gen_range(-1.0..1.0)
            } else {
                0.0
            }
        });
        let a = q_phi.bilinear_on_support(&f, &f);
        let b = q_psi.bilinear_on_support(&f, &f);
        let c = q.bilinear_on_support(&f, &f);
        if a > b + tol::SAMPLE || b > c + tol::SAMPLE {
            if cfg!(debug_assertions) {
                return Err(FormError::InternalInvariantViolation(format!(
                    "Q_phi(f) = {a}, Q_psi(f) = {b}, Q(f) = {c}"
                )));
            }
            return Ok(false);
        }
    }
    Ok(true)
}
