//! Forms sandwiched between a Dirichlet form and its active main part.
//!
//! A sandwiched form `Q'` (one with `Q ⪯ Q' ⪯ Q^(M)`) is described by an
//! admissible pair `(O, μ)`: its domain is the functions vanishing off `O`
//! and it acts as `Q^(M)(f) + Σ μ(x) f(x)²`. Boundary nodes (coupled to the
//! domain of `Q` but outside it) play the role of the abstract boundary.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::capacity::{capacity, is_polar};
use crate::decomposition::{active_main_part, form_boundary, killing_measure};
use crate::domination::{dominates_semigroup, SemigroupCheck};
use crate::error::{FormError, Result};
use crate::form::QuadForm;
use crate::measure_rep::{is_local, is_positive, representing_measure};
use crate::nodeset::NodeSet;
use crate::tol;

/// Largest instance accepted by [`enumerate_sandwiched`].
pub const ENUMERATION_LIMIT: usize = 12;

/// A node set `O` with a nonnegative measure `μ` carried by `O`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmissiblePair {
    pub o: NodeSet,
    /// One weight per node of the space, zero off `O`.
    pub mu: DVector<f64>,
}

impl AdmissiblePair {
    pub fn new(o: NodeSet, mu: DVector<f64>) -> Result<Self> {
        for (x, &v) in mu.iter().enumerate() {
            if !(v.is_finite() && v >= 0.0) {
                return Err(FormError::NotAdmissible(format!(
                    "measure at node {x} is {v}"
                )));
            }
            if v != 0.0 && !o.contains(x) {
                return Err(FormError::NotAdmissible(format!(
                    "measure charges node {x} outside O"
                )));
            }
        }
        if let Some(x) = o.max() {
            if x >= mu.len() {
                return Err(FormError::NotAdmissible(format!("node {x} out of range")));
            }
        }
        Ok(Self { o, mu })
    }

    /// The pair `(O, 0)`.
    pub fn unweighted(o: NodeSet, n: usize) -> Result<Self> {
        Self::new(o, DVector::zeros(n))
    }

    /// Checks that `μ` charges no polar node of `q`.
    pub fn check_admissible(&self, q: &QuadForm) -> Result<()> {
        if self.mu.len() != q.len() {
            return Err(FormError::DimensionMismatch {
                expected: q.len(),
                got: self.mu.len(),
            });
        }
        for x in self.o.iter() {
            if self.mu[x] > 0.0 && is_polar(q, &NodeSet::singleton(x))? {
                return Err(FormError::NotAdmissible(format!(
                    "measure charges the polar node {x}"
                )));
            }
        }
        Ok(())
    }

    /// `O` contains the domain of `q` and `μ` vanishes there.
    pub fn is_boundary_pair(&self, q: &QuadForm) -> bool {
        q.support().is_subset(&self.o) && q.support().iter().all(|x| self.mu[x] == 0.0)
    }
}

/// The form `Q_{O,μ}(f) = Q(f) + Σ_O μ(x) f(x)²` on functions vanishing off
/// `O`.
pub fn restricted_form(qm: &QuadForm, p: &AdmissiblePair) -> Result<QuadForm> {
    qm.require_markovian()?;
    p.check_admissible(qm)?;
    let support = p.o.intersection(qm.support());
    let mut coeff = qm.coeff().clone();
    for x in support.iter() {
        coeff[(x, x)] += p.mu[x];
    }
    QuadForm::new(qm.space().clone(), support, coeff)
}

/// Order on pairs: `Q_{O₁,μ₁} ⪯ Q_{O₂,μ₂}` iff `cap(O₁ \ O₂) = 0` and
/// `μ₂ ≤ μ₁` on `O₁`. Pairs live over `Q^(M)`, so sets and capacities are
/// taken relative to the active main part of `q`.
pub fn pair_dominates(p1: &AdmissiblePair, p2: &AdmissiblePair, q: &QuadForm) -> Result<bool> {
    let qm = active_main_part(q)?;
    p1.check_admissible(&qm)?;
    p2.check_admissible(&qm)?;
    let o1 = p1.o.intersection(qm.support());
    let o2 = p2.o.intersection(qm.support());
    if capacity(&qm, &o1.difference(&o2))? != 0.0 {
        return Ok(false);
    }
    Ok(o1
        .intersection(&o2)
        .iter()
        .all(|x| p2.mu[x] <= p1.mu[x] + tol::COEFF * p1.mu[x].abs().max(1.0)))
}

/// Which clause of the characterization failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Clause {
    /// (a) the domain of `Q'` is an order ideal in that of `Q^(M)`.
    OrderIdeal,
    /// (b) `Q' − Q^(M)` is positive.
    Positive,
    /// (b) `Q' − Q^(M)` is local.
    Local,
    /// (c) `Q'` extends `Q`.
    Extension,
    /// The measure exceeds the killing weights, or `Q'` does not contain
    /// the domain of `Q`.
    KillingBand,
}

impl Clause {
    pub fn label(self) -> &'static str {
        match self {
            Clause::OrderIdeal => "(a) order ideal",
            Clause::Positive => "(b) positive",
            Clause::Local => "(b) local",
            Clause::Extension => "(c) extension",
            Clause::KillingBand => "(c) killing band",
        }
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Witness {
    pub clause: Clause,
    pub x: usize,
    pub y: usize,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SandwichMode {
    /// `Q` has no killing part; the extension clause is checked.
    Boundary,
    /// `Q` has killing; the measure must lie below the killing weights.
    Killing,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SandwichVerdict {
    pub mode: SandwichMode,
    pub is_sandwiched: bool,
    pub order_ideal_ok: bool,
    pub positive_ok: bool,
    pub local_ok: bool,
    /// The extension clause in boundary mode, the killing band otherwise.
    pub extension_ok: bool,
    pub witness: Option<Witness>,
    /// Representing measure of `Q' − Q^(M)` when it exists.
    pub measure: Option<DVector<f64>>,
}

/// `Q' − Q^(M)` on the part of the domain of `Q'` where both are defined.
fn difference_form(qprime: &QuadForm, qm: &QuadForm) -> Result<QuadForm> {
    let support = qprime.support().intersection(qm.support());
    let n = qm.len();
    let mut coeff = DMatrix::zeros(n, n);
    for x in support.iter() {
        for y in support.iter() {
            coeff[(x, y)] = qprime.coeff()[(x, y)] - qm.coeff()[(x, y)];
        }
    }
    QuadForm::new_indefinite(qm.space().clone(), support, coeff)
}

fn first_entry(
    d: &QuadForm,
    clause: Clause,
    bad: impl Fn(usize, usize, f64) -> bool,
) -> Option<Witness> {
    for x in d.support().iter() {
        for y in d.support().iter() {
            let value = d.coeff()[(x, y)];
            if bad(x, y, value) {
                return Some(Witness {
                    clause,
                    x,
                    y,
                    value,
                });
            }
        }
    }
    None
}

fn check(q: &QuadForm, qprime: &QuadForm, mode: SandwichMode) -> Result<SandwichVerdict> {
    q.require_markovian()?;
    if !q.same_space(qprime) {
        return Err(FormError::SpaceMismatch);
    }
    let qm = active_main_part(q)?;
    let d = difference_form(qprime, &qm)?;
    let eps = tol::COEFF * q.scale().max(qprime.scale()).max(1.0);
    let mut witnesses = Vec::new();

    let outside = qprime.support().difference(qm.support());
    let order_ideal_ok = outside.is_empty();
    if let Some(x) = outside.iter().next() {
        witnesses.push(Witness {
            clause: Clause::OrderIdeal,
            x,
            y: x,
            value: 1.0,
        });
    }
    let positive_ok = is_positive(&d);
    if !positive_ok {
        let deps = tol::COEFF * d.scale().max(1.0);
        witnesses.extend(first_entry(&d, Clause::Positive, |_, _, v| v < -deps));
    }
    let local_ok = is_local(&d);
    if !local_ok {
        let deps = tol::COEFF * d.scale().max(1.0);
        witnesses.extend(first_entry(&d, Clause::Local, |x, y, v| {
            x != y && v.abs() > deps
        }));
    }
    let measure = representing_measure(&d).ok();

    let missing = q.support().difference(qprime.support());
    let extension_ok = match mode {
        SandwichMode::Boundary => {
            let mismatch = q.support().iter().find_map(|x| {
                q.support().iter().find_map(|y| {
                    let value = qprime.coeff()[(x, y)] - q.coeff()[(x, y)];
                    (value.abs() > eps).then_some(Witness {
                        clause: Clause::Extension,
                        x,
                        y,
                        value,
                    })
                })
            });
            let w = missing
                .iter()
                .next()
                .map(|x| Witness {
                    clause: Clause::Extension,
                    x,
                    y: x,
                    value: 1.0,
                })
                .or(mismatch);
            witnesses.extend(w);
            w.is_none()
        }
        SandwichMode::Killing => {
            let c = killing_measure(q)?;
            let w = missing
                .iter()
                .next()
                .map(|x| Witness {
                    clause: Clause::KillingBand,
                    x,
                    y: x,
                    value: 1.0,
                })
                .or_else(|| {
                    q.support().iter().find_map(|x| {
                        let excess = d.coeff()[(x, x)] - c[x];
                        (excess > eps).then_some(Witness {
                            clause: Clause::KillingBand,
                            x,
                            y: x,
                            value: excess,
                        })
                    })
                });
            witnesses.extend(w);
            w.is_none()
        }
    };

    let is_sandwiched = order_ideal_ok && positive_ok && local_ok && extension_ok;
    Ok(SandwichVerdict {
        mode,
        is_sandwiched,
        order_ideal_ok,
        positive_ok,
        local_ok,
        extension_ok,
        witness: witnesses.into_iter().next(),
        measure,
    })
}

/// Tests whether `Q ⪯ Q' ⪯ Q^(M)` through the structural characterization:
/// (a) order ideal, (b) `Q' − Q^(M)` positive and local, (c) `Q'` extends
/// `Q`. Forms with a killing part are handled by [`killing_mode_check`].
pub fn sandwich_check(q: &QuadForm, qprime: &QuadForm) -> Result<SandwichVerdict> {
    q.require_markovian()?;
    let c = killing_measure(q)?;
    let mode = if c.amax() <= tol::COEFF * q.scale().max(1.0) {
        SandwichMode::Boundary
    } else {
        SandwichMode::Killing
    };
    check(q, qprime, mode)
}

/// Sandwich test with the extension clause, whether or not `Q` has
/// killing.
pub fn boundary_mode_check(q: &QuadForm, qprime: &QuadForm) -> Result<SandwichVerdict> {
    check(q, qprime, SandwichMode::Boundary)
}

/// Sandwich test for forms with killing: the extension clause becomes
/// `0 ≤ μ ≤ c` on the domain of `Q`, where `c` is the killing measure.
pub fn killing_mode_check(q: &QuadForm, qprime: &QuadForm) -> Result<SandwichVerdict> {
    check(q, qprime, SandwichMode::Killing)
}

/// Semigroup-level cross-check: `(Q ⪯ Q', Q' ⪯ Q^(M))`.
pub fn two_sided_domination(
    q: &QuadForm,
    qprime: &QuadForm,
    times: &[f64],
    tol: f64,
) -> Result<(SemigroupCheck, SemigroupCheck)> {
    let qm = active_main_part(q)?;
    Ok((
        dominates_semigroup(q, qprime, times, tol)?,
        dominates_semigroup(qprime, &qm, times, tol)?,
    ))
}

/// The pair `(O, μ)` with `Q' = Q^(M)_{O,μ}`.
pub fn recover_pair(q: &QuadForm, qprime: &QuadForm) -> Result<AdmissiblePair> {
    let v = sandwich_check(q, qprime)?;
    if !v.is_sandwiched {
        let clause = v.witness.map_or("unknown", |w| w.clause.label());
        return Err(FormError::NotSandwiched(format!("clause {clause} fails")));
    }
    let mu = v.measure.ok_or_else(|| {
        FormError::InternalInvariantViolation("sandwiched form without a measure".into())
    })?;
    AdmissiblePair::new(qprime.support().clone(), mu)
}

fn levels(grid: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0];
    for &g in grid {
        if !out.contains(&g) {
            out.push(g);
        }
    }
    out
}

/// All sandwiched forms whose measures take values in a grid.
///
/// Pairs range over `O = S ∪ B` with `S` the domain of `Q` and `B` a subset
/// of the boundary nodes, with `μ` on `B` drawn from `μ_grid ∪ {0}`. With
/// killing present, `μ` on `S` additionally ranges over `{0, c/2, c}`.
/// Results come in a fixed order.
pub fn enumerate_sandwiched(
    q: &QuadForm,
    mu_grid: &[f64],
) -> Result<Vec<(AdmissiblePair, QuadForm)>> {
    let n = q.len();
    if n > ENUMERATION_LIMIT {
        return Err(FormError::TooLarge {
            nodes: n,
            limit: ENUMERATION_LIMIT,
        });
    }
    if let Some(&g) = mu_grid.iter().find(|g| !(g.is_finite() && **g >= 0.0)) {
        return Err(FormError::NotAdmissible(format!(
            "grid level {g} is not a nonnegative number"
        )));
    }
    q.require_markovian()?;
    let qm = active_main_part(q)?;
    let c = killing_measure(q)?;
    let boundary = form_boundary(q).to_vec();
    let boundary_levels = levels(mu_grid);

    // per node: list of options, None = excluded from O
    let mut options: Vec<(usize, Vec<Option<f64>>)> = Vec::new();
    for x in q.support().iter() {
        options.push((
            x,
            levels(&[c[x] / 2.0, c[x]]).into_iter().map(Some).collect(),
        ));
    }
    for &x in &boundary {
        let mut o = vec![None];
        o.extend(boundary_levels.iter().copied().map(Some));
        options.push((x, o));
    }

    let total: usize = options.iter().map(|(_, o)| o.len()).product();
    let pairs: Vec<AdmissiblePair> = (0..total)
        .map(|mut k| {
            let mut o = NodeSet::new();
            let mut mu = DVector::zeros(n);
            // last node varies fastest
            let mut choice = vec![None; options.len()];
            for (slot, (_, opts)) in options.iter().enumerate().rev() {
                choice[slot] = opts[k % opts.len()];
                k /= opts.len();
            }
            for ((x, _), pick) in options.iter().zip(choice) {
                if let Some(level) = pick {
                    o.insert(*x);
                    mu[*x] = level;
                }
            }
            AdmissiblePair { o, mu }
        })
        .collect();

    pairs
        .into_par_iter()
        .map(|p| {
            let form = restricted_form(&qm, &p)?;
            Ok((p, form))
        })
        .collect()
}
