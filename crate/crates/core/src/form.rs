//! Quadratic forms on node functions and their Beurling–Deny (graph)
//! representation.
//!
//! A [`QuadForm`] carries a coefficient array over *all* nodes of its space
//! together with a support set. Its domain is the order ideal of functions
//! vanishing off the support, and on that domain it acts by
//! `Q(f, g) = Σ coeff[x][y] f(x) g(y)`. Entries outside `support × support`
//! never influence `Q` itself; they record how the domain couples to the
//! remaining nodes (for example the edges from interior nodes to boundary
//! nodes of a Dirichlet Laplacian) and are what the active main part is
//! built from.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{FormError, Result};
use crate::nodeset::NodeSet;
use crate::space::MeasureSpace;
use crate::tol;

/// Number of random functions used to cross-check the Markov property.
pub const MARKOV_SAMPLES: usize = 100;

#[derive(Debug, Clone)]
pub struct QuadForm {
    space: Arc<MeasureSpace>,
    support: NodeSet,
    coeff: DMatrix<f64>,
}

impl QuadForm {
    /// Builds a form from a full `n × n` coefficient array.
    pub fn new(space: Arc<MeasureSpace>, support: NodeSet, coeff: DMatrix<f64>) -> Result<Self> {
        Self::build(space, support, coeff, true)
    }

    /// A symmetric bilinear form that need not be positive semidefinite,
    /// such as the difference of two forms.
    pub fn new_indefinite(
        space: Arc<MeasureSpace>,
        support: NodeSet,
        coeff: DMatrix<f64>,
    ) -> Result<Self> {
        Self::build(space, support, coeff, false)
    }

    fn build(
        space: Arc<MeasureSpace>,
        support: NodeSet,
        coeff: DMatrix<f64>,
        definite: bool,
    ) -> Result<Self> {
        let n = space.len();
        if coeff.nrows() != n || coeff.ncols() != n {
            return Err(FormError::DimensionMismatch {
                expected: n,
                got: coeff.nrows().max(coeff.ncols()),
            });
        }
        if let Some(x) = support.max() {
            if x >= n {
                return Err(FormError::InvalidForm(format!(
                    "support node {x} out of range"
                )));
            }
        }
        if coeff.iter().any(|v| !v.is_finite()) {
            return Err(FormError::InvalidForm("non-finite coefficient".into()));
        }
        let scale = max_abs(&coeff).max(f64::MIN_POSITIVE);
        for x in 0..n {
            for y in (x + 1)..n {
                if (coeff[(x, y)] - coeff[(y, x)]).abs() > tol::SYMMETRY * scale {
                    return Err(FormError::InvalidForm(format!(
                        "coefficients not symmetric at ({x}, {y})"
                    )));
                }
            }
        }
        let form = Self {
            space,
            support,
            coeff,
        };
        let block = form.block();
        if block.nrows() > 0 && definite {
            let min = SymmetricEigen::new(block).eigenvalues.min();
            if min < -tol::PSD * scale {
                return Err(FormError::InvalidForm(format!(
                    "form is not positive semidefinite (smallest eigenvalue {min:e})"
                )));
            }
        }
        Ok(form)
    }

    /// Builds a form from its `support × support` block; all couplings to
    /// nodes outside the support are zero.
    pub fn from_block(
        space: Arc<MeasureSpace>,
        support: NodeSet,
        block: &DMatrix<f64>,
    ) -> Result<Self> {
        let idx = support.to_vec();
        if block.nrows() != idx.len() || block.ncols() != idx.len() {
            return Err(FormError::DimensionMismatch {
                expected: idx.len(),
                got: block.nrows(),
            });
        }
        let n = space.len();
        let mut coeff = DMatrix::zeros(n, n);
        for (a, &x) in idx.iter().enumerate() {
            for (b, &y) in idx.iter().enumerate() {
                coeff[(x, y)] = block[(a, b)];
            }
        }
        Self::new(space, support, coeff)
    }

    /// Multiplication form `f ↦ Σ w(x) f(x)²` on the given support.
    pub fn diagonal(space: Arc<MeasureSpace>, support: NodeSet, weights: &[f64]) -> Result<Self> {
        if weights.len() != space.len() {
            return Err(FormError::DimensionMismatch {
                expected: space.len(),
                got: weights.len(),
            });
        }
        let coeff = DMatrix::from_diagonal(&DVector::from_column_slice(weights));
        Self::new(space, support, coeff)
    }

    pub fn zero(space: Arc<MeasureSpace>, support: NodeSet) -> Self {
        let n = space.len();
        Self {
            space,
            support,
            coeff: DMatrix::zeros(n, n),
        }
    }

    pub(crate) fn from_parts_unchecked(
        space: Arc<MeasureSpace>,
        support: NodeSet,
        coeff: DMatrix<f64>,
    ) -> Self {
        Self {
            space,
            support,
            coeff,
        }
    }

    pub fn space(&self) -> &Arc<MeasureSpace> {
        &self.space
    }

    pub fn support(&self) -> &NodeSet {
        &self.support
    }

    /// The full coefficient array, including couplings to nodes off the
    /// support.
    pub fn coeff(&self) -> &DMatrix<f64> {
        &self.coeff
    }

    pub fn len(&self) -> usize {
        self.space.len()
    }

    pub fn is_empty(&self) -> bool {
        self.space.is_empty()
    }

    /// The `support × support` coefficient block.
    pub fn block(&self) -> DMatrix<f64> {
        let idx = self.support.to_vec();
        DMatrix::from_fn(idx.len(), idx.len(), |a, b| self.coeff[(idx[a], idx[b])])
    }

    /// Largest coefficient magnitude, used to scale tolerances.
    pub fn scale(&self) -> f64 {
        max_abs(&self.coeff)
    }

    pub fn same_space(&self, other: &QuadForm) -> bool {
        Arc::ptr_eq(&self.space, &other.space) || *self.space == *other.space
    }

    /// Checks that `f` is a node function in the domain.
    pub fn check_domain(&self, f: &DVector<f64>) -> Result<()> {
        if f.len() != self.len() {
            return Err(FormError::DimensionMismatch {
                expected: self.len(),
                got: f.len(),
            });
        }
        for (x, &v) in f.iter().enumerate() {
            if !self.support.contains(x) && v.abs() > tol::COEFF {
                return Err(FormError::DomainViolation { node: x, value: v });
            }
        }
        Ok(())
    }

    /// `Q(f, g)` for `f`, `g` in the domain.
    pub fn evaluate(&self, f: &DVector<f64>, g: &DVector<f64>) -> Result<f64> {
        self.check_domain(f)?;
        self.check_domain(g)?;
        Ok(self.bilinear_on_support(f, g))
    }

    /// `Q(f) = Q(f, f)`.
    pub fn energy(&self, f: &DVector<f64>) -> Result<f64> {
        self.evaluate(f, f)
    }

    /// Squared form norm `Q(f) + Σ m(x) f(x)²`.
    pub fn form_norm(&self, f: &DVector<f64>) -> Result<f64> {
        let q = self.energy(f)?;
        let l2: f64 = self
            .support
            .iter()
            .map(|x| self.space.mass()[x] * f[x] * f[x])
            .sum();
        Ok(q + l2)
    }

    pub(crate) fn bilinear_on_support(&self, f: &DVector<f64>, g: &DVector<f64>) -> f64 {
        let mut acc = 0.0;
        for x in self.support.iter() {
            if f[x] == 0.0 {
                continue;
            }
            let mut row = 0.0;
            for y in self.support.iter() {
                row += self.coeff[(x, y)] * g[y];
            }
            acc += f[x] * row;
        }
        acc
    }

    /// Finite-dimensional Markov criterion: nonpositive off-diagonal
    /// coefficients and nonnegative row sums, checked on the full array so
    /// that the couplings to nodes off the support form a valid graph too.
    pub fn markov_structure_ok(&self) -> bool {
        self.markov_violation().is_none()
    }

    fn markov_violation(&self) -> Option<String> {
        let n = self.len();
        let eps = tol::COEFF * self.scale().max(1.0);
        for x in 0..n {
            let mut row = 0.0;
            for y in 0..n {
                let v = self.coeff[(x, y)];
                if x != y && v > eps {
                    return Some(format!(
                        "positive off-diagonal coefficient {v:e} at ({x}, {y})"
                    ));
                }
                row += v;
            }
            if row < -eps {
                return Some(format!("negative row sum {row:e} at node {x}"));
            }
        }
        None
    }

    /// Samples functions in the domain and checks `Q(f₊ ∧ 1) ≤ Q(f)`.
    pub fn markov_contraction_holds<R: Rng>(&self, samples: usize, rng: &mut R) -> bool {
        let n = self.len();
        (0..samples).all(|_| {
            let f: DVector<f64> = DVector::from_fn(n, |x, _| {
                if self.support.contains(x) {
                    rng.gen_range(-2.0..2.0)
                } else {
                    0.0
                }
            });
            let t = f.map(|v: f64| v.clamp(0.0, 1.0));
            let qf = self.bilinear_on_support(&f, &f);
            let qt = self.bilinear_on_support(&t, &t);
            qt <= qf + tol::SAMPLE * qf.abs().max(1.0)
        })
    }

    /// Whether the form is a Dirichlet form. The structural criterion is
    /// authoritative; the sampled unit-contraction test backs it up.
    pub fn is_markovian(&self) -> bool {
        if !self.markov_structure_ok() {
            return false;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0x6d61726b);
        let sampled = self.markov_contraction_holds(MARKOV_SAMPLES, &mut rng);
        debug_assert!(
            sampled,
            "structurally Markovian form failed the unit-contraction sample"
        );
        sampled
    }

    pub(crate) fn require_markovian(&self) -> Result<()> {
        match self.markov_violation() {
            Some(msg) => Err(FormError::NotMarkovian(msg)),
            None => Ok(()),
        }
    }

    /// Inverse Beurling–Deny representation: `b(x, y) = -coeff[x][y]` and
    /// `c(x) = Σ_y coeff[x][y]`.
    pub fn to_graph(&self) -> Result<GraphForm> {
        self.require_markovian()?;
        let n = self.len();
        let mut b = DMatrix::zeros(n, n);
        let mut c = DVector::zeros(n);
        for x in 0..n {
            for y in 0..n {
                if x != y {
                    b[(x, y)] = -self.coeff[(x, y)];
                }
            }
            c[x] = self.coeff.row(x).sum();
        }
        Ok(GraphForm {
            space: self.space.clone(),
            b,
            c,
            support: self.support.clone(),
        })
    }

    /// Same coefficients, different domain.
    pub fn with_support(&self, support: NodeSet) -> Result<Self> {
        Self::new(self.space.clone(), support, self.coeff.clone())
    }

    /// Adds `Σ w(x) f(x)²` to the form.
    pub fn plus_diagonal(&self, w: &[f64]) -> Result<Self> {
        if w.len() != self.len() {
            return Err(FormError::DimensionMismatch {
                expected: self.len(),
                got: w.len(),
            });
        }
        let mut coeff = self.coeff.clone();
        for (x, &v) in w.iter().enumerate() {
            coeff[(x, x)] += v;
        }
        Self::new(self.space.clone(), self.support.clone(), coeff)
    }

    /// Largest entrywise difference of the coefficient arrays over
    /// `set × set`.
    pub fn max_diff_on(&self, other: &QuadForm, set: &NodeSet) -> f64 {
        let mut worst: f64 = 0.0;
        for x in set.iter() {
            for y in set.iter() {
                worst = worst.max((self.coeff[(x, y)] - other.coeff[(x, y)]).abs());
            }
        }
        worst
    }
}

/// Beurling–Deny data on a finite set: symmetric edge weights and killing
/// weights, together with the domain support.
#[derive(Debug, Clone)]
pub struct GraphForm {
    pub space: Arc<MeasureSpace>,
    pub b: DMatrix<f64>,
    pub c: DVector<f64>,
    pub support: NodeSet,
}

impl GraphForm {
    pub fn new(
        space: Arc<MeasureSpace>,
        b: DMatrix<f64>,
        c: DVector<f64>,
        support: NodeSet,
    ) -> Result<Self> {
        let g = Self {
            space,
            b,
            c,
            support,
        };
        g.validate()?;
        Ok(g)
    }

    /// Graph with the given undirected edges `(x, y, weight)`, no killing,
    /// and full support.
    pub fn from_edges(space: Arc<MeasureSpace>, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let n = space.len();
        let mut b = DMatrix::zeros(n, n);
        for &(x, y, w) in edges {
            if x >= n || y >= n || x == y {
                return Err(FormError::InvalidForm(format!("bad edge ({x}, {y})")));
            }
            b[(x, y)] += w;
            b[(y, x)] += w;
        }
        Self::new(space, b, DVector::zeros(n), NodeSet::all(n))
    }

    pub fn with_killing(mut self, c: &[f64]) -> Result<Self> {
        self.c = DVector::from_column_slice(c);
        self.validate()?;
        Ok(self)
    }

    pub fn with_support(mut self, support: NodeSet) -> Result<Self> {
        self.support = support;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.space.len();
        if self.b.nrows() != n || self.b.ncols() != n {
            return Err(FormError::DimensionMismatch {
                expected: n,
                got: self.b.nrows(),
            });
        }
        if self.c.len() != n {
            return Err(FormError::DimensionMismatch {
                expected: n,
                got: self.c.len(),
            });
        }
        if let Some(x) = self.support.max() {
            if x >= n {
                return Err(FormError::InvalidForm(format!(
                    "support node {x} out of range"
                )));
            }
        }
        let eps = tol::COEFF * max_abs(&self.b).max(self.c.amax()).max(1.0);
        for x in 0..n {
            if self.b[(x, x)] != 0.0 {
                return Err(FormError::InvalidForm(format!("self-loop at node {x}")));
            }
            if !(self.c[x].is_finite() && self.c[x] >= -eps) {
                return Err(FormError::InvalidForm(format!(
                    "killing weight at node {x} must be >= 0"
                )));
            }
            for y in 0..n {
                let w = self.b[(x, y)];
                if !(w.is_finite() && w >= -eps) {
                    return Err(FormError::InvalidForm(format!(
                        "edge weight ({x}, {y}) must be >= 0"
                    )));
                }
                if (w - self.b[(y, x)]).abs() > eps {
                    return Err(FormError::InvalidForm(format!(
                        "edge weights not symmetric at ({x}, {y})"
                    )));
                }
            }
        }
        Ok(())
    }

    /// `Q(f) = ½ Σ b(x,y)(f(x) − f(y))² + Σ c(x) f(x)²` on the support.
    pub fn to_quad_form(&self) -> QuadForm {
        let n = self.space.len();
        let mut coeff = DMatrix::zeros(n, n);
        for x in 0..n {
            let mut deg = 0.0;
            for y in 0..n {
                if x != y {
                    coeff[(x, y)] = -self.b[(x, y)];
                    deg += self.b[(x, y)];
                }
            }
            coeff[(x, x)] = deg + self.c[x];
        }
        QuadForm::from_parts_unchecked(self.space.clone(), self.support.clone(), coeff)
    }
}

impl From<&GraphForm> for QuadForm {
    fn from(g: &GraphForm) -> Self {
        g.to_quad_form()
    }
}

pub(crate) fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0f64, |a, v| a.max(v.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn p3(c: [f64; 3]) -> QuadForm {
        let space = MeasureSpace::uniform(3).unwrap().into_shared();
        GraphForm::from_edges(space, &[(0, 1, 1.0), (1, 2, 1.0)])
            .unwrap()
            .with_killing(&c)
            .unwrap()
            .to_quad_form()
    }

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(xs)
    }

    #[test]
    fn path_energy() {
        let q = p3([0.0; 3]);
        assert_abs_diff_eq!(
            q.energy(&v(&[1.0, 2.0, 3.0])).unwrap(),
            2.0,
            epsilon = 1e-15
        );
        assert_eq!(q.energy(&v(&[1.0, 1.0, 1.0])).unwrap(), 0.0);
        assert_eq!(q.energy(&v(&[0.0, 0.0, 0.0])).unwrap(), 0.0);
    }

    #[test]
    fn killing_adds_diagonal() {
        let q = p3([0.0, 5.0, 0.0]);
        assert_abs_diff_eq!(
            q.energy(&v(&[0.0, 1.0, 0.0])).unwrap(),
            7.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn form_norm_adds_weighted_l2() {
        let q = p3([0.0; 3]);
        let f = v(&[1.0, 0.0, 0.0]);
        assert_eq!(q.energy(&f).unwrap(), 1.0);
        assert_eq!(q.form_norm(&f).unwrap(), 2.0);
        assert_eq!(q.form_norm(&v(&[0.0; 3])).unwrap(), 0.0);

        let doubled = QuadForm::new(
            Arc::new(q.space().scaled(2.0).unwrap()),
            q.support().clone(),
            q.coeff().clone(),
        )
        .unwrap();
        assert_eq!(doubled.form_norm(&f).unwrap(), 3.0);
    }

    #[test]
    fn graph_round_trip() {
        let space = MeasureSpace::uniform(2).unwrap().into_shared();
        let q = QuadForm::from_block(
            space.clone(),
            NodeSet::all(2),
            &DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]),
        )
        .unwrap();
        let g = q.to_graph().unwrap();
        assert_eq!(g.b[(0, 1)], 1.0);
        assert_eq!(g.c.as_slice(), &[0.0, 0.0]);

        let q = QuadForm::from_block(
            space.clone(),
            NodeSet::all(2),
            &DMatrix::from_row_slice(2, 2, &[2.0, -1.0, -1.0, 1.0]),
        )
        .unwrap();
        let g = q.to_graph().unwrap();
        assert_eq!(g.b[(0, 1)], 1.0);
        assert_eq!(g.c.as_slice(), &[1.0, 0.0]);
        assert_eq!(g.to_quad_form().coeff(), q.coeff());

        let q = QuadForm::from_block(
            space,
            NodeSet::all(2),
            &DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 1.0]),
        )
        .unwrap();
        assert!(matches!(q.to_graph(), Err(FormError::NotMarkovian(_))));
        assert!(!q.is_markovian());
    }

    #[test]
    fn markovian_examples() {
        assert!(p3([0.0, 5.0, 0.0]).is_markovian());
        let space = MeasureSpace::uniform(3).unwrap().into_shared();
        let d = QuadForm::diagonal(space, NodeSet::all(3), &[0.5, 0.0, 2.0]).unwrap();
        assert!(d.is_markovian());
    }

    #[test]
    fn domain_violation_is_reported() {
        let q = p3([0.0; 3])
            .with_support([1usize].into_iter().collect())
            .unwrap();
        let err = q.energy(&v(&[1.0, 1.0, 0.0])).unwrap_err();
        assert!(matches!(err, FormError::DomainViolation { node: 0, .. }));
        // The restricted form only sees the block: f = δ₂ picks up both edges.
        assert_eq!(q.energy(&v(&[0.0, 1.0, 0.0])).unwrap(), 2.0);
    }

    #[test]
    fn rejects_asymmetric_and_indefinite() {
        let space = MeasureSpace::uniform(2).unwrap().into_shared();
        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 0.1, 0.0, 1.0]);
        assert!(QuadForm::from_block(space.clone(), NodeSet::all(2), &asym).is_err());
        let indef = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(QuadForm::from_block(space, NodeSet::all(2), &indef).is_err());
    }
}
