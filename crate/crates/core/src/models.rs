//! Model generators: paths, interval and square Laplacians with Dirichlet,
//! Neumann and Robin data, potentials, and a discretized fractional
//! Laplacian.
//!
//! Grid models include the boundary points as nodes. Dirichlet conditions
//! remove them from the domain but keep their edges in the coefficient
//! array, so a Dirichlet model and the corresponding Neumann model share
//! the same array and differ only in support.

use nalgebra::{DMatrix, DVector};

use crate::error::{FormError, Result};
use crate::form::{GraphForm, QuadForm};
use crate::nodeset::NodeSet;
use crate::space::MeasureSpace;

/// Boundary condition at the ends of an interval model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryKind {
    Dirichlet,
    Neumann,
    Robin { left: f64, right: f64 },
}

/// Boundary condition at one perimeter node of a square model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Condition {
    Dirichlet,
    Neumann,
    Robin(f64),
}

/// How a user-supplied Robin coefficient is turned into a node weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RobinScaling {
    /// The coefficient is used as the node weight.
    #[default]
    Raw,
    /// The coefficient is multiplied by the mesh width.
    H,
}

impl RobinScaling {
    pub fn apply(self, beta: f64, h: f64) -> f64 {
        match self {
            RobinScaling::Raw => beta,
            RobinScaling::H => beta * h,
        }
    }
}

fn check_robin(beta: f64) -> Result<()> {
    if beta.is_finite() && beta >= 0.0 {
        Ok(())
    } else {
        Err(FormError::NegativeRobin(beta))
    }
}

/// Path `1 − 2 − … − n` with uniform edge weight.
pub fn path_graph(
    n: usize,
    edge_weight: f64,
    masses: Option<&[f64]>,
    killing: Option<&[f64]>,
) -> Result<GraphForm> {
    if n == 0 {
        return Err(FormError::BadDimension(
            "a path needs at least one node".into(),
        ));
    }
    let mass = masses.map_or_else(|| vec![1.0; n], <[f64]>::to_vec);
    let space = MeasureSpace::with_masses(mass)?.into_shared();
    let edges: Vec<_> = (1..n).map(|i| (i - 1, i, edge_weight)).collect();
    let g = GraphForm::from_edges(space, &edges)?;
    match killing {
        Some(c) => g.with_killing(c),
        None => Ok(g),
    }
}

/// Mesh width of the interval model with `n` interior points.
pub fn interval_step(n: usize) -> f64 {
    1.0 / (n as f64 + 1.0)
}

/// Interval space: nodes `x_0, …, x_{n+1}` on `[0, 1]`, interior mass `h`,
/// boundary mass `boundary_mass` (default `h/2`), boundary `{x_0, x_{n+1}}`.
pub fn interval_space(n: usize, boundary_mass: Option<f64>) -> Result<MeasureSpace> {
    if n < 2 {
        return Err(FormError::BadDimension(format!(
            "interval model needs n >= 2, got {n}"
        )));
    }
    let h = interval_step(n);
    let bm = boundary_mass.unwrap_or(h / 2.0);
    let mut mass = vec![h; n + 2];
    mass[0] = bm;
    mass[n + 1] = bm;
    let names = (0..n + 2).map(|i| format!("x{i}")).collect();
    MeasureSpace::new(names, mass, [0, n + 1].into_iter().collect())
}

/// Finite-difference Laplacian with potential on `[0, 1]`:
/// `Q(f) = Σ (f(x_{i+1}) − f(x_i))²/h + Σ V(x) m(x) f(x)²`, plus `β f²` at
/// the ends for Robin data. The potential has one entry per node.
pub fn interval_laplacian(
    n: usize,
    kind: BoundaryKind,
    potential: Option<&[f64]>,
    boundary_mass: Option<f64>,
) -> Result<QuadForm> {
    let space = interval_space(n, boundary_mass)?.into_shared();
    let h = interval_step(n);
    let len = n + 2;
    let edges: Vec<_> = (1..len).map(|i| (i - 1, i, 1.0 / h)).collect();
    let mut g = GraphForm::from_edges(space.clone(), &edges)?;
    if let Some(v) = potential {
        if v.len() != len {
            return Err(FormError::DimensionMismatch {
                expected: len,
                got: v.len(),
            });
        }
        if let Some(x) = v.iter().position(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(FormError::InvalidForm(format!(
                "potential must be nonnegative (node {x})"
            )));
        }
        g.c = DVector::from_fn(len, |x, _| v[x] * space.mass()[x]);
    }
    let support = match kind {
        BoundaryKind::Dirichlet => space.interior(),
        BoundaryKind::Neumann => NodeSet::all(len),
        BoundaryKind::Robin { left, right } => {
            check_robin(left)?;
            check_robin(right)?;
            g.c[0] += left;
            g.c[len - 1] += right;
            NodeSet::all(len)
        }
    };
    validated(g.with_support(support)?)
}

/// Kernel weight `h² / |x_i − x_j|^{1+2s}` of the fractional model.
pub fn fractional_weight(h: f64, distance: f64, s: f64) -> f64 {
    h * h / distance.powf(1.0 + 2.0 * s)
}

/// Discretized fractional Laplacian on `[0, 1]`: jump energy
/// `½ Σ_{i≠j} b(x_i, x_j)(f(x_i) − f(x_j))²` on the interval nodes.
/// Dirichlet data restrict the domain to interior nodes.
pub fn fractional_form(n: usize, s: f64, kind: BoundaryKind) -> Result<QuadForm> {
    if !(s > 0.0 && s < 1.0) {
        return Err(FormError::BadExponent(s));
    }
    let space = interval_space(n, None)?.into_shared();
    let h = interval_step(n);
    let len = n + 2;
    let b = DMatrix::from_fn(len, len, |i, j| {
        if i == j {
            0.0
        } else {
            fractional_weight(h, (i as f64 - j as f64).abs() * h, s)
        }
    });
    let mut g = GraphForm::new(space.clone(), b, DVector::zeros(len), NodeSet::all(len))?;
    let support = match kind {
        BoundaryKind::Dirichlet => space.interior(),
        BoundaryKind::Neumann => NodeSet::all(len),
        BoundaryKind::Robin { left, right } => {
            check_robin(left)?;
            check_robin(right)?;
            g.c[0] = left;
            g.c[len - 1] = right;
            NodeSet::all(len)
        }
    };
    validated(g.with_support(support)?)
}

/// Node index of grid point `(i, j)`, `0 ≤ i ≤ nx + 1`, `0 ≤ j ≤ ny + 1`.
pub fn grid2d_index(nx: usize, i: usize, j: usize) -> usize {
    j * (nx + 2) + i
}

/// Square space `[0, 1]²` with `(nx + 2) × (ny + 2)` nodes. Masses are the
/// areas of the dual cells: `h_x h_y` inside, half on edges, a quarter at
/// corners. Perimeter nodes form the boundary.
pub fn grid2d_space(nx: usize, ny: usize) -> Result<MeasureSpace> {
    if nx < 1 || ny < 1 {
        return Err(FormError::BadDimension(format!(
            "square model needs nx, ny >= 1, got {nx} x {ny}"
        )));
    }
    let (hx, hy) = (interval_step(nx), interval_step(ny));
    let (w, t) = (nx + 2, ny + 2);
    let mut names = Vec::with_capacity(w * t);
    let mut mass = Vec::with_capacity(w * t);
    let mut boundary = NodeSet::new();
    for j in 0..t {
        for i in 0..w {
            let edge_i = i == 0 || i == w - 1;
            let edge_j = j == 0 || j == t - 1;
            let mut m = hx * hy;
            if edge_i {
                m /= 2.0;
            }
            if edge_j {
                m /= 2.0;
            }
            if edge_i || edge_j {
                boundary.insert(grid2d_index(nx, i, j));
            }
            names.push(format!("{i},{j}"));
            mass.push(m);
        }
    }
    MeasureSpace::new(names, mass, boundary)
}

/// Five-point Laplacian on the closed square with per-perimeter-node
/// boundary conditions. `condition(i, j)` is called for every perimeter
/// node. Edges along the perimeter carry half weight, matching the dual
/// cells.
pub fn grid2d_laplacian(
    nx: usize,
    ny: usize,
    condition: impl Fn(usize, usize) -> Condition,
) -> Result<QuadForm> {
    let space = grid2d_space(nx, ny)?.into_shared();
    let (hx, hy) = (interval_step(nx), interval_step(ny));
    let (w, t) = (nx + 2, ny + 2);
    let mut edges = Vec::new();
    for j in 0..t {
        let half = if j == 0 || j == t - 1 { 0.5 } else { 1.0 };
        for i in 0..w - 1 {
            edges.push((
                grid2d_index(nx, i, j),
                grid2d_index(nx, i + 1, j),
                half * hy / hx,
            ));
        }
    }
    for i in 0..w {
        let half = if i == 0 || i == w - 1 { 0.5 } else { 1.0 };
        for j in 0..t - 1 {
            edges.push((
                grid2d_index(nx, i, j),
                grid2d_index(nx, i, j + 1),
                half * hx / hy,
            ));
        }
    }
    let mut g = GraphForm::from_edges(space.clone(), &edges)?;
    let mut support = NodeSet::all(space.len());
    for x in space.boundary().iter() {
        let (i, j) = (x % w, x / w);
        match condition(i, j) {
            Condition::Dirichlet => {
                support.remove(x);
            }
            Condition::Neumann => {}
            Condition::Robin(beta) => {
                check_robin(beta)?;
                g.c[x] = beta;
            }
        }
    }
    validated(g.with_support(support)?)
}

fn validated(g: GraphForm) -> Result<QuadForm> {
    let q = g.to_quad_form();
    q.with_support(q.support().clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomposition::active_main_part;
    use crate::domination::spectrum;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn paths() {
        let p3 = path_graph(3, 1.0, None, None).unwrap().to_quad_form();
        let f = DVector::from_column_slice(&[1.0, 2.0, 3.0]);
        assert_eq!(p3.energy(&f).unwrap(), 2.0);
        let p1 = path_graph(1, 1.0, None, None).unwrap().to_quad_form();
        assert_eq!(p1.scale(), 0.0);
        let k = path_graph(3, 1.0, None, Some(&[0.0, 5.0, 0.0]))
            .unwrap()
            .to_quad_form();
        assert_eq!(
            k.energy(&DVector::from_column_slice(&[0.0, 1.0, 0.0]))
                .unwrap(),
            7.0
        );
        assert!(matches!(
            path_graph(0, 1.0, None, None),
            Err(FormError::BadDimension(_))
        ));
    }

    #[test]
    fn dirichlet_interval_spectrum() {
        let n = 31;
        let h = interval_step(n);
        let q = interval_laplacian(n, BoundaryKind::Dirichlet, None, None).unwrap();
        let s = spectrum(&q);
        assert_eq!(s.len(), n);
        for (k, lam) in s.iter().enumerate() {
            let exact = 4.0 / (h * h) * (((k + 1) as f64) * PI * h / 2.0).sin().powi(2);
            assert_relative_eq!(*lam, exact, max_relative = 1e-11);
        }
        assert!((s[0] - PI * PI).abs() / (PI * PI) < 0.0026);
    }

    #[test]
    fn robin_zero_is_neumann() {
        let r = interval_laplacian(
            5,
            BoundaryKind::Robin {
                left: 0.0,
                right: 0.0,
            },
            None,
            None,
        )
        .unwrap();
        let n = interval_laplacian(5, BoundaryKind::Neumann, None, None).unwrap();
        assert_eq!(r.coeff(), n.coeff());
        assert_eq!(r.support(), n.support());
    }

    #[test]
    fn large_robin_approaches_dirichlet() {
        let r = spectrum(
            &interval_laplacian(
                31,
                BoundaryKind::Robin {
                    left: 1e8,
                    right: 1e8,
                },
                None,
                None,
            )
            .unwrap(),
        );
        let d = spectrum(&interval_laplacian(31, BoundaryKind::Dirichlet, None, None).unwrap());
        assert!((r[0] - d[0]).abs() < 1e-3);
    }

    #[test]
    fn interval_errors() {
        assert!(matches!(
            interval_laplacian(1, BoundaryKind::Neumann, None, None),
            Err(FormError::BadDimension(_))
        ));
        assert!(matches!(
            interval_laplacian(
                4,
                BoundaryKind::Robin {
                    left: -1.0,
                    right: 0.0
                },
                None,
                None
            ),
            Err(FormError::NegativeRobin(_))
        ));
        assert!(matches!(
            fractional_form(4, 1.0, BoundaryKind::Neumann),
            Err(FormError::BadExponent(_))
        ));
    }

    #[test]
    fn potential_weighted_by_mass() {
        let n = 4;
        let h = interval_step(n);
        let v = vec![2.0; n + 2];
        let q = interval_laplacian(n, BoundaryKind::Neumann, Some(&v), None).unwrap();
        let one = DVector::from_element(n + 2, 1.0);
        // constants only see the potential: Σ V m = 2 · (n h + h)
        assert_relative_eq!(
            q.energy(&one).unwrap(),
            2.0 * (n as f64 * h + h),
            max_relative = 1e-14
        );
    }

    #[test]
    fn fractional_kernel_decreases_with_distance() {
        let q = fractional_form(8, 0.5, BoundaryKind::Neumann).unwrap();
        for j in 2..10 {
            assert!(-q.coeff()[(0, j)] < -q.coeff()[(0, j - 1)]);
        }
    }

    #[test]
    fn fractional_dirichlet_main_part_is_neumann() {
        let d = fractional_form(8, 0.25, BoundaryKind::Dirichlet).unwrap();
        let n = fractional_form(8, 0.25, BoundaryKind::Neumann).unwrap();
        let m = active_main_part(&d).unwrap();
        assert_eq!(m.support(), n.support());
        assert!(m.max_diff_on(&n, &NodeSet::all(10)) <= 1e-12);
    }

    #[test]
    fn square_masses_sum_to_area() {
        let s = grid2d_space(3, 2).unwrap();
        assert_relative_eq!(s.mass().iter().sum::<f64>(), 1.0, max_relative = 1e-14);
        assert_eq!(s.boundary().len(), 2 * 5 + 2 * 4 - 4);
    }

    #[test]
    fn square_conditions() {
        let neumann = grid2d_laplacian(3, 3, |_, _| Condition::Neumann).unwrap();
        let zero_robin = grid2d_laplacian(3, 3, |_, _| Condition::Robin(0.0)).unwrap();
        assert_eq!(neumann.coeff(), zero_robin.coeff());
        assert!(neumann.is_markovian());
        let one = DVector::from_element(25, 1.0);
        assert!(neumann.energy(&one).unwrap().abs() < 1e-12);

        let dirichlet = grid2d_laplacian(3, 3, |_, _| Condition::Dirichlet).unwrap();
        let mixed = grid2d_laplacian(3, 3, |i, _| {
            if i == 0 {
                Condition::Dirichlet
            } else {
                Condition::Neumann
            }
        })
        .unwrap();
        let (sn, sm, sd) = (spectrum(&neumann), spectrum(&mixed), spectrum(&dirichlet));
        assert_eq!(sd.len(), 9);
        for k in 0..sd.len() {
            assert!(sn[k] <= sm[k] + 1e-10 && sm[k] <= sd[k] + 1e-10);
        }
        for k in 0..sm.len() {
            assert!(sn[k] <= sm[k] + 1e-10);
        }
    }
}
