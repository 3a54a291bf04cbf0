//! Random instance generators for the randomized theorem checks.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::decomposition::{active_main_part, edge_closure, form_boundary};
use crate::form::QuadForm;
use crate::nodeset::NodeSet;
use crate::sandwich::{restricted_form, AdmissiblePair};
use crate::space::MeasureSpace;

/// Space with `n` nodes and masses drawn from `[0.5, 2]`.
pub fn space<R: Rng>(rng: &mut R, n: usize) -> MeasureSpace {
    let mass = (0..n).map(|_| rng.gen_range(0.5..2.0)).collect();
    MeasureSpace::with_masses(mass).expect("positive masses")
}

/// Symmetric edge weights: each pair is joined with probability `p`, with
/// weight in `[0.1, 2]`.
pub fn edge_weights<R: Rng>(rng: &mut R, n: usize, p: f64) -> DMatrix<f64> {
    let mut b = DMatrix::zeros(n, n);
    for x in 0..n {
        for y in (x + 1)..n {
            if rng.gen_bool(p) {
                let w = rng.gen_range(0.1..2.0);
                b[(x, y)] = w;
                b[(y, x)] = w;
            }
        }
    }
    b
}

/// `L(b) + diag(c)` as a full coefficient array.
pub fn graph_coeff(b: &DMatrix<f64>, c: &DVector<f64>) -> DMatrix<f64> {
    let n = b.nrows();
    DMatrix::from_fn(n, n, |x, y| {
        if x == y {
            b.row(x).sum() + c[x]
        } else {
            -b[(x, y)]
        }
    })
}

fn random_subset<R: Rng>(rng: &mut R, n: usize, p: f64) -> NodeSet {
    let mut s: NodeSet = (0..n).filter(|_| rng.gen_bool(p)).collect();
    if s.is_empty() {
        s.insert(rng.gen_range(0..n));
    }
    s
}

/// Random Markovian form on `2..=max_n` nodes with random edges, killing
/// on about half of the nodes, and a random nonempty support.
pub fn markov_form<R: Rng>(rng: &mut R, max_n: usize) -> QuadForm {
    let n = rng.gen_range(2..=max_n.max(2));
    let space = space(rng, n).into_shared();
    let b = edge_weights(rng, n, 0.5);
    let c = DVector::from_fn(n, |_, _| {
        if rng.gen_bool(0.5) {
            rng.gen_range(0.0..3.0)
        } else {
            0.0
        }
    });
    let support = if rng.gen_bool(0.5) {
        NodeSet::all(n)
    } else {
        random_subset(rng, n, 0.6)
    };
    QuadForm::new(space, support, graph_coeff(&b, &c)).expect("graph forms are valid")
}

/// Random pair `(q, q2)` of Markovian forms on at most `max_n` nodes.
///
/// About half of the pairs satisfy the coefficient criterion for
/// `q ⪯ q2` (smaller support, weaker edges, compensating killing); the rest
/// break it by a margin of at least 0.25 through one of: a support node
/// outside the domain of `q2`, a stronger edge, or a weaker diagonal.
pub fn domination_pair<R: Rng>(rng: &mut R, max_n: usize) -> (QuadForm, QuadForm) {
    let n = rng.gen_range(2..=max_n.max(2));
    let space = space(rng, n).into_shared();
    let b2 = edge_weights(rng, n, 0.6);
    let c2 = DVector::from_fn(n, |_, _| {
        if rng.gen_bool(0.5) {
            rng.gen_range(0.0..2.0)
        } else {
            0.0
        }
    });
    let s2 = if rng.gen_bool(0.4) {
        NodeSet::all(n)
    } else {
        random_subset(rng, n, 0.7)
    };

    // dominated candidate: support inside s2, edges scaled down
    let mut s: NodeSet = s2.iter().filter(|_| rng.gen_bool(0.8)).collect();
    if s.is_empty() {
        s.insert(s2.iter().next().expect("nonempty"));
    }
    let mut b = b2.map(|w| w);
    for x in 0..n {
        for y in (x + 1)..n {
            let f = if rng.gen_bool(0.5) {
                1.0
            } else {
                rng.gen_range(0.0..1.0)
            };
            b[(x, y)] *= f;
            b[(y, x)] = b[(x, y)];
        }
    }
    let mut extra = DVector::from_fn(n, |_, _| {
        if rng.gen_bool(0.3) {
            rng.gen_range(0.0..1.0)
        } else {
            0.0
        }
    });

    let violate = rng.gen_bool(0.5);
    if violate {
        let delta = rng.gen_range(0.25..1.0);
        let outside = NodeSet::all(n).difference(&s2);
        let inner = s.to_vec();
        let mut kinds = vec![1, 2];
        if !outside.is_empty() {
            kinds.push(0);
        }
        match *kinds.choose(rng).expect("nonempty") {
            0 => {
                let x = *outside.to_vec().choose(rng).expect("nonempty");
                s.insert(x);
            }
            1 => {
                // stronger edge between two domain nodes, or a node and itself
                // coupled to a fresh partner inside the domain of q2
                let x = *inner.choose(rng).expect("nonempty");
                let partners: Vec<usize> = s2.iter().filter(|&y| y != x).collect();
                match partners.choose(rng) {
                    Some(&y) => {
                        s.insert(y);
                        b[(x, y)] = b2[(x, y)] + delta;
                        b[(y, x)] = b[(x, y)];
                    }
                    None => extra[x] = -delta,
                }
            }
            _ => {
                let x = *inner.choose(rng).expect("nonempty");
                extra[x] = -delta;
            }
        }
    }

    // diag(q) = diag(q2) + extra, realised as killing on top of b
    let deg2 = DVector::from_fn(n, |x, _| b2.row(x).sum());
    let deg = DVector::from_fn(n, |x, _| b.row(x).sum());
    let mut c = DVector::from_fn(n, |x, _| deg2[x] + c2[x] + extra[x] - deg[x]);
    if c.iter().any(|&v| v < 0.0) {
        // a weaker diagonal would leave the Markov cone; keep it Markovian
        // by removing the offending amount from q2 instead
        let mut c2 = c2.clone();
        for x in 0..n {
            if c[x] < 0.0 {
                c2[x] -= c[x];
                c[x] = 0.0;
            }
        }
        let q2 = QuadForm::new(space.clone(), s2, graph_coeff(&b2, &c2)).expect("valid");
        let q = QuadForm::new(space, s, graph_coeff(&b, &c)).expect("valid");
        return (q, q2);
    }
    let q2 = QuadForm::new(space.clone(), s2, graph_coeff(&b2, &c2)).expect("valid");
    let q = QuadForm::new(space, s, graph_coeff(&b, &c)).expect("valid");
    (q, q2)
}

/// Classes of candidate forms produced by [`sandwich_instance`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CandidateKind {
    /// `Q` itself.
    Same,
    /// `Q^(M)` itself.
    MainPart,
    /// `Q^(M)_{O,μ}` for a random admissible boundary pair.
    Pair,
    /// A pair whose measure also charges the domain of `Q`.
    ChargedInterior,
    /// A pair whose `O` misses part of the domain of `Q`.
    SmallSupport,
    /// A pair with an extra node outside the edge closure.
    OutsideClosure,
    /// `Q^(M)` with an edge inside the domain of `Q` weakened.
    WeakInnerEdge,
    /// `Q^(M)` with an edge from the domain of `Q` to a boundary node
    /// weakened.
    WeakBoundaryEdge,
}

/// Random killing-free form `Q` on 3..=7 nodes with at least one boundary
/// node, together with a candidate `Q'` of a random [`CandidateKind`].
pub fn sandwich_instance<R: Rng>(rng: &mut R) -> (QuadForm, QuadForm, CandidateKind) {
    loop {
        let n = rng.gen_range(3..=7);
        let space = space(rng, n).into_shared();
        let mut b = edge_weights(rng, n, 0.5);
        // keep a spanning path so most nodes are coupled to the domain
        for x in 1..n {
            if rng.gen_bool(0.8) && b[(x - 1, x)] == 0.0 {
                let w = rng.gen_range(0.1..2.0);
                b[(x - 1, x)] = w;
                b[(x, x - 1)] = w;
            }
        }
        let interior = random_subset(rng, n, 0.5);
        let coeff = graph_coeff(&b, &DVector::zeros(n));
        let q = QuadForm::new(space.clone(), interior.clone(), coeff).expect("valid");
        let boundary = form_boundary(&q);
        if boundary.is_empty() {
            continue;
        }
        let qm = active_main_part(&q).expect("Markovian");
        let outside = NodeSet::all(n).difference(&edge_closure(&q));

        let random_pair = |rng: &mut R| {
            let mut o = interior.clone();
            let mut mu = DVector::zeros(n);
            for x in boundary.iter() {
                if rng.gen_bool(0.6) {
                    o.insert(x);
                    if rng.gen_bool(0.6) {
                        mu[x] = rng.gen_range(0.0..3.0);
                    }
                }
            }
            AdmissiblePair::new(o, mu).expect("valid pair")
        };

        let mut kinds = vec![
            CandidateKind::Same,
            CandidateKind::MainPart,
            CandidateKind::Pair,
            CandidateKind::Pair,
            CandidateKind::ChargedInterior,
            CandidateKind::WeakBoundaryEdge,
        ];
        if interior.len() > 1 {
            kinds.push(CandidateKind::SmallSupport);
        }
        if !outside.is_empty() {
            kinds.push(CandidateKind::OutsideClosure);
        }
        let inner_edges: Vec<(usize, usize)> = interior
            .iter()
            .flat_map(|x| interior.iter().map(move |y| (x, y)))
            .filter(|&(x, y)| x < y && b[(x, y)] > 0.0)
            .collect();
        if !inner_edges.is_empty() {
            kinds.push(CandidateKind::WeakInnerEdge);
        }
        let kind = *kinds.choose(rng).expect("nonempty");

        let candidate = match kind {
            CandidateKind::Same => q.clone(),
            CandidateKind::MainPart => qm.clone(),
            CandidateKind::Pair => restricted_form(&qm, &random_pair(rng)).expect("admissible"),
            CandidateKind::ChargedInterior => {
                let mut p = random_pair(rng);
                let x = *interior.to_vec().choose(rng).expect("nonempty");
                p.mu[x] = rng.gen_range(0.25..2.0);
                restricted_form(&qm, &p).expect("admissible")
            }
            CandidateKind::SmallSupport => {
                let mut p = random_pair(rng);
                let x = *interior.to_vec().choose(rng).expect("nonempty");
                p.o.remove(x);
                p.mu[x] = 0.0;
                restricted_form(&qm, &p).expect("admissible")
            }
            CandidateKind::OutsideClosure => {
                let p = random_pair(rng);
                let base = restricted_form(&qm, &p).expect("admissible");
                let x = *outside.to_vec().choose(rng).expect("nonempty");
                let mut support = base.support().clone();
                support.insert(x);
                let mut coeff = base.coeff().clone();
                coeff[(x, x)] += rng.gen_range(0.0..1.0);
                QuadForm::new(space.clone(), support, coeff).expect("valid")
            }
            CandidateKind::WeakInnerEdge => {
                let &(x, y) = inner_edges.choose(rng).expect("nonempty");
                weaken(&qm, x, y, rng.gen_range(0.25..1.0) * b[(x, y)])
            }
            CandidateKind::WeakBoundaryEdge => {
                let edges: Vec<(usize, usize)> = interior
                    .iter()
                    .flat_map(|x| boundary.iter().map(move |z| (x, z)))
                    .filter(|&(x, z)| b[(x, z)] > 0.0)
                    .collect();
                let &(x, z) = edges.choose(rng).expect("boundary nodes are coupled");
                weaken(&qm, x, z, rng.gen_range(0.25..1.0) * b[(x, z)])
            }
        };
        return (q, candidate, kind);
    }
}

/// Adds `eps` to the off-diagonal entry `(x, y)`, which weakens the edge
/// and leaves the diagonal untouched.
fn weaken(q: &QuadForm, x: usize, y: usize, eps: f64) -> QuadForm {
    let mut coeff = q.coeff().clone();
    coeff[(x, y)] += eps;
    coeff[(y, x)] += eps;
    QuadForm::new(q.space().clone(), q.support().clone(), coeff).expect("valid")
}

/// Form for the appendix suite: diagonal, graph, or diagonal plus a small
/// off-diagonal perturbation of either sign.
pub fn suite_form<R: Rng>(rng: &mut R, max_n: usize) -> QuadForm {
    let n = rng.gen_range(2..=max_n.max(2));
    let space = space(rng, n).into_shared();
    let support = if rng.gen_bool(0.7) {
        NodeSet::all(n)
    } else {
        random_subset(rng, n, 0.7)
    };
    let diag = DVector::from_fn(n, |_, _| {
        if rng.gen_bool(0.8) {
            rng.gen_range(0.0..3.0)
        } else {
            0.0
        }
    });
    let mut coeff = DMatrix::from_diagonal(&diag);
    match rng.gen_range(0..3) {
        0 => {}
        1 => coeff = graph_coeff(&edge_weights(rng, n, 0.6), &diag),
        _ => {
            let s = support.to_vec();
            if s.len() >= 2 {
                let (x, y) = (s[0], s[1]);
                let eps = if rng.gen_bool(0.5) { 1e-3 } else { -1e-3 } * rng.gen_range(1.0..100.0);
                coeff[(x, y)] = eps;
                coeff[(y, x)] = eps;
            }
        }
    }
    QuadForm::new_indefinite(space, support, coeff).expect("symmetric")
}
