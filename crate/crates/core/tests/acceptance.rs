//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero when any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sandwich_forms::capacity::{capacity, equilibrium_potential};
use sandwich_forms::decomposition::{active_main_part, is_killing_free, killing_part};
use sandwich_forms::domination::{
    dominates_semigroup, ouhabaz_equivalence_test, Spectral, EQUIVALENCE_TIMES,
};
use sandwich_forms::measure_rep::{
    equivalence_suite, is_local, is_positive, representing_measure, SAMPLES,
};
use sandwich_forms::models::{
    fractional_form, grid2d_laplacian, interval_laplacian, interval_step, path_graph, BoundaryKind,
    Condition,
};
use sandwich_forms::random;
use sandwich_forms::sandwich::{
    enumerate_sandwiched, killing_mode_check, pair_dominates, recover_pair, restricted_form,
    sandwich_check, two_sided_domination, AdmissiblePair,
};
use sandwich_forms::{DVector, NodeSet, QuadForm};

const SEED: u64 = 0x5eed_2025;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn max_coeff_gap(a: &QuadForm, b: &QuadForm) -> f64 {
    (a.coeff() - b.coeff()).abs().max()
}

fn decomposition_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst: f64 = 0.0;
    let mut bad = 0;
    for _ in 0..500 {
        let q = random::markov_form(&mut rng, 8);
        let qm = active_main_part(&q).unwrap();
        let qk = killing_part(&q).unwrap();
        for x in q.support().iter() {
            for y in q.support().iter() {
                let sum = qm.coeff()[(x, y)] + qk.coeff()[(x, y)];
                worst = worst.max((q.coeff()[(x, y)] - sum).abs());
                if x != y && qk.coeff()[(x, y)] != 0.0 {
                    bad += 1;
                }
            }
            if qk.coeff()[(x, x)] < -1e-12 {
                bad += 1;
            }
        }
        // rows of the main part sum to zero over its domain
        for x in qm.support().iter() {
            let row: f64 = qm.support().iter().map(|y| qm.coeff()[(x, y)]).sum();
            worst = worst.max(row.abs() / qm.scale().max(1.0));
        }
        if !is_killing_free(&qm).unwrap() {
            bad += 1;
        }
    }
    outcome(
        worst <= 1e-12 && bad == 0,
        format!("500 forms, max error {worst:.1e}, structural failures {bad}"),
    )
}

fn ouhabaz_equivalence() -> Outcome {
    let r = ouhabaz_equivalence_test(SEED, 200).unwrap();
    outcome(
        r.trials == 200 && r.disagreements.is_empty(),
        format!(
            "{} pairs, {} dominating, {} disagreements",
            r.trials,
            r.dominating,
            r.disagreements.len()
        ),
    )
}

fn sandwich_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut misses = Vec::new();
    for trial in 0..200 {
        let (q, qp, kind) = random::sandwich_instance(&mut rng);
        let v = sandwich_check(&q, &qp).unwrap();
        let (lo, hi) = two_sided_domination(&q, &qp, &EQUIVALENCE_TIMES, 1e-12).unwrap();
        if v.is_sandwiched != (lo.holds && hi.holds) {
            misses.push(format!("#{trial} {kind:?}"));
        }
    }
    let mut detail = format!("200 triples, {} disagreements", misses.len());
    if !misses.is_empty() {
        detail.push_str(&format!(" [{}]", misses.join(", ")));
    }
    outcome(misses.is_empty(), detail)
}

fn pair_order_equivalence() -> Outcome {
    let q = interval_laplacian(3, BoundaryKind::Dirichlet, None, None).unwrap();
    let list = enumerate_sandwiched(&q, &[0.0, 1.0, 2.0]).unwrap();
    let mut misses = 0;
    for (p1, f1) in &list {
        for (p2, f2) in &list {
            let order = pair_dominates(p1, p2, &q).unwrap();
            let semigroup = dominates_semigroup(f1, f2, &EQUIVALENCE_TIMES, 1e-12)
                .unwrap()
                .holds;
            if order != semigroup {
                misses += 1;
            }
        }
    }
    let n = list.len();
    outcome(
        misses == 0 && n == 16,
        format!(
            "{n} pairs on 5 nodes, {} comparisons, {misses} disagreements",
            n * n
        ),
    )
}

fn round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst_mu: f64 = 0.0;
    let mut bad_sets = 0;
    for _ in 0..100 {
        let (nx, ny) = (rng.gen_range(2..=4), rng.gen_range(2..=4));
        let q = grid2d_laplacian(nx, ny, |_, _| Condition::Dirichlet).unwrap();
        let qm = active_main_part(&q).unwrap();
        let n = q.len();
        let mut o = q.support().clone();
        let mut mu = DVector::zeros(n);
        for x in q.space().boundary().iter() {
            if rng.gen_bool(0.6) {
                o.insert(x);
                if rng.gen_bool(0.7) {
                    mu[x] = rng.gen_range(0.0..5.0);
                }
            }
        }
        let p = AdmissiblePair::new(o, mu).unwrap();
        let back = recover_pair(&q, &restricted_form(&qm, &p).unwrap()).unwrap();
        if back.o != p.o {
            bad_sets += 1;
        }
        for x in 0..n {
            // μ comes back as a difference of diagonal entries
            let scale = qm.coeff()[(x, x)].abs().max(1.0);
            worst_mu = worst_mu.max((back.mu[x] - p.mu[x]).abs() / scale);
        }
    }
    outcome(
        bad_sets == 0 && worst_mu <= 1e-12,
        format!("100 pairs, O mismatches {bad_sets}, max relative measure error {worst_mu:.1e}"),
    )
}

fn capacity_fixture() -> Outcome {
    let q = path_graph(3, 1.0, None, None).unwrap().to_quad_form();
    let a = NodeSet::singleton(0);
    let cap = capacity(&q, &a).unwrap();
    let e = equilibrium_potential(&q, &a).unwrap();
    let want = [1.0, 0.4, 0.2];
    let err = (0..3).map(|x| (e[x] - want[x]).abs()).fold(0.0, f64::max);
    outcome(
        (cap - 1.6).abs() <= 1e-10 && err <= 1e-10,
        format!(
            "cap {cap}, potential ({:.12}, {:.12}, {:.12})",
            e[0], e[1], e[2]
        ),
    )
}

fn robin_sandwich() -> Outcome {
    let n = 31;
    let times = [0.01, 0.1, 1.0];
    let neumann = interval_laplacian(n, BoundaryKind::Neumann, None, None).unwrap();
    let dirichlet = interval_laplacian(n, BoundaryKind::Dirichlet, None, None).unwrap();
    let (sn, sd) = (Spectral::new(&neumann), Spectral::new(&dirichlet));
    let (ln, ld) = (sn.eigenvalues(), sd.eigenvalues());
    let mut worst: f64 = f64::NEG_INFINITY;
    let mut interlace_ok = true;
    for beta in [0.1, 1.0, 10.0] {
        let robin = interval_laplacian(
            n,
            BoundaryKind::Robin {
                left: beta,
                right: beta,
            },
            None,
            None,
        )
        .unwrap();
        let sr = Spectral::new(&robin);
        for &t in &times {
            let (kn, kr, kd) = (
                sn.semigroup(t).unwrap(),
                sr.semigroup(t).unwrap(),
                sd.semigroup(t).unwrap(),
            );
            worst = worst.max((&kr - &kn).max()).max((&kd - &kr).max());
        }
        let lr = sr.eigenvalues();
        let tol = 1e-10 * robin.scale().max(1.0);
        for k in 0..ld.len() {
            if !(ln[k] <= lr[k] + tol && lr[k] <= ld[k] + tol) {
                interlace_ok = false;
            }
        }
    }
    // the largest entry of the wrong-sign differences must stay below 1e-12
    outcome(
        worst <= 1e-12 && interlace_ok,
        format!(
            "max wrong-sign kernel entry {worst:.1e}, interlacing {}",
            if interlace_ok { "holds" } else { "fails" }
        ),
    )
}

fn continuum_anchor() -> Outcome {
    let n = 31;
    let q = interval_laplacian(n, BoundaryKind::Dirichlet, None, None).unwrap();
    let lambda = Spectral::new(&q).eigenvalues()[0];
    let h = interval_step(n);
    let exact = 4.0 / (h * h) * (std::f64::consts::PI * h / 2.0).sin().powi(2);
    let pi2 = std::f64::consts::PI.powi(2);
    let rel = (lambda - pi2).abs() / pi2;
    outcome(
        (lambda - exact).abs() <= 1e-10 && rel <= 3e-3,
        format!(
            "lambda_1 {lambda:.12}, closed form {exact:.12}, {:.3}% from pi^2",
            100.0 * rel
        ),
    )
}

fn fractional_main_part() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut supports_ok = true;
    for n in [8, 16] {
        for s in [0.25, 0.5, 0.75] {
            let qm =
                active_main_part(&fractional_form(n, s, BoundaryKind::Dirichlet).unwrap()).unwrap();
            let neumann = fractional_form(n, s, BoundaryKind::Neumann).unwrap();
            supports_ok &= qm.support() == neumann.support();
            worst = worst.max(max_coeff_gap(&qm, &neumann));
        }
    }
    outcome(
        worst <= 1e-12 && supports_ok,
        format!("6 cases, max coefficient error {worst:.1e}"),
    )
}

fn appendix_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut disagreements = 0;
    let mut positive_local = 0;
    let mut bad_reconstruction = 0;
    for _ in 0..500 {
        let d = random::suite_form(&mut rng, 6);
        let suite = equivalence_suite(&d, SAMPLES, &mut rng);
        if !suite.all_agree() {
            disagreements += 1;
        }
        if is_positive(&d) && is_local(&d) {
            positive_local += 1;
            let mu = representing_measure(&d).unwrap();
            let rebuilt =
                QuadForm::diagonal(d.space().clone(), d.support().clone(), mu.as_slice()).unwrap();
            if rebuilt.block() != d.block() {
                bad_reconstruction += 1;
            }
        }
    }
    outcome(
        disagreements == 0 && bad_reconstruction == 0,
        format!(
            "500 forms, {disagreements} disagreements, {positive_local} positive local, {bad_reconstruction} inexact reconstructions"
        ),
    )
}

fn triviality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut bad = 0;
    for _ in 0..50 {
        let n = rng.gen_range(2..=8);
        let space = random::space(&mut rng, n).into_shared();
        let b = random::edge_weights(&mut rng, n, 0.6);
        let q = QuadForm::new(
            space,
            NodeSet::all(n),
            random::graph_coeff(&b, &DVector::zeros(n)),
        )
        .unwrap();
        let list = enumerate_sandwiched(&q, &[0.0, 1.0, 2.0]).unwrap();
        if list.len() != 1 || list[0].1.support() != q.support() || list[0].1.coeff() != q.coeff() {
            bad += 1;
        }
    }
    outcome(
        bad == 0,
        format!("50 boundary-free graphs, {bad} with more than Q itself"),
    )
}

fn killing_band() -> Outcome {
    let q = path_graph(3, 1.0, None, Some(&[0.0, 5.0, 0.0]))
        .unwrap()
        .to_quad_form();
    let qm = active_main_part(&q).unwrap();
    let mut ok = true;
    let mut parts = Vec::new();
    for (level, expected) in [(0.0, true), (2.5, true), (5.0, true), (6.0, false)] {
        let mut mu = DVector::zeros(3);
        mu[1] = level;
        let qp = restricted_form(&qm, &AdmissiblePair::new(NodeSet::all(3), mu).unwrap()).unwrap();
        let v = killing_mode_check(&q, &qp).unwrap();
        let (lo, hi) = two_sided_domination(&q, &qp, &EQUIVALENCE_TIMES, 1e-12).unwrap();
        ok &= v.is_sandwiched == expected && (lo.holds && hi.holds) == expected;
        parts.push(format!(
            "{level}: {}",
            if v.is_sandwiched { "accept" } else { "reject" }
        ));
    }
    outcome(ok, parts.join(", "))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        ("decomposition identity", decomposition_identity),
        ("Ouhabaz equivalence", ouhabaz_equivalence),
        (
            "sandwich characterization vs two-sided domination",
            sandwich_equivalence,
        ),
        ("pair order vs semigroup domination", pair_order_equivalence),
        ("pair recovery round trip", round_trip),
        ("capacity fixture", capacity_fixture),
        ("Robin sandwich and interlacing", robin_sandwich),
        ("continuum anchor", continuum_anchor),
        ("fractional main part", fractional_main_part),
        ("positive local form suite", appendix_suite),
        ("triviality without boundary or killing", triviality),
        ("killing band", killing_band),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let r = run();
        let status = if r.pass { "PASS" } else { "FAIL" };
        println!(
            "{status} criterion {:>2}: {name}: {} ({:.2}s)",
            i + 1,
            r.detail,
            start.elapsed().as_secs_f64()
        );
        if !r.pass {
            failed += 1;
        }
    }
    println!("{} of 12 criteria passed", 12 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
