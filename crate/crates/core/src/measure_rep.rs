//! Positivity, locality and monotonicity of bilinear forms on node
//! functions, and the representing measure of positive local forms.
//!
//! Coordinate indicators generate the cone of nonnegative functions, and
//! two distinct indicators have disjoint supports. This turns every
//! condition into a statement about the coefficient array: positive means
//! entrywise nonnegative, local means diagonal. The structural tests are
//! authoritative; the sampled tests evaluate the defining inequalities on
//! concrete functions and guard them.
//!
//! Extension from a dense sublattice has no content here: all
//! node functions are finitely supported and continuous, so a form is
//! determined by its values on indicators.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{FormError, Result};
use crate::form::QuadForm;
use crate::tol;

/// Default number of random samples per sampled test.
pub const SAMPLES: usize = 100;

fn eps(d: &QuadForm) -> f64 {
    tol::COEFF * d.scale().max(1.0)
}

fn sample_eps(d: &QuadForm) -> f64 {
    tol::SAMPLE * d.scale().max(1.0)
}

/// First support entry that is negative beyond tolerance.
fn negative_entry(d: &QuadForm) -> Option<(usize, usize, f64)> {
    let e = eps(d);
    for x in d.support().iter() {
        for y in d.support().iter() {
            let v = d.coeff()[(x, y)];
            if v < -e {
                return Some((x, y, v));
            }
        }
    }
    None
}

/// First nonzero off-diagonal support entry.
fn nonlocal_entry(d: &QuadForm) -> Option<(usize, usize, f64)> {
    let e = eps(d);
    for x in d.support().iter() {
        for y in d.support().iter() {
            let v = d.coeff()[(x, y)];
            if x != y && v.abs() > e {
                return Some((x, y, v));
            }
        }
    }
    None
}

fn indicator(n: usize, x: usize, sign: f64) -> DVector<f64> {
    let mut f = DVector::zeros(n);
    f[x] = sign;
    f
}

fn random_in_domain<R: Rng>(d: &QuadForm, rng: &mut R) -> DVector<f64> {
    // sparse samples so that disjoint supports actually occur
    DVector::from_fn(d.len(), |x, _| {
        if d.support().contains(x) && rng.gen_bool(0.6) {
            rng.gen_range(-1.0..1.0)
        } else {
            0.0
        }
    })
}

/// `q(f, g) ≥ 0` for all nonnegative `f`, `g`.
pub fn is_positive(d: &QuadForm) -> bool {
    let structural = negative_entry(d).is_none();
    debug_assert!(
        !structural || sampled_positive(d, SAMPLES, &mut ChaCha8Rng::seed_from_u64(7)),
        "entrywise nonnegative form failed a sampled positivity check"
    );
    structural
}

fn sampled_positive(d: &QuadForm, samples: usize, rng: &mut ChaCha8Rng) -> bool {
    (0..samples).all(|_| {
        let f = random_in_domain(d, rng).abs();
        let g = random_in_domain(d, rng).abs();
        d.bilinear_on_support(&f, &g) >= -sample_eps(d)
    })
}

/// `q(f, g) = 0` whenever `fg = 0`.
pub fn is_local(d: &QuadForm) -> bool {
    nonlocal_entry(d).is_none()
}

/// `|g| ≤ |f|` implies `q(g) ≤ q(f)`. The structural criterion (diagonal
/// with nonnegative entries) is returned; the sampled check must agree.
pub fn is_monotone<R: Rng>(d: &QuadForm, samples: usize, rng: &mut R) -> bool {
    let structural = is_local(d) && is_positive(d);
    let sampled = sampled_monotone(d, samples, rng);
    debug_assert_eq!(
        structural, sampled,
        "structural and sampled monotonicity disagree"
    );
    structural
}

fn sampled_monotone<R: Rng>(d: &QuadForm, samples: usize, rng: &mut R) -> bool {
    let n = d.len();
    let e = sample_eps(d);
    let holds = |f: &DVector<f64>, g: &DVector<f64>| {
        d.bilinear_on_support(g, g) <= d.bilinear_on_support(f, f) + e
    };
    let zero = DVector::zeros(n);
    let support = d.support().to_vec();
    for &x in &support {
        if !holds(&indicator(n, x, 1.0), &zero) {
            return false;
        }
        for &y in &support {
            if y <= x {
                continue;
            }
            // |δx + δy| = |δx − δy|
            let plus = indicator(n, x, 1.0) + indicator(n, y, 1.0);
            let minus = indicator(n, x, 1.0) - indicator(n, y, 1.0);
            if !holds(&plus, &minus) || !holds(&minus, &plus) {
                return false;
            }
        }
    }
    (0..samples).all(|_| {
        let f = random_in_domain(d, rng);
        let g = f.map(|v| v * rng.gen_range(-1.0..1.0));
        holds(&f, &g)
    })
}

/// The measure `μ(x) = q(δ_x)` with `q(f) = Σ μ(x) f(x)²`, defined exactly
/// for positive local forms. Zero off the support.
pub fn representing_measure(d: &QuadForm) -> Result<DVector<f64>> {
    if let Some((x, y, value)) = nonlocal_entry(d).or_else(|| negative_entry(d)) {
        return Err(FormError::NotRepresentable { x, y, value });
    }
    Ok(DVector::from_fn(d.len(), |x, _| {
        if d.support().contains(x) {
            d.coeff()[(x, x)].max(0.0)
        } else {
            0.0
        }
    }))
}

/// Verdicts for the five equivalent characterizations of positive local
/// forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EquivalenceSuite {
    /// (i) positive and local.
    pub positive_local: bool,
    /// (ii) `fg ≥ 0` implies `q(f, g) ≥ 0`.
    pub sign_condition: bool,
    /// (iii) `fg ≥ f'g'` implies `q(f, g) ≥ q(f', g')`.
    pub product_order: bool,
    /// (iv) monotone.
    pub monotone: bool,
    /// (v) represented by a measure.
    pub representable: bool,
}

impl EquivalenceSuite {
    pub fn verdicts(&self) -> [bool; 5] {
        [
            self.positive_local,
            self.sign_condition,
            self.product_order,
            self.monotone,
            self.representable,
        ]
    }

    pub fn all_agree(&self) -> bool {
        let v = self.verdicts();
        v.iter().all(|&b| b == v[0])
    }
}

fn sign_condition<R: Rng>(d: &QuadForm, samples: usize, rng: &mut R) -> bool {
    let n = d.len();
    let e = sample_eps(d);
    let support = d.support().to_vec();
    for &x in &support {
        for &y in &support {
            for s in [1.0, -1.0] {
                // x ≠ y: product zero; x = y: product s² ≥ 0
                let (f, g) = (indicator(n, x, 1.0), indicator(n, y, s));
                if (x != y || s > 0.0) && d.bilinear_on_support(&f, &g) < -e {
                    return false;
                }
            }
        }
    }
    (0..samples).all(|_| {
        let f = random_in_domain(d, rng);
        // g agrees with f in sign wherever both are nonzero
        let g = DVector::from_fn(n, |x, _| {
            let r = rng.gen_range(0.0..1.0);
            if f[x] > 0.0 {
                r
            } else if f[x] < 0.0 {
                -r
            } else if d.support().contains(x) {
                rng.gen_range(-1.0..1.0)
            } else {
                0.0
            }
        });
        d.bilinear_on_support(&f, &g) >= -e
    })
}

fn product_order<R: Rng>(d: &QuadForm, samples: usize, rng: &mut R) -> bool {
    let n = d.len();
    let e = sample_eps(d);
    let zero = DVector::zeros(n);
    let support = d.support().to_vec();
    // f = g = 0 against f'g' ≤ 0
    for &x in &support {
        for &y in &support {
            for s in [1.0, -1.0] {
                let (f2, g2) = (indicator(n, x, 1.0), indicator(n, y, s));
                let prod_nonpositive = x != y || s < 0.0;
                if prod_nonpositive
                    && d.bilinear_on_support(&zero, &zero) < d.bilinear_on_support(&f2, &g2) - e
                {
                    return false;
                }
            }
        }
    }
    (0..samples).all(|_| {
        let f = random_in_domain(d, rng);
        let g = random_in_domain(d, rng);
        // f' = f, g' = g − r·sign(f) with r ≥ 0, so f'g' = fg − r|f| ≤ fg
        let g2 = DVector::from_fn(n, |x, _| {
            if f[x] == 0.0 {
                g[x]
            } else {
                g[x] - rng.gen_range(0.0..1.0) * f[x].signum()
            }
        });
        d.bilinear_on_support(&f, &g) >= d.bilinear_on_support(&f, &g2) - e
    })
}

fn representable<R: Rng>(d: &QuadForm, samples: usize, rng: &mut R) -> bool {
    let Ok(mu) = representing_measure(d) else {
        return false;
    };
    (0..samples).all(|_| {
        let f = random_in_domain(d, rng);
        let direct = d.bilinear_on_support(&f, &f);
        let via_measure: f64 = (0..d.len()).map(|x| mu[x] * f[x] * f[x]).sum();
        (direct - via_measure).abs() <= sample_eps(d)
    })
}

/// Evaluates the five characterizations independently.
pub fn equivalence_suite<R: Rng>(d: &QuadForm, samples: usize, rng: &mut R) -> EquivalenceSuite {
    EquivalenceSuite {
        positive_local: is_positive(d) && is_local(d),
        sign_condition: sign_condition(d, samples, rng),
        product_order: product_order(d, samples, rng),
        monotone: sampled_monotone(d, samples, rng),
        representable: representable(d, samples, rng),
    }
}
