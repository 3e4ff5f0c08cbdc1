//! Support function, projection, curvature and strong-convexity checks.

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::sampling::{boundary_point, point_in, random_spd, unit_vector};
use crate::geometry::{
    strong_convexity_witness, weingarten_min_direction, weingarten_min_eig, ConstraintSet, Ellipsoid, Norm, Vector,
};
use crate::rng::substream;

use super::{guard, CheckOutcome};

pub fn default_checks(seed: u64) -> Vec<CheckOutcome> {
    let q = reference_q();
    let ball = ConstraintSet::ball(1.5, 3).expect("valid ball");
    vec![
        guard("support_properties", support_properties(1000, seed)),
        guard("ellipsoid_support_oracle", ellipsoid_support_oracle(200, seed)),
        guard("projection_properties", projection_properties(1000, seed)),
        guard("weingarten_vs_lambda0", weingarten_vs_lambda0(&q, 92, seed)),
        guard("strong_convexity_ball", strong_convexity_holds(&ball, 1.0 / 1.5, 100_000, seed)),
        guard(
            "strong_convexity_ellipsoid",
            strong_convexity_holds(&ConstraintSet::reference_ellipsoid(), lambda0(&q), 100_000, seed),
        ),
        guard("strong_convexity_violation", strong_convexity_violation(&q, 1.05, 100_000, seed)),
    ]
}

fn reference_q() -> DMatrix<f64> {
    match ConstraintSet::reference_ellipsoid() {
        ConstraintSet::Ellipsoid(e) => e.q().clone(),
        _ => unreachable!("the reference set is an ellipsoid"),
    }
}

fn lambda0(q: &DMatrix<f64>) -> f64 {
    ConstraintSet::ellipsoid(q.clone())
        .ok()
        .and_then(|s| s.min_principal_curvature())
        .unwrap_or(f64::NAN)
}

fn as_ellipsoid(set: &ConstraintSet) -> Result<&Ellipsoid> {
    match set {
        ConstraintSet::Ellipsoid(e) => Ok(e),
        other => Err(Error::Precondition(format!("expected an ellipsoid, got a {}", other.kind()))),
    }
}

/// A ball, the reference ellipsoid, a random ellipsoid, the simplex and a
/// random polytope.
fn sample_sets<R: Rng + ?Sized>(rng: &mut R) -> Result<Vec<ConstraintSet>> {
    let vertices: Vec<Vector> = (0..8).map(|_| Vector::from_fn(3, |_, _| rng.random_range(-1.0..1.0))).collect();
    Ok(vec![
        ConstraintSet::ball(1.5, 3)?,
        ConstraintSet::reference_ellipsoid(),
        ConstraintSet::ellipsoid(random_spd(4, 0.2, 5.0, rng))?,
        ConstraintSet::simplex(3)?,
        ConstraintSet::polytope(vertices)?,
    ])
}

/// Positive homogeneity, convexity and dominance `⟨w, θ⟩ ≤ Φ(θ)` of the
/// support function, and that the reported maximiser attains `Φ(θ)`.
pub fn support_properties(samples: usize, seed: u64) -> Result<CheckOutcome> {
    let mut rng = substream(seed, 0x6e01);
    let sets = sample_sets(&mut rng)?;
    let mut worst_hom: f64 = 0.0;
    let mut worst_convex: f64 = f64::NEG_INFINITY;
    let mut worst_dom: f64 = f64::NEG_INFINITY;
    let mut worst_attain: f64 = 0.0;
    for set in &sets {
        let d = set.dim();
        for _ in 0..samples {
            let a = unit_vector(d, &mut rng) * rng.random_range(0.01..10.0);
            let b = unit_vector(d, &mut rng) * rng.random_range(0.01..10.0);
            let c: f64 = rng.random_range(0.01..100.0);
            let g: f64 = rng.random();
            let sa = set.support(&a)?;
            let phi_a = sa.value;
            let phi_b = set.support(&b)?.value;
            let scale = 1f64.max(phi_a.abs() * c);
            worst_hom = worst_hom.max((set.support(&(&a * c))?.value - c * phi_a).abs() / scale);
            let mix = set.support(&(&a * g + &b * (1.0 - g)))?.value;
            worst_convex = worst_convex.max(mix - (g * phi_a + (1.0 - g) * phi_b));
            let w = point_in(set, &mut rng);
            worst_dom = worst_dom.max(w.dot(&a) - phi_a);
            worst_attain = worst_attain.max((sa.maximizer.dot(&a) - phi_a).abs() / 1f64.max(phi_a.abs()));
            if !set.contains(&sa.maximizer) {
                return Ok(CheckOutcome::new("support_properties", false, "maximiser outside the set"));
            }
        }
    }
    let passed = worst_hom <= 1e-12 && worst_convex <= 1e-9 && worst_dom <= 1e-9 && worst_attain <= 1e-12;
    Ok(CheckOutcome::new(
        "support_properties",
        passed,
        format!(
            "{} sets x {samples}: homogeneity {worst_hom:.2e}, convexity excess {worst_convex:.2e}, \
             dominance excess {worst_dom:.2e}, attainment {worst_attain:.2e}",
            sets.len()
        ),
    ))
}

/// Closed-form ellipsoid support against projected-gradient ascent
/// `w ← Π(w + s·θ̂)`, whose fixed points are exactly the maximisers.
pub fn ellipsoid_support_oracle(instances: usize, seed: u64) -> Result<CheckOutcome> {
    let mut rng = substream(seed, 0x6e02);
    let mut worst: f64 = 0.0;
    for i in 0..instances {
        let d = 2 + i % 3;
        let set = ConstraintSet::ellipsoid(random_spd(d, 0.1, 10.0, &mut rng))?;
        let theta = unit_vector(d, &mut rng) * rng.random_range(0.1..10.0);
        let step = theta.normalize() * set.diameter(Norm::L2);
        let mut w = set.project(&Vector::zeros(d))?;
        for _ in 0..500 {
            w = set.project(&(&w + &step))?;
        }
        let closed = set.support(&theta)?.value;
        worst = worst.max((closed - w.dot(&theta)).abs() / closed.abs().max(1.0));
    }
    Ok(CheckOutcome::new(
        "ellipsoid_support_oracle",
        worst <= 1e-8,
        format!("{instances} random ellipsoids (d = 2..4): worst relative gap {worst:.2e}"),
    ))
}

/// `Π(Π(x)) = Π(x)`, points of the set are fixed, and `‖x − Π(x)‖` is no
/// larger than the distance to any sampled point of the set.
pub fn projection_properties(samples: usize, seed: u64) -> Result<CheckOutcome> {
    let mut rng = substream(seed, 0x6e03);
    let sets = [
        ConstraintSet::ball(0.7, 4)?,
        ConstraintSet::reference_ellipsoid(),
        ConstraintSet::ellipsoid(random_spd(3, 0.05, 20.0, &mut rng))?,
    ];
    let (mut idem, mut fixed, mut excess): (f64, f64, f64) = (0.0, 0.0, f64::NEG_INFINITY);
    for set in &sets {
        let d = set.dim();
        for _ in 0..samples {
            let x = unit_vector(d, &mut rng) * rng.random_range(0.0..20.0);
            let p = set.project(&x)?;
            if !set.contains(&p) {
                return Ok(CheckOutcome::new("projection_properties", false, "projection left the set"));
            }
            idem = idem.max((set.project(&p)? - &p).amax());
            let inside = point_in(set, &mut rng);
            fixed = fixed.max((set.project(&inside)? - &inside).amax());
            excess = excess.max((&x - &p).norm() - (&x - &inside).norm());
        }
    }
    let passed = idem <= 1e-10 && fixed <= 1e-12 && excess <= 1e-9;
    Ok(CheckOutcome::new(
        "projection_properties",
        passed,
        format!(
            "{} sets x {samples}: idempotence {idem:.2e}, fixed points {fixed:.2e}, minimality excess {excess:.2e}",
            sets.len()
        ),
    ))
}

/// The `2d` axis endpoints `±vᵢ/√λᵢ` (where the curvature extremes sit)
/// plus `random` boundary points: every Weingarten minimum is at least
/// `λ₀ = λ_min/√λ_max` and the smallest one equals it to 1e-6.
pub fn weingarten_vs_lambda0(q: &DMatrix<f64>, random: usize, seed: u64) -> Result<CheckOutcome> {
    let set = ConstraintSet::ellipsoid(q.clone())?;
    let e = as_ellipsoid(&set)?;
    let lambda0 = set.min_principal_curvature().expect("ellipsoids have curvature");
    let mut rng = substream(seed, 0x6e04);
    let mut points = Vec::with_capacity(2 * e.dim() + random);
    for i in 0..e.dim() {
        let axis = e.eigenvectors().column(i) / e.eigenvalues()[i].sqrt();
        points.push(axis.clone());
        points.push(-axis);
    }
    points.extend((0..random).map(|_| boundary_point(&set, &mut rng).expect("smooth set")));
    let mut min = f64::INFINITY;
    for w in &points {
        let w = w / e.gauge(w);
        min = min.min(weingarten_min_eig(q, &w)?);
    }
    let gap = (min - lambda0).abs();
    Ok(CheckOutcome::new(
        "weingarten_vs_lambda0",
        gap <= 1e-6 && min >= lambda0 - 1e-9,
        format!("{} boundary points: min curvature {min:.9}, closed form {lambda0:.9}, gap {gap:.2e}", points.len()),
    ))
}

/// Samples `samples` instances of the λ-strong-convexity condition and
/// reports whether all hold. Chords are mostly between boundary points,
/// and `z` alternates between the outward normal at the chord point and a
/// uniformly random direction.
pub fn strong_convexity_holds(set: &ConstraintSet, lambda: f64, samples: usize, seed: u64) -> Result<CheckOutcome> {
    let name = format!("strong_convexity_{}", set.kind());
    let mut rng = substream(seed, 0x6e05);
    let d = set.dim();
    let mut failures = 0usize;
    for i in 0..samples {
        let on_boundary = i % 4 != 3;
        let draw = |rng: &mut _| -> Vector {
            if on_boundary {
                boundary_point(set, rng).unwrap_or_else(|| point_in(set, rng))
            } else {
                point_in(set, rng)
            }
        };
        let x = draw(&mut rng);
        let y = draw(&mut rng);
        let gamma: f64 = rng.random();
        let mid = &x * gamma + &y * (1.0 - gamma);
        let z = if i % 2 == 0 {
            outward_normal(set, &mid).unwrap_or_else(|| unit_vector(d, &mut rng))
        } else {
            unit_vector(d, &mut rng)
        };
        if !strong_convexity_witness(set, lambda, &x, &y, gamma, &z)? {
            failures += 1;
        }
    }
    Ok(CheckOutcome::new(
        name,
        failures == 0,
        format!("{samples} witnesses at lambda = {lambda:.7}: {failures} failed"),
    ))
}

/// Unit outward normal of the level set of the gauge through `x`.
fn outward_normal(set: &ConstraintSet, x: &Vector) -> Option<Vector> {
    let n = match set {
        ConstraintSet::Ball(_) => x.clone(),
        ConstraintSet::Ellipsoid(e) => e.q() * x,
        ConstraintSet::Polytope(_) => return None,
    };
    let norm = n.norm();
    (norm > 0.0).then(|| n / norm)
}

/// Searches for a failing strong-convexity instance at `factor·λ₀`. Each
/// candidate is a short chord through a boundary point `c` along its
/// flattest tangent direction, both ends pulled back onto the boundary,
/// with `γ = ½` and `z` the outward normal at `c`. Candidates cycle
/// through the axis endpoints and random boundary points; the same chord is
/// also required to pass at `λ₀` itself.
pub fn strong_convexity_violation(q: &DMatrix<f64>, factor: f64, max_samples: usize, seed: u64) -> Result<CheckOutcome> {
    let set = ConstraintSet::ellipsoid(q.clone())?;
    let e = as_ellipsoid(&set)?;
    let lambda0 = set.min_principal_curvature().expect("ellipsoids have curvature");
    let scale = set.diameter(Norm::L2);
    let mut rng = substream(seed, 0x6e06);
    let axes: Vec<Vector> = (0..e.dim())
        .flat_map(|i| {
            let a = e.eigenvectors().column(i) / e.eigenvalues()[i].sqrt();
            [a.clone(), -a]
        })
        .collect();
    for i in 0..max_samples {
        let c = if i < axes.len() { axes[i].clone() } else { boundary_point(&set, &mut rng).expect("smooth set") };
        let c = &c / e.gauge(&c);
        let (_, u) = weingarten_min_direction(q, &c)?;
        let half = 0.5 * scale * rng.random_range(0.01..0.2);
        let x = &c + &u * half;
        let y = &c - &u * half;
        let x = &x / e.gauge(&x);
        let y = &y / e.gauge(&y);
        let z = outward_normal(&set, &c).expect("ellipsoid normal");
        let holds_at_lambda0 = strong_convexity_witness(&set, lambda0, &x, &y, 0.5, &z)?;
        if !holds_at_lambda0 {
            return Ok(CheckOutcome::new(
                "strong_convexity_violation",
                false,
                format!("candidate {i} already fails at lambda0 = {lambda0:.7}"),
            ));
        }
        if !strong_convexity_witness(&set, factor * lambda0, &x, &y, 0.5, &z)? {
            return Ok(CheckOutcome::new(
                "strong_convexity_violation",
                true,
                format!(
                    "violation at {factor} x lambda0 found after {} candidates (chord length {:.4})",
                    i + 1,
                    (&x - &y).norm()
                ),
            ));
        }
    }
    Ok(CheckOutcome::new(
        "strong_convexity_violation",
        false,
        format!("no violation at {factor} x lambda0 in {max_samples} candidates"),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_pass() {
        for o in default_checks(11) {
            assert!(o.passed, "{o}");
        }
    }

    #[test]
    fn ball_is_not_more_convex_than_its_curvature() {
        let ball = ConstraintSet::ball(2.0, 2).unwrap();
        let o = strong_convexity_holds(&ball, 0.5 * 1.2, 20_000, 3).unwrap();
        assert!(!o.passed, "{o}");
    }
}
