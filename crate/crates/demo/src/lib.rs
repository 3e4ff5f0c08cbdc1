//! Browser bindings for the interactive page in `www/`.
//!
//! Three operations, each taking plain numbers and returning a JSON string:
//! regret curves of the learners on a 2-d set, the support point and
//! boundary curvature of an ellipse in a chosen direction, and a sampled
//! strong-convexity probe at a multiple of the smallest curvature.
//!
//! The `*_json` functions hold the logic so they can be tested natively;
//! the `#[wasm_bindgen]` wrappers only convert errors.

use std::sync::Arc;

use ftl_arena::adversaries::SourceSpec;
use ftl_arena::engine::{prefix_regrets, run_game};
use ftl_arena::geometry::weingarten_min_eig;
use ftl_arena::learners::{LearnerKind, LearnerSpec};
use ftl_arena::verify::geometry::strong_convexity_holds;
use ftl_arena::{ConstraintSet, Vector};
use nalgebra::DMatrix;
use serde_json::json;
use wasm_bindgen::prelude::*;

/// Largest horizon the page may request.
pub const MAX_ROUNDS: usize = 20_000;
const OUTLINE_POINTS: usize = 128;
const CURVE_POINTS: usize = 200;

fn ellipse(a: f64, b: f64, c: f64) -> Result<ConstraintSet, String> {
    let q = DMatrix::from_row_slice(2, 2, &[a, b, b, c]);
    ConstraintSet::ellipsoid(q).map_err(|e| e.to_string())
}

fn source(kind: &str, l: f64) -> Result<SourceSpec, String> {
    // the half-adversarial source needs d ≥ 3, so the planar page omits it
    Ok(match kind {
        "stochastic" => SourceSpec::stochastic(l),
        "worst_case" => SourceSpec::worst_case(),
        other => return Err(format!("unknown adversary `{other}`")),
    })
}

/// Per-round regret of FTL, FTRL and (A,B)-prod against one loss stream on
/// the ellipse `{w : wᵀQw ≤ 1}` with `Q = [[a, b], [b, c]]`, thinned to at
/// most 200 points.
pub fn regret_curves_json(a: f64, b: f64, c: f64, adversary: &str, l: f64, n: usize, seed: u64) -> Result<String, String> {
    if n == 0 || n > MAX_ROUNDS {
        return Err(format!("rounds must lie in 1..={MAX_ROUNDS}"));
    }
    let set = Arc::new(ellipse(a, b, c)?);
    let spec = source(adversary, l)?;
    let m = spec.declared_bound(2).map_err(|e| e.to_string())?;
    let step = n.div_ceil(CURVE_POINTS);
    let ts: Vec<usize> = (step..=n).step_by(step).collect();
    let mut series = Vec::new();
    for kind in [LearnerKind::Ftl, LearnerKind::Ftrl, LearnerKind::Abprod] {
        let mut learner = LearnerSpec::new(kind).build(&set, Some(n), m).map_err(|e| e.to_string())?;
        let mut src = spec.build(2, seed, 0).map_err(|e| e.to_string())?;
        let trace = run_game(learner.as_mut(), &mut src, n, false).map_err(|e| e.to_string())?;
        let regret = prefix_regrets(&trace);
        series.push(json!({
            "label": kind.as_str(),
            "regret": ts.iter().map(|&t| regret[t - 1]).collect::<Vec<_>>(),
        }));
    }
    Ok(json!({ "t": ts, "series": series }).to_string())
}

/// Outline of the ellipse, its support point and value in direction
/// `(cos φ, sin φ)`, the boundary curvature there and the smallest
/// curvature over the whole boundary.
pub fn ellipse_geometry_json(a: f64, b: f64, c: f64, phi: f64) -> Result<String, String> {
    let set = ellipse(a, b, c)?;
    let ConstraintSet::Ellipsoid(e) = &set else { unreachable!() };
    let outline: Vec<[f64; 2]> = (0..OUTLINE_POINTS)
        .map(|i| {
            let s = std::f64::consts::TAU * i as f64 / OUTLINE_POINTS as f64;
            let p = e.from_unit_ball(&Vector::from_vec(vec![s.cos(), s.sin()]));
            [p[0], p[1]]
        })
        .collect();
    let theta = Vector::from_vec(vec![phi.cos(), phi.sin()]);
    let s = set.support(&theta).map_err(|e| e.to_string())?;
    let curvature = weingarten_min_eig(e.q(), &s.maximizer).map_err(|e| e.to_string())?;
    Ok(json!({
        "outline": outline,
        "support_point": [s.maximizer[0], s.maximizer[1]],
        "support_value": s.value,
        "curvature": curvature,
        "lambda0": set.min_principal_curvature(),
    })
    .to_string())
}

/// Samples chords of the ellipse and tests the strong-convexity inequality
/// at `factor · λ₀`. Factors above 1 are expected to fail eventually.
pub fn convexity_probe_json(a: f64, b: f64, c: f64, factor: f64, samples: usize, seed: u64) -> Result<String, String> {
    let set = ellipse(a, b, c)?;
    let lambda0 = set.min_principal_curvature().expect("ellipse is smooth");
    let out = strong_convexity_holds(&set, factor * lambda0, samples, seed).map_err(|e| e.to_string())?;
    Ok(json!({ "lambda": factor * lambda0, "holds": out.passed, "detail": out.detail }).to_string())
}

#[wasm_bindgen]
pub fn regret_curves(a: f64, b: f64, c: f64, adversary: &str, l: f64, n: usize, seed: u64) -> Result<String, JsError> {
    regret_curves_json(a, b, c, adversary, l, n, seed).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn ellipse_geometry(a: f64, b: f64, c: f64, phi: f64) -> Result<String, JsError> {
    ellipse_geometry_json(a, b, c, phi).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn convexity_probe(a: f64, b: f64, c: f64, factor: f64, samples: usize, seed: u64) -> Result<String, JsError> {
    convexity_probe_json(a, b, c, factor, samples, seed).map_err(|e| JsError::new(&e))
}
