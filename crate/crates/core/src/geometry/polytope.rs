use nalgebra::{DMatrix, DVector};

use super::Vector;

const WEIGHT_EPS: f64 = 1e-14;

/// Euclidean distance from `x` to `conv(points)`.
pub fn hull_distance(points: &[Vector], x: &Vector) -> f64 {
    let shifted: Vec<Vector> = points.iter().map(|p| p - x).collect();
    min_norm_point(&shifted).norm()
}

/// Wolfe's algorithm for the minimum-norm point of a convex hull. Finite
/// termination; the corral is kept affinely independent by construction.
fn min_norm_point(points: &[Vector]) -> Vector {
    let scale = points.iter().map(|p| p.norm_squared()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let start = points
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.norm_squared().total_cmp(&b.1.norm_squared()))
        .map(|(i, _)| i)
        .expect("at least one point");
    let mut corral = vec![start];
    let mut weights = vec![1.0];
    let mut x = points[start].clone();

    for _ in 0..(100 + 50 * points.len()) {
        let (j, score) = points
            .iter()
            .enumerate()
            .map(|(j, p)| (j, x.dot(p)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("at least one point");
        if x.norm_squared() - score <= 1e-13 * scale || corral.contains(&j) {
            break;
        }
        corral.push(j);
        weights.push(0.0);

        loop {
            let alpha = affine_minimizer(points, &corral);
            if alpha.iter().all(|&a| a > WEIGHT_EPS) {
                weights = alpha;
                break;
            }
            let mut theta = 1.0f64;
            let mut drop = 0;
            for (i, (&w, &a)) in weights.iter().zip(&alpha).enumerate() {
                if a <= WEIGHT_EPS && w - a > 0.0 {
                    let step = w / (w - a);
                    if step < theta {
                        theta = step;
                        drop = i;
                    }
                }
            }
            for (w, a) in weights.iter_mut().zip(&alpha) {
                *w = theta * a + (1.0 - theta) * *w;
            }
            weights[drop] = 0.0;
            let mut k = 0;
            corral.retain(|_| {
                let keep = weights[k] > WEIGHT_EPS;
                k += 1;
                keep
            });
            weights.retain(|&w| w > WEIGHT_EPS);
            let total: f64 = weights.iter().sum();
            weights.iter_mut().for_each(|w| *w /= total);
            if corral.len() <= 1 {
                break;
            }
        }
        x = corral.iter().zip(&weights).fold(Vector::zeros(x.len()), |acc, (&i, &w)| acc + &points[i] * w);
    }
    x
}

/// Affine weights (summing to one) of the minimum-norm point of the affine
/// hull of the selected points.
fn affine_minimizer(points: &[Vector], idx: &[usize]) -> Vec<f64> {
    let base = &points[idx[0]];
    if idx.len() == 1 {
        return vec![1.0];
    }
    let d = base.len();
    let k = idx.len() - 1;
    let b = DMatrix::from_fn(d, k, |r, c| points[idx[c + 1]][r] - base[r]);
    let rhs: DVector<f64> = -base;
    let beta = b.svd(true, true).solve(&rhs, 1e-12).unwrap_or_else(|_| DVector::zeros(k));
    let mut out = Vec::with_capacity(idx.len());
    out.push(1.0 - beta.sum());
    out.extend(beta.iter());
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_column_slice(xs)
    }

    #[test]
    fn distance_to_segment() {
        let seg = [v(&[-1.0, 0.0]), v(&[1.0, 0.0])];
        assert!((hull_distance(&seg, &v(&[0.3, 2.0])) - 2.0).abs() < 1e-12);
        assert!((hull_distance(&seg, &v(&[3.0, 0.0])) - 2.0).abs() < 1e-12);
        assert!(hull_distance(&seg, &v(&[0.3, 0.0])) < 1e-12);
    }

    #[test]
    fn interior_of_square_and_cube() {
        let square = [v(&[1.0, 1.0]), v(&[1.0, -1.0]), v(&[-1.0, 1.0]), v(&[-1.0, -1.0])];
        assert!(hull_distance(&square, &v(&[0.99, -0.3])) < 1e-12);
        assert!((hull_distance(&square, &v(&[2.0, 2.0])) - 2f64.sqrt()).abs() < 1e-12);
        let mut cube = Vec::new();
        for m in 0..8 {
            cube.push(v(&[(m & 1) as f64, (m >> 1 & 1) as f64, (m >> 2 & 1) as f64]));
        }
        assert!(hull_distance(&cube, &v(&[0.5, 0.5, 0.5])) < 1e-12);
        assert!((hull_distance(&cube, &v(&[0.5, 0.5, 1.5])) - 0.5).abs() < 1e-12);
    }
}
