//! Random points in and on constraint sets, used by the property suites.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use super::{ConstraintSet, Vector};

pub fn gaussian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vector {
    Vector::from_fn(dim, |_, _| StandardNormal.sample(rng))
}

/// Uniform on the unit sphere `S^{dim-1}`.
pub fn unit_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vector {
    loop {
        let g = gaussian(dim, rng);
        let n = g.norm();
        if n > 0.0 {
            return g / n;
        }
    }
}

/// A point of the set. Uniform for balls and ellipsoids; a flat-Dirichlet
/// mixture of vertices for polytopes.
pub fn point_in<R: Rng + ?Sized>(set: &ConstraintSet, rng: &mut R) -> Vector {
    match set {
        ConstraintSet::Ball(b) => {
            let d = set.dim();
            let r: f64 = rng.random::<f64>().powf(1.0 / d as f64);
            unit_vector(d, rng) * (r * b.radius())
        }
        ConstraintSet::Ellipsoid(e) => {
            let d = set.dim();
            let r: f64 = rng.random::<f64>().powf(1.0 / d as f64);
            e.from_unit_ball(&(unit_vector(d, rng) * r))
        }
        ConstraintSet::Polytope(p) => {
            let weights: Vec<f64> = p.vertices().iter().map(|_| Exp1.sample(rng)).collect();
            let total: f64 = weights.iter().sum();
            p.vertices()
                .iter()
                .zip(&weights)
                .fold(Vector::zeros(set.dim()), |acc, (v, w)| acc + v * (w / total))
        }
    }
}

/// A boundary point of a ball or ellipsoid (not uniform in surface measure
/// for ellipsoids). `None` for polytopes.
pub fn boundary_point<R: Rng + ?Sized>(set: &ConstraintSet, rng: &mut R) -> Option<Vector> {
    let d = set.dim();
    match set {
        ConstraintSet::Ball(b) => Some(unit_vector(d, rng) * b.radius()),
        ConstraintSet::Ellipsoid(e) => {
            let w = e.from_unit_ball(&unit_vector(d, rng));
            // renormalise away rounding so the point sits on the level set
            let g = e.gauge(&w);
            Some(w / g)
        }
        ConstraintSet::Polytope(_) => None,
    }
}

/// Random symmetric positive-definite matrix with eigenvalues drawn from
/// `[min_eig, max_eig]` and a Haar-ish random eigenbasis.
pub fn random_spd<R: Rng + ?Sized>(dim: usize, min_eig: f64, max_eig: f64, rng: &mut R) -> DMatrix<f64> {
    let g = DMatrix::<f64>::from_fn(dim, dim, |_, _| StandardNormal.sample(rng));
    let q = g.qr().q();
    let eig = Vector::from_fn(dim, |_, _| min_eig + (max_eig - min_eig) * rng.random::<f64>());
    let m: DMatrix<f64> = &q * DMatrix::from_diagonal(&eig) * q.transpose();
    (&m + m.transpose()) * 0.5
}
