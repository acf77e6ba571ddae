//! Independent oracles shared by unit tests.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::matrix::ComplexMatrix;

pub fn random_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// Eigenvalues (descending) of a Hermitian matrix of order <= 3, from the
/// roots of its characteristic polynomial.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Vec<f64> {
    let n = m.rows();
    assert_eq!(n, m.cols());
    let g = |i: usize, j: usize| m.get(i, j);
    let mut roots = match n {
        1 => vec![g(0, 0).re],
        2 => {
            let tr = g(0, 0).re + g(1, 1).re;
            let det = (g(0, 0) * g(1, 1) - g(0, 1) * g(1, 0)).re;
            let disc = (tr * tr - 4.0 * det).max(0.0).sqrt();
            vec![(tr + disc) / 2.0, (tr - disc) / 2.0]
        }
        3 => {
            // λ³ + b λ² + c λ + d
            let tr = (g(0, 0) + g(1, 1) + g(2, 2)).re;
            let m2 = m.matmul(m).unwrap();
            let tr2 = (m2.get(0, 0) + m2.get(1, 1) + m2.get(2, 2)).re;
            let det = (g(0, 0) * (g(1, 1) * g(2, 2) - g(1, 2) * g(2, 1))
                - g(0, 1) * (g(1, 0) * g(2, 2) - g(1, 2) * g(2, 0))
                + g(0, 2) * (g(1, 0) * g(2, 1) - g(1, 1) * g(2, 0)))
            .re;
            let (b, c, d) = (-tr, 0.5 * (tr * tr - tr2), -det);
            let p = |x: f64| ((x + b) * x + c) * x + d;
            let dp = |x: f64| (3.0 * x + 2.0 * b) * x + c;
            // depressed cubic t³ + pt + q with x = t - b/3
            let pp = c - b * b / 3.0;
            let qq = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
            let r = (-pp / 3.0).max(0.0).sqrt();
            let mut xs = Vec::new();
            if r == 0.0 {
                xs = vec![-b / 3.0; 3];
            } else {
                let arg = (-qq / (2.0 * r * r * r)).clamp(-1.0, 1.0);
                let phi = arg.acos();
                for k in 0..3 {
                    let t = 2.0 * r * ((phi - 2.0 * std::f64::consts::PI * k as f64) / 3.0).cos();
                    xs.push(t - b / 3.0);
                }
            }
            for x in xs.iter_mut() {
                for _ in 0..4 {
                    let d = dp(*x);
                    if d.abs() > 1e-300 {
                        let step = p(*x) / d;
                        if step.is_finite() {
                            *x -= step;
                        }
                    }
                }
            }
            xs
        }
        _ => panic!("oracle only handles order <= 3"),
    };
    roots.sort_by(|a, b| b.total_cmp(a));
    roots
}
