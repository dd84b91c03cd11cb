//! Brute-force references shared by the metric, calibration and geometry suites.

use bacycle::structure::Vec3;
use nalgebra::{Matrix2, Matrix4, SymmetricEigen, Vector2, Vector3};
use rand::Rng;

pub fn oracle_pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (sx, sy): (f64, f64) = (x.iter().sum(), y.iter().sum());
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let sxx: f64 = x.iter().map(|a| a * a).sum();
    let syy: f64 = y.iter().map(|b| b * b).sum();
    (n * sxy - sx * sy) / ((n * sxx - sx * sx).sqrt() * (n * syy - sy * sy).sqrt())
}

/// 1-based rank as (number below) + (ties incl. self + 1) / 2.
pub fn oracle_ranks(x: &[f64]) -> Vec<f64> {
    x.iter()
        .map(|v| {
            let below = x.iter().filter(|w| *w < v).count() as f64;
            let equal = x.iter().filter(|w| *w == v).count() as f64;
            below + (equal + 1.0) / 2.0
        })
        .collect()
}

pub fn oracle_auroc(preds: &[f64], labels: &[f64]) -> f64 {
    let (mut wins, mut pairs) = (0.0, 0.0);
    for (p, l) in preds.iter().zip(labels) {
        if *l <= 0.0 {
            continue;
        }
        for (q, m) in preds.iter().zip(labels) {
            if *m > 0.0 {
                continue;
            }
            pairs += 1.0;
            if p > q {
                wins += 1.0;
            } else if p == q {
                wins += 0.5;
            }
        }
    }
    wins / pairs
}

pub fn oracle_rmse(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (sx, sy): (f64, f64) = (x.iter().sum(), y.iter().sum());
    let sxx: f64 = x.iter().map(|a| a * a).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let sol = Matrix2::new(sxx, sx, sx, n).lu().solve(&Vector2::new(sxy, sy)).unwrap();
    let sse: f64 = x.iter().zip(y).map(|(a, b)| (b - sol[0] * a - sol[1]).powi(2)).sum();
    (sse / n).sqrt()
}

/// Best MAE over every line through two points.
pub fn oracle_mae(x: &[f64], y: &[f64]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..x.len() {
        for j in 0..x.len() {
            let slope = if x[i] == x[j] {
                0.0
            } else {
                (y[i] - y[j]) / (x[i] - x[j])
            };
            let b = y[i] - slope * x[i];
            let mae = x.iter().zip(y).map(|(a, c)| (c - slope * a - b).abs()).sum::<f64>() / x.len() as f64;
            best = best.min(mae);
        }
    }
    best
}

pub fn small_vectors(rng: &mut rand_chacha::ChaCha8Rng) -> (Vec<f64>, Vec<f64>) {
    let n = rng.random_range(4..12);
    // Coarse values force ties.
    let x: Vec<f64> = (0..n).map(|_| (rng.random_range(-6..6) as f64) * 0.5).collect();
    let y: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
    (x, y)
}

/// Best L1 objective over a dense log-kT grid with the median bias, refined
/// around the best cell.
pub fn grid_objective(pairs: &[(f64, f64)]) -> f64 {
    let objective = |kt: f64| {
        let mut res: Vec<f64> = pairs.iter().map(|(r, y)| y + kt * r).collect();
        res.sort_by(f64::total_cmp);
        let n = res.len();
        let b = if n % 2 == 1 {
            res[n / 2]
        } else {
            0.5 * (res[n / 2 - 1] + res[n / 2])
        };
        pairs.iter().map(|(r, y)| (y - (-kt * r + b)).abs()).sum::<f64>()
    };
    let (lo, hi) = (1e-4f64.ln(), 1e4f64.ln());
    let steps = 4000;
    let mut best = (f64::INFINITY, 0.0);
    for i in 0..=steps {
        let u = lo + (hi - lo) * i as f64 / steps as f64;
        let v = objective(u.exp());
        if v < best.0 {
            best = (v, u);
        }
    }
    let h = (hi - lo) / steps as f64;
    for i in 0..=2000 {
        let u = best.1 - h + 2.0 * h * i as f64 / 2000.0;
        best.0 = best.0.min(objective(u.exp()));
    }
    best.0
}

/// RMSD from the largest eigenvalue of Horn's quaternion matrix.
pub fn horn_rmsd(a: &[Vec3], b: &[Vec3]) -> f64 {
    let n = a.len() as f64;
    let centre = |p: &[Vec3]| p.iter().map(|v| Vector3::new(v[0], v[1], v[2])).sum::<Vector3<f64>>() / n;
    let (ca, cb) = (centre(a), centre(b));
    let xs: Vec<Vector3<f64>> = a.iter().map(|v| Vector3::new(v[0], v[1], v[2]) - ca).collect();
    let ys: Vec<Vector3<f64>> = b.iter().map(|v| Vector3::new(v[0], v[1], v[2]) - cb).collect();
    let mut s = [[0.0; 3]; 3];
    for (x, y) in xs.iter().zip(&ys) {
        for i in 0..3 {
            for j in 0..3 {
                s[i][j] += x[i] * y[j];
            }
        }
    }
    let [[sxx, sxy, sxz], [syx, syy, syz], [szx, szy, szz]] = s;
    #[rustfmt::skip]
    let m = Matrix4::new(
        sxx + syy + szz, syz - szy, szx - sxz, sxy - syx,
        syz - szy, sxx - syy - szz, sxy + syx, szx + sxz,
        szx - sxz, sxy + syx, -sxx + syy - szz, syz + szy,
        sxy - syx, szx + sxz, syz + szy, -sxx - syy + szz,
    );
    let lambda = SymmetricEigen::new(m).eigenvalues.max();
    let e0: f64 = xs.iter().map(|v| v.norm_squared()).sum::<f64>() + ys.iter().map(|v| v.norm_squared()).sum::<f64>();
    ((e0 - 2.0 * lambda).max(0.0) / n).sqrt()
}

pub fn random_points(rng: &mut rand_chacha::ChaCha8Rng, n: usize) -> Vec<Vec3> {
    (0..n)
        .map(|_| {
            [
                rng.random_range(-10.0..10.0),
                rng.random_range(-10.0..10.0),
                rng.random_range(-10.0..10.0),
            ]
        })
        .collect()
}
