//! Gauss–Legendre line rules and collapsed (conical) product rules on triangles.

use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "need at least one point");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, z);
        dp = if d != 0.0 { d } else { dp };
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn legendre(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Rule on [0, 1]; weights sum to 1.
#[derive(Debug, Clone)]
pub struct LineRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl LineRule {
    pub fn gauss(n: usize) -> LineRule {
        let (x, w) = gauss_legendre(n);
        LineRule {
            points: x.iter().map(|t| 0.5 * (t + 1.0)).collect(),
            weights: w.iter().map(|t| 0.5 * t).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Rule on the reference triangle {(ξ, η): ξ, η ≥ 0, ξ + η ≤ 1}; weights sum to 1/2.
#[derive(Debug, Clone)]
pub struct TriangleRule {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

impl TriangleRule {
    /// Collapsed Gauss product rule exact for polynomials of total degree ≤ `degree`.
    pub fn with_degree(degree: usize) -> TriangleRule {
        let n = (degree + 2).div_ceil(2).max(1);
        let line = LineRule::gauss(n);
        let mut points = Vec::with_capacity(n * n);
        let mut weights = Vec::with_capacity(n * n);
        for i in 0..n {
            let u = line.points[i];
            for j in 0..n {
                let v = line.points[j];
                points.push([u, (1.0 - u) * v]);
                weights.push(line.weights[i] * line.weights[j] * (1.0 - u));
            }
        }
        TriangleRule {
            points,
            weights,
            degree,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: usize) -> f64 {
        (1..=n).map(|k| k as f64).product()
    }

    #[test]
    fn line_rule_exactness() {
        for n in 1..8 {
            let r = LineRule::gauss(n);
            for k in 0..2 * n {
                let s: f64 = r
                    .points
                    .iter()
                    .zip(&r.weights)
                    .map(|(x, w)| w * x.powi(k as i32))
                    .sum();
                assert!((s - 1.0 / (k as f64 + 1.0)).abs() < 1e-14, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn triangle_rule_exactness() {
        for deg in [1, 2, 4, 6, 8, 10] {
            let r = TriangleRule::with_degree(deg);
            for i in 0..=deg {
                for j in 0..=(deg - i) {
                    let s: f64 = r
                        .points
                        .iter()
                        .zip(&r.weights)
                        .map(|(p, w)| w * p[0].powi(i as i32) * p[1].powi(j as i32))
                        .sum();
                    // ∫ ξ^i η^j = i! j! / (i + j + 2)!
                    let exact = factorial(i) * factorial(j) / factorial(i + j + 2);
                    assert!((s - exact).abs() < 1e-15, "deg={deg} i={i} j={j}");
                }
            }
        }
        assert_eq!(TriangleRule::with_degree(8).len(), 25);
    }
}
