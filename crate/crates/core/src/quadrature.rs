//! Orthonormal Jacobi polynomials and Gauss rules on the line and the reference triangle.

use nalgebra::{DMatrix, SymmetricEigen};

/// `ln Gamma(x)` for `x > 0` (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    const C: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = C[0];
    let t = x + 7.5;
    for (i, c) in C.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

fn jacobi_norm(alpha: f64, beta: f64) -> f64 {
    let lg = ln_gamma(alpha + 1.0) + ln_gamma(beta + 1.0) - ln_gamma(alpha + beta + 1.0);
    2f64.powf(alpha + beta + 1.0) / (alpha + beta + 1.0) * lg.exp()
}

/// Orthonormal Jacobi polynomial `P_n^(alpha, beta)` at each `x`.
pub fn jacobi_p(x: &[f64], alpha: f64, beta: f64, n: usize) -> Vec<f64> {
    let gamma0 = jacobi_norm(alpha, beta);
    let p0 = 1.0 / gamma0.sqrt();
    if n == 0 {
        return vec![p0; x.len()];
    }
    let gamma1 = (alpha + 1.0) * (beta + 1.0) / (alpha + beta + 3.0) * gamma0;
    x.iter()
        .map(|&xi| {
            let mut pm = p0;
            let mut p = ((alpha + beta + 2.0) * xi / 2.0 + (alpha - beta) / 2.0) / gamma1.sqrt();
            let mut aold =
                2.0 / (2.0 + alpha + beta) * ((alpha + 1.0) * (beta + 1.0) / (alpha + beta + 3.0)).sqrt();
            for i in 1..n {
                let fi = i as f64;
                let h1 = 2.0 * fi + alpha + beta;
                let anew = 2.0 / (h1 + 2.0)
                    * ((fi + 1.0) * (fi + 1.0 + alpha + beta) * (fi + 1.0 + alpha) * (fi + 1.0 + beta)
                        / (h1 + 1.0)
                        / (h1 + 3.0))
                        .sqrt();
                let bnew = -(alpha * alpha - beta * beta) / h1 / (h1 + 2.0);
                let next = (-aold * pm + (xi - bnew) * p) / anew;
                pm = p;
                p = next;
                aold = anew;
            }
            p
        })
        .collect()
}

/// Derivative of [`jacobi_p`].
pub fn grad_jacobi_p(x: &[f64], alpha: f64, beta: f64, n: usize) -> Vec<f64> {
    if n == 0 {
        return vec![0.0; x.len()];
    }
    let f = ((n as f64) * (n as f64 + alpha + beta + 1.0)).sqrt();
    jacobi_p(x, alpha + 1.0, beta + 1.0, n - 1)
        .into_iter()
        .map(|v| f * v)
        .collect()
}

/// `n + 1` point Gauss rule for weight `(1-x)^alpha (1+x)^beta` (Golub-Welsch).
pub fn jacobi_gq(alpha: f64, beta: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    if n == 0 {
        return (vec![-(alpha - beta) / (alpha + beta + 2.0)], vec![2.0]);
    }
    let m = n + 1;
    let mut j = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        let h1 = 2.0 * i as f64 + alpha + beta;
        j[(i, i)] = if (alpha + beta).abs() < 10.0 * f64::EPSILON && i == 0 {
            0.0
        } else {
            -(alpha * alpha - beta * beta) / (h1 + 2.0) / h1
        };
        if i + 1 < m {
            let k = (i + 1) as f64;
            let off = 2.0 / (h1 + 2.0)
                * (k * (k + alpha + beta) * (k + alpha) * (k + beta) / (h1 + 1.0) / (h1 + 3.0)).sqrt();
            j[(i, i + 1)] = off;
            j[(i + 1, i)] = off;
        }
    }
    let eig = SymmetricEigen::new(j);
    let norm = jacobi_norm(alpha, beta);
    let mut pairs: Vec<(f64, f64)> = (0..m)
        .map(|i| (eig.eigenvalues[i], eig.eigenvectors[(0, i)].powi(2) * norm))
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    pairs.into_iter().unzip()
}

/// Gauss-Lobatto points for `(alpha, beta)`, `n + 1` of them.
pub fn jacobi_gl(alpha: f64, beta: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![-1.0, 1.0];
    }
    let (inner, _) = jacobi_gq(alpha + 1.0, beta + 1.0, n - 2);
    let mut x = Vec::with_capacity(n + 1);
    x.push(-1.0);
    x.extend(inner);
    x.push(1.0);
    x
}

/// Gauss-Legendre rule on `[-1, 1]` exact for degree `2n + 1`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    jacobi_gq(0.0, 0.0, n)
}

/// Quadrature on the reference triangle `(-1,-1), (1,-1), (-1,1)`.
#[derive(Debug, Clone)]
pub struct TriangleRule {
    pub r: Vec<f64>,
    pub s: Vec<f64>,
    pub w: Vec<f64>,
}

impl TriangleRule {
    /// Collapsed Gauss-Jacobi rule exact for polynomials of total degree `degree`.
    pub fn new(degree: usize) -> Self {
        let q = degree / 2 + 1;
        let (a, wa) = jacobi_gq(0.0, 0.0, q);
        let (b, wb) = jacobi_gq(1.0, 0.0, q);
        let mut rule = TriangleRule { r: vec![], s: vec![], w: vec![] };
        for (bi, wbi) in b.iter().zip(&wb) {
            for (ai, wai) in a.iter().zip(&wa) {
                rule.r.push(0.5 * (1.0 + ai) * (1.0 - bi) - 1.0);
                rule.s.push(*bi);
                rule.w.push(0.5 * wai * wbi);
            }
        }
        rule
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }
}
