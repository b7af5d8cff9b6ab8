//! Cell averages of `|x - c|^a` for power-weight sampling.

use std::sync::OnceLock;

const GL_ORDER: usize = 16;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
fn gauss_legendre() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = GL_ORDER;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    let (mut q0, mut q1) = (1.0, x);
                    for k in 2..=n {
                        let q2 = ((2 * k - 1) as f64 * x * q1 - (k - 1) as f64 * q0) / k as f64;
                        q0 = q1;
                        q1 = q2;
                    }
                    let dq = n as f64 * (x * q1 - q0) / (x * x - 1.0);
                    weights[i] = 2.0 / ((1.0 - x * x) * dq * dq);
                    break;
                }
            }
            nodes[i] = x;
        }
        (nodes, weights)
    })
}

fn gl_integrate(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let (nodes, weights) = gauss_legendre();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    nodes
        .iter()
        .zip(weights)
        .map(|(x, w)| w * f(mid + half * x))
        .sum::<f64>()
        * half
}

/// Average of `|x - c|^a` over `[x0, x1)`, closed form.
pub fn power_average_1d(a: f64, c: f64, x0: f64, x1: f64) -> f64 {
    let g = |u: f64| u.signum() * u.abs().powf(a + 1.0) / (a + 1.0);
    (g(x1 - c) - g(x0 - c)) / (x1 - x0)
}

/// `∫_0^U (1 + u^2)^{a/2} du` on geometrically graded panels.
fn radial_profile(a: f64, upper: f64) -> f64 {
    let f = |u: f64| (1.0 + u * u).powf(0.5 * a);
    let mut total = 0.0;
    let mut lo = 0.0;
    let mut hi = upper.min(0.5);
    loop {
        total += gl_integrate(f, lo, hi);
        if hi >= upper {
            break;
        }
        lo = hi;
        hi = (2.0 * hi).min(upper);
    }
    total
}

/// `∫_0^A ∫_0^B (x^2 + y^2)^{a/2} dy dx` for `A, B >= 0`, via the two
/// triangles cut by the diagonal in polar coordinates.
fn corner_integral(a: f64, big_a: f64, big_b: f64) -> f64 {
    if big_a <= 0.0 || big_b <= 0.0 {
        return 0.0;
    }
    let tri = |s: f64, t: f64| s.powf(a + 2.0) / (a + 2.0) * radial_profile(a, t / s);
    tri(big_a, big_b) + tri(big_b, big_a)
}

/// Average of `|x - c|^a` (Euclidean norm) over the square
/// `[x0, x1) x [y0, y1)`.
pub fn power_average_2d(a: f64, c: [f64; 2], x: [f64; 2], y: [f64; 2]) -> f64 {
    let w = x[1] - x[0];
    let dx = (x[0] - c[0]).max(c[0] - x[1]).max(0.0);
    let dy = (y[0] - c[1]).max(c[1] - y[1]).max(0.0);
    if dx.max(dy) >= 1.5 * w {
        tensor_average(a, c, x, y)
    } else {
        corner_average(a, c, x, y)
    }
}

/// Tensor Gauss rule; accurate when the center is well away from the cell.
fn tensor_average(a: f64, c: [f64; 2], x: [f64; 2], y: [f64; 2]) -> f64 {
    let (nodes, weights) = gauss_legendre();
    let (hx, mx) = (0.5 * (x[1] - x[0]), 0.5 * (x[0] + x[1]));
    let (hy, my) = (0.5 * (y[1] - y[0]), 0.5 * (y[0] + y[1]));
    let mut acc = 0.0;
    for (xi, wi) in nodes.iter().zip(weights) {
        let px = mx + hx * xi - c[0];
        for (yj, wj) in nodes.iter().zip(weights) {
            let py = my + hy * yj - c[1];
            acc += wi * wj * (px * px + py * py).powf(0.5 * a);
        }
    }
    acc * 0.25
}

/// Inclusion-exclusion over rectangles anchored at the center.
fn corner_average(a: f64, c: [f64; 2], x: [f64; 2], y: [f64; 2]) -> f64 {
    let area = (x[1] - x[0]) * (y[1] - y[0]);
    let signed = |u: f64, v: f64| u.signum() * v.signum() * corner_integral(a, u.abs(), v.abs());
    let (u0, u1) = (x[0] - c[0], x[1] - c[0]);
    let (v0, v1) = (y[0] - c[1], y[1] - c[1]);
    (signed(u1, v1) - signed(u0, v1) - signed(u1, v0) + signed(u0, v0)) / area
}
