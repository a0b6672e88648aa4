//! Composite Gauss–Legendre quadrature.

use std::sync::OnceLock;

/// Nodes and weights of the n-point Gauss–Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

const ORDER: usize = 20;

fn rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(ORDER))
}

/// ∫_a^b f using `panels` equal panels of the 20-point rule.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, panels: usize) -> f64 {
    let (x, w) = rule();
    let panels = panels.max(1);
    let h = (b - a) / panels as f64;
    let mut acc = crate::summation::NeumaierSum::new();
    for k in 0..panels {
        let lo = a + k as f64 * h;
        let mid = lo + 0.5 * h;
        for (xi, wi) in x.iter().zip(w) {
            acc.add(wi * f(mid + 0.5 * h * xi) * 0.5 * h);
        }
    }
    acc.value()
}

/// Quadrature nodes and weights for `panels` panels on [a, b].
pub fn panel_nodes(a: f64, b: f64, panels: usize) -> impl Iterator<Item = (f64, f64)> {
    let (x, w) = rule();
    let panels = panels.max(1);
    let h = (b - a) / panels as f64;
    (0..panels).flat_map(move |k| {
        let mid = a + (k as f64 + 0.5) * h;
        x.iter().zip(w).map(move |(xi, wi)| (mid + 0.5 * h * xi, 0.5 * h * wi))
    })
}
