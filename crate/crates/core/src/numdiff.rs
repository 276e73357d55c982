//! Central finite differences with Richardson extrapolation.

/// First derivative: central differences at `h`, `h/2`, `h/4`, extrapolated twice.
pub fn derivative<F: FnMut(f64) -> f64>(mut f: F, x: f64, h: f64) -> f64 {
    let mut d = [0.0; 3];
    for (k, slot) in d.iter_mut().enumerate() {
        let s = h / (1 << k) as f64;
        *slot = (f(x + s) - f(x - s)) / (2.0 * s);
    }
    let r0 = (4.0 * d[1] - d[0]) / 3.0;
    let r1 = (4.0 * d[2] - d[1]) / 3.0;
    (16.0 * r1 - r0) / 15.0
}

/// Second derivative: central second differences at `h` and `h/2`, extrapolated once.
pub fn second_derivative<F: FnMut(f64) -> f64>(mut f: F, x: f64, h: f64) -> f64 {
    let f0 = f(x);
    let mut dd = |s: f64| (f(x + s) - 2.0 * f0 + f(x - s)) / (s * s);
    let coarse = dd(h);
    let fine = dd(0.5 * h);
    (4.0 * fine - coarse) / 3.0
}
