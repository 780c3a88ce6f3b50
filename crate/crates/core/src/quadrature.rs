//! Gauss–Legendre rules on reference intervals and their tensor products.

/// Three-point Gauss–Legendre nodes and weights on `[-1, 1]`; exact to degree 5.
pub const GAUSS3: [(f64, f64); 3] = [
    (-0.774_596_669_241_483_4, 5.0 / 9.0),
    (0.0, 8.0 / 9.0),
    (0.774_596_669_241_483_4, 5.0 / 9.0),
];

/// Two-point Gauss–Legendre nodes and weights on `[-1, 1]`; exact to degree 3.
pub const GAUSS2: [(f64, f64); 2] = [
    (-0.577_350_269_189_625_8, 1.0),
    (0.577_350_269_189_625_8, 1.0),
];

/// Maps a rule to `[a, b]`: returns `(node, weight)` pairs whose weights sum to `b - a`.
pub fn mapped<const K: usize>(rule: &[(f64, f64); K], a: f64, b: f64) -> [(f64, f64); K] {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    rule.map(|(s, w)| (mid + half * s, half * w))
}

/// `int_a^b f` by the three-point rule.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    mapped(&GAUSS3, a, b).iter().map(|&(x, w)| w * f(x)).sum()
}

/// `int` over the rectangle `[x0, x1] x [y0, y1]` by the 3x3 tensor rule.
pub fn integrate_rect(f: impl Fn(f64, f64) -> f64, (x0, x1): (f64, f64), (y0, y1): (f64, f64)) -> f64 {
    let xs = mapped(&GAUSS3, x0, x1);
    let ys = mapped(&GAUSS3, y0, y1);
    let mut sum = 0.0;
    for &(x, wx) in &xs {
        for &(y, wy) in &ys {
            sum += wx * wy * f(x, y);
        }
    }
    sum
}

/// Mean of `f` over the rectangle, by the 3x3 tensor rule.
pub fn rect_mean(f: impl Fn(f64, f64) -> f64, xr: (f64, f64), yr: (f64, f64)) -> f64 {
    integrate_rect(f, xr, yr) / ((xr.1 - xr.0) * (yr.1 - yr.0))
}
