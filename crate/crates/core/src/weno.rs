//! Fifth-order WENO kernels: point interpolation for semi-Lagrangian feet and
//! interface reconstruction for split fluxes.

/// Regularisation in the nonlinear weights.
pub const WENO_EPS: f64 = 1e-6;

/// Fractional shifts closer than this to an integer are treated as integers.
const SNAP: f64 = 1e-12;

/// Value used for indices outside `[0, n)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Ghost {
    Periodic,
    Fixed {
        left: f64,
        right: f64,
    },
    /// Repeats the first and last values.
    Extrapolate,
}

impl Ghost {
    #[inline]
    pub fn get(&self, values: &[f64], k: isize) -> f64 {
        let n = values.len() as isize;
        match *self {
            Ghost::Periodic => values[k.rem_euclid(n) as usize],
            Ghost::Fixed { left, right } => {
                if k < 0 {
                    left
                } else if k >= n {
                    right
                } else {
                    values[k as usize]
                }
            }
            Ghost::Extrapolate => values[k.clamp(0, n - 1) as usize],
        }
    }
}

/// Linear weights of the three cubic sub-stencils at offset `t` in `(0, 1)`.
#[inline]
fn linear_weights(t: f64) -> [f64; 3] {
    [
        (t - 3.0) * (t - 2.0) / 20.0,
        -(t - 3.0) * (t + 2.0) / 10.0,
        (t + 1.0) * (t + 2.0) / 20.0,
    ]
}

/// Cubic interpolants on the sub-stencils `f[0..4]`, `f[1..5]`, `f[2..6]`, where
/// `f[k]` sits at offset `k - 2` and `t` is measured from `f[2]`.
#[inline]
fn substencil_values(f: &[f64; 6], t: f64) -> [f64; 3] {
    let (tm3, tm2, tm1, tp1, tp2) = (t - 3.0, t - 2.0, t - 1.0, t + 1.0, t + 2.0);
    let p0 = -t * tm1 * tp1 / 6.0 * f[0] + t * tm1 * tp2 / 2.0 * f[1]
        - tm1 * tp1 * tp2 / 2.0 * f[2]
        + t * tp1 * tp2 / 6.0 * f[3];
    let p1 = -t * tm2 * tm1 / 6.0 * f[1] + tm2 * tm1 * tp1 / 2.0 * f[2]
        - t * tm2 * tp1 / 2.0 * f[3]
        + t * tm1 * tp1 / 6.0 * f[4];
    let p2 = -tm3 * tm2 * tm1 / 6.0 * f[2] + t * tm3 * tm2 / 2.0 * f[3]
        - t * tm3 * tm1 / 2.0 * f[4]
        + t * tm2 * tm1 / 6.0 * f[5];
    [p0, p1, p2]
}

/// `int_0^1 (p')^2 + (p'')^2 + (p''')^2 dt` for `p = a0 + a1 t + a2 t^2 + a3 t^3`.
#[inline]
fn cubic_smoothness(a1: f64, a2: f64, a3: f64) -> f64 {
    let (b0, b1, b2) = (a1, 2.0 * a2, 3.0 * a3);
    let (c0, c1) = (2.0 * a2, 6.0 * a3);
    b0 * b0
        + b0 * b1
        + (b1 * b1 + 2.0 * b0 * b2) / 3.0
        + b1 * b2 / 2.0
        + b2 * b2 / 5.0
        + c0 * c0
        + c0 * c1
        + c1 * c1 / 3.0
        + 36.0 * a3 * a3
}

/// Smoothness indicators of the three sub-stencils over the interpolation cell.
pub fn smoothness_indicators(f: &[f64; 6]) -> [f64; 3] {
    let s0 = {
        let a1 = f[0] / 6.0 - f[1] + f[2] / 2.0 + f[3] / 3.0;
        let a2 = f[1] / 2.0 - f[2] + f[3] / 2.0;
        let a3 = (-f[0] + 3.0 * f[1] - 3.0 * f[2] + f[3]) / 6.0;
        cubic_smoothness(a1, a2, a3)
    };
    let s1 = {
        let a1 = -f[1] / 3.0 - f[2] / 2.0 + f[3] - f[4] / 6.0;
        let a2 = (f[1] - 2.0 * f[2] + f[3]) / 2.0;
        let a3 = (-f[1] + 3.0 * f[2] - 3.0 * f[3] + f[4]) / 6.0;
        cubic_smoothness(a1, a2, a3)
    };
    let s2 = {
        let a1 = -11.0 * f[2] / 6.0 + 3.0 * f[3] - 1.5 * f[4] + f[5] / 3.0;
        let a2 = f[2] - 2.5 * f[3] + 2.0 * f[4] - 0.5 * f[5];
        let a3 = (-f[2] + 3.0 * f[3] - 3.0 * f[4] + f[5]) / 6.0;
        cubic_smoothness(a1, a2, a3)
    };
    [s0, s1, s2]
}

/// Nonlinear six-point interpolation at offset `t` past `f[2]`.
#[inline]
pub fn weno6_point(f: &[f64; 6], t: f64) -> f64 {
    let p = substencil_values(f, t);
    let d = linear_weights(t);
    let beta = smoothness_indicators(f);
    let mut alpha = [0.0; 3];
    for k in 0..3 {
        let b = WENO_EPS + beta[k];
        alpha[k] = d[k] / (b * b);
    }
    let sum = alpha[0] + alpha[1] + alpha[2];
    (alpha[0] * p[0] + alpha[1] * p[1] + alpha[2] * p[2]) / sum
}

/// Linear-weight version of [`weno6_point`]: the quintic Lagrange interpolant.
pub fn linear6_point(f: &[f64; 6], t: f64) -> f64 {
    let p = substencil_values(f, t);
    let d = linear_weights(t);
    d[0] * p[0] + d[1] * p[1] + d[2] * p[2]
}

/// Splits a shift in cells into `(n, theta)` with `shift = n + theta`, `theta` in `[0, 1)`.
#[inline]
pub fn split_shift(shift: f64) -> (isize, f64) {
    let mut n = shift.floor();
    let mut theta = shift - n;
    if theta < SNAP {
        theta = 0.0;
    } else if theta > 1.0 - SNAP {
        n += 1.0;
        theta = 0.0;
    }
    (n as isize, theta)
}

/// Value at `x_i - shift * dx` of the grid function sampled by `get`.
#[inline]
pub fn interpolate_at(get: impl Fn(isize) -> f64, i: usize, n: isize, theta: f64) -> f64 {
    let base = i as isize - n;
    if theta == 0.0 {
        return get(base);
    }
    let m0 = base - 1;
    let f = [
        get(m0 - 2),
        get(m0 - 1),
        get(m0),
        get(m0 + 1),
        get(m0 + 2),
        get(m0 + 3),
    ];
    weno6_point(&f, 1.0 - theta)
}

/// Interpolates `values` at every `x_i - shift * dx`.
pub fn weno5_interpolate(values: &[f64], shift: f64, ghost: Ghost) -> Vec<f64> {
    let (n, theta) = split_shift(shift);
    (0..values.len())
        .map(|i| interpolate_at(|k| ghost.get(values, k), i, n, theta))
        .collect()
}

/// Left-biased WENO-JS reconstruction at `i + 1/2` from `v[i-2..=i+2]`.
#[inline]
pub fn weno5_reconstruct(v: [f64; 5]) -> f64 {
    let [a, b, c, d, e] = v;
    let q0 = (2.0 * a - 7.0 * b + 11.0 * c) / 6.0;
    let q1 = (-b + 5.0 * c + 2.0 * d) / 6.0;
    let q2 = (2.0 * c + 5.0 * d - e) / 6.0;
    let sq = |x: f64| x * x;
    let b0 = 13.0 / 12.0 * sq(a - 2.0 * b + c) + 0.25 * sq(a - 4.0 * b + 3.0 * c);
    let b1 = 13.0 / 12.0 * sq(b - 2.0 * c + d) + 0.25 * sq(b - d);
    let b2 = 13.0 / 12.0 * sq(c - 2.0 * d + e) + 0.25 * sq(3.0 * c - 4.0 * d + e);
    let a0 = 0.1 / sq(WENO_EPS + b0);
    let a1 = 0.6 / sq(WENO_EPS + b1);
    let a2 = 0.3 / sq(WENO_EPS + b2);
    (a0 * q0 + a1 * q1 + a2 * q2) / (a0 + a1 + a2)
}
