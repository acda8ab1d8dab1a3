//! Airy function of the first kind, standard normalization
//! `Ai(x) = (1/2π) ∫ exp(i(t³/3 + x t)) dt`.
//!
//! On `[-9, 9]` the function is reconstructed from a node table with spacing
//! 1/8: each evaluation Taylor-expands the Airy ODE `y'' = x y` around the
//! nearest node. The table is built once in `f64`:
//!
//! * `x ≤ 0`: stepped leftward from the exact values at the origin
//!   (both solutions oscillate there, so the recursion is neutrally stable);
//! * `x > 0`: stepped leftward from the asymptotic value at `x = 9`, the
//!   stable direction for the recessive solution.
//!
//! Outside `[-9, 9]` the classical asymptotic expansions are used; at
//! `ζ = 2|x|^{3/2}/3 ≥ 18` their smallest term is below double precision.

use std::sync::OnceLock;

use crate::scalar::Real;

/// `Ai(0) = 3^{-2/3} / Γ(2/3)`.
pub const AI_0: f64 = 0.355_028_053_887_817_24;
/// `Ai'(0) = -3^{-1/3} / Γ(1/3)`.
pub const AI_PRIME_0: f64 = -0.258_819_403_792_806_8;
/// First zero of `Ai`.
pub const AI_FIRST_ZERO: f64 = -2.338_107_410_459_767;

const TABLE_HALF_WIDTH: f64 = 9.0;
const TABLE_STEP: f64 = 0.125;
const TABLE_NODES_PER_SIDE: usize = 72;

struct Table {
    // Node j sits at x = -9 + j/8, j = 0..=144.
    value: Vec<f64>,
    deriv: Vec<f64>,
}

fn table() -> &'static Table {
    static TABLE: OnceLock<Table> = OnceLock::new();
    TABLE.get_or_init(build_table)
}

fn build_table() -> Table {
    let n = 2 * TABLE_NODES_PER_SIDE + 1;
    let mut value = vec![0.0; n];
    let mut deriv = vec![0.0; n];
    let origin = TABLE_NODES_PER_SIDE;

    value[origin] = AI_0;
    deriv[origin] = AI_PRIME_0;
    let (mut y, mut dy) = (AI_0, AI_PRIME_0);
    for j in (0..origin).rev() {
        let x0 = node_x(j + 1);
        (y, dy) = taylor_step(x0, y, dy, -TABLE_STEP);
        value[j] = y;
        deriv[j] = dy;
    }

    let (mut y, mut dy) = asymptotic_positive(TABLE_HALF_WIDTH);
    value[n - 1] = y;
    deriv[n - 1] = dy;
    for j in (origin + 1..n - 1).rev() {
        let x0 = node_x(j + 1);
        (y, dy) = taylor_step(x0, y, dy, -TABLE_STEP);
        value[j] = y;
        deriv[j] = dy;
    }
    Table { value, deriv }
}

fn node_x(j: usize) -> f64 {
    -TABLE_HALF_WIDTH + j as f64 * TABLE_STEP
}

/// Advances `(y, y')` of an Airy solution from `x0` to `x0 + h`.
fn taylor_step<T: Real>(x0: T, y: T, dy: T, h: T) -> (T, T) {
    // (n+2)(n+1) a_{n+2} = x0 a_n + a_{n-1}
    let mut a_prev2 = T::zero(); // a_{n-1}
    let mut a_prev = y; // a_n with n = 0
    let mut a_cur = dy; // a_{n+1}
    let mut val = y + dy * h;
    let mut der = dy;
    let mut hp = h; // h^{n+1}
    let scale = y.abs() + dy.abs();
    let tol = T::epsilon() * T::lit(1e-3) * (scale + T::min_positive_value());
    let mut n = 0usize;
    // Coefficients vanish in a period-3 pattern at x0 = 0, so require three
    // consecutive negligible terms.
    let mut quiet = 0;
    loop {
        let next = (x0 * a_prev + a_prev2) / T::from_usize_lossy((n + 2) * (n + 1));
        let term_der = T::from_usize_lossy(n + 2) * next * hp;
        hp = hp * h;
        let term_val = next * hp;
        val = val + term_val;
        der = der + term_der;
        a_prev2 = a_prev;
        a_prev = a_cur;
        a_cur = next;
        n += 1;
        if term_val.abs() < tol && term_der.abs() < tol {
            quiet += 1;
        } else {
            quiet = 0;
        }
        if quiet >= 3 || n > 80 {
            break;
        }
    }
    (val, der)
}

/// Asymptotic `u_k` coefficients, `u_0 = 1`.
fn u_coeffs() -> &'static [f64; 24] {
    static U: OnceLock<[f64; 24]> = OnceLock::new();
    U.get_or_init(|| {
        let mut u = [0.0; 24];
        u[0] = 1.0;
        for k in 1..24 {
            let kf = k as f64;
            u[k] = u[k - 1] * (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0)
                / ((2.0 * kf - 1.0) * 216.0 * kf);
        }
        u
    })
}

fn v_coeff(k: usize) -> f64 {
    let u = u_coeffs()[k];
    if k == 0 {
        return 1.0;
    }
    let kf = k as f64;
    -(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * u
}

fn asymptotic_positive<T: Real>(x: T) -> (T, T) {
    let zeta = T::lit(2.0 / 3.0) * x * x.sqrt();
    let (mut s_u, mut s_v) = (T::zero(), T::zero());
    let mut zp = T::one();
    let mut sign = T::one();
    let mut last = T::infinity();
    for k in 0..24 {
        let tu = T::lit(u_coeffs()[k]) / zp;
        if tu.abs() > last {
            break;
        }
        last = tu.abs();
        s_u = s_u + sign * tu;
        s_v = s_v + sign * T::lit(v_coeff(k)) / zp;
        if tu.abs() < T::epsilon() * T::lit(1e-3) {
            break;
        }
        zp = zp * zeta;
        sign = -sign;
    }
    let x14 = x.sqrt().sqrt();
    let pref = (-zeta).exp() / (T::lit(2.0) * T::PI().sqrt());
    (pref / x14 * s_u, -pref * x14 * s_v)
}

fn asymptotic_negative<T: Real>(x: T) -> (T, T) {
    let z = -x;
    let zeta = T::lit(2.0 / 3.0) * z * z.sqrt();
    // Even/odd partial sums of the u and v series.
    let (mut ue, mut uo, mut ve, mut vo) = (T::zero(), T::zero(), T::zero(), T::zero());
    let mut zp = T::one();
    let mut last = T::infinity();
    for k in 0..24 {
        let tu = T::lit(u_coeffs()[k]) / zp;
        if tu.abs() > last {
            break;
        }
        last = tu.abs();
        let tv = T::lit(v_coeff(k)) / zp;
        // (-1)^{floor(k/2)} applied within each parity class.
        let s = if (k / 2) % 2 == 0 { T::one() } else { -T::one() };
        if k % 2 == 0 {
            ue = ue + s * tu;
            ve = ve + s * tv;
        } else {
            uo = uo + s * tu;
            vo = vo + s * tv;
        }
        if tu.abs() < T::epsilon() * T::lit(1e-3) {
            break;
        }
        zp = zp * zeta;
    }
    let phase = zeta - T::FRAC_PI_4();
    let (s, c) = phase.sin_cos();
    let z14 = z.sqrt().sqrt();
    let rpi = T::one() / T::PI().sqrt();
    let ai = rpi / z14 * (c * ue + s * uo);
    let aip = rpi * z14 * (s * ve - c * vo);
    (ai, aip)
}

/// `(Ai(x), Ai'(x))`.
pub fn airy_ai_and_derivative<T: Real>(x: T) -> (T, T) {
    let half = T::lit(TABLE_HALF_WIDTH);
    if x.is_nan() {
        return (x, x);
    }
    if x > half {
        return asymptotic_positive(x);
    }
    if x < -half {
        if x.is_infinite() {
            return (T::zero(), T::zero());
        }
        return asymptotic_negative(x);
    }
    let t = table();
    let pos = (x + half) / T::lit(TABLE_STEP);
    let j = pos
        .round()
        .to_usize()
        .unwrap_or(0)
        .min(2 * TABLE_NODES_PER_SIDE);
    let x0 = node_x(j);
    let h = x - T::lit(x0);
    taylor_step(T::lit(x0), T::lit(t.value[j]), T::lit(t.deriv[j]), h)
}

/// Airy function `Ai(x)`, absolute error below `1e-10` on `[-20, 10]` in
/// double precision.
pub fn airy_ai<T: Real>(x: T) -> T {
    airy_ai_and_derivative(x).0
}

/// `Ai'(x)`.
pub fn airy_ai_prime<T: Real>(x: T) -> T {
    airy_ai_and_derivative(x).1
}
