//! The normalized bump profile shared by the spatial mollifier and the
//! value-variable regularisation family.
//!
//! The profile is `C exp(1/(r^2 - 1))` on (-1, 1), zero outside, with `C`
//! fixed once so the integral is 1. First and second antiderivatives are
//! evaluated through a cumulative table anchored at 4096 grid points with a
//! local Gauss correction, which keeps pointwise evaluation at machine
//! precision without interpolation error.

use std::sync::OnceLock;

use crate::quad;

/// Unnormalized bump: exp(1/(r^2-1)) inside (-1, 1), zero outside.
pub(crate) fn bump_raw(r: f64) -> f64 {
    if r.abs() < 1.0 {
        (1.0 / (r * r - 1.0)).exp()
    } else {
        0.0
    }
}

/// Normalisation constant `C` with `C * integral(bump_raw) = 1`.
pub(crate) fn norm_const() -> f64 {
    static C: OnceLock<f64> = OnceLock::new();
    *C.get_or_init(|| {
        let mass = quad::integrate(bump_raw, -1.0, 1.0, 1e-12)
            .expect("bump profile integrates on [-1, 1]");
        1.0 / mass
    })
}

/// Normalized bump `J(r)` with unit integral and even symmetry.
pub(crate) fn bump(r: f64) -> f64 {
    norm_const() * bump_raw(r)
}

const TABLE_CELLS: usize = 4096;

/// 5-point Gauss-Legendre nodes/weights on [-1, 1] for the local corrections.
const GL5_X: [f64; 5] = [
    -0.906179845938664,
    -0.538469310105683,
    0.0,
    0.538469310105683,
    0.906179845938664,
];
const GL5_W: [f64; 5] = [
    0.236926885056189,
    0.478628670499366,
    0.568888888888889,
    0.478628670499366,
    0.236926885056189,
];

fn gl5<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = 0.0;
    for j in 0..5 {
        acc += GL5_W[j] * f(mid + half * GL5_X[j]);
    }
    acc * half
}

struct Tables {
    /// prime[j] = eta1'(j/TABLE_CELLS) for j = 0..=TABLE_CELLS, on [0, 1].
    prime: Vec<f64>,
    /// anti[j] = eta1(j/TABLE_CELLS) on [0, 1].
    anti: Vec<f64>,
}

fn tables() -> &'static Tables {
    static T: OnceLock<Tables> = OnceLock::new();
    T.get_or_init(|| {
        let n = TABLE_CELLS;
        let h = 1.0 / n as f64;
        // eta1'(r) = 1/2 + integral of the bump over [0, r], for r >= 0.
        let mut prime = Vec::with_capacity(n + 1);
        prime.push(0.5);
        for j in 0..n {
            let a = j as f64 * h;
            let b = (j + 1) as f64 * h;
            let cell = gl5(bump, a, b);
            prime.push(prime[j] + cell);
        }
        // Pin the exact boundary value; the cumulative sum lands within ~1e-15.
        prime[n] = 1.0;
        // eta1(0) = integral over [0,1] of (1 - eta1'(s)) ds by symmetry.
        let eval_prime = |r: f64| prime_from(&prime, r);
        let mut eta0 = 0.0;
        for j in 0..n {
            let a = j as f64 * h;
            let b = (j + 1) as f64 * h;
            eta0 += gl5(|s| 1.0 - eval_prime(s), a, b);
        }
        let mut anti = Vec::with_capacity(n + 1);
        anti.push(eta0);
        for j in 0..n {
            let a = j as f64 * h;
            let b = (j + 1) as f64 * h;
            anti.push(anti[j] + gl5(eval_prime, a, b));
        }
        anti[n] = 1.0;
        Tables { prime, anti }
    })
}

/// eta1'(r) for r in [0, 1] given the cumulative table: nearest anchor below
/// plus a local Gauss correction, so no interpolation error enters.
fn prime_from(table: &[f64], r: f64) -> f64 {
    let n = TABLE_CELLS;
    let j = ((r * n as f64) as usize).min(n);
    let anchor = j as f64 / n as f64;
    table[j] + gl5(bump, anchor, r)
}

/// eta1'(r): smooth, nondecreasing, 0 below -1, 1 above 1, with the exact
/// reflection symmetry eta1'(-r) = 1 - eta1'(r).
pub(crate) fn eta1_prime(r: f64) -> f64 {
    if r >= 1.0 {
        1.0
    } else if r <= -1.0 {
        0.0
    } else if r < 0.0 {
        1.0 - eta1_prime(-r)
    } else {
        prime_from(&tables().prime, r)
    }
}

/// eta1(r): the convex antiderivative of `eta1_prime`, equal to max(r, 0)
/// outside [-1, 1], with eta1(r) = eta1(-r) + r enforced exactly.
pub(crate) fn eta1(r: f64) -> f64 {
    if r >= 1.0 {
        r
    } else if r <= -1.0 {
        0.0
    } else if r < 0.0 {
        eta1(-r) + r
    } else {
        let t = tables();
        let n = TABLE_CELLS;
        let j = ((r * n as f64) as usize).min(n);
        let anchor = j as f64 / n as f64;
        t.anti[j] + gl5(|s| prime_from(&t.prime, s), anchor, r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_mass_and_symmetry() {
        let mass = quad::integrate(bump, -1.0, 1.0, 1e-12).unwrap();
        assert!((mass - 1.0).abs() < 1e-12);
        for r in [0.0, 0.3, 0.77, 0.99] {
            assert_eq!(bump(r), bump(-r));
        }
    }

    #[test]
    fn prime_matches_independent_quadrature() {
        for r in [0.1, 0.45, 0.8, 0.999] {
            let direct = 0.5 + quad::integrate(bump, 0.0, r, 1e-13).unwrap();
            assert!((eta1_prime(r) - direct).abs() < 1e-12, "r = {r}");
        }
        assert_eq!(eta1_prime(0.0), 0.5);
        assert_eq!(eta1_prime(1.0), 1.0);
        assert_eq!(eta1_prime(-1.0), 0.0);
    }

    #[test]
    fn reflection_identities_exact() {
        for r in [0.05, 0.2, 0.6, 0.95] {
            assert_eq!(1.0 - eta1_prime(r), eta1_prime(-r));
            assert_eq!(eta1(-r), eta1(r) - r);
        }
    }

    #[test]
    fn antiderivative_boundary_values() {
        assert_eq!(eta1(1.0), 1.0);
        assert_eq!(eta1(-1.0), 0.0);
        assert_eq!(eta1(2.5), 2.5);
        // eta1(0) against a fully independent double quadrature.
        let inner = |s: f64| 0.5 + quad::integrate(bump, 0.0, s, 1e-13).unwrap();
        let eta0 = quad::integrate(|s| 1.0 - inner(s), 0.0, 1.0, 1e-11).unwrap();
        assert!((eta1(0.0) - eta0).abs() < 1e-10);
    }
}
