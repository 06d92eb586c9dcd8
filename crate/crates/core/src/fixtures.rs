//! Canonical structure functions used across tests, the acceptance suite
//! and the command line, plus candidate ladders for sparse point plans.

use crate::hb::StructureFunction;
use crate::FixtureRef;
use num_complex::Complex64;
use std::sync::Arc;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `E(z) = z + i`: the one-dimensional space of constants, `K ≡ 1/π`.
pub fn one_dimensional() -> FixtureRef {
    Arc::new(StructureFunction::new(0.0, vec![c(0.0, -1.0)], Complex64::ONE).unwrap())
}

/// `E(z) = e^{-iz}`: the Paley–Wiener space with the sinc kernel.
pub fn paley_wiener() -> FixtureRef {
    Arc::new(StructureFunction::new(1.0, vec![], Complex64::ONE).unwrap())
}

/// Three zeros at height one, no exponential part; `Σ Im w_n = 3` for the
/// conjugate zeros of `Θ`.
pub fn finite_zero_trio() -> FixtureRef {
    Arc::new(
        StructureFunction::new(
            0.0,
            vec![c(0.0, -1.0), c(1.0, -1.0), c(-1.0, -1.0)],
            Complex64::ONE,
        )
        .unwrap(),
    )
}

/// Zeros `x_k - i h_k` with `x_k = 4^k` and `h_k = 2^k/100`: the conjugates
/// approach the positive real axis in angle (`h_k/x_k = 2^{-k}/100`), with
/// `Σ Im w_k / |w_k + i| ≈ 0.01` well under `1/24`.
pub fn near_real_ladder() -> FixtureRef {
    let zeros = (1..=8)
        .map(|k| {
            let x = 4.0f64.powi(k);
            let h = 2.0f64.powi(k) / 100.0;
            c(x, -h)
        })
        .collect();
    Arc::new(StructureFunction::new(0.0, zeros, Complex64::ONE).unwrap())
}

/// Purely imaginary zeros `-i t_k`, `t_k = 4·1000^{k-1}`, `k = 1..9`: the
/// conjugates sit on the positive imaginary axis (a degenerate Stolz angle)
/// with `Σ t_k^{-1/2} ≈ 0.52 ≤ 1` and eight-fold growth margins.
pub fn stolz_ladder() -> FixtureRef {
    let zeros = (0..9)
        .map(|k| c(0.0, -4.0 * 1000.0f64.powi(k)))
        .collect();
    Arc::new(StructureFunction::new(0.0, zeros, Complex64::ONE).unwrap())
}

/// Exponential part `a = 1` together with zeros `k - i/k²`, `k = 1..12`:
/// negative mean type of `Θ` plus `Θ`-zeros accumulating at the real axis.
pub fn mixed_regimes() -> FixtureRef {
    let zeros = (1..=12)
        .map(|k| {
            let kf = k as f64;
            c(kf, -1.0 / (kf * kf))
        })
        .collect();
    Arc::new(StructureFunction::new(1.0, zeros, Complex64::ONE).unwrap())
}

/// Every canonical fixture with its identifier.
pub fn all() -> Vec<(&'static str, FixtureRef)> {
    vec![
        ("onedim", one_dimensional()),
        ("pw", paley_wiener()),
        ("finite3", finite_zero_trio()),
        ("case1", near_real_ladder()),
        ("stolz", stolz_ladder()),
        ("mixed", mixed_regimes()),
    ]
}

pub fn by_name(name: &str) -> Option<FixtureRef> {
    all().into_iter().find(|(n, _)| *n == name).map(|(_, f)| f)
}

/// Vertical candidate ladder `i·y_k` where each step keeps both growth
/// certificates satisfiable: `y_{k+1} = max(growth·y_k, 64.5·(Σ_{n≤k} y_n)²/y_k)`.
pub fn ray_candidates(y0: f64, growth: f64, count: usize) -> Vec<Complex64> {
    let mut ys = Vec::with_capacity(count);
    let mut y = y0;
    let mut sum = 0.0;
    for _ in 0..count {
        ys.push(c(0.0, y));
        sum += y;
        y = (growth * y).max(64.5 * sum * sum / y);
    }
    ys
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_construct_and_look_up() {
        for (name, fx) in all() {
            assert!(by_name(name).is_some());
            // every fixture is a valid model function with zeros below axis
            assert!(fx.zeros().iter().all(|z| z.im < 0.0));
        }
        assert!(by_name("nope").is_none());
    }

    #[test]
    fn ray_candidates_grow_fast() {
        let v = ray_candidates(1.0, 1000.0, 10);
        assert_eq!(v.len(), 10);
        for k in 0..9 {
            assert!(v[k + 1].im >= 1000.0 * v[k].im);
        }
    }
}
