//! Hermite–Biehler structure functions and the quantities derived from them.
//!
//! The model class is `E(z) = κ · e^{-iaz} · Π_k (z - z_k)` with `a ≥ 0` and
//! every zero in the open lower half-plane.  Everything downstream — the
//! reflection `E♯(z) = conj(E(z̄))`, the inner function `Θ = E♯/E`, the
//! reproducing kernel `K(w, z)`, the norming function `∇(z) = √K(z, z)` and
//! the canonical majorant `m_E(z) = |E(z)|/|z + i|` — is evaluated factor by
//! factor, so log-modulus and phase stay finite far beyond the range where a
//! direct product would overflow.  Raw [`StructureFunction::eval`] is
//! overflow-prone once `a · Im z` exceeds roughly 700; callers working at
//! large heights must go through the `log_*` and ratio forms.

use num_complex::Complex64;
use thiserror::Error;

/// Default relative tolerance for algebraic identities.
pub const IDENTITY_RTOL: f64 = 1e-10;
/// Default relative tolerance for limit-branch evaluations.
pub const LIMIT_RTOL: f64 = 1e-9;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum HbError {
    #[error("not a Hermite-Biehler model function: {0}")]
    NotHermiteBiehler(String),
    #[error("point {0} lies in the open lower half-plane")]
    LowerHalfPlane(Complex64),
    #[error("the canonical majorant has a pole at z = -i")]
    MajorantPole,
    #[error("negative kernel diagonal {value} at {z}; input is not Hermite-Biehler")]
    NegativeDiagonal { z: Complex64, value: f64 },
}

/// A Hermite–Biehler function `E(z) = κ · e^{-iaz} · Π_k (z - z_k)`.
///
/// Immutable after construction; all evaluation methods are pure, so values
/// can be shared freely across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureFunction {
    exp_coeff: f64,
    zeros: Vec<Complex64>,
    scale: Complex64,
}

/// View of the inner function `Θ = E♯/E` attached to a structure function:
/// its upper half-plane zeros (the conjugates of the zeros of `E`) and the
/// coefficient of its exponential part `e^{2iaz}`.
#[derive(Debug, Clone, PartialEq)]
pub struct InnerFunctionView {
    exp_coeff: f64,
    zeros: Vec<Complex64>,
}

impl InnerFunctionView {
    /// Coefficient of the exponential part, i.e. `2a`.
    pub fn exp_coeff(&self) -> f64 {
        self.exp_coeff
    }

    /// Zeros of `Θ` in the open upper half-plane, with multiplicity.
    pub fn zeros(&self) -> &[Complex64] {
        &self.zeros
    }

    /// `Σ_n Im w_n` over the listed zeros.
    pub fn im_sum(&self) -> f64 {
        self.zeros.iter().map(|w| w.im).sum()
    }
}

/// One evaluation of the reproducing kernel, carrying both the plain value
/// and the overflow-safe ratio `K(w, z)/E(z)`.
#[derive(Debug, Clone, Copy)]
pub struct KernelValue {
    pub w: Complex64,
    pub z: Complex64,
    pub value: Complex64,
    pub ratio_to_e: Complex64,
}

impl StructureFunction {
    pub fn new(
        exp_coeff: f64,
        zeros: Vec<Complex64>,
        scale: Complex64,
    ) -> Result<Self, HbError> {
        if !exp_coeff.is_finite() || exp_coeff < 0.0 {
            return Err(HbError::NotHermiteBiehler(format!(
                "exponential coefficient must be finite and nonnegative, got {exp_coeff}"
            )));
        }
        if !scale.re.is_finite() || !scale.im.is_finite() || scale == Complex64::ZERO {
            return Err(HbError::NotHermiteBiehler(
                "scale must be finite and nonzero".into(),
            ));
        }
        for (k, z) in zeros.iter().enumerate() {
            if !z.re.is_finite() || !z.im.is_finite() || z.im >= 0.0 {
                return Err(HbError::NotHermiteBiehler(format!(
                    "zero #{k} = {z} must be finite with strictly negative imaginary part"
                )));
            }
        }
        if exp_coeff == 0.0 && zeros.is_empty() {
            return Err(HbError::NotHermiteBiehler(
                "a nonzero constant satisfies |E(z̄)| = |E(z)|; need a > 0 or at least one zero"
                    .into(),
            ));
        }
        Ok(Self {
            exp_coeff,
            zeros,
            scale,
        })
    }

    pub fn exp_coeff(&self) -> f64 {
        self.exp_coeff
    }

    pub fn zeros(&self) -> &[Complex64] {
        &self.zeros
    }

    pub fn scale(&self) -> Complex64 {
        self.scale
    }

    pub fn inner_view(&self) -> InnerFunctionView {
        InnerFunctionView {
            exp_coeff: 2.0 * self.exp_coeff,
            zeros: self.zeros.iter().map(|z| z.conj()).collect(),
        }
    }

    /// `E(z)` as a plain product. Overflows for `a · Im z ≳ 700` or once the
    /// zero product leaves the double range; use the log forms there.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let mut v = self.scale * (Complex64::new(0.0, -self.exp_coeff) * z).exp();
        for zk in &self.zeros {
            v *= z - zk;
        }
        v
    }

    /// `E♯(z) = conj(E(z̄))`.
    pub fn eval_sharp(&self, z: Complex64) -> Complex64 {
        self.eval(z.conj()).conj()
    }

    /// `log |E(z)|`, accumulated additively over the factors.
    pub fn log_abs(&self, z: Complex64) -> f64 {
        let mut s = self.scale.norm().ln() + self.exp_coeff * z.im;
        for zk in &self.zeros {
            s += (z - zk).norm().ln();
        }
        s
    }

    /// `log |E♯(z)| = log |E(z̄)|`.
    pub fn log_abs_sharp(&self, z: Complex64) -> f64 {
        self.log_abs(z.conj())
    }

    /// Argument of `E(z)` as the sum of factor arguments (not reduced mod 2π).
    pub fn arg(&self, z: Complex64) -> f64 {
        let mut s = self.scale.arg() - self.exp_coeff * z.re;
        for zk in &self.zeros {
            s += (z - zk).arg();
        }
        s
    }

    /// Logarithmic derivative `E'/E (z) = -ia + Σ_k 1/(z - z_k)`.
    pub fn log_derivative(&self, z: Complex64) -> Complex64 {
        let mut s = Complex64::new(0.0, -self.exp_coeff);
        for zk in &self.zeros {
            s += (z - zk).inv();
        }
        s
    }

    /// `Θ(z) = E♯(z)/E(z)` evaluated factor-wise as
    /// `(κ̄/κ) e^{2iaz} Π (z - z̄_k)/(z - z_k)`. Only defined on `Im z ≥ 0`.
    pub fn theta(&self, z: Complex64) -> Result<Complex64, HbError> {
        if z.im < 0.0 {
            return Err(HbError::LowerHalfPlane(z));
        }
        Ok(self.theta_unchecked(z))
    }

    pub(crate) fn theta_unchecked(&self, z: Complex64) -> Complex64 {
        let mut v = (self.scale.conj() / self.scale)
            * (Complex64::new(0.0, 2.0 * self.exp_coeff) * z).exp();
        for zk in &self.zeros {
            v *= (z - zk.conj()) / (z - zk);
        }
        v
    }

    /// `log |Θ(z)|` as a sum over factors; `≤ 0` on the closed upper half-plane.
    pub fn log_abs_theta(&self, z: Complex64) -> f64 {
        let mut s = -2.0 * self.exp_coeff * z.im;
        for zk in &self.zeros {
            s += (z - zk.conj()).norm().ln() - (z - zk).norm().ln();
        }
        s
    }

    /// `1 - |Θ(z)|²` computed through `expm1`, which stays accurate when
    /// `|Θ|` is close to one (near the real axis).
    pub fn one_minus_theta_sq(&self, z: Complex64) -> f64 {
        -f64::exp_m1(2.0 * self.log_abs_theta(z))
    }

    /// `Θ'/Θ (z) = 2ia + Σ_k [1/(z - z̄_k) - 1/(z - z_k)]`.
    pub fn theta_log_derivative(&self, z: Complex64) -> Complex64 {
        let mut s = Complex64::new(0.0, 2.0 * self.exp_coeff);
        for zk in &self.zeros {
            s += (z - zk.conj()).inv() - (z - zk).inv();
        }
        s
    }

    /// `Θ'(z)`.
    pub fn theta_derivative(&self, z: Complex64) -> Complex64 {
        self.theta_unchecked(z) * self.theta_log_derivative(z)
    }

    /// Switch radius for the removable singularity of the kernel at `z = w̄`.
    fn coincidence_radius(&self, wbar: Complex64) -> f64 {
        1e-6 * (1.0 + wbar.norm())
    }

    /// Reproducing kernel
    /// `K(w, z) = [E(z) conj(E(w)) - E(w̄) E♯(z)] / (2πi (w̄ - z))`,
    /// with a derivative (de L'Hôpital) branch inside the coincidence radius.
    pub fn kernel(&self, w: Complex64, z: Complex64) -> KernelValue {
        let wbar = w.conj();
        let denom = Complex64::new(0.0, 2.0 * std::f64::consts::PI) * (wbar - z);
        let ratio = if (wbar - z).norm() < self.coincidence_radius(wbar) {
            // K/E has a removable singularity at z = w̄: the midpoint value of
            // d/dζ [conj(E(w)) - E(w̄)Θ(ζ)] recovers it to second order.
            let mid = 0.5 * (z + wbar);
            self.eval(wbar) * self.theta_derivative(mid)
                / Complex64::new(0.0, 2.0 * std::f64::consts::PI)
        } else {
            (self.eval(w).conj() - self.eval(wbar) * self.theta_unchecked(z)) / denom
        };
        let value = if (wbar - z).norm() < self.coincidence_radius(wbar) {
            ratio * self.eval(z)
        } else {
            (self.eval(z) * self.eval(w).conj() - self.eval(wbar) * self.eval_sharp(z)) / denom
        };
        KernelValue {
            w,
            z,
            value,
            ratio_to_e: ratio,
        }
    }

    /// `K(w, w)` for `Im w ≥ 0`, through the closed form
    /// `(|E(w)|² - |E(w̄)|²)/(4π Im w)` off the real axis and the phase
    /// derivative `|E(x)|² (a + Σ |Im z_k| / |x - z_k|²)/π` on it.
    pub fn kernel_diag(&self, w: Complex64) -> Result<f64, HbError> {
        Ok(self.log_kernel_diag(w)?.exp())
    }

    /// `log K(w, w)`; finite wherever `K(w, w) > 0` even if `K` overflows.
    pub fn log_kernel_diag(&self, w: Complex64) -> Result<f64, HbError> {
        Ok(2.0 * (self.log_abs(w) - self.log_e_over_norming(w)?))
    }

    /// Norming function `∇(z) = √K(z, z)` for `Im z ≥ 0`.
    pub fn norming(&self, z: Complex64) -> Result<f64, HbError> {
        Ok(self.log_norming(z)?.exp())
    }

    /// `log ∇(z)`.
    pub fn log_norming(&self, z: Complex64) -> Result<f64, HbError> {
        Ok(0.5 * self.log_kernel_diag(z)?)
    }

    /// `log (|E(w)| / ∇(w))` computed without forming either logarithm, so
    /// it stays accurate at heights where `log |E|` dwarfs their difference.
    pub fn log_e_over_norming(&self, w: Complex64) -> Result<f64, HbError> {
        if w.im < 0.0 {
            return Err(HbError::LowerHalfPlane(w));
        }
        if w.im <= 1e-8 * (1.0 + w.norm()) {
            let x = Complex64::new(w.re, 0.0);
            let mut phase_deriv = self.exp_coeff;
            for zk in &self.zeros {
                phase_deriv += -zk.im / (x - zk).norm_sqr();
            }
            Ok(-0.5 * (phase_deriv / std::f64::consts::PI).ln())
        } else {
            let one_minus = self.one_minus_theta_sq(w);
            if one_minus <= 0.0 {
                return Err(HbError::NegativeDiagonal {
                    z: w,
                    value: one_minus,
                });
            }
            Ok(0.5 * (4.0 * std::f64::consts::PI * w.im).ln() - 0.5 * one_minus.ln())
        }
    }

    /// Canonical majorant `m_E(z) = |E(z)|/|z + i|`.
    pub fn majorant(&self, z: Complex64) -> Result<f64, HbError> {
        Ok(self.log_majorant(z)?.exp())
    }

    /// `log m_E(z)`.
    pub fn log_majorant(&self, z: Complex64) -> Result<f64, HbError> {
        let shift = z + Complex64::I;
        if shift == Complex64::ZERO {
            return Err(HbError::MajorantPole);
        }
        Ok(self.log_abs(z) - shift.norm().ln())
    }

    /// The ratio majorant `m̃(z) = |E(z)|/|z|` used in the ray and line
    /// estimates; `log` form.
    pub fn log_ratio_majorant(&self, z: Complex64) -> f64 {
        self.log_abs(z) - z.norm().ln()
    }

    /// Both sides of the norming/majorant identity
    /// `∇(z)/m_E(z) = |z+i|/(2√(π Im z)) · (1 - |Θ(z)|²)^{1/2}`, computed by
    /// independent routes (log sums on the left, the complex product for `Θ`
    /// on the right). `Im z > 0` required.
    pub fn ratio_identity_sides(&self, z: Complex64) -> Result<(f64, f64), HbError> {
        if z.im <= 0.0 {
            return Err(HbError::LowerHalfPlane(z));
        }
        let lhs = (self.log_norming(z)? - self.log_majorant(z)?).exp();
        let t = self.theta(z)?.norm();
        let one_minus_t = -f64::exp_m1(t.ln());
        let rhs = (z + Complex64::I).norm() / (2.0 * (std::f64::consts::PI * z.im).sqrt())
            * ((1.0 + t) * one_minus_t).max(0.0).sqrt();
        Ok((lhs, rhs))
    }

    /// HB margin `log |E(z)| - log |E(z̄)|`; strictly positive on `Im z > 0`.
    pub fn hb_margin(&self, z: Complex64) -> f64 {
        self.log_abs(z) - self.log_abs(z.conj())
    }

    /// Inner product of unit-norm kernels,
    /// `(K̃(w,·), K̃(v,·))_H = K(w, v) / (∇(w) ∇(v))`,
    /// valid on the closed upper half-plane and finite at any height.
    pub fn unit_kernel_inner(&self, w: Complex64, v: Complex64) -> Result<Complex64, HbError> {
        if w.im < 0.0 {
            return Err(HbError::LowerHalfPlane(w));
        }
        if v.im < 0.0 {
            return Err(HbError::LowerHalfPlane(v));
        }
        // K(w, v) = E(v) conj(E(w)) (1 - conj(Θ(w)) Θ(v)) / (2πi (w̄ - v))
        let amp = (self.log_e_over_norming(v)? + self.log_e_over_norming(w)?).exp();
        let phase = Complex64::from_polar(1.0, self.arg(v) - self.arg(w));
        let wbar = w.conj();
        let bracket = if (wbar - v).norm() < self.coincidence_radius(wbar) {
            let mid = 0.5 * (v + wbar);
            self.theta_unchecked(w).conj() * self.theta_derivative(mid)
                / Complex64::new(0.0, 2.0 * std::f64::consts::PI)
        } else {
            (1.0 - self.theta_unchecked(w).conj() * self.theta_unchecked(v))
                / (Complex64::new(0.0, 2.0 * std::f64::consts::PI) * (wbar - v))
        };
        Ok(amp * phase * bracket)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn pw() -> StructureFunction {
        StructureFunction::new(1.0, vec![], Complex64::ONE).unwrap()
    }

    fn onedim() -> StructureFunction {
        StructureFunction::new(0.0, vec![c(0.0, -1.0)], Complex64::ONE).unwrap()
    }

    fn trio() -> StructureFunction {
        StructureFunction::new(
            0.0,
            vec![c(0.0, -1.0), c(1.0, -1.0), c(-1.0, -1.0)],
            Complex64::ONE,
        )
        .unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn constructor_rejects_bad_input() {
        assert!(StructureFunction::new(-1.0, vec![], Complex64::ONE).is_err());
        assert!(StructureFunction::new(1.0, vec![c(0.0, 1.0)], Complex64::ONE).is_err());
        assert!(StructureFunction::new(1.0, vec![c(0.0, 0.0)], Complex64::ONE).is_err());
        assert!(StructureFunction::new(0.0, vec![], Complex64::ONE).is_err());
        assert!(StructureFunction::new(1.0, vec![], Complex64::ZERO).is_err());
    }

    #[test]
    fn eval_matches_direct_formulas() {
        // E = e^{-iz} at z = i gives e^{-i·i} = e.
        let v = pw().eval(c(0.0, 1.0));
        assert!((v - c(std::f64::consts::E, 0.0)).norm() < 1e-14);

        // E = z + i: E♯(2) = 2 - i by the conjugation rule.
        let v = onedim().eval_sharp(c(2.0, 0.0));
        assert!((v - c(2.0, -1.0)).norm() < 1e-14);
    }

    #[test]
    fn theta_values() {
        // E = z + i: Θ(i) = 0 since i is the conjugate zero.
        assert!(onedim().theta(c(0.0, 1.0)).unwrap().norm() < 1e-15);
        // E = e^{-iz}: Θ(i) = e^{-2}.
        let v = pw().theta(c(0.0, 1.0)).unwrap();
        assert!(rel(v.re, (-2.0f64).exp()) < 1e-14 && v.im.abs() < 1e-16);
        // Unit modulus on the real axis.
        for x in [0.0, 1.0, 10.0] {
            let t = pw().theta(c(x, 0.0)).unwrap().norm();
            assert!((t - 1.0).abs() <= 1e-12);
        }
        assert!(pw().theta(c(0.0, -0.1)).is_err());
    }

    #[test]
    fn kernel_closed_forms() {
        // E = z + i: K ≡ 1/π.
        let inv_pi = 1.0 / std::f64::consts::PI;
        for (w, z) in [
            (c(0.0, 1.0), c(2.0, 3.0)),
            (c(-1.0, 0.5), c(0.3, 0.0)),
            (c(5.0, 2.0), c(5.0, 2.0)),
        ] {
            let k = onedim().kernel(w, z).value;
            assert!((k - c(inv_pi, 0.0)).norm() < 1e-13, "K({w},{z}) = {k}");
        }
        // E = e^{-iz}: K(w, z) = sin(z - w̄)/(π (z - w̄)); K(0,0) = 1/π.
        let k = pw().kernel(c(0.0, 0.0), c(0.0, 0.0)).value;
        assert!(rel(k.re, inv_pi) < 1e-12 && k.im.abs() < 1e-15);
        let (w, z) = (c(0.7, 0.4), c(-0.2, 1.1));
        let u = z - w.conj();
        let expect = u.sin() / (std::f64::consts::PI * u);
        let k = pw().kernel(w, z).value;
        assert!((k - expect).norm() < 1e-13 * (1.0 + expect.norm()));
    }

    #[test]
    fn kernel_ratio_consistency() {
        let e = trio();
        for (w, z) in [
            (c(0.4, 0.8), c(-1.0, 0.2)),
            (c(2.0, 0.1), c(2.0, 0.1)),
            (c(-0.3, 1.5), c(0.3, 0.0)),
        ] {
            let kv = e.kernel(w, z);
            let recomposed = kv.ratio_to_e * e.eval(z);
            assert!((kv.value - recomposed).norm() <= 1e-12 * (1.0 + kv.value.norm()));
        }
    }

    #[test]
    fn kernel_limit_branch_is_smooth() {
        // Step across the removable singularity at z = w̄ for a real node and
        // check agreement with a point just outside the switch radius.
        let e = trio();
        let w = c(1.5, 0.0);
        let far = e.kernel(w, c(1.5 + 5e-6, 0.0)).value;
        let near = e.kernel(w, c(1.5 + 1e-7, 0.0)).value;
        let at = e.kernel(w, w).value;
        assert!((near - at).norm() < 1e-5 * at.norm());
        assert!((far - at).norm() < 1e-4 * at.norm());
    }

    #[test]
    fn norming_values() {
        // E = z + i: ∇ ≡ 1/√π.
        let inv_sqrt_pi = 1.0 / std::f64::consts::PI.sqrt();
        for z in [c(0.0, 1.0), c(3.0, 0.0), c(-2.0, 4.0)] {
            assert!(rel(onedim().norming(z).unwrap(), inv_sqrt_pi) < 1e-12);
        }
        // E = e^{-iz}: ∇(iy)² = sinh(2y)/(2πy) = 0.5772327… at y = 1.
        let v = pw().norming(c(0.0, 1.0)).unwrap();
        let expect = ((2.0f64).sinh() / (2.0 * std::f64::consts::PI)).sqrt();
        assert!(rel(v, expect) < 1e-12);
        assert!((v - 0.759758).abs() < 1e-5);
    }

    #[test]
    fn majorant_values() {
        // E = z + i: m_E(iy) = 1.
        for y in [0.0, 1.0, 7.5] {
            assert!(rel(onedim().majorant(c(0.0, y)).unwrap(), 1.0) < 1e-13);
        }
        // E = e^{-iz}: m_E(i) = e/2 and m_E(x) = 1/|x + i| on the real axis.
        assert!(rel(
            pw().majorant(c(0.0, 1.0)).unwrap(),
            std::f64::consts::E / 2.0
        ) < 1e-13);
        for x in [0.0, 2.0, -5.0] {
            let expect = 1.0 / c(x, 1.0).norm();
            assert!(rel(pw().majorant(c(x, 0.0)).unwrap(), expect) < 1e-13);
        }
        assert!(onedim().majorant(c(0.0, -1.0)).is_err());
    }

    #[test]
    fn ratio_identity_reference_points() {
        // E = z + i at z = i: both sides are 1/√π.
        let (lhs, rhs) = onedim().ratio_identity_sides(c(0.0, 1.0)).unwrap();
        let inv_sqrt_pi = 1.0 / std::f64::consts::PI.sqrt();
        assert!(rel(lhs, inv_sqrt_pi) < 1e-12);
        assert!(rel(rhs, inv_sqrt_pi) < 1e-12);
        // E = e^{-iz} at z = i: agreement to 1e-10 relative.
        let (lhs, rhs) = pw().ratio_identity_sides(c(0.0, 1.0)).unwrap();
        assert!(rel(lhs, rhs) < 1e-10);
    }

    #[test]
    fn ratio_identity_log_grid() {
        for e in [pw(), onedim(), trio()] {
            let mut y = 1e-2;
            while y <= 50.0 {
                let (lhs, rhs) = e.ratio_identity_sides(c(0.0, y)).unwrap();
                assert!(rel(lhs, rhs) <= 1e-10, "y = {y}: {lhs} vs {rhs}");
                y *= 1.2;
            }
        }
    }

    #[test]
    fn diagonal_consistency_over_heights() {
        // Generic-path kernel at the diagonal against the closed form,
        // down to Im w = 1e-4 where the difference quotient cancels hard.
        for e in [pw(), onedim(), trio()] {
            let mut im = 1e-4;
            while im <= 10.0 {
                let w = c(0.3, im);
                let direct = e.kernel(w, w).value;
                let closed = e.kernel_diag(w).unwrap();
                assert!(
                    rel(direct.re, closed) < 1e-9 && direct.im.abs() < 1e-9 * closed,
                    "im = {im}: {direct} vs {closed}"
                );
                im *= 10.0;
            }
        }
    }

    #[test]
    fn unit_kernel_inner_is_normalized() {
        let e = trio();
        for w in [c(0.0, 1.0), c(2.0, 0.5), c(-1.0, 0.0)] {
            let g = e.unit_kernel_inner(w, w).unwrap();
            assert!((g - Complex64::ONE).norm() < 1e-12, "diag at {w}: {g}");
        }
        // Cross check against the raw kernel at moderate points.
        let (w, v) = (c(0.0, 1.0), c(1.0, 2.0));
        let expect = e.kernel(w, v).value
            / (e.norming(w).unwrap() * e.norming(v).unwrap());
        let got = e.unit_kernel_inner(w, v).unwrap();
        assert!((got - expect).norm() < 1e-12 * (1.0 + expect.norm()));
    }

    #[test]
    fn unit_kernel_inner_extreme_heights() {
        // Paley-Wiener ladder far beyond raw-eval range: the unit inner
        // product approaches 2√(y_m y_n)/(y_m + y_n).
        let e = pw();
        let (ym, yn) = (1e70, 1e73);
        let g = e
            .unit_kernel_inner(c(0.0, ym), c(0.0, yn))
            .unwrap();
        let expect = 2.0 * (ym * yn).sqrt() / (ym + yn);
        assert!(rel(g.re, expect) < 1e-10 && g.im.abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn hb_inequality_holds(re in -5.0f64..5.0, im in 1e-3f64..5.0) {
            for e in [pw(), onedim(), trio()] {
                prop_assert!(e.hb_margin(c(re, im)) > 0.0);
            }
        }

        #[test]
        fn theta_contracts_upper_half_plane(re in -5.0f64..5.0, im in 0.0f64..5.0) {
            for e in [pw(), onedim(), trio()] {
                let t = e.theta(c(re, im)).unwrap().norm();
                prop_assert!(t <= 1.0 + 1e-12);
                if im == 0.0 {
                    prop_assert!((t - 1.0).abs() <= 1e-12);
                }
            }
        }

        #[test]
        fn kernel_hermitian_symmetry(
            wre in -3.0f64..3.0, wim in 0.0f64..3.0,
            zre in -3.0f64..3.0, zim in 0.0f64..3.0,
        ) {
            for e in [pw(), onedim(), trio()] {
                let a = e.kernel(c(wre, wim), c(zre, zim)).value;
                let b = e.kernel(c(zre, zim), c(wre, wim)).value.conj();
                prop_assert!((a - b).norm() <= 1e-12 * (1.0 + a.norm()));
            }
        }

        #[test]
        fn kernel_conjugation_covariance(
            wre in -3.0f64..3.0, wim in 0.0f64..3.0,
            zre in -3.0f64..3.0, zim in 0.0f64..3.0,
        ) {
            // conj(K(w, z̄)) = K(w̄, z): the reflection rule behind F ↦ F♯.
            for e in [pw(), onedim(), trio()] {
                let a = e.kernel(c(wre, wim), c(zre, -zim)).value.conj();
                let b = e.kernel(c(wre, -wim), c(zre, zim)).value;
                prop_assert!((a - b).norm() <= 1e-12 * (1.0 + a.norm()));
            }
        }

        #[test]
        fn sharp_is_involution(re in -5.0f64..5.0, im in -5.0f64..5.0) {
            let z = c(re, im);
            for e in [pw(), trio()] {
                let direct = e.eval(z);
                let twice = e.eval_sharp(z.conj()).conj();
                prop_assert!((direct - twice).norm() <= 1e-12 * (1.0 + direct.norm()));
            }
        }
    }
}
