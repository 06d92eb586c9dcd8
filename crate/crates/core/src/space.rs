//! Hilbert-space algebra on finite spans of reproducing kernels.
//!
//! A [`KernelSpan`] is `F = Σ_j a_j K̃(w_j, ·)` where `K̃(w, ·) = K(w, ·)/∇(w)`
//! is the unit-norm kernel.  Working with unit-kernel coefficients keeps the
//! Gram matrix unit-diagonal and lets every evaluation go through the ratio
//! `F/E`, which stays finite at heights where `E` itself overflows.  Inner
//! products and norms come from Gram closed forms; [`KernelSpan::quadrature_norm`]
//! is the independent oracle that integrates `|F/E|²` over the real line.

use crate::hb::{HbError, StructureFunction};
use crate::quadrature::{self, QuadResult};
use crate::FixtureRef;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

const TWO_PI_I: Complex64 = Complex64::new(0.0, 2.0 * std::f64::consts::PI);

#[derive(Debug, Clone, Error)]
pub enum SpaceError {
    #[error(transparent)]
    Hb(#[from] HbError),
    #[error("spans belong to different structure functions")]
    ParentMismatch,
    #[error("node and coefficient counts differ: {nodes} vs {coeffs}")]
    LengthMismatch { nodes: usize, coeffs: usize },
    #[error("quadratic form produced a negative square norm {0}")]
    NegativeQuadraticForm(f64),
    #[error("quadrature refinement stalled; error estimate {estimate}")]
    QuadratureStall { estimate: f64 },
}

/// Per-node data for ratio-form evaluation. `up` is the upper half-plane
/// representative of the node; `scale` is `conj(E(up))/∇(up)` for upper and
/// real nodes and `E(up)/∇(up)` for lower ones, both finite at any height.
#[derive(Debug, Clone)]
struct KernelNode {
    w: Complex64,
    up: Complex64,
    lower: bool,
    theta_up: Complex64,
    scale: Complex64,
}

impl KernelNode {
    fn build(parent: &StructureFunction, w: Complex64) -> Result<Self, HbError> {
        let lower = w.im < 0.0;
        let up = if lower { w.conj() } else { w };
        let theta_up = parent.theta_unchecked(up);
        let mag = parent.log_e_over_norming(up)?.exp();
        let scale = if lower {
            Complex64::from_polar(mag, parent.arg(up))
        } else {
            Complex64::from_polar(mag, -parent.arg(up))
        };
        Ok(KernelNode {
            w,
            up,
            lower,
            theta_up,
            scale,
        })
    }

    /// `K̃(w, ·)(z)/E(z)` with the removable singularity at `z = conj(up)`
    /// (upper/real nodes) resp. `z = up` (lower nodes) bridged by the
    /// midpoint derivative of `Θ`.
    fn ratio_term(
        &self,
        parent: &StructureFunction,
        z: Complex64,
        theta_z: Complex64,
    ) -> Complex64 {
        if self.lower {
            let d = self.up - z;
            if d.norm() < 1e-6 * (1.0 + self.up.norm()) {
                let mid = 0.5 * (self.up + z);
                self.scale * parent.theta_derivative(mid) / TWO_PI_I
            } else {
                self.scale * (self.theta_up - theta_z) / (TWO_PI_I * d)
            }
        } else {
            let wbar = self.up.conj();
            let d = wbar - z;
            if d.norm() < 1e-6 * (1.0 + wbar.norm()) {
                let mid = 0.5 * (wbar + z);
                self.scale * self.theta_up.conj() * parent.theta_derivative(mid) / TWO_PI_I
            } else {
                self.scale * (1.0 - self.theta_up.conj() * theta_z) / (TWO_PI_I * d)
            }
        }
    }

    /// Coefficients `(u, v)` of the rational split `term(t) = u(t) + v(t)Θ(t)`.
    /// Only valid away from the node itself.
    fn split(&self, t: f64) -> (Complex64, Complex64) {
        if self.lower {
            let d = self.up - t;
            let base = self.scale / (TWO_PI_I * d);
            (base * self.theta_up, -base)
        } else {
            let d = self.up.conj() - t;
            let base = self.scale / (TWO_PI_I * d);
            (base, -base * self.theta_up.conj())
        }
    }

    /// Same split with `t = 1/u`, premultiplied by `t` (finite as `u → 0`).
    fn split_inverted(&self, u: f64) -> (Complex64, Complex64) {
        if self.lower {
            let base = self.scale / (TWO_PI_I * (self.up * u - 1.0));
            (base * self.theta_up, -base)
        } else {
            let base = self.scale / (TWO_PI_I * (self.up.conj() * u - 1.0));
            (base, -base * self.theta_up.conj())
        }
    }

    /// `E(w)/∇(w)` at the actual node (not the representative).
    fn e_over_norming(&self) -> Complex64 {
        if self.lower {
            (self.theta_up * self.scale).conj()
        } else {
            self.scale.conj()
        }
    }
}

/// A finite span of unit-norm reproducing kernels.
#[derive(Debug, Clone)]
pub struct KernelSpan {
    parent: FixtureRef,
    nodes: Vec<Complex64>,
    coeffs: Vec<Complex64>,
    data: Vec<KernelNode>,
}

impl KernelSpan {
    /// Span from unit-kernel coefficients: `F = Σ a_j K̃(w_j, ·)`.
    /// Exact duplicate nodes are merged by summing their coefficients.
    pub fn from_unit_coeffs(
        parent: &FixtureRef,
        nodes: Vec<Complex64>,
        coeffs: Vec<Complex64>,
    ) -> Result<Self, SpaceError> {
        if nodes.len() != coeffs.len() {
            return Err(SpaceError::LengthMismatch {
                nodes: nodes.len(),
                coeffs: coeffs.len(),
            });
        }
        let mut merged_nodes: Vec<Complex64> = Vec::with_capacity(nodes.len());
        let mut merged_coeffs: Vec<Complex64> = Vec::with_capacity(nodes.len());
        for (w, c) in nodes.into_iter().zip(coeffs) {
            match merged_nodes.iter().position(|&m| m == w) {
                Some(i) => merged_coeffs[i] += c,
                None => {
                    merged_nodes.push(w);
                    merged_coeffs.push(c);
                }
            }
        }
        let data = merged_nodes
            .iter()
            .map(|&w| KernelNode::build(parent, w))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(KernelSpan {
            parent: parent.clone(),
            nodes: merged_nodes,
            coeffs: merged_coeffs,
            data,
        })
    }

    /// Span from raw kernel coefficients: `F = Σ c_j K(w_j, ·)`.
    /// Converts through `a_j = c_j ∇(w_j)`, so it needs `∇(w_j)` to be
    /// representable; use unit coefficients for extreme nodes.
    pub fn from_kernel_coeffs(
        parent: &FixtureRef,
        nodes: Vec<Complex64>,
        coeffs: Vec<Complex64>,
    ) -> Result<Self, SpaceError> {
        let unit = nodes
            .iter()
            .zip(&coeffs)
            .map(|(&w, &c)| {
                let up = if w.im < 0.0 { w.conj() } else { w };
                Ok(c * parent.norming(up)?)
            })
            .collect::<Result<Vec<_>, HbError>>()?;
        Self::from_unit_coeffs(parent, nodes, unit)
    }

    /// The single unit kernel `K̃(w, ·)`.
    pub fn unit_kernel(parent: &FixtureRef, w: Complex64) -> Result<Self, SpaceError> {
        Self::from_unit_coeffs(parent, vec![w], vec![Complex64::ONE])
    }

    pub fn zero(parent: &FixtureRef) -> Self {
        KernelSpan {
            parent: parent.clone(),
            nodes: Vec::new(),
            coeffs: Vec::new(),
            data: Vec::new(),
        }
    }

    pub fn parent(&self) -> &FixtureRef {
        &self.parent
    }

    pub fn nodes(&self) -> &[Complex64] {
        &self.nodes
    }

    pub fn unit_coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Raw kernel coefficients `c_j = a_j/∇(w_j)`; may underflow for
    /// extreme nodes.
    pub fn kernel_coeffs(&self) -> Result<Vec<Complex64>, SpaceError> {
        self.nodes
            .iter()
            .zip(&self.coeffs)
            .map(|(&w, &a)| {
                let up = if w.im < 0.0 { w.conj() } else { w };
                Ok(a / self.parent.norming(up)?)
            })
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == Complex64::ZERO)
    }

    fn same_parent(&self, other: &KernelSpan) -> Result<(), SpaceError> {
        if *self.parent == *other.parent {
            Ok(())
        } else {
            Err(SpaceError::ParentMismatch)
        }
    }

    /// Per-node ratio rows at `z`: entry `j` is `K̃(w_j, ·)(z)/E(z)`, so
    /// `F(z)/E(z)` is the coefficient vector contracted against this row.
    pub fn node_ratio_terms(&self, z: Complex64) -> Vec<Complex64> {
        let theta_z = self.parent.theta_unchecked(z);
        self.data
            .iter()
            .map(|n| n.ratio_term(&self.parent, z, theta_z))
            .collect()
    }

    /// `F(z)/E(z)`.
    pub fn eval_ratio(&self, z: Complex64) -> Complex64 {
        let theta_z = self.parent.theta_unchecked(z);
        self.data
            .iter()
            .zip(&self.coeffs)
            .map(|(n, a)| a * n.ratio_term(&self.parent, z, theta_z))
            .sum()
    }

    /// `F(z)`; overflows where `E(z)` does.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.eval_ratio(z) * self.parent.eval(z)
    }

    /// `log |F(z)|` (`-∞` at zeros of `F`).
    pub fn log_abs(&self, z: Complex64) -> f64 {
        self.eval_ratio(z).norm().ln() + self.parent.log_abs(z)
    }

    /// `F♯ = Σ conj(a_j) K̃(w̄_j, ·)`; satisfies `F♯(z) = conj(F(z̄))`.
    pub fn sharp(&self) -> KernelSpan {
        let nodes = self.nodes.iter().map(|w| w.conj()).collect();
        let coeffs = self.coeffs.iter().map(|c| c.conj()).collect();
        KernelSpan::from_unit_coeffs(&self.parent, nodes, coeffs)
            .expect("reflection preserves validity")
    }

    /// Linear combination `α·self + β·other` as one span.
    pub fn combine(
        &self,
        alpha: Complex64,
        other: &KernelSpan,
        beta: Complex64,
    ) -> Result<KernelSpan, SpaceError> {
        self.same_parent(other)?;
        let mut nodes = self.nodes.clone();
        let mut coeffs: Vec<Complex64> = self.coeffs.iter().map(|c| alpha * c).collect();
        nodes.extend_from_slice(&other.nodes);
        coeffs.extend(other.coeffs.iter().map(|c| beta * c));
        KernelSpan::from_unit_coeffs(&self.parent, nodes, coeffs)
    }

    pub fn scaled(&self, alpha: Complex64) -> KernelSpan {
        let mut out = self.clone();
        for c in &mut out.coeffs {
            *c *= alpha;
        }
        out
    }

    /// `(K̃(w_j, ·), K̃(q, ·))_H` where `q` is node `k` of `other`.
    fn unit_pair(&self, j: usize, other: &KernelSpan, k: usize) -> Complex64 {
        let q = &other.data[k];
        let theta_q = if q.lower {
            // Θ at a lower point is the reciprocal conjugate of Θ at the
            // reflection
            q.theta_up.conj().inv()
        } else {
            q.theta_up
        };
        self.data[j].ratio_term(&self.parent, q.w, theta_q) * q.e_over_norming()
    }

    /// Hilbert inner product `(F, G)_H` through the reproducing closed form.
    pub fn inner(&self, other: &KernelSpan) -> Result<Complex64, SpaceError> {
        self.same_parent(other)?;
        let mut acc = Complex64::ZERO;
        for j in 0..self.nodes.len() {
            for k in 0..other.nodes.len() {
                acc += self.coeffs[j] * other.coeffs[k].conj() * self.unit_pair(j, other, k);
            }
        }
        Ok(acc)
    }

    /// Unit-kernel Gram matrix `G[j][k] = (K̃(w_k, ·), K̃(w_j, ·))`, so that
    /// `‖F‖² = a* G a`.
    pub fn gram(&self) -> GramMatrix {
        let n = self.nodes.len();
        let entries = DMatrix::from_fn(n, n, |j, k| self.unit_pair(k, self, j));
        GramMatrix {
            nodes: self.nodes.clone(),
            entries,
            normalized: true,
        }
    }

    /// `‖F‖²` as the Gram quadratic form.
    pub fn norm_sq(&self) -> Result<f64, SpaceError> {
        if self.nodes.is_empty() {
            return Ok(0.0);
        }
        let g = self.gram();
        let a = DVector::from_column_slice(&self.coeffs);
        let q = (a.adjoint() * &g.entries * &a)[(0, 0)];
        let scale: f64 = self.coeffs.iter().map(|c| c.norm_sqr()).sum();
        if q.re < -1e-10 * scale.max(1.0) {
            return Err(SpaceError::NegativeQuadraticForm(q.re));
        }
        Ok(q.re.max(0.0))
    }

    /// `‖F‖_H`.
    pub fn norm(&self) -> Result<f64, SpaceError> {
        Ok(self.norm_sq()?.sqrt())
    }

    /// Independent norm oracle: adaptive quadrature of `∫_R |F/E|² dt`.
    ///
    /// The integrand splits as `|U + VΘ|²` with rational `U, V`; the smooth
    /// part `|U|² + |V|²` of the tails is integrated exactly under `t ↦ 1/t`,
    /// and for `a > 0` the oscillatory cross term is resolved out to a radius
    /// where an integration-by-parts bound pushes the remainder below
    /// tolerance. Returns the norm and the absolute error estimate for the
    /// squared integral.
    pub fn quadrature_norm_with_error(&self, tol: f64) -> Result<(f64, f64), SpaceError> {
        if self.nodes.is_empty() {
            return Ok((0.0, 0.0));
        }
        let parent = &self.parent;
        let a_exp = parent.exp_coeff();
        let g = |t: f64| self.eval_ratio(Complex64::new(t, 0.0)).norm_sqr();

        let r0 = self.nodes.iter().map(|w| w.norm()).fold(1.0f64, f64::max);
        let t0 = 2.0 * r0 + 8.0;
        let core_step = if a_exp > 0.0 {
            0.5 * std::f64::consts::PI / a_exp
        } else {
            f64::INFINITY
        };
        let core = quadrature::adaptive_chunked(&g, -t0, t0, 0.25 * tol, core_step);

        // Smooth part of both tails under u = 1/t: ∫ (|tU|² + |tV|²)(u) du,
        // plus the folded-in cross term when the exponential part is absent.
        let scale_phase = parent.scale().conj() / parent.scale();
        let tail_smooth = |u: f64| {
            let mut tu = Complex64::ZERO;
            let mut tv = Complex64::ZERO;
            for (n, c) in self.data.iter().zip(&self.coeffs) {
                let (su, sv) = n.split_inverted(u);
                tu += c * su;
                tv += c * sv;
            }
            let mut val = tu.norm_sqr() + tv.norm_sqr();
            if a_exp == 0.0 {
                // Blaschke factor expressed in u = 1/t; smooth through u = 0.
                let mut b = scale_phase;
                for zk in self.parent.zeros() {
                    b *= (1.0 - zk.conj() * u) / (1.0 - zk * u);
                }
                val += 2.0 * ((tu.conj() * tv) * b).re;
            }
            val
        };
        let tail_pos = quadrature::adaptive(&tail_smooth, 0.0, 1.0 / t0, 0.125 * tol);
        let tail_neg = quadrature::adaptive(&tail_smooth, -1.0 / t0, 0.0, 0.125 * tol);

        let mut total = core.merge(tail_pos).merge(tail_neg);

        if a_exp > 0.0 {
            total = total.merge(self.oscillatory_tails(t0, 0.25 * tol));
        }

        if !total.converged {
            return Err(SpaceError::QuadratureStall {
                estimate: total.abs_error,
            });
        }
        Ok((total.value.max(0.0).sqrt(), total.abs_error))
    }

    /// Norm oracle with the default 1e-6 absolute tolerance on the integral.
    pub fn quadrature_norm(&self) -> Result<f64, SpaceError> {
        Ok(self.quadrature_norm_with_error(1e-6)?.0)
    }

    /// `∫_{|t| ≥ t0} 2 Re(conj(U) V Θ) dt` for `a > 0`: numeric out to `t1`,
    /// integration-by-parts remainder bound beyond it.
    fn oscillatory_tails(&self, t0: f64, tol: f64) -> QuadResult {
        let parent = &self.parent;
        let a_exp = parent.exp_coeff();
        let q = |t: f64| {
            let z = Complex64::new(t, 0.0);
            let theta = parent.theta_unchecked(z);
            let mut u_sum = Complex64::ZERO;
            let mut v_sum = Complex64::ZERO;
            for (n, c) in self.data.iter().zip(&self.coeffs) {
                let (u, v) = n.split(t);
                u_sum += c * u;
                v_sum += c * v;
            }
            2.0 * (u_sum.conj() * v_sum * theta).re
        };

        // Envelope constants: |U(t)| ≤ c_u/|t| and |U'(t)| ≤ 2c_u/t² for
        // |t| ≥ t0 ≥ 2 max |w_j|; likewise for V.
        let mut s_u = 0.0;
        let mut s_v = 0.0;
        for (n, c) in self.data.iter().zip(&self.coeffs) {
            let amp = (c * n.scale).norm() / (2.0 * std::f64::consts::PI);
            let th = n.theta_up.norm();
            if n.lower {
                s_u += amp * th;
                s_v += amp;
            } else {
                s_u += amp;
                s_v += amp * th;
            }
        }
        let (c_u, c_v) = (2.0 * s_u, 2.0 * s_v);
        let c_b: f64 = 8.0 * parent.zeros().iter().map(|z| -z.im).sum::<f64>();
        // one integration by parts: |∫_{t1}^∞ e^{2iat} H dt| ≤ (|H(t1)| + ∫|H'|)/(2a)
        // with H = conj(U) V B and |H'| ≤ (|U'||V| + |U||V'| + |U||V||B'/B|)
        let rem_at = |t1: f64| {
            2.0 * (c_u * c_v / (t1 * t1)
                + 2.0 * c_u * c_v / (t1 * t1)
                + c_u * c_v * c_b / (3.0 * t1 * t1 * t1))
                / (2.0 * a_exp)
        };
        let budget = 0.5 * tol;
        let mut t1 = t0.max(8.0 * c_u.max(c_v));
        while rem_at(t1) > budget && t1 < 1e9 {
            t1 *= 1.5;
        }
        let step = 0.5 * std::f64::consts::PI / a_exp;
        let pos = quadrature::adaptive_chunked(&q, t0, t1, 0.25 * tol, step);
        let neg = quadrature::adaptive_chunked(&q, -t1, -t0, 0.25 * tol, step);
        let mut out = pos.merge(neg);
        out.abs_error += 2.0 * rem_at(t1);
        out
    }
}

/// Gram matrix of kernel values; unit diagonal in the normalized variant.
#[derive(Debug, Clone)]
pub struct GramMatrix {
    pub nodes: Vec<Complex64>,
    pub entries: DMatrix<Complex64>,
    pub normalized: bool,
}

impl GramMatrix {
    /// `max_{jk} |G[j][k] - conj(G[k][j])|`.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.entries.nrows();
        let mut d: f64 = 0.0;
        for j in 0..n {
            for k in 0..n {
                d = d.max((self.entries[(j, k)] - self.entries[(k, j)].conj()).norm());
            }
        }
        d
    }

    /// Eigenvalues of the hermitized matrix, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let n = self.entries.nrows();
        if n == 0 {
            return Vec::new();
        }
        let herm = (&self.entries + self.entries.adjoint()) * Complex64::new(0.5, 0.0);
        let mut ev: Vec<f64> = herm
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Sum of squared moduli of the off-diagonal entries.
    pub fn off_diagonal_sq(&self) -> f64 {
        let n = self.entries.nrows();
        let mut s = 0.0;
        for j in 0..n {
            for k in 0..n {
                if j != k {
                    s += self.entries[(j, k)].norm_sqr();
                }
            }
        }
        s
    }
}
