//! Majorants on unbounded domains, the Banach norm `‖·‖_m`, unit-ball
//! certificates, the `≼` preorder and minimal-majorant detection.
//!
//! `‖F‖_m = max(‖F‖_H, min{C ≥ 0 : |F|, |F♯| ≤ C·m on D})`.  The sup part is
//! estimated on a geometric sample grid refined until stable, with tail
//! probes past the last sample; boundedness on an unbounded set is only
//! semi-decidable, so certificates carry the grid diagnostics.

use crate::hb::HbError;
use crate::space::{KernelSpan, SpaceError};
use crate::FixtureRef;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum MajorantError {
    #[error(transparent)]
    Hb(#[from] HbError),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error("majorant form requires a structure function but none was attached")]
    MissingParent,
    #[error("majorant and span belong to different structure functions")]
    ParentMismatch,
    #[error("tabulated majorant has no value at {0}")]
    TableMiss(Complex64),
    #[error("witness span is zero")]
    ZeroWitness,
    #[error("domain has no samples")]
    EmptyDomain,
}

/// Supported domain shapes. Bounded sets are excluded by construction; the
/// grids are strictly monotone in the ray or line parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainKind {
    /// `i[y0, ∞)`.
    ImaginaryRay { y0: f64 },
    /// `{x ∈ ℝ : |x| ≥ x0}`.
    RealLine { x0: f64 },
    /// Explicit sample set; no refinement or tail probing.
    CustomSampled,
}

/// How the sup over the unbounded part beyond the sampled range is handled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailPolicy {
    /// Number of probe rounds past the last sample.
    pub probe_rounds: u32,
    /// Multiplicative step per probe round.
    pub probe_factor: f64,
    /// Relative growth classified as "still increasing".
    pub growth_tol: f64,
}

impl Default for TailPolicy {
    fn default() -> Self {
        TailPolicy {
            probe_rounds: 8,
            probe_factor: 2.0,
            growth_tol: 1e-6,
        }
    }
}

/// A domain of majorization with its sample grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainSpec {
    pub kind: DomainKind,
    /// Sample parameters, strictly increasing (`y` on the ray, `x` on the
    /// line where negative values sample the left half, indices for custom
    /// sets).
    pub params: Vec<f64>,
    /// Explicit points for [`DomainKind::CustomSampled`].
    pub custom_points: Vec<Complex64>,
    pub tail: TailPolicy,
}

fn geometric(lo: f64, hi: f64, ratio: f64) -> Vec<f64> {
    assert!(lo > 0.0 && hi >= lo && ratio > 1.0);
    let mut out = vec![lo];
    let mut v = lo;
    while v * ratio < hi {
        v *= ratio;
        out.push(v);
    }
    if *out.last().unwrap() < hi {
        out.push(hi);
    }
    out
}

impl DomainSpec {
    /// `i[y0, ∞)` sampled geometrically on `[y0, y_max]`.
    pub fn imaginary_ray(y0: f64, y_max: f64, ratio: f64) -> Self {
        DomainSpec {
            kind: DomainKind::ImaginaryRay { y0 },
            params: geometric(y0, y_max, ratio),
            custom_points: Vec::new(),
            tail: TailPolicy::default(),
        }
    }

    /// `|x| ≥ x0` sampled geometrically on both half-lines.
    pub fn real_line(x0: f64, x_max: f64, ratio: f64) -> Self {
        let pos = geometric(x0, x_max, ratio);
        let mut params: Vec<f64> = pos.iter().rev().map(|x| -x).collect();
        params.extend(pos);
        DomainSpec {
            kind: DomainKind::RealLine { x0 },
            params,
            custom_points: Vec::new(),
            tail: TailPolicy::default(),
        }
    }

    pub fn custom(points: Vec<Complex64>) -> Self {
        DomainSpec {
            kind: DomainKind::CustomSampled,
            params: (0..points.len()).map(|i| i as f64).collect(),
            custom_points: points,
            tail: TailPolicy::default(),
        }
    }

    /// Point of the domain for parameter `p`.
    pub fn point(&self, p: f64) -> Complex64 {
        match self.kind {
            DomainKind::ImaginaryRay { .. } => Complex64::new(0.0, p),
            DomainKind::RealLine { .. } => Complex64::new(p, 0.0),
            DomainKind::CustomSampled => self.custom_points[p as usize],
        }
    }

    pub fn sample_points(&self) -> Vec<Complex64> {
        self.params.iter().map(|&p| self.point(p)).collect()
    }

    /// Insert refinement midpoints between consecutive parameters
    /// (geometric when the signs agree), skipping anything that would land
    /// outside the domain (the gap `(-x0, x0)` of a truncated line).
    pub fn refine_params(&self, params: &[f64]) -> Vec<f64> {
        let admissible = |p: f64| match self.kind {
            DomainKind::ImaginaryRay { y0 } => p >= y0,
            DomainKind::RealLine { x0 } => p.abs() >= x0,
            DomainKind::CustomSampled => true,
        };
        let mut out = Vec::with_capacity(2 * params.len());
        for i in 0..params.len() {
            out.push(params[i]);
            if i + 1 < params.len() {
                let (a, b) = (params[i], params[i + 1]);
                let mid = if a > 0.0 && b > 0.0 {
                    (a * b).sqrt()
                } else if a < 0.0 && b < 0.0 {
                    -((a * b).sqrt())
                } else {
                    continue;
                };
                if admissible(mid) {
                    out.push(mid);
                }
            }
        }
        out
    }

    /// Does this domain contain `other` as a set? Cross-kind comparisons
    /// are conservatively answered `false`.
    pub fn includes(&self, other: &DomainSpec) -> bool {
        match (self.kind, other.kind) {
            (DomainKind::ImaginaryRay { y0: a }, DomainKind::ImaginaryRay { y0: b }) => a <= b,
            (DomainKind::RealLine { x0: a }, DomainKind::RealLine { x0: b }) => a <= b,
            (DomainKind::CustomSampled, DomainKind::CustomSampled) => {
                other.custom_points.iter().all(|q| {
                    self.custom_points
                        .iter()
                        .any(|p| (p - q).norm() <= 1e-12 * (1.0 + q.norm()))
                })
            }
            _ => false,
        }
    }
}

/// Closed-form or tabulated positive weight.
#[derive(Debug, Clone)]
pub enum MajorantForm {
    /// `m ≡ c`.
    Const(f64),
    /// Canonical majorant `m_E(z) = |E(z)|/|z+i|`.
    CanonicalStructure,
    /// Ratio majorant `m̃(z) = |E(z)|/|z|`.
    RatioStructure,
    /// `(1 + |z|)^alpha`.
    Power { alpha: f64 },
    /// `(1 + |z|)^alpha · exp(beta |z|^gamma)`.
    PowerExp { alpha: f64, beta: f64, gamma: f64 },
    /// `|F0(z)|/‖F0‖_H` for a witness span `F0`.
    WitnessRatio { span: KernelSpan, norm: f64 },
    /// Tabulated values on explicit points.
    Table {
        points: Vec<Complex64>,
        values: Vec<f64>,
    },
}

/// A positive weight on a domain, with an optional zero divisor
/// (point, order) that multiplies the form by `Π |z - p|^order`.
#[derive(Debug, Clone)]
pub struct Majorant {
    pub domain: DomainSpec,
    pub form: MajorantForm,
    pub divisor: Vec<(Complex64, u32)>,
    pub parent: Option<FixtureRef>,
}

impl Majorant {
    pub fn new(
        domain: DomainSpec,
        form: MajorantForm,
        parent: Option<FixtureRef>,
    ) -> Result<Self, MajorantError> {
        let needs_parent = matches!(
            form,
            MajorantForm::CanonicalStructure | MajorantForm::RatioStructure
        );
        if needs_parent && parent.is_none() {
            return Err(MajorantError::MissingParent);
        }
        Ok(Majorant {
            domain,
            form,
            divisor: Vec::new(),
            parent,
        })
    }

    pub fn with_divisor(mut self, divisor: Vec<(Complex64, u32)>) -> Self {
        self.divisor = divisor;
        self
    }

    /// Witness-ratio majorant `∇_{span F0}|_D`.
    pub fn witness_ratio(domain: DomainSpec, span: &KernelSpan) -> Result<Self, MajorantError> {
        let norm = span.norm()?;
        if norm == 0.0 {
            return Err(MajorantError::ZeroWitness);
        }
        Ok(Majorant {
            domain,
            form: MajorantForm::WitnessRatio {
                span: span.clone(),
                norm,
            },
            divisor: Vec::new(),
            parent: Some(span.parent().clone()),
        })
    }

    /// `log m(z)`; `-∞` exactly at divisor zeros.
    pub fn log_eval(&self, z: Complex64) -> Result<f64, MajorantError> {
        let base = match &self.form {
            MajorantForm::Const(c) => c.ln(),
            MajorantForm::CanonicalStructure => self
                .parent
                .as_ref()
                .ok_or(MajorantError::MissingParent)?
                .log_majorant(z)?,
            MajorantForm::RatioStructure => self
                .parent
                .as_ref()
                .ok_or(MajorantError::MissingParent)?
                .log_ratio_majorant(z),
            MajorantForm::Power { alpha } => alpha * (1.0 + z.norm()).ln(),
            MajorantForm::PowerExp { alpha, beta, gamma } => {
                alpha * (1.0 + z.norm()).ln() + beta * z.norm().powf(*gamma)
            }
            MajorantForm::WitnessRatio { span, norm } => span.log_abs(z) - norm.ln(),
            MajorantForm::Table { points, values } => {
                let idx = points
                    .iter()
                    .position(|p| (p - z).norm() <= 1e-9 * (1.0 + z.norm()))
                    .ok_or(MajorantError::TableMiss(z))?;
                values[idx].ln()
            }
        };
        let div: f64 = self
            .divisor
            .iter()
            .map(|(p, d)| *d as f64 * (z - p).norm().ln())
            .sum();
        Ok(base + div)
    }

    pub fn eval(&self, z: Complex64) -> Result<f64, MajorantError> {
        Ok(self.log_eval(z)?.exp())
    }
}

/// Certificate for membership of a span in the `‖·‖_m` unit ball.
#[derive(Debug, Clone)]
pub struct BallCertificate {
    pub element: KernelSpan,
    pub h_norm: f64,
    /// Best constant `C` with `|F|, |F♯| ≤ C·m` on the sampled domain;
    /// infinite when a divisor is violated or the tail keeps growing.
    pub sup_ratio: f64,
    pub m_norm: f64,
    pub tail_bounded: bool,
    pub refinements: u32,
}

impl BallCertificate {
    pub fn in_unit_ball(&self, tol: f64) -> bool {
        self.m_norm <= 1.0 + tol
    }
}

/// Options for the sup-ratio estimation.
#[derive(Debug, Clone, Copy)]
pub struct NormOptions {
    pub rtol: f64,
    pub max_refinements: u32,
}

impl Default for NormOptions {
    fn default() -> Self {
        NormOptions {
            rtol: 1e-9,
            max_refinements: 5,
        }
    }
}

fn log_ratio_at(
    f: &KernelSpan,
    f_sharp: &KernelSpan,
    m: &Majorant,
    z: Complex64,
) -> Result<f64, MajorantError> {
    let lf = f.log_abs(z).max(f_sharp.log_abs(z));
    Ok(lf - m.log_eval(z)?)
}

/// `‖F‖_m` as a certificate: Hilbert part from the Gram form, sup part from
/// the refined sample grid plus tail probes.
pub fn norm_m(
    f: &KernelSpan,
    m: &Majorant,
    opts: NormOptions,
) -> Result<BallCertificate, MajorantError> {
    if let Some(p) = &m.parent {
        if **p != **f.parent() {
            return Err(MajorantError::ParentMismatch);
        }
    }
    let h_norm = f.norm()?;
    if f.is_zero() {
        return Ok(BallCertificate {
            element: f.clone(),
            h_norm: 0.0,
            sup_ratio: 0.0,
            m_norm: 0.0,
            tail_bounded: true,
            refinements: 0,
        });
    }
    let f_sharp = f.sharp();

    // Divisor check: |F|/m must stay bounded approaching a divisor point
    // along the domain; an exploding local power ratio flags a non-member.
    for (p, order) in &m.divisor {
        if *order == 0 {
            continue;
        }
        let dir = match m.domain.kind {
            DomainKind::ImaginaryRay { .. } => Complex64::I,
            _ => Complex64::ONE,
        };
        let scale = 1.0 + p.norm();
        let r_far = log_ratio_at(f, &f_sharp, m, p + dir * (1e-2 * scale))?;
        let r_near = log_ratio_at(f, &f_sharp, m, p + dir * (1e-4 * scale))?;
        // a zero deficit of one order grows the ratio by two decades here
        if r_near - r_far > *order as f64 * 10.0f64.ln() {
            return Ok(BallCertificate {
                element: f.clone(),
                h_norm,
                sup_ratio: f64::INFINITY,
                m_norm: f64::INFINITY,
                tail_bounded: true,
                refinements: 0,
            });
        }
    }

    let mut params = m.domain.params.clone();
    if params.is_empty() {
        return Err(MajorantError::EmptyDomain);
    }
    let sup_on = |params: &[f64]| -> Result<f64, MajorantError> {
        let mut s = f64::NEG_INFINITY;
        for &p in params {
            s = s.max(log_ratio_at(f, &f_sharp, m, m.domain.point(p))?);
        }
        Ok(s)
    };

    let mut sup_log = sup_on(&params)?;
    let mut refinements = 0;
    if m.domain.kind != DomainKind::CustomSampled {
        while refinements < opts.max_refinements {
            let finer = m.domain.refine_params(&params);
            let s = sup_on(&finer)?;
            params = finer;
            refinements += 1;
            let done = s - sup_log <= opts.rtol;
            sup_log = s;
            if done {
                break;
            }
        }
    }

    // Tail probes past the sampled range.
    let mut tail_bounded = true;
    if m.domain.kind != DomainKind::CustomSampled {
        let policy = m.domain.tail;
        let ends: Vec<f64> = match m.domain.kind {
            DomainKind::ImaginaryRay { .. } => vec![*params.last().unwrap()],
            _ => vec![params[0], *params.last().unwrap()],
        };
        for end in ends {
            let mut prev = sup_on(&[end])?;
            let mut p = end;
            let mut growing = false;
            for _ in 0..policy.probe_rounds {
                p *= policy.probe_factor;
                let v = sup_on(&[p])?;
                sup_log = sup_log.max(v);
                growing = v > prev + policy.growth_tol;
                prev = v;
            }
            if growing {
                tail_bounded = false;
            }
        }
    }

    let sup_ratio = if tail_bounded {
        sup_log.exp()
    } else {
        f64::INFINITY
    };
    Ok(BallCertificate {
        element: f.clone(),
        h_norm,
        sup_ratio,
        m_norm: h_norm.max(sup_ratio),
        tail_bounded,
        refinements,
    })
}

/// Outcome of the `≼` comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PreorderRelation {
    Less,
    Equivalent,
    Greater,
    Incomparable,
}

/// One direction of the boundedness scan (`numerator ≲ denominator`).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DirectionScan {
    pub domain_included: bool,
    pub sup_log_base: f64,
    pub sup_log_refined: f64,
    /// Sup stayed put under refining and extending the grid.
    pub stable: bool,
    pub holds: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PreorderReport {
    pub relation: PreorderRelation,
    pub forward: DirectionScan,
    pub backward: DirectionScan,
}

fn direction_scan(
    num: &Majorant,
    den: &Majorant,
    shared: &DomainSpec,
    included: bool,
) -> Result<DirectionScan, MajorantError> {
    let ratio_at = |p: f64| -> Result<f64, MajorantError> {
        let z = shared.point(p);
        Ok(num.log_eval(z)? - den.log_eval(z)?)
    };
    let sup = |params: &[f64]| -> Result<f64, MajorantError> {
        let mut s = f64::NEG_INFINITY;
        for &p in params {
            s = s.max(ratio_at(p)?);
        }
        Ok(s)
    };
    let base = sup(&shared.params)?;
    let (refined, stable) = if shared.kind == DomainKind::CustomSampled {
        (base, true)
    } else {
        // refine in place and extend the parameter range by two octaves
        let mut finer = shared.refine_params(&shared.params);
        let last = finer.iter().fold(0.0f64, |m, p| m.max(p.abs()));
        let ext: Vec<f64> = finer
            .iter()
            .map(|&p| p * 16.0)
            .filter(|q| q.abs() > last)
            .collect();
        finer.extend(ext);
        let s = sup(&finer)?;
        let stable = s <= base + 0.1;
        (s, stable)
    };
    Ok(DirectionScan {
        domain_included: included,
        sup_log_base: base,
        sup_log_refined: refined,
        stable,
        holds: included && stable && refined.is_finite(),
    })
}

/// Decide `m1 ≼ m2`, `m2 ≼ m1`, both or neither: domain inclusion plus
/// boundedness of the ratio on the shared grid, stability-checked under
/// refinement. A semi-decision; unstable scans yield `Incomparable`.
pub fn compare_preorder(m1: &Majorant, m2: &Majorant) -> Result<PreorderReport, MajorantError> {
    // m1 ≼ m2 needs D1 ⊇ D2 and m1 ≲ m2 on D2
    let fwd = direction_scan(m1, m2, &m2.domain, m1.domain.includes(&m2.domain))?;
    let bwd = direction_scan(m2, m1, &m1.domain, m2.domain.includes(&m1.domain))?;
    let relation = match (fwd.holds, bwd.holds) {
        (true, true) => PreorderRelation::Equivalent,
        (true, false) => PreorderRelation::Less,
        (false, true) => PreorderRelation::Greater,
        (false, false) => PreorderRelation::Incomparable,
    };
    Ok(PreorderReport {
        relation,
        forward: fwd,
        backward: bwd,
    })
}

/// Report of the minimality signature test: a majorant is compatible with
/// minimality exactly when it is `≍`-equivalent to the witness ratio
/// `|F0(z)|/‖F0‖` of a one-dimensional subspace.
#[derive(Debug, Clone)]
pub struct MinimalReport {
    pub preorder: PreorderReport,
    pub minimal_compatible: bool,
}

pub fn minimal_check(m: &Majorant, witness: &KernelSpan) -> Result<MinimalReport, MajorantError> {
    let nabla = Majorant::witness_ratio(m.domain.clone(), witness)?;
    let preorder = compare_preorder(m, &nabla)?;
    Ok(MinimalReport {
        minimal_compatible: preorder.relation == PreorderRelation::Equivalent,
        preorder,
    })
}
