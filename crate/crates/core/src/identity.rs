//! Audit of the closed-form rational identity for the pairwise transport
//! residual `H^i_00 = U^i − Ū^i`, where `U^i = T^i − (1/(n+1)) T^m_{y^m} y^i`.
//!
//! For the quadratic-family metric, `U^i` collapses over the common
//! denominator `(α² − kβ²)²((1+2kb²)α² − 3kβ²)²` into a numerator polynomial
//! in α of degree 9; for the Matsumoto metric the denominator is
//! `ᾱ(ᾱ − 2β̄)²((1+2b̄²)ᾱ − 3β̄)²` with a degree-6 numerator. Each coefficient
//! group multiplies one of the three vector basis elements `s^i_0`, `b^i`,
//! `y^i`.
//!
//! Two table sets live here side by side:
//!
//! * the **tabulated** set — the closed-form coefficient tables under audit,
//!   transcribed verbatim (including any defects; one dangling term in the
//!   E-group carries no basis vector in its source and is attached to `y^i`,
//!   the reading every other μ-term uses);
//! * the **derived** set — re-derived symbolically from the transport term
//!   and its divergence; the ground truth the audit compares against and
//!   itself validated here against first-principles evaluation.
//!
//! The audit reports the fraction-level residual of the tabulated set
//! against a first-principles evaluation of `H^i_00` and, when they
//! disagree, isolates the defect to named coefficient groups by comparing
//! the two sets scalar by scalar. Both outcomes — confirmation or a
//! deterministic isolation report — are first-class results; only silent
//! disagreement is a failure.

use crate::alphabeta::PhiFamily;
use crate::error::{Error, Result};
use crate::fields::{ChartPoint, FiberVector, MetricSpec};
use crate::projective::SamplePlan;
use crate::riemann::contract_scalars;
use crate::spray::{compute_ti, PointContext};
use crate::tol;

/// Scalar coefficients of one numerator group, multiplying the basis
/// vectors s^i_0 (`s`), b^i (`b`) and y^i (`y`).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GroupTerm {
    pub s: f64,
    pub b: f64,
    pub y: f64,
}

impl GroupTerm {
    fn eval(&self, side: &SideSample, i: usize) -> f64 {
        self.s * side.s_up_0[i] + self.b * side.b_up[i] + self.y * side.y[i]
    }

    fn max_rel_diff(&self, other: &GroupTerm) -> f64 {
        let rel = |t: f64, d: f64| {
            let m = t.abs().max(d.abs());
            if m == 0.0 {
                0.0
            } else {
                (t - d).abs() / m
            }
        };
        rel(self.s, other.s)
            .max(rel(self.b, other.b))
            .max(rel(self.y, other.y))
    }
}

/// Per-metric scalar data entering the tables at one (x, y).
#[derive(Debug, Clone)]
pub struct SideSample {
    pub alpha: f64,
    pub beta: f64,
    pub b2: f64,
    pub s0: f64,
    pub r00: f64,
    pub r0: f64,
    pub s_up_0: Vec<f64>,
    pub b_up: Vec<f64>,
    pub y: Vec<f64>,
}

fn side_sample(ctx: &PointContext, y: &FiberVector) -> Result<SideSample> {
    let n = ctx.dim();
    let yv = &y.coords;
    let mut alpha2 = 0.0;
    let mut beta = 0.0;
    for i in 0..n {
        beta += ctx.bc.b[i] * yv[i];
        for j in 0..n {
            alpha2 += ctx.rd.a[i * n + j] * yv[i] * yv[j];
        }
    }
    if alpha2 <= 0.0 {
        return Err(Error::SingularEvaluation("alpha^2 not positive".into()));
    }
    let c = contract_scalars(&ctx.bc, y);
    Ok(SideSample {
        alpha: alpha2.sqrt(),
        beta,
        b2: ctx.bc.b2,
        s0: c.s_0,
        r00: c.r_00,
        r0: c.r_0,
        s_up_0: c.s_up_0,
        b_up: ctx.bc.b_up.clone(),
        y: yv.clone(),
    })
}

// ---------------------------------------------------------------------------
// Quadratic-family side: numerator groups attach to α⁹…α⁰ (no α¹ group),
// denominator coefficients to α⁸, α⁶, α⁴, α², α⁰.
// ---------------------------------------------------------------------------

/// Tabulated numerator groups for the quadratic side, indexed by power of α.
pub fn tabulated_quadratic_groups(p: &SideSample, eps: f64, k: f64, mu: f64) -> [GroupTerm; 10] {
    let (be, b2, s0, r00, r0) = (p.beta, p.b2, p.s0, p.r00, p.r0);
    let u = 1.0 + 2.0 * k * b2;
    let mut g = [GroupTerm::default(); 10];
    // A^i
    g[9].s = u * u * eps;
    g[9].b = -2.0 * eps * k * u * s0;
    // B^i
    g[8].s = 2.0 * k * k * u * u * be;
    g[8].b = u * (-4.0 * k * k * be * s0 - k * r00);
    g[8].y = u * (-2.0 * k * mu * s0 - 2.0 * mu * k * r0);
    // C^i
    g[7].s = -(7.0 + 2.0 * k * b2) * u * eps * k * be * be;
    g[7].b = 4.0 * eps * (2.0 + k * b2) * k * k * be * be * s0;
    g[7].y = -12.0 * mu * eps * k * k * be * s0 * b2;
    // D^i
    g[6].s = (-14.0 - 4.0 * k * b2) * u * k * k * be.powi(3);
    g[6].b = 8.0 * k.powi(3) * (2.0 + k * b2) * be.powi(3) * s0 + 3.0 * k * k * be * be * r00;
    g[6].y = -6.0 * mu * k * k * b2 * be * r00
        + mu * k * k * (10.0 + 8.0 * k * b2) * be * be * r0
        + mu * k * k * (10.0 + 32.0 * k * b2) * be * be * s0;
    // E^i (final term carries no basis vector in the source; attached to y^i)
    g[5].s = -8.0 * eps * k * k * be.powi(4);
    g[5].b = -6.0 * eps * k.powi(3) * be.powi(4) * s0;
    g[5].y = -12.0 * mu * eps * k * k * (1.0 + k * b2) * be.powi(3) * s0;
    // F^i
    g[4].s = 18.0 * k.powi(3) * (1.0 + k * b2) * be.powi(5);
    g[4].b = k * k * be.powi(3) * (-60.0 * k * k * be * be * s0 - u * k * be * r00);
    g[4].y = k * k
        * be.powi(3)
        * (-mu * k * (14.0 + 4.0 * k * b2) * be * r0 - 48.0 * k * be * s0 - 6.0 * mu * u * r00);
    // H^i
    g[3].s = 9.0 * eps * k.powi(3) * be.powi(6);
    g[3].y = 12.0 * eps * k.powi(3) * be.powi(5) * mu * s0;
    // P^i
    g[2].s = -18.0 * k.powi(4) * be.powi(7);
    g[2].b = -3.0 * k.powi(4) * be.powi(6) * r00;
    g[2].y = -6.0 * mu * k.powi(3) * be.powi(5) * (2.0 + k * b2) * r00
        + 6.0 * mu * k.powi(4) * be.powi(6) * (5.0 * s0 + r0);
    // Q^i
    g[0].y = 6.0 * mu * k.powi(4) * be.powi(7) * r00;
    g
}

/// Derived (ground-truth) numerator groups for the quadratic side.
pub fn derived_quadratic_groups(p: &SideSample, eps: f64, k: f64, mu: f64) -> [GroupTerm; 10] {
    let (be, b2, s0, r00, r0) = (p.beta, p.b2, p.s0, p.r00, p.r0);
    let mut g = [GroupTerm::default(); 10];
    g[9].s = b2 * (4.0 * b2 * eps * k.powi(2) + 4.0 * eps * k) + eps;
    g[9].b = s0 * (-4.0 * b2 * eps * k.powi(2) - 2.0 * eps * k);
    g[8].s = be * (b2 * (8.0 * b2 * k.powi(3) + 8.0 * k.powi(2)) + 2.0 * k);
    g[8].b =
        be * s0 * (-8.0 * b2 * k.powi(3) - 4.0 * k.powi(2)) + r00 * (2.0 * b2 * k.powi(2) + k);
    g[8].y = r0 * (-4.0 * b2 * k.powi(2) * mu - 2.0 * k * mu)
        + s0 * (-4.0 * b2 * k.powi(2) * mu - 2.0 * k * mu);
    g[7].s =
        be.powi(2) * (b2 * (-4.0 * b2 * eps * k.powi(3) - 16.0 * eps * k.powi(2)) - 7.0 * eps * k);
    g[7].b = be.powi(2) * s0 * (4.0 * b2 * eps * k.powi(3) + 8.0 * eps * k.powi(2));
    g[7].y = 12.0 * b2 * be * eps * k.powi(2) * mu * s0;
    g[6].s = be.powi(3) * (b2 * (-8.0 * b2 * k.powi(4) - 32.0 * k.powi(3)) - 14.0 * k.powi(2));
    g[6].b = be.powi(2)
        * (be * s0 * (8.0 * b2 * k.powi(4) + 16.0 * k.powi(3))
            + r00 * (-4.0 * b2 * k.powi(3) - 5.0 * k.powi(2)));
    g[6].y = be
        * (-6.0 * b2 * k.powi(2) * mu * r00
            + be * (r0 * (8.0 * b2 * k.powi(3) * mu + 10.0 * k.powi(2) * mu)
                + s0 * (32.0 * b2 * k.powi(3) * mu + 10.0 * k.powi(2) * mu)));
    g[5].s = be.powi(4) * (12.0 * b2 * eps * k.powi(3) + 15.0 * eps * k.powi(2));
    g[5].b = -6.0 * be.powi(4) * eps * k.powi(3) * s0;
    g[5].y = be.powi(3) * s0 * (-12.0 * b2 * eps * k.powi(3) * mu - 12.0 * eps * k.powi(2) * mu);
    g[4].s = be.powi(5) * (24.0 * b2 * k.powi(4) + 30.0 * k.powi(3));
    g[4].b =
        be.powi(4) * (-12.0 * be * k.powi(4) * s0 + r00 * (2.0 * b2 * k.powi(4) + 7.0 * k.powi(3)));
    g[4].y = be.powi(3)
        * (be * (r0 * (-4.0 * b2 * k.powi(4) * mu - 14.0 * k.powi(3) * mu)
            + s0 * (-28.0 * b2 * k.powi(4) * mu - 38.0 * k.powi(3) * mu))
            + r00 * (12.0 * b2 * k.powi(3) * mu + 6.0 * k.powi(2) * mu));
    g[3].s = -9.0 * be.powi(6) * eps * k.powi(3);
    g[3].y = 12.0 * be.powi(5) * eps * k.powi(3) * mu * s0;
    g[2].s = -18.0 * be.powi(7) * k.powi(4);
    g[2].b = -3.0 * be.powi(6) * k.powi(4) * r00;
    g[2].y = be.powi(5)
        * (be * (6.0 * k.powi(4) * mu * r0 + 30.0 * k.powi(4) * mu * s0)
            + r00 * (-6.0 * b2 * k.powi(4) * mu - 12.0 * k.powi(3) * mu));
    g[0].y = 6.0 * be.powi(7) * k.powi(4) * mu * r00;
    g
}

/// Tabulated denominator coefficients for the quadratic side: powers
/// α⁸, α⁶, α⁴, α², α⁰.
pub fn tabulated_quadratic_denominator(p: &SideSample, k: f64) -> [f64; 5] {
    let (be, b2) = (p.beta, p.b2);
    let u = 1.0 + 2.0 * k * b2;
    [
        u * u,
        -4.0 * k * u * (2.0 + k * b2) * be * be,
        k * k * be.powi(4) * (22.0 + 38.0 * k * b2 + 4.0 * k * k * b2 * b2),
        -12.0 * k.powi(3) * be.powi(6) * (b2 * k + 2.0),
        9.0 * k.powi(4) * be.powi(8),
    ]
}

/// Derived denominator coefficients: expansion of
/// `(α² − kβ²)²((1+2kb²)α² − 3kβ²)²`. Differs from the tabulated set only in
/// the α⁴ group (28 k b² versus 38 k b²).
pub fn derived_quadratic_denominator(p: &SideSample, k: f64) -> [f64; 5] {
    let (be, b2) = (p.beta, p.b2);
    let u = 1.0 + 2.0 * k * b2;
    [
        u * u,
        -4.0 * k * u * (2.0 + k * b2) * be * be,
        k * k * be.powi(4) * (22.0 + 28.0 * k * b2 + 4.0 * k * k * b2 * b2),
        -12.0 * k.powi(3) * be.powi(6) * (b2 * k + 2.0),
        9.0 * k.powi(4) * be.powi(8),
    ]
}

// ---------------------------------------------------------------------------
// Matsumoto side: numerator groups attach to ᾱ⁶…ᾱ⁰, denominator coefficients
// to ᾱ⁵…ᾱ¹ (the whole denominator carries one factor ᾱ).
// ---------------------------------------------------------------------------

/// Tabulated numerator groups for the Matsumoto side. The source mixes
/// unbarred `b²`/`β` symbols into barred context; all are read as barred.
pub fn tabulated_matsumoto_groups(p: &SideSample, mu: f64) -> [GroupTerm; 7] {
    let (be, b2, s0, r00, r0) = (p.beta, p.b2, p.s0, p.r00, p.r0);
    let v = 1.0 + 2.0 * b2;
    let mut g = [GroupTerm::default(); 7];
    // Ā
    g[6].s = v * v;
    g[6].b = -2.0 * v * s0;
    // B̄
    g[5].s = -4.0 * v * be * (2.0 + b2);
    g[5].b = v * r00 + 2.0 * (5.0 + 4.0 * b2) * be * s0;
    g[5].y = -2.0 * mu * v * (v * s0 + r0) + 2.0 * (5.0 + 4.0 * b2) * b2 * mu * s0;
    // C̄
    g[4].s = 12.0 * v * be * be + 9.0 * be * be;
    g[4].b = -4.0 * v * be * r00;
    g[4].y = 2.0 * be * v * mu * (7.0 * s0 + 4.0 * r0)
        - 3.0 * mu * (b2 * r00 + 2.0 * be * (4.0 * b2 * s0 - r0));
    // D̄
    g[3].s = -38.0 * be.powi(3);
    g[3].b = 16.0 * be * be * (b2 + 2.0) * r00;
    g[3].y =
        -4.0 * mu * be * (19.0 * be * s0 + 24.0 * be * r0 + 8.0 * b2 * be * s0 - 6.0 * b2 * r00);
    // Ē
    g[2].b = -12.0 * be.powi(3) * r00;
    g[2].y = -3.0 * be * be * mu * ((4.0 * b2 - 1.0) * r00 - 4.0 * be * (3.0 * s0 + 2.0 * r0));
    // F̄
    g[1].y = -12.0 * mu * be.powi(3) * r00;
    // H̄
    g[0].y = 12.0 * mu * be.powi(4) * r00;
    g
}

/// Derived (ground-truth) numerator groups for the Matsumoto side.
pub fn derived_matsumoto_groups(p: &SideSample, mu: f64) -> [GroupTerm; 7] {
    let (be, b2, s0, r00, r0) = (p.beta, p.b2, p.s0, p.r00, p.r0);
    let mut g = [GroupTerm::default(); 7];
    g[6].s = b2 * (4.0 * b2 + 4.0) + 1.0;
    g[6].b = s0 * (-4.0 * b2 - 2.0);
    g[5].s = be * (b2 * (-8.0 * b2 - 20.0) - 8.0);
    g[5].b = be * s0 * (8.0 * b2 + 10.0) + r00 * (2.0 * b2 + 1.0);
    g[5].y = r0 * (-4.0 * b2 * mu - 2.0 * mu) + s0 * (2.0 * b2 * mu - 2.0 * mu);
    g[4].s = be.powi(2) * (24.0 * b2 + 21.0);
    g[4].b = be * (-12.0 * be * s0 + r00 * (-8.0 * b2 - 7.0));
    g[4].y = -3.0 * b2 * mu * r00
        + be * (r0 * (16.0 * b2 * mu + 14.0 * mu) + s0 * (4.0 * b2 * mu + 14.0 * mu));
    g[3].s = -18.0 * be.powi(3);
    g[3].b = be.powi(2) * r00 * (8.0 * b2 + 16.0);
    g[3].y = be
        * (12.0 * b2 * mu * r00
            + be * (r0 * (-16.0 * b2 * mu - 32.0 * mu) + s0 * (-16.0 * b2 * mu - 38.0 * mu)));
    g[2].b = -12.0 * be.powi(3) * r00;
    g[2].y =
        be.powi(2) * (be * (24.0 * mu * r0 + 36.0 * mu * s0) + r00 * (-12.0 * b2 * mu + 3.0 * mu));
    g[1].y = -12.0 * be.powi(3) * mu * r00;
    g[0].y = 12.0 * be.powi(4) * mu * r00;
    g
}

/// Denominator coefficients for the Matsumoto side, powers ᾱ⁵…ᾱ¹
/// (tabulated and derived sets coincide).
pub fn matsumoto_denominator(p: &SideSample) -> [f64; 5] {
    let (be, b2) = (p.beta, p.b2);
    let v = 1.0 + 2.0 * b2;
    [
        v * v,
        -2.0 * be * (5.0 + 2.0 * b2 * (7.0 + 4.0 * b2)),
        be * be * (37.0 + 16.0 * b2 * (b2 + 4.0)),
        -12.0 * be.powi(3) * (4.0 * b2 + 5.0),
        36.0 * be.powi(4),
    ]
}

// ---------------------------------------------------------------------------
// Audit
// ---------------------------------------------------------------------------

/// Canonical group labels: quadratic numerator groups (powers 9…2 and 0),
/// quadratic denominator, Matsumoto numerator groups (powers 6…0), Matsumoto
/// denominator.
pub const GROUP_LABELS: [&str; 26] = [
    "A^i", "B^i", "C^i", "D^i", "E^i", "F^i", "H^i", "P^i", "Q^i",
    "I", "J", "K", "L", "M",
    "Abar^i", "Bbar^i", "Cbar^i", "Dbar^i", "Ebar^i", "Fbar^i", "Hbar^i",
    "Ibar", "Jbar", "Kbar", "Lbar", "Mbar",
];

/// Verdict of the identity audit at one sample.
#[derive(Debug, Clone)]
pub struct SampleVerdict {
    /// Max component residual of the tabulated fraction pair against the
    /// first-principles residual vector.
    pub residual_tabulated: f64,
    /// Same for the derived tables (transcription self-check).
    pub residual_derived: f64,
    /// Labels of groups whose tabulated scalars differ from the derived ones.
    pub mismatched_groups: Vec<&'static str>,
    /// Closure residuals for the cross-multiplied form with the complete
    /// barred denominator polynomial and with the variant missing its ᾱ²
    /// term.
    pub l_full_residual: f64,
    pub l_short_residual: f64,
}

fn poly_eval(groups: &[GroupTerm], side: &SideSample, i: usize, alpha: f64) -> f64 {
    let mut acc = 0.0;
    for (p, g) in groups.iter().enumerate() {
        acc += g.eval(side, i) * alpha.powi(p as i32);
    }
    acc
}

fn den_eval_quadratic(coeffs: &[f64; 5], alpha: f64) -> f64 {
    let a2 = alpha * alpha;
    coeffs[0] * a2.powi(4)
        + coeffs[1] * a2.powi(3)
        + coeffs[2] * a2.powi(2)
        + coeffs[3] * a2
        + coeffs[4]
}

fn den_eval_matsumoto(coeffs: &[f64; 5], alpha: f64) -> f64 {
    coeffs[0] * alpha.powi(5)
        + coeffs[1] * alpha.powi(4)
        + coeffs[2] * alpha.powi(3)
        + coeffs[3] * alpha.powi(2)
        + coeffs[4] * alpha
}

/// Run the audit at one sample of a (quadratic, matsumoto) pair.
pub fn verify_identity_at(
    spec_f: &MetricSpec,
    spec_fbar: &MetricSpec,
    x: &ChartPoint,
    y: &FiberVector,
) -> Result<SampleVerdict> {
    let (eps, k) = match spec_f.phi {
        PhiFamily::Quadratic { epsilon, k } => (epsilon, k),
        _ => {
            return Err(Error::InvalidSpec(
                "identity audit requires a quadratic-family first metric".into(),
            ))
        }
    };
    if spec_fbar.phi != PhiFamily::Matsumoto {
        return Err(Error::InvalidSpec(
            "identity audit requires a matsumoto second metric".into(),
        ));
    }
    if spec_f.dim != spec_fbar.dim {
        return Err(Error::InvalidSpec("chart dimension mismatch".into()));
    }
    let n = spec_f.dim;
    let mu = 1.0 / (n as f64 + 1.0);

    let ctx_f = PointContext::new(spec_f, x)?;
    let ctx_g = PointContext::new(spec_fbar, x)?;
    let side_f = side_sample(&ctx_f, y)?;
    let side_g = side_sample(&ctx_g, y)?;

    // first-principles residual vector
    let tf = compute_ti(&ctx_f, y)?;
    let tg = compute_ti(&ctx_g, y)?;
    let h_fp: Vec<f64> = (0..n)
        .map(|i| {
            (tf.t[i] - mu * tf.div_t * y.coords[i]) - (tg.t[i] - mu * tg.div_t * y.coords[i])
        })
        .collect();

    // table evaluations
    let tab_q = tabulated_quadratic_groups(&side_f, eps, k, mu);
    let der_q = derived_quadratic_groups(&side_f, eps, k, mu);
    let tab_qd = tabulated_quadratic_denominator(&side_f, k);
    let der_qd = derived_quadratic_denominator(&side_f, k);
    let tab_m = tabulated_matsumoto_groups(&side_g, mu);
    let der_m = derived_matsumoto_groups(&side_g, mu);
    let md = matsumoto_denominator(&side_g);

    let den_q_tab = den_eval_quadratic(&tab_qd, side_f.alpha);
    let den_q_der = den_eval_quadratic(&der_qd, side_f.alpha);
    let den_m = den_eval_matsumoto(&md, side_g.alpha);
    for (what, v) in [
        ("tabulated quadratic denominator", den_q_tab),
        ("quadratic denominator", den_q_der),
        ("matsumoto denominator", den_m),
    ] {
        if v.abs() <= tol::SINGULAR_GUARD {
            return Err(Error::SingularEvaluation(format!("{what} = {v:.3e}")));
        }
    }

    let mut residual_tabulated: f64 = 0.0;
    let mut residual_derived: f64 = 0.0;
    for i in 0..n {
        let frac_tab = poly_eval(&tab_q, &side_f, i, side_f.alpha) / den_q_tab
            - poly_eval(&tab_m, &side_g, i, side_g.alpha) / den_m;
        let frac_der = poly_eval(&der_q, &side_f, i, side_f.alpha) / den_q_der
            - poly_eval(&der_m, &side_g, i, side_g.alpha) / den_m;
        let scale = 1.0f64.max(h_fp[i].abs());
        residual_tabulated = residual_tabulated.max((frac_tab - h_fp[i]).abs() / scale);
        residual_derived = residual_derived.max((frac_der - h_fp[i]).abs() / scale);
    }

    // group-by-group isolation
    let mut mismatched = Vec::new();
    let powers_q = [9usize, 8, 7, 6, 5, 4, 3, 2, 0];
    for (gi, &p) in powers_q.iter().enumerate() {
        if tab_q[p].max_rel_diff(&der_q[p]) > 1e-9 {
            mismatched.push(GROUP_LABELS[gi]);
        }
    }
    for i in 0..5 {
        let (t, d) = (tab_qd[i], der_qd[i]);
        let m = t.abs().max(d.abs());
        if m > 0.0 && (t - d).abs() / m > 1e-9 {
            mismatched.push(GROUP_LABELS[9 + i]);
        }
    }
    for p in (0..7).rev() {
        if tab_m[p].max_rel_diff(&der_m[p]) > 1e-9 {
            mismatched.push(GROUP_LABELS[14 + (6 - p)]);
        }
    }
    // the barred denominator groups coincide by construction

    // cross-multiplied closure with the two readings of the barred
    // denominator polynomial: complete, and missing its ᾱ² term
    let l_full = den_m;
    let l_short = den_m - md[3] * side_g.alpha.powi(2);
    let mut l_full_residual: f64 = 0.0;
    let mut l_short_residual: f64 = 0.0;
    for i in 0..n {
        let num_q = poly_eval(&der_q, &side_f, i, side_f.alpha);
        let m_val = poly_eval(&der_m, &side_g, i, side_g.alpha);
        let scale = num_q.abs().max(m_val.abs() * den_q_der.abs()).max(1.0);
        let close = |l: f64| (h_fp[i] * l * den_q_der - (l * num_q - m_val * den_q_der)).abs();
        l_full_residual = l_full_residual.max(close(l_full) / scale);
        l_short_residual = l_short_residual.max(close(l_short) / scale);
    }

    Ok(SampleVerdict {
        residual_tabulated,
        residual_derived,
        mismatched_groups: mismatched,
        l_full_residual,
        l_short_residual,
    })
}

/// Aggregated audit over a sample plan.
#[derive(Debug, Clone, serde::Serialize)]
pub struct IdentityReport {
    pub samples_used: usize,
    pub skipped: usize,
    pub max_residual_tabulated: f64,
    pub max_residual_derived: f64,
    /// Union of mismatching groups in canonical order.
    pub mismatched_groups: Vec<&'static str>,
    pub first_mismatch: Option<&'static str>,
    /// True when the tabulated tables reproduce the first-principles residual.
    pub tables_confirmed: bool,
    pub l_full_closes: bool,
    pub l_short_closes: bool,
}

pub fn audit_identity(
    spec_f: &MetricSpec,
    spec_fbar: &MetricSpec,
    plan: &SamplePlan,
) -> Result<IdentityReport> {
    let mut used = 0;
    let mut skipped = 0;
    let mut max_tab: f64 = 0.0;
    let mut max_der: f64 = 0.0;
    let mut l_full_max: f64 = 0.0;
    let mut l_short_max: f64 = 0.0;
    let mut seen: Vec<&'static str> = Vec::new();
    for (x, y) in plan.iter_samples() {
        let ctx_f = PointContext::new(spec_f, &x)?;
        let ctx_g = PointContext::new(spec_fbar, &x)?;
        if !ctx_f.fiber_regular(&y) || !ctx_g.fiber_regular(&y) {
            skipped += 1;
            continue;
        }
        match verify_identity_at(spec_f, spec_fbar, &x, &y) {
            Ok(v) => {
                used += 1;
                max_tab = max_tab.max(v.residual_tabulated);
                max_der = max_der.max(v.residual_derived);
                l_full_max = l_full_max.max(v.l_full_residual);
                l_short_max = l_short_max.max(v.l_short_residual);
                for g in v.mismatched_groups {
                    if !seen.contains(&g) {
                        seen.push(g);
                    }
                }
            }
            Err(Error::SingularEvaluation(_)) => skipped += 1,
            Err(e) => return Err(e),
        }
    }
    let mismatched: Vec<&'static str> = GROUP_LABELS
        .iter()
        .filter(|l| seen.contains(*l))
        .copied()
        .collect();
    Ok(IdentityReport {
        samples_used: used,
        skipped,
        max_residual_tabulated: max_tab,
        max_residual_derived: max_der,
        first_mismatch: mismatched.first().copied(),
        mismatched_groups: mismatched,
        tables_confirmed: max_tab < tol::IDENTITY_AUDIT,
        l_full_closes: l_full_max < tol::IDENTITY_AUDIT,
        l_short_closes: l_short_max < tol::IDENTITY_AUDIT,
    })
}
