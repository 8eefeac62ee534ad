//! Full Finsler spray coefficients and the fiber-curvature tensors built
//! from them: Berwald `B^i_jkl`, Douglas `D^i_jkl`, mean Berwald `E_ij`,
//! plus the transport term `T^i` and its divergence.
//!
//! Two independent spray routes exist by design. The coefficient-function
//! assembly
//!
//! ```text
//! G^i = G^i_α + αQ s^i_0 + (−2Qα s_0 + r_00)(Ψ b^i + Θ α⁻¹ y^i)
//! ```
//!
//! is the production path every curvature tensor consumes; the definitional
//! route `G^i = ¼ g^il ([F²]_{x^m y^l} y^m − [F²]_{x^l})` is evaluated with
//! exact field jets and serves as a permanent cross-check of the first.

use crate::alphabeta::{qtp_generic, qtp_series, regularity};
use crate::error::{Error, Result};
use crate::fields::{
    eval_oneform_x_jet, leading_minors, metric_x_jet, ChartPoint, FiberVector, MetricSpec,
};
use crate::jet::{Jet4, Series};
use crate::riemann::{
    beta_covariant, contract_scalars, sym_solve, BetaCovariantData, RiemannPointData,
};

/// Everything point-local that fiber-level evaluation re-reads: Levi-Civita
/// data of α and the covariant data of β, computed once per chart point.
#[derive(Debug, Clone)]
pub struct PointContext {
    pub spec: MetricSpec,
    pub x: ChartPoint,
    pub rd: RiemannPointData,
    pub bc: BetaCovariantData,
}

impl PointContext {
    pub fn new(spec: &MetricSpec, x: &ChartPoint) -> Result<Self> {
        let rd = RiemannPointData::compute(spec, x)?;
        let bc = beta_covariant(spec, x, &rd)?;
        Ok(PointContext {
            spec: spec.clone(),
            x: x.clone(),
            rd,
            bc,
        })
    }

    pub fn dim(&self) -> usize {
        self.spec.dim
    }

    /// Is (x, y) inside the regular cone of the metric?
    pub fn fiber_regular(&self, y: &FiberVector) -> bool {
        if y.is_zero() {
            return false;
        }
        let n = self.dim();
        let mut alpha2 = 0.0;
        let mut beta = 0.0;
        for i in 0..n {
            beta += self.bc.b[i] * y.coords[i];
            for j in 0..n {
                alpha2 += self.rd.a[i * n + j] * y.coords[i] * y.coords[j];
            }
        }
        if alpha2 <= 0.0 {
            return false;
        }
        let s = beta / alpha2.sqrt();
        let b = self.bc.b2.max(0.0).sqrt();
        b < self.spec.phi.b0() && regularity(&self.spec.phi, s, b)
    }
}

/// Fiber-level jets shared by every tensor assembly at one (x, y).
struct FiberJets {
    alpha: Jet4,
    alpha_inv: Jet4,
    s: Jet4,
    s0: Jet4,
    r00: Jet4,
    r0: Jet4,
    s_up_0: Vec<Jet4>,
    alpha2: Jet4,
    /// Q, Θ, Ψ as series in s at the sample value (exact s-derivatives).
    q_series: Series,
    theta_series: Series,
    psi_series: Series,
}

fn fiber_jets(ctx: &PointContext, y: &FiberVector) -> Result<FiberJets> {
    let n = ctx.dim();
    if y.is_zero() {
        return Err(Error::SingularEvaluation("zero fiber vector".into()));
    }
    let yv = &y.coords;
    let alpha2 = Jet4::quadratic_form(&ctx.rd.a, yv);
    let ynorm2: f64 = yv.iter().map(|c| c * c).sum();
    if alpha2.v <= 0.0 {
        return Err(Error::SingularEvaluation(format!(
            "alpha^2 = {:.3e} at nonzero y",
            alpha2.v
        )));
    }
    let alpha = alpha2.sqrt()?;
    let alpha_inv = alpha.recip(ynorm2.sqrt())?;
    let beta = Jet4::linear(&ctx.bc.b, yv);
    let s = beta.mul(&alpha_inv);
    let (q_series, theta_series, psi_series) = qtp_series(&ctx.spec.phi, s.v, ctx.bc.b2)?;
    let s0 = Jet4::linear(&ctx.bc.s_vec, yv);
    let r0 = Jet4::linear(&ctx.bc.r_vec, yv);
    let r00 = Jet4::quadratic_form(&ctx.bc.r, yv);
    let mut s_up_0 = Vec::with_capacity(n);
    for i in 0..n {
        let row: Vec<f64> = (0..n).map(|j| ctx.bc.s_up[i * n + j]).collect();
        s_up_0.push(Jet4::linear(&row, yv));
    }
    Ok(FiberJets {
        alpha,
        alpha_inv,
        s,
        s0,
        r00,
        r0,
        s_up_0,
        alpha2,
        q_series,
        theta_series,
        psi_series,
    })
}

/// Spray coefficients as order-4 fiber jets, assembled from the
/// coefficient-function form. The returned vector holds one jet per
/// component G^i.
pub fn spray_jets(ctx: &PointContext, y: &FiberVector) -> Result<Vec<Jet4>> {
    let fj = fiber_jets(ctx, y)?;
    let n = ctx.dim();
    let q = fj.s.compose(&fj.q_series.derivatives::<5>());
    let theta = fj.s.compose(&fj.theta_series.derivatives::<5>());
    let psi = fj.s.compose(&fj.psi_series.derivatives::<5>());

    // core = r_00 − 2Qα s_0
    let core = fj.r00.sub(&q.mul(&fj.alpha).mul(&fj.s0).scale(2.0));
    let alpha_q = fj.alpha.mul(&q);
    let theta_ainv = theta.mul(&fj.alpha_inv);

    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut gamma_i = vec![0.0; n * n];
        for j in 0..n {
            for k in 0..n {
                gamma_i[j * n + k] = 0.5 * ctx.rd.gamma(i, j, k);
            }
        }
        let g_alpha = Jet4::quadratic_form(&gamma_i, &y.coords);
        let yi = Jet4::coordinate(&y.coords, i);
        let tail = psi
            .scale(ctx.bc.b_up[i])
            .add(&theta_ainv.mul(&yi))
            .mul(&core);
        out.push(g_alpha.add(&alpha_q.mul(&fj.s_up_0[i])).add(&tail));
    }
    Ok(out)
}

/// Spray coefficient values from the coefficient-function form (fast scalar
/// path, no jets).
pub fn spray_value(ctx: &PointContext, y: &FiberVector) -> Result<Vec<f64>> {
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
    let alpha = alpha2.sqrt();
    let s = beta / alpha;
    let qtp = qtp_generic(&ctx.spec.phi, s, ctx.bc.b2)?;
    let c = contract_scalars(&ctx.bc, y);
    let core = c.r_00 - 2.0 * qtp.q * alpha * c.s_0;
    let g_alpha = ctx.rd.spray_alpha(yv);
    let mut g = vec![0.0; n];
    for i in 0..n {
        g[i] = g_alpha[i]
            + alpha * qtp.q * c.s_up_0[i]
            + core * (qtp.psi * ctx.bc.b_up[i] + qtp.theta * yv[i] / alpha);
    }
    Ok(g)
}

/// Spray coefficients from the coefficient-function form.
pub fn spray_via_alphabeta(spec: &MetricSpec, x: &ChartPoint, y: &FiberVector) -> Result<Vec<f64>> {
    let ctx = PointContext::new(spec, x)?;
    spray_value(&ctx, y)
}

/// Fundamental tensor g_ij = ½ ∂²F²/∂y^i∂y^j and Cartan tensor
/// C_ijk = ½ ∂̇_k g_ij, both from the fiber jet of F².
pub fn fundamental_tensor(ctx: &PointContext, y: &FiberVector) -> Result<(Vec<f64>, Vec<f64>)> {
    let w = f_squared_jet(ctx, y)?;
    let n = ctx.dim();
    let g: Vec<f64> = w.d2.iter().map(|v| 0.5 * v).collect();
    let c: Vec<f64> = w.d3.iter().map(|v| 0.25 * v).collect();
    for (k, minor) in leading_minors(&g, n).iter().enumerate() {
        if !(*minor > 0.0) {
            return Err(Error::NonPositiveDefinite(format!(
                "fundamental tensor minor {} = {minor:.3e}",
                k + 1
            )));
        }
    }
    Ok((g, c))
}

/// F² as an order-4 fiber jet.
pub fn f_squared_jet(ctx: &PointContext, y: &FiberVector) -> Result<Jet4> {
    let fj = fiber_jets(ctx, y)?;
    let phi = phi_jet4(ctx, &fj)?;
    Ok(fj.alpha2.mul(&phi.mul(&phi)))
}

/// F as an order-4 fiber jet.
pub fn f_jet(ctx: &PointContext, y: &FiberVector) -> Result<Jet4> {
    let fj = fiber_jets(ctx, y)?;
    let phi = phi_jet4(ctx, &fj)?;
    Ok(fj.alpha.mul(&phi))
}

fn phi_jet4(ctx: &PointContext, fj: &FiberJets) -> Result<Jet4> {
    let phi_series = ctx.spec.phi.phi_series(fj.s.v)?;
    Ok(fj.s.compose(&phi_series.derivatives::<5>()))
}

/// Spray coefficients from the definition
/// `G^i = ¼ g^il ([F²]_{x^m y^l} y^m − [F²]_{x^l})`,
/// with x-derivatives taken analytically through the field jets.
pub fn spray_via_definition(
    spec: &MetricSpec,
    x: &ChartPoint,
    y: &FiberVector,
) -> Result<Vec<f64>> {
    let ctx = PointContext::new(spec, x)?;
    let n = spec.dim;
    let mx = metric_x_jet(spec, x)?;
    let bx = eval_oneform_x_jet(spec, x)?;
    let fj = fiber_jets(&ctx, y)?;

    // φ and φ′ as fiber jets via the series of the family
    let phi_series = spec.phi.phi_series(fj.s.v)?;
    let phi = fj.s.compose(&phi_series.derivatives::<5>());
    let phi1 = fj.s.compose(&phi_series.differentiate().derivatives::<5>());

    // ∂F²/∂x^m = (φ² − s φ φ′)·A_m + 2αφφ′·B_m, with
    // A_m = (∂_m a_ij) y^i y^j and B_m = (∂_m b_i) y^i.
    let front = phi.mul(&phi).sub(&fj.s.mul(&phi).mul(&phi1));
    let two_aphiphi1 = fj.alpha.mul(&phi).mul(&phi1).scale(2.0);
    let mut dw = Vec::with_capacity(n);
    for m in 0..n {
        let da_m = &mx.da[m * n * n..(m + 1) * n * n];
        let a_m = Jet4::quadratic_form(da_m, &y.coords);
        let db_col: Vec<f64> = (0..n).map(|i| bx.db[i * n + m]).collect();
        let b_m = Jet4::linear(&db_col, &y.coords);
        dw.push(front.mul(&a_m).add(&two_aphiphi1.mul(&b_m)));
    }

    // V = Σ_m y^m ∂F²/∂x^m; then [F²]_{x^m y^l} y^m = ∂_l V − [F²]_{x^l}
    let mut v = Jet4::constant(n, 0.0);
    for (m, dwm) in dw.iter().enumerate() {
        v = v.add(&dwm.mul(&Jet4::coordinate(&y.coords, m)));
    }
    let mut bracket = vec![0.0; n];
    for l in 0..n {
        bracket[l] = v.d1[l] - 2.0 * dw[l].v;
    }

    let (g, _) = fundamental_tensor(&ctx, y)?;
    let z = sym_solve(&g, &bracket, n)?;
    Ok(z.iter().map(|c| 0.25 * c).collect())
}

// ---------------------------------------------------------------------------
// Curvature tensors from spray jets
// ---------------------------------------------------------------------------

/// Berwald tensor from spray jets: `B^i_jkl = ∂³G^i/∂y^j∂y^k∂y^l`.
/// Layout `[i·n³ + j·n² + k·n + l]`.
pub fn berwald_from_jets(gjets: &[Jet4]) -> Vec<f64> {
    let n = gjets.len();
    let mut b = vec![0.0; n * n * n * n];
    for (i, gj) in gjets.iter().enumerate() {
        b[i * n * n * n..(i + 1) * n * n * n].copy_from_slice(&gj.d3);
    }
    b
}

/// Douglas tensor from spray jets:
/// `D^i_jkl = ∂³(G^i − (1/(n+1)) (∂G^m/∂y^m) y^i)`, expanded by the product
/// rule so only contracted fourth derivatives of G are needed.
pub fn douglas_from_jets(gjets: &[Jet4], y: &[f64]) -> Vec<f64> {
    let n = gjets.len();
    let mu = 1.0 / (n as f64 + 1.0);
    let mut w2 = vec![0.0; n * n]; // W_jk = Σ_m ∂³G^m/∂y^m∂y^j∂y^k
    let mut w3 = vec![0.0; n * n * n]; // W_jkl = Σ_m ∂⁴G^m/∂y^m∂y^j∂y^k∂y^l
    for j in 0..n {
        for k in 0..n {
            let mut acc2 = 0.0;
            for (m, gj) in gjets.iter().enumerate() {
                acc2 += gj.d3[(m * n + j) * n + k];
            }
            w2[j * n + k] = acc2;
            for l in 0..n {
                let mut acc3 = 0.0;
                for (m, gj) in gjets.iter().enumerate() {
                    acc3 += gj.d4[((m * n + j) * n + k) * n + l];
                }
                w3[(j * n + k) * n + l] = acc3;
            }
        }
    }
    let mut d = berwald_from_jets(gjets);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let mut corr = w3[(j * n + k) * n + l] * y[i];
                    if i == l {
                        corr += w2[j * n + k];
                    }
                    if i == k {
                        corr += w2[j * n + l];
                    }
                    if i == j {
                        corr += w2[k * n + l];
                    }
                    d[((i * n + j) * n + k) * n + l] -= mu * corr;
                }
            }
        }
    }
    d
}

/// Berwald tensor at (x, y) from the coefficient-function spray.
pub fn berwald_tensor(ctx: &PointContext, y: &FiberVector) -> Result<Vec<f64>> {
    Ok(berwald_from_jets(&spray_jets(ctx, y)?))
}

/// Douglas tensor at (x, y) from the coefficient-function spray.
pub fn douglas_tensor(ctx: &PointContext, y: &FiberVector) -> Result<Vec<f64>> {
    Ok(douglas_from_jets(&spray_jets(ctx, y)?, &y.coords))
}

/// Transport term and its divergence at one (x, y):
/// `T^i = αQ s^i_0 + Ψ(−2Qα s_0 + r_00) b^i` with the divergence in the
/// closed form
/// `T^m_{y^m} = Q′s_0 + Ψ′α⁻¹(b²−s²)(r_00 − 2Qαs_0) + 2Ψ(r_0 − Q′(b²−s²)s_0 − Qss_0)`.
/// Q′ and Ψ′ are exact series derivatives, never differences.
#[derive(Debug, Clone)]
pub struct TiData {
    pub t: Vec<f64>,
    pub div_t: f64,
}

pub fn compute_ti(ctx: &PointContext, y: &FiberVector) -> Result<TiData> {
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
    let alpha = alpha2.sqrt();
    let s = beta / alpha;
    let (qs, _, ps) = qtp_series(&ctx.spec.phi, s, ctx.bc.b2)?;
    let (q, q1) = (qs.derivative(0), qs.derivative(1));
    let (psi, psi1) = (ps.derivative(0), ps.derivative(1));
    let c = contract_scalars(&ctx.bc, y);
    let core = c.r_00 - 2.0 * q * alpha * c.s_0;
    let mut t = vec![0.0; n];
    for i in 0..n {
        t[i] = alpha * q * c.s_up_0[i] + psi * core * ctx.bc.b_up[i];
    }
    let b2s2 = ctx.bc.b2 - s * s;
    let div_t = q1 * c.s_0
        + psi1 / alpha * b2s2 * core
        + 2.0 * psi * (c.r_0 - q1 * b2s2 * c.s_0 - q * s * c.s_0);
    Ok(TiData { t, div_t })
}

/// The transport term as fiber jets (used to validate the closed-form
/// divergence by direct differentiation).
pub fn ti_jets(ctx: &PointContext, y: &FiberVector) -> Result<Vec<Jet4>> {
    let fj = fiber_jets(ctx, y)?;
    let n = ctx.dim();
    let q = fj.s.compose(&fj.q_series.derivatives::<5>());
    let psi = fj.s.compose(&fj.psi_series.derivatives::<5>());
    let core = fj.r00.sub(&q.mul(&fj.alpha).mul(&fj.s0).scale(2.0));
    let alpha_q = fj.alpha.mul(&q);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        out.push(
            alpha_q
                .mul(&fj.s_up_0[i])
                .add(&psi.mul(&core).scale(ctx.bc.b_up[i])),
        );
    }
    Ok(out)
}

/// Divergence of the full spray as an order-4 jet, assembled from closed
/// forms: the α-spray divergence is linear in y, the transport divergence is
/// the closed form above, and the remaining projective factor contributes
/// `(n+1)·Θ(−2Qαs_0 + r_00)α⁻¹` by the Euler identity.
pub fn spray_divergence_jet(ctx: &PointContext, y: &FiberVector) -> Result<Jet4> {
    let fj = fiber_jets(ctx, y)?;
    let n = ctx.dim();

    let q = fj.s.compose(&fj.q_series.derivatives::<5>());
    let q1 = fj.s.compose(&fj.q_series.differentiate().derivatives::<5>());
    let psi = fj.s.compose(&fj.psi_series.derivatives::<5>());
    let psi1 = fj.s.compose(&fj.psi_series.differentiate().derivatives::<5>());
    let theta = fj.s.compose(&fj.theta_series.derivatives::<5>());

    let core = fj.r00.sub(&q.mul(&fj.alpha).mul(&fj.s0).scale(2.0));
    let b2s2 = Jet4::constant(n, ctx.bc.b2).sub(&fj.s.mul(&fj.s));

    // γ^m_mk y^k
    let mut trace_gamma = vec![0.0; n];
    for (k, tg) in trace_gamma.iter_mut().enumerate() {
        *tg = (0..n).map(|m| ctx.rd.gamma(m, m, k)).sum();
    }
    let div_galpha = Jet4::linear(&trace_gamma, &y.coords);

    let div_t = q1.mul(&fj.s0).add(
        &psi1
            .mul(&fj.alpha_inv)
            .mul(&b2s2)
            .mul(&core)
            .add(&psi.scale(2.0).mul(
                &fj.r0
                    .sub(&q1.mul(&b2s2).mul(&fj.s0))
                    .sub(&q.mul(&fj.s).mul(&fj.s0)),
            )),
    );

    let proj = theta.mul(&core).mul(&fj.alpha_inv).scale(n as f64 + 1.0);
    Ok(div_galpha.add(&div_t).add(&proj))
}

/// Mean Berwald tensor `E_ij = ½ ∂²(∂G^m/∂y^m)/∂y^i∂y^j`, computed from the
/// closed-form spray divergence (an independent route from the Berwald trace).
pub fn mean_berwald(ctx: &PointContext, y: &FiberVector) -> Result<Vec<f64>> {
    let div = spray_divergence_jet(ctx, y)?;
    Ok(div.d2.iter().map(|v| 0.5 * v).collect())
}

/// Half-trace of a Berwald tensor: `½ B^m_mij`.
pub fn half_trace_berwald(b: &[f64], n: usize) -> Vec<f64> {
    let mut e = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let mut acc = 0.0;
            for m in 0..n {
                acc += b[((m * n + m) * n + i) * n + j];
            }
            e[i * n + j] = 0.5 * acc;
        }
    }
    e
}

/// Residual `H^i_00 = T^i − T̄^i − (1/(n+1))(T^m_{y^m} − T̄^m_{y^m}) y^i`
/// between two metrics sharing the chart.
pub fn h00_residual(
    spec_f: &MetricSpec,
    spec_fbar: &MetricSpec,
    x: &ChartPoint,
    y: &FiberVector,
) -> Result<Vec<f64>> {
    if spec_f.dim != spec_fbar.dim {
        return Err(Error::InvalidSpec(
            "paired metrics must share the chart dimension".into(),
        ));
    }
    let n = spec_f.dim;
    let mu = 1.0 / (n as f64 + 1.0);
    let ctx_f = PointContext::new(spec_f, x)?;
    let ctx_g = PointContext::new(spec_fbar, x)?;
    let tf = compute_ti(&ctx_f, y)?;
    let tg = compute_ti(&ctx_g, y)?;
    let ddiv = tf.div_t - tg.div_t;
    Ok((0..n)
        .map(|i| tf.t[i] - tg.t[i] - mu * ddiv * y.coords[i])
        .collect())
}

/// Point-sample bundle of every tensor the report stream carries.
#[derive(Debug, Clone)]
pub struct SprayPointData {
    pub g: Vec<f64>,
    pub cartan: Vec<f64>,
    pub spray: Vec<f64>,
    pub spray_definition: Vec<f64>,
    pub berwald: Vec<f64>,
    pub douglas: Vec<f64>,
    pub mean_berwald: Vec<f64>,
    pub f_value: f64,
}

pub fn spray_point_data(
    spec: &MetricSpec,
    x: &ChartPoint,
    y: &FiberVector,
) -> Result<SprayPointData> {
    let ctx = PointContext::new(spec, x)?;
    let (g, cartan) = fundamental_tensor(&ctx, y)?;
    let gjets = spray_jets(&ctx, y)?;
    let spray = gjets.iter().map(|j| j.v).collect();
    let berwald = berwald_from_jets(&gjets);
    let douglas = douglas_from_jets(&gjets, &y.coords);
    let e = mean_berwald(&ctx, y)?;
    let spray_definition = spray_via_definition(spec, x, y)?;
    let f_value = crate::alphabeta::finsler_value(spec, x, y)?;
    Ok(SprayPointData {
        g,
        cartan,
        spray,
        spray_definition,
        berwald,
        douglas,
        mean_berwald: e,
        f_value,
    })
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |acc, x| acc.max(x.abs()))
}
