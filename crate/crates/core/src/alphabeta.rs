//! φ-families, the regularity test, and the coefficient functions Q, Θ, Ψ
//! that assemble the spray of `F = α φ(β/α)`.
//!
//! Two φ-families are in the registry:
//!
//! * `quadratic` — φ(s) = 1 + εs + ks² with k ≠ 0,
//! * `matsumoto` — φ(s) = 1/(1 − s).
//!
//! Q, Θ, Ψ are evaluated two independent ways: from the generic φ-based
//! formulas through exact series arithmetic ([`qtp_generic`], [`qtp_series`])
//! and from tabulated closed forms ([`qtp_closed`]). The closed forms are
//! kept verbatim, including one suspect term in the quadratic Θ numerator;
//! [`audit_closed_forms`] compares the two routes per function and checks the
//! re-derived variant of any mismatching one. Downstream spray assembly
//! always consumes the generic route.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{eval_oneform_x_jet, metric_x_jet, ChartPoint, FiberVector, MetricSpec};
use crate::jet::Series;
use crate::tol;

/// Cap standing in for an unbounded regularity radius.
pub const B0_CAP: f64 = 1e6;

/// φ-family of an (α, β)-metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum PhiFamily {
    /// φ(s) = 1 + εs + ks², k ≠ 0.
    Quadratic { epsilon: f64, k: f64 },
    /// φ(s) = 1/(1 − s).
    Matsumoto,
}

impl PhiFamily {
    pub fn validate(&self) -> Result<()> {
        match self {
            PhiFamily::Quadratic { epsilon, k } => {
                if !epsilon.is_finite() || !k.is_finite() {
                    return Err(Error::InvalidSpec("non-finite phi parameters".into()));
                }
                if k.abs() < 1e-12 {
                    return Err(Error::InvalidSpec(
                        "quadratic phi-family requires k != 0".into(),
                    ));
                }
                Ok(())
            }
            PhiFamily::Matsumoto => Ok(()),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            PhiFamily::Quadratic { epsilon, k } => format!("quadratic(eps={epsilon},k={k})"),
            PhiFamily::Matsumoto => "matsumoto".to_string(),
        }
    }

    /// Largest admissible ‖β‖_α for the family.
    ///
    /// Quadratic: from the tabulated inequality `1 + 2kb² + 3ks² > 0`; it
    /// never fails for k > 0 (capped at [`B0_CAP`]) and gives b₀ = √(−1/(5k))
    /// at the worst case s = ±b for k < 0. Matsumoto: b₀ = 1/2.
    pub fn b0(&self) -> f64 {
        match self {
            PhiFamily::Quadratic { k, .. } => {
                if *k > 0.0 {
                    B0_CAP
                } else {
                    (-1.0 / (5.0 * k)).sqrt()
                }
            }
            PhiFamily::Matsumoto => 0.5,
        }
    }

    /// Derivatives φ⁽ᵐ⁾(s), m = 0..count, without domain enforcement.
    fn derivatives_unchecked(&self, s: f64, count: usize) -> Result<Vec<f64>> {
        match self {
            PhiFamily::Quadratic { epsilon, k } => {
                let mut d = vec![0.0; count];
                if count > 0 {
                    d[0] = 1.0 + epsilon * s + k * s * s;
                }
                if count > 1 {
                    d[1] = epsilon + 2.0 * k * s;
                }
                if count > 2 {
                    d[2] = 2.0 * k;
                }
                Ok(d)
            }
            PhiFamily::Matsumoto => {
                let w = 1.0 - s;
                if w.abs() <= tol::SINGULAR_GUARD * (1.0 + s.abs()) {
                    return Err(Error::SingularEvaluation(format!(
                        "matsumoto phi pole at s = {s}"
                    )));
                }
                let mut d = vec![0.0; count];
                let mut fact = 1.0;
                let mut pow = 1.0 / w;
                for (m, item) in d.iter_mut().enumerate() {
                    if m > 0 {
                        fact *= m as f64;
                        pow /= w;
                    }
                    *item = fact * pow;
                }
                Ok(d)
            }
        }
    }

    /// φ as a truncated Taylor series at s₀.
    pub fn phi_series(&self, s0: f64) -> Result<Series> {
        Ok(Series::from_derivatives(
            &self.derivatives_unchecked(s0, crate::jet::SERIES_LEN)?,
        ))
    }
}

/// Exact (φ, φ′, φ″) at s, enforcing |s| < b₀ (and the pole for matsumoto).
pub fn phi_jet(fam: &PhiFamily, s: f64) -> Result<(f64, f64, f64)> {
    if s.abs() >= fam.b0() {
        return Err(Error::DomainError(format!(
            "|s| = {} outside regular range b0 = {}",
            s.abs(),
            fam.b0()
        )));
    }
    let d = fam.derivatives_unchecked(s, 3)?;
    Ok((d[0], d[1], d[2]))
}

/// The regularity inequality `φ − sφ′ + (b² − s²)φ″ > 0`.
///
/// Points where φ itself is undefined or non-positive count as irregular.
pub fn regularity(fam: &PhiFamily, s: f64, b: f64) -> bool {
    match fam.derivatives_unchecked(s, 3) {
        Ok(d) => d[0] > 0.0 && d[0] - s * d[1] + (b * b - s * s) * d[2] > 0.0,
        Err(_) => false,
    }
}

/// Q, Θ, Ψ at one (s, b²).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QTPTriple {
    pub q: f64,
    pub theta: f64,
    pub psi: f64,
}

/// Q, Θ, Ψ as truncated Taylor series in s at s₀, from the generic φ-based
/// formulas:
///
/// ```text
/// Q = φ′/(φ − sφ′)
/// Θ = [φφ′ − s(φφ″ + φ′φ′)] / [2φ((φ − sφ′) + (b² − s²)φ″)]
/// Ψ = φ″ / [2((φ − sφ′) + (b² − s²)φ″)]
/// ```
///
/// Series coefficients give exact s-derivatives of all three functions.
pub fn qtp_series(fam: &PhiFamily, s0: f64, b2: f64) -> Result<(Series, Series, Series)> {
    let phi = fam.phi_series(s0)?;
    let s = Series::variable(s0);
    let phi1 = phi.differentiate();
    let phi2 = phi1.differentiate();

    let phi_m_sphi1 = phi.sub(&s.mul(&phi1));
    let scale_q = 1.0 + phi.derivative(0).abs() + (s0 * phi1.derivative(0)).abs();
    let q = phi1.div(&phi_m_sphi1, scale_q)?;

    let b2s = Series::constant(b2).sub(&s.mul(&s));
    let reg = phi_m_sphi1.add(&b2s.mul(&phi2));
    let scale_reg = 1.0 + phi.derivative(0).abs() + (b2 * phi2.derivative(0)).abs();

    let theta_num = phi
        .mul(&phi1)
        .sub(&s.mul(&phi.mul(&phi2).add(&phi1.mul(&phi1))));
    let theta_den = phi.mul(&reg).scale(2.0);
    let theta = theta_num.div(&theta_den, scale_reg)?;

    let psi = phi2.scale(0.5).div(&reg, scale_reg)?;
    Ok((q, theta, psi))
}

/// Q, Θ, Ψ values from the generic φ-based formulas.
pub fn qtp_generic(fam: &PhiFamily, s: f64, b2: f64) -> Result<QTPTriple> {
    let (q, theta, psi) = qtp_series(fam, s, b2)?;
    Ok(QTPTriple {
        q: q.derivative(0),
        theta: theta.derivative(0),
        psi: psi.derivative(0),
    })
}

/// Q, Θ, Ψ values from the tabulated closed forms, kept verbatim.
///
/// For the quadratic family the tabulated Θ numerator ends in `−4k²s²`;
/// the re-derivation from the generic formula gives `−4k²s³` instead
/// (see [`quadratic_theta_rederived`]). The verbatim form is evaluated here
/// so the discrepancy stays observable; use [`audit_closed_forms`] to
/// localize it.
pub fn qtp_closed(fam: &PhiFamily, s: f64, b2: f64) -> Result<QTPTriple> {
    match fam {
        PhiFamily::Quadratic { epsilon, k } => {
            let (e, k) = (*epsilon, *k);
            let dq = 1.0 - k * s * s;
            guard(dq, 1.0 + (k * s * s).abs(), "1 - k s^2")?;
            let dr = 1.0 + 2.0 * k * b2 - 3.0 * k * s * s;
            guard(dr, 1.0 + (2.0 * k * b2).abs() + (3.0 * k * s * s).abs(), "1 + 2kb^2 - 3ks^2")?;
            let phi = 1.0 + e * s + k * s * s;
            guard(phi, 1.0 + (e * s).abs() + (k * s * s).abs(), "phi")?;
            Ok(QTPTriple {
                q: (e + 2.0 * k * s) / dq,
                theta: (e - 3.0 * e * k * s * s - 4.0 * k * k * s * s) / (2.0 * dr * phi),
                psi: k / dr,
            })
        }
        PhiFamily::Matsumoto => {
            let dq = 1.0 - 2.0 * s;
            guard(dq, 1.0 + 2.0 * s.abs(), "1 - 2s")?;
            let dr = 1.0 + 2.0 * b2 - 3.0 * s;
            guard(dr, 1.0 + 2.0 * b2 + 3.0 * s.abs(), "1 + 2b^2 - 3s")?;
            Ok(QTPTriple {
                q: 1.0 / dq,
                theta: (1.0 - 4.0 * s) / (2.0 * dr),
                psi: 1.0 / dr,
            })
        }
    }
}

/// Θ for the quadratic family re-derived from the generic formula:
/// numerator `ε − 3εks² − 4k²s³` (cubic final term).
pub fn quadratic_theta_rederived(epsilon: f64, k: f64, s: f64, b2: f64) -> Result<f64> {
    let dr = 1.0 + 2.0 * k * b2 - 3.0 * k * s * s;
    guard(dr, 1.0 + (2.0 * k * b2).abs() + (3.0 * k * s * s).abs(), "1 + 2kb^2 - 3ks^2")?;
    let phi = 1.0 + epsilon * s + k * s * s;
    guard(phi, 1.0 + (epsilon * s).abs() + (k * s * s).abs(), "phi")?;
    Ok((epsilon - 3.0 * epsilon * k * s * s - 4.0 * k * k * s * s * s) / (2.0 * dr * phi))
}

fn guard(value: f64, scale: f64, what: &str) -> Result<()> {
    if value.abs() <= tol::SINGULAR_GUARD * scale {
        return Err(Error::SingularEvaluation(format!(
            "denominator {what} = {value:.3e}"
        )));
    }
    Ok(())
}

/// F(x, y) = α φ(β/α).
pub fn finsler_value(spec: &MetricSpec, x: &ChartPoint, y: &FiberVector) -> Result<f64> {
    if y.is_zero() {
        return Err(Error::SingularEvaluation("F undefined at y = 0".into()));
    }
    let mx = metric_x_jet(spec, x)?;
    let bx = eval_oneform_x_jet(spec, x)?;
    let n = spec.dim;
    let mut alpha2 = 0.0;
    let mut beta = 0.0;
    for i in 0..n {
        beta += bx.b[i] * y.coords[i];
        for j in 0..n {
            alpha2 += mx.a[i * n + j] * y.coords[i] * y.coords[j];
        }
    }
    if alpha2 <= 0.0 {
        return Err(Error::SingularEvaluation(format!(
            "alpha^2 = {alpha2:.3e} at nonzero y"
        )));
    }
    let alpha = alpha2.sqrt();
    let s = beta / alpha;
    let phi = spec.phi.derivatives_unchecked(s, 1)?[0];
    if phi <= 0.0 {
        return Err(Error::DomainError(format!("phi({s}) = {phi} not positive")));
    }
    Ok(alpha * phi)
}

/// Outcome of comparing tabulated closed forms against the generic route.
#[derive(Debug, Clone)]
pub struct ClosedFormAudit {
    pub family: String,
    pub samples: usize,
    /// Max relative deviation per function (Q, Θ, Ψ).
    pub max_rel: [f64; 3],
    /// Functions whose tabulated form disagrees beyond [`tol::TIER_FIBER`].
    pub mismatched: Vec<&'static str>,
    /// For a mismatched quadratic Θ: deviation of the re-derived variant.
    pub rederived_theta_max_rel: Option<f64>,
}

/// Compare tabulated closed forms against the generic φ-based route on
/// `samples` random regular (s, b²) pairs.
pub fn audit_closed_forms(fam: &PhiFamily, samples: usize, seed: u64) -> Result<ClosedFormAudit> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b_hi = match fam {
        PhiFamily::Quadratic { k, .. } => {
            if *k > 0.0 {
                (0.85 / k.sqrt()).min(2.0)
            } else {
                0.9 * fam.b0()
            }
        }
        PhiFamily::Matsumoto => 0.45,
    };
    let mut max_rel = [0.0f64; 3];
    let mut red_max: f64 = 0.0;
    let mut used = 0;
    while used < samples {
        let b = rng.gen_range(0.0..b_hi);
        let s = rng.gen_range(-b..=b);
        if !regularity(fam, s, b) {
            continue;
        }
        let b2 = b * b;
        let gen = match qtp_generic(fam, s, b2) {
            Ok(g) => g,
            Err(_) => continue,
        };
        let closed = match qtp_closed(fam, s, b2) {
            Ok(c) => c,
            Err(_) => continue,
        };
        let rel = |a: f64, b: f64| (a - b).abs() / (1.0 + a.abs().max(b.abs()));
        max_rel[0] = max_rel[0].max(rel(gen.q, closed.q));
        max_rel[1] = max_rel[1].max(rel(gen.theta, closed.theta));
        max_rel[2] = max_rel[2].max(rel(gen.psi, closed.psi));
        if let PhiFamily::Quadratic { epsilon, k } = fam {
            let red = quadratic_theta_rederived(*epsilon, *k, s, b2)?;
            red_max = red_max.max(rel(gen.theta, red));
        }
        used += 1;
    }
    let names = ["Q", "Theta", "Psi"];
    let mismatched: Vec<&'static str> = names
        .iter()
        .zip(max_rel.iter())
        .filter(|(_, &r)| r > tol::TIER_FIBER)
        .map(|(n, _)| *n)
        .collect();
    Ok(ClosedFormAudit {
        family: fam.describe(),
        samples: used,
        max_rel,
        mismatched,
        rederived_theta_max_rel: match fam {
            PhiFamily::Quadratic { .. } => Some(red_max),
            PhiFamily::Matsumoto => None,
        },
    })
}
