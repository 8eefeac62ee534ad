//! Base geometric data: analytic families of Riemannian metrics `a_ij(x)`
//! and 1-forms `b_i(x)`, their exact first x-derivatives, and the metric
//! specification document.
//!
//! The family registry is closed on purpose: every member has closed-form
//! x-derivatives, so curvature checks downstream are never polluted by
//! differentiation noise. A central-difference fallback (with one level of
//! Richardson extrapolation) exists for cross-checking the analytic path.

use serde::{Deserialize, Serialize};

use crate::alphabeta::PhiFamily;
use crate::error::{Error, Result};
use crate::jet::{Jet3, Jet4};

/// Chart coordinates x of a point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartPoint {
    pub coords: Vec<f64>,
}

impl ChartPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidSpec("non-finite chart coordinate".into()));
        }
        Ok(ChartPoint { coords })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

/// Tangent components y attached to a chart point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiberVector {
    pub coords: Vec<f64>,
}

impl FiberVector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidSpec("non-finite fiber component".into()));
        }
        Ok(FiberVector { coords })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| *c == 0.0)
    }
}

/// One monomial `coeff · Π (x^i)^powers[i]` of a multivariate polynomial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonomialTerm {
    pub coeff: f64,
    pub powers: Vec<u32>,
}

/// Sparse multivariate polynomial with exact gradient and Hessian.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    pub terms: Vec<MonomialTerm>,
}

impl Polynomial {
    pub fn new(terms: Vec<MonomialTerm>) -> Self {
        Polynomial { terms }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                t.coeff
                    * t.powers
                        .iter()
                        .zip(x)
                        .map(|(&p, &v)| v.powi(p as i32))
                        .product::<f64>()
            })
            .sum()
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let n = x.len();
        let mut g = vec![0.0; n];
        for t in &self.terms {
            for (k, gk) in g.iter_mut().enumerate() {
                let p = t.powers.get(k).copied().unwrap_or(0);
                if p == 0 {
                    continue;
                }
                let mut prod = t.coeff * p as f64;
                for (i, (&pi, &v)) in t.powers.iter().zip(x).enumerate() {
                    let e = if i == k { pi - 1 } else { pi };
                    prod *= v.powi(e as i32);
                }
                *gk += prod;
            }
        }
        g
    }

    /// Row-major n×n Hessian.
    pub fn hessian(&self, x: &[f64]) -> Vec<f64> {
        let n = x.len();
        let mut h = vec![0.0; n * n];
        for t in &self.terms {
            for k in 0..n {
                for l in 0..n {
                    let pk = t.powers.get(k).copied().unwrap_or(0);
                    let pl = t.powers.get(l).copied().unwrap_or(0);
                    let factor = if k == l {
                        if pk < 2 {
                            continue;
                        }
                        (pk * (pk - 1)) as f64
                    } else {
                        if pk == 0 || pl == 0 {
                            continue;
                        }
                        (pk * pl) as f64
                    };
                    let mut prod = t.coeff * factor;
                    for (i, (&pi, &v)) in t.powers.iter().zip(x).enumerate() {
                        let mut e = pi;
                        if i == k {
                            e -= 1;
                        }
                        if i == l {
                            e -= 1;
                        }
                        prod *= v.powi(e as i32);
                    }
                    h[k * n + l] += prod;
                }
            }
        }
        h
    }
}

/// Univariate polynomial evaluation (used by the diagonal family).
fn poly1_eval(coeffs: &[f64], t: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
}

fn poly1_deriv(coeffs: &[f64], t: f64) -> f64 {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .rev()
        .fold(0.0, |acc, (m, &c)| acc * t + c * m as f64)
}

/// Riemannian metric field family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "kebab-case")]
pub enum RiemannFieldSpec {
    Euclidean,
    /// `a_ii(x) = p_i(x^i)` with one univariate coefficient row per axis.
    DiagonalPolynomial { diag: Vec<Vec<f64>> },
    /// `a_ij(x) = exp(2 u(x)) δ_ij` with polynomial exponent u.
    ConformallyFlat { exponent: Vec<MonomialTerm> },
}

/// 1-form field family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "kebab-case")]
pub enum OneFormFieldSpec {
    Constant {
        values: Vec<f64>,
    },
    /// `b_i(x) = c_i + M_ij x^j`.
    Affine {
        constant: Vec<f64>,
        linear: Vec<Vec<f64>>,
    },
    /// `b_i(x) = ∂f/∂x^i` for a polynomial potential f.
    GradientOfPolynomial {
        potential: Vec<MonomialTerm>,
    },
}

/// Axis-aligned chart domain box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl Domain {
    pub fn contains(&self, x: &ChartPoint) -> bool {
        x.coords
            .iter()
            .zip(self.min.iter().zip(&self.max))
            .all(|(&c, (&lo, &hi))| c >= lo && c <= hi)
    }
}

/// One complete Finsler metric definition, the on-disk document format:
/// `{"dim": n, "alpha": {...}, "beta": {...}, "phi": {...}, "domain": {...}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSpec {
    pub dim: usize,
    pub alpha: RiemannFieldSpec,
    pub beta: OneFormFieldSpec,
    pub phi: PhiFamily,
    pub domain: Domain,
}

impl MetricSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: MetricSpec = serde_json::from_str(text)
            .map_err(|e| Error::InvalidSpec(format!("parse failure: {e}")))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.dim;
        if n < 2 {
            return Err(Error::InvalidSpec("dim must be at least 2".into()));
        }
        if self.domain.min.len() != n || self.domain.max.len() != n {
            return Err(Error::InvalidSpec("domain box dimension mismatch".into()));
        }
        if self
            .domain
            .min
            .iter()
            .zip(&self.domain.max)
            .any(|(lo, hi)| !(lo < hi))
        {
            return Err(Error::InvalidSpec("domain box must have positive extent".into()));
        }
        match &self.alpha {
            RiemannFieldSpec::Euclidean => {}
            RiemannFieldSpec::DiagonalPolynomial { diag } => {
                if diag.len() != n {
                    return Err(Error::InvalidSpec(
                        "diagonal-polynomial needs one coefficient row per axis".into(),
                    ));
                }
            }
            RiemannFieldSpec::ConformallyFlat { exponent } => {
                if exponent.iter().any(|t| t.powers.len() != n) {
                    return Err(Error::InvalidSpec(
                        "conformal exponent monomials must have one power per axis".into(),
                    ));
                }
            }
        }
        match &self.beta {
            OneFormFieldSpec::Constant { values } => {
                if values.len() != n {
                    return Err(Error::InvalidSpec("constant 1-form length mismatch".into()));
                }
            }
            OneFormFieldSpec::Affine { constant, linear } => {
                if constant.len() != n || linear.len() != n || linear.iter().any(|r| r.len() != n)
                {
                    return Err(Error::InvalidSpec("affine 1-form shape mismatch".into()));
                }
            }
            OneFormFieldSpec::GradientOfPolynomial { potential } => {
                if potential.iter().any(|t| t.powers.len() != n) {
                    return Err(Error::InvalidSpec(
                        "potential monomials must have one power per axis".into(),
                    ));
                }
            }
        }
        self.phi.validate()?;
        Ok(())
    }

    /// Short human-readable identifier derived from the content.
    pub fn describe(&self) -> String {
        let alpha = match &self.alpha {
            RiemannFieldSpec::Euclidean => "euclidean".to_string(),
            RiemannFieldSpec::DiagonalPolynomial { .. } => "diagonal-polynomial".to_string(),
            RiemannFieldSpec::ConformallyFlat { .. } => "conformally-flat".to_string(),
        };
        let beta = match &self.beta {
            OneFormFieldSpec::Constant { .. } => "constant",
            OneFormFieldSpec::Affine { .. } => "affine",
            OneFormFieldSpec::GradientOfPolynomial { .. } => "gradient-of-polynomial",
        };
        format!("{}d:{}|{}|{}", self.dim, alpha, beta, self.phi.describe())
    }

    fn check_domain(&self, x: &ChartPoint) -> Result<()> {
        if x.dim() != self.dim {
            return Err(Error::DomainError(format!(
                "point dimension {} does not match chart dimension {}",
                x.dim(),
                self.dim
            )));
        }
        if !self.domain.contains(x) {
            return Err(Error::DomainError(format!(
                "point {:?} outside declared chart box",
                x.coords
            )));
        }
        Ok(())
    }
}

/// Metric value and first x-derivatives at a point:
/// `a` is n×n row-major, `da[k·n² + i·n + j] = ∂a_ij/∂x^k`.
#[derive(Debug, Clone)]
pub struct MetricXJet {
    pub a: Vec<f64>,
    pub da: Vec<f64>,
}

/// 1-form value and first x-derivatives: `db[i·n + j] = ∂b_i/∂x^j`.
#[derive(Debug, Clone)]
pub struct OneFormXJet {
    pub b: Vec<f64>,
    pub db: Vec<f64>,
}

/// Leading principal minors of a symmetric matrix, via elimination
/// (product of the first k pivots equals the k-th minor).
pub fn leading_minors(a: &[f64], n: usize) -> Vec<f64> {
    let mut m = a.to_vec();
    let mut minors = Vec::with_capacity(n);
    let mut prod = 1.0;
    for k in 0..n {
        let pivot = m[k * n + k];
        prod *= pivot;
        minors.push(prod);
        if pivot == 0.0 {
            // remaining minors stay at the collapsed product
            for _ in k + 1..n {
                minors.push(0.0);
            }
            break;
        }
        for i in k + 1..n {
            let f = m[i * n + k] / pivot;
            for j in k..n {
                m[i * n + j] -= f * m[k * n + j];
            }
        }
    }
    minors
}

fn require_positive_definite(a: &[f64], n: usize, what: &str) -> Result<()> {
    for (k, minor) in leading_minors(a, n).iter().enumerate() {
        if !(*minor > 0.0) {
            return Err(Error::NonPositiveDefinite(format!(
                "{what}: leading minor {} = {minor:.3e}",
                k + 1
            )));
        }
    }
    Ok(())
}

/// Evaluate `a_ij(x)` with a positive-definiteness check.
pub fn eval_metric(spec: &MetricSpec, x: &ChartPoint) -> Result<Vec<f64>> {
    spec.check_domain(x)?;
    let a = eval_metric_raw(&spec.alpha, &x.coords);
    require_positive_definite(&a, spec.dim, "a_ij")?;
    Ok(a)
}

fn eval_metric_raw(alpha: &RiemannFieldSpec, x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut a = vec![0.0; n * n];
    match alpha {
        RiemannFieldSpec::Euclidean => {
            for i in 0..n {
                a[i * n + i] = 1.0;
            }
        }
        RiemannFieldSpec::DiagonalPolynomial { diag } => {
            for i in 0..n {
                a[i * n + i] = poly1_eval(&diag[i], x[i]);
            }
        }
        RiemannFieldSpec::ConformallyFlat { exponent } => {
            let u = Polynomial::new(exponent.clone());
            let e2u = (2.0 * u.eval(x)).exp();
            for i in 0..n {
                a[i * n + i] = e2u;
            }
        }
    }
    a
}

/// Metric value together with exact `∂a_ij/∂x^k`.
pub fn metric_x_jet(spec: &MetricSpec, x: &ChartPoint) -> Result<MetricXJet> {
    spec.check_domain(x)?;
    let n = spec.dim;
    let a = eval_metric_raw(&spec.alpha, &x.coords);
    require_positive_definite(&a, n, "a_ij")?;
    let mut da = vec![0.0; n * n * n];
    match &spec.alpha {
        RiemannFieldSpec::Euclidean => {}
        RiemannFieldSpec::DiagonalPolynomial { diag } => {
            for i in 0..n {
                da[i * n * n + i * n + i] = poly1_deriv(&diag[i], x.coords[i]);
            }
        }
        RiemannFieldSpec::ConformallyFlat { exponent } => {
            let u = Polynomial::new(exponent.clone());
            let e2u = (2.0 * u.eval(&x.coords)).exp();
            let grad = u.gradient(&x.coords);
            for k in 0..n {
                let f = 2.0 * grad[k] * e2u;
                for i in 0..n {
                    da[k * n * n + i * n + i] = f;
                }
            }
        }
    }
    Ok(MetricXJet { a, da })
}

/// 1-form value together with exact `∂b_i/∂x^j`.
pub fn eval_oneform_x_jet(spec: &MetricSpec, x: &ChartPoint) -> Result<OneFormXJet> {
    spec.check_domain(x)?;
    let n = spec.dim;
    match &spec.beta {
        OneFormFieldSpec::Constant { values } => Ok(OneFormXJet {
            b: values.clone(),
            db: vec![0.0; n * n],
        }),
        OneFormFieldSpec::Affine { constant, linear } => {
            let mut b = constant.clone();
            let mut db = vec![0.0; n * n];
            for i in 0..n {
                for j in 0..n {
                    b[i] += linear[i][j] * x.coords[j];
                    db[i * n + j] = linear[i][j];
                }
            }
            Ok(OneFormXJet { b, db })
        }
        OneFormFieldSpec::GradientOfPolynomial { potential } => {
            let f = Polynomial::new(potential.clone());
            Ok(OneFormXJet {
                b: f.gradient(&x.coords),
                db: f.hessian(&x.coords),
            })
        }
    }
}

// ---------------------------------------------------------------------------
// Finite-difference fallback (central differences, relative step 1e-5,
// one level of Richardson extrapolation).
// ---------------------------------------------------------------------------

const FD_RELATIVE_STEP: f64 = 1e-5;

/// Central difference with Richardson extrapolation of a scalar-vector map
/// along coordinate k.
pub fn central_difference<Fv>(f: Fv, x: &[f64], k: usize) -> Result<Vec<f64>>
where
    Fv: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let h = FD_RELATIVE_STEP * x[k].abs().max(1.0);
    let diff = |step: f64| -> Result<Vec<f64>> {
        let mut xp = x.to_vec();
        xp[k] += step;
        let mut xm = x.to_vec();
        xm[k] -= step;
        let fp = f(&xp)?;
        let fm = f(&xm)?;
        Ok(fp
            .iter()
            .zip(&fm)
            .map(|(p, m)| (p - m) / (2.0 * step))
            .collect())
    };
    let d_h = diff(h)?;
    let d_h2 = diff(h / 2.0)?;
    Ok(d_h2
        .iter()
        .zip(&d_h)
        .map(|(fine, coarse)| (4.0 * fine - coarse) / 3.0)
        .collect())
}

/// Finite-difference `∂a_ij/∂x^k`, same layout as [`metric_x_jet`].
/// Steps may leave the declared box near its boundary; the family formulas
/// remain evaluable there.
pub fn metric_x_jet_fd(spec: &MetricSpec, x: &ChartPoint) -> Result<MetricXJet> {
    spec.check_domain(x)?;
    let n = spec.dim;
    let a = eval_metric_raw(&spec.alpha, &x.coords);
    require_positive_definite(&a, n, "a_ij")?;
    let mut da = vec![0.0; n * n * n];
    for k in 0..n {
        let dk = central_difference(
            |xx| Ok(eval_metric_raw(&spec.alpha, xx)),
            &x.coords,
            k,
        )?;
        da[k * n * n..(k + 1) * n * n].copy_from_slice(&dk);
    }
    Ok(MetricXJet { a, da })
}

/// Finite-difference `∂b_i/∂x^j`.
pub fn oneform_x_jet_fd(spec: &MetricSpec, x: &ChartPoint) -> Result<OneFormXJet> {
    let exact = eval_oneform_x_jet(spec, x)?;
    let n = spec.dim;
    let mut db = vec![0.0; n * n];
    for j in 0..n {
        let col = central_difference(
            |xx| {
                let p = ChartPoint::new(xx.to_vec())?;
                // bypass the domain check: FD probes may poke past the box edge
                let spec_open = MetricSpec {
                    domain: Domain {
                        min: vec![f64::NEG_INFINITY; n],
                        max: vec![f64::INFINITY; n],
                    },
                    ..spec.clone()
                };
                Ok(eval_oneform_x_jet(&spec_open, &p)?.b)
            },
            &x.coords,
            j,
        )?;
        for i in 0..n {
            db[i * n + j] = col[i];
        }
    }
    Ok(OneFormXJet { b: exact.b, db })
}

/// Build the order-3 fiber jet of a scalar expression at (x, y).
///
/// The closure receives one coordinate jet per fiber component and assembles
/// the expression in jet arithmetic; the captured chart point supplies any
/// x-dependence.
pub fn jet3_compose<F>(f: F, y: &FiberVector) -> Result<Jet3>
where
    F: Fn(&[Jet4]) -> Result<Jet4>,
{
    let n = y.dim();
    let coords: Vec<Jet4> = (0..n).map(|l| Jet4::coordinate(&y.coords, l)).collect();
    Ok(Jet3::from(&f(&coords)?))
}
