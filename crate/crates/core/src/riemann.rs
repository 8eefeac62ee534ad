//! Levi-Civita data of α and the covariant calculus of β.
//!
//! Everything point-local lives in [`RiemannPointData`] / [`BetaCovariantData`]
//! and is computed once per chart point; the spray assembly re-reads these
//! many times per fiber.

use crate::error::{Error, Result};
use crate::fields::{eval_oneform_x_jet, metric_x_jet, ChartPoint, FiberVector, MetricSpec};
use crate::tol;

/// Solve A z = rhs for symmetric positive definite A by LDLᵀ elimination.
/// Rejects when the smallest pivot drops below `PIVOT_REJECT` × largest.
pub fn sym_solve(a: &[f64], rhs: &[f64], n: usize) -> Result<Vec<f64>> {
    let mut m = a.to_vec();
    let mut z = rhs.to_vec();
    let mut pivots = Vec::with_capacity(n);
    for k in 0..n {
        let pivot = m[k * n + k];
        pivots.push(pivot);
        let largest = pivots.iter().fold(0.0f64, |acc, p| acc.max(p.abs()));
        if pivot.abs() < tol::PIVOT_REJECT * largest || pivot <= 0.0 {
            return Err(Error::NonPositiveDefinite(format!(
                "pivot {k} = {pivot:.3e} during symmetric solve"
            )));
        }
        for i in k + 1..n {
            let f = m[i * n + k] / pivot;
            for j in k..n {
                m[i * n + j] -= f * m[k * n + j];
            }
            z[i] -= f * z[k];
        }
    }
    // back substitution
    for k in (0..n).rev() {
        let mut acc = z[k];
        for j in k + 1..n {
            acc -= m[k * n + j] * z[j];
        }
        z[k] = acc / m[k * n + k];
    }
    Ok(z)
}

/// Inverse of a symmetric positive definite matrix.
pub fn sym_inverse(a: &[f64], n: usize) -> Result<Vec<f64>> {
    let mut inv = vec![0.0; n * n];
    for col in 0..n {
        let mut e = vec![0.0; n];
        e[col] = 1.0;
        let z = sym_solve(a, &e, n)?;
        for row in 0..n {
            inv[row * n + col] = z[row];
        }
    }
    // symmetrize rounding residue
    for i in 0..n {
        for j in 0..i {
            let v = 0.5 * (inv[i * n + j] + inv[j * n + i]);
            inv[i * n + j] = v;
            inv[j * n + i] = v;
        }
    }
    Ok(inv)
}

/// Point-local Levi-Civita data of α.
#[derive(Debug, Clone)]
pub struct RiemannPointData {
    pub n: usize,
    /// a_ij, row-major.
    pub a: Vec<f64>,
    /// a^ij.
    pub a_inv: Vec<f64>,
    /// γ^i_jk, layout [i·n² + j·n + k], symmetric in (j, k).
    pub christoffel: Vec<f64>,
}

impl RiemannPointData {
    /// γ^i_jk = ½ a^ir (∂_j a_rk + ∂_k a_rj − ∂_r a_jk).
    pub fn compute(spec: &MetricSpec, x: &ChartPoint) -> Result<Self> {
        let jet = metric_x_jet(spec, x)?;
        let n = spec.dim;
        let a_inv = sym_inverse(&jet.a, n)?;
        let da = |k: usize, i: usize, j: usize| jet.da[k * n * n + i * n + j];
        let mut gamma = vec![0.0; n * n * n];
        for i in 0..n {
            for j in 0..n {
                for k in j..n {
                    let mut acc = 0.0;
                    for r in 0..n {
                        acc += a_inv[i * n + r] * (da(j, r, k) + da(k, r, j) - da(r, j, k));
                    }
                    let v = 0.5 * acc;
                    gamma[i * n * n + j * n + k] = v;
                    gamma[i * n * n + k * n + j] = v;
                }
            }
        }
        Ok(RiemannPointData {
            n,
            a: jet.a,
            a_inv,
            christoffel: gamma,
        })
    }

    #[inline]
    pub fn gamma(&self, i: usize, j: usize, k: usize) -> f64 {
        self.christoffel[i * self.n * self.n + j * self.n + k]
    }

    /// Geodesic coefficients of α: G^i_α(y) = ½ γ^i_jk y^j y^k.
    pub fn spray_alpha(&self, y: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut g = vec![0.0; n];
        for i in 0..n {
            let mut acc = 0.0;
            for j in 0..n {
                for k in 0..n {
                    acc += self.gamma(i, j, k) * y[j] * y[k];
                }
            }
            g[i] = 0.5 * acc;
        }
        g
    }
}

/// Covariant data of β with respect to α at one point.
#[derive(Debug, Clone)]
pub struct BetaCovariantData {
    pub n: usize,
    /// b_i.
    pub b: Vec<f64>,
    /// b^i = a^ij b_j.
    pub b_up: Vec<f64>,
    /// b² = a^ij b_i b_j.
    pub b2: f64,
    /// b_{i|j} = ∂_j b_i − b_m γ^m_ij.
    pub cov: Vec<f64>,
    /// r_ij = ½(b_{i|j} + b_{j|i}).
    pub r: Vec<f64>,
    /// s_ij = ½(b_{i|j} − b_{j|i}).
    pub s: Vec<f64>,
    /// s^i_j = a^il s_lj.
    pub s_up: Vec<f64>,
    /// s_j = b^i s_ij.
    pub s_vec: Vec<f64>,
    /// r_j = b^i r_ij.
    pub r_vec: Vec<f64>,
}

/// Compute the covariant derivative of β and its symmetric/antisymmetric split.
pub fn beta_covariant(
    spec: &MetricSpec,
    x: &ChartPoint,
    rd: &RiemannPointData,
) -> Result<BetaCovariantData> {
    let bx = eval_oneform_x_jet(spec, x)?;
    let n = spec.dim;
    let mut cov = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let mut acc = bx.db[i * n + j];
            for m in 0..n {
                acc -= bx.b[m] * rd.gamma(m, i, j);
            }
            cov[i * n + j] = acc;
        }
    }
    let mut r = vec![0.0; n * n];
    let mut s = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            r[i * n + j] = 0.5 * (cov[i * n + j] + cov[j * n + i]);
            s[i * n + j] = 0.5 * (cov[i * n + j] - cov[j * n + i]);
        }
    }
    let mut b_up = vec![0.0; n];
    for i in 0..n {
        b_up[i] = (0..n).map(|j| rd.a_inv[i * n + j] * bx.b[j]).sum();
    }
    let b2 = (0..n).map(|i| b_up[i] * bx.b[i]).sum::<f64>();
    let mut s_up = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            s_up[i * n + j] = (0..n).map(|l| rd.a_inv[i * n + l] * s[l * n + j]).sum();
        }
    }
    let mut s_vec = vec![0.0; n];
    let mut r_vec = vec![0.0; n];
    for j in 0..n {
        s_vec[j] = (0..n).map(|i| b_up[i] * s[i * n + j]).sum();
        r_vec[j] = (0..n).map(|i| b_up[i] * r[i * n + j]).sum();
    }
    Ok(BetaCovariantData {
        n,
        b: bx.b,
        b_up,
        b2,
        cov,
        r,
        s,
        s_up,
        s_vec,
        r_vec,
    })
}

/// Scalars contracted against one fiber vector.
#[derive(Debug, Clone)]
pub struct ContractedScalars {
    pub r_00: f64,
    pub r_0: f64,
    pub s_0: f64,
    /// s^i_0 = s^i_j y^j.
    pub s_up_0: Vec<f64>,
}

pub fn contract_scalars(data: &BetaCovariantData, y: &FiberVector) -> ContractedScalars {
    let n = data.n;
    let yv = &y.coords;
    let mut r_00 = 0.0;
    for i in 0..n {
        for j in 0..n {
            r_00 += data.r[i * n + j] * yv[i] * yv[j];
        }
    }
    let r_0 = (0..n).map(|j| data.r_vec[j] * yv[j]).sum();
    let s_0 = (0..n).map(|j| data.s_vec[j] * yv[j]).sum();
    let mut s_up_0 = vec![0.0; n];
    for i in 0..n {
        s_up_0[i] = (0..n).map(|j| data.s_up[i * n + j] * yv[j]).sum();
    }
    ContractedScalars {
        r_00,
        r_0,
        s_0,
        s_up_0,
    }
}
