//! Geodesic integration and point-set comparison of traces.
//!
//! Fixed-step classical RK4 on the first-order system (x, v) with
//! v̇ = −2G(x, v). No step adaptivity: determinism and clean convergence
//! testing matter more than efficiency at this scale.

use serde::Serialize;

use crate::alphabeta::finsler_value;
use crate::error::{Error, Result};
use crate::fields::{ChartPoint, FiberVector, MetricSpec};
use crate::spray::{spray_value, PointContext};

/// Why an integration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TraceExit {
    Completed,
    DomainExit,
    SingularEvaluation,
}

/// Integrated geodesic polyline with parameter and arc-length metadata.
#[derive(Debug, Clone)]
pub struct GeodesicTrace {
    pub points: Vec<ChartPoint>,
    pub velocities: Vec<Vec<f64>>,
    pub params: Vec<f64>,
    /// Cumulative F-length along the trace (trapezoid rule on F(x, ẋ)).
    pub arclengths: Vec<f64>,
    pub spec_id: String,
    pub exit: TraceExit,
}

fn rhs(spec: &MetricSpec, x: &[f64], v: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let xp = ChartPoint::new(x.to_vec())?;
    let ctx = PointContext::new(spec, &xp)?;
    let g = spray_value(&ctx, &FiberVector::new(v.to_vec())?)?;
    Ok((v.to_vec(), g.iter().map(|gi| -2.0 * gi).collect()))
}

/// Integrate the geodesic ODE `ẍ + 2G(x, ẋ) = 0` from (x0, y0) to t_end
/// with fixed step dt. Exits early (with a flag) on leaving the chart box
/// or on a singular spray evaluation.
pub fn integrate_geodesic(
    spec: &MetricSpec,
    x0: &ChartPoint,
    y0: &FiberVector,
    t_end: f64,
    dt: f64,
) -> Result<GeodesicTrace> {
    if y0.is_zero() {
        return Err(Error::SingularEvaluation("zero initial velocity".into()));
    }
    if !(dt > 0.0) || !(t_end > 0.0) {
        return Err(Error::InvalidSpec("dt and t_end must be positive".into()));
    }
    let n = spec.dim;
    let mut x = x0.coords.clone();
    let mut v = y0.coords.clone();
    let mut t = 0.0;

    let mut points = vec![x0.clone()];
    let mut velocities = vec![v.clone()];
    let mut params = vec![0.0];
    let mut arclengths = vec![0.0];
    let mut f_prev = finsler_value(spec, x0, y0)?;
    let mut exit = TraceExit::Completed;

    let steps = (t_end / dt).ceil() as usize;
    for step in 0..steps {
        let h = if (step + 1) as f64 * dt > t_end {
            t_end - t
        } else {
            dt
        };
        if h <= 0.0 {
            break;
        }
        let stage = |xs: &[f64], vs: &[f64]| rhs(spec, xs, vs);
        let add = |a: &[f64], b: &[f64], c: f64| -> Vec<f64> {
            a.iter().zip(b).map(|(p, q)| p + c * q).collect()
        };
        let k1 = match stage(&x, &v) {
            Ok(k) => k,
            Err(Error::DomainError(_)) => {
                exit = TraceExit::DomainExit;
                break;
            }
            Err(_) => {
                exit = TraceExit::SingularEvaluation;
                break;
            }
        };
        let try_stages = (|| -> Result<_> {
            let k2 = stage(&add(&x, &k1.0, h / 2.0), &add(&v, &k1.1, h / 2.0))?;
            let k3 = stage(&add(&x, &k2.0, h / 2.0), &add(&v, &k2.1, h / 2.0))?;
            let k4 = stage(&add(&x, &k3.0, h), &add(&v, &k3.1, h))?;
            Ok((k2, k3, k4))
        })();
        let (k2, k3, k4) = match try_stages {
            Ok(ks) => ks,
            Err(Error::DomainError(_)) => {
                exit = TraceExit::DomainExit;
                break;
            }
            Err(_) => {
                exit = TraceExit::SingularEvaluation;
                break;
            }
        };
        for i in 0..n {
            x[i] += h / 6.0 * (k1.0[i] + 2.0 * k2.0[i] + 2.0 * k3.0[i] + k4.0[i]);
            v[i] += h / 6.0 * (k1.1[i] + 2.0 * k2.1[i] + 2.0 * k3.1[i] + k4.1[i]);
        }
        t += h;

        let xp = ChartPoint::new(x.clone())?;
        if !spec.domain.contains(&xp) {
            exit = TraceExit::DomainExit;
            break;
        }
        let f_here = match finsler_value(spec, &xp, &FiberVector::new(v.clone())?) {
            Ok(f) => f,
            Err(_) => {
                exit = TraceExit::SingularEvaluation;
                break;
            }
        };
        let ds = 0.5 * (f_prev + f_here) * h;
        f_prev = f_here;
        arclengths.push(arclengths.last().unwrap() + ds);
        points.push(xp);
        velocities.push(v.clone());
        params.push(t);
    }

    Ok(GeodesicTrace {
        points,
        velocities,
        params,
        arclengths,
        spec_id: spec.describe(),
        exit,
    })
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(p, q)| (p - q) * (p - q))
        .sum::<f64>()
        .sqrt()
}

fn point_segment_distance(p: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let n = p.len();
    let mut ab2 = 0.0;
    let mut ap_ab = 0.0;
    for i in 0..n {
        let d = b[i] - a[i];
        ab2 += d * d;
        ap_ab += (p[i] - a[i]) * d;
    }
    let t = if ab2 > 0.0 {
        (ap_ab / ab2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let proj: Vec<f64> = (0..n).map(|i| a[i] + t * (b[i] - a[i])).collect();
    euclid(p, &proj)
}

fn one_sided(points: &[&[f64]], polyline: &[&[f64]]) -> f64 {
    let mut worst: f64 = 0.0;
    for p in points {
        let mut best = f64::INFINITY;
        if polyline.len() == 1 {
            best = euclid(p, polyline[0]);
        }
        for w in polyline.windows(2) {
            best = best.min(point_segment_distance(p, w[0], w[1]));
        }
        worst = worst.max(best);
    }
    worst
}

/// Truncate a trace to a chart arc length budget (piecewise-linear cut).
fn truncate_to_length(trace: &GeodesicTrace, budget: f64) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = vec![trace.points[0].coords.clone()];
    let mut used = 0.0;
    for w in trace.points.windows(2) {
        let seg = euclid(&w[0].coords, &w[1].coords);
        if used + seg >= budget && seg > 0.0 {
            let t = (budget - used) / seg;
            let cut: Vec<f64> = w[0]
                .coords
                .iter()
                .zip(&w[1].coords)
                .map(|(a, b)| a + t * (b - a))
                .collect();
            out.push(cut);
            return out;
        }
        used += seg;
        out.push(w[1].coords.clone());
    }
    out
}

fn chart_length(trace: &GeodesicTrace) -> f64 {
    trace
        .points
        .windows(2)
        .map(|w| euclid(&w[0].coords, &w[1].coords))
        .sum()
}

/// Symmetrized polyline distance between two traces as point sets.
///
/// Both traces are reparametrized by chart arc length (the shared reference)
/// and truncated to the shorter one's length before symmetrizing the
/// one-sided distances, so a longer trace never counts its far tail.
pub fn compare_traces(a: &GeodesicTrace, b: &GeodesicTrace) -> Result<f64> {
    if a.points.is_empty() || b.points.is_empty() {
        return Err(Error::EmptyTrace);
    }
    let budget = chart_length(a).min(chart_length(b));
    let pa = truncate_to_length(a, budget);
    let pb = truncate_to_length(b, budget);
    let ra: Vec<&[f64]> = pa.iter().map(|p| p.as_slice()).collect();
    let rb: Vec<&[f64]> = pb.iter().map(|p| p.as_slice()).collect();
    Ok(one_sided(&ra, &rb).max(one_sided(&rb, &ra)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabeta::PhiFamily;
    use crate::fields::{Domain, MonomialTerm, OneFormFieldSpec, RiemannFieldSpec};

    fn flat_spec(phi: PhiFamily) -> MetricSpec {
        MetricSpec {
            dim: 2,
            alpha: RiemannFieldSpec::Euclidean,
            beta: OneFormFieldSpec::Constant {
                values: vec![0.2, 0.1],
            },
            phi,
            domain: Domain {
                min: vec![-5.0, -5.0],
                max: vec![5.0, 5.0],
            },
        }
    }

    fn conformal_riemannian() -> MetricSpec {
        MetricSpec {
            dim: 2,
            alpha: RiemannFieldSpec::ConformallyFlat {
                exponent: vec![MonomialTerm {
                    coeff: 0.3,
                    powers: vec![1, 0],
                }],
            },
            beta: OneFormFieldSpec::Constant {
                values: vec![0.0, 0.0],
            },
            phi: PhiFamily::Quadratic {
                epsilon: 0.5,
                k: 1.0,
            },
            domain: Domain {
                min: vec![-5.0, -5.0],
                max: vec![5.0, 5.0],
            },
        }
    }

    #[test]
    fn flat_geodesics_are_straight_lines() {
        let spec = flat_spec(PhiFamily::Matsumoto);
        let x0 = ChartPoint::new(vec![0.0, 0.0]).unwrap();
        let y0 = FiberVector::new(vec![0.6, 0.3]).unwrap();
        let tr = integrate_geodesic(&spec, &x0, &y0, 1.0, 1e-2).unwrap();
        assert_eq!(tr.exit, TraceExit::Completed);
        for (p, t) in tr.points.iter().zip(&tr.params) {
            assert!((p.coords[0] - 0.6 * t).abs() < 1e-10);
            assert!((p.coords[1] - 0.3 * t).abs() < 1e-10);
        }
    }

    #[test]
    fn conformal_matches_independent_christoffel_integrator() {
        // independent oracle: RK4 directly on ẍ^i = −γ^i_jk ẋ^j ẋ^k with the
        // conformal closed form γ^i_jk = δ^i_j u_k + δ^i_k u_j − δ_jk u^i.
        let spec = conformal_riemannian();
        let c = 0.3;
        let gamma_acc = |x: &[f64], v: &[f64]| -> Vec<f64> {
            let u = [c, 0.0];
            let _ = x;
            let n = 2;
            let mut acc = vec![0.0; n];
            for i in 0..n {
                let mut s = 0.0;
                for j in 0..n {
                    for k in 0..n {
                        let mut g = 0.0;
                        if i == j {
                            g += u[k];
                        }
                        if i == k {
                            g += u[j];
                        }
                        if j == k {
                            g -= u[i];
                        }
                        s += g * v[j] * v[k];
                    }
                }
                acc[i] = -s;
            }
            acc
        };
        let dt = 1e-3;
        let t_end = 1.0;
        let mut x = vec![0.0, 0.0];
        let mut v = vec![0.4, 0.5];
        let steps = (t_end / dt) as usize;
        for _ in 0..steps {
            let f = |x: &Vec<f64>, v: &Vec<f64>| (v.clone(), gamma_acc(x, v));
            let (k1x, k1v) = f(&x, &v);
            let ad = |a: &Vec<f64>, b: &Vec<f64>, c: f64| -> Vec<f64> {
                a.iter().zip(b).map(|(p, q)| p + c * q).collect()
            };
            let (k2x, k2v) = f(&ad(&x, &k1x, dt / 2.0), &ad(&v, &k1v, dt / 2.0));
            let (k3x, k3v) = f(&ad(&x, &k2x, dt / 2.0), &ad(&v, &k2v, dt / 2.0));
            let (k4x, k4v) = f(&ad(&x, &k3x, dt), &ad(&v, &k3v, dt));
            for i in 0..2 {
                x[i] += dt / 6.0 * (k1x[i] + 2.0 * k2x[i] + 2.0 * k3x[i] + k4x[i]);
                v[i] += dt / 6.0 * (k1v[i] + 2.0 * k2v[i] + 2.0 * k3v[i] + k4v[i]);
            }
        }

        let x0 = ChartPoint::new(vec![0.0, 0.0]).unwrap();
        let y0 = FiberVector::new(vec![0.4, 0.5]).unwrap();
        let tr = integrate_geodesic(&spec, &x0, &y0, t_end, dt).unwrap();
        let end = tr.points.last().unwrap();
        assert!((end.coords[0] - x[0]).abs() < 1e-8);
        assert!((end.coords[1] - x[1]).abs() < 1e-8);
    }

    #[test]
    fn velocity_rescaling_gives_same_point_set() {
        let spec = conformal_riemannian();
        let x0 = ChartPoint::new(vec![0.1, -0.2]).unwrap();
        let y0 = FiberVector::new(vec![0.5, 0.4]).unwrap();
        let y2 = FiberVector::new(vec![1.0, 0.8]).unwrap();
        let tr1 = integrate_geodesic(&spec, &x0, &y0, 1.0, 1e-3).unwrap();
        let tr2 = integrate_geodesic(&spec, &x0, &y2, 0.5, 5e-4).unwrap();
        let d = compare_traces(&tr1, &tr2).unwrap();
        assert!(d < 1e-9, "rescaled trace distance {d}");
    }

    #[test]
    fn rk4_endpoint_convergence_ratio() {
        let spec = conformal_riemannian();
        let x0 = ChartPoint::new(vec![0.0, 0.1]).unwrap();
        let y0 = FiberVector::new(vec![0.7, -0.3]).unwrap();
        let endpoint = |dt: f64| {
            let tr = integrate_geodesic(&spec, &x0, &y0, 1.0, dt).unwrap();
            tr.points.last().unwrap().coords.clone()
        };
        let e1 = endpoint(4e-2);
        let e2 = endpoint(2e-2);
        let e3 = endpoint(1e-2);
        let d12 = euclid(&e1, &e2);
        let d23 = euclid(&e2, &e3);
        let ratio = d12 / d23;
        assert!(
            (ratio - 16.0).abs() <= 0.3 * 16.0,
            "convergence ratio {ratio}"
        );
    }

    #[test]
    fn riemannian_speed_is_conserved() {
        let spec = conformal_riemannian();
        let x0 = ChartPoint::new(vec![0.0, 0.0]).unwrap();
        let y0 = FiberVector::new(vec![0.4, 0.5]).unwrap();
        let tr = integrate_geodesic(&spec, &x0, &y0, 1.0, 1e-3).unwrap();
        let speed = |idx: usize| {
            let v = FiberVector::new(tr.velocities[idx].clone()).unwrap();
            finsler_value(&spec, &tr.points[idx], &v).unwrap()
        };
        let f0 = speed(0);
        for idx in [tr.points.len() / 2, tr.points.len() - 1] {
            let f = speed(idx);
            assert!((f - f0).abs() <= 1e-6 * f0);
        }
    }

    #[test]
    fn domain_exit_truncates_with_flag() {
        let mut spec = flat_spec(PhiFamily::Matsumoto);
        spec.domain = Domain {
            min: vec![-0.5, -0.5],
            max: vec![0.5, 0.5],
        };
        let x0 = ChartPoint::new(vec![0.0, 0.0]).unwrap();
        let y0 = FiberVector::new(vec![1.0, 0.0]).unwrap();
        let tr = integrate_geodesic(&spec, &x0, &y0, 2.0, 1e-2).unwrap();
        assert_eq!(tr.exit, TraceExit::DomainExit);
        assert!(tr.points.last().unwrap().coords[0] <= 0.5 + 1e-9);
    }

    #[test]
    fn identical_and_resampled_traces_compare_to_zero() {
        let spec = flat_spec(PhiFamily::Quadratic {
            epsilon: 1.0,
            k: 1.0,
        });
        let x0 = ChartPoint::new(vec![0.0, 0.0]).unwrap();
        let y0 = FiberVector::new(vec![0.3, 0.4]).unwrap();
        let t1 = integrate_geodesic(&spec, &x0, &y0, 1.0, 1e-2).unwrap();
        let t2 = integrate_geodesic(&spec, &x0, &y0, 1.0, 1e-3).unwrap();
        assert_eq!(compare_traces(&t1, &t1).unwrap(), 0.0);
        assert!(compare_traces(&t1, &t2).unwrap() < 1e-12);
    }
}
