//! Report serialization: JSON-lines records with every float written in
//! scientific notation at 17 significant digits (round-trip exact, and
//! comfortably past the 15-digit contract), plus CSV export for traces.

use std::io::{self, Write};

use serde::Serialize;
use serde_json::ser::Formatter;

use crate::error::{Error, Result};
use crate::geodesics::GeodesicTrace;
use crate::spray::{max_abs, SprayPointData};

/// JSON formatter that writes every f64 as `d.dddddddddddddddde±ddd`.
#[derive(Default)]
pub struct SciFormatter;

impl Formatter for SciFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        if value.is_finite() {
            write!(writer, "{value:.16e}")
        } else {
            writer.write_all(b"null")
        }
    }

    fn write_f32<W>(&mut self, writer: &mut W, value: f32) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        self.write_f64(writer, value as f64)
    }
}

/// Serialize any record as one JSON line with full-precision floats.
pub fn to_json_line<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SciFormatter);
    value
        .serialize(&mut ser)
        .map_err(|e| Error::InvalidSpec(format!("serialization failure: {e}")))?;
    String::from_utf8(buf).map_err(|e| Error::InvalidSpec(format!("non-utf8 output: {e}")))
}

/// One tensor-report record: per-sample values of the fundamental tensor,
/// spray, curvature norms (max absolute entry) and cross-route residuals.
#[derive(Debug, Clone, Serialize)]
pub struct TensorRecord {
    pub point_index: usize,
    pub fiber_index: usize,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    #[serde(rename = "F")]
    pub f: f64,
    pub g: Vec<f64>,
    #[serde(rename = "G")]
    pub spray: Vec<f64>,
    #[serde(rename = "B_norm")]
    pub b_norm: f64,
    #[serde(rename = "D_norm")]
    pub d_norm: f64,
    #[serde(rename = "E_norm")]
    pub e_norm: f64,
    pub residuals: TensorResiduals,
}

#[derive(Debug, Clone, Serialize)]
pub struct TensorResiduals {
    /// Relative disagreement between the two spray routes.
    pub spray_cross: f64,
    /// Relative Euler-identity defect `|g_ij y^i y^j − F²| / F²`.
    pub g_euler: f64,
    /// Max absolute Douglas trace `D^m_mkl`.
    pub douglas_trace: f64,
}

impl TensorRecord {
    pub fn from_point_data(
        point_index: usize,
        fiber_index: usize,
        x: &[f64],
        y: &[f64],
        d: &SprayPointData,
    ) -> Self {
        let n = y.len();
        let cross: Vec<f64> = d
            .spray
            .iter()
            .zip(&d.spray_definition)
            .map(|(a, b)| a - b)
            .collect();
        let mut gyy = 0.0;
        for i in 0..n {
            for j in 0..n {
                gyy += d.g[i * n + j] * y[i] * y[j];
            }
        }
        let mut dtrace: f64 = 0.0;
        for k in 0..n {
            for l in 0..n {
                let mut tr = 0.0;
                for m in 0..n {
                    tr += d.douglas[((m * n + m) * n + k) * n + l];
                }
                dtrace = dtrace.max(tr.abs());
            }
        }
        TensorRecord {
            point_index,
            fiber_index,
            x: x.to_vec(),
            y: y.to_vec(),
            f: d.f_value,
            g: d.g.clone(),
            spray: d.spray.clone(),
            b_norm: max_abs(&d.berwald),
            d_norm: max_abs(&d.douglas),
            e_norm: max_abs(&d.mean_berwald),
            residuals: TensorResiduals {
                spray_cross: max_abs(&cross) / 1.0f64.max(max_abs(&d.spray_definition)),
                g_euler: (gyy - d.f_value * d.f_value).abs() / (d.f_value * d.f_value),
                douglas_trace: dtrace,
            },
        }
    }
}

/// Write a geodesic trace as CSV: `t, x^1..x^n, v^1..v^n, arclength`.
pub fn trace_to_csv(trace: &GeodesicTrace) -> String {
    let n = trace.points.first().map(|p| p.dim()).unwrap_or(0);
    let mut out = String::from("t");
    for i in 1..=n {
        out.push_str(&format!(",x^{i}"));
    }
    for i in 1..=n {
        out.push_str(&format!(",v^{i}"));
    }
    out.push_str(",arclength\n");
    for (((p, v), t), s) in trace
        .points
        .iter()
        .zip(&trace.velocities)
        .zip(&trace.params)
        .zip(&trace.arclengths)
    {
        out.push_str(&format!("{t:.16e}"));
        for c in &p.coords {
            out.push_str(&format!(",{c:.16e}"));
        }
        for c in v {
            out.push_str(&format!(",{c:.16e}"));
        }
        out.push_str(&format!(",{s:.16e}\n"));
    }
    out
}

/// Geodesic trace as JSON-lines records (one per vertex).
#[derive(Debug, Clone, Serialize)]
pub struct TraceRecord<'a> {
    pub t: f64,
    pub x: &'a [f64],
    pub v: &'a [f64],
    pub arclength: f64,
    pub spec_id: &'a str,
}

pub fn trace_to_json_lines(trace: &GeodesicTrace) -> Result<String> {
    let mut out = String::new();
    for (((p, v), t), s) in trace
        .points
        .iter()
        .zip(&trace.velocities)
        .zip(&trace.params)
        .zip(&trace.arclengths)
    {
        let rec = TraceRecord {
            t: *t,
            x: &p.coords,
            v,
            arclength: *s,
            spec_id: &trace.spec_id,
        };
        out.push_str(&to_json_line(&rec)?);
        out.push('\n');
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    struct Probe {
        a: f64,
        b: Vec<f64>,
    }

    #[test]
    fn floats_carry_seventeen_significant_digits() {
        let p = Probe {
            a: 1.5,
            b: vec![std::f64::consts::PI, -0.1],
        };
        let line = to_json_line(&p).unwrap();
        assert!(line.contains("1.5000000000000000e0"));
        assert!(line.contains("3.1415926535897931e0"));
        assert!(line.contains("-1.0000000000000001e-1"));
    }

    #[test]
    fn json_line_round_trips_exactly() {
        let vals = [1.0 / 3.0, 2.4e-17, -7.125e9, f64::MIN_POSITIVE];
        for v in vals {
            let line = to_json_line(&v).unwrap();
            let back: f64 = serde_json::from_str(&line).unwrap();
            assert_eq!(v, back, "round trip of {v}: {line}");
        }
    }

    #[test]
    fn non_finite_becomes_null() {
        let line = to_json_line(&f64::NAN).unwrap();
        assert_eq!(line, "null");
    }
}
