//! Numerical laboratory for (α, β)-metric Finsler geometry.
//!
//! The crate evaluates analytic families of Riemannian metrics `a_ij(x)` and
//! 1-forms `b_i(x)`, builds the Finsler metric `F = α φ(β/α)` for a registry
//! of φ-families, and computes the geometric objects that control geodesic
//! behaviour: spray coefficients, Berwald / Douglas / mean-Berwald tensors,
//! and the covariant data `r_ij`, `s_ij` of β. On top of that sit
//! characterization checks (Douglas conditions, projective equivalence,
//! isotropy criteria), a rational-identity audit for the closed-form
//! transport-term tables, and a fixed-step geodesic integrator.
//!
//! All fiber differentiation is exact: quantities are propagated through a
//! truncated fourth-order Taylor arithmetic ([`jet::Jet4`]), so third
//! derivatives of sprays carry no differencing noise. Finite differences
//! appear only as test oracles and as an optional fallback for x-derivatives.
//!
//! Everything is a pure function of immutable specification values; sample
//! sweeps parallelize with rayon when the `parallel` feature (default) is
//! enabled and fall back to sequential iteration otherwise.
//!
//! ```
//! use finsler_lab::{ChartPoint, FiberVector, MetricSpec};
//! use finsler_lab::spray::{douglas_tensor, max_abs, spray_via_alphabeta,
//!     spray_via_definition, PointContext};
//!
//! let spec = MetricSpec::from_json(r#"{
//!     "dim": 2,
//!     "alpha": {"family": "conformally-flat",
//!               "params": {"exponent": [{"coeff": 0.3, "powers": [1, 0]}]}},
//!     "beta":  {"family": "constant", "params": {"values": [0.2, 0.0]}},
//!     "phi":   {"family": "matsumoto"},
//!     "domain": {"min": [-1.0, -1.0], "max": [1.0, 1.0]}
//! }"#).unwrap();
//!
//! let x = ChartPoint::new(vec![0.1, -0.4]).unwrap();
//! let y = FiberVector::new(vec![0.8, 0.5]).unwrap();
//!
//! // the two spray routes agree to analytic precision
//! let g = spray_via_alphabeta(&spec, &x, &y).unwrap();
//! let g_def = spray_via_definition(&spec, &x, &y).unwrap();
//! for (a, b) in g.iter().zip(&g_def) {
//!     assert!((a - b).abs() < 1e-9);
//! }
//!
//! // curvature tensors come from exact fiber jets
//! let ctx = PointContext::new(&spec, &x).unwrap();
//! let d = douglas_tensor(&ctx, &y).unwrap();
//! assert!(max_abs(&d) > 0.0);
//! ```

pub mod alphabeta;
pub mod error;
pub mod exec;
pub mod fields;
pub mod geodesics;
pub mod identity;
pub mod jet;
pub mod projective;
pub mod report;
pub mod riemann;
pub mod spray;
pub mod testkit;
pub mod tol;

pub use error::{Error, Result};
pub use fields::{ChartPoint, FiberVector, MetricSpec};
pub use projective::{CheckVerdict, SamplePlan};
