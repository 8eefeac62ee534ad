//! Deterministic generators of random-but-valid metric specifications,
//! shared by the test suites and the benchmarks.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::alphabeta::PhiFamily;
use crate::fields::{Domain, MetricSpec, MonomialTerm, OneFormFieldSpec, RiemannFieldSpec};

/// Which α-family a generated spec uses, cycled by index.
fn alpha_family(rng: &mut ChaCha8Rng, n: usize, which: usize) -> RiemannFieldSpec {
    match which % 3 {
        0 => RiemannFieldSpec::Euclidean,
        1 => RiemannFieldSpec::DiagonalPolynomial {
            diag: (0..n)
                .map(|_| vec![1.0 + rng.gen_range(0.0..0.3), 0.0, rng.gen_range(0.05..0.4)])
                .collect(),
        },
        _ => {
            let mut terms = Vec::new();
            for axis in 0..n.min(2) {
                let mut powers = vec![0u32; n];
                powers[axis] = 1;
                terms.push(MonomialTerm {
                    coeff: rng.gen_range(-0.3..0.3),
                    powers,
                });
            }
            RiemannFieldSpec::ConformallyFlat { exponent: terms }
        }
    }
}

/// A β-family with coefficients small enough that ‖β‖_α stays safely inside
/// every family's regularity radius on the unit box.
fn beta_family(rng: &mut ChaCha8Rng, n: usize, which: usize) -> OneFormFieldSpec {
    match which % 3 {
        0 => OneFormFieldSpec::Constant {
            values: (0..n).map(|_| rng.gen_range(-0.12..0.12)).collect(),
        },
        1 => OneFormFieldSpec::Affine {
            constant: (0..n).map(|_| rng.gen_range(-0.08..0.08)).collect(),
            linear: (0..n)
                .map(|_| (0..n).map(|_| rng.gen_range(-0.05..0.05)).collect())
                .collect(),
        },
        _ => {
            let mut terms = Vec::new();
            for axis in 0..n.min(2) {
                let mut powers = vec![0u32; n];
                powers[axis] = 1;
                powers[(axis + 1) % n] += 1;
                terms.push(MonomialTerm {
                    coeff: rng.gen_range(-0.06..0.06),
                    powers,
                });
            }
            OneFormFieldSpec::GradientOfPolynomial { potential: terms }
        }
    }
}

fn phi_family(rng: &mut ChaCha8Rng, which: usize) -> PhiFamily {
    if which % 2 == 0 {
        let mag = rng.gen_range(0.3..1.0);
        let k = if rng.gen_bool(0.5) { mag } else { -0.4 * mag };
        PhiFamily::Quadratic {
            epsilon: rng.gen_range(-0.8..0.8),
            k,
        }
    } else {
        PhiFamily::Matsumoto
    }
}

/// Deterministic random spec: cycles α-, β- and φ-families with `index`
/// while drawing parameters from the seeded stream.
pub fn random_spec(seed: u64, index: usize, n: usize) -> MetricSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    MetricSpec {
        dim: n,
        alpha: alpha_family(&mut rng, n, index),
        beta: beta_family(&mut rng, n, index / 3),
        phi: phi_family(&mut rng, index / 6),
        domain: Domain {
            min: vec![-0.8; n],
            max: vec![0.8; n],
        },
    }
}

/// Random chart point inside the spec's domain (10% margin) and a random
/// fiber vector bounded away from zero.
pub fn random_sample(spec: &MetricSpec, seed: u64, index: usize) -> (Vec<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    rng.set_stream(index as u64);
    let n = spec.dim;
    let x: Vec<f64> = (0..n)
        .map(|i| {
            let (lo, hi) = (spec.domain.min[i], spec.domain.max[i]);
            let c = 0.5 * (lo + hi);
            let h = 0.45 * (hi - lo);
            rng.gen_range(c - h..c + h)
        })
        .collect();
    loop {
        let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        if y.iter().map(|c| c * c).sum::<f64>() >= 0.09 {
            return (x, y);
        }
    }
}
