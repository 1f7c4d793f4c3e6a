#![allow(dead_code)]

use std::sync::Arc;

use cocycle_core::linalg::CMatrix;
use cocycle_core::map_dsl::{parse_map, HoloMap, Holomorphic};
use cocycle_core::{Complex64, Point};
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn q(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_complex(rng: &mut ChaCha8Rng, scale: f64) -> Complex64 {
    c(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale))
}

pub fn random_matrix(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> CMatrix {
    CMatrix::from_fn(n, |_, _| random_complex(rng, scale))
}

/// Identity plus a small perturbation, so always well conditioned.
pub fn random_invertible(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
    CMatrix::from_fn(n, |i, j| if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) } + random_complex(rng, 0.3))
}

pub fn random_point(rng: &mut ChaCha8Rng, center: &[Complex64], radius: f64) -> Point {
    center.iter().map(|z| z + random_complex(rng, radius)).collect()
}

pub fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn mat_max_diff(a: &[CMatrix], b: &[CMatrix]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).max_abs()).fold(0.0, f64::max)
}

/// Expected expansions: `(k, power-sum form, elementary form)`.
pub const TODD_DISPLAY: [(usize, &str, &str); 3] =
    [(1, "(1/2) T1", "(1/2) S1"), (2, "(1/24)(3 T1^2 - T2)", "(1/12)(S1^2 + S2)"), (3, "(1/48)(T1^3 - T1 T2)", "(1/24) S1 S2")];

/// `∂f/∂z_var` at `z` from the Cauchy integral over a small circle; spectrally accurate for
/// holomorphic `f`.
pub fn cauchy_derivative(f: &dyn Fn(&[Complex64]) -> Option<Complex64>, z: &[Complex64], var: usize) -> Option<Complex64> {
    let samples = 16;
    let r = 1e-3;
    let mut acc = c(0.0, 0.0);
    for k in 0..samples {
        let w = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / samples as f64);
        let mut p = z.to_vec();
        p[var] += w * r;
        acc += f(&p)? / w;
    }
    Some(acc / (samples as f64 * r))
}

/// Second transcription of the kernel coefficients, used as an oracle.
pub fn bm_oracle(n: usize, z: &[Complex64], xi: &[Complex64]) -> Vec<Complex64> {
    let gamma_n: f64 = (1..n).map(|k| k as f64).product();
    let parity = if (n * (n - 1)).is_multiple_of(2) { 1.0 } else { -1.0 };
    let b = c(-parity * gamma_n, 0.0) / c(0.0, 2.0 * std::f64::consts::PI);
    let norm2: f64 = xi.iter().zip(z).map(|(a, b)| (a - b).norm_sqr()).sum();
    (1..=n)
        .map(|i| {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            b * sign * (xi[i - 1] - z[i - 1]).conj() / norm2.powi(n as i32)
        })
        .collect()
}

pub struct LibraryMap {
    pub name: &'static str,
    pub map: Arc<dyn Holomorphic>,
    pub affine: bool,
}

fn lib(name: &'static str, text: &str, affine: bool) -> LibraryMap {
    LibraryMap { name, map: Arc::new(parse_map(text, 2).unwrap().named(name)), affine }
}

pub fn holo(map: HoloMap) -> Arc<dyn Holomorphic> {
    Arc::new(map)
}

/// Maps of `C²` that are biholomorphic near `(0.6, 0.6)`, with that region mapped near itself.
pub fn map_library() -> Vec<LibraryMap> {
    vec![
        lib("shear", "z1 + z2^2/3; z2", false),
        lib("cubic-shear", "z1; z2 + z1^3/4 - z1/5", false),
        lib("henon", "z2; z2^2 + 1/10 - z1", false),
        lib("square", "z1^2; z2", false),
        lib("mobius", "(2*z1 + 1)/(z1 + 3); z2", false),
        lib("exp-twist", "z1*exp(z2/3); z2", false),
        lib("linear", "2*z1 + z2; z2 - 1/2*z1", true),
        lib("translate", "z1 + 1/4; z2 - i/4", true),
    ]
}

pub const LIBRARY_CENTER: [Complex64; 2] = [Complex64::new(0.6, 0.1), Complex64::new(0.5, -0.1)];
