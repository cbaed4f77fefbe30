//! p-adic Haar integration for tree-level string amplitudes.
//!
//! The closed-form four-point amplitude ∫ |x|^a |1−x|^b dx over ℚ_p splits
//! into four regions (|x| < 1, |x−1| < 1, the units at unit distance from
//! both 0 and 1, and |x| > 1), each a geometric series with an explicit
//! rational value. The n-point amplitude over the moduli chart with
//! punctures 0, 1, ∞ fixed is estimated by importance-sampled Monte Carlo
//! with a defensive mixture proposal: half of each coordinate's draws come
//! from a proposal matched to that coordinate's |x|^a|1−x|^b profile, half
//! from plain windowed Haar, which keeps the weights bounded wherever the
//! matched proposal covers the integrand. Estimates are deterministic per
//! seed, and reductions use a fixed pairwise summation tree so the result
//! does not depend on accumulation order.
//!
//! Reliable reported standard errors additionally need the pairwise
//! exponents k_i·k_j (which the proposal does not model) to stay above
//! −1/2; below that the weight distribution is heavy-tailed and the
//! variance estimate degrades, although the estimator stays unbiased for
//! the windowed integral.

use std::collections::BTreeMap;

use num::{BigInt, BigRational, One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::btree::{comb_type_of, CombType, TreeError};
use crate::padic::{FieldParams, PadicError, ProjPoint1};

#[derive(Debug, Error, PartialEq, Clone)]
pub enum AmpError {
    #[error(transparent)]
    Padic(#[from] PadicError),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error("series diverges in region(s) {}", region_list(.0))]
    Divergent(Vec<Region>),
    #[error("pole (zero denominator) in region {0}")]
    Pole(Region),
    #[error("window contains no valuations (or no mass)")]
    EmptyWindow,
    #[error("digit depth must be at least 2")]
    BadDepth,
    #[error("need at least 2 samples")]
    TooFewSamples,
    #[error("invalid momenta: {0}")]
    BadKinematics(String),
    #[error("cell histogram supports n = 4 or 5, got {0}")]
    BadHistogramSize(usize),
}

/// The four pieces of ℚ_p relative to the punctures 0, 1, ∞.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    /// |x| < 1, where |1−x| = 1.
    InsideZero,
    /// |1−x| < 1, where |x| = 1.
    InsideOne,
    /// |x| = |1−x| = 1.
    Units,
    /// |x| > 1, where |1−x| = |x|.
    Outside,
}

impl std::fmt::Display for Region {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Region::InsideZero => "inside_zero",
            Region::InsideOne => "inside_one",
            Region::Units => "units",
            Region::Outside => "outside",
        })
    }
}

fn region_list(rs: &[Region]) -> String {
    let names: Vec<String> = rs.iter().map(Region::to_string).collect();
    names.join(", ")
}

/// One region's contribution to the four-point amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionValue {
    pub region: Region,
    /// The exponent governing the region's geometric series: a, b, or a+b
    /// (0 for the units region, whose value is just its mass).
    pub exponent: f64,
    pub value: f64,
    pub convergent: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Error out unless every region's series converges.
    StrictConvergent,
    /// Evaluate the rational functions wherever they have no pole.
    AnalyticContinuation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Veneziano4 {
    pub total: f64,
    pub regions: [RegionValue; 4],
}

fn check_prime(p: u64) -> Result<(), AmpError> {
    FieldParams::new(p, 1)?;
    Ok(())
}

/// Closed form A = U(p) + G(p,a) + G(p,b) + H(p,a+b) of
/// ∫_{ℚ_p} |x|^a |1−x|^b dx, with the per-region breakdown.
///
/// G(p,s) = (1−1/p)·p^{−(1+s)} / (1−p^{−(1+s)}) sums the shells |x| = p^{−k}
/// (k ≥ 1); H(p,t) = (1−1/p)·p^{t+1} / (1−p^{t+1}) sums |x| = p^{m} (m ≥ 1);
/// U(p) = 1−2/p is the Haar mass of the units region.
pub fn veneziano4(p: u64, a: f64, b: f64, mode: Mode) -> Result<Veneziano4, AmpError> {
    check_prime(p)?;
    let pf = p as f64;
    let geometric = |region: Region, exponent: f64, ratio: f64| -> Result<RegionValue, AmpError> {
        let denom = 1.0 - ratio;
        if denom == 0.0 {
            return Err(AmpError::Pole(region));
        }
        Ok(RegionValue {
            region,
            exponent,
            value: (1.0 - 1.0 / pf) * ratio / denom,
            convergent: ratio < 1.0,
        })
    };
    let inside_zero = geometric(Region::InsideZero, a, pf.powf(-(1.0 + a)))?;
    let inside_one = geometric(Region::InsideOne, b, pf.powf(-(1.0 + b)))?;
    let units = RegionValue {
        region: Region::Units,
        exponent: 0.0,
        value: 1.0 - 2.0 / pf,
        convergent: true,
    };
    let outside = geometric(Region::Outside, a + b, pf.powf(a + b + 1.0))?;
    let regions = [inside_zero, inside_one, units, outside];
    if mode == Mode::StrictConvergent {
        let bad: Vec<Region> = regions
            .iter()
            .filter(|r| !r.convergent)
            .map(|r| r.region)
            .collect();
        if !bad.is_empty() {
            return Err(AmpError::Divergent(bad));
        }
    }
    Ok(Veneziano4 {
        total: regions.iter().map(|r| r.value).sum(),
        regions,
    })
}

/// Exact-rational four-point amplitude at integer exponents
/// (analytic continuation; errors at poles).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactVeneziano4 {
    pub inside_zero: BigRational,
    pub inside_one: BigRational,
    pub units: BigRational,
    pub outside: BigRational,
}

impl ExactVeneziano4 {
    pub fn total(&self) -> BigRational {
        &self.inside_zero + &self.inside_one + &self.units + &self.outside
    }
}

fn rational_pow(p: u64, k: i64) -> BigRational {
    let base = BigInt::from(p);
    if k >= 0 {
        BigRational::from_integer(base.pow(k as u32))
    } else {
        BigRational::new(BigInt::one(), base.pow((-k) as u32))
    }
}

pub fn veneziano4_exact(p: u64, a: i64, b: i64) -> Result<ExactVeneziano4, AmpError> {
    check_prime(p)?;
    let one = BigRational::one();
    let unit_factor = &one - rational_pow(p, -1);
    let geometric = |region: Region, ratio: BigRational| -> Result<BigRational, AmpError> {
        let denom = &one - &ratio;
        if denom.is_zero() {
            return Err(AmpError::Pole(region));
        }
        Ok(&unit_factor * ratio / denom)
    };
    Ok(ExactVeneziano4 {
        inside_zero: geometric(Region::InsideZero, rational_pow(p, -(1 + a)))?,
        inside_one: geometric(Region::InsideOne, rational_pow(p, -(1 + b)))?,
        units: &one - rational_pow(p, -1) * BigRational::from_integer(BigInt::from(2)),
        outside: geometric(Region::Outside, rational_pow(p, a + b + 1))?,
    })
}

/// Haar mass of ℙ¹(ℚ_p): the affine part ∫_{ℤ_p} dx = 1 plus the chart at
/// infinity, whose shells |x| = p^m carry mass p^{1−m}(1−1/p) under the
/// substituted measure p·dx/|x|². The geometric series (ratio 1/p, first
/// term 1−1/p) sums to exactly 1, so the total is exactly 2.
pub fn p1_total_mass(p: u64) -> Result<BigRational, AmpError> {
    check_prime(p)?;
    let one = BigRational::one();
    let first = &one - rational_pow(p, -1); // m = 1 shell
    let ratio = rational_pow(p, -1);
    let infinity_part = &first / (&one - &ratio);
    Ok(&one + infinity_part)
}

/// Partial sum of the same series, truncated after `depth` shells of the
/// chart at infinity. Strictly increasing in `depth` and strictly below 2.
pub fn p1_total_mass_partial(p: u64, depth: u32) -> Result<BigRational, AmpError> {
    check_prime(p)?;
    let one = BigRational::one();
    let unit_factor = &one - rational_pow(p, -1);
    let mut total = one;
    for m in 1..=depth {
        total += &unit_factor * rational_pow(p, 1 - m as i64);
    }
    Ok(total)
}

/// A valuation window: samples are restricted to val(x) ∈ [v_min, v_max]
/// (`units_only` further restricts to |x| = |1−x| = 1). Windows make the
/// improper Haar integral finite and are reported back with MC results.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    v_min: i64,
    v_max: i64,
    units_only: bool,
}

impl Window {
    pub fn new(v_min: i64, v_max: i64) -> Result<Window, AmpError> {
        if v_min > v_max {
            return Err(AmpError::EmptyWindow);
        }
        Ok(Window {
            v_min,
            v_max,
            units_only: false,
        })
    }

    /// The units region only: |x| = |1−x| = 1.
    pub fn units() -> Window {
        Window {
            v_min: 0,
            v_max: 0,
            units_only: true,
        }
    }

    pub fn v_min(&self) -> i64 {
        self.v_min
    }

    pub fn v_max(&self) -> i64 {
        self.v_max
    }

    pub fn units_only(&self) -> bool {
        self.units_only
    }

    fn contains(&self, v: i64) -> bool {
        self.v_min <= v && v <= self.v_max
    }

    /// Haar mass of the window.
    fn haar_mass(&self, pf: f64) -> f64 {
        if self.units_only {
            return 1.0 - 2.0 / pf;
        }
        let unit = 1.0 - 1.0 / pf;
        (self.v_min..=self.v_max).map(|k| unit * pf.powi(-k as i32)).sum()
    }
}

/// A sampled p-adic number in digit form: x = p^v · Σ_t digits[t]·p^t with
/// digits[0] ≠ 0. All valuation comparisons are exact digit arithmetic.
#[derive(Debug, Clone)]
struct PadicDraw {
    v: i64,
    digits: Vec<u32>,
}

impl PadicDraw {
    fn to_rational(&self, p: u64) -> BigRational {
        let mut mantissa = BigInt::zero();
        let base = BigInt::from(p);
        for &d in self.digits.iter().rev() {
            mantissa = mantissa * &base + BigInt::from(d);
        }
        BigRational::from_integer(mantissa) * rational_pow(p, self.v)
    }

    /// val(1 − x); `None` when x == 1 exactly at this digit depth.
    fn val_one_minus(&self) -> Option<i64> {
        if self.v >= 1 {
            return Some(0);
        }
        if self.v <= -1 {
            return Some(self.v);
        }
        if self.digits[0] != 1 {
            return Some(0);
        }
        for (t, &d) in self.digits.iter().enumerate().skip(1) {
            if d != 0 {
                return Some(t as i64);
            }
        }
        None
    }

    /// val(x − y); `None` when the draws are identical.
    fn val_diff(&self, other: &PadicDraw) -> Option<i64> {
        if self.v != other.v {
            return Some(self.v.min(other.v));
        }
        for (t, (&d, &e)) in self.digits.iter().zip(&other.digits).enumerate() {
            if d != e {
                return Some(self.v + t as i64);
            }
        }
        None
    }
}

fn draw_digits(rng: &mut ChaCha8Rng, p: u64, len: usize, first_min: u32) -> Vec<u32> {
    let mut digits = Vec::with_capacity(len);
    digits.push(rng.gen_range(first_min..p as u32));
    for _ in 1..len {
        digits.push(rng.gen_range(0..p as u32));
    }
    digits
}

/// Windowed Haar draw: valuation k with probability ∝ p^{−k}(1−1/p) inside
/// the window, digits uniform.
fn haar_draw(rng: &mut ChaCha8Rng, p: u64, window: &Window, depth: usize) -> PadicDraw {
    if window.units_only {
        return PadicDraw {
            v: 0,
            digits: draw_digits(rng, p, depth, 2),
        };
    }
    let pf = p as f64;
    // Inverse-CDF over the (finite) window; weights p^{−k}.
    let total: f64 = (window.v_min..=window.v_max).map(|k| pf.powi(-k as i32)).sum();
    let mut u = rng.gen::<f64>() * total;
    let mut v = window.v_max;
    for k in window.v_min..=window.v_max {
        u -= pf.powi(-k as i32);
        if u <= 0.0 {
            v = k;
            break;
        }
    }
    PadicDraw {
        v,
        digits: draw_digits(rng, p, depth, 1),
    }
}

/// One deterministic sample of the windowed Haar measure, as a rational.
pub fn haar_sample(
    p: u64,
    window: &Window,
    digit_depth: usize,
    seed: u64,
) -> Result<BigRational, AmpError> {
    check_prime(p)?;
    if digit_depth < 2 {
        return Err(AmpError::BadDepth);
    }
    if window.units_only && p == 2 {
        return Err(AmpError::EmptyWindow); // no x with |x| = |1−x| = 1
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(haar_draw(&mut rng, p, window, digit_depth).to_rational(p))
}

/// Real on-shell momenta: Σ k_i = 0 and k_i² = 2, each within 1e−9.
#[derive(Debug, Clone, PartialEq)]
pub struct Kinematics {
    momenta: Vec<Vec<f64>>,
}

pub const MOMENTUM_DIM: usize = 26;

const ONSHELL_TOL: f64 = 1e-9;

impl Kinematics {
    pub fn new(momenta: Vec<Vec<f64>>) -> Result<Kinematics, AmpError> {
        let n = momenta.len();
        if n < 4 {
            return Err(AmpError::BadKinematics(format!(
                "need at least 4 momenta, got {}",
                n
            )));
        }
        let dim = momenta[0].len();
        if dim == 0 || momenta.iter().any(|k| k.len() != dim) {
            return Err(AmpError::BadKinematics(
                "momenta must share a positive dimension".into(),
            ));
        }
        for c in 0..dim {
            let s: f64 = momenta.iter().map(|k| k[c]).sum();
            if s.abs() > ONSHELL_TOL {
                return Err(AmpError::BadKinematics(format!(
                    "momentum conservation violated in coordinate {}: sum = {:e}",
                    c, s
                )));
            }
        }
        for (i, k) in momenta.iter().enumerate() {
            let sq: f64 = k.iter().map(|x| x * x).sum();
            if (sq - 2.0).abs() > ONSHELL_TOL {
                return Err(AmpError::BadKinematics(format!(
                    "k_{}² = {} instead of 2",
                    i + 1,
                    sq
                )));
            }
        }
        Ok(Kinematics { momenta })
    }

    /// Four on-shell momenta with k₁·k₂ = a and k₂·k₃ = b, so the
    /// four-point integrand is |x|^a·|1−x|^b. Built from the character
    /// basis of the Klein four-group acting on the four punctures; the
    /// Gram matrix is realizable iff a ≥ −2, b ≥ −2 and a + b ≤ 0.
    pub fn four_point_exponents(a: f64, b: f64) -> Result<Kinematics, AmpError> {
        let eigs = [4.0 + 2.0 * a, -2.0 * (a + b), 4.0 + 2.0 * b];
        if eigs.iter().any(|&l| l < 0.0) {
            return Err(AmpError::BadKinematics(format!(
                "exponents a = {}, b = {} are not realizable by real momenta",
                a, b
            )));
        }
        let chars: [[f64; 4]; 3] = [
            [1.0, 1.0, -1.0, -1.0],
            [1.0, -1.0, 1.0, -1.0],
            [1.0, -1.0, -1.0, 1.0],
        ];
        let momenta = (0..4)
            .map(|i| {
                let mut k = vec![0.0; MOMENTUM_DIM];
                for (r, chi) in chars.iter().enumerate() {
                    k[r] = eigs[r].sqrt() / 2.0 * chi[i];
                }
                k
            })
            .collect();
        Kinematics::new(momenta)
    }

    /// n on-shell momenta along the vertices of a regular simplex:
    /// k_i·k_j = −2/(n−1) for every pair.
    pub fn simplex(n: usize) -> Result<Kinematics, AmpError> {
        if n < 4 || n > MOMENTUM_DIM {
            return Err(AmpError::BadKinematics(format!(
                "simplex kinematics need 4 ≤ n ≤ {}, got {}",
                MOMENTUM_DIM, n
            )));
        }
        let nf = n as f64;
        let scale = (2.0 / (1.0 - 1.0 / nf)).sqrt();
        let momenta = (0..n)
            .map(|i| {
                let mut k = vec![0.0; MOMENTUM_DIM];
                for (c, kc) in k.iter_mut().enumerate().take(n) {
                    let e = if c == i { 1.0 } else { 0.0 };
                    *kc = scale * (e - 1.0 / nf);
                }
                k
            })
            .collect();
        Kinematics::new(momenta)
    }

    pub fn n(&self) -> usize {
        self.momenta.len()
    }

    pub fn dim(&self) -> usize {
        self.momenta[0].len()
    }

    pub fn momenta(&self) -> &[Vec<f64>] {
        &self.momenta
    }

    /// k_{i+1}·k_{j+1} (zero-based indices).
    pub fn dot(&self, i: usize, j: usize) -> f64 {
        self.momenta[i]
            .iter()
            .zip(&self.momenta[j])
            .map(|(x, y)| x * y)
            .sum()
    }
}

/// Fixed-tree pairwise summation; the reduction order depends only on the
/// slice length, never on evaluation order.
pub(crate) fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 32 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McResult {
    pub estimate: f64,
    pub stderr: f64,
    /// Set when some region series of the integrand diverges, so the
    /// windowed estimate does not approximate a convergent integral.
    pub warning: bool,
    pub window: Window,
    pub samples: u64,
}

/// Per-coordinate matched proposal: regions weighted by the windowed mass
/// of |x|^a|1−x|^b, valuations geometric within each region.
struct CoordProposal {
    /// (valuation of x, first-digit minimum, digits of 1−x fixed prefix)
    /// encoded as sampling instructions per region.
    region_weights: [f64; 4],
    /// cumulative valuation weights per region (inside-zero, inside-one, outside)
    in0: Vec<(i64, f64)>,
    in1: Vec<(i64, f64)>,
    out: Vec<(i64, f64)>,
    z: f64,
}

fn geometric_weights(range: impl Iterator<Item = i64>, term: impl Fn(i64) -> f64) -> Vec<(i64, f64)> {
    range.map(|k| (k, term(k))).collect()
}

fn build_proposal(pf: f64, a: f64, b: f64, window: &Window, depth: usize) -> CoordProposal {
    let unit = 1.0 - 1.0 / pf;
    if window.units_only {
        let w = 1.0 - 2.0 / pf;
        return CoordProposal {
            region_weights: [0.0, 0.0, w, 0.0],
            in0: vec![],
            in1: vec![],
            out: vec![],
            z: w,
        };
    }
    let in0 = if window.v_max >= 1 {
        geometric_weights(window.v_min.max(1)..=window.v_max, |k| {
            unit * pf.powf(-(k as f64) * (1.0 + a))
        })
    } else {
        vec![]
    };
    // val(1−x) = k with val(x) = 0; the digit depth caps the reachable k.
    let in1 = if window.contains(0) {
        geometric_weights(1..=(depth as i64 - 1), |k| {
            unit * pf.powf(-(k as f64) * (1.0 + b))
        })
    } else {
        vec![]
    };
    let units = if window.contains(0) { 1.0 - 2.0 / pf } else { 0.0 };
    let out = if window.v_min <= -1 {
        geometric_weights(1..=(-window.v_min), |m| {
            unit * pf.powf((m as f64) * (a + b + 1.0))
        })
    } else {
        vec![]
    };
    let w0: f64 = in0.iter().map(|t| t.1).sum();
    let w1: f64 = in1.iter().map(|t| t.1).sum();
    let w3: f64 = out.iter().map(|t| t.1).sum();
    CoordProposal {
        region_weights: [w0, w1, units, w3],
        in0,
        in1,
        out,
        z: w0 + w1 + units + w3,
    }
}

fn pick_weighted(rng: &mut ChaCha8Rng, items: &[(i64, f64)], total: f64) -> i64 {
    let mut u = rng.gen::<f64>() * total;
    for &(k, w) in items {
        u -= w;
        if u <= 0.0 {
            return k;
        }
    }
    items.last().expect("weighted pick from empty list").0
}

fn matched_draw(
    rng: &mut ChaCha8Rng,
    p: u64,
    prop: &CoordProposal,
    depth: usize,
) -> PadicDraw {
    let mut u = rng.gen::<f64>() * prop.z;
    let mut region = 3;
    for (r, &w) in prop.region_weights.iter().enumerate() {
        u -= w;
        if u <= 0.0 {
            region = r;
            break;
        }
    }
    match region {
        0 => {
            let k = pick_weighted(rng, &prop.in0, prop.region_weights[0]);
            PadicDraw {
                v: k,
                digits: draw_digits(rng, p, depth, 1),
            }
        }
        1 => {
            // x = 1 + p^k·u: digits are 1, k−1 zeros, then a unit tail.
            let k = pick_weighted(rng, &prop.in1, prop.region_weights[1]) as usize;
            let mut digits = vec![0u32; k];
            digits[0] = 1;
            digits.extend(draw_digits(rng, p, depth - k, 1));
            PadicDraw { v: 0, digits }
        }
        2 => PadicDraw {
            v: 0,
            digits: draw_digits(rng, p, depth, 2),
        },
        _ => {
            let m = pick_weighted(rng, &prop.out, prop.region_weights[3]);
            PadicDraw {
                v: -m,
                digits: draw_digits(rng, p, depth, 1),
            }
        }
    }
}

const MC_DIGIT_DEPTH: usize = 96;

/// Monte-Carlo estimate of the n-point tachyon amplitude over the chart
/// with punctures 0, 1, ∞ fixed: the integral over (x₂, …, x_{n−2}) of
/// ∏_i |x_i|^{k₁·k_i} |1−x_i|^{k_{n−1}·k_i} ∏_{i<j} |x_i−x_j|^{k_i·k_j},
/// restricted to the valuation window (reported in the result).
pub fn amplitude_n_mc(
    p: u64,
    kin: &Kinematics,
    samples: u64,
    seed: u64,
    window: &Window,
) -> Result<McResult, AmpError> {
    check_prime(p)?;
    if samples < 2 {
        return Err(AmpError::TooFewSamples);
    }
    if window.units_only && p == 2 {
        return Err(AmpError::EmptyWindow);
    }
    let n = kin.n();
    let m = n - 3; // integration variables x₂ … x_{n−2}
    let pf = p as f64;
    // Integrand exponents |x_i|^{k₁·k_{i+1}} |1−x_i|^{k_{n−1}·k_{i+1}}
    // ∏|x_i−x_j|^{k·k}: puncture 0 pairs with k₁, puncture 1 with
    // k_{n−1}; zero-based momentum indices.
    let a: Vec<f64> = (0..m).map(|i| kin.dot(0, i + 1)).collect();
    let b: Vec<f64> = (0..m).map(|i| kin.dot(n - 2, i + 1)).collect();
    let mut c = vec![vec![0.0; m]; m];
    for i in 0..m {
        for j in 0..m {
            if i != j {
                c[i][j] = kin.dot(i + 1, j + 1);
            }
        }
    }

    // Warn when the unwindowed integral diverges: some coordinate's
    // inside/outside series blows up, or a pairwise collision is
    // non-integrable. Units-only windows exclude the coordinate regions
    // by construction, so only the pairwise exponents matter there.
    let mut warning = false;
    for i in 0..m {
        let cross_sum: f64 = c[i].iter().sum();
        if !window.units_only
            && (1.0 + a[i] <= 0.0 || 1.0 + b[i] <= 0.0 || a[i] + b[i] + cross_sum + 1.0 >= 0.0)
        {
            warning = true;
        }
        for j in (i + 1)..m {
            if 1.0 + c[i][j] <= 0.0 {
                warning = true;
            }
        }
    }

    let depth = MC_DIGIT_DEPTH;
    let proposals: Vec<CoordProposal> = (0..m)
        .map(|i| build_proposal(pf, a[i], b[i], window, depth))
        .collect();
    if proposals.iter().any(|pr| pr.z <= 0.0) {
        return Err(AmpError::EmptyWindow);
    }
    let zh = window.haar_mass(pf);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut weights = vec![0.0f64; samples as usize];
    let mut squares = vec![0.0f64; samples as usize];
    let mut draws: Vec<PadicDraw> = Vec::with_capacity(m);
    for s in 0..samples as usize {
        draws.clear();
        let mut w = 1.0f64;
        for (i, prop) in proposals.iter().enumerate() {
            let x = if rng.gen_bool(0.5) {
                matched_draw(&mut rng, p, prop, depth)
            } else {
                haar_draw(&mut rng, p, window, depth)
            };
            match x.val_one_minus() {
                Some(k1) => {
                    // g = |x|^a·|1−x|^b; density vs Haar is the defensive
                    // mixture ½·g/z + ½·1/Z_H, so the weight g/density is
                    // bounded by 2z wherever the matched proposal covers.
                    let g = pf.powf(-((x.v as f64) * a[i] + (k1 as f64) * b[i]));
                    let density = 0.5 * g / prop.z + 0.5 / zh;
                    w *= g / density;
                }
                None => {
                    w = 0.0; // x == 1 at sampling depth: null set, no mass
                }
            }
            draws.push(x);
        }
        if w != 0.0 {
            'outer: for i in 0..m {
                for j in (i + 1)..m {
                    match draws[i].val_diff(&draws[j]) {
                        Some(v) => {
                            w *= pf.powf(-(v as f64) * c[i][j]);
                        }
                        None => {
                            w = 0.0;
                            break 'outer;
                        }
                    }
                }
            }
        }
        weights[s] = w;
        squares[s] = w * w;
    }

    let nf = samples as f64;
    let mean = pairwise_sum(&weights) / nf;
    let var = (pairwise_sum(&squares) / nf - mean * mean).max(0.0) * nf / (nf - 1.0);
    Ok(McResult {
        estimate: mean,
        stderr: (var / nf).sqrt(),
        warning,
        window: *window,
        samples,
    })
}

/// Classify Haar samples of (x₂, …, x_{n−2}) ∈ ℤ_p^{n−3} by the
/// combinatorial type of the dendrogram of {0, 1, ∞, x₂, …}; ends are
/// labeled in that order. Returns frequencies summing to 1.
pub fn cell_histogram(
    p: u64,
    n: usize,
    samples: u64,
    seed: u64,
) -> Result<BTreeMap<CombType, f64>, AmpError> {
    if n != 4 && n != 5 {
        return Err(AmpError::BadHistogramSize(n));
    }
    let params = FieldParams::new(p, 1)?;
    let window = Window::new(0, 40).expect("static window");
    let depth = 48;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts: BTreeMap<CombType, u64> = BTreeMap::new();
    let mut points = Vec::with_capacity(n);
    for _ in 0..samples {
        points.clear();
        points.push(ProjPoint1::from_affine(BigRational::zero()));
        points.push(ProjPoint1::from_affine(BigRational::one()));
        points.push(ProjPoint1::infinity());
        for _ in 0..(n - 3) {
            let x = haar_draw(&mut rng, p, &window, depth).to_rational(p);
            points.push(ProjPoint1::from_affine(x));
        }
        // Coincidences (x ∈ {0, 1} or equal coordinates) are measure-zero
        // and unreachable at this digit depth, but resample defensively.
        let t = match comb_type_of(&points, &params) {
            Ok(t) => t,
            Err(TreeError::PointsNotDistinct) => continue,
            Err(e) => return Err(e.into()),
        };
        *counts.entry(t).or_insert(0) += 1;
    }
    let total: u64 = counts.values().sum();
    Ok(counts
        .into_iter()
        .map(|(t, c)| (t, c as f64 / total as f64))
        .collect())
}
