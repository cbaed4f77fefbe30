//! Top-level acceptance suite: one test per headline guarantee, each
//! ending in a single printed PASS line with its elapsed time. Every
//! comparison here is either exact (rational arithmetic, integer
//! counts) or statistical with an explicit 3-standard-error budget and
//! fixed seeds.

use std::time::Instant;

use num::{BigInt, BigRational, One};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mumford::amplitude::{
    amplitude_n_mc, cell_histogram, haar_sample, p1_total_mass, veneziano4, veneziano4_exact,
    Kinematics, Mode, Window,
};
use mumford::btree::{build_dendrogram, enumerate_comb_types, CombType};
use mumford::clmeasure::{
    cl_chain_measure, integrate_cells, moduli_cell_measure, weak_convergence_error,
};
use mumford::counting::{
    count_lattice_paths, default_config_pool, kontsevich_n, mumford_count, MumfordOutcome,
};
use mumford::padic::{val, ExtVal, ProjPoint1, ProjPoint2};
use mumford::tropical::{mat3_zero, LineConfig};
use mumford::FieldParams;

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn pass(label: &str, t0: Instant) {
    println!("ACCEPTANCE PASS  {}  ({:.2}s)", label, t0.elapsed().as_secs_f64());
}

/// 1. The projective line over ℚ_p carries total mass exactly 2, in
///    exact rational arithmetic, for the first five primes.
#[test]
fn acceptance_1_projective_line_mass_is_exactly_two() {
    let t0 = Instant::now();
    for p in [2u64, 3, 5, 7, 11] {
        let mass = p1_total_mass(p).unwrap();
        assert_eq!(mass, rat(2, 1), "total mass over ℙ¹(ℚ_{}) must be 2", p);
    }
    assert!(t0.elapsed().as_secs_f64() < 1.0, "budget: under one second");
    pass("projective-line mass = 2 exactly for p ∈ {2,3,5,7,11}", t0);
}

/// 2. Plane curve counts from the lattice-path engine hit the reference
///    integers, and the recursion engine agrees through degree 4.
#[test]
fn acceptance_2_curve_counts_match_reference_integers() {
    let t0 = Instant::now();
    let expected: [(u32, u32, i64); 5] =
        [(1, 0, 1), (2, 0, 1), (3, 0, 12), (4, 0, 620), (3, 1, 1)];
    for (d, g, n) in expected {
        assert_eq!(
            count_lattice_paths(d, g).unwrap(),
            BigInt::from(n),
            "lattice count for degree {} genus {}",
            d,
            g
        );
    }
    for d in 1..=4u32 {
        assert_eq!(
            kontsevich_n(d).unwrap(),
            count_lattice_paths(d, 0).unwrap(),
            "engines disagree at degree {}",
            d
        );
    }
    assert!(t0.elapsed().as_secs_f64() < 60.0, "budget: under a minute");
    pass("curve counts 1, 1, 12, 620 (+ genus-1 cubic = 1), engines agree", t0);
}

/// 3. The 4-marked moduli complex has 4 cell types, 3 of them maximal,
///    and for 3 ≤ n ≤ 8 the maximal-cell count equals the double
///    factorial (2n−5)!!.
#[test]
fn acceptance_3_moduli_cells_count_binary_types() {
    let t0 = Instant::now();
    let four = enumerate_comb_types(4).unwrap();
    assert_eq!(four.len(), 4);
    assert_eq!(four.iter().filter(|t| t.is_binary()).count(), 3);
    for n in 3..=8usize {
        let mut expect = BigInt::one();
        let mut k = 1usize;
        while 2 * n >= 5 && k <= 2 * n - 5 {
            expect *= k;
            k += 2;
        }
        let types = enumerate_comb_types(n).unwrap();
        let maximal = types.iter().filter(|t| t.is_binary()).count();
        assert_eq!(BigInt::from(maximal), expect, "maximal cells at n = {}", n);
    }
    assert!(t0.elapsed().as_secs_f64() < 30.0, "budget: under 30 seconds");
    pass("moduli cells: 4 types at n=4, maximal cells = (2n−5)!! up to n=8", t0);
}

/// 4. Integrating any function supported on non-binary cells returns
///    exactly 0.0 — the limit measure charges only top-dimensional cells.
#[test]
fn acceptance_4_nonbinary_support_integrates_to_exact_zero() {
    let t0 = Instant::now();
    for n in [4usize, 5, 6] {
        for lambda in [1.0f64, 2.5] {
            let measure = moduli_cell_measure(n, lambda).unwrap();
            let value = integrate_cells(
                &measure,
                |t, lengths| {
                    if t.is_binary() {
                        0.0
                    } else {
                        3.7 + lengths.iter().sum::<f64>().exp()
                    }
                },
                3,
            )
            .unwrap();
            assert_eq!(value, 0.0, "non-binary support must integrate to zero bit-for-bit");
        }
    }
    assert!(t0.elapsed().as_secs_f64() < 1.0, "budget: under one second");
    pass("functions supported off the binary cells integrate to exactly 0", t0);
}

/// 5. The one-edge chain measure is (½, ½) exactly, and the distance to
///    the uniform law shrinks at the 1/(2N) rate along doublings.
#[test]
fn acceptance_5_chain_measures_converge_at_half_inverse_n() {
    let t0 = Instant::now();
    let one_edge = cl_chain_measure(1).unwrap();
    assert_eq!(
        one_edge.atoms,
        vec![(rat(0, 1), rat(1, 2)), (rat(1, 1), rat(1, 2))]
    );
    let mut n = 1usize;
    while n <= 256 {
        let err = weak_convergence_error(n).unwrap();
        let bound = BigRational::new(BigInt::one(), BigInt::from(2 * n));
        assert!(err <= bound, "error at N = {} exceeds 1/(2N)", n);
        n *= 2;
    }
    assert!(t0.elapsed().as_secs_f64() < 5.0, "budget: under five seconds");
    pass("chain measure = (1/2, 1/2) at N=1; error ≤ 1/(2N) through N=256", t0);
}

/// 6. Monte-Carlo four-point amplitudes agree with the closed form
///    within three standard errors for seeded random convergent
///    exponent pairs, and the units-region mass is 1 − 2/p exactly.
#[test]
fn acceptance_6_monte_carlo_matches_closed_form() {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xA51CE);
    let mut pairs = Vec::new();
    while pairs.len() < 5 {
        let a = -(0.55 + 0.30 * rng.gen::<f64>());
        let b = -(0.55 + 0.30 * rng.gen::<f64>());
        if a + b <= -1.15 {
            pairs.push((a, b));
        }
    }
    // Truncating the valuation window at ±120 leaves a geometric tail
    // below p^{-18} with these margins — orders of magnitude under the
    // Monte-Carlo noise floor.
    let window = Window::new(-120, 120).unwrap();
    for &(a, b) in &pairs {
        let kin = Kinematics::four_point_exponents(a, b).unwrap();
        for p in [3u64, 5] {
            let closed = veneziano4(p, a, b, Mode::StrictConvergent).unwrap();
            let seed = rng.gen::<u64>();
            let mc = amplitude_n_mc(p, &kin, 1_000_000, seed, &window).unwrap();
            assert!(!mc.warning, "integrand must converge at ({}, {})", a, b);
            let diff = (mc.estimate - closed.total).abs();
            assert!(
                diff <= 3.0 * mc.stderr,
                "p = {}, (a, b) = ({:.4}, {:.4}): |{} − {}| = {} > 3·{}",
                p,
                a,
                b,
                mc.estimate,
                closed.total,
                diff,
                mc.stderr
            );
        }
    }
    for p in [3u64, 5] {
        let exact = veneziano4_exact(p, 0, 0).unwrap();
        assert_eq!(
            exact.units,
            rat(p as i64 - 2, p as i64),
            "units-region mass at p = {}",
            p
        );
    }
    assert!(t0.elapsed().as_secs_f64() < 120.0, "budget: under two minutes");
    pass("MC amplitude within 3σ of closed form (5 pairs × p ∈ {3,5}); units mass exact", t0);
}

/// Independent 4-point type oracle: over an ultrametric field the three
/// pairings (01|23), (02|13), (03|12) have valuation sums whose minimum
/// is attained twice; the tree is the star when all three sums agree
/// and otherwise splits along the pairing with the strictly largest sum.
fn four_point_type_from_valuations(xs: &[BigRational; 4], params: &FieldParams) -> CombType {
    let v = |i: usize, j: usize| -> ExtVal { val(&(&xs[i] - &xs[j]), params) };
    let sum = |(i, j): (usize, usize), (k, l): (usize, usize)| -> ExtVal {
        match (v(i, j), v(k, l)) {
            (ExtVal::Finite(a), ExtVal::Finite(b)) => ExtVal::Finite(a + b),
            _ => ExtVal::Infinity,
        }
    };
    let pairings = [
        ((0usize, 1usize), (2usize, 3usize)),
        ((0, 2), (1, 3)),
        ((0, 3), (1, 2)),
    ];
    let sums = [
        sum(pairings[0].0, pairings[0].1),
        sum(pairings[1].0, pairings[1].1),
        sum(pairings[2].0, pairings[2].1),
    ];
    if sums[0] == sums[1] && sums[1] == sums[2] {
        return CombType::star(4);
    }
    let mut best = 0usize;
    for i in 1..3 {
        if sums[i] > sums[best] {
            best = i;
        }
    }
    let ((i, j), _) = pairings[best];
    CombType::from_splits(4, &[&[i, j]]).unwrap()
}

/// 7. Dendrogram types match the pairwise-valuation oracle on 200 seeded
///    random 4-point configurations over ℚ₅, and the sampled frequency
///    of the star type is within 3σ of its exact probability 1 − 2/p.
#[test]
fn acceptance_7_dendrogram_types_match_valuation_oracle() {
    let t0 = Instant::now();
    let p = 5u64;
    let params = FieldParams::new(p, 1).unwrap();
    let window = Window::new(-8, 8).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0xD4D);
    let mut checked = 0usize;
    let mut star_seen = false;
    let mut split_seen = false;
    while checked < 200 {
        let xs: [BigRational; 4] = std::array::from_fn(|_| {
            haar_sample(p, &window, 20, rng.gen::<u64>()).unwrap()
        });
        if (0..4).any(|i| (i + 1..4).any(|j| xs[i] == xs[j])) {
            continue;
        }
        let points: Vec<ProjPoint1> = xs
            .iter()
            .map(|x| ProjPoint1::from_affine(x.clone()))
            .collect();
        let tree = build_dendrogram(&points, &params).unwrap();
        let expected = four_point_type_from_valuations(&xs, &params);
        assert_eq!(tree.comb_type(), expected, "config #{}: {:?}", checked, xs);
        star_seen |= expected == CombType::star(4);
        split_seen |= expected != CombType::star(4);
        checked += 1;
    }
    assert!(star_seen && split_seen, "oracle must be exercised on both shapes");

    let samples = 50_000u64;
    let hist = cell_histogram(p, 4, samples, 0xCAFE).unwrap();
    let star_freq = *hist.get(&CombType::star(4)).unwrap_or(&0.0);
    let q = 1.0 - 2.0 / p as f64;
    let sigma = (q * (1.0 - q) / samples as f64).sqrt();
    assert!(
        (star_freq - q).abs() <= 3.0 * sigma,
        "star frequency {} vs {} ± 3·{}",
        star_freq,
        q,
        sigma
    );
    pass("200 dendrogram types match the valuation oracle; star frequency within 3σ", t0);
}

/// 8. The certification pipeline returns the reference count on seeded
///    generic configurations for lines and conics, and abstains (never
///    mis-counts) on a constructed degenerate configuration.
#[test]
fn acceptance_8_certified_counts_and_honest_abstention() {
    let t0 = Instant::now();
    let p = 5i64;
    let params = FieldParams::new(p as u64, 1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0xB0B);
    let units = [1i64, 2, 3, 4, 6, 7, 8, 9, 11, 12, 13, 14];
    let unit = |rng: &mut ChaCha8Rng| rat(units[rng.gen_range(0..units.len())], 1);
    let five_pow = |k: i32| -> BigRational {
        let base = BigInt::from(p);
        if k >= 0 {
            BigRational::from_integer(base.pow(k as u32))
        } else {
            BigRational::new(BigInt::one(), base.pow((-k) as u32))
        }
    };
    // Valuation skeletons in tropical general position; the unit
    // cofactors vary per seed without moving the tropicalized points.
    let line_skeleton: [(i32, i32); 2] = [(0, 1), (2, 0)];
    let conic_skeleton: [(i32, i32); 5] = [(2, 6), (7, 2), (-3, 5), (-5, -2), (6, -4)];
    for round in 0..5u32 {
        for (d, skeleton) in [(1u32, &line_skeleton[..]), (2u32, &conic_skeleton[..])] {
            let pts: Vec<ProjPoint2> = skeleton
                .iter()
                .map(|&(vx, vy)| {
                    ProjPoint2::new(
                        rat(1, 1),
                        five_pow(vx) * unit(&mut rng),
                        five_pow(vy) * unit(&mut rng),
                    )
                    .unwrap()
                })
                .collect();
            let pool = default_config_pool(&params, u64::from(round) + 17, 3);
            let out = mumford_count(&pts, d, 0, &pool, &params).unwrap();
            assert_eq!(
                out,
                MumfordOutcome::Certified(count_lattice_paths(d, 0).unwrap()),
                "degree {} round {}",
                d,
                round
            );
        }
    }

    // Two points sharing every coordinate valuation tropicalize to the
    // same spot under both configurations below, so no certificate can
    // exist: the pipeline must abstain rather than guess.
    let degenerate = [
        ProjPoint2::new(rat(1, 1), rat(1, 1), rat(1, 1)).unwrap(),
        ProjPoint2::new(rat(1, 1), rat(1, 1), rat(2, 1)).unwrap(),
    ];
    let mut swap01 = mat3_zero();
    swap01[0][1] = BigRational::one();
    swap01[1][0] = BigRational::one();
    swap01[2][2] = BigRational::one();
    let restricted = [LineConfig::standard(), LineConfig::new(swap01).unwrap()];
    let out = mumford_count(&degenerate, 1, 0, &restricted, &params).unwrap();
    assert_eq!(out, MumfordOutcome::Inconclusive, "degenerate input must abstain");
    assert!(t0.elapsed().as_secs_f64() < 120.0, "budget: under two minutes");
    pass("certified line/conic counts on seeded generic configs; degenerate input abstains", t0);
}
