//! Three cross-validating engines for counting plane curves of degree d
//! and genus g through 3d + g − 1 points:
//!
//! * lattice paths in the dilated triangle dΔ with positive/negative
//!   multiplicities (with an inclusion–exclusion step so reducible
//!   configurations are removed and the counts are the usual
//!   irreducible ones),
//! * the Kontsevich recursion for genus 0,
//! * direct enumeration of tropical curves through explicitly given
//!   points, with an exact certificate of general position.
//!
//! The direct engine powers the Mumford-count certificate: a count is
//! certified only when some line configuration tropicalizes the input
//! into certified general position and the resulting count agrees with
//! the lattice-path value.

use std::collections::{BTreeMap, HashMap};

use num::{BigInt, BigRational, One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::padic::{FieldParams, ProjPoint2};
use crate::tropical::{
    tropicalize, BoundedEdge, LineConfig, PlaneTropicalCurve, Ray, TropError, TropPoint2,
};

#[derive(Debug, Error, PartialEq, Eq, Clone)]
pub enum CountError {
    #[error("degree must be at least 1")]
    BadDegree,
    #[error("genus {g} out of range for degree {d} (maximum (d−1)(d−2)/2)")]
    BadGenus { d: u32, g: u32 },
    #[error("direct enumeration supports d ≤ 3 and g ≤ 1, got d={d}, g={g}")]
    DirectBound { d: u32, g: u32 },
    #[error("expected {expected} points, got {got}")]
    WrongPointCount { expected: usize, got: usize },
    #[error("points must be pairwise distinct")]
    DuplicatePoints,
    #[error("points must have finite coordinates")]
    InfiniteCoordinates,
    #[error("invalid lattice path: {0}")]
    InvalidPath(String),
    #[error(transparent)]
    Tropical(#[from] TropError),
}

// ---------------------------------------------------------------------
// Lattice paths
// ---------------------------------------------------------------------

/// λ-order: lexicographic in (x, −y). Strictly increasing along paths.
fn lambda_lt(a: (i64, i64), b: (i64, i64)) -> bool {
    a.0 < b.0 || (a.0 == b.0 && a.1 > b.1)
}

fn in_triangle(p: (i64, i64), d: i64) -> bool {
    p.0 >= 0 && p.1 >= 0 && p.0 + p.1 <= d
}

fn cross2(a: (i64, i64), b: (i64, i64)) -> i64 {
    a.0 * b.1 - a.1 * b.0
}

/// A λ-increasing lattice path in dΔ from (0,d) to (d,0).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticePath {
    points: Vec<(i64, i64)>,
    d: u32,
}

impl LatticePath {
    pub fn new(points: Vec<(i64, i64)>, d: u32) -> Result<Self, CountError> {
        let dd = d as i64;
        if d < 1 {
            return Err(CountError::BadDegree);
        }
        if points.len() < 2 {
            return Err(CountError::InvalidPath("fewer than two points".into()));
        }
        if points[0] != (0, dd) || *points.last().unwrap() != (dd, 0) {
            return Err(CountError::InvalidPath(
                "path must run from (0,d) to (d,0)".into(),
            ));
        }
        for p in &points {
            if !in_triangle(*p, dd) {
                return Err(CountError::InvalidPath(format!(
                    "point ({}, {}) outside the triangle",
                    p.0, p.1
                )));
            }
        }
        for w in points.windows(2) {
            if !lambda_lt(w[0], w[1]) {
                return Err(CountError::InvalidPath("not λ-increasing".into()));
            }
        }
        Ok(LatticePath { points, d })
    }

    pub fn points(&self) -> &[(i64, i64)] {
        &self.points
    }

    pub fn degree(&self) -> u32 {
        self.d
    }

    /// Number of steps n; the path realizes genus g = n − (3d − 1).
    pub fn steps(&self) -> usize {
        self.points.len() - 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathSide {
    Positive,
    Negative,
}

/// The boundary path of dΔ on the given side, visiting every lattice
/// point: the hypotenuse for Positive, the two legs for Negative.
fn boundary_path(d: i64, side: PathSide) -> Vec<(i64, i64)> {
    match side {
        PathSide::Positive => (0..=d).map(|i| (i, d - i)).collect(),
        PathSide::Negative => {
            let mut p: Vec<(i64, i64)> = (0..=d).map(|y| (0i64, d - y)).collect();
            p.extend((1..=d).map(|x| (x, 0i64)));
            p
        }
    }
}

fn mu(
    path: &[(i64, i64)],
    d: i64,
    side: PathSide,
    memo: &mut HashMap<Vec<(i64, i64)>, BigInt>,
) -> BigInt {
    if let Some(v) = memo.get(path) {
        return v.clone();
    }
    let result = (|| {
        if path == boundary_path(d, side).as_slice() {
            return BigInt::one();
        }
        // Least corner turning toward the side being processed.
        let want_positive = matches!(side, PathSide::Positive);
        for j in 1..path.len() - 1 {
            let u = (path[j].0 - path[j - 1].0, path[j].1 - path[j - 1].1);
            let v = (path[j + 1].0 - path[j].0, path[j + 1].1 - path[j].1);
            let c = cross2(u, v);
            if (want_positive && c > 0) || (!want_positive && c < 0) {
                let area2 = BigInt::from(c.abs());
                let mut deleted: Vec<(i64, i64)> = path.to_vec();
                deleted.remove(j);
                let mut total = area2 * mu(&deleted, d, side, memo);
                let q = (
                    path[j - 1].0 + path[j + 1].0 - path[j].0,
                    path[j - 1].1 + path[j + 1].1 - path[j].1,
                );
                if in_triangle(q, d) && lambda_lt(path[j - 1], q) && lambda_lt(q, path[j + 1]) {
                    let mut reflected: Vec<(i64, i64)> = path.to_vec();
                    reflected[j] = q;
                    total += mu(&reflected, d, side, memo);
                }
                return total;
            }
        }
        BigInt::zero()
    })();
    memo.insert(path.to_vec(), result.clone());
    result
}

/// Mikhalkin multiplicity of a path on one side. The boundary path of the
/// chosen side has multiplicity 1; paths that can never be reduced to it
/// get 0.
pub fn path_multiplicity(path: &LatticePath, side: PathSide) -> BigInt {
    let mut memo = HashMap::new();
    mu(&path.points, path.d as i64, side, &mut memo)
}

fn max_genus(d: u32) -> u32 {
    if d < 3 {
        0
    } else {
        (d - 1) * (d - 2) / 2
    }
}

/// Σ μ₊μ₋ over all λ-increasing paths with 3d + g − 1 steps: the count of
/// possibly-reducible degree-d curves of total genus g through that many
/// general points.
fn severi_path_count(d: u32, g: u32) -> BigInt {
    let dd = d as i64;
    let steps = (3 * d + g - 1) as usize;
    let mut middles: Vec<(i64, i64)> = Vec::new();
    for x in 0..=dd {
        for y in (0..=dd - x).rev() {
            let p = (x, y);
            if p != (0, dd) && p != (dd, 0) {
                middles.push(p);
            }
        }
    }
    // λ-sortedness: the loops above emit x ascending, y descending.
    debug_assert!(middles.windows(2).all(|w| lambda_lt(w[0], w[1])));

    let need = steps - 1; // middle points per path
    let mut total = BigInt::zero();
    let mut memo_pos: HashMap<Vec<(i64, i64)>, BigInt> = HashMap::new();
    let mut memo_neg: HashMap<Vec<(i64, i64)>, BigInt> = HashMap::new();
    let mut chosen: Vec<(i64, i64)> = Vec::with_capacity(steps + 1);
    chosen.push((0, dd));

    fn rec(
        middles: &[(i64, i64)],
        from: usize,
        need: usize,
        chosen: &mut Vec<(i64, i64)>,
        dd: i64,
        total: &mut BigInt,
        memo_pos: &mut HashMap<Vec<(i64, i64)>, BigInt>,
        memo_neg: &mut HashMap<Vec<(i64, i64)>, BigInt>,
    ) {
        if need == 0 {
            chosen.push((dd, 0));
            let plus = mu(chosen, dd, PathSide::Positive, memo_pos);
            if !plus.is_zero() {
                let minus = mu(chosen, dd, PathSide::Negative, memo_neg);
                *total += plus * minus;
            }
            chosen.pop();
            return;
        }
        if middles.len() - from < need {
            return;
        }
        for i in from..middles.len() {
            chosen.push(middles[i]);
            rec(middles, i + 1, need - 1, chosen, dd, total, memo_pos, memo_neg);
            chosen.pop();
        }
    }
    rec(
        &middles, 0, need, &mut chosen, dd, &mut total, &mut memo_pos, &mut memo_neg,
    );
    total
}

fn factorial(n: usize) -> BigInt {
    let mut acc = BigInt::one();
    for k in 2..=n {
        acc *= k;
    }
    acc
}

/// N_{d,g}: the number of irreducible degree-d genus-g plane curves
/// through 3d + g − 1 general points, via lattice paths. The raw path sum
/// counts configurations with reducible total curves as well (components
/// of degrees dᵢ and genera gᵢ with Σdᵢ = d and Σgᵢ − (k−1) = g); these
/// are subtracted by inclusion–exclusion over such splittings.
pub fn count_lattice_paths(d: u32, g: u32) -> Result<BigInt, CountError> {
    if d < 1 {
        return Err(CountError::BadDegree);
    }
    if g > max_genus(d) {
        return Err(CountError::BadGenus { d, g });
    }
    let mut memo: BTreeMap<(u32, u32), BigInt> = BTreeMap::new();
    Ok(irreducible_count(d, g, &mut memo))
}

fn irreducible_count(d: u32, g: u32, memo: &mut BTreeMap<(u32, u32), BigInt>) -> BigInt {
    if let Some(v) = memo.get(&(d, g)) {
        return v.clone();
    }
    let mut n = severi_path_count(d, g);

    // Enumerate nonincreasing component multisets [(d₁,g₁) ≥ …] with ≥ 2
    // parts, Σdᵢ = d, Σgᵢ = g + k − 1.
    let mut parts: Vec<(u32, u32)> = Vec::new();
    let n_points = (3 * d + g - 1) as usize;
    fn rec(
        d_left: u32,
        g_query: u32,
        parts: &mut Vec<(u32, u32)>,
        out: &mut Vec<Vec<(u32, u32)>>,
    ) {
        if d_left == 0 {
            // Need Σgᵢ = g_query + k − 1 and at least two parts.
            let k = parts.len();
            let sum_g: u32 = parts.iter().map(|p| p.1).sum();
            if k >= 2 && sum_g == g_query + (k as u32 - 1) {
                out.push(parts.clone());
            }
            return;
        }
        let max_d = parts.last().map_or(d_left, |p| p.0.min(d_left));
        for di in (1..=max_d).rev() {
            let max_g = if parts.last().map_or(false, |p| p.0 == di) {
                max_genus(di).min(parts.last().unwrap().1)
            } else {
                max_genus(di)
            };
            for gi in (0..=max_g).rev() {
                parts.push((di, gi));
                rec(d_left - di, g_query, parts, out);
                parts.pop();
            }
        }
    }
    let mut splits = Vec::new();
    rec(d, g, &mut parts, &mut splits);

    for split in splits {
        // Number of ways to hand out the labeled points to the parts,
        // divided by the symmetry among identical parts.
        let mut ways = factorial(n_points);
        for &(di, gi) in &split {
            ways /= factorial((3 * di + gi - 1) as usize);
        }
        let mut run = 1usize;
        for i in 1..=split.len() {
            if i < split.len() && split[i] == split[i - 1] {
                run += 1;
            } else {
                ways /= factorial(run);
                run = 1;
            }
        }
        let mut prod = ways;
        for &(di, gi) in &split {
            prod *= irreducible_count(di, gi, memo);
        }
        n -= prod;
    }
    memo.insert((d, g), n.clone());
    n
}

// ---------------------------------------------------------------------
// Kontsevich recursion
// ---------------------------------------------------------------------

fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// N_d, the number of rational degree-d plane curves through 3d − 1
/// general points, by the recursion
/// N_d = Σ_{d₁+d₂=d} N_{d₁} N_{d₂} (d₁²d₂² C(3d−4, 3d₁−2) − d₁³d₂ C(3d−4, 3d₁−1)).
pub fn kontsevich_n(d: u32) -> Result<BigInt, CountError> {
    if d < 1 {
        return Err(CountError::BadDegree);
    }
    let mut table: Vec<BigInt> = vec![BigInt::zero(), BigInt::one()];
    for m in 2..=d as u64 {
        let mut total = BigInt::zero();
        for d1 in 1..m {
            let d2 = m - d1;
            let c1 = binomial(3 * m - 4, 3 * d1 - 2);
            let c2 = binomial(3 * m - 4, 3 * d1 - 1);
            let term = BigInt::from(d1 * d1 * d2 * d2) * c1 - BigInt::from(d1 * d1 * d1 * d2) * c2;
            total += &table[d1 as usize] * &table[d2 as usize] * term;
        }
        table.push(total);
    }
    Ok(table[d as usize].clone())
}

// ---------------------------------------------------------------------
// Tilings of dΔ by lattice triangles and parallelograms
// ---------------------------------------------------------------------

type IPt = (i64, i64);

fn primitive_i64(v: IPt) -> IPt {
    let g = num::integer::gcd(v.0.abs(), v.1.abs());
    (v.0 / g, v.1 / g)
}

fn lattice_length(u: IPt, v: IPt) -> i64 {
    num::integer::gcd((v.0 - u.0).abs(), (v.1 - u.1).abs())
}

/// A convex cell with CCW corners (3 = triangle, 4 = parallelogram).
#[derive(Debug, Clone, PartialEq, Eq)]
struct TCell {
    corners: Vec<IPt>,
}

impl TCell {
    fn area2(&self) -> i64 {
        let n = self.corners.len();
        let mut acc = 0;
        for i in 0..n {
            let a = self.corners[i];
            let b = self.corners[(i + 1) % n];
            acc += a.0 * b.1 - b.0 * a.1;
        }
        acc
    }

    fn sides(&self) -> Vec<(IPt, IPt)> {
        let n = self.corners.len();
        (0..n)
            .map(|i| (self.corners[i], self.corners[(i + 1) % n]))
            .collect()
    }

    fn is_parallelogram(&self) -> bool {
        self.corners.len() == 4
    }
}

fn seg_key(u: IPt, v: IPt) -> (IPt, IPt) {
    if u <= v {
        (u, v)
    } else {
        (v, u)
    }
}

fn on_segment_closed(p: IPt, u: IPt, v: IPt) -> bool {
    cross2((v.0 - u.0, v.1 - u.1), (p.0 - u.0, p.1 - u.1)) == 0
        && (p.0 - u.0) * (p.0 - v.0) + (p.1 - u.1) * (p.1 - v.1) <= 0
}

fn strictly_inside_segment(p: IPt, u: IPt, v: IPt) -> bool {
    p != u && p != v && on_segment_closed(p, u, v)
}

/// Separating-axis test: true iff the convex CCW polygons have disjoint
/// interiors (touching along boundaries is allowed).
fn interiors_disjoint(a: &TCell, b: &TCell) -> bool {
    let separated_by = |p: &TCell, q: &TCell| -> bool {
        for (u, v) in p.sides() {
            let e = (v.0 - u.0, v.1 - u.1);
            if q
                .corners
                .iter()
                .all(|c| cross2(e, (c.0 - u.0, c.1 - u.1)) <= 0)
            {
                return true;
            }
        }
        false
    };
    separated_by(a, b) || separated_by(b, a)
}

/// Face-to-face compatibility: collinear overlapping sides must coincide
/// exactly, and no corner of one cell may sit strictly inside a side of
/// the other.
fn face_compatible(a: &TCell, b: &TCell) -> bool {
    for (u1, v1) in a.sides() {
        for (u2, v2) in b.sides() {
            let d1 = (v1.0 - u1.0, v1.1 - u1.1);
            let d2 = (v2.0 - u2.0, v2.1 - u2.1);
            if cross2(d1, d2) != 0 {
                continue;
            }
            if cross2(d1, (u2.0 - u1.0, u2.1 - u1.1)) != 0 {
                continue; // parallel but not collinear
            }
            // Collinear: overlap must be empty, a point, or both full sides.
            if seg_key(u1, v1) == seg_key(u2, v2) {
                continue;
            }
            let olap = strictly_inside_segment(u2, u1, v1)
                || strictly_inside_segment(v2, u1, v1)
                || strictly_inside_segment(u1, u2, v2)
                || strictly_inside_segment(v1, u2, v2)
                || (seg_key(u1, v1) != seg_key(u2, v2)
                    && on_segment_closed(u2, u1, v1)
                    && on_segment_closed(v2, u1, v1));
            if olap {
                return false;
            }
        }
    }
    for c in &a.corners {
        for (u, v) in b.sides() {
            if strictly_inside_segment(*c, u, v) && !a.sides().iter().any(|s| seg_key(s.0, s.1) == seg_key(u, v)) {
                // A T-point unless the full side is shared.
                if !a
                    .sides()
                    .iter()
                    .any(|&(x, y)| on_segment_closed(u, x, y) && on_segment_closed(v, x, y) && on_segment_closed(x, u, v) && on_segment_closed(y, u, v))
                {
                    return false;
                }
            }
        }
    }
    for c in &b.corners {
        for (u, v) in a.sides() {
            if strictly_inside_segment(*c, u, v) {
                return false;
            }
        }
    }
    true
}

/// Angular interval a cell occupies around a point on its boundary.
fn cell_interval_at(cell: &TCell, q: IPt) -> Option<(IPt, IPt)> {
    let n = cell.corners.len();
    for i in 0..n {
        if cell.corners[i] == q {
            let next = cell.corners[(i + 1) % n];
            let prev = cell.corners[(i + n - 1) % n];
            return Some((
                primitive_i64((next.0 - q.0, next.1 - q.1)),
                primitive_i64((prev.0 - q.0, prev.1 - q.1)),
            ));
        }
    }
    for (u, v) in cell.sides() {
        if strictly_inside_segment(q, u, v) {
            let d = primitive_i64((v.0 - u.0, v.1 - u.1));
            return Some((d, (-d.0, -d.1)));
        }
    }
    None
}

fn interval_contains(start: IPt, end: IPt, sigma: IPt) -> bool {
    if sigma == start {
        return true;
    }
    if end == (-start.0, -start.1) {
        return cross2(start, sigma) > 0;
    }
    cross2(start, sigma) > 0 && cross2(sigma, end) > 0
}

/// The cone of directions pointing into dΔ from q (None = full circle).
fn triangle_cone(d: i64, q: IPt) -> Option<(IPt, IPt)> {
    let on_x = q.1 == 0;
    let on_y = q.0 == 0;
    let on_h = q.0 + q.1 == d;
    match (on_y, on_x, on_h) {
        (true, true, _) => Some(((1, 0), (0, 1))),   // (0,0)
        (_, true, true) => Some(((-1, 1), (-1, 0))), // (d,0)
        (true, _, true) => Some(((0, -1), (1, -1))), // (0,d)
        (false, true, false) => Some(((1, 0), (-1, 0))),
        (true, false, false) => Some(((0, -1), (0, 1))),
        (false, false, true) => Some(((-1, 1), (1, -1))),
        (false, false, false) => None,
    }
}

/// Walk the placed angular intervals at q from the cone start. Returns
/// None if saturated, or the first uncovered direction.
fn first_gap(
    placed: &[TCell],
    q: IPt,
    d: i64,
) -> Option<IPt> {
    let mut intervals: Vec<(IPt, IPt)> = Vec::new();
    for cell in placed {
        if let Some(iv) = cell_interval_at(cell, q) {
            intervals.push(iv);
        }
    }
    match triangle_cone(d, q) {
        Some((start, end)) => {
            let mut cur = start;
            loop {
                if cur == end {
                    return None;
                }
                match intervals.iter().find(|iv| iv.0 == cur) {
                    Some(iv) => cur = iv.1,
                    None => return Some(cur),
                }
            }
        }
        None => {
            // Interior point: full circle.
            if intervals.is_empty() {
                return Some((1, 0));
            }
            let start = intervals[0].0;
            let mut cur = start;
            let mut steps = 0usize;
            loop {
                match intervals.iter().find(|iv| iv.0 == cur) {
                    Some(iv) => {
                        cur = iv.1;
                        if cur == start {
                            return None; // closed the full circle
                        }
                    }
                    None => return Some(cur),
                }
                steps += 1;
                // Disjoint intervals have unique successors, so the walk
                // must close or get stuck within intervals.len() steps.
                debug_assert!(steps <= intervals.len());
                if steps > intervals.len() {
                    return None;
                }
            }
        }
    }
}

/// One cell of the dual picture, as a curve vertex candidate with its
/// outgoing dual data.
#[derive(Debug, Clone)]
struct TEdgeRec {
    c1: usize,
    c2: usize,
    dir: IPt, // primitive, from the curve vertex of c1 toward that of c2
    weight: u32,
}

#[derive(Debug, Clone)]
struct TRayRec {
    cell: usize,
    dir: IPt,
    weight: u32,
}

#[derive(Debug, Clone)]
struct Tiling {
    cells: Vec<TCell>,
    edges: Vec<TEdgeRec>,
    rays: Vec<TRayRec>,
    genus: i64,
}

/// The perpendicular of the shared side pointing from cell c1's curve
/// vertex toward its neighbor: the rotation of the side lying on the same
/// side as c1's own interior.
fn dual_direction(side: (IPt, IPt), c1: &TCell) -> IPt {
    let (u, v) = side;
    let s = primitive_i64((v.0 - u.0, v.1 - u.1));
    let n = c1.corners.len() as i64;
    let cx: i64 = c1.corners.iter().map(|c| c.0).sum();
    let cy: i64 = c1.corners.iter().map(|c| c.1).sum();
    // Compare against n·u to keep the arithmetic integral.
    let side_sign = cross2(s, (cx - n * u.0, cy - n * u.1));
    debug_assert!(side_sign != 0);
    let ccw = (-s.1, s.0);
    if cross2(s, ccw) as i128 * side_sign as i128 > 0 {
        ccw
    } else {
        (s.1, -s.0)
    }
}

fn on_triangle_boundary(u: IPt, v: IPt, d: i64) -> bool {
    (u.1 == 0 && v.1 == 0)
        || (u.0 == 0 && v.0 == 0)
        || (u.0 + u.1 == d && v.0 + v.1 == d)
}

fn finish_tiling(placed: &[TCell], d: i64) -> Option<Tiling> {
    let mut by_side: BTreeMap<(IPt, IPt), Vec<usize>> = BTreeMap::new();
    for (ci, cell) in placed.iter().enumerate() {
        for (u, v) in cell.sides() {
            by_side.entry(seg_key(u, v)).or_default().push(ci);
        }
    }
    let mut edges = Vec::new();
    let mut rays = Vec::new();
    for (side, cells) in &by_side {
        let w = lattice_length(side.0, side.1) as u32;
        match cells.as_slice() {
            [c1, c2] => {
                let dir = dual_direction(*side, &placed[*c1]);
                edges.push(TEdgeRec {
                    c1: *c1,
                    c2: *c2,
                    dir,
                    weight: w,
                });
            }
            [c] => {
                if !on_triangle_boundary(side.0, side.1, d) {
                    return None; // exposed interior side: not a tiling
                }
                let dir = dual_direction(*side, &placed[*c]);
                rays.push(TRayRec {
                    cell: *c,
                    dir,
                    weight: w,
                });
            }
            _ => return None,
        }
    }
    let cells: Vec<TCell> = placed.to_vec();
    let v_param =
        cells.len() as i64 + cells.iter().filter(|c| c.is_parallelogram()).count() as i64;
    let genus = edges.len() as i64 + 1 - v_param;
    Some(Tiling {
        cells,
        edges,
        rays,
        genus,
    })
}

fn triangle_lattice_points(d: i64) -> Vec<IPt> {
    let mut pts = Vec::new();
    for x in 0..=d {
        for y in 0..=d - x {
            pts.push((x, y));
        }
    }
    pts
}

/// All convex lattice cells (triangles and parallelograms) inside dΔ.
fn cell_catalog(d: i64) -> Vec<TCell> {
    let pts = triangle_lattice_points(d);
    let mut out = Vec::new();
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            for k in j + 1..pts.len() {
                let (a, b, c) = (pts[i], pts[j], pts[k]);
                let ar = cross2((b.0 - a.0, b.1 - a.1), (c.0 - a.0, c.1 - a.1));
                if ar == 0 {
                    continue;
                }
                let corners = if ar > 0 {
                    vec![a, b, c]
                } else {
                    vec![a, c, b]
                };
                out.push(TCell { corners });
            }
        }
    }
    // Parallelograms a, b, b+c−a, c with a the lexicographic minimum.
    for i in 0..pts.len() {
        for j in 0..pts.len() {
            for k in j + 1..pts.len() {
                let (a, b, c) = (pts[i], pts[j], pts[k]);
                if b == a || c == a {
                    continue;
                }
                let s = cross2((b.0 - a.0, b.1 - a.1), (c.0 - a.0, c.1 - a.1));
                if s == 0 {
                    continue;
                }
                let fourth = (b.0 + c.0 - a.0, b.1 + c.1 - a.1);
                if !in_triangle(fourth, d) {
                    continue;
                }
                if a >= b || a >= c || a >= fourth {
                    continue; // canonical anchor corner
                }
                let corners = if s > 0 {
                    vec![a, b, fourth, c]
                } else {
                    vec![a, c, fourth, b]
                };
                out.push(TCell { corners });
            }
        }
    }
    out
}

/// Every edge-to-edge tiling of dΔ into lattice triangles and
/// parallelograms, each found exactly once.
fn enumerate_tilings(d: u32) -> Vec<Tiling> {
    let dd = d as i64;
    let catalog = cell_catalog(dd);
    let pts = triangle_lattice_points(dd);
    let target_area2 = dd * dd;
    let mut out = Vec::new();
    let mut placed: Vec<TCell> = Vec::new();

    fn rec(
        catalog: &[TCell],
        pts: &[IPt],
        placed: &mut Vec<TCell>,
        area2: i64,
        target: i64,
        dd: i64,
        out: &mut Vec<Tiling>,
    ) {
        if area2 == target {
            if let Some(t) = finish_tiling(placed, dd) {
                out.push(t);
            }
            return;
        }
        // Anchor: first lattice point whose surroundings are not filled.
        let mut anchor = None;
        for &q in pts {
            if let Some(sigma) = first_gap(placed, q, dd) {
                anchor = Some((q, sigma));
                break;
            }
        }
        let Some((q, sigma)) = anchor else { return };
        for cand in catalog {
            let Some((start, end)) = cell_interval_at(cand, q) else {
                continue;
            };
            if !interval_contains(start, end, sigma) {
                continue;
            }
            if placed
                .iter()
                .all(|p| interiors_disjoint(p, cand) && face_compatible(p, cand))
            {
                placed.push(cand.clone());
                rec(catalog, pts, placed, area2 + cand.area2(), target, dd, out);
                placed.pop();
            }
        }
    }
    rec(
        &catalog,
        &pts,
        &mut placed,
        0,
        target_area2,
        dd,
        &mut out,
    );
    out
}

// ---------------------------------------------------------------------
// Exact incidence solving
// ---------------------------------------------------------------------

/// Incremental exact row-echelon elimination with snapshot/rollback.
struct Eliminator {
    cols: usize,
    /// Echelon rows (coefficients + rhs); pivot columns pairwise distinct.
    rows: Vec<(Vec<BigRational>, BigRational)>,
    pivots: Vec<usize>,
    inconsistent: bool,
}

enum AddOutcome {
    NewPivot,
    Redundant,
    Inconsistent,
}

impl Eliminator {
    fn new(cols: usize) -> Self {
        Eliminator {
            cols,
            rows: Vec::new(),
            pivots: Vec::new(),
            inconsistent: false,
        }
    }

    fn rank(&self) -> usize {
        self.rows.len()
    }

    fn add_row(&mut self, mut coeffs: Vec<BigRational>, mut rhs: BigRational) -> AddOutcome {
        for (row, &p) in self.rows.iter().zip(self.pivots.iter()) {
            if !coeffs[p].is_zero() {
                let f = coeffs[p].clone() / &row.0[p];
                for c in 0..self.cols {
                    if !row.0[c].is_zero() {
                        let sub = &f * &row.0[c];
                        coeffs[c] -= sub;
                    }
                }
                rhs -= &f * &row.1;
            }
        }
        match coeffs.iter().position(|c| !c.is_zero()) {
            Some(p) => {
                self.pivots.push(p);
                self.rows.push((coeffs, rhs));
                AddOutcome::NewPivot
            }
            None if rhs.is_zero() => AddOutcome::Redundant,
            None => {
                self.inconsistent = true;
                AddOutcome::Inconsistent
            }
        }
    }

    fn snapshot(&self) -> (usize, bool) {
        (self.rows.len(), self.inconsistent)
    }

    fn rollback(&mut self, snap: (usize, bool)) {
        self.rows.truncate(snap.0);
        self.pivots.truncate(snap.0);
        self.inconsistent = snap.1;
    }

    /// Solve with all free variables set to the given values
    /// (len = cols): returns the full solution vector.
    fn solve_with_free(&self, free_vals: &[BigRational], homogeneous: bool) -> Vec<BigRational> {
        let mut x = free_vals.to_vec();
        // Process pivots in descending column order so later variables are
        // already known.
        let mut order: Vec<usize> = (0..self.rows.len()).collect();
        order.sort_by_key(|&i| std::cmp::Reverse(self.pivots[i]));
        for &i in &order {
            let (row, rhs) = &self.rows[i];
            let p = self.pivots[i];
            let mut acc = if homogeneous {
                BigRational::zero()
            } else {
                rhs.clone()
            };
            for c in p + 1..self.cols {
                if !row[c].is_zero() {
                    acc -= &row[c] * &x[c];
                }
            }
            x[p] = acc / &row[p];
        }
        x
    }

    fn free_cols(&self) -> Vec<usize> {
        (0..self.cols)
            .filter(|c| !self.pivots.contains(c))
            .collect()
    }
}

/// An affine functional c + Σ aᵢxᵢ, used for strict inequalities > 0.
#[derive(Clone)]
struct Affine {
    coeffs: Vec<BigRational>,
    constant: BigRational,
}

impl Affine {
    fn eval(&self, x: &[BigRational]) -> BigRational {
        let mut acc = self.constant.clone();
        for (a, v) in self.coeffs.iter().zip(x) {
            if !a.is_zero() {
                acc += a * v;
            }
        }
        acc
    }
}

/// Is there a point with every functional strictly positive on the affine
/// subspace x = x₀ + Σ tᵢbᵢ? Exact Fourier–Motzkin over the tᵢ. Returns
/// None if the computation grows past the safety cap.
fn strictly_feasible(
    funcs: &[Affine],
    x0: &[BigRational],
    basis: &[Vec<BigRational>],
) -> Option<bool> {
    // Rows: (coeffs over t, constant), meaning coeffs·t + constant > 0.
    let mut rows: Vec<(Vec<BigRational>, BigRational)> = funcs
        .iter()
        .map(|f| {
            let c = f.eval(x0);
            let ts: Vec<BigRational> = basis
                .iter()
                .map(|b| {
                    let mut acc = BigRational::zero();
                    for (a, v) in f.coeffs.iter().zip(b) {
                        if !a.is_zero() {
                            acc += a * v;
                        }
                    }
                    acc
                })
                .collect();
            (ts, c)
        })
        .collect();
    let nvars = basis.len();
    for var in 0..nvars {
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        let mut rest = Vec::new();
        for r in rows {
            match r.0[var].cmp(&BigRational::zero()) {
                std::cmp::Ordering::Greater => pos.push(r),
                std::cmp::Ordering::Less => neg.push(r),
                std::cmp::Ordering::Equal => rest.push(r),
            }
        }
        for p in &pos {
            for n in &neg {
                // (−n_k)·p + p_k·n eliminates variable `var`; both strict.
                let a = -n.0[var].clone();
                let b = p.0[var].clone();
                let mut coeffs = Vec::with_capacity(nvars);
                for c in 0..nvars {
                    coeffs.push(&a * &p.0[c] + &b * &n.0[c]);
                }
                let constant = &a * &p.1 + &b * &n.1;
                rest.push((coeffs, constant));
            }
        }
        rows = rest;
        if rows.len() > 5000 {
            return None;
        }
    }
    Some(rows.iter().all(|r| r.1 > BigRational::zero()))
}

// ---------------------------------------------------------------------
// count_through
// ---------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Certificate {
    General,
    Degenerate(String),
    Inconclusive,
}

#[derive(Debug, Clone)]
pub struct CountResult {
    pub n: BigInt,
    pub curves: Vec<(PlaneTropicalCurve, u64)>,
    pub certificate: Certificate,
}

/// A position a point can be assigned to inside a combinatorial type.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Position {
    Edge(usize),
    RayAt(usize),
}

struct TypeSolver<'a> {
    tiling: &'a Tiling,
    pts: &'a [(BigRational, BigRational)],
    cols: usize,
    base_rank: usize,
    positions: Vec<Position>,
    /// Per-position direction (for the parallel-pair pruning rule).
    pos_dirs: Vec<IPt>,
}

enum LeafVerdict {
    Counted(PlaneTropicalCurve, u64),
    Degenerate(String),
    Nothing,
}

impl<'a> TypeSolver<'a> {
    fn point_row(&self, p: &(BigRational, BigRational), pos: Position) -> (Vec<BigRational>, BigRational) {
        // cross(p − v_c, dir) = 0 with v_c the base cell of the position.
        let (cell, dir) = match pos {
            Position::Edge(e) => (self.tiling.edges[e].c1, self.tiling.edges[e].dir),
            Position::RayAt(r) => (self.tiling.rays[r].cell, self.tiling.rays[r].dir),
        };
        let dx = BigRational::from_integer(BigInt::from(dir.0));
        let dy = BigRational::from_integer(BigInt::from(dir.1));
        let mut coeffs = vec![BigRational::zero(); self.cols];
        coeffs[2 * cell] = -dy.clone();
        coeffs[2 * cell + 1] = dx.clone();
        let rhs = &p.1 * &dx - &p.0 * &dy;
        (coeffs, rhs)
    }

    fn inequalities(&self, assignment: &[usize]) -> Vec<Affine> {
        let mut out = Vec::new();
        let zero = || vec![BigRational::zero(); self.cols];
        let rat = |v: i64| BigRational::from_integer(BigInt::from(v));
        for e in &self.tiling.edges {
            // (v_{c2} − v_{c1})·dir > 0
            let mut coeffs = zero();
            coeffs[2 * e.c2] = rat(e.dir.0);
            coeffs[2 * e.c2 + 1] = rat(e.dir.1);
            coeffs[2 * e.c1] -= rat(e.dir.0);
            coeffs[2 * e.c1 + 1] -= rat(e.dir.1);
            out.push(Affine {
                coeffs,
                constant: BigRational::zero(),
            });
        }
        for (pi, &posi) in assignment.iter().enumerate() {
            let p = &self.pts[pi];
            match self.positions[posi] {
                Position::Edge(ei) => {
                    let e = &self.tiling.edges[ei];
                    let pdot = &p.0 * rat(e.dir.0) + &p.1 * rat(e.dir.1);
                    // (p − v_{c1})·dir > 0
                    let mut c1 = zero();
                    c1[2 * e.c1] = -rat(e.dir.0);
                    c1[2 * e.c1 + 1] = -rat(e.dir.1);
                    out.push(Affine {
                        coeffs: c1,
                        constant: pdot.clone(),
                    });
                    // (v_{c2} − p)·dir > 0
                    let mut c2 = zero();
                    c2[2 * e.c2] = rat(e.dir.0);
                    c2[2 * e.c2 + 1] = rat(e.dir.1);
                    out.push(Affine {
                        coeffs: c2,
                        constant: -pdot,
                    });
                }
                Position::RayAt(ri) => {
                    let r = &self.tiling.rays[ri];
                    let pdot = &p.0 * rat(r.dir.0) + &p.1 * rat(r.dir.1);
                    let mut c = zero();
                    c[2 * r.cell] = -rat(r.dir.0);
                    c[2 * r.cell + 1] = -rat(r.dir.1);
                    out.push(Affine {
                        coeffs: c,
                        constant: pdot,
                    });
                }
            }
        }
        out
    }

    fn leaf(&self, elim: &Eliminator, assignment: &[usize], want_genus: i64) -> LeafVerdict {
        let funcs = self.inequalities(assignment);
        let rank = elim.rank();
        if rank < self.cols {
            // Positive-dimensional solution family: degenerate only if the
            // family actually meets the open cell.
            let free = elim.free_cols();
            let zero_free = vec![BigRational::zero(); self.cols];
            let x0 = elim.solve_with_free(&zero_free, false);
            let basis: Vec<Vec<BigRational>> = free
                .iter()
                .map(|&fc| {
                    let mut seed = vec![BigRational::zero(); self.cols];
                    seed[fc] = BigRational::one();
                    elim.solve_with_free(&seed, true)
                })
                .collect();
            return match strictly_feasible(&funcs, &x0, &basis) {
                Some(true) => LeafVerdict::Degenerate(
                    "positive-dimensional family of curves through the points".into(),
                ),
                Some(false) => LeafVerdict::Nothing,
                None => LeafVerdict::Degenerate(
                    "feasibility of an underdetermined system exceeded limits".into(),
                ),
            };
        }
        let x = elim.solve_with_free(&vec![BigRational::zero(); self.cols], false);
        let mut on_boundary = false;
        for f in &funcs {
            let v = f.eval(&x);
            if v < BigRational::zero() {
                return LeafVerdict::Nothing;
            }
            if v.is_zero() {
                on_boundary = true;
            }
        }
        if on_boundary {
            return LeafVerdict::Degenerate(
                "solution on a cell boundary (point at a vertex or collapsed edge)".into(),
            );
        }
        if rank != self.base_rank + self.pts.len() {
            return LeafVerdict::Degenerate(
                "incidence conditions are dependent yet consistent".into(),
            );
        }
        if self.tiling.genus < want_genus {
            return LeafVerdict::Degenerate(format!(
                "curve of genus {} through points intended for genus {}",
                self.tiling.genus, want_genus
            ));
        }
        let (curve, mult) = self.build_curve(&x);
        // A marked point sitting on two strands at once (a crossing) would
        // make the same curve satisfy two assignments.
        for p in self.pts {
            let mut hits = 0;
            for e in &curve.edges {
                let a = &curve.vertices[e.a];
                let b = &curve.vertices[e.b];
                let (ux, uy) = (&b.0 - &a.0, &b.1 - &a.1);
                let (wx, wy) = (&p.0 - &a.0, &p.1 - &a.1);
                if &wx * &uy == &wy * &ux
                    && (&wx * &ux + &wy * &uy) > BigRational::zero()
                    && (&(&b.0 - &p.0) * &ux + &(&b.1 - &p.1) * &uy) > BigRational::zero()
                {
                    hits += 1;
                }
            }
            for r in &curve.rays {
                let a = &curve.vertices[r.base];
                let ux = BigRational::from_integer(BigInt::from(r.dir.0));
                let uy = BigRational::from_integer(BigInt::from(r.dir.1));
                let (wx, wy) = (&p.0 - &a.0, &p.1 - &a.1);
                if &wx * &uy == &wy * &ux && (&wx * &ux + &wy * &uy) > BigRational::zero() {
                    hits += 1;
                }
            }
            if hits > 1 {
                return LeafVerdict::Degenerate("a point lies on a crossing of strands".into());
            }
        }
        LeafVerdict::Counted(curve, mult)
    }

    /// Assemble the embedded curve: triangle cells are vertices,
    /// parallelogram cells are pass-through crossings.
    fn build_curve(&self, x: &[BigRational]) -> (PlaneTropicalCurve, u64) {
        let t = self.tiling;
        let mut vertex_of = vec![usize::MAX; t.cells.len()];
        let mut vertices = Vec::new();
        let mut mult = 1u64;
        for (ci, cell) in t.cells.iter().enumerate() {
            if !cell.is_parallelogram() {
                vertex_of[ci] = vertices.len();
                vertices.push((x[2 * ci].clone(), x[2 * ci + 1].clone()));
                mult *= cell.area2() as u64;
            }
        }
        // Strand walking: at a parallelogram, an incident item continues on
        // the opposite side.
        #[derive(Clone, Copy, PartialEq, Eq, Debug)]
        enum Item {
            E(usize),
            R(usize),
        }
        // side index within the cell for each incident item
        let side_of = |item: Item, cell: usize| -> usize {
            let sides = t.cells[cell].sides();
            let target: Vec<(IPt, IPt)> = sides.iter().map(|&(u, v)| seg_key(u, v)).collect();
            let seg = match item {
                Item::E(ei) => {
                    let e = &t.edges[ei];
                    debug_assert!(e.c1 == cell || e.c2 == cell);
                    // Find the shared side: it is the unique side of `cell`
                    // that is also a side of the other cell.
                    let other = if e.c1 == cell { e.c2 } else { e.c1 };
                    let other_sides: Vec<(IPt, IPt)> = t.cells[other]
                        .sides()
                        .iter()
                        .map(|&(u, v)| seg_key(u, v))
                        .collect();
                    *target
                        .iter()
                        .find(|s| other_sides.contains(s))
                        .expect("neighbors share a side")
                }
                Item::R(ri) => {
                    debug_assert!(t.rays[ri].cell == cell);
                    // The unique boundary side with the matching dual dir.
                    let mut found = None;
                    for (i, &(u, v)) in sides.iter().enumerate() {
                        let du = dual_direction((u, v), &t.cells[cell]);
                        let w = lattice_length(u, v) as u32;
                        if du == t.rays[ri].dir && w == t.rays[ri].weight {
                            // Boundary side: appears exactly once overall.
                            let k = seg_key(u, v);
                            let shared = t.edges.iter().any(|e| {
                                let c_other = if e.c1 == cell { Some(e.c2) } else if e.c2 == cell { Some(e.c1) } else { None };
                                c_other.map_or(false, |o| {
                                    t.cells[o]
                                        .sides()
                                        .iter()
                                        .any(|&(a, b)| seg_key(a, b) == k)
                                })
                            });
                            if !shared {
                                found = Some(i);
                            }
                        }
                    }
                    return found.expect("ray has a boundary side");
                }
            };
            sides
                .iter()
                .position(|&(u, v)| seg_key(u, v) == seg)
                .expect("side present")
        };
        // Items incident to each cell, indexed by side.
        let mut incident: Vec<BTreeMap<usize, Item>> = vec![BTreeMap::new(); t.cells.len()];
        for (ei, e) in t.edges.iter().enumerate() {
            incident[e.c1].insert(side_of(Item::E(ei), e.c1), Item::E(ei));
            incident[e.c2].insert(side_of(Item::E(ei), e.c2), Item::E(ei));
        }
        for (ri, r) in t.rays.iter().enumerate() {
            incident[r.cell].insert(side_of(Item::R(ri), r.cell), Item::R(ri));
        }

        #[derive(Debug)]
        enum Terminal {
            Vertex(usize),
            End(IPt),
        }
        // Walk from (cell, item): returns the terminal reached and weight.
        let walk = |start_cell: usize, start_item: Item| -> Terminal {
            let mut cell = start_cell;
            let mut item = start_item;
            loop {
                if !t.cells[cell].is_parallelogram() {
                    return Terminal::Vertex(vertex_of[cell]);
                }
                // Continue through the crossing on the opposite side.
                let side = side_of(item, cell);
                let opp = (side + 2) % 4;
                let next_item = incident[cell][&opp];
                match next_item {
                    Item::E(ei) => {
                        let e = &t.edges[ei];
                        let next_cell = if e.c1 == cell { e.c2 } else { e.c1 };
                        cell = next_cell;
                        item = next_item;
                    }
                    Item::R(ri) => {
                        return Terminal::End(t.rays[ri].dir);
                    }
                }
            }
        };

        let mut edges = Vec::new();
        let mut rays = Vec::new();
        // Each strand is traversed once, from each of its constituent
        // items; dedup by only emitting from a canonical item.
        let mut visited_edges = vec![false; t.edges.len()];
        let mut visited_rays = vec![false; t.rays.len()];
        for (ei, e) in t.edges.iter().enumerate() {
            if visited_edges[ei] {
                continue;
            }
            // Mark the whole strand this edge belongs to.
            let mark = |item: Item, cell_from: usize, ve: &mut Vec<bool>, vr: &mut Vec<bool>| {
                let mut cell = cell_from;
                let mut item = item;
                loop {
                    match item {
                        Item::E(i) => ve[i] = true,
                        Item::R(i) => {
                            vr[i] = true;
                            return;
                        }
                    }
                    let Item::E(i) = item else { unreachable!() };
                    let e = &t.edges[i];
                    let next_cell = if e.c1 == cell { e.c2 } else { e.c1 };
                    if !t.cells[next_cell].is_parallelogram() {
                        return;
                    }
                    let side = side_of(item, next_cell);
                    let opp = (side + 2) % 4;
                    item = incident[next_cell][&opp];
                    cell = next_cell;
                }
            };
            mark(Item::E(ei), e.c2, &mut visited_edges, &mut visited_rays);
            mark(Item::E(ei), e.c1, &mut visited_edges, &mut visited_rays);
            let t1 = walk(e.c1, Item::E(ei));
            let t2 = walk(e.c2, Item::E(ei));
            match (t1, t2) {
                (Terminal::Vertex(a), Terminal::Vertex(b)) => edges.push(BoundedEdge {
                    a,
                    b,
                    weight: e.weight,
                }),
                (Terminal::Vertex(a), Terminal::End(dir))
                | (Terminal::End(dir), Terminal::Vertex(a)) => rays.push(Ray {
                    base: a,
                    dir,
                    weight: e.weight,
                }),
                (Terminal::End(_), Terminal::End(_)) => {
                    unreachable!("a straight strand cannot have two ends in a projective curve")
                }
            }
        }
        for (ri, r) in t.rays.iter().enumerate() {
            if visited_rays[ri] {
                continue;
            }
            visited_rays[ri] = true;
            let term = walk(r.cell, Item::R(ri));
            match term {
                Terminal::Vertex(a) => rays.push(Ray {
                    base: a,
                    dir: r.dir,
                    weight: r.weight,
                }),
                Terminal::End(_) => unreachable!("strand with two ends"),
            }
        }
        (
            PlaneTropicalCurve {
                vertices,
                edges,
                rays,
            },
            mult,
        )
    }
}

/// Count degree-d genus-g tropical curves through the given points by
/// direct enumeration, with a general-position certificate. Bounded to
/// d ≤ 3, g ≤ 1.
pub fn count_through(
    d: u32,
    g: u32,
    pts: &[TropPoint2],
) -> Result<CountResult, CountError> {
    if d < 1 {
        return Err(CountError::BadDegree);
    }
    if d > 3 || g > 1 {
        return Err(CountError::DirectBound { d, g });
    }
    if g > max_genus(d) {
        return Err(CountError::BadGenus { d, g });
    }
    let expected = (3 * d + g - 1) as usize;
    if pts.len() != expected {
        return Err(CountError::WrongPointCount {
            expected,
            got: pts.len(),
        });
    }
    let mut coords = Vec::with_capacity(pts.len());
    for p in pts {
        let (x, y) = p.as_finite().ok_or(CountError::InfiniteCoordinates)?;
        coords.push((x, y));
    }
    for i in 0..coords.len() {
        for j in i + 1..coords.len() {
            if coords[i] == coords[j] {
                return Err(CountError::DuplicatePoints);
            }
        }
    }

    let tilings = enumerate_tilings(d);
    let mut curves: Vec<(PlaneTropicalCurve, u64)> = Vec::new();
    let mut degeneracy: Option<String> = None;
    for tiling in tilings.iter().filter(|t| t.genus <= g as i64) {
        let cols = 2 * tiling.cells.len();
        let mut positions = Vec::new();
        let mut pos_dirs = Vec::new();
        for (ei, e) in tiling.edges.iter().enumerate() {
            positions.push(Position::Edge(ei));
            pos_dirs.push(e.dir);
        }
        for (ri, r) in tiling.rays.iter().enumerate() {
            positions.push(Position::RayAt(ri));
            pos_dirs.push(r.dir);
        }
        let mut elim = Eliminator::new(cols);
        for e in &tiling.edges {
            let rat = |v: i64| BigRational::from_integer(BigInt::from(v));
            let mut coeffs = vec![BigRational::zero(); cols];
            coeffs[2 * e.c2] = rat(e.dir.1);
            coeffs[2 * e.c2 + 1] = -rat(e.dir.0);
            coeffs[2 * e.c1] -= rat(e.dir.1);
            coeffs[2 * e.c1 + 1] += rat(e.dir.0);
            // cross(v_{c2} − v_{c1}, dir) = 0 rearranged:
            // (v2x−v1x)·dy − (v2y−v1y)·dx = 0.
            if matches!(elim.add_row(coeffs, BigRational::zero()), AddOutcome::Inconsistent) {
                unreachable!("homogeneous rows cannot be inconsistent");
            }
        }
        let solver = TypeSolver {
            tiling,
            pts: &coords,
            cols,
            base_rank: elim.rank(),
            positions,
            pos_dirs,
        };
        let mut assignment: Vec<usize> = Vec::with_capacity(coords.len());
        dfs_assign(
            &solver,
            &mut elim,
            &mut assignment,
            g as i64,
            &mut curves,
            &mut degeneracy,
        );
    }

    let n: BigInt = curves.iter().map(|(_, m)| BigInt::from(*m)).sum();
    let certificate = match degeneracy {
        Some(reason) => Certificate::Degenerate(reason),
        None => Certificate::General,
    };
    Ok(CountResult {
        n,
        curves,
        certificate,
    })
}

fn dfs_assign(
    solver: &TypeSolver,
    elim: &mut Eliminator,
    assignment: &mut Vec<usize>,
    want_genus: i64,
    curves: &mut Vec<(PlaneTropicalCurve, u64)>,
    degeneracy: &mut Option<String>,
) {
    let k = assignment.len();
    if k == solver.pts.len() {
        match solver.leaf(elim, assignment, want_genus) {
            LeafVerdict::Counted(c, m) => {
                if solver.tiling.genus == want_genus {
                    curves.push((c, m));
                }
            }
            LeafVerdict::Degenerate(reason) => {
                degeneracy.get_or_insert(reason);
            }
            LeafVerdict::Nothing => {}
        }
        return;
    }
    let p = &solver.pts[k];
    'pos: for (pi, pos) in solver.positions.iter().enumerate() {
        // Two points on one position must differ by a multiple of its
        // direction; check cheaply before any elimination.
        for (pj, &aj) in assignment.iter().enumerate() {
            if aj == pi {
                let q = &solver.pts[pj];
                let (dx, dy) = solver.pos_dirs[pi];
                let lhs = (&p.0 - &q.0) * BigRational::from_integer(BigInt::from(dy));
                let rhs = (&p.1 - &q.1) * BigRational::from_integer(BigInt::from(dx));
                if lhs != rhs {
                    continue 'pos;
                }
            }
        }
        let (coeffs, rhs) = solver.point_row(p, *pos);
        let snap = elim.snapshot();
        match elim.add_row(coeffs, rhs) {
            AddOutcome::Inconsistent => {
                elim.rollback(snap);
                continue;
            }
            _ => {}
        }
        assignment.push(pi);
        dfs_assign(solver, elim, assignment, want_genus, curves, degeneracy);
        assignment.pop();
        elim.rollback(snap);
    }
}

// ---------------------------------------------------------------------
// Mumford counting
// ---------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MumfordOutcome {
    Certified(BigInt),
    Inconclusive,
}

/// The default search pool: the standard configuration, coordinate
/// permutations, p-power rescalings, and seeded random unimodular integer
/// matrices.
pub fn default_config_pool(params: &FieldParams, seed: u64, n_random: usize) -> Vec<LineConfig> {
    let mut out = Vec::new();
    let perms: [[usize; 3]; 6] = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    for perm in perms {
        let mut m = crate::tropical::mat3_zero();
        for (i, &pi) in perm.iter().enumerate() {
            m[i][pi] = BigRational::one();
        }
        out.push(LineConfig::new(m).expect("permutation matrices are invertible"));
    }
    let p = BigRational::from_integer(BigInt::from(params.p()));
    for (a, b) in [(1i32, 0i32), (0, 1), (1, 2), (2, 1), (-1, 1), (1, -1)] {
        let mut m = crate::tropical::mat3_zero();
        let pow = |k: i32| -> BigRational {
            let mut acc = BigRational::one();
            for _ in 0..k.abs() {
                if k > 0 {
                    acc *= &p;
                } else {
                    acc /= &p;
                }
            }
            acc
        };
        m[0][0] = pow(a);
        m[1][1] = pow(b);
        m[2][2] = BigRational::one();
        out.push(LineConfig::new(m).expect("diagonal with nonzero entries"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..n_random {
        // Product of elementary shears: always unimodular.
        let mut m: [[i64; 3]; 3] = [[1, 0, 0], [0, 1, 0], [0, 0, 1]];
        for _ in 0..6 {
            let i = rng.gen_range(0..3usize);
            let mut j = rng.gen_range(0..3usize);
            while j == i {
                j = rng.gen_range(0..3usize);
            }
            let c = *[-2i64, -1, 1, 2].iter().nth(rng.gen_range(0..4)).unwrap();
            for col in 0..3 {
                m[i][col] += c * m[j][col];
            }
        }
        let mut q = crate::tropical::mat3_zero();
        for i in 0..3 {
            for j in 0..3 {
                q[i][j] = BigRational::from_integer(BigInt::from(m[i][j]));
            }
        }
        out.push(LineConfig::new(q).expect("unimodular matrices are invertible"));
    }
    out
}

/// Try to certify N_{d,g} from actual p-adic points: tropicalize through
/// each configuration, count directly, and accept only a General
/// certificate whose count matches the lattice-path engine.
pub fn mumford_count(
    points: &[ProjPoint2],
    d: u32,
    g: u32,
    configs: &[LineConfig],
    params: &FieldParams,
) -> Result<MumfordOutcome, CountError> {
    if d < 1 {
        return Err(CountError::BadDegree);
    }
    let expected = (3 * d + g - 1) as usize;
    if points.len() != expected {
        return Err(CountError::WrongPointCount {
            expected,
            got: points.len(),
        });
    }
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            if points[i] == points[j] {
                return Err(CountError::DuplicatePoints);
            }
        }
    }
    let reference = count_lattice_paths(d, g)?;
    for cfg in configs {
        let mut tropical_pts = Vec::with_capacity(points.len());
        let mut usable = true;
        for q in points {
            match tropicalize(q, cfg, params) {
                Ok(t) if t.is_finite() => tropical_pts.push(t),
                _ => {
                    usable = false;
                    break;
                }
            }
        }
        if !usable {
            continue;
        }
        match count_through(d, g, &tropical_pts) {
            Ok(result) => {
                if result.certificate == Certificate::General && result.n == reference {
                    return Ok(MumfordOutcome::Certified(result.n));
                }
            }
            Err(CountError::DuplicatePoints) | Err(CountError::InfiniteCoordinates) => continue,
            Err(other) => return Err(other),
        }
    }
    Ok(MumfordOutcome::Inconclusive)
}
