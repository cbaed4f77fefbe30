//! The tropical projective plane: tropicalization of points through a line
//! configuration, plane tropical curves with balancing and degrees, and
//! dual subdivisions of the dilated triangle dΔ.
//!
//! Min-convention throughout: coordinates are valuations, a tropical line
//! has rays up, right, and down-left. The max-convention picture is the
//! mirror image x ↦ −x.

use std::collections::BTreeMap;

use num::{BigInt, BigRational, Integer, One, Zero};
use thiserror::Error;

use crate::padic::{val, ExtVal, FieldParams, ProjPoint2};

#[derive(Debug, Error, PartialEq, Eq, Clone)]
pub enum TropError {
    #[error("line configuration is singular (det = 0)")]
    SingularConfig,
    #[error("point has a vanishing first coordinate after applying the configuration")]
    FirstCoordinateVanishes,
    #[error("operation requires finite coordinates")]
    InfiniteCoordinates,
    #[error("curve is not balanced at vertex {0}")]
    Unbalanced(usize),
    #[error("edge {0} has coincident endpoints")]
    ZeroLengthEdge(usize),
    #[error("end direction ({0}, {1}) is not one of (0,1), (1,0), (−1,−1)")]
    NonProjectiveEnd(i64, i64),
    #[error("weighted end counts per direction differ: up {up}, right {right}, diagonal {diag}")]
    EndCountMismatch { up: i64, right: i64, diag: i64 },
    #[error("curve has no ends")]
    NoEnds,
    #[error("two strands overlap along a segment")]
    OverlappingStrands,
    #[error("edge direction exceeds machine precision")]
    DirectionOverflow,
    #[error("embedded curve is disconnected; cells cannot be anchored")]
    CannotAnchor,
    #[error("cells do not tile the dilated triangle")]
    DualityFailed,
}

/// A point of the tropical projective plane in the chart at z₀: two
/// coordinates in (1/e)ℤ ∪ {+∞}.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct TropPoint2 {
    pub x: ExtVal,
    pub y: ExtVal,
}

impl TropPoint2 {
    pub fn finite(x: BigRational, y: BigRational) -> Self {
        TropPoint2 {
            x: ExtVal::Finite(x),
            y: ExtVal::Finite(y),
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(
            (&self.x, &self.y),
            (ExtVal::Finite(_), ExtVal::Finite(_))
        )
    }

    pub fn as_finite(&self) -> Option<(BigRational, BigRational)> {
        match (&self.x, &self.y) {
            (ExtVal::Finite(a), ExtVal::Finite(b)) => Some((a.clone(), b.clone())),
            _ => None,
        }
    }
}

pub type Mat3 = [[BigRational; 3]; 3];

pub fn mat3_zero() -> Mat3 {
    std::array::from_fn(|_| std::array::from_fn(|_| BigRational::zero()))
}

pub fn mat3_identity() -> Mat3 {
    let mut m = mat3_zero();
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = BigRational::one();
    }
    m
}

pub fn mat3_det(m: &Mat3) -> BigRational {
    let t1 = &m[0][0] * (&m[1][1] * &m[2][2] - &m[1][2] * &m[2][1]);
    let t2 = &m[0][1] * (&m[1][0] * &m[2][2] - &m[1][2] * &m[2][0]);
    let t3 = &m[0][2] * (&m[1][0] * &m[2][1] - &m[1][1] * &m[2][0]);
    t1 - t2 + t3
}

pub fn mat3_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = mat3_zero();
    for i in 0..3 {
        for j in 0..3 {
            let mut acc = BigRational::zero();
            for (k, bk) in b.iter().enumerate() {
                acc += &a[i][k] * &bk[j];
            }
            out[i][j] = acc;
        }
    }
    out
}

pub fn mat3_apply(m: &Mat3, pt: &ProjPoint2) -> Result<ProjPoint2, TropError> {
    let z = pt.coords();
    let mut w = [
        BigRational::zero(),
        BigRational::zero(),
        BigRational::zero(),
    ];
    for (i, row) in m.iter().enumerate() {
        for (k, zk) in z.iter().enumerate() {
            w[i] += &row[k] * zk;
        }
    }
    ProjPoint2::new(w[0].clone(), w[1].clone(), w[2].clone())
        .map_err(|_| TropError::SingularConfig)
}

/// Three lines in ℙ² in general position, as the rows of an invertible
/// matrix. Tropicalization is taken after moving the point by this matrix,
/// so the configuration plays the role of a choice of coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineConfig {
    alpha: Mat3,
}

impl LineConfig {
    pub fn new(alpha: Mat3) -> Result<Self, TropError> {
        if mat3_det(&alpha).is_zero() {
            return Err(TropError::SingularConfig);
        }
        Ok(LineConfig { alpha })
    }

    /// The coordinate lines z₀ = 0, z₁ = 0, z₂ = 0.
    pub fn standard() -> Self {
        LineConfig {
            alpha: mat3_identity(),
        }
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.alpha
    }

    /// The configuration whose matrix is α·β.
    pub fn precomposed(&self, beta: &Mat3) -> Result<Self, TropError> {
        LineConfig::new(mat3_mul(&self.alpha, beta))
    }
}

/// Valuation coordinates of a projective point after moving it into the
/// configuration's chart: with α·pt = (z₀ : z₁ : z₂),
/// the result is (val(z₁/z₀), val(z₂/z₀)). A coordinate is +∞ exactly when
/// the corresponding zᵢ vanishes; z₀ = 0 is rejected.
pub fn tropicalize(
    pt: &ProjPoint2,
    cfg: &LineConfig,
    params: &FieldParams,
) -> Result<TropPoint2, TropError> {
    let moved = mat3_apply(cfg.matrix(), pt)?;
    let z = moved.coords();
    if z[0].is_zero() {
        return Err(TropError::FirstCoordinateVanishes);
    }
    let coord = |zi: &BigRational| -> ExtVal {
        if zi.is_zero() {
            ExtVal::Infinity
        } else {
            val(&(zi / &z[0]), params)
        }
    };
    Ok(TropPoint2 {
        x: coord(&z[1]),
        y: coord(&z[2]),
    })
}

/// A bounded edge of a plane tropical curve, joining two vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundedEdge {
    pub a: usize,
    pub b: usize,
    pub weight: u32,
}

/// An unbounded edge: a ray from a vertex in a primitive integer direction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ray {
    pub base: usize,
    pub dir: (i64, i64),
    pub weight: u32,
}

/// A plane tropical curve as an embedded weighted graph: rational vertices,
/// bounded edges, and rays. Transverse crossings of strands need not be
/// (and usually are not) recorded as vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlaneTropicalCurve {
    pub vertices: Vec<(BigRational, BigRational)>,
    pub edges: Vec<BoundedEdge>,
    pub rays: Vec<Ray>,
}

/// Primitive integer vector in the direction of a rational displacement.
pub fn primitive_direction(
    dx: &BigRational,
    dy: &BigRational,
) -> Result<(i64, i64), TropError> {
    if dx.is_zero() && dy.is_zero() {
        return Err(TropError::ZeroLengthEdge(usize::MAX));
    }
    let scale = dx.denom().lcm(dy.denom());
    let ax = (dx * BigRational::from_integer(scale.clone())).to_integer();
    let ay = (dy * BigRational::from_integer(scale)).to_integer();
    let g = ax.gcd(&ay);
    let (px, py) = (ax / &g, ay / &g);
    let to_i64 = |v: BigInt| -> Result<i64, TropError> {
        i64::try_from(v).map_err(|_| TropError::DirectionOverflow)
    };
    Ok((to_i64(px)?, to_i64(py)?))
}

impl PlaneTropicalCurve {
    /// A tropical line: weight-1 rays up, right, and down-left.
    pub fn line(vertex: (BigRational, BigRational)) -> Self {
        PlaneTropicalCurve {
            vertices: vec![vertex],
            edges: Vec::new(),
            rays: vec![
                Ray { base: 0, dir: (0, 1), weight: 1 },
                Ray { base: 0, dir: (1, 0), weight: 1 },
                Ray { base: 0, dir: (-1, -1), weight: 1 },
            ],
        }
    }

    /// Disjoint-union of the underlying graphs (the embedded strands may
    /// still cross).
    pub fn union(&self, other: &PlaneTropicalCurve) -> PlaneTropicalCurve {
        let off = self.vertices.len();
        let mut vertices = self.vertices.clone();
        vertices.extend(other.vertices.iter().cloned());
        let mut edges = self.edges.clone();
        edges.extend(other.edges.iter().map(|e| BoundedEdge {
            a: e.a + off,
            b: e.b + off,
            weight: e.weight,
        }));
        let mut rays = self.rays.clone();
        rays.extend(other.rays.iter().map(|r| Ray {
            base: r.base + off,
            dir: r.dir,
            weight: r.weight,
        }));
        PlaneTropicalCurve {
            vertices,
            edges,
            rays,
        }
    }

    /// Primitive direction of bounded edge `i`, oriented a → b.
    pub fn edge_direction(&self, i: usize) -> Result<(i64, i64), TropError> {
        let e = &self.edges[i];
        let (ax, ay) = &self.vertices[e.a];
        let (bx, by) = &self.vertices[e.b];
        primitive_direction(&(bx - ax), &(by - ay)).map_err(|err| match err {
            TropError::ZeroLengthEdge(_) => TropError::ZeroLengthEdge(i),
            other => other,
        })
    }

    /// Outward (direction, weight) pairs at each vertex, rays and bounded
    /// edges together.
    fn stars(&self) -> Result<Vec<Vec<((i64, i64), u32)>>, TropError> {
        let mut stars = vec![Vec::new(); self.vertices.len()];
        for r in &self.rays {
            stars[r.base].push((r.dir, r.weight));
        }
        for i in 0..self.edges.len() {
            let d = self.edge_direction(i)?;
            let e = &self.edges[i];
            stars[e.a].push((d, e.weight));
            stars[e.b].push(((-d.0, -d.1), e.weight));
        }
        Ok(stars)
    }

    pub fn num_ends(&self) -> usize {
        self.rays.len()
    }
}

/// True iff at every vertex the weighted outgoing primitive directions sum
/// to zero. Zero-length edges fail the check.
pub fn check_balancing(c: &PlaneTropicalCurve) -> bool {
    let Ok(stars) = c.stars() else {
        return false;
    };
    stars.iter().all(|star| {
        let (mut sx, mut sy) = (0i64, 0i64);
        for ((dx, dy), w) in star {
            sx += dx * *w as i64;
            sy += dy * *w as i64;
        }
        sx == 0 && sy == 0
    })
}

/// The degree: d such that the curve has weighted end count d in each of
/// the directions (0,1), (1,0), (−1,−1). Any other end direction, or a
/// lopsided count, is an error.
pub fn degree_of(c: &PlaneTropicalCurve) -> Result<u32, TropError> {
    if c.rays.is_empty() {
        return Err(TropError::NoEnds);
    }
    let (mut up, mut right, mut diag) = (0i64, 0i64, 0i64);
    for r in &c.rays {
        match r.dir {
            (0, 1) => up += r.weight as i64,
            (1, 0) => right += r.weight as i64,
            (-1, -1) => diag += r.weight as i64,
            (dx, dy) => return Err(TropError::NonProjectiveEnd(dx, dy)),
        }
    }
    if up != right || right != diag {
        return Err(TropError::EndCountMismatch { up, right, diag });
    }
    Ok(up as u32)
}

/// Where a finite point sits relative to the curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointLocation {
    Vertex,
    InteriorOfEdge,
    NotOnCurve,
}

/// Exact classification of a finite tropical point against the curve.
pub fn point_on_curve(
    c: &PlaneTropicalCurve,
    q: &TropPoint2,
) -> Result<PointLocation, TropError> {
    let (qx, qy) = q.as_finite().ok_or(TropError::InfiniteCoordinates)?;
    for (vx, vy) in &c.vertices {
        if *vx == qx && *vy == qy {
            return Ok(PointLocation::Vertex);
        }
    }
    let on_segment = |ax: &BigRational,
                      ay: &BigRational,
                      ux: &BigRational,
                      uy: &BigRational,
                      max_t: Option<BigRational>|
     -> bool {
        // q = a + t·u with t in (0, 1) or (0, ∞).
        let (wx, wy) = (&qx - ax, &qy - ay);
        if &wx * uy != &wy * ux {
            return false;
        }
        let t = if !ux.is_zero() { wx / ux } else { wy / uy };
        t > BigRational::zero() && max_t.map_or(true, |m| t < m)
    };
    for e in &c.edges {
        let (ax, ay) = &c.vertices[e.a];
        let (bx, by) = &c.vertices[e.b];
        let (ux, uy) = (bx - ax, by - ay);
        if on_segment(ax, ay, &ux, &uy, Some(BigRational::one())) {
            return Ok(PointLocation::InteriorOfEdge);
        }
    }
    for r in &c.rays {
        let (ax, ay) = &c.vertices[r.base];
        let ux = BigRational::from_integer(BigInt::from(r.dir.0));
        let uy = BigRational::from_integer(BigInt::from(r.dir.1));
        if on_segment(ax, ay, &ux, &uy, None) {
            return Ok(PointLocation::InteriorOfEdge);
        }
    }
    Ok(PointLocation::NotOnCurve)
}

/// A subdivision of the dilated triangle dΔ = conv{(0,0),(d,0),(0,d)} into
/// convex lattice polygons, dual to a plane tropical curve. Cell corners
/// are listed counterclockwise and include points where neighboring cells
/// attach (so a cell's side may be split into several corner-to-corner
/// edges).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualSubdivision {
    pub degree: u32,
    pub cells: Vec<Vec<(i64, i64)>>,
}

impl DualSubdivision {
    /// Twice the area of a cell (shoelace; positive for CCW corners).
    pub fn cell_area2(cell: &[(i64, i64)]) -> i64 {
        let n = cell.len();
        let mut acc = 0i64;
        for i in 0..n {
            let (x1, y1) = cell[i];
            let (x2, y2) = cell[(i + 1) % n];
            acc += x1 * y2 - x2 * y1;
        }
        acc
    }

    /// Subdivision vertices strictly inside dΔ — for a connected curve the
    /// number of these is its first Betti number.
    pub fn interior_vertices_used(&self) -> Vec<(i64, i64)> {
        let d = self.degree as i64;
        let mut pts: Vec<(i64, i64)> = self
            .cells
            .iter()
            .flatten()
            .copied()
            .filter(|&(x, y)| x > 0 && y > 0 && x + y < d)
            .collect();
        pts.sort_unstable();
        pts.dedup();
        pts
    }

    /// Corner-to-corner edges shared by exactly two cells.
    pub fn interior_edges(&self) -> Vec<((i64, i64), (i64, i64))> {
        let mut count: BTreeMap<((i64, i64), (i64, i64)), usize> = BTreeMap::new();
        for cell in &self.cells {
            let n = cell.len();
            for i in 0..n {
                let (u, v) = (cell[i], cell[(i + 1) % n]);
                let key = if u <= v { (u, v) } else { (v, u) };
                *count.entry(key).or_insert(0) += 1;
            }
        }
        count
            .into_iter()
            .filter(|(_, c)| *c == 2)
            .map(|(k, _)| k)
            .collect()
    }
}

type RatPoint = (BigRational, BigRational);

/// An item of the embedded curve: a segment or a ray, with weight.
#[derive(Clone)]
struct Strand {
    start: RatPoint,
    /// For segments the full displacement (parameter range [0,1]); for
    /// rays the primitive direction (range [0,∞)).
    dir: RatPoint,
    bounded: bool,
    weight: u32,
}

fn cross(ax: &BigRational, ay: &BigRational, bx: &BigRational, by: &BigRational) -> BigRational {
    ax * by - ay * bx
}

/// Parameters 0 ≤ t (≤ 1 if bounded) for which start + t·dir passes
/// through q, if any.
fn param_on(s: &Strand, q: &RatPoint) -> Option<BigRational> {
    let (wx, wy) = (&q.0 - &s.start.0, &q.1 - &s.start.1);
    if !cross(&wx, &wy, &s.dir.0, &s.dir.1).is_zero() {
        return None;
    }
    let t = if !s.dir.0.is_zero() {
        wx / &s.dir.0
    } else {
        wy / &s.dir.1
    };
    let lo = t >= BigRational::zero();
    let hi = !s.bounded || t <= BigRational::one();
    (lo && hi).then_some(t)
}

/// Single intersection point of two strands, if transverse. Collinear
/// overlap along a positive-length stretch is an error.
fn strand_intersection(
    a: &Strand,
    b: &Strand,
) -> Result<Option<RatPoint>, TropError> {
    let den = cross(&a.dir.0, &a.dir.1, &b.dir.0, &b.dir.1);
    let (rx, ry) = (&b.start.0 - &a.start.0, &b.start.1 - &a.start.1);
    if den.is_zero() {
        // Parallel. Overlap only if collinear with overlapping ranges.
        if !cross(&rx, &ry, &a.dir.0, &a.dir.1).is_zero() {
            return Ok(None);
        }
        // Endpoints of b relative to a's parametrization.
        let proj = |q: &RatPoint| -> BigRational {
            let (wx, wy) = (&q.0 - &a.start.0, &q.1 - &a.start.1);
            if !a.dir.0.is_zero() {
                wx / &a.dir.0
            } else {
                wy / &a.dir.1
            }
        };
        let t0 = proj(&b.start);
        let zero = BigRational::zero();
        let one = BigRational::one();
        let a_hi = if a.bounded { Some(one.clone()) } else { None };
        // b occupies t ≥ t0 or t ≤ t0 in a's parameter, depending on the
        // relative orientation of the directions.
        let same_dir = if !a.dir.0.is_zero() {
            (&b.dir.0 / &a.dir.0) > zero
        } else {
            (&b.dir.1 / &a.dir.1) > zero
        };
        let (b_lo, b_hi) = if b.bounded {
            let step = if !a.dir.0.is_zero() {
                &b.dir.0 / &a.dir.0
            } else {
                &b.dir.1 / &a.dir.1
            };
            let t1 = &t0 + step;
            (Some(t0.clone().min(t1.clone())), Some(t0.max(t1)))
        } else if same_dir {
            (Some(t0), None)
        } else {
            (None, Some(t0))
        };
        let lo = match b_lo {
            Some(l) => l.max(zero.clone()),
            None => zero.clone(),
        };
        let hi = match (b_hi, a_hi) {
            (Some(x), Some(y)) => Some(x.min(y)),
            (Some(x), None) => Some(x),
            (None, Some(y)) => Some(y),
            (None, None) => None,
        };
        return match hi {
            Some(h) if h < lo => Ok(None),
            Some(h) if h == lo => Ok(Some((
                &a.start.0 + &lo * &a.dir.0,
                &a.start.1 + &lo * &a.dir.1,
            ))),
            _ => Err(TropError::OverlappingStrands),
        };
    }
    let t = cross(&rx, &ry, &b.dir.0, &b.dir.1) / &den;
    let s = cross(&rx, &ry, &a.dir.0, &a.dir.1) / &den;
    let zero = BigRational::zero();
    let one = BigRational::one();
    let t_ok = t >= zero && (!a.bounded || t <= one);
    let s_ok = s >= zero && (!b.bounded || s <= one);
    if t_ok && s_ok {
        Ok(Some((
            &a.start.0 + &t * &a.dir.0,
            &a.start.1 + &t * &a.dir.1,
        )))
    } else {
        Ok(None)
    }
}

/// CCW-from-positive-x angular order on nonzero integer vectors.
fn angle_less(a: (i64, i64), b: (i64, i64)) -> std::cmp::Ordering {
    let half = |v: (i64, i64)| u8::from(!(v.1 > 0 || (v.1 == 0 && v.0 > 0)));
    let (ha, hb) = (half(a), half(b));
    if ha != hb {
        return ha.cmp(&hb);
    }
    let cr = (a.0 as i128) * (b.1 as i128) - (a.1 as i128) * (b.0 as i128);
    cr.cmp(&0).reverse() // positive cross ⇒ a strictly before b
}

/// The dual subdivision of dΔ: one 2-cell per point of the embedded curve
/// where strands meet or bend (recorded vertices and transverse
/// crossings), glued along shared dual edges and translated so the
/// subdivision tiles conv{(0,0),(d,0),(0,d)} exactly.
pub fn dual_subdivision(c: &PlaneTropicalCurve) -> Result<DualSubdivision, TropError> {
    let d = degree_of(c)?;
    for (v, star) in c.stars()?.iter().enumerate() {
        let (mut sx, mut sy) = (0i64, 0i64);
        for ((dx, dy), w) in star {
            sx += dx * *w as i64;
            sy += dy * *w as i64;
        }
        if sx != 0 || sy != 0 {
            return Err(TropError::Unbalanced(v));
        }
    }

    // The embedded strands.
    let mut strands: Vec<Strand> = Vec::new();
    for (i, e) in c.edges.iter().enumerate() {
        let (ax, ay) = c.vertices[e.a].clone();
        let (bx, by) = c.vertices[e.b].clone();
        if ax == bx && ay == by {
            return Err(TropError::ZeroLengthEdge(i));
        }
        strands.push(Strand {
            dir: (&bx - &ax, &by - &ay),
            start: (ax, ay),
            bounded: true,
            weight: e.weight,
        });
    }
    for r in &c.rays {
        strands.push(Strand {
            start: c.vertices[r.base].clone(),
            dir: (
                BigRational::from_integer(BigInt::from(r.dir.0)),
                BigRational::from_integer(BigInt::from(r.dir.1)),
            ),
            bounded: false,
            weight: r.weight,
        });
    }

    // Candidate refined-vertex positions: recorded vertices plus all
    // pairwise strand intersections (transverse crossings, T-points).
    let mut positions: Vec<RatPoint> = c.vertices.clone();
    for i in 0..strands.len() {
        for j in i + 1..strands.len() {
            if let Some(q) = strand_intersection(&strands[i], &strands[j])? {
                positions.push(q);
            }
        }
    }
    positions.sort();
    positions.dedup();
    let vid: BTreeMap<RatPoint, usize> = positions
        .iter()
        .cloned()
        .enumerate()
        .map(|(i, q)| (q, i))
        .collect();

    // Refine each strand at every candidate position on it.
    struct RefEdge {
        a: usize,
        b: usize,
        dir: (i64, i64), // primitive, a → b
        weight: u32,
    }
    let mut ref_edges: Vec<RefEdge> = Vec::new();
    let mut ref_rays: Vec<(usize, (i64, i64), u32)> = Vec::new();
    for s in &strands {
        let mut cuts: Vec<(BigRational, usize)> = positions
            .iter()
            .filter_map(|q| param_on(s, q).map(|t| (t, vid[q])))
            .collect();
        cuts.sort();
        debug_assert!(!cuts.is_empty(), "strand endpoints are candidates");
        let dir = primitive_direction(&s.dir.0, &s.dir.1)?;
        for w in cuts.windows(2) {
            ref_edges.push(RefEdge {
                a: w[0].1,
                b: w[1].1,
                dir,
                weight: s.weight,
            });
        }
        if !s.bounded {
            ref_rays.push((cuts.last().unwrap().1, dir, s.weight));
        }
    }

    // Star of each refined vertex: (outward dir, weight, Some(edge idx)).
    let n_ref = positions.len();
    let mut stars: Vec<Vec<((i64, i64), u32, Option<(usize, bool)>)>> =
        vec![Vec::new(); n_ref];
    for (i, e) in ref_edges.iter().enumerate() {
        stars[e.a].push((e.dir, e.weight, Some((i, false))));
        stars[e.b].push(((-e.dir.0, -e.dir.1), e.weight, Some((i, true))));
    }
    for (base, dir, weight) in &ref_rays {
        stars[*base].push((*dir, *weight, None));
    }

    // Local dual polygon per refined vertex: edge vectors are the 90°
    // clockwise rotations of the outward directions, in angular order.
    // corner_of[edge][end] = local corner where that edge's dual side
    // starts, for gluing.
    let mut local: Vec<Vec<(i64, i64)>> = Vec::with_capacity(n_ref);
    let mut corner_of: BTreeMap<(usize, bool), ((i64, i64), (i64, i64))> = BTreeMap::new();
    for (v, star) in stars.iter().enumerate() {
        let mut star = star.clone();
        star.sort_by(|x, y| angle_less(x.0, y.0));
        let mut corners = Vec::with_capacity(star.len());
        let (mut cx, mut cy) = (0i64, 0i64);
        for ((dx, dy), w, tag) in &star {
            corners.push((cx, cy));
            let (ex, ey) = (*dy * *w as i64, -*dx * *w as i64);
            if let Some(t) = tag {
                corner_of.insert(*t, ((cx, cy), (ex, ey)));
            }
            cx += ex;
            cy += ey;
        }
        if (cx, cy) != (0, 0) {
            return Err(TropError::Unbalanced(v));
        }
        local.push(corners);
    }

    // Glue: BFS over refined edges fixes each polygon's translation.
    let mut offset: Vec<Option<(i64, i64)>> = vec![None; n_ref];
    offset[0] = Some((0, 0));
    let mut queue = std::collections::VecDeque::from([0usize]);
    while let Some(u) = queue.pop_front() {
        let (ox, oy) = offset[u].unwrap();
        for ((_, _), _, tag) in &stars[u] {
            let Some((ei, from_b)) = tag else { continue };
            let e = &ref_edges[*ei];
            let v = if *from_b { e.a } else { e.b };
            if offset[v].is_some() {
                continue;
            }
            // The dual side of edge ei runs from corner s_u to s_u + E in
            // u's polygon and from s_v to s_v − E in v's (E as seen from u).
            let ((sux, suy), (ex, ey)) = corner_of[&(*ei, *from_b)];
            let ((svx, svy), _) = corner_of[&(*ei, !*from_b)];
            offset[v] = Some((ox + sux + ex - svx, oy + suy + ey - svy));
            queue.push_back(v);
        }
    }
    if offset.iter().any(|o| o.is_none()) {
        return Err(TropError::CannotAnchor);
    }

    let mut cells: Vec<Vec<(i64, i64)>> = local
        .iter()
        .zip(offset.iter())
        .map(|(corners, off)| {
            let (ox, oy) = off.unwrap();
            corners.iter().map(|(x, y)| (x + ox, y + oy)).collect()
        })
        .collect();

    // Normalize to the standard triangle and verify the tiling.
    let min_x = cells.iter().flatten().map(|p| p.0).min().unwrap();
    let min_y = cells.iter().flatten().map(|p| p.1).min().unwrap();
    for cell in &mut cells {
        for p in cell.iter_mut() {
            *p = (p.0 - min_x, p.1 - min_y);
        }
    }
    let dd = d as i64;
    let inside = cells
        .iter()
        .flatten()
        .all(|&(x, y)| x >= 0 && y >= 0 && x + y <= dd);
    let area2: i64 = cells.iter().map(|c| DualSubdivision::cell_area2(c)).sum();
    if !inside || area2 != dd * dd {
        return Err(TropError::DualityFailed);
    }
    Ok(DualSubdivision { degree: d, cells })
}
