//! Deterministic SVG and DOT renderings of dendrograms, plane tropical
//! curves, and discrete measures.
//!
//! Output is byte-identical for identical input: element order is fixed,
//! all coordinates are formatted with a fixed precision, and no
//! timestamps or environment data enter the text. Dendrograms are drawn
//! with ends at the bottom and vertex height given by disc valuation
//! (depth increases downward); tropical curves keep the mathematical
//! orientation (y upward) with rays clipped to a padded bounding box.

use num::{BigRational, ToPrimitive};
use thiserror::Error;

use crate::btree::MarkedTree;
use crate::clmeasure::DiscreteMeasure;
use crate::tropical::PlaneTropicalCurve;

#[derive(Debug, Error, PartialEq, Eq, Clone)]
pub enum RenderError {
    #[error("expected {expected} end labels, got {got}")]
    LabelCount { expected: usize, got: usize },
    #[error("nothing to draw")]
    EmptyObject,
    #[error("geometry does not fit in floating point")]
    NonFinite,
}

const WIDTH: f64 = 480.0;
const HEIGHT: f64 = 360.0;
const MARGIN: f64 = 40.0;

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn fmt(v: f64) -> String {
    // normalize negative zero so formatting is a function of the value
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{:.2}", v)
}

fn svg_open(parts: &mut Vec<String>) {
    parts.push(format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">",
        WIDTH as u32, HEIGHT as u32, WIDTH as u32, HEIGHT as u32
    ));
}

fn line_el(parts: &mut Vec<String>, x1: f64, y1: f64, x2: f64, y2: f64, width: f64) {
    parts.push(format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\" stroke-width=\"{}\"/>",
        fmt(x1),
        fmt(y1),
        fmt(x2),
        fmt(y2),
        fmt(width)
    ));
}

fn circle_el(parts: &mut Vec<String>, x: f64, y: f64, r: f64) {
    parts.push(format!(
        "<circle cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"black\"/>",
        fmt(x),
        fmt(y),
        fmt(r)
    ));
}

fn text_el(parts: &mut Vec<String>, x: f64, y: f64, s: &str) {
    parts.push(format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"12\">{}</text>",
        fmt(x),
        fmt(y),
        xml_escape(s)
    ));
}

fn rational_f64(x: &BigRational) -> Result<f64, RenderError> {
    match x.to_f64() {
        Some(v) if v.is_finite() => Ok(v),
        _ => Err(RenderError::NonFinite),
    }
}

/// One-dimensional affine fit of [lo, hi] onto the pixel span, safe for
/// degenerate (single-point) ranges.
struct Axis {
    lo: f64,
    scale: f64,
    offset: f64,
}

impl Axis {
    fn fit(lo: f64, hi: f64, pixel_lo: f64, pixel_hi: f64) -> Axis {
        let span = hi - lo;
        if span <= 0.0 {
            return Axis {
                lo,
                scale: 0.0,
                offset: (pixel_lo + pixel_hi) / 2.0,
            };
        }
        Axis {
            lo,
            scale: (pixel_hi - pixel_lo) / span,
            offset: pixel_lo,
        }
    }

    fn map(&self, v: f64) -> f64 {
        self.offset + (v - self.lo) * self.scale
    }
}

struct TreeLayout {
    /// abstract x (end-slot units) and y (valuation units) per vertex
    xs: Vec<f64>,
    ys: Vec<f64>,
    end_x: Vec<f64>,
    y_bottom: f64,
}

fn layout_tree(tree: &MarkedTree) -> Result<TreeLayout, RenderError> {
    let nv = tree.num_vertices();
    let n = tree.num_ends();
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); nv];
    for (a, b, len) in tree.edges() {
        let l = rational_f64(len)?;
        adj[*a].push((*b, l));
        adj[*b].push((*a, l));
    }
    let mut attached: Vec<Vec<usize>> = vec![Vec::new(); nv];
    for (label, &v) in tree.ends().iter().enumerate() {
        attached[v].push(label);
    }

    let depths: Option<Vec<f64>> = (0..nv)
        .map(|v| tree.depth(v).map(rational_f64).transpose())
        .collect::<Result<Option<Vec<f64>>, _>>()?;
    let root = match &depths {
        Some(ds) => ds
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.partial_cmp(b.1).expect("finite depths"))
            .map(|(i, _)| i)
            .unwrap_or(0),
        None => 0,
    };

    // vertical position: disc valuation when known, else path length
    let mut ys = vec![0.0f64; nv];
    let mut seen = vec![false; nv];
    let mut stack = vec![(root, usize::MAX)];
    let mut order = Vec::with_capacity(nv);
    seen[root] = true;
    while let Some((v, parent)) = stack.pop() {
        order.push(v);
        for &(u, l) in &adj[v] {
            if u != parent && !seen[u] {
                seen[u] = true;
                ys[u] = ys[v] + l;
                stack.push((u, v));
            }
        }
    }
    if let Some(ds) = &depths {
        ys.copy_from_slice(ds);
    }

    // horizontal position: depth-first slot assignment, branches ordered
    // by their smallest end label so the layout is input-determined
    fn min_label(
        v: usize,
        parent: usize,
        adj: &[Vec<(usize, f64)>],
        attached: &[Vec<usize>],
    ) -> usize {
        let mut best = attached[v].iter().copied().min().unwrap_or(usize::MAX);
        for &(u, _) in &adj[v] {
            if u != parent {
                best = best.min(min_label(u, v, adj, attached));
            }
        }
        best
    }

    #[allow(clippy::too_many_arguments)]
    fn assign(
        v: usize,
        parent: usize,
        adj: &[Vec<(usize, f64)>],
        attached: &[Vec<usize>],
        next_slot: &mut f64,
        end_x: &mut [f64],
        xs: &mut [f64],
    ) -> (f64, f64) {
        enum Item {
            End(usize),
            Child(usize),
        }
        let mut items: Vec<(usize, Item)> = attached[v]
            .iter()
            .map(|&l| (l, Item::End(l)))
            .collect();
        for &(u, _) in &adj[v] {
            if u != parent {
                items.push((min_label(u, v, adj, attached), Item::Child(u)));
            }
        }
        items.sort_by_key(|(key, _)| *key);
        let (mut sum, mut count) = (0.0f64, 0.0f64);
        for (_, item) in items {
            match item {
                Item::End(l) => {
                    end_x[l] = *next_slot;
                    sum += *next_slot;
                    count += 1.0;
                    *next_slot += 1.0;
                }
                Item::Child(u) => {
                    let (s, c) = assign(u, v, adj, attached, next_slot, end_x, xs);
                    sum += s;
                    count += c;
                }
            }
        }
        xs[v] = if count > 0.0 { sum / count } else { *next_slot };
        (sum, count)
    }

    let mut xs = vec![0.0f64; nv];
    let mut end_x = vec![0.0f64; n];
    let mut next_slot = 0.0f64;
    assign(root, usize::MAX, &adj, &attached, &mut next_slot, &mut end_x, &mut xs);

    let y_max = ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let y_min = ys.iter().cloned().fold(f64::INFINITY, f64::min);
    let drop = ((y_max - y_min) * 0.25).max(1.0);
    Ok(TreeLayout {
        xs,
        ys,
        end_x,
        y_bottom: y_max + drop,
    })
}

/// Dendrogram SVG: ends at the bottom labeled left to right, internal
/// vertices at heights given by their disc valuations.
pub fn svg_marked_tree(tree: &MarkedTree, labels: &[String]) -> Result<String, RenderError> {
    let n = tree.num_ends();
    if labels.len() != n {
        return Err(RenderError::LabelCount {
            expected: n,
            got: labels.len(),
        });
    }
    let layout = layout_tree(tree)?;
    let y_min = layout.ys.iter().cloned().fold(f64::INFINITY, f64::min);
    let x_axis = Axis::fit(-0.5, n as f64 - 0.5, MARGIN, WIDTH - MARGIN);
    let y_axis = Axis::fit(y_min, layout.y_bottom, MARGIN, HEIGHT - 2.0 * MARGIN);

    let mut parts = Vec::new();
    svg_open(&mut parts);
    for (a, b, _) in tree.edges() {
        line_el(
            &mut parts,
            x_axis.map(layout.xs[*a]),
            y_axis.map(layout.ys[*a]),
            x_axis.map(layout.xs[*b]),
            y_axis.map(layout.ys[*b]),
            1.5,
        );
    }
    for (label, &v) in tree.ends().iter().enumerate() {
        let ex = x_axis.map(layout.end_x[label]);
        line_el(
            &mut parts,
            x_axis.map(layout.xs[v]),
            y_axis.map(layout.ys[v]),
            ex,
            y_axis.map(layout.y_bottom),
            1.5,
        );
        text_el(&mut parts, ex, y_axis.map(layout.y_bottom) + 16.0, &labels[label]);
    }
    for v in 0..tree.num_vertices() {
        circle_el(&mut parts, x_axis.map(layout.xs[v]), y_axis.map(layout.ys[v]), 3.0);
    }
    parts.push("</svg>".into());
    Ok(parts.join("\n"))
}

/// Graphviz DOT for a dendrogram: internal vertices as points, ends as
/// plain labels, internal edges annotated with their exact lengths.
pub fn dot_marked_tree(tree: &MarkedTree, labels: &[String]) -> Result<String, RenderError> {
    let n = tree.num_ends();
    if labels.len() != n {
        return Err(RenderError::LabelCount {
            expected: n,
            got: labels.len(),
        });
    }
    let mut out = String::from("graph dendrogram {\n");
    for v in 0..tree.num_vertices() {
        out.push_str(&format!("  v{} [shape=point];\n", v));
    }
    for (label, text) in labels.iter().enumerate() {
        out.push_str(&format!(
            "  e{} [shape=plaintext, label=\"{}\"];\n",
            label,
            text.replace('"', "\\\"")
        ));
    }
    for (a, b, len) in tree.edges() {
        out.push_str(&format!("  v{} -- v{} [label=\"{}\"];\n", a, b, len));
    }
    for (label, &v) in tree.ends().iter().enumerate() {
        out.push_str(&format!("  v{} -- e{};\n", v, label));
    }
    out.push_str("}\n");
    Ok(out)
}

/// Plane tropical curve SVG, mathematical orientation (y upward). Rays
/// are clipped to the 10%-padded bounding box of the vertices; weights
/// of 2 and above are printed at segment midpoints.
pub fn svg_tropical_curve(curve: &PlaneTropicalCurve) -> Result<String, RenderError> {
    if curve.vertices.is_empty() {
        return Err(RenderError::EmptyObject);
    }
    let pts: Vec<(f64, f64)> = curve
        .vertices
        .iter()
        .map(|(x, y)| Ok((rational_f64(x)?, rational_f64(y)?)))
        .collect::<Result<_, RenderError>>()?;
    let (mut x_lo, mut x_hi, mut y_lo, mut y_hi) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in &pts {
        x_lo = x_lo.min(x);
        x_hi = x_hi.max(x);
        y_lo = y_lo.min(y);
        y_hi = y_hi.max(y);
    }
    let extent = (x_hi - x_lo).max(y_hi - y_lo);
    let pad = if extent > 0.0 { 0.1 * extent } else { 1.0 };
    let (x_lo, x_hi, y_lo, y_hi) = (x_lo - pad, x_hi + pad, y_lo - pad, y_hi + pad);

    // uniform scale so directions are preserved; y flipped for screen
    let scale = ((WIDTH - 2.0 * MARGIN) / (x_hi - x_lo)).min((HEIGHT - 2.0 * MARGIN) / (y_hi - y_lo));
    let cx = (WIDTH - scale * (x_hi - x_lo)) / 2.0;
    let cy = (HEIGHT - scale * (y_hi - y_lo)) / 2.0;
    let px = |x: f64| cx + (x - x_lo) * scale;
    let py = |y: f64| HEIGHT - cy - (y - y_lo) * scale;

    let mut parts = Vec::new();
    svg_open(&mut parts);
    let mut weight_labels: Vec<(f64, f64, u32)> = Vec::new();
    for e in &curve.edges {
        let (ax, ay) = pts[e.a];
        let (bx, by) = pts[e.b];
        line_el(&mut parts, px(ax), py(ay), px(bx), py(by), 1.5 + 0.5 * (e.weight.saturating_sub(1)) as f64);
        if e.weight >= 2 {
            weight_labels.push(((ax + bx) / 2.0, (ay + by) / 2.0, e.weight));
        }
    }
    for r in &curve.rays {
        let (bx, by) = pts[r.base];
        let (dx, dy) = (r.dir.0 as f64, r.dir.1 as f64);
        let mut t = f64::INFINITY;
        if dx > 0.0 {
            t = t.min((x_hi - bx) / dx);
        } else if dx < 0.0 {
            t = t.min((x_lo - bx) / dx);
        }
        if dy > 0.0 {
            t = t.min((y_hi - by) / dy);
        } else if dy < 0.0 {
            t = t.min((y_lo - by) / dy);
        }
        let (ex, ey) = (bx + t * dx, by + t * dy);
        line_el(&mut parts, px(bx), py(by), px(ex), py(ey), 1.5 + 0.5 * (r.weight.saturating_sub(1)) as f64);
        if r.weight >= 2 {
            weight_labels.push(((bx + ex) / 2.0, (by + ey) / 2.0, r.weight));
        }
    }
    for &(x, y) in &pts {
        circle_el(&mut parts, px(x), py(y), 3.0);
    }
    for (x, y, w) in weight_labels {
        text_el(&mut parts, px(x) + 8.0, py(y) - 6.0, &w.to_string());
    }
    parts.push("</svg>".into());
    Ok(parts.join("\n"))
}

/// Bar chart of a discrete measure on [0,1]: one bar per atom, height
/// proportional to mass, exact masses printed above the bars.
pub fn svg_measure_bars(measure: &DiscreteMeasure) -> Result<String, RenderError> {
    if measure.atoms.is_empty() {
        return Err(RenderError::EmptyObject);
    }
    let positions: Vec<f64> = measure
        .atoms
        .iter()
        .map(|(x, _)| rational_f64(x))
        .collect::<Result<_, _>>()?;
    let masses: Vec<f64> = measure
        .atoms
        .iter()
        .map(|(_, m)| rational_f64(m))
        .collect::<Result<_, _>>()?;
    let max_mass = masses.iter().cloned().fold(0.0f64, f64::max);
    if max_mass <= 0.0 {
        return Err(RenderError::EmptyObject);
    }
    let mut min_gap = 0.5f64;
    for w in positions.windows(2) {
        min_gap = min_gap.min((w[1] - w[0]).abs());
    }
    let bar_w = (min_gap * 0.6).max(0.01);

    let x_axis = Axis::fit(-0.1, 1.1, MARGIN, WIDTH - MARGIN);
    let base_y = HEIGHT - 2.0 * MARGIN;
    let usable = HEIGHT - 4.0 * MARGIN;

    let mut parts = Vec::new();
    svg_open(&mut parts);
    line_el(&mut parts, x_axis.map(0.0), base_y, x_axis.map(1.0), base_y, 1.0);
    for ((x, mf), (pos, mass)) in positions.iter().zip(&masses).zip(&measure.atoms) {
        let h = usable * mf / max_mass;
        let left = x_axis.map(x - bar_w / 2.0);
        let width = x_axis.map(x + bar_w / 2.0) - left;
        parts.push(format!(
            "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"#5577aa\"/>",
            fmt(left),
            fmt(base_y - h),
            fmt(width),
            fmt(h)
        ));
        text_el(&mut parts, x_axis.map(*x), base_y - h - 8.0, &mass.to_string());
        text_el(&mut parts, x_axis.map(*x), base_y + 16.0, &pos.to_string());
    }
    parts.push("</svg>".into());
    Ok(parts.join("\n"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::btree::build_dendrogram;
    use crate::clmeasure::cl_chain_measure;
    use crate::padic::{FieldParams, ProjPoint1};
    use num::{BigInt, One, Zero};

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn extract_lines(svg: &str) -> Vec<(f64, f64, f64, f64)> {
        svg.lines()
            .filter(|l| l.starts_with("<line"))
            .map(|l| {
                let grab = |attr: &str| -> f64 {
                    let key = format!("{}=\"", attr);
                    let start = l.find(&key).unwrap() + key.len();
                    let end = l[start..].find('"').unwrap() + start;
                    l[start..end].parse().unwrap()
                };
                (grab("x1"), grab("y1"), grab("x2"), grab("y2"))
            })
            .collect()
    }

    #[test]
    fn tropical_line_has_three_rays() {
        let curve = PlaneTropicalCurve::line((BigRational::zero(), BigRational::zero()));
        let svg = svg_tropical_curve(&curve).unwrap();
        assert_eq!(svg, svg_tropical_curve(&curve).unwrap()); // byte-stable
        let lines = extract_lines(&svg);
        assert_eq!(lines.len(), 3);
        // recover directions in math coordinates (SVG y is flipped)
        let mut dirs: Vec<(i32, i32)> = lines
            .iter()
            .map(|&(x1, y1, x2, y2)| {
                let (dx, dy) = (x2 - x1, -(y2 - y1));
                let norm = dx.abs().max(dy.abs());
                ((dx / norm).round() as i32, (dy / norm).round() as i32)
            })
            .collect();
        dirs.sort();
        assert_eq!(dirs, vec![(-1, -1), (0, 1), (1, 0)]);
        assert_eq!(svg.matches("<circle").count(), 1);
    }

    #[test]
    fn star_tree_renders_four_leaf_edges() {
        let params = FieldParams::new(5, 1).unwrap();
        let points = vec![
            ProjPoint1::from_affine(BigRational::zero()),
            ProjPoint1::from_affine(BigRational::one()),
            ProjPoint1::from_affine(rat(2, 1)),
            ProjPoint1::infinity(),
        ];
        let tree = build_dendrogram(&points, &params).unwrap();
        assert!(tree.comb_type().splits().is_empty()); // a star
        let labels: Vec<String> = ["0", "1", "2", "inf"].iter().map(|s| s.to_string()).collect();
        let svg = svg_marked_tree(&tree, &labels).unwrap();
        assert_eq!(svg, svg_marked_tree(&tree, &labels).unwrap());
        assert_eq!(svg.matches("<line").count(), 4); // four end edges, no internal ones
        assert_eq!(svg.matches("<circle").count(), 1); // single internal vertex
        assert_eq!(svg.matches("<text").count(), 4);
        for l in &labels {
            assert!(svg.contains(l.as_str()));
        }

        let err = svg_marked_tree(&tree, &labels[..3].to_vec());
        assert_eq!(err, Err(RenderError::LabelCount { expected: 4, got: 3 }));
    }

    #[test]
    fn deeper_tree_separates_heights() {
        let params = FieldParams::new(5, 1).unwrap();
        // 0 and 5 merge at valuation 1, deeper than the star vertex
        let points = vec![
            ProjPoint1::from_affine(BigRational::zero()),
            ProjPoint1::from_affine(rat(5, 1)),
            ProjPoint1::from_affine(BigRational::one()),
            ProjPoint1::infinity(),
        ];
        let tree = build_dendrogram(&points, &params).unwrap();
        assert_eq!(tree.comb_type().splits().len(), 1);
        let labels: Vec<String> = ["0", "5", "1", "inf"].iter().map(|s| s.to_string()).collect();
        let svg = svg_marked_tree(&tree, &labels).unwrap();
        // 2 internal vertices joined by 1 internal edge + 4 end edges
        assert_eq!(svg.matches("<circle").count(), 2);
        assert_eq!(svg.matches("<line").count(), 5);

        let dot = dot_marked_tree(&tree, &labels).unwrap();
        assert_eq!(dot, dot_marked_tree(&tree, &labels).unwrap());
        assert!(dot.starts_with("graph dendrogram {"));
        assert_eq!(dot.matches("shape=point").count(), 2);
        assert_eq!(dot.matches("shape=plaintext").count(), 4);
        assert_eq!(dot.matches(" -- ").count(), 5);
        assert!(dot.contains("label=\"1\"")); // the internal edge length
    }

    #[test]
    fn measure_bars_show_exact_masses() {
        let m = cl_chain_measure(2).unwrap();
        let svg = svg_measure_bars(&m).unwrap();
        assert_eq!(svg, svg_measure_bars(&m).unwrap());
        assert_eq!(svg.matches("<rect").count(), 3);
        assert!(svg.contains(">1/4<"));
        assert!(svg.contains(">1/2<"));
        // the middle bar is twice the height of the end bars
        let heights: Vec<f64> = svg
            .lines()
            .filter(|l| l.starts_with("<rect"))
            .map(|l| {
                let key = "height=\"";
                let start = l.find(key).unwrap() + key.len();
                let end = l[start..].find('"').unwrap() + start;
                l[start..end].parse::<f64>().unwrap()
            })
            .collect();
        assert!((heights[1] - 2.0 * heights[0]).abs() < 0.05);
        assert!((heights[0] - heights[2]).abs() < 0.01);

        let empty = DiscreteMeasure { atoms: vec![] };
        assert_eq!(svg_measure_bars(&empty), Err(RenderError::EmptyObject));
    }

    #[test]
    fn weighted_curve_labels_multiplicity() {
        // a weight-2 horizontal strand: two vertices, balanced by rays
        let curve = PlaneTropicalCurve {
            vertices: vec![(rat(0, 1), rat(0, 1)), (rat(3, 1), rat(0, 1))],
            edges: vec![crate::tropical::BoundedEdge { a: 0, b: 1, weight: 2 }],
            rays: vec![
                crate::tropical::Ray { base: 0, dir: (-1, 0), weight: 2 },
                crate::tropical::Ray { base: 1, dir: (1, 0), weight: 2 },
            ],
        };
        let svg = svg_tropical_curve(&curve).unwrap();
        assert_eq!(svg.matches("<line").count(), 3);
        assert_eq!(svg.matches(">2<").count(), 3);
    }
}
