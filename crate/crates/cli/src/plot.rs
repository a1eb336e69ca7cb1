//! SVG export: sampled points plus the zero level of each eliminant
//! polynomial, traced by marching squares on a 400x400 grid.

use std::fmt::Write;

use parelim::eliminate::EliminantSystem;
use parelim::polyring::Polynomial;

const GRID: usize = 400;
const SIZE: f64 = 480.0;
const MARGIN: f64 = 40.0;

/// Bounding box of the points inflated by 20% (10% on each side).
fn bounds(points: &[Vec<f64>]) -> [(f64, f64); 2] {
    let mut b = [(f64::INFINITY, f64::NEG_INFINITY); 2];
    for p in points {
        for (k, r) in b.iter_mut().enumerate() {
            r.0 = r.0.min(p[k]);
            r.1 = r.1.max(p[k]);
        }
    }
    b.map(|(lo, hi)| {
        let span = hi - lo;
        let pad = if span > 0.0 { 0.1 * span } else { 0.5 * lo.abs().max(1.0) };
        (lo - pad, hi + pad)
    })
}

pub type Segment = [(f64, f64); 2];

/// Zero-level segments of `t` over the box, in data coordinates.
pub fn zero_level(t: &Polynomial, b: [(f64, f64); 2], n: usize) -> Vec<Segment> {
    let xs: Vec<f64> = (0..=n).map(|i| b[0].0 + (b[0].1 - b[0].0) * i as f64 / n as f64).collect();
    let ys: Vec<f64> = (0..=n).map(|j| b[1].0 + (b[1].1 - b[1].0) * j as f64 / n as f64).collect();
    let v: Vec<Vec<f64>> = xs.iter().map(|&x| ys.iter().map(|&y| t.eval(&[x, y])).collect()).collect();
    let mut segs = Vec::new();
    for i in 0..n {
        for j in 0..n {
            // corners counter-clockwise from bottom-left
            let c = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)];
            let val = c.map(|(a, b)| v[a][b]);
            let pos = c.map(|(a, b)| (xs[a], ys[b]));
            let mut cuts = Vec::new();
            for e in 0..4 {
                let (a, b) = (e, (e + 1) % 4);
                if (val[a] > 0.0) != (val[b] > 0.0) {
                    let f = val[a] / (val[a] - val[b]);
                    cuts.push((pos[a].0 + f * (pos[b].0 - pos[a].0), pos[a].1 + f * (pos[b].1 - pos[a].1)));
                }
            }
            match cuts.len() {
                2 => segs.push([cuts[0], cuts[1]]),
                4 => {
                    // saddle: pair the edges according to the sign at the center
                    let center = t.eval(&[(pos[0].0 + pos[2].0) / 2.0, (pos[0].1 + pos[2].1) / 2.0]);
                    if (center > 0.0) == (val[0] > 0.0) {
                        segs.push([cuts[0], cuts[1]]);
                        segs.push([cuts[2], cuts[3]]);
                    } else {
                        segs.push([cuts[0], cuts[3]]);
                        segs.push([cuts[1], cuts[2]]);
                    }
                }
                _ => {}
            }
        }
    }
    segs
}

pub fn render(points: &[Vec<f64>], t: Option<&EliminantSystem>) -> Result<String, String> {
    if points.is_empty() {
        return Err("no points to plot".into());
    }
    if points[0].len() != 2 {
        return Err(format!("plots need two objectives, got {}", points[0].len()));
    }
    if let Some(t) = t {
        if t.num_objectives() != 2 {
            return Err(format!("eliminant has {} objectives, plots need two", t.num_objectives()));
        }
    }
    let b = bounds(points);
    let inner = SIZE - 2.0 * MARGIN;
    let px = |x: f64| MARGIN + (x - b[0].0) / (b[0].1 - b[0].0) * inner;
    let py = |y: f64| SIZE - MARGIN - (y - b[1].0) / (b[1].1 - b[1].0) * inner;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(svg, r#"<rect x="0" y="0" width="{SIZE}" height="{SIZE}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{inner}" height="{inner}" fill="none" stroke="black"/>"#
    );
    let label = |s: &mut String, x: f64, y: f64, anchor: &str, text: String| {
        let _ = writeln!(
            s,
            r#"<text x="{x:.1}" y="{y:.1}" font-size="11" font-family="sans-serif" text-anchor="{anchor}">{text}</text>"#
        );
    };
    label(&mut svg, MARGIN, SIZE - MARGIN + 14.0, "start", format!("{:.4}", b[0].0));
    label(&mut svg, SIZE - MARGIN, SIZE - MARGIN + 14.0, "end", format!("{:.4}", b[0].1));
    label(&mut svg, SIZE / 2.0, SIZE - 8.0, "middle", "s1".into());
    label(&mut svg, MARGIN - 4.0, SIZE - MARGIN, "end", format!("{:.3}", b[1].0));
    label(&mut svg, MARGIN - 4.0, MARGIN + 10.0, "end", format!("{:.3}", b[1].1));
    label(&mut svg, 12.0, SIZE / 2.0, "middle", "s2".into());

    if let Some(t) = t {
        for poly in &t.polynomials {
            let mut d = String::new();
            for [p, q] in zero_level(poly, b, GRID) {
                let _ = write!(d, "M{:.2} {:.2}L{:.2} {:.2}", px(p.0), py(p.1), px(q.0), py(q.1));
            }
            if !d.is_empty() {
                let _ = writeln!(svg, r#"<path d="{d}" fill="none" stroke="steelblue" stroke-width="1.5"/>"#);
            }
        }
    }
    for p in points {
        let _ = writeln!(svg, r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="black"/>"#, px(p[0]), py(p[1]));
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use parelim::polyring::{Role, VariableSpace};

    #[test]
    fn circle_segments_lie_on_circle() {
        let space = VariableSpace::uniform(["s1", "s2"], Role::Objective).unwrap();
        let c = Polynomial::parse(&space, "s1^2 + s2^2 - 1").unwrap();
        let segs = zero_level(&c, [(-1.5, 1.5), (-1.5, 1.5)], 60);
        assert!(segs.len() > 100);
        for [p, q] in segs {
            for (x, y) in [p, q] {
                assert!(((x * x + y * y).sqrt() - 1.0).abs() < 2e-3);
            }
        }
    }

    #[test]
    fn box_is_inflated() {
        let b = bounds(&[vec![0.0, 1.0], vec![10.0, 3.0]]);
        assert_eq!(b[0], (-1.0, 11.0));
        assert!((b[1].0 - 0.8).abs() < 1e-12 && (b[1].1 - 3.2).abs() < 1e-12);
    }

    #[test]
    fn rejects_three_objectives() {
        assert!(render(&[vec![0.0, 1.0, 2.0]], None).is_err());
    }
}
