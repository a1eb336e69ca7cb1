//! Weighted-sum sampling of the Pareto front, used to validate eliminants
//! independently of the Macaulay machinery.

use std::io::{BufRead, Write};

use crate::eliminate::EliminantSystem;
use crate::error::{Error, Result};
use crate::front::{recover_decisions, ParetoPoint, PointResiduals, RecoverOptions};
use crate::problem::MOProblem;

/// Interior offset for grid weights on the simplex boundary.
pub const GRID_EPS: f64 = 1e-4;

/// Minimizes `w^T f(x)` over the feasible set by picking the critical point
/// with the smallest weighted objective.
pub fn weighted_sum_solve(p: &MOProblem, w: &[f64], opts: &RecoverOptions) -> Result<ParetoPoint> {
    weighted_sum_solve_seeded(p, w, &[], opts)
}

pub fn weighted_sum_solve_seeded(
    p: &MOProblem,
    w: &[f64],
    seeds: &[Vec<f64>],
    opts: &RecoverOptions,
) -> Result<ParetoPoint> {
    if w.iter().any(|&v| !(v > 0.0)) || (w.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidProblem(format!(
            "weights must be positive and sum to one, got {w:?}"
        )));
    }
    let best = recover_decisions(p, w, seeds, opts)?.swap_remove(0);
    Ok(ParetoPoint {
        s: best.s,
        w: Some(w.to_vec()),
        x: Some(best.x),
        lambda: Some(best.lambda),
        residuals: PointResiduals {
            kkt: Some(best.kkt_residual),
            objective: Some(0.0),
            eliminant: None,
        },
    })
}

/// All compositions of `resolution - 1` into `m` parts, normalized, clamped
/// to `eps` and renormalized, in lexicographic order.
pub fn simplex_grid(m: usize, resolution: usize, eps: f64) -> Vec<Vec<f64>> {
    let total = resolution.saturating_sub(1);
    let mut out = Vec::new();
    let mut parts = vec![0usize; m];
    compositions(total, 0, &mut parts, &mut out);
    let denom = total.max(1) as f64;
    let mut grid: Vec<Vec<f64>> = out
        .into_iter()
        .map(|c| {
            let raw: Vec<f64> = c.iter().map(|&k| (k as f64 / denom).max(eps)).collect();
            let sum: f64 = raw.iter().sum();
            raw.iter().map(|v| v / sum).collect()
        })
        .collect();
    grid.sort_by(|a, b| a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal));
    grid.dedup();
    grid
}

fn compositions(left: usize, i: usize, parts: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if i + 1 == parts.len() {
        parts[i] = left;
        out.push(parts.clone());
        return;
    }
    for k in 0..=left {
        parts[i] = k;
        compositions(left - k, i + 1, parts, out);
    }
}

#[derive(Clone, Debug, Default)]
pub struct FrontSample {
    /// Nondominated points in grid order.
    pub points: Vec<ParetoPoint>,
    /// Grid weights where no critical point was found.
    pub failed: usize,
    /// Solved points removed by the dominance filter.
    pub dominated: usize,
}

/// Solves the weighted-sum problem on a simplex grid and keeps the
/// nondominated results.
pub fn sample_front(p: &MOProblem, resolution: usize, opts: &RecoverOptions) -> Result<FrontSample> {
    if resolution < 2 {
        return Err(Error::InvalidProblem("grid resolution must be at least 2".into()));
    }
    sample_weights(p, &simplex_grid(p.num_objectives(), resolution, GRID_EPS), opts)
}

/// [`sample_front`] restricted to the grid weights that need no clamping.
/// On unbounded fronts the clamped weights push `s` to magnitudes where a
/// polynomial cannot be evaluated to an absolute accuracy of 1e-8.
pub fn sample_interior_front(p: &MOProblem, resolution: usize, opts: &RecoverOptions) -> Result<FrontSample> {
    if resolution < p.num_objectives() + 1 {
        return Err(Error::InvalidProblem(format!(
            "an interior grid for {} objectives needs resolution at least {}",
            p.num_objectives(),
            p.num_objectives() + 1
        )));
    }
    let weights: Vec<Vec<f64>> = simplex_grid(p.num_objectives(), resolution, GRID_EPS)
        .into_iter()
        .filter(|w| w.iter().all(|&v| v > 2.0 * GRID_EPS))
        .collect();
    sample_weights(p, &weights, opts)
}

fn sample_weights(p: &MOProblem, weights: &[Vec<f64>], opts: &RecoverOptions) -> Result<FrontSample> {
    let mut solved = Vec::new();
    let mut failed = 0;
    for w in weights {
        match weighted_sum_solve(p, w, opts) {
            Ok(pt) => solved.push(pt),
            Err(e) if e.is_numerical() => failed += 1,
            Err(e) => return Err(e),
        }
    }
    let s: Vec<Vec<f64>> = solved.iter().map(|pt| pt.s.clone()).collect();
    let keep = nondominated_indices(&s);
    let dominated = solved.len() - keep.len();
    let points = keep.into_iter().map(|i| solved[i].clone()).collect();
    Ok(FrontSample {
        points,
        failed,
        dominated,
    })
}

/// True when `a` is no worse than `b` everywhere and strictly better somewhere.
pub fn dominates(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y) && a.iter().zip(b).any(|(x, y)| x < y)
}

/// Indices of the points not dominated by any other, in input order.
pub fn nondominated_indices(points: &[Vec<f64>]) -> Vec<usize> {
    (0..points.len())
        .filter(|&i| !points.iter().any(|q| dominates(q, &points[i])))
        .collect()
}

pub fn dominance_filter(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    nondominated_indices(points).into_iter().map(|i| points[i].clone()).collect()
}

/// Fills in the eliminant residual of every point.
pub fn attach_eliminant_residuals(points: &mut [ParetoPoint], t: &EliminantSystem) {
    for pt in points {
        pt.residuals.eliminant = Some(t.max_residual(&pt.s));
    }
}

fn fmt(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x:.16e}"),
        None => "nan".into(),
    }
}

/// CSV with columns `s1..sm, w1..wm, kkt_residual, eliminant_residual`.
pub fn write_csv<W: Write>(mut out: W, points: &[ParetoPoint], m: usize) -> Result<()> {
    let mut header: Vec<String> = (1..=m).map(|i| format!("s{i}")).collect();
    header.extend((1..=m).map(|i| format!("w{i}")));
    header.push("kkt_residual".into());
    header.push("eliminant_residual".into());
    writeln!(out, "{}", header.join(","))?;
    for pt in points {
        let mut row: Vec<String> = pt.s.iter().map(|&v| fmt(Some(v))).collect();
        match &pt.w {
            Some(w) => row.extend(w.iter().map(|&v| fmt(Some(v)))),
            None => row.extend((0..m).map(|_| fmt(None))),
        }
        row.push(fmt(pt.residuals.kkt));
        row.push(fmt(pt.residuals.eliminant));
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

/// Objective columns `s1..sm` of a CSV written by [`write_csv`]. Lines
/// starting with `#` are skipped.
pub fn read_csv_objectives<R: BufRead>(input: R) -> Result<Vec<Vec<f64>>> {
    let mut lines = input
        .lines()
        .enumerate()
        .filter(|(_, l)| !matches!(l, Ok(text) if text.starts_with('#')));
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::InvalidProblem("empty CSV".into()))?;
    let header = header?;
    let cols: Vec<usize> = header
        .split(',')
        .enumerate()
        .filter(|(_, h)| h.trim().starts_with('s') && h.trim()[1..].parse::<usize>().is_ok())
        .map(|(i, _)| i)
        .collect();
    if cols.is_empty() {
        return Err(Error::InvalidProblem("CSV header has no s columns".into()));
    }
    let mut rows = Vec::new();
    for (n, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let row = cols
            .iter()
            .map(|&c| {
                fields
                    .get(c)
                    .and_then(|f| f.trim().parse::<f64>().ok())
                    .ok_or_else(|| Error::InvalidProblem(format!("CSV line {}: bad value in column {}", n + 1, c + 1)))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(rows)
}
