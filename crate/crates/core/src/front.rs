//! Pareto-front queries on an eliminant system: normal vectors, weights,
//! decisions and supporting-hyperplane checks.

use std::cmp::Ordering;
use std::sync::Arc;

use faer::Mat;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::eliminate::EliminantSystem;
use crate::error::{Error, Result};
use crate::linalg::{full_svd, nnls, real_roots};
use crate::newton::{start_scale, NewtonOptions, NewtonSystem};
use crate::polyring::{Polynomial, Role, VariableSpace};
use crate::problem::{multiplier_name, MOProblem};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PointResiduals {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eliminant: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kkt: Option<f64>,
    /// `max |s_i - f_i(x)|`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub objective: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ParetoPoint {
    pub s: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Vec<f64>>,
    pub residuals: PointResiduals,
}

impl ParetoPoint {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("point serializes")
    }
}

/// Row `i` is the gradient of `t_i` at `s`.
pub fn eliminant_jacobian(t: &EliminantSystem, s: &[f64]) -> Mat<f64> {
    jacobian(&t.polynomials, s)
}

pub fn jacobian(polys: &[Polynomial], s: &[f64]) -> Mat<f64> {
    let m = s.len();
    let grads: Vec<Vec<f64>> = polys
        .iter()
        .map(|t| (0..m).map(|j| t.derivative(j).eval(s)).collect())
        .collect();
    Mat::from_fn(polys.len(), m, |i, j| grads[i][j])
}

#[derive(Clone, Debug, PartialEq)]
pub enum WeightRecovery {
    Feasible(Vec<f64>),
    /// No nonnegative vector in the normal space; `distance` measures how far
    /// the best candidate is from it.
    Infeasible { distance: f64 },
}

impl WeightRecovery {
    pub fn weights(&self) -> Option<&[f64]> {
        match self {
            Self::Feasible(w) => Some(w),
            Self::Infeasible { .. } => None,
        }
    }
}

/// Relative singular value cutoff for the normal-space rank.
const NORMAL_RANK_TOL: f64 = 1e-8;

/// Finds a nonnegative weight vector, summing to one, in the row space of
/// the eliminant Jacobian at `s`.
pub fn recover_weights(t: &EliminantSystem, s: &[f64], tol: f64) -> Result<WeightRecovery> {
    if s.len() != t.num_objectives() {
        return Err(Error::Size(format!("expected {} objective values, got {}", t.num_objectives(), s.len())));
    }
    weights_from_jacobian(eliminant_jacobian(t, s), tol)
}

pub fn weights_from_jacobian(j: Mat<f64>, tol: f64) -> Result<WeightRecovery> {
    let m = j.ncols();
    let norms: Vec<f64> = (0..j.nrows())
        .map(|i| (0..m).map(|k| j[(i, k)].powi(2)).sum::<f64>().sqrt())
        .collect();
    let biggest = norms.iter().copied().fold(0.0, f64::max);
    if biggest <= tol {
        return Err(Error::ZeroGradient);
    }
    // unit rows make the answer independent of how each t_i is scaled
    let rows: Vec<usize> = (0..norms.len()).filter(|&i| norms[i] > 0.0).collect();
    let unit = Mat::from_fn(rows.len(), m, |i, k| j[(rows[i], k)] / norms[rows[i]]);
    let svd = full_svd(unit.as_ref())?;
    let smax = svd.s[0];
    let r = svd.s.iter().filter(|&&x| x > NORMAL_RANK_TOL * smax).count();
    if r == 1 {
        let g: Vec<f64> = (0..m).map(|k| svd.v[(k, 0)]).collect();
        let sum: f64 = g.iter().sum();
        if sum.abs() <= tol {
            return Ok(WeightRecovery::Infeasible { distance: f64::INFINITY });
        }
        let w: Vec<f64> = g.iter().map(|v| v / sum).collect();
        return Ok(finish_weights(w, tol));
    }

    // min |(I - B B^T) w| over w >= 0, with sum(w) = 1 as a penalty row
    let basis = svd.v.as_ref().subcols(0, r);
    let proj = Mat::from_fn(m, m, |a, b| {
        let bb: f64 = (0..r).map(|k| basis[(a, k)] * basis[(b, k)]).sum();
        f64::from(a == b) - bb
    });
    let a = Mat::from_fn(m + 1, m, |i, k| if i < m { proj[(i, k)] } else { 1.0 });
    let mut rhs = vec![0.0; m + 1];
    rhs[m] = 1.0;
    let w = nnls(a.as_ref(), &rhs)?;
    let sum: f64 = w.iter().sum();
    if sum <= 0.0 {
        return Ok(WeightRecovery::Infeasible { distance: f64::INFINITY });
    }
    let w: Vec<f64> = w.iter().map(|v| v / sum).collect();
    let off: f64 = (0..m)
        .map(|i| (0..m).map(|k| proj[(i, k)] * w[k]).sum::<f64>().powi(2))
        .sum::<f64>()
        .sqrt();
    if off > tol {
        return Ok(WeightRecovery::Infeasible { distance: off });
    }
    let inside: Vec<f64> = (0..m)
        .map(|i| w[i] - (0..m).map(|k| proj[(i, k)] * w[k]).sum::<f64>())
        .collect();
    Ok(finish_weights(inside, tol))
}

fn finish_weights(w: Vec<f64>, tol: f64) -> WeightRecovery {
    let low = w.iter().copied().fold(f64::INFINITY, f64::min);
    if low < -tol {
        return WeightRecovery::Infeasible { distance: -low };
    }
    let clipped: Vec<f64> = w.iter().map(|v| v.max(0.0)).collect();
    let sum: f64 = clipped.iter().sum();
    WeightRecovery::Feasible(clipped.iter().map(|v| v / sum).collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct RecoverOptions {
    /// Random starts added to the caller's seeds.
    pub starts: usize,
    pub seed: u64,
    /// Largest KKT residual accepted as converged.
    pub tol: f64,
    /// Solutions closer than this in the max norm are merged.
    pub dedup_tol: f64,
    pub newton: NewtonOptions,
}

impl Default for RecoverOptions {
    fn default() -> Self {
        Self {
            starts: 64,
            seed: 42,
            tol: 1e-9,
            dedup_tol: 1e-8,
            newton: NewtonOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CriticalPoint {
    pub x: Vec<f64>,
    pub lambda: Vec<f64>,
    pub s: Vec<f64>,
    pub kkt_residual: f64,
    pub weighted_objective: f64,
}

/// The KKT system `grad_x (w^T f - lambda^T g) = 0, g = 0` for fixed weights,
/// over the decision variables followed by one multiplier per constraint.
pub fn kkt_system(p: &MOProblem, w: &[f64]) -> Result<(Arc<VariableSpace>, Vec<Polynomial>)> {
    if w.len() != p.num_objectives() {
        return Err(Error::Size(format!("expected {} weights, got {}", p.num_objectives(), w.len())));
    }
    let n = p.num_decisions();
    let vars = p
        .space()
        .names()
        .iter()
        .map(|v| (v.clone(), Role::Decision))
        .chain((0..p.num_constraints()).map(|k| (multiplier_name(k), Role::Multiplier)));
    let space = VariableSpace::new(vars)?;
    let mut lag = Polynomial::zero(&space);
    for (f, &wi) in p.objectives().iter().zip(w) {
        lag = &lag + &f.embed(&space)?.scale(wi);
    }
    let mut cons = Vec::new();
    for (k, g) in p.constraints().iter().enumerate() {
        let g = g.embed(&space)?;
        lag = &lag - &(&Polynomial::var_index(&space, n + k) * &g);
        cons.push(g);
    }
    let mut eqs: Vec<Polynomial> = (0..n).map(|j| lag.derivative(j)).collect();
    eqs.extend(cons);
    Ok((space, eqs))
}

/// Real critical points of the weighted-sum problem at `w`, deduplicated and
/// ordered by weighted objective (smallest first).
///
/// Each seed holds decision values, optionally followed by multipliers.
pub fn recover_decisions(
    p: &MOProblem,
    w: &[f64],
    seeds: &[Vec<f64>],
    opts: &RecoverOptions,
) -> Result<Vec<CriticalPoint>> {
    let (space, eqs) = kkt_system(p, w)?;
    let n = p.num_decisions();
    let dim = space.len();
    let spread = start_scale(p.objectives().iter().chain(p.constraints()));
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut starts: Vec<Vec<f64>> = seeds
        .iter()
        .map(|s| {
            let mut z = s.clone();
            z.resize(dim, 0.0);
            z
        })
        .collect();
    for _ in 0..opts.starts {
        let z: Vec<f64> = (0..dim)
            .map(|j| {
                let g: f64 = StandardNormal.sample(&mut rng);
                if j < n {
                    spread * g
                } else {
                    g
                }
            })
            .collect();
        starts.push(z);
    }

    let newton = NewtonSystem::new(eqs, (0..dim).collect());
    let base = vec![0.0; dim];
    let mut best = f64::INFINITY;
    let mut found: Vec<(Vec<f64>, f64)> = Vec::new();
    for z0 in &starts {
        let out = newton.solve(&base, z0, &opts.newton);
        if out.residual.is_nan() {
            continue;
        }
        best = best.min(out.residual);
        if out.residual <= opts.tol {
            found.push((out.z, out.residual));
        }
    }
    if found.is_empty() {
        return Err(Error::NoConvergence { best_residual: best });
    }

    found.sort_by(|a, b| lex(&a.0, &b.0));
    let mut unique: Vec<(Vec<f64>, f64)> = Vec::new();
    for (z, r) in found {
        let dup = unique.iter_mut().find(|(u, _)| max_diff(u, &z) <= opts.dedup_tol);
        match dup {
            Some(u) if r < u.1 => *u = (z, r),
            Some(_) => {}
            None => unique.push((z, r)),
        }
    }

    let mut points: Vec<CriticalPoint> = unique
        .into_iter()
        .map(|(z, r)| {
            let x = z[..n].to_vec();
            CriticalPoint {
                s: p.objective_values_at(&x),
                weighted_objective: p.weighted_objective(w, &x),
                lambda: z[n..].to_vec(),
                x,
                kkt_residual: r,
            }
        })
        .collect();
    points.sort_by(|a, b| {
        a.weighted_objective
            .total_cmp(&b.weighted_objective)
            .then_with(|| lex(&a.x, &b.x))
    });
    Ok(points)
}

fn lex(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Certificate {
    pub pass: bool,
    /// `min_j w^T s'_j - w^T s`.
    pub margin: f64,
}

/// Checks that the hyperplane with normal `w` through `s` supports every
/// sample from below: `w^T s' >= w^T s - tol`.
pub fn tangency_certificate(s: &[f64], w: &[f64], samples: &[Vec<f64>], tol: f64) -> Certificate {
    let dot = |a: &[f64]| a.iter().zip(w).map(|(x, y)| x * y).sum::<f64>();
    let level = dot(s);
    let margin = samples.iter().map(|q| dot(q) - level).fold(f64::INFINITY, f64::min);
    Certificate {
        pass: margin >= -tol,
        margin,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Projection {
    pub s: Vec<f64>,
    /// Largest `|t_i(s)|` at the returned point.
    pub residual: f64,
}

/// Moves `s0` onto the zero set of `polys` by Gauss-Newton steps of minimum
/// norm.
pub fn project_to_variety(polys: &[Polynomial], s0: &[f64], opts: &NewtonOptions) -> Projection {
    let newton = NewtonSystem::new(polys.to_vec(), (0..s0.len()).collect());
    let out = newton.solve(s0, s0, opts);
    Projection {
        s: out.z,
        residual: out.residual,
    }
}

/// Real points where the zero set meets coordinate axis `axis`, i.e. with
/// every other objective equal to zero. Powers of the other objectives that
/// divide a polynomial are removed first, so a factor vanishing on the whole
/// axis does not hide the intercepts of the rest. Roots of the first polynomial that
/// is not identically zero on the axis are kept when all polynomials vanish
/// there to within `tol`.
pub fn axis_intercepts(polys: &[Polynomial], axis: usize, tol: f64) -> Result<Vec<f64>> {
    let restricted: Vec<Vec<f64>> = polys.iter().map(|t| restrict_to_axis(t, axis)).collect();
    let Some(lead) = restricted.iter().find(|c| c.iter().any(|&v| v != 0.0)) else {
        return Ok(Vec::new());
    };
    let roots = real_roots(lead)?;
    let eval = |c: &[f64], t: f64| c.iter().rev().fold(0.0, |acc, &v| acc * t + v);
    Ok(roots
        .into_iter()
        .filter(|&r| restricted.iter().all(|c| eval(c, r).abs() <= tol * (1.0 + r.abs()).powi(c.len() as i32)))
        .collect())
}

/// Coefficients (ascending powers) of `t / prod_{j != axis} s_j^k_j` with
/// every variable but `axis` set to zero, `k_j` the largest power dividing `t`.
fn restrict_to_axis(t: &Polynomial, axis: usize) -> Vec<f64> {
    let n = t.space().len();
    let mut common = vec![u32::MAX; n];
    for (mono, _) in t.terms() {
        for (c, &k) in common.iter_mut().zip(mono.exponents()) {
            *c = (*c).min(k);
        }
    }
    let mut c = vec![0.0; t.degree().max(0) as usize + 1];
    for (mono, v) in t.terms() {
        let e = mono.exponents();
        if e.iter().enumerate().all(|(j, &k)| j == axis || k == common[j]) {
            c[e[axis] as usize] += v;
        }
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eliminate::{eliminate, EliminationOptions};
    use crate::fixtures;
    use crate::problem::{build_pf_system, WeightMode};

    fn line() -> EliminantSystem {
        let space = VariableSpace::new([("s1", Role::Objective), ("s2", Role::Objective)]).unwrap();
        let poly = Polynomial::parse(&space, "s1 + s2 - 1").unwrap();
        let sys = crate::problem::PfSystem::new(space, vec![poly], vec!["line".into()]).unwrap();
        eliminate(&sys, &EliminationOptions::default()).unwrap()
    }

    #[test]
    fn jacobian_of_line_is_constant() {
        let t = line();
        let j = eliminant_jacobian(&t, &[0.3, 0.7]);
        assert_eq!((j.nrows(), j.ncols()), (1, 2));
        assert!((j[(0, 0)] - j[(0, 1)]).abs() < 1e-12);
    }

    #[test]
    fn line_weights_are_even() {
        let t = line();
        let w = recover_weights(&t, &[0.2, 0.8], 1e-8).unwrap();
        assert_eq!(w, WeightRecovery::Feasible(vec![0.5, 0.5]));
    }

    #[test]
    fn mixed_gradient_is_infeasible() {
        let j = Mat::from_fn(1, 2, |_, k| [1.0, -2.0][k]);
        assert!(matches!(weights_from_jacobian(j, 1e-8).unwrap(), WeightRecovery::Infeasible { .. }));
    }

    #[test]
    fn zero_gradient_is_reported() {
        let j = Mat::<f64>::zeros(2, 3);
        assert!(matches!(weights_from_jacobian(j, 1e-8), Err(Error::ZeroGradient)));
    }

    #[test]
    fn weights_from_normal_plane() {
        // normal space of the curve spanned by (1,0,1) and (0,1,0)
        let j = Mat::from_fn(2, 3, |i, k| [[1.0, 0.0, 1.0], [0.0, 1.0, 0.0]][i][k]);
        let w = weights_from_jacobian(j, 1e-8).unwrap();
        let w = w.weights().unwrap();
        assert!((w[0] - w[2]).abs() < 1e-10);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        // span of (1,-1,0) and (0,1,-1) is the sum-zero plane
        let j = Mat::from_fn(2, 3, |i, k| [[1.0, -1.0, 0.0], [0.0, 1.0, -1.0]][i][k]);
        assert!(matches!(weights_from_jacobian(j, 1e-8).unwrap(), WeightRecovery::Infeasible { .. }));
        let j = Mat::from_fn(2, 3, |i, k| [[1.0, 1.0, 0.0], [1.0, -1.0, 0.0]][i][k]);
        let w = weights_from_jacobian(j, 1e-8).unwrap();
        let w = w.weights().unwrap();
        assert!(w[2].abs() < 1e-12 && (w[0] + w[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn portfolio_decisions() {
        let p = fixtures::portfolio();
        let pts = recover_decisions(&p, &[0.45, 0.55], &[], &RecoverOptions::default()).unwrap();
        let x = &pts[0].x;
        for (a, b) in x.iter().zip([18.18, 50.0, 31.82]) {
            assert!((a - b).abs() < 0.01, "{x:?}");
        }
        assert!(pts[0].kkt_residual <= 1e-9);
    }

    #[test]
    fn example1_vertex() {
        let pts = recover_decisions(&fixtures::example1(), &[1.0, 0.0, 0.0], &[], &RecoverOptions::default()).unwrap();
        assert!((pts[0].x[0] - 3.0).abs() < 1e-9 && (pts[0].x[1] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn example3_vertex() {
        let pts = recover_decisions(&fixtures::example3(), &[0.0, 0.0, 1.0], &[], &RecoverOptions::default()).unwrap();
        assert!((pts[0].x[0] - 2.0).abs() < 1e-9);
        for (a, b) in pts[0].s.iter().zip([4.0, 1.0, 0.0]) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn unreachable_kkt_reports_best_residual() {
        // x^2 + 1 has no real stationary point constraint
        let p = MOProblem::from_exprs(&["x"], &["x", "-x"], &["x^2 + 1"]).unwrap();
        let opts = RecoverOptions {
            starts: 4,
            ..Default::default()
        };
        assert!(matches!(recover_decisions(&p, &[0.5, 0.5], &[], &opts), Err(Error::NoConvergence { .. })));
    }

    #[test]
    fn certificate_margins() {
        let s = [0.0, 1.0];
        let w = [1.0, 0.0];
        let c = tangency_certificate(&s, &w, &[vec![0.5, 0.0], vec![1.0, -3.0]], 1e-12);
        assert!(c.pass && (c.margin - 0.5).abs() < 1e-15);
        let c = tangency_certificate(&[1.0, 1.0], &[0.5, 0.5], &[vec![0.5, 0.5]], 1e-12);
        assert!(!c.pass && c.margin < 0.0);
    }

    #[test]
    fn projection_lands_on_circle() {
        let space = VariableSpace::uniform(["s1", "s2"], Role::Objective).unwrap();
        let circle = Polynomial::parse(&space, "s1^2 + s2^2 - 4").unwrap();
        let p = project_to_variety(&[circle.clone()], &[1.0, 1.0], &NewtonOptions::default());
        assert!(p.residual <= 1e-12);
        // minimum-norm steps keep the direction of the start
        assert!((p.s[0] - p.s[1]).abs() < 1e-12);
    }

    #[test]
    fn intercepts_of_parabola() {
        let space = VariableSpace::uniform(["s1", "s2"], Role::Objective).unwrap();
        let t = Polynomial::parse(&space, "s2 - (s1 - 1)*(s1 - 3)").unwrap();
        let on_s1 = axis_intercepts(&[t.clone()], 0, 1e-10).unwrap();
        assert_eq!(on_s1.len(), 2);
        assert!((on_s1[0] - 1.0).abs() < 1e-12 && (on_s1[1] - 3.0).abs() < 1e-12);
        let on_s2 = axis_intercepts(&[t.clone()], 1, 1e-10).unwrap();
        assert!((on_s2[0] - 3.0).abs() < 1e-12);
        let s1 = Polynomial::parse(&space, "s1").unwrap();
        let with_axis = axis_intercepts(&[&s1 * &t], 1, 1e-10).unwrap();
        assert_eq!(with_axis.len(), 1);
        assert!((with_axis[0] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn example3_normal_space_has_rank_two() {
        let sys = build_pf_system(&fixtures::example3(), WeightMode::Convex);
        let t = eliminate(&sys, &EliminationOptions::default()).unwrap();
        for x in [-0.5, 0.3, 1.7] {
            let s = [x * x, (x - 1.0f64).powi(2), (x - 2.0f64).powi(2)];
            let j = eliminant_jacobian(&t, &s);
            assert_eq!((j.nrows(), j.ncols()), (5, 3));
            let sv = crate::linalg::singular_values(j.as_ref()).unwrap();
            assert!(sv[2] <= 1e-8 * sv[0], "{sv:?}");
        }
    }
}
