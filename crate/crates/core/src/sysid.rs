//! Misfit versus latency trade-off for autonomous AR models.
//!
//! Data `y` (length `N`) is explained by a model-compliant output `yhat` and a
//! latent input `e` with `a(q) yhat = e`, written as `Yhat a = e` for the
//! `(N - n_a) x (n_a + 1)` Hankel matrix of `yhat`. The trailing coefficient
//! of `a` is fixed to one. Misfit is `s1 = |y - yhat|^2` and latency is
//! `s2 = |e|^2`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::front::{recover_decisions, RecoverOptions};
use crate::polyring::{Polynomial, Role, VariableSpace};
use crate::problem::{MOProblem, PfSystem};

#[derive(Clone, Debug, PartialEq)]
pub struct MisfitLatencyProblem {
    y: Vec<f64>,
    n_a: usize,
}

/// Equation count quoted alongside the construction, `3N - 2 n_a + 2`.
pub fn stated_equation_count(n: usize, n_a: usize) -> usize {
    (3 * n + 2).saturating_sub(2 * n_a)
}

impl MisfitLatencyProblem {
    pub fn new(y: Vec<f64>, n_a: usize) -> Result<Self> {
        if y.len() < n_a + 2 {
            return Err(Error::Size(format!(
                "need at least n_a + 2 = {} samples, got {}",
                n_a + 2,
                y.len()
            )));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidProblem("data must be finite".into()));
        }
        Ok(Self { y, n_a })
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn n_a(&self) -> usize {
        self.n_a
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    /// Rows of the Hankel matrix, `N - n_a`.
    pub fn rows(&self) -> usize {
        self.y.len() - self.n_a
    }

    fn decision_names(&self) -> Vec<String> {
        let mut v: Vec<String> = (1..=self.n_a).map(|i| format!("a{i}")).collect();
        v.extend((1..=self.len()).map(|i| format!("yhat{i}")));
        v.extend((1..=self.rows()).map(|i| format!("e{i}")));
        v
    }

    /// `a1..a_na, yhat1..yhatN, e1..e_R, alpha, lambda1..lambda_R, s1, s2`.
    pub fn pf_space(&self) -> Arc<VariableSpace> {
        let vars = self
            .decision_names()
            .into_iter()
            .map(|n| (n, Role::Decision))
            .chain(std::iter::once(("alpha".to_string(), Role::Weight)))
            .chain((1..=self.rows()).map(|i| (format!("lambda{i}"), Role::Multiplier)))
            .chain([("s1".to_string(), Role::Objective), ("s2".to_string(), Role::Objective)]);
        VariableSpace::new(vars).expect("generated names are valid")
    }

    /// The bi-objective problem `min (|y - yhat|^2 / 2, |e|^2 / 2)` subject to
    /// `Yhat a - e = 0`, over `a1..a_na, yhat, e`.
    pub fn to_problem(&self) -> MOProblem {
        let space = VariableSpace::uniform(self.decision_names(), Role::Decision).expect("valid names");
        let v = Vars::new(&space, self);
        let misfit = v.misfit(&self.y).scale(0.5);
        let latency = v.latency().scale(0.5);
        let cons = v.model_residuals(self.n_a).expect("sizes checked");
        MOProblem::new(space, vec![misfit, latency], cons).expect("well-formed problem")
    }
}

/// Handles on `a`, `yhat` and `e`, which lead the variable order of every space used here.
struct Vars {
    a: Vec<Polynomial>,
    yhat: Vec<Polynomial>,
    e: Vec<Polynomial>,
    space: Arc<VariableSpace>,
}

impl Vars {
    fn new(space: &Arc<VariableSpace>, p: &MisfitLatencyProblem) -> Self {
        let var = |i: usize| Polynomial::var_index(space, i);
        let mut a: Vec<Polynomial> = (0..p.n_a).map(var).collect();
        a.push(Polynomial::constant(space, 1.0));
        let yhat = (0..p.len()).map(|i| var(p.n_a + i)).collect();
        let e = (0..p.rows()).map(|i| var(p.n_a + p.len() + i)).collect();
        Self {
            a,
            yhat,
            e,
            space: space.clone(),
        }
    }

    fn misfit(&self, y: &[f64]) -> Polynomial {
        let mut acc = Polynomial::zero(&self.space);
        for (yi, yh) in y.iter().zip(&self.yhat) {
            let d = &Polynomial::constant(&self.space, *yi) - yh;
            acc = &acc + &(&d * &d);
        }
        acc
    }

    fn latency(&self) -> Polynomial {
        self.e.iter().fold(Polynomial::zero(&self.space), |acc, e| &acc + &(e * e))
    }

    /// `Yhat a - e`.
    fn model_residuals(&self, n_a: usize) -> Result<Vec<Polynomial>> {
        let h = build_hankel(&self.yhat, n_a)?;
        Ok(h.iter()
            .zip(&self.e)
            .map(|(row, e)| {
                let ya = row
                    .iter()
                    .zip(&self.a)
                    .fold(Polynomial::zero(&self.space), |acc, (h, a)| &acc + &(h * a));
                &ya - e
            })
            .collect())
    }
}

/// `(N - n_a) x (n_a + 1)` Hankel matrix with entry `(i, j) = yhat[i + j]`.
pub fn build_hankel(yhat: &[Polynomial], n_a: usize) -> Result<Vec<Vec<Polynomial>>> {
    let n = yhat.len();
    if n < n_a + 2 {
        return Err(Error::Size(format!("Hankel needs N >= n_a + 2, got N = {n}, n_a = {n_a}")));
    }
    Ok((0..n - n_a)
        .map(|i| (0..=n_a).map(|j| yhat[i + j].clone()).collect())
        .collect())
}

/// `(n - n_a) x n` banded Toeplitz matrix with `a` on its band, so that
/// `T_a yhat = Yhat a`.
pub fn build_toeplitz(a: &[Polynomial], n: usize) -> Result<Vec<Vec<Polynomial>>> {
    let Some(first) = a.first() else {
        return Err(Error::Size("empty coefficient vector".into()));
    };
    let n_a = a.len() - 1;
    if n < n_a + 2 {
        return Err(Error::Size(format!("Toeplitz needs n >= n_a + 2, got n = {n}, n_a = {n_a}")));
    }
    let zero = Polynomial::zero(first.space());
    Ok((0..n - n_a)
        .map(|i| {
            (0..n)
                .map(|k| if k >= i && k - i <= n_a { a[k - i].clone() } else { zero.clone() })
                .collect()
        })
        .collect())
}

#[derive(Clone, Debug)]
pub struct SysidPf {
    pub system: PfSystem,
    pub problem: MisfitLatencyProblem,
    /// Equations produced block by block, `3N - n_a + 2`.
    pub block_equations: usize,
    /// The count `3N - 2 n_a + 2` quoted with the construction.
    pub stated_equations: usize,
}

/// PF system of the misfit-latency trade-off with `alpha` as the single
/// convex weight: stationarity in `a`, `yhat` and `e`, the model equations,
/// and the two objective relations.
pub fn build_misfit_latency_pf(y: &[f64], n_a: usize) -> Result<SysidPf> {
    let p = MisfitLatencyProblem::new(y.to_vec(), n_a)?;
    let space = p.pf_space();
    let v = Vars::new(&space, &p);
    let (n, r) = (p.len(), p.rows());
    let alpha = Polynomial::var(&space, "alpha")?;
    let one_minus_alpha = &Polynomial::constant(&space, 1.0) - &alpha;
    let lambda: Vec<Polynomial> = (1..=r)
        .map(|i| Polynomial::var(&space, &format!("lambda{i}")))
        .collect::<Result<_>>()?;
    let hankel = build_hankel(&v.yhat, n_a)?;
    let toeplitz = build_toeplitz(&v.a, n)?;

    let mut eqs = Vec::new();
    let mut labels = Vec::new();
    // -Yhat'^T lambda
    for j in 0..n_a {
        let col = (0..r).fold(Polynomial::zero(&space), |acc, i| &acc + &(&hankel[i][j] * &lambda[i]));
        eqs.push(-&col);
        labels.push(format!("dL/da{}", j + 1));
    }
    // -alpha (y - yhat) - T_a^T lambda
    for k in 0..n {
        let d = &Polynomial::constant(&space, y[k]) - &v.yhat[k];
        let tl = (0..r).fold(Polynomial::zero(&space), |acc, i| &acc + &(&toeplitz[i][k] * &lambda[i]));
        eqs.push(&(-&(&alpha * &d)) - &tl);
        labels.push(format!("dL/dyhat{}", k + 1));
    }
    // (1 - alpha) e + lambda
    for i in 0..r {
        eqs.push(&(&one_minus_alpha * &v.e[i]) + &lambda[i]);
        labels.push(format!("dL/de{}", i + 1));
    }
    for (i, g) in v.model_residuals(n_a)?.into_iter().enumerate() {
        eqs.push(g);
        labels.push(format!("model{}", i + 1));
    }
    let s1 = Polynomial::var(&space, "s1")?;
    let s2 = Polynomial::var(&space, "s2")?;
    eqs.push(&s1 - &v.misfit(y));
    labels.push("s1".into());
    eqs.push(&s2 - &v.latency());
    labels.push("s2".into());

    let block_equations = eqs.len();
    Ok(SysidPf {
        system: PfSystem::new(space, eqs, labels)?,
        problem: p,
        block_equations,
        stated_equations: stated_equation_count(n, n_a),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalarizedFit {
    pub alpha: f64,
    pub s1: f64,
    pub s2: f64,
    /// All `n_a + 1` coefficients, trailing one included.
    pub a: Vec<f64>,
    pub yhat: Vec<f64>,
    pub e: Vec<f64>,
    pub lambda: Vec<f64>,
    pub kkt_residual: f64,
}

/// Minimizes `alpha |y - yhat|^2 + (1 - alpha) |e|^2` subject to the model
/// equations, by multi-start Newton on the KKT system.
pub fn latency_misfit_scalarized(y: &[f64], n_a: usize, alpha: f64, opts: &RecoverOptions) -> Result<ScalarizedFit> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidProblem(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let p = MisfitLatencyProblem::new(y.to_vec(), n_a)?;
    let problem = p.to_problem();
    let seeds = structured_seeds(&p, alpha);
    let best = recover_decisions(&problem, &[alpha, 1.0 - alpha], &seeds, opts)?.swap_remove(0);
    let (n, r) = (p.len(), p.rows());
    let mut a = best.x[..n_a].to_vec();
    a.push(1.0);
    let yhat = best.x[n_a..n_a + n].to_vec();
    let e = best.x[n_a + n..n_a + n + r].to_vec();
    Ok(ScalarizedFit {
        alpha,
        s1: 2.0 * best.s[0],
        s2: 2.0 * best.s[1],
        a,
        yhat,
        e,
        lambda: best.lambda,
        kkt_residual: best.kkt_residual,
    })
}

/// Starts with `yhat = y` and `e` consistent with a sweep of the free
/// coefficients over `[-3, 3]`.
fn structured_seeds(p: &MisfitLatencyProblem, alpha: f64) -> Vec<Vec<f64>> {
    let steps = 25;
    let mut seeds = Vec::new();
    for k in 0..steps {
        let c = -3.0 + 6.0 * k as f64 / (steps - 1) as f64;
        let mut a = vec![c; p.n_a];
        a.push(1.0);
        let e: Vec<f64> = (0..p.rows())
            .map(|i| (0..=p.n_a).map(|j| p.y[i + j] * a[j]).sum())
            .collect();
        let mut z: Vec<f64> = a[..p.n_a].to_vec();
        z.extend_from_slice(&p.y);
        z.extend_from_slice(&e);
        z.extend(e.iter().map(|v| -(1.0 - alpha) * v));
        seeds.push(z);
    }
    seeds
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{build_lagrangian, WeightMode};

    fn syms(n: usize) -> (Arc<VariableSpace>, Vec<Polynomial>) {
        let names: Vec<String> = (1..=n).map(|i| format!("v{i}")).collect();
        let s = VariableSpace::uniform(names, Role::Decision).unwrap();
        let v = (0..n).map(|i| Polynomial::var_index(&s, i)).collect();
        (s, v)
    }

    #[test]
    fn hankel_shapes() {
        let (_, v) = syms(4);
        let h = build_hankel(&v, 1).unwrap();
        assert_eq!((h.len(), h[0].len()), (3, 2));
        assert_eq!(h[2][1], v[3]);
        assert_eq!(h[1][0], v[1]);
        let (_, v3) = syms(3);
        assert_eq!(build_hankel(&v3, 1).unwrap().len(), 2);
        assert!(matches!(build_hankel(&v3, 2), Err(Error::Size(_))));
    }

    #[test]
    fn toeplitz_times_yhat_equals_hankel_times_a() {
        for n in 3..=6 {
            for n_a in 1..=2 {
                if n < n_a + 2 {
                    continue;
                }
                let names: Vec<String> = (0..=n_a)
                    .map(|j| format!("a{j}"))
                    .chain((0..n).map(|k| format!("y{k}")))
                    .chain((0..n - n_a).map(|i| format!("l{i}")))
                    .collect();
                let s = VariableSpace::uniform(names, Role::Decision).unwrap();
                let a: Vec<Polynomial> = (0..=n_a).map(|j| Polynomial::var_index(&s, j)).collect();
                let yh: Vec<Polynomial> = (0..n).map(|k| Polynomial::var_index(&s, n_a + 1 + k)).collect();
                let lam: Vec<Polynomial> = (0..n - n_a).map(|i| Polynomial::var_index(&s, n_a + 1 + n + i)).collect();
                let h = build_hankel(&yh, n_a).unwrap();
                let t = build_toeplitz(&a, n).unwrap();
                // lambda^T Yhat a, differentiated by each yhat_k, against (T_a^T lambda)_k
                let mut bilinear = Polynomial::zero(&s);
                for i in 0..n - n_a {
                    for j in 0..=n_a {
                        bilinear = &bilinear + &(&(&lam[i] * &h[i][j]) * &a[j]);
                    }
                }
                for k in 0..n {
                    let tl = (0..n - n_a).fold(Polynomial::zero(&s), |acc, i| &acc + &(&t[i][k] * &lam[i]));
                    assert_eq!(bilinear.derivative(n_a + 1 + k), tl);
                }
            }
        }
    }

    #[test]
    fn example_system_shape() {
        let sys = build_misfit_latency_pf(&[1.0, 4.0, 2.0, 3.0], 1).unwrap();
        assert_eq!(sys.system.space.len(), 14);
        assert_eq!(sys.block_equations, 13);
        assert_eq!(sys.stated_equations, 12);
        assert_eq!(sys.system.equations.len(), 13);
        assert!(sys.system.degrees.iter().all(|&d| d == 2));
        assert_eq!(sys.system.keep_vars.len(), 2);
    }

    #[test]
    fn stationarity_blocks_match_generic_lagrangian() {
        let y = [1.0, 4.0, 2.0, 3.0];
        let sys = build_misfit_latency_pf(&y, 1).unwrap();
        let p = sys.problem.to_problem();
        // generic convex-weight Lagrangian, renamed onto the sysid space
        let lag = build_lagrangian(&p, WeightMode::Convex);
        let space = sys.system.space.clone();
        let rename = |name: &str| match name {
            "w1" => "alpha".to_string(),
            other => other.to_string(),
        };
        let mapped = Polynomial::from_terms(
            &space,
            lag.terms().map(|(m, c)| {
                let mut e = vec![0u32; space.len()];
                for (i, &k) in m.exponents().iter().enumerate() {
                    if k > 0 {
                        e[space.index_of(&rename(lag.space().name(i))).unwrap()] = k;
                    }
                }
                (crate::polyring::Monomial::from_exponents(e), c)
            }),
        );
        let dec = space.indices_with_role(Role::Decision);
        for (row, &j) in dec.iter().enumerate() {
            let diff = &mapped.derivative(j) - &sys.system.equations[row];
            assert!(diff.max_abs_coeff() < 1e-12, "{}: {}", sys.system.labels[row], diff);
        }
    }

    #[test]
    fn exact_geometric_data_has_zero_cost() {
        let fit = latency_misfit_scalarized(&[1.0, 2.0, 4.0, 8.0], 1, 0.5, &RecoverOptions::default()).unwrap();
        assert!(fit.s1 < 1e-12 && fit.s2 < 1e-12, "{fit:?}");
        assert!((fit.a[0] + 2.0).abs() < 1e-8);
    }

    #[test]
    fn weighting_limits_trend() {
        let y = [1.0, 4.0, 2.0, 3.0];
        let opts = RecoverOptions::default();
        let lo = latency_misfit_scalarized(&y, 1, 0.05, &opts).unwrap();
        let mid = latency_misfit_scalarized(&y, 1, 0.5, &opts).unwrap();
        let hi = latency_misfit_scalarized(&y, 1, 0.95, &opts).unwrap();
        assert!(lo.s2 < mid.s2 && mid.s2 < hi.s2);
        assert!(lo.s1 > mid.s1 && mid.s1 > hi.s1);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(MisfitLatencyProblem::new(vec![1.0, 2.0], 1).is_err());
        assert!(latency_misfit_scalarized(&[1.0, 2.0, 3.0], 1, 1.0, &RecoverOptions::default()).is_err());
    }
}
