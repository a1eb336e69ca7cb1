//! Damped Newton iteration for square (or over/under-determined) polynomial
//! systems, with minimum-norm least-squares steps.

use faer::Mat;

use crate::linalg::lstsq;
use crate::polyring::Polynomial;

/// Singular values of the Jacobian below this fraction of the largest are
/// dropped from the step, so overdetermined systems whose Jacobian is rank
/// deficient only up to rounding do not take huge steps along the null space.
const STEP_RCOND: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NewtonOptions {
    pub max_iter: usize,
    pub max_halvings: usize,
    /// Stop once the largest absolute residual drops to this level.
    pub tol: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            max_iter: 100,
            max_halvings: 30,
            tol: 1e-12,
        }
    }
}

#[derive(Clone, Debug)]
pub struct NewtonOutcome {
    /// Final values of the unknowns.
    pub z: Vec<f64>,
    /// Largest absolute residual at `z`.
    pub residual: f64,
    pub iterations: usize,
}

/// `F(z) = 0` where only the variables at `unknowns` move and the rest of the
/// space is pinned to a base point.
#[derive(Clone, Debug)]
pub struct NewtonSystem {
    equations: Vec<Polynomial>,
    jacobian: Vec<Vec<Polynomial>>,
    unknowns: Vec<usize>,
}

impl NewtonSystem {
    pub fn new(equations: Vec<Polynomial>, unknowns: Vec<usize>) -> Self {
        let jacobian = equations
            .iter()
            .map(|f| unknowns.iter().map(|&j| f.derivative(j)).collect())
            .collect();
        Self {
            equations,
            jacobian,
            unknowns,
        }
    }

    pub fn unknowns(&self) -> &[usize] {
        &self.unknowns
    }

    fn fill(&self, base: &mut [f64], z: &[f64]) {
        for (&j, &v) in self.unknowns.iter().zip(z) {
            base[j] = v;
        }
    }

    pub fn residual_vector(&self, point: &[f64]) -> Vec<f64> {
        self.equations.iter().map(|f| f.eval(point)).collect()
    }

    fn jacobian_at(&self, point: &[f64]) -> Mat<f64> {
        Mat::from_fn(self.equations.len(), self.unknowns.len(), |i, j| self.jacobian[i][j].eval(point))
    }

    /// Iterates from `start`, with every non-unknown variable taken from `base`.
    pub fn solve(&self, base: &[f64], start: &[f64], opts: &NewtonOptions) -> NewtonOutcome {
        let mut point = base.to_vec();
        let mut z = start.to_vec();
        self.fill(&mut point, &z);
        let mut f = self.residual_vector(&point);
        let mut norm = l2(&f);
        let mut iterations = 0;
        for it in 0..opts.max_iter {
            iterations = it;
            if max_abs(&f) <= opts.tol || !norm.is_finite() {
                break;
            }
            let jac = self.jacobian_at(&point);
            let rhs: Vec<f64> = f.iter().map(|v| -v).collect();
            let Ok(step) = lstsq(jac.as_ref(), &rhs, STEP_RCOND) else { break };
            let mut t = 1.0;
            let mut accepted = false;
            for _ in 0..=opts.max_halvings {
                let trial: Vec<f64> = z.iter().zip(&step).map(|(a, b)| a + t * b).collect();
                self.fill(&mut point, &trial);
                let ft = self.residual_vector(&point);
                let nt = l2(&ft);
                if nt.is_finite() && nt < norm {
                    z = trial;
                    f = ft;
                    norm = nt;
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if !accepted {
                self.fill(&mut point, &z);
                break;
            }
        }
        NewtonOutcome {
            residual: max_abs(&f),
            z,
            iterations,
        }
    }
}

/// Spread for random starting points: the widest ratio between the largest
/// coefficient of a polynomial and its smallest one, clamped to `[1, 1e6]`.
pub fn start_scale<'a>(polys: impl IntoIterator<Item = &'a Polynomial>) -> f64 {
    let mut scale = 1.0f64;
    for p in polys {
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for (_, c) in p.terms() {
            lo = lo.min(c.abs());
            hi = hi.max(c.abs());
        }
        if hi > 0.0 {
            scale = scale.max(hi / lo);
        }
    }
    scale.min(1e6)
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub(crate) fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| if x.is_nan() { f64::NAN } else { m.max(x.abs()) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyring::{Role, VariableSpace};

    #[test]
    fn solves_circle_line_intersection() {
        let s = VariableSpace::uniform(["x", "y"], Role::Decision).unwrap();
        let eqs = vec![
            Polynomial::parse(&s, "x^2 + y^2 - 1").unwrap(),
            Polynomial::parse(&s, "x - y").unwrap(),
        ];
        let sys = NewtonSystem::new(eqs, vec![0, 1]);
        let out = sys.solve(&[0.0, 0.0], &[2.0, 0.5], &NewtonOptions::default());
        assert!(out.residual <= 1e-12);
        let h = 0.5f64.sqrt();
        assert!((out.z[0] - h).abs() < 1e-10 && (out.z[1] - h).abs() < 1e-10);
    }

    #[test]
    fn pinned_variables_stay_fixed() {
        let s = VariableSpace::uniform(["x", "c"], Role::Decision).unwrap();
        let eqs = vec![Polynomial::parse(&s, "x - c^2").unwrap()];
        let sys = NewtonSystem::new(eqs, vec![0]);
        let out = sys.solve(&[0.0, 3.0], &[0.0], &NewtonOptions::default());
        assert!((out.z[0] - 9.0).abs() < 1e-12);
    }

    #[test]
    fn reports_failure_without_root() {
        let s = VariableSpace::uniform(["x"], Role::Decision).unwrap();
        let sys = NewtonSystem::new(vec![Polynomial::parse(&s, "x^2 + 1").unwrap()], vec![0]);
        let out = sys.solve(&[0.0], &[0.3], &NewtonOptions::default());
        assert!(out.residual > 0.5);
    }
}
