//! Multi-objective problems, weighted Lagrangians and PF systems.
//!
//! A PF system stacks the stationarity conditions of the weighted
//! Lagrangian, the equality constraints and the objective relations
//! `s_i - f_i(x) = 0`, all over the joint space `(x, w, lambda, s)`.

use std::collections::HashMap;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polyring::{Polynomial, Role, TermRecord, VariableSpace};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightMode {
    /// `w_m = 1 - sum_{i<m} w_i`; only `m - 1` weight variables appear.
    #[default]
    Convex,
    /// All `m` weights are variables and `sum w_i - 1 = 0` is appended.
    Explicit,
}

/// Equality-constrained polynomial multi-objective minimization problem.
#[derive(Clone, Debug, PartialEq)]
pub struct MOProblem {
    space: Arc<VariableSpace>,
    objectives: Vec<Polynomial>,
    constraints: Vec<Polynomial>,
    weight_mode: WeightMode,
}

impl MOProblem {
    pub fn new(
        space: Arc<VariableSpace>,
        objectives: Vec<Polynomial>,
        constraints: Vec<Polynomial>,
    ) -> Result<Self> {
        if space.roles().iter().any(|&r| r != Role::Decision) {
            return Err(Error::InvalidProblem(
                "problem variables must all be decision variables".into(),
            ));
        }
        if objectives.len() < 2 {
            return Err(Error::InvalidProblem(format!(
                "need at least two objectives, got {}",
                objectives.len()
            )));
        }
        for (i, p) in objectives.iter().chain(&constraints).enumerate() {
            if p.space() != &space && **p.space() != *space {
                return Err(Error::InvalidProblem(format!(
                    "polynomial {i} is not expressed over the decision variables"
                )));
            }
        }
        let problem = Self {
            space,
            objectives,
            constraints,
            weight_mode: WeightMode::Convex,
        };
        // Reject decision names that collide with generated w/lambda/s names.
        pf_space(&problem, WeightMode::Explicit)?;
        Ok(problem)
    }

    /// Parses every polynomial from expression strings over `decision_vars`.
    pub fn from_exprs(decision_vars: &[&str], objectives: &[&str], constraints: &[&str]) -> Result<Self> {
        let space = VariableSpace::uniform(decision_vars.iter().copied(), Role::Decision)?;
        let parse = |s: &&str| Polynomial::parse(&space, s);
        let objectives = objectives.iter().map(parse).collect::<Result<Vec<_>>>()?;
        let constraints = constraints.iter().map(parse).collect::<Result<Vec<_>>>()?;
        Self::new(space, objectives, constraints)
    }

    pub fn with_weight_mode(mut self, mode: WeightMode) -> Self {
        self.weight_mode = mode;
        self
    }

    pub fn weight_mode(&self) -> WeightMode {
        self.weight_mode
    }

    pub fn space(&self) -> &Arc<VariableSpace> {
        &self.space
    }

    pub fn objectives(&self) -> &[Polynomial] {
        &self.objectives
    }

    pub fn constraints(&self) -> &[Polynomial] {
        &self.constraints
    }

    pub fn num_decisions(&self) -> usize {
        self.space.len()
    }

    pub fn num_objectives(&self) -> usize {
        self.objectives.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    /// `(f_1(x), ..., f_m(x))` at a named decision point.
    pub fn objective_values(&self, x: &HashMap<String, f64>) -> Result<Vec<f64>> {
        self.objectives.iter().map(|f| f.evaluate(x)).collect()
    }

    /// Same as [`objective_values`](Self::objective_values) with `x` in space order.
    pub fn objective_values_at(&self, x: &[f64]) -> Vec<f64> {
        self.objectives.iter().map(|f| f.eval(x)).collect()
    }

    pub fn weighted_objective(&self, w: &[f64], x: &[f64]) -> f64 {
        self.objectives.iter().zip(w).map(|(f, wi)| wi * f.eval(x)).sum()
    }

    pub fn to_file(&self) -> ProblemFile {
        ProblemFile {
            decision_vars: self.space.names().to_vec(),
            objectives: self.objectives.iter().map(Polynomial::to_term_list).collect(),
            constraints: self.constraints.iter().map(Polynomial::to_term_list).collect(),
            weight_mode: self.weight_mode,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("problem serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ProblemFile = serde_json::from_str(text)
            .map_err(|e| Error::InvalidProblem(format!("schema violation: {e}")))?;
        file.into_problem()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json() + "\n")?;
        Ok(())
    }
}

/// Reads and validates a problem file.
pub fn load_problem(path: impl AsRef<Path>) -> Result<MOProblem> {
    let text = std::fs::read_to_string(path)?;
    MOProblem::from_json(&text)
}

/// On-disk problem description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub decision_vars: Vec<String>,
    pub objectives: Vec<Vec<TermRecord>>,
    #[serde(default)]
    pub constraints: Vec<Vec<TermRecord>>,
    #[serde(default)]
    pub weight_mode: WeightMode,
}

impl ProblemFile {
    pub fn into_problem(self) -> Result<MOProblem> {
        if self.decision_vars.is_empty() {
            return Err(Error::InvalidProblem("decision_vars: empty".into()));
        }
        let space = VariableSpace::uniform(self.decision_vars.iter().cloned(), Role::Decision)
            .map_err(|e| Error::InvalidProblem(format!("decision_vars: {e}")))?;
        let convert = |field: &str, list: &[Vec<TermRecord>]| -> Result<Vec<Polynomial>> {
            list.iter()
                .enumerate()
                .map(|(i, t)| {
                    Polynomial::from_term_list(&space, t)
                        .map_err(|e| Error::InvalidProblem(format!("{field}[{i}]: {e}")))
                })
                .collect()
        };
        let objectives = convert("objectives", &self.objectives)?;
        let constraints = convert("constraints", &self.constraints)?;
        Ok(MOProblem::new(space, objectives, constraints)?.with_weight_mode(self.weight_mode))
    }
}

/// The PF system together with its variable-role metadata.
#[derive(Clone, Debug)]
pub struct PfSystem {
    pub space: Arc<VariableSpace>,
    pub equations: Vec<Polynomial>,
    /// Total degree of each equation after expansion; `-1` for a zero equation.
    pub degrees: Vec<i64>,
    pub labels: Vec<String>,
    /// Indices of the objective variables `s`.
    pub keep_vars: Vec<usize>,
    /// Indices of every other variable.
    pub eliminate_vars: Vec<usize>,
}

impl PfSystem {
    pub fn new(space: Arc<VariableSpace>, equations: Vec<Polynomial>, labels: Vec<String>) -> Result<Self> {
        if labels.len() != equations.len() {
            return Err(Error::Size("one label per equation".into()));
        }
        if equations.iter().any(|e| e.space() != &space && **e.space() != *space) {
            return Err(Error::SpaceMismatch);
        }
        let degrees = equations.iter().map(Polynomial::degree).collect();
        let keep_vars = space.indices_with_role(Role::Objective);
        let eliminate_vars = (0..space.len()).filter(|i| !keep_vars.contains(i)).collect();
        Ok(Self {
            space,
            equations,
            degrees,
            labels,
            keep_vars,
            eliminate_vars,
        })
    }

    pub fn max_degree(&self) -> usize {
        self.degrees.iter().copied().max().unwrap_or(0).max(0) as usize
    }

    pub fn num_keep(&self) -> usize {
        self.keep_vars.len()
    }

    /// Multiplies equation `i` by a nonzero constant.
    pub fn scale_equation(&mut self, i: usize, c: f64) {
        self.equations[i] = self.equations[i].scale(c);
    }

    pub fn to_file(&self) -> PfSystemFile {
        PfSystemFile {
            variables: (0..self.space.len())
                .map(|i| VariableRecord {
                    name: self.space.name(i).to_string(),
                    role: self.space.role(i),
                })
                .collect(),
            equations: self.equations.iter().map(Polynomial::to_term_list).collect(),
            labels: self.labels.clone(),
            degrees: self.degrees.clone(),
        }
    }

    pub fn from_file(file: &PfSystemFile) -> Result<Self> {
        let space = VariableSpace::new(file.variables.iter().map(|v| (v.name.clone(), v.role)))?;
        let equations = file
            .equations
            .iter()
            .map(|t| Polynomial::from_term_list(&space, t))
            .collect::<Result<Vec<_>>>()?;
        let labels = if file.labels.len() == equations.len() {
            file.labels.clone()
        } else {
            (0..equations.len()).map(|i| format!("eq{}", i + 1)).collect()
        };
        Self::new(space, equations, labels)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariableRecord {
    pub name: String,
    pub role: Role,
}

/// Serialized PF system.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PfSystemFile {
    pub variables: Vec<VariableRecord>,
    pub equations: Vec<Vec<TermRecord>>,
    #[serde(default)]
    pub labels: Vec<String>,
    #[serde(default)]
    pub degrees: Vec<i64>,
}

pub fn weight_name(i: usize) -> String {
    format!("w{}", i + 1)
}

pub fn multiplier_name(k: usize) -> String {
    format!("lambda{}", k + 1)
}

pub fn objective_name(i: usize) -> String {
    format!("s{}", i + 1)
}

/// Joint space `(x, w, lambda, s)` for `p` under `mode`.
pub fn pf_space(p: &MOProblem, mode: WeightMode) -> Result<Arc<VariableSpace>> {
    let m = p.num_objectives();
    let nw = match mode {
        WeightMode::Convex => m - 1,
        WeightMode::Explicit => m,
    };
    let vars = p
        .space
        .names()
        .iter()
        .map(|n| (n.clone(), Role::Decision))
        .chain((0..nw).map(|i| (weight_name(i), Role::Weight)))
        .chain((0..p.num_constraints()).map(|k| (multiplier_name(k), Role::Multiplier)))
        .chain((0..m).map(|i| (objective_name(i), Role::Objective)));
    VariableSpace::new(vars)
}

/// Weight polynomials `w_1, ..., w_m` in `space`; in convex mode the last is
/// `1 - sum of the others`.
pub(crate) fn weight_polys(space: &Arc<VariableSpace>, m: usize, mode: WeightMode) -> Vec<Polynomial> {
    let free = match mode {
        WeightMode::Convex => m - 1,
        WeightMode::Explicit => m,
    };
    let mut ws: Vec<Polynomial> = (0..free)
        .map(|i| Polynomial::var(space, &weight_name(i)).expect("weight variable present"))
        .collect();
    if mode == WeightMode::Convex {
        let mut last = Polynomial::constant(space, 1.0);
        for w in &ws {
            last = &last - w;
        }
        ws.push(last);
    }
    ws
}

/// `sum_i w_i f_i(x) - sum_k lambda_k g_k(x)` over the PF space.
pub fn build_lagrangian(p: &MOProblem, mode: WeightMode) -> Polynomial {
    let space = pf_space(p, mode).expect("names validated at construction");
    lagrangian_in(p, &space, mode)
}

fn lagrangian_in(p: &MOProblem, space: &Arc<VariableSpace>, mode: WeightMode) -> Polynomial {
    let ws = weight_polys(space, p.num_objectives(), mode);
    let mut lag = Polynomial::zero(space);
    for (w, f) in ws.iter().zip(&p.objectives) {
        let f = f.embed(space).expect("decision variables embed");
        lag = &lag + &(w * &f);
    }
    for (k, g) in p.constraints.iter().enumerate() {
        let lam = Polynomial::var(space, &multiplier_name(k)).expect("multiplier present");
        let g = g.embed(space).expect("decision variables embed");
        lag = &lag - &(&lam * &g);
    }
    lag
}

/// Stationarity, feasibility and objective relations over `(x, w, lambda, s)`.
pub fn build_pf_system(p: &MOProblem, mode: WeightMode) -> PfSystem {
    let space = pf_space(p, mode).expect("names validated at construction");
    let lag = lagrangian_in(p, &space, mode);
    let mut equations = Vec::new();
    let mut labels = Vec::new();
    for j in 0..p.num_decisions() {
        equations.push(lag.derivative(j));
        labels.push(format!("dL/d{}", space.name(j)));
    }
    for (k, g) in p.constraints.iter().enumerate() {
        equations.push(g.embed(&space).expect("decision variables embed"));
        labels.push(format!("g{}", k + 1));
    }
    for (i, f) in p.objectives.iter().enumerate() {
        let s = Polynomial::var(&space, &objective_name(i)).expect("objective present");
        equations.push(&s - &f.embed(&space).expect("decision variables embed"));
        labels.push(format!("{} - f{}", objective_name(i), i + 1));
    }
    if mode == WeightMode::Explicit {
        let mut norm = Polynomial::constant(&space, -1.0);
        for w in weight_polys(&space, p.num_objectives(), mode) {
            norm = &norm + &w;
        }
        equations.push(norm);
        labels.push("sum w - 1".into());
    }
    PfSystem::new(space, equations, labels).expect("consistent construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn portfolio_pf_system_shape() {
        let p = fixtures::portfolio();
        let sys = build_pf_system(&p, WeightMode::Convex);
        assert_eq!(sys.equations.len(), 6);
        assert_eq!(sys.space.len(), 7);
        assert_eq!(sys.space.names(), ["x1", "x2", "x3", "w1", "lambda1", "s1", "s2"]);
        assert_eq!(sys.keep_vars, vec![5, 6]);
    }

    #[test]
    fn example3_gradient_degree_drops_to_one() {
        let sys = build_pf_system(&fixtures::example3(), WeightMode::Convex);
        assert_eq!(sys.equations.len(), 4);
        assert_eq!(sys.space.len(), 6);
        let mut d = sys.degrees.clone();
        d.sort();
        assert_eq!(d, vec![1, 2, 2, 2]);
        let g = Polynomial::parse(&sys.space, "2*x - 4 + 4*w1 + 2*w2").unwrap();
        assert_eq!(sys.equations[0], g);
    }

    #[test]
    fn lagrangian_single_constraint() {
        let p = MOProblem::from_exprs(&["x1"], &["x1", "x1^2"], &["x1 - 1"]).unwrap();
        let lag = build_lagrangian(&p, WeightMode::Convex);
        let expected = Polynomial::parse(lag.space(), "w1*x1 + (1 - w1)*x1^2 - lambda1*(x1 - 1)").unwrap();
        assert_eq!(lag, expected);
        let explicit = build_lagrangian(&p, WeightMode::Explicit);
        assert!(explicit.space().index_of("w2").is_some());
        let sys = build_pf_system(&p, WeightMode::Explicit);
        assert_eq!(sys.labels.last().unwrap(), "sum w - 1");
    }

    #[test]
    fn portfolio_lagrangian_matches_stationarity_block() {
        let p = fixtures::portfolio();
        let sys = build_pf_system(&p, WeightMode::Convex);
        // -w1*a + 2*(1 - w1)*B*x + lambda*1 with a = (10,20,15)e-2, B row 1 = (5,1,2)e-4
        let g1 = Polynomial::parse(
            &sys.space,
            "-0.1*w1 + 2*(1 - w1)*(5e-4*x1 + 1e-4*x2 + 2e-4*x3) - lambda1",
        )
        .unwrap();
        // the Lagrangian subtracts lambda*g, so the multiplier sign is flipped
        let diff = &sys.equations[0] - &g1;
        assert!(diff.max_abs_coeff() < 1e-15, "{diff}");
    }

    #[test]
    fn objective_values_on_fixtures() {
        let p = fixtures::portfolio();
        let s = p.objective_values_at(&[18.18, 50.00, 31.82]);
        assert!((s[0] + 16.59).abs() < 0.005, "{s:?}");
        assert!((s[1] - 4.74).abs() < 0.005, "{s:?}");
        assert_eq!(fixtures::example1().objective_values_at(&[3.0, 2.0]), vec![0.0, 5.0, 7.0]);
        assert_eq!(fixtures::example3().objective_values_at(&[0.0]), vec![0.0, 1.0, 4.0]);
        let named: HashMap<String, f64> = [("x".to_string(), 0.0)].into();
        assert_eq!(fixtures::example3().objective_values(&named).unwrap(), vec![0.0, 1.0, 4.0]);
        assert!(fixtures::example3().objective_values(&HashMap::new()).is_err());
    }

    #[test]
    fn convex_mode_never_mentions_last_weight() {
        for p in [fixtures::example1(), fixtures::example3()] {
            let sys = build_pf_system(&p, WeightMode::Convex);
            assert!(sys.space.index_of("w3").is_none());
            assert_eq!(sys.space.indices_with_role(Role::Weight).len(), 2);
        }
    }

    #[test]
    fn validation_errors() {
        assert!(MOProblem::from_exprs(&["x"], &["x"], &[]).is_err());
        assert!(MOProblem::from_exprs(&["x"], &["x", "y"], &[]).is_err());
        assert!(MOProblem::from_exprs(&["x", "x"], &["x", "x^2"], &[]).is_err());
        assert!(MOProblem::from_exprs(&["s1"], &["s1", "s1^2"], &[]).is_err());
    }

    #[test]
    fn json_round_trip_is_exact() {
        for p in fixtures::all() {
            let back = MOProblem::from_json(&p.problem.to_json()).unwrap();
            assert_eq!(back, p.problem);
        }
        let err = MOProblem::from_json(r#"{"decision_vars":["x"],"objectives":[]}"#).unwrap_err();
        assert!(err.to_string().contains("two objectives"));
        let err = MOProblem::from_json(
            r#"{"decision_vars":["x"],"objectives":[[{"coeff":1,"monomial":{"y":1}}],[]]}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("objectives[0]"), "{err}");
    }
}
