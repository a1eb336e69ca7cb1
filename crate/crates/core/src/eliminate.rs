//! Numerical elimination on Macaulay matrices.
//!
//! The row space of `M_d` meets the space of objective-only coefficient
//! vectors in dimension `rank(M_d) - rank(N_d)`, where `N_d` holds the columns
//! of monomials touching an elimination variable. A basis `V` of the left null
//! space of `N_d` turns `V^T M_d` into polynomials in the objective variables
//! alone.

use std::sync::Arc;

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, full_svd, rank_from_singular_values, singular_values};
use crate::newton::{start_scale, NewtonOptions, NewtonSystem};
use crate::macaulay::{build_macaulay, extend_macaulay, split_columns, ColumnSplit, MacaulayMatrix};
use crate::polyring::{Monomial, Polynomial, Role, TermRecord, VariableSpace};
use crate::problem::PfSystem;

pub use crate::linalg::numerical_rank;

pub const DEFAULT_RANK_TOL: f64 = 1e-10;
pub const DEFAULT_DEGREE_MAX: usize = 12;
/// About 480 MB of `f64`.
pub const DEFAULT_MAX_DENSE_ENTRIES: usize = 60_000_000;
/// Coefficients below this fraction of the largest one are zeroed after normalization.
pub const COEFF_CUTOFF: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EliminationOptions {
    pub rank_tol: f64,
    pub degree_max: usize,
    /// Scale every Macaulay row to unit 2-norm before factorizing.
    pub row_scaling: bool,
    /// Rescale variables and equations by powers of two so coefficients
    /// cluster around one (see [`balance_exponents`]).
    #[serde(default = "yes")]
    pub balance: bool,
    /// Keep raising the degree until the eliminant cuts out a set of the
    /// same dimension as the front near a sampled point.
    #[serde(default = "yes")]
    pub completeness: bool,
    /// Refuse degrees whose dense working set (`p*q + p*p` doubles for the
    /// matrix and the left singular vectors) exceeds this many entries.
    #[serde(default = "default_max_dense_entries")]
    pub max_dense_entries: usize,
}

fn default_max_dense_entries() -> usize {
    DEFAULT_MAX_DENSE_ENTRIES
}

fn yes() -> bool {
    true
}

impl Default for EliminationOptions {
    fn default() -> Self {
        Self {
            rank_tol: DEFAULT_RANK_TOL,
            degree_max: DEFAULT_DEGREE_MAX,
            row_scaling: true,
            balance: true,
            completeness: true,
            max_dense_entries: DEFAULT_MAX_DENSE_ENTRIES,
        }
    }
}

/// Polynomials in the objective variables whose common zero set contains
/// the Pareto front.
#[derive(Clone, Debug)]
pub struct EliminantSystem {
    pub space: Arc<VariableSpace>,
    pub polynomials: Vec<Polynomial>,
    pub degree_used: usize,
    pub rank_m: usize,
    pub rank_n: usize,
    pub intersection_dim: usize,
    pub tolerance_used: f64,
    pub diagnostics: Diagnostics,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub p_d: usize,
    pub q_d: usize,
    pub keep_columns: usize,
    pub elim_columns: usize,
    /// Dimension `l` of the left null space of `N_d`.
    pub null_dim: usize,
    /// Rows of `V^T M_d` above the threshold (`l'`).
    pub surviving_rows: usize,
    pub sigma_max_n: f64,
    /// `max |V^T N_d|`.
    pub null_residual: f64,
    /// `(degree, intersection dimension)` for every degree tried.
    pub profile: Vec<(usize, usize)>,
    pub row_scaling: bool,
    /// Power-of-two exponent applied to each PF variable (empty when unbalanced).
    #[serde(default)]
    pub variable_scaling: Vec<i32>,
    /// Dimension of the front's image near the sampled point, when one was found.
    #[serde(default)]
    pub image_dim: Option<usize>,
}

/// Both ranks and their difference at one degree.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IntersectionReport {
    pub degree: usize,
    pub rank_m: usize,
    pub rank_n: usize,
    pub dim: usize,
}

fn row_scale(m: &MacaulayMatrix, opts: &EliminationOptions) -> Vec<f64> {
    if opts.row_scaling {
        m.row_norms()
            .into_iter()
            .map(|n| if n > 0.0 { 1.0 / n } else { 1.0 })
            .collect()
    } else {
        vec![1.0; m.nrows()]
    }
}

/// `rank(M_d) - rank(N_d)` from two independent singular value computations.
pub fn intersection_dimension(
    m: &MacaulayMatrix,
    split: &ColumnSplit,
    opts: &EliminationOptions,
) -> Result<IntersectionReport> {
    let scale = row_scale(m, opts);
    let all: Vec<usize> = (0..m.ncols()).collect();
    let full = m.dense_columns(&all, &scale);
    let rank_m = numerical_rank(full.as_ref(), opts.rank_tol)?;
    drop(full);
    let n = m.dense_columns(&split.elim_columns, &scale);
    let rank_n = numerical_rank(n.as_ref(), opts.rank_tol)?;
    Ok(IntersectionReport {
        degree: m.degree(),
        rank_m,
        rank_n,
        dim: rank_m.saturating_sub(rank_n),
    })
}

/// Left null space of `N_d` and the objective block of `V^T M_d`.
struct NullSpaceAnalysis {
    rank_n: usize,
    sigma_max_n: f64,
    v: Mat<f64>,
    /// `V^T M_keep`, one row per null vector.
    keep_block: Mat<f64>,
    threshold: f64,
    rank_keep: usize,
    n: Mat<f64>,
}

fn analyze(m: &MacaulayMatrix, split: &ColumnSplit, opts: &EliminationOptions) -> Result<NullSpaceAnalysis> {
    let (p, q) = m.shape();
    let scale = row_scale(m, opts);
    let n = m.dense_columns(&split.elim_columns, &scale);
    let mk = m.dense_columns(&split.keep_columns, &scale);

    let svd = full_svd(n.as_ref())?;
    let rank_n = rank_from_singular_values(&svd.s, opts.rank_tol, n.nrows(), n.ncols());
    let sigma_max_n = svd.s.first().copied().unwrap_or(0.0);
    let v = svd.u.as_ref().subcols(rank_n, p - rank_n).to_owned();
    drop(svd);

    let keep_block = if v.ncols() == 0 || mk.ncols() == 0 {
        Mat::zeros(v.ncols(), mk.ncols())
    } else {
        v.as_ref().transpose() * mk.as_ref()
    };
    let keep_sv = singular_values(keep_block.as_ref())?;
    // Reference scale ~ sigma_max(M_d): both blocks bound it from below.
    let mk_norm = singular_values(mk.as_ref())?.first().copied().unwrap_or(0.0);
    let sigma_ref = sigma_max_n.max(mk_norm);
    let threshold = opts.rank_tol * sigma_ref * p.max(q) as f64;
    let rank_keep = keep_sv.iter().take_while(|&&s| s > threshold).count();
    Ok(NullSpaceAnalysis {
        rank_n,
        sigma_max_n,
        v,
        keep_block,
        threshold,
        rank_keep,
        n,
    })
}

/// Smallest degree in `[max equation degree, degree_max]` at which
/// [`eliminate`] succeeds.
pub fn find_eliminant_degree(sys: &PfSystem, opts: &EliminationOptions) -> Result<usize> {
    eliminate(sys, opts).map(|t| t.degree_used)
}

/// Runs the degree search and extracts the eliminant at the first degree
/// with a nontrivial intersection. With `opts.completeness`, degrees whose
/// eliminant cuts out a set of too high dimension near a sampled front point
/// are skipped as well.
pub fn eliminate(sys: &PfSystem, opts: &EliminationOptions) -> Result<EliminantSystem> {
    let scaling = if opts.balance { Some(balance_exponents(sys)?) } else { None };
    let balanced;
    let sys = match &scaling {
        Some(b) => {
            balanced = balanced_system(sys, b)?;
            &balanced
        }
        None => sys,
    };
    let probe = if opts.completeness { probe_front(sys)? } else { None };
    let mut profile = Vec::new();
    let mut d = sys.max_degree();
    let mut m = build_macaulay(sys, d)?;
    loop {
        if d > opts.degree_max {
            return Err(Error::DegreeCapExceeded {
                d_max: opts.degree_max,
                profile,
            });
        }
        let (p, q) = m.shape();
        if p.saturating_mul(q).saturating_add(p.saturating_mul(p)) > opts.max_dense_entries {
            return Err(Error::MatrixTooLarge {
                degree: d,
                rows: p,
                cols: q,
                profile,
            });
        }
        let split = split_columns(&m, &sys.keep_vars);
        let a = analyze(&m, &split, opts)?;
        profile.push((d, a.rank_keep));
        if a.rank_keep >= 1 {
            let mut out = finish(&m, &split, a, opts)?;
            let complete = probe.as_ref().map_or(true, |p| p.is_cut_out_by(&out.polynomials));
            if complete {
                out.diagnostics.profile = profile;
                out.diagnostics.image_dim = probe.map(|p| p.image_dim);
                if let Some(b) = scaling {
                    let exps: Vec<i32> = sys.keep_vars.iter().map(|&j| b.variables[j]).collect();
                    out.polynomials = out.polynomials.iter().map(|t| unscale(t, &exps)).collect();
                    out.diagnostics.variable_scaling = b.variables;
                }
                return Ok(out);
            }
        }
        m = extend_macaulay(&m);
        d += 1;
    }
}

/// Points on the PF variety at random positive weights and the dimension of
/// the variety's image in objective space, maximized over the points.
#[derive(Clone, Debug)]
struct FrontProbe {
    points: Vec<Vec<f64>>,
    image_dim: usize,
}

const PROBE_STARTS: usize = 64;
const PROBE_POINTS: usize = 8;
const PROBE_SEED: u64 = 42;

impl FrontProbe {
    /// True when the Jacobian of `polys` reaches the codimension of the image
    /// at one of the probe points. Singular points of the zero set drop rank,
    /// so the best point stands in for a generic one.
    fn is_cut_out_by(&self, polys: &[Polynomial]) -> bool {
        let need = self.points[0].len().saturating_sub(self.image_dim);
        self.points.iter().any(|s| jacobian_rank(polys, s) >= need)
    }
}

fn jacobian_rank(polys: &[Polynomial], s: &[f64]) -> usize {
    let m = s.len();
    let grads: Vec<Vec<f64>> = polys
        .iter()
        .map(|t| {
            let g: Vec<f64> = (0..m).map(|j| t.derivative(j).eval(s)).collect();
            let n = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            g.iter().map(|v| if n > 0.0 { v / n } else { 0.0 }).collect()
        })
        .collect();
    if grads.is_empty() {
        return 0;
    }
    let j = Mat::from_fn(grads.len(), m, |i, k| grads[i][k]);
    let sv = singular_values(j.as_ref()).unwrap_or_default();
    sv.iter().filter(|&&x| x > 1e-6).count()
}

/// Solves the PF system with the leading weights pinned to fresh random
/// positive values for every start. `None` when no start converges or the
/// system is not square after pinning.
fn probe_front(sys: &PfSystem) -> Result<Option<FrontProbe>> {
    use rand::{Rng, SeedableRng};
    use rand_distr::StandardNormal;

    let nv = sys.space.len();
    let neq = sys.equations.len();
    let weights = sys.space.indices_with_role(Role::Weight);
    if neq > nv || nv - neq > weights.len() {
        return Ok(None);
    }
    let pinned = &weights[..nv - neq];
    let unknowns: Vec<usize> = (0..nv).filter(|j| !pinned.contains(j)).collect();
    let newton = NewtonSystem::new(sys.equations.clone(), unknowns.clone());
    let spread = start_scale(&sys.equations);
    let nopts = NewtonOptions::default();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(PROBE_SEED);
    let mut points: Vec<Vec<f64>> = Vec::new();
    let mut image_dim = 0;
    for _ in 0..PROBE_STARTS {
        let raw: Vec<f64> = (0..=pinned.len()).map(|_| rng.gen_range(0.5..1.5)).collect();
        let total: f64 = raw.iter().sum();
        let mut base = vec![0.0; nv];
        for (&j, r) in pinned.iter().zip(&raw) {
            base[j] = r / total;
        }
        let start: Vec<f64> = (0..unknowns.len())
            .map(|_| spread * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let out = newton.solve(&base, &start, &nopts);
        if !(out.residual <= PROBE_RESIDUAL) {
            continue;
        }
        let mut z = base;
        for (&j, v) in unknowns.iter().zip(&out.z) {
            z[j] = *v;
        }
        let s: Vec<f64> = sys.keep_vars.iter().map(|&j| z[j]).collect();
        if points.iter().any(|q| q.iter().zip(&s).all(|(a, b)| (a - b).abs() <= 1e-6 * (1.0 + b.abs()))) {
            continue;
        }
        image_dim = image_dim.max(image_dimension(sys, &z)?);
        points.push(s);
        if points.len() == PROBE_POINTS {
            break;
        }
    }
    Ok((!points.is_empty()).then_some(FrontProbe { points, image_dim }))
}

const PROBE_RESIDUAL: f64 = 1e-10;

/// Rank of the projection of the variety's tangent space at `z` onto the
/// objective coordinates.
fn image_dimension(sys: &PfSystem, z: &[f64]) -> Result<usize> {
    let nv = sys.space.len();
    let jac = Mat::from_fn(sys.equations.len(), nv, |i, j| sys.equations[i].derivative(j).eval(z));
    let svd = full_svd(jac.as_ref())?;
    let smax = svd.s.first().copied().unwrap_or(0.0);
    let rank = svd.s.iter().filter(|&&x| x > 1e-8 * smax.max(1.0)).count();
    let tangent = svd.v.as_ref().subcols(rank, nv - rank);
    let proj = Mat::from_fn(sys.keep_vars.len(), nv - rank, |i, k| tangent[(sys.keep_vars[i], k)]);
    let sv = singular_values(proj.as_ref())?;
    Ok(sv.iter().filter(|&&x| x > 1e-6).count())
}

/// Power-of-two exponents for variables and equations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Balancing {
    pub variables: Vec<i32>,
    pub equations: Vec<i32>,
}

/// Least-squares fit of `log2|c| + sum_j e_j b_j + g_i ~ 0` over every term
/// `c z^e` of every equation `i`, rounded to integers so that rescaling is
/// exact in floating point.
pub fn balance_exponents(sys: &PfSystem) -> Result<Balancing> {
    let nv = sys.space.len();
    let ne = sys.equations.len();
    let mut rows: Vec<(Vec<f64>, f64)> = Vec::new();
    for (i, eq) in sys.equations.iter().enumerate() {
        for (mono, c) in eq.terms() {
            let mut row = vec![0.0; nv + ne];
            for (j, &e) in mono.exponents().iter().enumerate() {
                row[j] = e as f64;
            }
            row[nv + i] = 1.0;
            rows.push((row, -c.abs().log2()));
        }
    }
    if rows.is_empty() {
        return Ok(Balancing {
            variables: vec![0; nv],
            equations: vec![0; ne],
        });
    }
    let a = Mat::from_fn(rows.len(), nv + ne, |i, j| rows[i].0[j]);
    let b: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let x = linalg::lstsq(a.as_ref(), &b, 1e-12)?;
    let r = |v: f64| v.round().clamp(-200.0, 200.0) as i32;
    Ok(Balancing {
        variables: x[..nv].iter().copied().map(r).collect(),
        equations: x[nv..].iter().copied().map(r).collect(),
    })
}

/// The system in the variables `z'_j = 2^{-b_j} z_j`, with equation `i`
/// multiplied by `2^{g_i}`.
pub fn balanced_system(sys: &PfSystem, b: &Balancing) -> Result<PfSystem> {
    let equations = sys
        .equations
        .iter()
        .zip(&b.equations)
        .map(|(eq, &g)| {
            Polynomial::from_terms(
                &sys.space,
                eq.terms().map(|(mono, c)| {
                    let k: i32 = g + mono.exponents().iter().zip(&b.variables).map(|(&e, &v)| e as i32 * v).sum::<i32>();
                    (mono.clone(), c * 2f64.powi(k))
                }),
            )
        })
        .collect();
    PfSystem::new(sys.space.clone(), equations, sys.labels.clone())
}

/// Maps a polynomial in scaled objective variables back to the original ones.
fn unscale(t: &Polynomial, exps: &[i32]) -> Polynomial {
    let p = Polynomial::from_terms(
        t.space(),
        t.terms().map(|(mono, c)| {
            let k: i32 = mono.exponents().iter().zip(exps).map(|(&e, &v)| e as i32 * v).sum();
            (mono.clone(), c * 2f64.powi(-k))
        }),
    );
    rescale(p)
}

fn rescale(p: Polynomial) -> Polynomial {
    let lead = p.terms().map(|(_, c)| c).fold(0.0f64, |a, c| if c.abs() > a.abs() { c } else { a });
    if lead == 0.0 {
        p
    } else {
        p.scale(1.0 / lead)
    }
}

/// Extracts the eliminant system at the degree of `m`.
pub fn extract_eliminant(
    m: &MacaulayMatrix,
    split: &ColumnSplit,
    opts: &EliminationOptions,
) -> Result<EliminantSystem> {
    let a = analyze(m, split, opts)?;
    let mut out = finish(m, split, a, opts)?;
    out.diagnostics.profile = vec![(m.degree(), out.intersection_dim)];
    Ok(out)
}

fn finish(
    m: &MacaulayMatrix,
    split: &ColumnSplit,
    a: NullSpaceAnalysis,
    opts: &EliminationOptions,
) -> Result<EliminantSystem> {
    let (p, q) = m.shape();
    let l = a.v.ncols();
    let k = split.keep_columns.len();

    let surviving: Vec<usize> = (0..l)
        .filter(|&i| {
            let norm: f64 = (0..k).map(|j| a.keep_block[(i, j)].powi(2)).sum::<f64>().sqrt();
            norm > a.threshold
        })
        .collect();
    if surviving.is_empty() || a.rank_keep == 0 {
        return Err(Error::EmptyEliminant);
    }
    let block = Mat::from_fn(surviving.len(), k, |i, j| a.keep_block[(surviving[i], j)]);
    let svd = block.as_ref().thin_svd().map_err(|_| Error::Factorization)?;
    let r = a.rank_keep.min(svd.S().column_vector().nrows());
    let basis = Mat::from_fn(r, k, |i, j| svd.V()[(j, i)]);
    let rows = canonical_basis(basis);

    let null_residual = if l == 0 || a.n.ncols() == 0 {
        0.0
    } else {
        linalg::max_abs((a.v.as_ref().transpose() * a.n.as_ref()).as_ref())
    };

    let keep_vars: Vec<usize> = m.space().indices_with_role(Role::Objective);
    let space = VariableSpace::new(keep_vars.iter().map(|&i| (m.space().name(i).to_string(), Role::Objective)))?;
    let monos: Vec<Monomial> = split
        .keep_columns
        .iter()
        .map(|&j| {
            let e = m.columns()[j].exponents();
            Monomial::from_exponents(keep_vars.iter().map(|&i| e[i]).collect())
        })
        .collect();
    let polynomials = rows
        .iter()
        .map(|row| normalize(Polynomial::from_terms(&space, monos.iter().cloned().zip(row.iter().copied()))))
        .collect();

    Ok(EliminantSystem {
        space,
        polynomials,
        degree_used: m.degree(),
        rank_m: a.rank_n + a.rank_keep,
        rank_n: a.rank_n,
        intersection_dim: a.rank_keep,
        tolerance_used: opts.rank_tol,
        diagnostics: Diagnostics {
            p_d: p,
            q_d: q,
            keep_columns: k,
            elim_columns: split.elim_columns.len(),
            null_dim: l,
            surviving_rows: surviving.len(),
            sigma_max_n: a.sigma_max_n,
            null_residual,
            profile: Vec::new(),
            row_scaling: opts.row_scaling,
            variable_scaling: Vec::new(),
            image_dim: None,
        },
    })
}

/// Reduced row echelon form with pivots taken from the highest monomial
/// down, so the result depends only on the spanned subspace.
fn canonical_basis(mut b: Mat<f64>) -> Vec<Vec<f64>> {
    let (r, k) = (b.nrows(), b.ncols());
    let scale = linalg::max_abs(b.as_ref()).max(f64::MIN_POSITIVE);
    let mut pivot_row = 0;
    for col in (0..k).rev() {
        if pivot_row == r {
            break;
        }
        let (best, val) = (pivot_row..r)
            .map(|i| (i, b[(i, col)].abs()))
            .fold((pivot_row, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if val <= 1e-8 * scale {
            continue;
        }
        for j in 0..k {
            let t = b[(best, j)];
            b[(best, j)] = b[(pivot_row, j)];
            b[(pivot_row, j)] = t;
        }
        let pv = b[(pivot_row, col)];
        for j in 0..k {
            b[(pivot_row, j)] /= pv;
        }
        for i in 0..r {
            if i == pivot_row {
                continue;
            }
            let f = b[(i, col)];
            if f != 0.0 {
                for j in 0..k {
                    b[(i, j)] -= f * b[(pivot_row, j)];
                }
                b[(i, col)] = 0.0;
            }
        }
        pivot_row += 1;
    }
    (0..pivot_row).map(|i| (0..k).map(|j| b[(i, j)]).collect()).collect()
}

/// Divides by the largest-magnitude coefficient and zeroes relative noise.
pub fn normalize(p: Polynomial) -> Polynomial {
    let (mut best, mut lead) = (0.0f64, 0.0);
    for (_, c) in p.terms() {
        if c.abs() > best {
            best = c.abs();
            lead = c;
        }
    }
    if lead == 0.0 {
        return p;
    }
    let scaled = Polynomial::from_terms(p.space(), p.terms().map(|(m, c)| (m.clone(), c / lead)));
    scaled.prune(COEFF_CUTOFF)
}

impl EliminantSystem {
    pub fn num_objectives(&self) -> usize {
        self.space.len()
    }

    /// `|t_i(s)|` for every polynomial.
    pub fn residuals(&self, s: &[f64]) -> Vec<f64> {
        self.polynomials.iter().map(|t| t.eval(s).abs()).collect()
    }

    pub fn max_residual(&self, s: &[f64]) -> f64 {
        self.residuals(s).into_iter().fold(0.0, f64::max)
    }

    pub fn to_file(&self) -> EliminantFile {
        EliminantFile {
            degree: self.degree_used,
            rank_m: self.rank_m,
            rank_n: self.rank_n,
            intersection_dim: self.intersection_dim,
            tolerance: self.tolerance_used,
            variables: self.space.names().to_vec(),
            polynomials: self.polynomials.iter().map(Polynomial::to_term_list).collect(),
            diagnostics: Some(self.diagnostics.clone()),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("eliminant serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: EliminantFile = serde_json::from_str(text)?;
        file.into_system()
    }
}

/// On-disk eliminant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EliminantFile {
    pub degree: usize,
    #[serde(rename = "rank_M")]
    pub rank_m: usize,
    #[serde(rename = "rank_N")]
    pub rank_n: usize,
    pub intersection_dim: usize,
    pub tolerance: f64,
    #[serde(default)]
    pub variables: Vec<String>,
    pub polynomials: Vec<Vec<TermRecord>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<Diagnostics>,
}

impl EliminantFile {
    pub fn into_system(self) -> Result<EliminantSystem> {
        let mut names = self.variables.clone();
        if names.is_empty() {
            let mut seen: Vec<String> = self
                .polynomials
                .iter()
                .flatten()
                .flat_map(|t| t.monomial.keys().cloned())
                .collect();
            seen.sort_by_key(|n| (n.len(), n.clone()));
            seen.dedup();
            names = seen;
        }
        let space = VariableSpace::uniform(names, Role::Objective)?;
        let polynomials = self
            .polynomials
            .iter()
            .map(|t| Polynomial::from_term_list(&space, t))
            .collect::<Result<Vec<_>>>()?;
        Ok(EliminantSystem {
            space,
            polynomials,
            degree_used: self.degree,
            rank_m: self.rank_m,
            rank_n: self.rank_n,
            intersection_dim: self.intersection_dim,
            tolerance_used: self.tolerance,
            diagnostics: self.diagnostics.unwrap_or_default(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::problem::{build_pf_system, WeightMode};

    fn pf(p: &crate::problem::MOProblem) -> PfSystem {
        build_pf_system(p, WeightMode::Convex)
    }

    #[test]
    fn example1_eliminant_matches_printed_polynomial() {
        let sys = pf(&fixtures::example1());
        let t = eliminate(&sys, &EliminationOptions::default()).unwrap();
        assert_eq!(t.degree_used, 2);
        assert_eq!(t.polynomials.len(), 1);
        let expected = normalize(Polynomial::parse(&t.space, fixtures::EXAMPLE1_ELIMINANT).unwrap());
        let got = &t.polynomials[0];
        let diff = got - &expected;
        assert!(diff.max_abs_coeff() < 1e-6, "{got} vs {expected}");
    }

    #[test]
    fn objective_only_system_has_full_intersection() {
        let space = VariableSpace::new([("s1", Role::Objective), ("s2", Role::Objective)]).unwrap();
        let eq = Polynomial::parse(&space, "s1 + s2 - 1").unwrap();
        let sys = PfSystem::new(space, vec![eq], vec!["e".into()]).unwrap();
        let m = build_macaulay(&sys, 1).unwrap();
        let split = split_columns(&m, &sys.keep_vars);
        let rep = intersection_dimension(&m, &split, &EliminationOptions::default()).unwrap();
        assert_eq!(rep.rank_n, 0);
        assert_eq!(rep.dim, rep.rank_m);
        let t = extract_eliminant(&m, &split, &EliminationOptions::default()).unwrap();
        assert_eq!(t.polynomials.len(), 1);
        let diff = &t.polynomials[0] - &Polynomial::parse(&t.space, "s1 + s2 - 1").unwrap();
        assert!(diff.max_abs_coeff() < 1e-14);
    }

    #[test]
    fn degree_cap_is_reported() {
        let sys = pf(&fixtures::example2());
        let opts = EliminationOptions {
            degree_max: 3,
            ..Default::default()
        };
        match find_eliminant_degree(&sys, &opts) {
            Err(Error::DegreeCapExceeded { d_max, profile }) => {
                assert_eq!(d_max, 3);
                assert_eq!(profile, vec![(3, 0)]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn oversized_degree_is_refused() {
        let sys = pf(&fixtures::example2());
        let opts = EliminationOptions {
            max_dense_entries: 1000,
            ..Default::default()
        };
        match eliminate(&sys, &opts) {
            Err(Error::MatrixTooLarge { degree, profile, .. }) => {
                assert_eq!(degree, 3);
                assert!(profile.is_empty());
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn below_threshold_extraction_is_an_error() {
        let sys = pf(&fixtures::example2());
        let m = build_macaulay(&sys, 3).unwrap();
        let split = split_columns(&m, &sys.keep_vars);
        assert!(matches!(
            extract_eliminant(&m, &split, &EliminationOptions::default()),
            Err(Error::EmptyEliminant)
        ));
    }

    #[test]
    fn canonical_basis_is_basis_independent() {
        let a = Mat::from_fn(2, 3, |i, j| [[1.0, 2.0, 0.0], [0.0, 1.0, 1.0]][i][j]);
        let b = Mat::from_fn(2, 3, |i, j| [[1.0, 3.0, 1.0], [2.0, 3.0, -1.0]][i][j]);
        let ra = canonical_basis(a);
        let rb = canonical_basis(b);
        for (x, y) in ra.iter().flatten().zip(rb.iter().flatten()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn eliminant_json_round_trip() {
        let sys = pf(&fixtures::example1());
        let t = eliminate(&sys, &EliminationOptions::default()).unwrap();
        let back = EliminantSystem::from_json(&t.to_json()).unwrap();
        assert_eq!(back.polynomials, t.polynomials);
        assert_eq!(back.to_json(), t.to_json());
    }
}
