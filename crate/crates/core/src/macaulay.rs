//! Macaulay matrices of a PF system.
//!
//! Row `r` holds the coefficients of `shift_r * eq_{source_r}` in the basis
//! of all monomials of total degree at most `d`, in canonical order. Rows are
//! kept sparse; dense blocks are materialized for factorization.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use faer::Mat;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::polyring::{binomial, monomials_of_degree, monomials_up_to_n, Monomial, Polynomial, VariableSpace};
use crate::problem::PfSystem;

/// Which equation a row came from and the monomial it was multiplied by.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct RowSource {
    pub equation: usize,
    pub shift: Monomial,
}

#[derive(Clone, Debug)]
pub struct MacaulayMatrix {
    space: Arc<VariableSpace>,
    sources: Arc<Vec<Polynomial>>,
    degree: usize,
    columns: Vec<Monomial>,
    column_index: HashMap<Monomial, usize>,
    provenance: Vec<RowSource>,
    rows: Vec<Vec<(usize, f64)>>,
}

/// Partition of the columns into objective-only monomials and the rest.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColumnSplit {
    pub keep_columns: Vec<usize>,
    pub elim_columns: Vec<usize>,
}

/// Expected row count `p_d = sum_i C(V + d - d_i, d - d_i)`.
pub fn row_count(nvars: usize, degrees: &[i64], d: usize) -> usize {
    degrees
        .iter()
        .filter(|&&di| di >= 0 && di as usize <= d)
        .map(|&di| binomial(nvars + d - di as usize, d - di as usize))
        .sum()
}

/// Expected column count `q_d = C(V + d, d)`.
pub fn column_count(nvars: usize, d: usize) -> usize {
    binomial(nvars + d, d)
}

fn scatter(
    eq: &Polynomial,
    shift: &Monomial,
    column_index: &HashMap<Monomial, usize>,
) -> Vec<(usize, f64)> {
    let mut row: Vec<(usize, f64)> = eq
        .terms()
        .map(|(m, c)| (column_index[&m.mul(shift)], c))
        .collect();
    row.sort_unstable_by_key(|&(j, _)| j);
    row
}

pub fn build_macaulay(sys: &PfSystem, d: usize) -> Result<MacaulayMatrix> {
    let max_degree = sys.max_degree();
    if d < max_degree {
        return Err(Error::DegreeTooLow {
            degree: d,
            max_equation_degree: max_degree,
        });
    }
    let n = sys.space.len();
    let columns = monomials_up_to_n(n, d);
    let column_index: HashMap<Monomial, usize> =
        columns.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();
    let min_degree = sys.degrees.iter().copied().filter(|&x| x >= 0).min().unwrap_or(0) as usize;
    let shifts = monomials_up_to_n(n, d.saturating_sub(min_degree));

    let mut provenance = Vec::new();
    let mut rows = Vec::new();
    for (i, eq) in sys.equations.iter().enumerate() {
        if eq.is_zero() {
            continue;
        }
        let room = d - eq.degree() as usize;
        for shift in &shifts[..column_count(n, room)] {
            rows.push(scatter(eq, shift, &column_index));
            provenance.push(RowSource {
                equation: i,
                shift: shift.clone(),
            });
        }
    }
    Ok(MacaulayMatrix {
        space: sys.space.clone(),
        sources: Arc::new(sys.equations.clone()),
        degree: d,
        columns,
        column_index,
        provenance,
        rows,
    })
}

/// Grows `m` to degree `d + 1`; existing rows and columns stay a prefix.
pub fn extend_macaulay(m: &MacaulayMatrix) -> MacaulayMatrix {
    let n = m.space.len();
    let d = m.degree + 1;
    let mut out = m.clone();
    for mono in monomials_of_degree(n, d) {
        out.column_index.insert(mono.clone(), out.columns.len());
        out.columns.push(mono);
    }
    for (i, eq) in m.sources.iter().enumerate() {
        if eq.is_zero() || eq.degree() as usize > d {
            continue;
        }
        for shift in monomials_of_degree(n, d - eq.degree() as usize) {
            out.rows.push(scatter(eq, &shift, &out.column_index));
            out.provenance.push(RowSource { equation: i, shift });
        }
    }
    out.degree = d;
    out
}

impl MacaulayMatrix {
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.columns.len()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.nrows(), self.ncols())
    }

    pub fn space(&self) -> &Arc<VariableSpace> {
        &self.space
    }

    pub fn columns(&self) -> &[Monomial] {
        &self.columns
    }

    pub fn column_of(&self, m: &Monomial) -> Option<usize> {
        self.column_index.get(m).copied()
    }

    pub fn provenance(&self) -> &[RowSource] {
        &self.provenance
    }

    pub fn sources(&self) -> &[Polynomial] {
        &self.sources
    }

    /// Sparse row `r` as sorted `(column, value)` pairs.
    pub fn row(&self, r: usize) -> &[(usize, f64)] {
        &self.rows[r]
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// Recomputes row `r` from its provenance.
    pub fn reconstruct_row(&self, r: usize) -> Vec<(usize, f64)> {
        let src = &self.provenance[r];
        scatter(&self.sources[src.equation], &src.shift, &self.column_index)
    }

    pub fn to_dense(&self) -> Mat<f64> {
        let mut a = Mat::zeros(self.nrows(), self.ncols());
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                a[(i, j)] = v;
            }
        }
        a
    }

    /// Euclidean norm of every row.
    pub fn row_norms(&self) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| r.iter().map(|(_, v)| v * v).sum::<f64>().sqrt())
            .collect()
    }

    /// Dense copy of the selected columns, each row multiplied by `row_scale[r]`.
    pub fn dense_columns(&self, cols: &[usize], row_scale: &[f64]) -> Mat<f64> {
        let mut pos = vec![usize::MAX; self.ncols()];
        for (k, &j) in cols.iter().enumerate() {
            pos[j] = k;
        }
        let mut a = Mat::zeros(self.nrows(), cols.len());
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                if pos[j] != usize::MAX {
                    a[(i, pos[j])] = v * row_scale[i];
                }
            }
        }
        a
    }

    /// Writes the matrix in Matrix Market coordinate format plus a JSON
    /// sidecar (`<path>.json`) with column monomials and row provenance.
    pub fn write_matrix_market(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "%%MatrixMarket matrix coordinate real general")?;
        writeln!(out, "% Macaulay matrix of degree {}", self.degree)?;
        writeln!(out, "{} {} {}", self.nrows(), self.ncols(), self.nnz())?;
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                writeln!(out, "{} {} {:.16e}", i + 1, j + 1, v)?;
            }
        }
        out.flush()?;

        let named = |m: &Monomial| -> BTreeMap<String, u32> {
            m.exponents()
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(i, &e)| (self.space.name(i).to_string(), e))
                .collect()
        };
        let sidecar = Sidecar {
            degree: self.degree,
            rows: self.nrows(),
            cols: self.ncols(),
            columns: self.columns.iter().map(named).collect(),
            provenance: self
                .provenance
                .iter()
                .map(|p| ProvenanceRecord {
                    equation: p.equation,
                    shift: named(&p.shift),
                })
                .collect(),
        };
        let mut side = path.as_os_str().to_owned();
        side.push(".json");
        std::fs::write(side, serde_json::to_string(&sidecar)?)?;
        Ok(())
    }
}

#[derive(Serialize)]
struct Sidecar {
    degree: usize,
    rows: usize,
    cols: usize,
    columns: Vec<BTreeMap<String, u32>>,
    provenance: Vec<ProvenanceRecord>,
}

#[derive(Serialize)]
struct ProvenanceRecord {
    equation: usize,
    shift: BTreeMap<String, u32>,
}

/// Splits the columns of `m` by whether their monomial involves only `keep_vars`.
pub fn split_columns(m: &MacaulayMatrix, keep_vars: &[usize]) -> ColumnSplit {
    let mut keep_columns = Vec::new();
    let mut elim_columns = Vec::new();
    for (j, mono) in m.columns.iter().enumerate() {
        if mono.only_involves(|i| keep_vars.contains(&i)) {
            keep_columns.push(j);
        } else {
            elim_columns.push(j);
        }
    }
    ColumnSplit {
        keep_columns,
        elim_columns,
    }
}
