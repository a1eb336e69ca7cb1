//! Sparse multivariate polynomials with real coefficients.
//!
//! Every polynomial is tied to a [`VariableSpace`], an ordered list of named
//! variables each carrying a [`Role`]. Monomials are ordered graded first and
//! then lexicographically following the space order, so the constant monomial
//! comes first and, within a degree, `x1^2 < x1*x2 < ... < x2^2 < ...`.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative threshold below which coefficients are dropped after arithmetic.
pub const DEFAULT_PRUNE_TOL: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Decision,
    Weight,
    Multiplier,
    Objective,
}

/// Ordered, immutable set of named variables.
///
/// Roles must appear grouped in the order decision, weight, multiplier,
/// objective; this is what makes the objective-only monomials the trailing
/// variables of every degree block.
#[derive(Debug, PartialEq, Eq)]
pub struct VariableSpace {
    names: Vec<String>,
    roles: Vec<Role>,
    index: HashMap<String, usize>,
}

impl VariableSpace {
    pub fn new<I, S>(vars: I) -> Result<Arc<Self>>
    where
        I: IntoIterator<Item = (S, Role)>,
        S: Into<String>,
    {
        let mut names = Vec::new();
        let mut roles = Vec::new();
        let mut index = HashMap::new();
        for (name, role) in vars {
            let name = name.into();
            if name.is_empty() || !is_identifier(&name) {
                return Err(Error::InvalidProblem(format!("`{name}` is not a valid variable name")));
            }
            if index.insert(name.clone(), names.len()).is_some() {
                return Err(Error::DuplicateVariable(name));
            }
            if roles.last().is_some_and(|&last| last > role) {
                return Err(Error::RoleOrder(name));
            }
            names.push(name);
            roles.push(role);
        }
        Ok(Arc::new(Self { names, roles, index }))
    }

    /// A space whose variables all share one role.
    pub fn uniform<I, S>(names: I, role: Role) -> Result<Arc<Self>>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self::new(names.into_iter().map(|n| (n, role)))
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn roles(&self) -> &[Role] {
        &self.roles
    }

    pub fn role(&self, i: usize) -> Role {
        self.roles[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn require(&self, name: &str) -> Result<usize> {
        self.index_of(name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub fn indices_with_role(&self, role: Role) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.roles[i] == role).collect()
    }
}

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Exponent vector, one entry per variable of the owning space.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial(Box<[u32]>);

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial(vec![0; nvars].into_boxed_slice())
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Monomial(e.into_boxed_slice())
    }

    pub fn from_exponents(exps: Vec<u32>) -> Self {
        Monomial(exps.into_boxed_slice())
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> usize {
        self.0.iter().map(|&e| e as usize).sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        debug_assert_eq!(self.0.len(), other.0.len());
        Monomial(self.0.iter().zip(other.0.iter()).map(|(a, b)| a + b).collect())
    }

    /// True when every variable with a positive exponent satisfies `pred`.
    pub fn only_involves(&self, mut pred: impl FnMut(usize) -> bool) -> bool {
        self.0.iter().enumerate().all(|(i, &e)| e == 0 || pred(i))
    }

    pub fn eval(&self, point: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(point)
            .filter(|(&e, _)| e > 0)
            .map(|(&e, &v)| v.powi(e as i32))
            .product()
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// `C(n, k)`, saturating at `usize::MAX`.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    usize::try_from(acc).unwrap_or(usize::MAX)
}

/// All monomials in `nvars` variables of total degree exactly `d`, in
/// canonical order.
pub fn monomials_of_degree(nvars: usize, d: usize) -> Vec<Monomial> {
    fn rec(pos: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Monomial>) {
        if pos + 1 == cur.len() {
            cur[pos] = left;
            out.push(Monomial(cur.clone().into_boxed_slice()));
            cur[pos] = 0;
            return;
        }
        for e in (0..=left).rev() {
            cur[pos] = e;
            rec(pos + 1, left - e, cur, out);
        }
        cur[pos] = 0;
    }
    if nvars == 0 {
        return if d == 0 { vec![Monomial::one(0)] } else { vec![] };
    }
    let mut out = Vec::with_capacity(binomial(nvars + d - 1, d));
    rec(0, d as u32, &mut vec![0; nvars], &mut out);
    out
}

/// All monomials of total degree at most `d`, in canonical order.
pub fn monomials_up_to(space: &VariableSpace, d: usize) -> Vec<Monomial> {
    monomials_up_to_n(space.len(), d)
}

pub(crate) fn monomials_up_to_n(nvars: usize, d: usize) -> Vec<Monomial> {
    let mut out = Vec::with_capacity(binomial(nvars + d, d));
    for k in 0..=d {
        out.extend(monomials_of_degree(nvars, k));
    }
    out
}

/// Sparse polynomial over a [`VariableSpace`].
///
/// No stored coefficient is exactly zero.
#[derive(Clone, Debug)]
pub struct Polynomial {
    space: Arc<VariableSpace>,
    terms: BTreeMap<Monomial, f64>,
}

impl PartialEq for Polynomial {
    fn eq(&self, other: &Self) -> bool {
        same_space(&self.space, &other.space) && self.terms == other.terms
    }
}

fn same_space(a: &Arc<VariableSpace>, b: &Arc<VariableSpace>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Subtract,
    Multiply,
}

impl Polynomial {
    pub fn zero(space: &Arc<VariableSpace>) -> Self {
        Self {
            space: space.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(space: &Arc<VariableSpace>, c: f64) -> Self {
        Self::from_terms(space, [(Monomial::one(space.len()), c)])
    }

    pub fn var(space: &Arc<VariableSpace>, name: &str) -> Result<Self> {
        let i = space.require(name)?;
        Ok(Self::var_index(space, i))
    }

    pub fn var_index(space: &Arc<VariableSpace>, i: usize) -> Self {
        Self::from_terms(space, [(Monomial::var(space.len(), i), 1.0)])
    }

    /// Sums duplicate monomials and drops exact zeros.
    pub fn from_terms<I>(space: &Arc<VariableSpace>, terms: I) -> Self
    where
        I: IntoIterator<Item = (Monomial, f64)>,
    {
        let mut map = BTreeMap::new();
        for (m, c) in terms {
            assert_eq!(m.nvars(), space.len(), "monomial length does not match the space");
            *map.entry(m).or_insert(0.0) += c;
        }
        map.retain(|_, c| *c != 0.0);
        Self {
            space: space.clone(),
            terms: map,
        }
    }

    pub fn space(&self) -> &Arc<VariableSpace> {
        &self.space
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, f64)> + '_ {
        self.terms.iter().map(|(m, &c)| (m, c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, m: &Monomial) -> f64 {
        self.terms.get(m).copied().unwrap_or(0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; `-1` for the zero polynomial.
    pub fn degree(&self) -> i64 {
        self.terms
            .keys()
            .map(|m| m.degree() as i64)
            .max()
            .unwrap_or(-1)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().fold(0.0, |a, c| a.max(c.abs()))
    }

    /// Drops coefficients below `rel_tol` times the largest magnitude.
    pub fn prune(mut self, rel_tol: f64) -> Self {
        let cut = rel_tol * self.max_abs_coeff();
        self.terms.retain(|_, c| c.abs() > cut && *c != 0.0);
        self
    }

    /// Indices of variables that occur with a positive exponent.
    pub fn support(&self) -> Vec<usize> {
        (0..self.space.len())
            .filter(|&i| self.terms.keys().any(|m| m.0[i] > 0))
            .collect()
    }

    fn check_space(&self, other: &Polynomial) -> Result<()> {
        if same_space(&self.space, &other.space) {
            Ok(())
        } else {
            Err(Error::SpaceMismatch)
        }
    }

    pub fn arith(&self, other: &Polynomial, op: ArithOp) -> Result<Polynomial> {
        self.check_space(other)?;
        let out = match op {
            ArithOp::Add => self.combine(other, 1.0),
            ArithOp::Subtract => self.combine(other, -1.0),
            ArithOp::Multiply => self.product(other),
        };
        Ok(out.prune(DEFAULT_PRUNE_TOL))
    }

    pub fn checked_add(&self, other: &Polynomial) -> Result<Polynomial> {
        self.arith(other, ArithOp::Add)
    }

    pub fn checked_sub(&self, other: &Polynomial) -> Result<Polynomial> {
        self.arith(other, ArithOp::Subtract)
    }

    pub fn checked_mul(&self, other: &Polynomial) -> Result<Polynomial> {
        self.arith(other, ArithOp::Multiply)
    }

    pub fn scale(&self, c: f64) -> Polynomial {
        Self::from_terms(&self.space, self.terms.iter().map(|(m, &v)| (m.clone(), v * c)))
    }

    pub fn mul_monomial(&self, m: &Monomial) -> Polynomial {
        Polynomial {
            space: self.space.clone(),
            terms: self.terms.iter().map(|(k, &c)| (k.mul(m), c)).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Polynomial {
        let mut acc = Polynomial::constant(&self.space, 1.0);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    fn combine(&self, other: &Polynomial, sign: f64) -> Polynomial {
        let mut terms = self.terms.clone();
        for (m, &c) in &other.terms {
            *terms.entry(m.clone()).or_insert(0.0) += sign * c;
        }
        terms.retain(|_, c| *c != 0.0);
        Polynomial {
            space: self.space.clone(),
            terms,
        }
    }

    fn product(&self, other: &Polynomial) -> Polynomial {
        let mut terms: BTreeMap<Monomial, f64> = BTreeMap::new();
        for (ma, &ca) in &self.terms {
            for (mb, &cb) in &other.terms {
                *terms.entry(ma.mul(mb)).or_insert(0.0) += ca * cb;
            }
        }
        terms.retain(|_, c| *c != 0.0);
        Polynomial {
            space: self.space.clone(),
            terms,
        }
    }

    pub fn differentiate(&self, var: &str) -> Result<Polynomial> {
        let i = self.space.require(var)?;
        Ok(self.derivative(i))
    }

    /// Partial derivative with respect to the variable at index `i`.
    pub fn derivative(&self, i: usize) -> Polynomial {
        let terms = self.terms.iter().filter(|(m, _)| m.0[i] > 0).map(|(m, &c)| {
            let mut e = m.0.clone();
            let k = e[i];
            e[i] -= 1;
            (Monomial(e), c * k as f64)
        });
        Polynomial::from_terms(&self.space, terms)
    }

    /// Evaluates at a full assignment given in space order.
    pub fn eval(&self, point: &[f64]) -> f64 {
        assert_eq!(point.len(), self.space.len(), "point length does not match the space");
        self.terms.iter().map(|(m, &c)| c * m.eval(point)).sum()
    }

    /// Evaluates at a named assignment; only variables that occur in `self`
    /// need a value.
    pub fn evaluate(&self, point: &HashMap<String, f64>) -> Result<f64> {
        let mut full = vec![0.0; self.space.len()];
        for i in self.support() {
            let name = self.space.name(i);
            full[i] = *point
                .get(name)
                .ok_or_else(|| Error::MissingAssignment(name.to_string()))?;
        }
        Ok(self.eval(&full))
    }

    /// Re-expresses `self` in `target`, matching variables by name.
    pub fn embed(&self, target: &Arc<VariableSpace>) -> Result<Polynomial> {
        let map: Vec<Option<usize>> = self
            .space
            .names()
            .iter()
            .map(|n| target.index_of(n))
            .collect();
        let mut terms = Vec::with_capacity(self.terms.len());
        for (m, &c) in &self.terms {
            let mut e = vec![0u32; target.len()];
            for (i, &k) in m.0.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                let j = map[i].ok_or_else(|| Error::UnknownVariable(self.space.name(i).to_string()))?;
                e[j] = k;
            }
            terms.push((Monomial(e.into_boxed_slice()), c));
        }
        Ok(Polynomial::from_terms(target, terms))
    }

    /// Replaces the variable at `i` by `replacement` (same space).
    pub fn substitute(&self, i: usize, replacement: &Polynomial) -> Result<Polynomial> {
        self.check_space(replacement)?;
        let mut acc = Polynomial::zero(&self.space);
        let mut powers: Vec<Polynomial> = vec![Polynomial::constant(&self.space, 1.0)];
        for (m, &c) in &self.terms {
            let k = m.0[i] as usize;
            while powers.len() <= k {
                let next = powers.last().unwrap().product(replacement);
                powers.push(next);
            }
            let mut e = m.0.clone();
            e[i] = 0;
            let rest = Monomial(e);
            acc = acc.combine(&powers[k].mul_monomial(&rest).scale(c), 1.0);
        }
        Ok(acc.prune(DEFAULT_PRUNE_TOL))
    }

    /// Parses expressions such as `5*s2^2 - 6*s2*s3 + 1.5e-2*(x1 - 3)^2`.
    pub fn parse(space: &Arc<VariableSpace>, src: &str) -> Result<Polynomial> {
        let mut p = Parser {
            space,
            src: src.as_bytes(),
            pos: 0,
        };
        let out = p.expr()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(out)
    }

    pub fn to_term_list(&self) -> Vec<TermRecord> {
        self.terms
            .iter()
            .map(|(m, &c)| TermRecord {
                coeff: c,
                monomial: m
                    .0
                    .iter()
                    .enumerate()
                    .filter(|(_, &e)| e > 0)
                    .map(|(i, &e)| (self.space.name(i).to_string(), e))
                    .collect(),
            })
            .collect()
    }

    pub fn from_term_list(space: &Arc<VariableSpace>, terms: &[TermRecord]) -> Result<Polynomial> {
        let mut out = Vec::with_capacity(terms.len());
        for t in terms {
            if !t.coeff.is_finite() {
                return Err(Error::InvalidProblem(format!("non-finite coefficient {}", t.coeff)));
            }
            let mut e = vec![0u32; space.len()];
            for (name, &k) in &t.monomial {
                e[space.require(name)?] += k;
            }
            out.push((Monomial(e.into_boxed_slice()), t.coeff));
        }
        Ok(Polynomial::from_terms(space, out))
    }
}

/// One entry of the serialized term list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermRecord {
    pub coeff: f64,
    #[serde(default)]
    pub monomial: BTreeMap<String, u32>,
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, &c)) in self.terms.iter().rev().enumerate() {
            let (sign, mag) = if c < 0.0 { ("-", -c) } else { ("+", c) };
            if k == 0 {
                if sign == "-" {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            let factors: Vec<String> = m
                .0
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(i, &e)| {
                    if e == 1 {
                        self.space.name(i).to_string()
                    } else {
                        format!("{}^{}", self.space.name(i), e)
                    }
                })
                .collect();
            if factors.is_empty() {
                write!(f, "{mag}")?;
            } else if mag == 1.0 {
                write!(f, "{}", factors.join("*"))?;
            } else {
                write!(f, "{mag}*{}", factors.join("*"))?;
            }
        }
        Ok(())
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;

    /// Panics when the operands live in different spaces.
    fn add(self, rhs: &Polynomial) -> Polynomial {
        self.checked_add(rhs).expect("polynomial addition across spaces")
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;

    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self.checked_sub(rhs).expect("polynomial subtraction across spaces")
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;

    fn mul(self, rhs: &Polynomial) -> Polynomial {
        self.checked_mul(rhs).expect("polynomial product across spaces")
    }
}

impl Mul<f64> for &Polynomial {
    type Output = Polynomial;

    fn mul(self, rhs: f64) -> Polynomial {
        self.scale(rhs)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;

    fn neg(self) -> Polynomial {
        self.scale(-1.0)
    }
}

struct Parser<'a> {
    space: &'a Arc<VariableSpace>,
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> Error {
        Error::Parse {
            pos: self.pos,
            msg: msg.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Polynomial> {
        let mut acc = self.term()?;
        while let Some(c @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let rhs = self.term()?;
            acc = if c == b'+' { &acc + &rhs } else { &acc - &rhs };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Polynomial> {
        let mut acc = self.unary()?;
        while let Some(b'*') = self.peek() {
            self.pos += 1;
            let rhs = self.unary()?;
            acc = &acc * &rhs;
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Polynomial> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(-&self.unary()?)
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Polynomial> {
        let base = self.primary()?;
        if let Some(b'^') = self.peek() {
            self.pos += 1;
            self.skip_ws();
            let start = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            let e: u32 = std::str::from_utf8(&self.src[start..self.pos])
                .ok()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| self.error("expected a nonnegative integer exponent"))?;
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Polynomial> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.error("expected `)`"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_digit() || self.src[self.pos] == b'.')
                {
                    self.pos += 1;
                }
                if self.pos < self.src.len() && matches!(self.src[self.pos], b'e' | b'E') {
                    let save = self.pos;
                    self.pos += 1;
                    if self.pos < self.src.len() && matches!(self.src[self.pos], b'+' | b'-') {
                        self.pos += 1;
                    }
                    let digits = self.pos;
                    while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                        self.pos += 1;
                    }
                    if digits == self.pos {
                        self.pos = save;
                    }
                }
                let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                let v: f64 = text.parse().map_err(|_| self.error("malformed number"))?;
                Ok(Polynomial::constant(self.space, v))
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                Polynomial::var(self.space, name)
            }
            _ => Err(self.error("expected a number, variable or `(`")),
        }
    }
}
