//! Non-redundant polynomial / Volterra bases, regressor rows, design
//! matrices and LNL-cascade expansions.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Which family of monomials a catalog spans.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    /// Time-series model over a lag window `x(n), ..., x(n-L+1)`.
    Volterra,
    /// Independent input vectors, all monomials up to order `P`.
    PolynomialIid,
    /// Products of distinct variables only.
    Multilinear,
}

impl ModelKind {
    pub fn allows_repeats(self) -> bool {
        !matches!(self, ModelKind::Multilinear)
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ModelKind::Volterra => "volterra",
            ModelKind::PolynomialIid => "polynomial-iid",
            ModelKind::Multilinear => "multilinear",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "volterra" => Ok(ModelKind::Volterra),
            "polynomial-iid" | "polynomial" => Ok(ModelKind::PolynomialIid),
            "multilinear" => Ok(ModelKind::Multilinear),
            other => Err(invalid(format!("unknown model kind `{other}`"))),
        }
    }
}

/// A canonical monomial: sorted variable (or lag) indices. Empty = intercept.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MonomialKey(pub Vec<usize>);

impl MonomialKey {
    pub fn intercept() -> Self {
        MonomialKey(Vec::new())
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    /// Number of distinct orderings of the index tuple, `p! / prod(m_j!)`.
    pub fn multiplicity(&self) -> u64 {
        let p = self.0.len() as u64;
        let mut num: u64 = (1..=p).product();
        let mut run = 1u64;
        for w in self.0.windows(2) {
            if w[0] == w[1] {
                run += 1;
                num /= run;
            } else {
                run = 1;
            }
        }
        num
    }

    /// Parses `"1"` (intercept) or `"k0*k3*k3"`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "1" || s.is_empty() {
            return Ok(Self::intercept());
        }
        let mut idx = Vec::new();
        for part in s.split('*') {
            let n = part
                .strip_prefix('k')
                .and_then(|d| d.parse::<usize>().ok())
                .ok_or_else(|| invalid(format!("bad monomial key `{s}`")))?;
            idx.push(n);
        }
        if idx.windows(2).any(|w| w[0] > w[1]) {
            return Err(invalid(format!("monomial key `{s}` is not sorted")));
        }
        Ok(MonomialKey(idx))
    }
}

impl fmt::Display for MonomialKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        for (j, k) in self.0.iter().enumerate() {
            if j > 0 {
                f.write_str("*")?;
            }
            write!(f, "k{k}")?;
        }
        Ok(())
    }
}

fn binomial(n: u64, k: u64) -> Option<u64> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return None;
        }
    }
    Some(acc as u64)
}

fn check_args(vars: usize, order: usize, kind: ModelKind) -> Result<()> {
    if vars == 0 {
        return Err(invalid("L must be at least 1"));
    }
    if kind == ModelKind::Multilinear && order > vars {
        return Err(invalid(format!(
            "multilinear order P={order} exceeds variable count L={vars}"
        )));
    }
    Ok(())
}

/// Number of non-redundant monomials of order at most `order` over `vars` variables.
pub fn dimension(vars: usize, order: usize, kind: ModelKind) -> Result<usize> {
    check_args(vars, order, kind)?;
    let (l, p) = (vars as u64, order as u64);
    let m = if kind.allows_repeats() {
        binomial(l + p, p)
    } else {
        (0..=p).try_fold(0u64, |acc, q| binomial(l, q).and_then(|b| acc.checked_add(b)))
    };
    m.and_then(|m| usize::try_from(m).ok())
        .ok_or_else(|| invalid("catalog dimension overflows"))
}

/// Ordered list of canonical monomials defining a feature map.
///
/// Keys are degree-major, lexicographic within each degree.
#[derive(Debug, Clone)]
pub struct BasisCatalog {
    kind: ModelKind,
    vars: usize,
    order: usize,
    keys: Vec<MonomialKey>,
    index: HashMap<MonomialKey, usize>,
    // For key i of degree >= 1: position of the key with its last index
    // dropped, and that last index. Rows are built by one multiply per key.
    parent: Vec<usize>,
    last: Vec<usize>,
}

impl PartialEq for BasisCatalog {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.vars == other.vars && self.order == other.order
    }
}

impl BasisCatalog {
    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    /// Variable / lag count `L`.
    pub fn vars(&self) -> usize {
        self.vars
    }

    /// Maximal order `P`.
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn keys(&self) -> &[MonomialKey] {
        &self.keys
    }

    pub fn key(&self, pos: usize) -> &MonomialKey {
        &self.keys[pos]
    }

    pub fn position(&self, key: &MonomialKey) -> Option<usize> {
        self.index.get(key).copied()
    }

    pub fn position_of(&self, indices: &[usize]) -> Option<usize> {
        self.index.get(&MonomialKey(indices.to_vec())).copied()
    }

    /// Position of the intercept, always 0.
    pub fn intercept_position(&self) -> usize {
        0
    }

    pub fn key_strings(&self) -> Vec<String> {
        self.keys.iter().map(|k| k.to_string()).collect()
    }

    /// Evaluates every monomial at `x` (lag window or input vector).
    pub fn regressor_row(&self, x: &[f64]) -> Result<Array1<f64>> {
        if x.len() != self.vars {
            return Err(Error::DimensionMismatch {
                expected: self.vars,
                got: x.len(),
            });
        }
        let mut row = Array1::zeros(self.len());
        self.fill_row(x, row.as_slice_mut().expect("contiguous"));
        Ok(row)
    }

    pub(crate) fn fill_row(&self, x: &[f64], out: &mut [f64]) {
        out[0] = 1.0;
        for i in 1..self.keys.len() {
            out[i] = out[self.parent[i]] * x[self.last[i]];
        }
    }

    /// Design matrix for a scalar sequence of length `N + L - 1` (volterra
    /// kind). Row `n` uses the window `x(n), x(n-1), ..., x(n-L+1)` where the
    /// sequence index of `x(n)` is `n + L - 1`.
    pub fn build_matrix_from_sequence(&self, seq: &[f64]) -> Result<Array2<f64>> {
        if self.kind != ModelKind::Volterra {
            return Err(invalid(format!(
                "sequence input requires a volterra catalog, got {}",
                self.kind
            )));
        }
        let l = self.vars;
        if seq.len() < l {
            return Err(Error::InsufficientSamples {
                needed: l,
                available: seq.len(),
            });
        }
        let n_rows = seq.len() + 1 - l;
        let mut out = Array2::zeros((n_rows, self.len()));
        let mut window = vec![0.0; l];
        for (n, mut row) in out.rows_mut().into_iter().enumerate() {
            lag_window(seq, n + l - 1, &mut window);
            self.fill_row(&window, row.as_slice_mut().expect("row-major"));
        }
        Ok(out)
    }

    /// Design matrix for `N` independent input vectors (rows of `samples`).
    pub fn build_matrix_from_samples(&self, samples: ArrayView2<f64>) -> Result<Array2<f64>> {
        if samples.ncols() != self.vars {
            return Err(Error::DimensionMismatch {
                expected: self.vars,
                got: samples.ncols(),
            });
        }
        if samples.nrows() == 0 {
            return Err(Error::InsufficientSamples {
                needed: 1,
                available: 0,
            });
        }
        let mut out = Array2::zeros((samples.nrows(), self.len()));
        let mut buf = vec![0.0; self.vars];
        for (src, mut row) in samples.rows().into_iter().zip(out.rows_mut()) {
            for (b, v) in buf.iter_mut().zip(src.iter()) {
                *b = *v;
            }
            self.fill_row(&buf, row.as_slice_mut().expect("row-major"));
        }
        Ok(out)
    }

    /// Dispatches on the input shape.
    pub fn build_matrix(&self, inputs: &Inputs) -> Result<Array2<f64>> {
        match inputs {
            Inputs::Sequence(seq) => self.build_matrix_from_sequence(seq),
            Inputs::Samples(s) => self.build_matrix_from_samples(s.view()),
        }
    }

    fn check_same(&self, other: &BasisCatalog) -> Result<()> {
        if self != other {
            return Err(Error::CatalogMismatch(format!(
                "({}, L={}, P={}) vs ({}, L={}, P={})",
                self.kind, self.vars, self.order, other.kind, other.vars, other.order
            )));
        }
        Ok(())
    }
}

/// Writes `x(t), x(t-1), ..., x(t-L+1)` into `window`.
pub(crate) fn lag_window(seq: &[f64], t: usize, window: &mut [f64]) {
    for (k, w) in window.iter_mut().enumerate() {
        *w = seq[t - k];
    }
}

/// Raw model inputs: a scalar sequence (volterra) or a sample matrix.
#[derive(Debug, Clone)]
pub enum Inputs {
    Sequence(Vec<f64>),
    Samples(Array2<f64>),
}

impl Inputs {
    /// Number of regression rows these inputs produce for memory / width `vars`.
    pub fn rows(&self, vars: usize) -> usize {
        match self {
            Inputs::Sequence(s) => (s.len() + 1).saturating_sub(vars),
            Inputs::Samples(m) => m.nrows(),
        }
    }
}

fn push_keys(
    kind: ModelKind,
    vars: usize,
    degree: usize,
    prefix: &mut Vec<usize>,
    out: &mut Vec<MonomialKey>,
) {
    if prefix.len() == degree {
        out.push(MonomialKey(prefix.clone()));
        return;
    }
    let start = match prefix.last() {
        None => 0,
        Some(&k) if kind.allows_repeats() => k,
        Some(&k) => k + 1,
    };
    for k in start..vars {
        prefix.push(k);
        push_keys(kind, vars, degree, prefix, out);
        prefix.pop();
    }
}

/// Enumerates the canonical catalog for `(L, P, kind)`.
pub fn enumerate_basis(vars: usize, order: usize, kind: ModelKind) -> Result<BasisCatalog> {
    let m = dimension(vars, order, kind)?;
    let mut keys = Vec::with_capacity(m);
    let mut prefix = Vec::with_capacity(order);
    for degree in 0..=order {
        push_keys(kind, vars, degree, &mut prefix, &mut keys);
    }
    debug_assert_eq!(keys.len(), m);
    Ok(BasisCatalog::from_keys(kind, vars, order, keys))
}

impl BasisCatalog {
    fn from_keys(kind: ModelKind, vars: usize, order: usize, keys: Vec<MonomialKey>) -> Self {
        let index: HashMap<_, _> = keys.iter().cloned().enumerate().map(|(i, k)| (k, i)).collect();
        let mut parent = vec![0; keys.len()];
        let mut last = vec![0; keys.len()];
        for (i, k) in keys.iter().enumerate().skip(1) {
            let (tail, head) = k.0.split_last().expect("non-intercept key");
            parent[i] = index[&MonomialKey(head.to_vec())];
            last[i] = *tail;
        }
        BasisCatalog {
            kind,
            vars,
            order,
            keys,
            index,
            parent,
            last,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct CatalogRepr {
    kind: ModelKind,
    #[serde(rename = "L")]
    vars: usize,
    #[serde(rename = "P")]
    order: usize,
    keys: Vec<MonomialKey>,
}

impl Serialize for BasisCatalog {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CatalogRepr {
            kind: self.kind,
            vars: self.vars,
            order: self.order,
            keys: self.keys.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for BasisCatalog {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = CatalogRepr::deserialize(d)?;
        let cat = enumerate_basis(repr.vars, repr.order, repr.kind).map_err(serde::de::Error::custom)?;
        if cat.keys != repr.keys {
            return Err(serde::de::Error::custom(
                "catalog keys are not the canonical ordering for (kind, L, P)",
            ));
        }
        Ok(cat)
    }
}

/// Expansion coefficients keyed by catalog position.
#[derive(Debug, Clone)]
pub struct CoefficientVector {
    catalog: Arc<BasisCatalog>,
    values: Array1<f64>,
}

impl CoefficientVector {
    pub fn new(catalog: Arc<BasisCatalog>, values: Array1<f64>) -> Result<Self> {
        if values.len() != catalog.len() {
            return Err(Error::DimensionMismatch {
                expected: catalog.len(),
                got: values.len(),
            });
        }
        Ok(CoefficientVector { catalog, values })
    }

    pub fn zeros(catalog: Arc<BasisCatalog>) -> Self {
        let values = Array1::zeros(catalog.len());
        CoefficientVector { catalog, values }
    }

    pub fn catalog(&self) -> &Arc<BasisCatalog> {
        &self.catalog
    }

    pub fn values(&self) -> &Array1<f64> {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut Array1<f64> {
        &mut self.values
    }

    pub fn into_values(self) -> Array1<f64> {
        self.values
    }

    pub fn get(&self, key: &MonomialKey) -> Option<f64> {
        self.catalog.position(key).map(|i| self.values[i])
    }

    pub fn set(&mut self, key: &MonomialKey, value: f64) -> Result<()> {
        let i = self
            .catalog
            .position(key)
            .ok_or_else(|| invalid(format!("key {key} not in catalog")))?;
        self.values[i] = value;
        Ok(())
    }

    /// Positions with `|h_i| > threshold` (exact nonzeros for `threshold = 0`).
    pub fn support(&self, threshold: f64) -> Vec<usize> {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, v)| v.abs() > threshold)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn nnz(&self) -> usize {
        self.support(0.0).len()
    }

    /// `(key string, value)` pairs in catalog order.
    pub fn named(&self) -> Vec<(String, f64)> {
        self.catalog
            .keys()
            .iter()
            .zip(self.values.iter())
            .map(|(k, v)| (k.to_string(), *v))
            .collect()
    }
}

/// `sum_m h_m * psi_m(x)` for one input window / vector.
pub fn evaluate_model(h: &CoefficientVector, x: &[f64]) -> Result<f64> {
    let row = h.catalog.regressor_row(x)?;
    Ok(row.dot(&h.values))
}

/// Same as [`evaluate_model`] but checks the caller's catalog first.
pub fn evaluate_with(catalog: &BasisCatalog, h: &CoefficientVector, x: &[f64]) -> Result<f64> {
    catalog.check_same(&h.catalog)?;
    evaluate_model(h, x)
}

/// Predictions `X h` for a whole design matrix.
pub fn predict(x: ArrayView2<f64>, h: ArrayView1<f64>) -> Array1<f64> {
    x.dot(&h)
}

/// Linear filter, memoryless polynomial, linear filter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LnlSystem {
    /// First filter `h_a`.
    pub ha: Vec<f64>,
    /// Taylor coefficients `c_0 .. c_P` of the nonlinearity.
    pub c: Vec<f64>,
    /// Second filter `h_b`.
    pub hb: Vec<f64>,
}

impl LnlSystem {
    pub fn new(ha: Vec<f64>, c: Vec<f64>, hb: Vec<f64>) -> Result<Self> {
        if ha.is_empty() || hb.is_empty() || c.is_empty() {
            return Err(invalid("LNL filters and nonlinearity must be non-empty"));
        }
        Ok(LnlSystem { ha, c, hb })
    }

    /// Filter followed by the nonlinearity.
    pub fn wiener(ha: Vec<f64>, c: Vec<f64>) -> Result<Self> {
        Self::new(ha, c, vec![1.0])
    }

    /// Nonlinearity followed by the filter.
    pub fn hammerstein(c: Vec<f64>, hb: Vec<f64>) -> Result<Self> {
        Self::new(vec![1.0], c, hb)
    }

    /// Overall memory `L_a + L_b - 1`.
    pub fn memory(&self) -> usize {
        self.ha.len() + self.hb.len() - 1
    }

    /// Highest order of the nonlinearity.
    pub fn order(&self) -> usize {
        self.c.len() - 1
    }

    /// Evaluates the nonlinearity `f(u) = sum_p c_p u^p`.
    pub fn nonlinearity(&self, u: f64) -> f64 {
        self.c.iter().rev().fold(0.0, |acc, c| acc * u + c)
    }

    /// Redundant (symmetric) kernel value `c_p sum_k h_b(k) prod_i h_a(k_i - k)`.
    fn redundant_kernel(&self, indices: &[usize]) -> f64 {
        let p = indices.len();
        let mut acc = 0.0;
        for (k, hb) in self.hb.iter().enumerate() {
            let mut prod = *hb;
            for &ki in indices {
                if ki < k || ki - k >= self.ha.len() {
                    prod = 0.0;
                    break;
                }
                prod *= self.ha[ki - k];
            }
            acc += prod;
        }
        self.c[p] * acc
    }
}

/// Non-redundant Volterra coefficients of an LNL cascade.
///
/// Each canonical key collects the redundant kernel value times the number of
/// index permutations that collapse onto it.
pub fn lnl_expand(sys: &LnlSystem, memory: usize, order: usize) -> Result<CoefficientVector> {
    if memory < sys.memory() {
        return Err(invalid(format!(
            "memory L={memory} is smaller than the cascade memory {}",
            sys.memory()
        )));
    }
    if order > sys.order() {
        return Err(invalid(format!(
            "order P={order} exceeds the nonlinearity order {}",
            sys.order()
        )));
    }
    let catalog = Arc::new(enumerate_basis(memory, order, ModelKind::Volterra)?);
    let values = catalog
        .keys()
        .iter()
        .map(|key| key.multiplicity() as f64 * sys.redundant_kernel(key.indices()))
        .collect::<Array1<f64>>();
    CoefficientVector::new(catalog, values)
}
