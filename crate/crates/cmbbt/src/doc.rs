//! JSON problem documents: a small serde schema describing a symbol, a size
//! and a corner modification, used by the command-line interface.

use crate::bulk::{CornerEntry, ProblemSpec};
use crate::error::{Error, Result};
use crate::laurent::LaurentSymbol;
use crate::semiinfinite::SemiInfiniteSpec;
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

pub const SCHEMA: &str = "cmbbt/1";

/// Complex scalar on the wire: `[re, im]`.
pub type WireComplex = [f64; 2];

/// A d x d block on the wire: row-major array of rows of `[re, im]` pairs.
pub type WireBlock = Vec<Vec<WireComplex>>;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WireCorner {
    pub row: usize,
    pub col: usize,
    pub block: WireBlock,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Finite,
    SemiInfinite,
}

/// The on-disk problem description.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemDocument {
    pub schema: String,
    pub d: usize,
    pub p: i64,
    pub q: i64,
    #[serde(rename = "N")]
    pub n: usize,
    /// Map from the band offset r (as a decimal string, `p <= r <= q`) to
    /// the d x d coefficient block.
    pub coefficients: BTreeMap<String, WireBlock>,
    #[serde(default)]
    pub corner: Vec<WireCorner>,
    #[serde(default)]
    pub mode: Mode,
    /// Optional hint forcing the Hermitian or general eigenvalue search.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hermitian: Option<bool>,
}

fn block_from_wire(w: &WireBlock, d: usize, what: &str) -> Result<DMatrix<Complex64>> {
    if w.len() != d || w.iter().any(|row| row.len() != d) {
        return Err(Error::InvalidSpec(format!("{what}: expected a {d}x{d} block")));
    }
    Ok(DMatrix::from_fn(d, d, |i, j| {
        Complex64::new(w[i][j][0], w[i][j][1])
    }))
}

fn block_to_wire(m: &DMatrix<Complex64>) -> WireBlock {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

impl ProblemDocument {
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: Self =
            serde_json::from_str(text).map_err(|e| Error::InvalidSpec(format!("json: {e}")))?;
        if doc.schema != SCHEMA {
            return Err(Error::InvalidSpec(format!(
                "unsupported schema {:?}, expected {SCHEMA:?}",
                doc.schema
            )));
        }
        Ok(doc)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("document serializes")
    }

    pub fn symbol(&self) -> Result<LaurentSymbol> {
        if self.d == 0 {
            return Err(Error::InvalidSpec("d must be >= 1".into()));
        }
        if self.p > self.q {
            return Err(Error::InvalidSpec(format!("p ({}) > q ({})", self.p, self.q)));
        }
        let mut coeffs = Vec::with_capacity((self.q - self.p + 1) as usize);
        for r in self.p..=self.q {
            let key = r.to_string();
            let block = match self.coefficients.get(&key) {
                Some(w) => block_from_wire(w, self.d, &format!("coefficient {key}"))?,
                None => DMatrix::zeros(self.d, self.d),
            };
            coeffs.push(block);
        }
        for key in self.coefficients.keys() {
            let r: i64 = key
                .parse()
                .map_err(|_| Error::InvalidSpec(format!("coefficient key {key:?}")))?;
            if r < self.p || r > self.q {
                return Err(Error::InvalidSpec(format!(
                    "coefficient {r} outside the declared band {}..={}",
                    self.p, self.q
                )));
            }
        }
        LaurentSymbol::new(self.d, self.p, coeffs)
    }

    fn corner_entries(&self) -> Result<Vec<CornerEntry>> {
        self.corner
            .iter()
            .map(|e| {
                Ok(CornerEntry {
                    row: e.row,
                    col: e.col,
                    block: block_from_wire(&e.block, self.d, &format!("corner ({}, {})", e.row, e.col))?,
                })
            })
            .collect()
    }

    pub fn finite_spec(&self) -> Result<ProblemSpec> {
        if self.mode != Mode::Finite {
            return Err(Error::InvalidSpec(
                "document is semi-infinite; a finite problem was requested".into(),
            ));
        }
        ProblemSpec::new(self.symbol()?, self.n, self.corner_entries()?)
    }

    pub fn semi_infinite_spec(&self) -> Result<SemiInfiniteSpec> {
        if self.mode != Mode::SemiInfinite {
            return Err(Error::InvalidSpec(
                "document is finite; a semi-infinite problem was requested".into(),
            ));
        }
        SemiInfiniteSpec::new(self.symbol()?, self.corner_entries()?)
    }

    /// Build a document from a finite problem.
    pub fn from_spec(spec: &ProblemSpec) -> Self {
        let s = spec.symbol();
        let mut coefficients = BTreeMap::new();
        for r in s.p()..=s.q() {
            coefficients.insert(r.to_string(), block_to_wire(&s.coeff(r)));
        }
        Self {
            schema: SCHEMA.to_string(),
            d: s.d(),
            p: s.p(),
            q: s.q(),
            n: spec.n(),
            coefficients,
            corner: spec
                .corner()
                .iter()
                .map(|e| WireCorner {
                    row: e.row,
                    col: e.col,
                    block: block_to_wire(&e.block),
                })
                .collect(),
            mode: Mode::Finite,
            hermitian: None,
        }
    }
}
