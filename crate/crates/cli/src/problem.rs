//! Problem files: a polynomial objective and a symmetric polynomial matrix
//! constraint written as JSON with explicit exponent vectors.

use std::collections::BTreeSet;

use pmo_core::{PolyMatrix, Polynomial};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Term {
    pub exps: Vec<u32>,
    pub coeff: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Entry {
    pub i: usize,
    pub j: usize,
    pub poly: Vec<Term>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixSpec {
    pub m: usize,
    pub entries: Vec<Entry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub nvars: usize,
    pub objective: Vec<Term>,
    pub matrix: MatrixSpec,
}

impl ProblemFile {
    /// Parses and validates; errors carry a line/column or a field path.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let file: ProblemFile = serde_json::from_str(text).map_err(|e| CliError::Parse {
            location: format!("line {}, column {}", e.line(), e.column()),
            message: e.to_string(),
        })?;
        file.validate()?;
        Ok(file)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |location: String, message: String| Err(CliError::Parse { location, message });
        if self.nvars == 0 {
            return bad("nvars".into(), "at least one variable is required".into());
        }
        let check_terms = |terms: &[Term], path: &str| -> Result<(), CliError> {
            for (t, term) in terms.iter().enumerate() {
                if term.exps.len() != self.nvars {
                    return bad(
                        format!("{path}[{t}].exps"),
                        format!(
                            "expected {} exponents, found {}",
                            self.nvars,
                            term.exps.len()
                        ),
                    );
                }
                if !term.coeff.is_finite() {
                    return bad(
                        format!("{path}[{t}].coeff"),
                        "coefficient is not finite".into(),
                    );
                }
            }
            Ok(())
        };
        check_terms(&self.objective, "objective")?;
        let m = self.matrix.m;
        if m == 0 {
            return bad("matrix.m".into(), "matrix size must be positive".into());
        }
        let mut seen = BTreeSet::new();
        for (e, entry) in self.matrix.entries.iter().enumerate() {
            let path = format!("matrix.entries[{e}]");
            if !(1 <= entry.i && entry.i <= entry.j && entry.j <= m) {
                return bad(
                    path,
                    format!("indices ({}, {}) violate 1 ≤ i ≤ j ≤ {m}", entry.i, entry.j),
                );
            }
            if !seen.insert((entry.i, entry.j)) {
                return bad(path, format!("duplicate entry ({}, {})", entry.i, entry.j));
            }
            check_terms(&entry.poly, &format!("{path}.poly"))?;
        }
        Ok(())
    }

    pub fn objective(&self) -> Polynomial {
        to_poly(self.nvars, &self.objective)
    }

    pub fn constraint(&self) -> PolyMatrix {
        let mut g = PolyMatrix::zeros(self.matrix.m, self.nvars);
        for e in &self.matrix.entries {
            g.set(e.i - 1, e.j - 1, to_poly(self.nvars, &e.poly));
        }
        g
    }

    /// Canonical form: terms in the library's monomial order, zero entries
    /// dropped, entries sorted by `(i, j)`.
    pub fn from_problem(f: &Polynomial, g: &PolyMatrix) -> Self {
        let mut entries = Vec::new();
        for i in 0..g.size() {
            for j in i..g.size() {
                let p = g.get(i, j);
                if !p.is_zero() {
                    entries.push(Entry {
                        i: i + 1,
                        j: j + 1,
                        poly: from_poly(p),
                    });
                }
            }
        }
        ProblemFile {
            nvars: f.nvars(),
            objective: from_poly(f),
            matrix: MatrixSpec {
                m: g.size(),
                entries,
            },
        }
    }

    pub fn canonical(&self) -> Self {
        Self::from_problem(&self.objective(), &self.constraint())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("problem files serialize");
        s.push('\n');
        s
    }
}

fn to_poly(nvars: usize, terms: &[Term]) -> Polynomial {
    Polynomial::from_terms(nvars, terms.iter().map(|t| (t.exps.clone(), t.coeff)))
        .expect("exponent lengths are validated")
}

fn from_poly(p: &Polynomial) -> Vec<Term> {
    p.terms()
        .map(|(m, c)| Term {
            exps: m.exps().to_vec(),
            coeff: c,
        })
        .collect()
}
