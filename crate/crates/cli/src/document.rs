//! The on-disk map description and its conversion to a representation.
//!
//! A map file is a JSON object `{"n": .., "k": .., "representation": {..}}`
//! where the representation carries a `type` tag of `pairs`, `kraus`,
//! `unitary_diff`, or `choi`. Complex scalars are `[re, im]` pairs and
//! matrices are row-major arrays of rows. A `unitary_diff` document takes
//! `U` either as an explicit matrix or as `{"angles": [..]}` for the
//! diagonal case, plus an optional `V` (identity when absent).

use serde::{Deserialize, Serialize};

use cbnorm::numerics::all_finite;
use cbnorm::superop::ChoiMatrix;
use cbnorm::{CMatrix, GCKRep, C64};

use crate::error::CliError;

pub type JsonMatrix = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MapDocument {
    pub n: usize,
    pub k: usize,
    pub representation: Representation,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Representation {
    Pairs {
        terms: Vec<PairTerm>,
    },
    Kraus {
        operators: Vec<JsonMatrix>,
    },
    UnitaryDiff {
        #[serde(rename = "U")]
        u: UnitarySpec,
        #[serde(rename = "V", default, skip_serializing_if = "Option::is_none")]
        v: Option<UnitarySpec>,
    },
    Choi {
        matrix: JsonMatrix,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PairTerm {
    pub a: JsonMatrix,
    pub b: JsonMatrix,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum UnitarySpec {
    Matrix(JsonMatrix),
    Angles { angles: Vec<f64> },
}

fn matrix_from_json(field: &str, raw: &JsonMatrix) -> Result<CMatrix, CliError> {
    let rows = raw.len();
    if rows == 0 {
        return Err(CliError::invalid_document(format!(
            "{field}: matrix has no rows"
        )));
    }
    let cols = raw[0].len();
    if cols == 0 {
        return Err(CliError::invalid_document(format!(
            "{field}: matrix has no columns"
        )));
    }
    for (i, row) in raw.iter().enumerate() {
        if row.len() != cols {
            return Err(CliError::invalid_document(format!(
                "{field}: row {i} has {} entries, expected {cols}",
                row.len()
            )));
        }
    }
    let m = CMatrix::from_fn(rows, cols, |i, j| C64::new(raw[i][j][0], raw[i][j][1]));
    if !all_finite(&m) {
        return Err(CliError::invalid_document(format!(
            "{field}: matrix contains a non-finite entry"
        )));
    }
    Ok(m)
}

pub fn matrix_to_json(m: &CMatrix) -> JsonMatrix {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| [m[(i, j)].re, m[(i, j)].im])
                .collect()
        })
        .collect()
}

fn unitary_from_spec(field: &str, n: usize, spec: &UnitarySpec) -> Result<CMatrix, CliError> {
    match spec {
        UnitarySpec::Matrix(raw) => {
            let m = matrix_from_json(field, raw)?;
            if m.nrows() != n || m.ncols() != n {
                return Err(CliError::dimension_mismatch(format!(
                    "{field}: expected a {n}x{n} matrix, got {}x{}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            Ok(m)
        }
        UnitarySpec::Angles { angles } => {
            if angles.len() != n {
                return Err(CliError::dimension_mismatch(format!(
                    "{field}: expected {n} angles, got {}",
                    angles.len()
                )));
            }
            if angles.iter().any(|a| !a.is_finite()) {
                return Err(CliError::invalid_document(format!(
                    "{field}: angles contain a non-finite value"
                )));
            }
            Ok(CMatrix::from_fn(n, n, |i, j| {
                if i == j {
                    C64::from_polar(1.0, angles[i])
                } else {
                    C64::new(0.0, 0.0)
                }
            }))
        }
    }
}

impl MapDocument {
    pub fn load(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|err| CliError::Validation {
            code: "missing_file",
            message: format!("cannot read {}: {err}", path.display()),
        })?;
        let doc: MapDocument = serde_json::from_str(&text).map_err(|err| CliError::Validation {
            code: "malformed_syntax",
            message: format!("{}: {err}", path.display()),
        })?;
        doc.validate()?;
        Ok(doc)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.n == 0 || self.k == 0 {
            return Err(CliError::invalid_document(
                "n and k must be positive".into(),
            ));
        }
        // Conversion performs the full shape checking.
        self.to_rep().map(|_| ())
    }

    /// The unitary pair of a `unitary_diff` document, with `V` defaulting to
    /// the identity.
    pub fn unitary_pair(&self) -> Result<(CMatrix, CMatrix), CliError> {
        let Representation::UnitaryDiff { u, v } = &self.representation else {
            return Err(CliError::Validation {
                code: "wrong_representation",
                message: "this command needs a unitary_diff document".into(),
            });
        };
        if self.k != self.n {
            return Err(CliError::dimension_mismatch(format!(
                "unitary_diff requires k = n, got n = {}, k = {}",
                self.n, self.k
            )));
        }
        let u = unitary_from_spec("U", self.n, u)?;
        let v = match v {
            Some(spec) => unitary_from_spec("V", self.n, spec)?,
            None => CMatrix::identity(self.n, self.n),
        };
        Ok((u, v))
    }

    /// Convert to a generalized Choi-Kraus representation, validating every
    /// matrix shape against the declared dimensions.
    pub fn to_rep(&self) -> Result<GCKRep, CliError> {
        match &self.representation {
            Representation::Pairs { terms } => {
                let mut pairs = Vec::with_capacity(terms.len());
                for (idx, term) in terms.iter().enumerate() {
                    let a = matrix_from_json(&format!("terms[{idx}].a"), &term.a)?;
                    let b = matrix_from_json(&format!("terms[{idx}].b"), &term.b)?;
                    pairs.push((a, b));
                }
                GCKRep::new(self.n, self.k, pairs).map_err(CliError::from)
            }
            Representation::Kraus { operators } => {
                let mut ops = Vec::with_capacity(operators.len());
                for (idx, raw) in operators.iter().enumerate() {
                    ops.push(matrix_from_json(&format!("operators[{idx}]"), raw)?);
                }
                let rep = GCKRep::from_kraus(&ops)?;
                if rep.n() != self.n || rep.k() != self.k {
                    return Err(CliError::dimension_mismatch(format!(
                        "operators describe an M_{} -> M_{} map, document declares M_{} -> M_{}",
                        rep.n(),
                        rep.k(),
                        self.n,
                        self.k
                    )));
                }
                Ok(rep)
            }
            Representation::UnitaryDiff { .. } => {
                let (u, v) = self.unitary_pair()?;
                GCKRep::from_unitary_pair(&u, &v).map_err(CliError::from)
            }
            Representation::Choi { matrix } => {
                let m = matrix_from_json("matrix", matrix)?;
                let choi = ChoiMatrix::new(self.n, self.k, m)?;
                GCKRep::from_choi(&choi).map_err(CliError::from)
            }
        }
    }
}
