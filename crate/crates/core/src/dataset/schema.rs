use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How a variable is measured and encoded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VariableKind {
    /// Integer scale, min-max normalised into one column.
    Ordinal,
    /// Unordered codes, binary-coded into `code_width` bit columns.
    Categorical,
    /// 0/1 flag, one column.
    Binary,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariableSpec {
    pub name: String,
    pub kind: VariableKind,
    pub lower: i64,
    pub upper: i64,
}

impl VariableSpec {
    pub fn new(name: &str, kind: VariableKind, lower: i64, upper: i64) -> Result<Self> {
        if lower > upper {
            return Err(Error::invalid(format!(
                "variable `{name}`: lower bound {lower} exceeds upper bound {upper}"
            )));
        }
        if kind == VariableKind::Binary && (lower, upper) != (0, 1) {
            return Err(Error::invalid(format!(
                "binary variable `{name}` must range over 0..=1"
            )));
        }
        Ok(Self {
            name: name.to_string(),
            kind,
            lower,
            upper,
        })
    }

    /// Number of distinct integer values in range.
    pub fn cardinality(&self) -> usize {
        (self.upper - self.lower + 1) as usize
    }

    /// Bits needed for the binary code of a categorical variable, 0 otherwise.
    pub fn code_width(&self) -> usize {
        match self.kind {
            VariableKind::Categorical => {
                let c = self.cardinality();
                if c <= 1 {
                    1
                } else {
                    (usize::BITS - (c - 1).leading_zeros()) as usize
                }
            }
            _ => 0,
        }
    }

    /// Columns this variable occupies in the encoded matrix.
    pub fn encoded_width(&self) -> usize {
        match self.kind {
            VariableKind::Categorical => self.code_width(),
            _ => 1,
        }
    }

    pub fn contains(&self, value: i64) -> bool {
        (self.lower..=self.upper).contains(&value)
    }

    pub fn is_categorical(&self) -> bool {
        self.kind != VariableKind::Ordinal
    }
}

/// Standard names of the survey variables.
pub mod names {
    pub const PROVINCE: &str = "Province";
    pub const AGE: &str = "Age";
    pub const EDUCATION: &str = "Edu";
    pub const GRAVIDITY: &str = "Gra";
    pub const PARITY: &str = "Par";
    pub const FATHER_AGE: &str = "FathAge";
    pub const HIV: &str = "HIV";
    pub const RPR: &str = "RPR";
    pub const RACE: &str = "Race";
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schema {
    pub variables: Vec<VariableSpec>,
}

impl Schema {
    pub fn new(variables: Vec<VariableSpec>) -> Result<Self> {
        if variables.is_empty() {
            return Err(Error::Empty("schema has no variables"));
        }
        for (i, v) in variables.iter().enumerate() {
            if variables[..i].iter().any(|w| w.name == v.name) {
                return Err(Error::invalid(format!("duplicate variable `{}`", v.name)));
            }
        }
        Ok(Self { variables })
    }

    /// The nine-variable antenatal survey schema.
    pub fn survey() -> Self {
        use names::*;
        use VariableKind::*;
        let spec = |name, kind, lo, hi| VariableSpec::new(name, kind, lo, hi).expect("static");
        Self {
            variables: vec![
                spec(PROVINCE, Categorical, 1, 9),
                spec(AGE, Ordinal, 12, 50),
                spec(EDUCATION, Ordinal, 0, 13),
                spec(GRAVIDITY, Ordinal, 1, 12),
                spec(PARITY, Ordinal, 0, 9),
                spec(FATHER_AGE, Ordinal, 12, 90),
                spec(HIV, Binary, 0, 1),
                spec(RPR, Binary, 0, 1),
                spec(RACE, Categorical, 0, 5),
            ],
        }
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    pub fn require(&self, name: &str) -> Result<usize> {
        self.index_of(name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub fn encoded_width(&self) -> usize {
        self.variables.iter().map(VariableSpec::encoded_width).sum()
    }

    /// Column range each variable occupies in the encoded matrix.
    pub fn column_spans(&self) -> Vec<std::ops::Range<usize>> {
        let mut start = 0;
        self.variables
            .iter()
            .map(|v| {
                let span = start..start + v.encoded_width();
                start = span.end;
                span
            })
            .collect()
    }

    /// Human-readable names of encoded columns (`Province[0]`, `Age`, ...).
    pub fn encoded_column_names(&self) -> Vec<String> {
        self.variables
            .iter()
            .flat_map(|v| {
                let w = v.encoded_width();
                (0..w).map(move |b| {
                    if v.kind == VariableKind::Categorical {
                        format!("{}[{b}]", v.name)
                    } else {
                        v.name.clone()
                    }
                })
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn survey_schema_is_fourteen_columns_wide() {
        let s = Schema::survey();
        assert_eq!(s.len(), 9);
        assert_eq!(s.encoded_width(), 14);
        let province = &s.variables[s.index_of("Province").unwrap()];
        let race = &s.variables[s.index_of("Race").unwrap()];
        assert_eq!(province.code_width(), 4);
        assert_eq!(race.code_width(), 3);
        assert_eq!(s.variables[1].code_width(), 0);
    }

    #[test]
    fn code_width_is_ceil_log2() {
        for (c, w) in [(2, 1), (3, 2), (4, 2), (5, 3), (8, 3), (9, 4), (16, 4), (17, 5)] {
            let v = VariableSpec::new("x", VariableKind::Categorical, 0, c - 1).unwrap();
            assert_eq!(v.code_width(), w, "cardinality {c}");
        }
    }

    #[test]
    fn spans_cover_encoded_width() {
        let s = Schema::survey();
        let spans = s.column_spans();
        assert_eq!(spans[0], 0..4);
        assert_eq!(spans.last().unwrap().end, 14);
        assert_eq!(s.encoded_column_names().len(), 14);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(VariableSpec::new("x", VariableKind::Ordinal, 3, 2).is_err());
        assert!(VariableSpec::new("x", VariableKind::Binary, 0, 2).is_err());
        let v = VariableSpec::new("x", VariableKind::Ordinal, 0, 1).unwrap();
        assert!(Schema::new(vec![v.clone(), v]).is_err());
    }
}
