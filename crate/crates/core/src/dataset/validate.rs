use serde::{Deserialize, Serialize};

use super::schema::names;
use super::{Dataset, Schema};

/// A broken validity rule and the cells it implicates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Violation {
    Negative { variable: String },
    /// Mother's age outside 12..=50.
    AgeOutOfRange,
    /// Father's age must exceed 12.
    FatherTooYoung,
    GravidityBelowParity,
    EducationTooHigh,
    OutOfRange { variable: String },
}

impl Violation {
    /// Names of the variables whose cells the rule implicates.
    pub fn variables(&self) -> Vec<&str> {
        match self {
            Violation::Negative { variable } | Violation::OutOfRange { variable } => {
                vec![variable.as_str()]
            }
            Violation::AgeOutOfRange => vec![names::AGE],
            Violation::FatherTooYoung => vec![names::FATHER_AGE],
            Violation::GravidityBelowParity => vec![names::GRAVIDITY, names::PARITY],
            Violation::EducationTooHigh => vec![names::EDUCATION],
        }
    }
}

fn field_violation(schema: &Schema, var: usize, value: i64) -> Option<Violation> {
    let spec = &schema.variables[var];
    if value < 0 && spec.lower >= 0 {
        return Some(Violation::Negative {
            variable: spec.name.clone(),
        });
    }
    match spec.name.as_str() {
        names::AGE if !(12..=50).contains(&value) => return Some(Violation::AgeOutOfRange),
        names::FATHER_AGE if value <= 12 => return Some(Violation::FatherTooYoung),
        names::EDUCATION if value > 13 => return Some(Violation::EducationTooHigh),
        _ => {}
    }
    if !spec.contains(value) {
        return Some(Violation::OutOfRange {
            variable: spec.name.clone(),
        });
    }
    None
}

/// Every rule the record breaks. Missing cells never violate a rule.
///
/// Each field reports at most one field-level violation; the
/// gravidity/parity rule is checked whenever both cells are present.
pub fn validate_record(record: &[Option<i64>], schema: &Schema) -> Vec<Violation> {
    assert_eq!(record.len(), schema.len(), "record arity must match schema");
    let mut out: Vec<Violation> = record
        .iter()
        .enumerate()
        .filter_map(|(i, cell)| cell.and_then(|v| field_violation(schema, i, v)))
        .collect();
    if let (Some(g), Some(p)) = (
        schema.index_of(names::GRAVIDITY),
        schema.index_of(names::PARITY),
    ) {
        if let (Some(gv), Some(pv)) = (record[g], record[p]) {
            if gv < pv {
                out.push(Violation::GravidityBelowParity);
            }
        }
    }
    out
}

/// Flag every cell that takes part in a violation as missing.
pub fn clean(dataset: &Dataset) -> Dataset {
    let schema = &dataset.schema;
    let rows = dataset
        .rows
        .iter()
        .map(|row| {
            let mut row = row.clone();
            for violation in validate_record(&row, schema) {
                for name in violation.variables() {
                    if let Some(i) = schema.index_of(name) {
                        row[i] = None;
                    }
                }
            }
            row
        })
        .collect();
    Dataset {
        schema: schema.clone(),
        rows,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Province, Age, Edu, Gra, Par, FathAge, HIV, RPR, Race
    fn valid() -> Vec<Option<i64>> {
        [3, 25, 10, 2, 1, 30, 0, 0, 1].map(Some).to_vec()
    }

    #[test]
    fn valid_record_has_no_violations() {
        assert!(validate_record(&valid(), &Schema::survey()).is_empty());
    }

    #[test]
    fn gravidity_below_parity() {
        let mut r = valid();
        r[3] = Some(2);
        r[4] = Some(5);
        assert_eq!(
            validate_record(&r, &Schema::survey()),
            vec![Violation::GravidityBelowParity]
        );
    }

    #[test]
    fn age_out_of_range() {
        let mut r = valid();
        r[1] = Some(8);
        assert_eq!(
            validate_record(&r, &Schema::survey()),
            vec![Violation::AgeOutOfRange]
        );
    }

    #[test]
    fn each_field_rule_fires() {
        let s = Schema::survey();
        let cases = [
            (2, -1, Violation::Negative { variable: "Edu".into() }),
            (2, 14, Violation::EducationTooHigh),
            (5, 12, Violation::FatherTooYoung),
            (5, 91, Violation::OutOfRange { variable: "FathAge".into() }),
            (0, 10, Violation::OutOfRange { variable: "Province".into() }),
            (8, 6, Violation::OutOfRange { variable: "Race".into() }),
            (6, 2, Violation::OutOfRange { variable: "HIV".into() }),
        ];
        for (var, value, expected) in cases {
            let mut r = valid();
            r[var] = Some(value);
            assert_eq!(validate_record(&r, &s), vec![expected], "var {var} = {value}");
        }
    }

    #[test]
    fn clean_marks_negative_cell_missing() {
        let mut r = valid();
        r[2] = Some(-1);
        let d = Dataset::new(Schema::survey(), vec![r, valid()]).unwrap();
        let c = clean(&d);
        assert_eq!(c.rows[0][2], None);
        assert_eq!(c.rows[0][1], Some(25));
        assert_eq!(c.rows[1], valid());
    }

    #[test]
    fn joint_rule_flags_both_cells() {
        let mut r = valid();
        r[3] = Some(1);
        r[4] = Some(4);
        let d = Dataset::new(Schema::survey(), vec![r]).unwrap();
        let c = clean(&d);
        assert_eq!(c.rows[0][3], None);
        assert_eq!(c.rows[0][4], None);
        assert_eq!(c.missing_count(), 2);
    }

    #[test]
    fn clean_is_a_fixpoint_on_valid_data() {
        let d = Dataset::new(Schema::survey(), vec![valid(); 4]).unwrap();
        assert_eq!(clean(&d), d);
    }

    proptest::proptest! {
        #[test]
        fn clean_is_idempotent(cells in proptest::collection::vec(
            proptest::option::weighted(0.9, -3i64..100), 9)) {
            let d = Dataset::new(Schema::survey(), vec![cells]).unwrap();
            let once = clean(&d);
            proptest::prop_assert_eq!(clean(&once), once.clone());
            proptest::prop_assert!(validate_record(&once.rows[0], &once.schema).is_empty());
        }
    }
}
