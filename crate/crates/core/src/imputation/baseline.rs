use rand::Rng;

use super::{conform, decode_missing, ImputedSet, Provenance, Strategy};
use crate::dataset::{encode, Dataset};
use crate::error::{Error, Result};
use crate::seeding;

fn check_schema(train: &Dataset, incomplete: &Dataset) -> Result<()> {
    if train.schema != incomplete.schema {
        return Err(Error::invalid("training and incomplete sets use different schemas"));
    }
    Ok(())
}

/// Fill each gap with a uniform draw over the variable's declared range.
pub fn impute_random(train: &Dataset, incomplete: &Dataset, seed: u64) -> Result<ImputedSet> {
    check_schema(train, incomplete)?;
    let schema = &incomplete.schema;
    let mut rng = seeding::derived_rng(seed, "random-impute", 0);
    let rows = incomplete
        .rows
        .iter()
        .map(|row| {
            let mut out: Vec<Option<i64>> = row
                .iter()
                .zip(&schema.variables)
                .map(|(cell, spec)| cell.or_else(|| Some(rng.random_range(spec.lower..=spec.upper))))
                .collect();
            let imputed: Vec<bool> = row.iter().map(Option::is_none).collect();
            conform(&mut out, &imputed, schema);
            out
        })
        .collect();
    let data = Dataset {
        schema: schema.clone(),
        rows,
    };
    let provenance = Provenance {
        seed: Some(seed),
        ..Provenance::default()
    };
    Ok(ImputedSet::assemble(Strategy::Random, incomplete, data, provenance))
}

/// Fill each gap with the training mean of its encoded columns, decoded
/// (ordinals round to the nearest value, bit groups snap to the nearest code).
pub fn impute_mean(train: &Dataset, incomplete: &Dataset) -> Result<ImputedSet> {
    check_schema(train, incomplete)?;
    let means = encode(train)?.column_means();
    let completed = vec![means; incomplete.n_rows()];
    let data = decode_missing(incomplete, &completed);
    Ok(ImputedSet::assemble(Strategy::Mean, incomplete, data, Provenance::default()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{generate_synthetic, names, validate_record, SyntheticParams};
    use crate::imputation::blank_variables;

    #[test]
    fn random_draws_stay_valid() {
        let (d, _) = generate_synthetic(500, 1, &SyntheticParams::default()).unwrap();
        let all: Vec<String> = d.schema.variables.iter().map(|v| v.name.clone()).collect();
        let holed = blank_variables(&d, &all[1..]).unwrap();
        let out = impute_random(&d, &holed, 4).unwrap();
        for r in &out.data.rows {
            assert!(validate_record(r, &d.schema).is_empty(), "{r:?}");
        }
        assert_eq!(out.data, impute_random(&d, &holed, 4).unwrap().data);
        assert_ne!(out.data, impute_random(&d, &holed, 5).unwrap().data);
    }

    #[test]
    fn constant_column_mean_is_that_value() {
        let (mut d, _) = generate_synthetic(50, 2, &SyntheticParams::default()).unwrap();
        for r in &mut d.rows {
            r[1] = Some(30);
            r[5] = Some(35);
        }
        let holed = blank_variables(&d, &[names::AGE.to_string()]).unwrap();
        let out = impute_mean(&d, &holed).unwrap();
        assert!(out.data.rows.iter().all(|r| r[1] == Some(30)));
        assert_eq!(out.pattern, vec![names::AGE.to_string()]);
    }
}
