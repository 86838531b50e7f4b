use super::schema::{VariableKind, VariableSpec};
use super::{Dataset, Schema};
use crate::error::{Error, Result};

/// A dataset mapped into `[0, 1]` reals: ordinal and binary variables are
/// min-max scaled with their declared bounds, categorical variables are
/// binary-coded most-significant bit first.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedMatrix {
    pub schema: Schema,
    /// Rows of `schema.encoded_width()` values; missing entries hold NaN.
    pub values: Vec<Vec<f64>>,
    /// `true` where the encoded entry is missing.
    pub missing: Vec<Vec<bool>>,
}

impl EncodedMatrix {
    pub fn n_rows(&self) -> usize {
        self.values.len()
    }

    pub fn width(&self) -> usize {
        self.schema.encoded_width()
    }

    pub fn is_complete(&self) -> bool {
        self.missing.iter().all(|r| r.iter().all(|m| !m))
    }

    /// Mean of each column over observed entries (0.5 for an all-missing column).
    pub fn column_means(&self) -> Vec<f64> {
        let w = self.width();
        let mut sum = vec![0.0; w];
        let mut count = vec![0usize; w];
        for (row, miss) in self.values.iter().zip(&self.missing) {
            for j in 0..w {
                if !miss[j] {
                    sum[j] += row[j];
                    count[j] += 1;
                }
            }
        }
        sum.iter()
            .zip(&count)
            .map(|(&s, &c)| if c == 0 { 0.5 } else { s / c as f64 })
            .collect()
    }
}

pub(crate) fn encode_value(spec: &VariableSpec, value: i64, out: &mut [f64]) {
    match spec.kind {
        VariableKind::Ordinal | VariableKind::Binary => {
            let span = (spec.upper - spec.lower) as f64;
            out[0] = if span == 0.0 {
                0.0
            } else {
                (value - spec.lower) as f64 / span
            };
        }
        VariableKind::Categorical => {
            let code = (value - spec.lower) as u64;
            let w = spec.code_width();
            for (b, slot) in out.iter_mut().enumerate().take(w) {
                *slot = ((code >> (w - 1 - b)) & 1) as f64;
            }
        }
    }
}

/// Map encoded columns back to the nearest valid value of the variable.
pub(crate) fn decode_value(spec: &VariableSpec, cols: &[f64]) -> i64 {
    match spec.kind {
        VariableKind::Ordinal | VariableKind::Binary => {
            let x = cols[0].clamp(0.0, 1.0);
            let v = (x * (spec.upper - spec.lower) as f64 + spec.lower as f64).round() as i64;
            v.clamp(spec.lower, spec.upper)
        }
        VariableKind::Categorical => {
            let w = spec.code_width();
            let mut best = (f64::INFINITY, 0u64);
            for code in 0..spec.cardinality() as u64 {
                let d: f64 = (0..w)
                    .map(|b| {
                        let bit = ((code >> (w - 1 - b)) & 1) as f64;
                        (cols[b].clamp(0.0, 1.0) - bit).abs()
                    })
                    .sum();
                if d < best.0 {
                    best = (d, code);
                }
            }
            spec.lower + best.1 as i64
        }
    }
}

/// Encode a dataset; missing cells propagate to every column of their variable.
pub fn encode(dataset: &Dataset) -> Result<EncodedMatrix> {
    let schema = &dataset.schema;
    let spans = schema.column_spans();
    let width = schema.encoded_width();
    let mut values = Vec::with_capacity(dataset.n_rows());
    let mut missing = Vec::with_capacity(dataset.n_rows());
    for (r, row) in dataset.rows.iter().enumerate() {
        let mut vals = vec![f64::NAN; width];
        let mut miss = vec![false; width];
        for ((spec, span), cell) in schema.variables.iter().zip(&spans).zip(row) {
            match *cell {
                Some(v) => {
                    if !spec.contains(v) {
                        return Err(Error::Range {
                            row: r,
                            variable: spec.name.clone(),
                            value: v,
                        });
                    }
                    encode_value(spec, v, &mut vals[span.clone()]);
                }
                None => miss[span.clone()].iter_mut().for_each(|m| *m = true),
            }
        }
        values.push(vals);
        missing.push(miss);
    }
    Ok(EncodedMatrix {
        schema: schema.clone(),
        values,
        missing,
    })
}

/// Inverse of [`encode`]: ordinals are unscaled and rounded, categorical bit
/// groups snap to the Hamming-nearest code (smallest code on ties). A variable
/// is missing in the output if any of its encoded entries is missing.
pub fn decode(encoded: &EncodedMatrix) -> Dataset {
    let schema = &encoded.schema;
    let spans = schema.column_spans();
    let rows = encoded
        .values
        .iter()
        .zip(&encoded.missing)
        .map(|(vals, miss)| {
            schema
                .variables
                .iter()
                .zip(&spans)
                .map(|(spec, span)| {
                    if miss[span.clone()].iter().any(|&m| m) {
                        None
                    } else {
                        Some(decode_value(spec, &vals[span.clone()]))
                    }
                })
                .collect()
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
    use crate::dataset::schema::names;

    fn row(values: [i64; 9]) -> Vec<Option<i64>> {
        values.map(Some).to_vec()
    }

    #[test]
    fn age_endpoints_and_midpoint() {
        let s = Schema::survey();
        let d = Dataset::new(
            s,
            vec![
                row([1, 12, 0, 1, 0, 13, 0, 0, 0]),
                row([9, 50, 13, 12, 9, 90, 1, 1, 5]),
                row([5, 31, 7, 3, 2, 40, 0, 1, 2]),
            ],
        )
        .unwrap();
        let e = encode(&d).unwrap();
        assert_eq!(e.width(), 14);
        // Age is column 4 (after four province bits).
        assert_eq!(e.values[0][4], 0.0);
        assert_eq!(e.values[1][4], 1.0);
        assert_eq!(e.values[2][4], 0.5);
        // Province 9 is code 8 = 1000.
        assert_eq!(&e.values[1][0..4], &[1.0, 0.0, 0.0, 0.0]);
        // Race 5 is code 101.
        assert_eq!(&e.values[1][11..14], &[1.0, 0.0, 1.0]);
        assert_eq!(decode(&e), d);
    }

    #[test]
    fn ordinal_decode_rounds() {
        let s = Schema::survey();
        let age = &s.variables[s.index_of(names::AGE).unwrap()];
        assert_eq!(decode_value(age, &[0.49]), 31);
        assert_eq!(decode_value(age, &[-0.3]), 12);
        assert_eq!(decode_value(age, &[1.7]), 50);
    }

    #[test]
    fn all_ones_province_decodes_to_hamming_nearest() {
        let s = Schema::survey();
        let province = &s.variables[0];
        // Brute force: codes 0..=8 as 4-bit strings, distance to 1111.
        let nearest = (0..9u32)
            .min_by_key(|c| 4 - c.count_ones())
            .unwrap();
        assert_eq!(nearest, 7);
        assert_eq!(decode_value(province, &[1.0, 1.0, 1.0, 1.0]), 1 + nearest as i64);
    }

    #[test]
    fn missing_propagates_to_every_bit() {
        let mut r = row([3, 25, 10, 2, 1, 30, 0, 0, 1]);
        r[0] = None;
        let d = Dataset::new(Schema::survey(), vec![r]).unwrap();
        let e = encode(&d).unwrap();
        assert_eq!(&e.missing[0][0..4], &[true; 4]);
        assert!(e.values[0][0].is_nan());
        assert!(!e.missing[0][4]);
        assert_eq!(decode(&e), d);
    }

    #[test]
    fn out_of_range_names_row_and_variable() {
        let d = Dataset::new(
            Schema::survey(),
            vec![row([3, 25, 10, 2, 1, 30, 0, 0, 1]), row([3, 25, 10, 2, 1, 30, 0, 0, 7])],
        )
        .unwrap();
        match encode(&d) {
            Err(Error::Range { row, variable, value }) => {
                assert_eq!((row, variable.as_str(), value), (1, "Race", 7));
            }
            other => panic!("expected range error, got {other:?}"),
        }
    }

    #[test]
    fn every_single_value_round_trips() {
        // Exhaustive per variable: vary one field over its whole range.
        let s = Schema::survey();
        let base = [3, 25, 10, 2, 1, 30, 0, 0, 1];
        for (i, spec) in s.variables.iter().enumerate() {
            let rows: Vec<_> = (spec.lower..=spec.upper)
                .map(|v| {
                    let mut r = base;
                    r[i] = v;
                    row(r)
                })
                .collect();
            let d = Dataset::new(s.clone(), rows).unwrap();
            let e = encode(&d).unwrap();
            assert!(e.values.iter().flatten().all(|x| (0.0..=1.0).contains(x)));
            assert_eq!(decode(&e), d, "variable {}", spec.name);
        }
    }

    proptest::proptest! {
        #[test]
        fn arbitrary_bits_decode_to_a_declared_category(bits in proptest::collection::vec(0.0f64..=1.0, 4)) {
            let s = Schema::survey();
            let v = decode_value(&s.variables[0], &bits);
            proptest::prop_assert!((1..=9).contains(&v));
        }
    }
}
