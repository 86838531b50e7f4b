//! Checks against closed forms and independently known answers.

use rfimpute::assessment::{fit_lr, hiv_design, lr_impact, LrConfig};
use rfimpute::dataset::{generate_synthetic, names, split, SyntheticParams};
use rfimpute::imputation::{blank_variables, default_ranges, impute_random, pattern_variables, range_accuracy};
use rfimpute::seeding::derive_seed;

#[test]
fn logistic_fit_recovers_planted_coefficients() {
    let (d, planted) = generate_synthetic(20_000, 3, &SyntheticParams::default()).unwrap();
    let hiv = d.schema.column_spans()[d.schema.require(names::HIV).unwrap()].clone();
    let (x, y) = hiv_design(&d).unwrap();
    let model = fit_lr(&x, &y, &LrConfig::default()).unwrap();
    assert!(model.converged);
    let want: Vec<f64> = planted
        .coefficients
        .iter()
        .enumerate()
        .filter(|(j, _)| !hiv.contains(j))
        .map(|(_, &b)| b)
        .collect();
    assert_eq!(want.len(), model.coefficients.len());
    assert!((model.intercept - planted.intercept).abs() < 0.35, "{} vs {}", model.intercept, planted.intercept);
    for (j, (got, b)) in model.coefficients.iter().zip(&want).enumerate() {
        assert!((got - b).abs() < 0.35, "column {j}: {got} vs {b}");
    }
}

#[test]
fn intercept_only_fit_is_the_logit_of_the_rate() {
    let y: Vec<f64> = (0..400).map(|i| f64::from(i % 4 == 0)).collect();
    let x = vec![Vec::new(); y.len()];
    let model = fit_lr(&x, &y, &LrConfig::default()).unwrap();
    assert!((model.intercept - (0.25f64 / 0.75).ln()).abs() < 1e-8);
}

#[test]
fn uniform_draws_match_the_closed_form_within_two() {
    let (d, _) = generate_synthetic(5000, 8, &SyntheticParams::default()).unwrap();
    let v = d.schema.require(names::EDUCATION).unwrap();
    let spec = &d.schema.variables[v];
    let width = (spec.upper - spec.lower + 1) as f64;
    // P(|a − U| <= 2) for U uniform on the declared range, averaged over the truth.
    let expected = d
        .rows
        .iter()
        .map(|r| {
            let a = r[v].unwrap();
            ((a - 2).max(spec.lower)..=(a + 2).min(spec.upper)).count() as f64 / width
        })
        .sum::<f64>()
        / d.n_rows() as f64;
    let holed = blank_variables(&d, &[names::EDUCATION.to_string()]).unwrap();
    let set = impute_random(&d, &holed, 2).unwrap();
    let acc = range_accuracy(&set, &d, &default_ranges()).unwrap();
    let edu = acc.variables.iter().find(|a| a.variable == names::EDUCATION).unwrap();
    let got = edu.within.iter().find(|(r, _)| *r == 2).unwrap().1;
    let se = (expected * (1.0 - expected) / d.n_rows() as f64).sqrt();
    assert!((got - expected).abs() < 4.0 * se, "{got} vs {expected}");
}

#[test]
fn random_sets_spread_the_predicted_probabilities() {
    let mut wider = 0;
    for s in 0..10 {
        let (d, _) = generate_synthetic(3000, s, &SyntheticParams::default()).unwrap();
        let p = split(&d, [0.5, 0.0, 0.0, 0.5], derive_seed(s, "split", 0)).unwrap();
        let (x, y) = hiv_design(&p.train).unwrap();
        let lr = fit_lr(&x, &y, &LrConfig::default()).unwrap();
        let (tx, _) = hiv_design(&p.experiment).unwrap();
        // Four uniform variables: the published table's widest gap.
        let inc = blank_variables(&p.experiment, &pattern_variables("4A").unwrap()).unwrap();
        let set = impute_random(&p.train, &inc, s).unwrap();
        let target = lr_impact(&lr, &tx, &tx).unwrap();
        let random = lr_impact(&lr, &tx, &hiv_design(&set.data).unwrap().0).unwrap();
        wider += usize::from(random.variance > target.variance);
    }
    assert!(wider >= 8, "{wider}/10");
}
