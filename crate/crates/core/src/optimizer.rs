//! Real-coded genetic algorithm over a bounded box.
//!
//! Individuals start uniformly inside the box. Each generation keeps the
//! `elitism` best individuals, then fills the population with children of
//! size-2 tournament winners: blend (BLX-α) crossover with probability
//! `crossover_rate`, per-gene uniform mutation of half-width
//! `mutation_scale × box width` with probability `mutation_rate`, and
//! clamping back into the box.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seeding;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaConfig {
    pub population: usize,
    pub generations: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    /// Mutation half-width as a fraction of each gene's box width.
    pub mutation_scale: f64,
    /// BLX-α extension of the parents' interval.
    pub blend_alpha: f64,
    pub elitism: usize,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population: 60,
            generations: 100,
            crossover_rate: 0.8,
            mutation_rate: 0.05,
            mutation_scale: 0.1,
            blend_alpha: 0.5,
            elitism: 1,
            seed: 0,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population < 2 {
            return Err(Error::invalid("GA population must be at least 2"));
        }
        for (name, r) in [
            ("crossover_rate", self.crossover_rate),
            ("mutation_rate", self.mutation_rate),
        ] {
            if !(0.0..=1.0).contains(&r) {
                return Err(Error::invalid(format!("{name} {r} outside [0, 1]")));
            }
        }
        if !(self.mutation_scale >= 0.0 && self.blend_alpha >= 0.0) {
            return Err(Error::invalid("mutation_scale and blend_alpha must be non-negative"));
        }
        if self.elitism > self.population {
            return Err(Error::invalid("elitism exceeds the population"));
        }
        Ok(())
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            seed,
            ..self.clone()
        }
    }
}

/// Per-gene inclusive bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchBox {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl SearchBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::Arity {
                expected: lower.len(),
                got: upper.len(),
            });
        }
        if lower.iter().zip(&upper).any(|(l, u)| !(l <= u)) {
            return Err(Error::invalid("search box needs lower <= upper per gene"));
        }
        Ok(Self { lower, upper })
    }

    pub fn unit(dim: usize) -> Self {
        Self {
            lower: vec![0.0; dim],
            upper: vec![1.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn clamp(&self, x: &mut [f64]) {
        for ((v, l), u) in x.iter_mut().zip(&self.lower).zip(&self.upper) {
            *v = v.clamp(*l, *u);
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x
                .iter()
                .zip(&self.lower)
                .zip(&self.upper)
                .all(|((v, l), u)| v >= l && v <= u)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaResult {
    pub best: Vec<f64>,
    pub best_fitness: f64,
    /// Best fitness after each generation (index 0 is the initial population).
    pub trace: Vec<f64>,
    pub evaluations: usize,
}

/// Minimise `objective` over `search_box`.
pub fn run_ga<F>(objective: F, search_box: &SearchBox, config: &GaConfig) -> Result<GaResult>
where
    F: Fn(&[f64]) -> f64,
{
    run_ga_seeded(objective, search_box, config, &[])
}

/// As [`run_ga`], with `initial` candidates (clamped into the box) placed in
/// the first generation ahead of the random ones.
pub fn run_ga_seeded<F>(
    objective: F,
    search_box: &SearchBox,
    config: &GaConfig,
    initial: &[Vec<f64>],
) -> Result<GaResult>
where
    F: Fn(&[f64]) -> f64,
{
    config.validate()?;
    let dim = search_box.dim();
    if let Some(bad) = initial.iter().find(|c| c.len() != dim) {
        return Err(Error::Arity {
            expected: dim,
            got: bad.len(),
        });
    }
    let mut rng = seeding::rng(config.seed);
    let mut evaluations = 0usize;
    let mut evaluate = |x: &[f64]| -> Result<f64> {
        evaluations += 1;
        let f = objective(x);
        if f.is_finite() {
            Ok(f)
        } else {
            Err(Error::NonFiniteObjective {
                individual: x.to_vec(),
            })
        }
    };

    let mut population: Vec<Vec<f64>> = initial
        .iter()
        .take(config.population)
        .map(|c| {
            let mut c = c.clone();
            search_box.clamp(&mut c);
            c
        })
        .collect();
    while population.len() < config.population {
        population.push(random_point(search_box, &mut rng));
    }
    let mut fitness = population
        .iter()
        .map(|x| evaluate(x))
        .collect::<Result<Vec<f64>>>()?;

    let mut best_idx = argmin(&fitness);
    let mut best = (population[best_idx].clone(), fitness[best_idx]);
    let mut trace = vec![best.1];

    for _ in 0..config.generations {
        let mut order: Vec<usize> = (0..population.len()).collect();
        order.sort_by(|&a, &b| fitness[a].total_cmp(&fitness[b]));
        let mut next: Vec<Vec<f64>> = order[..config.elitism]
            .iter()
            .map(|&i| population[i].clone())
            .collect();
        let mut next_fit: Vec<f64> = order[..config.elitism].iter().map(|&i| fitness[i]).collect();

        while next.len() < config.population {
            let a = tournament(&fitness, &mut rng);
            let b = tournament(&fitness, &mut rng);
            let mut child = if rng.random::<f64>() < config.crossover_rate {
                blend(&population[a], &population[b], config.blend_alpha, &mut rng)
            } else {
                population[a].clone()
            };
            for (g, v) in child.iter_mut().enumerate() {
                if rng.random::<f64>() < config.mutation_rate {
                    let half = config.mutation_scale * (search_box.upper[g] - search_box.lower[g]);
                    *v += rng.random_range(-1.0..=1.0) * half;
                }
            }
            search_box.clamp(&mut child);
            next_fit.push(evaluate(&child)?);
            next.push(child);
        }
        population = next;
        fitness = next_fit;
        best_idx = argmin(&fitness);
        if fitness[best_idx] < best.1 {
            best = (population[best_idx].clone(), fitness[best_idx]);
        }
        trace.push(best.1);
    }

    Ok(GaResult {
        best: best.0,
        best_fitness: best.1,
        trace,
        evaluations,
    })
}

fn random_point(search_box: &SearchBox, rng: &mut ChaCha8Rng) -> Vec<f64> {
    search_box
        .lower
        .iter()
        .zip(&search_box.upper)
        .map(|(&l, &u)| if l == u { l } else { rng.random_range(l..=u) })
        .collect()
}

fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v < values[best] {
            best = i;
        }
    }
    best
}

fn tournament(fitness: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let a = rng.random_range(0..fitness.len());
    let b = rng.random_range(0..fitness.len());
    if fitness[b] < fitness[a] {
        b
    } else {
        a
    }
}

fn blend(a: &[f64], b: &[f64], alpha: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let (lo, hi) = (x.min(y), x.max(y));
            let ext = alpha * (hi - lo);
            if hi - lo == 0.0 {
                lo
            } else {
                rng.random_range(lo - ext..=hi + ext)
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::cell::RefCell;

    fn sphere(x: &[f64]) -> f64 {
        x.iter().map(|v| (v - 0.5).powi(2)).sum()
    }

    #[test]
    fn sphere_converges_with_defaults() {
        for seed in 0..10 {
            let r = run_ga(sphere, &SearchBox::unit(5), &GaConfig::default().with_seed(seed)).unwrap();
            assert!(r.best_fitness < 2.5e-3, "seed {seed}: {}", r.best_fitness);
            assert!(r.trace.windows(2).all(|w| w[1] <= w[0]));
            assert_eq!(r.trace.len(), 101);
            assert_eq!(r.evaluations, 60 + 100 * 59);
        }
    }

    #[test]
    fn every_evaluation_is_inside_the_box() {
        let b = SearchBox::new(vec![0.2, 0.0, 0.9], vec![0.3, 1.0, 0.95]).unwrap();
        let seen = RefCell::new(Vec::new());
        let obj = |x: &[f64]| {
            seen.borrow_mut().push(x.to_vec());
            sphere(x)
        };
        run_ga_seeded(obj, &b, &GaConfig::default(), &[vec![-5.0, 5.0, 0.0]]).unwrap();
        assert!(seen.borrow().iter().all(|x| b.contains(x)));
    }

    #[test]
    fn degenerate_box_returns_its_point() {
        let p = vec![0.3, 0.7];
        let b = SearchBox::new(p.clone(), p.clone()).unwrap();
        let r = run_ga(sphere, &b, &GaConfig::default()).unwrap();
        assert_eq!(r.best, p);
        assert_eq!(r.best_fitness, sphere(&p));
    }

    #[test]
    fn seeded_candidate_bounds_the_result() {
        let obj = |x: &[f64]| (x[0] - 0.123).abs() + (x[1] - 0.877).abs();
        let cfg = GaConfig {
            generations: 0,
            ..GaConfig::default()
        };
        let r = run_ga_seeded(obj, &SearchBox::unit(2), &cfg, &[vec![0.123, 0.877]]).unwrap();
        assert_eq!(r.best_fitness, 0.0);
    }

    #[test]
    fn non_finite_objective_aborts() {
        let r = run_ga(|_| f64::NAN, &SearchBox::unit(2), &GaConfig::default());
        assert!(matches!(r, Err(Error::NonFiniteObjective { .. })));
    }

    #[test]
    fn deterministic_and_validated() {
        let c = GaConfig::default().with_seed(42);
        assert_eq!(run_ga(sphere, &SearchBox::unit(3), &c).unwrap(), run_ga(sphere, &SearchBox::unit(3), &c).unwrap());
        assert!(run_ga(sphere, &SearchBox::unit(3), &GaConfig { population: 1, ..c.clone() }).is_err());
        assert!(run_ga(sphere, &SearchBox::unit(3), &GaConfig { mutation_rate: 1.5, ..c.clone() }).is_err());
        assert!(SearchBox::new(vec![1.0], vec![0.0]).is_err());
    }
}
