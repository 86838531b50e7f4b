//! Scaled conjugate gradient (Møller, 1993), one iteration per call.

/// Settings for the step-size and trust-region scaling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct ScgSettings {
    pub sigma0: f64,
    pub lambda0: f64,
}

const LAMBDA_MIN: f64 = 1e-15;
const LAMBDA_MAX: f64 = 1e100;

pub(crate) struct Scg {
    settings: ScgSettings,
    pub x: Vec<f64>,
    pub f: f64,
    grad: Vec<f64>,
    grad_old: Vec<f64>,
    d: Vec<f64>,
    lambda: f64,
    success: bool,
    n_success: usize,
    mu: f64,
    kappa: f64,
    theta: f64,
    converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl Scg {
    pub fn new<F>(settings: ScgSettings, x: Vec<f64>, eval: &mut F) -> Self
    where
        F: FnMut(&[f64]) -> (f64, Vec<f64>),
    {
        let (f, grad) = eval(&x);
        let d: Vec<f64> = grad.iter().map(|g| -g).collect();
        Self {
            settings,
            x,
            f,
            grad_old: grad.clone(),
            grad,
            d,
            lambda: settings.lambda0,
            success: true,
            n_success: 0,
            mu: 0.0,
            kappa: 0.0,
            theta: 0.0,
            converged: false,
        }
    }

    pub fn converged(&self) -> bool {
        self.converged
    }

    /// One iteration; returns the (possibly unchanged) objective value.
    pub fn step<F>(&mut self, eval: &mut F) -> f64
    where
        F: FnMut(&[f64]) -> (f64, Vec<f64>),
    {
        if self.converged {
            return self.f;
        }
        let n = self.x.len();
        if self.success {
            self.mu = dot(&self.d, &self.grad);
            if self.mu >= 0.0 {
                self.d = self.grad.iter().map(|g| -g).collect();
                self.mu = dot(&self.d, &self.grad);
            }
            self.kappa = dot(&self.d, &self.d);
            if self.kappa < f64::EPSILON {
                self.converged = true;
                return self.f;
            }
            let sigma = self.settings.sigma0 / self.kappa.sqrt();
            let probe: Vec<f64> = self.x.iter().zip(&self.d).map(|(x, d)| x + sigma * d).collect();
            let (_, g_plus) = eval(&probe);
            self.theta = self
                .d
                .iter()
                .zip(g_plus.iter().zip(&self.grad))
                .map(|(d, (gp, g))| d * (gp - g))
                .sum::<f64>()
                / sigma;
        }

        let mut delta = self.theta + self.lambda * self.kappa;
        if delta <= 0.0 {
            delta = self.lambda * self.kappa;
            self.lambda -= self.theta / self.kappa;
        }
        let alpha = -self.mu / delta;
        let x_new: Vec<f64> = self.x.iter().zip(&self.d).map(|(x, d)| x + alpha * d).collect();
        let (f_new, g_new) = eval(&x_new);
        let comparison = 2.0 * (f_new - self.f) / (alpha * self.mu);
        if comparison >= 0.0 && f_new.is_finite() {
            self.success = true;
            self.n_success += 1;
            self.x = x_new;
            self.f = f_new;
            self.grad_old = std::mem::replace(&mut self.grad, g_new);
            if dot(&self.grad, &self.grad) == 0.0 {
                self.converged = true;
                return self.f;
            }
        } else {
            self.success = false;
        }

        if comparison < 0.25 || !comparison.is_finite() {
            self.lambda = (4.0 * self.lambda).min(LAMBDA_MAX);
        }
        if comparison > 0.75 {
            self.lambda = (0.5 * self.lambda).max(LAMBDA_MIN);
        }

        if self.n_success == n {
            self.d = self.grad.iter().map(|g| -g).collect();
            self.n_success = 0;
        } else if self.success {
            let gamma = self
                .grad_old
                .iter()
                .zip(&self.grad)
                .map(|(go, g)| (go - g) * g)
                .sum::<f64>()
                / self.mu;
            self.d = self
                .d
                .iter()
                .zip(&self.grad)
                .map(|(d, g)| gamma * d - g)
                .collect();
        }
        self.f
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimises_an_ill_conditioned_quadratic() {
        let scales = [1.0, 10.0, 100.0, 1000.0];
        let mut eval = |x: &[f64]| {
            let f = x.iter().zip(&scales).map(|(v, s)| s * (v - 1.0).powi(2)).sum();
            let g = x.iter().zip(&scales).map(|(v, s)| 2.0 * s * (v - 1.0)).collect();
            (f, g)
        };
        let settings = ScgSettings { sigma0: 1e-4, lambda0: 1.0 };
        let mut opt = Scg::new(settings, vec![0.0; 4], &mut eval);
        for _ in 0..100 {
            opt.step(&mut eval);
        }
        assert!(opt.f < 1e-12, "f = {}", opt.f);
    }

    #[test]
    fn minimises_rosenbrock() {
        let mut eval = |x: &[f64]| {
            let (a, b) = (x[0], x[1]);
            let f = (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2);
            let g = vec![
                -2.0 * (1.0 - a) - 400.0 * a * (b - a * a),
                200.0 * (b - a * a),
            ];
            (f, g)
        };
        let mut opt = Scg::new(ScgSettings { sigma0: 1e-4, lambda0: 1.0 }, vec![-1.2, 1.0], &mut eval);
        let mut last = opt.f;
        for _ in 0..2000 {
            let f = opt.step(&mut eval);
            assert!(f <= last + 1e-12);
            last = f;
        }
        assert!(opt.f < 1e-8, "f = {}", opt.f);
    }
}
