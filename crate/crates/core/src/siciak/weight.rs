use super::SiciakError;
use crate::point::Point;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt;
use std::sync::Arc;

type WeightEval = dyn Fn(&Point) -> f64 + Send + Sync;

/// A real weight `phi` on `C^n`, optionally with declared Hölder data.
#[derive(Clone)]
pub struct WeightFn {
    label: String,
    f: Arc<WeightEval>,
    holder: Option<(f64, f64)>,
}

impl fmt::Debug for WeightFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WeightFn")
            .field("label", &self.label)
            .field("holder", &self.holder)
            .finish()
    }
}

/// Pairs used to spot-check declared Hölder data.
const HOLDER_PAIRS: usize = 256;
const HOLDER_SEED: u64 = 0x5eed_0f_ca11;

impl WeightFn {
    pub fn new(label: impl Into<String>, f: impl Fn(&Point) -> f64 + Send + Sync + 'static) -> Self {
        WeightFn {
            label: label.into(),
            f: Arc::new(f),
            holder: None,
        }
    }

    /// Declares `|phi(z) - phi(w)| <= c |z - w|^mu` and checks it on seeded
    /// random pairs in the ball of radius 2 in `C^n`.
    pub fn with_holder(self, n: usize, mu: f64, c: f64) -> Result<Self, SiciakError> {
        if !(mu > 0.0 && mu <= 1.0 && c > 0.0) {
            return Err(SiciakError::HolderViolation(format!(
                "declared exponent {mu} / constant {c} out of range"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(HOLDER_SEED);
        let mut draw = || {
            let x: Vec<f64> = (0..2 * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            Point::from_reals(&x).scale(2.0 / (2.0 * n as f64).sqrt())
        };
        for _ in 0..HOLDER_PAIRS {
            let (z, w) = (draw(), draw());
            let (a, b) = (self.eval(&z), self.eval(&w));
            if !a.is_finite() || !b.is_finite() {
                return Err(SiciakError::WeightNotFinite(z.to_string()));
            }
            let bound = c * z.dist(&w).powf(mu);
            if (a - b).abs() > bound * (1.0 + 1e-9) + 1e-14 {
                return Err(SiciakError::HolderViolation(format!(
                    "|phi({z}) - phi({w})| = {} exceeds {bound}",
                    (a - b).abs()
                )));
            }
        }
        Ok(WeightFn {
            holder: Some((mu, c)),
            ..self
        })
    }

    pub fn constant(c: f64) -> Self {
        WeightFn {
            label: format!("const({c})"),
            f: Arc::new(move |_| c),
            holder: Some((1.0, 1e-300)),
        }
    }

    /// `phi_FS(z) = log(1 + |z|^2) / 2`, Lipschitz with constant 1/2.
    pub fn fubini_study() -> Self {
        WeightFn {
            label: "fubini_study".into(),
            f: Arc::new(|z: &Point| 0.5 * (z.norm() * z.norm()).ln_1p()),
            holder: Some((1.0, 0.5)),
        }
    }

    /// `A |z - c|^2`.
    pub fn quadratic(amplitude: f64, center: Point) -> Self {
        WeightFn {
            label: format!("quadratic({amplitude})"),
            f: Arc::new(move |z: &Point| {
                let d = z.dist(&center);
                amplitude * d * d
            }),
            holder: None,
        }
    }

    pub fn plus(&self, other: &WeightFn) -> WeightFn {
        let (f, g) = (self.f.clone(), other.f.clone());
        WeightFn {
            label: format!("{}+{}", self.label, other.label),
            f: Arc::new(move |z| f(z) + g(z)),
            holder: None,
        }
    }

    pub fn shifted(&self, c: f64) -> WeightFn {
        let f = self.f.clone();
        WeightFn {
            label: format!("{}+{c}", self.label),
            f: Arc::new(move |z| f(z) + c),
            holder: self.holder,
        }
    }

    pub fn eval(&self, z: &Point) -> f64 {
        (self.f)(z)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn holder(&self) -> Option<(f64, f64)> {
        self.holder
    }
}
