//! Exponent and constant transfer formulas in exact rational arithmetic.

use super::TheoremError;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

pub type Rational = Ratio<i64>;

pub fn rat(p: i64, q: i64) -> Rational {
    Rational::new(p, q)
}

fn zero() -> Rational {
    rat(0, 1)
}

fn one() -> Rational {
    rat(1, 1)
}

/// Parses `p/q`, an integer, or a terminating decimal such as `0.375`, exactly.
pub fn parse_rational(s: &str) -> Result<Rational, TheoremError> {
    let bad = || TheoremError::Parse(s.to_string());
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: i64 = p.trim().parse().map_err(|_| bad())?;
        let q: i64 = q.trim().parse().map_err(|_| bad())?;
        if q == 0 {
            return Err(bad());
        }
        return Ok(rat(p, q));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, s),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty()
        || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit())
        || frac.len() > 15
    {
        return Err(bad());
    }
    let digits = format!("{int}{frac}");
    let num: i64 = digits.parse().map_err(|_| bad())?;
    let den = 10i64.checked_pow(frac.len() as u32).ok_or_else(bad)?;
    let v = rat(num, den);
    Ok(if neg { -v } else { v })
}

pub fn to_f64(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// `(mu, q, n)` of a weak local Hölder continuity property, with the optional
/// converse-direction parameters `(nu, q0)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentBudget {
    pub mu: Rational,
    pub q: Rational,
    pub n: u32,
    pub nu: Option<Rational>,
    pub q0: Option<Rational>,
}

impl ExponentBudget {
    pub fn new(mu: Rational, q: Rational, n: u32) -> Result<Self, TheoremError> {
        if !(mu > zero() && mu <= one()) {
            return Err(TheoremError::Budget(format!("mu = {mu} must lie in (0, 1]")));
        }
        if q <= zero() {
            return Err(TheoremError::Budget(format!("q = {q} must be positive")));
        }
        if n == 0 {
            return Err(TheoremError::Budget("dimension must be at least 1".into()));
        }
        Ok(ExponentBudget {
            mu,
            q,
            n,
            nu: None,
            q0: None,
        })
    }

    pub fn with_converse(mut self, nu: Rational, q0: Rational) -> Result<Self, TheoremError> {
        check_converse(nu, q0)?;
        self.nu = Some(nu);
        self.q0 = Some(q0);
        Ok(self)
    }
}

fn check_converse(nu: Rational, q0: Rational) -> Result<(), TheoremError> {
    if !(nu > zero() && nu <= one()) {
        return Err(TheoremError::Budget(format!("nu = {nu} must lie in (0, 1]")));
    }
    if q0 <= zero() {
        return Err(TheoremError::Budget(format!("q0 = {q0} must be positive")));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedExponent {
    pub exponent: Rational,
    /// Optimising power `s0 = mu/(mu+q+2)`.
    pub s0: Rational,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlobalTransfer {
    pub mu_global: Rational,
    pub density_order: Rational,
    /// Optimising power `t0 = mu/(q+2)`.
    pub t0: Rational,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalTransfer {
    pub mu: Rational,
    pub order: Rational,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularityPair {
    pub alpha: Rational,
    pub alpha_prime: Rational,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvexTransfer {
    pub mu: Rational,
    pub order: Rational,
    pub coefficient: f64,
}

/// Hölder exponent `mu^2/(mu+q+2)` of the weighted extremal function.
pub fn weighted_exponent(b: &ExponentBudget) -> WeightedExponent {
    let two = rat(2, 1);
    WeightedExponent {
        exponent: b.mu * b.mu / (b.mu + b.q + two),
        s0: b.mu / (b.mu + b.q + two),
    }
}

/// Weak local property of order `q` to global `2mu/(q+2)`-Hölder continuity
/// and uniform density in capacity of order `nq`.
pub fn weak_local_to_global(b: &ExponentBudget) -> GlobalTransfer {
    let two = rat(2, 1);
    GlobalTransfer {
        mu_global: two * b.mu / (b.q + two),
        density_order: b.q * rat(b.n as i64, 1),
        t0: b.mu / (b.q + two),
    }
}

/// Global `nu`-Hölder continuity with density order `q0` to the local
/// property of order `2 q0 + 2`.
pub fn holder_density_to_local(nu: Rational, q0: Rational) -> Result<LocalTransfer, TheoremError> {
    check_converse(nu, q0)?;
    Ok(LocalTransfer {
        mu: nu,
        order: rat(2, 1) * q0 + rat(2, 1),
    })
}

/// The direct route: same exponent at order `(n+1) q`.
pub fn weak_to_local_direct(b: &ExponentBudget) -> LocalTransfer {
    LocalTransfer {
        mu: b.mu,
        order: rat(b.n as i64 + 1, 1) * b.q,
    }
}

/// `alpha = 2mu/(q+2)` and `alpha' = 4mu^2/((q+2)(2mu+(q+2)^2))`.
pub fn regularity_pair(b: &ExponentBudget) -> RegularityPair {
    let two = rat(2, 1);
    let qp = b.q + two;
    RegularityPair {
        alpha: two * b.mu / qp,
        alpha_prime: rat(4, 1) * b.mu * b.mu / (qp * (two * b.mu + qp * qp)),
    }
}

/// Global `(C, mu)` bound on a convex body to the local property of order 1
/// with coefficient `2C/eps`, where `F` lies in the closed ball of radius `1/eps` about each anchor.
pub fn convex_hcp_to_local(mu: Rational, c: f64, eps: f64) -> Result<ConvexTransfer, TheoremError> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(TheoremError::Epsilon(eps));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(TheoremError::Budget(format!("C = {c} must be positive")));
    }
    if !(mu > zero() && mu <= one()) {
        return Err(TheoremError::Budget(format!("mu = {mu} must lie in (0, 1]")));
    }
    Ok(ConvexTransfer {
        mu,
        order: one(),
        coefficient: 2.0 * c / eps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn budget(mu: Rational, q: Rational, n: u32) -> ExponentBudget {
        ExponentBudget::new(mu, q, n).unwrap()
    }

    #[test]
    fn weighted_examples() {
        let w = weighted_exponent(&budget(rat(1, 1), rat(1, 1), 1));
        assert_eq!((w.exponent, w.s0), (rat(1, 4), rat(1, 4)));
        let w = weighted_exponent(&budget(rat(1, 1), rat(2, 1), 1));
        assert_eq!((w.exponent, w.s0), (rat(1, 5), rat(1, 5)));
        assert_eq!(weighted_exponent(&budget(rat(1, 2), rat(1, 1), 1)).exponent, rat(1, 14));
    }

    #[test]
    fn global_and_local_transfers() {
        let g = weak_local_to_global(&budget(rat(1, 2), rat(1, 1), 1));
        assert_eq!((g.mu_global, g.density_order), (rat(1, 3), rat(1, 1)));
        assert_eq!(g.t0, rat(1, 6));
        let g = weak_local_to_global(&budget(rat(1, 1), rat(2, 1), 2));
        assert_eq!((g.mu_global, g.density_order), (rat(1, 2), rat(4, 1)));
        assert!(ExponentBudget::new(rat(1, 1), rat(0, 1), 1).is_err());

        let l = holder_density_to_local(rat(1, 2), rat(1, 1)).unwrap();
        assert_eq!((l.mu, l.order), (rat(1, 2), rat(4, 1)));
        let l = holder_density_to_local(rat(1, 1), rat(1, 2)).unwrap();
        assert_eq!((l.mu, l.order), (rat(1, 1), rat(3, 1)));
        assert!(holder_density_to_local(rat(1, 2), rat(0, 1)).is_err());

        let d = weak_to_local_direct(&budget(rat(1, 2), rat(1, 1), 2));
        assert_eq!((d.mu, d.order), (rat(1, 2), rat(3, 1)));
        let d = weak_to_local_direct(&budget(rat(1, 1), rat(2, 1), 1));
        assert_eq!((d.mu, d.order), (rat(1, 1), rat(4, 1)));
    }

    #[test]
    fn two_pass_route_loses_exponent() {
        let b = budget(rat(1, 2), rat(1, 1), 2);
        let g = weak_local_to_global(&b);
        let two_pass = holder_density_to_local(g.mu_global, g.density_order).unwrap();
        assert_eq!(two_pass.order, rat(2, 1) * rat(2, 1) * b.q + rat(2, 1));
        assert_eq!(two_pass.mu, rat(1, 3));
        assert!(weak_to_local_direct(&b).mu > two_pass.mu);
    }

    #[test]
    fn regularity_pair_examples() {
        let p = regularity_pair(&budget(rat(1, 2), rat(1, 1), 1));
        assert_eq!((p.alpha, p.alpha_prime), (rat(1, 3), rat(1, 30)));
        let p = regularity_pair(&budget(rat(1, 1), rat(2, 1), 1));
        assert_eq!((p.alpha, p.alpha_prime), (rat(1, 2), rat(1, 18)));
    }

    #[test]
    fn convex_transfer_examples() {
        let t = convex_hcp_to_local(rat(1, 1), 1.0, 0.5).unwrap();
        assert_eq!((t.order, t.coefficient), (rat(1, 1), 4.0));
        assert_eq!(convex_hcp_to_local(rat(1, 2), 2.0, 0.25).unwrap().coefficient, 16.0);
        assert!(matches!(convex_hcp_to_local(rat(1, 1), 1.0, 1.0), Err(TheoremError::Epsilon(_))));
    }

    #[test]
    fn parse_exact() {
        assert_eq!(parse_rational("3/8").unwrap(), rat(3, 8));
        assert_eq!(parse_rational("0.375").unwrap(), rat(3, 8));
        assert_eq!(parse_rational("-2").unwrap(), rat(-2, 1));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
    }

    /// The rational test grid `mu in {k/8}`, `q in {k/4}`.
    fn grid() -> Vec<(Rational, Rational)> {
        let mut g = Vec::new();
        for a in 1..=8 {
            for b in 1..=12 {
                g.push((rat(a, 8), rat(b, 4)));
            }
        }
        g
    }

    #[test]
    fn monotone_in_mu_and_antitone_in_q() {
        let maps: Vec<(&str, Box<dyn Fn(&ExponentBudget) -> Rational>)> = vec![
            ("weighted", Box::new(|b| weighted_exponent(b).exponent)),
            ("global", Box::new(|b| weak_local_to_global(b).mu_global)),
            ("alpha", Box::new(|b| regularity_pair(b).alpha)),
            ("alpha'", Box::new(|b| regularity_pair(b).alpha_prime)),
            ("direct", Box::new(|b| weak_to_local_direct(b).mu)),
        ];
        for (name, f) in &maps {
            for (mu, q) in grid() {
                let here = f(&budget(mu, q, 1));
                if mu + rat(1, 8) <= rat(1, 1) {
                    assert!(f(&budget(mu + rat(1, 8), q, 1)) >= here, "{name} in mu at {mu},{q}");
                }
                assert!(f(&budget(mu, q + rat(1, 4), 1)) <= here, "{name} in q at {mu},{q}");
            }
        }
    }

    #[test]
    fn exact_identities_on_grid() {
        for (mu, q) in grid() {
            let b = budget(mu, q, 1);
            assert!(weighted_exponent(&b).exponent < mu);
            assert!(weak_local_to_global(&b).mu_global < mu);
            let p = regularity_pair(&b);
            assert!(p.alpha_prime < p.alpha);
            // alpha' is the weighted exponent at (alpha, q).
            let two = rat(2, 1);
            assert_eq!(p.alpha_prime, p.alpha * p.alpha / (p.alpha + q + two));
            for n in 1..=3 {
                let b = budget(mu, q, n);
                let g = weak_local_to_global(&b);
                let l = holder_density_to_local(g.mu_global, g.density_order).unwrap();
                assert_eq!(l.mu, two * mu / (q + two));
                assert_eq!(l.order, two * rat(n as i64, 1) * q + two);
            }
        }
    }
}
