use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{Real, Scalar};

/// Randomized response over a finite domain `{0, …, domain_size − 1}`.
///
/// With probability `p_honest` the respondent reports the true value;
/// otherwise they report a uniform draw from the whole domain (which may
/// coincide with the truth). The survey with two fair coins is
/// `p_honest = 1/2`, `domain_size = 2`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RandomizedResponse<S> {
    p_honest: S,
    domain_size: usize,
}

impl<S: Scalar> RandomizedResponse<S> {
    pub fn new(p_honest: S, domain_size: usize) -> Result<Self> {
        if p_honest < S::zero() || p_honest > S::one() {
            return Err(Error::InvalidParameter(format!("p_honest must lie in [0, 1], got {p_honest:?}")));
        }
        if domain_size < 2 {
            return Err(Error::InvalidParameter(format!("domain size must be ≥ 2, got {domain_size}")));
        }
        Ok(Self { p_honest, domain_size })
    }

    /// Binary mechanism (`true` = 1, `false` = 0).
    pub fn binary(p_honest: S) -> Result<Self> {
        Self::new(p_honest, 2)
    }

    pub fn p_honest(&self) -> &S {
        &self.p_honest
    }

    pub fn domain_size(&self) -> usize {
        self.domain_size
    }

    fn check(&self, value: usize) -> Result<()> {
        if value >= self.domain_size {
            return Err(Error::OutsideDomain {
                value,
                domain_size: self.domain_size,
            });
        }
        Ok(())
    }

    /// `P(output | input)`.
    pub fn output_probability(&self, input: usize, output: usize) -> S {
        let noise = (S::one() - self.p_honest.clone()) / S::from_count(self.domain_size as u64);
        if input == output {
            self.p_honest.clone() + noise
        } else {
            noise
        }
    }

    pub fn output_distribution(&self, input: usize) -> Result<Vec<S>> {
        self.check(input)?;
        Ok((0..self.domain_size).map(|o| self.output_probability(input, o)).collect())
    }

    /// Distribution over the `domain_size^releases` joint outcomes of
    /// answering `releases` times about the same value, outcomes in
    /// lexicographic order.
    pub fn joint_output_distribution(&self, input: usize, releases: usize) -> Result<Vec<S>> {
        let single = self.output_distribution(input)?;
        let mut joint = vec![S::one()];
        for _ in 0..releases {
            joint = joint
                .iter()
                .flat_map(|p| single.iter().map(move |q| p.clone() * q.clone()))
                .collect();
        }
        Ok(joint)
    }

    /// Largest `P(o | a) / P(o | b)` over all input pairs and joint outcomes,
    /// found by enumeration. `None` means unbounded (a zero denominator).
    pub fn max_probability_ratio(&self, releases: usize) -> Option<S> {
        let dists: Vec<Vec<S>> = (0..self.domain_size)
            .map(|v| self.joint_output_distribution(v, releases).expect("in domain"))
            .collect();
        let mut best = S::one();
        for a in &dists {
            for b in &dists {
                for (pa, pb) in a.iter().zip(b) {
                    if pb.is_zero() {
                        if !pa.is_zero() {
                            return None;
                        }
                        continue;
                    }
                    best = best.max_of(pa.clone() / pb.clone());
                }
            }
        }
        Some(best)
    }

    /// One response drawn from `rng`.
    pub fn respond_with<R: Rng + ?Sized>(&self, value: usize, rng: &mut R) -> Result<usize> {
        self.check(value)?;
        let p = self.p_honest.to_f64_lossy();
        if p >= 1.0 || rng.gen::<f64>() < p {
            Ok(value)
        } else {
            Ok(rng.gen_range(0..self.domain_size))
        }
    }
}

/// One response, reproducible from `seed`.
pub fn rr_respond<S: Scalar>(value: usize, mech: &RandomizedResponse<S>, seed: u64) -> Result<usize> {
    mech.respond_with(value, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Number of `true` answers when `true_count` of `n` respondents hold the
/// property and each answers once through `mech` (binary).
pub fn simulate_survey<S: Scalar>(n: u64, true_count: u64, mech: &RandomizedResponse<S>, seed: u64) -> Result<u64> {
    if true_count > n {
        return Err(Error::InvalidParameter(format!("true count {true_count} exceeds n = {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut observed = 0;
    for i in 0..n {
        let truth = usize::from(i < true_count);
        observed += mech.respond_with(truth, &mut rng)? as u64;
    }
    Ok(observed)
}

/// `ln(P(o | o) / P(o | o'))`, the worst-case log ratio; infinite when
/// `p_honest = 1`.
pub fn rr_epsilon<F: Real>(mech: &RandomizedResponse<F>) -> F {
    let d = F::from_count(mech.domain_size as u64);
    let noise = (F::one() - mech.p_honest) / d;
    if noise.is_zero() {
        return F::infinity();
    }
    ((mech.p_honest + noise) / noise).ln()
}

/// Inverse of [`rr_epsilon`]: the `p_honest` giving exactly `epsilon`.
pub fn epsilon_to_p_honest<F: Real>(epsilon: F, domain_size: usize) -> Result<F> {
    if epsilon < F::zero() || epsilon.is_nan() {
        return Err(Error::InvalidParameter("ε must be non-negative".into()));
    }
    if epsilon.is_infinite() {
        return Ok(F::one());
    }
    let grow = epsilon.exp_m1();
    Ok(grow / (grow + F::from_count(domain_size as u64)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CountEstimate<F> {
    /// Unbiased estimate; may fall outside `[0, n]`.
    pub raw: F,
    pub clamped: F,
}

/// Inverts `E[x_O] = p·x + (1 − p)·n/2` for a binary mechanism.
pub fn rr_estimate_count<F: Real>(observed_true: u64, n: u64, mech: &RandomizedResponse<F>) -> Result<CountEstimate<F>> {
    if mech.domain_size != 2 {
        return Err(Error::InvalidParameter("count estimation needs a binary mechanism".into()));
    }
    if mech.p_honest.is_zero() {
        return Err(Error::InvalidParameter("estimator undefined when p_honest = 0".into()));
    }
    if observed_true > n {
        return Err(Error::InvalidParameter(format!("observed count {observed_true} exceeds n = {n}")));
    }
    let n_f = F::from_count(n);
    let half = F::ratio(1, 2);
    let raw = (F::from_count(observed_true) - n_f * (F::one() - mech.p_honest) * half) / mech.p_honest;
    Ok(CountEstimate {
        raw,
        clamped: raw.max(F::zero()).min(n_f),
    })
}
