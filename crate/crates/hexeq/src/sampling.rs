//! Seeded sampling.  Every trial gets its own ChaCha stream derived from
//! (seed, trial index), so parallel and serial runs draw identical values.

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::catalog::Domain;
use crate::error::{Error, Result};
use crate::scalar::{rat, Par, Rat, Scalar, C64};

pub const GUARD_LIMIT: usize = 100;

pub struct Sampler {
    rng: ChaCha8Rng,
    pub resamples: usize,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler { rng: ChaCha8Rng::seed_from_u64(seed), resamples: 0 }
    }

    /// Independent stream for one trial.
    pub fn for_trial(seed: u64, trial: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial);
        Sampler { rng, resamples: 0 }
    }

    /// p/q with p ∈ [−9, 9], q ∈ [1, 9].
    pub fn rational(&mut self) -> Rat {
        rat(self.rng.gen_range(-9..=9), self.rng.gen_range(1..=9))
    }

    pub fn nonzero_rational(&mut self) -> Result<Rat> {
        self.guarded(|s| s.rational(), |r| !r.is_zero())
    }

    /// Positive rational in (1/8, 8), never 1.
    pub fn expv(&mut self) -> Result<Rat> {
        let lo = rat(1, 8);
        let hi = rat(8, 1);
        self.guarded(
            |s| rat(s.rng.gen_range(1..=9), s.rng.gen_range(1..=9)),
            |r| *r > lo && *r < hi && !r.is_one(),
        )
    }

    /// `n` pairwise distinct rationals.
    pub fn distinct_rationals(&mut self, n: usize) -> Result<Vec<Rat>> {
        let mut out: Vec<Rat> = Vec::with_capacity(n);
        for _ in 0..n {
            let v = self.guarded(|s| s.rational(), |r| !out.contains(r))?;
            out.push(v);
        }
        Ok(out)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.gen_range(lo..hi)
    }

    pub fn complex(&mut self, re: (f64, f64), im: (f64, f64)) -> C64 {
        C64::new(self.uniform(re.0, re.1), self.uniform(im.0, im.1))
    }

    pub fn coin(&mut self) -> bool {
        self.rng.gen()
    }

    /// Draw until `ok` holds, at most GUARD_LIMIT attempts; counts resamples.
    pub fn guarded<T>(&mut self, mut draw: impl FnMut(&mut Self) -> T, ok: impl Fn(&T) -> bool) -> Result<T> {
        for attempt in 0..GUARD_LIMIT {
            let v = draw(self);
            if ok(&v) {
                return Ok(v);
            }
            if attempt + 1 < GUARD_LIMIT {
                self.resamples += 1;
            }
        }
        Err(Error::GuardExhausted(GUARD_LIMIT))
    }
}

/// Value types that know how to draw variables and parameters.
pub trait Draw: Scalar {
    fn draw_value(s: &mut Sampler) -> Self;
    fn draw_par(s: &mut Sampler, domain: Domain) -> Result<Par<Self>>;
}

impl Draw for Rat {
    fn draw_value(s: &mut Sampler) -> Self {
        s.rational()
    }
    fn draw_par(s: &mut Sampler, domain: Domain) -> Result<Par<Self>> {
        match domain {
            Domain::Hyperbolic => Ok(Par::Exp(s.expv()?)),
            Domain::Rational => Ok(Par::Add(s.nonzero_rational()?)),
            Domain::Elliptic => Err(Error::DomainMismatch("elliptic parameters are complex".into())),
        }
    }
}

impl Draw for C64 {
    /// Variables in the unit box; parameters near the real axis, well inside
    /// the fundamental region of the standard curve.
    fn draw_value(s: &mut Sampler) -> Self {
        s.complex((-1.0, 1.0), (-1.0, 1.0))
    }
    fn draw_par(s: &mut Sampler, domain: Domain) -> Result<Par<Self>> {
        match domain {
            Domain::Elliptic => Ok(Par::Add(s.complex((0.2, 0.6), (-0.1, 0.1)))),
            Domain::Rational => {
                let m = s.uniform(0.2, 1.5);
                Ok(Par::Add(C64::new(if s.coin() { m } else { -m }, 0.0)))
            }
            Domain::Hyperbolic => Ok(Par::Exp(C64::new(s.uniform(-1.2, 1.2).exp(), 0.0))),
        }
    }
}

pub const SAMPLING_POLICY: &str = "rationals p/q, p in [-9,9], q in [1,9]; e^theta in (1/8,8) minus {1}; \
elliptic variables in [-1,1]^2, parameters Re in [0.2,0.6], Im in [-0.1,0.1]";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SampleDomain {
    Rational,
    Hyperbolic,
    EllipticComplex,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Guard {
    None,
    Distinct,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Sampled {
    Rational(Rat),
    Exp(Rat),
    Complex(C64),
}

/// A stand-alone draw of `count` values.
pub fn sample_inputs(seed: u64, domain: SampleDomain, count: usize, guard: Guard) -> Result<Vec<Sampled>> {
    let mut s = Sampler::new(seed);
    let mut out: Vec<Sampled> = Vec::with_capacity(count);
    for _ in 0..count {
        let v = s.guarded(
            |s| match domain {
                SampleDomain::Rational => Ok(Sampled::Rational(s.rational())),
                SampleDomain::Hyperbolic => s.expv().map(Sampled::Exp),
                SampleDomain::EllipticComplex => Ok(Sampled::Complex(C64::draw_value(s))),
            },
            |v| match v {
                Ok(v) => guard == Guard::None || !out.contains(v),
                Err(_) => false,
            },
        )??;
        out.push(v);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic() {
        for d in [SampleDomain::Rational, SampleDomain::Hyperbolic, SampleDomain::EllipticComplex] {
            assert_eq!(sample_inputs(9, d, 40, Guard::None).unwrap(), sample_inputs(9, d, 40, Guard::None).unwrap());
        }
        let mut a = Sampler::for_trial(5, 3);
        let mut b = Sampler::for_trial(5, 3);
        let mut c = Sampler::for_trial(5, 4);
        let va: Vec<Rat> = (0..10).map(|_| a.rational()).collect();
        let vb: Vec<Rat> = (0..10).map(|_| b.rational()).collect();
        let vc: Vec<Rat> = (0..10).map(|_| c.rational()).collect();
        assert_eq!(va, vb);
        assert_ne!(va, vc);
    }

    #[test]
    fn distinct_guard() {
        let v = sample_inputs(1, SampleDomain::Rational, 60, Guard::Distinct).unwrap();
        for i in 0..v.len() {
            for j in 0..i {
                assert_ne!(v[i], v[j]);
            }
        }
    }

    #[test]
    fn expv_never_one() {
        let mut s = Sampler::new(2);
        for _ in 0..2000 {
            let t = s.expv().unwrap();
            assert!(!t.is_one() && t > rat(1, 8) && t < rat(8, 1));
        }
    }

    #[test]
    fn guard_exhaustion() {
        let mut s = Sampler::new(0);
        assert_eq!(s.guarded(|s| s.rational(), |_| false), Err(Error::GuardExhausted(GUARD_LIMIT)));
    }
}
