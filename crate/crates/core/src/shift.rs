//! Shift-invariant driving measures on the sequence space: Bernoulli and
//! two-state Markov, with cylinder masses, Lyapunov exponents and
//! deterministic path sampling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::affine::SystemParams;
use crate::error::Error;
use crate::word::Word;
use crate::Result;

const MARKOV_TOL: f64 = 1e-12;

/// A shift-invariant probability measure on one-sided 0-1 sequences.
///
/// `Bernoulli(p)` draws symbol 0 with probability `p` independently;
/// `Markov` is an irreducible stationary two-state chain started from its
/// stationary vector, so both are ergodic.
#[derive(Clone, Debug)]
pub enum ShiftMeasure {
    Bernoulli {
        /// Probability of symbol 0.
        p: f64,
    },
    Markov {
        /// Row-stochastic transition matrix `P[i][j] = P(next=j | cur=i)`.
        transition: [[f64; 2]; 2],
        /// Stationary row vector, `pi P = pi`.
        stationary: [f64; 2],
    },
}

impl ShiftMeasure {
    pub fn bernoulli(p: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidBernoulli(p));
        }
        Ok(ShiftMeasure::Bernoulli { p })
    }

    /// Build from a transition matrix; the stationary vector is computed in
    /// closed form from the two-state balance equation.
    pub fn markov(transition: [[f64; 2]; 2]) -> Result<Self> {
        for (i, row) in transition.iter().enumerate() {
            if row.iter().any(|&x| !(0.0..=1.0).contains(&x)) {
                return Err(Error::InvalidMarkov(format!("row {i} has entries outside [0,1]")));
            }
            if (row[0] + row[1] - 1.0).abs() > MARKOV_TOL {
                return Err(Error::InvalidMarkov(format!("row {i} does not sum to 1")));
            }
        }
        if transition[0][1] <= 0.0 || transition[1][0] <= 0.0 {
            return Err(Error::InvalidMarkov(
                "chain must be irreducible (both off-diagonal entries positive)".into(),
            ));
        }
        let pi0 = transition[1][0] / (transition[0][1] + transition[1][0]);
        Ok(ShiftMeasure::Markov {
            transition,
            stationary: [pi0, 1.0 - pi0],
        })
    }

    /// Like [`ShiftMeasure::markov`] but validates a user-supplied
    /// stationary vector instead of trusting it.
    pub fn markov_with_stationary(
        transition: [[f64; 2]; 2],
        stationary: [f64; 2],
    ) -> Result<Self> {
        let m = Self::markov(transition)?;
        let ShiftMeasure::Markov {
            stationary: computed,
            ..
        } = &m
        else {
            unreachable!()
        };
        if (computed[0] - stationary[0]).abs() > MARKOV_TOL
            || (computed[1] - stationary[1]).abs() > MARKOV_TOL
        {
            return Err(Error::InvalidMarkov("supplied vector is not stationary".into()));
        }
        Ok(m)
    }

    /// Mass of the one-symbol cylinder `C_0`.
    pub fn symbol_zero_mass(&self) -> f64 {
        match self {
            ShiftMeasure::Bernoulli { p } => *p,
            ShiftMeasure::Markov { stationary, .. } => stationary[0],
        }
    }

    /// Mass of the cylinder of all sequences starting with `word`.
    pub fn cylinder_mass(&self, word: &Word) -> f64 {
        match self {
            ShiftMeasure::Bernoulli { p } => {
                let zeros = word.count_zeros() as i32;
                let ones = word.count_ones() as i32;
                p.powi(zeros) * (1.0 - p).powi(ones)
            }
            ShiftMeasure::Markov {
                transition,
                stationary,
            } => {
                if word.is_empty() {
                    return 1.0;
                }
                let mut mass = stationary[word.get(0) as usize];
                for i in 1..word.len() {
                    mass *= transition[word.get(i - 1) as usize][word.get(i) as usize];
                }
                mass
            }
        }
    }

    /// `lambda(nu) = nu(C_0) ln a + nu(C_1) ln b`.
    pub fn lyapunov(&self, params: &SystemParams) -> f64 {
        let p0 = self.symbol_zero_mass();
        p0 * params.a.ln() + (1.0 - p0) * params.b.ln()
    }

    /// Draw a length-`n` word. Same seed, same word; independent streams
    /// come from distinct seeds.
    pub fn sample_path(&self, n: usize, seed: u64) -> Word {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut w = Word::empty();
        match self {
            ShiftMeasure::Bernoulli { p } => {
                for _ in 0..n {
                    w.push(if rng.random::<f64>() < *p { 0 } else { 1 });
                }
            }
            ShiftMeasure::Markov {
                transition,
                stationary,
            } => {
                if n == 0 {
                    return w;
                }
                let mut cur: usize = if rng.random::<f64>() < stationary[0] { 0 } else { 1 };
                w.push(cur as u8);
                for _ in 1..n {
                    cur = if rng.random::<f64>() < transition[cur][0] { 0 } else { 1 };
                    w.push(cur as u8);
                }
            }
        }
        w
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn markov_example() -> ShiftMeasure {
        ShiftMeasure::markov([[0.9, 0.1], [0.2, 0.8]]).unwrap()
    }

    #[test]
    fn rejects_degenerate_bernoulli() {
        assert!(ShiftMeasure::bernoulli(0.0).is_err());
        assert!(ShiftMeasure::bernoulli(1.0).is_err());
        assert!(ShiftMeasure::bernoulli(0.5).is_ok());
    }

    #[test]
    fn markov_stationary_closed_form() {
        let ShiftMeasure::Markov { stationary, .. } = markov_example() else {
            unreachable!()
        };
        assert!((stationary[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!(ShiftMeasure::markov_with_stationary(
            [[0.9, 0.1], [0.2, 0.8]],
            [2.0 / 3.0, 1.0 / 3.0]
        )
        .is_ok());
        assert!(
            ShiftMeasure::markov_with_stationary([[0.9, 0.1], [0.2, 0.8]], [0.5, 0.5]).is_err()
        );
    }

    #[test]
    fn rejects_reducible_chain() {
        assert!(ShiftMeasure::markov([[1.0, 0.0], [0.2, 0.8]]).is_err());
    }

    #[test]
    fn cylinder_masses() {
        let nu = ShiftMeasure::bernoulli(0.6).unwrap();
        assert!((nu.cylinder_mass(&"01".parse().unwrap()) - 0.24).abs() < 1e-15);
        assert_eq!(nu.cylinder_mass(&Word::empty()), 1.0);

        let m = markov_example();
        assert_eq!(m.cylinder_mass(&Word::empty()), 1.0);
        // pi_0 * P00 * P01 against a direct matrix-product oracle
        let expect = (2.0 / 3.0) * 0.9 * 0.1;
        assert!((m.cylinder_mass(&"001".parse().unwrap()) - expect).abs() < 1e-15);
        assert!((expect - 0.06).abs() < 1e-15);
    }

    #[test]
    fn kolmogorov_consistency_and_level_mass() {
        let measures = [
            ShiftMeasure::bernoulli(0.37).unwrap(),
            markov_example(),
        ];
        for nu in &measures {
            for n in 0..=6u32 {
                let mut total = 0.0;
                for idx in 0..1u64 << n {
                    let w = Word::from_index(n, idx);
                    let mut w0 = w.clone();
                    w0.push(0);
                    let mut w1 = w.clone();
                    w1.push(1);
                    let mass = nu.cylinder_mass(&w);
                    assert!(
                        (mass - nu.cylinder_mass(&w0) - nu.cylinder_mass(&w1)).abs() < 1e-12
                    );
                    total += mass;
                }
                assert!((total - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn lyapunov_values() {
        let p = SystemParams::new(0.5, 1.5).unwrap();
        let nu = ShiftMeasure::bernoulli(0.5).unwrap();
        assert!((nu.lyapunov(&p) - 0.5 * (0.75f64).ln()).abs() < 1e-15);

        let p2 = SystemParams::new(0.5, 1.25).unwrap();
        let nu2 = ShiftMeasure::bernoulli(0.6).unwrap();
        let expect = 0.6 * 0.5f64.ln() + 0.4 * 1.25f64.ln();
        assert!((nu2.lyapunov(&p2) - expect).abs() < 1e-15);
        assert!((expect + 0.32664).abs() < 1e-4);

        let p3 = SystemParams::new(0.5, 3.0).unwrap();
        assert!(nu.lyapunov(&p3) > 0.0);
    }

    #[test]
    fn sample_path_deterministic_and_lln() {
        let nu = ShiftMeasure::bernoulli(0.5).unwrap();
        assert_eq!(nu.sample_path(0, 7).len(), 0);
        let w1 = nu.sample_path(1000, 42);
        let w2 = nu.sample_path(1000, 42);
        assert_eq!(w1, w2);
        assert_ne!(w1, nu.sample_path(1000, 43));

        let w = nu.sample_path(1_000_000, 1);
        let freq0 = w.count_zeros() as f64 / 1e6;
        assert!((freq0 - 0.5).abs() < 0.002);
    }

    #[test]
    fn markov_path_matches_stationary_frequency() {
        let m = markov_example();
        let w = m.sample_path(200_000, 5);
        let freq0 = w.count_zeros() as f64 / 2e5;
        assert!((freq0 - 2.0 / 3.0).abs() < 0.01);
    }
}
