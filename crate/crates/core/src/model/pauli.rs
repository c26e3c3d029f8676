use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Single-qubit Pauli letter; identity is implied on unlisted sites.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        };
        write!(f, "{c}")
    }
}

/// A real-weighted Pauli word on a chain, with 1-based site labels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PauliString {
    pub coeff: f64,
    letters: BTreeMap<usize, Pauli>,
}

impl PauliString {
    /// Builds a string from `(site, letter)` pairs. Sites are 1-based; a
    /// repeated site is rejected rather than multiplied out.
    pub fn new(coeff: f64, letters: impl IntoIterator<Item = (usize, Pauli)>) -> Result<Self> {
        if !coeff.is_finite() {
            return Err(Error::domain(format!("non-finite coefficient {coeff}")));
        }
        let mut map = BTreeMap::new();
        for (site, p) in letters {
            if site == 0 {
                return Err(Error::domain("site indices are 1-based"));
            }
            if map.insert(site, p).is_some() {
                return Err(Error::domain(format!("site {site} listed twice")));
            }
        }
        Ok(Self { coeff, letters: map })
    }

    pub fn letters(&self) -> impl Iterator<Item = (usize, Pauli)> + '_ {
        self.letters.iter().map(|(&s, &p)| (s, p))
    }

    pub fn letter(&self, site: usize) -> Option<Pauli> {
        self.letters.get(&site).copied()
    }

    pub fn weight(&self) -> usize {
        self.letters.len()
    }

    pub fn max_site(&self) -> usize {
        self.letters.keys().next_back().copied().unwrap_or(0)
    }

    /// The same word translated by `shift` sites on a ring of `sites`.
    pub fn shifted(&self, shift: usize, sites: usize) -> Self {
        let letters = self
            .letters
            .iter()
            .map(|(&s, &p)| ((s - 1 + shift) % sites + 1, p))
            .collect();
        Self {
            coeff: self.coeff,
            letters,
        }
    }

    /// Bit masks for the computational-basis action, with site 1 as the most
    /// significant bit: `(flip, sign, y_count)`. The string maps |b⟩ to
    /// `coeff · i^y_count · (−1)^popcount(b & sign) |b ^ flip⟩`.
    pub(crate) fn masks(&self, sites: usize) -> (usize, usize, u32) {
        let mut flip = 0usize;
        let mut sign = 0usize;
        let mut ys = 0u32;
        for (&s, &p) in &self.letters {
            let bit = 1usize << (sites - s);
            match p {
                Pauli::X => flip |= bit,
                Pauli::Y => {
                    flip |= bit;
                    sign |= bit;
                    ys += 1;
                }
                Pauli::Z => sign |= bit,
            }
        }
        (flip, sign, ys)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:+.6}", self.coeff)?;
        for (s, p) in &self.letters {
            write!(f, " {p}{s}")?;
        }
        Ok(())
    }
}
