use alloc::collections::BTreeMap;
use alloc::vec::Vec;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qsim::{SparseState, WireId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(rename_all = "lowercase"))]
pub enum Party {
    Verifier,
    Prover,
}

/// Count of qudits held by the verifier, with its history.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Occupancy {
    current: usize,
    high_water: usize,
    trace: Vec<usize>,
}

impl Occupancy {
    pub fn set(&mut self, n: usize) {
        if n != self.current || self.trace.is_empty() {
            self.current = n;
            self.high_water = self.high_water.max(n);
            self.trace.push(n);
        }
    }

    pub fn current(&self) -> usize {
        self.current
    }

    pub fn high_water(&self) -> usize {
        self.high_water
    }

    pub fn trace(&self) -> &[usize] {
        &self.trace
    }
}

/// The shared simulation state with an owner on every live wire.
#[derive(Clone, Debug)]
pub struct Kernel {
    state: SparseState,
    owner: BTreeMap<WireId, Party>,
    occupancy: Occupancy,
}

impl Kernel {
    pub fn new(q: u32) -> Result<Self> {
        let mut k = Kernel { state: SparseState::new(q)?, owner: BTreeMap::new(), occupancy: Occupancy::default() };
        k.occupancy.set(0);
        Ok(k)
    }

    pub fn q(&self) -> u32 {
        self.state.q()
    }

    pub fn occupancy(&self) -> &Occupancy {
        &self.occupancy
    }

    fn refresh(&mut self) {
        let n = self.owner.iter().filter(|(w, p)| **p == Party::Verifier && self.state.is_live(**w)).count();
        self.occupancy.set(n);
    }

    pub fn owner(&self, w: WireId) -> Option<Party> {
        if self.state.is_live(w) {
            self.owner.get(&w).copied()
        } else {
            None
        }
    }

    pub fn check_owned(&self, party: Party, wires: &[WireId]) -> Result<()> {
        for w in wires {
            if self.owner(*w) != Some(party) {
                return Err(Error::Parameter(alloc::format!("{party:?} does not hold wire {w}")));
            }
        }
        Ok(())
    }

    pub fn alloc(&mut self, party: Party, digits: &[u32]) -> Result<Vec<WireId>> {
        let wires: Vec<WireId> = digits.iter().map(|d| self.state.alloc(*d)).collect::<Result<_>>()?;
        for w in &wires {
            self.owner.insert(*w, party);
        }
        self.refresh();
        Ok(wires)
    }

    pub fn alloc_terms(&mut self, party: Party, n: usize, terms: &[(Vec<u32>, num_complex::Complex64)]) -> Result<Vec<WireId>> {
        let wires = self.state.alloc_terms(n, terms.iter().map(|(d, a)| (d.clone(), *a)))?;
        for w in &wires {
            self.owner.insert(*w, party);
        }
        self.refresh();
        Ok(wires)
    }

    /// Hand wires from their current holder to `to`.
    pub fn transfer(&mut self, wires: &[WireId], to: Party) -> Result<()> {
        let from = match to {
            Party::Verifier => Party::Prover,
            Party::Prover => Party::Verifier,
        };
        self.check_owned(from, wires)?;
        for w in wires {
            self.owner.insert(*w, to);
        }
        self.refresh();
        Ok(())
    }

    /// Mutable access to the state after checking that `party` holds every
    /// wire in `wires`.
    pub fn state_for(&mut self, party: Party, wires: &[WireId]) -> Result<&mut SparseState> {
        self.check_owned(party, wires)?;
        Ok(&mut self.state)
    }

    /// Standard-basis measurement by `party`; the wires are consumed.
    pub fn measure<R: rand::Rng + ?Sized>(&mut self, party: Party, wires: &[WireId], rng: &mut R) -> Result<Vec<u32>> {
        self.check_owned(party, wires)?;
        let out = self.state.measure(wires, rng)?;
        for w in wires {
            self.owner.remove(w);
        }
        self.refresh();
        Ok(out)
    }

    /// Privileged access for channels and test oracles.
    pub fn raw_state(&mut self) -> &mut SparseState {
        &mut self.state
    }

    /// Forget wires that left the state through a raw operation.
    pub fn sync(&mut self) {
        let state = &self.state;
        self.owner.retain(|w, _| state.is_live(*w));
        self.refresh();
    }

    /// Register wires created through raw access.
    pub fn adopt(&mut self, party: Party, wires: &[WireId]) {
        for w in wires {
            self.owner.insert(*w, party);
        }
        self.refresh();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn ownership_and_occupancy() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let mut k = Kernel::new(2).unwrap();
        let w = k.alloc(Party::Verifier, &[0, 1, 0]).unwrap();
        assert_eq!(k.occupancy().current(), 3);
        assert!(k.state_for(Party::Prover, &w).is_err());
        k.transfer(&w[..2], Party::Prover).unwrap();
        assert_eq!(k.occupancy().current(), 1);
        assert!(k.transfer(&w[..1], Party::Prover).is_err());
        assert_eq!(k.measure(Party::Prover, &w[1..2], &mut rng).unwrap(), alloc::vec![1]);
        k.transfer(&w[..1], Party::Verifier).unwrap();
        assert_eq!(k.occupancy().current(), 2);
        assert_eq!(k.occupancy().high_water(), 3);
        assert_eq!(k.occupancy().trace(), &[0, 3, 1, 2]);
    }
}
