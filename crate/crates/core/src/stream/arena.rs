//! Reference-counted interning of permutations shared by the sketch's
//! buckets and faraway rings.
//!
//! Several buckets typically hold the same point; interning lets one
//! update compute each distance once and lets membership lists be plain
//! slot vectors. Slots are recycled once nothing references them.

use std::collections::HashMap;

use crate::perm::Permutation;

#[derive(Debug, Default)]
pub(crate) struct Arena {
    slots: Vec<Option<Permutation>>,
    refcount: Vec<u32>,
    index: HashMap<Vec<u32>, u32>,
    free: Vec<u32>,
}

impl Arena {
    pub(crate) fn new() -> Self {
        Self::default()
    }

    /// Interns `p`, bumping its reference count.
    pub(crate) fn acquire(&mut self, p: &Permutation) -> u32 {
        if let Some(&slot) = self.index.get(p.symbols()) {
            self.refcount[slot as usize] += 1;
            return slot;
        }
        let slot = match self.free.pop() {
            Some(s) => {
                self.slots[s as usize] = Some(p.clone());
                self.refcount[s as usize] = 1;
                s
            }
            None => {
                self.slots.push(Some(p.clone()));
                self.refcount.push(1);
                (self.slots.len() - 1) as u32
            }
        };
        self.index.insert(p.symbols().to_vec(), slot);
        slot
    }

    pub(crate) fn release(&mut self, slot: u32) {
        let i = slot as usize;
        debug_assert!(self.refcount[i] > 0);
        self.refcount[i] -= 1;
        if self.refcount[i] == 0 {
            let p = self.slots[i].take().expect("live slot");
            self.index.remove(p.symbols());
            self.free.push(slot);
        }
    }

    pub(crate) fn get(&self, slot: u32) -> &Permutation {
        self.slots[slot as usize].as_ref().expect("live slot")
    }

    /// Number of distinct live permutations.
    pub(crate) fn live(&self) -> usize {
        self.index.len()
    }

    /// Upper bound on slot numbers ever handed out.
    pub(crate) fn capacity(&self) -> usize {
        self.slots.len()
    }
}
