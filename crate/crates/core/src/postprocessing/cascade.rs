//! Cascade interactive error reconciliation.
//!
//! Both parties shuffle the key with a shared permutation, cut it into blocks
//! and compare block parities. A block with odd disagreement is bisected by
//! exchanging sub-block parities until the erroneous bit is isolated. Every
//! correction flips the parity of the block containing that bit in all
//! earlier passes, which can expose further errors there; those are chased
//! until no odd block remains. Only Bob's key changes. Every parity Alice
//! discloses is counted as leaked.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;

use super::toeplitz::privacy_amplify;
use crate::error::{Error, Result};
use crate::source::generate_bitstream;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CascadeParams {
    pub passes: usize,
    /// First-pass block size is `block_constant / qber`.
    pub block_constant: f64,
    /// Length of the final verification hash.
    pub verification_bits: usize,
}

impl Default for CascadeParams {
    fn default() -> Self {
        Self {
            passes: 4,
            block_constant: 0.73,
            verification_bits: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReconciliationResult {
    pub corrected_key: Vec<bool>,
    /// Parity bits disclosed, including the verification hash.
    pub bits_leaked: usize,
    pub passes: usize,
    pub corrections: usize,
    pub converged: bool,
}

struct Pass {
    /// Key index at each shuffled position.
    order: Vec<usize>,
    /// Shuffled position of each key index.
    position: Vec<usize>,
    block_size: usize,
    alice_parity: Vec<bool>,
    bob_parity: Vec<bool>,
}

impl Pass {
    fn block_of(&self, index: usize) -> usize {
        self.position[index] / self.block_size
    }

    fn block_range(&self, block: usize) -> (usize, usize) {
        let start = block * self.block_size;
        (start, (start + self.block_size).min(self.order.len()))
    }

    fn parity(&self, key: &[bool], lo: usize, hi: usize) -> bool {
        self.order[lo..hi].iter().fold(false, |acc, &i| acc ^ key[i])
    }
}

struct Session<'a> {
    alice: &'a [bool],
    bob: Vec<bool>,
    passes: Vec<Pass>,
    leaked: usize,
    corrections: usize,
}

impl Session<'_> {
    /// Bisects an odd block of pass `p` and returns the key index of the
    /// error it isolates.
    fn bisect(&mut self, p: usize, block: usize) -> usize {
        let pass = &self.passes[p];
        let (mut lo, mut hi) = pass.block_range(block);
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            self.leaked += 1;
            let alice_half = pass.parity(self.alice, lo, mid);
            let bob_half = pass.parity(&self.bob, lo, mid);
            if alice_half != bob_half {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        pass.order[lo]
    }

    fn is_odd(&self, p: usize, block: usize) -> bool {
        let pass = &self.passes[p];
        pass.alice_parity[block] != pass.bob_parity[block]
    }

    /// Fixes odd blocks until none remain among the passes opened so far.
    /// Smaller blocks are served first since their bisection is cheaper.
    fn resolve(&mut self, mut pending: BTreeSet<(usize, usize)>) {
        while let Some((p, block)) = pending.pop_first() {
            if !self.is_odd(p, block) {
                continue;
            }
            let index = self.bisect(p, block);
            self.bob[index] = !self.bob[index];
            self.corrections += 1;
            for q in 0..self.passes.len() {
                let b = self.passes[q].block_of(index);
                let parity = &mut self.passes[q].bob_parity[b];
                *parity = !*parity;
                if self.is_odd(q, b) {
                    pending.insert((q, b));
                } else {
                    pending.remove(&(q, b));
                }
            }
        }
    }
}

/// Reconciles Bob's key towards Alice's with the default parameters.
pub fn reconcile<R: Rng + ?Sized>(
    alice_key: &[bool],
    bob_key: &[bool],
    qber_hint: f64,
    rng: &mut R,
) -> Result<ReconciliationResult> {
    reconcile_with(alice_key, bob_key, qber_hint, &CascadeParams::default(), rng)
}

pub fn reconcile_with<R: Rng + ?Sized>(
    alice_key: &[bool],
    bob_key: &[bool],
    qber_hint: f64,
    params: &CascadeParams,
    rng: &mut R,
) -> Result<ReconciliationResult> {
    if alice_key.len() != bob_key.len() {
        return Err(Error::LengthMismatch {
            left: alice_key.len(),
            right: bob_key.len(),
        });
    }
    if !(qber_hint > 0.0 && qber_hint < 0.5) {
        return Err(Error::invalid("qber_hint", format!("{qber_hint} not in (0, 0.5)")));
    }
    let n = alice_key.len();
    let mut session = Session {
        alice: alice_key,
        bob: bob_key.to_vec(),
        passes: Vec::with_capacity(params.passes),
        leaked: 0,
        corrections: 0,
    };
    if n == 0 {
        return Ok(ReconciliationResult {
            corrected_key: Vec::new(),
            bits_leaked: 0,
            passes: 0,
            corrections: 0,
            converged: true,
        });
    }

    let first_block = ((params.block_constant / qber_hint).ceil() as usize).clamp(1, n);
    for p in 0..params.passes {
        let block_size = first_block.saturating_mul(1 << p).min(n);
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        let mut position = vec![0; n];
        for (pos, &i) in order.iter().enumerate() {
            position[i] = pos;
        }
        let blocks = n.div_ceil(block_size);
        let mut pass = Pass {
            order,
            position,
            block_size,
            alice_parity: Vec::with_capacity(blocks),
            bob_parity: Vec::with_capacity(blocks),
        };
        for b in 0..blocks {
            let (lo, hi) = pass.block_range(b);
            pass.alice_parity.push(pass.parity(alice_key, lo, hi));
            pass.bob_parity.push(pass.parity(&session.bob, lo, hi));
        }
        session.leaked += blocks;
        let odd: BTreeSet<(usize, usize)> = (0..blocks)
            .filter(|&b| pass.alice_parity[b] != pass.bob_parity[b])
            .map(|b| (p, b))
            .collect();
        session.passes.push(pass);
        session.resolve(odd);
    }

    // Compare a random linear hash of both keys.
    let m = params.verification_bits.min(n);
    let seed = generate_bitstream(n + m.max(1) - 1, rng);
    let converged = privacy_amplify(alice_key, m, &seed)? == privacy_amplify(&session.bob, m, &seed)?;
    Ok(ReconciliationResult {
        corrected_key: session.bob,
        bits_leaked: session.leaked + m,
        passes: params.passes,
        corrections: session.corrections,
        converged,
    })
}
