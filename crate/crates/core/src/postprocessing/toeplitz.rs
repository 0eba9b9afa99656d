//! Toeplitz-matrix hashing over GF(2).
//!
//! For an `n`-bit key and `m` output bits the matrix is fixed by `n + m - 1`
//! seed bits: `T[i][j] = seed[i - j + n - 1]`. Row `i` therefore dotted with
//! the key equals the reversed key dotted with the contiguous seed window
//! `seed[i .. i + n]`, which is what the packed implementation evaluates.

use crate::error::{Error, Result};

fn pack(bits: impl ExactSizeIterator<Item = bool>) -> Vec<u64> {
    let mut words = vec![0u64; bits.len().div_ceil(64) + 1];
    for (i, b) in bits.enumerate() {
        if b {
            words[i / 64] |= 1 << (i % 64);
        }
    }
    words
}

/// 64 bits of `words` starting at bit `offset`.
fn window(words: &[u64], offset: usize) -> u64 {
    let (q, r) = (offset / 64, offset % 64);
    if r == 0 {
        words[q]
    } else {
        (words[q] >> r) | (words[q + 1] << (64 - r))
    }
}

/// `T·key` over GF(2), where `T` is the `output_length × key.len()` Toeplitz
/// matrix defined by `seed`.
pub fn privacy_amplify(key: &[bool], output_length: usize, seed: &[bool]) -> Result<Vec<bool>> {
    let n = key.len();
    if output_length > n {
        return Err(Error::invalid(
            "output_length",
            format!("{output_length} exceeds key length {n}"),
        ));
    }
    if output_length == 0 {
        return Ok(Vec::new());
    }
    if seed.len() != n + output_length - 1 {
        return Err(Error::LengthMismatch {
            left: seed.len(),
            right: n + output_length - 1,
        });
    }
    let key_rev = pack(key.iter().rev().copied());
    let seed_words = pack(seed.iter().copied());
    let full_words = n / 64;
    let tail = n % 64;
    let tail_mask = if tail == 0 { 0 } else { (1u64 << tail) - 1 };
    Ok((0..output_length)
        .map(|i| {
            let mut acc = 0u64;
            for w in 0..full_words {
                acc ^= key_rev[w] & window(&seed_words, i + 64 * w);
            }
            if tail != 0 {
                acc ^= key_rev[full_words] & window(&seed_words, i + 64 * full_words) & tail_mask;
            }
            acc.count_ones() % 2 == 1
        })
        .collect())
}

/// Row `i` of the Toeplitz matrix for an `n`-bit key, built entry by entry.
pub fn toeplitz_matrix_row(seed: &[bool], n: usize, i: usize) -> Vec<bool> {
    (0..n).map(|j| seed[i + n - 1 - j]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use crate::source::generate_bitstream;

    fn bits(s: &str) -> Vec<bool> {
        s.chars().map(|c| c == '1').collect()
    }

    // Explicit matrix-vector product, independent of the packed path.
    fn oracle(key: &[bool], m: usize, seed: &[bool]) -> Vec<bool> {
        let n = key.len();
        (0..m)
            .map(|i| {
                (0..n).fold(false, |acc, j| acc ^ (seed[i + n - 1 - j] & key[j]))
            })
            .collect()
    }

    #[test]
    fn four_by_three_example() {
        let key = bits("1011");
        let seed = bits("101100");
        // rows: T[i][j] = seed[i - j + 3]
        let rows: Vec<Vec<bool>> = (0..3).map(|i| toeplitz_matrix_row(&seed, 4, i)).collect();
        assert_eq!(rows[0], bits("1101"));
        assert_eq!(rows[1], bits("0110"));
        assert_eq!(rows[2], bits("0011"));
        let out = privacy_amplify(&key, 3, &seed).unwrap();
        assert_eq!(out, oracle(&key, 3, &seed));
        assert_eq!(out, bits("010"));
    }

    #[test]
    fn zero_key_and_empty_output() {
        let mut rng = seeded(3);
        let seed = generate_bitstream(100 + 40 - 1, &mut rng);
        assert!(privacy_amplify(&vec![false; 100], 40, &seed).unwrap().iter().all(|b| !b));
        assert!(privacy_amplify(&vec![true; 100], 0, &[]).unwrap().is_empty());
    }

    #[test]
    fn length_errors() {
        assert!(privacy_amplify(&[true; 4], 5, &[false; 8]).is_err());
        assert!(matches!(privacy_amplify(&[true; 4], 3, &[false; 5]), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn packed_matches_oracle_across_word_boundaries() {
        let mut rng = seeded(99);
        for &(n, m) in &[(1, 1), (63, 5), (64, 64), (65, 3), (130, 70), (300, 299)] {
            let key = generate_bitstream(n, &mut rng);
            let seed = generate_bitstream(n + m - 1, &mut rng);
            assert_eq!(privacy_amplify(&key, m, &seed).unwrap(), oracle(&key, m, &seed), "n={n} m={m}");
        }
    }
}
