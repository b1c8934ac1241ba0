//! Tag-side block codes, chip mapping and frame layout.
//!
//! The tag transmits frames of backscatter symbols ("chips").  A frame opens
//! with three equal-length preamble blocks: a silent block for direct-path
//! estimation, then one block of each training symbol.  The payload carries
//! message tuples expanded through a binary block code and mapped to the
//! modulation alphabet.
//!
//! # Example
//!
//! ```
//! use ambc_core::codec::{Code, Modulation};
//!
//! let code = Code::hadamard(2).unwrap();
//! assert_eq!((code.k(), code.n()), (3, 8));
//! let chips: Vec<u8> = code.encode(5).to_vec();
//! assert_eq!(code.decode(&chips), 5);
//! ```

use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::ops::Range;

/// Largest supported code order; orders above this produce codewords too
/// long to be useful at chip rates this link can sustain.
pub const MAX_CODE_ORDER: u32 = 12;

/// Tag modulation alphabet.  Symbol x0 carries bit 0 and x1 carries bit 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modulation {
    /// x0 = -1, x1 = +1.
    Bpsk,
    /// x0 = 0 (tag silent), x1 = +1.
    Ook,
}

impl Modulation {
    /// Chip value transmitted for a code bit.
    pub fn chip(self, bit: u8) -> i8 {
        debug_assert!(bit <= 1, "code bits are 0 or 1");
        match (self, bit) {
            (Modulation::Bpsk, 0) => -1,
            (Modulation::Ook, 0) => 0,
            (_, _) => 1,
        }
    }

    /// The (x0, x1) alphabet as reals, for the closed-form analysis.
    pub fn symbols(self) -> (f64, f64) {
        match self {
            Modulation::Bpsk => (-1.0, 1.0),
            Modulation::Ook => (0.0, 1.0),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Modulation::Bpsk => "bpsk",
            Modulation::Ook => "ook",
        }
    }
}

/// Code family selector, as written in experiment configs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum CodeSpec {
    /// One bit per chip, no expansion.
    Uncoded,
    /// Orthogonal code of the given order.
    Hadamard { order: u32 },
    /// Same distance profile as Hadamard with one chip fewer.
    Simplex { order: u32 },
}

impl CodeSpec {
    pub fn build(self) -> Result<Code> {
        match self {
            CodeSpec::Uncoded => Ok(Code::uncoded()),
            CodeSpec::Hadamard { order } => Code::hadamard(order),
            CodeSpec::Simplex { order } => Code::simplex(order),
        }
    }

    pub fn label(self) -> String {
        match self {
            CodeSpec::Uncoded => "uncoded".into(),
            CodeSpec::Hadamard { order } => format!("hadamard{order}"),
            CodeSpec::Simplex { order } => format!("simplex{order}"),
        }
    }
}

/// A binary block code with a precomputed codebook.
///
/// Messages are indices below 2^k; bit j of the index selects generator
/// row j.  Decoding is minimum Hamming distance over the full codebook,
/// equivalent to picking the codeword whose chip pattern correlates best
/// with the hard symbol decisions.  Ties resolve to the lowest index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Code {
    spec: CodeSpec,
    /// k rows of n bits each.
    generator: Vec<Vec<u8>>,
    codebook: Vec<Vec<u8>>,
}

impl Code {
    pub fn uncoded() -> Code {
        Code::from_generator(CodeSpec::Uncoded, vec![vec![1]])
    }

    /// Order-r orthogonal code: (r+1) message bits spread over 2^(r+1)
    /// chips.  The generator columns enumerate every (r+1)-bit tuple, so
    /// all pairs of distinct codewords sit at Hamming distance exactly 2^r.
    pub fn hadamard(order: u32) -> Result<Code> {
        Ok(Code::from_generator(
            CodeSpec::Hadamard { order },
            hadamard_generator(order)?,
        ))
    }

    /// Order-r Simplex code: the orthogonal generator with its all-zero
    /// column removed, saving one chip with the same distance profile.
    pub fn simplex(order: u32) -> Result<Code> {
        let mut rows = hadamard_generator(order)?;
        let zero_col = (0..rows[0].len())
            .find(|&j| rows.iter().all(|row| row[j] == 0))
            .expect("orthogonal generator always has one all-zero column");
        for row in &mut rows {
            row.remove(zero_col);
        }
        Ok(Code::from_generator(CodeSpec::Simplex { order }, rows))
    }

    fn from_generator(spec: CodeSpec, generator: Vec<Vec<u8>>) -> Code {
        let k = generator.len();
        let n = generator[0].len();
        let mut codebook = Vec::with_capacity(1 << k);
        for msg in 0..(1u32 << k) {
            let mut word = vec![0u8; n];
            for (j, row) in generator.iter().enumerate() {
                if (msg >> j) & 1 == 1 {
                    for (w, g) in word.iter_mut().zip(row) {
                        *w ^= g;
                    }
                }
            }
            codebook.push(word);
        }
        Code {
            spec,
            generator,
            codebook,
        }
    }

    pub fn spec(&self) -> CodeSpec {
        self.spec
    }

    /// Message bits per codeword.
    pub fn k(&self) -> usize {
        self.generator.len()
    }

    /// Chips per codeword.
    pub fn n(&self) -> usize {
        self.generator[0].len()
    }

    pub fn message_count(&self) -> u32 {
        1 << self.k()
    }

    pub fn encode(&self, msg: u32) -> &[u8] {
        &self.codebook[msg as usize]
    }

    /// Nearest codeword to the hard per-chip decisions, as a message index.
    pub fn decode(&self, decisions: &[u8]) -> u32 {
        assert!(
            decisions.len() == self.n(),
            "expected {} chip decisions, got {}",
            self.n(),
            decisions.len()
        );
        let mut best = 0u32;
        let mut best_dist = usize::MAX;
        for (msg, word) in self.codebook.iter().enumerate() {
            let dist = word.iter().zip(decisions).filter(|(a, b)| a != b).count();
            if dist < best_dist {
                best_dist = dist;
                best = msg as u32;
            }
        }
        best
    }

    /// Chips for one encoded message under the given modulation.
    pub fn modulate(&self, msg: u32, modulation: Modulation) -> Vec<i8> {
        self.encode(msg)
            .iter()
            .map(|&b| modulation.chip(b))
            .collect()
    }
}

/// Generator of the order-r orthogonal code, built by the doubling
/// recursion: append the first-row complement of the previous generator and
/// a fresh bottom row that is 0 over the old columns and 1 over the new.
fn hadamard_generator(order: u32) -> Result<Vec<Vec<u8>>> {
    if order == 0 || order > MAX_CODE_ORDER {
        return Err(Error::Code(format!(
            "code order must be in 1..={MAX_CODE_ORDER}, got {order}"
        )));
    }
    let mut rows: Vec<Vec<u8>> = vec![vec![1, 0, 0, 1], vec![0, 1, 0, 1]];
    for _ in 2..=order {
        let half = rows[0].len();
        for (j, row) in rows.iter_mut().enumerate() {
            let mirrored: Vec<u8> = if j == 0 {
                row.iter().map(|b| b ^ 1).collect()
            } else {
                row.clone()
            };
            row.extend(mirrored);
        }
        let mut bottom = vec![0u8; half];
        bottom.extend(vec![1u8; half]);
        rows.push(bottom);
    }
    Ok(rows)
}

/// Slot layout of one frame: three preamble blocks of `preamble_len` chips
/// followed by the payload.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameLayout {
    pub preamble_len: usize,
    pub payload_chips: usize,
}

impl FrameLayout {
    pub fn new(preamble_len: usize, payload_chips: usize) -> FrameLayout {
        FrameLayout {
            preamble_len,
            payload_chips,
        }
    }

    pub fn total_len(&self) -> usize {
        3 * self.preamble_len + self.payload_chips
    }

    /// First block: tag silent, receiver learns the direct path.
    pub fn silent_block(&self) -> Range<usize> {
        0..self.preamble_len
    }

    /// Second block: tag repeats symbol x1.
    pub fn hi_block(&self) -> Range<usize> {
        self.preamble_len..2 * self.preamble_len
    }

    /// Third block: tag repeats symbol x0 (silent again under OOK).
    pub fn lo_block(&self) -> Range<usize> {
        2 * self.preamble_len..3 * self.preamble_len
    }

    pub fn payload(&self) -> Range<usize> {
        3 * self.preamble_len..self.total_len()
    }
}

/// The three preamble blocks as chip values.
pub fn preamble_chips(modulation: Modulation, block_len: usize) -> Vec<i8> {
    let mut chips = vec![0i8; block_len];
    chips.extend(std::iter::repeat_n(modulation.chip(1), block_len));
    chips.extend(std::iter::repeat_n(modulation.chip(0), block_len));
    chips
}

/// Complete frame for a run of messages: preamble then modulated codewords.
pub fn frame_chips(
    code: &Code,
    modulation: Modulation,
    block_len: usize,
    messages: &[u32],
) -> Vec<i8> {
    let mut chips = preamble_chips(modulation, block_len);
    for &msg in messages {
        chips.extend(code.modulate(msg, modulation));
    }
    chips
}
