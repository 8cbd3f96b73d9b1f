//! Classical ground truth for the pairwise AND `f(x) = XOR_{i<j} x_i x_j`.

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::{invalid, Error, Result};

/// Largest `n` accepted by [`truth_table`].
pub const MAX_TABLE_BITS: usize = 20;

/// Bits `x_1 .. x_n`, client 1 first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitVector(Vec<bool>);

impl BitVector {
    pub fn new(bits: Vec<bool>) -> Self {
        BitVector(bits)
    }

    /// Vector of length `n` whose string form is the binary expansion of
    /// `index`, so `x_1` is the most significant bit.
    pub fn from_index(index: u64, n: usize) -> Self {
        BitVector((0..n).map(|i| (index >> (n - 1 - i)) & 1 == 1).collect())
    }

    pub fn index(&self) -> u64 {
        self.0.iter().fold(0, |acc, &b| (acc << 1) | b as u64)
    }

    /// All `2^n` vectors in index order.
    pub fn all(n: usize) -> impl Iterator<Item = BitVector> {
        (0..1u64 << n).map(move |i| BitVector::from_index(i, n))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn get(&self, i: usize) -> bool {
        self.0[i]
    }

    pub fn weight(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    pub fn parity(&self) -> bool {
        self.0.iter().fold(false, |acc, &b| acc ^ b)
    }

    pub fn xor(&self, other: &BitVector) -> BitVector {
        BitVector(self.0.iter().zip(&other.0).map(|(a, b)| a ^ b).collect())
    }
}

impl From<Vec<bool>> for BitVector {
    fn from(bits: Vec<bool>) -> Self {
        BitVector(bits)
    }
}

impl FromStr for BitVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.is_empty() {
            return Err(invalid("empty bit string"));
        }
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(invalid(format!("'{other}' is not a bit in \"{s}\""))),
            })
            .collect::<Result<Vec<_>>>()
            .map(BitVector)
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Serialised as a JSON array of 0/1 integers.
impl Serialize for BitVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.0.iter().map(|&b| b as u8))
    }
}

fn non_empty(x: &BitVector) -> Result<()> {
    if x.is_empty() {
        return Err(invalid("input vector must have at least one bit"));
    }
    Ok(())
}

/// `XOR_{1 <= i < j <= n} x_i x_j`.
pub fn pairwise_and(x: &BitVector) -> Result<bool> {
    non_empty(x)?;
    let bits = x.bits();
    let mut acc = false;
    for j in 0..bits.len() {
        for i in 0..j {
            acc ^= bits[i] & bits[j];
        }
    }
    Ok(acc)
}

/// `XOR_{j=1}^{n-1} x_{j+1} (x_1 ^ ... ^ x_j)`.
pub fn prefix_form(x: &BitVector) -> Result<bool> {
    non_empty(x)?;
    let bits = x.bits();
    let mut prefix = bits[0];
    let mut acc = false;
    for &next in &bits[1..] {
        acc ^= next & prefix;
        prefix ^= next;
    }
    Ok(acc)
}

/// `f` for every input of length `n`, indexed by [`BitVector::index`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruthTable {
    n: usize,
    values: Vec<bool>,
}

impl TruthTable {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, x: &BitVector) -> Option<bool> {
        (x.len() == self.n).then(|| self.values[x.index() as usize])
    }

    pub fn iter(&self) -> impl Iterator<Item = (BitVector, bool)> + '_ {
        self.values.iter().enumerate().map(|(i, &v)| (BitVector::from_index(i as u64, self.n), v))
    }

    pub fn count_ones(&self) -> usize {
        self.values.iter().filter(|&&v| v).count()
    }
}

/// Full truth table for `1 <= n <= 20`, each entry cross-checked between
/// the two evaluation forms.
pub fn truth_table(n: usize) -> Result<TruthTable> {
    if !(1..=MAX_TABLE_BITS).contains(&n) {
        return Err(invalid(format!("truth table size n = {n} outside 1..={MAX_TABLE_BITS}")));
    }
    let values = BitVector::all(n)
        .map(|x| {
            let v = pairwise_and(&x)?;
            assert_eq!(v, prefix_form(&x)?, "oracle forms disagree on {x}");
            Ok(v)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TruthTable { n, values })
}
