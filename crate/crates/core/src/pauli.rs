//! Pauli words over `n` qubits.
//!
//! A word is stored as a pair of bit masks: bit `q` of `x` is set when the
//! factor on qubit `q` is X or Y, bit `q` of `z` when it is Z or Y. The
//! leftmost character of the textual form acts on qubit `n - 1`, the
//! rightmost on qubit 0.

use alloc::string::{String, ToString};
use core::cmp::Ordering;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest register a [`PauliString`] can describe.
pub const MAX_QUBITS: usize = 64;

/// Single-qubit Pauli factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }
}

/// Tensor product of single-qubit Paulis, e.g. `IZXX`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliString {
    n_qubits: u8,
    x: u64,
    z: u64,
}

impl PauliString {
    /// Parses `text` as a word over exactly `n_qubits` qubits.
    pub fn parse(text: &str, n_qubits: usize) -> Result<Self> {
        let found = text.chars().count();
        if found != n_qubits {
            return Err(Error::WrongLength {
                word: text.to_string(),
                expected: n_qubits,
                found,
            });
        }
        Self::parse_any(text)
    }

    /// Parses a word and takes its qubit count from the text length.
    pub fn parse_any(text: &str) -> Result<Self> {
        let n = text.chars().count();
        if n == 0 {
            return Err(Error::WrongLength {
                word: String::new(),
                expected: 1,
                found: 0,
            });
        }
        if n > MAX_QUBITS {
            return Err(Error::TooManyQubits { max: MAX_QUBITS });
        }
        let mut x = 0u64;
        let mut z = 0u64;
        for (index, ch) in text.chars().enumerate() {
            let p = Pauli::from_char(ch).ok_or_else(|| Error::IllegalCharacter {
                word: text.to_string(),
                ch,
                index,
            })?;
            let bit = 1u64 << (n - 1 - index);
            match p {
                Pauli::I => {}
                Pauli::X => x |= bit,
                Pauli::Y => {
                    x |= bit;
                    z |= bit
                }
                Pauli::Z => z |= bit,
            }
        }
        Ok(PauliString {
            n_qubits: n as u8,
            x,
            z,
        })
    }

    pub fn identity(n_qubits: usize) -> Self {
        assert!(n_qubits >= 1 && n_qubits <= MAX_QUBITS);
        PauliString {
            n_qubits: n_qubits as u8,
            x: 0,
            z: 0,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits as usize
    }

    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn z_mask(&self) -> u64 {
        self.z
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    pub fn y_count(&self) -> u32 {
        (self.x & self.z).count_ones()
    }

    /// Factor acting on qubit `q` (qubit 0 is the rightmost character).
    pub fn on_qubit(&self, q: usize) -> Pauli {
        Pauli::from_bits(self.x >> q & 1 == 1, self.z >> q & 1 == 1)
    }

    /// Applies a qubit relabelling: the factor on qubit `q` moves to `perm[q]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.n_qubits());
        let mut x = 0u64;
        let mut z = 0u64;
        for (q, &target) in perm.iter().enumerate() {
            x |= (self.x >> q & 1) << target;
            z |= (self.z >> q & 1) << target;
        }
        PauliString {
            n_qubits: self.n_qubits,
            x,
            z,
        }
    }
}

impl Ord for PauliString {
    // Lexicographic on the textual word with I < X < Y < Z.
    fn cmp(&self, other: &Self) -> Ordering {
        self.n_qubits.cmp(&other.n_qubits).then_with(|| {
            for q in (0..self.n_qubits()).rev() {
                let ord = self.on_qubit(q).cmp(&other.on_qubit(q));
                if ord != Ordering::Equal {
                    return ord;
                }
            }
            Ordering::Equal
        })
    }
}

impl PartialOrd for PauliString {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in (0..self.n_qubits()).rev() {
            fmt::Write::write_char(f, self.on_qubit(q).as_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse_any(s)
    }
}

impl Serialize for PauliString {
    fn serialize<S: Serializer>(&self, serializer: S) -> core::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> core::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        PauliString::parse_any(&s).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;

    #[test]
    fn parses_table_columns() {
        let xx = PauliString::parse("XX", 2).unwrap();
        assert_eq!(xx.n_qubits(), 2);
        assert_eq!(xx.x_mask(), 0b11);
        assert_eq!(xx.z_mask(), 0);
        assert_eq!(format!("{xx}"), "XX");
    }

    #[test]
    fn identity_word() {
        let p = PauliString::parse("IIIIII", 6).unwrap();
        assert!(p.is_identity());
        assert_eq!(p, PauliString::identity(6));
    }

    #[test]
    fn leftmost_character_is_highest_qubit() {
        let p = PauliString::parse("IZ", 2).unwrap();
        assert_eq!(p.on_qubit(0), Pauli::Z);
        assert_eq!(p.on_qubit(1), Pauli::I);
        let y = PauliString::parse("YIX", 3).unwrap();
        assert_eq!(y.on_qubit(2), Pauli::Y);
        assert_eq!(y.on_qubit(0), Pauli::X);
        assert_eq!(y.y_count(), 1);
    }

    #[test]
    fn illegal_character_reports_position() {
        let err = PauliString::parse("AZ", 2).unwrap_err();
        assert_eq!(
            err,
            Error::IllegalCharacter {
                word: "AZ".into(),
                ch: 'A',
                index: 0
            }
        );
        let err = PauliString::parse("XZq", 3).unwrap_err();
        assert!(matches!(err, Error::IllegalCharacter { index: 2, .. }));
    }

    #[test]
    fn wrong_length() {
        let err = PauliString::parse("XXX", 2).unwrap_err();
        assert!(matches!(
            err,
            Error::WrongLength {
                expected: 2,
                found: 3,
                ..
            }
        ));
        assert!(PauliString::parse("", 0).is_err());
    }

    #[test]
    fn ordering_follows_text() {
        let mut words: alloc::vec::Vec<PauliString> = ["ZI", "XX", "II", "IZ", "YI"]
            .iter()
            .map(|w| w.parse().unwrap())
            .collect();
        words.sort();
        let text: alloc::vec::Vec<_> = words.iter().map(|w| format!("{w}")).collect();
        assert_eq!(text, ["II", "IZ", "XX", "YI", "ZI"]);
    }

    #[test]
    fn permutation_moves_factors() {
        let p: PauliString = "XYZ".parse().unwrap();
        // reverse the register
        let r = p.permuted(&[2, 1, 0]);
        assert_eq!(format!("{r}"), "ZYX");
    }
}
