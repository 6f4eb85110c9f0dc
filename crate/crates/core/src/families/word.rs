//! Signed letters and words over a finite generating set.

use std::fmt;

/// A generator or its inverse. Ordered `a < a^-1 < b < b^-1 < ...`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub gen: u8,
    pub inv: bool,
}

impl Letter {
    pub const fn pos(gen: u8) -> Self {
        Letter { gen, inv: false }
    }

    pub const fn neg(gen: u8) -> Self {
        Letter { gen, inv: true }
    }

    pub fn inverse(self) -> Self {
        Letter {
            gen: self.gen,
            inv: !self.inv,
        }
    }
}

/// A word in canonical form. Equality of `Word`s is equality of group elements
/// only when both were produced by the owning family's normal form.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(pub Vec<Letter>);

impl Word {
    pub fn identity() -> Self {
        Word(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }
}

/// Formats letters as `a b a^-1`, or `e` for the empty word.
pub struct WordDisplay<'a> {
    pub letters: &'a [Letter],
    pub names: &'a [String],
}

impl fmt::Display for WordDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "e");
        }
        for (i, l) in self.letters.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{}", self.names[l.gen as usize])?;
            if l.inv {
                write!(f, "^-1")?;
            }
        }
        Ok(())
    }
}

/// Parses `a b^-1 c^3` against the generator names. `e` and the empty string
/// denote the identity.
pub fn parse_letters(text: &str, names: &[String]) -> Result<Vec<Letter>, String> {
    let mut out = Vec::new();
    for token in text.split_whitespace() {
        if token == "e" {
            continue;
        }
        let (name, exp) = match token.split_once('^') {
            Some((n, e)) => (n, e.parse::<i64>().map_err(|_| format!("bad exponent in `{token}`"))?),
            None => (token, 1),
        };
        let gen = names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| format!("unknown letter `{name}`"))?;
        let letter = Letter {
            gen: gen as u8,
            inv: exp < 0,
        };
        for _ in 0..exp.unsigned_abs() {
            out.push(letter);
        }
    }
    Ok(out)
}
