//! Formal bracket expressions over the drift `f` and controls `b_a`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SoaringError};

/// Expression tree. Controls are numbered from 1; written `b` when the
/// system has one input and `b1, b2, …` otherwise.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum FormalBracket {
    Drift,
    Control(usize),
    Bracket(Box<FormalBracket>, Box<FormalBracket>),
}

impl FormalBracket {
    pub fn bracket(a: FormalBracket, b: FormalBracket) -> Self {
        Self::Bracket(Box::new(a), Box::new(b))
    }

    /// `ad_f^k b_a = [f, ad_f^{k-1} b_a]`, with `ad_f^0 b_a = b_a`.
    pub fn ad(k: usize, control: usize) -> Self {
        (0..k).fold(Self::Control(control), |acc, _| Self::bracket(Self::Drift, acc))
    }

    /// Number of leaves on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        match self {
            Self::Drift | Self::Control(_) => 1,
            Self::Bracket(a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    /// Occurrences of `f`.
    pub fn drift_count(&self) -> usize {
        match self {
            Self::Drift => 1,
            Self::Control(_) => 0,
            Self::Bracket(a, b) => a.drift_count() + b.drift_count(),
        }
    }

    /// Occurrences of `b_a`.
    pub fn control_count(&self, a: usize) -> usize {
        match self {
            Self::Drift => 0,
            Self::Control(i) => usize::from(*i == a),
            Self::Bracket(x, y) => x.control_count(a) + y.control_count(a),
        }
    }

    pub fn max_control(&self) -> usize {
        match self {
            Self::Drift => 0,
            Self::Control(i) => *i,
            Self::Bracket(a, b) => a.max_control().max(b.max_control()),
        }
    }

    /// `Σ_i w_i·|B|_i` with `w[0]` the drift weight and `w[a]` the weight of
    /// control `a`.
    pub fn weight(&self, w: &[u64]) -> Result<u64> {
        let m = self.max_control();
        if w.len() <= m {
            return Err(SoaringError::Dimension {
                expected: m + 1,
                got: w.len(),
            });
        }
        let mut total = w[0] * self.drift_count() as u64;
        for (a, wa) in w.iter().enumerate().skip(1) {
            total += wa * self.control_count(a) as u64;
        }
        Ok(total)
    }

    /// Odd number of drifts and an even number of every control, with the
    /// bare drift itself excluded.
    pub fn is_bad(&self, inputs: usize) -> bool {
        if matches!(self, Self::Drift) {
            return false;
        }
        self.drift_count() % 2 == 1 && (1..=inputs).all(|a| self.control_count(a).is_multiple_of(2))
    }

    /// Text form with controls written for a system with `inputs` controls.
    pub fn label(&self, inputs: usize) -> String {
        match self {
            Self::Drift => "f".into(),
            Self::Control(i) if inputs == 1 && *i == 1 => "b".into(),
            Self::Control(i) => format!("b{i}"),
            Self::Bracket(a, b) => format!("[{},{}]", a.label(inputs), b.label(inputs)),
        }
    }
}

impl fmt::Display for FormalBracket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Drift => write!(f, "f"),
            Self::Control(i) => write!(f, "b{i}"),
            Self::Bracket(a, b) => write!(f, "[{a},{b}]"),
        }
    }
}

struct Parser<'a> {
    input: &'a str,
    chars: Vec<char>,
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, reason: impl Into<String>) -> SoaringError {
        SoaringError::BracketParse {
            input: self.input.to_string(),
            reason: reason.into(),
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn expect(&mut self, c: char) -> Result<()> {
        match self.peek() {
            Some(got) if got == c => {
                self.pos += 1;
                Ok(())
            }
            Some(got) => Err(self.err(format!("expected `{c}` at {}, found `{got}`", self.pos))),
            None => Err(self.err(format!("expected `{c}`, found end of input"))),
        }
    }

    fn expr(&mut self) -> Result<FormalBracket> {
        match self.peek() {
            Some('[') => {
                self.pos += 1;
                let a = self.expr()?;
                self.expect(',')?;
                let b = self.expr()?;
                self.expect(']')?;
                Ok(FormalBracket::bracket(a, b))
            }
            Some('f') => {
                self.pos += 1;
                Ok(FormalBracket::Drift)
            }
            Some('b') => {
                self.pos += 1;
                let start = self.pos;
                while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                    self.pos += 1;
                }
                if start == self.pos {
                    return Ok(FormalBracket::Control(1));
                }
                let digits: String = self.chars[start..self.pos].iter().collect();
                let i: usize = digits.parse().map_err(|_| self.err("control index too large"))?;
                if i == 0 {
                    return Err(self.err("controls are numbered from 1"));
                }
                Ok(FormalBracket::Control(i))
            }
            Some(c) => Err(self.err(format!("unexpected `{c}` at {}", self.pos))),
            None => Err(self.err("unexpected end of input")),
        }
    }
}

impl FromStr for FormalBracket {
    type Err = SoaringError;

    fn from_str(s: &str) -> Result<Self> {
        let mut p = Parser {
            input: s,
            chars: s.chars().filter(|c| !c.is_whitespace()).collect(),
            pos: 0,
        };
        let e = p.expr()?;
        if p.pos != p.chars.len() {
            return Err(p.err(format!("trailing input at {}", p.pos)));
        }
        Ok(e)
    }
}

impl TryFrom<String> for FormalBracket {
    type Error = SoaringError;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<FormalBracket> for String {
    fn from(b: FormalBracket) -> String {
        b.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(s: &str) -> FormalBracket {
        s.parse().unwrap()
    }

    #[test]
    fn parse_and_print() {
        let e = p("[f, [f,b]]");
        assert_eq!(e, FormalBracket::ad(2, 1));
        assert_eq!(e.label(1), "[f,[f,b]]");
        assert_eq!(e.to_string(), "[f,[f,b1]]");
        assert_eq!(p("[b1,b2]").label(2), "[b1,b2]");
        assert_eq!(p("f"), FormalBracket::Drift);
    }

    #[test]
    fn parse_errors() {
        for bad in ["", "[f,b", "[f b]", "g", "[f,b]]", "b0", "[,]"] {
            assert!(
                matches!(bad.parse::<FormalBracket>(), Err(SoaringError::BracketParse { .. })),
                "{bad}"
            );
        }
    }

    #[test]
    fn counts_and_depth() {
        let e = p("[b,[f,b]]");
        assert_eq!(e.drift_count(), 1);
        assert_eq!(e.control_count(1), 2);
        assert_eq!(e.depth(), 3);
        assert_eq!(FormalBracket::ad(5, 1).depth(), 6);
        assert_eq!(FormalBracket::ad(0, 2), FormalBracket::Control(2));
    }

    #[test]
    fn bad_brackets() {
        assert!(p("[b,[f,b]]").is_bad(1));
        assert!(p("[[f,b],b]").is_bad(1));
        assert!(!p("[f,b]").is_bad(1));
        assert!(!p("f").is_bad(1));
        assert!(!p("[f,[f,b]]").is_bad(1));
        // one of each control is odd
        assert!(!p("[b1,[f,b2]]").is_bad(2));
    }

    #[test]
    fn weights() {
        let w = [1, 5];
        assert_eq!(p("[b,[f,b]]").weight(&w).unwrap(), 11);
        assert_eq!(FormalBracket::ad(4, 1).weight(&w).unwrap(), 9);
        assert!(p("[b1,b2]").weight(&[1, 1]).is_err());
    }

    #[test]
    fn serde_as_string() {
        let e = p("[f,[f,b]]");
        let json = serde_json::to_string(&e).unwrap();
        assert_eq!(json, "\"[f,[f,b1]]\"");
        let back: FormalBracket = serde_json::from_str(&json).unwrap();
        assert_eq!(back, e);
    }

    fn arb_bracket() -> impl Strategy<Value = FormalBracket> {
        let leaf = prop_oneof![Just(FormalBracket::Drift), (1usize..4).prop_map(FormalBracket::Control)];
        leaf.prop_recursive(5, 32, 2, |inner| {
            (inner.clone(), inner).prop_map(|(a, b)| FormalBracket::bracket(a, b))
        })
    }

    proptest! {
        #[test]
        fn display_round_trips(e in arb_bracket()) {
            prop_assert_eq!(e.to_string().parse::<FormalBracket>().unwrap(), e);
        }

        #[test]
        fn weight_is_linear_in_counts(e in arb_bracket(), w0 in 1u64..9, w1 in 1u64..9) {
            let w = [w0, w1, w1, w1];
            let leaves = e.control_count(1) + e.control_count(2) + e.control_count(3);
            prop_assert_eq!(e.weight(&w).unwrap(), w0 * e.drift_count() as u64 + w1 * leaves as u64);
        }
    }
}
