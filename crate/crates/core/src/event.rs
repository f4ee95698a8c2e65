//! Boolean combinations of "word `w` starts at relative offset `o`".
//!
//! The shift acts on the left: `(Tx)_n = x_{n+1}`, so `T^m` carries an atom at
//! offset `o` to offset `o - m`. [`Event::shift`] implements `T^m`.
//!
//! Text syntax (used by the CLI and by `Display`):
//!
//! ```text
//! expr  := and ('|' and)*
//! and   := unary ('&' unary)*
//! unary := '!' unary | '(' expr ')' | WORD ['@' INT] | 'union' '(' INT ',' INT ',' expr ')'
//! ```
//!
//! `union(s, c, e)` is `e | T^s e | ... | T^((c-1)s) e`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::words::Word;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Event {
    Atom {
        offset: i64,
        word: Word,
    },
    And(Vec<Event>),
    Or(Vec<Event>),
    Not(Box<Event>),
    /// `OR_{0 <= i < count} T^(step*i)(event)`; `count >= 1`.
    ShiftUnion {
        event: Box<Event>,
        step: i64,
        count: u64,
    },
}

impl Event {
    pub fn atom(offset: i64, word: Word) -> Event {
        Event::Atom { offset, word }
    }

    pub fn and(parts: Vec<Event>) -> Event {
        Event::And(parts)
    }

    pub fn or(parts: Vec<Event>) -> Event {
        Event::Or(parts)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(e: Event) -> Event {
        Event::Not(Box::new(e))
    }

    pub fn shift_union(event: Event, step: i64, count: u64) -> Event {
        assert!(count >= 1, "shift union needs at least one term");
        Event::ShiftUnion {
            event: Box::new(event),
            step,
            count,
        }
    }

    /// `(e1 & !e2) | (e2 & !e1)`.
    pub fn sym_diff(e1: Event, e2: Event) -> Event {
        Event::or(vec![
            Event::and(vec![e1.clone(), Event::not(e2.clone())]),
            Event::and(vec![e2, Event::not(e1)]),
        ])
    }

    /// `T^m` of this event.
    pub fn shift(&self, m: i64) -> Event {
        match self {
            Event::Atom { offset, word } => Event::Atom {
                offset: offset - m,
                word: word.clone(),
            },
            Event::And(v) => Event::And(v.iter().map(|e| e.shift(m)).collect()),
            Event::Or(v) => Event::Or(v.iter().map(|e| e.shift(m)).collect()),
            Event::Not(e) => Event::Not(Box::new(e.shift(m))),
            Event::ShiftUnion { event, step, count } => Event::ShiftUnion {
                event: Box::new(event.shift(m)),
                step: *step,
                count: *count,
            },
        }
    }

    /// `[min offset, max offset + word length)` over every atom the event can read.
    pub fn offset_range(&self) -> Option<(i64, i64)> {
        match self {
            Event::Atom { offset, word } => Some((*offset, offset + word.len() as i64)),
            Event::And(v) | Event::Or(v) => v
                .iter()
                .filter_map(Event::offset_range)
                .reduce(|(a, b), (c, d)| (a.min(c), b.max(d))),
            Event::Not(e) => e.offset_range(),
            Event::ShiftUnion { event, step, count } => {
                let (lo, hi) = event.offset_range()?;
                let reach = step * (*count as i64 - 1);
                Some((lo - reach.max(0), hi - reach.min(0)))
            }
        }
    }

    pub fn span(&self) -> Result<u64> {
        let (lo, hi) = self.offset_range().ok_or(Error::EmptyEvent)?;
        Ok((hi - lo) as u64)
    }

    /// Replaces every shift union by the explicit disjunction it stands for.
    pub fn expand(&self) -> Event {
        match self {
            Event::Atom { .. } => self.clone(),
            Event::And(v) => Event::And(v.iter().map(Event::expand).collect()),
            Event::Or(v) => Event::Or(v.iter().map(Event::expand).collect()),
            Event::Not(e) => Event::Not(Box::new(e.expand())),
            Event::ShiftUnion { event, step, count } => {
                let inner = event.expand();
                Event::Or((0..*count as i64).map(|i| inner.shift(step * i)).collect())
            }
        }
    }

    pub fn atom_count(&self) -> u64 {
        match self {
            Event::Atom { .. } => 1,
            Event::And(v) | Event::Or(v) => v.iter().map(Event::atom_count).sum(),
            Event::Not(e) => e.atom_count(),
            Event::ShiftUnion { event, count, .. } => event.atom_count() * count,
        }
    }

    /// Direct evaluation at anchor `p`, with `read(i)` giving the symbol at `i`.
    pub fn holds_at(&self, read: &impl Fn(i64) -> u8, p: i64) -> bool {
        match self {
            Event::Atom { offset, word } => word
                .symbols()
                .iter()
                .enumerate()
                .all(|(j, &s)| read(p + offset + j as i64) == s),
            Event::And(v) => v.iter().all(|e| e.holds_at(read, p)),
            Event::Or(v) => v.iter().any(|e| e.holds_at(read, p)),
            Event::Not(e) => !e.holds_at(read, p),
            Event::ShiftUnion { event, step, count } => {
                (0..*count as i64).any(|i| event.holds_at(read, p - step * i))
            }
        }
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Event::Atom { offset, word } => write!(f, "{word}@{offset}"),
            Event::And(v) | Event::Or(v) => {
                let sep = if matches!(self, Event::And(_)) {
                    " & "
                } else {
                    " | "
                };
                if v.is_empty() {
                    // An empty conjunction is true, an empty disjunction false.
                    return f.write_str(if matches!(self, Event::And(_)) {
                        "(0@0 | !0@0)"
                    } else {
                        "(0@0 & !0@0)"
                    });
                }
                f.write_str("(")?;
                for (i, e) in v.iter().enumerate() {
                    if i > 0 {
                        f.write_str(sep)?;
                    }
                    write!(f, "{e}")?;
                }
                f.write_str(")")
            }
            Event::Not(e) => write!(f, "!{e}"),
            Event::ShiftUnion { event, step, count } => {
                write!(f, "union({step}, {count}, {event})")
            }
        }
    }
}

impl FromStr for Event {
    type Err = Error;

    fn from_str(s: &str) -> Result<Event> {
        let mut p = Parser {
            src: s.as_bytes(),
            pos: 0,
        };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.error("trailing input"));
        }
        Ok(e)
    }
}

struct Parser<'s> {
    src: &'s [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, what: &str) -> Error {
        Error::EventSyntax(format!("{what} at byte {}", self.pos))
    }

    fn skip_ws(&mut self) {
        while self.src.get(self.pos).is_some_and(u8::is_ascii_whitespace) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(&format!("expected '{}'", c as char)))
        }
    }

    fn expr(&mut self) -> Result<Event> {
        let mut parts = vec![self.conj()?];
        while self.peek() == Some(b'|') {
            self.pos += 1;
            parts.push(self.conj()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Event::Or(parts)
        })
    }

    fn conj(&mut self) -> Result<Event> {
        let mut parts = vec![self.unary()?];
        while self.peek() == Some(b'&') {
            self.pos += 1;
            parts.push(self.unary()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Event::And(parts)
        })
    }

    fn unary(&mut self) -> Result<Event> {
        match self.peek() {
            Some(b'!') => {
                self.pos += 1;
                Ok(Event::not(self.unary()?))
            }
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(b'0' | b'1') => self.atom(),
            Some(b'u') => self.union(),
            _ => Err(self.error("expected an atom, '!', '(' or 'union'")),
        }
    }

    fn atom(&mut self) -> Result<Event> {
        let start = self.pos;
        while matches!(self.src.get(self.pos), Some(b'0' | b'1')) {
            self.pos += 1;
        }
        let word: Word = std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .parse()?;
        let offset = if self.peek() == Some(b'@') {
            self.pos += 1;
            self.int()?
        } else {
            0
        };
        Ok(Event::atom(offset, word))
    }

    fn union(&mut self) -> Result<Event> {
        if !self.src[self.pos..].starts_with(b"union") {
            return Err(self.error("expected 'union'"));
        }
        self.pos += 5;
        self.expect(b'(')?;
        let step = self.int()?;
        self.expect(b',')?;
        let count = self.int()?;
        if count < 1 {
            return Err(self.error("union count must be positive"));
        }
        self.expect(b',')?;
        let e = self.expr()?;
        self.expect(b')')?;
        Ok(Event::shift_union(e, step, count as u64))
    }

    fn int(&mut self) -> Result<i64> {
        self.skip_ws();
        let start = self.pos;
        if matches!(self.src.get(self.pos), Some(b'-' | b'+')) {
            self.pos += 1;
        }
        while self.src.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| self.error("expected an integer"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    #[test]
    fn shift_moves_offsets_left() {
        let e = Event::atom(0, w("01"));
        assert_eq!(e.shift(0), e);
        assert_eq!(e.shift(3), Event::atom(-3, w("01")));
        assert_eq!(e.shift(5).shift(-5), e);
    }

    #[test]
    fn span_of_composites() {
        let e = Event::and(vec![
            Event::atom(-3, w("0101010")),
            Event::not(Event::atom(10, w("1"))),
        ]);
        assert_eq!(e.offset_range(), Some((-3, 11)));
        assert_eq!(e.span().unwrap(), 14);
        assert_eq!(Event::And(vec![]).span(), Err(Error::EmptyEvent));
        let u = Event::shift_union(Event::atom(0, w("010")), 2, 4);
        assert_eq!(u.offset_range(), Some((-6, 3)));
        let u = Event::shift_union(Event::atom(0, w("010")), -2, 4);
        assert_eq!(u.offset_range(), Some((0, 9)));
        assert_eq!(u.expand().offset_range(), u.offset_range());
    }

    #[test]
    fn parse_examples() {
        let e: Event = "010@-3 & !(1@2 | 00)".parse().unwrap();
        assert_eq!(
            e,
            Event::and(vec![
                Event::atom(-3, w("010")),
                Event::not(Event::or(vec![
                    Event::atom(2, w("1")),
                    Event::atom(0, w("00"))
                ])),
            ])
        );
        let u: Event = "union(3, 5, 01@0 & 1@4)".parse().unwrap();
        assert!(matches!(
            u,
            Event::ShiftUnion {
                step: 3,
                count: 5,
                ..
            }
        ));
        assert!("010@".parse::<Event>().is_err());
        assert!("012".parse::<Event>().is_err());
        assert!("union(1, 0, 0)".parse::<Event>().is_err());
        assert!("0 0".parse::<Event>().is_err());
    }

    fn arb_event() -> impl Strategy<Value = Event> {
        let leaf = (-20i64..20, proptest::collection::vec(0u8..2, 1..5))
            .prop_map(|(o, s)| Event::atom(o, Word::new(s).unwrap()));
        leaf.prop_recursive(4, 24, 4, |inner| {
            prop_oneof![
                proptest::collection::vec(inner.clone(), 1..4).prop_map(Event::And),
                proptest::collection::vec(inner.clone(), 1..4).prop_map(Event::Or),
                inner.clone().prop_map(Event::not),
                (inner, -4i64..5, 1u64..4).prop_map(|(e, s, c)| Event::shift_union(e, s, c)),
            ]
        })
    }

    proptest! {
        #[test]
        fn display_parses_back(e in arb_event()) {
            let text = e.to_string();
            let back: Event = text.parse().unwrap();
            // Singleton conjunctions print without a wrapper, so compare behavior.
            let seq: Vec<u8> = (0..97u64).map(|i| ((i * i + 3 * i) % 7 % 2) as u8).collect();
            let read = |i: i64| seq[i.rem_euclid(97) as usize];
            for p in 0..40 {
                prop_assert_eq!(e.holds_at(&read, p), back.holds_at(&read, p));
            }
            let again: Event = back.to_string().parse().unwrap();
            prop_assert_eq!(again, back);
        }

        #[test]
        fn expand_preserves_truth(e in arb_event(), m in -10i64..10) {
            let seq: Vec<u8> = (0..61u64).map(|i| ((i * 7 + i / 3) % 3 % 2) as u8).collect();
            let read = |i: i64| seq[i.rem_euclid(61) as usize];
            let x = e.expand();
            for p in -5..30 {
                prop_assert_eq!(e.holds_at(&read, p), x.holds_at(&read, p));
                // T^m e holds at p exactly when e holds at p - m.
                prop_assert_eq!(e.shift(m).holds_at(&read, p), e.holds_at(&read, p - m));
            }
        }
    }
}
