//! Line-oriented debug format: `src dst in out cost` per arc and
//! `state cost` per final state. The start state is listed first.

use std::fmt::{self, Write as _};
use std::sync::Arc;

use super::{Cost, Label, StateId, SymbolTable, Transition, Wfst};
use crate::error::{Error, Result};

impl Wfst {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let name = |l: Label| self.symbols().name(l).unwrap_or_else(|| format!("#{l}"));
        let order = std::iter::once(self.start())
            .chain((0..self.num_states()).filter(|&s| s != self.start()));
        for s in order {
            for a in self.arcs(s) {
                let _ = writeln!(
                    out,
                    "{} {} {} {} {}",
                    s,
                    a.next,
                    name(a.ilabel),
                    name(a.olabel),
                    a.cost
                );
            }
            if let Some(c) = self.final_cost(s) {
                let _ = writeln!(out, "{s} {c}");
            }
        }
        out
    }

    /// Parses the debug format, interning unseen symbols into `symbols`.
    pub fn from_text(text: &str, symbols: Arc<SymbolTable>, source: &str) -> Result<Wfst> {
        enum Line {
            Arc(StateId, StateId, Label, Label, Cost),
            Final(StateId, Cost),
        }
        let mut lines = Vec::new();
        let mut max_state = 0;
        for (i, raw) in text.lines().enumerate() {
            let lineno = i + 1;
            let fields: Vec<&str> = raw.split_whitespace().collect();
            let state = |s: &str| {
                s.parse::<StateId>()
                    .map_err(|_| Error::parse(source, lineno, format!("bad state id `{s}`")))
            };
            let cost = |s: &str| {
                s.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .map(Cost::new)
                    .ok_or_else(|| Error::parse(source, lineno, format!("bad cost `{s}`")))
            };
            let line = match fields.as_slice() {
                [] => continue,
                [s, c] => Line::Final(state(s)?, cost(c)?),
                [s, d, i, o, c] => Line::Arc(
                    state(s)?,
                    state(d)?,
                    symbols.intern(i),
                    symbols.intern(o),
                    cost(c)?,
                ),
                _ => {
                    return Err(Error::parse(
                        source,
                        lineno,
                        "expected `src dst in out cost` or `state cost`",
                    ))
                }
            };
            max_state = match line {
                Line::Arc(s, d, ..) => max_state.max(s).max(d),
                Line::Final(s, _) => max_state.max(s),
            };
            lines.push(line);
        }
        let mut m = Wfst::new(symbols);
        for _ in 0..max_state {
            m.add_state();
        }
        if let Some(first) = lines.first() {
            m.set_start(match first {
                Line::Arc(s, ..) | Line::Final(s, _) => *s,
            });
        }
        for line in lines {
            match line {
                Line::Arc(s, d, i, o, c) => m.add_arc(s, Transition::new(i, o, c, d)),
                Line::Final(s, c) => m.set_final(s, c),
            }
        }
        Ok(m)
    }
}

impl fmt::Display for Wfst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}
