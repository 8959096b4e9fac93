//! Binary cache of an assembled [`SegmentationModel`].
//!
//! Layout: the magic `WSEG1`, then little-endian fields. Strings are a
//! `u32` byte length followed by UTF-8. Costs are `f64` bits, so a model
//! read back is identical to the one written.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::lexicon::{LexEntry, Lexicon, LexiconConfig};
use crate::segmenter::{ModelConfig, SegmentationModel};
use crate::wfst::{Cost, SymbolTable, Transition, Wfst};

pub const MAGIC: &[u8; 5] = b"WSEG1";

pub fn encode(model: &SegmentationModel) -> Vec<u8> {
    let mut w = Writer(MAGIC.to_vec());
    let c = model.config();
    w.u8(u8::from(c.morphology) | u8::from(c.names) << 1 | u8::from(c.translit) << 2);

    let lex = model.lexicon();
    w.f64(lex.config().large_cost.value());
    w.f64(lex.config().fallback_cost.value());
    w.u32(lex.entries().len() as u32);
    for e in lex.entries() {
        w.str(&e.surface);
        w.str(&e.pronunciation.join(" "));
        w.str(&e.category);
        w.f64(e.cost.value());
        w.u8(u8::from(e.likeliest));
    }
    w.u32(lex.fallback().len() as u32);
    for (c, p) in lex.fallback() {
        w.u32(*c as u32);
        w.str(p);
    }

    let m = model.wfst();
    let names = m.symbols().names();
    w.u32(names.len() as u32);
    for n in &names {
        w.str(n);
    }
    w.u32(m.start() as u32);
    w.u32(m.num_states() as u32);
    for s in 0..m.num_states() {
        w.f64(m.final_cost(s).map_or(f64::INFINITY, Cost::value));
        w.u32(m.arcs(s).len() as u32);
        for t in m.arcs(s) {
            w.u32(t.ilabel);
            w.u32(t.olabel);
            w.f64(t.cost.value());
            w.u32(t.next as u32);
        }
    }
    w.0
}

pub fn decode(bytes: &[u8], source: &str) -> Result<SegmentationModel> {
    let bad = |msg: &str| Error::Validation(format!("{source}: {msg}"));
    if !bytes.starts_with(MAGIC) {
        return Err(bad("not a model cache (missing WSEG1 header)"));
    }
    let mut r = Reader {
        bytes,
        pos: MAGIC.len(),
        source,
    };
    let flags = r.u8()?;
    let config = ModelConfig {
        morphology: flags & 1 != 0,
        names: flags & 2 != 0,
        translit: flags & 4 != 0,
    };

    let lex_config = LexiconConfig {
        large_cost: r.cost()?,
        fallback_cost: r.cost()?,
    };
    let n = r.u32()?;
    let mut entries = Vec::new();
    for _ in 0..n {
        let surface = r.str()?;
        let pron = r.str()?;
        let category = r.str()?;
        let cost = r.cost()?;
        let likeliest = r.u8()? != 0;
        entries.push(LexEntry {
            surface,
            pronunciation: pron.split(' ').map(String::from).collect(),
            category,
            cost,
            likeliest,
        });
    }
    let n = r.u32()?;
    let mut fallback = BTreeMap::new();
    for _ in 0..n {
        let c = char::from_u32(r.u32()?).ok_or_else(|| bad("invalid character"))?;
        fallback.insert(c, r.str()?);
    }
    let lexicon = Lexicon::new(entries, fallback, lex_config)?;

    let n = r.u32()?;
    let names = (0..n).map(|_| r.str()).collect::<Result<Vec<_>>>()?;
    let symbols = SymbolTable::from_names(names).ok_or_else(|| bad("malformed symbol table"))?;
    let start = r.u32()? as usize;
    let num_states = r.u32()? as usize;
    let mut m = Wfst::new(symbols.clone());
    while m.num_states() < num_states {
        m.add_state();
    }
    for s in 0..num_states {
        let fin = r.cost()?;
        if fin.is_finite() {
            m.set_final(s, fin);
        }
        for _ in 0..r.u32()? {
            let (i, o) = (r.u32()?, r.u32()?);
            let cost = r.cost()?;
            let next = r.u32()? as usize;
            if next >= num_states || i as usize >= symbols.len() || o as usize >= symbols.len() {
                return Err(bad("arc refers to an unknown state or symbol"));
            }
            m.add_arc(s, Transition::new(i, o, cost, next));
        }
    }
    if start >= num_states.max(1) {
        return Err(bad("start state out of range"));
    }
    m.set_start(start);
    if r.pos != bytes.len() {
        return Err(bad("trailing bytes"));
    }
    Ok(SegmentationModel::from_parts(m, lexicon, config))
}

pub fn save(model: &SegmentationModel, path: &Path) -> Result<()> {
    std::fs::write(path, encode(model)).map_err(|e| Error::io(path, e))
}

pub fn load(path: &Path) -> Result<SegmentationModel> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes, &path.display().to_string())
}

struct Writer(Vec<u8>);

impl Writer {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn u32(&mut self, v: u32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn str(&mut self, s: &str) {
        self.u32(s.len() as u32);
        self.0.extend_from_slice(s.as_bytes());
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
    source: &'a str,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| {
            Error::Validation(format!("{}: truncated at byte {}", self.source, self.pos))
        })?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn cost(&mut self) -> Result<Cost> {
        let v = f64::from_le_bytes(self.take(8)?.try_into().unwrap());
        if v.is_nan() {
            return Err(Error::Validation(format!("{}: NaN cost", self.source)));
        }
        Ok(Cost::new(v))
    }
    fn str(&mut self) -> Result<String> {
        let n = self.u32()? as usize;
        let source = self.source;
        String::from_utf8(self.take(n)?.to_vec())
            .map_err(|_| Error::Validation(format!("{source}: invalid UTF-8 string")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::segmenter::Components;

    fn model() -> SegmentationModel {
        let e = LexEntry::new("日文", &["ri4", "wen2"], "nc", 6.25, true).unwrap();
        let fb = BTreeMap::from([('日', "ri4".to_string()), ('文', "wen2".to_string())]);
        let lex = Lexicon::new(vec![e], fb, LexiconConfig::default()).unwrap();
        SegmentationModel::build(lex, &Components::default(), ModelConfig::default()).unwrap()
    }

    #[test]
    fn round_trip_is_exact() {
        let m = model();
        let bytes = encode(&m);
        assert!(bytes.starts_with(b"WSEG1"));
        let back = decode(&bytes, "cache").unwrap();
        assert_eq!(back.wfst().to_text(), m.wfst().to_text());
        assert_eq!(
            back.segment("日文日").unwrap(),
            m.segment("日文日").unwrap()
        );
        assert_eq!(encode(&back), bytes);
    }

    #[test]
    fn corrupt_input_rejected() {
        let bytes = encode(&model());
        assert!(decode(b"WSEG0", "c").is_err());
        assert!(decode(&bytes[..bytes.len() - 3], "c").is_err());
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(decode(&extra, "c").is_err());
    }
}
