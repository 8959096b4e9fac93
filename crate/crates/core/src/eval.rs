//! Comparing segmentations: word-interval precision and recall pooled over
//! a corpus, the mean-P/R similarity between judges, classical metric
//! multidimensional scaling of the resulting distances, and exact-span
//! scoring of name and affix identification.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Half-open hanzi-index range `[start, end)`.
pub type Interval = (usize, usize);

/// Word intervals of one segmentation, given its words in order.
pub fn words_to_intervals<S: AsRef<str>>(words: &[S]) -> Vec<Interval> {
    let mut start = 0;
    words
        .iter()
        .map(|w| {
            let end = start + w.as_ref().chars().count();
            let iv = (start, end);
            start = end;
            iv
        })
        .collect()
}

/// Checks that `intervals` tile `[0, len)` in order with non-empty words.
pub fn check_tiling(intervals: &[Interval], len: usize) -> Result<()> {
    let mut at = 0;
    for &(s, e) in intervals {
        if s != at || e <= s {
            return Err(Error::Validation(format!(
                "word [{s}, {e}) breaks the tiling at position {at}"
            )));
        }
        at = e;
    }
    if at != len {
        return Err(Error::Validation(format!(
            "tiling covers {at} of {len} hanzi"
        )));
    }
    Ok(())
}

/// Parses a judge file: one sentence per line, words separated by `|`.
pub fn parse_judge_file(text: &str, source: &str) -> Result<Vec<Vec<String>>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, line)| {
            let words: Vec<String> = line.trim().split('|').map(String::from).collect();
            if words.iter().any(|w| w.is_empty()) {
                return Err(Error::parse(
                    source,
                    i + 1,
                    "empty word between `|` separators",
                ));
            }
            Ok(words)
        })
        .collect()
}

/// Several judges' segmentations of the same sentences.
#[derive(Clone, Debug, PartialEq)]
pub struct JudgedCorpus {
    pub sentences: Vec<String>,
    pub segmentations: BTreeMap<String, Vec<Vec<Interval>>>,
}

impl JudgedCorpus {
    pub fn new(sentences: Vec<String>) -> JudgedCorpus {
        JudgedCorpus {
            sentences,
            segmentations: BTreeMap::new(),
        }
    }

    /// Adds a judge given as words per sentence; the words must spell the
    /// corpus sentences exactly.
    pub fn add_judge(&mut self, id: &str, words: &[Vec<String>]) -> Result<()> {
        if words.len() != self.sentences.len() {
            return Err(Error::Validation(format!(
                "judge {id}: {} sentences, corpus has {}",
                words.len(),
                self.sentences.len()
            )));
        }
        for (i, (w, s)) in words.iter().zip(&self.sentences).enumerate() {
            if w.concat() != *s {
                return Err(Error::Validation(format!(
                    "judge {id}, sentence {}: words do not spell `{s}`",
                    i + 1
                )));
            }
        }
        if self.segmentations.contains_key(id) {
            return Err(Error::Validation(format!("duplicate judge id {id}")));
        }
        let intervals = words.iter().map(|w| words_to_intervals(w)).collect();
        self.segmentations.insert(id.to_string(), intervals);
        Ok(())
    }

    /// Builds a corpus from judges' word lists; the first judge fixes the
    /// sentences.
    pub fn from_judges(judges: &[(String, Vec<Vec<String>>)]) -> Result<JudgedCorpus> {
        let first = judges
            .first()
            .ok_or_else(|| Error::Validation("no judges given".into()))?;
        let mut corpus = JudgedCorpus::new(first.1.iter().map(|w| w.concat()).collect());
        for (id, words) in judges {
            corpus.add_judge(id, words)?;
        }
        Ok(corpus)
    }

    pub fn ids(&self) -> Vec<String> {
        self.segmentations.keys().cloned().collect()
    }

    pub fn similarity_matrix(&self) -> Result<SimilarityMatrix> {
        let ids = self.ids();
        let segs: Vec<&Vec<Vec<Interval>>> = ids.iter().map(|i| &self.segmentations[i]).collect();
        let n = ids.len();
        let mut values = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                values[i][j] = similarity(segs[i], segs[j])?;
            }
        }
        Ok(SimilarityMatrix { ids, values })
    }
}

/// Pooled word-match counts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MatchCounts {
    pub matches: usize,
    pub test_words: usize,
    pub standard_words: usize,
}

impl std::ops::Add for MatchCounts {
    type Output = MatchCounts;

    fn add(self, o: MatchCounts) -> MatchCounts {
        MatchCounts {
            matches: self.matches + o.matches,
            test_words: self.test_words + o.test_words,
            standard_words: self.standard_words + o.standard_words,
        }
    }
}

/// Counts for one sentence; both sides must tile the same length.
pub fn sentence_counts(test: &[Interval], standard: &[Interval]) -> Result<MatchCounts> {
    let len = standard.last().map_or(0, |iv| iv.1);
    check_tiling(standard, len)?;
    check_tiling(test, len)?;
    let std_set: BTreeSet<&Interval> = standard.iter().collect();
    Ok(MatchCounts {
        matches: test.iter().filter(|iv| std_set.contains(iv)).count(),
        test_words: test.len(),
        standard_words: standard.len(),
    })
}

pub fn corpus_counts(test: &[Vec<Interval>], standard: &[Vec<Interval>]) -> Result<MatchCounts> {
    if test.len() != standard.len() {
        return Err(Error::Validation(format!(
            "segmentations cover {} and {} sentences",
            test.len(),
            standard.len()
        )));
    }
    test.iter()
        .zip(standard)
        .try_fold(MatchCounts::default(), |acc, (t, s)| {
            Ok(acc + sentence_counts(t, s)?)
        })
}

/// `(precision, recall)` of `test` against `standard`, pooled over all
/// sentences.
pub fn word_precision_recall(
    test: &[Vec<Interval>],
    standard: &[Vec<Interval>],
) -> Result<(f64, f64)> {
    let c = corpus_counts(test, standard)?;
    if c.test_words == 0 || c.standard_words == 0 {
        return Err(Error::Validation("no words to compare".into()));
    }
    Ok((
        c.matches as f64 / c.test_words as f64,
        c.matches as f64 / c.standard_words as f64,
    ))
}

/// Mean of precision and recall with `a` as test and `b` as standard.
pub fn similarity(a: &[Vec<Interval>], b: &[Vec<Interval>]) -> Result<f64> {
    let (p, r) = word_precision_recall(a, b)?;
    Ok((p + r) / 2.0)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimilarityMatrix {
    pub ids: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

impl SimilarityMatrix {
    /// `d = 1 - s`.
    pub fn distances(&self) -> Vec<Vec<f64>> {
        self.values
            .iter()
            .map(|row| row.iter().map(|s| 1.0 - s).collect())
            .collect()
    }

    pub fn to_csv(&self) -> String {
        matrix_csv(&self.ids, &self.values)
    }
}

/// Square matrix with a header row and a label column.
pub fn matrix_csv(ids: &[String], values: &[Vec<f64>]) -> String {
    let mut out = String::from("id");
    for id in ids {
        let _ = write!(out, ",{}", csv_field(id));
    }
    out.push('\n');
    for (id, row) in ids.iter().zip(values) {
        out.push_str(&csv_field(id));
        for v in row {
            let _ = write!(out, ",{v:.6}");
        }
        out.push('\n');
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Parses a square CSV matrix as written by [`matrix_csv`].
pub fn parse_matrix_csv(text: &str, source: &str) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::parse(source, 1, "empty matrix file"))?;
    let ids: Vec<String> = header
        .split(',')
        .skip(1)
        .map(|s| s.trim().to_string())
        .collect();
    let mut values = Vec::new();
    for (i, line) in lines {
        let mut cols = line.split(',');
        let label = cols.next().unwrap_or_default().trim();
        if ids.get(values.len()).map(String::as_str) != Some(label) {
            return Err(Error::parse(
                source,
                i + 1,
                format!("row label `{label}` out of order"),
            ));
        }
        let row = cols
            .map(|c| {
                c.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::parse(source, i + 1, format!("bad number `{c}`")))
            })
            .collect::<Result<Vec<f64>>>()?;
        if row.len() != ids.len() {
            return Err(Error::parse(
                source,
                i + 1,
                format!("expected {} values", ids.len()),
            ));
        }
        values.push(row);
    }
    if values.len() != ids.len() {
        return Err(Error::Validation(format!("{source}: matrix is not square")));
    }
    Ok((ids, values))
}

#[derive(Clone, Debug, PartialEq)]
pub struct MdsEmbedding {
    /// One row per point, one column per dimension.
    pub coordinates: Vec<Vec<f64>>,
    /// Percent of the positive-eigenvalue total explained per dimension.
    pub explained: Vec<f64>,
    pub eigenvalues: Vec<f64>,
    /// Set when fewer than the requested dimensions had positive eigenvalues.
    pub truncated: bool,
}

/// Classical metric MDS: double-center the squared distances, keep the top
/// `k` positive eigenpairs, and scale eigenvectors by `sqrt(eigenvalue)`.
/// Each eigenvector's sign is fixed so its largest-magnitude component is
/// positive.
pub fn mds(distances: &[Vec<f64>], k: usize) -> Result<MdsEmbedding> {
    let n = distances.len();
    if n == 0 {
        return Err(Error::Argument("empty distance matrix".into()));
    }
    for (i, row) in distances.iter().enumerate() {
        if row.len() != n {
            return Err(Error::Validation("distance matrix is not square".into()));
        }
        if row[i].abs() > 1e-12 {
            return Err(Error::Validation(format!("distance[{i}][{i}] is not zero")));
        }
        for j in 0..i {
            if (row[j] - distances[j][i]).abs() > 1e-9 || !row[j].is_finite() {
                return Err(Error::Validation(format!(
                    "distances [{i}][{j}] and [{j}][{i}] differ"
                )));
            }
        }
    }
    let d2 = DMatrix::from_fn(n, n, |i, j| {
        let d = (distances[i][j] + distances[j][i]) / 2.0;
        d * d
    });
    let j = DMatrix::identity(n, n) - DMatrix::from_element(n, n, 1.0 / n as f64);
    let b = -0.5 * &j * d2 * &j;
    let b = (&b + b.transpose()) * 0.5;
    let eig = SymmetricEigen::new(b);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| {
        eig.eigenvalues[y]
            .total_cmp(&eig.eigenvalues[x])
            .then(x.cmp(&y))
    });
    let largest = eig.eigenvalues[order[0]].max(0.0);
    let positive: Vec<usize> = order
        .iter()
        .copied()
        .filter(|&i| eig.eigenvalues[i] > 1e-10 * largest.max(1e-300))
        .collect();
    let total: f64 = positive.iter().map(|&i| eig.eigenvalues[i]).sum();
    let kept: Vec<usize> = positive.iter().copied().take(k).collect();

    let mut coordinates = vec![Vec::with_capacity(kept.len()); n];
    for &e in &kept {
        let v = eig.eigenvectors.column(e);
        let pivot = (0..n)
            .max_by(|&a, &b| v[a].abs().total_cmp(&v[b].abs()).then(b.cmp(&a)))
            .unwrap_or(0);
        let sign = if v[pivot] < 0.0 { -1.0 } else { 1.0 };
        let scale = eig.eigenvalues[e].sqrt() * sign;
        for (p, row) in coordinates.iter_mut().enumerate() {
            row.push(v[p] * scale);
        }
    }
    Ok(MdsEmbedding {
        coordinates,
        explained: kept
            .iter()
            .map(|&e| 100.0 * eig.eigenvalues[e] / total)
            .collect(),
        eigenvalues: kept.iter().map(|&e| eig.eigenvalues[e]).collect(),
        truncated: kept.len() < k,
    })
}

pub fn mds_csv(ids: &[String], emb: &MdsEmbedding) -> String {
    let mut out = String::from("id");
    for (d, pct) in emb.explained.iter().enumerate() {
        let _ = write!(out, ",dim{} ({pct:.1}%)", d + 1);
    }
    out.push('\n');
    for (id, row) in ids.iter().zip(&emb.coordinates) {
        out.push_str(&csv_field(id));
        for v in row {
            let _ = write!(out, ",{v:.6}");
        }
        out.push('\n');
    }
    out
}

/// Scatter plot of the first two dimensions, points labeled by id and axes
/// labeled with their explained percentages.
pub fn mds_svg(ids: &[String], emb: &MdsEmbedding) -> String {
    const SIZE: f64 = 480.0;
    const PAD: f64 = 60.0;
    let xy: Vec<(f64, f64)> = emb
        .coordinates
        .iter()
        .map(|r| {
            (
                r.first().copied().unwrap_or(0.0),
                r.get(1).copied().unwrap_or(0.0),
            )
        })
        .collect();
    let extent = xy
        .iter()
        .flat_map(|&(x, y)| [x.abs(), y.abs()])
        .fold(0.0_f64, f64::max)
        .max(1e-12);
    let to_px = |v: f64| SIZE / 2.0 + v / extent * (SIZE / 2.0 - PAD);
    let pct = |d: usize| {
        emb.explained
            .get(d)
            .map_or("n/a".to_string(), |p| format!("{p:.1}%"))
    };
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" font-family="sans-serif" font-size="12">"#
    );
    let mid = SIZE / 2.0;
    let _ = writeln!(
        out,
        r##"<line x1="{PAD}" y1="{mid}" x2="{e}" y2="{mid}" stroke="#999"/><line x1="{mid}" y1="{PAD}" x2="{mid}" y2="{e}" stroke="#999"/>"##,
        e = SIZE - PAD
    );
    let _ = writeln!(
        out,
        r#"<text x="{mid}" y="{y}" text-anchor="middle">Dimension 1 ({})</text>"#,
        pct(0),
        y = SIZE - PAD / 3.0
    );
    let _ = writeln!(
        out,
        r#"<text x="{x}" y="{mid}" text-anchor="middle" transform="rotate(-90 {x} {mid})">Dimension 2 ({})</text>"#,
        pct(1),
        x = PAD / 3.0
    );
    for (id, &(x, y)) in ids.iter().zip(&xy) {
        let (px, py) = (to_px(x), SIZE - to_px(y));
        let _ = writeln!(
            out,
            r#"<circle cx="{px:.2}" cy="{py:.2}" r="3"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            px + 5.0,
            py - 5.0,
            xml_escape(id)
        );
    }
    out.push_str("</svg>\n");
    out
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// An annotated span in sentence `sentence`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Span {
    pub sentence: usize,
    pub start: usize,
    pub end: usize,
    pub tag: String,
}

/// Parses `sentence-index<TAB>start<TAB>end<TAB>tag`.
pub fn parse_spans_tsv(text: &str, source: &str) -> Result<Vec<Span>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 4 {
            return Err(Error::parse(
                source,
                i + 1,
                "expected 4 tab-separated columns",
            ));
        }
        let num = |c: &str| {
            c.trim()
                .parse::<usize>()
                .map_err(|_| Error::parse(source, i + 1, format!("bad index `{c}`")))
        };
        let span = Span {
            sentence: num(cols[0])?,
            start: num(cols[1])?,
            end: num(cols[2])?,
            tag: cols[3].trim().to_string(),
        };
        if span.end <= span.start {
            return Err(Error::parse(source, i + 1, "span end must exceed start"));
        }
        out.push(span);
    }
    Ok(out)
}

pub fn spans_to_tsv(spans: &[Span]) -> String {
    spans
        .iter()
        .map(|s| format!("{}\t{}\t{}\t{}\n", s.sentence, s.start, s.end, s.tag))
        .collect()
}

fn check_no_overlap(spans: &[Span], what: &str) -> Result<()> {
    let mut sorted: Vec<&Span> = spans.iter().collect();
    sorted.sort();
    for w in sorted.windows(2) {
        if w[0].sentence == w[1].sentence && w[1].start < w[0].end {
            return Err(Error::Validation(format!(
                "{what} spans overlap in sentence {}: [{}, {}) and [{}, {})",
                w[0].sentence, w[0].start, w[0].end, w[1].start, w[1].end
            )));
        }
    }
    Ok(())
}

/// Exact-span `(precision, recall)` for name identification; tags are
/// ignored. Undefined rates (nothing found, or nothing to find) are 1.
pub fn name_id_score(system: &[Span], gold: &[Span]) -> Result<(f64, f64)> {
    check_no_overlap(gold, "gold")?;
    let key = |s: &Span| (s.sentence, s.start, s.end);
    let gold_set: BTreeSet<_> = gold.iter().map(key).collect();
    let sys_set: BTreeSet<_> = system.iter().map(key).collect();
    let matches = sys_set.intersection(&gold_set).count() as f64;
    let rate = |n: usize| if n == 0 { 1.0 } else { matches / n as f64 };
    Ok((rate(sys_set.len()), rate(gold_set.len())))
}

/// One row of the affix report.
#[derive(Clone, Debug, PartialEq)]
pub struct AffixScore {
    pub affix: String,
    pub found: usize,
    pub correct: usize,
    pub missed: usize,
}

impl AffixScore {
    pub fn precision(&self) -> Option<f64> {
        (self.found > 0).then(|| self.correct as f64 / self.found as f64)
    }

    /// `correct / (correct + missed)`.
    pub fn recall(&self) -> Option<f64> {
        let gold = self.correct + self.missed;
        (gold > 0).then(|| self.correct as f64 / gold as f64)
    }
}

/// Per-affix counts; each span's tag names its affix.
pub fn affix_score(system: &[Span], gold: &[Span]) -> Result<Vec<AffixScore>> {
    check_no_overlap(gold, "gold")?;
    let sys: BTreeSet<&Span> = system.iter().collect();
    let gold_set: BTreeSet<&Span> = gold.iter().collect();
    let affixes: BTreeSet<&str> = system.iter().chain(gold).map(|s| s.tag.as_str()).collect();
    Ok(affixes
        .into_iter()
        .map(|a| {
            let found = sys.iter().filter(|s| s.tag == a).count();
            let correct = sys
                .iter()
                .filter(|s| s.tag == a && gold_set.contains(*s))
                .count();
            let gold_n = gold_set.iter().filter(|s| s.tag == a).count();
            AffixScore {
                affix: a.to_string(),
                found,
                correct,
                missed: gold_n - correct,
            }
        })
        .collect())
}

/// Tab-separated report: affix, found, correct (precision), missed
/// (recall). Undefined rates print as `n/a`.
pub fn format_affix_table(scores: &[AffixScore]) -> String {
    let pct = |r: Option<f64>| r.map_or("n/a".to_string(), |v| format!("{:.0}%", v * 100.0));
    let mut out = String::from("affix\tfound\tcorrect (prec.)\tmissed (rec.)\n");
    for s in scores {
        let _ = writeln!(
            out,
            "{}\t{}\t{} ({})\t{} ({})",
            s.affix,
            s.found,
            s.correct,
            pct(s.precision()),
            s.missed,
            pct(s.recall())
        );
    }
    out
}
