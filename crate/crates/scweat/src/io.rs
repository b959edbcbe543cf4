//! Readers and writers for the text formats the tool consumes.
//!
//! Embedding files are the whitespace-delimited GloVe / fastText text
//! format: `token c1 c2 ... c_dim`, one row per line, in descending corpus
//! frequency. A first line holding exactly two integers is a fastText-style
//! header and is consumed. Lexicons are tab-separated.

use std::fs::File;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use scweat_core::lexicon::{FrequencyLexicon, Vad, VadLexicon};
use scweat_core::pos::PosLexicon;
use scweat_core::{AssociationRecord, AttributeSet, EmbeddingSpace};

use crate::error::{AppError, Result};

/// What happened while loading an embedding file, beyond the rows kept.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LoadReport {
    /// `(vocabulary size, dim)` from a header line, if one was present.
    pub header: Option<(usize, usize)>,
    /// Rows dropped because the token was already present.
    pub duplicates: usize,
    /// Lines that were not valid UTF-8.
    pub non_utf8: usize,
    /// Lines whose token contains spaces and so cannot be split reliably.
    pub spaced_tokens: usize,
}

impl LoadReport {
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.duplicates > 0 {
            out.push(format!("kind=duplicate-token count={} (first occurrence kept)", self.duplicates));
        }
        if self.non_utf8 > 0 {
            out.push(format!("kind=non-utf8-line count={} (skipped)", self.non_utf8));
        }
        if self.spaced_tokens > 0 {
            out.push(format!("kind=token-with-spaces count={} (skipped)", self.spaced_tokens));
        }
        out
    }
}

pub fn open(path: &Path) -> Result<Box<dyn BufRead>> {
    if path == Path::new("-") {
        return Ok(Box::new(BufReader::new(io::stdin())));
    }
    let f = File::open(path).map_err(|e| AppError::open(path, e))?;
    Ok(Box::new(BufReader::with_capacity(1 << 20, f)))
}

fn two_integers(fields: &[&str]) -> Option<(usize, usize)> {
    match fields {
        [a, b] => Some((a.parse().ok()?, b.parse().ok()?)),
        _ => None,
    }
}

pub fn load_embeddings(path: &Path, name: &str, limit: Option<usize>) -> Result<(EmbeddingSpace, LoadReport)> {
    read_embeddings(open(path)?, path, name, limit)
}

/// Parses an embedding stream. `source` only labels error messages.
pub fn read_embeddings<R: BufRead>(
    mut reader: R,
    source: &Path,
    name: &str,
    limit: Option<usize>,
) -> Result<(EmbeddingSpace, LoadReport)> {
    if limit == Some(0) {
        return Err(AppError::config("--limit must be at least 1"));
    }
    let mut report = LoadReport::default();
    let mut space: Option<EmbeddingSpace> = None;
    let mut buf = Vec::new();
    let mut comps = Vec::new();
    let mut line_no = 0;
    loop {
        buf.clear();
        if reader.read_until(b'\n', &mut buf).map_err(|e| AppError::read(source, e))? == 0 {
            break;
        }
        line_no += 1;
        let Ok(text) = std::str::from_utf8(&buf) else {
            report.non_utf8 += 1;
            continue;
        };
        // fastText rows carry a trailing space
        let text = text.trim_end_matches(['\n', '\r', ' ']);
        if text.is_empty() {
            continue;
        }
        let fields: Vec<&str> = text.split(' ').collect();
        if line_no == 1 {
            if let Some(h) = two_integers(&fields) {
                report.header = Some(h);
                continue;
            }
        }
        let dim = match &space {
            Some(s) => s.dim(),
            None if fields.len() < 2 => {
                return Err(AppError::at_line(source, line_no, "row has no components"));
            }
            None => fields.len() - 1,
        };
        if fields.len() != dim + 1 {
            let extra = fields.len().saturating_sub(dim + 1);
            if extra > 0 && fields[1..=extra].iter().any(|f| f.parse::<f64>().is_err()) {
                report.spaced_tokens += 1;
                continue;
            }
            return Err(AppError::at_line(
                source,
                line_no,
                format!("expected {dim} components, found {}", fields.len() - 1),
            ));
        }
        comps.clear();
        for f in &fields[1..] {
            let v: f64 = f
                .parse()
                .map_err(|_| AppError::at_line(source, line_no, format!("invalid number `{f}`")))?;
            if !v.is_finite() {
                return Err(AppError::at_line(source, line_no, format!("non-finite component `{f}`")));
            }
            comps.push(v);
        }
        if space.is_none() {
            space = Some(EmbeddingSpace::new(name, dim)?);
        }
        let s = space.as_mut().expect("just set");
        if !s.push(fields[0], &comps)? {
            report.duplicates += 1;
        }
        if limit.is_some_and(|l| s.len() >= l) {
            break;
        }
    }
    let space = space.ok_or_else(|| AppError::data(format!("{}: no vectors found", source.display())))?;
    if let Some((_, d)) = report.header {
        if d != space.dim() {
            return Err(AppError::data(format!(
                "{}: header declares dim {d} but rows have {}",
                source.display(),
                space.dim()
            )));
        }
    }
    Ok((space, report))
}

/// Writes `space` in the text format. Components use the shortest
/// representation that parses back to the same `f64`.
pub fn write_embeddings<W: Write>(space: &EmbeddingSpace, mut out: W, header: bool) -> io::Result<()> {
    if header {
        writeln!(out, "{} {}", space.len(), space.dim())?;
    }
    for v in space.iter() {
        out.write_all(v.word.as_bytes())?;
        for c in v.components {
            write!(out, " {c}")?;
        }
        out.write_all(b"\n")?;
    }
    out.flush()
}

/// Data lines of a text file with their 1-based line numbers. Blank lines
/// and lines starting with `#` are dropped.
fn data_lines<R: BufRead>(reader: R, source: &Path) -> Result<Vec<(usize, String)>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| AppError::read(source, e))?;
        let line = line.trim_end_matches(['\r', '\n']);
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        out.push((i + 1, line.to_string()));
    }
    Ok(out)
}

/// One token per line; surrounding whitespace is trimmed.
pub fn read_word_list<R: BufRead>(reader: R, source: &Path) -> Result<Vec<String>> {
    Ok(data_lines(reader, source)?
        .into_iter()
        .map(|(_, l)| l.trim().to_string())
        .collect())
}

pub fn load_word_list(path: &Path) -> Result<Vec<String>> {
    read_word_list(open(path)?, path)
}

/// A built-in set name (`gender-female`, `gender-male`) or a word-list file.
pub fn load_attribute_set(spec: &str) -> Result<AttributeSet> {
    if let Some(set) = AttributeSet::builtin(spec) {
        return Ok(set);
    }
    let path = PathBuf::from(spec);
    if !path.exists() {
        return Err(AppError::config(format!(
            "attribute set `{spec}` is neither a built-in set nor an existing file"
        )));
    }
    let words = load_word_list(&path)?;
    let name = path
        .file_stem()
        .map_or_else(|| spec.to_string(), |s| s.to_string_lossy().into_owned());
    Ok(AttributeSet::new(name, &words)?)
}

fn tab_fields<'a>(line: &'a str, n: usize, source: &Path, line_no: usize) -> Result<Vec<&'a str>> {
    let fields: Vec<&str> = line.split('\t').collect();
    if fields.len() != n || fields[0].is_empty() {
        return Err(AppError::at_line(
            source,
            line_no,
            format!("expected {n} tab-separated fields, found {}", fields.len()),
        ));
    }
    Ok(fields)
}

fn number(field: &str, source: &Path, line_no: usize) -> Result<f64> {
    field
        .trim()
        .parse()
        .map_err(|_| AppError::at_line(source, line_no, format!("invalid number `{field}`")))
}

/// `word<TAB>tag`; later lines win.
pub fn read_pos_lexicon<R: BufRead>(reader: R, source: &Path) -> Result<PosLexicon> {
    let mut lex = PosLexicon::new();
    for (n, line) in data_lines(reader, source)? {
        let f = tab_fields(&line, 2, source, n)?;
        lex.insert(f[0], f[1].trim());
    }
    Ok(lex)
}

pub fn load_pos_lexicon(path: &Path) -> Result<PosLexicon> {
    read_pos_lexicon(open(path)?, path)
}

/// `word<TAB>V<TAB>A<TAB>D` with ratings in [0, 1]. A first line whose
/// ratings are not numbers is taken as a column header.
pub fn read_vad<R: BufRead>(reader: R, source: &Path) -> Result<VadLexicon> {
    let mut lex = VadLexicon::new();
    for (i, (n, line)) in data_lines(reader, source)?.into_iter().enumerate() {
        let f = tab_fields(&line, 4, source, n)?;
        if i == 0 && f[1].trim().parse::<f64>().is_err() {
            continue;
        }
        let (v, a, d) = (number(f[1], source, n)?, number(f[2], source, n)?, number(f[3], source, n)?);
        let vad = Vad::new(v, a, d).map_err(|e| AppError::at_line(source, n, e))?;
        lex.insert(f[0], vad);
    }
    Ok(lex)
}

pub fn load_vad(path: &Path) -> Result<VadLexicon> {
    read_vad(open(path)?, path)
}

/// `word<TAB>score`, higher meaning more frequent. An optional header line
/// is skipped as for the VAD file.
pub fn read_frequency<R: BufRead>(reader: R, source: &Path) -> Result<FrequencyLexicon> {
    let label = source.display().to_string();
    let mut lex = FrequencyLexicon::new(label);
    for (i, (n, line)) in data_lines(reader, source)?.into_iter().enumerate() {
        let f = tab_fields(&line, 2, source, n)?;
        if i == 0 && f[1].trim().parse::<f64>().is_err() {
            continue;
        }
        let score = number(f[1], source, n)?;
        lex.insert(f[0], score).map_err(|e| AppError::at_line(source, n, e))?;
    }
    Ok(lex)
}

pub fn load_frequency(path: &Path) -> Result<FrequencyLexicon> {
    read_frequency(open(path)?, path)
}

/// Reads the `word,rank,effect_size,p_value` CSV written by `assoc`,
/// returning records sorted by rank.
pub fn read_records<R: Read>(reader: R, source: &Path) -> Result<Vec<AssociationRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .has_headers(true)
        .from_reader(reader);
    let headers = rdr.headers().map_err(|e| AppError::read(source, e))?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| AppError::data(format!("{}: missing column `{name}`", source.display())))
    };
    let (cw, cr, cd, cp) = (col("word")?, col("rank")?, col("effect_size")?, col("p_value")?);
    let mut out = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row.map_err(|e| AppError::read(source, e))?;
        let line = row.position().map_or(i + 2, |p| p.line() as usize);
        let field = |c: usize| row.get(c).unwrap_or("");
        let rank: usize = field(cr)
            .parse()
            .map_err(|_| AppError::at_line(source, line, format!("invalid rank `{}`", field(cr))))?;
        let effect_size = number(field(cd), source, line)?;
        let p_value = match field(cp) {
            "" => None,
            p => Some(number(p, source, line)?),
        };
        out.push(AssociationRecord {
            word: field(cw).to_string(),
            rank,
            effect_size,
            p_value,
        });
    }
    out.sort_by_key(|r| r.rank);
    Ok(out)
}

pub fn load_records(path: &Path) -> Result<Vec<AssociationRecord>> {
    read_records(open(path)?, path)
}

/// `cluster_id<TAB>label` sidecar naming clusters by hand.
pub fn load_cluster_labels(path: &Path) -> Result<std::collections::BTreeMap<usize, String>> {
    let mut out = std::collections::BTreeMap::new();
    for (n, line) in data_lines(open(path)?, path)? {
        let f = tab_fields(&line, 2, path, n)?;
        let id = f[0]
            .trim()
            .parse()
            .map_err(|_| AppError::at_line(path, n, format!("invalid cluster id `{}`", f[0])))?;
        out.insert(id, f[1].trim().to_string());
    }
    Ok(out)
}
