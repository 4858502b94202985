//! Key paths and line numbers for configuration diagnostics.

use std::fmt;
use std::ops::Range;

use serde::Serialize;
use toml::de::{DeTable, DeValue};
use toml::Spanned;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub line: Option<usize>,
    /// Dotted key path, `[i]` for array items; empty for the whole file.
    pub key: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.line, self.key.is_empty()) {
            (Some(line), false) => write!(f, "line {line}: {}: {}", self.key, self.message),
            (Some(line), true) => write!(f, "line {line}: {}", self.message),
            (None, false) => write!(f, "{}: {}", self.key, self.message),
            (None, true) => write!(f, "{}", self.message),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Seg {
    Key(String),
    Index(usize),
}

fn parse_path(path: &str) -> Vec<Seg> {
    let mut out = Vec::new();
    for part in path.split('.').filter(|p| !p.is_empty()) {
        let mut rest = part;
        if let Some(i) = rest.find('[') {
            out.push(Seg::Key(rest[..i].to_string()));
            rest = &rest[i..];
            while let Some(stripped) = rest.strip_prefix('[') {
                let end = stripped.find(']').unwrap_or(stripped.len());
                if let Ok(n) = stripped[..end].parse() {
                    out.push(Seg::Index(n));
                }
                rest = stripped.get(end + 1..).unwrap_or("");
            }
        } else {
            out.push(Seg::Key(rest.to_string()));
        }
    }
    out
}

fn format_path(segs: &[Seg]) -> String {
    let mut s = String::new();
    for seg in segs {
        match seg {
            Seg::Key(k) => {
                if !s.is_empty() {
                    s.push('.');
                }
                s.push_str(k);
            }
            Seg::Index(i) => s.push_str(&format!("[{i}]")),
        }
    }
    s
}

/// Parsed source text with spans, for mapping between byte offsets, lines
/// and key paths.
pub struct SourceMap<'a> {
    text: &'a str,
    root: Option<Spanned<DeTable<'a>>>,
}

impl<'a> SourceMap<'a> {
    /// Parses `text`; syntax errors are returned as diagnostics.
    pub fn parse(text: &'a str) -> (Self, Vec<Diagnostic>) {
        let (root, errors) = DeTable::parse_recoverable(text);
        let mut map = Self { text, root: None };
        let diags: Vec<Diagnostic> = errors
            .iter()
            .map(|e| Diagnostic {
                line: e.span().map(|s| map.line_of(s.start)),
                key: String::new(),
                message: e.message().trim().to_string(),
            })
            .collect();
        if diags.is_empty() {
            map.root = Some(root);
        }
        (map, diags)
    }

    pub fn text(&self) -> &'a str {
        self.text
    }

    pub fn line_of(&self, offset: usize) -> usize {
        let end = offset.min(self.text.len());
        self.text.as_bytes()[..end].iter().filter(|&&b| b == b'\n').count() + 1
    }

    /// Top-level keys with their lines, in document order.
    pub fn top_keys(&self) -> Vec<(String, usize)> {
        let Some(root) = &self.root else { return Vec::new() };
        let mut keys: Vec<(String, usize)> = root
            .get_ref()
            .iter()
            .map(|(k, _)| (k.get_ref().to_string(), k.span().start))
            .collect();
        keys.sort_by_key(|(_, start)| *start);
        keys.into_iter().map(|(k, s)| (k, self.line_of(s))).collect()
    }

    /// Line of the deepest existing key along `path`.
    pub fn line_of_path(&self, path: &str) -> Option<usize> {
        let root = self.root.as_ref()?;
        let mut span = None;
        let mut table = Some(root.get_ref());
        let mut value: Option<&Spanned<DeValue<'a>>> = None;
        for seg in parse_path(path) {
            match seg {
                Seg::Key(k) => {
                    let t = match value.map(|v| v.get_ref()) {
                        None => table?,
                        Some(DeValue::Table(t)) => t,
                        _ => break,
                    };
                    let Some((key, v)) = t.iter().find(|(key, _)| key.get_ref().as_ref() == k) else {
                        break;
                    };
                    span = Some(key.span());
                    value = Some(v);
                    table = None;
                }
                Seg::Index(i) => {
                    let Some(DeValue::Array(a)) = value.map(|v| v.get_ref()) else { break };
                    let Some(item) = a.get(i) else { break };
                    if !item.span().is_empty() {
                        span = Some(item.span());
                    }
                    value = Some(item);
                }
            }
        }
        span.map(|s| self.line_of(s.start))
    }

    /// Deepest key path whose key or value span covers `span`.
    pub fn path_at(&self, span: Range<usize>) -> Option<String> {
        let root = self.root.as_ref()?;
        let mut best: Option<Vec<Seg>> = None;
        let mut trail = Vec::new();
        search_table(root.get_ref(), &span, &mut trail, &mut best);
        best.map(|p| format_path(&p))
    }

    /// Diagnostic for a serde error raised while deserializing this text.
    pub fn diagnostic(&self, err: &toml::de::Error, fallback_key: &str) -> Diagnostic {
        let span = err.span();
        let key = span
            .clone()
            .and_then(|s| self.path_at(s))
            .filter(|k| k.starts_with(fallback_key))
            .unwrap_or_else(|| fallback_key.to_string());
        Diagnostic {
            line: span.map(|s| self.line_of(s.start)),
            key,
            message: err.message().trim().to_string(),
        }
    }

    /// Byte range of the `key = value` entry `section.key`, when it is a
    /// plain entry of a table section.
    pub fn entry_span(&self, section: &str, key: &str) -> Option<Range<usize>> {
        let root = self.root.as_ref()?;
        let (_, sec) = root.get_ref().iter().find(|(k, _)| k.get_ref().as_ref() == section)?;
        let DeValue::Table(t) = sec.get_ref() else { return None };
        let (k, v) = t.iter().find(|(k, _)| k.get_ref().as_ref() == key)?;
        let (ks, vs) = (k.span(), v.span());
        (!ks.is_empty() && !vs.is_empty() && vs.start >= ks.end).then_some(ks.start..vs.end)
    }

    /// Diagnostic at a key path, with its line when the key exists.
    pub fn at(&self, key: &str, message: impl Into<String>) -> Diagnostic {
        Diagnostic {
            line: self.line_of_path(key),
            key: key.to_string(),
            message: message.into(),
        }
    }
}

fn covers(outer: &Range<usize>, inner: &Range<usize>) -> bool {
    !outer.is_empty() && outer.start <= inner.start && inner.end <= outer.end
}

fn consider(trail: &[Seg], best: &mut Option<Vec<Seg>>) {
    if best.as_ref().is_none_or(|b| trail.len() >= b.len()) {
        *best = Some(trail.to_vec());
    }
}

fn search_table(t: &DeTable<'_>, span: &Range<usize>, trail: &mut Vec<Seg>, best: &mut Option<Vec<Seg>>) {
    for (k, v) in t.iter() {
        trail.push(Seg::Key(k.get_ref().to_string()));
        if covers(&k.span(), span) || covers(&v.span(), span) {
            consider(trail, best);
        }
        search_value(v, span, trail, best);
        trail.pop();
    }
}

fn search_value(v: &Spanned<DeValue<'_>>, span: &Range<usize>, trail: &mut Vec<Seg>, best: &mut Option<Vec<Seg>>) {
    match v.get_ref() {
        DeValue::Table(t) => search_table(t, span, trail, best),
        DeValue::Array(a) => {
            for (i, item) in a.iter().enumerate() {
                trail.push(Seg::Index(i));
                if covers(&item.span(), span) {
                    consider(trail, best);
                }
                search_value(item, span, trail, best);
                trail.pop();
            }
        }
        _ => {}
    }
}
