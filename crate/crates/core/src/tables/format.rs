use super::TableError;

/// A table file split into header fields and numbered body lines.
pub(crate) struct TableText<'a> {
    pub fields: Vec<(usize, &'a str, &'a str)>,
    pub body: Vec<(usize, &'a str)>,
}

impl<'a> TableText<'a> {
    pub fn parse(text: &'a str, kind: &str) -> Result<Self, TableError> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
        let magic = format!("#! updown {kind} v1");
        match lines.next() {
            Some((_, first)) if first == magic => {}
            Some((n, first)) => return Err(TableError::parse(n, format!("expected `{magic}`, found `{first}`"))),
            None => return Err(TableError::parse(1, "empty file")),
        }
        let mut fields = Vec::new();
        let mut in_body = false;
        let mut body = Vec::new();
        for (n, line) in lines {
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if in_body {
                body.push((n, line));
            } else if line == "data:" {
                in_body = true;
            } else {
                let (k, v) = line
                    .split_once(':')
                    .ok_or_else(|| TableError::parse(n, format!("expected `key: value`, found `{line}`")))?;
                fields.push((n, k.trim(), v.trim()));
            }
        }
        if !in_body {
            return Err(TableError::parse(text.lines().count().max(1), "missing `data:` line"));
        }
        Ok(Self { fields, body })
    }

    pub fn get(&self, key: &str) -> Option<(usize, &'a str)> {
        self.fields.iter().find(|f| f.1 == key).map(|f| (f.0, f.2))
    }

    pub fn require(&self, key: &str) -> Result<(usize, &'a str), TableError> {
        self.get(key).ok_or_else(|| TableError::parse(1, format!("missing header field `{key}`")))
    }

    pub fn number(&self, key: &str) -> Result<Option<f64>, TableError> {
        match self.get(key) {
            None => Ok(None),
            Some((n, v)) => parse_f64(n, v).map(Some),
        }
    }
}

pub(crate) fn parse_f64(line: usize, s: &str) -> Result<f64, TableError> {
    let v: f64 = s.parse().map_err(|_| TableError::parse(line, format!("`{s}` is not a number")))?;
    if !v.is_finite() {
        return Err(TableError::parse(line, format!("`{s}` is not finite")));
    }
    Ok(v)
}

pub(crate) fn parse_usize(line: usize, s: &str) -> Result<usize, TableError> {
    s.parse().map_err(|_| TableError::parse(line, format!("`{s}` is not a nonnegative integer")))
}

/// Shortest decimal form that parses back to the same `f64`.
pub(crate) fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}
