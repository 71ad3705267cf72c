//! Deterministic CSV output. Floats are written with 17 significant digits.

/// `{:.16e}`, the shortest fixed-width format that round-trips every `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// A CSV table assembled in memory.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    /// Header `fixed..., prefix0, prefix1, ...`.
    pub fn with_vector(fixed: &[&str], prefix: &str, len: usize) -> Self {
        let mut h: Vec<String> = fixed.iter().map(|s| s.to_string()).collect();
        h.extend((0..len).map(|i| format!("{prefix}{i}")));
        Self { header: h, rows: Vec::new() }
    }

    pub fn push_row(&mut self, ints: &[u64], floats: &[f64]) {
        let mut r: Vec<String> = ints.iter().map(|v| v.to_string()).collect();
        r.extend(floats.iter().map(|v| fmt_f64(*v)));
        debug_assert_eq!(r.len(), self.header.len());
        self.rows.push(r);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        w.into_inner().expect("in-memory flush")
    }
}

/// Indices `0, every, 2·every, …` plus the last index.
pub fn sampled(len: usize, every: usize) -> impl Iterator<Item = usize> {
    let every = every.max(1);
    (0..len).filter(move |k| k % every == 0 || *k + 1 == len)
}
