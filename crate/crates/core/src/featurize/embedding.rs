//! Pre-trained word vectors in the plain-text word2vec layout, and
//! unweighted averaging of them into document vectors.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{FeatureVector, FeaturizeError, TokenFeaturizer};
use crate::preprocess::{Preprocessor, TokenSequence};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable<T> {
    dimension: usize,
    words: Vec<String>,
    vectors: Vec<T>,
    index: HashMap<String, usize>,
}

impl<T: Scalar> EmbeddingTable<T> {
    pub fn new(dimension: usize) -> Self {
        Self {
            dimension,
            words: Vec::new(),
            vectors: Vec::new(),
            index: HashMap::new(),
        }
    }

    /// Inserts or replaces a word vector. Returns `true` if the word was new.
    pub fn insert(&mut self, word: &str, vector: &[T]) -> Result<bool, FeaturizeError> {
        if vector.len() != self.dimension {
            return Err(FeaturizeError::InvalidParameter(format!(
                "vector for {word:?} has {} components, table dimension is {}",
                vector.len(),
                self.dimension
            )));
        }
        if let Some(k) = vector.iter().position(|v| !v.is_finite()) {
            return Err(FeaturizeError::InvalidParameter(format!(
                "component {k} of {word:?} is not finite"
            )));
        }
        match self.index.get(word) {
            Some(&row) => {
                self.vectors[row * self.dimension..(row + 1) * self.dimension].copy_from_slice(vector);
                Ok(false)
            }
            None => {
                self.index.insert(word.to_owned(), self.words.len());
                self.words.push(word.to_owned());
                self.vectors.extend_from_slice(vector);
                Ok(true)
            }
        }
    }

    /// A table of uniform(-1, 1) vectors, fixed by `seed`.
    pub fn random<S: AsRef<str>>(words: &[S], dimension: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut table = Self::new(dimension);
        let mut buf = vec![T::zero(); dimension];
        for w in words {
            for b in buf.iter_mut() {
                *b = T::lit(rng.gen_range(-1.0..1.0));
            }
            table.insert(w.as_ref(), &buf).expect("finite and correctly sized");
        }
        table
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn get(&self, word: &str) -> Option<&[T]> {
        self.index
            .get(word)
            .map(|&r| &self.vectors[r * self.dimension..(r + 1) * self.dimension])
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    /// Serializes in the same text format [`load_embedding_table`] reads.
    /// Components use Rust's shortest round-trip float formatting.
    pub fn write<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{} {}", self.len(), self.dimension)?;
        for (r, w) in self.words.iter().enumerate() {
            write!(out, "{w}")?;
            for v in &self.vectors[r * self.dimension..(r + 1) * self.dimension] {
                write!(out, " {v}")?;
            }
            writeln!(out)?;
        }
        out.flush()
    }

    pub fn save(&self, path: &Path) -> Result<(), FeaturizeError> {
        let file = File::create(path).map_err(|e| FeaturizeError::io(path, e))?;
        self.write(BufWriter::new(file)).map_err(|e| FeaturizeError::io(path, e))
    }
}

/// Reads the `<count> <dim>` header followed by `<word> <v1> ... <vdim>` lines.
/// A word seen twice keeps its last vector.
pub fn read_embedding_table<T: Scalar, R: Read>(reader: R) -> Result<EmbeddingTable<T>, FeaturizeError> {
    let mut lines = BufReader::new(reader).lines().enumerate();
    let header = loop {
        match lines.next() {
            None => return Err(FeaturizeError::EmptyFile),
            Some((i, line)) => {
                let line = line.map_err(|e| FeaturizeError::io(Path::new(""), e))?;
                if !line.trim().is_empty() {
                    break (i + 1, line);
                }
            }
        }
    };
    let parse_err = |line: usize, reason: String| FeaturizeError::Parse { line, reason };
    let fields: Vec<&str> = header.1.split_whitespace().collect();
    let (declared, dim) = match fields.as_slice() {
        [count, dim] => (
            count.parse::<usize>().map_err(|e| parse_err(header.0, e.to_string()))?,
            dim.parse::<usize>().map_err(|e| parse_err(header.0, e.to_string()))?,
        ),
        _ => return Err(parse_err(header.0, "header must be \"<count> <dim>\"".into())),
    };
    if dim == 0 {
        return Err(parse_err(header.0, "dimension must be positive".into()));
    }

    let mut table = EmbeddingTable::new(dim);
    let mut buf = Vec::with_capacity(dim);
    let mut rows = 0usize;
    for (i, line) in lines {
        let line_no = i + 1;
        let line = line.map_err(|e| FeaturizeError::io(Path::new(""), e))?;
        let mut parts = line.split_whitespace();
        let Some(word) = parts.next() else { continue };
        buf.clear();
        for p in parts {
            let v: T = p
                .parse()
                .map_err(|_| parse_err(line_no, format!("non-numeric component {p:?}")))?;
            if !v.is_finite() {
                return Err(parse_err(line_no, format!("non-finite component {p:?}")));
            }
            buf.push(v);
        }
        if buf.len() != dim {
            return Err(FeaturizeError::DimensionMismatch {
                line: line_no,
                expected: dim,
                found: buf.len(),
            });
        }
        rows += 1;
        if !table.insert(word, &buf)? {
            log::warn!("line {line_no}: duplicate word {word:?}, keeping the later vector");
        }
    }
    if rows == 0 {
        return Err(FeaturizeError::EmptyFile);
    }
    if rows != declared {
        log::warn!("header declares {declared} vectors but {rows} were read");
    }
    Ok(table)
}

pub fn load_embedding_table<T: Scalar>(path: &Path) -> Result<EmbeddingTable<T>, FeaturizeError> {
    let file = File::open(path).map_err(|e| FeaturizeError::io(path, e))?;
    read_embedding_table(file)
}

/// Unweighted mean of the vectors of in-table tokens; the zero vector when no
/// token is in the table.
pub fn average_embedding<T: Scalar, S: AsRef<str>>(tokens: &[S], table: &EmbeddingTable<T>) -> Vec<T> {
    let mut sum = vec![T::zero(); table.dimension()];
    let mut hits = 0usize;
    for t in tokens {
        if let Some(v) = table.get(t.as_ref()) {
            for (s, &x) in sum.iter_mut().zip(v) {
                *s += x;
            }
            hits += 1;
        }
    }
    if hits > 0 {
        let n = T::from_count(hits);
        for s in &mut sum {
            *s /= n;
        }
    }
    sum
}

/// Word-vector averaging over lightly preprocessed tokens.
#[derive(Debug, Clone)]
pub struct WordAverager<T> {
    pub table: EmbeddingTable<T>,
    pub preprocessor: Preprocessor,
}

impl<T: Scalar> TokenFeaturizer<T> for WordAverager<T> {
    fn dimension(&self) -> usize {
        self.table.dimension()
    }

    fn tokens(&self, text: &str) -> TokenSequence {
        self.preprocessor.unigrams(text)
    }

    fn encode(&self, unigrams: &[&str]) -> FeatureVector<T> {
        FeatureVector::Dense(average_embedding(unigrams, &self.table))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn table(text: &str) -> Result<EmbeddingTable<f64>, FeaturizeError> {
        read_embedding_table(text.as_bytes())
    }

    #[test]
    fn loads_declared_dimension() {
        let words: Vec<String> = (0..7).map(|i| format!("w{i}")).collect();
        let t = EmbeddingTable::<f64>::random(&words, 300, 1);
        let mut buf = Vec::new();
        t.write(&mut buf).unwrap();
        let back = table(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(back.dimension(), 300);
        assert_eq!(back.len(), 7);
    }

    #[test]
    fn short_line_names_the_line() {
        let err = table("2 3\na 1 2 3\nb 1 2\n").unwrap_err();
        assert!(matches!(err, FeaturizeError::DimensionMismatch { line: 3, expected: 3, found: 2 }));
    }

    #[test]
    fn non_numeric_component() {
        let err = table("1 2\na 1 x\n").unwrap_err();
        assert!(matches!(err, FeaturizeError::Parse { line: 2, .. }));
    }

    #[test]
    fn empty_file() {
        assert!(matches!(table(""), Err(FeaturizeError::EmptyFile)));
        assert!(matches!(table("0 3\n"), Err(FeaturizeError::EmptyFile)));
    }

    #[test]
    fn duplicate_word_keeps_last() {
        let t = table("2 2\na 1 2\na 3 4\n").unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t.get("a").unwrap(), &[3.0, 4.0]);
    }

    #[test]
    fn write_then_read_is_bit_exact() {
        let words = ["alpha", "beta", "gamma"];
        for seed in 0..5 {
            let t = EmbeddingTable::<f64>::random(&words, 16, seed);
            let mut buf = Vec::new();
            t.write(&mut buf).unwrap();
            let back: EmbeddingTable<f64> = read_embedding_table(buf.as_slice()).unwrap();
            for w in words {
                let a = t.get(w).unwrap().iter().map(|x| x.to_bits());
                let b = back.get(w).unwrap().iter().map(|x| x.to_bits());
                assert!(a.eq(b));
            }
        }
        let t32 = EmbeddingTable::<f32>::random(&words, 8, 3);
        let mut buf = Vec::new();
        t32.write(&mut buf).unwrap();
        assert_eq!(read_embedding_table::<f32, _>(buf.as_slice()).unwrap(), t32);
    }

    #[test]
    fn averaging() {
        let t = table("3 2\nu 1 2\nv 3 -4\nw 0.5 0.5\n").unwrap();
        assert_eq!(average_embedding(&["u"], &t), vec![1.0, 2.0]);
        assert_eq!(average_embedding(&["u", "v"], &t), vec![2.0, -1.0]);
        assert_eq!(average_embedding(&["u", "oov", "v"], &t), vec![2.0, -1.0]);
        assert_eq!(average_embedding(&["x", "y"], &t), vec![0.0, 0.0]);
        assert_eq!(average_embedding::<f64, &str>(&[], &t), vec![0.0, 0.0]);
    }

    proptest! {
        #[test]
        fn averaging_is_order_invariant(perm in Just((0..6usize).collect::<Vec<_>>()).prop_shuffle()) {
            let words = ["a", "b", "c", "d", "e", "f"];
            let t = EmbeddingTable::<f64>::random(&words, 5, 11);
            let base = average_embedding(&words, &t);
            let shuffled: Vec<&str> = perm.iter().map(|&i| words[i]).collect();
            let other = average_embedding(&shuffled, &t);
            for (x, y) in base.iter().zip(&other) {
                prop_assert!((x - y).abs() < 1e-14);
            }
        }
    }
}
