use std::fmt;
use std::sync::Arc;

/// Immutable string value with a cached character count. Indexing is by
/// character; all-ASCII strings index in constant time.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PyStr {
    text: Arc<str>,
    chars: usize,
}

impl PyStr {
    pub fn new(text: &str) -> PyStr {
        PyStr {
            chars: text.chars().count(),
            text: Arc::from(text),
        }
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    pub fn char_len(&self) -> usize {
        self.chars
    }

    pub fn byte_len(&self) -> usize {
        self.text.len()
    }

    fn is_ascii(&self) -> bool {
        self.chars == self.text.len()
    }

    /// The character at `index` as a one-character string.
    pub fn char_at(&self, index: usize) -> Option<PyStr> {
        if index >= self.chars {
            return None;
        }
        let piece = if self.is_ascii() {
            &self.text[index..index + 1]
        } else {
            let (start, ch) = self.text.char_indices().nth(index)?;
            &self.text[start..start + ch.len_utf8()]
        };
        Some(PyStr {
            text: Arc::from(piece),
            chars: 1,
        })
    }

    pub fn concat(&self, other: &PyStr) -> PyStr {
        let mut s = String::with_capacity(self.text.len() + other.text.len());
        s.push_str(&self.text);
        s.push_str(&other.text);
        PyStr {
            text: Arc::from(s),
            chars: self.chars + other.chars,
        }
    }

    pub fn repeat(&self, times: usize) -> PyStr {
        PyStr {
            text: Arc::from(self.text.repeat(times)),
            chars: self.chars * times,
        }
    }
}

impl From<&str> for PyStr {
    fn from(s: &str) -> PyStr {
        PyStr::new(s)
    }
}

impl From<String> for PyStr {
    fn from(s: String) -> PyStr {
        PyStr::new(&s)
    }
}

impl fmt::Display for PyStr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

impl fmt::Debug for PyStr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(&*self.text, f)
    }
}
