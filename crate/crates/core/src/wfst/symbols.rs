use std::collections::HashMap;
use std::sync::{Arc, RwLock};

/// Integer symbol identifier.
pub type Label = u32;

/// Reserved identifier for the empty string.
pub const EPSILON: Label = 0;

/// Printed name of [`EPSILON`].
pub const EPSILON_NAME: &str = "<eps>";

/// Append-only mapping between symbol names and identifiers, shared by
/// every machine of one model.
///
/// Input hanzi, output syllables and category tags all live in the one
/// table; the two tapes of a transducer keep them apart. Machines compare
/// tables by identity, so components must be built against the same
/// `Arc<SymbolTable>` before they can be combined.
#[derive(Debug)]
pub struct SymbolTable {
    inner: RwLock<Inner>,
}

#[derive(Debug)]
struct Inner {
    names: Vec<String>,
    ids: HashMap<String, Label>,
}

impl SymbolTable {
    pub fn new() -> Arc<SymbolTable> {
        let mut ids = HashMap::new();
        ids.insert(EPSILON_NAME.to_string(), EPSILON);
        Arc::new(SymbolTable {
            inner: RwLock::new(Inner {
                names: vec![EPSILON_NAME.to_string()],
                ids,
            }),
        })
    }

    /// Returns the id for `name`, adding it if absent.
    pub fn intern(&self, name: &str) -> Label {
        if let Some(id) = self.get(name) {
            return id;
        }
        let mut inner = self.inner.write().expect("symbol table lock poisoned");
        if let Some(&id) = inner.ids.get(name) {
            return id;
        }
        let id = Label::try_from(inner.names.len()).expect("symbol table overflow");
        inner.names.push(name.to_string());
        inner.ids.insert(name.to_string(), id);
        id
    }

    pub fn intern_char(&self, c: char) -> Label {
        let mut buf = [0u8; 4];
        self.intern(c.encode_utf8(&mut buf))
    }

    pub fn get(&self, name: &str) -> Option<Label> {
        self.inner
            .read()
            .expect("symbol table lock poisoned")
            .ids
            .get(name)
            .copied()
    }

    pub fn get_char(&self, c: char) -> Option<Label> {
        let mut buf = [0u8; 4];
        self.get(c.encode_utf8(&mut buf))
    }

    pub fn name(&self, id: Label) -> Option<String> {
        self.inner
            .read()
            .expect("symbol table lock poisoned")
            .names
            .get(id as usize)
            .cloned()
    }

    pub fn len(&self) -> usize {
        self.inner
            .read()
            .expect("symbol table lock poisoned")
            .names
            .len()
    }

    pub fn is_empty(&self) -> bool {
        // epsilon is always present
        false
    }

    /// All names in id order.
    pub fn names(&self) -> Vec<String> {
        self.inner
            .read()
            .expect("symbol table lock poisoned")
            .names
            .clone()
    }

    /// Rebuilds a table from names in id order. The first name must be
    /// the epsilon name.
    pub fn from_names(names: Vec<String>) -> Option<Arc<SymbolTable>> {
        if names.first().map(String::as_str) != Some(EPSILON_NAME) {
            return None;
        }
        let mut ids = HashMap::with_capacity(names.len());
        for (i, n) in names.iter().enumerate() {
            if ids.insert(n.clone(), Label::try_from(i).ok()?).is_some() {
                return None;
            }
        }
        Some(Arc::new(SymbolTable {
            inner: RwLock::new(Inner { names, ids }),
        }))
    }
}
