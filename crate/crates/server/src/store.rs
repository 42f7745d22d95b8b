//! Books by id: metadata always in memory, finished books cached, every
//! revision written to the spill directory.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use folio_core::{Book, Constraints};

/// What is needed to run a book again.
#[derive(Debug, Clone)]
pub struct Job {
    pub source: String,
    pub images: Option<PathBuf>,
    pub constraints: Constraints,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct Entry {
    pub job: Job,
    pub revision: u32,
    pub page_count: usize,
    pub warnings: Vec<String>,
    /// Output directory of the current revision.
    pub dir: PathBuf,
    book: Option<Arc<Book>>,
    used: u64,
}

impl Entry {
    pub fn book(&self) -> Option<Arc<Book>> {
        self.book.clone()
    }
}

#[derive(Debug)]
pub struct Store {
    root: PathBuf,
    capacity: usize,
    tick: u64,
    entries: HashMap<String, Entry>,
}

impl Store {
    /// `capacity` is how many finished books stay in memory.
    pub fn new(root: PathBuf, capacity: usize) -> Store {
        Store {
            root,
            capacity: capacity.max(1),
            tick: 0,
            entries: HashMap::new(),
        }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn book_dir(&self, id: &str) -> PathBuf {
        self.root.join(id)
    }

    pub fn get(&mut self, id: &str) -> Option<Entry> {
        self.tick += 1;
        let tick = self.tick;
        let e = self.entries.get_mut(id)?;
        e.used = tick;
        Some(e.clone())
    }

    /// Stores a new revision of `id` and returns its number.
    pub fn put(&mut self, id: &str, job: Job, book: Arc<Book>, dir: PathBuf) -> u32 {
        self.tick += 1;
        let revision = self.entries.get(id).map_or(1, |e| e.revision + 1);
        let old = self.entries.insert(
            id.to_string(),
            Entry {
                job,
                revision,
                page_count: book.page_count(),
                warnings: book.warnings.clone(),
                dir,
                book: Some(book),
                used: self.tick,
            },
        );
        if let Some(old) = old {
            if old.dir != self.entries[id].dir {
                let _ = std::fs::remove_dir_all(&old.dir);
            }
        }
        self.evict();
        revision
    }

    /// Number of books held in memory.
    pub fn resident(&self) -> usize {
        self.entries.values().filter(|e| e.book.is_some()).count()
    }

    fn evict(&mut self) {
        while self.resident() > self.capacity {
            let oldest = self
                .entries
                .iter()
                .filter(|(_, e)| e.book.is_some())
                .min_by_key(|(_, e)| e.used)
                .map(|(k, _)| k.clone());
            match oldest {
                Some(k) => {
                    log::debug!("spilling {k}");
                    self.entries.get_mut(&k).expect("entry").book = None;
                }
                None => break,
            }
        }
    }
}
