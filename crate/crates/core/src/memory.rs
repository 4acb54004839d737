//! Bounded per-agent history of (observation, action) pairs.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::model::{Action, Observation};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemoryEntry {
    pub observation: Observation,
    pub action: Action,
}

/// The last `k` steps of one agent, newest last.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MemoryWindow {
    capacity: usize,
    entries: VecDeque<MemoryEntry>,
}

impl MemoryWindow {
    pub fn new(capacity: usize) -> Self {
        MemoryWindow { capacity, entries: VecDeque::with_capacity(capacity) }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = &MemoryEntry> {
        self.entries.iter()
    }

    pub fn to_vec(&self) -> Vec<MemoryEntry> {
        self.entries.iter().cloned().collect()
    }

    /// Appends the newest pair, evicting the oldest beyond capacity.
    pub fn push(&mut self, observation: Observation, action: Action) {
        if self.capacity == 0 {
            return;
        }
        if self.entries.len() == self.capacity {
            self.entries.pop_front();
        }
        self.entries.push_back(MemoryEntry { observation, action });
    }
}

/// Value-style variant of [`MemoryWindow::push`].
pub fn push_memory(mut window: MemoryWindow, obs: Observation, act: Action) -> MemoryWindow {
    window.push(obs, act);
    window
}
