//! Inter-stage buffers: a bounded FIFO and a two-bank ping-pong buffer.

use std::collections::VecDeque;

/// Result of offering a token to a bounded channel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Push<T> {
    Accepted,
    /// Channel full; the token is handed back and the producer stalls.
    Backpressure(T),
}

impl<T> Push<T> {
    pub fn is_accepted(&self) -> bool {
        matches!(self, Push::Accepted)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Pop<T> {
    Token(T),
    /// Nothing to read; the consumer stalls.
    Stall,
}

impl<T> Pop<T> {
    pub fn token(self) -> Option<T> {
        match self {
            Pop::Token(t) => Some(t),
            Pop::Stall => None,
        }
    }
}

/// Bounded first-in-first-out buffer with per-iteration size tags.
///
/// The size tags play the role of the hardware `Size` registers: they let a
/// consumer tell how many of the queued tokens belong to the current
/// iteration without peeking at the next iteration's data.
#[derive(Debug, Clone)]
pub struct Fifo<T> {
    depth: usize,
    queue: VecDeque<T>,
    sizes: VecDeque<usize>,
    max_occupancy: usize,
}

impl<T> Fifo<T> {
    pub fn new(depth: usize) -> Self {
        Fifo {
            depth,
            queue: VecDeque::with_capacity(depth),
            sizes: VecDeque::new(),
            max_occupancy: 0,
        }
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn len(&self) -> usize {
        self.queue.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queue.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.queue.len() >= self.depth
    }

    /// Highest occupancy ever observed.
    pub fn max_occupancy(&self) -> usize {
        self.max_occupancy
    }

    pub fn push(&mut self, token: T) -> Push<T> {
        if self.is_full() {
            return Push::Backpressure(token);
        }
        self.queue.push_back(token);
        self.max_occupancy = self.max_occupancy.max(self.queue.len());
        Push::Accepted
    }

    pub fn pop(&mut self) -> Pop<T> {
        match self.queue.pop_front() {
            Some(t) => Pop::Token(t),
            None => Pop::Stall,
        }
    }

    pub fn front(&self) -> Option<&T> {
        self.queue.front()
    }

    /// Record how many tokens the iteration just pushed contains.
    pub fn tag_iteration(&mut self, size: usize) {
        self.sizes.push_back(size);
    }

    /// Size register of the oldest untaken iteration.
    pub fn take_size_tag(&mut self) -> Option<usize> {
        self.sizes.pop_front()
    }
}

/// The writer may not write: its next bank is still held by the reader.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BankBusy;

/// Two-bank ping-pong buffer with random-access reads of a committed bank.
///
/// The writer fills one bank while the reader holds the other. `commit`
/// publishes the writer's bank and moves the writer to the opposite bank.
/// Stale entries past a bank's committed size stay readable; they are dead
/// data and are overwritten by the next iteration.
#[derive(Debug, Clone)]
pub struct Pipo<T> {
    banks: [Vec<T>; 2],
    size: [usize; 2],
    committed: [bool; 2],
    writer: usize,
    cursor: usize,
    published: VecDeque<usize>,
    held: Option<usize>,
}

impl<T: Clone + Default> Pipo<T> {
    pub fn new(capacity: usize) -> Self {
        Pipo {
            banks: [vec![T::default(); capacity], vec![T::default(); capacity]],
            size: [0; 2],
            committed: [false; 2],
            writer: 0,
            cursor: 0,
            published: VecDeque::with_capacity(2),
            held: None,
        }
    }

    pub fn capacity(&self) -> usize {
        self.banks[0].len()
    }

    pub fn writer_bank(&self) -> usize {
        self.writer
    }

    pub fn reader_bank(&self) -> Option<usize> {
        self.held.or_else(|| self.published.front().copied())
    }

    fn writable(&self) -> Result<(), BankBusy> {
        if self.held == Some(self.writer) || self.published.contains(&self.writer) {
            Err(BankBusy)
        } else {
            Ok(())
        }
    }

    /// Random-access write into the writer bank.
    pub fn write(&mut self, index: usize, token: T) -> Result<(), BankBusy> {
        self.writable()?;
        self.committed[self.writer] = false;
        self.banks[self.writer][index] = token;
        self.cursor = self.cursor.max(index + 1);
        Ok(())
    }

    /// Sequential write at the writer cursor.
    pub fn push(&mut self, token: T) -> Result<(), BankBusy> {
        let i = self.cursor;
        self.write(i, token)
    }

    /// Publish the writer bank with its current fill as the iteration size.
    pub fn commit(&mut self) -> Result<(), BankBusy> {
        self.writable()?;
        let w = self.writer;
        self.size[w] = self.cursor;
        self.committed[w] = true;
        self.published.push_back(w);
        self.writer = 1 - w;
        self.cursor = 0;
        Ok(())
    }

    /// Take hold of the oldest published bank; returns its size.
    pub fn acquire(&mut self) -> Option<usize> {
        if self.held.is_some() {
            return None;
        }
        let b = self.published.pop_front()?;
        self.held = Some(b);
        Some(self.size[b])
    }

    /// Let the writer reuse the held bank.
    pub fn release(&mut self) {
        if let Some(b) = self.held.take() {
            self.committed[b] = false;
        }
    }

    /// Size register of the bank the reader currently sees.
    pub fn size(&self) -> usize {
        self.reader_bank().map_or(0, |b| self.size[b])
    }

    /// Read slot `index` of the reader's bank; the default token if no bank
    /// has ever been committed.
    pub fn read(&self, index: usize) -> T {
        match self.reader_bank() {
            Some(b) if self.committed[b] => self.banks[b][index].clone(),
            _ => T::default(),
        }
    }
}
