//! Merging four filter-block lists into one bounded candidate list.
//!
//! Both variants are modelled on top of the real channel types so the buffer
//! discipline (sequential FIFO vs. random-access ping-pong) is exercised, not
//! just the selection policy.

use super::MergeVariant;
use crate::channel::{Fifo, Pipo, Pop};
use crate::model::Particle;

/// Number of filter blocks feeding the merger.
pub const MERGE_SOURCES: usize = 4;

/// Capacity of every source buffer.
const SOURCE_DEPTH: usize = 32;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MergeOutcome<T> {
    pub output: Vec<Particle>,
    /// Items belonging to this iteration that were read out and dropped
    /// (solution A) or left unread in a bank (solution B).
    pub discarded: Vec<Particle>,
    pub trace: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MergeATrace {
    pub sizes: [usize; MERGE_SOURCES],
    pub take: [usize; MERGE_SOURCES],
    /// Parallel read-out of every source FIFO: `max(S_i)` cycles.
    pub trim_cycles: u64,
    /// Sequential drain of the intermediate FIFOs: `sum(C_i)` cycles.
    pub merge_cycles: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MergeBTrace {
    /// Items moved to the target list.
    pub emit_steps: u64,
    /// Increments of the shared index register.
    pub index_steps: u64,
    /// One cycle to load the size registers, one per emitted item (the index
    /// advance folds into the emit that clears the last availability bit),
    /// one to signal completion.
    pub cycles: u64,
}

fn check_sources(lists: &[Vec<Particle>]) {
    assert_eq!(
        lists.len(),
        MERGE_SOURCES,
        "merger takes {MERGE_SOURCES} lists"
    );
    for l in lists {
        assert!(
            l.len() <= SOURCE_DEPTH,
            "source list longer than {SOURCE_DEPTH}"
        );
    }
}

/// Greedy take counts: `C_i = min(S_i, limit - sum(C_<i))`.
fn take_counts(sizes: [usize; MERGE_SOURCES], limit: usize) -> [usize; MERGE_SOURCES] {
    let mut left = limit;
    sizes.map(|s| {
        let c = s.min(left);
        left -= c;
        c
    })
}

/// FIFO-based merge with a trimming pass that removes every item of the
/// current iteration from the sources, keeping the first `C_i` of each.
pub fn merge_solution_a(lists: &[Vec<Particle>], limit: usize) -> MergeOutcome<MergeATrace> {
    check_sources(lists);
    let mut sources: Vec<Fifo<Particle>> = lists
        .iter()
        .map(|l| {
            let mut f = Fifo::new(SOURCE_DEPTH);
            for p in l {
                let _ = f.push(*p);
            }
            f.tag_iteration(l.len());
            f
        })
        .collect();
    let sizes: [usize; MERGE_SOURCES] =
        std::array::from_fn(|i| sources[i].take_size_tag().unwrap_or(0));
    let take = take_counts(sizes, limit);

    // Trimming: all four sources are read in lock-step, one item per cycle.
    let mut intermediate: Vec<Fifo<Particle>> = (0..MERGE_SOURCES)
        .map(|_| Fifo::new(SOURCE_DEPTH))
        .collect();
    let mut discarded = Vec::new();
    let trim_cycles = sizes.iter().copied().max().unwrap_or(0);
    for cycle in 0..trim_cycles {
        for i in 0..MERGE_SOURCES {
            if cycle >= sizes[i] {
                continue;
            }
            if let Pop::Token(p) = sources[i].pop() {
                if cycle < take[i] {
                    let _ = intermediate[i].push(p);
                } else {
                    discarded.push(p);
                }
            }
        }
    }

    let mut target = Fifo::new(limit.max(1));
    for (i, inter) in intermediate.iter_mut().enumerate() {
        for _ in 0..take[i] {
            if let Pop::Token(p) = inter.pop() {
                let _ = target.push(p);
            }
        }
    }
    let merge_cycles: usize = take.iter().sum();
    let mut output = Vec::with_capacity(merge_cycles);
    while let Pop::Token(p) = target.pop() {
        output.push(p);
    }
    MergeOutcome {
        output,
        discarded,
        trace: MergeATrace {
            sizes,
            take,
            trim_cycles: trim_cycles as u64,
            merge_cycles: merge_cycles as u64,
        },
    }
}

/// Ping-pong merge driven by one shared index register and four
/// availability bits; emits round-robin by element index with list-number
/// priority until the target holds `limit` items or the sources run dry.
pub fn merge_solution_b(lists: &[Vec<Particle>], limit: usize) -> MergeOutcome<MergeBTrace> {
    check_sources(lists);
    let mut banks: Vec<Pipo<Option<Particle>>> = lists
        .iter()
        .map(|l| {
            let mut b = Pipo::new(SOURCE_DEPTH);
            for p in l {
                b.push(Some(*p)).expect("fresh buffer is writable");
            }
            b.commit().expect("fresh buffer is writable");
            b
        })
        .collect();
    let sizes: [usize; MERGE_SOURCES] = std::array::from_fn(|i| banks[i].acquire().unwrap_or(0));

    let mut output = Vec::new();
    let mut consumed = [0usize; MERGE_SOURCES];
    let mut index = 0usize;
    let mut count = 0usize;
    let mut index_steps = 0u64;
    'merge: loop {
        // Step 1: availability bits against the size registers.
        let mut avail: [bool; MERGE_SOURCES] = std::array::from_fn(|i| index < sizes[i]);
        if !avail.iter().any(|a| *a) {
            break;
        }
        // Steps 2-3: drain the first available source until none is left.
        while let Some(i) = avail.iter().position(|a| *a) {
            if count == limit {
                break 'merge;
            }
            let p = banks[i].read(index).expect("index below size is populated");
            output.push(p);
            consumed[i] += 1;
            avail[i] = false;
            count += 1;
        }
        if count == limit {
            break;
        }
        // Step 4.
        index += 1;
        index_steps += 1;
    }

    let discarded = lists
        .iter()
        .zip(consumed)
        .flat_map(|(l, c)| {
            // Consumed items are always a prefix of each list.
            l[c..].iter().copied()
        })
        .collect();
    for b in &mut banks {
        b.release();
    }
    let emit_steps = output.len() as u64;
    MergeOutcome {
        output,
        discarded,
        trace: MergeBTrace {
            emit_steps,
            index_steps,
            cycles: emit_steps + 2,
        },
    }
}

/// Run the selected variant; returns `(output, discarded)`.
pub fn merge_with(
    variant: MergeVariant,
    lists: &[Vec<Particle>],
    limit: usize,
) -> (Vec<Particle>, Vec<Particle>) {
    match variant {
        MergeVariant::A => {
            let o = merge_solution_a(lists, limit);
            (o.output, o.discarded)
        }
        MergeVariant::B => {
            let o = merge_solution_b(lists, limit);
            (o.output, o.discarded)
        }
    }
}
