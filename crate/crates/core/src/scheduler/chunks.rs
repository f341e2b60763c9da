use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Frames of trailing output carried into the next chunk by default.
pub const DEFAULT_OVERLAP: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChunkEntry {
    pub start: usize,
    /// Exclusive.
    pub end: usize,
    /// Leading frames already produced by earlier chunks.
    pub context_count: usize,
}

impl ChunkEntry {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChunkPlan {
    entries: Vec<ChunkEntry>,
}

impl ChunkPlan {
    pub fn entries(&self) -> &[ChunkEntry] {
        &self.entries
    }

    /// Total frames covered.
    pub fn total(&self) -> usize {
        self.entries.last().map_or(0, |e| e.end)
    }

    /// Checks the plan against a clip length and chunk capacity.
    pub fn validate(&self, total: usize, capacity: usize) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(format!("invalid chunk plan: {m}")));
        let Some(first) = self.entries.first() else {
            return bad("no entries".into());
        };
        if first.start != 0 || first.context_count != 0 {
            return bad("first entry must start at 0 without context".into());
        }
        let mut produced = 0;
        for (k, e) in self.entries.iter().enumerate() {
            if e.end <= e.start || e.len() > capacity {
                return bad(format!("entry {k} has length {} (capacity {capacity})", e.len()));
            }
            if k > 0 {
                let prev = &self.entries[k - 1];
                if e.start <= prev.start {
                    return bad(format!("entry {k} does not advance"));
                }
            }
            if e.start > produced || e.context_count != produced - e.start {
                return bad(format!("entry {k} context does not match produced frames"));
            }
            if e.context_count >= e.len() {
                return bad(format!("entry {k} produces no new frames"));
            }
            produced = e.end;
        }
        if produced != total {
            return bad(format!("covers {produced} frames, clip has {total}"));
        }
        Ok(())
    }
}

/// Splits `total` frames into chunks of at most `capacity` frames, each
/// later chunk re-reading the last `overlap` produced frames as context.
/// When the tail would be short, the final chunk is moved earlier so it
/// ends exactly at `total`, enlarging its context instead of padding.
pub fn plan_chunks(total: usize, capacity: usize, overlap: usize) -> Result<ChunkPlan> {
    if total == 0 {
        return Err(Error::Empty("clip"));
    }
    if capacity == 0 {
        return Err(Error::InvalidArgument("chunk capacity must be >= 1".into()));
    }
    if overlap >= capacity {
        return Err(Error::InvalidArgument(format!(
            "overlap {overlap} must be smaller than chunk capacity {capacity}"
        )));
    }
    let mut entries = vec![ChunkEntry {
        start: 0,
        end: total.min(capacity),
        context_count: 0,
    }];
    let mut produced = entries[0].end;
    while produced < total {
        let mut start = produced - overlap;
        let mut end = start + capacity;
        if end > total {
            end = total;
            start = total - capacity;
        }
        entries.push(ChunkEntry {
            start,
            end,
            context_count: produced - start,
        });
        produced = end;
    }
    Ok(ChunkPlan { entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn spans(plan: &ChunkPlan) -> Vec<(usize, usize, usize)> {
        plan.entries()
            .iter()
            .map(|e| (e.start, e.end, e.context_count))
            .collect()
    }

    #[test]
    fn examples() {
        assert_eq!(
            spans(&plan_chunks(69, 25, 3).unwrap()),
            vec![(0, 25, 0), (22, 47, 3), (44, 69, 3)]
        );
        assert_eq!(spans(&plan_chunks(20, 25, 3).unwrap()), vec![(0, 20, 0)]);
        assert_eq!(spans(&plan_chunks(30, 25, 3).unwrap()), vec![(0, 25, 0), (5, 30, 20)]);
        assert_eq!(spans(&plan_chunks(50, 25, 0).unwrap()), vec![(0, 25, 0), (25, 50, 0)]);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(plan_chunks(10, 3, 3).is_err());
        assert!(plan_chunks(0, 25, 3).is_err());
        assert!(plan_chunks(10, 0, 0).is_err());
    }

    #[test]
    fn validate_catches_gaps() {
        let plan = ChunkPlan {
            entries: vec![
                ChunkEntry {
                    start: 0,
                    end: 5,
                    context_count: 0,
                },
                ChunkEntry {
                    start: 6,
                    end: 8,
                    context_count: 0,
                },
            ],
        };
        assert!(plan.validate(8, 5).is_err());
        assert!(plan_chunks(8, 5, 1).unwrap().validate(8, 5).is_ok());
        assert!(plan_chunks(8, 5, 1).unwrap().validate(9, 5).is_err());
    }

    proptest! {
        #[test]
        fn plans_cover_each_new_frame_once(total in 1usize..400, capacity in 1usize..40, overlap_frac in 0.0f64..1.0) {
            let overlap = ((capacity as f64) * overlap_frac) as usize;
            prop_assume!(overlap < capacity);
            let plan = plan_chunks(total, capacity, overlap).unwrap();
            prop_assert!(plan.validate(total, capacity).is_ok());
            let mut hits = vec![0; total];
            for e in plan.entries() {
                for h in &mut hits[e.start + e.context_count..e.end] {
                    *h += 1;
                }
            }
            prop_assert!(hits.iter().all(|&h| h == 1));
        }
    }
}
