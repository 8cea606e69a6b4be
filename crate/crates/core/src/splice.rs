//! Splice heuristic: the greedy lower-bound solver.
//!
//! Up to B+1 longest all-trusted runs of width >= R are claimed as anchored
//! segments; adjacent selected segments sharing a model merge without
//! charging the budget; remaining gaps are filled from whichever adjacent
//! selected model scores higher inside the gap.

use crate::error::{Error, Result};
use crate::types::{BinaryTrustMatrix, BudgetConfig, SelectionPlan};

/// A contiguous block of time slots. Segments partition the horizon at all
/// times; `selected_row` is the model claimed for the block, if any.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub start: usize,
    pub end: usize,
    pub selected_row: Option<usize>,
}

impl Segment {
    fn unselected(start: usize, end: usize) -> Self {
        Segment { start, end, selected_row: None }
    }

    pub fn is_selected(&self) -> bool {
        self.selected_row.is_some()
    }

    pub fn width(&self) -> usize {
        self.end - self.start
    }
}

/// A maximal run of 1s found inside a segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunLocation {
    pub row: usize,
    pub start: usize,
    pub len: usize,
}

/// Longest run of 1s of length >= `rate` fully inside `segment`.
///
/// Ties break to the lowest row index, then the earliest start.
pub fn longest_run(
    matrix: &BinaryTrustMatrix,
    segment: &Segment,
    rate: usize,
) -> Option<RunLocation> {
    debug_assert!(rate >= 1);
    let mut best: Option<RunLocation> = None;
    for row in 0..matrix.model_count() {
        let mut run_start = segment.start;
        let mut run_len = 0usize;
        for j in segment.start..=segment.end {
            if j < segment.end && matrix.trusted(row, j) {
                if run_len == 0 {
                    run_start = j;
                }
                run_len += 1;
            } else {
                if run_len >= rate && best.is_none_or(|b| run_len > b.len) {
                    best = Some(RunLocation { row, start: run_start, len: run_len });
                }
                run_len = 0;
            }
        }
    }
    best
}

fn merge_adjacent_unselected(segments: &mut Vec<Segment>) {
    let mut i = 0;
    while i + 1 < segments.len() {
        if !segments[i].is_selected() && !segments[i + 1].is_selected() {
            segments[i].end = segments[i + 1].end;
            segments.remove(i + 1);
        } else {
            i += 1;
        }
    }
}

/// Runs the Splice heuristic and returns a feasible plan.
pub fn splice_select(
    matrix: &BinaryTrustMatrix,
    config: &BudgetConfig,
) -> Result<SelectionPlan> {
    let slots = matrix.slot_count();
    config.validate_for_horizon(slots)?;

    let mut segments = vec![Segment::unselected(0, slots)];
    let mut charged = 0usize;

    // Claim phase: pick the globally longest qualifying run, claim its span,
    // and split the remainder of its segment back into unselected pieces.
    while charged <= config.budget && segments.iter().any(|s| !s.is_selected()) {
        let mut best: Option<(usize, RunLocation)> = None;
        for (idx, seg) in segments.iter().enumerate() {
            if seg.is_selected() || seg.width() < config.rate {
                continue;
            }
            if let Some(run) = longest_run(matrix, seg, config.rate) {
                // Longest run wins; ties go to the lowest row, then the
                // earliest start.
                let better = match best {
                    None => true,
                    Some((_, b)) => {
                        run.len > b.len
                            || (run.len == b.len && (run.row, run.start) < (b.row, b.start))
                    }
                };
                if better {
                    best = Some((idx, run));
                }
            }
        }
        let Some((idx, run)) = best else {
            break; // no qualifying run anywhere
        };

        let seg = segments.remove(idx);
        let mut insert_at = idx;
        if seg.start < run.start {
            segments.insert(insert_at, Segment::unselected(seg.start, run.start));
            insert_at += 1;
        }
        segments.insert(
            insert_at,
            Segment {
                start: run.start,
                end: run.start + run.len,
                selected_row: Some(run.row),
            },
        );
        let claimed = insert_at;
        if run.start + run.len < seg.end {
            segments.insert(insert_at + 1, Segment::unselected(run.start + run.len, seg.end));
        }

        // Merge with an adjacent selected segment sharing the model; such a
        // claim extends an existing block and does not charge the budget.
        let mut merged = false;
        if claimed + 1 < segments.len()
            && segments[claimed + 1].selected_row == Some(run.row)
        {
            segments[claimed].end = segments[claimed + 1].end;
            segments.remove(claimed + 1);
            merged = true;
        }
        if claimed > 0 && segments[claimed - 1].selected_row == Some(run.row) {
            segments[claimed - 1].end = segments[claimed].end;
            segments.remove(claimed);
            merged = true;
        }
        if !merged {
            charged += 1;
        }
    }

    merge_adjacent_unselected(&mut segments);

    // No run of width >= R exists at all: fall back to the single model with
    // the largest total sum, deployed for the whole horizon.
    if segments.iter().all(|s| !s.is_selected()) {
        let row = (0..matrix.model_count())
            .max_by_key(|&i| (matrix.row_sum(i, 0..slots), std::cmp::Reverse(i)))
            .ok_or_else(|| Error::internal("empty matrix in splice fallback"))?;
        return SelectionPlan::from_assignment(vec![row; slots], matrix);
    }

    // Fill phase: each remaining gap adopts the adjacent selected model with
    // the larger in-gap row sum; the right side wins only on a strict win.
    let mut assignment = vec![usize::MAX; slots];
    for (idx, seg) in segments.iter().enumerate() {
        if let Some(row) = seg.selected_row {
            assignment[seg.start..seg.end].fill(row);
            continue;
        }
        let left = idx
            .checked_sub(1)
            .and_then(|i| segments[i].selected_row);
        let right = segments.get(idx + 1).and_then(|s| s.selected_row);
        let row = match (left, right) {
            (Some(l), Some(r)) => {
                let left_sum = matrix.row_sum(l, seg.start..seg.end);
                let right_sum = matrix.row_sum(r, seg.start..seg.end);
                if right_sum > left_sum { r } else { l }
            }
            (Some(l), None) => l,
            (None, Some(r)) => r,
            (None, None) => {
                return Err(Error::internal("unselected segment with no neighbors"));
            }
        };
        assignment[seg.start..seg.end].fill(row);
    }

    SelectionPlan::from_assignment(assignment, matrix)
}

/// The worked 5x16 example: three width-4 anchors for models m3, m2, m4
/// and two gaps that resolve to the right-hand neighbor.
#[cfg(test)]
pub(crate) fn worked_example_matrix() -> BinaryTrustMatrix {
    BinaryTrustMatrix::from_rows(vec![
        vec![0, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
        vec![0, 0, 0, 0, 1, 0, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0],
        vec![1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
        vec![0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 0, 1, 1, 1, 1],
        vec![0, 0, 0, 0, 0, 1, 0, 1, 1, 0, 0, 1, 0, 0, 1, 0],
    ])
    .unwrap()
}
