/// One step of a minimum-cost edit script turning a reference into a hypothesis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EditOp {
    Match {
        reference: usize,
        hypothesis: usize,
    },
    Substitute {
        reference: usize,
        hypothesis: usize,
    },
    /// Reference item with no counterpart in the hypothesis.
    Delete {
        reference: usize,
    },
    /// Hypothesis item with no counterpart in the reference.
    Insert {
        hypothesis: usize,
    },
}

/// Unit-cost Levenshtein alignment, in reference order.
///
/// Backtracking prefers the diagonal (match or substitution), then deletion,
/// then insertion, so the script is deterministic.
pub fn edit_script<T: PartialEq>(reference: &[T], hypothesis: &[T]) -> Vec<EditOp> {
    let (n, m) = (reference.len(), hypothesis.len());
    let w = m + 1;
    let mut d = vec![0usize; (n + 1) * w];
    for i in 0..=n {
        d[i * w] = i;
    }
    for (j, cell) in d[..w].iter_mut().enumerate() {
        *cell = j;
    }
    for i in 1..=n {
        for j in 1..=m {
            let sub = usize::from(reference[i - 1] != hypothesis[j - 1]);
            d[i * w + j] = (d[(i - 1) * w + j - 1] + sub)
                .min(d[(i - 1) * w + j] + 1)
                .min(d[i * w + j - 1] + 1);
        }
    }

    let mut ops = Vec::with_capacity(n.max(m));
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        let here = d[i * w + j];
        if i > 0 && j > 0 {
            let same = reference[i - 1] == hypothesis[j - 1];
            if here == d[(i - 1) * w + j - 1] + usize::from(!same) {
                ops.push(if same {
                    EditOp::Match {
                        reference: i - 1,
                        hypothesis: j - 1,
                    }
                } else {
                    EditOp::Substitute {
                        reference: i - 1,
                        hypothesis: j - 1,
                    }
                });
                i -= 1;
                j -= 1;
                continue;
            }
        }
        if i > 0 && here == d[(i - 1) * w + j] + 1 {
            ops.push(EditOp::Delete { reference: i - 1 });
            i -= 1;
        } else {
            ops.push(EditOp::Insert { hypothesis: j - 1 });
            j -= 1;
        }
    }
    ops.reverse();
    ops
}
