//! Sliding-window maxima: for every cell of a box, the maximum of a value
//! attached to each sub-cube of a given side that contains the cell.

use std::collections::VecDeque;

/// `out[c] = max(out[c], max{ values[b] : c - width < b <= c, b < values.len() })`
/// for `c in 0..out.len()`; strided access so it serves both axes of a 2-D box.
fn window_max_strided(
    values: &[f64],
    v_offset: usize,
    v_stride: usize,
    anchors: usize,
    width: usize,
    out: &mut [f64],
    o_offset: usize,
    o_stride: usize,
    cells: usize,
    deque: &mut VecDeque<usize>,
) {
    deque.clear();
    for c in 0..cells {
        if c < anchors {
            let v = values[v_offset + c * v_stride];
            while let Some(&back) = deque.back() {
                if values[v_offset + back * v_stride] <= v {
                    deque.pop_back();
                } else {
                    break;
                }
            }
            deque.push_back(c);
        }
        while let Some(&front) = deque.front() {
            if front + width <= c {
                deque.pop_front();
            } else {
                break;
            }
        }
        if let Some(&front) = deque.front() {
            let v = values[v_offset + front * v_stride];
            let slot = &mut out[o_offset + c * o_stride];
            if v > *slot {
                *slot = v;
            }
        }
    }
}

/// Scratch buffers reused across window passes.
#[derive(Default)]
pub struct WindowScratch {
    deque: VecDeque<usize>,
    tmp: Vec<f64>,
}

/// Folds the side-`width` cube values of a `cells^n` box into `out`.
///
/// `values` holds one value per anchor (`anchors = cells - width + 1` per
/// axis, first coordinate fastest); `out` holds one value per cell.
pub fn fold_window_max(
    n: usize,
    cells: usize,
    width: usize,
    values: &[f64],
    out: &mut [f64],
    scratch: &mut WindowScratch,
) {
    let anchors = cells + 1 - width;
    if n == 1 {
        window_max_strided(values, 0, 1, anchors, width, out, 0, 1, cells, &mut scratch.deque);
        return;
    }
    // pass 1 along axis 0: anchors x anchors -> cells x anchors
    scratch.tmp.clear();
    scratch.tmp.resize(cells * anchors, f64::NEG_INFINITY);
    for row in 0..anchors {
        window_max_strided(
            values,
            row * anchors,
            1,
            anchors,
            width,
            &mut scratch.tmp,
            row * cells,
            1,
            cells,
            &mut scratch.deque,
        );
    }
    // pass 2 along axis 1: cells x anchors -> cells x cells
    for col in 0..cells {
        window_max_strided(
            &scratch.tmp,
            col,
            cells,
            anchors,
            width,
            out,
            col,
            cells,
            cells,
            &mut scratch.deque,
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(n: usize, cells: usize, width: usize, values: &[f64]) -> Vec<f64> {
        let anchors = cells + 1 - width;
        let mut out = vec![f64::NEG_INFINITY; cells.pow(n as u32)];
        if n == 1 {
            for (c, o) in out.iter_mut().enumerate() {
                for b in 0..anchors {
                    if b <= c && c < b + width {
                        *o = o.max(values[b]);
                    }
                }
            }
        } else {
            for c1 in 0..cells {
                for c0 in 0..cells {
                    for b1 in 0..anchors {
                        for b0 in 0..anchors {
                            if b0 <= c0 && c0 < b0 + width && b1 <= c1 && c1 < b1 + width {
                                let o = &mut out[c0 + cells * c1];
                                *o = o.max(values[b0 + anchors * b1]);
                            }
                        }
                    }
                }
            }
        }
        out
    }

    #[test]
    fn matches_brute_force() {
        let mut scratch = WindowScratch::default();
        for n in [1, 2] {
            for cells in 1usize..7 {
                for width in 1..=cells {
                    let anchors = cells + 1 - width;
                    let values: Vec<f64> = (0..anchors.pow(n as u32))
                        .map(|i| ((i * 37 + 11) % 13) as f64)
                        .collect();
                    let mut out = vec![f64::NEG_INFINITY; cells.pow(n as u32)];
                    fold_window_max(n, cells, width, &values, &mut out, &mut scratch);
                    assert_eq!(out, brute(n, cells, width, &values), "n={n} cells={cells} width={width}");
                }
            }
        }
    }
}
