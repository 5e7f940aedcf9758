//! Straightforward reference implementations used to cross-check the library.
#![allow(dead_code)]

use std::collections::BTreeSet;

use vt_core::{BBox, BinaryMask, SceneImage};

/// Argmax of the between-class variance over every split, recomputing both
/// classes from scratch; the smallest threshold wins ties.
pub fn otsu(hist: &[u64; 256]) -> Option<u8> {
    if hist.iter().filter(|c| **c > 0).count() < 2 {
        return None;
    }
    let total: f64 = hist.iter().map(|c| *c as f64).sum();
    let mut best = (0u8, -1.0f64);
    for t in 0..255usize {
        let (mut n0, mut s0, mut n1, mut s1) = (0.0, 0.0, 0.0, 0.0);
        for (v, c) in hist.iter().enumerate() {
            let c = *c as f64;
            if v <= t {
                n0 += c;
                s0 += v as f64 * c;
            } else {
                n1 += c;
                s1 += v as f64 * c;
            }
        }
        let var = if n0 == 0.0 || n1 == 0.0 {
            0.0
        } else {
            let d = s0 / n0 - s1 / n1;
            (n0 / total) * (n1 / total) * d * d
        };
        // relative slack absorbs summation-order rounding
        if var > best.1 * (1.0 + 1e-12) {
            best = (t as u8, var);
        }
    }
    Some(best.0)
}

/// Second derivatives of the natural cubic spline by dense Gaussian
/// elimination with partial pivoting on the full n x n system.
pub fn spline_moments(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    if n < 3 {
        return vec![0.0; n];
    }
    let mut a = vec![vec![0.0; n + 1]; n];
    a[0][0] = 1.0;
    a[n - 1][n - 1] = 1.0;
    for i in 1..n - 1 {
        let h0 = x[i] - x[i - 1];
        let h1 = x[i + 1] - x[i];
        a[i][i - 1] = h0 / 6.0;
        a[i][i] = (h0 + h1) / 3.0;
        a[i][i + 1] = h1 / 6.0;
        a[i][n] = (y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0;
    }
    for col in 0..n {
        let p = (col..n)
            .max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs()))
            .unwrap();
        a.swap(col, p);
        for r in 0..n {
            if r != col {
                let f = a[r][col] / a[col][col];
                for c in col..=n {
                    a[r][c] -= f * a[col][c];
                }
            }
        }
    }
    (0..n).map(|i| a[i][n] / a[i][i]).collect()
}

pub fn spline_eval(x: &[f64], y: &[f64], m: &[f64], t: f64) -> f64 {
    let n = x.len();
    if n == 1 {
        return y[0];
    }
    let i = (0..n - 1).rev().find(|&i| x[i] <= t).unwrap_or(0);
    let h = x[i + 1] - x[i];
    let a = (x[i + 1] - t) / h;
    let b = (t - x[i]) / h;
    a * y[i] + b * y[i + 1] + ((a * a * a - a) * m[i] + (b * b * b - b) * m[i + 1]) * h * h / 6.0
}

fn count(seq: &[String], gram: &[String]) -> usize {
    if seq.len() < gram.len() {
        return 0;
    }
    (0..=seq.len() - gram.len())
        .filter(|&i| &seq[i..i + gram.len()] == gram)
        .count()
}

/// Sentence BLEU-n, counting n-grams by linear scans: clipped multi-reference
/// precision, closest-length brevity penalty, add-one smoothing from order 2.
pub fn bleu(cand: &[String], refs: &[Vec<String>], n: usize) -> f64 {
    if cand.is_empty() {
        return 0.0;
    }
    let mut logp = 0.0;
    for k in 1..=n {
        let total = cand.len().saturating_sub(k - 1);
        let mut seen: Vec<&[String]> = Vec::new();
        let mut matched = 0;
        if cand.len() >= k {
            for i in 0..=cand.len() - k {
                let g = &cand[i..i + k];
                if seen.contains(&g) {
                    continue;
                }
                seen.push(g);
                let best = refs.iter().map(|r| count(r, g)).max().unwrap_or(0);
                matched += count(cand, g).min(best);
            }
        }
        let p = if k == 1 {
            matched as f64 / total as f64
        } else {
            (matched as f64 + 1.0) / (total as f64 + 1.0)
        };
        if p == 0.0 {
            return 0.0;
        }
        logp += p.ln();
    }
    let c = cand.len() as f64;
    let mut r = refs[0].len();
    for rf in refs {
        let d = (rf.len() as f64 - c).abs();
        let best = (r as f64 - c).abs();
        if d < best || (d == best && rf.len() < r) {
            r = rf.len();
        }
    }
    let bp = if c >= r as f64 { 1.0 } else { (1.0 - r as f64 / c).exp() };
    100.0 * bp * (logp / n as f64).exp()
}

/// Hard composite, pixel by pixel.
pub fn composite(bg: &SceneImage, fg: &SceneImage, mask: &BinaryMask) -> SceneImage {
    let mut out = bg.clone();
    for y in 0..bg.height() {
        for x in 0..bg.width() {
            if mask.get(x, y) {
                out.put(x, y, fg.get(x, y));
            }
        }
    }
    out
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

fn gap(a0: i64, a1: i64, b0: i64, b1: i64) -> f64 {
    (a0.max(b0) - a1.min(b1)).max(0) as f64
}

/// Classes of the transitive closure (Warshall) of a symmetric relation.
fn closure_classes(n: usize, rel: impl Fn(usize, usize) -> bool) -> Vec<BTreeSet<usize>> {
    let mut r = vec![vec![false; n]; n];
    for i in 0..n {
        for j in 0..n {
            r[i][j] = i == j || rel(i, j) || rel(j, i);
        }
    }
    for k in 0..n {
        for i in 0..n {
            if r[i][k] {
                for j in 0..n {
                    if r[k][j] {
                        r[i][j] = true;
                    }
                }
            }
        }
    }
    let mut classes: Vec<BTreeSet<usize>> = Vec::new();
    for i in 0..n {
        let c: BTreeSet<usize> = (0..n).filter(|&j| r[i][j]).collect();
        if !classes.contains(&c) {
            classes.push(c);
        }
    }
    classes
}

/// Paragraphs as sets of lines, lines as sets of box indices.
pub type Partition = BTreeSet<BTreeSet<BTreeSet<usize>>>;

/// Lines: closure of "centers within half the smaller height and horizontal
/// gap within 1.5 median heights". Paragraphs: closure over line boxes of
/// "vertical gap within 0.8 median line heights and horizontal overlap of at
/// least 0.2 of the narrower line".
pub fn group(boxes: &[BBox]) -> Partition {
    let med_h = median(boxes.iter().map(|b| b.h as f64).collect());
    let line_rel = |i: usize, j: usize| {
        let (a, b) = (&boxes[i], &boxes[j]);
        let dy = ((2 * a.y as i64 + a.h as i64) - (2 * b.y as i64 + b.h as i64)).abs() as f64 / 2.0;
        let g = gap(a.x as i64, a.x as i64 + a.w as i64, b.x as i64, b.x as i64 + b.w as i64);
        dy <= 0.5 * a.h.min(b.h) as f64 && g <= 1.5 * med_h
    };
    let lines = closure_classes(boxes.len(), line_rel);
    let line_box = |l: &BTreeSet<usize>| {
        let x0 = l.iter().map(|&i| boxes[i].x as i64).min().unwrap();
        let y0 = l.iter().map(|&i| boxes[i].y as i64).min().unwrap();
        let x1 = l.iter().map(|&i| boxes[i].x as i64 + boxes[i].w as i64).max().unwrap();
        let y1 = l.iter().map(|&i| boxes[i].y as i64 + boxes[i].h as i64).max().unwrap();
        (x0, y0, x1, y1)
    };
    let line_h: Vec<f64> = lines
        .iter()
        .map(|l| median(l.iter().map(|&i| boxes[i].h as f64).collect()))
        .collect();
    let med_lh = median(line_h);
    let lb: Vec<(i64, i64, i64, i64)> = lines.iter().map(line_box).collect();
    let para_rel = |i: usize, j: usize| {
        let (a, b) = (lb[i], lb[j]);
        let vgap = gap(a.1, a.3, b.1, b.3);
        let overlap = (a.2.min(b.2) - a.0.max(b.0)).max(0) as f64;
        let narrower = (a.2 - a.0).min(b.2 - b.0) as f64;
        vgap <= 0.8 * med_lh && overlap / narrower >= 0.2
    };
    closure_classes(lines.len(), para_rel)
        .into_iter()
        .map(|p| p.into_iter().map(|l| lines[l].clone()).collect())
        .collect()
}

/// Plain Zhang-Suen thinning on a zero-padded grid, to completion.
pub fn zhang_suen(mask: &BinaryMask) -> BinaryMask {
    let (w, h) = (mask.width() as usize, mask.height() as usize);
    let mut g = vec![vec![0u8; w + 2]; h + 2];
    for y in 0..h {
        for x in 0..w {
            g[y + 1][x + 1] = mask.get(x as u32, y as u32) as u8;
        }
    }
    loop {
        let mut changed = false;
        for step in 0..2 {
            let mut del = Vec::new();
            for y in 1..=h {
                for x in 1..=w {
                    if g[y][x] == 0 {
                        continue;
                    }
                    // P2..P9 clockwise from north
                    let p = [
                        g[y - 1][x],
                        g[y - 1][x + 1],
                        g[y][x + 1],
                        g[y + 1][x + 1],
                        g[y + 1][x],
                        g[y + 1][x - 1],
                        g[y][x - 1],
                        g[y - 1][x - 1],
                    ];
                    let b: u8 = p.iter().sum();
                    let a = (0..8).filter(|&i| p[i] == 0 && p[(i + 1) % 8] == 1).count();
                    let (p2, p4, p6, p8) = (p[0], p[2], p[4], p[6]);
                    let ok = if step == 0 {
                        p2 * p4 * p6 == 0 && p4 * p6 * p8 == 0
                    } else {
                        p2 * p4 * p8 == 0 && p2 * p6 * p8 == 0
                    };
                    if (2..=6).contains(&b) && a == 1 && ok {
                        del.push((y, x));
                    }
                }
            }
            changed |= !del.is_empty();
            for (y, x) in del {
                g[y][x] = 0;
            }
        }
        if !changed {
            break;
        }
    }
    BinaryMask::from_fn(w as u32, h as u32, |x, y| g[y as usize + 1][x as usize + 1] == 1)
}

/// Mask from rows of `#` and `.`.
pub fn mask_from_rows(rows: &[&str]) -> BinaryMask {
    BinaryMask::from_fn(rows[0].len() as u32, rows.len() as u32, |x, y| {
        rows[y as usize].as_bytes()[x as usize] == b'#'
    })
}

pub fn mask_rows(m: &BinaryMask) -> Vec<String> {
    (0..m.height())
        .map(|y| (0..m.width()).map(|x| if m.get(x, y) { '#' } else { '.' }).collect())
        .collect()
}
