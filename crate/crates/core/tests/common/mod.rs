#![allow(dead_code)]

use rainweave::RainRng;

/// Every connected top-to-bottom path through a `rows x cols` matrix,
/// scored by left-to-right summation. Returns (best cost, all minimizers).
pub fn brute_force_vertical(rows: usize, cols: usize, e: &[f64]) -> (f64, Vec<Vec<usize>>) {
    let mut best = f64::INFINITY;
    let mut winners = Vec::new();
    let mut path = Vec::with_capacity(rows);
    fn walk(
        rows: usize,
        cols: usize,
        e: &[f64],
        path: &mut Vec<usize>,
        acc: f64,
        best: &mut f64,
        winners: &mut Vec<Vec<usize>>,
    ) {
        let i = path.len();
        if i == rows {
            if acc < *best {
                *best = acc;
                winners.clear();
            }
            if acc == *best {
                winners.push(path.clone());
            }
            return;
        }
        let candidates: Vec<usize> = match path.last() {
            None => (0..cols).collect(),
            Some(&j) => (j.saturating_sub(1)..=(j + 1).min(cols - 1)).collect(),
        };
        for j in candidates {
            path.push(j);
            walk(rows, cols, e, path, acc + e[i * cols + j], best, winners);
            path.pop();
        }
    }
    walk(rows, cols, e, &mut path, 0.0, &mut best, &mut winners);
    (best, winners)
}

pub fn random_matrix(
    rng: &mut RainRng,
    max_rows: usize,
    max_cols: usize,
) -> (usize, usize, Vec<f64>) {
    let rows = 1 + rng.index(max_rows);
    let cols = 1 + rng.index(max_cols);
    // A coarse value set makes ties common enough to exercise tie-breaking.
    let coarse = rng.index(2) == 0;
    let data = (0..rows * cols)
        .map(|_| {
            if coarse {
                rng.index(4) as f64
            } else {
                rng.unit_f64() * 10.0
            }
        })
        .collect();
    (rows, cols, data)
}

pub fn random_codes(rng: &mut RainRng, n: usize) -> Vec<u8> {
    (0..n).map(|_| rng.index(256) as u8).collect()
}
