//! Independent reference implementations used as test oracles.
#![allow(dead_code)]

/// SplitMix64 written out from its published constants.
pub struct RefRng(pub u64);

impl RefRng {
    pub fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }

    pub fn unit(&mut self) -> f64 {
        (self.next() >> 11) as f64 / 9007199254740992.0
    }

    pub fn below(&mut self, n: usize) -> usize {
        ((self.next() as u128 * n as u128) >> 64) as usize
    }
}

/// Exhaustive argmin over squared distances, first index on ties.
pub fn brute_bmu(weights: &[Vec<f64>], x: &[f64]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, w) in weights.iter().enumerate() {
        let d: f64 = w.iter().zip(x).map(|(a, b)| (a - b).powi(2)).sum();
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    best
}

/// Mean over pixels of the minimum Euclidean distance to any weight.
pub fn brute_qe(weights: &[Vec<f64>], pixels: &[Vec<f64>]) -> f64 {
    let mut total = 0.0;
    for p in pixels {
        let mut best = f64::INFINITY;
        for w in weights {
            let d = w
                .iter()
                .zip(p)
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt();
            best = best.min(d);
        }
        total += best;
    }
    total / pixels.len() as f64
}

/// Online SOM training on a 2-D grid with a hard Chebyshev neighbourhood,
/// written as plainly as possible. `rng` must already sit past the
/// initialization draws.
#[allow(clippy::too_many_arguments)]
pub fn reference_train(
    grid: &mut [Vec<Vec<f64>>],
    pixels: &[Vec<f64>],
    iterations: u64,
    alpha_start: f64,
    alpha_end: f64,
    radius: i64,
    rng: &mut RefRng,
) {
    let rows = grid.len() as i64;
    let cols = grid[0].len() as i64;
    for t in 0..iterations {
        let x = &pixels[rng.below(pixels.len())];
        let (mut br, mut bc, mut bd) = (0i64, 0i64, f64::INFINITY);
        for r in 0..rows {
            for c in 0..cols {
                let w = &grid[r as usize][c as usize];
                let d: f64 = w.iter().zip(x).map(|(a, b)| (b - a) * (b - a)).sum();
                if d < bd {
                    bd = d;
                    br = r;
                    bc = c;
                }
            }
        }
        let alpha = if iterations > 1 {
            alpha_start + (alpha_end - alpha_start) * (t as f64 / (iterations - 1) as f64)
        } else {
            alpha_start
        };
        for r in 0..rows {
            for c in 0..cols {
                if (r - br).abs().max((c - bc).abs()) <= radius {
                    let w = &mut grid[r as usize][c as usize];
                    for k in 0..w.len() {
                        w[k] += alpha * (x[k] - w[k]);
                    }
                }
            }
        }
    }
}

pub fn pixels_of(img: &somqe::ImageGrid) -> Vec<Vec<f64>> {
    img.pixels().map(<[f64]>::to_vec).collect()
}

pub fn weights_of(lattice: &somqe::SomLattice) -> Vec<Vec<f64>> {
    lattice
        .weights()
        .chunks(lattice.dim())
        .map(<[f64]>::to_vec)
        .collect()
}
