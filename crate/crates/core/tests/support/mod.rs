//! Straightforward reference implementations used as test oracles.

#![allow(dead_code)]

use lanecue_core::svm::{Kernel, SvmModel};

/// Gray → blur → Sobel → NMS → hysteresis, written out longhand.
pub mod canny {
    fn gray(rgb: &[u8]) -> Vec<i64> {
        rgb.chunks(3)
            .map(|p| {
                let num = 299 * p[0] as i64 + 587 * p[1] as i64 + 114 * p[2] as i64;
                (num + 500) / 1000
            })
            .collect()
    }

    fn px(img: &[i64], w: usize, h: usize, x: i64, y: i64) -> i64 {
        let x = x.max(0).min(w as i64 - 1) as usize;
        let y = y.max(0).min(h as i64 - 1) as usize;
        img[y * w + x]
    }

    fn blur(img: &[i64], w: usize, h: usize, size: usize, sigma: f64) -> Vec<i64> {
        let r = (size / 2) as i64;
        let mut weights = Vec::new();
        let mut total = 0.0;
        for j in -r..=r {
            for i in -r..=r {
                let v = (-((i * i + j * j) as f64) / (2.0 * sigma * sigma)).exp();
                weights.push(v);
                total += v;
            }
        }
        let mut out = vec![0; w * h];
        for y in 0..h as i64 {
            for x in 0..w as i64 {
                let mut acc = 0.0;
                let mut k = 0;
                for j in -r..=r {
                    for i in -r..=r {
                        acc += weights[k] / total * px(img, w, h, x + i, y + j) as f64;
                        k += 1;
                    }
                }
                out[y as usize * w + x as usize] = acc.round() as i64;
            }
        }
        out
    }

    /// Integer Sobel components.
    pub fn sobel(img: &[i64], w: usize, h: usize) -> (Vec<i64>, Vec<i64>) {
        let mut gx = vec![0; w * h];
        let mut gy = vec![0; w * h];
        const KX: [[i64; 3]; 3] = [[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]];
        const KY: [[i64; 3]; 3] = [[-1, -2, -1], [0, 0, 0], [1, 2, 1]];
        for y in 0..h as i64 {
            for x in 0..w as i64 {
                let (mut sx, mut sy) = (0, 0);
                for j in 0..3 {
                    for i in 0..3 {
                        let v = px(img, w, h, x + i as i64 - 1, y + j as i64 - 1);
                        sx += KX[j][i] * v;
                        sy += KY[j][i] * v;
                    }
                }
                gx[y as usize * w + x as usize] = sx;
                gy[y as usize * w + x as usize] = sy;
            }
        }
        (gx, gy)
    }

    pub fn edges(rgb: &[u8], w: usize, h: usize, low: f64, high: f64, size: usize, sigma: f64) -> Vec<u8> {
        let g = blur(&gray(rgb), w, h, size, sigma);
        let (gx, gy) = sobel(&g, w, h);
        let mag: Vec<f64> = gx
            .iter()
            .zip(&gy)
            .map(|(&a, &b)| ((a * a + b * b) as f64).sqrt() / 4.0)
            .collect();
        let m = |x: i64, y: i64| mag[px_index(w, h, x, y)];

        let mut strong = vec![false; w * h];
        let mut weak = vec![false; w * h];
        for y in 0..h as i64 {
            for x in 0..w as i64 {
                let i = y as usize * w + x as usize;
                if mag[i] == 0.0 {
                    continue;
                }
                let mut deg = (gy[i] as f64).atan2(gx[i] as f64).to_degrees();
                if deg < 0.0 {
                    deg += 180.0;
                }
                let (a, b) = if deg < 22.5 || deg >= 157.5 {
                    (m(x - 1, y), m(x + 1, y))
                } else if deg < 67.5 {
                    (m(x - 1, y - 1), m(x + 1, y + 1))
                } else if deg < 112.5 {
                    (m(x, y - 1), m(x, y + 1))
                } else {
                    (m(x + 1, y - 1), m(x - 1, y + 1))
                };
                if mag[i] >= a && mag[i] >= b {
                    strong[i] = mag[i] >= high;
                    weak[i] = mag[i] >= low && mag[i] < high;
                }
            }
        }

        let mut out: Vec<u8> = strong.iter().map(|&s| s as u8).collect();
        loop {
            let mut changed = false;
            for y in 0..h as i64 {
                for x in 0..w as i64 {
                    let i = y as usize * w + x as usize;
                    if !weak[i] || out[i] == 1 {
                        continue;
                    }
                    let touches = (-1..=1).any(|dy: i64| {
                        (-1..=1).any(|dx: i64| {
                            let (nx, ny) = (x + dx, y + dy);
                            nx >= 0
                                && ny >= 0
                                && nx < w as i64
                                && ny < h as i64
                                && out[ny as usize * w + nx as usize] == 1
                        })
                    });
                    if touches {
                        out[i] = 1;
                        changed = true;
                    }
                }
            }
            if !changed {
                return out;
            }
        }
    }

    fn px_index(w: usize, h: usize, x: i64, y: i64) -> usize {
        let x = x.max(0).min(w as i64 - 1) as usize;
        let y = y.max(0).min(h as i64 - 1) as usize;
        y * w + x
    }

    /// Per-pixel gradient magnitude of a gray plane, no blur.
    pub fn magnitudes(gray: &[u8], w: usize, h: usize) -> Vec<f64> {
        let img: Vec<i64> = gray.iter().map(|&v| v as i64).collect();
        let (gx, gy) = sobel(&img, w, h);
        gx.iter()
            .zip(&gy)
            .map(|(&a, &b)| ((a * a + b * b) as f64).sqrt())
            .collect()
    }
}

pub fn kernel_matrix(xs: &[Vec<f64>], kernel: Kernel) -> Vec<Vec<f64>> {
    xs.iter()
        .map(|a| {
            xs.iter()
                .map(|b| match kernel {
                    Kernel::Linear => a.iter().zip(b).map(|(p, q)| p * q).sum(),
                    Kernel::Rbf { gamma } => {
                        let d: f64 = a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum();
                        (-gamma * d).exp()
                    }
                })
                .collect()
        })
        .collect()
}

fn signed_q(xs: &[Vec<f64>], ys: &[f64], kernel: Kernel) -> Vec<Vec<f64>> {
    let k = kernel_matrix(xs, kernel);
    (0..xs.len())
        .map(|i| (0..xs.len()).map(|j| ys[i] * ys[j] * k[i][j]).collect())
        .collect()
}

pub fn dual_value(q: &[Vec<f64>], alpha: &[f64]) -> f64 {
    let n = alpha.len();
    let mut quad = 0.0;
    for i in 0..n {
        for j in 0..n {
            quad += alpha[i] * alpha[j] * q[i][j];
        }
    }
    alpha.iter().sum::<f64>() - 0.5 * quad
}

/// Euclidean projection onto `{0 ≤ α ≤ C, yᵀα = 0}` by bisection on the
/// multiplier of the equality constraint.
fn project(z: &[f64], ys: &[f64], c: f64) -> Vec<f64> {
    let at = |nu: f64| -> Vec<f64> {
        z.iter()
            .zip(ys)
            .map(|(&zi, &yi)| (zi - nu * yi).clamp(0.0, c))
            .collect()
    };
    let balance = |a: &[f64]| a.iter().zip(ys).map(|(a, y)| a * y).sum::<f64>();
    let bound = z.iter().map(|v| v.abs()).fold(c, f64::max) + c;
    let (mut lo, mut hi) = (-bound, bound);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if balance(&at(mid)) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    at(0.5 * (lo + hi))
}

/// Maximizes the C-SVC dual with accelerated projected gradient.
/// Returns `(alpha, objective)`.
pub fn qp_dual(xs: &[Vec<f64>], ys: &[f64], kernel: Kernel, c: f64) -> (Vec<f64>, f64) {
    let n = xs.len();
    let q = signed_q(xs, ys, kernel);
    let lipschitz: f64 = (0..n).map(|i| q[i].iter().map(|v| v.abs()).sum::<f64>()).fold(1e-12, f64::max);
    let step = 1.0 / lipschitz;
    let grad = |a: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|i| 1.0 - (0..n).map(|j| q[i][j] * a[j]).sum::<f64>())
            .collect()
    };
    let mut x = vec![0.0; n];
    let mut y = x.clone();
    let mut t = 1.0f64;
    let mut best = (x.clone(), dual_value(&q, &x));
    for _ in 0..60_000 {
        let g = grad(&y);
        let z: Vec<f64> = y.iter().zip(&g).map(|(a, g)| a + step * g).collect();
        let next = project(&z, ys, c);
        let value = dual_value(&q, &next);
        if value < dual_value(&q, &x) {
            // restart momentum when the objective drops
            t = 1.0;
            y = x.clone();
            continue;
        }
        let t_next = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        y = next
            .iter()
            .zip(&x)
            .map(|(a, b)| a + (t - 1.0) / t_next * (a - b))
            .collect();
        x = next;
        t = t_next;
        if value > best.1 {
            best = (x.clone(), value);
        }
    }
    best
}

/// Maximal KKT violation `max_{I_up} −yG − min_{I_low} −yG`, recomputed
/// from scratch; 0 when one of the sets is empty.
pub fn kkt_violation(xs: &[Vec<f64>], ys: &[f64], alpha: &[f64], kernel: Kernel, c: f64) -> f64 {
    let n = xs.len();
    let mut up = f64::NEG_INFINITY;
    let mut low = f64::INFINITY;
    for t in 0..n {
        let k_row: f64 = (0..n)
            .filter(|&s| alpha[s] != 0.0)
            .map(|s| ys[s] * alpha[s] * kernel.eval(&xs[t], &xs[s]))
            .sum();
        let g = ys[t] * k_row - 1.0;
        let v = -ys[t] * g;
        let in_up = if ys[t] > 0.0 { alpha[t] < c } else { alpha[t] > 0.0 };
        let in_low = if ys[t] > 0.0 { alpha[t] > 0.0 } else { alpha[t] < c };
        if in_up {
            up = up.max(v);
        }
        if in_low {
            low = low.min(v);
        }
    }
    if up.is_finite() && low.is_finite() {
        (up - low).max(0.0)
    } else {
        0.0
    }
}

/// Multipliers of a trained model mapped back onto its training set.
/// Support vectors keep training order, so a forward scan suffices.
pub fn alphas_of(model: &SvmModel, xs: &[Vec<f64>]) -> Vec<f64> {
    let mut alpha = vec![0.0; xs.len()];
    let mut k = 0;
    for (i, x) in xs.iter().enumerate() {
        if k < model.support_vectors.len() && &model.support_vectors[k] == x {
            alpha[i] = model.coefficients[k].abs();
            k += 1;
        }
    }
    assert_eq!(k, model.support_vectors.len(), "support vectors not found in order");
    alpha
}

/// Eigenpairs of the `1/N` scatter matrix, descending, via nalgebra.
pub fn scatter_eigen(centered: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = centered.len();
    let d = centered[0].len();
    let x = nalgebra::DMatrix::from_fn(d, n, |i, j| centered[j][i]);
    let sigma = (&x * x.transpose()) / n as f64;
    let eig = nalgebra::SymmetricEigen::new(sigma);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = order
        .iter()
        .map(|&k| eig.eigenvectors.column(k).iter().copied().collect())
        .collect();
    (values, vectors)
}

/// Flips `v` to point the same way as `reference`.
pub fn align_sign(v: &[f64], reference: &[f64]) -> Vec<f64> {
    let d: f64 = v.iter().zip(reference).map(|(a, b)| a * b).sum();
    if d < 0.0 {
        v.iter().map(|x| -x).collect()
    } else {
        v.to_vec()
    }
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
