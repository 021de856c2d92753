use std::io::{self, Write};

use rayon::prelude::*;

use crate::error::{check_dim, invalid, Error, Result};
use crate::scalar::Scalar;

/// Kernel contributions beyond this many bandwidths are below 1e-11 and are skipped.
const KERNEL_CUTOFF: f64 = 7.4;

const KDE_CHUNK: usize = 16_384;

/// Evaluation grid for [`kde_silverman`].
#[derive(Debug, Clone, PartialEq)]
pub enum KdeGrid<F> {
    /// `points_per_axis` points spanning the sample range plus `pad` bandwidths on each side.
    Auto { points_per_axis: usize, pad: f64 },
    /// Explicit, increasing, evenly spaced axes.
    Axes(Vec<Vec<F>>),
}

impl<F> Default for KdeGrid<F> {
    fn default() -> Self {
        KdeGrid::Auto {
            points_per_axis: 200,
            pad: 3.0,
        }
    }
}

/// Density values on a tensor grid; the last axis varies fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityEstimate<F> {
    pub axes: Vec<Vec<F>>,
    pub values: Vec<F>,
    pub bandwidth: Vec<F>,
}

impl<F: Scalar> DensityEstimate<F> {
    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(Vec::len).collect()
    }

    /// Volume of one grid cell.
    pub fn cell_volume(&self) -> f64 {
        self.axes.iter().map(|a| axis_step(a)).product()
    }

    /// Riemann sum of the values over the grid.
    pub fn integral(&self) -> f64 {
        self.values.iter().map(|v| v.as_f64()).sum::<f64>() * self.cell_volume()
    }

    /// Grid coordinates of flat index `i`.
    pub fn point(&self, mut i: usize) -> Vec<F> {
        let mut p = vec![F::zero(); self.dim()];
        for k in (0..self.dim()).rev() {
            let n = self.axes[k].len();
            p[k] = self.axes[k][i % n];
            i /= n;
        }
        p
    }

    /// Writes `x1,...,xd,density` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        for k in 1..=self.dim() {
            write!(w, "x{k},")?;
        }
        writeln!(w, "density")?;
        for (i, v) in self.values.iter().enumerate() {
            for c in self.point(i) {
                write!(w, "{:.16e},", c.as_f64())?;
            }
            writeln!(w, "{:.16e}", v.as_f64())?;
        }
        Ok(())
    }
}

fn axis_step<F: Scalar>(axis: &[F]) -> f64 {
    if axis.len() < 2 {
        1.0
    } else {
        (axis[axis.len() - 1].as_f64() - axis[0].as_f64()) / (axis.len() - 1) as f64
    }
}

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace<F: Scalar>(lo: f64, hi: f64, n: usize) -> Vec<F> {
    if n == 1 {
        return vec![F::lit(lo)];
    }
    (0..n)
        .map(|i| F::lit(lo + (hi - lo) * i as f64 / (n - 1) as f64))
        .collect()
}

/// Silverman's rule for a product Gaussian kernel: `h_k = sd_k (4 / ((d + 2) n))^{1/(d + 4)}`.
pub fn silverman_bandwidth<F: Scalar>(points: &[Vec<F>]) -> Result<Vec<f64>> {
    let n = points.len();
    if n < 2 {
        return Err(invalid("samples", "need at least two points"));
    }
    let d = points[0].len();
    if d == 0 {
        return Err(invalid("samples", "points must have positive dimension"));
    }
    let factor = (4.0 / ((d as f64 + 2.0) * n as f64)).powf(1.0 / (d as f64 + 4.0));
    (0..d)
        .map(|k| {
            let mean = points.iter().map(|p| p[k].as_f64()).sum::<f64>() / n as f64;
            let var = points
                .iter()
                .map(|p| (p[k].as_f64() - mean).powi(2))
                .sum::<f64>()
                / (n - 1) as f64;
            if var > 0.0 && var.is_finite() {
                Ok(var.sqrt() * factor)
            } else {
                Err(Error::DegenerateDimension(k))
            }
        })
        .collect()
}

/// Per-axis window of a kernel centred at `x`: first index and weights.
fn axis_window(axis: &[f64], x: f64, h: f64) -> (usize, Vec<f64>) {
    let lo = x - KERNEL_CUTOFF * h;
    let hi = x + KERNEL_CUTOFF * h;
    let start = axis.partition_point(|&g| g < lo);
    let end = axis.partition_point(|&g| g <= hi);
    let norm = 1.0 / (h * (2.0 * std::f64::consts::PI).sqrt());
    let w = axis[start..end]
        .iter()
        .map(|&g| {
            let z = (g - x) / h;
            norm * (-0.5 * z * z).exp()
        })
        .collect();
    (start, w)
}

/// Gaussian product-kernel density estimate with Silverman bandwidths.
pub fn kde_silverman<F: Scalar>(points: &[Vec<F>], grid: &KdeGrid<F>) -> Result<DensityEstimate<F>> {
    let h = silverman_bandwidth(points)?;
    let d = h.len();
    for p in points {
        check_dim(d, p.len())?;
        if p.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("kde sample"));
        }
    }
    let axes: Vec<Vec<F>> = match grid {
        KdeGrid::Auto { points_per_axis, pad } => {
            if *points_per_axis == 0 {
                return Err(invalid("points_per_axis", "must be positive"));
            }
            (0..d)
                .map(|k| {
                    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
                    for p in points {
                        lo = lo.min(p[k].as_f64());
                        hi = hi.max(p[k].as_f64());
                    }
                    linspace(lo - pad * h[k], hi + pad * h[k], *points_per_axis)
                })
                .collect()
        }
        KdeGrid::Axes(axes) => {
            check_dim(d, axes.len())?;
            if axes.iter().any(|a| a.is_empty()) {
                return Err(Error::Empty("kde grid axis"));
            }
            axes.clone()
        }
    };
    let axes_f64: Vec<Vec<f64>> = axes
        .iter()
        .map(|a| a.iter().map(|v| v.as_f64()).collect())
        .collect();
    let shape: Vec<usize> = axes.iter().map(Vec::len).collect();
    let total: usize = shape.iter().product();
    let strides: Vec<usize> = (0..d).map(|k| shape[k + 1..].iter().product()).collect();

    // fixed chunking keeps the summation order independent of the thread count
    let partials: Vec<Vec<f64>> = points
        .par_chunks(KDE_CHUNK)
        .map(|block| {
            let mut acc = vec![0.0f64; total];
            let mut windows = Vec::with_capacity(d);
            for p in block {
                windows.clear();
                for k in 0..d {
                    windows.push(axis_window(&axes_f64[k], p[k].as_f64(), h[k]));
                }
                if windows.iter().any(|(_, w)| w.is_empty()) {
                    continue;
                }
                accumulate(&mut acc, &windows, &strides);
            }
            acc
        })
        .collect();
    let mut sum = vec![0.0f64; total];
    for part in partials {
        for (s, v) in sum.iter_mut().zip(part) {
            *s += v;
        }
    }
    let n = points.len() as f64;
    Ok(DensityEstimate {
        axes,
        values: sum.into_iter().map(|v| F::lit(v / n)).collect(),
        bandwidth: h.into_iter().map(F::lit).collect(),
    })
}

/// Adds the outer product of the per-axis windows into the flat grid.
fn accumulate(acc: &mut [f64], windows: &[(usize, Vec<f64>)], strides: &[usize]) {
    let d = windows.len();
    let mut idx = vec![0usize; d];
    loop {
        let mut flat = 0;
        let mut w = 1.0;
        for k in 0..d {
            flat += (windows[k].0 + idx[k]) * strides[k];
            w *= windows[k].1[idx[k]];
        }
        acc[flat] += w;
        let mut k = d;
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < windows[k].1.len() {
                break;
            }
            idx[k] = 0;
        }
    }
}

/// Local maxima of a gridded density.
///
/// A grid point qualifies when it is strictly larger than every neighbour (including
/// diagonals) and at least `min_relative_height` times the global maximum. Qualifying
/// points are then suppressed greedily, highest first, within `min_separation`.
pub fn mode_detect_with_floor<F: Scalar>(
    est: &DensityEstimate<F>,
    min_separation: f64,
    min_relative_height: f64,
) -> Result<Vec<Vec<F>>> {
    if est.values.is_empty() || est.axes.iter().any(Vec::is_empty) {
        return Err(Error::Empty("density grid"));
    }
    let shape = est.shape();
    let d = shape.len();
    let vals: Vec<f64> = est.values.iter().map(|v| v.as_f64()).collect();
    let peak = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let floor = min_relative_height * peak;
    let strides: Vec<usize> = (0..d).map(|k| shape[k + 1..].iter().product()).collect();
    let offsets: Vec<Vec<i64>> = neighbour_offsets(d);

    let mut candidates: Vec<(f64, usize)> = Vec::new();
    let mut coord = vec![0usize; d];
    for (i, &v) in vals.iter().enumerate() {
        let mut rem = i;
        for k in 0..d {
            coord[k] = rem / strides[k];
            rem %= strides[k];
        }
        if v <= 0.0 || v < floor {
            continue;
        }
        let is_max = offsets.iter().all(|off| {
            let mut j = 0usize;
            for k in 0..d {
                let c = coord[k] as i64 + off[k];
                if c < 0 || c >= shape[k] as i64 {
                    return true;
                }
                j += c as usize * strides[k];
            }
            vals[j] < v
        });
        if is_max {
            candidates.push((v, i));
        }
    }
    candidates.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut modes: Vec<Vec<F>> = Vec::new();
    for (_, i) in candidates {
        let p = est.point(i);
        let far = modes.iter().all(|m| {
            m.iter()
                .zip(&p)
                .map(|(a, b)| (a.as_f64() - b.as_f64()).powi(2))
                .sum::<f64>()
                .sqrt()
                >= min_separation
        });
        if far {
            modes.push(p);
        }
    }
    Ok(modes)
}

/// Strict local maxima with non-maximum suppression within `min_separation`.
pub fn mode_detect<F: Scalar>(est: &DensityEstimate<F>, min_separation: f64) -> Result<Vec<Vec<F>>> {
    mode_detect_with_floor(est, min_separation, 0.0)
}

fn neighbour_offsets(d: usize) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for _ in 0..d {
        out = out
            .into_iter()
            .flat_map(|v| {
                [-1i64, 0, 1].into_iter().map(move |o| {
                    let mut w = v.clone();
                    w.push(o);
                    w
                })
            })
            .collect();
    }
    out.retain(|v| v.iter().any(|&o| o != 0));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_value_at_origin() {
        let pts = vec![vec![-1.0], vec![1.0]];
        let est = kde_silverman(&pts, &KdeGrid::Axes(vec![vec![-1.0, 0.0, 1.0]])).unwrap();
        let sd = 2f64.sqrt();
        let h = sd * (4.0 / (3.0 * 2.0f64)).powf(0.2);
        let expected = (-1.0 / (2.0 * h * h)).exp() / (h * (2.0 * std::f64::consts::PI).sqrt());
        assert!((est.values[1] - expected).abs() < 1e-15);
    }

    #[test]
    fn symmetric_samples_give_symmetric_estimate() {
        let pts: Vec<Vec<f64>> = [-2.0, -0.5, 0.3, -0.3, 0.5, 2.0].iter().map(|&x| vec![x]).collect();
        let axis = linspace(-4.0, 4.0, 81);
        let est = kde_silverman(&pts, &KdeGrid::Axes(vec![axis])).unwrap();
        let n = est.values.len();
        for i in 0..n {
            assert!((est.values[i] - est.values[n - 1 - i]).abs() < 1e-12);
        }
    }

    #[test]
    fn degenerate_dimension_rejected() {
        let pts = vec![vec![1.0, 0.0], vec![1.0, 2.0]];
        assert_eq!(kde_silverman(&pts, &KdeGrid::default()), Err(Error::DegenerateDimension(0)));
        assert!(kde_silverman(&[vec![1.0]], &KdeGrid::default()).is_err());
    }

    #[test]
    fn modes_of_flat_and_single_bump() {
        let flat = DensityEstimate {
            axes: vec![linspace::<f64>(0.0, 1.0, 5)],
            values: vec![1.0; 5],
            bandwidth: vec![1.0],
        };
        assert!(mode_detect(&flat, 0.1).unwrap().is_empty());
        let axis = linspace::<f64>(-3.0, 3.0, 61);
        let values = axis.iter().map(|x| (-(x - 0.4).powi(2)).exp()).collect();
        let bump = DensityEstimate {
            axes: vec![axis],
            values,
            bandwidth: vec![1.0],
        };
        let modes = mode_detect(&bump, 0.5).unwrap();
        assert_eq!(modes.len(), 1);
        assert!((modes[0][0] - 0.4).abs() < 1e-9);
    }

    #[test]
    fn suppression_and_floor() {
        let axis = linspace::<f64>(0.0, 10.0, 11);
        let values = vec![0.0, 1.0, 0.0, 0.9, 0.0, 0.0, 0.0, 0.001, 0.0, 0.0, 0.0];
        let est = DensityEstimate {
            axes: vec![axis],
            values,
            bandwidth: vec![1.0],
        };
        assert_eq!(mode_detect(&est, 0.5).unwrap().len(), 3);
        assert_eq!(mode_detect(&est, 2.5).unwrap().len(), 2);
        assert_eq!(mode_detect_with_floor(&est, 0.5, 0.01).unwrap().len(), 2);
        let empty = DensityEstimate::<f64> {
            axes: vec![vec![]],
            values: vec![],
            bandwidth: vec![],
        };
        assert!(mode_detect(&empty, 1.0).is_err());
    }

    #[test]
    fn csv_export() {
        let est = DensityEstimate {
            axes: vec![vec![0.0, 1.0], vec![2.0]],
            values: vec![0.5, 0.25],
            bandwidth: vec![1.0, 1.0],
        };
        let mut buf = Vec::new();
        est.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "x1,x2,density");
        assert!(lines[2].starts_with("1.0000000000000000e0,2.0000000000000000e0,2.5"));
    }
}
