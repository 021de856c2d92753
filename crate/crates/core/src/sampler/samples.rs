use std::io::{self, Write};
use std::time::Duration;

use super::SamplerConfig;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Retained iterates of one chain, row-major `rows x dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainTrace<F> {
    pub chain_id: u64,
    pub dim: usize,
    pub data: Vec<F>,
    /// Iteration index `n` of each retained row.
    pub iters: Vec<usize>,
}

impl<F: Scalar> ChainTrace<F> {
    pub fn len(&self) -> usize {
        self.iters.len()
    }
    pub fn is_empty(&self) -> bool {
        self.iters.is_empty()
    }
    pub fn point(&self, i: usize) -> &[F] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }
    pub fn points(&self) -> impl Iterator<Item = &[F]> {
        self.data.chunks_exact(self.dim)
    }
}

/// Pooled retained iterates of all chains, in chain order.
#[derive(Debug, Clone)]
pub struct SampleSet<F> {
    dim: usize,
    chains: Vec<ChainTrace<F>>,
    pub config: SamplerConfig<F>,
    pub wall_time: Duration,
    /// `(seed, stream)` of the generator behind each chain.
    pub lineage: Vec<(u64, u64)>,
}

impl<F: Scalar> SampleSet<F> {
    pub fn new(
        dim: usize,
        chains: Vec<ChainTrace<F>>,
        config: SamplerConfig<F>,
        wall_time: Duration,
    ) -> Self {
        let lineage = chains.iter().map(|c| (config.seed, c.chain_id)).collect();
        Self {
            dim,
            chains,
            config,
            wall_time,
            lineage,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn chains(&self) -> &[ChainTrace<F>] {
        &self.chains
    }

    /// Total number of retained points.
    pub fn len(&self) -> usize {
        self.chains.iter().map(ChainTrace::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn points(&self) -> impl Iterator<Item = &[F]> {
        self.chains.iter().flat_map(|c| c.points())
    }

    /// All retained values of coordinate `k`.
    pub fn coordinate(&self, k: usize) -> Vec<F> {
        self.points().map(|p| p[k]).collect()
    }

    /// Flattened row-major copy of all points.
    pub fn to_rows(&self) -> Vec<Vec<F>> {
        self.points().map(<[F]>::to_vec).collect()
    }

    /// Writes `chain,iter,x1,...,xd` rows with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        write!(w, "chain,iter")?;
        for k in 1..=self.dim {
            write!(w, ",x{k}")?;
        }
        writeln!(w)?;
        for c in &self.chains {
            for (p, n) in c.points().zip(&c.iters) {
                write!(w, "{},{}", c.chain_id, n)?;
                for v in p {
                    write!(w, ",{:.16e}", v.as_f64())?;
                }
                writeln!(w)?;
            }
        }
        Ok(())
    }
}

/// Point estimate extracted from a sample set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SummaryMode {
    ErgodicMean,
    LastIterate,
}

pub fn posterior_summary<F: Scalar>(set: &SampleSet<F>, mode: SummaryMode) -> Result<Vec<F>> {
    if set.is_empty() {
        return Err(Error::Empty("sample set"));
    }
    match mode {
        SummaryMode::ErgodicMean => {
            let mut acc = vec![0.0f64; set.dim()];
            for p in set.points() {
                for (a, v) in acc.iter_mut().zip(p) {
                    *a += v.as_f64();
                }
            }
            let n = set.len() as f64;
            Ok(acc.into_iter().map(|a| F::lit(a / n)).collect())
        }
        SummaryMode::LastIterate => {
            let c = &set.chains()[0];
            if c.is_empty() {
                return Err(Error::Empty("chain 0"));
            }
            Ok(c.point(c.len() - 1).to_vec())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(points: &[f64]) -> SampleSet<f64> {
        let trace = ChainTrace {
            chain_id: 0,
            dim: 1,
            data: points.to_vec(),
            iters: (1..=points.len()).collect(),
        };
        SampleSet::new(1, vec![trace], SamplerConfig::new(1, 0.1, 1.0, points.len().max(1)), Duration::ZERO)
    }

    #[test]
    fn summaries() {
        let s = set(&[0.0, 2.0]);
        assert_eq!(posterior_summary(&s, SummaryMode::ErgodicMean).unwrap(), vec![1.0]);
        assert_eq!(posterior_summary(&s, SummaryMode::LastIterate).unwrap(), vec![2.0]);
        let one = set(&[0.25]);
        for mode in [SummaryMode::ErgodicMean, SummaryMode::LastIterate] {
            assert_eq!(posterior_summary(&one, mode).unwrap(), vec![0.25]);
        }
        assert!(posterior_summary(&set(&[]), SummaryMode::ErgodicMean).is_err());
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        set(&[0.1]).write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "chain,iter,x1\n0,1,1.0000000000000001e-1\n");
    }
}
