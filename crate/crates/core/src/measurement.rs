//! End-node measurement sampling and outcome records.
//!
//! Records hold full histograms rather than shot lists: every statistic the
//! estimators need (single and pairwise marginals, GHZ label counts) is a
//! histogram functional, and the memory footprint stays at O(2^n).

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dense::DensityMatrix;
use crate::distribution::SchemeKind;
use crate::error::{Error, Result};
use crate::labels::{BasisKind, DiagonalState, LabelSpace};

/// Histogram of measurement outcomes from one simulated experiment.
#[derive(Debug, Clone)]
pub struct OutcomeRecord {
    pub scheme: SchemeKind,
    /// Star size (number of end-nodes).
    pub n: usize,
    pub shots: u64,
    pub seed: u64,
    space: LabelSpace,
    histogram: Vec<u64>,
}

impl OutcomeRecord {
    pub fn from_histogram(
        scheme: SchemeKind,
        n: usize,
        seed: u64,
        space: LabelSpace,
        histogram: Vec<u64>,
    ) -> Result<Self> {
        if space != scheme.label_space(n) {
            return Err(Error::InvalidParameter(format!(
                "label space does not match scheme {scheme} at n = {n}"
            )));
        }
        if histogram.len() != space.len() {
            return Err(Error::InvalidParameter(format!(
                "histogram has {} bins for a label space of {}",
                histogram.len(),
                space.len()
            )));
        }
        let shots = histogram.iter().sum();
        if shots == 0 {
            return Err(Error::InvalidParameter("empty record".into()));
        }
        Ok(Self { scheme, n, shots, seed, space, histogram })
    }

    pub fn space(&self) -> LabelSpace {
        self.space
    }

    pub fn histogram(&self) -> &[u64] {
        &self.histogram
    }

    pub fn count(&self, code: usize) -> u64 {
        self.histogram[code]
    }

    pub fn frequency(&self, code: usize) -> f64 {
        self.histogram[code] as f64 / self.shots as f64
    }

    /// Fraction of shots whose label satisfies the predicate.
    pub fn frequency_where(&self, predicate: impl Fn(usize) -> bool) -> f64 {
        let hits: u64 = self
            .histogram
            .iter()
            .enumerate()
            .filter(|(code, _)| predicate(*code))
            .map(|(_, c)| *c)
            .sum();
        hits as f64 / self.shots as f64
    }
}

/// Draw `shots` iid outcomes from a diagonal state. Deterministic in the
/// seed: the stream is ChaCha8 seeded with `seed`, one `f64` per shot,
/// inverted through the cumulative distribution.
pub fn sample(
    dist: &DiagonalState,
    scheme: SchemeKind,
    n: usize,
    shots: u64,
    seed: u64,
) -> Result<OutcomeRecord> {
    if shots == 0 {
        return Err(Error::InvalidParameter("shot count must be positive".into()));
    }
    let space = dist.space();
    let mut cumulative = Vec::with_capacity(space.len());
    let mut acc = 0.0;
    for &p in dist.probs() {
        acc += p;
        cumulative.push(acc);
    }
    if let Some(last) = cumulative.last_mut() {
        *last = 1.0;
    }
    let mut histogram = vec![0u64; space.len()];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..shots {
        let u: f64 = rng.random();
        let code = cumulative.partition_point(|&c| c <= u);
        histogram[code.min(space.len() - 1)] += 1;
    }
    OutcomeRecord::from_histogram(scheme, n, seed, space, histogram)
}

/// Measure a dense state in the given basis: sample from the Born
/// probabilities of the basis projectors.
pub fn measure_dense(
    state: &DensityMatrix,
    basis: BasisKind,
    scheme: SchemeKind,
    n: usize,
    shots: u64,
    seed: u64,
) -> Result<OutcomeRecord> {
    let space = match basis {
        BasisKind::Computational => LabelSpace::z_bits(state.qubits()),
        BasisKind::Ghz => LabelSpace::ghz(state.qubits()),
    };
    let probs = state.born_probabilities(basis);
    let dist = DiagonalState::new_renormalized(space, probs, 1e-9)?;
    sample(&dist, scheme, n, shots, seed)
}

/// Single and pairwise frequencies of the Z-basis record.
#[derive(Debug, Clone)]
pub struct Marginals {
    /// Star size; marginals cover end-nodes 1..n.
    pub n: usize,
    pub shots: u64,
    /// `p[j - 1]` is the frequency of outcome 1 at end-node `j`.
    p: Vec<f64>,
    /// Upper-triangular pairwise frequencies, keyed by `(j, k)` with j < k.
    pairs: Vec<((usize, usize), f64)>,
}

impl Marginals {
    /// Build directly from known probabilities (the infinite-sample limit).
    pub fn exact(dist: &DiagonalState, n: usize) -> Result<Self> {
        if dist.space().kind != BasisKind::Computational || dist.space().bits != n - 1 {
            return Err(Error::WrongScheme {
                expected: "z_basis".into(),
                got: "non-Z diagonal state".into(),
            });
        }
        let width = n - 1;
        let bit_of = |code: usize, j: usize| (code >> (width - j)) & 1 == 1;
        let mut p = vec![0.0; width];
        let mut pairs = Vec::new();
        for j in 1..n {
            p[j - 1] = dist
                .iter()
                .filter(|(code, _)| bit_of(*code, j))
                .map(|(_, q)| q)
                .sum();
        }
        for j in 1..n {
            for k in (j + 1)..n {
                let pjk = dist
                    .iter()
                    .filter(|(code, _)| bit_of(*code, j) && bit_of(*code, k))
                    .map(|(_, q)| q)
                    .sum();
                pairs.push(((j, k), pjk));
            }
        }
        Ok(Self { n, shots: 0, p, pairs })
    }

    pub fn from_values(n: usize, p: Vec<f64>, pairs: Vec<((usize, usize), f64)>) -> Self {
        Self { n, shots: 0, p, pairs }
    }

    pub fn single(&self, j: usize) -> f64 {
        self.p[j - 1]
    }

    pub fn pair(&self, j: usize, k: usize) -> Option<f64> {
        let key = if j < k { (j, k) } else { (k, j) };
        self.pairs.iter().find(|(k2, _)| *k2 == key).map(|(_, v)| *v)
    }

    pub fn pairs(&self) -> &[((usize, usize), f64)] {
        &self.pairs
    }
}

/// Empirical marginals of a Z-scheme record.
pub fn marginals(record: &OutcomeRecord) -> Result<Marginals> {
    if record.scheme != SchemeKind::ZBasis {
        return Err(Error::WrongScheme {
            expected: SchemeKind::ZBasis.name().into(),
            got: record.scheme.name().into(),
        });
    }
    let n = record.n;
    let width = n - 1;
    let bit = |code: usize, j: usize| (code >> (width - j)) & 1 == 1;
    let mut p = vec![0.0; width];
    for j in 1..n {
        p[j - 1] = record.frequency_where(|code| bit(code, j));
    }
    let mut pairs = Vec::new();
    for j in 1..n {
        for k in (j + 1)..n {
            pairs.push(((j, k), record.frequency_where(|code| bit(code, j) && bit(code, k))));
        }
    }
    Ok(Marginals { n, shots: record.shots, p, pairs })
}

/// Render a record as CSV: a versioned comment header followed by
/// `label,count` rows for the labels that occurred.
pub fn record_to_csv(record: &OutcomeRecord) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "# qnt record v1 scheme={} n={} shots={} seed={}\n",
        record.scheme, record.n, record.shots, record.seed
    ));
    out.push_str("label,count\n");
    for (code, &count) in record.histogram.iter().enumerate() {
        if count > 0 {
            out.push_str(&format!("{},{}\n", record.space.label_string(code), count));
        }
    }
    out
}
