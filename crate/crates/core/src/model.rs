//! Code ensembles, section mapping, coding matrices and error metrics.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// Code ensemble descriptor.
///
/// `n = l·b` is the signal length and `m` the number of channel uses. The
/// number of channel uses is rounded from `l·log2(b)/r`, so the realized rate
/// `r_eff` generally differs slightly from the target `r`; both are carried.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CodeParams {
    pub l: usize,
    pub b: usize,
    pub r: f64,
    pub snr: f64,
    pub n: usize,
    pub m: usize,
    pub r_eff: f64,
}

impl CodeParams {
    pub fn new(l: usize, b: usize, r: f64, snr: f64) -> Result<Self> {
        if !(snr > 0.0) || !snr.is_finite() {
            return Err(Error::Parameter(format!("snr must be positive, got {snr}")));
        }
        let (n, m, r_eff) = derive_dims(l, b, r)?;
        Ok(CodeParams { l, b, r, snr, n, m, r_eff })
    }

    /// Bits carried by one section.
    pub fn bits_per_section(&self) -> f64 {
        (self.b as f64).log2()
    }

    /// Noise variance `1/snr`.
    pub fn noise_variance(&self) -> f64 {
        1.0 / self.snr
    }

    /// Message mapping is a plain bit split only when `b` is a power of two.
    pub fn b_is_power_of_two(&self) -> bool {
        self.b.is_power_of_two()
    }
}

/// Signal length, channel uses and realized rate for `l` sections of size `b` at target rate `r`.
pub fn derive_dims(l: usize, b: usize, r: f64) -> Result<(usize, usize, f64)> {
    if l == 0 {
        return Err(Error::Parameter("number of sections L must be at least 1".into()));
    }
    if b < 2 {
        return Err(Error::Parameter(format!("section size B must be at least 2, got {b}")));
    }
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::Parameter(format!("rate R must be positive, got {r}")));
    }
    let n = l
        .checked_mul(b)
        .ok_or_else(|| Error::Parameter("L·B overflows".into()))?;
    let bits = l as f64 * (b as f64).log2();
    let m = ((bits / r).round() as usize).max(1);
    Ok((n, m, bits / m as f64))
}

/// A message of `L` symbols, each in `1..=B` (1-based).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Message {
    sections: Vec<usize>,
}

impl Message {
    pub fn new(sections: Vec<usize>, b: usize) -> Result<Self> {
        if let Some((l, &s)) = sections.iter().enumerate().find(|(_, &s)| s == 0 || s > b) {
            return Err(Error::Encoding(format!(
                "section {} has value {s}, outside 1..={b}",
                l + 1
            )));
        }
        Ok(Message { sections })
    }

    pub fn random<R: Rng + ?Sized>(l: usize, b: usize, rng: &mut R) -> Self {
        Message {
            sections: (0..l).map(|_| rng.gen_range(1..=b)).collect(),
        }
    }

    pub fn sections(&self) -> &[usize] {
        &self.sections
    }

    pub fn len(&self) -> usize {
        self.sections.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sections.is_empty()
    }

    /// Newline-delimited 1-based section indices.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.sections.len() * 3);
        for s in &self.sections {
            out.push_str(&s.to_string());
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str, b: usize) -> Result<Self> {
        let sections = text
            .lines()
            .map(str::trim)
            .filter(|line| !line.is_empty() && !line.starts_with('#'))
            .map(|line| {
                line.parse::<usize>()
                    .map_err(|e| Error::Parse(format!("bad section index {line:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Message::new(sections, b)
    }
}

/// The `L·B` indicator vector: each block of `B` entries holds exactly one 1.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseSignal {
    b: usize,
    values: Vec<f64>,
}

impl SparseSignal {
    /// Validates a dense `{0,1}` vector with one 1 per section.
    pub fn from_dense(values: Vec<f64>, b: usize) -> Result<Self> {
        if b < 2 || values.len() % b != 0 {
            return Err(Error::Dimension(format!(
                "signal length {} is not a multiple of B={b}",
                values.len()
            )));
        }
        for (l, block) in values.chunks_exact(b).enumerate() {
            let ones = block.iter().filter(|&&x| x == 1.0).count();
            let zeros = block.iter().filter(|&&x| x == 0.0).count();
            if ones != 1 || zeros != b - 1 {
                return Err(Error::Encoding(format!(
                    "section {} is not a one-hot block",
                    l + 1
                )));
            }
        }
        Ok(SparseSignal { b, values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn section_size(&self) -> usize {
        self.b
    }

    pub fn sections(&self) -> usize {
        self.values.len() / self.b
    }

    /// Global indices of the nonzero entries, one per section.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.values
            .chunks_exact(self.b)
            .enumerate()
            .map(move |(l, block)| l * self.b + block.iter().position(|&x| x == 1.0).unwrap())
    }
}

/// Places a 1 at position `msg[l]` (1-based) of block `l`.
pub fn section_encode(msg: &Message, b: usize) -> Result<SparseSignal> {
    let mut values = vec![0.0; msg.len() * b];
    for (l, &s) in msg.sections().iter().enumerate() {
        if s == 0 || s > b {
            return Err(Error::Encoding(format!(
                "section {} has value {s}, outside 1..={b}",
                l + 1
            )));
        }
        values[l * b + s - 1] = 1.0;
    }
    Ok(SparseSignal { b, values })
}

/// Index (0-based) of the largest entry; ties go to the lowest index.
pub(crate) fn argmax(block: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in block.iter().enumerate().skip(1) {
        if x > block[best] {
            best = i;
        }
    }
    best
}

/// Per-section argmax of an estimate, as a message.
pub fn section_decode(x: &[f64], b: usize) -> Result<Message> {
    if b < 2 || x.len() % b != 0 {
        return Err(Error::Dimension(format!(
            "estimate length {} is not a multiple of B={b}",
            x.len()
        )));
    }
    Ok(Message {
        sections: x.chunks_exact(b).map(|block| argmax(block) + 1).collect(),
    })
}

/// Fraction of sections whose argmax misses the true support.
pub fn section_error_rate(est: &[f64], truth: &SparseSignal) -> Result<f64> {
    let b = truth.section_size();
    if est.len() != truth.values().len() {
        return Err(Error::Dimension(format!(
            "estimate has {} entries, signal has {}",
            est.len(),
            truth.values().len()
        )));
    }
    let wrong = est
        .chunks_exact(b)
        .zip(truth.values().chunks_exact(b))
        .filter(|(e, t)| t[argmax(e)] != 1.0)
        .count();
    Ok(wrong as f64 / truth.sections() as f64)
}

/// Biased MSE `(Ẽ, E)`: `Ẽ` averages the squared error over all `N` entries,
/// `E = B·Ẽ` over the `L` sections.
pub fn biased_mse(a: &[f64], truth: &SparseSignal) -> Result<(f64, f64)> {
    if a.len() != truth.values().len() {
        return Err(Error::Dimension(format!(
            "estimate has {} entries, signal has {}",
            a.len(),
            truth.values().len()
        )));
    }
    let sq: f64 = a
        .iter()
        .zip(truth.values())
        .map(|(ai, xi)| (ai - xi) * (ai - xi))
        .sum();
    Ok((sq / a.len() as f64, sq / truth.sections() as f64))
}

/// Serialized form of a coding matrix: the matrix is always regenerated from this.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixHeader {
    pub seed: u64,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "L")]
    pub l: usize,
}

/// Dense `M×N` Gaussian coding matrix with i.i.d. entries of variance `1/L`.
///
/// Row `μ` is drawn from its own stream `(seed, "F", μ)`, so any row can be
/// regenerated independently. Entries are stored in single precision; all
/// products accumulate in double precision.
#[derive(Clone, Debug)]
pub struct CodingMatrix {
    header: MatrixHeader,
    data: Vec<f32>,
}

impl CodingMatrix {
    pub fn generate(header: MatrixHeader) -> Result<Self> {
        let MatrixHeader { seed, m, n, l } = header;
        if m == 0 || n == 0 || l == 0 {
            return Err(Error::Parameter(format!(
                "matrix dimensions must be positive (M={m}, N={n}, L={l})"
            )));
        }
        let scale = 1.0 / (l as f64).sqrt();
        let mut data = vec![0f32; m * n];
        for (mu, row) in data.chunks_exact_mut(n).enumerate() {
            fill_row(row, seed, mu as u64, scale);
        }
        Ok(CodingMatrix { header, data })
    }

    pub fn header(&self) -> MatrixHeader {
        self.header
    }

    pub fn rows(&self) -> usize {
        self.header.m
    }

    pub fn cols(&self) -> usize {
        self.header.n
    }

    pub fn entry(&self, mu: usize, i: usize) -> f64 {
        f64::from(self.data[mu * self.header.n + i])
    }

    #[cfg(test)]
    pub(crate) fn set_entry(&mut self, mu: usize, i: usize, value: f32) {
        self.data[mu * self.header.n + i] = value;
    }

    pub fn row(&self, mu: usize) -> &[f32] {
        let n = self.header.n;
        &self.data[mu * n..(mu + 1) * n]
    }

    pub fn entries(&self) -> &[f32] {
        &self.data
    }

    pub fn column(&self, i: usize) -> Vec<f64> {
        (0..self.header.m).map(|mu| self.entry(mu, i)).collect()
    }

    /// `F·x` for an arbitrary vector.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.header.n {
            return Err(Error::Dimension(format!(
                "vector of length {} against matrix with {} columns",
                x.len(),
                self.header.n
            )));
        }
        Ok((0..self.header.m).map(|mu| dot(self.row(mu), x)).collect())
    }

    /// One pass over the rows computing `F·a` and `(F∘F)·v`.
    pub(crate) fn forward(&self, a: &[f64], v: &[f64], fa: &mut [f64], f2v: &mut [f64]) {
        for mu in 0..self.header.m {
            let (x, y) = dot2(self.row(mu), a, v);
            fa[mu] = x;
            f2v[mu] = y;
        }
    }

    /// One pass over the rows computing `Fᵀ·r` and `(F∘F)ᵀ·q`.
    pub(crate) fn backward(&self, r: &[f64], q: &[f64], ftr: &mut [f64], f2tq: &mut [f64]) {
        ftr.fill(0.0);
        f2tq.fill(0.0);
        for mu in 0..self.header.m {
            let (rm, qm) = (r[mu], q[mu]);
            for ((&f, s), t) in self.row(mu).iter().zip(ftr.iter_mut()).zip(f2tq.iter_mut()) {
                let f = f64::from(f);
                *s += f * rm;
                *t += f * f * qm;
            }
        }
    }
}

fn fill_row(row: &mut [f32], seed: u64, mu: u64, scale: f64) {
    let mut rng = rng::stream(seed, "F", mu);
    for x in row.iter_mut() {
        let g: f64 = rng.sample(StandardNormal);
        *x = (g * scale) as f32;
    }
}

fn dot(row: &[f32], x: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let rc = row.chunks_exact(4);
    let xc = x.chunks_exact(4);
    let (rr, xr) = (rc.remainder(), xc.remainder());
    for (r, x) in rc.zip(xc) {
        for k in 0..4 {
            acc[k] += f64::from(r[k]) * x[k];
        }
    }
    let mut tail = 0.0;
    for (r, x) in rr.iter().zip(xr) {
        tail += f64::from(*r) * x;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

fn dot2(row: &[f32], a: &[f64], v: &[f64]) -> (f64, f64) {
    let mut sa = [0.0f64; 4];
    let mut sv = [0.0f64; 4];
    let rc = row.chunks_exact(4);
    let ac = a.chunks_exact(4);
    let vc = v.chunks_exact(4);
    let (rr, ar, vr) = (rc.remainder(), ac.remainder(), vc.remainder());
    for ((r, a), v) in rc.zip(ac).zip(vc) {
        for k in 0..4 {
            let f = f64::from(r[k]);
            sa[k] += f * a[k];
            sv[k] += f * f * v[k];
        }
    }
    let (mut ta, mut tv) = (0.0, 0.0);
    for ((r, a), v) in rr.iter().zip(ar).zip(vr) {
        let f = f64::from(*r);
        ta += f * a;
        tv += f * f * v;
    }
    (
        (sa[0] + sa[1]) + (sa[2] + sa[3]) + ta,
        (sv[0] + sv[1]) + (sv[2] + sv[3]) + tv,
    )
}

/// Coding matrix for the ensemble `params`, reproducible from `seed`.
pub fn sample_coding_matrix(seed: u64, params: &CodeParams) -> Result<CodingMatrix> {
    CodingMatrix::generate(MatrixHeader {
        seed,
        m: params.m,
        n: params.n,
        l: params.l,
    })
}

/// Codeword `F·X`.
pub fn encode(f: &CodingMatrix, x: &SparseSignal) -> Result<Vec<f64>> {
    if x.values().len() != f.cols() {
        return Err(Error::Dimension(format!(
            "signal of length {} against matrix with {} columns",
            x.values().len(),
            f.cols()
        )));
    }
    let support: Vec<usize> = x.support().collect();
    Ok((0..f.rows())
        .map(|mu| {
            let row = f.row(mu);
            support.iter().map(|&i| f64::from(row[i])).sum()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;

    #[test]
    fn dims_examples() {
        assert_eq!(derive_dims(2, 2, 1.0).unwrap(), (4, 2, 1.0));
        assert_eq!(derive_dims(1024, 4, 1.0).unwrap(), (4096, 2048, 1.0));
        let (n, m, r_eff) = derive_dims(100, 2, 1.6).unwrap();
        assert_eq!((n, m), (200, 63));
        assert!((r_eff - 100.0 / 63.0).abs() < 1e-12);
        assert!((r_eff - 1.5873).abs() < 1e-4);
    }

    #[test]
    fn dims_reject_bad_input() {
        assert!(matches!(derive_dims(0, 2, 1.0), Err(Error::Parameter(_))));
        assert!(matches!(derive_dims(4, 1, 1.0), Err(Error::Parameter(_))));
        assert!(matches!(derive_dims(4, 2, 0.0), Err(Error::Parameter(_))));
        assert!(matches!(derive_dims(4, 2, -1.0), Err(Error::Parameter(_))));
        assert!(matches!(CodeParams::new(4, 2, 1.0, 0.0), Err(Error::Parameter(_))));
        // any B >= 2 is accepted
        let p = CodeParams::new(10, 3, 1.0, 15.0).unwrap();
        assert!(!p.b_is_power_of_two());
        assert_eq!(p.m, 16);
    }

    #[test]
    fn m_is_clamped_to_one() {
        let (_, m, _) = derive_dims(1, 2, 100.0).unwrap();
        assert_eq!(m, 1);
    }

    #[test]
    fn encode_examples() {
        let m = Message::new(vec![3], 4).unwrap();
        assert_eq!(section_encode(&m, 4).unwrap().values(), &[0.0, 0.0, 1.0, 0.0]);
        let m = Message::new(vec![1, 2], 2).unwrap();
        assert_eq!(section_encode(&m, 2).unwrap().values(), &[1.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn out_of_range_sections_are_rejected() {
        assert!(matches!(Message::new(vec![0], 4), Err(Error::Encoding(_))));
        assert!(matches!(Message::new(vec![5], 4), Err(Error::Encoding(_))));
        let m = Message::new(vec![4], 4).unwrap();
        assert!(matches!(section_encode(&m, 2), Err(Error::Encoding(_))));
    }

    #[test]
    fn decode_examples() {
        assert_eq!(section_decode(&[0.0, 0.0, 1.0, 0.0], 4).unwrap().sections(), &[3]);
        assert_eq!(section_decode(&[0.9, 0.1, 0.2, 0.8], 2).unwrap().sections(), &[1, 2]);
        assert_eq!(section_decode(&[0.5, 0.5], 2).unwrap().sections(), &[1]);
        assert!(section_decode(&[0.5, 0.5, 0.1], 2).is_err());
    }

    #[test]
    fn ser_examples() {
        let truth = section_encode(&Message::new(vec![1, 2, 1, 2], 2).unwrap(), 2).unwrap();
        assert_eq!(section_error_rate(truth.values(), &truth).unwrap(), 0.0);
        let flipped: Vec<f64> = truth.values().iter().map(|x| 1.0 - x).collect();
        assert_eq!(section_error_rate(&flipped, &truth).unwrap(), 1.0);
        let mut one_wrong = truth.values().to_vec();
        one_wrong.swap(0, 1);
        assert_eq!(section_error_rate(&one_wrong, &truth).unwrap(), 0.25);
    }

    #[test]
    fn mse_examples() {
        let truth = section_encode(&Message::new(vec![2, 1, 2], 2).unwrap(), 2).unwrap();
        assert_eq!(biased_mse(truth.values(), &truth).unwrap(), (0.0, 0.0));
        let uniform = vec![0.5; 6];
        let (et, e) = biased_mse(&uniform, &truth).unwrap();
        assert!((e - 0.5).abs() < 1e-15);
        assert!((et - 0.25).abs() < 1e-15);
        let (_, e) = biased_mse(&[0.0; 6], &truth).unwrap();
        assert_eq!(e, 1.0);
        // 1 - 1/B for uniform estimates at B = 4
        let truth4 = section_encode(&Message::new(vec![3], 4).unwrap(), 4).unwrap();
        let (_, e) = biased_mse(&[0.25; 4], &truth4).unwrap();
        assert!((e - 0.75).abs() < 1e-15);
    }

    #[test]
    fn message_text_roundtrip() {
        let m = Message::new(vec![3, 1, 4, 1], 4).unwrap();
        let text = m.to_text();
        assert_eq!(text, "3\n1\n4\n1\n");
        assert_eq!(Message::from_text(&text, 4).unwrap(), m);
        assert!(matches!(Message::from_text("1\nx\n", 4), Err(Error::Parse(_))));
    }

    #[test]
    fn matrix_is_deterministic() {
        let p = CodeParams::new(20, 4, 1.0, 15.0).unwrap();
        let a = sample_coding_matrix(0, &p).unwrap();
        let b = sample_coding_matrix(0, &p).unwrap();
        let c = sample_coding_matrix(1, &p).unwrap();
        assert_eq!(a.entries(), b.entries());
        assert_ne!(a.entries(), c.entries());
        let again = CodingMatrix::generate(a.header()).unwrap();
        assert_eq!(again.entries(), a.entries());
    }

    #[test]
    fn matrix_entry_moments() {
        let header = MatrixHeader { seed: 11, m: 200, n: 400, l: 200 };
        let f = CodingMatrix::generate(header).unwrap();
        let count = (200 * 400) as f64;
        let var_target = 1.0 / 200.0;
        let mean = f.entries().iter().map(|&x| f64::from(x)).sum::<f64>() / count;
        let var = f
            .entries()
            .iter()
            .map(|&x| (f64::from(x) - mean).powi(2))
            .sum::<f64>()
            / count;
        // mean has standard error sqrt(var/count); variance has sqrt(2/count)·var
        assert!(mean.abs() < 4.0 * (var_target / count).sqrt(), "mean {mean}");
        assert!(
            (var - var_target).abs() < 4.0 * var_target * (2.0 / count).sqrt(),
            "var {var}"
        );
    }

    #[test]
    fn codeword_of_unit_signal_is_a_column() {
        let p = CodeParams::new(3, 4, 1.0, 15.0).unwrap();
        let f = sample_coding_matrix(5, &p).unwrap();
        let x = section_encode(&Message::new(vec![2, 4, 1], 4).unwrap(), 4).unwrap();
        let y = encode(&f, &x).unwrap();
        let expected: Vec<f64> = (0..p.m)
            .map(|mu| f.entry(mu, 1) + f.entry(mu, 7) + f.entry(mu, 8))
            .collect();
        for (a, b) in y.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-12);
        }
        let mut e = vec![0.0; p.n];
        e[6] = 1.0;
        let col = f.apply(&e).unwrap();
        assert_eq!(col, f.column(6));
    }

    #[test]
    fn encode_checks_dimensions() {
        let p = CodeParams::new(3, 4, 1.0, 15.0).unwrap();
        let f = sample_coding_matrix(5, &p).unwrap();
        let x = section_encode(&Message::new(vec![1, 1], 4).unwrap(), 4).unwrap();
        assert!(matches!(encode(&f, &x), Err(Error::Dimension(_))));
        assert!(matches!(f.apply(&[1.0]), Err(Error::Dimension(_))));
    }

    #[test]
    fn codeword_power_is_unit() {
        let p = CodeParams::new(1000, 2, 1.0, 15.0).unwrap();
        let f = sample_coding_matrix(3, &p).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let x = section_encode(&Message::random(p.l, p.b, &mut rng), p.b).unwrap();
        let y = encode(&f, &x).unwrap();
        let power = y.iter().map(|v| v * v).sum::<f64>() / p.m as f64;
        assert!((power - 1.0).abs() < 5.0 / (p.m as f64).sqrt(), "power {power}");
    }

    proptest! {
        #[test]
        fn decode_inverts_encode(b in 2usize..9, secs in proptest::collection::vec(0usize..1000, 1..40)) {
            let m = Message::new(secs.iter().map(|s| s % b + 1).collect(), b).unwrap();
            let x = section_encode(&m, b).unwrap();
            prop_assert_eq!(section_decode(x.values(), b).unwrap(), m);
        }

        #[test]
        fn linearity(seed in 0u64..1000, x1 in proptest::collection::vec(-1.0f64..1.0, 12), x2 in proptest::collection::vec(-1.0f64..1.0, 12)) {
            let f = CodingMatrix::generate(MatrixHeader { seed, m: 5, n: 12, l: 3 }).unwrap();
            let sum: Vec<f64> = x1.iter().zip(&x2).map(|(a, b)| a + b).collect();
            let lhs = f.apply(&sum).unwrap();
            let r1 = f.apply(&x1).unwrap();
            let r2 = f.apply(&x2).unwrap();
            for (l, (a, b)) in lhs.iter().zip(r1.iter().zip(&r2)) {
                prop_assert!((l - (a + b)).abs() < 1e-12);
            }
        }

        #[test]
        fn ser_is_invariant_under_monotone_maps(b in 2usize..6, est in proptest::collection::vec(0.0f64..1.0, 24), secs in proptest::collection::vec(1usize..6, 24)) {
            let l = 24 / b;
            let est = &est[..l * b];
            let m = Message::new(secs[..l].iter().map(|s| (s - 1) % b + 1).collect(), b).unwrap();
            let truth = section_encode(&m, b).unwrap();
            let mapped: Vec<f64> = est.iter().map(|x| (3.0 * x).exp() - 7.0).collect();
            prop_assert_eq!(section_error_rate(est, &truth).unwrap(), section_error_rate(&mapped, &truth).unwrap());
        }

        #[test]
        fn mse_is_bounded(b in 2usize..6, raw in proptest::collection::vec(0.0f64..1.0, 30)) {
            // estimates on the simplex, as produced by the decoder
            let l = 30 / b;
            let mut a = raw[..l * b].to_vec();
            for block in a.chunks_exact_mut(b) {
                let s: f64 = block.iter().sum::<f64>() + 1e-12;
                block.iter_mut().for_each(|x| *x /= s);
            }
            let truth = section_encode(&Message::new(vec![1; l], b).unwrap(), b).unwrap();
            let (_, e) = biased_mse(&a, &truth).unwrap();
            prop_assert!((0.0..=2.0).contains(&e));
        }
    }
}
