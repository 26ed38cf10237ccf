//! GF(2) linear-code machinery: codeword enumeration, duals, weight
//! enumerators, the MacWilliams transform, and the robustness quantity.

use crate::error::{Error, Result};

/// Hard cap on code length for explicit codeword enumeration.
pub const ENUMERATION_CAP: usize = 20;

/// A length-`len` binary vector, bit for coordinate 1 stored as the most
/// significant of the low `len` bits. The raw mask therefore doubles as the
/// computational-basis index of the corresponding `|x>` state.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BitVector {
    bits: u32,
    len: usize,
}

impl BitVector {
    pub fn new(bits: u32, len: usize) -> Self {
        assert!(len >= 1 && len <= 32, "bit vector length out of range");
        Self {
            bits: bits & mask_low(len),
            len,
        }
    }

    pub fn zero(len: usize) -> Self {
        Self::new(0, len)
    }

    /// Parse a string of '0'/'1' characters, coordinate 1 first.
    pub fn parse(s: &str) -> Result<Self> {
        if s.is_empty() || s.len() > 32 {
            return Err(Error::Parse {
                line: 0,
                msg: format!("bad generator row length {}", s.len()),
            });
        }
        let mut bits = 0u32;
        for c in s.chars() {
            bits <<= 1;
            match c {
                '0' => {}
                '1' => bits |= 1,
                _ => {
                    return Err(Error::Parse {
                        line: 0,
                        msg: format!("invalid character '{c}' in generator row"),
                    })
                }
            }
        }
        Ok(Self { bits, len: s.len() })
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_zero(&self) -> bool {
        self.bits == 0
    }

    /// Hamming weight.
    pub fn weight(&self) -> usize {
        self.bits.count_ones() as usize
    }

    /// Coordinate `i` (1-based, coordinate 1 is the leftmost bit).
    pub fn get(&self, i: usize) -> u8 {
        assert!(i >= 1 && i <= self.len);
        ((self.bits >> (self.len - i)) & 1) as u8
    }

    pub fn xor(&self, other: &Self) -> Self {
        assert_eq!(self.len, other.len);
        Self {
            bits: self.bits ^ other.bits,
            len: self.len,
        }
    }

    /// Binary inner product mod 2.
    pub fn dot(&self, other: &Self) -> u8 {
        assert_eq!(self.len, other.len);
        ((self.bits & other.bits).count_ones() & 1) as u8
    }

    /// Computational-basis index (coordinate 1 as most significant bit).
    pub fn index(&self) -> usize {
        self.bits as usize
    }
}

impl std::fmt::Display for BitVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for i in 1..=self.len {
            write!(f, "{}", self.get(i))?;
        }
        Ok(())
    }
}

impl std::fmt::Debug for BitVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "BitVector({self})")
    }
}

fn mask_low(len: usize) -> u32 {
    if len >= 32 {
        u32::MAX
    } else {
        (1u32 << len) - 1
    }
}

/// Reduced GF(2) row basis: rows keep distinct leading bits, sorted descending.
struct XorBasis {
    rows: Vec<u32>,
}

impl XorBasis {
    fn new() -> Self {
        Self { rows: Vec::new() }
    }

    /// Insert a vector; returns false if it lies in the current span.
    fn insert(&mut self, v: u32) -> bool {
        let mut v = v;
        for &b in &self.rows {
            v = std::cmp::min(v, v ^ b);
        }
        if v == 0 {
            return false;
        }
        for b in self.rows.iter_mut() {
            *b = std::cmp::min(*b, *b ^ v);
        }
        self.rows.push(v);
        self.rows.sort_unstable_by(|a, b| b.cmp(a));
        true
    }
}

/// An [n, k] binary linear code held as row-reduced generators plus the
/// enumerated codeword set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryCode {
    n: usize,
    generators: Vec<BitVector>,
    codewords: Vec<BitVector>,
}

impl BinaryCode {
    /// Build a code from generator rows. Rows are Gaussian-eliminated over
    /// GF(2); linearly dependent input rows are a hard error.
    pub fn from_generators(rows: &[BitVector], n: usize) -> Result<Self> {
        if n < 1 || n > ENUMERATION_CAP {
            return Err(Error::SizeCap {
                n,
                cap: ENUMERATION_CAP,
            });
        }
        if rows.len() > n {
            return Err(Error::DimensionExceedsLength { k: rows.len(), n });
        }
        for r in rows {
            if r.len() != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    got: r.len(),
                });
            }
        }
        let mut basis = XorBasis::new();
        for (i, r) in rows.iter().enumerate() {
            if !basis.insert(r.bits()) {
                return Err(Error::RankDeficient { row: i });
            }
        }
        let generators: Vec<BitVector> = basis.rows.iter().map(|&b| BitVector::new(b, n)).collect();
        let mut codewords: Vec<u32> = vec![0];
        for g in &generators {
            let g = g.bits();
            let prev = codewords.clone();
            codewords.extend(prev.iter().map(|c| c ^ g));
        }
        codewords.sort_unstable();
        let codewords = codewords
            .into_iter()
            .map(|c| BitVector::new(c, n))
            .collect();
        Ok(Self {
            n,
            generators,
            codewords,
        })
    }

    /// The trivial [n, 0] code {00...0}.
    pub fn trivial(n: usize) -> Self {
        Self::from_generators(&[], n).expect("trivial code")
    }

    /// The [n, 1] repetition code; its probe state is the n-qubit GHZ state.
    pub fn repetition(n: usize) -> Self {
        Self::from_generators(&[BitVector::new(mask_low(n), n)], n).expect("repetition code")
    }

    /// The [7, 3] X-stabilizer code of the Steane code.
    pub fn steane_x() -> Self {
        let rows = ["1110100", "0111010", "0011101"]
            .iter()
            .map(|s| BitVector::parse(s).unwrap())
            .collect::<Vec<_>>();
        Self::from_generators(&rows, 7).expect("steane code")
    }

    /// Parse the plain-text code file format: one generator row per line,
    /// '#' starts a comment, and a lone `n=<N>` header denotes the trivial
    /// code of length N.
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut rows: Vec<BitVector> = Vec::new();
        let mut header_n: Option<usize> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let lineno = idx + 1;
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(v) = line.strip_prefix("n=") {
                header_n = Some(v.trim().parse::<usize>().map_err(|_| Error::Parse {
                    line: lineno,
                    msg: format!("bad header '{line}'"),
                })?);
                continue;
            }
            let row = BitVector::parse(line).map_err(|e| match e {
                Error::Parse { msg, .. } => Error::Parse { line: lineno, msg },
                other => other,
            })?;
            if let Some(first) = rows.first() {
                if row.len() != first.len() {
                    return Err(Error::Parse {
                        line: lineno,
                        msg: format!(
                            "row length {} differs from first row length {}",
                            row.len(),
                            first.len()
                        ),
                    });
                }
            }
            rows.push(row);
        }
        match (rows.is_empty(), header_n) {
            (true, Some(n)) => Self::from_generators(&[], n),
            (true, None) => Err(Error::Parse {
                line: 0,
                msg: "empty code file without an n=<N> header".into(),
            }),
            (false, _) => {
                let n = rows[0].len();
                Self::from_generators(&rows, n)
            }
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dimension(&self) -> usize {
        self.generators.len()
    }

    /// |C| = 2^k.
    pub fn size(&self) -> usize {
        1usize << self.generators.len()
    }

    pub fn generators(&self) -> &[BitVector] {
        &self.generators
    }

    pub fn codewords(&self) -> &[BitVector] {
        &self.codewords
    }

    pub fn contains(&self, v: &BitVector) -> bool {
        v.len() == self.n
            && self
                .codewords
                .binary_search_by(|c| c.bits().cmp(&v.bits()))
                .is_ok()
    }

    pub fn contains_index(&self, idx: usize) -> bool {
        idx < (1usize << self.n) && self.contains(&BitVector::new(idx as u32, self.n))
    }

    /// The dual code: all v with <v, c> = 0 for every codeword c, found by
    /// brute-force inner-product filtering over the full space.
    pub fn dual(&self) -> Self {
        let mut basis = XorBasis::new();
        let target = self.n - self.dimension();
        'outer: for v in 1..(1u32 << self.n) {
            let cand = BitVector::new(v, self.n);
            for g in &self.generators {
                if cand.dot(g) != 0 {
                    continue 'outer;
                }
            }
            basis.insert(v);
            if basis.rows.len() == target {
                break;
            }
        }
        let rows: Vec<BitVector> = basis.rows.iter().map(|&b| BitVector::new(b, self.n)).collect();
        Self::from_generators(&rows, self.n).expect("dual basis is independent")
    }

    /// Tally codeword counts by Hamming weight.
    pub fn weight_enumerator(&self) -> WeightEnumerator {
        let mut coeffs = vec![0u64; self.n + 1];
        for c in &self.codewords {
            coeffs[c.weight()] += 1;
        }
        WeightEnumerator { coeffs }
    }

    /// True when some coordinate is zero in every codeword, i.e. the dual
    /// contains weight-1 codewords. The protocol treats such codes as
    /// degenerate.
    pub fn is_degenerate(&self) -> bool {
        let mut support = 0u32;
        for c in &self.codewords {
            support |= c.bits();
        }
        support != mask_low(self.n)
    }
}

impl serde::Serialize for BinaryCode {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("BinaryCode", 2)?;
        st.serialize_field("n", &self.n)?;
        let gens: Vec<String> = self.generators.iter().map(|g| g.to_string()).collect();
        st.serialize_field("generators", &gens)?;
        st.end()
    }
}

impl<'de> serde::Deserialize<'de> for BinaryCode {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(serde::Deserialize)]
        struct Repr {
            n: usize,
            generators: Vec<String>,
        }
        let repr = Repr::deserialize(d)?;
        let rows: std::result::Result<Vec<BitVector>, _> =
            repr.generators.iter().map(|s| BitVector::parse(s)).collect();
        let rows = rows.map_err(serde::de::Error::custom)?;
        BinaryCode::from_generators(&rows, repr.n).map_err(serde::de::Error::custom)
    }
}

/// Coefficients W_0..W_n counting codewords of each Hamming weight.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightEnumerator {
    coeffs: Vec<u64>,
}

impl WeightEnumerator {
    pub fn new(coeffs: Vec<u64>) -> Self {
        assert!(!coeffs.is_empty());
        Self { coeffs }
    }

    pub fn coefficients(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn coefficient(&self, k: usize) -> u64 {
        self.coeffs.get(k).copied().unwrap_or(0)
    }

    pub fn length(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn total(&self) -> u64 {
        self.coeffs.iter().sum()
    }

    /// MacWilliams transform via exact integer polynomial arithmetic:
    /// W_dual(z) = (1/|C|) sum_k W_k (1+z)^(n-k) (1-z)^k.
    pub fn macwilliams_transform(&self, n: usize, code_size: u64) -> Result<WeightEnumerator> {
        if self.length() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: self.length(),
            });
        }
        if code_size == 0 || self.total() != code_size {
            return Err(Error::InvalidEnumerator(format!(
                "coefficients sum to {}, claimed code size {}",
                self.total(),
                code_size
            )));
        }
        let mut acc = vec![0i128; n + 1];
        for (k, &wk) in self.coeffs.iter().enumerate() {
            if wk == 0 {
                continue;
            }
            let term = poly_mul(&poly_pow(&[1, 1], n - k), &poly_pow(&[1, -1], k));
            for (j, &c) in term.iter().enumerate() {
                acc[j] += (wk as i128) * c;
            }
        }
        let size = code_size as i128;
        let mut out = Vec::with_capacity(n + 1);
        for (j, &c) in acc.iter().enumerate() {
            if c % size != 0 || c / size < 0 {
                return Err(Error::InvalidEnumerator(format!(
                    "transform coefficient {j} is {c}/{size}"
                )));
            }
            out.push((c / size) as u64);
        }
        Ok(WeightEnumerator { coeffs: out })
    }
}

fn poly_mul(a: &[i128], b: &[i128]) -> Vec<i128> {
    let mut out = vec![0i128; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_pow(base: &[i128], e: usize) -> Vec<i128> {
    let mut out = vec![1i128];
    for _ in 0..e {
        out = poly_mul(&out, base);
    }
    out
}

pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut out: u128 = 1;
    for i in 0..k {
        out = out * (n - i) as u128 / (i + 1) as u128;
    }
    out as u64
}

/// Robustness of the code: sum_{k>0} (1-pt)^{n-k} (pt)^k W_dual_k.
///
/// Both the direct k-sum and the closed form
/// (1-pt)^n [W_dual(pt/(1-pt)) - 1] are evaluated and must agree.
pub fn robustness(w_dual: &WeightEnumerator, p: f64, theta: f64, n: usize) -> Result<f64> {
    let pt = check_noise_product(p, theta)?;
    if w_dual.length() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: w_dual.length(),
        });
    }
    let mut direct = 0.0;
    for k in 1..=n {
        direct += (1.0 - pt).powi((n - k) as i32) * pt.powi(k as i32) * w_dual.coefficient(k) as f64;
    }
    let z = pt / (1.0 - pt);
    let mut poly = 0.0;
    for k in 0..=n {
        poly += w_dual.coefficient(k) as f64 * z.powi(k as i32);
    }
    let closed = (1.0 - pt).powi(n as i32) * (poly - 1.0);
    let scale = direct.abs().max(closed.abs()).max(1e-300);
    if (direct - closed).abs() > 1e-12 * scale.max(1.0) {
        return Err(Error::InvariantViolation(format!(
            "robustness forms disagree: {direct} vs {closed}"
        )));
    }
    Ok(direct)
}

/// Slack of the Robustness Bound: [1 - (1-pt)^n] - robustness. Nonnegative
/// for every linear code; zero exactly when the dual is the full space.
pub fn robustness_bound_slack(
    w_dual: &WeightEnumerator,
    p: f64,
    theta: f64,
    n: usize,
) -> Result<f64> {
    let pt = check_noise_product(p, theta)?;
    let w = robustness(w_dual, p, theta, n)?;
    Ok((1.0 - (1.0 - pt).powi(n as i32)) - w)
}

pub fn check_noise_product(p: f64, theta: f64) -> Result<f64> {
    let pt = p * theta;
    if !(0.0..1.0).contains(&pt) {
        return Err(Error::Domain(format!("p*theta = {pt} outside [0, 1)")));
    }
    Ok(pt)
}

/// Sample a random code of length n: random dimension, random independent
/// generator rows.
pub fn random_code<R: rand::Rng>(n: usize, rng: &mut R) -> BinaryCode {
    use rand::seq::SliceRandom;
    let k = rng.gen_range(0..=n);
    let mut basis = XorBasis::new();
    let mut rows: Vec<u32> = Vec::new();
    let mut tries = 0;
    while rows.len() < k && tries < 400 {
        tries += 1;
        let cand: u32 = rng.gen::<u32>() & mask_low(n);
        if cand != 0 && basis.insert(cand) {
            rows.push(cand);
        }
    }
    rows.shuffle(rng);
    let rows: Vec<BitVector> = rows.into_iter().map(|b| BitVector::new(b, n)).collect();
    BinaryCode::from_generators(&rows, n).expect("rows kept independent")
}
