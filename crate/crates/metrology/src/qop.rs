//! N-qubit operators as dense complex matrices: Pauli operators, probe
//! states, the all-Z Hamiltonian, and X-stabilizer projectors.
//!
//! Basis convention: the computational-basis index of |x> is the integer
//! value of the bitstring x with qubit 1 as the most significant bit.

use crate::error::{Error, Result};
use crate::gf2::{BinaryCode, BitVector};
use crate::linalg::{self, CMat};
use ndarray::Array2;
use num_complex::Complex64;

#[cfg(test)]
const ZERO: Complex64 = Complex64::new(0.0, 0.0);
#[cfg(test)]
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Hard cap on qubit count for dense simulation.
pub const QUBIT_CAP: usize = 12;


/// Label (a, b) of the Pauli operator E(a, b) with X part a and Z part b.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PauliLabel {
    a: BitVector,
    b: BitVector,
}

impl PauliLabel {
    pub fn new(a: BitVector, b: BitVector) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::LengthMismatch {
                expected: a.len(),
                got: b.len(),
            });
        }
        Ok(Self { a, b })
    }

    pub fn x_part(&self) -> BitVector {
        self.a
    }

    pub fn z_part(&self) -> BitVector {
        self.b
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

pub fn check_qubit_cap(n: usize) -> Result<()> {
    if n == 0 || n > QUBIT_CAP {
        return Err(Error::SizeCap { n, cap: QUBIT_CAP });
    }
    Ok(())
}

/// E(a, b) = i^{a1 b1} X^{a1} Z^{b1} (x) ... (x) i^{aN bN} X^{aN} Z^{bN}.
///
/// Each single-qubit factor is one of I, X, Z, Y, so the result is both
/// unitary and Hermitian.
pub fn pauli_operator(label: &PauliLabel) -> Result<CMat> {
    let n = label.len();
    check_qubit_cap(n)?;
    let dim = 1usize << n;
    let a = label.a.index();
    let b = label.b.index();
    let mut out: CMat = Array2::zeros((dim, dim));
    // E(a,b)|x> = i^{|a&b|} (-1)^{<x,b>} |x ^ a>
    let global = Complex64::i().powu((a & b).count_ones());
    for x in 0..dim {
        let sign = if (x & b).count_ones() & 1 == 1 { -1.0 } else { 1.0 };
        out[(x ^ a, x)] = global * sign;
    }
    Ok(out)
}

/// Probe state rho = (1/|C|) sum_{x,y in C} |x><y|, the density matrix of
/// the uniform superposition of codewords.
pub fn probe_state(code: &BinaryCode) -> Result<DensityMatrix> {
    let n = code.len();
    check_qubit_cap(n)?;
    let dim = 1usize << n;
    let amp = Complex64::new(1.0 / code.size() as f64, 0.0);
    let mut mat: CMat = Array2::zeros((dim, dim));
    for x in code.codewords() {
        for y in code.codewords() {
            mat[(x.index(), y.index())] = amp;
        }
    }
    Ok(DensityMatrix { mat, n_qubits: n })
}

/// Diagonal of H = sum_j Z_j: entry for |x> is N - 2 weight(x).
pub fn hamiltonian_diagonal(n: usize) -> Vec<f64> {
    let dim = 1usize << n;
    (0..dim)
        .map(|x: usize| n as f64 - 2.0 * x.count_ones() as f64)
        .collect()
}

/// H = sum_j Z_j as a dense diagonal matrix.
pub fn hamiltonian(n: usize) -> Result<CMat> {
    check_qubit_cap(n)?;
    let diag = hamiltonian_diagonal(n);
    let dim = diag.len();
    let mut out: CMat = Array2::zeros((dim, dim));
    for (x, &h) in diag.iter().enumerate() {
        out[(x, x)] = Complex64::new(h, 0.0);
    }
    Ok(out)
}

/// Projector onto the all-+1 syndrome of the code's X stabilizers:
/// Pi = (1/|C|) sum_{s in C} E(s, 0), i.e. Pi_{x,y} = [x^y in C]/|C|.
pub fn stabilizer_projector(code: &BinaryCode) -> Result<CMat> {
    let n = code.len();
    check_qubit_cap(n)?;
    let dim = 1usize << n;
    let member = codeword_membership(code);
    let amp = Complex64::new(1.0 / code.size() as f64, 0.0);
    let mut out: CMat = Array2::zeros((dim, dim));
    for x in 0..dim {
        for y in 0..dim {
            if member[x ^ y] {
                out[(x, y)] = amp;
            }
        }
    }
    Ok(out)
}

/// Membership bitmap over the full length-n space.
pub fn codeword_membership(code: &BinaryCode) -> Vec<bool> {
    let dim = 1usize << code.len();
    let mut member = vec![false; dim];
    for c in code.codewords() {
        member[c.index()] = true;
    }
    member
}

/// p(Pi = +1 | rho) = Tr(rho Pi), clamped to [0, 1].
pub fn measure_plus_probability(rho: &DensityMatrix, projector: &CMat) -> Result<f64> {
    let dim = rho.dim();
    if projector.nrows() != dim || projector.ncols() != dim {
        return Err(Error::DimensionMismatch(format!(
            "projector {}x{} vs state dim {dim}",
            projector.nrows(),
            projector.ncols()
        )));
    }
    let mut tr = 0.0f64;
    for x in 0..dim {
        for y in 0..dim {
            let prod = rho.mat[(x, y)] * projector[(y, x)];
            tr += prod.re;
        }
    }
    if !(-1e-9..=1.0 + 1e-9).contains(&tr) {
        return Err(Error::InvariantViolation(format!(
            "measurement probability {tr} outside [0, 1]"
        )));
    }
    Ok(tr.clamp(0.0, 1.0))
}

/// A 2^N x 2^N density matrix with its qubit count.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    pub mat: CMat,
    pub n_qubits: usize,
}

impl DensityMatrix {
    pub fn new(mat: CMat, n_qubits: usize) -> Result<Self> {
        check_qubit_cap(n_qubits)?;
        let dim = 1usize << n_qubits;
        if mat.nrows() != dim || mat.ncols() != dim {
            return Err(Error::DimensionMismatch(format!(
                "matrix {}x{} vs 2^{n_qubits}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        Ok(Self { mat, n_qubits })
    }

    pub fn dim(&self) -> usize {
        1usize << self.n_qubits
    }

    /// Hermiticity to 1e-10, unit trace to 1e-10, eigenvalues >= -1e-8.
    pub fn validate(&self) -> Result<()> {
        let herm = linalg::hermiticity_defect(&self.mat);
        if herm > 1e-10 {
            return Err(Error::InvariantViolation(format!(
                "hermiticity defect {herm:.3e}"
            )));
        }
        let tr = linalg::trace(&self.mat);
        if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
            return Err(Error::InvariantViolation(format!("trace {tr}")));
        }
        let min = linalg::min_eigenvalue(&self.mat);
        if min < -1e-8 {
            return Err(Error::InvariantViolation(format!(
                "negative eigenvalue {min:.3e}"
            )));
        }
        Ok(())
    }

    pub fn purity(&self) -> f64 {
        linalg::trace(&self.mat.dot(&self.mat)).re
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf2::BinaryCode;

    fn label(a: &str, b: &str) -> PauliLabel {
        PauliLabel::new(BitVector::parse(a).unwrap(), BitVector::parse(b).unwrap()).unwrap()
    }

    #[test]
    fn single_qubit_paulis() {
        let id = pauli_operator(&label("0", "0")).unwrap();
        assert_eq!(id[(0, 0)], ONE);
        assert_eq!(id[(1, 1)], ONE);
        assert_eq!(id[(0, 1)], ZERO);

        let x = pauli_operator(&label("1", "0")).unwrap();
        assert_eq!(x[(0, 1)], ONE);
        assert_eq!(x[(1, 0)], ONE);
        assert_eq!(x[(0, 0)], ZERO);

        let y = pauli_operator(&label("1", "1")).unwrap();
        assert!((y[(0, 1)] - Complex64::new(0.0, -1.0)).norm() < 1e-15);
        assert!((y[(1, 0)] - Complex64::new(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn pauli_squares_to_identity() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let n = rng.gen_range(1..=6usize);
            let a = BitVector::new(rng.gen::<u32>(), n);
            let b = BitVector::new(rng.gen::<u32>(), n);
            let e = pauli_operator(&PauliLabel::new(a, b).unwrap()).unwrap();
            let sq = e.dot(&e);
            let dim = 1 << n;
            for i in 0..dim {
                for j in 0..dim {
                    let want = if i == j { ONE } else { ZERO };
                    assert!((sq[(i, j)] - want).norm() < 1e-12);
                }
            }
            assert!(linalg::hermiticity_defect(&e) < 1e-12);
        }
    }

    #[test]
    fn z_pauli_sign_action_and_x_shift_action() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for n in 1..=5usize {
            let dim = 1 << n;
            for _ in 0..10 {
                let i = BitVector::new(rng.gen::<u32>(), n);
                let ez = pauli_operator(&PauliLabel::new(BitVector::zero(n), i).unwrap()).unwrap();
                let es = pauli_operator(&PauliLabel::new(i, BitVector::zero(n)).unwrap()).unwrap();
                for x in 0..dim {
                    let xv = BitVector::new(x as u32, n);
                    let sign = if xv.dot(&i) == 1 { -1.0 } else { 1.0 };
                    for r in 0..dim {
                        let want_z = if r == x { Complex64::new(sign, 0.0) } else { ZERO };
                        assert!((ez[(r, x)] - want_z).norm() < 1e-15);
                        let want_s = if r == x ^ i.index() { ONE } else { ZERO };
                        assert!((es[(r, x)] - want_s).norm() < 1e-15);
                    }
                }
            }
        }
    }

    #[test]
    fn probe_state_examples() {
        let bell = probe_state(&BinaryCode::repetition(2)).unwrap();
        for (i, j, v) in [(0, 0, 0.5), (0, 3, 0.5), (3, 0, 0.5), (3, 3, 0.5)] {
            assert!((bell.mat[(i, j)] - Complex64::new(v, 0.0)).norm() < 1e-15);
        }
        assert_eq!(bell.mat[(1, 1)], ZERO);
        assert!((bell.purity() - 1.0).abs() < 1e-12);

        let zero = probe_state(&BinaryCode::trivial(3)).unwrap();
        assert_eq!(zero.mat[(0, 0)], ONE);
        assert_eq!(zero.mat[(7, 7)], ZERO);

        let steane = probe_state(&BinaryCode::steane_x()).unwrap();
        assert!((steane.purity() - 1.0).abs() < 1e-12);
        let sq = steane.mat.dot(&steane.mat);
        assert!(linalg::frobenius_norm(&(&sq - &steane.mat)) < 1e-12);
        assert!((steane.mat[(0, 0)].re - 0.125).abs() < 1e-15);
    }

    #[test]
    fn hamiltonian_examples() {
        let h1 = hamiltonian(1).unwrap();
        assert_eq!(h1[(0, 0)].re, 1.0);
        assert_eq!(h1[(1, 1)].re, -1.0);
        let h2 = hamiltonian_diagonal(2);
        assert_eq!(h2, vec![2.0, 0.0, 0.0, -2.0]);
        assert_eq!(hamiltonian_diagonal(3)[7], -3.0);
    }

    #[test]
    fn hamiltonian_spectrum_is_binomial() {
        for n in 1..=5usize {
            let h = hamiltonian(n).unwrap();
            let vals = linalg::hermitian_eigenvalues(&h);
            let mut counts = std::collections::HashMap::new();
            for v in vals {
                *counts.entry(v.round() as i64).or_insert(0u64) += 1;
            }
            for w in 0..=n {
                let ev = n as i64 - 2 * w as i64;
                assert_eq!(counts[&ev], crate::gf2::binomial(n, w));
            }
        }
    }

    #[test]
    fn projector_examples() {
        let pi = stabilizer_projector(&BinaryCode::repetition(2)).unwrap();
        // (I + XX)/2
        for i in 0..4 {
            assert!((pi[(i, i)].re - 0.5).abs() < 1e-15);
            assert!((pi[(i, 3 - i)].re - 0.5).abs() < 1e-15);
        }
        let sq = pi.dot(&pi);
        assert!(linalg::frobenius_norm(&(&sq - &pi)) < 1e-12);

        let id = stabilizer_projector(&BinaryCode::trivial(2)).unwrap();
        assert!((linalg::trace(&id).re - 4.0).abs() < 1e-12);

        let ghz3 = stabilizer_projector(&BinaryCode::repetition(3)).unwrap();
        assert!((linalg::trace(&ghz3).re - 4.0).abs() < 1e-12);
        let sq = ghz3.dot(&ghz3);
        assert!(linalg::frobenius_norm(&(&sq - &ghz3)) < 1e-10);
    }

    #[test]
    fn projector_fixes_probe() {
        for code in [
            BinaryCode::repetition(3),
            BinaryCode::trivial(4),
            BinaryCode::steane_x(),
        ] {
            let rho = probe_state(&code).unwrap();
            let pi = stabilizer_projector(&code).unwrap();
            let prod = pi.dot(&rho.mat);
            assert!(linalg::frobenius_norm(&(&prod - &rho.mat)) < 1e-12);
            assert!((measure_plus_probability(&rho, &pi).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn measurement_probability_examples() {
        let ghz = BinaryCode::repetition(3);
        let pi = stabilizer_projector(&ghz).unwrap();
        // maximally mixed state: Tr(Pi)/2^N = 1/2
        let dim = 8;
        let mut mixed: CMat = Array2::zeros((dim, dim));
        for i in 0..dim {
            mixed[(i, i)] = Complex64::new(1.0 / dim as f64, 0.0);
        }
        let mixed = DensityMatrix::new(mixed, 3).unwrap();
        assert!((measure_plus_probability(&mixed, &pi).unwrap() - 0.5).abs() < 1e-12);

        // single-qubit dephasing flips the X^3 eigenvalue
        let rho = probe_state(&ghz).unwrap();
        let z1 = pauli_operator(
            &PauliLabel::new(BitVector::zero(3), BitVector::parse("100").unwrap()).unwrap(),
        )
        .unwrap();
        let flipped = DensityMatrix::new(z1.dot(&rho.mat).dot(&z1), 3).unwrap();
        assert!(measure_plus_probability(&flipped, &pi).unwrap() < 1e-12);
    }

    #[test]
    fn size_cap_enforced() {
        assert!(hamiltonian(13).is_err());
    }
}
