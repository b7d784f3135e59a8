//! Fixed-dimension complex linear algebra for three qutrits.
//!
//! Two shapes matter for the game: single-qutrit operators ([`Op3`]) and the
//! 27-dimensional joint state of the opened box, Bob's choice and Alice's
//! choice ([`StateVector27`]). Joint operators ([`Op27`]) are kept sparse by
//! input column because everything the game builds is either a basis
//! permutation or a single-qutrit operator embedded with identities.
//!
//! # Basis layout
//!
//! A ket `|o b a⟩` lives at index `9·o + 3·b + a`: the opened box is the most
//! significant digit and Alice's choice the least. This layout is used by
//! every module in the crate.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{EngineError, Result};

/// Tolerance applied to strategy matrices supplied from outside the engine.
pub const UNITARY_TOL: f64 = 1e-9;
/// Tolerance for states constructed internally.
pub const INTERNAL_TOL: f64 = 1e-12;

pub const DIM: usize = 27;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Linear index of the basis ket `|o b a⟩`.
#[inline]
pub fn basis_index(o: usize, b: usize, a: usize) -> usize {
    debug_assert!(o < 3 && b < 3 && a < 3);
    9 * o + 3 * b + a
}

/// Inverse of [`basis_index`]: returns `(o, b, a)`.
#[inline]
pub fn decode_index(index: usize) -> (usize, usize, usize) {
    debug_assert!(index < DIM);
    (index / 9, (index / 3) % 3, index % 3)
}

/// A 3×3 complex operator on one qutrit.
///
/// `self.0[i][j]` is the amplitude sent from input ket `|j⟩` to output `|i⟩`.
#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Op3(pub [[Complex64; 3]; 3]);

impl Op3 {
    pub const fn zero() -> Self {
        Op3([[ZERO; 3]; 3])
    }

    pub const fn identity() -> Self {
        Op3([[ONE, ZERO, ZERO], [ZERO, ONE, ZERO], [ZERO, ZERO, ONE]])
    }

    pub fn from_real(rows: [[f64; 3]; 3]) -> Self {
        let mut out = Op3::zero();
        for i in 0..3 {
            for j in 0..3 {
                out.0[i][j] = Complex64::new(rows[i][j], 0.0);
            }
        }
        out
    }

    pub fn diag(d: [Complex64; 3]) -> Self {
        let mut out = Op3::zero();
        for i in 0..3 {
            out.0[i][i] = d[i];
        }
        out
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.0[row][col]
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        let mut out = *self;
        for row in out.0.iter_mut() {
            for z in row.iter_mut() {
                *z = f(*z);
            }
        }
        out
    }

    pub fn scale(&self, s: Complex64) -> Self {
        self.map(|z| z * s)
    }

    /// Entrywise complex conjugate (not the adjoint).
    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn transpose(&self) -> Self {
        let mut out = Op3::zero();
        for i in 0..3 {
            for j in 0..3 {
                out.0[i][j] = self.0[j][i];
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        self.transpose().conj()
    }

    pub fn trace(&self) -> Complex64 {
        self.0[0][0] + self.0[1][1] + self.0[2][2]
    }

    pub fn det(&self) -> Complex64 {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Induced infinity norm (max absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        self.0
            .iter()
            .map(|row| row.iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Op3) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                worst = worst.max((self.0[i][j] - other.0[i][j]).norm());
            }
        }
        worst
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Largest entry of `|U†U − I|`.
    pub fn unitarity_defect(&self) -> f64 {
        (self.adjoint() * *self).max_abs_diff(&Op3::identity())
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.is_finite() && self.unitarity_defect() <= tol
    }

    pub fn is_special_unitary(&self, tol: f64) -> bool {
        self.is_unitary(tol) && (self.det() - ONE).norm() <= tol
    }

    /// Rejects anything outside SU(3) at tolerance `tol`.
    pub fn check_special_unitary(&self, tol: f64) -> Result<()> {
        if self.is_special_unitary(tol) {
            Ok(())
        } else {
            Err(EngineError::NonUnitaryStrategy {
                defect: self.unitarity_defect(),
                det_error: (self.det() - ONE).norm(),
            })
        }
    }

    pub fn apply(&self, v: [Complex64; 3]) -> [Complex64; 3] {
        let mut out = [ZERO; 3];
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.0[i][0] * v[0] + self.0[i][1] * v[1] + self.0[i][2] * v[2];
        }
        out
    }
}

impl Default for Op3 {
    fn default() -> Self {
        Op3::identity()
    }
}

impl fmt::Debug for Op3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Op3[")?;
        for row in &self.0 {
            write!(f, "  ")?;
            for z in row {
                write!(f, "{:>+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Mul for Op3 {
    type Output = Op3;

    fn mul(self, rhs: Op3) -> Op3 {
        let mut out = Op3::zero();
        for i in 0..3 {
            for j in 0..3 {
                out.0[i][j] = (0..3).map(|k| self.0[i][k] * rhs.0[k][j]).sum();
            }
        }
        out
    }
}

impl Add for Op3 {
    type Output = Op3;

    fn add(self, rhs: Op3) -> Op3 {
        let mut out = self;
        for i in 0..3 {
            for j in 0..3 {
                out.0[i][j] += rhs.0[i][j];
            }
        }
        out
    }
}

impl Sub for Op3 {
    type Output = Op3;

    fn sub(self, rhs: Op3) -> Op3 {
        self + rhs.scale(-ONE)
    }
}

/// The eight Gell-Mann matrices `λ₁ … λ₈`, normalized so that
/// `tr(λ_a λ_b) = 2 δ_ab`.
pub fn gellmann_generators() -> [Op3; 8] {
    let i = Complex64::i();
    let r = |x: f64| Complex64::new(x, 0.0);
    let mut g = [Op3::zero(); 8];
    // λ1, λ2, λ3: the (0,1) block
    g[0].0[0][1] = ONE;
    g[0].0[1][0] = ONE;
    g[1].0[0][1] = -i;
    g[1].0[1][0] = i;
    g[2].0[0][0] = ONE;
    g[2].0[1][1] = -ONE;
    // λ4, λ5: the (0,2) block
    g[3].0[0][2] = ONE;
    g[3].0[2][0] = ONE;
    g[4].0[0][2] = -i;
    g[4].0[2][0] = i;
    // λ6, λ7: the (1,2) block
    g[5].0[1][2] = ONE;
    g[5].0[2][1] = ONE;
    g[6].0[1][2] = -i;
    g[6].0[2][1] = i;
    let s = 1.0 / 3f64.sqrt();
    g[7] = Op3::diag([r(s), r(s), r(-2.0 * s)]);
    g
}

/// Coordinates of an SU(3) element in the Gell-Mann chart:
/// `U = exp(i Σ θ_a λ_a)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Su3Params {
    pub theta: [f64; 8],
}

impl Su3Params {
    pub fn new(theta: [f64; 8]) -> Self {
        Su3Params { theta }
    }

    pub fn is_finite(&self) -> bool {
        self.theta.iter().all(|t| t.is_finite())
    }

    /// Hermitian generator `Σ θ_a λ_a`.
    pub fn hermitian(&self) -> Op3 {
        gellmann_generators()
            .iter()
            .zip(self.theta.iter())
            .fold(Op3::zero(), |acc, (g, &t)| acc + g.scale(Complex64::new(t, 0.0)))
    }
}

pub fn su3_from_params(p: &Su3Params) -> Result<Op3> {
    if !p.is_finite() {
        return Err(EngineError::InvalidArgument(
            "SU(3) parameters must be finite".into(),
        ));
    }
    matexp3(&p.hermitian().scale(Complex64::i()))
}

const TAYLOR_MAX_TERMS: usize = 30;
// Scaled norm target; at 0.5 the 20th Taylor term is already below 1e-24.
const SCALED_NORM: f64 = 0.5;

/// Matrix exponential by scaling and squaring around a truncated Taylor
/// series.
pub fn matexp3(m: &Op3) -> Result<Op3> {
    if !m.is_finite() {
        return Err(EngineError::ExpNotConverged);
    }
    let norm = m.norm_inf();
    let squarings = if norm > SCALED_NORM {
        (norm / SCALED_NORM).log2().ceil() as i32
    } else {
        0
    };
    if squarings > 1000 {
        return Err(EngineError::ExpNotConverged);
    }
    let scaled = m.scale(Complex64::new(2f64.powi(-squarings), 0.0));

    let mut sum = Op3::identity();
    let mut term = Op3::identity();
    let mut converged = false;
    for k in 1..=TAYLOR_MAX_TERMS {
        term = (term * scaled).scale(Complex64::new(1.0 / k as f64, 0.0));
        sum = sum + term;
        if term.norm_inf() <= f64::EPSILON * 1e-3 * sum.norm_inf() {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(EngineError::ExpNotConverged);
    }
    for _ in 0..squarings {
        sum = sum * sum;
    }
    if !sum.is_finite() {
        return Err(EngineError::ExpNotConverged);
    }
    Ok(sum)
}

const RANDOM_SU3_ATTEMPTS: u32 = 8;

/// Deterministic SU(3) sample for `seed`.
///
/// Each attempt draws from its own ChaCha stream, so a degenerate draw is
/// retried on the next stream without disturbing the others.
pub fn random_su3(seed: u64) -> Result<Op3> {
    for attempt in 0..RANDOM_SU3_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(attempt as u64);
        if let Some(u) = gaussian_su3(&mut rng) {
            return Ok(u);
        }
    }
    Err(EngineError::DegenerateSample(RANDOM_SU3_ATTEMPTS))
}

/// SU(3) sample drawn from a caller-owned generator.
pub fn random_su3_with<R: Rng + ?Sized>(rng: &mut R) -> Result<Op3> {
    for _ in 0..RANDOM_SU3_ATTEMPTS {
        if let Some(u) = gaussian_su3(rng) {
            return Ok(u);
        }
    }
    Err(EngineError::DegenerateSample(RANDOM_SU3_ATTEMPTS))
}

fn gaussian_su3<R: Rng + ?Sized>(rng: &mut R) -> Option<Op3> {
    let mut cols = [[ZERO; 3]; 3];
    for col in cols.iter_mut() {
        for z in col.iter_mut() {
            *z = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
        }
    }
    // modified Gram-Schmidt over columns
    for j in 0..3 {
        for k in 0..j {
            let proj: Complex64 = (0..3).map(|r| cols[k][r].conj() * cols[j][r]).sum();
            for r in 0..3 {
                let q = cols[k][r];
                cols[j][r] -= proj * q;
            }
        }
        let norm = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-8 {
            return None;
        }
        for z in cols[j].iter_mut() {
            *z /= norm;
        }
    }
    let mut u = Op3::zero();
    for (j, col) in cols.iter().enumerate() {
        for (i, z) in col.iter().enumerate() {
            u.0[i][j] = *z;
        }
    }
    let phase = u.det().arg();
    Some(u.scale(Complex64::from_polar(1.0, -phase / 3.0)))
}

/// Amplitudes of the joint state of the three qutrits.
#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StateVector27(pub [Complex64; DIM]);

impl StateVector27 {
    pub const fn zero() -> Self {
        StateVector27([ZERO; DIM])
    }

    pub fn basis(o: usize, b: usize, a: usize) -> Self {
        let mut s = StateVector27::zero();
        s.0[basis_index(o, b, a)] = ONE;
        s
    }

    pub fn norm2(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `⟨self|other⟩`, antilinear in `self`.
    pub fn inner(&self, other: &StateVector27) -> Complex64 {
        self.0.iter().zip(other.0.iter()).map(|(x, y)| x.conj() * y).sum()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = *self;
        for z in out.0.iter_mut() {
            *z *= s;
        }
        out
    }

    /// Unit-norm copy, or `None` for the zero vector.
    pub fn normalized(&self) -> Option<Self> {
        let n = self.norm2();
        if n > 0.0 && n.is_finite() {
            Some(self.scale(Complex64::new(1.0 / n.sqrt(), 0.0)))
        } else {
            None
        }
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn max_abs_diff(&self, other: &StateVector27) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    /// Applies `op` to Bob's qutrit. Same result as
    /// `embed_bob(op).apply(self)` without building the 27×27 operator.
    pub fn apply_bob(&self, op: &Op3) -> Self {
        let mut out = StateVector27::zero();
        for o in 0..3 {
            for a in 0..3 {
                let v = [
                    self.0[basis_index(o, 0, a)],
                    self.0[basis_index(o, 1, a)],
                    self.0[basis_index(o, 2, a)],
                ];
                let w = op.apply(v);
                for b in 0..3 {
                    out.0[basis_index(o, b, a)] = w[b];
                }
            }
        }
        out
    }

    /// Applies `op` to Alice's qutrit.
    pub fn apply_alice(&self, op: &Op3) -> Self {
        let mut out = StateVector27::zero();
        for base in (0..DIM).step_by(3) {
            let w = op.apply([self.0[base], self.0[base + 1], self.0[base + 2]]);
            out.0[base..base + 3].copy_from_slice(&w);
        }
        out
    }
}

impl Default for StateVector27 {
    fn default() -> Self {
        StateVector27::zero()
    }
}

impl fmt::Debug for StateVector27 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut list = f.debug_map();
        for (i, z) in self.0.iter().enumerate() {
            if z.norm() > 0.0 {
                let (o, b, a) = decode_index(i);
                list.entry(&format_args!("|{o}{b}{a}⟩"), z);
            }
        }
        list.finish()
    }
}

impl Index<usize> for StateVector27 {
    type Output = Complex64;

    fn index(&self, i: usize) -> &Complex64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for StateVector27 {
    fn index_mut(&mut self, i: usize) -> &mut Complex64 {
        &mut self.0[i]
    }
}

impl Add for StateVector27 {
    type Output = StateVector27;

    fn add(self, rhs: StateVector27) -> StateVector27 {
        let mut out = self;
        for (x, y) in out.0.iter_mut().zip(rhs.0.iter()) {
            *x += y;
        }
        out
    }
}

/// Sparse operator on the joint 27-dimensional space, stored by input
/// column: `columns[j]` lists `(i, w)` with `⟨i|Op|j⟩ = w`.
#[derive(Clone, Debug, PartialEq)]
pub struct Op27 {
    columns: Vec<Vec<(usize, Complex64)>>,
}

impl Op27 {
    pub fn identity() -> Self {
        Op27::from_permutation(|j| j)
    }

    /// Basis permutation sending ket `j` to ket `f(j)` with unit weight.
    pub fn from_permutation(f: impl Fn(usize) -> usize) -> Self {
        Op27 {
            columns: (0..DIM).map(|j| vec![(f(j), ONE)]).collect(),
        }
    }

    pub fn from_columns(columns: Vec<Vec<(usize, Complex64)>>) -> Self {
        assert_eq!(columns.len(), DIM, "Op27 needs 27 input columns");
        Op27 { columns }
    }

    pub fn column(&self, input: usize) -> &[(usize, Complex64)] {
        &self.columns[input]
    }

    pub fn apply(&self, s: &StateVector27) -> StateVector27 {
        let mut out = StateVector27::zero();
        for (j, col) in self.columns.iter().enumerate() {
            let amp = s.0[j];
            if amp == ZERO {
                continue;
            }
            for &(i, w) in col {
                out.0[i] += w * amp;
            }
        }
        out
    }

    /// `self · rhs` (apply `rhs` first).
    pub fn compose(&self, rhs: &Op27) -> Op27 {
        let columns = rhs
            .columns
            .iter()
            .map(|col| {
                let mut dense = [ZERO; DIM];
                for &(k, w) in col {
                    for &(i, v) in &self.columns[k] {
                        dense[i] += v * w;
                    }
                }
                dense
                    .iter()
                    .enumerate()
                    .filter(|(_, z)| **z != ZERO)
                    .map(|(i, z)| (i, *z))
                    .collect()
            })
            .collect();
        Op27 { columns }
    }

    pub fn scale(&self, s: Complex64) -> Op27 {
        Op27 {
            columns: self
                .columns
                .iter()
                .map(|col| col.iter().map(|&(i, w)| (i, w * s)).collect())
                .collect(),
        }
    }

    pub fn add(&self, rhs: &Op27) -> Op27 {
        let columns = self
            .columns
            .iter()
            .zip(rhs.columns.iter())
            .map(|(a, b)| {
                let mut dense = [ZERO; DIM];
                for &(i, w) in a.iter().chain(b.iter()) {
                    dense[i] += w;
                }
                dense
                    .iter()
                    .enumerate()
                    .filter(|(_, z)| **z != ZERO)
                    .map(|(i, z)| (i, *z))
                    .collect()
            })
            .collect();
        Op27 { columns }
    }

    /// Dense matrix, `m[i][j] = ⟨i|Op|j⟩`.
    pub fn to_dense(&self) -> Vec<[Complex64; DIM]> {
        let mut m = vec![[ZERO; DIM]; DIM];
        for (j, col) in self.columns.iter().enumerate() {
            for &(i, w) in col {
                m[i][j] += w;
            }
        }
        m
    }

    /// The image of each basis ket if this is a unit-weight bijection.
    pub fn as_permutation(&self) -> Option<[usize; DIM]> {
        let mut image = [0usize; DIM];
        let mut seen = [false; DIM];
        for (j, col) in self.columns.iter().enumerate() {
            match col.as_slice() {
                [(i, w)] if *w == ONE && !seen[*i] => {
                    seen[*i] = true;
                    image[j] = *i;
                }
                _ => return None,
            }
        }
        Some(image)
    }

    pub fn is_permutation(&self) -> bool {
        self.as_permutation().is_some()
    }

    /// Largest entry of `|Op†Op − I|`.
    pub fn unitarity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for j in 0..DIM {
            for k in 0..DIM {
                let mut g = ZERO;
                // ⟨col_j|col_k⟩ via sparse merge
                for &(i, wj) in &self.columns[j] {
                    for &(i2, wk) in &self.columns[k] {
                        if i == i2 {
                            g += wj.conj() * wk;
                        }
                    }
                }
                let target = if j == k { ONE } else { ZERO };
                worst = worst.max((g - target).norm());
            }
        }
        worst
    }
}

/// Embeds `op` on Bob's qutrit: `Î ⊗ op ⊗ Î`.
pub fn embed_bob(op: &Op3) -> Op27 {
    let columns = (0..DIM)
        .map(|j| {
            let (o, b, a) = decode_index(j);
            (0..3)
                .filter(|&i| op.0[i][b] != ZERO)
                .map(|i| (basis_index(o, i, a), op.0[i][b]))
                .collect()
        })
        .collect();
    Op27 { columns }
}

/// Embeds `op` on Alice's qutrit: `Î ⊗ Î ⊗ op`.
pub fn embed_alice(op: &Op3) -> Op27 {
    let columns = (0..DIM)
        .map(|j| {
            let (o, b, a) = decode_index(j);
            (0..3)
                .filter(|&i| op.0[i][a] != ZERO)
                .map(|i| (basis_index(o, b, i), op.0[i][a]))
                .collect()
        })
        .collect();
    Op27 { columns }
}
