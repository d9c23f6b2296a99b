//! Combinatorics of length-(2p+1) bitstrings and the `B`/`φ` kernels.
//!
//! Bit `j` of the integer encodes `s_j`, so `s_0` is the least significant
//! bit and `s ⊕ t` is the native XOR. A bitstring of depth `p` records one
//! spin configuration per time slice of a forward/backward QAOA contraction
//! with the observable inserted at index `p`.
//!
//! Angles use the half-angle convention throughout: `B` is built from
//! `cos(β_j/2)` and `i·sin(β_j/2)` and `φ` from `γ_j/2`. This is the form in
//! which the mixer `exp(-iβ/2 X)` and the phase `exp(-iγ/2 H)` actually
//! enter the energy, and [`HALF_ANGLE_CONVENTION`] pins it for callers.

use crate::error::{Error, Result};
use crate::scalar::Real;
use num_complex::Complex;
use serde::{Deserialize, Serialize};

/// Marker for the angle convention: `true` means `B` and `φ` take `β_j/2`
/// and `γ_j/2`, matching a state `Π exp(-iβ_j/2 ΣX) exp(-iγ_j/2 H) |+⟩`.
pub const HALF_ANGLE_CONVENTION: bool = true;

/// Largest supported depth. `2^(2p+1)` strings must fit comfortably in memory
/// and in a `u32`.
pub const MAX_DEPTH: usize = 12;

/// The 2p QAOA parameters in radians.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngleVector<T = f64> {
    pub betas: Vec<T>,
    pub gammas: Vec<T>,
}

impl<T: Real> AngleVector<T> {
    /// Builds an angle vector, rejecting mismatched lengths, `p = 0` and
    /// non-finite entries.
    pub fn new(betas: Vec<T>, gammas: Vec<T>) -> Result<Self> {
        if betas.len() != gammas.len() {
            return Err(Error::validation(format!(
                "betas has {} entries but gammas has {}",
                betas.len(),
                gammas.len()
            )));
        }
        if betas.is_empty() {
            return Err(Error::validation("depth p must be at least 1"));
        }
        if betas.len() > MAX_DEPTH {
            return Err(Error::resource(format!(
                "depth {} exceeds the supported maximum {MAX_DEPTH}",
                betas.len()
            )));
        }
        if betas.iter().chain(gammas.iter()).any(|x| !x.is_finite()) {
            return Err(Error::validation("angles must be finite"));
        }
        Ok(Self { betas, gammas })
    }

    /// Builds from a flat `[β_0..β_{p-1}, γ_0..γ_{p-1}]` slice.
    pub fn from_flat(x: &[T]) -> Result<Self> {
        if x.len() % 2 != 0 {
            return Err(Error::validation("flat angle slice must have even length"));
        }
        let p = x.len() / 2;
        Self::new(x[..p].to_vec(), x[p..].to_vec())
    }

    /// Flattens into `[β.., γ..]`.
    pub fn to_flat(&self) -> Vec<T> {
        self.betas.iter().chain(self.gammas.iter()).copied().collect()
    }

    /// QAOA depth.
    pub fn p(&self) -> usize {
        self.betas.len()
    }

    /// Checks invariants on a value that may have been deserialized.
    pub fn validate(&self) -> Result<()> {
        Self::new(self.betas.clone(), self.gammas.clone()).map(|_| ())
    }

    /// Converts the scalar type.
    pub fn cast<U: Real>(&self) -> AngleVector<U> {
        let conv = |v: &Vec<T>| v.iter().map(|x| U::lit(x.to_f64_lossy())).collect();
        AngleVector {
            betas: conv(&self.betas),
            gammas: conv(&self.gammas),
        }
    }
}

/// A bitstring of length `2p+1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Bitstring {
    pub value: u32,
    pub p: usize,
}

impl Bitstring {
    pub fn new(value: u32, p: usize) -> Result<Self> {
        if p == 0 || p > MAX_DEPTH {
            return Err(Error::validation(format!("depth {p} out of range")));
        }
        if (value as u64) >= (1u64 << (2 * p + 1)) {
            return Err(Error::validation(format!(
                "value {value} does not fit in {} bits",
                2 * p + 1
            )));
        }
        Ok(Self { value, p })
    }

    /// Parses the most-significant-first notation `s_{2p} … s_0` written left to right.
    pub fn from_msb_str(bits: &str) -> Result<Self> {
        let n = bits.len();
        if n < 3 || n % 2 == 0 {
            return Err(Error::validation("bitstring length must be odd and at least 3"));
        }
        let mut value = 0u32;
        for c in bits.chars() {
            value <<= 1;
            match c {
                '0' => {}
                '1' => value |= 1,
                _ => return Err(Error::validation(format!("invalid bit character {c:?}"))),
            }
        }
        Self::new(value, (n - 1) / 2)
    }

    /// Renders as `s_{2p} … s_0`.
    pub fn to_msb_string(&self) -> String {
        (0..=2 * self.p)
            .rev()
            .map(|j| if bit(self.value, j) { '1' } else { '0' })
            .collect()
    }

    pub fn bit(&self, j: usize) -> bool {
        bit(self.value, j)
    }

    pub fn level(&self) -> usize {
        level_of_symmetry(self.value, self.p)
    }

    pub fn is_odd(&self) -> bool {
        is_odd(self.value, self.p)
    }

    pub fn partial_flip(&self) -> Self {
        Self {
            value: partial_flip(self.value, self.p),
            p: self.p,
        }
    }

    /// All `2p+1` bits flipped.
    pub fn complement(&self) -> Self {
        Self {
            value: complement(self.value, self.p),
            p: self.p,
        }
    }
}

#[inline]
fn bit(s: u32, j: usize) -> bool {
    (s >> j) & 1 == 1
}

/// Number of bitstrings of depth `p`.
pub fn string_count(p: usize) -> usize {
    1usize << (2 * p + 1)
}

/// Largest `j ≤ p` such that `s_{p+k} = s_{p-k}` for every `k ≤ j`.
pub fn level_of_symmetry(s: u32, p: usize) -> usize {
    let mut level = 0;
    for k in 1..=p {
        if bit(s, p + k) != bit(s, p - k) {
            break;
        }
        level = k;
    }
    level
}

/// A string is odd when `s_0 ≠ s_p`.
pub fn is_odd(s: u32, p: usize) -> bool {
    bit(s, 0) != bit(s, p)
}

/// Complements the central window `p-L(s) ..= p+L(s)`.
pub fn partial_flip(s: u32, p: usize) -> u32 {
    let l = level_of_symmetry(s, p);
    let width = 2 * l + 1;
    let mask = ((1u32 << width) - 1) << (p - l);
    s ^ mask
}

/// Flips all `2p+1` bits.
pub fn complement(s: u32, p: usize) -> u32 {
    s ^ ((1u32 << (2 * p + 1)) - 1)
}

/// `B_{β,s}`: product over layers of `cos(β_j/2)` for each agreeing
/// adjacent pair and `i·sin(β_j/2)` for each disagreeing one, on both the
/// forward (`s_j, s_{j+1}`) and backward (`s_{2p-j}, s_{2p-j-1}`) sides.
pub fn b_coefficient<T: Real>(s: u32, betas: &[T]) -> Complex<T> {
    let p = betas.len();
    let two = T::lit(2.0);
    let mut acc = Complex::new(T::one(), T::zero());
    for (j, &beta) in betas.iter().enumerate() {
        let (sin, cos) = (beta / two).sin_cos();
        for (a, b) in [(j, j + 1), (2 * p - j, 2 * p - j - 1)] {
            acc = if bit(s, a) == bit(s, b) {
                acc * cos
            } else {
                acc * Complex::new(T::zero(), sin)
            };
        }
    }
    acc
}

/// `φ(γ, x) = Σ_j (γ_j/2)((-1)^{x_{2p-j}} - (-1)^{x_j})`.
pub fn phi<T: Real>(x: u32, gammas: &[T]) -> T {
    let p = gammas.len();
    let sign = |b: bool| if b { -T::one() } else { T::one() };
    gammas
        .iter()
        .enumerate()
        .map(|(j, &g)| g / T::lit(2.0) * (sign(bit(x, 2 * p - j)) - sign(bit(x, j))))
        .fold(T::zero(), |a, b| a + b)
}

/// Angle-independent structure for depth `p`: levels, parities, flips and
/// the total order.
#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    pub p: usize,
    pub level: Vec<u8>,
    pub odd: Vec<bool>,
    pub flip: Vec<u32>,
    /// Strings in table order.
    pub order: Vec<u32>,
    /// Inverse permutation of `order`.
    pub order_index: Vec<u32>,
}

impl Layout {
    /// Builds the layout. Within each level below `p`, odd strings appear in
    /// ascending integer order, each followed immediately by its partial
    /// flip; strings of level `p` close the order in ascending order.
    pub fn new(p: usize) -> Result<Self> {
        if p == 0 || p > MAX_DEPTH {
            return Err(Error::validation(format!("depth {p} out of range")));
        }
        let n = string_count(p);
        let level: Vec<u8> = (0..n as u32).map(|s| level_of_symmetry(s, p) as u8).collect();
        let odd: Vec<bool> = (0..n as u32).map(|s| is_odd(s, p)).collect();
        let flip: Vec<u32> = (0..n as u32).map(|s| partial_flip(s, p)).collect();
        let mut order = Vec::with_capacity(n);
        for l in 0..p as u8 {
            for s in 0..n as u32 {
                if level[s as usize] == l && odd[s as usize] {
                    order.push(s);
                    order.push(flip[s as usize]);
                }
            }
        }
        order.extend((0..n as u32).filter(|&s| level[s as usize] as usize == p));
        debug_assert_eq!(order.len(), n);
        let mut order_index = vec![0u32; n];
        for (i, &s) in order.iter().enumerate() {
            order_index[s as usize] = i as u32;
        }
        Ok(Self {
            p,
            level,
            odd,
            flip,
            order,
            order_index,
        })
    }

    pub fn len(&self) -> usize {
        self.level.len()
    }

    pub fn is_empty(&self) -> bool {
        self.level.is_empty()
    }

    /// Table-order comparison `s < t`.
    pub fn precedes(&self, s: u32, t: u32) -> bool {
        self.order_index[s as usize] < self.order_index[t as usize]
    }

    /// Odd strings of level below `p`, in table order. These are the first
    /// member of every `{s, F(s)}` pair.
    pub fn odd_below_top(&self) -> Vec<u32> {
        self.order
            .iter()
            .copied()
            .filter(|&s| self.odd[s as usize] && (self.level[s as usize] as usize) < self.p)
            .collect()
    }

    /// Strings of level `p`.
    pub fn top_level(&self) -> Vec<u32> {
        (0..self.len() as u32)
            .filter(|&s| self.level[s as usize] as usize == self.p)
            .collect()
    }

    /// `(-1)^{[s odd]}`.
    pub fn parity_sign<T: Real>(&self, s: u32) -> T {
        if self.odd[s as usize] {
            -T::one()
        } else {
            T::one()
        }
    }

    /// `(-1)^{[s odd]} (-1)^{s_p}`, the sign attached to `B_s R_s` in the
    /// energy quadratic forms.
    pub fn observable_sign<T: Real>(&self, s: u32) -> T {
        let flip = self.odd[s as usize] ^ bit(s, self.p);
        if flip {
            -T::one()
        } else {
            T::one()
        }
    }
}

/// Per-angle tables: the layout plus `B_s` for every string and `φ(γ, x)`
/// for every XOR value `x`.
#[derive(Debug, Clone)]
pub struct BitstringTable<T: Real = f64> {
    pub layout: Layout,
    pub b: Vec<Complex<T>>,
    pub phi: Vec<T>,
}

impl<T: Real> BitstringTable<T> {
    pub fn new(angles: &AngleVector<T>) -> Result<Self> {
        angles.validate()?;
        let layout = Layout::new(angles.p())?;
        let n = layout.len() as u32;
        let b = (0..n).map(|s| b_coefficient(s, &angles.betas)).collect();
        let phi = (0..n).map(|x| phi(x, &angles.gammas)).collect();
        Ok(Self { layout, b, phi })
    }

    pub fn p(&self) -> usize {
        self.layout.p
    }

    pub fn len(&self) -> usize {
        self.layout.len()
    }

    pub fn is_empty(&self) -> bool {
        self.layout.is_empty()
    }

    /// `φ(γ, s ⊕ t)`.
    pub fn phi_pair(&self, s: u32, t: u32) -> T {
        self.phi[(s ^ t) as usize]
    }

    /// `(-1)^{[t odd]} B_t` for every string.
    pub fn signed_b(&self) -> Vec<Complex<T>> {
        (0..self.len() as u32)
            .map(|t| self.b[t as usize] * self.layout.parity_sign::<T>(t))
            .collect()
    }
}

/// In-place unnormalized Walsh–Hadamard transform. Applying it twice scales
/// by the length.
pub(crate) fn walsh_hadamard<T: Real>(v: &mut [Complex<T>]) {
    let n = v.len();
    debug_assert!(n.is_power_of_two());
    let mut h = 1;
    while h < n {
        for block in v.chunks_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        h *= 2;
    }
}

/// XOR convolution `out[s] = Σ_t w[t] k[s ⊕ t]`, via two forward transforms
/// and one inverse.
pub(crate) fn xor_convolve<T: Real>(w: &[Complex<T>], k_hat: &[Complex<T>]) -> Vec<Complex<T>> {
    let n = w.len();
    let mut w_hat = w.to_vec();
    walsh_hadamard(&mut w_hat);
    for (a, b) in w_hat.iter_mut().zip(k_hat) {
        *a = *a * *b;
    }
    walsh_hadamard(&mut w_hat);
    let scale = T::one() / T::lit(n as f64);
    w_hat.iter_mut().for_each(|a| *a = *a * scale);
    w_hat
}

/// Transformed kernel for [`xor_convolve`].
pub(crate) fn kernel_hat<T: Real>(k: &[Complex<T>]) -> Vec<Complex<T>> {
    let mut out = k.to_vec();
    walsh_hadamard(&mut out);
    out
}

/// `Σ_{s,t} a_s a_t k[s ⊕ t]`, evaluated in `O(N log N)`.
pub(crate) fn xor_quadratic_form<T: Real>(a: &[Complex<T>], k_hat: &[Complex<T>]) -> Complex<T> {
    let mut a_hat = a.to_vec();
    walsh_hadamard(&mut a_hat);
    let total = a_hat
        .iter()
        .zip(k_hat)
        .fold(Complex::new(T::zero(), T::zero()), |acc, (x, k)| acc + x * x * k);
    total / T::lit(a.len() as f64)
}
