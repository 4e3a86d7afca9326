//! Quantize-and-lattice-code modulation of a parameter `u ∈ [0,1]`.
//!
//! `u` is quantized into `M` bins of width `Δ = 1/M`, the bin index selects a
//! codeword, and the receiver decodes the codeword and outputs the bin
//! midpoint. In the pairing variant bins `2j` and `2j+1` share codeword `j`
//! so the signal locus is constant across each pair, and the receiver picks
//! one of the two midpoints with a fair coin.

use crate::error::{domain, Error, Result};
use crate::lattice::{Codebook, LatticeDecode, LatticeDef};
use crate::scalar::{norm2, Real};

/// When a transmission counts as an outage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OutageKind<T> {
    /// The decoder picked the wrong codeword.
    DecodeError,
    /// The noise left the sphere of radius `σ √(n(1+θ))`.
    SphereRadius(T),
}

/// How the receiver maps a channel output to a codeword.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecoderKind {
    /// Exhaustive nearest-codeword search.
    Codebook,
    /// Nearest point of the full scaled lattice; landing on a lattice point
    /// outside the codebook is a decoding error.
    Lattice,
}

/// Bin index `i = min(⌊uM⌋, M-1)` and midpoint `(i + ½)/M`.
pub fn quantize<T: Real>(u: T, m: usize) -> Result<(usize, T)> {
    if !(u >= T::zero() && u <= T::one()) {
        return Err(domain(format!("parameter must lie in [0,1], got {u}")));
    }
    if m == 0 {
        return Err(domain("quantizer needs M >= 1"));
    }
    let mf = T::from_count(m);
    let i = (u * mf).floor().to_usize().unwrap_or(m).min(m - 1);
    Ok((i, (T::from_count(i) + T::half()) / mf))
}

/// Continuity structure of a modulator on `[0,1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Continuity {
    Continuous,
    /// Continuous on each of `pieces` equal sub-intervals.
    Piecewise { pieces: usize },
}

/// A map from `[0,1]` to channel inputs.
pub trait Modulator<T: Real> {
    fn dimension(&self) -> usize;
    fn map(&self, u: T) -> Result<Vec<T>>;
    fn continuity(&self) -> Continuity {
        Continuity::Continuous
    }
}

/// Modulator backed by a closure.
pub struct FnModulator<F> {
    dimension: usize,
    map: F,
    continuity: Continuity,
}

impl<F> FnModulator<F> {
    pub fn new(dimension: usize, map: F) -> Self {
        Self { dimension, map, continuity: Continuity::Continuous }
    }

    pub fn with_continuity(mut self, continuity: Continuity) -> Self {
        self.continuity = continuity;
        self
    }
}

impl<T: Real, F: Fn(T) -> Vec<T>> Modulator<T> for FnModulator<F> {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn map(&self, u: T) -> Result<Vec<T>> {
        let x = (self.map)(u);
        if x.len() != self.dimension {
            return Err(Error::DimensionMismatch { expected: self.dimension, got: x.len() });
        }
        Ok(x)
    }

    fn continuity(&self) -> Continuity {
        self.continuity
    }
}

/// Checks `‖f(u)‖² <= nP` on `samples + 1` uniform points of `[0,1]`.
pub fn check_power<T: Real, M: Modulator<T> + ?Sized>(f: &M, power: T, samples: usize) -> Result<()> {
    let limit = T::from_count(f.dimension()) * power;
    for j in 0..=samples {
        let u = T::from_count(j) / T::from_count(samples.max(1));
        let x = f.map(u)?;
        if norm2(&x) > limit {
            return Err(domain(format!("power constraint violated at u = {u}")));
        }
    }
    Ok(())
}

/// Polyline approximation `Σ ‖f((j+1)/k) - f(j/k)‖` of the signal locus length.
///
/// Never decreases under refinement `k → 2k` (triangle inequality).
pub fn locus_length<T: Real, M: Modulator<T> + ?Sized>(f: &M, k: usize) -> Result<T> {
    if k == 0 {
        return Err(domain("locus length needs k >= 1"));
    }
    let kf = T::from_count(k);
    let mut prev = f.map(T::zero())?;
    let mut total = T::zero();
    for j in 1..=k {
        let u = if j == k { T::one() } else { T::from_count(j) / kf };
        let next = f.map(u)?;
        total += crate::scalar::dist2(&prev, &next).sqrt();
        prev = next;
    }
    Ok(total)
}

/// The quantize-and-code modulator/estimator pair.
#[derive(Debug, Clone)]
pub struct ModScheme<T> {
    codebook: Codebook<T>,
    levels: usize,
    pairing: bool,
    outage: OutageKind<T>,
    decoder: DecoderKind,
}

impl<T: Real> ModScheme<T> {
    /// Wraps a codebook. Without pairing `M` equals the codebook size; with
    /// pairing `M` is twice the codebook size.
    pub fn new(codebook: Codebook<T>, pairing: bool, outage: OutageKind<T>, decoder: DecoderKind) -> Result<Self> {
        if let OutageKind::SphereRadius(theta) = outage {
            if !theta.is_finite() || theta < -T::one() {
                return Err(domain(format!("sphere outage needs finite theta >= -1, got {theta}")));
            }
        }
        let levels = if pairing { 2 * codebook.len() } else { codebook.len() };
        Ok(Self { codebook, levels, pairing, outage, decoder })
    }

    /// Builds the codebook for `m` quantization levels (`m/2` codewords with
    /// pairing) and wraps it.
    pub fn build(
        lattice: &LatticeDef<T>,
        power: T,
        m: usize,
        pairing: bool,
        outage: OutageKind<T>,
        decoder: DecoderKind,
    ) -> Result<Self> {
        if pairing && !m.is_multiple_of(2) {
            return Err(domain(format!("pairing needs an even M, got {m}")));
        }
        let codewords = if pairing { m / 2 } else { m };
        let cb = Codebook::build(lattice, lattice.dimension(), power, codewords)?;
        Self::new(cb, pairing, outage, decoder)
    }

    pub fn codebook(&self) -> &Codebook<T> {
        &self.codebook
    }

    /// Number of quantization levels `M`.
    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn pairing(&self) -> bool {
        self.pairing
    }

    pub fn outage_kind(&self) -> OutageKind<T> {
        self.outage
    }

    pub fn decoder(&self) -> DecoderKind {
        self.decoder
    }

    pub fn dimension(&self) -> usize {
        self.codebook.dimension()
    }

    /// Bin width `Δ = 1/M`.
    pub fn bin_width(&self) -> T {
        T::one() / T::from_count(self.levels)
    }

    pub fn quantize(&self, u: T) -> Result<(usize, T)> {
        quantize(u, self.levels)
    }

    /// Codeword index carrying `u`.
    pub fn codeword_index(&self, u: T) -> Result<usize> {
        let (i, _) = self.quantize(u)?;
        Ok(if self.pairing { i / 2 } else { i })
    }

    /// The channel input for `u`.
    pub fn modulate(&self, u: T) -> Result<&[T]> {
        Ok(self.codebook.point(self.codeword_index(u)?))
    }

    fn decode_index(&self, y: &[T]) -> Result<usize> {
        match self.decoder {
            DecoderKind::Codebook => self.codebook.decode(y),
            DecoderKind::Lattice => self.codebook.decode_fast(y),
        }
    }

    fn estimate_from_index<F: FnMut() -> bool>(&self, j: usize, coin: &mut F) -> T {
        let bin = if self.pairing { 2 * j + usize::from(coin()) } else { j };
        (T::from_count(bin) + T::half()) / T::from_count(self.levels)
    }

    /// Parameter estimate from a channel output. `coin` supplies the fair bit
    /// used by the pairing variant and is not called otherwise.
    pub fn estimate<F: FnMut() -> bool>(&self, y: &[T], coin: &mut F) -> Result<T> {
        let j = self.decode_index(y)?;
        Ok(self.estimate_from_index(j, coin))
    }

    /// Whether noise `z` puts the transmission of `u` in outage.
    pub fn is_outage(&self, u: T, z: &[T], sigma: T) -> Result<bool> {
        match self.outage {
            OutageKind::SphereRadius(theta) => {
                self.check_len(z.len())?;
                Ok(self.outside_sphere(z, sigma, theta))
            }
            OutageKind::DecodeError => {
                let idx = self.codeword_index(u)?;
                let y = self.received(idx, z)?;
                Ok(!self.decodes_to(idx, &y)?)
            }
        }
    }

    /// One channel use: `None` on outage, otherwise the estimate.
    pub fn transmit<F: FnMut() -> bool>(&self, u: T, z: &[T], sigma: T, coin: &mut F) -> Result<Option<T>> {
        let idx = self.codeword_index(u)?;
        let y = self.received(idx, z)?;
        match self.outage {
            OutageKind::SphereRadius(theta) => {
                if self.outside_sphere(z, sigma, theta) {
                    Ok(None)
                } else {
                    Ok(Some(self.estimate(&y, coin)?))
                }
            }
            OutageKind::DecodeError => {
                if self.decodes_to(idx, &y)? {
                    Ok(Some(self.estimate_from_index(idx, coin)))
                } else {
                    Ok(None)
                }
            }
        }
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.dimension() {
            return Err(Error::DimensionMismatch { expected: self.dimension(), got: len });
        }
        Ok(())
    }

    fn received(&self, idx: usize, z: &[T]) -> Result<Vec<T>> {
        self.check_len(z.len())?;
        Ok(self.codebook.point(idx).iter().zip(z).map(|(&x, &e)| x + e).collect())
    }

    fn outside_sphere(&self, z: &[T], sigma: T, theta: T) -> bool {
        norm2(z) > T::from_count(z.len()) * sigma * sigma * (T::one() + theta)
    }

    fn decodes_to(&self, idx: usize, y: &[T]) -> Result<bool> {
        Ok(match self.decoder {
            DecoderKind::Codebook => self.codebook.decode(y)? == idx,
            DecoderKind::Lattice => self.codebook.decode_lattice(y)? == LatticeDecode::Codeword(idx),
        })
    }
}

impl<T: Real> Modulator<T> for ModScheme<T> {
    fn dimension(&self) -> usize {
        self.codebook.dimension()
    }

    fn map(&self, u: T) -> Result<Vec<T>> {
        Ok(self.modulate(u)?.to_vec())
    }

    fn continuity(&self) -> Continuity {
        let pieces = if self.pairing { self.codebook.len() } else { self.levels };
        Continuity::Piecewise { pieces }
    }
}

/// Parameter grid for worst-case (sup over `u`) evaluation: `points`
/// uniform values including 0 and 1, plus `u = j/M ± 10⁻⁹` around up to
/// `points` evenly spread interior bin boundaries. Sorted, deduplicated.
pub fn worst_case_grid<T: Real>(points: usize, m: usize) -> Vec<T> {
    let mut grid: Vec<T> = match points {
        0 => Vec::new(),
        1 => vec![T::zero()],
        k => (0..k).map(|j| T::from_count(j) / T::from_count(k - 1)).collect(),
    };
    if m >= 2 && points > 0 {
        let boundaries = (m - 1).min(points);
        let eps = T::lit(1e-9);
        let mf = T::from_count(m);
        for b in 0..boundaries {
            // spread over 1..=m-1
            let j = if boundaries == 1 { 1 } else { 1 + b * (m - 2) / (boundaries - 1) };
            let edge = T::from_count(j) / mf;
            grid.push(edge - eps);
            grid.push(edge + eps);
        }
    }
    grid.retain(|u| *u >= T::zero() && *u <= T::one());
    grid.sort_by(|a, b| a.partial_cmp(b).expect("finite grid"));
    grid.dedup();
    grid
}
