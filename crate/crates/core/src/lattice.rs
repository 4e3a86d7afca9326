//! Classical lattices (Zⁿ, Dₙ, E8), their nearest-point decoders, ball
//! enumeration, and power-constrained codebooks cut from them.
//!
//! Lattice points are row combinations `c · B` of the generator `B` with
//! integer `c`. The decoders follow Conway and Sloane: coordinate rounding
//! for Zⁿ, rounding plus a parity repair for Dₙ, and the better of two Dₙ
//! cosets for E8 = D8 ∪ (D8 + ½).

use std::collections::HashMap;
use std::io::{self, Write};

use crate::error::{domain, Error, Result};
use crate::exponents::q_function;
use crate::linalg;
use crate::scalar::{dist2, lex_cmp, norm2, Real};
use crate::special::ln_gamma;

/// Default cap on the number of points a ball enumeration may produce.
pub const DEFAULT_ENUMERATION_CAP: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LatticeKind {
    /// The integer lattice Zⁿ.
    Zn,
    /// The checkerboard lattice Dₙ: integer vectors with even coordinate sum.
    Dn,
    /// The Gosset lattice E8.
    E8,
}

impl LatticeKind {
    pub fn name(self) -> &'static str {
        match self {
            LatticeKind::Zn => "Z",
            LatticeKind::Dn => "D",
            LatticeKind::E8 => "E8",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeDef<T> {
    kind: LatticeKind,
    dimension: usize,
    generator: Vec<Vec<T>>,
    voronoi_volume: T,
}

impl<T: Real> LatticeDef<T> {
    pub fn new(kind: LatticeKind, dimension: usize) -> Result<Self> {
        match kind {
            LatticeKind::Zn => Self::integer(dimension),
            LatticeKind::Dn => Self::checkerboard(dimension),
            LatticeKind::E8 if dimension == 8 => Ok(Self::e8()),
            LatticeKind::E8 => Err(domain(format!("E8 has dimension 8, requested {dimension}"))),
        }
    }

    pub fn integer(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(domain("lattice dimension must be >= 1"));
        }
        let generator = (0..n)
            .map(|i| (0..n).map(|j| if i == j { T::one() } else { T::zero() }).collect())
            .collect();
        Ok(Self::from_generator(LatticeKind::Zn, generator))
    }

    pub fn checkerboard(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(domain(format!("D_n needs n >= 2, got {n}")));
        }
        let mut generator = vec![vec![T::zero(); n]; n];
        generator[0][0] = -T::one();
        generator[0][1] = -T::one();
        for i in 1..n {
            generator[i][i - 1] = T::one();
            generator[i][i] = -T::one();
        }
        Ok(Self::from_generator(LatticeKind::Dn, generator))
    }

    pub fn e8() -> Self {
        let mut generator = vec![vec![T::zero(); 8]; 8];
        generator[0][0] = T::two();
        for i in 1..7 {
            generator[i][i - 1] = -T::one();
            generator[i][i] = T::one();
        }
        generator[7] = vec![T::half(); 8];
        Self::from_generator(LatticeKind::E8, generator)
    }

    fn from_generator(kind: LatticeKind, generator: Vec<Vec<T>>) -> Self {
        let voronoi_volume = linalg::determinant(&generator).abs();
        Self { kind, dimension: generator.len(), generator, voronoi_volume }
    }

    pub fn kind(&self) -> LatticeKind {
        self.kind
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Generator rows; lattice points are integer row combinations.
    pub fn generator(&self) -> &[Vec<T>] {
        &self.generator
    }

    /// `|det B|`, the volume of a Voronoi cell of the unscaled lattice.
    pub fn voronoi_volume(&self) -> T {
        self.voronoi_volume
    }

    pub fn name(&self) -> String {
        match self.kind {
            LatticeKind::E8 => "E8".to_string(),
            k => format!("{}{}", k.name(), self.dimension),
        }
    }

    fn check_dim(&self, len: usize) -> Result<()> {
        if len != self.dimension {
            return Err(Error::DimensionMismatch { expected: self.dimension, got: len });
        }
        Ok(())
    }

    /// Closest lattice point to `y`. Ties go to the lexicographically
    /// smaller point.
    pub fn nearest_point(&self, y: &[T]) -> Result<Vec<T>> {
        self.check_dim(y.len())?;
        if let Some(bad) = y.iter().find(|v| !v.is_finite()) {
            return Err(domain(format!("non-finite coordinate {bad}")));
        }
        Ok(match self.kind {
            LatticeKind::Zn => round_zn(y),
            LatticeKind::Dn => round_dn(y),
            LatticeKind::E8 => round_e8(y),
        })
    }

    /// Closest point of the scaled lattice `scale · Λ`.
    pub fn nearest_point_scaled(&self, scale: T, y: &[T]) -> Result<Vec<T>> {
        let unit: Vec<T> = y.iter().map(|&v| v / scale).collect();
        Ok(self.nearest_point(&unit)?.into_iter().map(|v| v * scale).collect())
    }

    /// Integer coefficients `c` with `c · B = point`, if `point` lies in the
    /// lattice up to `tol` in every coefficient.
    pub fn coefficients(&self, point: &[T], tol: T) -> Option<Vec<T>> {
        if point.len() != self.dimension {
            return None;
        }
        let n = self.dimension;
        let transposed: Vec<Vec<T>> =
            (0..n).map(|i| (0..n).map(|j| self.generator[j][i]).collect()).collect();
        let c = linalg::solve(&transposed, point)?;
        c.iter()
            .all(|v| (*v - v.round()).abs() <= tol)
            .then(|| c.iter().map(|v| v.round()).collect())
    }

    pub fn contains(&self, point: &[T], tol: T) -> bool {
        self.coefficients(point, tol).is_some()
    }

    /// Normalized volume-to-noise ratio `V(βΛ)^{2/n} / σ²`.
    pub fn nvnr(&self, scale: T, sigma2: T) -> T {
        let n = T::from_count(self.dimension);
        scale * scale * self.voronoi_volume.powf(T::two() / n) / sigma2
    }

    /// Volume heuristic for the number of points of `scale · Λ` within `radius`.
    pub fn estimated_ball_count(&self, scale: T, radius: T) -> T {
        let n = T::from_count(self.dimension);
        let r = radius / scale;
        let ln_ball = T::half() * n * T::PI().ln() + n * r.ln() - ln_gamma(T::half() * n + T::one());
        (ln_ball - self.voronoi_volume.ln()).exp()
    }

    /// All points of `scale · Λ` with norm at most `radius`, ordered by norm
    /// and then lexicographically.
    pub fn enumerate_ball(&self, scale: T, radius: T) -> Result<Vec<Vec<T>>> {
        self.enumerate_ball_capped(scale, radius, DEFAULT_ENUMERATION_CAP)
    }

    pub fn enumerate_ball_capped(&self, scale: T, radius: T, cap: usize) -> Result<Vec<Vec<T>>> {
        if !(scale > T::zero()) || !scale.is_finite() {
            return Err(domain(format!("scale must be finite and > 0, got {scale}")));
        }
        if !(radius > T::zero()) || !radius.is_finite() {
            return Err(domain(format!("radius must be finite and > 0, got {radius}")));
        }
        let estimate = self.estimated_ball_count(scale, radius);
        let cap_t = T::from_count(cap);
        if estimate > cap_t {
            return Err(Error::Resource { estimated: estimate.to_f64().unwrap_or(f64::INFINITY), cap });
        }
        let mut points = self.enumerate_unit(radius / scale, cap)?;
        for p in &mut points {
            for v in p.iter_mut() {
                *v *= scale;
            }
        }
        Ok(points)
    }

    // Fincke–Pohst enumeration of the unscaled lattice.
    fn enumerate_unit(&self, radius: T, cap: usize) -> Result<Vec<Vec<T>>> {
        let n = self.dimension;
        let b = &self.generator;
        let gram: Vec<Vec<T>> = (0..n)
            .map(|i| (0..n).map(|j| (0..n).fold(T::zero(), |a, k| a + b[i][k] * b[j][k])).collect())
            .collect();
        let r = linalg::cholesky_upper(&gram).ok_or_else(|| domain("degenerate generator"))?;
        // ‖cB‖² = Σ_i q_ii (c_i + Σ_{j>i} q_ij c_j)²
        let q_diag: Vec<T> = (0..n).map(|i| r[i][i] * r[i][i]).collect();
        let q_off: Vec<Vec<T>> = (0..n)
            .map(|i| (0..n).map(|j| if j > i { r[i][j] / r[i][i] } else { T::zero() }).collect())
            .collect();

        let slack = T::lit(64.0) * T::epsilon();
        let r2 = radius * radius;
        let bound = r2 * (T::one() + slack);
        let mut coeffs = vec![T::zero(); n];
        let mut out = Vec::new();
        let mut stack_budget = vec![T::zero(); n + 1];
        stack_budget[n] = bound;
        self.fp_level(n, &q_diag, &q_off, &mut coeffs, &mut stack_budget, &mut out, cap, bound)?;

        out.sort_by(|a, b| {
            norm2(a)
                .partial_cmp(&norm2(b))
                .unwrap_or(std::cmp::Ordering::Equal)
                .then_with(|| lex_cmp(a, b))
        });
        Ok(out)
    }

    #[allow(clippy::too_many_arguments)]
    fn fp_level(
        &self,
        level: usize,
        q_diag: &[T],
        q_off: &[Vec<T>],
        coeffs: &mut [T],
        budget: &mut [T],
        out: &mut Vec<Vec<T>>,
        cap: usize,
        bound: T,
    ) -> Result<()> {
        if level == 0 {
            let point = self.combine(coeffs);
            if norm2(&point) <= bound {
                if out.len() >= cap {
                    return Err(Error::Resource { estimated: (out.len() + 1) as f64, cap });
                }
                out.push(point);
            }
            return Ok(());
        }
        let i = level - 1;
        let n = self.dimension;
        let center = -(i + 1..n).fold(T::zero(), |a, j| a + q_off[i][j] * coeffs[j]);
        let remaining = budget[level].max(T::zero());
        let half_width = (remaining / q_diag[i]).sqrt();
        let lo = (center - half_width).ceil();
        let hi = (center + half_width).floor();
        let mut c = lo;
        while c <= hi {
            let d = c - center;
            let used = q_diag[i] * d * d;
            if used <= remaining {
                coeffs[i] = c;
                budget[i] = remaining - used;
                self.fp_level(i, q_diag, q_off, coeffs, budget, out, cap, bound)?;
            }
            c += T::one();
        }
        coeffs[i] = T::zero();
        Ok(())
    }

    fn combine(&self, coeffs: &[T]) -> Vec<T> {
        let n = self.dimension;
        (0..n)
            .map(|k| (0..n).fold(T::zero(), |a, i| a + coeffs[i] * self.generator[i][k]))
            .collect()
    }
}

// Round half toward -∞ so coordinate ties land on the smaller integer.
#[inline]
fn round_down_ties<T: Real>(x: T) -> T {
    (x - T::half()).ceil()
}

fn round_zn<T: Real>(y: &[T]) -> Vec<T> {
    y.iter().map(|&v| round_down_ties(v)).collect()
}

fn round_dn<T: Real>(y: &[T]) -> Vec<T> {
    let mut f = round_zn(y);
    let parity = f.iter().fold(T::zero(), |a, &v| a + v);
    if (parity / T::two()).fract() == T::zero() {
        return f;
    }
    // flip the coordinate with the largest rounding error; among equally bad
    // ones, prefer a downward flip at the first such index, otherwise an
    // upward flip at the last, which keeps the result lexicographically least
    let deltas: Vec<T> = y.iter().zip(&f).map(|(&a, &b)| a - b).collect();
    let worst = deltas.iter().fold(T::zero(), |m, d| m.max(d.abs()));
    let tied: Vec<usize> = (0..y.len()).filter(|&i| deltas[i].abs() == worst).collect();
    let down = tied.iter().copied().find(|&i| deltas[i] <= T::zero());
    let (idx, step) = match down {
        Some(i) => (i, -T::one()),
        None => (*tied.last().expect("at least one coordinate"), T::one()),
    };
    f[idx] += step;
    f
}

fn round_e8<T: Real>(y: &[T]) -> Vec<T> {
    let even = round_dn(y);
    let shifted: Vec<T> = y.iter().map(|&v| v - T::half()).collect();
    let odd: Vec<T> = round_dn(&shifted).into_iter().map(|v| v + T::half()).collect();
    let de = dist2(y, &even);
    let dodd = dist2(y, &odd);
    if de < dodd || (de == dodd && lex_cmp(&even, &odd).is_le()) {
        even
    } else {
        odd
    }
}

/// Closed-form probability that `N(0, σ² I_n)` noise leaves the Voronoi
/// cell (a cube of side `β`) of the scaled integer lattice `β Zⁿ`.
pub fn voronoi_escape_prob_zn<T: Real>(beta: T, sigma: T, n: usize) -> T {
    let p1 = T::two() * q_function(beta / (T::two() * sigma));
    -(T::from_count(n) * (-p1).ln_1p()).exp_m1()
}

/// A finite, power-constrained, indexed set of lattice points.
#[derive(Debug, Clone)]
pub struct Codebook<T> {
    lattice: LatticeDef<T>,
    points: Vec<Vec<T>>,
    scale: T,
    power_limit: T,
    index: HashMap<Vec<i64>, usize>,
}

/// Result of decoding to the nearest point of the full scaled lattice.
#[derive(Debug, Clone, PartialEq)]
pub enum LatticeDecode<T> {
    /// The nearest lattice point is codeword `i`.
    Codeword(usize),
    /// The nearest lattice point is not in the codebook.
    Outside(Vec<T>),
}

fn key_of<T: Real>(unit_point: &[T]) -> Vec<i64> {
    // E8 points live on the half-integer grid
    unit_point
        .iter()
        .map(|v| (*v * T::two()).round().to_i64().expect("bounded coordinate"))
        .collect()
}

impl<T: Real> Codebook<T> {
    /// Takes the `m` smallest-norm points (ties lexicographic) of `β Λ`,
    /// with `β` as large as possible such that all of them satisfy
    /// `‖x‖² <= nP`.
    pub fn build(lattice: &LatticeDef<T>, n: usize, power: T, m: usize) -> Result<Self> {
        Self::build_capped(lattice, n, power, m, DEFAULT_ENUMERATION_CAP)
    }

    pub fn build_capped(
        lattice: &LatticeDef<T>,
        n: usize,
        power: T,
        m: usize,
        cap: usize,
    ) -> Result<Self> {
        lattice.check_dim(n)?;
        if m < 2 {
            return Err(domain(format!("codebook needs M >= 2, got {m}")));
        }
        if m > cap {
            return Err(Error::Resource { estimated: m as f64, cap });
        }
        if !(power > T::zero()) || !power.is_finite() {
            return Err(domain(format!("power must be finite and > 0, got {power}")));
        }

        // unit-lattice radius whose ball holds about m points, grown until it does
        let nf = T::from_count(n);
        let ln_unit_ball = T::half() * nf * T::PI().ln() - ln_gamma(T::half() * nf + T::one());
        let mut radius = ((T::from_count(m).ln() + lattice.voronoi_volume.ln() - ln_unit_ball) / nf)
            .exp()
            .max(T::one());
        let unit = loop {
            let pts = lattice.enumerate_ball_capped(T::one(), radius, cap)?;
            if pts.len() >= m {
                break pts;
            }
            radius *= T::lit(1.25);
        };
        let chosen: Vec<Vec<T>> = unit.into_iter().take(m).collect();
        let outer = norm2(&chosen[m - 1]).sqrt();
        let limit = nf * power;
        let mut scale = limit.sqrt() / outer;
        let mut shrink = T::one();
        while chosen.iter().any(|p| norm2(p) * scale * scale > limit) {
            shrink -= T::lit(4.0) * T::epsilon();
            scale = limit.sqrt() / outer * shrink;
        }

        let index = chosen.iter().enumerate().map(|(i, p)| (key_of(p), i)).collect();
        let points = chosen
            .iter()
            .map(|p| p.iter().map(|&v| v * scale).collect())
            .collect();
        Ok(Self { lattice: lattice.clone(), points, scale, power_limit: power, index })
    }

    pub fn lattice(&self) -> &LatticeDef<T> {
        &self.lattice
    }

    pub fn points(&self) -> &[Vec<T>] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &[T] {
        &self.points[i]
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.lattice.dimension
    }

    /// Lattice scale `β`.
    pub fn scale(&self) -> T {
        self.scale
    }

    pub fn power_limit(&self) -> T {
        self.power_limit
    }

    /// `ln(M) / n` nats per channel use.
    pub fn rate(&self) -> T {
        T::from_count(self.len()).ln() / T::from_count(self.dimension())
    }

    /// Index of the codeword nearest to `y` by exhaustive scan; ties go to
    /// the smaller index.
    pub fn decode(&self, y: &[T]) -> Result<usize> {
        self.lattice.check_dim(y.len())?;
        let mut best = 0;
        let mut best_d = dist2(y, &self.points[0]);
        for (i, p) in self.points.iter().enumerate().skip(1) {
            let d = dist2(y, p);
            if d < best_d {
                best = i;
                best_d = d;
            }
        }
        Ok(best)
    }

    /// Nearest point of the whole scaled lattice, looked up in the codebook.
    pub fn decode_lattice(&self, y: &[T]) -> Result<LatticeDecode<T>> {
        let unit: Vec<T> = y.iter().map(|&v| v / self.scale).collect();
        let p = self.lattice.nearest_point(&unit)?;
        Ok(match self.index.get(&key_of(&p)) {
            Some(&i) => LatticeDecode::Codeword(i),
            None => LatticeDecode::Outside(p.into_iter().map(|v| v * self.scale).collect()),
        })
    }

    /// Lattice decoding with an exhaustive fallback when the nearest lattice
    /// point is not a codeword. Agrees with [`Codebook::decode`] except on
    /// exact distance ties.
    pub fn decode_fast(&self, y: &[T]) -> Result<usize> {
        match self.decode_lattice(y)? {
            LatticeDecode::Codeword(i) => Ok(i),
            LatticeDecode::Outside(_) => self.decode(y),
        }
    }

    /// Writes `index,x0,x1,...` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let header: Vec<String> = (0..self.dimension()).map(|k| format!("x{k}")).collect();
        writeln!(w, "index,{}", header.join(","))?;
        for (i, p) in self.points.iter().enumerate() {
            let coords: Vec<String> = p.iter().map(|v| format!("{v:.12e}")).collect();
            writeln!(w, "{i},{}", coords.join(","))?;
        }
        Ok(())
    }
}

/// Free-function form of [`Codebook::build`].
pub fn build_codebook<T: Real>(lattice: &LatticeDef<T>, n: usize, power: T, m: usize) -> Result<Codebook<T>> {
    Codebook::build(lattice, n, power, m)
}

/// Free-function form of [`Codebook::decode`].
pub fn decode_codebook<T: Real>(cb: &Codebook<T>, y: &[T]) -> Result<usize> {
    cb.decode(y)
}
