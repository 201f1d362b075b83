//! Trigonometric polynomials `p(t) = Σ c_n e^{2πint}` on the circle `t ∈ [0,1)`.
//!
//! Coefficients live in a sparse ordered map because the lifting constructions
//! place blocks of frequencies at widely separated scales. Grid evaluation goes
//! through a zero-padded inverse FFT.

use crate::error::{Error, Result};
use crate::fft;
use crate::numeric::{fmt_f64, next_pow2, unit_freq, CompensatedSum};
use num_complex::Complex64;
use serde::Serialize;
use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use std::ops::{Add, Mul, Neg, Sub};

/// Largest grid any certification routine will allocate.
pub const MAX_GRID: usize = 1 << 24;

/// Oversampling factor used by [`TrigPoly::sup_norm_certified`].
pub const SUP_GRID_FACTOR: u64 = 16;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrigPoly {
    coeffs: BTreeMap<i64, Complex64>,
    declared_degree: u64,
}

/// Samples `values[k] = p(k/K)` on an equispaced grid.
#[derive(Clone, Debug)]
pub struct GridSamples {
    pub size: usize,
    pub values: Vec<Complex64>,
    pub source_degree: u64,
}

/// Two-sided bound `lo ≤ ‖p‖∞ ≤ hi`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SupBound {
    pub lo: f64,
    pub hi: f64,
    pub grid_size: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ModuliReport {
    pub residual: f64,
    pub tol: f64,
    pub pass: bool,
}

impl TrigPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: impl Into<Complex64>) -> Self {
        Self::monomial(0, c)
    }

    pub fn monomial(n: i64, c: impl Into<Complex64>) -> Self {
        Self::from_coeffs([(n, c.into())])
    }

    /// Builds a polynomial, summing repeated frequencies and dropping exact zeros.
    /// The declared degree is the effective degree.
    pub fn from_coeffs<I: IntoIterator<Item = (i64, Complex64)>>(iter: I) -> Self {
        let mut coeffs: BTreeMap<i64, Complex64> = BTreeMap::new();
        for (n, c) in iter {
            *coeffs.entry(n).or_default() += c;
        }
        coeffs.retain(|_, c| !is_zero(*c));
        let declared_degree = hull(&coeffs);
        Self { coeffs, declared_degree }
    }

    /// Real coefficients `(n, c_n)`.
    pub fn from_real_coeffs<I: IntoIterator<Item = (i64, f64)>>(iter: I) -> Self {
        Self::from_coeffs(iter.into_iter().map(|(n, c)| (n, Complex64::new(c, 0.0))))
    }

    /// Raises the declared degree (never below the effective degree).
    pub fn with_declared_degree(mut self, d: u64) -> Self {
        self.declared_degree = d.max(self.degree());
        self
    }

    pub fn coeff(&self, n: i64) -> Complex64 {
        self.coeffs.get(&n).copied().unwrap_or_default()
    }

    pub fn coeffs(&self) -> impl DoubleEndedIterator<Item = (i64, Complex64)> + '_ {
        self.coeffs.iter().map(|(&n, &c)| (n, c))
    }

    pub fn nnz(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Effective degree `max |n|` over nonzero coefficients.
    pub fn degree(&self) -> u64 {
        hull(&self.coeffs)
    }

    pub fn declared_degree(&self) -> u64 {
        self.declared_degree
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn l1_norm(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).collect::<CompensatedSum>().value()
    }

    /// `√Σ|c_n|²`, equal to the L² norm on the circle by Parseval.
    pub fn l2_norm(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm_sqr()).collect::<CompensatedSum>().value().sqrt()
    }

    /// Direct summation in increasing frequency order with compensation.
    pub fn evaluate(&self, t: f64) -> Complex64 {
        let mut re = CompensatedSum::new();
        let mut im = CompensatedSum::new();
        for (&n, &c) in &self.coeffs {
            let z = c * unit_freq(n, t);
            re.add(z.re);
            im.add(z.im);
        }
        Complex64::new(re.value(), im.value())
    }

    /// Exact grid values `p(k/K)` for any power of two `K`; frequencies are
    /// folded modulo `K`, which does not change the values at grid points.
    pub fn grid_values(&self, k: usize) -> Result<Vec<Complex64>> {
        if !k.is_power_of_two() {
            return Err(Error::GridSize(k));
        }
        let mut buf = vec![Complex64::default(); k];
        let kk = k as i64;
        for (&n, &c) in &self.coeffs {
            buf[n.rem_euclid(kk) as usize] += c;
        }
        fft::inverse(&mut buf);
        Ok(buf)
    }

    /// Samples on a grid fine enough to recover the coefficients.
    pub fn sample_grid(&self, k: usize) -> Result<GridSamples> {
        if !k.is_power_of_two() {
            return Err(Error::GridSize(k));
        }
        let degree = self.degree();
        if (k as u64) <= 2 * degree {
            return Err(Error::Aliasing { grid: k, degree });
        }
        Ok(GridSamples { size: k, values: self.grid_values(k)?, source_degree: degree })
    }

    /// Grid size `next_pow2(factor·max(deg,1))`, at least `floor`, at most [`MAX_GRID`].
    pub fn cert_grid(&self, factor: u64, floor: usize) -> usize {
        next_pow2(factor * self.degree().max(1)).max(floor).min(MAX_GRID)
    }

    /// Rigorous sup-norm bracket. `lo` is a grid maximum (an attained value);
    /// `hi` is the smaller of the Bernstein bound `lo/(1 − π·deg/K)` and `Σ|c_n|`.
    pub fn sup_norm_certified(&self) -> SupBound {
        let k = self.cert_grid(SUP_GRID_FACTOR, 1);
        let values = self.grid_values(k).expect("power-of-two grid");
        let lo = values.iter().map(|z| z.norm()).fold(0.0, f64::max);
        SupBound { lo, hi: self.sup_hi_from_grid(lo, k), grid_size: k }
    }

    /// Upper sup-norm bound from a grid maximum `lo` taken on `k` points.
    pub fn sup_hi_from_grid(&self, lo: f64, k: usize) -> f64 {
        let l1 = self.l1_norm();
        let ratio = PI * self.degree() as f64 / k as f64;
        let bernstein = if ratio < 0.5 { lo / (1.0 - ratio) } else { f64::INFINITY };
        bernstein.min(l1).max(lo)
    }

    /// Coefficient convolution; the declared degree is the sum of declared degrees.
    pub fn multiply(&self, q: &TrigPoly) -> TrigPoly {
        let declared = self.declared_degree + q.declared_degree;
        if self.is_zero() || q.is_zero() {
            return TrigPoly::zero().with_declared_degree(declared);
        }
        let span = self.degree() + q.degree();
        let work = self.nnz() as u64 * q.nnz() as u64;
        let mut out = if work > (1 << 26) && next_pow2(2 * span + 1) <= MAX_GRID {
            self.multiply_fft(q, span)
        } else {
            self.multiply_direct(q, span)
        };
        out.declared_degree = declared.max(out.degree());
        out
    }

    fn multiply_direct(&self, q: &TrigPoly, span: u64) -> TrigPoly {
        if span <= 1 << 26 {
            let s = span as i64;
            let mut dense = vec![Complex64::default(); 2 * span as usize + 1];
            for (&n, &a) in &self.coeffs {
                for (&m, &b) in &q.coeffs {
                    dense[(n + m + s) as usize] += a * b;
                }
            }
            TrigPoly::from_coeffs(dense.into_iter().enumerate().map(|(i, c)| (i as i64 - s, c)))
        } else {
            let mut acc: BTreeMap<i64, Complex64> = BTreeMap::new();
            for (&n, &a) in &self.coeffs {
                for (&m, &b) in &q.coeffs {
                    *acc.entry(n + m).or_default() += a * b;
                }
            }
            TrigPoly::from_coeffs(acc)
        }
    }

    fn multiply_fft(&self, q: &TrigPoly, span: u64) -> TrigPoly {
        let k = next_pow2(2 * span + 1);
        let mut a = self.grid_values(k).expect("power-of-two grid");
        let b = q.grid_values(k).expect("power-of-two grid");
        for (x, y) in a.iter_mut().zip(&b) {
            *x *= *y;
        }
        fft::forward(&mut a);
        let scale = 1.0 / k as f64;
        let cutoff = 1e-15 * self.l1_norm() * q.l1_norm();
        let s = span as i64;
        TrigPoly::from_coeffs((-s..=s).filter_map(|n| {
            let c = a[n.rem_euclid(k as i64) as usize] * scale;
            (c.norm() > cutoff).then_some((n, c))
        }))
    }

    /// `t ↦ p(t + a)`: coefficient `n` picks up the factor `e^{2πina}`.
    pub fn rotate(&self, a: f64) -> TrigPoly {
        let coeffs = self.coeffs.iter().map(|(&n, &c)| (n, c * unit_freq(n, a))).collect();
        TrigPoly { coeffs, declared_degree: self.declared_degree }
    }

    /// `t ↦ p(m·t)`: coefficient `n` moves to `m·n`.
    pub fn dilate(&self, m: i64) -> TrigPoly {
        assert!(m >= 1, "dilation factor must be positive");
        let coeffs = self.coeffs.iter().map(|(&n, &c)| (n * m, c)).collect();
        TrigPoly { coeffs, declared_degree: self.declared_degree * m as u64 }
    }

    /// Pointwise complex conjugate `t ↦ conj p(t)`.
    pub fn conj(&self) -> TrigPoly {
        let coeffs = self.coeffs.iter().map(|(&n, &c)| (-n, c.conj())).collect();
        TrigPoly { coeffs, declared_degree: self.declared_degree }
    }

    pub fn derivative(&self) -> TrigPoly {
        self.map_coeffs(|n, c| c * Complex64::new(0.0, TAU * n as f64))
    }

    pub fn second_derivative(&self) -> TrigPoly {
        self.map_coeffs(|n, c| c * (-(TAU * n as f64).powi(2)))
    }

    /// Applies `f(n, c_n)` to every stored coefficient.
    pub fn map_coeffs(&self, f: impl Fn(i64, Complex64) -> Complex64) -> TrigPoly {
        let mut out = TrigPoly::from_coeffs(self.coeffs.iter().map(|(&n, &c)| (n, f(n, c))));
        out.declared_degree = self.declared_degree;
        out
    }

    pub fn scale(&self, s: impl Into<Complex64>) -> TrigPoly {
        let s = s.into();
        self.map_coeffs(|_, c| c * s)
    }

    /// Coefficients with `|n| > d`.
    pub fn tail_above(&self, d: u64) -> TrigPoly {
        let mut out = TrigPoly::from_coeffs(self.coeffs().filter(|(n, _)| n.unsigned_abs() > d));
        out.declared_degree = self.declared_degree;
        out
    }

    /// Coefficients with `|n| ≤ d`.
    pub fn truncate(&self, d: u64) -> TrigPoly {
        TrigPoly::from_coeffs(self.coeffs().filter(|(n, _)| n.unsigned_abs() <= d))
    }

    /// `max_n |c_{−n} − conj(c_n)|`; zero exactly for real-valued polynomials.
    pub fn real_defect(&self) -> f64 {
        self.coeffs
            .iter()
            .map(|(&n, &c)| (self.coeff(-n) - c.conj()).norm())
            .fold(0.0, f64::max)
    }

    /// `self + tail`, where `tail` must live strictly above `deg self`.
    /// The band of `self` is copied untouched.
    pub fn extend_with(&self, tail: &TrigPoly) -> Result<TrigPoly> {
        let d = self.degree();
        if let Some((n, _)) = tail.coeffs().find(|(n, _)| n.unsigned_abs() <= d) {
            return Err(Error::Precondition(format!(
                "extension tail has frequency {n} inside the band of degree {d}"
            )));
        }
        let mut coeffs = self.coeffs.clone();
        coeffs.extend(tail.coeffs.iter().map(|(&n, &c)| (n, c)));
        let declared_degree = self.declared_degree.max(hull(&coeffs));
        Ok(TrigPoly { coeffs, declared_degree })
    }

    /// Serializes to the `TRIGPOLY 1` text format.
    pub fn to_text(&self) -> String {
        let mut out = format!("TRIGPOLY 1 {}\n", self.declared_degree);
        for (&n, c) in &self.coeffs {
            out.push_str(&format!("{n} {} {}\n", fmt_f64(c.re), fmt_f64(c.im)));
        }
        out
    }

    /// Parses the `TRIGPOLY 1` text format.
    pub fn from_text(text: &str) -> Result<TrigPoly> {
        let err = |line: usize, message: String| Error::Parse { line, message };
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let (_, header) = lines.next().ok_or_else(|| err(1, "empty input".into()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        let declared_degree = match fields.as_slice() {
            ["TRIGPOLY", "1", d] => d.parse::<u64>().map_err(|e| err(1, format!("degree: {e}")))?,
            _ => return Err(err(1, format!("bad header {header:?}"))),
        };
        let mut coeffs = BTreeMap::new();
        let mut last: Option<i64> = None;
        for (ln, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            let [n, re, im] = parts.as_slice() else {
                return Err(err(ln, format!("expected `n re im`, got {line:?}")));
            };
            let n: i64 = n.parse().map_err(|e| err(ln, format!("frequency: {e}")))?;
            let re: f64 = re.parse().map_err(|e| err(ln, format!("real part: {e}")))?;
            let im: f64 = im.parse().map_err(|e| err(ln, format!("imaginary part: {e}")))?;
            if !(re.is_finite() && im.is_finite()) {
                return Err(err(ln, "non-finite coefficient".into()));
            }
            if let Some(prev) = last {
                if n == prev {
                    return Err(err(ln, format!("duplicate frequency {n}")));
                }
                if n < prev {
                    return Err(err(ln, format!("frequency {n} out of order")));
                }
            }
            if n.unsigned_abs() > declared_degree {
                return Err(err(ln, format!("frequency {n} beyond declared degree")));
            }
            let c = Complex64::new(re, im);
            if is_zero(c) {
                return Err(err(ln, "zero coefficient listed".into()));
            }
            coeffs.insert(n, c);
            last = Some(n);
        }
        Ok(TrigPoly { coeffs, declared_degree })
    }
}

impl GridSamples {
    /// Recovers coefficients `|n| ≤ degree` by a forward FFT.
    pub fn to_poly(&self, degree: u64) -> TrigPoly {
        let mut buf = self.values.clone();
        fft::forward(&mut buf);
        let k = self.size as i64;
        let d = (degree as i64).min(k / 2 - 1).max(0);
        let scale = 1.0 / self.size as f64;
        TrigPoly::from_coeffs((-d..=d).map(|n| (n, buf[n.rem_euclid(k) as usize] * scale)))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn min_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min)
    }
}

/// True iff `P̂(n) = p̂(n)` bit-for-bit on `|n| ≤ deg p`.
pub fn extends(big: &TrigPoly, p: &TrigPoly) -> bool {
    let d = p.degree() as i64;
    let lhs = big.coeffs.range(-d..=d);
    let rhs = p.coeffs.range(-d..=d);
    lhs.eq(rhs)
}

/// Largest gap `||p̂(n)| − |q̂(n)||` over the union of the spectra.
pub fn moduli_equal(p: &TrigPoly, q: &TrigPoly, tol: f64) -> ModuliReport {
    let mut residual: f64 = 0.0;
    for (&n, c) in &p.coeffs {
        residual = residual.max((c.norm() - q.coeff(n).norm()).abs());
    }
    for (&n, c) in &q.coeffs {
        if !p.coeffs.contains_key(&n) {
            residual = residual.max(c.norm());
        }
    }
    ModuliReport { residual, tol, pass: residual <= tol }
}

fn is_zero(c: Complex64) -> bool {
    c.re == 0.0 && c.im == 0.0
}

fn hull(coeffs: &BTreeMap<i64, Complex64>) -> u64 {
    let lo = coeffs.keys().next().map_or(0, |n| n.unsigned_abs());
    let hi = coeffs.keys().next_back().map_or(0, |n| n.unsigned_abs());
    lo.max(hi)
}

fn merge(a: &TrigPoly, b: &TrigPoly, sign: f64) -> TrigPoly {
    let mut out = TrigPoly::from_coeffs(a.coeffs().chain(b.coeffs().map(|(n, c)| (n, c * sign))));
    out.declared_degree = a.declared_degree.max(b.declared_degree).max(out.degree());
    out
}

impl Add for &TrigPoly {
    type Output = TrigPoly;
    fn add(self, rhs: &TrigPoly) -> TrigPoly {
        merge(self, rhs, 1.0)
    }
}

impl Sub for &TrigPoly {
    type Output = TrigPoly;
    fn sub(self, rhs: &TrigPoly) -> TrigPoly {
        merge(self, rhs, -1.0)
    }
}

impl Neg for &TrigPoly {
    type Output = TrigPoly;
    fn neg(self) -> TrigPoly {
        self.scale(-1.0)
    }
}

impl Mul for &TrigPoly {
    type Output = TrigPoly;
    fn mul(self, rhs: &TrigPoly) -> TrigPoly {
        self.multiply(rhs)
    }
}
