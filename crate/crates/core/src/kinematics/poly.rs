//! Polynomials and piecewise polynomials in local coordinates, with exact
//! convolution against a unit-area box kernel.

use crate::scalar::Scalar;

/// Dense polynomial, coefficients in ascending powers.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial<T> {
    coeffs: Vec<T>,
}

impl<T: Scalar> Polynomial<T> {
    pub fn new(coeffs: Vec<T>) -> Self {
        let mut p = Self { coeffs };
        p.trim();
        p
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: T) -> Self {
        Self::new(vec![c])
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    /// Degree of the polynomial; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn eval(&self, x: T) -> T {
        self.coeffs
            .iter()
            .rev()
            .fold(T::zero(), |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| c * T::count(i))
                .collect(),
        )
    }

    /// Antiderivative vanishing at zero.
    pub fn integral(&self) -> Self {
        let mut out = Vec::with_capacity(self.coeffs.len() + 1);
        out.push(T::zero());
        out.extend(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(i, &c)| c / T::count(i + 1)),
        );
        Self::new(out)
    }

    /// Returns `q` with `q(x) = p(x + h)`.
    pub fn shifted(&self, h: T) -> Self {
        if h == T::zero() {
            return self.clone();
        }
        let mut acc: Vec<T> = Vec::with_capacity(self.coeffs.len());
        for &c in self.coeffs.iter().rev() {
            // acc <- acc * (x + h) + c
            let mut next = vec![T::zero(); acc.len() + 1];
            for (i, &a) in acc.iter().enumerate() {
                next[i + 1] += a;
                next[i] += a * h;
            }
            next[0] += c;
            acc = next;
        }
        Self::new(acc)
    }

    pub fn scaled(&self, k: T) -> Self {
        Self::new(self.coeffs.iter().map(|&c| c * k).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new(
            (0..n)
                .map(|i| {
                    self.coeffs.get(i).copied().unwrap_or_else(T::zero)
                        + other.coeffs.get(i).copied().unwrap_or_else(T::zero)
                })
                .collect(),
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scaled(-T::one()))
    }

    /// Largest `|p(x)|` for `x` in `[0, len]`.
    ///
    /// Exact (endpoints plus stationary points) up to cubics; higher degrees
    /// fall back to a dense scan.
    pub fn max_abs_on(&self, len: T) -> T {
        let mut best = self.eval(T::zero()).abs().max(self.eval(len).abs());
        let d = self.derivative();
        let mut consider = |x: T| {
            if x > T::zero() && x < len {
                best = best.max(self.eval(x).abs());
            }
        };
        match d.coeffs.as_slice() {
            [] | [_] => {}
            [b, a] => consider(-*b / *a),
            [c, b, a] => {
                let disc = *b * *b - T::lit(4.0) * *a * *c;
                if disc >= T::zero() {
                    let r = disc.sqrt();
                    consider((-*b + r) / (T::lit(2.0) * *a));
                    consider((-*b - r) / (T::lit(2.0) * *a));
                }
            }
            _ => {
                let steps = 512;
                for i in 1..steps {
                    consider(len * T::count(i) / T::count(steps));
                }
            }
        }
        best
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(|c| *c == T::zero()) {
            self.coeffs.pop();
        }
    }
}

/// A function of time made of polynomial pieces.
///
/// Piece `i` covers `[knots[i], knots[i+1])` and is expressed in the local
/// coordinate `t - knots[i]`. The function is zero before the first knot
/// and equal to the constant `tail` from the last knot on.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewisePolynomial<T> {
    knots: Vec<T>,
    pieces: Vec<Polynomial<T>>,
    tail: T,
}

impl<T: Scalar> PiecewisePolynomial<T> {
    /// # Panics
    /// If `knots.len() != pieces.len() + 1` (for non-empty `pieces`) or the
    /// knots are not non-decreasing.
    pub fn new(knots: Vec<T>, pieces: Vec<Polynomial<T>>, tail: T) -> Self {
        if pieces.is_empty() {
            assert!(knots.len() <= 1, "knots without pieces");
        } else {
            assert_eq!(knots.len(), pieces.len() + 1, "knot/piece count mismatch");
        }
        assert!(
            knots.windows(2).all(|w| w[0] <= w[1]),
            "knots must be non-decreasing"
        );
        Self {
            knots,
            pieces,
            tail,
        }
    }

    pub fn zero() -> Self {
        Self {
            knots: Vec::new(),
            pieces: Vec::new(),
            tail: T::zero(),
        }
    }

    /// Piecewise-constant signal starting at `start`; zero-length entries are
    /// dropped.
    pub fn from_pulses<I>(start: T, pulses: I, tail: T) -> Self
    where
        I: IntoIterator<Item = (T, T)>,
    {
        let mut knots = vec![start];
        let mut pieces = Vec::new();
        let mut t = start;
        for (amplitude, duration) in pulses {
            if duration <= T::zero() {
                continue;
            }
            t += duration;
            knots.push(t);
            pieces.push(Polynomial::constant(amplitude));
        }
        if pieces.is_empty() {
            knots.clear();
        }
        Self::new(knots, pieces, tail)
    }

    pub fn knots(&self) -> &[T] {
        &self.knots
    }

    pub fn pieces(&self) -> &[Polynomial<T>] {
        &self.pieces
    }

    pub fn tail(&self) -> T {
        self.tail
    }

    pub fn start(&self) -> T {
        self.knots.first().copied().unwrap_or_else(T::zero)
    }

    pub fn end(&self) -> T {
        self.knots.last().copied().unwrap_or_else(T::zero)
    }

    /// Index of the piece containing `t`, if any.
    pub fn locate(&self, t: T) -> Option<usize> {
        if self.pieces.is_empty() || t < self.start() || t >= self.end() {
            return None;
        }
        // last knot <= t
        let idx = self.knots.partition_point(|&k| k <= t);
        Some((idx - 1).min(self.pieces.len() - 1))
    }

    pub fn eval(&self, t: T) -> T {
        match self.locate(t) {
            Some(i) => self.pieces[i].eval(t - self.knots[i]),
            None if self.pieces.is_empty() || t < self.start() => T::zero(),
            None => self.tail,
        }
    }

    pub fn derivative(&self) -> Self {
        Self {
            knots: self.knots.clone(),
            pieces: self.pieces.iter().map(Polynomial::derivative).collect(),
            tail: T::zero(),
        }
    }

    /// Running integral from the first knot.
    pub fn primitive(&self) -> Primitive<T> {
        let mut acc = T::zero();
        let mut pieces = Vec::with_capacity(self.pieces.len());
        for (i, p) in self.pieces.iter().enumerate() {
            let integral = p.integral().add(&Polynomial::constant(acc));
            acc = integral.eval(self.knots[i + 1] - self.knots[i]);
            pieces.push(integral);
        }
        Primitive {
            cumulative: Self {
                knots: self.knots.clone(),
                pieces,
                tail: acc,
            },
            slope: self.tail,
        }
    }

    /// Exact convolution with a unit-area box of the given width,
    /// `g(t) = (S(t) - S(t - width)) / width` with `S` the running integral.
    ///
    /// # Panics
    /// If `width` is not positive.
    pub fn box_filter(&self, width: T) -> Self {
        assert!(width > T::zero(), "box width must be positive");
        if self.pieces.is_empty() {
            return self.clone();
        }
        let primitive = self.primitive();
        let knots = merge_knots(&self.knots, width);
        let inv = width.recip();
        let pieces = knots
            .windows(2)
            .map(|w| {
                let (c, d) = (w[0], w[1]);
                let mid = (c + d) / T::lit(2.0);
                let lead = primitive.local_poly(mid, c);
                let lag = primitive.local_poly(mid - width, c - width);
                lead.sub(&lag).scaled(inv)
            })
            .collect();
        Self {
            knots,
            pieces,
            tail: self.tail,
        }
    }

    /// Applies the box filter `count` times.
    pub fn box_filter_cascade(&self, width: T, count: usize) -> Self {
        (0..count).fold(self.clone(), |acc, _| acc.box_filter(width))
    }

    /// Time-shifted copy: `g(t) = f(t - delay)`.
    pub fn delayed(&self, delay: T) -> Self {
        Self {
            knots: self.knots.iter().map(|&k| k + delay).collect(),
            pieces: self.pieces.clone(),
            tail: self.tail,
        }
    }

    pub fn scaled(&self, k: T) -> Self {
        Self {
            knots: self.knots.clone(),
            pieces: self.pieces.iter().map(|p| p.scaled(k)).collect(),
            tail: self.tail * k,
        }
    }

    /// Largest absolute value over the support and the tail.
    pub fn max_abs(&self) -> T {
        self.pieces
            .iter()
            .zip(self.knots.windows(2))
            .map(|(p, w)| p.max_abs_on(w[1] - w[0]))
            .fold(self.tail.abs(), T::max)
    }

    /// Pointwise sum with another piecewise polynomial.
    pub fn add(&self, other: &Self) -> Self {
        if self.pieces.is_empty() && self.tail == T::zero() {
            return other.clone();
        }
        if other.pieces.is_empty() && other.tail == T::zero() {
            return self.clone();
        }
        let mut all: Vec<T> = self.knots.iter().chain(other.knots.iter()).copied().collect();
        all.sort_by(|a, b| a.partial_cmp(b).expect("finite knots"));
        let knots = dedup_knots(all);
        let pieces = knots
            .windows(2)
            .map(|w| {
                let mid = (w[0] + w[1]) / T::lit(2.0);
                self.local_poly(mid, w[0]).add(&other.local_poly(mid, w[0]))
            })
            .collect();
        Self {
            knots,
            pieces,
            tail: self.tail + other.tail,
        }
    }

    /// Polynomial describing the function near `x`, re-expressed in the
    /// coordinate `t - origin`.
    pub fn local_poly(&self, x: T, origin: T) -> Polynomial<T> {
        match self.locate(x) {
            Some(i) => self.pieces[i].shifted(origin - self.knots[i]),
            None if self.pieces.is_empty() || x < self.start() => Polynomial::zero(),
            None => Polynomial::constant(self.tail),
        }
    }
}

/// Running integral of a piecewise polynomial; grows linearly past the last
/// knot when the integrand has a non-zero tail.
#[derive(Clone, Debug, PartialEq)]
pub struct Primitive<T> {
    cumulative: PiecewisePolynomial<T>,
    slope: T,
}

impl<T: Scalar> Primitive<T> {
    pub fn eval(&self, t: T) -> T {
        let end = self.cumulative.end();
        if !self.cumulative.pieces.is_empty() && t >= end {
            self.cumulative.tail + self.slope * (t - end)
        } else {
            self.cumulative.eval(t)
        }
    }

    /// Integral over the whole support.
    pub fn total(&self) -> T {
        self.cumulative.tail
    }

    fn local_poly(&self, x: T, origin: T) -> Polynomial<T> {
        let c = &self.cumulative;
        if !c.pieces.is_empty() && x >= c.end() {
            let at_origin = c.tail + self.slope * (origin - c.end());
            Polynomial::new(vec![at_origin, self.slope])
        } else {
            c.local_poly(x, origin)
        }
    }
}

fn merge_knots<T: Scalar>(knots: &[T], width: T) -> Vec<T> {
    // both inputs sorted: linear merge
    let shifted: Vec<T> = knots.iter().map(|&k| k + width).collect();
    let mut merged = Vec::with_capacity(knots.len() * 2);
    let (mut i, mut j) = (0, 0);
    while i < knots.len() || j < shifted.len() {
        let take_left = j >= shifted.len() || (i < knots.len() && knots[i] <= shifted[j]);
        if take_left {
            merged.push(knots[i]);
            i += 1;
        } else {
            merged.push(shifted[j]);
            j += 1;
        }
    }
    dedup_knots(merged)
}

/// Collapses knots closer than a relative rounding tolerance.
fn dedup_knots<T: Scalar>(sorted: Vec<T>) -> Vec<T> {
    let scale = sorted
        .iter()
        .fold(T::one(), |m, k| m.max(k.abs()));
    let tol = T::epsilon() * T::lit(64.0) * scale;
    let mut out: Vec<T> = Vec::with_capacity(sorted.len());
    for k in sorted {
        match out.last() {
            Some(&last) if k - last <= tol => {}
            _ => out.push(k),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn shift_matches_direct_evaluation() {
        let p = Polynomial::new(vec![1.0_f64, -2.0, 0.5, 3.0]);
        let q = p.shifted(0.7);
        for &x in &[-1.0, 0.0, 0.3, 2.0] {
            assert!((q.eval(x) - p.eval(x + 0.7)).abs() < 1e-12);
        }
    }

    #[test]
    fn integral_and_derivative_are_inverse() {
        let p = Polynomial::new(vec![2.0_f64, 0.0, -1.0, 4.0]);
        assert_eq!(p.integral().derivative(), p);
        assert_eq!(Polynomial::<f64>::constant(0.0), Polynomial::zero());
    }

    #[test]
    fn single_box_turns_pulse_into_trapezoid() {
        let pulse = PiecewisePolynomial::from_pulses(0.0_f64, [(10.0, 1.0)], 0.0);
        let v = pulse.box_filter(0.2);
        assert_eq!(v.knots(), &[0.0, 0.2, 1.0, 1.2]);
        assert!((v.eval(0.1) - 5.0).abs() < 1e-12);
        assert!((v.eval(0.5) - 10.0).abs() < 1e-12);
        assert!((v.eval(1.1) - 5.0).abs() < 1e-12);
        assert_eq!(v.eval(1.3), 0.0);
        assert!((v.primitive().total() - 10.0).abs() < 1e-12);
    }

    #[test]
    fn step_tail_survives_filtering() {
        let step = PiecewisePolynomial::from_pulses(0.0_f64, [(2.0, 0.5)], 5.0);
        let v = step.box_filter(0.1).box_filter(0.1);
        assert!((v.eval(10.0) - 5.0).abs() < 1e-12);
        assert!((v.eval(0.3) - 2.0).abs() < 1e-12);
        let p = step.primitive();
        assert!((p.eval(1.5) - (1.0 + 5.0)).abs() < 1e-12);
    }

    #[test]
    fn add_merges_supports() {
        let a = PiecewisePolynomial::from_pulses(0.0_f64, [(1.0, 1.0)], 0.0);
        let b = PiecewisePolynomial::from_pulses(0.5, [(2.0, 1.0)], 0.0);
        let s = a.add(&b);
        assert_eq!(s.eval(0.25), 1.0);
        assert_eq!(s.eval(0.75), 3.0);
        assert_eq!(s.eval(1.25), 2.0);
        assert_eq!(s.eval(2.0), 0.0);
    }

    proptest! {
        #[test]
        fn box_filter_preserves_area(
            amps in prop::collection::vec(-50.0f64..50.0, 1..6),
            durs in prop::collection::vec(0.01f64..1.0, 6),
            width in 0.01f64..0.3,
        ) {
            let pulses: Vec<(f64, f64)> = amps.iter().copied().zip(durs.iter().copied()).collect();
            let raw = PiecewisePolynomial::from_pulses(0.0, pulses.clone(), 0.0);
            let area: f64 = pulses.iter().map(|(a, d)| a * d).sum();
            let filtered = raw.box_filter_cascade(width, 3);
            let total = filtered.primitive().total();
            prop_assert!((total - area).abs() <= 1e-9 * (1.0 + area.abs()));
        }

        #[test]
        fn box_filters_commute(w1 in 0.01f64..0.3, w2 in 0.01f64..0.3, t in 0.0f64..2.5) {
            let raw = PiecewisePolynomial::from_pulses(0.0_f64, [(3.0, 0.4), (-1.0, 0.7), (2.0, 0.5)], 0.0);
            let a = raw.box_filter(w1).box_filter(w2);
            let b = raw.box_filter(w2).box_filter(w1);
            prop_assert!((a.eval(t) - b.eval(t)).abs() < 1e-9);
        }
    }
}
