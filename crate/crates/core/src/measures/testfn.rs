//! The closed family of test functions: polynomials, indicators, bumps and
//! their sums, products, scalings, powers and `log(1 + ·)` transforms.
//!
//! Each function can be evaluated pointwise, bounded over a window by
//! interval arithmetic, and written to / read from a small s-expression
//! syntax:
//!
//! ```text
//! (const 0.5)              constant
//! (poly 1 0 -2)            1 - 2x²   (axis x; use poly:y for axis y)
//! (ind 0.2 0.6 1.5)        1.5 on [0.2, 0.6]   (2D: (ind x0 x1 y0 y1 h))
//! (bump 0.5 0.25 1)        smooth bump, centre 0.5, radius 0.25, peak 1
//! (sum f g) (prod f g) (scale c f) (pow f k) (log1p f)
//! ```

use std::fmt;

use super::{Point, Window};
use crate::error::{Error, Result};

/// Closed real interval used for range enclosures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi || lo.is_nan() || hi.is_nan());
        Self { lo, hi }
    }

    pub fn point(v: f64) -> Self {
        Self { lo: v, hi: v }
    }

    pub fn hull(self, other: Interval) -> Self {
        Self::new(self.lo.min(other.lo), self.hi.max(other.hi))
    }

    pub fn add(self, o: Interval) -> Self {
        Self::new(self.lo + o.lo, self.hi + o.hi)
    }

    pub fn mul(self, o: Interval) -> Self {
        let c = [self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi];
        Self::new(
            c.iter().copied().fold(f64::INFINITY, f64::min),
            c.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        )
    }

    pub fn scale(self, c: f64) -> Self {
        if c >= 0.0 {
            Self::new(c * self.lo, c * self.hi)
        } else {
            Self::new(c * self.hi, c * self.lo)
        }
    }

    pub fn powi(self, k: u32) -> Self {
        if k == 0 {
            return Self::point(1.0);
        }
        let a = self.lo.powi(k as i32);
        let b = self.hi.powi(k as i32);
        if k % 2 == 1 {
            Self::new(a, b)
        } else if self.lo >= 0.0 {
            Self::new(a, b)
        } else if self.hi <= 0.0 {
            Self::new(b, a)
        } else {
            Self::new(0.0, a.max(b))
        }
    }

    /// Largest absolute value in the interval.
    pub fn mag(self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TestFunction {
    /// `Σ c_k t^k` in the coordinate `axis`.
    Polynomial { axis: usize, coeffs: Vec<f64> },
    /// `height · 1_region`, region a closed box.
    Indicator { region: Window, height: f64 },
    /// `amplitude · exp(1 - 1/(1 - r²/R²))` for `r < R`, zero outside.
    Bump { center: Vec<f64>, radius: f64, amplitude: f64 },
    Sum(Box<TestFunction>, Box<TestFunction>),
    Product(Box<TestFunction>, Box<TestFunction>),
    Scale(f64, Box<TestFunction>),
    Power(Box<TestFunction>, u32),
    /// `log(1 + f)`; requires `f > -1` wherever it is evaluated.
    Log1p(Box<TestFunction>),
}

impl TestFunction {
    pub fn constant(c: f64) -> Self {
        TestFunction::Polynomial { axis: 0, coeffs: vec![c] }
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    /// Polynomial in the first coordinate.
    pub fn poly(coeffs: impl Into<Vec<f64>>) -> Self {
        TestFunction::Polynomial { axis: 0, coeffs: coeffs.into() }
    }

    pub fn poly_axis(axis: usize, coeffs: impl Into<Vec<f64>>) -> Self {
        assert!(axis < 2);
        TestFunction::Polynomial { axis, coeffs: coeffs.into() }
    }

    /// `height · 1_[a,b]` on the line.
    pub fn indicator(a: f64, b: f64, height: f64) -> Self {
        TestFunction::Indicator {
            region: Window::interval(a, b).expect("indicator bounds"),
            height,
        }
    }

    pub fn indicator_box(region: Window, height: f64) -> Self {
        TestFunction::Indicator { region, height }
    }

    pub fn bump(center: f64, radius: f64, amplitude: f64) -> Self {
        assert!(radius > 0.0);
        TestFunction::Bump { center: vec![center], radius, amplitude }
    }

    pub fn bump2(center: [f64; 2], radius: f64, amplitude: f64) -> Self {
        assert!(radius > 0.0);
        TestFunction::Bump { center: center.to_vec(), radius, amplitude }
    }

    pub fn plus(self, other: TestFunction) -> Self {
        TestFunction::Sum(Box::new(self), Box::new(other))
    }

    pub fn times(self, other: TestFunction) -> Self {
        TestFunction::Product(Box::new(self), Box::new(other))
    }

    pub fn scaled(self, c: f64) -> Self {
        TestFunction::Scale(c, Box::new(self))
    }

    pub fn pow(self, k: u32) -> Self {
        TestFunction::Power(Box::new(self), k)
    }

    pub fn log1p(self) -> Self {
        TestFunction::Log1p(Box::new(self))
    }

    pub fn eval(&self, p: &Point) -> f64 {
        match self {
            TestFunction::Polynomial { axis, coeffs } => {
                let t = p.0[*axis];
                coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
            }
            TestFunction::Indicator { region, height } => {
                if region.contains(p) {
                    *height
                } else {
                    0.0
                }
            }
            TestFunction::Bump { center, radius, amplitude } => {
                let r2: f64 = center.iter().enumerate().map(|(i, c)| (p.0[i] - c).powi(2)).sum();
                let q = r2 / (radius * radius);
                if q < 1.0 {
                    amplitude * (1.0 - 1.0 / (1.0 - q)).exp()
                } else {
                    0.0
                }
            }
            TestFunction::Sum(f, g) => f.eval(p) + g.eval(p),
            TestFunction::Product(f, g) => f.eval(p) * g.eval(p),
            TestFunction::Scale(c, f) => c * f.eval(p),
            TestFunction::Power(f, k) => f.eval(p).powi(*k as i32),
            TestFunction::Log1p(f) => f.eval(p).ln_1p(),
        }
    }

    /// A rigorous enclosure of the range of `self` over `window`.
    pub fn range(&self, window: &Window) -> Interval {
        match self {
            TestFunction::Polynomial { axis, coeffs } => {
                if *axis >= window.dim {
                    return Interval::point(coeffs.first().copied().unwrap_or(0.0));
                }
                poly_range(coeffs, window.lo[*axis], window.hi[*axis])
            }
            TestFunction::Indicator { region, height } => {
                let h = *height;
                match region.overlap(window) {
                    Overlap::Disjoint => Interval::point(0.0),
                    Overlap::Covers => Interval::point(h),
                    Overlap::Partial => Interval::new(h.min(0.0), h.max(0.0)),
                }
            }
            TestFunction::Bump { center, radius, amplitude } => {
                let a = *amplitude;
                let far = center.iter().enumerate().any(|(i, &c)| {
                    i < window.dim && (c + radius <= window.lo[i] || c - radius >= window.hi[i])
                });
                if far {
                    Interval::point(0.0)
                } else {
                    Interval::new(a.min(0.0), a.max(0.0))
                }
            }
            TestFunction::Sum(f, g) => f.range(window).add(g.range(window)),
            TestFunction::Product(f, g) => {
                if f == g {
                    f.range(window).powi(2)
                } else {
                    f.range(window).mul(g.range(window))
                }
            }
            TestFunction::Scale(c, f) => f.range(window).scale(*c),
            TestFunction::Power(f, k) => f.range(window).powi(*k),
            TestFunction::Log1p(f) => {
                let r = f.range(window);
                let lo = if r.lo > -1.0 { r.lo.ln_1p() } else { f64::NEG_INFINITY };
                Interval::new(lo, r.hi.ln_1p())
            }
        }
    }

    /// Points along `axis` where the function may fail to be smooth.
    pub fn breakpoints(&self, axis: usize) -> Vec<f64> {
        let mut out = Vec::new();
        self.collect_breakpoints(axis, &mut out);
        out
    }

    fn collect_breakpoints(&self, axis: usize, out: &mut Vec<f64>) {
        match self {
            TestFunction::Polynomial { .. } => {}
            TestFunction::Indicator { region, .. } => {
                if axis < region.dim {
                    out.push(region.lo[axis]);
                    out.push(region.hi[axis]);
                }
            }
            TestFunction::Bump { center, radius, .. } => {
                if let Some(&c) = center.get(axis) {
                    out.extend([c - radius, c + radius]);
                }
            }
            TestFunction::Sum(f, g) | TestFunction::Product(f, g) => {
                f.collect_breakpoints(axis, out);
                g.collect_breakpoints(axis, out);
            }
            TestFunction::Scale(_, f) | TestFunction::Power(f, _) | TestFunction::Log1p(f) => {
                f.collect_breakpoints(axis, out)
            }
        }
    }

    /// Parses the s-expression syntax. Errors carry a 1-based column.
    pub fn parse(text: &str) -> Result<Self> {
        let tokens = tokenize(text)?;
        let mut pos = 0;
        let f = parse_expr(&tokens, &mut pos, text.len())?;
        if pos != tokens.len() {
            return Err(Error::config(1, tokens[pos].1, "trailing input after function"));
        }
        Ok(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Overlap {
    Disjoint,
    Partial,
    Covers,
}

/// Enclosure of a polynomial on `[a, b]` by interval Horner on 256 pieces.
fn poly_range(coeffs: &[f64], a: f64, b: f64) -> Interval {
    if coeffs.len() <= 1 {
        return Interval::point(coeffs.first().copied().unwrap_or(0.0));
    }
    if coeffs.len() == 2 {
        let (u, v) = (coeffs[0] + coeffs[1] * a, coeffs[0] + coeffs[1] * b);
        return Interval::new(u.min(v), u.max(v));
    }
    const PIECES: usize = 256;
    let mut out: Option<Interval> = None;
    for i in 0..PIECES {
        let lo = a + (b - a) * i as f64 / PIECES as f64;
        let hi = a + (b - a) * (i + 1) as f64 / PIECES as f64;
        // centred form: p(m) + (t - m) q(t), q evaluated by interval Horner
        let m = 0.5 * (lo + hi);
        let h = 0.5 * (hi - lo);
        let t = Interval::new(lo, hi);
        let mut acc = Interval::point(0.0);
        for &c in coeffs.iter().rev() {
            acc = acc.mul(t).add(Interval::point(c));
        }
        let pm: f64 = coeffs.iter().rev().fold(0.0, |s, &c| s * m + c);
        // derivative enclosure for the mean-value form
        let mut dacc = Interval::point(0.0);
        for (k, &c) in coeffs.iter().enumerate().skip(1).rev() {
            dacc = dacc.mul(t).add(Interval::point(k as f64 * c));
        }
        let mv = Interval::new(-h, h).mul(dacc).add(Interval::point(pm));
        let piece = Interval::new(acc.lo.max(mv.lo), acc.hi.min(mv.hi));
        // widen by a rounding allowance
        let slack = 1e-12 * (piece.mag() + 1.0);
        let piece = Interval::new(piece.lo - slack, piece.hi + slack);
        out = Some(match out {
            None => piece,
            Some(o) => o.hull(piece),
        });
    }
    out.unwrap()
}

fn fmt_num(v: f64) -> String {
    format!("{v}")
}

impl fmt::Display for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TestFunction::Polynomial { axis, coeffs } => {
                if *axis == 0 && coeffs.len() == 1 {
                    return write!(f, "(const {})", fmt_num(coeffs[0]));
                }
                let head = if *axis == 0 { "poly" } else { "poly:y" };
                write!(f, "({head}")?;
                for c in coeffs {
                    write!(f, " {}", fmt_num(*c))?;
                }
                write!(f, ")")
            }
            TestFunction::Indicator { region, height } => {
                write!(f, "(ind")?;
                for i in 0..region.dim {
                    write!(f, " {} {}", fmt_num(region.lo[i]), fmt_num(region.hi[i]))?;
                }
                write!(f, " {})", fmt_num(*height))
            }
            TestFunction::Bump { center, radius, amplitude } => {
                write!(f, "(bump")?;
                for c in center {
                    write!(f, " {}", fmt_num(*c))?;
                }
                write!(f, " {} {})", fmt_num(*radius), fmt_num(*amplitude))
            }
            TestFunction::Sum(a, b) => write!(f, "(sum {a} {b})"),
            TestFunction::Product(a, b) => write!(f, "(prod {a} {b})"),
            TestFunction::Scale(c, a) => write!(f, "(scale {} {a})", fmt_num(*c)),
            TestFunction::Power(a, k) => write!(f, "(pow {a} {k})"),
            TestFunction::Log1p(a) => write!(f, "(log1p {a})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Open,
    Close,
    Atom(String),
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
        } else if c == '(' {
            out.push((Tok::Open, col));
            i += 1;
        } else if c == ')' {
            out.push((Tok::Close, col));
            i += 1;
        } else {
            let start = i;
            while i < chars.len() && !chars[i].is_whitespace() && chars[i] != '(' && chars[i] != ')' {
                i += 1;
            }
            out.push((Tok::Atom(chars[start..i].iter().collect()), col));
        }
    }
    Ok(out)
}

fn parse_expr(tokens: &[(Tok, usize)], pos: &mut usize, end: usize) -> Result<TestFunction> {
    let col_at = |p: usize| tokens.get(p).map(|t| t.1).unwrap_or(end + 1);
    match tokens.get(*pos) {
        Some((Tok::Open, _)) => {}
        _ => return Err(Error::config(1, col_at(*pos), "expected '('")),
    }
    *pos += 1;
    let (head, head_col) = match tokens.get(*pos) {
        Some((Tok::Atom(a), c)) => (a.clone(), *c),
        _ => return Err(Error::config(1, col_at(*pos), "expected a function name")),
    };
    *pos += 1;

    let number = |pos: &mut usize| -> Result<f64> {
        match tokens.get(*pos) {
            Some((Tok::Atom(a), c)) => {
                let v = a
                    .parse::<f64>()
                    .map_err(|_| Error::config(1, *c, format!("expected a number, found {a:?}")))?;
                *pos += 1;
                Ok(v)
            }
            _ => Err(Error::config(1, col_at(*pos), "expected a number")),
        }
    };
    let numbers = |pos: &mut usize| -> Result<Vec<f64>> {
        let mut v = Vec::new();
        while let Some((Tok::Atom(_), _)) = tokens.get(*pos) {
            v.push(number(pos)?);
        }
        Ok(v)
    };

    let f = match head.as_str() {
        "const" => TestFunction::constant(number(pos)?),
        "poly" | "poly:x" | "poly:y" => {
            let coeffs = numbers(pos)?;
            if coeffs.is_empty() {
                return Err(Error::config(1, head_col, "poly needs at least one coefficient"));
            }
            let axis = usize::from(head == "poly:y");
            TestFunction::Polynomial { axis, coeffs }
        }
        "ind" => {
            let v = numbers(pos)?;
            let region = match v.len() {
                3 => Window::interval(v[0], v[1]),
                5 => Window::rect([v[0], v[1]], [v[2], v[3]]),
                _ => return Err(Error::config(1, head_col, "ind takes 3 (1D) or 5 (2D) numbers")),
            }
            .map_err(|e| Error::config(1, head_col, e.to_string()))?;
            TestFunction::Indicator { region, height: *v.last().unwrap() }
        }
        "bump" => {
            let v = numbers(pos)?;
            if !(v.len() == 3 || v.len() == 4) {
                return Err(Error::config(1, head_col, "bump takes 3 (1D) or 4 (2D) numbers"));
            }
            let k = v.len();
            if v[k - 2] <= 0.0 {
                return Err(Error::config(1, head_col, "bump radius must be positive"));
            }
            TestFunction::Bump { center: v[..k - 2].to_vec(), radius: v[k - 2], amplitude: v[k - 1] }
        }
        "sum" | "prod" => {
            let a = parse_expr(tokens, pos, end)?;
            let b = parse_expr(tokens, pos, end)?;
            if head == "sum" {
                a.plus(b)
            } else {
                a.times(b)
            }
        }
        "scale" => {
            let c = number(pos)?;
            parse_expr(tokens, pos, end)?.scaled(c)
        }
        "pow" => {
            let a = parse_expr(tokens, pos, end)?;
            let k = number(pos)?;
            if k < 0.0 || k.fract() != 0.0 || k > 64.0 {
                return Err(Error::config(1, col_at(*pos - 1), "pow exponent must be an integer in 0..=64"));
            }
            a.pow(k as u32)
        }
        "log1p" => parse_expr(tokens, pos, end)?.log1p(),
        other => return Err(Error::config(1, head_col, format!("unknown function {other:?}"))),
    };
    match tokens.get(*pos) {
        Some((Tok::Close, _)) => {
            *pos += 1;
            Ok(f)
        }
        _ => Err(Error::config(1, col_at(*pos), "expected ')'")),
    }
}
