//! Finite atomic measures on a window: configurations γ, marked
//! configurations γ̂ and signed discrete measures ω = Σ s_x ε_x.
//!
//! Atoms are kept sorted lexicographically by position and positions are
//! compared exactly. Surgery returns new values.

use std::cmp::Ordering;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::hexfloat;
use crate::measures::{Point, TestFunction, Window};

/// Sorted atom list shared by the three public types.
#[derive(Debug, Clone, PartialEq)]
struct Atoms<T> {
    window: Window,
    items: Vec<(Point, T)>,
}

impl<T: Copy> Atoms<T> {
    fn new(window: Window, mut items: Vec<(Point, T)>) -> Result<Self> {
        for (p, _) in &items {
            check_point(&window, p)?;
        }
        items.sort_by(|a, b| a.0.cmp_lex(&b.0));
        if items.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::AtomClash);
        }
        Ok(Self { window, items })
    }

    fn find(&self, x: &Point) -> std::result::Result<usize, usize> {
        self.items.binary_search_by(|(p, _)| p.cmp_lex(x))
    }

    fn insert(&self, x: Point, v: T) -> Result<Self> {
        check_point(&self.window, &x)?;
        match self.find(&x) {
            Ok(_) => Err(Error::AtomClash),
            Err(i) => {
                let mut items = Vec::with_capacity(self.items.len() + 1);
                items.extend_from_slice(&self.items[..i]);
                items.push((x, v));
                items.extend_from_slice(&self.items[i..]);
                Ok(Self { window: self.window, items })
            }
        }
    }

    fn remove(&self, x: &Point) -> Result<(Self, T)> {
        match self.find(x) {
            Err(_) => Err(Error::AtomMissing),
            Ok(i) => {
                let mut items = self.items.clone();
                let (_, v) = items.remove(i);
                Ok((Self { window: self.window, items }, v))
            }
        }
    }
}

fn check_point(window: &Window, p: &Point) -> Result<()> {
    let finite = p.0.iter().all(|c| c.is_finite());
    if !finite || !window.contains(p) || (window.dim == 1 && p.0[1] != 0.0) {
        return Err(Error::invalid(format!("point {:?} lies outside the window", &p.0[..window.dim])));
    }
    Ok(())
}

fn check_weight(s: f64) -> Result<()> {
    if s == 0.0 || !s.is_finite() {
        return Err(Error::invalid(format!("atom weight {s} must be finite and nonzero")));
    }
    Ok(())
}

/// Anything that pairs with test functions as `Σ w_j f(x_j)`.
pub trait AtomicMeasure {
    fn window(&self) -> &Window;

    /// Number of atoms.
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Calls `f(x_j, w_j)` in sorted order.
    fn for_each_atom(&self, f: impl FnMut(&Point, f64));

    /// `⟨m, f⟩ = Σ w_j f(x_j)`.
    fn pairing(&self, f: &TestFunction) -> f64 {
        let mut acc = 0.0;
        self.for_each_atom(|p, w| acc += w * f.eval(p));
        acc
    }

    /// `⟨m, fᵏ⟩`, through the family's power operation.
    fn power_sum(&self, f: &TestFunction, k: u32) -> f64 {
        self.pairing(&f.clone().pow(k))
    }

    /// `[⟨m, f⟩, ⟨m, f²⟩, …, ⟨m, f^K⟩]` with one evaluation of `f` per atom.
    fn power_sums(&self, f: &TestFunction, max_k: usize) -> Vec<f64> {
        let mut sums = vec![0.0; max_k];
        self.for_each_atom(|p, w| {
            let v = f.eval(p);
            let mut pow = 1.0;
            for s in sums.iter_mut() {
                pow *= v;
                *s += w * pow;
            }
        });
        sums
    }
}

/// A finite configuration γ: distinct points in the window.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration(Atoms<()>);

impl Configuration {
    pub fn new(window: Window, points: Vec<Point>) -> Result<Self> {
        Ok(Self(Atoms::new(window, points.into_iter().map(|p| (p, ())).collect())?))
    }

    pub fn empty(window: Window) -> Self {
        Self(Atoms { window, items: Vec::new() })
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &Point> + '_ {
        self.0.items.iter().map(|(p, _)| p)
    }

    pub fn contains(&self, x: &Point) -> bool {
        self.0.find(x).is_ok()
    }

    /// `γ + ε_x`.
    pub fn add_atom(&self, x: Point) -> Result<Self> {
        Ok(Self(self.0.insert(x, ())?))
    }

    /// `γ - ε_x`.
    pub fn remove_atom(&self, x: &Point) -> Result<Self> {
        Ok(Self(self.0.remove(x)?.0))
    }

    /// `N_B(γ) = |γ ∩ B|` for a closed box `B`.
    pub fn count_in_region(&self, region: &Window) -> usize {
        self.points().filter(|p| region.contains(p)).count()
    }

    /// Attaches the same mark to every point.
    pub fn with_marks(&self, mut mark: impl FnMut(&Point) -> f64) -> Result<MarkedConfiguration> {
        let atoms = self
            .0
            .items
            .iter()
            .map(|(p, _)| {
                let s = mark(p);
                check_weight(s)?;
                Ok((*p, s))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(MarkedConfiguration(Atoms { window: self.0.window, items: atoms }))
    }

    /// View as the discrete measure with unit weights.
    pub fn as_discrete(&self) -> DiscreteMeasure {
        DiscreteMeasure(Atoms { window: self.0.window, items: self.0.items.iter().map(|(p, _)| (*p, 1.0)).collect() })
    }

    pub fn to_text(&self) -> String {
        write_text("configuration", &self.0.window, self.0.items.iter().map(|(p, _)| (*p, None)))
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let (window, atoms) = read_text(text, "configuration")?;
        Self::new(window, atoms.into_iter().map(|a| a.0).collect())
    }

    pub fn to_json(&self) -> Value {
        write_json("configuration", &self.0.window, self.0.items.iter().map(|(p, _)| (*p, None)))
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let (window, atoms) = read_json(v, "configuration")?;
        Self::new(window, atoms.into_iter().map(|a| a.0).collect())
    }
}

impl AtomicMeasure for Configuration {
    fn window(&self) -> &Window {
        &self.0.window
    }

    fn len(&self) -> usize {
        self.0.items.len()
    }

    fn for_each_atom(&self, mut f: impl FnMut(&Point, f64)) {
        for (p, _) in &self.0.items {
            f(p, 1.0);
        }
    }
}

/// A marked configuration γ̂ = {(s_j, x_j)} with distinct positions and
/// nonzero marks.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkedConfiguration(Atoms<f64>);

impl MarkedConfiguration {
    /// Builds from `(mark, position)` pairs.
    pub fn new(window: Window, atoms: Vec<(f64, Point)>) -> Result<Self> {
        for (s, _) in &atoms {
            check_weight(*s)?;
        }
        Ok(Self(Atoms::new(window, atoms.into_iter().map(|(s, p)| (p, s)).collect())?))
    }

    pub fn empty(window: Window) -> Self {
        Self(Atoms { window, items: Vec::new() })
    }

    pub fn window(&self) -> &Window {
        &self.0.window
    }

    pub fn len(&self) -> usize {
        self.0.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.items.is_empty()
    }

    /// `(s_j, x_j)` in position order.
    pub fn atoms(&self) -> impl ExactSizeIterator<Item = (f64, Point)> + '_ {
        self.0.items.iter().map(|&(p, s)| (s, p))
    }

    /// Projection onto positions.
    pub fn positions(&self) -> Configuration {
        Configuration(Atoms { window: self.0.window, items: self.0.items.iter().map(|(p, _)| (*p, ())).collect() })
    }

    pub fn add_atom(&self, s: f64, x: Point) -> Result<Self> {
        check_weight(s)?;
        Ok(Self(self.0.insert(x, s)?))
    }

    /// Removes the atom at `x`, whatever its mark.
    pub fn remove_atom(&self, x: &Point) -> Result<Self> {
        Ok(Self(self.0.remove(x)?.0))
    }

    /// `Σ(γ̂) = Σ s_j ε_{x_j}`.
    pub fn sigma_map(&self) -> DiscreteMeasure {
        DiscreteMeasure(self.0.clone())
    }

    pub fn to_text(&self) -> String {
        write_text("marked", &self.0.window, self.0.items.iter().map(|&(p, s)| (p, Some(s))))
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let (window, atoms) = read_text(text, "marked")?;
        Self::new(window, atoms.into_iter().map(|(p, s)| (s.unwrap_or(1.0), p)).collect())
    }

    pub fn to_json(&self) -> Value {
        write_json("marked", &self.0.window, self.0.items.iter().map(|&(p, s)| (p, Some(s))))
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let (window, atoms) = read_json(v, "marked")?;
        Self::new(window, atoms.into_iter().map(|(p, s)| (s.unwrap_or(1.0), p)).collect())
    }
}

/// A signed discrete measure ω = Σ s_j ε_{x_j} with distinct positions.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure(Atoms<f64>);

impl DiscreteMeasure {
    /// Builds from `(position, weight)` pairs.
    pub fn new(window: Window, atoms: Vec<(Point, f64)>) -> Result<Self> {
        for (_, s) in &atoms {
            check_weight(*s)?;
        }
        Ok(Self(Atoms::new(window, atoms)?))
    }

    pub fn zero(window: Window) -> Self {
        Self(Atoms { window, items: Vec::new() })
    }

    pub fn atoms(&self) -> &[(Point, f64)] {
        &self.0.items
    }

    pub fn weight_at(&self, x: &Point) -> Option<f64> {
        self.0.find(x).ok().map(|i| self.0.items[i].1)
    }

    /// `ω + s ε_x`.
    pub fn add_atom(&self, x: Point, s: f64) -> Result<Self> {
        check_weight(s)?;
        Ok(Self(self.0.insert(x, s)?))
    }

    /// `ω - s_x ε_x`: the whole atom at `x` is removed.
    pub fn remove_atom(&self, x: &Point) -> Result<Self> {
        Ok(Self(self.0.remove(x)?.0))
    }

    /// Like [`remove_atom`](Self::remove_atom), also returning the weight.
    pub fn take_atom(&self, x: &Point) -> Result<(Self, f64)> {
        let (atoms, s) = self.0.remove(x)?;
        Ok((Self(atoms), s))
    }

    /// Inverse of [`MarkedConfiguration::sigma_map`].
    pub fn sigma_inverse(&self) -> MarkedConfiguration {
        MarkedConfiguration(self.0.clone())
    }

    pub fn to_text(&self) -> String {
        write_text("discrete", &self.0.window, self.0.items.iter().map(|&(p, s)| (p, Some(s))))
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let (window, atoms) = read_text(text, "discrete")?;
        Self::new(window, atoms.into_iter().map(|(p, s)| (p, s.unwrap_or(1.0))).collect())
    }

    pub fn to_json(&self) -> Value {
        write_json("discrete", &self.0.window, self.0.items.iter().map(|&(p, s)| (p, Some(s))))
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let (window, atoms) = read_json(v, "discrete")?;
        Self::new(window, atoms.into_iter().map(|(p, s)| (p, s.unwrap_or(1.0))).collect())
    }
}

impl AtomicMeasure for DiscreteMeasure {
    fn window(&self) -> &Window {
        &self.0.window
    }

    fn len(&self) -> usize {
        self.0.items.len()
    }

    fn for_each_atom(&self, mut f: impl FnMut(&Point, f64)) {
        for (p, s) in &self.0.items {
            f(p, *s);
        }
    }
}

/// Compares two positions the way the atom lists do.
pub fn position_order(a: &Point, b: &Point) -> Ordering {
    a.cmp_lex(b)
}

// Text format, one record per line:
//
//   <kind> <dim>
//   window <lo_1> <hi_1> [<lo_2> <hi_2>]
//   <x_1> [<x_2>] [<weight>]
//
// Numbers are written as hexadecimal float literals.

fn write_text(kind: &str, window: &Window, atoms: impl Iterator<Item = (Point, Option<f64>)>) -> String {
    let d = window.dim;
    let mut out = format!("{kind} {d}\nwindow");
    for i in 0..d {
        out.push_str(&format!(" {} {}", hexfloat::format(window.lo[i]), hexfloat::format(window.hi[i])));
    }
    out.push('\n');
    for (p, w) in atoms {
        let coords: Vec<String> = p.0[..d].iter().map(|&c| hexfloat::format(c)).collect();
        out.push_str(&coords.join(" "));
        if let Some(w) = w {
            out.push(' ');
            out.push_str(&hexfloat::format(w));
        }
        out.push('\n');
    }
    out
}

type RawAtoms = (Window, Vec<(Point, Option<f64>)>);

fn read_text(text: &str, kind: &str) -> Result<RawAtoms> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
    let number = |tok: &str, line: usize, col: usize| {
        hexfloat::parse(tok).map_err(|_| Error::config(line, col, format!("expected a number, found {tok:?}")))
    };
    let (ln, header) = lines.next().ok_or_else(|| Error::config(1, 1, "empty input"))?;
    let head: Vec<_> = tokens(header);
    match head.as_slice() {
        [(k, _), (d, dc)] if *k == kind => {
            let dim: usize = d.parse().map_err(|_| Error::config(ln + 1, *dc, "dimension must be 1 or 2"))?;
            if !(1..=2).contains(&dim) {
                return Err(Error::config(ln + 1, *dc, "dimension must be 1 or 2"));
            }
            let (wl, wline) = lines.next().ok_or_else(|| Error::config(ln + 2, 1, "missing window line"))?;
            let wt = tokens(wline);
            if wt.first().map(|t| t.0) != Some("window") || wt.len() != 1 + 2 * dim {
                return Err(Error::config(wl + 1, 1, format!("expected `window` followed by {} bounds", 2 * dim)));
            }
            let mut b = [0.0; 4];
            for (i, (t, c)) in wt[1..].iter().enumerate() {
                b[i] = number(t, wl + 1, *c)?;
            }
            let window = if dim == 1 { Window::interval(b[0], b[1]) } else { Window::rect([b[0], b[1]], [b[2], b[3]]) }
                .map_err(|e| Error::config(wl + 1, 1, e.to_string()))?;
            let weighted = kind != "configuration";
            let want = dim + usize::from(weighted);
            let mut atoms = Vec::new();
            for (al, line) in lines {
                let t = tokens(line);
                if t.len() != want {
                    return Err(Error::config(al + 1, 1, format!("expected {want} numbers per atom, found {}", t.len())));
                }
                let mut c = [0.0; 2];
                for i in 0..dim {
                    c[i] = number(t[i].0, al + 1, t[i].1)?;
                }
                let w = if weighted { Some(number(t[dim].0, al + 1, t[dim].1)?) } else { None };
                atoms.push((Point(c), w));
            }
            Ok((window, atoms))
        }
        [(k, c), ..] => Err(Error::config(ln + 1, *c, format!("expected header `{kind} <dim>`, found {k:?}"))),
        [] => Err(Error::config(ln + 1, 1, "empty header")),
    }
}

fn tokens(line: &str) -> Vec<(&str, usize)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices().chain(std::iter::once((line.len(), ' '))) {
        match (ch.is_whitespace(), start) {
            (false, None) => start = Some(i),
            (true, Some(s)) => {
                out.push((&line[s..i], s + 1));
                start = None;
            }
            _ => {}
        }
    }
    out
}

fn write_json(kind: &str, window: &Window, atoms: impl Iterator<Item = (Point, Option<f64>)>) -> Value {
    let d = window.dim;
    let bounds: Vec<Value> = (0..d).map(|i| json!([window.lo[i], window.hi[i]])).collect();
    let atoms: Vec<Value> = atoms
        .map(|(p, w)| {
            let mut a: Vec<f64> = p.0[..d].to_vec();
            a.extend(w);
            json!(a)
        })
        .collect();
    json!({ "kind": kind, "dim": d, "window": bounds, "atoms": atoms })
}

fn read_json(v: &Value, kind: &str) -> Result<RawAtoms> {
    let bad = |m: &str| Error::invalid(format!("{kind} JSON: {m}"));
    if v.get("kind").and_then(Value::as_str) != Some(kind) {
        return Err(bad("wrong or missing kind"));
    }
    let dim = v.get("dim").and_then(Value::as_u64).ok_or_else(|| bad("missing dim"))? as usize;
    let nums = |x: &Value| -> Option<Vec<f64>> { x.as_array()?.iter().map(Value::as_f64).collect() };
    let bounds: Vec<Vec<f64>> = v
        .get("window")
        .and_then(Value::as_array)
        .and_then(|a| a.iter().map(nums).collect())
        .ok_or_else(|| bad("bad window"))?;
    let window = match (dim, bounds.as_slice()) {
        (1, [x]) if x.len() == 2 => Window::interval(x[0], x[1])?,
        (2, [x, y]) if x.len() == 2 && y.len() == 2 => Window::rect([x[0], x[1]], [y[0], y[1]])?,
        _ => return Err(bad("window does not match dim")),
    };
    let weighted = kind != "configuration";
    let mut atoms = Vec::new();
    for a in v.get("atoms").and_then(Value::as_array).ok_or_else(|| bad("missing atoms"))? {
        let a = nums(a).ok_or_else(|| bad("atom is not a number array"))?;
        if a.len() != dim + usize::from(weighted) {
            return Err(bad("atom has the wrong length"));
        }
        let mut c = [0.0; 2];
        c[..dim].copy_from_slice(&a[..dim]);
        atoms.push((Point(c), weighted.then(|| a[dim])));
    }
    Ok((window, atoms))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit() -> Window {
        Window::interval(0.0, 1.0).unwrap()
    }

    fn gamma(xs: &[f64]) -> Configuration {
        Configuration::new(unit(), xs.iter().map(|&x| Point::d1(x)).collect()).unwrap()
    }

    #[test]
    fn pairings() {
        let id = TestFunction::poly([0.0, 1.0]);
        assert_eq!(Configuration::empty(unit()).pairing(&id), 0.0);
        assert!((gamma(&[0.2, 0.7]).pairing(&id) - 0.9).abs() < 1e-15);
        let w = DiscreteMeasure::new(unit(), vec![(Point::d1(0.5), 2.0), (Point::d1(0.8), -1.0)]).unwrap();
        assert!((w.pairing(&id) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn power_sums_agree() {
        let f = TestFunction::poly([0.0, 2.0]);
        assert_eq!(gamma(&[0.5]).power_sum(&f, 3), 1.0);
        let g = gamma(&[0.1, 0.35, 0.9]);
        let sums = g.power_sums(&f, 4);
        for k in 1..=4 {
            assert!((sums[k - 1] - g.power_sum(&f, k as u32)).abs() < 1e-14);
        }
        assert_eq!(g.power_sum(&f, 1), g.pairing(&f));
        let x = Point::d1(0.6);
        let added = g.add_atom(x).unwrap();
        assert!((added.power_sum(&f, 3) - g.power_sum(&f, 3) - 1.2f64.powi(3)).abs() < 1e-14);
    }

    #[test]
    fn surgery() {
        let g = gamma(&[0.1, 0.5]);
        let x = Point::d1(0.3);
        assert_eq!(g.add_atom(x).unwrap().remove_atom(&x).unwrap(), g);
        assert_eq!(g.add_atom(Point::d1(0.5)), Err(Error::AtomClash));
        assert_eq!(Configuration::empty(unit()).remove_atom(&x), Err(Error::AtomMissing));
        let added = g.add_atom(x).unwrap();
        let pts: Vec<f64> = added.points().map(|p| p.x()).collect();
        assert_eq!(pts, vec![0.1, 0.3, 0.5]);
        assert!(g.add_atom(Point::d1(1.5)).is_err());
    }

    #[test]
    fn weighted_removal_deletes_atom() {
        let w = DiscreteMeasure::new(unit(), vec![(Point::d1(0.5), 2.5)]).unwrap();
        let (rest, s) = w.take_atom(&Point::d1(0.5)).unwrap();
        assert_eq!(s, 2.5);
        assert!(rest.is_empty());
    }

    #[test]
    fn counting() {
        let g = gamma(&[0.1, 0.3, 0.6, 0.9]);
        assert_eq!(g.count_in_region(&unit()), 4);
        assert_eq!(Configuration::empty(unit()).count_in_region(&unit()), 0);
        let b1 = Window::interval(0.0, 0.4).unwrap();
        let b2 = Window::interval(0.5, 1.0).unwrap();
        assert_eq!(g.count_in_region(&b1) + g.count_in_region(&b2), 4);
    }

    #[test]
    fn sigma_map_examples() {
        let m = MarkedConfiguration::new(unit(), vec![(2.0, Point::d1(0.3)), (-1.0, Point::d1(0.8))]).unwrap();
        let w = m.sigma_map();
        assert_eq!(w.atoms(), &[(Point::d1(0.3), 2.0), (Point::d1(0.8), -1.0)]);
        assert_eq!(w.sigma_inverse(), m);
        let e = MarkedConfiguration::empty(unit());
        assert!(e.sigma_map().is_empty());
        assert_eq!(DiscreteMeasure::zero(unit()).sigma_inverse(), e);
    }

    #[test]
    fn text_format_header_errors() {
        let err = Configuration::from_text("configuration 1\nwindow 0 1\n0.5 0.2\n").unwrap_err();
        assert!(matches!(err, Error::Config { line: 3, .. }));
        let err = Configuration::from_text("marked 1\n").unwrap_err();
        assert!(matches!(err, Error::Config { line: 1, column: 1, .. }));
    }

    fn arb_marked() -> impl Strategy<Value = MarkedConfiguration> {
        (
            prop::bool::ANY,
            prop::collection::vec(((-5.0f64..5.0).prop_filter("nonzero", |s| *s != 0.0), 0.0f64..=1.0, 0.0f64..=2.0), 0..12),
        )
            .prop_filter_map("distinct", |(two_d, atoms)| {
                let w = if two_d { Window::rect([0.0, 1.0], [0.0, 2.0]).unwrap() } else { unit() };
                let atoms = atoms.into_iter().map(|(s, x, y)| (s, if two_d { Point::d2(x, y) } else { Point::d1(x) })).collect();
                MarkedConfiguration::new(w, atoms).ok()
            })
    }

    proptest! {
        #[test]
        fn sigma_roundtrip(m in arb_marked()) {
            prop_assert_eq!(m.sigma_map().sigma_inverse(), m.clone());
            let w = m.sigma_map();
            prop_assert_eq!(w.sigma_inverse().sigma_map(), w);
        }

        #[test]
        fn text_roundtrip(m in arb_marked()) {
            prop_assert_eq!(MarkedConfiguration::from_text(&m.to_text()).unwrap(), m.clone());
            let w = m.sigma_map();
            prop_assert_eq!(DiscreteMeasure::from_text(&w.to_text()).unwrap(), w.clone());
            let g = m.positions();
            prop_assert_eq!(Configuration::from_text(&g.to_text()).unwrap(), g);
        }

        #[test]
        fn json_roundtrip(m in arb_marked()) {
            let text = serde_json::to_string(&m.sigma_map().to_json()).unwrap();
            let back = DiscreteMeasure::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
            prop_assert_eq!(back, m.sigma_map());
            prop_assert_eq!(MarkedConfiguration::from_json(&m.to_json()).unwrap(), m.clone());
            let g = m.positions();
            prop_assert_eq!(Configuration::from_json(&g.to_json()).unwrap(), g);
        }

        #[test]
        fn surgery_keeps_complement(m in arb_marked(), s in 0.5f64..2.0) {
            let w = m.sigma_map();
            let x = if w.window().dim == 1 { Point::d1(0.123456789) } else { Point::d2(0.123456789, 1.1) };
            if let Ok(added) = w.add_atom(x, s) {
                let rest: Vec<_> = added.atoms().iter().copied().filter(|a| a.0 != x).collect();
                prop_assert_eq!(rest.as_slice(), w.atoms());
                prop_assert_eq!(added.remove_atom(&x).unwrap(), w);
            }
        }

        #[test]
        fn pairing_is_linear(m in arb_marked(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
            let w = m.sigma_map();
            let f = TestFunction::poly([0.5, -1.0, 2.0]);
            let g = TestFunction::bump(0.4, 0.3, 1.5);
            let lhs = w.pairing(&f.clone().scaled(a).plus(g.clone().scaled(b)));
            let rhs = a * w.pairing(&f) + b * w.pairing(&g);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
        }
    }
}
