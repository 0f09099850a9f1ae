//! Explicit PL1Ps in three views, the catalog of observed local features, and
//! the reduction / lift / terminal machinery.
//!
//! A PL1P decomposes into independent local features: free lines and points
//! with their pins. Every transformation here works feature by feature and
//! rebuilds the problem with fresh indices (points first, then pins in point
//! order, then free lines).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::signature::{coord, Signature, LEN};
use crate::symmetry::ViewPermutation;

/// Per-view visibility triple.
pub type Views = [bool; 3];

pub const ALL_VIEWS: Views = [true; 3];

fn count(v: &Views) -> usize {
    v.iter().filter(|&&b| b).count()
}

fn only(v: &Views) -> Option<u8> {
    (count(v) == 1).then(|| v.iter().position(|&b| b).unwrap() as u8)
}

fn missing(v: &Views) -> Option<u8> {
    (count(v) == 2).then(|| v.iter().position(|&b| !b).unwrap() as u8)
}

fn single(view: u8) -> Views {
    let mut v = [false; 3];
    v[view as usize] = true;
    v
}

fn all_but(view: u8) -> Views {
    let mut v = [true; 3];
    v[view as usize] = false;
    v
}

fn pair(a: u8, b: u8) -> Views {
    let mut v = [false; 3];
    v[a as usize] = true;
    v[b as usize] = true;
    v
}

fn third(a: u8, b: u8) -> u8 {
    3 - a - b
}

/// How a point and its pins are seen by the three views.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VisibilityPattern {
    pub point: Views,
    /// Sorted, so patterns compare equal up to pin relabeling.
    pub pins: Vec<Views>,
}

impl VisibilityPattern {
    pub fn new(point: Views, mut pins: Vec<Views>) -> Result<Self> {
        pins.sort();
        let pattern = VisibilityPattern { point, pins };
        pattern.check()?;
        Ok(pattern)
    }

    /// A view that sees two pins of a point must see the point.
    fn check(&self) -> Result<()> {
        for v in 0..3 {
            let seen = self.pins.iter().filter(|p| p[v]).count();
            if seen >= 2 && !self.point[v] {
                return Err(Error::InvalidProblem(format!(
                    "view {} sees {seen} pins but not their point",
                    v + 1
                )));
            }
        }
        Ok(())
    }

    fn permute(&self, g: &ViewPermutation) -> Self {
        let mut pins: Vec<Views> = self.pins.iter().map(|p| g.apply_views(*p)).collect();
        pins.sort();
        VisibilityPattern {
            point: g.apply_views(self.point),
            pins,
        }
    }
}

/// A local feature of a PL1P together with its per-view visibility.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LocalFeature {
    Point(VisibilityPattern),
    FreeLine(Views),
}

impl LocalFeature {
    pub fn point(point: Views, pins: Vec<Views>) -> Result<Self> {
        Ok(LocalFeature::Point(VisibilityPattern::new(point, pins)?))
    }

    pub fn permute(&self, g: &ViewPermutation) -> Self {
        match self {
            LocalFeature::Point(p) => LocalFeature::Point(p.permute(g)),
            LocalFeature::FreeLine(v) => LocalFeature::FreeLine(g.apply_views(*v)),
        }
    }

    pub fn dim3d(&self) -> i64 {
        match self {
            LocalFeature::Point(p) => 3 + 2 * p.pins.len() as i64,
            LocalFeature::FreeLine(_) => 4,
        }
    }

    /// Image coordinates: 2 per observed point, 2 per line seen without its
    /// point, 1 per pin seen together with its point.
    pub fn dim2d(&self) -> i64 {
        match self {
            LocalFeature::Point(p) => (0..3)
                .map(|v| {
                    let pins = p.pins.iter().filter(|l| l[v]).count() as i64;
                    if p.point[v] {
                        2 + pins
                    } else {
                        2 * pins
                    }
                })
                .sum(),
            LocalFeature::FreeLine(v) => 2 * count(v) as i64,
        }
    }
}

/// Observed local features that can occur in reduced (camera-)minimal PL1Ps.
///
/// View indices are `0..3`. The first ten families are the signature
/// coordinates; the last three carry dangling pins and only occur in
/// camera-minimal problems that are not minimal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CatalogKind {
    /// Point with `k = 3..=7` pins, everything seen in every view.
    Hedgehog(u8),
    /// Point with two pins, everything seen in every view.
    C20,
    /// Point with both pins in `point_view`; each other view sees one pin.
    C21 { point_view: u8 },
    /// Point and pin seen in every view.
    C10,
    /// Pin seen everywhere, point hidden in `hidden_view`.
    C11 { hidden_view: u8 },
    /// One view sees point and pin, one sees the point, one sees the pin.
    C12 { both: u8, point_only: u8, pin_only: u8 },
    /// Point seen only in `point_view`; the pin in the two other views.
    C13 { point_view: u8 },
    /// Point without pins seen in every view.
    C00,
    /// Point without pins hidden in `hidden_view`.
    C01 { hidden_view: u8 },
    /// Free line seen in every view.
    FreeLine,
    /// Point with two dangling pins: the point alone in `point_view`, each
    /// other view sees one pin.
    DanglingPair { point_view: u8 },
    /// Point with pins `A` and `B`: `point_view` sees the point and `A`, the
    /// third view sees `A`, and `B` is seen only in `dangling_view`.
    HalfDangling { point_view: u8, dangling_view: u8 },
    /// Point seen in two views, its pin only in `pin_view`.
    DanglingPin { pin_view: u8 },
}

/// `(both, point_only, pin_only)` for `c12a..c12f`. Consecutive entries
/// form the swap pairs and share their pin-only view.
const C12_VARIANTS: [(u8, u8, u8); 6] = [
    (0, 1, 2),
    (1, 0, 2),
    (0, 2, 1),
    (2, 0, 1),
    (1, 2, 0),
    (2, 1, 0),
];

impl CatalogKind {
    /// The kind counted by signature coordinate `idx`.
    pub fn of_coord(idx: usize) -> CatalogKind {
        use CatalogKind::*;
        match idx {
            0..=4 => Hedgehog(7 - idx as u8),
            coord::C20 => C20,
            6..=8 => C21 { point_view: (idx - coord::C21) as u8 },
            coord::C10 => C10,
            10..=12 => C11 { hidden_view: (idx - coord::C11) as u8 },
            13..=18 => {
                let (both, point_only, pin_only) = C12_VARIANTS[idx - coord::C12];
                C12 { both, point_only, pin_only }
            }
            19..=21 => C13 { point_view: (idx - coord::C13) as u8 },
            coord::C00 => C00,
            23..=25 => C01 { hidden_view: (idx - coord::C01) as u8 },
            coord::F => FreeLine,
            _ => panic!("signature coordinate out of range: {idx}"),
        }
    }

    /// Signature coordinate of a minimal-catalog kind.
    pub fn coord(&self) -> Option<usize> {
        use CatalogKind::*;
        Some(match *self {
            Hedgehog(k) => 7 - k as usize,
            C20 => coord::C20,
            C21 { point_view } => coord::C21 + point_view as usize,
            C10 => coord::C10,
            C11 { hidden_view } => coord::C11 + hidden_view as usize,
            C12 { both, point_only, pin_only } => {
                coord::C12
                    + C12_VARIANTS
                        .iter()
                        .position(|&v| v == (both, point_only, pin_only))
                        .expect("valid c12 variant")
            }
            C13 { point_view } => coord::C13 + point_view as usize,
            C00 => coord::C00,
            C01 { hidden_view } => coord::C01 + hidden_view as usize,
            FreeLine => coord::F,
            DanglingPair { .. } | HalfDangling { .. } | DanglingPin { .. } => return None,
        })
    }

    /// True for kinds that may occur in reduced minimal problems.
    pub fn is_minimal_kind(&self) -> bool {
        self.coord().is_some()
    }

    /// Canonical visibility pattern of this kind.
    pub fn pattern(&self) -> LocalFeature {
        use CatalogKind::*;
        let point = |pt: Views, pins: Vec<Views>| {
            LocalFeature::point(pt, pins).expect("catalog patterns are complete")
        };
        match *self {
            Hedgehog(k) => point(ALL_VIEWS, vec![ALL_VIEWS; k as usize]),
            C20 => point(ALL_VIEWS, vec![ALL_VIEWS; 2]),
            C21 { point_view: u } => {
                let (v, w) = others(u);
                point(single(u), vec![pair(u, v), pair(u, w)])
            }
            C10 => point(ALL_VIEWS, vec![ALL_VIEWS]),
            C11 { hidden_view } => point(all_but(hidden_view), vec![ALL_VIEWS]),
            C12 { both, point_only, pin_only } => {
                point(pair(both, point_only), vec![pair(both, pin_only)])
            }
            C13 { point_view } => point(single(point_view), vec![all_but(point_view)]),
            C00 => point(ALL_VIEWS, vec![]),
            C01 { hidden_view } => point(all_but(hidden_view), vec![]),
            FreeLine => LocalFeature::FreeLine(ALL_VIEWS),
            DanglingPair { point_view: u } => {
                let (v, w) = others(u);
                point(single(u), vec![single(v), single(w)])
            }
            HalfDangling { point_view: u, dangling_view: w } => {
                let v = third(u, w);
                point(single(u), vec![pair(u, v), single(w)])
            }
            DanglingPin { pin_view } => point(all_but(pin_view), vec![single(pin_view)]),
        }
    }

    /// Identifies the catalog kind of an observed local feature.
    pub fn classify(feature: &LocalFeature) -> Option<CatalogKind> {
        use CatalogKind::*;
        let p = match feature {
            LocalFeature::FreeLine(v) => return (*v == ALL_VIEWS).then_some(FreeLine),
            LocalFeature::Point(p) => p,
        };
        let pins = &p.pins;
        let full = p.point == ALL_VIEWS;
        match pins.len() {
            0 if full => Some(C00),
            0 => missing(&p.point).map(|h| C01 { hidden_view: h }),
            1 => {
                let l = pins[0];
                if full && l == ALL_VIEWS {
                    return Some(C10);
                }
                if l == ALL_VIEWS {
                    return missing(&p.point).map(|h| C11 { hidden_view: h });
                }
                if let Some(u) = only(&p.point) {
                    return (l == all_but(u)).then_some(C13 { point_view: u });
                }
                let hidden = missing(&p.point)?;
                if let Some(w) = only(&l) {
                    return (w == hidden).then_some(DanglingPin { pin_view: w });
                }
                let pin_hidden = missing(&l)?;
                // pin seen with the point in exactly one view, alone in the hidden one
                if pin_hidden == hidden {
                    return None;
                }
                Some(C12 {
                    both: third(hidden, pin_hidden),
                    point_only: pin_hidden,
                    pin_only: hidden,
                })
            }
            2 => {
                if full && pins.iter().all(|l| *l == ALL_VIEWS) {
                    return Some(C20);
                }
                let u = only(&p.point)?;
                let (v, w) = others(u);
                let mut got = pins.clone();
                got.sort();
                let candidates = [
                    C21 { point_view: u },
                    DanglingPair { point_view: u },
                    HalfDangling { point_view: u, dangling_view: v },
                    HalfDangling { point_view: u, dangling_view: w },
                ];
                candidates.into_iter().find(|k| match k.pattern() {
                    LocalFeature::Point(q) => q.point == p.point && q.pins == got,
                    _ => false,
                })
            }
            3..=7 => (full && pins.iter().all(|l| *l == ALL_VIEWS))
                .then_some(Hedgehog(pins.len() as u8)),
            _ => None,
        }
    }

    pub fn permute(&self, g: &ViewPermutation) -> CatalogKind {
        CatalogKind::classify(&self.pattern().permute(g))
            .expect("relabeling preserves catalog membership")
    }

    /// Every kind in the catalog, minimal kinds first.
    pub fn all() -> Vec<CatalogKind> {
        let mut kinds: Vec<CatalogKind> = (0..LEN).map(CatalogKind::of_coord).collect();
        for u in 0..3u8 {
            kinds.push(CatalogKind::DanglingPair { point_view: u });
            kinds.push(CatalogKind::DanglingPin { pin_view: u });
            for w in 0..3u8 {
                if w != u {
                    kinds.push(CatalogKind::HalfDangling { point_view: u, dangling_view: w });
                }
            }
        }
        kinds
    }
}

fn others(u: u8) -> (u8, u8) {
    match u {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    }
}

/// Observations of one view.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct ViewObservation {
    pub points: BTreeSet<usize>,
    pub lines: BTreeSet<usize>,
}

/// An explicit PL1P `(p, l, I, O)` in three views.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Problem {
    points: usize,
    /// Point incident to each line, if any.
    line_point: Vec<Option<usize>>,
    views: [ViewObservation; 3],
}

/// Which family of forgetting rules [`Problem::reduce`] applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReduceMode {
    /// Rules that preserve minimality and degree.
    Minimal,
    /// Additionally the rules that preserve only camera-minimality.
    CameraMinimal,
}

/// A single applied forgetting rule, recorded for dimension accounting.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionStep {
    pub rule: ReductionRule,
    pub before: LocalFeature,
    pub after: Vec<LocalFeature>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReductionRule {
    /// Line seen in no view.
    UnobservedLine,
    /// Point seen in no view, with at most one pin.
    UnobservedPoint,
    /// Point seen in no view, with two or more pins: dropped with its pins.
    UnobservedPointWithPins,
    /// Pin seen in exactly one view, which also sees the point.
    PinSingleView,
    /// Point without pins seen in at most one view.
    LonelyPoint,
    /// Free line seen in exactly one view.
    FreeLineSingleView,
    /// Point and pin each seen in one view, different views.
    SplitPointPin,
    /// Pin seen in exactly two views, both also seeing the point.
    PinDoubleView,
    /// Free line seen in exactly two views.
    FreeLineDoubleView,
    /// One-pin point: point+pin in one view, pin only in another, nothing in
    /// the third. Dropped with its pin.
    PointPinTwoViews,
    /// One-pin point: point+pin in one view, pin only in the other two. The
    /// point is dropped and the pin becomes a free line.
    PointPinThreeViews,
}

impl ReductionRule {
    /// True for the rules that preserve minimality.
    pub fn preserves_minimality(&self) -> bool {
        matches!(
            self,
            ReductionRule::PinDoubleView
                | ReductionRule::FreeLineDoubleView
                | ReductionRule::PointPinTwoViews
                | ReductionRule::PointPinThreeViews
        )
    }
}

fn reduce_step(feature: &LocalFeature, mode: ReduceMode) -> Option<(ReductionRule, Vec<LocalFeature>)> {
    use ReductionRule::*;
    let camera = mode == ReduceMode::CameraMinimal;
    match feature {
        LocalFeature::FreeLine(v) => {
            let n = count(v);
            if camera && n == 0 {
                Some((UnobservedLine, vec![]))
            } else if camera && n == 1 {
                Some((FreeLineSingleView, vec![]))
            } else if n == 2 {
                Some((FreeLineDoubleView, vec![]))
            } else {
                None
            }
        }
        LocalFeature::Point(p) => {
            let pt = p.point;
            let rebuild = |pins: Vec<Views>| {
                LocalFeature::point(pt, pins).expect("removing pins keeps completeness")
            };
            let without = |i: usize| {
                let mut pins = p.pins.clone();
                pins.remove(i);
                rebuild(pins)
            };
            if camera {
                if count(&pt) == 0 {
                    return Some(match p.pins.len() {
                        0 => (UnobservedPoint, vec![]),
                        1 => (UnobservedPoint, vec![LocalFeature::FreeLine(p.pins[0])]),
                        _ => (UnobservedPointWithPins, vec![]),
                    });
                }
                if let Some(i) = p.pins.iter().position(|l| count(l) == 0) {
                    return Some((UnobservedLine, vec![without(i)]));
                }
                if let Some(i) = p
                    .pins
                    .iter()
                    .position(|l| count(l) == 1 && (0..3).all(|v| !l[v] || pt[v]))
                {
                    return Some((PinSingleView, vec![without(i)]));
                }
                if p.pins.is_empty() && count(&pt) <= 1 {
                    return Some((LonelyPoint, vec![]));
                }
                if p.pins.len() == 1 {
                    let l = p.pins[0];
                    if count(&pt) == 1 && count(&l) == 1 && pt != l {
                        return Some((SplitPointPin, vec![]));
                    }
                }
            }
            if let Some(i) = p
                .pins
                .iter()
                .position(|l| count(l) == 2 && (0..3).all(|v| !l[v] || pt[v]))
            {
                return Some((PinDoubleView, vec![without(i)]));
            }
            if p.pins.len() == 1 {
                let l = p.pins[0];
                if let Some(u) = only(&pt) {
                    if l[u as usize] && count(&l) == 2 {
                        return Some((PointPinTwoViews, vec![]));
                    }
                    if l == ALL_VIEWS {
                        return Some((PointPinThreeViews, vec![LocalFeature::FreeLine(l)]));
                    }
                }
            }
            None
        }
    }
}

impl Problem {
    /// Builds a problem from `(point, line)` incidences and per-view
    /// observations, validating the PL1P and completeness conditions.
    pub fn new(
        points: usize,
        lines: usize,
        incidences: &BTreeSet<(usize, usize)>,
        views: [ViewObservation; 3],
    ) -> Result<Self> {
        let mut line_point = vec![None; lines];
        for &(i, j) in incidences {
            if i >= points || j >= lines {
                return Err(Error::InvalidProblem(format!("incidence ({i},{j}) out of range")));
            }
            if line_point[j].replace(i).is_some() {
                return Err(Error::InvalidProblem(format!(
                    "line {j} is incident to more than one point"
                )));
            }
        }
        for (v, obs) in views.iter().enumerate() {
            if obs.points.iter().any(|&i| i >= points) || obs.lines.iter().any(|&j| j >= lines) {
                return Err(Error::InvalidProblem(format!("view {} index out of range", v + 1)));
            }
        }
        let problem = Problem { points, line_point, views };
        for f in problem.features() {
            if let LocalFeature::Point(p) = f {
                p.check()?;
            }
        }
        Ok(problem)
    }

    pub fn empty() -> Self {
        Problem {
            points: 0,
            line_point: vec![],
            views: Default::default(),
        }
    }

    pub fn num_points(&self) -> usize {
        self.points
    }

    pub fn num_lines(&self) -> usize {
        self.line_point.len()
    }

    pub fn incidences(&self) -> BTreeSet<(usize, usize)> {
        self.line_point
            .iter()
            .enumerate()
            .filter_map(|(j, p)| p.map(|i| (i, j)))
            .collect()
    }

    pub fn view(&self, v: usize) -> &ViewObservation {
        &self.views[v]
    }

    /// Point carried by line `j`, if it is a pin.
    pub fn line_point(&self, j: usize) -> Option<usize> {
        self.line_point[j]
    }

    pub fn point_seen(&self, i: usize) -> Views {
        [0, 1, 2].map(|v| self.views[v].points.contains(&i))
    }

    pub fn line_seen(&self, j: usize) -> Views {
        [0, 1, 2].map(|v| self.views[v].lines.contains(&j))
    }

    /// Pins of point `i`, ascending.
    pub fn pins_of(&self, i: usize) -> Vec<usize> {
        (0..self.num_lines())
            .filter(|&j| self.line_point[j] == Some(i))
            .collect()
    }

    /// Local features: points in index order, then free lines.
    pub fn features(&self) -> Vec<LocalFeature> {
        let mut out = Vec::new();
        for i in 0..self.points {
            let mut pins: Vec<Views> = self.pins_of(i).into_iter().map(|j| self.line_seen(j)).collect();
            pins.sort();
            out.push(LocalFeature::Point(VisibilityPattern { point: self.point_seen(i), pins }));
        }
        for j in 0..self.num_lines() {
            if self.line_point[j].is_none() {
                out.push(LocalFeature::FreeLine(self.line_seen(j)));
            }
        }
        out
    }

    /// Rebuilds a problem from local features with fresh indices.
    pub fn from_features(features: &[LocalFeature]) -> Problem {
        let mut problem = Problem::empty();
        let mut free = Vec::new();
        for f in features {
            match f {
                LocalFeature::Point(p) => {
                    let i = problem.points;
                    problem.points += 1;
                    for v in 0..3 {
                        if p.point[v] {
                            problem.views[v].points.insert(i);
                        }
                    }
                    for pin in &p.pins {
                        let j = problem.line_point.len();
                        problem.line_point.push(Some(i));
                        for v in 0..3 {
                            if pin[v] {
                                problem.views[v].lines.insert(j);
                            }
                        }
                    }
                }
                LocalFeature::FreeLine(seen) => free.push(*seen),
            }
        }
        for seen in free {
            let j = problem.line_point.len();
            problem.line_point.push(None);
            for v in 0..3 {
                if seen[v] {
                    problem.views[v].lines.insert(j);
                }
            }
        }
        problem
    }

    /// Instantiates one feature per signature count.
    pub fn expand(sig: &Signature) -> Problem {
        let mut features = Vec::new();
        for (idx, &c) in sig.counts().iter().enumerate() {
            let pattern = CatalogKind::of_coord(idx).pattern();
            features.extend(std::iter::repeat_n(pattern, c as usize));
        }
        Problem::from_features(&features)
    }

    pub fn dim3d(&self) -> i64 {
        self.features().iter().map(LocalFeature::dim3d).sum()
    }

    pub fn dim2d(&self) -> i64 {
        self.features().iter().map(LocalFeature::dim2d).sum()
    }

    /// `dim2d - dim3d - 11`; zero for balanced problems.
    pub fn balance_deficit(&self) -> i64 {
        self.dim2d() - self.dim3d() - crate::signature::CAMERA_DIM
    }

    /// Counts of catalog kinds, or the first feature outside the catalog.
    pub fn kind_counts(&self) -> Result<BTreeMap<CatalogKind, u64>> {
        let mut counts = BTreeMap::new();
        for f in self.features() {
            let kind = CatalogKind::classify(&f).ok_or_else(|| Error::UnknownKind(format!("{f:?}")))?;
            *counts.entry(kind).or_insert(0) += 1;
        }
        Ok(counts)
    }

    /// Signature of a problem built only from minimal-catalog kinds.
    pub fn signature(&self) -> Result<Signature> {
        let mut sig = Signature::zero();
        for (kind, c) in self.kind_counts()? {
            let idx = kind
                .coord()
                .ok_or_else(|| Error::UnknownKind(format!("{kind:?} has no signature coordinate")))?;
            sig.0[idx] += c;
        }
        Ok(sig)
    }

    pub fn relabel(&self, g: &ViewPermutation) -> Problem {
        let mut views: [ViewObservation; 3] = Default::default();
        for v in 0..3 {
            views[g.image(v as u8) as usize] = self.views[v].clone();
        }
        Problem {
            points: self.points,
            line_point: self.line_point.clone(),
            views,
        }
    }

    /// Applies forgetting rules until none applies, recording each step.
    pub fn reduce_traced(&self, mode: ReduceMode) -> (Problem, Vec<ReductionStep>) {
        let mut features = self.features();
        let mut trace = Vec::new();
        let mut changed = true;
        while changed {
            changed = false;
            let mut next = Vec::with_capacity(features.len());
            for f in features {
                match reduce_step(&f, mode) {
                    Some((rule, after)) => {
                        changed = true;
                        next.extend(after.iter().cloned());
                        trace.push(ReductionStep { rule, before: f, after });
                    }
                    None => next.push(f),
                }
            }
            features = next;
        }
        (Problem::from_features(&features), trace)
    }

    pub fn reduce(&self, mode: ReduceMode) -> Problem {
        self.reduce_traced(mode).0
    }

    pub fn is_reduced(&self, mode: ReduceMode) -> bool {
        self.features().iter().all(|f| reduce_step(f, mode).is_none())
    }

    /// Gives every dangling pin a second image so that it becomes
    /// reconstructible. A point seen in two views with a dangling pin gets the
    /// pin added to its lower-indexed point view.
    pub fn lift_to_minimal(&self) -> Result<Problem> {
        let mut out = Vec::new();
        for f in self.features() {
            let kind = CatalogKind::classify(&f).ok_or_else(|| Error::UnknownKind(format!("{f:?}")))?;
            let lifted = match kind {
                CatalogKind::DanglingPair { point_view } | CatalogKind::HalfDangling { point_view, .. } => {
                    CatalogKind::C21 { point_view }
                }
                CatalogKind::DanglingPin { pin_view } => {
                    let (a, b) = others(pin_view);
                    CatalogKind::C12 { both: a, point_only: b, pin_only: pin_view }
                }
                other => other,
            };
            out.push(lifted.pattern());
        }
        Ok(Problem::from_features(&out))
    }

    /// True if no feature is seen as a half-dangling two-pin point, a `c21`
    /// point or a `c12` point.
    pub fn is_terminal(&self) -> bool {
        self.features().iter().all(|f| {
            !matches!(
                CatalogKind::classify(f),
                Some(CatalogKind::HalfDangling { .. } | CatalogKind::C21 { .. } | CatalogKind::C12 { .. })
            )
        })
    }

    /// Removes pin images until the problem is terminal, keeping its
    /// camera-degree.
    pub fn terminalize(&self) -> Problem {
        let out: Vec<LocalFeature> = self
            .features()
            .into_iter()
            .map(|f| match CatalogKind::classify(&f) {
                Some(CatalogKind::C21 { point_view } | CatalogKind::HalfDangling { point_view, .. }) => {
                    CatalogKind::DanglingPair { point_view }.pattern()
                }
                Some(CatalogKind::C12 { pin_only, .. }) => CatalogKind::DanglingPin { pin_view: pin_only }.pattern(),
                _ => f,
            })
            .collect();
        Problem::from_features(&out)
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "points {}", self.points)?;
        writeln!(f, "lines {}", self.num_lines())?;
        let inc: Vec<String> = self.incidences().iter().map(|(i, j)| format!("{i}:{j}")).collect();
        writeln!(f, "incidences {}", inc.join(" "))?;
        for v in 0..3 {
            let join = |s: &BTreeSet<usize>| s.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
            writeln!(
                f,
                "view{} points={} lines={}",
                v + 1,
                join(&self.views[v].points),
                join(&self.views[v].lines)
            )?;
        }
        Ok(())
    }
}

impl FromStr for Problem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |msg: &str| Error::Parse(format!("problem text: {msg}"));
        let mut points = None;
        let mut lines = None;
        let mut incidences = BTreeSet::new();
        let mut views: [ViewObservation; 3] = Default::default();
        let parse_set = |text: &str| -> Result<BTreeSet<usize>> {
            text.split(',')
                .filter(|t| !t.is_empty())
                .map(|t| t.parse().map_err(|_| bad("bad index")))
                .collect()
        };
        for line in s.lines().map(str::trim).filter(|l| !l.is_empty()) {
            let (key, rest) = line.split_once(' ').unwrap_or((line, ""));
            match key {
                "points" => points = Some(rest.trim().parse().map_err(|_| bad("bad point count"))?),
                "lines" => lines = Some(rest.trim().parse().map_err(|_| bad("bad line count"))?),
                "incidences" => {
                    for tok in rest.split_whitespace() {
                        let (i, j) = tok.split_once(':').ok_or_else(|| bad("bad incidence"))?;
                        incidences.insert((
                            i.parse().map_err(|_| bad("bad incidence"))?,
                            j.parse().map_err(|_| bad("bad incidence"))?,
                        ));
                    }
                }
                "view1" | "view2" | "view3" => {
                    let v = key[4..].parse::<usize>().unwrap() - 1;
                    for tok in rest.split_whitespace() {
                        match tok.split_once('=') {
                            Some(("points", list)) => views[v].points = parse_set(list)?,
                            Some(("lines", list)) => views[v].lines = parse_set(list)?,
                            _ => return Err(bad("bad view entry")),
                        }
                    }
                }
                _ => return Err(bad(&format!("unknown key `{key}`"))),
            }
        }
        Problem::new(
            points.ok_or_else(|| bad("missing points"))?,
            lines.ok_or_else(|| bad("missing lines"))?,
            &incidences,
            views,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig(entries: &[(&str, u64)]) -> Signature {
        Signature::from_named(entries).unwrap()
    }

    #[test]
    fn catalog_patterns_reproduce_table_dimensions() {
        for idx in 0..LEN {
            let kind = CatalogKind::of_coord(idx);
            let pattern = kind.pattern();
            assert_eq!(pattern.dim3d(), crate::signature::WEIGHTS_3D[idx], "{kind:?}");
            assert_eq!(pattern.dim2d(), crate::signature::WEIGHTS_2D[idx], "{kind:?}");
            assert_eq!(CatalogKind::classify(&pattern), Some(kind));
            assert_eq!(kind.coord(), Some(idx));
        }
    }

    #[test]
    fn every_catalog_kind_classifies_back() {
        let all = CatalogKind::all();
        assert_eq!(all.len(), 27 + 12);
        for kind in all {
            assert_eq!(CatalogKind::classify(&kind.pattern()), Some(kind));
            for g in ViewPermutation::ALL {
                assert!(CatalogKind::classify(&kind.pattern().permute(&g)).is_some());
            }
        }
    }

    #[test]
    fn catalog_kinds_are_reduced_in_camera_mode() {
        for kind in CatalogKind::all() {
            let p = Problem::from_features(&[kind.pattern()]);
            assert!(p.is_reduced(ReduceMode::CameraMinimal), "{kind:?}");
        }
    }

    #[test]
    fn incomplete_two_pin_point_is_rejected() {
        // view 1 sees both pins but not the point
        assert!(LocalFeature::point([false, true, true], vec![[true, true, false], [true, false, true]]).is_err());
        let mut views: [ViewObservation; 3] = Default::default();
        views[0].lines = [0, 1].into_iter().collect();
        views[1].points.insert(0);
        let inc = [(0, 0), (0, 1)].into_iter().collect();
        assert!(Problem::new(1, 2, &inc, views).is_err());
    }

    #[test]
    fn expand_examples() {
        let empty = Problem::expand(&Signature::zero());
        assert_eq!((empty.num_points(), empty.num_lines()), (0, 0));
        let p = Problem::expand(&sig(&[("c00", 3), ("f", 1)]));
        assert_eq!((p.num_points(), p.num_lines()), (3, 1));
        assert!(p.incidences().is_empty());
        for v in 0..3 {
            assert_eq!(p.view(v).points.len(), 3);
            assert_eq!(p.view(v).lines.len(), 1);
        }
        let h = Problem::expand(&sig(&[("c7", 1)]));
        assert_eq!((h.num_points(), h.num_lines()), (1, 7));
        assert_eq!(h.incidences(), (0..7).map(|j| (0, j)).collect());
        assert!((0..3).all(|v| h.view(v).lines.len() == 7 && h.view(v).points.len() == 1));
    }

    #[test]
    fn reduce_examples() {
        let reduced = Problem::expand(&sig(&[("c10", 1), ("c01b", 2), ("f", 1)]));
        assert_eq!(reduced.reduce(ReduceMode::Minimal), reduced);
        // pin seen in views 1 and 2, both seeing the point
        let f = LocalFeature::point(ALL_VIEWS, vec![[true, true, false]]).unwrap();
        let out = Problem::from_features(&[f]).reduce(ReduceMode::Minimal);
        assert_eq!(out, Problem::expand(&sig(&[("c00", 1)])));
        let line = Problem::from_features(&[LocalFeature::FreeLine([false, true, false])]);
        assert_eq!(line.reduce(ReduceMode::CameraMinimal), Problem::empty());
        assert_eq!(line.reduce(ReduceMode::Minimal), line);
    }

    #[test]
    fn one_pin_rows_reduce_as_expected() {
        // point+pin in view 1, pin alone in views 2 and 3: the pin survives as a free line
        let f = LocalFeature::point([true, false, false], vec![ALL_VIEWS]).unwrap();
        let (out, trace) = Problem::from_features(&[f]).reduce_traced(ReduceMode::Minimal);
        assert_eq!(out, Problem::expand(&sig(&[("f", 1)])));
        assert_eq!(trace[0].rule, ReductionRule::PointPinThreeViews);
        // point+pin in view 1, pin alone in view 2: everything goes
        let f = LocalFeature::point([true, false, false], vec![[true, true, false]]).unwrap();
        assert_eq!(Problem::from_features(&[f]).reduce(ReduceMode::Minimal), Problem::empty());
    }

    #[test]
    fn lift_examples() {
        let plain = Problem::expand(&sig(&[("c00", 3), ("f", 1)]));
        assert_eq!(plain.lift_to_minimal().unwrap(), plain);
        let dangling = Problem::from_features(&[CatalogKind::DanglingPin { pin_view: 2 }.pattern()]);
        let lifted = dangling.lift_to_minimal().unwrap();
        assert!(matches!(
            CatalogKind::classify(&lifted.features()[0]),
            Some(CatalogKind::C12 { both: 0, point_only: 1, pin_only: 2 })
        ));
        assert!(!lifted.is_terminal());
        let pair = Problem::from_features(&[CatalogKind::DanglingPair { point_view: 1 }.pattern()]);
        assert_eq!(
            pair.lift_to_minimal().unwrap().signature().unwrap(),
            sig(&[("c21b", 1)])
        );
        let half = Problem::from_features(&[CatalogKind::HalfDangling { point_view: 0, dangling_view: 2 }.pattern()]);
        assert_eq!(half.lift_to_minimal().unwrap().signature().unwrap(), sig(&[("c21a", 1)]));
        let weird = Problem::from_features(&[LocalFeature::FreeLine([true, false, false])]);
        assert!(weird.lift_to_minimal().is_err());
    }

    #[test]
    fn terminal_examples() {
        assert!(Problem::empty().is_terminal());
        let c12 = Problem::expand(&sig(&[("c12a", 1)]));
        assert!(!c12.is_terminal());
        let t = c12.terminalize();
        assert!(t.is_terminal());
        assert_eq!(
            CatalogKind::classify(&t.features()[0]),
            Some(CatalogKind::DanglingPin { pin_view: 2 })
        );
        assert_eq!(Problem::expand(&sig(&[("c12b", 1)])).terminalize(), t);
        let terminal = Problem::expand(&sig(&[("c00", 2), ("c01a", 3), ("f", 1)]));
        assert_eq!(terminal.terminalize(), terminal);
    }

    #[test]
    fn problem_text_round_trips() {
        let p = Problem::expand(&sig(&[("c21a", 1), ("c12d", 1), ("c13b", 1), ("c01c", 2), ("f", 1)]));
        let text = p.to_string();
        assert_eq!(text.parse::<Problem>().unwrap(), p);
        assert!("points 1\nlines x".parse::<Problem>().is_err());
    }
}
