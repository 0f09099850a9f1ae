//! Named subfamilies: PL0Ps, problems with at most one pin per point, and
//! extensions of the two-view five-point problem, some of which are camera
//! registration problems.
//!
//! Which problems count as five-point extensions or registrations is decided
//! by an [`ExtensionCriterion`], so alternative readings can be swapped in
//! and compared against reference counts.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::{LocalFeature, Problem, Views};
use crate::signature::{coord, Signature};
use crate::symmetry::{canonical_form, ClassMode};

/// Unordered view pair `{v, w}` with `v < w`, views `0..3`.
pub type ViewPair = (u8, u8);

pub const VIEW_PAIRS: [ViewPair; 3] = [(0, 1), (0, 2), (1, 2)];

fn third(pair: ViewPair) -> u8 {
    3 - pair.0 - pair.1
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SubfamilyTag {
    Pl0p,
    OnePin,
    FivePointExtension { pair: ViewPair },
    Registration { pair: ViewPair, registered: u8 },
}

impl fmt::Display for SubfamilyTag {
    /// Views are written 1-based.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            SubfamilyTag::Pl0p => f.write_str("pl0p"),
            SubfamilyTag::OnePin => f.write_str("onepin"),
            SubfamilyTag::FivePointExtension { pair } => write!(f, "fivepoint:{}{}", pair.0 + 1, pair.1 + 1),
            SubfamilyTag::Registration { pair, registered } => {
                write!(f, "registration:{}{}:{}", pair.0 + 1, pair.1 + 1, registered + 1)
            }
        }
    }
}

impl FromStr for SubfamilyTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("bad subfamily tag `{s}`"));
        let view = |c: u8| -> Result<u8> {
            match c {
                b'1'..=b'3' => Ok(c - b'1'),
                _ => Err(bad()),
            }
        };
        let pair = |p: &str| -> Result<ViewPair> {
            let b = p.as_bytes();
            if b.len() != 2 {
                return Err(bad());
            }
            let (v, w) = (view(b[0])?, view(b[1])?);
            if v < w {
                Ok((v, w))
            } else {
                Err(bad())
            }
        };
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            ["pl0p"] => Ok(SubfamilyTag::Pl0p),
            ["onepin"] => Ok(SubfamilyTag::OnePin),
            ["fivepoint", p] => Ok(SubfamilyTag::FivePointExtension { pair: pair(p)? }),
            ["registration", p, r] if r.len() == 1 => {
                let pair = pair(p)?;
                let registered = view(r.as_bytes()[0])?;
                if registered != third(pair) {
                    return Err(bad());
                }
                Ok(SubfamilyTag::Registration { pair, registered })
            }
            _ => Err(bad()),
        }
    }
}

/// True if no point carries a pin.
pub fn is_pl0p(sig: &Signature) -> bool {
    sig.is_pl0p()
}

/// True if every point of the terminal form carries at most one pin: no
/// points with three or more pins, no `c20`, no `c21`.
pub fn is_one_pin(sig: &Signature) -> bool {
    sig.counts()[..coord::C10].iter().all(|&c| c == 0)
}

/// Minimal representatives without pins.
pub fn filter_pl0p<'a>(minimal: impl IntoIterator<Item = &'a Signature>) -> Vec<Signature> {
    minimal.into_iter().filter(|s| is_pl0p(s)).copied().collect()
}

/// Swap&label minimal representatives whose terminal form has at most one
/// pin per point.
pub fn filter_one_pin<'a>(minimal_swap_label: impl IntoIterator<Item = &'a Signature>) -> Vec<Signature> {
    minimal_swap_label.into_iter().filter(|s| is_one_pin(s)).copied().collect()
}

/// Membership rules for five-point extensions and registrations.
pub trait ExtensionCriterion: Sync {
    fn name(&self) -> &'static str;

    /// Does `pair` carry a five-point subproblem?
    fn is_five_point_pair(&self, prob: &Problem, pair: ViewPair) -> bool;

    /// First view pair, in [`VIEW_PAIRS`] order, that carries a five-point
    /// subproblem.
    fn five_point_pair(&self, prob: &Problem) -> Option<ViewPair> {
        VIEW_PAIRS.into_iter().find(|&pair| self.is_five_point_pair(prob, pair))
    }

    /// The third view, if it can be registered against the structure the
    /// pair reconstructs.
    fn registered_view(&self, prob: &Problem, pair: ViewPair) -> Option<u8>;
}

/// The default rules.
///
/// * Five-point extension: some pair of views sees at least five common
///   points (in a minimal problem, exactly five).
/// * Registration: given the pair's relative pose, every feature seen by the
///   third view is known in space, or is a point on a known pin. A point is
///   known if the pair sees it twice, or sees it once and one of its pins
///   twice; a line is known if the pair sees it twice.
#[derive(Clone, Copy, Debug, Default)]
pub struct CommonPoints;

fn both(v: &Views, pair: ViewPair) -> bool {
    v[pair.0 as usize] && v[pair.1 as usize]
}

fn either(v: &Views, pair: ViewPair) -> bool {
    v[pair.0 as usize] || v[pair.1 as usize]
}

pub fn common_points(prob: &Problem, pair: ViewPair) -> usize {
    prob.view(pair.0 as usize)
        .points
        .intersection(&prob.view(pair.1 as usize).points)
        .count()
}

impl ExtensionCriterion for CommonPoints {
    fn name(&self) -> &'static str {
        "common-points"
    }

    fn is_five_point_pair(&self, prob: &Problem, pair: ViewPair) -> bool {
        common_points(prob, pair) >= 5
    }

    fn registered_view(&self, prob: &Problem, pair: ViewPair) -> Option<u8> {
        let u = third(pair) as usize;
        let ok = prob.features().iter().all(|f| match f {
            LocalFeature::FreeLine(seen) => !seen[u] || both(seen, pair),
            LocalFeature::Point(p) => {
                let known_pin = p.pins.iter().any(|l| both(l, pair));
                let known_point = both(&p.point, pair) || (either(&p.point, pair) && known_pin);
                let point_ok = !p.point[u] || known_point || known_pin;
                point_ok && p.pins.iter().all(|l| !l[u] || both(l, pair))
            }
        });
        ok.then_some(u as u8)
    }
}

pub fn detect_five_point_extension(prob: &Problem, criterion: &dyn ExtensionCriterion) -> Option<ViewPair> {
    criterion.five_point_pair(prob)
}

/// Registration of the third view against some five-point pair.
pub fn detect_registration(prob: &Problem, criterion: &dyn ExtensionCriterion) -> Option<(ViewPair, u8)> {
    VIEW_PAIRS
        .into_iter()
        .filter(|&pair| criterion.is_five_point_pair(prob, pair))
        .find_map(|pair| criterion.registered_view(prob, pair).map(|u| (pair, u)))
}

/// All tags of a minimal label representative.
pub fn tags(sig: &Signature, criterion: &dyn ExtensionCriterion) -> Vec<SubfamilyTag> {
    let prob = Problem::expand(sig);
    let mut out = Vec::new();
    if is_pl0p(sig) {
        out.push(SubfamilyTag::Pl0p);
    }
    if is_one_pin(sig) {
        out.push(SubfamilyTag::OnePin);
    }
    if let Some(pair) = detect_five_point_extension(&prob, criterion) {
        out.push(SubfamilyTag::FivePointExtension { pair });
    }
    if let Some((pair, registered)) = detect_registration(&prob, criterion) {
        out.push(SubfamilyTag::Registration { pair, registered });
    }
    out
}

/// Detected members versus a reference, both compared as label classes.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Reconciliation {
    pub detected: usize,
    pub expected: usize,
    /// Detected but absent from the reference list.
    pub extra: Vec<Signature>,
    /// In the reference list but not detected.
    pub missing: Vec<Signature>,
}

impl Reconciliation {
    pub fn is_exact(&self) -> bool {
        self.detected == self.expected && self.extra.is_empty() && self.missing.is_empty()
    }
}

/// Compares detections with a reference list when one exists, otherwise
/// only the counts.
pub fn reconcile(detected: &[Signature], expected: usize, reference: Option<&[Signature]>) -> Reconciliation {
    let mut rec = Reconciliation {
        detected: detected.len(),
        expected,
        ..Default::default()
    };
    if let Some(reference) = reference {
        let canon = |s: &Signature| canonical_form(s, ClassMode::Label);
        let got: BTreeSet<Signature> = detected.iter().map(canon).collect();
        let want: BTreeSet<Signature> = reference.iter().map(canon).collect();
        rec.extra = got.difference(&want).copied().collect();
        rec.missing = want.difference(&got).copied().collect();
    }
    rec
}
