//! Loop counting for index contractions of products of covariance matrices.
//!
//! A product like `Σ σ^{ik} σ^{ls} σ^{tj} … σ_{ai} σ_{bj} …` pairs every index
//! once among upper factors and once among lower factors. Drawing each factor
//! as a segment between its two endpoints, the union of the two perfect
//! matchings splits into closed loops, and each loop collapses to a trace
//! `tr(I_p) = p`. Summing over index-exchange variants gives a polynomial in p.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;

use crate::{Error, Result};

/// Generator cap for [`enumerate_pattern`]: at most 2²⁰ combinations.
pub const MAX_GENERATORS: usize = 20;

/// A perfect matching of the endpoints `1..=2k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matching {
    /// `partner[e - 1]` is the endpoint joined to `e`.
    partner: Vec<usize>,
}

impl Matching {
    pub fn new(segments: &[(usize, usize)]) -> Result<Self> {
        let n = 2 * segments.len();
        let mut partner = vec![0usize; n];
        for &(a, b) in segments {
            if a == b {
                return Err(Error::invalid(format!("segment ({a}, {b}) joins an endpoint to itself")));
            }
            for e in [a, b] {
                if e == 0 || e > n {
                    return Err(Error::invalid(format!("endpoint {e} outside 1..={n}")));
                }
                if partner[e - 1] != 0 {
                    return Err(Error::invalid(format!("endpoint {e} appears more than once")));
                }
            }
            partner[a - 1] = b;
            partner[b - 1] = a;
        }
        Ok(Self { partner })
    }

    /// Reads consecutive entries as segments: `[1, 3, 4, 6, 2, 5]` is
    /// `(1,3) (4,6) (2,5)`.
    pub fn from_sequence(seq: &[usize]) -> Result<Self> {
        if seq.len() % 2 != 0 {
            return Err(Error::invalid(format!("odd number of endpoints ({})", seq.len())));
        }
        let segs: Vec<(usize, usize)> = seq.chunks(2).map(|c| (c[0], c[1])).collect();
        Self::new(&segs)
    }

    /// Number of segments k.
    pub fn len(&self) -> usize {
        self.partner.len() / 2
    }

    pub fn is_empty(&self) -> bool {
        self.partner.is_empty()
    }

    pub fn partner(&self, endpoint: usize) -> usize {
        self.partner[endpoint - 1]
    }

    /// Segments as `(min, max)` pairs, sorted.
    pub fn segments(&self) -> Vec<(usize, usize)> {
        (1..=self.partner.len())
            .filter(|&e| e < self.partner(e))
            .map(|e| (e, self.partner(e)))
            .collect()
    }
}

/// Number of closed loops in the union of two matchings of the same endpoints.
pub fn count_loops(upper: &Matching, lower: &Matching) -> Result<usize> {
    if upper.partner.len() != lower.partner.len() {
        return Err(Error::DimensionMismatch { expected: upper.partner.len(), got: lower.partner.len() });
    }
    Ok(count_loops_unchecked(&upper.partner, &lower.partner))
}

fn count_loops_unchecked(upper: &[usize], lower: &[usize]) -> usize {
    let mut seen = vec![false; upper.len()];
    let mut loops = 0;
    for start in 0..upper.len() {
        if seen[start] {
            continue;
        }
        loops += 1;
        let mut e = start;
        loop {
            seen[e] = true;
            let u = upper[e] - 1;
            seen[u] = true;
            e = lower[u] - 1;
            if e == start {
                break;
            }
        }
    }
    loops
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Upper,
    Lower,
}

/// Exchange of two positions (1-based) in the upper or lower endpoint
/// sequence. Each generator is an involution; switched-on generators are
/// applied in list order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Exchange {
    pub side: Side,
    pub positions: (usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContractionPattern {
    /// Upper-index factors as an endpoint sequence read in consecutive pairs.
    pub upper: Vec<usize>,
    pub lower: Vec<usize>,
    pub generators: Vec<Exchange>,
    /// Divisor applied to the loop histogram to give the polynomial.
    pub normalization: u64,
}

impl ContractionPattern {
    pub fn validate(&self) -> Result<()> {
        let upper = Matching::from_sequence(&self.upper)?;
        let lower = Matching::from_sequence(&self.lower)?;
        if upper.len() != lower.len() {
            return Err(Error::DimensionMismatch { expected: upper.len(), got: lower.len() });
        }
        if self.normalization == 0 {
            return Err(Error::invalid("normalization must be positive"));
        }
        let n = self.upper.len();
        for g in &self.generators {
            let (a, b) = g.positions;
            if a == 0 || b == 0 || a > n || b > n || a == b {
                return Err(Error::invalid(format!("exchange ({a}, {b}) is not a swap of two positions in 1..={n}")));
            }
        }
        Ok(())
    }

    fn loops_for(&self, mask: u64) -> usize {
        let mut upper = self.upper.clone();
        let mut lower = self.lower.clone();
        for (bit, g) in self.generators.iter().enumerate() {
            if mask >> bit & 1 == 1 {
                let seq = match g.side {
                    Side::Upper => &mut upper,
                    Side::Lower => &mut lower,
                };
                seq.swap(g.positions.0 - 1, g.positions.1 - 1);
            }
        }
        count_loops_unchecked(&partners(&upper), &partners(&lower))
    }
}

fn partners(seq: &[usize]) -> Vec<usize> {
    let mut p = vec![0; seq.len()];
    for c in seq.chunks(2) {
        p[c[0] - 1] = c[1];
        p[c[1] - 1] = c[0];
    }
    p
}

/// Histogram of loop counts over all generator combinations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoopPolynomial {
    /// Loop count (the power of p) → number of combinations.
    pub histogram: BTreeMap<usize, u64>,
    pub normalization: u64,
}

impl LoopPolynomial {
    /// Raw counts in descending degree.
    pub fn raw_counts(&self) -> Vec<u64> {
        self.histogram.values().rev().copied().collect()
    }

    /// Normalized coefficients indexed by degree.
    pub fn coefficients(&self) -> Vec<f64> {
        let top = self.histogram.keys().next_back().copied().unwrap_or(0);
        let mut c = vec![0.0; top + 1];
        for (&d, &count) in &self.histogram {
            c[d] = count as f64 / self.normalization as f64;
        }
        c
    }

    pub fn eval(&self, p: f64) -> f64 {
        self.coefficients().iter().rev().fold(0.0, |acc, c| acc * p + c)
    }

    pub fn total(&self) -> u64 {
        self.histogram.values().sum()
    }
}

impl fmt::Display for LoopPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (d, c) in self.coefficients().iter().enumerate().rev() {
            if *c == 0.0 {
                continue;
            }
            if !first {
                f.write_str("+")?;
            }
            first = false;
            let coef = if c.fract() == 0.0 { format!("{c:.0}") } else { format!("{c}") };
            match (d, coef.as_str()) {
                (0, _) => write!(f, "{coef}")?,
                (1, "1") => f.write_str("p")?,
                (1, _) => write!(f, "{coef}p")?,
                (_, "1") => write!(f, "p^{d}")?,
                _ => write!(f, "{coef}p^{d}")?,
            }
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

pub fn enumerate_pattern(pattern: &ContractionPattern) -> Result<LoopPolynomial> {
    pattern.validate()?;
    let g = pattern.generators.len();
    if g > MAX_GENERATORS {
        return Err(Error::EnumerationCap { generators: g, cap: MAX_GENERATORS });
    }
    let histogram = (0..1u64 << g)
        .into_par_iter()
        .fold(BTreeMap::new, |mut h, mask| {
            *h.entry(pattern.loops_for(mask)).or_insert(0u64) += 1;
            h
        })
        .reduce(BTreeMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_insert(0) += v;
            }
            a
        });
    Ok(LoopPolynomial { histogram, normalization: pattern.normalization })
}

/// Normal-model contractions available as built-in patterns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormalInvariant {
    /// `T_ijk T^ijk`
    Tt,
    /// `T_is^i T_j^js`
    TdTd,
}

/// Swaps inside a T factor `(i,k)(l,s)(t,j)`: i↔j, k↔l, s↔t.
const T_SWAPS: [(usize, usize); 3] = [(1, 6), (2, 3), (4, 5)];
/// Swaps inside a metric factor `(a,i)(b,j)`: a↔b, i↔j.
const G_SWAPS: [(usize, usize); 2] = [(1, 3), (2, 4)];

fn normal_generators() -> Vec<Exchange> {
    let mut gens = Vec::with_capacity(12);
    for block in 0..2 {
        gens.extend(T_SWAPS.iter().map(|&(a, b)| Exchange {
            side: Side::Upper,
            positions: (6 * block + a, 6 * block + b),
        }));
    }
    for block in 0..3 {
        gens.extend(G_SWAPS.iter().map(|&(a, b)| Exchange {
            side: Side::Lower,
            positions: (4 * block + a, 4 * block + b),
        }));
    }
    gens
}

/// Endpoints 1..6 are `(i,k,l,s,t,j)` of the first T, 7..12 are
/// `(a,c,d,e,f,b)` of the second.
pub fn normal_pattern(which: NormalInvariant) -> ContractionPattern {
    let lower = match which {
        // g^{(ab)(ij)} g^{(cd)(kl)} g^{(ef)(st)}
        NormalInvariant::Tt => vec![1, 7, 6, 12, 2, 8, 3, 9, 4, 10, 5, 11],
        // g^{(ij)(kl)} g^{(ab)(cd)} g^{(st)(ef)}
        NormalInvariant::TdTd => vec![1, 2, 6, 3, 7, 8, 12, 9, 4, 10, 5, 11],
    };
    ContractionPattern {
        upper: (1..=12).collect(),
        lower,
        generators: normal_generators(),
        normalization: 512,
    }
}

pub fn normal_invariant_via_loops(which: NormalInvariant) -> LoopPolynomial {
    enumerate_pattern(&normal_pattern(which)).expect("built-in pattern is valid")
}

/// Parses a pattern description:
///
/// ```text
/// # comments and blank lines are ignored
/// upper = 1 2 3 4
/// lower = 1 3 2 4
/// exchange = upper 1 2
/// exchange = lower 2 4
/// normalization = 2
/// ```
///
/// `normalization` defaults to 1; `exchange` may repeat.
pub fn parse_pattern(text: &str) -> Result<ContractionPattern> {
    let (mut upper, mut lower, mut normalization) = (None, None, 1u64);
    let mut generators = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let parse_err = |message: String| Error::Parse { line, message };
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| parse_err(format!("expected `key = value`, got `{content}`")))?;
        let ints = |v: &str| -> Result<Vec<usize>> {
            v.split_whitespace()
                .map(|t| t.parse::<usize>().map_err(|e| parse_err(format!("bad integer `{t}`: {e}"))))
                .collect()
        };
        match key.trim() {
            "upper" => upper = Some(ints(value)?),
            "lower" => lower = Some(ints(value)?),
            "normalization" => {
                normalization = value
                    .trim()
                    .parse()
                    .map_err(|e| parse_err(format!("bad normalization `{}`: {e}", value.trim())))?
            }
            "exchange" => {
                let mut it = value.split_whitespace();
                let side = match it.next() {
                    Some("upper") => Side::Upper,
                    Some("lower") => Side::Lower,
                    other => return Err(parse_err(format!("exchange side must be upper or lower, got {other:?}"))),
                };
                let pos = ints(&it.collect::<Vec<_>>().join(" "))?;
                if pos.len() != 2 {
                    return Err(parse_err(format!("exchange needs two positions, got {}", pos.len())));
                }
                generators.push(Exchange { side, positions: (pos[0], pos[1]) });
            }
            other => return Err(parse_err(format!("unknown key `{other}`"))),
        }
    }
    let missing = |k: &str| Error::Parse { line: 0, message: format!("missing `{k}`") };
    let pattern = ContractionPattern {
        upper: upper.ok_or_else(|| missing("upper"))?,
        lower: lower.ok_or_else(|| missing("lower"))?,
        generators,
        normalization,
    };
    pattern.validate()?;
    Ok(pattern)
}
