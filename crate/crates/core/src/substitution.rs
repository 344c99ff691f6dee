//! One-dimensional point sets from primitive symbolic substitutions.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pointset::PointSet;

pub const WORD_BUDGET: usize = 10_000_000;
const PERRON_TOL: f64 = 1e-12;
const CONSISTENCY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct SubstitutionRule {
    alphabet: Vec<char>,
    rules: Vec<Vec<usize>>,
    eigenvalue: f64,
    lengths: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerronData {
    pub eigenvalue: f64,
    pub lengths: Vec<f64>,
}

/// `m[a][b]` is the number of letters `b` in the image of `a`.
fn substitution_matrix(rules: &[Vec<usize>], n: usize) -> Vec<Vec<f64>> {
    let mut m = vec![vec![0.0; n]; n];
    for (a, word) in rules.iter().enumerate() {
        for &b in word {
            m[a][b] += 1.0;
        }
    }
    m
}

fn is_primitive(m: &[Vec<f64>]) -> bool {
    let n = m.len();
    let pattern: Vec<Vec<bool>> = m.iter().map(|r| r.iter().map(|&x| x > 0.0).collect()).collect();
    let mut power = pattern.clone();
    for _ in 0..n * n {
        if power.iter().all(|r| r.iter().all(|&x| x)) {
            return true;
        }
        power = (0..n)
            .map(|i| (0..n).map(|j| (0..n).any(|k| power[i][k] && pattern[k][j])).collect())
            .collect();
    }
    false
}

/// Dominant eigenpair of a primitive nonnegative matrix by power iteration;
/// the vector is scaled so its first entry is 1.
fn power_iteration(m: &[Vec<f64>]) -> Result<(f64, Vec<f64>)> {
    let n = m.len();
    let apply = |v: &[f64]| -> Vec<f64> { (0..n).map(|i| (0..n).map(|j| m[i][j] * v[j]).sum()).collect() };
    let mut v = vec![1.0; n];
    for _ in 0..100_000 {
        let w = apply(&v);
        let lambda = w.iter().sum::<f64>() / v.iter().sum::<f64>();
        let scale = w[0];
        let next: Vec<f64> = w.iter().map(|x| x / scale).collect();
        let mv = apply(&next);
        let residual = mv
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - lambda * b).abs())
            .fold(0.0, f64::max)
            / next.iter().fold(0.0, |a: f64, &b| a.max(b));
        v = next;
        if residual < PERRON_TOL {
            return Ok((lambda, v));
        }
    }
    Err(Error::NotConverged)
}

impl SubstitutionRule {
    /// Rule from `(symbol, image)` pairs with Perron tile lengths. The
    /// alphabet follows the pair order.
    pub fn new(rules: &[(char, &str)]) -> Result<Self> {
        let alphabet: Vec<char> = rules.iter().map(|(c, _)| *c).collect();
        for (i, c) in alphabet.iter().enumerate() {
            if alphabet[..i].contains(c) {
                return Err(Error::InvalidRule(format!("symbol {c:?} defined twice")));
            }
        }
        if alphabet.is_empty() {
            return Err(Error::InvalidRule("empty alphabet".into()));
        }
        let mut images = Vec::with_capacity(rules.len());
        for (c, image) in rules {
            if image.is_empty() {
                return Err(Error::InvalidRule(format!("empty image for {c:?}")));
            }
            let word = image
                .chars()
                .map(|s| {
                    alphabet
                        .iter()
                        .position(|&a| a == s)
                        .ok_or_else(|| Error::InvalidRule(format!("symbol {s:?} in image of {c:?} is not in the alphabet")))
                })
                .collect::<Result<Vec<usize>>>()?;
            images.push(word);
        }
        let m = substitution_matrix(&images, alphabet.len());
        if !is_primitive(&m) {
            return Err(Error::NotPrimitive);
        }
        let (eigenvalue, lengths) = power_iteration(&m)?;
        Ok(SubstitutionRule { alphabet, rules: images, eigenvalue, lengths })
    }

    /// Replaces the tile lengths; they must be a positive multiple of the
    /// Perron lengths.
    pub fn with_lengths(mut self, lengths: Vec<f64>) -> Result<Self> {
        if lengths.len() != self.alphabet.len() {
            return Err(Error::DimensionMismatch { expected: self.alphabet.len(), found: lengths.len() });
        }
        if lengths.iter().any(|&l| !(l > 0.0) || !l.is_finite()) {
            return Err(Error::InvalidRule("tile lengths must be positive".into()));
        }
        let m = self.matrix();
        let scale = lengths.iter().fold(0.0, |a: f64, &b| a.max(b));
        let residual = (0..lengths.len())
            .map(|a| {
                let image: f64 = (0..lengths.len()).map(|b| m[a][b] * lengths[b]).sum();
                (image - self.eigenvalue * lengths[a]).abs()
            })
            .fold(0.0, f64::max)
            / scale;
        if residual >= CONSISTENCY_TOL {
            return Err(Error::InvalidRule(format!(
                "lengths {lengths:?} are not self-consistent (residual {residual:e})"
            )));
        }
        self.lengths = lengths;
        Ok(self)
    }

    pub fn alphabet(&self) -> &[char] {
        &self.alphabet
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn eigenvalue(&self) -> f64 {
        self.eigenvalue
    }

    pub fn matrix(&self) -> Vec<Vec<f64>> {
        substitution_matrix(&self.rules, self.alphabet.len())
    }

    pub fn image(&self, symbol: char) -> Option<String> {
        let a = self.symbol_index(symbol)?;
        Some(self.rules[a].iter().map(|&b| self.alphabet[b]).collect())
    }

    fn symbol_index(&self, symbol: char) -> Option<usize> {
        self.alphabet.iter().position(|&a| a == symbol)
    }

    /// Limiting letter frequencies (Perron vector of the transposed matrix,
    /// summing to 1).
    pub fn letter_frequencies(&self) -> Result<Vec<f64>> {
        let m = self.matrix();
        let n = m.len();
        let t: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| m[j][i]).collect()).collect();
        let (_, v) = power_iteration(&t)?;
        let total: f64 = v.iter().sum();
        Ok(v.into_iter().map(|x| x / total).collect())
    }

    /// Word obtained by substituting `iterations` times from `seed`.
    pub fn expand(&self, seed: char, iterations: usize) -> Result<Vec<usize>> {
        let start = self
            .symbol_index(seed)
            .ok_or_else(|| Error::InvalidRule(format!("seed {seed:?} is not in the alphabet")))?;
        let mut word = vec![start];
        for _ in 0..iterations {
            let len: usize = word.iter().map(|&a| self.rules[a].len()).sum();
            if len > WORD_BUDGET {
                return Err(Error::WordTooLong { len, budget: WORD_BUDGET });
            }
            let mut next = Vec::with_capacity(len);
            for &a in &word {
                next.extend_from_slice(&self.rules[a]);
            }
            word = next;
        }
        Ok(word)
    }
}

/// Eigenvalue and tile lengths of a rule.
pub fn perron_data(rule: &SubstitutionRule) -> PerronData {
    PerronData { eigenvalue: rule.eigenvalue, lengths: rule.lengths.clone() }
}

/// One-dimensional sample with a symbol per point, in increasing order.
#[derive(Debug, Clone, PartialEq)]
pub struct ColouredPointSet {
    pub points: PointSet,
    pub colours: Vec<char>,
}

impl ColouredPointSet {
    pub fn new(points: PointSet, colours: Vec<char>) -> Result<Self> {
        if points.dim() != 1 {
            return Err(Error::DimensionMismatch { expected: 1, found: points.dim() });
        }
        if colours.len() != points.len() {
            return Err(Error::InvalidArgument(format!(
                "{} colours for {} points",
                colours.len(),
                points.len()
            )));
        }
        Ok(ColouredPointSet { points, colours })
    }

    pub fn len(&self) -> usize {
        self.colours.len()
    }

    pub fn is_empty(&self) -> bool {
        self.colours.is_empty()
    }

    pub fn positions(&self) -> &[f64] {
        self.points.coords()
    }
}

/// Lays the tiles of the substituted word left to right from `origin` and
/// emits their left endpoints.
pub fn generate_substitution_points(
    rule: &SubstitutionRule,
    seed: char,
    iterations: usize,
    origin: f64,
) -> Result<ColouredPointSet> {
    let word = rule.expand(seed, iterations)?;
    // positions from letter counts, so no drift accumulates along the word
    let mut counts = vec![0u64; rule.alphabet.len()];
    let mut coords = Vec::with_capacity(word.len());
    let offset = |counts: &[u64]| -> f64 { counts.iter().zip(&rule.lengths).map(|(&c, l)| c as f64 * l).sum() };
    for &a in &word {
        coords.push(origin + offset(&counts));
        counts[a] += 1;
    }
    let end = origin + offset(&counts);
    let radius = origin.abs().max(end.abs());
    let colours = word.iter().map(|&a| rule.alphabet[a]).collect();
    let points = PointSet::from_distinct(1, coords, radius, Some(format!("substitution seed={seed}")));
    ColouredPointSet::new(points, colours)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchReport {
    pub matched: bool,
    pub max_deviation: f64,
    pub alignment_shift: f64,
}

/// Looks for a translate of `cset` that sits point for point on `ps`.
///
/// Candidate shifts move the first coloured point onto each point of `ps`
/// in turn. A shift succeeds when every shifted point has a partner within
/// `tol`, the partners are distinct and no other point of `ps` lies in the
/// covered interval. The shifted set must lie inside the span of `ps`.
/// Without a success the report carries the candidate with the smallest
/// maximal deviation.
pub fn match_model_set(cset: &ColouredPointSet, ps: &PointSet, tol: f64) -> Result<MatchReport> {
    if ps.dim() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, found: ps.dim() });
    }
    let c = cset.positions();
    let p = ps.coords();
    if c.is_empty() || p.is_empty() {
        return Err(Error::EmptySet);
    }
    let (c_first, c_last) = (c[0], c[c.len() - 1]);
    let mut best = MatchReport { matched: false, max_deviation: f64::INFINITY, alignment_shift: 0.0 };
    for &anchor in p {
        let shift = anchor - c_first;
        if c_last + shift > p[p.len() - 1] + tol {
            break;
        }
        let lo = p.partition_point(|&x| x < c_first + shift - tol);
        let hi = p.partition_point(|&x| x <= c_last + shift + tol);
        let mut deviation: f64 = 0.0;
        if hi - lo == c.len() {
            for (x, y) in c.iter().zip(&p[lo..hi]) {
                deviation = deviation.max((x + shift - y).abs());
                if deviation > tol && deviation > best.max_deviation {
                    break;
                }
            }
        } else {
            deviation = f64::INFINITY;
        }
        if deviation <= tol {
            return Ok(MatchReport { matched: true, max_deviation: deviation, alignment_shift: shift });
        }
        if deviation < best.max_deviation {
            best = MatchReport { matched: false, max_deviation: deviation, alignment_shift: shift };
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LengthSpec {
    Named(String),
    Explicit(Vec<f64>),
}

/// JSON form: `{"alphabet":["a","b"], "rules":{"a":"ab","b":"a"}, "lengths":"perron"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleConfig {
    pub alphabet: Vec<String>,
    pub rules: BTreeMap<String, String>,
    #[serde(default = "perron_lengths")]
    pub lengths: LengthSpec,
}

fn perron_lengths() -> LengthSpec {
    LengthSpec::Named("perron".into())
}

impl RuleConfig {
    pub fn build(&self) -> Result<SubstitutionRule> {
        let mut pairs = Vec::with_capacity(self.alphabet.len());
        for s in &self.alphabet {
            let mut chars = s.chars();
            let c = match (chars.next(), chars.next()) {
                (Some(c), None) => c,
                _ => return Err(Error::InvalidRule(format!("symbol {s:?} must be a single character"))),
            };
            let image = self
                .rules
                .get(s)
                .ok_or_else(|| Error::InvalidRule(format!("no rule for symbol {s:?}")))?;
            pairs.push((c, image.as_str()));
        }
        if let Some(extra) = self.rules.keys().find(|k| !self.alphabet.contains(k)) {
            return Err(Error::InvalidRule(format!("rule for unknown symbol {extra:?}")));
        }
        let rule = SubstitutionRule::new(&pairs)?;
        match &self.lengths {
            LengthSpec::Named(name) if name == "perron" => Ok(rule),
            LengthSpec::Named(name) => Err(Error::InvalidRule(format!("unknown lengths mode {name:?}"))),
            LengthSpec::Explicit(l) => rule.with_lengths(l.clone()),
        }
    }
}
