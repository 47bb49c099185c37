//! Lattice and metric contracts, plus the combinators used to build distances
//! on abstract domains: size-based metrics, Hausdorff lifting, product norms
//! and distances induced through a Galois connection.
//!
//! Property checking is done by enumeration over finite samples. Floating
//! point comparisons use an absolute tolerance of [`TOLERANCE`].

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Absolute tolerance for property checks.
pub const TOLERANCE: f64 = 1e-9;

/// Largest domain that [`enumerate_capped`] will return in full.
pub const EXHAUSTIVE_CAP: usize = 4096;

const DEFAULT_SEED: u64 = 0x5eed_ab5d;

/// Seed for sampling-based checks. Reads `ABSDIST_SEED` when set.
pub fn seed_from_env() -> u64 {
    std::env::var("ABSDIST_SEED").ok().and_then(|s| s.trim().parse().ok()).unwrap_or(DEFAULT_SEED)
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LatticeError {
    #[error("size function is not monotone: size(a \u{2294} b) - size(a \u{2293} b) = {0}")]
    NonMonotoneSize(f64),
    #[error("hausdorff distance is undefined on empty sets")]
    EmptySet,
}

/// A lattice element. `leq` must agree with `join` and `meet`:
/// `a ⊑ b ⇔ a ⊔ b = b ⇔ a ⊓ b = a`.
pub trait Lattice: Clone + PartialEq {
    fn leq(&self, other: &Self) -> bool;
    fn join(&self, other: &Self) -> Self;
    fn meet(&self, other: &Self) -> Self;

    /// Strict order.
    fn lt(&self, other: &Self) -> bool {
        self != other && self.leq(other)
    }
}

/// Finite sets ordered by inclusion.
impl<T: Ord + Clone> Lattice for BTreeSet<T> {
    fn leq(&self, other: &Self) -> bool {
        self.is_subset(other)
    }

    fn join(&self, other: &Self) -> Self {
        self.union(other).cloned().collect()
    }

    fn meet(&self, other: &Self) -> Self {
        self.intersection(other).cloned().collect()
    }
}

/// What a distance function claims to be.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricClaim {
    Metric,
    Pseudometric,
    /// No axioms promised beyond non-negativity and symmetry.
    Distance,
}

type Dist<T> = Arc<dyn Fn(&T, &T) -> f64 + Send + Sync>;

/// A distance on `T` together with the properties it claims.
pub struct DistanceFn<T> {
    f: Dist<T>,
    pub claim: MetricClaim,
    pub order_preserving: bool,
}

impl<T> DistanceFn<T> {
    pub fn new(f: impl Fn(&T, &T) -> f64 + Send + Sync + 'static) -> Self {
        DistanceFn { f: Arc::new(f), claim: MetricClaim::Metric, order_preserving: false }
    }

    pub fn with_claim(mut self, claim: MetricClaim) -> Self {
        self.claim = claim;
        self
    }

    pub fn order_preserving(mut self, yes: bool) -> Self {
        self.order_preserving = yes;
        self
    }

    pub fn eval(&self, a: &T, b: &T) -> f64 {
        (self.f)(a, b)
    }
}

impl<T> Clone for DistanceFn<T> {
    fn clone(&self) -> Self {
        DistanceFn { f: self.f.clone(), claim: self.claim, order_preserving: self.order_preserving }
    }
}

impl<T> fmt::Debug for DistanceFn<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DistanceFn")
            .field("claim", &self.claim)
            .field("order_preserving", &self.order_preserving)
            .finish()
    }
}

/// A size function on lattice elements.
pub struct SizeFn<T> {
    f: Arc<dyn Fn(&T) -> f64 + Send + Sync>,
    pub monotone: bool,
}

impl<T> Clone for SizeFn<T> {
    fn clone(&self) -> Self {
        SizeFn { f: self.f.clone(), monotone: self.monotone }
    }
}

impl<T> SizeFn<T> {
    pub fn new(f: impl Fn(&T) -> f64 + Send + Sync + 'static) -> Self {
        SizeFn { f: Arc::new(f), monotone: true }
    }

    pub fn eval(&self, a: &T) -> f64 {
        (self.f)(a)
    }
}

/// `size(a ⊔ b) − size(a ⊓ b)`. A metric whenever `size` is monotone and
/// modular; a negative result means `size` is not monotone.
pub fn size_metric<T: Lattice>(size: &SizeFn<T>, a: &T, b: &T) -> Result<f64, LatticeError> {
    let d = size.eval(&a.join(b)) - size.eval(&a.meet(b));
    if d < -TOLERANCE {
        return Err(LatticeError::NonMonotoneSize(d));
    }
    Ok(d.max(0.0))
}

/// Wraps [`size_metric`] as a [`DistanceFn`]. Panics on evaluation if the size
/// turns out to be non-monotone.
pub fn size_distance<T: Lattice + 'static>(size: SizeFn<T>) -> DistanceFn<T> {
    DistanceFn::new(move |a, b| size_metric(&size, a, b).expect("monotone size")).order_preserving(true)
}

/// Hausdorff lifting of `d` to finite non-empty sets.
pub fn hausdorff<T>(d: impl Fn(&T, &T) -> f64, a: &[T], b: &[T]) -> Result<f64, LatticeError> {
    if a.is_empty() || b.is_empty() {
        return Err(LatticeError::EmptySet);
    }
    let directed = |xs: &[T], ys: &[T], flip: bool| {
        xs.iter()
            .map(|x| ys.iter().map(|y| if flip { d(y, x) } else { d(x, y) }).fold(f64::INFINITY, f64::min))
            .fold(0.0_f64, f64::max)
    };
    Ok(directed(a, b, false).max(directed(b, a, true)))
}

/// 2-norm of per-component distances, optionally divided by `sqrt(len)` so
/// that components in `[0, 1]` give a result in `[0, 1]`.
pub fn product_distance(ds: &[f64], normalize: bool) -> f64 {
    if ds.is_empty() {
        return 0.0;
    }
    let norm = ds.iter().map(|d| d * d).sum::<f64>().sqrt();
    if normalize {
        norm / (ds.len() as f64).sqrt()
    } else {
        norm
    }
}

/// Abstraction and concretization between a concrete domain `C` and an
/// abstract domain `A`. `gamma` is only evaluable on enumerable test domains.
#[derive(Clone)]
pub struct GaloisPair<C, A> {
    pub alpha: Arc<dyn Fn(&C) -> A + Send + Sync>,
    pub gamma: Arc<dyn Fn(&A) -> C + Send + Sync>,
    /// `alpha ∘ gamma = id`.
    pub insertion: bool,
}

impl<C, A> GaloisPair<C, A> {
    pub fn new(
        alpha: impl Fn(&C) -> A + Send + Sync + 'static,
        gamma: impl Fn(&A) -> C + Send + Sync + 'static,
        insertion: bool,
    ) -> Self {
        GaloisPair { alpha: Arc::new(alpha), gamma: Arc::new(gamma), insertion }
    }

    pub fn alpha(&self, c: &C) -> A {
        (self.alpha)(c)
    }

    pub fn gamma(&self, a: &A) -> C {
        (self.gamma)(a)
    }
}

impl<C: Lattice, A: Lattice> GaloisPair<C, A> {
    /// Checks monotonicity of both maps, the adjunction
    /// `alpha(c) ⊑ a ⇔ c ⊑ gamma(a)`, and `alpha ∘ gamma = id` when the pair
    /// claims to be an insertion. Returns one message per violation.
    pub fn check(&self, concretes: &[C], abstracts: &[A]) -> Vec<String> {
        let mut out = Vec::new();
        for (i, x) in concretes.iter().enumerate() {
            for (j, y) in concretes.iter().enumerate() {
                if x.leq(y) && !self.alpha(x).leq(&self.alpha(y)) {
                    out.push(format!("alpha not monotone on concrete #{i} <= #{j}"));
                }
            }
            for (j, a) in abstracts.iter().enumerate() {
                if self.alpha(x).leq(a) != x.leq(&self.gamma(a)) {
                    out.push(format!("adjunction fails for concrete #{i}, abstract #{j}"));
                }
            }
        }
        for (i, a) in abstracts.iter().enumerate() {
            for (j, b) in abstracts.iter().enumerate() {
                if a.leq(b) && !self.gamma(a).leq(&self.gamma(b)) {
                    out.push(format!("gamma not monotone on abstract #{i} <= #{j}"));
                }
            }
            if self.insertion && self.alpha(&self.gamma(a)) != *a {
                out.push(format!("alpha(gamma(#{i})) != #{i}"));
            }
        }
        out
    }
}

/// Distance on concrete sets induced by an abstract distance:
/// `d(A, B) = d_abs(alpha(A), alpha(B))`. Always a pseudometric at best.
pub fn induce_on_concrete<C: 'static, A: 'static>(g: &GaloisPair<C, A>, d_abs: &DistanceFn<A>) -> DistanceFn<C> {
    let alpha = g.alpha.clone();
    let d = d_abs.clone();
    let claim = match d_abs.claim {
        MetricClaim::Distance => MetricClaim::Distance,
        _ => MetricClaim::Pseudometric,
    };
    DistanceFn::new(move |x: &C, y: &C| d.eval(&alpha(x), &alpha(y)))
        .with_claim(claim)
        .order_preserving(d_abs.order_preserving)
}

/// Distance on abstract elements induced by a concrete distance:
/// `d(a, b) = d_conc(gamma(a), gamma(b))`. A metric when the pair is an
/// insertion and `d_conc` is a metric, a pseudometric otherwise.
pub fn induce_on_abstract<C: 'static, A: 'static>(g: &GaloisPair<C, A>, d_conc: &DistanceFn<C>) -> DistanceFn<A> {
    let gamma = g.gamma.clone();
    let d = d_conc.clone();
    let claim = match (d_conc.claim, g.insertion) {
        (MetricClaim::Metric, true) => MetricClaim::Metric,
        (MetricClaim::Distance, _) => MetricClaim::Distance,
        _ => MetricClaim::Pseudometric,
    };
    DistanceFn::new(move |a: &A, b: &A| d.eval(&gamma(a), &gamma(b)))
        .with_claim(claim)
        .order_preserving(d_conc.order_preserving)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Property {
    NonNegativity,
    Symmetry,
    Triangle,
    /// `d(x, y) = 0 ⇒ x = y`
    Identity,
    /// `d(x, x) = 0`
    WeakIdentity,
    OrderPreservation,
    Diamond,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub property: Property,
    /// Indices into the checked sample.
    pub elements: Vec<usize>,
    pub detail: String,
}

/// Result of [`check_metric_properties`].
#[derive(Debug, Clone, Default)]
pub struct MetricReport {
    pub sample_size: usize,
    pub triples_checked: usize,
    pub quadruples_checked: usize,
    pub violations: Vec<Violation>,
}

impl MetricReport {
    pub fn count(&self, p: Property) -> usize {
        self.violations.iter().filter(|v| v.property == p).count()
    }

    /// Violations of the four metric axioms (strong identity included).
    pub fn metric_violations(&self) -> usize {
        self.pseudometric_violations() + self.count(Property::Identity)
    }

    pub fn pseudometric_violations(&self) -> usize {
        [Property::NonNegativity, Property::Symmetry, Property::Triangle, Property::WeakIdentity]
            .iter()
            .map(|p| self.count(*p))
            .sum()
    }

    pub fn is_metric(&self) -> bool {
        self.metric_violations() == 0
    }

    pub fn is_pseudometric(&self) -> bool {
        self.pseudometric_violations() == 0
    }
}

impl fmt::Display for MetricReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} elements: non-neg {}, sym {}, tri {}, ident {}, weak-ident {}, order {}, diamond {}",
            self.sample_size,
            self.count(Property::NonNegativity),
            self.count(Property::Symmetry),
            self.count(Property::Triangle),
            self.count(Property::Identity),
            self.count(Property::WeakIdentity),
            self.count(Property::OrderPreservation),
            self.count(Property::Diamond),
        )
    }
}

/// Limits for the checker. Past the exhaustive limits, triples and quadruples
/// are drawn at random with a fixed seed.
#[derive(Debug, Clone)]
pub struct CheckConfig {
    pub tolerance: f64,
    pub max_exhaustive_triples: usize,
    pub max_exhaustive_quadruples: usize,
    pub samples: usize,
    pub seed: u64,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            tolerance: TOLERANCE,
            max_exhaustive_triples: 20_000_000,
            max_exhaustive_quadruples: 1_000_000,
            samples: 500_000,
            seed: seed_from_env(),
        }
    }
}

/// Checks non-negativity, symmetry, triangle inequality and both forms of
/// identity of indiscernibles over `sample`.
pub fn check_metric_axioms<T: PartialEq>(sample: &[T], d: impl Fn(&T, &T) -> f64, cfg: &CheckConfig) -> MetricReport {
    let n = sample.len();
    let tol = cfg.tolerance;
    let mut report = MetricReport { sample_size: n, ..Default::default() };
    let mut table = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            table[i * n + j] = d(&sample[i], &sample[j]);
        }
    }
    let at = |i: usize, j: usize| table[i * n + j];
    let mut out = Vec::new();
    let mut push = |property, elements: Vec<usize>, detail: String| out.push(Violation { property, elements, detail });
    for i in 0..n {
        if at(i, i).abs() > tol {
            push(Property::WeakIdentity, vec![i], format!("d(x,x) = {}", at(i, i)));
        }
        for j in 0..n {
            let dij = at(i, j);
            if dij < -tol || dij.is_nan() {
                push(Property::NonNegativity, vec![i, j], format!("d = {dij}"));
            }
            if j > i {
                if (dij - at(j, i)).abs() > tol {
                    push(Property::Symmetry, vec![i, j], format!("{dij} vs {}", at(j, i)));
                }
                if dij.abs() <= tol && sample[i] != sample[j] {
                    push(Property::Identity, vec![i, j], "distinct at distance 0".into());
                }
            }
        }
    }
    let mut triangle = |i: usize, j: usize, k: usize| {
        if at(i, k) > at(i, j) + at(j, k) + tol {
            push(Property::Triangle, vec![i, j, k], format!("{} > {} + {}", at(i, k), at(i, j), at(j, k)));
        }
    };
    if n.saturating_pow(3) <= cfg.max_exhaustive_triples {
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    triangle(i, j, k);
                }
            }
        }
        report.triples_checked = n * n * n;
    } else if n > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        for _ in 0..cfg.samples {
            triangle(rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n));
        }
        report.triples_checked = cfg.samples;
    }
    report.violations = out;
    report
}

/// [`check_metric_axioms`] plus the lattice-aware properties:
/// order preservation (`a ⊑ b ⊑ c ⇒ d(a,b), d(b,c) ≤ d(a,c)`) and the
/// diamond inequality (`c ⊓ d ⊏ a ⊓ b` and `a ⊔ b ⊏ c ⊔ d ⇒ d(a,b) ≤ d(c,d)`),
/// reported separately from the axioms.
pub fn check_metric_properties<T: Lattice>(sample: &[T], d: impl Fn(&T, &T) -> f64, cfg: &CheckConfig) -> MetricReport {
    let mut report = check_metric_axioms(sample, &d, cfg);
    let n = sample.len();
    let tol = cfg.tolerance;
    let mut leq = vec![false; n * n];
    for i in 0..n {
        for j in 0..n {
            leq[i * n + j] = sample[i].leq(&sample[j]);
        }
    }
    for a in 0..n {
        for b in 0..n {
            if !leq[a * n + b] {
                continue;
            }
            for c in 0..n {
                if !leq[b * n + c] {
                    continue;
                }
                let (dab, dbc, dac) = (d(&sample[a], &sample[b]), d(&sample[b], &sample[c]), d(&sample[a], &sample[c]));
                if dab > dac + tol || dbc > dac + tol {
                    report.violations.push(Violation {
                        property: Property::OrderPreservation,
                        elements: vec![a, b, c],
                        detail: format!("d(a,b)={dab}, d(b,c)={dbc}, d(a,c)={dac}"),
                    });
                }
            }
        }
    }

    let pairs: Vec<(usize, usize, T, T, f64)> = (0..n)
        .flat_map(|i| (i..n).map(move |j| (i, j)))
        .map(|(i, j)| (i, j, sample[i].meet(&sample[j]), sample[i].join(&sample[j]), d(&sample[i], &sample[j])))
        .collect();
    let mut diamond = |p: &(usize, usize, T, T, f64), q: &(usize, usize, T, T, f64)| {
        // p = (a, b), q = (c, d)
        if q.2.lt(&p.2) && p.3.lt(&q.3) && p.4 > q.4 + tol {
            report.violations.push(Violation {
                property: Property::Diamond,
                elements: vec![p.0, p.1, q.0, q.1],
                detail: format!("d(a,b)={} > d(c,d)={}", p.4, q.4),
            });
        }
    };
    let np = pairs.len();
    if np.saturating_mul(np) <= cfg.max_exhaustive_quadruples {
        for p in &pairs {
            for q in &pairs {
                diamond(p, q);
            }
        }
        report.quadruples_checked = np * np;
    } else if np > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0xd1a);
        for _ in 0..cfg.samples {
            let (p, q) = (&pairs[rng.gen_range(0..np)], &pairs[rng.gen_range(0..np)]);
            diamond(p, q);
        }
        report.quadruples_checked = cfg.samples;
    }
    report
}

/// Returns `all` when it fits under [`EXHAUSTIVE_CAP`], otherwise a seeded
/// sample of that many elements (order preserved).
pub fn enumerate_capped<T: Clone>(all: &[T], seed: u64) -> Vec<T> {
    sample_elements(all, EXHAUSTIVE_CAP, seed)
}

/// Seeded sample of at most `k` elements, keeping the original order.
pub fn sample_elements<T: Clone>(all: &[T], k: usize, seed: u64) -> Vec<T> {
    if all.len() <= k {
        return all.to_vec();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx = rand::seq::index::sample(&mut rng, all.len(), k).into_vec();
    idx.sort_unstable();
    idx.into_iter().map(|i| all[i].clone()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn powerset(n: u32) -> Vec<BTreeSet<u32>> {
        (0..1u32 << n).map(|m| (0..n).filter(|i| m & (1 << i) != 0).collect()).collect()
    }

    fn card() -> SizeFn<BTreeSet<u32>> {
        SizeFn::new(|s: &BTreeSet<u32>| s.len() as f64)
    }

    #[test]
    fn size_metric_identical_is_zero() {
        let a: BTreeSet<u32> = [1, 2].into();
        assert_eq!(size_metric(&card(), &a, &a).unwrap(), 0.0);
    }

    #[test]
    fn size_metric_is_symmetric_difference_on_powerset() {
        let a: BTreeSet<u32> = [1].into();
        let b: BTreeSet<u32> = [2].into();
        // oracle: |a Δ b|
        let sym = a.symmetric_difference(&b).count() as f64;
        assert_eq!(sym, 2.0);
        assert_eq!(size_metric(&card(), &a, &b).unwrap(), sym);
    }

    #[test]
    fn non_monotone_size_is_reported() {
        let neg = SizeFn::new(|s: &BTreeSet<u32>| -(s.len() as f64));
        let a: BTreeSet<u32> = [1].into();
        let b: BTreeSet<u32> = [2].into();
        assert!(matches!(size_metric(&neg, &a, &b), Err(LatticeError::NonMonotoneSize(_))));
    }

    #[test]
    fn hausdorff_examples() {
        let discrete = |a: &char, b: &char| if a == b { 0.0 } else { 1.0 };
        assert_eq!(hausdorff(discrete, &['a'], &['a']).unwrap(), 0.0);
        assert_eq!(hausdorff(discrete, &['a'], &['a', 'b']).unwrap(), 1.0);
        assert_eq!(hausdorff(discrete, &[], &['a']), Err(LatticeError::EmptySet));
    }

    #[test]
    fn product_distance_examples() {
        assert_eq!(product_distance(&[0.0, 0.0, 0.0], false), 0.0);
        assert!((product_distance(&[1.0; 4], true) - 1.0).abs() < 1e-12);
        assert!((product_distance(&[0.5, 0.5], true) - 0.5).abs() < 1e-12);
        assert_eq!(product_distance(&[], true), 0.0);
    }

    #[test]
    fn symmetric_difference_passes_all_checks() {
        let all = powerset(3);
        let d = size_distance(card());
        let r = check_metric_properties(&all, |a, b| d.eval(a, b), &CheckConfig::default());
        assert!(r.is_metric(), "{r}");
        assert_eq!(r.count(Property::OrderPreservation), 0);
        assert_eq!(r.count(Property::Diamond), 0);
        assert_eq!(r.triples_checked, 512);
    }

    #[test]
    fn seeded_fault_is_caught() {
        let all = powerset(2);
        let bad = |a: &BTreeSet<u32>, b: &BTreeSet<u32>| {
            if a.len() == 1 && b.len() == 1 && a != b {
                -1.0
            } else {
                a.symmetric_difference(b).count() as f64
            }
        };
        let r = check_metric_axioms(&all, bad, &CheckConfig::default());
        // {0} and {1} in both orders
        assert_eq!(r.count(Property::NonNegativity), 2);
        assert_eq!(r.count(Property::Symmetry), 0);
    }

    #[test]
    fn sampling_keeps_order_and_size() {
        let all: Vec<u32> = (0..10_000).collect();
        let s = enumerate_capped(&all, 7);
        assert_eq!(s.len(), EXHAUSTIVE_CAP);
        assert!(s.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(s, enumerate_capped(&all, 7));
    }
}
