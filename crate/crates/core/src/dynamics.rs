//! Expanding circle systems, words, and the truncated Hölder metric.
//!
//! The phase space is the circle `R/Z` with arc distance. Each generator is
//! a full-branch affine expanding map `T_i(x) = m_i·x mod 1` with `m_i ≥ 2`
//! branches; its inverse branches `y = (x + j)/m_i` are exact, so preimage
//! enumeration and potential sums along words carry no inversion error.
//! Compactness of the circle makes the irreducibility hypotheses (joint
//! topological mixing, finite aperiodicity) automatic for these systems.

use crate::error::LabError;
use crate::Result;
use rand::Rng;
use std::fmt;

/// Letters are `0..k` internally; displayed 1-based.
pub type Letter = u8;

/// Map a real to its circle representative in `[0, 1)`.
pub fn wrap(x: f64) -> f64 {
    let y = x - x.floor();
    if y >= 1.0 {
        0.0
    } else {
        y
    }
}

/// Arc distance on `R/Z`.
pub fn circle_dist(x: f64, y: f64) -> f64 {
    let d = (wrap(x) - wrap(y)).abs();
    d.min(1.0 - d)
}

/// A finite word over the generator alphabet.
///
/// `T_v = T_{i_n} ∘ ... ∘ T_{i_1}` for `v = i_1 i_2 ... i_n`: letters act in
/// reading order, first letter first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn new(letters: Vec<Letter>) -> Self {
        Word(letters)
    }

    pub fn empty() -> Self {
        Word(Vec::new())
    }

    /// Parse from 1-based digits, e.g. `"121"`.
    pub fn parse(s: &str) -> Result<Self> {
        let mut letters = Vec::with_capacity(s.len());
        for c in s.chars() {
            let d = c
                .to_digit(10)
                .filter(|&d| d >= 1)
                .ok_or_else(|| LabError::InvalidSystem(format!("bad word literal {s:?}")))?;
            letters.push((d - 1) as Letter);
        }
        Ok(Word(letters))
    }

    /// The word `pattern` repeated/truncated to `len` letters (right-infinite
    /// periodic extension, read from the start).
    pub fn cyclic(pattern: &Word, len: usize) -> Self {
        assert!(!pattern.is_empty(), "cyclic extension of the empty word");
        Word((0..len).map(|j| pattern.0[j % pattern.len()]).collect())
    }

    /// Length-`len` truncation of the left-infinite periodic extension
    /// `...www`: the last `len` letters of `w^∞` aligned to its right end.
    pub fn cyclic_suffix(pattern: &Word, len: usize) -> Self {
        assert!(!pattern.is_empty(), "cyclic extension of the empty word");
        let p = pattern.len();
        Word(
            (0..len)
                .map(|j| {
                    // position -len+j relative to the right end
                    let t = (len - j) % p;
                    pattern.0[(p - t) % p]
                })
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn letter(&self, j: usize) -> Letter {
        self.0[j]
    }

    /// Initial `n`-letter truncation.
    pub fn prefix(&self, n: usize) -> Word {
        Word(self.0[..n.min(self.0.len())].to_vec())
    }

    /// Final `n`-letter truncation.
    pub fn suffix(&self, n: usize) -> Word {
        let start = self.0.len().saturating_sub(n);
        Word(self.0[start..].to_vec())
    }

    /// Drop the first `n` letters (the shift `θ^n` on finite truncations).
    pub fn shifted(&self, n: usize) -> Word {
        Word(self.0[n.min(self.0.len())..].to_vec())
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn push(&mut self, letter: Letter) {
        self.0.push(letter);
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &l in &self.0 {
            write!(f, "{}", l + 1)?;
        }
        Ok(())
    }
}

/// A bilateral truncation pair: the last `|sigma_suffix|` letters of a
/// left-infinite past and the first `|omega_prefix|` letters of a future.
#[derive(Debug, Clone)]
pub struct BiWord {
    pub sigma_suffix: Word,
    pub omega_prefix: Word,
}

/// Closed-form potential families on the circle.
///
/// `Linear` is a test-only potential (it is not continuous as a circle
/// function; it exercises Birkhoff-sum arithmetic in branch enumeration).
#[derive(Debug, Clone, PartialEq)]
pub enum Potential {
    Zero,
    /// Constant weight `c`.
    Const(f64),
    /// `amplitude · cos(2π(x + phase))`
    Cos { amplitude: f64, phase: f64 },
    /// `slope · x` on the fundamental domain `[0, 1)`.
    Linear { slope: f64 },
}

impl Potential {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Potential::Zero => 0.0,
            Potential::Const(c) => c,
            Potential::Cos { amplitude, phase } => {
                amplitude * (2.0 * std::f64::consts::PI * (x + phase)).cos()
            }
            Potential::Linear { slope } => slope * wrap(x),
        }
    }

    /// Natural 1-Hölder (Lipschitz) constant for the family, used as the
    /// default declared constant.
    pub fn default_lipschitz(&self) -> f64 {
        match *self {
            Potential::Zero | Potential::Const(_) => 0.0,
            Potential::Cos { amplitude, .. } => 2.0 * std::f64::consts::PI * amplitude.abs(),
            // steepest circle quotient is realized across the wrap; callers
            // declaring this potential must override or skip the spot check
            Potential::Linear { slope } => slope.abs(),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Potential::Zero)
    }
}

/// One generator: a full-branch affine expanding map plus its potential.
#[derive(Debug, Clone)]
pub struct Generator {
    /// Branch count `m_i ≥ 2`; the map is `x ↦ m_i x mod 1`.
    pub branches: usize,
    pub potential: Potential,
    /// Declared Hölder constant `D_α(φ_i)`.
    pub holder_const: f64,
}

impl Generator {
    pub fn map(&self, x: f64) -> f64 {
        wrap(self.branches as f64 * x)
    }

    /// Inverse branch `j`: `x ↦ (x + j)/m`, contraction factor `1/m`.
    pub fn inverse_branch(&self, j: usize, x: f64) -> f64 {
        (wrap(x) + j as f64) / self.branches as f64
    }

    pub fn slope(&self) -> f64 {
        self.branches as f64
    }
}

/// A finitely generated expanding system on the circle.
#[derive(Debug, Clone)]
pub struct ExpandingSystem {
    generators: Vec<Generator>,
    /// Injectivity/shadowing radius.
    pub a: f64,
    /// Uniform inverse-branch contraction rate, valid for every generator.
    pub lambda: f64,
    /// Hölder exponent shared by all potentials.
    pub alpha: f64,
}

impl ExpandingSystem {
    pub fn new(generators: Vec<Generator>, a: f64, lambda: f64, alpha: f64) -> Result<Self> {
        if generators.len() < 2 {
            return Err(LabError::InvalidSystem(
                "alphabet must have at least two generators".into(),
            ));
        }
        if !(0.0 < lambda && lambda < 1.0) {
            return Err(LabError::InvalidSystem(format!("lambda {lambda} outside (0,1)")));
        }
        if !(0.0 < alpha && alpha <= 1.0) {
            return Err(LabError::InvalidSystem(format!("alpha {alpha} outside (0,1]")));
        }
        let mut max_branches = 0usize;
        for (i, g) in generators.iter().enumerate() {
            if g.branches < 2 {
                return Err(LabError::InvalidSystem(format!(
                    "generator {} has {} branches; need at least 2",
                    i + 1,
                    g.branches
                )));
            }
            // inverse branches contract by exactly 1/m_i
            if 1.0 / g.branches as f64 > lambda + 1e-12 {
                return Err(LabError::InvalidSystem(format!(
                    "lambda {lambda} does not dominate branch contraction 1/{}",
                    g.branches
                )));
            }
            if !g.holder_const.is_finite() || g.holder_const < 0.0 {
                return Err(LabError::InvalidSystem("bad Hölder constant".into()));
            }
            max_branches = max_branches.max(g.branches);
        }
        // distinct inverse branches of one generator are 1/m apart; a below
        // half of that keeps inverse lifts unique
        if !(a > 0.0 && a < 1.0 / (2.0 * max_branches as f64)) {
            return Err(LabError::InvalidSystem(format!(
                "a = {a} must lie in (0, 1/{})",
                2 * max_branches
            )));
        }
        // summability guard: finitely many branches with finite potentials
        for (i, g) in generators.iter().enumerate() {
            let s: f64 = (0..g.branches)
                .map(|j| g.potential.eval(g.inverse_branch(j, 0.37)).exp())
                .sum();
            if !s.is_finite() {
                return Err(LabError::InvalidSystem(format!(
                    "generator {} has non-summable potential",
                    i + 1
                )));
            }
        }
        Ok(ExpandingSystem { generators, a, lambda, alpha })
    }

    pub fn alphabet_size(&self) -> usize {
        self.generators.len()
    }

    pub fn generator(&self, letter: Letter) -> &Generator {
        &self.generators[letter as usize]
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn potential(&self, letter: Letter, x: f64) -> f64 {
        self.generators[letter as usize].potential.eval(x)
    }

    /// Spot-check each declared Hölder constant on random pairs.
    pub fn spot_check_holder(&self, rng: &mut impl Rng, pairs: usize) -> Result<()> {
        for (i, g) in self.generators.iter().enumerate() {
            for _ in 0..pairs {
                let x: f64 = rng.gen();
                let y: f64 = rng.gen();
                let d = circle_dist(x, y);
                if d < 1e-12 {
                    continue;
                }
                let q = (g.potential.eval(x) - g.potential.eval(y)).abs() / d.powf(self.alpha);
                if q > g.holder_const * (1.0 + 1e-9) + 1e-12 {
                    return Err(LabError::InvalidSystem(format!(
                        "generator {}: observed Hölder quotient {q:.6} exceeds declared {}",
                        i + 1,
                        g.holder_const
                    )));
                }
            }
        }
        Ok(())
    }

    /// `T_v(x)`, letters applied left to right.
    pub fn apply_word_map(&self, v: &Word, x: f64) -> f64 {
        v.letters()
            .iter()
            .fold(wrap(x), |y, &i| self.generator(i).map(y))
    }

    /// Forward orbit `[x, T_{i_1}x, T_{i_1 i_2}x, ..., T_v x]`.
    pub fn forward_orbit(&self, v: &Word, x: f64) -> Vec<f64> {
        let mut orbit = Vec::with_capacity(v.len() + 1);
        let mut y = wrap(x);
        orbit.push(y);
        for &i in v.letters() {
            y = self.generator(i).map(y);
            orbit.push(y);
        }
        orbit
    }

    /// Birkhoff-style potential sum `φ_v(x) = φ_{i_1}(x) + φ_{i_2}(T_{i_1}x) + ...`.
    pub fn potential_sum(&self, v: &Word, x: f64) -> f64 {
        let mut s = 0.0;
        let mut y = wrap(x);
        for &i in v.letters() {
            s += self.potential(i, y);
            y = self.generator(i).map(y);
        }
        s
    }

    /// Number of inverse branches of `T_v`.
    pub fn branch_count(&self, v: &Word) -> u128 {
        v.letters()
            .iter()
            .map(|&i| self.generator(i).branches as u128)
            .product()
    }

    /// All preimages of `x` under `T_v`, each paired with `φ_v` at the
    /// preimage. Enumeration is lexicographic in branch indices with the
    /// first letter outermost.
    pub fn inverse_branches(&self, v: &Word, x: f64) -> Result<Vec<(f64, f64)>> {
        self.inverse_branches_capped(v, x, DEFAULT_BRANCH_CAP)
    }

    pub fn inverse_branches_capped(&self, v: &Word, x: f64, cap: u128) -> Result<Vec<(f64, f64)>> {
        let count = self.branch_count(v);
        if count > cap {
            return Err(LabError::BranchCapExceeded { len: v.len(), count, cap });
        }
        Ok(self.inverse_rec(v.letters(), wrap(x)))
    }

    fn inverse_rec(&self, letters: &[Letter], x: f64) -> Vec<(f64, f64)> {
        match letters.split_first() {
            None => vec![(x, 0.0)],
            Some((&first, rest)) => {
                let g = self.generator(first);
                let inner = self.inverse_rec(rest, x);
                let mut out = Vec::with_capacity(g.branches * inner.len());
                for j in 0..g.branches {
                    for &(z, s) in &inner {
                        let y = g.inverse_branch(j, z);
                        out.push((y, g.potential.eval(y) + s));
                    }
                }
                out
            }
        }
    }

    /// `d_v(x,y) = max{ d(x,y), d(T_{[v]_j}x, T_{[v]_j}y), 1 ≤ j < |v| }`.
    pub fn dynamical_distance(&self, v: &Word, x: f64, y: f64) -> f64 {
        let mut d = circle_dist(x, y);
        let mut xx = wrap(x);
        let mut yy = wrap(y);
        for j in 0..v.len().saturating_sub(1) {
            let g = self.generator(v.letter(j));
            xx = g.map(xx);
            yy = g.map(yy);
            d = d.max(circle_dist(xx, yy));
        }
        d
    }
}

/// Cap on explicit preimage enumeration (2^20 branches).
pub const DEFAULT_BRANCH_CAP: u128 = 1 << 20;

/// Distortion constant and truncated-metric data derived from a system.
#[derive(Debug, Clone, Copy)]
pub struct MetricConstants {
    /// `C_φ = max_i D_α(φ_i) / (1 − λ^α)`.
    pub c_phi: f64,
    /// `Δ = max{4 C_φ, a^{−α}}`.
    pub delta: f64,
    pub alpha: f64,
    pub a: f64,
    pub lambda: f64,
}

impl MetricConstants {
    pub fn from_system(sys: &ExpandingSystem) -> Self {
        let dmax = sys
            .generators()
            .iter()
            .map(|g| g.holder_const)
            .fold(0.0_f64, f64::max);
        let c_phi = dmax / (1.0 - sys.lambda.powf(sys.alpha));
        let delta = (4.0 * c_phi).max(sys.a.powf(-sys.alpha));
        MetricConstants { c_phi, delta, alpha: sys.alpha, a: sys.a, lambda: sys.lambda }
    }

    /// Truncated Hölder distance `d*(x,y) = min{1, Δ d(x,y)^α}`.
    pub fn dstar(&self, x: f64, y: f64) -> f64 {
        (self.delta * circle_dist(x, y).powf(self.alpha)).min(1.0)
    }

    /// `d*` as a function of a raw arc distance.
    pub fn dstar_of_dist(&self, d: f64) -> f64 {
        (self.delta * d.powf(self.alpha)).min(1.0)
    }

    /// Locality scale `Δ^{−1/α}` below which `d* < 1`.
    pub fn locality_scale(&self) -> f64 {
        self.delta.powf(-1.0 / self.alpha)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn word_accessors() {
        let w = Word::parse("1221").unwrap();
        assert_eq!(w.len(), 4);
        assert_eq!(w.prefix(2), Word::parse("12").unwrap());
        assert_eq!(w.suffix(3), Word::parse("221").unwrap());
        assert_eq!(w.shifted(1), Word::parse("221").unwrap());
        assert_eq!(w.to_string(), "1221");
        let u = Word::parse("21").unwrap();
        assert_eq!(u.concat(&w).to_string(), "211221");
    }

    #[test]
    fn cyclic_extensions() {
        let w = Word::parse("12").unwrap();
        assert_eq!(Word::cyclic(&w, 5).to_string(), "12121");
        // ...121212 read from the right: last five letters are 21212
        assert_eq!(Word::cyclic_suffix(&w, 5).to_string(), "21212");
        assert_eq!(Word::cyclic_suffix(&w, 4).to_string(), "1212");
    }

    #[test]
    fn doubling_word_map() {
        let sys = fixtures::two_three_zero();
        // doubling twice: 4 * 0.1 mod 1
        let v = Word::parse("11").unwrap();
        assert_abs_diff_eq!(sys.apply_word_map(&v, 0.1), 0.4, epsilon = 1e-12);
        // empty word is the identity
        assert_abs_diff_eq!(sys.apply_word_map(&Word::empty(), 0.73), 0.73, epsilon = 1e-15);
        // T_2(T_1(0.2)) = 3 * 0.4 mod 1
        let v = Word::parse("12").unwrap();
        assert_abs_diff_eq!(sys.apply_word_map(&v, 0.2), 0.2, epsilon = 1e-12);
    }

    #[test]
    fn preimage_counts_and_consistency() {
        let sys = fixtures::two_three_zero();
        let v = Word::parse("1221").unwrap();
        let pre = sys.inverse_branches(&v, 0.3).unwrap();
        assert_eq!(pre.len(), 36); // 2*3*3*2
        for &(y, _) in &pre {
            assert_abs_diff_eq!(
                circle_dist(sys.apply_word_map(&v, y), 0.3),
                0.0,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn doubling_preimages_zero_potential() {
        let sys = fixtures::two_three_zero();
        let pre = sys.inverse_branches(&Word::parse("1").unwrap(), 0.0).unwrap();
        assert_eq!(pre.len(), 2);
        assert_abs_diff_eq!(pre[0].0, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(pre[1].0, 0.5, epsilon = 1e-15);
        assert_eq!(pre[0].1, 0.0);
        assert_eq!(pre[1].1, 0.0);
    }

    #[test]
    fn depth_two_potential_sums_by_hand() {
        // doubling with φ(x) = x: preimages of 0 under T_{11} are j/4 and the
        // Birkhoff sum at y is y + (2y mod 1)
        let sys = fixtures::doubling_linear_potential();
        let pre = sys.inverse_branches(&Word::parse("11").unwrap(), 0.0).unwrap();
        let pts: Vec<f64> = pre.iter().map(|p| p.0).collect();
        assert_eq!(pre.len(), 4);
        // lexicographic in branch indices, first letter outermost
        assert_abs_diff_eq!(pts[0], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(pts[1], 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(pts[2], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(pts[3], 0.75, epsilon = 1e-15);
        for &(y, s) in &pre {
            let expected = y + wrap(2.0 * y);
            assert_abs_diff_eq!(s, expected, epsilon = 1e-12);
        }
    }

    #[test]
    fn branch_cap_trips() {
        let sys = fixtures::two_three_zero();
        let v = Word::cyclic(&Word::parse("2").unwrap(), 14); // 3^14 > 2^20
        let err = sys.inverse_branches(&v, 0.1).unwrap_err();
        assert!(matches!(err, LabError::BranchCapExceeded { .. }));
    }

    #[test]
    fn dynamical_distance_examples() {
        let sys = fixtures::two_three_zero();
        let v = Word::parse("11").unwrap();
        assert_eq!(sys.dynamical_distance(&v, 0.4, 0.4), 0.0);
        assert_abs_diff_eq!(sys.dynamical_distance(&v, 0.0, 0.01), 0.02, epsilon = 1e-12);
    }

    #[test]
    fn dynamical_distance_matches_forward_loop() {
        let sys = fixtures::two_three_cos();
        let mut rng = crate::fit::test_rng(7);
        for _ in 0..50 {
            let v = crate::fixtures::random_word(&sys, &mut rng, 6);
            let x: f64 = rng.gen();
            let y: f64 = rng.gen();
            let mut expected = circle_dist(x, y);
            for j in 1..v.len() {
                let p = v.prefix(j);
                expected = expected
                    .max(circle_dist(sys.apply_word_map(&p, x), sys.apply_word_map(&p, y)));
            }
            assert_abs_diff_eq!(sys.dynamical_distance(&v, x, y), expected, epsilon = 1e-12);
        }
    }

    #[test]
    fn dstar_basics() {
        let sys = fixtures::two_three_cos();
        let mc = MetricConstants::from_system(&sys);
        assert_eq!(mc.dstar(0.3, 0.3), 0.0);
        // saturation at or beyond the injectivity radius
        assert_eq!(mc.dstar(0.0, 0.5), 1.0);
        assert!(mc.dstar(0.0, sys.a * 1.001) >= 1.0 - 1e-12);
        assert!((mc.delta - (1.0 / sys.a)).abs() < 1e-12 || mc.delta >= 4.0 * mc.c_phi);
    }

    #[test]
    fn distortion_bound_on_matched_preimages() {
        // |φ_v(x̃) − φ_v(ỹ)| ≤ C_φ d(x,y)^α for matched preimage pairs
        let sys = fixtures::two_three_cos();
        let mc = MetricConstants::from_system(&sys);
        let mut rng = crate::fit::test_rng(11);
        for _ in 0..40 {
            let v = crate::fixtures::random_word(&sys, &mut rng, 5);
            // stay away from the wrap so branch indices pair x with its lift
            let x: f64 = 0.3 + 0.4 * rng.gen::<f64>();
            let offset = (rng.gen::<f64>() - 0.5) * 1.5 * sys.a;
            let y = wrap(x + offset);
            let d = circle_dist(x, y);
            if d >= sys.a {
                continue;
            }
            let px = sys.inverse_branches(&v, x).unwrap();
            let py = sys.inverse_branches(&v, y).unwrap();
            // same enumeration order matches branches of x and y
            for (&(xt, sx), &(yt, sy)) in px.iter().zip(py.iter()) {
                // unique-lift property: matched preimages stay d_v-close and
                // contract per remaining letter
                assert!(sys.dynamical_distance(&v, xt, yt) < sys.a + 1e-12);
                assert!(
                    circle_dist(xt, yt) <= sys.lambda.powi(v.len() as i32) * d + 1e-12,
                    "preimage pair failed the contraction bound"
                );
                assert!(
                    (sx - sy).abs() <= mc.c_phi * d.powf(sys.alpha) + 1e-12,
                    "distortion bound violated"
                );
            }
        }
    }

    proptest! {
        #[test]
        fn dstar_triangle_inequality(x in 0.0..1.0f64, y in 0.0..1.0f64, z in 0.0..1.0f64) {
            let sys = fixtures::two_three_cos();
            let mc = MetricConstants::from_system(&sys);
            prop_assert!(mc.dstar(x, z) <= mc.dstar(x, y) + mc.dstar(y, z) + 1e-12);
        }

        #[test]
        fn concat_lengths(n in 0usize..6, m in 0usize..6) {
            let u = Word::new(vec![0; n]);
            let v = Word::new(vec![1; m]);
            prop_assert_eq!(u.concat(&v).len(), n + m);
        }

        #[test]
        fn concat_associative(a in proptest::collection::vec(0u8..2, 0..5),
                              b in proptest::collection::vec(0u8..2, 0..5),
                              c in proptest::collection::vec(0u8..2, 0..5)) {
            let (a, b, c) = (Word::new(a), Word::new(b), Word::new(c));
            prop_assert_eq!(a.concat(&b).concat(&c), a.concat(&b.concat(&c)));
        }
    }
}
