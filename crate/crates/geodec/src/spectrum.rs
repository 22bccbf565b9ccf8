//! Eigenvalue multisets compared by bipartite matching.

use std::fmt;

use num_complex::Complex64;

use crate::linalg::{reflector, Matrix};

/// Eigenvalues of a real square matrix, conjugate pairs exact.
pub fn eigenvalues(a: &Matrix) -> Vec<Complex64> {
    if a.nrows() == 0 {
        return Vec::new();
    }
    let mut v: Vec<Complex64> = crate::linalg::to_faer(a)
        .eigenvalues()
        .or_else(|_| {
            let h = reflector(a.nrows());
            crate::linalg::to_faer(&(&h * a * &h)).eigenvalues()
        })
        .expect("eigenvalue iteration converges")
        .into_iter()
        .map(|z| Complex64::new(z.re, z.im))
        .collect();
    // Normalise signed zeros so sorting and conjugate checks see a clean real.
    for z in &mut v {
        if z.im == 0.0 {
            z.im = 0.0;
        }
    }
    v
}

/// Eigenvalues paired with their condition numbers `||x|| ||y|| / |yᴴx|`
/// from right eigenvectors `x` and left eigenvectors `y`. A defective or
/// numerically defective eigenvalue reports `f64::INFINITY`.
pub fn eigenvalue_conditions(a: &Matrix) -> Vec<(Complex64, f64)> {
    let n = a.nrows();
    if n == 0 {
        return Vec::new();
    }
    let (h, evd) = match crate::linalg::to_faer(a).eigen() {
        Ok(e) => (None, e),
        Err(_) => {
            let h = reflector(n);
            let e = crate::linalg::to_faer(&(&h * a * &h))
                .eigen()
                .expect("eigenvalue iteration converges after a reflection");
            (Some(h), e)
        }
    };
    let (u, s) = (evd.U(), evd.S().column_vector());
    let mut x = nalgebra::DMatrix::<Complex64>::from_fn(n, n, |i, j| {
        let z = u[(i, j)];
        Complex64::new(z.re, z.im)
    });
    if let Some(h) = h {
        x = h.map(|r| Complex64::new(r, 0.0)) * x;
    }
    let inv = x.clone().try_inverse();
    (0..n)
        .map(|j| {
            let lambda = Complex64::new(s[j].re, s[j].im);
            let kappa = inv.as_ref().map_or(f64::INFINITY, |y| {
                let k = x.column(j).norm() * y.row(j).norm();
                if k.is_finite() {
                    k
                } else {
                    f64::INFINITY
                }
            });
            (lambda, kappa)
        })
        .collect()
}

/// A multiset of complex numbers with a matching radius.
///
/// Two values `a`, `b` match when `|a - b| <= tol * max(1, |a|, |b|)`.
#[derive(Clone, PartialEq)]
pub struct SpectrumMultiset {
    values: Vec<Complex64>,
    tol: f64,
}

impl fmt::Debug for SpectrumMultiset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.sorted().iter().map(|z| fmt_complex(*z)).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

impl fmt::Display for SpectrumMultiset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

fn fmt_complex(z: Complex64) -> String {
    if z.im == 0.0 {
        format!("{:.6}", z.re)
    } else {
        format!("{:.6}{:+.6}i", z.re, z.im)
    }
}

impl SpectrumMultiset {
    pub fn new(values: Vec<Complex64>, tol: f64) -> Self {
        Self { values, tol }
    }

    pub fn empty(tol: f64) -> Self {
        Self::new(Vec::new(), tol)
    }

    pub fn from_real(values: &[f64], tol: f64) -> Self {
        Self::new(
            values.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
            tol,
        )
    }

    /// From `[re, im]` pairs.
    pub fn from_pairs(pairs: &[[f64; 2]], tol: f64) -> Self {
        Self::new(
            pairs.iter().map(|p| Complex64::new(p[0], p[1])).collect(),
            tol,
        )
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Ascending real part, then ascending imaginary part.
    pub fn sorted(&self) -> Vec<Complex64> {
        let mut v = self.values.clone();
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        v
    }

    pub fn to_pairs(&self) -> Vec<[f64; 2]> {
        self.sorted().iter().map(|z| [z.re, z.im]).collect()
    }

    fn radius(&self, a: Complex64, b: Complex64) -> f64 {
        self.tol * 1f64.max(a.norm()).max(b.norm())
    }

    pub fn close(&self, a: Complex64, b: Complex64) -> bool {
        (a - b).norm() <= self.radius(a, b)
    }

    /// Multiset union (⊎).
    pub fn union(&self, other: &SpectrumMultiset) -> Self {
        let mut v = self.values.clone();
        v.extend_from_slice(&other.values);
        Self::new(v, self.tol)
    }

    pub fn is_conjugate_closed(&self) -> bool {
        let conj = Self::new(self.values.iter().map(|z| z.conj()).collect(), self.tol);
        self.equals(&conj)
    }

    /// Maximum matching between `self` (left) and `other` (right); returns for
    /// each right index the matched left index.
    fn matching(&self, other: &SpectrumMultiset) -> Vec<Option<usize>> {
        let adj: Vec<Vec<usize>> = other
            .values
            .iter()
            .map(|&b| {
                (0..self.values.len())
                    .filter(|&i| self.close(self.values[i], b))
                    .collect()
            })
            .collect();
        let mut owner: Vec<Option<usize>> = vec![None; self.values.len()];
        for r in 0..other.values.len() {
            let mut seen = vec![false; self.values.len()];
            augment(r, &adj, &mut owner, &mut seen);
        }
        let mut matched = vec![None; other.values.len()];
        for (l, o) in owner.iter().enumerate() {
            if let Some(r) = o {
                matched[*r] = Some(l);
            }
        }
        matched
    }

    /// `other ⊆ self` as multisets.
    pub fn contains(&self, other: &SpectrumMultiset) -> bool {
        other.len() <= self.len() && self.matching(other).iter().all(Option::is_some)
    }

    pub fn equals(&self, other: &SpectrumMultiset) -> bool {
        self.len() == other.len() && self.contains(other)
    }

    /// Multiset intersection: the elements of `self` paired in a maximum
    /// matching with `other`.
    pub fn intersection(&self, other: &SpectrumMultiset) -> Self {
        let m = self.matching(other);
        let v = m.iter().flatten().map(|&l| self.values[l]).collect();
        Self::new(v, self.tol)
    }

    /// Multiset difference `self - other` (elements of `self` left unmatched).
    pub fn difference(&self, other: &SpectrumMultiset) -> Self {
        let m = self.matching(other);
        let mut used = vec![false; self.len()];
        for l in m.iter().flatten() {
            used[*l] = true;
        }
        let v = (0..self.len())
            .filter(|&i| !used[i])
            .map(|i| self.values[i])
            .collect();
        Self::new(v, self.tol)
    }

    /// Replace each cluster of values (connected under
    /// `|a - b| <= radius * max(1, |a|, |b|)`) by the cluster mean.
    ///
    /// Eigenvalues computed for a defective multiple eigenvalue of order `k`
    /// spread by roughly `eps^(1/k)`, while their mean stays accurate to
    /// rounding level.
    pub fn cluster_averaged(&self, radius: f64) -> Self {
        let n = self.values.len();
        let mut label: Vec<usize> = (0..n).collect();
        fn root(label: &mut [usize], mut i: usize) -> usize {
            while label[i] != i {
                label[i] = label[label[i]];
                i = label[i];
            }
            i
        }
        for i in 0..n {
            for j in i + 1..n {
                let (a, b) = (self.values[i], self.values[j]);
                if (a - b).norm() <= radius * 1f64.max(a.norm()).max(b.norm()) {
                    let (ri, rj) = (root(&mut label, i), root(&mut label, j));
                    label[ri] = rj;
                }
            }
        }
        let mut sum = vec![Complex64::new(0.0, 0.0); n];
        let mut count = vec![0usize; n];
        for i in 0..n {
            let r = root(&mut label, i);
            sum[r] += self.values[i];
            count[r] += 1;
        }
        let values = (0..n)
            .map(|i| {
                let r = root(&mut label, i);
                let mut z = sum[r] / count[r] as f64;
                if self.values[i].im == 0.0 {
                    z.im = 0.0;
                }
                z
            })
            .collect();
        Self::new(values, self.tol)
    }

    /// True when some cross pair sits within a decade of the matching radius,
    /// so a containment verdict could flip under a small tolerance change.
    pub fn straddles(&self, other: &SpectrumMultiset) -> bool {
        self.values.iter().any(|&a| {
            other.values.iter().any(|&b| {
                let d = (a - b).norm();
                let r = self.radius(a, b);
                d > 0.1 * r && d < 10.0 * r
            })
        })
    }
}

fn augment(r: usize, adj: &[Vec<usize>], owner: &mut [Option<usize>], seen: &mut [bool]) -> bool {
    for &l in &adj[r] {
        if seen[l] {
            continue;
        }
        seen[l] = true;
        if owner[l].is_none() || augment(owner[l].unwrap(), adj, owner, seen) {
            owner[l] = Some(r);
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn cluster_mean_recovers_defective_eigenvalue() {
        // Jordan block of order 3 at -1.5 with a rounding-size perturbation.
        let mut a = Matrix::from_fn(3, 3, |i, j| match j as isize - i as isize {
            0 => -1.5,
            1 => 1.0,
            _ => 0.0,
        });
        a[(2, 0)] = 1e-15;
        let raw = SpectrumMultiset::new(eigenvalues(&a), 1e-6);
        let target = SpectrumMultiset::from_real(&[-1.5; 3], 1e-6);
        assert!(!raw.equals(&target));
        assert!(raw.cluster_averaged(1e-3).equals(&target));
        let apart = SpectrumMultiset::from_real(&[-1.0, -2.0], 1e-6);
        assert_eq!(apart.cluster_averaged(1e-3).sorted(), apart.sorted());
    }

    #[test]
    fn matching_handles_reordering_and_multiplicity() {
        let a = SpectrumMultiset::from_real(&[-1.0, -2.0, -1.0], 1e-6);
        let b = SpectrumMultiset::from_real(&[-1.0, -1.0 + 1e-9, -2.0], 1e-6);
        assert!(a.equals(&b));
        let c = SpectrumMultiset::from_real(&[-1.0, -2.0, -2.0], 1e-6);
        assert!(!a.equals(&c));
        assert_eq!(a.intersection(&c).len(), 2);
        assert_eq!(a.difference(&c).len(), 1);
    }

    #[test]
    fn greedy_would_fail_but_matching_succeeds() {
        let tol = 0.5;
        let a = SpectrumMultiset::from_real(&[0.0, 0.9], tol);
        let b = SpectrumMultiset::from_real(&[0.45, -0.4], tol);
        assert!(a.equals(&b));
    }

    #[test]
    fn conjugate_closure() {
        let ok = SpectrumMultiset::from_pairs(&[[-1.0, 2.0], [-1.0, -2.0], [3.0, 0.0]], 1e-6);
        assert!(ok.is_conjugate_closed());
        let bad = SpectrumMultiset::from_pairs(&[[-1.0, 2.0]], 1e-6);
        assert!(!bad.is_conjugate_closed());
    }

    #[test]
    fn conditions_of_normal_and_nonnormal() {
        let d = crate::linalg::from_rows(&[&[1.0, 0.0], &[0.0, 2.0]]);
        assert!(eigenvalue_conditions(&d)
            .iter()
            .all(|(_, k)| (k - 1.0).abs() < 1e-12));
        let t = crate::linalg::from_rows(&[&[1.0, 1e4], &[0.0, 2.0]]);
        let k = eigenvalue_conditions(&t);
        assert!(k.iter().all(|(_, k)| *k > 1e3 && *k < 1e5), "{k:?}");
    }

    #[test]
    fn eigenvalues_of_rotation() {
        let a = crate::linalg::from_rows(&[&[0.0, -2.0], &[2.0, 0.0]]);
        let s = SpectrumMultiset::new(eigenvalues(&a), 1e-9);
        assert!(s.equals(&SpectrumMultiset::from_pairs(
            &[[0.0, 2.0], [0.0, -2.0]],
            1e-9
        )));
        assert!(s.is_conjugate_closed());
    }

    proptest! {
        #[test]
        fn union_contains_both_parts(xs in prop::collection::vec(-10.0f64..10.0, 0..6),
                                     ys in prop::collection::vec(-10.0f64..10.0, 0..6)) {
            let a = SpectrumMultiset::from_real(&xs, 1e-9);
            let b = SpectrumMultiset::from_real(&ys, 1e-9);
            let u = a.union(&b);
            prop_assert!(u.contains(&a));
            prop_assert!(u.contains(&b));
            prop_assert!(u.difference(&a).equals(&b));
        }

        #[test]
        fn equality_is_permutation_invariant(mut xs in prop::collection::vec(-5.0f64..5.0, 1..8)) {
            let a = SpectrumMultiset::from_real(&xs, 1e-9);
            xs.reverse();
            let b = SpectrumMultiset::from_real(&xs, 1e-9);
            prop_assert!(a.equals(&b));
        }
    }
}
