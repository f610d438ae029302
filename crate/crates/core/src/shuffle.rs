//! Permutations in one-line notation, the shuffle sets `sh(i, j)` and shuffles
//! of two permutations.
//!
//! Storage is 0-indexed; `from_one_line`, `one_line` and `Display` use the
//! 1-indexed notation.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Permutation {
    map: Vec<usize>,
}

impl TryFrom<Vec<usize>> for Permutation {
    type Error = Error;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        Permutation::from_one_line(&v)
    }
}

impl From<Permutation> for Vec<usize> {
    fn from(p: Permutation) -> Self {
        p.one_line()
    }
}

impl Permutation {
    pub fn identity(m: usize) -> Self {
        Permutation { map: (0..m).collect() }
    }

    /// From 1-indexed one-line notation `(rho(1), ..., rho(m))`.
    pub fn from_one_line(v: &[usize]) -> Result<Self> {
        let m = v.len();
        let mut seen = vec![false; m];
        let mut map = Vec::with_capacity(m);
        for &x in v {
            if x == 0 || x > m || seen[x - 1] {
                return Err(Error::InvalidInput(format!("{v:?} is not a permutation of 1..{m}")));
            }
            seen[x - 1] = true;
            map.push(x - 1);
        }
        Ok(Permutation { map })
    }

    /// From 0-indexed images.
    pub fn from_zero_based(map: Vec<usize>) -> Result<Self> {
        let v: Vec<usize> = map.iter().map(|x| x + 1).collect();
        Self::from_one_line(&v)
    }

    pub fn one_line(&self) -> Vec<usize> {
        self.map.iter().map(|x| x + 1).collect()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.map
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// 0-indexed image of a 0-indexed point.
    pub fn apply(&self, k: usize) -> usize {
        self.map[k]
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(i, &x)| i == x)
    }

    /// `(self ∘ other)(k) = self(other(k))`.
    pub fn compose(&self, other: &Permutation) -> Result<Permutation> {
        if self.len() != other.len() {
            return Err(Error::SizeMismatch(self.len(), other.len()));
        }
        Ok(Permutation { map: other.map.iter().map(|&k| self.map[k]).collect() })
    }

    pub fn invert(&self) -> Permutation {
        let mut inv = vec![0; self.len()];
        for (i, &x) in self.map.iter().enumerate() {
            inv[x] = i;
        }
        Permutation { map: inv }
    }

    /// `self ∪ other`: acts as `self` on the first block and as `other`
    /// (shifted) on the second.
    pub fn direct_sum(&self, other: &Permutation) -> Permutation {
        let i = self.len();
        let mut map = self.map.clone();
        map.extend(other.map.iter().map(|x| x + i));
        Permutation { map }
    }

    /// Whether `self` lies in `sh(i, m - i)`.
    pub fn is_shuffle(&self, i: usize) -> bool {
        i <= self.len()
            && self.map[..i].windows(2).all(|w| w[0] < w[1])
            && self.map[i..].windows(2).all(|w| w[0] < w[1])
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.one_line().iter().map(|x| x.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// All increasing `i`-subsets of `0..m` in lexicographic order.
fn combinations(m: usize, i: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..i).collect();
    if i > m {
        return out;
    }
    loop {
        out.push(cur.clone());
        let mut k = i;
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            if cur[k] < m - i + k {
                cur[k] += 1;
                for l in k + 1..i {
                    cur[l] = cur[l - 1] + 1;
                }
                break;
            }
        }
    }
}

/// The shuffle with `rho({1..i}) = first` (0-indexed, increasing).
fn shuffle_from_subset(m: usize, first: &[usize]) -> Permutation {
    let mut in_first = vec![false; m];
    for &x in first {
        in_first[x] = true;
    }
    let mut map = first.to_vec();
    map.extend((0..m).filter(|&x| !in_first[x]));
    Permutation { map }
}

/// `sh(i, j)`: permutations `rho` of `{1..i+j}` with `rho(1) < ... < rho(i)` and
/// `rho(i+1) < ... < rho(i+j)`, in lexicographic order of one-line notation.
pub fn shuffles(i: usize, j: usize) -> Vec<Permutation> {
    let m = i + j;
    combinations(m, i).iter().map(|s| shuffle_from_subset(m, s)).collect()
}

/// `sh(rho', rho'')` for `rho'` on the first `i` points and `rho''` on the next
/// `j` points: all `rho = tau ∘ (rho' ∪ rho'')` with `tau` in `sh(i, j)`.
///
/// Equivalently `rho^{-1} = (rho'^{-1} ∪ rho''^{-1}) ∘ tau^{-1}`: the horizontal
/// order of the combined forms interleaves the two horizontal orders.
/// Output follows the order of `tau` in `shuffles(i, j)`.
pub fn shuffle_of_permutations(rho1: &Permutation, rho2: &Permutation) -> Vec<Permutation> {
    let sum = rho1.direct_sum(rho2);
    shuffles(rho1.len(), rho2.len())
        .iter()
        .map(|tau| tau.compose(&sum).expect("sizes agree"))
        .collect()
}

/// Recovers `(tau, rho', rho'')` from `rho = tau ∘ (rho' ∪ rho'')`.
pub fn factor_shuffle(rho: &Permutation, i: usize) -> Result<(Permutation, Permutation, Permutation)> {
    let m = rho.len();
    if i > m {
        return Err(Error::SizeMismatch(i, m));
    }
    let mut first: Vec<usize> = rho.map[..i].to_vec();
    first.sort_unstable();
    let tau = shuffle_from_subset(m, &first);
    let sum = tau.invert().compose(rho)?;
    let p1 = Permutation { map: sum.map[..i].to_vec() };
    let p2 = Permutation { map: sum.map[i..].iter().map(|x| x - i).collect() };
    if p1.map.iter().any(|&x| x >= i) {
        return Err(Error::InvalidInput("block structure violated".into()));
    }
    Ok((tau, p1, p2))
}

/// All permutations of `0..m` in lexicographic order.
pub fn all_permutations(m: usize) -> Vec<Permutation> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..m).collect();
    loop {
        out.push(Permutation { map: cur.clone() });
        // next lexicographic permutation
        if m < 2 {
            return out;
        }
        let mut k = m - 1;
        while k > 0 && cur[k - 1] >= cur[k] {
            k -= 1;
        }
        if k == 0 {
            return out;
        }
        let mut l = m - 1;
        while cur[l] <= cur[k - 1] {
            l -= 1;
        }
        cur.swap(k - 1, l);
        cur[k..].reverse();
    }
}

pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: u64 = 1;
    for t in 0..k {
        r = r * (n - t) as u64 / (t + 1) as u64;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn p(v: &[usize]) -> Permutation {
        Permutation::from_one_line(v).unwrap()
    }

    /// Independent binomial via Pascal's triangle.
    fn pascal(n: usize, k: usize) -> u64 {
        let mut row = vec![1u64];
        for _ in 0..n {
            let mut next = vec![1u64; row.len() + 1];
            for t in 1..row.len() {
                next[t] = row[t - 1] + row[t];
            }
            row = next;
        }
        row[k]
    }

    #[test]
    fn small_examples() {
        assert_eq!(shuffles(0, 3), vec![Permutation::identity(3)]);
        assert_eq!(shuffles(1, 1), vec![p(&[1, 2]), p(&[2, 1])]);
        assert_eq!(shuffles(2, 2).len(), 6);
        assert_eq!(shuffles(0, 0), vec![Permutation::identity(0)]);
    }

    #[test]
    fn sizes_are_binomial_and_match_filtered_symmetric_group() {
        for i in 0..=6 {
            for j in 0..=6 {
                let s = shuffles(i, j);
                assert_eq!(s.len() as u64, pascal(i + j, i));
                if i + j <= 7 {
                    let brute: Vec<Permutation> =
                        all_permutations(i + j).into_iter().filter(|q| q.is_shuffle(i)).collect();
                    assert_eq!(s, brute);
                }
            }
        }
    }

    #[test]
    fn block_swap_relates_shuffles() {
        for m in 0..=8 {
            for i in 0..=m {
                let j = m - i;
                // swap(k) = i + k for k < j, k - j otherwise
                let swap = Permutation::from_zero_based((0..m).map(|k| if k < j { i + k } else { k - j }).collect()).unwrap();
                let lhs: BTreeSet<Permutation> = shuffles(i, j).iter().map(|r| r.compose(&swap).unwrap()).collect();
                let rhs: BTreeSet<Permutation> = shuffles(j, i).into_iter().collect();
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn compose_and_invert() {
        let a = p(&[2, 3, 1]);
        assert_eq!(a.compose(&a).unwrap(), p(&[3, 1, 2]));
        assert!(a.compose(&a.invert()).unwrap().is_identity());
        assert_eq!(Permutation::identity(4).invert(), Permutation::identity(4));
        assert!(matches!(a.compose(&Permutation::identity(2)), Err(Error::SizeMismatch(3, 2))));
        assert_eq!(a.to_string(), "(2,3,1)");
    }

    #[test]
    fn rejects_non_permutations() {
        assert!(Permutation::from_one_line(&[1, 1]).is_err());
        assert!(Permutation::from_one_line(&[0, 1]).is_err());
        assert!(Permutation::from_one_line(&[3, 1]).is_err());
    }

    #[test]
    fn permutation_shuffle_examples() {
        let one = shuffle_of_permutations(&Permutation::identity(1), &Permutation::identity(0));
        assert_eq!(one, vec![Permutation::identity(1)]);
        let s = shuffle_of_permutations(&Permutation::identity(2), &Permutation::identity(2));
        assert_eq!(s.len(), 6);
        for r in &s {
            assert!(r.is_shuffle(2));
        }
    }

    #[test]
    fn permutation_shuffles_factor_uniquely() {
        for i in 0..=3 {
            for j in 0..=3 {
                for a in all_permutations(i) {
                    for b in all_permutations(j) {
                        let s = shuffle_of_permutations(&a, &b);
                        assert_eq!(s.len() as u64, binomial(i + j, i));
                        let set: BTreeSet<_> = s.iter().cloned().collect();
                        assert_eq!(set.len(), s.len());
                        for r in &s {
                            let (tau, a2, b2) = factor_shuffle(r, i).unwrap();
                            assert!(tau.is_shuffle(i));
                            assert_eq!((&a2, &b2), (&a, &b));
                        }
                    }
                }
            }
        }
    }

    /// The horizontal order of the combined forms is an interleaving of the two
    /// horizontal orders, shifted on the second block.
    #[test]
    fn inverse_orders_interleave() {
        let a = p(&[2, 1]);
        let b = p(&[3, 1, 2]);
        let oa: Vec<usize> = a.invert().one_line();
        let ob: Vec<usize> = b.invert().one_line().iter().map(|x| x + 2).collect();
        for r in shuffle_of_permutations(&a, &b) {
            let o = r.invert().one_line();
            let first: Vec<usize> = o.iter().copied().filter(|&x| x <= 2).collect();
            let second: Vec<usize> = o.iter().copied().filter(|&x| x > 2).collect();
            assert_eq!(first, oa);
            assert_eq!(second, ob);
        }
    }

    proptest! {
        #[test]
        fn random_permutation_shuffles(i in 0usize..5, j in 0usize..5, seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut va: Vec<usize> = (1..=i).collect();
            va.shuffle(&mut rng);
            let mut vb: Vec<usize> = (1..=j).collect();
            vb.shuffle(&mut rng);
            let s = shuffle_of_permutations(&p(&va), &p(&vb));
            prop_assert_eq!(s.len() as u64, pascal(i + j, i));
        }

        #[test]
        fn group_laws(seed in any::<u64>(), m in 0usize..7) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mk = |rng: &mut rand_chacha::ChaCha8Rng| { let mut v: Vec<usize> = (1..=m).collect(); v.shuffle(rng); p(&v) };
            let (x, y, z) = (mk(&mut rng), mk(&mut rng), mk(&mut rng));
            prop_assert_eq!(x.compose(&y).unwrap().compose(&z).unwrap(), x.compose(&y.compose(&z).unwrap()).unwrap());
            prop_assert_eq!(x.compose(&y).unwrap().invert(), y.invert().compose(&x.invert()).unwrap());
        }
    }
}
