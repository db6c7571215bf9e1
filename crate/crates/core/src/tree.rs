//! Coordinates on the semi-infinite Cayley tree of order `k`.
//!
//! A vertex at level `n` is the digit string `(i_1, ..., i_n)` with every digit
//! in `1..=k`; the root is the empty string. Within a level, vertices are
//! listed in the forward order (lexicographic, digit 1 first), and the
//! successors of `x` are `(x,1), ..., (x,k)` in that order.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct TreeCoord {
    digits: Vec<u32>,
}

impl TreeCoord {
    pub fn root() -> Self {
        Self::default()
    }

    /// Panics if any digit is zero; upper bounds depend on `k` and are checked
    /// by [`TreeCoord::is_valid`].
    pub fn new(digits: Vec<u32>) -> Self {
        assert!(digits.iter().all(|&d| d >= 1), "tree digits start at 1");
        Self { digits }
    }

    pub fn digits(&self) -> &[u32] {
        &self.digits
    }

    pub fn level(&self) -> usize {
        self.digits.len()
    }

    pub fn is_root(&self) -> bool {
        self.digits.is_empty()
    }

    pub fn is_valid(&self, k: u32) -> bool {
        self.digits.iter().all(|&d| (1..=k).contains(&d))
    }

    pub fn child(&self, i: u32) -> Self {
        let mut digits = self.digits.clone();
        digits.push(i);
        Self::new(digits)
    }

    pub fn parent(&self) -> Option<Self> {
        let (_, head) = self.digits.split_last()?;
        Some(Self { digits: head.to_vec() })
    }

    /// 0-based position of this vertex inside its level, in forward order.
    pub fn flat_index(&self, k: u32) -> usize {
        self.digits.iter().fold(0usize, |acc, &d| acc * k as usize + (d as usize - 1))
    }

    /// Inverse of [`TreeCoord::flat_index`].
    pub fn from_flat_index(level: usize, k: u32, mut index: usize) -> Self {
        let mut digits = vec![0u32; level];
        for slot in digits.iter_mut().rev() {
            *slot = (index % k as usize) as u32 + 1;
            index /= k as usize;
        }
        Self { digits }
    }

    /// The first vertex `(1, ..., 1)` of level `level` in forward order.
    pub fn first_vertex(level: usize) -> Self {
        Self { digits: vec![1; level] }
    }
}

impl fmt::Display for TreeCoord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.digits.is_empty() {
            return write!(f, "(0)");
        }
        write!(f, "(")?;
        for (j, d) in self.digits.iter().enumerate() {
            if j > 0 {
                write!(f, ",")?;
            }
            write!(f, "{d}")?;
        }
        write!(f, ")")
    }
}

/// Direct successors of `x` in forward order. Reverse the result for the
/// backward order.
pub fn successors(x: &TreeCoord, k: u32) -> Vec<TreeCoord> {
    (1..=k).map(|i| x.child(i)).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelSet {
    pub n: usize,
    pub k: u32,
    pub vertices: Vec<TreeCoord>,
}

/// All `k^n` vertices at distance `n` from the root, forward order.
pub fn level_set(n: usize, k: u32) -> LevelSet {
    let count = (k as usize).pow(n as u32);
    let vertices = (0..count).map(|i| TreeCoord::from_flat_index(n, k, i)).collect();
    LevelSet { n, k, vertices }
}

/// `(|W_n|, |Λ_n|)`: level size and size of the ball of radius `n`.
pub fn volume_sizes(n: usize, k: u32) -> (usize, usize) {
    let k = k as usize;
    let level = k.pow(n as u32);
    let ball = if k == 1 { n + 1 } else { (k.pow(n as u32 + 1) - 1) / (k - 1) };
    (level, ball)
}

/// Vertices of `Λ_n`, level by level, each level in forward order. The
/// position of a vertex in this list is its site index in the oracle.
pub fn ball(n: usize, k: u32) -> Vec<TreeCoord> {
    (0..=n).flat_map(|m| level_set(m, k).vertices).collect()
}

/// Site index of `x` inside [`ball`] (valid when `x.level() <= n`).
pub fn ball_index(x: &TreeCoord, k: u32) -> usize {
    volume_sizes(x.level(), k).1 - volume_sizes(x.level(), k).0 + x.flat_index(k)
}
