//! Permutation enumeration used by the exact oracles.

/// Calls `visit` once for every permutation of `0..n`, in lexicographic order.
/// The slice maps position `i` to its image `perm[i]`.
pub fn for_each_permutation(n: usize, mut visit: impl FnMut(&[usize])) {
    let mut perm: Vec<usize> = (0..n).collect();
    loop {
        visit(&perm);
        if !next_permutation(&mut perm) {
            break;
        }
    }
}

/// Lexicographic successor in place; returns `false` after the last one.
fn next_permutation(perm: &mut [usize]) -> bool {
    let n = perm.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && perm[i - 1] >= perm[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while perm[j] <= perm[i - 1] {
        j -= 1;
    }
    perm.swap(i - 1, j);
    perm[i..].reverse();
    true
}

/// Owning iterator over all permutations of `0..n`.
pub struct Permutations {
    current: Option<Vec<usize>>,
}

impl Permutations {
    pub fn new(n: usize) -> Self {
        Self {
            current: Some((0..n).collect()),
        }
    }
}

impl Iterator for Permutations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.take()?;
        let mut succ = out.clone();
        if next_permutation(&mut succ) {
            self.current = Some(succ);
        }
        Some(out)
    }
}

pub(crate) fn fixed_points(perm: &[usize]) -> usize {
    perm.iter().enumerate().filter(|(i, &s)| *i == s).count()
}

/// Number of 2-cycles in the disjoint-cycle decomposition.
pub(crate) fn two_cycles(perm: &[usize]) -> usize {
    perm.iter()
        .enumerate()
        .filter(|(i, &s)| s > *i && perm[s] == *i)
        .count()
}
