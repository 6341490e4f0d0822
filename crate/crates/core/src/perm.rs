//! Permutations and Koszul signs.
//!
//! A permutation `p` of `0..n` is stored as its image list: `p[i]` is the image of `i`.

/// All permutations of `0..n` in lexicographic order.
pub fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    loop {
        out.push(cur.clone());
        // next lexicographic permutation
        let Some(i) = (1..n).rev().find(|&i| cur[i - 1] < cur[i]) else {
            break;
        };
        let j = (i..n).rev().find(|&j| cur[j] > cur[i - 1]).unwrap();
        cur.swap(i - 1, j);
        cur[i..].reverse();
    }
    out
}

pub fn identity(n: usize) -> Vec<usize> {
    (0..n).collect()
}

/// The adjacent transposition `s_k` of `0..n`.
pub fn transposition(n: usize, k: usize) -> Vec<usize> {
    let mut p = identity(n);
    p.swap(k, k + 1);
    p
}

pub fn is_identity(p: &[usize]) -> bool {
    p.iter().enumerate().all(|(i, &x)| i == x)
}

pub fn inverse(p: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; p.len()];
    for (i, &x) in p.iter().enumerate() {
        inv[x] = i;
    }
    inv
}

/// `a ∘ b` (apply `b` first).
pub fn compose(a: &[usize], b: &[usize]) -> Vec<usize> {
    b.iter().map(|&x| a[x]).collect()
}

pub fn is_permutation(p: &[usize]) -> bool {
    let mut seen = vec![false; p.len()];
    for &x in p {
        if x >= p.len() || seen[x] {
            return false;
        }
        seen[x] = true;
    }
    true
}

/// Writes `p` as a product `s_{k_1} ∘ s_{k_2} ∘ … ∘ s_{k_r}` of adjacent transpositions
/// `s_k = (k k+1)`, returning `[k_1, …, k_r]`.
pub fn adjacent_decomposition(p: &[usize]) -> Vec<usize> {
    // bubble sort p down to the identity: p ∘ s_{j_1} ∘ … ∘ s_{j_r} = id,
    // so p = s_{j_r} ∘ … ∘ s_{j_1}
    let mut cur = p.to_vec();
    let mut steps = Vec::new();
    let n = cur.len();
    for _ in 0..n {
        for j in 0..n.saturating_sub(1) {
            if cur[j] > cur[j + 1] {
                cur.swap(j, j + 1);
                steps.push(j);
            }
        }
    }
    steps.reverse();
    steps
}

/// Sign of a permutation as ±1.
pub fn parity(p: &[usize]) -> i64 {
    let mut inv = 0usize;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            if p[i] > p[j] {
                inv += 1;
            }
        }
    }
    if inv % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Koszul sign of rearranging a sequence of homogeneous elements: `degrees[i]` is the
/// degree of the element in position `i`, and `order` lists old positions in their new
/// order. Returns `true` when the sign is negative.
pub fn koszul_negative(degrees: &[i32], order: &[usize]) -> bool {
    let mut odd = 0usize;
    for i in 0..order.len() {
        if degrees[order[i]].rem_euclid(2) == 0 {
            continue;
        }
        for j in i + 1..order.len() {
            if order[j] < order[i] && degrees[order[j]].rem_euclid(2) == 1 {
                odd += 1;
            }
        }
    }
    odd % 2 == 1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_and_order() {
        assert_eq!(all_permutations(0), vec![Vec::<usize>::new()]);
        assert_eq!(all_permutations(3).len(), 6);
        assert_eq!(all_permutations(3)[1], vec![0, 2, 1]);
    }

    #[test]
    fn decomposition_recomposes() {
        for p in all_permutations(4) {
            let mut acc = identity(4);
            for k in adjacent_decomposition(&p) {
                let mut s = identity(4);
                s.swap(k, k + 1);
                acc = compose(&acc, &s);
            }
            assert_eq!(acc, p);
        }
    }

    #[test]
    fn koszul_examples() {
        // moving an odd element past two odd elements: +1
        assert!(!koszul_negative(&[1, 1, 1], &[2, 0, 1]));
        // swapping two odd elements: -1
        assert!(koszul_negative(&[1, 1], &[1, 0]));
        // even elements commute
        assert!(!koszul_negative(&[2, 1, 4], &[2, 1, 0]));
    }

    #[test]
    fn parity_matches_transpositions() {
        for p in all_permutations(4) {
            let r = adjacent_decomposition(&p).len() as i64;
            assert_eq!(parity(&p), if r % 2 == 0 { 1 } else { -1 });
        }
    }
}
