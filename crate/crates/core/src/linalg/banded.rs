//! Reverse Cuthill-McKee ordering and banded LU for sparse square systems.

use std::collections::VecDeque;

use num_complex::Complex;

use super::CsrMatrix;
use crate::error::{Error, Result};
use crate::scalar::{czero, Real};

/// Splits the structural graph of `a` into connected components, each
/// returned as a list of global indices in reverse Cuthill-McKee order.
pub fn rcm_components<T: Real>(a: &CsrMatrix<T>) -> Vec<Vec<usize>> {
    let n = a.rows();
    let mut adj = vec![Vec::new(); n];
    for (i, j, _) in a.triplets() {
        if i != j {
            adj[i].push(j);
            adj[j].push(i);
        }
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }
    let deg: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut seen = vec![false; n];
    let mut stamp = vec![usize::MAX; n];
    let mut out = Vec::new();
    for s in 0..n {
        if seen[s] {
            continue;
        }
        let members = levels(s, &adj, &mut stamp, out.len() * 2).concat();
        for &m in &members {
            seen[m] = true;
        }
        let mut start = *members.iter().min_by_key(|&&m| (deg[m], m)).expect("non-empty component");
        let far = levels(start, &adj, &mut stamp, out.len() * 2 + 1);
        if let Some(last) = far.last() {
            start = *last.iter().min_by_key(|&&m| (deg[m], m)).expect("non-empty level");
        }
        let mut order = cuthill_mckee(start, &adj, &deg, members.len());
        order.reverse();
        out.push(order);
    }
    out
}

fn levels(start: usize, adj: &[Vec<usize>], stamp: &mut [usize], tag: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![start]];
    stamp[start] = tag;
    loop {
        let mut next = Vec::new();
        for &u in out.last().expect("at least one level") {
            for &v in &adj[u] {
                if stamp[v] != tag {
                    stamp[v] = tag;
                    next.push(v);
                }
            }
        }
        if next.is_empty() {
            return out;
        }
        out.push(next);
    }
}

fn cuthill_mckee(start: usize, adj: &[Vec<usize>], deg: &[usize], size: usize) -> Vec<usize> {
    let mut order = Vec::with_capacity(size);
    let mut visited = std::collections::HashSet::with_capacity(size);
    let mut queue = VecDeque::new();
    visited.insert(start);
    queue.push_back(start);
    while let Some(u) = queue.pop_front() {
        order.push(u);
        let mut nbrs: Vec<usize> = adj[u].iter().copied().filter(|v| !visited.contains(v)).collect();
        nbrs.sort_by_key(|&v| (deg[v], v));
        for v in nbrs {
            visited.insert(v);
            queue.push_back(v);
        }
    }
    order
}

/// LU factorization with partial pivoting of a banded matrix, using the
/// column-major band layout where entry `(i, j)` lives at `kv + i - j + j * ldab`.
#[derive(Clone, Debug)]
pub struct BandLu<T> {
    n: usize,
    kl: usize,
    kv: usize,
    ldab: usize,
    ab: Vec<Complex<T>>,
    piv: Vec<usize>,
}

impl<T: Real> BandLu<T> {
    /// Factors the `n × n` matrix with `kl` sub- and `ku` super-diagonals given
    /// by its nonzero entries. Entries outside the band are a caller bug.
    pub fn factor(
        n: usize,
        kl: usize,
        ku: usize,
        entries: impl IntoIterator<Item = (usize, usize, Complex<T>)>,
    ) -> Result<Self> {
        let kv = kl + ku;
        let ldab = 2 * kl + ku + 1;
        let mut ab = vec![czero(); ldab * n];
        for (i, j, v) in entries {
            assert!(i + ku >= j && j + kl >= i, "entry ({i}, {j}) outside band kl={kl} ku={ku}");
            ab[kv + i - j + j * ldab] += v;
        }
        let mut lu = Self { n, kl, kv, ldab, ab, piv: vec![0; n] };
        lu.factorize(ku)?;
        Ok(lu)
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> usize {
        self.kv + i - j + j * self.ldab
    }

    fn factorize(&mut self, ku: usize) -> Result<()> {
        let n = self.n;
        let mut ju = 0usize;
        for j in 0..n {
            let km = self.kl.min(n - 1 - j);
            let mut jp = 0;
            let mut best = T::zero();
            for off in 0..=km {
                let v = self.ab[self.at(j + off, j)].norm();
                if v > best {
                    best = v;
                    jp = off;
                }
            }
            self.piv[j] = j + jp;
            if best == T::zero() {
                return Err(Error::Singular);
            }
            ju = ju.max((j + ku + jp).min(n - 1));
            if jp != 0 {
                for c in j..=ju {
                    let (a, b) = (self.at(j, c), self.at(j + jp, c));
                    self.ab.swap(a, b);
                }
            }
            if km > 0 {
                let pivot = self.ab[self.at(j, j)];
                let inv = Complex::new(T::one(), T::zero()) / pivot;
                let base = self.at(j + 1, j);
                for v in &mut self.ab[base..base + km] {
                    *v *= inv;
                }
                for c in j + 1..=ju {
                    let ajc = self.ab[self.at(j, c)];
                    if ajc == czero() {
                        continue;
                    }
                    let dst = self.at(j + 1, c);
                    for i in 0..km {
                        let l = self.ab[base + i];
                        self.ab[dst + i] -= l * ajc;
                    }
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves `A x = b` in place.
    pub fn solve_in_place(&self, b: &mut [Complex<T>]) {
        let n = self.n;
        assert_eq!(b.len(), n, "rhs length mismatch");
        for j in 0..n.saturating_sub(1) {
            let lm = self.kl.min(n - 1 - j);
            let l = self.piv[j];
            if l != j {
                b.swap(l, j);
            }
            let bj = b[j];
            if bj == czero() {
                continue;
            }
            let base = self.at(j + 1, j);
            for i in 0..lm {
                b[j + 1 + i] -= self.ab[base + i] * bj;
            }
        }
        for j in (0..n).rev() {
            b[j] /= self.ab[self.at(j, j)];
            let bj = b[j];
            let lo = j.saturating_sub(self.kv);
            for i in lo..j {
                b[i] -= self.ab[self.at(i, j)] * bj;
            }
        }
    }
}

/// Factors `a - shift·I` restricted to the index set `nodes`, which must be a
/// union of connected components of `a` (so no coupling leaves the set).
/// `local` is scratch of length `a.rows()` filled with `usize::MAX`; it is restored on return.
pub fn factor_component<T: Real>(
    a: &CsrMatrix<T>,
    nodes: &[usize],
    shift: Complex<T>,
    local: &mut [usize],
) -> Result<BandLu<T>> {
    for (k, &g) in nodes.iter().enumerate() {
        local[g] = k;
    }
    let mut entries = Vec::new();
    let (mut kl, mut ku) = (0usize, 0usize);
    for (k, &g) in nodes.iter().enumerate() {
        let mut diag = false;
        for (j, v) in a.row_entries(g) {
            let c = local[j];
            debug_assert!(c != usize::MAX, "component leaks outside node set");
            if c == k {
                diag = true;
                entries.push((k, c, v - shift));
            } else {
                entries.push((k, c, v));
            }
            if c < k {
                kl = kl.max(k - c);
            } else {
                ku = ku.max(c - k);
            }
        }
        if !diag {
            entries.push((k, k, -shift));
        }
    }
    for &g in nodes {
        local[g] = usize::MAX;
    }
    BandLu::factor(nodes.len(), kl, ku, entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::CMatrix;
    use crate::scalar::c;

    #[test]
    fn band_lu_matches_dense_solution() {
        let n = 9;
        let dense = CMatrix::<f64>::from_fn(n, n, |i, j| {
            let d = i as i64 - j as i64;
            if d == 0 {
                c(0.1, 0.2)
            } else if (-3..=2).contains(&d) {
                c(1.0 + d as f64, 0.3 * i as f64)
            } else {
                c(0., 0.)
            }
        });
        let b: Vec<_> = (0..n).map(|i| c(i as f64, 1.0)).collect();
        let expect = crate::linalg::Lu::new(&dense).unwrap().solve_vec(&b);
        let entries = CsrMatrix::from_dense(&dense).triplets().collect::<Vec<_>>();
        let lu = BandLu::factor(n, 2, 3, entries).unwrap();
        let mut x = b.clone();
        lu.solve_in_place(&mut x);
        for (u, v) in x.iter().zip(&expect) {
            assert!((u - v).norm() < 1e-12);
        }
    }

    #[test]
    fn components_are_found_and_reordered() {
        // path graph 0-2-4 and isolated pair 1-3
        let t = vec![(0, 2, c(1., 0.)), (2, 4, c(1., 0.)), (3, 1, c(1., 0.)), (0, 0, c(1., 0.))];
        let a = CsrMatrix::<f64>::from_triplets(5, 5, t);
        let comps = rcm_components(&a);
        assert_eq!(comps.len(), 2);
        let mut first = comps[0].clone();
        first.sort();
        assert_eq!(first, vec![0, 2, 4]);
        // a path ordered from one end keeps bandwidth 1
        let pos: Vec<usize> = [0, 2, 4].iter().map(|g| comps[0].iter().position(|x| x == g).unwrap()).collect();
        assert_eq!((pos[0] as i64 - pos[1] as i64).abs(), 1);
        assert_eq!((pos[1] as i64 - pos[2] as i64).abs(), 1);
    }

    #[test]
    fn component_factor_solves_shifted_system() {
        let dense = CMatrix::<f64>::from_fn(6, 6, |i, j| {
            if i == j {
                c(-1.0 - i as f64, 0.0)
            } else if (i as i64 - j as i64).abs() == 2 {
                c(0.5, 0.5)
            } else {
                c(0., 0.)
            }
        });
        let a = CsrMatrix::from_dense(&dense);
        let comps = rcm_components(&a);
        assert_eq!(comps.len(), 2);
        let mut local = vec![usize::MAX; 6];
        let shift = c(0.25, 0.0);
        let mut x_full = vec![c(0., 0.); 6];
        let b: Vec<_> = (0..6).map(|i| c(1.0, i as f64)).collect();
        for comp in &comps {
            let lu = factor_component(&a, comp, shift, &mut local).unwrap();
            let mut rhs: Vec<_> = comp.iter().map(|&g| b[g]).collect();
            lu.solve_in_place(&mut rhs);
            for (k, &g) in comp.iter().enumerate() {
                x_full[g] = rhs[k];
            }
        }
        assert!(local.iter().all(|&v| v == usize::MAX));
        let mut shifted = dense.clone();
        for i in 0..6 {
            shifted[(i, i)] -= shift;
        }
        let r = shifted.matvec(&x_full);
        for (u, v) in r.iter().zip(&b) {
            assert!((u - v).norm() < 1e-12);
        }
    }
}
