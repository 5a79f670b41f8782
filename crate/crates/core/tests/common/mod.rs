//! Brute-force torsion of rank-one circle local systems: the twisted
//! cochain complexes are built by hand, doubled, and their torsion found
//! from subsets of the standard basis with cofactor-expansion determinants.

#![allow(dead_code)]

use num_traits::{One, Signed, Zero};
use supertorsion::linalg::{q, Rational};

pub type Q = Rational;

pub fn laplace_det(m: &[Vec<Q>]) -> Q {
    let n = m.len();
    if n == 0 {
        return Q::one();
    }
    let mut total = Q::zero();
    for j in 0..n {
        if m[0][j].is_zero() {
            continue;
        }
        let minor: Vec<Vec<Q>> = m[1..]
            .iter()
            .map(|row| row.iter().enumerate().filter(|(c, _)| *c != j).map(|(_, x)| x.clone()).collect())
            .collect();
        let term = &m[0][j] * laplace_det(&minor);
        if j % 2 == 0 {
            total += term;
        } else {
            total -= term;
        }
    }
    total
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if n < k {
        return vec![];
    }
    let mut out = subsets(n - 1, k);
    for mut s in subsets(n - 1, k - 1) {
        s.push(n - 1);
        out.push(s);
    }
    out
}

/// Milnor torsion `Π_k [d b^{k−1} ∪ b^k / e_k]^{(−1)^{k+1}}` of an acyclic
/// cochain complex `C⁰ → C¹ → …` given by the matrices `d[k]: C^k → C^{k+1}`,
/// searching subsets of the standard basis for the `b^k`.
pub fn milnor_torsion(dims: &[usize], d: &[Vec<Vec<Q>>]) -> Q {
    let mut torsion = Q::one();
    let mut prev_images: Vec<Vec<Q>> = Vec::new();
    for (k, &dim) in dims.iter().enumerate() {
        let need = dim - prev_images.len();
        let mut found = None;
        for s in subsets(dim, need) {
            // columns: images from degree k−1, then chosen standard vectors
            let mut cols = prev_images.clone();
            for &i in &s {
                let mut e = vec![Q::zero(); dim];
                e[i] = Q::one();
                cols.push(e);
            }
            let rows: Vec<Vec<Q>> = (0..dim).map(|r| cols.iter().map(|c| c[r].clone()).collect()).collect();
            let det = laplace_det(&rows);
            if det.is_zero() {
                continue;
            }
            if k + 1 < dims.len() {
                let images: Vec<Vec<Q>> = s
                    .iter()
                    .map(|&i| (0..dims[k + 1]).map(|r| d[k][r][i].clone()).collect())
                    .collect();
                prev_images = images;
            } else {
                prev_images = Vec::new();
            }
            found = Some(det);
            break;
        }
        let det = found.expect("complex is acyclic");
        if k % 2 == 1 {
            torsion *= det;
        } else {
            torsion /= det;
        }
    }
    torsion
}

/// Twisted coboundary of the three-vertex circle, vertices 0, 1, 2 and edges
/// `[0,1], [0,2], [1,2]`: `(δf)[a,b] = hol(a,b) f(b) − f(a)`.
pub fn circle_coboundary(hol: [Q; 3]) -> Vec<Vec<Q>> {
    let edges = [(0, 1), (0, 2), (1, 2)];
    let mut d = vec![vec![Q::zero(); 3]; 3];
    for (r, &(a, b)) in edges.iter().enumerate() {
        d[r][b] += hol[r].clone();
        d[r][a] -= Q::one();
    }
    d
}

/// `|τ|² = 1/|torsion(C(E) ⊕ C(E*))|` for an acyclic rank-one system with
/// holonomy `λ` on the edge `[0,2]`; the dual has holonomy `1/λ`.
pub fn brute_force_tau_squared(lambda: &Q) -> Q {
    let de = circle_coboundary([q(1), lambda.clone(), q(1)]);
    let ds = circle_coboundary([q(1), lambda.recip(), q(1)]);
    let mut d = vec![vec![Q::zero(); 6]; 6];
    for r in 0..3 {
        for c in 0..3 {
            d[r][c] = de[r][c].clone();
            d[r + 3][c + 3] = ds[r][c].clone();
        }
    }
    milnor_torsion(&[6, 6], &[d]).abs().recip()
}
