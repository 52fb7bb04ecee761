//! Dense complex linear algebra shared by every module.
//!
//! Matrices are `nalgebra::DMatrix<Complex64>`. Two structural shortcuts keep
//! the two-mode kernels cheap without leaving the dense representation:
//! [`SectorUnitary`] stores a unitary that is block diagonal over invariant
//! index sectors (photon-number conserving optics), and [`RowSparse`] applies a
//! dense ladder-type operator through its nonzero pattern.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64 as C64;

pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const I: C64 = C64 { re: 0.0, im: 1.0 };

#[inline]
pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

/// Largest entrywise deviation of `m` from its adjoint.
pub fn hermiticity_defect(m: &CMat) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Largest singular value.
pub fn spectral_norm(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    // ‖M‖₂² is the top eigenvalue of M†M, which avoids a full SVD.
    let gram = m.adjoint() * m;
    let eig = hermitian_eigenvalues(&hermitize(&gram));
    eig.iter().cloned().fold(0.0_f64, f64::max).max(0.0).sqrt()
}

/// `(m + m†)/2`, removing rounding-level anti-Hermitian residue.
pub fn hermitize(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

pub fn hermitian_eigenvalues(m: &CMat) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    m.clone().symmetric_eigenvalues().iter().cloned().collect()
}

/// Eigen-decomposition of a Hermitian matrix: `m = V diag(λ) V†`.
pub fn hermitian_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let eig = SymmetricEigen::new(m.clone());
    (eig.eigenvalues.iter().cloned().collect(), eig.eigenvectors)
}

/// Trace norm distance `½‖ρ − σ‖₁` for Hermitian arguments.
pub fn trace_distance(rho: &CMat, sigma: &CMat) -> f64 {
    let diff = hermitize(&(rho - sigma));
    0.5 * hermitian_eigenvalues(&diff).iter().map(|x| x.abs()).sum::<f64>()
}

pub fn trace(m: &CMat) -> C64 {
    m.diagonal().iter().sum()
}

/// Splits `0..n` into the connected components of the nonzero pattern of
/// `m` (treated as an undirected graph). Each component is sorted.
pub fn block_partition(m: &CMat) -> Vec<Vec<usize>> {
    let n = m.nrows();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for j in 0..n {
        for i in 0..n {
            if i != j && m[(i, j)] != ZERO {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[r]].push(i);
    }
    groups
}

#[derive(Clone, Debug)]
struct Sector {
    idx: Vec<usize>,
    block: CMat,
}

/// A unitary that is block diagonal over disjoint index sectors.
///
/// Beamsplitters and phase shifts conserve total photon number, so on the
/// two-mode basis they split into sectors of size at most `n_max`.
#[derive(Clone, Debug)]
pub struct SectorUnitary {
    dim: usize,
    sectors: Vec<Sector>,
}

impl SectorUnitary {
    pub fn identity(dim: usize) -> Self {
        Self::diagonal(&vec![ONE; dim])
    }

    pub fn diagonal(entries: &[C64]) -> Self {
        let sectors = entries
            .iter()
            .enumerate()
            .map(|(i, &v)| Sector {
                idx: vec![i],
                block: CMat::from_element(1, 1, v),
            })
            .collect();
        Self {
            dim: entries.len(),
            sectors,
        }
    }

    /// `exp(-i h t)` for Hermitian `h`, one eigen-decomposition per sector.
    pub fn from_hermitian(h: &CMat, t: f64) -> Self {
        SpectralPropagator::new(h).at(t)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn sector_count(&self) -> usize {
        self.sectors.len()
    }

    pub fn to_dense(&self) -> CMat {
        let mut out = CMat::zeros(self.dim, self.dim);
        for s in &self.sectors {
            for (a, &i) in s.idx.iter().enumerate() {
                for (b, &j) in s.idx.iter().enumerate() {
                    out[(i, j)] = s.block[(a, b)];
                }
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        Self {
            dim: self.dim,
            sectors: self
                .sectors
                .iter()
                .map(|s| Sector {
                    idx: s.idx.clone(),
                    block: s.block.adjoint(),
                })
                .collect(),
        }
    }

    pub fn apply(&self, v: &CVec) -> CVec {
        assert_eq!(v.len(), self.dim);
        let mut out = CVec::zeros(self.dim);
        for s in &self.sectors {
            let local = CVec::from_iterator(s.idx.len(), s.idx.iter().map(|&i| v[i]));
            let res = &s.block * local;
            for (a, &i) in s.idx.iter().enumerate() {
                out[i] = res[a];
            }
        }
        out
    }

    /// `U · m`.
    pub fn left_mul(&self, m: &CMat) -> CMat {
        assert_eq!(m.nrows(), self.dim);
        let cols = m.ncols();
        let mut out = CMat::zeros(self.dim, cols);
        for s in &self.sectors {
            let k = s.idx.len();
            let local = CMat::from_fn(k, cols, |a, col| m[(s.idx[a], col)]);
            let res = &s.block * local;
            for col in 0..cols {
                for (a, &i) in s.idx.iter().enumerate() {
                    out[(i, col)] = res[(a, col)];
                }
            }
        }
        out
    }

    /// `U ρ U†`, one block product per pair of sectors.
    pub fn conjugate(&self, rho: &CMat) -> CMat {
        assert_eq!(rho.nrows(), self.dim);
        let mut out = CMat::zeros(self.dim, self.dim);
        let adjoints: Vec<CMat> = self.sectors.iter().map(|s| s.block.adjoint()).collect();
        for (sj, uj) in self.sectors.iter().zip(&adjoints) {
            for si in &self.sectors {
                let local = CMat::from_fn(si.idx.len(), sj.idx.len(), |a, b| rho[(si.idx[a], sj.idx[b])]);
                if local.iter().all(|z| *z == ZERO) {
                    continue;
                }
                let res = &si.block * local * uj;
                for (b, &j) in sj.idx.iter().enumerate() {
                    for (a, &i) in si.idx.iter().enumerate() {
                        out[(i, j)] = res[(a, b)];
                    }
                }
            }
        }
        out
    }

    /// Matrix product `self · other`.
    pub fn compose(&self, other: &SectorUnitary) -> SectorUnitary {
        assert_eq!(self.dim, other.dim);
        // Indices sharing a sector in either factor stay together.
        let mut pattern = CMat::zeros(self.dim, self.dim);
        for s in self.sectors.iter().chain(other.sectors.iter()) {
            for w in s.idx.windows(2) {
                pattern[(w[0], w[1])] = ONE;
            }
        }
        let groups = block_partition(&pattern);
        let restrict = |u: &SectorUnitary, g: &[usize]| -> CMat {
            let mut local_pos = std::collections::HashMap::with_capacity(g.len());
            for (a, &i) in g.iter().enumerate() {
                local_pos.insert(i, a);
            }
            let mut out = CMat::zeros(g.len(), g.len());
            for s in &u.sectors {
                if !local_pos.contains_key(&s.idx[0]) {
                    continue;
                }
                for (a, &i) in s.idx.iter().enumerate() {
                    for (b, &j) in s.idx.iter().enumerate() {
                        out[(local_pos[&i], local_pos[&j])] = s.block[(a, b)];
                    }
                }
            }
            out
        };
        let sectors = groups
            .iter()
            .map(|g| Sector {
                idx: g.clone(),
                block: restrict(self, g) * restrict(other, g),
            })
            .collect();
        SectorUnitary { dim: self.dim, sectors }
    }
}

/// Eigen-decomposition of a Hermitian generator, split over the connected
/// blocks of its nonzero pattern, from which `exp(-i h t)` is formed for any t.
#[derive(Clone, Debug)]
pub struct SpectralPropagator {
    dim: usize,
    blocks: Vec<(Vec<usize>, Vec<f64>, CMat)>,
}

impl SpectralPropagator {
    pub fn new(h: &CMat) -> Self {
        let blocks = block_partition(h)
            .into_iter()
            .map(|idx| {
                let k = idx.len();
                let local = CMat::from_fn(k, k, |a, b| h[(idx[a], idx[b])]);
                let (vals, vecs) = hermitian_eigen(&hermitize(&local));
                (idx, vals, vecs)
            })
            .collect();
        Self { dim: h.nrows(), blocks }
    }

    pub fn at(&self, t: f64) -> SectorUnitary {
        let sectors = self
            .blocks
            .iter()
            .map(|(idx, vals, vecs)| {
                let phases = CVec::from_iterator(vals.len(), vals.iter().map(|&l| C64::from_polar(1.0, -l * t)));
                let scaled = CMat::from_fn(vecs.nrows(), vecs.ncols(), |a, b| vecs[(a, b)] * phases[b]);
                Sector {
                    idx: idx.clone(),
                    block: scaled * vecs.adjoint(),
                }
            })
            .collect();
        SectorUnitary { dim: self.dim, sectors }
    }
}

/// Row-compressed view of a dense operator's nonzero entries.
#[derive(Clone, Debug)]
pub struct RowSparse {
    dim: usize,
    rows: Vec<Vec<(usize, C64)>>,
}

impl RowSparse {
    pub fn from_dense(m: &CMat) -> Self {
        let rows = (0..m.nrows())
            .map(|i| {
                (0..m.ncols())
                    .filter_map(|j| {
                        let v = m[(i, j)];
                        (v != ZERO).then_some((j, v))
                    })
                    .collect()
            })
            .collect();
        Self { dim: m.ncols(), rows }
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn adjoint(&self) -> Self {
        let mut rows = vec![Vec::new(); self.dim];
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                rows[j].push((i, v.conj()));
            }
        }
        Self {
            dim: self.rows.len(),
            rows,
        }
    }

    /// `self · other` for sparse factors.
    pub fn mul_sparse(&self, other: &RowSparse) -> RowSparse {
        let mut rows = Vec::with_capacity(self.rows.len());
        let mut acc = vec![ZERO; other.dim];
        let mut touched: Vec<usize> = Vec::new();
        for row in &self.rows {
            for &(k, v) in row {
                for &(j, w) in &other.rows[k] {
                    if acc[j] == ZERO {
                        touched.push(j);
                    }
                    acc[j] += v * w;
                }
            }
            touched.sort_unstable();
            touched.dedup();
            let mut out = Vec::with_capacity(touched.len());
            for &j in &touched {
                if acc[j] != ZERO {
                    out.push((j, acc[j]));
                }
                acc[j] = ZERO;
            }
            touched.clear();
            rows.push(out);
        }
        RowSparse { dim: other.dim, rows }
    }

    pub fn mul_vec(&self, v: &CVec) -> CVec {
        CVec::from_iterator(
            self.rows.len(),
            self.rows.iter().map(|row| row.iter().map(|&(j, w)| w * v[j]).sum()),
        )
    }

    /// `self · m`, column by column so reads of `m` stay contiguous.
    pub fn mul_dense(&self, m: &CMat) -> CMat {
        let mut out = CMat::zeros(self.rows.len(), m.ncols());
        self.mul_dense_acc(m, ONE, &mut out);
        out
    }

    /// `out += scale · self · m`.
    pub fn mul_dense_acc(&self, m: &CMat, scale: C64, out: &mut CMat) {
        assert_eq!(m.nrows(), self.dim);
        assert_eq!(out.nrows(), self.rows.len());
        let (nr, nc) = (m.nrows(), out.nrows());
        let src_all = m.as_slice();
        let dst_all = out.as_mut_slice();
        for (src, dst) in src_all.chunks_exact(nr).zip(dst_all.chunks_exact_mut(nc)) {
            for (d, row) in dst.iter_mut().zip(&self.rows) {
                let mut s = ZERO;
                for &(j, w) in row {
                    s += w * src[j];
                }
                *d += scale * s;
            }
        }
    }

    /// `out += scale · m · self†`, as column updates of `out`.
    pub fn mul_adjoint_right_acc(&self, m: &CMat, scale: C64, out: &mut CMat) {
        assert_eq!(m.ncols(), self.dim);
        let n = m.nrows();
        let src_all = m.as_slice();
        let dst_all = out.as_mut_slice();
        for (dst, row) in dst_all.chunks_exact_mut(n).zip(&self.rows) {
            for &(k, w) in row {
                let f = scale * w.conj();
                let src = &src_all[k * n..(k + 1) * n];
                for (d, x) in dst.iter_mut().zip(src) {
                    *d += f * x;
                }
            }
        }
    }

    /// `Tr(self · ρ)`.
    pub fn trace_with(&self, rho: &CMat) -> C64 {
        let mut s = ZERO;
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, w) in row {
                s += w * rho[(j, i)];
            }
        }
        s
    }

    /// `⟨ψ|self|ψ⟩`.
    pub fn sandwich(&self, psi: &CVec) -> C64 {
        let mut s = ZERO;
        for (i, row) in self.rows.iter().enumerate() {
            let mut t = ZERO;
            for &(j, w) in row {
                t += w * psi[j];
            }
            s += psi[i].conj() * t;
        }
        s
    }
}

/// `⟨ψ|(A ⊗ B)|ψ⟩` without forming the Kronecker product. `psi` is indexed
/// `j * nb + k` with `A` acting on `j` and `B` on `k`.
pub fn kron_sandwich(psi: &CVec, a: &CMat, b: &CMat) -> C64 {
    let (na, nb) = (a.nrows(), b.nrows());
    assert_eq!(psi.len(), na * nb);
    // Ψ[j,k] = ψ[j*nb + k]; (A⊗B)ψ corresponds to A Ψ Bᵀ.
    let big_psi = CMat::from_fn(na, nb, |j, k| psi[j * nb + k]);
    let image = a * &big_psi * b.transpose();
    big_psi.iter().zip(image.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// `Tr(ρ (A ⊗ B))` without forming the Kronecker product.
pub fn kron_trace(rho: &CMat, a: &CMat, b: &CMat) -> C64 {
    let (na, nb) = (a.nrows(), b.nrows());
    assert_eq!(rho.nrows(), na * nb);
    let mut total = ZERO;
    for j in 0..na {
        for jp in 0..na {
            let aw = a[(jp, j)];
            if aw == ZERO {
                continue;
            }
            let mut inner = ZERO;
            for k in 0..nb {
                for kp in 0..nb {
                    let bw = b[(kp, k)];
                    if bw != ZERO {
                        inner += rho[(j * nb + k, jp * nb + kp)] * bw;
                    }
                }
            }
            total += aw * inner;
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(n: usize, seed: u64) -> CMat {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut next = || rng.random::<f64>() - 0.5;
        let m = CMat::from_fn(n, n, |_, _| C64::new(next(), next()));
        hermitize(&m)
    }

    #[test]
    fn propagator_is_unitary_and_matches_series() {
        let h = random_hermitian(6, 7);
        let u = SectorUnitary::from_hermitian(&h, 0.3).to_dense();
        let defect = (u.adjoint() * &u - identity(6)).norm();
        assert!(defect < 1e-13, "{defect}");
        // Taylor series oracle for exp(-i h t)
        let gen = h.scale(0.3) * C64::new(0.0, -1.0);
        let mut term = identity(6);
        let mut sum = identity(6);
        for k in 1..40 {
            term = &term * &gen / c(k as f64);
            sum += &term;
        }
        assert!((u - sum).norm() < 1e-12);
    }

    #[test]
    fn block_partition_finds_components() {
        let mut m = CMat::zeros(5, 5);
        m[(0, 3)] = ONE;
        m[(3, 0)] = ONE;
        m[(1, 4)] = I;
        let parts = block_partition(&m);
        assert_eq!(parts, vec![vec![0, 3], vec![1, 4], vec![2]]);
    }

    #[test]
    fn sector_compose_matches_dense_product() {
        let mut h1 = CMat::zeros(4, 4);
        h1[(0, 1)] = c(0.7);
        h1[(1, 0)] = c(0.7);
        h1[(2, 2)] = c(0.1);
        let mut h2 = CMat::zeros(4, 4);
        h2[(1, 2)] = I;
        h2[(2, 1)] = -I;
        h2[(3, 3)] = c(-1.0);
        let u1 = SectorUnitary::from_hermitian(&h1, 1.1);
        let u2 = SectorUnitary::from_hermitian(&h2, 0.4);
        let dense = u1.to_dense() * u2.to_dense();
        assert!((u1.compose(&u2).to_dense() - dense).norm() < 1e-13);
    }

    #[test]
    fn conjugate_and_sparse_products_match_dense() {
        let h = random_hermitian(5, 3);
        let u = SectorUnitary::from_hermitian(&h, 0.9);
        let rho = random_hermitian(5, 11);
        let ud = u.to_dense();
        assert!((u.conjugate(&rho) - &ud * &rho * ud.adjoint()).norm() < 1e-13);

        let mut l = CMat::zeros(5, 5);
        l[(0, 1)] = c(2.0);
        l[(3, 1)] = I;
        l[(4, 2)] = c(-0.5);
        let sp = RowSparse::from_dense(&l);
        assert_eq!(sp.nnz(), 3);
        assert!((sp.mul_dense(&rho) - &l * &rho).norm() < 1e-14);
        let ll = sp.adjoint().mul_sparse(&sp);
        let dense_ll = l.adjoint() * &l;
        assert!((ll.mul_dense(&identity(5)) - dense_ll).norm() < 1e-14);
        assert!((sp.trace_with(&rho) - trace(&(&l * &rho))).norm() < 1e-14);
        let m = random_hermitian(5, 4) * I + &rho;
        let mut acc = rho.clone();
        sp.mul_adjoint_right_acc(&m, c(0.5), &mut acc);
        assert!((acc - (&rho + &m * l.adjoint() * c(0.5))).norm() < 1e-14);
        let mut acc = rho.clone();
        sp.mul_dense_acc(&m, I, &mut acc);
        assert!((acc - (&rho + &l * &m * I)).norm() < 1e-14);
    }

    #[test]
    fn kron_expectations_match_explicit_product() {
        let a = random_hermitian(3, 5) + CMat::from_fn(3, 3, |i, j| c((i * j) as f64));
        let b = random_hermitian(2, 9);
        let psi = CVec::from_fn(6, |i, _| C64::new(i as f64, 1.0 - i as f64));
        let full = kron(&a, &b);
        let direct = psi.dotc(&(&full * &psi));
        assert!((kron_sandwich(&psi, &a, &b) - direct).norm() < 1e-12);
        let rho = &psi * psi.adjoint();
        assert!((kron_trace(&rho, &a, &b) - trace(&(&rho * &full))).norm() < 1e-12);
    }

    #[test]
    fn spectral_norm_of_diagonal() {
        let m = CMat::from_diagonal(&CVec::from_vec(vec![c(-3.0), I, c(0.5)]));
        assert!((spectral_norm(&m) - 3.0).abs() < 1e-12);
        assert!((trace_distance(&m, &m)).abs() < 1e-15);
    }
}
