//! End E-valued (p,q)-forms sampled on a grid.
//!
//! A form ψ = Σ ψ_{AB} dz^A ∧ dz̄^B is stored with one r×r matrix field per
//! pair of increasing multi-indices (A, B), always holomorphic slots first.
//! Multi-indices are bitmasks over `0..n`.

use crate::error::{Error, Result};
use crate::linalg::{self, C64, ONE, ZERO};

/// Field of r×r complex matrices, one per grid point, row-major per point.
#[derive(Clone, Debug, PartialEq)]
pub struct EndoField {
    rank: usize,
    data: Vec<C64>,
}

impl EndoField {
    pub fn zeros(rank: usize, npts: usize) -> Self {
        EndoField {
            rank,
            data: vec![ZERO; rank * rank * npts],
        }
    }

    pub fn identity(rank: usize, npts: usize) -> Self {
        Self::constant(&linalg::identity(rank), rank, npts)
    }

    pub fn constant(matrix: &[C64], rank: usize, npts: usize) -> Self {
        assert_eq!(matrix.len(), rank * rank);
        let mut data = Vec::with_capacity(rank * rank * npts);
        for _ in 0..npts {
            data.extend_from_slice(matrix);
        }
        EndoField { rank, data }
    }

    pub fn from_data(rank: usize, data: Vec<C64>) -> Result<Self> {
        if rank == 0 || data.len() % (rank * rank) != 0 {
            return Err(Error::ShapeMismatch(format!(
                "{} values cannot hold rank-{rank} matrices",
                data.len()
            )));
        }
        Ok(EndoField { rank, data })
    }

    /// Builds a field point by point.
    pub fn from_fn(rank: usize, npts: usize, mut f: impl FnMut(usize) -> Vec<C64>) -> Self {
        let mut data = Vec::with_capacity(rank * rank * npts);
        for p in 0..npts {
            let m = f(p);
            debug_assert_eq!(m.len(), rank * rank);
            data.extend_from_slice(&m);
        }
        EndoField { rank, data }
    }

    /// Scalar function times the identity.
    pub fn scalar_multiple_of_identity(values: &[C64], rank: usize) -> Self {
        let id = linalg::identity(rank);
        Self::from_fn(rank, values.len(), |p| id.iter().map(|e| e * values[p]).collect())
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn npts(&self) -> usize {
        self.data.len() / (self.rank * self.rank)
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    #[inline]
    pub fn at(&self, p: usize) -> &[C64] {
        let rr = self.rank * self.rank;
        &self.data[p * rr..(p + 1) * rr]
    }

    #[inline]
    pub fn at_mut(&mut self, p: usize) -> &mut [C64] {
        let rr = self.rank * self.rank;
        &mut self.data[p * rr..(p + 1) * rr]
    }

    pub fn map(&self, mut f: impl FnMut(usize, &[C64]) -> Vec<C64>) -> Self {
        Self::from_fn(self.rank, self.npts(), |p| f(p, self.at(p)))
    }

    pub fn zip_map(&self, other: &Self, mut f: impl FnMut(&[C64], &[C64]) -> Vec<C64>) -> Self {
        assert_eq!(self.rank, other.rank);
        assert_eq!(self.npts(), other.npts());
        Self::from_fn(self.rank, self.npts(), |p| f(self.at(p), other.at(p)))
    }

    pub fn add(&self, other: &Self) -> Self {
        self.axpy(ONE, other)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.axpy(-ONE, other)
    }

    /// `self + alpha * other`.
    pub fn axpy(&self, alpha: C64, other: &Self) -> Self {
        assert_eq!(self.data.len(), other.data.len());
        EndoField {
            rank: self.rank,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + alpha * b).collect(),
        }
    }

    pub fn scale(&self, alpha: C64) -> Self {
        EndoField {
            rank: self.rank,
            data: self.data.iter().map(|a| a * alpha).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let r = self.rank;
        self.zip_map(other, |a, b| linalg::mul(a, b, r))
    }

    pub fn commutator(&self, other: &Self) -> Self {
        let r = self.rank;
        self.zip_map(other, |a, b| linalg::commutator(a, b, r))
    }

    pub fn trace(&self) -> Vec<C64> {
        (0..self.npts()).map(|p| linalg::trace(self.at(p), self.rank)).collect()
    }

    pub fn max_norm(&self) -> f64 {
        linalg::max_abs(&self.data)
    }

    pub fn entry(&self, i: usize, j: usize) -> Vec<C64> {
        let r = self.rank;
        (0..self.npts()).map(|p| self.at(p)[i * r + j]).collect()
    }
}

/// Bitmasks of all `k`-element subsets of `0..n`, in increasing mask order.
pub fn subsets(n: usize, k: usize) -> Vec<u8> {
    (0u8..(1u8 << n)).filter(|m| m.count_ones() as usize == k).collect()
}

/// Sign of the shuffle that sorts the concatenation `A ++ C` (zero on overlap).
pub fn shuffle_sign(a: u8, c: u8) -> Option<f64> {
    if a & c != 0 {
        return None;
    }
    let mut inversions = 0u32;
    for i in 0..8 {
        if a & (1 << i) != 0 {
            // elements of C smaller than i come after i in A ++ C
            inversions += (c & ((1u8 << i) - 1)).count_ones();
        }
    }
    Some(if inversions % 2 == 0 { 1.0 } else { -1.0 })
}

/// Ordered component basis for bidegree (p, q) in complex dimension n.
pub fn basis(n: usize, p: usize, q: usize) -> Vec<(u8, u8)> {
    let mut out = Vec::new();
    for a in subsets(n, p) {
        for b in subsets(n, q) {
            out.push((a, b));
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct EndoFormField {
    n: usize,
    p: usize,
    q: usize,
    rank: usize,
    npts: usize,
    basis: Vec<(u8, u8)>,
    comps: Vec<EndoField>,
}

impl EndoFormField {
    pub fn zeros(n: usize, p: usize, q: usize, rank: usize, npts: usize) -> Result<Self> {
        if p > n || q > n {
            return Err(Error::BidegreeOverflow { p, q, n });
        }
        let basis = basis(n, p, q);
        let comps = vec![EndoField::zeros(rank, npts); basis.len()];
        Ok(EndoFormField {
            n,
            p,
            q,
            rank,
            npts,
            basis,
            comps,
        })
    }

    /// Assemble from components listed in [`basis`] order.
    pub fn from_components(n: usize, p: usize, q: usize, comps: Vec<EndoField>) -> Result<Self> {
        let mut f = Self::zeros(n, p, q, 1, 0)?;
        if comps.len() != f.basis.len() {
            return Err(Error::ShapeMismatch(format!(
                "bidegree ({p},{q}) on n={n} needs {} components, got {}",
                f.basis.len(),
                comps.len()
            )));
        }
        let rank = comps[0].rank();
        let npts = comps[0].npts();
        if comps.iter().any(|c| c.rank() != rank || c.npts() != npts) {
            return Err(Error::ShapeMismatch("components disagree in rank or size".into()));
        }
        f.rank = rank;
        f.npts = npts;
        f.comps = comps;
        Ok(f)
    }

    pub fn from_endo(n: usize, field: EndoField) -> Self {
        let rank = field.rank();
        let npts = field.npts();
        EndoFormField {
            n,
            p: 0,
            q: 0,
            rank,
            npts,
            basis: vec![(0, 0)],
            comps: vec![field],
        }
    }

    /// Constant scalar form Σ c_{AB} dz^A∧dz̄^B times the identity endomorphism.
    pub fn constant_scalar(
        n: usize,
        p: usize,
        q: usize,
        coeffs: &[C64],
        rank: usize,
        npts: usize,
    ) -> Result<Self> {
        let mut f = Self::zeros(n, p, q, rank, npts)?;
        if coeffs.len() != f.basis.len() {
            return Err(Error::ShapeMismatch("scalar form coefficient count".into()));
        }
        let id = linalg::identity(rank);
        for (comp, &c) in f.comps.iter_mut().zip(coeffs) {
            let m: Vec<C64> = id.iter().map(|e| e * c).collect();
            *comp = EndoField::constant(&m, rank, npts);
        }
        Ok(f)
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn bidegree(&self) -> (usize, usize) {
        (self.p, self.q)
    }
    pub fn degree(&self) -> usize {
        self.p + self.q
    }
    pub fn rank(&self) -> usize {
        self.rank
    }
    pub fn npts(&self) -> usize {
        self.npts
    }
    pub fn basis(&self) -> &[(u8, u8)] {
        &self.basis
    }
    pub fn components(&self) -> &[EndoField] {
        &self.comps
    }
    pub fn components_mut(&mut self) -> &mut [EndoField] {
        &mut self.comps
    }

    pub fn index_of(&self, a: u8, b: u8) -> Option<usize> {
        self.basis.iter().position(|&x| x == (a, b))
    }

    /// Component on dz^A ∧ dz̄^B, for index lists given as bitmasks.
    pub fn component(&self, a: u8, b: u8) -> &EndoField {
        &self.comps[self.index_of(a, b).expect("component not in basis")]
    }

    pub fn component_mut(&mut self, a: u8, b: u8) -> &mut EndoField {
        let i = self.index_of(a, b).expect("component not in basis");
        &mut self.comps[i]
    }

    /// Component ψ_{αβ̄} of a (1,1)-form, indices from zero.
    pub fn c11(&self, alpha: usize, beta: usize) -> &EndoField {
        self.component(1 << alpha, 1 << beta)
    }

    pub fn expect_bidegree(&self, p: usize, q: usize) -> Result<()> {
        if (self.p, self.q) != (p, q) {
            return Err(Error::WrongBidegree {
                expected_p: p,
                expected_q: q,
                p: self.p,
                q: self.q,
            });
        }
        Ok(())
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.n != other.n || self.rank != other.rank || self.npts != other.npts {
            return Err(Error::ShapeMismatch(format!(
                "forms (n={}, r={}, {} pts) and (n={}, r={}, {} pts)",
                self.n, self.rank, self.npts, other.n, other.rank, other.npts
            )));
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|c| c.data().iter().all(|z| *z == ZERO))
    }

    pub fn max_norm(&self) -> f64 {
        self.comps.iter().map(EndoField::max_norm).fold(0.0, f64::max)
    }

    pub fn map_components(&self, mut f: impl FnMut(&EndoField) -> EndoField) -> Self {
        let mut out = self.clone();
        for c in out.comps.iter_mut() {
            *c = f(c);
        }
        out
    }

    pub fn axpy(&self, alpha: C64, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        if (self.p, self.q) != (other.p, other.q) {
            return Err(Error::WrongBidegree {
                expected_p: self.p,
                expected_q: self.q,
                p: other.p,
                q: other.q,
            });
        }
        let mut out = self.clone();
        for (c, o) in out.comps.iter_mut().zip(&other.comps) {
            *c = c.axpy(alpha, o);
        }
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.axpy(ONE, other)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.axpy(-ONE, other)
    }

    pub fn scale(&self, alpha: C64) -> Self {
        self.map_components(|c| c.scale(alpha))
    }

    /// Graded wedge with matrix-product coefficients: (f ∧ g)_{..} = Σ ± f_{AB} g_{CD}.
    pub fn wedge(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let (p, q) = (self.p + other.p, self.q + other.q);
        if p > self.n || q > self.n {
            return Err(Error::BidegreeOverflow { p, q, n: self.n });
        }
        let mut out = Self::zeros(self.n, p, q, self.rank, self.npts)?;
        let r = self.rank;
        let rr = r * r;
        for (fi, &(a, b)) in self.basis.iter().enumerate() {
            for (gi, &(c, d)) in other.basis.iter().enumerate() {
                let (Some(sa), Some(sb)) = (shuffle_sign(a, c), shuffle_sign(b, d)) else {
                    continue;
                };
                // dz^A dz̄^B dz^C dz̄^D = (−1)^{|B||C|} dz^A dz^C dz̄^B dz̄^D
                let cross = if (b.count_ones() * c.count_ones()) % 2 == 0 { 1.0 } else { -1.0 };
                let sign = C64::new(sa * sb * cross, 0.0);
                let oi = out.index_of(a | c, b | d).expect("wedge target in basis");
                let fdat = self.comps[fi].data();
                let gdat = other.comps[gi].data();
                let odat = out.comps[oi].data_mut();
                for pt in 0..self.npts {
                    let s = pt * rr;
                    linalg::mul_acc(&fdat[s..s + rr], &gdat[s..s + rr], &mut odat[s..s + rr], r, sign);
                }
            }
        }
        Ok(out)
    }

    /// Graded commutator [f, g] = f∧g − (−1)^{|f||g|} g∧f.
    pub fn bracket(&self, other: &Self) -> Result<Self> {
        let fg = self.wedge(other)?;
        let gf = other.wedge(self)?;
        let sign = if (self.degree() * other.degree()) % 2 == 0 { -ONE } else { ONE };
        fg.axpy(sign, &gf)
    }

    /// Left multiplication by an endomorphism field.
    pub fn left_mul(&self, m: &EndoField) -> Self {
        self.map_components(|c| m.mul(c))
    }

    pub fn right_mul(&self, m: &EndoField) -> Self {
        self.map_components(|c| c.mul(m))
    }

    /// Coefficientwise trace, as a rank-1 form of the same bidegree.
    pub fn trace(&self) -> Self {
        let mut out = self.clone();
        out.rank = 1;
        for c in out.comps.iter_mut() {
            *c = EndoField::from_data(1, c.trace()).expect("rank-1 data");
        }
        out
    }

    /// The (i, j) matrix entry of every coefficient, as a rank-1 form.
    pub fn entry(&self, i: usize, j: usize) -> Self {
        let mut out = self.clone();
        out.rank = 1;
        for c in out.comps.iter_mut() {
            *c = EndoField::from_data(1, c.entry(i, j)).expect("rank-1 data");
        }
        out
    }

    /// Rank-1 form promoted to `rank` by tensoring with the identity.
    pub fn scalar_times_identity(&self, rank: usize) -> Result<Self> {
        if self.rank != 1 {
            return Err(Error::ShapeMismatch("expected a scalar (rank-1) form".into()));
        }
        let mut out = self.clone();
        out.rank = rank;
        for c in out.comps.iter_mut() {
            let vals: Vec<C64> = c.data().to_vec();
            *c = EndoField::scalar_multiple_of_identity(&vals, rank);
        }
        Ok(out)
    }

    /// Adjoint form ψ*_h of bidegree (q, p): (ψ_{AB} dz^A∧dz̄^B)* = ψ_{AB}^* dz̄^A∧dz^B.
    pub fn h_adjoint(&self, h: &EndoField, h_inv: &EndoField) -> Result<Self> {
        if h.rank() != self.rank || h.npts() != self.npts {
            return Err(Error::ShapeMismatch("metric does not match form".into()));
        }
        let r = self.rank;
        let mut out = Self::zeros(self.n, self.q, self.p, r, self.npts)?;
        for (i, &(a, b)) in self.basis.iter().enumerate() {
            let sign = if (a.count_ones() * b.count_ones()) % 2 == 0 { 1.0 } else { -1.0 };
            let src = &self.comps[i];
            let adj = EndoField::from_fn(r, self.npts, |p| {
                linalg::h_adjoint(src.at(p), h.at(p), h_inv.at(p), r)
                    .into_iter()
                    .map(|z| z * sign)
                    .collect()
            });
            *out.component_mut(b, a) = adj;
        }
        Ok(out)
    }

    /// Coefficient on dz¹∧…∧dzⁿ∧dz̄¹∧…∧dz̄ⁿ of an (n, n)-form.
    pub fn top_component(&self) -> Result<&EndoField> {
        self.expect_bidegree(self.n, self.n)?;
        Ok(&self.comps[0])
    }

    pub fn to_endo(&self) -> Result<&EndoField> {
        self.expect_bidegree(0, 0)?;
        Ok(&self.comps[0])
    }
}

/// Sum of forms of one total degree but possibly several bidegrees.
#[derive(Clone, Debug, Default)]
pub struct MixedForm {
    parts: Vec<EndoFormField>,
}

impl MixedForm {
    pub fn new() -> Self {
        MixedForm { parts: Vec::new() }
    }

    pub fn from_part(f: EndoFormField) -> Self {
        MixedForm { parts: vec![f] }
    }

    pub fn parts(&self) -> &[EndoFormField] {
        &self.parts
    }

    pub fn part(&self, p: usize, q: usize) -> Option<&EndoFormField> {
        self.parts.iter().find(|f| f.bidegree() == (p, q))
    }

    pub fn push(&mut self, f: EndoFormField) -> Result<()> {
        let bd = f.bidegree();
        match self.parts.iter_mut().find(|g| g.bidegree() == bd) {
            Some(g) => *g = g.add(&f)?,
            None => self.parts.push(f),
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        for f in &other.parts {
            out.push(f.clone())?;
        }
        Ok(out)
    }

    pub fn axpy(&self, alpha: C64, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        for f in &other.parts {
            out.push(f.scale(alpha))?;
        }
        Ok(out)
    }

    pub fn max_norm(&self) -> f64 {
        self.parts.iter().map(EndoFormField::max_norm).fold(0.0, f64::max)
    }
}
