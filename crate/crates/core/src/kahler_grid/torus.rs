use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::forms::{EndoField, EndoFormField};
use super::spectral::{DerivativeScheme, SpectralEngine};
use crate::error::{Error, Result};
use crate::linalg::{self, C64, I, ONE, ZERO};
use crate::summation::Summation;

/// Volume form used by [`KahlerTorus::integrate_scalar`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VolumeWeight {
    /// ωⁿ
    OmegaN,
    /// ωⁿ/n!, the Riemannian volume form.
    OmegaNOverNFact,
}

/// Flat torus ℂⁿ/Λ with Λ = Σ L_a ℤ + i L_a ℤ and constant Kähler metric
/// ω = √−1 Σ g_{αβ̄} dz^α ∧ dz̄^β, sampled on N points per real axis.
#[derive(Clone, Debug)]
pub struct KahlerTorus {
    n: usize,
    lengths: Vec<f64>,
    grid: usize,
    /// g_{αβ̄} as a row-major n×n matrix.
    metric: Vec<C64>,
    /// g^{αβ̄}, normalized by Σ_β g^{αβ̄} g_{γβ̄} = δ^α_γ.
    inv_metric: Vec<C64>,
    volume: f64,
    /// Real Lebesgue measure of one grid cell.
    cell: f64,
    /// Density of ωⁿ/n! against dx¹dy¹…dxⁿdyⁿ.
    density: f64,
    /// Coefficient of ωⁿ on dz¹…dzⁿdz̄¹…dz̄ⁿ.
    omega_top: C64,
    summation: Summation,
    engine: Arc<SpectralEngine>,
}

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

impl KahlerTorus {
    /// Torus with identity metric.
    pub fn new(n: usize, lengths: &[f64], grid: usize) -> Result<Self> {
        let metric = linalg::identity(n);
        Self::with_metric(n, lengths, grid, &metric, DerivativeScheme::Spectral)
    }

    /// Square torus with identity metric and prescribed Vol X.
    pub fn with_volume(n: usize, volume: f64, grid: usize) -> Result<Self> {
        if !(volume > 0.0) {
            return Err(Error::InvalidInput(format!("volume must be positive, got {volume}")));
        }
        // Vol X = 2ⁿ Π L_a² for g = I.
        let side = (volume / 2f64.powi(n as i32)).powf(1.0 / (2.0 * n as f64));
        Self::new(n, &vec![side; n], grid)
    }

    pub fn with_metric(
        n: usize,
        lengths: &[f64],
        grid: usize,
        metric: &[C64],
        scheme: DerivativeScheme,
    ) -> Result<Self> {
        if !(1..=2).contains(&n) {
            return Err(Error::InvalidInput(format!("complex dimension must be 1 or 2, got {n}")));
        }
        if lengths.len() != n || lengths.iter().any(|&l| !(l > 0.0) || !l.is_finite()) {
            return Err(Error::InvalidInput("need n positive side lengths".into()));
        }
        if grid < 4 || grid % 2 != 0 {
            return Err(Error::InvalidInput(format!(
                "grid points per axis must be even and at least 4, got {grid}"
            )));
        }
        if metric.len() != n * n {
            return Err(Error::InvalidInput("metric must be n×n".into()));
        }
        if linalg::hermitian_defect(metric, n) > 1e-12 {
            return Err(Error::InvalidInput("Kähler metric is not Hermitian".into()));
        }
        if linalg::min_hermitian_eigenvalue(metric, n) <= 0.0 {
            return Err(Error::InvalidInput("Kähler metric is not positive definite".into()));
        }
        // g^{αβ̄} = ((g^T)⁻¹)_{αβ}
        let mut transposed = vec![ZERO; n * n];
        for a in 0..n {
            for b in 0..n {
                transposed[b * n + a] = metric[a * n + b];
            }
        }
        let inv_metric = linalg::inverse(&transposed, n)
            .ok_or_else(|| Error::InvalidInput("metric not invertible".into()))?;

        let det_g = linalg::determinant(metric, n).re;
        let density = 2f64.powi(n as i32) * det_g;
        let cell: f64 = lengths.iter().map(|l| (l / grid as f64).powi(2)).product();
        let volume = density * lengths.iter().map(|l| l * l).product::<f64>();

        let engine = Arc::new(SpectralEngine::new(n, lengths, grid, scheme));
        let mut torus = KahlerTorus {
            n,
            lengths: lengths.to_vec(),
            grid,
            metric: metric.to_vec(),
            inv_metric,
            volume,
            cell,
            density,
            omega_top: ZERO,
            summation: Summation::default(),
            engine,
        };
        let omega_n = torus.omega_power(n, 1, 1)?;
        torus.omega_top = omega_n.top_component()?.at(0)[0];

        let quad = torus.volume_by_quadrature()?;
        if ((quad - volume) / volume).abs() >= 1e-12 {
            return Err(Error::invariant("Vol X quadrature", (quad - volume).abs() / volume, 1e-12));
        }
        Ok(torus)
    }

    pub fn with_summation(mut self, summation: Summation) -> Self {
        self.summation = summation;
        self
    }

    pub fn with_scheme(self, scheme: DerivativeScheme) -> Result<Self> {
        let summation = self.summation;
        Ok(Self::with_metric(self.n, &self.lengths, self.grid, &self.metric, scheme)?
            .with_summation(summation))
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }
    pub fn grid_points(&self) -> usize {
        self.grid
    }
    pub fn npts(&self) -> usize {
        self.grid.pow(2 * self.n as u32)
    }
    pub fn metric(&self) -> &[C64] {
        &self.metric
    }
    /// g^{αβ̄}
    pub fn inv_metric(&self, alpha: usize, beta: usize) -> C64 {
        self.inv_metric[alpha * self.n + beta]
    }
    pub fn volume(&self) -> f64 {
        self.volume
    }
    pub fn summation(&self) -> Summation {
        self.summation
    }
    pub fn scheme(&self) -> DerivativeScheme {
        self.engine.scheme()
    }
    pub fn engine(&self) -> &SpectralEngine {
        &self.engine
    }

    /// Real coordinates (x₁, y₁, …) of grid point `p`.
    pub fn coords(&self, p: usize) -> Vec<f64> {
        let ndim = 2 * self.n;
        (0..ndim)
            .map(|k| {
                let m = (p / self.grid.pow((ndim - 1 - k) as u32)) % self.grid;
                m as f64 * self.lengths[k / 2] / self.grid as f64
            })
            .collect()
    }

    /// ω as a rank-`rank` form (ω ⊗ I) on `npts` points.
    pub fn omega(&self, rank: usize, npts: usize) -> Result<EndoFormField> {
        let coeffs: Vec<C64> = self.metric.iter().map(|g| I * g).collect();
        // basis(n,1,1) enumerates (α, β) row-major, matching the metric layout
        EndoFormField::constant_scalar(self.n, 1, 1, &coeffs, rank, npts)
    }

    /// ω^k ⊗ I, with ω⁰ the identity (0,0)-form.
    pub fn omega_power(&self, k: usize, rank: usize, npts: usize) -> Result<EndoFormField> {
        let mut acc = EndoFormField::constant_scalar(self.n, 0, 0, &[ONE], rank, npts)?;
        let omega = self.omega(rank, npts)?;
        for _ in 0..k {
            acc = acc.wedge(&omega)?;
        }
        Ok(acc)
    }

    /// Top-degree coefficient of `f` in units of ωⁿ, i.e. the field F with f = F ωⁿ.
    pub fn top_ratio(&self, f: &EndoFormField) -> Result<EndoField> {
        Ok(f.top_component()?.scale(self.omega_top.inv()))
    }

    fn volume_by_quadrature(&self) -> Result<f64> {
        // dz¹…dzⁿdz̄¹…dz̄ⁿ = (−1)^{n(n−1)/2} (−2i)ⁿ dx¹dy¹…dxⁿdyⁿ
        let sign = if (self.n * (self.n - 1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
        let to_real = C64::new(0.0, -2.0).powi(self.n as i32) * sign;
        let per_cell = self.omega_top * to_real / factorial(self.n);
        let samples = vec![per_cell * self.cell; self.npts()];
        Ok(self.summation.sum(&samples).re)
    }

    /// Rectangle-rule integral of a scalar field against the chosen volume form.
    pub fn integrate_scalar(&self, f: &[C64], weight: VolumeWeight) -> C64 {
        assert_eq!(f.len(), self.npts(), "scalar field does not match grid");
        let base = self.summation.sum(f) * (self.cell * self.density);
        match weight {
            VolumeWeight::OmegaNOverNFact => base,
            VolumeWeight::OmegaN => base * factorial(self.n),
        }
    }

    pub fn integrate_real(&self, f: &[f64], weight: VolumeWeight) -> f64 {
        assert_eq!(f.len(), self.npts(), "scalar field does not match grid");
        let base = self.summation.sum_real(f) * (self.cell * self.density);
        match weight {
            VolumeWeight::OmegaNOverNFact => base,
            VolumeWeight::OmegaN => base * factorial(self.n),
        }
    }

    /// √−1 Λ on (1,1)-forms: Σ g^{αβ̄} f_{αβ̄}.
    pub fn lambda_contract(&self, f: &EndoFormField) -> Result<EndoField> {
        f.expect_bidegree(1, 1)?;
        let mut out = EndoField::zeros(f.rank(), f.npts());
        for a in 0..self.n {
            for b in 0..self.n {
                out = out.axpy(self.inv_metric(a, b), f.c11(a, b));
            }
        }
        Ok(out)
    }

    fn gram(&self, rows: u8, cols: u8) -> C64 {
        let ri: Vec<usize> = (0..self.n).filter(|i| rows & (1 << i) != 0).collect();
        let ci: Vec<usize> = (0..self.n).filter(|i| cols & (1 << i) != 0).collect();
        match ri.len() {
            0 => ONE,
            1 => self.inv_metric(ri[0], ci[0]),
            _ => {
                self.inv_metric(ri[0], ci[0]) * self.inv_metric(ri[1], ci[1])
                    - self.inv_metric(ri[0], ci[1]) * self.inv_metric(ri[1], ci[0])
            }
        }
    }

    /// Pointwise Hermitian product (ψ, η)_h: form slots contracted with g^{αβ̄},
    /// endomorphism slots with tr(ψ ∘ η*_h).
    pub fn pointwise_inner(
        &self,
        psi: &EndoFormField,
        eta: &EndoFormField,
        h: &EndoField,
        h_inv: &EndoField,
    ) -> Result<Vec<C64>> {
        if psi.bidegree() != eta.bidegree() || psi.rank() != eta.rank() || psi.npts() != eta.npts() {
            return Err(Error::ShapeMismatch("inner product needs equal bidegree and rank".into()));
        }
        let r = psi.rank();
        let npts = psi.npts();
        let mut out = vec![ZERO; npts];
        for (i, &(a, b)) in psi.basis().iter().enumerate() {
            for (j, &(c, d)) in eta.basis().iter().enumerate() {
                // ⟨dz^A, dz^C⟩ = det g^{A C̄}; ⟨dz̄^B, dz̄^D⟩ = det g^{D B̄}
                let w = self.gram(a, c) * self.gram(d, b);
                if w == ZERO {
                    continue;
                }
                let pc = &psi.components()[i];
                let ec = &eta.components()[j];
                for (p, o) in out.iter_mut().enumerate() {
                    let adj = linalg::h_adjoint(ec.at(p), h.at(p), h_inv.at(p), r);
                    *o += w * linalg::trace(&linalg::mul(pc.at(p), &adj, r), r);
                }
            }
        }
        Ok(out)
    }

    /// ⟨ψ, η⟩ = ∫ (ψ, η)_h ωⁿ/n!.
    pub fn l2_inner(
        &self,
        psi: &EndoFormField,
        eta: &EndoFormField,
        h: &EndoField,
        h_inv: &EndoField,
    ) -> Result<C64> {
        if psi.npts() != self.npts() {
            return Err(Error::ShapeMismatch("field does not live on this grid".into()));
        }
        let density = self.pointwise_inner(psi, eta, h, h_inv)?;
        Ok(self.integrate_scalar(&density, VolumeWeight::OmegaNOverNFact))
    }

    /// Exterior ∂ and ∂̄ of the coefficient fields, without connection terms.
    fn exterior(&self, f: &EndoFormField, holomorphic: bool) -> Result<EndoFormField> {
        if f.npts() != self.npts() {
            return Err(Error::ShapeMismatch("field does not live on this grid".into()));
        }
        let (p, q) = f.bidegree();
        let (np, nq) = if holomorphic { (p + 1, q) } else { (p, q + 1) };
        let mut out = EndoFormField::zeros(self.n, np, nq, f.rank(), f.npts())?;
        for (i, &(a, b)) in f.basis().iter().enumerate() {
            let comp = &f.components()[i];
            let (holo, anti) = self.engine.partials_matrix(comp.data(), f.rank());
            let parts = if holomorphic { holo } else { anti };
            for (alpha, deriv) in parts.into_iter().enumerate() {
                let bit = 1u8 << alpha;
                let (target, sign) = if holomorphic {
                    // dz^α ∧ dz^A dz̄^B
                    match super::forms::shuffle_sign(bit, a) {
                        Some(s) => ((a | bit, b), s),
                        None => continue,
                    }
                } else {
                    // dz̄^α ∧ dz^A dz̄^B = (−1)^{|A|} dz^A dz̄^α dz̄^B
                    match super::forms::shuffle_sign(bit, b) {
                        Some(s) => {
                            let pa = if a.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                            ((a, b | bit), s * pa)
                        }
                        None => continue,
                    }
                };
                let d = EndoField::from_data(f.rank(), deriv)?;
                let slot = out.component_mut(target.0, target.1);
                *slot = slot.axpy(C64::new(sign, 0.0), &d);
            }
        }
        Ok(out)
    }

    /// ∂̄ψ + coupling, where the coupling is a (0,1) connection term.
    pub fn d_bar(&self, f: &EndoFormField, coupling: Coupling<'_>) -> Result<EndoFormField> {
        let base = self.exterior(f, false)?;
        coupling.apply(base, f, (0, 1))
    }

    /// ∂ψ + coupling, where the coupling is a (1,0) connection term.
    pub fn d(&self, f: &EndoFormField, coupling: Coupling<'_>) -> Result<EndoFormField> {
        let base = self.exterior(f, true)?;
        coupling.apply(base, f, (1, 0))
    }
}

/// How a connection one-form acts alongside an exterior derivative.
#[derive(Clone, Copy, Debug)]
pub enum Coupling<'a> {
    None,
    /// Adjoint action on End E: ψ ↦ [A, ψ].
    Bracket(&'a EndoFormField),
    /// Action on E-valued data: ψ ↦ A ∧ ψ.
    Module(&'a EndoFormField),
}

impl Coupling<'_> {
    fn apply(
        self,
        base: EndoFormField,
        f: &EndoFormField,
        expected: (usize, usize),
    ) -> Result<EndoFormField> {
        let (conn, bracket) = match self {
            Coupling::None => return Ok(base),
            Coupling::Bracket(a) => (a, true),
            Coupling::Module(a) => (a, false),
        };
        conn.expect_bidegree(expected.0, expected.1)?;
        let extra = if bracket { conn.bracket(f)? } else { conn.wedge(f)? };
        base.add(&extra)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn rejects_bad_grids_and_metrics() {
        assert!(KahlerTorus::new(1, &[1.0], 5).is_err());
        assert!(KahlerTorus::new(1, &[1.0], 2).is_err());
        assert!(KahlerTorus::new(3, &[1.0; 3], 4).is_err());
        let bad = [ONE, ZERO, ZERO, -ONE];
        assert!(KahlerTorus::with_metric(2, &[1.0, 1.0], 4, &bad, DerivativeScheme::Spectral).is_err());
    }

    #[test]
    fn volume_weights() {
        let t = KahlerTorus::new(2, &[0.8, 1.1], 6).unwrap();
        let one = vec![ONE; t.npts()];
        let v = t.integrate_scalar(&one, VolumeWeight::OmegaNOverNFact);
        let w = t.integrate_scalar(&one, VolumeWeight::OmegaN);
        assert!((v.re - t.volume()).abs() < 1e-12 * t.volume());
        assert_eq!(w, v * 2.0);
        assert!((t.volume() - 4.0 * 0.64 * 1.21).abs() < 1e-12);
    }

    #[test]
    fn cos_squared_integral() {
        let t = KahlerTorus::with_volume(1, 1.0, 16).unwrap();
        let l = t.lengths()[0];
        let f: Vec<C64> = (0..t.npts())
            .map(|p| C64::new((2.0 * PI * t.coords(p)[0] / l).cos().powi(2), 0.0))
            .collect();
        let v = t.integrate_scalar(&f, VolumeWeight::OmegaN);
        assert!((v.re - 0.5).abs() < 1e-14);
    }

    #[test]
    fn lambda_of_omega_is_n() {
        let g = [C64::new(2.0, 0.0), C64::new(0.3, 0.4), C64::new(0.3, -0.4), C64::new(1.0, 0.0)];
        let t = KahlerTorus::with_metric(2, &[1.0, 1.0], 4, &g, DerivativeScheme::Spectral).unwrap();
        // ω/√−1 has components g_{αβ̄}
        let omega = t.omega(2, 3).unwrap().scale(-I);
        let m = EndoField::constant(&[C64::new(1.0, 2.0), ONE, ZERO, C64::new(-3.0, 0.0)], 2, 3);
        let lam = t.lambda_contract(&omega.left_mul(&m)).unwrap();
        assert!(lam.sub(&m.scale(C64::new(2.0, 0.0))).max_norm() < 1e-14);
    }

    #[test]
    fn lambda_rejects_wrong_bidegree() {
        let t = KahlerTorus::new(1, &[1.0], 4).unwrap();
        let f = EndoFormField::zeros(1, 1, 0, 1, t.npts()).unwrap();
        assert!(matches!(t.lambda_contract(&f), Err(Error::WrongBidegree { .. })));
    }

    #[test]
    fn dbar_squared_vanishes() {
        let t = KahlerTorus::new(2, &[1.0, 1.3], 8).unwrap();
        let f = EndoField::from_fn(2, t.npts(), |p| {
            let x = t.coords(p);
            let s = (2.0 * PI * x[0]).sin() + (2.0 * PI * (x[1] + x[3] / 1.3)).cos();
            vec![C64::new(s, 0.1 * s), C64::new(0.0, s * s), ONE * x[2].cos(), C64::new(s, 0.0)]
        });
        let f = EndoFormField::from_endo(2, f);
        let once = t.d_bar(&f, Coupling::None).unwrap();
        let twice = t.d_bar(&once, Coupling::None).unwrap();
        assert!(twice.max_norm() < 1e-10, "{}", twice.max_norm());
        let mixed = t.d(&once, Coupling::None).unwrap().add(&t.d_bar(&t.d(&f, Coupling::None).unwrap(), Coupling::None).unwrap()).unwrap();
        assert!(mixed.max_norm() < 1e-9, "∂∂̄ + ∂̄∂ = {}", mixed.max_norm());
    }

    #[test]
    fn constants_are_annihilated() {
        let t = KahlerTorus::new(1, &[1.0], 8).unwrap();
        let f = EndoFormField::constant_scalar(1, 0, 0, &[C64::new(3.0, 1.0)], 2, t.npts()).unwrap();
        assert!(t.d_bar(&f, Coupling::None).unwrap().max_norm() < 1e-13);
        assert!(t.d(&f, Coupling::None).unwrap().max_norm() < 1e-13);
    }
}
