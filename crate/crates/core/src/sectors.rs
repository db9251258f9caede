//! Excitation sectors of system A and the superoperator projectors built on them.
//!
//! With `V^A = Σ a_p†a_p + Σ σ₊σ₋` diagonal and integer valued, a matrix entry
//! `(i, j)` of a composite state belongs to sector `l = v(i) − v(j)`, where
//! `v` is the A-excitation of the basis index. `P_l` keeps exactly those
//! entries and `Q_l = P_l + P_{−l}`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::hilbert::{Operator, SpaceSpec, SubsystemKind};
use crate::linalg::{CMatrix, CsrMatrix};
use crate::liouvillian::Liouvillian;
use crate::scalar::{czero, Real};

#[derive(Clone, Debug)]
pub struct ExcitationStructure<T> {
    space_a: SpaceSpec,
    va: Operator<T>,
    sectors: BTreeMap<usize, Vec<usize>>,
    /// Space the structure acts on; A factors lead it.
    space: SpaceSpec,
    /// A-excitation of every basis index of `space`.
    levels: Vec<usize>,
    /// Largest A-excitation representable in the truncation.
    top_level: usize,
    has_oscillator: bool,
}

pub fn build_excitation_structure<T: Real>(space_a: &SpaceSpec) -> Result<ExcitationStructure<T>> {
    let dims = space_a.dims();
    let levels: Vec<usize> = (0..space_a.total_dim()).map(|i| space_a.digits(i).iter().sum()).collect();
    let va = Operator::new(
        space_a.clone(),
        CMatrix::from_real_diag(&levels.iter().map(|&v| T::from_usize_lossy(v)).collect::<Vec<_>>()),
    )?;
    let mut sectors: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &v) in levels.iter().enumerate() {
        sectors.entry(v).or_default().push(i);
    }
    Ok(ExcitationStructure {
        space_a: space_a.clone(),
        va,
        sectors,
        space: space_a.clone(),
        top_level: dims.iter().map(|d| d - 1).sum(),
        has_oscillator: space_a.factors().iter().any(|f| f.kind() == SubsystemKind::Oscillator),
        levels,
    })
}

impl<T: Real> ExcitationStructure<T> {
    /// The same structure acting on `full`, whose leading factors must be those of system A.
    pub fn on_full_space(&self, full: &SpaceSpec) -> Result<Self> {
        let na = self.space_a.factors().len();
        if full.factors().len() < na || full.factors()[..na] != *self.space_a.factors() {
            return Err(Error::DimensionMismatch("full space does not start with the A factors".into()));
        }
        let db = full.total_dim() / self.space_a.total_dim();
        let a_levels: Vec<usize> = self.va.matrix().diagonal().iter().map(|z| z.re.to_usize().unwrap_or(0)).collect();
        let levels = (0..full.total_dim()).map(|i| a_levels[i / db]).collect();
        Ok(Self { space: full.clone(), levels, ..self.clone() })
    }

    pub fn space_a(&self) -> &SpaceSpec {
        &self.space_a
    }

    pub fn space(&self) -> &SpaceSpec {
        &self.space
    }

    /// `V^A` on the A space.
    pub fn va(&self) -> &Operator<T> {
        &self.va
    }

    /// Excitation number ↦ A-basis indices `|n, j⟩`.
    pub fn sectors(&self) -> &BTreeMap<usize, Vec<usize>> {
        &self.sectors
    }

    pub fn levels(&self) -> &[usize] {
        &self.levels
    }

    /// Largest `|l|` present in the truncated space.
    pub fn max_sector(&self) -> usize {
        self.top_level
    }

    /// Sectors `|l|` that can be distorted by the truncation ceiling: for
    /// oscillator A, anything above `top_level − 1`.
    pub fn is_edge_sector(&self, l: usize) -> bool {
        self.has_oscillator && l + 1 > self.top_level
    }

    #[inline]
    fn diff(&self, i: usize, j: usize) -> i64 {
        self.levels[i] as i64 - self.levels[j] as i64
    }

    fn check(&self, rho: &CMatrix<T>) -> Result<()> {
        let d = self.space.total_dim();
        if rho.rows() != d || rho.cols() != d {
            return Err(Error::DimensionMismatch(format!("{}x{} matrix on a space of dimension {d}", rho.rows(), rho.cols())));
        }
        Ok(())
    }

    /// `𝒞^A ρ = [V^A ⊗ 1, ρ]`.
    pub fn apply_ca(&self, rho: &CMatrix<T>) -> Result<CMatrix<T>> {
        self.check(rho)?;
        Ok(CMatrix::from_fn(rho.rows(), rho.cols(), |i, j| {
            rho[(i, j)] * T::from_i64(self.diff(i, j)).expect("small integer")
        }))
    }

    pub fn project_sector(&self, rho: &CMatrix<T>, l: i64) -> Result<CMatrix<T>> {
        self.check(rho)?;
        Ok(CMatrix::from_fn(rho.rows(), rho.cols(), |i, j| if self.diff(i, j) == l { rho[(i, j)] } else { czero() }))
    }

    pub fn project_q(&self, rho: &CMatrix<T>, l: usize) -> Result<CMatrix<T>> {
        if l == 0 {
            return Err(Error::InvalidParameter("Q_l is defined for l ≥ 1".into()));
        }
        self.check(rho)?;
        let l = l as i64;
        Ok(CMatrix::from_fn(rho.rows(), rho.cols(), |i, j| {
            if self.diff(i, j).abs() == l {
                rho[(i, j)]
            } else {
                czero()
            }
        }))
    }

    /// Column-stacked indices `i + d·j` of the entries in sector `l` (or `±l` when `symmetric`).
    pub fn vec_indices(&self, l: i64, symmetric: bool) -> Vec<usize> {
        let d = self.space.total_dim();
        let mut out = Vec::new();
        for j in 0..d {
            for i in 0..d {
                let k = self.diff(i, j);
                if k == l || (symmetric && k == -l) {
                    out.push(i + d * j);
                }
            }
        }
        out
    }

    /// Dense block of `gen` acting within sector `l` (or `±l` when `symmetric`).
    /// Only meaningful when `gen` preserves the sectors.
    pub fn restrict(&self, gen: &Liouvillian<T>, l: i64, symmetric: bool) -> Result<CMatrix<T>> {
        if gen.space() != &self.space {
            return Err(Error::DimensionMismatch("generator and excitation structure on different spaces".into()));
        }
        let idx = self.vec_indices(l, symmetric);
        Ok(restrict_sparse(&gen.sparse_superoperator(), &idx))
    }
}

/// Dense sub-matrix `S[idx, idx]` of a sparse square matrix.
pub fn restrict_sparse<T: Real>(s: &CsrMatrix<T>, idx: &[usize]) -> CMatrix<T> {
    let mut pos = vec![usize::MAX; s.rows()];
    for (k, &g) in idx.iter().enumerate() {
        pos[g] = k;
    }
    let mut out = CMatrix::zeros(idx.len(), idx.len());
    for (k, &g) in idx.iter().enumerate() {
        for (j, v) in s.row_entries(g) {
            if pos[j] != usize::MAX {
                out[(k, pos[j])] = v;
            }
        }
    }
    out
}

/// Per-factor data for the A-sector decay rate: a spin holds one excitation and
/// damps coherences at `rate/2` per unit of `|k|`; an oscillator holds up to
/// `dim − 1` and damps at `rate/2` per unit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FactorDamping {
    pub kind: SubsystemKind,
    pub rate: f64,
    pub dim: usize,
}

/// `η_l` as the slowest sum of per-factor coherence rates: distribute `|l|`
/// over the factors, cheapest first, `η_l = −min Σ_p rate_p |k_p| / 2`.
pub fn additive_decay_rate(factors: &[FactorDamping], l: usize) -> Result<f64> {
    if l == 0 {
        return Ok(0.0);
    }
    let mut order: Vec<&FactorDamping> = factors.iter().collect();
    order.sort_by(|a, b| a.rate.partial_cmp(&b.rate).unwrap_or(std::cmp::Ordering::Equal));
    let mut left = l;
    let mut cost = 0.0;
    for f in order {
        let cap = match f.kind {
            SubsystemKind::Spin => 1,
            SubsystemKind::Oscillator => f.dim - 1,
        };
        let take = left.min(cap);
        cost += f.rate * take as f64 / 2.0;
        left -= take;
        if left == 0 {
            return Ok(-cost);
        }
    }
    Err(Error::InvalidParameter(format!("sector {l} exceeds the excitation capacity of system A")))
}

/// `‖Q_l ρ‖₁`.
pub fn q_norm<T: Real>(es: &ExcitationStructure<T>, rho: &CMatrix<T>, l: usize) -> Result<T> {
    crate::linalg::trace_norm(&es.project_q(rho, l)?)
}

/// Sum of the sector projections, used as a completeness check.
pub fn sum_of_sectors<T: Real>(es: &ExcitationStructure<T>, rho: &CMatrix<T>) -> Result<CMatrix<T>> {
    let top = es.max_sector() as i64;
    let mut acc = CMatrix::zeros(rho.rows(), rho.cols());
    for l in -top..=top {
        acc += &es.project_sector(rho, l)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::SubsystemSpec;
    use crate::scalar::c;

    fn spin_osc(n: usize) -> SpaceSpec {
        SpaceSpec::new(vec![SubsystemSpec::spin(), SubsystemSpec::oscillator(n).unwrap()]).unwrap()
    }

    #[test]
    fn sector_maps() {
        let es: ExcitationStructure<f64> = build_excitation_structure(&SpaceSpec::single(SubsystemSpec::spin())).unwrap();
        assert_eq!(es.sectors()[&0], vec![0]);
        assert_eq!(es.sectors()[&1], vec![1]);

        let es: ExcitationStructure<f64> = build_excitation_structure(&spin_osc(3)).unwrap();
        // |0⟩|1⟩ is index 1, |1⟩|0⟩ is index 3
        assert_eq!(es.sectors()[&1], vec![1, 3]);
        assert_eq!(es.sectors().values().map(Vec::len).sum::<usize>(), 6);

        let es: ExcitationStructure<f64> =
            build_excitation_structure(&SpaceSpec::single(SubsystemSpec::oscillator(4).unwrap())).unwrap();
        assert_eq!(es.va().matrix(), &CMatrix::from_real_diag(&[0.0, 1.0, 2.0, 3.0]));
    }

    #[test]
    fn projectors_on_embedded_space() {
        let a = SpaceSpec::single(SubsystemSpec::oscillator(3).unwrap());
        let full = a.tensor(&SpaceSpec::single(SubsystemSpec::spin()));
        let es: ExcitationStructure<f64> = build_excitation_structure(&a).unwrap().on_full_space(&full).unwrap();
        let rho = CMatrix::from_fn(6, 6, |i, j| c(1.0 + i as f64, j as f64 - 2.0));
        assert!(sum_of_sectors(&es, &rho).unwrap().max_diff(&rho) < 1e-15);
        let p1 = es.project_sector(&rho, 1).unwrap();
        assert_eq!(es.project_sector(&p1, 1).unwrap(), p1);
        // |2⟩⟨1| ⊗ X lies in sector 1: C^A scales it by 1
        let ca = es.apply_ca(&p1).unwrap();
        assert!(ca.max_diff(&p1) < 1e-15);
        let va_full = es.va().matrix().kron(&CMatrix::identity(2));
        assert!(es.apply_ca(&rho).unwrap().max_diff(&CMatrix::commutator(&va_full, &rho)) < 1e-13);
        let herm = rho.hermitian_part();
        assert!(es.project_q(&herm, 1).unwrap().is_hermitian(1e-15));
        assert!(es.project_q(&herm, 0).is_err());
        assert!(es.on_full_space(&spin_osc(3)).is_err());
    }

    #[test]
    fn additive_rates() {
        let spin = FactorDamping { kind: SubsystemKind::Spin, rate: 2.0, dim: 2 };
        assert_eq!(additive_decay_rate(&[spin], 1).unwrap(), -1.0);
        let osc = FactorDamping { kind: SubsystemKind::Oscillator, rate: 1.0, dim: 6 };
        assert_eq!(additive_decay_rate(&[osc], 3).unwrap(), -1.5);
        let small = FactorDamping { kind: SubsystemKind::Oscillator, rate: 0.5, dim: 3 };
        // two units from the cheap oscillator, one from the other
        assert_eq!(additive_decay_rate(&[osc, small], 3).unwrap(), -1.0);
        assert!(additive_decay_rate(&[spin], 2).is_err());
    }
}
