//! Field points of the quiver variety: maps `ρ: S_R → k^{p(R)}` and
//! `M_i: k^{p(R)} → k^{p(R+1)}` subject to surjectivity and commutation
//! conditions, with the `GL × GL` action and Plücker coordinates as minors.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactalg::{ExactError, ExactMatrix, Field};
use crate::grassmann::{maximal_minors, quotient_matrix, PluckerVector};
use crate::macaulay::HilbertPolynomialSpec;
use crate::polyring::{variable_map, GradedSubspace, MonomialBasis};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QuiverError {
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("matrix is not invertible")]
    SingularMatrix,
    #[error("malformed quiver point: {0}")]
    Malformed(String),
    #[error(transparent)]
    Exact(#[from] ExactError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuiverPoint {
    pub n: usize,
    pub big_r: u32,
    pub rho: ExactMatrix,
    pub m: Vec<ExactMatrix>,
    pub beta: ExactMatrix,
}

/// One named check of a validation report.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect()
    }
}

/// Builds `(ρ, M, β)` from a compatible pair of degree pieces.
pub fn build_representation(i_r: &GradedSubspace, i_r1: &GradedSubspace) -> Result<QuiverPoint, QuiverError> {
    let n = i_r.n();
    let big_r = i_r.degree();
    let field = i_r.field();
    if i_r1.n() != n || i_r1.degree() != big_r + 1 {
        return Err(QuiverError::PreconditionFailed("degrees must be R and R+1".into()));
    }
    if big_r == 0 {
        return Err(QuiverError::PreconditionFailed("R must be at least 1".into()));
    }
    let mus: Vec<ExactMatrix> = (0..=n).map(|i| variable_map(n, big_r, i, field)).collect();
    for (i, mu) in mus.iter().enumerate() {
        if !i_r.image(mu, n, big_r + 1).is_subspace_of(i_r1) {
            return Err(QuiverError::PreconditionFailed(format!("x{i}·I_R is not contained in I_(R+1)")));
        }
    }
    let rho = quotient_matrix(i_r);
    let beta = quotient_matrix(i_r1);
    let (_, pivots) = rho.rref();
    let mut sigma = ExactMatrix::zeros(field, rho.cols(), rho.rows());
    for (k, &b) in pivots.iter().enumerate() {
        sigma.set(b, k, field.one());
    }
    let m = mus
        .iter()
        .map(|mu| beta.mul(mu).and_then(|x| x.mul(&sigma)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(QuiverPoint { n, big_r, rho, m, beta })
}

/// Same as [`build_representation`], also checking the codimensions against `p`.
pub fn build_for_spec(
    spec: &HilbertPolynomialSpec,
    i_r: &GradedSubspace,
    i_r1: &GradedSubspace,
) -> Result<QuiverPoint, QuiverError> {
    let big_r = i_r.degree() as usize;
    if i_r.codim() != spec.at(big_r) {
        return Err(QuiverError::PreconditionFailed(format!(
            "codim I_R = {} but p(R) = {}",
            i_r.codim(),
            spec.at(big_r)
        )));
    }
    if i_r1.codim() != spec.at(big_r + 1) {
        return Err(QuiverError::PreconditionFailed(format!(
            "codim I_(R+1) = {} but p(R+1) = {}",
            i_r1.codim(),
            spec.at(big_r + 1)
        )));
    }
    build_representation(i_r, i_r1)
}

impl QuiverPoint {
    pub fn field(&self) -> Field {
        self.rho.field()
    }

    pub fn p_r(&self) -> usize {
        self.rho.rows()
    }

    pub fn p_r1(&self) -> usize {
        self.beta.rows()
    }

    /// Horizontal concatenation `[M₀ | … | Mₙ]`.
    pub fn sigma_m(&self) -> ExactMatrix {
        self.m[1..].iter().fold(self.m[0].clone(), |acc, x| acc.hstack(x))
    }

    /// `β` recovered from `(ρ, M)`: the column of `v = x_j·z` (smallest `j`) is `M_j ρ(z)`.
    pub fn beta_from_maps(n: usize, big_r: u32, rho: &ExactMatrix, m: &[ExactMatrix]) -> ExactMatrix {
        let field = rho.field();
        let src = MonomialBasis::new(n, big_r);
        let dst = MonomialBasis::new(n, big_r + 1);
        let rows = m[0].rows();
        let mut out = ExactMatrix::zeros(field, rows, dst.len());
        for (col, v) in dst.monomials().iter().enumerate() {
            let j = (0..=n).find(|&j| v.0[j] > 0).expect("positive degree");
            let z = v.div_var(j).unwrap();
            let zc = rho.column(src.index_of(&z).unwrap());
            for (i, x) in m[j].mul_vec(&zc).into_iter().enumerate() {
                out.set(i, col, x);
            }
        }
        out
    }

    pub fn validate(&self) -> ValidationReport {
        let n = self.n;
        let field = self.field();
        let mut checks = vec![
            Check {
                name: "rho surjective".into(),
                passed: self.rho.rank() == self.p_r(),
            },
            Check {
                name: "sum of M surjective".into(),
                passed: self.sigma_m().rank() == self.p_r1(),
            },
        ];
        let mus_r: Vec<ExactMatrix> = (0..=n).map(|i| variable_map(n, self.big_r, i, field)).collect();
        let mus_prev: Vec<ExactMatrix> = if self.big_r >= 1 {
            (0..=n).map(|i| variable_map(n, self.big_r - 1, i, field)).collect()
        } else {
            Vec::new()
        };
        let pairs: Vec<(usize, usize)> = (0..=n).flat_map(|i| (i + 1..=n).map(move |j| (i, j))).collect();
        let commute: Vec<Check> = pairs
            .par_iter()
            .map(|&(i, j)| {
                let lhs = self.m[i].mul(&self.rho).and_then(|x| x.mul(&mus_prev[j]));
                let rhs = self.m[j].mul(&self.rho).and_then(|x| x.mul(&mus_prev[i]));
                Check {
                    name: format!("M{i} rho mu{j} = M{j} rho mu{i}"),
                    passed: matches!((lhs, rhs), (Ok(a), Ok(b)) if a == b),
                }
            })
            .collect();
        checks.extend(commute);
        for (i, mu) in mus_r.iter().enumerate() {
            let lhs = self.beta.mul(mu);
            let rhs = self.m[i].mul(&self.rho);
            checks.push(Check {
                name: format!("beta mu{i} = M{i} rho"),
                passed: matches!((lhs, rhs), (Ok(a), Ok(b)) if a == b),
            });
        }
        ValidationReport { checks }
    }

    /// `ρ' = gρ`, `M_i' = h M_i g⁻¹`, `β' = hβ`.
    pub fn act(&self, g: &ExactMatrix, h: &ExactMatrix) -> Result<QuiverPoint, QuiverError> {
        let ginv = g.inverse().map_err(|_| QuiverError::SingularMatrix)?;
        if h.det().map_err(|_| QuiverError::SingularMatrix)?.is_zero() {
            return Err(QuiverError::SingularMatrix);
        }
        Ok(QuiverPoint {
            n: self.n,
            big_r: self.big_r,
            rho: g.mul(&self.rho)?,
            m: self
                .m
                .iter()
                .map(|mi| h.mul(mi).and_then(|x| x.mul(&ginv)))
                .collect::<Result<Vec<_>, _>>()?,
            beta: h.mul(&self.beta)?,
        })
    }

    /// Plücker vectors in degrees `R` and `R+1` as maximal minors.
    pub fn plucker_via_minors(&self) -> Result<(PluckerVector, PluckerVector), QuiverError> {
        let c = Self::beta_from_maps(self.n, self.big_r, &self.rho, &self.m);
        let lo = PluckerVector::raw(self.n, self.big_r, self.p_r(), self.field(), maximal_minors(&self.rho))
            .map_err(|e| QuiverError::Malformed(e.to_string()))?;
        let hi = PluckerVector::raw(self.n, self.big_r + 1, self.p_r1(), self.field(), maximal_minors(&c))
            .map_err(|e| QuiverError::Malformed(e.to_string()))?;
        Ok((lo, hi))
    }

    /// `(ker ρ, ker β)`.
    pub fn kernel_ideal(&self) -> (GradedSubspace, GradedSubspace) {
        (
            GradedSubspace::from_columns(self.n, self.big_r, &self.rho.kernel_basis()),
            GradedSubspace::from_columns(self.n, self.big_r + 1, &self.beta.kernel_basis()),
        )
    }

    pub fn to_json(&self) -> QuiverJson {
        QuiverJson {
            n: self.n,
            big_r: self.big_r,
            field: self.field(),
            rho: self.rho.to_string_rows(),
            m: self.m.iter().map(|x| x.to_string_rows()).collect(),
        }
    }

    /// Reads a point; `β` is rebuilt from `(ρ, M)`.
    pub fn from_json(j: &QuiverJson) -> Result<Self, QuiverError> {
        let ns = MonomialBasis::new(j.n, j.big_r).len();
        let rho = ExactMatrix::from_string_rows(j.field, ns, &j.rho)?;
        if j.m.len() != j.n + 1 {
            return Err(QuiverError::Malformed(format!("expected {} matrices M_i", j.n + 1)));
        }
        let m = j
            .m
            .iter()
            .map(|x| ExactMatrix::from_string_rows(j.field, rho.rows(), x))
            .collect::<Result<Vec<_>, _>>()?;
        let rows = m[0].rows();
        if m.iter().any(|x| x.rows() != rows) {
            return Err(QuiverError::Malformed("M_i have different row counts".into()));
        }
        let beta = Self::beta_from_maps(j.n, j.big_r, &rho, &m);
        Ok(QuiverPoint {
            n: j.n,
            big_r: j.big_r,
            rho,
            m,
            beta,
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QuiverJson {
    pub n: usize,
    #[serde(rename = "R")]
    pub big_r: u32,
    pub field: Field,
    pub rho: Vec<Vec<String>>,
    #[serde(rename = "M")]
    pub m: Vec<Vec<Vec<String>>>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grassmann::plucker_from_subspace;
    use crate::macaulay::{macaulay_upper, parse_hilbert_polynomial};
    use crate::polyring::{ideal_degree_piece, parse_generators, Monomial};
    use crate::rng::SeededRng;
    use proptest::prelude::*;

    const Q: Field = Field::Rational;
    const P: Field = Field::Prime(1_000_003);

    fn pieces(g: &str, n: usize, r: u32, field: Field) -> (GradedSubspace, GradedSubspace) {
        let gens = parse_generators(g, n).unwrap();
        (
            ideal_degree_piece(n, &gens, r, field).unwrap(),
            ideal_degree_piece(n, &gens, r + 1, field).unwrap(),
        )
    }

    #[test]
    fn projective_line_example() {
        let (a, b) = pieces("x1", 1, 1, Q);
        let q = build_representation(&a, &b).unwrap();
        assert_eq!(q.rho, ExactMatrix::from_i64_rows(Q, &[vec![1, 0]]));
        assert_eq!(q.beta, ExactMatrix::from_i64_rows(Q, &[vec![1, 0, 0]]));
        assert_eq!(q.m[0], ExactMatrix::from_i64_rows(Q, &[vec![1]]));
        assert_eq!(q.m[1], ExactMatrix::from_i64_rows(Q, &[vec![0]]));
        assert!(q.validate().all_passed());
        let (lo, hi) = q.plucker_via_minors().unwrap();
        assert_eq!(hi.support_size(), 1);
        assert!(hi.proportional_to(&plucker_from_subspace(&b, 1).unwrap()));
        assert!(lo.proportional_to(&plucker_from_subspace(&a, 1).unwrap()));
        let (ka, kb) = q.kernel_ideal();
        assert_eq!(ka, GradedSubspace::from_monomials(1, 1, Q, &[Monomial(vec![0, 1])]));
        assert_eq!(kb, GradedSubspace::from_monomials(1, 2, Q, &[Monomial(vec![1, 1]), Monomial(vec![0, 2])]));

        let mut broken = q.clone();
        broken.m[0] = ExactMatrix::zeros(Q, 1, 1);
        let rep = broken.validate();
        assert!(!rep.all_passed());
        assert!(rep.failures().contains(&"sum of M surjective"));

        let g = ExactMatrix::from_i64_rows(Q, &[vec![2]]);
        let h = ExactMatrix::from_i64_rows(Q, &[vec![3]]);
        let moved = q.act(&g, &h).unwrap();
        assert_eq!(moved.rho, q.rho.scale(&Q.from_i64(2)));
        assert_eq!(moved.m[0], q.m[0].scale(&Q.parse_scalar("3/2").unwrap()));
        assert_eq!(moved.kernel_ideal(), q.kernel_ideal());
        let id = ExactMatrix::identity(Q, 1);
        assert_eq!(q.act(&id, &id).unwrap(), q);
        assert_eq!(q.act(&ExactMatrix::zeros(Q, 1, 1), &id), Err(QuiverError::SingularMatrix));
    }

    #[test]
    fn violated_inclusion() {
        let a = GradedSubspace::from_monomials(1, 1, Q, &[Monomial(vec![1, 0])]);
        let b = GradedSubspace::zero(1, 2, Q);
        assert!(matches!(build_representation(&a, &b), Err(QuiverError::PreconditionFailed(_))));
    }

    #[test]
    fn line_and_point_example() {
        let spec = parse_hilbert_polynomial("t+2").unwrap();
        let (a, b) = pieces("x0*x2, x1*x2", 2, 2, Q);
        let q = build_for_spec(&spec, &a, &b).unwrap();
        assert_eq!((q.rho.rows(), q.rho.cols()), (4, 6));
        assert!(q.m.iter().all(|m| (m.rows(), m.cols()) == (5, 4)));
        assert!(q.validate().all_passed());
        let (lo, hi) = q.plucker_via_minors().unwrap();
        assert!(lo.proportional_to(&plucker_from_subspace(&a, 4).unwrap()));
        assert!(hi.proportional_to(&plucker_from_subspace(&b, 5).unwrap()));
        assert_eq!(q.kernel_ideal(), (a.clone(), b.clone()));
        assert_eq!(macaulay_upper(a.codim() as u64, 2), b.codim() as u128);

        let mut bent = q.clone();
        let v = bent.m[1].get(0, 0) + &Q.one();
        bent.m[1].set(0, 0, v);
        let rep = bent.validate();
        assert!(rep.failures().iter().any(|f| f.starts_with("M0 rho mu1")));

        let back = QuiverPoint::from_json(&serde_json::from_str(&serde_json::to_string(&q.to_json()).unwrap()).unwrap())
            .unwrap();
        assert_eq!(back, q);
    }

    fn random_invertible(rng: &mut SeededRng, k: usize, field: Field) -> ExactMatrix {
        loop {
            let rows: Vec<Vec<_>> = (0..k).map(|_| (0..k).map(|_| rng.field_element(field)).collect()).collect();
            let m = ExactMatrix::from_rows(field, k, rows).unwrap();
            if !m.det().unwrap().is_zero() {
                return m;
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn group_action_preserves_kernels(seed in any::<u64>()) {
            let (a, b) = pieces("x1*x2, x2^2", 2, 2, P);
            let q = build_representation(&a, &b).unwrap();
            let mut rng = SeededRng::new(seed);
            let g = random_invertible(&mut rng, 4, P);
            let h = random_invertible(&mut rng, 5, P);
            let moved = q.act(&g, &h).unwrap();
            prop_assert!(moved.validate().all_passed());
            prop_assert_eq!(moved.kernel_ideal(), q.kernel_ideal());
            let (lo, hi) = q.plucker_via_minors().unwrap();
            let (lo2, hi2) = moved.plucker_via_minors().unwrap();
            prop_assert!(lo.proportional_to(&lo2));
            prop_assert!(hi.proportional_to(&hi2));
        }
    }
}
