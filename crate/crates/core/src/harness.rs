//! Scenario engine for the verifiable identities: synthetic elementary
//! modules and their characteristic ideals, the functional-equation and
//! specialization shape checks, the root-of-unity comparison flow with
//! its permanent counterexample fixture, the finiteness sampler for
//! small-valuation character values, and kernel-divisibility checks.
//!
//! The harness verifies computable identities only; it makes no claim
//! about the cohomological theorems whose proofs route through them.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::chars::{evaluate_at_character, FiniteCharacter};
use crate::error::{Error, Result};
use crate::euler::{theta_factor, varrho, IdealGen, LocalShape, PlaceData, TowerConfig};
use crate::padic::{PadicScalar, Valuation};
use crate::series::{associates, specialize, AssocVerdict, IwasawaSeries, SeriesRing, SubgroupMap};

/// One elementary factor Lambda/(f^n).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElementaryFactor {
    pub f: IwasawaSeries,
    pub n: u32,
}

/// Synthetic elementary module: a direct sum of Lambda/(f_i^{n_i}) and
/// Lambda/(p^{m_j}) pieces, or a designated non-torsion module.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElementaryModule {
    #[serde(default)]
    pub factors: Vec<ElementaryFactor>,
    #[serde(default)]
    pub p_part: Vec<u32>,
    #[serde(default)]
    pub non_torsion: bool,
}

impl ElementaryModule {
    pub fn validate(&self) -> Result<()> {
        for fac in &self.factors {
            if fac.f.is_literal_zero() {
                return Err(Error::BadInput("elementary factor is zero".into()));
            }
            if fac.f.is_unit() {
                return Err(Error::BadInput("elementary factor is a unit".into()));
            }
        }
        Ok(())
    }

    /// Direct sum of two modules over the same ring.
    pub fn direct_sum(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.factors.extend(other.factors.iter().cloned());
        out.p_part.extend(other.p_part.iter().copied());
        out.non_torsion |= other.non_torsion;
        out
    }
}

/// Characteristic ideal generator: p^{sum m_j} prod f_i^{n_i} at
/// truncation; 1 for the empty module, the zero series for a designated
/// non-torsion module.
pub fn char_ideal(m: &ElementaryModule, ring: SeriesRing) -> Result<IwasawaSeries> {
    m.validate()?;
    if m.non_torsion {
        return Ok(IwasawaSeries::zero(ring));
    }
    let mut acc = IwasawaSeries::one(ring);
    for fac in &m.factors {
        if fac.f.ring.vars != ring.vars {
            return Err(Error::MixedRings);
        }
        acc = acc.mul(&fac.f.pow(fac.n)?)?;
    }
    let total_p: u32 = m.p_part.iter().sum();
    if total_p > 0 {
        let p_pow = PadicScalar::from_biguint(
            ring.prime.p,
            ring.prime.precision,
            crate::padic::pow_mod(ring.prime.p, total_p),
        );
        acc = acc.mul_scalar(&p_pow)?;
    }
    Ok(acc)
}

/// Functional-equation shape: is f an associate of its sharp transform?
pub fn functional_equation_check(f: &IwasawaSeries) -> Result<AssocVerdict> {
    Ok(associates(f, &f.sharp()?))
}

/// Shape check for the specialization identity
/// varrho * p(CH(M)) = vartheta * CH(M'): verifies consistency of the
/// caller-supplied scenario data via associates, not the deep theorem.
pub fn specialization_shape_check(
    m_top: &ElementaryModule,
    m_bot: &ElementaryModule,
    tower: &TowerConfig,
    shaped_places: &[(PlaceData, LocalShape)],
    target_map: &SubgroupMap,
    source: SeriesRing,
    target: SeriesRing,
) -> Result<AssocVerdict> {
    let ch_top = char_ideal(m_top, source)?;
    let ch_bot = char_ideal(m_bot, target)?;
    let rho = varrho(tower, target.vars, target)?;
    let lhs = rho.mul(&specialize(&ch_top, target_map, target)?)?;
    let mut theta = IdealGen::one(target);
    for (v, shape) in shaped_places {
        theta = theta.mul(&theta_factor(v, shape, target_map, target)?)?;
    }
    let rhs = match theta {
        IdealGen::Zero => IwasawaSeries::zero(target),
        IdealGen::Gen(t) => t.mul(&ch_bot)?,
    };
    Ok(associates(&lhs, &rhs))
}

/// One root-of-unity comparison: the level and exponent of zeta and the
/// one-variable associates verdict after t_1 -> zeta - 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZetaCheck {
    pub level: u32,
    pub exponent: u64,
    pub verdict: AssocVerdict,
}

/// Outcome of the root-of-unity comparison flow.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RootLemmaVerdict {
    pub hypothesis_ok: bool,
    pub per_zeta: Vec<ZetaCheck>,
    pub conclusion: AssocVerdict,
}

/// Compare two 2-variable series along roots of unity: checks the
/// mu-hypothesis mu(f) = mu(f(t_0, 0)) = mu(g) = mu(g(t_0, 0)), then for
/// each zeta of exact order p^level evaluates t_1 -> zeta - 1 and runs
/// one-variable associates; the conclusion is the two-variable verdict.
pub fn root_lemma_run(
    f: &IwasawaSeries,
    g: &IwasawaSeries,
    zeta_levels: &[u32],
) -> Result<RootLemmaVerdict> {
    if f.ring.vars != 2 || g.ring.vars != 2 {
        return Err(Error::BadInput("root lemma flow requires d = 2".into()));
    }
    let mus = [
        f.mu(),
        f.project_to_var(0).mu(),
        g.mu(),
        g.project_to_var(0).mu(),
    ];
    let hypothesis_ok = match mus[0] {
        Valuation::Finite(_) => mus.iter().all(|m| *m == mus[0]),
        _ => false,
    };
    let p = f.ring.prime.p;
    let prec = f.ring.prime.precision;
    let mut per_zeta = Vec::new();
    for &level in zeta_levels {
        let span = crate::padic::pow_mod(p, level);
        let mut e = 0u64;
        let span: u64 = span.try_into().map_err(|_| {
            Error::BadInput("zeta level too large".into())
        })?;
        while e < span {
            e += 1;
            if level > 0 && e % p == 0 {
                continue; // not of exact order p^level
            }
            let ring1 = SeriesRing::new(f.ring.prime, 1, f.ring.degree, level.max(f.ring.level));
            let zeta_minus_one = PadicScalar::zeta_pow(p, prec, level, e as i64)
                .sub(&PadicScalar::one(p, prec, level))?;
            let images = |h: &IwasawaSeries| -> Result<IwasawaSeries> {
                h.substitute(&[
                    IwasawaSeries::var(ring1, 0),
                    IwasawaSeries::constant(ring1, zeta_minus_one.clone()),
                ])
            };
            let verdict = associates(&images(f)?, &images(g)?);
            per_zeta.push(ZetaCheck {
                level,
                exponent: e,
                verdict,
            });
            if level == 0 {
                break; // only the trivial zeta at level 0
            }
        }
    }
    Ok(RootLemmaVerdict {
        hypothesis_ok,
        per_zeta,
        conclusion: associates(f, g),
    })
}

/// Count the characters omega of Gamma_0 of level <= l whose value
/// omega(f) has valuation at least `threshold`, for each l up to
/// `max_level`; values that vanish to the working precision are counted.
/// Requires a certified mu(f) = 0.
pub fn monsky_counts(
    f: &IwasawaSeries,
    max_level: u32,
    threshold: Ratio<i64>,
) -> Result<Vec<u64>> {
    if f.ring.vars != 1 {
        return Err(Error::BadInput("sampler requires d = 1".into()));
    }
    if f.mu() != Valuation::Finite(Ratio::new(0, 1)) {
        return Err(Error::HypothesisFailed);
    }
    let p = f.ring.prime.p;
    let mut counts = Vec::new();
    for level in 0..=max_level {
        let span: u64 = crate::padic::pow_mod(p, level)
            .try_into()
            .map_err(|_| Error::BadInput("level too large".into()))?;
        let mut count = 0u64;
        for e in 0..span {
            let omega = FiniteCharacter {
                level,
                images: vec![e as i64],
            };
            let value = evaluate_at_character(f, &omega)?;
            let hit = match value.valuation() {
                Valuation::Finite(v) => v >= threshold,
                // zero to the working precision: ord >= N >= threshold
                Valuation::Exhausted | Valuation::Infinite => true,
            };
            if hit {
                count += 1;
            }
        }
        counts.push(count);
    }
    Ok(counts)
}

/// Unimodular complement of a primitive integer vector: a quotient map
/// Gamma -> Gamma / Z_p a realized as a SubgroupMap with d - 1 rows.
fn kernel_complement(a: &[i64]) -> Result<SubgroupMap> {
    let d = a.len();
    let mut v: Vec<i128> = a.iter().map(|&x| x as i128).collect();
    let mut u: Vec<Vec<i128>> = (0..d)
        .map(|i| (0..d).map(|j| i128::from(i == j)).collect())
        .collect();
    loop {
        let nz: Vec<usize> = (0..d).filter(|&i| v[i] != 0).collect();
        if nz.is_empty() {
            return Err(Error::BadInput("kernel generator is zero".into()));
        }
        if nz.len() == 1 {
            let piv = nz[0];
            if v[piv].abs() != 1 {
                return Err(Error::BadInput("kernel generator is not primitive".into()));
            }
            v.swap(0, piv);
            u.swap(0, piv);
            break;
        }
        let piv = *nz
            .iter()
            .min_by_key(|&&i| v[i].abs())
            .expect("nonempty");
        for i in 0..d {
            if i != piv && v[i] != 0 {
                let q = v[i] / v[piv];
                v[i] -= q * v[piv];
                for j in 0..d {
                    let s = u[piv][j];
                    u[i][j] -= q * s;
                }
            }
        }
    }
    let rows: Vec<Vec<i64>> = u[1..]
        .iter()
        .map(|row| {
            row.iter()
                .map(|&x| i64::try_from(x).map_err(|_| Error::BadInput("coefficient overflow".into())))
                .collect::<Result<Vec<i64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    SubgroupMap::new(rows)
}

/// Whether f is divisible, at truncation and working precision, by every
/// kernel generator s' = prod (1 + t_i)^{a_i} - 1 for the supplied
/// primitive exponent vectors: checked by specializing along the
/// quotient that kills a and testing vanishing.
pub fn divisibility_by_kernel(f: &IwasawaSeries, kernel_gens: &[Vec<i64>]) -> Result<bool> {
    if f.is_literal_zero() {
        return Ok(true);
    }
    for a in kernel_gens {
        if a.len() != f.ring.vars {
            return Err(Error::BadInput("kernel generator arity mismatch".into()));
        }
        let image = if f.ring.vars == 1 {
            // quotient by the full group: evaluate every variable at 0
            let r0 = f.ring.with_vars(0);
            f.substitute(&[IwasawaSeries::zero(r0)])?
        } else {
            let m = kernel_complement(a)?;
            let target = f.ring.with_vars(f.ring.vars - 1);
            specialize(f, &m, target)?
        };
        if !image.is_zero_residue() {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::euler::Reduction;
    use crate::padic::Prime;
    use crate::series::{binomial_power, group_element};
    use std::collections::BTreeMap;

    fn ring(p: u64, n: u32, vars: usize, deg: u32) -> SeriesRing {
        SeriesRing::new(Prime { p, precision: n }, vars, deg, 0)
    }

    fn from_terms(r: SeriesRing, terms: &[(&[u32], i64)]) -> IwasawaSeries {
        let mut acc = IwasawaSeries::zero(r);
        for (e, c) in terms {
            acc = acc
                .add(&IwasawaSeries::monomial(
                    r,
                    e.to_vec(),
                    PadicScalar::from_i64(r.prime.p, r.prime.precision, *c),
                ))
                .unwrap();
        }
        acc
    }

    fn remark_pair(r: SeriesRing) -> (IwasawaSeries, IwasawaSeries) {
        let p3 = (r.prime.p as i64).pow(3);
        let p4 = (r.prime.p as i64).pow(4);
        let f = from_terms(
            r,
            &[(&[0, 2], 1), (&[1, 1], p3), (&[1, 0], p3), (&[0, 0], p4)],
        );
        let g = from_terms(r, &[(&[0, 2], 1), (&[1, 0], p3), (&[0, 0], p4)]);
        (f, g)
    }

    #[test]
    fn char_ideal_examples() {
        let r = ring(3, 10, 1, 8);
        let f = from_terms(r, &[(&[1], 1), (&[0], 3)]); // t + p
        let m = ElementaryModule {
            factors: vec![ElementaryFactor { f: f.clone(), n: 1 }],
            p_part: vec![2],
            non_torsion: false,
        };
        let got = char_ideal(&m, r).unwrap();
        let expected = f.mul_scalar(&PadicScalar::from_i64(3, 10, 9)).unwrap();
        assert!(got.congruent(&expected));
        assert_eq!(got.mu(), Valuation::finite(2, 1));
        // empty module
        let empty = ElementaryModule {
            factors: vec![],
            p_part: vec![],
            non_torsion: false,
        };
        assert!(char_ideal(&empty, r).unwrap().congruent(&IwasawaSeries::one(r)));
        // non-torsion flag
        let nt = ElementaryModule {
            non_torsion: true,
            ..empty
        };
        assert!(char_ideal(&nt, r).unwrap().is_literal_zero());
    }

    #[test]
    fn char_ideal_is_multiplicative_over_direct_sums() {
        let r = ring(3, 10, 1, 8);
        let m1 = ElementaryModule {
            factors: vec![ElementaryFactor {
                f: from_terms(r, &[(&[1], 1), (&[0], 3)]),
                n: 2,
            }],
            p_part: vec![1],
            non_torsion: false,
        };
        let m2 = ElementaryModule {
            factors: vec![ElementaryFactor {
                f: from_terms(r, &[(&[2], 1), (&[0], 6)]),
                n: 1,
            }],
            p_part: vec![0, 3],
            non_torsion: false,
        };
        let lhs = char_ideal(&m1.direct_sum(&m2), r).unwrap();
        let rhs = char_ideal(&m1, r)
            .unwrap()
            .mul(&char_ideal(&m2, r).unwrap())
            .unwrap();
        assert!(lhs.congruent(&rhs));
    }

    #[test]
    fn char_ideal_rejects_unit_factors() {
        let r = ring(3, 10, 1, 8);
        let m = ElementaryModule {
            factors: vec![ElementaryFactor {
                f: IwasawaSeries::one(r),
                n: 1,
            }],
            p_part: vec![],
            non_torsion: false,
        };
        assert!(char_ideal(&m, r).is_err());
    }

    #[test]
    fn functional_equation_examples() {
        let r = ring(5, 10, 1, 10);
        // symmetric by construction: (1+t) + (1+t)^{-1} - 2
        let f = binomial_power(r, 0, 1)
            .add(&binomial_power(r, 0, -1))
            .unwrap()
            .sub(&IwasawaSeries::from_i64(r, 2))
            .unwrap();
        assert_eq!(functional_equation_check(&f).unwrap(), AssocVerdict::True);
        // t_0: sharp is -t_0 times a unit
        let t = IwasawaSeries::var(r, 0);
        assert_eq!(functional_equation_check(&t).unwrap(), AssocVerdict::True);
        // t_0 + p is not sharp-stable: the root -p maps to p/(1-p)
        let f = from_terms(r, &[(&[1], 1), (&[0], 5)]);
        assert_eq!(functional_equation_check(&f).unwrap(), AssocVerdict::False);
        // but its sharp-symmetrization f * sharp(f) is
        let sym = f.mul(&f.sharp().unwrap()).unwrap();
        assert_eq!(functional_equation_check(&sym).unwrap(), AssocVerdict::True);
    }

    #[test]
    fn root_lemma_remark_pair_is_a_regression_fixture() {
        let r = ring(3, 12, 2, 10);
        let (f, g) = remark_pair(r);
        let verdict = root_lemma_run(&f, &g, &[1, 2]).unwrap();
        assert!(!verdict.hypothesis_ok);
        assert_eq!(verdict.conclusion, AssocVerdict::False);
        assert!(!verdict.per_zeta.is_empty());
        for z in &verdict.per_zeta {
            assert_eq!(z.verdict, AssocVerdict::True, "zeta level {} exp {}", z.level, z.exponent);
        }
    }

    #[test]
    fn root_lemma_equal_and_unit_multiple_inputs() {
        let r = ring(3, 10, 2, 8);
        let f = from_terms(r, &[(&[1, 0], 1), (&[0, 1], 1), (&[0, 0], 3)]);
        let verdict = root_lemma_run(&f, &f, &[1]).unwrap();
        assert_eq!(verdict.conclusion, AssocVerdict::True);
        assert!(verdict.per_zeta.iter().all(|z| z.verdict == AssocVerdict::True));
        // unit multiple u = 1 + p t_0 t_1
        let u = from_terms(r, &[(&[0, 0], 1), (&[1, 1], 3)]);
        let g = f.mul(&u).unwrap();
        let verdict = root_lemma_run(&f, &g, &[1]).unwrap();
        assert!(verdict.hypothesis_ok);
        assert_eq!(verdict.conclusion, AssocVerdict::True);
        assert!(verdict.per_zeta.iter().all(|z| z.verdict == AssocVerdict::True));
    }

    #[test]
    fn monsky_examples() {
        let r = ring(3, 10, 1, 60);
        let one = Ratio::new(1, 1);
        // f = t_0: only the trivial character evaluates to (residue) zero
        let counts = monsky_counts(&IwasawaSeries::var(r, 0), 3, one).unwrap();
        assert_eq!(counts, vec![1, 1, 1, 1]);
        // f = 1: no character reaches valuation 1
        let counts = monsky_counts(&IwasawaSeries::one(r), 3, one).unwrap();
        assert_eq!(counts, vec![0, 0, 0, 0]);
        // f = (t_0 - p) * unit
        let f = from_terms(r, &[(&[1], 1), (&[0], -3)])
            .mul(&from_terms(r, &[(&[0], 1), (&[1], 3)]))
            .unwrap();
        let counts = monsky_counts(&f, 3, one).unwrap();
        assert_eq!(counts, vec![1, 1, 1, 1]);
    }

    #[test]
    fn monsky_counts_are_monotone_and_stabilize() {
        // at level 4 (phi = 54) certifying a valuation costs one digit
        // per pi-division: a value at 1 + 27/54 needs ~29 digits, so both
        // the scalar precision and the truncation cap floor((D+1)/54)
        // must exceed that; the fixtures are sparse, so a deep D is cheap
        let r = ring(3, 32, 1, 1620);
        for f in [
            from_terms(r, &[(&[2], 1), (&[1], 3), (&[0], 9)]),
            from_terms(r, &[(&[1], 2), (&[0], 3)]),
            from_terms(r, &[(&[3], 1), (&[0], 27)]),
        ] {
            let counts = monsky_counts(&f, 4, Ratio::new(1, 1)).unwrap();
            assert!(counts.windows(2).all(|w| w[0] <= w[1]), "{counts:?}");
            assert_eq!(counts[3], counts[4], "stabilization failed: {counts:?}");
        }
    }

    #[test]
    fn monsky_requires_mu_zero() {
        let r = ring(3, 10, 1, 8);
        let f = from_terms(r, &[(&[1], 3)]); // p t_0
        assert_eq!(
            monsky_counts(&f, 2, Ratio::new(1, 1)),
            Err(Error::HypothesisFailed)
        );
    }

    #[test]
    fn divisibility_by_kernel_examples() {
        let r = ring(3, 10, 2, 8);
        // s' = (1+t_0)(1+t_1)^{-1} - 1 for a = (1, -1)
        let a = vec![1i64, -1];
        let s = group_element(r, &a)
            .unwrap()
            .sub(&IwasawaSeries::one(r))
            .unwrap();
        let g = from_terms(r, &[(&[0, 0], 2), (&[1, 1], 1)]);
        let f = s.mul(&g).unwrap();
        assert!(divisibility_by_kernel(&f, &[a.clone()]).unwrap());
        assert!(!divisibility_by_kernel(&IwasawaSeries::one(r), &[a.clone()]).unwrap());
        assert!(divisibility_by_kernel(&IwasawaSeries::zero(r), &[a]).unwrap());
        // non-primitive generator rejected
        assert!(divisibility_by_kernel(&g, &[vec![2, 2]]).is_err());
        // d = 1: divisibility by t_0 itself
        let r1 = ring(3, 10, 1, 8);
        let f = IwasawaSeries::var(r1, 0)
            .mul(&from_terms(r1, &[(&[0], 1), (&[1], 1)]))
            .unwrap();
        assert!(divisibility_by_kernel(&f, &[vec![1]]).unwrap());
        assert!(!divisibility_by_kernel(&IwasawaSeries::one(r1), &[vec![1]]).unwrap());
    }

    #[test]
    fn specialization_shape_check_examples() {
        let p = 5u64;
        let r2 = ring(p, 8, 2, 8);
        let r1 = ring(p, 8, 1, 8);
        let tower = TowerConfig {
            d: 2,
            gamma0_index: 0,
            maps: vec![],
            s_places: vec!["v".into()],
            torsion_order: 1,
        };
        let m = SubgroupMap::new(vec![vec![1, 0]]).unwrap();
        // theta = sigma' - 1 = t_0 for a ramified split place surviving to L'
        let place = PlaceData {
            id: "v".into(),
            q_v: p,
            reduction: Reduction::SplitMult,
            m_v: 1,
            frobenius: vec![0, 1],
            in_s: true,
            sigma: Some(vec![0, 1]),
            gamma_rank: 1,
            fq2_in_l: false,
            ramified_in_l0_prime: false,
            tate_char_ideal: None,
        };
        let shape = LocalShape {
            psi_rank: 1,
            gamma_rank: 1,
            sigma: Some(vec![1]),
            in_s_prime: true,
            fq2_in_l_prime: false,
        };
        // M' has CH = h; M has CH = ((1+t_0)-1) * H with H a lift of h,
        // so that specializing gives t * h = theta * CH(M')
        let h = from_terms(r1, &[(&[2], 1), (&[0], p as i64)]);
        let h_lift = from_terms(r2, &[(&[2, 0], 1), (&[0, 0], p as i64)]);
        let top_f = binomial_power(r2, 0, 1)
            .sub(&IwasawaSeries::one(r2))
            .unwrap()
            .mul(&h_lift)
            .unwrap();
        let m_top = ElementaryModule {
            factors: vec![ElementaryFactor { f: top_f, n: 1 }],
            p_part: vec![],
            non_torsion: false,
        };
        let m_bot = ElementaryModule {
            factors: vec![ElementaryFactor { f: h.clone(), n: 1 }],
            p_part: vec![],
            non_torsion: false,
        };
        let shaped = vec![(place, shape)];
        let got = specialization_shape_check(&m_top, &m_bot, &tower, &shaped, &m, r2, r1).unwrap();
        assert_eq!(got, AssocVerdict::True);
        // perturb one side by the non-unit t_0 + p
        let m_bad = ElementaryModule {
            factors: vec![
                ElementaryFactor { f: h, n: 1 },
                ElementaryFactor {
                    f: from_terms(r1, &[(&[1], 1), (&[0], p as i64)]),
                    n: 1,
                },
            ],
            p_part: vec![],
            non_torsion: false,
        };
        let got = specialization_shape_check(&m_top, &m_bad, &tower, &shaped, &m, r2, r1).unwrap();
        assert_eq!(got, AssocVerdict::False);
        // trivial tower: identity map, no places
        let id2 = SubgroupMap::identity(2);
        let got = specialization_shape_check(&m_top, &m_top, &tower, &[], &id2, r2, r2).unwrap();
        assert_eq!(got, AssocVerdict::True);
    }

    #[test]
    fn verdict_serialization_round_trip() {
        let r = ring(3, 8, 2, 6);
        let (f, g) = remark_pair(r);
        let verdict = root_lemma_run(&f, &g, &[1]).unwrap();
        let json = serde_json::to_string(&verdict).unwrap();
        let back: RootLemmaVerdict = serde_json::from_str(&json).unwrap();
        assert_eq!(verdict, back);
        let m = ElementaryModule {
            factors: vec![ElementaryFactor {
                f: IwasawaSeries::var(r, 0),
                n: 2,
            }],
            p_part: vec![1, 2],
            non_torsion: false,
        };
        let json = serde_json::to_string(&m).unwrap();
        let back: ElementaryModule = serde_json::from_str(&json).unwrap();
        assert_eq!(m, back);
        let _ = BTreeMap::<String, u32>::new();
    }
}

