//! Semistability bookkeeping for Weierstrass fibrations over P^1: membership
//! of a pair (g2, g3) in the locus where every fiber has reduction data
//! bounded away from the non-minimal range, per-fiber reduction types, and a
//! rejection-sampling construction of everywhere-semistable pairs.

pub mod gf;
pub mod poly;

use crate::error::{Error, Result};
use gf::{Fq, Gf};
use poly::Poly;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// A pair (g2, g3) over F_q, q = p^r with p > 3, with twist degree n:
/// deg g2 <= 4n, deg g3 <= 6n, and orders at infinity read off as
/// 4n - deg g2 etc.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeierstrassPair {
    pub field: Gf,
    pub n: u32,
    pub g2: Poly,
    pub g3: Poly,
}

/// Serialization mirror: coefficients as coordinate vectors over F_p.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairData {
    pub p: u64,
    pub r: u32,
    pub n: u32,
    pub g2: Vec<Vec<u64>>,
    pub g3: Vec<Vec<u64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FiberClass {
    Good,
    Multiplicative,
    Additive,
}

/// One closed point of P^1 in the support of div(g2) + div(g3) + div(Delta),
/// or the point at infinity. `ord_g2`/`ord_g3` are None when the polynomial
/// is identically zero.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiberPoint {
    pub place: String,
    pub degree: u32,
    pub ord_g2: Option<u32>,
    pub ord_g3: Option<u32>,
    pub ord_delta: u32,
    pub class: FiberClass,
    /// min(3 ord_v g2, 2 ord_v g3) < 12 at this point
    pub min_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiberReport {
    pub member: bool,
    pub delta_identically_zero: bool,
    pub points: Vec<FiberPoint>,
}

impl FiberReport {
    pub fn additive_count(&self) -> usize {
        self.points
            .iter()
            .filter(|pt| pt.class == FiberClass::Additive)
            .count()
    }
}

impl WeierstrassPair {
    pub fn new(field: Gf, n: u32, g2: Poly, g3: Poly) -> Result<Self> {
        if let Some(d) = g2.degree() {
            if d as u32 > 4 * n {
                return Err(Error::BadInput(format!(
                    "deg g2 = {d} exceeds 4n = {}",
                    4 * n
                )));
            }
        }
        if let Some(d) = g3.degree() {
            if d as u32 > 6 * n {
                return Err(Error::BadInput(format!(
                    "deg g3 = {d} exceeds 6n = {}",
                    6 * n
                )));
            }
        }
        Ok(WeierstrassPair { field, n, g2, g3 })
    }

    pub fn from_data(data: &PairData) -> Result<Self> {
        let field = Gf::new(data.p, data.r)?;
        let check = |cs: &[Vec<u64>]| -> Result<Vec<Fq>> {
            cs.iter()
                .map(|c| {
                    if c.len() != data.r as usize {
                        return Err(Error::BadInput(format!(
                            "coefficient has {} coordinates, field has degree {}",
                            c.len(),
                            data.r
                        )));
                    }
                    Ok(c.iter().map(|&d| d % data.p).collect())
                })
                .collect()
        };
        let g2 = Poly::from_coeffs(&field, check(&data.g2)?);
        let g3 = Poly::from_coeffs(&field, check(&data.g3)?);
        WeierstrassPair::new(field, data.n, g2, g3)
    }

    pub fn to_data(&self) -> PairData {
        PairData {
            p: self.field.p,
            r: self.field.r,
            n: self.n,
            g2: self.g2.coeffs.clone(),
            g3: self.g3.coeffs.clone(),
        }
    }

    /// Delta = (g2^3 - g3^2)/1728; needs p > 3 so 1728 is invertible.
    pub fn delta(&self) -> Result<Poly> {
        let f = &self.field;
        if f.p <= 3 {
            return Err(Error::CharTooSmall(f.p));
        }
        let num = self.g2.pow(f, 3).sub(f, &self.g3.mul(f, &self.g3));
        let inv1728 = f.inv(&f.embed(1728 % f.p))?;
        Ok(num.scale(f, &inv1728))
    }

    /// The G_m-action: (g2, g3) -> (u^4 g2, u^6 g3) for a unit u.
    pub fn gm_twist(&self, u: &Fq) -> Result<WeierstrassPair> {
        let f = &self.field;
        if f.is_zero(u) {
            return Err(Error::BadInput("G_m twist by zero".into()));
        }
        Ok(WeierstrassPair {
            field: f.clone(),
            n: self.n,
            g2: self.g2.scale(f, &f.pow(u, 4)),
            g3: self.g3.scale(f, &f.pow(u, 6)),
        })
    }

    /// Whether two pairs lie in the same G_m-orbit (brute force over units).
    pub fn gm_equivalent(&self, other: &WeierstrassPair) -> bool {
        if self.field != other.field || self.n != other.n {
            return false;
        }
        let f = &self.field;
        for idx in 1..f.q() {
            let u = f.element(idx);
            let tw = self.gm_twist(&u).expect("nonzero unit");
            if tw.g2 == other.g2 && tw.g3 == other.g3 {
                return true;
            }
        }
        false
    }
}

fn classify(ord_g2: Option<u32>, ord_delta: u32) -> FiberClass {
    if ord_delta == 0 {
        FiberClass::Good
    } else if ord_g2 == Some(0) {
        FiberClass::Multiplicative
    } else {
        FiberClass::Additive
    }
}

fn min_order_ok(ord_g2: Option<u32>, ord_g3: Option<u32>) -> bool {
    let a = ord_g2.map(|o| 3 * o);
    let b = ord_g3.map(|o| 2 * o);
    match (a, b) {
        (Some(x), Some(y)) => x.min(y) < 12,
        (Some(x), None) => x < 12,
        (None, Some(y)) => y < 12,
        (None, None) => false,
    }
}

/// Membership check: min(3 ord_v g2, 2 ord_v g3) < 12 at every closed point
/// of P^1, including infinity, and Delta not identically zero. The report
/// lists every point in the support of div(g2) + div(g3) + div(Delta).
pub fn membership(wp: &WeierstrassPair) -> Result<FiberReport> {
    let f = &wp.field;
    if f.p <= 3 {
        return Err(Error::CharTooSmall(f.p));
    }
    let delta = wp.delta()?;
    if delta.is_zero() {
        return Ok(FiberReport {
            member: false,
            delta_identically_zero: true,
            points: Vec::new(),
        });
    }

    // Union of irreducible supports, ordered by (degree, coefficients).
    let mut places: Vec<Poly> = Vec::new();
    for poly in [&wp.g2, &wp.g3, &delta] {
        if poly.is_zero() || poly.is_constant() {
            continue;
        }
        for (factor, _) in poly.factor(f)? {
            if !places.contains(&factor) {
                places.push(factor);
            }
        }
    }
    places.sort_by_key(|p| {
        (
            p.coeffs.len(),
            p.coeffs
                .iter()
                .rev()
                .map(|c| f.index(c))
                .collect::<Vec<_>>(),
        )
    });

    let ord_of = |poly: &Poly, at: &Poly| -> Result<Option<u32>> {
        if poly.is_zero() {
            return Ok(None);
        }
        Ok(Some(poly.order_at(f, at)?))
    };

    let mut points = Vec::new();
    let mut member = true;
    for place in &places {
        let o2 = ord_of(&wp.g2, place)?;
        let o3 = ord_of(&wp.g3, place)?;
        let od = delta.order_at(f, place)?;
        let ok = min_order_ok(o2, o3);
        member &= ok;
        points.push(FiberPoint {
            place: place.render(f),
            degree: place.degree().unwrap_or(0) as u32,
            ord_g2: o2,
            ord_g3: o3,
            ord_delta: od,
            class: classify(o2, od),
            min_ok: ok,
        });
    }

    // Point at infinity via degree bookkeeping.
    let inf_ord = |poly: &Poly, bound: u32| -> Option<u32> {
        poly.degree().map(|d| bound - d as u32)
    };
    let o2 = inf_ord(&wp.g2, 4 * wp.n);
    let o3 = inf_ord(&wp.g3, 6 * wp.n);
    let od = inf_ord(&delta, 12 * wp.n).expect("delta nonzero");
    let ok = min_order_ok(o2, o3);
    member &= ok;
    points.push(FiberPoint {
        place: "inf".into(),
        degree: 1,
        ord_g2: o2,
        ord_g3: o3,
        ord_delta: od,
        class: classify(o2, od),
        min_ok: ok,
    });

    Ok(FiberReport {
        member,
        delta_identically_zero: false,
        points,
    })
}

/// Per-fiber reduction types; requires the pair to pass membership.
pub fn classify_fibers(wp: &WeierstrassPair) -> Result<FiberReport> {
    let report = membership(wp)?;
    if !report.member {
        return Err(Error::BadInput("pair fails membership".into()));
    }
    Ok(report)
}

/// Retry budget for the rejection sampler.
pub const CONSTRUCT_BUDGET: u64 = 10_000;

/// Decompose a prime power q = p^r.
pub fn prime_power(q: u64) -> Result<(u64, u32)> {
    for p in 2..=q {
        if q % p == 0 {
            let mut m = q;
            let mut r = 0u32;
            while m % p == 0 {
                m /= p;
                r += 1;
            }
            if m == 1 {
                return Ok((p, r));
            }
            return Err(Error::BadInput(format!("{q} is not a prime power")));
        }
    }
    Err(Error::BadInput(format!("{q} is not a prime power")))
}

/// Rejection sampling following the nonemptiness recipe: g2 of exact degree
/// 4n with squarefree divisor, g3 of exact degree 6n squarefree, coprime to
/// g2, with squarefree Delta; the result passes membership with no additive
/// fiber.
pub fn construct_semistable(q: u64, n: u32, seed: u64) -> Result<WeierstrassPair> {
    let (p, r) = prime_power(q)?;
    if p <= 3 {
        return Err(Error::CharTooSmall(p));
    }
    if n == 0 {
        // no room for a nonconstant divisor: the recipe has no valid degrees
        return Err(Error::SearchExhausted(0));
    }
    let field = Gf::new(p, r)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sample = |rng: &mut ChaCha8Rng, deg: u32| -> Poly {
        let mut coeffs: Vec<Fq> = (0..deg)
            .map(|_| field.element(rng.gen_range(0..field.q())))
            .collect();
        coeffs.push(field.element(rng.gen_range(1..field.q())));
        Poly::from_coeffs(&field, coeffs)
    };
    for _ in 0..CONSTRUCT_BUDGET {
        let g2 = sample(&mut rng, 4 * n);
        if !g2.is_squarefree(&field)? {
            continue;
        }
        let g3 = sample(&mut rng, 6 * n);
        if !g3.is_squarefree(&field)? {
            continue;
        }
        if !g2.gcd(&field, &g3)?.is_constant() {
            continue;
        }
        let wp = WeierstrassPair::new(field.clone(), n, g2, g3)?;
        let delta = wp.delta()?;
        if delta.is_zero() || !delta.is_squarefree(&field)? {
            continue;
        }
        let report = membership(&wp)?;
        if report.member && report.additive_count() == 0 {
            return Ok(wp);
        }
    }
    Err(Error::SearchExhausted(CONSTRUCT_BUDGET))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f5() -> Gf {
        Gf::new(5, 1).unwrap()
    }

    fn pair(n: u32, g2: &[u64], g3: &[u64]) -> WeierstrassPair {
        let f = f5();
        WeierstrassPair::new(
            f.clone(),
            n,
            Poly::from_indices(&f, g2),
            Poly::from_indices(&f, g3),
        )
        .unwrap()
    }

    #[test]
    fn simple_zeros_member() {
        // g2 = x(x-1)(x-2)(x-3), squarefree; g3 = 1 nonvanishing
        let f = f5();
        let mut g2 = Poly::constant(&f, f.one());
        for a in 0..4u64 {
            let root = Poly::from_coeffs(&f, vec![f.neg(&f.element(a)), f.one()]);
            g2 = g2.mul(&f, &root);
        }
        let wp = WeierstrassPair::new(f.clone(), 1, g2, Poly::constant(&f, f.one())).unwrap();
        let report = membership(&wp).unwrap();
        assert!(report.member);
        // at every zero of g2 the minimum order is at most 2
        for pt in &report.points {
            if pt.ord_g2 == Some(1) {
                assert!(pt.min_ok);
                assert_eq!(pt.ord_g3, Some(0));
            }
        }
    }

    #[test]
    fn shared_fourth_sixth_power_rejected() {
        // g2 = h^4, g3 = 2 h^6, h = x + 1: orders (4, 6), min(12, 12) = 12
        let f = f5();
        let h = Poly::from_indices(&f, &[1, 1]);
        let wp = WeierstrassPair::new(
            f.clone(),
            1,
            h.pow(&f, 4),
            h.pow(&f, 6).scale(&f, &f.element(2)),
        )
        .unwrap();
        let report = membership(&wp).unwrap();
        assert!(!report.member);
        let bad = report.points.iter().find(|pt| pt.place == "x + 1").unwrap();
        assert_eq!((bad.ord_g2, bad.ord_g3), (Some(4), Some(6)));
        assert!(!bad.min_ok);
        assert_eq!(bad.ord_delta, 12);
    }

    #[test]
    fn identically_zero_delta_rejected() {
        // g2 = h^4, g3 = h^6: g2^3 = g3^2
        let f = f5();
        let h = Poly::from_indices(&f, &[1, 1]);
        let wp = WeierstrassPair::new(f.clone(), 1, h.pow(&f, 4), h.pow(&f, 6)).unwrap();
        let report = membership(&wp).unwrap();
        assert!(!report.member);
        assert!(report.delta_identically_zero);
        assert!(classify_fibers(&wp).is_err());
    }

    #[test]
    fn constant_delta_all_good() {
        // constants with g2^3 != g3^2: no finite support, infinity good
        let wp = pair(0, &[2], &[1]);
        let report = classify_fibers(&wp).unwrap();
        assert!(report.member);
        assert!(report
            .points
            .iter()
            .all(|pt| pt.class == FiberClass::Good));
    }

    #[test]
    fn common_zero_is_additive() {
        // g2 and g3 both vanish at x = 0, so Delta does too
        let f = f5();
        let mut g2 = Poly::x(&f);
        for a in [1u64, 2, 3] {
            let root = Poly::from_coeffs(&f, vec![f.neg(&f.element(a)), f.one()]);
            g2 = g2.mul(&f, &root);
        }
        let wp = WeierstrassPair::new(f.clone(), 1, g2, Poly::x(&f)).unwrap();
        let report = membership(&wp).unwrap();
        assert!(report.member); // orders (1,1): min(3,2) = 2 < 12
        let at_zero = report.points.iter().find(|pt| pt.place == "x").unwrap();
        assert_eq!(at_zero.class, FiberClass::Additive);
        assert!(report.additive_count() >= 1);
    }

    #[test]
    fn disjoint_supports_semistable() {
        let wp = construct_semistable(5, 1, 7).unwrap();
        let delta = wp.delta().unwrap();
        // supports of div(Delta) and div(g2) are disjoint
        assert!(delta.gcd(&wp.field, &wp.g2).unwrap().is_constant());
        let report = classify_fibers(&wp).unwrap();
        assert_eq!(report.additive_count(), 0);
        // at each zero v of g2: Delta(v) = -g3(v)^2/1728 != 0
        let f = &wp.field;
        for n in 0..f.q() {
            let v = f.element(n);
            if f.is_zero(&wp.g2.eval(f, &v)) {
                assert!(!f.is_zero(&delta.eval(f, &v)));
                assert!(!f.is_zero(&wp.g3.eval(f, &v)));
            }
        }
    }

    #[test]
    fn constructed_orders_bounded() {
        for seed in [0u64, 1, 2] {
            let wp = construct_semistable(5, 1, seed).unwrap();
            let report = membership(&wp).unwrap();
            assert!(report.member);
            assert_eq!(report.additive_count(), 0);
            for pt in &report.points {
                let o2 = pt.ord_g2.unwrap();
                let o3 = pt.ord_g3.unwrap();
                assert!(o2 <= 1 && o3 <= 1, "orders at {}", pt.place);
                assert!(!(o2 == 1 && o3 == 1), "shared zero at {}", pt.place);
            }
        }
    }

    #[test]
    fn degenerate_and_bad_parameters() {
        assert_eq!(
            construct_semistable(5, 0, 1).unwrap_err(),
            Error::SearchExhausted(0)
        );
        assert_eq!(
            construct_semistable(9, 1, 1).unwrap_err(),
            Error::CharTooSmall(3)
        );
        assert!(matches!(
            construct_semistable(6, 1, 1).unwrap_err(),
            Error::BadInput(_)
        ));
        let f3 = Gf::new(3, 1).unwrap();
        let wp = WeierstrassPair::new(f3.clone(), 1, Poly::x(&f3), Poly::x(&f3)).unwrap();
        assert_eq!(membership(&wp).unwrap_err(), Error::CharTooSmall(3));
    }

    /// Brute-force oracle: evaluate Delta and g2 at every F_{q^k}-point,
    /// k <= 3, and compare vanishing-pattern counts with the report (a
    /// degree-d point contributes d conjugate roots whenever d | k).
    fn oracle_check(wp: &WeierstrassPair) {
        let report = membership(wp).unwrap();
        let delta = wp.delta().unwrap();
        let p = wp.field.p;
        assert_eq!(wp.field.r, 1, "oracle needs a prime base field");
        for k in 1..=3u32 {
            let ext = Gf::new(p, k).unwrap();
            let mut mult = 0u32;
            let mut addv = 0u32;
            for nidx in 0..ext.q() {
                let a = ext.element(nidx);
                let dz = ext.is_zero(&delta.eval_in(&ext, &a).unwrap());
                let g2z = ext.is_zero(&wp.g2.eval_in(&ext, &a).unwrap());
                if dz && !g2z {
                    mult += 1;
                } else if dz && g2z {
                    addv += 1;
                }
            }
            let expect = |class: FiberClass| -> u32 {
                report
                    .points
                    .iter()
                    .filter(|pt| pt.place != "inf" && pt.class == class && k % pt.degree == 0)
                    .map(|pt| pt.degree)
                    .sum()
            };
            assert_eq!(mult, expect(FiberClass::Multiplicative), "k = {k}");
            assert_eq!(addv, expect(FiberClass::Additive), "k = {k}");
        }
    }

    #[test]
    fn classification_matches_point_oracle() {
        for seed in [3u64, 11, 29] {
            let wp = construct_semistable(5, 1, seed).unwrap();
            oracle_check(&wp);
        }
        // and one pair with an additive fiber
        let f = f5();
        let mut g2 = Poly::x(&f);
        for a in [1u64, 2, 3] {
            let root = Poly::from_coeffs(&f, vec![f.neg(&f.element(a)), f.one()]);
            g2 = g2.mul(&f, &root);
        }
        let wp = WeierstrassPair::new(f.clone(), 1, g2, Poly::x(&f)).unwrap();
        oracle_check(&wp);
    }

    #[test]
    fn gm_twist_preserves_classification() {
        let wp = construct_semistable(5, 1, 13).unwrap();
        let u = wp.field.element(3);
        let tw = wp.gm_twist(&u).unwrap();
        let a = membership(&wp).unwrap();
        let b = membership(&tw).unwrap();
        let strip = |r: &FiberReport| -> Vec<(String, Option<u32>, u32, FiberClass)> {
            r.points
                .iter()
                .map(|pt| (pt.place.clone(), pt.ord_g2, pt.ord_delta, pt.class))
                .collect()
        };
        assert_eq!(strip(&a), strip(&b));
        assert!(wp.gm_equivalent(&tw));
        assert!(tw.gm_equivalent(&wp));
    }

    #[test]
    fn pair_data_round_trip() {
        let wp = construct_semistable(5, 1, 21).unwrap();
        let data = wp.to_data();
        let json = serde_json::to_string(&data).unwrap();
        let back: PairData = serde_json::from_str(&json).unwrap();
        let wp2 = WeierstrassPair::from_data(&back).unwrap();
        assert_eq!(wp, wp2);
    }
}
