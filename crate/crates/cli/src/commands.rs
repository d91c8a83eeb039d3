//! Typed request shapes and the shared dispatcher used by both the
//! subcommands and the scenario suite.

use std::collections::BTreeMap;

use num_rational::Ratio;
use serde::Deserialize;
use serde_json::{json, Value};

use iwalg::chars::{chi_map, norm_descent, twist, FiniteCharacter, FiniteIndexSubgroup};
use iwalg::euler::{
    c_chi, dagger, dagger_chi, diamond, rho_unit_check, star_factor, theta_factor, unit_root,
    LPolynomial, LocalShape, PlaceData, TowerConfig,
};
use iwalg::harness::{
    char_ideal, functional_equation_check, monsky_counts, root_lemma_run, ElementaryFactor,
    ElementaryModule,
};
use iwalg::moduli::{classify_fibers, construct_semistable, membership, PairData, WeierstrassPair};
use iwalg::padic::Prime;
use iwalg::series::{specialize, weierstrass_prepare, SubgroupMap};

use crate::input::{
    decode, render_valuation, schema_err, CliResult, CoeffInput, Config, RingInput, SeriesInput,
};

fn to_value<T: serde::Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("serializable output")
}

#[derive(Deserialize)]
struct SeriesReq {
    series: SeriesInput,
}

#[derive(Deserialize)]
struct PrepareReq {
    series: SeriesInput,
    #[serde(default)]
    var: usize,
}

#[derive(Deserialize)]
struct SpecializeReq {
    series: SeriesInput,
    map: SubgroupMap,
    level: Option<u32>,
}

#[derive(Deserialize)]
struct TwistReq {
    series: SeriesInput,
    chi: FiniteCharacter,
}

#[derive(Deserialize)]
struct NormReq {
    series: SeriesInput,
    subgroup: FiniteIndexSubgroup,
}

#[derive(Deserialize)]
struct ChiMapReq {
    series: SeriesInput,
    chi: FiniteCharacter,
    map: SubgroupMap,
}

#[derive(Deserialize)]
struct ThetaReq {
    place: PlaceData,
    shape: LocalShape,
    map: SubgroupMap,
    target: RingInput,
}

#[derive(Deserialize)]
struct DaggerReq {
    tower: TowerConfig,
    places: Vec<PlaceData>,
    ring: RingInput,
}

#[derive(Deserialize)]
struct DiamondReq {
    place: PlaceData,
    chi: FiniteCharacter,
    tower: TowerConfig,
    ring: RingInput,
}

#[derive(Deserialize)]
struct StarReq {
    omega: FiniteCharacter,
    tower: TowerConfig,
    places: Vec<PlaceData>,
    dagger: SeriesInput,
    #[serde(default)]
    conductor: BTreeMap<String, u32>,
    tau: CoeffInput,
    deg_delta: i64,
    kappa: i64,
    q: u64,
}

#[derive(Deserialize)]
struct CchiReq {
    ring: RingInput,
    lpoly: Vec<CoeffInput>,
    q: u64,
}

#[derive(Deserialize)]
struct FactorInput {
    f: SeriesInput,
    n: u32,
}

#[derive(Deserialize)]
struct ModuleInput {
    #[serde(default)]
    factors: Vec<FactorInput>,
    #[serde(default)]
    p_part: Vec<u32>,
    #[serde(default)]
    non_torsion: bool,
}

#[derive(Deserialize)]
struct CharIdealReq {
    ring: RingInput,
    module: ModuleInput,
}

#[derive(Deserialize)]
struct RootLemmaReq {
    f: SeriesInput,
    g: SeriesInput,
    zeta_levels: Vec<u32>,
}

#[derive(Deserialize)]
struct MonskyReq {
    series: SeriesInput,
    max_level: u32,
    threshold: ThresholdInput,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ThresholdInput {
    Num(i64),
    Str(String),
}

impl ThresholdInput {
    fn build(&self) -> CliResult<Ratio<i64>> {
        match self {
            ThresholdInput::Num(v) => Ok(Ratio::new(*v, 1)),
            ThresholdInput::Str(s) => {
                let parse = |part: &str| part.trim().parse::<i64>().ok();
                let r = match s.split_once('/') {
                    Some((a, b)) => match (parse(a), parse(b)) {
                        (Some(a), Some(b)) if b != 0 => Some(Ratio::new(a, b)),
                        _ => None,
                    },
                    None => parse(s).map(|a| Ratio::new(a, 1)),
                };
                r.ok_or_else(|| schema_err("/threshold", format!("bad rational {s:?}")))
            }
        }
    }
}

#[derive(Deserialize)]
struct PairReq {
    pair: PairData,
}

#[derive(Deserialize)]
struct ConstructReq {
    q: u64,
    n: u32,
    seed: Option<u64>,
}

#[derive(Deserialize)]
struct RhoReq {
    place: PlaceData,
    chi: FiniteCharacter,
    tower: TowerConfig,
    ring: RingInput,
}

#[derive(Deserialize)]
struct UnitRootReq {
    place: PlaceData,
    p: u64,
    #[serde(rename = "N")]
    n: Option<u32>,
}

#[derive(Deserialize)]
struct DaggerChiReq {
    chi: FiniteCharacter,
    tower: TowerConfig,
    places: Vec<PlaceData>,
    #[serde(default)]
    conductor: BTreeMap<String, u32>,
    tau: CoeffInput,
    deg_delta: i64,
    kappa: i64,
    deg_d_chi: i64,
    q: u64,
    ring: RingInput,
}

/// Run one command on a decoded JSON request. Returns the canonical JSON
/// output document.
pub fn run_command(name: &str, input: Value, cfg: &Config) -> CliResult<Value> {
    match name {
        "mu" => {
            let req: SeriesReq = decode(input, "")?;
            let f = req.series.build(cfg, "/series")?;
            Ok(json!({ "mu": render_valuation(f.mu()) }))
        }
        "sharp" => {
            let req: SeriesReq = decode(input, "")?;
            let f = req.series.build(cfg, "/series")?;
            Ok(json!({ "series": to_value(&f.sharp()?) }))
        }
        "prepare" => {
            let req: PrepareReq = decode(input, "")?;
            let f = req.series.build(cfg, "/series")?;
            if req.var >= f.ring.vars {
                return Err(schema_err("/var", "variable index out of range"));
            }
            let prep = weierstrass_prepare(&f, req.var)?;
            Ok(json!({
                "mu": render_valuation(iwalg::padic::Valuation::Finite(prep.mu)),
                "unit": to_value(&prep.unit),
                "distinguished": {
                    "var": prep.distinguished.var,
                    "lambda": prep.distinguished.lambda,
                    "poly": to_value(&prep.distinguished.poly),
                },
            }))
        }
        "specialize" => {
            let req: SpecializeReq = decode(input, "")?;
            let f = req.series.build(cfg, "/series")?;
            let target = f
                .ring
                .with_vars(req.map.target_vars())
                .with_level(req.level.unwrap_or(f.ring.level));
            let g = specialize(&f, &req.map, target)?;
            Ok(json!({ "series": to_value(&g) }))
        }
        "twist" => {
            let req: TwistReq = decode(input, "")?;
            let f = req.series.build(cfg, "/series")?;
            Ok(json!({ "series": to_value(&twist(&f, &req.chi)?) }))
        }
        "norm" => {
            let req: NormReq = decode(input, "")?;
            let f = req.series.build(cfg, "/series")?;
            Ok(json!({ "series": to_value(&norm_descent(&f, &req.subgroup)?) }))
        }
        "chimap" => {
            let req: ChiMapReq = decode(input, "")?;
            let f = req.series.build(cfg, "/series")?;
            let target = f.ring.with_vars(req.map.target_vars());
            let g = chi_map(&f, &req.chi, &req.map, target)?;
            Ok(json!({ "series": to_value(&g) }))
        }
        "theta" => {
            let req: ThetaReq = decode(input, "")?;
            let target = req.target.build(cfg)?;
            let out = theta_factor(&req.place, &req.shape, &req.map, target)?;
            Ok(json!({ "ideal": to_value(&out) }))
        }
        "dagger" => {
            let req: DaggerReq = decode(input, "")?;
            let ring = req.ring.build(cfg)?;
            Ok(json!({ "series": to_value(&dagger(&req.tower, &req.places, ring)?) }))
        }
        "diamond" => {
            let req: DiamondReq = decode(input, "")?;
            let ring = req.ring.build(cfg)?;
            let g = diamond(&req.place, &req.chi, &req.tower, ring)?;
            Ok(json!({ "series": to_value(&g) }))
        }
        "star" => {
            let req: StarReq = decode(input, "")?;
            let dag = req.dagger.build(cfg, "/dagger")?;
            let prime = dag.ring.prime;
            let tau = req.tau.build(prime.p, prime.precision, "/tau")?;
            let s = star_factor(
                &req.omega,
                &req.tower,
                &req.places,
                &dag,
                &req.conductor,
                &tau,
                req.deg_delta,
                req.kappa,
                req.q,
            )?;
            Ok(json!({ "scalar": to_value(&s) }))
        }
        "cchi" => {
            let req: CchiReq = decode(input, "")?;
            let ring = req.ring.build(cfg)?;
            let coeffs = req
                .lpoly
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    c.build(
                        ring.prime.p,
                        ring.prime.precision,
                        &format!("/lpoly/{i}"),
                    )
                })
                .collect::<CliResult<Vec<_>>>()?;
            let lp = LPolynomial { coeffs };
            Ok(json!({ "series": to_value(&c_chi(&lp, req.q, ring)?) }))
        }
        "charideal" => {
            let req: CharIdealReq = decode(input, "")?;
            let ring = req.ring.build(cfg)?;
            let mut factors = Vec::new();
            for (i, fac) in req.module.factors.iter().enumerate() {
                factors.push(ElementaryFactor {
                    f: fac.f.build(cfg, &format!("/module/factors/{i}/f"))?,
                    n: fac.n,
                });
            }
            let module = ElementaryModule {
                factors,
                p_part: req.module.p_part.clone(),
                non_torsion: req.module.non_torsion,
            };
            Ok(json!({ "series": to_value(&char_ideal(&module, ring)?) }))
        }
        "fe-check" => {
            let req: SeriesReq = decode(input, "")?;
            let f = req.series.build(cfg, "/series")?;
            let verdict = functional_equation_check(&f)?;
            Ok(json!({ "verdict": to_value(&verdict), "associates": verdict.is_true() }))
        }
        "root-lemma" => {
            let req: RootLemmaReq = decode(input, "")?;
            let f = req.f.build(cfg, "/f")?;
            let g = req.g.build(cfg, "/g")?;
            let v = root_lemma_run(&f, &g, &req.zeta_levels)?;
            Ok(json!({
                "hypothesis_ok": v.hypothesis_ok,
                "per_zeta": to_value(&v.per_zeta),
                "conclusion": to_value(&v.conclusion),
                "associates": v.conclusion.is_true(),
            }))
        }
        "monsky" => {
            let req: MonskyReq = decode(input, "")?;
            let f = req.series.build(cfg, "/series")?;
            let threshold = req.threshold.build()?;
            let counts = monsky_counts(&f, req.max_level, threshold)?;
            Ok(json!({ "counts": counts }))
        }
        "moduli-member" => {
            let req: PairReq = decode(input, "")?;
            let wp = WeierstrassPair::from_data(&req.pair)?;
            let report = membership(&wp)?;
            Ok(json!({ "member": report.member, "report": to_value(&report) }))
        }
        "moduli-classify" => {
            let req: PairReq = decode(input, "")?;
            let wp = WeierstrassPair::from_data(&req.pair)?;
            Ok(json!({ "report": to_value(&classify_fibers(&wp)?) }))
        }
        "moduli-construct" => {
            let req: ConstructReq = decode(input, "")?;
            let wp = construct_semistable(req.q, req.n, req.seed.unwrap_or(cfg.seed))?;
            let report = classify_fibers(&wp)?;
            Ok(json!({ "pair": to_value(&wp.to_data()), "report": to_value(&report) }))
        }
        // auxiliary flows reachable from the suite
        "rho-check" => {
            let req: RhoReq = decode(input, "")?;
            let ring = req.ring.build(cfg)?;
            let ok = rho_unit_check(&req.place, &req.chi, &req.tower, ring)?;
            Ok(json!({ "is_unit": ok }))
        }
        "unit-root" => {
            let req: UnitRootReq = decode(input, "")?;
            let prime = Prime {
                p: req.p,
                precision: req.n.unwrap_or(cfg.precision),
            };
            let alpha = unit_root(prime, &req.place)?;
            Ok(json!({ "scalar": to_value(&alpha) }))
        }
        "dagger-chi" => {
            let req: DaggerChiReq = decode(input, "")?;
            let ring = req.ring.build(cfg)?;
            let tau = req
                .tau
                .build(ring.prime.p, ring.prime.precision, "/tau")?;
            let g = dagger_chi(
                &req.chi,
                &req.tower,
                &req.places,
                &req.conductor,
                &tau,
                req.deg_delta,
                req.kappa,
                req.deg_d_chi,
                req.q,
                ring,
            )?;
            Ok(json!({ "series": to_value(&g) }))
        }
        _ => Err(schema_err("/cmd", format!("unknown command {name:?}"))),
    }
}
