//! Scenario files: JSON input naming maps, sample clouds, covers, actions, atlases, chart
//! simplices and the list of checks to run. See `docs/scenario.schema.json`.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use cocycle_core::cech_group::{Atlas, AtlasChart, CoverSpec, Generator, GroupActionSpec, Membership};
use cocycle_core::cocycle::ChartSimplex;
use cocycle_core::invariant_poly::{chern_character_component, invariant_from_symfun, todd_component, InvariantMap};
use cocycle_core::map_dsl::{library, parse_expr, parse_map_with, CRational, Constants, HoloMap, Holomorphic};
use cocycle_core::{Complex64, Point};
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::error::CliError;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub name: String,
    pub n: usize,
    #[serde(default)]
    pub constants: BTreeMap<String, ConstantSpec>,
    #[serde(default)]
    pub maps: BTreeMap<String, MapSpec>,
    #[serde(default)]
    pub clouds: BTreeMap<String, CloudSpec>,
    #[serde(default)]
    pub cover: Option<CoverFile>,
    #[serde(default)]
    pub action: Option<ActionFile>,
    #[serde(default)]
    pub atlases: BTreeMap<String, Vec<ChartFile>>,
    #[serde(default)]
    pub simplices: BTreeMap<String, SimplexFile>,
    pub checks: Vec<CheckFile>,
    #[serde(default)]
    pub output: Option<String>,
}

/// An exact rational: an integer, or decimal strings `{ "num": "1", "den": "10" }`.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum RationalSpec {
    Int(i64),
    Fraction { num: String, den: String },
}

/// `"a+bi"` with rational `a`, `b`, or explicit parts.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum ConstantSpec {
    Text(String),
    Parts {
        re: RationalSpec,
        #[serde(default)]
        im: Option<RationalSpec>,
    },
}

/// DSL text, or a map from the built-in library.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum MapSpec {
    Text(String),
    Builtin { builtin: String },
}

/// Explicit points (each coordinate `[re, im]`) or `{ "random": .. }`, a seeded cloud in a box
/// around `center`.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum CloudSpec {
    Points(Vec<Vec<[f64; 2]>>),
    Random { random: RandomCloud },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomCloud {
    pub center: Vec<[f64; 2]>,
    pub radius: f64,
    pub count: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverFile {
    pub opens: Vec<OpenFile>,
    /// Cloud holding the sample pool.
    pub pool: String,
}

#[derive(Clone, Debug, Deserialize)]
pub struct OpenFile {
    pub name: String,
    #[serde(flatten)]
    pub region: RegionFile,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RegionFile {
    All,
    Ball {
        center: Vec<[f64; 2]>,
        radius: f64,
    },
    Polydisc {
        center: Vec<[f64; 2]>,
        radii: Vec<f64>,
    },
    /// Points where the real part of the expression is positive.
    Predicate {
        expr: String,
    },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionFile {
    pub generators: Vec<GeneratorFile>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorFile {
    pub name: String,
    pub map: String,
    pub inverse: String,
    /// Permutation of cover indices; identity when omitted.
    #[serde(default)]
    pub index_action: Option<Vec<usize>>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartFile {
    pub map: String,
    pub inverse: String,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimplexFile {
    pub charts: Vec<String>,
    /// `φ_{p,p+1}` for each `p`.
    pub adjacent: Vec<String>,
    /// Explicit `φ_{p,q}` keyed `"p,q"`; others are composed from adjacent ones.
    #[serde(default)]
    pub transitions: BTreeMap<String, String>,
    pub cloud: String,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum InvariantKind {
    Todd,
    Chern,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct InvariantFile {
    pub kind: InvariantKind,
    pub k: usize,
}

#[derive(Clone, Debug, Deserialize)]
pub struct CheckFile {
    pub name: String,
    #[serde(flatten)]
    pub kind: CheckKind,
}

fn default_gl_invariants() -> Vec<InvariantFile> {
    (1..=4)
        .flat_map(|k| [InvariantFile { kind: InvariantKind::Todd, k }, InvariantFile { kind: InvariantKind::Chern, k }])
        .collect()
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum CheckKind {
    /// Exact expansion of a Todd or Chern component against the expected text.
    Symfun {
        kind: InvariantKind,
        k: usize,
        expect: Option<String>,
    },
    NewtonRoundtrip {
        max_degree: usize,
    },
    GlInvariance {
        #[serde(default = "default_gl_invariants")]
        invariants: Vec<InvariantFile>,
        trials: usize,
        max_n: usize,
        seed: u64,
        tol: f64,
    },
    /// `θ(g∘h) = h^♯θ(g) + θ(h)` over all pairs of the listed maps (built-in library if empty).
    ThetaComposition {
        #[serde(default)]
        maps: Vec<String>,
        cloud: Option<String>,
        tol: f64,
    },
    /// `verify_telescoping` and `dk_validate` of `cf_map` on a chart simplex.
    Telescoping {
        simplex: String,
        invariant: InvariantFile,
        tol: f64,
    },
    /// Closedness of τ for an atlas; with `expect_zero`, also exact vanishing of τ.
    GroupInvariant {
        atlas: String,
        invariant: InvariantFile,
        tol: f64,
        #[serde(default)]
        expect_zero: bool,
    },
    Witness {
        first: String,
        second: String,
        invariant: InvariantFile,
        tol: f64,
    },
    BmDbar {
        n: usize,
        probes: usize,
        step: f64,
        radius: f64,
    },
    BmReproducing {
        radii: Vec<f64>,
        order: usize,
        tol: f64,
    },
    SimplicialIdentities {
        trials: usize,
        max_dim: usize,
        seed: u64,
    },
}

impl CheckKind {
    pub fn type_name(&self) -> &'static str {
        match self {
            CheckKind::Symfun { .. } => "symfun",
            CheckKind::NewtonRoundtrip { .. } => "newton_roundtrip",
            CheckKind::GlInvariance { .. } => "gl_invariance",
            CheckKind::ThetaComposition { .. } => "theta_composition",
            CheckKind::Telescoping { .. } => "telescoping",
            CheckKind::GroupInvariant { .. } => "group_invariant",
            CheckKind::Witness { .. } => "witness",
            CheckKind::BmDbar { .. } => "bm_dbar",
            CheckKind::BmReproducing { .. } => "bm_reproducing",
            CheckKind::SimplicialIdentities { .. } => "simplicial_identities",
        }
    }

    fn tolerance(&self) -> Option<f64> {
        match self {
            CheckKind::GlInvariance { tol, .. }
            | CheckKind::ThetaComposition { tol, .. }
            | CheckKind::Telescoping { tol, .. }
            | CheckKind::GroupInvariant { tol, .. }
            | CheckKind::Witness { tol, .. }
            | CheckKind::BmReproducing { tol, .. } => Some(*tol),
            CheckKind::BmDbar { step, .. } => Some(*step),
            _ => None,
        }
    }
}

/// A scenario with every name resolved.
pub struct Scenario {
    pub file: ScenarioFile,
    /// SHA-256 of the file bytes, hex.
    pub sha256: String,
    pub maps: BTreeMap<String, Arc<dyn Holomorphic>>,
    pub clouds: BTreeMap<String, Vec<Point>>,
    pub cover: Option<CoverSpec>,
    pub action: Option<GroupActionSpec>,
    pub atlases: BTreeMap<String, Arc<Atlas>>,
    pub simplices: BTreeMap<String, ChartSimplex>,
}

pub fn invariant(spec: &InvariantFile) -> Result<InvariantMap, CliError> {
    if spec.k == 0 {
        return Err(CliError::Validation("invariant degree k must be at least 1".into()));
    }
    let f = match spec.kind {
        InvariantKind::Todd => todd_component(spec.k)?,
        InvariantKind::Chern => chern_character_component(spec.k),
    };
    Ok(invariant_from_symfun(&f, spec.k)?)
}

fn rational(spec: &RationalSpec, what: &str) -> Result<BigRational, CliError> {
    match spec {
        RationalSpec::Int(v) => Ok(BigRational::from_integer(BigInt::from(*v))),
        RationalSpec::Fraction { num, den } => {
            let parse = |s: &str| {
                s.trim().parse::<BigInt>().map_err(|e| CliError::Validation(format!("{what}: `{s}` is not an integer ({e})")))
            };
            let (n, d) = (parse(num)?, parse(den)?);
            if d == BigInt::from(0) {
                return Err(CliError::Validation(format!("{what}: zero denominator")));
            }
            Ok(BigRational::new(n, d))
        }
    }
}

fn complex_point(coords: &[[f64; 2]], n: usize, what: &str) -> Result<Point, CliError> {
    if coords.len() != n {
        return Err(CliError::Validation(format!("{what}: expected {n} coordinates, found {}", coords.len())));
    }
    Ok(coords.iter().map(|[re, im]| Complex64::new(*re, *im)).collect())
}

fn lookup<'a, T>(table: &'a BTreeMap<String, T>, name: &str, kind: &str, context: &str) -> Result<&'a T, CliError> {
    table.get(name).ok_or_else(|| CliError::Validation(format!("{context}: undefined {kind} `{name}`")))
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Scenario, CliError> {
        let bytes = std::fs::read(path).map_err(|e| CliError::Io { path: path.display().to_string(), message: e.to_string() })?;
        Scenario::from_bytes(&bytes, &path.display().to_string())
    }

    pub fn from_bytes(bytes: &[u8], origin: &str) -> Result<Scenario, CliError> {
        let file: ScenarioFile = serde_json::from_slice(bytes).map_err(|e| CliError::Parse {
            origin: origin.to_string(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        let sha256 = crate::report::sha256_hex(bytes);
        Scenario::resolve(file, sha256)
    }

    fn resolve(file: ScenarioFile, sha256: String) -> Result<Scenario, CliError> {
        let n = file.n;
        if n == 0 {
            return Err(CliError::Validation("n must be at least 1".into()));
        }
        let mut constants = Constants::new();
        for (name, spec) in &file.constants {
            let value = match spec {
                ConstantSpec::Text(text) => CRational::parse(text)?,
                ConstantSpec::Parts { re, im } => {
                    let im = im.as_ref().map(|v| rational(v, name)).transpose()?.unwrap_or_default();
                    CRational::new(rational(re, name)?, im)
                }
            };
            constants.insert(name.clone(), value);
        }

        let builtin: BTreeMap<String, HoloMap> = library::standard().into_iter().map(|m| (m.name().to_string(), m)).collect();
        let mut maps: BTreeMap<String, Arc<dyn Holomorphic>> = BTreeMap::new();
        for (name, spec) in &file.maps {
            let map = match spec {
                MapSpec::Text(text) => parse_map_with(text, n, &constants)
                    .map_err(|e| CliError::Validation(format!("map `{name}`: {e}")))?
                    .named(name.clone()),
                MapSpec::Builtin { builtin: b } => lookup(&builtin, b, "built-in map", &format!("map `{name}`"))?.clone(),
            };
            if map.n() != n {
                return Err(CliError::Validation(format!("map `{name}` has {} components, scenario has n = {n}", map.n())));
            }
            maps.insert(name.clone(), Arc::new(map));
        }

        let mut clouds = BTreeMap::new();
        for (name, spec) in &file.clouds {
            let what = format!("cloud `{name}`");
            let points = match spec {
                CloudSpec::Points(points) => points.iter().map(|p| complex_point(p, n, &what)).collect::<Result<Vec<_>, _>>()?,
                CloudSpec::Random { random: RandomCloud { center, radius, count, seed } } => {
                    let center = complex_point(center, n, &what)?;
                    let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                    (0..*count)
                        .map(|_| {
                            center
                                .iter()
                                .map(|z| z + Complex64::new(rng.gen_range(-radius..=*radius), rng.gen_range(-radius..=*radius)))
                                .collect()
                        })
                        .collect()
                }
            };
            clouds.insert(name.clone(), points);
        }

        let cover = match &file.cover {
            None => None,
            Some(c) => {
                let pool = lookup(&clouds, &c.pool, "cloud", "cover pool")?.clone();
                let mut opens = Vec::new();
                for open in &c.opens {
                    let what = format!("open `{}`", open.name);
                    opens.push(match &open.region {
                        RegionFile::All => Membership::All,
                        RegionFile::Ball { center, radius } => {
                            Membership::Ball { center: complex_point(center, n, &what)?, radius: *radius }
                        }
                        RegionFile::Polydisc { center, radii } => {
                            Membership::Polydisc { center: complex_point(center, n, &what)?, radii: radii.clone() }
                        }
                        RegionFile::Predicate { expr } => Membership::Predicate(
                            parse_expr(expr, n, &constants).map_err(|e| CliError::Validation(format!("{what}: {e}")))?,
                        ),
                    });
                }
                Some(CoverSpec::new(n, c.opens.iter().map(|o| o.name.clone()).collect(), opens, pool)?)
            }
        };

        let index_count = cover.as_ref().map(CoverSpec::len).unwrap_or(1);
        let action = match &file.action {
            None => None,
            Some(a) => {
                let mut gens = Vec::new();
                for g in &a.generators {
                    let context = format!("generator `{}`", g.name);
                    gens.push(Generator {
                        name: g.name.clone(),
                        map: lookup(&maps, &g.map, "map", &context)?.clone(),
                        inverse: lookup(&maps, &g.inverse, "map", &context)?.clone(),
                        index_action: g.index_action.clone().unwrap_or_else(|| (0..index_count).collect()),
                    });
                }
                Some(GroupActionSpec::new(n, index_count, gens)?)
            }
        };

        let mut atlases = BTreeMap::new();
        for (name, charts) in &file.atlases {
            let context = format!("atlas `{name}`");
            if charts.len() != index_count {
                return Err(CliError::Validation(format!(
                    "{context} has {} charts, the cover has {index_count} opens",
                    charts.len()
                )));
            }
            let charts = charts
                .iter()
                .map(|c| {
                    Ok(AtlasChart {
                        map: lookup(&maps, &c.map, "map", &context)?.clone(),
                        inverse: lookup(&maps, &c.inverse, "map", &context)?.clone(),
                    })
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            atlases.insert(name.clone(), Arc::new(Atlas { name: name.clone(), charts }));
        }

        let mut simplices = BTreeMap::new();
        for (name, s) in &file.simplices {
            let context = format!("simplex `{name}`");
            let get = |m: &String| lookup(&maps, m, "map", &context).cloned();
            let charts = s.charts.iter().map(get).collect::<Result<Vec<_>, _>>()?;
            let adjacent = s.adjacent.iter().map(get).collect::<Result<Vec<_>, _>>()?;
            let mut extra = BTreeMap::new();
            for (key, m) in &s.transitions {
                let parsed: Option<(usize, usize)> =
                    key.split_once(',').and_then(|(a, b)| Some((a.trim().parse().ok()?, b.trim().parse().ok()?)));
                let Some((p, q)) = parsed.filter(|(p, q)| p < q) else {
                    return Err(CliError::Validation(format!("{context}: transition key `{key}` is not `p,q` with p < q")));
                };
                extra.insert((p, q), get(m)?);
            }
            let points = lookup(&clouds, &s.cloud, "cloud", &context)?.clone();
            simplices.insert(name.clone(), ChartSimplex::from_adjacent(charts, adjacent, extra, points)?);
        }

        for check in &file.checks {
            if let Some(tol) = check.kind.tolerance() {
                if !(tol > 0.0) {
                    return Err(CliError::Validation(format!("check `{}`: tolerance must be positive, got {tol}", check.name)));
                }
            }
            let context = format!("check `{}`", check.name);
            match &check.kind {
                CheckKind::Telescoping { simplex, invariant: inv, .. } => {
                    lookup(&simplices, simplex, "simplex", &context)?;
                    invariant(inv)?;
                }
                CheckKind::GroupInvariant { atlas, invariant: inv, .. } => {
                    lookup(&atlases, atlas, "atlas", &context)?;
                    invariant(inv)?;
                }
                CheckKind::Witness { first, second, invariant: inv, .. } => {
                    lookup(&atlases, first, "atlas", &context)?;
                    lookup(&atlases, second, "atlas", &context)?;
                    invariant(inv)?;
                }
                CheckKind::ThetaComposition { maps: names, cloud, .. } => {
                    for m in names {
                        lookup(&maps, m, "map", &context)?;
                    }
                    if let Some(c) = cloud {
                        lookup(&clouds, c, "cloud", &context)?;
                    }
                }
                _ => {}
            }
            if matches!(check.kind, CheckKind::GroupInvariant { .. } | CheckKind::Witness { .. })
                && (cover.is_none() || action.is_none())
            {
                return Err(CliError::Validation(format!("{context} needs `cover` and `action` sections")));
            }
        }

        Ok(Scenario { file, sha256, maps, clouds, cover, action, atlases, simplices })
    }
}
