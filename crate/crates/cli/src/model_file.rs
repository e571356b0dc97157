//! JSON model files. Every number may be written as a JSON number or as a
//! decimal string.

use std::fmt;
use std::path::Path;

use fluxdec_core::models::{
    normalize_zero_range, Crn, Eta, Generator, Ipfg, LatticeGas, Mobility, Model, Reaction, ZeroRange,
};
use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::CliError;

/// A real number read from a JSON number or a decimal string.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Num(pub f64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(self.0)
    }
}

impl<'de> Deserialize<'de> for Num {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct NumVisitor;
        impl Visitor<'_> for NumVisitor {
            type Value = Num;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or a decimal string")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Num, E> {
                Ok(Num(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Num, E> {
                Ok(Num(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Num, E> {
                Ok(Num(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Num, E> {
                v.trim()
                    .parse::<f64>()
                    .map(Num)
                    .map_err(|_| E::custom(format!("`{v}` is not a decimal number")))
            }
        }
        d.deserialize_any(NumVisitor)
    }
}

fn reals(v: &[Num]) -> Vec<f64> {
    v.iter().map(|n| n.0).collect()
}

fn nums(v: &[f64]) -> Vec<Num> {
    v.iter().copied().map(Num).collect()
}

/// Generator given as nested rows or as a flat row-major array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Matrix {
    Rows(Vec<Vec<Num>>),
    Flat(Vec<Num>),
}

impl Matrix {
    fn rows(&self, nodes: Option<usize>) -> Result<Vec<Vec<f64>>, CliError> {
        match self {
            Matrix::Rows(r) => Ok(r.iter().map(|row| reals(row)).collect()),
            Matrix::Flat(v) => {
                let n = nodes.unwrap_or_else(|| (v.len() as f64).sqrt().round() as usize);
                if n == 0 || n * n != v.len() {
                    return Err(CliError::Parse(format!(
                        "flat Q has {} entries, which is not nodes^2",
                        v.len()
                    )));
                }
                Ok(v.chunks(n).map(reals).collect())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum EtaSpec {
    Power {
        p: Num,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        coef: Option<Num>,
    },
    AffineCapped { slope: Num, knee: Num, tail_slope: Num },
    Table { z: Vec<Num>, values: Vec<Num> },
}

impl EtaSpec {
    fn to_eta(&self) -> Eta {
        match self {
            EtaSpec::Power { p, coef } => Eta::Power {
                coef: coef.map_or(1.0, |c| c.0),
                exponent: p.0,
            },
            EtaSpec::AffineCapped { slope, knee, tail_slope } => Eta::AffineCapped {
                slope: slope.0,
                knee: knee.0,
                tail_slope: tail_slope.0,
            },
            EtaSpec::Table { z, values } => Eta::Table {
                z: reals(z),
                values: reals(values),
            },
        }
    }

    fn from_eta(eta: &Eta) -> Self {
        match eta {
            Eta::Power { coef, exponent } => EtaSpec::Power {
                p: Num(*exponent),
                coef: (*coef != 1.0).then_some(Num(*coef)),
            },
            Eta::AffineCapped { slope, knee, tail_slope } => EtaSpec::AffineCapped {
                slope: Num(*slope),
                knee: Num(*knee),
                tail_slope: Num(*tail_slope),
            },
            Eta::Table { z, values } => EtaSpec::Table {
                z: nums(z),
                values: nums(values),
            },
        }
    }
}

/// One rate function for all sites, or one per site.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EtaField {
    Shared(EtaSpec),
    PerSite(Vec<EtaSpec>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReactionSpec {
    pub alpha_fw: Vec<u32>,
    pub alpha_bw: Vec<u32>,
    pub c_fw: Num,
    pub c_bw: Num,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub m: usize,
    #[serde(rename = "U", default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<Vec<Num>>,
    #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
    pub drift: Option<Vec<Num>>,
    pub mobility: MobilitySpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MobilitySpec {
    Independent,
    Exclusion,
}

/// Top-level model file, discriminated by the `model` field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelSpec {
    Ipfg {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        nodes: Option<usize>,
        #[serde(rename = "Q")]
        q: Matrix,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        pi: Option<Vec<Num>>,
    },
    ZeroRange {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        nodes: Option<usize>,
        #[serde(rename = "Q")]
        q: Matrix,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        pi: Option<Vec<Num>>,
        eta: EtaField,
    },
    Crn {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        species: Option<Vec<String>>,
        reactions: Vec<ReactionSpec>,
        pi: Vec<Num>,
    },
    Lattice {
        grid: GridSpec,
        mean_density: Num,
    },
}

/// How strictly model invariants are enforced while building.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strictness {
    /// Every invariant is checked.
    Strict,
    /// A supplied `pi` is accepted without the stationarity or
    /// complex-balance check, so that `verify` can report the failure.
    Lenient,
}

fn check_nodes(nodes: Option<usize>, rows: &[Vec<f64>]) -> Result<(), CliError> {
    match nodes {
        Some(n) if n != rows.len() => Err(CliError::Parse(format!(
            "`nodes` is {n} but Q has {} rows",
            rows.len()
        ))),
        _ => Ok(()),
    }
}

impl ModelSpec {
    /// Builds the model; invariant failures are reported as parse errors.
    pub fn build(&self, strictness: Strictness) -> Result<Model, CliError> {
        self.build_inner(strictness).map_err(|e| match e {
            CliError::Model(e) => CliError::Parse(e.to_string()),
            other => other,
        })
    }

    fn build_inner(&self, strictness: Strictness) -> Result<Model, CliError> {
        let model = match self {
            ModelSpec::Ipfg { nodes, q, pi } => {
                let rows = q.rows(*nodes)?;
                check_nodes(*nodes, &rows)?;
                let g = Generator::from_rows(&rows)?;
                let m = match (pi, strictness) {
                    (None, _) => Ipfg::new(g)?,
                    (Some(p), Strictness::Strict) => Ipfg::with_measure(g, reals(p))?,
                    (Some(p), Strictness::Lenient) => Ipfg::with_measure_unchecked(g, reals(p))?,
                };
                Model::Ipfg(m)
            }
            ModelSpec::ZeroRange { nodes, q, pi, eta } => {
                let rows = q.rows(*nodes)?;
                check_nodes(*nodes, &rows)?;
                let g = Generator::from_rows(&rows)?;
                let n = g.n_states();
                let eta: Vec<Eta> = match eta {
                    EtaField::Shared(e) => vec![e.to_eta(); n],
                    EtaField::PerSite(v) if v.len() == n => v.iter().map(EtaSpec::to_eta).collect(),
                    EtaField::PerSite(v) => {
                        return Err(CliError::Parse(format!("{} rate functions for {n} sites", v.len())))
                    }
                };
                for e in &eta {
                    e.validate()?;
                }
                let pi = match pi {
                    Some(p) => reals(p),
                    None => g.stationary_measure()?,
                };
                let normalized = eta.iter().all(|e| (e.eval(1.0) - 1.0).abs() <= 1e-12);
                let m = if normalized {
                    ZeroRange::new(g, pi, eta)?
                } else {
                    let (g, pi, eta) = normalize_zero_range(&g, &pi, &eta)?;
                    ZeroRange::new(g, pi, eta)?
                };
                Model::ZeroRange(m)
            }
            ModelSpec::Crn { species, reactions, pi } => {
                let pi = reals(pi);
                let species = species
                    .clone()
                    .unwrap_or_else(|| (1..=pi.len()).map(|k| format!("S{k}")).collect());
                let reactions = reactions
                    .iter()
                    .map(|r| Reaction {
                        reactant: r.alpha_fw.clone(),
                        product: r.alpha_bw.clone(),
                        forward_rate: r.c_fw.0,
                        backward_rate: r.c_bw.0,
                    })
                    .collect();
                Model::Crn(match strictness {
                    Strictness::Strict => Crn::new(species, reactions, pi)?,
                    Strictness::Lenient => Crn::new_unchecked(species, reactions, pi)?,
                })
            }
            ModelSpec::Lattice { grid, mean_density } => {
                let m = grid.m;
                let field = |v: &Option<Vec<Num>>, what: &str| -> Result<Vec<f64>, CliError> {
                    match v {
                        None => Ok(vec![0.0; m]),
                        Some(v) if v.len() == m => Ok(reals(v)),
                        Some(v) => Err(CliError::Parse(format!("{what} has {} entries for m = {m}", v.len()))),
                    }
                };
                let mobility = match grid.mobility {
                    MobilitySpec::Independent => Mobility::Independent,
                    MobilitySpec::Exclusion => Mobility::Exclusion,
                };
                Model::LatticeGas(LatticeGas::new(
                    mobility,
                    field(&grid.potential, "U")?,
                    field(&grid.drift, "A")?,
                    mean_density.0,
                )?)
            }
        };
        Ok(model)
    }

    pub fn from_model(model: &Model) -> Result<Self, CliError> {
        Ok(match model {
            Model::Ipfg(m) => ModelSpec::Ipfg {
                nodes: Some(m.n_states()),
                q: Matrix::Rows(m.generator().to_rows().iter().map(|r| nums(r)).collect()),
                pi: Some(nums(m.pi())),
            },
            Model::ZeroRange(m) => ModelSpec::ZeroRange {
                nodes: Some(m.n_states()),
                q: Matrix::Rows(m.generator().to_rows().iter().map(|r| nums(r)).collect()),
                pi: Some(nums(m.pi())),
                eta: EtaField::PerSite(m.eta().iter().map(EtaSpec::from_eta).collect()),
            },
            Model::Crn(m) => ModelSpec::Crn {
                species: Some(m.species().to_vec()),
                reactions: m
                    .reactions()
                    .iter()
                    .map(|r| ReactionSpec {
                        alpha_fw: r.reactant.clone(),
                        alpha_bw: r.product.clone(),
                        c_fw: Num(r.forward_rate),
                        c_bw: Num(r.backward_rate),
                    })
                    .collect(),
                pi: nums(m.pi()),
            },
            Model::LatticeGas(m) => ModelSpec::Lattice {
                grid: GridSpec {
                    m: m.cells(),
                    potential: Some(nums(m.potential())),
                    drift: Some(nums(m.spatial_drift())),
                    mobility: match m.mobility() {
                        Mobility::Independent => MobilitySpec::Independent,
                        Mobility::Exclusion => MobilitySpec::Exclusion,
                    },
                },
                mean_density: Num(m.mean_density()),
            },
            Model::Tilted(_) => {
                return Err(CliError::Usage("tilted models have no file representation".into()));
            }
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model specs serialise")
    }
}

pub fn parse_model_str(text: &str, strictness: Strictness) -> Result<Model, CliError> {
    let spec: ModelSpec = serde_json::from_str(text).map_err(|e| CliError::Parse(format!("model file: {e}")))?;
    spec.build(strictness)
}

pub fn parse_model_spec(path: &Path, strictness: Strictness) -> Result<Model, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Parse(format!("cannot read {}: {e}", path.display())))?;
    parse_model_str(&text, strictness)
}

#[cfg(test)]
mod tests {
    use super::*;
    use fluxdec_core::models::fixtures;

    #[test]
    fn strings_and_numbers_are_both_accepted() {
        let a = r#"{"model":"ipfg","Q":[[-1,1],[2,-2]]}"#;
        let b = r#"{"model":"ipfg","nodes":2,"Q":["-1","1","2.0","-2"]}"#;
        assert_eq!(
            parse_model_str(a, Strictness::Strict).unwrap(),
            parse_model_str(b, Strictness::Strict).unwrap()
        );
    }

    #[test]
    fn bad_row_sum_names_the_invariant() {
        let e = parse_model_str(r#"{"model":"ipfg","Q":[[-1,1],[2,-1]]}"#, Strictness::Strict).unwrap_err();
        assert!(e.to_string().contains("row-sum"), "{e}");
    }

    #[test]
    fn unnormalised_eta_is_normalised() {
        let text = r#"{"model":"zero-range","Q":[[-3,2,1],[1,-3,2],[2,1,-3]],
                       "eta":{"family":"power","p":"0.5","coef":"2"}}"#;
        let Model::ZeroRange(m) = parse_model_str(text, Strictness::Strict).unwrap() else {
            panic!("zero-range expected")
        };
        assert!(m.eta().iter().all(|e| (e.eval(1.0) - 1.0).abs() < 1e-12));
    }

    #[test]
    fn bundled_fixtures_round_trip() {
        for (name, m) in fixtures::bundled() {
            let spec = ModelSpec::from_model(&m).unwrap();
            let back = parse_model_str(&spec.to_json(), Strictness::Strict).unwrap();
            assert_eq!(back, m, "{name}");
            let again = ModelSpec::from_model(&back).unwrap();
            assert_eq!(again, spec, "{name}");
        }
    }
}
