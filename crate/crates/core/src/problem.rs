//! Problem files: a TOML document describing a measure space, one or two
//! forms, an optional admissible pair and run settings.
//!
//! ```toml
//! [space]
//! nodes = ["1", "2", "3"]
//! masses = [1.0, 1.0, 1.0]
//! boundary = []
//!
//! [form]
//! type = "graph"
//! edges = [["1", "2", 1.0], ["2", "3", 1.0]]
//! killing = { "2" = 5.0 }
//!
//! [run]
//! times = [0.05, 0.5, 2.0]
//! ```
//!
//! Generated forms (`interval`, `grid2d`, `fractional`) bring their own
//! space; `[space]` is then optional and ignored.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::Deserialize;

use crate::decomposition::active_main_part;
use crate::error::FormError;
use crate::form::{GraphForm, QuadForm};
use crate::models::{self, BoundaryKind, Condition, RobinScaling};
use crate::nodeset::NodeSet;
use crate::sandwich::{restricted_form, AdmissiblePair};
use crate::space::MeasureSpace;

#[derive(Debug, thiserror::Error)]
pub enum ProblemError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("{0}")]
    Form(#[from] FormError),
}

impl From<toml::de::Error> for ProblemError {
    fn from(e: toml::de::Error) -> Self {
        ProblemError::Parse(e.to_string())
    }
}

type Result<T> = std::result::Result<T, ProblemError>;

fn parse_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(ProblemError::Parse(msg.into()))
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSpec {
    pub nodes: Vec<String>,
    pub masses: Option<Vec<f64>>,
    #[serde(default)]
    pub boundary: Vec<String>,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq, Default)]
#[serde(rename_all = "lowercase")]
pub enum KindSpec {
    Dirichlet,
    #[default]
    Neumann,
    Robin,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq, Default)]
#[serde(rename_all = "lowercase")]
pub enum ScalingSpec {
    #[default]
    Raw,
    H,
}

impl From<ScalingSpec> for RobinScaling {
    fn from(s: ScalingSpec) -> Self {
        match s {
            ScalingSpec::Raw => RobinScaling::Raw,
            ScalingSpec::H => RobinScaling::H,
        }
    }
}

/// A side condition of the square model: `"dirichlet"`, `"neumann"`, or a
/// number giving a Robin coefficient.
#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum SideSpec {
    Robin(f64),
    Named(String),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum FormSpec {
    Graph {
        #[serde(default)]
        edges: Vec<(String, String, f64)>,
        #[serde(default)]
        killing: BTreeMap<String, f64>,
        support: Option<Vec<String>>,
    },
    Explicit {
        coeff: Vec<Vec<f64>>,
        support: Option<Vec<String>>,
    },
    Interval {
        n: usize,
        #[serde(default)]
        kind: KindSpec,
        #[serde(default)]
        beta_left: f64,
        #[serde(default)]
        beta_right: f64,
        #[serde(default)]
        scaling: ScalingSpec,
        potential: Option<Vec<f64>>,
        boundary_mass: Option<f64>,
    },
    Grid2d {
        nx: usize,
        ny: usize,
        #[serde(default)]
        sides: BTreeMap<String, SideSpec>,
        #[serde(default)]
        scaling: ScalingSpec,
    },
    Fractional {
        n: usize,
        s: f64,
        #[serde(default)]
        kind: KindSpec,
        #[serde(default)]
        beta_left: f64,
        #[serde(default)]
        beta_right: f64,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairSpec {
    #[serde(rename = "O")]
    pub o: Vec<String>,
    #[serde(default)]
    pub mu: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub times: Option<Vec<f64>>,
    pub tol: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub sets: Vec<Vec<String>>,
    #[serde(default)]
    pub betas: Vec<f64>,
    pub mu_grid: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub space: Option<SpaceSpec>,
    pub form: FormSpec,
    pub form2: Option<FormSpec>,
    pub pair: Option<PairSpec>,
    #[serde(default)]
    pub run: RunSpec,
}

/// A problem with its forms built.
#[derive(Debug, Clone)]
pub struct Problem {
    pub spec: ProblemSpec,
    pub space: Arc<MeasureSpace>,
    pub form: QuadForm,
    pub form2: Option<QuadForm>,
}

impl Problem {
    pub fn parse(text: &str) -> Result<Self> {
        let spec: ProblemSpec = toml::from_str(text)?;
        Self::from_spec(spec)
    }

    pub fn from_spec(spec: ProblemSpec) -> Result<Self> {
        let declared = match &spec.space {
            Some(s) => Some(Arc::new(build_space(s)?)),
            None => None,
        };
        let form = build_form(&spec.form, declared.as_ref())?;
        let space = form.space().clone();
        let form2 = match &spec.form2 {
            Some(f) => {
                let q2 = build_form(f, Some(&space))?;
                if !q2.same_space(&form) {
                    return parse_err("[form2] lives on a different space than [form]");
                }
                Some(q2)
            }
            None => None,
        };
        Ok(Self {
            spec,
            space,
            form,
            form2,
        })
    }

    pub fn node(&self, name: &str) -> Result<usize> {
        node_index(&self.space, name)
    }

    pub fn node_set(&self, names: &[String]) -> Result<NodeSet> {
        names.iter().map(|n| self.node(n)).collect()
    }

    /// The pair declared in `[pair]`, if any.
    pub fn pair(&self) -> Result<Option<AdmissiblePair>> {
        let Some(p) = &self.spec.pair else {
            return Ok(None);
        };
        let o = self.node_set(&p.o)?;
        let mut mu = DVector::zeros(self.space.len());
        for (name, &v) in &p.mu {
            mu[self.node(name)?] = v;
        }
        Ok(Some(AdmissiblePair::new(o, mu)?))
    }

    /// The candidate form for sandwich analyses: `[form2]`, or the form
    /// built from `[pair]` over the active main part of `[form]`.
    pub fn candidate(&self) -> Result<Option<QuadForm>> {
        if let Some(q2) = &self.form2 {
            return Ok(Some(q2.clone()));
        }
        match self.pair()? {
            Some(p) => Ok(Some(restricted_form(&active_main_part(&self.form)?, &p)?)),
            None => Ok(None),
        }
    }
}

fn node_index(space: &MeasureSpace, name: &str) -> Result<usize> {
    space
        .index_of(name)
        .ok_or_else(|| ProblemError::Parse(format!("unknown node {name:?}")))
}

fn build_space(s: &SpaceSpec) -> Result<MeasureSpace> {
    let masses = s.masses.clone().unwrap_or_else(|| vec![1.0; s.nodes.len()]);
    let mut boundary = NodeSet::new();
    for b in &s.boundary {
        match s.nodes.iter().position(|n| n == b) {
            Some(x) => {
                boundary.insert(x);
            }
            None => return parse_err(format!("unknown boundary node {b:?}")),
        }
    }
    Ok(MeasureSpace::new(s.nodes.clone(), masses, boundary)?)
}

fn support_of(space: &MeasureSpace, names: &Option<Vec<String>>) -> Result<NodeSet> {
    match names {
        Some(list) => list.iter().map(|n| node_index(space, n)).collect(),
        None => Ok(NodeSet::all(space.len())),
    }
}

fn boundary_kind(kind: KindSpec, left: f64, right: f64) -> BoundaryKind {
    match kind {
        KindSpec::Dirichlet => BoundaryKind::Dirichlet,
        KindSpec::Neumann => BoundaryKind::Neumann,
        KindSpec::Robin => BoundaryKind::Robin { left, right },
    }
}

fn side_condition(spec: Option<&SideSpec>, scaling: RobinScaling, h: f64) -> Result<Condition> {
    match spec {
        None => Ok(Condition::Neumann),
        Some(SideSpec::Robin(beta)) => Ok(Condition::Robin(scaling.apply(*beta, h))),
        Some(SideSpec::Named(s)) => match s.as_str() {
            "dirichlet" => Ok(Condition::Dirichlet),
            "neumann" => Ok(Condition::Neumann),
            other => parse_err(format!("unknown side condition {other:?}")),
        },
    }
}

pub(crate) fn build_form(
    spec: &FormSpec,
    declared: Option<&Arc<MeasureSpace>>,
) -> Result<QuadForm> {
    let need_space = || {
        declared
            .cloned()
            .ok_or_else(|| ProblemError::Parse("this form type needs a [space] section".into()))
    };
    match spec {
        FormSpec::Graph {
            edges,
            killing,
            support,
        } => {
            let space = need_space()?;
            let mut list = Vec::with_capacity(edges.len());
            for (a, b, w) in edges {
                list.push((node_index(&space, a)?, node_index(&space, b)?, *w));
            }
            let mut c = vec![0.0; space.len()];
            for (name, &v) in killing {
                c[node_index(&space, name)?] = v;
            }
            let g = GraphForm::from_edges(space.clone(), &list)?
                .with_killing(&c)?
                .with_support(support_of(&space, support)?)?;
            let q = g.to_quad_form();
            Ok(q.with_support(q.support().clone())?)
        }
        FormSpec::Explicit { coeff, support } => {
            let space = need_space()?;
            let n = space.len();
            if coeff.len() != n || coeff.iter().any(|r| r.len() != n) {
                return parse_err(format!("explicit coefficients must be a {n} x {n} array"));
            }
            let m = DMatrix::from_fn(n, n, |x, y| coeff[x][y]);
            Ok(QuadForm::new(
                space.clone(),
                support_of(&space, support)?,
                m,
            )?)
        }
        FormSpec::Interval {
            n,
            kind,
            beta_left,
            beta_right,
            scaling,
            potential,
            boundary_mass,
        } => {
            let h = models::interval_step(*n);
            let s = RobinScaling::from(*scaling);
            let kind = boundary_kind(*kind, s.apply(*beta_left, h), s.apply(*beta_right, h));
            Ok(models::interval_laplacian(
                *n,
                kind,
                potential.as_deref(),
                *boundary_mass,
            )?)
        }
        FormSpec::Grid2d {
            nx,
            ny,
            sides,
            scaling,
        } => {
            for key in sides.keys() {
                if !["left", "right", "bottom", "top"].contains(&key.as_str()) {
                    return parse_err(format!("unknown side {key:?}"));
                }
            }
            let scaling = RobinScaling::from(*scaling);
            let (hx, hy) = (models::interval_step(*nx), models::interval_step(*ny));
            let (w, t) = (nx + 2, ny + 2);
            // corners follow the left and right sides
            let mut conditions = BTreeMap::new();
            for j in 0..t {
                for i in 0..w {
                    let (side, h) = if i == 0 {
                        ("left", hy)
                    } else if i == w - 1 {
                        ("right", hy)
                    } else if j == 0 {
                        ("bottom", hx)
                    } else if j == t - 1 {
                        ("top", hx)
                    } else {
                        continue;
                    };
                    conditions.insert((i, j), side_condition(sides.get(side), scaling, h)?);
                }
            }
            Ok(models::grid2d_laplacian(*nx, *ny, |i, j| {
                conditions[&(i, j)]
            })?)
        }
        FormSpec::Fractional {
            n,
            s,
            kind,
            beta_left,
            beta_right,
        } => Ok(models::fractional_form(
            *n,
            *s,
            boundary_kind(*kind, *beta_left, *beta_right),
        )?),
    }
}
