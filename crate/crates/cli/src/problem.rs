//! Problem files: JSON documents naming catalog entries.
//!
//! ```json
//! {
//!   "horizon": {"T": 1.0, "a": 0.0, "b": 1.0},
//!   "f": {"base": "double_well"},
//!   "g": {"base": {"name": "concave_quadratic", "kappa": 0.5}},
//!   "numerics": {"n_t": 64, "n_x": 65, "state_box": [-1.0, 2.0], "velocity_cap": 4.0}
//! }
//! ```
//!
//! Every object is checked for unknown keys and every diagnostic carries
//! the dotted path of the offending field.

use std::collections::BTreeSet;
use std::path::Path;

use serde_json::{Map, Value};
use varelax_core::catalog::{NagumoFn, StateFn, Table1D, TimeFactor, VelocityFn};
use varelax_core::classify::{default_radius_schedule, HypothesisConstants, DEFAULT_THRESHOLD};
use varelax_core::family::{IntegrandFamily, StateFamily};
use varelax_core::relax::{DpConfig, Problem};

use crate::error::CliError;

/// Discretization and certificate settings read from `numerics`.
#[derive(Debug, Clone, PartialEq)]
pub struct Numerics {
    pub n_t: usize,
    pub n_x: usize,
    pub theta: Option<NagumoFn>,
    pub penalty: f64,
    pub budget_levels: Option<usize>,
    pub radius_schedule: Vec<f64>,
    pub threshold: f64,
    pub probe_points: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemFile {
    pub problem: Problem,
    pub numerics: Numerics,
    /// Declared hypothesis constants; fitted when absent.
    pub constants: Option<HypothesisConstants>,
}

impl ProblemFile {
    pub fn dp_config(&self) -> DpConfig {
        DpConfig {
            n_t: self.numerics.n_t,
            n_x: self.numerics.n_x,
            theta: self.numerics.theta.clone(),
            penalty: self.numerics.penalty,
            budget_levels: self.numerics.budget_levels,
        }
    }
}

/// Command-line overrides applied before validation.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub n_t: Option<usize>,
    pub n_x: Option<usize>,
    pub xi_max: Option<f64>,
}

pub fn parse_problem(path: &Path, overrides: &Overrides) -> Result<ProblemFile, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_problem_str(&text, &path.display().to_string(), overrides)
}

pub fn parse_problem_str(
    text: &str,
    origin: &str,
    overrides: &Overrides,
) -> Result<ProblemFile, CliError> {
    let root: Value = serde_json::from_str(text).map_err(|e| {
        CliError::parse(
            origin,
            format!("line {} column {}: {e}", e.line(), e.column()),
        )
    })?;
    let err = |msg: String| CliError::parse(origin, msg);
    let mut top = Obj::new(&root, "$").map_err(err)?;

    let mut hz = Obj::new(top.req("horizon").map_err(err)?, "horizon").map_err(err)?;
    let horizon = hz.f64("T").map_err(err)?;
    let a = hz.f64("a").map_err(err)?;
    let b = hz.f64("b").map_err(err)?;
    hz.finish().map_err(err)?;
    if horizon <= 0.0 {
        return Err(err(format!("horizon.T: must be positive, got {horizon}")));
    }

    let f = integrand(top.req("f").map_err(err)?, "f").map_err(err)?;
    let g = match top.opt("g") {
        Some(v) => state_family(v, "g").map_err(err)?,
        None => StateFamily::zero(),
    };

    let mut nm = Obj::new(top.req("numerics").map_err(err)?, "numerics").map_err(err)?;
    let n_t = nm.usize("n_t").map_err(err)?;
    let n_x = nm.usize("n_x").map_err(err)?;
    let state_box = nm.pair("state_box").map_err(err)?;
    let velocity_cap = nm.f64("velocity_cap").map_err(err)?;
    let theta = nm
        .opt("theta")
        .map(|v| nagumo(v, "numerics.theta"))
        .transpose()
        .map_err(err)?;
    let radius_schedule = match nm.opt("radius_schedule") {
        Some(v) => f64_array(v, "numerics.radius_schedule").map_err(err)?,
        None => default_radius_schedule(),
    };
    let threshold = nm.opt_f64("threshold").map_err(err)?.unwrap_or(DEFAULT_THRESHOLD);
    let penalty = nm.opt_f64("penalty").map_err(err)?.unwrap_or(0.0);
    let budget_levels = nm.opt_usize("budget_levels").map_err(err)?;
    let probe_points = nm.opt_usize("probe_points").map_err(err)?.unwrap_or(4001);
    nm.finish().map_err(err)?;

    let constants = top
        .opt("constants")
        .map(constants)
        .transpose()
        .map_err(err)?;
    top.finish().map_err(err)?;

    if radius_schedule.len() < 4
        || radius_schedule[0] <= 0.0
        || radius_schedule.windows(2).any(|w| w[0] >= w[1])
    {
        return Err(err(
            "numerics.radius_schedule: need >= 4 increasing positive radii".into(),
        ));
    }
    if threshold <= 0.0 {
        return Err(err("numerics.threshold: must be positive".into()));
    }
    if probe_points < 5 || probe_points % 2 == 0 {
        return Err(err("numerics.probe_points: must be odd and >= 5".into()));
    }

    let problem = Problem {
        horizon,
        a,
        b,
        f,
        g,
        state_box,
        velocity_cap: overrides.xi_max.unwrap_or(velocity_cap),
    };
    let numerics = Numerics {
        n_t: overrides.n_t.unwrap_or(n_t),
        n_x: overrides.n_x.unwrap_or(n_x),
        theta,
        penalty,
        budget_levels,
        radius_schedule,
        threshold,
        probe_points,
    };
    let file = ProblemFile {
        problem,
        numerics,
        constants,
    };
    // Infeasibility keeps its own exit code; everything else is a parse error.
    match file.problem.validate() {
        Ok(()) => {}
        Err(e @ varelax_core::Error::Infeasible(_)) => return Err(e.into()),
        Err(e) => return Err(err(e.to_string())),
    }
    file.dp_config().validate().map_err(|e| err(format!("numerics: {e}")))?;
    Ok(file)
}

/// Object view that remembers which keys were read.
struct Obj<'a> {
    map: &'a Map<String, Value>,
    path: String,
    seen: BTreeSet<&'a str>,
}

impl<'a> Obj<'a> {
    fn new(v: &'a Value, path: &str) -> Result<Self, String> {
        match v {
            Value::Object(map) => Ok(Self {
                map,
                path: path.to_string(),
                seen: BTreeSet::new(),
            }),
            _ => Err(format!("{path}: expected an object")),
        }
    }

    fn at(&self, key: &str) -> String {
        if self.path == "$" {
            key.to_string()
        } else {
            format!("{}.{key}", self.path)
        }
    }

    fn opt(&mut self, key: &str) -> Option<&'a Value> {
        let (k, v) = self.map.get_key_value(key)?;
        self.seen.insert(k.as_str());
        Some(v)
    }

    fn req(&mut self, key: &str) -> Result<&'a Value, String> {
        self.opt(key)
            .ok_or_else(|| format!("{}: missing required field", self.at(key)))
    }

    fn f64(&mut self, key: &str) -> Result<f64, String> {
        let v = self.req(key)?;
        number(v, &self.at(key))
    }

    fn opt_f64(&mut self, key: &str) -> Result<Option<f64>, String> {
        match self.opt(key) {
            Some(v) => number(v, &self.at(key)).map(Some),
            None => Ok(None),
        }
    }

    fn usize(&mut self, key: &str) -> Result<usize, String> {
        let v = self.req(key)?;
        count(v, &self.at(key))
    }

    fn opt_usize(&mut self, key: &str) -> Result<Option<usize>, String> {
        match self.opt(key) {
            Some(v) => count(v, &self.at(key)).map(Some),
            None => Ok(None),
        }
    }

    fn pair(&mut self, key: &str) -> Result<(f64, f64), String> {
        let v = self.req(key)?;
        let xs = f64_array(v, &self.at(key))?;
        match xs.as_slice() {
            [lo, hi] => Ok((*lo, *hi)),
            _ => Err(format!("{}: expected [lo, hi]", self.at(key))),
        }
    }

    fn finish(self) -> Result<(), String> {
        match self.map.keys().find(|k| !self.seen.contains(k.as_str())) {
            Some(k) => Err(format!("{}: unknown key", self.at(k))),
            None => Ok(()),
        }
    }
}

fn number(v: &Value, path: &str) -> Result<f64, String> {
    match v.as_f64() {
        Some(x) if x.is_finite() => Ok(x),
        _ => Err(format!("{path}: expected a finite number")),
    }
}

fn count(v: &Value, path: &str) -> Result<usize, String> {
    v.as_u64()
        .and_then(|n| usize::try_from(n).ok())
        .ok_or_else(|| format!("{path}: expected a nonnegative integer"))
}

fn f64_array(v: &Value, path: &str) -> Result<Vec<f64>, String> {
    let items = v
        .as_array()
        .ok_or_else(|| format!("{path}: expected an array of numbers"))?;
    items
        .iter()
        .enumerate()
        .map(|(i, x)| number(x, &format!("{path}[{i}]")))
        .collect()
}

/// A catalog reference: `"name"` or `{"name": ..., params...}`. Bare names
/// pick up parameters from `params` when the caller supplies them.
struct Entry<'a> {
    name: String,
    obj: Option<Obj<'a>>,
    path: String,
}

impl<'a> Entry<'a> {
    fn new(v: &'a Value, path: &str, params: Option<&'a Value>) -> Result<Self, String> {
        match v {
            Value::String(s) => {
                let obj = params
                    .map(|p| Obj::new(p, &format!("{path}.params")))
                    .transpose()?;
                Ok(Self {
                    name: s.clone(),
                    obj,
                    path: path.to_string(),
                })
            }
            Value::Object(_) => {
                if params.is_some() {
                    return Err(format!(
                        "{path}: params given both inline and in the section"
                    ));
                }
                let mut obj = Obj::new(v, path)?;
                let name = obj
                    .req("name")?
                    .as_str()
                    .ok_or_else(|| format!("{path}.name: expected a string"))?
                    .to_string();
                Ok(Self {
                    name,
                    obj: Some(obj),
                    path: path.to_string(),
                })
            }
            _ => Err(format!("{path}: expected a catalog name or object")),
        }
    }

    fn f64(&mut self, key: &str) -> Result<f64, String> {
        match self.obj.as_mut() {
            Some(o) => o.f64(key),
            None => Err(format!(
                "{}: '{}' needs parameter '{key}'",
                self.path, self.name
            )),
        }
    }

    fn table(&mut self) -> Result<Table1D, String> {
        let o = self
            .obj
            .as_mut()
            .ok_or_else(|| format!("{}: 'table' needs grid and values", self.path))?;
        let gp = o.at("grid");
        let grid = f64_array(o.req("grid")?, &gp)?;
        let vp = o.at("values");
        let values = f64_array(o.req("values")?, &vp)?;
        Table1D::new(grid, values).map_err(|e| format!("{}: {e}", self.path))
    }

    fn finish(self) -> Result<(), String> {
        match self.obj {
            Some(o) => o.finish(),
            None => Ok(()),
        }
    }

    fn unknown(&self, kind: &str) -> String {
        format!("{}: unknown {kind} '{}'", self.path, self.name)
    }
}

/// `power_2`, `power_1.5`: shorthand for power_p with that exponent.
fn power_shorthand(name: &str) -> Option<f64> {
    name.strip_prefix("power_")
        .filter(|s| *s != "p")
        .and_then(|s| s.parse::<f64>().ok())
}

fn velocity_fn(v: &Value, path: &str, params: Option<&Value>) -> Result<VelocityFn, String> {
    let mut e = Entry::new(v, path, params)?;
    let out = match e.name.as_str() {
        "power_p" => VelocityFn::PowerP { p: e.f64("p")? },
        "abs" => VelocityFn::Abs,
        "double_well" => VelocityFn::DoubleWell,
        "linear_minus_sqrt" => VelocityFn::LinearMinusSqrt,
        "sqrt_one_plus" => VelocityFn::SqrtOnePlus,
        "affine" => VelocityFn::Affine {
            slope: e.f64("slope")?,
            intercept: e.f64("intercept")?,
        },
        "table" => VelocityFn::Table { table: e.table()? },
        "zero" => VelocityFn::Zero,
        other => match power_shorthand(other) {
            Some(p) => VelocityFn::PowerP { p },
            None => return Err(e.unknown("velocity function")),
        },
    };
    e.finish()?;
    out.validate().map_err(|err| format!("{path}: {err}"))?;
    Ok(out)
}

fn state_fn(v: &Value, path: &str, params: Option<&Value>) -> Result<StateFn, String> {
    let mut e = Entry::new(v, path, params)?;
    let out = match e.name.as_str() {
        "zero" => StateFn::Zero,
        "affine" => StateFn::Affine {
            slope: e.f64("slope")?,
            intercept: e.f64("intercept")?,
        },
        "concave_quadratic" => StateFn::ConcaveQuadratic {
            kappa: e.f64("kappa")?,
        },
        "table" => StateFn::Table { table: e.table()? },
        _ => return Err(e.unknown("state function")),
    };
    e.finish()?;
    out.validate().map_err(|err| format!("{path}: {err}"))?;
    Ok(out)
}

fn time_factor(v: &Value, path: &str) -> Result<TimeFactor, String> {
    let mut e = Entry::new(v, path, None)?;
    let out = match e.name.as_str() {
        "const" => TimeFactor::Const {
            value: e.f64("value")?,
        },
        "affine_t" => TimeFactor::AffineT {
            c0: e.f64("c0")?,
            c1: e.f64("c1")?,
        },
        "sine" => TimeFactor::Sine {
            kappa: e.f64("kappa")?,
            omega: e.f64("omega")?,
        },
        _ => return Err(e.unknown("time factor")),
    };
    e.finish()?;
    Ok(out)
}

fn nagumo(v: &Value, path: &str) -> Result<NagumoFn, String> {
    let mut e = Entry::new(v, path, None)?;
    let out = match e.name.as_str() {
        "power_p" => NagumoFn::PowerP { p: e.f64("p")? },
        "exp_minus_linear" => NagumoFn::ExpMinusLinear,
        other => match power_shorthand(other) {
            Some(p) => NagumoFn::PowerP { p },
            None => return Err(e.unknown("Nagumo function")),
        },
    };
    e.finish()?;
    Ok(out)
}

/// Sections `f` and `g` share the layout `{base, modulation, time_factor,
/// params}`; `params` belongs to a bare-name `base`.
fn section<'a>(
    v: &'a Value,
    path: &str,
) -> Result<(Obj<'a>, &'a Value, Option<&'a Value>), String> {
    let mut o = Obj::new(v, path)?;
    let base = o.req("base")?;
    let params = o.opt("params");
    Ok((o, base, params))
}

fn default_time_factor() -> TimeFactor {
    TimeFactor::Const { value: 1.0 }
}

fn integrand(v: &Value, path: &str) -> Result<IntegrandFamily, String> {
    let (mut o, base, params) = section(v, path)?;
    let base = velocity_fn(base, &format!("{path}.base"), params)?;
    let modulation = o
        .opt("modulation")
        .map(|m| velocity_fn(m, &format!("{path}.modulation"), None))
        .transpose()?;
    let tf = o
        .opt("time_factor")
        .map(|t| time_factor(t, &format!("{path}.time_factor")))
        .transpose()?;
    o.finish()?;
    let family = match (modulation, tf) {
        (None, None) => IntegrandFamily::autonomous(base),
        (None, Some(_)) => {
            return Err(format!("{path}.time_factor: given without a modulation"))
        }
        (Some(m), tf) => IntegrandFamily::new(base, m, tf.unwrap_or_else(default_time_factor)),
    };
    family.validate().map_err(|e| format!("{path}: {e}"))?;
    Ok(family)
}

fn state_family(v: &Value, path: &str) -> Result<StateFamily, String> {
    let (mut o, base, params) = section(v, path)?;
    let base = state_fn(base, &format!("{path}.base"), params)?;
    let modulation = o
        .opt("modulation")
        .map(|m| state_fn(m, &format!("{path}.modulation"), None))
        .transpose()?;
    let tf = o
        .opt("time_factor")
        .map(|t| time_factor(t, &format!("{path}.time_factor")))
        .transpose()?;
    o.finish()?;
    let family = match (modulation, tf) {
        (None, None) => StateFamily::autonomous(base),
        (None, Some(_)) => {
            return Err(format!("{path}.time_factor: given without a modulation"))
        }
        (Some(m), tf) => StateFamily::new(base, m, tf.unwrap_or_else(default_time_factor)),
    };
    family.validate().map_err(|e| format!("{path}: {e}"))?;
    Ok(family)
}

fn constants(v: &Value) -> Result<HypothesisConstants, String> {
    let mut o = Obj::new(v, "constants")?;
    let out = HypothesisConstants {
        a: o.f64("A")?,
        b: o.f64("B")?,
        alpha: o.f64("alpha")?,
        beta: o.f64("beta")?,
        c0: o.opt_f64("C0")?.unwrap_or(0.0),
        c1: o.opt_f64("C1")?.unwrap_or(0.0),
        c2: o.opt_f64("C2")?.unwrap_or(0.0),
        l: o.opt_f64("L")?.unwrap_or(0.0),
    };
    o.finish()?;
    Ok(out)
}
